//! Sectioned key=value experiment config: `[section]` headers, one `key =
//! value` per line, `#` comment lines. Every malformed line is reported with
//! its line number; unknown sections and keys are rejected rather than
//! ignored.

use std::collections::BTreeMap;

use sha2::{Digest, Sha256};

use crate::data::DatasetConfig;
use crate::error::{Error, Result};
use crate::eval::MiaConfig;
use crate::memorization::ScoreKind;
use crate::nn::Activation;
use crate::proxies::CurvatureConfig;
use crate::trainer::{Schedule, TrainConfig};
use crate::unlearn::{Algorithm, UnlearnConfig};

/// How the forget set is processed by the rum driver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Approach {
    RumF,
    Vanilla,
    Shuffle,
}

impl Approach {
    pub fn name(self) -> &'static str {
        match self {
            Approach::RumF => "rum_f",
            Approach::Vanilla => "vanilla",
            Approach::Shuffle => "shuffle",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "rum_f" => Some(Approach::RumF),
            "vanilla" => Some(Approach::Vanilla),
            "shuffle" => Some(Approach::Shuffle),
            _ => None,
        }
    }
}

/// `[mem]`: ensemble size and subset fraction for the memorization estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct MemSection {
    pub n_models: usize,
    pub subset_fraction: f64,
    pub seed: u64,
}

impl Default for MemSection {
    fn default() -> Self {
        MemSection { n_models: 40, subset_fraction: 0.7, seed: 1 }
    }
}

/// `[proxy]`: which proxy tables to compute plus curvature knobs.
#[derive(Debug, Clone, PartialEq)]
pub struct ProxySection {
    pub kinds: Vec<ScoreKind>,
    pub curvature: CurvatureConfig,
}

impl Default for ProxySection {
    fn default() -> Self {
        ProxySection {
            kinds: vec![
                ScoreKind::Confidence,
                ScoreKind::MaxConfidence,
                ScoreKind::Entropy,
                ScoreKind::BinaryAccuracy,
                ScoreKind::HoldoutRetraining,
                ScoreKind::LossCurvature,
            ],
            curvature: CurvatureConfig::default(),
        }
    }
}

/// `[rum]`: chunk count, approaches to compare, refinement proxies, and band
/// width of the selected forget set.
#[derive(Debug, Clone, PartialEq)]
pub struct RumSection {
    pub k: usize,
    pub approaches: Vec<Approach>,
    pub proxies: Vec<ScoreKind>,
    pub n_per_band: usize,
    /// Base seed of the shuffle control's random partition.
    pub seed: u64,
}

impl Default for RumSection {
    fn default() -> Self {
        RumSection {
            k: 3,
            approaches: vec![Approach::RumF, Approach::Vanilla, Approach::Shuffle],
            proxies: vec![
                ScoreKind::Confidence,
                ScoreKind::BinaryAccuracy,
                ScoreKind::HoldoutRetraining,
            ],
            n_per_band: 40,
            seed: 1,
        }
    }
}

/// `[sequential]`: multi-step stability experiment shape.
#[derive(Debug, Clone, PartialEq)]
pub struct SequentialSection {
    pub n_steps: usize,
    pub band_size: usize,
    pub proxy: ScoreKind,
    pub k: usize,
    pub seed: u64,
}

impl Default for SequentialSection {
    fn default() -> Self {
        SequentialSection {
            n_steps: 3,
            band_size: 60,
            proxy: ScoreKind::Confidence,
            k: 3,
            seed: 1,
        }
    }
}

/// Parsed experiment file. Blocks are optional at parse time; each subcommand
/// demands the ones it uses via the `need_*` accessors.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub seeds: Vec<u64>,
    pub output_dir: Option<String>,
    pub dataset: Option<DatasetConfig>,
    pub train: Option<TrainConfig>,
    pub mem: Option<MemSection>,
    pub proxy: Option<ProxySection>,
    pub unlearn: Option<UnlearnConfig>,
    pub rum: Option<RumSection>,
    pub eval: Option<MiaConfig>,
    pub sequential: Option<SequentialSection>,
    /// SHA-256 of the raw config text, embedded in every emitted artifact.
    pub digest: String,
}

fn missing(section: &str) -> Error {
    Error::Config { line: 0, message: format!("missing required [{section}] section") }
}

impl ExperimentConfig {
    pub fn need_dataset(&self) -> Result<&DatasetConfig> {
        self.dataset.as_ref().ok_or_else(|| missing("dataset"))
    }

    pub fn need_train(&self) -> Result<&TrainConfig> {
        self.train.as_ref().ok_or_else(|| missing("train"))
    }

    pub fn need_mem(&self) -> Result<&MemSection> {
        self.mem.as_ref().ok_or_else(|| missing("mem"))
    }

    pub fn need_proxy(&self) -> Result<&ProxySection> {
        self.proxy.as_ref().ok_or_else(|| missing("proxy"))
    }

    pub fn need_unlearn(&self) -> Result<&UnlearnConfig> {
        self.unlearn.as_ref().ok_or_else(|| missing("unlearn"))
    }

    pub fn need_rum(&self) -> Result<&RumSection> {
        self.rum.as_ref().ok_or_else(|| missing("rum"))
    }

    pub fn need_eval(&self) -> Result<&MiaConfig> {
        self.eval.as_ref().ok_or_else(|| missing("eval"))
    }

    pub fn need_sequential(&self) -> Result<&SequentialSection> {
        self.sequential.as_ref().ok_or_else(|| missing("sequential"))
    }
}

struct Block {
    entries: BTreeMap<String, (usize, String)>,
}

fn bad(line: usize, message: impl Into<String>) -> Error {
    Error::Config { line, message: message.into() }
}

impl Block {
    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.entries.remove(key)
    }

    fn parse_with<T>(
        &mut self,
        key: &str,
        what: &str,
        parse: impl Fn(&str) -> Option<T>,
    ) -> Result<Option<T>> {
        match self.take(key) {
            None => Ok(None),
            Some((line, raw)) => parse(&raw)
                .map(Some)
                .ok_or_else(|| bad(line, format!("key `{key}`: expected {what}, got `{raw}`"))),
        }
    }

    fn take_usize(&mut self, key: &str) -> Result<Option<usize>> {
        self.parse_with(key, "a non-negative integer", |s| s.parse().ok())
    }

    fn take_u64(&mut self, key: &str) -> Result<Option<u64>> {
        self.parse_with(key, "a non-negative integer", |s| s.parse().ok())
    }

    fn take_f64(&mut self, key: &str) -> Result<Option<f64>> {
        self.parse_with(key, "a number", |s| s.parse().ok())
    }

    fn take_list<T>(
        &mut self,
        key: &str,
        what: &str,
        parse: impl Fn(&str) -> Option<T>,
    ) -> Result<Option<Vec<T>>> {
        match self.take(key) {
            None => Ok(None),
            Some((line, raw)) => {
                let mut out = Vec::new();
                for item in raw.split(',') {
                    let item = item.trim();
                    if item.is_empty() {
                        return Err(bad(line, format!("key `{key}`: empty list item")));
                    }
                    out.push(parse(item).ok_or_else(|| {
                        bad(line, format!("key `{key}`: expected {what}, got `{item}`"))
                    })?);
                }
                Ok(Some(out))
            }
        }
    }

    /// Every key must have been taken by now; leftovers are typos.
    fn finish(self, section: &str) -> Result<()> {
        if let Some((key, (line, _))) = self.entries.into_iter().next() {
            let place = if section.is_empty() {
                "above the first section header".to_string()
            } else {
                format!("in [{section}]")
            };
            return Err(bad(line, format!("unknown key `{key}` {place}")));
        }
        Ok(())
    }
}

fn split_blocks(text: &str) -> Result<BTreeMap<String, Block>> {
    const SECTIONS: [&str; 8] =
        ["dataset", "train", "mem", "proxy", "unlearn", "rum", "eval", "sequential"];
    let mut blocks: BTreeMap<String, Block> = BTreeMap::new();
    let mut current = String::new();
    blocks.insert(String::new(), Block { entries: BTreeMap::new() });
    for (i, raw_line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| bad(line_no, "section header is missing the closing `]`"))?
                .trim();
            if !SECTIONS.contains(&name) {
                return Err(bad(
                    line_no,
                    format!("unknown section [{name}]; expected one of {}", SECTIONS.join(", ")),
                ));
            }
            if blocks.contains_key(name) {
                return Err(bad(line_no, format!("section [{name}] appears twice")));
            }
            current = name.to_string();
            blocks.insert(current.clone(), Block { entries: BTreeMap::new() });
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| bad(line_no, "expected `key = value` or a `[section]` header"))?;
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() {
            return Err(bad(line_no, "empty key before `=`"));
        }
        let block = blocks.get_mut(&current).expect("current block exists");
        if block.entries.insert(key.to_string(), (line_no, value.to_string())).is_some() {
            return Err(bad(line_no, format!("key `{key}` appears twice in the same section")));
        }
    }
    Ok(blocks)
}

fn dataset_section(mut b: Block) -> Result<DatasetConfig> {
    let d = DatasetConfig::default();
    let cfg = DatasetConfig {
        n_classes: b.take_usize("n_classes")?.unwrap_or(d.n_classes),
        n_train: b.take_usize("n_train")?.unwrap_or(d.n_train),
        n_test: b.take_usize("n_test")?.unwrap_or(d.n_test),
        input_dim: b.take_usize("input_dim")?.unwrap_or(d.input_dim),
        atypical_fraction: b.take_f64("atypical_fraction")?.unwrap_or(d.atypical_fraction),
        noise_fraction: b.take_f64("noise_fraction")?.unwrap_or(d.noise_fraction),
        seed: b.take_u64("seed")?.unwrap_or(d.seed),
    };
    b.finish("dataset")?;
    Ok(cfg)
}

fn train_section(mut b: Block) -> Result<TrainConfig> {
    let d = TrainConfig::default();
    let milestones = b.take_list("milestones", "a non-negative integer", |s| s.parse().ok())?;
    let factor = b.take_f64("factor")?;
    let name = b.parse_with("schedule", "constant, cosine, or multistep", |s| {
        matches!(s, "constant" | "cosine" | "multistep").then(|| s.to_string())
    })?;
    if name.as_deref() != Some("multistep") && (milestones.is_some() || factor.is_some()) {
        return Err(bad(0, "milestones/factor are only meaningful with `schedule = multistep`"));
    }
    let schedule = match name.as_deref() {
        None => d.schedule.clone(),
        Some("constant") => Schedule::Constant,
        Some("cosine") => Schedule::Cosine,
        _ => Schedule::Multistep {
            milestones: milestones.unwrap_or_default(),
            factor: factor.unwrap_or(0.2),
        },
    };
    let cfg = TrainConfig {
        hidden_dims: b
            .take_list("hidden_dims", "a positive integer", |s| s.parse().ok())?
            .unwrap_or(d.hidden_dims),
        activation: b
            .parse_with("activation", "relu or identity", |s| match s {
                "relu" => Some(Activation::Relu),
                "identity" => Some(Activation::Identity),
                _ => None,
            })?
            .unwrap_or(d.activation),
        epochs: b.take_usize("epochs")?.unwrap_or(d.epochs),
        batch_size: b.take_usize("batch_size")?.unwrap_or(d.batch_size),
        base_lr: b.take_f64("base_lr")?.unwrap_or(d.base_lr),
        schedule,
        momentum: b.take_f64("momentum")?.unwrap_or(d.momentum),
        weight_decay: b.take_f64("weight_decay")?.unwrap_or(d.weight_decay),
        collect_checkpoints: false,
        seed: b.take_u64("seed")?.unwrap_or(d.seed),
    };
    b.finish("train")?;
    Ok(cfg)
}

fn mem_section(mut b: Block) -> Result<MemSection> {
    let d = MemSection::default();
    let cfg = MemSection {
        n_models: b.take_usize("t")?.unwrap_or(d.n_models),
        subset_fraction: b.take_f64("p")?.unwrap_or(d.subset_fraction),
        seed: b.take_u64("seed")?.unwrap_or(d.seed),
    };
    b.finish("mem")?;
    Ok(cfg)
}

fn proxy_kind_list(
    b: &mut Block,
    key: &str,
    allow_memorization: bool,
) -> Result<Option<Vec<ScoreKind>>> {
    let kinds = b.take_list(key, "a proxy kind", ScoreKind::parse)?;
    if let Some(ref ks) = kinds {
        if ks.is_empty() {
            return Err(bad(0, format!("key `{key}`: list must not be empty")));
        }
        if !allow_memorization && ks.contains(&ScoreKind::Memorization) {
            return Err(bad(
                0,
                format!("key `{key}`: `memorization` is the reference, not a proxy"),
            ));
        }
        for (i, k) in ks.iter().enumerate() {
            if ks[..i].contains(k) {
                return Err(bad(0, format!("key `{key}`: `{}` listed twice", k.name())));
            }
        }
    }
    Ok(kinds)
}

fn proxy_section(mut b: Block) -> Result<ProxySection> {
    let d = ProxySection::default();
    let kinds = proxy_kind_list(&mut b, "proxies", false)?.unwrap_or(d.kinds);
    let curvature = CurvatureConfig {
        n_probes: b.take_usize("curvature_probes")?.unwrap_or(d.curvature.n_probes),
        step: b.take_f64("curvature_step")?.unwrap_or(d.curvature.step),
        seed: b.take_u64("seed")?.unwrap_or(d.curvature.seed),
    };
    b.finish("proxy")?;
    Ok(ProxySection { kinds, curvature })
}

fn unlearn_section(mut b: Block) -> Result<UnlearnConfig> {
    let d = UnlearnConfig::default();
    let cfg = UnlearnConfig {
        algorithm: b
            .parse_with("algorithm", "an unlearning algorithm name", Algorithm::parse)?
            .unwrap_or(d.algorithm),
        epochs: b.take_usize("epochs")?.unwrap_or(d.epochs),
        lr: b.take_f64("lr")?.unwrap_or(d.lr),
        beta: b.take_f64("beta")?.unwrap_or(d.beta),
        gamma: b.take_f64("gamma")?.unwrap_or(d.gamma),
        sparsity_ratio: b.take_f64("sparsity_ratio")?.unwrap_or(d.sparsity_ratio),
        batch_size: b.take_usize("batch_size")?.unwrap_or(d.batch_size),
        momentum: b.take_f64("momentum")?.unwrap_or(d.momentum),
        weight_decay: b.take_f64("weight_decay")?.unwrap_or(d.weight_decay),
        seed: b.take_u64("seed")?.unwrap_or(d.seed),
    };
    b.finish("unlearn")?;
    Ok(cfg)
}

fn rum_section(mut b: Block) -> Result<RumSection> {
    let d = RumSection::default();
    let approaches = b.take_list("approaches", "rum_f, vanilla, or shuffle", Approach::parse)?;
    if let Some(ref aps) = approaches {
        if aps.is_empty() {
            return Err(bad(0, "key `approaches`: list must not be empty"));
        }
        for (i, a) in aps.iter().enumerate() {
            if aps[..i].contains(a) {
                return Err(bad(0, format!("key `approaches`: `{}` listed twice", a.name())));
            }
        }
    }
    let cfg = RumSection {
        k: b.take_usize("k")?.unwrap_or(d.k),
        approaches: approaches.unwrap_or(d.approaches),
        proxies: proxy_kind_list(&mut b, "proxies", true)?.unwrap_or(d.proxies),
        n_per_band: b.take_usize("n_per_band")?.unwrap_or(d.n_per_band),
        seed: b.take_u64("seed")?.unwrap_or(d.seed),
    };
    b.finish("rum")?;
    Ok(cfg)
}

fn eval_section(mut b: Block) -> Result<MiaConfig> {
    let cfg = MiaConfig {
        n_samples: b.take_usize("mia_samples")?.unwrap_or(200),
        seed: b.take_u64("seed")?.unwrap_or(1),
    };
    b.finish("eval")?;
    Ok(cfg)
}

fn sequential_section(mut b: Block) -> Result<SequentialSection> {
    let d = SequentialSection::default();
    let cfg = SequentialSection {
        n_steps: b.take_usize("n_steps")?.unwrap_or(d.n_steps),
        band_size: b.take_usize("band_size")?.unwrap_or(d.band_size),
        proxy: b
            .parse_with("proxy", "a proxy kind", ScoreKind::parse)?
            .unwrap_or(d.proxy),
        k: b.take_usize("k")?.unwrap_or(d.k),
        seed: b.take_u64("seed")?.unwrap_or(d.seed),
    };
    if cfg.proxy == ScoreKind::Memorization {
        return Err(bad(0, "key `proxy`: sequential refinement expects a proxy kind"));
    }
    b.finish("sequential")?;
    Ok(cfg)
}

/// Parses config text. The digest is the SHA-256 of the exact bytes given.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut blocks = split_blocks(text)?;
    let mut top = blocks.remove("").expect("top block always present");
    let seeds = top
        .take_list("seeds", "a non-negative integer", |s| s.parse::<u64>().ok())?
        .ok_or_else(|| bad(0, "missing top-level `seeds = ...` line"))?;
    if seeds.is_empty() {
        return Err(bad(0, "`seeds` must list at least one seed"));
    }
    for (i, s) in seeds.iter().enumerate() {
        if seeds[..i].contains(s) {
            return Err(bad(0, format!("`seeds` lists {s} twice")));
        }
    }
    let output_dir = top.take("output_dir").map(|(_, v)| v);
    top.finish("")?;
    let cfg = ExperimentConfig {
        seeds,
        output_dir,
        dataset: blocks.remove("dataset").map(dataset_section).transpose()?,
        train: blocks.remove("train").map(train_section).transpose()?,
        mem: blocks.remove("mem").map(mem_section).transpose()?,
        proxy: blocks.remove("proxy").map(proxy_section).transpose()?,
        unlearn: blocks.remove("unlearn").map(unlearn_section).transpose()?,
        rum: blocks.remove("rum").map(rum_section).transpose()?,
        eval: blocks.remove("eval").map(eval_section).transpose()?,
        sequential: blocks.remove("sequential").map(sequential_section).transpose()?,
        digest: hex::encode(Sha256::digest(text.as_bytes())),
    };
    Ok(cfg)
}

/// Reads and parses a config file.
pub fn load_config(path: &std::path::Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = "\
# experiment file
seeds = 1, 2, 3
output_dir = out

[dataset]
n_classes = 4
n_train = 600
n_test = 300
input_dim = 8
atypical_fraction = 0.2
noise_fraction = 0.1
seed = 7

[train]
hidden_dims = 32, 16
activation = relu
epochs = 25
batch_size = 32
base_lr = 0.1
schedule = multistep
milestones = 10, 20
factor = 0.5
momentum = 0.8
weight_decay = 0.001
seed = 2

[mem]
t = 50
p = 0.6
seed = 3

[proxy]
proxies = confidence, holdout_retraining, loss_curvature
curvature_probes = 4
curvature_step = 0.0001
seed = 5

[unlearn]
algorithm = neggrad_plus
epochs = 4
lr = 0.02
beta = 0.9
batch_size = 16
seed = 11

[rum]
k = 3
approaches = rum_f, vanilla
proxies = confidence, binary_accuracy
n_per_band = 5
seed = 13

[eval]
mia_samples = 150
seed = 17

[sequential]
n_steps = 2
band_size = 4
proxy = holdout_retraining
k = 2
seed = 19
";

    #[test]
    fn full_config_round_trips_every_block() {
        let cfg = parse_config(FULL).unwrap();
        assert_eq!(cfg.seeds, vec![1, 2, 3]);
        assert_eq!(cfg.output_dir.as_deref(), Some("out"));
        let ds = cfg.need_dataset().unwrap();
        assert_eq!((ds.n_classes, ds.n_train, ds.n_test, ds.input_dim), (4, 600, 300, 8));
        assert_eq!(ds.seed, 7);
        let tr = cfg.need_train().unwrap();
        assert_eq!(tr.hidden_dims, vec![32, 16]);
        assert_eq!(tr.schedule, Schedule::Multistep { milestones: vec![10, 20], factor: 0.5 });
        assert!(!tr.collect_checkpoints);
        let mem = cfg.need_mem().unwrap();
        assert_eq!((mem.n_models, mem.subset_fraction), (50, 0.6));
        let px = cfg.need_proxy().unwrap();
        assert_eq!(px.kinds.len(), 3);
        assert_eq!(px.curvature.n_probes, 4);
        let ul = cfg.need_unlearn().unwrap();
        assert_eq!(ul.algorithm, Algorithm::NegGradPlus);
        assert_eq!(ul.beta, 0.9);
        assert_eq!(ul.gamma, UnlearnConfig::default().gamma); // untouched default
        let rum = cfg.need_rum().unwrap();
        assert_eq!(rum.approaches, vec![Approach::RumF, Approach::Vanilla]);
        assert_eq!(rum.n_per_band, 5);
        assert_eq!(cfg.need_eval().unwrap().n_samples, 150);
        assert_eq!(cfg.need_sequential().unwrap().proxy, ScoreKind::HoldoutRetraining);
        assert_eq!(cfg.digest.len(), 64);
    }

    #[test]
    fn missing_blocks_are_reported_by_name() {
        let cfg = parse_config("seeds = 1\n").unwrap();
        let err = cfg.need_rum().unwrap_err();
        assert!(err.to_string().contains("[rum]"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn empty_sections_take_defaults() {
        let cfg = parse_config("seeds = 5\n[dataset]\n[train]\n[eval]\n").unwrap();
        assert_eq!(*cfg.need_dataset().unwrap(), DatasetConfig::default());
        assert_eq!(*cfg.need_train().unwrap(), TrainConfig::default());
        assert_eq!(cfg.need_eval().unwrap().n_samples, 200);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse_config("seeds = 1\n[dataset]\nn_train = many\n").unwrap_err();
        match err {
            Error::Config { line, ref message } => {
                assert_eq!(line, 3);
                assert!(message.contains("n_train"), "{message}");
            }
            other => panic!("expected config error, got {other}"),
        }
        let err = parse_config("seeds = 1\njunk line\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 2, .. }), "{err}");
    }

    #[test]
    fn unknown_sections_keys_and_duplicates_are_rejected() {
        assert!(parse_config("seeds = 1\n[plots]\n").is_err());
        assert!(parse_config("seeds = 1\n[train]\nlearning_rate = 0.1\n").is_err());
        assert!(parse_config("seeds = 1\n[train]\nepochs = 2\nepochs = 3\n").is_err());
        assert!(parse_config("seeds = 1\n[train]\n[train]\n").is_err());
        assert!(parse_config("seeds = 1\nwhatever = 2\n").is_err());
    }

    #[test]
    fn seed_list_is_required_and_duplicate_free() {
        assert!(parse_config("[dataset]\n").is_err());
        assert!(parse_config("seeds = 1, 1\n").is_err());
        assert!(parse_config("seeds = \n").is_err());
    }

    #[test]
    fn memorization_is_not_a_proxy_but_may_refine() {
        assert!(parse_config("seeds = 1\n[proxy]\nproxies = memorization\n").is_err());
        assert!(parse_config("seeds = 1\n[sequential]\nproxy = memorization\n").is_err());
        let cfg = parse_config("seeds = 1\n[rum]\nproxies = memorization, confidence\n").unwrap();
        assert_eq!(
            cfg.need_rum().unwrap().proxies,
            vec![ScoreKind::Memorization, ScoreKind::Confidence]
        );
    }

    #[test]
    fn schedule_knobs_must_match_schedule() {
        assert!(parse_config("seeds = 1\n[train]\nmilestones = 5\n").is_err());
        assert!(parse_config("seeds = 1\n[train]\nschedule = cosine\nfactor = 0.5\n").is_err());
        let cfg =
            parse_config("seeds = 1\n[train]\nschedule = multistep\nmilestones = 5\n").unwrap();
        assert_eq!(
            cfg.need_train().unwrap().schedule,
            Schedule::Multistep { milestones: vec![5], factor: 0.2 }
        );
    }

    #[test]
    fn digest_tracks_text_exactly() {
        let a = parse_config("seeds = 1\n").unwrap();
        let b = parse_config("seeds = 1\n").unwrap();
        let c = parse_config("seeds = 1 \n").unwrap();
        assert_eq!(a.digest, b.digest);
        assert_ne!(a.digest, c.digest);
    }
}
