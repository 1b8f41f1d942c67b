//! Synthetic classification data with a controllable memorization tail.
//!
//! Each class is a unit-variance Gaussian cluster plus a few rare "atypical"
//! subclusters centered 3σ away from the class mean, each carrying roughly a
//! tenth of the main cluster's mass. A fraction of train labels is flipped
//! uniformly to a different class; flipped examples keep their original label
//! alongside the presented one. Atypical and noisy examples are the ones a
//! model can only get right by memorizing them.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::memorization::ScoreTable;
use crate::nn::Batch;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    HoldoutTest,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::HoldoutTest => "holdout_test",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "train" => Some(Split::Train),
            "holdout_test" => Some(Split::HoldoutTest),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Clean,
    Atypical,
    Noisy,
}

impl Provenance {
    pub fn name(self) -> &'static str {
        match self {
            Provenance::Clean => "clean",
            Provenance::Atypical => "atypical",
            Provenance::Noisy => "noisy",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "clean" => Some(Provenance::Clean),
            "atypical" => Some(Provenance::Atypical),
            "noisy" => Some(Provenance::Noisy),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Example {
    pub id: usize,
    pub split: Split,
    /// Label the model trains against (flipped for noisy examples).
    pub label: usize,
    /// Label before any flip; equals `label` unless provenance is noisy.
    pub original_label: usize,
    pub provenance: Provenance,
    pub features: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DatasetConfig {
    pub n_classes: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub input_dim: usize,
    pub atypical_fraction: f64,
    pub noise_fraction: f64,
    pub seed: u64,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            n_classes: 5,
            n_train: 2000,
            n_test: 1000,
            input_dim: 16,
            atypical_fraction: 0.15,
            noise_fraction: 0.10,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub examples: Vec<Example>,
    pub n_classes: usize,
    pub input_dim: usize,
}

/// Generates the synthetic dataset. Counts are exact by construction:
/// `round(noise_fraction · n_train)` train examples get flipped labels, and
/// each class holds `round(atypical_fraction · n_class)` atypical examples
/// per split. An example that is both atypical and flipped is tagged noisy.
pub fn make_dataset(cfg: &DatasetConfig) -> Result<Dataset> {
    if cfg.n_classes < 2 {
        return Err(Error::Validation("need at least 2 classes".into()));
    }
    if cfg.n_train == 0 || cfg.n_test == 0 {
        return Err(Error::Validation("train and test sizes must be positive".into()));
    }
    if cfg.input_dim == 0 {
        return Err(Error::Validation("input_dim must be positive".into()));
    }
    for (name, f) in [
        ("atypical_fraction", cfg.atypical_fraction),
        ("noise_fraction", cfg.noise_fraction),
    ] {
        if !(0.0..=0.5).contains(&f) {
            return Err(Error::Validation(format!("{name} must lie in [0, 0.5], got {f}")));
        }
    }

    let d = cfg.input_dim;
    let base = rng::mix(cfg.seed, rng::tag::DATASET);
    let mut means_rng = rng::rng(rng::mix(base, 1));
    let mut layout_rng = rng::rng(rng::mix(base, 2));
    let mut feature_rng = rng::rng(rng::mix(base, 3));

    // Class means at scale 3 keep clusters separable at unit variance.
    let means: Vec<Vec<f64>> = (0..cfg.n_classes)
        .map(|_| (0..d).map(|_| 3.0 * means_rng.sample::<f64, _>(StandardNormal)).collect())
        .collect();

    // Atypical subclusters sit 3σ from the class mean. Their count is chosen
    // so each carries about a tenth of the main cluster's sampling mass:
    // f/M ≈ (1-f)/10.
    let n_sub = if cfg.atypical_fraction > 0.0 {
        ((10.0 * cfg.atypical_fraction / (1.0 - cfg.atypical_fraction)).round() as usize).max(1)
    } else {
        0
    };
    let sub_centers: Vec<Vec<Vec<f64>>> = means
        .iter()
        .map(|mean| {
            (0..n_sub)
                .map(|_| {
                    let mut dir: Vec<f64> =
                        (0..d).map(|_| layout_rng.sample::<f64, _>(StandardNormal)).collect();
                    let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
                    dir.iter_mut().for_each(|v| *v = *v / norm * 3.0);
                    mean.iter().zip(&dir).map(|(m, u)| m + u).collect()
                })
                .collect()
        })
        .collect();

    // Per example: class by round-robin within its split, then per class an
    // exact count of atypical slots spread round-robin over the subclusters.
    let n_total = cfg.n_train + cfg.n_test;
    let mut class_of = vec![0usize; n_total];
    let mut center_of: Vec<Option<usize>> = vec![None; n_total]; // Some(sub index) = atypical
    for (split_start, split_len) in [(0, cfg.n_train), (cfg.n_train, cfg.n_test)] {
        let mut slots_by_class: Vec<Vec<usize>> = vec![Vec::new(); cfg.n_classes];
        for i in 0..split_len {
            let id = split_start + i;
            class_of[id] = i % cfg.n_classes;
            slots_by_class[class_of[id]].push(id);
        }
        for slots in slots_by_class.iter_mut() {
            let n_atypical = if n_sub == 0 {
                0
            } else {
                (cfg.atypical_fraction * slots.len() as f64).round() as usize
            };
            slots.shuffle(&mut layout_rng);
            for (k, &id) in slots.iter().take(n_atypical).enumerate() {
                center_of[id] = Some(k % n_sub);
            }
        }
    }

    // Exactly round(noise_fraction · n_train) flipped train labels.
    let n_noisy = (cfg.noise_fraction * cfg.n_train as f64).round() as usize;
    let mut noise_rng = rng::rng(rng::mix(cfg.seed, rng::tag::NOISE));
    let mut train_order: Vec<usize> = (0..cfg.n_train).collect();
    train_order.shuffle(&mut noise_rng);
    let mut flipped = vec![false; n_total];
    let mut flip_to = vec![0usize; n_total];
    for &id in train_order.iter().take(n_noisy) {
        flipped[id] = true;
        let off = noise_rng.gen_range(0..cfg.n_classes - 1);
        flip_to[id] = if off >= class_of[id] { off + 1 } else { off };
    }

    let mut examples = Vec::with_capacity(n_total);
    for id in 0..n_total {
        let class = class_of[id];
        let center: &[f64] = match center_of[id] {
            Some(s) => &sub_centers[class][s],
            None => &means[class],
        };
        let features: Vec<f64> = center
            .iter()
            .map(|c| c + feature_rng.sample::<f64, _>(StandardNormal))
            .collect();
        let split = if id < cfg.n_train { Split::Train } else { Split::HoldoutTest };
        let (label, provenance) = if flipped[id] {
            (flip_to[id], Provenance::Noisy)
        } else if center_of[id].is_some() {
            (class, Provenance::Atypical)
        } else {
            (class, Provenance::Clean)
        };
        examples.push(Example {
            id,
            split,
            label,
            original_label: class,
            provenance,
            features,
        });
    }

    Ok(Dataset { examples, n_classes: cfg.n_classes, input_dim: cfg.input_dim })
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn example(&self, id: usize) -> &Example {
        &self.examples[id]
    }

    fn split_ids(&self, split: Split) -> Vec<usize> {
        self.examples.iter().filter(|e| e.split == split).map(|e| e.id).collect()
    }

    pub fn train_ids(&self) -> Vec<usize> {
        self.split_ids(Split::Train)
    }

    pub fn test_ids(&self) -> Vec<usize> {
        self.split_ids(Split::HoldoutTest)
    }

    pub fn train_ids_with(&self, provenance: Provenance) -> Vec<usize> {
        self.examples
            .iter()
            .filter(|e| e.split == Split::Train && e.provenance == provenance)
            .map(|e| e.id)
            .collect()
    }

    /// Gathers the given examples into a batch, presented labels included.
    pub fn batch(&self, ids: &[usize]) -> Result<Batch> {
        if ids.is_empty() {
            return Err(Error::Validation("cannot build a batch from zero ids".into()));
        }
        let mut inputs = Vec::with_capacity(ids.len() * self.input_dim);
        let mut labels = Vec::with_capacity(ids.len());
        for &id in ids {
            let ex = self.examples.get(id).ok_or_else(|| {
                Error::Validation(format!("example id {id} out of range ({} examples)", self.len()))
            })?;
            inputs.extend_from_slice(&ex.features);
            labels.push(ex.label);
        }
        Batch::new(inputs, labels, self.input_dim)
    }

    /// CSV body: `id,split,label,original_label,provenance,x0..` — floats are
    /// written in shortest round-trip form, so import is bit-exact.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("id,split,label,original_label,provenance");
        for i in 0..self.input_dim {
            out.push_str(&format!(",x{i}"));
        }
        out.push('\n');
        for ex in &self.examples {
            out.push_str(&format!(
                "{},{},{},{},{}",
                ex.id,
                ex.split.name(),
                ex.label,
                ex.original_label,
                ex.provenance.name()
            ));
            for v in &ex.features {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let bad = |line: usize, msg: String| Error::Artifact {
            path: "<dataset csv>".into(),
            message: format!("line {line}: {msg}"),
        };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.starts_with('#') && !l.is_empty());
        let (hline, header) = lines.next().ok_or_else(|| bad(0, "empty file".into()))?;
        let cols: Vec<&str> = header.split(',').collect();
        if cols.len() < 6 || cols[..5] != ["id", "split", "label", "original_label", "provenance"] {
            return Err(bad(hline + 1, format!("unexpected header {header:?}")));
        }
        let input_dim = cols.len() - 5;
        for (i, c) in cols[5..].iter().enumerate() {
            if *c != format!("x{i}") {
                return Err(bad(hline + 1, format!("feature column {i} is named {c:?}")));
            }
        }
        let mut examples = Vec::new();
        for (i, line) in lines {
            let lineno = i + 1;
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 5 + input_dim {
                return Err(bad(lineno, format!("expected {} fields, got {}", 5 + input_dim, fields.len())));
            }
            let id: usize =
                fields[0].parse().map_err(|_| bad(lineno, format!("bad id {:?}", fields[0])))?;
            let split = Split::parse(fields[1])
                .ok_or_else(|| bad(lineno, format!("unknown split {:?}", fields[1])))?;
            let label: usize =
                fields[2].parse().map_err(|_| bad(lineno, format!("bad label {:?}", fields[2])))?;
            let original_label: usize = fields[3]
                .parse()
                .map_err(|_| bad(lineno, format!("bad original_label {:?}", fields[3])))?;
            let provenance = Provenance::parse(fields[4])
                .ok_or_else(|| bad(lineno, format!("unknown provenance {:?}", fields[4])))?;
            if (label != original_label) != (provenance == Provenance::Noisy) {
                return Err(bad(lineno, "label/original_label disagree with provenance".into()));
            }
            if provenance == Provenance::Noisy && split != Split::Train {
                return Err(bad(lineno, "label noise outside the train split".into()));
            }
            let mut features = Vec::with_capacity(input_dim);
            for f in &fields[5..] {
                let v: f64 = f.parse().map_err(|_| bad(lineno, format!("bad feature {f:?}")))?;
                if !v.is_finite() {
                    return Err(bad(lineno, format!("non-finite feature {f:?}")));
                }
                features.push(v);
            }
            examples.push(Example { id, split, label, original_label, provenance, features });
        }
        examples.sort_by_key(|e| e.id);
        if examples.is_empty() {
            return Err(bad(0, "no examples".into()));
        }
        for (i, ex) in examples.iter().enumerate() {
            if ex.id != i {
                return Err(bad(0, format!("ids are not contiguous from 0 (missing or duplicate {i})")));
            }
        }
        let n_classes = examples
            .iter()
            .map(|e| e.label.max(e.original_label))
            .max()
            .unwrap()
            + 1;
        if n_classes < 2 {
            return Err(bad(0, "dataset needs at least 2 classes".into()));
        }
        for split in [Split::Train, Split::HoldoutTest] {
            if !examples.iter().any(|e| e.split == split) {
                return Err(bad(0, format!("split {:?} is empty", split.name())));
            }
        }
        Ok(Dataset { examples, n_classes, input_dim })
    }
}

/// A forget/retain split of the train ids.
#[derive(Debug, Clone)]
pub struct UnlearnTask {
    pub forget_ids: Vec<usize>,
    pub retain_ids: Vec<usize>,
}

impl UnlearnTask {
    /// Builds the task from the train universe and the forget set; both sides
    /// must end up non-empty.
    pub fn new(train_ids: &[usize], forget_ids: &[usize]) -> Result<Self> {
        let mut forget: Vec<usize> = forget_ids.to_vec();
        forget.sort_unstable();
        forget.dedup();
        if forget.len() != forget_ids.len() {
            return Err(Error::Validation("duplicate ids in forget set".into()));
        }
        if forget.is_empty() {
            return Err(Error::Validation("forget set is empty".into()));
        }
        let universe: std::collections::BTreeSet<usize> = train_ids.iter().copied().collect();
        if let Some(id) = forget.iter().find(|id| !universe.contains(id)) {
            return Err(Error::Validation(format!("forget id {id} is not a train example")));
        }
        let forget_set: std::collections::BTreeSet<usize> = forget.iter().copied().collect();
        let retain: Vec<usize> =
            universe.iter().copied().filter(|id| !forget_set.contains(id)).collect();
        if retain.is_empty() {
            return Err(Error::Validation("forget set covers the whole train split".into()));
        }
        Ok(UnlearnTask { forget_ids: forget, retain_ids: retain })
    }
}

/// One of the three score bands the forget set is drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Band {
    Low,
    Median,
    High,
}

/// Picks `n_per_band` examples per requested band of the memorization-aligned
/// score distribution: the lowest, the median-centered, and the highest.
///
/// Ranking ties share their average rank and are broken by example id
/// ascending; bands are filled in low → median → high order, skipping ids an
/// earlier band already took. With all-equal scores, the forget set is
/// therefore the first `n_per_band · bands` ids. The result depends only on
/// (score, id) pairs, never on table construction order.
pub fn select_forget(scores: &ScoreTable, n_per_band: usize, bands: &[Band]) -> Result<UnlearnTask> {
    if n_per_band == 0 {
        return Err(Error::Validation("n_per_band must be positive".into()));
    }
    if bands.is_empty() {
        return Err(Error::Validation("at least one band is required".into()));
    }
    for (i, b) in bands.iter().enumerate() {
        if bands[..i].contains(b) {
            return Err(Error::Validation(format!("band {b:?} listed twice")));
        }
    }
    if !scores.undefined_ids.is_empty() {
        return Err(Error::Validation(format!(
            "cannot select a forget set while {} examples have undefined scores",
            scores.undefined_ids.len()
        )));
    }
    let n = scores.len();
    let want = n_per_band * bands.len();
    if want >= n {
        return Err(Error::Validation(format!(
            "forget set of {want} does not leave a retain set out of {n} scored examples"
        )));
    }

    // ascending by (aligned score, id); ties share their average rank
    let mut order: Vec<(usize, f64)> = scores
        .iter()
        .map(|(id, s)| (id, s * scores.kind.alignment()))
        .collect();
    order.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
    let mut avg_rank = vec![0.0f64; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j < n && order[j].1 == order[i].1 {
            j += 1;
        }
        let rank = (i + j - 1) as f64 / 2.0;
        for r in avg_rank.iter_mut().take(j).skip(i) {
            *r = rank;
        }
        i = j;
    }

    let mut taken = vec![false; n];
    let mut forget = Vec::with_capacity(want);
    let take_by = |key: &dyn Fn(usize) -> (f64, usize), taken: &mut Vec<bool>, forget: &mut Vec<usize>| {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| {
            let (ka, ia) = key(a);
            let (kb, ib) = key(b);
            ka.partial_cmp(&kb).unwrap().then(ia.cmp(&ib))
        });
        let mut picked = 0;
        for pos in idx {
            if picked == n_per_band {
                break;
            }
            if !taken[pos] {
                taken[pos] = true;
                forget.push(order[pos].0);
                picked += 1;
            }
        }
    };
    let median_rank = (n - 1) as f64 / 2.0;
    for band in [Band::Low, Band::Median, Band::High] {
        if !bands.contains(&band) {
            continue;
        }
        match band {
            Band::Low => take_by(&|p| (avg_rank[p], order[p].0), &mut taken, &mut forget),
            Band::Median => take_by(
                &|p| ((avg_rank[p] - median_rank).abs(), order[p].0),
                &mut taken,
                &mut forget,
            ),
            Band::High => take_by(&|p| (-avg_rank[p], order[p].0), &mut taken, &mut forget),
        }
    }

    let ids: Vec<usize> = scores.ids().collect();
    UnlearnTask::new(&ids, &forget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::memorization::ScoreKind;
    use crate::timing::Timing;

    fn mem_table(scores: &[(usize, f64)]) -> ScoreTable {
        ScoreTable::new(ScoreKind::Memorization, scores.to_vec(), Vec::new(), Timing::default())
            .unwrap()
    }

    #[test]
    fn noisy_count_is_exact() {
        let cfg = DatasetConfig { n_train: 2000, noise_fraction: 0.10, ..Default::default() };
        let data = make_dataset(&cfg).unwrap();
        let noisy = data.train_ids_with(Provenance::Noisy);
        assert_eq!(noisy.len(), 200);
        for id in noisy {
            let ex = data.example(id);
            assert_ne!(ex.label, ex.original_label);
            assert!(ex.label < data.n_classes);
        }
        // noise never leaks into the holdout/test split
        for id in data.test_ids() {
            let ex = data.example(id);
            assert_eq!(ex.label, ex.original_label);
            assert_ne!(ex.provenance, Provenance::Noisy);
        }
    }

    #[test]
    fn splits_are_disjoint_and_cover_everything() {
        let data = make_dataset(&DatasetConfig::default()).unwrap();
        let train = data.train_ids();
        let test = data.test_ids();
        assert_eq!(train.len(), 2000);
        assert_eq!(test.len(), 1000);
        assert_eq!(train.len() + test.len(), data.len());
        let mut all: Vec<usize> = train.iter().chain(test.iter()).copied().collect();
        all.sort_unstable();
        assert!(all.iter().enumerate().all(|(i, &id)| i == id));
    }

    #[test]
    fn generation_is_deterministic_per_seed() {
        let cfg = DatasetConfig::default();
        let a = make_dataset(&cfg).unwrap();
        let b = make_dataset(&cfg).unwrap();
        for (x, y) in a.examples.iter().zip(&b.examples) {
            assert_eq!(x.label, y.label);
            assert!(x.features.iter().zip(&y.features).all(|(u, v)| u.to_bits() == v.to_bits()));
        }
        let c = make_dataset(&DatasetConfig { seed: 2, ..cfg }).unwrap();
        assert!(a
            .examples
            .iter()
            .zip(&c.examples)
            .any(|(x, y)| x.features != y.features));
    }

    #[test]
    fn atypical_examples_exist_and_sit_off_cluster() {
        let data = make_dataset(&DatasetConfig::default()).unwrap();
        let atypical = data.train_ids_with(Provenance::Atypical);
        // 15% of 400 per class, minus the ones the noise flip re-tagged
        assert!(atypical.len() > 200, "got {}", atypical.len());
        assert!(atypical.len() <= 300);
    }

    #[test]
    fn fraction_bounds_are_enforced() {
        let cfg = DatasetConfig { noise_fraction: 0.6, ..Default::default() };
        assert!(make_dataset(&cfg).is_err());
        let cfg = DatasetConfig { atypical_fraction: -0.1, ..Default::default() };
        assert!(make_dataset(&cfg).is_err());
        let cfg = DatasetConfig { n_classes: 1, ..Default::default() };
        assert!(make_dataset(&cfg).is_err());
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let cfg = DatasetConfig {
            n_train: 60,
            n_test: 30,
            input_dim: 4,
            ..Default::default()
        };
        let data = make_dataset(&cfg).unwrap();
        let csv = data.to_csv_string();
        let back = Dataset::from_csv_str(&csv).unwrap();
        assert_eq!(back.n_classes, data.n_classes);
        assert_eq!(back.input_dim, data.input_dim);
        for (a, b) in data.examples.iter().zip(&back.examples) {
            assert_eq!(a.id, b.id);
            assert_eq!(a.split, b.split);
            assert_eq!(a.label, b.label);
            assert_eq!(a.original_label, b.original_label);
            assert_eq!(a.provenance, b.provenance);
            assert!(a.features.iter().zip(&b.features).all(|(u, v)| u.to_bits() == v.to_bits()));
        }
    }

    #[test]
    fn csv_rejects_malformed_rows() {
        let data = make_dataset(&DatasetConfig {
            n_train: 10,
            n_test: 5,
            input_dim: 2,
            ..Default::default()
        })
        .unwrap();
        let csv = data.to_csv_string();
        // drop a field from the first data row
        let mut lines: Vec<&str> = csv.lines().collect();
        let truncated = lines[1].rsplit_once(',').unwrap().0.to_string();
        lines[1] = &truncated;
        assert!(Dataset::from_csv_str(&lines.join("\n")).is_err());
        assert!(Dataset::from_csv_str("id,split\n").is_err());
        assert!(Dataset::from_csv_str("").is_err());
    }

    #[test]
    fn select_forget_picks_low_median_high() {
        let scores: Vec<(usize, f64)> = (0..9).map(|i| (i, i as f64)).collect();
        let task = select_forget(&mem_table(&scores), 1, &[Band::Low, Band::Median, Band::High])
            .unwrap();
        assert_eq!(task.forget_ids, vec![0, 4, 8]);
        assert_eq!(task.retain_ids, vec![1, 2, 3, 5, 6, 7]);
    }

    #[test]
    fn select_forget_with_equal_scores_takes_leading_ids() {
        let scores: Vec<(usize, f64)> = (0..12).map(|i| (i, 0.5)).collect();
        let task = select_forget(&mem_table(&scores), 2, &[Band::Low, Band::Median, Band::High])
            .unwrap();
        assert_eq!(task.forget_ids, vec![0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn select_forget_respects_alignment() {
        // confidence aligns negatively: highest-confidence ids land in the low band
        let entries: Vec<(usize, f64)> = (0..9).map(|i| (i, i as f64 / 10.0)).collect();
        let t = ScoreTable::new(ScoreKind::Confidence, entries, Vec::new(), Timing::default())
            .unwrap();
        let task = select_forget(&t, 1, &[Band::Low]).unwrap();
        assert_eq!(task.forget_ids, vec![8]);
    }

    #[test]
    fn select_forget_rejects_undefined_and_oversized() {
        let t = ScoreTable::new(
            ScoreKind::Memorization,
            vec![(0, 0.1), (1, 0.2)],
            vec![2],
            Timing::default(),
        )
        .unwrap();
        assert!(select_forget(&t, 1, &[Band::Low]).is_err());
        let t = mem_table(&[(0, 0.1), (1, 0.2), (2, 0.3)]);
        assert!(select_forget(&t, 1, &[Band::Low, Band::Median, Band::High]).is_err());
        assert!(select_forget(&t, 1, &[Band::Low, Band::Low]).is_err());
    }

    #[test]
    fn unlearn_task_validates_ids() {
        assert!(UnlearnTask::new(&[0, 1, 2], &[3]).is_err());
        assert!(UnlearnTask::new(&[0, 1, 2], &[]).is_err());
        assert!(UnlearnTask::new(&[0, 1, 2], &[0, 1, 2]).is_err());
        let t = UnlearnTask::new(&[0, 1, 2, 3], &[2, 0]).unwrap();
        assert_eq!(t.forget_ids, vec![0, 2]);
        assert_eq!(t.retain_ids, vec![1, 3]);
    }
}
