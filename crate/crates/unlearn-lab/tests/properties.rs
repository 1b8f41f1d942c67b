//! Property tests for the order-, scale-, and construction-invariants the
//! pipeline's determinism rests on.

use proptest::prelude::*;
use unlearn_lab::data::{select_forget, Band, UnlearnTask};
use unlearn_lab::eval::{gini, lorenz, tow_from_gaps};
use unlearn_lab::memorization::{ScoreKind, ScoreTable};
use unlearn_lab::nn::softmax_xent;
use unlearn_lab::proxies::spearman;
use unlearn_lab::rng;
use unlearn_lab::rum::{ids_digest, refine};
use unlearn_lab::timing::Timing;

fn table(scores: &[f64]) -> ScoreTable {
    let entries = scores.iter().copied().enumerate().collect();
    ScoreTable::new(ScoreKind::Confidence, entries, vec![], Timing::default()).unwrap()
}

/// Scores drawn from a tiny grid so ties are common.
fn tied_scores(len: impl Into<proptest::collection::SizeRange>) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec((0..5u8).prop_map(|v| v as f64 / 4.0), len)
}

proptest! {
    #[test]
    fn gini_is_bounded_scale_and_order_invariant(
        scores in proptest::collection::vec(0.0f64..100.0, 1..40),
        scale in 0.01f64..100.0,
    ) {
        prop_assume!(scores.iter().sum::<f64>() > 0.0);
        let g = gini(&scores).unwrap();
        prop_assert!((0.0..=1.0).contains(&g));
        let scaled: Vec<f64> = scores.iter().map(|v| v * scale).collect();
        prop_assert!((g - gini(&scaled).unwrap()).abs() <= 1e-12);
        let mut reversed = scores.clone();
        reversed.reverse();
        prop_assert_eq!(g, gini(&reversed).unwrap());
    }

    #[test]
    fn lorenz_curve_is_monotone_and_under_the_diagonal(
        scores in proptest::collection::vec(0.0f64..100.0, 1..40),
    ) {
        prop_assume!(scores.iter().sum::<f64>() > 0.0);
        let pts = lorenz(&scores).unwrap();
        prop_assert_eq!(pts.first().copied().unwrap(), (0.0, 0.0));
        let (xn, yn) = pts.last().copied().unwrap();
        prop_assert!((xn - 1.0).abs() <= 1e-12 && (yn - 1.0).abs() <= 1e-12);
        for w in pts.windows(2) {
            prop_assert!(w[1].1 >= w[0].1 - 1e-12);
        }
        for &(x, y) in &pts {
            prop_assert!(y <= x + 1e-12);
        }
    }

    #[test]
    fn spearman_of_a_table_with_itself_is_exactly_one(scores in tied_scores(3..40)) {
        let t = table(&scores);
        prop_assert_eq!(spearman(&t, &t).unwrap(), 1.0);
        // negating the scores exactly reverses every (averaged) rank
        prop_assume!(scores.iter().any(|&v| v != scores[0]));
        let negated = table(&scores.iter().map(|v| -v).collect::<Vec<_>>());
        prop_assert_eq!(spearman(&t, &negated).unwrap(), -1.0);
    }

    #[test]
    fn tow_is_the_product_of_complements(
        a in 0.0f64..=1.0, b in 0.0f64..=1.0, c in 0.0f64..=1.0,
    ) {
        let t = tow_from_gaps(a, b, c);
        prop_assert_eq!(t, (1.0 - a) * (1.0 - b) * (1.0 - c));
        prop_assert!((0.0..=1.0).contains(&t));
    }

    #[test]
    fn select_forget_partitions_and_ignores_construction_order(
        scores in tied_scores(7..60),
        n_per_band in 1usize..5,
    ) {
        prop_assume!(3 * n_per_band < scores.len());
        let bands = [Band::Low, Band::Median, Band::High];
        let t = table(&scores);
        let task = select_forget(&t, n_per_band, &bands).unwrap();

        // same (id, score) pairs fed in reverse order give the same task
        let mut entries: Vec<(usize, f64)> = scores.iter().copied().enumerate().collect();
        entries.reverse();
        let rev = ScoreTable::new(ScoreKind::Confidence, entries, vec![], Timing::default()).unwrap();
        let task_rev = select_forget(&rev, n_per_band, &bands).unwrap();
        prop_assert_eq!(&task.forget_ids, &task_rev.forget_ids);

        prop_assert_eq!(task.forget_ids.len(), 3 * n_per_band);
        let mut all: Vec<usize> = task.forget_ids.iter().chain(&task.retain_ids).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..scores.len()).collect::<Vec<_>>());
    }

    #[test]
    fn refine_chunks_cover_the_forget_set_in_aligned_order(
        scores in tied_scores(10..60),
        k in 1usize..5,
        flip in proptest::bool::ANY,
    ) {
        prop_assume!(9 < scores.len());
        let kind = if flip { ScoreKind::Confidence } else { ScoreKind::HoldoutRetraining };
        let entries = scores.iter().copied().enumerate().collect();
        let t = ScoreTable::new(kind, entries, vec![], Timing::default()).unwrap();
        let task = select_forget(&t, 3, &[Band::Low, Band::Median, Band::High]).unwrap();
        let chunks = refine(&t, &task, k).unwrap();

        prop_assert_eq!(chunks.len(), k);
        let mut union: Vec<usize> = chunks.iter().flatten().copied().collect();
        union.sort_unstable();
        let mut forget = task.forget_ids.clone();
        forget.sort_unstable();
        prop_assert_eq!(union, forget);

        let sizes: Vec<usize> = chunks.iter().map(Vec::len).collect();
        let (lo, hi) = (sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
        prop_assert!(hi - lo <= 1);

        // chunk boundaries never invert the (aligned score, id) order
        let key = |id: usize| (t.aligned(id).unwrap(), id);
        for pair in chunks.windows(2) {
            let left = pair[0].iter().map(|&id| key(id)).fold(None, |m: Option<(f64, usize)>, k| {
                Some(m.map_or(k, |m| if k > m { k } else { m }))
            }).unwrap();
            let right = pair[1].iter().map(|&id| key(id)).fold(None, |m: Option<(f64, usize)>, k| {
                Some(m.map_or(k, |m| if k < m { k } else { m }))
            }).unwrap();
            prop_assert!(left < right);
        }
    }

    #[test]
    fn softmax_rows_are_probability_distributions(
        logits in (2usize..6).prop_flat_map(|w| {
            proptest::collection::vec(proptest::collection::vec(-50.0f64..50.0, w), 1..8)
        }),
    ) {
        let labels = vec![0usize; logits.len()];
        let (probs, loss) = softmax_xent(&logits, &labels).unwrap();
        for row in &probs {
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            prop_assert!(row.iter().all(|&p| p > 0.0 && p <= 1.0));
        }
        prop_assert!(loss >= 0.0);

        let shifted: Vec<Vec<f64>> =
            logits.iter().map(|r| r.iter().map(|v| v + 123.0).collect()).collect();
        let (probs2, loss2) = softmax_xent(&shifted, &labels).unwrap();
        for (p, q) in probs.iter().flatten().zip(probs2.iter().flatten()) {
            prop_assert!((p - q).abs() <= 1e-9);
        }
        prop_assert!((loss - loss2).abs() <= 1e-9);
    }

    #[test]
    fn ids_digest_is_order_invariant_and_content_sensitive(
        mut ids in proptest::collection::vec(0usize..1000, 1..30),
    ) {
        ids.sort_unstable();
        ids.dedup();
        let d = ids_digest(&ids);
        let mut shuffled = ids.clone();
        shuffled.reverse();
        prop_assert_eq!(&d, &ids_digest(&shuffled));
        let mut extended = ids.clone();
        extended.push(1000);
        prop_assert_ne!(&d, &ids_digest(&extended));
    }

    #[test]
    fn seed_mixing_is_deterministic_and_tag_injective(
        seed in proptest::num::u64::ANY,
        t1 in proptest::num::u64::ANY,
        t2 in proptest::num::u64::ANY,
    ) {
        prop_assert_eq!(rng::mix(seed, t1), rng::mix(seed, t1));
        if t1 != t2 {
            prop_assert_ne!(rng::mix(seed, t1), rng::mix(seed, t2));
        }
    }
}

#[test]
fn select_forget_with_all_tied_scores_takes_lowest_ids() {
    let t = table(&[0.5; 12]);
    let task = select_forget(&t, 2, &[Band::Low, Band::Median, Band::High]).unwrap();
    assert_eq!(task.forget_ids, vec![0, 1, 2, 3, 4, 5]);
    let roundtrip = UnlearnTask::new(
        &(0..12).collect::<Vec<_>>(),
        &task.forget_ids,
    )
    .unwrap();
    assert_eq!(roundtrip.retain_ids, task.retain_ids);
}
