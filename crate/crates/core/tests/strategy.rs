use cmas_core::catalog::ManualStrategy;
use cmas_core::seed;
use cmas_core::strategy::{
    discretize, normalize_row, normalize_rows, FitnessLevel, MemorySource, S1Action, Strategy, SMALL_ROW_EPSILON,
};
use proptest::prelude::*;

/// Empirical frequencies stay within 3 binomial standard deviations.
fn assert_frequencies(probs: &[f64], counts: &[u64], samples: u64) {
    for (&p, &c) in probs.iter().zip(counts) {
        let sigma = (samples as f64 * p * (1.0 - p)).sqrt();
        let diff = (c as f64 - samples as f64 * p).abs();
        assert!(diff <= 3.0 * sigma + 1e-9, "p={p} count={c} samples={samples}");
    }
}

#[test]
fn s1_sampling_matches_every_row() {
    use FitnessLevel::*;
    let s = Strategy::table_example();
    let mut rng = seed::rng(99, &[]);
    let samples = 100_000;
    for (public, private) in [(Low, Low), (Low, High), (High, Low), (High, High)] {
        let mut counts = [0u64; 4];
        for _ in 0..samples {
            counts[s.select_s1(public, private, &mut rng).index()] += 1;
        }
        assert_frequencies(s.s1.row(public, private), &counts, samples);
    }
    let hh: [f64; 4] = *s.s1.row(High, High);
    assert_eq!(hh, [0.0, 0.0, 0.9, 0.1]);
    assert_eq!(*s.s1.row(Low, High), [0.0, 1.0, 0.0, 0.0]);
}

#[test]
fn uniform_row_sampling_is_close_to_a_quarter() {
    let s = Strategy::uniform("u");
    let mut rng = seed::rng(5, &[]);
    let mut counts = [0u64; 4];
    for _ in 0..100_000 {
        counts[s.select_s1(FitnessLevel::Low, FitnessLevel::Low, &mut rng).index()] += 1;
    }
    for c in counts {
        assert!((c as f64 / 100_000.0 - 0.25).abs() < 0.01);
    }
}

#[test]
fn s2_sampling_matches_rows() {
    let s = Strategy::table_example();
    let mut rng = seed::rng(6, &[]);
    let samples = 100_000;
    for level in [FitnessLevel::Low, FitnessLevel::High] {
        let mut counts = [0u64; 2];
        for _ in 0..samples {
            counts[(s.select_s2(level, &mut rng) == MemorySource::Private) as usize] += 1;
        }
        assert_frequencies(s.s2.row(level), &counts, samples);
    }
    assert_eq!(*s.s2.row(FitnessLevel::Low), [0.25, 0.75]);
    assert_eq!(*s.s2.row(FitnessLevel::High), [0.7, 0.3]);
}

#[test]
fn degenerate_rows_always_pick_their_action() {
    let s = ManualStrategy::by_name("explore-public").unwrap().strategy();
    let mut rng = seed::rng(1, &[]);
    for _ in 0..1000 {
        assert_eq!(s.select_s1(FitnessLevel::Low, FitnessLevel::High, &mut rng), S1Action::ALL[2]);
        assert_eq!(s.select_s2(FitnessLevel::High, &mut rng), MemorySource::Public);
    }
}

#[test]
fn vector_layout_and_uniform() {
    let v = Strategy::table_example().to_vector();
    assert_eq!(&v[..8], &[0.1, 0.2, 0.3, 0.4, 0.0, 1.0, 0.0, 0.0]);
    assert_eq!(&v[16..], &[0.25, 0.75, 0.7, 0.3]);
    let u = Strategy::uniform("u").to_vector();
    assert!(u[..16].iter().all(|&x| x == 0.25) && u[16..].iter().all(|&x| x == 0.5));
}

#[test]
fn catalog_is_valid_and_named() {
    assert_eq!(cmas_core::catalog::names().len(), 6);
    for m in ManualStrategy::ALL {
        let s = m.strategy();
        assert_eq!(ManualStrategy::by_name(m.name()), Some(m));
        for row in s.s1.rows() {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}

fn row4() -> impl proptest::strategy::Strategy<Value = [f64; 4]> {
    prop::array::uniform4(0.0f64..10.0)
}

proptest! {
    #[test]
    fn normalized_rows_sum_to_one_and_are_idempotent(rows in prop::collection::vec(row4(), 1..6), tiny in any::<bool>()) {
        let rows: Vec<[f64; 4]> = if tiny { rows.iter().map(|r| r.map(|x| x * 1e-9)).collect() } else { rows };
        let once = normalize_rows(&rows, SMALL_ROW_EPSILON);
        for r in &once {
            prop_assert!((r.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
            prop_assert!(r.iter().all(|&x| (0.0..=1.0).contains(&x)));
        }
        let twice = normalize_rows(&once, SMALL_ROW_EPSILON);
        for (a, b) in once.iter().zip(&twice) {
            for (x, y) in a.iter().zip(b) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn vector_round_trip(rows in prop::collection::vec(row4(), 4), s2 in prop::collection::vec(prop::array::uniform2(0.0f64..10.0), 2)) {
        let mut v = Vec::with_capacity(20);
        for r in &rows {
            v.extend(normalize_row(*r, SMALL_ROW_EPSILON));
        }
        for r in &s2 {
            v.extend(normalize_row(*r, SMALL_ROW_EPSILON));
        }
        let s = Strategy::from_vector(&v, "p").unwrap();
        prop_assert_eq!(s.to_vector().to_vec(), v);
    }

    #[test]
    fn discretize_is_monotone(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(discretize(lo).unwrap() <= discretize(hi).unwrap());
    }
}

#[test]
fn normalize_examples() {
    assert_eq!(normalize_row([1.0; 4], SMALL_ROW_EPSILON), [0.25; 4]);
    assert_eq!(normalize_row([0.0; 4], SMALL_ROW_EPSILON), [0.25; 4]);
    assert_eq!(normalize_row([0.2, 0.6, 0.2, 0.0], SMALL_ROW_EPSILON), [0.2, 0.6, 0.2, 0.0]);
}
