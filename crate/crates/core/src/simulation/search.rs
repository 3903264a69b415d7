//! Exploit (single-bit) and explore (long-jump) search from a start point.

use alloc::vec::Vec;

use rand::Rng as _;

use crate::landscape::{Landscape, Point, MAX_DIMENSIONS};
use crate::seed::Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    /// First probed point strictly fitter than the start, with its fitness.
    pub found: Option<(Point, f64)>,
    /// Every probed point, in probe order.
    pub evaluated: Vec<Point>,
}

/// Shuffles the first `count` positions of `dims` (partial Fisher-Yates).
fn shuffle_prefix(dims: &mut [usize], count: usize, rng: &mut Rng) {
    for i in 0..count.min(dims.len()) {
        let j = rng.random_range(i..dims.len());
        dims.swap(i, j);
    }
}

/// Tries single-bit neighbors of `start` in a random order until one has
/// strictly higher current fitness; probes at most `n` points.
pub fn exploit_step(landscape: &Landscape, start: Point, rng: &mut Rng) -> SearchOutcome {
    let n = start.len();
    let mut order = [0usize; MAX_DIMENSIONS];
    for (i, d) in order.iter_mut().enumerate().take(n) {
        *d = i;
    }
    let order = &mut order[..n];
    shuffle_prefix(order, n, rng);
    exploit_in_order(landscape, start, order)
}

/// Exploit search probing dimensions in the given order.
pub fn exploit_in_order(landscape: &Landscape, start: Point, order: &[usize]) -> SearchOutcome {
    let base = landscape.fitness(start);
    let mut evaluated = Vec::with_capacity(order.len());
    for &d in order {
        let candidate = start.flip(d);
        let f = landscape.fitness(candidate);
        evaluated.push(candidate);
        if f > base {
            return SearchOutcome { found: Some((candidate, f)), evaluated };
        }
    }
    SearchOutcome { found: None, evaluated }
}

/// Inclusive range of flip counts for an explore jump in `n` dimensions.
pub fn flip_count_range(n: usize, range: (f64, f64)) -> Option<(usize, usize)> {
    let lo = (libm::ceil(range.0 * n as f64) as usize).max(1);
    let hi = (libm::floor(range.1 * n as f64) as usize).min(n);
    (lo <= hi).then_some((lo, hi))
}

/// Long jumps flipping a random number of distinct random bits, until a
/// strictly fitter point turns up or `max_attempts` jumps have been tried.
pub fn explore_step(
    landscape: &Landscape,
    start: Point,
    range: (f64, f64),
    max_attempts: usize,
    rng: &mut Rng,
) -> SearchOutcome {
    let n = start.len();
    let (lo, hi) = flip_count_range(n, range).unwrap_or((n, n));
    let base = landscape.fitness(start);
    let mut dims = [0usize; MAX_DIMENSIONS];
    let mut evaluated = Vec::with_capacity(max_attempts);
    for _ in 0..max_attempts {
        for (i, d) in dims.iter_mut().enumerate().take(n) {
            *d = i;
        }
        let flips = rng.random_range(lo..=hi);
        shuffle_prefix(&mut dims[..n], flips, rng);
        let mask = dims[..flips].iter().fold(0u32, |m, &d| m | start.dim_mask(d));
        let candidate = start.xor(mask);
        let f = landscape.fitness(candidate);
        evaluated.push(candidate);
        if f > base {
            return SearchOutcome { found: Some((candidate, f)), evaluated };
        }
    }
    SearchOutcome { found: None, evaluated }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landscape::{ContributionTable, FlockingConfig};
    use crate::seed;
    use alloc::vec;

    /// K = 0 landscape where dimension `d` prefers `target` bit.
    fn separable(n: usize, target: u32) -> Landscape {
        let mut entries = vec![0.0; n * 2];
        for d in 0..n {
            let want = (target >> (n - 1 - d)) & 1;
            entries[d * 2 + want as usize] = 1.0;
        }
        let t = ContributionTable::from_entries(n, 0, entries).unwrap();
        Landscape::from_table(t, FlockingConfig::disabled()).unwrap()
    }

    #[test]
    fn local_max_probes_everything() {
        let l = separable(6, 0b101010);
        let mut rng = seed::rng(3, &[]);
        let out = exploit_step(&l, Point::new(6, 0b101010).unwrap(), &mut rng);
        assert!(out.found.is_none());
        assert_eq!(out.evaluated.len(), 6);
    }

    #[test]
    fn single_improving_neighbor_is_always_found() {
        // start differs from target in exactly one bit
        for seed_value in 0..50 {
            let l = separable(5, 0b11111);
            let mut rng = seed::rng(seed_value, &[]);
            let out = exploit_step(&l, Point::new(5, 0b11011).unwrap(), &mut rng);
            assert_eq!(out.found.unwrap().0, Point::new(5, 0b11111).unwrap());
        }
    }

    #[test]
    fn explore_flips_within_range() {
        let l = Landscape::build(10, 3, 1).unwrap();
        let start = Point::zero(10);
        let mut rng = seed::rng(9, &[]);
        for _ in 0..200 {
            let out = explore_step(&l, start, (0.5, 1.0), 10, &mut rng);
            for p in &out.evaluated {
                assert!((5..=10).contains(&p.hamming(&start)));
            }
        }
        assert_eq!(flip_count_range(10, (0.5, 1.0)), Some((5, 10)));
        assert_eq!(flip_count_range(20, (0.5, 1.0)), Some((10, 20)));
        assert_eq!(flip_count_range(10, (0.51, 0.59)), None);
    }

    #[test]
    fn explore_from_a_perfect_point_uses_all_attempts() {
        let t = ContributionTable::from_entries(8, 1, vec![1.0; 8 * 4]).unwrap();
        let l = Landscape::from_table(t, FlockingConfig::disabled()).unwrap();
        let mut rng = seed::rng(2, &[]);
        let out = explore_step(&l, Point::zero(8), (0.5, 1.0), 13, &mut rng);
        assert!(out.found.is_none());
        assert_eq!(out.evaluated.len(), 13);
    }
}
