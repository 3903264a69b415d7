use std::collections::BTreeSet;

use cmas_core::landscape::{ContributionTable, FlockingConfig, Landscape, PendingVisits, Point};
use cmas_core::rtts::scan_points;
use cmas_core::sphereviz::{render, CellLocation, MarkerKind, RenderOptions, SphericalGrid, MAX_GRID_DIMENSIONS};
use proptest::prelude::*;

fn p(s: &str) -> Point {
    Point::from_bit_slice(&s.chars().map(|c| c == '1').collect::<Vec<_>>()).unwrap()
}

fn set(items: &[&str]) -> BTreeSet<Point> {
    items.iter().map(|s| p(s)).collect()
}

#[test]
fn five_bit_rings_match_the_worked_example() {
    let g = SphericalGrid::build(5, p("11111")).unwrap();
    let ring = |d: usize| g.ring(d).iter().copied().collect::<BTreeSet<_>>();
    assert_eq!(ring(1), set(&["01111", "10111", "11011", "11101", "11110"]));
    assert_eq!(ring(2), set(&["00111", "10011", "11001", "11100", "01110"]));
    assert_eq!(ring(5), set(&["00000"]));
}

#[test]
fn rings_have_correct_sizes_distances_and_meridians() {
    for n in 2..=16 {
        let focus = Point::new(n, 0x5a5a & ((1 << n) - 1)).unwrap();
        let g = SphericalGrid::build(n, focus).unwrap();
        assert_eq!(g.len(), n * (n - 1) + 2);
        assert_eq!(g.rings().len(), n + 1);
        assert_eq!(g.ring(0), [focus]);
        assert_eq!(g.ring(n), [focus.complement()]);
        for d in 1..n {
            assert_eq!(g.ring(d).len(), n);
            let distinct: BTreeSet<Point> = g.ring(d).iter().copied().collect();
            assert_eq!(distinct.len(), n);
        }
        for d in 0..=n {
            for j in 0..n {
                let here = g.grid_point(d, j);
                assert_eq!(here.hamming(&focus) as usize, d);
                if d < n {
                    assert_eq!(here.hamming(&g.grid_point(d + 1, j)), 1);
                    assert_eq!(here.hamming(&g.grid_point(d + 1, (j + n - 1) % n)), 1);
                }
            }
        }
    }
    assert!(SphericalGrid::build(1, Point::zero(1)).is_err());
    assert!(SphericalGrid::build(MAX_GRID_DIMENSIONS + 1, Point::zero(MAX_GRID_DIMENSIONS + 1)).is_err());
}

proptest! {
    #[test]
    fn placement_latitude_is_hamming_distance(n in 2usize..=16, focus in any::<u32>(), bits in any::<u32>()) {
        let mask = (1u32 << n) - 1;
        let g = SphericalGrid::build(n, Point::new(n, focus & mask).unwrap()).unwrap();
        let point = Point::new(n, bits & mask).unwrap();
        let pl = g.place(point).unwrap();
        let d = point.hamming(&g.focus()) as usize;
        prop_assert_eq!(pl.distance, d);
        prop_assert_eq!(pl.latitude, g.latitude(d));
        match pl.location {
            CellLocation::Grid { slot } => prop_assert_eq!(g.grid_point(d, slot), point),
            CellLocation::Cell { cell, corner_distance, offset } => {
                prop_assert!(offset.abs() <= 0.4);
                let costs: Vec<u32> = (0..n)
                    .map(|j| g.cell_corners(d, j).iter().map(|c| c.hamming(&point)).sum())
                    .collect();
                let min = *costs.iter().min().unwrap();
                prop_assert_eq!(corner_distance, min);
                prop_assert_eq!(cell, costs.iter().position(|&c| c == min).unwrap());
            }
        }
        prop_assert_eq!(g.place(point).unwrap(), pl);
    }
}

#[test]
fn probe_set_markers_stay_within_two_rings() {
    let l = Landscape::build(20, 3, 9).unwrap();
    let start = Point::new(20, 0xabcde).unwrap();
    let g = SphericalGrid::build(20, start).unwrap();
    let markers: Vec<(Point, MarkerKind)> = scan_points(start).into_iter().map(|q| (q, MarkerKind::Triangle)).collect();
    let scene = render(&l, &g, &markers, RenderOptions::default()).unwrap();
    assert_eq!(scene.markers.len(), 211);
    assert!(scene.markers.iter().all(|m| m.kind == MarkerKind::Triangle && m.placement.distance <= 2));
    assert_eq!(scene.faces.len(), 2 * 20 * 19);
    assert_eq!(scene, render(&l, &g, &markers, RenderOptions::default()).unwrap());
}

#[test]
fn uniform_and_boosted_rendering() {
    let n = 8;
    let t = ContributionTable::from_entries(n, 0, vec![0.5; n * 2]).unwrap();
    let flat = Landscape::from_table(t.clone(), FlockingConfig::disabled()).unwrap();
    let g = SphericalGrid::build(n, Point::zero(n)).unwrap();
    let scene = render(&flat, &g, &[], RenderOptions::default()).unwrap();
    assert!(scene.vertices.iter().all(|v| v.brightness == 0.5));

    let mut boosted = Landscape::from_table(t, FlockingConfig::default()).unwrap();
    let mut pending = PendingVisits::new();
    pending.record(Point::zero(n));
    boosted.apply_visits(&mut pending);
    let scene = render(&boosted, &g, &[], RenderOptions::default()).unwrap();
    for v in &scene.vertices {
        let raised = v.ring <= 2;
        assert_eq!(v.fitness > 0.5, raised, "ring {}", v.ring);
        let r = (v.position.x.powi(2) + v.position.y.powi(2) + v.position.z.powi(2)).sqrt();
        assert!((r - (1.0 + 0.25 * v.fitness)).abs() < 1e-12);
    }
}
