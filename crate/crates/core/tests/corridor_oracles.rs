mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cmpcc::corridor::{Corridor, Halfspace, Polyhedron};
use cmpcc::Vec3;

#[test]
fn octahedron_radius_matches_grid_search() {
    let mut faces = Vec::new();
    for sx in [-1.0, 1.0] {
        for sy in [-1.0, 1.0] {
            for sz in [-1.0, 1.0] {
                faces.push(Halfspace::new(Vec3::new(sx, sy, sz), 1.0));
            }
        }
    }
    let poly = Polyhedron::new(faces.clone()).unwrap();
    let (center, radius) = poly.chebyshev_center().unwrap();
    assert!((radius - 1.0 / 3f64.sqrt()).abs() < 1e-9);
    assert!(center.norm() < 1e-6);

    // Max over a grid of the min face distance.
    const STEPS: usize = 40;
    let mut best = f64::NEG_INFINITY;
    for i in 0..=STEPS {
        for j in 0..=STEPS {
            for k in 0..=STEPS {
                let g = |n: usize| -1.0 + 2.0 * n as f64 / STEPS as f64;
                let p = Vec3::new(g(i), g(j), g(k));
                let d = faces
                    .iter()
                    .map(|f| (f.offset - f.normal.dot(&p)) / f.normal.norm())
                    .fold(f64::INFINITY, f64::min);
                best = best.max(d);
            }
        }
    }
    assert!((best - radius).abs() < 1e-9, "grid {best} vs {radius}");
}

#[test]
fn random_polytope_vertices_match_double_description() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..50 {
        let center = Vec3::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0), 0.0);
        let poly = common::random_polytope(&mut rng, 10, center);
        let want = common::dd_vertices(poly.faces()).unwrap();
        let got = poly.vertices().unwrap();
        assert!(
            common::same_point_set(&got, &want, 1e-6),
            "{} vertices vs {} from the oracle",
            got.len(),
            want.len()
        );
    }
}

#[test]
fn chebyshev_radius_is_max_min_distance_on_random_polytopes() {
    // The optimal ball touches at least 4 faces; its radius can't be beaten
    // by any point, in particular not by the polytope's vertices' centroid.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..30 {
        let poly = common::random_polytope(&mut rng, 8, Vec3::zero());
        let (c, r) = poly.chebyshev_center().unwrap();
        let dist = |p: Vec3<f64>| {
            poly.faces()
                .iter()
                .map(|f| (f.offset - f.normal.dot(&p)) / f.normal.norm())
                .fold(f64::INFINITY, f64::min)
        };
        assert!((dist(c) - r).abs() < 1e-9);
        let verts = common::dd_vertices(poly.faces()).unwrap();
        for _ in 0..500 {
            // Random convex combination of vertices.
            let w: Vec<f64> = verts.iter().map(|_| rng.random_range(0.0..1.0)).collect();
            let s: f64 = w.iter().sum();
            let p = verts.iter().zip(&w).fold(Vec3::zero(), |acc, (v, &wi)| acc + *v * (wi / s));
            assert!(dist(p) <= r + 1e-7);
        }
        let touching = poly.faces().iter().filter(|f| ((f.offset - f.normal.dot(&c)) / f.normal.norm() - r).abs() < 1e-6).count();
        assert!(touching >= 4, "only {touching} faces touch the ball");
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn box_containment_is_per_axis(
        lo in prop::array::uniform3(-5.0f64..0.0),
        size in prop::array::uniform3(0.1f64..5.0),
        p in prop::array::uniform3(-6.0f64..6.0),
    ) {
        let hi = [lo[0] + size[0], lo[1] + size[1], lo[2] + size[2]];
        let poly = Polyhedron::axis_box(Vec3::from(lo), Vec3::from(hi)).unwrap();
        let inside = (0..3).all(|a| lo[a] <= p[a] && p[a] <= hi[a]);
        prop_assert_eq!(poly.contains(Vec3::from(p), 0.0), inside);
        let outside_by = (0..3).map(|a| (lo[a] - p[a]).max(p[a] - hi[a])).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!((poly.max_violation(Vec3::from(p)) - outside_by).abs() < 1e-12);
    }

    #[test]
    fn overlap_holds_iff_boxes_share_interior(shift in -3.0f64..3.0) {
        let a = Polyhedron::axis_box(Vec3::new(0.0, 0.0, 0.0), Vec3::new(2.0, 1.0, 1.0)).unwrap();
        let b = Polyhedron::axis_box(Vec3::new(shift, 0.0, 0.0), Vec3::new(shift + 2.0, 1.0, 1.0)).unwrap();
        let overlap = shift.abs() < 2.0 - 1e-5;
        let disjoint = shift.abs() > 2.0 + 1e-5;
        let ok = Corridor::new(vec![a, b]).is_ok();
        prop_assert!(!overlap || ok);
        prop_assert!(!disjoint || !ok);
    }
}
