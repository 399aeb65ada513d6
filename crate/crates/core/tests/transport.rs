//! Transport solvers against independent oracles: the monotone
//! rearrangement on the line and chord-length distances on the sphere.

use bbl_core::modelspace::{ModelSpace, Point};
use bbl_core::ot::{displacement_interpolate, marginal_violation, solve_entropic, solve_exact, WeightedCloud};
use proptest::prelude::*;

/// `∫₀¹ |F⁻¹(t) − G⁻¹(t)|²/2 dt` by merging the two quantile staircases.
fn monotone_cost(xs: &[(f64, f64)], ys: &[(f64, f64)]) -> f64 {
    let (mut a, mut b) = (xs.to_vec(), ys.to_vec());
    a.sort_by(|p, q| p.0.total_cmp(&q.0));
    b.sort_by(|p, q| p.0.total_cmp(&q.0));
    let (mut i, mut j) = (0, 0);
    let (mut ra, mut rb) = (a[0].1, b[0].1);
    let mut cost = 0.0;
    while i < a.len() && j < b.len() {
        let m = ra.min(rb);
        cost += 0.5 * m * (a[i].0 - b[j].0).powi(2);
        ra -= m;
        rb -= m;
        if ra <= 1e-15 {
            i += 1;
            ra = a.get(i).map_or(0.0, |p| p.1);
        }
        if rb <= 1e-15 {
            j += 1;
            rb = b.get(j).map_or(0.0, |p| p.1);
        }
    }
    cost
}

fn cloud_1d(pts: &[(f64, f64)]) -> WeightedCloud {
    let total: f64 = pts.iter().map(|p| p.1).sum();
    WeightedCloud::new(
        ModelSpace::euclidean(1).unwrap(),
        pts.iter().map(|p| Point::new(&[p.0])).collect(),
        pts.iter().map(|p| p.1 / total).collect(),
    )
    .unwrap()
}

fn normalized(pts: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    let total: f64 = pts.iter().map(|p| p.1).sum();
    pts.into_iter().map(|(x, w)| (x, w / total)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_matches_monotone_rearrangement(
        xs in prop::collection::vec((-5.0f64..5.0, 0.1f64..1.0), 1..25),
        ys in prop::collection::vec((-5.0f64..5.0, 0.1f64..1.0), 1..25),
    ) {
        let (xs, ys) = (normalized(xs), normalized(ys));
        let plan = solve_exact(&cloud_1d(&xs), &cloud_1d(&ys)).unwrap();
        let want = monotone_cost(&xs, &ys);
        prop_assert!((plan.cost - want).abs() <= 1e-10 * want.max(1.0), "{} vs {want}", plan.cost);
        prop_assert!(marginal_violation(&plan) <= 1e-12);
    }

    #[test]
    fn entropic_cost_is_above_exact(
        xs in prop::collection::vec((-1.0f64..1.0, 0.1f64..1.0), 2..12),
        ys in prop::collection::vec((-1.0f64..1.0, 0.1f64..1.0), 2..12),
    ) {
        let (xs, ys) = (normalized(xs), normalized(ys));
        let (mu, nu) = (cloud_1d(&xs), cloud_1d(&ys));
        let exact = solve_exact(&mu, &nu).unwrap().cost;
        let (plan, rep) = solve_entropic(&mu, &nu, 1e-3, 20_000, 1e-11).unwrap();
        prop_assert!(marginal_violation(&plan) <= 1e-9, "{rep:?}");
        // any coupling costs at least the optimum; ε log-terms bound the excess
        prop_assert!(plan.cost >= exact - 1e-12);
        prop_assert!(plan.cost <= exact + 0.05, "{} vs {exact}", plan.cost);
    }
}

#[test]
fn entropic_converges_to_exact() {
    let xs: Vec<(f64, f64)> = (0..20).map(|i| ((i as f64 * 0.37).sin(), 1.0 / 20.0)).collect();
    let ys: Vec<(f64, f64)> = (0..20).map(|i| ((i as f64 * 0.91).cos() + 0.3, 1.0 / 20.0)).collect();
    let (mu, nu) = (cloud_1d(&xs), cloud_1d(&ys));
    let exact = solve_exact(&mu, &nu).unwrap().cost;
    let mut prev = f64::INFINITY;
    for eps in [1e-1, 1e-2, 1e-3] {
        let (plan, _) = solve_entropic(&mu, &nu, eps, 50_000, 1e-12).unwrap();
        let gap = plan.cost - exact;
        assert!(gap >= -1e-12 && gap <= prev + 1e-12, "eps {eps}: {gap}");
        prev = gap;
    }
    assert!(prev < 1e-3, "{prev}");
}

#[test]
fn sphere_costs_use_geodesic_distance() {
    let s = ModelSpace::sphere(2, 4.0).unwrap(); // radius 1/2
    let pts = [[0.3, 0.1], [-0.2, 0.4], [0.5, -0.5]];
    let xs: Vec<Point> = pts.iter().map(|v| s.from_normal_coords(v).unwrap()).collect();
    let ys: Vec<Point> = pts.iter().map(|v| s.from_normal_coords(&[v[0] + 0.2, -v[1]]).unwrap()).collect();
    for (x, y) in xs.iter().zip(&ys) {
        let chord: f64 = x.coords().iter().zip(y.coords()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let want = 2.0 * 0.5 * (chord / (2.0 * 0.5)).asin();
        assert!((s.distance(x, y).unwrap() - want).abs() < 1e-12);
    }
    let w = vec![1.0 / 3.0; 3];
    let plan = solve_exact(
        &WeightedCloud::new(s, xs.clone(), w.clone()).unwrap(),
        &WeightedCloud::new(s, ys.clone(), w).unwrap(),
    )
    .unwrap();
    assert!(marginal_violation(&plan) < 1e-12);
    // interpolants at the ends reproduce the marginals' supports
    let end = displacement_interpolate(&plan, 1.0).unwrap();
    for p in &end.points {
        assert!(ys.iter().any(|y| s.distance(p, y).unwrap() < 1e-9));
    }
}
