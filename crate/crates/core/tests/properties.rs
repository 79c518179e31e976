//! Invariants checked on random inputs.

use std::sync::{Arc, OnceLock};

use proptest::prelude::*;
use qhgeo_core::boundary::{cross_ratio, uniform_perfectness_constant, BoundarySet, Extent, PerfectnessVerdict};
use qhgeo_core::graph::EdgeMetric;
use qhgeo_core::gromov::{delta_four_point, FiniteMetricSpace};
use qhgeo_core::metric::{distance_ratio_metric, graph_geodesic, PsiEnvelope};
use qhgeo_core::qcmaps::{MapKind, SelfMap};
use qhgeo_core::{Domain, MetricGraph, Point, ResolutionSpec};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn domains() -> Vec<Domain> {
    vec![
        Domain::unit_disk(),
        Domain::punctured_unit_disk(),
        Domain::annulus(Point::xy(0.0, 0.0), 0.5, 1.0).unwrap(),
        Domain::upper_half_plane(),
    ]
}

fn point_in(dom: &Domain) -> impl Strategy<Value = Point> + '_ {
    (-1.0f64..1.0, -1.0f64..1.0)
        .prop_map(|(x, y)| Point::xy(x, y))
        .prop_filter("inside", move |p| dom.contains(p))
}

fn annulus_graph() -> &'static MetricGraph {
    static G: OnceLock<MetricGraph> = OnceLock::new();
    G.get_or_init(|| {
        let dom = Domain::annulus(Point::xy(0.0, 0.0), 0.5, 1.0).unwrap();
        MetricGraph::build(Arc::new(dom), ResolutionSpec::new(0.1), 0).unwrap()
    })
}

proptest! {
    #![proptest_config(config(128))]

    #[test]
    fn boundary_distance_is_one_lipschitz(which in 0usize..4, a in any::<u64>()) {
        let dom = &domains()[which];
        let pts = dom.interior_sample(2, 1e-3, a);
        prop_assume!(pts.len() == 2);
        let (x, y) = (&pts[0], &pts[1]);
        let dx = dom.boundary_distance(x).unwrap();
        let dy = dom.boundary_distance(y).unwrap();
        prop_assert!((dx - dy).abs() <= x.dist(y) + 1e-12);
    }

    #[test]
    fn j_is_a_metric(which in 0usize..4, seed in any::<u64>()) {
        let dom = &domains()[which];
        let pts = dom.interior_sample(3, 1e-3, seed);
        prop_assume!(pts.len() == 3);
        let j = |a: &Point, b: &Point| distance_ratio_metric(dom, a, b).unwrap();
        let (x, y, z) = (&pts[0], &pts[1], &pts[2]);
        prop_assert_eq!(j(x, x), 0.0);
        prop_assert!(j(x, y) > 0.0);
        prop_assert!((j(x, y) - j(y, x)).abs() <= 1e-15);
        prop_assert!(j(x, z) <= j(x, y) + j(y, z) + 1e-12);
    }

    #[test]
    fn cross_ratio_is_mobius_invariant(
        q in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 4),
        angle in -3.0f64..3.0,
        scale in 0.1f64..10.0,
        shift in (-1.0f64..1.0, -1.0f64..1.0),
    ) {
        let pts: Vec<Point> = q.iter().map(|&(x, y)| Point::xy(x, y)).collect();
        let min_gap = (0..4)
            .flat_map(|i| (0..4).filter(move |&j| j > i).map(move |j| (i, j)))
            .map(|(i, j)| pts[i].dist(&pts[j]))
            .chain(pts.iter().map(Point::norm))
            .fold(f64::INFINITY, f64::min);
        prop_assume!(min_gap > 0.05);
        let cr = |p: &[Point]| cross_ratio(&p[0], &p[1], &p[2], &p[3]).unwrap();
        let base = cr(&pts);
        let (s, c) = angle.sin_cos();
        let similar: Vec<Point> = pts
            .iter()
            .map(|p| {
                let [x, y] = [p.coords()[0], p.coords()[1]];
                Point::xy(scale * (c * x - s * y) + shift.0, scale * (s * x + c * y) + shift.1)
            })
            .collect();
        let inverted: Vec<Point> = pts.iter().map(|p| p.scale(1.0 / p.dot(p))).collect();
        prop_assert!((cr(&similar) - base).abs() <= 1e-9 * base.max(1.0));
        prop_assert!((cr(&inverted) - base).abs() <= 1e-9 * base.max(1.0));
    }

    #[test]
    fn psi_envelope_dominates_its_records(
        recs in prop::collection::vec((0.0f64..50.0, 0.0f64..10.0), 1..60),
    ) {
        let env = PsiEnvelope::from_records(recs.clone(), 0);
        for (r, k) in &recs {
            prop_assert!(env.eval(*r).is_some_and(|v| v >= *k));
        }
        for w in env.knots.windows(2) {
            prop_assert!(w[0].0 < w[1].0 && w[0].1 <= w[1].1);
        }
        let top = recs.iter().map(|p| p.0).fold(0.0, f64::max);
        prop_assert!(env.eval(top + 1.0).is_none());
    }

    #[test]
    fn perfectness_verdict_is_monotone_in_cap(
        q in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 3..25),
        cap in 1.5f64..50.0,
    ) {
        let pts: Vec<Point> = q.iter().map(|&(x, y)| Point::xy(x, y)).collect();
        let Ok(b) = BoundarySet::from_points(pts) else { return Ok(()) };
        let b = b.with_extent(Extent::Bounded(4.0));
        let low = uniform_perfectness_constant(&b, None, cap).unwrap();
        let high = uniform_perfectness_constant(&b, None, 10.0 * cap).unwrap();
        if let PerfectnessVerdict::UpTo(c) = low.verdict {
            prop_assert!(c <= cap);
            prop_assert_eq!(high.verdict, PerfectnessVerdict::UpTo(c));
        }
        if let PerfectnessVerdict::UpTo(c) = high.verdict {
            prop_assert_eq!(low.is_perfect(), c <= cap);
        }
    }

    #[test]
    fn four_point_delta_is_monotone_under_subspaces(
        q in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 6..10),
        keep in 4usize..6,
    ) {
        let pts: Vec<Point> = q.iter().map(|&(x, y)| Point::xy(x, y)).collect();
        let Ok(space) = FiniteMetricSpace::euclidean(&pts) else { return Ok(()) };
        let whole = delta_four_point(&space, 1_000_000, 0).unwrap();
        let idx: Vec<usize> = (0..keep).collect();
        let part = delta_four_point(&space.subspace(&idx).unwrap(), 1_000_000, 0).unwrap();
        prop_assert!(whole.exhaustive && part.exhaustive);
        prop_assert!(part.delta <= whole.delta + 1e-12);
        prop_assert!(whole.delta >= 0.0);
    }

    #[test]
    fn maps_compose_with_their_inverses(
        p in (-0.9f64..0.9, -0.9f64..0.9),
        which in 0usize..4,
        param in 0.2f64..2.5,
    ) {
        let x = Point::xy(p.0, p.1);
        prop_assume!(x.norm() < 0.95);
        let kind = match which {
            0 => MapKind::RotationAboutAxis { angle: param, center: None, axis: None },
            1 => MapKind::RadialPower { alpha: param, center: None },
            2 => MapKind::AnnulusTwist { beta: param, center: None, inner: 0.5, outer: 1.0 },
            // rotated Möbius maps have no inverse inside the family
            _ => MapKind::Mobius { a: vec![0.15 * param, -0.2], angle: 0.0, center: None, radius: 1.0 },
        };
        let f = SelfMap::new(kind);
        let g = f.inverse().unwrap();
        prop_assert!(g.apply(&f.apply(&x)).dist(&x) <= 1e-9);
        prop_assert!(f.apply(&g.apply(&x)).dist(&x) <= 1e-9);
    }
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn graph_k_dominates_j(x in point_in(&ANNULUS), y in point_in(&ANNULUS)) {
        let g = annulus_graph();
        let dom = g.domain();
        prop_assume!(dom.boundary_distance(&x).unwrap() > 0.02 && dom.boundary_distance(&y).unwrap() > 0.02);
        prop_assume!(x != y);
        let k = graph_geodesic(g, &x, &y, EdgeMetric::Quasihyperbolic).unwrap().value;
        let j = distance_ratio_metric(dom, &x, &y).unwrap();
        prop_assert!(k >= j * (1.0 - 1e-9), "k = {k}, j = {j}");
    }
}

static ANNULUS: std::sync::LazyLock<Domain> =
    std::sync::LazyLock::new(|| Domain::annulus(Point::xy(0.0, 0.0), 0.5, 1.0).unwrap());
