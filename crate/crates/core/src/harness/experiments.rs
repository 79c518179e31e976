//! Experiment runners. Series layouts (columns `x, fx, j, k, aux`):
//!
//! - `j`, `j_n`, `j_2n`: `x`, `f(x)`, `j(x, f(x))`; `aux` is the closed form when one exists.
//! - `k_n`, `k_2n`, `k_n_fine`, `jk`, `cor1`: `x`, `f(x)`, `j(x, f(x))`, `k(x, f(x))`;
//!   `cor1` stores `ψ(r(x, f(x)))` in `aux`.
//! - `k_pairs`, `cor2_pairs`: `x`, `y`, `k(x, y)`, `k(f(x), f(y))`, `aux` = their difference.
//! - `psi_pairs`: `x`, `y`, `j(x, y)`, `k(x, y)`.
//! - `boundary_identity`, `shell_identity`: `ξ`, `f(ξ)`, `aux` = displacement.
//! - `perfectness`, `shell_perfectness`: witness center, `j` = witness radius, `aux` = `C`
//!   (`c_max` when the sample is not uniformly perfect up to `c_max`).
//! - `dilatation`: `x`, `aux` = `H(x)`.
//! - `diameter@ε`: `x`, `aux` = largest `d_ε` from `x` to the sample.
//! - `comparison@ε`: `x`, `y`, `j(x, y)`, `k(x, y)`, `aux` = comparison ratio.
//! - `sandwich@ε`: two shell points, `j` = `ρ`, `k` = chain value.
//! - `eps_uniformity@ε`: `x`, `y`, `aux` = cigar ratio of the `d_ε` geodesic.
//! - `basepoint@ε`: `j` = largest ratio factor, `k` = bound `e^{2εk(w, w′)}`.
//! - `starlike`, `delta`, `inner_uniformity`: `aux` = the estimate.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use super::spec::{DomainSpec, ExperimentSpec, TheoremTag, Tolerances};
use super::{Check, ExperimentReport, Field, PointRecord, Provenance, ReportBuilder, Role, Stat};
use crate::boundary::{uniform_perfectness_constant, BoundarySet, PerfectnessResult, PerfectnessVerdict};
use crate::error::{Error, Result};
use crate::geometry::{BBox, Domain, DomainKind, Point};
use crate::graph::{dijkstra, EdgeMetric, MetricGraph, ResolutionSpec};
use crate::gromov::{delta_four_point, rough_isometry_defect, starlike_constant, FiniteMetricSpace};
use crate::metric::{
    distance_ratio, distance_ratio_metric, graph_geodesic, pairwise_distances, psi_envelope,
    uniformity_constant_estimate, ConvergencePolicy, MetricLadder, UniformityMode,
};
use crate::qcmaps::{boundary_identity_defect, dilatation_field, MapKind, SelfMap};
use crate::uniformize::{
    basepoint_sensitivity, boundary_shell, comparison_constant, eps_uniformity, visual_metric,
    BoundaryShell, ShellOptions, UniformizedSpace,
};

const BOUNDARY_SAMPLE: usize = 512;
const DILATATION_POINTS: usize = 32;
const SANITY_POINTS: usize = 32;
const DELTA_POINTS: usize = 40;
const DELTA_BUDGET: usize = 20_000;
const COVERAGE_CAP: usize = 256;
const STARLIKE_RAYS: usize = 64;
const REPS_PER_CLUSTER: usize = 8;
const ENVELOPE_PAIRS_PER_POINT: usize = 40;
/// A shell cluster whose Euclidean diameter stays below this multiple of the
/// shell depth shrinks to one point as the depth goes to zero.
const COLLAPSE_RATIO: f64 = 8.0;

/// Base point used when a spec does not give one.
pub fn default_basepoint(dom: &Domain) -> Point {
    let dim = dom.dim();
    let e1 = Point::unit(dim, 0);
    match dom.kind() {
        DomainKind::Ball { center, .. } => center.clone(),
        DomainKind::PuncturedBall { center, radius } => center.add(&e1.scale(0.5 * radius)),
        DomainKind::Annulus {
            center,
            inner,
            outer,
        } => center.add(&e1.scale(0.5 * (inner + outer))),
        DomainKind::HalfSpace { normal, offset } => normal.scale(offset + 1.0),
        DomainKind::PuncturedSpace { center } => center.add(&e1),
        DomainKind::AxisLineComplement { point, direction } => {
            // a unit vector orthogonal to the axis
            let mut u = Point::unit(3, 0);
            if direction.dot(&u).abs() > 0.9 {
                u = Point::unit(3, 1);
            }
            let perp = u.sub(&direction.scale(direction.dot(&u)));
            point.add(&perp.scale(1.0 / perp.norm()))
        }
        DomainKind::Slab {
            normal,
            lower,
            upper,
        } => normal.scale(0.5 * (lower + upper)),
        DomainKind::Custom(_) => {
            let b = dom.bbox();
            Point::new(b.min.iter().zip(&b.max).map(|(a, c)| 0.5 * (a + c)).collect())
                .unwrap_or_else(|_| Point::origin(dim))
        }
    }
}

/// Points closer than this to the boundary are excluded from suprema.
fn exclusion_band(spec: &ExperimentSpec, dom: &Domain, res: &ResolutionSpec) -> f64 {
    spec.sample
        .exclusion
        .unwrap_or_else(|| (5.0 * dom.min_clip()).max(res.min_spacing / res.spacing_ratio))
}

/// Up to `count` seeded interior points at depth `band`; with `image`, the
/// image under `map` must also lie at depth `band`.
fn admissible_points(
    dom: &Domain,
    map: &SelfMap,
    count: usize,
    band: f64,
    seed: u64,
    image: bool,
) -> (Vec<Point>, usize) {
    let raw = dom.interior_sample(if image { 4 * count } else { count }, band, seed);
    let mut out = Vec::with_capacity(count);
    let mut dropped = 0;
    for x in raw {
        if out.len() == count {
            break;
        }
        if !image || dom.signed_distance(&map.apply(&x)) > band {
            out.push(x);
        } else {
            dropped += 1;
        }
    }
    (out, dropped)
}

fn j_of(dom: &Domain, x: &Point, y: &Point) -> f64 {
    distance_ratio_metric(dom, x, y).unwrap_or(f64::NAN)
}

fn k_of(g: &MetricGraph, x: &Point, y: &Point) -> f64 {
    graph_geodesic(g, x, y, EdgeMetric::Quasihyperbolic).map_or(f64::NAN, |r| r.value)
}

/// `j` and `k` of `(x, f(x))` for each point, in parallel, in input order.
fn jk_records(series: &str, g: &MetricGraph, map: &SelfMap, pts: &[Point]) -> Vec<PointRecord> {
    let dom = g.domain();
    pts.par_iter()
        .enumerate()
        .map(|(i, x)| {
            let fx = map.apply(x);
            PointRecord::new(series, i)
                .at(x.coords(), fx.coords())
                .j(j_of(dom, x, &fx))
                .k(k_of(g, x, &fx))
        })
        .collect()
}

fn with_series(records: &[PointRecord], series: &str, take: usize) -> Vec<PointRecord> {
    records
        .iter()
        .take(take)
        .map(|r| PointRecord {
            series: series.to_string(),
            ..r.clone()
        })
        .collect()
}

fn sanity_jk(b: &mut ReportBuilder, series: &str, tol: &Tolerances) {
    b.assert(
        &format!("sanity_j_le_k_{series}"),
        "j <= k + 3 tau_metric pointwise",
        Role::Sanity,
        Check::AllDominated {
            series: series.into(),
            a: Field::J,
            b: Field::K,
            scale: 1.0,
            offset: 3.0 * tol.tau_metric,
        },
    );
}

fn perfectness_record(series: &str, res: &PerfectnessResult, center: Option<&Point>, c_max: f64) -> PointRecord {
    let c = match res.verdict {
        PerfectnessVerdict::UpTo(c) => c,
        PerfectnessVerdict::NotUpTo(_) => c_max,
    };
    let mut r = PointRecord::new(series, 0).aux(c);
    if let Some(p) = center {
        r.x = p.coords().to_vec();
    }
    if let Some(w) = &res.witness {
        r.j = Some(w.radius);
    }
    r
}

fn perfectness_diag(res: &PerfectnessResult, center: Option<&Point>) -> serde_json::Value {
    json!({
        "verdict": res.verdict,
        "witness_center": center.map(|p| p.coords().to_vec()),
        "witness_radius": res.witness.as_ref().map(|w| w.radius),
        "witness_c": res.witness.as_ref().map(|w| w.c).filter(|c| c.is_finite()),
        "failures": res.failures.len(),
        "radii": res.radii,
        "centers_tested": res.centers_tested,
    })
}

fn nn_gaps(pts: &[Point]) -> Vec<f64> {
    let mut gaps: Vec<f64> = pts
        .par_iter()
        .map(|p| {
            pts.iter()
                .map(|q| p.dist(q))
                .filter(|&d| d > 0.0)
                .fold(f64::INFINITY, f64::min)
        })
        .filter(|g| g.is_finite())
        .collect();
    gaps.sort_by(f64::total_cmp);
    gaps
}

fn median_nn_gap(pts: &[Point]) -> f64 {
    let gaps = nn_gaps(pts);
    gaps.get(gaps.len() / 2).copied().unwrap_or(0.0)
}

fn max_nn_gap(pts: &[Point]) -> f64 {
    nn_gaps(pts).last().copied().unwrap_or(0.0)
}

/// Hypotheses on the Euclidean boundary sample: identity boundary values and
/// uniform perfectness.
fn euclidean_boundary_hypotheses(
    b: &mut ReportBuilder,
    dom: &Domain,
    map: &SelfMap,
    tol: &Tolerances,
    seed: u64,
) -> Result<Option<f64>> {
    let bd = dom.boundary_sample(BOUNDARY_SAMPLE, seed)?;
    let id = boundary_identity_defect(map, &bd, dom.min_clip())?;
    b.records(bd.iter().enumerate().map(|(i, p)| {
        let fp = map.apply(p);
        PointRecord::new("boundary_identity", i)
            .at(p.coords(), fp.coords())
            .aux(fp.dist(p))
    }));
    b.assert(
        "hyp_boundary_identity",
        "f fixes the boundary sample within tau_id = 10 d_min_clip",
        Role::Hypothesis,
        Check::AllAtMost {
            series: "boundary_identity".into(),
            field: Field::Aux,
            bound: id.tau_id,
            strict: false,
        },
    );
    b.diag("boundary_identity", &id);
    let measured = if bd.len() < 2 {
        // a single finite boundary point: together with infinity it is a
        // two-point set, which is not uniformly perfect
        b.records([PointRecord::new("perfectness", 0)
            .at(bd[0].coords(), &[])
            .aux(tol.c_max)]);
        b.diag("perfectness", json!({"verdict": "single boundary point"}));
        None
    } else {
        let bset = BoundarySet::from_points(bd.clone())?.with_resolution(median_nn_gap(&bd));
        let res = uniform_perfectness_constant(&bset, None, tol.c_max)?;
        let center = res.witness.as_ref().map(|w| &bd[w.center]);
        b.records([perfectness_record("perfectness", &res, center, tol.c_max)]);
        b.diag("perfectness", perfectness_diag(&res, center));
        res.constant()
    };
    b.assert(
        "hyp_boundary_perfectness",
        "the boundary sample is uniformly perfect with C < c_max",
        Role::Hypothesis,
        Check::AllAtMost {
            series: "perfectness".into(),
            field: Field::Aux,
            bound: tol.c_max,
            strict: true,
        },
    );
    Ok(measured)
}

/// Farthest-point picks among graph nodes under `weights`, until every
/// candidate lies within `cover` of a pick, with the pairwise matrix of the
/// picks. `cover` is the larger of `resolution` and 1/32 of the largest
/// distance from the first candidate; when `cap` stops the loop first, it is
/// the distance actually achieved.
struct Coverage {
    picks: Vec<u32>,
    matrix: Vec<Vec<f64>>,
    cover: f64,
    /// Scale below which the candidate set itself is discrete.
    resolution: f64,
}

fn coverage_picks(
    g: &MetricGraph,
    weights: &[f64],
    candidates: &[u32],
    resolution: f64,
    cap: usize,
) -> Result<Coverage> {
    if candidates.len() < 2 {
        return Err(Error::TooFewPoints {
            need: 2,
            got: candidates.len(),
        });
    }
    let row = |c: u32| -> Vec<f64> {
        let t = dijkstra(g, weights, &[(c, 0.0)], None);
        candidates.iter().map(|&n| t.dist[n as usize]).collect()
    };
    let mut picks = vec![0usize];
    let mut rows = vec![row(candidates[0])];
    let mut near = rows[0].clone();
    let reach = near.iter().copied().fold(0.0, f64::max);
    if !reach.is_finite() {
        return Err(Error::Unreachable);
    }
    let mut cover = (reach / 32.0).max(resolution);
    loop {
        let (i, v) = near
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
        if v <= cover {
            break;
        }
        if picks.len() == cap {
            cover = v;
            break;
        }
        let r = row(candidates[i]);
        for (n, d) in near.iter_mut().zip(&r) {
            *n = n.min(*d);
        }
        picks.push(i);
        rows.push(r);
    }
    let n = picks.len();
    let matrix = (0..n)
        .map(|a| {
            (0..n)
                .map(|c| if a == c { 0.0 } else { rows[a][picks[c]].min(rows[c][picks[a]]) })
                .collect()
        })
        .collect();
    Ok(Coverage {
        picks: picks.into_iter().map(|i| candidates[i]).collect(),
        matrix,
        cover,
        resolution,
    })
}

/// Perfectness of a coverage subsample with radii `diam/2, diam/4, …` down to
/// four times the coverage radius and the candidate resolution.
fn coverage_perfectness(cov: &Coverage, c_max: f64) -> Result<PerfectnessResult> {
    let labels = (0..cov.picks.len()).map(|i| format!("s{i}")).collect();
    let space = FiniteMetricSpace::new(labels, cov.matrix.clone())?;
    let diam = space.diameter();
    let mut radii = Vec::new();
    let mut r = 0.5 * diam;
    // a pick at distance in [c, 3c] exists once r exceeds 3c for covering radius c
    let floor = 4.0 * cov.cover.max(cov.resolution);
    while r >= floor && r > 0.0 {
        radii.push(r);
        r *= 0.5;
    }
    let bset = BoundarySet::from_space(space)?;
    uniform_perfectness_constant(&bset, Some(&radii), c_max)
}

fn shell_hypotheses(
    b: &mut ReportBuilder,
    g: &MetricGraph,
    map: &SelfMap,
    cov: &Coverage,
    tau_id: f64,
    identity_metric: EdgeMetric,
    tol: &Tolerances,
    what: &str,
) -> Result<()> {
    let pts: Vec<Point> = cov.picks.iter().map(|&n| g.node(n as usize).clone()).collect();
    let recs: Vec<PointRecord> = pts
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let fp = map.apply(p);
            let d = match identity_metric {
                EdgeMetric::Euclidean if fp != *p => {
                    graph_geodesic(g, p, &fp, EdgeMetric::Euclidean).map_or(f64::NAN, |r| r.value)
                }
                _ => fp.dist(p),
            };
            PointRecord::new("shell_identity", i).at(p.coords(), fp.coords()).aux(d)
        })
        .collect();
    b.records(recs);
    b.assert(
        "hyp_shell_identity",
        &format!("f fixes the boundary shell within tau_id = 10 x shell depth ({what})"),
        Role::Hypothesis,
        Check::AllAtMost {
            series: "shell_identity".into(),
            field: Field::Aux,
            bound: tau_id,
            strict: false,
        },
    );
    let res = coverage_perfectness(cov, tol.c_max)?;
    let center = res.witness.as_ref().map(|w| &pts[w.center]);
    b.records([perfectness_record("shell_perfectness", &res, center, tol.c_max)]);
    b.diag("shell_perfectness", perfectness_diag(&res, center));
    b.diag(
        "shell_coverage",
        json!({"picks": cov.picks.len(), "cover": cov.cover, "resolution": cov.resolution, "metric": what}),
    );
    b.assert(
        "hyp_shell_perfectness",
        &format!("the boundary shell is uniformly perfect in {what} with C < c_max"),
        Role::Hypothesis,
        Check::AllAtMost {
            series: "shell_perfectness".into(),
            field: Field::Aux,
            bound: tol.c_max,
            strict: true,
        },
    );
    Ok(())
}

/// Flags a shell cluster that collapses to a single boundary point. Such a
/// point is isolated in the limit, so the annulus between its cluster and the
/// rest of the shell is empty for every `C`.
fn shell_isolation(b: &mut ReportBuilder, us: &UniformizedSpace, shell: &BoundaryShell) {
    let t = shell.band.0;
    let g = us.graph();
    let mut worst: Option<(f64, usize)> = None;
    for tag in 0..shell.clusters {
        let m = shell.members(tag);
        let mut diam = 0.0f64;
        for (a, &i) in m.iter().enumerate() {
            for &j in &m[a + 1..] {
                diam = diam.max(shell.points[i].point.dist(&shell.points[j].point));
            }
        }
        let ratio = diam / t;
        if worst.map_or(true, |(r, _)| ratio < r) {
            worst = Some((ratio, tag));
        }
    }
    let Some((ratio, tag)) = worst.filter(|_| shell.clusters >= 2) else {
        b.diag("shell_isolation", json!({"clusters": shell.clusters}));
        return;
    };
    let m = shell.members(tag);
    let dim = shell.points[m[0]].point.dim();
    let mut c = vec![0.0; dim];
    for &i in &m {
        for (a, v) in c.iter_mut().zip(shell.points[i].point.coords()) {
            *a += v / m.len() as f64;
        }
    }
    let sources: Vec<(u32, f64)> = m.iter().map(|&i| (shell.points[i].node, 0.0)).collect();
    let tree = dijkstra(g, us.eps_edge_weights(), &sources, None);
    let gap = shell
        .points
        .iter()
        .filter(|p| p.limit_tag != tag)
        .map(|p| tree.dist[p.node as usize])
        .fold(f64::INFINITY, f64::min);
    let mut rec = PointRecord::new("shell_isolation", 0).aux(ratio).j(gap);
    rec.x = c.clone();
    b.records([rec]);
    b.diag(
        "shell_isolation",
        json!({"clusters": shell.clusters, "cluster": tag, "members": m.len(), "diameter_over_depth": ratio,
               "witness_center": c, "witness_radius": gap}),
    );
    b.assert(
        "hyp_shell_no_isolated_point",
        "no shell cluster collapses to a point isolated from the rest of the boundary",
        Role::Hypothesis,
        Check::ValueAbove {
            series: "shell_isolation".into(),
            index: 0,
            field: Field::Aux,
            bound: COLLAPSE_RATIO,
        },
    );
}

fn provenance(spec: &ExperimentSpec, dom: Option<&Domain>, band: Option<f64>) -> Provenance {
    Provenance {
        domain: dom.map(Domain::id),
        map: spec.map.as_ref().map(|m| m.name().to_string()),
        seed: spec.sample.seed,
        graphs: Vec::new(),
        resolutions: Vec::new(),
        exclusion_band: band,
        tolerances: spec.tolerances.clone(),
    }
}

fn note_graph(b: &mut ReportBuilder, g: &MetricGraph) {
    let p = b.provenance();
    p.graphs.push(g.id());
    p.resolutions.push(g.resolution().h);
}

/// Remark on rotations of `R³ \ Z`: `j(x, f(x)) = log 3` for the half turn.
fn rotation(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    let tol = &spec.tolerances;
    let seed = spec.sample.seed;
    let dom = Domain::z_axis_complement();
    let map = SelfMap::new(MapKind::RotationAboutAxis {
        angle: PI,
        center: None,
        axis: None,
    });
    let mut pts = vec![Point::xyz(1.0, 0.0, 0.0), Point::xyz(5.0, 0.0, 7.0)];
    pts.extend(dom.interior_sample(spec.sample.count.max(1000), 0.0, seed));
    let mut b = ReportBuilder::new(&spec.name, TheoremTag::RemarkRotation, provenance(spec, Some(&dom), None));
    b.provenance().map = Some(map.kind.name().into());
    let log3 = 3f64.ln();
    b.records(pts.iter().enumerate().map(|(i, x)| {
        let fx = map.apply(x);
        PointRecord::new("j", i)
            .at(x.coords(), fx.coords())
            .j(j_of(&dom, x, &fx))
            .aux(log3)
    }));
    b.assert(
        "j_equals_log3",
        "j(x, f(x)) = log 3 at every sampled x",
        Role::Conclusion,
        Check::MaxAbsDiff {
            series: "j".into(),
            a: Field::J,
            b: Field::Aux,
            tol: tol.exactness,
        },
    );
    b.summary("max_j", "j", Field::J, Stat::Max);
    b.summary("min_j", "j", Field::J, Stat::Min);
    b.summary("points", "j", Field::J, Stat::Count);

    // k part on a box symmetric under the half turn
    let small = Arc::new(Domain::with_bbox(
        dom.kind().clone(),
        BBox::cube(&[0.0, 0.0, 0.0], 1.0),
    )?);
    let mut res = ResolutionSpec::new(0.5);
    res.min_spacing = 0.125;
    let g = MetricGraph::build(small.clone(), res.clone(), seed)?;
    note_graph(&mut b, &g);
    let band = (res.min_spacing / res.spacing_ratio).max(5.0 * small.min_clip());
    b.provenance().exclusion_band = Some(band);
    let kp = small.interior_sample(32, band, seed.wrapping_add(1));
    let pairs: Vec<(Point, Point)> = kp.chunks(2).map(|c| (c[0].clone(), c[1].clone())).collect();
    let fit = rough_isometry_defect(&g, |x| map.apply(x), &pairs)?;
    b.records(pairs.iter().zip(&fit.per_pair).enumerate().map(|(i, ((x, y), (a, c)))| {
        PointRecord::new("k_pairs", i)
            .at(x.coords(), y.coords())
            .j(*a)
            .k(*c)
            .aux((a - c).abs())
    }));
    b.assert(
        "k_defect",
        "|k(f(x), f(y)) - k(x, y)| <= 3 tau_metric max k",
        Role::Conclusion,
        Check::RelativeDefect {
            series: "k_pairs".into(),
            scale: 3.0 * tol.tau_metric,
        },
    );
    b.records(jk_records("jk", &g, &map, &kp));
    sanity_jk(&mut b, "jk", tol);
    b.summary("k_defect", "k_pairs", Field::Aux, Stat::Max);
    b.diag("rough_isometry", json!({"l_fit": fit.l_fit, "m_fit": fit.m_fit, "additive_defect": fit.additive_defect}));
    Ok(b.finish())
}

/// Remark on the punctured disk: `j(x_m, f(x_m)) = log m` for `f(x) = |x|x`.
fn puncture(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    let tol = &spec.tolerances;
    let m_max = spec.m_max.unwrap_or(100);
    if m_max < 10 {
        return Err(Error::InvalidParameter(format!("m_max must be at least 10, got {m_max}")));
    }
    let dom = Domain::punctured_unit_disk();
    let map = SelfMap::new(MapKind::RadialStretch { center: None });
    let mut b = ReportBuilder::new(&spec.name, TheoremTag::RemarkPuncture, provenance(spec, Some(&dom), None));
    b.provenance().map = Some(map.kind.name().into());
    b.records((3..=m_max).map(|m| {
        let x = Point::xy(1.0 / m as f64, 0.0);
        let fx = map.apply(&x);
        PointRecord::new("j", m)
            .at(x.coords(), fx.coords())
            .j(j_of(&dom, &x, &fx))
            .aux((m as f64).ln())
    }));
    b.assert(
        "j_equals_log_m",
        "j(x_m, f(x_m)) = log m",
        Role::Conclusion,
        Check::MaxAbsDiff {
            series: "j".into(),
            a: Field::J,
            b: Field::Aux,
            tol: tol.exactness,
        },
    );
    b.assert(
        "strictly_increasing",
        "j(x_m, f(x_m)) strictly increases with m",
        Role::Conclusion,
        Check::StrictlyIncreasing {
            series: "j".into(),
            field: Field::J,
        },
    );
    if m_max >= 60 {
        b.assert(
            "exceeds_4_by_60",
            "j exceeds 4 at m = 60: no finite M bounds this family",
            Role::Conclusion,
            Check::ValueAbove {
                series: "j".into(),
                index: 60,
                field: Field::J,
                bound: 4.0,
            },
        );
    }
    b.summary("max_j", "j", Field::J, Stat::Max);
    b.diag(
        "unbounded_family",
        "j(x_m, f(x_m)) = log m diverges, so no finite M bounds j(x, f(x)) on this family",
    );
    Ok(b.finish())
}

struct Setup {
    dom: Arc<Domain>,
    map: SelfMap,
    ladder: MetricLadder,
    band: f64,
}

fn setup(spec: &ExperimentSpec) -> Result<Setup> {
    let dom = spec.build_domain()?;
    let map = spec.self_map();
    let res = spec.resolution.spec();
    let band = exclusion_band(spec, &dom, &res);
    let policy = ConvergencePolicy {
        tau_metric: spec.tolerances.tau_metric.max(f64::MIN_POSITIVE),
        max_levels: 2,
    };
    let ladder = MetricLadder::new(dom.clone(), res, spec.sample.seed, policy)?;
    Ok(Setup {
        dom,
        map,
        ladder,
        band,
    })
}

fn theorem1(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    let s = setup(spec)?;
    let tol = &spec.tolerances;
    let n = spec.sample.count;
    let mut b = ReportBuilder::new(&spec.name, spec.theorem, provenance(spec, Some(&s.dom), Some(s.band)));
    let c = euclidean_boundary_hypotheses(&mut b, &s.dom, &s.map, tol, spec.sample.seed)?;

    let pts = s.dom.interior_sample(2 * n, s.band, spec.sample.seed);
    let recs: Vec<PointRecord> = pts
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let fx = s.map.apply(x);
            PointRecord::new("j_2n", i)
                .at(x.coords(), fx.coords())
                .j(j_of(&s.dom, x, &fx))
        })
        .collect();
    b.records(with_series(&recs, "j_n", n));
    b.records(recs);
    b.assert(
        "sup_j_finite",
        "sup j(x, f(x)) over the 2N sample is finite",
        Role::Conclusion,
        Check::AllFinite {
            series: "j_2n".into(),
            field: Field::J,
            positive: false,
        },
    );
    b.assert(
        "sup_j_stable_under_doubling",
        "sup j drifts by at most the drift tolerance from N to 2N points",
        Role::Conclusion,
        Check::SupDrift {
            a: "j_n".into(),
            b: "j_2n".into(),
            field: Field::J,
            tol: tol.drift,
        },
    );

    let dil_pts: Vec<Point> = pts.iter().take(DILATATION_POINTS).cloned().collect();
    let field = dilatation_field(&s.map, &s.dom, &dil_pts)?;
    b.records(field.samples.iter().enumerate().map(|(i, d)| {
        PointRecord::new("dilatation", i).at(d.point.coords(), &[]).aux(d.h)
    }));
    b.assert(
        "dilatation_measured",
        "measured dilatation K-hat (declared K is not verified)",
        Role::Diagnostic,
        Check::AllFinite {
            series: "dilatation".into(),
            field: Field::Aux,
            positive: true,
        },
    );

    let g = s.ladder.graph(0)?;
    note_graph(&mut b, &g);
    let (kp, _) = admissible_points(&s.dom, &s.map, SANITY_POINTS, s.band, spec.sample.seed, true);
    b.records(jk_records("jk", &g, &s.map, &kp));
    sanity_jk(&mut b, "jk", tol);

    b.summary("sup_j", "j_2n", Field::J, Stat::Max);
    b.summary("sup_j_n", "j_n", Field::J, Stat::Max);
    b.summary("k_hat", "dilatation", Field::Aux, Stat::Max);
    b.summary("c_boundary", "perfectness", Field::Aux, Stat::Max);
    let sup_j = pts
        .iter()
        .map(|x| j_of(&s.dom, x, &s.map.apply(x)))
        .fold(0.0, f64::max);
    b.diag(
        "triple",
        json!({"c": c, "k_hat": field.max(), "sup_j": sup_j, "declared_k": s.map.declared_k}),
    );
    Ok(b.finish())
}

/// `k(x, f(x))` suprema at `N`, `2N` and `h/2`, plus the additive defect check.
fn k_conclusions(
    b: &mut ReportBuilder,
    s: &Setup,
    spec: &ExperimentSpec,
) -> Result<(Arc<MetricGraph>, Vec<Point>)> {
    let tol = &spec.tolerances;
    let n = spec.sample.count;
    let (pts, dropped) = admissible_points(&s.dom, &s.map, 2 * n, s.band, spec.sample.seed, true);
    if pts.len() < 2 * n {
        return Err(Error::TooFewPoints {
            need: 2 * n,
            got: pts.len(),
        });
    }
    b.diag("images_in_band_dropped", dropped);
    let g0 = s.ladder.graph(0)?;
    let g1 = s.ladder.graph(1)?;
    note_graph(b, &g0);
    note_graph(b, &g1);
    let coarse = jk_records("k_2n", &g0, &s.map, &pts);
    let sup_k = coarse.iter().filter_map(|r| r.k).fold(0.0, f64::max);
    b.records(with_series(&coarse, "k_n", n));
    b.records(coarse);
    b.records(jk_records("k_n_fine", &g1, &s.map, &pts[..n]));
    for (field, name) in [(Field::K, "k"), (Field::J, "j")] {
        b.assert(
            &format!("sup_{name}_finite"),
            &format!("sup {name}(x, f(x)) over the 2N sample is finite"),
            Role::Conclusion,
            Check::AllFinite {
                series: "k_2n".into(),
                field,
                positive: false,
            },
        );
        b.assert(
            &format!("sup_{name}_stable_under_doubling"),
            &format!("sup {name} drifts by at most the drift tolerance from N to 2N points"),
            Role::Conclusion,
            Check::SupDrift {
                a: "k_n".into(),
                b: "k_2n".into(),
                field,
                tol: tol.drift,
            },
        );
    }
    b.assert(
        "sup_k_stable_under_refinement",
        "sup k drifts by at most the drift tolerance from h to h/2",
        Role::Conclusion,
        Check::SupDrift {
            a: "k_n".into(),
            b: "k_n_fine".into(),
            field: Field::K,
            tol: tol.drift,
        },
    );
    sanity_jk(b, "k_2n", tol);
    sanity_jk(b, "k_n_fine", tol);

    let pairs: Vec<(Point, Point)> = pts
        .chunks(2)
        .take(n / 2)
        .map(|c| (c[0].clone(), c[1].clone()))
        .collect();
    let fit = rough_isometry_defect(&g0, |x| s.map.apply(x), &pairs)?;
    b.records(pairs.iter().zip(&fit.per_pair).enumerate().map(|(i, ((x, y), (a, c)))| {
        PointRecord::new("cor2_pairs", i)
            .at(x.coords(), y.coords())
            .j(*a)
            .k(*c)
            .aux((a - c).abs())
    }));
    b.assert(
        "cor2_defect",
        "additive k-defect <= 2 sup k(x, f(x)) + 4 tau_metric max k",
        Role::Conclusion,
        Check::DefectBound {
            pairs: "cor2_pairs".into(),
            points: "k_2n".into(),
            slack: 4.0 * tol.tau_metric,
        },
    );
    let two_sup = 2.0 * sup_k;
    b.diag(
        "cor2",
        json!({
            "additive_defect": fit.additive_defect,
            "two_sup_k": two_sup,
            "ratio": if two_sup > 0.0 { Some(fit.additive_defect / two_sup) } else { None },
            "l_fit": fit.l_fit,
            "m_fit": fit.m_fit,
        }),
    );

    let dpts: Vec<Point> = pts.iter().take(DELTA_POINTS).cloned().collect();
    let m = pairwise_distances(&g0, &dpts, EdgeMetric::Quasihyperbolic)?;
    let space = FiniteMetricSpace::new((0..dpts.len()).map(|i| format!("p{i}")).collect(), m)?;
    let delta = delta_four_point(&space, DELTA_BUDGET, spec.sample.seed)?;
    b.records([PointRecord::new("delta", 0).aux(delta.delta)]);
    b.assert(
        "delta_estimate",
        "four-point delta of the sample in k",
        Role::Diagnostic,
        Check::AllFinite {
            series: "delta".into(),
            field: Field::Aux,
            positive: false,
        },
    );
    b.diag("delta", &delta);
    b.summary("sup_k", "k_2n", Field::K, Stat::Max);
    b.summary("sup_k_n", "k_n", Field::K, Stat::Max);
    b.summary("sup_k_fine", "k_n_fine", Field::K, Stat::Max);
    b.summary("sup_j", "k_2n", Field::J, Stat::Max);
    b.summary("cor2_defect", "cor2_pairs", Field::Aux, Stat::Max);
    Ok((g0, pts))
}

fn basepoint(spec: &ExperimentSpec, dom: &Domain) -> Result<Point> {
    match &spec.basepoint {
        Some(w) => Point::new(w.clone()),
        None => Ok(default_basepoint(dom)),
    }
}

fn theorem2(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    let s = setup(spec)?;
    let tol = &spec.tolerances;
    let mut b = ReportBuilder::new(&spec.name, spec.theorem, provenance(spec, Some(&s.dom), Some(s.band)));
    let g0 = s.ladder.graph(0)?;
    let w = basepoint(spec, &s.dom)?;
    let us = UniformizedSpace::new(g0.clone(), w, spec.epsilon[0])?;
    let shell = boundary_shell(&us, &ShellOptions::default())?;
    // the shell only resolves d_eps scales above its largest nearest-neighbour gap
    let resolution = shell.points.iter().map(|p| p.gap).fold(0.0, f64::max);
    let cov = coverage_picks(&g0, us.eps_edge_weights(), &shell.nodes(), resolution, COVERAGE_CAP)?;
    shell_hypotheses(
        &mut b,
        &g0,
        &s.map,
        &cov,
        10.0 * shell.band.1,
        EdgeMetric::Quasihyperbolic,
        tol,
        "d_eps",
    )?;
    shell_isolation(&mut b, &us, &shell);
    b.diag(
        "shell",
        json!({"points": shell.len(), "clusters": shell.clusters, "band": shell.band, "epsilon": us.epsilon()}),
    );
    k_conclusions(&mut b, &s, spec)?;
    Ok(b.finish())
}

/// Pairs for the `ψ` envelope: a third far apart, a third walks along the
/// level set of the boundary distance, a third short steps in random
/// directions. Lengths are seeded fractions of the local depth.
fn envelope_pairs(dom: &Domain, count: usize, band: f64, seed: u64) -> Result<Vec<(Point, Point)>> {
    let a = dom.interior_sample(2 * count, band, seed);
    if a.len() < 2 * count {
        return Err(Error::TooFewPoints {
            need: 2 * count,
            got: a.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(count);
    for i in 0..count {
        let (x, z) = (&a[2 * i], &a[2 * i + 1]);
        let frac: f64 = rng.gen_range(0.02..1.0);
        let d = dom.signed_distance(x);
        let y = match i % 3 {
            0 => z.clone(),
            1 => level_walk(dom, x, z, LEVEL_WALK_REACH * frac * d),
            _ => {
                let u = z.sub(x);
                let un = u.norm();
                if !(un > 0.0) {
                    continue;
                }
                x.add(&u.scale(0.5 * frac * d / un))
            }
        };
        if dom.signed_distance(&y) > band && y != *x {
            pairs.push((x.clone(), y));
        }
    }
    Ok(pairs)
}

/// Longest level-set walk, in units of the starting depth.
const LEVEL_WALK_REACH: f64 = 2.0;

fn distance_gradient(dom: &Domain, x: &Point) -> Point {
    let h = 1e-6 * dom.signed_distance(x).max(f64::MIN_POSITIVE);
    let grad: Vec<f64> = (0..x.dim())
        .map(|i| {
            let e = Point::unit(x.dim(), i).scale(h);
            (dom.signed_distance(&x.add(&e)) - dom.signed_distance(&x.sub(&e))) / (2.0 * h)
        })
        .collect();
    Point::new(grad).unwrap_or_else(|_| Point::origin(x.dim()))
}

/// Walks `length` from `x` along the level set of the boundary distance,
/// heading towards `z` and correcting the depth after every step.
fn level_walk(dom: &Domain, x: &Point, z: &Point, length: f64) -> Point {
    let d0 = dom.signed_distance(x);
    let steps = (length / (0.1 * d0)).ceil().max(1.0) as usize;
    let h = length / steps as f64;
    let mut heading = z.sub(x);
    let mut y = x.clone();
    for _ in 0..steps {
        let g = distance_gradient(dom, &y);
        let gn = g.norm();
        let mut u = if gn > 0.0 {
            heading.sub(&g.scale(heading.dot(&g) / (gn * gn)))
        } else {
            heading.clone()
        };
        let un = u.norm();
        if !(un > 0.0) {
            break;
        }
        u = u.scale(1.0 / un);
        let mut next = y.add(&u.scale(h));
        let gn2 = distance_gradient(dom, &next);
        let n2 = gn2.norm();
        if n2 > 0.0 {
            next = next.add(&gn2.scale((d0 - dom.signed_distance(&next)) / (n2 * n2)));
        }
        heading = next.sub(&y);
        y = next;
    }
    y
}

fn corollary1(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    let s = setup(spec)?;
    let tol = &spec.tolerances;
    let n = spec.sample.count;
    let mut b = ReportBuilder::new(&spec.name, spec.theorem, provenance(spec, Some(&s.dom), Some(s.band)));
    euclidean_boundary_hypotheses(&mut b, &s.dom, &s.map, tol, spec.sample.seed)?;
    let g = s.ladder.graph(0)?;
    note_graph(&mut b, &g);

    let pairs = envelope_pairs(&s.dom, ENVELOPE_PAIRS_PER_POINT * n, s.band, spec.sample.seed.wrapping_add(1))?;
    let env = psi_envelope(&g, &pairs)?;
    b.records(pairs.iter().zip(&env.records).enumerate().map(|(i, ((x, y), (r, k)))| {
        PointRecord::new("psi_pairs", i)
            .at(x.coords(), y.coords())
            .j(r.ln_1p())
            .k(*k)
    }));

    let (pts, dropped) = admissible_points(&s.dom, &s.map, n, s.band, spec.sample.seed, true);
    b.diag("images_in_band_dropped", dropped);
    let recs: Vec<PointRecord> = jk_records("cor1", &g, &s.map, &pts)
        .into_iter()
        .zip(&pts)
        .map(|(mut r, x)| {
            let rr = distance_ratio(&s.dom, x, &s.map.apply(x)).unwrap_or(f64::NAN);
            r.aux = env.eval(rr).filter(|v| v.is_finite());
            r
        })
        .collect();
    let failures: Vec<usize> = recs
        .iter()
        .filter(|r| match (r.k, r.aux) {
            (Some(k), Some(p)) => k > (1.0 + 3.0 * tol.tau_metric) * p,
            _ => true,
        })
        .map(|r| r.index)
        .collect();
    b.records(recs);
    b.assert(
        "k_under_psi_envelope",
        "k(x, f(x)) <= psi(r(x, f(x))) (1 + 3 tau_metric) on the required fraction of points",
        Role::Conclusion,
        Check::FractionDominated {
            series: "cor1".into(),
            a: Field::K,
            b: Field::Aux,
            scale: 1.0 + 3.0 * tol.tau_metric,
            offset: 0.0,
            fraction: tol.psi_coverage,
        },
    );
    b.assert(
        "sup_k_finite",
        "sup k(x, f(x)) over the sample is finite",
        Role::Conclusion,
        Check::AllFinite {
            series: "cor1".into(),
            field: Field::K,
            positive: false,
        },
    );
    sanity_jk(&mut b, "cor1", tol);
    b.summary("sup_k", "cor1", Field::K, Stat::Max);
    b.summary("sup_j", "cor1", Field::J, Stat::Max);
    b.diag(
        "psi_envelope",
        json!({"knots": env.knots, "dropped": env.dropped, "growth_ratio": env.growth_ratio,
               "super_logarithmic": env.super_logarithmic, "failures": failures}),
    );
    Ok(b.finish())
}

fn corollary3(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    let s = setup(spec)?;
    let tol = &spec.tolerances;
    let mut b = ReportBuilder::new(&spec.name, spec.theorem, provenance(spec, Some(&s.dom), Some(s.band)));
    let g0 = s.ladder.graph(0)?;
    let finest = (0..g0.node_count()).map(|i| g0.spacing(i)).fold(f64::INFINITY, f64::min);
    let t = (0.5 * finest).max(s.dom.min_clip());
    let band: Vec<u32> = (0..g0.node_count())
        .filter(|&i| {
            let d = g0.depths()[i];
            d >= t && d <= 3.0 * t && !g0.in_truncation_shell(i)
        })
        .map(|i| i as u32)
        .collect();
    let band_pts: Vec<Point> = band.iter().map(|&i| g0.node(i as usize).clone()).collect();
    let resolution = max_nn_gap(&band_pts);
    let cov = coverage_picks(&g0, g0.edge_weights(EdgeMetric::Euclidean), &band, resolution, COVERAGE_CAP)?;
    shell_hypotheses(&mut b, &g0, &s.map, &cov, 30.0 * t, EdgeMetric::Euclidean, tol, "d_I")?;

    let (upts, _) = admissible_points(&s.dom, &s.map, spec.sample.count, s.band, spec.sample.seed.wrapping_add(2), false);
    let upairs: Vec<(Point, Point)> = upts.chunks(2).map(|c| (c[0].clone(), c[1].clone())).collect();
    let uni = uniformity_constant_estimate(&g0, &upairs, UniformityMode::Inner)?;
    b.records(uni.per_pair.iter().enumerate().map(|(i, (l, c))| {
        PointRecord::new("inner_uniformity", i).aux(l.max(*c))
    }));
    b.assert(
        "hyp_inner_uniform",
        "inner length and cigar ratios along k-geodesics are finite",
        Role::Hypothesis,
        Check::AllFinite {
            series: "inner_uniformity".into(),
            field: Field::Aux,
            positive: true,
        },
    );
    b.summary("a_hat_inner", "inner_uniformity", Field::Aux, Stat::Max);
    b.diag("inner_uniformity", json!({"a_length": uni.a_length, "a_cigar": uni.a_cigar, "dropped": uni.dropped}));
    k_conclusions(&mut b, &s, spec)?;
    Ok(b.finish())
}

fn lemma212(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    let s = setup(spec)?;
    let tol = &spec.tolerances;
    let mut b = ReportBuilder::new(&spec.name, spec.theorem, provenance(spec, Some(&s.dom), Some(s.band)));
    let g = s.ladder.graph(0)?;
    note_graph(&mut b, &g);
    let w = basepoint(spec, &s.dom)?;
    let pts = s.dom.interior_sample(spec.sample.count, s.band, spec.sample.seed);
    let n = pts.len();
    if n < 10 {
        return Err(Error::TooFewPoints { need: 10, got: n });
    }
    let pairs: Vec<(Point, Point)> = (0..n).map(|i| (pts[i].clone(), pts[(i + 1) % n].clone())).collect();
    let w2 = pts
        .iter()
        .find(|p| p.dist(&w) > 0.0)
        .cloned()
        .ok_or(Error::CoincidentPoints)?;

    for (e, &eps) in spec.epsilon.iter().enumerate() {
        let us = UniformizedSpace::new(g.clone(), w.clone(), eps)?;
        let m = us.pairwise(&pts)?;
        let series = format!("diameter@{eps}");
        b.records(pts.iter().zip(&m).enumerate().map(|(i, (x, row))| {
            PointRecord::new(&series, i)
                .at(x.coords(), &[])
                .aux(row.iter().copied().fold(0.0, f64::max))
        }));
        b.assert(
            &format!("c_diameter@{eps}"),
            "(c) sampled d_eps diameter <= (2/eps)(1 + slack)",
            Role::Conclusion,
            Check::AllAtMost {
                series: series.clone(),
                field: Field::Aux,
                bound: 2.0 / eps * (1.0 + tol.diameter_slack),
                strict: false,
            },
        );
        b.summary(&format!("diameter@{eps}"), &series, Field::Aux, Stat::Max);

        let comp = comparison_constant(&us, &pairs)?;
        let series = format!("comparison@{eps}");
        b.records(pairs.iter().zip(&comp.per_pair).enumerate().map(|(i, ((x, y), r))| {
            let mut rec = PointRecord::new(&series, i).at(x.coords(), y.coords()).j(j_of(&s.dom, x, y));
            if let Some(r) = r {
                rec = rec.k(r.k_xy).aux(r.ratio);
            }
            rec
        }));
        b.assert(
            &format!("e_comparison@{eps}"),
            "(e) comparison ratios are finite and positive",
            Role::Conclusion,
            Check::AllFinite {
                series: series.clone(),
                field: Field::Aux,
                positive: true,
            },
        );
        sanity_jk(&mut b, &series, tol);
        b.diag(&format!("comparison@{eps}"), json!({"c_low": comp.c_low, "c_high": comp.c_high, "spread": comp.spread}));

        let shell = boundary_shell(&us, &ShellOptions::default())?;
        let vm = visual_metric(&us, &shell, None, REPS_PER_CLUSTER)?;
        let series = format!("sandwich@{eps}");
        let mut recs = Vec::new();
        let nr = vm.len();
        for i in 0..nr {
            for j in (i + 1)..nr {
                let (p, q) = (&shell.points[vm.reps[i]].point, &shell.points[vm.reps[j]].point);
                recs.push(
                    PointRecord::new(&series, recs.len())
                        .at(p.coords(), q.coords())
                        .j(vm.rho(i, j))
                        .k(vm.chain(i, j)),
                );
            }
        }
        for a in 0..vm.clusters {
            for c in (a + 1)..vm.clusters {
                let (rho, chain) = vm.cluster_pair(a, c)?;
                recs.push(PointRecord::new(&series, recs.len()).j(rho).k(chain));
            }
        }
        b.records(recs);
        b.assert(
            &format!("visual_sandwich@{eps}"),
            "rho/2 <= chain <= rho on shell representatives and clusters",
            Role::Conclusion,
            Check::Sandwich {
                series: series.clone(),
                tol: tol.sandwich,
            },
        );
        b.diag(
            &format!("visual_metric@{eps}"),
            json!({"eps_v": vm.eps_v, "eps_bound": vm.eps_bound, "delta_w": vm.delta_w,
                   "clusters": vm.clusters, "representatives": nr, "shell_points": shell.len()}),
        );

        let eu = eps_uniformity(&us, &shell, &pairs)?;
        let series = format!("eps_uniformity@{eps}");
        b.records(eu.per_pair.iter().enumerate().map(|(i, c)| PointRecord::new(&series, i).aux(*c)));
        b.assert(
            &format!("c_uniformity@{eps}"),
            "(c) cigar ratios of d_eps geodesics are finite",
            Role::Conclusion,
            Check::AllFinite {
                series: series.clone(),
                field: Field::Aux,
                positive: false,
            },
        );
        b.summary(&format!("a_cigar_eps@{eps}"), &series, Field::Aux, Stat::Max);

        let us2 = UniformizedSpace::new(g.clone(), w2.clone(), eps)?;
        let bs = basepoint_sensitivity(&us, &us2, &pairs)?;
        let series = format!("basepoint@{eps}");
        b.records([PointRecord::new(&series, 0)
            .at(us.base().coords(), w2.coords())
            .j(bs.max_factor)
            .k(bs.bound)]);
        b.assert(
            &format!("e_basepoint@{eps}"),
            "(e) moving w changes comparison ratios by at most exp(2 eps k(w, w'))",
            Role::Conclusion,
            Check::AllDominated {
                series,
                a: Field::J,
                b: Field::K,
                scale: 1.0 + 3.0 * tol.tau_metric,
                offset: 0.0,
            },
        );

        if e == 0 {
            let step = (shell.len() / STARLIKE_RAYS).max(1);
            let targets: Vec<Point> = shell.points.iter().step_by(step).map(|p| p.point.clone()).collect();
            let st = starlike_constant(&g, &w, &pts, &targets)?;
            b.records([PointRecord::new("starlike", 0).aux(st.kappa)]);
            b.assert(
                "b_starlike",
                "(b) rough starlikeness constant kappa is finite",
                Role::Conclusion,
                Check::AllFinite {
                    series: "starlike".into(),
                    field: Field::Aux,
                    positive: false,
                },
            );
            b.diag("starlike", &st);
        }
    }
    for (clause, what) in [
        ("a", "(a) incompleteness and boundedness of D_eps"),
        ("d", "(d) identification of the boundaries"),
        ("f", "(f) the natural map to the completion"),
        ("g", "(g) quasimobius identification of the boundary at infinity"),
    ] {
        b.assert(&format!("{clause}_clause"), what, Role::Diagnostic, Check::None);
    }
    Ok(b.finish())
}

/// Runs one validated experiment.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    spec.check()?;
    let mut report = match spec.theorem {
        TheoremTag::RemarkRotation => rotation(spec),
        TheoremTag::RemarkPuncture => puncture(spec),
        TheoremTag::Thm1 => theorem1(spec),
        TheoremTag::Thm2 | TheoremTag::Cor2 => theorem2(spec),
        TheoremTag::Cor1 => corollary1(spec),
        TheoremTag::Cor3 => corollary3(spec),
        TheoremTag::Lemma212Suite => lemma212(spec),
    }?;
    report.expect_hypothesis_failure = spec.expect_na;
    Ok(report)
}

pub fn run_rotation_case() -> Result<ExperimentReport> {
    let mut spec = ExperimentSpec::new("remark_rotation", TheoremTag::RemarkRotation);
    spec.sample.count = 1000;
    run_experiment(&spec)
}

pub fn run_puncture_divergence_case(m_max: usize) -> Result<ExperimentReport> {
    let mut spec = ExperimentSpec::new("remark_puncture", TheoremTag::RemarkPuncture);
    spec.m_max = Some(m_max);
    run_experiment(&spec)
}

pub fn run_lemma212_suite(domain: DomainSpec, eps_sweep: &[f64]) -> Result<ExperimentReport> {
    let mut spec = ExperimentSpec::new("lemma212_suite", TheoremTag::Lemma212Suite).with_domain(domain);
    spec.epsilon = eps_sweep.to_vec();
    run_experiment(&spec)
}

/// The smoke suite: both remarks and the uniformization suite on the disk.
pub fn canned_suite() -> Vec<ExperimentSpec> {
    let mut rot = ExperimentSpec::new("remark_rotation", TheoremTag::RemarkRotation);
    rot.sample.count = 1000;
    let mut pun = ExperimentSpec::new("remark_puncture", TheoremTag::RemarkPuncture);
    pun.m_max = Some(100);
    let mut lem = ExperimentSpec::new("lemma212_ball", TheoremTag::Lemma212Suite).with_domain(DomainSpec::Ball {
        center: None,
        radius: 1.0,
        dim: 2,
    });
    lem.sample.count = 60;
    vec![rot, pun, lem]
}
