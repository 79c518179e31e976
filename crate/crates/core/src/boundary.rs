//! Uniform perfectness, cross-ratios, empirical quasisymmetry / quasimöbius
//! moduli and the three-point condition on boundary samples.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::gromov::FiniteMetricSpace;

/// Relative slack below which a point on the sphere `|p − x| = r` does not
/// count as lying outside the open ball `B(x, r)`.
const COMPLEMENT_SLACK: f64 = 1e-9;

/// Envelope bins per decade of the ratio `t`.
pub const BINS_PER_DECADE: f64 = 32.0;

/// Extent of the ambient set a boundary sample is drawn from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extent {
    Bounded(f64),
    Unbounded,
}

/// A finite sample of a boundary set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundarySet {
    space: FiniteMetricSpace,
    points: Option<Vec<Point>>,
    extent: Extent,
    /// Sampling scale of a sampled continuum: below `16 × resolution` the
    /// sample is discrete and annulus tests are meaningless. `None` for sets
    /// that are genuinely finite.
    resolution: Option<f64>,
}

impl BoundarySet {
    pub fn from_points(points: Vec<Point>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::TooFewPoints {
                need: 2,
                got: points.len(),
            });
        }
        let dim = points[0].dim();
        for p in &points {
            p.check_dim(dim)?;
        }
        let space = FiniteMetricSpace::euclidean(&points)?;
        Ok(Self {
            extent: Extent::Bounded(space.diameter()),
            space,
            points: Some(points),
            resolution: None,
        })
    }

    pub fn from_space(space: FiniteMetricSpace) -> Result<Self> {
        if space.len() < 2 {
            return Err(Error::TooFewPoints {
                need: 2,
                got: space.len(),
            });
        }
        Ok(Self {
            extent: Extent::Bounded(space.diameter()),
            space,
            points: None,
            resolution: None,
        })
    }

    /// Reads one point per CSV row (all columns numeric, optional header).
    pub fn from_csv<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut pts = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let coords: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse).collect();
            match coords {
                Ok(c) => pts.push(Point::new(c)?),
                Err(_) if row == 0 => continue,
                Err(_) => return Err(Error::Format(format!("row {}: non-numeric field", row + 1))),
            }
        }
        Self::from_points(pts)
    }

    pub fn with_extent(mut self, extent: Extent) -> Self {
        self.extent = extent;
        self
    }

    pub fn with_resolution(mut self, resolution: f64) -> Self {
        self.resolution = Some(resolution);
        self
    }

    pub fn space(&self) -> &FiniteMetricSpace {
        &self.space
    }

    pub fn points(&self) -> Option<&[Point]> {
        self.points.as_deref()
    }

    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.space.is_empty()
    }

    pub fn extent(&self) -> Extent {
        self.extent
    }

    pub fn resolution(&self) -> Option<f64> {
        self.resolution
    }

    pub fn diameter(&self) -> Result<f64> {
        match self.extent {
            Extent::Bounded(d) => Ok(d),
            Extent::Unbounded => Err(Error::UnboundedSet),
        }
    }

    pub fn min_gap(&self) -> f64 {
        let n = self.len();
        (0..n)
            .into_par_iter()
            .map(|i| {
                (0..n)
                    .filter(|&j| j != i)
                    .map(|j| self.space.d(i, j))
                    .filter(|&d| d > 0.0)
                    .fold(f64::INFINITY, f64::min)
            })
            .reduce(|| f64::INFINITY, f64::min)
    }

    /// Dyadic radii `diam · 2^{-i}`, `i ≥ 1`, down to the sampling floor
    /// (`16 × resolution`, or half the smallest gap for finite sets).
    pub fn default_radii(&self) -> Vec<f64> {
        let diam = match self.extent {
            Extent::Bounded(d) => d,
            Extent::Unbounded => self.space.diameter(),
        };
        let floor = match self.resolution {
            Some(r) => 16.0 * r,
            None => 0.5 * self.min_gap(),
        };
        let mut out = Vec::new();
        let mut r = 0.5 * diam;
        while r >= floor && r > 0.0 && out.len() < 64 {
            out.push(r);
            r *= 0.5;
        }
        out
    }
}

/// A pair `(center, r)` with its smallest admissible `C` (infinite when the
/// annulus is empty for every `C`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerfectnessWitness {
    pub center: usize,
    pub radius: f64,
    pub c: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum PerfectnessVerdict {
    /// Uniformly perfect on the sample with this constant.
    UpTo(f64),
    /// Some annulus stays empty for every `C ≤ c_max`.
    NotUpTo(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerfectnessResult {
    pub verdict: PerfectnessVerdict,
    /// The failing pair with the largest radius, or the pair attaining the
    /// constant when the set passes.
    pub witness: Option<PerfectnessWitness>,
    /// Every failing `(center, r)`.
    pub failures: Vec<PerfectnessWitness>,
    pub radii: Vec<f64>,
    pub centers_tested: usize,
}

impl PerfectnessResult {
    pub fn constant(&self) -> Option<f64> {
        match self.verdict {
            PerfectnessVerdict::UpTo(c) => Some(c),
            PerfectnessVerdict::NotUpTo(_) => None,
        }
    }

    pub fn is_perfect(&self) -> bool {
        matches!(self.verdict, PerfectnessVerdict::UpTo(_))
    }
}

/// Smallest `C` with `B(x, r) \ B(x, r/C) ≠ ∅` at one center, for a sorted list
/// of distances from the center; `None` when the complement `X \ B(x, r)` is
/// empty (the condition is vacuous).
fn annulus_constant(sorted: &[f64], r: f64) -> Option<f64> {
    let last = *sorted.last()?;
    if last < r * (1.0 + COMPLEMENT_SLACK) {
        return None;
    }
    let inside = sorted.partition_point(|&d| d < r);
    let m = sorted[..inside].iter().rev().find(|&&d| d > 0.0).copied();
    Some(m.map_or(f64::INFINITY, |m| r / m))
}

/// `C(x, r)` for one center of the set; `None` when `X ⊂ B(x, r)`.
pub fn annulus_constant_at(bset: &BoundarySet, center: usize, r: f64) -> Option<f64> {
    let mut ds: Vec<f64> = (0..bset.len()).map(|j| bset.space().d(center, j)).collect();
    ds.sort_by(f64::total_cmp);
    annulus_constant(&ds, r)
}

/// Checks the annulus condition at every center and ladder radius.
pub fn uniform_perfectness_constant(
    bset: &BoundarySet,
    radii: Option<&[f64]>,
    c_max: f64,
) -> Result<PerfectnessResult> {
    if bset.is_empty() {
        return Err(Error::EmptySet);
    }
    let radii: Vec<f64> = match radii {
        Some(r) => r.to_vec(),
        None => bset.default_radii(),
    };
    let n = bset.len();
    let space = bset.space();
    let per_center: Vec<Vec<PerfectnessWitness>> = (0..n)
        .into_par_iter()
        .map(|x| {
            let mut ds: Vec<f64> = (0..n).map(|j| space.d(x, j)).collect();
            ds.sort_by(f64::total_cmp);
            radii
                .iter()
                .filter_map(|&r| {
                    annulus_constant(&ds, r).map(|c| PerfectnessWitness { center: x, radius: r, c })
                })
                .collect()
        })
        .collect();
    let all: Vec<PerfectnessWitness> = per_center.into_iter().flatten().collect();
    let failures: Vec<PerfectnessWitness> = all.iter().filter(|w| w.c > c_max).cloned().collect();
    let (verdict, witness) = if failures.is_empty() {
        let worst = all
            .iter()
            .cloned()
            .reduce(|a, b| if b.c > a.c { b } else { a });
        (
            PerfectnessVerdict::UpTo(worst.as_ref().map_or(1.0, |w| w.c.max(1.0))),
            worst,
        )
    } else {
        let main = failures
            .iter()
            .cloned()
            .reduce(|a, b| if b.radius > a.radius { b } else { a });
        (PerfectnessVerdict::NotUpTo(c_max), main)
    };
    Ok(PerfectnessResult {
        verdict,
        witness,
        failures,
        radii,
        centers_tested: n,
    })
}

fn ratio(num: f64, den: f64) -> Result<f64> {
    if num == 0.0 || den == 0.0 {
        Err(Error::CoincidentPoints)
    } else {
        Ok(num / den)
    }
}

/// `|a − c||b − d| / (|a − b||c − d|)`.
pub fn cross_ratio(a: &Point, b: &Point, c: &Point, d: &Point) -> Result<f64> {
    for (p, q) in [(a, b), (a, c), (a, d), (b, c), (b, d), (c, d)] {
        if p == q {
            return Err(Error::CoincidentPoints);
        }
    }
    ratio(a.dist(c) * b.dist(d), a.dist(b) * c.dist(d))
}

/// Cross ratio of four labelled points of a finite metric space.
pub fn cross_ratio_in(space: &FiniteMetricSpace, q: [usize; 4]) -> Result<f64> {
    let [a, b, c, d] = q;
    for (i, j) in [(a, b), (a, c), (a, d), (b, c), (b, d), (c, d)] {
        if space.d(i, j) == 0.0 {
            return Err(Error::CoincidentPoints);
        }
    }
    ratio(space.d(a, c) * space.d(b, d), space.d(a, b) * space.d(c, d))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModulusKind {
    QuasisymmetryEta,
    QuasimobiusTheta,
}

/// Least monotone modulus consistent with a sample of `(t, image ratio)` records.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulusEnvelope {
    pub kind: ModulusKind,
    /// `(t, value)`: one knot per nonempty bin at the bin's largest sampled `t`,
    /// value the running maximum of image ratios.
    pub knots: Vec<(f64, f64)>,
    pub samples: usize,
    /// Configurations skipped because two points coincide.
    pub skipped: usize,
}

impl ModulusEnvelope {
    pub fn from_records(kind: ModulusKind, records: &[(f64, f64)], skipped: usize) -> Self {
        let mut bins: std::collections::BTreeMap<i64, (f64, f64)> = Default::default();
        for &(t, s) in records {
            let b = (BINS_PER_DECADE * t.log10()).floor() as i64;
            let e = bins.entry(b).or_insert((t, s));
            e.0 = e.0.max(t);
            e.1 = e.1.max(s);
        }
        let mut running = f64::NEG_INFINITY;
        let knots = bins
            .values()
            .map(|&(t, s)| {
                running = running.max(s);
                (t, running)
            })
            .collect();
        Self {
            kind,
            knots,
            samples: records.len(),
            skipped,
        }
    }

    /// Value at `t`: first knot at or beyond `t`; `None` past the sampled range.
    pub fn eval(&self, t: f64) -> Option<f64> {
        let i = self.knots.partition_point(|k| k.0 < t);
        self.knots.get(i).map(|k| k.1)
    }

    /// Records that exceed the envelope (empty for a sound envelope).
    pub fn violations(&self, records: &[(f64, f64)]) -> Vec<(f64, f64)> {
        records
            .iter()
            .copied()
            .filter(|&(t, s)| self.eval(t).map_or(true, |v| s > v))
            .collect()
    }
}

fn sample_tuples<const K: usize>(n: usize, budget: usize, seed: u64) -> Vec<[usize; K]> {
    let total: f64 = (0..K).map(|i| (n - i) as f64).product();
    if total <= budget as f64 {
        let mut out = Vec::new();
        let mut cur = [0usize; K];
        fn rec<const K: usize>(n: usize, depth: usize, cur: &mut [usize; K], out: &mut Vec<[usize; K]>) {
            if depth == K {
                out.push(*cur);
                return;
            }
            for v in 0..n {
                if cur[..depth].contains(&v) {
                    continue;
                }
                cur[depth] = v;
                rec(n, depth + 1, cur, out);
            }
        }
        rec(n, 0, &mut cur, &mut out);
        out
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..budget)
            .map(|_| {
                let mut t = [0usize; K];
                for i in 0..K {
                    loop {
                        let v = rng.gen_range(0..n);
                        if !t[..i].contains(&v) {
                            t[i] = v;
                            break;
                        }
                    }
                }
                t
            })
            .collect()
    }
}

fn paired_spaces(domain: &[Point], image: &[Point], need: usize) -> Result<()> {
    if domain.len() != image.len() {
        return Err(Error::InvalidParameter(format!(
            "paired samples differ in length: {} vs {}",
            domain.len(),
            image.len()
        )));
    }
    if domain.len() < need {
        return Err(Error::TooFewPoints {
            need,
            got: domain.len(),
        });
    }
    Ok(())
}

/// `(t, image ratio)` records over sampled triples `(x, a, b)`.
pub fn quasisymmetry_records(
    domain: &[Point],
    image: &[Point],
    budget: usize,
    seed: u64,
) -> Result<(Vec<(f64, f64)>, usize)> {
    paired_spaces(domain, image, 3)?;
    let triples = sample_tuples::<3>(domain.len(), budget, seed);
    let out: Vec<Option<(f64, f64)>> = triples
        .par_iter()
        .map(|&[x, a, b]| {
            let t = ratio(domain[x].dist(&domain[a]), domain[x].dist(&domain[b])).ok()?;
            let s = ratio(image[x].dist(&image[a]), image[x].dist(&image[b])).ok()?;
            Some((t, s))
        })
        .collect();
    let skipped = out.iter().filter(|o| o.is_none()).count();
    Ok((out.into_iter().flatten().collect(), skipped))
}

/// Empirical `η` of a paired sample.
pub fn quasisymmetry_modulus(
    domain: &[Point],
    image: &[Point],
    budget: usize,
    seed: u64,
) -> Result<ModulusEnvelope> {
    let (rec, skipped) = quasisymmetry_records(domain, image, budget, seed)?;
    Ok(ModulusEnvelope::from_records(ModulusKind::QuasisymmetryEta, &rec, skipped))
}

/// `(cross ratio, image cross ratio)` records over sampled quadruples.
pub fn quasimobius_records(
    domain: &[Point],
    image: &[Point],
    budget: usize,
    seed: u64,
) -> Result<(Vec<(f64, f64)>, usize)> {
    paired_spaces(domain, image, 4)?;
    let quads = sample_tuples::<4>(domain.len(), budget, seed);
    let out: Vec<Option<(f64, f64)>> = quads
        .par_iter()
        .map(|&[a, b, c, d]| {
            let t = cross_ratio(&domain[a], &domain[b], &domain[c], &domain[d]).ok()?;
            let s = cross_ratio(&image[a], &image[b], &image[c], &image[d]).ok()?;
            Some((t, s))
        })
        .collect();
    let skipped = out.iter().filter(|o| o.is_none()).count();
    Ok((out.into_iter().flatten().collect(), skipped))
}

/// Empirical `θ` of a paired sample.
pub fn quasimobius_modulus(
    domain: &[Point],
    image: &[Point],
    budget: usize,
    seed: u64,
) -> Result<ModulusEnvelope> {
    let (rec, skipped) = quasimobius_records(domain, image, budget, seed)?;
    Ok(ModulusEnvelope::from_records(ModulusKind::QuasimobiusTheta, &rec, skipped))
}

/// Smallest `λ` with every pair of the triple in `X` at least `diam X / λ`
/// apart and every pair of the image triple at least `diam Y / λ` apart.
pub fn three_point_condition(
    x: &BoundarySet,
    y: &BoundarySet,
    triple_x: [usize; 3],
    triple_y: [usize; 3],
) -> Result<f64> {
    let lam = |set: &BoundarySet, t: [usize; 3]| -> Result<f64> {
        let diam = set.diameter()?;
        let s = set.space();
        let gap = [(0, 1), (0, 2), (1, 2)]
            .iter()
            .map(|&(i, j)| s.d(t[i], t[j]))
            .fold(f64::INFINITY, f64::min);
        if gap == 0.0 {
            return Err(Error::CoincidentPoints);
        }
        Ok(diam / gap)
    };
    for (set, triple) in [(x, &triple_x), (y, &triple_y)] {
        if let Some(t) = triple.iter().find(|&&t| t >= set.len()) {
            return Err(Error::UnknownLabel(t.to_string()));
        }
    }
    Ok(lam(x, triple_x)?.max(lam(y, triple_y)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn circle(n: usize) -> Vec<Point> {
        (0..n)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / n as f64;
                Point::xy(t.cos(), t.sin())
            })
            .collect()
    }

    #[test]
    fn cross_ratio_examples() {
        let p = |x: f64| Point::xy(x, 0.0);
        assert_eq!(cross_ratio(&p(0.0), &p(1.0), &p(2.0), &p(3.0)).unwrap(), 4.0);
        let sq = [
            Point::xy(0.0, 0.0),
            Point::xy(1.0, 0.0),
            Point::xy(1.0, 1.0),
            Point::xy(0.0, 1.0),
        ];
        assert!((cross_ratio(&sq[0], &sq[1], &sq[2], &sq[3]).unwrap() - 2.0).abs() < 1e-15);
        assert!(matches!(
            cross_ratio(&p(0.0), &p(0.0), &p(2.0), &p(3.0)),
            Err(Error::CoincidentPoints)
        ));
    }

    #[test]
    fn two_point_set_fails_at_half() {
        let b = BoundarySet::from_points(vec![Point::xy(0.0, 0.0), Point::xy(1.0, 0.0)]).unwrap();
        let r = uniform_perfectness_constant(&b, None, 1e6).unwrap();
        assert_eq!(r.verdict, PerfectnessVerdict::NotUpTo(1e6));
        let w = r.witness.unwrap();
        assert_eq!((w.radius, w.c), (0.5, f64::INFINITY));
    }

    #[test]
    fn dense_circle_is_perfect() {
        let n = 1024;
        let b = BoundarySet::from_points(circle(n))
            .unwrap()
            .with_extent(Extent::Bounded(2.0))
            .with_resolution(2.0 * PI / n as f64);
        let r = uniform_perfectness_constant(&b, None, 1e6).unwrap();
        assert!(r.constant().unwrap() <= 1.1, "{:?}", r.verdict);
    }

    #[test]
    fn identity_envelope_is_diagonal() {
        let pts = circle(12);
        let env = quasisymmetry_modulus(&pts, &pts, 100_000, 0).unwrap();
        assert!(env.knots.iter().all(|(t, v)| t == v));
        let env = quasimobius_modulus(&pts, &pts, 100_000, 0).unwrap();
        assert!(env.knots.iter().all(|(t, v)| t == v));
    }

    #[test]
    fn equilateral_three_point() {
        let tri = circle(3);
        let x = BoundarySet::from_points(tri).unwrap().with_extent(Extent::Bounded(2.0));
        let l = three_point_condition(&x, &x, [0, 1, 2], [0, 1, 2]).unwrap();
        assert!((l - 2.0 / 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn coincident_triple_is_rejected() {
        let pts = vec![Point::xy(1.0, 0.0), Point::xy(1.0, 0.0), Point::xy(-1.0, 0.0)];
        let x = BoundarySet::from_points(pts).unwrap();
        assert!(matches!(
            three_point_condition(&x, &x, [0, 1, 2], [0, 1, 2]),
            Err(Error::CoincidentPoints)
        ));
    }
}
