//! Experiment configuration blocks.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BBox, Domain, DomainKind, Point};
use crate::graph::ResolutionSpec;
use crate::qcmaps::{MapKind, SelfMap};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremTag {
    Thm1,
    Thm2,
    Cor1,
    Cor2,
    Cor3,
    RemarkRotation,
    RemarkPuncture,
    #[serde(rename = "lemma212_suite")]
    Lemma212Suite,
}

impl TheoremTag {
    /// Metrics the experiment computes.
    pub fn required_metrics(self) -> &'static [MetricTag] {
        use MetricTag::*;
        match self {
            TheoremTag::RemarkPuncture => &[J],
            TheoremTag::RemarkRotation | TheoremTag::Thm1 | TheoremTag::Cor1 => &[J, K],
            TheoremTag::Thm2 | TheoremTag::Cor2 => &[J, K, DEps],
            TheoremTag::Cor3 => &[J, K, DI],
            TheoremTag::Lemma212Suite => &[J, K, DEps],
        }
    }

    fn needs_map(self) -> bool {
        matches!(
            self,
            TheoremTag::Thm1 | TheoremTag::Thm2 | TheoremTag::Cor1 | TheoremTag::Cor2 | TheoremTag::Cor3
        )
    }

    fn is_canned(self) -> bool {
        matches!(self, TheoremTag::RemarkRotation | TheoremTag::RemarkPuncture)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricTag {
    J,
    K,
    #[serde(rename = "d_i")]
    DI,
    #[serde(rename = "d_eps")]
    DEps,
}

fn one() -> f64 {
    1.0
}

fn two() -> usize {
    2
}

/// Domain families available to configs. Centers default to the origin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    Ball {
        #[serde(default)]
        center: Option<Vec<f64>>,
        #[serde(default = "one")]
        radius: f64,
        #[serde(default = "two")]
        dim: usize,
    },
    PuncturedBall {
        #[serde(default)]
        center: Option<Vec<f64>>,
        #[serde(default = "one")]
        radius: f64,
        #[serde(default = "two")]
        dim: usize,
    },
    Annulus {
        #[serde(default)]
        center: Option<Vec<f64>>,
        inner: f64,
        outer: f64,
        #[serde(default = "two")]
        dim: usize,
    },
    /// `{x : normal·x > offset}`; the normal defaults to the last axis.
    HalfSpace {
        #[serde(default)]
        normal: Option<Vec<f64>>,
        #[serde(default)]
        offset: f64,
        #[serde(default = "two")]
        dim: usize,
    },
    PuncturedSpace {
        #[serde(default)]
        center: Option<Vec<f64>>,
        #[serde(default = "two")]
        dim: usize,
    },
    /// `R^3` minus a line; defaults to the `z` axis.
    AxisLineComplement {
        #[serde(default)]
        point: Option<Vec<f64>>,
        #[serde(default)]
        direction: Option<Vec<f64>>,
    },
}

fn point_or_origin(c: &Option<Vec<f64>>, dim: usize) -> Result<Point> {
    match c {
        Some(v) => {
            let p = Point::new(v.clone())?;
            p.check_dim(dim)?;
            Ok(p)
        }
        None => Ok(Point::origin(dim)),
    }
}

fn unit_vector(v: &[f64]) -> Result<Point> {
    let p = Point::new(v.to_vec())?;
    let n = p.norm();
    if !(n > 0.0) {
        return Err(Error::InvalidParameter("direction must be nonzero".into()));
    }
    Ok(p.scale(1.0 / n))
}

impl DomainSpec {
    pub fn kind(&self) -> Result<DomainKind> {
        Ok(match self {
            DomainSpec::Ball {
                center,
                radius,
                dim,
            } => DomainKind::Ball {
                center: point_or_origin(center, *dim)?,
                radius: *radius,
            },
            DomainSpec::PuncturedBall {
                center,
                radius,
                dim,
            } => DomainKind::PuncturedBall {
                center: point_or_origin(center, *dim)?,
                radius: *radius,
            },
            DomainSpec::Annulus {
                center,
                inner,
                outer,
                dim,
            } => DomainKind::Annulus {
                center: point_or_origin(center, *dim)?,
                inner: *inner,
                outer: *outer,
            },
            DomainSpec::HalfSpace {
                normal,
                offset,
                dim,
            } => {
                let normal = match normal {
                    Some(v) => {
                        let p = unit_vector(v)?;
                        p.check_dim(*dim)?;
                        p
                    }
                    None => Point::unit(*dim, dim - 1),
                };
                DomainKind::HalfSpace {
                    normal,
                    offset: *offset,
                }
            }
            DomainSpec::PuncturedSpace { center, dim } => DomainKind::PuncturedSpace {
                center: point_or_origin(center, *dim)?,
            },
            DomainSpec::AxisLineComplement { point, direction } => DomainKind::AxisLineComplement {
                point: point_or_origin(point, 3)?,
                direction: match direction {
                    Some(v) => unit_vector(v)?,
                    None => Point::unit(3, 2),
                },
            },
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            DomainSpec::Ball { dim, .. }
            | DomainSpec::PuncturedBall { dim, .. }
            | DomainSpec::Annulus { dim, .. }
            | DomainSpec::HalfSpace { dim, .. }
            | DomainSpec::PuncturedSpace { dim, .. } => *dim,
            DomainSpec::AxisLineComplement { .. } => 3,
        }
    }
}

/// Explicit sampling box `[min, max]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

/// How interior sample points are drawn.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplePolicy {
    /// Points per sample (`N`; stability runs also use `2N`).
    pub count: usize,
    pub seed: u64,
    /// Points closer than this to `∂D` are excluded. Defaults to
    /// `max(5·d_min_clip, finest graph cell / spacing ratio)`.
    pub exclusion: Option<f64>,
}

impl Default for SamplePolicy {
    fn default() -> Self {
        Self {
            count: 100,
            seed: 0,
            exclusion: None,
        }
    }
}

/// Graph resolution of an experiment; unset fields follow `h`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResolutionConfig {
    pub h: f64,
    pub spacing_ratio: f64,
    pub min_spacing: Option<f64>,
}

impl Default for ResolutionConfig {
    fn default() -> Self {
        Self {
            h: 0.1,
            spacing_ratio: 0.4,
            min_spacing: None,
        }
    }
}

impl ResolutionConfig {
    pub fn spec(&self) -> ResolutionSpec {
        let mut r = ResolutionSpec::new(self.h);
        r.spacing_ratio = self.spacing_ratio;
        if let Some(s) = self.min_spacing {
            r.min_spacing = s;
        }
        r
    }
}

/// Tolerances every verdict refers to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative solver accuracy; also the slack unit of cross-metric checks.
    pub tau_metric: f64,
    /// Closed-form agreement.
    pub exactness: f64,
    /// Allowed relative drift of a supremum under sample doubling or `h → h/2`.
    pub drift: f64,
    /// Fraction of points that must lie under the `ψ` envelope.
    pub psi_coverage: f64,
    /// Perfectness constants above this count as failure.
    pub c_max: f64,
    /// Relative slack of the diameter bound `2/ε`.
    pub diameter_slack: f64,
    /// Absolute slack of the visual-metric sandwich.
    pub sandwich: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tau_metric: 0.01,
            exactness: 1e-9,
            drift: 0.10,
            psi_coverage: 0.99,
            c_max: 1e6,
            diameter_slack: 0.05,
            sandwich: 1e-9,
        }
    }
}

fn default_eps() -> Vec<f64> {
    vec![0.5]
}

/// One experiment block of a run configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    pub theorem: TheoremTag,
    #[serde(default)]
    pub domain: Option<DomainSpec>,
    #[serde(default)]
    pub bbox: Option<BoxSpec>,
    #[serde(default)]
    pub map: Option<MapKind>,
    /// Declared dilatation bound of the map; defaults to its closed form.
    #[serde(default)]
    pub declared_k: Option<f64>,
    #[serde(default)]
    pub sample: SamplePolicy,
    #[serde(default)]
    pub resolution: ResolutionConfig,
    /// Metrics to compute; empty means the theorem's required set.
    #[serde(default)]
    pub metrics: Vec<MetricTag>,
    #[serde(default = "default_eps")]
    pub epsilon: Vec<f64>,
    /// Base point `w`; defaults per domain family.
    #[serde(default)]
    pub basepoint: Option<Vec<f64>>,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Largest `m` of the puncture family.
    #[serde(default)]
    pub m_max: Option<usize>,
    /// N/A-HYPOTHESIS is the intended outcome.
    #[serde(default)]
    pub expect_na: bool,
}

impl ExperimentSpec {
    /// A spec with defaults for everything but the tag.
    pub fn new(name: &str, theorem: TheoremTag) -> Self {
        Self {
            name: name.to_string(),
            theorem,
            domain: None,
            bbox: None,
            map: None,
            declared_k: None,
            sample: SamplePolicy::default(),
            resolution: ResolutionConfig::default(),
            metrics: Vec::new(),
            epsilon: default_eps(),
            basepoint: None,
            tolerances: Tolerances::default(),
            m_max: None,
            expect_na: false,
        }
    }

    pub fn with_domain(mut self, d: DomainSpec) -> Self {
        self.domain = Some(d);
        self
    }

    pub fn with_map(mut self, m: MapKind) -> Self {
        self.map = Some(m);
        self
    }

    pub fn build_domain(&self) -> Result<Arc<Domain>> {
        let d = self
            .domain
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter("experiment has no domain".into()))?;
        let kind = d.kind()?;
        let dom = match &self.bbox {
            Some(b) => Domain::with_bbox(kind, BBox::new(b.min.clone(), b.max.clone())?)?,
            None => Domain::new(kind)?,
        };
        Ok(Arc::new(dom))
    }

    pub fn self_map(&self) -> SelfMap {
        let mut m = SelfMap::new(self.map.clone().unwrap_or(MapKind::Identity));
        if self.declared_k.is_some() {
            m.declared_k = self.declared_k;
        }
        m
    }

    /// Every problem with the block as `(field path, reason)`; empty when valid.
    pub fn validate(&self) -> Vec<(String, String)> {
        let mut errs = Vec::new();
        let mut err = |path: &str, why: String| errs.push((path.to_string(), why));
        if self.name.trim().is_empty() {
            err("name", "must not be empty".into());
        }
        let t = &self.tolerances;
        for (f, v) in [
            ("tau_metric", t.tau_metric),
            ("exactness", t.exactness),
            ("drift", t.drift),
            ("diameter_slack", t.diameter_slack),
            ("sandwich", t.sandwich),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                err(&format!("tolerances.{f}"), "must be finite and nonnegative".into());
            }
        }
        if !(t.psi_coverage > 0.0 && t.psi_coverage <= 1.0) {
            err("tolerances.psi_coverage", "must lie in (0, 1]".into());
        }
        if !(t.c_max > 1.0) || !t.c_max.is_finite() {
            err("tolerances.c_max", "must be finite and greater than 1".into());
        }
        for (i, e) in self.epsilon.iter().enumerate() {
            if !(*e > 0.0) || !e.is_finite() {
                err(&format!("epsilon[{i}]"), format!("must be positive, got {e}"));
            }
        }
        if self.epsilon.is_empty() {
            err("epsilon", "needs at least one value".into());
        }
        if self.sample.count < 10 {
            err("sample.count", "must be at least 10".into());
        }
        if let Some(x) = self.sample.exclusion {
            if !(x > 0.0) || !x.is_finite() {
                err("sample.exclusion", "must be positive".into());
            }
        }
        let r = &self.resolution;
        if !(r.h > 0.0) || !r.h.is_finite() {
            err("resolution.h", "must be positive".into());
        }
        if !(r.spacing_ratio > 0.0 && r.spacing_ratio < 1.0) {
            err("resolution.spacing_ratio", "must lie in (0, 1)".into());
        }
        if let Some(s) = r.min_spacing {
            if !(s > 0.0 && s <= r.h) {
                err("resolution.min_spacing", "must lie in (0, h]".into());
            }
        }
        if let Some(k) = self.declared_k {
            if !(k >= 1.0) || !k.is_finite() {
                err("declared_k", "must be finite and at least 1".into());
            }
        }
        let required = self.theorem.required_metrics();
        if !self.metrics.is_empty() {
            for m in required {
                if !self.metrics.contains(m) {
                    err("metrics", format!("{:?} is required by this theorem", m).to_lowercase());
                }
            }
        }
        if self.theorem == TheoremTag::RemarkPuncture {
            if let Some(m) = self.m_max {
                if m < 10 {
                    err("m_max", format!("must be at least 10, got {m}"));
                }
            }
        }
        if self.theorem.is_canned() {
            if self.domain.is_some() || self.map.is_some() {
                err("domain", "remark cases fix their own domain and map".into());
            }
            return errs;
        }
        let Some(d) = &self.domain else {
            err("domain", "is required for this theorem".into());
            return errs;
        };
        let dom = match self.build_domain() {
            Ok(d) => d,
            Err(e) => {
                err("domain", e.to_string());
                return errs;
            }
        };
        if let Some(w) = &self.basepoint {
            match Point::new(w.clone()) {
                Ok(p) if p.dim() == d.dim() && dom.contains(&p) => {}
                _ => err("basepoint", "must be a point of the domain".into()),
            }
        }
        match (&self.map, self.theorem.needs_map()) {
            (None, true) => err("map", "is required for this theorem".into()),
            (Some(m), _) => {
                if let Err(e) = m.validate(d.dim()) {
                    err("map", e.to_string());
                } else if let Err(e) = SelfMap::new(m.clone()).check_compatible(&dom, 64, self.sample.seed) {
                    err("map", format!("not a self-map of the domain: {e}"));
                }
            }
            _ => {}
        }
        errs
    }

    /// Validation as a single error.
    pub fn check(&self) -> Result<()> {
        let errs = self.validate();
        if errs.is_empty() {
            return Ok(());
        }
        let msg: Vec<String> = errs.into_iter().map(|(p, w)| format!("{p}: {w}")).collect();
        Err(Error::InvalidParameter(msg.join("; ")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_validates() {
        let s: ExperimentSpec = serde_json::from_str(
            r#"{"name":"a","theorem":"thm1","domain":{"kind":"annulus","inner":0.5,"outer":1.0},
                "map":{"kind":"annulus_twist","beta":0.5,"inner":0.5,"outer":1.0}}"#,
        )
        .unwrap();
        assert!(s.validate().is_empty(), "{:?}", s.validate());
        assert_eq!(s.epsilon, vec![0.5]);
    }

    #[test]
    fn reports_field_paths() {
        let mut s = ExperimentSpec::new("", TheoremTag::Thm2)
            .with_domain(DomainSpec::Ball {
                center: None,
                radius: 1.0,
                dim: 2,
            })
            .with_map(MapKind::Affine {
                matrix: vec![vec![1.0, 0.5], vec![0.0, 1.0]],
                shift: vec![0.0, 0.0],
            });
        s.epsilon = vec![0.0];
        let paths: Vec<String> = s.validate().into_iter().map(|e| e.0).collect();
        assert_eq!(paths, ["name", "epsilon[0]", "map"]);
    }

    #[test]
    fn rejects_unknown_kind() {
        let e = serde_json::from_str::<ExperimentSpec>(
            r#"{"name":"a","theorem":"thm1","map":{"kind":"rotatoin","angle":1.0}}"#,
        )
        .unwrap_err();
        assert!(e.to_string().contains("rotatoin"));
    }
}
