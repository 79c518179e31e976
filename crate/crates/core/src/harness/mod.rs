//! Experiments with replayable verdicts.
//!
//! A run produces per-point [`PointRecord`]s grouped in named series. Every
//! assertion is a [`Check`] over those records, so a stored report can be
//! re-judged without recomputing any geometry.

mod experiments;
mod spec;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use experiments::{
    canned_suite, default_basepoint, run_experiment, run_lemma212_suite, run_puncture_divergence_case,
    run_rotation_case,
};
pub use spec::{BoxSpec, DomainSpec, ExperimentSpec, MetricTag, ResolutionConfig, SamplePolicy, TheoremTag, Tolerances};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// CSV header of the per-point export.
pub const CSV_HEADER: &str = "experiment,series,index,x,fx,j,k,aux";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
    #[serde(rename = "N/A-HYPOTHESIS")]
    NaHypothesis,
    #[serde(rename = "DIAGNOSTIC-ONLY")]
    DiagnosticOnly,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::NaHypothesis => "N/A-HYPOTHESIS",
            Verdict::DiagnosticOnly => "DIAGNOSTIC-ONLY",
        })
    }
}

/// How an assertion's outcome turns into a verdict.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    /// A theorem hypothesis; failing it gates every conclusion.
    Hypothesis,
    /// A theorem conclusion.
    Conclusion,
    /// A solver consistency check, judged regardless of hypotheses.
    Sanity,
    /// A diagnostic with no machine-checkable claim.
    Diagnostic,
}

/// Record column a check reads.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    J,
    K,
    Aux,
}

/// One row of the per-point export. Column meaning depends on the series and
/// is documented with each experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub series: String,
    pub index: usize,
    pub x: Vec<f64>,
    pub fx: Vec<f64>,
    pub j: Option<f64>,
    pub k: Option<f64>,
    pub aux: Option<f64>,
}

impl PointRecord {
    pub fn new(series: &str, index: usize) -> Self {
        Self {
            series: series.to_string(),
            index,
            x: Vec::new(),
            fx: Vec::new(),
            j: None,
            k: None,
            aux: None,
        }
    }

    pub fn at(mut self, x: &[f64], fx: &[f64]) -> Self {
        self.x = x.to_vec();
        self.fx = fx.to_vec();
        self
    }

    pub fn j(mut self, v: f64) -> Self {
        self.j = finite(v);
        self
    }

    pub fn k(mut self, v: f64) -> Self {
        self.k = finite(v);
        self
    }

    pub fn aux(mut self, v: f64) -> Self {
        self.aux = finite(v);
        self
    }

    pub fn get(&self, f: Field) -> Option<f64> {
        match f {
            Field::J => self.j,
            Field::K => self.k,
            Field::Aux => self.aux,
        }
    }
}

/// Non-finite values are stored as missing; checks treat missing as failure.
fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

/// A statement over stored records.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Check {
    /// `|a − b| ≤ tol` on every record.
    MaxAbsDiff {
        series: String,
        a: Field,
        b: Field,
        tol: f64,
    },
    /// `field` strictly increases with the record order.
    StrictlyIncreasing { series: String, field: Field },
    /// `field` at record `index` exceeds `bound`.
    ValueAbove {
        series: String,
        index: usize,
        field: Field,
        bound: f64,
    },
    /// Every record has `field ≤ bound` (`<` when `strict`).
    AllAtMost {
        series: String,
        field: Field,
        bound: f64,
        strict: bool,
    },
    /// Every record has `a ≤ scale·b + offset`.
    AllDominated {
        series: String,
        a: Field,
        b: Field,
        scale: f64,
        offset: f64,
    },
    /// At least `fraction` of the records have `a ≤ scale·b + offset`; records
    /// with `b` missing count as failures.
    FractionDominated {
        series: String,
        a: Field,
        b: Field,
        scale: f64,
        offset: f64,
        fraction: f64,
    },
    /// Every record has `field` present, finite and `> 0` when `positive`.
    AllFinite {
        series: String,
        field: Field,
        positive: bool,
    },
    /// `|sup a − sup b| ≤ tol·max(sup a, sup b)` for `field` over two series.
    SupDrift {
        a: String,
        b: String,
        field: Field,
        tol: f64,
    },
    /// `max aux over pairs ≤ 2·sup k over points + slack·max(j, k over pairs)`.
    DefectBound {
        pairs: String,
        points: String,
        slack: f64,
    },
    /// `max aux ≤ scale · max(j, k)` over the series.
    RelativeDefect { series: String, scale: f64 },
    /// `chain ∈ [ρ/2 − tol, ρ + tol]` with `ρ` in `j` and `chain` in `k`.
    Sandwich { series: String, tol: f64 },
    /// No machine-checkable content.
    None,
}

fn in_series<'a>(records: &'a [PointRecord], s: &'a str) -> impl Iterator<Item = &'a PointRecord> + 'a {
    records.iter().filter(move |r| r.series == s)
}

impl Check {
    /// Evaluates the check: `(holds, measured statistic)`.
    pub fn evaluate(&self, records: &[PointRecord]) -> (bool, f64) {
        let col = |s: &str, f: Field| -> Vec<Option<f64>> { in_series(records, s).map(|r| r.get(f)).collect() };
        let sup = |s: &str, f: Field| col(s, f).into_iter().flatten().fold(0.0f64, f64::max);
        match self {
            Check::MaxAbsDiff { series, a, b, tol } => {
                let mut worst = 0.0f64;
                let mut ok = in_series(records, series).count() > 0;
                for r in in_series(records, series) {
                    match (r.get(*a), r.get(*b)) {
                        (Some(x), Some(y)) => worst = worst.max((x - y).abs()),
                        _ => ok = false,
                    }
                }
                (ok && worst <= *tol, worst)
            }
            Check::StrictlyIncreasing { series, field } => {
                let v = col(series, *field);
                let ok = v.iter().all(Option::is_some)
                    && v.windows(2).all(|w| w[0].unwrap() < w[1].unwrap());
                let min_step = v
                    .windows(2)
                    .filter_map(|w| Some(w[1]? - w[0]?))
                    .fold(f64::INFINITY, f64::min);
                (ok, if min_step.is_finite() { min_step } else { 0.0 })
            }
            Check::ValueAbove {
                series,
                index,
                field,
                bound,
            } => match in_series(records, series).find(|r| r.index == *index).and_then(|r| r.get(*field)) {
                Some(v) => (v > *bound, v),
                None => (false, f64::NAN),
            },
            Check::AllAtMost {
                series,
                field,
                bound,
                strict,
            } => {
                let v = col(series, *field);
                let ok = !v.is_empty()
                    && v.iter().all(|x| match x {
                        Some(x) if *strict => x < bound,
                        Some(x) => x <= bound,
                        None => false,
                    });
                (ok, sup(series, *field))
            }
            Check::AllDominated {
                series,
                a,
                b,
                scale,
                offset,
            } => {
                let mut worst = f64::NEG_INFINITY;
                let mut ok = in_series(records, series).count() > 0;
                for r in in_series(records, series) {
                    match (r.get(*a), r.get(*b)) {
                        (Some(x), Some(y)) => worst = worst.max(x - (scale * y + offset)),
                        _ => ok = false,
                    }
                }
                (ok && worst <= 0.0, worst.max(f64::MIN))
            }
            Check::FractionDominated {
                series,
                a,
                b,
                scale,
                offset,
                fraction,
            } => {
                let n = in_series(records, series).count();
                let good = in_series(records, series)
                    .filter(|r| match (r.get(*a), r.get(*b)) {
                        (Some(x), Some(y)) => x <= scale * y + offset,
                        _ => false,
                    })
                    .count();
                let f = if n == 0 { 0.0 } else { good as f64 / n as f64 };
                (n > 0 && f >= *fraction, f)
            }
            Check::AllFinite {
                series,
                field,
                positive,
            } => {
                let v = col(series, *field);
                let ok = !v.is_empty()
                    && v.iter().all(|x| matches!(x, Some(x) if !*positive || *x > 0.0));
                (ok, sup(series, *field))
            }
            Check::SupDrift { a, b, field, tol } => {
                let (sa, sb) = (sup(a, *field), sup(b, *field));
                let present = in_series(records, a).count() > 0 && in_series(records, b).count() > 0;
                let scale = sa.max(sb);
                let drift = if scale > 0.0 { (sa - sb).abs() / scale } else { 0.0 };
                (present && drift <= *tol, drift)
            }
            Check::DefectBound {
                pairs,
                points,
                slack,
            } => {
                let defect = sup(pairs, Field::Aux);
                let max_k = sup(pairs, Field::J).max(sup(pairs, Field::K));
                let bound = 2.0 * sup(points, Field::K) + slack * max_k;
                let present = in_series(records, pairs).count() > 0 && in_series(records, points).count() > 0;
                (present && defect <= bound, defect)
            }
            Check::RelativeDefect { series, scale } => {
                let defect = sup(series, Field::Aux);
                let max_k = sup(series, Field::J).max(sup(series, Field::K));
                let complete = in_series(records, series).count() > 0 && in_series(records, series).all(|r| r.aux.is_some());
                (complete && defect <= scale * max_k, defect)
            }
            Check::Sandwich { series, tol } => {
                let mut worst = f64::NEG_INFINITY;
                let mut ok = in_series(records, series).count() > 0;
                for r in in_series(records, series) {
                    match (r.j, r.k) {
                        (Some(rho), Some(chain)) => {
                            worst = worst.max(0.5 * rho - chain).max(chain - rho);
                        }
                        _ => ok = false,
                    }
                }
                (ok && worst <= *tol, worst.max(f64::MIN))
            }
            Check::None => (true, 0.0),
        }
    }
}

/// One claim of a report with its verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub id: String,
    pub description: String,
    pub role: Role,
    pub check: Check,
    pub holds: bool,
    pub measured: f64,
    pub verdict: Verdict,
}

/// A summary statistic with the recipe that recomputes it from records.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub name: String,
    pub series: String,
    pub field: Field,
    pub stat: Stat,
    pub value: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stat {
    Max,
    Min,
    Mean,
    Count,
}

fn compute_stat(records: &[PointRecord], series: &str, field: Field, stat: Stat) -> f64 {
    let v: Vec<f64> = records
        .iter()
        .filter(|r| r.series == series)
        .filter_map(|r| r.get(field))
        .collect();
    match stat {
        Stat::Max => v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        Stat::Min => v.iter().copied().fold(f64::INFINITY, f64::min),
        Stat::Mean => {
            if v.is_empty() {
                0.0
            } else {
                v.iter().sum::<f64>() / v.len() as f64
            }
        }
        Stat::Count => v.len() as f64,
    }
}

/// Seeds, resolutions and graph identities behind a report.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub domain: Option<String>,
    pub map: Option<String>,
    pub seed: u64,
    pub graphs: Vec<String>,
    pub resolutions: Vec<f64>,
    pub exclusion_band: Option<f64>,
    pub tolerances: Tolerances,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub name: String,
    pub theorem: TheoremTag,
    /// N/A-HYPOTHESIS verdicts are the intended outcome of this run.
    pub expect_hypothesis_failure: bool,
    pub records: Vec<PointRecord>,
    pub summary: Vec<Summary>,
    pub assertions: Vec<Assertion>,
    /// Free-form measurements (witnesses, fitted constants, envelopes).
    pub diagnostics: BTreeMap<String, serde_json::Value>,
    pub provenance: Provenance,
}

/// Builder used by the experiment runners.
#[derive(Debug)]
pub(crate) struct ReportBuilder {
    report: ExperimentReport,
    pending: Vec<(String, String, Role, Check)>,
}

impl ReportBuilder {
    pub fn new(name: &str, theorem: TheoremTag, provenance: Provenance) -> Self {
        Self {
            report: ExperimentReport {
                schema_version: REPORT_SCHEMA_VERSION,
                name: name.to_string(),
                theorem,
                expect_hypothesis_failure: false,
                records: Vec::new(),
                summary: Vec::new(),
                assertions: Vec::new(),
                diagnostics: BTreeMap::new(),
                provenance,
            },
            pending: Vec::new(),
        }
    }

    pub fn provenance(&mut self) -> &mut Provenance {
        &mut self.report.provenance
    }

    pub fn records(&mut self, r: impl IntoIterator<Item = PointRecord>) {
        self.report.records.extend(r);
    }

    pub fn diag(&mut self, key: &str, v: impl Serialize) {
        let value = serde_json::to_value(v).unwrap_or(serde_json::Value::Null);
        self.report.diagnostics.insert(key.to_string(), value);
    }

    pub fn summary(&mut self, name: &str, series: &str, field: Field, stat: Stat) {
        self.report.summary.push(Summary {
            name: name.to_string(),
            series: series.to_string(),
            field,
            stat,
            value: 0.0,
        });
    }

    pub fn assert(&mut self, id: &str, description: &str, role: Role, check: Check) {
        self.pending
            .push((id.to_string(), description.to_string(), role, check));
    }

    pub fn finish(mut self) -> ExperimentReport {
        for s in &mut self.report.summary {
            s.value = compute_stat(&self.report.records, &s.series, s.field, s.stat);
        }
        self.report.assertions = judge(&self.report.records, self.pending);
        self.report
    }
}

fn judge(records: &[PointRecord], pending: Vec<(String, String, Role, Check)>) -> Vec<Assertion> {
    let evaluated: Vec<(String, String, Role, Check, bool, f64)> = pending
        .into_iter()
        .map(|(id, d, role, check)| {
            let (holds, measured) = check.evaluate(records);
            (id, d, role, check, holds, measured)
        })
        .collect();
    let gated = evaluated
        .iter()
        .any(|e| e.2 == Role::Hypothesis && !e.4);
    evaluated
        .into_iter()
        .map(|(id, description, role, check, holds, measured)| {
            let verdict = match role {
                Role::Hypothesis if holds => Verdict::Pass,
                Role::Hypothesis => Verdict::NaHypothesis,
                Role::Conclusion if gated => Verdict::NaHypothesis,
                Role::Diagnostic => Verdict::DiagnosticOnly,
                _ if holds => Verdict::Pass,
                _ => Verdict::Fail,
            };
            Assertion {
                id,
                description,
                role,
                check,
                holds,
                measured: if measured.is_finite() { measured } else { 0.0 },
                verdict,
            }
        })
        .collect()
}

impl ExperimentReport {
    pub fn verdict_of(&self, id: &str) -> Option<Verdict> {
        self.assertions.iter().find(|a| a.id == id).map(|a| a.verdict)
    }

    pub fn summary_value(&self, name: &str) -> Option<f64> {
        self.summary.iter().find(|s| s.name == name).map(|s| s.value)
    }

    pub fn series(&self, name: &str) -> impl Iterator<Item = &PointRecord> + '_ {
        let name = name.to_string();
        self.records.iter().filter(move |r| r.series == name)
    }

    pub fn has_failure(&self) -> bool {
        self.assertions.iter().any(|a| a.verdict == Verdict::Fail)
    }

    pub fn has_hypothesis_gate(&self) -> bool {
        self.assertions
            .iter()
            .any(|a| a.verdict == Verdict::NaHypothesis)
    }

    /// True when the verdicts are the intended outcome: no FAIL, and
    /// N/A-HYPOTHESIS present exactly when it was expected.
    pub fn outcome_ok(&self) -> bool {
        !self.has_failure() && self.has_hypothesis_gate() == self.expect_hypothesis_failure
    }

    /// Re-derives every summary value and verdict from the stored records.
    /// Returns the list of discrepancies (empty when the report is sound).
    pub fn replay(&self) -> Vec<String> {
        let mut out = Vec::new();
        for s in &self.summary {
            let v = compute_stat(&self.records, &s.series, s.field, s.stat);
            if v.to_bits() != s.value.to_bits() && !(v.is_nan() && s.value.is_nan()) {
                out.push(format!("summary {}: stored {} recomputed {}", s.name, s.value, v));
            }
        }
        let pending = self
            .assertions
            .iter()
            .map(|a| (a.id.clone(), a.description.clone(), a.role, a.check.clone()))
            .collect();
        for (stored, fresh) in self.assertions.iter().zip(judge(&self.records, pending)) {
            if stored.verdict != fresh.verdict || stored.holds != fresh.holds {
                out.push(format!(
                    "assertion {}: stored {} recomputed {}",
                    stored.id, stored.verdict, fresh.verdict
                ));
            }
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let r: Self = serde_json::from_str(s)?;
        if r.schema_version != REPORT_SCHEMA_VERSION {
            return Err(Error::Format(format!(
                "report schema {} is not supported (expected {REPORT_SCHEMA_VERSION})",
                r.schema_version
            )));
        }
        Ok(r)
    }

    /// Per-point records as CSV rows under [`CSV_HEADER`]. Coordinates are
    /// space-separated; missing values are empty cells.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(Vec::new());
        w.write_record(CSV_HEADER.split(','))?;
        let coords = |v: &[f64]| v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ");
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.records {
            w.write_record([
                self.name.clone(),
                r.series.clone(),
                r.index.to_string(),
                coords(&r.x),
                coords(&r.fx),
                opt(r.j),
                opt(r.k),
                opt(r.aux),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
    }
}
