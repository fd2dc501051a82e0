//! Detectors and the final reject/accept decision.

use std::fmt;
use std::str::FromStr;

use crate::baselines::ScoreSpec;
use crate::calibrate::CriticalRecord;
use crate::error::{invalid, Error, Result};
use crate::gof::{clamp_p, to_pvalues, GofTest};
use crate::schemes::{NullLaw, PivotSeq, SchemeSpec};

/// Either a goodness-of-fit test or a sum-based baseline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Detector {
    Gof(GofTest),
    Sum(ScoreSpec),
}

impl Detector {
    /// The eight GoF tests followed by the baselines available for `scheme`.
    pub fn all_for(scheme: SchemeSpec) -> Vec<Detector> {
        GofTest::all()
            .into_iter()
            .map(Detector::Gof)
            .chain(ScoreSpec::all_for(scheme).into_iter().map(Detector::Sum))
            .collect()
    }

    pub fn name(&self) -> &'static str {
        match self {
            Detector::Gof(t) => t.name(),
            Detector::Sum(s) => s.name(),
        }
    }

    pub fn params(&self) -> String {
        match self {
            Detector::Gof(t) => t.params(),
            Detector::Sum(s) => s.params(),
        }
    }

    pub fn is_gof(&self) -> bool {
        matches!(self, Detector::Gof(_))
    }

    pub fn supports(&self, scheme: SchemeSpec) -> Result<()> {
        match self {
            Detector::Gof(t) => t.validate(),
            Detector::Sum(s) => {
                s.validate()?;
                s.supports(scheme)
            }
        }
    }

    /// Oriented statistic: larger means more evidence of a watermark.
    pub fn statistic(&self, pivots: &PivotSeq) -> Result<f64> {
        self.supports(pivots.scheme())?;
        match self {
            Detector::Gof(t) => Ok(t.evaluate(&to_pvalues(pivots, pivots.scheme())?)?.value),
            Detector::Sum(s) => crate::baselines::sum_statistic(pivots, *s),
        }
    }
}

impl fmt::Display for Detector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Detector::Gof(t) => t.fmt(f),
            Detector::Sum(s) => s.fmt(f),
        }
    }
}

impl FromStr for Detector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.parse::<GofTest>() {
            Ok(t) => Ok(Detector::Gof(t)),
            Err(gof_err) => s.parse::<ScoreSpec>().map(Detector::Sum).map_err(|_| gof_err),
        }
    }
}

/// Evaluates several detectors on one pivot vector, sharing the p-value sort.
#[derive(Debug, Clone)]
pub struct Evaluator {
    law: NullLaw,
    detectors: Vec<Detector>,
    p: Vec<f64>,
}

impl Evaluator {
    pub fn new(scheme: SchemeSpec, detectors: &[Detector]) -> Result<Self> {
        for d in detectors {
            d.supports(scheme)?;
        }
        Ok(Self { law: NullLaw::new(scheme), detectors: detectors.to_vec(), p: Vec::new() })
    }

    pub fn detectors(&self) -> &[Detector] {
        &self.detectors
    }

    /// One oriented statistic per detector, in order.
    pub fn evaluate(&mut self, ys: &[f64], out: &mut Vec<f64>) -> Result<()> {
        if ys.is_empty() {
            return invalid("need at least one pivot");
        }
        out.clear();
        if self.detectors.iter().any(Detector::is_gof) {
            self.p.clear();
            self.p.extend(ys.iter().map(|&y| clamp_p(self.law.pvalue(y))));
            self.p.sort_unstable_by(f64::total_cmp);
        }
        for d in &self.detectors {
            out.push(match d {
                Detector::Gof(t) => t.on_sorted(&self.p)?,
                Detector::Sum(s) => s.oriented_sum(ys.iter().copied()),
            });
        }
        Ok(())
    }
}

/// Outcome of one detection.
#[derive(Debug, Clone, PartialEq)]
pub struct TestVerdict {
    pub detector: Detector,
    pub statistic: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub n: usize,
    pub reject: bool,
}

/// Reject `H₀` iff the statistic strictly exceeds the calibrated critical value.
pub fn detect(pivots: &PivotSeq, detector: Detector, critical: &CriticalRecord) -> Result<TestVerdict> {
    if critical.n != pivots.len() {
        return invalid(format!(
            "critical value calibrated for n = {}, text has {} pivots",
            critical.n,
            pivots.len()
        ));
    }
    if critical.scheme != pivots.scheme() {
        return invalid(format!(
            "critical value calibrated for {}, pivots come from {}",
            critical.scheme,
            pivots.scheme()
        ));
    }
    if critical.detector != detector {
        return invalid(format!("critical value belongs to {}, not {detector}", critical.detector));
    }
    let statistic = detector.statistic(pivots)?;
    Ok(verdict(detector, statistic, critical.gamma, critical.alpha, pivots.len()))
}

pub(crate) fn verdict(detector: Detector, statistic: f64, gamma: f64, alpha: f64, n: usize) -> TestVerdict {
    TestVerdict { detector, statistic, gamma, alpha, n, reject: statistic > gamma }
}
