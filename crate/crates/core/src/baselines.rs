//! Sum-based detection rules `T_n = Σ h(Y_t)`.
//!
//! Every rule is oriented so that watermarking raises the thresholded value:
//! pivots of all three schemes are stochastically larger under watermarking,
//! so `Neg` (`h(y) = −y`) is negated before thresholding and reported with
//! [`ScoreSpec::orientation`] = `-1`.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::gof::PVALUE_EPS;
use crate::schemes::{PivotSeq, SchemeKind, SchemeSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScoreKind {
    Ars,
    Log,
    Neg,
    Sum,
    Lst,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreSpec {
    pub kind: ScoreKind,
    /// Only used by `Lst`.
    pub delta: f64,
}

pub const DEFAULT_LST_DELTA: f64 = 0.2;

impl ScoreSpec {
    pub const ARS: ScoreSpec = ScoreSpec { kind: ScoreKind::Ars, delta: DEFAULT_LST_DELTA };
    pub const LOG: ScoreSpec = ScoreSpec { kind: ScoreKind::Log, delta: DEFAULT_LST_DELTA };
    pub const NEG: ScoreSpec = ScoreSpec { kind: ScoreKind::Neg, delta: DEFAULT_LST_DELTA };
    pub const SUM: ScoreSpec = ScoreSpec { kind: ScoreKind::Sum, delta: DEFAULT_LST_DELTA };
    pub const LST: ScoreSpec = ScoreSpec { kind: ScoreKind::Lst, delta: DEFAULT_LST_DELTA };

    pub fn lst(delta: f64) -> Result<Self> {
        let s = ScoreSpec { kind: ScoreKind::Lst, delta };
        s.validate()?;
        Ok(s)
    }

    /// Baselines defined for `scheme`: `Lst` is Gumbel-max only.
    pub fn all_for(scheme: SchemeSpec) -> Vec<ScoreSpec> {
        let mut v = vec![Self::ARS, Self::LOG, Self::NEG, Self::SUM];
        if scheme.kind == SchemeKind::GumbelMax {
            v.push(Self::LST);
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == ScoreKind::Lst && !(self.delta > 0.0 && self.delta < 1.0) {
            return invalid(format!("Lst delta {} outside (0,1)", self.delta));
        }
        Ok(())
    }

    pub fn supports(&self, scheme: SchemeSpec) -> Result<()> {
        if self.kind == ScoreKind::Lst && scheme.kind != SchemeKind::GumbelMax {
            return Err(Error::UnsupportedScheme { score: self.to_string(), scheme: scheme.to_string() });
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            ScoreKind::Ars => "Ars",
            ScoreKind::Log => "Log",
            ScoreKind::Neg => "Neg",
            ScoreKind::Sum => "Sum",
            ScoreKind::Lst => "Lst",
        }
    }

    pub fn params(&self) -> String {
        match self.kind {
            ScoreKind::Lst => format!("delta={}", self.delta),
            _ => "-".into(),
        }
    }

    /// Sign applied to `Σ h` before thresholding.
    pub fn orientation(&self) -> f64 {
        match self.kind {
            ScoreKind::Neg => -1.0,
            _ => 1.0,
        }
    }

    /// `Σ h(y_t)` times [`orientation`](Self::orientation).
    pub(crate) fn oriented_sum(&self, ys: impl Iterator<Item = f64>) -> f64 {
        let d = self.delta;
        let total: f64 = match self.kind {
            ScoreKind::Ars => ys.map(|y| -(-clamp_y(y)).ln_1p()).sum(),
            ScoreKind::Log => ys.map(|y| clamp_y(y).ln()).sum(),
            ScoreKind::Neg => ys.map(|y| -y).sum(),
            ScoreKind::Sum => ys.sum(),
            ScoreKind::Lst => {
                let (a, b) = (d / (1.0 - d), (1.0 - d) / d);
                ys.map(|y| y.powf(a) + y.powf(b)).sum()
            }
        };
        self.orientation() * total
    }
}

impl fmt::Display for ScoreSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.kind == ScoreKind::Lst && self.delta != DEFAULT_LST_DELTA {
            write!(f, "Lst:delta={}", self.delta)
        } else {
            f.write_str(self.name())
        }
    }
}

impl FromStr for ScoreSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, params) = match s.trim().split_once(':') {
            Some((n, p)) => (n, Some(p)),
            None => (s.trim(), None),
        };
        let kind = match name.to_ascii_lowercase().as_str() {
            "ars" => ScoreKind::Ars,
            "log" => ScoreKind::Log,
            "neg" => ScoreKind::Neg,
            "sum" | "id" => ScoreKind::Sum,
            "lst" => ScoreKind::Lst,
            _ => return invalid(format!("unknown score {s:?}")),
        };
        let mut spec = ScoreSpec { kind, delta: DEFAULT_LST_DELTA };
        match (kind, params.filter(|p| !p.is_empty() && *p != "-")) {
            (_, None) => {}
            (ScoreKind::Lst, Some(p)) => {
                let v = p
                    .strip_prefix("delta=")
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| Error::InvalidArgument(format!("bad Lst parameter {p:?}")))?;
                spec.delta = v;
            }
            (_, Some(p)) => return invalid(format!("{name} takes no parameter, got {p:?}")),
        }
        spec.validate()?;
        Ok(spec)
    }
}

fn clamp_y(y: f64) -> f64 {
    y.clamp(PVALUE_EPS, 1.0 - PVALUE_EPS)
}

/// `h(y)` without orientation.
pub fn score(spec: ScoreSpec, scheme: SchemeSpec, y: f64) -> Result<f64> {
    spec.validate()?;
    spec.supports(scheme)?;
    if !(0.0..=1.0).contains(&y) {
        return invalid(format!("pivot {y} outside [0,1]"));
    }
    Ok(spec.orientation() * spec.oriented_sum(std::iter::once(y)))
}

/// Oriented `Σ h(y_t)`; reject when it exceeds the critical value.
pub fn sum_statistic(pivots: &PivotSeq, spec: ScoreSpec) -> Result<f64> {
    spec.validate()?;
    spec.supports(pivots.scheme())?;
    if pivots.is_empty() {
        return invalid("need at least one pivot");
    }
    Ok(spec.oriented_sum(pivots.pivots().iter().map(|p| p.y)))
}
