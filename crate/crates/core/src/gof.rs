//! Goodness-of-fit statistics on p-values.
//!
//! Every test compares the empirical CDF of `p_t = 1 − F₀(Y_t)` with the
//! uniform CDF, so one implementation serves all three schemes. Watermarked
//! pivots are stochastically larger than null ones, which pushes the p-values
//! towards zero.
//!
//! All statistics are computed on the sorted sample `p_(1) ≤ … ≤ p_(n)`.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::schemes::{NullLaw, PivotSeq, SchemeSpec};

/// p-values are clamped to `[ε, 1 − ε]` to keep `A²` and Tr-GoF finite.
pub const PVALUE_EPS: f64 = 1e-12;

const SQRT3: f64 = 1.732_050_807_568_877_2;
const SQRT5: f64 = 2.236_067_977_499_79;
const SQRT7: f64 = 2.645_751_311_064_590_7;

/// Sorted p-values in `[0, 1]`, `n ≥ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PValueSeq {
    sorted: Vec<f64>,
}

impl PValueSeq {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return invalid("need at least one p-value");
        }
        if let Some(p) = values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return invalid(format!("p-value {p} outside [0,1]"));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { sorted: values })
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }
}

/// `p_t = 1 − F₀(y_t)` clamped to `[ε, 1 − ε]`.
pub fn to_pvalues(pivots: &PivotSeq, scheme: SchemeSpec) -> Result<PValueSeq> {
    if pivots.is_empty() {
        return invalid("need at least one pivot");
    }
    let law = NullLaw::new(scheme);
    PValueSeq::new(pivots.pivots().iter().map(|p| clamp_p(law.pvalue(p.y))).collect())
}

#[inline]
pub(crate) fn clamp_p(p: f64) -> f64 {
    p.clamp(PVALUE_EPS, 1.0 - PVALUE_EPS)
}

/// The eight goodness-of-fit tests with their tuning parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GofTest {
    /// Truncated φ-divergence (Tr-GoF); `c_plus = None` means `1/n`.
    Phi { s: f64, c_plus: Option<f64> },
    Kui,
    Kol,
    And,
    Cra,
    Wat,
    Ney { k: u32 },
    Chi { bins: u32 },
}

impl GofTest {
    pub const PHI: GofTest = GofTest::Phi { s: 2.0, c_plus: None };
    pub const NEY: GofTest = GofTest::Ney { k: 3 };
    pub const CHI: GofTest = GofTest::Chi { bins: 10 };

    /// All eight with default parameters.
    pub fn all() -> Vec<GofTest> {
        vec![Self::PHI, Self::Kui, Self::Kol, Self::And, Self::Cra, Self::Wat, Self::NEY, Self::CHI]
    }

    pub fn name(&self) -> &'static str {
        match self {
            GofTest::Phi { .. } => "Phi",
            GofTest::Kui => "Kui",
            GofTest::Kol => "Kol",
            GofTest::And => "And",
            GofTest::Cra => "Cra",
            GofTest::Wat => "Wat",
            GofTest::Ney { .. } => "Ney",
            GofTest::Chi { .. } => "Chi",
        }
    }

    /// Parameter string, `-` when there is none.
    pub fn params(&self) -> String {
        match self {
            GofTest::Phi { s, c_plus: None } => format!("s={s}"),
            GofTest::Phi { s, c_plus: Some(c) } => format!("s={s};c={c}"),
            GofTest::Ney { k } => format!("k={k}"),
            GofTest::Chi { bins } => format!("bins={bins}"),
            _ => "-".into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            GofTest::Phi { s, c_plus } => {
                if !s.is_finite() {
                    return invalid("Tr-GoF s must be finite");
                }
                if let Some(c) = c_plus {
                    if !(0.0..=1.0).contains(&c) {
                        return invalid(format!("Tr-GoF truncation {c} outside [0,1]"));
                    }
                }
            }
            GofTest::Ney { k } if !(1..=3).contains(&k) => {
                return invalid(format!("Neyman order {k} not in 1..=3"));
            }
            GofTest::Chi { bins } if bins < 2 => {
                return invalid(format!("chi-squared needs at least 2 bins, got {bins}"));
            }
            _ => {}
        }
        Ok(())
    }

    pub fn evaluate(&self, p: &PValueSeq) -> Result<GofStat> {
        self.validate()?;
        let value = self.on_sorted(p.sorted())?;
        Ok(GofStat { test: *self, value })
    }

    /// Statistic on an ascending slice; parameters assumed valid.
    pub(crate) fn on_sorted(&self, sorted: &[f64]) -> Result<f64> {
        Ok(match *self {
            GofTest::Phi { s, c_plus } => trgof(sorted, s, c_plus.unwrap_or(1.0 / sorted.len() as f64)),
            GofTest::Kui => kuiper(sorted),
            GofTest::Kol => kolmogorov(sorted),
            GofTest::And => anderson_darling(sorted)?,
            GofTest::Cra => cramer_von_mises(sorted),
            GofTest::Wat => watson(sorted),
            GofTest::Ney { k } => neyman(sorted, k),
            GofTest::Chi { bins } => chi_squared(sorted, bins),
        })
    }
}

impl fmt::Display for GofTest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GofTest::Phi { s, c_plus: None } if *s == 2.0 => f.write_str("Phi"),
            GofTest::Ney { k: 3 } => f.write_str("Ney"),
            GofTest::Chi { bins: 10 } => f.write_str("Chi"),
            GofTest::Phi { .. } | GofTest::Ney { .. } | GofTest::Chi { .. } => {
                write!(f, "{}:{}", self.name(), self.params())
            }
            _ => f.write_str(self.name()),
        }
    }
}

impl FromStr for GofTest {
    type Err = Error;

    /// `Phi`, `Phi:s=1.5;c=0.01`, `Ney:k=2`, `Chi:bins=20`, or a bare name; case-insensitive.
    fn from_str(s: &str) -> Result<Self> {
        let (name, params) = match s.trim().split_once(':') {
            Some((n, p)) => (n, Some(p)),
            None => (s.trim(), None),
        };
        let mut kv = Vec::new();
        for part in params.unwrap_or("").split(';').filter(|p| !p.is_empty() && *p != "-") {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("bad test parameter {part:?}")))?;
            let v: f64 = v
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad value in {part:?}")))?;
            kv.push((k.trim().to_ascii_lowercase(), v));
        }
        let get = |key: &str| kv.iter().find(|(k, _)| k == key).map(|&(_, v)| v);
        let known = |keys: &[&str]| -> Result<()> {
            match kv.iter().find(|(k, _)| !keys.contains(&k.as_str())) {
                Some((k, _)) => invalid(format!("unknown parameter {k:?} for {name}")),
                None => Ok(()),
            }
        };
        let as_u32 = |v: f64| -> Result<u32> {
            if v.fract() != 0.0 || !(0.0..=u32::MAX as f64).contains(&v) {
                return invalid(format!("{v} is not a valid count"));
            }
            Ok(v as u32)
        };
        let test = match name.to_ascii_lowercase().as_str() {
            "phi" | "trgof" | "tr-gof" => {
                known(&["s", "c"])?;
                GofTest::Phi { s: get("s").unwrap_or(2.0), c_plus: get("c") }
            }
            "kui" | "kuiper" => GofTest::Kui,
            "kol" | "ks" | "kolmogorov" => GofTest::Kol,
            "and" | "ad" | "anderson" => GofTest::And,
            "cra" | "cvm" | "cramer" => GofTest::Cra,
            "wat" | "watson" => GofTest::Wat,
            "ney" | "neyman" => {
                known(&["k"])?;
                GofTest::Ney { k: get("k").map(as_u32).transpose()?.unwrap_or(3) }
            }
            "chi" | "chi2" => {
                known(&["bins"])?;
                GofTest::Chi { bins: get("bins").map(as_u32).transpose()?.unwrap_or(10) }
            }
            _ => return invalid(format!("unknown goodness-of-fit test {s:?}")),
        };
        if !matches!(test, GofTest::Phi { .. } | GofTest::Ney { .. } | GofTest::Chi { .. }) {
            known(&[])?;
        }
        test.validate()?;
        Ok(test)
    }
}

/// A computed statistic together with the test that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GofStat {
    pub test: GofTest,
    pub value: f64,
}

// ---------------------------------------------------------------------------

pub fn stat_kol(p: &PValueSeq) -> f64 {
    kolmogorov(p.sorted())
}

pub fn stat_kuiper(p: &PValueSeq) -> f64 {
    kuiper(p.sorted())
}

pub fn stat_cvm(p: &PValueSeq) -> f64 {
    cramer_von_mises(p.sorted())
}

pub fn stat_watson(p: &PValueSeq) -> f64 {
    watson(p.sorted())
}

pub fn stat_ad(p: &PValueSeq) -> Result<f64> {
    anderson_darling(p.sorted())
}

pub fn stat_neyman(p: &PValueSeq, k: u32) -> Result<f64> {
    GofTest::Ney { k }.validate()?;
    Ok(neyman(p.sorted(), k))
}

pub fn stat_chi2(p: &PValueSeq, bins: u32) -> Result<f64> {
    GofTest::Chi { bins }.validate()?;
    Ok(chi_squared(p.sorted(), bins))
}

pub fn stat_trgof(p: &PValueSeq, s: f64, c_plus: Option<f64>) -> Result<f64> {
    let test = GofTest::Phi { s, c_plus };
    test.validate()?;
    test.on_sorted(p.sorted())
}

/// The two one-sided Kolmogorov distances `(max i/n − p_(i), max p_(i) − (i−1)/n)`.
fn one_sided(sorted: &[f64]) -> (f64, f64) {
    let n = sorted.len() as f64;
    let mut above = f64::NEG_INFINITY;
    let mut below = f64::NEG_INFINITY;
    for (i, &p) in sorted.iter().enumerate() {
        above = above.max((i + 1) as f64 / n - p);
        below = below.max(p - i as f64 / n);
    }
    (above, below)
}

fn kolmogorov(sorted: &[f64]) -> f64 {
    let (a, b) = one_sided(sorted);
    a.max(b)
}

fn kuiper(sorted: &[f64]) -> f64 {
    let (a, b) = one_sided(sorted);
    a + b
}

fn cramer_von_mises(sorted: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    let sum: f64 = sorted
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let r = p - (2 * i + 1) as f64 / (2.0 * n);
            r * r
        })
        .sum();
    1.0 / (12.0 * n) + sum
}

fn watson(sorted: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    let mean = sorted.iter().sum::<f64>() / n;
    cramer_von_mises(sorted) - n * (mean - 0.5) * (mean - 0.5)
}

fn anderson_darling(sorted: &[f64]) -> Result<f64> {
    if sorted[0] <= 0.0 || sorted[sorted.len() - 1] >= 1.0 {
        return Err(Error::Domain(
            "Anderson-Darling needs p-values strictly inside (0,1); clamp them first".into(),
        ));
    }
    let n = sorted.len();
    let sum: f64 = (0..n)
        .map(|i| (2 * i + 1) as f64 * (sorted[i].ln() + (-sorted[n - 1 - i]).ln_1p()))
        .sum();
    Ok(-(n as f64) - sum / n as f64)
}

/// Orthonormal shifted Legendre polynomials on `[0, 1]`.
pub fn legendre(j: u32, x: f64) -> f64 {
    match j {
        1 => SQRT3 * (2.0 * x - 1.0),
        2 => SQRT5 * (6.0 * x * x - 6.0 * x + 1.0),
        3 => SQRT7 * (((20.0 * x - 30.0) * x + 12.0) * x - 1.0),
        _ => panic!("Legendre order {j} not supported"),
    }
}

fn neyman(sorted: &[f64], k: u32) -> f64 {
    let n = sorted.len() as f64;
    (1..=k)
        .map(|j| {
            let a = sorted.iter().map(|&p| legendre(j, p)).sum::<f64>() / n;
            a * a
        })
        .sum::<f64>()
        * n
}

fn chi_squared(sorted: &[f64], bins: u32) -> f64 {
    let k = bins as usize;
    let mut counts = vec![0usize; k];
    for &p in sorted {
        counts[((p * k as f64) as usize).min(k - 1)] += 1;
    }
    let expected = sorted.len() as f64 / k as f64;
    counts.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum()
}

/// `φ_s(x)`, the generator of the power-divergence family.
pub fn phi_s(s: f64, x: f64) -> f64 {
    if s == 1.0 {
        if x == 0.0 {
            1.0
        } else {
            x * x.ln() - x + 1.0
        }
    } else if s == 0.0 {
        -x.ln() + x - 1.0
    } else {
        (1.0 - s + s * x - x.powf(s)) / (s * (1.0 - s))
    }
}

/// `K_s(u, v) = v φ_s(u/v) + (1 − v) φ_s((1 − u)/(1 − v))`.
pub fn k_s(s: f64, u: f64, v: f64) -> f64 {
    if s == 2.0 {
        let d = u - v;
        return d * d / (2.0 * v * (1.0 - v));
    }
    v * phi_s(s, u / v) + (1.0 - v) * phi_s(s, (1.0 - u) / (1.0 - v))
}

fn trgof(sorted: &[f64], s: f64, c_plus: f64) -> f64 {
    let n = sorted.len() as f64;
    // p⁺: the largest order statistic not above c⁺ (0 when none is).
    let p_plus = sorted.iter().take_while(|&&p| p <= c_plus).last().copied().unwrap_or(0.0);
    let mut best = 0.0f64;
    for (i, &v) in sorted.iter().enumerate() {
        let u = (i + 1) as f64 / n;
        if v >= p_plus && 0.0 < v && v < u && u < 1.0 {
            best = best.max(k_s(s, u, v));
        }
    }
    best
}
