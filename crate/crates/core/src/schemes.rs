//! The three unbiased watermarking schemes.
//!
//! Each scheme is a decoder `S(P, ξ)` that picks the next token from an NTP
//! distribution using the pseudorandomness `ξ` attached to the position, a
//! pivotal statistic `Y(w, ξ)` whose law is known when `w` and `ξ` are
//! independent, and the CDF of that null law.
//!
//! | scheme            | `ξ` derived from a [`ContextSeed`]                    | null CDF            |
//! |-------------------|-------------------------------------------------------|---------------------|
//! | Gumbel-max        | `U_w = uniform(seed, w)`                              | `r`                 |
//! | inverse transform | `U = uniform(seed, 0)`, `π = permutation(seed′, V)`   | `r²`                |
//! | SynthID(k)        | `g_{i,w} = uniform(seed, i·V + w)`, `i = 0..k`        | Irwin–Hall(k) / k   |

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::irwin_hall::{self, IrwinHall};
use crate::prng::{self, mix64, uniform, ContextSeed};

/// Mixed into a position seed to get the inverse-transform permutation seed.
pub const PERMUTATION_SALT: u64 = 0xA5A5_A5A5_A5A5_A5A5;

pub const DEFAULT_SYNTHID_ROUNDS: u32 = 30;

/// Next-token prediction distribution over a vocabulary `0..V`.
#[derive(Debug, Clone, PartialEq)]
pub struct NtpDist {
    probs: Vec<f64>,
}

impl NtpDist {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return invalid("NTP distribution needs at least one token");
        }
        if let Some((w, p)) = probs.iter().enumerate().find(|(_, p)| !(**p >= 0.0) || !p.is_finite()) {
            return invalid(format!("probability of token {w} is {p}"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return invalid(format!("probabilities sum to {total}, expected 1"));
        }
        Ok(Self { probs })
    }

    /// Normalise non-negative weights.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return invalid("weights must have a positive finite sum");
        }
        Self::new(weights.iter().map(|w| w / total).collect())
    }

    /// Point mass at `token`.
    pub fn degenerate(vocab: usize, token: usize) -> Result<Self> {
        if token >= vocab {
            return invalid(format!("token {token} outside vocabulary of size {vocab}"));
        }
        let mut probs = vec![0.0; vocab];
        probs[token] = 1.0;
        Self::new(probs)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn vocab_size(&self) -> usize {
        self.probs.len()
    }

    pub fn max_prob(&self) -> f64 {
        self.probs.iter().copied().fold(0.0, f64::max)
    }

    pub(crate) fn from_normalized_unchecked(probs: Vec<f64>) -> Self {
        Self { probs }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeKind {
    GumbelMax,
    InverseTransform,
    SynthId,
}

/// A watermarking scheme; `rounds` only matters for SynthID.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SchemeSpec {
    pub kind: SchemeKind,
    pub rounds: u32,
}

impl SchemeSpec {
    pub const fn gumbel() -> Self {
        Self { kind: SchemeKind::GumbelMax, rounds: 1 }
    }

    pub const fn inverse() -> Self {
        Self { kind: SchemeKind::InverseTransform, rounds: 1 }
    }

    pub fn synthid(rounds: u32) -> Result<Self> {
        if rounds == 0 {
            return invalid("SynthID needs at least one tournament round");
        }
        Ok(Self { kind: SchemeKind::SynthId, rounds })
    }

    pub fn all(synthid_rounds: u32) -> Result<Vec<Self>> {
        Ok(vec![Self::gumbel(), Self::inverse(), Self::synthid(synthid_rounds)?])
    }
}

impl fmt::Display for SchemeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SchemeKind::GumbelMax => write!(f, "gumbel"),
            SchemeKind::InverseTransform => write!(f, "inverse"),
            SchemeKind::SynthId => write!(f, "synthid:{}", self.rounds),
        }
    }
}

impl FromStr for SchemeSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let (name, arg) = match lower.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (lower.as_str(), None),
        };
        match (name, arg) {
            ("gumbel" | "gumbel-max" | "gumbelmax", None) => Ok(Self::gumbel()),
            ("inverse" | "inverse-transform", None) => Ok(Self::inverse()),
            ("synthid", None) => Self::synthid(DEFAULT_SYNTHID_ROUNDS),
            ("synthid", Some(k)) => {
                let k = k
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("bad SynthID rounds {k:?}")))?;
                Self::synthid(k)
            }
            _ => invalid(format!("unknown scheme {s:?}")),
        }
    }
}

/// One pivotal statistic with the token it came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pivot {
    pub y: f64,
    pub position: usize,
    pub token: u32,
    pub seed: ContextSeed,
}

/// Ordered pivots of one text under one scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct PivotSeq {
    scheme: SchemeSpec,
    pivots: Vec<Pivot>,
}

impl PivotSeq {
    pub fn new(scheme: SchemeSpec, pivots: Vec<Pivot>) -> Result<Self> {
        if let Some(p) = pivots.iter().find(|p| !(0.0..=1.0).contains(&p.y)) {
            return invalid(format!("pivot {} at position {} outside [0,1]", p.y, p.position));
        }
        if pivots.windows(2).any(|w| w[0].position >= w[1].position) {
            return invalid("pivot positions must be strictly increasing");
        }
        Ok(Self { scheme, pivots })
    }

    /// Pivots without source tokens, positions `0..n`.
    pub fn from_values(scheme: SchemeSpec, ys: &[f64]) -> Result<Self> {
        let pivots = ys
            .iter()
            .enumerate()
            .map(|(t, &y)| Pivot { y, position: t, token: 0, seed: ContextSeed(t as u64) })
            .collect();
        Self::new(scheme, pivots)
    }

    pub fn scheme(&self) -> SchemeSpec {
        self.scheme
    }

    pub fn pivots(&self) -> &[Pivot] {
        &self.pivots
    }

    pub fn len(&self) -> usize {
        self.pivots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pivots.is_empty()
    }

    pub fn values(&self) -> Vec<f64> {
        self.pivots.iter().map(|p| p.y).collect()
    }

    pub(crate) fn pivots_mut(&mut self) -> &mut [Pivot] {
        &mut self.pivots
    }
}

// ---------------------------------------------------------------------------
// Gumbel-max

/// `argmax_{w: P_w > 0} ln(U_w) / P_w` with `U_w = uniform(seed, w)`.
pub fn gumbel_decode(dist: &NtpDist, seed: ContextSeed) -> Result<u32> {
    let mut best = None;
    let mut best_score = f64::NEG_INFINITY;
    for (w, &p) in dist.probs().iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        let score = uniform(seed, w as u64).ln() / p;
        if best.is_none() || score > best_score {
            best = Some(w as u32);
            best_score = score;
        }
    }
    best.ok_or_else(|| Error::InvalidArgument("NTP distribution has no positive entry".into()))
}

pub fn gumbel_pivot(token: u32, seed: ContextSeed) -> f64 {
    uniform(seed, token as u64)
}

/// CDF of the watermarked Gumbel-max pivot given `P`: `Σ_w P_w r^{1/P_w}`.
pub fn gumbel_alt_cdf(dist: &NtpDist, r: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&r) {
        return invalid(format!("r = {r} outside [0,1]"));
    }
    Ok(dist
        .probs()
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * r.powf(1.0 / p))
        .sum::<f64>()
        .min(1.0))
}

// ---------------------------------------------------------------------------
// Inverse transform

pub fn permutation_seed(seed: ContextSeed) -> ContextSeed {
    ContextSeed(mix64(seed.0 ^ PERMUTATION_SALT))
}

/// Inverse-transform selection given explicit ranks `π(w)` (0-based) and `U`.
///
/// Walks tokens in rank order and returns the one whose cumulative-mass
/// interval `[Σ_{π(w')<π(w)} P, Σ_{π(w')≤π(w)} P)` contains `U`.
pub fn inverse_select(dist: &NtpDist, ranks: &[u32], u: f64) -> Result<u32> {
    if ranks.len() != dist.vocab_size() {
        return invalid("rank vector length differs from vocabulary size");
    }
    let mut order = vec![u32::MAX; ranks.len()];
    for (w, &r) in ranks.iter().enumerate() {
        let slot = order
            .get_mut(r as usize)
            .ok_or_else(|| Error::InvalidArgument(format!("rank {r} out of range")))?;
        if *slot != u32::MAX {
            return invalid(format!("rank {r} assigned twice"));
        }
        *slot = w as u32;
    }
    Ok(select_in_order(dist.probs(), &order, u))
}

fn select_in_order(probs: &[f64], order: &[u32], u: f64) -> u32 {
    let mut cum = 0.0;
    let mut last_positive = order[0];
    for &w in order {
        let p = probs[w as usize];
        if p > 0.0 {
            cum += p;
            last_positive = w;
            if u < cum {
                return w;
            }
        }
    }
    // Rounding left the total mass a hair below U.
    last_positive
}

pub fn inverse_decode(dist: &NtpDist, seed: ContextSeed) -> Result<u32> {
    let mut scratch = Scratch::default();
    Ok(scratch.inverse_decode(dist.probs(), seed))
}

/// `1 − |U − η|` with `η = π(w) / (V − 1)`.
pub fn inverse_pivot(token: u32, seed: ContextSeed, vocab: usize) -> Result<f64> {
    if vocab < 2 {
        return invalid("inverse-transform pivot needs a vocabulary of at least 2 tokens");
    }
    if token as usize >= vocab {
        return invalid(format!("token {token} outside vocabulary of size {vocab}"));
    }
    let mut scratch = Scratch::default();
    Ok(scratch.inverse_pivot(token, seed, vocab))
}

pub fn inverse_pivot_from(u: f64, rank: u32, vocab: usize) -> f64 {
    let eta = rank as f64 / (vocab - 1) as f64;
    1.0 - (u - eta).abs()
}

// ---------------------------------------------------------------------------
// SynthID tournament sampling

/// One tournament round: `T_g(P)(w) = P_w (P_w + 2 Σ_{g_{w'} < g_w} P_{w'})`.
pub fn synthid_tournament_step(dist: &NtpDist, g: &[f64]) -> Result<NtpDist> {
    let probs = dist.probs();
    if g.len() != probs.len() {
        return invalid("g-value vector length differs from vocabulary size");
    }
    let mut order: Vec<usize> = (0..g.len()).collect();
    order.sort_by(|&a, &b| g[a].total_cmp(&g[b]));
    if order.windows(2).any(|w| g[w[0]] == g[w[1]]) {
        return Err(Error::DegenerateRandomness("tied g-values".into()));
    }
    let mut out = vec![0.0; probs.len()];
    let mut below = 0.0;
    for &w in &order {
        let p = probs[w];
        out[w] = p * (p + 2.0 * below);
        below += p;
    }
    let total: f64 = out.iter().sum();
    for v in &mut out {
        *v /= total;
    }
    Ok(NtpDist::from_normalized_unchecked(out))
}

/// Tournament-sample a token: `k` rounds with `g_{i,w} = uniform(seed, i·V + w)`,
/// then inverse-CDF sampling in token-id order with the caller's `fresh` uniform.
pub fn synthid_decode(dist: &NtpDist, seed: ContextSeed, rounds: u32, fresh: f64) -> Result<u32> {
    if rounds == 0 {
        return invalid("SynthID needs at least one tournament round");
    }
    let mut scratch = Scratch::default();
    scratch.synthid_decode(dist.probs(), seed, rounds, fresh)
}

/// Mean of the `k` g-values of `token`.
pub fn synthid_pivot(token: u32, seed: ContextSeed, rounds: u32, vocab: usize) -> f64 {
    let v = vocab as u64;
    let sum: f64 = (0..rounds as u64).map(|i| uniform(seed, i * v + token as u64)).sum();
    sum / rounds as f64
}

// ---------------------------------------------------------------------------
// Null laws

/// Null CDF `F₀(r)` evaluated exactly (SynthID via the exact Irwin–Hall sum).
pub fn null_cdf(scheme: SchemeSpec, r: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&r) {
        return invalid(format!("r = {r} outside [0,1]"));
    }
    Ok(match scheme.kind {
        SchemeKind::GumbelMax => r,
        SchemeKind::InverseTransform => r * r,
        SchemeKind::SynthId => irwin_hall::cdf_exact(scheme.rounds, scheme.rounds as f64 * r),
    })
}

/// Fast null law of one scheme: CDF, p-value transform and quantile.
#[derive(Debug, Clone)]
pub struct NullLaw {
    scheme: SchemeSpec,
    irwin_hall: Option<Arc<IrwinHall>>,
}

impl NullLaw {
    pub fn new(scheme: SchemeSpec) -> Self {
        let irwin_hall = match scheme.kind {
            SchemeKind::SynthId => Some(IrwinHall::shared(scheme.rounds)),
            _ => None,
        };
        Self { scheme, irwin_hall }
    }

    pub fn scheme(&self) -> SchemeSpec {
        self.scheme
    }

    pub fn cdf(&self, r: f64) -> f64 {
        let r = r.clamp(0.0, 1.0);
        match (&self.irwin_hall, self.scheme.kind) {
            (Some(ih), _) => ih.cdf(self.scheme.rounds as f64 * r),
            (None, SchemeKind::InverseTransform) => r * r,
            (None, _) => r,
        }
    }

    /// `1 − F₀(y)` without cancellation in the upper tail.
    pub fn pvalue(&self, y: f64) -> f64 {
        let y = y.clamp(0.0, 1.0);
        match (&self.irwin_hall, self.scheme.kind) {
            (Some(ih), _) => ih.sf(self.scheme.rounds as f64 * y),
            (None, SchemeKind::InverseTransform) => 1.0 - y * y,
            (None, _) => 1.0 - y,
        }
    }

    /// `F₀⁻¹(u)`.
    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        match (&self.irwin_hall, self.scheme.kind) {
            (Some(ih), _) => (ih.quantile(u) / self.scheme.rounds as f64).clamp(0.0, 1.0),
            (None, SchemeKind::InverseTransform) => u.sqrt(),
            (None, _) => u,
        }
    }

    /// Draw `n` i.i.d. null pivots from `seed`.
    ///
    /// Gumbel-max and inverse transform apply the quantile to `uniform(seed, i)`.
    /// SynthID averages `k` uniforms, which is exactly the scaled Irwin–Hall law.
    pub fn sample_into(&self, seed: ContextSeed, n: usize, out: &mut Vec<f64>) {
        out.clear();
        match self.scheme.kind {
            SchemeKind::GumbelMax => out.extend((0..n as u64).map(|i| uniform(seed, i))),
            SchemeKind::InverseTransform => {
                out.extend((0..n as u64).map(|i| uniform(seed, i).sqrt()))
            }
            SchemeKind::SynthId => {
                let k = self.scheme.rounds as u64;
                out.extend((0..n as u64).map(|i| {
                    (0..k).map(|j| uniform(seed, i * k + j)).sum::<f64>() / k as f64
                }))
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Reusable buffers for the generation and extraction loops.

#[derive(Debug, Default)]
pub(crate) struct Scratch {
    perm: Vec<u32>,
    order: Vec<u32>,
    keys: Vec<u64>,
    pairs: Vec<(u64, u32)>,
    probs: Vec<f64>,
    next: Vec<f64>,
}

impl Scratch {
    pub(crate) fn decode(
        &mut self,
        scheme: SchemeSpec,
        probs: &[f64],
        seed: ContextSeed,
        fresh: f64,
    ) -> Result<u32> {
        match scheme.kind {
            SchemeKind::GumbelMax => self.gumbel_decode(probs, seed).ok_or_else(|| {
                Error::InvalidArgument("NTP distribution has no positive entry".into())
            }),
            SchemeKind::InverseTransform => Ok(self.inverse_decode(probs, seed)),
            SchemeKind::SynthId => self.synthid_decode(probs, seed, scheme.rounds, fresh),
        }
    }

    pub(crate) fn gumbel_decode(&mut self, probs: &[f64], seed: ContextSeed) -> Option<u32> {
        let mut best = None;
        let mut best_score = f64::NEG_INFINITY;
        for (w, &p) in probs.iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            let score = uniform(seed, w as u64).ln() / p;
            if best.is_none() || score > best_score {
                best = Some(w as u32);
                best_score = score;
            }
        }
        best
    }

    pub(crate) fn pivot(&mut self, scheme: SchemeSpec, token: u32, seed: ContextSeed, vocab: usize) -> f64 {
        match scheme.kind {
            SchemeKind::GumbelMax => gumbel_pivot(token, seed),
            SchemeKind::InverseTransform => self.inverse_pivot(token, seed, vocab),
            SchemeKind::SynthId => synthid_pivot(token, seed, scheme.rounds, vocab),
        }
    }

    fn inverse_decode(&mut self, probs: &[f64], seed: ContextSeed) -> u32 {
        let u = uniform(seed, 0);
        prng::permutation_into(permutation_seed(seed), probs.len(), &mut self.perm);
        self.order.clear();
        self.order.resize(probs.len(), 0);
        for (w, &rank) in self.perm.iter().enumerate() {
            self.order[rank as usize] = w as u32;
        }
        select_in_order(probs, &self.order, u)
    }

    fn inverse_pivot(&mut self, token: u32, seed: ContextSeed, vocab: usize) -> f64 {
        let u = uniform(seed, 0);
        prng::permutation_into(permutation_seed(seed), vocab, &mut self.perm);
        inverse_pivot_from(u, self.perm[token as usize], vocab)
    }

    fn synthid_decode(&mut self, probs: &[f64], seed: ContextSeed, rounds: u32, fresh: f64) -> Result<u32> {
        let v = probs.len();
        self.probs.clear();
        self.probs.extend_from_slice(probs);
        let id_bits = usize::BITS - (v.max(2) - 1).leading_zeros();
        let packed = id_bits <= 11;
        for i in 0..rounds as u64 {
            let base = i * v as u64;
            if packed {
                self.keys.clear();
                self.keys.extend(
                    (0..v as u64).map(|w| (prng::uniform_bits(seed, base + w) << 11) | w),
                );
                self.keys.sort_unstable();
                if self.keys.windows(2).any(|w| w[0] >> 11 == w[1] >> 11) {
                    return Err(Error::DegenerateRandomness(format!("tied g-values in round {i}")));
                }
                self.pairs.clear();
                self.pairs.extend(self.keys.iter().map(|&k| (k >> 11, (k & 0x7FF) as u32)));
            } else {
                self.pairs.clear();
                self.pairs
                    .extend((0..v as u64).map(|w| (prng::uniform_bits(seed, base + w), w as u32)));
                self.pairs.sort_unstable();
                if self.pairs.windows(2).any(|w| w[0].0 == w[1].0) {
                    return Err(Error::DegenerateRandomness(format!("tied g-values in round {i}")));
                }
            }
            self.next.clear();
            self.next.resize(v, 0.0);
            let mut below = 0.0;
            for &(_, w) in &self.pairs {
                let p = self.probs[w as usize];
                self.next[w as usize] = p * (p + 2.0 * below);
                below += p;
            }
            let total: f64 = self.next.iter().sum();
            for (dst, &src) in self.probs.iter_mut().zip(&self.next) {
                *dst = src / total;
            }
        }
        let mut cum = 0.0;
        let mut last_positive = None;
        for (w, &p) in self.probs.iter().enumerate() {
            if p > 0.0 {
                cum += p;
                last_positive = Some(w as u32);
                if fresh < cum {
                    return Ok(w as u32);
                }
            }
        }
        last_positive
            .ok_or_else(|| Error::InvalidArgument("NTP distribution has no positive entry".into()))
    }

}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prng::stream;

    fn dist(p: &[f64]) -> NtpDist {
        NtpDist::new(p.to_vec()).unwrap()
    }

    /// Find a seed whose uniforms at indices 0 and 1 satisfy `pred`.
    fn seed_where(pred: impl Fn(f64, f64) -> bool) -> ContextSeed {
        (0..)
            .map(|i| stream(99, i))
            .find(|&s| pred(uniform(s, 0), uniform(s, 1)))
            .unwrap()
    }

    fn ks_to(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        xs.iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = cdf(x);
                (f - i as f64 / n).max((i + 1) as f64 / n - f)
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn ntp_validation() {
        assert!(NtpDist::new(vec![]).is_err());
        assert!(NtpDist::new(vec![0.5, 0.6]).is_err());
        assert!(NtpDist::new(vec![-0.1, 1.1]).is_err());
        assert!(NtpDist::new(vec![0.3, 0.7]).is_ok());
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in SchemeSpec::all(30).unwrap() {
            assert_eq!(s.to_string().parse::<SchemeSpec>().unwrap(), s);
        }
        assert_eq!("synthid".parse::<SchemeSpec>().unwrap(), SchemeSpec::synthid(30).unwrap());
        assert!("synthid:0".parse::<SchemeSpec>().is_err());
        assert!("kgw".parse::<SchemeSpec>().is_err());
    }

    #[test]
    fn gumbel_degenerate_and_hand_example() {
        for i in 0..100 {
            assert_eq!(gumbel_decode(&dist(&[1.0, 0.0]), stream(1, i)).unwrap(), 0);
        }
        assert!(gumbel_decode(&NtpDist::from_normalized_unchecked(vec![0.0, 0.0]), ContextSeed(1)).is_err());
        // U = (0.9, 0.1) region: ln(0.9)/0.5 = −0.2107 beats ln(0.1)/0.5 = −4.6052.
        let s = seed_where(|a, b| (a - 0.9).abs() < 0.01 && (b - 0.1).abs() < 0.01);
        assert_eq!(gumbel_decode(&dist(&[0.5, 0.5]), s).unwrap(), 0);
        assert!((0.9f64.ln() / 0.5 - -0.2107).abs() < 1e-4);
        assert!((0.1f64.ln() / 0.5 - -4.6052).abs() < 1e-4);
    }

    fn frequencies(v: usize, trials: u64, mut draw: impl FnMut(u64) -> u32) -> Vec<f64> {
        let mut counts = vec![0usize; v];
        for t in 0..trials {
            counts[draw(t) as usize] += 1;
        }
        counts.iter().map(|&c| c as f64 / trials as f64).collect()
    }

    #[test]
    fn decoders_are_unbiased_on_small_example() {
        let p = dist(&[0.2, 0.3, 0.5]);
        let n = 100_000;
        let gum = frequencies(3, n, |t| gumbel_decode(&p, stream(11, t)).unwrap());
        let inv = frequencies(3, n, |t| inverse_decode(&p, stream(12, t)).unwrap());
        let syn = frequencies(3, n, |t| {
            synthid_decode(&p, stream(13, t), 3, uniform(stream(14, t), 0)).unwrap()
        });
        for f in [gum, inv, syn] {
            for (got, want) in f.iter().zip(p.probs()) {
                assert!((got - want).abs() < 0.01, "{f:?}");
            }
        }
    }

    #[test]
    fn gumbel_pivot_laws() {
        let n = 100_000u64;
        let s = stream(3, 3);
        assert_eq!(gumbel_pivot(17, s), uniform(s, 17));
        // independent (token, seed) pairs: uniform
        let null: Vec<f64> =
            (0..n).map(|t| gumbel_pivot((mix64(t) % 1000) as u32, stream(21, t))).collect();
        assert!(ks_to(null, |r| r) < 0.006);
        // watermarked at P = (0.5, 0.5): mean 2/3 instead of 1/2
        let p = dist(&[0.5, 0.5]);
        let ys: Vec<f64> = (0..n)
            .map(|t| {
                let s = stream(22, t);
                gumbel_pivot(gumbel_decode(&p, s).unwrap(), s)
            })
            .collect();
        let mean = ys.iter().sum::<f64>() / n as f64;
        let se = (1.0 / 12.0 / n as f64).sqrt();
        assert!(mean > 0.5 + 5.0 * se, "mean {mean}");
    }

    #[test]
    fn gumbel_alt_cdf_values() {
        for &r in &[0.0, 0.2, 0.5, 1.0] {
            assert!((gumbel_alt_cdf(&dist(&[1.0]), r).unwrap() - r).abs() < 1e-15);
        }
        assert!((gumbel_alt_cdf(&dist(&[0.5, 0.5]), 0.5).unwrap() - 0.25).abs() < 1e-15);
        assert!(gumbel_alt_cdf(&dist(&[1.0]), 1.5).is_err());
        let p = dist(&[0.3, 0.7]);
        let ys: Vec<f64> = (0..100_000u64)
            .map(|t| {
                let s = stream(23, t);
                gumbel_pivot(gumbel_decode(&p, s).unwrap(), s)
            })
            .collect();
        assert!(ks_to(ys, |r| gumbel_alt_cdf(&p, r).unwrap()) < 0.006);
    }

    #[test]
    fn inverse_hand_examples() {
        let p = dist(&[0.2, 0.3, 0.5]);
        assert_eq!(inverse_select(&p, &[0, 1, 2], 0.4).unwrap(), 1);
        assert_eq!(inverse_select(&p, &[0, 1, 2], 0.1).unwrap(), 0);
        assert_eq!(inverse_select(&p, &[0, 1, 2], 0.9).unwrap(), 2);
        assert!(inverse_select(&p, &[0, 0, 2], 0.9).is_err());
        let point = NtpDist::degenerate(5, 3).unwrap();
        for i in 0..200 {
            assert_eq!(inverse_decode(&point, stream(5, i)).unwrap(), 3);
        }
        assert!((inverse_pivot_from(0.4, 1, 3) - 0.9).abs() < 1e-15);
        assert_eq!(inverse_pivot_from(0.5, 1, 3), 1.0);
        assert!(inverse_pivot(0, ContextSeed(1), 1).is_err());
    }

    #[test]
    fn inverse_pivot_null_law_is_r_squared() {
        let ys: Vec<f64> = (0..100_000u64)
            .map(|t| inverse_pivot((mix64(t) % 1000) as u32, stream(31, t), 1000).unwrap())
            .collect();
        // η sits on a grid of step 1/(V−1); the r² law is its continuum limit.
        assert!(ks_to(ys, |r| r * r) < 0.006);
    }

    #[test]
    fn tournament_step_examples() {
        let out = synthid_tournament_step(&dist(&[0.5, 0.5]), &[0.1, 0.9]).unwrap();
        assert!((out.probs()[0] - 0.25).abs() < 1e-15);
        assert!((out.probs()[1] - 0.75).abs() < 1e-15);
        let point = NtpDist::degenerate(4, 2).unwrap();
        let out = synthid_tournament_step(&point, &[0.4, 0.3, 0.2, 0.1]).unwrap();
        assert_eq!(out.probs(), point.probs());
        assert!(matches!(
            synthid_tournament_step(&dist(&[0.5, 0.5]), &[0.3, 0.3]),
            Err(Error::DegenerateRandomness(_))
        ));
    }

    #[test]
    fn synthid_decode_hand_example() {
        // k = 1, V = 2: g values are uniform(seed, 0) and uniform(seed, 1).
        let s = seed_where(|g0, g1| g0 < g1);
        assert_eq!(synthid_decode(&dist(&[0.5, 0.5]), s, 1, 0.5).unwrap(), 1);
        assert_eq!(synthid_decode(&dist(&[0.5, 0.5]), s, 1, 0.2).unwrap(), 0);
        let point = NtpDist::degenerate(6, 4).unwrap();
        for i in 0..50 {
            assert_eq!(synthid_decode(&point, stream(8, i), 30, 0.99).unwrap(), 4);
        }
    }

    #[test]
    fn packed_and_general_tournament_paths_agree() {
        // V above the packing limit takes the general path; compare against
        // the public single-step operator.
        let v = 3000;
        let weights: Vec<f64> = (0..v).map(|w| 1.0 / (1.0 + w as f64)).collect();
        let p = NtpDist::from_weights(&weights).unwrap();
        let seed = ContextSeed(77);
        let mut expected = p.clone();
        for i in 0..3u64 {
            let g: Vec<f64> = (0..v as u64).map(|w| uniform(seed, i * v as u64 + w)).collect();
            expected = synthid_tournament_step(&expected, &g).unwrap();
        }
        for fresh in [0.01, 0.3, 0.77, 0.999] {
            let mut cum = 0.0;
            let want = expected
                .probs()
                .iter()
                .position(|&q| {
                    cum += q;
                    fresh < cum
                })
                .unwrap() as u32;
            assert_eq!(synthid_decode(&p, seed, 3, fresh).unwrap(), want);
        }
    }

    #[test]
    fn synthid_pivot_examples() {
        let s = stream(40, 1);
        let g0 = uniform(s, 3);
        assert_eq!(synthid_pivot(3, s, 1, 10), g0);
        let g1 = uniform(s, 13);
        assert!((synthid_pivot(3, s, 2, 10) - 0.5 * (g0 + g1)).abs() < 1e-15);
        let law = NullLaw::new(SchemeSpec::synthid(30).unwrap());
        let ys: Vec<f64> = (0..100_000u64)
            .map(|t| synthid_pivot((mix64(t) % 100) as u32, stream(41, t), 30, 100))
            .collect();
        assert!(ks_to(ys, |r| law.cdf(r)) < 0.006);
    }

    #[test]
    fn null_cdf_values() {
        assert_eq!(null_cdf(SchemeSpec::gumbel(), 0.3).unwrap(), 0.3);
        assert_eq!(null_cdf(SchemeSpec::inverse(), 0.5).unwrap(), 0.25);
        let s2 = SchemeSpec::synthid(2).unwrap();
        assert!((null_cdf(s2, 0.25).unwrap() - 0.125).abs() < 1e-15);
        for k in [1, 2, 7, 30] {
            let s = SchemeSpec::synthid(k).unwrap();
            assert!((null_cdf(s, 0.5).unwrap() - 0.5).abs() < 1e-15);
        }
        assert!(null_cdf(SchemeSpec::gumbel(), -0.1).is_err());
        assert!(null_cdf(SchemeSpec::gumbel(), 1.1).is_err());
    }

    #[test]
    fn null_cdfs_monotone_with_exact_endpoints() {
        for s in SchemeSpec::all(30).unwrap() {
            let mut prev = -1.0;
            for i in 0..=10_000 {
                let r = i as f64 / 10_000.0;
                let f = null_cdf(s, r).unwrap();
                assert!(f >= prev);
                prev = f;
            }
            assert!(null_cdf(s, 0.0).unwrap().abs() < 1e-9);
            assert!((null_cdf(s, 1.0).unwrap() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn null_law_fast_route_matches_exact() {
        for s in SchemeSpec::all(30).unwrap() {
            let law = NullLaw::new(s);
            for i in 0..=500 {
                let r = i as f64 / 500.0;
                let exact = null_cdf(s, r).unwrap();
                assert!((law.cdf(r) - exact).abs() < 1e-13);
                assert!((law.pvalue(r) - (1.0 - exact)).abs() < 1e-13);
                let u = (i as f64 + 0.5) / 501.0;
                assert!((law.cdf(law.quantile(u)) - u).abs() < 1e-11);
            }
        }
    }
}
