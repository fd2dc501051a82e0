//! Synthetic autoregressive language model.
//!
//! The NTP distribution at a position is a pure function of the last `m`
//! tokens: a Zipf-shaped base `−β ln(1 + w)` plus a Gaussian perturbation of
//! scale `σ` hashed from the context, softmaxed at temperature `T`. Because the
//! same context always yields the same distribution *and* the same watermark
//! seed, repeated m-grams repeat their pivots, which is what makes low
//! temperatures hard for detectors.

use std::collections::HashSet;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::gof::PVALUE_EPS;
use crate::prng::{self, derive_seed_unchecked, mix64, uniform, ContextSeed, SecretKey};
use crate::schemes::{NtpDist, NullLaw, Pivot, PivotSeq, SchemeSpec, Scratch};

/// Context filler before the first `m` tokens exist; outside every vocabulary.
pub const PAD_TOKEN: u32 = u32::MAX;

const FRESH_SALT: u64 = 0x5EED_F4E5_0000_0001;

/// Simulator parameters; the JSON form of the model in experiment configs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimParams {
    pub vocab_size: usize,
    pub zipf_exponent: f64,
    pub sigma: f64,
    pub window: usize,
    pub seed: u64,
}

impl Default for SimParams {
    /// `β = 2.25`, `σ = 6`: peaked enough at `T = 1` that edits visibly cost
    /// power, while `T = 0.3` still repeats less than `T = 0.1`. A smaller
    /// `σ / β` makes unwatermarked text fall into loops, whose duplicated
    /// pivots break the i.i.d. null and inflate Type I.
    fn default() -> Self {
        Self { vocab_size: 1000, zipf_exponent: 2.25, sigma: 6.0, window: 4, seed: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct SimModel {
    params: SimParams,
    key: SecretKey,
    base_logits: Vec<f64>,
}

impl SimModel {
    pub fn new(params: SimParams) -> Result<Self> {
        if params.vocab_size < 2 || params.vocab_size > PAD_TOKEN as usize {
            return invalid(format!("vocabulary size {} out of range", params.vocab_size));
        }
        if !(params.zipf_exponent >= 0.0) || !params.zipf_exponent.is_finite() {
            return invalid("zipf exponent must be finite and >= 0");
        }
        if !(params.sigma >= 0.0) || !params.sigma.is_finite() {
            return invalid("perturbation scale must be finite and >= 0");
        }
        if params.window == 0 {
            return invalid("context window must be at least 1");
        }
        let base_logits = (0..params.vocab_size)
            .map(|w| -params.zipf_exponent * (w as f64).ln_1p())
            .collect();
        Ok(Self { params, key: SecretKey::from_u64(params.seed), base_logits })
    }

    pub fn params(&self) -> &SimParams {
        &self.params
    }

    pub fn vocab_size(&self) -> usize {
        self.params.vocab_size
    }

    pub fn window(&self) -> usize {
        self.params.window
    }

    /// Same model with a different seed, i.e. a different "document".
    pub fn reseeded(&self, seed: u64) -> Self {
        Self { params: SimParams { seed, ..self.params }, key: SecretKey::from_u64(seed), ..self.clone() }
    }

    /// NTP distribution for the last `m` tokens of `history`, left-padded.
    pub fn ntp(&self, history: &[u32], temperature: f64) -> Result<NtpDist> {
        check_temperature(temperature)?;
        let ctx = context_window(history, self.params.window);
        let mut probs = Vec::new();
        self.ntp_into(&ctx, temperature, &mut probs);
        NtpDist::new(probs)
    }

    /// Writes the distribution for an exact `m`-token context; returns its top probability.
    pub(crate) fn ntp_into(&self, ctx: &[u32], temperature: f64, out: &mut Vec<f64>) -> f64 {
        let seed = derive_seed_unchecked(&self.key, ctx);
        out.clear();
        let inv_t = 1.0 / temperature;
        let sigma = self.params.sigma;
        let mut max = f64::NEG_INFINITY;
        for (w, &b) in self.base_logits.iter().enumerate() {
            let z = if sigma > 0.0 { sigma * prng::gaussian(seed, w as u64) } else { 0.0 };
            let l = (b + z) * inv_t;
            max = max.max(l);
            out.push(l);
        }
        let mut total = 0.0;
        for l in out.iter_mut() {
            *l = (*l - max).exp();
            total += *l;
        }
        let mut top = 0.0f64;
        for p in out.iter_mut() {
            *p /= total;
            top = top.max(*p);
        }
        top
    }
}

fn check_temperature(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return invalid(format!("temperature must be positive and finite, got {t}"));
    }
    Ok(())
}

/// Last `m` tokens of `history`, left-padded with [`PAD_TOKEN`].
pub fn context_window(history: &[u32], m: usize) -> Vec<u32> {
    let mut ctx = vec![PAD_TOKEN; m.saturating_sub(history.len())];
    ctx.extend_from_slice(&history[history.len().saturating_sub(m)..]);
    ctx
}

fn push_context(ctx: &mut [u32], token: u32) {
    ctx.rotate_left(1);
    if let Some(last) = ctx.last_mut() {
        *last = token;
    }
}

/// One generated text with everything the detector and the diagnostics need.
#[derive(Debug, Clone, PartialEq)]
pub struct GenRecord {
    pub tokens: Vec<u32>,
    pub pivots: PivotSeq,
    pub top_probs: Vec<f64>,
    pub temperature: f64,
    pub scheme: SchemeSpec,
}

impl GenRecord {
    /// CSV with columns `t,token,pivot,pvalue,top_prob`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let law = NullLaw::new(self.scheme);
        writeln!(out, "t,token,pivot,pvalue,top_prob")?;
        for ((t, &token), (pivot, &top)) in
            self.tokens.iter().enumerate().zip(self.pivots.pivots().iter().zip(&self.top_probs))
        {
            let p = law.pvalue(pivot.y).clamp(PVALUE_EPS, 1.0 - PVALUE_EPS);
            writeln!(out, "{t},{token},{:.17},{:.17},{:.17}", pivot.y, p, top)?;
        }
        Ok(())
    }
}

/// Watermarked generation: `w_t = S(P_t, ξ_t)` with `ξ_t` hashed from the context and `key`.
///
/// SynthID's sampling uniform at position `t` is `uniform(mix64(model seed ^ salt), t)`,
/// independent of the key.
pub fn generate_watermarked(
    model: &SimModel,
    scheme: SchemeSpec,
    key: &SecretKey,
    n: usize,
    temperature: f64,
) -> Result<GenRecord> {
    if n == 0 {
        return invalid("generation length must be at least 1");
    }
    check_temperature(temperature)?;
    let v = model.vocab_size();
    let fresh_seed = ContextSeed(mix64(model.params.seed ^ FRESH_SALT));
    let mut ctx = vec![PAD_TOKEN; model.window()];
    let mut probs = Vec::with_capacity(v);
    let mut scratch = Scratch::default();
    let mut tokens = Vec::with_capacity(n);
    let mut pivots = Vec::with_capacity(n);
    let mut top_probs = Vec::with_capacity(n);
    for t in 0..n {
        top_probs.push(model.ntp_into(&ctx, temperature, &mut probs));
        let seed = derive_seed_unchecked(key, &ctx);
        let fresh = uniform(fresh_seed, t as u64);
        let token = scratch.decode(scheme, &probs, seed, fresh)?;
        let y = scratch.pivot(scheme, token, seed, v);
        pivots.push(Pivot { y, position: t, token, seed });
        tokens.push(token);
        push_context(&mut ctx, token);
    }
    Ok(GenRecord { tokens, pivots: PivotSeq::new(scheme, pivots)?, top_probs, temperature, scheme })
}

/// Unwatermarked generation by inverse-CDF sampling from `uniform(rng_seed, t)`.
pub fn generate_plain(model: &SimModel, n: usize, temperature: f64, rng_seed: u64) -> Result<Vec<u32>> {
    if n == 0 {
        return invalid("generation length must be at least 1");
    }
    check_temperature(temperature)?;
    let rng = ContextSeed(rng_seed);
    let mut ctx = vec![PAD_TOKEN; model.window()];
    let mut probs = Vec::with_capacity(model.vocab_size());
    let mut tokens = Vec::with_capacity(n);
    for t in 0..n {
        model.ntp_into(&ctx, temperature, &mut probs);
        let u = uniform(rng, t as u64);
        let mut cum = 0.0;
        let mut token = (probs.len() - 1) as u32;
        for (w, &p) in probs.iter().enumerate() {
            cum += p;
            if u < cum {
                token = w as u32;
                break;
            }
        }
        tokens.push(token);
        push_context(&mut ctx, token);
    }
    Ok(tokens)
}

/// Watermark seeds the detector derives for each position of `tokens`.
pub fn context_seeds(tokens: &[u32], key: &SecretKey, m: usize) -> Result<Vec<ContextSeed>> {
    if m == 0 {
        return invalid("context window must be at least 1");
    }
    let mut ctx = vec![PAD_TOKEN; m];
    Ok(tokens
        .iter()
        .map(|&w| {
            let s = derive_seed_unchecked(key, &ctx);
            push_context(&mut ctx, w);
            s
        })
        .collect())
}

/// Detector-side pivot recomputation from observed tokens.
pub fn extract_pivots(
    tokens: &[u32],
    key: &SecretKey,
    scheme: SchemeSpec,
    m: usize,
    vocab: usize,
) -> Result<PivotSeq> {
    if tokens.is_empty() {
        return invalid("cannot extract pivots from an empty text");
    }
    if let Some(w) = tokens.iter().find(|&&w| w as usize >= vocab) {
        return invalid(format!("token {w} outside vocabulary of size {vocab}"));
    }
    if vocab < 2 {
        return invalid("vocabulary must hold at least 2 tokens");
    }
    let seeds = context_seeds(tokens, key, m)?;
    let mut scratch = Scratch::default();
    let pivots = tokens
        .iter()
        .zip(seeds)
        .enumerate()
        .map(|(t, (&token, seed))| Pivot { y: scratch.pivot(scheme, token, seed, vocab), position: t, token, seed })
        .collect();
    PivotSeq::new(scheme, pivots)
}

/// Fraction of positions `t ≥ m` whose preceding `m`-gram already occurred earlier.
pub fn repetition_rate(tokens: &[u32], m: usize) -> Result<f64> {
    if m == 0 {
        return invalid("m must be at least 1");
    }
    if tokens.len() <= m {
        return invalid(format!("need more than {m} tokens, got {}", tokens.len()));
    }
    let mut seen = HashSet::new();
    let repeats = tokens.windows(m).take(tokens.len() - m).filter(|ctx| !seen.insert(*ctx)).count();
    Ok(repeats as f64 / (tokens.len() - m) as f64)
}

/// Keeps the first occurrence of every `(seed, token)` pair.
pub fn dedupe_pivots(pivots: &PivotSeq) -> PivotSeq {
    let mut seen = HashSet::new();
    let kept = pivots.pivots().iter().filter(|p| seen.insert((p.seed, p.token))).copied().collect();
    PivotSeq::new(pivots.scheme(), kept).expect("subsequence of a valid pivot sequence")
}
