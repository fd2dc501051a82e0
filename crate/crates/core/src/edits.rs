//! Edits applied to watermarked text before detection.
//!
//! Token edits (delete, substitute) change the observed text, so the
//! detector must re-extract pivots from the edited tokens. The
//! information-rich edit works on pivots directly and models an adversary who
//! knows which positions carry the most signal.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::prng::{self, uniform, ContextSeed};
use crate::schemes::{NullLaw, PivotSeq, SchemeSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EditKind {
    Delete,
    Substitute,
    InfoRich,
}

impl EditKind {
    pub fn label(&self) -> &'static str {
        match self {
            EditKind::Delete => "Del",
            EditKind::Substitute => "Sub",
            EditKind::InfoRich => "Info",
        }
    }
}

/// An edit with its fraction `rate ∈ (0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EditSpec {
    pub kind: EditKind,
    pub rate: f64,
}

impl EditSpec {
    pub fn new(kind: EditKind, rate: f64) -> Result<Self> {
        let spec = Self { kind, rate };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rate > 0.0 && self.rate < 1.0) {
            return invalid(format!("edit rate {} outside (0,1)", self.rate));
        }
        Ok(())
    }

    /// `⌊rate · n⌋`.
    pub fn count(&self, n: usize) -> usize {
        edit_count(self.rate, n)
    }
}

impl fmt::Display for EditSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.kind.label(), self.rate)
    }
}

impl FromStr for EditSpec {
    type Err = Error;

    /// `Del@0.2`, `Sub@0.1`, `Info@0.3`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, rate) = s
            .split_once('@')
            .ok_or_else(|| Error::InvalidArgument(format!("edit {s:?} is not of the form kind@rate")))?;
        let kind = match kind.trim().to_ascii_lowercase().as_str() {
            "del" | "delete" => EditKind::Delete,
            "sub" | "substitute" => EditKind::Substitute,
            "info" | "inforich" => EditKind::InfoRich,
            other => return invalid(format!("unknown edit kind {other:?}")),
        };
        let rate = rate
            .trim()
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad edit rate in {s:?}")))?;
        Self::new(kind, rate)
    }
}

fn edit_count(rate: f64, n: usize) -> usize {
    // The epsilon keeps 0.3 · 10 at 3 despite rounding.
    (rate * n as f64 + 1e-9).floor() as usize
}

fn checked_count(rate: f64, n: usize) -> Result<usize> {
    EditSpec { kind: EditKind::Delete, rate }.validate()?;
    let k = edit_count(rate, n);
    if k == 0 {
        return invalid(format!("rate {rate} edits no position of a length-{n} text"));
    }
    Ok(k)
}

/// `k` distinct positions out of `0..n`, uniformly, in increasing order.
fn choose_positions(n: usize, k: usize, seed: u64) -> Vec<usize> {
    let perm = prng::permutation(ContextSeed(seed), n).expect("n >= 1");
    let mut picked: Vec<usize> = perm[..k].iter().map(|&i| i as usize).collect();
    picked.sort_unstable();
    picked
}

/// Removes `⌊rate · n⌋` uniformly chosen tokens; survivors keep their order.
pub fn delete_tokens(tokens: &[u32], rate: f64, seed: u64) -> Result<Vec<u32>> {
    let k = checked_count(rate, tokens.len())?;
    if k >= tokens.len() {
        return invalid("deletion would leave an empty text");
    }
    let drop = choose_positions(tokens.len(), k, seed);
    let mut out = Vec::with_capacity(tokens.len() - k);
    let mut next = drop.iter().peekable();
    for (i, &w) in tokens.iter().enumerate() {
        if next.peek() == Some(&&i) {
            next.next();
        } else {
            out.push(w);
        }
    }
    Ok(out)
}

/// Replaces `⌊rate · n⌋` uniformly chosen tokens by uniformly random different ids.
pub fn substitute_tokens(tokens: &[u32], rate: f64, seed: u64, vocab: usize) -> Result<Vec<u32>> {
    if vocab < 2 {
        return invalid("substitution needs a vocabulary of at least 2 tokens");
    }
    let k = checked_count(rate, tokens.len())?;
    let positions = choose_positions(tokens.len(), k, seed);
    let draws = ContextSeed(prng::mix64(seed ^ 0x5B57_0000_0000_0000));
    let mut out = tokens.to_vec();
    for (j, &i) in positions.iter().enumerate() {
        let old = out[i] as usize;
        // Uniform over the other V − 1 ids.
        let r = ((uniform(draws, j as u64) * (vocab - 1) as f64) as usize).min(vocab - 2);
        let new = if old < vocab && r >= old { r + 1 } else { r };
        out[i] = new as u32;
    }
    Ok(out)
}

/// Overwrites the `⌊rate · n⌋` largest pivots with fresh null draws.
///
/// Ties go to the earlier position. Replacement `j` (in position order) is
/// `F₀⁻¹(uniform(seed, j))`.
pub fn inforich_edit(pivots: &PivotSeq, rate: f64, seed: u64, scheme: SchemeSpec) -> Result<PivotSeq> {
    let n = pivots.len();
    let k = checked_count(rate, n)?;
    let mut order: Vec<usize> = (0..n).collect();
    let ys = pivots.pivots();
    order.sort_by(|&a, &b| ys[b].y.total_cmp(&ys[a].y).then(a.cmp(&b)));
    let mut targets = order[..k].to_vec();
    targets.sort_unstable();
    let law = NullLaw::new(scheme);
    let mut out = pivots.clone();
    let draws = ContextSeed(seed);
    for (j, &i) in targets.iter().enumerate() {
        out.pivots_mut()[i].y = law.quantile(uniform(draws, j as u64));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn spec_parsing_and_validation() {
        assert_eq!("Del@0.2".parse::<EditSpec>().unwrap(), EditSpec::new(EditKind::Delete, 0.2).unwrap());
        assert_eq!("info@0.3".parse::<EditSpec>().unwrap().kind, EditKind::InfoRich);
        assert!("Del@0".parse::<EditSpec>().is_err());
        assert!("Del@1".parse::<EditSpec>().is_err());
        assert!("Swap@0.1".parse::<EditSpec>().is_err());
        let s = EditSpec::new(EditKind::Substitute, 0.1).unwrap();
        assert_eq!(s.to_string().parse::<EditSpec>().unwrap(), s);
        assert_eq!(EditSpec::new(EditKind::InfoRich, 0.3).unwrap().count(10), 3);
    }

    #[test]
    fn deletion_examples() {
        let tokens: Vec<u32> = (0..10).collect();
        let out = delete_tokens(&tokens, 0.2, 1).unwrap();
        assert_eq!(out.len(), 8);
        assert!(out.windows(2).all(|w| w[0] < w[1]));
        assert!(delete_tokens(&tokens, 0.05, 1).is_err());
        assert_eq!(delete_tokens(&tokens, 0.2, 1).unwrap(), out);
    }

    #[test]
    fn substitution_examples() {
        let tokens: Vec<u32> = (0..10).collect();
        let out = substitute_tokens(&tokens, 0.1, 3, 1000).unwrap();
        assert_eq!(tokens.iter().zip(&out).filter(|(a, b)| a != b).count(), 1);
        let two = substitute_tokens(&[0, 1, 0, 1], 0.5, 4, 2).unwrap();
        assert_eq!(two.iter().zip([0, 1, 0, 1]).filter(|(a, b)| **a != *b).count(), 2);
    }

    #[test]
    fn inforich_examples() {
        let g = SchemeSpec::gumbel();
        let p = PivotSeq::from_values(g, &[0.9, 0.1, 0.8, 0.2]).unwrap();
        let e = inforich_edit(&p, 0.5, 5, g).unwrap().values();
        assert_eq!((e[1], e[3]), (0.1, 0.2));
        assert_ne!(e[0], 0.9);
        assert_ne!(e[2], 0.8);
        let one = inforich_edit(&p, 0.25, 5, g).unwrap().values();
        assert_eq!(one.iter().zip(p.values()).filter(|(a, b)| *a != b).count(), 1);
        // Ties: earlier position first.
        let tied = PivotSeq::from_values(g, &[0.7, 0.7, 0.1]).unwrap();
        let t = inforich_edit(&tied, 0.34, 1, g).unwrap().values();
        assert_eq!((t[1], t[2]), (0.7, 0.1));
        assert_ne!(t[0], 0.7);
    }

    proptest! {
        #[test]
        fn token_edits_are_exact(n in 2usize..200, rate in 0.01f64..0.99, seed in any::<u64>()) {
            prop_assume!(edit_count(rate, n) >= 1 && edit_count(rate, n) < n);
            let tokens: Vec<u32> = (0..n as u32).collect();
            let k = edit_count(rate, n);
            let del = delete_tokens(&tokens, rate, seed).unwrap();
            prop_assert_eq!(del.len(), n - k);
            prop_assert!(del.windows(2).all(|w| w[0] < w[1]));
            prop_assert_eq!(&del, &delete_tokens(&tokens, rate, seed).unwrap());
            let sub = substitute_tokens(&tokens, rate, seed, 1000).unwrap();
            prop_assert_eq!(tokens.iter().zip(&sub).filter(|(a, b)| a != b).count(), k);
            prop_assert!(sub.iter().all(|&w| w < 1000));
        }

        #[test]
        fn inforich_keeps_untouched_pivots(ys in prop::collection::vec(0.0f64..1.0, 2..100), rate in 0.01f64..0.99, seed in any::<u64>()) {
            let n = ys.len();
            prop_assume!(edit_count(rate, n) >= 1);
            let k = edit_count(rate, n);
            let g = SchemeSpec::synthid(30).unwrap();
            let p = PivotSeq::from_values(g, &ys).unwrap();
            let e = inforich_edit(&p, rate, seed, g).unwrap();
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| ys[b].total_cmp(&ys[a]).then(a.cmp(&b)));
            for &i in &order[k..] {
                prop_assert_eq!(e.values()[i], ys[i]);
            }
            prop_assert_eq!(e, inforich_edit(&p, rate, seed, g).unwrap());
        }
    }
}
