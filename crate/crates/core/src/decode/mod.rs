//! Decoders for `y = A·C·x + n`: the recursive noiseless decoder, the fast
//! row-sequential noisy decoder, and maximum likelihood.

mod fda;
mod ml;
mod nda;

pub use fda::{fda_decode, FdaDecoder};
pub use ml::{ml_decode, ml_decode_bruteforce, MlDecoder, ML_MAX_K};
pub use nda::{nda_decode, NdaDecoder};

use serde::{Deserialize, Serialize};

use crate::codebook::CodeSet;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeResult {
    /// Decided symbols, each ±1.
    pub bits: Vec<i8>,
    /// Outer iterations used (1 for the non-iterative decoders).
    pub iterations: u32,
    /// Row re-runs triggered by failed consistency checks.
    pub backtracks: u32,
    /// Set when the decoder certified the quantized observation as a lattice point.
    pub exact: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum TieRule {
    /// Equidistant levels resolve to the one closer to zero.
    #[default]
    SmallerMagnitude,
    LargerMagnitude,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FdaConfig {
    /// Cap on outer iterations.
    pub n_c_max: u32,
    pub tie_rule: TieRule,
}


impl Default for FdaConfig {
    fn default() -> Self {
        FdaConfig { n_c_max: 32, tie_rule: TieRule::SmallerMagnitude }
    }
}

/// `r = (y + C·1)/2`, which equals `C·x′` with `x′ = (x + 1)/2 ∈ {0,1}^K`.
pub fn affine_receive(y: &[i32], c: &CodeSet) -> Result<Vec<i32>> {
    if y.len() != c.l() {
        return Err(Error::InvalidArgument(format!("observation has {} entries, expected {}", y.len(), c.l())));
    }
    y.iter()
        .enumerate()
        .map(|(r, &v)| {
            let s = v + c.row(r).iter().map(|&e| e as i32).sum::<i32>();
            if s % 2 != 0 {
                Err(Error::Inconsistent(format!("row {r} is not a noiseless lattice value")))
            } else {
                Ok(s / 2)
            }
        })
        .collect()
}

/// Level in `{lo, lo+step, …, hi}` nearest to `value`.
pub fn quantize(value: f64, lo: i32, hi: i32, step: i32, tie: TieRule) -> i32 {
    assert!(lo <= hi && step > 0 && (hi - lo) % step == 0, "bad quantizer grid");
    let t = ((value - lo as f64) / step as f64).clamp(0.0, ((hi - lo) / step) as f64);
    let below = lo + step * t.floor() as i32;
    let above = (below + step).min(hi);
    let (db, da) = (value - below as f64, above as f64 - value);
    if db < da {
        below
    } else if da < db {
        above
    } else {
        pick_tie(below, above, tie)
    }
}

fn pick_tie(a: i32, b: i32, tie: TieRule) -> i32 {
    let (small, large) = if a.abs() < b.abs() || (a.abs() == b.abs() && a < b) { (a, b) } else { (b, a) };
    match tie {
        TieRule::SmallerMagnitude => small,
        TieRule::LargerMagnitude => large,
    }
}

/// The `rank`-th nearest level to `value` (rank 0 is [`quantize`]), alternating
/// sides as distance grows; `None` once the grid is exhausted.
pub(crate) fn ranked_level(value: f64, lo: i32, hi: i32, step: i32, tie: TieRule, rank: u32) -> Option<i32> {
    let count = ((hi - lo) / step + 1) as u32;
    if rank >= count {
        return None;
    }
    let first = quantize(value, lo, hi, step, tie);
    if rank == 0 {
        return Some(first);
    }
    // Walk outward from the nearest level, always taking the closer frontier.
    let (mut down, mut up) = (first - step, first + step);
    let mut level = first;
    for _ in 0..rank {
        let dn = if down >= lo { Some(value - down as f64) } else { None };
        let dp = if up <= hi { Some(up as f64 - value) } else { None };
        let take_down = match (dn, dp) {
            (Some(a), Some(b)) => a < b || (a == b && pick_tie(down, up, tie) == down),
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (None, None) => unreachable!("rank below level count"),
        };
        if take_down {
            level = down;
            down -= step;
        } else {
            level = up;
            up += step;
        }
    }
    Some(level)
}

/// Maps 0/1 symbols to ±1.
pub(crate) fn to_pm(bits01: &[u8]) -> Vec<i8> {
    bits01.iter().map(|&b| 2 * b as i8 - 1).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::{build_code_set, SeedVariant};

    #[test]
    fn quantizer_examples() {
        let t = TieRule::SmallerMagnitude;
        assert_eq!(quantize(4.9, -13, 13, 2, t), 5);
        assert_eq!(quantize(14.2, -13, 13, 2, t), 13);
        assert_eq!(quantize(-40.0, -13, 13, 2, t), -13);
        assert_eq!(quantize(6.0, 0, 12, 4, t), 4);
        assert_eq!(quantize(6.0, 0, 12, 4, TieRule::LargerMagnitude), 8);
        assert_eq!(quantize(-6.0, -12, 0, 4, t), -4);
        assert_eq!(quantize(0.0, -2, 2, 4, t), -2);
        assert_eq!(quantize(3.0, 3, 3, 4, t), 3);
    }

    #[test]
    fn ranked_levels() {
        let t = TieRule::SmallerMagnitude;
        let order: Vec<i32> = (0..5).map_while(|k| ranked_level(5.1, 0, 12, 4, t, k)).collect();
        assert_eq!(order, vec![4, 8, 0, 12]);
        assert_eq!(ranked_level(-20.0, -3, 5, 2, t, 4), Some(5));
        assert_eq!(ranked_level(-20.0, -3, 5, 2, t, 5), None);
    }

    #[test]
    fn affine_map() {
        let c = build_code_set(8, SeedVariant::Eq10).unwrap();
        let ones = vec![1; 13];
        let y = c.mul(&ones);
        assert_eq!(affine_receive(&y, &c).unwrap(), y);
        let neg: Vec<i32> = y.iter().map(|v| -v).collect();
        assert_eq!(affine_receive(&neg, &c).unwrap(), vec![0; 8]);
        let mut bad = y.clone();
        bad[2] += 1;
        assert!(affine_receive(&bad, &c).is_err());
    }
}
