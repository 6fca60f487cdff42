//! Maximum-likelihood detection: argmin over `x ∈ {±1}^K` of `‖y − A·C·x‖²`.
//!
//! When the first `L` columns are orthogonal (as with `C = [H | V]`), the
//! minimization over the H part separates: for fixed V bits `x_V`, the best
//! `x_H` is `sign(Hᵀ·(y − A·V·x_V))`. That leaves `2^{K−L}` hypotheses.

use crate::codebook::CodeSet;
use crate::decode::DecodeResult;
use crate::error::{Error, Result};

/// Largest K accepted (2^K hypothesis budget).
pub const ML_MAX_K: usize = 25;

fn check_budget(c: &CodeSet, y: &[f64], amplitude: f64) -> Result<()> {
    if c.k() > ML_MAX_K {
        return Err(Error::BudgetExceeded(format!("ML needs K ≤ {ML_MAX_K}, got {}", c.k())));
    }
    if y.len() != c.l() {
        return Err(Error::InvalidArgument(format!("observation has {} entries, expected {}", y.len(), c.l())));
    }
    if !(amplitude > 0.0) {
        return Err(Error::InvalidArgument("amplitude must be positive".into()));
    }
    Ok(())
}

/// `x` for index `m` in lexicographic order with −1 < +1 (column 0 most significant).
fn lex_vector(m: u64, k: usize) -> impl Iterator<Item = i8> {
    (0..k).map(move |j| if m >> (k - 1 - j) & 1 == 1 { 1 } else { -1 })
}

/// Reference implementation: scores all `2^K` hypotheses directly. Ties go to
/// the lexicographically smallest `x`.
pub fn ml_decode_bruteforce(y: &[f64], c: &CodeSet, amplitude: f64) -> Result<DecodeResult> {
    check_budget(c, y, amplitude)?;
    let (l, k) = (c.l(), c.k());
    let mut best = (f64::INFINITY, 0u64);
    for m in 0..1u64 << k {
        let x: Vec<i8> = lex_vector(m, k).collect();
        let d: f64 = (0..l)
            .map(|r| {
                let s: i32 = c.row(r).iter().zip(&x).map(|(&a, &b)| (a * b) as i32).sum();
                let e = y[r] - amplitude * s as f64;
                e * e
            })
            .sum();
        if d < best.0 {
            best = (d, m);
        }
    }
    Ok(DecodeResult { bits: lex_vector(best.1, k).collect(), iterations: 1, backtracks: 0, exact: best.0 == 0.0 })
}

/// Prebuilt ML detector for one code set.
#[derive(Clone, Debug)]
pub struct MlDecoder {
    l: usize,
    k: usize,
    amplitude: f64,
    /// Orthogonal prefix width (`L` when the first `L` columns are orthogonal, else 0).
    split: usize,
    /// Row-major `L×K` in f64.
    c: Vec<f64>,
}

impl MlDecoder {
    pub fn new(c: &CodeSet, amplitude: f64) -> Result<Self> {
        check_budget(c, &vec![0.0; c.l()], amplitude)?;
        let (l, k) = (c.l(), c.k());
        let orth = k >= l
            && (0..l).all(|i| {
                (0..l).all(|j| {
                    let dot: i32 = (0..l).map(|r| (c.get(r, i) * c.get(r, j)) as i32).sum();
                    dot == if i == j { l as i32 } else { 0 }
                })
            });
        Ok(MlDecoder { l, k, amplitude, split: if orth { l } else { 0 }, c: c.entries().iter().map(|&v| v as f64).collect() })
    }

    pub fn decode(&self, y: &[f64]) -> Result<DecodeResult> {
        if y.len() != self.l {
            return Err(Error::InvalidArgument(format!("observation has {} entries, expected {}", y.len(), self.l)));
        }
        let (l, k, a, s) = (self.l, self.k, self.amplitude, self.split);
        let kv = k - s;
        let mut best: Option<(f64, Vec<i8>)> = None;
        let mut yp = vec![0.0; l];
        let mut x = vec![0i8; k];
        for m in 0..1u64 << kv {
            for (j, v) in lex_vector(m, kv).enumerate() {
                x[s + j] = v;
            }
            for r in 0..l {
                let row = &self.c[r * k..(r + 1) * k];
                yp[r] = y[r] - a * (s..k).map(|j| row[j] * x[j] as f64).sum::<f64>();
            }
            let mut cost: f64 = yp.iter().map(|v| v * v).sum();
            for i in 0..s {
                let u: f64 = (0..l).map(|r| self.c[r * k + i] * yp[r]).sum();
                // zero correlation ties toward −1, the lexicographically smaller choice
                x[i] = if u > 0.0 { 1 } else { -1 };
                cost += -2.0 * a * u.abs() + a * a * l as f64;
            }
            let better = match &best {
                None => true,
                Some((bc, bx)) => cost < *bc || (cost == *bc && x < *bx),
            };
            if better {
                best = Some((cost, x.clone()));
            }
        }
        let (cost, bits) = best.expect("at least one hypothesis");
        Ok(DecodeResult { bits, iterations: 1, backtracks: 0, exact: cost.abs() < 1e-9 })
    }
}

pub fn ml_decode(y: &[f64], c: &CodeSet, amplitude: f64) -> Result<DecodeResult> {
    MlDecoder::new(c, amplitude)?.decode(y)
}
