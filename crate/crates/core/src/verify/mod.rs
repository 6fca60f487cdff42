//! Unique-decodability checks, minimum distance, and the B8+ machinery.
//!
//! A ±1 matrix `C` is uniquely decodable (UD) when `C·z ≠ 0` for every
//! nonzero `z ∈ {0, ±1}^K`.

mod appendix;

pub use appendix::{
    canonical8, classify_groups, combination_patterns, count_forbidden_pairs, enumerate_b8_plus,
    is_ud_over_h8, verify_max_append, ClassKind, Classification, ForbiddenPairs, GroupClass,
    MaxAppendReport, PatternReport, RuleCheck,
};

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::codebook::{sylvester_hadamard, BinaryCodeSet, CodeSet, SymbolMatrix};
use crate::error::{Error, Result};

/// Largest K accepted by the exhaustive searches (3^16 ≈ 4.3·10^7 vectors).
pub const EXHAUSTIVE_MAX_K: usize = 16;
/// Largest K accepted by the meet-in-the-middle search.
pub const MITM_MAX_K: usize = 34;

/// A nonzero `z ∈ {0, ±1}^K` together with `C·z`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NullSpaceWitness {
    pub z: Vec<i8>,
    pub value: Vec<i32>,
}

impl NullSpaceWitness {
    /// True when `z` is nonzero and `C·z` really is zero.
    pub fn confirms(&self, c: &CodeSet) -> bool {
        let z: Vec<i32> = self.z.iter().map(|&v| v as i32).collect();
        self.z.iter().any(|&v| v != 0) && c.mul(&z).iter().all(|&v| v == 0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum UdVerdict {
    Pass,
    Fail(NullSpaceWitness),
}

impl UdVerdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, UdVerdict::Pass)
    }

    pub fn witness(&self) -> Option<&NullSpaceWitness> {
        match self {
            UdVerdict::Pass => None,
            UdVerdict::Fail(w) => Some(w),
        }
    }
}

/// Outcome of one check plus bookkeeping for reports.
#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub verdict: UdVerdict,
    /// Vectors (or pairs) examined.
    pub examined: u64,
    pub wall_seconds: f64,
}

impl std::fmt::Display for CheckReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let v = if self.verdict.is_pass() { "pass" } else { "fail" };
        write!(f, "check={} verdict={v} examined={} wall_seconds={:.3}", self.check, self.examined, self.wall_seconds)?;
        if let Some(w) = self.verdict.witness() {
            let z: Vec<String> = w.z.iter().map(|x| x.to_string()).collect();
            write!(f, "\nwitness z=[{}]", z.join(","))?;
        }
        Ok(())
    }
}

/// Column-major integer view shared by the antipodal and binary checks.
struct Cols {
    l: usize,
    k: usize,
    cols: Vec<Vec<i32>>,
}

impl Cols {
    fn from_code(c: &CodeSet) -> Self {
        Cols { l: c.l(), k: c.k(), cols: c.columns().into_iter().map(|v| v.into_iter().map(i32::from).collect()).collect() }
    }

    fn from_binary(b: &BinaryCodeSet) -> Self {
        let cols = (0..b.k()).map(|c| (0..b.l()).map(|r| b.get(r, c) as i32).collect()).collect();
        Cols { l: b.l(), k: b.k(), cols }
    }

    fn apply(&self, z: &[i8]) -> Vec<i32> {
        let mut s = vec![0i32; self.l];
        for (col, &d) in self.cols.iter().zip(z) {
            for (a, &c) in s.iter_mut().zip(col) {
                *a += d as i32 * c;
            }
        }
        s
    }
}

/// Walks `{−1, 0, +1}^k` in base-3 counting order with column 0 most
/// significant, keeping `sum = Σ z_j·col_j` current. `visit` returns `true`
/// to stop early.
fn walk_ternary(m: &Cols, mut visit: impl FnMut(&[i8], &[i32]) -> bool) -> u64 {
    let (l, k) = (m.l, m.k);
    let mut z = vec![-1i8; k];
    let mut sum = vec![0i32; l];
    for col in &m.cols {
        for (s, &c) in sum.iter_mut().zip(col) {
            *s -= c;
        }
    }
    let mut count = 0u64;
    loop {
        count += 1;
        if visit(&z, &sum) {
            return count;
        }
        let mut j = k;
        loop {
            if j == 0 {
                return count;
            }
            j -= 1;
            let col = &m.cols[j];
            if z[j] < 1 {
                z[j] += 1;
                for (s, &c) in sum.iter_mut().zip(col) {
                    *s += c;
                }
                break;
            }
            z[j] = -1;
            for (s, &c) in sum.iter_mut().zip(col) {
                *s -= 2 * c;
            }
        }
    }
}

fn exhaustive(m: &Cols) -> Result<(UdVerdict, u64)> {
    if m.k > EXHAUSTIVE_MAX_K {
        return Err(Error::BudgetExceeded(format!("exhaustive check needs K ≤ {EXHAUSTIVE_MAX_K}, got {}", m.k)));
    }
    let mut found = None;
    let n = walk_ternary(m, |z, s| {
        if s.iter().all(|&v| v == 0) && z.iter().any(|&v| v != 0) {
            found = Some(NullSpaceWitness { z: z.to_vec(), value: s.to_vec() });
            true
        } else {
            false
        }
    });
    // the all-zero vector is visited but not counted as a candidate
    let examined = if found.is_some() { n } else { n - 1 };
    Ok((found.map_or(UdVerdict::Pass, UdVerdict::Fail), examined))
}

/// Full enumeration of `{0, ±1}^K \ {0}`; the witness, if any, is the first
/// in lexicographic order with `−1 < 0 < +1`.
pub fn is_ud_exhaustive(c: &CodeSet) -> Result<UdVerdict> {
    exhaustive(&Cols::from_code(c)).map(|r| r.0)
}

pub fn ud_exhaustive_report(c: &CodeSet) -> Result<CheckReport> {
    let t = Instant::now();
    let (verdict, examined) = exhaustive(&Cols::from_code(c))?;
    Ok(CheckReport { check: "ud-exhaustive".into(), verdict, examined, wall_seconds: t.elapsed().as_secs_f64() })
}

/// Same search over a 0/1 matrix.
pub fn is_binary_ud_exhaustive(b: &BinaryCodeSet) -> Result<UdVerdict> {
    exhaustive(&Cols::from_binary(b)).map(|r| r.0)
}

#[derive(Clone, Debug, Serialize)]
pub struct MitmConfig {
    /// Upper bound on the hash index size in bytes.
    pub memory_bytes: usize,
}

impl Default for MitmConfig {
    fn default() -> Self {
        MitmConfig { memory_bytes: 1 << 30 }
    }
}

/// Decode a base-3 index (column 0 most significant) into digits −1/0/+1.
fn ternary_digits(mut idx: u64, k: usize) -> Vec<i8> {
    let mut z = vec![0i8; k];
    for j in (0..k).rev() {
        z[j] = (idx % 3) as i8 - 1;
        idx /= 3;
    }
    z
}

/// Table slots for `n` entries at load ≤ 0.7, as a power of two.
fn slots_for(n: u64) -> u64 {
    (n * 10 / 7 + 1).next_power_of_two()
}

/// Meet-in-the-middle: index every left half-sum `C_A·z_A` by a linear hash, then
/// look up `−C_B·z_B` for every right half. Hash hits are confirmed exactly.
pub fn is_ud_mitm(c: &CodeSet, cfg: &MitmConfig) -> Result<UdVerdict> {
    mitm_report(c, cfg).map(|r| r.verdict)
}

pub fn mitm_report(c: &CodeSet, cfg: &MitmConfig) -> Result<CheckReport> {
    let t = Instant::now();
    let k = c.k();
    if k > MITM_MAX_K {
        return Err(Error::BudgetExceeded(format!("meet-in-the-middle needs K ≤ {MITM_MAX_K}, got {k}")));
    }
    // Largest left half that fits the budget, but no more than ⌈K/2⌉.
    let mut ka = k.div_ceil(2);
    while ka > 0 && slots_for(3u64.pow(ka as u32)) * 8 > cfg.memory_bytes as u64 {
        ka -= 1;
    }
    let kb = k - ka;
    if kb > 20 {
        return Err(Error::MemoryBudget(format!(
            "{} bytes leaves a right half of {kb} columns; raise the budget or use sampled mode",
            cfg.memory_bytes
        )));
    }
    let m = Cols::from_code(c);
    let left = Cols { l: m.l, k: ka, cols: m.cols[..ka].to_vec() };
    let right = Cols { l: m.l, k: kb, cols: m.cols[ka..].to_vec() };

    // Random odd row weights make the hash linear: h(Σ z_j c_j) = Σ z_j h(c_j).
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0f_a11);
    let w: Vec<u64> = (0..m.l).map(|_| rng.random::<u64>() | 1).collect();
    let col_hash = |col: &[i32]| col.iter().zip(&w).fold(0u64, |h, (&v, &wr)| h.wrapping_add((v as i64 as u64).wrapping_mul(wr)));
    let hl: Vec<u64> = left.cols.iter().map(|c| col_hash(c)).collect();
    let hr: Vec<u64> = right.cols.iter().map(|c| col_hash(c)).collect();

    let n_left = 3u64.pow(ka as u32);
    let slots = slots_for(n_left);
    let shift = 64 - slots.trailing_zeros();
    let mask = slots - 1;
    let mix = |h: u64| h.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    let pos = |h: u64| if shift == 64 { 0 } else { (mix(h) >> shift) as usize };
    // Slot layout: high 32 bits = hash fingerprint, low 32 bits = left index + 1.
    let mut table = vec![0u64; slots as usize];
    let zero_idx = (n_left - 1) / 2;

    let mut found: Option<Vec<i8>> = None;
    let mut idx = 0u64;
    let mut h = hl.iter().fold(0u64, |a, &x| a.wrapping_sub(x));
    let mut z = vec![-1i8; ka];
    loop {
        if h == 0 && idx != zero_idx && left.apply(&z).iter().all(|&v| v == 0) {
            let mut full = z.clone();
            full.resize(k, 0);
            found = Some(full);
            break;
        }
        let mut p = pos(h);
        while table[p] != 0 {
            p = (p + 1) & mask as usize;
        }
        table[p] = (h & 0xFFFF_FFFF_0000_0000) | (idx + 1);
        idx += 1;
        if idx == n_left {
            break;
        }
        step_ternary(&mut z, &mut h, &hl);
    }

    let mut examined = idx;
    if found.is_none() && kb > 0 {
        let mut zb = vec![-1i8; kb];
        let mut h = hr.iter().fold(0u64, |a, &x| a.wrapping_sub(x));
        let n_right = 3u64.pow(kb as u32);
        for _ in 0..n_right {
            // Only right halves whose first nonzero digit is +1; negation covers the rest.
            if zb.iter().find(|&&d| d != 0) == Some(&1) {
                examined += 1;
                let target = h.wrapping_neg();
                let fp = target & 0xFFFF_FFFF_0000_0000;
                let mut p = pos(target);
                while table[p] != 0 {
                    if table[p] & 0xFFFF_FFFF_0000_0000 == fp {
                        let za = ternary_digits((table[p] & 0xFFFF_FFFF) - 1, ka);
                        let mut full = za;
                        full.extend_from_slice(&zb);
                        if m.apply(&full).iter().all(|&v| v == 0) {
                            found = Some(full);
                            break;
                        }
                    }
                    p = (p + 1) & mask as usize;
                }
                if found.is_some() {
                    break;
                }
            }
            step_ternary(&mut zb, &mut h, &hr);
        }
    }
    let verdict = match found {
        None => UdVerdict::Pass,
        Some(z) => {
            let value = m.apply(&z);
            UdVerdict::Fail(NullSpaceWitness { z, value })
        }
    };
    Ok(CheckReport { check: format!("ud-mitm(split={ka}+{kb})"), verdict, examined, wall_seconds: t.elapsed().as_secs_f64() })
}

/// Advance a base-3 counter by one and update its linear hash.
#[inline]
fn step_ternary(z: &mut [i8], h: &mut u64, hc: &[u64]) {
    for j in (0..z.len()).rev() {
        if z[j] < 1 {
            z[j] += 1;
            *h = h.wrapping_add(hc[j]);
            return;
        }
        z[j] = -1;
        *h = h.wrapping_sub(hc[j].wrapping_mul(2));
    }
}

/// Random collision search: draws `trials` pairs `x1 ≠ x2 ∈ {±1}^K` and fails
/// on the first pair with `C·x1 = C·x2`.
pub fn is_ud_sampled(c: &CodeSet, trials: u64, seed: u64) -> Result<UdVerdict> {
    sampled_report(c, trials, seed).map(|r| r.verdict)
}

pub fn sampled_report(c: &CodeSet, trials: u64, seed: u64) -> Result<CheckReport> {
    let t = Instant::now();
    let k = c.k();
    if k > 64 {
        return Err(Error::InvalidArgument(format!("sampled check supports K ≤ 64, got {k}")));
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    // Bit j set means a −1 in column j; then (C·x)_r = K − 2·popcount(row_r ⊕ x).
    let rows: Vec<u64> = (0..c.l())
        .map(|r| c.row(r).iter().enumerate().fold(0u64, |m, (j, &v)| if v < 0 { m | 1 << j } else { m }))
        .collect();
    let full = if k == 64 { u64::MAX } else { (1u64 << k) - 1 };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut verdict = UdVerdict::Pass;
    let mut examined = 0;
    if k > 0 {
        for _ in 0..trials {
            let a = rng.random::<u64>() & full;
            let mut b = rng.random::<u64>() & full;
            while b == a {
                b = rng.random::<u64>() & full;
            }
            examined += 1;
            if rows.iter().all(|&r| (r ^ a).count_ones() == (r ^ b).count_ones()) {
                // x = 1 − 2·bit, so (x_a − x_b)/2 = bit_b − bit_a.
                let z: Vec<i8> = (0..k).map(|j| ((b >> j) & 1) as i8 - ((a >> j) & 1) as i8).collect();
                let value = Cols::from_code(c).apply(&z);
                verdict = UdVerdict::Fail(NullSpaceWitness { z, value });
                break;
            }
        }
    }
    Ok(CheckReport { check: "ud-sampled".into(), verdict, examined, wall_seconds: t.elapsed().as_secs_f64() })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MinDistance {
    /// `2·min ‖C·z‖₁`; zero when `C` is not UD.
    pub d_min: u32,
    /// A minimizing `z`.
    pub z: Vec<i8>,
}

/// Minimum L1 distance between distinct noiseless outputs `C·x`.
pub fn min_distance(c: &CodeSet) -> Result<MinDistance> {
    let m = Cols::from_code(c);
    if m.k > EXHAUSTIVE_MAX_K {
        return Err(Error::BudgetExceeded(format!("distance search needs K ≤ {EXHAUSTIVE_MAX_K}, got {}", m.k)));
    }
    let mut best = u32::MAX;
    let mut arg = Vec::new();
    walk_ternary(&m, |z, s| {
        let n: u32 = s.iter().map(|v| v.unsigned_abs()).sum();
        if n < best && z.iter().any(|&v| v != 0) {
            best = n;
            arg = z.to_vec();
        }
        best == 0
    });
    Ok(MinDistance { d_min: 2 * best, z: arg })
}

/// First pair `(i, j)`, `i < j`, 0-based, of overloading columns that differ in
/// exactly one row. Overloading columns are those after the leading mutually
/// orthogonal block (the `H_L` part of a constructed set).
pub fn one_element_witness(c: &CodeSet) -> Option<(usize, usize)> {
    one_element_witness_from(c, orthogonal_prefix(c))
}

/// Like [`one_element_witness`] but scanning all pairs with both indices ≥ `start`.
pub fn one_element_witness_from(c: &CodeSet, start: usize) -> Option<(usize, usize)> {
    let cols = c.columns();
    (start..cols.len())
        .flat_map(|i| (i + 1..cols.len()).map(move |j| (i, j)))
        .find(|&(i, j)| cols[i].iter().zip(&cols[j]).filter(|(a, b)| a != b).count() == 1)
}

/// Number of leading columns that are pairwise orthogonal.
pub fn orthogonal_prefix(c: &CodeSet) -> usize {
    let cols = c.columns();
    let dot = |a: &[i8], b: &[i8]| a.iter().zip(b).map(|(&x, &y)| (x * y) as i32).sum::<i32>();
    let mut n = 0;
    while n < cols.len() && (0..n).all(|i| dot(&cols[i], &cols[n]) == 0) {
        n += 1;
    }
    n
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum ProductCondition {
    Holds,
    /// Columns whose elementwise product is `±` a Hadamard column.
    Counterexample { columns: Vec<usize>, hadamard_column: usize, negated: bool },
}

/// Largest column count accepted by [`check_product_condition`].
pub const PRODUCT_MAX_COLS: usize = 20;

/// Searches every nonempty subset of columns of `V` for an elementwise product
/// equal to `±h` for a column `h` of `H_L` (the all-ones column included).
/// `Holds` is sufficient for `[H_L | V]` to be UD.
pub fn check_product_condition(v: &SymbolMatrix) -> Result<ProductCondition> {
    let (l, n, data) = crate::codebook::symbols_to_antipodal(v);
    if n > PRODUCT_MAX_COLS {
        return Err(Error::BudgetExceeded(format!("subset enumeration needs ≤ {PRODUCT_MAX_COLS} columns, got {n}")));
    }
    if !l.is_power_of_two() || l > 64 {
        return Err(Error::InvalidArgument(format!("need 4M a power of two ≤ 64, got {l}")));
    }
    let mask_of = |get: &dyn Fn(usize) -> i8| (0..l).fold(0u64, |m, r| if get(r) < 0 { m | 1 << r } else { m });
    let cols: Vec<u64> = (0..n).map(|c| mask_of(&|r| data[r * n + c])).collect();
    let h = sylvester_hadamard(l.trailing_zeros());
    let hcols: Vec<u64> = (0..l).map(|c| mask_of(&|r| h[r * l + c])).collect();
    let full = if l == 64 { u64::MAX } else { (1u64 << l) - 1 };
    for s in 1u32..(1 << n) {
        let p = (0..n).filter(|&i| s >> i & 1 == 1).fold(0u64, |acc, i| acc ^ cols[i]);
        for (j, &hc) in hcols.iter().enumerate() {
            if p == hc || p == hc ^ full {
                return Ok(ProductCondition::Counterexample {
                    columns: (0..n).filter(|&i| s >> i & 1 == 1).collect(),
                    hadamard_column: j,
                    negated: p != hc,
                });
            }
        }
    }
    Ok(ProductCondition::Holds)
}
