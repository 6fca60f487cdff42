//! Sylvester-Hadamard matrices, the V8 seeds, the doubling recursion, the
//! non-power-of-two extension, and assembled code sets `C = [H | V]`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field16::{phi_inv, FieldElem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeedVariant {
    Eq10,
    Eq14,
}

impl fmt::Display for SeedVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SeedVariant::Eq10 => "eq10",
            SeedVariant::Eq14 => "eq14",
        })
    }
}

impl FromStr for SeedVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "eq10" | "10" => Ok(SeedVariant::Eq10),
            "eq14" | "14" => Ok(SeedVariant::Eq14),
            _ => Err(Error::InvalidArgument(format!("unknown variant {s:?}"))),
        }
    }
}

/// Block matrix over GF(2^4); each entry stands for a 4-chip column segment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolMatrix {
    rows: usize,
    cols: usize,
    data: Vec<FieldElem>,
}

impl SymbolMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SymbolMatrix { rows, cols, data: vec![FieldElem::ZERO; rows * cols] }
    }

    pub fn from_rows(rows: &[Vec<FieldElem>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidArgument("ragged symbol rows".into()));
        }
        Ok(SymbolMatrix { rows: rows.len(), cols, data: rows.concat() })
    }

    /// Number of symbol rows `M`; the antipodal form has `4M` rows.
    pub fn block_rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> FieldElem {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, e: FieldElem) {
        self.data[r * self.cols + c] = e;
    }

    pub fn row(&self, r: usize) -> &[FieldElem] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Every symbol negated.
    pub fn negated(&self) -> Self {
        SymbolMatrix { data: self.data.iter().map(|e| e.negated()).collect(), ..*self }
    }

    /// Copy `src` into this matrix with its top-left at block `(r0, c0)`.
    fn paste(&mut self, r0: usize, c0: usize, src: &SymbolMatrix) {
        for r in 0..src.rows {
            for c in 0..src.cols {
                self.set(r0 + r, c0 + c, src.get(r, c));
            }
        }
    }
}

impl fmt::Display for SymbolMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            let labels: Vec<String> = self.row(r).iter().map(|e| e.label()).collect();
            writeln!(f, "{}", labels.join(" "))?;
        }
        Ok(())
    }
}

/// Dense `L×K` matrix with entries in {−1, +1}, stored row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeSet {
    l: usize,
    k: usize,
    data: Vec<i8>,
    variant: Option<SeedVariant>,
}

impl CodeSet {
    pub fn from_entries(l: usize, k: usize, data: Vec<i8>) -> Result<Self> {
        if data.len() != l * k {
            return Err(Error::InvalidArgument(format!("expected {} entries, got {}", l * k, data.len())));
        }
        if data.iter().any(|&x| x != 1 && x != -1) {
            return Err(Error::InvalidArgument("entries must be ±1".into()));
        }
        Ok(CodeSet { l, k, data, variant: None })
    }

    pub fn from_columns(l: usize, cols: &[Vec<i8>]) -> Result<Self> {
        if cols.iter().any(|c| c.len() != l) {
            return Err(Error::InvalidArgument(format!("columns must have length {l}")));
        }
        let k = cols.len();
        let data = (0..l * k).map(|i| cols[i % k][i / k]).collect();
        Self::from_entries(l, k, data)
    }

    pub fn with_variant(mut self, v: Option<SeedVariant>) -> Self {
        self.variant = v;
        self
    }

    /// Spreading length (rows).
    pub fn l(&self) -> usize {
        self.l
    }

    /// Number of users (columns).
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn variant(&self) -> Option<SeedVariant> {
        self.variant
    }

    pub fn get(&self, r: usize, c: usize) -> i8 {
        self.data[r * self.k + c]
    }

    pub fn entries(&self) -> &[i8] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[i8] {
        &self.data[r * self.k..(r + 1) * self.k]
    }

    pub fn column(&self, c: usize) -> Vec<i8> {
        (0..self.l).map(|r| self.get(r, c)).collect()
    }

    pub fn columns(&self) -> Vec<Vec<i8>> {
        (0..self.k).map(|c| self.column(c)).collect()
    }

    /// Columns listed in `idx`, in that order.
    pub fn select_columns(&self, idx: &[usize]) -> Result<CodeSet> {
        if let Some(&bad) = idx.iter().find(|&&c| c >= self.k) {
            return Err(Error::InvalidArgument(format!("column {bad} out of range")));
        }
        let cols: Vec<Vec<i8>> = idx.iter().map(|&c| self.column(c)).collect();
        CodeSet::from_columns(self.l, &cols)
    }

    /// This set with `extra` appended as new columns.
    pub fn append_columns(&self, extra: &[Vec<i8>]) -> Result<CodeSet> {
        let mut cols = self.columns();
        cols.extend_from_slice(extra);
        CodeSet::from_columns(self.l, &cols)
    }

    /// `C·x` for a ±1 (or any integer) vector.
    pub fn mul(&self, x: &[i32]) -> Vec<i32> {
        assert_eq!(x.len(), self.k);
        (0..self.l)
            .map(|r| self.row(r).iter().zip(x).map(|(&c, &v)| c as i32 * v).sum())
            .collect()
    }

    pub fn mul_f64(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.k);
        (0..self.l)
            .map(|r| self.row(r).iter().zip(x).map(|(&c, &v)| c as f64 * v).sum())
            .collect()
    }

    /// Rows of `+`/`-` glyphs, one per line.
    pub fn to_figure(&self) -> String {
        let mut s = String::with_capacity(self.l * (self.k + 1));
        for r in 0..self.l {
            s.extend(self.row(r).iter().map(|&x| if x > 0 { '+' } else { '-' }));
            s.push('\n');
        }
        s
    }

    /// Parse the `+`/`-` figure format. Blank lines and `#` comments are skipped.
    pub fn from_figure(text: &str) -> Result<Self> {
        let rows: Vec<&str> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect();
        let k = rows.first().map_or(0, |r| r.chars().count());
        let mut data = Vec::with_capacity(rows.len() * k);
        for (i, row) in rows.iter().enumerate() {
            if row.chars().count() != k {
                return Err(Error::Parse(format!("row {} has {} entries, expected {k}", i + 1, row.chars().count())));
            }
            for ch in row.chars() {
                data.push(match ch {
                    '+' => 1,
                    '-' => -1,
                    _ => return Err(Error::Parse(format!("unexpected glyph {ch:?} in row {}", i + 1))),
                });
            }
        }
        Self::from_entries(rows.len(), k, data)
    }

    /// Comma-separated ±1 integers, one row per line.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for r in 0..self.l {
            let cells: Vec<String> = self.row(r).iter().map(|x| x.to_string()).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rows: Vec<Vec<i8>> = Vec::new();
        for (i, line) in text.lines().map(str::trim).filter(|l| !l.is_empty()).enumerate() {
            let row = line
                .split(',')
                .map(|t| t.trim().parse::<i8>().map_err(|e| Error::Parse(format!("row {}: {e}", i + 1))))
                .collect::<Result<Vec<i8>>>()?;
            rows.push(row);
        }
        let k = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != k) {
            return Err(Error::Parse("ragged csv rows".into()));
        }
        Self::from_entries(rows.len(), k, rows.concat())
    }
}

/// `C^b = (C + J)/2`, entries in {0, 1}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryCodeSet {
    l: usize,
    k: usize,
    data: Vec<u8>,
}

impl BinaryCodeSet {
    pub fn l(&self) -> usize {
        self.l
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, r: usize, c: usize) -> u8 {
        self.data[r * self.k + c]
    }

    pub fn entries(&self) -> &[u8] {
        &self.data
    }
}

/// `H_{2^p}` by the Sylvester doubling, row-major.
pub fn sylvester_hadamard(p: u32) -> Vec<i8> {
    let mut h = vec![1i8];
    let mut n = 1usize;
    for _ in 0..p {
        let m = 2 * n;
        let mut next = vec![0i8; m * m];
        for r in 0..n {
            for c in 0..n {
                let v = h[r * n + c];
                next[r * m + c] = v;
                next[r * m + c + n] = v;
                next[(r + n) * m + c] = v;
                next[(r + n) * m + c + n] = -v;
            }
        }
        h = next;
        n = m;
    }
    h
}

/// Total number of ones in the binary expansions of `1..L`.
pub fn gamma(l: usize) -> usize {
    (1..l).map(|n| n.count_ones() as usize).sum()
}

pub fn seed_v8(variant: SeedVariant) -> SymbolMatrix {
    let a = FieldElem::alpha_pow;
    let (z, one) = (FieldElem::ZERO, FieldElem::ONE);
    let rows = match variant {
        SeedVariant::Eq10 => [[a(13), one, a(1), a(13), a(3)], [z, z, z, a(13), a(6)]],
        SeedVariant::Eq14 => [[a(14), one, a(1), a(3), a(3)], [z, z, z, a(3), a(6)]],
    };
    SymbolMatrix::from_rows(&rows.map(|r| r.to_vec())).expect("seed is rectangular")
}

/// The symbols placed by each R row: the leading three top-row symbols of the seed.
fn r_triple(variant: SeedVariant) -> [FieldElem; 3] {
    let s = seed_v8(variant);
    [s.get(0, 0), s.get(0, 1), s.get(0, 2)]
}

/// `V_L` for `L = 2^p ≥ 16`:
/// `[[V, V, R], [V, V⁻, 0]]` with `V = V_{L/2}`.
pub fn recurse_v(l: usize, variant: SeedVariant) -> Result<SymbolMatrix> {
    if !l.is_power_of_two() || l < 16 {
        return Err(Error::InvalidArgument(format!("recursion needs a power of two ≥ 16, got {l}")));
    }
    Ok(v_pow2(l, variant))
}

fn v_pow2(l: usize, variant: SeedVariant) -> SymbolMatrix {
    if l == 8 {
        return seed_v8(variant);
    }
    let v = v_pow2(l / 2, variant);
    let (half, n) = (v.block_rows(), v.cols());
    let m = l / 8;
    let r_cols = l / 2 - 1;
    let mut out = SymbolMatrix::zeros(2 * half, 2 * n + r_cols);
    out.paste(0, 0, &v);
    out.paste(0, n, &v);
    out.paste(half, 0, &v);
    out.paste(half, n, &v.negated());
    // Row i of R: 0⁻ at column 4i−1 (i ≥ 1), then the triple at 4i..4i+2.
    let t = r_triple(variant);
    for i in 0..m {
        if i > 0 {
            out.set(i, 2 * n + 4 * i - 1, FieldElem::NEG);
        }
        for (j, &e) in t.iter().enumerate() {
            out.set(i, 2 * n + 4 * i + j, e);
        }
    }
    out
}

fn split_extension(l_prime: usize) -> Result<(usize, usize)> {
    if l_prime % 4 != 0 || l_prime.is_power_of_two() || l_prime <= 8 {
        return Err(Error::InvalidArgument(format!(
            "extension needs L′ ≡ 0 mod 4, not a power of two, L′ > 8; got {l_prime}"
        )));
    }
    let l = 1usize << (usize::BITS - 1 - l_prime.leading_zeros());
    Ok((l, (l_prime - l) / 4))
}

/// `V_{L′}` for `L′ = L + 4m` with `L = 2^p < L′ < 2L`:
/// `[[V_L, 0], [0, R′]]`, where row `i` of `R′` carries `α^13, 1, α` at
/// columns `3i..3i+2`.
pub fn extend_v(l_prime: usize, variant: SeedVariant) -> Result<SymbolMatrix> {
    let (l, m) = split_extension(l_prime)?;
    let v = v_pow2(l, variant);
    let mut out = SymbolMatrix::zeros(v.block_rows() + m, v.cols() + 3 * m);
    out.paste(0, 0, &v);
    let a = FieldElem::alpha_pow;
    for i in 0..m {
        for (j, &e) in [a(13), FieldElem::ONE, a(1)].iter().enumerate() {
            out.set(v.block_rows() + i, v.cols() + 3 * i + j, e);
        }
    }
    Ok(out)
}

/// Replace each symbol by its 4-chip group vector; returns `(rows, cols, data)` row-major.
pub fn symbols_to_antipodal(s: &SymbolMatrix) -> (usize, usize, Vec<i8>) {
    let (rows, cols) = (4 * s.block_rows(), s.cols());
    let mut data = vec![0i8; rows * cols];
    for b in 0..s.block_rows() {
        for c in 0..cols {
            let g = phi_inv(s.get(b, c)).entries();
            for (t, &x) in g.iter().enumerate() {
                data[(4 * b + t) * cols + c] = x;
            }
        }
    }
    (rows, cols, data)
}

fn hstack(l: usize, left: &[i8], lk: usize, right: &[i8], rk: usize) -> Vec<i8> {
    let mut out = Vec::with_capacity(l * (lk + rk));
    for r in 0..l {
        out.extend_from_slice(&left[r * lk..(r + 1) * lk]);
        out.extend_from_slice(&right[r * rk..(r + 1) * rk]);
    }
    out
}

/// `C = [H | V]` for `L = 4`, `L = 2^p ≥ 8`, or `L ≡ 0 mod 4` via the extension.
pub fn build_code_set(l: usize, variant: SeedVariant) -> Result<CodeSet> {
    if l == 0 || l % 4 != 0 {
        return Err(Error::InvalidArgument(format!("L must be a positive multiple of 4, got {l}")));
    }
    if l == 4 {
        let h = sylvester_hadamard(2);
        let extra = [1i8, -1, 1, 1];
        return Ok(CodeSet::from_entries(4, 5, hstack(4, &h, 4, &extra, 1))?.with_variant(Some(variant)));
    }
    let (hl, hk, h, v) = if l.is_power_of_two() {
        (l, l, sylvester_hadamard(l.trailing_zeros()), v_pow2(l, variant))
    } else {
        // Leading L′×L′ block of H_{2L}.
        let (base, _) = split_extension(l)?;
        let big = 2 * base;
        let h2 = sylvester_hadamard(big.trailing_zeros());
        let h: Vec<i8> = (0..l).flat_map(|r| h2[r * big..r * big + l].to_vec()).collect();
        (l, l, h, extend_v(l, variant)?)
    };
    let (vr, vk, vd) = symbols_to_antipodal(&v);
    debug_assert_eq!(vr, hl);
    Ok(CodeSet::from_entries(l, hk + vk, hstack(l, &h, hk, &vd, vk))?.with_variant(Some(variant)))
}

/// `(C + J)/2` after flipping column signs so row 1 is all ones.
pub fn to_binary(c: &CodeSet) -> Result<BinaryCodeSet> {
    if c.l() == 0 {
        return Err(Error::InvalidArgument("empty code set".into()));
    }
    let flip: Vec<i8> = c.row(0).to_vec();
    let data = (0..c.l() * c.k())
        .map(|i| ((c.entries()[i] * flip[i % c.k()] + 1) / 2) as u8)
        .collect();
    Ok(BinaryCodeSet { l: c.l(), k: c.k(), data })
}
