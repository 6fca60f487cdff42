//! Recursive noiseless decoder.
//!
//! Works on `r = C·x′` with `x′ ∈ {0,1}^K`. At each level the difference of
//! the two row halves is twice an integer whose parity, row by row, depends
//! only on the R-block bits (plus one global constant); within a 4-row block
//! that parity pattern identifies the three bits of the block triple, and
//! comparing block offsets gives the `0⁻` column bits. With R known, the
//! half sums and differences are two independent half-size problems.

use crate::codebook::{build_code_set, CodeSet, SeedVariant};
use crate::decode::{to_pm, DecodeResult};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
enum Node {
    /// `[H4 | v]`; `w = H4ᵀ·v`.
    Leaf { w: [i64; 4] },
    Split(Box<Split>),
}

#[derive(Clone, Debug)]
struct Split {
    l: usize,
    k: usize,
    a: Node,
    b: Node,
    /// Offsets within this level's V part.
    w1: Vec<usize>,
    w2: Vec<usize>,
    r: Vec<usize>,
    blocks: Vec<Block>,
}

#[derive(Clone, Debug)]
struct Block {
    /// Indices into `Split::r` of the three triple columns.
    triple: [usize; 3],
    /// Index into `Split::r` of the all-rows column, absent for block 0.
    full: Option<usize>,
    /// −1 masks of the triple columns over the block's 4 rows.
    masks: [u8; 4 - 1],
    /// Triple bits for each observed parity mask; `None` when inconsistent.
    exact: [Option<u8>; 16],
    /// Nearest valid triple for each mask, for the tolerant path.
    nearest: [u8; 16],
}

impl Block {
    fn new(triple: [usize; 3], full: Option<usize>, masks: [u8; 3]) -> Self {
        let mut exact = [None; 16];
        let mut nearest = [0u8; 16];
        let pattern = |e: u8| (0..3).filter(|&t| e >> t & 1 == 1).fold(0u8, |m, t| m ^ masks[t]);
        for q in 0u8..16 {
            let mut best = (u32::MAX, 0u8);
            for e in 0u8..8 {
                let d = q ^ pattern(e);
                // equal up to the global constant: 0000 or 1111
                let dist = d.count_ones().min((d ^ 0xF).count_ones());
                if dist == 0 && exact[q as usize].is_none() {
                    exact[q as usize] = Some(e);
                }
                if dist < best.0 {
                    best = (dist, e);
                }
            }
            nearest[q as usize] = best.1;
        }
        Block { triple, full, masks, exact, nearest }
    }
}

fn neg_mask(col: &[i8]) -> u8 {
    col.iter().enumerate().fold(0u8, |m, (t, &v)| if v < 0 { m | 1 << t } else { m })
}

fn h4t(v: &[i64; 4]) -> [i64; 4] {
    [v[0] + v[1] + v[2] + v[3], v[0] - v[1] + v[2] - v[3], v[0] + v[1] - v[2] - v[3], v[0] - v[1] - v[2] + v[3]]
}

fn leaf(v: [i8; 4]) -> Node {
    Node::Leaf { w: h4t(&v.map(i64::from)) }
}

/// Structure of the code at level `l` given the full matrix `c` of that level.
fn build(l: usize, variant: SeedVariant) -> Result<(Node, CodeSet)> {
    let c = build_code_set(l, variant)?;
    if l == 4 {
        let v: [i8; 4] = std::array::from_fn(|r| c.get(r, 4));
        return Ok((leaf(v), c));
    }
    let half = l / 2;
    let kv = c.k() - l;
    let (a, b, w1, w2, r) = if l == 8 {
        let top = |col: usize| std::array::from_fn(|t| c.get(t, l + col));
        (leaf(top(3)), leaf(top(4)), vec![3], vec![4], vec![0, 1, 2])
    } else {
        let (sub, sc) = build(half, variant)?;
        let n = sc.k() - half;
        (sub.clone(), sub, (0..n).collect(), (n..2 * n).collect(), (2 * n..kv).collect())
    };
    let m = half / 4;
    let blocks = (0..m)
        .map(|i| {
            let (triple, full) = if l == 8 { ([0, 1, 2], None) } else { ([4 * i, 4 * i + 1, 4 * i + 2], (i > 0).then(|| 4 * i - 1)) };
            let masks = triple.map(|j| {
                let col: Vec<i8> = (0..4).map(|t| c.get(4 * i + t, l + r[j])).collect();
                neg_mask(&col)
            });
            Block::new(triple, full, masks)
        })
        .collect();
    Ok((Node::Split(Box::new(Split { l, k: c.k(), a, b, w1, w2, r, blocks })), c))
}

fn halve(v: i64, strict: bool, what: &str) -> Result<i64> {
    if strict && v % 2 != 0 {
        return Err(Error::Inconsistent(format!("{what} is odd")));
    }
    Ok(v.div_euclid(2))
}

impl Node {
    fn k(&self) -> usize {
        match self {
            Node::Leaf { .. } => 5,
            Node::Split(s) => s.k,
        }
    }

    /// Writes `x′` for this level into `out` (length `k`).
    fn decode(&self, r: &[i64], out: &mut [u8], strict: bool) -> Result<()> {
        match self {
            Node::Leaf { w } => decode_leaf(w, r, out, strict),
            Node::Split(s) => s.decode(r, out, strict),
        }
    }
}

fn decode_leaf(w: &[i64; 4], r: &[i64], out: &mut [u8], strict: bool) -> Result<()> {
    let u = h4t(&[r[0], r[1], r[2], r[3]]);
    // u = 4·a + xv·w with a ∈ {0,1}^4
    let fit = |xv: i64| {
        let mut bits = [0u8; 4];
        let mut err = 0i64;
        let mut ok = true;
        for i in 0..4 {
            let t = u[i] - xv * w[i];
            ok &= t == 0 || t == 4;
            bits[i] = (t >= 2) as u8;
            err += (t - 4 * bits[i] as i64).abs();
        }
        (ok, err, bits)
    };
    let (ok0, e0, b0) = fit(0);
    let (ok1, e1, b1) = fit(1);
    let (xv, bits) = match (ok0, ok1) {
        (true, false) => (0, b0),
        (false, true) => (1, b1),
        (true, true) => return Err(Error::Inconsistent("ambiguous 4-row block".into())),
        (false, false) if strict => return Err(Error::Inconsistent("4-row block has no 0/1 solution".into())),
        (false, false) => if e1 < e0 { (1, b1) } else { (0, b0) },
    };
    out[..4].copy_from_slice(&bits);
    out[4] = xv;
    Ok(())
}

impl Split {
    fn decode(&self, r: &[i64], out: &mut [u8], strict: bool) -> Result<()> {
        let half = self.l / 2;
        let (top, bot) = r.split_at(half);
        let mut q = vec![0u8; half];
        for j in 0..half {
            let d = halve(top[j] - bot[j], strict, "row-half difference")?;
            q[j] = d.rem_euclid(2) as u8;
        }
        let mut e = vec![0u8; self.r.len()];
        let mut offsets = Vec::with_capacity(self.blocks.len());
        for (i, blk) in self.blocks.iter().enumerate() {
            let qm = (0..4).fold(0u8, |m, t| m | q[4 * i + t] << t);
            let bits = match blk.exact[qm as usize] {
                Some(b) => b,
                None if strict => return Err(Error::Inconsistent(format!("mod-4 residues of block {i} fit no column choice"))),
                None => blk.nearest[qm as usize],
            };
            let mut p = 0u8;
            for t in 0..3 {
                let bit = bits >> t & 1;
                e[blk.triple[t]] = bit;
                if bit == 1 {
                    p ^= blk.masks[t];
                }
            }
            offsets.push((qm ^ p) & 1);
        }
        for (i, blk) in self.blocks.iter().enumerate() {
            if let Some(f) = blk.full {
                e[f] = offsets[i] ^ offsets[0];
            }
        }
        // strip R: top rows carry Σe − 2·#(set bits with −1), bottom rows Σe
        let s: i64 = e.iter().map(|&b| b as i64).sum();
        let mut tp: Vec<i64> = top.iter().map(|&v| v - s).collect();
        for (i, blk) in self.blocks.iter().enumerate() {
            for t in 0..3 {
                if e[blk.triple[t]] == 1 {
                    for row in 0..4 {
                        if blk.masks[t] >> row & 1 == 1 {
                            tp[4 * i + row] += 2;
                        }
                    }
                }
            }
            if let Some(f) = blk.full {
                if e[f] == 1 {
                    for row in 0..4 {
                        tp[4 * i + row] += 2;
                    }
                }
            }
        }
        let mut ra = Vec::with_capacity(half);
        let mut rb = Vec::with_capacity(half);
        for j in 0..half {
            let bp = bot[j] - s;
            ra.push(halve(tp[j] + bp, strict, "half sum")?);
            rb.push(halve(tp[j] - bp, strict, "half difference")?);
        }
        let mut xa = vec![0u8; self.a.k()];
        let mut xb = vec![0u8; self.b.k()];
        self.a.decode(&ra, &mut xa, strict)?;
        self.b.decode(&rb, &mut xb, strict)?;
        out[..half].copy_from_slice(&xa[..half]);
        out[half..self.l].copy_from_slice(&xb[..half]);
        let v = &mut out[self.l..];
        for (t, &pos) in self.w1.iter().enumerate() {
            v[pos] = xa[half + t];
        }
        for (t, &pos) in self.w2.iter().enumerate() {
            v[pos] = xb[half + t];
        }
        for (t, &pos) in self.r.iter().enumerate() {
            v[pos] = e[t];
        }
        Ok(())
    }
}

/// Prebuilt decoder for one constructed code set (`L = 4` or `L = 2^p ≥ 8`).
#[derive(Clone, Debug)]
pub struct NdaDecoder {
    root: Node,
    l: usize,
    k: usize,
}

impl NdaDecoder {
    /// Fails unless `c` is exactly a constructed power-of-two code set.
    pub fn new(c: &CodeSet) -> Result<Self> {
        let l = c.l();
        if !(l == 4 || (l.is_power_of_two() && l >= 8)) {
            return Err(Error::InvalidArgument(format!("recursive decoding needs L = 4 or a power of two ≥ 8, got {l}")));
        }
        let variants = match c.variant() {
            Some(v) => vec![v],
            None => vec![SeedVariant::Eq10, SeedVariant::Eq14],
        };
        for v in variants {
            let (root, built) = build(l, v)?;
            if built.entries() == c.entries() {
                return Ok(NdaDecoder { root, l, k: c.k() });
            }
        }
        Err(Error::InvalidArgument("matrix is not a constructed code set".into()))
    }

    pub fn l(&self) -> usize {
        self.l
    }

    /// Strict decode of `r = C·x′`; returns `x′` as 0/1.
    pub fn decode01(&self, r: &[i64]) -> Result<Vec<u8>> {
        self.run(r, true)
    }

    /// Never fails: inconsistent residues resolve to the nearest valid choice.
    pub(crate) fn decode01_tolerant(&self, r: &[i64]) -> Vec<u8> {
        self.run(r, false).expect("tolerant decoding does not fail")
    }

    fn run(&self, r: &[i64], strict: bool) -> Result<Vec<u8>> {
        if r.len() != self.l {
            return Err(Error::InvalidArgument(format!("observation has {} entries, expected {}", r.len(), self.l)));
        }
        let mut out = vec![0u8; self.k];
        self.root.decode(r, &mut out, strict)?;
        Ok(out)
    }

    pub fn decode(&self, r: &[i32]) -> Result<DecodeResult> {
        let r: Vec<i64> = r.iter().map(|&v| v as i64).collect();
        let x = self.decode01(&r)?;
        Ok(DecodeResult { bits: to_pm(&x), iterations: 1, backtracks: 0, exact: true })
    }
}

/// Recovers `x` from `r = (C·x + C·1)/2`.
pub fn nda_decode(r: &[i32], c: &CodeSet) -> Result<DecodeResult> {
    let d = NdaDecoder::new(c)?;
    let out = d.decode(r)?;
    // noiseless observations reproduce exactly; anything else is not a lattice point
    let x01: Vec<i32> = out.bits.iter().map(|&b| ((b + 1) / 2) as i32).collect();
    if c.mul(&x01) != r {
        return Err(Error::Inconsistent("observation is not C·x′ for any binary x′".into()));
    }
    Ok(out)
}
