//! Classification of the 120 sign-canonical 8-vectors `B8+` that may be
//! appended to H8, forbidden pairs, and the five-column maximality sweep.

use std::collections::{BTreeMap, HashSet};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::codebook::{sylvester_hadamard, symbols_to_antipodal, CodeSet};
use crate::error::{Error, Result};
use crate::fixtures;
use crate::verify::is_ud_exhaustive;

pub type Vec8 = [i8; 8];

fn neg_count(v: &Vec8) -> usize {
    v.iter().filter(|&&x| x < 0).count()
}

/// Representative of `{v, −v}`: fewer than four −1 entries, or exactly four with `v[0] = +1`.
pub fn canonical8(v: Vec8) -> Vec8 {
    let n = neg_count(&v);
    if n > 4 || (n == 4 && v[0] < 0) {
        v.map(|x| -x)
    } else {
        v
    }
}

fn h8_columns() -> Vec<Vec8> {
    let h = sylvester_hadamard(3);
    (0..8).map(|c| std::array::from_fn(|r| h[r * 8 + c])).collect()
}

/// The 120 canonical vectors outside ±H8, ordered by −1 count, then by the
/// positions of their −1 entries.
pub fn enumerate_b8_plus() -> Vec<Vec8> {
    let h: HashSet<Vec8> = h8_columns().into_iter().map(canonical8).collect();
    let mut out: Vec<Vec8> = (0u32..256)
        .map(|m| std::array::from_fn(|i| if m >> i & 1 == 1 { -1 } else { 1 }))
        .filter(|v: &Vec8| canonical8(*v) == *v && !h.contains(v))
        .collect();
    out.sort_by_key(|v| (neg_count(v), v.iter().map(|&x| x > 0).collect::<Vec<_>>()));
    out
}

/// All values `H8·z`, `z ∈ {0, ±1}^8`.
fn h8_lattice() -> HashSet<[i32; 8]> {
    let h = h8_columns();
    let mut set = HashSet::with_capacity(6561);
    for idx in 0..6561u32 {
        let mut s = [0i32; 8];
        let mut t = idx;
        for col in &h {
            let d = (t % 3) as i32 - 1;
            t /= 3;
            for r in 0..8 {
                s[r] += d * col[r] as i32;
            }
        }
        set.insert(s);
    }
    set
}

/// `[H8 | V]` is UD iff no nonzero `V·z2` equals some `H8·z1`
/// (H8 is invertible, so `z2 = 0` forces `z1 = 0`).
pub fn is_ud_over_h8(v: &[Vec8]) -> bool {
    is_ud_over_lattice(v, &h8_lattice())
}

fn is_ud_over_lattice(v: &[Vec8], lattice: &HashSet<[i32; 8]>) -> bool {
    let n = v.len() as u32;
    (1..3u64.pow(n)).all(|idx| {
        let mut s = [0i32; 8];
        let mut t = idx + (3u64.pow(n) - 1) / 2;
        let mut nonzero = false;
        for col in v {
            let d = (t % 3) as i32 - 1;
            t /= 3;
            nonzero |= d != 0;
            for r in 0..8 {
                s[r] += d * col[r] as i32;
            }
        }
        !nonzero || !lattice.contains(&s)
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ForbiddenPairs {
    pub total_pairs: usize,
    pub forbidden: usize,
    /// Forbidden count keyed by the −1 counts of the two members, e.g. "1+3".
    pub by_weight: BTreeMap<String, usize>,
}

/// Unordered pairs `{v1, v2} ⊂ B8+` with `[H8 | v1 v2]` not UD.
pub fn count_forbidden_pairs() -> ForbiddenPairs {
    let b = enumerate_b8_plus();
    let lattice = h8_lattice();
    let hits = |a: &Vec8, c: &Vec8| {
        [(1, 0), (0, 1), (1, 1), (1, -1)].iter().any(|&(x, y)| {
            let s: [i32; 8] = std::array::from_fn(|r| x * a[r] as i32 + y * c[r] as i32);
            // the lattice is symmetric, so ±(x·a + y·c) need one lookup
            lattice.contains(&s)
        })
    };
    let mut by_weight = BTreeMap::new();
    let mut forbidden = 0;
    for i in 0..b.len() {
        for j in i + 1..b.len() {
            if hits(&b[i], &b[j]) {
                forbidden += 1;
                let (p, q) = (neg_count(&b[i]), neg_count(&b[j]));
                *by_weight.entry(format!("{}+{}", p.min(q), p.max(q))).or_insert(0) += 1;
            }
        }
    }
    ForbiddenPairs { total_pairs: b.len() * (b.len() - 1) / 2, forbidden, by_weight }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, PartialOrd, Ord)]
pub enum ClassKind {
    A,
    D,
    G,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GroupClass {
    pub label: String,
    pub kind: ClassKind,
    pub members: Vec<Vec8>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RuleCheck {
    pub rule: String,
    pub holds: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Classification {
    pub classes: Vec<GroupClass>,
    pub rules: Vec<RuleCheck>,
}

/// Partition `B8+` by "appending both to H8 breaks UD", check it against the
/// listed classes, and evaluate the class-product rules.
pub fn classify_groups() -> Result<Classification> {
    let b = enumerate_b8_plus();
    let lattice = h8_lattice();
    let index = |v: &Vec8| b.iter().position(|w| w == v);

    // union-find over forbidden pairs
    let mut parent: Vec<usize> = (0..b.len()).collect();
    fn root(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut edges = 0usize;
    for i in 0..b.len() {
        for j in i + 1..b.len() {
            if !is_ud_over_lattice(&[b[i], b[j]], &lattice) {
                edges += 1;
                let (ri, rj) = (root(&mut parent, i), root(&mut parent, j));
                parent[ri] = rj;
            }
        }
    }
    let mut comps: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..b.len() {
        let r = root(&mut parent, i);
        comps.entry(r).or_default().push(i);
    }
    // The relation is an equivalence only if every component is a clique.
    let clique_edges: usize = comps.values().map(|c| c.len() * (c.len() - 1) / 2).sum();
    if clique_edges != edges {
        return Err(Error::Inconsistent(format!(
            "incompatibility is not transitive: {edges} forbidden pairs vs {clique_edges} within components"
        )));
    }

    let listing = fixtures::b8_class_listing()?;
    let mut classes = Vec::new();
    let mut owner = vec![usize::MAX; b.len()];
    for (label, sym) in &listing {
        let (_, n, data) = symbols_to_antipodal(sym);
        let members: Vec<Vec8> = (0..n).map(|c| canonical8(std::array::from_fn(|r| data[r * n + c]))).collect();
        let idx: Vec<usize> = members
            .iter()
            .map(|v| index(v).ok_or_else(|| Error::Inconsistent(format!("{label} lists a vector outside B8+"))))
            .collect::<Result<_>>()?;
        let comp = comps.values().find(|c| c.contains(&idx[0])).expect("every vector has a component");
        let mut sorted = idx.clone();
        sorted.sort_unstable();
        if &sorted != comp {
            return Err(Error::Inconsistent(format!("listed class {label} differs from the computed class")));
        }
        let kind = match &label[..1] {
            "A" => ClassKind::A,
            "D" => ClassKind::D,
            "G" => ClassKind::G,
            _ => return Err(Error::Parse(format!("unknown class label {label}"))),
        };
        let expect = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::Inconsistent(format!("class {label}: {what}")))
            }
        };
        let weights: Vec<usize> = members.iter().map(neg_count).collect();
        match kind {
            ClassKind::A => expect(members.len() == 8 && weights.iter().all(|&w| w == 1 || w == 3), "A classes have 8 members of weight 1 or 3")?,
            ClassKind::D => expect(members.len() == 4 && weights.iter().all(|&w| w == 2), "D classes have 4 members of weight 2")?,
            ClassKind::G => expect(members.len() == 4 && weights.iter().all(|&w| w == 4), "G classes have 4 members of weight 4")?,
        }
        for &i in &idx {
            owner[i] = classes.len();
        }
        classes.push(GroupClass { label: label.clone(), kind, members });
    }
    if owner.contains(&usize::MAX) || classes.len() != comps.len() {
        return Err(Error::Inconsistent("listed classes do not cover B8+".into()));
    }

    let rules = product_rules(&classes, &b, &owner);
    Ok(Classification { classes, rules })
}

/// The set of classes hit by `u ⊙ v` over `u ∈ P`, `v ∈ Q`; `None` marks ±H8.
fn product_targets(p: &GroupClass, q: &GroupClass, b: &[Vec8], owner: &[usize]) -> Vec<Option<usize>> {
    let mut out: Vec<Option<usize>> = Vec::new();
    for u in &p.members {
        for v in &q.members {
            let w = canonical8(std::array::from_fn(|r| u[r] * v[r]));
            let t = b.iter().position(|x| *x == w).map(|i| owner[i]);
            if !out.contains(&t) {
                out.push(t);
            }
        }
    }
    out.sort();
    out
}

fn class_number(label: &str) -> usize {
    label[1..].parse().unwrap_or(0)
}

fn product_rules(classes: &[GroupClass], b: &[Vec8], owner: &[usize]) -> Vec<RuleCheck> {
    let pairs = |x: ClassKind, y: ClassKind| {
        let mut v = Vec::new();
        for (i, p) in classes.iter().enumerate() {
            for (j, q) in classes.iter().enumerate() {
                if i < j && p.kind == x && q.kind == y || (x != y && p.kind == x && q.kind == y) {
                    v.push((p, q));
                }
            }
        }
        v
    };
    let single = |t: &[Option<usize>], k: ClassKind| t.len() == 1 && t[0].is_some_and(|i| classes[i].kind == k);
    // D_j ∪ G_{8−j}
    let coupled = |t: &[Option<usize>]| {
        t.len() == 2
            && t.iter().all(Option::is_some)
            && classes[t[0].unwrap()].kind == ClassKind::D
            && classes[t[1].unwrap()].kind == ClassKind::G
            && class_number(&classes[t[0].unwrap()].label) + class_number(&classes[t[1].unwrap()].label) == 8
    };
    let mut rules = Vec::new();
    let mut push = |rule: &str, x: ClassKind, y: ClassKind, pred: &dyn Fn(&[Option<usize>]) -> bool| {
        let ps = pairs(x, y);
        let bad = ps.iter().filter(|(p, q)| !pred(&product_targets(p, q, b, owner))).count();
        let example = ps.first().map(|(p, q)| {
            let t = product_targets(p, q, b, owner);
            let names: Vec<String> = t.iter().map(|o| o.map_or("H".to_string(), |i| classes[i].label.clone())).collect();
            format!("{} ⊙ {} -> {{{}}}", p.label, q.label, names.join(", "))
        });
        rules.push(RuleCheck {
            rule: rule.to_string(),
            holds: bad == 0,
            detail: format!("{} of {} class pairs satisfy it; e.g. {}", ps.len() - bad, ps.len(), example.unwrap_or_default()),
        });
    };
    push("A_i ⊙ A_j = D_k ∪ G_(8-k)", ClassKind::A, ClassKind::A, &coupled);
    push("A ⊙ D = A", ClassKind::A, ClassKind::D, &|t| single(t, ClassKind::A));
    push("D ⊙ D = G", ClassKind::D, ClassKind::D, &|t| single(t, ClassKind::G));
    push("D ⊙ D ⊆ D_k ∪ G_(8-k)", ClassKind::D, ClassKind::D, &coupled);
    push("G ⊙ G = G", ClassKind::G, ClassKind::G, &|t| single(t, ClassKind::G));
    push("G ⊙ G ⊆ D_k ∪ G_(8-k)", ClassKind::G, ClassKind::G, &coupled);
    rules
}

#[derive(Clone, Debug, Serialize)]
pub struct MaxAppendReport {
    pub v1_ud: bool,
    pub v2_ud: bool,
    /// V2 read from its −1 position listing instead of its matrix.
    pub v2_listing_ud: bool,
    pub extensions_tested: usize,
    pub extensions_blocked: usize,
}

fn fixture_columns(text: &str) -> Vec<Vec8> {
    let c = fixtures::parse(text);
    (0..c.k()).map(|j| std::array::from_fn(|r| c.get(r, j))).collect()
}

pub fn v1_columns() -> Vec<Vec8> {
    fixture_columns(fixtures::V1)
}

pub fn v2_columns() -> Vec<Vec8> {
    fixture_columns(fixtures::V2)
}

/// V2 with column 4 taken from its listed −1 positions {2, 5}.
pub fn v2_listing_columns() -> Vec<Vec8> {
    let mut v = v2_columns();
    v[3] = std::array::from_fn(|r| if r == 2 || r == 5 { -1 } else { 1 });
    v
}

pub fn h8_with(v: &[Vec8]) -> CodeSet {
    let mut cols: Vec<Vec<i8>> = h8_columns().into_iter().map(|c| c.to_vec()).collect();
    cols.extend(v.iter().map(|c| c.to_vec()));
    CodeSet::from_columns(8, &cols).expect("8-row columns")
}

/// Checks the two five-column examples and that no sixth `B8+` vector can join V1.
pub fn verify_max_append() -> Result<MaxAppendReport> {
    let v1 = v1_columns();
    let v1_ud = is_ud_exhaustive(&h8_with(&v1))?.is_pass();
    let v2_ud = is_ud_exhaustive(&h8_with(&v2_columns()))?.is_pass();
    let v2_listing_ud = is_ud_exhaustive(&h8_with(&v2_listing_columns()))?.is_pass();
    let canon: Vec<Vec8> = v1.iter().map(|&c| canonical8(c)).collect();
    let rest: Vec<Vec8> = enumerate_b8_plus().into_iter().filter(|v| !canon.contains(v)).collect();
    let lattice = h8_lattice();
    let blocked = rest
        .par_iter()
        .filter(|v| {
            let mut six = v1.clone();
            six.push(**v);
            !is_ud_over_lattice(&six, &lattice)
        })
        .count();
    Ok(MaxAppendReport { v1_ud, v2_ud, v2_listing_ud, extensions_tested: rest.len(), extensions_blocked: blocked })
}

#[derive(Clone, Debug, Serialize)]
pub struct PatternReport {
    /// Class kinds of the five columns, e.g. "ADDDG".
    pub pattern: String,
    pub realizable: bool,
    /// Draws examined before the verdict.
    pub draws: usize,
    /// A realizing choice of class labels, if found.
    pub example: Option<Vec<String>>,
}

/// For each multiset of five class kinds, searches random picks of one vector
/// from each of five distinct classes for a UD extension of H8.
pub fn combination_patterns(draws: usize, seed: u64) -> Result<Vec<PatternReport>> {
    let cls = classify_groups()?;
    let lattice = h8_lattice();
    let by_kind = |k: ClassKind| cls.classes.iter().filter(|c| c.kind == k).collect::<Vec<_>>();
    let kinds = [(ClassKind::A, 'A'), (ClassKind::D, 'D'), (ClassKind::G, 'G')];
    let mut out = Vec::new();
    for na in 0..=5usize {
        for nd in 0..=5 - na {
            let ng = 5 - na - nd;
            let pattern: String =
                [(na, 'A'), (nd, 'D'), (ng, 'G')].iter().flat_map(|&(n, ch)| std::iter::repeat_n(ch, n)).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (na * 6 + nd) as u64);
            let mut found = None;
            let mut used = 0;
            for _ in 0..draws {
                used += 1;
                let mut pick: Vec<&GroupClass> = Vec::new();
                for (&(k, _), &n) in kinds.iter().zip(&[na, nd, ng]) {
                    let mut pool = by_kind(k);
                    pool.shuffle(&mut rng);
                    pick.extend(pool.into_iter().take(n));
                }
                let v: Vec<Vec8> = pick.iter().map(|c| *c.members.choose(&mut rng).expect("nonempty class")).collect();
                if is_ud_over_lattice(&v, &lattice) {
                    found = Some(pick.iter().map(|c| c.label.clone()).collect());
                    break;
                }
            }
            out.push(PatternReport { pattern, realizable: found.is_some(), draws: used, example: found });
        }
    }
    Ok(out)
}
