//! The 16-element group of antipodal 4-vectors under componentwise product,
//! and its isomorphism onto the additive group of GF(2^4).
//!
//! Field elements use the polynomial basis: bit `k` is the coefficient of
//! `α^k`, with `α^4 = α + 1`.

use std::fmt;

use crate::error::Error;

/// An element of GF(2^4) in polynomial-basis form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FieldElem(u8);

/// `α^k` for k = 0..14.
const POW: [u8; 15] = {
    let mut t = [0u8; 15];
    let mut v: u8 = 1;
    let mut k = 0;
    while k < 15 {
        t[k] = v;
        v <<= 1;
        if v & 0x10 != 0 {
            v ^= 0b1_0011;
        }
        k += 1;
    }
    t
};

impl FieldElem {
    pub const ZERO: FieldElem = FieldElem(0);
    pub const ONE: FieldElem = FieldElem(1);
    /// Image of `h0⁻`; adding it negates the corresponding group vector.
    pub const NEG: FieldElem = FieldElem(0b0100);

    pub fn new(bits: u8) -> Result<Self, Error> {
        if bits < 16 {
            Ok(FieldElem(bits))
        } else {
            Err(Error::InvalidArgument(format!("field element {bits} out of range")))
        }
    }

    /// `α^k`, with `k` taken mod 15.
    pub const fn alpha_pow(k: u32) -> Self {
        FieldElem(POW[(k % 15) as usize])
    }

    pub const fn bits(self) -> u8 {
        self.0
    }

    /// Discrete log base α; `None` for zero.
    pub fn power(self) -> Option<u32> {
        POW.iter().position(|&p| p == self.0).map(|k| k as u32)
    }

    /// Power-form label such as `0`, `1`, `α`, `α^13`.
    pub fn label(self) -> String {
        match self.power() {
            None => "0".to_string(),
            Some(0) => "1".to_string(),
            Some(1) => "α".to_string(),
            Some(k) => format!("α^{k}"),
        }
    }

    pub fn negated(self) -> Self {
        field_add(self, Self::NEG)
    }

    pub fn all() -> impl Iterator<Item = FieldElem> {
        (0u8..16).map(FieldElem)
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// GF(2^4) addition.
pub fn field_add(a: FieldElem, b: FieldElem) -> FieldElem {
    FieldElem(a.0 ^ b.0)
}

/// One of the 16 antipodal 4-vectors `±h_i`, `±a_i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GroupVector([i8; 4]);

/// `phi_inv` as a table indexed by field bits.
const PHI_INV: [[i8; 4]; 16] = {
    // (power k, vector); zero handled separately.
    const P: i8 = 1;
    const M: i8 = -1;
    let by_power: [[i8; 4]; 15] = [
        [P, P, M, M], // 1      h2
        [P, M, P, M], // α      h1
        [M, M, M, M], // α^2    h0⁻
        [P, M, P, P], // α^3    a1
        [P, M, M, P], // α^4    h3
        [M, P, M, P], // α^5    h1⁻
        [M, P, M, M], // α^6    a1⁻
        [P, P, M, P], // α^7    a2
        [M, M, P, P], // α^8    h2⁻
        [P, P, P, M], // α^9    a3
        [M, P, P, M], // α^10   h3⁻
        [M, M, M, P], // α^11   a3⁻
        [M, M, P, M], // α^12   a2⁻
        [M, P, P, P], // α^13   a0
        [P, M, M, M], // α^14   a0⁻
    ];
    let mut t = [[P, P, P, P]; 16];
    let mut k = 0;
    while k < 15 {
        t[POW[k] as usize] = by_power[k];
        k += 1;
    }
    t
};

impl GroupVector {
    /// Validates a raw 4-vector as a group member.
    pub fn new(entries: [i8; 4]) -> Result<Self, Error> {
        let v = GroupVector(entries);
        phi(v).map(|_| v)
    }

    pub const fn entries(self) -> [i8; 4] {
        self.0
    }

    /// Sylvester-Hadamard column `h_i` of H4.
    pub fn h(i: usize) -> Self {
        let h = crate::codebook::sylvester_hadamard(2);
        GroupVector(std::array::from_fn(|r| h[r * 4 + i]))
    }

    /// All-ones with `-1` at position `i`.
    pub fn a(i: usize) -> Self {
        let mut e = [1i8; 4];
        e[i] = -1;
        GroupVector(e)
    }

    pub fn neg(self) -> Self {
        GroupVector(self.0.map(|x| -x))
    }

    pub fn all() -> impl Iterator<Item = GroupVector> {
        FieldElem::all().map(phi_inv)
    }
}

impl std::ops::Neg for GroupVector {
    type Output = GroupVector;
    fn neg(self) -> GroupVector {
        GroupVector::neg(self)
    }
}

/// Isomorphism from the group onto GF(2^4).
pub fn phi(v: GroupVector) -> Result<FieldElem, Error> {
    PHI_INV
        .iter()
        .position(|&w| w == v.0)
        .map(|i| FieldElem(i as u8))
        .ok_or_else(|| Error::InvalidArgument(format!("{:?} is not a group element", v.0)))
}

pub fn phi_inv(e: FieldElem) -> GroupVector {
    GroupVector(PHI_INV[e.0 as usize])
}

/// Componentwise product.
pub fn elementwise_mul(u: GroupVector, v: GroupVector) -> GroupVector {
    GroupVector(std::array::from_fn(|i| u.0[i] * v.0[i]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> GroupVector {
        GroupVector::new(std::array::from_fn(|i| if &s[i..i + 1] == "+" { 1 } else { -1 })).unwrap()
    }

    #[test]
    fn power_table() {
        let expect = [1, 2, 4, 8, 3, 6, 12, 11, 5, 10, 7, 14, 15, 13, 9];
        for (k, &e) in expect.iter().enumerate() {
            assert_eq!(FieldElem::alpha_pow(k as u32).bits(), e);
        }
    }

    #[test]
    fn add_examples() {
        let a = FieldElem::alpha_pow(1);
        assert_eq!(field_add(a, FieldElem::ONE), FieldElem::alpha_pow(4));
        assert_eq!(field_add(a, FieldElem::ONE).bits(), 0b0011);
        for x in FieldElem::all() {
            assert_eq!(field_add(FieldElem::ZERO, x), x);
            assert_eq!(field_add(x, x), FieldElem::ZERO);
        }
    }

    #[test]
    fn table_rows() {
        assert_eq!(phi(v("++++")).unwrap(), FieldElem::ZERO);
        assert_eq!(phi(v("++--")).unwrap(), FieldElem::ONE);
        assert_eq!(phi(v("+---")).unwrap(), FieldElem::alpha_pow(14));
        assert_eq!(FieldElem::alpha_pow(14).bits(), 0b1001);
        assert_eq!(phi_inv(FieldElem::alpha_pow(2)), v("----"));
        assert_eq!(phi_inv(FieldElem::alpha_pow(3)), GroupVector::a(1));
        assert_eq!(phi_inv(FieldElem::alpha_pow(13)), GroupVector::a(0));
        assert_eq!(phi_inv(FieldElem::alpha_pow(4)), GroupVector::h(3));
    }

    #[test]
    fn rejects_non_members() {
        assert!(GroupVector::new([1, 1, -1, 1]).is_ok());
        // every ±1 4-vector is in the group; only malformed entries fail
        assert!(GroupVector::new([1, 0, 1, 1]).is_err());
        assert!(FieldElem::new(16).is_err());
    }

    #[test]
    fn product_example() {
        assert_eq!(elementwise_mul(GroupVector::h(1), GroupVector::h(2)), GroupVector::h(3));
        for u in GroupVector::all() {
            assert_eq!(elementwise_mul(u, GroupVector::h(0)), u);
            assert_eq!(elementwise_mul(u, -GroupVector::h(0)), -u);
        }
    }

    #[test]
    fn labels() {
        assert_eq!(FieldElem::ZERO.label(), "0");
        assert_eq!(FieldElem::ONE.label(), "1");
        assert_eq!(FieldElem::alpha_pow(13).to_string(), "α^13");
    }
}
