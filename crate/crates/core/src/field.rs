//! Arithmetic over GF(2^w) for w = 8 and w = 16.
//!
//! Multiplication goes through log/antilog tables generated from the
//! primitive element `eta`. Tables are built once per width and shared.

use std::fmt;
use std::ops::{Add, AddAssign, Sub, SubAssign};
use std::sync::OnceLock;

use crate::error::{param_err, Error, Result};

/// x^8 + x^4 + x^3 + x^2 + 1
pub const POLY_GF256: u32 = 0x11D;
/// x^16 + x^12 + x^3 + x + 1
pub const POLY_GF65536: u32 = 0x1100B;

/// A field symbol. Width-agnostic storage; range checks happen in
/// [`GaloisField::element`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct GfElement(u16);

impl GfElement {
    pub const ZERO: GfElement = GfElement(0);
    pub const ONE: GfElement = GfElement(1);

    pub fn value(self) -> u16 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub(crate) const fn raw(v: u16) -> Self {
        GfElement(v)
    }
}

impl fmt::Debug for GfElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}", self.0)
    }
}

impl fmt::Display for GfElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}", self.0)
    }
}

// Characteristic 2: addition and subtraction are both XOR.
impl Add for GfElement {
    type Output = GfElement;
    fn add(self, rhs: GfElement) -> GfElement {
        GfElement(self.0 ^ rhs.0)
    }
}

impl AddAssign for GfElement {
    fn add_assign(&mut self, rhs: GfElement) {
        self.0 ^= rhs.0;
    }
}

impl Sub for GfElement {
    type Output = GfElement;
    fn sub(self, rhs: GfElement) -> GfElement {
        GfElement(self.0 ^ rhs.0)
    }
}

impl SubAssign for GfElement {
    fn sub_assign(&mut self, rhs: GfElement) {
        self.0 ^= rhs.0;
    }
}

impl std::iter::Sum for GfElement {
    fn sum<I: Iterator<Item = GfElement>>(iter: I) -> GfElement {
        iter.fold(GfElement::ZERO, |acc, x| acc + x)
    }
}

/// Defining constants of a binary extension field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FieldSpec {
    /// Bit width, 8 or 16.
    pub width: u8,
    /// Reduction polynomial including the x^w term.
    pub reduction_polynomial: u32,
    /// Generator of the multiplicative group.
    pub eta: u16,
}

impl FieldSpec {
    pub const GF256: FieldSpec = FieldSpec {
        width: 8,
        reduction_polynomial: POLY_GF256,
        eta: 2,
    };

    pub const GF65536: FieldSpec = FieldSpec {
        width: 16,
        reduction_polynomial: POLY_GF65536,
        eta: 2,
    };

    pub fn for_width(width: u8) -> Result<FieldSpec> {
        match width {
            8 => Ok(Self::GF256),
            16 => Ok(Self::GF65536),
            w => param_err(format!("unsupported field width {w}; expected 8 or 16")),
        }
    }

    /// Number of field elements, 2^w.
    pub fn size(&self) -> usize {
        1usize << self.width
    }

    /// Order of the multiplicative group, 2^w - 1.
    pub fn group_order(&self) -> usize {
        self.size() - 1
    }
}

/// Log/antilog tables for one field.
pub struct GaloisField {
    spec: FieldSpec,
    // exp has 2 * order entries so log(a) + log(b) never needs a modulo.
    exp: Vec<u16>,
    log: Vec<u32>,
}

impl fmt::Debug for GaloisField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GaloisField").field("spec", &self.spec).finish()
    }
}

static GF256_TABLES: OnceLock<GaloisField> = OnceLock::new();
static GF65536_TABLES: OnceLock<GaloisField> = OnceLock::new();

impl GaloisField {
    /// Build tables for `spec`, rejecting generators that are not primitive.
    pub fn new(spec: FieldSpec) -> Result<GaloisField> {
        if spec.width != 8 && spec.width != 16 {
            return param_err(format!("unsupported field width {}", spec.width));
        }
        let size = spec.size();
        let order = spec.group_order();
        if spec.eta == 0 || spec.eta as usize >= size {
            return param_err(format!("generator {:#x} is not a nonzero field element", spec.eta));
        }
        let mut exp = vec![0u16; 2 * order];
        let mut log = vec![0u32; size];
        let mut x: u32 = 1;
        for (i, slot) in exp.iter_mut().take(order).enumerate() {
            if i > 0 && x == 1 {
                return Err(Error::Parameter(format!(
                    "{:#x} has multiplicative order {i} < {order}; not primitive",
                    spec.eta
                )));
            }
            *slot = x as u16;
            log[x as usize] = i as u32;
            x = shift_mul(x, spec.eta as u32, spec.reduction_polynomial, spec.width);
        }
        if x != 1 {
            return param_err(format!(
                "polynomial {:#x} does not yield a cyclic group for {:#x}",
                spec.reduction_polynomial, spec.eta
            ));
        }
        for i in order..2 * order {
            exp[i] = exp[i - order];
        }
        Ok(GaloisField { spec, exp, log })
    }

    /// Shared tables for one of the two fixed fields.
    pub fn for_width(width: u8) -> Result<&'static GaloisField> {
        let spec = FieldSpec::for_width(width)?;
        let cell = if width == 8 { &GF256_TABLES } else { &GF65536_TABLES };
        Ok(cell.get_or_init(|| GaloisField::new(spec).expect("fixed field constants are valid")))
    }

    pub fn spec(&self) -> FieldSpec {
        self.spec
    }

    pub fn width(&self) -> u8 {
        self.spec.width
    }

    pub fn element(&self, value: u32) -> Result<GfElement> {
        if (value as usize) < self.spec.size() {
            Ok(GfElement(value as u16))
        } else {
            param_err(format!("{value:#x} is outside GF(2^{})", self.spec.width))
        }
    }

    pub fn eta(&self) -> GfElement {
        GfElement(self.spec.eta)
    }

    #[inline]
    pub fn add(&self, a: GfElement, b: GfElement) -> GfElement {
        a + b
    }

    #[inline]
    pub fn mul(&self, a: GfElement, b: GfElement) -> GfElement {
        if a.0 == 0 || b.0 == 0 {
            return GfElement::ZERO;
        }
        let l = self.log[a.0 as usize] + self.log[b.0 as usize];
        GfElement(self.exp[l as usize])
    }

    pub fn inv(&self, a: GfElement) -> Result<GfElement> {
        if a.0 == 0 {
            return Err(Error::Domain("inverse of zero".into()));
        }
        let order = self.spec.group_order() as u32;
        let l = self.log[a.0 as usize];
        Ok(GfElement(self.exp[((order - l) % order) as usize]))
    }

    pub fn div(&self, a: GfElement, b: GfElement) -> Result<GfElement> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: GfElement, e: u64) -> GfElement {
        if e == 0 {
            return GfElement::ONE;
        }
        if a.0 == 0 {
            return GfElement::ZERO;
        }
        let order = self.spec.group_order() as u64;
        let l = (self.log[a.0 as usize] as u64 * (e % order)) % order;
        GfElement(self.exp[l as usize])
    }

    /// eta^e
    pub fn eta_pow(&self, e: u64) -> GfElement {
        let order = self.spec.group_order() as u64;
        GfElement(self.exp[(e % order) as usize])
    }

    /// Inner product of two equal-length symbol slices.
    pub fn dot(&self, coeffs: &[GfElement], values: &[GfElement]) -> GfElement {
        debug_assert_eq!(coeffs.len(), values.len());
        coeffs
            .iter()
            .zip(values)
            .fold(GfElement::ZERO, |acc, (&c, &v)| acc + self.mul(c, v))
    }
}

/// Shift-and-add multiply, used only while generating tables.
fn shift_mul(mut a: u32, mut b: u32, poly: u32, width: u8) -> u32 {
    let mut acc = 0u32;
    while b != 0 {
        if b & 1 != 0 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a >> width != 0 {
            a ^= poly;
        }
    }
    acc
}

/// Coefficient matrix with `m` rows and `k` columns whose entry at
/// 1-based (j, c) is eta^(c * (j - 1)).
pub fn parity_vectors(k: usize, m: usize, field: &GaloisField) -> Result<Vec<Vec<GfElement>>> {
    if k == 0 || m == 0 {
        return param_err("parity_vectors needs k >= 1 and m >= 1");
    }
    if k >= field.spec().group_order() {
        return param_err(format!(
            "k = {k} must be below 2^{} - 1 for distinct coefficient powers",
            field.width()
        ));
    }
    Ok((1..=m)
        .map(|j| {
            (1..=k)
                .map(|c| field.eta_pow((c as u64) * (j as u64 - 1)))
                .collect()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Independent carry-less multiply, the oracle for the table path.
    fn clmul(a: u32, b: u32, poly: u32, w: u8) -> u32 {
        let (mut a, mut b, mut r) = (a, b, 0);
        for _ in 0..w {
            if b & 1 == 1 {
                r ^= a;
            }
            b >>= 1;
            a <<= 1;
            if a & (1 << w) != 0 {
                a ^= poly;
            }
        }
        r
    }

    fn is_irreducible(poly: u32, degree: u32) -> bool {
        // trial division by every polynomial of degree 1..=degree/2
        fn gf2_mod(mut a: u64, b: u64) -> u64 {
            let db = 63 - b.leading_zeros();
            while a != 0 && 63 - a.leading_zeros() >= db {
                a ^= b << (63 - a.leading_zeros() - db);
            }
            a
        }
        (2u64..(1u64 << (degree / 2 + 1))).all(|d| gf2_mod(poly as u64, d) != 0)
    }

    fn gf8() -> &'static GaloisField {
        GaloisField::for_width(8).unwrap()
    }

    #[test]
    fn reduction_polynomials_are_irreducible() {
        assert!(is_irreducible(POLY_GF256, 8));
        assert!(is_irreducible(POLY_GF65536, 16));
        assert!(!is_irreducible(0x100, 8));
    }

    #[test]
    fn generators_are_primitive() {
        for w in [8u8, 16] {
            let f = GaloisField::for_width(w).unwrap();
            let order = f.spec().group_order() as u64;
            let eta = f.eta();
            // order of eta divides 2^w - 1; check no proper divisor kills it
            let mut d = 1u64;
            while d * d <= order {
                if order % d == 0 {
                    for q in [d, order / d] {
                        if q != order {
                            assert_ne!(f.pow(eta, q), GfElement::ONE, "w={w}, q={q}");
                        }
                    }
                }
                d += 1;
            }
            assert_eq!(f.pow(eta, order), GfElement::ONE);
        }
    }

    #[test]
    fn non_primitive_generator_rejected() {
        // 0x01 has order 1
        let spec = FieldSpec { eta: 1, ..FieldSpec::GF256 };
        assert!(GaloisField::new(spec).is_err());
    }

    #[test]
    fn worked_values() {
        let f = gf8();
        let e = |v| f.element(v).unwrap();
        assert_eq!(e(0x57) + e(0x57), GfElement::ZERO);
        assert_eq!(f.mul(e(0x80), e(0x02)), e(0x1D));
        assert_eq!(clmul(0x80, 0x02, POLY_GF256, 8), 0x1D);
        assert_eq!(f.inv(e(1)).unwrap(), e(1));
        assert!(matches!(f.inv(GfElement::ZERO), Err(Error::Domain(_))));
        assert!(f.element(0x100).is_err());
    }

    #[test]
    fn table_mul_matches_clmul_exhaustively_gf256() {
        let f = gf8();
        for a in 0..256u32 {
            for b in 0..256u32 {
                let got = f.mul(f.element(a).unwrap(), f.element(b).unwrap()).value() as u32;
                assert_eq!(got, clmul(a, b, POLY_GF256, 8), "{a:#x}*{b:#x}");
            }
        }
    }

    #[test]
    fn parity_vector_rows() {
        let f = gf8();
        let p = parity_vectors(3, 2, f).unwrap();
        assert!(p[0].iter().all(|&x| x == GfElement::ONE));
        let vals: Vec<u16> = p[1].iter().map(|x| x.value()).collect();
        assert_eq!(vals, vec![0x02, 0x04, 0x08]);
        assert!(parity_vectors(255, 2, f).is_err());
        assert!(parity_vectors(254, 2, f).is_ok());
        assert!(parity_vectors(0, 2, f).is_err());
    }

    proptest! {
        #[test]
        fn mul_inverse_gf16(a in 1u32..65536) {
            let f = GaloisField::for_width(16).unwrap();
            let a = f.element(a).unwrap();
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), GfElement::ONE);
        }

        #[test]
        fn field_axioms_gf16(a in 0u32..65536, b in 0u32..65536, c in 0u32..65536) {
            let f = GaloisField::for_width(16).unwrap();
            let (a, b, c) = (f.element(a).unwrap(), f.element(b).unwrap(), f.element(c).unwrap());
            prop_assert_eq!(f.mul(a, b), f.mul(b, a));
            prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
            prop_assert_eq!((a + b) + c, a + (b + c));
            prop_assert_eq!(f.mul(a, b + c), f.mul(a, b) + f.mul(a, c));
            prop_assert_eq!(f.mul(a, b).value() as u32,
                clmul(a.value() as u32, b.value() as u32, POLY_GF65536, 16));
        }

        #[test]
        fn parity_entries_are_eta_powers(k in 1usize..40, m in 1usize..10, j in 0usize..10, c in 0usize..40) {
            let f = gf8();
            let p = parity_vectors(k, m, f).unwrap();
            let (j, c) = (j % m, c % k);
            let mut expect = GfElement::ONE;
            for _ in 0..(c + 1) * j {
                expect = f.mul(expect, f.eta());
            }
            prop_assert_eq!(p[j][c], expect);
        }
    }
}
