//! Systematic (n, k) MDS instances: encode, erasure decode, MDS verification.
//!
//! Positions are 1-based: 1..=k carry data, k+1..=n carry parity.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{param_err, Error, Result};
use crate::field::{parity_vectors, GaloisField, GfElement};
use crate::subsets::{binomial, Combinations};

/// Default subset budget for exhaustive MDS verification.
pub const DEFAULT_VERIFY_BUDGET: u128 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorFamily {
    /// Parity row j holds eta^(c (j-1)) in column c. Not MDS for every
    /// parameter set; check with [`MdsInstance::verify_mds`].
    VandermondeLiteral,
    /// Systematic Reed-Solomon from evaluations at distinct points.
    /// Every k x k submatrix of the generator is invertible.
    GuaranteedRs,
}

#[derive(Debug, Clone)]
pub struct MdsInstance {
    n: usize,
    k: usize,
    /// (n - k) rows by k columns.
    parity: Vec<Vec<GfElement>>,
    family: GeneratorFamily,
    field: &'static GaloisField,
}

impl MdsInstance {
    pub fn new(n: usize, k: usize, family: GeneratorFamily, field: &'static GaloisField) -> Result<Self> {
        if k == 0 || k > n {
            return param_err(format!("MDS instance needs 1 <= k <= n, got (n, k) = ({n}, {k})"));
        }
        let r = n - k;
        let parity = match family {
            GeneratorFamily::VandermondeLiteral => {
                if r == 0 {
                    Vec::new()
                } else {
                    parity_vectors(k, r, field)?
                }
            }
            GeneratorFamily::GuaranteedRs => rs_parity(n, k, field)?,
        };
        Ok(MdsInstance { n, k, parity, family, field })
    }

    pub fn guaranteed_rs(n: usize, k: usize, field: &'static GaloisField) -> Result<Self> {
        Self::new(n, k, GeneratorFamily::GuaranteedRs, field)
    }

    pub fn vandermonde_literal(n: usize, k: usize, field: &'static GaloisField) -> Result<Self> {
        Self::new(n, k, GeneratorFamily::VandermondeLiteral, field)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn r(&self) -> usize {
        self.n - self.k
    }

    pub fn family(&self) -> GeneratorFamily {
        self.family
    }

    pub fn field(&self) -> &'static GaloisField {
        self.field
    }

    /// Parity coefficient rows, `parity()[j - 1]` producing position k + j.
    pub fn parity(&self) -> &[Vec<GfElement>] {
        &self.parity
    }

    /// Codeword symbol at 1-based `position` for the given data.
    pub fn symbol_at(&self, position: usize, data: &[GfElement]) -> GfElement {
        debug_assert!(position >= 1 && position <= self.n);
        if position <= self.k {
            data[position - 1]
        } else {
            self.field.dot(&self.parity[position - self.k - 1], data)
        }
    }

    pub fn encode(&self, data: &[GfElement]) -> Result<Vec<GfElement>> {
        if data.len() != self.k {
            return param_err(format!("encode expects {} data symbols, got {}", self.k, data.len()));
        }
        let mut out = Vec::with_capacity(self.n);
        out.extend_from_slice(data);
        out.extend(self.parity.iter().map(|row| self.field.dot(row, data)));
        Ok(out)
    }

    /// Prepare a decoder for a fixed set of known positions. Only the
    /// first k usable positions take part in solving.
    pub fn decoder(&self, positions: &[usize]) -> Result<ErasureDecoder<'_>> {
        let mut seen = vec![false; self.n + 1];
        for &p in positions {
            if p == 0 || p > self.n {
                return param_err(format!("position {p} outside 1..={}", self.n));
            }
            if seen[p] {
                return param_err(format!("position {p} supplied twice"));
            }
            seen[p] = true;
        }
        if positions.len() < self.k {
            return Err(Error::InsufficientData { needed: self.k, got: positions.len() });
        }
        let missing: Vec<usize> = (1..=self.k).filter(|&c| !seen[c]).collect();
        // slot index into `positions` for every known data column
        let mut data_slot = vec![usize::MAX; self.k];
        let mut parity_slots = Vec::with_capacity(missing.len());
        for (slot, &p) in positions.iter().enumerate() {
            if p <= self.k {
                data_slot[p - 1] = slot;
            } else if parity_slots.len() < missing.len() {
                parity_slots.push(slot);
            }
        }
        let e = missing.len();
        let inverse = if e == 0 {
            Vec::new()
        } else {
            let sub: Vec<Vec<GfElement>> = parity_slots
                .iter()
                .map(|&slot| {
                    let row = &self.parity[positions[slot] - self.k - 1];
                    missing.iter().map(|&c| row[c - 1]).collect()
                })
                .collect();
            match invert(&sub, self.field) {
                Some(inv) => inv,
                None => {
                    let mut used: Vec<usize> = positions
                        .iter()
                        .copied()
                        .filter(|&p| p <= self.k)
                        .chain(parity_slots.iter().map(|&s| positions[s]))
                        .collect();
                    used.sort_unstable();
                    return Err(Error::Decode { positions: used });
                }
            }
        };
        Ok(ErasureDecoder {
            inst: self,
            positions: positions.to_vec(),
            data_slot,
            missing,
            parity_slots,
            inverse,
        })
    }

    /// Recover the full codeword from at least k (position, symbol) pairs.
    /// Extra pairs are checked against the result.
    pub fn erasure_decode(&self, known: &[(usize, GfElement)]) -> Result<Vec<GfElement>> {
        let positions: Vec<usize> = known.iter().map(|&(p, _)| p).collect();
        let values: Vec<GfElement> = known.iter().map(|&(_, v)| v).collect();
        let dec = self.decoder(&positions)?;
        let data = dec.decode(&values);
        let word = self.encode(&data)?;
        for &(p, v) in known {
            if word[p - 1] != v {
                return Err(Error::Inconsistent { position: p });
            }
        }
        Ok(word)
    }

    /// Check that every tested k-subset of positions yields an invertible
    /// decode system.
    pub fn verify_mds(&self, mode: VerifyMode) -> Result<MdsVerdict> {
        match mode {
            VerifyMode::Exhaustive { budget } => {
                let subsets = binomial(self.n, self.k);
                if subsets > budget {
                    return Err(Error::BudgetExceeded { subsets, budget });
                }
                let mut tested = 0u64;
                for subset in Combinations::new(self.n, self.k) {
                    tested += 1;
                    if self.decoder(&subset).is_err() {
                        return Ok(MdsVerdict { passed: false, tested, witness: Some(subset) });
                    }
                }
                Ok(MdsVerdict { passed: true, tested, witness: None })
            }
            VerifyMode::Sampled { samples, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                for t in 0..samples {
                    let mut subset: Vec<usize> =
                        index::sample(&mut rng, self.n, self.k).into_iter().map(|i| i + 1).collect();
                    subset.sort_unstable();
                    if self.decoder(&subset).is_err() {
                        return Ok(MdsVerdict {
                            passed: false,
                            tested: t as u64 + 1,
                            witness: Some(subset),
                        });
                    }
                }
                Ok(MdsVerdict { passed: true, tested: samples as u64, witness: None })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyMode {
    Exhaustive { budget: u128 },
    Sampled { samples: usize, seed: u64 },
}

impl VerifyMode {
    pub fn exhaustive() -> Self {
        VerifyMode::Exhaustive { budget: DEFAULT_VERIFY_BUDGET }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MdsVerdict {
    pub passed: bool,
    pub tested: u64,
    /// First failing position subset (1-based), if any.
    pub witness: Option<Vec<usize>>,
}

/// Precomputed solver for one set of known positions.
///
/// Known data positions are copied through; the e missing data symbols
/// come from an e x e system over e of the known parity positions.
#[derive(Debug, Clone)]
pub struct ErasureDecoder<'a> {
    inst: &'a MdsInstance,
    positions: Vec<usize>,
    data_slot: Vec<usize>,
    missing: Vec<usize>,
    parity_slots: Vec<usize>,
    inverse: Vec<Vec<GfElement>>,
}

impl ErasureDecoder<'_> {
    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    /// Decode the k data symbols. `values[i]` is the symbol at `positions()[i]`.
    pub fn decode(&self, values: &[GfElement]) -> Vec<GfElement> {
        assert_eq!(values.len(), self.positions.len(), "one value per decoder position");
        let f = self.inst.field;
        let k = self.inst.k;
        let mut data: Vec<GfElement> = (0..k)
            .map(|c| {
                let slot = self.data_slot[c];
                if slot == usize::MAX {
                    GfElement::ZERO
                } else {
                    values[slot]
                }
            })
            .collect();
        if self.missing.is_empty() {
            return data;
        }
        // rhs_j = y_j - sum over known columns of P[j][c] d_c; the missing
        // columns are still zero in `data`, so a full dot product works.
        let rhs: Vec<GfElement> = self
            .parity_slots
            .iter()
            .map(|&slot| {
                let row = &self.inst.parity[self.positions[slot] - k - 1];
                values[slot] - f.dot(row, &data)
            })
            .collect();
        for (i, &c) in self.missing.iter().enumerate() {
            data[c - 1] = f.dot(&self.inverse[i], &rhs);
        }
        data
    }
}

/// Gauss-Jordan inverse; `None` when singular.
pub(crate) fn invert(m: &[Vec<GfElement>], f: &GaloisField) -> Option<Vec<Vec<GfElement>>> {
    let n = m.len();
    let mut a: Vec<Vec<GfElement>> = m.to_vec();
    let mut inv: Vec<Vec<GfElement>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { GfElement::ONE } else { GfElement::ZERO }).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let scale = f.inv(a[col][col]).ok()?;
        for x in a[col].iter_mut() {
            *x = f.mul(*x, scale);
        }
        for x in inv[col].iter_mut() {
            *x = f.mul(*x, scale);
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col];
            for c in 0..n {
                let (av, iv) = (a[col][c], inv[col][c]);
                a[r][c] -= f.mul(factor, av);
                inv[r][c] -= f.mul(factor, iv);
            }
        }
    }
    Some(inv)
}

/// Parity rows of G = V * V_top^{-1} where V[i][c] = x_i^c over the
/// points x_i = i, i = 0..n-1.
fn rs_parity(n: usize, k: usize, f: &'static GaloisField) -> Result<Vec<Vec<GfElement>>> {
    if n > f.spec().size() {
        return param_err(format!(
            "n = {n} exceeds the {} distinct evaluation points of GF(2^{})",
            f.spec().size(),
            f.width()
        ));
    }
    let point = |i: usize| GfElement::raw(i as u16);
    let vrow = |i: usize| (0..k).map(|c| f.pow(point(i), c as u64)).collect::<Vec<_>>();
    let top: Vec<Vec<GfElement>> = (0..k).map(vrow).collect();
    let top_inv = invert(&top, f).expect("Vandermonde matrix on distinct points is invertible");
    Ok((k..n)
        .map(|i| {
            let v = vrow(i);
            (0..k)
                .map(|c| (0..k).fold(GfElement::ZERO, |acc, t| acc + f.mul(v[t], top_inv[t][c])))
                .collect()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn gf(w: u8) -> &'static GaloisField {
        GaloisField::for_width(w).unwrap()
    }

    fn random_data(rng: &mut impl Rng, f: &GaloisField, k: usize) -> Vec<GfElement> {
        (0..k).map(|_| f.element(rng.gen_range(0..f.spec().size() as u32)).unwrap()).collect()
    }

    #[test]
    fn zero_data_encodes_to_zero() {
        let inst = MdsInstance::guaranteed_rs(8, 6, gf(8)).unwrap();
        assert!(inst.encode(&[GfElement::ZERO; 6]).unwrap().iter().all(|x| x.is_zero()));
    }

    #[test]
    fn literal_k1_parities_are_eta_powers() {
        let f = gf(8);
        let inst = MdsInstance::vandermonde_literal(5, 1, f).unwrap();
        let d = f.element(0x35).unwrap();
        let word = inst.encode(&[d]).unwrap();
        for j in 1..=4u64 {
            assert_eq!(word[j as usize], f.mul(f.pow(f.eta(), j - 1), d));
        }
    }

    #[test]
    fn literal_first_parity_is_xor() {
        let f = gf(8);
        let inst = MdsInstance::vandermonde_literal(8, 6, f).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let data = random_data(&mut rng, f, 6);
        let word = inst.encode(&data).unwrap();
        assert_eq!(word[6], data.iter().copied().sum());
    }

    #[test]
    fn length_mismatch_is_parameter_error() {
        let inst = MdsInstance::guaranteed_rs(8, 6, gf(8)).unwrap();
        assert!(matches!(inst.encode(&[GfElement::ZERO; 5]), Err(Error::Parameter(_))));
    }

    #[test]
    fn exhaustive_round_trip_8_6() {
        let f = gf(16);
        for family in [GeneratorFamily::GuaranteedRs, GeneratorFamily::VandermondeLiteral] {
            let inst = MdsInstance::new(8, 6, family, f).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            let data = random_data(&mut rng, f, 6);
            let word = inst.encode(&data).unwrap();
            for subset in Combinations::new(8, 6) {
                let known: Vec<_> = subset.iter().map(|&p| (p, word[p - 1])).collect();
                assert_eq!(inst.erasure_decode(&known).unwrap(), word, "{family:?} {subset:?}");
            }
            let all: Vec<_> = (1..=8).map(|p| (p, word[p - 1])).collect();
            assert_eq!(inst.erasure_decode(&all).unwrap(), word);
        }
    }

    #[test]
    fn too_few_positions() {
        let inst = MdsInstance::guaranteed_rs(8, 6, gf(8)).unwrap();
        let known: Vec<_> = (1..=5).map(|p| (p, GfElement::ZERO)).collect();
        assert_eq!(
            inst.erasure_decode(&known),
            Err(Error::InsufficientData { needed: 6, got: 5 })
        );
    }

    #[test]
    fn inconsistent_extra_symbol_detected() {
        let f = gf(8);
        let inst = MdsInstance::guaranteed_rs(6, 3, f).unwrap();
        let word = inst.encode(&[f.element(1).unwrap(), f.element(2).unwrap(), f.element(3).unwrap()]).unwrap();
        let mut known: Vec<_> = (1..=6).map(|p| (p, word[p - 1])).collect();
        known[5].1 += GfElement::ONE;
        assert_eq!(inst.erasure_decode(&known), Err(Error::Inconsistent { position: 6 }));
    }

    #[test]
    fn guaranteed_rs_is_mds() {
        for (n, k) in [(8, 6), (10, 4), (12, 7), (7, 5), (5, 5), (9, 1)] {
            for w in [8, 16] {
                let inst = MdsInstance::guaranteed_rs(n, k, gf(w)).unwrap();
                let v = inst.verify_mds(VerifyMode::exhaustive()).unwrap();
                assert!(v.passed, "({n},{k}) w={w}: {:?}", v.witness);
            }
        }
        let one = MdsInstance::guaranteed_rs(5, 5, gf(8)).unwrap().verify_mds(VerifyMode::exhaustive()).unwrap();
        assert_eq!(one.tested, 1);
    }

    #[test]
    fn literal_8_6_gf256_fixture() {
        // Exhaustive oracle: every square submatrix of the 2 x 6 parity block
        // is nonsingular, so all 28 subsets decode.
        let inst = MdsInstance::vandermonde_literal(8, 6, gf(8)).unwrap();
        let v = inst.verify_mds(VerifyMode::exhaustive()).unwrap();
        assert_eq!(v, MdsVerdict { passed: true, tested: 28, witness: None });
    }

    #[test]
    fn literal_11_5_gf256_fails_with_witness() {
        // First singular subset in lexicographic order, found by an
        // independent determinant search over GF(2^8).
        let inst = MdsInstance::vandermonde_literal(11, 5, gf(8)).unwrap();
        let v = inst.verify_mds(VerifyMode::exhaustive()).unwrap();
        assert!(!v.passed);
        assert_eq!(v.witness, Some(vec![2, 3, 6, 8, 11]));
        let err = inst.decoder(&[2, 3, 6, 8, 11]).unwrap_err();
        assert_eq!(err, Error::Decode { positions: vec![2, 3, 6, 8, 11] });
        let sampled = inst.verify_mds(VerifyMode::Sampled { samples: 2000, seed: 3 }).unwrap();
        assert!(!sampled.passed);
    }

    #[test]
    fn budget_exceeded() {
        let inst = MdsInstance::guaranteed_rs(40, 20, gf(8)).unwrap();
        assert!(matches!(
            inst.verify_mds(VerifyMode::exhaustive()),
            Err(Error::BudgetExceeded { .. })
        ));
        assert!(inst.verify_mds(VerifyMode::Sampled { samples: 200, seed: 1 }).unwrap().passed);
    }

    #[test]
    fn field_too_small_for_rs() {
        assert!(MdsInstance::guaranteed_rs(257, 200, gf(8)).is_err());
        assert!(MdsInstance::guaranteed_rs(256, 200, gf(8)).is_ok());
    }

    proptest! {
        #[test]
        fn encode_is_linear(seed in any::<u64>()) {
            let f = gf(16);
            let inst = MdsInstance::guaranteed_rs(12, 7, f).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d1 = random_data(&mut rng, f, 7);
            let d2 = random_data(&mut rng, f, 7);
            let sum: Vec<_> = d1.iter().zip(&d2).map(|(&a, &b)| a + b).collect();
            let lhs = inst.encode(&sum).unwrap();
            let rhs: Vec<_> = inst.encode(&d1).unwrap().iter().zip(inst.encode(&d2).unwrap())
                .map(|(&a, b)| a + b).collect();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn decode_from_random_subset(seed in any::<u64>(), n in 2usize..30, kfrac in 0.0f64..1.0) {
            let k = 1 + ((n - 1) as f64 * kfrac) as usize;
            let f = gf(16);
            let inst = MdsInstance::guaranteed_rs(n, k, f).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let data = random_data(&mut rng, f, k);
            let word = inst.encode(&data).unwrap();
            let mut subset: Vec<usize> = index::sample(&mut rng, n, k).into_iter().map(|i| i + 1).collect();
            subset.sort_unstable();
            let known: Vec<_> = subset.iter().map(|&p| (p, word[p - 1])).collect();
            prop_assert_eq!(inst.erasure_decode(&known).unwrap(), word);
        }
    }
}
