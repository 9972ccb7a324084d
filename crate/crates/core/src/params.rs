use std::fmt;

use crate::error::{param_err, Result};
use crate::field::FieldSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// 0 < k' < k: s instances of (n, k) plus one (n, k') instance.
    Design1,
    /// k' = k: every column is an (n, k) codeword and the array code is MDS.
    Design1Mds,
    /// k' = 0: the last column holds n piggyback functions and no data.
    Design2,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Design1 => "design1",
            Variant::Design1Mds => "design1_mds",
            Variant::Design2 => "design2",
        }
    }

    pub fn is_design1(self) -> bool {
        matches!(self, Variant::Design1 | Variant::Design1Mds)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Validated parameter tuple C(n, k, s, k').
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodeParams {
    pub n: usize,
    pub k: usize,
    pub s: usize,
    pub kprime: usize,
    pub field: FieldSpec,
    pub variant: Variant,
}

impl CodeParams {
    pub fn new(n: usize, k: usize, s: usize, kprime: usize, field_width: u8) -> Result<Self> {
        let field = FieldSpec::for_width(field_width)?;
        if k < 1 || k >= n {
            return param_err(format!("constraint 1 <= k < n violated: (n, k) = ({n}, {k})"));
        }
        if s < 1 {
            return param_err("constraint s >= 1 violated");
        }
        if s + 1 > n {
            return param_err(format!("constraint s + 1 <= n violated: s = {s}, n = {n}"));
        }
        if kprime > k {
            return param_err(format!("constraint k' <= k violated: k' = {kprime}, k = {k}"));
        }
        if n > field.size() {
            return param_err(format!(
                "constraint n <= 2^w violated: n = {n}, w = {}",
                field.width
            ));
        }
        let r = n - k;
        let h = k - kprime;
        let variant = if kprime == 0 {
            Variant::Design2
        } else if kprime == k {
            Variant::Design1Mds
        } else {
            Variant::Design1
        };
        if variant.is_design1() && s + 2 > h + r {
            return param_err(format!(
                "constraint s + 2 <= h + r violated: s = {s}, h = {h}, r = {r}{}",
                if h == 0 { " (k' = k requires s <= r - 2)" } else { "" }
            ));
        }
        Ok(CodeParams { n, k, s, kprime, field, variant })
    }

    /// r = n - k
    pub fn r(&self) -> usize {
        self.n - self.k
    }

    /// h = k - k'
    pub fn h(&self) -> usize {
        self.k - self.kprime
    }

    /// Number of piggyback functions: h + r - 1 for design 1, n for design 2.
    pub fn piggyback_count(&self) -> usize {
        match self.variant {
            Variant::Design2 => self.n,
            _ => self.h() + self.r() - 1,
        }
    }

    /// Data symbols per stripe: s k + k'.
    pub fn data_symbols(&self) -> usize {
        self.s * self.k + self.kprime
    }

    /// Symbols per stripe: n (s + 1).
    pub fn stored_symbols(&self) -> usize {
        self.n * (self.s + 1)
    }

    pub fn columns(&self) -> usize {
        self.s + 1
    }
}

impl fmt::Display for CodeParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C({},{},{},{})", self.n, self.k, self.s, self.kprime)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variants_and_derived() {
        let p = CodeParams::new(8, 6, 1, 3, 8).unwrap();
        assert_eq!((p.variant, p.h(), p.r(), p.piggyback_count(), p.data_symbols()), (Variant::Design1, 3, 2, 4, 9));
        let p = CodeParams::new(20, 14, 1, 14, 16).unwrap();
        assert_eq!((p.variant, p.piggyback_count(), p.data_symbols()), (Variant::Design1Mds, 5, 28));
        let p = CodeParams::new(7, 5, 2, 0, 8).unwrap();
        assert_eq!((p.variant, p.piggyback_count(), p.data_symbols()), (Variant::Design2, 7, 10));
    }

    #[test]
    fn constraint_violations_are_named() {
        let msg = |r: Result<CodeParams>| r.unwrap_err().to_string();
        assert!(msg(CodeParams::new(8, 8, 1, 3, 8)).contains("1 <= k < n"));
        assert!(msg(CodeParams::new(8, 6, 0, 3, 8)).contains("s >= 1"));
        assert!(msg(CodeParams::new(8, 6, 1, 7, 8)).contains("k' <= k"));
        // k' = k with r = 2 leaves no room for s
        assert!(msg(CodeParams::new(8, 6, 1, 6, 8)).contains("s <= r - 2"));
        assert!(msg(CodeParams::new(8, 6, 4, 3, 8)).contains("s + 2 <= h + r"));
        assert!(msg(CodeParams::new(3, 2, 3, 0, 8)).contains("s + 1 <= n"));
        assert!(msg(CodeParams::new(300, 200, 1, 0, 8)).contains("n <= 2^w"));
        assert!(CodeParams::new(8, 6, 1, 3, 12).is_err());
    }

    #[test]
    fn design2_allows_wide_s() {
        assert!(CodeParams::new(7, 5, 6, 0, 8).is_ok());
        assert!(CodeParams::new(7, 5, 7, 0, 8).is_err());
    }
}
