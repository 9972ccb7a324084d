use super::ratios::{storage_overhead, width_for};
use super::{q, Q};
use crate::error::{param_err, Result};
use crate::params::CodeParams;

/// An (n, k, g) locally repairable code, g local groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LrcPoint {
    pub n: usize,
    pub k: usize,
    pub g: usize,
}

impl LrcPoint {
    pub fn new(n: usize, k: usize, g: usize) -> Result<Self> {
        if g < 1 || k < 1 || k + g >= n {
            return param_err(format!("LRC point needs g >= 1 and k + g < n, got (n, k, g) = ({n}, {k}, {g})"));
        }
        Ok(LrcPoint { n, k, g })
    }

    /// n - k - g + 1 for both LRC flavours.
    pub fn tolerance(&self) -> usize {
        self.n - self.k - self.g + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LrcBaseline {
    pub gamma: Q,
    pub overhead: Q,
    pub tolerance: usize,
}

/// One of our design-2 codes placed against a baseline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OurCode {
    pub params: CodeParams,
    pub gamma: Q,
    pub overhead: Q,
    /// r + 1 when k > (s - 1)(r + 1) + 1, else r.
    pub tolerance: usize,
}

impl OurCode {
    /// Closed forms: every node repairs with s + s^2 symbols, so gamma = (s + 1)/k.
    fn new(n: usize, k: usize, s: usize) -> Result<Self> {
        let params = CodeParams::new(n, k, s, 0, width_for(n)?)?;
        let r = params.r();
        let tolerance = if k > (s - 1) * (r + 1) + 1 { r + 1 } else { r };
        Ok(OurCode { params, gamma: q(s + 1, k), overhead: storage_overhead(&params), tolerance })
    }
}

/// Hypotheses of the two LRC comparisons, evaluated literally.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConditionFlags {
    /// 2g > n - k + 1
    pub two_g_exceeds: bool,
    /// n^2 - k^2 < k g (n - k - g + 1)
    pub quadratic: bool,
    pub n_div_g: bool,
    pub n_minus_g_div_g: bool,
    /// Azure local groups of k/g data symbols; the ratio formula is used either way.
    pub k_div_g: bool,
}

impl ConditionFlags {
    pub fn thm6(&self) -> bool {
        self.two_g_exceeds && self.quadratic
    }

    pub fn thm7(&self) -> bool {
        self.two_g_exceeds
    }

    pub fn render(&self) -> Vec<String> {
        vec![
            format!("2g>n-k+1={}", self.two_g_exceeds),
            format!("n^2-k^2<kg(n-k-g+1)={}", self.quadratic),
            format!("g|n={}", self.n_div_g),
            format!("g|n-g={}", self.n_minus_g_div_g),
            format!("g|k={}", self.k_div_g),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRecord {
    pub point: LrcPoint,
    pub flags: ConditionFlags,
    pub azure: LrcBaseline,
    /// Needs g | n - g.
    pub optimal_lrc: std::result::Result<LrcBaseline, String>,
    /// C(n - g, k, (n - g)/g, 0): same overhead and tolerance as Azure-LRC.
    pub same_overhead: std::result::Result<OurCode, String>,
    /// C(n, k + g, n/g, 0): the code plotted against Azure-LRC.
    pub against_azure: std::result::Result<OurCode, String>,
    /// C(n, k + g, (n - g)/g, 0): the code plotted against optimal-LRC.
    pub against_optimal: std::result::Result<OurCode, String>,
}

impl ComparisonRecord {
    /// Relative repair bandwidth and storage overhead saved by C(n, k + g, n/g, 0) over Azure-LRC.
    pub fn azure_reductions(&self) -> Option<(Q, Q)> {
        let ours = self.against_azure.as_ref().ok()?;
        Some((
            Q::from_integer(1) - ours.gamma / self.azure.gamma,
            Q::from_integer(1) - ours.overhead / self.azure.overhead,
        ))
    }
}

fn our_code(n: usize, k: usize, s_num: usize, g: usize, what: &str) -> std::result::Result<OurCode, String> {
    if s_num % g != 0 {
        return Err(format!("{what}: g = {g} does not divide {s_num}"));
    }
    OurCode::new(n, k, s_num / g).map_err(|e| format!("{what}: {e}"))
}

pub fn baselines(point: LrcPoint) -> ComparisonRecord {
    let LrcPoint { n, k, g } = point;
    let tol = point.tolerance();
    let flags = ConditionFlags {
        two_g_exceeds: 2 * g > n - k + 1,
        quadratic: (n * n - k * k) < k * g * tol,
        n_div_g: n % g == 0,
        n_minus_g_div_g: (n - g) % g == 0,
        k_div_g: k % g == 0,
    };
    let azure = LrcBaseline { gamma: q(tol * g + k, n * g), overhead: q(n, k), tolerance: tol };
    let optimal_lrc = if flags.n_minus_g_div_g {
        Ok(LrcBaseline { gamma: q(n - g, k * g), overhead: q(n, k), tolerance: tol })
    } else {
        Err(format!("optimal-LRC: g = {g} does not divide n - g = {}", n - g))
    };
    ComparisonRecord {
        point,
        flags,
        azure,
        optimal_lrc,
        same_overhead: our_code(n - g, k, n - g, g, "C(n-g,k,(n-g)/g,0)"),
        against_azure: our_code(n, k + g, n, g, "C(n,k+g,n/g,0)"),
        against_optimal: our_code(n, k + g, n - g, g, "C(n,k+g,(n-g)/g,0)"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_100_73_20() {
        let rec = baselines(LrcPoint::new(100, 73, 20).unwrap());
        assert_eq!(rec.azure.gamma, q(233, 2000));
        assert_eq!(rec.azure.tolerance, 8);
        assert!(rec.flags.two_g_exceeds && rec.flags.quadratic && rec.flags.thm6());
        assert!(!rec.flags.k_div_g);
        let ours = rec.against_azure.as_ref().unwrap();
        assert_eq!(ours.params, CodeParams::new(100, 93, 5, 0, 8).unwrap());
        assert_eq!(ours.gamma, q(6, 93));
        assert_eq!(ours.tolerance, 8);
        let same = rec.same_overhead.as_ref().unwrap();
        assert_eq!(same.gamma, q(5, 73));
        assert_eq!(same.overhead, rec.azure.overhead);
        assert_eq!(same.tolerance, 8);
        let (bw, ov) = rec.azure_reductions().unwrap();
        assert!((super::super::to_f64(bw) - 0.4462).abs() < 1e-4);
        assert!((super::super::to_f64(ov) - 0.05806).abs() < 1e-5);
        // 80/20 = 4 divides, so both optimal-LRC pieces are present
        assert_eq!(rec.optimal_lrc.as_ref().unwrap().gamma, q(80, 73 * 20));
        assert_eq!(rec.against_optimal.as_ref().unwrap().gamma, q(5, 93));
    }

    #[test]
    fn closed_forms_match_simulation() {
        use crate::analysis::gamma_sim;
        for point in [(100, 73, 20), (30, 20, 5), (24, 15, 4)] {
            let rec = baselines(LrcPoint::new(point.0, point.1, point.2).unwrap());
            for code in [&rec.same_overhead, &rec.against_azure, &rec.against_optimal].into_iter().flatten() {
                let rep = gamma_sim(&code.params).unwrap();
                assert_eq!(rep.gamma_sim, code.gamma);
                assert_eq!(rep.storage_overhead, code.overhead);
            }
        }
    }

    #[test]
    fn divisibility_marks_inapplicable() {
        let rec = baselines(LrcPoint::new(100, 78, 15).unwrap());
        assert!(rec.against_azure.is_err());
        assert!(rec.optimal_lrc.is_err());
        assert!(rec.against_azure.unwrap_err().contains("does not divide"));
    }

    #[test]
    fn point_validation() {
        assert!(LrcPoint::new(10, 8, 2).is_err());
        assert!(LrcPoint::new(10, 7, 0).is_err());
    }
}
