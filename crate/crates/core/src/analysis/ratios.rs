use std::collections::BTreeSet;

use super::{q, Q};
use crate::design1::{build_map, repair_plan_for};
use crate::design2::{build_map2, repair_cells_for};
use crate::error::{param_err, Result};
use crate::params::{CodeParams, Variant};

/// Simulated repair costs of one parameter tuple.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioReport {
    pub params: CodeParams,
    pub per_node_bandwidth: Vec<usize>,
    /// Sum of per-node bandwidth over n times the data symbols per stripe.
    pub gamma_sim: Q,
    /// Upper bound for design 1 (both variants), exact value (s + 1)/k for design 2.
    pub gamma_bound: Q,
    /// Lower and upper bound, k' = k only.
    pub mds: Option<MdsBounds>,
    pub storage_overhead: Q,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MdsBounds {
    pub gamma_min: Q,
    pub gamma_max: Q,
    /// Best s among the integer neighbours of sqrt(r) - 1, judged at this k.
    pub optimal_s: usize,
}

/// Smallest field width whose size covers n.
pub fn width_for(n: usize) -> Result<u8> {
    match n {
        0..=256 => Ok(8),
        257..=65536 => Ok(16),
        _ => param_err(format!("no supported field holds n = {n}")),
    }
}

pub fn isqrt(x: usize) -> usize {
    let mut r = (x as f64).sqrt() as usize;
    while r * r > x {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= x {
        r += 1;
    }
    r
}

pub fn ceil_sqrt(x: usize) -> usize {
    let r = isqrt(x);
    if r * r == x {
        r
    } else {
        r + 1
    }
}

/// Distinct cells each node's repair downloads, taken from the repair plans.
pub fn per_node_bandwidth(params: &CodeParams) -> Result<Vec<usize>> {
    let distinct = |cells: Vec<_>| cells.into_iter().collect::<BTreeSet<_>>().len();
    if params.variant == Variant::Design2 {
        let map = build_map2(params)?;
        (1..=params.n).map(|f| repair_cells_for(params, &map, f).map(distinct)).collect()
    } else {
        let map = build_map(params)?;
        (1..=params.n)
            .map(|f| repair_plan_for(params, &map, f).map(|plan| distinct(plan.cells(params))))
            .collect()
    }
}

pub fn storage_overhead(params: &CodeParams) -> Q {
    q(params.stored_symbols(), params.data_symbols())
}

fn ratio_of(params: &CodeParams, per_node: &[usize]) -> Q {
    q(per_node.iter().sum(), params.n * params.data_symbols())
}

pub fn gamma_sim(params: &CodeParams) -> Result<RatioReport> {
    let per_node_bandwidth = per_node_bandwidth(params)?;
    let gamma_sim = ratio_of(params, &per_node_bandwidth);
    let (gamma_bound, mds) = match params.variant {
        Variant::Design2 => (q(params.s + 1, params.k), None),
        Variant::Design1 => (gamma_bound_thm1(params)?, None),
        Variant::Design1Mds => (gamma_bound_thm1(params)?, Some(gamma_bounds_mds(params)?)),
    };
    Ok(RatioReport {
        params: *params,
        per_node_bandwidth,
        gamma_sim,
        gamma_bound,
        mds,
        storage_overhead: storage_overhead(params),
    })
}

/// Number of symbols in p_tau, from the placement counting argument.
pub fn n_tau_closed_form(tau: usize, params: &CodeParams) -> Result<usize> {
    if !params.variant.is_design1() {
        return param_err(format!("{params} is not a design-1 code"));
    }
    let m = params.piggyback_count();
    if tau < 1 || tau > m {
        return param_err(format!("tau = {tau} outside 1..={m}"));
    }
    let a = params.s * (params.kprime + 1);
    let (fl, rem) = (a / m, a % m);
    Ok(params.s + if tau <= rem { fl + 1 } else { fl })
}

pub fn gamma_bound_thm1(params: &CodeParams) -> Result<Q> {
    if !params.variant.is_design1() {
        return param_err(format!("{params} is not a design-1 code"));
    }
    let CodeParams { k, s, kprime, .. } = *params;
    let (h, r) = (params.h(), params.r());
    let m = h + r - 1;
    let u = (s * (kprime + 1)).div_ceil(m);
    let denom = s * k + kprime;
    Ok(q((u + s) * (u + s) * m, (k + r) * denom) + q(kprime + s, denom))
}

fn require_mds(params: &CodeParams) -> Result<()> {
    if params.variant != Variant::Design1Mds {
        return param_err(format!("{params} does not have k' = k"));
    }
    Ok(())
}

/// gamma_min and gamma_max for k' = k.
pub fn gamma_bounds_mds(params: &CodeParams) -> Result<MdsBounds> {
    require_mds(params)?;
    let (k, r, s) = (params.k, params.r(), params.s);
    let gamma_min = q(k + s, (s + 1) * k) + q(s * s * (k + r), (r - 1) * (s + 1) * k);
    let gamma_max = gamma_min + q(r - 1, 4 * k * (k + r) * (s + 1));
    Ok(MdsBounds { gamma_min, gamma_max, optimal_s: optimal_s_mds(k, r)? })
}

/// Exact ratio for k' = k: gamma_min plus t(r-1-t)/((k+r)(s+1)(r-1)k), t = s(k+1) mod (r-1).
pub fn gamma_mds_exact(k: usize, r: usize, s: usize) -> Result<Q> {
    let params = CodeParams::new(k + r, k, s, k, width_for(k + r)?)?;
    let b = gamma_bounds_mds(&params)?;
    let t = (s * (k + 1)) % (r - 1);
    Ok(b.gamma_min + q(t * (r - 1 - t), (k + r) * (s + 1) * (r - 1) * k))
}

/// Limit of gamma_min as k grows: s^2/((r-1)(s+1)) + 1/(s+1).
pub fn gamma_mds_limit(r: usize, s: usize) -> Q {
    q(s * s, (r - 1) * (s + 1)) + q(1, s + 1)
}

/// s minimising the simulated ratio of C(k+r, k, s, k) over the integer
/// neighbours of sqrt(r) - 1, clamped to [1, r - 2]. Ties pick the smaller s.
pub fn optimal_s_mds(k: usize, r: usize) -> Result<usize> {
    if r < 3 {
        return param_err(format!("k' = k needs r >= 3 for s >= 1, got r = {r}"));
    }
    let clamp = |s: usize| s.clamp(1, r - 2);
    let lo = clamp(isqrt(r).saturating_sub(1));
    let hi = clamp(ceil_sqrt(r) - 1);
    let w = width_for(k + r)?;
    let sim = |s: usize| -> Result<Q> {
        let params = CodeParams::new(k + r, k, s, k, w)?;
        Ok(ratio_of(&params, &per_node_bandwidth(&params)?))
    };
    let mut best = (lo, sim(lo)?);
    if hi != lo {
        let g = sim(hi)?;
        if g < best.1 {
            best = (hi, g);
        }
    }
    Ok(best.0)
}

/// OOP baseline ratio. Requires r >= 2.
pub fn gamma_oop(k: usize, r: usize) -> Result<f64> {
    if r < 2 || k < 1 {
        return param_err(format!("OOP ratio needs r >= 2 and k >= 1, got (k, r) = ({k}, {r})"));
    }
    let (kf, rf) = (k as f64, r as f64);
    let q = (rf - 1.0).sqrt();
    let tail = q / rf + 1.0 / rf + ((rf - 1.0).powi(2) - (rf - 1.0).powf(1.5)) / (kf * rf);
    Ok((kf * (2.0 * q + 1.0) / (2.0 * q + rf) + rf * tail) / (kf + rf))
}

/// C(k + r, k, s, k - s r - 1), the long-code family compared against OOP.
pub fn lemma_col1_params(k: usize, r: usize, s: usize) -> Result<CodeParams> {
    if k <= s * r + 1 {
        return param_err(format!("k' = k - s r - 1 must be positive, got k = {k}, s = {s}, r = {r}"));
    }
    CodeParams::new(k + r, k, s, k - s * r - 1, width_for(k + r)?)
}
