//! Closed-form ratios, baselines and parameter sweeps.
//!
//! Ratios are exact rationals. The OOP baseline contains square roots and
//! is the one quantity carried as `f64`.

mod baselines;
mod ratios;
mod sweep;

pub use baselines::{baselines, ComparisonRecord, ConditionFlags, LrcBaseline, LrcPoint, OurCode};
pub use ratios::{
    ceil_sqrt, gamma_bound_thm1, gamma_bounds_mds, gamma_mds_exact, gamma_mds_limit, gamma_oop, gamma_sim,
    isqrt, lemma_col1_params, n_tau_closed_form, optimal_s_mds, per_node_bandwidth, storage_overhead,
    width_for, MdsBounds, RatioReport,
};
pub use sweep::{
    bounds_sweep, design2_sweep, format_decimal, lemma_sweep, lrc_sweep, mds_sweep, params_row, write_csv,
    SweepRow, CSV_HEADER,
};

/// Exact rational used for every ratio.
pub type Q = num_rational::Ratio<i128>;

pub(crate) fn q(num: usize, den: usize) -> Q {
    Q::new(num as i128, den as i128)
}

pub fn to_f64(x: Q) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}
