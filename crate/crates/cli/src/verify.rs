//! Invariant checks for one parameter tuple on random data.

use std::collections::BTreeSet;

use piggyback::analysis::{gamma_sim, n_tau_closed_form};
use piggyback::design1::build_map;
use piggyback::design2::build_map2;
use piggyback::mds::MdsInstance;
use piggyback::subsets::{binomial, Combinations};
use piggyback::{
    Cell, CodeParams, ErasedGrid, GaloisField, GeneratorFamily, PiggybackCode, Variant, VerifyMode,
};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::CliResult;

const EXHAUSTIVE_LIMIT: u128 = 20_000;
const SAMPLES: usize = 1_000;

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub params: String,
    pub family: String,
    pub passed: bool,
    pub checks: Vec<Check>,
}

fn check(name: &str, passed: bool, detail: impl Into<String>) -> Check {
    Check { name: name.into(), passed, detail: detail.into() }
}

fn mds_check(name: &str, inst: &MdsInstance, seed: u64) -> CliResult<Check> {
    let mode = if binomial(inst.n(), inst.k()) <= EXHAUSTIVE_LIMIT {
        VerifyMode::Exhaustive { budget: EXHAUSTIVE_LIMIT }
    } else {
        VerifyMode::Sampled { samples: SAMPLES, seed }
    };
    let v = inst.verify_mds(mode)?;
    let how = if matches!(mode, VerifyMode::Exhaustive { .. }) { "exhaustive" } else { "sampled" };
    Ok(match v.witness {
        None => check(name, v.passed, format!("{} subsets ({how})", v.tested)),
        Some(w) => check(name, false, format!("singular at positions {w:?} after {} subsets", v.tested)),
    })
}

/// Random k-subsets, or all of them when there are few.
fn subsets(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    if binomial(n, k) <= SAMPLES as u128 {
        Combinations::new(n, k).collect()
    } else {
        (0..SAMPLES)
            .map(|_| {
                let mut v: Vec<usize> = index::sample(rng, n, k).into_iter().map(|i| i + 1).collect();
                v.sort_unstable();
                v
            })
            .collect()
    }
}

pub fn verify(params: CodeParams, family: GeneratorFamily, seed: u64) -> CliResult<VerifyReport> {
    let field = GaloisField::for_width(params.field.width)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();

    let column = MdsInstance::new(params.n, params.k, family, field)?;
    checks.push(mds_check("column_code_mds", &column, seed)?);
    if params.variant.is_design1() && params.kprime < params.k {
        let last = MdsInstance::new(params.n, params.kprime, family, field)?;
        checks.push(mds_check("last_code_mds", &last, seed)?);
    }

    let map = if params.variant == Variant::Design2 { build_map2(&params)? } else { build_map(&params)? };
    let counts = map.counts();
    let total: usize = counts.iter().sum();
    let expect = if params.variant == Variant::Design2 { params.s * params.n } else { params.s * (params.k + params.r()) };
    checks.push(check("piggyback_count_sum", total == expect, format!("{total} symbols, expected {expect}")));
    if params.variant.is_design1() {
        let bad: Vec<usize> =
            (1..=counts.len()).filter(|&t| n_tau_closed_form(t, &params).ok() != Some(counts[t - 1])).collect();
        checks.push(check("n_tau_closed_form", bad.is_empty(), format!("mismatched tau: {bad:?}")));
    }
    let clash: Vec<usize> = (1..=params.n)
        .filter(|&j| (1..=params.s).map(|i| map.tau_of(Cell::new(j, i))).collect::<BTreeSet<_>>().len() != params.s)
        .collect();
    checks.push(check("row_distinct_piggybacks", clash.is_empty(), format!("rows sharing a piggyback: {clash:?}")));

    let code = PiggybackCode::new(params, family)?;
    let data: Vec<_> = (0..params.data_symbols())
        .map(|_| field.element(rng.gen_range(0..field.spec().size() as u32)).expect("in range"))
        .collect();
    let grid = code.encode_stripe(&data)?;

    let rep = gamma_sim(&params)?;
    let mut wrong = Vec::new();
    for f in 1..=params.n {
        match code.repair_node(f, &mut ErasedGrid::new(&grid, [f])) {
            Ok(r) if r.recovered == grid.row(f) && r.bandwidth == rep.per_node_bandwidth[f - 1] => {}
            Ok(_) => wrong.push(format!("node {f}: wrong symbols or bandwidth")),
            Err(e) => wrong.push(format!("node {f}: {e}")),
        }
    }
    checks.push(check("single_node_repair", wrong.is_empty(), wrong.join("; ")));

    let bound_ok = match params.variant {
        Variant::Design2 => rep.gamma_sim == rep.gamma_bound,
        Variant::Design1 => rep.gamma_sim <= rep.gamma_bound,
        Variant::Design1Mds => {
            let b = rep.mds.expect("k' = k bounds");
            rep.gamma_sim <= rep.gamma_bound && b.gamma_min <= rep.gamma_sim && rep.gamma_sim <= b.gamma_max
        }
    };
    checks.push(check("ratio_bounds", bound_ok, format!("gamma = {}, bound = {}", rep.gamma_sim, rep.gamma_bound)));

    let mut failures = 0;
    let tried = subsets(params.n, params.k, &mut rng);
    for s in &tried {
        let rows: Vec<_> = s.iter().map(|&j| (j, grid.row(j).to_vec())).collect();
        if code.decode_from_k(&rows).ok().as_ref() != Some(&data) {
            failures += 1;
        }
    }
    checks.push(check("decode_from_k", failures == 0, format!("{failures} of {} subsets failed", tried.len())));

    if let PiggybackCode::Design2(d2) = &code {
        let max = if d2.tolerates_r_plus_one() { params.r() + 1 } else { params.r() };
        let mut failures = Vec::new();
        let mut tried = 0;
        for m in 1..=max {
            for failed in subsets(params.n, m, &mut rng) {
                tried += 1;
                let ok = d2
                    .recover_failures(&failed, &mut ErasedGrid::new(&grid, failed.clone()))
                    .map(|rec| rec.rows.iter().all(|(j, row)| row.as_slice() == grid.row(*j)))
                    .unwrap_or(false);
                if !ok {
                    failures.push(failed);
                }
            }
        }
        checks.push(check(
            "multi_failure_recovery",
            failures.is_empty(),
            format!("up to {max} failures, {tried} patterns, failing: {failures:?}"),
        ));
    }

    Ok(VerifyReport {
        params: params.to_string(),
        family: format!("{family:?}"),
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}
