use std::io::Write;
use std::ops::RangeInclusive;

use super::baselines::{baselines, ComparisonRecord, LrcPoint, OurCode};
use super::ratios::{gamma_oop, gamma_sim, lemma_col1_params, optimal_s_mds, width_for};
use super::Q;
use crate::error::{Error, Result};
use crate::params::CodeParams;

pub const CSV_HEADER: [&str; 18] = [
    "variant",
    "n",
    "k",
    "s",
    "kprime",
    "g",
    "gamma_sim",
    "gamma_bound",
    "gamma_min",
    "gamma_max",
    "gamma_oop",
    "gamma_azure",
    "gamma_optlrc",
    "overhead",
    "overhead_baseline",
    "tolerance",
    "conditions",
    "skip_reason",
];

/// One CSV line. Absent values render as empty fields.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepRow {
    pub variant: String,
    pub n: usize,
    pub k: usize,
    pub s: Option<usize>,
    pub kprime: Option<usize>,
    pub g: Option<usize>,
    pub gamma_sim: Option<Q>,
    pub gamma_bound: Option<Q>,
    pub gamma_min: Option<Q>,
    pub gamma_max: Option<Q>,
    pub gamma_oop: Option<f64>,
    pub gamma_azure: Option<Q>,
    pub gamma_optlrc: Option<Q>,
    pub overhead: Option<Q>,
    pub overhead_baseline: Option<Q>,
    pub tolerance: Option<usize>,
    pub conditions: Vec<String>,
    pub skip_reason: Option<String>,
}

impl SweepRow {
    fn skipped(variant: &str, n: usize, k: usize, reason: impl Into<String>) -> Self {
        SweepRow { variant: variant.into(), n, k, skip_reason: Some(reason.into()), ..Default::default() }
    }

    pub fn is_skipped(&self) -> bool {
        self.skip_reason.is_some()
    }

    fn fields(&self) -> Vec<String> {
        let opt = |x: Option<usize>| x.map(|v| v.to_string()).unwrap_or_default();
        let rat = |x: Option<Q>| x.map(format_decimal).unwrap_or_default();
        vec![
            self.variant.clone(),
            self.n.to_string(),
            self.k.to_string(),
            opt(self.s),
            opt(self.kprime),
            opt(self.g),
            rat(self.gamma_sim),
            rat(self.gamma_bound),
            rat(self.gamma_min),
            rat(self.gamma_max),
            self.gamma_oop.map(|v| format!("{v:.6}")).unwrap_or_default(),
            rat(self.gamma_azure),
            rat(self.gamma_optlrc),
            rat(self.overhead),
            rat(self.overhead_baseline),
            opt(self.tolerance),
            self.conditions.join(";"),
            self.skip_reason.clone().unwrap_or_default(),
        ]
    }
}

/// Six fractional digits, rounded half away from zero.
pub fn format_decimal(x: Q) -> String {
    let (num, den) = (*x.numer(), *x.denom());
    let neg = num < 0;
    let scaled = (num.abs() * 2_000_000 + den) / (2 * den);
    format!("{}{}.{:06}", if neg { "-" } else { "" }, scaled / 1_000_000, scaled % 1_000_000)
}

pub fn write_csv<W: Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    let io = |e: csv::Error| Error::Parameter(format!("csv output failed: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(io)?;
    for row in rows {
        w.write_record(row.fields()).map_err(io)?;
    }
    w.flush().map_err(|e| Error::Parameter(format!("csv output failed: {e}")))
}

/// Full row for one validated tuple.
pub fn params_row(params: &CodeParams) -> Result<SweepRow> {
    let rep = gamma_sim(params)?;
    let r = params.r();
    let tolerance = if params.variant.is_design1() {
        r
    } else if params.k > (params.s - 1) * (r + 1) + 1 {
        r + 1
    } else {
        r
    };
    Ok(SweepRow {
        variant: params.variant.name().into(),
        n: params.n,
        k: params.k,
        s: Some(params.s),
        kprime: Some(params.kprime),
        gamma_sim: Some(rep.gamma_sim),
        gamma_bound: Some(rep.gamma_bound),
        gamma_min: rep.mds.map(|b| b.gamma_min),
        gamma_max: rep.mds.map(|b| b.gamma_max),
        gamma_oop: gamma_oop(params.k, r).ok(),
        overhead: Some(rep.storage_overhead),
        tolerance: Some(tolerance),
        ..Default::default()
    })
}

fn row_or_skip(variant: &str, n: usize, k: usize, params: Result<CodeParams>) -> SweepRow {
    match params.and_then(|p| params_row(&p)) {
        Ok(row) => row,
        Err(e) => SweepRow::skipped(variant, n, k, e.to_string()),
    }
}

fn checked(n: usize, k: usize, s: usize, kprime: usize) -> Result<CodeParams> {
    CodeParams::new(n, k, s, kprime, width_for(n)?)
}

/// C(k + r, k, s, k) at the best s for every k.
pub fn mds_sweep(r: usize, ks: RangeInclusive<usize>) -> Vec<SweepRow> {
    ks.map(|k| {
        let params = optimal_s_mds(k, r).and_then(|s| checked(k + r, k, s, k));
        let mut row = row_or_skip("design1_mds", k + r, k, params);
        if !row.is_skipped() {
            row.conditions.push("s=optimal".into());
        }
        row
    })
    .collect()
}

/// C(k + r, k, s, k) for every s in `ss` and every k.
pub fn bounds_sweep(r: usize, ks: RangeInclusive<usize>, ss: RangeInclusive<usize>) -> Vec<SweepRow> {
    let mut rows = Vec::new();
    for k in ks {
        for s in ss.clone() {
            rows.push(row_or_skip("design1_mds", k + r, k, checked(k + r, k, s, k)));
        }
    }
    rows
}

/// C(k + r, k, s, k - s r - 1) for every k.
pub fn lemma_sweep(r: usize, ks: RangeInclusive<usize>, s: usize) -> Vec<SweepRow> {
    ks.map(|k| row_or_skip("design1", k + r, k, lemma_col1_params(k, r, s))).collect()
}

/// C(k + r, k, s, 0) for every k.
pub fn design2_sweep(r: usize, ks: RangeInclusive<usize>, s: usize) -> Vec<SweepRow> {
    ks.map(|k| row_or_skip("design2", k + r, k, checked(k + r, k, s, 0))).collect()
}

fn lrc_row(rec: &ComparisonRecord, code: &std::result::Result<OurCode, String>, baseline: &str) -> SweepRow {
    let LrcPoint { n, k, g } = rec.point;
    let mut conditions = vec![format!("baseline={baseline}")];
    conditions.extend(rec.flags.render());
    let mut row = match code {
        Ok(ours) => SweepRow {
            variant: "design2".into(),
            n: ours.params.n,
            k: ours.params.k,
            s: Some(ours.params.s),
            kprime: Some(0),
            gamma_sim: Some(ours.gamma),
            gamma_bound: Some(ours.gamma),
            overhead: Some(ours.overhead),
            tolerance: Some(ours.tolerance),
            ..Default::default()
        },
        Err(reason) => SweepRow::skipped("design2", n, k, reason.clone()),
    };
    row.g = Some(g);
    row.gamma_azure = Some(rec.azure.gamma);
    row.overhead_baseline = Some(rec.azure.overhead);
    match &rec.optimal_lrc {
        Ok(opt) => row.gamma_optlrc = Some(opt.gamma),
        Err(reason) if baseline == "optimal-lrc" && row.skip_reason.is_none() => {
            row = SweepRow { g: Some(g), ..SweepRow::skipped("design2", n, k, reason.clone()) };
        }
        Err(_) => {}
    }
    row.conditions = conditions;
    row
}

/// Fixed n and fault tolerance; for each g, k = n - g - tolerance + 1. Three
/// rows per point: the equal-overhead code and the plotted code against
/// Azure-LRC, and the plotted code against optimal-LRC.
pub fn lrc_sweep(n: usize, tolerance: usize, gs: RangeInclusive<usize>) -> Vec<SweepRow> {
    let mut rows = Vec::new();
    for g in gs {
        let point = (n > g + tolerance)
            .then(|| n - g - tolerance + 1)
            .ok_or_else(|| format!("no k >= 1 with n = {n}, g = {g}, tolerance {tolerance}"))
            .and_then(|k| LrcPoint::new(n, k, g).map_err(|e| e.to_string()));
        match point {
            Ok(point) => {
                let rec = baselines(point);
                rows.push(lrc_row(&rec, &rec.same_overhead, "azure-same-overhead"));
                rows.push(lrc_row(&rec, &rec.against_azure, "azure"));
                rows.push(lrc_row(&rec, &rec.against_optimal, "optimal-lrc"));
            }
            Err(reason) => rows.push(SweepRow { g: Some(g), ..SweepRow::skipped("design2", n, 0, reason) }),
        }
    }
    rows
}
