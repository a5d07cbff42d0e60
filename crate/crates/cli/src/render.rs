//! CSV and JSON rendering of reports.

use serde::Serialize;

use crate::experiment::{Report, Results};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

pub fn render(report: &Report, format: Format) -> anyhow::Result<String> {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report)?;
            s.push('\n');
            Ok(s)
        }
        Format::Csv => csv_text(&report.results),
    }
}

#[derive(Serialize)]
struct DensityRow {
    n: u64,
    pi_n: u64,
    pi_density: f64,
    pnt_estimate: f64,
    mertens_product: f64,
    mertens_asymptote: f64,
    mertens_times_ln_n: f64,
}

#[derive(Serialize)]
struct BoundRow {
    n: u64,
    b: f64,
    epsilon: Option<f64>,
    exceedance_fraction: f64,
    chebyshev_bound: f64,
    within_fraction: f64,
}

#[derive(Serialize)]
struct HardyRamanujanRow {
    n: u64,
    b: f64,
    epsilon: Option<f64>,
    center: f64,
    threshold: f64,
    exceedance_fraction: f64,
    chebyshev_rate: f64,
    stated_rate: f64,
    within_chebyshev_rate: bool,
    within_stated_rate: bool,
}

#[derive(Serialize)]
struct KsRow<'a> {
    n: u64,
    spec: &'a str,
    normalization: String,
    center: f64,
    scale: f64,
    ks_statistic: f64,
}

#[derive(Serialize)]
struct MomentCsvRow {
    n: u64,
    mean: f64,
    k: usize,
    central_moment: f64,
}

#[derive(Serialize)]
struct ModelRow {
    model: &'static str,
    n: u64,
    k: usize,
    exact_or_leading: &'static str,
    value: f64,
    mc_estimate: f64,
    mc_stderr: f64,
    samples: usize,
    seed: u64,
}

#[derive(Serialize)]
struct MatchCsvRow<'a> {
    spec: &'a str,
    model: &'static str,
    n: u64,
    k: usize,
    arithmetic: f64,
    model_exact: f64,
    model_leading_term: f64,
    paper_asymptote: Option<f64>,
    discrepancy: f64,
}

#[derive(Serialize)]
struct TuranRow<'a> {
    spec: &'a str,
    n: u64,
    mean: f64,
    variance: f64,
    ratio: f64,
    note: Option<&'a str>,
}

fn rows_to_csv<T: Serialize>(rows: impl IntoIterator<Item = T>) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn csv_text(results: &Results) -> anyhow::Result<String> {
    match results {
        Results::Density(reports) => rows_to_csv(reports.iter().map(|r| DensityRow {
            n: r.n,
            pi_n: r.pi_n,
            pi_density: r.pi_density,
            pnt_estimate: r.pnt_estimate,
            mertens_product: r.mertens_product,
            mertens_asymptote: r.mertens_asymptote,
            mertens_times_ln_n: r.ratios.mertens_times_ln_n,
        })),
        Results::Bounds(checks) => rows_to_csv(checks.iter().map(|c| BoundRow {
            n: c.n,
            b: c.b,
            epsilon: c.epsilon,
            exceedance_fraction: c.exceedance_fraction,
            chebyshev_bound: c.chebyshev_bound,
            within_fraction: c.within_fraction,
        })),
        Results::HardyRamanujan(checks) => rows_to_csv(checks.iter().map(|h| HardyRamanujanRow {
            n: h.check.n,
            b: h.check.b,
            epsilon: h.check.epsilon,
            center: h.check.center,
            threshold: h.check.threshold,
            exceedance_fraction: h.check.exceedance_fraction,
            chebyshev_rate: h.chebyshev_rate,
            stated_rate: h.stated_rate,
            within_chebyshev_rate: h.within_chebyshev_rate,
            within_stated_rate: h.within_stated_rate,
        })),
        Results::ErdosKac(run) => rows_to_csv(run.results.iter().map(|r| KsRow {
            n: r.n,
            spec: &run.spec,
            normalization: run.normalization.to_string(),
            center: r.center,
            scale: r.scale,
            ks_statistic: r.ks_statistic,
        })),
        Results::Moments(rows) => rows_to_csv(rows.iter().flat_map(|row| {
            (2..=row.stats.max_order).map(move |k| MomentCsvRow {
                n: row.n,
                mean: row.stats.mean,
                k,
                central_moment: row.stats.central_moment(k).unwrap_or(f64::NAN),
            })
        })),
        Results::Model(report) => rows_to_csv(report.moments.iter().flat_map(|m| {
            [
                ("exact", m.exact_central_moment),
                ("leading", m.leading_term_sum),
            ]
            .map(|(kind, value)| ModelRow {
                model: report.model.name(),
                n: m.n,
                k: m.k,
                exact_or_leading: kind,
                value,
                mc_estimate: m.monte_carlo_estimate,
                mc_stderr: m.monte_carlo_stderr,
                samples: m.samples,
                seed: m.seed,
            })
        })),
        Results::Match(report) => rows_to_csv(report.rows.iter().map(|r| MatchCsvRow {
            spec: &report.spec,
            model: report.model.name(),
            n: report.n,
            k: r.k,
            arithmetic: r.arithmetic,
            model_exact: r.model_exact,
            model_leading_term: r.model_leading_term,
            paper_asymptote: r.paper_asymptote,
            discrepancy: r.discrepancy,
        })),
        Results::Turan(report) => rows_to_csv(report.points.iter().map(|p| TuranRow {
            spec: &report.spec,
            n: p.n,
            mean: p.mean,
            variance: p.variance,
            ratio: p.ratio,
            note: report.hypothesis_note.as_deref(),
        })),
    }
}
