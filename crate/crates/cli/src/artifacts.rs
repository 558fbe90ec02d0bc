//! Artifact readers and writers.
//!
//! Every emitted file is plain text with a fixed column order and no
//! timestamps or environment echoes, so a rerun with the same config and
//! seed reproduces each file byte for byte. Floats are written in Rust's
//! shortest round-trip form; parsing a table cell back recovers the exact
//! value that produced it.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::Context;
use echelon_core::allocation::{PolicyParams, SearchRow};
use echelon_core::assortment::RatioSweep;
use echelon_core::{Assortment, SkuId};
use serde::Serialize;

/// One fulfillment-table row: a method evaluated on both splits.
#[derive(Debug, Clone, Serialize)]
pub struct FulfillmentRow {
    pub method: String,
    pub k: usize,
    pub train_covered: u64,
    pub train_rate: f64,
    pub test_covered: u64,
    pub test_rate: f64,
}

/// One policy-table row: test-split service metrics and costs.
#[derive(Debug, Clone, Serialize)]
pub struct PolicyRow {
    pub policy: String,
    pub fdc_fulfillment: f64,
    pub regional_loss: f64,
    pub loss_ratio: Option<f64>,
    pub total_cost: f64,
    pub transfer_cost: f64,
    pub spillover_cost: f64,
    pub lost_sales_cost: f64,
}

pub fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)
            .with_context(|| format!("creating {}", parent.display()))?;
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn write_json(path: &Path, value: &impl Serialize) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

fn csv(header: &str, rows: impl IntoIterator<Item = String>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row);
        out.push('\n');
    }
    out
}

pub fn write_assortment_csv(path: &Path, assortment: &Assortment) -> anyhow::Result<()> {
    write_text(
        path,
        &csv(
            "sku_id",
            assortment.selected().iter().map(|sku| sku.to_string()),
        ),
    )
}

pub fn read_assortment_csv(path: &Path) -> anyhow::Result<Assortment> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines();
    anyhow::ensure!(
        lines.next().map(str::trim_end) == Some("sku_id"),
        "{}: expected header \"sku_id\"",
        path.display()
    );
    let mut selected = std::collections::BTreeSet::new();
    for (idx, line) in lines.enumerate() {
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let sku: SkuId = line
            .parse()
            .with_context(|| format!("{}:{}: invalid sku id {line:?}", path.display(), idx + 2))?;
        selected.insert(sku);
    }
    let cap = selected.len();
    Ok(Assortment::new(selected, cap)?)
}

/// Daily per-sku order counts, zeros included, so frequency forecasts are
/// reproducible from the file alone.
pub fn write_daily_counts_csv(
    path: &Path,
    counts: &BTreeMap<SkuId, Vec<f64>>,
) -> anyhow::Result<()> {
    let days = counts.values().map(Vec::len).max().unwrap_or(0);
    let mut rows = Vec::new();
    for day in 0..days {
        for (sku, series) in counts {
            rows.push(format!("{day},{sku},{}", series[day]));
        }
    }
    write_text(path, &csv("day,sku_id,orders", rows))
}

pub fn read_daily_counts_csv(path: &Path) -> anyhow::Result<BTreeMap<SkuId, Vec<f64>>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines();
    anyhow::ensure!(
        lines.next().map(str::trim_end) == Some("day,sku_id,orders"),
        "{}: expected header \"day,sku_id,orders\"",
        path.display()
    );
    let mut cells: BTreeMap<SkuId, BTreeMap<usize, f64>> = BTreeMap::new();
    let mut days = 0usize;
    for (idx, line) in lines.enumerate() {
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let bad = || format!("{}:{}: invalid row {line:?}", path.display(), idx + 2);
        let mut parts = line.split(',');
        let day: usize = parts.next().unwrap_or("").parse().with_context(bad)?;
        let sku: SkuId = parts.next().unwrap_or("").parse().with_context(bad)?;
        let orders: f64 = parts.next().unwrap_or("").parse().with_context(bad)?;
        anyhow::ensure!(parts.next().is_none(), bad());
        days = days.max(day + 1);
        cells.entry(sku).or_default().insert(day, orders);
    }
    Ok(cells
        .into_iter()
        .map(|(sku, by_day)| {
            let mut series = vec![0.0; days];
            for (day, v) in by_day {
                series[day] = v;
            }
            (sku, series)
        })
        .collect())
}

pub fn write_fulfillment_table(path: &Path, rows: &[FulfillmentRow]) -> anyhow::Result<()> {
    write_text(
        path,
        &csv(
            "method,k,train_covered,train_rate,test_covered,test_rate",
            rows.iter().map(|r| {
                format!(
                    "{},{},{},{},{},{}",
                    r.method, r.k, r.train_covered, r.train_rate, r.test_covered, r.test_rate
                )
            }),
        ),
    )
}

pub fn write_policy_table(path: &Path, rows: &[PolicyRow]) -> anyhow::Result<()> {
    write_text(
        path,
        &csv(
            "policy,fdc_fulfillment,regional_loss,loss_ratio,total_cost",
            rows.iter().map(|r| {
                format!(
                    "{},{},{},{},{}",
                    r.policy,
                    r.fdc_fulfillment,
                    r.regional_loss,
                    r.loss_ratio.map(|v| v.to_string()).unwrap_or_default(),
                    r.total_cost
                )
            }),
        ),
    )
}

pub fn write_sweep_csv(path: &Path, sweep: &RatioSweep) -> anyhow::Result<()> {
    write_text(
        path,
        &csv(
            "r,train_rate",
            sweep.sweep.iter().map(|(r, rate)| format!("{r},{rate}")),
        ),
    )
}

pub fn write_params_csv(path: &Path, params: &PolicyParams) -> anyhow::Result<()> {
    let keys: std::collections::BTreeSet<_> =
        params.ss.keys().chain(params.ti.keys()).copied().collect();
    write_text(
        path,
        &csv(
            "sku_id,location,ss,ti",
            keys.iter().map(|&(sku, loc)| {
                format!(
                    "{sku},{loc},{},{}",
                    params.ss_at(sku, loc),
                    params.ti_at(sku, loc)
                )
            }),
        ),
    )
}

pub fn write_search_csv(path: &Path, table: &[SearchRow]) -> anyhow::Result<()> {
    write_text(
        path,
        &csv(
            "z,d,mean_cost",
            table
                .iter()
                .map(|row| format!("{},{},{}", row.z, row.d, row.mean_cost)),
        ),
    )
}

pub fn write_trace_csv(path: &Path, trace: &[f64]) -> anyhow::Result<()> {
    write_text(
        path,
        &csv(
            "iteration,loss",
            trace
                .iter()
                .enumerate()
                .map(|(i, loss)| format!("{i},{loss}")),
        ),
    )
}

/// Line plot of the hybrid-ratio sweep: blend ratio on the x axis, training
/// fulfillment rate on the y axis, best point circled.
pub fn sweep_svg(sweep: &RatioSweep) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const M: f64 = 50.0;
    let lo = sweep
        .sweep
        .iter()
        .map(|&(_, rate)| rate)
        .fold(f64::INFINITY, f64::min);
    let hi = sweep
        .sweep
        .iter()
        .map(|&(_, rate)| rate)
        .fold(f64::NEG_INFINITY, f64::max);
    let pad = ((hi - lo) * 0.1).max(1e-6);
    let (lo, hi) = (lo - pad, hi + pad);
    let x = |r: f64| M + r * (W - 2.0 * M);
    let y = |rate: f64| H - M - (rate - lo) / (hi - lo) * (H - 2.0 * M);
    let points: Vec<String> = sweep
        .sweep
        .iter()
        .map(|&(r, rate)| format!("{:.2},{:.2}", x(r), y(rate)))
        .collect();
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {W} {H}\" \
         font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    svg.push_str(&format!(
        "  <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n"
    ));
    svg.push_str(&format!(
        "  <line x1=\"{M}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"black\"/>\n",
        H - M,
        W - M
    ));
    svg.push_str(&format!(
        "  <line x1=\"{M}\" y1=\"{M}\" x2=\"{M}\" y2=\"{}\" stroke=\"black\"/>\n",
        H - M
    ));
    for r in [0.0, 0.5, 1.0] {
        svg.push_str(&format!(
            "  <text x=\"{:.2}\" y=\"{}\" text-anchor=\"middle\">{r}</text>\n",
            x(r),
            H - M + 20.0
        ));
    }
    for rate in [lo + pad, hi - pad] {
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{:.2}\" text-anchor=\"end\">{rate:.4}</text>\n",
            M - 6.0,
            y(rate) + 4.0
        ));
    }
    svg.push_str(&format!(
        "  <text x=\"{:.2}\" y=\"{}\" text-anchor=\"middle\">blend ratio</text>\n",
        W / 2.0,
        H - 10.0
    ));
    svg.push_str(&format!(
        "  <polyline points=\"{}\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\"/>\n",
        points.join(" ")
    ));
    svg.push_str(&format!(
        "  <circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"5\" fill=\"none\" stroke=\"crimson\" \
         stroke-width=\"2\"/>\n",
        x(sweep.best_ratio),
        y(sweep.best_rate)
    ));
    svg.push_str("</svg>\n");
    svg
}
