//! Synthetic data generation and order-log/panel file I/O.
//!
//! The order generator produces cluster-structured baskets: sku popularity
//! follows a Zipf law, the catalog is partitioned into contiguous id blocks
//! ("clusters"), and additional items of a basket are drawn from the first
//! item's block with a configurable affinity. That reproduces the shape that
//! makes assortment selection interesting: popular skus frequently co-occur
//! with unpopular skus from the same block, so picking skus one by one on
//! frequency alone strands multi-item orders.
//!
//! The demand generator emits independent per-(sku, location, period) counts
//! with weekly-style seasonality, promotion spikes, zero-inflation, and an
//! order-up-to replenishment stream for the RDC. Everything is deterministic
//! in the configured seed.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::Poisson;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{DemandPanel, LocationId, OrderBook, OrderType, Sku, SkuId, RDC};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderGenConfig {
    pub n_skus: usize,
    /// Orders to draw (per call; `gen_order_history` draws this many per day).
    pub n_orders: usize,
    /// Popularity decay: sku at rank i gets weight (i+1)^-zipf_exponent.
    pub zipf_exponent: f64,
    /// Probability of an order having 1, 2, ... items; must sum to 1.
    pub order_size_dist: Vec<f64>,
    pub n_clusters: usize,
    /// Probability that each additional basket item stays in the first
    /// item's cluster rather than being drawn catalog-wide.
    pub intra_cluster_prob: f64,
    pub seed: u64,
}

impl OrderGenConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_skus == 0 {
            return Err(Error::InvalidConfig("n_skus must be positive".into()));
        }
        if !self.zipf_exponent.is_finite() || self.zipf_exponent <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "zipf_exponent must be positive, got {}",
                self.zipf_exponent
            )));
        }
        if self.order_size_dist.is_empty() {
            return Err(Error::InvalidConfig("order_size_dist is empty".into()));
        }
        if self.order_size_dist.len() > self.n_skus {
            return Err(Error::InvalidConfig(format!(
                "max order size {} exceeds n_skus {}",
                self.order_size_dist.len(),
                self.n_skus
            )));
        }
        let mut sum = 0.0;
        for &p in &self.order_size_dist {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidConfig(format!(
                    "order size probability {p} outside [0, 1]"
                )));
            }
            sum += p;
        }
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!(
                "order_size_dist sums to {sum}, expected 1"
            )));
        }
        if self.n_clusters == 0 || self.n_clusters > self.n_skus {
            return Err(Error::InvalidConfig(format!(
                "n_clusters must be in 1..={}, got {}",
                self.n_skus, self.n_clusters
            )));
        }
        if !(0.0..=1.0).contains(&self.intra_cluster_prob) {
            return Err(Error::InvalidConfig(format!(
                "intra_cluster_prob {} outside [0, 1]",
                self.intra_cluster_prob
            )));
        }
        Ok(())
    }

    fn block_size(&self) -> usize {
        self.n_skus.div_ceil(self.n_clusters)
    }

    fn cluster_of(&self, sku: usize) -> usize {
        sku / self.block_size()
    }

    fn cluster_range(&self, cluster: usize) -> std::ops::Range<usize> {
        let b = self.block_size();
        (cluster * b)..((cluster + 1) * b).min(self.n_skus)
    }
}

fn zipf_weights(n: usize, exponent: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|i| ((i + 1) as f64).powf(-exponent)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// Draw one sku from `pool`, excluding `chosen`. Rejection sampling against
/// the precomputed index covers the common case; after repeated collisions
/// (small pools, large baskets) it falls back to an exact draw over the
/// remaining candidates.
fn draw_distinct(
    rng: &mut ChaCha8Rng,
    pool: std::ops::Range<usize>,
    index: &WeightedIndex<f64>,
    weights: &[f64],
    chosen: &BTreeSet<SkuId>,
) -> Option<SkuId> {
    for _ in 0..64 {
        let sku = (pool.start + index.sample(rng)) as SkuId;
        if !chosen.contains(&sku) {
            return Some(sku);
        }
    }
    let candidates: Vec<usize> = pool.filter(|i| !chosen.contains(&(*i as SkuId))).collect();
    if candidates.is_empty() {
        return None;
    }
    let fallback = WeightedIndex::new(candidates.iter().map(|&i| weights[i]))
        .expect("candidate weights are positive");
    Some(candidates[fallback.sample(rng)] as SkuId)
}

struct OrderSampler<'a> {
    cfg: &'a OrderGenConfig,
    weights: Vec<f64>,
    global: WeightedIndex<f64>,
    per_cluster: Vec<WeightedIndex<f64>>,
    size_dist: WeightedIndex<f64>,
}

impl<'a> OrderSampler<'a> {
    fn new(cfg: &'a OrderGenConfig) -> Self {
        let weights = zipf_weights(cfg.n_skus, cfg.zipf_exponent);
        let global = WeightedIndex::new(&weights).expect("zipf weights are positive");
        let n_clusters = cfg.n_skus.div_ceil(cfg.block_size());
        let per_cluster = (0..n_clusters)
            .map(|c| {
                WeightedIndex::new(cfg.cluster_range(c).map(|i| weights[i]))
                    .expect("cluster weights are positive")
            })
            .collect();
        let size_dist =
            WeightedIndex::new(&cfg.order_size_dist).expect("size distribution sums to 1");
        OrderSampler {
            cfg,
            weights,
            global,
            per_cluster,
            size_dist,
        }
    }

    fn catalog(&self) -> Vec<Sku> {
        (0..self.cfg.n_skus)
            .map(|i| Sku {
                id: i as SkuId,
                category_id: self.cfg.cluster_of(i) as u32,
                popularity_weight: self.weights[i],
            })
            .collect()
    }

    fn draw_order(&self, rng: &mut ChaCha8Rng) -> Vec<SkuId> {
        let size = 1 + self.size_dist.sample(rng);
        let first = self.global.sample(rng) as SkuId;
        let cluster = self.cfg.cluster_of(first as usize);
        let mut chosen = BTreeSet::from([first]);
        while chosen.len() < size {
            let intra = self.cfg.intra_cluster_prob > 0.0
                && rng.random_bool(self.cfg.intra_cluster_prob);
            let pick = if intra {
                draw_distinct(
                    rng,
                    self.cfg.cluster_range(cluster),
                    &self.per_cluster[cluster],
                    &self.weights,
                    &chosen,
                )
            } else {
                None
            };
            // Cluster exhausted or the catalog-wide branch was taken.
            let pick = pick.or_else(|| {
                draw_distinct(rng, 0..self.cfg.n_skus, &self.global, &self.weights, &chosen)
            });
            match pick {
                Some(sku) => {
                    chosen.insert(sku);
                }
                None => break,
            }
        }
        chosen.into_iter().collect()
    }
}

/// Generate one aggregated order book. Deterministic in `cfg.seed`; the sum
/// of all order-type counts equals `cfg.n_orders` exactly.
pub fn gen_order_book(cfg: &OrderGenConfig) -> Result<OrderBook> {
    cfg.validate()?;
    let sampler = OrderSampler::new(cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut orders = Vec::with_capacity(cfg.n_orders);
    for _ in 0..cfg.n_orders {
        orders.push(OrderType::new(sampler.draw_order(&mut rng), 1)?);
    }
    OrderBook::new(sampler.catalog(), orders)
}

/// One order book per day over a shared catalog, each day on its own RNG
/// stream derived from the base seed. Day indices feed the per-sku count
/// series used for frequency forecasting.
pub fn gen_order_history(cfg: &OrderGenConfig, days: usize) -> Result<Vec<OrderBook>> {
    cfg.validate()?;
    let mut books = Vec::with_capacity(days);
    for day in 0..days {
        let mut day_cfg = cfg.clone();
        day_cfg.seed = cfg
            .seed
            .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(day as u64 + 1));
        books.push(gen_order_book(&day_cfg)?);
    }
    Ok(books)
}

/// Per-sku daily order frequency across a dated history: entry `[sku][day]`
/// is the number of orders that day containing the sku. Every catalog sku
/// gets a series, zeros included.
pub fn daily_sku_counts(books: &[OrderBook]) -> BTreeMap<SkuId, Vec<f64>> {
    let mut out: BTreeMap<SkuId, Vec<f64>> = BTreeMap::new();
    if let Some(first) = books.first() {
        for id in first.sku_ids() {
            out.insert(id, vec![0.0; books.len()]);
        }
    }
    for (day, book) in books.iter().enumerate() {
        for order in book.orders() {
            for &sku in order.skus() {
                if let Some(series) = out.get_mut(&sku) {
                    series[day] += order.count as f64;
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandGenConfig {
    pub n_skus: usize,
    pub n_fdcs: usize,
    pub horizon: usize,
    /// Mean daily demand per (sku, FDC) before seasonality and promotions.
    pub base_rate: f64,
    /// Probability a (sku, location, period) cell is forced to zero. The
    /// overall mean is (1 - sparsity) * rate.
    pub sparsity: f64,
    pub season_period: usize,
    pub season_amplitude: f64,
    pub promo_days: Vec<usize>,
    pub promo_uplift: f64,
    /// RDC direct demand as a fraction of the combined FDC mean.
    pub rdc_share: f64,
    pub replenish_every: usize,
    /// Order-up-to level per sku for the exogenous RDC replenishment stream.
    pub order_up_to: u64,
    pub seed: u64,
}

impl DemandGenConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_skus == 0 || self.n_fdcs == 0 || self.horizon == 0 {
            return Err(Error::InvalidConfig(
                "n_skus, n_fdcs, and horizon must all be positive".into(),
            ));
        }
        if !(self.base_rate >= 0.0 && self.base_rate.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "base_rate must be finite and non-negative, got {}",
                self.base_rate
            )));
        }
        if !(0.0..=1.0).contains(&self.sparsity) {
            return Err(Error::InvalidConfig(format!(
                "sparsity {} outside [0, 1]",
                self.sparsity
            )));
        }
        if self.season_period == 0 {
            return Err(Error::InvalidConfig("season_period must be positive".into()));
        }
        if !(self.season_amplitude >= 0.0 && self.season_amplitude.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "season_amplitude must be finite and non-negative, got {}",
                self.season_amplitude
            )));
        }
        for &day in &self.promo_days {
            if day >= self.horizon {
                return Err(Error::InvalidConfig(format!(
                    "promo day {day} outside horizon {}",
                    self.horizon
                )));
            }
        }
        if !(self.promo_uplift >= 0.0 && self.promo_uplift.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "promo_uplift must be finite and non-negative, got {}",
                self.promo_uplift
            )));
        }
        if !(0.0..=1.0).contains(&self.rdc_share) {
            return Err(Error::InvalidConfig(format!(
                "rdc_share {} outside [0, 1]",
                self.rdc_share
            )));
        }
        if self.replenish_every == 0 {
            return Err(Error::InvalidConfig(
                "replenish_every must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn fdc_ids(&self) -> Vec<LocationId> {
        (1..=self.n_fdcs as LocationId).collect()
    }

    pub fn sku_ids(&self) -> Vec<SkuId> {
        (0..self.n_skus as SkuId).collect()
    }
}

fn sample_count(rng: &mut ChaCha8Rng, mean: f64, sparsity: f64) -> u64 {
    if sparsity > 0.0 && rng.random_bool(sparsity) {
        return 0;
    }
    if mean <= 0.0 {
        return 0;
    }
    let poisson = Poisson::new(mean).expect("positive finite mean");
    poisson.sample(rng) as u64
}

/// Generate a demand panel plus its RDC replenishment stream.
///
/// Replenishment follows an order-up-to rule on a notional RDC inventory
/// that starts at `order_up_to` and depletes by total generated system
/// demand; every `replenish_every` periods it is refilled to the level. The
/// stream is exogenous: the simulator credits it as given, whatever the
/// policy does.
pub fn gen_demand_panel(cfg: &DemandGenConfig) -> Result<DemandPanel> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut panel = DemandPanel::new(cfg.horizon);
    let promo: BTreeSet<usize> = cfg.promo_days.iter().copied().collect();
    let mut notional: Vec<i64> = vec![cfg.order_up_to as i64; cfg.n_skus];
    for t in 0..cfg.horizon {
        let season = (1.0
            + cfg.season_amplitude
                * (2.0 * std::f64::consts::PI * t as f64 / cfg.season_period as f64).sin())
        .max(0.0);
        let uplift = if promo.contains(&t) { cfg.promo_uplift } else { 1.0 };
        let fdc_mean = cfg.base_rate * season * uplift;
        let rdc_mean = cfg.rdc_share * cfg.n_fdcs as f64 * fdc_mean;
        for sku in 0..cfg.n_skus as SkuId {
            let mut system: u64 = 0;
            let qty = sample_count(&mut rng, rdc_mean, cfg.sparsity);
            system += qty;
            panel.set_demand(t, sku, RDC, qty)?;
            for fdc in cfg.fdc_ids() {
                let qty = sample_count(&mut rng, fdc_mean, cfg.sparsity);
                system += qty;
                panel.set_demand(t, sku, fdc, qty)?;
            }
            if t % cfg.replenish_every == 0 {
                let refill = (cfg.order_up_to as i64 - notional[sku as usize]).max(0) as u64;
                panel.set_replenishment(t, sku, refill)?;
                notional[sku as usize] += refill as i64;
            }
            notional[sku as usize] -= system as i64;
        }
    }
    Ok(panel)
}

fn parse_field<T: std::str::FromStr>(
    raw: &str,
    what: &str,
    path: &str,
    line: usize,
) -> Result<T> {
    raw.trim().parse().map_err(|_| Error::Parse {
        path: path.to_string(),
        line,
        msg: format!("invalid {what}: {raw:?}"),
    })
}

/// Read an order log (`order_id,sku_id`, one row per order line) into an
/// aggregated book. Rows of one order form its sku set; duplicate sku sets
/// across orders merge by count. The catalog is the set of skus seen.
pub fn ingest_order_log(path: impl AsRef<Path>) -> Result<OrderBook> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(display.clone(), e))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim_end() == "order_id,sku_id" => {}
        Some((_, header)) => {
            return Err(Error::Parse {
                path: display,
                line: 1,
                msg: format!("expected header \"order_id,sku_id\", got {header:?}"),
            })
        }
        None => {
            return Err(Error::Parse {
                path: display,
                line: 1,
                msg: "empty order log".into(),
            })
        }
    }
    let mut grouped: BTreeMap<u64, Vec<SkuId>> = BTreeMap::new();
    for (idx, raw) in lines {
        let line_no = idx + 1;
        let row = raw.trim_end();
        if row.is_empty() {
            continue;
        }
        let mut fields = row.split(',');
        let (order, sku) = match (fields.next(), fields.next(), fields.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => {
                return Err(Error::Parse {
                    path: display,
                    line: line_no,
                    msg: format!("expected 2 fields, got {row:?}"),
                })
            }
        };
        let order: u64 = parse_field(order, "order id", &display, line_no)?;
        let sku: SkuId = parse_field(sku, "sku id", &display, line_no)?;
        grouped.entry(order).or_default().push(sku);
    }
    if grouped.is_empty() {
        return Err(Error::Parse {
            path: display,
            line: 1,
            msg: "order log has a header but no rows".into(),
        });
    }
    let ids: BTreeSet<SkuId> = grouped.values().flatten().copied().collect();
    let orders = grouped
        .into_values()
        .map(|skus| OrderType::new(skus, 1))
        .collect::<Result<Vec<_>>>()?;
    OrderBook::from_ids(ids, orders)
}

/// Write a book as an order log, expanding each order type `count` times
/// with sequential order ids. Ingesting the result reconstructs the same
/// order types; catalog metadata and skus absent from every order are not
/// representable in this format and do not survive the round trip.
pub fn write_order_log(book: &OrderBook, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("order_id,sku_id\n");
    let mut order_id: u64 = 0;
    for order in book.orders() {
        for _ in 0..order.count {
            for sku in order.skus() {
                writeln!(out, "{order_id},{sku}").expect("string write");
            }
            order_id += 1;
        }
    }
    std::fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Demand panel CSV: `period,location,sku_id,qty`, sorted by those columns.
pub fn write_demand_csv(panel: &DemandPanel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut rows: Vec<(usize, LocationId, SkuId, u64)> = panel
        .iter_demand()
        .map(|(t, sku, loc, qty)| (t, loc, sku, qty))
        .collect();
    rows.sort_unstable();
    let mut out = String::from("period,location,sku_id,qty\n");
    for (t, loc, sku, qty) in rows {
        writeln!(out, "{t},{loc},{sku},{qty}").expect("string write");
    }
    std::fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Replenishment CSV: `period,sku_id,qty`, sorted.
pub fn write_replenishment_csv(panel: &DemandPanel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("period,sku_id,qty\n");
    for (t, sku, qty) in panel.iter_replenishment() {
        writeln!(out, "{t},{sku},{qty}").expect("string write");
    }
    std::fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Load a demand panel from its CSV pair. The horizon is the smallest value
/// covering every row, or `min_horizon` if larger.
pub fn read_demand_csv(
    demand_path: impl AsRef<Path>,
    replenishment_path: Option<&Path>,
    min_horizon: usize,
) -> Result<DemandPanel> {
    fn rows_of(path: &Path, header: &str, fields: usize) -> Result<Vec<Vec<u64>>> {
        let display = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(display.clone(), e))?;
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim_end() == header => {}
            other => {
                return Err(Error::Parse {
                    path: display,
                    line: 1,
                    msg: format!(
                        "expected header {header:?}, got {:?}",
                        other.map(|(_, h)| h).unwrap_or("")
                    ),
                })
            }
        }
        let mut rows = Vec::new();
        for (idx, raw) in lines {
            let row = raw.trim_end();
            if row.is_empty() {
                continue;
            }
            let parts: Vec<&str> = row.split(',').collect();
            if parts.len() != fields {
                return Err(Error::Parse {
                    path: display,
                    line: idx + 1,
                    msg: format!("expected {fields} fields, got {row:?}"),
                });
            }
            let mut values = Vec::with_capacity(fields);
            for part in parts {
                values.push(parse_field(part, "integer", &display, idx + 1)?);
            }
            rows.push(values);
        }
        Ok(rows)
    }

    let demand_rows = rows_of(demand_path.as_ref(), "period,location,sku_id,qty", 4)?;
    let replen_rows = match replenishment_path {
        Some(p) => rows_of(p, "period,sku_id,qty", 3)?,
        None => Vec::new(),
    };
    let horizon = demand_rows
        .iter()
        .map(|r| r[0] as usize + 1)
        .chain(replen_rows.iter().map(|r| r[0] as usize + 1))
        .max()
        .unwrap_or(0)
        .max(min_horizon);
    let mut panel = DemandPanel::new(horizon);
    for row in demand_rows {
        let prev = panel.demand_at(row[0] as usize, row[2] as SkuId, row[1] as LocationId);
        panel.set_demand(
            row[0] as usize,
            row[2] as SkuId,
            row[1] as LocationId,
            prev + row[3],
        )?;
    }
    for row in replen_rows {
        let prev = panel.replenishment_at(row[0] as usize, row[1] as SkuId);
        panel.set_replenishment(row[0] as usize, row[1] as SkuId, prev + row[2])?;
    }
    Ok(panel)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn order_cfg() -> OrderGenConfig {
        OrderGenConfig {
            n_skus: 40,
            n_orders: 500,
            zipf_exponent: 1.0,
            order_size_dist: vec![0.5, 0.3, 0.2],
            n_clusters: 8,
            intra_cluster_prob: 0.8,
            seed: 11,
        }
    }

    #[test]
    fn order_book_is_deterministic_and_counts_match() {
        let a = gen_order_book(&order_cfg()).unwrap();
        let b = gen_order_book(&order_cfg()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.total_orders(), 500);
    }

    #[test]
    fn rejects_order_size_beyond_catalog() {
        let mut cfg = order_cfg();
        cfg.n_skus = 2;
        cfg.n_clusters = 1;
        assert!(matches!(
            gen_order_book(&cfg),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn rejects_size_dist_not_summing_to_one() {
        let mut cfg = order_cfg();
        cfg.order_size_dist = vec![0.5, 0.4];
        assert!(gen_order_book(&cfg).is_err());
    }

    #[test]
    fn rank_one_frequency_tracks_zipf_weight() {
        // Singleton orders from a single cluster isolate the marginal draw
        // distribution, which should match the normalized Zipf weights.
        let cfg = OrderGenConfig {
            n_skus: 1000,
            n_orders: 100_000,
            zipf_exponent: 1.2,
            order_size_dist: vec![1.0],
            n_clusters: 1,
            intra_cluster_prob: 0.0,
            seed: 5,
        };
        let book = gen_order_book(&cfg).unwrap();
        let rank1 = book
            .orders()
            .iter()
            .filter(|o| o.skus() == [0])
            .map(|o| o.count)
            .sum::<u64>() as f64;
        let expected = zipf_weights(1000, 1.2)[0] * 100_000.0;
        assert!(
            (rank1 - expected).abs() / expected < 0.15,
            "rank-1 count {rank1} vs zipf prediction {expected}"
        );
    }

    #[test]
    fn full_affinity_keeps_baskets_inside_one_cluster() {
        let cfg = OrderGenConfig {
            n_skus: 20,
            n_orders: 300,
            zipf_exponent: 0.8,
            order_size_dist: vec![0.0, 0.5, 0.5],
            n_clusters: 5,
            intra_cluster_prob: 1.0,
            seed: 3,
        };
        let book = gen_order_book(&cfg).unwrap();
        for order in book.orders() {
            let clusters: BTreeSet<usize> = order
                .skus()
                .iter()
                .map(|&s| cfg.cluster_of(s as usize))
                .collect();
            assert_eq!(clusters.len(), 1, "basket {:?} spans clusters", order.skus());
        }
    }

    #[test]
    fn history_shares_catalog_and_varies_by_day() {
        let books = gen_order_history(&order_cfg(), 3).unwrap();
        assert_eq!(books.len(), 3);
        assert_eq!(
            books[0].sku_ids().collect::<Vec<_>>(),
            books[2].sku_ids().collect::<Vec<_>>()
        );
        assert_ne!(books[0], books[1]);
        let counts = daily_sku_counts(&books);
        assert_eq!(counts.len(), 40);
        assert!(counts.values().all(|series| series.len() == 3));
    }

    fn demand_cfg() -> DemandGenConfig {
        DemandGenConfig {
            n_skus: 5,
            n_fdcs: 2,
            horizon: 200,
            base_rate: 4.0,
            sparsity: 0.0,
            season_period: 7,
            season_amplitude: 0.0,
            promo_days: vec![],
            promo_uplift: 1.0,
            rdc_share: 0.5,
            replenish_every: 7,
            order_up_to: 500,
            seed: 21,
        }
    }

    #[test]
    fn panel_is_deterministic() {
        assert_eq!(
            gen_demand_panel(&demand_cfg()).unwrap(),
            gen_demand_panel(&demand_cfg()).unwrap()
        );
    }

    #[test]
    fn stationary_series_mean_matches_base_rate() {
        let cfg = demand_cfg();
        let panel = gen_demand_panel(&cfg).unwrap();
        let se = (cfg.base_rate / cfg.horizon as f64).sqrt();
        for sku in cfg.sku_ids() {
            for fdc in cfg.fdc_ids() {
                let total: u64 = (0..cfg.horizon).map(|t| panel.demand_at(t, sku, fdc)).sum();
                let mean = total as f64 / cfg.horizon as f64;
                assert!(
                    (mean - cfg.base_rate).abs() <= 3.0 * se,
                    "sku {sku} fdc {fdc}: mean {mean} vs rate {}",
                    cfg.base_rate
                );
            }
        }
    }

    #[test]
    fn full_sparsity_silences_everything() {
        let mut cfg = demand_cfg();
        cfg.sparsity = 1.0;
        let panel = gen_demand_panel(&cfg).unwrap();
        assert_eq!(panel.total_demand(), 0);
    }

    #[test]
    fn promo_days_scale_demand_by_uplift() {
        let mut cfg = demand_cfg();
        cfg.promo_days = (0..cfg.horizon).step_by(4).collect();
        cfg.promo_uplift = 2.0;
        let panel = gen_demand_panel(&cfg).unwrap();
        let promo: BTreeSet<usize> = cfg.promo_days.iter().copied().collect();
        let mut promo_sum = (0u64, 0u64);
        let mut base_sum = (0u64, 0u64);
        for (t, _, loc, qty) in panel.iter_demand() {
            if loc == RDC {
                continue;
            }
            let bucket = if promo.contains(&t) { &mut promo_sum } else { &mut base_sum };
            bucket.0 += qty;
            bucket.1 += 1;
        }
        let promo_periods = promo.len() as f64;
        let base_periods = (cfg.horizon - promo.len()) as f64;
        let ratio = (promo_sum.0 as f64 / promo_periods) / (base_sum.0 as f64 / base_periods);
        assert!(
            (ratio - 2.0).abs() < 0.25,
            "promo/base mean ratio {ratio} vs uplift 2"
        );
    }

    #[test]
    fn replenishment_follows_order_up_to_cadence() {
        let cfg = demand_cfg();
        let panel = gen_demand_panel(&cfg).unwrap();
        for (t, _, qty) in panel.iter_replenishment() {
            assert_eq!(t % cfg.replenish_every, 0);
            assert!(qty <= cfg.order_up_to);
        }
        // Refills track consumption: over a long horizon some must occur.
        assert!(panel.iter_replenishment().count() > 0);
    }

    #[test]
    fn order_log_round_trip_is_fixed_point() {
        let dir = std::env::temp_dir().join(format!("echelon-datagen-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("orders.csv");
        let book = gen_order_book(&order_cfg()).unwrap();
        write_order_log(&book, &path).unwrap();
        let once = ingest_order_log(&path).unwrap();
        write_order_log(&once, &path).unwrap();
        let twice = ingest_order_log(&path).unwrap();
        assert_eq!(once, twice);
        assert_eq!(once.orders(), book.orders());
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn ingest_reports_malformed_row_with_line_number() {
        let dir = std::env::temp_dir().join(format!("echelon-ingest-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.csv");
        std::fs::write(&path, "order_id,sku_id\n0,1\nnot-a-row\n").unwrap();
        match ingest_order_log(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
        std::fs::write(&path, "order_id,sku_id\n").unwrap();
        assert!(matches!(ingest_order_log(&path), Err(Error::Parse { .. })));
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn demand_csv_round_trips() {
        let dir = std::env::temp_dir().join(format!("echelon-panel-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let d = dir.join("demand.csv");
        let r = dir.join("replenishment.csv");
        let panel = gen_demand_panel(&demand_cfg()).unwrap();
        write_demand_csv(&panel, &d).unwrap();
        write_replenishment_csv(&panel, &r).unwrap();
        let back = read_demand_csv(&d, Some(r.as_path()), demand_cfg().horizon).unwrap();
        assert_eq!(back, panel);
        std::fs::remove_dir_all(&dir).ok();
    }
}
