//! Run configuration: one TOML document describing a full experiment.
//!
//! Every field name in the file matches the struct field it fills, unknown
//! keys are rejected, and every section except `seed` has working defaults,
//! so a minimal config is just `seed = 7`. The same struct also drives the
//! library API; subcommands override single fields from flags.

use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::ValueEnum;
use echelon_core::datagen::{DemandGenConfig, OrderGenConfig};
use echelon_core::{LocationId, NetworkConfig};
use serde::{Deserialize, Serialize};

/// Assortment construction methods, in the order they appear in tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Top K skus by historical order frequency.
    Topk,
    /// Top K by forecast order frequency.
    Mltopk,
    /// Reverse exclusion of low-frequency survivors.
    Reverse,
    /// Tuned blend of the forecast ranking and the reverse survivors.
    Hybrid,
    /// Exhaustive optimum (tiny catalogs only).
    Exact,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Topk => "topk",
            Method::Mltopk => "mltopk",
            Method::Reverse => "reverse",
            Method::Hybrid => "hybrid",
            Method::Exact => "exact",
        }
    }
}

/// Transfer policies, in the order they appear in tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    /// Grid-searched safety-stock and target-inventory factors.
    Params,
    /// Forecast-chasing single-window policy.
    Myopic,
    /// Factors trained by coordinate descent on the composite loss.
    E2e,
}

impl PolicyKind {
    pub fn label(self) -> &'static str {
        match self {
            PolicyKind::Params => "params",
            PolicyKind::Myopic => "myopic",
            PolicyKind::E2e => "e2e",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Experiment label echoed into summaries; no semantic effect.
    #[serde(default = "default_experiment")]
    pub experiment: String,
    /// Master seed. Every generator and scenario stream derives from it.
    pub seed: u64,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default)]
    pub split: SplitSection,
    #[serde(default)]
    pub orders: OrdersSection,
    #[serde(default)]
    pub demand: DemandSection,
    #[serde(default)]
    pub assortment: AssortmentSection,
    #[serde(default)]
    pub network: NetworkSection,
    #[serde(default)]
    pub policy: PolicySection,
}

fn default_experiment() -> String {
    "synthetic".into()
}

fn default_out_dir() -> PathBuf {
    "out".into()
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            experiment: default_experiment(),
            seed: 7,
            out_dir: default_out_dir(),
            split: SplitSection::default(),
            orders: OrdersSection::default(),
            demand: DemandSection::default(),
            assortment: AssortmentSection::default(),
            network: NetworkSection::default(),
            policy: PolicySection::default(),
        }
    }
}

/// Contiguous train/test date split shared by orders and demand.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SplitSection {
    pub train_periods: usize,
    pub test_periods: usize,
}

impl Default for SplitSection {
    fn default() -> Self {
        SplitSection {
            train_periods: 28,
            test_periods: 14,
        }
    }
}

/// Knobs for the clustered order generator; seeds derive from the run seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OrdersSection {
    pub n_skus: usize,
    pub orders_per_day: usize,
    pub zipf_exponent: f64,
    /// Probability of basket size 1, 2, 3, ...
    pub order_size_dist: Vec<f64>,
    pub n_clusters: usize,
    pub intra_cluster_prob: f64,
}

impl Default for OrdersSection {
    fn default() -> Self {
        OrdersSection {
            n_skus: 300,
            orders_per_day: 600,
            zipf_exponent: 1.1,
            order_size_dist: vec![0.55, 0.3, 0.1, 0.05],
            n_clusters: 12,
            intra_cluster_prob: 0.8,
        }
    }
}

impl OrdersSection {
    pub fn to_core(&self, n_orders: usize, seed: u64) -> OrderGenConfig {
        OrderGenConfig {
            n_skus: self.n_skus,
            n_orders,
            zipf_exponent: self.zipf_exponent,
            order_size_dist: self.order_size_dist.clone(),
            n_clusters: self.n_clusters,
            intra_cluster_prob: self.intra_cluster_prob,
            seed,
        }
    }
}

/// Knobs for the unit-demand generator feeding the simulator.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DemandSection {
    pub n_skus: usize,
    pub n_fdcs: usize,
    pub base_rate: f64,
    pub sparsity: f64,
    pub season_period: usize,
    pub season_amplitude: f64,
    pub promo_days: Vec<usize>,
    pub promo_uplift: f64,
    pub rdc_share: f64,
    pub replenish_every: usize,
    pub order_up_to: u64,
}

impl Default for DemandSection {
    fn default() -> Self {
        DemandSection {
            n_skus: 40,
            n_fdcs: 3,
            base_rate: 3.0,
            sparsity: 0.2,
            season_period: 7,
            season_amplitude: 0.25,
            promo_days: Vec::new(),
            promo_uplift: 2.0,
            rdc_share: 0.3,
            replenish_every: 7,
            order_up_to: 400,
        }
    }
}

impl DemandSection {
    pub fn to_core(&self, horizon: usize, seed: u64) -> DemandGenConfig {
        DemandGenConfig {
            n_skus: self.n_skus,
            n_fdcs: self.n_fdcs,
            horizon,
            base_rate: self.base_rate,
            sparsity: self.sparsity,
            season_period: self.season_period,
            season_amplitude: self.season_amplitude,
            promo_days: self.promo_days.clone(),
            promo_uplift: self.promo_uplift,
            rdc_share: self.rdc_share,
            replenish_every: self.replenish_every,
            order_up_to: self.order_up_to,
            seed,
        }
    }

    pub fn fdc_ids(&self) -> Vec<LocationId> {
        (1..=self.n_fdcs as LocationId).collect()
    }
}

/// Assortment size and method selection. Exactly one of `k` and
/// `target_coverage` must be set; coverage resolves to the smallest K whose
/// frequency-ranked assortment reaches the target on training orders.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AssortmentSection {
    pub k: Option<usize>,
    pub target_coverage: Option<f64>,
    pub methods: Vec<Method>,
    pub ratio_grid: Vec<f64>,
    /// Adaptive batch divisor for reverse exclusion.
    pub batch_divisor: usize,
    /// Also render the ratio sweep as an SVG plot.
    pub emit_svg: bool,
}

impl Default for AssortmentSection {
    fn default() -> Self {
        AssortmentSection {
            k: None,
            target_coverage: Some(0.7),
            methods: vec![Method::Topk, Method::Mltopk, Method::Reverse, Method::Hybrid],
            ratio_grid: (0..=10).map(|i| i as f64 / 10.0).collect(),
            batch_divisor: 10,
            emit_svg: false,
        }
    }
}

/// Two-echelon network shape and unit costs. FDC ids come from
/// `demand.n_fdcs`; costs are uniform across FDCs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkSection {
    pub lead_time: usize,
    pub spillover_cost: f64,
    pub lost_sale_cost: f64,
    pub transfer_cost: f64,
    pub transfer_cap: Option<u64>,
}

impl Default for NetworkSection {
    fn default() -> Self {
        NetworkSection {
            lead_time: 2,
            spillover_cost: 2.0,
            lost_sale_cost: 6.0,
            transfer_cost: 0.5,
            transfer_cap: None,
        }
    }
}

impl NetworkSection {
    pub fn to_core(&self, fdc_ids: Vec<LocationId>) -> NetworkConfig {
        let mut network = NetworkConfig::uniform(
            fdc_ids,
            self.lead_time,
            self.spillover_cost,
            self.lost_sale_cost,
            self.transfer_cost,
        );
        network.transfer_cap = self.transfer_cap;
        network
    }
}

/// Policy selection, tuning grids, and the composite-loss weights.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PolicySection {
    pub kinds: Vec<PolicyKind>,
    pub review_period: usize,
    pub z_grid: Vec<f64>,
    pub d_grid: Vec<f64>,
    /// Demand sample paths shared across tuning candidates.
    pub scenarios: usize,
    /// Extra RDC units the myopic policy retains per sku.
    pub rdc_safety: u64,
    pub initial_z: f64,
    pub initial_d: f64,
    pub operational_weight: f64,
    pub forecast_weight: f64,
    pub safety_weight: f64,
    /// Loss-evaluation budget for descent training.
    pub budget: usize,
    pub z_step: f64,
    pub d_step: f64,
    pub min_step: f64,
}

impl Default for PolicySection {
    fn default() -> Self {
        PolicySection {
            kinds: vec![PolicyKind::Params, PolicyKind::Myopic, PolicyKind::E2e],
            review_period: 1,
            z_grid: vec![0.0, 0.5, 1.0, 1.5, 2.0],
            d_grid: vec![0.8, 1.0, 1.2],
            scenarios: 8,
            rdc_safety: 0,
            initial_z: 1.0,
            initial_d: 1.0,
            operational_weight: 1.0,
            forecast_weight: 0.0,
            safety_weight: 0.1,
            budget: 150,
            z_step: 0.5,
            d_step: 0.5,
            min_step: 1e-3,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::from_toml_str(&text).with_context(|| format!("config {}", path.display()))
    }

    /// Parse and validate a config document. A file that sets exactly one
    /// of `assortment.k` and `assortment.target_coverage` gets that choice;
    /// the other side's default is dropped rather than reported as a
    /// conflict.
    pub fn from_toml_str(text: &str) -> anyhow::Result<RunConfig> {
        let mut cfg: RunConfig = toml::from_str(text).context("parsing config")?;
        let raw: toml::Value = toml::from_str(text).context("parsing config")?;
        if let Some(section) = raw.get("assortment") {
            let has_k = section.get("k").is_some();
            let has_coverage = section.get("target_coverage").is_some();
            if has_k && !has_coverage {
                cfg.assortment.target_coverage = None;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        match (self.assortment.k, self.assortment.target_coverage) {
            (Some(_), Some(_)) => anyhow::bail!(
                "assortment.k and assortment.target_coverage are mutually exclusive"
            ),
            (None, None) => {
                anyhow::bail!("one of assortment.k or assortment.target_coverage is required")
            }
            _ => {}
        }
        if let Some(target) = self.assortment.target_coverage {
            if !(0.0..=1.0).contains(&target) {
                anyhow::bail!("target_coverage {target} outside [0, 1]");
            }
        }
        if self.split.train_periods == 0 || self.split.test_periods == 0 {
            anyhow::bail!("train_periods and test_periods must both be positive");
        }
        if self.split.train_periods < 2 * self.demand.season_period {
            anyhow::bail!(
                "train_periods {} cannot fit two seasonal cycles of {} periods",
                self.split.train_periods,
                self.demand.season_period
            );
        }
        for (name, list) in [
            ("assortment.methods", self.assortment.methods.len()),
            ("policy.z_grid", self.policy.z_grid.len()),
            ("policy.d_grid", self.policy.d_grid.len()),
        ] {
            if list == 0 {
                anyhow::bail!("{name} must not be empty");
            }
        }
        let mut seen = Vec::new();
        for &method in &self.assortment.methods {
            if seen.contains(&method) {
                anyhow::bail!("assortment.methods lists {} twice", method.label());
            }
            seen.push(method);
        }
        let mut seen = Vec::new();
        for &kind in &self.policy.kinds {
            if seen.contains(&kind) {
                anyhow::bail!("policy.kinds lists {} twice", kind.label());
            }
            seen.push(kind);
        }
        if self.policy.scenarios == 0 {
            anyhow::bail!("policy.scenarios must be positive");
        }
        if self.policy.review_period == 0 {
            anyhow::bail!("policy.review_period must be positive");
        }
        // Generator and network invariants surface now, not mid-pipeline.
        self.orders.to_core(1, 0).validate().map_err(anyhow::Error::from)?;
        self.demand
            .to_core(self.horizon(), 0)
            .validate()
            .map_err(anyhow::Error::from)?;
        self.network
            .to_core(self.demand.fdc_ids())
            .validate()
            .map_err(anyhow::Error::from)?;
        Ok(())
    }

    /// Total generated horizon: train then test, contiguous.
    pub fn horizon(&self) -> usize {
        self.split.train_periods + self.split.test_periods
    }

    /// Seed for the daily order history stream.
    pub fn orders_seed(&self) -> u64 {
        self.seed.wrapping_add(1)
    }

    /// Seed for the demand panel that is split into train and test.
    pub fn demand_seed(&self) -> u64 {
        self.seed.wrapping_add(2)
    }

    /// Seed for the i-th tuning scenario panel.
    pub fn scenario_seed(&self, i: usize) -> u64 {
        self.seed.wrapping_add(1000).wrapping_add(i as u64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let cfg: RunConfig = toml::from_str("seed = 11").unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.seed, 11);
        assert_eq!(cfg.split.train_periods, 28);
        assert_eq!(cfg.assortment.target_coverage, Some(0.7));
        assert_eq!(cfg.policy.kinds.len(), 3);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let top = toml::from_str::<RunConfig>("seed = 1\ntypo_key = true");
        assert!(top.is_err());
        let nested = toml::from_str::<RunConfig>("seed = 1\n[network]\nlead = 2");
        assert!(nested.is_err());
    }

    #[test]
    fn missing_seed_is_an_error() {
        assert!(toml::from_str::<RunConfig>("experiment = \"x\"").is_err());
    }

    #[test]
    fn k_and_coverage_are_exclusive() {
        let both = RunConfig::from_toml_str("seed = 1\n[assortment]\nk = 5\ntarget_coverage = 0.7");
        assert!(both.is_err());

        let mut neither = RunConfig::default();
        neither.assortment.target_coverage = None;
        assert!(neither.validate().is_err());

        // Setting k alone displaces the default coverage target.
        let k_only = RunConfig::from_toml_str("seed = 1\n[assortment]\nk = 5").unwrap();
        assert_eq!(k_only.assortment.k, Some(5));
        assert_eq!(k_only.assortment.target_coverage, None);
    }

    #[test]
    fn config_round_trips_through_toml() {
        let cfg = RunConfig::default();
        let text = toml::to_string(&cfg).unwrap();
        let back: RunConfig = toml::from_str(&text).unwrap();
        assert_eq!(back.seed, cfg.seed);
        assert_eq!(back.assortment.methods, cfg.assortment.methods);
        assert_eq!(back.policy.d_grid, cfg.policy.d_grid);
    }

    #[test]
    fn short_training_split_is_rejected() {
        let mut cfg = RunConfig::default();
        cfg.split.train_periods = 10;
        cfg.demand.season_period = 7;
        assert!(cfg.validate().is_err());
    }
}
