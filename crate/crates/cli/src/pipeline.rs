//! Experiment stages and the full benchmark pipeline.
//!
//! Each stage is a plain function over core types so it can run standalone
//! behind a subcommand or chained inside [`run_benchmark`]. Stages touch no
//! global state and derive every RNG stream from the config seed, which
//! makes the whole pipeline a pure function of the config file.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::Context;
use echelon_core::allocation::{
    parameter_search, train_e2e_policy, CompositeLossWeights, EvalSetup, MyopicPolicy,
    SearchOutcome, SsTiFactors, SsTiPolicy, TrainConfig, TrainOutcome, TransferPolicy,
};
use echelon_core::assortment::{
    eval_fulfillment, hybrid_selection, ml_top_k, reverse_exclude, smallest_k_for_coverage,
    solve_exact, top_k_hist, tune_hybrid_ratio, BatchSchedule, RankedList, RatioSweep,
};
use echelon_core::datagen::{
    daily_sku_counts, gen_demand_panel, gen_order_history, write_demand_csv, write_order_log,
    write_replenishment_csv,
};
use echelon_core::forecast::{fit_forecaster, forecast, forecast_order_frequency, ForecastResult, SeriesHistory};
use echelon_core::simulator::{
    report_to_json, simulate, solve_tiny_dp, trajectory_to_ndjson, DemandPoint, DpCaps,
    SimulationReport, TinyDpInstance, Trajectory,
};
use echelon_core::{
    Assortment, DemandPanel, InventoryState, LocationId, NetworkConfig, OrderBook, SkuId, RDC,
};
use serde::{Deserialize, Serialize};

use crate::artifacts::{
    sweep_svg, write_assortment_csv, write_daily_counts_csv, write_fulfillment_table, write_json,
    write_params_csv, write_policy_table, write_search_csv, write_sweep_csv, write_text,
    write_trace_csv, FulfillmentRow, PolicyRow,
};
use crate::config::{Method, PolicyKind, RunConfig};

/// Daily order history split into train and test ranges: the merged
/// per-split books and the train-side per-sku count series.
pub struct OrderData {
    pub train: OrderBook,
    pub test: OrderBook,
    pub daily_counts: BTreeMap<SkuId, Vec<f64>>,
}

pub fn generate_orders(cfg: &RunConfig) -> anyhow::Result<OrderData> {
    let days = cfg.horizon();
    let core_cfg = cfg.orders.to_core(cfg.orders.orders_per_day, cfg.orders_seed());
    let mut books = gen_order_history(&core_cfg, days)?;
    let test_days = books.split_off(cfg.split.train_periods);
    let train = OrderBook::merge(&books)?;
    let test = OrderBook::merge(&test_days)?;
    let daily_counts = daily_sku_counts(&books);
    Ok(OrderData {
        train,
        test,
        daily_counts,
    })
}

pub fn write_order_artifacts(out_dir: &Path, data: &OrderData) -> anyhow::Result<()> {
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;
    write_order_log(&data.train, out_dir.join("orders_train.csv"))?;
    write_order_log(&data.test, out_dir.join("orders_test.csv"))?;
    write_daily_counts_csv(&out_dir.join("daily_counts.csv"), &data.daily_counts)?;
    Ok(())
}

/// Full-horizon demand panel; periods `0..train` are the training range.
pub fn generate_demand(cfg: &RunConfig) -> anyhow::Result<DemandPanel> {
    Ok(gen_demand_panel(
        &cfg.demand.to_core(cfg.horizon(), cfg.demand_seed()),
    )?)
}

pub fn write_demand_artifacts(out_dir: &Path, panel: &DemandPanel) -> anyhow::Result<()> {
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;
    write_demand_csv(panel, out_dir.join("demand.csv"))?;
    write_replenishment_csv(panel, out_dir.join("replenishment.csv"))?;
    Ok(())
}

/// The configured K, or the smallest frequency-ranked K reaching the
/// coverage target on training orders.
pub fn resolve_k(cfg: &RunConfig, train: &OrderBook) -> anyhow::Result<usize> {
    match (cfg.assortment.k, cfg.assortment.target_coverage) {
        (Some(k), None) => Ok(k),
        (None, Some(target)) => Ok(smallest_k_for_coverage(train, target)?),
        _ => anyhow::bail!("exactly one of k and target_coverage must be set"),
    }
}

/// Assortments built per configured method, plus the ratio sweep when the
/// hybrid method participated.
pub struct AssortmentSet {
    pub k: usize,
    pub built: Vec<(Method, Assortment)>,
    pub sweep: Option<RatioSweep>,
}

pub fn build_assortments(
    cfg: &RunConfig,
    train: &OrderBook,
    daily_counts: Option<&BTreeMap<SkuId, Vec<f64>>>,
    k: usize,
) -> anyhow::Result<AssortmentSet> {
    let methods = &cfg.assortment.methods;
    let need_ml = methods.contains(&Method::Mltopk) || methods.contains(&Method::Hybrid);
    let need_reverse = methods.contains(&Method::Reverse) || methods.contains(&Method::Hybrid);

    let ml = if need_ml {
        let counts = daily_counts.context(
            "mltopk and hybrid need the daily order counts (run gen-orders first)",
        )?;
        let scores =
            forecast_order_frequency(counts, cfg.demand.season_period, cfg.split.test_periods)?;
        let ranks = RankedList::from_scores(scores.iter().map(|(&sku, &v)| (sku, v)))?;
        Some((ml_top_k(&scores, k)?, ranks))
    } else {
        None
    };
    let reverse = if need_reverse {
        Some(reverse_exclude(
            train,
            k,
            BatchSchedule::Adaptive {
                divisor: cfg.assortment.batch_divisor,
            },
        )?)
    } else {
        None
    };

    let mut built = Vec::new();
    let mut sweep = None;
    for &method in methods {
        let assortment = match method {
            Method::Topk => top_k_hist(train, k),
            Method::Mltopk => ml.as_ref().expect("built above").0.clone(),
            Method::Reverse => reverse.as_ref().expect("built above").assortment.clone(),
            Method::Hybrid => {
                let (m, m_ranks) = ml.as_ref().expect("built above");
                let r = reverse.as_ref().expect("built above");
                let tuned = tune_hybrid_ratio(
                    train,
                    m,
                    &r.assortment,
                    m_ranks,
                    &r.ranks,
                    &cfg.assortment.ratio_grid,
                )?;
                let blended =
                    hybrid_selection(m, &r.assortment, m_ranks, &r.ranks, tuned.best_ratio, k)?;
                sweep = Some(tuned);
                blended
            }
            Method::Exact => solve_exact(train, k)?.0,
        };
        built.push((method, assortment));
    }
    Ok(AssortmentSet { k, built, sweep })
}

pub fn write_assortment_artifacts(
    cfg: &RunConfig,
    out_dir: &Path,
    set: &AssortmentSet,
) -> anyhow::Result<()> {
    for (method, assortment) in &set.built {
        write_assortment_csv(
            &out_dir.join(format!("assortment_{}.csv", method.label())),
            assortment,
        )?;
    }
    if let Some(sweep) = &set.sweep {
        write_sweep_csv(&out_dir.join("ratio_sweep.csv"), sweep)?;
        if cfg.assortment.emit_svg {
            write_text(&out_dir.join("ratio_sweep.svg"), &sweep_svg(sweep))?;
        }
    }
    Ok(())
}

pub fn fulfillment_rows(
    set: &AssortmentSet,
    train: &OrderBook,
    test: &OrderBook,
) -> Vec<FulfillmentRow> {
    set.built
        .iter()
        .map(|(method, assortment)| {
            let (train_covered, train_rate) = eval_fulfillment(assortment, train);
            let (test_covered, test_rate) = eval_fulfillment(assortment, test);
            FulfillmentRow {
                method: method.label().to_string(),
                k: set.k,
                train_covered,
                train_rate,
                test_covered,
                test_rate,
            }
        })
        .collect()
}

/// Everything the policy stage needs: the network, a common starting state,
/// train-fitted forecasts, shared tuning scenarios, and the held-out panel.
pub struct SimInputs {
    pub network: NetworkConfig,
    pub initial: InventoryState,
    pub forecasts: BTreeMap<(SkuId, LocationId), ForecastResult>,
    pub scenarios: Vec<DemandPanel>,
    pub test_panel: DemandPanel,
}

/// Split the generated panel, fit per-(sku, location) forecasts on the
/// training range, and draw the shared tuning scenarios. Scenario panels
/// are full-horizon draws with the training range discarded so their
/// seasonal phase and replenishment cadence match the held-out range.
pub fn prepare_sim(cfg: &RunConfig, panel: &DemandPanel) -> anyhow::Result<SimInputs> {
    let network = cfg.network.to_core(cfg.demand.fdc_ids());
    let train_len = cfg.split.train_periods;
    let (train_panel, test_panel) = panel.split_at(train_len)?;

    let sku_ids: Vec<SkuId> = (0..cfg.demand.n_skus as SkuId).collect();
    let mut initial = InventoryState::new(sku_ids.iter().copied(), &network);
    for &sku in &sku_ids {
        initial.set_on_hand(sku, RDC, cfg.demand.order_up_to)?;
    }

    let horizon = cfg.split.test_periods + network.lead_time + cfg.policy.review_period;
    let train_flags: Vec<bool> = (0..train_len)
        .map(|t| cfg.demand.promo_days.contains(&t))
        .collect();
    let future_flags: Vec<bool> = (0..horizon)
        .map(|h| cfg.demand.promo_days.contains(&(train_len + h)))
        .collect();
    let mut forecasts = BTreeMap::new();
    for &sku in &sku_ids {
        for loc in initial.locations() {
            let values: Vec<f64> = (0..train_len)
                .map(|t| train_panel.demand_at(t, sku, loc) as f64)
                .collect();
            let history = SeriesHistory::new(values, train_flags.clone())?;
            let model = fit_forecaster(&history, cfg.demand.season_period)?;
            forecasts.insert((sku, loc), forecast(&model, horizon, &future_flags)?);
        }
    }

    let mut scenarios = Vec::with_capacity(cfg.policy.scenarios);
    for i in 0..cfg.policy.scenarios {
        let draw = gen_demand_panel(&cfg.demand.to_core(cfg.horizon(), cfg.scenario_seed(i)))?;
        scenarios.push(draw.split_at(train_len)?.1);
    }

    Ok(SimInputs {
        network,
        initial,
        forecasts,
        scenarios,
        test_panel,
    })
}

/// Tuning byproducts worth keeping next to the policy's simulation output.
pub enum TuneArtifacts {
    Search(SearchOutcome),
    Trained(TrainOutcome),
    None,
}

pub struct PolicyRun {
    pub row: PolicyRow,
    pub trajectory: Trajectory,
    pub report: SimulationReport,
    pub tune: TuneArtifacts,
}

/// Tune the requested policy on the shared scenarios, then run it once over
/// the held-out panel.
pub fn run_policy(cfg: &RunConfig, inputs: &SimInputs, kind: PolicyKind) -> anyhow::Result<PolicyRun> {
    let setup = EvalSetup {
        network: &inputs.network,
        initial: &inputs.initial,
        forecasts: &inputs.forecasts,
        review_period: cfg.policy.review_period,
    };
    let (mut policy, tune): (Box<dyn TransferPolicy>, TuneArtifacts) = match kind {
        PolicyKind::Params => {
            let outcome = parameter_search(
                &setup,
                &inputs.scenarios,
                &cfg.policy.z_grid,
                &cfg.policy.d_grid,
            )?;
            (
                Box::new(SsTiPolicy::new(outcome.best.clone())),
                TuneArtifacts::Search(outcome),
            )
        }
        PolicyKind::Myopic => {
            let safety: BTreeMap<SkuId, u64> = inputs
                .initial
                .skus()
                .iter()
                .map(|&sku| (sku, cfg.policy.rdc_safety))
                .collect();
            (
                Box::new(MyopicPolicy::new(inputs.forecasts.clone(), safety)),
                TuneArtifacts::None,
            )
        }
        PolicyKind::E2e => {
            let start = SsTiFactors::uniform(
                cfg.policy.initial_z,
                cfg.policy.initial_d,
                &inputs.network,
                cfg.policy.review_period,
            );
            let train_cfg = TrainConfig {
                weights: CompositeLossWeights {
                    operational: cfg.policy.operational_weight,
                    forecast: cfg.policy.forecast_weight,
                    safety: cfg.policy.safety_weight,
                },
                budget: cfg.policy.budget,
                z_step: cfg.policy.z_step,
                d_step: cfg.policy.d_step,
                min_step: cfg.policy.min_step,
            };
            let outcome = train_e2e_policy(&setup, &inputs.scenarios, start, &train_cfg)?;
            (
                Box::new(SsTiPolicy::new(outcome.params.clone())),
                TuneArtifacts::Trained(outcome),
            )
        }
    };
    let (trajectory, report) = simulate(
        &inputs.network,
        &inputs.initial,
        &inputs.test_panel,
        policy.as_mut(),
    )?;
    let row = PolicyRow {
        policy: kind.label().to_string(),
        fdc_fulfillment: report.fdc_fulfillment_rate,
        regional_loss: report.regional_loss,
        loss_ratio: report.loss_ratio,
        total_cost: report.total_cost,
        transfer_cost: report.transfer_cost,
        spillover_cost: report.spillover_cost,
        lost_sales_cost: report.lost_sales_cost,
    };
    Ok(PolicyRun {
        row,
        trajectory,
        report,
        tune,
    })
}

pub fn write_policy_artifacts(
    out_dir: &Path,
    kind: PolicyKind,
    run: &PolicyRun,
) -> anyhow::Result<()> {
    let label = kind.label();
    write_text(
        &out_dir.join(format!("trajectory_{label}.ndjson")),
        &trajectory_to_ndjson(&run.trajectory)?,
    )?;
    write_text(
        &out_dir.join(format!("report_{label}.json")),
        &report_to_json(&run.report)?,
    )?;
    match &run.tune {
        TuneArtifacts::Search(outcome) => {
            write_search_csv(&out_dir.join("params_search.csv"), &outcome.table)?;
            write_params_csv(&out_dir.join(format!("params_{label}.csv")), &outcome.best)?;
        }
        TuneArtifacts::Trained(outcome) => {
            write_trace_csv(&out_dir.join(format!("{label}_trace.csv")), &outcome.trace)?;
            write_params_csv(&out_dir.join(format!("params_{label}.csv")), &outcome.params)?;
        }
        TuneArtifacts::None => {}
    }
    Ok(())
}

/// Everything the benchmark decided and measured, echoed as one document.
#[derive(Debug, Serialize)]
pub struct BenchSummary {
    pub experiment: String,
    pub seed: u64,
    pub k: usize,
    pub best_ratio: Option<f64>,
    pub fulfillment: Vec<FulfillmentRow>,
    pub policies: Vec<PolicyRow>,
}

/// The full pipeline: generate, split, build and evaluate assortments, tune
/// and simulate policies, and write every table and artifact into the
/// output directory. Deterministic per config and seed.
pub fn run_benchmark(cfg: &RunConfig) -> anyhow::Result<BenchSummary> {
    cfg.validate()?;
    let out_dir = cfg.out_dir.clone();

    let orders = generate_orders(cfg).context("stage gen-orders")?;
    write_order_artifacts(&out_dir, &orders).context("stage gen-orders")?;

    let panel = generate_demand(cfg).context("stage gen-demand")?;
    write_demand_artifacts(&out_dir, &panel).context("stage gen-demand")?;

    let k = resolve_k(cfg, &orders.train).context("stage assort")?;
    let set = build_assortments(cfg, &orders.train, Some(&orders.daily_counts), k)
        .context("stage assort")?;
    write_assortment_artifacts(cfg, &out_dir, &set).context("stage assort")?;

    let fulfillment = fulfillment_rows(&set, &orders.train, &orders.test);
    write_fulfillment_table(&out_dir.join("fulfillment_table.csv"), &fulfillment)
        .context("stage eval-assort")?;

    let inputs = prepare_sim(cfg, &panel).context("stage simulate")?;
    let mut policies = Vec::new();
    for &kind in &cfg.policy.kinds {
        let stage_name = format!("stage simulate:{}", kind.label());
        let run = run_policy(cfg, &inputs, kind).context(stage_name.clone())?;
        write_policy_artifacts(&out_dir, kind, &run).context(stage_name)?;
        policies.push(run.row);
    }
    write_policy_table(&out_dir.join("policy_table.csv"), &policies)
        .context("stage simulate")?;

    let summary = BenchSummary {
        experiment: cfg.experiment.clone(),
        seed: cfg.seed,
        k,
        best_ratio: set.sweep.as_ref().map(|s| s.best_ratio),
        fulfillment,
        policies,
    };
    write_json(&out_dir.join("run_summary.json"), &summary).context("stage report")?;
    Ok(summary)
}

/// A single-sku exact-solution request, read from JSON. FDC ids are
/// `1..=fdc_on_hand.len()`; caps default to the reachable envelope.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DpInstanceSpec {
    pub lead_time: usize,
    pub spillover_cost: f64,
    pub lost_sale_cost: f64,
    pub transfer_cost: f64,
    pub rdc_on_hand: u64,
    pub fdc_on_hand: Vec<u64>,
    pub demand: Vec<Vec<DemandPoint>>,
    pub replenishment: Vec<u64>,
    #[serde(default)]
    pub caps: Option<DpCaps>,
}

/// What `dp-oracle` prints and writes: the optimal expected cost and an
/// optimal first transfer, flattened for easy reading.
#[derive(Debug, Serialize)]
pub struct DpReport {
    pub expected_cost: f64,
    pub first_transfer: Vec<(SkuId, LocationId, u64)>,
}

pub fn solve_dp_spec(spec: &DpInstanceSpec) -> anyhow::Result<DpReport> {
    let fdc_ids: Vec<LocationId> = (1..=spec.fdc_on_hand.len() as LocationId).collect();
    let network = NetworkConfig::uniform(
        fdc_ids.clone(),
        spec.lead_time,
        spec.spillover_cost,
        spec.lost_sale_cost,
        spec.transfer_cost,
    );
    let mut initial = InventoryState::new([0], &network);
    initial.set_on_hand(0, RDC, spec.rdc_on_hand)?;
    for (&fdc, &qty) in fdc_ids.iter().zip(&spec.fdc_on_hand) {
        initial.set_on_hand(0, fdc, qty)?;
    }
    let envelope = initial.total_units() + spec.replenishment.iter().sum::<u64>();
    let caps = spec.caps.unwrap_or(DpCaps {
        rdc: envelope,
        fdc: envelope,
        pipeline: envelope,
    });
    let solution = solve_tiny_dp(&TinyDpInstance {
        network: &network,
        initial: &initial,
        demand: &spec.demand,
        replenishment: &spec.replenishment,
        caps,
    })?;
    Ok(DpReport {
        expected_cost: solution.expected_cost,
        first_transfer: solution.first_transfer.iter().collect(),
    })
}
