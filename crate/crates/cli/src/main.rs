//! `echelon`: batch experiments over synthetic order and demand data.
//!
//! `bench` runs the whole pipeline from one config file. The other
//! subcommands run single stages against the artifacts in the output
//! directory, so a pipeline can be replayed or varied piecewise. Every
//! command exits 0 only when all of its work succeeded.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Parser, Subcommand};
use echelon_cli::artifacts::{
    read_daily_counts_csv, write_json, write_params_csv, write_search_csv,
};
use echelon_cli::config::{Method, PolicyKind, RunConfig};
use echelon_cli::pipeline::{
    self, build_assortments, generate_demand, generate_orders, prepare_sim, resolve_k,
    run_benchmark, run_policy, write_assortment_artifacts, write_demand_artifacts,
    write_order_artifacts, write_policy_artifacts, DpInstanceSpec,
};
use echelon_core::assortment::eval_fulfillment;
use echelon_core::datagen::{ingest_order_log, read_demand_csv};
use echelon_core::allocation::parameter_search;
use serde_json::json;

#[derive(Parser)]
#[command(name = "echelon", version, about = "Assortment and allocation experiments")]
struct Cli {
    /// Experiment config file (TOML). Built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the config output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate the daily order history and write both split logs.
    GenOrders,
    /// Generate the demand panel and its replenishment stream.
    GenDemand,
    /// Build one assortment from the generated training orders.
    Assort {
        #[arg(long, value_enum)]
        method: Method,
        /// Assortment size; overrides the config.
        #[arg(long)]
        k: Option<usize>,
        /// Training coverage target; overrides the config.
        #[arg(long)]
        coverage: Option<f64>,
    },
    /// Score an assortment file against an order log.
    EvalAssort {
        #[arg(long)]
        assortment: PathBuf,
        /// Order log to score against; defaults to the test split.
        #[arg(long)]
        orders: Option<PathBuf>,
    },
    /// Tune one policy on scenario draws and simulate the test range.
    Simulate {
        #[arg(long, value_enum)]
        policy: PolicyKind,
    },
    /// Sweep the hybrid blend ratio on the training split.
    TuneRatio {
        /// Also render the sweep as SVG.
        #[arg(long)]
        svg: bool,
    },
    /// Grid-search safety and target factors on scenario draws.
    TuneParams,
    /// Train factors by coordinate descent on the composite loss.
    TrainE2e,
    /// Run the full pipeline and emit all tables and artifacts.
    Bench,
    /// Solve a tiny instance exactly and report the optimal cost.
    DpOracle {
        /// Instance description (JSON).
        #[arg(long)]
        instance: PathBuf,
    },
}

fn main() {
    if let Err(err) = run(Cli::parse()) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn load_config(cli: &Cli) -> anyhow::Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    Ok(cfg)
}

fn print_json(value: &serde_json::Value) {
    println!("{value:#}");
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let cfg = load_config(&cli)?;
    match cli.cmd {
        Cmd::GenOrders => {
            let data = generate_orders(&cfg).context("stage gen-orders")?;
            write_order_artifacts(&cfg.out_dir, &data).context("stage gen-orders")?;
            print_json(&json!({
                "train_orders": data.train.total_orders(),
                "test_orders": data.test.total_orders(),
                "skus": data.train.catalog().len(),
                "out_dir": cfg.out_dir,
            }));
        }
        Cmd::GenDemand => {
            let panel = generate_demand(&cfg).context("stage gen-demand")?;
            write_demand_artifacts(&cfg.out_dir, &panel).context("stage gen-demand")?;
            print_json(&json!({
                "horizon": panel.horizon(),
                "total_demand": panel.total_demand(),
                "out_dir": cfg.out_dir,
            }));
        }
        Cmd::Assort {
            method,
            k,
            coverage,
        } => {
            let mut cfg = cfg;
            if k.is_some() || coverage.is_some() {
                anyhow::ensure!(
                    k.is_none() || coverage.is_none(),
                    "--k and --coverage are mutually exclusive"
                );
                cfg.assortment.k = k;
                cfg.assortment.target_coverage = coverage;
            }
            cfg.assortment.methods = vec![method];
            let train = read_train_book(&cfg.out_dir)?;
            let counts = maybe_daily_counts(&cfg.out_dir, method)?;
            let k = resolve_k(&cfg, &train).context("stage assort")?;
            let set =
                build_assortments(&cfg, &train, counts.as_ref(), k).context("stage assort")?;
            write_assortment_artifacts(&cfg, &cfg.out_dir, &set).context("stage assort")?;
            let (_, assortment) = &set.built[0];
            let (covered, rate) = eval_fulfillment(assortment, &train);
            print_json(&json!({
                "method": method.label(),
                "k": k,
                "train_covered": covered,
                "train_rate": rate,
            }));
        }
        Cmd::EvalAssort { assortment, orders } => {
            let assortment = echelon_cli::artifacts::read_assortment_csv(&assortment)?;
            let book_path = orders.unwrap_or_else(|| cfg.out_dir.join("orders_test.csv"));
            let book = ingest_order_log(&book_path)?;
            let (covered, rate) = eval_fulfillment(&assortment, &book);
            print_json(&json!({
                "k": assortment.len(),
                "orders": book.total_orders(),
                "orders_covered": covered,
                "rate": rate,
            }));
        }
        Cmd::Simulate { policy } => {
            let inputs = prepare_from_files(&cfg).context("stage simulate")?;
            let stage = format!("stage simulate:{}", policy.label());
            let run = run_policy(&cfg, &inputs, policy).context(stage.clone())?;
            write_policy_artifacts(&cfg.out_dir, policy, &run).context(stage)?;
            print_json(&serde_json::to_value(&run.row)?);
        }
        Cmd::TuneRatio { svg } => {
            let mut cfg = cfg;
            cfg.assortment.methods = vec![Method::Hybrid];
            cfg.assortment.emit_svg |= svg;
            let train = read_train_book(&cfg.out_dir)?;
            let counts = maybe_daily_counts(&cfg.out_dir, Method::Hybrid)?;
            let k = resolve_k(&cfg, &train).context("stage tune-ratio")?;
            let set = build_assortments(&cfg, &train, counts.as_ref(), k)
                .context("stage tune-ratio")?;
            write_assortment_artifacts(&cfg, &cfg.out_dir, &set).context("stage tune-ratio")?;
            let sweep = set.sweep.expect("hybrid method always sweeps");
            print_json(&json!({
                "k": k,
                "best_ratio": sweep.best_ratio,
                "best_rate": sweep.best_rate,
                "grid_points": sweep.sweep.len(),
            }));
        }
        Cmd::TuneParams => {
            let inputs = prepare_from_files(&cfg).context("stage tune-params")?;
            let setup = echelon_core::allocation::EvalSetup {
                network: &inputs.network,
                initial: &inputs.initial,
                forecasts: &inputs.forecasts,
                review_period: cfg.policy.review_period,
            };
            let outcome = parameter_search(
                &setup,
                &inputs.scenarios,
                &cfg.policy.z_grid,
                &cfg.policy.d_grid,
            )
            .context("stage tune-params")?;
            write_search_csv(&cfg.out_dir.join("params_search.csv"), &outcome.table)?;
            write_params_csv(&cfg.out_dir.join("params_params.csv"), &outcome.best)?;
            let z = outcome.best.factors.z.values().next().copied().unwrap_or(0.0);
            let d = outcome.best.factors.d.values().next().copied().unwrap_or(0.0);
            print_json(&json!({
                "z": z,
                "d": d,
                "mean_cost": outcome.best_mean_cost,
            }));
        }
        Cmd::TrainE2e => {
            let inputs = prepare_from_files(&cfg).context("stage train-e2e")?;
            let run = run_policy(&cfg, &inputs, PolicyKind::E2e).context("stage train-e2e")?;
            write_policy_artifacts(&cfg.out_dir, PolicyKind::E2e, &run)
                .context("stage train-e2e")?;
            match &run.tune {
                pipeline::TuneArtifacts::Trained(outcome) => print_json(&json!({
                    "final_loss": outcome.trace.last(),
                    "evaluations": outcome.evaluations,
                    "budget_exhausted": outcome.budget_exhausted,
                })),
                _ => unreachable!("e2e training always yields a trained outcome"),
            }
        }
        Cmd::Bench => {
            let summary = run_benchmark(&cfg)?;
            print_json(&serde_json::to_value(&summary)?);
        }
        Cmd::DpOracle { instance } => {
            let text = std::fs::read_to_string(&instance)
                .with_context(|| format!("reading {}", instance.display()))?;
            let spec: DpInstanceSpec = serde_json::from_str(&text)
                .with_context(|| format!("parsing {}", instance.display()))?;
            let report = pipeline::solve_dp_spec(&spec).context("stage dp-oracle")?;
            write_json(&cfg.out_dir.join("dp_solution.json"), &report)?;
            print_json(&serde_json::to_value(&report)?);
        }
    }
    Ok(())
}

fn read_train_book(out_dir: &Path) -> anyhow::Result<echelon_core::OrderBook> {
    let path = out_dir.join("orders_train.csv");
    ingest_order_log(&path)
        .with_context(|| format!("reading {} (run gen-orders first)", path.display()))
}

fn maybe_daily_counts(
    out_dir: &Path,
    method: Method,
) -> anyhow::Result<Option<BTreeMap<echelon_core::SkuId, Vec<f64>>>> {
    if matches!(method, Method::Mltopk | Method::Hybrid) {
        Ok(Some(read_daily_counts_csv(
            &out_dir.join("daily_counts.csv"),
        )?))
    } else {
        Ok(None)
    }
}

fn prepare_from_files(cfg: &RunConfig) -> anyhow::Result<echelon_cli::pipeline::SimInputs> {
    let demand_path = cfg.out_dir.join("demand.csv");
    let replenishment_path = cfg.out_dir.join("replenishment.csv");
    let panel = read_demand_csv(&demand_path, Some(&replenishment_path), cfg.horizon())
        .with_context(|| {
            format!(
                "reading {} (run gen-demand first)",
                demand_path.display()
            )
        })?;
    prepare_sim(cfg, &panel)
}
