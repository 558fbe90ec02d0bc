//! Periodic-review simulation of the RDC/FDC network.
//!
//! Each period runs a fixed event sequence: pipeline arrivals land at the
//! FDCs, the policy decides this period's transfers seeing the post-arrival
//! state, transfers leave the RDC (entering the pipeline, or arriving
//! immediately at zero lead time), demand realizes and is served by the
//! period fulfillment solver, and RDC replenishment lands at period end.
//! Conservation identities are asserted every period, so a solver or
//! bookkeeping bug aborts loudly instead of leaking units.
//!
//! Also here: report metrics, an order-level replay that measures how many
//! whole orders the FDCs covered, an exact expected-cost evaluator for
//! deterministic policies on small-support demand, and a value-iteration
//! oracle ([`solve_tiny_dp`]) that lower-bounds every policy on tiny
//! instances.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::allocation::{solve_period_fulfillment, PeriodOutcome, TransferPolicy};
use crate::error::{Error, Result};
use crate::types::OrderType;
use crate::{
    validate_instance, DemandPanel, InventoryState, LocationId, NetworkConfig, PeriodDemand,
    SkuId, TransferPlan, RDC,
};

/// Everything that happened in one period. `state_before` is the state at
/// the very start of the period, before pipeline arrivals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodRecord {
    pub t: usize,
    pub state_before: InventoryState,
    /// Transfers sent this period, after capping.
    pub transfers: TransferPlan,
    /// Shipments credited to FDCs this period (the pipeline head, or the
    /// fresh transfers themselves at zero lead time).
    pub arrivals: TransferPlan,
    pub demand: PeriodDemand,
    pub outcome: PeriodOutcome,
    /// Sum of per-unit transfer rates over `transfers`.
    pub transfer_cost: f64,
    /// RDC replenishment credited at the end of the period.
    pub replenishment: BTreeMap<SkuId, u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub records: Vec<PeriodRecord>,
    pub final_state: InventoryState,
}

/// Aggregate service and cost metrics of one simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    /// Share of FDC demand served from FDC stock (1 when there was none).
    pub fdc_fulfillment_rate: f64,
    /// Share of all demand that was lost (0 when there was none).
    pub regional_loss: f64,
    /// Lost units per locally fulfilled unit; undefined without local
    /// fulfillment.
    pub loss_ratio: Option<f64>,
    /// Filled in by [`eval_order_level`], not by unit-level metrics.
    pub local_order_rate: Option<f64>,
    pub total_cost: f64,
    pub transfer_cost: f64,
    pub spillover_cost: f64,
    pub lost_sales_cost: f64,
}

/// Run the policy against one demand panel. Deterministic: identical
/// inputs produce identical trajectories.
///
/// A policy naming an unknown sku or location is a fault and errors with
/// the period; quantities beyond RDC stock or the per-FDC transfer cap are
/// capped in ascending (sku, fdc) order, since self-capping is part of the
/// policy contract rather than an error.
pub fn simulate(
    network: &NetworkConfig,
    initial: &InventoryState,
    panel: &DemandPanel,
    policy: &mut dyn TransferPolicy,
) -> Result<(Trajectory, SimulationReport)> {
    let problems = validate_instance(network, initial, panel);
    if !problems.is_empty() {
        return Err(Error::Validation(problems));
    }
    let skus: Vec<SkuId> = initial.skus().to_vec();
    let fdcs: Vec<LocationId> = initial.fdcs().to_vec();
    let mut state = initial.clone();
    let mut records = Vec::with_capacity(panel.horizon());
    for t in 0..panel.horizon() {
        let state_before = state.clone();

        // Pipeline head arrives and is sellable this period.
        let mut arrivals = TransferPlan::new();
        if network.lead_time > 0 {
            let row = state.pop_arrivals();
            for (si, &sku) in skus.iter().enumerate() {
                for (fi, &fdc) in fdcs.iter().enumerate() {
                    let qty = row[si * fdcs.len() + fi];
                    if qty > 0 {
                        arrivals.set(sku, fdc, qty);
                        let held = state.on_hand(sku, fdc)?;
                        state.set_on_hand(sku, fdc, held + qty)?;
                    }
                }
            }
        }

        // The policy sees the post-arrival state.
        let requested = match policy.decide(t, &state, network) {
            Ok(plan) => plan,
            Err(fault @ Error::PolicyFault { .. }) => return Err(fault),
            Err(other) => {
                return Err(Error::PolicyFault {
                    period: t,
                    msg: other.to_string(),
                })
            }
        };
        let transfers = cap_plan(&requested, &state, network, t)?;

        // Transfers leave the RDC now; with a pipeline they surface after
        // lead_time periods, without one they are sellable immediately.
        let mut shipment_row = state.zero_shipment_row();
        for (sku, fdc, qty) in transfers.iter() {
            let held = state.on_hand(sku, RDC)?;
            state.set_on_hand(sku, RDC, held - qty)?;
            if network.lead_time == 0 {
                let at_fdc = state.on_hand(sku, fdc)?;
                state.set_on_hand(sku, fdc, at_fdc + qty)?;
                arrivals.set(sku, fdc, arrivals.get(sku, fdc) + qty);
            } else {
                let si = skus.iter().position(|&s| s == sku).expect("capped plan key");
                let fi = fdcs.iter().position(|&f| f == fdc).expect("capped plan key");
                shipment_row[si * fdcs.len() + fi] = qty;
            }
        }
        if network.lead_time > 0 {
            state.push_shipment(shipment_row);
        }

        // Demand realizes. The state already reflects arrivals and the
        // transfer deduction, so the solver gets empty in/out plans.
        let demand = panel.slice(t);
        let outcome = solve_period_fulfillment(
            &state,
            &TransferPlan::new(),
            &TransferPlan::new(),
            &demand,
            network,
        )?;
        consume(&mut state, &outcome);

        let transfer_cost: f64 = transfers
            .iter()
            .map(|(_, fdc, qty)| network.transfer_rate(fdc).expect("capped plan key") * qty as f64)
            .sum();

        let replenishment = panel.replenishment_slice(t);
        for (&sku, &qty) in &replenishment {
            let held = state.on_hand(sku, RDC)?;
            state.set_on_hand(sku, RDC, held + qty)?;
        }

        check_conservation(
            &state_before,
            &state,
            &arrivals,
            &transfers,
            &outcome,
            &replenishment,
            t,
        );

        records.push(PeriodRecord {
            t,
            state_before,
            transfers,
            arrivals,
            demand,
            outcome,
            transfer_cost,
            replenishment,
        });
    }
    let trajectory = Trajectory {
        records,
        final_state: state,
    };
    let report = metrics(&trajectory);
    Ok((trajectory, report))
}

/// Unknown ids are policy faults; excessive quantities are capped against
/// remaining RDC stock and the per-FDC transfer cap in ascending (sku, fdc)
/// order.
fn cap_plan(
    requested: &TransferPlan,
    state: &InventoryState,
    network: &NetworkConfig,
    t: usize,
) -> Result<TransferPlan> {
    let mut rdc_left: BTreeMap<SkuId, u64> = BTreeMap::new();
    let mut cap_left: BTreeMap<LocationId, u64> = state
        .fdcs()
        .iter()
        .map(|&j| (j, network.transfer_cap.unwrap_or(u64::MAX)))
        .collect();
    let mut plan = TransferPlan::new();
    for (sku, fdc, qty) in requested.iter() {
        if state.sku_index(sku).is_err() {
            return Err(Error::PolicyFault {
                period: t,
                msg: format!("transfer names unknown sku {sku}"),
            });
        }
        if state.fdc_index(fdc).is_err() {
            return Err(Error::PolicyFault {
                period: t,
                msg: format!("transfer names unknown location {fdc}"),
            });
        }
        let left = rdc_left
            .entry(sku)
            .or_insert_with(|| state.on_hand(sku, RDC).expect("validated sku"));
        let grant = qty.min(*left).min(cap_left[&fdc]);
        if grant > 0 {
            plan.set(sku, fdc, grant);
            *left -= grant;
            *cap_left.get_mut(&fdc).unwrap() -= grant;
        }
    }
    Ok(plan)
}

/// Deduct what the outcome consumed. `checked_sub` turns any
/// over-consumption (a solver bug) into an immediate panic instead of a
/// silently clamped balance.
fn consume(state: &mut InventoryState, outcome: &PeriodOutcome) {
    for (&(sku, fdc), &x) in &outcome.fdc_fulfilled {
        let held = state.on_hand(sku, fdc).expect("outcome key");
        let left = held
            .checked_sub(x)
            .expect("local fulfillment exceeded FDC stock");
        state.set_on_hand(sku, fdc, left).expect("outcome key");
    }
    for (&sku, &y0) in &outcome.rdc_fulfilled {
        let held = state.on_hand(sku, RDC).expect("outcome key");
        let left = held
            .checked_sub(y0)
            .expect("RDC fulfillment exceeded RDC stock");
        state.set_on_hand(sku, RDC, left).expect("outcome key");
    }
    for (&(sku, _), &y) in &outcome.spillover {
        let held = state.on_hand(sku, RDC).expect("outcome key");
        let left = held.checked_sub(y).expect("spillover exceeded RDC stock");
        state.set_on_hand(sku, RDC, left).expect("outcome key");
    }
}

/// Per-period flow identities over every (sku, location) cell:
/// FDC stock moves only by arrivals and local fulfillment, RDC stock only
/// by transfers, own fulfillment, spillover, and replenishment.
fn check_conservation(
    before: &InventoryState,
    after: &InventoryState,
    arrivals: &TransferPlan,
    transfers: &TransferPlan,
    outcome: &PeriodOutcome,
    replenishment: &BTreeMap<SkuId, u64>,
    t: usize,
) {
    for &sku in after.skus() {
        let spill: u64 = outcome
            .spillover
            .range((sku, LocationId::MIN)..=(sku, LocationId::MAX))
            .map(|(_, &v)| v)
            .sum();
        let expected = before.on_hand(sku, RDC).unwrap() as i128
            - transfers.total_for_sku(sku) as i128
            - outcome.rdc_fulfilled.get(&sku).copied().unwrap_or(0) as i128
            - spill as i128
            + replenishment.get(&sku).copied().unwrap_or(0) as i128;
        assert_eq!(
            after.on_hand(sku, RDC).unwrap() as i128,
            expected,
            "RDC conservation broke at period {t}, sku {sku}"
        );
        for &fdc in after.fdcs() {
            let expected = before.on_hand(sku, fdc).unwrap() as i128
                + arrivals.get(sku, fdc) as i128
                - outcome.fdc_fulfilled.get(&(sku, fdc)).copied().unwrap_or(0) as i128;
            assert_eq!(
                after.on_hand(sku, fdc).unwrap() as i128,
                expected,
                "FDC conservation broke at period {t}, sku {sku}, fdc {fdc}"
            );
        }
    }
}

/// Service rates and cost totals of one trajectory. Degenerate
/// denominators are flagged (`loss_ratio: None`) or defaulted (perfect
/// fulfillment of zero demand), never thrown.
pub fn metrics(trajectory: &Trajectory) -> SimulationReport {
    let mut local = 0u64;
    let mut lost = 0u64;
    let mut fdc_demand = 0u64;
    let mut all_demand = 0u64;
    let mut transfer_cost = 0.0;
    let mut spillover_cost = 0.0;
    let mut lost_sales_cost = 0.0;
    for rec in &trajectory.records {
        local += rec.outcome.fdc_fulfilled_total();
        lost += rec.outcome.lost_total();
        fdc_demand += rec.demand.fdc_total();
        all_demand += rec.demand.total();
        transfer_cost += rec.transfer_cost;
        spillover_cost += rec.outcome.spillover_cost;
        lost_sales_cost += rec.outcome.lost_sales_cost;
    }
    SimulationReport {
        fdc_fulfillment_rate: if fdc_demand == 0 {
            1.0
        } else {
            local as f64 / fdc_demand as f64
        },
        regional_loss: if all_demand == 0 {
            0.0
        } else {
            lost as f64 / all_demand as f64
        },
        loss_ratio: (local > 0).then(|| lost as f64 / local as f64),
        local_order_rate: None,
        total_cost: transfer_cost + spillover_cost + lost_sales_cost,
        transfer_cost,
        spillover_cost,
        lost_sales_cost,
    }
}

/// Orders routed to FDCs, in arrival sequence, one inner list per period.
/// Each entry repeats `count` times back to back.
pub type OrderStream = Vec<Vec<(LocationId, OrderType)>>;

/// Replay an order stream against the trajectory's FDC inventories and
/// report the share of orders served whole.
///
/// The unit-level solver fulfills demand in bulk; this replay instead asks
/// how many complete orders the FDC stock covered in sequence. An order is
/// served locally only if every line is available at its FDC when it
/// arrives, and only served orders consume stock (an order that spills to
/// the RDC takes nothing from the FDC shelf). The stream must account for
/// exactly the trajectory's FDC demand, one unit per order line.
pub fn eval_order_level(trajectory: &Trajectory, stream: &OrderStream) -> Result<f64> {
    if stream.len() != trajectory.records.len() {
        return Err(Error::InvalidInput(format!(
            "order stream covers {} periods, trajectory has {}",
            stream.len(),
            trajectory.records.len()
        )));
    }
    let mut served = 0u64;
    let mut total = 0u64;
    for (rec, orders) in trajectory.records.iter().zip(stream) {
        let mut implied: BTreeMap<(SkuId, LocationId), u64> = BTreeMap::new();
        for (fdc, order) in orders {
            for &sku in order.skus() {
                *implied.entry((sku, *fdc)).or_insert(0) += order.count;
            }
        }
        let mut recorded: BTreeMap<(SkuId, LocationId), u64> = BTreeMap::new();
        for (sku, loc, qty) in rec.demand.iter() {
            if loc != RDC {
                recorded.insert((sku, loc), qty);
            }
        }
        if implied != recorded {
            return Err(Error::InvalidInput(format!(
                "order stream does not match recorded FDC demand at period {}",
                rec.t
            )));
        }

        let mut available: BTreeMap<(SkuId, LocationId), u64> = BTreeMap::new();
        for &sku in rec.state_before.skus() {
            for &fdc in rec.state_before.fdcs() {
                let qty = rec.state_before.on_hand(sku, fdc).expect("state key")
                    + rec.arrivals.get(sku, fdc);
                if qty > 0 {
                    available.insert((sku, fdc), qty);
                }
            }
        }
        for (fdc, order) in orders {
            for _ in 0..order.count {
                let coverable = order
                    .skus()
                    .iter()
                    .all(|&sku| available.get(&(sku, *fdc)).copied().unwrap_or(0) >= 1);
                if coverable {
                    for &sku in order.skus() {
                        *available.get_mut(&(sku, *fdc)).unwrap() -= 1;
                    }
                    served += 1;
                }
            }
            total += order.count;
        }
    }
    Ok(if total == 0 {
        1.0
    } else {
        served as f64 / total as f64
    })
}

/// One possible realization of a period's demand for the single sku of a
/// tiny instance. `fdc` entries align with the network's fdc order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandPoint {
    pub rdc: u64,
    pub fdc: Vec<u64>,
    pub prob: f64,
}

/// Per-node inventory bounds sizing the dynamic-programming table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DpCaps {
    pub rdc: u64,
    pub fdc: u64,
    pub pipeline: u64,
}

/// A finite-horizon instance small enough for exact value iteration:
/// one sku, at most two FDCs, lead time at most one period, and per-period
/// demand with at most three support points.
#[derive(Debug, Clone)]
pub struct TinyDpInstance<'a> {
    pub network: &'a NetworkConfig,
    pub initial: &'a InventoryState,
    /// demand[t] is that period's support; probabilities sum to 1.
    pub demand: &'a [Vec<DemandPoint>],
    /// RDC inflow credited at the end of each period.
    pub replenishment: &'a [u64],
    pub caps: DpCaps,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DpSolution {
    /// Minimum expected total cost from the initial state.
    pub expected_cost: f64,
    /// An optimal first-period transfer (ties: smallest total shipment,
    /// then lexicographically by ascending fdc).
    pub first_transfer: TransferPlan,
}

const DP_MAX_STATES: u64 = 1_000_000;

/// Exact minimum expected cost by backward value iteration over the full
/// discrete state (on-hand everywhere plus pipeline content), mirroring
/// the simulator's event order one for one. Serves as the lower bound no
/// policy can beat.
///
/// Caps must dominate the reachable inventory envelope (total initial
/// units plus all replenishment); the function errors rather than silently
/// clamping a transition.
pub fn solve_tiny_dp(inst: &TinyDpInstance) -> Result<DpSolution> {
    inst.network.validate()?;
    let guard = |ok: bool, guard: &str, detail: String| -> Result<()> {
        if ok {
            Ok(())
        } else {
            Err(Error::GuardExceeded {
                guard: guard.into(),
                detail,
            })
        }
    };
    guard(
        inst.initial.skus().len() == 1,
        "dp sku count (1)",
        format!("instance has {} skus", inst.initial.skus().len()),
    )?;
    guard(
        inst.initial.fdcs().len() <= 2,
        "dp fdc count (2)",
        format!("instance has {} fdcs", inst.initial.fdcs().len()),
    )?;
    guard(
        inst.network.lead_time <= 1,
        "dp lead time (1)",
        format!("lead time is {}", inst.network.lead_time),
    )?;
    let horizon = inst.demand.len();
    if horizon == 0 || inst.replenishment.len() != horizon {
        return Err(Error::InvalidInput(format!(
            "demand covers {horizon} periods, replenishment {}",
            inst.replenishment.len()
        )));
    }
    let n_fdcs = inst.initial.fdcs().len();
    for (t, support) in inst.demand.iter().enumerate() {
        guard(
            !support.is_empty() && support.len() <= 3,
            "dp demand support (3)",
            format!("period {t} has {} points", support.len()),
        )?;
        let mut mass = 0.0;
        for point in support {
            if point.fdc.len() != n_fdcs {
                return Err(Error::InvalidInput(format!(
                    "period {t} demand point lists {} fdcs, network has {n_fdcs}",
                    point.fdc.len()
                )));
            }
            if !point.prob.is_finite() || point.prob < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "period {t} has probability {}",
                    point.prob
                )));
            }
            mass += point.prob;
        }
        if (mass - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "period {t} probabilities sum to {mass}"
            )));
        }
    }
    let envelope = inst.initial.total_units() + inst.replenishment.iter().sum::<u64>();
    let lead = inst.network.lead_time;
    let caps_ok = inst.caps.rdc >= envelope
        && inst.caps.fdc >= envelope
        && (lead == 0 || inst.caps.pipeline >= envelope);
    if !caps_ok {
        return Err(Error::InvalidConfig(format!(
            "caps must cover the reachable inventory envelope of {envelope} units"
        )));
    }
    let mut states: u64 = inst.caps.rdc + 1;
    for _ in 0..n_fdcs {
        states = states.saturating_mul(inst.caps.fdc + 1);
        if lead == 1 {
            states = states.saturating_mul(inst.caps.pipeline + 1);
        }
    }
    guard(
        states <= DP_MAX_STATES,
        "dp state space (1e6)",
        format!("instance spans {states} states"),
    )?;

    let sku = inst.initial.skus()[0];
    let fdc_ids: Vec<LocationId> = inst.initial.fdcs().to_vec();
    let mut initial = DpState {
        rdc: inst.initial.on_hand(sku, RDC)?,
        fdc: fdc_ids
            .iter()
            .map(|&j| inst.initial.on_hand(sku, j))
            .collect::<Result<Vec<u64>>>()?,
        pipe: vec![0; n_fdcs],
    };
    if lead == 1 {
        initial.pipe = fdc_ids
            .iter()
            .map(|&j| inst.initial.pipeline_qty(0, sku, j))
            .collect::<Result<Vec<u64>>>()?;
    }
    let rates: Vec<f64> = fdc_ids
        .iter()
        .map(|&j| inst.network.transfer_rate(j))
        .collect::<Result<Vec<f64>>>()?;

    let mut dp = Dp {
        inst,
        rates,
        lead,
        memo: vec![HashMap::new(); horizon],
    };
    let (expected_cost, best_u) = dp.best_action(0, &initial);
    let mut first_transfer = TransferPlan::new();
    for (i, &j) in fdc_ids.iter().enumerate() {
        first_transfer.set(sku, j, best_u[i]);
    }
    Ok(DpSolution {
        expected_cost,
        first_transfer,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct DpState {
    rdc: u64,
    fdc: Vec<u64>,
    pipe: Vec<u64>,
}

struct Dp<'a, 'b> {
    inst: &'b TinyDpInstance<'a>,
    rates: Vec<f64>,
    lead: usize,
    memo: Vec<HashMap<DpState, f64>>,
}

impl Dp<'_, '_> {
    fn value(&mut self, t: usize, state: &DpState) -> f64 {
        if t == self.inst.demand.len() {
            return 0.0;
        }
        if let Some(&v) = self.memo[t].get(state) {
            return v;
        }
        let (v, _) = self.best_action(t, state);
        self.memo[t].insert(state.clone(), v);
        v
    }

    /// Minimize over transfers from the pre-arrival state, enumerating by
    /// ascending total shipment then lexicographic order so the first
    /// strict minimum carries the tie-break.
    fn best_action(&mut self, t: usize, state: &DpState) -> (f64, Vec<u64>) {
        let n = state.fdc.len();
        // Arrivals land before the decision.
        let mut on_hand = state.fdc.clone();
        if self.lead == 1 {
            for (held, arriving) in on_hand.iter_mut().zip(&state.pipe) {
                *held += arriving;
            }
        }
        let mut best = f64::INFINITY;
        let mut best_u = vec![0; n];
        let mut u = vec![0u64; n];
        for total in 0..=state.rdc {
            loop {
                if u.iter().sum::<u64>() == total {
                    let cost = self.action_cost(t, state.rdc - total, &on_hand, &u);
                    if cost < best {
                        best = cost;
                        best_u = u.clone();
                    }
                }
                // Next vector with entries bounded by `total`, lex order.
                let mut pos = n;
                loop {
                    if pos == 0 {
                        break;
                    }
                    pos -= 1;
                    u[pos] += 1;
                    if u[pos] <= total {
                        break;
                    }
                    u[pos] = 0;
                    if pos == 0 {
                        break;
                    }
                }
                if u.iter().all(|&q| q == 0) {
                    break;
                }
            }
        }
        (best, best_u)
    }

    /// Transfer cost plus expected fulfillment cost and continuation after
    /// shipping `u` with `rdc_left` staying behind. Fulfillment mirrors the
    /// greedy period solver; the test suite pins the two together.
    fn action_cost(&mut self, t: usize, rdc_left: u64, on_hand: &[u64], u: &[u64]) -> f64 {
        let network = self.inst.network;
        let mut cost: f64 = u
            .iter()
            .zip(&self.rates)
            .map(|(&q, &r)| r * q as f64)
            .sum();
        let spill_worthwhile = network.spillover_cost < network.lost_sale_cost;
        for point in &self.inst.demand[t] {
            let mut rdc = rdc_left;
            let mut fdc_after = Vec::with_capacity(on_hand.len());
            let mut spill_units = 0u64;
            let mut lost_units = 0u64;
            let mut pending: Vec<u64> = Vec::with_capacity(on_hand.len());
            for (i, &held) in on_hand.iter().enumerate() {
                let available = held + if self.lead == 0 { u[i] } else { 0 };
                let x = available.min(point.fdc[i]);
                fdc_after.push(available - x);
                pending.push(point.fdc[i] - x);
            }
            let y0 = rdc.min(point.rdc);
            rdc -= y0;
            lost_units += point.rdc - y0;
            for short in pending {
                let y = if spill_worthwhile { short.min(rdc) } else { 0 };
                rdc -= y;
                spill_units += y;
                lost_units += short - y;
            }
            let period_cost = network.spillover_cost * spill_units as f64
                + network.lost_sale_cost * lost_units as f64;
            let next = DpState {
                rdc: rdc + self.inst.replenishment[t],
                fdc: fdc_after,
                pipe: if self.lead == 1 {
                    u.to_vec()
                } else {
                    vec![0; u.len()]
                },
            };
            cost += point.prob * (period_cost + self.value(t + 1, &next));
        }
        cost
    }
}

/// Exact expected total cost of a policy on a tiny instance, by
/// enumerating every demand path of the support and running the simulator
/// down each one. The policy must be a deterministic, memoryless function
/// of `(t, state)`, because it is re-consulted across paths.
pub fn exact_policy_cost(
    network: &NetworkConfig,
    initial: &InventoryState,
    demand: &[Vec<DemandPoint>],
    replenishment: &[u64],
    policy: &mut dyn TransferPolicy,
) -> Result<f64> {
    if initial.skus().len() != 1 {
        return Err(Error::InvalidInput(
            "exact evaluation expects a single-sku instance".into(),
        ));
    }
    if demand.is_empty() || demand.len() != replenishment.len() {
        return Err(Error::InvalidInput(
            "demand and replenishment must cover the same non-empty horizon".into(),
        ));
    }
    let sku = initial.skus()[0];
    let fdc_ids: Vec<LocationId> = initial.fdcs().to_vec();
    let horizon = demand.len();
    let mut choice = vec![0usize; horizon];
    let mut expected = 0.0;
    loop {
        let mut prob = 1.0;
        let mut panel = DemandPanel::new(horizon);
        for (t, &pick) in choice.iter().enumerate() {
            let point = &demand[t][pick];
            prob *= point.prob;
            panel.set_demand(t, sku, RDC, point.rdc)?;
            for (i, &j) in fdc_ids.iter().enumerate() {
                panel.set_demand(t, sku, j, point.fdc[i])?;
            }
            panel.set_replenishment(t, sku, replenishment[t])?;
        }
        if prob > 0.0 {
            let (_, report) = simulate(network, initial, &panel, policy)?;
            expected += prob * report.total_cost;
        }
        // Odometer over support indices.
        let mut pos = 0;
        while pos < horizon {
            choice[pos] += 1;
            if choice[pos] < demand[pos].len() {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
        if pos == horizon {
            break;
        }
    }
    Ok(expected)
}

/// Trajectory as newline-delimited JSON, one period record per line.
/// Byte-stable for identical inputs.
pub fn trajectory_to_ndjson(trajectory: &Trajectory) -> Result<String> {
    let mut out = String::new();
    for rec in &trajectory.records {
        let line = serde_json::to_string(rec)
            .map_err(|e| Error::InvalidInput(format!("trajectory serialization failed: {e}")))?;
        out.push_str(&line);
        out.push('\n');
    }
    Ok(out)
}

pub fn report_to_json(report: &SimulationReport) -> Result<String> {
    serde_json::to_string_pretty(report)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| Error::InvalidInput(format!("report serialization failed: {e}")))
}
