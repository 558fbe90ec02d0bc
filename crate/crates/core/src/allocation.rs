//! Per-period fulfillment economics and the transfer policies built on top
//! of them.
//!
//! Within one period, demand at each location is served from whatever
//! inventory is present: FDC demand from FDC stock (free), then unmet FDC
//! demand from leftover RDC stock at the spillover cost `c`, and anything
//! still unmet is lost at cost `s`. [`solve_period_fulfillment`] computes
//! the cheapest such assignment greedily; [`lp_period_oracle`] brute-forces
//! the same program on tiny instances so the greedy's optimality is checked
//! rather than assumed.
//!
//! Across periods, a policy decides the RDC -> FDC transfers each review.
//! Three families are provided: a safety-stock / target-inventory rule with
//! grid-searched factors ([`parameter_search`]), a myopic forecast-driven
//! allocation ([`myopic_transfers`]), and the same SS/TI rule with factors
//! trained against simulated cost ([`train_e2e_policy`]).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forecast::ForecastResult;
use crate::simulator::{simulate, Trajectory};
use crate::{
    DemandPanel, InventoryState, LocationId, NetworkConfig, PeriodDemand, SkuId, TransferPlan, RDC,
};

/// How one period's demand was served. Maps are sparse: absent keys mean
/// zero. `cost` is always `spillover_cost + lost_sales_cost`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PeriodOutcome {
    /// Units of FDC demand served from that FDC's own stock.
    #[serde(with = "crate::serde_util::tuple2_map")]
    pub fdc_fulfilled: BTreeMap<(SkuId, LocationId), u64>,
    /// Units of FDC demand served remotely by the RDC.
    #[serde(with = "crate::serde_util::tuple2_map")]
    pub spillover: BTreeMap<(SkuId, LocationId), u64>,
    /// Units of RDC-region demand served by the RDC.
    pub rdc_fulfilled: BTreeMap<SkuId, u64>,
    /// Unserved demand, keyed by the location where it arose.
    #[serde(with = "crate::serde_util::tuple2_map")]
    pub lost: BTreeMap<(SkuId, LocationId), u64>,
    pub spillover_cost: f64,
    pub lost_sales_cost: f64,
    pub cost: f64,
}

impl PeriodOutcome {
    pub fn fdc_fulfilled_total(&self) -> u64 {
        self.fdc_fulfilled.values().sum()
    }

    pub fn spillover_total(&self) -> u64 {
        self.spillover.values().sum()
    }

    pub fn lost_total(&self) -> u64 {
        self.lost.values().sum()
    }

    /// Flow balance: per (sku, fdc), local + spillover + lost must equal
    /// demand; per sku at the RDC, fulfilled + lost must equal demand.
    pub fn check_balance(&self, demand: &PeriodDemand) -> Result<()> {
        let mut problems = Vec::new();
        for (sku, loc, d) in demand.iter() {
            let served = if loc == RDC {
                self.rdc_fulfilled.get(&sku).copied().unwrap_or(0)
            } else {
                self.fdc_fulfilled.get(&(sku, loc)).copied().unwrap_or(0)
                    + self.spillover.get(&(sku, loc)).copied().unwrap_or(0)
            };
            let lost = self.lost.get(&(sku, loc)).copied().unwrap_or(0);
            if served + lost != d {
                problems.push(format!(
                    "sku {sku} location {loc}: served {served} + lost {lost} != demand {d}"
                ));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(problems))
        }
    }
}

fn check_plan_keys(plan: &TransferPlan, state: &InventoryState) -> Result<()> {
    for (sku, fdc, _) in plan.iter() {
        state.sku_index(sku)?;
        state.fdc_index(fdc)?;
    }
    Ok(())
}

/// Cheapest way to serve one period's demand, given inventory on hand,
/// shipments arriving this period, and shipments leaving the RDC this
/// period.
///
/// The greedy assignment is optimal: serving FDC demand locally is free, so
/// `x = min(on hand + arriving, demand)` always. A leftover RDC unit saves
/// `s` when it serves RDC demand but only `s - c` as spillover, so RDC
/// demand is served first and spillover only when `c < s`. Spillover order
/// across FDCs is cost-neutral (every unit costs `c`) and fixed to
/// ascending id for determinism. [`lp_period_oracle`] verifies all of this
/// by exhaustion in the test suite.
///
/// Pure: the caller applies the resulting consumption to its own state.
pub fn solve_period_fulfillment(
    state: &InventoryState,
    arriving: &TransferPlan,
    outgoing: &TransferPlan,
    demand: &PeriodDemand,
    network: &NetworkConfig,
) -> Result<PeriodOutcome> {
    network.validate()?;
    check_plan_keys(arriving, state)?;
    check_plan_keys(outgoing, state)?;
    let mut per_sku: BTreeMap<SkuId, Vec<(LocationId, u64)>> = BTreeMap::new();
    for (sku, loc, qty) in demand.iter() {
        state.sku_index(sku)?;
        if loc != RDC {
            state.fdc_index(loc)?;
        }
        per_sku.entry(sku).or_default().push((loc, qty));
    }
    let outgoing_skus: std::collections::BTreeSet<SkuId> =
        outgoing.iter().map(|(sku, _, _)| sku).collect();
    for sku in outgoing_skus {
        let requested = outgoing.total_for_sku(sku);
        let available = state.on_hand(sku, RDC)?;
        if requested > available {
            return Err(Error::InfeasibleTransfer {
                sku,
                requested,
                available,
            });
        }
    }

    let mut out = PeriodOutcome::default();
    let (mut spill_units, mut lost_units) = (0u64, 0u64);
    let spill_worthwhile = network.spillover_cost < network.lost_sale_cost;
    for (&sku, locs) in &per_sku {
        let mut rdc_left = state.on_hand(sku, RDC)? - outgoing.total_for_sku(sku);
        // Local FDC fulfillment first; remember what each FDC still needs.
        let mut unmet: Vec<(LocationId, u64)> = Vec::new();
        let mut rdc_demand = 0u64;
        for &(loc, d) in locs {
            if loc == RDC {
                rdc_demand = d;
                continue;
            }
            let available = state.on_hand(sku, loc)? + arriving.get(sku, loc);
            let x = available.min(d);
            if x > 0 {
                out.fdc_fulfilled.insert((sku, loc), x);
            }
            if d > x {
                unmet.push((loc, d - x));
            }
        }
        let y0 = rdc_left.min(rdc_demand);
        rdc_left -= y0;
        if y0 > 0 {
            out.rdc_fulfilled.insert(sku, y0);
        }
        if rdc_demand > y0 {
            out.lost.insert((sku, RDC), rdc_demand - y0);
            lost_units += rdc_demand - y0;
        }
        for (loc, short) in unmet {
            let y = if spill_worthwhile {
                short.min(rdc_left)
            } else {
                0
            };
            rdc_left -= y;
            if y > 0 {
                out.spillover.insert((sku, loc), y);
                spill_units += y;
            }
            if short > y {
                out.lost.insert((sku, loc), short - y);
                lost_units += short - y;
            }
        }
    }
    out.spillover_cost = network.spillover_cost * spill_units as f64;
    out.lost_sales_cost = network.lost_sale_cost * lost_units as f64;
    out.cost = out.spillover_cost + out.lost_sales_cost;
    Ok(out)
}

/// Largest instance [`lp_period_oracle`] will enumerate.
pub const ORACLE_MAX_SKUS: usize = 3;
pub const ORACLE_MAX_FDCS: usize = 3;
pub const ORACLE_MAX_QTY: u64 = 12;

/// Minimum period cost by exhaustive search over every feasible integer
/// assignment (local fulfillment, RDC fulfillment, spillover, lost), with
/// no greedy shortcuts. Skus are enumerated independently, which is sound
/// because the period program has no cross-sku constraints. Exists as the
/// test oracle for [`solve_period_fulfillment`].
pub fn lp_period_oracle(
    state: &InventoryState,
    arriving: &TransferPlan,
    outgoing: &TransferPlan,
    demand: &PeriodDemand,
    network: &NetworkConfig,
) -> Result<f64> {
    network.validate()?;
    if state.skus().len() > ORACLE_MAX_SKUS || state.fdcs().len() > ORACLE_MAX_FDCS {
        return Err(Error::GuardExceeded {
            guard: format!("oracle size ({ORACLE_MAX_SKUS} skus, {ORACLE_MAX_FDCS} fdcs)"),
            detail: format!(
                "instance has {} skus, {} fdcs",
                state.skus().len(),
                state.fdcs().len()
            ),
        });
    }
    let too_big = |qty: u64| qty > ORACLE_MAX_QTY;
    let oversized = state
        .skus()
        .iter()
        .flat_map(|&sku| state.locations().map(move |loc| (sku, loc)))
        .any(|(sku, loc)| too_big(state.on_hand(sku, loc).unwrap_or(0)))
        || arriving.iter().any(|(_, _, q)| too_big(q))
        || outgoing.iter().any(|(_, _, q)| too_big(q))
        || demand.iter().any(|(_, _, q)| too_big(q));
    if oversized {
        return Err(Error::GuardExceeded {
            guard: format!("oracle quantity ({ORACLE_MAX_QTY})"),
            detail: "a quantity exceeds the enumeration bound".into(),
        });
    }
    check_plan_keys(arriving, state)?;
    check_plan_keys(outgoing, state)?;

    let mut total = 0.0;
    for &sku in state.skus() {
        let requested = outgoing.total_for_sku(sku);
        let available = state.on_hand(sku, RDC)?;
        if requested > available {
            return Err(Error::InfeasibleTransfer {
                sku,
                requested,
                available,
            });
        }
        let budget = available - requested;
        let d0 = demand.get(sku, RDC);
        let fdcs: Vec<(u64, u64)> = state
            .fdcs()
            .iter()
            .map(|&j| {
                let avail = state.on_hand(sku, j).unwrap() + arriving.get(sku, j);
                (avail, demand.get(sku, j))
            })
            .collect();
        total += enumerate_sku_min(&fdcs, d0, budget, network);
    }
    Ok(total)
}

/// Recursively try every (x_j, y_j) pair per FDC and every y_0, tracking
/// the cheapest feasible assignment.
fn enumerate_sku_min(fdcs: &[(u64, u64)], d0: u64, budget: u64, network: &NetworkConfig) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        fdcs: &[(u64, u64)],
        j: usize,
        spill_used: u64,
        spill_units: u64,
        lost_units: u64,
        d0: u64,
        budget: u64,
        network: &NetworkConfig,
        best: &mut f64,
    ) {
        if j == fdcs.len() {
            let y0_max = d0.min(budget - spill_used);
            for y0 in 0..=y0_max {
                let cost = network.spillover_cost * spill_units as f64
                    + network.lost_sale_cost * (lost_units + d0 - y0) as f64;
                if cost < *best {
                    *best = cost;
                }
            }
            return;
        }
        let (avail, d) = fdcs[j];
        for x in 0..=avail.min(d) {
            for y in 0..=(d - x).min(budget - spill_used) {
                recurse(
                    fdcs,
                    j + 1,
                    spill_used + y,
                    spill_units + y,
                    lost_units + (d - x - y),
                    d0,
                    budget,
                    network,
                    best,
                );
            }
        }
    }
    let mut best = f64::INFINITY;
    recurse(fdcs, 0, 0, 0, 0, d0, budget, network, &mut best);
    best
}

/// The scalar knobs that generate safety stock and target inventory:
/// a safety factor `z` and a coverage span `d` (in periods) per location,
/// plus the review cadence shared by the whole policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SsTiFactors {
    pub z: BTreeMap<LocationId, f64>,
    pub d: BTreeMap<LocationId, f64>,
    pub review_period: usize,
}

impl SsTiFactors {
    /// Same factors at every location, RDC included.
    pub fn uniform(z: f64, d: f64, network: &NetworkConfig, review_period: usize) -> Self {
        let locs = std::iter::once(RDC).chain(network.fdc_ids.iter().copied());
        SsTiFactors {
            z: locs.clone().map(|j| (j, z)).collect(),
            d: locs.map(|j| (j, d)).collect(),
            review_period,
        }
    }

    pub fn validate(&self, network: &NetworkConfig) -> Result<()> {
        if self.review_period == 0 {
            return Err(Error::InvalidConfig("review period must be positive".into()));
        }
        for loc in std::iter::once(RDC).chain(network.fdc_ids.iter().copied()) {
            match self.z.get(&loc) {
                Some(z) if z.is_finite() && *z >= 0.0 => {}
                Some(z) => {
                    return Err(Error::InvalidInput(format!(
                        "safety factor at location {loc} must be finite and non-negative, got {z}"
                    )))
                }
                None => {
                    return Err(Error::InvalidInput(format!(
                        "no safety factor for location {loc}"
                    )))
                }
            }
            match self.d.get(&loc) {
                Some(d) if d.is_finite() && *d > 0.0 => {}
                Some(d) => {
                    return Err(Error::InvalidInput(format!(
                        "coverage span at location {loc} must be positive, got {d}"
                    )))
                }
                None => {
                    return Err(Error::InvalidInput(format!(
                        "no coverage span for location {loc}"
                    )))
                }
            }
        }
        Ok(())
    }
}

/// Safety stock and target inventory per (sku, location), along with the
/// factors they were generated from. Missing entries read as zero, so skus
/// outside an assortment simply attract no transfers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyParams {
    #[serde(with = "crate::serde_util::tuple2_map")]
    pub ss: BTreeMap<(SkuId, LocationId), u64>,
    #[serde(with = "crate::serde_util::tuple2_map")]
    pub ti: BTreeMap<(SkuId, LocationId), u64>,
    pub factors: SsTiFactors,
}

impl PolicyParams {
    pub fn ss_at(&self, sku: SkuId, loc: LocationId) -> u64 {
        self.ss.get(&(sku, loc)).copied().unwrap_or(0)
    }

    pub fn ti_at(&self, sku: SkuId, loc: LocationId) -> u64 {
        self.ti.get(&(sku, loc)).copied().unwrap_or(0)
    }
}

/// Turn demand forecasts into SS/TI levels over the protection window
/// `w = lead time + review period`:
///
/// * `SS = ceil(z * sigma_w)` where `sigma_w` aggregates per-step forecast
///   sd over the window,
/// * `TI = ceil((mu_w + z * sigma_w) * d / review_period)`, the coverage
///   span rescaling the window demand when `d` differs from the review
///   period; `TI >= SS` always.
pub fn compute_ss_ti(
    forecasts: &BTreeMap<(SkuId, LocationId), ForecastResult>,
    network: &NetworkConfig,
    factors: &SsTiFactors,
) -> Result<PolicyParams> {
    network.validate()?;
    factors.validate(network)?;
    let w = network.lead_time + factors.review_period;
    let review = factors.review_period as f64;
    let mut params = PolicyParams {
        ss: BTreeMap::new(),
        ti: BTreeMap::new(),
        factors: factors.clone(),
    };
    for (&(sku, loc), fr) in forecasts {
        if loc != RDC && !network.is_fdc(loc) {
            return Err(Error::UnknownLocation(loc));
        }
        let mu = fr.window_point(w)?;
        let sigma = fr.window_sd(w)?;
        let z = factors.z[&loc];
        let d = factors.d[&loc];
        let ss = (z * sigma).ceil() as u64;
        let raw = mu + z * sigma;
        let scaled = if (d - review).abs() > 1e-12 {
            raw * d / review
        } else {
            raw
        };
        let ti = (scaled.ceil() as u64).max(ss);
        if ss > 0 {
            params.ss.insert((sku, loc), ss);
        }
        if ti > 0 {
            params.ti.insert((sku, loc), ti);
        }
    }
    Ok(params)
}

/// Split `budget` units across shortfalls proportionally, rounding by
/// largest remainder (ties: ascending fdc id). Grants never exceed the
/// shortfalls and sum to min(budget, total shortfall).
fn ration(budget: u64, shorts: &[(LocationId, u64)]) -> Vec<u64> {
    let total: u64 = shorts.iter().map(|&(_, s)| s).sum();
    if total <= budget {
        return shorts.iter().map(|&(_, s)| s).collect();
    }
    if budget == 0 {
        return vec![0; shorts.len()];
    }
    let mut grants: Vec<u64> = Vec::with_capacity(shorts.len());
    let mut remainders: Vec<(u128, LocationId, usize)> = Vec::with_capacity(shorts.len());
    let mut granted: u64 = 0;
    for (i, &(fdc, short)) in shorts.iter().enumerate() {
        let product = budget as u128 * short as u128;
        let base = (product / total as u128) as u64;
        grants.push(base);
        granted += base;
        remainders.push((product % total as u128, fdc, i));
    }
    remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, _, i) in remainders.iter().take((budget - granted) as usize) {
        grants[i] += 1;
    }
    grants
}

/// Decide this period's transfers from SS/TI levels. Per sku, the RDC first
/// reserves its own safety stock; remaining units fill FDC safety-stock
/// shortfalls, then target-inventory shortfalls, each prorated by largest
/// remainder when the RDC cannot cover them all. The safety-stock pass runs
/// across every sku before any target-inventory grant, so a scarce per-FDC
/// `transfer_cap` is never spent on one sku's top-up while another sku's
/// buffer is short. Self-capping: never ships more than RDC stock.
pub fn allocate_transfers(
    state: &InventoryState,
    params: &PolicyParams,
    network: &NetworkConfig,
) -> TransferPlan {
    let mut plan = TransferPlan::new();
    let mut cap_left: BTreeMap<LocationId, u64> = state
        .fdcs()
        .iter()
        .map(|&j| (j, network.transfer_cap.unwrap_or(u64::MAX)))
        .collect();
    let mut budget: BTreeMap<SkuId, u64> = state
        .skus()
        .iter()
        .map(|&sku| {
            let on_hand = state.on_hand(sku, RDC).expect("sku from state");
            (sku, on_hand.saturating_sub(params.ss_at(sku, RDC)))
        })
        .collect();

    // Pass 1 fills safety-stock shortfalls, pass 2 tops up toward target
    // inventory; positions already count pipeline stock, and pass 2 counts
    // pass-1 grants via the plan itself.
    for target_is_ti in [false, true] {
        for &sku in state.skus() {
            let shorts: Vec<(LocationId, u64)> = state
                .fdcs()
                .iter()
                .filter_map(|&j| {
                    let level = if target_is_ti {
                        params.ti_at(sku, j)
                    } else {
                        params.ss_at(sku, j)
                    };
                    let position =
                        state.position(sku, j).expect("fdc from state") + plan.get(sku, j);
                    let short = level.saturating_sub(position).min(cap_left[&j]);
                    (short > 0).then_some((j, short))
                })
                .collect();
            if shorts.is_empty() {
                continue;
            }
            let grants = ration(budget[&sku], &shorts);
            for (&(j, _), &g) in shorts.iter().zip(&grants) {
                if g == 0 {
                    continue;
                }
                plan.set(sku, j, plan.get(sku, j) + g);
                *cap_left.get_mut(&j).unwrap() -= g;
                *budget.get_mut(&sku).unwrap() -= g;
            }
        }
    }
    plan
}

/// A transfer decision rule driven by the simulator once per period.
/// Implementations must be deterministic functions of `(t, state)` when
/// used with the exact evaluators.
pub trait TransferPolicy {
    fn decide(
        &mut self,
        t: usize,
        state: &InventoryState,
        network: &NetworkConfig,
    ) -> Result<TransferPlan>;
}

/// Ship toward SS/TI levels on review periods, nothing in between.
#[derive(Debug, Clone)]
pub struct SsTiPolicy {
    params: PolicyParams,
}

impl SsTiPolicy {
    pub fn new(params: PolicyParams) -> Self {
        SsTiPolicy { params }
    }

    pub fn params(&self) -> &PolicyParams {
        &self.params
    }
}

impl TransferPolicy for SsTiPolicy {
    fn decide(
        &mut self,
        t: usize,
        state: &InventoryState,
        network: &NetworkConfig,
    ) -> Result<TransferPlan> {
        if t.is_multiple_of(self.params.factors.review_period) {
            Ok(allocate_transfers(state, &self.params, network))
        } else {
            Ok(TransferPlan::new())
        }
    }
}

/// Replay a fixed schedule of transfers; periods without an entry ship
/// nothing. Useful for hand traces and for replaying an oracle's decision.
#[derive(Debug, Clone, Default)]
pub struct FixedPlanPolicy {
    plans: BTreeMap<usize, TransferPlan>,
}

impl FixedPlanPolicy {
    pub fn new(plans: BTreeMap<usize, TransferPlan>) -> Self {
        FixedPlanPolicy { plans }
    }

    /// Never ships anything.
    pub fn idle() -> Self {
        Self::default()
    }
}

impl TransferPolicy for FixedPlanPolicy {
    fn decide(
        &mut self,
        t: usize,
        _state: &InventoryState,
        _network: &NetworkConfig,
    ) -> Result<TransferPlan> {
        Ok(self.plans.get(&t).cloned().unwrap_or_default())
    }
}

fn window_ceil(fr: Option<&ForecastResult>, t: usize, w: usize) -> u64 {
    match fr {
        Some(f) => {
            let lo = t.min(f.point.len());
            let hi = (t + w).min(f.point.len());
            let sum: f64 = f.point[lo..hi].iter().sum();
            sum.max(0.0).ceil() as u64
        }
        None => 0,
    }
}

/// One-shot deterministic-equivalent allocation: treat the point forecasts
/// over the window `lead time + 1` as known demand and ship the cheapest
/// transfer for that window assuming no later ones.
///
/// The RDC retains its own forecast demand plus `rdc_safety`; the surplus
/// fills forecast-implied FDC shortfalls. A unit shipped to FDC `j` turns a
/// would-be lost sale (cost `s`) into a transfer (cost `r_j`), so only FDCs
/// with `r_j < s` receive anything, cheapest first, splitting a tie tier by
/// largest-remainder proration. The test suite checks this is exactly the
/// window optimum by enumerating every feasible transfer on small
/// instances. Forecasts are indexed from period 0; `t` selects the window.
pub fn myopic_transfers(
    state: &InventoryState,
    forecasts: &BTreeMap<(SkuId, LocationId), ForecastResult>,
    rdc_safety: &BTreeMap<SkuId, u64>,
    network: &NetworkConfig,
    t: usize,
) -> Result<TransferPlan> {
    network.validate()?;
    let w = network.lead_time + 1;
    let mut plan = TransferPlan::new();
    let mut cap_left: BTreeMap<LocationId, u64> = state
        .fdcs()
        .iter()
        .map(|&j| (j, network.transfer_cap.unwrap_or(u64::MAX)))
        .collect();
    for &sku in state.skus() {
        let retain = window_ceil(forecasts.get(&(sku, RDC)), t, w)
            + rdc_safety.get(&sku).copied().unwrap_or(0);
        let mut budget = state.on_hand(sku, RDC)?.saturating_sub(retain);
        if budget == 0 {
            continue;
        }
        let mut needs: Vec<(f64, LocationId, u64)> = Vec::new();
        for &j in state.fdcs() {
            let rate = network.transfer_rate(j)?;
            if rate >= network.lost_sale_cost {
                continue;
            }
            let need = window_ceil(forecasts.get(&(sku, j)), t, w)
                .saturating_sub(state.position(sku, j)?)
                .min(cap_left[&j]);
            if need > 0 {
                needs.push((rate, j, need));
            }
        }
        needs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("rates are finite").then(a.1.cmp(&b.1)));
        let mut i = 0;
        while i < needs.len() && budget > 0 {
            let mut end = i + 1;
            while end < needs.len() && needs[end].0 == needs[i].0 {
                end += 1;
            }
            let tier: Vec<(LocationId, u64)> =
                needs[i..end].iter().map(|&(_, j, n)| (j, n)).collect();
            let grants = ration(budget, &tier);
            for (&(j, _), &g) in tier.iter().zip(&grants) {
                if g == 0 {
                    continue;
                }
                plan.set(sku, j, plan.get(sku, j) + g);
                *cap_left.get_mut(&j).unwrap() -= g;
                budget -= g;
            }
            i = end;
        }
    }
    Ok(plan)
}

/// Myopic forecast-driven policy wrapping [`myopic_transfers`].
#[derive(Debug, Clone)]
pub struct MyopicPolicy {
    forecasts: BTreeMap<(SkuId, LocationId), ForecastResult>,
    rdc_safety: BTreeMap<SkuId, u64>,
}

impl MyopicPolicy {
    pub fn new(
        forecasts: BTreeMap<(SkuId, LocationId), ForecastResult>,
        rdc_safety: BTreeMap<SkuId, u64>,
    ) -> Self {
        MyopicPolicy {
            forecasts,
            rdc_safety,
        }
    }
}

impl TransferPolicy for MyopicPolicy {
    fn decide(
        &mut self,
        t: usize,
        state: &InventoryState,
        network: &NetworkConfig,
    ) -> Result<TransferPlan> {
        myopic_transfers(state, &self.forecasts, &self.rdc_safety, network, t)
    }
}

/// Everything a policy evaluation needs besides the factors under test.
/// Scenarios are passed separately so the same setup serves both the grid
/// search and training; reusing one scenario set across candidates is what
/// makes their costs directly comparable.
#[derive(Debug, Clone, Copy)]
pub struct EvalSetup<'a> {
    pub network: &'a NetworkConfig,
    pub initial: &'a InventoryState,
    pub forecasts: &'a BTreeMap<(SkuId, LocationId), ForecastResult>,
    pub review_period: usize,
}

fn mean_cost_and_shortfall(
    setup: &EvalSetup,
    scenarios: &[DemandPanel],
    params: &PolicyParams,
    want_shortfall: bool,
) -> Result<(f64, f64)> {
    let mut cost_sum = 0.0;
    let mut shortfall_sum = 0.0;
    let mut shortfall_n: u64 = 0;
    for panel in scenarios {
        let mut policy = SsTiPolicy::new(params.clone());
        let (trajectory, report) = simulate(setup.network, setup.initial, panel, &mut policy)?;
        cost_sum += report.total_cost;
        if want_shortfall {
            let (sum, n) = ss_shortfall(&trajectory, params);
            shortfall_sum += sum;
            shortfall_n += n;
        }
    }
    let mean_cost = cost_sum / scenarios.len() as f64;
    let mean_shortfall = if shortfall_n > 0 {
        shortfall_sum / shortfall_n as f64
    } else {
        0.0
    };
    Ok((mean_cost, mean_shortfall))
}

/// Sum and count of positive parts of (SS - end-of-period on-hand) over
/// every (period, sku, location). The end state of period k is the next
/// record's pre-arrival state.
fn ss_shortfall(trajectory: &Trajectory, params: &PolicyParams) -> (f64, u64) {
    let mut sum = 0.0;
    let mut n = 0u64;
    for k in 0..trajectory.records.len() {
        let end_state = trajectory
            .records
            .get(k + 1)
            .map(|r| &r.state_before)
            .unwrap_or(&trajectory.final_state);
        for &sku in end_state.skus() {
            for loc in end_state.locations() {
                let on_hand = end_state.on_hand(sku, loc).expect("state is consistent");
                let ss = params.ss_at(sku, loc);
                if ss > on_hand {
                    sum += (ss - on_hand) as f64;
                }
                n += 1;
            }
        }
    }
    (sum, n)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchRow {
    pub z: f64,
    pub d: f64,
    pub mean_cost: f64,
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub best: PolicyParams,
    pub best_mean_cost: f64,
    /// One row per (z, d) grid point, z-major ascending.
    pub table: Vec<SearchRow>,
}

/// Grid search over uniform (z, d) factor pairs: every candidate is
/// simulated on the same scenario panels and the pair with the lowest mean
/// total cost wins (ties: smallest z, then smallest d).
pub fn parameter_search(
    setup: &EvalSetup,
    scenarios: &[DemandPanel],
    z_grid: &[f64],
    d_grid: &[f64],
) -> Result<SearchOutcome> {
    if z_grid.is_empty() || d_grid.is_empty() {
        return Err(Error::InvalidInput("empty factor grid".into()));
    }
    if scenarios.is_empty() {
        return Err(Error::InvalidInput("no demand scenarios".into()));
    }
    let sorted = |grid: &[f64]| -> Vec<f64> {
        let mut g = grid.to_vec();
        g.sort_by(|a, b| a.partial_cmp(b).expect("grid values are finite"));
        g.dedup();
        g
    };
    let mut best: Option<(PolicyParams, f64)> = None;
    let mut table = Vec::new();
    for &z in &sorted(z_grid) {
        for &d in &sorted(d_grid) {
            let factors = SsTiFactors::uniform(z, d, setup.network, setup.review_period);
            let params = compute_ss_ti(setup.forecasts, setup.network, &factors)?;
            let (mean_cost, _) = mean_cost_and_shortfall(setup, scenarios, &params, false)?;
            table.push(SearchRow { z, d, mean_cost });
            if best.as_ref().map(|(_, c)| mean_cost < *c).unwrap_or(true) {
                best = Some((params, mean_cost));
            }
        }
    }
    let (best, best_mean_cost) = best.expect("grids are non-empty");
    Ok(SearchOutcome {
        best,
        best_mean_cost,
        table,
    })
}

/// Weights of the composite training loss: mean simulated operating cost,
/// mean absolute forecast error (constant unless the forecaster is
/// co-tuned), and mean safety-stock shortfall at period ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompositeLossWeights {
    pub operational: f64,
    pub forecast: f64,
    pub safety: f64,
}

impl Default for CompositeLossWeights {
    fn default() -> Self {
        CompositeLossWeights {
            operational: 1.0,
            forecast: 0.0,
            safety: 0.1,
        }
    }
}

impl CompositeLossWeights {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("operational", self.operational),
            ("forecast", self.forecast),
            ("safety", self.safety),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "{name} loss weight must be finite and non-negative, got {v}"
                )));
            }
        }
        if self.operational == 0.0 && self.forecast == 0.0 && self.safety == 0.0 {
            return Err(Error::InvalidConfig("all loss weights are zero".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub weights: CompositeLossWeights,
    /// Maximum loss evaluations, counting the initial one.
    pub budget: usize,
    pub z_step: f64,
    pub d_step: f64,
    /// Descent stops once both step sizes shrink below this.
    pub min_step: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            weights: CompositeLossWeights::default(),
            budget: 200,
            z_step: 0.5,
            d_step: 0.5,
            min_step: 1e-3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub factors: SsTiFactors,
    pub params: PolicyParams,
    /// Accepted losses, initial evaluation first; non-increasing.
    pub trace: Vec<f64>,
    pub evaluations: usize,
    /// Set when the evaluation budget ran out before the steps converged.
    pub budget_exhausted: bool,
}

/// Mean absolute error of per-period point forecasts against realized
/// demand across scenarios. Forecast horizons must cover each panel.
pub fn forecast_mae(
    forecasts: &BTreeMap<(SkuId, LocationId), ForecastResult>,
    scenarios: &[DemandPanel],
) -> Result<f64> {
    let mut sum = 0.0;
    let mut n: u64 = 0;
    for panel in scenarios {
        for (&(sku, loc), fr) in forecasts {
            if fr.point.len() < panel.horizon() {
                return Err(Error::ShortHistory {
                    got: fr.point.len(),
                    need: panel.horizon(),
                });
            }
            for t in 0..panel.horizon() {
                sum += (fr.point[t] - panel.demand_at(t, sku, loc) as f64).abs();
                n += 1;
            }
        }
    }
    Ok(if n > 0 { sum / n as f64 } else { 0.0 })
}

/// Tune the SS/TI factors directly against simulated cost: coordinate
/// descent over each location's (z, d), trying a step up then down, keeping
/// only strict improvements of the composite loss, and halving the steps
/// after a sweep with no accepted move. Every candidate is scored on the
/// same scenarios, so comparisons are noise-free and the accepted-loss
/// trace is non-increasing by construction.
pub fn train_e2e_policy(
    setup: &EvalSetup,
    scenarios: &[DemandPanel],
    initial: SsTiFactors,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    cfg.weights.validate()?;
    initial.validate(setup.network)?;
    if cfg.budget == 0 {
        return Err(Error::InvalidConfig("training budget must be positive".into()));
    }
    if scenarios.is_empty() {
        return Err(Error::InvalidInput("no demand scenarios".into()));
    }
    for step in [cfg.z_step, cfg.d_step, cfg.min_step] {
        if !step.is_finite() || step <= 0.0 {
            return Err(Error::InvalidConfig("step sizes must be positive".into()));
        }
    }
    let forecast_term = if cfg.weights.forecast > 0.0 {
        forecast_mae(setup.forecasts, scenarios)?
    } else {
        0.0
    };
    let want_shortfall = cfg.weights.safety > 0.0;
    let loss_of = |factors: &SsTiFactors| -> Result<(f64, PolicyParams)> {
        let params = compute_ss_ti(setup.forecasts, setup.network, factors)?;
        let (mean_cost, mean_shortfall) =
            mean_cost_and_shortfall(setup, scenarios, &params, want_shortfall)?;
        let loss = cfg.weights.operational * mean_cost
            + cfg.weights.forecast * forecast_term
            + cfg.weights.safety * mean_shortfall;
        Ok((loss, params))
    };

    let mut factors = initial;
    let (mut best_loss, mut best_params) = loss_of(&factors)?;
    let mut evaluations = 1;
    let mut trace = vec![best_loss];
    let mut z_step = cfg.z_step;
    let mut d_step = cfg.d_step;
    let mut budget_exhausted = evaluations >= cfg.budget;
    let locations: Vec<LocationId> = factors.z.keys().copied().collect();

    'descent: while (z_step >= cfg.min_step || d_step >= cfg.min_step) && !budget_exhausted {
        let mut improved = false;
        for &loc in &locations {
            for is_d in [false, true] {
                let step = if is_d { d_step } else { z_step };
                if step < cfg.min_step {
                    continue;
                }
                for direction in [1.0, -1.0] {
                    let current = if is_d {
                        factors.d[&loc]
                    } else {
                        factors.z[&loc]
                    };
                    let proposed = current + direction * step;
                    // z stays non-negative, d strictly positive.
                    if (is_d && proposed <= 0.0) || (!is_d && proposed < 0.0) {
                        continue;
                    }
                    if evaluations >= cfg.budget {
                        budget_exhausted = true;
                        break 'descent;
                    }
                    let mut candidate = factors.clone();
                    *(if is_d {
                        candidate.d.get_mut(&loc)
                    } else {
                        candidate.z.get_mut(&loc)
                    })
                    .unwrap() = proposed;
                    let (loss, params) = loss_of(&candidate)?;
                    evaluations += 1;
                    if loss < best_loss {
                        factors = candidate;
                        best_loss = loss;
                        best_params = params;
                        trace.push(loss);
                        improved = true;
                        break;
                    }
                }
            }
        }
        if !improved {
            z_step /= 2.0;
            d_step /= 2.0;
        }
    }

    Ok(TrainOutcome {
        factors,
        params: best_params,
        trace,
        evaluations,
        budget_exhausted,
    })
}
