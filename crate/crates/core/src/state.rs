//! Network topology, inventory state, transfer plans, and demand panels.
//!
//! The network is one RDC (location 0) feeding a set of FDCs. Inventory
//! lives either on hand at a location or in the transfer pipeline, which
//! holds exactly `lead_time` shipment matrices: `pipeline[0]` is the oldest
//! shipment (the one arriving next period) and the back is the most recent.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::serde_util::{tuple2_map, tuple3_map};
use crate::types::{LocationId, SkuId, RDC};

/// Cost and topology parameters of one region.
///
/// `spillover_cost` is charged per unit of FDC demand served remotely by the
/// RDC; `lost_sale_cost` per unit of unmet demand anywhere; `transfer_cost`
/// per unit shipped RDC -> FDC. `transfer_cap`, when set, bounds the total
/// units shipped to one FDC in one period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub fdc_ids: Vec<LocationId>,
    pub lead_time: usize,
    pub spillover_cost: f64,
    pub lost_sale_cost: f64,
    pub transfer_cost: BTreeMap<LocationId, f64>,
    pub transfer_cap: Option<u64>,
}

impl NetworkConfig {
    /// A network where every FDC has the same per-unit transfer cost.
    pub fn uniform(
        fdc_ids: impl IntoIterator<Item = LocationId>,
        lead_time: usize,
        spillover_cost: f64,
        lost_sale_cost: f64,
        transfer_cost: f64,
    ) -> Self {
        let fdc_ids: Vec<LocationId> = fdc_ids.into_iter().collect();
        let costs = fdc_ids.iter().map(|&j| (j, transfer_cost)).collect();
        NetworkConfig {
            fdc_ids,
            lead_time,
            spillover_cost,
            lost_sale_cost,
            transfer_cost: costs,
            transfer_cap: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.fdc_ids.is_empty() {
            return Err(Error::InvalidConfig("network has no FDCs".into()));
        }
        let mut seen = BTreeSet::new();
        for &j in &self.fdc_ids {
            if j == RDC {
                return Err(Error::InvalidConfig(
                    "FDC id 0 collides with the RDC".into(),
                ));
            }
            if !seen.insert(j) {
                return Err(Error::InvalidConfig(format!("duplicate FDC id {j}")));
            }
        }
        for (name, v) in [
            ("spillover_cost", self.spillover_cost),
            ("lost_sale_cost", self.lost_sale_cost),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        for &j in &self.fdc_ids {
            match self.transfer_cost.get(&j) {
                Some(r) if r.is_finite() && *r >= 0.0 => {}
                Some(r) => {
                    return Err(Error::InvalidConfig(format!(
                        "transfer cost for FDC {j} must be finite and non-negative, got {r}"
                    )))
                }
                None => {
                    return Err(Error::InvalidConfig(format!(
                        "no transfer cost configured for FDC {j}"
                    )))
                }
            }
        }
        Ok(())
    }

    pub fn is_fdc(&self, loc: LocationId) -> bool {
        self.fdc_ids.contains(&loc)
    }

    pub fn transfer_rate(&self, fdc: LocationId) -> Result<f64> {
        self.transfer_cost
            .get(&fdc)
            .copied()
            .ok_or(Error::UnknownLocation(fdc))
    }
}

/// One period's shipment decision: units leaving the RDC for each
/// (sku, fdc). Sparse; zero entries are never stored, so plans built from
/// the same decisions compare equal.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransferPlan {
    #[serde(with = "tuple2_map")]
    entries: BTreeMap<(SkuId, LocationId), u64>,
}

impl TransferPlan {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, sku: SkuId, fdc: LocationId, qty: u64) {
        if qty == 0 {
            self.entries.remove(&(sku, fdc));
        } else {
            self.entries.insert((sku, fdc), qty);
        }
    }

    pub fn get(&self, sku: SkuId, fdc: LocationId) -> u64 {
        self.entries.get(&(sku, fdc)).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (SkuId, LocationId, u64)> + '_ {
        self.entries.iter().map(|(&(s, j), &q)| (s, j, q))
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.entries.values().sum()
    }

    pub fn total_for_sku(&self, sku: SkuId) -> u64 {
        self.entries
            .range((sku, LocationId::MIN)..=(sku, LocationId::MAX))
            .map(|(_, &q)| q)
            .sum()
    }

    pub fn total_to_fdc(&self, fdc: LocationId) -> u64 {
        self.entries
            .iter()
            .filter(|((_, j), _)| *j == fdc)
            .map(|(_, &q)| q)
            .sum()
    }
}

/// One period's realized demand per (sku, location), RDC included.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodDemand {
    #[serde(with = "tuple2_map")]
    entries: BTreeMap<(SkuId, LocationId), u64>,
}

impl PeriodDemand {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, sku: SkuId, loc: LocationId, qty: u64) {
        if qty == 0 {
            self.entries.remove(&(sku, loc));
        } else {
            self.entries.insert((sku, loc), qty);
        }
    }

    pub fn get(&self, sku: SkuId, loc: LocationId) -> u64 {
        self.entries.get(&(sku, loc)).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (SkuId, LocationId, u64)> + '_ {
        self.entries.iter().map(|(&(s, l), &q)| (s, l, q))
    }

    pub fn total(&self) -> u64 {
        self.entries.values().sum()
    }

    pub fn fdc_total(&self) -> u64 {
        self.entries
            .iter()
            .filter(|((_, l), _)| *l != RDC)
            .map(|(_, &q)| q)
            .sum()
    }
}

#[derive(Serialize, Deserialize)]
struct InventoryStateRepr {
    skus: Vec<SkuId>,
    fdcs: Vec<LocationId>,
    on_hand: Vec<(SkuId, LocationId, u64)>,
    pipeline: Vec<Vec<(SkuId, LocationId, u64)>>,
}

/// On-hand inventory at the RDC and each FDC plus the in-transit pipeline.
///
/// Storage is dense over (sku, location) for the simulator's benefit;
/// lookups by id go through a binary search on the sorted axes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "InventoryStateRepr", try_from = "InventoryStateRepr")]
pub struct InventoryState {
    skus: Vec<SkuId>,
    fdcs: Vec<LocationId>,
    on_hand: Vec<u64>,
    pipeline: VecDeque<Vec<u64>>,
}

impl InventoryState {
    /// Empty state for the given skus and network: zero stock everywhere and
    /// a pipeline of `lead_time` zero-filled shipments.
    pub fn new(skus: impl IntoIterator<Item = SkuId>, network: &NetworkConfig) -> Self {
        let mut skus: Vec<SkuId> = skus.into_iter().collect();
        skus.sort_unstable();
        skus.dedup();
        let mut fdcs = network.fdc_ids.clone();
        fdcs.sort_unstable();
        let n_loc = 1 + fdcs.len();
        let on_hand = vec![0; skus.len() * n_loc];
        let pipeline = (0..network.lead_time)
            .map(|_| vec![0; skus.len() * fdcs.len()])
            .collect();
        InventoryState {
            skus,
            fdcs,
            on_hand,
            pipeline,
        }
    }

    pub fn skus(&self) -> &[SkuId] {
        &self.skus
    }

    pub fn fdcs(&self) -> &[LocationId] {
        &self.fdcs
    }

    pub fn locations(&self) -> impl Iterator<Item = LocationId> + '_ {
        std::iter::once(RDC).chain(self.fdcs.iter().copied())
    }

    pub fn pipeline_len(&self) -> usize {
        self.pipeline.len()
    }

    pub(crate) fn sku_index(&self, sku: SkuId) -> Result<usize> {
        self.skus.binary_search(&sku).map_err(|_| Error::UnknownSku(sku))
    }

    /// Column index into `on_hand`: 0 for the RDC, 1.. for FDCs.
    pub(crate) fn loc_index(&self, loc: LocationId) -> Result<usize> {
        if loc == RDC {
            return Ok(0);
        }
        self.fdcs
            .binary_search(&loc)
            .map(|i| i + 1)
            .map_err(|_| Error::UnknownLocation(loc))
    }

    pub(crate) fn fdc_index(&self, fdc: LocationId) -> Result<usize> {
        self.fdcs
            .binary_search(&fdc)
            .map_err(|_| Error::UnknownLocation(fdc))
    }

    fn cell(&self, sku: SkuId, loc: LocationId) -> Result<usize> {
        let s = self.sku_index(sku)?;
        let l = self.loc_index(loc)?;
        Ok(s * (1 + self.fdcs.len()) + l)
    }

    pub fn on_hand(&self, sku: SkuId, loc: LocationId) -> Result<u64> {
        Ok(self.on_hand[self.cell(sku, loc)?])
    }

    pub fn set_on_hand(&mut self, sku: SkuId, loc: LocationId, qty: u64) -> Result<()> {
        let cell = self.cell(sku, loc)?;
        self.on_hand[cell] = qty;
        Ok(())
    }

    /// Builder-style convenience for tests and instance setup.
    pub fn with_on_hand(mut self, sku: SkuId, loc: LocationId, qty: u64) -> Self {
        self.set_on_hand(sku, loc, qty)
            .expect("with_on_hand: unknown sku or location");
        self
    }

    pub fn pipeline_qty(&self, stage: usize, sku: SkuId, fdc: LocationId) -> Result<u64> {
        let row = self
            .pipeline
            .get(stage)
            .ok_or_else(|| Error::InvalidInput(format!("pipeline stage {stage} out of range")))?;
        let s = self.sku_index(sku)?;
        let f = self.fdc_index(fdc)?;
        Ok(row[s * self.fdcs.len() + f])
    }

    pub fn set_pipeline_qty(
        &mut self,
        stage: usize,
        sku: SkuId,
        fdc: LocationId,
        qty: u64,
    ) -> Result<()> {
        let s = self.sku_index(sku)?;
        let f = self.fdc_index(fdc)?;
        let width = self.fdcs.len();
        let row = self
            .pipeline
            .get_mut(stage)
            .ok_or_else(|| Error::InvalidInput(format!("pipeline stage {stage} out of range")))?;
        row[s * width + f] = qty;
        Ok(())
    }

    /// On-hand plus everything already in transit to the FDC. This is the
    /// quantity replenishment decisions should compare against targets, so
    /// in-flight shipments are not ordered twice.
    pub fn position(&self, sku: SkuId, fdc: LocationId) -> Result<u64> {
        if fdc == RDC || self.fdc_index(fdc).is_err() {
            return Err(Error::UnknownLocation(fdc));
        }
        let s = self.sku_index(sku)?;
        let f = self.fdc_index(fdc)?;
        let mut total = self.on_hand(sku, fdc)?;
        for row in &self.pipeline {
            total += row[s * self.fdcs.len() + f];
        }
        Ok(total)
    }

    /// Units in the system: on hand everywhere plus in transit. Used by
    /// conservation checks.
    pub fn total_units(&self) -> u64 {
        self.on_hand.iter().sum::<u64>()
            + self
                .pipeline
                .iter()
                .map(|row| row.iter().sum::<u64>())
                .sum::<u64>()
    }

    /// Pop the arriving shipment (oldest stage). The pipeline runs one
    /// stage short until [`push_shipment`](Self::push_shipment) enqueues
    /// the period's new transfer after the policy has decided it. Only
    /// meaningful when `lead_time >= 1`.
    pub(crate) fn pop_arrivals(&mut self) -> Vec<u64> {
        self.pipeline.pop_front().expect("pop on empty pipeline")
    }

    pub(crate) fn push_shipment(&mut self, row: Vec<u64>) {
        debug_assert_eq!(row.len(), self.skus.len() * self.fdcs.len());
        self.pipeline.push_back(row);
    }

    pub(crate) fn zero_shipment_row(&self) -> Vec<u64> {
        vec![0; self.skus.len() * self.fdcs.len()]
    }
}

impl From<InventoryState> for InventoryStateRepr {
    fn from(state: InventoryState) -> Self {
        let mut on_hand = Vec::new();
        for (si, &sku) in state.skus.iter().enumerate() {
            for (li, loc) in state.locations().enumerate() {
                let qty = state.on_hand[si * (1 + state.fdcs.len()) + li];
                if qty > 0 {
                    on_hand.push((sku, loc, qty));
                }
            }
        }
        let pipeline = state
            .pipeline
            .iter()
            .map(|row| {
                let mut entries = Vec::new();
                for (si, &sku) in state.skus.iter().enumerate() {
                    for (fi, &fdc) in state.fdcs.iter().enumerate() {
                        let qty = row[si * state.fdcs.len() + fi];
                        if qty > 0 {
                            entries.push((sku, fdc, qty));
                        }
                    }
                }
                entries
            })
            .collect();
        InventoryStateRepr {
            skus: state.skus,
            fdcs: state.fdcs,
            on_hand,
            pipeline,
        }
    }
}

impl TryFrom<InventoryStateRepr> for InventoryState {
    type Error = Error;

    fn try_from(repr: InventoryStateRepr) -> Result<Self> {
        let network = NetworkConfig::uniform(repr.fdcs.clone(), repr.pipeline.len(), 0.0, 0.0, 0.0);
        let mut state = InventoryState::new(repr.skus, &network);
        for (sku, loc, qty) in repr.on_hand {
            state.set_on_hand(sku, loc, qty)?;
        }
        for (stage, row) in repr.pipeline.into_iter().enumerate() {
            for (sku, fdc, qty) in row {
                state.set_pipeline_qty(stage, sku, fdc, qty)?;
            }
        }
        Ok(state)
    }
}

/// Exogenous demand and RDC replenishment over a fixed horizon. Demand is
/// keyed by (period, sku, location); replenishment arrives at the RDC at the
/// end of its period. Zero quantities are not stored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DemandPanel {
    horizon: usize,
    #[serde(with = "tuple3_map")]
    demand: BTreeMap<(usize, SkuId, LocationId), u64>,
    #[serde(with = "tuple2_map")]
    replenishment: BTreeMap<(usize, SkuId), u64>,
}

impl DemandPanel {
    pub fn new(horizon: usize) -> Self {
        DemandPanel {
            horizon,
            demand: BTreeMap::new(),
            replenishment: BTreeMap::new(),
        }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn set_demand(&mut self, t: usize, sku: SkuId, loc: LocationId, qty: u64) -> Result<()> {
        if t >= self.horizon {
            return Err(Error::InvalidInput(format!(
                "demand at period {t} outside horizon {}",
                self.horizon
            )));
        }
        if qty == 0 {
            self.demand.remove(&(t, sku, loc));
        } else {
            self.demand.insert((t, sku, loc), qty);
        }
        Ok(())
    }

    pub fn demand_at(&self, t: usize, sku: SkuId, loc: LocationId) -> u64 {
        self.demand.get(&(t, sku, loc)).copied().unwrap_or(0)
    }

    pub fn set_replenishment(&mut self, t: usize, sku: SkuId, qty: u64) -> Result<()> {
        if t >= self.horizon {
            return Err(Error::InvalidInput(format!(
                "replenishment at period {t} outside horizon {}",
                self.horizon
            )));
        }
        if qty == 0 {
            self.replenishment.remove(&(t, sku));
        } else {
            self.replenishment.insert((t, sku), qty);
        }
        Ok(())
    }

    pub fn replenishment_at(&self, t: usize, sku: SkuId) -> u64 {
        self.replenishment.get(&(t, sku)).copied().unwrap_or(0)
    }

    /// All demand of one period as a sparse (sku, location) slice.
    pub fn slice(&self, t: usize) -> PeriodDemand {
        let mut out = PeriodDemand::new();
        for (&(_, sku, loc), &qty) in self
            .demand
            .range((t, SkuId::MIN, LocationId::MIN)..=(t, SkuId::MAX, LocationId::MAX))
        {
            out.set(sku, loc, qty);
        }
        out
    }

    pub fn replenishment_slice(&self, t: usize) -> BTreeMap<SkuId, u64> {
        self.replenishment
            .range((t, SkuId::MIN)..=(t, SkuId::MAX))
            .map(|(&(_, sku), &qty)| (sku, qty))
            .collect()
    }

    pub fn iter_demand(&self) -> impl Iterator<Item = (usize, SkuId, LocationId, u64)> + '_ {
        self.demand.iter().map(|(&(t, s, l), &q)| (t, s, l, q))
    }

    pub fn iter_replenishment(&self) -> impl Iterator<Item = (usize, SkuId, u64)> + '_ {
        self.replenishment.iter().map(|(&(t, s), &q)| (t, s, q))
    }

    pub fn total_demand(&self) -> u64 {
        self.demand.values().sum()
    }

    /// Split into `[0, t)` and `[t, horizon)`; the tail is re-indexed to
    /// start at period 0.
    pub fn split_at(&self, t: usize) -> Result<(DemandPanel, DemandPanel)> {
        if t > self.horizon {
            return Err(Error::InvalidInput(format!(
                "split point {t} beyond horizon {}",
                self.horizon
            )));
        }
        let mut head = DemandPanel::new(t);
        let mut tail = DemandPanel::new(self.horizon - t);
        for (p, sku, loc, qty) in self.iter_demand() {
            if p < t {
                head.set_demand(p, sku, loc, qty)?;
            } else {
                tail.set_demand(p - t, sku, loc, qty)?;
            }
        }
        for (p, sku, qty) in self.iter_replenishment() {
            if p < t {
                head.set_replenishment(p, sku, qty)?;
            } else {
                tail.set_replenishment(p - t, sku, qty)?;
            }
        }
        Ok((head, tail))
    }
}

/// Structural consistency check for a simulation instance. Returns one
/// message per violation; an empty vector means the instance is runnable.
pub fn validate_instance(
    network: &NetworkConfig,
    state: &InventoryState,
    panel: &DemandPanel,
) -> Vec<String> {
    let mut violations = Vec::new();
    if let Err(e) = network.validate() {
        violations.push(e.to_string());
    }
    if state.pipeline_len() != network.lead_time {
        violations.push(format!(
            "pipeline holds {} stages but lead_time is {}",
            state.pipeline_len(),
            network.lead_time
        ));
    }
    let mut net_fdcs = network.fdc_ids.clone();
    net_fdcs.sort_unstable();
    if state.fdcs() != net_fdcs.as_slice() {
        violations.push(format!(
            "state FDCs {:?} do not match network FDCs {:?}",
            state.fdcs(),
            net_fdcs
        ));
    }
    for (t, sku, loc, _) in panel.iter_demand() {
        if state.sku_index(sku).is_err() {
            violations.push(format!("demand at period {t} references unknown sku {sku}"));
        }
        if loc != RDC && !network.is_fdc(loc) {
            violations.push(format!(
                "demand at period {t} references unknown location {loc}"
            ));
        }
        if t >= panel.horizon() {
            violations.push(format!(
                "demand recorded at period {t} outside horizon {}",
                panel.horizon()
            ));
        }
    }
    for (t, sku, _) in panel.iter_replenishment() {
        if state.sku_index(sku).is_err() {
            violations.push(format!(
                "replenishment at period {t} references unknown sku {sku}"
            ));
        }
    }
    violations
}
