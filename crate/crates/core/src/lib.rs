//! Planning library for a two-echelon fulfillment region: one regional
//! distribution center (RDC) feeding several forward distribution centers
//! (FDCs).
//!
//! The crate covers the full loop:
//!
//! * [`datagen`] builds synthetic order histories and demand panels, and
//!   ingests real order logs.
//! * [`forecast`] fits per-series additive Holt-Winters models with
//!   promotion handling.
//! * [`assortment`] decides which K skus an FDC should stock, with exact,
//!   frequency-ranked, reverse-exclusion, and hybrid selectors.
//! * [`allocation`] decides how many units to push RDC -> FDC each period:
//!   safety-stock/target-inventory policies, a myopic forecast policy, and
//!   simulation-based tuning of both.
//! * [`simulator`] replays policies period by period against a demand panel
//!   and scores them, with a small exact dynamic program as the optimality
//!   reference on tiny instances.

pub mod allocation;
pub mod assortment;
pub mod datagen;
pub mod error;
pub mod forecast;
pub mod simulator;
mod serde_util;
mod state;
mod types;

pub use error::{Error, Result};
pub use state::{
    validate_instance, DemandPanel, InventoryState, NetworkConfig, PeriodDemand, TransferPlan,
};
pub use types::{Assortment, LocationId, OrderBook, OrderType, Sku, SkuId, RDC};
