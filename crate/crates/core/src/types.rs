//! Catalog, order-type, and assortment types shared by every module.
//!
//! An order type is a distinct set of skus bought together; its count says
//! how many times that exact basket occurred. Keeping baskets aggregated
//! (rather than one row per order) is what lets the assortment algorithms
//! run on millions of historical orders.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type SkuId = u32;
pub type LocationId = u32;

/// Location id reserved for the regional distribution center. FDC ids must
/// be nonzero.
pub const RDC: LocationId = 0;

/// One product in the catalog. `category_id` and `popularity_weight` are
/// generator metadata and carry no semantics for the planning algorithms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sku {
    pub id: SkuId,
    pub category_id: u32,
    pub popularity_weight: f64,
}

/// A distinct basket (sku set) with the number of historical orders that
/// match it exactly. The sku list is sorted, deduplicated, and non-empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderType {
    skus: Vec<SkuId>,
    pub count: u64,
}

impl OrderType {
    pub fn new(skus: impl IntoIterator<Item = SkuId>, count: u64) -> Result<Self> {
        let mut skus: Vec<SkuId> = skus.into_iter().collect();
        skus.sort_unstable();
        skus.dedup();
        if skus.is_empty() {
            return Err(Error::InvalidInput("order type with empty sku set".into()));
        }
        Ok(OrderType { skus, count })
    }

    pub fn skus(&self) -> &[SkuId] {
        &self.skus
    }

    pub fn contains(&self, sku: SkuId) -> bool {
        self.skus.binary_search(&sku).is_ok()
    }

    /// True when every sku of the basket is in `selected`.
    pub fn covered_by(&self, selected: &BTreeSet<SkuId>) -> bool {
        self.skus.iter().all(|s| selected.contains(s))
    }
}

/// A catalog plus the aggregated order history against it.
///
/// Construction merges duplicate sku sets by summing counts and stores the
/// order types in lexicographic sku-set order, so two books built from the
/// same multiset of orders compare equal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderBook {
    catalog: Vec<Sku>,
    orders: Vec<OrderType>,
}

impl OrderBook {
    pub fn new(mut catalog: Vec<Sku>, orders: Vec<OrderType>) -> Result<Self> {
        catalog.sort_by_key(|s| s.id);
        for pair in catalog.windows(2) {
            if pair[0].id == pair[1].id {
                return Err(Error::InvalidInput(format!(
                    "duplicate sku id {} in catalog",
                    pair[0].id
                )));
            }
        }
        let ids: Vec<SkuId> = catalog.iter().map(|s| s.id).collect();
        let mut merged: BTreeMap<Vec<SkuId>, u64> = BTreeMap::new();
        for order in orders {
            for sku in order.skus() {
                if ids.binary_search(sku).is_err() {
                    return Err(Error::UnknownSku(*sku));
                }
            }
            *merged.entry(order.skus).or_insert(0) += order.count;
        }
        let orders = merged
            .into_iter()
            .map(|(skus, count)| OrderType { skus, count })
            .collect();
        Ok(OrderBook { catalog, orders })
    }

    /// A catalog of bare skus (no generator metadata), as produced when
    /// ingesting an order log that carries ids only.
    pub fn from_ids(ids: impl IntoIterator<Item = SkuId>, orders: Vec<OrderType>) -> Result<Self> {
        let catalog = ids
            .into_iter()
            .map(|id| Sku {
                id,
                category_id: 0,
                popularity_weight: 0.0,
            })
            .collect();
        OrderBook::new(catalog, orders)
    }

    pub fn catalog(&self) -> &[Sku] {
        &self.catalog
    }

    pub fn orders(&self) -> &[OrderType] {
        &self.orders
    }

    pub fn sku_ids(&self) -> impl Iterator<Item = SkuId> + '_ {
        self.catalog.iter().map(|s| s.id)
    }

    pub fn contains_sku(&self, sku: SkuId) -> bool {
        self.catalog.binary_search_by_key(&sku, |s| s.id).is_ok()
    }

    /// Total historical orders, i.e. the sum of all order-type counts.
    pub fn total_orders(&self) -> u64 {
        self.orders.iter().map(|o| o.count).sum()
    }

    /// Merge several books over the same catalog into one (counts add up).
    /// Catalogs must agree on sku ids; metadata is taken from the first book.
    pub fn merge(books: &[OrderBook]) -> Result<OrderBook> {
        let first = books
            .first()
            .ok_or_else(|| Error::InvalidInput("merge of zero order books".into()))?;
        let ids: Vec<SkuId> = first.sku_ids().collect();
        let mut orders = Vec::new();
        for book in books {
            if book.sku_ids().collect::<Vec<_>>() != ids {
                return Err(Error::InvalidInput(
                    "order books to merge disagree on catalog ids".into(),
                ));
            }
            orders.extend(book.orders.iter().cloned());
        }
        OrderBook::new(first.catalog.clone(), orders)
    }
}

/// A warehouse assortment: the sku set chosen for local stocking, plus the
/// capacity it was chosen under. `selected.len() <= cap` always holds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assortment {
    selected: BTreeSet<SkuId>,
    cap: usize,
}

impl Assortment {
    pub fn new(selected: BTreeSet<SkuId>, cap: usize) -> Result<Self> {
        if selected.len() > cap {
            return Err(Error::InvalidInput(format!(
                "assortment holds {} skus but cap is {}",
                selected.len(),
                cap
            )));
        }
        Ok(Assortment { selected, cap })
    }

    pub fn selected(&self) -> &BTreeSet<SkuId> {
        &self.selected
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }

    pub fn contains(&self, sku: SkuId) -> bool {
        self.selected.contains(&sku)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_type_normalizes_and_rejects_empty() {
        let o = OrderType::new([3, 1, 3, 2], 5).unwrap();
        assert_eq!(o.skus(), &[1, 2, 3]);
        assert!(OrderType::new([], 1).is_err());
    }

    #[test]
    fn book_merges_duplicate_baskets() {
        let book = OrderBook::from_ids(
            0..4,
            vec![
                OrderType::new([1, 2], 3).unwrap(),
                OrderType::new([2, 1], 4).unwrap(),
                OrderType::new([0], 1).unwrap(),
            ],
        )
        .unwrap();
        assert_eq!(book.orders().len(), 2);
        assert_eq!(book.total_orders(), 8);
        let dup = book.orders().iter().find(|o| o.skus() == [1, 2]).unwrap();
        assert_eq!(dup.count, 7);
    }

    #[test]
    fn book_rejects_unknown_sku_reference() {
        let err = OrderBook::from_ids(0..2, vec![OrderType::new([5], 1).unwrap()]);
        assert!(matches!(err, Err(Error::UnknownSku(5))));
    }

    #[test]
    fn merge_requires_matching_catalogs() {
        let a = OrderBook::from_ids(0..3, vec![OrderType::new([0], 1).unwrap()]).unwrap();
        let b = OrderBook::from_ids(0..4, vec![OrderType::new([1], 1).unwrap()]).unwrap();
        assert!(OrderBook::merge(&[a.clone(), b]).is_err());
        let merged = OrderBook::merge(&[a.clone(), a]).unwrap();
        assert_eq!(merged.total_orders(), 2);
    }

    #[test]
    fn assortment_enforces_cap() {
        assert!(Assortment::new(BTreeSet::from([1, 2, 3]), 2).is_err());
        let a = Assortment::new(BTreeSet::from([1, 2]), 2).unwrap();
        assert!(a.contains(1));
        assert!(!a.contains(9));
    }
}
