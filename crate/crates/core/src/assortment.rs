//! Assortment selection: choose the K skus an FDC should stock so that as
//! many historical orders as possible can be fulfilled entirely from local
//! stock. An order only counts when *every* sku in its basket is stocked,
//! which is what makes the problem combinatorial and frequency rankings
//! suboptimal.
//!
//! Selectors, from reference to practical:
//!
//! * [`solve_exact`]: subset enumeration, the optimality oracle on
//!   small catalogs.
//! * [`top_k_hist`] / [`ml_top_k`]: rank skus by historical or predicted
//!   order frequency and keep the top K. [`alpha_of`] computes the
//!   data-dependent guarantee for that family: the chosen set achieves at
//!   least alpha times the optimum, where alpha is the minimum
//!   single-item-order share among the top K skus.
//! * [`reverse_exclude`]: start from the full catalog and batch-remove the
//!   weakest skus, re-scoring after every removal so co-purchase effects
//!   propagate.
//! * [`hybrid_selection`]: blend a predicted list and a reverse-exclusion
//!   list through a mixing ratio, tuned on training data by
//!   [`tune_hybrid_ratio`].

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{Assortment, OrderBook, SkuId};

/// Catalog-size ceiling for [`solve_exact`]; enumeration beyond this is
/// pointless when the heuristics exist.
pub const EXACT_GUARD: usize = 22;

/// Skus with scores, sorted by descending score with ascending-id
/// tie-breaking. Ids are unique.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedList {
    entries: Vec<(SkuId, f64)>,
}

impl RankedList {
    pub fn from_scores(scores: impl IntoIterator<Item = (SkuId, f64)>) -> Result<Self> {
        let mut entries: Vec<(SkuId, f64)> = scores.into_iter().collect();
        for (sku, score) in &entries {
            if !score.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "score for sku {sku} is not finite"
                )));
            }
        }
        entries.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .expect("scores are finite")
                .then(a.0.cmp(&b.0))
        });
        for pair in entries.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(Error::InvalidInput(format!(
                    "duplicate sku {} in ranked list",
                    pair[0].0
                )));
            }
        }
        Ok(RankedList { entries })
    }

    pub fn entries(&self) -> &[(SkuId, f64)] {
        &self.entries
    }

    pub fn score(&self, sku: SkuId) -> Option<f64> {
        self.entries
            .iter()
            .find(|(id, _)| *id == sku)
            .map(|(_, s)| *s)
    }

    pub fn top(&self, k: usize) -> impl Iterator<Item = SkuId> + '_ {
        self.entries.iter().take(k).map(|(id, _)| *id)
    }
}

/// Total orders containing each sku: f_i = sum of counts over order types
/// that include i. Every catalog sku gets an entry, zeros included.
pub fn order_frequencies(book: &OrderBook) -> BTreeMap<SkuId, u64> {
    let mut freq: BTreeMap<SkuId, u64> = book.sku_ids().map(|id| (id, 0)).collect();
    for order in book.orders() {
        for sku in order.skus() {
            *freq.get_mut(sku).expect("order skus are in the catalog") += order.count;
        }
    }
    freq
}

/// Orders fully covered by the assortment: the count of satisfied orders
/// and the satisfied share. An empty book has rate 1.
pub fn eval_fulfillment(assortment: &Assortment, book: &OrderBook) -> (u64, f64) {
    let selected: HashSet<SkuId> = assortment.selected().iter().copied().collect();
    let mut satisfied: u64 = 0;
    let mut total: u64 = 0;
    for order in book.orders() {
        total += order.count;
        if order.skus().iter().all(|s| selected.contains(s)) {
            satisfied += order.count;
        }
    }
    let rate = if total == 0 {
        1.0
    } else {
        satisfied as f64 / total as f64
    };
    (satisfied, rate)
}

/// Exact optimum by enumerating every sku subset of size min(K, catalog),
/// in lexicographic order so ties resolve to the lexicographically smallest
/// selected set. Guarded by catalog size; see [`solve_exact_with_guard`] to
/// raise the ceiling deliberately.
pub fn solve_exact(book: &OrderBook, k: usize) -> Result<(Assortment, u64)> {
    solve_exact_with_guard(book, k, EXACT_GUARD)
}

pub fn solve_exact_with_guard(
    book: &OrderBook,
    k: usize,
    guard: usize,
) -> Result<(Assortment, u64)> {
    let ids: Vec<SkuId> = book.sku_ids().collect();
    let n = ids.len();
    if n > guard {
        return Err(Error::GuardExceeded {
            guard: format!("exact-enumeration catalog size ({guard})"),
            detail: format!("catalog has {n} skus; use the ranking heuristics instead"),
        });
    }
    let size = k.min(n);
    let idx_of: BTreeMap<SkuId, usize> = ids.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let orders: Vec<(u32, u64)> = book
        .orders()
        .iter()
        .map(|o| {
            let mask = o
                .skus()
                .iter()
                .fold(0u32, |m, s| m | (1 << idx_of[s]));
            (mask, o.count)
        })
        .collect();

    let value_of = |mask: u32| -> u64 {
        orders
            .iter()
            .filter(|(om, _)| om & !mask == 0)
            .map(|(_, c)| c)
            .sum()
    };

    // Lexicographic walk over index combinations of exactly `size` elements.
    let mut combo: Vec<usize> = (0..size).collect();
    let mut best_mask = combo.iter().fold(0u32, |m, &i| m | (1 << i));
    let mut best_value = value_of(best_mask);
    loop {
        // Advance to the next combination.
        let mut pos = size;
        while pos > 0 {
            pos -= 1;
            if combo[pos] != pos + n - size {
                combo[pos] += 1;
                for later in pos + 1..size {
                    combo[later] = combo[later - 1] + 1;
                }
                break;
            }
            if pos == 0 {
                let selected: BTreeSet<SkuId> = best_mask_ids(&ids, best_mask);
                return Ok((Assortment::new(selected, k)?, best_value));
            }
        }
        if size == 0 {
            let selected: BTreeSet<SkuId> = best_mask_ids(&ids, best_mask);
            return Ok((Assortment::new(selected, k)?, best_value));
        }
        let mask = combo.iter().fold(0u32, |m, &i| m | (1 << i));
        let value = value_of(mask);
        if value > best_value {
            best_value = value;
            best_mask = mask;
        }
    }
}

fn best_mask_ids(ids: &[SkuId], mask: u32) -> BTreeSet<SkuId> {
    ids.iter()
        .enumerate()
        .filter(|(i, _)| mask & (1 << i) != 0)
        .map(|(_, &s)| s)
        .collect()
}

fn top_k_by_score<S: Copy + PartialOrd>(
    scores: impl IntoIterator<Item = (SkuId, S)>,
    k: usize,
) -> BTreeSet<SkuId> {
    let mut ranked: Vec<(SkuId, S)> = scores.into_iter().collect();
    ranked.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .expect("scores are comparable")
            .then(a.0.cmp(&b.0))
    });
    ranked.into_iter().take(k).map(|(id, _)| id).collect()
}

/// Keep the K skus with the highest historical order frequency
/// (ties: ascending id).
pub fn top_k_hist(book: &OrderBook, k: usize) -> Assortment {
    let selected = top_k_by_score(order_frequencies(book), k);
    Assortment::new(selected, k).expect("top-k respects the cap")
}

/// Historical frequencies as a ranked list, for hybrid blending.
pub fn ranked_by_frequency(book: &OrderBook) -> RankedList {
    RankedList::from_scores(
        order_frequencies(book)
            .into_iter()
            .map(|(id, f)| (id, f as f64)),
    )
    .expect("frequencies are finite and ids unique")
}

/// Keep the K skus with the highest predicted order frequency
/// (ties: ascending id). Predictions must be finite.
pub fn ml_top_k(predicted: &BTreeMap<SkuId, f64>, k: usize) -> Result<Assortment> {
    if let Some((sku, score)) = predicted.iter().find(|(_, s)| !s.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "predicted frequency for sku {sku} is {score}"
        )));
    }
    let selected = top_k_by_score(predicted.iter().map(|(&id, &s)| (id, s)), k);
    Ok(Assortment::new(selected, k).expect("top-k respects the cap"))
}

/// Worst-case guarantee of frequency-ranked selection on this book: among
/// the top-K skus by order frequency, the minimum share of their orders
/// that are single-item. Frequency ranking achieves at least
/// `alpha_of(book, k) * optimum`, because single-item orders are always
/// satisfied by stocking the sku alone. Skus with zero frequency contribute
/// a ratio of 1. K larger than the catalog saturates to the full catalog.
pub fn alpha_of(book: &OrderBook, k: usize) -> f64 {
    let freq = order_frequencies(book);
    let top = top_k_by_score(freq.iter().map(|(&id, &f)| (id, f)), k);
    let mut singleton: BTreeMap<SkuId, u64> = BTreeMap::new();
    for order in book.orders() {
        if let [only] = order.skus() {
            *singleton.entry(*only).or_insert(0) += order.count;
        }
    }
    top.iter()
        .map(|sku| {
            let f = freq[sku];
            if f == 0 {
                1.0
            } else {
                singleton.get(sku).copied().unwrap_or(0) as f64 / f as f64
            }
        })
        .fold(1.0, f64::min)
}

/// How many skus to drop per round, given the current number of survivors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BatchSchedule {
    /// Remove max(1, (survivors - k) / divisor) per round, so early rounds
    /// cut aggressively and the endgame removes one at a time.
    Adaptive { divisor: usize },
    Fixed(usize),
}

impl Default for BatchSchedule {
    fn default() -> Self {
        BatchSchedule::Adaptive { divisor: 10 }
    }
}

impl BatchSchedule {
    pub fn validate(&self) -> Result<()> {
        match self {
            BatchSchedule::Adaptive { divisor: 0 } => Err(Error::InvalidConfig(
                "adaptive batch divisor must be positive".into(),
            )),
            BatchSchedule::Fixed(0) => Err(Error::InvalidConfig(
                "fixed batch size must be positive".into(),
            )),
            _ => Ok(()),
        }
    }

    pub fn batch_size(&self, survivors: usize, k: usize) -> usize {
        let excess = survivors.saturating_sub(k);
        let raw = match self {
            BatchSchedule::Adaptive { divisor } => (excess / divisor).max(1),
            BatchSchedule::Fixed(n) => *n,
        };
        raw.min(excess)
    }
}

#[derive(Debug, Clone)]
pub struct ReverseExcludeOutcome {
    pub assortment: Assortment,
    /// Survivors scored by their order frequency over the orders that were
    /// never zeroed, i.e. the algorithm's final view of each kept sku.
    pub ranks: RankedList,
    /// Indices into `book.orders()` of the order types never zeroed. Every
    /// one of them is fully covered by the assortment.
    pub surviving_orders: Vec<usize>,
}

/// Reverse exclusion: start with the whole catalog and repeatedly remove
/// the batch of lowest-frequency survivors (ties: ascending id), zeroing
/// every order that contained a removed sku so the remaining frequencies
/// reflect only still-satisfiable orders. Stops when exactly K survive.
pub fn reverse_exclude(
    book: &OrderBook,
    k: usize,
    schedule: BatchSchedule,
) -> Result<ReverseExcludeOutcome> {
    schedule.validate()?;
    let ids: Vec<SkuId> = book.sku_ids().collect();
    let idx_of: BTreeMap<SkuId, usize> = ids.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let orders: Vec<(Vec<usize>, u64)> = book
        .orders()
        .iter()
        .map(|o| (o.skus().iter().map(|s| idx_of[s]).collect(), o.count))
        .collect();
    let mut containing: Vec<Vec<usize>> = vec![Vec::new(); ids.len()];
    for (oi, (members, _)) in orders.iter().enumerate() {
        for &m in members {
            containing[m].push(oi);
        }
    }

    let mut freq: Vec<u64> = vec![0; ids.len()];
    for (members, count) in &orders {
        for &m in members {
            freq[m] += count;
        }
    }
    let mut surviving = vec![true; ids.len()];
    let mut alive = vec![true; orders.len()];
    let mut survivor_count = ids.len();

    while survivor_count > k {
        let n = schedule.batch_size(survivor_count, k);
        let mut candidates: Vec<(u64, usize)> = surviving
            .iter()
            .enumerate()
            .filter(|(_, &s)| s)
            .map(|(i, _)| (freq[i], i))
            .collect();
        candidates.select_nth_unstable(n - 1);
        let batch: Vec<usize> = candidates[..n].iter().map(|&(_, i)| i).collect();
        for &i in &batch {
            surviving[i] = false;
        }
        survivor_count -= n;
        for &i in &batch {
            for &oi in &containing[i] {
                if !alive[oi] {
                    continue;
                }
                alive[oi] = false;
                let (members, count) = &orders[oi];
                for &m in members {
                    if surviving[m] {
                        freq[m] -= count;
                    }
                }
            }
        }
    }

    let selected: BTreeSet<SkuId> = surviving
        .iter()
        .enumerate()
        .filter(|(_, &s)| s)
        .map(|(i, _)| ids[i])
        .collect();
    let ranks = RankedList::from_scores(
        selected.iter().map(|&id| (id, freq[idx_of[&id]] as f64)),
    )?;
    let surviving_orders = alive
        .iter()
        .enumerate()
        .filter(|(_, &a)| a)
        .map(|(i, _)| i)
        .collect();
    Ok(ReverseExcludeOutcome {
        assortment: Assortment::new(selected, k)?,
        ranks,
        surviving_orders,
    })
}

/// Blend two same-capacity assortments: keep their intersection, then take
/// `ceil((k - |I|) * ratio)` skus from the first list's surplus (by its
/// ranking) and fill the remainder from the second's. `ratio = 1`
/// reproduces the first assortment, `ratio = 0` the second.
pub fn hybrid_selection(
    first: &Assortment,
    second: &Assortment,
    ranks_first: &RankedList,
    ranks_second: &RankedList,
    ratio: f64,
    k: usize,
) -> Result<Assortment> {
    if !(0.0..=1.0).contains(&ratio) {
        return Err(Error::InvalidInput(format!("ratio {ratio} outside [0, 1]")));
    }
    if first.len() != k || second.len() != k {
        return Err(Error::InvalidInput(format!(
            "hybrid inputs must both hold exactly {k} skus, got {} and {}",
            first.len(),
            second.len()
        )));
    }
    let intersection: BTreeSet<SkuId> = first
        .selected()
        .intersection(second.selected())
        .copied()
        .collect();
    if intersection.len() == k {
        return Assortment::new(intersection, k);
    }

    let surplus = |a: &Assortment, ranks: &RankedList| -> Result<Vec<SkuId>> {
        let mut out: Vec<(SkuId, f64)> = Vec::new();
        for &sku in a.selected().difference(&intersection) {
            let score = ranks.score(sku).ok_or_else(|| {
                Error::InvalidInput(format!("rank list missing sku {sku}"))
            })?;
            out.push((sku, score));
        }
        out.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .expect("scores are finite")
                .then(a.0.cmp(&b.0))
        });
        Ok(out.into_iter().map(|(id, _)| id).collect())
    };
    let d_first = surplus(first, ranks_first)?;
    let d_second = surplus(second, ranks_second)?;

    let open = k - intersection.len();
    // Guard the ceiling against float noise like 50 * 0.38 = 19.000...004.
    let quota = ((open as f64 * ratio - 1e-9).ceil().max(0.0) as usize).min(d_first.len());
    let mut selected = intersection;
    selected.extend(d_first.iter().take(quota));
    selected.extend(d_second.iter().take(open - quota));
    Assortment::new(selected, k)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioSweep {
    pub best_ratio: f64,
    pub best_rate: f64,
    /// (ratio, training fulfillment rate) per grid point, ascending ratio.
    pub sweep: Vec<(f64, f64)>,
}

/// Evaluate the hybrid on the training book across a ratio grid and pick
/// the best ratio (ties: smallest). The grid must include both endpoints so
/// the tuned blend never scores below either input list on training data.
pub fn tune_hybrid_ratio(
    train: &OrderBook,
    first: &Assortment,
    second: &Assortment,
    ranks_first: &RankedList,
    ranks_second: &RankedList,
    grid: &[f64],
) -> Result<RatioSweep> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("empty ratio grid".into()));
    }
    let mut grid: Vec<f64> = grid.to_vec();
    for &g in &grid {
        if !(0.0..=1.0).contains(&g) {
            return Err(Error::InvalidInput(format!(
                "ratio grid value {g} outside [0, 1]"
            )));
        }
    }
    grid.sort_by(|a, b| a.partial_cmp(b).expect("grid values are finite"));
    grid.dedup();
    if grid.first() != Some(&0.0) || grid.last() != Some(&1.0) {
        return Err(Error::InvalidInput(
            "ratio grid must include the endpoints 0 and 1".into(),
        ));
    }
    let mut sweep = Vec::with_capacity(grid.len());
    let mut best: Option<(f64, f64)> = None;
    for &ratio in &grid {
        let blend = hybrid_selection(first, second, ranks_first, ranks_second, ratio, first.len())?;
        let (_, rate) = eval_fulfillment(&blend, train);
        sweep.push((ratio, rate));
        if best.map(|(_, r)| rate > r).unwrap_or(true) {
            best = Some((ratio, rate));
        }
    }
    let (best_ratio, best_rate) = best.expect("grid is non-empty");
    Ok(RatioSweep {
        best_ratio,
        best_rate,
        sweep,
    })
}

/// Smallest K whose top-K-by-frequency assortment reaches the target
/// fulfillment rate on this book. Top-K sets are nested in K, so the rate
/// is monotone and the full catalog always reaches 1.
pub fn smallest_k_for_coverage(book: &OrderBook, target: f64) -> Result<usize> {
    if !(0.0..=1.0).contains(&target) {
        return Err(Error::InvalidInput(format!(
            "coverage target {target} outside [0, 1]"
        )));
    }
    let n = book.sku_ids().count();
    let rate_at = |k: usize| eval_fulfillment(&top_k_hist(book, k), book).1;
    let (mut lo, mut hi) = (0usize, n);
    if rate_at(lo) >= target {
        return Ok(lo);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if rate_at(mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::OrderType;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn book(orders: &[(&[SkuId], u64)]) -> OrderBook {
        let ids: BTreeSet<SkuId> = orders.iter().flat_map(|(s, _)| s.iter().copied()).collect();
        let types = orders
            .iter()
            .map(|(skus, count)| OrderType::new(skus.iter().copied(), *count).unwrap())
            .collect();
        OrderBook::from_ids(ids, types).unwrap()
    }

    fn assort(ids: &[SkuId], cap: usize) -> Assortment {
        Assortment::new(ids.iter().copied().collect(), cap).unwrap()
    }

    /// Random small book for oracle comparisons: up to 10 skus, 25 order
    /// types, counts up to 20.
    fn random_book(rng: &mut ChaCha8Rng) -> (OrderBook, usize) {
        let n = rng.random_range(1..=10usize);
        let n_orders = rng.random_range(1..=25usize);
        let mut types = Vec::new();
        for _ in 0..n_orders {
            let size = rng.random_range(1..=4.min(n));
            let mut skus = BTreeSet::new();
            while skus.len() < size {
                skus.insert(rng.random_range(0..n) as SkuId);
            }
            types.push(OrderType::new(skus, rng.random_range(1..=20)).unwrap());
        }
        let book = OrderBook::from_ids(0..n as SkuId, types).unwrap();
        let k = rng.random_range(1..=5.min(n));
        (book, k)
    }

    #[test]
    fn eval_counts_only_fully_covered_orders() {
        let b = book(&[(&[1], 5), (&[2], 3), (&[1, 2], 2), (&[3], 4)]);
        let (sat, rate) = eval_fulfillment(&assort(&[1, 2], 2), &b);
        assert_eq!(sat, 10);
        assert!((rate - 10.0 / 14.0).abs() < 1e-12);
        let empty = OrderBook::from_ids(0..3, vec![]).unwrap();
        assert_eq!(eval_fulfillment(&assort(&[0], 1), &empty), (0, 1.0));
    }

    #[test]
    fn exact_finds_the_pairing() {
        let b = book(&[(&[1], 5), (&[2], 3), (&[1, 2], 2), (&[3], 4)]);
        let (best, value) = solve_exact(&b, 2).unwrap();
        assert_eq!(value, 10);
        assert_eq!(best.selected(), assort(&[1, 2], 2).selected());
    }

    #[test]
    fn exact_edge_caps() {
        let b = book(&[(&[1], 5), (&[2], 3)]);
        let (empty, v0) = solve_exact(&b, 0).unwrap();
        assert!(empty.is_empty());
        assert_eq!(v0, 0);
        let (full, v) = solve_exact(&b, 2).unwrap();
        assert_eq!(full.len(), 2);
        assert_eq!(v, b.total_orders());
    }

    #[test]
    fn exact_guard_advises_heuristics() {
        let ids: Vec<SkuId> = (0..23).collect();
        let b = OrderBook::from_ids(ids, vec![OrderType::new([0], 1).unwrap()]).unwrap();
        match solve_exact(&b, 3) {
            Err(Error::GuardExceeded { detail, .. }) => {
                assert!(detail.contains("heuristics"))
            }
            other => panic!("expected guard error, got {other:?}"),
        }
    }

    #[test]
    fn exact_breaks_ties_lexicographically() {
        // {0} and {1} both score 5; K = 1 must pick sku 0.
        let b = book(&[(&[0], 5), (&[1], 5)]);
        let (best, value) = solve_exact(&b, 1).unwrap();
        assert_eq!(value, 5);
        assert!(best.contains(0));
    }

    #[test]
    fn top_k_ranks_by_frequency_with_id_ties() {
        let b = book(&[(&[1], 4), (&[2], 3), (&[1, 2], 2)]);
        let top1 = top_k_hist(&b, 1);
        assert!(top1.contains(1));
        // Frequencies tie at 5 and 5 when counts shift; lower id wins.
        let tied = book(&[(&[1], 5), (&[2], 5)]);
        assert!(top_k_hist(&tied, 1).contains(1));
        // K beyond the catalog keeps everything.
        assert_eq!(top_k_hist(&b, 10).len(), 2);
    }

    #[test]
    fn ml_top_k_rejects_non_finite_predictions() {
        let mut pred = BTreeMap::new();
        pred.insert(1 as SkuId, f64::NAN);
        assert!(ml_top_k(&pred, 1).is_err());
        pred.insert(1, 3.0);
        pred.insert(2, 5.0);
        let picked = ml_top_k(&pred, 1).unwrap();
        assert!(picked.contains(2));
    }

    #[test]
    fn alpha_detects_bundle_heavy_top_skus() {
        // f: A=10, B=9, C=16, D=8, E=8; top-2 = {C, A}; C has no singleton
        // orders, so the guarantee collapses to zero.
        let b = book(&[(&[1], 10), (&[2], 9), (&[3, 4], 8), (&[3, 5], 8)]);
        assert_eq!(alpha_of(&b, 2), 0.0);
        let singles = book(&[(&[1], 3), (&[2], 7)]);
        assert_eq!(alpha_of(&singles, 2), 1.0);
    }

    #[test]
    fn frequency_pick_respects_alpha_bound_on_random_books() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..200 {
            let (b, k) = random_book(&mut rng);
            let freq: BTreeMap<SkuId, f64> = order_frequencies(&b)
                .into_iter()
                .map(|(id, f)| (id, f as f64))
                .collect();
            let picked = ml_top_k(&freq, k).unwrap();
            let (value, _) = eval_fulfillment(&picked, &b);
            let (_, opt_value) = solve_exact(&b, k).unwrap();
            let bound = alpha_of(&b, k) * opt_value as f64;
            assert!(
                value as f64 >= bound - 1e-9,
                "value {value} below alpha bound {bound}"
            );
        }
    }

    #[test]
    fn reverse_exclude_matches_worked_example() {
        let b = book(&[(&[1], 5), (&[2], 3), (&[1, 2], 2), (&[3], 4)]);
        let out = reverse_exclude(&b, 2, BatchSchedule::default()).unwrap();
        assert_eq!(out.assortment.selected(), assort(&[1, 2], 2).selected());
        // Orders {1}, {2}, {1,2} were never zeroed.
        assert_eq!(out.surviving_orders.len(), 3);
        let (value, _) = eval_fulfillment(&out.assortment, &b);
        assert_eq!(value, 10);
    }

    #[test]
    fn reverse_exclude_keeps_full_catalog_when_k_large() {
        let b = book(&[(&[1], 5), (&[2], 3)]);
        let out = reverse_exclude(&b, 2, BatchSchedule::default()).unwrap();
        assert_eq!(out.assortment.len(), 2);
        let bigger = reverse_exclude(&b, 9, BatchSchedule::default()).unwrap();
        assert_eq!(bigger.assortment.len(), 2);
    }

    #[test]
    fn batch_schedule_shrinks_toward_endgame() {
        let s = BatchSchedule::default();
        assert_eq!(s.batch_size(1000, 100), 90);
        assert_eq!(s.batch_size(105, 100), 1);
        assert_eq!(s.batch_size(101, 100), 1);
        assert_eq!(BatchSchedule::Fixed(7).batch_size(103, 100), 3);
        assert!(BatchSchedule::Fixed(0).validate().is_err());
    }

    #[test]
    fn reverse_exclude_never_zeroed_orders_are_covered() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..200 {
            let (b, k) = random_book(&mut rng);
            let schedule = if rng.random_bool(0.5) {
                BatchSchedule::default()
            } else {
                BatchSchedule::Fixed(rng.random_range(1..=3))
            };
            let out = reverse_exclude(&b, k, schedule).unwrap();
            assert_eq!(out.assortment.len(), k.min(b.sku_ids().count()));
            for &oi in &out.surviving_orders {
                assert!(
                    b.orders()[oi].covered_by(out.assortment.selected()),
                    "surviving order {oi} not covered"
                );
            }
        }
    }

    #[test]
    fn hybrid_endpoints_reproduce_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        for _ in 0..100 {
            let n = rng.random_range(4..30usize);
            let k = rng.random_range(1..=n / 2);
            let mut ids: Vec<SkuId> = (0..n as SkuId).collect();
            ids.shuffle(&mut rng);
            let first = assort(&ids[..k], k);
            ids.shuffle(&mut rng);
            let second = assort(&ids[..k], k);
            let ranks: Vec<(SkuId, f64)> = (0..n as SkuId)
                .map(|id| (id, rng.random_range(0.0..50.0)))
                .collect();
            let rf = RankedList::from_scores(ranks.clone()).unwrap();
            let rs = RankedList::from_scores(ranks).unwrap();
            let at_one = hybrid_selection(&first, &second, &rf, &rs, 1.0, k).unwrap();
            assert_eq!(at_one.selected(), first.selected());
            let at_zero = hybrid_selection(&first, &second, &rf, &rs, 0.0, k).unwrap();
            assert_eq!(at_zero.selected(), second.selected());
            let mid = hybrid_selection(&first, &second, &rf, &rs, 0.4, k).unwrap();
            assert_eq!(mid.len(), k);
        }
    }

    #[test]
    fn hybrid_quota_survives_float_noise() {
        // 50 open slots at ratio 0.38: the real product is exactly 19, but
        // the f64 product rounds just above it.
        let first_ids: Vec<SkuId> = (0..50).collect();
        let second_ids: Vec<SkuId> = (50..100).collect();
        let first = assort(&first_ids, 50);
        let second = assort(&second_ids, 50);
        let ranks: Vec<(SkuId, f64)> = (0..100).map(|id| (id as SkuId, 100.0 - id as f64)).collect();
        let rf = RankedList::from_scores(ranks.clone()).unwrap();
        let rs = RankedList::from_scores(ranks).unwrap();
        let blend = hybrid_selection(&first, &second, &rf, &rs, 0.38, 50).unwrap();
        let from_first = blend.selected().iter().filter(|s| **s < 50).count();
        assert_eq!(from_first, 19);
        assert_eq!(blend.len(), 50);
    }

    #[test]
    fn hybrid_requires_ranks_for_surplus_skus() {
        let first = assort(&[1, 2], 2);
        let second = assort(&[3, 4], 2);
        let rf = RankedList::from_scores([(1, 2.0), (2, 1.0)]).unwrap();
        let rs = RankedList::from_scores([(3, 2.0)]).unwrap();
        let err = hybrid_selection(&first, &second, &rf, &rs, 0.5, 2);
        assert!(matches!(err, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn identical_inputs_short_circuit() {
        let a = assort(&[1, 2, 3], 3);
        let empty_ranks = RankedList::from_scores([]).unwrap();
        let blend = hybrid_selection(&a, &a, &empty_ranks, &empty_ranks, 0.5, 3).unwrap();
        assert_eq!(blend.selected(), a.selected());
    }

    #[test]
    fn tune_requires_endpoints_and_beats_them() {
        let b = book(&[(&[1], 5), (&[2], 3), (&[1, 2], 2), (&[3], 4), (&[4], 1)]);
        let first = assort(&[1, 3], 2);
        let second = assort(&[1, 2], 2);
        let ranks = ranked_by_frequency(&b);
        assert!(tune_hybrid_ratio(&b, &first, &second, &ranks, &ranks, &[0.0, 0.5]).is_err());
        let sweep =
            tune_hybrid_ratio(&b, &first, &second, &ranks, &ranks, &[0.0, 0.5, 1.0]).unwrap();
        assert_eq!(sweep.sweep.len(), 3);
        let end_rates = [sweep.sweep[0].1, sweep.sweep[2].1];
        assert!(sweep.best_rate >= end_rates[0].max(end_rates[1]));
    }

    #[test]
    fn coverage_search_finds_smallest_k() {
        let b = book(&[(&[1], 4), (&[2], 3), (&[1, 2], 2)]);
        // K=1 keeps sku 1: rate 4/9. K=2 reaches 1.
        assert_eq!(smallest_k_for_coverage(&b, 0.4).unwrap(), 1);
        assert_eq!(smallest_k_for_coverage(&b, 0.5).unwrap(), 2);
        assert_eq!(smallest_k_for_coverage(&b, 0.0).unwrap(), 0);
        assert!(smallest_k_for_coverage(&b, 1.5).is_err());
    }
}
