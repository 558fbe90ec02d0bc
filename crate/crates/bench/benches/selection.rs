//! Assortment selection throughput on a clustered order book.

use std::collections::BTreeMap;

use criterion::{criterion_group, criterion_main, Criterion};
use echelon_core::assortment::{
    eval_fulfillment, ml_top_k, order_frequencies, ranked_by_frequency, reverse_exclude,
    solve_exact, top_k_hist, tune_hybrid_ratio, BatchSchedule,
};
use echelon_core::datagen::{gen_order_history, OrderGenConfig};
use echelon_core::{OrderBook, SkuId};
use std::hint::black_box;

fn clustered_book(n_skus: usize, days: usize) -> OrderBook {
    let cfg = OrderGenConfig {
        n_skus,
        n_orders: 400,
        zipf_exponent: 0.9,
        order_size_dist: vec![0.4, 0.35, 0.15, 0.1],
        n_clusters: 12,
        intra_cluster_prob: 0.85,
        seed: 9,
    };
    OrderBook::merge(&gen_order_history(&cfg, days).unwrap()).unwrap()
}

fn selection_benches(c: &mut Criterion) {
    let book = clustered_book(300, 10);
    let k = 60;

    c.bench_function("top_k_hist/300skus_4k_orders", |b| {
        b.iter(|| top_k_hist(black_box(&book), black_box(k)))
    });

    let predicted: BTreeMap<SkuId, f64> = order_frequencies(&book)
        .into_iter()
        .map(|(id, f)| (id, f as f64))
        .collect();
    c.bench_function("ml_top_k/300skus", |b| {
        b.iter(|| ml_top_k(black_box(&predicted), black_box(k)).unwrap())
    });

    c.bench_function("reverse_exclude/300skus_4k_orders", |b| {
        b.iter(|| {
            reverse_exclude(
                black_box(&book),
                black_box(k),
                BatchSchedule::Adaptive { divisor: 10 },
            )
            .unwrap()
        })
    });

    let topk = top_k_hist(&book, k);
    let freq_ranks = ranked_by_frequency(&book);
    let rev = reverse_exclude(&book, k, BatchSchedule::Adaptive { divisor: 10 }).unwrap();
    c.bench_function("tune_hybrid_ratio/11_points", |b| {
        let grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        b.iter(|| {
            tune_hybrid_ratio(
                black_box(&book),
                &topk,
                &rev.assortment,
                &freq_ranks,
                &rev.ranks,
                &grid,
            )
            .unwrap()
        })
    });

    c.bench_function("eval_fulfillment/4k_orders", |b| {
        b.iter(|| eval_fulfillment(black_box(&topk), black_box(&book)))
    });

    let small = clustered_book(18, 2);
    c.bench_function("solve_exact/18skus_k5", |b| {
        b.iter(|| solve_exact(black_box(&small), black_box(5)).unwrap())
    });
}

criterion_group!(benches, selection_benches);
criterion_main!(benches);
