//! Per-series demand forecasting: additive Holt-Winters (level, trend,
//! seasonal indices) with multiplicative promotion handling.
//!
//! Promotion days distort level and season estimates, so the fit first
//! estimates a promotion multiplier (mean on promo days over mean on
//! regular days), deflates the promo observations by it, and fits the
//! smoother on the deflated series. Forecasts re-inflate any future period
//! flagged as a promotion.
//!
//! Components are initialized from the first two seasonal cycles (cycle
//! means give level and trend, per-index deviations give the seasonal
//! profile), which makes the fit exact on constant and trend-only series.
//! At least two full cycles of history are required.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::SkuId;

/// Observed history of one series. `promo_flags[t]` marks periods whose
/// value was inflated by a promotion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesHistory {
    values: Vec<f64>,
    promo_flags: Vec<bool>,
}

impl SeriesHistory {
    pub fn new(values: Vec<f64>, promo_flags: Vec<bool>) -> Result<Self> {
        if values.len() != promo_flags.len() {
            return Err(Error::InvalidInput(format!(
                "history has {} values but {} promo flags",
                values.len(),
                promo_flags.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidInput(format!(
                "history values must be finite and non-negative, got {bad}"
            )));
        }
        Ok(SeriesHistory { values, promo_flags })
    }

    /// History without promotions.
    pub fn plain(values: Vec<f64>) -> Result<Self> {
        let flags = vec![false; values.len()];
        SeriesHistory::new(values, flags)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn promo_flags(&self) -> &[bool] {
        &self.promo_flags
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Smoothing weights for level, trend, and season updates, each in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothingParams {
    pub level: f64,
    pub trend: f64,
    pub season: f64,
}

impl Default for SmoothingParams {
    fn default() -> Self {
        SmoothingParams {
            level: 0.2,
            trend: 0.05,
            season: 0.1,
        }
    }
}

impl SmoothingParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("level", self.level),
            ("trend", self.trend),
            ("season", self.season),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidConfig(format!(
                    "{name} smoothing weight {v} outside [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

/// Fitted state of one series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastModel {
    pub level: f64,
    pub trend: f64,
    /// Seasonal offsets; index `t % season.len()` applies to the 0-based
    /// absolute period `t`.
    pub season: Vec<f64>,
    pub promo_multiplier: f64,
    /// Standard deviation of one-step-ahead fit errors on the deflated
    /// series.
    pub residual_sd: f64,
    /// Set when promo days exist but the regular-day mean is zero, leaving
    /// the multiplier at its fallback of 1.
    pub promo_fallback: bool,
    fitted_len: usize,
}

/// Point forecasts and their standard deviations per horizon step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastResult {
    pub point: Vec<f64>,
    pub sd: Vec<f64>,
}

impl ForecastResult {
    /// Sum of point forecasts over the first `w` steps.
    pub fn window_point(&self, w: usize) -> Result<f64> {
        if self.point.len() < w {
            return Err(Error::ShortHistory {
                got: self.point.len(),
                need: w,
            });
        }
        Ok(self.point[..w].iter().sum())
    }

    /// Standard deviation of the window sum, treating steps as independent.
    pub fn window_sd(&self, w: usize) -> Result<f64> {
        if self.sd.len() < w {
            return Err(Error::ShortHistory {
                got: self.sd.len(),
                need: w,
            });
        }
        Ok(self.sd[..w].iter().map(|s| s * s).sum::<f64>().sqrt())
    }
}

pub fn fit_forecaster(history: &SeriesHistory, season_period: usize) -> Result<ForecastModel> {
    fit_forecaster_with(history, season_period, SmoothingParams::default())
}

pub fn fit_forecaster_with(
    history: &SeriesHistory,
    season_period: usize,
    params: SmoothingParams,
) -> Result<ForecastModel> {
    if season_period == 0 {
        return Err(Error::InvalidConfig("season_period must be positive".into()));
    }
    params.validate()?;
    let m = season_period;
    let n = history.len();
    if n < 2 * m {
        return Err(Error::ShortHistory { got: n, need: 2 * m });
    }

    let (promo_multiplier, promo_fallback) = promo_multiplier(history);
    let x: Vec<f64> = history
        .values()
        .iter()
        .zip(history.promo_flags())
        .map(|(&v, &flag)| {
            if flag && promo_multiplier > 0.0 {
                v / promo_multiplier
            } else {
                v
            }
        })
        .collect();

    let c1 = x[..m].iter().sum::<f64>() / m as f64;
    let c2 = x[m..2 * m].iter().sum::<f64>() / m as f64;
    // Least-squares slope over the whole series. A two-cycle difference is
    // the textbook choice but far too noisy on short histories; the OLS
    // slope stays exact on trend-only data while damping spurious drift.
    let t_mean = (n as f64 - 1.0) / 2.0;
    let x_mean = x.iter().sum::<f64>() / n as f64;
    let mut cov = 0.0;
    let mut var_t = 0.0;
    for (t, &v) in x.iter().enumerate() {
        let dt = t as f64 - t_mean;
        cov += dt * (v - x_mean);
        var_t += dt * dt;
    }
    let trend0 = cov / var_t;
    // The first cycle's mean sits at the cycle center; shift the level back
    // to the virtual period -1 so the first update's one-step prediction
    // lines up.
    let mut level = c1 - (m as f64 + 1.0) / 2.0 * trend0;
    let mut trend = trend0;
    let mut season = vec![0.0; m];
    let center = (m as f64 - 1.0) / 2.0;
    for (j, s) in season.iter_mut().enumerate() {
        let d1 = x[j] - (c1 + (j as f64 - center) * trend0);
        let d2 = x[j + m] - (c2 + (j as f64 - center) * trend0);
        *s = (d1 + d2) / 2.0;
    }
    let season_mean = season.iter().sum::<f64>() / m as f64;
    for s in &mut season {
        *s -= season_mean;
    }

    let mut residuals = Vec::with_capacity(n);
    for (t, &value) in x.iter().enumerate() {
        let idx = t % m;
        residuals.push(value - (level + trend + season[idx]));
        let new_level = params.level * (value - season[idx]) + (1.0 - params.level) * (level + trend);
        let new_trend = params.trend * (new_level - level) + (1.0 - params.trend) * trend;
        season[idx] = params.season * (value - new_level) + (1.0 - params.season) * season[idx];
        level = new_level;
        trend = new_trend;
    }

    let mean = residuals.iter().sum::<f64>() / n as f64;
    let var = residuals.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (n - 1) as f64;

    Ok(ForecastModel {
        level,
        trend,
        season,
        promo_multiplier,
        residual_sd: var.sqrt(),
        promo_fallback,
        fitted_len: n,
    })
}

fn promo_multiplier(history: &SeriesHistory) -> (f64, bool) {
    let mut promo = (0.0, 0usize);
    let mut plain = (0.0, 0usize);
    for (&v, &flag) in history.values().iter().zip(history.promo_flags()) {
        let bucket = if flag { &mut promo } else { &mut plain };
        bucket.0 += v;
        bucket.1 += 1;
    }
    if promo.1 == 0 {
        return (1.0, false);
    }
    if plain.1 == 0 || plain.0 == 0.0 {
        // Nothing to normalize against; leave values untouched but flag it.
        return (1.0, true);
    }
    let plain_mean = plain.0 / plain.1 as f64;
    let promo_mean = promo.0 / promo.1 as f64;
    (promo_mean / plain_mean, false)
}

/// Forecast `horizon` steps ahead. `future_promo_flags` must supply one flag
/// per step; flagged steps are scaled by the model's promo multiplier.
/// Points are clipped at zero; `sd[h]` grows with the square root of the
/// step, anchored at the one-step residual deviation.
pub fn forecast(
    model: &ForecastModel,
    horizon: usize,
    future_promo_flags: &[bool],
) -> Result<ForecastResult> {
    if future_promo_flags.len() != horizon {
        return Err(Error::InvalidInput(format!(
            "horizon {horizon} but {} promo flags",
            future_promo_flags.len()
        )));
    }
    let m = model.season.len();
    let mut point = Vec::with_capacity(horizon);
    let mut sd = Vec::with_capacity(horizon);
    for h in 1..=horizon {
        let base = model.level
            + h as f64 * model.trend
            + model.season[(model.fitted_len + h - 1) % m];
        let scale = if future_promo_flags[h - 1] {
            model.promo_multiplier
        } else {
            1.0
        };
        point.push(base.max(0.0) * scale);
        sd.push(model.residual_sd * (h as f64).sqrt());
    }
    Ok(ForecastResult { point, sd })
}

/// Expected order count per sku over the next `horizon` periods, from daily
/// per-sku order-count series (no promotions assumed). Series that are all
/// zero forecast zero without fitting.
pub fn forecast_order_frequency(
    counts: &BTreeMap<SkuId, Vec<f64>>,
    season_period: usize,
    horizon: usize,
) -> Result<BTreeMap<SkuId, f64>> {
    let no_promo = vec![false; horizon];
    let mut out = BTreeMap::new();
    for (&sku, series) in counts {
        if series.iter().all(|&v| v == 0.0) {
            out.insert(sku, 0.0);
            continue;
        }
        let history = SeriesHistory::plain(series.clone())?;
        let model = fit_forecaster(&history, season_period)?;
        let result = forecast(&model, horizon, &no_promo)?;
        out.insert(sku, result.point.iter().sum());
    }
    Ok(out)
}
