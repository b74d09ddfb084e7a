//! Numerical checks of the basic Besov-space facts on concrete fields.

use serde::Serialize;

use super::besov::{chemin_lerner_norm, BesovParams};
use super::filter::{lr_norm, DyadicFilterBank};
use crate::error::{Error, Result};
use crate::report::{EstimateReport, Sample};
use crate::rng::Ensemble;
use crate::series::TimeSeries;
use crate::spectral::{gradient, Field, Grid};

/// Constant used for the logarithmic interpolation check at `eps = 1/2`.
///
/// Splitting the level sum at `N ~ log2(Y/X)/eps` bounds the left side by
/// `X (2 + 1/(1 - 2^-eps) + ln(Y/X)/(eps ln 2))`; against
/// `(1 + eps)/eps X (1 + ln(Y/X))` that ratio never exceeds 1.81 for
/// `eps = 1/2`.
pub const LOG_INTERPOLATION_CONSTANT: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BernsteinRow {
    pub level: i32,
    pub ratio: f64,
}

/// `||grad Delta_l u||_p / (2^l ||Delta_l u||_p)` per non-empty level `l >= 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BernsteinReport {
    pub rows: Vec<BernsteinRow>,
    pub lower: f64,
    pub upper: f64,
}

impl BernsteinReport {
    /// Every ratio inside `[lower, upper]` widened by the relative tolerance.
    pub fn within(&self, rel_tol: f64) -> bool {
        self.rows.iter().all(|r| r.ratio >= self.lower * (1.0 - rel_tol) && r.ratio <= self.upper * (1.0 + rel_tol))
    }
}

pub fn verify_bernstein(u: &Field, bank: &DyadicFilterBank, p: f64) -> Result<BernsteinReport> {
    if !u.is_scalar() {
        return Err(Error::ComponentMismatch { expected: 1, got: u.components() });
    }
    let blocks = bank.blocks(u);
    let scale = blocks.iter().fold(0.0f64, |m, b| m.max(b.lp_norm(p)));
    let mut rows = Vec::new();
    for (i, b) in blocks.iter().enumerate().skip(1) {
        let level = i as i32 - 1;
        let n = b.lp_norm(p);
        if n <= 1e-12 * scale {
            continue;
        }
        let g = gradient(b)?.lp_norm(p);
        rows.push(BernsteinRow { level, ratio: g / ((2f64).powi(level) * n) });
    }
    Ok(BernsteinReport { rows, lower: 1.0 / bank.alpha(), upper: 2.0 * bank.alpha() })
}

/// Ratios `||u||_{B^{s - N(1/p1 - 1/p2)}_{p2, r2}} / ||u||_{B^s_{p1, r1}}` over an ensemble.
pub fn verify_embedding(
    ensemble: &Ensemble,
    grid: &Grid,
    from: BesovParams,
    to_p: f64,
    to_r: f64,
) -> Result<EstimateReport> {
    from.validate()?;
    if to_p < from.p {
        return Err(Error::IndexConstraintViolated("p1 <= p2".into()));
    }
    if to_r < from.r {
        return Err(Error::IndexConstraintViolated("r1 <= r2".into()));
    }
    let bank = DyadicFilterBank::with_default_alpha(grid)?;
    let n = grid.dim() as f64;
    let to_s = from.s - n * (1.0 / from.p - 1.0 / to_p);
    let mut samples = Vec::with_capacity(ensemble.samples);
    let mut worst: (f64, Vec<f64>) = (-1.0, vec![]);
    for i in 0..ensemble.samples {
        let u = ensemble.field(grid, i, 0, 1);
        let rhs = bank.level_norms(&u, from.p).besov(from.s, from.r);
        let prof = bank.level_norms(&u, to_p);
        let lhs = prof.besov(to_s, to_r);
        let s = Sample::new(i, lhs, rhs);
        if s.ratio > worst.0 {
            worst = (s.ratio, prof.weighted(to_s));
        }
        samples.push(s);
    }
    Ok(EstimateReport::new("embedding", grid.n(), samples, worst.1))
}

/// Norm equivalence `||grad u||_{B^{s-1}} ~ ||u||_{B^s}` on mean-free fields.
///
/// Samples carry `lhs = ||grad u||_{B^{s-1}}`, `rhs = ||u||_{B^s}`; the fitted
/// two-sided constant is `max(max_ratio, 1 / min_ratio)`.
pub fn verify_norm_equivalence(ensemble: &Ensemble, grid: &Grid, params: BesovParams) -> Result<EstimateReport> {
    params.validate()?;
    let bank = DyadicFilterBank::with_default_alpha(grid)?;
    let mut samples = Vec::with_capacity(ensemble.samples);
    for i in 0..ensemble.samples {
        let u = ensemble.field(grid, i, 0, 1).mean_free();
        let rhs = bank.level_norms(&u, params.p).besov(params.s, params.r);
        let lhs = bank.level_norms(&gradient(&u)?, params.p).besov(params.s - 1.0, params.r);
        samples.push(Sample::new(i, lhs, rhs));
    }
    Ok(EstimateReport::new("norm-equivalence", grid.n(), samples, vec![]))
}

pub fn equivalence_constant(report: &EstimateReport) -> f64 {
    report.max_ratio.max(1.0 / report.min_ratio())
}

/// Logarithmic interpolation on time series:
/// `||u||_{Lt^rho(B^s_{p,1})} <= C (1+eps)/eps X (1 + ln(Y / X))` with
/// `X = ||u||_{Lt^rho(B^s_{p,inf})}`, `Y = ||u||_{Lt^rho(B^{s+eps}_{p,inf})}`.
///
/// The report's `rhs` omits `C`; compare `max_ratio` with
/// [`LOG_INTERPOLATION_CONSTANT`].
pub fn verify_log_interpolation(
    series: &[TimeSeries],
    s: f64,
    p: f64,
    rho: f64,
    eps: f64,
    bank: &DyadicFilterBank,
) -> Result<EstimateReport> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidParameter(format!("eps must lie in (0, 1], got {eps}")));
    }
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }
    let mut samples = Vec::with_capacity(series.len());
    let mut worst: (f64, Vec<f64>) = (-1.0, vec![]);
    for (i, ser) in series.iter().enumerate() {
        let lhs_rep = chemin_lerner_norm(ser, rho, BesovParams::new(s, p, 1.0)?, bank)?;
        let x = lr_norm(&lhs_rep.rows.iter().map(|r| r.weighted).collect::<Vec<_>>(), f64::INFINITY);
        let y = chemin_lerner_norm(ser, rho, BesovParams::new(s + eps, p, f64::INFINITY)?, bank)?.total;
        let rhs = if x > 0.0 { (1.0 + eps) / eps * x * (1.0 + (y / x).ln()) } else { 0.0 };
        let sample = Sample::new(i, lhs_rep.total, rhs);
        if sample.ratio > worst.0 {
            worst = (sample.ratio, lhs_rep.rows.iter().map(|r| r.weighted).collect());
        }
        samples.push(sample);
    }
    Ok(EstimateReport::new("log-interpolation", bank.grid().n(), samples, worst.1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bernstein_ratio_of_single_mode() {
        let g = Grid::periodic(2, 32).unwrap();
        let bank = DyadicFilterBank::with_default_alpha(&g).unwrap();
        let u = Field::from_fn(&g, 1, |x, _| (6.0 * x[0]).cos());
        let rep = verify_bernstein(&u, &bank, 2.0).unwrap();
        // |k| = 6 lives in levels 2 (ratio 6/4) and possibly 1 (6/2).
        assert!(!rep.rows.is_empty());
        for r in &rep.rows {
            assert!((r.ratio - 6.0 / (2f64).powi(r.level)).abs() < 1e-12);
        }
        assert!(rep.within(0.0));
    }

    #[test]
    fn embedding_rejects_reversed_exponents() {
        let g = Grid::periodic(2, 16).unwrap();
        let e = Ensemble::new(1, 2);
        let from = BesovParams::new(0.0, 4.0, 1.0).unwrap();
        let err = verify_embedding(&e, &g, from, 2.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::IndexConstraintViolated(ref m) if m.contains("p1 <= p2")));
    }
}
