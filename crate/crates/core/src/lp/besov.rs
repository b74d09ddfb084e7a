use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::filter::{lr_norm, weight_levels, DyadicFilterBank, LevelProfile};
use crate::error::{Error, Result};
use crate::series::{time_norm, TimeSeries};
use crate::spectral::Field;

/// Indices `(s, p, r)` of a Besov space. Infinite exponents are `f64::INFINITY`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesovParams {
    pub s: f64,
    pub p: f64,
    pub r: f64,
}

impl BesovParams {
    pub fn new(s: f64, p: f64, r: f64) -> Result<Self> {
        let b = Self { s, p, r };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.s.is_finite() {
            return Err(Error::InvalidParameter(format!("regularity must be finite, got {}", self.s)));
        }
        for (name, v) in [("p", self.p), ("r", self.r)] {
            if v.is_nan() || v < 1.0 {
                return Err(Error::InvalidParameter(format!("{name} must lie in [1, inf], got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelRow {
    pub level: i32,
    /// `||Delta_l u||_p`, or its time norm for Chemin-Lerner reports.
    pub lp_norm: f64,
    /// `2^{ls}` times the above.
    pub weighted: f64,
}

/// Levelwise breakdown of a Besov-type norm.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BesovReport {
    pub params: BesovParams,
    pub rows: Vec<LevelRow>,
    pub total: f64,
}

impl BesovReport {
    fn from_norms(params: BesovParams, norms: &[f64]) -> Self {
        let weighted = weight_levels(norms, params.s);
        let rows = norms
            .iter()
            .zip(&weighted)
            .enumerate()
            .map(|(i, (n, w))| LevelRow { level: i as i32 - 1, lp_norm: *n, weighted: *w })
            .collect();
        Self { params, rows, total: lr_norm(&weighted, params.r) }
    }

    /// One row per level, then a `total` footer.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("level,lp_norm,weighted\n");
        for row in &self.rows {
            let _ = writeln!(out, "{},{:.17e},{:.17e}", row.level, row.lp_norm, row.weighted);
        }
        let _ = writeln!(out, "total,,{:.17e}", self.total);
        out
    }
}

/// `||u||_{B^s_{p,r}} = || (2^{ls} ||Delta_l u||_p)_l ||_{l^r}`.
pub fn besov_norm(u: &Field, params: BesovParams, bank: &DyadicFilterBank) -> Result<BesovReport> {
    params.validate()?;
    if u.grid() != bank.grid() {
        return Err(Error::GridMismatch);
    }
    let profile = bank.level_norms(u, params.p);
    Ok(BesovReport::from_norms(params, &profile.norms))
}

/// Shorthand for the total of [`besov_norm`].
pub fn besov_value(u: &Field, params: BesovParams, bank: &DyadicFilterBank) -> Result<f64> {
    besov_norm(u, params, bank).map(|r| r.total)
}

/// Level profiles of every frame of a series.
pub fn series_profiles(series: &TimeSeries, p: f64, bank: &DyadicFilterBank) -> Result<Vec<LevelProfile>> {
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }
    Ok(series.frames.iter().map(|f| bank.level_norms(f, p)).collect())
}

/// Time norm of each level: `||Delta_l u||_{L^rho_T(L^p)}` by the trapezoid rule.
pub fn levelwise_time_norms(profiles: &[LevelProfile], dt: f64, rho: f64) -> Vec<f64> {
    let levels = profiles[0].norms.len();
    (0..levels)
        .map(|l| {
            let series: Vec<f64> = profiles.iter().map(|p| p.norms[l]).collect();
            time_norm(&series, dt, rho)
        })
        .collect()
}

/// Chemin-Lerner norm: the time norm is taken inside the level sum.
pub fn chemin_lerner_norm(
    series: &TimeSeries,
    rho: f64,
    params: BesovParams,
    bank: &DyadicFilterBank,
) -> Result<BesovReport> {
    params.validate()?;
    if rho.is_nan() || rho < 1.0 {
        return Err(Error::InvalidParameter(format!("time exponent must lie in [1, inf], got {rho}")));
    }
    let profiles = series_profiles(series, params.p, bank)?;
    let norms = levelwise_time_norms(&profiles, series.dt, rho);
    Ok(BesovReport::from_norms(params, &norms))
}

/// Classical `L^rho_T(B^s_{p,r})`: the time norm of the Besov norm.
pub fn time_besov_norm(series: &TimeSeries, rho: f64, params: BesovParams, bank: &DyadicFilterBank) -> Result<f64> {
    params.validate()?;
    let profiles = series_profiles(series, params.p, bank)?;
    let values: Vec<f64> = profiles.iter().map(|p| p.besov(params.s, params.r)).collect();
    Ok(time_norm(&values, series.dt, rho))
}

/// Result of a sum-space norm evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SumSpaceReport {
    pub value: f64,
    /// Value of the levelwise greedy split before capping.
    pub greedy: f64,
    pub norm_a: f64,
    pub norm_b: f64,
    /// `true` where a level went to the first space.
    pub to_a: Vec<bool>,
}

/// Upper bound for `inf_{u = u1 + u2} ||u1||_A + ||u2||_B` from a levelwise
/// split: each block goes to the space with the smaller weighted contribution
/// (ties go to `A`), and the result never exceeds either single-space norm.
pub fn sum_space_norm(u: &Field, a: BesovParams, b: BesovParams, bank: &DyadicFilterBank) -> Result<SumSpaceReport> {
    a.validate()?;
    b.validate()?;
    let pa = bank.level_norms(u, a.p);
    let pb = if b.p == a.p { pa.clone() } else { bank.level_norms(u, b.p) };
    Ok(sum_space_from_levels(&pa.weighted(a.s), a.r, &pb.weighted(b.s), b.r))
}

/// Greedy split from precomputed weighted level values.
pub fn sum_space_from_levels(wa: &[f64], ra: f64, wb: &[f64], rb: f64) -> SumSpaceReport {
    let to_a: Vec<bool> = wa.iter().zip(wb).map(|(x, y)| x <= y).collect();
    let part_a: Vec<f64> = wa.iter().zip(&to_a).map(|(x, &t)| if t { *x } else { 0.0 }).collect();
    let part_b: Vec<f64> = wb.iter().zip(&to_a).map(|(y, &t)| if t { 0.0 } else { *y }).collect();
    let greedy = lr_norm(&part_a, ra) + lr_norm(&part_b, rb);
    let norm_a = lr_norm(wa, ra);
    let norm_b = lr_norm(wb, rb);
    SumSpaceReport { value: greedy.min(norm_a).min(norm_b), greedy, norm_a, norm_b, to_a }
}
