use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{lr_norm, DyadicFilterBank};
use crate::report::{EstimateReport, Sample};
use crate::rng::Ensemble;
use crate::spectral::{advect, dealias, partial, Field, Grid};

fn check_level(bank: &DyadicFilterBank, q: i32) -> Result<()> {
    if !bank.levels().contains(&q) {
        return Err(Error::InvalidParameter(format!("level {q} outside -1..={}", bank.max_level())));
    }
    Ok(())
}

/// `[v . grad, Delta_q] a = v . grad(Delta_q a) - Delta_q(v . grad a)`, products dealiased.
pub fn transport_commutator(v: &Field, a: &Field, q: i32, bank: &DyadicFilterBank) -> Result<Field> {
    check_level(bank, q)?;
    let flux = dealias(&advect(v, a)?);
    let lhs = dealias(&advect(v, &bank.block(a, q))?);
    Ok(&lhs - &bank.block(&flux, q))
}

/// Transport commutator at every level of the bank.
pub fn transport_commutators(v: &Field, a: &Field, bank: &DyadicFilterBank) -> Result<Vec<Field>> {
    let flux = dealias(&advect(v, a)?);
    let flux_blocks = bank.blocks(&flux);
    bank.blocks(a).iter().zip(&flux_blocks).map(|(aq, fq)| Ok(&dealias(&advect(v, aq)?) - fq)).collect()
}

/// `R_q = Delta_q(a d_k w) - d_k(a Delta_q w)`, products dealiased.
pub fn lame_commutator(a: &Field, w: &Field, axis: usize, q: i32, bank: &DyadicFilterBank) -> Result<Field> {
    check_level(bank, q)?;
    check_axis(a, axis)?;
    let first = bank.block(&dealias(&(a * &partial(w, axis))), q);
    let second = partial(&dealias(&(a * &bank.block(w, q))), axis);
    Ok(&first - &second)
}

/// Lamé commutator at every level of the bank.
pub fn lame_commutators(a: &Field, w: &Field, axis: usize, bank: &DyadicFilterBank) -> Result<Vec<Field>> {
    check_axis(a, axis)?;
    let first = bank.blocks(&dealias(&(a * &partial(w, axis))));
    Ok(bank.blocks(w).iter().zip(&first).map(|(wq, fq)| fq - &partial(&dealias(&(a * wq)), axis)).collect())
}

fn check_axis(a: &Field, axis: usize) -> Result<()> {
    if axis >= a.grid().dim() {
        return Err(Error::InvalidParameter(format!("axis {axis} out of range")));
    }
    Ok(())
}

/// Jacobian `(d_j v_i)` stored as a `dim * dim`-component field.
pub fn jacobian(v: &Field) -> Field {
    let parts: Vec<Field> = (0..v.grid().dim())
        .flat_map(|j| {
            let d = partial(v, j);
            (0..v.components()).map(move |i| d.component_field(i))
        })
        .collect();
    Field::from_components(&parts).expect("same grid")
}

/// Commutator estimates verified on random ensembles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CommutatorEstimate {
    /// `sum_q 2^{q sigma} ||[v.grad, Delta_q] a||_{p1} <= C ||grad v||_{B^{N/p}_{p,1}} ||a||_{B^sigma_{p1,1}}`,
    /// `p1 <= p`, `-min(N/p, N/p1) < sigma <= N/p + 1`.
    Transport { p: f64, p1: f64, sigma: f64 },
    /// Endpoint `sigma = -min(N/p, N/p1)`:
    /// `sup_q 2^{-q N/p} ||[v.grad, Delta_q] a||_{p1} <= C ||grad v||_{B^{N/p}_{p,1}} ||a||_{B^{-N/p}_{p,inf}}`.
    TransportEndpoint { p: f64, p1: f64 },
    /// `sum_q 2^{q sigma} ||[v.grad, Delta_q] v||_p <= C (||grad v||_inf ||v||_{B^sigma_{p1,1}}
    /// + ||grad v||_{p2} ||grad v||_{B^{sigma-1}_{p1,1}})`, `1/p2 = 1/p1 - 1/p`, `sigma > 0`.
    SelfTransport { p: f64, p1: f64, sigma: f64 },
    /// `sum_q 2^{q sigma} ||R_q||_{p1} <= C ||a||_{B^{N/p+alpha}_{p,1}} ||w||_{B^{sigma+1-alpha}_{p1,1}}`,
    /// `alpha in (1 - N/p, 1]`, `-N/p < sigma <= alpha + N/p`.
    Lame { p: f64, p1: f64, alpha: f64, sigma: f64, axis: usize },
    /// Endpoint `sigma = -N/p`:
    /// `sup_q 2^{-q N/p} ||R_q||_{p1} <= C ||a||_{B^{N/p+alpha}_{p,1}} ||w||_{B^{-N/p+1-alpha}_{p1,inf}}`.
    LameEndpoint { p: f64, p1: f64, alpha: f64, axis: usize },
}

impl CommutatorEstimate {
    pub fn id(&self) -> &'static str {
        match self {
            Self::Transport { .. } => "transport-commutator",
            Self::TransportEndpoint { .. } => "transport-commutator-endpoint",
            Self::SelfTransport { .. } => "self-transport-commutator",
            Self::Lame { .. } => "lame-commutator",
            Self::LameEndpoint { .. } => "lame-commutator-endpoint",
        }
    }

    /// Index constraints of the estimate in dimension `n`.
    pub fn validate(&self, n: f64) -> Result<()> {
        let fail = |m: &str| Err(Error::IndexConstraintViolated(m.to_string()));
        let exps = |p: f64, p1: f64| -> Result<()> {
            if !(p1 >= 1.0 && p1 <= p) {
                return fail("1 <= p1 <= p");
            }
            Ok(())
        };
        match *self {
            Self::Transport { p, p1, sigma } => {
                exps(p, p1)?;
                if !(sigma > -(n / p).min(n / p1) && sigma <= n / p + 1.0) {
                    return fail("-min(N/p, N/p1) < sigma <= N/p + 1");
                }
            }
            Self::TransportEndpoint { p, p1 } => exps(p, p1)?,
            Self::SelfTransport { p, p1, sigma } => {
                exps(p, p1)?;
                if sigma <= 0.0 {
                    return fail("sigma > 0");
                }
            }
            Self::Lame { p, p1, alpha, sigma, .. } => {
                exps(p, p1)?;
                if !(alpha > 1.0 - n / p && alpha <= 1.0) {
                    return fail("1 - N/p < alpha <= 1");
                }
                if !(sigma > -n / p && sigma <= alpha + n / p) {
                    return fail("-N/p < sigma <= alpha + N/p");
                }
            }
            Self::LameEndpoint { p, p1, alpha, .. } => {
                exps(p, p1)?;
                if !(alpha > 1.0 - n / p && alpha <= 1.0) {
                    return fail("1 - N/p < alpha <= 1");
                }
            }
        }
        Ok(())
    }
}

struct Measured {
    lhs: f64,
    rhs: f64,
    contributions: Vec<f64>,
}

fn measure(est: &CommutatorEstimate, bank: &DyadicFilterBank, v: &Field, a: &Field, w: &Field) -> Result<Measured> {
    let n = bank.grid().dim() as f64;
    let norm = |f: &Field, s: f64, p: f64, r: f64| bank.level_norms(f, p).besov(s, r);
    let weights = |s: f64, len: usize| (0..len).map(move |i| (2f64).powf((i as f64 - 1.0) * s));
    Ok(match *est {
        CommutatorEstimate::Transport { p, p1, sigma } => {
            let comms = transport_commutators(v, a, bank)?;
            let contributions: Vec<f64> =
                comms.iter().zip(weights(sigma, comms.len())).map(|(c, w)| w * c.lp_norm(p1)).collect();
            let rhs = norm(&jacobian(v), n / p, p, 1.0) * norm(a, sigma, p1, 1.0);
            Measured { lhs: contributions.iter().sum(), rhs, contributions }
        }
        CommutatorEstimate::TransportEndpoint { p, p1 } => {
            let comms = transport_commutators(v, a, bank)?;
            let contributions: Vec<f64> =
                comms.iter().zip(weights(-n / p, comms.len())).map(|(c, w)| w * c.lp_norm(p1)).collect();
            let rhs = norm(&jacobian(v), n / p, p, 1.0) * norm(a, -n / p, p, f64::INFINITY);
            Measured { lhs: lr_norm(&contributions, f64::INFINITY), rhs, contributions }
        }
        CommutatorEstimate::SelfTransport { p, p1, sigma } => {
            let comms = transport_commutators(v, v, bank)?;
            let contributions: Vec<f64> =
                comms.iter().zip(weights(sigma, comms.len())).map(|(c, w)| w * c.lp_norm(p)).collect();
            let p2 = 1.0 / (1.0 / p1 - 1.0 / p);
            let jac = jacobian(v);
            let rhs = jac.lp_norm(f64::INFINITY) * norm(v, sigma, p1, 1.0)
                + jac.lp_norm(p2) * norm(&jac, sigma - 1.0, p1, 1.0);
            Measured { lhs: contributions.iter().sum(), rhs, contributions }
        }
        CommutatorEstimate::Lame { p, p1, alpha, sigma, axis } => {
            let comms = lame_commutators(a, w, axis, bank)?;
            let contributions: Vec<f64> =
                comms.iter().zip(weights(sigma, comms.len())).map(|(c, w)| w * c.lp_norm(p1)).collect();
            let rhs = norm(a, n / p + alpha, p, 1.0) * norm(w, sigma + 1.0 - alpha, p1, 1.0);
            Measured { lhs: contributions.iter().sum(), rhs, contributions }
        }
        CommutatorEstimate::LameEndpoint { p, p1, alpha, axis } => {
            let comms = lame_commutators(a, w, axis, bank)?;
            let contributions: Vec<f64> =
                comms.iter().zip(weights(-n / p, comms.len())).map(|(c, w)| w * c.lp_norm(p1)).collect();
            let rhs = norm(a, n / p + alpha, p, 1.0) * norm(w, -n / p + 1.0 - alpha, p1, f64::INFINITY);
            Measured { lhs: lr_norm(&contributions, f64::INFINITY), rhs, contributions }
        }
    })
}

/// Measures an estimate over an ensemble of random smooth inputs.
///
/// Sample `i` uses ensemble roles 0 (vector `v`), 1 (scalar `a`) and 2 (vector `w`).
pub fn verify_commutator(est: &CommutatorEstimate, ensemble: &Ensemble, grid: &Grid) -> Result<EstimateReport> {
    est.validate(grid.dim() as f64)?;
    let bank = DyadicFilterBank::with_default_alpha(grid)?;
    let dim = grid.dim();
    let measured: Vec<Measured> = (0..ensemble.samples)
        .into_par_iter()
        .map(|i| {
            let v = ensemble.field(grid, i, 0, dim);
            let a = ensemble.field(grid, i, 1, 1);
            let w = ensemble.field(grid, i, 2, dim);
            measure(est, &bank, &v, &a, &w)
        })
        .collect::<Result<_>>()?;
    let samples: Vec<Sample> = measured.iter().enumerate().map(|(i, m)| Sample::new(i, m.lhs, m.rhs)).collect();
    let worst = samples.iter().enumerate().max_by(|x, y| x.1.ratio.total_cmp(&y.1.ratio)).map_or(0, |(i, _)| i);
    let c_q = measured.get(worst).map(|m| m.contributions.clone()).unwrap_or_default();
    Ok(EstimateReport::new(est.id(), grid.n(), samples, c_q))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_coefficients_commute() {
        let g = Grid::periodic(2, 32).unwrap();
        let bank = DyadicFilterBank::with_default_alpha(&g).unwrap();
        let e = Ensemble::new(5, 1);
        let a = e.field(&g, 0, 1, 1);
        let w = e.field(&g, 0, 2, 2);
        let v = Field::from_fn(&g, 2, |_, c| if c == 0 { 0.7 } else { -1.3 });
        for q in bank.levels() {
            assert!(transport_commutator(&v, &a, q, &bank).unwrap().max_abs() < 1e-12);
            let c = Field::constant(&g, 1, 2.0);
            assert!(lame_commutator(&c, &w, 1, q, &bank).unwrap().max_abs() < 1e-12);
        }
    }

    #[test]
    fn batched_commutators_match_single_level() {
        let g = Grid::periodic(2, 32).unwrap();
        let bank = DyadicFilterBank::with_default_alpha(&g).unwrap();
        let e = Ensemble::new(6, 1);
        let v = e.field(&g, 0, 0, 2);
        let a = e.field(&g, 0, 1, 1);
        let all = transport_commutators(&v, &a, &bank).unwrap();
        for q in bank.levels() {
            let one = transport_commutator(&v, &a, q, &bank).unwrap();
            assert!(one.max_abs_diff(&all[(q + 1) as usize]) < 1e-13);
        }
    }

    #[test]
    fn constraints_are_named() {
        let est = CommutatorEstimate::Transport { p: 2.0, p1: 4.0, sigma: 0.5 };
        let err = est.validate(2.0).unwrap_err();
        assert!(err.to_string().contains("1 <= p1 <= p"));
        let est = CommutatorEstimate::Lame { p: 2.0, p1: 2.0, alpha: 0.5, sigma: 3.0, axis: 0 };
        assert!(est.validate(2.0).unwrap_err().to_string().contains("alpha + N/p"));
    }
}
