use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::DyadicFilterBank;
use crate::report::{EstimateReport, Sample};
use crate::rng::Ensemble;
use crate::spectral::{dealiased_product, Field, Grid};

/// Product laws in Besov spaces, each with its own index constraints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProductLaw {
    /// `||uv||_{B^s_{p,r}} <= C (||u||_inf ||v||_{B^s_{p,r}} + ||v||_inf ||u||_{B^s_{p,r}})`.
    Tame { s: f64, p: f64, r: f64 },
    /// `||uv||_{B^{s1+s2-N(1/p1+1/p2-1/p)}_{p,r}} <= C ||u||_{B^{s1}_{p1,r}} ||v||_{B^{s2}_{p2,inf}}`.
    General { p: f64, p1: f64, p2: f64, lambda1: f64, lambda2: f64, s1: f64, s2: f64, r: f64 },
    /// `s2 = -s1`: `||uv||_{B^{-N(1/p1+1/p2-1/p)}_{p,inf}} <= C ||u||_{B^{s1}_{p1,1}} ||v||_{B^{-s1}_{p2,inf}}`.
    Endpoint { p: f64, p1: f64, p2: f64, lambda1: f64, lambda2: f64, s1: f64 },
    /// `||uv||_{B^s_{p,r}} <= C ||u||_{B^s_{p,r}} (||v||_{B^{N/p}_{p,inf}} + ||v||_inf)`, `|s| < N/p`.
    Multiplier { s: f64, p: f64, r: f64 },
    /// `||uv||_{B^s_{p,r}} <= C ||u||_{B^s_{p,r}} (||v||_{B^{N/p1}_{p1,inf}} + ||v||_inf)`, `p <= p1`.
    MixedMultiplier { s: f64, p: f64, p1: f64, r: f64 },
}

fn inv(x: f64) -> f64 {
    1.0 / x
}

fn require(ok: bool, constraint: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::IndexConstraintViolated(constraint.to_string()))
    }
}

fn exponent(x: f64) -> Result<()> {
    require(x >= 1.0, "exponents lie in [1, inf]")
}

fn general_exponents(p: f64, p1: f64, p2: f64, l1: f64, l2: f64) -> Result<()> {
    for x in [p, p1, p2, l1, l2] {
        exponent(x)?;
    }
    require(inv(p) <= inv(p1) + inv(p2), "1/p <= 1/p1 + 1/p2")?;
    require(p1 <= l2, "p1 <= lambda2")?;
    require(p2 <= l1, "p2 <= lambda1")?;
    require(inv(p) <= inv(p1) + inv(l1), "1/p <= 1/p1 + 1/lambda1")?;
    require(inv(p) <= inv(p2) + inv(l2), "1/p <= 1/p2 + 1/lambda2")
}

impl ProductLaw {
    pub fn id(&self) -> &'static str {
        match self {
            Self::Tame { .. } => "product-tame",
            Self::General { .. } => "product-general",
            Self::Endpoint { .. } => "product-endpoint",
            Self::Multiplier { .. } => "product-multiplier",
            Self::MixedMultiplier { .. } => "product-mixed-multiplier",
        }
    }

    /// Checks the law's index constraints in dimension `n`.
    pub fn validate(&self, n: f64) -> Result<()> {
        match *self {
            Self::Tame { p, r, .. } => {
                exponent(p)?;
                exponent(r)
            }
            Self::General { p, p1, p2, lambda1, lambda2, s1, s2, r } => {
                exponent(r)?;
                general_exponents(p, p1, p2, lambda1, lambda2)?;
                require(
                    s1 + s2 + n * (1.0 - inv(p1) - inv(p2)).min(0.0) > 0.0,
                    "s1 + s2 + N inf(0, 1 - 1/p1 - 1/p2) > 0",
                )?;
                require(s1 + n / lambda2 < n / p1, "s1 + N/lambda2 < N/p1")?;
                require(s2 + n / lambda1 < n / p2, "s2 + N/lambda1 < N/p2")
            }
            Self::Endpoint { p, p1, p2, lambda1, lambda2, s1 } => {
                general_exponents(p, p1, p2, lambda1, lambda2)?;
                require(inv(p1) + inv(p2) <= 1.0, "1/p1 + 1/p2 <= 1")?;
                require(
                    s1 > n / lambda1 - n / p2 && s1 <= n / p1 - n / lambda2,
                    "N/lambda1 - N/p2 < s1 <= N/p1 - N/lambda2",
                )
            }
            Self::Multiplier { s, p, r } => {
                exponent(p)?;
                exponent(r)?;
                require(s.abs() < n / p, "|s| < N/p")
            }
            Self::MixedMultiplier { s, p, p1, r } => {
                exponent(r)?;
                require(1.0 <= p && p <= p1, "1 <= p <= p1")?;
                if inv(p) + inv(p1) <= 1.0 {
                    require(s > -n / p1 && s < n / p1, "-N/p1 < s < N/p1")
                } else {
                    require(
                        s > -n / p1 + n * (inv(p) + inv(p1) - 1.0) && s < n / p1,
                        "-N/p1 + N(1/p + 1/p1 - 1) < s < N/p1",
                    )
                }
            }
        }
    }

    /// Both sides of the law for one pair, the product being `dealias(uv)`.
    pub fn sides(&self, u: &Field, v: &Field, bank: &DyadicFilterBank) -> (f64, f64) {
        let n = bank.grid().dim() as f64;
        let norm = |f: &Field, s: f64, p: f64, r: f64| bank.level_norms(f, p).besov(s, r);
        let uv = dealiased_product(u, v);
        match *self {
            Self::Tame { s, p, r } => (
                norm(&uv, s, p, r),
                u.lp_norm(f64::INFINITY) * norm(v, s, p, r) + v.lp_norm(f64::INFINITY) * norm(u, s, p, r),
            ),
            Self::General { p, p1, p2, s1, s2, r, .. } => (
                norm(&uv, s1 + s2 - n * (inv(p1) + inv(p2) - inv(p)), p, r),
                norm(u, s1, p1, r) * norm(v, s2, p2, f64::INFINITY),
            ),
            Self::Endpoint { p, p1, p2, s1, .. } => (
                norm(&uv, -n * (inv(p1) + inv(p2) - inv(p)), p, f64::INFINITY),
                norm(u, s1, p1, 1.0) * norm(v, -s1, p2, f64::INFINITY),
            ),
            Self::Multiplier { s, p, r } => {
                (norm(&uv, s, p, r), norm(u, s, p, r) * (norm(v, n / p, p, f64::INFINITY) + v.lp_norm(f64::INFINITY)))
            }
            Self::MixedMultiplier { s, p, p1, r } => {
                (norm(&uv, s, p, r), norm(u, s, p, r) * (norm(v, n / p1, p1, f64::INFINITY) + v.lp_norm(f64::INFINITY)))
            }
        }
    }
}

/// Measures a product law over an ensemble (roles 0 and 1 give `u` and `v`).
pub fn verify_product_laws(law: &ProductLaw, ensemble: &Ensemble, grid: &Grid) -> Result<EstimateReport> {
    law.validate(grid.dim() as f64)?;
    let bank = DyadicFilterBank::with_default_alpha(grid)?;
    let samples: Vec<Sample> = (0..ensemble.samples)
        .into_par_iter()
        .map(|i| {
            let u = ensemble.field(grid, i, 0, 1);
            let v = ensemble.field(grid, i, 1, 1);
            let (lhs, rhs) = law.sides(&u, &v, &bank);
            Sample::new(i, lhs, rhs)
        })
        .collect();
    Ok(EstimateReport::new(law.id(), grid.n(), samples, vec![]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::BesovParams;

    #[test]
    fn multiplier_law_rejects_high_regularity() {
        let law = ProductLaw::Multiplier { s: 2.0, p: 2.0, r: 1.0 };
        let err = law.validate(2.0).unwrap_err();
        assert!(matches!(err, Error::IndexConstraintViolated(ref m) if m == "|s| < N/p"));
    }

    #[test]
    fn general_law_names_the_regularity_constraint() {
        let law = ProductLaw::General {
            p: 2.0,
            p1: 2.0,
            p2: 2.0,
            lambda1: f64::INFINITY,
            lambda2: f64::INFINITY,
            s1: -0.5,
            s2: 0.2,
            r: 1.0,
        };
        let err = law.validate(2.0).unwrap_err().to_string();
        assert!(err.contains("s1 + s2 + N inf(0, 1 - 1/p1 - 1/p2) > 0"), "{err}");
    }

    #[test]
    fn tame_law_with_constant_factor_is_homogeneous() {
        let g = Grid::periodic(2, 32).unwrap();
        let bank = DyadicFilterBank::with_default_alpha(&g).unwrap();
        let u = Ensemble::new(2, 1).field(&g, 0, 0, 1);
        let c = Field::constant(&g, 1, -3.0);
        let law = ProductLaw::Tame { s: 1.0, p: 2.0, r: 1.0 };
        let (lhs, _) = law.sides(&u, &c, &bank);
        let nu = crate::lp::besov_value(&u, BesovParams::new(1.0, 2.0, 1.0).unwrap(), &bank).unwrap();
        assert!((lhs - 3.0 * nu).abs() < 1e-12 * nu);
    }
}
