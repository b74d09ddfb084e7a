//! Pressure law, the potential `v = grad lap^-1 (P(rho) - P(rho_bar))` and the
//! effective velocity `v1 = u - v / nu`, which removes the pressure gradient
//! from the momentum equation.
//!
//! `rho` is stored; `a = 1/rho - 1` and every `1 + a` factor derive from it.

use crate::error::{Error, Result};
use crate::spectral::{dealias, divergence, grad_inv_laplacian, gradient, lame_operator, Field, ViscosityParams};

/// `P(rho) = K rho^gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PressureLaw {
    pub k: f64,
    pub gamma: f64,
    pub rho_bar: f64,
}

impl Default for PressureLaw {
    fn default() -> Self {
        Self { k: 1.0, gamma: 1.0, rho_bar: 1.0 }
    }
}

impl PressureLaw {
    pub fn new(k: f64, gamma: f64, rho_bar: f64) -> Result<Self> {
        let law = Self { k, gamma, rho_bar };
        law.validate()?;
        Ok(law)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(Error::InvalidParameter(format!("pressure constant must be positive, got {}", self.k)));
        }
        if !(self.gamma >= 1.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!("adiabatic exponent must be >= 1, got {}", self.gamma)));
        }
        if !(self.rho_bar > 0.0 && self.rho_bar.is_finite()) {
            return Err(Error::InvalidParameter(format!("reference density must be positive, got {}", self.rho_bar)));
        }
        Ok(())
    }

    /// Linear law: the pressure source is a Helmholtz projection of the momentum.
    pub fn is_linear(&self) -> bool {
        self.gamma == 1.0
    }

    pub fn p(&self, rho: f64) -> f64 {
        self.k * rho.powf(self.gamma)
    }

    pub fn dp(&self, rho: f64) -> f64 {
        self.k * self.gamma * rho.powf(self.gamma - 1.0)
    }

    pub fn reference_pressure(&self) -> f64 {
        self.p(self.rho_bar)
    }

    /// Potential energy density `Pi` with `Pi'' = P'/rho` and
    /// `Pi(rho_bar) = Pi'(rho_bar) = 0`.
    pub fn potential(&self, rho: f64) -> f64 {
        let (k, g, rb) = (self.k, self.gamma, self.rho_bar);
        if self.is_linear() {
            k * rho * (rho / rb).ln() - k * (rho - rb)
        } else {
            let pb = self.reference_pressure();
            k * rho.powf(g) / (g - 1.0) - k * rho * rb.powf(g - 1.0) / (g - 1.0) + pb - pb * rho / rb
        }
    }

    fn require_positive(rho: &Field) -> Result<()> {
        let minimum = rho.min();
        if !(minimum > 0.0) {
            return Err(Error::VacuumApproach { time: 0.0, minimum, floor: 0.0 });
        }
        Ok(())
    }

    pub fn pressure(&self, rho: &Field) -> Result<Field> {
        Self::require_positive(rho)?;
        Ok(rho.map(|r| self.p(r)))
    }

    pub fn dpressure(&self, rho: &Field) -> Result<Field> {
        Self::require_positive(rho)?;
        Ok(rho.map(|r| self.dp(r)))
    }
}

/// Which right-hand side `momentum_residual` assembles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Formulation {
    /// `du/dt = -u . grad u + (1 + a) A u - grad g(a) + f`.
    Original,
    /// `dv1/dt` with the pressure entering only through `dv/dt`.
    Effective,
}

/// Separate contributions to `dv1/dt`.
#[derive(Debug, Clone)]
pub struct EffectiveTerms {
    /// `rho^-1 A v1`.
    pub viscous: Field,
    /// `-u . grad u`.
    pub convection: Field,
    pub forcing: Field,
    /// `-nu^-1 dv/dt = nu^-1 grad lap^-1 (P'(rho) div(rho u))`.
    pub pressure_source: Field,
}

impl EffectiveTerms {
    pub fn total(&self) -> Field {
        &(&self.viscous + &self.convection) + &(&self.forcing + &self.pressure_source)
    }
}

/// Density and velocity at one instant.
#[derive(Debug, Clone)]
pub struct FluidState {
    pub rho: Field,
    pub u: Field,
    pub visc: ViscosityParams,
    pub law: PressureLaw,
    /// Apply the 2/3 rule after every product.
    pub dealias: bool,
}

impl FluidState {
    pub fn new(rho: Field, u: Field, visc: ViscosityParams, law: PressureLaw) -> Result<Self> {
        visc.validate()?;
        law.validate()?;
        if rho.grid() != u.grid() {
            return Err(Error::GridMismatch);
        }
        if !rho.is_scalar() {
            return Err(Error::ComponentMismatch { expected: 1, got: rho.components() });
        }
        let dim = rho.grid().dim();
        if u.components() != dim {
            return Err(Error::ComponentMismatch { expected: dim, got: u.components() });
        }
        PressureLaw::require_positive(&rho)?;
        Ok(Self { rho, u, visc, law, dealias: true })
    }

    /// `rho = rho_bar`, `u = 0`.
    pub fn equilibrium(grid: &crate::spectral::Grid, visc: ViscosityParams, law: PressureLaw) -> Result<Self> {
        Self::new(Field::constant(grid, 1, law.rho_bar), Field::zeros(grid, grid.dim()), visc, law)
    }

    pub fn with_dealias(mut self, on: bool) -> Self {
        self.dealias = on;
        self
    }

    fn product(&self, a: &Field, b: &Field) -> Field {
        let p = a * b;
        if self.dealias {
            dealias(&p)
        } else {
            p
        }
    }

    /// `a = 1/rho - 1`.
    pub fn a(&self) -> Field {
        self.rho.map(|r| 1.0 / r - 1.0)
    }

    pub fn inverse_density(&self) -> Field {
        self.rho.map(|r| 1.0 / r)
    }

    pub fn pressure(&self) -> Result<Field> {
        self.law.pressure(&self.rho)
    }

    pub fn dpressure(&self) -> Result<Field> {
        self.law.dpressure(&self.rho)
    }

    /// `v = grad lap^-1 (P(rho) - P(rho_bar))`, mean discarded.
    pub fn compute_v(&self) -> Result<Field> {
        grad_inv_laplacian(&self.pressure()?)
    }

    /// `v1 = u - v / nu`.
    pub fn to_effective(&self) -> Result<Field> {
        Ok(self.u.axpy(-1.0 / self.visc.nu(), &self.compute_v()?))
    }

    /// Rebuilds the state from `(rho, v1)`: `u = v1 + v / nu`.
    pub fn from_effective(rho: Field, v1: &Field, visc: ViscosityParams, law: PressureLaw) -> Result<Self> {
        let v = grad_inv_laplacian(&law.pressure(&rho)?)?;
        let u = v1.axpy(1.0 / visc.nu(), &v);
        Self::new(rho, u, visc, law)
    }

    /// Momentum `rho u` as used by the mass flux.
    pub fn momentum(&self) -> Field {
        self.product(&self.rho, &self.u)
    }

    /// `d rho/dt = -div(rho u)`.
    pub fn density_rate(&self) -> Result<Field> {
        Ok(-&divergence(&self.momentum())?)
    }

    /// `dv/dt = -grad lap^-1 (P'(rho) div(rho u))`.
    pub fn dt_v_source(&self) -> Result<Field> {
        let div = divergence(&self.momentum())?;
        let source = self.product(&self.dpressure()?, &div);
        Ok(-&grad_inv_laplacian(&source)?)
    }

    pub(crate) fn convection(&self) -> Result<Field> {
        let dim = self.u.grid().dim();
        let mut acc = Field::zeros(self.u.grid(), dim);
        for j in 0..dim {
            let du = crate::spectral::partial(&self.u, j);
            acc = &acc + &self.product(&self.u.component_field(j), &du);
        }
        Ok(-&acc)
    }

    fn forcing_or_zero(&self, f: Option<&Field>) -> Field {
        f.cloned().unwrap_or_else(|| Field::zeros(self.u.grid(), self.u.grid().dim()))
    }

    /// Contributions to `dv1/dt`, evaluated with the given `v1`.
    pub fn effective_terms_with(&self, v1: &Field, f: Option<&Field>) -> Result<EffectiveTerms> {
        let viscous = self.product(&self.inverse_density(), &lame_operator(v1, &self.visc)?);
        Ok(EffectiveTerms {
            viscous,
            convection: self.convection()?,
            forcing: self.forcing_or_zero(f),
            pressure_source: self.dt_v_source()?.scale(-1.0 / self.visc.nu()),
        })
    }

    pub fn effective_terms(&self, f: Option<&Field>) -> Result<EffectiveTerms> {
        self.effective_terms_with(&self.to_effective()?, f)
    }

    /// Right-hand side of the chosen formulation.
    pub fn momentum_residual(&self, form: Formulation, f: Option<&Field>) -> Result<Field> {
        match form {
            Formulation::Effective => Ok(self.effective_terms(f)?.total()),
            Formulation::Original => {
                let inv = self.inverse_density();
                let viscous = self.product(&inv, &lame_operator(&self.u, &self.visc)?);
                let pressure = self.product(&inv, &gradient(&self.pressure()?)?);
                Ok(&(&(&viscous - &pressure) + &self.convection()?) + &self.forcing_or_zero(f))
            }
        }
    }

    /// `du/dt` rebuilt from the effective form: `dv1/dt + dv/dt / nu`.
    pub fn reconstructed_velocity_rate(&self, f: Option<&Field>) -> Result<Field> {
        let dv1 = self.momentum_residual(Formulation::Effective, f)?;
        Ok(dv1.axpy(1.0 / self.visc.nu(), &self.dt_v_source()?))
    }

    /// `|Delta v - grad P| / |grad P|` and `|A v - nu grad P| / |grad P|` in `L^2`.
    pub fn decoupling_residuals(&self) -> Result<(f64, f64)> {
        let v = self.compute_v()?;
        let grad_p = gradient(&self.pressure()?)?;
        let scale = grad_p.lp_norm(2.0);
        if scale == 0.0 {
            return Ok((crate::spectral::laplacian(&v).lp_norm(2.0), lame_operator(&v, &self.visc)?.lp_norm(2.0)));
        }
        let lap = crate::spectral::laplacian(&v);
        let lame = lame_operator(&v, &self.visc)?;
        Ok(((&lap - &grad_p).lp_norm(2.0) / scale, lame.axpy(-self.visc.nu(), &grad_p).lp_norm(2.0) / scale))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Ensemble;
    use crate::spectral::{gradient_projection, laplacian, Grid};

    fn visc() -> ViscosityParams {
        ViscosityParams::new(0.1, 0.05).unwrap()
    }

    fn state(seed: u64, law: PressureLaw) -> FluidState {
        let g = Grid::periodic(2, 32).unwrap();
        let ens = Ensemble::new(seed, 1);
        let rho = ens.field(&g, 0, 0, 1).scale(0.2).map(|x| 1.0 + x);
        let u = ens.field(&g, 0, 1, 2).scale(0.3);
        FluidState::new(rho, u, visc(), law).unwrap()
    }

    #[test]
    fn pressure_matches_scalar_evaluation() {
        let g = Grid::periodic(2, 16).unwrap();
        let law = PressureLaw::new(2.0, 1.4, 1.0).unwrap();
        let rho = Field::from_fn(&g, 1, |x, _| 1.0 + 0.1 * x[0].sin());
        let p = law.pressure(&rho).unwrap();
        for (i, &r) in rho.values().iter().enumerate() {
            assert!((p.values()[i] - 2.0 * r.powf(1.4)).abs() < 1e-14);
        }
        let lin = PressureLaw::new(3.0, 1.0, 1.0).unwrap();
        assert!(lin.dpressure(&rho).unwrap().values().iter().all(|&d| d == 3.0));
        assert!(law.pressure(&rho.map(|r| r - 1.2)).is_err());
    }

    #[test]
    fn potential_is_flat_at_reference_density() {
        for law in [PressureLaw::new(1.0, 1.0, 1.0).unwrap(), PressureLaw::new(1.3, 1.4, 0.8).unwrap()] {
            let rb = law.rho_bar;
            let h = 1e-4;
            assert!(law.potential(rb).abs() < 1e-14);
            let d1 = (law.potential(rb + h) - law.potential(rb - h)) / (2.0 * h);
            assert!(d1.abs() < 1e-8);
            for &r in &[0.5, 1.0, 1.7] {
                let d2 = (law.potential(r + h) - 2.0 * law.potential(r) + law.potential(r - h)) / (h * h);
                assert!((d2 - law.dp(r) / r).abs() < 1e-5, "{d2}");
            }
        }
    }

    #[test]
    fn single_mode_potential() {
        let g = Grid::periodic(2, 16).unwrap();
        let law = PressureLaw::default();
        let k = 3.0;
        // P - P_bar = sin(k x1) for the linear law with K = 1.
        let rho = Field::from_fn(&g, 1, |x, _| 1.0 + 0.5 * (k * x[0]).sin());
        let s = FluidState::new(rho, Field::zeros(&g, 2), visc(), law).unwrap();
        let v = s.compute_v().unwrap();
        let exact = Field::from_fn(&g, 2, |x, c| if c == 0 { -0.5 * (k * x[0]).cos() / k } else { 0.0 });
        assert!(v.max_abs_diff(&exact) < 1e-14);
    }

    #[test]
    fn decoupling_identities_hold() {
        for law in [PressureLaw::default(), PressureLaw::new(1.0, 1.4, 1.0).unwrap()] {
            let s = state(11, law);
            let (lap, lame) = s.decoupling_residuals().unwrap();
            assert!(lap < 1e-10 && lame < 1e-10, "{lap} {lame}");
            let v = s.compute_v().unwrap();
            let grad_p = gradient(&s.pressure().unwrap()).unwrap();
            assert!(laplacian(&v).max_abs_diff(&grad_p) < 1e-10 * grad_p.max_abs());
        }
    }

    #[test]
    fn effective_round_trip() {
        let s = state(12, PressureLaw::new(1.0, 1.4, 1.0).unwrap());
        let v1 = s.to_effective().unwrap();
        let back = FluidState::from_effective(s.rho.clone(), &v1, s.visc, s.law).unwrap();
        assert!(back.u.max_abs_diff(&s.u) < 1e-13);
        let eq = FluidState::equilibrium(s.rho.grid(), s.visc, s.law).unwrap();
        assert_eq!(eq.to_effective().unwrap().max_abs(), 0.0);
    }

    #[test]
    fn formulations_agree() {
        for law in [PressureLaw::default(), PressureLaw::new(1.0, 1.4, 1.0).unwrap()] {
            let s = state(13, law);
            let f = Ensemble::new(14, 1).field(s.rho.grid(), 0, 0, 2);
            let orig = s.momentum_residual(Formulation::Original, Some(&f)).unwrap();
            let eff = s.reconstructed_velocity_rate(Some(&f)).unwrap();
            assert!(orig.max_abs_diff(&eff) < 1e-9 * orig.max_abs(), "{}", orig.max_abs_diff(&eff));
        }
    }

    #[test]
    fn equilibrium_has_zero_residual() {
        let g = Grid::periodic(2, 16).unwrap();
        let s = FluidState::equilibrium(&g, visc(), PressureLaw::new(2.0, 1.4, 1.0).unwrap()).unwrap();
        for form in [Formulation::Original, Formulation::Effective] {
            assert_eq!(s.momentum_residual(form, None).unwrap().max_abs(), 0.0);
        }
    }

    #[test]
    fn pressure_enters_only_through_the_source() {
        let s1 = state(15, PressureLaw::new(1.0, 1.0, 1.0).unwrap());
        let mut s3 = s1.clone();
        s3.law.k = 3.0;
        let v1 = s1.to_effective().unwrap();
        let t1 = s1.effective_terms_with(&v1, None).unwrap();
        let t3 = s3.effective_terms_with(&v1, None).unwrap();
        assert_eq!(t1.viscous.max_abs_diff(&t3.viscous), 0.0);
        assert_eq!(t1.convection.max_abs_diff(&t3.convection), 0.0);
        assert!(t3.pressure_source.max_abs_diff(&t1.pressure_source.scale(3.0)) < 1e-13);
    }

    #[test]
    fn linear_law_source_is_a_projection() {
        let s = state(16, PressureLaw::new(2.5, 1.0, 1.0).unwrap());
        let src = s.dt_v_source().unwrap();
        let proj = gradient_projection(&s.momentum()).unwrap().scale(-2.5);
        assert!(src.max_abs_diff(&proj) < 1e-10 * proj.max_abs());
    }

    #[test]
    fn source_matches_density_evolution() {
        // The chain rule holds pointwise, so products are left untruncated.
        let s = state(17, PressureLaw::new(1.0, 1.4, 1.0).unwrap()).with_dealias(false);
        let v = s.compute_v().unwrap();
        let src = s.dt_v_source().unwrap();
        let rate = s.density_rate().unwrap();
        let errs: Vec<f64> = [1e-3, 5e-4]
            .iter()
            .map(|&h| {
                let moved = FluidState::new(s.rho.axpy(h, &rate), s.u.clone(), s.visc, s.law).unwrap();
                moved.compute_v().unwrap().max_abs_diff(&v.axpy(h, &src))
            })
            .collect();
        let order = (errs[0] / errs[1]).log2();
        assert!(order > 1.8, "{order}");
    }
}
