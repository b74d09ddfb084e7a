use crate::effective::FluidState;
use crate::error::{Error, Result};
use crate::linear::{check_cfl, lawson_heun3, LameSemigroup};
use crate::spectral::{dealias, lame_operator, Field};

/// `(rho, v1)`, the variables the stepper advances.
#[derive(Debug, Clone)]
struct Pair {
    rho: Field,
    v1: Field,
}

fn pair_axpy(a: &Pair, s: f64, b: &Pair) -> Pair {
    Pair { rho: a.rho.axpy(s, &b.rho), v1: a.v1.axpy(s, &b.v1) }
}

fn at_time(err: Error, time: f64) -> Error {
    match err {
        Error::VacuumApproach { minimum, floor, .. } => Error::VacuumApproach { time, minimum, floor },
        e => e,
    }
}

/// One step of length `h` from time `t`.
///
/// The density and the effective velocity are advanced together by the
/// third-order integrating-factor scheme. The stiff part `b A` with `b` the
/// mean of `1/rho` is integrated exactly per mode; the remainder
/// `(1/rho - b) A v1`, the convection, the forcing and the pressure source
/// are explicit. The velocity is reassembled as `v1 + v / nu` from the new
/// density.
pub fn step(state: &FluidState, t: f64, h: f64, forcing: Option<&Field>) -> Result<FluidState> {
    check_cfl(&state.u, h, t)?;
    let visc = state.visc;
    let law = state.law;
    let dealias_on = state.dealias;
    let b_eff = state.inverse_density().mean(0);
    let semigroup = LameSemigroup::scaled(visc, b_eff);
    let start = Pair { rho: state.rho.clone(), v1: state.to_effective()? };
    let rhs = |tau: f64, y: &Pair| -> Result<Pair> {
        let s = FluidState::from_effective(y.rho.clone(), &y.v1, visc, law)
            .map_err(|e| at_time(e, tau))?
            .with_dealias(dealias_on);
        let terms = s.effective_terms_with(&y.v1, forcing)?;
        let stiff = lame_operator(&y.v1, &visc)?.scale(b_eff);
        let stiff = if dealias_on { dealias(&stiff) } else { stiff };
        let dv1 = &terms.total() - &stiff;
        Ok(Pair { rho: s.density_rate()?, v1: dv1 })
    };
    let prop =
        |y: &Pair, tau: f64| -> Result<Pair> { Ok(Pair { rho: y.rho.clone(), v1: semigroup.propagate(&y.v1, tau)? }) };
    let next = lawson_heun3(&start, t, h, pair_axpy, prop, rhs)?;
    let t1 = t + h;
    if !(next.rho.is_finite() && next.v1.is_finite()) {
        return Err(Error::NonFinite { time: t1 });
    }
    Ok(FluidState::from_effective(next.rho, &next.v1, visc, law).map_err(|e| at_time(e, t1))?.with_dealias(dealias_on))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effective::PressureLaw;
    use crate::spectral::{Grid, ViscosityParams};

    fn smooth_state(grid: &Grid, amp: f64, law: PressureLaw) -> FluidState {
        let rho = Field::from_fn(grid, 1, |x, _| 1.0 + amp * (x[0].sin() + 0.5 * (x[1] + 2.0 * x[0]).cos()));
        let u = Field::from_fn(grid, 2, |x, c| {
            if c == 0 {
                amp * (x[1].cos() + (x[0] + x[1]).sin())
            } else {
                amp * (2.0 * x[0]).sin()
            }
        });
        FluidState::new(rho, u, ViscosityParams::new(0.1, 0.05).unwrap(), law).unwrap()
    }

    #[test]
    fn equilibrium_is_a_fixed_point() {
        let grid = Grid::periodic(2, 16).unwrap();
        let s =
            FluidState::equilibrium(&grid, ViscosityParams::new(0.1, 0.0).unwrap(), PressureLaw::default()).unwrap();
        let next = step(&s, 0.0, 0.01, None).unwrap();
        assert!(next.rho.max_abs_diff(&s.rho) < 1e-14);
        assert!(next.u.max_abs() < 1e-14);
    }

    #[test]
    fn step_conserves_mass() {
        let grid = Grid::periodic(2, 32).unwrap();
        let s = smooth_state(&grid, 0.05, PressureLaw::default());
        let m0 = s.rho.integral(0);
        let mut cur = s;
        for i in 0..10 {
            cur = step(&cur, i as f64 * 0.01, 0.01, None).unwrap();
            let m = cur.rho.integral(0);
            assert!(((m - m0) / m0).abs() < 1e-13);
        }
    }

    #[test]
    fn one_step_matches_two_half_steps() {
        let grid = Grid::periodic(2, 32).unwrap();
        let law = PressureLaw::new(1.0, 1.4, 1.0).unwrap();
        let s = smooth_state(&grid, 0.1, law);
        let diff = |h: f64| {
            let full = step(&s, 0.0, h, None).unwrap();
            let half = step(&step(&s, 0.0, 0.5 * h, None).unwrap(), 0.5 * h, 0.5 * h, None).unwrap();
            full.u.max_abs_diff(&half.u) + full.rho.max_abs_diff(&half.rho)
        };
        let (d1, d2) = (diff(0.04), diff(0.02));
        assert!(d2 < 0.3 * d1, "{d1} {d2}");
    }

    #[test]
    fn momentum_residual_matches_the_step() {
        // du/dt of the original form against a centred difference of the stepper.
        let grid = Grid::periodic(2, 32).unwrap();
        let s = smooth_state(&grid, 0.05, PressureLaw::default());
        let h = 1e-3;
        let fwd = step(&s, 0.0, h, None).unwrap();
        let rate = s.momentum_residual(crate::effective::Formulation::Original, None).unwrap();
        let fd = (&fwd.u - &s.u).scale(1.0 / h);
        let err = fd.max_abs_diff(&rate) / rate.max_abs();
        assert!(err < 5e-2, "{err}");
    }

    #[test]
    fn cfl_is_enforced() {
        let grid = Grid::periodic(2, 32).unwrap();
        let s = smooth_state(&grid, 0.05, PressureLaw::default());
        assert!(matches!(step(&s, 0.0, 10.0, None), Err(Error::CflViolation { .. })));
    }
}
