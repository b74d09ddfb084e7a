use crate::error::Result;

/// One step of Heun's third-order method in integrating-factor form for
/// `y' = L y + N(t, y)`.
///
/// Tableau `c = (0, 1/3, 2/3)`, `a21 = 1/3`, `a32 = 2/3`, `b = (1/4, 0, 3/4)`.
/// Every propagator `prop(y, tau) = e^{tau L} y` is called with `tau >= 0`,
/// so a dissipative `L` is never run backwards.
pub(crate) fn lawson_heun3<S>(
    y: &S,
    t: f64,
    h: f64,
    axpy: impl Fn(&S, f64, &S) -> S,
    prop: impl Fn(&S, f64) -> Result<S>,
    mut rhs: impl FnMut(f64, &S) -> Result<S>,
) -> Result<S> {
    let third = h / 3.0;
    let k1 = rhs(t, y)?;
    let y2 = prop(&axpy(y, third, &k1), third)?;
    let k2 = rhs(t + third, &y2)?;
    let y3 = axpy(&prop(y, 2.0 * third)?, 2.0 * third, &prop(&k2, third)?);
    let k3 = rhs(t + 2.0 * third, &y3)?;
    Ok(axpy(&prop(&axpy(y, 0.25 * h, &k1), h)?, 0.75 * h, &prop(&k3, third)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solve(steps: usize) -> f64 {
        // y' = -2 y + sin(t) y, exact y = exp(-2t + 1 - cos t).
        let h = 1.0 / steps as f64;
        let mut y = 1.0f64;
        for i in 0..steps {
            let t = i as f64 * h;
            y = lawson_heun3(
                &y,
                t,
                h,
                |a, s, b| a + s * b,
                |a, tau| Ok(a * (-2.0 * tau).exp()),
                |t, y| Ok(t.sin() * y),
            )
            .unwrap();
        }
        y
    }

    #[test]
    fn third_order_convergence() {
        let exact = (-2.0 + 1.0 - 1f64.cos()).exp();
        let e1 = (solve(20) - exact).abs();
        let e2 = (solve(40) - exact).abs();
        let order = (e1 / e2).log2();
        assert!(order > 2.8, "{order}");
    }
}
