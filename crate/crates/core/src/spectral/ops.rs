//! Fourier multipliers and the differential operators built from them.
//!
//! Derivatives use wavenumbers with the Nyquist component zeroed, which keeps
//! results real and makes `div grad = lap` hold to round-off.

use num_complex::Complex64;

use super::field::Field;
use super::grid::Grid;
use super::viscosity::ViscosityParams;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Moves a field between representations. `Forward` fills the cached
/// spectrum; `Inverse` rebuilds physical values from the cached spectrum.
pub fn transform(field: &Field, direction: Direction) -> Field {
    match direction {
        Direction::Forward => {
            let out = field.clone();
            out.spectrum();
            out
        }
        Direction::Inverse => {
            Field::from_spectral(field.grid(), field.components(), field.spectrum().to_vec()).expect("layout preserved")
        }
    }
}

/// Applies `symbol(k)` to every component, `k` being the physical wavenumber.
///
/// A non-finite symbol is tolerated only on modes where the field has no
/// energy; otherwise the call fails with `SymbolSingularity`.
pub fn apply_multiplier(field: &Field, symbol: impl Fn(&[f64]) -> Complex64) -> Result<Field> {
    let grid = field.grid();
    let npts = grid.len();
    let nc = field.components();
    let spec = field.spectrum();
    let scale = spec.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let tiny = 1e-13 * scale.max(f64::MIN_POSITIVE);
    let mut out = vec![ZERO; spec.len()];
    for flat in 0..npts {
        let k = grid.frequency(flat);
        let s = symbol(&k[..grid.dim()]);
        if !(s.re.is_finite() && s.im.is_finite()) {
            if (0..nc).any(|c| spec[c * npts + flat].norm() > tiny) {
                return Err(Error::SymbolSingularity { frequency: k[..grid.dim()].to_vec() });
            }
            continue;
        }
        for c in 0..nc {
            out[c * npts + flat] = s * spec[c * npts + flat];
        }
    }
    Field::from_spectral(grid, nc, out)
}

/// Applies a real symbol tabulated per spectral index. The symbol must be
/// even (`s(-k) = s(k)`), as every radial symbol is.
pub fn apply_real_symbol(field: &Field, symbol: &[f64]) -> Field {
    let grid = field.grid();
    let npts = grid.len();
    assert_eq!(symbol.len(), npts, "symbol table does not match grid");
    let spec = field.spectrum();
    let out: Vec<Complex64> = spec.iter().enumerate().map(|(i, z)| z * symbol[i % npts]).collect();
    Field::from_hermitian(grid, field.components(), out)
}

/// Applies several even real symbols to one field, inverting in batches.
pub(crate) fn apply_real_symbols(field: &Field, symbols: &[Vec<f64>]) -> Vec<Field> {
    let grid = field.grid();
    let npts = grid.len();
    let spec = field.spectrum();
    let spectra = symbols
        .iter()
        .map(|symbol| {
            let out: Vec<Complex64> = spec.iter().enumerate().map(|(i, z)| z * symbol[i % npts]).collect();
            (field.components(), out)
        })
        .collect();
    Field::batch_from_hermitian(grid, spectra)
}

pub(crate) fn map_spectrum(
    field: &Field,
    out_components: usize,
    f: impl Fn(usize, &[f64; 3], &[Complex64], &mut [Complex64]),
) -> Field {
    let grid = field.grid();
    let npts = grid.len();
    let nc = field.components();
    let spec = field.spectrum();
    let kd_table = grid.derivative_table();
    let mut out = vec![ZERO; npts * out_components];
    let mut input = vec![ZERO; nc];
    let mut output = vec![ZERO; out_components];
    for flat in 0..npts {
        for c in 0..nc {
            input[c] = spec[c * npts + flat];
        }
        output.iter_mut().for_each(|o| *o = ZERO);
        f(flat, &kd_table[flat], &input, &mut output);
        for c in 0..out_components {
            out[c * npts + flat] = output[c];
        }
    }
    // Derivative symbols vanish at Nyquist, so real inputs stay Hermitian.
    Field::from_hermitian(grid, out_components, out)
}

fn require_components(field: &Field, expected: usize) -> Result<()> {
    if field.components() != expected {
        return Err(Error::ComponentMismatch { expected, got: field.components() });
    }
    Ok(())
}

/// `d/dx_axis` of every component.
pub fn partial(field: &Field, axis: usize) -> Field {
    let nc = field.components();
    map_spectrum(field, nc, |_, kd, inp, out| {
        for c in 0..nc {
            out[c] = I * kd[axis] * inp[c];
        }
    })
}

/// Gradient of a scalar field.
pub fn gradient(field: &Field) -> Result<Field> {
    require_components(field, 1)?;
    let dim = field.grid().dim();
    Ok(map_spectrum(field, dim, |_, kd, inp, out| {
        for j in 0..dim {
            out[j] = I * kd[j] * inp[0];
        }
    }))
}

/// Divergence of a vector field.
pub fn divergence(field: &Field) -> Result<Field> {
    let dim = field.grid().dim();
    require_components(field, dim)?;
    Ok(map_spectrum(field, 1, |_, kd, inp, out| {
        out[0] = (0..dim).map(|j| I * kd[j] * inp[j]).sum();
    }))
}

/// Laplacian of every component.
pub fn laplacian(field: &Field) -> Field {
    let nc = field.components();
    map_spectrum(field, nc, |_, kd, inp, out| {
        let k2 = kd[0] * kd[0] + kd[1] * kd[1] + kd[2] * kd[2];
        for c in 0..nc {
            out[c] = -k2 * inp[c];
        }
    })
}

/// `mu lap u + (lambda + mu) grad div u`.
pub fn lame_operator(field: &Field, visc: &ViscosityParams) -> Result<Field> {
    let dim = field.grid().dim();
    require_components(field, dim)?;
    let (mu, lm) = (visc.mu, visc.lambda + visc.mu);
    Ok(map_spectrum(field, dim, |_, kd, inp, out| {
        let k2: f64 = kd.iter().map(|k| k * k).sum();
        let kdotu: Complex64 = (0..dim).map(|j| kd[j] * inp[j]).sum();
        for j in 0..dim {
            out[j] = -mu * k2 * inp[j] - lm * kd[j] * kdotu;
        }
    }))
}

/// Inverse Laplacian on mean-free data: symbol `-1/|k|^2`, zero at `k = 0`.
pub fn inv_laplacian_mean_free(field: &Field) -> Field {
    let nc = field.components();
    map_spectrum(field, nc, |_, kd, inp, out| {
        let k2 = kd[0] * kd[0] + kd[1] * kd[1] + kd[2] * kd[2];
        if k2 > 0.0 {
            for c in 0..nc {
                out[c] = -inp[c] / k2;
            }
        }
    })
}

/// Gradient part of the Helmholtz decomposition, `grad lap^-1 div u`.
pub fn gradient_projection(field: &Field) -> Result<Field> {
    let dim = field.grid().dim();
    require_components(field, dim)?;
    Ok(map_spectrum(field, dim, |_, kd, inp, out| {
        let k2: f64 = kd.iter().map(|k| k * k).sum();
        if k2 > 0.0 {
            let kdotu: Complex64 = (0..dim).map(|j| kd[j] * inp[j]).sum();
            for j in 0..dim {
                out[j] = kd[j] * kdotu / k2;
            }
        }
    }))
}

/// `grad lap^-1 g` for a scalar `g` (mean discarded).
pub fn grad_inv_laplacian(field: &Field) -> Result<Field> {
    require_components(field, 1)?;
    let dim = field.grid().dim();
    Ok(map_spectrum(field, dim, |_, kd, inp, out| {
        let k2: f64 = kd.iter().map(|k| k * k).sum();
        if k2 > 0.0 {
            for j in 0..dim {
                out[j] = -I * kd[j] * inp[0] / k2;
            }
        }
    }))
}

/// Truncation to modes kept by the 2/3 rule.
pub fn dealias(field: &Field) -> Field {
    let mask = field.grid().dealias_table();
    let nc = field.components();
    map_spectrum(field, nc, |flat, _, inp, out| {
        if mask[flat] {
            out.copy_from_slice(inp);
        }
    })
}

/// `(v . grad) a` for a scalar or vector `a`; no dealiasing.
pub fn advect(v: &Field, a: &Field) -> Result<Field> {
    let grid = v.grid();
    let dim = grid.dim();
    require_components(v, dim)?;
    if v.grid() != a.grid() {
        return Err(Error::GridMismatch);
    }
    let mut acc = Field::zeros(grid, a.components());
    for j in 0..dim {
        let da = partial(a, j);
        let vj = v.component_field(j);
        acc = &acc + &(&vj * &da);
    }
    Ok(acc)
}

/// Pointwise product followed by the 2/3 truncation.
pub fn dealiased_product(a: &Field, b: &Field) -> Field {
    dealias(&(a * b))
}

/// Scalar symbol table `|k|` over the lattice (physical wavenumbers).
pub fn frequency_magnitudes(grid: &Grid) -> Vec<f64> {
    (0..grid.len()).map(|flat| grid.frequency(flat).iter().map(|k| k * k).sum::<f64>().sqrt()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid() -> Grid {
        Grid::periodic(2, 16).unwrap()
    }

    #[test]
    fn derivatives_of_trig_functions() {
        let g = grid();
        let f = Field::from_fn(&g, 1, |x, _| (2.0 * x[0]).sin() * (3.0 * x[1]).cos());
        let grad = gradient(&f).unwrap();
        let exact = Field::from_fn(&g, 2, |x, c| {
            if c == 0 {
                2.0 * (2.0 * x[0]).cos() * (3.0 * x[1]).cos()
            } else {
                -3.0 * (2.0 * x[0]).sin() * (3.0 * x[1]).sin()
            }
        });
        assert!(grad.max_abs_diff(&exact) < 1e-12);
        let lap = laplacian(&f);
        assert!(lap.max_abs_diff(&f.scale(-13.0)) < 1e-12);
    }

    #[test]
    fn lame_eigenvalues_split_by_polarization() {
        let g = grid();
        let visc = ViscosityParams::new(0.7, 0.4).unwrap();
        // Longitudinal: u = grad(cos(2x + y)).
        let long = Field::from_fn(&g, 2, |x, c| {
            let s = -(2.0 * x[0] + x[1]).sin();
            if c == 0 {
                2.0 * s
            } else {
                s
            }
        });
        let out = lame_operator(&long, &visc).unwrap();
        assert!(out.max_abs_diff(&long.scale(-visc.nu() * 5.0)) < 1e-12);
        // Transverse: u = perp grad(cos(2x + y)).
        let trans = Field::from_fn(&g, 2, |x, c| {
            let s = -(2.0 * x[0] + x[1]).sin();
            if c == 0 {
                -s
            } else {
                2.0 * s
            }
        });
        let out = lame_operator(&trans, &visc).unwrap();
        assert!(out.max_abs_diff(&trans.scale(-visc.mu * 5.0)) < 1e-12);
    }

    #[test]
    fn singular_symbol_is_reported_only_where_used() {
        let g = grid();
        let with_mean = Field::from_fn(&g, 1, |x, _| 1.0 + x[0].cos());
        let sym = |k: &[f64]| Complex64::new(-1.0 / (k[0] * k[0] + k[1] * k[1]), 0.0);
        assert!(matches!(apply_multiplier(&with_mean, sym), Err(Error::SymbolSingularity { .. })));
        let zero_mean = with_mean.mean_free();
        let out = apply_multiplier(&zero_mean, sym).unwrap();
        assert!(out.max_abs_diff(&Field::from_fn(&g, 1, |x, _| -x[0].cos())) < 1e-12);
    }

    #[test]
    fn dealias_removes_high_modes() {
        let g = grid();
        let f = Field::from_fn(&g, 1, |x, _| (2.0 * x[0]).cos() + (7.0 * x[1]).sin());
        let d = dealias(&f);
        assert!(d.max_abs_diff(&Field::from_fn(&g, 1, |x, _| (2.0 * x[0]).cos())) < 1e-13);
    }

    #[test]
    fn periods_other_than_two_pi() {
        let g = Grid::new(2, 16, &[1.0, 2.0]).unwrap();
        let f = Field::from_fn(&g, 1, |x, _| (2.0 * PI * x[0]).sin() + (PI * x[1]).cos());
        let dx = partial(&f, 0);
        let dy = partial(&f, 1);
        let ex = Field::from_fn(&g, 1, |x, _| 2.0 * PI * (2.0 * PI * x[0]).cos());
        let ey = Field::from_fn(&g, 1, |x, _| -PI * (PI * x[1]).sin());
        assert!(dx.max_abs_diff(&ex) < 1e-11);
        assert!(dy.max_abs_diff(&ey) < 1e-11);
    }
}
