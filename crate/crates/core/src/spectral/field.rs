use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use num_complex::Complex64;

use super::fft;
use super::grid::Grid;
use crate::error::{Error, Result};

/// Real scalar or vector field sampled on a [`Grid`].
///
/// Values are stored component-major; each component is row-major with the
/// last axis fastest. The spectrum is computed on first use and cached.
#[derive(Clone)]
pub struct Field {
    grid: Grid,
    components: usize,
    values: Vec<f64>,
    spectrum: OnceLock<Vec<Complex64>>,
}

impl Field {
    pub fn zeros(grid: &Grid, components: usize) -> Self {
        Self::constant(grid, components, 0.0)
    }

    pub fn constant(grid: &Grid, components: usize, value: f64) -> Self {
        Self::raw(grid.clone(), components, vec![value; grid.len() * components.max(1)])
    }

    pub fn from_values(grid: &Grid, components: usize, values: Vec<f64>) -> Result<Self> {
        if components == 0 {
            return Err(Error::InvalidParameter("a field needs at least one component".into()));
        }
        if values.len() != grid.len() * components {
            return Err(Error::InvalidParameter(format!(
                "expected {} samples, got {}",
                grid.len() * components,
                values.len()
            )));
        }
        Ok(Self::raw(grid.clone(), components, values))
    }

    /// Samples `f(x, component)` at every grid point.
    pub fn from_fn(grid: &Grid, components: usize, f: impl Fn(&[f64], usize) -> f64) -> Self {
        let npts = grid.len();
        let dim = grid.dim();
        let mut values = vec![0.0; npts * components];
        for flat in 0..npts {
            let x = grid.point(flat);
            for c in 0..components {
                values[c * npts + flat] = f(&x[..dim], c);
            }
        }
        Self::raw(grid.clone(), components, values)
    }

    /// Builds a real field from coefficients. The Hermitian part is kept, so
    /// the stored spectrum is exactly the spectrum of the returned field up to
    /// round-off.
    pub fn from_spectral(grid: &Grid, components: usize, mut coeffs: Vec<Complex64>) -> Result<Self> {
        let npts = grid.len();
        if components == 0 || coeffs.len() != npts * components {
            return Err(Error::InvalidParameter(format!(
                "expected {} coefficients, got {}",
                npts * components,
                coeffs.len()
            )));
        }
        for block in coeffs.chunks_exact_mut(npts) {
            fft::symmetrize(grid, block);
        }
        Ok(Self::from_hermitian(grid, components, coeffs))
    }

    /// Like [`Field::from_spectral`] for coefficients already known to be
    /// Hermitian (real even or odd symbols applied to a real field).
    pub(crate) fn from_hermitian(grid: &Grid, components: usize, coeffs: Vec<Complex64>) -> Self {
        Self::batch_from_hermitian(grid, vec![(components, coeffs)]).pop().expect("one field")
    }

    /// Inverts several Hermitian spectra, packing components two per transform.
    pub(crate) fn batch_from_hermitian(grid: &Grid, spectra: Vec<(usize, Vec<Complex64>)>) -> Vec<Field> {
        let npts = grid.len();
        let slots: Vec<(usize, usize)> =
            spectra.iter().enumerate().flat_map(|(f, (nc, _))| (0..*nc).map(move |c| (f, c))).collect();
        let mut values: Vec<Vec<f64>> = spectra.iter().map(|(nc, _)| vec![0.0; nc * npts]).collect();
        for pair in slots.chunks(2) {
            let (fa, ca) = pair[0];
            let a = &spectra[fa].1[ca * npts..(ca + 1) * npts];
            let b = pair.get(1).map(|&(fb, cb)| &spectra[fb].1[cb * npts..(cb + 1) * npts]);
            let (ra, rb) = fft::inverse_hermitian_pair(grid, a, b);
            values[fa][ca * npts..(ca + 1) * npts].copy_from_slice(&ra);
            if let (Some(rb), Some(&(fb, cb))) = (rb, pair.get(1)) {
                values[fb][cb * npts..(cb + 1) * npts].copy_from_slice(&rb);
            }
        }
        spectra
            .into_iter()
            .zip(values)
            .map(|((nc, coeffs), vals)| {
                let f = Self::raw(grid.clone(), nc, vals);
                let _ = f.spectrum.set(coeffs);
                f
            })
            .collect()
    }

    /// Stacks scalar fields into a vector field.
    pub fn from_components(parts: &[Field]) -> Result<Self> {
        let first = parts.first().ok_or(Error::InvalidParameter("no components".into()))?;
        let mut values = Vec::with_capacity(first.grid.len() * parts.len());
        for p in parts {
            if p.grid != first.grid {
                return Err(Error::GridMismatch);
            }
            if p.components != 1 {
                return Err(Error::ComponentMismatch { expected: 1, got: p.components });
            }
            values.extend_from_slice(&p.values);
        }
        Ok(Self::raw(first.grid.clone(), parts.len(), values))
    }

    fn raw(grid: Grid, components: usize, values: Vec<f64>) -> Self {
        Self { grid, components, values, spectrum: OnceLock::new() }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn is_scalar(&self) -> bool {
        self.components == 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn component(&self, c: usize) -> &[f64] {
        let npts = self.grid.len();
        &self.values[c * npts..(c + 1) * npts]
    }

    pub fn component_field(&self, c: usize) -> Field {
        let f = Self::raw(self.grid.clone(), 1, self.component(c).to_vec());
        if let Some(s) = self.spectrum.get() {
            let npts = self.grid.len();
            let _ = f.spectrum.set(s[c * npts..(c + 1) * npts].to_vec());
        }
        f
    }

    /// Normalized Fourier coefficients of all components.
    pub fn spectrum(&self) -> &[Complex64] {
        self.spectrum.get_or_init(|| {
            let mut out = Vec::with_capacity(self.values.len());
            let mut c = 0;
            while c < self.components {
                let b = (c + 1 < self.components).then(|| self.component(c + 1));
                let (sa, sb) = fft::forward_real_pair(&self.grid, self.component(c), b);
                out.extend_from_slice(&sa);
                if let Some(sb) = sb {
                    out.extend_from_slice(&sb);
                }
                c += 2;
            }
            out
        })
    }

    pub fn spectrum_component(&self, c: usize) -> &[Complex64] {
        let npts = self.grid.len();
        &self.spectrum()[c * npts..(c + 1) * npts]
    }

    pub fn has_cached_spectrum(&self) -> bool {
        self.spectrum.get().is_some()
    }

    /// Trigonometric interpolant of component `c` at an arbitrary point.
    pub fn evaluate_at(&self, x: &[f64], c: usize) -> f64 {
        let spec = self.spectrum_component(c);
        let mut acc = 0.0;
        for (flat, z) in spec.iter().enumerate() {
            if z.norm_sqr() == 0.0 {
                continue;
            }
            let k = self.grid.frequency(flat);
            let phase: f64 = (0..self.grid.dim()).map(|a| k[a] * x[a]).sum();
            let m = self.grid.mode(flat);
            let nyq = -(self.grid.n() as i64) / 2;
            if m.iter().take(self.grid.dim()).any(|&mi| mi == nyq) {
                // Real part of a Nyquist term is ambiguous; use the cosine.
                acc += z.re * phase.cos();
            } else {
                acc += (z * Complex64::from_polar(1.0, phase)).re;
            }
        }
        acc
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Self::raw(self.grid.clone(), self.components, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Pointwise combination of two fields with identical shape.
    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Field {
        self.assert_same_shape(other);
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Self::raw(self.grid.clone(), self.components, values)
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &Field) -> Field {
        self.zip_map(other, |a, b| a + s * b)
    }

    pub fn scale(&self, s: f64) -> Field {
        self.map(|v| s * v)
    }

    /// Euclidean dot product of two vector fields (scalar result).
    pub fn dot(&self, other: &Field) -> Field {
        self.assert_same_shape(other);
        let npts = self.grid.len();
        let mut out = vec![0.0; npts];
        for c in 0..self.components {
            for (o, (a, b)) in out.iter_mut().zip(self.component(c).iter().zip(other.component(c))) {
                *o += a * b;
            }
        }
        Self::raw(self.grid.clone(), 1, out)
    }

    /// Pointwise Euclidean magnitude.
    pub fn magnitude(&self) -> Field {
        if self.components == 1 {
            return self.map(f64::abs);
        }
        self.dot(self).map(f64::sqrt)
    }

    pub fn max_abs(&self) -> f64 {
        self.magnitude().values.iter().fold(0.0, |m, &v| m.max(v))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self, c: usize) -> f64 {
        let comp = self.component(c);
        comp.iter().sum::<f64>() / comp.len() as f64
    }

    pub fn integral(&self, c: usize) -> f64 {
        self.mean(c) * self.grid.volume()
    }

    /// `(int |f|^p)^(1/p)` with the pointwise Euclidean magnitude; `p = inf` is the max.
    pub fn lp_norm(&self, p: f64) -> f64 {
        let npts = self.grid.len();
        let sq = |i: usize| -> f64 { (0..self.components).map(|c| self.values[c * npts + i].powi(2)).sum() };
        let vol = self.grid.volume() / npts as f64;
        if self.components == 1 {
            let v = &self.values;
            return if p.is_infinite() {
                v.iter().fold(0.0, |m, x| m.max(x.abs()))
            } else if p == 2.0 {
                (v.iter().map(|x| x * x).sum::<f64>() * vol).sqrt()
            } else if p == 1.0 {
                v.iter().map(|x| x.abs()).sum::<f64>() * vol
            } else {
                (v.iter().map(|x| x.abs().powf(p)).sum::<f64>() * vol).powf(1.0 / p)
            };
        }
        if p.is_infinite() {
            (0..npts).map(sq).fold(0.0, f64::max).sqrt()
        } else if p == 2.0 {
            ((0..npts).map(sq).sum::<f64>() * vol).sqrt()
        } else {
            ((0..npts).map(|i| sq(i).powf(0.5 * p)).sum::<f64>() * vol).powf(1.0 / p)
        }
    }

    /// Removes the mean of each component.
    pub fn mean_free(&self) -> Field {
        let npts = self.grid.len();
        let mut values = self.values.clone();
        for c in 0..self.components {
            let m = self.mean(c);
            for v in &mut values[c * npts..(c + 1) * npts] {
                *v -= m;
            }
        }
        Self::raw(self.grid.clone(), self.components, values)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Largest pointwise difference.
    pub fn max_abs_diff(&self, other: &Field) -> f64 {
        self.assert_same_shape(other);
        self.values.iter().zip(&other.values).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn same_shape(&self, other: &Field) -> bool {
        self.grid == other.grid && self.components == other.components
    }

    pub fn check_same_shape(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        if self.components != other.components {
            return Err(Error::ComponentMismatch { expected: self.components, got: other.components });
        }
        Ok(())
    }

    fn assert_same_shape(&self, other: &Field) {
        assert!(self.grid == other.grid, "fields live on different grids");
        assert_eq!(self.components, other.components, "component counts differ");
    }
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("grid", &self.grid)
            .field("components", &self.components)
            .field("max_abs", &self.max_abs())
            .finish()
    }
}

impl Add for &Field {
    type Output = Field;
    fn add(self, rhs: &Field) -> Field {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl Sub for &Field {
    type Output = Field;
    fn sub(self, rhs: &Field) -> Field {
        self.zip_map(rhs, |a, b| a - b)
    }
}

impl Neg for &Field {
    type Output = Field;
    fn neg(self) -> Field {
        self.map(|v| -v)
    }
}

impl Mul<f64> for &Field {
    type Output = Field;
    fn mul(self, rhs: f64) -> Field {
        self.scale(rhs)
    }
}

/// Pointwise product. A scalar factor broadcasts over the components of the other.
impl Mul for &Field {
    type Output = Field;
    fn mul(self, rhs: &Field) -> Field {
        assert!(self.grid == rhs.grid, "fields live on different grids");
        let npts = self.grid.len();
        match (self.components, rhs.components) {
            (a, b) if a == b => self.zip_map(rhs, |x, y| x * y),
            (1, b) => {
                let mut values = rhs.values.clone();
                for c in 0..b {
                    for (v, s) in values[c * npts..(c + 1) * npts].iter_mut().zip(&self.values) {
                        *v *= s;
                    }
                }
                Field::raw(self.grid.clone(), b, values)
            }
            (_, 1) => rhs * self,
            (a, b) => panic!("cannot multiply fields with {a} and {b} components"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_has_exact_zero_mode() {
        let g = Grid::periodic(2, 8).unwrap();
        let f = Field::constant(&g, 1, 3.5);
        let s = f.spectrum();
        assert!((s[0].re - 3.5).abs() < 1e-15);
        assert!(s[1..].iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn lp_norm_of_constant() {
        let g = Grid::new(2, 8, &[2.0, 3.0]).unwrap();
        let f = Field::constant(&g, 1, 2.0);
        assert!((f.lp_norm(2.0) - (4.0f64 * 6.0).sqrt()).abs() < 1e-13);
        assert!((f.lp_norm(f64::INFINITY) - 2.0).abs() < 1e-15);
        assert!((f.lp_norm(1.0) - 12.0).abs() < 1e-13);
    }

    #[test]
    fn broadcast_product() {
        let g = Grid::periodic(2, 8).unwrap();
        let s = Field::constant(&g, 1, 2.0);
        let v = Field::from_fn(&g, 2, |_, c| c as f64 + 1.0);
        let p = &s * &v;
        assert_eq!(p.components(), 2);
        assert_eq!(p.component(1)[5], 4.0);
        let q = &v * &s;
        assert_eq!(q.component(0)[3], 2.0);
    }

    #[test]
    fn evaluate_at_interpolates_a_trig_polynomial() {
        let g = Grid::periodic(2, 16).unwrap();
        let f = Field::from_fn(&g, 1, |x, _| (3.0 * x[0]).sin() * (2.0 * x[1]).cos() + 0.5);
        let x = [0.123f64, 2.5];
        let exact = (3.0 * x[0]).sin() * (2.0 * x[1]).cos() + 0.5;
        assert!((f.evaluate_at(&x, 0) - exact).abs() < 1e-13);
    }
}
