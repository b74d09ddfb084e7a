use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Uniform periodic grid on the torus `prod_j [0, period_j)`.
///
/// Cheap to clone: plans and wavenumber tables are shared.
#[derive(Clone)]
pub struct Grid {
    inner: Arc<GridInner>,
}

struct GridInner {
    dim: usize,
    n: usize,
    period: [f64; 3],
    /// Signed integer mode for each index along an axis.
    modes: Vec<i64>,
    /// True wavenumbers `2 pi m / period` per axis.
    wavenumbers: [Vec<f64>; 3],
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// `log2(n)`, for index arithmetic by shifts.
    shift: u32,
    /// Per flat index: index of `-m`.
    mirror: Vec<u32>,
    /// Per flat index: differentiation wavenumber (zero at the Nyquist index).
    derivative_flat: Vec<[f64; 3]>,
    /// Per flat index: kept by the 2/3 rule.
    dealias_mask: Vec<bool>,
}

impl Grid {
    /// `dim` in {2, 3}, `n` a power of two >= 8, one period per axis.
    pub fn new(dim: usize, n: usize, period: &[f64]) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension must be 2 or 3, got {dim}")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("points per axis must be a power of two >= 8, got {n}")));
        }
        let period: Vec<f64> = match period.len() {
            1 => vec![period[0]; dim],
            l if l == dim => period.to_vec(),
            l => return Err(Error::InvalidGrid(format!("expected 1 or {dim} periods, got {l}"))),
        };
        if period.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
            return Err(Error::InvalidGrid("periods must be positive and finite".into()));
        }
        let mut per = [1.0; 3];
        per[..dim].copy_from_slice(&period);

        let half = (n / 2) as i64;
        let modes: Vec<i64> = (0..n as i64).map(|i| if i < half { i } else { i - n as i64 }).collect();
        let mk = |axis: usize, nyquist_zero: bool| -> Vec<f64> {
            if axis >= dim {
                return vec![0.0; n];
            }
            modes
                .iter()
                .map(|&m| if nyquist_zero && m == -half { 0.0 } else { 2.0 * PI * m as f64 / per[axis] })
                .collect()
        };
        let wavenumbers = [mk(0, false), mk(1, false), mk(2, false)];
        let derivative = [mk(0, true), mk(1, true), mk(2, true)];

        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let shift = n.trailing_zeros();
        let npts = n.pow(dim as u32);
        let limit = ((n - 1) / 3) as i64;
        let mut mirror = Vec::with_capacity(npts);
        let mut derivative_flat = Vec::with_capacity(npts);
        let mut dealias_mask = Vec::with_capacity(npts);
        for flat in 0..npts {
            let idx = split_index(flat, dim, shift, n);
            let mut m = 0usize;
            let mut kd = [0.0; 3];
            let mut keep = true;
            for axis in 0..dim {
                m = m * n + (n - idx[axis]) % n;
                kd[axis] = derivative[axis][idx[axis]];
                keep &= modes[idx[axis]].abs() <= limit;
            }
            mirror.push(m as u32);
            derivative_flat.push(kd);
            dealias_mask.push(keep);
        }
        Ok(Self {
            inner: Arc::new(GridInner {
                dim,
                n,
                period: per,
                modes,
                wavenumbers,
                forward,
                inverse,
                shift,
                mirror,
                derivative_flat,
                dealias_mask,
            }),
        })
    }

    /// Grid on `[0, 2 pi)^dim`.
    pub fn periodic(dim: usize, n: usize) -> Result<Self> {
        Self::new(dim, n, &[2.0 * PI])
    }

    pub fn dim(&self) -> usize {
        self.inner.dim
    }

    pub fn n(&self) -> usize {
        self.inner.n
    }

    /// Number of grid points, `n^dim`.
    pub fn len(&self) -> usize {
        self.inner.n.pow(self.inner.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn period(&self) -> &[f64] {
        &self.inner.period[..self.inner.dim]
    }

    pub fn volume(&self) -> f64 {
        self.period().iter().product()
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.inner.period[axis] / self.inner.n as f64
    }

    /// Row-major multi-index of a flat index (last axis fastest).
    pub fn multi_index(&self, flat: usize) -> [usize; 3] {
        split_index(flat, self.inner.dim, self.inner.shift, self.inner.n)
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().take(self.inner.dim).fold(0, |acc, &i| acc * self.inner.n + i)
    }

    /// Signed integer mode at a flat spectral index.
    pub fn mode(&self, flat: usize) -> [i64; 3] {
        let idx = self.multi_index(flat);
        let mut m = [0i64; 3];
        for axis in 0..self.inner.dim {
            m[axis] = self.inner.modes[idx[axis]];
        }
        m
    }

    /// Physical wavenumber `2 pi m / period`.
    pub fn frequency(&self, flat: usize) -> [f64; 3] {
        let idx = self.multi_index(flat);
        let mut k = [0.0; 3];
        for axis in 0..self.inner.dim {
            k[axis] = self.inner.wavenumbers[axis][idx[axis]];
        }
        k
    }

    /// Wavenumber used for differentiation (Nyquist components zeroed).
    pub fn derivative_frequency(&self, flat: usize) -> [f64; 3] {
        self.inner.derivative_flat[flat]
    }

    pub(crate) fn derivative_table(&self) -> &[[f64; 3]] {
        &self.inner.derivative_flat
    }

    pub(crate) fn mirror_table(&self) -> &[u32] {
        &self.inner.mirror
    }

    pub(crate) fn dealias_table(&self) -> &[bool] {
        &self.inner.dealias_mask
    }

    /// Index of the mode `-m`.
    pub fn mirror_index(&self, flat: usize) -> usize {
        self.inner.mirror[flat] as usize
    }

    /// Coordinates of grid point `flat`.
    pub fn point(&self, flat: usize) -> [f64; 3] {
        let idx = self.multi_index(flat);
        let mut x = [0.0; 3];
        for axis in 0..self.inner.dim {
            x[axis] = idx[axis] as f64 * self.spacing(axis);
        }
        x
    }

    /// Largest |m_j| kept by the 2/3 rule: `3 |m_j| < n`.
    pub fn dealias_limit(&self) -> i64 {
        ((self.inner.n - 1) / 3) as i64
    }

    pub fn is_dealiased_mode(&self, flat: usize) -> bool {
        self.inner.dealias_mask[flat]
    }

    /// Largest `|k|` on the lattice (the corner mode).
    pub fn max_frequency(&self) -> f64 {
        (0..self.inner.dim)
            .map(|axis| {
                let k = PI * self.inner.n as f64 / self.inner.period[axis];
                k * k
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Largest differentiation wavenumber along any axis.
    pub fn max_axis_wavenumber(&self) -> f64 {
        (0..self.inner.dim)
            .map(|axis| 2.0 * PI * (self.inner.n / 2 - 1) as f64 / self.inner.period[axis])
            .fold(0.0, f64::max)
    }

    pub(crate) fn forward_plan(&self) -> &Arc<dyn Fft<f64>> {
        &self.inner.forward
    }

    pub(crate) fn inverse_plan(&self) -> &Arc<dyn Fft<f64>> {
        &self.inner.inverse
    }

    /// Same grid with a different resolution.
    pub fn with_points(&self, n: usize) -> Result<Self> {
        Self::new(self.dim(), n, self.period())
    }
}

fn split_index(flat: usize, dim: usize, shift: u32, n: usize) -> [usize; 3] {
    let mut idx = [0usize; 3];
    for (axis, slot) in idx.iter_mut().enumerate().take(dim) {
        *slot = (flat >> (shift as usize * (dim - 1 - axis))) & (n - 1);
    }
    idx
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.dim == other.inner.dim
                && self.inner.n == other.inner.n
                && self.inner.period == other.inner.period)
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("dim", &self.inner.dim)
            .field("n", &self.inner.n)
            .field("period", &self.period())
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes() {
        assert!(Grid::periodic(1, 16).is_err());
        assert!(Grid::periodic(4, 16).is_err());
        assert!(Grid::periodic(2, 4).is_err());
        assert!(Grid::periodic(2, 24).is_err());
        assert!(Grid::new(2, 16, &[1.0, -1.0]).is_err());
        assert!(Grid::new(2, 16, &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn index_round_trip_and_mirror() {
        let g = Grid::periodic(3, 8).unwrap();
        for flat in 0..g.len() {
            let idx = g.multi_index(flat);
            assert_eq!(g.flat_index(&idx[..3]), flat);
            let m = g.mode(flat);
            let mm = g.mode(g.mirror_index(flat));
            for axis in 0..3 {
                // The Nyquist mode is its own mirror.
                assert!(m[axis] == -mm[axis] || m[axis] == -4);
            }
        }
    }

    #[test]
    fn wavenumbers_scale_with_period() {
        let g = Grid::new(2, 8, &[1.0, 2.0]).unwrap();
        let flat = g.flat_index(&[1, 1]);
        let k = g.frequency(flat);
        assert!((k[0] - 2.0 * PI).abs() < 1e-15);
        assert!((k[1] - PI).abs() < 1e-15);
        let nyq = g.flat_index(&[4, 0]);
        assert_eq!(g.derivative_frequency(nyq)[0], 0.0);
        assert!(g.frequency(nyq)[0] < 0.0);
    }
}
