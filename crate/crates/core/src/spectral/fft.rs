//! Separable N-dimensional complex FFT over one component.
//!
//! Normalization: the forward transform carries `1/n^dim`, so a constant
//! field `c` has zero-mode coefficient `c`.

use num_complex::Complex64;

use super::grid::Grid;

pub(crate) fn forward_in_place(grid: &Grid, data: &mut [Complex64]) {
    transform_axes(grid, data, false);
    let scale = 1.0 / grid.len() as f64;
    for z in data.iter_mut() {
        *z *= scale;
    }
}

pub(crate) fn inverse_in_place(grid: &Grid, data: &mut [Complex64]) {
    transform_axes(grid, data, true);
}

fn transform_axes(grid: &Grid, data: &mut [Complex64], inverse: bool) {
    let n = grid.n();
    let dim = grid.dim();
    debug_assert_eq!(data.len(), grid.len());
    let plan = if inverse { grid.inverse_plan() } else { grid.forward_plan() };
    let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];

    // Last axis: lanes are contiguous.
    plan.process_with_scratch(data, &mut scratch);

    // Remaining axes: each outer block is an (n x stride) matrix whose columns
    // are lanes; transpose, transform rows, transpose back.
    let mut lanes = vec![Complex64::new(0.0, 0.0); data.len()];
    for axis in (0..dim - 1).rev() {
        let stride = n.pow((dim - 1 - axis) as u32);
        let block = stride * n;
        for (src, dst) in data.chunks_exact(block).zip(lanes.chunks_exact_mut(block)) {
            transpose(src, dst, n, stride);
        }
        plan.process_with_scratch(&mut lanes, &mut scratch);
        for (src, dst) in lanes.chunks_exact(block).zip(data.chunks_exact_mut(block)) {
            transpose(src, dst, stride, n);
        }
    }
}

/// Cache-blocked transpose of a `rows x cols` row-major matrix.
fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    const TILE: usize = 16;
    for r0 in (0..rows).step_by(TILE) {
        for c0 in (0..cols).step_by(TILE) {
            for r in r0..(r0 + TILE).min(rows) {
                for c in c0..(c0 + TILE).min(cols) {
                    dst[c * rows + r] = src[r * cols + c];
                }
            }
        }
    }
}

/// Spectra of two real signals from one complex transform of `a + i b`.
pub(crate) fn forward_real_pair(grid: &Grid, a: &[f64], b: Option<&[f64]>) -> (Vec<Complex64>, Option<Vec<Complex64>>) {
    let mut buf: Vec<Complex64> = match b {
        Some(b) => a.iter().zip(b).map(|(&x, &y)| Complex64::new(x, y)).collect(),
        None => a.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
    };
    forward_in_place(grid, &mut buf);
    if b.is_none() {
        return (buf, None);
    }
    let mirror = grid.mirror_table();
    let mut sa = vec![Complex64::new(0.0, 0.0); buf.len()];
    let mut sb = vec![Complex64::new(0.0, 0.0); buf.len()];
    for k in 0..buf.len() {
        let z = buf[k];
        let zm = buf[mirror[k] as usize].conj();
        sa[k] = (z + zm) * 0.5;
        // (z - zm) / (2i)
        let d = (z - zm) * 0.5;
        sb[k] = Complex64::new(d.im, -d.re);
    }
    (sa, Some(sb))
}

/// Real signals of one or two Hermitian spectra from one complex transform.
pub(crate) fn inverse_hermitian_pair(
    grid: &Grid,
    a: &[Complex64],
    b: Option<&[Complex64]>,
) -> (Vec<f64>, Option<Vec<f64>>) {
    let mut buf: Vec<Complex64> = match b {
        Some(b) => a.iter().zip(b).map(|(x, y)| x + Complex64::new(-y.im, y.re)).collect(),
        None => a.to_vec(),
    };
    inverse_in_place(grid, &mut buf);
    let re = buf.iter().map(|z| z.re).collect();
    let im = b.map(|_| buf.iter().map(|z| z.im).collect());
    (re, im)
}

/// Replaces coefficients by their Hermitian-symmetric part.
pub(crate) fn symmetrize(grid: &Grid, data: &mut [Complex64]) {
    let table = grid.mirror_table();
    for flat in 0..data.len() {
        let mirror = table[flat] as usize;
        if mirror < flat {
            continue;
        }
        if mirror == flat {
            data[flat] = Complex64::new(data[flat].re, 0.0);
        } else {
            let a = data[flat];
            let b = data[mirror];
            let s = (a + b.conj()) * 0.5;
            data[flat] = s;
            data[mirror] = s.conj();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn naive_dft(grid: &Grid, data: &[Complex64]) -> Vec<Complex64> {
        let n = grid.n();
        let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
        for (kf, o) in out.iter_mut().enumerate() {
            let kidx = grid.multi_index(kf);
            for (xf, v) in data.iter().enumerate() {
                let xidx = grid.multi_index(xf);
                let phase: f64 = (0..grid.dim()).map(|a| (kidx[a] * xidx[a]) as f64).sum::<f64>() * 2.0 * PI / n as f64;
                *o += v * Complex64::from_polar(1.0, -phase);
            }
            *o /= data.len() as f64;
        }
        out
    }

    #[test]
    fn matches_naive_dft_in_2d_and_3d() {
        for dim in [2, 3] {
            let grid = Grid::periodic(dim, 8).unwrap();
            let data: Vec<Complex64> =
                (0..grid.len()).map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos())).collect();
            let mut fast = data.clone();
            forward_in_place(&grid, &mut fast);
            let slow = naive_dft(&grid, &data);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).norm() < 1e-12);
            }
            inverse_in_place(&grid, &mut fast);
            for (a, b) in fast.iter().zip(&data) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn packed_pairs_match_single_transforms() {
        let grid = Grid::periodic(2, 16).unwrap();
        let a: Vec<f64> = (0..grid.len()).map(|i| (i as f64 * 0.37).sin()).collect();
        let b: Vec<f64> = (0..grid.len()).map(|i| (i as f64 * 0.11).cos() + 0.5).collect();
        let (sa, sb) = forward_real_pair(&grid, &a, Some(&b));
        let (ra, _) = forward_real_pair(&grid, &a, None);
        let (rb, _) = forward_real_pair(&grid, &b, None);
        let sb = sb.unwrap();
        for k in 0..grid.len() {
            assert!((sa[k] - ra[k]).norm() < 1e-14);
            assert!((sb[k] - rb[k]).norm() < 1e-14);
        }
        let (xa, xb) = inverse_hermitian_pair(&grid, &sa, Some(&sb));
        let xb = xb.unwrap();
        for k in 0..grid.len() {
            assert!((xa[k] - a[k]).abs() < 1e-13);
            assert!((xb[k] - b[k]).abs() < 1e-13);
        }
    }
}
