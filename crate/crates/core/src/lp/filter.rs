use std::ops::RangeInclusive;

use crate::error::{Error, Result};
use crate::spectral::ops::{apply_real_symbols, frequency_magnitudes};
use crate::spectral::{apply_real_symbol, Field, Grid};

pub const DEFAULT_ALPHA: f64 = 8.0 / 7.0;

/// Radial cut-off: 1 on `[0, 1/alpha]`, 0 on `[alpha, inf)`, smooth and
/// non-increasing in between.
pub fn chi(r: f64, alpha: f64) -> f64 {
    let lo = 1.0 / alpha;
    if r <= lo {
        return 1.0;
    }
    if r >= alpha {
        return 0.0;
    }
    let t = (r - lo) / (alpha - lo);
    1.0 - smoothstep(t)
}

/// C-infinity transition from 0 at `t = 0` to 1 at `t = 1`.
fn smoothstep(t: f64) -> f64 {
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    a / (a + b)
}

/// Annulus profile `phi(r) = chi(r/2) - chi(r)`.
pub fn phi(r: f64, alpha: f64) -> f64 {
    chi(0.5 * r, alpha) - chi(r, alpha)
}

/// Smooth dyadic partition of unity tabulated on a grid's lattice.
///
/// Level `-1` is the low-frequency block `chi(D)`; level `l >= 0` is
/// `phi(2^-l D)`. The top level is the smallest one whose cumulative symbol
/// equals one on every lattice mode, so `sum_l Delta_l u = u` exactly.
#[derive(Debug, Clone)]
pub struct DyadicFilterBank {
    grid: Grid,
    alpha: f64,
    max_level: i32,
    /// `symbols[l + 1]` is the symbol of level `l`.
    symbols: Vec<Vec<f64>>,
}

impl DyadicFilterBank {
    /// `alpha` must lie in `(1, sqrt 2)`; wider annuli overlap beyond neighbours.
    pub fn new(grid: &Grid, alpha: f64) -> Result<Self> {
        if !(alpha > 1.0 && alpha < std::f64::consts::SQRT_2) {
            return Err(Error::InvalidParameter(format!("alpha must lie in (1, sqrt 2), got {alpha}")));
        }
        let kmax = grid.max_frequency();
        // Largest l whose annulus starts strictly inside the lattice.
        let mut max_level = -1;
        while (2f64).powi(max_level + 1) / alpha < kmax {
            max_level += 1;
        }
        if max_level < 1 {
            return Err(Error::GridTooSmall { max_level });
        }
        let mags = frequency_magnitudes(grid);
        let mut symbols = Vec::with_capacity(max_level as usize + 2);
        symbols.push(mags.iter().map(|&r| chi(r, alpha)).collect());
        for l in 0..=max_level {
            let scale = (2f64).powi(-l);
            symbols.push(mags.iter().map(|&r| phi(r * scale, alpha)).collect());
        }
        Ok(Self { grid: grid.clone(), alpha, max_level, symbols })
    }

    pub fn with_default_alpha(grid: &Grid) -> Result<Self> {
        Self::new(grid, DEFAULT_ALPHA)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn max_level(&self) -> i32 {
        self.max_level
    }

    pub fn levels(&self) -> RangeInclusive<i32> {
        -1..=self.max_level
    }

    pub fn level_count(&self) -> usize {
        self.symbols.len()
    }

    /// Symbol of level `l`, `None` outside `-1..=max_level`.
    pub fn symbol(&self, l: i32) -> Option<&[f64]> {
        if l < -1 || l > self.max_level {
            return None;
        }
        Some(&self.symbols[(l + 1) as usize])
    }

    /// `Delta_l u`; zero for levels outside the bank.
    pub fn block(&self, u: &Field, l: i32) -> Field {
        match self.symbol(l) {
            Some(s) => apply_real_symbol(u, s),
            None => Field::zeros(u.grid(), u.components()),
        }
    }

    /// All blocks from level `-1` to the top.
    pub fn blocks(&self, u: &Field) -> Vec<Field> {
        apply_real_symbols(u, &self.symbols)
    }

    /// Symbol of `S_l = sum_{k <= l-1} Delta_k`.
    pub fn low_pass_symbol(&self, l: i32) -> Vec<f64> {
        let mut acc = vec![0.0; self.grid.len()];
        for k in -1..l.min(self.max_level + 1) {
            for (a, s) in acc.iter_mut().zip(&self.symbols[(k + 1) as usize]) {
                *a += s;
            }
        }
        acc
    }

    /// `S_l u`.
    pub fn low_pass(&self, u: &Field, l: i32) -> Field {
        if l <= -1 {
            return Field::zeros(u.grid(), u.components());
        }
        apply_real_symbol(u, &self.low_pass_symbol(l))
    }

    /// Partial sums `S_{q-1} u` for `q` in `-1..=max_level`, built incrementally.
    pub fn low_pass_ladder(&self, blocks: &[Field]) -> Vec<Field> {
        let mut out = Vec::with_capacity(blocks.len());
        let mut acc = Field::zeros(blocks[0].grid(), blocks[0].components());
        // S_{q-1} for q = -1 and q = 0 both vanish.
        for q in -1..=self.max_level {
            if q >= 1 {
                acc = &acc + &blocks[(q - 1) as usize];
            }
            out.push(acc.clone());
        }
        out
    }

    /// `Lp` norm of every block.
    pub fn level_norms(&self, u: &Field, p: f64) -> LevelProfile {
        LevelProfile { p, norms: self.blocks(u).iter().map(|b| b.lp_norm(p)).collect() }
    }
}

/// Free-function form of [`DyadicFilterBank::block`].
pub fn dyadic_block(u: &Field, l: i32, bank: &DyadicFilterBank) -> Field {
    bank.block(u, l)
}

/// Free-function form of [`DyadicFilterBank::low_pass`].
pub fn low_pass(u: &Field, l: i32, bank: &DyadicFilterBank) -> Field {
    bank.low_pass(u, l)
}

/// Per-level `Lp` norms of one field, index `l + 1` for level `l`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelProfile {
    pub p: f64,
    pub norms: Vec<f64>,
}

impl LevelProfile {
    pub fn level(&self, index: usize) -> i32 {
        index as i32 - 1
    }

    /// `2^{ls} ||Delta_l u||_p` per level.
    pub fn weighted(&self, s: f64) -> Vec<f64> {
        weight_levels(&self.norms, s)
    }

    /// Besov norm assembled from the profile.
    pub fn besov(&self, s: f64, r: f64) -> f64 {
        lr_norm(&self.weighted(s), r)
    }
}

pub fn weight_levels(norms: &[f64], s: f64) -> Vec<f64> {
    norms.iter().enumerate().map(|(i, n)| (2f64).powf((i as f64 - 1.0) * s) * n).collect()
}

/// `l^r` norm of a sequence; `r = inf` is the max.
pub fn lr_norm(values: &[f64], r: f64) -> f64 {
    if r.is_infinite() {
        values.iter().fold(0.0, |m, v| m.max(v.abs()))
    } else if r == 1.0 {
        values.iter().map(|v| v.abs()).sum()
    } else {
        values.iter().map(|v| v.abs().powf(r)).sum::<f64>().powf(1.0 / r)
    }
}
