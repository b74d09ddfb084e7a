use crate::error::{Error, Result};
use crate::spectral::Field;

/// Fields sampled at uniformly spaced times `t0 + i dt`.
#[derive(Debug, Clone)]
pub struct TimeSeries {
    pub t0: f64,
    pub dt: f64,
    pub frames: Vec<Field>,
}

impl TimeSeries {
    pub fn new(t0: f64, dt: f64, frames: Vec<Field>) -> Result<Self> {
        let first = frames.first().ok_or(Error::EmptySeries)?;
        if frames.len() > 1 && !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidParameter(format!("time step must be positive, got {dt}")));
        }
        for f in &frames[1..] {
            first.check_same_shape(f)?;
        }
        Ok(Self { t0, dt, frames })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.time(i)).collect()
    }

    pub fn final_time(&self) -> f64 {
        self.time(self.len().saturating_sub(1))
    }

    pub fn first(&self) -> &Field {
        &self.frames[0]
    }

    pub fn last(&self) -> &Field {
        self.frames.last().expect("non-empty by construction")
    }

    /// Piecewise-linear interpolation in time, clamped to the sampled window.
    pub fn at(&self, t: f64) -> Field {
        if self.len() == 1 {
            return self.frames[0].clone();
        }
        let s = ((t - self.t0) / self.dt).clamp(0.0, (self.len() - 1) as f64);
        let i = (s.floor() as usize).min(self.len() - 2);
        let w = s - i as f64;
        if w == 0.0 {
            return self.frames[i].clone();
        }
        if w == 1.0 {
            return self.frames[i + 1].clone();
        }
        self.frames[i].zip_map(&self.frames[i + 1], |a, b| (1.0 - w) * a + w * b)
    }

    /// Applies `f` frame by frame.
    pub fn map(&self, f: impl Fn(&Field) -> Field) -> TimeSeries {
        TimeSeries { t0: self.t0, dt: self.dt, frames: self.frames.iter().map(f).collect() }
    }
}

/// Time-dependent input to a solver.
#[derive(Clone, Copy)]
pub enum TimeInput<'a> {
    Zero,
    Steady(&'a Field),
    Series(&'a TimeSeries),
    Function(&'a (dyn Fn(f64) -> Field + Sync)),
}

impl TimeInput<'_> {
    /// Value at time `t`, `None` for [`TimeInput::Zero`].
    pub fn eval(&self, t: f64) -> Option<Field> {
        match self {
            TimeInput::Zero => None,
            TimeInput::Steady(f) => Some((*f).clone()),
            TimeInput::Series(s) => Some(s.at(t)),
            TimeInput::Function(f) => Some(f(t)),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, TimeInput::Zero)
    }
}

/// Composite trapezoid weights for `len` uniform samples.
pub fn trapezoid_weights(len: usize, dt: f64) -> Vec<f64> {
    match len {
        0 => vec![],
        1 => vec![0.0],
        _ => (0..len).map(|i| if i == 0 || i + 1 == len { 0.5 * dt } else { dt }).collect(),
    }
}

/// `(int |g|^rho dt)^(1/rho)` by the trapezoid rule; `rho = inf` is the max.
pub fn time_norm(values: &[f64], dt: f64, rho: f64) -> f64 {
    if rho.is_infinite() {
        return values.iter().fold(0.0, |m, v| m.max(v.abs()));
    }
    let w = trapezoid_weights(values.len(), dt);
    w.iter().zip(values).map(|(w, v)| w * v.abs().powf(rho)).sum::<f64>().powf(1.0 / rho)
}

/// Running trapezoid integral, starting at zero.
pub fn cumulative_trapezoid(values: &[f64], dt: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            acc += 0.5 * dt * (values[i - 1] + v);
        }
        out.push(acc);
    }
    out
}
