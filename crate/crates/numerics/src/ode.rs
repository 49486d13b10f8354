//! Adaptive classical Runge–Kutta with step-doubling error control.
//!
//! Every step is taken once with `h` and once as two steps of `h/2`; the
//! difference estimates the local error, and the accepted value is the
//! Richardson-extrapolated combination of the two.

use num_complex::Complex64;

use crate::error::{NumericsError, Result};

/// Tolerances and limits for [`integrate`].
#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    /// Relative local tolerance per step.
    pub tol: f64,
    /// Smallest admissible step, relative to the interval length.
    pub min_step: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            min_step: 1e-14,
        }
    }
}

/// Bookkeeping returned by [`integrate`].
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    /// Largest accepted local error estimate (relative).
    pub max_error: f64,
}

impl OdeStats {
    pub fn merge(&mut self, o: &OdeStats) {
        self.accepted += o.accepted;
        self.rejected += o.rejected;
        self.max_error = self.max_error.max(o.max_error);
    }
}

fn axpy<const D: usize>(y: &[Complex64; D], h: f64, k: &[Complex64; D]) -> [Complex64; D] {
    std::array::from_fn(|i| y[i] + k[i] * h)
}

fn rk4_step<const D: usize, F>(f: &F, t: f64, y: &[Complex64; D], h: f64) -> [Complex64; D]
where
    F: Fn(f64, &[Complex64; D]) -> [Complex64; D],
{
    let k1 = f(t, y);
    let k2 = f(t + h / 2.0, &axpy(y, h / 2.0, &k1));
    let k3 = f(t + h / 2.0, &axpy(y, h / 2.0, &k2));
    let k4 = f(t + h, &axpy(y, h, &k3));
    std::array::from_fn(|i| y[i] + (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0))
}

fn sup<const D: usize>(y: &[Complex64; D]) -> f64 {
    y.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Integrates `y′ = f(t, y)` from `t0` to `t1` (either direction) and
/// returns `y(t1)`.
///
/// `h0` is the first trial step magnitude; the step is adapted from there.
pub fn integrate<const D: usize, F>(
    f: &F,
    t0: f64,
    t1: f64,
    y0: [Complex64; D],
    h0: f64,
    opts: &OdeOptions,
) -> Result<([Complex64; D], OdeStats)>
where
    F: Fn(f64, &[Complex64; D]) -> [Complex64; D],
{
    let span = t1 - t0;
    let dir = span.signum();
    let mut stats = OdeStats::default();
    if span == 0.0 {
        return Ok((y0, stats));
    }
    let hmin = opts.min_step * span.abs().max(1.0);
    let mut h = h0.abs().min(span.abs()).max(hmin);
    let (mut t, mut y) = (t0, y0);
    while (t1 - t) * dir > 0.0 {
        let last = h >= (t1 - t).abs();
        let step = if last { t1 - t } else { dir * h };
        let full = rk4_step(f, t, &y, step);
        let half = rk4_step(f, t, &y, step / 2.0);
        let two = rk4_step(f, t + step / 2.0, &half, step / 2.0);
        let scale = sup(&y).max(sup(&two)).max(f64::MIN_POSITIVE);
        let diff: [Complex64; D] = std::array::from_fn(|i| two[i] - full[i]);
        let err = sup(&diff) / 15.0 / scale;
        if err <= opts.tol {
            y = std::array::from_fn(|i| two[i] + diff[i] / 15.0);
            t = if last { t1 } else { t + step };
            stats.accepted += 1;
            stats.max_error = stats.max_error.max(err);
            if t == t1 {
                break;
            }
        } else {
            stats.rejected += 1;
        }
        let factor = if err == 0.0 {
            4.0
        } else {
            (0.9 * (opts.tol / err).powf(0.2)).clamp(0.2, 4.0)
        };
        h = if last { h } else { step.abs() } * factor;
        if h < hmin {
            return Err(NumericsError::StepUnderflow { at: t });
        }
    }
    Ok((y, stats))
}
