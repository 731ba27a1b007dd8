//! Adaptive Dormand–Prince 5(4) integrator with exact output stops.

use crate::error::{require_positive, Error, Result};

/// Right-hand side of `dy/dt = f(t, y)`.
pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, y: &[f64], dydt: &mut [f64]);
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// fifth-order weights minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DormandPrince {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// First trial step; the step controller adapts from there.
    pub initial_step: f64,
    pub max_steps: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
}

impl DormandPrince {
    pub fn new(rel_tol: f64, abs_tol: f64, initial_step: f64) -> Result<Self> {
        require_positive("rel_tol", rel_tol)?;
        require_positive("abs_tol", abs_tol)?;
        require_positive("initial_step", initial_step)?;
        Ok(Self { rel_tol, abs_tol, initial_step, max_steps: 50_000_000 })
    }

    /// Integrates from `(t0, y0)` through each of `stops` (ascending, all
    /// `>= t0`), calling `emit(t, y)` exactly at every stop.
    pub fn integrate<S, F>(&self, sys: &S, t0: f64, y0: &[f64], stops: &[f64], mut emit: F) -> Result<StepStats>
    where
        S: OdeSystem + ?Sized,
        F: FnMut(f64, &[f64]),
    {
        let n = sys.dim();
        if y0.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: y0.len() });
        }
        let mut y = y0.to_vec();
        let mut t = t0;
        let mut h = self.initial_step;
        let mut stats = StepStats::default();

        let mut k: [Vec<f64>; 7] = std::array::from_fn(|_| vec![0.0; n]);
        let mut tmp = vec![0.0; n];
        let mut y_new = vec![0.0; n];
        sys.rhs(t, &y, &mut k[0]);

        for &stop in stops {
            if stop < t {
                return Err(Error::invalid("stops", "output times must be ascending and not before t0"));
            }
            while t < stop {
                if stats.accepted + stats.rejected >= self.max_steps {
                    return Err(Error::TooManySteps { t, max_steps: self.max_steps });
                }
                let remaining = stop - t;
                let clamped = h >= remaining;
                let step = if clamped { remaining } else { h };
                if step < 16.0 * f64::EPSILON * t.abs().max(1.0) && !clamped {
                    return Err(Error::StepSizeUnderflow { t, h: step });
                }

                let stage = |k: &[Vec<f64>; 7], coeffs: &[(usize, f64)], out: &mut [f64]| {
                    for i in 0..n {
                        let mut acc = 0.0;
                        for &(j, a) in coeffs {
                            acc += a * k[j][i];
                        }
                        out[i] = y[i] + step * acc;
                    }
                };
                stage(&k, &[(0, A21)], &mut tmp);
                sys.rhs(t + C2 * step, &tmp, &mut k[1]);
                stage(&k, &[(0, A31), (1, A32)], &mut tmp);
                sys.rhs(t + C3 * step, &tmp, &mut k[2]);
                stage(&k, &[(0, A41), (1, A42), (2, A43)], &mut tmp);
                sys.rhs(t + C4 * step, &tmp, &mut k[3]);
                stage(&k, &[(0, A51), (1, A52), (2, A53), (3, A54)], &mut tmp);
                sys.rhs(t + C5 * step, &tmp, &mut k[4]);
                stage(&k, &[(0, A61), (1, A62), (2, A63), (3, A64), (4, A65)], &mut tmp);
                sys.rhs(t + step, &tmp, &mut k[5]);
                stage(&k, &[(0, A71), (2, A73), (3, A74), (4, A75), (5, A76)], &mut y_new);
                let t_new = if clamped { stop } else { t + step };
                sys.rhs(t_new, &y_new, &mut k[6]);

                let mut err_sq = 0.0;
                for i in 0..n {
                    let e = step
                        * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i] + E7 * k[6][i]);
                    let sc = self.abs_tol + self.rel_tol * y[i].abs().max(y_new[i].abs());
                    err_sq += (e / sc) * (e / sc);
                }
                let err = (err_sq / n as f64).sqrt();
                let factor = if err == 0.0 {
                    MAX_FACTOR
                } else {
                    (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
                };

                if err <= 1.0 {
                    stats.accepted += 1;
                    t = t_new;
                    std::mem::swap(&mut y, &mut y_new);
                    k.swap(0, 6);
                    // A step shortened to land on a stop says nothing about the
                    // natural step length; keep the previous proposal then.
                    if !clamped || step * factor > h {
                        h = step * factor;
                    }
                } else {
                    stats.rejected += 1;
                    h = step * factor.min(1.0);
                    if h < 16.0 * f64::EPSILON * t.abs().max(1.0) {
                        return Err(Error::StepSizeUnderflow { t, h });
                    }
                }
            }
            emit(t, &y);
        }
        Ok(stats)
    }
}
