//! Crank–Nicolson propagation on a uniform grid.
//!
//! Independent of the oscillator basis: the packet is sampled directly, the
//! kinetic term uses the fourth-order five-point Laplacian, and the walls are
//! reflecting (`psi = 0` outside the grid). Only used to cross-check the
//! spectral propagators.

use num_complex::Complex64;

use crate::dynamics::EvolutionSettings;
use crate::error::{require_positive, Error, Result};
use crate::model::{packet_value, GaussianPacketSpec, PhysicalParams, QuarticCoefficients};

/// Probability allowed within [`EDGE_WIDTH`] of either wall.
pub const BOUNDARY_MASS_LIMIT: f64 = 1e-4;
/// Width of the wall region monitored for leakage.
pub const EDGE_WIDTH: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub dx: f64,
    pub dt: f64,
}

impl Default for ReferenceGrid {
    fn default() -> Self {
        Self { x_min: -10.0, x_max: 10.0, dx: 0.02, dt: 0.001 }
    }
}

impl ReferenceGrid {
    pub fn validate(&self) -> Result<()> {
        require_positive("dx", self.dx)?;
        require_positive("dt", self.dt)?;
        if !(self.x_max > self.x_min) || self.x_min.is_nan() {
            return Err(Error::invalid("x_max", "must exceed x_min"));
        }
        if self.points() < 5 {
            return Err(Error::invalid("dx", "grid needs at least five points"));
        }
        Ok(())
    }

    pub fn points(&self) -> usize {
        ((self.x_max - self.x_min) / self.dx).round() as usize + 1
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.points()).map(|i| self.x_min + i as f64 * self.dx).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSnapshot {
    pub t: f64,
    pub psi: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceRun {
    pub x: Vec<f64>,
    pub dx: f64,
    pub snapshots: Vec<GridSnapshot>,
}

impl ReferenceRun {
    pub fn norm(&self, snapshot: &GridSnapshot) -> f64 {
        snapshot.psi.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.dx
    }

    pub fn mean_position(&self, snapshot: &GridSnapshot) -> f64 {
        snapshot.psi.iter().zip(&self.x).map(|(z, x)| z.norm_sqr() * x).sum::<f64>() * self.dx
            / self.norm(snapshot)
    }
}

/// LU factors of a complex matrix with two sub- and two super-diagonals.
struct PentadiagonalLu {
    n: usize,
    /// `lower[i] = [l_{i,i-2}, l_{i,i-1}]`
    lower: Vec<[Complex64; 2]>,
    /// `upper[i] = [u_{i,i}, u_{i,i+1}, u_{i,i+2}]`
    upper: Vec<[Complex64; 3]>,
}

impl PentadiagonalLu {
    /// `bands[i] = [a_{i,i-2}, a_{i,i-1}, a_{i,i}, a_{i,i+1}, a_{i,i+2}]`.
    ///
    /// No pivoting: the matrices factored here are `I + i K` with `K` real
    /// symmetric, whose Hermitian part is the identity.
    fn factor(bands: &[[Complex64; 5]]) -> Self {
        let n = bands.len();
        let zero = Complex64::new(0.0, 0.0);
        let mut lower = vec![[zero; 2]; n];
        let mut upper = vec![[zero; 3]; n];
        for i in 0..n {
            let [a2, a1, a0, b1, b2] = bands[i];
            let l2 = if i >= 2 { a2 / upper[i - 2][0] } else { zero };
            let mut sub = a1;
            if i >= 2 {
                sub -= l2 * upper[i - 2][1];
            }
            let l1 = if i >= 1 { sub / upper[i - 1][0] } else { zero };
            let mut diag = a0;
            if i >= 2 {
                diag -= l2 * upper[i - 2][2];
            }
            if i >= 1 {
                diag -= l1 * upper[i - 1][1];
            }
            let mut sup = b1;
            if i >= 1 {
                sup -= l1 * upper[i - 1][2];
            }
            lower[i] = [l2, l1];
            upper[i] = [diag, sup, b2];
        }
        Self { n, lower, upper }
    }

    fn solve(&self, rhs: &mut [Complex64]) {
        let n = self.n;
        for i in 0..n {
            let mut v = rhs[i];
            if i >= 1 {
                v -= self.lower[i][1] * rhs[i - 1];
            }
            if i >= 2 {
                v -= self.lower[i][0] * rhs[i - 2];
            }
            rhs[i] = v;
        }
        for i in (0..n).rev() {
            let mut v = rhs[i];
            if i + 1 < n {
                v -= self.upper[i][1] * rhs[i + 1];
            }
            if i + 2 < n {
                v -= self.upper[i][2] * rhs[i + 2];
            }
            rhs[i] = v / self.upper[i][0];
        }
    }
}

/// Propagates the packet with Crank–Nicolson steps of `grid.dt`, recording the
/// wavefunction at each of `settings.output_times()` (rounded to whole steps).
pub fn evolve_reference_grid(
    spec: &GaussianPacketSpec,
    coeffs: &QuarticCoefficients,
    params: &PhysicalParams,
    settings: &EvolutionSettings,
    grid: &ReferenceGrid,
) -> Result<ReferenceRun> {
    spec.validate()?;
    params.validate()?;
    settings.validate()?;
    grid.validate()?;

    let x = grid.nodes();
    let n = x.len();
    let kin = params.hbar * params.hbar / (2.0 * params.m * grid.dx * grid.dx);
    // H = -kin * (-f[i-2] + 16 f[i-1] - 30 f[i] + 16 f[i+1] - f[i+2]) / 12 + U
    let off1 = -kin * 16.0 / 12.0;
    let off2 = kin / 12.0;
    let diag: Vec<f64> = x.iter().map(|&xi| kin * 30.0 / 12.0 + coeffs.value(xi)).collect();

    let half = Complex64::new(0.0, grid.dt / (2.0 * params.hbar));
    let one = Complex64::new(1.0, 0.0);
    let bands: Vec<[Complex64; 5]> = (0..n)
        .map(|i| {
            let edge = |ok: bool, v: f64| if ok { half * v } else { Complex64::new(0.0, 0.0) };
            [
                edge(i >= 2, off2),
                edge(i >= 1, off1),
                one + half * diag[i],
                edge(i + 1 < n, off1),
                edge(i + 2 < n, off2),
            ]
        })
        .collect();
    let lu = PentadiagonalLu::factor(&bands);

    let apply_explicit = |psi: &[Complex64], out: &mut [Complex64]| {
        for i in 0..n {
            let mut h = psi[i] * diag[i];
            if i >= 1 {
                h += psi[i - 1] * off1;
            }
            if i >= 2 {
                h += psi[i - 2] * off2;
            }
            if i + 1 < n {
                h += psi[i + 1] * off1;
            }
            if i + 2 < n {
                h += psi[i + 2] * off2;
            }
            out[i] = psi[i] - half * h;
        }
    };

    let edge_points = ((EDGE_WIDTH / grid.dx).round() as usize).max(1).min(n / 2);
    let boundary_mass = |psi: &[Complex64]| {
        let left: f64 = psi[..edge_points].iter().map(|z| z.norm_sqr()).sum();
        let right: f64 = psi[n - edge_points..].iter().map(|z| z.norm_sqr()).sum();
        (left + right) * grid.dx
    };

    let mut psi: Vec<Complex64> = x.iter().map(|&xi| packet_value(spec, params, xi)).collect();
    let mut scratch = vec![Complex64::new(0.0, 0.0); n];
    let mut snapshots = Vec::new();
    let mut step = 0usize;
    for t_out in settings.output_times() {
        let target = (t_out / grid.dt).round() as usize;
        while step < target {
            apply_explicit(&psi, &mut scratch);
            lu.solve(&mut scratch);
            std::mem::swap(&mut psi, &mut scratch);
            step += 1;
        }
        let t = step as f64 * grid.dt;
        let mass = boundary_mass(&psi);
        if mass > BOUNDARY_MASS_LIMIT {
            return Err(Error::BoundaryLeak { t, mass, limit: BOUNDARY_MASS_LIMIT });
        }
        snapshots.push(GridSnapshot { t, psi: psi.clone() });
    }
    Ok(ReferenceRun { x, dx: grid.dx, snapshots })
}
