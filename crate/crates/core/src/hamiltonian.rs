//! Hamiltonian of the quartic well in the harmonic-oscillator basis, and its
//! spectrum.
//!
//! With `x = sqrt(g/2) (a + a†)` every power of `x` up to four couples
//! oscillator states at most four quanta apart, so `H` is a symmetric band
//! matrix of half-width 4.

use num_complex::Complex64;

use crate::eigen::jacobi_eigen;
use crate::error::{require_positive, Error, Result};
use crate::model::{PhysicalParams, QuarticCoefficients, MAX_SUPPORTED_INDEX};

pub const DEFAULT_N_MAX: usize = 30;
pub const BAND_HALF_WIDTH: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisSpec {
    /// Highest oscillator quantum number kept.
    pub n_max: usize,
    pub g: f64,
}

impl BasisSpec {
    pub fn new(n_max: usize, params: &PhysicalParams) -> Result<Self> {
        let spec = Self { n_max, g: params.g() };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_max < BAND_HALF_WIDTH || self.n_max > MAX_SUPPORTED_INDEX {
            return Err(Error::invalid(
                "n_max",
                format!("must lie in [{BAND_HALF_WIDTH}, {MAX_SUPPORTED_INDEX}], got {}", self.n_max),
            ));
        }
        require_positive("g", self.g)
    }

    pub fn dim(&self) -> usize {
        self.n_max + 1
    }
}

/// Dense symmetric storage of `H_nk`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl EnergyMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn band_half_width(&self) -> usize {
        BAND_HALF_WIDTH
    }

    pub fn get(&self, n: usize, k: usize) -> f64 {
        self.data[n * self.dim + k]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// `out = H c`, touching only the band.
    pub fn apply(&self, c: &[Complex64], out: &mut [Complex64]) {
        let n = self.dim;
        for (i, o) in out.iter_mut().enumerate().take(n) {
            let lo = i.saturating_sub(BAND_HALF_WIDTH);
            let hi = (i + BAND_HALF_WIDTH).min(n - 1);
            let row = &self.data[i * n..(i + 1) * n];
            let mut acc = Complex64::new(0.0, 0.0);
            for k in lo..=hi {
                acc += c[k] * row[k];
            }
            *o = acc;
        }
    }

    /// Real-vector variant of [`apply`](Self::apply).
    pub fn apply_real(&self, c: &[f64], out: &mut [f64]) {
        let n = self.dim;
        for (i, o) in out.iter_mut().enumerate().take(n) {
            let lo = i.saturating_sub(BAND_HALF_WIDTH);
            let hi = (i + BAND_HALF_WIDTH).min(n - 1);
            let row = &self.data[i * n..(i + 1) * n];
            *o = (lo..=hi).map(|k| row[k] * c[k]).sum();
        }
    }

    /// `c† H c`.
    pub fn expectation(&self, c: &[Complex64]) -> f64 {
        let mut hc = vec![Complex64::new(0.0, 0.0); self.dim];
        self.apply(c, &mut hc);
        c.iter().zip(&hc).map(|(a, b)| (a.conj() * b).re).sum()
    }
}

/// Assembles `H_nk` from the analytic oscillator matrix elements of `x^2`,
/// `x^3` and `x^4`. Only `n >= k` is evaluated; the upper triangle is a mirror.
pub fn build_matrix(coeffs: &QuarticCoefficients, params: &PhysicalParams, basis: &BasisSpec) -> EnergyMatrix {
    let dim = basis.dim();
    let g = basis.g;
    let hw = params.hbar * params.omega;
    let QuarticCoefficients { a4, a3, a2, a1, a0 } = *coeffs;
    // x^2 coefficient of V = U - m omega^2 x^2 / 2
    let a2p = a2 - params.stiffness();
    let h = (g / 2.0).sqrt();
    let h3 = h * h * h;

    let mut data = vec![0.0; dim * dim];
    for n in 0..dim {
        let nf = n as f64;
        let mut set = |k: usize, v: f64| {
            data[n * dim + k] = v;
            data[k * dim + n] = v;
        };
        set(
            n,
            (nf + 0.5) * hw
                + 3.0 * a4 * g * g / 16.0 * (2.0 * nf * nf + 2.0 * nf + 1.0)
                + a2p * g / 2.0 * (nf + 0.5)
                + a0,
        );
        if n >= 1 {
            set(n - 1, a3 * h3 * nf * nf.sqrt() + a1 * h * nf.sqrt());
        }
        if n >= 2 {
            let r = (nf * (nf - 1.0)).sqrt();
            set(n - 2, a4 * g * g / 16.0 * (4.0 * nf - 2.0) * r + a2p * g / 4.0 * r);
        }
        if n >= 3 {
            set(n - 3, a3 / 3.0 * h3 * (nf * (nf - 1.0) * (nf - 2.0)).sqrt());
        }
        if n >= 4 {
            set(n - 4, a4 * g * g / 16.0 * (nf * (nf - 1.0) * (nf - 2.0) * (nf - 3.0)).sqrt());
        }
    }
    EnergyMatrix { dim, data }
}

/// Stationary states `Psi_nu = sum_n c_{nu,n} phi_n`.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    /// Row-major; column `nu` holds the coefficients of `Psi_nu`.
    vectors: Vec<f64>,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `c_{nu,n}`: coefficient of `phi_n` in `Psi_nu`.
    pub fn component(&self, n: usize, nu: usize) -> f64 {
        self.vectors[n * self.dim() + nu]
    }

    pub fn vector(&self, nu: usize) -> Vec<f64> {
        (0..self.dim()).map(|n| self.component(n, nu)).collect()
    }

    /// Coordinates of `c` in the eigenbasis, `V^T c`.
    pub fn project(&self, c: &[Complex64]) -> Vec<Complex64> {
        let dim = self.dim();
        let mut out = vec![Complex64::new(0.0, 0.0); dim];
        for (n, cn) in c.iter().enumerate() {
            let row = &self.vectors[n * dim..(n + 1) * dim];
            for (o, v) in out.iter_mut().zip(row) {
                *o += cn * v;
            }
        }
        out
    }

    /// Back-transform eigen-coordinates to oscillator coefficients, `V a`.
    pub fn reconstruct(&self, a: &[Complex64]) -> Vec<Complex64> {
        let dim = self.dim();
        (0..dim)
            .map(|n| {
                let row = &self.vectors[n * dim..(n + 1) * dim];
                row.iter().zip(a).map(|(v, x)| x * v).sum()
            })
            .collect()
    }
}

pub fn diagonalize(h: &EnergyMatrix) -> Result<EigenSystem> {
    let e = jacobi_eigen(&h.data, h.dim)?;
    Ok(EigenSystem { values: e.values, vectors: e.vectors })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralGaps {
    pub delta: f64,
    pub delta_prime: f64,
}

pub fn spectral_gaps(es: &EigenSystem) -> SpectralGaps {
    let e = &es.values;
    SpectralGaps { delta: e[1] - e[0], delta_prime: e[2] - e[1] }
}
