//! The asymmetric quartic double well, oscillator eigenfunctions and the
//! squeezed Gaussian packet.
//!
//! Units are dimensionless; `m`, `omega` and `hbar` stay general but default
//! to one.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;

use crate::error::{require_finite, require_positive, Error, Result};

/// Highest oscillator index the basis is validated for.
pub const MAX_SUPPORTED_INDEX: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    pub m: f64,
    pub omega: f64,
    pub hbar: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self { m: 1.0, omega: 1.0, hbar: 1.0 }
    }
}

impl PhysicalParams {
    pub fn new(m: f64, omega: f64, hbar: f64) -> Result<Self> {
        let params = Self { m, omega, hbar };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("m", self.m)?;
        require_positive("omega", self.omega)?;
        require_positive("hbar", self.hbar)
    }

    /// Oscillator length squared, `hbar / (m omega)`.
    pub fn g(&self) -> f64 {
        self.hbar / (self.m * self.omega)
    }

    /// `m omega^2`, the curvature of the reference oscillator.
    pub fn stiffness(&self) -> f64 {
        self.m * self.omega * self.omega
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WellShape {
    /// Half-separation of the two minima.
    pub x_s: f64,
    /// Cubic asymmetry; negative values lower the right well.
    pub d: f64,
}

impl Default for WellShape {
    fn default() -> Self {
        Self { x_s: 2.0 * SQRT_2, d: 0.0 }
    }
}

impl WellShape {
    pub fn new(x_s: f64, d: f64) -> Self {
        Self { x_s, d }
    }

    /// Largest |d| for which the barrier top stays strictly between the minima.
    pub fn critical_asymmetry(&self, params: &PhysicalParams) -> f64 {
        params.stiffness() / (2.0 * self.x_s)
    }

    pub fn validate(&self, params: &PhysicalParams) -> Result<()> {
        params.validate()?;
        require_positive("x_s", self.x_s)?;
        require_finite("d", self.d)?;
        let d_c = self.critical_asymmetry(params);
        if self.d.abs() >= d_c {
            return Err(Error::AsymmetryOutOfRange { d: self.d, d_c });
        }
        Ok(())
    }

    /// The potential in its factored form `C (x^2 - x_s^2)^2 - d (x^3/3 - x_s^2 x)`.
    pub fn potential(&self, params: &PhysicalParams, x: f64) -> f64 {
        let c = params.stiffness() / (8.0 * self.x_s * self.x_s);
        let xs2 = self.x_s * self.x_s;
        let w = x * x - xs2;
        c * w * w - self.d * (x * x * x / 3.0 - xs2 * x)
    }
}

/// `U(x) = a4 x^4/4 + a3 x^3/3 + a2 x^2/2 + a1 x + a0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuarticCoefficients {
    pub a4: f64,
    pub a3: f64,
    pub a2: f64,
    pub a1: f64,
    pub a0: f64,
}

impl QuarticCoefficients {
    /// The reference oscillator `m omega^2 x^2 / 2` itself; the perturbation vanishes.
    pub fn harmonic(params: &PhysicalParams) -> Self {
        Self { a4: 0.0, a3: 0.0, a2: params.stiffness(), a1: 0.0, a0: 0.0 }
    }

    pub fn value(&self, x: f64) -> f64 {
        (((self.a4 / 4.0 * x + self.a3 / 3.0) * x + self.a2 / 2.0) * x + self.a1) * x + self.a0
    }

    pub fn derivative(&self, x: f64) -> f64 {
        ((self.a4 * x + self.a3) * x + self.a2) * x + self.a1
    }

    /// Coefficients of `U(-x)`.
    pub fn mirrored(&self) -> Self {
        Self { a3: -self.a3, a1: -self.a1, ..*self }
    }
}

pub fn quartic_from_well(params: &PhysicalParams, well: &WellShape) -> Result<QuarticCoefficients> {
    well.validate(params)?;
    let k = params.stiffness();
    let xs2 = well.x_s * well.x_s;
    Ok(QuarticCoefficients {
        a4: k / (2.0 * xs2),
        a3: -well.d,
        a2: -k / 2.0,
        a1: well.d * xs2,
        a0: k * xs2 / 8.0,
    })
}

pub fn potential_value(coeffs: &QuarticCoefficients, x: f64) -> f64 {
    coeffs.value(x)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryPoints {
    pub x_minus: f64,
    pub x_u: f64,
    pub x_plus: f64,
    pub u_minus: f64,
    pub u_barrier: f64,
    pub u_plus: f64,
    pub delta_u: f64,
}

pub fn stationary_points(params: &PhysicalParams, well: &WellShape) -> Result<StationaryPoints> {
    well.validate(params)?;
    let k = params.stiffness();
    let (xs, d) = (well.x_s, well.d);
    let xs2 = xs * xs;
    let xs3 = xs2 * xs;
    let x_u = 2.0 * d * xs2 / k;
    // U(x_u) = k x_s^2/8 + d^2 x_s^4/k - 2 d^4 x_s^6 / (3 k^3)
    let u_barrier = k * xs2 / 8.0 + d * d * xs2 * xs2 / k
        - 2.0 * d.powi(4) * xs3 * xs3 / (3.0 * k * k * k);
    Ok(StationaryPoints {
        x_minus: -xs,
        x_u,
        x_plus: xs,
        u_minus: -2.0 * d * xs3 / 3.0,
        u_barrier,
        u_plus: 2.0 * d * xs3 / 3.0,
        delta_u: 4.0 * d * xs3 / 3.0,
    })
}

/// Scale factor `sqrt(m omega / hbar)` mapping `x` to the dimensionless `xi`.
fn inverse_length(params: &PhysicalParams) -> f64 {
    (params.m * params.omega / params.hbar).sqrt()
}

/// Fills `out[0..=n_max]` with `phi_n(x)`.
///
/// Runs the three-term recurrence on normalized Hermite functions, so no
/// `2^n n!` factor is ever formed.
pub fn oscillator_eigenfunctions(params: &PhysicalParams, x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    let beta = inverse_length(params);
    let xi = beta * x;
    let scale = beta.sqrt();
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25) * (-0.5 * xi * xi).exp();
    out[0] = scale * cur;
    for n in 0..out.len() - 1 {
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * xi * cur - (nf / (nf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        out[n + 1] = scale * cur;
    }
}

pub fn oscillator_eigenfunction(n: usize, params: &PhysicalParams, x: f64) -> f64 {
    let mut buf = vec![0.0; n + 1];
    oscillator_eigenfunctions(params, x, &mut buf);
    buf[n]
}

/// Squeezed coherent Gaussian: centre `x0`, momentum `p0`, position variance
/// `mu` and symmetrized covariance `alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPacketSpec {
    pub x0: f64,
    pub p0: f64,
    pub mu: f64,
    pub alpha: f64,
}

impl Default for GaussianPacketSpec {
    fn default() -> Self {
        Self { x0: -2.0 * SQRT_2, p0: 0.0, mu: 0.1, alpha: 0.0 }
    }
}

impl GaussianPacketSpec {
    pub fn new(x0: f64, p0: f64, mu: f64, alpha: f64) -> Result<Self> {
        let spec = Self { x0, p0, mu, alpha };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        require_finite("x0", self.x0)?;
        require_finite("p0", self.p0)?;
        require_positive("mu", self.mu)?;
        require_finite("alpha", self.alpha)
    }
}

pub fn packet_value(spec: &GaussianPacketSpec, params: &PhysicalParams, x: f64) -> Complex64 {
    let s = x - spec.x0;
    let exponent = Complex64::new(-s * s / (4.0 * spec.mu), s * s * spec.alpha / (4.0 * spec.mu))
        + Complex64::new(0.0, spec.p0 * s / params.hbar);
    exponent.exp() * (2.0 * PI * spec.mu).powf(-0.25)
}
