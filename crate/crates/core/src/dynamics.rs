//! Time evolution of oscillator-basis coefficients.
//!
//! Method A integrates `i hbar dc/dt = H c` directly. Method B expands the
//! initial state in eigenstates and rotates each amplitude by its phase, which
//! is exact at every output time. Both hand back [`CoefficientState`]s so all
//! observables share one code path.

use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{require_positive, Error, Result};
use crate::hamiltonian::{BasisSpec, EigenSystem, EnergyMatrix};
use crate::model::{
    oscillator_eigenfunctions, packet_value, GaussianPacketSpec, PhysicalParams, QuarticCoefficients,
};
use crate::ode::{DormandPrince, OdeSystem};
use crate::quadrature::{packet_extent, CompositeRule};

/// Projections capturing less probability than this are flagged.
pub const MIN_CAPTURED_NORM: f64 = 0.999;

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientState {
    pub t: f64,
    pub c: Vec<Complex64>,
}

impl CoefficientState {
    pub fn norm(&self) -> f64 {
        self.c.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }

    /// Complex conjugate state, i.e. the time-reversed wavefunction.
    pub fn conjugated(&self) -> Self {
        Self { t: self.t, c: self.c.iter().map(|z| z.conj()).collect() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenAmplitudes {
    pub a: Vec<Complex64>,
}

impl EigenAmplitudes {
    pub fn norm(&self) -> f64 {
        self.a.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `|a_nu|^2` for every level.
    pub fn weights(&self) -> Vec<f64> {
        self.a.iter().map(|z| z.norm_sqr()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PropagationMethod {
    /// Direct integration of the coefficient ODE.
    SpectralA,
    /// Eigen-expansion with analytic phases.
    #[default]
    SpectralB,
}

impl FromStr for PropagationMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" | "SPECTRAL_A" => Ok(Self::SpectralA),
            "B" | "SPECTRAL_B" => Ok(Self::SpectralB),
            _ => Err(Error::invalid("method", format!("expected `A` or `B`, got `{s}`"))),
        }
    }
}

impl std::fmt::Display for PropagationMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::SpectralA => "A",
            Self::SpectralB => "B",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionSettings {
    pub t_max: f64,
    pub dt_out: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub method: PropagationMethod,
}

impl Default for EvolutionSettings {
    fn default() -> Self {
        Self { t_max: 1000.0, dt_out: 0.25, rel_tol: 1e-10, abs_tol: 1e-10, method: PropagationMethod::SpectralB }
    }
}

impl EvolutionSettings {
    pub fn validate(&self) -> Result<()> {
        require_positive("t_max", self.t_max)?;
        require_positive("dt_out", self.dt_out)?;
        require_positive("rel_tol", self.rel_tol)?;
        require_positive("abs_tol", self.abs_tol)
    }

    /// `0, dt_out, 2 dt_out, ...` up to and including `t_max` (within rounding).
    pub fn output_times(&self) -> Vec<f64> {
        let count = (self.t_max / self.dt_out + 1e-9).floor() as usize;
        (0..=count).map(|k| k as f64 * self.dt_out).collect()
    }

    fn integrator(&self) -> Result<DormandPrince> {
        DormandPrince::new(self.rel_tol, self.abs_tol, self.dt_out / 100.0)
    }
}

/// Result of projecting a packet onto the truncated basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedPacket {
    pub state: CoefficientState,
    /// `sum |c_n(0)|^2`; below one by the probability the basis cannot represent.
    pub captured_norm: f64,
}

impl ProjectedPacket {
    pub fn is_well_captured(&self) -> bool {
        self.captured_norm >= MIN_CAPTURED_NORM
    }

    /// Human-readable warning when the basis misses too much of the packet.
    pub fn warning(&self) -> Option<String> {
        (!self.is_well_captured()).then(|| {
            format!(
                "basis captures only {:.6} of the packet norm (< {MIN_CAPTURED_NORM}); increase n_max",
                self.captured_norm
            )
        })
    }
}

/// `c_n(0) = <phi_n | Psi_G>` by composite Gauss–Legendre quadrature.
///
/// `x_s` only widens the integration window; it does not enter the integrand.
pub fn initial_coefficients(
    spec: &GaussianPacketSpec,
    params: &PhysicalParams,
    basis: &BasisSpec,
    x_s: f64,
) -> Result<ProjectedPacket> {
    spec.validate()?;
    params.validate()?;
    basis.validate()?;
    let rule = CompositeRule::symmetric(packet_extent(params, x_s, spec, basis.n_max));
    let dim = basis.dim();
    let mut c = vec![Complex64::new(0.0, 0.0); dim];
    let mut phi = vec![0.0; dim];
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        let psi = packet_value(spec, params, x) * w;
        oscillator_eigenfunctions(params, x, &mut phi);
        for (cn, p) in c.iter_mut().zip(&phi) {
            *cn += psi * p;
        }
    }
    let state = CoefficientState { t: 0.0, c };
    let captured_norm = state.norm();
    Ok(ProjectedPacket { state, captured_norm })
}

/// `a_nu = sum_n c_{nu,n} c_n(0)`.
pub fn to_eigen_amplitudes(c0: &CoefficientState, es: &EigenSystem) -> Result<EigenAmplitudes> {
    if c0.dim() != es.dim() {
        return Err(Error::DimensionMismatch { expected: es.dim(), found: c0.dim() });
    }
    if c0.t != 0.0 {
        return Err(Error::invalid("t", format!("amplitudes are defined at t = 0, state is at t = {}", c0.t)));
    }
    Ok(EigenAmplitudes { a: es.project(&c0.c) })
}

/// `i hbar dc/dt = H c` split into real and imaginary halves.
struct CoefficientOde<'a> {
    h: &'a EnergyMatrix,
    hbar: f64,
}

impl OdeSystem for CoefficientOde<'_> {
    fn dim(&self) -> usize {
        2 * self.h.dim()
    }

    fn rhs(&self, _t: f64, y: &[f64], dydt: &mut [f64]) {
        let n = self.h.dim();
        let (re, im) = y.split_at(n);
        let (dre, dim) = dydt.split_at_mut(n);
        self.h.apply_real(im, dre);
        self.h.apply_real(re, dim);
        for v in dre.iter_mut() {
            *v /= self.hbar;
        }
        for v in dim.iter_mut() {
            *v /= -self.hbar;
        }
    }
}

fn pack(c: &[Complex64]) -> Vec<f64> {
    c.iter().map(|z| z.re).chain(c.iter().map(|z| z.im)).collect()
}

fn unpack(y: &[f64]) -> Vec<Complex64> {
    let n = y.len() / 2;
    (0..n).map(|i| Complex64::new(y[i], y[n + i])).collect()
}

/// Spectral method A: states at `c0.t + k dt_out`.
pub fn evolve_spectral_a(
    c0: &CoefficientState,
    h: &EnergyMatrix,
    params: &PhysicalParams,
    settings: &EvolutionSettings,
) -> Result<Vec<CoefficientState>> {
    settings.validate()?;
    if c0.dim() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: c0.dim() });
    }
    let stops: Vec<f64> = settings.output_times().into_iter().map(|t| c0.t + t).collect();
    let ode = CoefficientOde { h, hbar: params.hbar };
    let mut out = Vec::with_capacity(stops.len());
    settings.integrator()?.integrate(&ode, c0.t, &pack(&c0.c), &stops, |t, y| {
        out.push(CoefficientState { t, c: unpack(y) });
    })?;
    Ok(out)
}

/// `c_n(t) = sum_nu a_nu c_{nu,n} exp(-i E_nu t / hbar)`.
pub fn state_at(a: &EigenAmplitudes, es: &EigenSystem, params: &PhysicalParams, t: f64) -> CoefficientState {
    let rotated: Vec<Complex64> = a
        .a
        .iter()
        .zip(&es.values)
        .map(|(amp, e)| amp * Complex64::from_polar(1.0, -e * t / params.hbar))
        .collect();
    CoefficientState { t, c: es.reconstruct(&rotated) }
}

/// Spectral method B: exact states at `k dt_out`.
pub fn evolve_spectral_b(
    a: &EigenAmplitudes,
    es: &EigenSystem,
    params: &PhysicalParams,
    settings: &EvolutionSettings,
) -> Result<Vec<CoefficientState>> {
    settings.validate()?;
    if a.a.len() != es.dim() {
        return Err(Error::DimensionMismatch { expected: es.dim(), found: a.a.len() });
    }
    Ok(settings.output_times().into_iter().map(|t| state_at(a, es, params, t)).collect())
}

/// Propagates with whichever method `settings` selects.
pub fn evolve(
    c0: &CoefficientState,
    h: &EnergyMatrix,
    es: &EigenSystem,
    params: &PhysicalParams,
    settings: &EvolutionSettings,
) -> Result<Vec<CoefficientState>> {
    match settings.method {
        PropagationMethod::SpectralA => evolve_spectral_a(c0, h, params, settings),
        PropagationMethod::SpectralB => evolve_spectral_b(&to_eigen_amplitudes(c0, es)?, es, params, settings),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalState {
    pub t: f64,
    pub x: f64,
    pub p: f64,
}

impl ClassicalState {
    pub fn energy(&self, coeffs: &QuarticCoefficients, params: &PhysicalParams) -> f64 {
        self.p * self.p / (2.0 * params.m) + coeffs.value(self.x)
    }
}

struct Newton<'a> {
    coeffs: &'a QuarticCoefficients,
    m: f64,
}

impl OdeSystem for Newton<'_> {
    fn dim(&self) -> usize {
        2
    }

    fn rhs(&self, _t: f64, y: &[f64], dydt: &mut [f64]) {
        dydt[0] = y[1] / self.m;
        dydt[1] = -self.coeffs.derivative(y[0]);
    }
}

/// Newtonian trajectory in the same potential, sampled at the output times.
pub fn classical_trajectory(
    x0: f64,
    p0: f64,
    coeffs: &QuarticCoefficients,
    params: &PhysicalParams,
    settings: &EvolutionSettings,
) -> Result<Vec<ClassicalState>> {
    settings.validate()?;
    let sys = Newton { coeffs, m: params.m };
    let mut out = Vec::new();
    settings.integrator()?.integrate(&sys, 0.0, &[x0, p0], &settings.output_times(), |t, y| {
        out.push(ClassicalState { t, x: y[0], p: y[1] });
    })?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{build_matrix, diagonalize};
    use crate::model::{quartic_from_well, WellShape};

    fn basis(n_max: usize) -> BasisSpec {
        BasisSpec::new(n_max, &PhysicalParams::default()).unwrap()
    }

    #[test]
    fn ground_state_packet_projects_onto_phi0() {
        let p = PhysicalParams::default();
        let spec = GaussianPacketSpec::new(0.0, 0.0, 0.5, 0.0).unwrap();
        let proj = initial_coefficients(&spec, &p, &basis(30), 2.0 * 2f64.sqrt()).unwrap();
        assert!((proj.state.c[0] - Complex64::new(1.0, 0.0)).norm() < 1e-9);
        assert!(proj.state.c[1..].iter().all(|z| z.norm() < 1e-9));
        assert!(proj.is_well_captured() && proj.warning().is_none());
    }

    #[test]
    fn narrow_left_packet_is_captured() {
        let p = PhysicalParams::default();
        let spec = GaussianPacketSpec::default();
        let proj = initial_coefficients(&spec, &p, &basis(30), 2.0 * 2f64.sqrt()).unwrap();
        assert!(proj.captured_norm >= 0.999 && proj.captured_norm <= 1.0, "{}", proj.captured_norm);
    }

    #[test]
    fn real_packet_has_parity_sign_pattern() {
        let p = PhysicalParams::default();
        let spec = GaussianPacketSpec::new(-2.0 * 2f64.sqrt(), 0.0, 0.5, 0.0).unwrap();
        let proj = initial_coefficients(&spec, &p, &basis(30), 2.0 * 2f64.sqrt()).unwrap();
        // a coherent state at x0 < 0 has c_n proportional to (x0/sqrt2)^n / sqrt(n!)
        for (n, c) in proj.state.c.iter().enumerate() {
            assert!(c.im.abs() < 1e-14);
            if c.re.abs() > 1e-10 {
                assert_eq!(c.re < 0.0, n % 2 == 1, "n={n}");
            }
        }
    }

    #[test]
    fn poorly_captured_packet_warns() {
        let p = PhysicalParams::default();
        let spec = GaussianPacketSpec::new(-6.0, 2.0, 0.02, 0.0).unwrap();
        let proj = initial_coefficients(&spec, &p, &basis(8), 2.0).unwrap();
        assert!(!proj.is_well_captured());
        assert!(proj.warning().unwrap().contains("n_max"));
    }

    #[test]
    fn amplitudes_require_matching_dimension_and_t0() {
        let p = PhysicalParams::default();
        let w = WellShape::default();
        let h = build_matrix(&quartic_from_well(&p, &w).unwrap(), &p, &basis(10));
        let es = diagonalize(&h).unwrap();
        let c = CoefficientState { t: 0.0, c: vec![Complex64::new(1.0, 0.0); 5] };
        assert!(matches!(to_eigen_amplitudes(&c, &es), Err(Error::DimensionMismatch { .. })));
        let c = CoefficientState { t: 1.0, c: vec![Complex64::new(0.0, 0.0); 11] };
        assert!(to_eigen_amplitudes(&c, &es).is_err());
    }

    #[test]
    fn method_parsing() {
        assert_eq!("a".parse::<PropagationMethod>().unwrap(), PropagationMethod::SpectralA);
        assert_eq!("B".parse::<PropagationMethod>().unwrap(), PropagationMethod::SpectralB);
        assert!("C".parse::<PropagationMethod>().is_err());
    }

    #[test]
    fn output_grid_includes_endpoint() {
        let s = EvolutionSettings { t_max: 1.0, dt_out: 0.25, ..Default::default() };
        assert_eq!(s.output_times(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let s = EvolutionSettings { t_max: 0.3, dt_out: 0.1, ..Default::default() };
        assert_eq!(s.output_times().len(), 4);
        assert!(EvolutionSettings { dt_out: 0.0, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn classical_particle_at_rest_in_minimum() {
        let p = PhysicalParams::default();
        let w = WellShape::default();
        let q = quartic_from_well(&p, &w).unwrap();
        let s = EvolutionSettings { t_max: 50.0, dt_out: 1.0, ..Default::default() };
        for st in classical_trajectory(-w.x_s, 0.0, &q, &p, &s).unwrap() {
            assert!((st.x + w.x_s).abs() < 1e-12 && st.p.abs() < 1e-12);
        }
    }
}
