//! Measured quantities evaluated from oscillator-basis coefficients.
//!
//! Moments of `x` and `p` come from ladder-operator identities, so each is a
//! sum over at most two neighbouring diagonals of `c^* c`. Tunneling
//! probabilities go through the half-line overlap matrix of eigenstates.

use num_complex::Complex64;

use crate::dynamics::{CoefficientState, EigenAmplitudes};
use crate::error::{Error, Result};
use crate::hamiltonian::{EigenSystem, EnergyMatrix};
use crate::model::{oscillator_eigenfunctions, PhysicalParams};
use crate::quadrature::{basis_extent, CompositeRule};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservableSample {
    pub t: f64,
    pub x_mean: f64,
    pub p_mean: f64,
    pub x2_mean: f64,
    pub p2_mean: f64,
    /// `<xp + px>`
    pub xp_sym: f64,
    pub autocorr: Complex64,
    pub norm: f64,
    pub energy: f64,
    pub p_right: f64,
    pub uncertainty: f64,
}

impl ObservableSample {
    pub fn x_var(&self) -> f64 {
        self.x2_mean - self.x_mean * self.x_mean
    }

    pub fn p_var(&self) -> f64 {
        self.p2_mean - self.p_mean * self.p_mean
    }
}

/// Ladder-operator moments of a single state. `autocorr` and `p_right` are
/// left at zero; [`observe`] fills them in.
pub fn expectations(state: &CoefficientState, params: &PhysicalParams, h: &EnergyMatrix) -> Result<ObservableSample> {
    let c = &state.c;
    if c.len() < 3 {
        return Err(Error::invalid("state", "needs at least three coefficients"));
    }
    if c.len() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: c.len() });
    }
    let g = params.g();
    let hbar = params.hbar;

    // s1 = sum sqrt(n+1) c_{n+1}^* c_n, s2 = sum sqrt((n+1)(n+2)) c_{n+2}^* c_n
    let mut s1 = Complex64::new(0.0, 0.0);
    let mut s2 = Complex64::new(0.0, 0.0);
    let mut diag = 0.0;
    let mut norm = 0.0;
    for (n, cn) in c.iter().enumerate() {
        let nf = n as f64;
        norm += cn.norm_sqr();
        diag += (2.0 * nf + 1.0) * cn.norm_sqr();
        if let Some(up) = c.get(n + 1) {
            s1 += up.conj() * cn * (nf + 1.0).sqrt();
        }
        if let Some(up) = c.get(n + 2) {
            s2 += up.conj() * cn * ((nf + 1.0) * (nf + 2.0)).sqrt();
        }
    }
    // The lowering sums are the conjugates of the raising ones.
    let i = Complex64::new(0.0, 1.0);
    let x_mean = (g / 2.0).sqrt() * (s1 + s1.conj()).re;
    let p_mean = (i * (hbar * hbar / (2.0 * g)).sqrt() * (s1 - s1.conj())).re;
    let x2_mean = g / 2.0 * ((s2 + s2.conj()).re + diag);
    let p2_mean = -(hbar * hbar / (2.0 * g)) * ((s2 + s2.conj()).re - diag);
    let xp_sym = (i * hbar * (s2 - s2.conj())).re;
    let uncertainty = (x2_mean - x_mean * x_mean) * (p2_mean - p_mean * p_mean);

    Ok(ObservableSample {
        t: state.t,
        x_mean,
        p_mean,
        x2_mean,
        p2_mean,
        xp_sym,
        autocorr: Complex64::new(0.0, 0.0),
        norm,
        energy: h.expectation(c),
        p_right: 0.0,
        uncertainty,
    })
}

/// `C(t) = sum c_n(t)^* c_n(0)`.
pub fn autocorrelation(state: &CoefficientState, initial: &CoefficientState) -> Result<Complex64> {
    if state.dim() != initial.dim() {
        return Err(Error::DimensionMismatch { expected: initial.dim(), found: state.dim() });
    }
    Ok(state.c.iter().zip(&initial.c).map(|(a, b)| a.conj() * b).sum())
}

/// `Psi(x, t)` sampled at `xs`.
pub fn wavefunction_on_grid(state: &CoefficientState, params: &PhysicalParams, xs: &[f64]) -> Vec<Complex64> {
    let mut phi = vec![0.0; state.dim()];
    xs.iter()
        .map(|&x| {
            oscillator_eigenfunctions(params, x, &mut phi);
            state.c.iter().zip(&phi).map(|(c, p)| c * p).sum()
        })
        .collect()
}

/// `D_{nu lambda} = int_0^inf Psi_nu Psi_lambda dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl OverlapMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, nu: usize, lambda: usize) -> f64 {
        self.data[nu * self.dim + lambda]
    }
}

/// Half-line overlaps of every eigenstate pair.
///
/// The oscillator-basis half-line Gram matrix `B_nk` is integrated once and
/// then rotated, `D = V^T B V`.
pub fn half_line_overlaps(es: &EigenSystem, params: &PhysicalParams) -> OverlapMatrix {
    let dim = es.dim();
    let rule = CompositeRule::half_line(basis_extent(params, dim - 1));
    let mut gram = vec![0.0; dim * dim];
    let mut phi = vec![0.0; dim];
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        oscillator_eigenfunctions(params, x, &mut phi);
        for n in 0..dim {
            let wn = w * phi[n];
            for k in 0..=n {
                gram[n * dim + k] += wn * phi[k];
            }
        }
    }
    for n in 0..dim {
        for k in 0..n {
            gram[k * dim + n] = gram[n * dim + k];
        }
    }

    // B V, then V^T (B V)
    let mut bv = vec![0.0; dim * dim];
    for n in 0..dim {
        for lam in 0..dim {
            bv[n * dim + lam] = (0..dim).map(|k| gram[n * dim + k] * es.component(k, lam)).sum();
        }
    }
    let mut data = vec![0.0; dim * dim];
    for nu in 0..dim {
        for lam in 0..=nu {
            let v: f64 = (0..dim).map(|n| es.component(n, nu) * bv[n * dim + lam]).sum();
            data[nu * dim + lam] = v;
            data[lam * dim + nu] = v;
        }
    }
    OverlapMatrix { dim, data }
}

fn quadratic_form(a: &[Complex64], overlaps: &OverlapMatrix) -> Complex64 {
    let dim = overlaps.dim;
    let mut acc = Complex64::new(0.0, 0.0);
    for nu in 0..dim {
        let row = &overlaps.data[nu * dim..(nu + 1) * dim];
        let inner: Complex64 = row.iter().zip(a).map(|(d, al)| al * d).sum();
        acc += a[nu].conj() * inner;
    }
    acc
}

/// `P_r(t)` of a state: its eigen-coordinates at time `t` contracted with `D`.
pub fn tunneling_probability(state: &CoefficientState, es: &EigenSystem, overlaps: &OverlapMatrix) -> Result<f64> {
    if state.dim() != es.dim() || overlaps.dim != es.dim() {
        return Err(Error::DimensionMismatch { expected: es.dim(), found: state.dim() });
    }
    Ok(quadratic_form(&es.project(&state.c), overlaps).re)
}

/// `P_r(t) = sum a_nu^* a_lambda D_{nu lambda} exp(i (E_nu - E_lambda) t / hbar)`.
pub fn tunneling_probability_eigen(
    amps: &EigenAmplitudes,
    es: &EigenSystem,
    overlaps: &OverlapMatrix,
    params: &PhysicalParams,
    t: f64,
) -> Result<f64> {
    if amps.a.len() != overlaps.dim || es.dim() != overlaps.dim {
        return Err(Error::DimensionMismatch { expected: overlaps.dim, found: amps.a.len() });
    }
    let dim = overlaps.dim;
    let mut acc = Complex64::new(0.0, 0.0);
    for nu in 0..dim {
        for lam in 0..dim {
            let phase = Complex64::from_polar(1.0, (es.values[nu] - es.values[lam]) * t / params.hbar);
            acc += amps.a[nu].conj() * amps.a[lam] * overlaps.get(nu, lam) * phase;
        }
    }
    Ok(acc.re)
}

/// `P_r` by integrating `|Psi(x)|^2` over `x > 0` directly.
pub fn tunneling_probability_grid(state: &CoefficientState, params: &PhysicalParams) -> f64 {
    let rule = CompositeRule::half_line(basis_extent(params, state.dim() - 1));
    let psi = wavefunction_on_grid(state, params, &rule.nodes);
    psi.iter().zip(&rule.weights).map(|(z, w)| w * z.norm_sqr()).sum()
}

/// Largest sampled value of a `P_r` series.
pub fn max_tunneling(series: &[f64]) -> Result<f64> {
    series
        .iter()
        .copied()
        .reduce(f64::max)
        .ok_or_else(|| Error::invalid("series", "cannot take the maximum of an empty series"))
}

/// `(t, P_r)` at the first occurrence of the maximum.
pub fn max_tunneling_at(times: &[f64], series: &[f64]) -> Result<(f64, f64)> {
    if times.len() != series.len() {
        return Err(Error::DimensionMismatch { expected: times.len(), found: series.len() });
    }
    let peak = max_tunneling(series)?;
    let idx = series.iter().position(|&p| p == peak).unwrap_or(0);
    Ok((times[idx], peak))
}

/// Two eigenstates `i`, `j` with real amplitudes normalized to `a_i^2 + a_j^2 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelModel {
    pub i: usize,
    pub j: usize,
    pub a_i: f64,
    pub a_j: f64,
}

impl TwoLevelModel {
    /// Rescales the pair so the squared amplitudes sum to one.
    pub fn new(i: usize, j: usize, a_i: f64, a_j: f64) -> Result<Self> {
        let norm = (a_i * a_i + a_j * a_j).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::invalid("a_i", "two-level amplitudes must not both vanish"));
        }
        if i == j {
            return Err(Error::invalid("j", "the two levels must differ"));
        }
        Ok(Self { i, j, a_i: a_i / norm, a_j: a_j / norm })
    }

    /// Truncates full amplitudes to levels `i` and `j`, keeping their real parts.
    pub fn from_amplitudes(amps: &EigenAmplitudes, i: usize, j: usize) -> Result<Self> {
        let get = |k: usize| {
            amps.a.get(k).map(|z| z.re).ok_or(Error::DimensionMismatch { expected: k + 1, found: amps.a.len() })
        };
        Self::new(i, j, get(i)?, get(j)?)
    }

    fn check(&self, dim: usize) -> Result<()> {
        let top = self.i.max(self.j);
        if top >= dim {
            return Err(Error::DimensionMismatch { expected: top + 1, found: dim });
        }
        Ok(())
    }
}

/// `a_i^2 D_ii + a_j^2 D_jj + 2 a_i a_j D_ij cos((E_i - E_j) t / hbar)`.
pub fn two_level_probability(
    model: &TwoLevelModel,
    es: &EigenSystem,
    overlaps: &OverlapMatrix,
    params: &PhysicalParams,
    t: f64,
) -> Result<f64> {
    model.check(es.dim().min(overlaps.dim))?;
    let (i, j) = (model.i, model.j);
    let de = es.values[i] - es.values[j];
    Ok(model.a_i * model.a_i * overlaps.get(i, i)
        + model.a_j * model.a_j * overlaps.get(j, j)
        + 2.0 * model.a_i * model.a_j * overlaps.get(i, j) * (de * t / params.hbar).cos())
}

/// Cordes–Das closed form `2 a_i^2 a_j^2 (1 - cos((E_i - E_j) t / hbar))`.
pub fn cd_probability(model: &TwoLevelModel, es: &EigenSystem, params: &PhysicalParams, t: f64) -> Result<f64> {
    model.check(es.dim())?;
    let de = es.values[model.i] - es.values[model.j];
    let w = model.a_i * model.a_i * model.a_j * model.a_j;
    Ok(2.0 * w * (1.0 - (de * t / params.hbar).cos()))
}

/// Full observable record for a propagated sequence.
pub fn observe(
    states: &[CoefficientState],
    initial: &CoefficientState,
    params: &PhysicalParams,
    h: &EnergyMatrix,
    es: &EigenSystem,
    overlaps: &OverlapMatrix,
) -> Result<Vec<ObservableSample>> {
    states
        .iter()
        .map(|s| {
            let mut sample = expectations(s, params, h)?;
            sample.autocorr = autocorrelation(s, initial)?;
            sample.p_right = tunneling_probability(s, es, overlaps)?;
            Ok(sample)
        })
        .collect()
}

/// Hysteresis band as a fraction of the half peak-to-peak range.
pub const CROSSING_HYSTERESIS: f64 = 0.4;

/// Oscillation period from midpoint crossings of a sampled signal.
///
/// The signal is shifted by its range midpoint. A crossing counts only once
/// the signal has gone past `±CROSSING_HYSTERESIS` of the half-range on the
/// far side; its time is the linearly interpolated zero just before that.
/// Each counted crossing is half a period. Returns `None` with fewer than two
/// crossings.
pub fn zero_crossing_period(times: &[f64], values: &[f64]) -> Option<f64> {
    if times.len() != values.len() || values.len() < 2 {
        return None;
    }
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let mid = 0.5 * (lo + hi);
    let band = CROSSING_HYSTERESIS * 0.5 * (hi - lo);
    if band <= 0.0 {
        return None;
    }

    #[derive(PartialEq)]
    enum Side {
        Above,
        Below,
    }
    let mut side: Option<Side> = None;
    let mut last_zero: Option<f64> = None;
    let mut events = Vec::new();
    for k in 0..values.len() {
        let z = values[k] - mid;
        if k > 0 {
            let zp = values[k - 1] - mid;
            if (zp < 0.0) != (z < 0.0) {
                last_zero = Some(times[k - 1] + (-zp) / (z - zp) * (times[k] - times[k - 1]));
            }
        }
        let now = if z > band {
            Some(Side::Above)
        } else if z < -band {
            Some(Side::Below)
        } else {
            None
        };
        if let Some(now) = now {
            if side.as_ref().is_some_and(|s| *s != now) {
                if let Some(t0) = last_zero {
                    events.push(t0);
                }
            }
            side = Some(now);
        }
    }
    if events.len() < 2 {
        return None;
    }
    Some(2.0 * (events[events.len() - 1] - events[0]) / (events.len() - 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::initial_coefficients;
    use crate::hamiltonian::{build_matrix, diagonalize, BasisSpec};
    use crate::model::{quartic_from_well, GaussianPacketSpec, WellShape};

    fn system(d: f64) -> (PhysicalParams, EnergyMatrix, EigenSystem) {
        let p = PhysicalParams::default();
        let w = WellShape { d, ..WellShape::default() };
        let h = build_matrix(&quartic_from_well(&p, &w).unwrap(), &p, &BasisSpec::new(30, &p).unwrap());
        let es = diagonalize(&h).unwrap();
        (p, h, es)
    }

    #[test]
    fn gaussian_moments_at_t0() {
        let (p, h, _) = system(0.0);
        // A wider basis removes the truncation bias on the narrow packet's moments.
        let basis = BasisSpec::new(64, &p).unwrap();
        let spec = GaussianPacketSpec::default();
        let proj = initial_coefficients(&spec, &p, &basis, 2.0 * 2f64.sqrt()).unwrap();
        let h64 = build_matrix(
            &quartic_from_well(&p, &WellShape::default()).unwrap(),
            &p,
            &basis,
        );
        let s = expectations(&proj.state, &p, &h64).unwrap();
        assert!((s.x_mean + 2.0 * 2f64.sqrt()).abs() < 1e-6);
        assert!(s.p_mean.abs() < 1e-8);
        assert!((s.x_var() - 0.1).abs() < 1e-6);
        assert!((s.uncertainty - 0.25).abs() < 1e-6);
        assert!(s.xp_sym.abs() < 1e-8);
        assert_eq!(h.dim(), 31);
    }

    #[test]
    fn stationary_state_moments_are_static() {
        let (p, h, es) = system(-0.033);
        let c: Vec<Complex64> = es.vector(2).into_iter().map(|v| Complex64::new(v, 0.0)).collect();
        let a = EigenAmplitudes { a: es.project(&c) };
        let s0 = expectations(&crate::dynamics::state_at(&a, &es, &p, 0.0), &p, &h).unwrap();
        let s1 = expectations(&crate::dynamics::state_at(&a, &es, &p, 37.0), &p, &h).unwrap();
        assert!((s0.x_mean - s1.x_mean).abs() < 1e-12);
        assert!(s0.p_mean.abs() < 1e-12 && s1.p_mean.abs() < 1e-12);
        assert!((s0.energy - es.values[2]).abs() < 1e-12);
    }

    #[test]
    fn autocorrelation_is_one_at_start() {
        let c = CoefficientState { t: 0.0, c: vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8), Complex64::new(0.0, 0.0)] };
        let v = autocorrelation(&c, &c).unwrap();
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let short = CoefficientState { t: 0.0, c: vec![Complex64::new(1.0, 0.0)] };
        assert!(autocorrelation(&c, &short).is_err());
    }

    #[test]
    fn diagonal_overlaps_in_symmetric_well() {
        let (p, _, es) = system(0.0);
        let d = half_line_overlaps(&es, &p);
        for nu in 0..d.dim() {
            assert!((d.get(nu, nu) - 0.5).abs() < 1e-8, "nu={nu}: {}", d.get(nu, nu));
            for lam in 0..d.dim() {
                assert_eq!(d.get(nu, lam), d.get(lam, nu));
            }
        }
    }

    #[test]
    fn resonant_well_ground_state_sits_right() {
        let (p, _, es) = system(-0.033);
        assert!(half_line_overlaps(&es, &p).get(0, 0) > 0.9);
    }

    #[test]
    fn max_tunneling_edge_cases() {
        assert!(max_tunneling(&[]).is_err());
        assert_eq!(max_tunneling(&[0.3; 7]).unwrap(), 0.3);
        assert_eq!(max_tunneling_at(&[0.0, 1.0, 2.0], &[0.1, 0.7, 0.2]).unwrap(), (1.0, 0.7));
    }

    #[test]
    fn one_level_limits() {
        let (p, _, es) = system(-0.01);
        let d = half_line_overlaps(&es, &p);
        let m = TwoLevelModel::new(1, 2, 1.0, 0.0).unwrap();
        for t in [0.0, 3.0, 100.0] {
            assert!((two_level_probability(&m, &es, &d, &p, t).unwrap() - d.get(1, 1)).abs() < 1e-15);
            assert_eq!(cd_probability(&m, &es, &p, t).unwrap(), 0.0);
        }
        assert!(TwoLevelModel::new(0, 1, 0.0, 0.0).is_err());
        assert!(TwoLevelModel::new(1, 1, 1.0, 1.0).is_err());
        assert!(cd_probability(&TwoLevelModel::new(0, 40, 1.0, 1.0).unwrap(), &es, &p, 1.0).is_err());
    }

    #[test]
    fn cordes_das_peak() {
        let (p, _, es) = system(0.0);
        let m = TwoLevelModel::new(0, 1, 1.0, 1.0).unwrap();
        assert_eq!(cd_probability(&m, &es, &p, 0.0).unwrap(), 0.0);
        let de = es.values[1] - es.values[0];
        let peak = cd_probability(&m, &es, &p, std::f64::consts::PI / de).unwrap();
        assert!((peak - 1.0).abs() < 1e-12);
    }

    #[test]
    fn crossing_period_of_sine() {
        let t: Vec<f64> = (0..4000).map(|k| k as f64 * 0.25).collect();
        let y: Vec<f64> = t.iter().map(|t| 0.3 + 2.0 * (2.0 * std::f64::consts::PI * t / 87.0).sin()).collect();
        let period = zero_crossing_period(&t, &y).unwrap();
        assert!((period - 87.0).abs() < 1e-3, "{period}");
        assert!(zero_crossing_period(&t, &vec![1.0; t.len()]).is_none());
    }

    #[test]
    fn crossing_period_ignores_ripple() {
        let t: Vec<f64> = (0..8000).map(|k| k as f64 * 0.125).collect();
        let y: Vec<f64> = t
            .iter()
            .map(|t| (2.0 * std::f64::consts::PI * t / 200.0).cos() + 0.3 * (2.0 * std::f64::consts::PI * t / 6.0).sin())
            .collect();
        let period = zero_crossing_period(&t, &y).unwrap();
        assert!((period - 200.0).abs() < 2.0, "{period}");
    }
}
