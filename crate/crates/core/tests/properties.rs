use dwell_core::dynamics::{
    evolve_spectral_a, evolve_spectral_b, initial_coefficients, state_at, to_eigen_amplitudes, CoefficientState,
    EvolutionSettings,
};
use dwell_core::hamiltonian::{build_matrix, BasisSpec};
use dwell_core::model::{
    oscillator_eigenfunctions, packet_value, quartic_from_well, stationary_points, GaussianPacketSpec, PhysicalParams,
    WellShape,
};
use dwell_core::observables::{expectations, half_line_overlaps};
use dwell_core::quadrature::CompositeRule;
use dwell_core::system::DoubleWellSystem;
use dwell_core::Complex64;
use proptest::prelude::*;

const X_S: f64 = 2.0 * std::f64::consts::SQRT_2;
const D_LIMIT: f64 = 0.07;

fn system(d: f64) -> DoubleWellSystem {
    DoubleWellSystem::new(PhysicalParams::default(), WellShape { d, ..WellShape::default() }, 30).unwrap()
}

fn sup_norm(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn l2_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

fn params_strategy() -> impl Strategy<Value = PhysicalParams> {
    (0.5..2.0f64, 0.5..2.0f64, 0.5..2.0f64).prop_map(|(m, w, h)| PhysicalParams::new(m, w, h).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn potential_mirror_antisymmetry(d in -D_LIMIT..D_LIMIT, x in -6.0..6.0f64) {
        let p = PhysicalParams::default();
        let plus = WellShape { d, ..WellShape::default() };
        let minus = WellShape { d: -d, ..WellShape::default() };
        let (up, um) = (plus.potential(&p, x), minus.potential(&p, -x));
        prop_assert!((up - um).abs() <= 1e-12 * up.abs().max(1.0));
        let c = quartic_from_well(&p, &plus).unwrap();
        prop_assert!((c.mirrored().value(x) - c.value(-x)).abs() <= 1e-12 * c.value(x).abs().max(1.0));
    }

    #[test]
    fn minima_offset_is_linear_in_d(d in -D_LIMIT..D_LIMIT, x_s in 1.0..4.0f64) {
        let p = PhysicalParams::default();
        let well = WellShape::new(x_s, d);
        prop_assume!(well.validate(&p).is_ok());
        let sp = stationary_points(&p, &well).unwrap();
        let unit = stationary_points(&p, &WellShape::new(x_s, 0.0)).unwrap();
        prop_assert!((sp.delta_u - 4.0 * d * x_s.powi(3) / 3.0).abs() < 1e-12);
        prop_assert!((sp.u_plus - sp.u_minus - sp.delta_u).abs() < 1e-12);
        prop_assert!((well.potential(&p, x_s) - sp.u_plus).abs() < 1e-10);
        prop_assert!((well.potential(&p, sp.x_u) - sp.u_barrier).abs() < 1e-10);
        prop_assert_eq!(unit.delta_u, 0.0);
    }

    #[test]
    fn position_recurrence_of_oscillator_functions(params in params_strategy(), x in -6.0..6.0f64) {
        let n_max = 40;
        let mut phi = vec![0.0; n_max + 2];
        oscillator_eigenfunctions(&params, x, &mut phi);
        let s = (params.g() / 2.0).sqrt();
        for n in 1..=n_max {
            let rhs = s * ((n as f64 + 1.0).sqrt() * phi[n + 1] + (n as f64).sqrt() * phi[n - 1]);
            prop_assert!((x * phi[n] - rhs).abs() < 1e-12, "n={}", n);
        }
    }

    #[test]
    fn packet_is_normalized_and_reflects(x0 in -3.0..3.0f64, p0 in -1.0..1.0f64, mu in 0.05..1.0f64, alpha in -1.0..1.0f64) {
        let p = PhysicalParams::default();
        let spec = GaussianPacketSpec::new(x0, p0, mu, alpha).unwrap();
        let rule = CompositeRule::symmetric(15.0);
        let norm = rule.integrate(|x| packet_value(&spec, &p, x).norm_sqr());
        prop_assert!((norm - 1.0).abs() < 1e-12);
        let mirrored = GaussianPacketSpec::new(-x0, -p0, mu, alpha).unwrap();
        for x in [-1.3, 0.0, 0.7, 2.9] {
            let a = packet_value(&spec, &p, x);
            let b = packet_value(&mirrored, &p, -x);
            prop_assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn spectrum_is_even_in_d(d in -D_LIMIT..D_LIMIT) {
        let (plus, minus) = (system(d), system(-d));
        for (a, b) in plus.eigen.values.iter().zip(&minus.eigen.values) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn half_line_overlaps_flip_with_d(d in -D_LIMIT..D_LIMIT) {
        let (plus, minus) = (system(d), system(-d));
        let (dp, dm) = (plus.overlaps(), minus.overlaps());
        for nu in 0..dp.dim() {
            prop_assert!((dp.get(nu, nu) + dm.get(nu, nu) - 1.0).abs() < 1e-8);
            prop_assert!((0.0..=1.0).contains(&dp.get(nu, nu)));
        }
    }

    #[test]
    fn robertson_bound_holds(
        d in -D_LIMIT..D_LIMIT,
        x0 in -3.0..3.0f64,
        p0 in -0.5..0.5f64,
        mu in 0.1..1.0f64,
        alpha in -0.5..0.5f64,
        t in 0.0..400.0f64,
    ) {
        let sys = system(d);
        let packet = sys.project_packet(&GaussianPacketSpec::new(x0, p0, mu, alpha).unwrap()).unwrap();
        let amps = sys.amplitudes(&packet).unwrap();
        let s = expectations(&state_at(&amps, &sys.eigen, &sys.params, t), &sys.params, &sys.matrix).unwrap();
        prop_assert!(s.uncertainty >= 0.25 - 1e-9, "{}", s.uncertainty);
        prop_assert!(s.x2_mean >= s.x_mean * s.x_mean);
        prop_assert!(s.p2_mean >= s.p_mean * s.p_mean);
    }

    #[test]
    fn amplitudes_preserve_norm(d in -D_LIMIT..D_LIMIT, x0 in -3.0..3.0f64, mu in 0.1..1.0f64) {
        let sys = system(d);
        let packet = sys.project_packet(&GaussianPacketSpec::new(x0, 0.2, mu, 0.0).unwrap()).unwrap();
        let amps = sys.amplitudes(&packet).unwrap();
        prop_assert!((amps.norm() - packet.state.norm()).abs() < 1e-10);
        let back = state_at(&amps, &sys.eigen, &sys.params, 0.0);
        prop_assert!(sup_norm(&back.c, &packet.state.c) < 1e-12);
    }

    #[test]
    fn methods_agree_on_random_scenarios(d in -D_LIMIT..D_LIMIT, x0 in -3.0..3.0f64, p0 in -0.5..0.5f64) {
        let sys = system(d);
        let packet = sys.project_packet(&GaussianPacketSpec::new(x0, p0, 0.3, 0.0).unwrap()).unwrap();
        let settings = EvolutionSettings { t_max: 30.0, dt_out: 10.0, ..Default::default() };
        let a = evolve_spectral_a(&packet.state, &sys.matrix, &sys.params, &settings).unwrap();
        let b = evolve_spectral_b(&sys.amplitudes(&packet).unwrap(), &sys.eigen, &sys.params, &settings).unwrap();
        for (sa, sb) in a.iter().zip(&b) {
            prop_assert_eq!(sa.t, sb.t);
            prop_assert!(sup_norm(&sa.c, &sb.c) <= 1e-6);
        }
    }
}

#[test]
fn method_b_satisfies_the_coefficient_equation() {
    let sys = system(-0.02);
    let packet = sys.project_packet(&GaussianPacketSpec::default()).unwrap();
    let amps = sys.amplitudes(&packet).unwrap();
    let t = 37.3;
    let mut previous = f64::INFINITY;
    for h in [1e-2, 5e-3, 2.5e-3] {
        let (lo, hi) = (state_at(&amps, &sys.eigen, &sys.params, t - h), state_at(&amps, &sys.eigen, &sys.params, t + h));
        let mid = state_at(&amps, &sys.eigen, &sys.params, t);
        let mut hc = vec![Complex64::new(0.0, 0.0); mid.dim()];
        sys.matrix.apply(&mid.c, &mut hc);
        let err = lo
            .c
            .iter()
            .zip(&hi.c)
            .zip(&hc)
            .map(|((l, u), hc)| ((u - l) / (2.0 * h) - hc * Complex64::new(0.0, -1.0 / sys.params.hbar)).norm())
            .fold(0.0, f64::max);
        // second-order central difference: halving h cuts the error about fourfold
        assert!(err < previous / 3.0, "h={h}: {err} vs {previous}");
        previous = err;
    }
    assert!(previous < 1e-3);
}

#[test]
fn time_reversal_returns_to_start() {
    let sys = system(0.0);
    let packet = sys.project_packet(&GaussianPacketSpec::default()).unwrap();
    let amps = sys.amplitudes(&packet).unwrap();
    let settings = EvolutionSettings { t_max: 100.0, dt_out: 100.0, ..Default::default() };
    let forward = evolve_spectral_a(&packet.state, &sys.matrix, &sys.params, &settings).unwrap();
    let end = forward.last().unwrap();
    let exact = state_at(&amps, &sys.eigen, &sys.params, end.t);
    let forward_error = l2_distance(&end.c, &exact.c);

    let reversed = CoefficientState { t: 0.0, c: end.conjugated().c };
    let back = evolve_spectral_a(&reversed, &sys.matrix, &sys.params, &settings).unwrap();
    let back_error = l2_distance(&back.last().unwrap().conjugated().c, &packet.state.c);
    assert!(back_error <= 2.0 * forward_error, "{back_error} vs {forward_error}");

    let exact_reversed = CoefficientState { t: 0.0, c: exact.conjugated().c };
    let exact_back = state_at(&to_eigen_amplitudes(&exact_reversed, &sys.eigen).unwrap(), &sys.eigen, &sys.params, end.t);
    assert!(sup_norm(&exact_back.conjugated().c, &packet.state.c) < 1e-12);
}

#[test]
fn norm_drift_stays_within_per_time_bound() {
    let sys = system(0.0);
    let packet = sys.project_packet(&GaussianPacketSpec::default()).unwrap();
    let settings = EvolutionSettings { t_max: 200.0, dt_out: 1.0, ..Default::default() };
    let states = evolve_spectral_a(&packet.state, &sys.matrix, &sys.params, &settings).unwrap();
    let n0 = packet.state.norm();
    for s in &states {
        assert!((s.norm() - n0).abs() <= 10.0 * settings.rel_tol * s.t.max(1.0), "t={}", s.t);
    }
}

#[test]
fn position_via_eigenstate_matrix_elements() {
    // <x(t)> = sum a_nu^* a_lam X_{nu lam} exp(i (E_nu - E_lam) t), X = V^T x V
    let sys = system(-0.02);
    let packet = sys.project_packet(&GaussianPacketSpec::new(-X_S, 0.0, 0.3, 0.0).unwrap()).unwrap();
    let amps = sys.amplitudes(&packet).unwrap();
    let dim = sys.eigen.dim();
    let s = (sys.params.g() / 2.0).sqrt();
    let x_nk = |n: usize, k: usize| {
        if n == k + 1 {
            s * (n as f64).sqrt()
        } else if k == n + 1 {
            s * (k as f64).sqrt()
        } else {
            0.0
        }
    };
    let mut x_eig = vec![0.0; dim * dim];
    for nu in 0..dim {
        for lam in 0..dim {
            let mut acc = 0.0;
            for n in 0..dim {
                for k in n.saturating_sub(1)..(n + 2).min(dim) {
                    acc += sys.eigen.component(n, nu) * x_nk(n, k) * sys.eigen.component(k, lam);
                }
            }
            x_eig[nu * dim + lam] = acc;
        }
    }
    for t in [0.0, 13.0, 71.5, 240.0] {
        let mut via_eigen = Complex64::new(0.0, 0.0);
        for nu in 0..dim {
            for lam in 0..dim {
                let phase = Complex64::from_polar(1.0, (sys.eigen.values[nu] - sys.eigen.values[lam]) * t);
                via_eigen += amps.a[nu].conj() * amps.a[lam] * x_eig[nu * dim + lam] * phase;
            }
        }
        let direct = expectations(&state_at(&amps, &sys.eigen, &sys.params, t), &sys.params, &sys.matrix).unwrap();
        assert!((via_eigen.re - direct.x_mean).abs() < 1e-12, "t={t}");
        assert!(via_eigen.im.abs() < 1e-12);
    }
}

#[test]
fn eigenpairs_match_nalgebra() {
    for d in [0.0, -0.033, 0.066] {
        let sys = system(d);
        let dim = sys.matrix.dim();
        let m = nalgebra::DMatrix::from_row_slice(dim, dim, sys.matrix.as_slice());
        let oracle = nalgebra::SymmetricEigen::new(m);
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| oracle.eigenvalues[a].total_cmp(&oracle.eigenvalues[b]));
        for (nu, &j) in order.iter().enumerate() {
            assert!((sys.eigen.values[nu] - oracle.eigenvalues[j]).abs() < 1e-11);
            let ours = sys.eigen.vector(nu);
            let dot: f64 = ours.iter().enumerate().map(|(n, v)| v * oracle.eigenvectors[(n, j)]).sum();
            assert!((dot.abs() - 1.0).abs() < 1e-9, "d={d} nu={nu} dot={dot}");
        }
    }
}

#[test]
fn oscillator_functions_are_orthonormal() {
    let p = PhysicalParams::new(1.3, 0.8, 0.9).unwrap();
    let n_max = 64;
    let rule = CompositeRule::symmetric(dwell_core::quadrature::basis_extent(&p, n_max));
    let mut gram = vec![0.0; (n_max + 1) * (n_max + 1)];
    let mut phi = vec![0.0; n_max + 1];
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        oscillator_eigenfunctions(&p, x, &mut phi);
        for n in 0..=n_max {
            for k in 0..=n_max {
                gram[n * (n_max + 1) + k] += w * phi[n] * phi[k];
            }
        }
    }
    for n in 0..=n_max {
        for k in 0..=n_max {
            let expect = if n == k { 1.0 } else { 0.0 };
            assert!((gram[n * (n_max + 1) + k] - expect).abs() < 1e-12, "({n},{k})");
        }
    }
}

#[test]
fn overlap_matrix_is_symmetric_and_bounded() {
    let sys = system(0.04);
    let d = half_line_overlaps(&sys.eigen, &sys.params);
    for nu in 0..d.dim() {
        for lam in 0..d.dim() {
            assert_eq!(d.get(nu, lam), d.get(lam, nu));
        }
    }
    let basis = BasisSpec::new(30, &sys.params).unwrap();
    let h = build_matrix(&sys.coeffs, &sys.params, &basis);
    assert_eq!(h, sys.matrix);
    let c0 = initial_coefficients(&GaussianPacketSpec::default(), &sys.params, &basis, X_S).unwrap();
    assert!(c0.is_well_captured());
}
