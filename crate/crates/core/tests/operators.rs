use chronopath::operators::{
    basis_state, bch_reorder_check, build_realization, clock_profile, coarse_grain_state,
    coarse_grained_state_at, compare_path_sums, fidelity, parity_translation_check,
    path_sum_closed, path_sum_direct, peak_path_state, phenomenological_commutator,
    schrodinger_sweep, uniform_superposition, CVector, OperatorRealization, Wavepacket,
};
use chronopath::{
    analytic_peaks, binomial_profile, gaussian_envelope, interference, nudge_off_poles, Error,
    ModelParams, Normalization,
};
use num_complex::Complex64;
use std::f64::consts::PI;

/// δt for an N-step sum with δt²λN = θ, with θ moved off the pole lattice.
fn step_for(theta: f64, lambda: f64, n_steps: u64) -> f64 {
    let p = nudge_off_poles(&ModelParams::new(1.0, theta, n_steps).unwrap()).unwrap();
    (p.theta() / (lambda * n_steps as f64)).sqrt()
}

#[test]
fn iterated_product_matches_interference_expansion() {
    for dim in [64usize, 128] {
        let base = build_realization(dim, 1.0).unwrap();
        for theta in [2.23 * PI, 3.0 * PI] {
            for n_steps in 1..=12u64 {
                let dt = step_for(theta, 1.0, n_steps);
                let real = base.centered_for_paths(n_steps as f64 * dt);
                let res = compare_path_sums(&real, n_steps, dt).unwrap();
                assert!(
                    res.fidelity >= 1.0 - 1e-8,
                    "dim={dim} θ={}π N={n_steps}: deficit {:e}",
                    theta / PI,
                    1.0 - res.fidelity
                );
            }
        }
    }
}

#[test]
fn expansion_holds_for_a_second_reference_state() {
    let base = build_realization(128, 1.0).unwrap();
    let phi = Wavepacket {
        x0: -2.0,
        p0: 0.5,
        width: 0.9,
    }
    .to_state(128);
    let real = base.with_reference_state(phi).unwrap();
    for n_steps in [5u64, 9, 12] {
        let dt = step_for(2.23 * PI, 1.0, n_steps);
        let res = compare_path_sums(&real, n_steps, dt).unwrap();
        assert!(
            res.fidelity >= 1.0 - 1e-8,
            "N={n_steps}: {:e}",
            1.0 - res.fidelity
        );
    }
}

#[test]
fn two_step_expansion_by_hand() {
    // (B + F)²φ = BBφ + (BF + FB)φ + FFφ with FB = e^{−iz}BF, so the middle
    // weight is 1 + e^{−iz} = e^{−iz/2}·2cos(z/2).
    let real = build_realization(128, 1.0).unwrap();
    let dt = 0.9;
    let z = dt * dt;
    let b = |v: &CVector| real.h_backward().evolve(v, -dt);
    let f = |v: &CVector| real.h_forward().evolve(v, dt);
    let phi = real.phi();
    let weight = Complex64::from_polar(2.0 * (z / 2.0).cos(), -z / 2.0);
    let by_hand = b(&b(phi)) + b(&f(phi)) * weight + f(&f(phi));

    let p = ModelParams::from_lambda(dt * 2f64.sqrt(), 1.0, 2).unwrap();
    let w = interference(&p, 1).unwrap().to_complex().unwrap();
    assert!((w - weight).norm() < 1e-14);

    let closed = path_sum_closed(&real, 2, dt).unwrap();
    let direct = path_sum_direct(&real, 2, dt);
    assert!((&closed - &by_hand).norm() < 1e-12);
    assert!(fidelity(&direct, &by_hand) >= 1.0 - 1e-12);
}

#[test]
fn commuting_pair_gives_binomial_weights() {
    let real = build_realization(64, 0.0).unwrap();
    for n_steps in 1..=12u64 {
        let dt = 0.05;
        let direct = path_sum_direct(&real, n_steps, dt);
        let closed = path_sum_closed(&real, n_steps, dt).unwrap();
        assert!(fidelity(&direct, &closed) >= 1.0 - 1e-12);

        let weights = binomial_profile(n_steps).weights();
        let mut expect = CVector::zeros(64);
        for (n, w) in weights.iter().enumerate() {
            let shift = (2.0 * n as f64 - n_steps as f64) * dt;
            expect += real.h_forward().evolve(real.phi(), shift) * Complex64::new(*w, 0.0);
        }
        // Binomial weights are C(N, n)/2^N.
        let scale = 2f64.powi(n_steps as i32);
        assert!((&direct - &expect * Complex64::new(scale, 0.0)).norm() < 1e-10 * scale);
    }
}

#[test]
fn symmetric_limit_clock_profile_is_gaussian() {
    // With H = ω n̂ and 2ωδt = 2π/d the translated references are orthonormal,
    // so the overlaps read off the path-sum weights directly.
    let dim = 256;
    let n_steps = 200u64;
    let real = OperatorRealization::time_symmetric(dim, 1.0).unwrap();
    let dt = PI / dim as f64;
    let state = path_sum_direct(&real, n_steps, dt);
    let overlaps = clock_profile(&real, &state, n_steps, dt);
    let top = overlaps.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let binomial = binomial_profile(n_steps);
    let expect = binomial.normalized(Normalization::Max);
    let mut gap: f64 = 0.0;
    for (n, c) in overlaps.iter().enumerate() {
        let m = c.norm() / top;
        assert!((m - expect[n]).abs() < 1e-10, "n={n}");
        gap = gap.max((m - gaussian_envelope(binomial.abscissa(n as u64), 1.0)).abs());
    }
    assert!(gap <= 0.02, "sup-norm gap {gap}");
}

#[test]
fn realization_identities() {
    let real = build_realization(64, 1.0).unwrap();
    assert!(real.commutator_defect() <= 1e-10);
    assert_eq!(real.time_reversal_defect(), 0.0);
    let id = real.parity() * real.parity();
    assert_eq!(id, chronopath::operators::CMatrix::identity(64, 64));
    let v = Wavepacket {
        x0: 1.0,
        p0: 0.0,
        width: 1.3,
    }
    .to_state(64);
    let v_real = v.map(|c| Complex64::new(c.re, 0.0));
    let tt = real
        .time_reversal()
        .apply(&real.time_reversal().apply(&v_real));
    assert_eq!(tt, v_real);
    assert!(matches!(
        build_realization(8, 1.0),
        Err(Error::DimTooSmall { dim: 8 })
    ));
}

#[test]
fn reference_state_is_broad_in_energy() {
    let theta = 2.2288 * PI;
    for lambda in [0.3, 1.0, 4.0] {
        let real = build_realization(96, lambda).unwrap();
        let p = real.model_params(theta, 100).unwrap();
        let stats = real.energy_statistics(real.phi());
        assert!((real.phi().norm() - 1.0).abs() < 1e-14);
        let floor = 1.0 / (2.0 * p.sigma_t().powi(2));
        assert!(
            stats.var_forward > 2.0 * PI * floor,
            "{} vs {floor}",
            stats.var_forward
        );
    }
}

#[test]
fn propagators_are_unitary() {
    let real = build_realization(128, 1.3).unwrap();
    let states = [
        real.phi().clone(),
        uniform_superposition(128),
        Wavepacket {
            x0: 2.0,
            p0: -1.0,
            width: 0.7,
        }
        .to_state(128),
    ];
    for t in [-3.1, -0.2, 0.05, 1.0, 7.5] {
        for h in [real.h_forward(), real.h_backward(), real.momentum()] {
            for v in &states {
                assert!((h.evolve(v, t).norm() - 1.0).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn reordering_phase() {
    let real = build_realization(128, 1.0).unwrap();
    let p = real.model_params(2.23 * PI, 12).unwrap();
    let t = 0.1 * p.sigma_t();

    let trivial = bch_reorder_check(&real, 0.0, t);
    assert_eq!(trivial.discrepancy, 0.0);

    let check = bch_reorder_check(&real, t, t);
    assert!(check.discrepancy <= 1e-8, "{:e}", check.discrepancy);
    let expect = real.lambda() * t * t;
    assert!(
        (check.phase - expect).abs() <= 1e-8,
        "{} vs {expect}",
        check.phase
    );

    let wide = bch_reorder_check(&real, 0.7, -1.9);
    assert!(wide.discrepancy <= 1e-8);
    assert!((wide.phase - (-0.7 * 1.9)).abs() <= 1e-8);
}

#[test]
fn coarse_graining_keeps_the_dominant_path() {
    let base = build_realization(128, 1.0).unwrap();
    for theta in [2.23 * PI, 3.0 * PI] {
        let p = base.model_params(theta, 12).unwrap();
        let real = base.centered_for_paths(12.0 * p.delta_t());
        let at_zero = coarse_grained_state_at(&real, &p, 0.0).unwrap();
        assert!((&at_zero - real.phi()).norm() < 1e-14);
        let cg = coarse_grain_state(&real, &p).unwrap();
        let single = peak_path_state(&real, &p).unwrap();
        assert!(fidelity(&cg, &single) >= 1.0 - 1e-6);
    }
}

fn assert_quadratic(sweep: &[(f64, f64)]) {
    for w in sweep.windows(2) {
        let ratio = w[0].1 / w[1].1;
        assert!((ratio - 4.0).abs() <= 0.2, "h={} ratio {ratio}", w[0].0);
    }
}

#[test]
fn schrodinger_residual_is_second_order() {
    let steps = [0.04, 0.02, 0.01, 0.005];
    let base = build_realization(128, 1.0).unwrap();
    let p = base.model_params(2.23 * PI, 12).unwrap();
    let t = analytic_peaks(&p).unwrap().t_c_peak;
    let real = base.centered_for_paths(12.0 * p.delta_t());
    assert_quadratic(&schrodinger_sweep(&real, &p, t, &steps).unwrap());
    // The recovered equation does not depend on the reference state.
    let other = base
        .with_reference_state(
            Wavepacket {
                x0: 1.0,
                p0: -0.5,
                width: 0.8,
            }
            .to_state(128),
        )
        .unwrap();
    assert_quadratic(&schrodinger_sweep(&other, &p, 0.5 * t, &steps).unwrap());
}

#[test]
fn coarse_grained_commutator() {
    for lambda in [1.0, 0.4] {
        let real = build_realization(128, lambda).unwrap();
        for theta in [2.23 * PI, 3.0 * PI] {
            let p = real.model_params(theta, 100).unwrap();
            let c = phenomenological_commutator(&real, &p).unwrap();
            assert!(c.relative_error() <= 1e-8, "θ={}π: {:?}", theta / PI, c);
            assert!((c.scalar - c.from_weights).norm() <= 1e-8 * lambda);
            assert!(c.interior_defect <= 1e-8 * lambda);
        }
        let at_default = real.model_params(2.23 * PI, 100).unwrap();
        let c = phenomenological_commutator(&real, &at_default).unwrap();
        assert!((c.scalar - Complex64::new(0.0, -1.115 * lambda)).norm() <= 1e-8);

        // Near θ = 2π the coarse-grained commutator approaches the elemental one.
        let edge = real.model_params(2.0 * PI + 1e-7, 100).unwrap();
        let c = phenomenological_commutator(&real, &edge).unwrap();
        assert!((c.scalar - Complex64::new(0.0, -lambda)).norm() <= 1e-7 * lambda);
    }
}

#[test]
fn parity_reverses_translations() {
    let real = build_realization(128, 1.0).unwrap();
    let zero = parity_translation_check(&real, 0.0);
    assert_eq!(zero.translation_defect, 0.0);
    let one = parity_translation_check(&real, 1.0);
    assert!(
        one.translation_defect <= 1e-10,
        "{:e}",
        one.translation_defect
    );
    assert!(one.momentum_defect <= 1e-12);
}

#[test]
fn ground_state_saturates_the_energy_uncertainty() {
    for lambda in [1.0, 2.5, -0.8] {
        let real = build_realization(64, lambda).unwrap();
        let stats = real.energy_statistics(&basis_state(64, 0));
        let target = lambda.abs() / 2.0;
        assert!((stats.uncertainty_product() - target).abs() <= 1e-10);
        assert!(stats.covariance.abs() <= 1e-10);
        // ⟨[H_B, H_F]⟩ = iλ.
        assert!((stats.commutator - Complex64::new(0.0, lambda)).norm() <= 1e-10);
        // Robertson: ΔH_F·ΔH_B ≥ |⟨[H_B, H_F]⟩|/2 holds with equality.
        assert!((stats.uncertainty_product() - stats.commutator.norm() / 2.0).abs() <= 1e-10);
    }
}
