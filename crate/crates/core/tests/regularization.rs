mod common;

use common::*;
use deltaprime_core::quadrature::GaussLegendre;
use deltaprime_core::regularization::{
    extrapolate_to_zero, mollifier, oracle_green, Mollifier, ScanResult,
};
use deltaprime_core::{
    build_regularized_potential, dress_delta, epsilon_scan, transfer_matrix_scatter, Complex64,
    Frequency, GreenKernel, MassProfile, MollifierShape, PotentialSpec, RegularizationSpec,
};

const SHAPES: [MollifierShape; 3] = [
    MollifierShape::Gaussian,
    MollifierShape::LorentzianTruncated,
    MollifierShape::PairedRectangles,
];

fn integrate(m: &Mollifier, f: impl Fn(f64) -> f64) -> f64 {
    let rule = GaussLegendre::new(40);
    let mut b = m.breakpoints();
    b.sort_by(f64::total_cmp);
    b.windows(2)
        .map(|w| rule.integrate_panels(w[0], w[1], 64, &f))
        .sum()
}

#[test]
fn mollifier_moments_for_every_shape() {
    for shape in SHAPES {
        for eps in [0.2, 0.1, 0.05, 0.025] {
            let m = mollifier(RegularizationSpec::new(shape, eps).unwrap());
            let zeroth = integrate(&m, |x| m.value(x));
            let slope = integrate(&m, |x| m.derivative(x));
            let first = integrate(&m, |x| x * m.derivative(x));
            assert!((zeroth - 1.0).abs() < 1e-10, "{shape:?} {eps}: {zeroth}");
            assert!(slope.abs() < 1e-10, "{shape:?} {eps}: {slope}");
            assert!((first + 1.0).abs() < 1e-8, "{shape:?} {eps}: {first}");
        }
    }
}

#[test]
fn smoothing_error_is_second_order() {
    // ∫ cos(x) g_ε(x) dx - 1 for a gaussian is e^{-ε²/2} - 1 ≈ -ε²/2.
    let errs: Vec<f64> = [0.2, 0.1, 0.05]
        .iter()
        .map(|&eps| {
            let m = mollifier(RegularizationSpec::new(MollifierShape::Gaussian, eps).unwrap());
            (integrate(&m, |x| x.cos() * m.value(x)) - 1.0).abs()
        })
        .collect();
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((ratio - 4.0).abs() < 0.05, "{ratio}");
    }
}

#[test]
fn regularized_potential_examples() {
    let spec = RegularizationSpec::new(MollifierShape::Gaussian, 0.05).unwrap();
    let well = build_regularized_potential(1.0, 0.0, spec);
    let reg = well.regularized().unwrap();
    let m = *reg.mollifier();
    let mass = integrate(&m, |x| reg.value(x));
    assert!((mass + 1.0).abs() < 1e-10, "{mass}");
    assert!(reg.value(0.0) < 0.0);

    let dipole = build_regularized_potential(0.0, 1.0, spec);
    let reg = dipole.regularized().unwrap();
    assert!(integrate(&m, |x| reg.value(x)).abs() < 1e-10);
    assert!((reg.value(0.03) + reg.value(-0.03)).abs() < 1e-12);

    let narrow = RegularizationSpec::new(MollifierShape::Gaussian, 0.025).unwrap();
    let peak = |s: RegularizationSpec| {
        let m = mollifier(s);
        // |g′| peaks at x = ±σ for a gaussian.
        m.derivative(-s.epsilon).abs()
    };
    assert!((peak(narrow) / peak(spec) - 4.0).abs() < 1e-12);
}

#[test]
fn transfer_matrix_examples() {
    let spec = RegularizationSpec::new(MollifierShape::Gaussian, 0.1).unwrap();
    let free = build_regularized_potential(0.0, 0.0, spec);
    let s = transfer_matrix_scatter(&free, 1.0, 0.5).unwrap();
    assert!((s.t - 1.0).norm() < 1e-10);
    assert!(s.r.norm() < 1e-10);

    let barrier = build_regularized_potential(-50.0, 0.0, spec);
    let s = transfer_matrix_scatter(&barrier, 1.0, 0.5).unwrap();
    assert!(s.transmission < 1e-3, "{}", s.transmission);
    assert!(s.unitarity_defect() < 1e-8);

    let err = transfer_matrix_scatter(&PotentialSpec::free(), 1.0, -0.1).unwrap_err();
    assert_eq!(err.class(), "EvanescentChannel");
}

#[test]
fn extrapolated_delta_transmission() {
    let eps = [0.2, 0.1, 0.05, 0.025, 0.0125];
    for shape in [MollifierShape::Gaussian, MollifierShape::PairedRectangles] {
        let scan = epsilon_scan(2.0, 0.0, 0.5, shape, &eps).unwrap();
        let t: Vec<Complex64> = scan.rows.iter().map(|r| Complex64::new(r.result.transmission, 0.0)).collect();
        let limit = extrapolate_to_zero(&eps, &t).re;
        // 1 / (1 + (αm/2k)²) with α = 2, m = 1, k = 1.
        assert!((limit - 0.5).abs() < 1e-4, "{shape:?}: {limit}");
    }
}

fn check_rows(scan: &ScanResult) {
    for row in &scan.rows {
        assert!(row.result.unitarity_defect() < 1e-8, "ε = {}", row.epsilon);
    }
}

#[test]
fn trivial_scans() {
    let eps = [0.2, 0.1, 0.05];
    let none = epsilon_scan(0.0, 0.0, 0.5, MollifierShape::Gaussian, &eps).unwrap();
    for row in &none.rows {
        assert!((row.result.transmission - 1.0).abs() < 1e-12);
    }
    let delta = epsilon_scan(2.0, 0.0, 0.5, MollifierShape::Gaussian, &eps).unwrap();
    check_rows(&delta);
    assert!(epsilon_scan(0.0, 1.0, 0.5, MollifierShape::Gaussian, &[0.1, 0.2]).is_err());
}

#[test]
fn delta_prime_scan_is_monotone_and_unitary() {
    let eps = [0.2, 0.1, 0.05, 0.025];
    for beta in [0.3, 0.7, 1.5, -0.7] {
        for shape in SHAPES {
            let scan = epsilon_scan(0.0, beta, 0.5, shape, &eps).unwrap();
            check_rows(&scan);
            assert_eq!(scan.rows.len(), eps.len());
            // Non-monotone rows are reported, never an error.
            assert_eq!(scan.is_monotone(), scan.non_monotone.is_empty());
        }
    }
    let scan = epsilon_scan(0.0, 0.7, 0.5, MollifierShape::Gaussian, &eps).unwrap();
    assert!(scan.is_monotone(), "{:?}", scan.non_monotone);
    assert!(scan.fitted_exponent.unwrap() > 0.0);
}

#[test]
fn scaling_consistency() {
    // x → 2x maps width 2ε at energy E onto width ε at energy 4E with α
    // doubled; the adaptive integrator halves its steps accordingly.
    for shape in SHAPES {
        for (alpha, beta) in [(2.0, 0.0), (0.0, 0.7), (1.0, -0.4)] {
            let wide = RegularizationSpec::new(shape, 0.1).unwrap();
            let narrow = RegularizationSpec::new(shape, 0.05).unwrap();
            let a = transfer_matrix_scatter(&build_regularized_potential(alpha, beta, wide), 1.0, 0.5).unwrap();
            let b = transfer_matrix_scatter(&build_regularized_potential(2.0 * alpha, beta, narrow), 1.0, 2.0)
                .unwrap();
            assert!((a.transmission - b.transmission).abs() < 1e-6, "{shape:?} {alpha} {beta}");
        }
    }
}

#[test]
fn oracle_green_without_coupling_is_g0() {
    let spec = RegularizationSpec::new(MollifierShape::Gaussian, 0.1).unwrap();
    let bare = build_regularized_potential(0.0, 0.0, spec);
    let omega = Frequency::new(0.5, ETA).unwrap();
    let mass = MassProfile::constant(1.0).unwrap();
    let g = build(&free(ETA));
    for (x, xp) in [(1.0, -1.0), (0.3, 0.7), (-2.0, -0.5)] {
        let o = oracle_green(&bare, &mass, omega, x, xp).unwrap();
        let want = g.value(x, xp).unwrap();
        assert!((o - want).norm() < 1e-9 * want.norm(), "{x} {xp}");
    }
}

#[test]
fn oracle_green_matches_delta_dressing() {
    let eps = [0.2, 0.1, 0.05, 0.025, 0.0125];
    let omega = Frequency::new(0.5, ETA).unwrap();
    let mass = MassProfile::constant(1.0).unwrap();
    let dressed = dress_delta(&build(&free(ETA)), 2.0).unwrap();
    let pairs = [(1.0, -1.0), (2.0, -2.0), (3.0, -2.0), (-2.0, -3.0), (2.0, 3.0), (-2.5, 2.2)];
    for (x, xp) in pairs {
        let values: Vec<Complex64> = eps
            .iter()
            .map(|&e| {
                let spec = RegularizationSpec::new(MollifierShape::Gaussian, e).unwrap();
                let pot = build_regularized_potential(2.0, 0.0, spec);
                oracle_green(&pot, &mass, omega, x, xp).unwrap()
            })
            .collect();
        let limit = extrapolate_to_zero(&eps, &values);
        let want = dressed.value(x, xp).unwrap();
        let rel = (limit - want).norm() / want.norm();
        assert!(rel < 1e-4, "({x}, {xp}): {rel:e}");
    }
}

#[test]
fn oracle_green_across_delta_prime_shrinks() {
    let omega = Frequency::new(0.5, ETA).unwrap();
    let mass = MassProfile::constant(1.0).unwrap();
    let mags: Vec<f64> = [0.1, 0.05, 0.025]
        .iter()
        .map(|&e| {
            let spec = RegularizationSpec::new(MollifierShape::Gaussian, e).unwrap();
            oracle_green(&build_regularized_potential(0.0, 0.7, spec), &mass, omega, 1.0, -1.0)
                .unwrap()
                .norm()
        })
        .collect();
    assert!(mags.windows(2).all(|w| w[1] < w[0]), "{mags:?}");
    let free_mag = build(&free(ETA)).value(1.0, -1.0).unwrap().norm();
    assert!(mags[2] < 0.5 * free_mag);
}
