//! The invariant suite behind the `validate` subcommand.
//!
//! Structural checks run on the configured background; closed-form checks
//! use the free particle with unit mass.

use deltaprime_core::dressing::dress;
use deltaprime_core::green0::free_green;
use deltaprime_core::regularization::fit_log_slope;
use deltaprime_core::{
    assemble_general, dress_delta, dress_delta_prime, epsilon_scan, transmission_from_green,
    AsymptoticChannel, Complex64, Frequency, G0Evaluator, GreenKernel, HomogeneousPair,
    MassProfile, MollifierShape, PotentialSpec, ProblemSpec, SingularParams, Surrogate,
};

use crate::config::ScenarioConfig;
use crate::error::CliError;
use crate::scenario::{problem, VALIDATE_COLUMNS};
use crate::table::ResultTable;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub id: &'static str,
    pub measured: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.measured < self.tolerance
    }
}

fn free_problem(eta: f64) -> Result<ProblemSpec, CliError> {
    Ok(ProblemSpec::new(MassProfile::constant(1.0)?, PotentialSpec::free(), Frequency::new(0.5, eta)?))
}

fn probe_points(p: &ProblemSpec) -> Vec<f64> {
    let (lo, hi) = p.window();
    let reach = lo.abs().max(hi.abs()).clamp(1.0, 6.0);
    [-0.9, -0.55, -0.2, 0.15, 0.45, 0.8]
        .iter()
        .map(|f| f * reach)
        .collect()
}

fn derivative_jump(g: &G0Evaluator, xp: f64) -> Result<Complex64, CliError> {
    let h = 1e-4;
    let f = |x: f64| g.value(x, xp);
    let right = (-3.0 * f(xp)? + 4.0 * f(xp + h)? - f(xp + 2.0 * h)?) / (2.0 * h);
    let left = (3.0 * f(xp)? - 4.0 * f(xp - h)? + f(xp - 2.0 * h)?) / (2.0 * h);
    Ok(right - left)
}

fn structural_checks(p: &ProblemSpec, beta: f64) -> Result<Vec<Check>, CliError> {
    let pair = HomogeneousPair::solve(p)?;
    let spread = pair.reduced_spread();
    let g = G0Evaluator::new(pair.clone())?;
    let xs = probe_points(p);

    let mut asym: f64 = 0.0;
    for &x in &xs {
        for &xp in &xs {
            let a = g.value(x, xp)?;
            asym = asym.max((a - g.value(xp, x)?).norm() / a.norm());
        }
    }

    let mut jump: f64 = 0.0;
    for &xp in &xs {
        let m = p.mass().value(xp);
        jump = jump.max((derivative_jump(&g, xp)? - m).norm() / m);
    }

    let s = Complex64::from_polar(1234.5, 0.7);
    let scaled = G0Evaluator::new(HomogeneousPair::from_solutions(pair.y1().scaled(s), pair.y2().clone())?)?;
    let mut gauge: f64 = 0.0;
    for &x in &xs {
        for &xp in &xs {
            let a = g.value(x, xp)?;
            gauge = gauge.max((scaled.value(x, xp)? - a).norm() / a.norm());
        }
    }

    // β ≠ 0 separates the half-lines whatever α is.
    let beta = if beta == 0.0 { 1.0 } else { beta };
    let mut leak: f64 = 0.0;
    let mut alpha_spread: f64 = 0.0;
    let reference = dress(&g, SingularParams::new(0.0, beta, Surrogate::Limit)?)?;
    for alpha in [0.0, 1.0, 10.0] {
        let d = dress(&g, SingularParams::new(alpha, beta, Surrogate::Limit)?)?;
        for &x in xs.iter().filter(|&&x| x > 0.0) {
            for &xp in xs.iter().filter(|&&x| x < 0.0) {
                let scale = g.value(x, xp)?.norm();
                leak = leak.max(d.value(x, xp)?.norm() / scale).max(d.value(xp, x)?.norm() / scale);
            }
        }
        for &xp in &xs {
            leak = leak.max(d.value(0.0, xp)?.norm() / g.value(0.0, xp)?.norm());
        }
        for &x in &xs {
            for &xp in &xs {
                let b = reference.value(x, xp)?;
                if b.norm() > 0.0 {
                    alpha_spread = alpha_spread.max((d.value(x, xp)? - b).norm() / b.norm());
                }
            }
        }
    }

    let ps = [1e2, 1e3, 1e4, 1e5, 1e6];
    let limit = dress_delta_prime(&g)?;
    let mut errs = Vec::new();
    for &pv in &ps {
        let d = assemble_general(&g, SingularParams::new(3.0, 1.0, Surrogate::Finite(Complex64::new(pv, 0.0)))?)?;
        let mut e: f64 = 0.0;
        for &x in &xs {
            for &xp in &xs {
                e = e.max((d.value(x, xp)? - limit.value(x, xp)?).norm() / g.value(x, xp)?.norm());
            }
        }
        errs.push(e);
    }
    let slope = fit_log_slope(&ps, &errs).unwrap_or(f64::MAX);

    Ok(vec![
        Check { id: "reduced-constant-spread", measured: spread, tolerance: 1e-8 },
        Check { id: "g0-symmetry", measured: asym, tolerance: 1e-10 },
        Check { id: "derivative-jump", measured: jump, tolerance: 1e-6 },
        Check { id: "gauge-invariance", measured: gauge, tolerance: 1e-12 },
        Check { id: "zero-transmission", measured: leak, tolerance: 1e-12 },
        Check { id: "alpha-independence", measured: alpha_spread, tolerance: 1e-12 },
        Check { id: "finite-p-exponent", measured: (slope + 1.0).abs(), tolerance: 0.1 },
    ])
}

fn reference_checks() -> Result<Vec<Check>, CliError> {
    let p = free_problem(1e-6)?;
    let g = G0Evaluator::build(&p)?;
    let (k, _) = p.wavenumbers();
    let xs: Vec<f64> = (0..21).map(|j| -5.0 + 0.5 * j as f64).collect();
    let values = g.matrix(&xs, &xs)?;
    let mut closed: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        for (j, &xp) in xs.iter().enumerate() {
            let want = free_green(1.0, k, x, xp);
            closed = closed.max((values[i * xs.len() + j] - want).norm() / want.norm());
        }
    }

    let sharp = free_problem(1e-12)?;
    let gs = G0Evaluator::build(&sharp)?;
    let s = transmission_from_green(&dress_delta(&gs, 2.0)?, &AsymptoticChannel::of(&sharp), 1.0, -1.0)?;
    let delta_t = (s.transmission - 0.5).abs();

    let wall = dress_delta_prime(&g)?;
    let strong = dress_delta(&g, 1e6)?;
    let mut hard: f64 = 0.0;
    for &x in &[-3.1, -1.0, -0.25, 0.4, 1.0, 2.7] {
        for &xp in &[-2.2, -0.6, 0.3, 1.3, 3.5] {
            let (a, b) = (strong.value(x, xp)?, wall.value(x, xp)?);
            hard = hard.max((a - b).norm() / b.norm().max(g.value(x, xp)?.norm()));
        }
    }

    let scan = epsilon_scan(0.0, 0.7, 0.5, MollifierShape::Gaussian, &[0.2, 0.1, 0.05, 0.025])?;

    Ok(vec![
        Check { id: "free-closed-form", measured: closed, tolerance: 1e-8 },
        Check { id: "delta-transmission", measured: delta_t, tolerance: 1e-10 },
        Check { id: "hard-wall-equivalence", measured: hard, tolerance: 1e-5 },
        Check { id: "scan-unitarity", measured: scan.max_unitarity_defect(), tolerance: 1e-8 },
        Check { id: "scan-monotone", measured: scan.non_monotone.len() as f64, tolerance: 0.5 },
    ])
}

pub fn validation_checks(config: &ScenarioConfig) -> Result<Vec<Check>, CliError> {
    let mut checks = structural_checks(&problem(config)?, config.singular.beta)?;
    checks.extend(reference_checks()?);
    Ok(checks)
}

fn table_of(checks: &[Check]) -> Result<ResultTable, CliError> {
    let mut table = ResultTable::new(&VALIDATE_COLUMNS);
    for c in checks {
        table.push(vec![c.id.into(), c.passed().into(), c.measured.into(), c.tolerance.into()])?;
    }
    Ok(table)
}

pub fn run_validation(config: &ScenarioConfig) -> Result<ResultTable, CliError> {
    let mut checks = validation_checks(config)?;
    let table = table_of(&checks)?;
    let same = ResultTable::parse_csv(&table.to_csv_string())? == table;
    checks.push(Check { id: "csv-round-trip", measured: if same { 0.0 } else { 1.0 }, tolerance: 0.5 });
    table_of(&checks)
}
