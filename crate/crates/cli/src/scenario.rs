//! Turns a [`ScenarioConfig`] into a [`ResultTable`].

use std::time::{SystemTime, UNIX_EPOCH};

use deltaprime_core::dressing::dress;
use deltaprime_core::wavepacket::SynthesisOptions;
use deltaprime_core::{
    calibrate_propagator, epsilon_scan_with, propagate_wavepacket, transmission_from_green,
    AsymptoticChannel, Complex64, Frequency, G0Evaluator, GreenKernel, MassProfile,
    MollifierShape, PotentialShape, PotentialSpec, ProblemSpec, SingularParams, Surrogate, Table,
    WavePacket,
};
use log::info;

use crate::config::{
    FrequencyConfig, MassConfig, PotentialConfig, Scenario, ScenarioConfig, SurrogateConfig,
};
use crate::error::CliError;
use crate::table::{format_float, ResultTable};
use crate::validate::run_validation;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const GREEN_COLUMNS: [&str; 4] = ["x", "x_prime", "re_g", "im_g"];
pub const SCATTER_COLUMNS: [&str; 7] = ["omega_re", "T", "R", "re_t", "im_t", "re_r", "im_r"];
pub const WAVEPACKET_COLUMNS: [&str; 4] = ["x", "re_psi", "im_psi", "prob"];
pub const SCAN_COLUMNS: [&str; 7] = ["epsilon", "T", "R", "re_t", "im_t", "re_r", "im_r"];
pub const VALIDATE_COLUMNS: [&str; 4] = ["id", "passed", "measured", "tolerance"];

fn read_table(config: &ScenarioConfig, path: &std::path::Path) -> Result<Table, CliError> {
    let full = config.base_dir.join(path);
    let text = std::fs::read_to_string(&full).map_err(|source| CliError::Io { path: full.clone(), source })?;
    Ok(Table::parse(&text)?)
}

pub fn mass_profile(config: &ScenarioConfig) -> Result<MassProfile, CliError> {
    Ok(match &config.mass {
        MassConfig::Constant { value } => MassProfile::constant(*value)?,
        MassConfig::SmoothStep { minus, plus, start, end } => MassProfile::smooth_step(*minus, *plus, *start, *end)?,
        MassConfig::Table { path } => MassProfile::tabulated(read_table(config, path)?)?,
    })
}

pub fn potential_spec(config: &ScenarioConfig) -> Result<PotentialSpec, CliError> {
    let shape = match &config.potential {
        PotentialConfig::Free { level } => PotentialShape::Free { level: *level },
        PotentialConfig::Harmonic { stiffness, half_width } => {
            PotentialShape::Harmonic { stiffness: *stiffness, half_width: *half_width }
        }
        PotentialConfig::LinearField { field, half_width } => {
            PotentialShape::LinearField { field: *field, half_width: *half_width }
        }
        PotentialConfig::PiecewisePolynomial { breaks, coefficients, outside } => PotentialShape::PiecewisePolynomial {
            breaks: breaks.clone(),
            coefficients: coefficients.clone(),
            outside: (outside[0], outside[1]),
        },
        PotentialConfig::Table { path } => return Ok(PotentialSpec::tabulated(read_table(config, path)?)),
    };
    Ok(PotentialSpec::new(shape)?)
}

fn frequency(f: &FrequencyConfig) -> Result<Frequency, CliError> {
    Ok(Frequency::new(f.re, f.im)?)
}

pub fn problem(config: &ScenarioConfig) -> Result<ProblemSpec, CliError> {
    let f = config
        .frequency
        .as_ref()
        .ok_or_else(|| CliError::Validation("frequency: required".into()))?;
    Ok(ProblemSpec::new(mass_profile(config)?, potential_spec(config)?, frequency(f)?))
}

pub fn singular_params(config: &ScenarioConfig) -> Result<SingularParams, CliError> {
    let s = &config.singular;
    let surrogate = match &s.p {
        SurrogateConfig::Named(_) => Surrogate::Limit,
        SurrogateConfig::Real(p) => Surrogate::Finite(Complex64::new(*p, 0.0)),
        SurrogateConfig::Complex([re, im]) => Surrogate::Finite(Complex64::new(*re, *im)),
    };
    Ok(SingularParams::new(s.alpha, s.beta, surrogate)?)
}

fn green_table<K: GreenKernel>(kernel: &K, xs: &[f64]) -> Result<ResultTable, CliError> {
    let values = kernel.matrix(xs, xs)?;
    let mut table = ResultTable::new(&GREEN_COLUMNS);
    for (i, &x) in xs.iter().enumerate() {
        for (j, &xp) in xs.iter().enumerate() {
            let g = values[i * xs.len() + j];
            table.push_numbers(&[x, xp, g.re, g.im])?;
        }
    }
    Ok(table)
}

fn run_g0(config: &ScenarioConfig) -> Result<ResultTable, CliError> {
    let g = G0Evaluator::build(&problem(config)?)?;
    green_table(&g, &config.grid.expect("validated").points())
}

fn run_dress(config: &ScenarioConfig) -> Result<ResultTable, CliError> {
    let g = G0Evaluator::build(&problem(config)?)?;
    let d = dress(&g, singular_params(config)?)?;
    let mut table = green_table(&d, &config.grid.expect("validated").points())?;
    table.metadata.push(format!("provenance: {}", d.provenance().tag()));
    Ok(table)
}

fn run_scatter(config: &ScenarioConfig) -> Result<ResultTable, CliError> {
    let p = problem(config)?;
    let g = G0Evaluator::build(&p)?;
    let d = dress(&g, singular_params(config)?)?;
    let (lo, hi) = p.window();
    let probes = config.probes.unwrap_or_default();
    let x = probes.x.unwrap_or(hi + 1.0);
    let xp = probes.x_prime.unwrap_or(lo - 1.0);
    let channel = AsymptoticChannel::of(&p);
    let s = transmission_from_green(&d, &channel, x, xp)?;
    let mut table = ResultTable::new(&SCATTER_COLUMNS);
    table.push_numbers(&[p.omega().re(), s.transmission, s.reflection, s.t.re, s.t.im, s.r.re, s.r.im])?;
    table.metadata.push(format!("probes: x = {}, x_prime = {}", format_float(x), format_float(xp)));
    table.metadata.push(format!("provenance: {}", d.provenance().tag()));
    Ok(table)
}

fn run_wavepacket(config: &ScenarioConfig) -> Result<ResultTable, CliError> {
    let w = config.wavepacket.expect("validated");
    let mass = mass_profile(config)?;
    let potential = potential_spec(config)?;
    let params = singular_params(config)?;
    let (m_minus, _) = mass.asymptotic();
    let (v_minus, _) = potential.flanks();
    let options = SynthesisOptions { eta: w.eta, panels_per_k: w.panels_per_k, ..Default::default() };
    let packet = WavePacket::new(w.x0, w.k0, w.sigma)?;

    let free_family = |omega: Frequency| {
        let p = ProblemSpec::new(
            MassProfile::constant(m_minus)?,
            PotentialSpec::new(PotentialShape::Free { level: v_minus })?,
            omega,
        )
        .with_probes(21);
        G0Evaluator::build(&p)
    };
    let calibration_time = w.calibration_duration.unwrap_or(w.duration);
    let calibration = calibrate_propagator(&free_family, &packet, v_minus, m_minus, calibration_time, &options)?;
    info!("calibration constant {}", calibration.constant);

    let family = |omega: Frequency| {
        let p = ProblemSpec::new(mass.clone(), potential.clone(), omega).with_probes(21);
        dress(&G0Evaluator::build(&p)?, params)
    };
    let xs = config.grid.expect("validated").points();
    let psi = propagate_wavepacket(&family, &packet, v_minus, m_minus, w.duration, &xs, &calibration, &options)?;
    let mut table = ResultTable::new(&WAVEPACKET_COLUMNS);
    for (&x, v) in xs.iter().zip(&psi) {
        table.push_numbers(&[x, v.re, v.im, v.norm_sqr()])?;
    }
    table.metadata.push(format!(
        "calibration: constant = {} {}i, norm_defect = {}, eta_sensitivity = {}",
        format_float(calibration.constant.re),
        format_float(calibration.constant.im),
        format_float(calibration.norm_defect),
        format_float(calibration.eta_sensitivity),
    ));
    table.metadata.push(format!("duration: {}", format_float(w.duration)));
    Ok(table)
}

fn run_scan(config: &ScenarioConfig) -> Result<ResultTable, CliError> {
    let s = config.scan.as_ref().expect("validated");
    let mass = match config.mass {
        MassConfig::Constant { value } => value,
        _ => return Err(CliError::Validation("mass: scan needs a constant mass".into())),
    };
    if !matches!(config.potential, PotentialConfig::Free { level } if level == 0.0) {
        return Err(CliError::Validation("potential: scan runs on the free background".into()));
    }
    let shape: MollifierShape = s
        .shape
        .parse()
        .map_err(|_| CliError::Validation("scan.shape: unknown mollifier".into()))?;
    let energy = s.k * s.k / (2.0 * mass);
    let scan = epsilon_scan_with(config.singular.alpha, config.singular.beta, energy, mass, shape, &s.epsilons)?;
    let mut table = ResultTable::new(&SCAN_COLUMNS);
    for row in &scan.rows {
        let r = &row.result;
        table.push_numbers(&[row.epsilon, r.transmission, r.reflection, r.t.re, r.t.im, r.r.re, r.r.im])?;
    }
    table.metadata.push(format!(
        "fitted_exponent: {}",
        scan.fitted_exponent.map_or("none".to_string(), format_float)
    ));
    let flags: Vec<String> = scan.non_monotone.iter().map(|&e| format_float(e)).collect();
    table.metadata.push(format!("non_monotone: [{}]", flags.join(", ")));
    Ok(table)
}

/// Runs the scenario and attaches the metadata header.
pub fn run_scenario(config: &ScenarioConfig) -> Result<ResultTable, CliError> {
    info!("running scenario {}", config.scenario.name());
    let mut table = match config.scenario {
        Scenario::G0 => run_g0(config),
        Scenario::Dress => run_dress(config),
        Scenario::Scatter => run_scatter(config),
        Scenario::Wavepacket => run_wavepacket(config),
        Scenario::Scan => run_scan(config),
        Scenario::Validate => run_validation(config),
    }?;
    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let mut header = vec![
        format!("deltaprime {VERSION}"),
        format!("scenario: {}", config.scenario.name()),
        format!("generated_unix: {stamp}"),
        "config:".to_string(),
    ];
    header.extend(config.to_toml().lines().filter(|l| !l.is_empty()).map(|l| format!("  {l}")));
    header.append(&mut table.metadata);
    table.metadata = header;
    Ok(table)
}
