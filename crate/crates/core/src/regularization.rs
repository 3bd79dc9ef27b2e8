//! Mollified point interactions and a brute-force scattering oracle.
//!
//! `δ` is replaced by a unit-mass bump `g_ε` and `δ′` by its derivative, the
//! resulting smooth potential is integrated directly, and the `ε → 0`
//! behaviour is scanned.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::green0::{G0Evaluator, GreenKernel};
use crate::homogeneous::ProblemSpec;
use crate::ode::{self, State, Tolerances};
use crate::profile::{smoothstep, smoothstep_derivative, wavenumber, Frequency, MassProfile, PotentialSpec};
use crate::quadrature::integrate_adaptive;
use crate::scattering::ScatteringResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MollifierShape {
    Gaussian,
    /// Lorentzian multiplied by a C² taper that reaches zero at the cutoff.
    LorentzianTruncated,
    /// Triangular bump whose derivative is a pair of opposite rectangles.
    PairedRectangles,
}

impl MollifierShape {
    pub fn name(self) -> &'static str {
        match self {
            MollifierShape::Gaussian => "gaussian",
            MollifierShape::LorentzianTruncated => "lorentzian-truncated",
            MollifierShape::PairedRectangles => "paired-rectangles",
        }
    }

    pub fn default_cutoff(self) -> f64 {
        match self {
            MollifierShape::Gaussian => 8.0,
            MollifierShape::LorentzianTruncated => 40.0,
            MollifierShape::PairedRectangles => 1.0,
        }
    }
}

impl std::str::FromStr for MollifierShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Self::Gaussian),
            "lorentzian-truncated" => Ok(Self::LorentzianTruncated),
            "paired-rectangles" => Ok(Self::PairedRectangles),
            other => Err(Error::InvalidInput(format!("unknown mollifier shape '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularizationSpec {
    pub shape: MollifierShape,
    pub epsilon: f64,
    /// Support half-width in units of `epsilon`.
    pub cutoff: f64,
}

impl RegularizationSpec {
    pub fn new(shape: MollifierShape, epsilon: f64) -> Result<Self> {
        Self::with_cutoff(shape, epsilon, shape.default_cutoff())
    }

    pub fn with_cutoff(shape: MollifierShape, epsilon: f64, cutoff: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidInput(format!("mollifier width must be positive (got {epsilon})")));
        }
        let cutoff = match shape {
            MollifierShape::PairedRectangles => 1.0,
            MollifierShape::Gaussian if cutoff < 8.0 => {
                return Err(Error::InvalidInput("gaussian cutoff must be at least 8ε".into()))
            }
            _ if !(cutoff > 1.0) => {
                return Err(Error::InvalidInput("cutoff must exceed one width".into()))
            }
            _ => cutoff,
        };
        Ok(Self { shape, epsilon, cutoff })
    }
}

/// `g_ε` and its exact derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mollifier {
    spec: RegularizationSpec,
    /// Normalization of the tapered Lorentzian.
    norm: f64,
}

const TAPER_START: f64 = 0.5;

fn taper(u: f64) -> (f64, f64) {
    // 1 on [0, TAPER_START], C² descent to 0 at u = 1.
    let s = (u - TAPER_START) / (1.0 - TAPER_START);
    (
        1.0 - smoothstep(s),
        -smoothstep_derivative(s) / (1.0 - TAPER_START),
    )
}

pub fn mollifier(spec: RegularizationSpec) -> Mollifier {
    let norm = match spec.shape {
        MollifierShape::LorentzianTruncated => {
            let c = spec.cutoff;
            // ε = 1 shape; the width scales out.
            2.0 * integrate_adaptive(0.0, c, 1e-15, |u| {
                taper(u / c).0 / (std::f64::consts::PI * (1.0 + u * u))
            })
        }
        _ => 1.0,
    };
    Mollifier { spec, norm }
}

impl Mollifier {
    pub fn spec(&self) -> RegularizationSpec {
        self.spec
    }

    /// Half-width of the support.
    pub fn reach(&self) -> f64 {
        self.spec.cutoff * self.spec.epsilon
    }

    pub fn value(&self, x: f64) -> f64 {
        let e = self.spec.epsilon;
        if x.abs() >= self.reach() {
            return 0.0;
        }
        match self.spec.shape {
            MollifierShape::Gaussian => {
                (-0.5 * (x / e).powi(2)).exp() / ((2.0 * std::f64::consts::PI).sqrt() * e)
            }
            MollifierShape::LorentzianTruncated => {
                let u = x / e;
                taper(u.abs() / self.spec.cutoff).0
                    / (std::f64::consts::PI * e * (1.0 + u * u) * self.norm)
            }
            MollifierShape::PairedRectangles => (e - x.abs()) / (e * e),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let e = self.spec.epsilon;
        if x.abs() >= self.reach() {
            return 0.0;
        }
        match self.spec.shape {
            MollifierShape::Gaussian => -x / (e * e) * self.value(x),
            MollifierShape::LorentzianTruncated => {
                let u = x / e;
                let c = self.spec.cutoff;
                let (t, dt) = taper(u.abs() / c);
                let lor = 1.0 / (1.0 + u * u);
                let dlor = -2.0 * u * lor * lor;
                let dt_du = dt / c * u.signum();
                (dlor * t + lor * dt_du) / (std::f64::consts::PI * e * e * self.norm)
            }
            MollifierShape::PairedRectangles => {
                if x == 0.0 {
                    0.0
                } else {
                    -x.signum() / (e * e)
                }
            }
        }
    }

    /// Points where the profile or its derivative is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        let r = self.reach();
        match self.spec.shape {
            MollifierShape::LorentzianTruncated => {
                let t = TAPER_START * r;
                vec![-r, -t, 0.0, t, r]
            }
            _ => vec![-r, 0.0, r],
        }
    }
}

/// `U_ε(x) = -α g_ε(x) + β g_ε′(x)`, as it enters the operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularizedCoupling {
    pub alpha: f64,
    pub beta: f64,
    mollifier: Mollifier,
}

impl RegularizedCoupling {
    pub fn new(alpha: f64, beta: f64, spec: RegularizationSpec) -> Self {
        Self { alpha, beta, mollifier: mollifier(spec) }
    }

    pub fn mollifier(&self) -> &Mollifier {
        &self.mollifier
    }

    pub fn value(&self, x: f64) -> f64 {
        let m = &self.mollifier;
        let mut u = 0.0;
        if self.alpha != 0.0 {
            u -= self.alpha * m.value(x);
        }
        if self.beta != 0.0 {
            u += self.beta * m.derivative(x);
        }
        u
    }

    /// Contribution to the Schrödinger potential `v`. The dressing formulas
    /// solve `G = G₀ + ∫ G₀ U G`, i.e. the operator coefficient is
    /// `2(ω - v) - U`, so `U` shifts `v` by `U/2`.
    pub fn schrodinger_value(&self, x: f64) -> f64 {
        0.5 * self.value(x)
    }

    pub fn support(&self) -> (f64, f64) {
        let r = self.mollifier.reach();
        (-r, r)
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        self.mollifier.breakpoints()
    }
}

/// Free background carrying the mollified `-α δ + β δ′`.
pub fn build_regularized_potential(alpha: f64, beta: f64, spec: RegularizationSpec) -> PotentialSpec {
    PotentialSpec::free().with_regularized(RegularizedCoupling::new(alpha, beta, spec))
}

/// Adds the mollified coupling to an existing background.
pub fn add_regularized(
    background: PotentialSpec,
    alpha: f64,
    beta: f64,
    spec: RegularizationSpec,
) -> PotentialSpec {
    background.with_regularized(RegularizedCoupling::new(alpha, beta, spec))
}

/// Plane-wave matching at real energy: starts from the pure outgoing wave
/// `e^{ik₊x}` right of the window, integrates leftward and splits the result
/// into `A e^{ik₋x} + B e^{-ik₋x}`; then `t = 1/A`, `r = B/A`.
pub fn transfer_matrix_scatter(potential: &PotentialSpec, mass: f64, energy: f64) -> Result<ScatteringResult> {
    transfer_matrix_scatter_with(potential, mass, energy, Tolerances::default())
}

pub fn transfer_matrix_scatter_with(
    potential: &PotentialSpec,
    mass: f64,
    energy: f64,
    tol: Tolerances,
) -> Result<ScatteringResult> {
    if !(mass > 0.0) {
        return Err(Error::NonPositiveMass { x: 0.0, mass });
    }
    let (v_minus, v_plus) = potential.flanks();
    if !(energy > v_minus && energy > v_plus) {
        return Err(Error::EvanescentChannel {
            side: if energy <= v_minus { "left" } else { "right" },
        });
    }
    let w = Complex64::new(energy, 0.0);
    let km = wavenumber(mass, v_minus, w).re;
    let kp = wavenumber(mass, v_plus, w).re;
    let (wlo, whi) = potential.window().unwrap_or((0.0, 0.0));
    let (lo, hi) = (wlo.min(0.0) - 0.5, whi.max(0.0) + 0.5);
    let coeffs = move |x: f64| (mass, Complex64::new(2.0 * (energy - potential.value(x)), 0.0));
    let i = Complex64::i();
    let y0 = (i * kp * hi).exp();
    let initial = State::new(y0, i * kp / mass * y0);
    let mut breaks = potential.breakpoints();
    breaks.push(0.0);
    let traj = ode::integrate(&coeffs, hi, lo, initial, 0.0, &breaks, tol)?;
    let last = traj.anchors().last().expect("trajectory has anchors");
    let scale = last.ln_scale.exp();
    let y = last.state[0] * scale;
    let dy = last.state[1] * mass * scale;
    let ik = i * km;
    let a = 0.5 * (y + dy / ik) * (-ik * lo).exp();
    let b = 0.5 * (y - dy / ik) * (ik * lo).exp();
    if !(a.norm() > 0.0) || !a.re.is_finite() {
        return Err(Error::IntegrationFailure {
            x: lo,
            reason: "incident amplitude vanished".into(),
        });
    }
    Ok(ScatteringResult::new(1.0 / a, b / a, kp / km))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub epsilon: f64,
    pub result: ScatteringResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub rows: Vec<ScanRow>,
    /// Least-squares slope of `ln T` against `ln ε`, when every `T > 0`.
    pub fitted_exponent: Option<f64>,
    /// Widths at which `T` rose although `ε` decreased.
    pub non_monotone: Vec<f64>,
}

impl ScanResult {
    pub fn is_monotone(&self) -> bool {
        self.non_monotone.is_empty()
    }

    pub fn max_unitarity_defect(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.result.unitarity_defect())
            .fold(0.0, f64::max)
    }
}

/// Scans `T(ε)` for the mollified coupling on a free background with unit
/// mass. `epsilons` must be strictly decreasing.
pub fn epsilon_scan(
    alpha: f64,
    beta: f64,
    energy: f64,
    shape: MollifierShape,
    epsilons: &[f64],
) -> Result<ScanResult> {
    epsilon_scan_with(alpha, beta, energy, 1.0, shape, epsilons)
}

pub fn epsilon_scan_with(
    alpha: f64,
    beta: f64,
    energy: f64,
    mass: f64,
    shape: MollifierShape,
    epsilons: &[f64],
) -> Result<ScanResult> {
    if epsilons.is_empty() {
        return Err(Error::InvalidInput("empty ε list".into()));
    }
    if epsilons.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidInput("ε list must be strictly decreasing".into()));
    }
    let rows: Vec<ScanRow> = epsilons
        .par_iter()
        .map(|&epsilon| {
            let spec = RegularizationSpec::new(shape, epsilon)?;
            let potential = build_regularized_potential(alpha, beta, spec);
            let result = transfer_matrix_scatter(&potential, mass, energy)?;
            Ok(ScanRow { epsilon, result })
        })
        .collect::<Result<_>>()?;
    let non_monotone = rows
        .windows(2)
        .filter(|w| w[1].result.transmission > w[0].result.transmission)
        .map(|w| w[1].epsilon)
        .collect();
    let fitted_exponent = fit_log_slope(
        &rows.iter().map(|r| r.epsilon).collect::<Vec<_>>(),
        &rows.iter().map(|r| r.result.transmission).collect::<Vec<_>>(),
    );
    Ok(ScanResult { rows, fitted_exponent, non_monotone })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn fit_log_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() < 2 || xs.len() != ys.len() || ys.iter().any(|&y| !(y > 0.0)) {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Value at `ε = 0` of the interpolating polynomial through `(ε_j, f_j)`.
///
/// Mollified point interactions pick up corrections of first order in `ε`
/// (from second-order multiple scattering inside the bump) as well as
/// second order, so the full polynomial is used rather than a series in
/// `ε²` alone.
pub fn extrapolate_to_zero(epsilons: &[f64], values: &[Complex64]) -> Complex64 {
    assert_eq!(epsilons.len(), values.len());
    let mut p = values.to_vec();
    let n = p.len();
    for level in 1..n {
        for j in 0..n - level {
            let (xa, xb) = (epsilons[j], epsilons[j + level]);
            p[j] = (xa * p[j + 1] - xb * p[j]) / (xa - xb);
        }
    }
    p[0]
}

/// Green's function of the regularized problem, built directly with the
/// mollified coupling folded into the potential.
pub fn oracle_green(
    potential: &PotentialSpec,
    mass: &MassProfile,
    omega: Frequency,
    x: f64,
    xp: f64,
) -> Result<Complex64> {
    let problem = ProblemSpec::new(mass.clone(), potential.clone(), omega);
    G0Evaluator::build(&problem)?.value(x, xp)
}
