//! Homogeneous solutions of `d/dx[(1/m) dy/dx] + V(x; ω) y = 0` with
//! outgoing plane-wave asymptotics, and their Wronskian.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ode::{self, LinearCoefficients, State, Tolerances, Trajectory};
use crate::profile::{wavenumber, Frequency, MassProfile, PotentialSpec};

/// Relative independence `|W| / (|z₁| |z₂|)` below which the two solutions
/// are treated as proportional.
pub const DEPENDENCE_THRESHOLD: f64 = 1e-8;
/// Allowed relative spread of `m/Δ` over the probe grid.
pub const REDUCED_SPREAD_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_PROBES: usize = 201;

/// A complete problem: mass, smooth potential, frequency and truncation.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    mass: MassProfile,
    potential: PotentialSpec,
    omega: Frequency,
    truncation: Option<(f64, f64)>,
    tolerances: Tolerances,
    probes: usize,
}

impl ProblemSpec {
    pub fn new(mass: MassProfile, potential: PotentialSpec, omega: Frequency) -> Self {
        Self {
            mass,
            potential,
            omega,
            truncation: None,
            tolerances: Tolerances::default(),
            probes: DEFAULT_PROBES,
        }
    }

    /// Explicit truncation points; both must lie outside the interaction window.
    pub fn with_truncation(mut self, lo: f64, hi: f64) -> Result<Self> {
        let (wlo, whi) = self.window();
        if !(lo < wlo && hi > whi) {
            return Err(Error::InvalidInput(format!(
                "truncation [{lo}, {hi}] must enclose the interaction window [{wlo}, {whi}]"
            )));
        }
        self.truncation = Some((lo, hi));
        Ok(self)
    }

    pub fn with_tolerances(mut self, tolerances: Tolerances) -> Self {
        self.tolerances = tolerances;
        self
    }

    pub fn with_probes(mut self, probes: usize) -> Self {
        self.probes = probes.max(21);
        self
    }

    pub fn with_omega(&self, omega: Frequency) -> Self {
        Self { omega, ..self.clone() }
    }

    pub fn mass(&self) -> &MassProfile {
        &self.mass
    }

    pub fn potential(&self) -> &PotentialSpec {
        &self.potential
    }

    pub fn omega(&self) -> Frequency {
        self.omega
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tolerances
    }

    /// Smallest interval containing the origin outside which both `m` and
    /// `v` are constant.
    pub fn window(&self) -> (f64, f64) {
        let mut lo: f64 = 0.0;
        let mut hi: f64 = 0.0;
        for w in [self.mass.window(), self.potential.window()].into_iter().flatten() {
            lo = lo.min(w.0);
            hi = hi.max(w.1);
        }
        (lo, hi)
    }

    /// `(k₋, k₊)` on the `Im k ≥ 0` branch.
    pub fn wavenumbers(&self) -> (Complex64, Complex64) {
        let (m_minus, m_plus) = self.mass.asymptotic();
        let (v_minus, v_plus) = self.potential.flanks();
        let w = self.omega.value();
        (wavenumber(m_minus, v_minus, w), wavenumber(m_plus, v_plus, w))
    }

    /// Integration interval. Unless set explicitly, each side extends the
    /// window by two flank wavelengths over 2π (decay lengths for
    /// evanescent flanks), clamped to [0.25, 10].
    pub fn truncation(&self) -> (f64, f64) {
        if let Some(t) = self.truncation {
            return t;
        }
        let (lo, hi) = self.window();
        let (km, kp) = self.wavenumbers();
        let margin = |k: Complex64| (2.0 / k.norm().max(1e-12)).clamp(0.25, 10.0);
        (lo - margin(km), hi + margin(kp))
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        let (lo, hi) = self.truncation();
        let mut b = self.mass.breakpoints();
        b.extend(self.potential.breakpoints());
        b.push(0.0);
        b.retain(|&x| x > lo && x < hi);
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }

    /// `V(x; ω) = 2(ω - v(x))`.
    pub fn coefficient(&self, x: f64) -> Complex64 {
        2.0 * (self.omega.value() - self.potential.value(x))
    }
}

impl LinearCoefficients for ProblemSpec {
    fn at(&self, x: f64) -> Result<(f64, Complex64)> {
        let m = self.mass.value(x);
        if !(m > 0.0) {
            return Err(Error::NonPositiveMass { x, mass: m });
        }
        Ok((m, self.coefficient(x)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Satisfies the outgoing condition at x → -∞.
    Lower,
    /// Satisfies the outgoing condition at x → +∞.
    Upper,
}

/// Value and derivative of a solution at a point, sharing one scale factor:
/// the true values are `y·e^ln` and `dy·e^ln`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolutionPoint {
    pub y: Complex64,
    pub dy: Complex64,
    pub ln: f64,
}

impl SolutionPoint {
    pub fn value(&self) -> Complex64 {
        self.y * self.ln.exp()
    }

    pub fn derivative(&self) -> Complex64 {
        self.dy * self.ln.exp()
    }
}

#[derive(Debug, Clone)]
pub struct HomogeneousSolution {
    side: Side,
    problem: Arc<ProblemSpec>,
    trajectory: Trajectory,
    /// Multiplies every stored state; used for gauge checks.
    gauge: Complex64,
}

/// Continues a state across a constant-coefficient flank by splitting it
/// into the two plane waves and propagating each exactly.
fn extend_flank(y: Complex64, p: Complex64, ln: f64, m: f64, k: Complex64, d: f64) -> SolutionPoint {
    let i = Complex64::i();
    let ik = i * k;
    if k.norm() == 0.0 {
        // Band edge: linear continuation.
        let y_new = y + m * p * d;
        return SolutionPoint { y: y_new, dy: m * p, ln };
    }
    let a = 0.5 * (y + m * p / ik);
    let b = 0.5 * (y - m * p / ik);
    let ea = ik * d;
    let eb = -ik * d;
    let mut shift = f64::NEG_INFINITY;
    if a.norm() > 0.0 {
        shift = shift.max(ea.re);
    }
    if b.norm() > 0.0 {
        shift = shift.max(eb.re);
    }
    if !shift.is_finite() {
        return SolutionPoint { y: Complex64::new(0.0, 0.0), dy: Complex64::new(0.0, 0.0), ln };
    }
    let wa = a * (ea - shift).exp();
    let wb = b * (eb - shift).exp();
    SolutionPoint {
        y: wa + wb,
        dy: ik * (wa - wb),
        ln: ln + shift,
    }
}

/// Integrates one outgoing solution across the truncated domain.
pub fn solve_homogeneous(problem: &ProblemSpec, side: Side) -> Result<HomogeneousSolution> {
    solve_shared(Arc::new(problem.clone()), side)
}

fn solve_shared(problem: Arc<ProblemSpec>, side: Side) -> Result<HomogeneousSolution> {
    let (lo, hi) = problem.truncation();
    let (km, kp) = problem.wavenumbers();
    let (m_minus, m_plus) = problem.mass().asymptotic();
    let i = Complex64::i();
    // e^{∓ik x0} = mantissa · e^{ln}, with the modulus carried by ln.
    let (start, end, initial, ln) = match side {
        Side::Lower => {
            let phase = (-i * km.re * lo).exp();
            let y = phase;
            let p = -i * km / m_minus * y;
            (lo, hi, State::new(y, p), km.im * lo)
        }
        Side::Upper => {
            let phase = (i * kp.re * hi).exp();
            let y = phase;
            let p = i * kp / m_plus * y;
            (hi, lo, State::new(y, p), -kp.im * hi)
        }
    };
    let breakpoints = problem.breakpoints();
    let trajectory = ode::integrate(
        problem.as_ref(),
        start,
        end,
        initial,
        ln,
        &breakpoints,
        problem.tolerances(),
    )?;
    Ok(HomogeneousSolution {
        side,
        problem,
        trajectory,
        gauge: Complex64::new(1.0, 0.0),
    })
}

impl HomogeneousSolution {
    pub fn side(&self) -> Side {
        self.side
    }

    pub fn problem(&self) -> &ProblemSpec {
        &self.problem
    }

    /// Same solution multiplied by `s`.
    pub fn scaled(&self, s: Complex64) -> Self {
        Self { gauge: self.gauge * s, ..self.clone() }
    }

    fn finish(&self, state: State, ln: f64, m: f64) -> SolutionPoint {
        SolutionPoint {
            y: state[0] * self.gauge,
            dy: state[1] * m * self.gauge,
            ln,
        }
    }

    fn end_state(&self, at_lo: bool) -> (f64, State, f64) {
        let anchors = self.trajectory.anchors();
        let first_is_lo = self.trajectory.is_forward();
        let a = if at_lo == first_is_lo {
            anchors[0]
        } else {
            anchors[anchors.len() - 1]
        };
        (a.x, a.state, a.ln_scale)
    }

    /// `y`, `y′` and the scale at `x`; any real `x` is allowed.
    pub fn eval(&self, x: f64) -> Result<SolutionPoint> {
        let (lo, hi) = self.trajectory.span();
        if x >= lo && x <= hi {
            let (z, ln) = self.trajectory.eval(self.problem.as_ref(), x)?;
            let m = self.problem.mass().value(x);
            return Ok(self.finish(z, ln, m));
        }
        let at_lo = x < lo;
        let (xa, z, ln) = self.end_state(at_lo);
        let (m_minus, m_plus) = self.problem.mass().asymptotic();
        let (km, kp) = self.problem.wavenumbers();
        let (m, k) = if at_lo { (m_minus, km) } else { (m_plus, kp) };
        let mut pt = extend_flank(z[0], z[1], ln, m, k, x - xa);
        pt.y *= self.gauge;
        pt.dy *= self.gauge;
        Ok(pt)
    }

    /// Evaluates nearby points from one common anchor, so that differences
    /// between them are free of anchor-to-anchor jumps. The points must not
    /// straddle a breakpoint.
    pub fn eval_group(&self, xs: &[f64]) -> Result<Vec<SolutionPoint>> {
        let (lo, hi) = self.trajectory.span();
        if !xs.iter().all(|&x| x >= lo && x <= hi) {
            return xs.iter().map(|&x| self.eval(x)).collect();
        }
        let upstream = if self.trajectory.is_forward() {
            xs.iter().copied().fold(f64::INFINITY, f64::min)
        } else {
            xs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        };
        let index = self.trajectory.upstream_anchor(upstream);
        xs.iter()
            .map(|&x| {
                let (z, ln) = self.trajectory.eval_from(self.problem.as_ref(), index, x)?;
                Ok(self.finish(z, ln, self.problem.mass().value(x)))
            })
            .collect()
    }

    /// `|(y′/m)′ + V y|` at `x` by a five-point difference of `y′/m`,
    /// relative to `max(|y|, 1)`.
    pub fn residual(&self, x: f64) -> Result<f64> {
        let problem = self.problem.as_ref();
        let (m, v) = problem.at(x)?;
        let k_loc = (v.norm() * m).sqrt();
        let h = 1e-3 / k_loc.max(1.0);
        let breaks = problem.breakpoints();
        let near = breaks.iter().any(|&b| (b - x).abs() < 2.5 * h && b != x);
        let on = breaks.contains(&x);
        // Central stencil unless a breakpoint interferes, then one-sided
        // toward the side that contains no breakpoint.
        let (offsets, weights): (&[f64], &[f64]) = if !near && !on {
            (&[-2.0, -1.0, 1.0, 2.0], &[1.0 / 12.0, -8.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0])
        } else {
            (
                &[0.0, 1.0, 2.0, 3.0, 4.0],
                &[-25.0 / 12.0, 4.0, -3.0, 4.0 / 3.0, -1.0 / 4.0],
            )
        };
        let dir = if near || on {
            let right_clear = !breaks.iter().any(|&b| b > x && b < x + 4.5 * h);
            if right_clear {
                1.0
            } else {
                -1.0
            }
        } else {
            1.0
        };
        let xs: Vec<f64> = offsets.iter().map(|&o| x + dir * o * h).collect();
        let mut all = xs.clone();
        all.push(x);
        let pts = self.eval_group(&all)?;
        let centre = pts[pts.len() - 1];
        let mut dp = Complex64::new(0.0, 0.0);
        for ((&xs, &w), pt) in xs.iter().zip(weights).zip(&pts) {
            let ms = problem.mass().value(xs);
            let p = pt.dy / ms * (pt.ln - centre.ln).exp();
            dp += w * p;
        }
        dp /= dir * h;
        // Coefficient on the side the stencil used.
        let v_side = if on {
            problem.coefficient(x + dir * 1e-12 * (1.0 + x.abs()))
        } else {
            v
        };
        let res = (dp + v_side * centre.y).norm();
        let scale = centre.y.norm().max((-centre.ln).exp());
        Ok(res / scale)
    }
}

/// The pair `(y₁, y₂)` with the reduced constant `C = m/Δ`.
#[derive(Debug, Clone)]
pub struct HomogeneousPair {
    y1: HomogeneousSolution,
    y2: HomogeneousSolution,
    c: Complex64,
    c_ln: f64,
    spread: f64,
}

/// `Δ(x) = y₁ y₂′ - y₁′ y₂`.
pub fn wronskian(pair: &HomogeneousPair, x: f64) -> Result<Complex64> {
    let a = pair.y1.eval(x)?;
    let b = pair.y2.eval(x)?;
    Ok((a.y * b.dy - a.dy * b.y) * (a.ln + b.ln).exp())
}

/// Wronskian mantissa in `p = y′/m` form, with the independence measure.
fn reduced_at(y1: &HomogeneousSolution, y2: &HomogeneousSolution, x: f64) -> Result<(Complex64, f64, f64)> {
    let m = y1.problem().mass().value(x);
    let a = y1.eval(x)?;
    let b = y2.eval(x)?;
    let (pa, pb) = (a.dy / m, b.dy / m);
    let w = a.y * pb - pa * b.y;
    let na = a.y.norm().max(pa.norm());
    let nb = b.y.norm().max(pb.norm());
    let measure = w.norm() / (na * nb);
    Ok((w, a.ln + b.ln, measure))
}

impl HomogeneousPair {
    pub fn solve(problem: &ProblemSpec) -> Result<Self> {
        let shared = Arc::new(problem.clone());
        let (y1, y2) = rayon::join(
            || solve_shared(shared.clone(), Side::Lower),
            || solve_shared(shared.clone(), Side::Upper),
        );
        Self::from_solutions(y1?, y2?)
    }

    /// Builds the pair and its reduced constant from two solutions.
    pub fn from_solutions(y1: HomogeneousSolution, y2: HomogeneousSolution) -> Result<Self> {
        let (c, c_ln, spread) = reduced_constant_of(&y1, &y2)?;
        Ok(Self { y1, y2, c, c_ln, spread })
    }

    pub fn y1(&self) -> &HomogeneousSolution {
        &self.y1
    }

    pub fn y2(&self) -> &HomogeneousSolution {
        &self.y2
    }

    pub fn problem(&self) -> &ProblemSpec {
        self.y1.problem()
    }

    /// `C` as a mantissa and log scale.
    pub fn reduced_scaled(&self) -> (Complex64, f64) {
        (self.c, self.c_ln)
    }

    pub fn reduced(&self) -> Complex64 {
        self.c * self.c_ln.exp()
    }

    /// Relative spread of `m/Δ` observed over the probe grid.
    pub fn reduced_spread(&self) -> f64 {
        self.spread
    }

    /// Probe grid used for the invariant checks.
    pub fn probe_grid(&self) -> Vec<f64> {
        probe_grid(self.problem())
    }
}

fn probe_grid(problem: &ProblemSpec) -> Vec<f64> {
    let (lo, hi) = problem.truncation();
    let n = problem.probes.max(21);
    (0..n)
        .map(|j| lo + (hi - lo) * j as f64 / (n - 1) as f64)
        .collect()
}

/// Average of `C = m/Δ` over the probe grid, in scaled form, and the
/// relative spread.
fn reduced_constant_of(
    y1: &HomogeneousSolution,
    y2: &HomogeneousSolution,
) -> Result<(Complex64, f64, f64)> {
    let grid = probe_grid(y1.problem());
    let samples: Vec<(Complex64, f64, f64)> = grid
        .iter()
        .map(|&x| reduced_at(y1, y2, x))
        .collect::<Result<_>>()?;
    // Near a bound state the two solutions agree wherever both are
    // accurate; only growing round-off keeps them apart near the edges.
    let worst = samples.iter().map(|s| s.2).fold(f64::INFINITY, f64::min);
    if !(worst >= DEPENDENCE_THRESHOLD) {
        return Err(Error::DependentSolutions { measure: worst });
    }
    // C_j = e^{-ln_j} / w_j, expressed against the first sample's scale.
    let ln_ref = -samples[0].1;
    let values: Vec<Complex64> = samples
        .iter()
        .map(|(w, ln, _)| (1.0 / w) * (-ln - ln_ref).exp())
        .collect();
    let n = values.len() as f64;
    let mean = values.iter().sum::<Complex64>() / n;
    let var = values.iter().map(|v| (v - mean).norm_sqr()).sum::<f64>() / n;
    let spread = var.sqrt() / mean.norm();
    if !(spread < REDUCED_SPREAD_TOLERANCE) {
        return Err(Error::NonConstantReduced {
            spread,
            tolerance: REDUCED_SPREAD_TOLERANCE,
        });
    }
    Ok((mean, ln_ref, spread))
}

/// `C = m(x)/Δ(x)` averaged over the probe grid.
pub fn reduced_constant(pair: &HomogeneousPair) -> Complex64 {
    pair.reduced()
}
