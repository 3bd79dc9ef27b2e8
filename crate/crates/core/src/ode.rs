//! Adaptive Gauss-Legendre collocation for the Sturm-Liouville system
//!
//! ```text
//!   y' = m(x) p,      p' = -V(x) y,      p = y'/m
//! ```
//!
//! written as `z' = A(x) z` with `A = [[0, m], [-V, 0]]`. Collocation at the
//! six Gauss points is an implicit Runge-Kutta method of order 12; it is
//! symplectic, so the Wronskian `y1 p2 - p1 y2` of any two trajectories is
//! conserved by every step up to roundoff.
//!
//! The accepted trajectory is stored as a list of anchors. A value between
//! anchors is produced by re-integrating from the nearest upstream anchor,
//! never across a breakpoint of the coefficients.

use std::sync::OnceLock;

use nalgebra::{Matrix2, SMatrix, Vector2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

pub type State = Vector2<Complex64>;
pub type Propagator = Matrix2<Complex64>;

const STAGES: usize = 6;
const ORDER: i32 = 2 * STAGES as i32;
const RESCALE_HIGH: f64 = 1e8;
const RESCALE_LOW: f64 = 1e-8;
const MAX_STEPS: usize = 2_000_000;

type StageMatrix = SMatrix<Complex64, { 2 * STAGES }, { 2 * STAGES }>;
type StageRhs = SMatrix<Complex64, { 2 * STAGES }, 2>;

/// Coefficients of the first-order system at a point.
pub trait LinearCoefficients: Sync {
    /// Returns `(m(x), V(x))`.
    fn at(&self, x: f64) -> Result<(f64, Complex64)>;
}

impl<F> LinearCoefficients for F
where
    F: Fn(f64) -> (f64, Complex64) + Sync,
{
    fn at(&self, x: f64) -> Result<(f64, Complex64)> {
        let (m, v) = self(x);
        if !(m > 0.0) {
            return Err(Error::NonPositiveMass { x, mass: m });
        }
        Ok((m, v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12 }
    }
}

struct CollocationRule {
    c: [f64; STAGES],
    a: [[f64; STAGES]; STAGES],
    b: [f64; STAGES],
}

fn rule() -> &'static CollocationRule {
    static RULE: OnceLock<CollocationRule> = OnceLock::new();
    RULE.get_or_init(|| {
        let gl = GaussLegendre::new(STAGES);
        let mut c = [0.0; STAGES];
        let mut b = [0.0; STAGES];
        for i in 0..STAGES {
            c[i] = 0.5 * (gl.nodes()[i] + 1.0);
            b[i] = 0.5 * gl.weights()[i];
        }
        // a_ij = integral of the j-th Lagrange basis polynomial over [0, c_i];
        // an STAGES-point rule integrates the degree STAGES-1 basis exactly.
        let lagrange = |j: usize, t: f64| {
            (0..STAGES)
                .filter(|&k| k != j)
                .map(|k| (t - c[k]) / (c[j] - c[k]))
                .product::<f64>()
        };
        let mut a = [[0.0; STAGES]; STAGES];
        for (row, &ci) in a.iter_mut().zip(&c) {
            for (j, entry) in row.iter_mut().enumerate() {
                *entry = gl.integrate(0.0, ci, |t| lagrange(j, t));
            }
        }
        CollocationRule { c, a, b }
    })
}

/// One collocation step of length `h` (either sign) from `x`.
pub fn step(coeffs: &dyn LinearCoefficients, x: f64, h: f64) -> Result<Propagator> {
    let rule = rule();
    let mut mat = StageMatrix::identity();
    let mut rhs = StageRhs::zeros();
    for i in 0..STAGES {
        let (m, v) = coeffs.at(x + rule.c[i] * h)?;
        let m = Complex64::new(m, 0.0);
        // A_i = [[0, m], [-v, 0]]
        for j in 0..STAGES {
            let ha = h * rule.a[i][j];
            mat[(2 * i, 2 * j + 1)] -= m * ha;
            mat[(2 * i + 1, 2 * j)] += v * ha;
        }
        rhs[(2 * i, 1)] = m;
        rhs[(2 * i + 1, 0)] = -v;
    }
    let k = mat.lu().solve(&rhs).ok_or_else(|| Error::IntegrationFailure {
        x,
        reason: "singular collocation system".into(),
    })?;
    let mut phi = Propagator::identity();
    for j in 0..STAGES {
        let w = h * rule.b[j];
        for r in 0..2 {
            for col in 0..2 {
                phi[(r, col)] += k[(2 * j + r, col)] * w;
            }
        }
    }
    Ok(phi)
}

/// Two half steps; this is what is stored and what evaluations use.
fn double_half_step(coeffs: &dyn LinearCoefficients, x: f64, h: f64) -> Result<Propagator> {
    let first = step(coeffs, x, 0.5 * h)?;
    let second = step(coeffs, x + 0.5 * h, 0.5 * h)?;
    Ok(second * first)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Anchor {
    pub x: f64,
    /// Mantissa of `(y, p)`; the true state is `state * exp(ln_scale)`.
    pub state: State,
    pub ln_scale: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    anchors: Vec<Anchor>,
    forward: bool,
}

fn max_abs(z: &State) -> f64 {
    z[0].norm().max(z[1].norm())
}

fn local_wavenumber(coeffs: &dyn LinearCoefficients, x: f64) -> Result<f64> {
    let (m, v) = coeffs.at(x)?;
    Ok((v.norm() * m).sqrt())
}

/// Integrates from `start` to `end` (either direction). Breakpoints strictly
/// between the two are always landed on exactly and become anchors.
pub fn integrate(
    coeffs: &dyn LinearCoefficients,
    start: f64,
    end: f64,
    initial: State,
    ln_scale: f64,
    breakpoints: &[f64],
    tol: Tolerances,
) -> Result<Trajectory> {
    if !(start.is_finite() && end.is_finite()) || start == end {
        return Err(Error::InvalidInput(format!(
            "integration interval [{start}, {end}] is degenerate"
        )));
    }
    let forward = end > start;
    let dir = if forward { 1.0 } else { -1.0 };
    let (lo, hi) = if forward { (start, end) } else { (end, start) };
    let mut stops: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&b| b > lo && b < hi)
        .collect();
    stops.push(end);
    stops.sort_by(|a, b| (dir * a).total_cmp(&(dir * b)));
    stops.dedup();

    let mut anchors = vec![Anchor { x: start, state: initial, ln_scale }];
    let mut x = start;
    let mut z = initial;
    let mut ln = ln_scale;
    let mut h = 0.0_f64;
    let mut steps = 0usize;

    for &stop in &stops {
        let segment = (stop - x).abs();
        if segment == 0.0 {
            continue;
        }
        if h == 0.0 {
            h = 1.0 / (local_wavenumber(coeffs, x + 0.5 * dir * segment.min(1e-3))? + 1.0);
        }
        let min_step = 1e-13 * (1.0 + x.abs().max(stop.abs()));
        loop {
            let remaining = (stop - x).abs();
            if remaining <= min_step {
                // Snap exactly onto the breakpoint.
                x = stop;
                break;
            }
            let mut trial = h.min(remaining);
            // Avoid leaving a sliver shorter than the minimum step.
            if remaining - trial < 0.05 * trial {
                trial = remaining;
            }
            steps += 1;
            if steps > MAX_STEPS {
                return Err(Error::IntegrationFailure {
                    x,
                    reason: "step budget exhausted".into(),
                });
            }
            let hs = dir * trial;
            let full = step(coeffs, x, hs)? * z;
            let two = double_half_step(coeffs, x, hs)? * z;
            let scale = max_abs(&z).max(max_abs(&two));
            let mut err: f64 = 0.0;
            for i in 0..2 {
                let w = tol.rtol * z[i].norm().max(two[i].norm()) + tol.atol * scale;
                err = err.max((full[i] - two[i]).norm() / w);
            }
            if !err.is_finite() || !two.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::IntegrationFailure {
                    x,
                    reason: "non-finite state".into(),
                });
            }
            let factor = if err == 0.0 {
                4.0
            } else {
                (0.9 * err.powf(-1.0 / (ORDER as f64 + 1.0))).clamp(0.2, 4.0)
            };
            if err <= 1.0 {
                let at_stop = trial == remaining;
                x = if at_stop { stop } else { x + hs };
                z = two;
                let n = max_abs(&z);
                if !(RESCALE_LOW..=RESCALE_HIGH).contains(&n) && n > 0.0 {
                    z /= Complex64::new(n, 0.0);
                    ln += n.ln();
                }
                anchors.push(Anchor { x, state: z, ln_scale: ln });
                h = trial * factor;
                if at_stop {
                    break;
                }
            } else {
                h = trial * factor;
                if h < min_step {
                    return Err(Error::IntegrationFailure {
                        x,
                        reason: format!("step size underflow (h = {h:e})"),
                    });
                }
            }
        }
        if anchors.last().map(|a| a.x) != Some(stop) {
            anchors.push(Anchor { x: stop, state: z, ln_scale: ln });
        }
    }
    Ok(Trajectory { anchors, forward })
}

impl Trajectory {
    pub fn anchors(&self) -> &[Anchor] {
        &self.anchors
    }

    pub fn is_forward(&self) -> bool {
        self.forward
    }

    /// Covered interval `(lo, hi)`.
    pub fn span(&self) -> (f64, f64) {
        let a = self.anchors.first().map(|a| a.x).unwrap_or(0.0);
        let b = self.anchors.last().map(|a| a.x).unwrap_or(0.0);
        (a.min(b), a.max(b))
    }

    pub fn contains(&self, x: f64) -> bool {
        let (lo, hi) = self.span();
        x >= lo && x <= hi
    }

    /// Index of the anchor from which `x` is reached in the integration
    /// direction. `x` must lie inside the span.
    pub fn upstream_anchor(&self, x: f64) -> usize {
        if self.forward {
            // last anchor with anchor.x <= x
            self.anchors.partition_point(|a| a.x <= x).saturating_sub(1)
        } else {
            // anchors decrease; last anchor with anchor.x >= x
            self.anchors.partition_point(|a| a.x >= x).saturating_sub(1)
        }
    }

    pub fn eval_from(
        &self,
        coeffs: &dyn LinearCoefficients,
        index: usize,
        x: f64,
    ) -> Result<(State, f64)> {
        let anchor = &self.anchors[index];
        let h = x - anchor.x;
        if h == 0.0 {
            return Ok((anchor.state, anchor.ln_scale));
        }
        let phi = double_half_step(coeffs, anchor.x, h)?;
        Ok((phi * anchor.state, anchor.ln_scale))
    }

    pub fn eval(&self, coeffs: &dyn LinearCoefficients, x: f64) -> Result<(State, f64)> {
        self.eval_from(coeffs, self.upstream_anchor(x), x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn harmonic_like(x: f64) -> (f64, Complex64) {
        (1.0, Complex64::new(1.0 - 0.3 * x * x, 0.0))
    }

    #[test]
    fn collocation_rule_rows_sum_to_nodes() {
        let r = rule();
        for i in 0..STAGES {
            let s: f64 = r.a[i].iter().sum();
            assert!((s - r.c[i]).abs() < 1e-15);
        }
        let sb: f64 = r.b.iter().sum();
        assert!((sb - 1.0).abs() < 1e-15);
    }

    #[test]
    fn single_step_matches_rotation() {
        // m = 1, V = k^2 -> exact propagator is a rotation by kh.
        let k = 1.3;
        let coeffs = move |_x: f64| (1.0, Complex64::new(k * k, 0.0));
        let h = 0.7;
        let phi = step(&coeffs, 0.0, h).unwrap();
        let c = (k * h).cos();
        let s = (k * h).sin();
        assert!((phi[(0, 0)].re - c).abs() < 1e-13);
        assert!((phi[(0, 1)].re - s / k).abs() < 1e-13);
        assert!((phi[(1, 0)].re + k * s).abs() < 1e-13);
    }

    #[test]
    fn plane_wave_over_long_interval() {
        let k = Complex64::new(1.0, 1e-6);
        let coeffs = move |_x: f64| (1.0, k * k);
        let i = Complex64::i();
        let z0 = State::new(Complex64::new(1.0, 0.0), i * k);
        let traj = integrate(&coeffs, 0.0, 30.0, z0, 0.0, &[], Tolerances::default()).unwrap();
        for x in [0.3, 7.1, 29.9, 30.0] {
            let (z, ln) = traj.eval(&coeffs, x).unwrap();
            let want = (i * k * x).exp();
            let got = z[0] * ln.exp();
            assert!((got - want).norm() < 1e-10, "x = {x}: {got} vs {want}");
        }
    }

    #[test]
    fn backward_integration_lands_on_breakpoints() {
        let traj = integrate(
            &harmonic_like,
            3.0,
            -3.0,
            State::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)),
            0.0,
            &[0.5, -1.25],
            Tolerances::default(),
        )
        .unwrap();
        assert!(!traj.is_forward());
        let xs: Vec<f64> = traj.anchors().iter().map(|a| a.x).collect();
        assert!(xs.contains(&0.5));
        assert!(xs.contains(&-1.25));
        assert_eq!(*xs.last().unwrap(), -3.0);
    }

    #[test]
    fn wronskian_is_conserved() {
        let coeffs = |x: f64| {
            (1.0 + 0.5 * (x / 2.0).tanh(), Complex64::new(2.0 - x.abs().min(3.0), 0.1))
        };
        let a = State::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        let b = State::new(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        let ta = integrate(&coeffs, -4.0, 4.0, a, 0.0, &[-3.0, 0.0, 3.0], Tolerances::default()).unwrap();
        let tb = integrate(&coeffs, -4.0, 4.0, b, 0.0, &[-3.0, 0.0, 3.0], Tolerances::default()).unwrap();
        for x in [-3.3, -0.2, 1.7, 3.9] {
            let (za, la) = ta.eval(&coeffs, x).unwrap();
            let (zb, lb) = tb.eval(&coeffs, x).unwrap();
            let w = (za[0] * zb[1] - za[1] * zb[0]) * (la + lb).exp();
            assert!((w - Complex64::new(1.0, 0.0)).norm() < 1e-12, "x = {x}: {w}");
        }
    }

    #[test]
    fn rejects_non_positive_mass() {
        let coeffs = |x: f64| (1.0 - x, Complex64::new(1.0, 0.0));
        let z0 = State::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        let err = integrate(&coeffs, 0.0, 2.0, z0, 0.0, &[], Tolerances::default()).unwrap_err();
        assert!(matches!(err, Error::NonPositiveMass { .. }));
    }

    #[test]
    fn growth_is_rescaled() {
        // Evanescent region: y ~ exp(5x) grows by e^100 over the interval.
        let coeffs = |_x: f64| (1.0, Complex64::new(-25.0, 0.0));
        let z0 = State::new(Complex64::new(1.0, 0.0), Complex64::new(5.0, 0.0));
        let traj = integrate(&coeffs, 0.0, 20.0, z0, 0.0, &[], Tolerances::default()).unwrap();
        let last = traj.anchors().last().unwrap();
        assert!(max_abs(&last.state) <= RESCALE_HIGH * 1e3);
        let (z, ln) = traj.eval(&coeffs, 20.0).unwrap();
        let log_y = z[0].norm().ln() + ln;
        assert!((log_y - 100.0).abs() < 1e-8, "{log_y}");
    }
}
