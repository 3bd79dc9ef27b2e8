//! Transmission and reflection amplitudes read off a Green's function.
//!
//! For a source at `x′` left of the interaction window and a detector at
//! `x` right of it, `G(x,x′) = t · m₋ e^{i(k₊x - k₋x′)} / (2ik₋)`. With both
//! points on the left the coincident value is
//! `G(x′,x′) = m₋ (1 + r e^{-2ik₋x′}) / (2ik₋)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::green0::GreenKernel;
use crate::homogeneous::ProblemSpec;

/// Flank masses, levels and wavenumbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticChannel {
    pub m_minus: f64,
    pub m_plus: f64,
    pub v_minus: f64,
    pub v_plus: f64,
    pub k_minus: Complex64,
    pub k_plus: Complex64,
}

impl AsymptoticChannel {
    pub fn of(problem: &ProblemSpec) -> Self {
        let (m_minus, m_plus) = problem.mass().asymptotic();
        let (v_minus, v_plus) = problem.potential().flanks();
        let (k_minus, k_plus) = problem.wavenumbers();
        Self { m_minus, m_plus, v_minus, v_plus, k_minus, k_plus }
    }

    /// A channel is propagating when `Re k` dominates `Im k`.
    pub fn is_propagating(k: Complex64) -> bool {
        k.re > 0.0 && k.re > k.im
    }

    pub fn check_propagating(&self) -> Result<()> {
        if !Self::is_propagating(self.k_minus) {
            return Err(Error::EvanescentChannel { side: "left" });
        }
        if !Self::is_propagating(self.k_plus) {
            return Err(Error::EvanescentChannel { side: "right" });
        }
        Ok(())
    }

    /// `m₋ Re k₊ / (m₊ Re k₋)`.
    pub fn flux_ratio(&self) -> f64 {
        (self.m_minus * self.k_plus.re) / (self.m_plus * self.k_minus.re)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringResult {
    pub t: Complex64,
    pub r: Complex64,
    pub transmission: f64,
    pub reflection: f64,
}

impl ScatteringResult {
    pub fn new(t: Complex64, r: Complex64, flux_ratio: f64) -> Self {
        Self {
            t,
            r,
            transmission: t.norm_sqr() * flux_ratio,
            reflection: r.norm_sqr(),
        }
    }

    /// `|T + R - 1|`.
    pub fn unitarity_defect(&self) -> f64 {
        (self.transmission + self.reflection - 1.0).abs()
    }
}

/// Extracts `t` from `G(x, x′)` and `r` from `G(x′, x′)`; `x` must lie right
/// of the interaction window and `x′` left of it.
pub fn transmission_from_green<G: GreenKernel + ?Sized>(
    green: &G,
    channel: &AsymptoticChannel,
    x: f64,
    xp: f64,
) -> Result<ScatteringResult> {
    channel.check_propagating()?;
    let (lo, hi) = green.problem().window();
    if !(x > hi) {
        return Err(Error::WindowViolation { x, lo, hi });
    }
    if !(xp < lo) {
        return Err(Error::WindowViolation { x: xp, lo, hi });
    }
    let i = Complex64::i();
    let (km, kp, mm) = (channel.k_minus, channel.k_plus, channel.m_minus);
    let reference = mm * (i * (kp * x - km * xp)).exp() / (2.0 * i * km);
    let t = green.value(x, xp)? / reference;
    let diag = green.value(xp, xp)?;
    let r = (diag * 2.0 * i * km / mm - 1.0) * (2.0 * i * km * xp).exp();
    Ok(ScatteringResult::new(t, r, channel.flux_ratio()))
}
