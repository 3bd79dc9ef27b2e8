//! Dressing `G₀` with the point interaction `U(x) = -α δ(x) + β δ′(x)`.
//!
//! The integral equation `G = G₀ + ∫ G₀ U G` reduces, after integrating the
//! `δ′` term by parts, to
//!
//! ```text
//!   G(x,x′) = G₀(x,x′) - α G₀(x,0) G(0,x′)
//!           - β ∂_R G₀(x,0) G(0,x′) - β G₀(x,0) ∂_L G(0,x′)
//! ```
//!
//! which closes once `G(0,x′)` and `∂_L G(0,x′)` are known. Those contain
//! the mixed derivative `∂_L ∂_R G₀(0,0)`, which diverges; it is carried as
//! a finite surrogate `P` and the physical answer is the `|P| → ∞` limit.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::green0::{step, BoundaryData, G0Evaluator, GreenKernel, Site};
use crate::homogeneous::ProblemSpec;

/// Relative size below which a denominator is treated as zero.
pub const SINGULAR_THRESHOLD: f64 = 1e-12;

/// Stand-in for the divergent `∂_L ∂_R G₀(0,0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Surrogate {
    /// The `|P| → ∞` limit.
    Limit,
    Finite(Complex64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularParams {
    pub alpha: f64,
    pub beta: f64,
    pub surrogate: Surrogate,
}

impl SingularParams {
    pub fn new(alpha: f64, beta: f64, surrogate: Surrogate) -> Result<Self> {
        if !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::InvalidInput("couplings must be finite".into()));
        }
        if let Surrogate::Finite(p) = surrogate {
            if p.norm() == 0.0 || !p.re.is_finite() || !p.im.is_finite() {
                return Err(Error::InvalidInput("finite surrogate P must be non-zero".into()));
            }
        }
        Ok(Self { alpha, beta, surrogate })
    }

    pub fn delta(alpha: f64) -> Self {
        Self { alpha, beta: 0.0, surrogate: Surrogate::Limit }
    }
}

/// How a [`DressedGreen`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// `β = 0`, closed form in `α`.
    DeltaOnly,
    /// `β ≠ 0` in the `|P| → ∞` limit; independent of `α` and of `β`'s value.
    DeltaPrimeLimit,
    /// General couplings with a finite surrogate `P`.
    GeneralFinite,
}

impl Provenance {
    pub fn tag(self) -> &'static str {
        match self {
            Provenance::DeltaOnly => "delta-only",
            Provenance::DeltaPrimeLimit => "delta-prime-limit",
            Provenance::GeneralFinite => "general-finite",
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Form {
    Delta { denominator: Complex64 },
    Limit,
    General { d: Complex64, outer: Complex64, p: Complex64 },
}

#[derive(Debug, Clone)]
pub struct DressedGreen {
    g0: G0Evaluator,
    params: SingularParams,
    provenance: Provenance,
    form: Form,
}

fn check(value: Complex64, scale: f64, err: impl FnOnce(f64) -> Error) -> Result<()> {
    if !(value.norm() > SINGULAR_THRESHOLD * scale.max(1.0)) {
        return Err(err(value.norm()));
    }
    Ok(())
}

fn scaled(c: Complex64, c_ln: f64, u: Complex64, ln_u: f64, w: Complex64, ln_w: f64) -> Complex64 {
    c * u * w * (c_ln + ln_u + ln_w).exp()
}

/// `|G₀(0,0)|` relative to the size of the solution products it is built
/// from, so that an accidental node of `y₁ y₂` at the origin is detected.
fn diagonal_check(g: &G0Evaluator) -> Result<()> {
    let o = g.origin();
    let problem = g.problem();
    let m0 = problem.mass().value(0.0);
    let kappa = (problem.coefficient(0.0).norm() * m0).sqrt().max(1e-3);
    let (c, c_ln) = g.pair().reduced_scaled();
    let size = |p: &crate::homogeneous::SolutionPoint| p.y.norm() + p.dy.norm() / kappa;
    let scale = c.norm() * size(&o.y1) * size(&o.y2) * (c_ln + o.y1.ln + o.y2.ln).exp();
    let g00 = g.boundary().g00.norm();
    if !(g00 > SINGULAR_THRESHOLD * scale) {
        return Err(Error::ZeroDiagonal { magnitude: g00 / scale });
    }
    Ok(())
}

/// Closed form for `β = 0`:
/// `G = G₀ - α G₀(x,0) G₀(0,x′) / (1 + α G₀(0,0))`.
pub fn dress_delta(g: &G0Evaluator, alpha: f64) -> Result<DressedGreen> {
    let g00 = g.boundary().g00;
    let denominator = 1.0 + alpha * g00;
    check(denominator, (alpha * g00).norm(), |magnitude| {
        Error::ResonantDenominator { magnitude }
    })?;
    Ok(DressedGreen {
        g0: g.clone(),
        params: SingularParams::delta(alpha),
        provenance: Provenance::DeltaOnly,
        form: Form::Delta { denominator },
    })
}

/// The `β ≠ 0`, `|P| → ∞` result `G = G₀ - G₀(x,0) G₀(0,x′) / G₀(0,0)`,
/// evaluated in factored form so that it vanishes identically whenever `x`
/// and `x′` lie on opposite sides of the origin.
pub fn dress_delta_prime(g: &G0Evaluator) -> Result<DressedGreen> {
    diagonal_check(g)?;
    Ok(DressedGreen {
        g0: g.clone(),
        params: SingularParams {
            alpha: 0.0,
            beta: 1.0,
            surrogate: Surrogate::Limit,
        },
        provenance: Provenance::DeltaPrimeLimit,
        form: Form::Limit,
    })
}

/// `G(0,x′)` and `∂_L G(0,x′)` for finite `P`.
#[derive(Debug, Clone, Copy)]
pub struct DressedBoundary<'a> {
    g: &'a G0Evaluator,
    params: SingularParams,
    d: Complex64,
    outer: Complex64,
    p: Complex64,
}

impl DressedBoundary<'_> {
    /// `D = 1 + β ∂_L G₀(0,0)`.
    pub fn d(&self) -> Complex64 {
        self.d
    }

    /// `(G(0,x′), ∂_L G(0,x′))` from the site at `x′`.
    pub fn at_site(&self, b: &Site) -> (Complex64, Complex64) {
        boundary_pair(self.g, &self.params, self.d, self.outer, self.p, b)
    }

    pub fn value(&self, xp: f64) -> Result<Complex64> {
        Ok(self.at_site(&self.g.site(xp)?).0)
    }

    pub fn derivative(&self, xp: f64) -> Result<Complex64> {
        Ok(self.at_site(&self.g.site(xp)?).1)
    }
}

fn boundary_pair(
    g: &G0Evaluator,
    params: &SingularParams,
    d: Complex64,
    outer: Complex64,
    p: Complex64,
    b: &Site,
) -> (Complex64, Complex64) {
    let BoundaryData { g00, d_l, .. } = g.boundary();
    let (alpha, beta) = (params.alpha, params.beta);
    let o = g.origin();
    let g0_0x = g.value_at(o, b);
    let dl_0x = g.d_left_at(o, b);
    let gb = (g0_0x - beta * g00 / d * dl_0x) / outer;
    let dgb = (dl_0x - alpha * d_l * gb - beta * p * gb) / d;
    (gb, dgb)
}

fn general_denominators(g: &G0Evaluator, params: &SingularParams, p: Complex64) -> Result<(Complex64, Complex64)> {
    let BoundaryData { g00, d_l, d_r } = g.boundary();
    let (alpha, beta) = (params.alpha, params.beta);
    let d = 1.0 + beta * d_l;
    check(d, (beta * d_l).norm(), |magnitude| Error::SingularDenominator {
        which: "D = 1 + β∂_L G₀(0,0)",
        magnitude,
    })?;
    let last = beta * g00 / d * (alpha * d_l + beta * p);
    let outer = 1.0 + alpha * g00 + beta * d_r - last;
    let scale = (alpha * g00).norm().max((beta * d_r).norm()).max(last.norm());
    check(outer, scale, |magnitude| Error::SingularDenominator {
        which: "outer boundary denominator",
        magnitude,
    })?;
    Ok((d, outer))
}

fn finite_p(params: &SingularParams) -> Result<Complex64> {
    match params.surrogate {
        Surrogate::Finite(p) => Ok(p),
        Surrogate::Limit => Err(Error::InvalidInput(
            "a finite surrogate P is required here".into(),
        )),
    }
}

/// Boundary functionals `G(0,x′)` and `∂_L G(0,x′)` with the finite `P`.
pub fn dressed_boundary(g: &G0Evaluator, params: SingularParams) -> Result<DressedBoundary<'_>> {
    let p = finite_p(&params)?;
    let (d, outer) = general_denominators(g, &params, p)?;
    Ok(DressedBoundary { g, params, d, outer, p })
}

/// Full `G(x,x′)` for finite `P`.
pub fn assemble_general(g: &G0Evaluator, params: SingularParams) -> Result<DressedGreen> {
    let p = finite_p(&params)?;
    let (d, outer) = general_denominators(g, &params, p)?;
    Ok(DressedGreen {
        g0: g.clone(),
        params,
        provenance: Provenance::GeneralFinite,
        form: Form::General { d, outer, p },
    })
}

/// Dispatches on the couplings: `β = 0` gives the δ closed form, `β ≠ 0`
/// the limit form or the finite-`P` assembly depending on the surrogate.
pub fn dress(g: &G0Evaluator, params: SingularParams) -> Result<DressedGreen> {
    match (params.beta == 0.0, params.surrogate) {
        (true, _) => dress_delta(g, params.alpha),
        (false, Surrogate::Limit) => {
            let mut out = dress_delta_prime(g)?;
            out.params = params;
            Ok(out)
        }
        (false, Surrogate::Finite(_)) => assemble_general(g, params),
    }
}

/// `∂_L G(0,x′)` in the `|P| → ∞` limit.
#[derive(Debug, Clone, Copy)]
pub struct LimitDerivative<'a> {
    g: &'a G0Evaluator,
    beta: f64,
    d: Complex64,
}

impl LimitDerivative<'_> {
    pub fn value(&self, xp: f64) -> Result<Complex64> {
        let o = self.g.origin();
        let b = self.g.site(xp)?;
        let g00 = self.g.boundary().g00;
        let dl = self.g.d_left_at(o, &b);
        let g0x = self.g.value_at(o, &b);
        let (beta, d) = (self.beta, self.d);
        Ok(dl / d + (g0x - beta / d * g00 * dl) / (beta * g00))
    }
}

pub fn limit_derivative_boundary(g: &G0Evaluator, beta: f64) -> Result<LimitDerivative<'_>> {
    if beta == 0.0 || !beta.is_finite() {
        return Err(Error::InvalidInput("the limit derivative needs β ≠ 0".into()));
    }
    diagonal_check(g)?;
    let d_l = g.boundary().d_l;
    let d = 1.0 + beta * d_l;
    check(d, (beta * d_l).norm(), |magnitude| Error::SingularDenominator {
        which: "D = 1 + β∂_L G₀(0,0)",
        magnitude,
    })?;
    Ok(LimitDerivative { g, beta, d })
}

impl DressedGreen {
    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn params(&self) -> SingularParams {
        self.params
    }

    pub fn boundary(&self) -> BoundaryData {
        self.g0.boundary()
    }

    pub fn g0(&self) -> &G0Evaluator {
        &self.g0
    }

    /// `G(x,x′)` from precomputed sites.
    pub fn value_at(&self, a: &Site, b: &Site) -> Complex64 {
        let g = &self.g0;
        let o = g.origin();
        match self.form {
            Form::Delta { denominator } => {
                let alpha = self.params.alpha;
                if alpha == 0.0 {
                    return g.value_at(a, b);
                }
                g.value_at(a, b) - alpha * g.value_at(a, o) * g.value_at(o, b) / denominator
            }
            Form::Limit => limit_value(g, a, b),
            Form::General { d, outer, p } => {
                let (alpha, beta) = (self.params.alpha, self.params.beta);
                let (gb, dgb) = boundary_pair(g, &self.params, d, outer, p, b);
                let gx0 = g.value_at(a, o);
                g.value_at(a, b) - alpha * gx0 * gb - beta * g.d_right_at(a, o) * gb - beta * gx0 * dgb
            }
        }
    }
}

fn limit_value(g: &G0Evaluator, a: &Site, b: &Site) -> Complex64 {
    let zero = Complex64::new(0.0, 0.0);
    if a.x == 0.0 || b.x == 0.0 {
        return zero;
    }
    let o = g.origin();
    let (c, c_ln) = g.pair().reduced_scaled();
    let (x, xp) = (a.x, b.x);
    let mut total = zero;
    let c1 = step(xp - x) - step(-x) * step(xp);
    if c1 != 0.0 {
        total += c1 * scaled(c, c_ln, a.y1.y, a.y1.ln, b.y2.y, b.y2.ln);
    }
    let c2 = step(x - xp) - step(x) * step(-xp);
    if c2 != 0.0 {
        total += c2 * scaled(c, c_ln, a.y2.y, a.y2.ln, b.y1.y, b.y1.ln);
    }
    let c3 = step(-x) * step(-xp);
    if c3 != 0.0 {
        // y₂(0)/y₁(0)
        let rho = o.y2.y / o.y1.y;
        let rho_ln = o.y2.ln - o.y1.ln;
        total -= c3 * scaled(c, c_ln + rho_ln, a.y1.y * rho, a.y1.ln, b.y1.y, b.y1.ln);
    }
    let c4 = step(x) * step(xp);
    if c4 != 0.0 {
        let rho = o.y1.y / o.y2.y;
        let rho_ln = o.y1.ln - o.y2.ln;
        total -= c4 * scaled(c, c_ln + rho_ln, a.y2.y * rho, a.y2.ln, b.y2.y, b.y2.ln);
    }
    total
}

impl DressedGreen {
    /// Left and right factors of the finite-rank part:
    /// `G(a,b) = G₀(a,b) - Σ_r left_r(a) right_r(b)`.
    fn rank_factors(&self, s: &Site) -> [(Complex64, Complex64); 2] {
        let g = &self.g0;
        let o = g.origin();
        let zero = Complex64::new(0.0, 0.0);
        match self.form {
            Form::Delta { denominator } => {
                let alpha = self.params.alpha;
                [(alpha * g.value_at(s, o) / denominator, g.value_at(o, s)), (zero, zero)]
            }
            Form::General { d, outer, p } => {
                let (alpha, beta) = (self.params.alpha, self.params.beta);
                let (gb, dgb) = boundary_pair(g, &self.params, d, outer, p, s);
                let gx0 = g.value_at(s, o);
                [(alpha * gx0 + beta * g.d_right_at(s, o), gb), (beta * gx0, dgb)]
            }
            Form::Limit => [(zero, zero), (zero, zero)],
        }
    }

    fn apply_limit(&self, rows: &[Site], cols: &[Site], f: &[Complex64]) -> Vec<Complex64> {
        let g = &self.g0;
        let o = g.origin();
        let (c, c_ln) = g.pair().reduced_scaled();
        let zero = Complex64::new(0.0, 0.0);
        let mut out = vec![zero; rows.len()];
        for negative in [true, false] {
            let side = |x: f64| if negative { x < 0.0 } else { x > 0.0 };
            let ri: Vec<usize> = (0..rows.len()).filter(|&i| side(rows[i].x)).collect();
            let cj: Vec<usize> = (0..cols.len()).filter(|&j| side(cols[j].x)).collect();
            if ri.is_empty() {
                continue;
            }
            let rs: Vec<Site> = ri.iter().map(|&i| rows[i]).collect();
            let cs: Vec<Site> = cj.iter().map(|&j| cols[j]).collect();
            let fs: Vec<Complex64> = cj.iter().map(|&j| f[j]).collect();
            let base = g.apply_sites(&rs, &cs, &fs);
            // Same-side reflection term, y₁y₁ on the left and y₂y₂ on the right.
            let (ratio, ratio_ln) = if negative {
                (o.y2.y / o.y1.y, o.y2.ln - o.y1.ln)
            } else {
                (o.y1.y / o.y2.y, o.y1.ln - o.y2.ln)
            };
            let pick = |s: &Site| if negative { s.y1 } else { s.y2 };
            let k = c * ratio * (c_ln + ratio_ln).exp();
            let sum: Complex64 = cs
                .iter()
                .zip(&fs)
                .map(|(b, fj)| pick(b).y * pick(b).ln.exp() * fj)
                .sum();
            for (n, &i) in ri.iter().enumerate() {
                let a = pick(&rows[i]);
                out[i] = base[n] - k * a.y * a.ln.exp() * sum;
            }
        }
        out
    }
}

impl GreenKernel for DressedGreen {
    fn value(&self, x: f64, xp: f64) -> Result<Complex64> {
        Ok(self.value_at(&self.g0.site(x)?, &self.g0.site(xp)?))
    }

    fn matrix(&self, rows: &[f64], cols: &[f64]) -> Result<Vec<Complex64>> {
        let rs = self.g0.sites(rows)?;
        let cs = self.g0.sites(cols)?;
        Ok(rs
            .par_iter()
            .flat_map_iter(|a| cs.iter().map(move |b| self.value_at(a, b)))
            .collect())
    }

    fn apply(
        &self,
        rows: &[f64],
        cols: &[f64],
        f: &[Complex64],
        g: &[Complex64],
    ) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
        let rs = self.g0.sites(rows)?;
        let cs = self.g0.sites(cols)?;
        if !self.g0.fits_running_sums(&rs, &cs) {
            let direct = |h: &[Complex64], transpose: bool| -> Vec<Complex64> {
                rs.par_iter()
                    .map(|a| {
                        cs.iter()
                            .zip(h)
                            .map(|(b, hj)| {
                                let v = if transpose { self.value_at(b, a) } else { self.value_at(a, b) };
                                v * hj
                            })
                            .sum()
                    })
                    .collect()
            };
            return Ok((direct(f, false), direct(g, true)));
        }
        if let Form::Limit = self.form {
            // Symmetric under x ↔ x′.
            return Ok((self.apply_limit(&rs, &cs, f), self.apply_limit(&rs, &cs, g)));
        }
        let row_factors: Vec<_> = rs.iter().map(|s| self.rank_factors(s)).collect();
        let col_factors: Vec<_> = cs.iter().map(|s| self.rank_factors(s)).collect();
        let mut forward = self.g0.apply_sites(&rs, &cs, f);
        let mut backward = self.g0.apply_sites(&rs, &cs, g);
        for r in 0..2 {
            let right_f: Complex64 = col_factors.iter().zip(f).map(|(c, fj)| c[r].1 * fj).sum();
            let left_g: Complex64 = col_factors.iter().zip(g).map(|(c, gj)| c[r].0 * gj).sum();
            for (i, row) in row_factors.iter().enumerate() {
                forward[i] -= row[r].0 * right_f;
                backward[i] -= row[r].1 * left_g;
            }
        }
        Ok((forward, backward))
    }

    fn problem(&self) -> &ProblemSpec {
        self.g0.problem()
    }
}
