//! Mass profiles, smooth potentials and the complex frequency.
//!
//! Units are ħ = 1 with a dimensionless reduced mass. The homogeneous
//! operator is `d/dx[(1/m) d/dx] + V(x; ω)` with `V(x; ω) = 2(ω - v(x))`, so a
//! constant-coefficient region carries plane waves with `k² = 2m(ω - v)`.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::regularization::RegularizedCoupling;

/// Complex frequency with the retarded prescription `Im ω > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frequency(Complex64);

impl Frequency {
    pub fn new(re: f64, im: f64) -> Result<Self> {
        if !(im > 0.0) || !re.is_finite() || !im.is_finite() {
            return Err(Error::InvalidInput(format!(
                "frequency must satisfy Im ω > 0 (got {re} + {im}i)"
            )));
        }
        Ok(Self(Complex64::new(re, im)))
    }

    pub fn value(self) -> Complex64 {
        self.0
    }

    pub fn re(self) -> f64 {
        self.0.re
    }

    pub fn eta(self) -> f64 {
        self.0.im
    }
}

impl fmt::Display for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}i", self.0.re, self.0.im)
    }
}

/// Wavenumber `√(2m(ω - v))` on the branch with `Im k ≥ 0`.
pub fn wavenumber(mass: f64, level: f64, omega: Complex64) -> Complex64 {
    let k = (2.0 * mass * (omega - level)).sqrt();
    if k.im < 0.0 {
        -k
    } else {
        k
    }
}

/// Two-column numeric table with strictly increasing abscissae, linearly
/// interpolated and extended by constants beyond its ends.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    xs: Vec<f64>,
    values: Vec<f64>,
}

impl Table {
    pub fn new(xs: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if xs.len() != values.len() || xs.len() < 2 {
            return Err(Error::InvalidInput(
                "a table needs at least two (x, value) rows".into(),
            ));
        }
        if let Some(i) = xs.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::Table {
                line: i + 2,
                reason: "x values must be strictly increasing".into(),
            });
        }
        if xs.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("table contains non-finite values".into()));
        }
        Ok(Self { xs, values })
    }

    /// Parses UTF-8 text with one `x value` pair per line, separated by
    /// whitespace or a comma. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut xs = Vec::new();
        let mut values = Vec::new();
        let mut last_line = 0;
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|f| !f.is_empty())
                .collect();
            if fields.len() != 2 {
                return Err(Error::Table {
                    line: n + 1,
                    reason: format!("expected 2 columns, found {}", fields.len()),
                });
            }
            let parse = |f: &str| {
                f.parse::<f64>().map_err(|e| Error::Table {
                    line: n + 1,
                    reason: format!("'{f}': {e}"),
                })
            };
            let x = parse(fields[0])?;
            let v = parse(fields[1])?;
            if let Some(&prev) = xs.last() {
                if !(x > prev) {
                    return Err(Error::Table {
                        line: n + 1,
                        reason: "x values must be strictly increasing".into(),
                    });
                }
            }
            xs.push(x);
            values.push(v);
            last_line = n + 1;
        }
        if xs.len() < 2 {
            return Err(Error::Table {
                line: last_line,
                reason: "a table needs at least two rows".into(),
            });
        }
        Self::new(xs, values)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.values[0];
        }
        if x >= self.xs[n - 1] {
            return self.values[n - 1];
        }
        let i = self.xs.partition_point(|&t| t <= x) - 1;
        let t = (x - self.xs[i]) / (self.xs[i + 1] - self.xs[i]);
        self.values[i] + t * (self.values[i + 1] - self.values[i])
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn span(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    fn ends(&self) -> (f64, f64) {
        (self.values[0], self.values[self.values.len() - 1])
    }
}

/// Quintic smoothstep: C² transition from 0 at t ≤ 0 to 1 at t ≥ 1.
pub(crate) fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
}

pub(crate) fn smoothstep_derivative(t: f64) -> f64 {
    if !(0.0..=1.0).contains(&t) {
        return 0.0;
    }
    30.0 * t * t * (1.0 - t) * (1.0 - t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MassKind {
    Constant,
    SmoothParametric,
    Tabulated,
}

#[derive(Debug, Clone, PartialEq)]
enum MassShape {
    Constant(f64),
    SmoothStep { minus: f64, plus: f64, start: f64, end: f64 },
    Tabulated(Table),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MassProfile {
    shape: MassShape,
}

impl MassProfile {
    pub fn constant(mass: f64) -> Result<Self> {
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::NonPositiveMass { x: 0.0, mass });
        }
        Ok(Self { shape: MassShape::Constant(mass) })
    }

    /// `minus` for x ≤ start, `plus` for x ≥ end, quintic blend between.
    pub fn smooth_step(minus: f64, plus: f64, start: f64, end: f64) -> Result<Self> {
        if !(minus > 0.0) {
            return Err(Error::NonPositiveMass { x: start, mass: minus });
        }
        if !(plus > 0.0) {
            return Err(Error::NonPositiveMass { x: end, mass: plus });
        }
        if !(end > start) {
            return Err(Error::InvalidInput("mass step needs start < end".into()));
        }
        Ok(Self {
            shape: MassShape::SmoothStep { minus, plus, start, end },
        })
    }

    pub fn tabulated(table: Table) -> Result<Self> {
        if let Some(i) = table.values().iter().position(|&m| !(m > 0.0)) {
            return Err(Error::NonPositiveMass {
                x: table.xs()[i],
                mass: table.values()[i],
            });
        }
        Ok(Self { shape: MassShape::Tabulated(table) })
    }

    pub fn kind(&self) -> MassKind {
        match self.shape {
            MassShape::Constant(_) => MassKind::Constant,
            MassShape::SmoothStep { .. } => MassKind::SmoothParametric,
            MassShape::Tabulated(_) => MassKind::Tabulated,
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        match &self.shape {
            MassShape::Constant(m) => *m,
            MassShape::SmoothStep { minus, plus, start, end } => {
                minus + (plus - minus) * smoothstep((x - start) / (end - start))
            }
            MassShape::Tabulated(t) => t.eval(x),
        }
    }

    /// `(m₋, m₊)`.
    pub fn asymptotic(&self) -> (f64, f64) {
        match &self.shape {
            MassShape::Constant(m) => (*m, *m),
            MassShape::SmoothStep { minus, plus, .. } => (*minus, *plus),
            MassShape::Tabulated(t) => t.ends(),
        }
    }

    /// Region outside which the mass is exactly constant.
    pub fn window(&self) -> Option<(f64, f64)> {
        match &self.shape {
            MassShape::Constant(_) => None,
            MassShape::SmoothStep { start, end, .. } => Some((*start, *end)),
            MassShape::Tabulated(t) => Some(t.span()),
        }
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.shape {
            MassShape::Constant(_) => Vec::new(),
            MassShape::SmoothStep { start, end, .. } => vec![*start, *end],
            MassShape::Tabulated(t) => t.xs().to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialKind {
    Free,
    Harmonic,
    LinearField,
    PiecewisePolynomial,
    Tabulated,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialShape {
    /// Constant level everywhere.
    Free { level: f64 },
    /// `stiffness·x²/2` for |x| ≤ half_width, constant beyond.
    Harmonic { stiffness: f64, half_width: f64 },
    /// `field·x` for |x| ≤ half_width, constant beyond.
    LinearField { field: f64, half_width: f64 },
    /// Piece `i` covers `[breaks[i], breaks[i+1])` and is a polynomial in
    /// `x - breaks[i]` with ascending `coefficients[i]`. Constant `outside`
    /// levels apply to the left and right of the pieces.
    PiecewisePolynomial {
        breaks: Vec<f64>,
        coefficients: Vec<Vec<f64>>,
        outside: (f64, f64),
    },
    Tabulated(Table),
}

/// Smooth background potential `v(x)`, optionally with a regularized
/// singular term folded in.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSpec {
    shape: PotentialShape,
    regularized: Option<RegularizedCoupling>,
}

impl PotentialSpec {
    pub fn new(shape: PotentialShape) -> Result<Self> {
        match &shape {
            PotentialShape::Free { level } if !level.is_finite() => {
                return Err(Error::InvalidInput("potential level must be finite".into()))
            }
            PotentialShape::Harmonic { half_width, .. }
            | PotentialShape::LinearField { half_width, .. }
                if !(*half_width > 0.0) =>
            {
                return Err(Error::InvalidInput("half_width must be positive".into()))
            }
            PotentialShape::PiecewisePolynomial { breaks, coefficients, .. } => {
                if breaks.len() < 2 || coefficients.len() != breaks.len() - 1 {
                    return Err(Error::InvalidInput(
                        "piecewise polynomial needs n+1 breaks for n pieces".into(),
                    ));
                }
                if breaks.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::InvalidInput("breaks must be strictly increasing".into()));
                }
            }
            _ => {}
        }
        Ok(Self { shape, regularized: None })
    }

    pub fn free() -> Self {
        Self {
            shape: PotentialShape::Free { level: 0.0 },
            regularized: None,
        }
    }

    pub fn harmonic(stiffness: f64, half_width: f64) -> Result<Self> {
        Self::new(PotentialShape::Harmonic { stiffness, half_width })
    }

    pub fn linear_field(field: f64, half_width: f64) -> Result<Self> {
        Self::new(PotentialShape::LinearField { field, half_width })
    }

    pub fn tabulated(table: Table) -> Self {
        Self {
            shape: PotentialShape::Tabulated(table),
            regularized: None,
        }
    }

    pub(crate) fn with_regularized(mut self, term: RegularizedCoupling) -> Self {
        self.regularized = Some(term);
        self
    }

    pub fn shape(&self) -> &PotentialShape {
        &self.shape
    }

    pub fn regularized(&self) -> Option<&RegularizedCoupling> {
        self.regularized.as_ref()
    }

    pub fn kind(&self) -> PotentialKind {
        match self.shape {
            PotentialShape::Free { .. } => PotentialKind::Free,
            PotentialShape::Harmonic { .. } => PotentialKind::Harmonic,
            PotentialShape::LinearField { .. } => PotentialKind::LinearField,
            PotentialShape::PiecewisePolynomial { .. } => PotentialKind::PiecewisePolynomial,
            PotentialShape::Tabulated(_) => PotentialKind::Tabulated,
        }
    }

    fn background(&self, x: f64) -> f64 {
        match &self.shape {
            PotentialShape::Free { level } => *level,
            PotentialShape::Harmonic { stiffness, half_width } => {
                let c = x.clamp(-half_width, *half_width);
                0.5 * stiffness * c * c
            }
            PotentialShape::LinearField { field, half_width } => {
                field * x.clamp(-half_width, *half_width)
            }
            PotentialShape::PiecewisePolynomial { breaks, coefficients, outside } => {
                let n = breaks.len();
                if x < breaks[0] {
                    return outside.0;
                }
                if x >= breaks[n - 1] {
                    return outside.1;
                }
                let i = breaks.partition_point(|&b| b <= x) - 1;
                let t = x - breaks[i];
                coefficients[i].iter().rev().fold(0.0, |acc, c| acc * t + c)
            }
            PotentialShape::Tabulated(t) => t.eval(x),
        }
    }

    /// Schrödinger-level potential `v(x)`, including the regularized
    /// singular term when present.
    pub fn value(&self, x: f64) -> f64 {
        let base = self.background(x);
        match &self.regularized {
            Some(term) => base + term.schrodinger_value(x),
            None => base,
        }
    }

    /// `(v₋, v₊)`.
    pub fn flanks(&self) -> (f64, f64) {
        match &self.shape {
            PotentialShape::Free { level } => (*level, *level),
            PotentialShape::Harmonic { stiffness, half_width } => {
                let v = 0.5 * stiffness * half_width * half_width;
                (v, v)
            }
            PotentialShape::LinearField { field, half_width } => {
                (-field * half_width, field * half_width)
            }
            PotentialShape::PiecewisePolynomial { outside, .. } => *outside,
            PotentialShape::Tabulated(t) => t.ends(),
        }
    }

    /// Interval outside which `v` equals its flank levels exactly.
    pub fn window(&self) -> Option<(f64, f64)> {
        let base = match &self.shape {
            PotentialShape::Free { .. } => None,
            PotentialShape::Harmonic { half_width, .. }
            | PotentialShape::LinearField { half_width, .. } => Some((-half_width, *half_width)),
            PotentialShape::PiecewisePolynomial { breaks, .. } => {
                Some((breaks[0], breaks[breaks.len() - 1]))
            }
            PotentialShape::Tabulated(t) => Some(t.span()),
        };
        let extra = self.regularized.as_ref().map(|r| r.support());
        match (base, extra) {
            (Some(a), Some(b)) => Some((a.0.min(b.0), a.1.max(b.1))),
            (a, b) => a.or(b),
        }
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = match &self.shape {
            PotentialShape::Free { .. } => Vec::new(),
            PotentialShape::Harmonic { half_width, .. }
            | PotentialShape::LinearField { half_width, .. } => vec![-half_width, *half_width],
            PotentialShape::PiecewisePolynomial { breaks, .. } => breaks.clone(),
            PotentialShape::Tabulated(t) => t.xs().to_vec(),
        };
        if let Some(r) = &self.regularized {
            out.extend(r.breakpoints());
        }
        out
    }
}

/// `x ↦ V(x; ω) = 2(ω - v(x))`.
pub fn effective_coefficient(
    potential: &PotentialSpec,
    omega: Frequency,
) -> impl Fn(f64) -> Complex64 + '_ {
    let w = omega.value();
    move |x| 2.0 * (w - potential.value(x))
}
