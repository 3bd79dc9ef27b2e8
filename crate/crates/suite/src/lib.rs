//! Bookkeeping for the acceptance run: one verdict line per criterion.

use std::fmt;
use std::time::Duration;

/// A measured quantity against its bound; passes when `measured < bound`.
#[derive(Debug, Clone)]
pub struct Measure {
    pub what: String,
    pub measured: f64,
    pub bound: f64,
}

impl Measure {
    pub fn new(what: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self { what: what.into(), measured, bound }
    }

    pub fn passed(&self) -> bool {
        self.measured < self.bound
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = if self.passed() { "ok" } else { "FAILED" };
        write!(f, "{} = {:.3e} (< {:.0e}) {mark}", self.what, self.measured, self.bound)
    }
}

#[derive(Debug, Clone)]
pub struct Verdict {
    pub id: u32,
    pub title: &'static str,
    pub measures: Vec<Measure>,
    pub elapsed: Duration,
    pub budget: Option<Duration>,
    /// Set when the criterion could not be evaluated at all.
    pub error: Option<String>,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        self.error.is_none()
            && self.measures.iter().all(Measure::passed)
            && self.budget.is_none_or(|b| self.elapsed < b)
    }

    /// The single summary line, followed by indented detail lines.
    pub fn render(&self) -> String {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        let budget = self.budget.map_or(String::new(), |b| format!(", budget {:.0?}", b));
        let mut out = format!(
            "{status} criterion {}: {} [{:.2?}{budget}]",
            self.id, self.title, self.elapsed
        );
        if let Some(e) = &self.error {
            out.push_str(&format!("\n    error: {e}"));
        }
        for m in &self.measures {
            out.push_str(&format!("\n    {m}"));
        }
        out
    }
}
