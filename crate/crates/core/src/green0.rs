//! The auxiliary Green's function
//!
//! ```text
//!   G₀(x, x′) = C [η(x′ - x) y₁(x) y₂(x′) + η(x - x′) y₂(x) y₁(x′)]
//! ```
//!
//! with `C = m/Δ` and the step convention `η(0) = 1/2`, together with its
//! one-sided first derivatives and the data it takes at the origin.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::Result;
use crate::homogeneous::{HomogeneousPair, ProblemSpec, SolutionPoint};

/// Anything that evaluates a Green's function `G(x, x′)`.
pub trait GreenKernel: Sync {
    fn value(&self, x: f64, xp: f64) -> Result<Complex64>;

    /// Row-major `rows.len() × cols.len()` table.
    fn matrix(&self, rows: &[f64], cols: &[f64]) -> Result<Vec<Complex64>> {
        let per_row: Vec<Vec<Complex64>> = rows
            .par_iter()
            .map(|&x| cols.iter().map(|&xp| self.value(x, xp)).collect())
            .collect::<Result<_>>()?;
        Ok(per_row.into_iter().flatten().collect())
    }

    /// `(Σ_j G(x_i, x′_j) f_j, Σ_j G(x′_j, x_i) g_j)` for rows `x_i` and
    /// columns `x′_j`.
    fn apply(
        &self,
        rows: &[f64],
        cols: &[f64],
        f: &[Complex64],
        g: &[Complex64],
    ) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
        let forward = self.matrix(rows, cols)?;
        let backward = self.matrix(cols, rows)?;
        let (r, n) = (rows.len(), cols.len());
        let a = (0..r)
            .map(|i| (0..n).map(|j| forward[i * n + j] * f[j]).sum())
            .collect();
        let b = (0..r)
            .map(|i| (0..n).map(|j| backward[j * r + i] * g[j]).sum())
            .collect();
        Ok((a, b))
    }

    /// The background problem the kernel was built on.
    fn problem(&self) -> &ProblemSpec;
}

/// Above this log-scale the unscaled running sums in
/// [`G0Evaluator::apply_sites`] could overflow.
const RUNNING_SUM_LN_LIMIT: f64 = 300.0;

/// `y₁` and `y₂` (with derivatives) at one position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Site {
    pub x: f64,
    pub y1: SolutionPoint,
    pub y2: SolutionPoint,
}

/// `G₀(0,0)`, `∂_L G₀(0,0)` and `∂_R G₀(0,0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryData {
    pub g00: Complex64,
    pub d_l: Complex64,
    pub d_r: Complex64,
}

/// Which factor of each product is differentiated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Value,
    Derivative,
}

fn pick(p: &SolutionPoint, slot: Slot) -> Complex64 {
    match slot {
        Slot::Value => p.y,
        Slot::Derivative => p.dy,
    }
}

/// Heaviside step with `η(0) = 1/2`.
pub fn step(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        0.0
    } else {
        0.5
    }
}

#[derive(Debug, Clone)]
pub struct G0Evaluator {
    pair: HomogeneousPair,
    origin: Site,
    boundary: BoundaryData,
}

impl G0Evaluator {
    pub fn new(pair: HomogeneousPair) -> Result<Self> {
        let origin = site_of(&pair, 0.0)?;
        let mut g = Self {
            pair,
            origin,
            boundary: BoundaryData {
                g00: Complex64::new(0.0, 0.0),
                d_l: Complex64::new(0.0, 0.0),
                d_r: Complex64::new(0.0, 0.0),
            },
        };
        g.boundary = BoundaryData {
            g00: g.combine(&origin, &origin, Slot::Value, Slot::Value),
            d_l: g.combine(&origin, &origin, Slot::Derivative, Slot::Value),
            d_r: g.combine(&origin, &origin, Slot::Value, Slot::Derivative),
        };
        Ok(g)
    }

    /// Solves the homogeneous problem and builds `G₀`.
    pub fn build(problem: &ProblemSpec) -> Result<Self> {
        Self::new(HomogeneousPair::solve(problem)?)
    }

    pub fn pair(&self) -> &HomogeneousPair {
        &self.pair
    }

    pub fn boundary(&self) -> BoundaryData {
        self.boundary
    }

    pub fn origin(&self) -> &Site {
        &self.origin
    }

    pub fn site(&self, x: f64) -> Result<Site> {
        if x == 0.0 {
            return Ok(self.origin);
        }
        site_of(&self.pair, x)
    }

    pub fn sites(&self, xs: &[f64]) -> Result<Vec<Site>> {
        xs.par_iter().map(|&x| self.site(x)).collect()
    }

    /// `C [η(x′-x) y₁(x) y₂(x′) + η(x-x′) y₂(x) y₁(x′)]`, with either factor
    /// replaced by its derivative according to `sa`, `sb`.
    fn combine(&self, a: &Site, b: &Site, sa: Slot, sb: Slot) -> Complex64 {
        let (c, c_ln) = self.pair.reduced_scaled();
        let term = |u: &SolutionPoint, w: &SolutionPoint| {
            c * pick(u, sa) * pick(w, sb) * (c_ln + u.ln + w.ln).exp()
        };
        if a.x < b.x {
            term(&a.y1, &b.y2)
        } else if a.x > b.x {
            term(&a.y2, &b.y1)
        } else {
            0.5 * (term(&a.y1, &b.y2) + term(&a.y2, &b.y1))
        }
    }

    pub fn value_at(&self, a: &Site, b: &Site) -> Complex64 {
        self.combine(a, b, Slot::Value, Slot::Value)
    }

    /// `∂G₀/∂x` from sites.
    pub fn d_left_at(&self, a: &Site, b: &Site) -> Complex64 {
        self.combine(a, b, Slot::Derivative, Slot::Value)
    }

    /// `∂G₀/∂x′` from sites.
    pub fn d_right_at(&self, a: &Site, b: &Site) -> Complex64 {
        self.combine(a, b, Slot::Value, Slot::Derivative)
    }

    /// Whether all scales are small enough to sum unscaled products.
    pub(crate) fn fits_running_sums(&self, rows: &[Site], cols: &[Site]) -> bool {
        let (_, c_ln) = self.pair.reduced_scaled();
        let o = &self.origin;
        c_ln.abs() <= RUNNING_SUM_LN_LIMIT
            && rows
                .iter()
                .chain(cols)
                .chain(std::iter::once(o))
                .all(|s| s.y1.ln.abs().max(s.y2.ln.abs()) <= RUNNING_SUM_LN_LIMIT)
    }

    /// `Σ_j G₀(a_i, b_j) f_j`. `G₀` factorizes into `y₁(min) y₂(max)`, so
    /// sorted running sums make this linear in the number of sites.
    pub fn apply_sites(&self, rows: &[Site], cols: &[Site], f: &[Complex64]) -> Vec<Complex64> {
        let (c, c_ln) = self.pair.reduced_scaled();
        if !self.fits_running_sums(rows, cols) {
            return rows
                .par_iter()
                .map(|a| cols.iter().zip(f).map(|(b, fj)| self.value_at(a, b) * fj).sum())
                .collect();
        }
        let k = c * c_ln.exp();
        let z1 = |s: &Site| s.y1.y * s.y1.ln.exp();
        let z2 = |s: &Site| s.y2.y * s.y2.ln.exp();
        let mut order: Vec<usize> = (0..cols.len()).collect();
        order.sort_by(|&i, &j| cols[i].x.total_cmp(&cols[j].x));
        let xs: Vec<f64> = order.iter().map(|&j| cols[j].x).collect();
        let zero = Complex64::new(0.0, 0.0);
        // below[n] = Σ over the first n sorted columns of z₁ f,
        // above[n] = Σ over the remaining ones of z₂ f.
        let mut below = Vec::with_capacity(xs.len() + 1);
        below.push(zero);
        for &j in &order {
            let last = *below.last().unwrap_or(&zero);
            below.push(last + z1(&cols[j]) * f[j]);
        }
        let mut above = vec![zero; xs.len() + 1];
        for (n, &j) in order.iter().enumerate().rev() {
            above[n] = above[n + 1] + z2(&cols[j]) * f[j];
        }
        rows.iter()
            .map(|a| {
                let lo = xs.partition_point(|&x| x < a.x);
                let hi = xs.partition_point(|&x| x <= a.x);
                let (za1, za2) = (z1(a), z2(a));
                let mut total = za2 * below[lo] + za1 * above[hi];
                for &j in &order[lo..hi] {
                    let b = &cols[j];
                    total += 0.5 * (za1 * z2(b) + za2 * z1(b)) * f[j];
                }
                k * total
            })
            .collect()
    }

    pub fn d_left(&self, x: f64, xp: f64) -> Result<Complex64> {
        Ok(self.d_left_at(&self.site(x)?, &self.site(xp)?))
    }

    pub fn d_right(&self, x: f64, xp: f64) -> Result<Complex64> {
        Ok(self.d_right_at(&self.site(x)?, &self.site(xp)?))
    }
}

fn site_of(pair: &HomogeneousPair, x: f64) -> Result<Site> {
    Ok(Site {
        x,
        y1: pair.y1().eval(x)?,
        y2: pair.y2().eval(x)?,
    })
}

impl GreenKernel for G0Evaluator {
    fn value(&self, x: f64, xp: f64) -> Result<Complex64> {
        Ok(self.value_at(&self.site(x)?, &self.site(xp)?))
    }

    fn matrix(&self, rows: &[f64], cols: &[f64]) -> Result<Vec<Complex64>> {
        let rs = self.sites(rows)?;
        let cs = self.sites(cols)?;
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
        let rs = self.sites(rows)?;
        let cs = self.sites(cols)?;
        // G₀ is symmetric.
        Ok((self.apply_sites(&rs, &cs, f), self.apply_sites(&rs, &cs, g)))
    }

    fn problem(&self) -> &ProblemSpec {
        self.pair.problem()
    }
}

/// Builds `G₀` from a solved pair.
pub fn g0(pair: HomogeneousPair) -> Result<G0Evaluator> {
    G0Evaluator::new(pair)
}

/// Constant-coefficient closed form `m e^{ik|x-x′|} / (2ik)`.
pub fn free_green(mass: f64, k: Complex64, x: f64, xp: f64) -> Complex64 {
    let i = Complex64::i();
    mass * (i * k * (x - xp).abs()).exp() / (2.0 * i * k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{Frequency, MassProfile, PotentialSpec};

    fn free() -> G0Evaluator {
        let p = ProblemSpec::new(
            MassProfile::constant(1.0).unwrap(),
            PotentialSpec::free(),
            Frequency::new(0.5, 1e-6).unwrap(),
        );
        G0Evaluator::build(&p).unwrap()
    }

    #[test]
    fn step_convention() {
        assert_eq!(step(0.0), 0.5);
        assert_eq!(step(-1e-300), 0.0);
        assert_eq!(step(2.0), 1.0);
    }

    #[test]
    fn free_boundary_data() {
        let g = free();
        let b = g.boundary();
        let (k, _) = g.problem().wavenumbers();
        let want = free_green(1.0, k, 0.0, 0.0);
        assert!((b.g00 - want).norm() < 1e-9);
        assert!(b.d_l.norm() < 1e-9);
        assert_eq!(b.d_l, b.d_r);
    }

    #[test]
    fn one_sided_derivatives_match_differences() {
        let g = free();
        let h = 1e-5;
        for (x, xp) in [(0.3, -0.7), (-1.2, 0.4), (2.0, 2.5)] {
            let fd = (g.value(x + h, xp).unwrap() - g.value(x - h, xp).unwrap()) / (2.0 * h);
            assert!((g.d_left(x, xp).unwrap() - fd).norm() < 1e-6);
            let fd = (g.value(x, xp + h).unwrap() - g.value(x, xp - h).unwrap()) / (2.0 * h);
            assert!((g.d_right(x, xp).unwrap() - fd).norm() < 1e-6);
        }
    }

    #[test]
    fn running_sums_match_matrix() {
        let g = free();
        let rows = [-1.0, 0.0, 0.5, 2.0, 0.5];
        let cols = [0.5, -2.0, 0.0, 3.0, -0.1];
        let f: Vec<Complex64> = (0..5).map(|j| Complex64::new(j as f64, 1.0 - j as f64)).collect();
        let (a, b) = g.apply(&rows, &cols, &f, &f).unwrap();
        let m = g.matrix(&rows, &cols).unwrap();
        for i in 0..rows.len() {
            let want: Complex64 = (0..cols.len()).map(|j| m[i * cols.len() + j] * f[j]).sum();
            assert!((a[i] - want).norm() < 1e-12 * want.norm().max(1.0));
            assert!((b[i] - want).norm() < 1e-12 * want.norm().max(1.0));
        }
    }

    #[test]
    fn matrix_matches_pointwise() {
        let g = free();
        let xs = [-1.0, 0.0, 0.5];
        let ys = [0.5, -2.0];
        let m = g.matrix(&xs, &ys).unwrap();
        for (i, &x) in xs.iter().enumerate() {
            for (j, &y) in ys.iter().enumerate() {
                assert_eq!(m[i * ys.len() + j], g.value(x, y).unwrap());
            }
        }
    }
}
