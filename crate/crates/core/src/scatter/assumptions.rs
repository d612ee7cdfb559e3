//! Runtime checks of the two spectral hypotheses: s₁₁ and sᴬ₁₁ have no
//! zeros in their closed sectors, and k²s₁₁, k²sᴬ₁₁ have nonzero limits at
//! the origin.

use num_complex::Complex;
use serde::Serialize;

use super::{Mode, Problem, Scatterer};
use crate::error::Result;
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport<T> {
    pub min_abs_s11_d1: T,
    pub min_abs_sa11_d4: T,
    /// Winding number of s₁₁ (resp. sᴬ₁₁) around the boundary of the
    /// truncated sector; `None` when the contour could not be resolved.
    pub winding_s11: Option<i64>,
    pub winding_sa11: Option<i64>,
    /// Newton-refined zero of s₁₁ (resp. sᴬ₁₁) when the winding count is
    /// nonzero and the iteration converged.
    pub zero_s11: Option<Complex<T>>,
    pub zero_sa11: Option<Complex<T>>,
    pub origin_limit_s: Complex<T>,
    pub origin_limit_sa: Complex<T>,
    /// Largest relative change of the two origin limits between ladders.
    pub origin_rel_change: T,
    pub solitonless: Verdict,
    pub generic_origin: Verdict,
    pub diagnostics: Vec<String>,
}

impl<T: Real> AssumptionReport<T> {
    pub fn any_failed(&self) -> bool {
        self.solitonless == Verdict::Fail || self.generic_origin == Verdict::Fail
    }
}

const MESH_ANGLES: usize = 5;
const MESH_RADII: usize = 24;
const CONTOUR_NODES: usize = 48;
const MAX_BISECT_DEPTH: usize = 12;

impl<T: Real> Scatterer<T> {
    /// (s₁₁ or sᴬ₁₁) at a single tolerance; sector points use column 1 only.
    fn entry11(&self, k: Complex<T>, problem: Problem) -> Result<Complex<T>> {
        let integ = self.integrate_x(k, &[1], Mode::Columns, problem, self.config.tol)?;
        Ok(integ.columns[0].s_col[0])
    }

    /// Mesh points in the closed sector 0 ≤ arg k ≤ π/3 (direct) or its
    /// mirror image π ≤ arg k ≤ 4π/3 (adjoint).
    fn sector_mesh(&self, problem: Problem) -> Vec<Complex<T>> {
        let r0 = self.config.k_min;
        let r1 = self.config.k_sector_max;
        let sign = match problem {
            Problem::Direct => T::one(),
            Problem::Adjoint => -T::one(),
        };
        let ratio = (r1 / r0).powf(T::one() / T::count(MESH_RADII - 1));
        let mut out = Vec::new();
        for a in 0..MESH_ANGLES {
            let theta = T::PI() / T::lit(3.0) * T::count(a) / T::count(MESH_ANGLES - 1);
            let mut r = r0;
            for _ in 0..MESH_RADII {
                out.push(Complex::from_polar(r, theta) * sign);
                r = r * ratio;
            }
        }
        out
    }

    /// Closed contour around the truncated sector, counter-clockwise. The
    /// inner arc sits at twice k_min so that zeros close to the origin are
    /// enclosed; radial sides are spaced geometrically.
    fn sector_contour(&self, problem: Problem) -> Vec<Complex<T>> {
        let r0 = T::lit(2.0) * self.config.k_min;
        let r1 = self.config.k_sector_max;
        let third = T::PI() / T::lit(3.0);
        let sign = match problem {
            Problem::Direct => T::one(),
            Problem::Adjoint => -T::one(),
        };
        let n = CONTOUR_NODES;
        let frac = |i: usize| T::count(i) / T::count(n);
        let radius = |f: T| r0 * (r1 / r0).powf(f);
        let mut pts = Vec::new();
        for i in 0..n {
            pts.push(Complex::new(radius(frac(i)), T::zero()));
        }
        for i in 0..n {
            pts.push(Complex::from_polar(r1, third * frac(i)));
        }
        for i in 0..n {
            pts.push(Complex::from_polar(radius(T::one() - frac(i)), third));
        }
        for i in 0..n {
            pts.push(Complex::from_polar(r0, third * (T::one() - frac(i))));
        }
        pts.into_iter().map(|p| p * sign).collect()
    }

    /// Total change of arg f along the closed polygon, divided by 2π;
    /// segments are bisected until successive arguments differ by < π/4.
    fn winding(&self, problem: Problem) -> Result<Option<i64>> {
        let pts = self.sector_contour(problem);
        let f = |k: Complex<T>| self.entry11(k, problem);
        let mut values = Vec::with_capacity(pts.len());
        for &p in &pts {
            values.push(f(p)?);
        }
        let quarter = T::PI() / T::lit(4.0);
        let mut total = T::zero();
        let n = pts.len();
        for i in 0..n {
            let (a, b) = (pts[i], pts[(i + 1) % n]);
            let (fa, fb) = (values[i], values[(i + 1) % n]);
            let mut stack = vec![(a, fa, b, fb, 0usize)];
            while let Some((a, fa, b, fb, depth)) = stack.pop() {
                let d = (fb / fa).arg();
                if d.abs() < quarter {
                    total = total + d;
                    continue;
                }
                if depth >= MAX_BISECT_DEPTH {
                    return Ok(None);
                }
                let m = (a + b) * T::lit(0.5);
                let fm = f(m)?;
                // second half pushed first so the first half is summed first
                stack.push((m, fm, b, fb, depth + 1));
                stack.push((a, fa, m, fm, depth + 1));
            }
        }
        let turns = total / (T::lit(2.0) * T::PI());
        let rounded = turns.round();
        if (turns - rounded).abs() > T::lit(0.1) {
            return Ok(None);
        }
        Ok(rounded.to_i64())
    }

    /// Smallest |entry| over the mesh and where it occurs.
    fn sector_minimum(&self, problem: Problem) -> Result<(T, Complex<T>)> {
        let mut best = (T::infinity(), Complex::new(T::zero(), T::zero()));
        for k in self.sector_mesh(problem) {
            let m = self.entry11(k, problem)?.norm();
            if m < best.0 {
                best = (m, k);
            }
        }
        Ok(best)
    }

    /// Newton iteration with a central-difference derivative (the entry is
    /// analytic off the origin).
    fn locate_zero(&self, start: Complex<T>, problem: Problem) -> Option<Complex<T>> {
        let mut k = start;
        for _ in 0..40 {
            let h = k.norm() * T::lit(1e-4);
            let f = self.entry11(k, problem).ok()?;
            let fp = (self.entry11(k + h, problem).ok()? - self.entry11(k - h, problem).ok()?) / (h * T::lit(2.0));
            let step = f / fp;
            if !step.norm().is_finite() {
                return None;
            }
            k = k - step;
            if k.norm() < self.config.k_min {
                return None;
            }
            if step.norm() <= T::lit(1e-10) * k.norm() {
                return Some(k);
            }
        }
        None
    }

    /// Samples the sectors, counts windings and extrapolates the origin
    /// limits. Numerical failures give an inconclusive verdict with a
    /// diagnostic, never a pass.
    pub fn assumption_checks(&self) -> AssumptionReport<T> {
        let mut diagnostics = Vec::new();
        let nan = T::nan();
        let mut sector = |problem: Problem, label: &str| -> (T, Option<i64>, Option<Complex<T>>, bool) {
            let (min, argmin) = match self.sector_minimum(problem) {
                Ok(m) => m,
                Err(e) => {
                    diagnostics.push(format!("{label} sector mesh: {e}"));
                    return (nan, None, None, false);
                }
            };
            match self.winding(problem) {
                Ok(Some(w)) => {
                    let zero = if w != 0 { self.locate_zero(argmin, problem) } else { None };
                    if let Some(z) = zero {
                        diagnostics.push(format!("{label}: zero near k = {:.6e}{:+.6e}i", z.re.as_f64(), z.im.as_f64()));
                    }
                    (min, Some(w), zero, true)
                }
                Ok(None) => {
                    diagnostics.push(format!("{label} winding count unresolved"));
                    (min, None, None, false)
                }
                Err(e) => {
                    diagnostics.push(format!("{label} winding contour: {e}"));
                    (min, None, None, false)
                }
            }
        };
        let (min_s, wind_s, zero_s, ok_s) = sector(Problem::Direct, "s11 on D1");
        let (min_sa, wind_sa, zero_sa, ok_sa) = sector(Problem::Adjoint, "sA11 on D4");

        let threshold = self.config.sector_threshold;
        let below = |m: T| m.is_finite() && m < threshold;
        let wound = |w: Option<i64>| matches!(w, Some(n) if n != 0);
        let solitonless = if below(min_s) || below(min_sa) || wound(wind_s) || wound(wind_sa) {
            Verdict::Fail
        } else if ok_s && ok_sa {
            Verdict::Pass
        } else {
            Verdict::Inconclusive
        };
        if wound(wind_s) || wound(wind_sa) {
            diagnostics.push(format!(
                "nonzero winding (s11: {wind_s:?}, sA11: {wind_sa:?}): zeros inside the sector"
            ));
        }

        let cplx_nan = Complex::new(nan, nan);
        let (origin_s, origin_sa, rel, generic_origin) = match self.origin_limits() {
            Ok(lim) => {
                let rel_s = (lim.k2_s11 - lim.k2_s11_coarse).norm() / lim.k2_s11.norm();
                let rel_sa = (lim.k2_sa11 - lim.k2_sa11_coarse).norm() / lim.k2_sa11.norm();
                let rel = rel_s.max(rel_sa);
                let small = lim.k2_s11.norm() <= self.config.origin_threshold
                    || lim.k2_sa11.norm() <= self.config.origin_threshold;
                let verdict = if small {
                    diagnostics.push("k^2 s11 or k^2 sA11 tends to zero at the origin".into());
                    Verdict::Fail
                } else if rel <= self.config.origin_consistency {
                    Verdict::Pass
                } else {
                    diagnostics.push(format!(
                        "origin limit changes by {:.2}% between ladders",
                        (rel * T::lit(100.0)).as_f64()
                    ));
                    Verdict::Inconclusive
                };
                (lim.k2_s11, lim.k2_sa11, rel, verdict)
            }
            Err(e) => {
                diagnostics.push(format!("origin ladder: {e}"));
                (cplx_nan, cplx_nan, nan, Verdict::Inconclusive)
            }
        };

        AssumptionReport {
            min_abs_s11_d1: min_s,
            min_abs_sa11_d4: min_sa,
            winding_s11: wind_s,
            winding_sa11: wind_sa,
            zero_s11: zero_s,
            zero_sa11: zero_sa,
            origin_limit_s: origin_s,
            origin_limit_sa: origin_sa,
            origin_rel_change: rel,
            solitonless,
            generic_origin,
            diagnostics,
        }
    }
}
