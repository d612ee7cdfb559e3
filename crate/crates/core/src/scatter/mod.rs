//! Direct scattering: the eigenfunctions X and Xᴬ normalised at x = +∞,
//! the spectral functions s(k) and sᴬ(k), and the reflection coefficients
//! r₁ = s₁₂/s₁₁ on (0, ∞) and r₂ = sᴬ₁₂/sᴬ₁₁ on (−∞, 0).
//!
//! Columns are integrated one at a time in a regular frame. For the direct
//! problem the column y = P·X[:, j] obeys
//!
//! ```text
//! y' = (A + M(x) − l_j) y,    A = [[0,1,0],[0,0,1],[k³,0,0]] = P L P⁻¹,
//! ```
//!
//! which has no 1/k singularity; for the adjoint problem the column
//! z = k²·P⁻ᵀ·Xᴬ[:, j] obeys z' = (l_j − (A + M)ᵀ) z. The s-integrand is
//! accumulated in the same sweep.

mod assumptions;
mod line;

pub use assumptions::{AssumptionReport, Verdict};
pub use line::{compute_zeta0, uniform_grid, SpectralLine};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::lax::{eigenvalues, p_pair, potential_row};
use crate::numkit::interp::extrapolate_to_zero;
use crate::numkit::ode::{dopri5, OdeOptions, OdeStats};
use crate::numkit::Complex3x3;
use serde::{Deserialize, Serialize};

use crate::profiles::{effective_support, Profile};
use crate::Real;

/// Tunable thresholds of the scattering stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScatterConfig<T: Real> {
    /// Smallest admissible |k|.
    pub k_min: T,
    /// Local error tolerance of the ODE sweep.
    pub tol: T,
    /// Threshold passed to [`effective_support`].
    pub support_eps: T,
    /// |s₁₁| below this is reported as a suspected zero.
    pub division_threshold: T,
    /// Column norm that counts as blow-up.
    pub blowup: T,
    /// Cap on max |Re(lᵢ − lⱼ)|·X∞ in full mode.
    pub full_cap: T,
    /// |lim k²s₁₁| must exceed this for the origin assumption to pass.
    pub origin_threshold: T,
    /// Allowed relative change of the origin limit between ladders.
    pub origin_consistency: T,
    /// Mesh minimum of |s₁₁| that counts as safely nonzero.
    pub sector_threshold: T,
    /// Outer radius of the sector mesh.
    pub k_sector_max: T,
    /// |r₁| at the last node of a computed spectral line must be below this.
    pub r1_cutoff: T,
    pub max_steps: usize,
}

impl<T: Real> Default for ScatterConfig<T> {
    fn default() -> Self {
        ScatterConfig {
            k_min: T::lit(1e-3),
            tol: T::lit(1e-10),
            support_eps: T::lit(1e-14),
            division_threshold: T::lit(1e-12),
            blowup: T::lit(1e12),
            full_cap: T::lit(25.0),
            origin_threshold: T::lit(1e-6),
            origin_consistency: T::lit(0.05),
            sector_threshold: T::lit(1e-6),
            k_sector_max: T::lit(6.0),
            r1_cutoff: T::lit(1e-10),
            max_steps: 2_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Only the columns whose Volterra kernels do not grow.
    Columns,
    /// All three columns; super-exponential data only.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Problem {
    Direct,
    Adjoint,
}

/// One integrated column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColumnResult<T> {
    /// 1-based column index.
    pub index: usize,
    /// X[:, j] (or Xᴬ[:, j]) at x = −X∞.
    pub x_col: [Complex<T>; 3],
    /// s[:, j] (or sᴬ[:, j]); only row 1 is accumulated in column mode.
    pub s_col: [Complex<T>; 3],
    /// Largest sup-norm of the column seen during the sweep.
    pub max_norm: T,
    pub stats: OdeStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Integration<T> {
    pub k: Complex<T>,
    pub problem: Problem,
    pub mode: Mode,
    pub x_inf: T,
    pub columns: Vec<ColumnResult<T>>,
}

impl<T: Real> Integration<T> {
    pub fn column(&self, index: usize) -> Option<&ColumnResult<T>> {
        self.columns.iter().find(|c| c.index == index)
    }

    /// Assembled X (or Xᴬ) at −X∞ when all three columns are present.
    pub fn x_matrix(&self) -> Option<Complex3x3<T>> {
        self.assemble(|c| c.x_col)
    }

    /// Assembled s (or sᴬ) when all three columns are present (full mode).
    pub fn s_matrix(&self) -> Option<Complex3x3<T>> {
        if self.mode != Mode::Full {
            return None;
        }
        self.assemble(|c| c.s_col)
    }

    fn assemble(&self, f: impl Fn(&ColumnResult<T>) -> [Complex<T>; 3]) -> Option<Complex3x3<T>> {
        let mut out = Complex3x3::zero();
        for j in 1..=3 {
            out.set_column(j - 1, f(self.column(j)?));
        }
        Some(out)
    }
}

/// s₁₁, s₁₂ (or sᴬ₁₁, sᴬ₁₂) at one k.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterSample<T> {
    pub k: Complex<T>,
    pub s11: Complex<T>,
    /// Absent when column 2 is not stably computable at this k.
    pub s12: Option<Complex<T>>,
    pub full_s: Option<Complex3x3<T>>,
    pub mode: Mode,
    pub converged: bool,
    /// Change of the entries between tolerances `tol` and `tol/16`.
    pub est_error: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reflection<T> {
    pub value: Complex<T>,
    pub est_error: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    R1,
    R2,
}

/// Richardson-extrapolated limits at k → 0.
#[derive(Debug, Clone, PartialEq)]
pub struct OriginLimits<T> {
    pub ladder: Vec<T>,
    pub r1: Complex<T>,
    pub r2: Complex<T>,
    pub k2_s11: Complex<T>,
    pub k2_sa11: Complex<T>,
    /// Same quantities from the ladder shifted up by a factor two.
    pub k2_s11_coarse: Complex<T>,
    pub k2_sa11_coarse: Complex<T>,
}

/// Scattering context for one profile: holds the truncation radius X∞.
#[derive(Debug, Clone)]
pub struct Scatterer<T: Real> {
    profile: Profile<T>,
    config: ScatterConfig<T>,
    x_inf: T,
}

fn max_re_gap<T: Real>(l: &[Complex<T>; 3]) -> T {
    let mut m = T::zero();
    for a in l {
        for b in l {
            m = m.max((a - b).re.abs());
        }
    }
    m
}

impl<T: Real> Scatterer<T> {
    pub fn new(profile: Profile<T>, config: ScatterConfig<T>) -> Result<Self> {
        if !(config.k_min > T::zero()) {
            return Err(Error::validation("k_min", "must be positive"));
        }
        if !(config.tol > T::zero()) {
            return Err(Error::validation("tol", "must be positive"));
        }
        let x_inf = effective_support(&profile, config.support_eps)?;
        Ok(Scatterer { profile, config, x_inf })
    }

    pub fn profile(&self) -> &Profile<T> {
        &self.profile
    }

    pub fn config(&self) -> &ScatterConfig<T> {
        &self.config
    }

    pub fn x_inf(&self) -> T {
        self.x_inf
    }

    /// Columns whose Volterra kernels never grow during the downward sweep:
    /// Re(lᵢ − lⱼ) ≥ 0 for all i (direct) or ≤ 0 (adjoint).
    pub fn stable_columns(k: Complex<T>, problem: Problem) -> Vec<usize> {
        let l = eigenvalues(k);
        let slack = T::lit(1e-12) * k.norm();
        (0..3)
            .filter(|&j| {
                l.iter().all(|li| {
                    let re = (li - l[j]).re;
                    match problem {
                        Problem::Direct => re >= -slack,
                        Problem::Adjoint => re <= slack,
                    }
                })
            })
            .map(|j| j + 1)
            .collect()
    }

    fn check_full_mode(&self, k: Complex<T>) -> Result<()> {
        if !self.profile.is_super_exponential() {
            return Err(Error::Contract(
                "full mode needs a super-exponentially decaying profile".into(),
            ));
        }
        let gap = max_re_gap(&eigenvalues(k)) * self.x_inf;
        if gap > self.config.full_cap {
            return Err(Error::Contract(format!(
                "full mode dynamic range max|Re(l_i - l_j)|·X∞ = {:.3} exceeds cap {}",
                gap.as_f64(),
                self.config.full_cap.as_f64()
            )));
        }
        Ok(())
    }

    /// Integrates the requested columns of X (or Xᴬ) from +X∞ down to −X∞.
    pub fn integrate_x(
        &self,
        k: Complex<T>,
        cols: &[usize],
        mode: Mode,
        problem: Problem,
        tol: T,
    ) -> Result<Integration<T>> {
        if k == Complex::zero() {
            return Err(Error::Singular("k = 0".into()));
        }
        if cols.is_empty() || cols.iter().any(|c| !(1..=3).contains(c)) {
            return Err(Error::Contract("columns must be a nonempty subset of {1,2,3}".into()));
        }
        match mode {
            Mode::Full => self.check_full_mode(k)?,
            Mode::Columns => {
                let stable = Self::stable_columns(k, problem);
                if let Some(bad) = cols.iter().find(|c| !stable.contains(c)) {
                    return Err(Error::Contract(format!(
                        "column {bad} has a growing kernel at k = {}{:+}i; stable columns {stable:?}",
                        k.re.as_f64(),
                        k.im.as_f64()
                    )));
                }
            }
        }
        let columns = cols
            .iter()
            .map(|&j| self.integrate_column(k, j, mode, problem, tol))
            .collect::<Result<Vec<_>>>()?;
        Ok(Integration {
            k,
            problem,
            mode,
            x_inf: self.x_inf,
            columns,
        })
    }

    fn integrate_column(
        &self,
        k: Complex<T>,
        j: usize,
        mode: Mode,
        problem: Problem,
        tol: T,
    ) -> Result<ColumnResult<T>> {
        let (p, p_inv) = p_pair(k)?;
        let l = eigenvalues(k);
        let lj = l[j - 1];
        let k2 = k * k;
        let k3 = k2 * k;
        let rows: Vec<usize> = match mode {
            Mode::Columns => vec![0],
            Mode::Full => vec![0, 1, 2],
        };
        let nacc = rows.len();
        let zero = Complex::<T>::zero();
        let one = Complex::<T>::one();
        let three = T::lit(3.0);
        let inv_k2 = one / k2;
        let k_abs2 = k.norm_sqr();

        // state: frame vector (3), accumulators (nacc), ∫‖U‖ (1)
        let mut state = vec![zero; 3 + nacc + 1];
        match problem {
            Problem::Direct => {
                for (m, s) in state.iter_mut().take(3).enumerate() {
                    *s = p.m[m][j - 1];
                }
            }
            Problem::Adjoint => {
                for (m, s) in state.iter_mut().take(3).enumerate() {
                    *s = k2 * p_inv.m[j - 1][m];
                }
            }
        }

        let profile = &self.profile;
        let rhs = |x: T, y: &[Complex<T>], dy: &mut [Complex<T>]| {
            let sample = profile.eval(x);
            let (a, b) = potential_row(&sample);
            // ‖U‖ in the induced ∞-norm: U is rank one, P⁻¹[:,3] ⊗ (a P[1,:] + b P[2,:])
            let r: [Complex<T>; 3] = [0, 1, 2].map(|m| p.m[0][m] * a + p.m[1][m] * b);
            let sum_r = r[0].norm() + r[1].norm() + r[2].norm();
            match problem {
                Problem::Direct => {
                    let w = y[0] * a + y[1] * b;
                    dy[0] = y[1] - lj * y[0];
                    dy[1] = y[2] - lj * y[1];
                    dy[2] = k3 * y[0] + w - lj * y[2];
                    let ux = w * inv_k2 / three;
                    for (slot, &i) in rows.iter().enumerate() {
                        let phase = if i == j - 1 { one } else { (-(l[i] - lj) * x).exp() };
                        dy[3 + slot] = -(phase * ux);
                    }
                    dy[3 + nacc] = Complex::new(-sum_r / (three * k_abs2), T::zero());
                }
                Problem::Adjoint => {
                    dy[0] = -(y[2] * (k3 + a)) + lj * y[0];
                    dy[1] = -(y[0] + y[2] * b) + lj * y[1];
                    dy[2] = -y[1] + lj * y[2];
                    for (slot, &i) in rows.iter().enumerate() {
                        let utx = r[i] * y[2] * inv_k2;
                        let phase = if i == j - 1 { one } else { ((l[i] - lj) * x).exp() };
                        dy[3 + slot] = -(phase * utx);
                    }
                    let max_r = r[0].norm().max(r[1].norm()).max(r[2].norm());
                    dy[3 + nacc] = Complex::new(-max_r / k_abs2, T::zero());
                }
            }
        };

        let to_x = |y: &[Complex<T>]| -> [Complex<T>; 3] {
            let v = [y[0], y[1], y[2]];
            match problem {
                Problem::Direct => p_inv.mul_vec(&v),
                Problem::Adjoint => p.transpose().mul_vec(&v).map(|z| z * inv_k2),
            }
        };

        let gronwall_checked = mode == Mode::Columns;
        let blowup = self.config.blowup;
        let kernel_gap = max_re_gap(&l);
        let mut max_norm = T::one();
        let monitor = |x: T, y: &[Complex<T>]| -> Result<()> {
            let xc = to_x(y);
            let norm = xc.iter().map(|z| z.norm()).fold(T::zero(), T::max);
            max_norm = max_norm.max(norm);
            if !(norm < blowup) {
                return Err(Error::Instability {
                    x: x.as_f64(),
                    reason: format!(
                        "column {j} norm {:.3e} exceeds {:.1e}; largest kernel exponent |Re(l_i - l_j)| = {:.4}",
                        norm.as_f64(),
                        blowup.as_f64(),
                        kernel_gap.as_f64()
                    ),
                });
            }
            if gronwall_checked {
                let bound_exp = y[3 + nacc].re;
                if bound_exp < T::lit(600.0) {
                    let bound = bound_exp.exp() * (T::one() + T::lit(1e-6)) + T::lit(1e-8);
                    if norm > bound {
                        return Err(Error::Instability {
                            x: x.as_f64(),
                            reason: format!(
                                "column {j} norm {:.6e} exceeds its Gronwall bound {:.6e}",
                                norm.as_f64(),
                                bound.as_f64()
                            ),
                        });
                    }
                }
            }
            Ok(())
        };

        let mut opts = OdeOptions::with_tol(tol);
        opts.max_steps = self.config.max_steps;
        let stats = dopri5(rhs, self.x_inf, -self.x_inf, &mut state, opts, monitor)?;

        let x_col = to_x(&state);
        let mut s_col = [zero; 3];
        for (slot, &i) in rows.iter().enumerate() {
            let delta = if i == j - 1 { one } else { zero };
            s_col[i] = match problem {
                Problem::Direct => delta - state[3 + slot],
                Problem::Adjoint => delta + state[3 + slot],
            };
        }
        if mode == Mode::Columns {
            s_col[1] = Complex::new(T::nan(), T::nan());
            s_col[2] = s_col[1];
        }
        Ok(ColumnResult {
            index: j,
            x_col,
            s_col,
            max_norm,
            stats,
        })
    }

    fn sample(&self, k: Complex<T>, mode: Mode, problem: Problem) -> Result<(ScatterSample<T>, ScatterSample<T>)> {
        if k.norm() < self.config.k_min {
            return Err(Error::TooCloseToOrigin {
                k_abs: k.norm().as_f64(),
                k_min: self.config.k_min.as_f64(),
            });
        }
        let cols: Vec<usize> = match mode {
            Mode::Full => vec![1, 2, 3],
            Mode::Columns => {
                let stable = Self::stable_columns(k, problem);
                if !stable.contains(&1) {
                    let region = match problem {
                        Problem::Direct => "closure of D1",
                        Problem::Adjoint => "closure of D4",
                    };
                    return Err(Error::Contract(format!(
                        "k = {}{:+}i lies outside the {region}, column 1 is not stable",
                        k.re.as_f64(),
                        k.im.as_f64()
                    )));
                }
                stable.into_iter().filter(|&c| c <= 2).collect()
            }
        };
        let run = |tol: T| -> Result<ScatterSample<T>> {
            let integ = self.integrate_x(k, &cols, mode, problem, tol)?;
            let s11 = integ.column(1).map(|c| c.s_col[0]).unwrap_or_else(Complex::zero);
            let s12 = integ.column(2).map(|c| c.s_col[0]);
            let full_s = integ.s_matrix();
            Ok(ScatterSample {
                k,
                s11,
                s12,
                full_s,
                mode,
                converged: true,
                est_error: T::zero(),
            })
        };
        let coarse = run(self.config.tol)?;
        let mut fine = run(self.config.tol / T::lit(16.0))?;
        let mut est = (fine.s11 - coarse.s11).norm();
        if let (Some(a), Some(b)) = (fine.s12, coarse.s12) {
            est = est.max((a - b).norm());
        }
        if let (Some(a), Some(b)) = (fine.full_s, coarse.full_s) {
            est = est.max((a - b).max_abs());
        }
        let scale = fine.s11.norm().max(T::one());
        fine.est_error = est;
        fine.converged = est.is_finite() && est <= T::lit(1e4) * self.config.tol * scale;
        if let Some(s) = fine.full_s {
            let dev = (s.det() - Complex::one()).norm();
            if !(dev <= T::lit(1e-6)) {
                return Err(Error::Instability {
                    x: (-self.x_inf).as_f64(),
                    reason: format!("det s deviates from 1 by {:.3e} in full mode", dev.as_f64()),
                });
            }
        }
        Ok((fine, coarse))
    }

    /// s₁₁, s₁₂ for k > 0 or k in the closed sector 0 ≤ arg k ≤ π/3.
    pub fn s_entries(&self, k: Complex<T>, mode: Mode) -> Result<ScatterSample<T>> {
        Ok(self.sample(k, mode, Problem::Direct)?.0)
    }

    /// sᴬ₁₁, sᴬ₁₂ for k < 0 or k in the closed sector π ≤ arg k ≤ 4π/3.
    pub fn sa_entries(&self, k: Complex<T>, mode: Mode) -> Result<ScatterSample<T>> {
        Ok(self.sample(k, mode, Problem::Adjoint)?.0)
    }

    /// r₁(k) for k > 0 or r₂(k) for k < 0.
    pub fn reflection(&self, k: T, which: Which) -> Result<Reflection<T>> {
        let kc = Complex::new(k, T::zero());
        let (fine, coarse) = match which {
            Which::R1 => {
                if !(k > T::zero()) {
                    return Err(Error::Domain("r1 is defined for k > 0".into()));
                }
                self.sample(kc, Mode::Columns, Problem::Direct)?
            }
            Which::R2 => {
                if !(k < T::zero()) {
                    return Err(Error::Domain("r2 is defined for k < 0".into()));
                }
                self.sample(kc, Mode::Columns, Problem::Adjoint)?
            }
        };
        let entry = match which {
            Which::R1 => "s11",
            Which::R2 => "sA11",
        };
        if !(fine.s11.norm() >= self.config.division_threshold) {
            return Err(Error::NearZeroDenominator {
                entry: entry.into(),
                value: fine.s11.norm().as_f64(),
                k_re: k.as_f64(),
                k_im: 0.0,
            });
        }
        let ratio = |s: &ScatterSample<T>| s.s12.unwrap_or_else(Complex::zero) / s.s11;
        let value = ratio(&fine);
        let est_error = (value - ratio(&coarse)).norm();
        Ok(Reflection { value, est_error })
    }

    /// k²s₁₁, k²sᴬ₁₁, r₁, r₂ extrapolated to k = 0 from the ladder
    /// {4, 2, 1}·k_min (and {8, 4, 2}·k_min for a consistency check).
    pub fn origin_limits(&self) -> Result<OriginLimits<T>> {
        let km = self.config.k_min;
        let mults = [8.0, 4.0, 2.0, 1.0];
        let ks: Vec<T> = mults.iter().map(|&m| km * T::lit(m)).collect();
        let mut r1 = Vec::new();
        let mut r2 = Vec::new();
        let mut ks11 = Vec::new();
        let mut ksa11 = Vec::new();
        for &k in &ks {
            let kc = Complex::new(k, T::zero());
            let s = self.s_entries(kc, Mode::Columns)?;
            let sa = self.sa_entries(-kc, Mode::Columns)?;
            r1.push(self.reflection(k, Which::R1)?.value);
            r2.push(self.reflection(-k, Which::R2)?.value);
            ks11.push(s.s11 * (k * k));
            ksa11.push(sa.s11 * (k * k));
        }
        let fine = &ks[1..];
        let coarse = &ks[..3];
        Ok(OriginLimits {
            ladder: fine.to_vec(),
            r1: extrapolate_to_zero(fine, &r1[1..]),
            r2: extrapolate_to_zero(fine, &r2[1..]),
            k2_s11: extrapolate_to_zero(fine, &ks11[1..]),
            k2_sa11: extrapolate_to_zero(fine, &ksa11[1..]),
            k2_s11_coarse: extrapolate_to_zero(coarse, &ks11[..3]),
            k2_sa11_coarse: extrapolate_to_zero(coarse, &ksa11[..3]),
        })
    }
}

pub mod oracle;
