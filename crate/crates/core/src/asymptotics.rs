//! Scalars of the long-time formula on a ray x = ζt, the Plemelj factor δ₁
//! and its exponent χ₁, and the leading-order asymptotic field.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lax::omega;
use crate::numkit::interp::extrapolate_to_zero;
use crate::numkit::{adaptive_quad_with, gamma_polar, log_singular_quad_with, QuadOptions};
use crate::scatter::{compute_zeta0, SpectralLine};
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AsymConfig<T: Real> {
    /// Rays must satisfy ζ > ζ₀ + margin.
    pub margin: T,
    /// A ray is flagged valid only when |r₁(k₀)| ≤ 1 − epsilon.
    pub epsilon: T,
    /// Tolerance of the ray integrals.
    pub tol: T,
}

impl<T: Real> Default for AsymConfig<T> {
    fn default() -> Self {
        AsymConfig {
            margin: T::lit(0.05),
            epsilon: T::lit(1e-3),
            tol: T::lit(1e-12),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticParams<T> {
    pub zeta: T,
    pub k0: T,
    pub nu: T,
    pub q: Complex<T>,
    pub arg_q: T,
    /// arg Γ(iν); the ν → 0 limit −π/2 when q = 0.
    pub gamma_arg: T,
    pub tail: T,
    /// Quadrature estimate plus the bound on the part beyond k_max.
    pub tail_error: T,
    pub zeta0: T,
    pub valid: bool,
}

/// Per-ray record as written to `rays.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RayRecord {
    pub zeta: f64,
    pub k0: f64,
    pub nu: f64,
    pub q: [f64; 2],
    pub gamma_arg: f64,
    pub tail: f64,
    pub zeta0: f64,
}

impl<T: Real> AsymptoticParams<T> {
    pub fn record(&self) -> RayRecord {
        RayRecord {
            zeta: self.zeta.as_f64(),
            k0: self.k0.as_f64(),
            nu: self.nu.as_f64(),
            q: [self.q.re.as_f64(), self.q.im.as_f64()],
            gamma_arg: self.gamma_arg.as_f64(),
            tail: self.tail.as_f64(),
            zeta0: self.zeta0.as_f64(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymValue<T> {
    pub u: T,
    pub envelope: T,
    pub phase: T,
}

/// ν = −ln(1 − |q|²)/(2π).
pub fn nu_of<T: Real>(abs_q2: T) -> Result<T> {
    if !(abs_q2 >= T::zero()) {
        return Err(Error::validation("abs_q2", "must be a nonnegative number"));
    }
    if abs_q2 >= T::one() {
        return Err(Error::SectorViolation(format!(
            "|r1(k0)|^2 = {} is not below one",
            abs_q2.as_f64()
        )));
    }
    Ok(-(-abs_q2).ln_1p() / (T::lit(2.0) * T::PI()))
}

/// Logarithm with arg ∈ (0, 2π); the positive real axis is its cut.
pub fn ln0<T: Real>(z: Complex<T>) -> Result<Complex<T>> {
    if z.im == T::zero() && z.re >= T::zero() {
        return Err(Error::Branch(format!("ln0 is cut along [0, inf), got {}", z.re.as_f64())));
    }
    let mut arg = z.im.atan2(z.re);
    if arg <= T::zero() {
        arg = arg + T::TAU();
    }
    Ok(Complex::new(z.norm().ln(), arg))
}

fn k0_of<T: Real>(zeta: T) -> Result<T> {
    if !(zeta > T::zero()) {
        return Err(Error::Domain(format!("ray needs zeta > 0, got {}", zeta.as_f64())));
    }
    Ok(zeta * T::lit(0.5))
}

/// Breakpoints for integrals over [k₀, k_max]: k₀, the grid nodes inside,
/// any extra points, and k_max.
fn breakpoints<T: Real>(line: &SpectralLine<T>, k0: T, extra: &[T]) -> Vec<T> {
    let mut pts = vec![k0];
    pts.extend(line.k_grid.iter().copied().filter(|&s| s > k0 && s < line.k_max));
    pts.extend(extra.iter().copied().filter(|&s| s > k0 && s < line.k_max));
    pts.push(line.k_max);
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    pts.dedup();
    pts
}

fn covers<T: Real>(line: &SpectralLine<T>, k0: T) -> Result<()> {
    if k0 < line.k_min() || k0 >= line.k_max {
        return Err(Error::Coverage(format!(
            "k0 = {} outside the sampled range [{}, {})",
            k0.as_f64(),
            line.k_min().as_f64(),
            line.k_max.as_f64()
        )));
    }
    Ok(())
}

fn off_cut<T: Real>(k: Complex<T>, k0: T) -> Result<()> {
    if k.im == T::zero() && k.re > k0 {
        return Err(Error::Branch(format!("k = {} lies on the cut [k0, inf)", k.re.as_f64())));
    }
    Ok(())
}

fn quad_opts<T: Real>(tol: T) -> QuadOptions<T> {
    QuadOptions { tol, budget: 2_000_000 }
}

/// χ₁(ζ, k) = (1/2πi)∫_{k₀}^{k_max} ln₀(k − s) ℓ′(s) ds.
///
/// At k = k₀ itself the kernel is ln|s − k₀| + iπ (the nontangential limit),
/// integrated with the log-singular rule.
pub fn chi1<T: Real>(zeta: T, k: Complex<T>, line: &SpectralLine<T>, tol: T) -> Result<Complex<T>> {
    let k0 = k0_of(zeta)?;
    covers(line, k0)?;
    off_cut(k, k0)?;
    let two_pi_i = Complex::new(T::zero(), T::TAU());
    let ell = |s: T| Complex::new(line.ell_prime_at(s), T::zero());
    if k == Complex::new(k0, T::zero()) {
        let nodes = breakpoints(line, k0, &[]);
        let log_part = log_singular_quad_with(ell, k0, line.k_max, &nodes, quad_opts(tol))?;
        let mass = adaptive_quad_with(ell, &nodes, quad_opts(tol))?;
        let value = log_part.value + mass.value * Complex::new(T::zero(), T::PI());
        return Ok(value / two_pi_i);
    }
    let s_star = k.re.max(k0).min(line.k_max);
    let nodes = breakpoints(line, k0, &[s_star]);
    let mut failure = None;
    let res = adaptive_quad_with(
        |s| match ln0(k - s) {
            Ok(l) => l * line.ell_prime_at(s),
            Err(e) => {
                failure.get_or_insert(e);
                Complex::new(T::zero(), T::zero())
            }
        },
        &nodes,
        quad_opts(tol),
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(res.value / two_pi_i)
}

/// Re χ₁(ζ, k₀), which equals πν by the Plemelj formula.
pub fn chi1_at_k0<T: Real>(zeta: T, line: &SpectralLine<T>, tol: T) -> Result<T> {
    let k0 = k0_of(zeta)?;
    Ok(chi1(zeta, Complex::new(k0, T::zero()), line, tol)?.re)
}

/// The exponent (1/2πi)∫ f(s)/(s − k) ds with f = ln(1 − |r₁|²), computed
/// with f(s*) subtracted at s* = clamp(Re k) so the integrand stays bounded
/// as k approaches the cut.
fn delta1_exponent<T: Real>(k0: T, k: Complex<T>, line: &SpectralLine<T>, tol: T) -> Result<Complex<T>> {
    let s_star = k.re.max(k0).min(line.k_max);
    let f_star = line.log_gap_at(s_star);
    let nodes = breakpoints(line, k0, &[s_star]);
    let res = adaptive_quad_with(
        |s| {
            let num = line.log_gap_at(s) - f_star;
            if num == T::zero() {
                Complex::new(T::zero(), T::zero())
            } else {
                Complex::new(num, T::zero()) / (Complex::new(s, T::zero()) - k)
            }
        },
        &nodes,
        quad_opts(tol),
    )?;
    // ∫ ds/(s − k) over the segment; the arg change is below π in size
    let log_ratio = ((Complex::new(line.k_max, T::zero()) - k) / (Complex::new(k0, T::zero()) - k)).ln();
    let total = res.value + log_ratio * f_star;
    Ok(total / Complex::new(T::zero(), T::TAU()))
}

/// δ₁(ζ, k) = exp{(1/2πi)∫_{k₀}^{k_max} ln(1 − |r₁(s)|²)/(s − k) ds}.
pub fn delta1<T: Real>(zeta: T, k: Complex<T>, line: &SpectralLine<T>, tol: T) -> Result<Complex<T>> {
    let k0 = k0_of(zeta)?;
    covers(line, k0)?;
    off_cut(k, k0)?;
    if k == Complex::new(k0, T::zero()) {
        return Err(Error::Branch("delta1 is singular at k0".into()));
    }
    Ok(delta1_exponent(k0, k, line, tol)?.exp())
}

/// Boundary values (δ₁₊, δ₁₋) at a cut point s ∈ (k₀, k_max), from
/// δ₁(s ± iε) on the ladder ε ∈ {4, 2, 1}·10⁻³ extrapolated to ε = 0.
pub fn delta1_boundary<T: Real>(zeta: T, s: T, line: &SpectralLine<T>, tol: T) -> Result<(Complex<T>, Complex<T>)> {
    let k0 = k0_of(zeta)?;
    covers(line, k0)?;
    if !(s > k0 && s < line.k_max) {
        return Err(Error::Domain(format!("cut point {} outside (k0, k_max)", s.as_f64())));
    }
    let eps: Vec<T> = [4e-3, 2e-3, 1e-3].iter().map(|&e| T::lit(e)).collect();
    let side = |sign: T| -> Result<Complex<T>> {
        let mut logs = Vec::with_capacity(eps.len());
        for &e in &eps {
            logs.push(delta1_exponent(k0, Complex::new(s, sign * e), line, tol)?);
        }
        Ok(extrapolate_to_zero(&eps, &logs).exp())
    };
    Ok((side(T::one())?, side(-T::one())?))
}

/// The ray integral (1/π)∫_{k₀}^{k_max} ln|(s − k₀)/(s − ωk₀)| dln(1 − |r₁|²)
/// and its error bound (quadrature estimate plus the truncated tail).
pub fn tail_integral<T: Real>(line: &SpectralLine<T>, zeta: T, tol: T) -> Result<(T, T)> {
    let k0 = k0_of(zeta)?;
    covers(line, k0)?;
    let at_k0 = line.r1_at(k0)?.norm_sqr();
    if at_k0 >= T::one() || line.k_grid.iter().zip(&line.abs2).any(|(&s, &a)| s >= k0 && a >= T::one()) {
        return Err(Error::SectorViolation(format!(
            "|r1| reaches one on the ray integral range [{}, {}]",
            k0.as_f64(),
            line.k_max.as_f64()
        )));
    }
    let nodes = breakpoints(line, k0, &[]);
    let ell = |s: T| Complex::new(line.ell_prime_at(s), T::zero());
    let first = log_singular_quad_with(ell, k0, line.k_max, &nodes, quad_opts(tol))?;
    let wk0 = omega::<T>() * k0;
    let second = adaptive_quad_with(
        |s| Complex::new((Complex::new(s, T::zero()) - wk0).norm().ln() * line.ell_prime_at(s), T::zero()),
        &nodes,
        quad_opts(tol),
    )?;
    let value = (first.value.re - second.value.re) / T::PI();
    // beyond k_max the kernel is bounded by its value there and the measure
    // by |ln(1 − |r₁(k_max)|²)|
    let kernel_max = ((line.k_max - k0) / (Complex::new(line.k_max, T::zero()) - wk0).norm()).ln().abs();
    let truncated = kernel_max * line.log_gap_at(line.k_max).abs() / T::PI();
    let error = (first.error_estimate + second.error_estimate) / T::PI() + truncated;
    Ok((value, error))
}

/// All scalars of the formula on the ray ζ.
pub fn asym_params<T: Real>(line: &SpectralLine<T>, zeta: T, config: &AsymConfig<T>) -> Result<AsymptoticParams<T>> {
    let k0 = k0_of(zeta)?;
    let zeta0 = compute_zeta0(line)?;
    if zeta <= zeta0 + config.margin {
        return Err(Error::SectorViolation(format!(
            "zeta = {} is not above zeta0 + margin = {}",
            zeta.as_f64(),
            (zeta0 + config.margin).as_f64()
        )));
    }
    covers(line, k0)?;
    let q = line.r1_at(k0)?;
    let nu = nu_of(q.norm_sqr())?;
    let (arg_q, gamma_arg) = if nu > T::zero() {
        (q.arg(), gamma_polar(nu)?.1)
    } else {
        (T::zero(), -T::FRAC_PI_2())
    };
    let (tail, tail_error) = tail_integral(line, zeta, config.tol)?;
    Ok(AsymptoticParams {
        zeta,
        k0,
        nu,
        q,
        arg_q,
        gamma_arg,
        tail,
        tail_error,
        zeta0,
        valid: q.norm() <= T::one() - config.epsilon,
    })
}

/// Leading term u ≈ −envelope·sin(phase) at (x, t) on the ray of `params`.
pub fn u_asym<T: Real>(params: &AsymptoticParams<T>, x: T, t: T) -> Result<AsymValue<T>> {
    if !(t >= T::lit(2.0)) {
        return Err(Error::Contract(format!("u_asym needs t >= 2, got {}", t.as_f64())));
    }
    if (x / t - params.zeta).abs() > T::lit(1e-12) * params.zeta.max(T::one()) {
        return Err(Error::Contract(format!(
            "x/t = {} is not on the ray zeta = {}",
            (x / t).as_f64(),
            params.zeta.as_f64()
        )));
    }
    let k0 = params.k0;
    let nu = params.nu;
    let three = T::lit(3.0);
    let envelope = three.powf(T::lit(1.25)) * k0 * nu.sqrt() / (T::lit(2.0) * t).sqrt();
    let phase = T::lit(19.0) * T::PI() / T::lit(12.0) + nu * (T::lit(6.0) * three.sqrt() * t * k0 * k0).ln()
        - three.sqrt() * k0 * k0 * t
        - params.arg_q
        - params.gamma_arg
        + params.tail;
    Ok(AsymValue {
        u: -envelope * phase.sin(),
        envelope,
        phase,
    })
}
