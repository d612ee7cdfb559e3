//! Algebra of the 3×3 Lax pair: the eigenvector matrix P(k), the potential
//! U(x, k), the phase functions Φᵢⱼ, their critical points, and a
//! diagnostic builder for the six jump matrices on Γ = ℝ ∪ ωℝ ∪ ω²ℝ.

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::numkit::Complex3x3;
use crate::profiles::{Profile, ProfileSample};
use crate::Real;

/// ω = e^{2πi/3}, stored as the exact pair (−1/2, √3/2).
#[inline]
pub fn omega<T: Real>() -> Complex<T> {
    Complex::new(T::lit(-0.5), T::lit(3.0).sqrt() * T::lit(0.5))
}

/// ω² = conj(ω).
#[inline]
pub fn omega2<T: Real>() -> Complex<T> {
    omega::<T>().conj()
}

/// ωʲ for any integer j, from the two stored values.
#[inline]
pub fn omega_pow<T: Real>(j: i64) -> Complex<T> {
    match j.rem_euclid(3) {
        0 => Complex::one(),
        1 => omega(),
        _ => omega2(),
    }
}

/// Eigenvalues l_j = ωʲ k, j = 1, 2, 3.
pub fn eigenvalues<T: Real>(k: Complex<T>) -> [Complex<T>; 3] {
    [omega::<T>() * k, omega2::<T>() * k, k]
}

/// P(k) and its inverse.
///
/// P = D·P₀ with D = diag(1, k, k²) and P₀ the matrix of cube roots of unity,
/// so adj(P)/det P reduces to (P₀⁻¹)ⱼₘ k^{1−m} with (P₀⁻¹)ⱼₘ = ω^{−jm}/3.
pub fn p_pair<T: Real>(k: Complex<T>) -> Result<(Complex3x3<T>, Complex3x3<T>)> {
    if k == Complex::zero() || !(k.re.is_finite() && k.im.is_finite()) {
        return Err(Error::Singular("P(k) is singular at k = 0".into()));
    }
    let row_scale = [Complex::one(), k, k * k];
    let third = T::one() / T::lit(3.0);
    let mut p = Complex3x3::zero();
    let mut p_inv = Complex3x3::zero();
    for r in 0..3 {
        for c in 0..3 {
            let (rr, cc) = (r as i64 + 1, c as i64 + 1);
            p.m[r][c] = omega_pow::<T>(rr * cc) * row_scale[r];
            p_inv.m[r][c] = omega_pow::<T>(-rr * cc) * third / row_scale[c];
        }
    }
    Ok((p, p_inv))
}

/// det P(k) = −3√3·i·k³.
pub fn det_p<T: Real>(k: Complex<T>) -> Complex<T> {
    Complex::new(T::zero(), -T::lit(3.0) * T::lit(3.0).sqrt()) * k * k * k
}

/// The two nonzero entries (a, b) = (−v₀ − u₀ₓ, −2u₀) of the third row of
/// the undressed potential M(x).
#[inline]
pub fn potential_row<T: Real>(s: &ProfileSample<T>) -> (T, T) {
    (-s.v0 - s.u0x, -T::lit(2.0) * s.u0)
}

/// U = P⁻¹MP for a given profile sample. M has rank one, so
/// U = P⁻¹[:, 3] ⊗ (a·P[1, :] + b·P[2, :]).
pub fn lax_potential_from<T: Real>(
    sample: &ProfileSample<T>,
    p: &Complex3x3<T>,
    p_inv: &Complex3x3<T>,
) -> Complex3x3<T> {
    let (a, b) = potential_row(sample);
    let mut out = Complex3x3::zero();
    for i in 0..3 {
        for j in 0..3 {
            out.m[i][j] = p_inv.m[i][2] * (p.m[0][j] * a + p.m[1][j] * b);
        }
    }
    out
}

/// U(x, k) = P(k)⁻¹ M(x) P(k).
pub fn lax_potential<T: Real>(profile: &Profile<T>, x: T, k: Complex<T>) -> Result<Complex3x3<T>> {
    let (p, p_inv) = p_pair(k)?;
    Ok(lax_potential_from(&profile.eval(x), &p, &p_inv))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseTriple<T> {
    pub phi21: Complex<T>,
    pub phi31: Complex<T>,
    pub phi32: Complex<T>,
}

/// Φ₂₁, Φ₃₁, Φ₃₂ at (ζ, k).
pub fn phases<T: Real>(zeta: T, k: Complex<T>) -> PhaseTriple<T> {
    let w = omega::<T>();
    let w2 = omega2::<T>();
    let one = Complex::<T>::one();
    let z = Complex::new(zeta, T::zero());
    PhaseTriple {
        phi21: w * (w - one) * k * (z - k),
        phi31: (one - w) * k * (z - w2 * k),
        phi32: (one - w2) * k * (z - w * k),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoints<T> {
    pub k0: T,
    /// ωk₀ and ω²k₀.
    pub rotated: [Complex<T>; 2],
}

/// k₀ = ζ/2 and its rotations; ζ must be positive.
pub fn critical_points<T: Real>(zeta: T) -> Result<CriticalPoints<T>> {
    if !(zeta > T::zero()) || !zeta.is_finite() {
        return Err(Error::Domain(format!(
            "critical points need zeta > 0, got {}",
            zeta.as_f64()
        )));
    }
    let k0 = zeta / T::lit(2.0);
    Ok(CriticalPoints {
        k0,
        rotated: [omega::<T>() * k0, omega2::<T>() * k0],
    })
}

/// Reflection coefficients on their natural half-lines: r₁ on (0, ∞) and r₂
/// on (−∞, 0).
pub trait ReflectionSource<T: Real> {
    fn r1(&self, k: T) -> Complex<T>;
    fn r2(&self, k: T) -> Complex<T>;
}

/// A pair of closures used as a reflection source.
pub struct ReflectionFns<F, G>(pub F, pub G);

impl<T, F, G> ReflectionSource<T> for ReflectionFns<F, G>
where
    T: Real,
    F: Fn(T) -> Complex<T>,
    G: Fn(T) -> Complex<T>,
{
    fn r1(&self, k: T) -> Complex<T> {
        (self.0)(k)
    }
    fn r2(&self, k: T) -> Complex<T> {
        (self.1)(k)
    }
}

/// Which of the six rays (angles (j−1)π/3, j = 1..6) carries `k`.
pub fn ray_of<T: Real>(k: Complex<T>) -> Option<usize> {
    if k == Complex::zero() {
        return None;
    }
    let tol = T::lit(1e-10);
    let two_pi = T::lit(2.0) * T::PI();
    let mut arg = k.arg();
    if arg < T::zero() {
        arg = arg + two_pi;
    }
    let step = T::PI() / T::lit(3.0);
    let j = (arg / step).round();
    let off = (arg - j * step).abs();
    if off > tol {
        return None;
    }
    Some((j.to_usize().unwrap_or(0) % 6) + 1)
}

/// Real argument ωᵐk for the rotation that brings the ray onto ℝ.
fn real_arg<T: Real>(k: Complex<T>, m: i64) -> T {
    (omega_pow::<T>(m) * k).re
}

/// 𝓐: cyclic shift with 𝓐e₁ = e₂, 𝓐e₂ = e₃, 𝓐e₃ = e₁.
pub fn cyclic_a<T: Real>() -> Complex3x3<T> {
    let (o, z) = (T::one(), T::zero());
    Complex3x3::from_real([[z, z, o], [o, z, z], [z, o, z]])
}

/// 𝓑: swap of the first two coordinates.
pub fn swap_b<T: Real>() -> Complex3x3<T> {
    let (o, z) = (T::one(), T::zero());
    Complex3x3::from_real([[z, o, z], [o, z, z], [z, z, o]])
}

/// Jump matrix v_j(x, t, k) on ray `sector` (1..=6). Diagnostic only.
pub fn jump_matrix<T: Real, R: ReflectionSource<T> + ?Sized>(
    sector: usize,
    x: T,
    t: T,
    k: Complex<T>,
    refl: &R,
) -> Result<Complex3x3<T>> {
    if !(1..=6).contains(&sector) {
        return Err(Error::Contract(format!("sector must be 1..=6, got {sector}")));
    }
    if !(t > T::zero()) {
        return Err(Error::Contract("jump matrix needs t > 0".into()));
    }
    match ray_of(k) {
        Some(j) if j == sector => {}
        found => {
            return Err(Error::Contract(format!(
                "k = {}{:+}i is not on ray {sector} (found {found:?})",
                k.re.as_f64(),
                k.im.as_f64()
            )))
        }
    }
    let ph = phases(x / t, k);
    let e = |phi: Complex<T>| (phi * t).exp();
    let one = Complex::<T>::one();
    let zero = Complex::<T>::zero();
    let m = match sector {
        1 => {
            let r = refl.r1(real_arg(k, 0));
            [
                [one, -r * e(-ph.phi21), zero],
                [r.conj() * e(ph.phi21), one - r.norm_sqr(), zero],
                [zero, zero, one],
            ]
        }
        2 => {
            let r = refl.r2(real_arg(k, 1));
            [
                [one, zero, zero],
                [zero, one - r.norm_sqr(), -r.conj() * e(-ph.phi32)],
                [zero, r * e(ph.phi32), one],
            ]
        }
        3 => {
            let r = refl.r1(real_arg(k, 2));
            [
                [one - r.norm_sqr(), zero, r.conj() * e(-ph.phi31)],
                [zero, one, zero],
                [-r * e(ph.phi31), zero, one],
            ]
        }
        4 => {
            let r = refl.r2(real_arg(k, 0));
            [
                [one - r.norm_sqr(), -r.conj() * e(-ph.phi21), zero],
                [r * e(ph.phi21), one, zero],
                [zero, zero, one],
            ]
        }
        5 => {
            let r = refl.r1(real_arg(k, 1));
            [
                [one, zero, zero],
                [zero, one, -r * e(-ph.phi32)],
                [zero, r.conj() * e(ph.phi32), one - r.norm_sqr()],
            ]
        }
        _ => {
            let r = refl.r2(real_arg(k, 2));
            [
                [one, zero, r * e(-ph.phi31)],
                [zero, one, zero],
                [-r.conj() * e(ph.phi31), zero, one - r.norm_sqr()],
            ]
        }
    };
    Ok(Complex3x3::new(m))
}
