//! First expansion coefficient of the parabolic-cylinder model problem.

use num_complex::Complex;

use crate::asymptotics::nu_of;
use crate::error::{Error, Result};
use crate::numkit::{gamma_polar, Complex3x3};
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossCoefficients<T> {
    pub q: Complex<T>,
    pub nu_q: T,
    pub beta12: Complex<T>,
    pub beta21: Complex<T>,
    /// Zero except for β₁₂ at (1,2) and β₂₁ at (2,1).
    pub m1x: Complex3x3<T>,
}

/// ν(q), β₁₂, β₂₁ and m₁ˣ(q) for 0 < |q| < 1.
///
/// Γ(−iν) is taken as the conjugate of Γ(iν) rather than evaluated again.
pub fn cross_coefficients<T: Real>(q: Complex<T>) -> Result<CrossCoefficients<T>> {
    let abs2 = q.norm_sqr();
    if !(abs2 < T::one()) {
        return Err(Error::Domain(format!("model problem needs |q| < 1, got {}", q.norm().as_f64())));
    }
    if abs2 == T::zero() {
        return Err(Error::Domain("model problem is degenerate at q = 0".into()));
    }
    let nu = nu_of(abs2)?;
    let (modulus, arg) = gamma_polar(nu)?;
    let gamma = Complex::from_polar(modulus, arg);
    let gamma_neg = gamma.conj();
    let root = T::TAU().sqrt();
    let pi = T::PI();
    let quarter = pi / T::lit(4.0);
    let beta12 = Complex::from_polar(root * (-T::lit(2.5) * pi * nu).exp(), -quarter) / (q.conj() * gamma_neg);
    let beta21 = Complex::from_polar(root * (T::lit(1.5) * pi * nu).exp(), quarter) / (q * gamma);
    let mut m1x = Complex3x3::zero();
    m1x.m[0][1] = beta12;
    m1x.m[1][0] = beta21;
    Ok(CrossCoefficients {
        q,
        nu_q: nu,
        beta12,
        beta21,
        m1x,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::gamma::wrap_angle;
    use std::f64::consts::{PI, TAU};

    type C = Complex<f64>;

    /// Γ(z) from Stirling's series after shifting Re z up by 40; shares no
    /// code with the Lanczos path.
    fn stirling_gamma(z: C) -> C {
        let mut log_prod = C::new(0.0, 0.0);
        let mut w = z;
        for _ in 0..40 {
            log_prod += w.ln();
            w += 1.0;
        }
        let w2 = w * w;
        let series = 1.0 / (12.0 * w) - 1.0 / (360.0 * w * w2) + 1.0 / (1260.0 * w * w2 * w2)
            - 1.0 / (1680.0 * w * w2 * w2 * w2);
        ((w - 0.5) * w.ln() - w + 0.5 * TAU.ln() + series - log_prod).exp()
    }

    fn oracle_product(q: C) -> f64 {
        // β's from the printed formulas with both Γ values evaluated directly
        let nu = -(1.0 - q.norm_sqr()).ln() / TAU;
        let g_plus = stirling_gamma(C::new(0.0, nu));
        let g_minus = stirling_gamma(C::new(0.0, -nu));
        let b12 = TAU.sqrt() * C::from_polar(1.0, -PI / 4.0) * (-2.5 * PI * nu).exp() / (q.conj() * g_minus);
        let b21 = TAU.sqrt() * C::from_polar(1.0, PI / 4.0) * (1.5 * PI * nu).exp() / (q * g_plus);
        let p = b12 * b21;
        assert!(p.im.abs() < 1e-12 * p.re.abs());
        // the closed form: 2π e^{−πν}/(|q|²|Γ(iν)|²) with |Γ(iν)|² = π/(ν sinh πν)
        let closed = TAU * (-PI * nu).exp() * nu * (PI * nu).sinh() / (PI * q.norm_sqr());
        assert!((closed - nu).abs() < 1e-12 * nu);
        p.re
    }

    #[test]
    fn product_identity() {
        for m in [0.1, 0.5, 0.9] {
            for th in [0.0, 1.0, -2.5] {
                let q = C::from_polar(m, th);
                let c = cross_coefficients(q).unwrap();
                let prod = c.beta12 * c.beta21;
                assert!((prod - c.nu_q).norm() < 1e-10 * c.nu_q.max(1e-3), "|q|={m}: {prod}");
                assert!((oracle_product(q) - c.nu_q).abs() < 1e-10 * c.nu_q);
            }
        }
    }

    #[test]
    fn nu_example_and_small_q() {
        let c = cross_coefficients(C::new(0.5, 0.0)).unwrap();
        assert!((c.nu_q + 0.75f64.ln() / TAU).abs() < 1e-15);
        for m in [1e-2, 1e-3] {
            let c = cross_coefficients(C::new(0.0, m)).unwrap();
            assert!((c.nu_q / (m * m / TAU) - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn sparsity_and_phase() {
        let q = C::from_polar(0.7, 0.4);
        let c = cross_coefficients(q).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                if (i, j) != (0, 1) && (i, j) != (1, 0) {
                    assert_eq!(c.m1x.m[i][j], C::new(0.0, 0.0));
                }
            }
        }
        let (_, gamma_arg) = gamma_polar(c.nu_q).unwrap();
        let d = wrap_angle(c.beta21.arg() - (PI / 4.0 - q.arg() - gamma_arg));
        assert!(d.abs() < 1e-12, "{d}");
        // modulus self-consistency against direct evaluation of the formulas
        let g = stirling_gamma(C::new(0.0, c.nu_q));
        let want12 = TAU.sqrt() * (-2.5 * PI * c.nu_q).exp() / (q.norm() * g.norm());
        assert!((c.beta12.norm() - want12).abs() < 1e-12 * want12);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(cross_coefficients(C::new(1.0, 0.0)), Err(Error::Domain(_))));
        assert!(matches!(cross_coefficients(C::new(0.0, 0.0)), Err(Error::Domain(_))));
    }
}
