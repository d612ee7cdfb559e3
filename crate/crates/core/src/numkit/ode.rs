//! Dormand–Prince 5(4) integrator for complex linear/nonlinear systems.

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::Real;

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions<T> {
    pub rtol: T,
    pub atol: T,
    pub max_steps: usize,
}

impl<T: Real> OdeOptions<T> {
    pub fn with_tol(tol: T) -> Self {
        OdeOptions {
            rtol: tol,
            atol: tol,
            max_steps: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
// fifth minus fourth order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn combo<T: Real>(out: &mut [Complex<T>], y: &[Complex<T>], h: T, terms: &[(f64, &[Complex<T>])]) {
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = Complex::zero();
        for (c, k) in terms {
            acc = acc + k[i] * T::lit(*c);
        }
        *o = y[i] + acc * h;
    }
}

/// Integrates `y' = rhs(x, y)` from `x0` to `x1` (either direction), in place.
///
/// `monitor` sees every accepted state and may abort with an error.
pub fn dopri5<T, F, M>(
    mut rhs: F,
    x0: T,
    x1: T,
    y: &mut [Complex<T>],
    opts: OdeOptions<T>,
    mut monitor: M,
) -> Result<OdeStats>
where
    T: Real,
    F: FnMut(T, &[Complex<T>], &mut [Complex<T>]),
    M: FnMut(T, &[Complex<T>]) -> Result<()>,
{
    let n = y.len();
    let mut stats = OdeStats::default();
    if x0 == x1 {
        return Ok(stats);
    }
    let dir = if x1 > x0 { T::one() } else { -T::one() };
    let span = (x1 - x0).abs();
    let zero = Complex::zero();
    let mut k = vec![vec![zero; n]; 7];
    let mut tmp = vec![zero; n];
    let mut y_new = vec![zero; n];

    let scale = |a: &Complex<T>, b: &Complex<T>| opts.atol + opts.rtol * a.norm().max(b.norm());

    rhs(x0, y, &mut k[0]);
    stats.evaluations += 1;
    let d0 = (y.iter().map(|v| v.norm_sqr()).sum::<T>() / T::count(n)).sqrt();
    let d1 = (k[0].iter().map(|v| v.norm_sqr()).sum::<T>() / T::count(n)).sqrt();
    let mut h = if d0 > T::lit(1e-5) && d1 > T::lit(1e-5) {
        T::lit(0.01) * d0 / d1
    } else {
        T::lit(1e-4) * span
    };
    h = h.min(span);

    let mut x = x0;
    let safety = T::lit(0.9);
    let fac_min = T::lit(0.2);
    let fac_max = T::lit(5.0);
    let mut last_rejected = false;
    loop {
        let remaining = (x1 - x) * dir;
        if remaining <= T::zero() {
            break;
        }
        if h >= remaining {
            h = remaining;
        }
        let h_min = T::lit(16.0) * T::epsilon() * x.abs().max(T::one());
        if h < h_min {
            return Err(Error::Stiffness { x: x.as_f64(), h: h.as_f64() });
        }
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::Stiffness { x: x.as_f64(), h: h.as_f64() });
        }
        let hs = h * dir;
        let (k1, rest) = k.split_at_mut(1);
        let k1 = &k1[0];
        {
            let (k2, rest) = rest.split_at_mut(1);
            combo(&mut tmp, y, hs, &[(A21, k1)]);
            rhs(x + hs * T::lit(C2), &tmp, &mut k2[0]);
            let (k3, rest) = rest.split_at_mut(1);
            combo(&mut tmp, y, hs, &[(A31, k1), (A32, &k2[0])]);
            rhs(x + hs * T::lit(C3), &tmp, &mut k3[0]);
            let (k4, rest) = rest.split_at_mut(1);
            combo(&mut tmp, y, hs, &[(A41, k1), (A42, &k2[0]), (A43, &k3[0])]);
            rhs(x + hs * T::lit(C4), &tmp, &mut k4[0]);
            let (k5, rest) = rest.split_at_mut(1);
            combo(&mut tmp, y, hs, &[(A51, k1), (A52, &k2[0]), (A53, &k3[0]), (A54, &k4[0])]);
            rhs(x + hs * T::lit(C5), &tmp, &mut k5[0]);
            let (k6, k7) = rest.split_at_mut(1);
            combo(
                &mut tmp,
                y,
                hs,
                &[(A61, k1), (A62, &k2[0]), (A63, &k3[0]), (A64, &k4[0]), (A65, &k5[0])],
            );
            rhs(x + hs, &tmp, &mut k6[0]);
            combo(
                &mut y_new,
                y,
                hs,
                &[(A71, k1), (A73, &k3[0]), (A74, &k4[0]), (A75, &k5[0]), (A76, &k6[0])],
            );
            rhs(x + hs, &y_new, &mut k7[0]);
            stats.evaluations += 6;
            let mut err = T::zero();
            for i in 0..n {
                let e = (k1[i] * T::lit(E1)
                    + k3[0][i] * T::lit(E3)
                    + k4[0][i] * T::lit(E4)
                    + k5[0][i] * T::lit(E5)
                    + k6[0][i] * T::lit(E6)
                    + k7[0][i] * T::lit(E7))
                    * hs;
                let r = e.norm() / scale(&y[i], &y_new[i]);
                err = err + r * r;
            }
            err = (err / T::count(n)).sqrt();
            if !err.is_finite() {
                return Err(Error::Instability {
                    x: x.as_f64(),
                    reason: "non-finite state in ODE step".into(),
                });
            }
            if err <= T::one() {
                // snap to the endpoint when only rounding-level distance is left
                let left = (x1 - (x + hs)) * dir;
                x = if left <= h_min { x1 } else { x + hs };
                y.copy_from_slice(&y_new);
                stats.accepted += 1;
                monitor(x, y)?;
                let mut fac = safety * err.max(T::lit(1e-10)).powf(T::lit(-0.2));
                if last_rejected {
                    fac = fac.min(T::one());
                }
                h = h * fac.max(fac_min).min(fac_max);
                last_rejected = false;
                // first-same-as-last
                let last = k7[0].clone();
                k[0].copy_from_slice(&last);
            } else {
                stats.rejected += 1;
                let fac = safety * err.powf(T::lit(-0.2));
                h = h * fac.max(fac_min);
                last_rejected = true;
            }
        }
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Complex<f64>;

    #[test]
    fn exponential_decay_backwards() {
        // y' = i y from x = 2 down to x = -3: y(-3) = e^{-5i}
        let mut y = [C::new(1.0, 0.0)];
        dopri5(
            |_, y, dy| dy[0] = C::new(0.0, 1.0) * y[0],
            2.0,
            -3.0,
            &mut y,
            OdeOptions::with_tol(1e-12),
            |_, _| Ok(()),
        )
        .unwrap();
        let exact = C::new(0.0, -5.0).exp();
        assert!((y[0] - exact).norm() < 1e-10);
    }

    #[test]
    fn harmonic_oscillator_energy() {
        let mut y = [C::new(1.0, 0.0), C::new(0.0, 0.0)];
        let stats = dopri5(
            |_, y, dy| {
                dy[0] = y[1];
                dy[1] = -y[0];
            },
            0.0,
            10.0,
            &mut y,
            OdeOptions::with_tol(1e-11),
            |_, _| Ok(()),
        )
        .unwrap();
        assert!((y[0].re - 10.0f64.cos()).abs() < 1e-9);
        assert!(stats.accepted > 10);
    }

    #[test]
    fn monitor_can_abort() {
        let mut y = [C::new(1.0, 0.0)];
        let r = dopri5(
            |_, y, dy| dy[0] = y[0] * 10.0,
            0.0,
            10.0,
            &mut y,
            OdeOptions::with_tol(1e-8),
            |x, y| {
                if y[0].norm() > 1e6 {
                    Err(Error::Instability { x, reason: "growth".into() })
                } else {
                    Ok(())
                }
            },
        );
        assert!(matches!(r, Err(Error::Instability { .. })));
    }

    #[test]
    fn step_budget_reports_stiffness() {
        let mut y = [C::new(1.0, 0.0)];
        let opts = OdeOptions { rtol: 1e-12, atol: 1e-12, max_steps: 5 };
        let r = dopri5(|x, _, dy| dy[0] = C::new(x.sin() * 100.0, 0.0), 0.0, 50.0, &mut y, opts, |_, _| Ok(()));
        assert!(matches!(r, Err(Error::Stiffness { .. })));
    }
}
