//! Independent reference for s and sᴬ: fixed-point (Picard) iteration of
//! the Volterra integral equations on a uniform grid, cumulative trapezoid
//! sums, Richardson extrapolation over two grid spacings.
//!
//! Shares nothing with the ODE path except the profile: P is built from its
//! definition and inverted numerically.

use num_complex::Complex;

use crate::lax::omega;
use crate::numkit::Complex3x3;
use crate::profiles::Profile;

type C = Complex<f64>;

fn p_matrix(k: C) -> Complex3x3<f64> {
    let w = omega::<f64>();
    let w2 = w * w;
    let one = C::new(1.0, 0.0);
    Complex3x3::new([[w, w2, one], [w2 * k, w * k, k], [k * k, k * k, k * k]])
}

fn potential(profile: &Profile<f64>, x: f64, p: &Complex3x3<f64>, p_inv: &Complex3x3<f64>) -> Complex3x3<f64> {
    let s = profile.eval(x);
    let mut m = Complex3x3::zero();
    m.m[2][0] = C::new(-s.v0 - s.u0x, 0.0);
    m.m[2][1] = C::new(-2.0 * s.u0, 0.0);
    *p_inv * m * *p
}

/// One discretisation level; returns s (or sᴬ).
fn solve(profile: &Profile<f64>, k: C, half_width: f64, n: usize, adjoint: bool) -> Complex3x3<f64> {
    let p = p_matrix(k);
    let p_inv = p.inverse().expect("k != 0");
    let w = omega::<f64>();
    let l = [w * k, w * w * k, k];
    let h = 2.0 * half_width / n as f64;
    let xs: Vec<f64> = (0..=n).map(|m| -half_width + h * m as f64).collect();
    let kernel: Vec<Complex3x3<f64>> = xs
        .iter()
        .map(|&x| {
            let u = potential(profile, x, &p, &p_inv);
            if adjoint {
                u.transpose()
            } else {
                u
            }
        })
        .collect();
    let sign = if adjoint { 1.0 } else { -1.0 };
    let mut xm = vec![Complex3x3::<f64>::identity(); n + 1];
    let mut s = Complex3x3::<f64>::identity();
    for _iter in 0..200 {
        let y: Vec<Complex3x3<f64>> = kernel.iter().zip(&xm).map(|(u, x)| *u * *x).collect();
        let mut next = vec![Complex3x3::<f64>::identity(); n + 1];
        let mut s_next = Complex3x3::<f64>::identity();
        for i in 0..3 {
            for j in 0..3 {
                // direct: X_ij(x) = δ − e^{x d} ∫_x^∞ e^{−x' d} Y_ij
                // adjoint: X_ij(x) = δ + e^{−x d} ∫_x^∞ e^{x' d} Y_ij
                let d = (l[i] - l[j]) * (-sign);
                let g: Vec<C> = xs.iter().zip(&y).map(|(&x, ym)| (-x * d).exp() * ym.m[i][j]).collect();
                let delta = if i == j { 1.0 } else { 0.0 };
                let mut cum = C::new(0.0, 0.0);
                next[n].m[i][j] = C::new(delta, 0.0);
                for m in (0..n).rev() {
                    cum += (g[m] + g[m + 1]) * (0.5 * h);
                    next[m].m[i][j] = C::new(delta, 0.0) + (xs[m] * d).exp() * cum * sign;
                }
                s_next.m[i][j] = C::new(delta, 0.0) + cum * sign;
            }
        }
        let change = next
            .iter()
            .zip(&xm)
            .map(|(a, b)| (*a - *b).max_abs())
            .fold(0.0, f64::max);
        let scale = next.iter().map(|a| a.max_abs()).fold(1.0, f64::max);
        xm = next;
        s = s_next;
        if change < 1e-15 * scale {
            break;
        }
    }
    s
}

/// s(k) (or sᴬ(k)) from Picard iteration, Richardson-extrapolated from grids
/// of `n` and `2n` intervals on [−half_width, half_width].
pub fn picard_s(profile: &Profile<f64>, k: C, half_width: f64, n: usize, adjoint: bool) -> Complex3x3<f64> {
    let coarse = solve(profile, k, half_width, n, adjoint);
    let fine = solve(profile, k, half_width, 2 * n, adjoint);
    (fine.scale(C::new(4.0, 0.0)) - coarse).scale(C::new(1.0 / 3.0, 0.0))
}
