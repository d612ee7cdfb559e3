//! Finite-difference weights and local polynomial interpolation on
//! arbitrary (strictly increasing) grids.

use crate::Real;

/// Fornberg's weights for the `order`-th derivative at `x0` from `nodes`.
pub fn fd_weights<T: Real>(x0: T, nodes: &[T], order: usize) -> Vec<T> {
    let n = nodes.len();
    let m = order;
    // c[j][k]: weight of node j for derivative k
    let mut c = vec![vec![T::zero(); m + 1]; n];
    let mut c1 = T::one();
    let mut c4 = nodes[0] - x0;
    c[0][0] = T::one();
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = T::one();
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 = c2 * c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (T::count(k) * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - T::count(k) * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[m]).collect()
}

/// Index of the first node of a `width`-point stencil around `i`, clamped
/// to the grid.
pub fn stencil_start(i: usize, width: usize, len: usize) -> usize {
    let half = width / 2;
    i.saturating_sub(half).min(len.saturating_sub(width))
}

/// First derivative at every node, 5-point (fourth order) stencils,
/// centred in the interior and one-sided at the ends.
pub fn derivative_4th<T: Real>(x: &[T], y: &[T]) -> Vec<T> {
    let n = x.len();
    if n < 5 {
        return vec![T::nan(); n];
    }
    (0..n)
        .map(|i| {
            let s = stencil_start(i, 5, n);
            let w = fd_weights(x[i], &x[s..s + 5], 1);
            w.iter().zip(&y[s..s + 5]).map(|(&wi, &yi)| wi * yi).sum()
        })
        .collect()
}

/// Lagrange interpolation through `(xs, ys)` evaluated at `x`.
pub fn lagrange<T, V>(xs: &[T], ys: &[V], x: T) -> V
where
    T: Real,
    V: Copy + std::ops::Add<Output = V> + std::ops::Mul<T, Output = V>,
{
    let mut acc: Option<V> = None;
    for (j, &yj) in ys.iter().enumerate() {
        let mut l = T::one();
        for (m, &xm) in xs.iter().enumerate() {
            if m != j {
                l = l * (x - xm) / (xs[j] - xm);
            }
        }
        let term = yj * l;
        acc = Some(match acc {
            Some(a) => a + term,
            None => term,
        });
    }
    acc.expect("at least one node")
}

/// Locates the grid interval `[x[i], x[i+1]]` containing `t`, clamped.
pub fn interval_index<T: Real>(x: &[T], t: T) -> usize {
    let n = x.len();
    if n < 2 || t <= x[0] {
        return 0;
    }
    if t >= x[n - 1] {
        return n - 2;
    }
    let mut lo = 0;
    let mut hi = n - 1;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if x[mid] <= t {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Piecewise cubic interpolation: on `[x[i], x[i+1]]` the cubic through
/// nodes `i-1..=i+2` (clamped at the ends), so breakpoints sit exactly on
/// the grid nodes.
pub fn piecewise_cubic<T, V>(x: &[T], y: &[V], t: T) -> V
where
    T: Real,
    V: Copy + std::ops::Add<Output = V> + std::ops::Mul<T, Output = V>,
{
    let n = x.len();
    if n < 4 {
        return lagrange(x, y, t);
    }
    let i = interval_index(x, t);
    let s = i.saturating_sub(1).min(n - 4);
    lagrange(&x[s..s + 4], &y[s..s + 4], t)
}

/// Polynomial extrapolation of samples `(h_i, v_i)` to `h = 0` (Neville).
pub fn extrapolate_to_zero<T, V>(h: &[T], v: &[V]) -> V
where
    T: Real,
    V: Copy + std::ops::Add<Output = V> + std::ops::Mul<T, Output = V>,
{
    lagrange(h, v, T::zero())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centred_five_point_weights() {
        let nodes: [f64; 5] = [-2.0, -1.0, 0.0, 1.0, 2.0];
        let w = fd_weights(0.0, &nodes, 1);
        let expect = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];
        for (a, b) in w.iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn derivative_exact_on_quartics_nonuniform() {
        let x: Vec<f64> = (0..12).map(|i| (i as f64 * 0.3).powf(1.3) + 0.1).collect();
        let y: Vec<f64> = x.iter().map(|&t| 2.0 * t.powi(4) - t.powi(3) + 0.5 * t - 1.0).collect();
        let d = derivative_4th(&x, &y);
        for (&t, &di) in x.iter().zip(&d) {
            let exact = 8.0 * t.powi(3) - 3.0 * t * t + 0.5;
            assert!((di - exact).abs() < 1e-8 * exact.abs().max(1.0));
        }
    }

    #[test]
    fn fourth_order_convergence() {
        let err = |h: f64| {
            let x: Vec<f64> = (0..40).map(|i| 0.2 + i as f64 * h).collect();
            let y: Vec<f64> = x.iter().map(|t| t.sin()).collect();
            let d = derivative_4th(&x, &y);
            (10..30).map(|i| (d[i] - x[i].cos()).abs()).fold(0.0, f64::max)
        };
        let ratio = err(0.02) / err(0.01);
        assert!(ratio > 12.0 && ratio < 20.0, "ratio {ratio}");
    }

    #[test]
    fn piecewise_cubic_reproduces_cubics() {
        let x: Vec<f64> = (0..10).map(|i| i as f64 * 0.5).collect();
        let f = |t: f64| t * t * t - 2.0 * t + 1.0;
        let y: Vec<f64> = x.iter().map(|&t| f(t)).collect();
        for &t in &[0.0, 0.1, 1.26, 3.9, 4.5] {
            assert!((piecewise_cubic(&x, &y, t) - f(t)).abs() < 1e-12);
        }
    }

    #[test]
    fn extrapolation_removes_linear_and_quadratic_terms() {
        let h = [4e-3, 2e-3, 1e-3];
        let v: Vec<f64> = h.iter().map(|&t| 1.5 + 3.0 * t - 7.0 * t * t).collect();
        assert!((extrapolate_to_zero(&h, &v) - 1.5).abs() < 1e-13);
    }
}
