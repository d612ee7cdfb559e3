//! The reflection coefficient r₁ sampled on a k-grid, and ζ₀.

use std::io::{self, Write};

use num_complex::Complex;
use rayon::prelude::*;

use super::{Reflection, Scatterer, Which};
use crate::error::{Error, Result};
use crate::lax::omega;
use crate::numkit::interp::{derivative_4th, extrapolate_to_zero, piecewise_cubic};
use crate::Real;

/// r₁ on a strictly increasing positive grid, with |r₁|² and
/// ℓ′ = d/dk ln(1 − |r₁|²).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralLine<T> {
    pub k_grid: Vec<T>,
    pub r1: Vec<Complex<T>>,
    pub abs2: Vec<T>,
    pub ell_prime: Vec<T>,
    pub est_error: Vec<T>,
    /// Last node of the grid; integrals over [k₀, ∞) are truncated here.
    pub k_max: T,
}

/// `n` evenly spaced nodes from `start` to `end` inclusive.
pub fn uniform_grid<T: Real>(start: T, end: T, n: usize) -> Vec<T> {
    let n = n.max(2);
    let h = (end - start) / T::count(n - 1);
    (0..n).map(|i| start + h * T::count(i)).collect()
}

impl<T: Real> SpectralLine<T> {
    /// Builds a line from samples; ℓ′ = −(|r₁|²)′/(1 − |r₁|²) with the
    /// derivative taken by fourth-order finite differences on the grid.
    pub fn from_samples(k_grid: Vec<T>, r1: Vec<Complex<T>>, est_error: Vec<T>) -> Result<Self> {
        let n = k_grid.len();
        if n < 5 {
            return Err(Error::validation("k_grid", "needs at least five nodes"));
        }
        if r1.len() != n || est_error.len() != n {
            return Err(Error::validation("r1", "length differs from the grid"));
        }
        if k_grid.windows(2).any(|w| !(w[0] < w[1])) || !(k_grid[0] > T::zero()) {
            return Err(Error::validation("k_grid", "must be positive and strictly increasing"));
        }
        let abs2: Vec<T> = r1.iter().map(|r| r.norm_sqr()).collect();
        let d_abs2 = derivative_4th(&k_grid, &abs2);
        let ell_prime = d_abs2
            .iter()
            .zip(&abs2)
            .map(|(&d, &a)| if d == T::zero() { T::zero() } else { -d / (T::one() - a) })
            .collect();
        let k_max = k_grid[n - 1];
        Ok(SpectralLine {
            k_grid,
            r1,
            abs2,
            ell_prime,
            est_error,
            k_max,
        })
    }

    pub fn len(&self) -> usize {
        self.k_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k_grid.is_empty()
    }

    pub fn k_min(&self) -> T {
        self.k_grid[0]
    }

    fn check_inside(&self, k: T) -> Result<()> {
        if k < self.k_grid[0] || k > self.k_max {
            return Err(Error::Coverage(format!(
                "k = {} outside the sampled range [{}, {}]",
                k.as_f64(),
                self.k_grid[0].as_f64(),
                self.k_max.as_f64()
            )));
        }
        Ok(())
    }

    /// Cubic interpolation of r₁ (four nearest nodes).
    pub fn r1_at(&self, k: T) -> Result<Complex<T>> {
        self.check_inside(k)?;
        Ok(piecewise_cubic(&self.k_grid, &self.r1, k))
    }

    /// Cubic interpolation of ℓ′.
    pub fn ell_prime_at(&self, k: T) -> T {
        piecewise_cubic(&self.k_grid, &self.ell_prime, k)
    }

    /// Cubic interpolation of ln(1 − |r₁|²).
    pub fn log_gap_at(&self, k: T) -> T {
        let a: T = piecewise_cubic(&self.k_grid, &self.abs2, k);
        (T::one() - a).ln()
    }

    /// Quadratic extrapolation of r₁ from the first three nodes to k = 0,
    /// with its distance to ω.
    pub fn origin_extrapolation(&self) -> (Complex<T>, T) {
        let r0 = extrapolate_to_zero(&self.k_grid[..3], &self.r1[..3]);
        (r0, (r0 - omega::<T>()).norm())
    }

    /// `# schema=1` header, then `k,re_r1,im_r1,abs_r1,ell_prime,est_error`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "# schema=1")?;
        writeln!(w, "k,re_r1,im_r1,abs_r1,ell_prime,est_error")?;
        for i in 0..self.len() {
            writeln!(
                w,
                "{:e},{:e},{:e},{:e},{:e},{:e}",
                self.k_grid[i].as_f64(),
                self.r1[i].re.as_f64(),
                self.r1[i].im.as_f64(),
                self.abs2[i].sqrt().as_f64(),
                self.ell_prime[i].as_f64(),
                self.est_error[i].as_f64()
            )?;
        }
        Ok(())
    }
}

impl<T: Real> Scatterer<T> {
    /// r₁ at every node (in parallel), assembled in grid order.
    pub fn spectral_line(&self, k_grid: &[T]) -> Result<SpectralLine<T>> {
        if k_grid.first().is_some_and(|&k| k < self.config.k_min) {
            return Err(Error::validation("k_grid", "smallest node is below k_min"));
        }
        let samples: Vec<Reflection<T>> = k_grid
            .par_iter()
            .enumerate()
            .map(|(i, &k)| {
                self.reflection(k, Which::R1).map_err(|e| Error::Node {
                    index: i,
                    k: k.as_f64(),
                    source: Box::new(e),
                })
            })
            .collect::<Result<_>>()?;
        let line = SpectralLine::from_samples(
            k_grid.to_vec(),
            samples.iter().map(|s| s.value).collect(),
            samples.iter().map(|s| s.est_error).collect(),
        )?;
        let last = line.r1[line.len() - 1].norm();
        if !(last < self.config.r1_cutoff) {
            return Err(Error::GridTooShort {
                k_max: line.k_max.as_f64(),
                abs_r1: last.as_f64(),
            });
        }
        Ok(line)
    }
}

/// ζ₀ = 2·max{k ≥ 0 : |r₁(k)| = 1}, from sign changes of |r₁| − 1 on the
/// grid refined by bisection on the cubic interpolant; 0 when |r₁| < 1 on
/// the whole grid.
pub fn compute_zeta0<T: Real>(line: &SpectralLine<T>) -> Result<T> {
    let n = line.len();
    let abs: Vec<T> = line.abs2.iter().map(|a| a.sqrt()).collect();
    let f = |i: usize| abs[i] - T::one();
    if f(n - 1) >= T::zero() {
        return Err(Error::GridTooShort {
            k_max: line.k_max.as_f64(),
            abs_r1: abs[n - 1].as_f64(),
        });
    }
    let Some(i) = (0..n).rev().find(|&i| f(i) >= T::zero()) else {
        return Ok(T::zero());
    };
    if f(i) == T::zero() {
        return Ok(T::lit(2.0) * line.k_grid[i]);
    }
    let g = |k: T| -> T { piecewise_cubic::<T, T>(&line.k_grid, &abs, k) - T::one() };
    let (mut lo, mut hi) = (line.k_grid[i], line.k_grid[i + 1]);
    // the interpolant may cross more than once inside the cell; scan for the
    // last sign change first
    let sub = 64;
    let h = (hi - lo) / T::count(sub);
    for m in (0..sub).rev() {
        let a = lo + h * T::count(m);
        if g(a) >= T::zero() {
            hi = (a + h).min(hi);
            lo = a;
            break;
        }
    }
    while hi - lo > T::lit(1e-9) {
        let mid = T::lit(0.5) * (lo + hi);
        if g(mid) >= T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo + hi)
}
