//! Fourier pseudo-spectral reference solver for
//! u_t = v_x, v_t + u_xxx/3 + (4/3)(u²)_x = 0 on the periodic box [−L, L).
//!
//! The linear block is propagated exactly per wavenumber and the quadratic
//! term is advanced by integrating-factor (Lawson) RK4.

use std::io::{self, Write};
use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftNum, FftPlanner};

use crate::error::{Error, Result};
use crate::profiles::{effective_support, Profile};
use crate::Real;

/// Scalars the spectral solver runs in.
pub trait SpectralReal: Real + FftNum {}
impl<T: Real + FftNum> SpectralReal for T {}

/// Real fields on N equispaced points of [−L, L) at time t.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveField<T> {
    pub half_length: T,
    pub n: usize,
    pub t: T,
    pub u: Vec<T>,
    pub v: Vec<T>,
}

impl<T: Real> WaveField<T> {
    pub fn zero(half_length: T, n: usize) -> Self {
        WaveField {
            half_length,
            n,
            t: T::zero(),
            u: vec![T::zero(); n],
            v: vec![T::zero(); n],
        }
    }

    /// Samples (u₀, v₀) on the grid.
    pub fn from_profile(p: &Profile<T>, half_length: T, n: usize) -> Self {
        let mut f = Self::zero(half_length, n);
        for j in 0..n {
            let s = p.eval(f.x(j));
            f.u[j] = s.u0;
            f.v[j] = s.v0;
        }
        f
    }

    pub fn dx(&self) -> T {
        T::lit(2.0) * self.half_length / T::count(self.n)
    }

    pub fn x(&self, j: usize) -> T {
        -self.half_length + self.dx() * T::count(j)
    }

    /// (∫u dx, ∫v dx) by the trapezoid rule, exact for the periodic
    /// trigonometric interpolant.
    pub fn masses(&self) -> (T, T) {
        let dx = self.dx();
        (self.u.iter().copied().sum::<T>() * dx, self.v.iter().copied().sum::<T>() * dx)
    }

    /// Trigonometric interpolant of (u, v) at an arbitrary x, in barycentric
    /// form for an even number of periodic nodes.
    pub fn sample(&self, x: T) -> (T, T) {
        let period = T::lit(2.0) * self.half_length;
        let shifted = x + self.half_length;
        let wrapped = shifted - period * (shifted / period).floor();
        let scale = T::PI() / period;
        let (mut num_u, mut num_v, mut den) = (T::zero(), T::zero(), T::zero());
        for j in 0..self.n {
            let d = wrapped - self.dx() * T::count(j);
            if d == T::zero() {
                return (self.u[j], self.v[j]);
            }
            let c = T::one() / (d * scale).tan();
            let w = if j % 2 == 0 { c } else { -c };
            num_u = num_u + w * self.u[j];
            num_v = num_v + w * self.v[j];
            den = den + w;
        }
        (num_u / den, num_v / den)
    }

    /// `# schema=1`, then `x,u,v` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "# schema=1")?;
        writeln!(w, "x,u,v")?;
        for j in 0..self.n {
            writeln!(
                w,
                "{:e},{:e},{:e}",
                self.x(j).as_f64(),
                self.u[j].as_f64(),
                self.v[j].as_f64()
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig<T> {
    pub half_length: T,
    pub n: usize,
    /// Fixed step; `None` uses the largest step the CFL bound allows.
    pub dt: Option<T>,
    pub c_cfl: T,
    pub t_end: T,
    pub dealias: bool,
    /// Times at which fields are kept; `t_end` is always included.
    pub sample_times: Vec<T>,
    /// Largest |x| that will be sampled, for the wrap-around check.
    pub x_observation: T,
    /// Spectral level, relative to the maximum of |û₀|, below which modes
    /// are ignored when bounding the group speed.
    pub significance: T,
    /// Turn the wrap-around check into an advisory note.
    pub allow_small_domain: bool,
}

impl<T: Real> SolverConfig<T> {
    pub fn new(half_length: T, n: usize, t_end: T) -> Self {
        SolverConfig {
            half_length,
            n,
            dt: None,
            c_cfl: T::lit(0.5),
            t_end,
            dealias: true,
            sample_times: Vec::new(),
            x_observation: T::zero(),
            significance: T::lit(1e-3),
            allow_small_domain: false,
        }
    }

    /// c_CFL·(L/N)²·√3.
    pub fn max_dt(&self) -> T {
        let h = self.half_length / T::count(self.n);
        self.c_cfl * h * h * T::lit(3.0).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 16 || !self.n.is_power_of_two() {
            return Err(Error::validation("n", "must be a power of two, at least 16"));
        }
        if !(self.half_length > T::zero()) || !self.half_length.is_finite() {
            return Err(Error::validation("half_length", "must be positive"));
        }
        if !(self.c_cfl > T::zero()) {
            return Err(Error::validation("c_cfl", "must be positive"));
        }
        if !(self.t_end > T::zero()) || !self.t_end.is_finite() {
            return Err(Error::validation("t_end", "must be positive"));
        }
        if let Some(dt) = self.dt {
            if !(dt > T::zero()) || dt > self.max_dt() {
                return Err(Error::validation(
                    "dt",
                    format!("must lie in (0, {}]", self.max_dt().as_f64()),
                ));
            }
        }
        if self.sample_times.iter().any(|&t| !(t > T::zero()) || t > self.t_end) {
            return Err(Error::validation("sample_times", "must lie in (0, t_end]"));
        }
        Ok(())
    }

    fn step_cap(&self) -> T {
        self.dt.unwrap_or_else(|| self.max_dt())
    }
}

/// Spectral-tail check at one sample time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolutionGate<T> {
    pub t: T,
    /// Largest |û| in the band just below the dealiasing cutoff, relative to
    /// the largest |û|.
    pub tail_ratio: T,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservationRecord<T> {
    pub t: T,
    pub mass_u: T,
    pub mass_v: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PdeRun<T> {
    pub fields: Vec<WaveField<T>>,
    pub conservation: Vec<ConservationRecord<T>>,
    pub resolution: Vec<ResolutionGate<T>>,
    pub steps: usize,
    /// Half-length the wrap-around estimate asked for.
    pub required_half_length: T,
    pub notes: Vec<String>,
}

const RESOLUTION_LEVEL: f64 = 1e-12;
const IMAG_RESIDUE: f64 = 1e-10;

/// FFT plans, wavenumbers and the dealiasing mask for one grid.
pub struct Spectral<T: SpectralReal> {
    n: usize,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
    xi: Vec<T>,
    mask: Vec<bool>,
    scratch: Vec<Complex<T>>,
    cached: Option<(T, Propagator<T>, Propagator<T>)>,
}

/// Exact linear propagator over one time span, per mode:
/// [[cos θ, (i√3/ξ) sin θ], [(iξ/√3) sin θ, cos θ]], θ = ξ²τ/√3.
#[derive(Clone)]
struct Propagator<T> {
    c: Vec<T>,
    uv: Vec<Complex<T>>,
    vu: Vec<Complex<T>>,
}

impl<T: SpectralReal> Propagator<T> {
    fn new(xi: &[T], tau: T) -> Self {
        let r3 = T::lit(3.0).sqrt();
        let mut c = Vec::with_capacity(xi.len());
        let mut uv = Vec::with_capacity(xi.len());
        let mut vu = Vec::with_capacity(xi.len());
        for &x in xi {
            if x == T::zero() {
                c.push(T::one());
                uv.push(Complex::new(T::zero(), T::zero()));
                vu.push(Complex::new(T::zero(), T::zero()));
                continue;
            }
            let theta = x * x * tau / r3;
            let (s, co) = theta.sin_cos();
            c.push(co);
            uv.push(Complex::new(T::zero(), r3 / x * s));
            vu.push(Complex::new(T::zero(), x / r3 * s));
        }
        Propagator { c, uv, vu }
    }

    fn apply(&self, u: &mut [Complex<T>], v: &mut [Complex<T>]) {
        for m in 0..u.len() {
            let (a, b) = (u[m], v[m]);
            u[m] = a * self.c[m] + self.uv[m] * b;
            v[m] = self.vu[m] * a + b * self.c[m];
        }
    }
}

impl<T: SpectralReal> Spectral<T> {
    pub fn new(half_length: T, n: usize, dealias: bool) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let half = n as i64 / 2;
        let mut xi = Vec::with_capacity(n);
        let mut mask = Vec::with_capacity(n);
        for j in 0..n as i64 {
            let m = if j < half { j } else { j - n as i64 };
            xi.push(T::PI() * T::lit(m as f64) / half_length);
            mask.push(!dealias || 3 * m.abs() < n as i64);
        }
        Spectral {
            scratch: vec![
                Complex::new(T::zero(), T::zero());
                forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len())
            ],
            n,
            forward,
            inverse,
            xi,
            mask,
            cached: None,
        }
    }

    pub fn wavenumbers(&self) -> &[T] {
        &self.xi
    }

    fn to_spectral(&mut self, f: &[T]) -> Vec<Complex<T>> {
        let mut buf: Vec<Complex<T>> = f.iter().map(|&x| Complex::new(x, T::zero())).collect();
        self.forward.process_with_scratch(&mut buf, &mut self.scratch);
        buf
    }

    /// Inverse transform; also returns the largest imaginary residue
    /// relative to the largest real value.
    fn to_physical(&mut self, fh: &[Complex<T>]) -> (Vec<T>, T) {
        let mut buf = fh.to_vec();
        self.inverse.process_with_scratch(&mut buf, &mut self.scratch);
        let scale = T::one() / T::count(self.n);
        let re_max = buf.iter().map(|c| c.re.abs()).fold(T::zero(), T::max) * scale;
        let im_max = buf.iter().map(|c| c.im.abs()).fold(T::zero(), T::max) * scale;
        let rel = if re_max > T::zero() { im_max / re_max } else { im_max };
        (buf.iter().map(|c| c.re * scale).collect(), rel)
    }

    /// −(4/3)·iξ·(u²)^, dealiased.
    fn nonlinear(&mut self, uh: &[Complex<T>], out: &mut [Complex<T>]) {
        let mut buf = uh.to_vec();
        self.inverse.process_with_scratch(&mut buf, &mut self.scratch);
        let scale = T::one() / T::count(self.n);
        for c in buf.iter_mut() {
            let u = c.re * scale;
            *c = Complex::new(u * u, T::zero());
        }
        self.forward.process_with_scratch(&mut buf, &mut self.scratch);
        let k = T::lit(-4.0 / 3.0);
        for m in 0..self.n {
            out[m] = if self.mask[m] {
                buf[m] * Complex::new(T::zero(), k * self.xi[m])
            } else {
                Complex::new(T::zero(), T::zero())
            };
        }
    }

    /// Full- and half-step propagators for `dt`, rebuilt only when the step
    /// changes. Taken out of the cache while a step runs.
    fn take_propagators(&mut self, dt: T) -> (T, Propagator<T>, Propagator<T>) {
        match self.cached.take() {
            Some(c) if c.0 == dt => c,
            _ => (dt, Propagator::new(&self.xi, dt), Propagator::new(&self.xi, dt * T::lit(0.5))),
        }
    }

    /// One Lawson RK4 step of (û, v̂).
    fn step(&mut self, uh: &mut Vec<Complex<T>>, vh: &mut Vec<Complex<T>>, dt: T) {
        let n = self.n;
        let props = self.take_propagators(dt);
        let (full, half) = (&props.1, &props.2);
        let zero = Complex::new(T::zero(), T::zero());
        let h2 = dt * T::lit(0.5);
        // stage derivatives only have a v component before propagation
        let mut k1 = vec![zero; n];
        self.nonlinear(uh, &mut k1);

        let mut au = uh.clone();
        let mut av: Vec<Complex<T>> = vh.iter().zip(&k1).map(|(&v, &k)| v + k * h2).collect();
        half.apply(&mut au, &mut av);
        let mut k2 = vec![zero; n];
        self.nonlinear(&au, &mut k2);

        let mut eu = uh.clone();
        let mut ev = vh.clone();
        half.apply(&mut eu, &mut ev);
        // the third stage only needs its u component, which k2 leaves alone
        let mut k3 = vec![zero; n];
        self.nonlinear(&eu, &mut k3);

        // E(h)y and E(h/2)k3 propagated again by E(h/2)
        let mut cu = eu.clone();
        let mut cv: Vec<Complex<T>> = ev.iter().zip(&k3).map(|(&v, &k)| v + k * dt).collect();
        half.apply(&mut cu, &mut cv);
        let mut k4 = vec![zero; n];
        self.nonlinear(&cu, &mut k4);

        // y⁺ = E(h)y + h/6 [E(h)k1 + 2E(h/2)(k2 + k3) + k4]
        let sixth = dt / T::lit(6.0);
        let mut p1u = vec![zero; n];
        let mut p1v = k1;
        full.apply(&mut p1u, &mut p1v);
        let mut p23u = vec![zero; n];
        let mut p23v: Vec<Complex<T>> = k2.iter().zip(&k3).map(|(&a, &b)| a + b).collect();
        half.apply(&mut p23u, &mut p23v);
        full.apply(uh, vh);
        let two = T::lit(2.0);
        for m in 0..n {
            uh[m] = uh[m] + (p1u[m] + p23u[m] * two) * sixth;
            vh[m] = vh[m] + (p1v[m] + p23v[m] * two + k4[m]) * sixth;
        }
        self.cached = Some(props);
    }

    fn resolution(&self, t: T, uh: &[Complex<T>]) -> ResolutionGate<T> {
        let n = self.n as i64;
        let cutoff = if self.mask.iter().all(|&b| b) { n / 2 } else { n / 3 };
        let band_start = cutoff * 4 / 5;
        let mut peak = T::zero();
        let mut tail = T::zero();
        for (j, c) in uh.iter().enumerate() {
            let m = if (j as i64) < n / 2 { j as i64 } else { j as i64 - n };
            let a = c.norm();
            peak = peak.max(a);
            if m.abs() >= band_start && m.abs() <= cutoff {
                tail = tail.max(a);
            }
        }
        let ratio = if peak > T::zero() { tail / peak } else { T::zero() };
        ResolutionGate {
            t,
            tail_ratio: ratio,
            pass: ratio <= T::lit(RESOLUTION_LEVEL),
        }
    }
}

/// Exact solution of the linearized system over time `tau`.
pub fn propagate_linear<T: SpectralReal>(state: &WaveField<T>, tau: T) -> WaveField<T> {
    let mut sp = Spectral::new(state.half_length, state.n, false);
    let mut uh = sp.to_spectral(&state.u);
    let mut vh = sp.to_spectral(&state.v);
    Propagator::new(&sp.xi, tau).apply(&mut uh, &mut vh);
    WaveField {
        half_length: state.half_length,
        n: state.n,
        t: state.t + tau,
        u: sp.to_physical(&uh).0,
        v: sp.to_physical(&vh).0,
    }
}

/// One integrating-factor RK4 step.
pub fn pde_step<T: SpectralReal>(state: &WaveField<T>, dt: T, dealias: bool) -> Result<WaveField<T>> {
    let mut sp = Spectral::new(state.half_length, state.n, dealias);
    let mut uh = sp.to_spectral(&state.u);
    let mut vh = sp.to_spectral(&state.v);
    sp.step(&mut uh, &mut vh, dt);
    let t = state.t + dt;
    finish(&mut sp, &uh, &vh, state, t, 1)
}

fn finish<T: SpectralReal>(
    sp: &mut Spectral<T>,
    uh: &[Complex<T>],
    vh: &[Complex<T>],
    like: &WaveField<T>,
    t: T,
    step: usize,
) -> Result<WaveField<T>> {
    let (u, ru) = sp.to_physical(uh);
    let (v, rv) = sp.to_physical(vh);
    if u.iter().chain(&v).any(|x| !x.is_finite()) {
        return Err(Error::PdeStability {
            step,
            t: t.as_f64(),
            reason: "non-finite field".into(),
        });
    }
    if ru.max(rv) > T::lit(IMAG_RESIDUE) {
        return Err(Error::PdeStability {
            step,
            t: t.as_f64(),
            reason: format!("imaginary residue {:e} after inverse transform", ru.max(rv).as_f64()),
        });
    }
    Ok(WaveField {
        half_length: like.half_length,
        n: like.n,
        t,
        u,
        v,
    })
}

/// Half-length needed so that no part of the initial spectrum above the
/// significance level wraps around the periodic box and reaches
/// |x| ≤ x_observation before t_end. Group speed of mode ξ is 2|ξ|/√3.
pub fn required_half_length<T: SpectralReal>(p: &Profile<T>, config: &SolverConfig<T>) -> Result<T> {
    let field = WaveField::from_profile(p, config.half_length, config.n);
    let mut sp = Spectral::new(config.half_length, config.n, false);
    let uh = sp.to_spectral(&field.u);
    let vh = sp.to_spectral(&field.v);
    let peak = uh.iter().chain(&vh).map(|c| c.norm()).fold(T::zero(), T::max);
    let mut xi_sig = T::zero();
    if peak > T::zero() {
        for m in 0..config.n {
            if uh[m].norm().max(vh[m].norm()) >= config.significance * peak {
                xi_sig = xi_sig.max(sp.xi[m].abs());
            }
        }
    }
    let support = if p.is_zero() {
        T::zero()
    } else {
        effective_support(p, T::lit(crate::profiles::DEFAULT_SUPPORT_EPS))?
    };
    let v_max = T::lit(2.0) * xi_sig / T::lit(3.0).sqrt();
    Ok(T::lit(0.5) * (config.x_observation + support + v_max * config.t_end))
}

/// Runs from the profile to `t_end`, keeping fields at the sample times.
pub fn pde_run<T: SpectralReal>(p: &Profile<T>, config: &SolverConfig<T>) -> Result<PdeRun<T>> {
    config.validate()?;
    let mut notes = Vec::new();
    let required = required_half_length(p, config)?;
    if required > config.half_length {
        if config.allow_small_domain {
            notes.push(format!(
                "domain half-length {} is below the wrap-around estimate {}",
                config.half_length.as_f64(),
                required.as_f64()
            ));
        } else {
            return Err(Error::DomainTooSmall {
                required: required.as_f64(),
                available: config.half_length.as_f64(),
            });
        }
    }
    let mut times = config.sample_times.clone();
    times.push(config.t_end);
    times.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    times.dedup();

    let start = WaveField::from_profile(p, config.half_length, config.n);
    let mut sp = Spectral::new(config.half_length, config.n, config.dealias);
    let mut uh = sp.to_spectral(&start.u);
    let mut vh = sp.to_spectral(&start.v);
    let (mu, mv) = start.masses();
    let mut run = PdeRun {
        fields: Vec::with_capacity(times.len()),
        conservation: vec![ConservationRecord {
            t: T::zero(),
            mass_u: mu,
            mass_v: mv,
        }],
        resolution: vec![sp.resolution(T::zero(), &uh)],
        steps: 0,
        required_half_length: required,
        notes,
    };
    let cap = config.step_cap();
    let mut t = T::zero();
    for &target in &times {
        let span = target - t;
        let count = (span / cap).ceil().to_usize().unwrap_or(1).max(1);
        let dt = span / T::count(count);
        for i in 0..count {
            sp.step(&mut uh, &mut vh, dt);
            run.steps += 1;
            if run.steps % 256 == 0 && !uh.iter().chain(vh.iter()).all(|c| c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::PdeStability {
                    step: run.steps,
                    t: (t + dt * T::count(i + 1)).as_f64(),
                    reason: "non-finite spectrum".into(),
                });
            }
        }
        t = target;
        let field = finish(&mut sp, &uh, &vh, &start, t, run.steps)?;
        let (mu, mv) = field.masses();
        run.conservation.push(ConservationRecord { t, mass_u: mu, mass_v: mv });
        run.resolution.push(sp.resolution(t, &uh));
        run.fields.push(field);
    }
    Ok(run)
}
