//! Initial data (u₀, v₀) as sums of closed-form analytic members.
//!
//! A profile is built from a JSON-shaped [`ProfileSpec`]. v₀ can either be
//! given directly or obtained from u₁ = u_t(x, 0) through
//! v₀(x) = ∫_{−∞}^x u₁, which requires ∫ u₁ = 0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Real;

/// Tolerance on |∫ u₁| for the zero-mean condition.
pub const ZERO_MEAN_TOL: f64 = 1e-10;
/// Default threshold for [`effective_support`].
pub const DEFAULT_SUPPORT_EPS: f64 = 1e-14;
/// Radius ladder: `LADDER_MIN · LADDER_RATIO^n` up to `LADDER_MAX`.
pub const LADDER_MIN: f64 = 1.0;
pub const LADDER_MAX: f64 = 1e3;
pub const LADDER_RATIO: f64 = 1.044_273_782_427_413_8; // 2^(1/16)

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Gaussian,
    SechSquared,
    GaussianDerivative,
    Zero,
}

impl Family {
    fn parse(name: &str) -> Option<Family> {
        match name {
            "gaussian" => Some(Family::Gaussian),
            "sech_squared" => Some(Family::SechSquared),
            "gaussian_derivative" => Some(Family::GaussianDerivative),
            "zero" => Some(Family::Zero),
            _ => None,
        }
    }
}

fn default_width() -> f64 {
    1.0
}

/// One member of a profile as written in the JSON description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberSpec {
    pub family: String,
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default = "default_width")]
    pub width: f64,
    #[serde(default)]
    pub center: f64,
}

impl MemberSpec {
    pub fn new(family: &str, amplitude: f64, width: f64, center: f64) -> Self {
        MemberSpec {
            family: family.to_string(),
            amplitude,
            width,
            center,
        }
    }

    pub fn zero() -> Self {
        Self::new("zero", 0.0, 1.0, 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum V0Spec {
    Members(Vec<MemberSpec>),
    FromU1 { from_u1: Vec<MemberSpec> },
}

impl Default for V0Spec {
    fn default() -> Self {
        V0Spec::Members(Vec::new())
    }
}

/// `{"u0": [...], "v0": [...] | {"from_u1": [...]}}`
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ProfileSpec {
    #[serde(default)]
    pub u0: Vec<MemberSpec>,
    #[serde(default)]
    pub v0: V0Spec,
}

impl ProfileSpec {
    pub fn zero() -> Self {
        ProfileSpec {
            u0: vec![MemberSpec::zero()],
            v0: V0Spec::Members(vec![MemberSpec::zero()]),
        }
    }

    /// u₀ = `amplitude·exp(−((x−center)/width)²)`, v₀ ≡ 0.
    pub fn gaussian_u0(amplitude: f64, width: f64, center: f64) -> Self {
        ProfileSpec {
            u0: vec![MemberSpec::new("gaussian", amplitude, width, center)],
            v0: V0Spec::Members(Vec::new()),
        }
    }
}

/// Evaluable shapes. The two `*Integral` shapes only arise from
/// [`v0_from_u1`]: they are antiderivatives from −∞ of a gaussian and a
/// sech² member.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Gaussian,
    SechSquared,
    GaussianDerivative,
    Zero,
    GaussianIntegral,
    SechSquaredIntegral,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Member<T> {
    pub shape: Shape,
    pub amplitude: T,
    pub width: T,
    pub center: T,
}

impl<T: Real> Member<T> {
    /// Value and x-derivative.
    pub fn eval(&self, x: T) -> (T, T) {
        let a = self.amplitude;
        let w = self.width;
        let xi = (x - self.center) / w;
        let two = T::lit(2.0);
        match self.shape {
            Shape::Zero => (T::zero(), T::zero()),
            Shape::Gaussian => {
                let g = a * (-xi * xi).exp();
                (g, -two * xi / w * g)
            }
            Shape::SechSquared => {
                let s = sech(xi);
                let s2 = a * s * s;
                (s2, -two * s2 * xi.tanh() / w)
            }
            Shape::GaussianDerivative => {
                let e = (-xi * xi).exp();
                let val = -two * a * xi / w * e;
                let der = -two * a / (w * w) * (T::one() - two * xi * xi) * e;
                (val, der)
            }
            Shape::GaussianIntegral => {
                let val = a * w * T::PI().sqrt() / two * erfc(-xi);
                (val, a * (-xi * xi).exp())
            }
            Shape::SechSquaredIntegral => {
                // a·w·(1 + tanh ξ), written to keep accuracy in the left tail
                let val = a * w * two / (T::one() + (-two * xi).exp());
                let s = sech(xi);
                (val, a * s * s)
            }
        }
    }

    /// ∫_ℝ of the member (finite only for the decaying shapes).
    fn integral(&self) -> T {
        let a = self.amplitude;
        let w = self.width;
        match self.shape {
            Shape::Gaussian => a * w * T::PI().sqrt(),
            Shape::SechSquared => T::lit(2.0) * a * w,
            Shape::GaussianDerivative | Shape::Zero => T::zero(),
            Shape::GaussianIntegral | Shape::SechSquaredIntegral => T::infinity(),
        }
    }
}

fn sech<T: Real>(x: T) -> T {
    let ax = x.abs();
    if ax > T::lit(300.0) {
        return T::zero();
    }
    let e = (-ax).exp();
    T::lit(2.0) * e / (T::one() + e * e)
}

/// Complementary error function, series for |x| < 2 and a Lentz continued
/// fraction beyond.
pub fn erfc<T: Real>(x: T) -> T {
    let two = T::lit(2.0);
    if x < T::zero() {
        return two - erfc(-x);
    }
    let sqrt_pi = T::PI().sqrt();
    if x < two {
        // erf x = 2/√π e^{−x²} Σ 2ⁿ x^{2n+1} / (1·3⋯(2n+1))
        let mut term = x;
        let mut sum = x;
        let x2 = x * x;
        let mut n = 0usize;
        while term > T::epsilon() * sum && n < 200 {
            n += 1;
            term = term * two * x2 / T::count(2 * n + 1);
            sum = sum + term;
        }
        return T::one() - two / sqrt_pi * (-x2).exp() * sum;
    }
    // erfc x = e^{−x²}/√π · 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    let tiny = T::min_positive_value() / T::epsilon();
    let mut f = x;
    let mut c = x;
    let mut d = T::zero();
    for n in 1..300 {
        let an = T::count(n) / two;
        d = x + an * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = x + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = T::one() / d;
        let delta = c * d;
        f = f * delta;
        if (delta - T::one()).abs() < T::epsilon() {
            break;
        }
    }
    (-x * x).exp() / (sqrt_pi * f)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecayClass<T> {
    SuperExponential,
    Exponential { rate: T },
}

/// u₀, u₀ₓ and v₀ at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSample<T> {
    pub u0: T,
    pub u0x: T,
    pub v0: T,
}

/// Immutable, evaluable initial data.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile<T> {
    pub u0: Vec<Member<T>>,
    pub v0: Vec<Member<T>>,
    pub decay: DecayClass<T>,
}

fn sum_members<T: Real>(members: &[Member<T>], x: T) -> (T, T) {
    members.iter().fold((T::zero(), T::zero()), |(v, d), m| {
        let (mv, md) = m.eval(x);
        (v + mv, d + md)
    })
}

impl<T: Real> Profile<T> {
    pub fn zero() -> Self {
        Profile {
            u0: Vec::new(),
            v0: Vec::new(),
            decay: DecayClass::SuperExponential,
        }
    }

    pub fn eval(&self, x: T) -> ProfileSample<T> {
        let (u0, u0x) = sum_members(&self.u0, x);
        let (v0, _) = sum_members(&self.v0, x);
        ProfileSample { u0, u0x, v0 }
    }

    pub fn u0(&self, x: T) -> T {
        sum_members(&self.u0, x).0
    }

    pub fn v0(&self, x: T) -> T {
        sum_members(&self.v0, x).0
    }

    /// True when every member is identically zero.
    pub fn is_zero(&self) -> bool {
        self.u0.iter().chain(&self.v0).all(|m| m.shape == Shape::Zero || m.amplitude == T::zero())
    }

    pub fn is_super_exponential(&self) -> bool {
        matches!(self.decay, DecayClass::SuperExponential)
    }

    /// Widest member width, used for domain sizing.
    pub fn max_width(&self) -> T {
        self.u0
            .iter()
            .chain(&self.v0)
            .filter(|m| m.shape != Shape::Zero)
            .map(|m| m.width)
            .fold(T::zero(), T::max)
    }

    /// Largest |center| over the members.
    pub fn max_center(&self) -> T {
        self.u0
            .iter()
            .chain(&self.v0)
            .filter(|m| m.shape != Shape::Zero)
            .map(|m| m.center.abs())
            .fold(T::zero(), T::max)
    }
}

fn parse_member<T: Real>(spec: &MemberSpec, path: &str) -> Result<Member<T>> {
    let family = Family::parse(&spec.family).ok_or_else(|| {
        Error::validation(&format!("{path}.family"), format!("unknown family `{}`", spec.family))
    })?;
    for (name, value) in [("amplitude", spec.amplitude), ("width", spec.width), ("center", spec.center)] {
        if !value.is_finite() {
            return Err(Error::validation(&format!("{path}.{name}"), "must be finite"));
        }
    }
    if family != Family::Zero && spec.width <= 0.0 {
        return Err(Error::validation(&format!("{path}.width"), "must be positive"));
    }
    let shape = match family {
        Family::Gaussian => Shape::Gaussian,
        Family::SechSquared => Shape::SechSquared,
        Family::GaussianDerivative => Shape::GaussianDerivative,
        Family::Zero => Shape::Zero,
    };
    Ok(Member {
        shape,
        amplitude: T::lit(spec.amplitude),
        width: T::lit(spec.width),
        center: T::lit(spec.center),
    })
}

fn parse_members<T: Real>(specs: &[MemberSpec], field: &str) -> Result<Vec<Member<T>>> {
    specs
        .iter()
        .enumerate()
        .map(|(i, s)| parse_member(s, &format!("{field}[{i}]")))
        .collect()
}

fn decay_of<T: Real>(members: &[Member<T>]) -> DecayClass<T> {
    let rate = members
        .iter()
        .filter(|m| matches!(m.shape, Shape::SechSquared | Shape::SechSquaredIntegral))
        .map(|m| T::lit(2.0) / m.width)
        .fold(None, |acc: Option<T>, r| Some(acc.map_or(r, |a| a.min(r))));
    match rate {
        Some(rate) => DecayClass::Exponential { rate },
        None => DecayClass::SuperExponential,
    }
}

/// Builds v₀(x) = ∫_{−∞}^x u₁ from the members of u₁, after checking
/// |∫_ℝ u₁| ≤ 1e−10.
pub fn v0_from_u1<T: Real>(u1: &[MemberSpec]) -> Result<Vec<Member<T>>> {
    let members = parse_members::<T>(u1, "v0.from_u1")?;
    let integral: T = members.iter().map(|m| m.integral()).sum();
    if integral.abs() > T::lit(ZERO_MEAN_TOL) {
        return Err(Error::ZeroMeanViolation {
            integral: integral.as_f64(),
        });
    }
    Ok(members
        .into_iter()
        .map(|m| {
            let shape = match m.shape {
                Shape::Gaussian => Shape::GaussianIntegral,
                Shape::SechSquared => Shape::SechSquaredIntegral,
                Shape::GaussianDerivative => Shape::Gaussian,
                other => other,
            };
            Member { shape, ..m }
        })
        .collect())
}

/// Validates a description and returns the evaluable profile.
pub fn make_profile<T: Real>(spec: &ProfileSpec) -> Result<Profile<T>> {
    let u0 = parse_members::<T>(&spec.u0, "u0")?;
    let v0 = match &spec.v0 {
        V0Spec::Members(m) => parse_members::<T>(m, "v0")?,
        V0Spec::FromU1 { from_u1 } => v0_from_u1(from_u1)?,
    };
    let all: Vec<Member<T>> = u0.iter().chain(&v0).copied().collect();
    let decay = decay_of(&all);
    Ok(Profile { u0, v0, decay })
}

fn ladder<T: Real>() -> Vec<T> {
    let mut out = Vec::new();
    let ratio = T::lit(LADDER_RATIO);
    let mut r = T::lit(LADDER_MIN);
    let max = T::lit(LADDER_MAX);
    while r <= max * (T::one() + T::lit(1e-12)) {
        out.push(r);
        r = r * ratio;
    }
    out
}

/// Smallest ladder radius X∞ with |u₀| + |u₀'| + |v₀| < eps for |x| ≥ X∞.
///
/// Checked on the ladder points and four geometric sub-points per rung, on
/// both sides of the origin.
pub fn effective_support<T: Real>(p: &Profile<T>, eps: T) -> Result<T> {
    if !(eps > T::zero() && eps < T::one()) {
        return Err(Error::validation("eps", "must lie in (0, 1)"));
    }
    let rungs = ladder::<T>();
    let sub = T::lit(LADDER_RATIO).powf(T::lit(0.25));
    let exceeds = |x: T| {
        let s = p.eval(x);
        s.u0.abs() + s.u0x.abs() + s.v0.abs() >= eps
    };
    // walk from the top so the answer is the rung just above the outermost
    // violation
    let mut answer = rungs[0];
    for (idx, &r) in rungs.iter().enumerate().rev() {
        let mut violated = false;
        let mut x = r;
        for _ in 0..4 {
            if exceeds(x) || exceeds(-x) {
                violated = true;
                break;
            }
            x = x * sub;
        }
        if violated {
            if idx + 1 >= rungs.len() {
                return Err(Error::RadiusLadderExhausted {
                    radius: r.as_f64(),
                    eps: eps.as_f64(),
                });
            }
            answer = rungs[idx + 1];
            break;
        }
    }
    // everything inside the first rung counts as support too
    Ok(answer)
}
