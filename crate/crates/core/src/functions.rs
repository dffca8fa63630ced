//! Complex special functions with fixed branch choices, the identity kernels
//! and arithmetic modulo `2πi`.
//!
//! Branches: square roots have positive real part (positive imaginary part on
//! the negative real axis), logarithms have imaginary part in `(-π, π]`, and
//! `acosh` has real part `>= 0` with imaginary part in `(-π, π]`, restricted
//! to `[0, π]` when the real part vanishes.

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const TWO_PI: f64 = 2.0 * PI;

/// Radius around `0` and `±√μ` inside which kernel arguments are singular.
pub const SINGULAR_RADIUS: f64 = 1e-12;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Square root with `Re > 0`, and `Im > 0` on the negative real axis.
pub fn csqrt_conv(u: Complex64) -> Complex64 {
    if u.im == 0.0 {
        if u.re < 0.0 {
            return c(0.0, (-u.re).sqrt());
        }
        return c(u.re.sqrt(), 0.0);
    }
    let s = u.sqrt();
    if s.re < 0.0 {
        -s
    } else {
        s
    }
}

/// Logarithm with imaginary part in `(-π, π]`.
pub fn clog_conv(u: Complex64) -> Result<Complex64> {
    if u == Complex64::new(0.0, 0.0) {
        return Err(Error::Domain("log of zero".into()));
    }
    if !(u.re.is_finite() && u.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    let mut arg = u.im.atan2(u.re);
    if arg <= -PI {
        arg = PI;
    }
    Ok(c(u.norm().ln(), arg))
}

/// `log(1 + u)` on the same branch as [`clog_conv`], accurate for small `u`.
fn clog1p(u: Complex64) -> Result<Complex64> {
    if u.norm() < 0.5 {
        let re = 0.5 * (2.0 * u.re + u.norm_sqr()).ln_1p();
        let im = u.im.atan2(1.0 + u.re);
        Ok(c(re, im))
    } else {
        clog_conv(u + 1.0)
    }
}

/// Inverse hyperbolic cosine on the fixed branch.
pub fn acosh_conv(u: Complex64) -> Complex64 {
    let mut w = u.acosh();
    if w.re < 0.0 {
        w = -w;
    }
    if w.im <= -PI {
        w.im += TWO_PI;
    } else if w.im > PI {
        w.im -= TWO_PI;
    }
    if w.re == 0.0 && w.im < 0.0 {
        w.im = -w.im;
    }
    w
}

/// `h(x) = ½(1 − √(1 − 4/x²))`, evaluated without cancellation.
pub fn h(x: Complex64) -> Result<Complex64> {
    if x.norm() < SINGULAR_RADIUS {
        return Err(Error::Domain("h is undefined at 0".into()));
    }
    let x2 = x * x;
    let s = csqrt_conv(Complex64::new(1.0, 0.0) - 4.0 / x2);
    Ok(2.0 / (x2 * (1.0 + s)))
}

/// `μ`, the trace parameter `τ = μ − 2` and `ν = acosh(1 − μ/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulusParams {
    pub mu: Complex64,
    pub tau: Complex64,
    pub nu: Complex64,
}

impl ModulusParams {
    pub fn new(mu: Complex64) -> Result<Self> {
        if !(mu.re.is_finite() && mu.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        if (mu - 4.0).norm() < 1e-12 {
            return Err(Error::Reducible(mu));
        }
        let nu = acosh_conv(1.0 - mu / 2.0);
        Ok(ModulusParams { mu, tau: mu - 2.0, nu })
    }

    /// Whether `μ` is zero, the case handled by the factor-2 kernels.
    pub fn is_zero(&self) -> bool {
        self.mu.norm() < 1e-12
    }

    fn check_flank(&self, x: Complex64, what: &'static str) -> Result<()> {
        let r = csqrt_conv(self.mu);
        if x.norm() < SINGULAR_RADIUS || (x - r).norm() < SINGULAR_RADIUS || (x + r).norm() < SINGULAR_RADIUS {
            return Err(Error::Singular { what, value: x });
        }
        Ok(())
    }
}

/// `ℏ(x) = log[(1 + (e^ν − 1)h) / (1 + (e^{−ν} − 1)h)]`.
pub fn frak_h(params: &ModulusParams, x: Complex64) -> Result<Complex64> {
    params.check_flank(x, "x")?;
    let hx = h(x)?;
    let ep = params.nu.exp();
    let em = (-params.nu).exp();
    let den = 1.0 + (em - 1.0) * hx;
    if den.norm() == 0.0 {
        return Err(Error::Singular { what: "x", value: x });
    }
    clog1p((ep - em) * hx / den)
}

/// `ĥ(x) = log[(1 + (e^ν − 1)h) / √(1 − μ/x²)]`, a half of `ℏ` modulo `2πi`.
pub fn frak_h_hat(params: &ModulusParams, x: Complex64) -> Result<Complex64> {
    params.check_flank(x, "x")?;
    let hx = h(x)?;
    let num = 1.0 + (params.nu.exp() - 1.0) * hx;
    let den = csqrt_conv(1.0 - params.mu / (x * x));
    clog_conv(num / den)
}

/// `Ψ(x, y, z) = log[(1 + (e^ν − 1) z/(xy)) / (√(1 − μ/x²) √(1 − μ/y²))]`.
#[allow(non_snake_case)]
pub fn Psi(params: &ModulusParams, x: Complex64, y: Complex64, z: Complex64) -> Result<Complex64> {
    params.check_flank(x, "x")?;
    params.check_flank(y, "y")?;
    let num = 1.0 + (params.nu.exp() - 1.0) * z / (x * y);
    let den = csqrt_conv(1.0 - params.mu / (x * x)) * csqrt_conv(1.0 - params.mu / (y * y));
    let q = num / den;
    if q.norm() == 0.0 {
        return Err(Error::Singular { what: "z", value: z });
    }
    clog_conv(q)
}

/// The derivative of `2Ψ` in `ν` at `ν = 0`: `z/(xy)`.
#[allow(non_snake_case)]
pub fn Psi0(x: Complex64, y: Complex64, z: Complex64) -> Result<Complex64> {
    if x.norm() < SINGULAR_RADIUS || y.norm() < SINGULAR_RADIUS {
        return Err(Error::Domain("zero flank".into()));
    }
    Ok(z / (x * y))
}

/// A complex number with imaginary part reduced into `(-π, π]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylinderValue {
    pub re: f64,
    pub im: f64,
}

impl CylinderValue {
    pub fn to_complex(self) -> Complex64 {
        c(self.re, self.im)
    }

    /// Wraps a value without reduction, for totals that are compared exactly.
    pub fn raw(v: Complex64) -> Self {
        CylinderValue { re: v.re, im: v.im }
    }
}

fn wrap_angle(t: f64) -> f64 {
    let mut r = t - TWO_PI * (t / TWO_PI).round();
    if r <= -PI {
        r += TWO_PI;
    } else if r > PI {
        r -= TWO_PI;
    }
    r
}

/// Canonical representative modulo `2πi`.
pub fn reduce(v: Complex64) -> CylinderValue {
    CylinderValue {
        re: v.re,
        im: wrap_angle(v.im),
    }
}

/// `|Δre|` plus the circle distance between imaginary parts.
pub fn residue_distance(u: Complex64, v: Complex64) -> f64 {
    let d = wrap_angle(u.im - v.im).abs();
    (u.re - v.re).abs() + d
}

/// Plain distance `|Δre| + |Δim|`, used where no reduction applies.
pub fn plain_distance(u: Complex64, v: Complex64) -> f64 {
    (u.re - v.re).abs() + (u.im - v.im).abs()
}

/// The kernels the summation engines use for a given `μ`.
///
/// For `μ = 0` the kernels are `ℏ₀ = 2h`, `ĥ₀ = h`, `ψ₀ = z/(xy)` with target
/// `1` and no reduction; otherwise the `ℏ`, `ĥ`, `Ψ` family with target `ν`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernels {
    pub params: ModulusParams,
    zero: bool,
    ep: Complex64,
    em: Complex64,
    sinh2: f64,
    e_max: f64,
}

impl Kernels {
    pub fn new(params: ModulusParams) -> Self {
        let ep = params.nu.exp();
        let em = (-params.nu).exp();
        Kernels {
            params,
            zero: params.is_zero(),
            ep,
            em,
            sinh2: (ep - em).norm(),
            e_max: (ep - 1.0).norm().max((em - 1.0).norm()),
        }
    }

    pub fn for_mu(mu: Complex64) -> Result<Self> {
        Ok(Self::new(ModulusParams::new(mu)?))
    }

    pub fn is_zero_mu(&self) -> bool {
        self.zero
    }

    pub fn hbar(&self, x: Complex64) -> Result<Complex64> {
        if self.zero {
            return Ok(2.0 * h(x)?);
        }
        self.params.check_flank(x, "x")?;
        let hx = h(x)?;
        let den = 1.0 + (self.em - 1.0) * hx;
        if den.norm() == 0.0 {
            return Err(Error::Singular { what: "x", value: x });
        }
        clog1p((self.ep - self.em) * hx / den)
    }

    pub fn hhat(&self, x: Complex64) -> Result<Complex64> {
        if self.zero {
            return h(x);
        }
        frak_h_hat(&self.params, x)
    }

    pub fn psi(&self, x: Complex64, y: Complex64, z: Complex64) -> Result<Complex64> {
        if self.zero {
            return Psi0(x, y, z);
        }
        Psi(&self.params, x, y, z)
    }

    /// Right-hand side of the circular-set identities.
    pub fn nu(&self) -> Complex64 {
        if self.zero {
            c(1.0, 0.0)
        } else {
            self.params.nu
        }
    }

    /// Distance used to compare engine totals: circle metric unless `μ = 0`.
    pub fn distance(&self, u: Complex64, v: Complex64) -> f64 {
        if self.zero {
            plain_distance(u, v)
        } else {
            residue_distance(u, v)
        }
    }

    /// Reduced representative, or the raw value when `μ = 0`.
    pub fn canonical(&self, v: Complex64) -> CylinderValue {
        if self.zero {
            CylinderValue::raw(v)
        } else {
            reduce(v)
        }
    }

    /// A constant `C` with `|ℏ(x)| <= C/|x|²` for every `|x| >= r`, if one
    /// can be certified at that radius.
    pub fn kernel_bound(&self, r: f64) -> Option<f64> {
        if r <= 2.0 {
            return None;
        }
        let hh = 2.0 / (1.0 + (1.0 - 4.0 / (r * r)).sqrt());
        if self.zero {
            return Some(2.0 * hh);
        }
        let lip = 1.0 - self.e_max * hh / (r * r);
        if lip <= 0.0 {
            return None;
        }
        Some(self.sinh2 * hh / lip)
    }

    /// `(a, K)` with `|ℏ(x) − a/x²| <= K/|x|⁴` for every `|x| >= r`.
    pub fn expansion_bound(&self, r: f64) -> Option<(Complex64, f64)> {
        if r <= 2.0 {
            return None;
        }
        if self.zero {
            return Some((c(2.0, 0.0), 8.0));
        }
        let a = self.ep - self.em;
        let b = (self.em - 1.0).norm();
        let r2 = r * r;
        // |h(x)| <= hb/|x|² and |h(x) − 1/x²| <= 4/|x|⁴.
        let hb = 1.0 + 4.0 / r2;
        let lip = 1.0 - b * hb / r2;
        if lip <= 0.0 {
            return None;
        }
        let ub = a.norm() * hb / lip;
        if ub / r2 >= 1.0 {
            return None;
        }
        let k = ub * ub / (2.0 * (1.0 - ub / r2)) + a.norm() * b * hb * hb / lip + 4.0 * a.norm();
        Some((a, k))
    }
}
