//! The symmetric-square L-function of the base curve, from a smoothly
//! truncated Euler product.
//!
//! Local factors: (1 − λ(p²)x + λ(p²)x² − x³)⁻¹ at good p and
//! (1 − λ(p)²x)⁻¹ at p = M, with x = p^{−s}. The log of each factor is
//! weighted by a raised-cosine taper in log p over (P/8, P], which removes
//! the edge noise of a sharp cutoff without biasing the value.

use num_complex::Complex64 as C64;

use crate::arith::primes_up_to;
use crate::curve::CurveData;
use crate::error::{Error, Result};

const MODULE: &str = "sym-square";

/// Default prime cutoff.
pub const DEFAULT_CUTOFF: u64 = 1_000_000;

/// Bound on |λ(p²)| used in the tail heuristic.
const COEFF_BOUND: f64 = 3.0;

/// Lowest real part the extended evaluator accepts.
pub const EXTENDED_MIN_RE: f64 = 0.75;

/// A value together with a heuristic absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub err: f64,
}

#[derive(Debug, Clone)]
struct Local {
    lnp: f64,
    /// Coefficients of x, x², x³ in the inverse local factor.
    poly: [f64; 3],
    weight: f64,
}

/// Value and first two logarithmic derivatives of L(sym², s).
#[derive(Debug, Clone, Copy)]
pub struct LogDerivs {
    pub log_value: C64,
    pub d1: C64,
    pub d2: C64,
}

/// Data at s = 1.
#[derive(Debug, Clone, Copy)]
pub struct SymAtOne {
    pub l: f64,
    pub lp_over_l: f64,
    pub lpp_over_l: f64,
    pub err: f64,
}

#[derive(Debug, Clone)]
pub struct SymSquare {
    cutoff: u64,
    locals: Vec<Local>,
}

/// Inverse local factor coefficients [1, −λ(p²), λ(p²), −1] at a good prime.
pub fn good_local_poly(lambda_p: f64) -> [f64; 4] {
    let c = lambda_p * lambda_p - 1.0;
    [1.0, -c, c, -1.0]
}

/// Raised-cosine taper in log p: 1 up to P/8, 0 at P.
fn taper(p: f64, cutoff: f64) -> f64 {
    let u = p.ln();
    let hi = cutoff.ln();
    let lo = hi - 8f64.ln();
    if u <= lo {
        1.0
    } else if u >= hi {
        0.0
    } else {
        let v = (u - lo) / (hi - lo);
        0.5 * (1.0 + (std::f64::consts::PI * v).cos())
    }
}

impl SymSquare {
    pub fn new(curve: &CurveData, cutoff: u64) -> Result<Self> {
        if cutoff < 100 {
            return Err(Error::arg(MODULE, format!("prime cutoff {cutoff} below 100")));
        }
        let mut locals = Vec::new();
        for p in primes_up_to(cutoff as usize) {
            let l = curve.lambda_p(p)?;
            let poly = if curve.is_bad(p) {
                [-l * l, 0.0, 0.0]
            } else {
                let g = good_local_poly(l);
                [g[1], g[2], g[3]]
            };
            locals.push(Local {
                lnp: (p as f64).ln(),
                poly,
                weight: taper(p as f64, cutoff as f64),
            });
        }
        Ok(SymSquare { cutoff, locals })
    }

    pub fn cutoff(&self) -> u64 {
        self.cutoff
    }

    /// Heuristic truncation error of log L at real part `sigma`.
    pub fn error_estimate(&self, sigma: f64) -> f64 {
        let p = self.cutoff as f64 / 8f64.sqrt();
        let e = 2.0 * sigma - 1.0;
        COEFF_BOUND / (e * p.powf(e) * p.ln()).sqrt()
    }

    /// log L, (log L)', (log L)'' with no domain check.
    pub fn log_derivs_unchecked(&self, s: C64) -> LogDerivs {
        let mut lv = C64::new(0.0, 0.0);
        let mut d1 = C64::new(0.0, 0.0);
        let mut d2 = C64::new(0.0, 0.0);
        for loc in &self.locals {
            if loc.weight == 0.0 {
                continue;
            }
            let x = (-s * loc.lnp).exp();
            let [c1, c2, c3] = loc.poly;
            let f = 1.0 + x * (c1 + x * (c2 + x * c3));
            let f1 = c1 + x * (2.0 * c2 + 3.0 * c3 * x);
            let f2 = 2.0 * c2 + 6.0 * c3 * x;
            let h = f1 / f;
            let hp = f2 / f - h * h;
            let w = loc.weight;
            lv -= w * f.ln();
            d1 += w * loc.lnp * x * h;
            d2 -= w * loc.lnp * loc.lnp * x * (h + x * hp);
        }
        LogDerivs { log_value: lv, d1, d2 }
    }

    fn check(&self, s: C64, min_re: f64) -> Result<()> {
        if s.re < min_re - 1e-12 {
            return Err(Error::domain(MODULE, format!("Re s = {} below {min_re}", s.re)));
        }
        Ok(())
    }

    /// L(sym², s) for Re s ≥ 1.
    pub fn value(&self, s: C64) -> Result<Estimate<C64>> {
        self.check(s, 1.0)?;
        Ok(self.value_unchecked(s))
    }

    /// L(sym², s) for Re s ≥ 0.75, where the Euler product no longer
    /// converges absolutely; the error estimate grows accordingly.
    pub fn value_extended(&self, s: C64) -> Result<Estimate<C64>> {
        self.check(s, EXTENDED_MIN_RE)?;
        Ok(self.value_unchecked(s))
    }

    fn value_unchecked(&self, s: C64) -> Estimate<C64> {
        let v = self.log_derivs_unchecked(s).log_value.exp();
        Estimate {
            value: v,
            err: v.norm() * self.error_estimate(s.re),
        }
    }

    /// L'/L(sym², s) for Re s ≥ 1.
    pub fn log_deriv(&self, s: C64) -> Result<Estimate<C64>> {
        self.check(s, 1.0)?;
        let d = self.log_derivs_unchecked(s);
        if d.log_value.re < -30.0 {
            return Err(Error::singular(MODULE, format!("zero of L(sym2) near s = {s}")));
        }
        let p = self.cutoff as f64;
        Ok(Estimate {
            value: d.d1,
            err: self.error_estimate(s.re) * p.ln(),
        })
    }

    pub fn log_derivs(&self, s: C64) -> Result<LogDerivs> {
        self.check(s, EXTENDED_MIN_RE)?;
        Ok(self.log_derivs_unchecked(s))
    }

    pub fn at_one(&self) -> SymAtOne {
        let d = self.log_derivs_unchecked(C64::new(1.0, 0.0));
        let d1 = d.d1.re;
        let lnp = (self.cutoff as f64).ln();
        SymAtOne {
            l: d.log_value.re.exp(),
            lp_over_l: d1,
            lpp_over_l: d.d2.re + d1 * d1,
            err: self.error_estimate(1.0) * lnp * lnp,
        }
    }

    /// |L(sym², 1 + 2it)| on an even grid.
    pub fn modulus_on_line(&self, t_max: f64, step: f64) -> Vec<(f64, f64)> {
        let n = (t_max / step).round() as usize;
        (0..=n)
            .map(|i| {
                let t = i as f64 * step;
                let v = self.log_derivs_unchecked(C64::new(1.0, 2.0 * t)).log_value;
                (t, v.re.exp())
            })
            .collect()
    }

    /// t-values of local minima of |L(sym², 1 + 2it)| below `threshold`,
    /// refined by golden-section search.
    pub fn zero_markers(&self, t_max: f64, step: f64, threshold: f64) -> Vec<f64> {
        let curve = self.modulus_on_line(t_max, step);
        let vals: Vec<f64> = curve.iter().map(|c| c.1).collect();
        crate::roots::local_minima(&vals)
            .into_iter()
            .filter_map(|i| {
                let f = |t: f64| {
                    self.log_derivs_unchecked(C64::new(1.0, 2.0 * t)).log_value.re
                };
                let (t, v) = crate::roots::golden_min(f, curve[i - 1].0, curve[i + 1].0, 1e-7);
                (v.exp() < threshold).then_some(t)
            })
            .collect()
    }
}

/// L(sym², s) with the cutoff doubled from 10³ until the error estimate is
/// below `tol`.
pub fn sym2_value(curve: &CurveData, s: C64, tol: f64) -> Result<Estimate<C64>> {
    if s.re < 1.0 {
        return Err(Error::domain(MODULE, format!("Re s = {} below 1", s.re)));
    }
    let max_cutoff = curve.p_max().max(1000);
    let mut p = 1000;
    loop {
        let ev = SymSquare::new(curve, p)?;
        let v = ev.value(s)?;
        if v.err < tol {
            return Ok(v);
        }
        if p * 2 > max_cutoff {
            return Err(Error::convergence(
                MODULE,
                format!("error estimate {:.2e} above {tol:.1e} at cutoff {p}", v.err),
            ));
        }
        p *= 2;
    }
}
