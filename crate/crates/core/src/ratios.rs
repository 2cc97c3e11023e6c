//! The arithmetic factor A_E(α, γ), its α-derivative, Y_E, and the
//! family average of L'/L predicted by the ratios conjecture.
//!
//! A_E is kept as a single Euler product whose local factor at a good
//! prime already includes the local factors of Y_E⁻¹, so it is
//! 1 + O(p⁻²) and converges absolutely. With u = p^{−(1/2+α)},
//! v = p^{−(1/2+γ)}, λ = λ(p) and c = λ² − 1:
//!
//!   A_p = V · (1 − v²) · S(u²) / ((1 − uv) · S(uv)),   S(x) = 1 − cx + cx² − x³,
//!   V   = 1 + p/(p+1) · (N/D − 1),
//!   N   = (1 + u²)(1 + v²) − λ²uv,   D = (1 + u²)² − λ²u²,
//!
//! where V is the closed form of the double sum over λ(p^m)μ_E(p^h)u^m v^h
//! with m + h even and positive.

use num_complex::Complex64 as C64;

use crate::arith::primes_up_to;
use crate::curve::CurveData;
use crate::discriminant::TwistFamily;
use crate::error::{Error, Result};
use crate::special::{self, ln_gamma, zeta, zeta_log_deriv};
use crate::symsquare::SymSquare;

const MODULE: &str = "ratios";

/// Default prime cutoff for A_E.
pub const DEFAULT_CUTOFF: u64 = 10_000;

/// Family sums are either taken over the actual members or replaced by
/// their Euler–Maclaurin approximations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SumMode {
    Exact,
    EulerMaclaurin,
}

fn ln1p(z: C64) -> C64 {
    if z.norm() < 1e-4 {
        z * (1.0 - z * (0.5 - z * (1.0 / 3.0 - 0.25 * z)))
    } else {
        (1.0 + z).ln()
    }
}

/// S(x) − 1 without the cancellation.
fn sinv_m1(c: f64, x: C64) -> C64 {
    x * (-c + x * (c - x))
}

fn sinv(c: f64, x: C64) -> (C64, C64) {
    let f = 1.0 - c * x + c * x * x - x * x * x;
    let f1 = -c + 2.0 * c * x - 3.0 * x * x;
    (f, f1)
}

/// log A_p and ∂_u log A_p at a good prime, p taken as a real variable.
fn good_local(p: f64, lam: f64, alpha: C64, gamma: C64) -> (C64, C64) {
    let lnp = p.ln();
    let u = (-(0.5 + alpha) * lnp).exp();
    let v = (-(0.5 + gamma) * lnp).exp();
    let l2 = lam * lam;
    let c = l2 - 1.0;
    let k = p / (p + 1.0);
    let u2 = u * u;
    let uv = u * v;
    let n = (1.0 + u2) * (1.0 + v * v) - l2 * uv;
    let d = (1.0 + u2) * (1.0 + u2) - l2 * u2;
    // N - D factors exactly, which keeps log A accurate for huge p
    let vm1 = k * (v - u) * ((1.0 + u2) * (v + u) - l2 * u) / d;
    let vv = 1.0 + vm1;
    let (s_u2, s_u2p) = sinv(c, u2);
    let (s_uv, s_uvp) = sinv(c, uv);
    // paired so that the diagonal gives exactly zero
    let log_a = ln1p(vm1)
        + (ln1p(-v * v) - ln1p(-uv))
        + (ln1p(sinv_m1(c, u2)) - ln1p(sinv_m1(c, uv)));
    let nu = 2.0 * u * (1.0 + v * v) - l2 * v;
    let du = 4.0 * u * (1.0 + u2) - 2.0 * l2 * u;
    let dvv = k * (nu * d - n * du) / (d * d);
    let dlog = dvv / vv + 2.0 * u * s_u2p / s_u2 + v / (1.0 - uv) - v * s_uvp / s_uv;
    (log_a, dlog)
}

/// log A_M and ∂_u log A_M at the bad prime; `e = λ(M)·ω`.
fn bad_local(p: f64, lam: f64, omega: f64, alpha: C64, gamma: C64) -> (C64, C64) {
    let lnp = p.ln();
    let u = (-(0.5 + alpha) * lnp).exp();
    let v = (-(0.5 + gamma) * lnp).exp();
    let e = lam * omega;
    let l2 = lam * lam;
    let log_a = (1.0 - e * v).ln() - (1.0 - e * u).ln() + (1.0 - v * v).ln()
        - (1.0 - u * v).ln()
        + (1.0 - l2 * u * u).ln()
        - (1.0 - l2 * u * v).ln();
    let dlog = e / (1.0 - e * u) + v / (1.0 - u * v) - 2.0 * l2 * u / (1.0 - l2 * u * u)
        + l2 * v / (1.0 - l2 * u * v);
    (log_a, dlog)
}

/// The double sum defining V at a good prime, summed term by term up to
/// m = `depth`. Used to check the closed form.
pub fn v_series(p: f64, lam: f64, alpha: C64, gamma: C64, depth: u32) -> C64 {
    let lnp = p.ln();
    let u = (-(0.5 + alpha) * lnp).exp();
    let v = (-(0.5 + gamma) * lnp).exp();
    let mu = [1.0, -lam, 1.0];
    let mut s = C64::new(0.0, 0.0);
    for m in 0..=depth {
        let lm = crate::curve::hecke_power(lam, m);
        for (h, mh) in mu.iter().enumerate() {
            let h = h as u32;
            if m + h == 0 || (m + h) % 2 == 1 {
                continue;
            }
            s += lm * mh * u.powu(m) * v.powu(h);
        }
    }
    1.0 + p / (p + 1.0) * s
}

/// Closed-form V at a good prime.
pub fn v_closed(p: f64, lam: f64, alpha: C64, gamma: C64) -> C64 {
    let lnp = p.ln();
    let u = (-(0.5 + alpha) * lnp).exp();
    let v = (-(0.5 + gamma) * lnp).exp();
    let l2 = lam * lam;
    let n = (1.0 + u * u) * (1.0 + v * v) - l2 * u * v;
    let d = (1.0 + u * u) * (1.0 + u * u) - l2 * u * u;
    1.0 + p / (p + 1.0) * (n / d - 1.0)
}

/// Nodes and weights of n-point Gauss–Laguerre quadrature.
fn gauss_laguerre(n: usize) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(n);
    let nf = n as f64;
    let mut z = 0.0;
    for i in 0..n {
        z = match i {
            0 => 3.0 / (1.0 + 2.4 * nf),
            1 => z + 15.0 / (1.0 + 2.5 * nf),
            _ => {
                let ai = (i - 1) as f64;
                z + ((1.0 + 2.55 * ai) / (1.9 * ai)) * (z - out[i - 2].0)
            }
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf + 1.0 - z) * p2 - jf * p3) / (jf + 1.0);
            }
            pp = nf * (p1 - p2) / z;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs() {
                break;
            }
        }
        // weight = 1 / (z [L_n'(z)]^2)
        out.push((z, 1.0 / (z * pp * pp)));
    }
    out
}

/// Euler product for A_E truncated at a prime cutoff, optionally completed
/// by the Sato–Tate expectation of the omitted good primes.
#[derive(Debug, Clone)]
pub struct ArithFactor {
    cutoff: u64,
    m: f64,
    lambda_m: f64,
    omega: f64,
    good: Vec<(f64, f64)>,
    tail: bool,
    st_nodes: Vec<(f64, f64)>,
    lag_nodes: Vec<(f64, f64)>,
}

impl ArithFactor {
    pub fn new(curve: &CurveData, cutoff: u64) -> Result<Self> {
        if cutoff <= curve.m {
            return Err(Error::arg(MODULE, format!("prime cutoff {cutoff} must exceed M")));
        }
        let mut good = Vec::new();
        for p in primes_up_to(cutoff as usize) {
            if p != curve.m {
                good.push((p as f64, curve.lambda_p(p)?));
            }
        }
        // Sato-Tate: lambda = 2y with density (2/pi) sqrt(1 - y^2) dy
        let n = 16;
        let st_nodes = (1..=n)
            .map(|i| {
                let th = i as f64 * std::f64::consts::PI / (n as f64 + 1.0);
                (2.0 * th.cos(), 2.0 / (n as f64 + 1.0) * th.sin().powi(2))
            })
            .collect();
        Ok(ArithFactor {
            cutoff,
            m: curve.m as f64,
            lambda_m: curve.lambda_p(curve.m)?,
            omega: f64::from(curve.omega),
            good,
            tail: true,
            st_nodes,
            lag_nodes: gauss_laguerre(20),
        })
    }

    /// Switches the Sato–Tate tail correction on or off.
    pub fn with_tail(mut self, tail: bool) -> Self {
        self.tail = tail;
        self
    }

    pub fn cutoff(&self) -> u64 {
        self.cutoff
    }

    fn check(&self, alpha: C64, gamma: C64) -> Result<()> {
        if alpha.re.abs() >= 0.25 || gamma.re.abs() >= 0.25 {
            return Err(Error::domain(
                MODULE,
                format!("need |Re alpha|, |Re gamma| < 1/4, got {alpha}, {gamma}"),
            ));
        }
        Ok(())
    }

    /// Local factor A_p at a prime p ≤ cutoff.
    pub fn local_factor(&self, p: u64, alpha: C64, gamma: C64) -> Option<C64> {
        let pf = p as f64;
        if pf == self.m {
            return Some(bad_local(pf, self.lambda_m, self.omega, alpha, gamma).0.exp());
        }
        let i = self.good.binary_search_by(|g| g.0.total_cmp(&pf)).ok()?;
        Some(good_local(pf, self.good[i].1, alpha, gamma).0.exp())
    }

    /// (Σ log A_p, Σ ∂_α log A_p) over all primes, with tail.
    fn sums(&self, alpha: C64, gamma: C64) -> (C64, C64) {
        let (mut la, mut da) = bad_local(self.m, self.lambda_m, self.omega, alpha, gamma);
        let lnm = self.m.ln();
        let um = (-(0.5 + alpha) * lnm).exp();
        da *= -lnm * um;
        for &(p, lam) in &self.good {
            let (l, d) = good_local(p, lam, alpha, gamma);
            la += l;
            let lnp = p.ln();
            let u = (-(0.5 + alpha) * lnp).exp();
            da += -lnp * u * d;
        }
        if self.tail {
            let (tl, td) = self.tail_sums(alpha, gamma);
            la += tl;
            da += td;
        }
        (la, da)
    }

    /// ∫_P^∞ E_ST[log A_x] dx / ln x and the same for ∂_α log A_x.
    fn tail_sums(&self, alpha: C64, gamma: C64) -> (C64, C64) {
        let p0 = self.cutoff as f64;
        let lp0 = p0.ln();
        let mut tl = C64::new(0.0, 0.0);
        let mut td = C64::new(0.0, 0.0);
        for &(y, w) in &self.lag_nodes {
            let x = p0 * y.exp();
            let lnx = lp0 + y;
            let u = (-(0.5 + alpha) * lnx).exp();
            let mut el = C64::new(0.0, 0.0);
            let mut ed = C64::new(0.0, 0.0);
            for &(lam, sw) in &self.st_nodes {
                let (l, d) = good_local(x, lam, alpha, gamma);
                el += sw * l;
                ed += sw * (-lnx * u * d);
            }
            // dx = x dy, weight e^{-y} absorbed by the quadrature
            let jac = w * y.exp() * x / lnx;
            tl += jac * el;
            td += jac * ed;
        }
        (tl, td)
    }

    pub fn a_factor(&self, alpha: C64, gamma: C64) -> Result<C64> {
        self.check(alpha, gamma)?;
        Ok(self.sums(alpha, gamma).0.exp())
    }

    /// ∂_α log A_E(α, γ).
    pub fn dlog_alpha(&self, alpha: C64, gamma: C64) -> Result<C64> {
        self.check(alpha, gamma)?;
        Ok(self.sums(alpha, gamma).1)
    }

    /// A_E¹(r, r) = ∂_α A_E(α, γ) at α = γ = r.
    pub fn a1(&self, r: C64) -> Result<C64> {
        self.check(r, r)?;
        let (la, da) = self.sums(r, r);
        Ok(la.exp() * da)
    }

    /// B'(0), B''(0) for B(r) = A_E(−r, r), by Richardson-extrapolated
    /// central differences at h = 1e−2 and 1e−3. The extrapolated value must
    /// stay within 1e−4 of the finer difference.
    pub fn b_derivs(&self) -> Result<(f64, f64)> {
        let b = |r: f64| self.sums(C64::new(-r, 0.0), C64::new(r, 0.0)).0.exp().re;
        let b0 = b(0.0);
        let d = |h: f64| {
            let (bp, bm) = (b(h), b(-h));
            ((bp - bm) / (2.0 * h), (bp - 2.0 * b0 + bm) / (h * h))
        };
        let (d1a, d2a) = d(1e-2);
        let (d1b, d2b) = d(1e-3);
        // error is O(h^2): ratio 100 between the two steps
        let b1 = (100.0 * d1b - d1a) / 99.0;
        let b2 = (100.0 * d2b - d2a) / 99.0;
        if (b1 - d1b).abs() > 1e-4 || (b2 - d2b).abs() > 1e-4 * b2.abs().max(1.0) {
            return Err(Error::Instability {
                module: MODULE,
                msg: format!("step study disagrees: B' {d1a} vs {d1b}, B'' {d2a} vs {d2b}"),
            });
        }
        Ok((b1, b2))
    }
}

/// a(n) = Π p/(p+1) over primes p ∤ M dividing n.
pub fn harmonic_weight(n: u64, m: u64) -> f64 {
    crate::arith::factorize(n)
        .into_iter()
        .filter(|&(p, _)| p != m)
        .map(|(p, _)| p as f64 / (p as f64 + 1.0))
        .product()
}

/// A_E together with the ζ and sym² evaluators.
#[derive(Debug, Clone)]
pub struct RatiosContext {
    pub m: u64,
    pub arith: ArithFactor,
    pub sym: SymSquare,
}

impl RatiosContext {
    pub fn new(curve: &CurveData, prime_cutoff: u64, sym_cutoff: u64) -> Result<Self> {
        Ok(RatiosContext {
            m: curve.m,
            arith: ArithFactor::new(curve, prime_cutoff)?,
            sym: SymSquare::new(curve, sym_cutoff)?,
        })
    }

    /// Y_E(α,γ) = ζ(1+2γ) L(sym²,1+2α) / (ζ(1+α+γ) L(sym²,1+α+γ)).
    pub fn y_factor(&self, alpha: C64, gamma: C64) -> Result<C64> {
        let num = zeta(1.0 + 2.0 * gamma)? * self.sym.value_extended(1.0 + 2.0 * alpha)?.value;
        let den = zeta(1.0 + alpha + gamma)? * self.sym.value_extended(1.0 + alpha + gamma)?.value;
        if den.norm() < 1e-300 {
            return Err(Error::singular(MODULE, "Y_E denominator vanishes"));
        }
        Ok(num / den)
    }

    /// Σ_d (√M d/2π)^{−2r}, either over the members or in closed form.
    pub fn conductor_power_sum(&self, r: C64, family: &TwistFamily, mode: SumMode) -> C64 {
        match mode {
            SumMode::Exact => family
                .members
                .iter()
                .map(|&d| (-2.0 * r * family.log_conductor(d)).exp())
                .sum(),
            SumMode::EulerMaclaurin => {
                let l = crate::discriminant::log_conductor(family.m, family.x as f64);
                family.x_star() as f64 * (-2.0 * r * l).exp() / (1.0 - 2.0 * r)
            }
        }
    }

    /// The predicted Σ_d L'/L(1/2 + r, χ_d) over the family.
    pub fn log_deriv_average(&self, r: C64, family: &TwistFamily, mode: SumMode) -> Result<C64> {
        if r.norm() < 1e-6 {
            return Err(Error::singular(MODULE, "r = 0 is a pole of the individual terms"));
        }
        if r.re < 0.0 || r.re >= 0.25 {
            return Err(Error::domain(MODULE, format!("need 0 <= Re r < 1/4, got {r}")));
        }
        let xs = family.x_star() as f64;
        let s = 1.0 + 2.0 * r;
        let diag = -zeta_log_deriv(s)? + self.sym.log_derivs(s)?.d1 + self.arith.a1(r)?;
        let gr = (ln_gamma(1.0 - r) - ln_gamma(1.0 + r)).exp();
        let sym_ratio = (self.sym.log_derivs(1.0 - 2.0 * r)?.log_value
            - self.sym.log_derivs(C64::new(1.0, 0.0))?.log_value)
            .exp();
        let osc = gr * zeta(s)? * sym_ratio * self.arith.a_factor(-r, r)?;
        Ok(xs * diag - osc * self.conductor_power_sum(r, family, mode))
    }
}

/// Exposes ζ'/ζ for callers that only hold a context.
pub fn zeta_log_deriv_at(s: C64) -> Result<C64> {
    special::zeta_log_deriv(s)
}
