//! The one-level density predicted by the ratios conjecture, its rescaled
//! form, the 1/L expansion coefficients, and the SO(even) limit.
//!
//! For an even twist family write, at height t and with u = 2it,
//!
//!   F(t) = Σ_d [2ℓ_d + ψ(1+it) + ψ(1−it)
//!               + 2(−ζ'/ζ(1+u) + S'/S(1+u) + A¹(it,it) − e^{−2itℓ_d} H(t) ζ(1+u))]
//!
//! where ℓ_d = log(√M d/2π), S = L(sym², ·) and
//! H(t) = Γ(1−it)/Γ(1+it) · S(1−u)/S(1) · A(−it,it). The density of positive
//! ordinates is Re F/2π. The poles of −ζ'/ζ and ζ at u = 0 cancel between
//! the diagonal and oscillatory parts; the code never forms them, working
//! with ζ(1+u) − 1/u, ζ'/ζ(1+u) + 1/u and Σ_d (1 − H e^{−2itℓ_d}) computed
//! through expm1.

use std::io::Write;

use num_complex::Complex64 as C64;

use crate::curve::CurveData;
use crate::discriminant::{log_conductor, TwistFamily};
use crate::error::{Error, Result};
use crate::ratios::{RatiosContext, SumMode};
pub use crate::special::expm1_c;
use crate::special::{
    digamma, ln_gamma, zeta_log_deriv_regular, zeta_regular, ZetaExpansion, EULER_GAMMA,
    STIELTJES_1,
};

const MODULE: &str = "density";
const PI: f64 = std::f64::consts::PI;

/// Below this |t| the ζ pieces come from the Laurent expansion.
pub const LAURENT_SWITCH: f64 = 1e-3;

/// How the family enters: actual members, Euler–Maclaurin sums over a
/// materialized family, or the closed forms alone (family never built).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityMode {
    Exact,
    EulerMaclaurin,
    ClosedFormLargeX,
}

impl DensityMode {
    pub fn name(self) -> &'static str {
        match self {
            DensityMode::Exact => "exact",
            DensityMode::EulerMaclaurin => "euler_maclaurin",
            DensityMode::ClosedFormLargeX => "closed_form_large_X",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "exact" => Some(DensityMode::Exact),
            "euler_maclaurin" | "em" => Some(DensityMode::EulerMaclaurin),
            "closed_form_large_X" | "closed_form" | "large_x" => Some(DensityMode::ClosedFormLargeX),
            _ => None,
        }
    }
}

impl From<SumMode> for DensityMode {
    fn from(m: SumMode) -> Self {
        match m {
            SumMode::Exact => DensityMode::Exact,
            SumMode::EulerMaclaurin => DensityMode::EulerMaclaurin,
        }
    }
}

fn ln1p_c(z: C64) -> C64 {
    if z.norm() < 1e-4 {
        z * (1.0 - z * (0.5 - z * (1.0 / 3.0 - 0.25 * z)))
    } else {
        (1.0 + z).ln()
    }
}

/// Family-independent ingredients at height t.
#[derive(Debug, Clone, Copy)]
pub struct Ingredients {
    pub t: f64,
    /// ψ(1+it) + ψ(1−it).
    pub psi2: f64,
    /// −ζ'/ζ(1+u) − 1/u.
    pub zl_reg: C64,
    /// ζ(1+u) − 1/u.
    pub z_reg: C64,
    /// S'/S(1+u).
    pub sym_ld: C64,
    /// A¹(it, it).
    pub a1: C64,
    /// log H(t).
    pub log_h: C64,
}

/// Constants at the centre.
#[derive(Debug, Clone, Copy)]
pub struct CentralData {
    pub sym_l: f64,
    pub sym_lp: f64,
    pub sym_lpp: f64,
    pub a1: f64,
    pub b1: f64,
    pub b2: f64,
}

/// Density evaluator for one curve.
#[derive(Debug, Clone)]
pub struct DensityModel {
    pub m: u64,
    pub ctx: RatiosContext,
    pub central: CentralData,
    log_s1: C64,
    expansion: ZetaExpansion,
}

/// Family sums that enter F: Σ ℓ_d, X*, and how to form Σ (1 − H e^{−2itℓ_d}).
#[derive(Debug, Clone)]
pub struct FamilyView<'a> {
    pub x: f64,
    pub x_star: f64,
    pub l: f64,
    pub mode: DensityMode,
    logs: Option<Vec<f64>>,
    _f: std::marker::PhantomData<&'a ()>,
}

impl<'a> FamilyView<'a> {
    pub fn from_family(family: &'a TwistFamily, mode: DensityMode) -> Result<Self> {
        if family.members.is_empty() {
            return Err(Error::Empty(format!("{MODULE}: family with X = {}", family.x)));
        }
        let logs = (mode == DensityMode::Exact)
            .then(|| family.members.iter().map(|&d| family.log_conductor(d)).collect());
        Ok(FamilyView {
            x: family.x as f64,
            x_star: family.x_star() as f64,
            l: log_conductor(family.m, family.x as f64),
            mode,
            logs,
            _f: std::marker::PhantomData,
        })
    }

    /// Closed-form view; X* is set to 1 since it cancels after scaling.
    pub fn closed_form(m: u64, x: f64) -> Result<Self> {
        let l = log_conductor(m, x);
        if !(l > 0.0) {
            return Err(Error::domain(MODULE, format!("X = {x} too small: log(sqrt(M) X / 2pi) <= 0")));
        }
        Ok(FamilyView {
            x,
            x_star: 1.0,
            l,
            mode: DensityMode::ClosedFormLargeX,
            logs: None,
            _f: std::marker::PhantomData,
        })
    }

    fn sum_logs(&self) -> f64 {
        match &self.logs {
            Some(v) => v.iter().sum(),
            None => self.x_star * (self.l - 1.0),
        }
    }

    /// Σ_d (1 − H e^{−2itℓ_d}).
    fn defect(&self, t: f64, log_h: C64) -> C64 {
        match &self.logs {
            Some(v) => -v
                .iter()
                .map(|&l| expm1_c(log_h - C64::new(0.0, 2.0 * t * l)))
                .sum::<C64>(),
            None => {
                // closed form: X* e^{-2itL}/(1-2it)
                let w = log_h - C64::new(0.0, 2.0 * t * self.l) - ln1p_c(C64::new(0.0, -2.0 * t));
                -self.x_star * expm1_c(w)
            }
        }
    }
}

impl DensityModel {
    pub fn new(curve: &CurveData, prime_cutoff: u64, sym_cutoff: u64) -> Result<Self> {
        let ctx = RatiosContext::new(curve, prime_cutoff, sym_cutoff)?;
        let one = ctx.sym.at_one();
        let (b1, b2) = ctx.arith.b_derivs()?;
        let a1 = ctx.arith.a1(C64::new(0.0, 0.0))?.re;
        let log_s1 = ctx.sym.log_derivs(C64::new(1.0, 0.0))?.log_value;
        Ok(DensityModel {
            m: curve.m,
            ctx,
            central: CentralData {
                sym_l: one.l,
                sym_lp: one.lp_over_l,
                sym_lpp: one.lpp_over_l,
                a1,
                b1,
                b2,
            },
            log_s1,
            expansion: ZetaExpansion::default(),
        })
    }

    pub fn ingredients(&self, t: f64) -> Result<Ingredients> {
        let u = C64::new(0.0, 2.0 * t);
        let (zl_reg, z_reg) = if t.abs() < LAURENT_SWITCH {
            let e = &self.expansion;
            (
                -(e.zeta_log_deriv_1p(u) + u.inv()),
                e.zeta_1p(u) - u.inv(),
            )
        } else {
            (
                -zeta_log_deriv_regular(1.0 + u)?,
                zeta_regular(1.0 + u).0,
            )
        };
        let it = C64::new(0.0, t);
        let psi2 = 2.0 * digamma(1.0 + it).re;
        let sym_ld = self.ctx.sym.log_derivs(1.0 + u)?.d1;
        let (la, da) = {
            let a1 = self.ctx.arith.a1(it)?;
            let la = self.ctx.arith.a_factor(-it, it)?.ln();
            (la, a1)
        };
        let log_g = C64::new(0.0, -2.0 * ln_gamma(1.0 + it).im);
        let log_s = self.ctx.sym.log_derivs(1.0 - u)?.log_value - self.log_s1;
        Ok(Ingredients {
            t,
            psi2,
            zl_reg,
            z_reg,
            sym_ld,
            a1: da,
            log_h: log_g + log_s + la,
        })
    }

    /// F(t) at t = 0, where the cancelling poles leave derivative terms.
    fn f_at_zero(&self, fam: &FamilyView) -> f64 {
        let c = &self.central;
        4.0 * fam.sum_logs() - 8.0 * EULER_GAMMA * fam.x_star
            + 4.0 * fam.x_star * c.sym_lp
            + 2.0 * fam.x_star * c.a1
            - fam.x_star * c.b1
    }

    /// F(t) from precomputed ingredients.
    pub fn f_from(&self, ing: &Ingredients, fam: &FamilyView) -> C64 {
        let t = ing.t;
        if t == 0.0 {
            return C64::new(self.f_at_zero(fam), 0.0);
        }
        let xs = fam.x_star;
        let u = C64::new(0.0, 2.0 * t);
        let e = fam.defect(t, ing.log_h);
        2.0 * fam.sum_logs()
            + xs * ing.psi2
            + 2.0 * xs * (ing.zl_reg - ing.z_reg + ing.sym_ld + ing.a1)
            + 2.0 * (u.inv() + ing.z_reg) * e
    }

    pub fn f_value(&self, t: f64, fam: &FamilyView) -> Result<C64> {
        Ok(self.f_from(&self.ingredients(t)?, fam))
    }

    /// Density of positive zero ordinates at height t, summed over the family.
    pub fn density_at(&self, t: f64, fam: &FamilyView) -> Result<f64> {
        if t < 0.0 {
            return Err(Error::arg(MODULE, format!("t = {t} < 0")));
        }
        Ok(self.f_value(t, fam)?.re / (2.0 * PI))
    }

    /// density_at divided by X*·L.
    pub fn normalized_density_at(&self, t: f64, fam: &FamilyView) -> Result<f64> {
        Ok(self.density_at(t, fam)? / (fam.x_star * fam.l))
    }

    /// Density of the rescaled ordinates τ = tL/π, per twist.
    pub fn scaled_density(&self, tau: f64, fam: &FamilyView) -> Result<f64> {
        if tau < 0.0 {
            return Err(Error::arg(MODULE, format!("tau = {tau} < 0")));
        }
        let t = PI * tau / fam.l;
        Ok(self.f_value(t, fam)?.re / (2.0 * fam.l * fam.x_star))
    }

    /// (a₁, a₂) of the 1/L expansion.
    pub fn expansion_coeffs(&self) -> (f64, f64) {
        let c = &self.central;
        let g = EULER_GAMMA;
        let g1 = STIELTJES_1;
        let (s1, s2) = (c.sym_lp, c.sym_lpp);
        let a1 = 1.0 + 2.0 * g - c.a1 - s1;
        let a2 = 2.0 + 4.0 * g + 3.0 * g * g - 2.0 * g1 + c.b1 + 2.0 * g * c.b1 - 2.0 * s1
            - 4.0 * g * s1
            - c.b1 * s1
            + c.b2 / 4.0
            + s2;
        (a1, a2)
    }

    /// Evaluates the curve on a grid, in parallel when enabled.
    pub fn curve(&self, grid: &[f64], fam: &FamilyView, scale: Scale) -> Result<DensityCurve> {
        if grid.is_empty() {
            return Err(Error::arg(MODULE, "empty grid"));
        }
        let eval = |&g: &f64| -> Result<f64> {
            match scale {
                Scale::Unscaled => self.density_at(g, fam),
                Scale::Scaled => self.scaled_density(g, fam),
            }
        };
        #[cfg(feature = "parallel")]
        let vals: Vec<Result<f64>> = {
            use rayon::prelude::*;
            grid.par_iter().map(eval).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let vals: Vec<Result<f64>> = grid.iter().map(eval).collect();
        let values = vals.into_iter().collect::<Result<Vec<f64>>>()?;
        let divisor = match scale {
            Scale::Unscaled => fam.x_star * fam.l,
            Scale::Scaled => 1.0,
        };
        Ok(DensityCurve {
            grid: grid.to_vec(),
            normalized: values.iter().map(|v| v / divisor).collect(),
            values,
            scale,
            mode: fam.mode,
            x: fam.x,
            x_star: fam.x_star,
            l: fam.l,
        })
    }
}

/// 1 + sin(2πτ)/(2πτ).
pub fn so_even_limit(tau: f64) -> f64 {
    let x = 2.0 * PI * tau;
    if x.abs() < 1e-8 {
        2.0 - x * x / 6.0
    } else {
        1.0 + x.sin() / x
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Unscaled,
    Scaled,
}

/// A sampled prediction together with the divisors applied to it.
#[derive(Debug, Clone)]
pub struct DensityCurve {
    pub grid: Vec<f64>,
    /// density_at (unscaled) or scaled_density values.
    pub values: Vec<f64>,
    /// values / (X*·L) when unscaled; equal to values when scaled.
    pub normalized: Vec<f64>,
    pub scale: Scale,
    pub mode: DensityMode,
    pub x: f64,
    pub x_star: f64,
    pub l: f64,
}

impl DensityCurve {
    /// Normalized value at t by linear interpolation on the grid.
    pub fn normalized_at(&self, t: f64) -> Result<f64> {
        let g = &self.grid;
        if t < g[0] || t > *g.last().unwrap() {
            return Err(Error::domain(MODULE, format!("t = {t} outside the sampled grid")));
        }
        if g.len() == 1 {
            return Ok(self.normalized[0]);
        }
        let i = g.partition_point(|&x| x <= t).clamp(1, g.len() - 1);
        let (x0, x1) = (g[i - 1], g[i]);
        let w = if x1 > x0 { (t - x0) / (x1 - x0) } else { 0.0 };
        Ok(self.normalized[i - 1] * (1.0 - w) + self.normalized[i] * w)
    }

    /// S₁(f) = 2∫₀^∞ f(t)·density(t) dt for an even test function, by the
    /// trapezoid rule on the grid.
    pub fn s1(&self, f: impl Fn(f64) -> f64) -> f64 {
        let mut acc = 0.0;
        for i in 1..self.grid.len() {
            let h = self.grid[i] - self.grid[i - 1];
            acc += 0.5 * h * (f(self.grid[i - 1]) * self.values[i - 1] + f(self.grid[i]) * self.values[i]);
        }
        2.0 * acc
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "# normalization: X*={} L={:.15e}", self.x_star, self.l)?;
        self.write_header(out)?;
        self.write_rows(out)
    }

    pub fn write_header<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        let col = match self.scale {
            Scale::Unscaled => "t",
            Scale::Scaled => "tau",
        };
        writeln!(out, "{col},density,normalized_density,mode,X")
    }

    pub fn write_rows<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        for i in 0..self.grid.len() {
            writeln!(
                out,
                "{:.15e},{:.15e},{:.15e},{},{:.6e}",
                self.grid[i],
                self.values[i],
                self.normalized[i],
                self.mode.name(),
                self.x
            )?;
        }
        Ok(())
    }
}

/// Least-squares fit of y ≈ Σ c_j x^j, returning the c_j.
pub fn poly_fit(x: &[f64], y: &[f64], degree: usize) -> Vec<f64> {
    let n = degree + 1;
    let mut a = vec![vec![0.0; n + 1]; n];
    for (xi, yi) in x.iter().zip(y) {
        let pows: Vec<f64> = (0..n).map(|j| xi.powi(j as i32)).collect();
        for r in 0..n {
            for c in 0..n {
                a[r][c] += pows[r] * pows[c];
            }
            a[r][n] += pows[r] * yi;
        }
    }
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..=n {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    (0..n).map(|r| a[r][n] / a[r][r]).collect()
}
