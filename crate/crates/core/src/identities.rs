//! A fixed battery of internal consistency checks with their residuals.

use num_complex::Complex64 as C64;

use crate::curve::{hecke_power, CurveData};
use crate::discriminant::{enumerate_family, family_log_sum};
use crate::error::Result;
use crate::ratios::{ArithFactor, RatiosContext, SumMode};

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub residual: f64,
    pub tolerance: f64,
}

impl IdentityCheck {
    pub fn passed(&self) -> bool {
        self.residual.is_finite() && self.residual < self.tolerance
    }

    pub fn to_json(&self) -> String {
        format!(
            "{{\"identity\":\"{}\",\"residual\":{:e},\"tolerance\":{:e},\"pass\":{}}}",
            self.name,
            self.residual,
            self.tolerance,
            self.passed()
        )
    }
}

pub const DIAGONAL_POINTS: [(f64, f64); 4] = [(0.0, 0.0), (0.05, 0.0), (0.0, 0.1), (0.03, 0.02)];

/// max |A_E(r,r) − 1| over the standard points.
pub fn diagonal_residual(arith: &ArithFactor) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (re, im) in DIAGONAL_POINTS {
        let r = C64::new(re, im);
        worst = worst.max((arith.a_factor(r, r)? - 1.0).norm());
    }
    Ok(worst)
}

/// |A¹(0,0) + B′(0)/2|.
pub fn relation_residual(arith: &ArithFactor) -> Result<f64> {
    let a1 = arith.a1(C64::new(0.0, 0.0))?.re;
    let (b1, _) = arith.b_derivs()?;
    Ok((a1 + 0.5 * b1).abs())
}

/// Largest gap between λ(p^m) and U_m(λ(p)/2) = sin((m+1)θ)/sin θ.
pub fn hecke_residual(curve: &CurveData, p_max: u64, m_max: u32) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for p in crate::arith::primes_up_to(p_max.min(curve.p_max()) as usize) {
        if curve.is_bad(p) {
            continue;
        }
        let l = curve.lambda_p(p)?;
        let th = (0.5 * l).clamp(-1.0, 1.0).acos();
        for m in 0..=m_max {
            let u = if th.sin().abs() < 1e-9 {
                let s = if l > 0.0 { 1.0 } else { (-1f64).powi(m as i32) };
                s * f64::from(m + 1)
            } else {
                (f64::from(m + 1) * th).sin() / th.sin()
            };
            worst = worst.max((hecke_power(l, m) - u).abs());
        }
    }
    Ok(worst)
}

/// Runs the suite at the given cutoffs and family size.
pub fn run_suite(curve: &CurveData, prime_cutoff: u64, sym_cutoff: u64, x: u64) -> Result<Vec<IdentityCheck>> {
    let ctx = RatiosContext::new(curve, prime_cutoff, sym_cutoff)?;
    let fam = enumerate_family(curve, x);
    let (exact, em) = family_log_sum(&fam)?;
    let r = C64::new(0.05, 0.0);
    let ld_exact = ctx.log_deriv_average(r, &fam, SumMode::Exact)?;
    let ld_em = ctx.log_deriv_average(r, &fam, SumMode::EulerMaclaurin)?;
    Ok(vec![
        IdentityCheck {
            name: "diagonal_A_rr_equals_1",
            residual: diagonal_residual(&ctx.arith)?,
            tolerance: 1e-8,
        },
        IdentityCheck {
            name: "relation_A1_plus_half_Bprime",
            residual: relation_residual(&ctx.arith)?,
            tolerance: 1e-6,
        },
        IdentityCheck {
            name: "hecke_powers_vs_chebyshev",
            residual: hecke_residual(curve, 1000, 12)?,
            tolerance: 1e-9,
        },
        IdentityCheck {
            name: "euler_maclaurin_log_sum",
            residual: ((exact - em) / exact).abs(),
            tolerance: 1e-2,
        },
        IdentityCheck {
            name: "euler_maclaurin_log_deriv_average",
            residual: ((ld_exact - ld_em) / ld_exact).norm(),
            tolerance: 1e-2,
        },
    ])
}
