//! Fundamental discriminants, the Kronecker symbol, and the family of even
//! quadratic twists.

use std::io::Write;

use crate::curve::CurveData;
use crate::error::{Error, Result};

const MODULE: &str = "discriminants";

fn has_odd_square_factor(d: u64) -> bool {
    let mut n = d;
    while n % 2 == 0 {
        n /= 2;
    }
    let mut p = 3;
    while p * p <= n {
        if n % (p * p) == 0 {
            return true;
        }
        if n % p == 0 {
            n /= p;
        }
        p += 2;
    }
    false
}

/// d ≠ 1, free of odd square factors, and d ≡ 1 mod 4 or d ≡ 8, 12 mod 16.
pub fn is_fundamental(d: i64) -> bool {
    if d == 0 || d == 1 {
        return false;
    }
    let r4 = d.rem_euclid(4);
    let r16 = d.rem_euclid(16);
    (r4 == 1 || r16 == 8 || r16 == 12) && !has_odd_square_factor(d.unsigned_abs())
}

fn jacobi(mut a: i64, mut n: i64) -> i32 {
    debug_assert!(n > 0 && n % 2 == 1);
    a = a.rem_euclid(n);
    let mut s = 1;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            let r = n % 8;
            if r == 3 || r == 5 {
                s = -s;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            s = -s;
        }
        a %= n;
    }
    if n == 1 {
        s
    } else {
        0
    }
}

/// The Kronecker symbol (d/n).
pub fn kronecker(d: i64, n: i64) -> i32 {
    if n == 0 {
        return i32::from(d == 1 || d == -1);
    }
    let mut s = 1;
    let mut n = n;
    if n < 0 {
        n = -n;
        if d < 0 {
            s = -s;
        }
    }
    let v = n.trailing_zeros();
    n >>= v;
    if v > 0 {
        if d % 2 == 0 {
            return 0;
        }
        if v % 2 == 1 {
            let r = d.rem_euclid(8);
            if r == 3 || r == 5 {
                s = -s;
            }
        }
    }
    s * jacobi(d, n)
}

/// χ_d(n) for n in 0..|d|; the character is periodic with that period.
pub fn chi_table(d: i64) -> Vec<i8> {
    let q = d.unsigned_abs() as i64;
    (0..q).map(|n| kronecker(d, n) as i8).collect()
}

/// Even quadratic twists 0 < d ≤ X of a fixed curve.
#[derive(Debug, Clone)]
pub struct TwistFamily {
    pub m: u64,
    pub omega: i32,
    pub x: u64,
    pub members: Vec<u64>,
    /// Members per residue class mod M, index b in 0..M.
    pub x_star_by_class: Vec<usize>,
    pub fundamental: usize,
    pub odd: usize,
    pub excluded: usize,
}

impl TwistFamily {
    /// X*, the number of even twists.
    pub fn x_star(&self) -> usize {
        self.members.len()
    }

    /// Twists with χ_d(M) ≠ 0, of either sign.
    pub fn total_twists(&self) -> usize {
        self.members.len() + self.odd
    }

    pub fn contains(&self, d: u64) -> bool {
        self.members.binary_search(&d).is_ok()
    }

    /// log(√M d / 2π).
    pub fn log_conductor(&self, d: u64) -> f64 {
        log_conductor(self.m, d as f64)
    }

    /// Members with d ≤ x, as a family of its own.
    pub fn truncate(&self, x: u64) -> TwistFamily {
        let members: Vec<u64> = self.members.iter().copied().filter(|&d| d <= x).collect();
        let mut by_class = vec![0; self.m as usize];
        for &d in &members {
            by_class[(d % self.m) as usize] += 1;
        }
        let rest = |pred: &dyn Fn(u64) -> bool| (1..=x).filter(|&d| pred(d)).count();
        let fundamental = rest(&|d| is_fundamental(d as i64));
        let excluded = rest(&|d| d % self.m == 0 && is_fundamental(d as i64));
        TwistFamily {
            m: self.m,
            omega: self.omega,
            x,
            odd: fundamental - excluded - members.len(),
            members,
            x_star_by_class: by_class,
            fundamental,
            excluded,
        }
    }
}

pub fn log_conductor(m: u64, d: f64) -> f64 {
    ((m as f64).sqrt() * d / (2.0 * std::f64::consts::PI)).ln()
}

/// Sign of the twist by d: χ_d(−M)·ω, or 0 when M | d.
pub fn twist_sign(curve: &CurveData, d: i64) -> i32 {
    kronecker(d, -(curve.m as i64)) * curve.omega
}

/// All fundamental 0 < d ≤ X with χ_d(−M)ω = +1.
pub fn enumerate_family(curve: &CurveData, x: u64) -> TwistFamily {
    let n = x as usize;
    let mut square_free = vec![true; n + 1];
    let mut p = 3usize;
    while p * p <= n {
        let q = p * p;
        let mut k = q;
        while k <= n {
            square_free[k] = false;
            k += q;
        }
        p += 2;
    }
    let m = curve.m;
    let mut members = Vec::new();
    let mut by_class = vec![0usize; m as usize];
    let (mut fundamental, mut odd, mut excluded) = (0, 0, 0);
    for d in 2..=n {
        let r4 = d % 4;
        let r16 = d % 16;
        if !(square_free[d] && (r4 == 1 || r16 == 8 || r16 == 12)) {
            continue;
        }
        fundamental += 1;
        match twist_sign(curve, d as i64) {
            1 => {
                members.push(d as u64);
                by_class[d % m as usize] += 1;
            }
            -1 => odd += 1,
            _ => excluded += 1,
        }
    }
    TwistFamily {
        m,
        omega: curve.omega,
        x,
        members,
        x_star_by_class: by_class,
        fundamental,
        odd,
        excluded,
    }
}

/// (Σ_d log(√M d/2π), X*·[log(√M X/2π) − 1]).
pub fn family_log_sum(family: &TwistFamily) -> Result<(f64, f64)> {
    if family.members.is_empty() {
        return Err(Error::Empty(format!("{MODULE}: family with X = {}", family.x)));
    }
    let exact = family.members.iter().map(|&d| family.log_conductor(d)).sum();
    let xs = family.x_star() as f64;
    let em = xs * (log_conductor(family.m, family.x as f64) - 1.0);
    Ok((exact, em))
}

/// CSV rows `d,chi_d_M,parity` for every fundamental d ≤ X.
pub fn write_family_csv<W: Write>(curve: &CurveData, x: u64, out: &mut W) -> std::io::Result<()> {
    writeln!(out, "d,chi_d_M,parity")?;
    for d in 2..=x as i64 {
        if !is_fundamental(d) {
            continue;
        }
        let chi = kronecker(d, curve.m as i64);
        let parity = match twist_sign(curve, d) {
            1 => "even",
            -1 => "odd",
            _ => "excluded",
        };
        writeln!(out, "{d},{chi},{parity}")?;
    }
    Ok(())
}
