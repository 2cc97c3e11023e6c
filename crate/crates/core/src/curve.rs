//! Elliptic curve reduction, point counting and normalized Hecke
//! coefficients λ(n) = a_n/√n.

use std::fmt::Write as _;
use std::path::Path;

use crate::arith::{binomial, factorize, is_prime, primes_up_to, smallest_factor_table};
use crate::error::{Error, Result};

const MODULE: &str = "curve-arith";

/// Largest coefficient table `lambda_table` will build.
pub const MAX_TABLE: usize = 50_000_000;

/// A rational elliptic curve of prime conductor with cached a_p.
#[derive(Debug, Clone)]
pub struct CurveData {
    pub label: String,
    /// Weierstrass coefficients [a1, a2, a3, a4, a6].
    pub a: [i64; 5],
    pub m: u64,
    /// Root number of the untwisted L-function.
    pub omega: i32,
    ap: Vec<i32>,
    /// a_p come from the level-11 newform rather than point counting.
    newform: bool,
}

/// Primes up to this are always point-counted; for conductor 11 they also
/// decide whether the newform route applies.
const NEWFORM_CHECK: u64 = 2000;

fn discriminant(a: &[i64; 5]) -> i128 {
    let [a1, a2, a3, a4, a6] = a.map(i128::from);
    let b2 = a1 * a1 + 4 * a2;
    let b4 = 2 * a4 + a1 * a3;
    let b6 = a3 * a3 + 4 * a6;
    let b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4;
    -b2 * b2 * b8 - 8 * b4 * b4 * b4 - 27 * b6 * b6 + 9 * b2 * b4 * b6
}

impl CurveData {
    /// Builds the curve, tabulates a_p for p ≤ `p_max` and determines the
    /// root number numerically from the untwisted functional equation.
    pub fn new(label: &str, a: [i64; 5], m: u64, p_max: u64) -> Result<Self> {
        if !is_prime(m) {
            return Err(Error::arg(MODULE, format!("conductor {m} is not prime")));
        }
        let disc = discriminant(&a);
        if disc == 0 {
            return Err(Error::arg(MODULE, "singular curve"));
        }
        if disc % i128::from(m) != 0 {
            return Err(Error::arg(MODULE, format!("{m} does not divide the discriminant {disc}")));
        }
        let mut curve = CurveData {
            label: label.to_string(),
            a,
            m,
            omega: 0,
            ap: Vec::new(),
            newform: false,
        };
        let p_max = p_max.max(m).max(97);
        if m == 11 {
            let lim = p_max.min(NEWFORM_CHECK);
            let counted = ap_table(&a, lim);
            let coeffs = crate::newform::level11_coefficients(lim as usize)?;
            curve.newform = primes_up_to(lim as usize)
                .iter()
                .all(|&p| i64::from(counted[p as usize]) == coeffs[p as usize]);
            curve.ap = counted;
        }
        curve.ap = curve.ap_source(p_max)?;
        curve.omega = crate::lfun::untwisted_root_number(&curve)?;
        Ok(curve)
    }

    /// a_p for p ≤ p_max, reusing what is already tabulated.
    fn ap_source(&self, p_max: u64) -> Result<Vec<i32>> {
        if (p_max as usize) < self.ap.len() {
            return Ok(self.ap[..=p_max as usize].to_vec());
        }
        if !self.newform {
            return Ok(ap_table(&self.a, p_max));
        }
        let coeffs = crate::newform::level11_coefficients(p_max as usize)?;
        let mut out = vec![0i32; p_max as usize + 1];
        for p in primes_up_to(p_max as usize) {
            out[p as usize] = coeffs[p as usize] as i32;
        }
        Ok(out)
    }

    /// Whether a_p beyond the point-counted range come from the newform.
    pub fn uses_newform(&self) -> bool {
        self.newform
    }

    /// y² + y = x³ − x², conductor 11.
    pub fn e11(p_max: u64) -> Self {
        CurveData::new("11a3", [0, -1, 1, 0, 0], 11, p_max).expect("E11 is a valid curve")
    }

    /// Primes covered by the cached table.
    pub fn p_max(&self) -> u64 {
        self.ap.len() as u64 - 1
    }

    pub fn a_p(&self, p: u64) -> Result<i64> {
        if (p as usize) < self.ap.len() {
            if !is_prime(p) {
                return Err(Error::arg(MODULE, format!("{p} is not prime")));
            }
            return Ok(i64::from(self.ap[p as usize]));
        }
        count_points_mod_p(&self.a, p)
    }

    /// λ(p) = a_p/√p.
    pub fn lambda_p(&self, p: u64) -> Result<f64> {
        Ok(self.a_p(p)? as f64 / (p as f64).sqrt())
    }

    pub fn is_bad(&self, p: u64) -> bool {
        p == self.m
    }

    pub fn lambda_prime_power(&self, p: u64, m: u32) -> Result<f64> {
        let l = self.lambda_p(p)?;
        Ok(if self.is_bad(p) {
            l.powi(m as i32)
        } else {
            hecke_power(l, m)
        })
    }

    /// Principal character mod M.
    pub fn psi_m(&self, n: u64) -> f64 {
        if n % self.m == 0 {
            0.0
        } else {
            1.0
        }
    }

    /// μ_E(n): multiplicative with μ(p) = −λ(p), μ(p²) = ψ_M(p), zero beyond.
    pub fn mu_e(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return Err(Error::arg(MODULE, "mu_E(0)"));
        }
        let mut acc = 1.0;
        for (p, e) in factorize(n) {
            acc *= match e {
                1 => -self.lambda_p(p)?,
                2 => self.psi_m(p),
                _ => 0.0,
            };
        }
        Ok(acc)
    }

    /// [0, λ(1), ..., λ(n_max)].
    pub fn lambda_table(&self, n_max: usize) -> Result<Vec<f64>> {
        if n_max > MAX_TABLE {
            return Err(Error::Resource {
                module: MODULE,
                msg: format!("coefficient table of {n_max} entries exceeds {MAX_TABLE}"),
            });
        }
        let n_max = n_max.max(1);
        let extra = if (n_max as u64) > self.p_max() {
            Some(self.ap_source(n_max as u64)?)
        } else {
            None
        };
        let ap = extra.as_ref().unwrap_or(&self.ap);
        let spf = smallest_factor_table(n_max);
        let mut lam = vec![0.0; n_max + 1];
        lam[1] = 1.0;
        for n in 2..=n_max {
            let p = spf[n] as usize;
            let mut q = n / p;
            let mut e = 1;
            while q % p == 0 {
                q /= p;
                e += 1;
            }
            let lp = f64::from(ap[p]) / (p as f64).sqrt();
            let lpe = if p as u64 == self.m {
                lp.powi(e)
            } else {
                hecke_power(lp, e as u32)
            };
            lam[n] = lpe * lam[q];
        }
        Ok(lam)
    }

    /// Writes the a_p cache file.
    pub fn write_cache(&self, path: &Path) -> Result<()> {
        let mut s = String::new();
        let [a1, a2, a3, a4, a6] = self.a;
        let _ = writeln!(s, "# curve M={} a=[{a1},{a2},{a3},{a4},{a6}]", self.m);
        for p in primes_up_to(self.p_max() as usize) {
            let _ = writeln!(s, "{p} {}", self.ap[p as usize]);
        }
        std::fs::write(path, s).map_err(|e| Error::io(path, e))
    }

    /// Reads a cache file written by [`CurveData::write_cache`], checking the
    /// header against this curve and every entry against a fresh count.
    pub fn verify_cache(&self, path: &Path) -> Result<usize> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let [a1, a2, a3, a4, a6] = self.a;
        let header = format!("# curve M={} a=[{a1},{a2},{a3},{a4},{a6}]", self.m);
        let perr = |line: usize, msg: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            msg,
        };
        let mut n = 0;
        for (i, line) in text.lines().enumerate() {
            if i == 0 {
                if line.trim() != header {
                    return Err(perr(1, format!("expected header `{header}`")));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let (Some(p), Some(a), None) = (it.next(), it.next(), it.next()) else {
                return Err(perr(i + 1, "expected `p a_p`".into()));
            };
            let p: u64 = p.parse().map_err(|_| perr(i + 1, format!("bad prime `{p}`")))?;
            let a: i64 = a.parse().map_err(|_| perr(i + 1, format!("bad a_p `{a}`")))?;
            if self.a_p(p)? != a {
                return Err(perr(i + 1, format!("a_{p} = {a} disagrees with point count")));
            }
            n += 1;
        }
        Ok(n)
    }
}

/// Exponents above this use the three-term Hecke relation instead; the
/// binomial sums cancel catastrophically once C(m, m/2) nears 1/ε.
const BINOMIAL_MAX_EXP: u32 = 12;

/// λ(p^m) at a good prime from λ(p) by the binomial recursion.
pub fn hecke_power(l: f64, m: u32) -> f64 {
    if m > BINOMIAL_MAX_EXP {
        let (mut a, mut b) = (1.0, l);
        for _ in 1..m {
            (a, b) = (b, l * b - a);
        }
        return b;
    }
    // values for smaller exponents of the same parity are needed
    let mut even = vec![1.0];
    let mut odd = vec![l];
    let half = m / 2;
    let c = |n: u32, k: i64| if k < 0 { 0.0 } else { binomial(n, k as u32) };
    for j in 1..=half {
        let n = 2 * j;
        let mut v = l.powi(n as i32);
        for r in 0..j {
            let k = i64::from(j - r);
            v -= (c(n, k) - c(n, k - 1)) * even[r as usize];
        }
        even.push(v);
        let n = 2 * j + 1;
        let mut v = l.powi(n as i32);
        for r in 0..j {
            let k = i64::from(j - r);
            v -= (c(n, k) - c(n, k - 1)) * odd[r as usize];
        }
        odd.push(v);
    }
    if m % 2 == 0 {
        even[half as usize]
    } else {
        odd[half as usize]
    }
}

/// a_p = p + 1 − #E(F_p), counting every point of the reduction including
/// the singular one when p divides the discriminant.
pub fn count_points_mod_p(a: &[i64; 5], p: u64) -> Result<i64> {
    if !is_prime(p) {
        return Err(Error::arg(MODULE, format!("{p} is not prime")));
    }
    let mut buf = Vec::new();
    Ok(count_with_buffer(a, p, &mut buf))
}

fn count_with_buffer(a: &[i64; 5], p: u64, chi: &mut Vec<i8>) -> i64 {
    if p == 2 {
        let mut n = 1;
        for x in 0..2i64 {
            for y in 0..2i64 {
                let lhs = y * y + a[0] * x * y + a[2] * y;
                let rhs = x * x * x + a[1] * x * x + a[3] * x + a[4];
                if (lhs - rhs).rem_euclid(2) == 0 {
                    n += 1;
                }
            }
        }
        return 3 - n;
    }
    let pu = p as usize;
    chi.clear();
    chi.resize(pu, -1);
    chi[0] = 0;
    for x in 1..=(pu - 1) / 2 {
        chi[(x * x) % pu] = 1;
    }
    let md = |v: i64| v.rem_euclid(p as i64) as u64;
    let [a1, a2, a3, a4, a6] = *a;
    // D(x) = 4x^3 + b2 x^2 + 2 b4 x + b6
    let b2 = a1 * a1 + 4 * a2;
    let b4 = 2 * a4 + a1 * a3;
    let b6 = a3 * a3 + 4 * a6;
    let d = |x: i64| 4 * x * x * x + b2 * x * x + 2 * b4 * x + b6;
    let mut v = md(d(0));
    let mut d1 = md(d(1) - d(0));
    let mut d2 = md(d(2) - 2 * d(1) + d(0));
    let d3 = md(24);
    let add = |x: u64, y: u64| {
        let s = x + y;
        if s >= p {
            s - p
        } else {
            s
        }
    };
    let mut sum = 0i64;
    for _ in 0..p {
        sum += i64::from(chi[v as usize]);
        v = add(v, d1);
        d1 = add(d1, d2);
        d2 = add(d2, d3);
    }
    -sum
}

/// a_p for every prime up to `p_max`, indexed by p.
fn ap_table(a: &[i64; 5], p_max: u64) -> Vec<i32> {
    let primes = primes_up_to(p_max as usize);
    #[cfg(feature = "parallel")]
    let vals: Vec<i64> = {
        use rayon::prelude::*;
        primes
            .par_iter()
            .map_init(Vec::new, |buf, &p| count_with_buffer(a, p, buf))
            .collect()
    };
    #[cfg(not(feature = "parallel"))]
    let vals: Vec<i64> = {
        let mut buf = Vec::new();
        primes.iter().map(|&p| count_with_buffer(a, p, &mut buf)).collect()
    };
    let mut out = vec![0i32; p_max as usize + 1];
    for (p, v) in primes.iter().zip(vals) {
        out[*p as usize] = v as i32;
    }
    out
}
