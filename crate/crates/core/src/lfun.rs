//! Twisted L-functions L_E(s, χ_d) on the critical line and their zeros.
//!
//! With Q = √M·d/2π the completed function Λ(s) = Q^s Γ(s+½) L(s, χ_d)
//! satisfies Λ(s) = εΛ(1−s). Rotating the Mellin contour by δ = e^{iφ}
//! gives, for any |φ| < π/2,
//!
//!   Λ(s) = Σ b_n [(Q/n)^s Γ(s+½, nδ/Q) + ε (Q/n)^{1−s} Γ(3/2−s, n/(δQ))]
//!
//! with b_n = λ(n)χ_d(n). At height t the choice φ = π/2 − min(π/2, 14/t)
//! keeps the terms within a factor e^{14} of the result.
//!
//! For even twists on the critical line the two sums are conjugate, so
//! Λ(½+it) = 2 Re Σ b_n F_t(n/Q) with F_t(x) = x^{−½−it} Γ(1+it, xδ).
//! Beyond the first few n the sum is split into blocks on which F_t is
//! smooth in log x; each block is replaced by a Chebyshev quadrature whose
//! weights depend on the coefficients only, so one evaluation costs a few
//! hundred incomplete gamma calls regardless of the conductor.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64 as C64;

use crate::curve::CurveData;
use crate::discriminant::{chi_table, log_conductor, twist_sign};
use crate::error::{Error, Result};
use crate::roots::{brent_root, golden_min};
use crate::special::{digamma, gamma_inc_upper, ln_gamma};

const MODULE: &str = "lfun-zeros";
const PI: f64 = std::f64::consts::PI;

/// Allowed growth of the terms relative to the result, as an exponent.
const ROTATION_BUDGET: f64 = 14.0;
/// Terms are dropped once e^{−x cos φ} is below e^{−TAIL}.
const TAIL: f64 = 39.0;
/// Terms summed directly before the block quadrature starts.
const N_DIRECT: usize = 34;
/// Chebyshev degree per block.
const CHEB_K: usize = 40;
/// Phase budget per block for the n^{−it} factor and for e^{−xδ}.
const BLOCK_PHASE: f64 = 10.0;
/// Below this many terms the whole sum is taken directly.
const DIRECT_ONLY_BELOW: usize = 4000;

/// Rotation angle θ with φ = π/2 − θ.
pub fn theta_at(t: f64) -> f64 {
    if t.abs() * (PI / 2.0) <= ROTATION_BUDGET {
        PI / 2.0
    } else {
        ROTATION_BUDGET / t.abs()
    }
}

/// x-range needed up to height `t_max`.
pub fn x_max(t_max: f64) -> f64 {
    TAIL / theta_at(t_max).sin()
}

/// Coefficients b_n = λ(n)χ_d(n) needed for heights up to `t_max`.
pub fn n_needed(m: u64, d: u64, t_max: f64) -> usize {
    let q = (m as f64).sqrt() * d as f64 / (2.0 * PI);
    (x_max(t_max) * q).ceil() as usize + 1
}

/// Coefficients kept per twist: enough for the zero search and for the
/// rotations used by the sign measurement.
fn table_len(m: u64, d: u64, t_max: f64) -> usize {
    let q = (m as f64).sqrt() * d as f64 / (2.0 * PI);
    n_needed(m, d, t_max).max((42.0 * q).ceil() as usize + 2).max(64)
}

/// Expected number of zeros in (0, T] ignoring any central zero.
pub fn zero_count_estimate(m: u64, d: u64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    (t * log_conductor(m, d as f64) + ln_gamma(C64::new(1.0, t)).im) / PI
}

/// A quadratic twist with its coefficients.
#[derive(Debug, Clone)]
pub struct Twist {
    pub d: u64,
    pub m: u64,
    pub q: f64,
    /// Sign predicted by χ_d(−M)ω.
    pub eps: i32,
    b: Vec<f64>,
}

impl Twist {
    /// `lam` is a table [0, λ(1), λ(2), ...] as built by `lambda_table`.
    pub fn new(curve: &CurveData, lam: &[f64], d: u64, n: usize) -> Result<Self> {
        if lam.len() <= n {
            return Err(Error::TableTooShort {
                have: lam.len().saturating_sub(1),
                need: n,
            });
        }
        let eps = if d == 1 {
            curve.omega
        } else {
            twist_sign(curve, d as i64)
        };
        let chi = if d == 1 { vec![1] } else { chi_table(d as i64) };
        let period = chi.len();
        let b = (0..=n)
            .map(|k| lam[k] * f64::from(chi[k % period]))
            .collect();
        Ok(Twist {
            d,
            m: curve.m,
            q: (curve.m as f64).sqrt() * d as f64 / (2.0 * PI),
            eps,
            b,
        })
    }

    pub fn n_max(&self) -> usize {
        self.b.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.b
    }

    /// (first sum, second sum) of the rotated expansion at s.
    pub fn afe_parts(&self, s: C64, delta: C64) -> Result<(C64, C64)> {
        let cphi = delta.re / delta.norm();
        let need = (TAIL / cphi * self.q).ceil() as usize;
        if need > self.n_max() {
            return Err(Error::TableTooShort {
                have: self.n_max(),
                need,
            });
        }
        let a1 = s + 0.5;
        let a2 = 1.5 - s;
        let mut f = C64::new(0.0, 0.0);
        let mut g = C64::new(0.0, 0.0);
        for n in 1..=need {
            let b = self.b[n];
            if b == 0.0 {
                continue;
            }
            let x = n as f64 / self.q;
            let lx = x.ln();
            f += b * (-s * lx).exp() * gamma_inc_upper(a1, x * delta)?;
            g += b * ((s - 1.0) * lx).exp() * gamma_inc_upper(a2, x / delta)?;
        }
        Ok((f, g))
    }

    /// Λ(s) using the predicted sign.
    pub fn completed_l_at(&self, s: C64, delta: C64) -> Result<C64> {
        let (f, g) = self.afe_parts(s, delta)?;
        Ok(f + f64::from(self.eps) * g)
    }

    /// Λ(½ + it) with the default rotation.
    pub fn completed_l(&self, t: f64) -> Result<C64> {
        let phi = (PI / 2.0 - theta_at(t)) * t.signum();
        self.completed_l_at(C64::new(0.5, t), C64::from_polar(1.0, phi))
    }

    /// Root number solved from two rotation angles, without assuming it.
    pub fn measured_sign(&self) -> Result<f64> {
        let s = C64::new(0.5, 0.4);
        let (f1, g1) = self.afe_parts(s, C64::new(1.0, 0.0))?;
        let (f2, g2) = self.afe_parts(s, C64::from_polar(1.0, 0.3))?;
        let den = g2 - g1;
        if den.norm() < 1e-12 * (g1.norm() + g2.norm()) {
            return Err(Error::Instability {
                module: MODULE,
                msg: format!("sign equations degenerate for d = {}", self.d),
            });
        }
        let e = (f1 - f2) / den;
        if (e.norm() - 1.0).abs() > 1e-4 || e.im.abs() > 1e-4 {
            return Err(Error::Instability {
                module: MODULE,
                msg: format!("measured root number {e} for d = {} is not +-1", self.d),
            });
        }
        Ok(e.re)
    }

    /// Z(t) = Λ(½+it)/(√Q |Γ(1+it)|) by direct summation, so |Z| = |L(½+it)|.
    pub fn z_direct(&self, t: f64) -> Result<f64> {
        self.require_even()?;
        let (f, _) = self.afe_parts_line(t)?;
        Ok(2.0 * f.re / self.z_scale(t))
    }

    fn afe_parts_line(&self, t: f64) -> Result<(C64, C64)> {
        let phi = PI / 2.0 - theta_at(t);
        self.afe_parts(C64::new(0.5, t), C64::from_polar(1.0, phi))
    }

    fn z_scale(&self, t: f64) -> f64 {
        self.q.sqrt() * ln_gamma(C64::new(1.0, t)).re.exp()
    }

    fn require_even(&self) -> Result<()> {
        if self.eps != 1 {
            return Err(Error::NotInFamily(self.d as i64));
        }
        Ok(())
    }

    /// L'/L(½ + r) for real r, from a complex-step derivative of the
    /// unrotated expansion.
    pub fn lvalue_log_deriv(&self, r: f64) -> Result<f64> {
        let s = 0.5 + r;
        let h = 1e-30;
        let one = C64::new(1.0, 0.0);
        let (f, g) = self.afe_parts(C64::new(s, h), one)?;
        let lam = f + f64::from(self.eps) * g;
        if lam.re.abs() < 1e-12 * (f.norm() + g.norm()) {
            return Err(Error::singular(MODULE, format!("zero near s = {s} for d = {}", self.d)));
        }
        let dlog = lam.im / h / lam.re;
        Ok(dlog - self.q.ln() - digamma(C64::new(s + 0.5, 0.0)).re)
    }

    /// Σ_{n ≤ N} b_n n^{−s}, the plain truncated Dirichlet series.
    pub fn dirichlet_partial_sum(&self, s: C64, n: usize) -> C64 {
        (1..=n.min(self.n_max()))
            .map(|k| self.b[k] * (-s * (k as f64).ln()).exp())
            .sum()
    }
}

/// Root number of the untwisted L-function, measured numerically.
pub fn untwisted_root_number(curve: &CurveData) -> Result<i32> {
    let q = (curve.m as f64).sqrt() / (2.0 * PI);
    let n = (TAIL / 0.3f64.cos() * q).ceil() as usize + 2;
    let lam = curve.lambda_table(n)?;
    let tw = Twist::new_raw(1, curve.m, q, 1, &lam[..=n]);
    Ok(tw.measured_sign()?.round() as i32)
}

impl Twist {
    fn new_raw(d: u64, m: u64, q: f64, eps: i32, b: &[f64]) -> Self {
        Twist {
            d,
            m,
            q,
            eps,
            b: b.to_vec(),
        }
    }
}

#[derive(Debug, Clone)]
struct Block {
    /// log x at the two ends of the block.
    la: f64,
    lb: f64,
    /// Quadrature weights at the Chebyshev nodes.
    w: Vec<f64>,
}

/// Fast Z(t) for an even twist, valid for 0 ≤ t ≤ t_max.
#[derive(Debug, Clone)]
pub struct ZEvaluator {
    twist: Twist,
    t_max: f64,
    n_direct: usize,
    blocks: Vec<Block>,
    nodes: Vec<f64>,
}

fn cheb_nodes(k: usize) -> Vec<f64> {
    (0..=k)
        .map(|j| (PI * (j as f64 + 0.5) / (k as f64 + 1.0)).cos())
        .collect()
}

impl ZEvaluator {
    pub fn new(twist: Twist, t_max: f64) -> Result<Self> {
        twist.require_even()?;
        let q = twist.q;
        let xm = x_max(t_max);
        let n_top = (xm * q).ceil() as usize;
        if n_top > twist.n_max() {
            return Err(Error::TableTooShort {
                have: twist.n_max(),
                need: n_top,
            });
        }
        let nodes = cheb_nodes(CHEB_K);
        let kk = CHEB_K + 1;
        let min_block = 4 * kk;
        let mut blocks = Vec::new();
        let mut n_direct = n_top;
        if n_top >= DIRECT_ONLY_BELOW {
            n_direct = N_DIRECT;
            let ratio = (BLOCK_PHASE / t_max.max(1.0)).exp();
            let mut lo = N_DIRECT + 1;
            while lo <= n_top {
                let x0 = lo as f64 / q;
                let x1 = (x0 * ratio).min(x0 + BLOCK_PHASE);
                let mut hi = ((x1 * q).floor() as usize).clamp(lo, n_top);
                if blocks.is_empty() && hi + 1 - lo < min_block {
                    // few integers per block this low: sum them directly
                    n_direct = hi;
                    lo = hi + 1;
                    continue;
                }
                if n_top - hi < min_block {
                    hi = n_top;
                }
                blocks.push(Self::block(&twist.b, q, lo, hi, kk));
                lo = hi + 1;
            }
        }
        Ok(ZEvaluator {
            twist,
            t_max,
            n_direct,
            blocks,
            nodes,
        })
    }

    fn block(b: &[f64], q: f64, lo: usize, hi: usize, kk: usize) -> Block {
        let (la, lb) = ((lo as f64 / q).ln(), (hi as f64 / q).ln());
        // moments M_k = sum b_n T_k(u_n)
        let mut mom = vec![0.0; kk];
        for (n, &bn) in b.iter().enumerate().take(hi + 1).skip(lo) {
            if bn == 0.0 {
                continue;
            }
            let u = if lb > la {
                2.0 * ((n as f64 / q).ln() - la) / (lb - la) - 1.0
            } else {
                0.0
            };
            let (mut t0, mut t1) = (1.0, u);
            mom[0] += bn;
            mom[1] += bn * u;
            for m in mom.iter_mut().skip(2) {
                let t2 = 2.0 * u * t1 - t0;
                *m += bn * t2;
                t0 = t1;
                t1 = t2;
            }
        }
        let w = (0..kk)
            .map(|j| {
                let th = PI * (j as f64 + 0.5) / kk as f64;
                let mut acc = 0.5 * mom[0];
                for (k, mk) in mom.iter().enumerate().skip(1) {
                    acc += mk * (k as f64 * th).cos();
                }
                2.0 / kk as f64 * acc
            })
            .collect();
        Block { la, lb, w }
    }

    pub fn twist(&self) -> &Twist {
        &self.twist
    }

    /// Σ b_n F_t(n/Q), with Λ(½+it) = 2 Re of it.
    fn half_lambda(&self, t: f64) -> Result<C64> {
        if t < 0.0 || t > self.t_max + 1e-9 {
            return Err(Error::domain(MODULE, format!("t = {t} outside [0, {}]", self.t_max)));
        }
        let phi = PI / 2.0 - theta_at(t);
        let delta = C64::from_polar(1.0, phi);
        let a = C64::new(1.0, t);
        let s = C64::new(0.5, t);
        let q = self.twist.q;
        let f = |lx: f64| -> Result<C64> {
            Ok((-s * lx).exp() * gamma_inc_upper(a, lx.exp() * delta)?)
        };
        let mut acc = C64::new(0.0, 0.0);
        for n in 1..=self.n_direct {
            let b = self.twist.b[n];
            if b != 0.0 {
                acc += b * f((n as f64 / q).ln())?;
            }
        }
        for blk in &self.blocks {
            let half = 0.5 * (blk.lb - blk.la);
            let mid = 0.5 * (blk.lb + blk.la);
            for (u, w) in self.nodes.iter().zip(&blk.w) {
                acc += *w * f(mid + half * u)?;
            }
        }
        Ok(acc)
    }

    /// Λ(½ + it).
    pub fn lambda(&self, t: f64) -> Result<f64> {
        Ok(2.0 * self.half_lambda(t)?.re)
    }

    /// Hardy-type real function with |Z(t)| = |L(½+it, χ_d)|.
    pub fn z(&self, t: f64) -> Result<f64> {
        Ok(self.lambda(t)? / self.twist.z_scale(t))
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }
}

/// Zeros of one twist in (0, T_max].
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroRecord {
    pub d: u64,
    /// 0, or 2 when Z vanishes at the centre.
    pub order0: u32,
    pub zeros: Vec<f64>,
}

/// Outcome of a zero search, including the count gate.
#[derive(Debug, Clone)]
pub struct ZeroSearch {
    pub record: ZeroRecord,
    pub expected: f64,
    pub gate_ok: bool,
    pub refined: bool,
}

fn brent_on(ev: &ZEvaluator, a: f64, b: f64, fa: f64, fb: f64, xtol: f64) -> Result<f64> {
    let mut err = None;
    let r = brent_root(
        |t| match ev.z(t) {
            Ok(v) => v,
            Err(e) => {
                err = Some(e);
                0.0
            }
        },
        a,
        b,
        fa,
        fb,
        xtol,
    );
    match err {
        Some(e) => Err(e),
        None => Ok(r),
    }
}

/// Sign changes on a uniform grid, plus close pairs hidden between grid
/// points: wherever |Z| has a same-sign local minimum, Z is minimized
/// toward zero and, if it crosses, both crossings are refined.
fn scan(ev: &ZEvaluator, t_start: f64, t_end: f64, step: f64, xtol: f64) -> Result<Vec<f64>> {
    let n = ((t_end - t_start) / step).ceil().max(1.0) as usize;
    let h = (t_end - t_start) / n as f64;
    let ts: Vec<f64> = (0..=n)
        .map(|i| if i == n { t_end } else { t_start + i as f64 * h })
        .collect();
    let zs = ts.iter().map(|&t| ev.z(t)).collect::<Result<Vec<f64>>>()?;
    let mut zeros = Vec::new();
    for i in 1..=n {
        let (z0, z1) = (zs[i - 1], zs[i]);
        if z0 == 0.0 && i > 1 {
            zeros.push(ts[i - 1]);
        } else if z0 * z1 < 0.0 {
            zeros.push(brent_on(ev, ts[i - 1], ts[i], z0, z1, xtol)?);
        }
    }
    for i in 1..n {
        let (za, zb, zc) = (zs[i - 1], zs[i], zs[i + 1]);
        if za * zb <= 0.0 || zb * zc <= 0.0 || zb.abs() >= za.abs() || zb.abs() >= zc.abs() {
            continue;
        }
        let sg = zb.signum();
        let mut err = None;
        let (tm, fm) = golden_min(
            |t| match ev.z(t) {
                Ok(v) => sg * v,
                Err(e) => {
                    err = Some(e);
                    0.0
                }
            },
            ts[i - 1],
            ts[i + 1],
            xtol,
        );
        if let Some(e) = err {
            return Err(e);
        }
        if fm < 0.0 {
            let zm = sg * fm;
            zeros.push(brent_on(ev, ts[i - 1], tm, za, zm, xtol)?);
            zeros.push(brent_on(ev, tm, ts[i + 1], zm, zc, xtol)?);
        }
    }
    zeros.sort_by(f64::total_cmp);
    Ok(zeros)
}

/// Zero search on a prepared evaluator with the count gate, retrying once on
/// a grid of half the spacing.
pub fn search_zeros(ev: &ZEvaluator, t_max: f64) -> Result<ZeroSearch> {
    let tw = ev.twist();
    let lq = tw.q.ln();
    let step = (0.25 * PI / lq.max(1.0)).min(0.25);
    let scale = [0.25, 0.5, 0.75]
        .iter()
        .map(|&t| ev.z(t).map(f64::abs))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let z0 = ev.z(0.0)?;
    let order0 = if z0.abs() < 1e-6 * scale { 2 } else { 0 };
    let t_start = if order0 > 0 { 1e-3 } else { 0.0 };
    let expected = zero_count_estimate(tw.m, tw.d, t_max) - f64::from(order0) / 2.0;
    let xtol = 1e-7;
    let mut zeros = scan(ev, t_start, t_max, step, xtol)?;
    let mut refined = false;
    let ok = |z: &[f64]| (z.len() as f64 - expected).abs() <= 1.0;
    if !ok(&zeros) {
        refined = true;
        zeros = scan(ev, t_start, t_max, 0.5 * step, xtol)?;
    }
    let gate_ok = ok(&zeros);
    Ok(ZeroSearch {
        record: ZeroRecord {
            d: tw.d,
            order0,
            zeros,
        },
        expected,
        gate_ok,
        refined,
    })
}

/// Shared coefficient table for zero computations over a range of d.
#[derive(Debug, Clone)]
pub struct ZeroEngine<'a> {
    pub curve: &'a CurveData,
    pub t_max: f64,
    lam: Vec<f64>,
}

impl<'a> ZeroEngine<'a> {
    pub fn new(curve: &'a CurveData, d_max: u64, t_max: f64) -> Result<Self> {
        if t_max <= 0.0 || t_max > 50.0 {
            return Err(Error::arg(MODULE, format!("T_max = {t_max} outside (0, 50]")));
        }
        let n = table_len(curve.m, d_max.max(1), t_max);
        Ok(ZeroEngine {
            curve,
            t_max,
            lam: curve.lambda_table(n)?,
        })
    }

    pub fn lambda_table(&self) -> &[f64] {
        &self.lam
    }

    pub fn twist(&self, d: u64) -> Result<Twist> {
        let n = table_len(self.curve.m, d, self.t_max);
        Twist::new(self.curve, &self.lam, d, n)
    }

    pub fn evaluator(&self, d: u64) -> Result<ZEvaluator> {
        let tw = self.twist(d)?;
        if tw.eps != 1 {
            return Err(Error::NotInFamily(d as i64));
        }
        ZEvaluator::new(tw, self.t_max)
    }

    pub fn search(&self, d: u64) -> Result<ZeroSearch> {
        search_zeros(&self.evaluator(d)?, self.t_max)
    }

    /// Zero ordinates of d in (0, T_max]; a count-gate failure after the
    /// retry is an error.
    pub fn find_zeros(&self, d: u64) -> Result<ZeroRecord> {
        let s = self.search(d)?;
        if !s.gate_ok {
            return Err(Error::CountMismatch {
                d: d as i64,
                found: s.record.zeros.len(),
                expected: s.expected,
            });
        }
        Ok(s.record)
    }

    /// Searches every d in `ds`, in parallel when enabled, returning results
    /// in input order.
    pub fn search_many(&self, ds: &[u64]) -> Vec<Result<ZeroSearch>> {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            ds.par_iter().map(|&d| self.search(d)).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            ds.iter().map(|&d| self.search(d)).collect()
        }
    }

    /// L'/L(½ + r, χ_d).
    pub fn lvalue_log_deriv(&self, d: u64, r: f64) -> Result<f64> {
        if r <= 0.0 {
            return Err(Error::arg(MODULE, "r must be positive"));
        }
        self.twist(d)?.lvalue_log_deriv(r)
    }
}

/// A set of zero records with the run parameters that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroDataset {
    pub label: String,
    pub m: u64,
    pub x: u64,
    pub t_max: f64,
    pub records: Vec<ZeroRecord>,
}

impl ZeroDataset {
    pub fn header(&self) -> String {
        format!(
            "# curve={} M={} X={} Tmax={}",
            self.label, self.m, self.x, self.t_max
        )
    }

    pub fn to_text(&self) -> String {
        let mut s = self.header();
        s.push('\n');
        for r in &self.records {
            write_record(&mut s, r);
        }
        s
    }

    pub fn completed(&self) -> BTreeSet<u64> {
        self.records.iter().map(|r| r.d).collect()
    }

    /// Parses either the native multi-record format or a single list of
    /// ordinates headed `# d=<d>`. Unknown `#` lines are ignored.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let perr = |line: usize, msg: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            msg,
        };
        let mut ds = ZeroDataset {
            label: String::new(),
            m: 0,
            x: 0,
            t_max: 0.0,
            records: Vec::new(),
        };
        let mut cur: Option<ZeroRecord> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let ln = i + 1;
            if line.is_empty() {
                if let Some(r) = cur.take() {
                    ds.records.push(r);
                }
                continue;
            }
            if let Some(h) = line.strip_prefix('#') {
                let h = h.trim();
                if h.starts_with("curve=") {
                    for kv in h.split_whitespace() {
                        let (k, v) = kv
                            .split_once('=')
                            .ok_or_else(|| perr(ln, format!("bad header field `{kv}`")))?;
                        let bad = |_| perr(ln, format!("bad value in `{kv}`"));
                        match k {
                            "curve" => ds.label = v.to_string(),
                            "M" => ds.m = v.parse().map_err(bad)?,
                            "X" => ds.x = v.parse().map_err(bad)?,
                            "Tmax" => {
                                ds.t_max = v.parse().map_err(|_| perr(ln, format!("bad `{kv}`")))?
                            }
                            _ => {}
                        }
                    }
                } else if let Some(d) = h.strip_prefix("d=") {
                    if let Some(r) = cur.take() {
                        ds.records.push(r);
                    }
                    let d = d.trim().parse().map_err(|_| perr(ln, format!("bad d `{d}`")))?;
                    cur = Some(ZeroRecord {
                        d,
                        order0: 0,
                        zeros: Vec::new(),
                    });
                }
                continue;
            }
            if let Some(rest) = line.strip_prefix("d=") {
                if let Some(r) = cur.take() {
                    ds.records.push(r);
                }
                let mut it = rest.split_whitespace();
                let d = it
                    .next()
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| perr(ln, "bad record header".into()))?;
                let order0 = it
                    .next()
                    .and_then(|v| v.strip_prefix("order0="))
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| perr(ln, "missing order0".into()))?;
                cur = Some(ZeroRecord {
                    d,
                    order0,
                    zeros: Vec::new(),
                });
                continue;
            }
            let v: f64 = line
                .parse()
                .map_err(|_| perr(ln, format!("bad ordinate `{line}`")))?;
            match cur.as_mut() {
                Some(r) => r.zeros.push(v),
                None => return Err(perr(ln, "ordinate before any record header".into())),
            }
        }
        if let Some(r) = cur.take() {
            ds.records.push(r);
        }
        for r in &ds.records {
            if r.zeros.windows(2).any(|w| w[1] <= w[0]) || r.zeros.iter().any(|&z| z <= 0.0) {
                return Err(perr(0, format!("ordinates for d = {} not positive and increasing", r.d)));
            }
        }
        Ok(ds)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }
}

/// One record in the native format, followed by a blank line.
pub fn write_record(out: &mut String, r: &ZeroRecord) {
    let _ = writeln!(out, "d={} order0={}", r.d, r.order0);
    for z in &r.zeros {
        let _ = writeln!(out, "{z:.12}");
    }
    out.push('\n');
}
