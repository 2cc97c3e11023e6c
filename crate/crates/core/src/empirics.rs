//! Histograms of computed zeros, theory minus data, and the discrepancy
//! statistic Q_Δ(t, X) = log|Δ(t, X)| / log X.

use std::io::Write;

use crate::density::{DensityCurve, DensityMode, DensityModel, FamilyView, Scale};
use crate::discriminant::{log_conductor, TwistFamily};
use crate::error::{Error, Result};
use crate::lfun::ZeroDataset;

const MODULE: &str = "empirics";

/// Sample heights used for Q_Δ unless others are given.
pub const DEFAULT_SAMPLE_T: [f64; 7] = [0.01, 0.02, 0.03, 0.04, 0.05, 0.4, 0.6];

/// What a normalized height was divided by.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalization {
    pub n_even: usize,
    pub l: f64,
    pub binwidth: f64,
}

#[derive(Debug, Clone)]
pub struct Histogram {
    pub x: u64,
    pub t_max: f64,
    pub counts: Vec<u64>,
    pub normalized: Vec<f64>,
    pub norm: Normalization,
    /// Twists with a zero at the centre, and those zeros counted with order.
    pub central_twists: usize,
    pub central_zeros: u64,
}

impl Histogram {
    pub fn bin_lo(&self, i: usize) -> f64 {
        i as f64 * self.norm.binwidth
    }

    pub fn bin_hi(&self, i: usize) -> f64 {
        (i + 1) as f64 * self.norm.binwidth
    }

    pub fn bin_mid(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.norm.binwidth
    }

    /// Index of the bin containing t; bins are (lo, hi], so t = 0 is outside.
    pub fn bin_of(&self, t: f64) -> Result<usize> {
        let i = (t / self.norm.binwidth).ceil() as usize;
        if t <= 0.0 || i == 0 || i > self.counts.len() {
            return Err(Error::arg(MODULE, format!("t = {t} outside the histogram (0, {}]", self.bin_hi(self.counts.len() - 1))));
        }
        Ok(i - 1)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Merges each run of `factor` adjacent bins.
    pub fn rebin(&self, factor: usize) -> Result<Histogram> {
        if factor == 0 {
            return Err(Error::arg(MODULE, "rebin factor 0"));
        }
        let counts: Vec<u64> = self.counts.chunks(factor).map(|c| c.iter().sum()).collect();
        let norm = Normalization {
            binwidth: self.norm.binwidth * factor as f64,
            ..self.norm
        };
        Ok(Histogram {
            normalized: normalize(&counts, &norm),
            counts,
            norm,
            ..self.clone()
        })
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(
            out,
            "# normalization: N_even={} L={:.15e} binwidth={} central_twists={} central_zeros={}",
            self.norm.n_even, self.norm.l, self.norm.binwidth, self.central_twists, self.central_zeros
        )?;
        writeln!(out, "bin_lo,bin_hi,count,normalized")?;
        for i in 0..self.counts.len() {
            writeln!(
                out,
                "{:.10},{:.10},{},{:.15e}",
                self.bin_lo(i),
                self.bin_hi(i),
                self.counts[i],
                self.normalized[i]
            )?;
        }
        Ok(())
    }
}

fn normalize(counts: &[u64], n: &Normalization) -> Vec<f64> {
    let div = n.n_even as f64 * n.binwidth * n.l;
    counts.iter().map(|&c| c as f64 / div).collect()
}

/// Histogram of the positive ordinates of twists with d ≤ x.
pub fn build_histogram(zeros: &ZeroDataset, binwidth: f64, x: u64) -> Result<Histogram> {
    if !(binwidth > 0.0) {
        return Err(Error::arg(MODULE, format!("binwidth {binwidth} must be positive")));
    }
    let recs: Vec<_> = zeros.records.iter().filter(|r| r.d <= x).collect();
    if recs.is_empty() {
        return Err(Error::Empty(format!("{MODULE}: no zero records with d <= {x}")));
    }
    let nbins = ((zeros.t_max / binwidth).ceil() as usize).max(1);
    let mut counts = vec![0u64; nbins];
    for r in &recs {
        for &g in &r.zeros {
            if g > 0.0 && g <= zeros.t_max {
                let i = ((g / binwidth).ceil() as usize).clamp(1, nbins) - 1;
                counts[i] += 1;
            }
        }
    }
    let norm = Normalization {
        n_even: recs.len(),
        l: log_conductor(zeros.m, x as f64),
        binwidth,
    };
    Ok(Histogram {
        x,
        t_max: zeros.t_max,
        normalized: normalize(&counts, &norm),
        counts,
        norm,
        central_twists: recs.iter().filter(|r| r.order0 > 0).count(),
        central_zeros: recs.iter().map(|r| u64::from(r.order0)).sum(),
    })
}

/// Checks that the dataset holds exactly the family members up to x.
pub fn check_coverage(zeros: &ZeroDataset, family: &TwistFamily, x: u64) -> Result<()> {
    let have: Vec<u64> = zeros.records.iter().map(|r| r.d).filter(|&d| d <= x).collect();
    let want: Vec<u64> = family.members.iter().copied().filter(|&d| d <= x).collect();
    if have != want {
        let missing = want.iter().filter(|d| have.binary_search(d).is_err()).count();
        return Err(Error::NormalizationMismatch(format!(
            "zero data holds {} twists with d <= {x}, family has {} ({missing} missing)",
            have.len(),
            want.len()
        )));
    }
    Ok(())
}

fn check_norm(theory: &DensityCurve, data: &Histogram) -> Result<()> {
    let same_l = (theory.l - data.norm.l).abs() <= 1e-12 * data.norm.l;
    if theory.scale != Scale::Unscaled || theory.x_star != data.norm.n_even as f64 || !same_l {
        return Err(Error::NormalizationMismatch(format!(
            "theory X*={} L={} ({:?}) vs data N_even={} L={}",
            theory.x_star, theory.l, theory.scale, data.norm.n_even, data.norm.l
        )));
    }
    Ok(())
}

/// Normalized theory at the midpoint of the bin containing t, minus the
/// normalized data in that bin.
pub fn discrepancy(t: f64, theory: &DensityCurve, data: &Histogram) -> Result<f64> {
    check_norm(theory, data)?;
    let i = data.bin_of(t)?;
    Ok(theory.normalized_at(data.bin_mid(i))? - data.normalized[i])
}

/// Mean |theory − data| over bins whose midpoint lies in [lo, hi], with the
/// theory sampled at the bin midpoints.
pub fn mean_abs_dev(theory: &DensityCurve, data: &Histogram, lo: f64, hi: f64) -> Result<f64> {
    check_norm(theory, data)?;
    let mut acc = 0.0;
    let mut n = 0usize;
    for i in 0..data.counts.len() {
        let mid = data.bin_mid(i);
        if mid >= lo && mid <= hi {
            acc += (theory.normalized_at(mid)? - data.normalized[i]).abs();
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::Empty(format!("{MODULE}: no bins in [{lo}, {hi}]")));
    }
    Ok(acc / n as f64)
}

/// Mean of the normalized prediction over the grid points in [lo, hi].
pub fn plateau_level(theory: &DensityCurve, lo: f64, hi: f64) -> Result<f64> {
    let v: Vec<f64> = theory
        .grid
        .iter()
        .zip(&theory.normalized)
        .filter(|(t, _)| **t >= lo && **t <= hi)
        .map(|(_, v)| *v)
        .collect();
    if v.is_empty() {
        return Err(Error::Empty(format!("{MODULE}: no grid points in [{lo}, {hi}]")));
    }
    Ok(v.iter().sum::<f64>() / v.len() as f64)
}

/// Q_Δ; None where Δ = 0.
pub fn q_delta(delta: f64, x: f64) -> Option<f64> {
    (delta != 0.0).then(|| delta.abs().ln() / x.ln())
}

#[derive(Debug, Clone)]
pub struct DiscrepancySeries {
    pub t: Vec<f64>,
    pub x: Vec<u64>,
    /// delta[i][j] at t[i], x[j].
    pub delta: Vec<Vec<f64>>,
    pub q: Vec<Vec<Option<f64>>>,
}

impl DiscrepancySeries {
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "t,X,delta,q_delta")?;
        for (i, &t) in self.t.iter().enumerate() {
            for (j, &x) in self.x.iter().enumerate() {
                let q = self.q[i][j].map_or(String::new(), |v| format!("{v:.15e}"));
                writeln!(out, "{t},{x},{:.15e},{q}", self.delta[i][j])?;
            }
        }
        Ok(())
    }

    pub fn row(&self, t: f64) -> Option<usize> {
        self.t.iter().position(|&s| s == t)
    }
}

/// Inputs shared by every (t, X) pair of a sweep.
pub struct SweepInputs<'a> {
    pub model: &'a DensityModel,
    pub family: &'a TwistFamily,
    pub zeros: &'a ZeroDataset,
    pub binwidth: f64,
    pub mode: DensityMode,
}

/// Δ and Q_Δ over t_list × x_grid.
pub fn q_sweep(t_list: &[f64], x_grid: &[u64], inp: &SweepInputs) -> Result<DiscrepancySeries> {
    if t_list.is_empty() || x_grid.is_empty() {
        return Err(Error::arg(MODULE, "empty t list or X grid"));
    }
    if x_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::arg(MODULE, "X grid must be increasing"));
    }
    let mut delta = vec![vec![0.0; x_grid.len()]; t_list.len()];
    for (j, &x) in x_grid.iter().enumerate() {
        let fam = inp.family.truncate(x);
        check_coverage(inp.zeros, &fam, x)?;
        let hist = build_histogram(inp.zeros, inp.binwidth, x)?;
        let mut mids: Vec<f64> = t_list
            .iter()
            .map(|&t| hist.bin_of(t).map(|i| hist.bin_mid(i)))
            .collect::<Result<_>>()?;
        mids.sort_by(f64::total_cmp);
        mids.dedup();
        let view = FamilyView::from_family(&fam, inp.mode)?;
        let theory = inp.model.curve(&mids, &view, Scale::Unscaled)?;
        for (i, &t) in t_list.iter().enumerate() {
            delta[i][j] = discrepancy(t, &theory, &hist)?;
        }
    }
    let q = delta
        .iter()
        .map(|row| row.iter().zip(x_grid).map(|(&d, &x)| q_delta(d, x as f64)).collect())
        .collect();
    Ok(DiscrepancySeries {
        t: t_list.to_vec(),
        x: x_grid.to_vec(),
        delta,
        q,
    })
}

/// Kendall's tau-a between two equally long sequences.
pub fn kendall_tau(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let mut s = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            s += ((a[j] - a[i]) * (b[j] - b[i])).signum();
        }
    }
    if n < 2 {
        0.0
    } else {
        s / (n * (n - 1) / 2) as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_of_one_percent_at_ten_thousand() {
        assert!((q_delta(0.01, 1e4).unwrap() + 0.5).abs() < 1e-15);
        assert!(q_delta(0.0, 1e4).is_none());
    }

    #[test]
    fn kendall_extremes() {
        assert_eq!(kendall_tau(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]), -1.0);
        assert_eq!(kendall_tau(&[1.0, 2.0, 3.0], &[1.0, 5.0, 9.0]), 1.0);
    }
}
