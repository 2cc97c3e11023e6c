use onelevel::curve::CurveData;
use onelevel::density::{DensityMode, DensityModel, FamilyView, Scale};
use onelevel::discriminant::{enumerate_family, log_conductor, TwistFamily};
use onelevel::empirics::{
    build_histogram, check_coverage, discrepancy, kendall_tau, q_delta, q_sweep, Histogram,
    Normalization, SweepInputs,
};
use onelevel::lfun::{ZeroDataset, ZeroRecord};
use onelevel::Error;
use proptest::prelude::*;

fn curve() -> &'static CurveData {
    static C: std::sync::OnceLock<CurveData> = std::sync::OnceLock::new();
    C.get_or_init(|| CurveData::e11(20_000))
}

fn model() -> &'static DensityModel {
    static M: std::sync::OnceLock<DensityModel> = std::sync::OnceLock::new();
    M.get_or_init(|| DensityModel::new(curve(), 2000, 20_000).unwrap())
}

/// Deterministic fake ordinates for every family member.
fn synthetic(fam: &TwistFamily, t_max: f64) -> ZeroDataset {
    let records = fam
        .members
        .iter()
        .map(|&d| {
            let step = 0.37 + (d % 7) as f64 * 0.05;
            let zeros = (1..)
                .map(|k| k as f64 * step - 0.01 * (d % 3) as f64)
                .take_while(|&z| z <= t_max)
                .collect();
            ZeroRecord { d, order0: if d % 5 == 0 { 2 } else { 0 }, zeros }
        })
        .collect();
    ZeroDataset { label: "11a3".into(), m: 11, x: fam.x, t_max, records }
}

#[test]
fn histogram_counts_and_normalization() {
    let fam = enumerate_family(curve(), 600);
    let ds = synthetic(&fam, 10.0);
    let h = build_histogram(&ds, 0.1, 600).unwrap();
    let n_zeros: usize = ds.records.iter().map(|r| r.zeros.len()).sum();
    assert_eq!(h.total() as usize, n_zeros);
    assert_eq!(h.counts.len(), 100);
    assert_eq!(h.norm.n_even, fam.members.len());
    assert!((h.norm.l - log_conductor(11, 600.0)).abs() < 1e-15);
    let mass: f64 = h.normalized.iter().sum::<f64>() * h.norm.binwidth;
    let want = n_zeros as f64 / (fam.members.len() as f64 * h.norm.l);
    assert!((mass - want).abs() < 1e-12 * want);
    assert_eq!(h.central_twists, fam.members.iter().filter(|&&d| d % 5 == 0).count());
    assert_eq!(h.central_zeros, 2 * h.central_twists as u64);
}

#[test]
fn rebin_preserves_mass() {
    let fam = enumerate_family(curve(), 600);
    let h = build_histogram(&synthetic(&fam, 10.0), 0.1, 600).unwrap();
    let r = h.rebin(4).unwrap();
    assert_eq!(r.total(), h.total());
    assert_eq!(r.counts.len(), 25);
    let m1: f64 = h.normalized.iter().sum::<f64>() * h.norm.binwidth;
    let m2: f64 = r.normalized.iter().sum::<f64>() * r.norm.binwidth;
    assert!((m1 - m2).abs() < 1e-12);
    assert!(h.rebin(0).is_err());
}

#[test]
fn single_bin() {
    let ds = ZeroDataset {
        label: "11a3".into(),
        m: 11,
        x: 5,
        t_max: 1.0,
        records: vec![ZeroRecord { d: 5, order0: 0, zeros: vec![0.2, 0.9] }],
    };
    let h = build_histogram(&ds, 2.0, 5).unwrap();
    assert_eq!(h.counts, vec![2]);
    assert_eq!(h.bin_of(0.5).unwrap(), 0);
    assert!(h.bin_of(0.0).is_err());
    assert!(build_histogram(&ds, 0.0, 5).is_err());
    assert!(build_histogram(&ds, 0.1, 4).is_err());
}

#[test]
fn bins_are_open_on_the_left() {
    let ds = ZeroDataset {
        label: "11a3".into(),
        m: 11,
        x: 5,
        t_max: 1.0,
        records: vec![ZeroRecord { d: 5, order0: 0, zeros: vec![0.5] }],
    };
    let h = build_histogram(&ds, 0.5, 5).unwrap();
    assert_eq!(h.counts, vec![1, 0]);
    assert_eq!(h.bin_of(0.5).unwrap(), 0);
    assert_eq!(h.bin_of(0.5000001).unwrap(), 1);
}

#[test]
fn theory_against_itself_gives_zero() {
    let fam = enumerate_family(curve(), 600);
    let view = FamilyView::from_family(&fam, DensityMode::Exact).unwrap();
    let bw = 0.25;
    let mids: Vec<f64> = (0..8).map(|i| (i as f64 + 0.5) * bw).collect();
    let theory = model().curve(&mids, &view, Scale::Unscaled).unwrap();
    let h = Histogram {
        x: 600,
        t_max: 2.0,
        counts: vec![0; 8],
        normalized: theory.normalized.clone(),
        norm: Normalization { n_even: fam.members.len(), l: view.l, binwidth: bw },
        central_twists: 0,
        central_zeros: 0,
    };
    for t in [0.01, 0.3, 1.0, 1.99] {
        assert_eq!(discrepancy(t, &theory, &h).unwrap(), 0.0);
    }
}

#[test]
fn normalization_mismatch_is_an_error() {
    let fam = enumerate_family(curve(), 600);
    let ds = synthetic(&fam, 5.0);
    let h = build_histogram(&ds, 0.1, 600).unwrap();
    let other = enumerate_family(curve(), 700);
    let view = FamilyView::from_family(&other, DensityMode::Exact).unwrap();
    let theory = model().curve(&[0.05, 0.15], &view, Scale::Unscaled).unwrap();
    assert!(matches!(discrepancy(0.1, &theory, &h), Err(Error::NormalizationMismatch(_))));
    let scaled = model().curve(&[0.05, 0.15], &view, Scale::Scaled).unwrap();
    assert!(discrepancy(0.1, &scaled, &h).is_err());

    let mut partial = ds.clone();
    partial.records.remove(3);
    assert!(matches!(check_coverage(&partial, &fam, 600), Err(Error::NormalizationMismatch(_))));
    assert!(check_coverage(&ds, &fam, 600).is_ok());
}

#[test]
fn sweep_is_reproducible() {
    let fam = enumerate_family(curve(), 800);
    let ds = synthetic(&fam, 2.0);
    let inp = SweepInputs { model: model(), family: &fam, zeros: &ds, binwidth: 0.1, mode: DensityMode::Exact };
    let t = [0.03, 0.4];
    let xs = [400, 600, 800];
    let a = q_sweep(&t, &xs, &inp).unwrap();
    let b = q_sweep(&t, &xs, &inp).unwrap();
    for i in 0..t.len() {
        for j in 0..xs.len() {
            assert_eq!(a.delta[i][j].to_bits(), b.delta[i][j].to_bits());
        }
    }
    let mut buf = Vec::new();
    a.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next(), Some("t,X,delta,q_delta"));
    assert_eq!(text.lines().count(), 1 + t.len() * xs.len());
    assert_eq!(a.row(0.4), Some(1));
    assert!(q_sweep(&t, &[600, 400], &inp).is_err());
    assert!(q_sweep(&[], &xs, &inp).is_err());
}

#[test]
fn q_delta_and_kendall() {
    assert_eq!(q_delta(0.0, 100.0), None);
    let q = q_delta(0.01, 100.0).unwrap();
    assert!((q + 1.0).abs() < 1e-15);
    assert_eq!(kendall_tau(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]), -1.0);
    assert_eq!(kendall_tau(&[1.0, 2.0, 3.0], &[1.0, 5.0, 9.0]), 1.0);
}

proptest! {
    #[test]
    fn bin_of_brackets_t(t in 0.0001f64..10.0, bw in 0.01f64..1.0) {
        let ds = ZeroDataset {
            label: "11a3".into(), m: 11, x: 5, t_max: 10.0,
            records: vec![ZeroRecord { d: 5, order0: 0, zeros: vec![] }],
        };
        let h = build_histogram(&ds, bw, 5).unwrap();
        if let Ok(i) = h.bin_of(t) {
            prop_assert!(h.bin_lo(i) < t + 1e-12 && t <= h.bin_hi(i) + 1e-12);
        }
    }

    #[test]
    fn every_zero_lands_in_one_bin(zs in proptest::collection::vec(0.001f64..5.0, 1..50),
                                   bw in 0.05f64..1.0) {
        let mut zs = zs;
        zs.sort_by(f64::total_cmp);
        zs.dedup();
        let ds = ZeroDataset {
            label: "11a3".into(), m: 11, x: 5, t_max: 5.0,
            records: vec![ZeroRecord { d: 5, order0: 0, zeros: zs.clone() }],
        };
        let h = build_histogram(&ds, bw, 5).unwrap();
        prop_assert_eq!(h.total() as usize, zs.len());
    }
}
