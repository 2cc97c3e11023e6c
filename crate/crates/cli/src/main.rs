mod config;

use std::fs::{self, File, OpenOptions};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use onelevel::curve::CurveData;
use onelevel::density::{so_even_limit, DensityCurve, DensityMode, DensityModel, FamilyView, Scale};
use onelevel::discriminant::{enumerate_family, family_log_sum, write_family_csv};
use onelevel::empirics::{
    build_histogram, check_coverage, mean_abs_dev, plateau_level, q_sweep, SweepInputs, DEFAULT_SAMPLE_T,
};
use onelevel::identities::run_suite;
use onelevel::lfun::{write_record, ZeroDataset, ZeroEngine};

use config::RunConfig;

/// Largest X for which the family is materialized.
const MATERIALIZE_MAX: f64 = 5e7;

#[derive(Parser, Debug)]
#[command(name = "onelevel", version, about = "One-level density of even quadratic twists of an elliptic curve")]
struct Cli {
    #[command(flatten)]
    curve: CurveArgs,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Debug, Clone)]
struct CurveArgs {
    /// Weierstrass coefficients a1,a2,a3,a4,a6.
    #[arg(long, global = true, default_value = "0,-1,1,0,0", allow_hyphen_values = true)]
    a: String,
    /// Prime conductor.
    #[arg(long, global = true, default_value_t = 11)]
    conductor: u64,
    #[arg(long, global = true, default_value = "11a3")]
    label: String,
}

#[derive(Args, Debug, Clone)]
struct Cutoffs {
    /// Prime cutoff for the arithmetic factor.
    #[arg(long, default_value_t = onelevel::ratios::DEFAULT_CUTOFF)]
    prime_cutoff: u64,
    /// Prime cutoff for the symmetric-square Euler product.
    #[arg(long, default_value_t = onelevel::symsquare::DEFAULT_CUTOFF)]
    sym_cutoff: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Predicted density on a t grid, or scaled density for several X.
    Predict(PredictArgs),
    /// Zeros of every even twist up to dmax (resumable).
    Zeros(ZerosArgs),
    /// Histogram, theory minus data, and Q_Δ from a zero file.
    Compare(CompareArgs),
    /// Consistency identities as JSON lines.
    Identities(IdentityArgs),
    /// Family enumeration summary.
    Family(FamilyArgs),
    /// Expansion coefficients a1, a2 and the constants behind them.
    Coeffs(CoeffArgs),
}

#[derive(Args, Debug)]
struct PredictArgs {
    #[arg(long, default_value_t = 40_000.0)]
    x: f64,
    #[arg(long, default_value_t = 30.0)]
    t_max: f64,
    #[arg(long, default_value_t = 0.01)]
    t_step: f64,
    /// exact | euler_maclaurin | closed_form_large_X
    #[arg(long, default_value = "exact")]
    mode: String,
    /// Scaled density τ = tL/π for every X in --x-list.
    #[arg(long)]
    scaled: bool,
    #[arg(long, default_value = "4e4,1e6,1e10,1e20,1e30,1e300")]
    x_list: String,
    #[arg(long, default_value_t = 3.0)]
    tau_max: f64,
    #[arg(long, default_value_t = 0.01)]
    tau_step: f64,
    #[command(flatten)]
    cutoffs: Cutoffs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ZerosArgs {
    #[arg(long, default_value_t = 4000)]
    dmax: u64,
    #[arg(long, default_value_t = 20.0)]
    tmax: f64,
    #[arg(long, default_value = "zeros.txt")]
    out: PathBuf,
    /// Twists searched between file flushes.
    #[arg(long, default_value_t = 32)]
    chunk: usize,
    /// Abort on the first count-gate failure instead of recording it.
    #[arg(long)]
    strict: bool,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[arg(long, default_value = "zeros.txt")]
    zeros: PathBuf,
    /// Family bound; defaults to the X recorded in the zero file.
    #[arg(long)]
    x: Option<u64>,
    #[arg(long, default_value_t = 0.1)]
    binwidth: f64,
    #[arg(long, default_value = "exact")]
    mode: String,
    /// Comma-separated sample heights for Q_Δ.
    #[arg(long)]
    t_list: Option<String>,
    /// Comma-separated increasing X values; default 8 equal steps up to X.
    #[arg(long)]
    x_grid: Option<String>,
    #[command(flatten)]
    cutoffs: Cutoffs,
    #[arg(long, default_value = "compare_out")]
    out_dir: PathBuf,
}

#[derive(Args, Debug)]
struct IdentityArgs {
    #[command(flatten)]
    cutoffs: Cutoffs,
    #[arg(long, default_value_t = 40_000)]
    x: u64,
}

#[derive(Args, Debug)]
struct FamilyArgs {
    #[arg(long, default_value_t = 40_000)]
    x: u64,
    /// Write every fundamental discriminant with its sign here.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CoeffArgs {
    #[command(flatten)]
    cutoffs: Cutoffs,
}

fn main() {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("warning: could not size thread pool: {e}");
        }
    }
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match &cli.cmd {
        Command::Predict(a) => cmd_predict(&cli.curve, a),
        Command::Zeros(a) => cmd_zeros(&cli.curve, a),
        Command::Compare(a) => cmd_compare(&cli.curve, a),
        Command::Identities(a) => cmd_identities(&cli.curve, a),
        Command::Family(a) => cmd_family(&cli.curve, a),
        Command::Coeffs(a) => cmd_coeffs(&cli.curve, a),
    }
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.trim().parse::<T>().map_err(|e| anyhow::anyhow!("bad {what} entry '{p}': {e}")))
        .collect()
}

fn load_curve(c: &CurveArgs, p_max: u64) -> Result<CurveData> {
    let a: Vec<i64> = parse_list(&c.a, "a-invariant")?;
    let a: [i64; 5] = a
        .try_into()
        .map_err(|v: Vec<i64>| anyhow::anyhow!("expected 5 a-invariants, got {}", v.len()))?;
    Ok(CurveData::new(&c.label, a, c.conductor, p_max)?)
}

fn curve_config(cfg: &mut RunConfig, c: &CurveArgs) {
    cfg.set("curve", &c.label).set("a", &c.a).set("M", c.conductor);
}

fn cutoff_config(cfg: &mut RunConfig, c: &Cutoffs) {
    cfg.set("prime_cutoff", c.prime_cutoff).set("sym_cutoff", c.sym_cutoff);
}

fn parse_mode(s: &str) -> Result<DensityMode> {
    DensityMode::parse(s).with_context(|| format!("unknown mode '{s}' (exact | euler_maclaurin | closed_form_large_X)"))
}

fn grid(max: f64, step: f64, what: &str) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(max >= 0.0) {
        bail!("empty {what} grid: max = {max}, step = {step}");
    }
    let n = (max / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| i as f64 * step).collect())
}

fn open_out(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn model_for(c: &CurveArgs, cut: &Cutoffs) -> Result<(CurveData, DensityModel)> {
    let curve = load_curve(c, cut.sym_cutoff.max(cut.prime_cutoff))?;
    let model = DensityModel::new(&curve, cut.prime_cutoff, cut.sym_cutoff)?;
    Ok((curve, model))
}

fn cmd_predict(c: &CurveArgs, a: &PredictArgs) -> Result<()> {
    let mode = parse_mode(&a.mode)?;
    let mut cfg = RunConfig::new("predict");
    curve_config(&mut cfg, c);
    cutoff_config(&mut cfg, &a.cutoffs);
    cfg.set("mode", mode.name()).set("scaled", a.scaled);
    let (curve, model) = model_for(c, &a.cutoffs)?;
    let mut out = open_out(&a.out)?;
    if a.scaled {
        let taus = grid(a.tau_max, a.tau_step, "tau")?;
        let xs: Vec<f64> = parse_list(&a.x_list, "X")?;
        if xs.is_empty() {
            bail!("empty X list");
        }
        cfg.set("x_list", &a.x_list).set("tau_max", a.tau_max).set("tau_step", a.tau_step);
        writeln!(out, "{}", cfg.header())?;
        let mut first = true;
        for &x in &xs {
            let curve_x = scaled_curve(&curve, &model, x, mode, &taus)?;
            if first {
                curve_x.write_header(&mut out)?;
                first = false;
            }
            curve_x.write_rows(&mut out)?;
        }
    } else {
        let ts = grid(a.t_max, a.t_step, "t")?;
        cfg.set("X", a.x).set("t_max", a.t_max).set("t_step", a.t_step);
        writeln!(out, "{}", cfg.header())?;
        let dc = if mode == DensityMode::ClosedFormLargeX {
            model.curve(&ts, &FamilyView::closed_form(curve.m, a.x)?, Scale::Unscaled)?
        } else {
            let fam = materialize(&curve, a.x)?;
            model.curve(&ts, &FamilyView::from_family(&fam, mode)?, Scale::Unscaled)?
        };
        dc.write_csv(&mut out)?;
    }
    out.flush()?;
    Ok(())
}

fn materialize(curve: &CurveData, x: f64) -> Result<onelevel::discriminant::TwistFamily> {
    if !(x >= 1.0) || x > MATERIALIZE_MAX {
        bail!("X = {x:e} cannot be enumerated (limit {MATERIALIZE_MAX:e}); use --mode closed_form_large_X");
    }
    Ok(enumerate_family(curve, x as u64))
}

fn scaled_curve(curve: &CurveData, model: &DensityModel, x: f64, mode: DensityMode, taus: &[f64]) -> Result<DensityCurve> {
    Ok(if mode == DensityMode::ClosedFormLargeX {
        model.curve(taus, &FamilyView::closed_form(curve.m, x)?, Scale::Scaled)?
    } else {
        let fam = materialize(curve, x)?;
        model.curve(taus, &FamilyView::from_family(&fam, mode)?, Scale::Scaled)?
    })
}

fn cmd_zeros(c: &CurveArgs, a: &ZerosArgs) -> Result<()> {
    let curve = load_curve(c, 10_000)?;
    let mut cfg = RunConfig::new("zeros");
    curve_config(&mut cfg, c);
    cfg.set("dmax", a.dmax).set("tmax", a.tmax);
    let fam = enumerate_family(&curve, a.dmax);
    let done = if a.out.exists() {
        let ds = ZeroDataset::read(&a.out)?;
        if ds.m != curve.m || ds.x != a.dmax || ds.t_max != a.tmax {
            bail!(
                "{} holds M={} X={} Tmax={}; refusing to resume with M={} X={} Tmax={}",
                a.out.display(),
                ds.m,
                ds.x,
                ds.t_max,
                curve.m,
                a.dmax,
                a.tmax
            );
        }
        ds.completed()
    } else {
        let ds = ZeroDataset {
            label: c.label.clone(),
            m: curve.m,
            x: a.dmax,
            t_max: a.tmax,
            records: Vec::new(),
        };
        fs::write(&a.out, format!("{}\n{}\n", cfg.header(), ds.header()))
            .with_context(|| format!("cannot create {}", a.out.display()))?;
        Default::default()
    };
    let todo: Vec<u64> = fam.members.iter().copied().filter(|d| !done.contains(d)).collect();
    eprintln!(
        "{} even twists with d <= {}: {} already done, {} to go",
        fam.members.len(),
        a.dmax,
        done.len(),
        todo.len()
    );
    let engine = ZeroEngine::new(&curve, a.dmax, a.tmax)?;
    let mut file = OpenOptions::new()
        .append(true)
        .open(&a.out)
        .with_context(|| format!("cannot append to {}", a.out.display()))?;
    let (mut gate_fail, mut n_done) = (0usize, 0usize);
    for chunk in todo.chunks(a.chunk.max(1)) {
        let mut text = String::new();
        for r in engine.search_many(chunk) {
            let s = r?;
            if !s.gate_ok {
                gate_fail += 1;
                eprintln!(
                    "count gate: d = {} found {} zeros, expected {:.2} +- 1",
                    s.record.d,
                    s.record.zeros.len(),
                    s.expected
                );
                if a.strict {
                    file.write_all(text.as_bytes())?;
                    bail!(onelevel::Error::CountMismatch {
                        d: s.record.d as i64,
                        found: s.record.zeros.len(),
                        expected: s.expected
                    });
                }
            }
            write_record(&mut text, &s.record);
        }
        file.write_all(text.as_bytes())?;
        file.flush()?;
        n_done += chunk.len();
        eprintln!("{n_done}/{} twists done (last d = {})", todo.len(), chunk[chunk.len() - 1]);
    }
    eprintln!("count gate failures: {gate_fail} of {}", todo.len());
    Ok(())
}

fn cmd_compare(c: &CurveArgs, a: &CompareArgs) -> Result<()> {
    let mode = parse_mode(&a.mode)?;
    if mode == DensityMode::ClosedFormLargeX {
        bail!("compare needs a materialized family: use exact or euler_maclaurin");
    }
    if !a.zeros.exists() {
        bail!("zero file not found: expected {}", a.zeros.display());
    }
    let ds = ZeroDataset::read(&a.zeros)?;
    let x = a.x.unwrap_or(ds.x);
    if x > ds.x {
        bail!("X = {x} exceeds the zero file's range {}", ds.x);
    }
    let (curve, model) = model_for(c, &a.cutoffs)?;
    if curve.m != ds.m {
        bail!("zero file is for M = {}, curve has M = {}", ds.m, curve.m);
    }
    let fam = enumerate_family(&curve, x);
    check_coverage(&ds, &fam, x)?;
    let t_list: Vec<f64> = match &a.t_list {
        Some(s) => parse_list(s, "t")?,
        None => DEFAULT_SAMPLE_T.to_vec(),
    };
    let x_grid: Vec<u64> = match &a.x_grid {
        Some(s) => parse_list(s, "X")?,
        None => (1..=8).map(|k| x * k / 8).collect(),
    };
    let mut cfg = RunConfig::new("compare");
    curve_config(&mut cfg, c);
    cutoff_config(&mut cfg, &a.cutoffs);
    cfg.set("zeros", a.zeros.display())
        .set("X", x)
        .set("binwidth", a.binwidth)
        .set("mode", mode.name())
        .set("t_list", join(&t_list))
        .set("x_grid", join(&x_grid));
    fs::create_dir_all(&a.out_dir).with_context(|| format!("cannot create {}", a.out_dir.display()))?;

    let hist = build_histogram(&ds, a.binwidth, x)?;
    let view = FamilyView::from_family(&fam, mode)?;
    let mids: Vec<f64> = (0..hist.counts.len()).map(|i| hist.bin_mid(i)).collect();
    let theory = model.curve(&mids, &view, Scale::Unscaled)?;
    write_file(&a.out_dir.join("histogram.csv"), &cfg, |w| hist.write_csv(w))?;
    write_file(&a.out_dir.join("prediction.csv"), &cfg, |w| theory.write_csv(w))?;

    let series = q_sweep(
        &t_list,
        &x_grid,
        &SweepInputs {
            model: &model,
            family: &fam,
            zeros: &ds,
            binwidth: a.binwidth,
            mode,
        },
    )?;
    write_file(&a.out_dir.join("discrepancy.csv"), &cfg, |w| series.write_csv(w))?;

    let (lo, hi) = (0.5, 15.0f64.min(ds.t_max));
    let mad = mean_abs_dev(&theory, &hist, lo, hi)?;
    let plateau = plateau_level(&theory, lo, hi)?;
    println!("twists: {}  zeros: {}  central double zeros: {}", hist.norm.n_even, hist.total(), hist.central_twists);
    println!(
        "mean |theory - data| on [{lo}, {hi}]: {mad:.5} ({:.2}% of the mean prediction {plateau:.5}, {:.2}% of 1/pi)",
        100.0 * mad / plateau,
        100.0 * mad * std::f64::consts::PI
    );
    println!("outputs in {}", a.out_dir.display());
    Ok(())
}

fn join<T: std::fmt::Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn write_file(path: &Path, cfg: &RunConfig, body: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).with_context(|| format!("cannot create {}", path.display()))?);
    writeln!(w, "{}", cfg.header())?;
    body(&mut w)?;
    w.flush()?;
    Ok(())
}

fn cmd_identities(c: &CurveArgs, a: &IdentityArgs) -> Result<()> {
    let curve = load_curve(c, a.cutoffs.sym_cutoff.max(a.cutoffs.prime_cutoff).max(1000))?;
    let checks = run_suite(&curve, a.cutoffs.prime_cutoff, a.cutoffs.sym_cutoff, a.x)?;
    let mut failed = 0;
    for ch in &checks {
        println!("{}", ch.to_json());
        if !ch.passed() {
            failed += 1;
        }
    }
    if failed > 0 {
        bail!("{failed} identities failed");
    }
    Ok(())
}

fn cmd_family(c: &CurveArgs, a: &FamilyArgs) -> Result<()> {
    let curve = load_curve(c, 1000)?;
    let fam = enumerate_family(&curve, a.x);
    let (exact, em) = family_log_sum(&fam)?;
    println!("X = {}", a.x);
    println!("fundamental discriminants in (1, X]: {}", fam.fundamental);
    println!("twists with a sign: {}  even: {}  odd: {}  M | d: {}", fam.total_twists(), fam.x_star(), fam.odd, fam.excluded);
    println!("sum of log conductors: exact {exact:.6}  euler-maclaurin {em:.6}");
    if let Some(p) = &a.csv {
        let mut cfg = RunConfig::new("family");
        curve_config(&mut cfg, c);
        cfg.set("X", a.x);
        write_file(p, &cfg, |w| write_family_csv(&curve, a.x, w))?;
    }
    Ok(())
}

fn cmd_coeffs(c: &CurveArgs, a: &CoeffArgs) -> Result<()> {
    let (_, model) = model_for(c, &a.cutoffs)?;
    let mut cfg = RunConfig::new("coeffs");
    curve_config(&mut cfg, c);
    cutoff_config(&mut cfg, &a.cutoffs);
    let k = &model.central;
    let (a1, a2) = model.expansion_coeffs();
    println!("{}", cfg.header());
    println!("sym2_L1={:.12}", k.sym_l);
    println!("sym2_dlog1={:.12}", k.sym_lp);
    println!("sym2_d2_over_L1={:.12}", k.sym_lpp);
    println!("A1_00={:.12}", k.a1);
    println!("B1={:.12}", k.b1);
    println!("B2={:.12}", k.b2);
    println!("a1={a1:.12}");
    println!("a2={a2:.12}");
    println!("so_even_limit_at_0.25={:.12}", so_even_limit(0.25));
    Ok(())
}
