use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use attractor_mfpt::analysis::{
    compare_with_theory, fit_all, load_records, persist_records, reproduce_table1, run_sweep_with,
    write_records_csv, write_regression_csv, write_table1_csv, SweepSpec,
};
use attractor_mfpt::dynamics::coexisting_fixed_points;
use attractor_mfpt::engine::{
    default_oracle_spacing, empirical_density_1d, write_samples_jsonl, EscapeProblem, KernelOracle,
    MfptEstimate,
};
use attractor_mfpt::path::{reduced_system_for, trace_valley_path, PathMethod, PathOptions};
use attractor_mfpt::theory::{write_prediction_csv, WkbDensity};
use attractor_mfpt::{
    fixed_points, potential, MapParams64, NoiseStream, State2D, TheoryPrediction,
};

mod config;

use config::{out_dir, Overrides};

#[derive(Debug, Parser)]
#[command(
    name = "attractor-mfpt",
    version,
    about = "Escape times between competing attractors of a noisy coupled map"
)]
struct Cli {
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, clap::Args)]
struct Point {
    /// tau1 / tau2
    #[arg(long, default_value_t = 1.0)]
    tau12: f64,
}

#[derive(Debug, Clone, clap::Args)]
struct NoisyPoint {
    #[command(flatten)]
    point: Point,
    /// tau / epsilon
    #[arg(long, default_value_t = 2.0, conflicts_with = "epsilon")]
    ratio: f64,
    /// Noise variance; overrides --ratio
    #[arg(long)]
    epsilon: Option<f64>,
}

impl NoisyPoint {
    fn epsilon(&self, spec: &SweepSpec) -> f64 {
        self.epsilon.unwrap_or(spec.tau / self.ratio)
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Method {
    Manifold,
    Chord,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the critical points of the noiseless map
    FixedPoints {
        #[command(flatten)]
        point: Point,
    },
    /// Export the valley path from the +x fixed point to its saddle as CSV
    Path {
        #[command(flatten)]
        point: Point,
        #[arg(long, value_enum, default_value = "manifold")]
        method: Method,
        /// Arclength spacing of path vertices
        #[arg(long, default_value_t = 1e-3)]
        spacing: f64,
    },
    /// Potential on a square grid, as CSV
    PotentialSurface {
        #[command(flatten)]
        point: Point,
        /// Half-width of the grid in rescaled coordinates
        #[arg(long, default_value_t = 2.0)]
        extent: f64,
        /// Grid points per axis
        #[arg(long, default_value_t = 101)]
        n: usize,
    },
    /// Monte Carlo escape time at one parameter point
    Mfpt {
        #[command(flatten)]
        at: NoisyPoint,
        /// Also write per-trial samples as JSON lines
        #[arg(long)]
        samples: bool,
    },
    /// Exact escape time of the reduced one-dimensional map
    Oracle {
        #[command(flatten)]
        at: NoisyPoint,
        /// Grid spacing; defaults to sqrt(epsilon) / 10
        #[arg(long)]
        spacing: Option<f64>,
    },
    /// Empirical quasi-stationary density against the WKB form
    Density {
        #[command(flatten)]
        point: Point,
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
        #[arg(long, default_value_t = 10_000_000)]
        steps: u64,
        #[arg(long, default_value_t = 80)]
        bins: usize,
    },
    /// Closed-form barrier, slope, prefactor and predicted ln T
    Predict {
        #[command(flatten)]
        point: Point,
    },
    /// Run the configured sweep and store its records
    Sweep,
    /// Fit stored records
    Regress {
        /// Records file; defaults to <out>/records.jsonl
        #[arg(long)]
        records: Option<PathBuf>,
        /// Weight points by 1 / stderr^2
        #[arg(long)]
        weighted: bool,
    },
    /// Sweep, fit and compare every series with theory
    Table1 {
        #[arg(long)]
        weighted: bool,
    },
}

fn create(path: &std::path::Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn params(spec: &SweepSpec, tau12: f64, epsilon: f64) -> Result<MapParams64> {
    Ok(spec.params(tau12, epsilon)?)
}

fn print_estimate(est: &MfptEstimate) {
    println!("trials      {}", est.trials);
    println!("<ln T>      {:.6} +- {:.6}", est.mean_ln_t, est.stderr_ln_t);
    println!("<T>         {:.3} +- {:.3}", est.mean_t, est.stderr_t);
    println!("censored    {}", est.censored);
    println!("exits +/-   {} / {}", est.plus_exits, est.minus_exits);
    if !est.reliable() {
        println!(
            "warning: estimate unreliable (censored fraction {:.3})",
            est.censored_fraction()
        );
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let spec = cli.overrides.resolve()?;
    match cli.command {
        Command::FixedPoints { point } => {
            let p = params(&spec, point.tau12, 0.0)?;
            let fps = fixed_points(&p);
            println!(
                "tau12 = {}, a = {}, b = {}, coexistence = {}",
                point.tau12, p.a, p.b, fps.coexistence
            );
            println!(
                "{:<9} {:>12} {:>12} {:>12} {:>12} {:>12}",
                "kind", "X", "Y", "U", "mu1", "mu2"
            );
            for c in &fps.points {
                let s = c.location;
                println!(
                    "{:<9} {:>12.6} {:>12.6} {:>12.6} {:>12.6} {:>12.6}",
                    format!("{:?}", c.kind),
                    s.x,
                    s.y,
                    potential(&s, &p),
                    c.eigenvalues[0],
                    c.eigenvalues[1]
                );
            }
        }
        Command::Path {
            point,
            method,
            spacing,
        } => {
            let p = params(&spec, point.tau12, 0.0)?;
            let fps = coexisting_fixed_points(&p)?;
            let opts = PathOptions {
                method: match method {
                    Method::Manifold => PathMethod::UnstableManifold,
                    Method::Chord => PathMethod::Chord,
                },
                spacing,
                ..PathOptions::default()
            };
            let sp = fps.saddle(true, true).context("no saddle")?;
            let path = trace_valley_path(&p, fps.x_axis(true), sp, &opts)?;
            let file = out_dir(&spec)?.join(format!("path_tau12_{}.csv", point.tau12));
            let mut w = create(&file)?;
            path.write_csv(&p, &mut w)?;
            w.flush()?;
            println!(
                "{} vertices, length {:.6} -> {}",
                path.len(),
                path.total_length(),
                file.display()
            );
        }
        Command::PotentialSurface { point, extent, n } => {
            if n < 2 {
                bail!("--n must be at least 2");
            }
            let p = params(&spec, point.tau12, 0.0)?;
            let file = out_dir(&spec)?.join(format!("potential_tau12_{}.csv", point.tau12));
            let mut w = create(&file)?;
            writeln!(w, "X,Y,U")?;
            let h = 2.0 * extent / (n - 1) as f64;
            for i in 0..n {
                for j in 0..n {
                    let s = State2D::rescaled(-extent + i as f64 * h, -extent + j as f64 * h);
                    writeln!(w, "{},{},{}", s.x, s.y, potential(&s, &p))?;
                }
            }
            w.flush()?;
            println!("{}x{} grid -> {}", n, n, file.display());
        }
        Command::Mfpt { at, samples } => {
            let eps = at.epsilon(&spec);
            let prob = EscapeProblem::new(params(&spec, at.point.tau12, eps)?)?;
            let trials = prob.run_trials(spec.trials, spec.seed, spec.cap)?;
            let est = MfptEstimate::from_samples(&trials);
            println!(
                "tau12 {}  tau {}  epsilon {}  tau/epsilon {}",
                at.point.tau12,
                spec.tau,
                eps,
                spec.tau / eps
            );
            print_estimate(&est);
            if samples {
                let file = out_dir(&spec)?.join("samples.jsonl");
                let mut w = create(&file)?;
                write_samples_jsonl(&trials, &mut w)?;
                w.flush()?;
                println!("samples -> {}", file.display());
            }
        }
        Command::Oracle { at, spacing } => {
            let eps = at.epsilon(&spec);
            let p = params(&spec, at.point.tau12, 0.0)?;
            let sys = reduced_system_for(&p, &PathOptions::default())?;
            let h = spacing.unwrap_or_else(|| default_oracle_spacing(eps));
            let oracle = KernelOracle::new(&sys, eps, h)?;
            let t = oracle.mean_exit_time()?;
            let m = oracle.exit_moments()?;
            println!(
                "tau12 {}  tau {}  epsilon {}  grid {} cells",
                at.point.tau12,
                spec.tau,
                eps,
                oracle.len()
            );
            println!("t(s_fp)     {t:.6}");
            println!("ln t        {:.6}", t.ln());
            println!("<ln T>      {:.6}", m.mean_ln_t);
        }
        Command::Density {
            point,
            epsilon,
            steps,
            bins,
        } => {
            let p = params(&spec, point.tau12, 0.0)?;
            let sys = reduced_system_for(&p, &PathOptions::default())?;
            let mut noise = NoiseStream::new(spec.seed, 0, epsilon)?;
            let hist = empirical_density_1d(&sys, &mut noise, steps, bins);
            let wkb = WkbDensity::new(&sys, epsilon);
            let reference: Vec<f64> = (0..bins)
                .map(|i| {
                    let (lo, hi) = hist.edges(i);
                    wkb.bin_average(lo, hi)
                })
                .collect();
            let file = out_dir(&spec)?.join(format!("density_tau12_{}.csv", point.tau12));
            let mut w = create(&file)?;
            writeln!(w, "s_lo,s_hi,s,empirical,wkb")?;
            for (i, (d, q)) in hist.density.iter().zip(&reference).enumerate() {
                let (lo, hi) = hist.edges(i);
                writeln!(w, "{},{},{},{},{}", lo, hi, hist.center(i), d, q)?;
            }
            w.flush()?;
            println!(
                "L1 distance {:.5}  -> {}",
                hist.l1_distance(&reference),
                file.display()
            );
        }
        Command::Predict { point } => {
            let p = params(&spec, point.tau12, 0.0)?;
            let sys = reduced_system_for(&p, &PathOptions::default())?;
            let pred = TheoryPrediction::new(&p, &sys)?;
            println!(
                "tau12 {}  a {}  b {}  tau {}",
                point.tau12, p.a, p.b, spec.tau
            );
            println!("U(SP)       {:.6}", pred.u_sp);
            println!("U(FP)       {:.6}", pred.u_fp);
            println!("dU          {:.6}", pred.delta_u);
            println!("slope       {:.6}", pred.slope);
            println!("prefactor   {:.6}", pred.prefactor);
            let rows: Vec<_> = spec
                .ratio_list
                .iter()
                .map(|q| (p.with_epsilon(spec.tau / q), pred))
                .collect();
            for (pe, t) in &rows {
                println!(
                    "tau/eps {:>5}: ln T = {:.6}",
                    spec.tau / pe.epsilon,
                    t.ln_t(spec.tau, pe.epsilon)
                );
            }
            let file = out_dir(&spec)?.join(format!("predict_tau12_{}.csv", point.tau12));
            let mut w = create(&file)?;
            write_prediction_csv(&rows, &mut w)?;
            w.flush()?;
        }
        Command::Sweep => {
            let dir = out_dir(&spec)?;
            let jsonl = dir.join("records.jsonl");
            let mut n = 0;
            let records = run_sweep_with(&spec, |r| {
                n += 1;
                println!(
                    "{:>3} tau12 {:<5} tau/eps {:<5} <ln T> {:.4} +- {:.4} censored {}",
                    n, r.tau12, r.ratio, r.mean_ln_t, r.stderr_ln_t, r.censored
                );
            })?;
            persist_records(&records, &jsonl)?;
            let mut w = create(&dir.join("records.csv"))?;
            write_records_csv(&records, &mut w)?;
            w.flush()?;
            println!("{} records appended to {}", records.len(), jsonl.display());
        }
        Command::Regress { records, weighted } => {
            let dir = out_dir(&spec)?;
            let path = records.unwrap_or_else(|| dir.join("records.jsonl"));
            let (recs, warnings) =
                load_records(&path).with_context(|| format!("loading {}", path.display()))?;
            for w in &warnings {
                eprintln!("warning: {}:{}: {}", path.display(), w.line, w.message);
            }
            let fits = fit_all(&recs, weighted)?;
            println!(
                "{:>6} {:>9} {:>9} {:>9} {:>9} {:>7} {:>3}",
                "tau12", "slope", "+-", "ln C", "+-", "r2", "n"
            );
            for f in &fits {
                println!(
                    "{:>6} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>7.4} {:>3}",
                    f.tau12,
                    f.slope,
                    f.slope_stderr,
                    f.intercept,
                    f.intercept_stderr,
                    f.r_squared,
                    f.points_used
                );
            }
            let mut w = create(&dir.join("regression.csv"))?;
            write_regression_csv(&fits, &mut w)?;
            w.flush()?;
        }
        Command::Table1 { weighted } => {
            let dir = out_dir(&spec)?;
            let mut table = reproduce_table1(&spec)?;
            if weighted {
                table.rows = compare_with_theory(&spec, &table.records, true)?;
            }
            let jsonl = dir.join("table1_records.jsonl");
            if jsonl.exists() {
                std::fs::remove_file(&jsonl)?;
            }
            persist_records(&table.records, &jsonl)?;
            let mut w = create(&dir.join("table1.csv"))?;
            write_table1_csv(&table.rows, &mut w)?;
            w.flush()?;
            println!(
                "{:>6} {:>8} {:>9} {:>8} {:>8}  result",
                "tau12", "theory", "sim", "+-", "tol"
            );
            for r in &table.rows {
                println!(
                    "{:>6} {:>8.4} {:>9.4} {:>8.4} {:>8.4}  {}",
                    r.tau12,
                    r.theory_slope,
                    r.fit.slope,
                    r.fit.slope_stderr,
                    r.tolerance,
                    if r.pass { "pass" } else { "FAIL" }
                );
            }
            if !table.all_pass() {
                eprintln!("table1: at least one row outside tolerance");
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
