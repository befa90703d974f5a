use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use cppm::evaluation::sweep::{fig1_runs, sweep_fig3, sweep_fig4, SweepOptions, SweepRow};
use cppm::evaluation::{
    cvar_cr, hard_family_report, monte_carlo_runs, seed_grid_welfare, verify_lemma, Lemma, RatioReport, SeedResolution,
};
use cppm::mechanism::{run_cppm, Baselines};
use cppm::model::{read_instance, read_profile, write_profile, Instance, MarketParams, PricingProfile};
use cppm::pricing::{design, DesignMode, DesignRequest, ReservationPolicy, DEFAULT_GRID_SIZE};

#[derive(Parser)]
#[command(name = "cppm", version, about = "Correlated posted-price mechanisms for online k-selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Calibrate a pricing design and write it as a profile file.
    Design(DesignArgs),
    /// Run a profile or a baseline on an instance file.
    Simulate(SimulateArgs),
    /// Ratio of OPT to the welfare CVaR over a set of instances.
    Evaluate(EvaluateArgs),
    /// Check utilization monotonicity, the floor property and rounding.
    Verify(VerifyArgs),
    /// Regenerate the data behind a figure.
    Reproduce(ReproduceArgs),
}

#[derive(Args)]
struct DesignArgs {
    #[arg(long, value_parser = parse_mode)]
    mode: DesignMode,
    #[arg(long = "L")]
    lower: f64,
    #[arg(long = "U")]
    upper: f64,
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Price-change cap; defaults to 0 for neutral and static, k-1 otherwise.
    #[arg(long)]
    cap: Option<usize>,
    /// CVaR tail probability; 1 is risk neutral.
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    #[arg(long, default_value_t = DEFAULT_GRID_SIZE)]
    grid: usize,
    /// `even`, `ceil-first`, or a comma-separated list of units per level.
    #[arg(long, value_parser = parse_reservation)]
    reservation: Option<ReservationPolicy>,
    #[arg(long, default_value = "profile.json")]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algo {
    Cppm,
    RStatic,
    DDynamic,
    RDynamic,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    profile: PathBuf,
    #[arg(long)]
    instance: PathBuf,
    /// Evaluate at the midpoints of N equal seed cells.
    #[arg(long, conflicts_with_all = ["seed", "runs"])]
    seed_grid: Option<usize>,
    /// Evaluate at a single seed in [0, 1].
    #[arg(long, conflicts_with = "runs")]
    seed: Option<f64>,
    /// With --seed, write one row per buyer instead of a summary.
    #[arg(long, requires = "seed")]
    trace: bool,
    #[arg(long, value_enum, default_value_t = Algo::Cppm)]
    algo: Algo,
    /// Number of independent runs; needs --rng.
    #[arg(long, requires = "rng")]
    runs: Option<usize>,
    #[arg(long)]
    rng: Option<u64>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    profile: PathBuf,
    /// Instance files; may be repeated.
    #[arg(long, required_unless_present = "hard_family")]
    instance: Vec<PathBuf>,
    /// Use the staircase family with lattice step --epsilon.
    #[arg(long, requires = "epsilon")]
    hard_family: bool,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Tail probability; defaults to the one the profile was designed for.
    #[arg(long)]
    delta: Option<f64>,
    /// Use N equal seed cells instead of the exact breakpoint cells.
    #[arg(long)]
    seed_grid: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    profile: PathBuf,
    #[arg(long)]
    instance: PathBuf,
    /// `all`, `monotonicity`, `floor` or `rounding`.
    #[arg(long, default_value = "all")]
    lemma: String,
    #[arg(long, default_value_t = 1001)]
    resolution: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Figure {
    Fig1,
    Fig3,
    Fig4,
}

#[derive(Args)]
struct ReproduceArgs {
    #[arg(long, value_enum)]
    fig: Figure,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Pricing grid size.
    #[arg(long)]
    grid: Option<usize>,
    /// fig1: runs per baseline.
    #[arg(long, default_value_t = 10_000)]
    runs: usize,
    /// fig1: generator seed.
    #[arg(long)]
    rng: Option<u64>,
    /// fig3/fig4: also report the worst ratio over the staircase family.
    #[arg(long)]
    with_ratio: bool,
    #[arg(long, default_value_t = 200)]
    lattice_steps: usize,
}

/// Failures that count as numerical rather than usage errors.
#[derive(Debug)]
struct LemmaFailed(usize);

impl std::fmt::Display for LemmaFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} property check(s) failed", self.0)
    }
}

impl std::error::Error for LemmaFailed {}

fn parse_mode(s: &str) -> Result<DesignMode, String> {
    s.parse().map_err(|e: cppm::Error| e.to_string())
}

fn parse_reservation(s: &str) -> Result<ReservationPolicy, String> {
    match s {
        "even" => Ok(ReservationPolicy::EvenSplit),
        "ceil-first" => Ok(ReservationPolicy::CeilFirst),
        _ => s
            .split(',')
            .map(|p| p.trim().parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map(ReservationPolicy::Explicit)
            .map_err(|e| format!("bad reservation {s:?}: {e}")),
    }
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn cmd_design(a: DesignArgs) -> Result<()> {
    let cap = match (a.cap, a.mode) {
        (Some(c), _) => c,
        (None, DesignMode::Neutral | DesignMode::Static) => 0,
        (None, DesignMode::FullyDynamic) => a.k.saturating_sub(1),
        (None, DesignMode::DeltaDynamic) => bail!("--cap is required for delta-dynamic"),
    };
    let params = MarketParams::new(a.lower, a.upper, a.k, cap, a.delta)?;
    let mut req = DesignRequest::new(params).with_grid_size(a.grid);
    if let Some(r) = a.reservation {
        req = req.with_reservation(r);
    }
    let profile = design(a.mode, &req)?;
    write_profile(&profile, &a.out).with_context(|| format!("writing {}", a.out.display()))?;
    println!("alpha={}", profile.alpha);
    Ok(())
}

fn load(profile: &Path, instance: &Path) -> Result<(PricingProfile<f64>, Instance<f64>)> {
    let p = read_profile(profile).with_context(|| format!("reading {}", profile.display()))?;
    let i = read_instance(instance).with_context(|| format!("reading {}", instance.display()))?;
    Ok((p, i))
}

fn cmd_simulate(a: SimulateArgs) -> Result<()> {
    let (profile, inst) = load(&a.profile, &a.instance)?;
    let mut w = sink(a.out.as_deref())?;

    if let Some(n) = a.runs {
        let rng = a.rng.ok_or_else(|| anyhow!("--runs needs --rng"))?;
        let welfare = match a.algo {
            Algo::Cppm => monte_carlo_runs(n, 1, rng, |s: &[f64]| Ok(run_cppm(&profile, &inst, s[0])?.welfare))?,
            algo => {
                let b = Baselines::new(profile.params, profile.grid_size())?;
                let k = profile.params.k;
                match algo {
                    Algo::RStatic => monte_carlo_runs(n, 1, rng, |s: &[f64]| Ok(b.r_static(&inst, s[0])?.welfare))?,
                    Algo::RDynamic => monte_carlo_runs(n, k, rng, |s: &[f64]| Ok(b.r_dynamic(&inst, s)?.welfare))?,
                    _ => vec![b.d_dynamic(&inst)?.welfare; n],
                }
            }
        };
        writeln!(w, "run,welfare")?;
        for (i, x) in welfare.iter().enumerate() {
            writeln!(w, "{i},{x}")?;
        }
        return Ok(w.flush()?);
    }

    if !matches!(a.algo, Algo::Cppm | Algo::RStatic | Algo::DDynamic) {
        bail!("r-dynamic draws one seed per unit; use --runs and --rng");
    }
    let baselines = match a.algo {
        Algo::Cppm => None,
        _ => Some(Baselines::new(profile.params, profile.grid_size())?),
    };
    let run_one = |r: f64| match (&baselines, a.algo) {
        (None, _) => run_cppm(&profile, &inst, r),
        (Some(b), Algo::RStatic) => b.r_static(&inst, r),
        (Some(b), _) => b.d_dynamic(&inst),
    };

    if let Some(r) = a.seed {
        let out = run_one(r)?;
        if a.trace {
            writeln!(w, "t,v_t,level,price,accepted,y_after")?;
            let mut y = 0;
            for t in 0..inst.len() {
                y += usize::from(out.allocations[t]);
                writeln!(
                    w,
                    "{},{},{},{},{},{}",
                    t + 1,
                    inst.valuations[t],
                    out.levels[t] + 1,
                    out.posted_prices[t],
                    u8::from(out.allocations[t]),
                    y
                )?;
            }
        } else {
            writeln!(w, "seed,welfare,revenue,sold,price_changes")?;
            writeln!(w, "{r},{},{},{},{}", out.welfare, out.revenue, out.units_sold(), out.price_changes())?;
        }
        return Ok(w.flush()?);
    }

    let n = a.seed_grid.unwrap_or(1000);
    let rows = match &baselines {
        None => seed_grid_welfare(&profile, &inst, n)?,
        Some(_) => {
            if n < 2 {
                bail!("need at least two seed cells");
            }
            (0..n)
                .map(|i| {
                    let r = (i as f64 + 0.5) / n as f64;
                    Ok((r, run_one(r)?.welfare))
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    writeln!(w, "seed_mid,welfare")?;
    for (r, x) in rows {
        writeln!(w, "{r},{x}")?;
    }
    Ok(w.flush()?)
}

fn cmd_evaluate(a: EvaluateArgs) -> Result<()> {
    let profile: PricingProfile<f64> =
        read_profile(&a.profile).with_context(|| format!("reading {}", a.profile.display()))?;
    let delta = a.delta.unwrap_or(profile.params.delta_risk);
    let res = a.seed_grid.map_or(SeedResolution::Exact, SeedResolution::Grid);
    let report: RatioReport<f64> = if a.hard_family {
        hard_family_report(&profile, a.epsilon.expect("clap enforces --epsilon"), delta, res)?
    } else {
        let instances = a
            .instance
            .iter()
            .map(|p| {
                let inst = read_instance(p).with_context(|| format!("reading {}", p.display()))?;
                Ok((p.display().to_string(), inst))
            })
            .collect::<Result<Vec<_>>>()?;
        cvar_cr(&profile, &instances, delta, res)?
    };
    let mut w = sink(a.out.as_deref())?;
    writeln!(w, "instance_id,opt,cvar,ratio")?;
    for r in &report.rows {
        writeln!(w, "{},{},{},{}", r.instance_id, r.opt, r.cvar, r.ratio)?;
    }
    w.flush()?;
    let id = report.worst_row().map_or("-", |r| r.instance_id.as_str());
    eprintln!(
        "empirical worst case over {} instance(s): ratio={} on {id} (designed alpha={}, delta={})",
        report.rows.len(),
        report.worst,
        report.alpha,
        report.delta_risk
    );
    Ok(())
}

fn cmd_verify(a: VerifyArgs) -> Result<()> {
    let (profile, inst) = load(&a.profile, &a.instance)?;
    let lemmas = if a.lemma == "all" { Lemma::ALL.to_vec() } else { vec![a.lemma.parse::<Lemma>()?] };
    let unit_levels = profile.reservation.iter().all(|&q| q == 1);
    let mut failed = 0;
    for l in lemmas {
        // Rounding compares against the fractional allocator, which only
        // exists for one unit per level.
        if l == Lemma::Rounding && !unit_levels && a.lemma == "all" {
            println!("rounding: skipped (needs one unit per level)");
            continue;
        }
        let rep = verify_lemma(&profile, &inst, l, a.resolution)?;
        println!("{rep}");
        if l == Lemma::Rounding && rep.passed {
            println!("  {} buyer(s) straddle a unit boundary, {} within one unit", rep.straddling, rep.within_unit);
        }
        failed += usize::from(!rep.passed);
    }
    if failed > 0 {
        return Err(LemmaFailed(failed).into());
    }
    Ok(())
}

fn write_sweep(path: &Path, rows: &[SweepRow<f64>]) -> Result<()> {
    let mut w = sink(Some(path))?;
    writeln!(w, "k,delta_cap,delta_risk,alpha,worst_ratio,status")?;
    let opt = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
    for r in rows {
        // Error messages may contain commas.
        let status = r.status.replace('"', "'");
        let status = if status.contains(',') { format!("\"{status}\"") } else { status };
        writeln!(w, "{},{},{},{},{},{}", r.k, r.delta_cap, r.delta_risk, opt(r.alpha), opt(r.worst_ratio), status)?;
    }
    Ok(w.flush()?)
}

fn cmd_reproduce(a: ReproduceArgs) -> Result<()> {
    fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    match a.fig {
        Figure::Fig1 => {
            let rng = a.rng.ok_or_else(|| anyhow!("fig1 is sampled; pass --rng"))?;
            let rows = fig1_runs::<f64>(a.runs, rng, a.grid.unwrap_or(DEFAULT_GRID_SIZE))?;
            let path = a.out_dir.join("fig1.csv");
            let mut w = sink(Some(&path))?;
            writeln!(w, "algo,run,welfare")?;
            for (algo, run, x) in rows {
                writeln!(w, "{algo},{run},{x}")?;
            }
            w.flush()?;
            println!("wrote {}", path.display());
        }
        Figure::Fig3 | Figure::Fig4 => {
            let mut opts = SweepOptions::default();
            if let Some(g) = a.grid {
                opts.grid_size = g;
            }
            opts.lattice_steps = a.lattice_steps;
            opts.ratio = a.with_ratio.then_some(SeedResolution::Exact);
            let (rows, name) = match a.fig {
                Figure::Fig3 => (sweep_fig3::<f64>(&opts), "fig3.csv"),
                _ => (sweep_fig4::<f64>(&opts), "fig4.csv"),
            };
            let path = a.out_dir.join(name);
            write_sweep(&path, &rows)?;
            let failed = rows.iter().filter(|r| r.status != "ok").count();
            println!("wrote {} ({} rows, {failed} failed)", path.display(), rows.len());
        }
    }
    Ok(())
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<LemmaFailed>().is_some() {
        return 2;
    }
    match e.downcast_ref::<cppm::Error>() {
        Some(cppm::Error::Unbracketed { .. } | cppm::Error::IllConditionedStep(_)) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let res = match cli.command {
        Command::Design(a) => cmd_design(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Reproduce(a) => cmd_reproduce(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
