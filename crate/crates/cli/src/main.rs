//! `ttrt`: analyze, simulate and sweep timed-token rings; check TTRT settings.
//!
//! Exit codes: 0 success, 1 validation or golden-value mismatch, 2 bad input.

mod config;

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use ttrt_core::analytical::{self, RingParameters, TMax, TtrtRequest};
use ttrt_core::sweep::{self, Mode, SweepRow, SweepSpec, SweepVariable};
use ttrt_core::{table1, Figure, PhysicalRing, Preset};

use config::ConfigFile;

const EXIT_MISMATCH: u8 = 1;
const EXIT_BAD_INPUT: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "ttrt", version, about = "Timed-token ring performance lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Closed-form efficiency and maximum access delay.
    Analyze(RingArgs),
    /// One simulated run (or several replications); CSV output.
    Simulate(SimulateArgs),
    /// Parameter sweep or figure reproduction; CSV output.
    Sweep(SweepArgs),
    /// Reproduce the TTRT reference table and check it against the golden values.
    Table1(Table1Args),
    /// Check a TTRT against the standard's setting rules.
    Validate(ValidateArgs),
}

#[derive(Args, Debug, Clone, Default)]
struct RingArgs {
    /// TOML configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<Preset>,
    /// Target token rotation time, ms.
    #[arg(long)]
    ttrt: Option<f64>,
    #[arg(long)]
    fiber_km: Option<f64>,
    /// Total MACs on the ring.
    #[arg(long)]
    macs: Option<u32>,
    /// Active MACs (all of them by default).
    #[arg(long)]
    active: Option<u32>,
    /// Fixed frame size; enables the overflow model.
    #[arg(long)]
    frame_bytes: Option<u32>,
    /// Bursty workload at this percentage of 100 Mbps (saturated when absent).
    #[arg(long)]
    load_pct: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    duration_ms: Option<f64>,
    #[arg(long)]
    token_time_us: Option<f64>,
    /// Stop transmitting exactly when the holding time expires.
    #[arg(long)]
    no_overflow: bool,
    /// Permit TTRT outside [T_min, T_max] in simulations.
    #[arg(long)]
    allow_nonstandard_ttrt: bool,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the fully resolved configuration as TOML and exit.
    #[arg(long)]
    dump_config: bool,
}

impl RingArgs {
    fn layered(&self, extra: impl FnOnce(&mut ConfigFile)) -> Result<ConfigFile> {
        let base = match &self.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        let mut flags = ConfigFile::default();
        flags.ring.preset = self.preset;
        flags.ring.fiber_km = self.fiber_km;
        flags.ring.macs = self.macs;
        flags.protocol.ttrt_ms = self.ttrt;
        flags.protocol.token_time_us = self.token_time_us;
        flags.protocol.overflow = self.no_overflow.then_some(false);
        flags.protocol.allow_nonstandard_ttrt = self.allow_nonstandard_ttrt.then_some(true);
        flags.workload.active = self.active;
        flags.workload.frame_bytes = self.frame_bytes;
        flags.workload.load_pct = self.load_pct;
        flags.run.seed = self.seed;
        flags.run.duration_ms = self.duration_ms;
        extra(&mut flags);
        let mut merged = base.overlay(flags);
        // A preset named on the command line replaces the file's ring geometry.
        if self.preset.is_some() {
            merged.ring.fiber_km = self.fiber_km;
            merged.ring.macs = self.macs;
        }
        merged.resolved()
    }
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    ring: RingArgs,
    #[arg(long)]
    replications: Option<u32>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    ring: RingArgs,
    /// Named figure recipe (fig1 .. fig9).
    #[arg(long)]
    figure: Option<Figure>,
    /// Swept variable: ttrt, extent, total_stations, active_macs, frame_size.
    #[arg(long)]
    vary: Option<SweepVariable>,
    /// Comma-separated, strictly increasing grid.
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<f64>>,
    /// analytical, simulate or both.
    #[arg(long)]
    mode: Option<Mode>,
    #[arg(long)]
    replications: Option<u32>,
}

#[derive(Args, Debug)]
struct Table1Args {
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    /// Requested TTRT, ms.
    #[arg(long)]
    ttrt: f64,
    #[arg(long)]
    preset: Option<Preset>,
    #[arg(long)]
    fiber_km: Option<f64>,
    #[arg(long)]
    macs: Option<u32>,
    /// Ring latency in ms; defaults to the largest the standard permits.
    #[arg(long)]
    ring_latency_ms: Option<f64>,
    /// Synchronous allocation of one station, ms; repeat for several.
    #[arg(long = "sync-ms")]
    sync_ms: Vec<f64>,
    /// Service interval a synchronous station needs, ms; repeat for several.
    #[arg(long = "service-interval-ms")]
    service_interval_ms: Vec<f64>,
    #[arg(long, default_value_t = analytical::MAX_FRAME_BYTES)]
    max_frame_bytes: u32,
    #[arg(long, default_value_t = analytical::T_MIN_MS)]
    t_min_ms: f64,
    /// Use the 167.77216 ms counter-derived T_max instead of 165 ms.
    #[arg(long)]
    counter_t_max: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_BAD_INPUT)
        }
    }
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain()
        .filter_map(|c| c.downcast_ref::<io::Error>())
        .any(|io| io.kind() == io::ErrorKind::BrokenPipe)
}

fn dispatch(command: Command) -> Result<ExitCode> {
    match command {
        Command::Analyze(args) => analyze(&args),
        Command::Simulate(args) => simulate(&args),
        Command::Sweep(args) => sweep_cmd(&args),
        Command::Table1(args) => table1_cmd(&args),
        Command::Validate(args) => validate(&args),
    }
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

fn dump(config: &ConfigFile) -> Result<ExitCode> {
    print!("{}", config.to_toml()?);
    Ok(ExitCode::SUCCESS)
}

fn analyze(args: &RingArgs) -> Result<ExitCode> {
    let config = args.layered(|_| {})?;
    if args.dump_config {
        return dump(&config);
    }
    let point = config.point()?;
    let ring = point.ring()?;
    let d = analytical::ring_latency(&ring);
    let n = point.n_active();
    let params = RingParameters::new(n, point.ttrt_ms, d)?;
    let result = analytical::analyze(&params)?;

    let mut out = io::stdout().lock();
    writeln!(
        out,
        "ring               {} ({} km, {} MACs, {} active)",
        point.label, point.fiber_km, point.macs, n
    )?;
    writeln!(out, "ring latency       {d:.5} ms")?;
    writeln!(out, "ttrt               {} ms", point.ttrt_ms)?;
    writeln!(
        out,
        "efficiency         {:.2} %  ({})",
        result.efficiency * 100.0,
        result.efficiency
    )?;
    writeln!(
        out,
        "max access delay   {:.2} s  ({} ms)",
        result.max_access_delay_ms / 1000.0,
        result.max_access_delay_ms
    )?;
    writeln!(
        out,
        "one active station {:.2} %",
        analytical::single_station_efficiency(point.ttrt_ms, d)? * 100.0
    )?;
    writeln!(
        out,
        "many stations      {:.2} %",
        analytical::asymptotic_efficiency(point.ttrt_ms, d) * 100.0
    )?;
    if let (Some(bytes), true) = (point.frame_bytes, point.overflow) {
        let p = params.with_frame_time_ms(analytical::frame_time_ms(bytes))?;
        let over = analytical::overflow_model(&p)?;
        writeln!(
            out,
            "with overflow      {bytes} B frames, k = {}",
            over.frames_per_opportunity.unwrap_or(0)
        )?;
        writeln!(
            out,
            "  efficiency       {:.2} %  ({})",
            over.efficiency * 100.0,
            over.efficiency
        )?;
        writeln!(
            out,
            "  max access delay {:.2} s  ({} ms)",
            over.max_access_delay_ms / 1000.0,
            over.max_access_delay_ms
        )?;
    }
    if args.out.is_some() {
        let rows = sweep::run_point(&point, Mode::Analytical, 1, config.run.seed.unwrap_or_default())?;
        sweep::write_csv(&rows, output(&args.out)?)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn simulate(args: &SimulateArgs) -> Result<ExitCode> {
    let config = args.ring.layered(|f| f.run.replications = args.replications)?;
    if args.ring.dump_config {
        return dump(&config);
    }
    let point = config.point()?;
    let rows = sweep::run_point(
        &point,
        Mode::Simulate,
        config.run.replications.unwrap_or(1),
        config.run.seed.unwrap_or_default(),
    )?;
    sweep::write_csv(&rows, output(&args.ring.out)?)?;
    Ok(ExitCode::SUCCESS)
}

fn sweep_cmd(args: &SweepArgs) -> Result<ExitCode> {
    let needs_ring = args.figure.is_none();
    let config = {
        let layer = |f: &mut ConfigFile| {
            f.run.replications = args.replications;
            f.sweep.figure = args.figure;
            f.sweep.variable = args.vary;
            f.sweep.grid = args.grid.clone();
            f.sweep.mode = args.mode;
        };
        if needs_ring || args.ring.preset.is_some() || args.ring.config.is_some() {
            args.ring.layered(layer)?
        } else {
            // Figure recipes carry their own rings.
            let mut ring = args.ring.clone();
            ring.preset = Some(Preset::Largest);
            ring.layered(layer)?
        }
    };
    if args.ring.dump_config {
        return dump(&config);
    }
    let seed = config.run.seed.unwrap_or_default();
    let specs: Vec<SweepSpec> = match config.sweep.figure {
        Some(fig) => {
            let mut specs = fig.specs(seed, config.run.duration_ms.unwrap_or(sweep::DEFAULT_DURATION_MS));
            if let Some(mode) = args.mode {
                specs.iter_mut().for_each(|s| s.mode = mode);
            }
            if let Some(r) = config.run.replications {
                specs.iter_mut().for_each(|s| s.replications = r);
            }
            specs
        }
        None => {
            let Some(variable) = config.sweep.variable else {
                bail!("sweep needs --figure or --vary with --grid");
            };
            let Some(grid) = config.sweep.grid.clone() else {
                bail!("sweep over {variable} needs --grid");
            };
            vec![SweepSpec {
                variable,
                grid,
                base: config.point()?,
                mode: config.sweep.mode.unwrap_or_default(),
                replications: config.run.replications.unwrap_or(1),
                seed,
            }]
        }
    };
    let rows: Vec<SweepRow> = sweep::run_sweeps(&specs)?;
    sweep::write_csv(&rows, output(&args.ring.out)?)?;
    Ok(ExitCode::SUCCESS)
}

fn table1_cmd(args: &Table1Args) -> Result<ExitCode> {
    let cells = table1::cells();
    let mut w = output(&args.out)?;
    writeln!(
        w,
        "ttrt_ms,preset,metric,ring_latency_ms,computed,computed_2dp,golden,match"
    )?;
    for c in &cells {
        writeln!(
            w,
            "{},{},{},{},{},{:.2},{:.2},{}",
            c.ttrt_ms,
            c.preset,
            c.metric.name(),
            c.ring_latency_ms,
            c.computed,
            c.computed,
            c.golden,
            c.matches()
        )?;
    }
    w.flush()?;
    let bad = table1::mismatches(&cells);
    if bad.is_empty() {
        eprintln!("table1: all {} cells match", cells.len());
        Ok(ExitCode::SUCCESS)
    } else {
        for c in &bad {
            eprintln!(
                "table1 mismatch: {} ttrt={} ms {}: computed {:.2}, golden {:.2}",
                c.preset,
                c.ttrt_ms,
                c.metric.name(),
                c.computed,
                c.golden
            );
        }
        Ok(ExitCode::from(EXIT_MISMATCH))
    }
}

fn validate(args: &ValidateArgs) -> Result<ExitCode> {
    let latency = match (args.ring_latency_ms, args.preset, args.fiber_km, args.macs) {
        (Some(d), None, None, None) => d,
        (Some(_), ..) => bail!("give either --ring-latency-ms or a ring description, not both"),
        (None, Some(p), f, m) => analytical::ring_latency(&PhysicalRing::new(
            f.unwrap_or(p.fiber_km()),
            m.unwrap_or(p.mac_count()),
        )?),
        (None, None, Some(f), Some(m)) => analytical::ring_latency(&PhysicalRing::new(f, m)?),
        (None, None, None, None) => analytical::MAX_RING_LATENCY_MS,
        _ => bail!("a custom ring needs both --fiber-km and --macs"),
    };
    if args.max_frame_bytes == 0 || args.max_frame_bytes > analytical::MAX_FRAME_BYTES {
        bail!(
            "max frame size must be within 1..={} bytes",
            analytical::MAX_FRAME_BYTES
        );
    }
    let bad = |v: f64| v.is_nan() || v < 0.0;
    if args.sync_ms.iter().chain(&args.service_interval_ms).any(|&v| bad(v)) || bad(args.ttrt) {
        bail!("durations must be >= 0");
    }
    let mut req = TtrtRequest::for_latency(args.ttrt, latency);
    req.sync_allocation_ms = args.sync_ms.iter().fold(0.0, |a, b| a + b);
    req.max_frame_time_ms = analytical::frame_time_ms(args.max_frame_bytes);
    req.t_min_ms = args.t_min_ms;
    req.t_max = if args.counter_t_max {
        TMax::Counter
    } else {
        TMax::Standard
    };
    // The tightest service requirement drives the advisory.
    req.service_interval_ms = args.service_interval_ms.iter().copied().reduce(f64::min);
    let verdict = analytical::validate_ttrt(&req);

    let mut out = io::stdout().lock();
    writeln!(out, "requested ttrt       {} ms", verdict.requested_ttrt_ms)?;
    writeln!(out, "ring latency         {latency:.5} ms")?;
    writeln!(out, "synchronous alloc    {} ms", req.sync_allocation_ms)?;
    writeln!(out, "minimum ttrt rule 2  {:.5} ms", verdict.frame_floor_ms)?;
    writeln!(out, "minimum ttrt rule 3  {} ms", req.t_min_ms)?;
    writeln!(out, "minimum legal ttrt   {:.5} ms", verdict.minimum_legal_ttrt_ms)?;
    writeln!(out, "maximum legal ttrt   {} ms", req.t_max.ms())?;
    if let Some(a) = verdict.advisory {
        writeln!(
            out,
            "advisory (rule 1)    service interval {} ms -> request ttrt {} ms ({})",
            a.service_interval_ms,
            a.recommended_ttrt_ms,
            if a.requested_meets_interval {
                "met"
            } else {
                "requested ttrt too large"
            }
        )?;
    }
    if verdict.is_valid() {
        writeln!(out, "verdict              ok")?;
        Ok(ExitCode::SUCCESS)
    } else {
        for v in &verdict.violations {
            writeln!(out, "violation            {v}")?;
        }
        Ok(ExitCode::from(EXIT_MISMATCH))
    }
}
