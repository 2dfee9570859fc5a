//! Release gate. Runs every acceptance criterion, prints one PASS/FAIL line
//! per criterion and exits non-zero if any failed.

use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

use ttrt_core::analytical::{
    self, efficiency, max_access_delay, overflow_model, ring_latency, validate_ttrt, RingParameters, RuleViolation,
    TtrtRequest,
};
use ttrt_core::metrics::report;
use ttrt_core::sim::{self, RingConfig, RunSettings};
use ttrt_core::sweep::{run_sweep, SweepRow};
use ttrt_core::workload::{spread_stations, SaturationWorkload, Workload};
use ttrt_core::{table1, Figure, PhysicalRing, Preset};

type Outcome = Result<String, String>;

/// TRT violations seen by every simulation in this suite.
#[derive(Default)]
struct Rotations {
    runs: usize,
    observed: u64,
    violations: u64,
}

impl Rotations {
    fn add(&mut self, observed: u64, violations: u64) {
        self.runs += 1;
        self.observed += observed;
        self.violations += violations;
    }
}

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::MIN, f64::max);
    let min = values.iter().copied().fold(f64::MAX, f64::min);
    max / min
}

fn table_golden() -> Outcome {
    let cells = table1::cells();
    check(cells.len() == 36, format!("{} cells", cells.len()))?;
    let bad = table1::mismatches(&cells);
    if let Some(c) = bad.first() {
        return Err(format!(
            "{} mismatches, first {} {} ms {}: {:.2} vs {:.2}",
            bad.len(),
            c.preset,
            c.ttrt_ms,
            c.metric.name(),
            c.computed,
            c.golden
        ));
    }
    // Spot checks computed here from the raw formulas.
    for (preset, t, delay_s, eff_pct) in [
        (Preset::Big, 8.0, "0.79", "85.92"),
        (Preset::Largest, 4.0, "4.00", "49.55"),
    ] {
        let d = ring_latency(&preset.ring());
        let n = f64::from(preset.mac_count());
        let eff = n * (t - d) / (n * t + d) * 100.0;
        let delay = ((n - 1.0) * t + 2.0 * d) / 1000.0;
        check(
            format!("{delay:.2}") == delay_s && format!("{eff:.2}") == eff_pct,
            format!("{preset}/{t} ms gives {delay:.2} s, {eff:.2}%"),
        )?;
    }
    let out = ttrt(&["table1"]);
    check(out.status.code() == Some(0), "table1 command did not exit 0")?;
    Ok("36/36 cells match at 2 decimals".into())
}

fn worked_example() -> Outcome {
    let d = ring_latency(&PhysicalRing::new(20.0, 16).map_err(|e| e.to_string())?);
    check(format!("{d:.2}") == "0.12", format!("D = {d}"))?;
    let p = RingParameters::new(16, 5.0, 0.12).map_err(|e| e.to_string())?;
    let eff = efficiency(&p).map_err(|e| e.to_string())? * 100.0;
    let delay = max_access_delay(&p);
    check((eff - 97.5).abs() <= 0.05, format!("efficiency {eff}%"))?;
    check((delay - 75.24).abs() <= 0.01, format!("access delay {delay} ms"))?;
    Ok(format!(
        "D = {d:.4} ms, efficiency {eff:.3}%, access delay {delay:.3} ms"
    ))
}

fn identities() -> Outcome {
    let mut worst_overflow: f64 = 0.0;
    for n in [1u32, 2, 7, 50, 500] {
        for k in [1u32, 3, 10, 137] {
            for (f, d) in [(0.36, 1.773), (0.008, 0.04034), (0.1234, 2.017), (0.05, 0.0)] {
                let t = d + f64::from(k) * f;
                let p = RingParameters::new(n, t, d)
                    .and_then(|p| p.with_frame_time_ms(f))
                    .map_err(|e| e.to_string())?;
                let o = overflow_model(&p).map_err(|e| e.to_string())?;
                let e1 = efficiency(&p).map_err(|e| e.to_string())?;
                let e2 = max_access_delay(&p);
                worst_overflow = worst_overflow
                    .max((o.efficiency / e1 - 1.0).abs())
                    .max((o.max_access_delay_ms / e2 - 1.0).abs());
            }
        }
    }
    check(
        worst_overflow <= 1e-12,
        format!("overflow vs plain model differ by {worst_overflow:e}"),
    )?;

    let mut worst_single: f64 = 0.0;
    let mut worst_limit: f64 = 0.0;
    for i in 0..10 {
        for j in 0..10 {
            let t = 4.0 + 16.1 * f64::from(i);
            let d = 0.01 + 0.2 * f64::from(j);
            let one =
                efficiency(&RingParameters::new(1, t, d).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
            worst_single = worst_single.max((one / ((t - d) / (t + d)) - 1.0).abs());
            let many = efficiency(&RingParameters::new(1_000_000, t, d).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
            worst_limit = worst_limit.max((many - (1.0 - d / t)).abs());
        }
    }
    check(worst_single <= 1e-12, format!("n = 1 identity off by {worst_single:e}"))?;
    check(worst_limit < 1e-4, format!("limit off by {worst_limit:e}"))?;
    Ok(format!(
        "overflow {worst_overflow:.1e}, n=1 {worst_single:.1e}, limit {worst_limit:.1e} over 100 points"
    ))
}

fn cross_validation(rot: &mut Rotations) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut samples = 0usize;
    for preset in Preset::ALL {
        let ring = preset.ring();
        for ttrt in [4.0, 8.0, 20.0] {
            for n in [1u32, 5, 20] {
                let cfg = RingConfig::uniform(&ring, ttrt).with_token_time_us(0.0);
                let w = Workload::Saturated(
                    SaturationWorkload::new(analytical::MAX_FRAME_BYTES, spread_stations(n, preset.mac_count()))
                        .map_err(|e| e.to_string())?,
                );
                let out = sim::run(&cfg, &w, &RunSettings::new(5000.0)).map_err(|e| e.to_string())?;
                rot.add(out.rotations.observed, out.rotations.violations);
                let r = report(&out, &cfg, &w);
                let p = RingParameters::new(n, ttrt, ring_latency(&ring))
                    .and_then(|p| p.with_frame_time_ms(analytical::MAX_FRAME_TIME_MS))
                    .map_err(|e| e.to_string())?;
                let model = overflow_model(&p).map_err(|e| e.to_string())?;
                let rel = (r.efficiency / model.efficiency - 1.0).abs();
                worst = worst.max(rel);
                check(
                    rel <= 0.02,
                    format!("{preset}/{ttrt} ms/n={n}: {} vs {}", r.efficiency, model.efficiency),
                )?;
                let access = r
                    .access_delay_ms
                    .ok_or(format!("{preset}/{ttrt} ms/n={n}: no access samples"))?;
                samples += access.count;
                check(
                    access.max <= model.max_access_delay_ms * (1.0 + 1e-12) && r.access_bound_respected,
                    format!(
                        "{preset}/{ttrt} ms/n={n}: access {} ms above bound {} ms",
                        access.max, model.max_access_delay_ms
                    ),
                )?;
            }
        }
    }
    Ok(format!(
        "27 runs, worst efficiency error {:.3}%, {samples} access samples within bound",
        worst * 100.0
    ))
}

fn figure_rows(fig: Figure, duration_ms: f64) -> Result<Vec<Vec<SweepRow>>, String> {
    fig.specs(1, duration_ms)
        .iter()
        .map(|s| run_sweep(s).map_err(|e| e.to_string()))
        .collect()
}

fn ok_rows(rows: &[SweepRow]) -> Vec<(f64, &ttrt_core::sweep::RowMetrics)> {
    rows.iter()
        .filter_map(|r| Some((r.swept_value()?, r.metrics()?)))
        .collect()
}

fn figure_shapes(rot: &mut Rotations) -> Outcome {
    // (a) efficiency rises with TTRT at a falling rate, knee at 6 to 10 ms.
    for (preset, rows) in Preset::ALL.into_iter().zip(figure_rows(Figure::Fig1, 0.0)?) {
        let pts = ok_rows(&rows);
        let slopes: Vec<f64> = pts
            .windows(2)
            .map(|w| (w[1].1.efficiency - w[0].1.efficiency) / (w[1].0 - w[0].0))
            .collect();
        check(
            slopes.iter().all(|&s| s > 0.0),
            format!("fig1 {preset}: efficiency not increasing"),
        )?;
        check(
            slopes.windows(2).all(|s| s[1] <= s[0]),
            format!("fig1 {preset}: slope not diminishing"),
        )?;
    }
    let d = ring_latency(&Preset::Largest.ring());
    let n = Preset::Largest.mac_count();
    let e = |t: f64| efficiency(&RingParameters::new(n, t, d).unwrap()).unwrap();
    check(
        e(10.0) - e(6.0) > e(20.0) - e(16.0),
        "fig1 largest: no knee between 6 and 10 ms",
    )?;

    // (b) access delay rises with TTRT.
    let mut largest_165 = 0.0;
    for (preset, rows) in Preset::ALL.into_iter().zip(figure_rows(Figure::Fig2, 0.0)?) {
        let pts = ok_rows(&rows);
        let delays: Vec<f64> = pts.iter().map(|(_, m)| m.max_access_delay_ms.unwrap()).collect();
        check(
            delays.windows(2).all(|w| w[1] > w[0]),
            format!("fig2 {preset}: access delay not increasing"),
        )?;
        if preset == Preset::Largest {
            largest_165 = pts
                .iter()
                .find(|(t, _)| *t == 165.0)
                .map(|(_, m)| m.max_access_delay_ms.unwrap())
                .unwrap_or(0.0);
        }
    }
    check(
        format!("{:.2}", largest_165 / 1000.0) == "164.84",
        format!("fig2 largest/165 ms = {largest_165} ms"),
    )?;

    // (c) response time is flat in TTRT except near saturation.
    let mut ratios = Vec::new();
    for rows in figure_rows(Figure::Fig3, 2000.0)? {
        let load = rows[0].params.load_pct.unwrap_or_default();
        let pts = ok_rows(&rows);
        check(pts.len() == rows.len(), format!("fig3 {load}%: failed rows"))?;
        for (_, m) in &pts {
            rot.add(0, m.trt_violations.unwrap_or(0));
        }
        let resp: Vec<f64> = pts.iter().map(|(_, m)| m.mean_response_ms.unwrap()).collect();
        let ratio = spread(&resp);
        if load < 80.0 {
            check(ratio < 1.05, format!("fig3 {load}%: response varies by {ratio}"))?;
        } else {
            check(ratio > 1.10, format!("fig3 {load}%: response only varies by {ratio}"))?;
        }
        ratios.push(format!("{load}%: {ratio:.3}"));
    }

    // (d) frame size barely matters.
    for (preset, rows) in Preset::ALL.into_iter().zip(figure_rows(Figure::Fig8, 0.0)?) {
        let pts = ok_rows(&rows);
        let first = pts.first().map(|p| p.0);
        let last = pts.last().map(|p| p.0);
        check(
            first == Some(100.0) && last == Some(4500.0),
            format!("fig8 {preset}: grid {first:?}..{last:?}"),
        )?;
        let effs: Vec<f64> = pts.iter().map(|(_, m)| m.efficiency).collect();
        let delays: Vec<f64> = pts.iter().map(|(_, m)| m.max_access_delay_ms.unwrap()).collect();
        check(
            spread(&effs) < 1.05,
            format!("fig8 {preset}: efficiency varies by {}", spread(&effs)),
        )?;
        check(
            spread(&delays) < 1.05,
            format!("fig9 {preset}: access delay varies by {}", spread(&delays)),
        )?;
    }
    Ok(format!(
        "knee ok, largest/165 ms = {:.2} s, fig3 max/min {}",
        largest_165 / 1000.0,
        ratios.join(", ")
    ))
}

fn fairness(rot: &mut Rotations) -> Outcome {
    let ring = Preset::Typical.ring();
    let cfg = RingConfig::uniform(&ring, 8.0);
    let w = Workload::Saturated(
        SaturationWorkload::new(1500, spread_stations(10, ring.mac_count())).map_err(|e| e.to_string())?,
    );
    let out = sim::run(&cfg, &w, &RunSettings::new(10_000.0)).map_err(|e| e.to_string())?;
    rot.add(out.rotations.observed, out.rotations.violations);
    let r = report(&out, &cfg, &w);
    let shares: Vec<f64> = r.per_station_mbps.values().copied().collect();
    check(shares.len() == 10, format!("{} stations reported", shares.len()))?;
    let mean = shares.iter().sum::<f64>() / 10.0;
    let worst = shares.iter().map(|s| (s / mean - 1.0).abs()).fold(0.0, f64::max);
    check(
        worst < 0.01,
        format!("share deviates {:.3}% from the mean", worst * 100.0),
    )?;
    Ok(format!(
        "10 stations, max deviation {:.4}% from {mean:.3} Mbps",
        worst * 100.0
    ))
}

fn ttrt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ttrt"))
        .args(args)
        .output()
        .expect("run ttrt")
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let commands: [&[&str]; 3] = [
        &[
            "simulate",
            "--preset",
            "typical",
            "--load-pct",
            "60",
            "--seed",
            "42",
            "--duration-ms",
            "300",
            "--replications",
            "2",
        ],
        &[
            "sweep",
            "--fiber-km",
            "30",
            "--macs",
            "25",
            "--load-pct",
            "70",
            "--seed",
            "9",
            "--duration-ms",
            "200",
            "--vary",
            "ttrt",
            "--grid",
            "4,8,16",
            "--mode",
            "both",
        ],
        &["sweep", "--figure", "fig3", "--seed", "3", "--duration-ms", "200"],
    ];
    for args in commands {
        let a = ttrt(args);
        let b = ttrt(args);
        check(
            a.status.success() && !a.stdout.is_empty(),
            format!("{args:?} failed: {}", String::from_utf8_lossy(&a.stderr)),
        )?;
        check(a.stdout == b.stdout, format!("{args:?} differs between runs"))?;
        let path = dir.path().join("out.csv");
        let p = path.to_str().unwrap();
        let mut with_out = args.to_vec();
        with_out.extend(["--out", p]);
        check(ttrt(&with_out).status.success(), "--out run failed")?;
        check(
            std::fs::read(Path::new(p)).map_err(|e| e.to_string())? == a.stdout,
            format!("{args:?} --out differs"),
        )?;
    }
    Ok("3 commands byte-identical across repeats and --out".into())
}

fn validator() -> Outcome {
    let floor_req = TtrtRequest::for_latency(analytical::T_MIN_MS, analytical::MAX_RING_LATENCY_MS);
    let v = validate_ttrt(&floor_req);
    check(
        format!("{:.3}", v.frame_floor_ms) == "2.134",
        format!("rule 2 floor {} ms", v.frame_floor_ms),
    )?;
    check(v.is_valid(), "4 ms rejected on the largest ring")?;

    let v = validate_ttrt(&TtrtRequest::for_latency(3.0, analytical::MAX_RING_LATENCY_MS));
    check(
        !v.is_valid()
            && v.violations
                .iter()
                .any(|r| matches!(r, RuleViolation::BelowTMin { .. })),
        format!("3 ms verdict {:?}", v.violations),
    )?;

    let mut req = TtrtRequest::for_latency(8.0, analytical::MAX_RING_LATENCY_MS);
    req.service_interval_ms = Some(20.0);
    let advisory = validate_ttrt(&req).advisory.ok_or("no advisory")?;
    check(
        advisory.recommended_ttrt_ms == 10.0,
        format!("advisory {} ms", advisory.recommended_ttrt_ms),
    )?;

    check(
        ttrt(&["validate", "--ttrt", "3"]).status.code() == Some(1),
        "validate 3 ms did not exit 1",
    )?;
    let ok = ttrt(&["validate", "--ttrt", "8", "--service-interval-ms", "20"]);
    check(ok.status.code() == Some(0), "validate 8 ms did not exit 0")?;
    check(
        String::from_utf8_lossy(&ok.stdout).contains("request ttrt 10 ms"),
        "advisory not printed",
    )?;
    Ok(format!(
        "floor {:.3} ms, 3 ms rejected by rule 3, 20 ms interval advises 10 ms",
        v.frame_floor_ms
    ))
}

fn main() {
    let start = Instant::now();
    let mut rot = Rotations::default();
    let mut results: Vec<(&str, Outcome)> = vec![
        ("1 table golden values", table_golden()),
        ("2 worked example", worked_example()),
        ("3 analytical identities", identities()),
    ];
    results.push(("4 simulator vs formula", cross_validation(&mut rot)));
    results.push(("6 figure shapes", figure_shapes(&mut rot)));
    results.push(("7 fairness", fairness(&mut rot)));
    let trt = if rot.violations == 0 {
        Ok(format!(
            "{} runs, {} rotations observed, none reached 2 x TTRT",
            rot.runs, rot.observed
        ))
    } else {
        Err(format!("{} rotations reached 2 x TTRT", rot.violations))
    };
    results.insert(4, ("5 rotation time below 2 x TTRT", trt));
    results.push(("8 determinism", determinism()));
    results.push(("9 TTRT validator", validator()));

    let mut failed = 0;
    for (name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("PASS  criterion {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  criterion {name}: {why}");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1?}",
        results.len() - failed,
        start.elapsed()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
