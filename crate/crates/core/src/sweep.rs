//! Parameter sweeps over the analytical model and the simulator, and the
//! CSV layout they are written in.
//!
//! Every row echoes all of its inputs, the seed included, so any row can be
//! regenerated on its own.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytical::{self, AnalyticalError, PhysicalRing, RingParameters, MAX_FRAME_BYTES};
use crate::metrics;
use crate::presets::Preset;
use crate::sim::{self, RingConfig, RunSettings, SimError};
use crate::workload::{spread_stations, SaturationWorkload, WicWorkload, Workload, WorkloadError};

pub const DEFAULT_DURATION_MS: f64 = 2000.0;
pub const DEFAULT_SEED: u64 = 1;

/// Marker written to the `error` column of rows whose TTRT does not exceed
/// the ring latency.
pub const SATURATED_MARKER: &str = "saturated_by_latency";

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid sweep: {0}")]
    Spec(String),
    #[error(transparent)]
    Analytical(#[from] AnalyticalError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Workload(#[from] WorkloadError),
    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    Ttrt,
    Extent,
    TotalStations,
    ActiveMacs,
    FrameSize,
}

impl SweepVariable {
    pub const ALL: [SweepVariable; 5] = [
        SweepVariable::Ttrt,
        SweepVariable::Extent,
        SweepVariable::TotalStations,
        SweepVariable::ActiveMacs,
        SweepVariable::FrameSize,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::Ttrt => "ttrt",
            SweepVariable::Extent => "extent",
            SweepVariable::TotalStations => "total_stations",
            SweepVariable::ActiveMacs => "active_macs",
            SweepVariable::FrameSize => "frame_size",
        }
    }

    /// CSV column holding this variable.
    pub fn column(self) -> &'static str {
        match self {
            SweepVariable::Ttrt => "ttrt_ms",
            SweepVariable::Extent => "fiber_km",
            SweepVariable::TotalStations => "macs",
            SweepVariable::ActiveMacs => "active",
            SweepVariable::FrameSize => "frame_bytes",
        }
    }

    fn is_integral(self) -> bool {
        matches!(
            self,
            SweepVariable::TotalStations | SweepVariable::ActiveMacs | SweepVariable::FrameSize
        )
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepVariable {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SweepVariable::ALL
            .into_iter()
            .find(|v| v.name() == s || v.column() == s)
            .ok_or_else(|| format!("unknown sweep variable '{s}'"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Analytical,
    Simulate,
    Both,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "analytical" => Ok(Mode::Analytical),
            "simulate" | "simulated" => Ok(Mode::Simulate),
            "both" => Ok(Mode::Both),
            _ => Err(format!("unknown mode '{s}' (expected analytical, simulate or both)")),
        }
    }
}

/// Fully resolved inputs of one evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointParams {
    /// Preset name, figure name or `custom`.
    pub label: String,
    pub fiber_km: f64,
    pub macs: u32,
    /// Active MACs; all of them when absent.
    pub active: Option<u32>,
    pub ttrt_ms: f64,
    /// Fixed frame size. Selects the overflow model analytically; the
    /// simulator falls back to maximum-size frames when absent.
    pub frame_bytes: Option<u32>,
    /// Bursty workload at this share of 100 Mbps instead of saturation.
    pub load_pct: Option<f64>,
    pub token_time_us: f64,
    pub overflow: bool,
    pub duration_ms: f64,
    pub allow_nonstandard_ttrt: bool,
}

impl PointParams {
    pub fn custom(fiber_km: f64, macs: u32, ttrt_ms: f64) -> Self {
        PointParams {
            label: "custom".into(),
            fiber_km,
            macs,
            active: None,
            ttrt_ms,
            frame_bytes: None,
            load_pct: None,
            token_time_us: RingConfig::DEFAULT_TOKEN_TIME_US,
            overflow: true,
            duration_ms: DEFAULT_DURATION_MS,
            allow_nonstandard_ttrt: false,
        }
    }

    pub fn for_preset(preset: Preset, ttrt_ms: f64) -> Self {
        PointParams {
            label: preset.name().into(),
            ..Self::custom(preset.fiber_km(), preset.mac_count(), ttrt_ms)
        }
    }

    pub fn allowing_nonstandard_ttrt(mut self) -> Self {
        self.allow_nonstandard_ttrt = true;
        self
    }

    pub fn n_active(&self) -> u32 {
        self.active.unwrap_or(self.macs).min(self.macs)
    }

    pub fn ring(&self) -> Result<PhysicalRing, AnalyticalError> {
        PhysicalRing::new(self.fiber_km, self.macs)
    }

    /// Radius of the equivalent star wiring.
    pub fn star_radius_km(&self) -> f64 {
        if self.macs == 0 {
            0.0
        } else {
            self.fiber_km / (2.0 * f64::from(self.macs))
        }
    }

    pub fn with_value(&self, variable: SweepVariable, value: f64) -> Self {
        let mut p = self.clone();
        match variable {
            SweepVariable::Ttrt => p.ttrt_ms = value,
            SweepVariable::Extent => p.fiber_km = value,
            SweepVariable::TotalStations => p.macs = value as u32,
            SweepVariable::ActiveMacs => p.active = Some(value as u32),
            SweepVariable::FrameSize => p.frame_bytes = Some(value as u32),
        }
        p
    }

    fn value_of(&self, variable: SweepVariable) -> f64 {
        match variable {
            SweepVariable::Ttrt => self.ttrt_ms,
            SweepVariable::Extent => self.fiber_km,
            SweepVariable::TotalStations => f64::from(self.macs),
            SweepVariable::ActiveMacs => f64::from(self.n_active()),
            SweepVariable::FrameSize => f64::from(self.frame_bytes.unwrap_or(MAX_FRAME_BYTES)),
        }
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        let ring = self.ring()?;
        if self.n_active() == 0 && ring.mac_count() > 0 {
            return Err(SweepError::Spec("at least one active MAC is required".into()));
        }
        if self.macs == 0 {
            return Err(SweepError::Spec("ring needs at least one MAC".into()));
        }
        if let Some(b) = self.frame_bytes {
            if b == 0 || b > MAX_FRAME_BYTES {
                return Err(WorkloadError::FrameSize(b).into());
            }
        }
        if let Some(l) = self.load_pct {
            if !(l > 0.0 && l <= 100.0) {
                return Err(SweepError::Spec(format!("load {l}% outside (0, 100]")));
            }
        }
        if !(self.ttrt_ms > 0.0 && self.ttrt_ms.is_finite()) {
            return Err(SweepError::Spec(format!("TTRT {} ms must be > 0", self.ttrt_ms)));
        }
        if !(self.token_time_us >= 0.0 && self.token_time_us.is_finite()) {
            return Err(SweepError::Spec("token time must be >= 0".into()));
        }
        if !(self.duration_ms > 0.0 && self.duration_ms.is_finite()) {
            return Err(SweepError::Spec("duration must be > 0".into()));
        }
        Ok(())
    }

    pub fn ring_config(&self) -> Result<RingConfig, SweepError> {
        let mut cfg = RingConfig::uniform(&self.ring()?, self.ttrt_ms)
            .with_token_time_us(self.token_time_us)
            .with_overflow(self.overflow);
        cfg.allow_nonstandard_ttrt = self.allow_nonstandard_ttrt;
        Ok(cfg)
    }

    /// Traffic for a simulated run: bursty sources when a load is set,
    /// otherwise saturated stations. Active stations are spread evenly.
    pub fn workload(&self, seed: u64) -> Result<Workload, SweepError> {
        let stations = spread_stations(self.n_active(), self.macs);
        Ok(match self.load_pct {
            Some(pct) => Workload::Wic {
                params: WicWorkload::for_utilization(pct / 100.0, stations.len() as u32, seed)?,
                stations,
            },
            None => Workload::Saturated(SaturationWorkload::new(
                self.frame_bytes.unwrap_or(MAX_FRAME_BYTES),
                stations,
            )?),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub grid: Vec<f64>,
    pub base: PointParams,
    pub mode: Mode,
    pub replications: u32,
    /// Replication `r` runs with seed `seed + r`.
    pub seed: u64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), SweepError> {
        if self.grid.is_empty() {
            return Err(SweepError::Spec("grid is empty".into()));
        }
        if !self.grid.windows(2).all(|w| w[0] < w[1]) {
            return Err(SweepError::Spec("grid must be strictly increasing".into()));
        }
        if self.grid.iter().any(|v| !v.is_finite()) {
            return Err(SweepError::Spec("grid values must be finite".into()));
        }
        if self.variable.is_integral() && self.grid.iter().any(|v| v.fract() != 0.0 || *v < 1.0) {
            return Err(SweepError::Spec(format!(
                "{} grid must hold positive integers",
                self.variable
            )));
        }
        if self.replications == 0 {
            return Err(SweepError::Spec("replications must be >= 1".into()));
        }
        for &v in &self.grid {
            self.base.with_value(self.variable, v).validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowSource {
    Analytical,
    Simulated,
}

impl RowSource {
    pub fn name(self) -> &'static str {
        match self {
            RowSource::Analytical => "analytical",
            RowSource::Simulated => "simulated",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RowMetrics {
    pub efficiency: f64,
    pub max_access_delay_ms: Option<f64>,
    pub mean_response_ms: Option<f64>,
    pub mean_access_ms: Option<f64>,
    pub throughput_mbps: f64,
    pub frames_per_opportunity: Option<u32>,
    pub max_rotation_ms: Option<f64>,
    pub trt_violations: Option<u64>,
    pub access_bound_respected: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub swept: Option<SweepVariable>,
    pub params: PointParams,
    pub source: RowSource,
    pub replication: Option<u32>,
    pub seed: u64,
    pub ring_latency_ms: f64,
    /// `Err` holds the row's error marker.
    pub outcome: Result<RowMetrics, String>,
}

impl SweepRow {
    pub fn metrics(&self) -> Option<&RowMetrics> {
        self.outcome.as_ref().ok()
    }

    pub fn swept_value(&self) -> Option<f64> {
        self.swept.map(|v| self.params.value_of(v))
    }
}

/// Closed-form row: the overflow model when a frame size is fixed and
/// overflow is on, otherwise efficiency and access delay without overflow.
pub fn evaluate_analytical(p: &PointParams) -> Result<RowMetrics, SweepError> {
    let d = analytical::ring_latency(&p.ring()?);
    let mut params = RingParameters::new(p.n_active(), p.ttrt_ms, d)?;
    let result = match p.frame_bytes {
        Some(bytes) if p.overflow => {
            params = params.with_frame_time_ms(analytical::frame_time_ms(bytes))?;
            analytical::overflow_model(&params)?
        }
        _ => analytical::analyze(&params)?,
    };
    Ok(RowMetrics {
        efficiency: result.efficiency,
        max_access_delay_ms: Some(result.max_access_delay_ms),
        throughput_mbps: result.efficiency * analytical::NOMINAL_BANDWIDTH_MBPS,
        frames_per_opportunity: result.frames_per_opportunity,
        ..RowMetrics::default()
    })
}

/// One simulated replication, reduced to a row.
pub fn evaluate_simulated(p: &PointParams, seed: u64) -> Result<RowMetrics, SweepError> {
    let cfg = p.ring_config()?;
    let workload = p.workload(seed)?;
    let out = sim::run(&cfg, &workload, &RunSettings::new(p.duration_ms))?;
    let report = metrics::report(&out, &cfg, &workload);
    Ok(RowMetrics {
        efficiency: report.efficiency,
        max_access_delay_ms: report.access_delay_ms.map(|s| s.max),
        mean_response_ms: report.response_time_ms.map(|s| s.mean),
        mean_access_ms: report.access_delay_ms.map(|s| s.mean),
        throughput_mbps: report.throughput_mbps,
        frames_per_opportunity: None,
        max_rotation_ms: Some(report.max_rotation_ms),
        trt_violations: Some(report.trt_violations),
        access_bound_respected: Some(report.access_bound_respected),
    })
}

fn row_outcome(
    p: &PointParams,
    result: Result<RowMetrics, SweepError>,
) -> Result<Result<RowMetrics, String>, SweepError> {
    match result {
        Ok(m) => Ok(Ok(m)),
        Err(SweepError::Analytical(AnalyticalError::SaturatedByLatency { .. })) => Ok(Err(SATURATED_MARKER.into())),
        Err(e) => Err(SweepError::Spec(format!("{} at {}: {e}", p.label, describe(p)))),
    }
}

fn describe(p: &PointParams) -> String {
    format!(
        "ttrt={} ms fiber={} km macs={} active={}",
        p.ttrt_ms,
        p.fiber_km,
        p.macs,
        p.n_active()
    )
}

#[derive(Debug, Clone)]
struct Job {
    swept: Option<SweepVariable>,
    params: PointParams,
    source: RowSource,
    replication: Option<u32>,
    seed: u64,
}

impl Job {
    fn run(self) -> Result<SweepRow, SweepError> {
        let d = analytical::ring_latency(&self.params.ring()?);
        // Latency saturation is checked up front so both sources mark it alike.
        let result = if self.params.ttrt_ms <= d {
            Err(SweepError::Analytical(AnalyticalError::SaturatedByLatency {
                ttrt_ms: self.params.ttrt_ms,
                ring_latency_ms: d,
            }))
        } else {
            match self.source {
                RowSource::Analytical => evaluate_analytical(&self.params),
                RowSource::Simulated => evaluate_simulated(&self.params, self.seed),
            }
        };
        Ok(SweepRow {
            outcome: row_outcome(&self.params, result)?,
            swept: self.swept,
            params: self.params,
            source: self.source,
            replication: self.replication,
            seed: self.seed,
            ring_latency_ms: d,
        })
    }
}

fn jobs_for(spec: &SweepSpec, swept: Option<SweepVariable>, points: Vec<PointParams>) -> Vec<Job> {
    let mut jobs = Vec::new();
    for params in points {
        if matches!(spec.mode, Mode::Analytical | Mode::Both) {
            jobs.push(Job {
                swept,
                params: params.clone(),
                source: RowSource::Analytical,
                replication: None,
                seed: spec.seed,
            });
        }
        if matches!(spec.mode, Mode::Simulate | Mode::Both) {
            for r in 0..spec.replications {
                jobs.push(Job {
                    swept,
                    params: params.clone(),
                    source: RowSource::Simulated,
                    replication: Some(r),
                    seed: spec.seed.wrapping_add(u64::from(r)),
                });
            }
        }
    }
    jobs
}

fn execute(jobs: Vec<Job>) -> Result<Vec<SweepRow>, SweepError> {
    // Rows come back in job order whatever order the workers finish in.
    jobs.into_par_iter().map(Job::run).collect()
}

/// Evaluates every grid point (and replication). Rows are in grid order,
/// analytical before simulated.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>, SweepError> {
    run_sweeps(std::slice::from_ref(spec))
}

pub fn run_sweeps(specs: &[SweepSpec]) -> Result<Vec<SweepRow>, SweepError> {
    let mut jobs = Vec::new();
    for spec in specs {
        spec.validate()?;
        let points = spec
            .grid
            .iter()
            .map(|&v| spec.base.with_value(spec.variable, v))
            .collect();
        jobs.extend(jobs_for(spec, Some(spec.variable), points));
    }
    execute(jobs)
}

/// A single point, as the `simulate` and `analyze` commands evaluate it.
pub fn run_point(params: &PointParams, mode: Mode, replications: u32, seed: u64) -> Result<Vec<SweepRow>, SweepError> {
    params.validate()?;
    if replications == 0 {
        return Err(SweepError::Spec("replications must be >= 1".into()));
    }
    let spec = SweepSpec {
        variable: SweepVariable::Ttrt,
        grid: vec![params.ttrt_ms],
        base: params.clone(),
        mode,
        replications,
        seed,
    };
    execute(jobs_for(&spec, None, vec![params.clone()]))
}

const INPUT_COLUMNS: [&str; 13] = [
    "label",
    "fiber_km",
    "star_radius_km",
    "macs",
    "active",
    "ttrt_ms",
    "frame_bytes",
    "load_pct",
    "token_time_us",
    "overflow",
    "duration_ms",
    "mode",
    "replication",
];

const OUTPUT_COLUMNS: [&str; 13] = [
    "seed",
    "ring_latency_ms",
    "efficiency",
    "max_access_delay_ms",
    "mean_response_ms",
    "mean_access_ms",
    "throughput_mbps",
    "efficiency_pct_2dp",
    "max_access_delay_s_2dp",
    "frames_per_opportunity",
    "max_rotation_ms",
    "trt_violations",
    "error",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Header for rows sweeping `swept`: the swept column first, then the
/// remaining inputs, then the seed and the metrics.
pub fn csv_header(swept: Option<SweepVariable>) -> Vec<&'static str> {
    let lead = swept.map(SweepVariable::column);
    lead.into_iter()
        .chain(INPUT_COLUMNS.into_iter().filter(|c| Some(*c) != lead))
        .chain(OUTPUT_COLUMNS)
        .collect()
}

fn csv_record(row: &SweepRow) -> Vec<String> {
    let p = &row.params;
    let inputs = [
        p.label.clone(),
        p.fiber_km.to_string(),
        p.star_radius_km().to_string(),
        p.macs.to_string(),
        p.n_active().to_string(),
        p.ttrt_ms.to_string(),
        opt(p.frame_bytes),
        opt(p.load_pct),
        p.token_time_us.to_string(),
        p.overflow.to_string(),
        match row.source {
            RowSource::Analytical => String::new(),
            RowSource::Simulated => p.duration_ms.to_string(),
        },
        row.source.name().to_string(),
        opt(row.replication),
    ];
    let lead = row.swept.map(SweepVariable::column);
    let lead_idx = lead.and_then(|c| INPUT_COLUMNS.iter().position(|x| *x == c));
    let mut out = Vec::with_capacity(INPUT_COLUMNS.len() + OUTPUT_COLUMNS.len());
    if let Some(i) = lead_idx {
        out.push(inputs[i].clone());
    }
    out.extend(
        inputs
            .iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != lead_idx)
            .map(|(_, v)| v.clone()),
    );
    out.push(row.seed.to_string());
    out.push(row.ring_latency_ms.to_string());
    match &row.outcome {
        Ok(m) => {
            out.push(m.efficiency.to_string());
            out.push(opt(m.max_access_delay_ms));
            out.push(opt(m.mean_response_ms));
            out.push(opt(m.mean_access_ms));
            out.push(m.throughput_mbps.to_string());
            out.push(format!("{:.2}", m.efficiency * 100.0));
            out.push(opt(m.max_access_delay_ms.map(|d| format!("{:.2}", d / 1000.0))));
            out.push(opt(m.frames_per_opportunity));
            out.push(opt(m.max_rotation_ms));
            out.push(opt(m.trt_violations));
            out.push(String::new());
        }
        Err(marker) => {
            out.extend(std::iter::repeat_n(String::new(), OUTPUT_COLUMNS.len() - 3));
            out.push(marker.clone());
        }
    }
    out
}

/// Writes rows with one header. All rows must share the same swept
/// variable (or none).
pub fn write_csv<W: Write>(rows: &[SweepRow], writer: W) -> Result<(), SweepError> {
    let swept = rows.first().and_then(|r| r.swept);
    if rows.iter().any(|r| r.swept != swept) {
        return Err(SweepError::Spec(
            "rows with different swept variables cannot share a header".into(),
        ));
    }
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(csv_header(swept))?;
    for row in rows {
        w.write_record(csv_record(row))?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv_string(rows: &[SweepRow]) -> Result<String, SweepError> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ttrt_spec(mode: Mode) -> SweepSpec {
        let mut base = PointParams::for_preset(Preset::Typical, 8.0);
        base.duration_ms = 100.0;
        base.frame_bytes = Some(4500);
        base.token_time_us = 0.0;
        SweepSpec {
            variable: SweepVariable::Ttrt,
            grid: vec![4.0, 8.0, 20.0],
            base,
            mode,
            replications: 2,
            seed: 9,
        }
    }

    #[test]
    fn spec_validation() {
        let mut s = ttrt_spec(Mode::Analytical);
        assert!(s.validate().is_ok());
        s.grid = vec![];
        assert!(s.validate().is_err());
        s.grid = vec![8.0, 4.0];
        assert!(s.validate().is_err());
        s.grid = vec![4.0, 4.0];
        assert!(s.validate().is_err());
        s.grid = vec![4.0];
        s.replications = 0;
        assert!(s.validate().is_err());
        let mut s = ttrt_spec(Mode::Analytical);
        s.variable = SweepVariable::ActiveMacs;
        s.grid = vec![1.5, 2.0];
        assert!(s.validate().is_err());
    }

    #[test]
    fn row_layout_and_order() {
        let rows = run_sweep(&ttrt_spec(Mode::Both)).unwrap();
        // analytical + 2 replications per point
        assert_eq!(rows.len(), 9);
        let sources: Vec<_> = rows.iter().take(3).map(|r| (r.source, r.replication, r.seed)).collect();
        assert_eq!(
            sources,
            vec![
                (RowSource::Analytical, None, 9),
                (RowSource::Simulated, Some(0), 9),
                (RowSource::Simulated, Some(1), 10)
            ]
        );
        let csv = to_csv_string(&rows).unwrap();
        let mut lines = csv.lines();
        let header = lines.next().unwrap();
        assert!(header.starts_with("ttrt_ms,label,fiber_km,star_radius_km,macs,active,frame_bytes,"));
        assert_eq!(header.matches("ttrt_ms").count(), 1);
        assert!(header.ends_with("max_rotation_ms,trt_violations,error"));
        let first = lines.next().unwrap();
        assert!(
            first.starts_with("4,typical,4,0.1,20,20,4500,,0,true,,analytical,,9,"),
            "{first}"
        );
        let width = header.split(',').count();
        assert!(csv.lines().all(|l| l.split(',').count() == width));
    }

    #[test]
    fn saturated_points_are_marked_and_sweep_continues() {
        let mut base = PointParams::for_preset(Preset::Largest, 8.0).allowing_nonstandard_ttrt();
        base.duration_ms = 50.0;
        let spec = SweepSpec {
            variable: SweepVariable::Ttrt,
            grid: vec![1.0, 2.0, 4.0],
            base,
            mode: Mode::Both,
            replications: 1,
            seed: 1,
        };
        let rows = run_sweep(&spec).unwrap();
        assert_eq!(rows.len(), 6);
        for r in &rows[..4] {
            assert_eq!(r.outcome, Err(SATURATED_MARKER.to_string()));
        }
        assert!(rows[4].outcome.is_ok());
        let csv = to_csv_string(&rows).unwrap();
        assert_eq!(csv.matches(SATURATED_MARKER).count(), 4);
    }

    #[test]
    fn invalid_points_abort() {
        let mut spec = ttrt_spec(Mode::Analytical);
        spec.variable = SweepVariable::TotalStations;
        spec.grid = vec![10.0, 2000.0];
        assert!(run_sweep(&spec).is_err());
    }

    #[test]
    fn simulated_ttrt_below_tmin_needs_override() {
        let mut p = PointParams::for_preset(Preset::Typical, 3.0);
        p.duration_ms = 10.0;
        assert!(run_point(&p, Mode::Simulate, 1, 1).is_err());
        p.allow_nonstandard_ttrt = true;
        assert!(run_point(&p, Mode::Simulate, 1, 1).is_ok());
    }

    #[test]
    fn variables_round_trip_by_name_and_column() {
        for v in SweepVariable::ALL {
            assert_eq!(v.name().parse::<SweepVariable>().unwrap(), v);
            assert_eq!(v.column().parse::<SweepVariable>().unwrap(), v);
        }
    }

    #[test]
    fn with_value_sets_the_right_field() {
        let p = PointParams::custom(10.0, 50, 8.0);
        assert_eq!(p.with_value(SweepVariable::Ttrt, 4.0).ttrt_ms, 4.0);
        assert_eq!(p.with_value(SweepVariable::Extent, 20.0).fiber_km, 20.0);
        assert_eq!(p.with_value(SweepVariable::TotalStations, 30.0).macs, 30);
        assert_eq!(p.with_value(SweepVariable::ActiveMacs, 5.0).n_active(), 5);
        assert_eq!(p.with_value(SweepVariable::FrameSize, 1000.0).frame_bytes, Some(1000));
        assert_eq!(p.with_value(SweepVariable::ActiveMacs, 500.0).n_active(), 50);
    }
}
