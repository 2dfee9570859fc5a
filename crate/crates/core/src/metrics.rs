//! Reduction of raw simulator samples to throughput, response time and
//! access delay.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::sim::{
    self, ns_to_ms, AccessRecord, FrameRecord, Nanos, RingConfig, RotationStats, RunOutput, TokenRelease,
};
use crate::workload::Workload;

/// Exact order statistics over a retained sample set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleStats {
    pub mean: f64,
    pub max: f64,
    pub p95: f64,
    pub count: usize,
}

impl SampleStats {
    /// `None` for an empty sample set.
    pub fn from_samples(samples: &[f64]) -> Option<Self> {
        if samples.is_empty() {
            return None;
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let count = sorted.len();
        Some(SampleStats {
            mean: sorted.iter().sum::<f64>() / count as f64,
            max: sorted[count - 1],
            p95: nearest_rank(&sorted, 95.0),
            count,
        })
    }
}

/// Nearest-rank percentile of an ascending, nonempty slice.
pub fn nearest_rank(sorted: &[f64], pct: f64) -> f64 {
    let rank = ((pct / 100.0) * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

/// Samples left after the warm-up cut.
#[derive(Debug, Clone, PartialEq)]
pub struct RetainedSamples {
    pub frames: Vec<FrameRecord>,
    pub access: Vec<AccessRecord>,
    pub rotations: RotationStats,
    pub measured_interval_ns: Nanos,
    pub warmup: WarmupDiscard,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WarmupDiscard {
    pub duration_ms: f64,
    pub frames: usize,
    pub access_samples: usize,
}

impl RunOutput {
    /// Drops everything that began before the warm-up boundary: frames that
    /// arrived before it and access episodes that started before it.
    pub fn retained(&self) -> RetainedSamples {
        let cut = self.warmup_ns;
        let (frames, early_frames): (Vec<_>, Vec<_>) = self.frames.iter().partition(|f| f.arrived_ns >= cut);
        let (access, early_access): (Vec<_>, Vec<_>) = self.access.iter().partition(|a| a.wanted_ns >= cut);
        RetainedSamples {
            frames,
            access,
            rotations: self.rotations,
            measured_interval_ns: self.duration_ns - cut,
            warmup: WarmupDiscard {
                duration_ms: ns_to_ms(cut),
                frames: early_frames.len(),
                access_samples: early_access.len(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub throughput_mbps: f64,
    pub efficiency: f64,
    pub response_time_ms: Option<SampleStats>,
    pub access_delay_ms: Option<SampleStats>,
    pub offered_load_mbps: Option<f64>,
    pub warmup_discarded: WarmupDiscard,
    /// Largest access delay the heavy-load model allows for this run.
    pub access_bound_ms: Option<f64>,
    pub access_bound_respected: bool,
    pub per_station_mbps: BTreeMap<usize, f64>,
    pub max_rotation_ms: f64,
    pub trt_violations: u64,
}

/// Upper bound on any want-token to get-token interval:
/// `(n − 1)(X + D) + 2D`, where `X` is the longest single transmission
/// opportunity and `D` the idle rotation time including token passing.
pub fn access_delay_bound_ns(config: &RingConfig, workload: &Workload) -> Option<f64> {
    let n = workload.active_stations().len();
    let max_frame = workload.max_frame_bytes()?;
    if n == 0 {
        return None;
    }
    let ttrt = sim::ms_to_ns(config.ttrt_ms) as f64;
    let d = config.idle_rotation_ns() as f64;
    if ttrt <= d {
        return None;
    }
    let f = sim::frame_ns(max_frame) as f64;
    let window = ttrt - d;
    let mut opportunity = match (config.async_overflow, workload.fixed_frame_size()) {
        (true, true) => (window / f).ceil() * f,
        (true, false) => window + f,
        (false, _) => window,
    };
    if config.token_release == TokenRelease::AfterStrip {
        opportunity += config.ring_latency_ns() as f64;
    }
    Some((n as f64 - 1.0) * (opportunity + d) + 2.0 * d)
}

/// Builds the report from retained samples. Statistics with no samples are
/// reported as absent.
pub fn finalize(samples: &RetainedSamples, config: &RingConfig, workload: &Workload) -> MetricsReport {
    let interval = samples.measured_interval_ns;
    assert!(interval > 0, "measured interval must be positive");
    let mut per_station_bits: BTreeMap<usize, u64> = BTreeMap::new();
    for f in &samples.frames {
        *per_station_bits.entry(f.station).or_default() += u64::from(f.bytes) * 8;
    }
    let bits: u64 = per_station_bits.values().sum();
    let response: Vec<f64> = samples
        .frames
        .iter()
        .map(|f| ns_to_ms(f.completed_ns - f.arrived_ns))
        .collect();
    let access: Vec<f64> = samples.access.iter().map(|a| ns_to_ms(a.delay_ns())).collect();
    let bound_ns = access_delay_bound_ns(config, workload);
    let respected = match bound_ns {
        Some(b) => samples.access.iter().all(|a| a.delay_ns() as f64 <= b),
        None => samples.access.is_empty(),
    };
    MetricsReport {
        throughput_mbps: sim::throughput_mbps(bits, interval),
        efficiency: sim::bandwidth_share(bits, interval),
        response_time_ms: SampleStats::from_samples(&response),
        access_delay_ms: SampleStats::from_samples(&access),
        offered_load_mbps: workload.offered_load_mbps(),
        warmup_discarded: samples.warmup,
        access_bound_ms: bound_ns.map(|b| b / 1e6),
        access_bound_respected: respected,
        per_station_mbps: per_station_bits
            .into_iter()
            .map(|(s, b)| (s, sim::throughput_mbps(b, interval)))
            .collect(),
        max_rotation_ms: ns_to_ms(samples.rotations.max_ns),
        trt_violations: samples.rotations.violations,
    }
}

/// Warm-up cut followed by [`finalize`].
pub fn report(output: &RunOutput, config: &RingConfig, workload: &Workload) -> MetricsReport {
    finalize(&output.retained(), config, workload)
}
