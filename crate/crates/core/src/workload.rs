//! Traffic sources for the simulator.
//!
//! The bursty workload is a Poisson stream of bursts: exponential gaps,
//! a fixed number of frames per burst, each frame independently small or
//! large. All frames of a burst arrive at the same instant.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytical::{MAX_FRAME_BYTES, NOMINAL_BANDWIDTH_MBPS};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WorkloadError {
    #[error("frame size {0} bytes outside 1..={MAX_FRAME_BYTES}")]
    FrameSize(u32),
    #[error("small-frame fraction {0} outside [0, 1]")]
    Fraction(f64),
    #[error("mean inter-burst time {0} ms must be > 0")]
    Interburst(f64),
    #[error("burst size must be at least 1")]
    BurstSize,
    #[error("target utilization {0} must be in (0, 1] and station count > 0")]
    Utilization(f64),
}

fn check_frame(bytes: u32) -> Result<u32, WorkloadError> {
    if bytes == 0 || bytes > MAX_FRAME_BYTES {
        Err(WorkloadError::FrameSize(bytes))
    } else {
        Ok(bytes)
    }
}

/// Bursty-Poisson workload measured at a warehouse inventory control site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WicWorkload {
    pub mean_interburst_ms: f64,
    pub burst_size: u32,
    pub small_frame: u32,
    pub small_fraction: f64,
    pub large_frame: u32,
    pub seed: u64,
}

impl WicWorkload {
    /// Inter-burst time measured on the original network.
    pub const MEASURED_INTERBURST_MS: f64 = 8.0;
    /// Scaled-down inter-burst time used for the published simulations.
    pub const SCALED_INTERBURST_MS: f64 = 1.0;

    pub fn new(mean_interburst_ms: f64, seed: u64) -> Result<Self, WorkloadError> {
        WicWorkload {
            mean_interburst_ms,
            burst_size: 5,
            small_frame: 100,
            small_fraction: 0.65,
            large_frame: 512,
            seed,
        }
        .validated()
    }

    /// Default mix with the inter-burst time chosen so that `stations`
    /// identical sources load the ring to `utilization` of 100 Mbps.
    pub fn for_utilization(utilization: f64, stations: u32, seed: u64) -> Result<Self, WorkloadError> {
        if !(utilization > 0.0 && utilization <= 1.0) || stations == 0 {
            return Err(WorkloadError::Utilization(utilization));
        }
        let mut w = Self::new(Self::MEASURED_INTERBURST_MS, seed)?;
        let per_station_mbps = utilization * NOMINAL_BANDWIDTH_MBPS / f64::from(stations);
        // bits / (Mbit/s) = µs
        w.mean_interburst_ms = w.burst_bits() / per_station_mbps / 1000.0;
        w.validated()
    }

    pub fn validated(self) -> Result<Self, WorkloadError> {
        check_frame(self.small_frame)?;
        check_frame(self.large_frame)?;
        if !(0.0..=1.0).contains(&self.small_fraction) {
            return Err(WorkloadError::Fraction(self.small_fraction));
        }
        if self.mean_interburst_ms.is_nan() || self.mean_interburst_ms <= 0.0 {
            return Err(WorkloadError::Interburst(self.mean_interburst_ms));
        }
        if self.burst_size == 0 {
            return Err(WorkloadError::BurstSize);
        }
        Ok(self)
    }

    pub fn mean_frame_bytes(&self) -> f64 {
        self.small_fraction * f64::from(self.small_frame) + (1.0 - self.small_fraction) * f64::from(self.large_frame)
    }

    fn burst_bits(&self) -> f64 {
        f64::from(self.burst_size) * self.mean_frame_bytes() * 8.0
    }

    /// Expected offered load of one source in Mbps.
    pub fn offered_load(&self) -> f64 {
        if self.mean_interburst_ms.is_infinite() {
            return 0.0;
        }
        // bits per ms = kbit/s
        self.burst_bits() / self.mean_interburst_ms / 1000.0
    }

    pub fn max_frame_bytes(&self) -> u32 {
        match self.small_fraction {
            f if f >= 1.0 => self.small_frame,
            f if f <= 0.0 => self.large_frame,
            _ => self.small_frame.max(self.large_frame),
        }
    }

    pub fn min_frame_bytes(&self) -> u32 {
        match self.small_fraction {
            f if f >= 1.0 => self.small_frame,
            f if f <= 0.0 => self.large_frame,
            _ => self.small_frame.min(self.large_frame),
        }
    }

    /// Generator for the source attached to `station`. Every station draws
    /// from its own ChaCha8 stream of the same seed.
    pub fn generator(&self, station: usize) -> WicGenerator {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(station as u64);
        let gap = if self.mean_interburst_ms.is_finite() {
            Some(Exp::new(1.0 / self.mean_interburst_ms).expect("validated positive rate"))
        } else {
            None
        };
        WicGenerator {
            params: self.clone(),
            rng,
            gap,
        }
    }
}

/// One burst: arrival instant in ns and the frame sizes in bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Burst {
    pub at_ns: u64,
    pub frames: Vec<u32>,
}

#[derive(Debug, Clone)]
pub struct WicGenerator {
    params: WicWorkload,
    rng: ChaCha8Rng,
    gap: Option<Exp<f64>>,
}

impl WicGenerator {
    /// Next burst after `now_ns`, or `None` if the source never emits.
    pub fn next_burst(&mut self, now_ns: u64) -> Option<Burst> {
        let gap = self.gap?;
        let gap_ns = (gap.sample(&mut self.rng) * 1e6).round() as u64;
        let frames = (0..self.params.burst_size)
            .map(|_| {
                if self.rng.random::<f64>() < self.params.small_fraction {
                    self.params.small_frame
                } else {
                    self.params.large_frame
                }
            })
            .collect();
        Some(Burst {
            at_ns: now_ns.saturating_add(gap_ns),
            frames,
        })
    }
}

/// Stations that always hold a frame ready to send.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SaturationWorkload {
    pub frame_bytes: u32,
    pub stations: Vec<usize>,
}

impl SaturationWorkload {
    pub fn new(frame_bytes: u32, stations: Vec<usize>) -> Result<Self, WorkloadError> {
        check_frame(frame_bytes)?;
        Ok(SaturationWorkload { frame_bytes, stations })
    }
}

/// A single frame injected at a fixed instant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptedFrame {
    pub station: usize,
    pub at_ns: u64,
    pub bytes: u32,
}

/// Traffic attached to a ring for one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub enum Workload {
    Idle,
    Saturated(SaturationWorkload),
    /// Independent bursty sources on the listed stations.
    Wic {
        params: WicWorkload,
        stations: Vec<usize>,
    },
    Scripted(Vec<ScriptedFrame>),
}

impl Workload {
    /// Stations that may ever have traffic, ascending and deduplicated.
    pub fn active_stations(&self) -> Vec<usize> {
        let mut v: Vec<usize> = match self {
            Workload::Idle => Vec::new(),
            Workload::Saturated(s) => s.stations.clone(),
            Workload::Wic { stations, .. } => stations.clone(),
            Workload::Scripted(frames) => frames.iter().map(|f| f.station).collect(),
        };
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Expected offered load in Mbps; `None` when it is unbounded or not
    /// defined by a closed form.
    pub fn offered_load_mbps(&self) -> Option<f64> {
        match self {
            Workload::Idle => Some(0.0),
            Workload::Saturated(_) | Workload::Scripted(_) => None,
            Workload::Wic { params, .. } => Some(params.offered_load() * self.active_stations().len() as f64),
        }
    }

    pub fn max_frame_bytes(&self) -> Option<u32> {
        match self {
            Workload::Idle => None,
            Workload::Saturated(s) => Some(s.frame_bytes),
            Workload::Wic { params, .. } => Some(params.max_frame_bytes()),
            Workload::Scripted(frames) => frames.iter().map(|f| f.bytes).max(),
        }
    }

    /// True when every frame the workload can produce has the same size.
    pub fn fixed_frame_size(&self) -> bool {
        match self {
            Workload::Idle | Workload::Saturated(_) => true,
            Workload::Wic { params, .. } => params.min_frame_bytes() == params.max_frame_bytes(),
            Workload::Scripted(frames) => frames.windows(2).all(|w| w[0].bytes == w[1].bytes),
        }
    }
}

/// Evenly spread `n` active stations over a ring of `macs` MACs.
pub fn spread_stations(n: u32, macs: u32) -> Vec<usize> {
    let n = n.min(macs) as usize;
    let macs = macs as usize;
    (0..n).map(|i| i * macs / n).collect()
}
