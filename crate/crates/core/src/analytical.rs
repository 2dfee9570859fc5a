//! Closed-form heavy-load model of a timed-token ring.
//!
//! Every function here assumes `n` active stations that always have frames
//! queued. Durations cross the public boundary in milliseconds and are held
//! in microseconds internally, since station delays live at the µs scale.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Light propagation in fiber, µs per km.
pub const DEFAULT_PROPAGATION_US_PER_KM: f64 = 5.085;
/// Bit repeat delay of a single MAC, µs.
pub const DEFAULT_STATION_DELAY_US: f64 = 1.0;
/// Largest number of MACs a single logical ring may carry.
pub const MAX_MACS: u32 = 1000;
/// Nominal ring bandwidth in Mbps.
pub const NOMINAL_BANDWIDTH_MBPS: f64 = 100.0;
/// Transmission time of the 11-byte token (8 bytes of preamble included), ms.
pub const TOKEN_TIME_MS: f64 = 0.00088;
/// Largest frame on the ring, bytes.
pub const MAX_FRAME_BYTES: u32 = 4500;
/// Transmission time of a maximum-size frame, ms.
pub const MAX_FRAME_TIME_MS: f64 = 0.360;
/// Worst-case ring latency the standard allows, ms.
pub const MAX_RING_LATENCY_MS: f64 = 1.773;
/// Default largest T_min a station may carry; no ring TTRT may go below it.
pub const T_MIN_MS: f64 = 4.0;
/// Default smallest T_max a station may carry.
pub const T_MAX_MS: f64 = 165.0;
/// T_max derived from a 22-bit counter of 40 ns symbol-clock ticks.
pub const T_MAX_COUNTER_MS: f64 = 167.772_16;

const US_PER_MS: f64 = 1000.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticalError {
    #[error("ring saturated by latency: TTRT {ttrt_ms} ms does not exceed ring latency {ring_latency_ms} ms")]
    SaturatedByLatency { ttrt_ms: f64, ring_latency_ms: f64 },
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
}

impl AnalyticalError {
    fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        AnalyticalError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

/// Transmission time in ms of a frame of `bytes` at the nominal bandwidth.
pub fn frame_time_ms(bytes: u32) -> f64 {
    f64::from(bytes) * 8.0 / (NOMINAL_BANDWIDTH_MBPS * 1000.0)
}

/// Physical description of a ring: fiber length and the MACs attached to it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalRing {
    fiber_km: f64,
    mac_count: u32,
    propagation_us_per_km: f64,
    station_delay_us: f64,
}

impl PhysicalRing {
    /// Ring with the default propagation and station delay constants.
    pub fn new(fiber_km: f64, mac_count: u32) -> Result<Self, AnalyticalError> {
        Self::with_delays(
            fiber_km,
            mac_count,
            DEFAULT_PROPAGATION_US_PER_KM,
            DEFAULT_STATION_DELAY_US,
        )
    }

    pub fn with_delays(
        fiber_km: f64,
        mac_count: u32,
        propagation_us_per_km: f64,
        station_delay_us: f64,
    ) -> Result<Self, AnalyticalError> {
        if !(fiber_km >= 0.0 && fiber_km.is_finite()) {
            return Err(AnalyticalError::invalid(
                "fiber_km",
                format!("{fiber_km} must be finite and >= 0"),
            ));
        }
        if mac_count > MAX_MACS {
            return Err(AnalyticalError::invalid(
                "mac_count",
                format!("{mac_count} exceeds the {MAX_MACS}-MAC ring limit"),
            ));
        }
        if !(propagation_us_per_km > 0.0 && propagation_us_per_km.is_finite()) {
            return Err(AnalyticalError::invalid("propagation_us_per_km", "must be > 0"));
        }
        if !(station_delay_us > 0.0 && station_delay_us.is_finite()) {
            return Err(AnalyticalError::invalid("station_delay_us", "must be > 0"));
        }
        Ok(PhysicalRing {
            fiber_km,
            mac_count,
            propagation_us_per_km,
            station_delay_us,
        })
    }

    pub fn fiber_km(&self) -> f64 {
        self.fiber_km
    }

    pub fn mac_count(&self) -> u32 {
        self.mac_count
    }

    pub fn propagation_us_per_km(&self) -> f64 {
        self.propagation_us_per_km
    }

    pub fn station_delay_us(&self) -> f64 {
        self.station_delay_us
    }

    fn latency_us(&self) -> f64 {
        self.fiber_km * self.propagation_us_per_km + f64::from(self.mac_count) * self.station_delay_us
    }
}

/// Ring latency D in ms: fiber propagation plus the summed MAC repeat delays.
pub fn ring_latency(ring: &PhysicalRing) -> f64 {
    ring.latency_us() / US_PER_MS
}

/// Heavy-load model inputs: `n` active MACs, TTRT `T`, ring latency `D` and,
/// for the overflow model, the fixed frame time `F`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingParameters {
    n_active: u32,
    ttrt_us: f64,
    latency_us: f64,
    frame_time_us: Option<f64>,
}

impl RingParameters {
    pub fn new(n_active: u32, ttrt_ms: f64, ring_latency_ms: f64) -> Result<Self, AnalyticalError> {
        if n_active == 0 {
            return Err(AnalyticalError::invalid(
                "n_active",
                "at least one active MAC is required",
            ));
        }
        if !(ttrt_ms > 0.0 && ttrt_ms.is_finite()) {
            return Err(AnalyticalError::invalid("ttrt", format!("{ttrt_ms} ms must be > 0")));
        }
        if !(ring_latency_ms >= 0.0 && ring_latency_ms.is_finite()) {
            return Err(AnalyticalError::invalid(
                "ring_latency",
                format!("{ring_latency_ms} ms must be >= 0"),
            ));
        }
        Ok(RingParameters {
            n_active,
            ttrt_us: ttrt_ms * US_PER_MS,
            latency_us: ring_latency_ms * US_PER_MS,
            frame_time_us: None,
        })
    }

    pub fn with_frame_time_ms(mut self, frame_time_ms: f64) -> Result<Self, AnalyticalError> {
        if !(frame_time_ms > 0.0 && frame_time_ms.is_finite()) {
            return Err(AnalyticalError::invalid(
                "frame_time",
                format!("{frame_time_ms} ms must be > 0"),
            ));
        }
        self.frame_time_us = Some(frame_time_ms * US_PER_MS);
        Ok(self)
    }

    pub fn n_active(&self) -> u32 {
        self.n_active
    }

    pub fn ttrt_ms(&self) -> f64 {
        self.ttrt_us / US_PER_MS
    }

    pub fn ring_latency_ms(&self) -> f64 {
        self.latency_us / US_PER_MS
    }

    pub fn frame_time_ms(&self) -> Option<f64> {
        self.frame_time_us.map(|f| f / US_PER_MS)
    }

    fn ensure_usable(&self) -> Result<(), AnalyticalError> {
        if self.ttrt_us <= self.latency_us {
            return Err(AnalyticalError::SaturatedByLatency {
                ttrt_ms: self.ttrt_ms(),
                ring_latency_ms: self.ring_latency_ms(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticalResult {
    /// Usable fraction of the nominal bandwidth.
    pub efficiency: f64,
    pub max_access_delay_ms: f64,
    /// Frames sent per transmission opportunity (`k`), overflow model only.
    pub frames_per_opportunity: Option<u32>,
}

/// Heavy-load efficiency `n(T − D) / (nT + D)`.
pub fn efficiency(p: &RingParameters) -> Result<f64, AnalyticalError> {
    p.ensure_usable()?;
    let n = f64::from(p.n_active);
    Ok(n * (p.ttrt_us - p.latency_us) / (n * p.ttrt_us + p.latency_us))
}

/// Longest wait for a usable token, `(n − 1)T + 2D`, in ms.
pub fn max_access_delay(p: &RingParameters) -> f64 {
    let n = f64::from(p.n_active);
    ((n - 1.0) * p.ttrt_us + 2.0 * p.latency_us) / US_PER_MS
}

/// Efficiency and maximum access delay without asynchronous overflow.
pub fn analyze(p: &RingParameters) -> Result<AnalyticalResult, AnalyticalError> {
    Ok(AnalyticalResult {
        efficiency: efficiency(p)?,
        max_access_delay_ms: max_access_delay(p),
        frames_per_opportunity: None,
    })
}

/// Efficiency with a single active station, `(T − D) / (T + D)`.
pub fn single_station_efficiency(ttrt_ms: f64, ring_latency_ms: f64) -> Result<f64, AnalyticalError> {
    // With n = 1 the general form reduces to this one; sharing it keeps the two bit-identical.
    efficiency(&RingParameters::new(1, ttrt_ms, ring_latency_ms)?)
}

/// Limit of the efficiency as the number of active stations grows, `1 − D/T`.
pub fn asymptotic_efficiency(ttrt_ms: f64, ring_latency_ms: f64) -> f64 {
    debug_assert!(ttrt_ms > 0.0);
    1.0 - ring_latency_ms / ttrt_ms
}

/// Frames per opportunity `k = ⌈(T − D)/F⌉`.
///
/// A quotient within a few ulps of an integer is treated as that integer, so
/// that `T − D` being an exact multiple of `F` yields `kF = T − D`.
fn frames_per_opportunity(window_us: f64, frame_us: f64) -> u32 {
    let q = window_us / frame_us;
    let nearest = q.round();
    let k = if (q - nearest).abs() <= 1e-9 * q.max(1.0) {
        nearest
    } else {
        q.ceil()
    };
    k.max(1.0) as u32
}

/// Model with asynchronous overflow: each opportunity carries `k` whole frames.
pub fn overflow_model(p: &RingParameters) -> Result<AnalyticalResult, AnalyticalError> {
    let frame_us = p
        .frame_time_us
        .ok_or_else(|| AnalyticalError::invalid("frame_time", "the overflow model needs a frame time"))?;
    p.ensure_usable()?;
    let k = frames_per_opportunity(p.ttrt_us - p.latency_us, frame_us);
    let n = f64::from(p.n_active);
    let d = p.latency_us;
    let burst = f64::from(k) * frame_us;
    Ok(AnalyticalResult {
        efficiency: n * burst / (n * (burst + d) + d),
        max_access_delay_ms: ((n - 1.0) * (burst + d) + 2.0 * d) / US_PER_MS,
        frames_per_opportunity: Some(k),
    })
}

/// Which T_max the ring's stations are assumed to carry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TMax {
    #[default]
    Standard,
    Counter,
    Custom(f64),
}

impl TMax {
    pub fn ms(self) -> f64 {
        match self {
            TMax::Standard => T_MAX_MS,
            TMax::Counter => T_MAX_COUNTER_MS,
            TMax::Custom(v) => v,
        }
    }
}

/// Inputs to the TTRT rule check. All durations in ms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TtrtRequest {
    pub requested_ttrt_ms: f64,
    pub ring_latency_ms: f64,
    pub sync_allocation_ms: f64,
    pub max_frame_time_ms: f64,
    pub token_time_ms: f64,
    pub t_min_ms: f64,
    pub t_max: TMax,
    /// Service interval a synchronous station needs, if any.
    pub service_interval_ms: Option<f64>,
}

impl TtrtRequest {
    /// Request against `ring`, with no synchronous allocation and
    /// maximum-size frames.
    pub fn for_ring(requested_ttrt_ms: f64, ring: &PhysicalRing) -> Self {
        TtrtRequest {
            requested_ttrt_ms,
            ring_latency_ms: ring_latency(ring),
            ..Self::for_latency(requested_ttrt_ms, MAX_RING_LATENCY_MS)
        }
    }

    pub fn for_latency(requested_ttrt_ms: f64, ring_latency_ms: f64) -> Self {
        TtrtRequest {
            requested_ttrt_ms,
            ring_latency_ms,
            sync_allocation_ms: 0.0,
            max_frame_time_ms: MAX_FRAME_TIME_MS,
            token_time_ms: TOKEN_TIME_MS,
            t_min_ms: T_MIN_MS,
            t_max: TMax::Standard,
            service_interval_ms: None,
        }
    }

    /// Smallest TTRT that still fits one maximum-size frame plus the
    /// synchronous allocation into a rotation.
    pub fn frame_floor_ms(&self) -> f64 {
        self.ring_latency_ms + self.token_time_ms + self.max_frame_time_ms + self.sync_allocation_ms
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum RuleViolation {
    /// Rule 2: TTRT leaves no room for a maximum frame and the synchronous allocation.
    BelowFrameFloor { floor_ms: f64 },
    /// Rule 3.
    BelowTMin { t_min_ms: f64 },
    /// Rule 4.
    AboveTMax { t_max_ms: f64 },
}

impl std::fmt::Display for RuleViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RuleViolation::BelowFrameFloor { floor_ms } => write!(
                f,
                "rule 2: TTRT must cover ring latency, token, one max frame and the synchronous allocation ({floor_ms:.5} ms)"
            ),
            RuleViolation::BelowTMin { t_min_ms } => write!(f, "rule 3: TTRT below T_min ({t_min_ms} ms)"),
            RuleViolation::AboveTMax { t_max_ms } => write!(f, "rule 4: TTRT above T_max ({t_max_ms} ms)"),
        }
    }
}

/// Rule 1: a synchronous station should ask for half its service interval,
/// since a rotation can take up to twice the target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ServiceIntervalAdvisory {
    pub service_interval_ms: f64,
    pub recommended_ttrt_ms: f64,
    pub requested_meets_interval: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TtrtVerdict {
    pub requested_ttrt_ms: f64,
    /// Lowest TTRT satisfying rules 2 and 3 together.
    pub minimum_legal_ttrt_ms: f64,
    pub frame_floor_ms: f64,
    pub violations: Vec<RuleViolation>,
    pub advisory: Option<ServiceIntervalAdvisory>,
}

impl TtrtVerdict {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks a requested TTRT against the standard's setting rules. Violations
/// are reported in the verdict, never as errors.
pub fn validate_ttrt(req: &TtrtRequest) -> TtrtVerdict {
    let floor = req.frame_floor_ms();
    let t_max = req.t_max.ms();
    let mut violations = Vec::new();
    if req.requested_ttrt_ms < floor {
        violations.push(RuleViolation::BelowFrameFloor { floor_ms: floor });
    }
    if req.requested_ttrt_ms < req.t_min_ms {
        violations.push(RuleViolation::BelowTMin { t_min_ms: req.t_min_ms });
    }
    if req.requested_ttrt_ms > t_max {
        violations.push(RuleViolation::AboveTMax { t_max_ms: t_max });
    }
    let advisory = req.service_interval_ms.map(|s| ServiceIntervalAdvisory {
        service_interval_ms: s,
        recommended_ttrt_ms: s / 2.0,
        requested_meets_interval: req.requested_ttrt_ms <= s / 2.0,
    });
    TtrtVerdict {
        requested_ttrt_ms: req.requested_ttrt_ms,
        minimum_legal_ttrt_ms: floor.max(req.t_min_ms),
        frame_floor_ms: floor,
        violations,
        advisory,
    }
}
