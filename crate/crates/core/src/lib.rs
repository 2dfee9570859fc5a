//! Performance lab for timed-token (FDDI) rings.
//!
//! * [`analytical`] closed-form efficiency, access delay and TTRT rules.
//! * [`sim`] deterministic discrete-event simulator of the token MAC.
//! * [`workload`] bursty-Poisson and saturation traffic.
//! * [`metrics`] warm-up handling and metric reduction.
//! * [`sweep`], [`presets`] and [`table1`] drive parameter studies.

pub mod analytical;
pub mod metrics;
pub mod presets;
pub mod sim;
pub mod sweep;
pub mod table1;
pub mod workload;

pub use analytical::{AnalyticalError, AnalyticalResult, PhysicalRing, RingParameters};
pub use metrics::MetricsReport;
pub use presets::{Figure, Preset};
pub use sim::{RingConfig, RunOutput, RunSettings};
pub use sweep::{Mode, PointParams, SweepSpec, SweepVariable};
pub use workload::{WicWorkload, Workload};
