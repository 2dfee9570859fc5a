//! Named ring configurations and figure recipes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analytical::{PhysicalRing, MAX_FRAME_BYTES};
use crate::sweep::{Mode, PointParams, SweepSpec, SweepVariable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// 20 single-attachment stations on 4 km of fiber.
    Typical,
    /// 100 single-attachment stations on 200 km of fiber.
    Big,
    /// 500 dual-attachment stations with two MACs each, wrapped onto 200 km.
    Largest,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Typical, Preset::Big, Preset::Largest];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Typical => "typical",
            Preset::Big => "big",
            Preset::Largest => "largest",
        }
    }

    pub fn sas_count(self) -> u32 {
        match self {
            Preset::Typical => 20,
            Preset::Big => 100,
            Preset::Largest => 0,
        }
    }

    pub fn das_count(self) -> u32 {
        match self {
            Preset::Largest => 500,
            _ => 0,
        }
    }

    pub fn macs_per_das(self) -> u32 {
        2
    }

    pub fn mac_count(self) -> u32 {
        self.sas_count() + self.das_count() * self.macs_per_das()
    }

    pub fn fiber_km(self) -> f64 {
        match self {
            Preset::Typical => 4.0,
            Preset::Big | Preset::Largest => 200.0,
        }
    }

    pub fn ring(self) -> PhysicalRing {
        PhysicalRing::new(self.fiber_km(), self.mac_count()).expect("preset rings are valid")
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown preset '{s}' (expected typical, big or largest)"))
    }
}

/// Fiber path of a star-wired ring: every station sits `radius_km` from the
/// wiring closet and its lobe is traversed out and back.
pub fn star_fiber_km(radius_km: f64, stations: u32) -> f64 {
    2.0 * radius_km * f64::from(stations)
}

/// Load levels of the response-time figure, percent of 100 Mbps.
pub const RESPONSE_LOADS_PCT: [f64; 3] = [28.0, 58.0, 90.0];
/// Stations in the response-time figure: forty sources at the measured
/// inter-burst time fill half the ring.
pub const RESPONSE_STATIONS: u32 = 40;
/// Fiber length of the response-time ring, km. Puts the usable bandwidth at
/// 4 ms TTRT just under the heaviest load level.
pub const RESPONSE_FIBER_KM: f64 = 100.0;

pub const TTRT_GRID_MS: [f64; 23] = [
    1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0, 12.0, 14.0, 16.0, 18.0, 20.0, 30.0, 40.0, 60.0, 80.0, 100.0,
    120.0, 140.0, 165.0,
];
pub const RESPONSE_TTRT_GRID_MS: [f64; 8] = [4.0, 8.0, 12.0, 16.0, 20.0, 40.0, 80.0, 165.0];
pub const ACTIVE_GRID: [f64; 10] = [1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0, 500.0, 1000.0];
pub const FRAME_GRID_BYTES: [f64; 11] = [
    100.0, 250.0, 500.0, 1000.0, 1500.0, 2000.0, 2500.0, 3000.0, 3500.0, 4000.0, 4500.0,
];
/// Default TTRT of the extent, station-count and frame-size figures.
pub const RECOMMENDED_TTRT_MS: f64 = 8.0;
pub const MAX_EXTENT_KM: f64 = 200.0;

/// One-command reproductions of the published figures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Figure {
    /// Efficiency against TTRT.
    Fig1,
    /// Maximum access delay against TTRT.
    Fig2,
    /// Simulated mean response time against TTRT at three loads.
    Fig3,
    /// Efficiency against extent.
    Fig4,
    /// Access delay against extent.
    Fig5,
    /// Efficiency against active MACs.
    Fig6,
    /// Access delay against active MACs.
    Fig7,
    /// Efficiency against frame size.
    Fig8,
    /// Access delay against frame size.
    Fig9,
}

impl Figure {
    pub const ALL: [Figure; 9] = [
        Figure::Fig1,
        Figure::Fig2,
        Figure::Fig3,
        Figure::Fig4,
        Figure::Fig5,
        Figure::Fig6,
        Figure::Fig7,
        Figure::Fig8,
        Figure::Fig9,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig1 => "fig1",
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
            Figure::Fig6 => "fig6",
            Figure::Fig7 => "fig7",
            Figure::Fig8 => "fig8",
            Figure::Fig9 => "fig9",
        }
    }

    /// Sweeps making up the figure, one per curve, in plotting order.
    pub fn specs(self, seed: u64, duration_ms: f64) -> Vec<SweepSpec> {
        let per_preset =
            |variable: SweepVariable, grid: &dyn Fn(Preset) -> Vec<f64>, base: &dyn Fn(Preset) -> PointParams| {
                Preset::ALL
                    .into_iter()
                    .map(|p| SweepSpec {
                        variable,
                        grid: grid(p),
                        base: base(p),
                        mode: Mode::Analytical,
                        replications: 1,
                        seed,
                    })
                    .collect::<Vec<_>>()
            };
        match self {
            Figure::Fig1 | Figure::Fig2 => per_preset(SweepVariable::Ttrt, &|_| TTRT_GRID_MS.to_vec(), &|p| {
                PointParams::for_preset(p, RECOMMENDED_TTRT_MS).allowing_nonstandard_ttrt()
            }),
            Figure::Fig3 => RESPONSE_LOADS_PCT
                .into_iter()
                .map(|load| {
                    let mut base = PointParams::custom(RESPONSE_FIBER_KM, RESPONSE_STATIONS, RECOMMENDED_TTRT_MS);
                    base.label = "fig3".into();
                    base.load_pct = Some(load);
                    base.duration_ms = duration_ms;
                    SweepSpec {
                        variable: SweepVariable::Ttrt,
                        grid: RESPONSE_TTRT_GRID_MS.to_vec(),
                        base,
                        mode: Mode::Simulate,
                        replications: 1,
                        seed,
                    }
                })
                .collect(),
            Figure::Fig4 | Figure::Fig5 => per_preset(
                SweepVariable::Extent,
                &|p| {
                    let max_radius = MAX_EXTENT_KM / (2.0 * f64::from(p.mac_count()));
                    (1..=10)
                        .map(|j| star_fiber_km(max_radius * f64::from(j) / 10.0, p.mac_count()))
                        .collect()
                },
                &|p| PointParams::for_preset(p, RECOMMENDED_TTRT_MS),
            ),
            Figure::Fig6 | Figure::Fig7 => {
                vec![SweepSpec {
                    variable: SweepVariable::ActiveMacs,
                    grid: ACTIVE_GRID.to_vec(),
                    base: PointParams::for_preset(Preset::Largest, RECOMMENDED_TTRT_MS),
                    mode: Mode::Analytical,
                    replications: 1,
                    seed,
                }]
            }
            Figure::Fig8 | Figure::Fig9 => per_preset(SweepVariable::FrameSize, &|_| FRAME_GRID_BYTES.to_vec(), &|p| {
                let mut base = PointParams::for_preset(p, RECOMMENDED_TTRT_MS);
                base.frame_bytes = Some(MAX_FRAME_BYTES);
                base
            }),
        }
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Figure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Figure::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown figure '{s}' (expected fig1 .. fig9)"))
    }
}
