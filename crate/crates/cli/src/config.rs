//! Layered configuration: built-in defaults, then a preset, then a TOML
//! file, then command-line flags.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use ttrt_core::sweep::{Mode, PointParams, SweepVariable, DEFAULT_DURATION_MS, DEFAULT_SEED};
use ttrt_core::{Figure, Preset, RingConfig};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub ring: RingSection,
    #[serde(default)]
    pub protocol: ProtocolSection,
    #[serde(default)]
    pub workload: WorkloadSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub sweep: SweepSection,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingSection {
    pub preset: Option<Preset>,
    pub fiber_km: Option<f64>,
    pub macs: Option<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSection {
    pub ttrt_ms: Option<f64>,
    pub token_time_us: Option<f64>,
    pub overflow: Option<bool>,
    pub allow_nonstandard_ttrt: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkloadSection {
    pub active: Option<u32>,
    pub frame_bytes: Option<u32>,
    pub load_pct: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub seed: Option<u64>,
    pub duration_ms: Option<f64>,
    pub replications: Option<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub figure: Option<Figure>,
    pub variable: Option<SweepVariable>,
    pub grid: Option<Vec<f64>>,
    pub mode: Option<Mode>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Fields set in `over` replace those in `self`.
    pub fn overlay(self, over: ConfigFile) -> ConfigFile {
        let ring = RingSection {
            preset: over.ring.preset.or(self.ring.preset),
            fiber_km: over.ring.fiber_km.or(self.ring.fiber_km),
            macs: over.ring.macs.or(self.ring.macs),
        };
        let protocol = ProtocolSection {
            ttrt_ms: over.protocol.ttrt_ms.or(self.protocol.ttrt_ms),
            token_time_us: over.protocol.token_time_us.or(self.protocol.token_time_us),
            overflow: over.protocol.overflow.or(self.protocol.overflow),
            allow_nonstandard_ttrt: over
                .protocol
                .allow_nonstandard_ttrt
                .or(self.protocol.allow_nonstandard_ttrt),
        };
        let workload = WorkloadSection {
            active: over.workload.active.or(self.workload.active),
            frame_bytes: over.workload.frame_bytes.or(self.workload.frame_bytes),
            load_pct: over.workload.load_pct.or(self.workload.load_pct),
        };
        let run = RunSection {
            seed: over.run.seed.or(self.run.seed),
            duration_ms: over.run.duration_ms.or(self.run.duration_ms),
            replications: over.run.replications.or(self.run.replications),
        };
        let sweep = SweepSection {
            figure: over.sweep.figure.or(self.sweep.figure),
            variable: over.sweep.variable.or(self.sweep.variable),
            grid: over.sweep.grid.or(self.sweep.grid),
            mode: over.sweep.mode.or(self.sweep.mode),
        };
        ConfigFile {
            ring,
            protocol,
            workload,
            run,
            sweep,
        }
    }

    /// Every field filled in, with the preset expanded, so the dump alone
    /// reproduces the run.
    pub fn resolved(&self) -> Result<ConfigFile> {
        let preset = self.ring.preset;
        let (fiber_km, macs) = match (preset, self.ring.fiber_km, self.ring.macs) {
            (_, Some(f), Some(m)) => (f, m),
            (Some(p), f, m) => (f.unwrap_or(p.fiber_km()), m.unwrap_or(p.mac_count())),
            (None, _, _) => bail!("ring is underspecified: give --preset or both --fiber-km and --macs"),
        };
        Ok(ConfigFile {
            ring: RingSection {
                preset,
                fiber_km: Some(fiber_km),
                macs: Some(macs),
            },
            protocol: ProtocolSection {
                ttrt_ms: self.protocol.ttrt_ms.or(Some(ttrt_core::presets::RECOMMENDED_TTRT_MS)),
                token_time_us: self.protocol.token_time_us.or(Some(RingConfig::DEFAULT_TOKEN_TIME_US)),
                overflow: self.protocol.overflow.or(Some(true)),
                allow_nonstandard_ttrt: self.protocol.allow_nonstandard_ttrt.or(Some(false)),
            },
            workload: WorkloadSection {
                active: self.workload.active.or(Some(macs)),
                frame_bytes: self.workload.frame_bytes,
                load_pct: self.workload.load_pct,
            },
            run: RunSection {
                seed: self.run.seed.or(Some(DEFAULT_SEED)),
                duration_ms: self.run.duration_ms.or(Some(DEFAULT_DURATION_MS)),
                replications: self.run.replications.or(Some(1)),
            },
            sweep: self.sweep.clone(),
        })
    }

    /// Point parameters of a resolved configuration.
    pub fn point(&self) -> Result<PointParams> {
        let r = self.resolved()?;
        let label = r
            .ring
            .preset
            .map_or_else(|| "custom".to_string(), |p| p.name().to_string());
        let fiber = r.ring.fiber_km.expect("resolved");
        let macs = r.ring.macs.expect("resolved");
        let mut p = PointParams::custom(fiber, macs, r.protocol.ttrt_ms.expect("resolved"));
        p.label = label;
        p.active = r.workload.active;
        p.frame_bytes = r.workload.frame_bytes;
        p.load_pct = r.workload.load_pct;
        p.token_time_us = r.protocol.token_time_us.expect("resolved");
        p.overflow = r.protocol.overflow.expect("resolved");
        p.allow_nonstandard_ttrt = r.protocol.allow_nonstandard_ttrt.expect("resolved");
        p.duration_ms = r.run.duration_ms.expect("resolved");
        p.validate()?;
        Ok(p)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_and_preset_fills_ring() {
        let file: ConfigFile = toml::from_str(
            r#"
            [ring]
            preset = "big"
            [protocol]
            ttrt_ms = 12.0
            [run]
            seed = 5
            "#,
        )
        .unwrap();
        let mut flags = ConfigFile::default();
        flags.protocol.ttrt_ms = Some(20.0);
        let merged = file.overlay(flags).resolved().unwrap();
        assert_eq!(merged.protocol.ttrt_ms, Some(20.0));
        assert_eq!(merged.run.seed, Some(5));
        assert_eq!(merged.ring.macs, Some(100));
        assert_eq!(merged.ring.fiber_km, Some(200.0));
        assert_eq!(merged.workload.active, Some(100));
    }

    #[test]
    fn dump_round_trips() {
        let mut c = ConfigFile::default();
        c.ring.preset = Some(Preset::Typical);
        c.workload.load_pct = Some(58.0);
        let resolved = c.resolved().unwrap();
        let text = resolved.to_toml().unwrap();
        let back: ConfigFile = toml::from_str(&text).unwrap();
        assert_eq!(back, resolved);
        assert_eq!(back.resolved().unwrap(), resolved);
    }

    #[test]
    fn underspecified_ring_is_rejected() {
        let mut c = ConfigFile::default();
        c.ring.fiber_km = Some(3.0);
        assert!(c.resolved().is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<ConfigFile>("[ring]\nbogus = 1\n").is_err());
    }
}
