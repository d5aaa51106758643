//! Scenario assembly from flat key=value settings.
//!
//! The same keys back the CLI flags, the config file and the C API, so a
//! scenario can be described once and reproduced from any front end.

use std::path::{Path, PathBuf};

use crate::airtime::TimingConstants;
use crate::aggregation::FrameArithmetic;
use crate::error::{Result, SimError};
use crate::phy_tables::{
    bandwidth_for_stations, embedded_ber_table_160, embedded_phy_table, load_ber_table,
    load_phy_table, BerTable,
};
use crate::sim_engine::{ScenarioConfig, TableSet};
use crate::txop::{ControlFrameSizes, SchedulingStrategy};

/// Unresolved scenario: knobs plus the table-loading policy. `resolve`
/// turns it into a runnable `ScenarioConfig`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub stations: u32,
    pub segment: u32,
    pub strategy: Option<u8>,
    pub load: Option<f64>,
    pub snr: Option<f64>,
    pub mcs: Option<(u8, u8)>,
    pub txops: u64,
    pub seed: u64,
    pub max_cycles: u32,
    pub phy_table: Option<PathBuf>,
    pub ber_table: Option<PathBuf>,
    /// Reuse the 160 MHz BER table for 80/40/20 MHz runs. A modeling
    /// approximation: narrower channels generally reach a given BER at a
    /// lower SNR, so results at low SNR are optimistic.
    pub assume_same_ber: bool,
    pub tf_bytes: u32,
    pub back_bytes: u32,
    pub mba_base: u32,
    pub mba_per_sta: u32,
    pub sifs: f64,
    pub aifs_ap: f64,
    pub aifs_sta: f64,
    pub slot_time: f64,
    pub cw_min: u32,
    /// Explicit average backoff; when absent it is derived as
    /// (cw_min - 1) / 2 * slot_time.
    pub avg_backoff: Option<f64>,
    pub max_ppdu_us: f64,
    pub symbol_base: f64,
    pub dl_symbol: f64,
    pub ul_symbol: f64,
    pub legacy_symbol: f64,
    pub out: Option<PathBuf>,
    pub trace: Option<PathBuf>,
}

impl Default for RunSpec {
    fn default() -> Self {
        let t = TimingConstants::default();
        let f = ControlFrameSizes::default();
        RunSpec {
            stations: 4,
            segment: 1460,
            strategy: None,
            load: None,
            snr: None,
            mcs: None,
            txops: 10_000,
            seed: 1,
            max_cycles: 10_000,
            phy_table: None,
            ber_table: None,
            assume_same_ber: false,
            tf_bytes: f.tf_bytes,
            back_bytes: f.back_bytes,
            mba_base: f.mba_base_bytes,
            mba_per_sta: f.mba_per_station_bytes,
            sifs: t.sifs,
            aifs_ap: t.aifs_ap,
            aifs_sta: t.aifs_sta,
            slot_time: t.slot_time,
            cw_min: t.cw_min,
            avg_backoff: None,
            max_ppdu_us: t.max_ppdu_duration,
            symbol_base: t.symbol_base,
            dl_symbol: t.dl_symbol,
            ul_symbol: t.ul_symbol,
            legacy_symbol: t.legacy_symbol,
            out: None,
            trace: None,
        }
    }
}

pub fn parse_mcs_pair(s: &str) -> Result<(u8, u8)> {
    let bad = || SimError::InvalidConfig(format!("mcs must be DL:UL, e.g. 11:10 (got {s:?})"));
    let (dl, ul) = s.split_once(':').ok_or_else(bad)?;
    let dl = dl.trim().parse::<u8>().map_err(|_| bad())?;
    let ul = ul.trim().parse::<u8>().map_err(|_| bad())?;
    Ok((dl, ul))
}

impl RunSpec {
    /// Apply one key=value setting. Keys use the CLI long-flag spelling.
    pub fn apply_kv(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value.trim().parse::<T>().map_err(|_| {
                SimError::InvalidConfig(format!("bad value {value:?} for key {key:?}"))
            })
        }
        let v = value.trim();
        match key {
            "stations" => self.stations = num(key, v)?,
            "segment" => self.segment = num(key, v)?,
            "strategy" => self.strategy = Some(num(key, v)?),
            "load" => self.load = Some(num(key, v)?),
            "snr" => self.snr = Some(num(key, v)?),
            "mcs" => self.mcs = Some(parse_mcs_pair(v)?),
            "txops" => self.txops = num(key, v)?,
            "seed" => self.seed = num(key, v)?,
            "max-cycles" => self.max_cycles = num(key, v)?,
            "phy-table" => self.phy_table = Some(PathBuf::from(v)),
            "ber-table" => self.ber_table = Some(PathBuf::from(v)),
            "assume-same-ber" => self.assume_same_ber = num::<bool>(key, v)?,
            "tf-bytes" => self.tf_bytes = num(key, v)?,
            "back-bytes" => self.back_bytes = num(key, v)?,
            "mba-base" => self.mba_base = num(key, v)?,
            "mba-per-sta" => self.mba_per_sta = num(key, v)?,
            "sifs" => self.sifs = num(key, v)?,
            "aifs-ap" => self.aifs_ap = num(key, v)?,
            "aifs-sta" => self.aifs_sta = num(key, v)?,
            "slot-time" => self.slot_time = num(key, v)?,
            "cw-min" => self.cw_min = num(key, v)?,
            "avg-backoff" => self.avg_backoff = Some(num(key, v)?),
            "max-ppdu-us" => self.max_ppdu_us = num(key, v)?,
            "symbol-base" => self.symbol_base = num(key, v)?,
            "dl-symbol" => self.dl_symbol = num(key, v)?,
            "ul-symbol" => self.ul_symbol = num(key, v)?,
            "legacy-symbol" => self.legacy_symbol = num(key, v)?,
            "out" => self.out = Some(PathBuf::from(v)),
            "trace" => self.trace = Some(PathBuf::from(v)),
            other => {
                return Err(SimError::InvalidConfig(format!(
                    "unknown config key {other:?}"
                )))
            }
        }
        Ok(())
    }

    /// Parse a flat key=value file: one setting per line, `#` comments and
    /// blank lines ignored.
    pub fn from_file(path: &Path) -> Result<RunSpec> {
        let mut spec = RunSpec::default();
        let text = std::fs::read_to_string(path)?;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                SimError::InvalidConfig(format!(
                    "{}:{}: expected key=value",
                    path.display(),
                    lineno + 1
                ))
            })?;
            spec.apply_kv(key.trim(), value)?;
        }
        Ok(spec)
    }

    pub fn timing(&self) -> TimingConstants {
        TimingConstants {
            sifs: self.sifs,
            aifs_ap: self.aifs_ap,
            aifs_sta: self.aifs_sta,
            slot_time: self.slot_time,
            cw_min: self.cw_min,
            avg_backoff: self
                .avg_backoff
                .unwrap_or((self.cw_min.saturating_sub(1)) as f64 / 2.0 * self.slot_time),
            symbol_base: self.symbol_base,
            dl_symbol: self.dl_symbol,
            ul_symbol: self.ul_symbol,
            legacy_symbol: self.legacy_symbol,
            max_ppdu_duration: self.max_ppdu_us,
        }
    }

    pub fn frames(&self) -> ControlFrameSizes {
        ControlFrameSizes {
            tf_bytes: self.tf_bytes,
            back_bytes: self.back_bytes,
            mba_base_bytes: self.mba_base,
            mba_per_station_bytes: self.mba_per_sta,
        }
    }

    /// Load or synthesize the table set for a group size, honoring the
    /// file overrides and the same-BER approximation flag.
    pub fn resolve_tables(&self, stations: u32) -> Result<TableSet> {
        let bandwidth = bandwidth_for_stations(stations)?;
        let phy = match &self.phy_table {
            Some(p) => load_phy_table(p, stations)?,
            None => embedded_phy_table(stations)?,
        };
        let ber = match &self.ber_table {
            Some(p) => load_ber_table(p, bandwidth)?,
            None if bandwidth == 160 => embedded_ber_table_160(),
            None if self.assume_same_ber => BerTable {
                bandwidth_mhz: bandwidth,
                rows: embedded_ber_table_160().rows,
            },
            None => {
                return Err(SimError::InvalidConfig(format!(
                    "no embedded BER table for {bandwidth} MHz ({stations} stations); \
                     supply ber-table or set assume-same-ber"
                )))
            }
        };
        Ok(TableSet { phy, ber })
    }

    /// Turn the spec into a runnable, validated scenario.
    pub fn resolve(&self) -> Result<ScenarioConfig> {
        let strategy_id = self
            .strategy
            .ok_or_else(|| SimError::InvalidConfig("missing strategy (1, 2 or 3)".into()))?;
        let strategy = SchedulingStrategy::from_id(strategy_id)?;
        let snr_db = self
            .snr
            .ok_or_else(|| SimError::InvalidConfig("missing snr".into()))?;
        let cfg = ScenarioConfig {
            stations: self.stations,
            segment_bytes: self.segment,
            strategy,
            load: self.load,
            snr_db,
            mcs_override: self.mcs,
            txop_count: self.txops,
            seed: self.seed,
            max_cycles: self.max_cycles,
            timing: self.timing(),
            frames: self.frames(),
            arith: FrameArithmetic::default(),
            tables: self.resolve_tables(self.stations)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// The effective configuration as `# key=value` comment lines, echoed
    /// into every results file. Fixed key order, shortest-roundtrip floats.
    pub fn echo_lines(&self) -> Vec<String> {
        let f = crate::phy_tables::fmt_f64;
        let opt_path = |p: &Option<PathBuf>| {
            p.as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_default()
        };
        let mut lines = vec![
            format!("# stations={}", self.stations),
            format!("# segment={}", self.segment),
            format!(
                "# strategy={}",
                self.strategy.map(|s| s.to_string()).unwrap_or_default()
            ),
            format!(
                "# load={}",
                self.load.map(f).unwrap_or_default()
            ),
            format!("# snr={}", self.snr.map(f).unwrap_or_default()),
            format!(
                "# mcs={}",
                self.mcs
                    .map(|(d, u)| format!("{d}:{u}"))
                    .unwrap_or_default()
            ),
            format!("# txops={}", self.txops),
            format!("# seed={}", self.seed),
            format!("# max-cycles={}", self.max_cycles),
            format!("# phy-table={}", opt_path(&self.phy_table)),
            format!("# ber-table={}", opt_path(&self.ber_table)),
            format!("# assume-same-ber={}", self.assume_same_ber),
            format!("# tf-bytes={}", self.tf_bytes),
            format!("# back-bytes={}", self.back_bytes),
            format!("# mba-base={}", self.mba_base),
            format!("# mba-per-sta={}", self.mba_per_sta),
        ];
        let t = self.timing();
        lines.extend([
            format!("# sifs={}", f(t.sifs)),
            format!("# aifs-ap={}", f(t.aifs_ap)),
            format!("# aifs-sta={}", f(t.aifs_sta)),
            format!("# slot-time={}", f(t.slot_time)),
            format!("# cw-min={}", t.cw_min),
            format!("# avg-backoff={}", f(t.avg_backoff)),
            format!("# max-ppdu-us={}", f(t.max_ppdu_duration)),
            format!("# symbol-base={}", f(t.symbol_base)),
            format!("# dl-symbol={}", f(t.dl_symbol)),
            format!("# ul-symbol={}", f(t.ul_symbol)),
            format!("# legacy-symbol={}", f(t.legacy_symbol)),
        ]);
        lines
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kv_round_trip_and_defaults() {
        let mut spec = RunSpec::default();
        assert_eq!(spec.timing(), TimingConstants::default());
        spec.apply_kv("strategy", "3").unwrap();
        spec.apply_kv("load", "0.03").unwrap();
        spec.apply_kv("snr", "36.6").unwrap();
        spec.apply_kv("mcs", "11:10").unwrap();
        spec.apply_kv("cw-min", "32").unwrap();
        spec.apply_kv("slot-time", "9").unwrap();
        let cfg = spec.resolve().unwrap();
        assert_eq!(cfg.mcs_override, Some((11, 10)));
        // Derived backoff follows the overridden contention window.
        assert_eq!(cfg.timing.avg_backoff, 31.0 / 2.0 * 9.0);
        spec.apply_kv("avg-backoff", "67.5").unwrap();
        assert_eq!(spec.resolve().unwrap().timing.avg_backoff, 67.5);
    }

    #[test]
    fn unknown_key_rejected() {
        let mut spec = RunSpec::default();
        assert!(spec.apply_kv("bogus", "1").is_err());
        assert!(spec.apply_kv("load", "abc").is_err());
    }

    #[test]
    fn missing_required_fields() {
        let spec = RunSpec::default();
        assert!(matches!(spec.resolve(), Err(SimError::InvalidConfig(_))));
        let mut spec = RunSpec::default();
        spec.strategy = Some(3);
        spec.snr = Some(36.6);
        // Strategy 3 without a load fails scenario validation.
        assert!(spec.resolve().is_err());
    }

    #[test]
    fn non_160_bandwidth_needs_flag_or_table() {
        let mut spec = RunSpec::default();
        spec.strategy = Some(2);
        spec.snr = Some(36.6);
        spec.stations = 8;
        assert!(spec.resolve().is_err());
        spec.assume_same_ber = true;
        let cfg = spec.resolve().unwrap();
        assert_eq!(cfg.tables.ber.bandwidth_mhz, 80);
        assert_eq!(cfg.tables.phy.station_count, 8);
    }
}
