//! Monte-Carlo driver: runs many TXOPs per scenario, aggregates goodput and
//! delay, and sweeps one parameter axis with derived seeds.
//!
//! Reproducibility contract: the PRNG is ChaCha8 seeded with
//! `seed_from_u64(seed)`; per-MPDU loss draws consume exactly one 53-bit
//! uniform per data MPDU in transmission order, and nothing else draws.
//! A (config, seed) pair therefore determines every output bit.

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rayon::prelude::*;

use crate::airtime::TimingConstants;
use crate::aggregation::FrameArithmetic;
use crate::error::{Result, SimError};
use crate::mcs_select::{select_dl_mcs, select_ul_mcs};
use crate::phy_tables::{lookup_mcs, BerTable, PhyTable, MCS_COUNT};
use crate::txop::{
    link_params, ControlFrameSizes, NoTrace, SchedulingStrategy, StationStream, TraceSink,
    TxopEngine, TxopParams,
};

/// The PHY rate table and BER table a scenario runs against.
#[derive(Debug, Clone, PartialEq)]
pub struct TableSet {
    pub phy: PhyTable,
    pub ber: BerTable,
}

/// Full parameter set of one simulated scenario.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub stations: u32,
    pub segment_bytes: u32,
    pub strategy: SchedulingStrategy,
    /// Required for strategy 3, rejected otherwise.
    pub load: Option<f64>,
    pub snr_db: f64,
    /// Pin (DL, UL) MCS indices and bypass selection. The UL stays
    /// loss-free by model even if the pinned UL MCS has nonzero BER.
    pub mcs_override: Option<(u8, u8)>,
    pub txop_count: u64,
    pub seed: u64,
    /// Guard converting a non-terminating strategy into an error.
    pub max_cycles: u32,
    pub timing: TimingConstants,
    pub frames: ControlFrameSizes,
    pub arith: FrameArithmetic,
    pub tables: TableSet,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tables.phy.station_count != self.stations {
            return Err(SimError::InvalidConfig(format!(
                "PHY table is bound to {} stations, scenario has {}",
                self.tables.phy.station_count, self.stations
            )));
        }
        if self.segment_bytes == 0 {
            return Err(SimError::InvalidConfig("segment size must be positive".into()));
        }
        if self.txop_count == 0 {
            return Err(SimError::InvalidConfig("txop count must be at least 1".into()));
        }
        if self.max_cycles == 0 {
            return Err(SimError::InvalidConfig("max cycles must be at least 1".into()));
        }
        match (self.strategy, self.load) {
            (SchedulingStrategy::MaxGoodput, None) => Err(SimError::InvalidConfig(
                "strategy 3 requires a load in (0, 1]".into(),
            )),
            (SchedulingStrategy::MaxGoodput, Some(l)) if !(l > 0.0 && l <= 1.0) => Err(
                SimError::InvalidConfig(format!("load must be in (0, 1] (got {l})")),
            ),
            (SchedulingStrategy::MaxGoodput, Some(_)) => Ok(()),
            (_, Some(_)) => Err(SimError::InvalidConfig(
                "load only applies to strategy 3".into(),
            )),
            (_, None) => Ok(()),
        }?;
        if let Some((dl, ul)) = self.mcs_override {
            if dl as usize >= MCS_COUNT || ul as usize >= MCS_COUNT {
                return Err(SimError::McsOutOfRange(dl.max(ul) as u32));
            }
        }
        Ok(())
    }
}

/// Aggregated scenario metrics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    /// Delivered TCP payload bits over elapsed time, Mbps.
    pub goodput_mbps: f64,
    pub mean_txop_ms: f64,
    pub txop_p95_ms: f64,
    pub mean_dl_cycles: f64,
    /// Dispersion diagnostic: stderr of per-TXOP delivered bits, scaled by
    /// the mean TXOP duration. Exactly 0 when every TXOP delivers the same
    /// amount (always the case on a clean channel).
    pub goodput_stderr_mbps: f64,
}

/// Metrics plus the MCS pair the scenario ran with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationOutput {
    pub dl_mcs: u8,
    pub ul_mcs: u8,
    pub metrics: Metrics,
}

fn prepare(cfg: &ScenarioConfig) -> Result<(TxopEngine, u8, u8)> {
    let row = cfg.tables.ber.lookup_row(cfg.snr_db)?;
    let (dl_idx, ul_idx) = match cfg.mcs_override {
        Some(pair) => pair,
        None => {
            let msdu_len = crate::aggregation::msdu_on_air_size(&cfg.arith, cfg.segment_bytes);
            let dl = select_dl_mcs(
                &row.ber,
                &cfg.tables.phy,
                &cfg.arith,
                msdu_len,
                cfg.segment_bytes as u64 * 8,
            )?;
            let ul = select_ul_mcs(&row.ber)?;
            (dl, ul)
        }
    };
    let dl_entry = *lookup_mcs(&cfg.tables.phy, dl_idx as u32)?;
    let ul_entry = *lookup_mcs(&cfg.tables.phy, ul_idx as u32)?;
    let link = link_params(
        dl_entry,
        ul_entry,
        row.ber[dl_idx as usize],
        cfg.segment_bytes,
        &cfg.frames,
        &cfg.arith,
        &cfg.timing,
    )?;
    let engine = TxopEngine::new(TxopParams {
        stations: cfg.stations,
        strategy: cfg.strategy,
        load: cfg.load.unwrap_or(1.0),
        timing: cfg.timing,
        frames: cfg.frames,
        arith: cfg.arith,
        link,
        max_cycles: cfg.max_cycles,
    })?;
    Ok((engine, dl_idx, ul_idx))
}

/// Run `txop_count` TXOPs with persistent per-station streams.
pub fn simulate(cfg: &ScenarioConfig) -> Result<SimulationOutput> {
    simulate_traced(cfg, &mut NoTrace)
}

pub fn simulate_traced(cfg: &ScenarioConfig, trace: &mut dyn TraceSink) -> Result<SimulationOutput> {
    cfg.validate()?;
    let (mut engine, dl_mcs, ul_mcs) = prepare(cfg)?;
    let mut streams = vec![StationStream::new(); cfg.stations as usize];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let n = cfg.txop_count as usize;
    let mut durations = Vec::with_capacity(n);
    let mut bits = Vec::with_capacity(n);
    let mut cycles = Vec::with_capacity(n);
    for i in 0..cfg.txop_count {
        let rec = engine.run_txop(&mut streams, &mut rng, i, trace)?;
        durations.push(rec.duration_us);
        bits.push(rec.data_bits_delivered);
        cycles.push(rec.dl_cycles);
    }
    Ok(SimulationOutput {
        dl_mcs,
        ul_mcs,
        metrics: metrics_from(&durations, &bits, &cycles),
    })
}

fn metrics_from(durations: &[f64], bits: &[u64], cycles: &[u32]) -> Metrics {
    let n = durations.len();
    let total_us: f64 = durations.iter().sum();
    let total_bits: u64 = bits.iter().sum();
    let mean_us = total_us / n as f64;

    let mut sorted = durations.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let p95_idx = ((0.95 * n as f64).ceil() as usize).clamp(1, n) - 1;

    let stderr = if n > 1 {
        let mean_bits = total_bits as f64 / n as f64;
        let var = bits
            .iter()
            .map(|&b| (b as f64 - mean_bits).powi(2))
            .sum::<f64>()
            / (n as f64 - 1.0);
        var.sqrt() / (n as f64).sqrt() / mean_us
    } else {
        0.0
    };

    Metrics {
        goodput_mbps: total_bits as f64 / total_us,
        mean_txop_ms: mean_us / 1000.0,
        txop_p95_ms: sorted[p95_idx] / 1000.0,
        mean_dl_cycles: cycles.iter().map(|&c| c as f64).sum::<f64>() / n as f64,
        goodput_stderr_mbps: stderr,
    }
}

/// Swept parameter axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Snr,
    Load,
    Stations,
    Segment,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::Snr => "snr",
            SweepAxis::Load => "load",
            SweepAxis::Stations => "stations",
            SweepAxis::Segment => "segment",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "snr" => Ok(SweepAxis::Snr),
            "load" => Ok(SweepAxis::Load),
            "stations" => Ok(SweepAxis::Stations),
            "segment" => Ok(SweepAxis::Segment),
            other => Err(SimError::InvalidConfig(format!(
                "unknown sweep axis {other:?} (snr, load, stations, segment)"
            ))),
        }
    }
}

/// One sweep row: the effective scenario knobs plus the outcome. Failures
/// are carried per point instead of aborting the sweep.
#[derive(Debug)]
pub struct SweepPoint {
    pub axis_value: f64,
    pub stations: u32,
    pub segment_bytes: u32,
    pub strategy: SchedulingStrategy,
    pub load: Option<f64>,
    pub snr_db: f64,
    pub seed: u64,
    pub outcome: Result<SimulationOutput>,
}

/// Run one simulate per axis value, in parallel, with derived seeds
/// (base seed XOR point index). Results keep input order. The stations axis
/// re-resolves tables through `tables_for`; other axes reuse the base set.
pub fn sweep(
    base: &ScenarioConfig,
    axis: SweepAxis,
    values: &[f64],
    tables_for: &(dyn Fn(u32) -> Result<TableSet> + Sync),
) -> Vec<SweepPoint> {
    values
        .par_iter()
        .enumerate()
        .map(|(i, &v)| {
            let mut cfg = base.clone();
            cfg.seed = base.seed ^ i as u64;
            let setup: Result<()> = (|| {
                match axis {
                    SweepAxis::Snr => cfg.snr_db = v,
                    SweepAxis::Load => cfg.load = Some(v),
                    SweepAxis::Segment => {
                        if v <= 0.0 || v.fract() != 0.0 {
                            return Err(SimError::InvalidConfig(format!(
                                "segment size must be a positive integer (got {v})"
                            )));
                        }
                        cfg.segment_bytes = v as u32;
                    }
                    SweepAxis::Stations => {
                        if v <= 0.0 || v.fract() != 0.0 {
                            return Err(SimError::InvalidConfig(format!(
                                "station count must be a positive integer (got {v})"
                            )));
                        }
                        cfg.stations = v as u32;
                        cfg.tables = tables_for(cfg.stations)?;
                    }
                }
                Ok(())
            })();
            let outcome = setup.and_then(|()| simulate(&cfg));
            SweepPoint {
                axis_value: v,
                stations: cfg.stations,
                segment_bytes: cfg.segment_bytes,
                strategy: cfg.strategy,
                load: cfg.load,
                snr_db: cfg.snr_db,
                seed: cfg.seed,
                outcome,
            }
        })
        .collect()
}
