//! The TXOP state machine.
//!
//! One TXOP is a full access cycle: average backoff and AIFS, one or more
//! DL MU data cycles (DL PPDU, SIFS, UL BAck PPDU, SIFS), a broadcast
//! Trigger Frame, the UL MU ack PPDU, and the closing Multi-Station BAck.
//! The scheduling strategy decides when the data cycles stop; the DL is
//! lossy per MPDU, everything else is reliable.

use std::collections::BTreeSet;

use rand_core::RngCore;

use crate::aggregation::{
    max_acks_per_station, mpdu_bits, plan_ack_ampdu, FrameArithmetic,
};
use crate::airtime::{legacy_frame_duration, mu_ppdu_duration, TimingConstants};
use crate::error::{Result, SimError};
use crate::phy_tables::McsEntry;

/// Byte sizes of the control frames the model cannot derive from anywhere;
/// exposed as knobs with stated defaults.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ControlFrameSizes {
    /// Trigger Frame, both the per-station MPDU aggregated in the DL data
    /// A-MPDU and the broadcast TF before the ack cycle.
    pub tf_bytes: u32,
    /// Per-station BAck frame sent after each DL data PPDU.
    pub back_bytes: u32,
    /// Multi-Station BAck: fixed part.
    pub mba_base_bytes: u32,
    /// Multi-Station BAck: per-station part.
    pub mba_per_station_bytes: u32,
}

impl Default for ControlFrameSizes {
    fn default() -> Self {
        ControlFrameSizes {
            tf_bytes: 100,
            back_bytes: 64,
            mba_base_bytes: 24,
            mba_per_station_bytes: 40,
        }
    }
}

/// TXOP-formation strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchedulingStrategy {
    /// Stop as soon as one station has a full ack A-MPDU pending.
    MinimalResponse,
    /// Stop once every station has a full ack A-MPDU pending.
    TargetResponse,
    /// Stop once the group jointly holds `load * N * S` pending acks.
    MaxGoodput,
}

impl SchedulingStrategy {
    pub fn from_id(id: u8) -> Result<Self> {
        match id {
            1 => Ok(SchedulingStrategy::MinimalResponse),
            2 => Ok(SchedulingStrategy::TargetResponse),
            3 => Ok(SchedulingStrategy::MaxGoodput),
            other => Err(SimError::InvalidConfig(format!(
                "strategy must be 1, 2 or 3 (got {other})"
            ))),
        }
    }

    pub fn id(&self) -> u8 {
        match self {
            SchedulingStrategy::MinimalResponse => 1,
            SchedulingStrategy::TargetResponse => 2,
            SchedulingStrategy::MaxGoodput => 3,
        }
    }
}

/// Per-station TCP sequence state.
///
/// `base` is the first segment transmitted but not yet TCP-acked,
/// `next_new` the next never-transmitted segment. Every segment in
/// `[base, next_new)` has been transmitted at least once; the ones not yet
/// MAC-acked are the holes awaiting retransmission. The contiguous
/// MAC-acked prefix starting at `base` is what the station can ack at the
/// TCP level.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StationStream {
    base: u64,
    next_new: u64,
    holes: BTreeSet<u64>,
}

impl StationStream {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn next_new(&self) -> u64 {
        self.next_new
    }

    /// Length of the contiguous MAC-acked run starting at `base`: the
    /// number of TCP Acks the station is ready to transmit.
    pub fn pending_acks(&self) -> u64 {
        let first_gap = self.holes.first().copied().unwrap_or(self.next_new);
        first_gap - self.base
    }

    /// Segments transmitted at least once but not MAC-acked, ascending.
    pub fn holes(&self) -> impl Iterator<Item = u64> + '_ {
        self.holes.iter().copied()
    }

    pub fn holes_len(&self) -> u64 {
        self.holes.len() as u64
    }

    pub fn mac_acked_len(&self) -> u64 {
        (self.next_new - self.base) - self.holes_len()
    }

    pub fn advance_next_new(&mut self, n: u64) {
        self.next_new += n;
    }

    /// Apply one MPDU's BAck outcome: delivery MAC-acks every segment in
    /// the MPDU, loss leaves (or turns) them holes.
    pub fn apply_block_ack(&mut self, segments: &[u64], delivered: bool) {
        if delivered {
            for s in segments {
                self.holes.remove(s);
            }
        } else {
            for s in segments {
                debug_assert!(*s >= self.base && *s < self.next_new);
                self.holes.insert(*s);
            }
        }
    }

    /// TCP-ack the first `n` segments; callers may only advance within the
    /// contiguous MAC-acked prefix.
    pub fn advance_base(&mut self, n: u64) {
        debug_assert!(n <= self.pending_acks());
        self.base += n;
    }
}

/// One station's DL A-MPDU for one data cycle: data MPDUs (a flat segment
/// list chunked into MPDUs) plus the trailing per-station TF MPDU.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DlAmpduPlan {
    /// Retransmitted holes first, then new segments; ascending within each.
    pub segments: Vec<u64>,
    /// Segments per data MPDU, in A-MPDU order.
    pub mpdu_sizes: Vec<u32>,
    pub retransmissions: u64,
    pub new_segments: u64,
    pub data_bits: u64,
    /// Data MPDUs plus the TF MPDU.
    pub total_bits: u64,
}

impl DlAmpduPlan {
    /// Iterate the data MPDUs as segment slices.
    pub fn mpdus(&self) -> impl Iterator<Item = &[u64]> + '_ {
        let mut off = 0usize;
        self.mpdu_sizes.iter().map(move |&size| {
            let s = &self.segments[off..off + size as usize];
            off += size as usize;
            s
        })
    }
}

/// Build one station's DL A-MPDU: holes are retransmitted first, then new
/// segments from `next_new`, `segments_per_mpdu` per MPDU with a smaller
/// final MPDU allowed. `capacity` is the per-station segment budget derived
/// from the PPDU-duration and MPDU-count caps; `new_segment_quota` limits
/// only the new segments (None = fill to capacity). The stream is not
/// mutated; the caller advances `next_new` by `plan.new_segments`.
#[allow(clippy::too_many_arguments)]
pub fn build_dl_ampdu_into(
    stream: &StationStream,
    segments_per_mpdu: u32,
    capacity: u64,
    new_segment_quota: Option<u64>,
    arith: &FrameArithmetic,
    msdu_len: u32,
    tf_bits: u64,
    plan: &mut DlAmpduPlan,
) {
    plan.segments.clear();
    plan.mpdu_sizes.clear();
    let retx = stream.holes_len().min(capacity);
    plan.segments.extend(stream.holes().take(retx as usize));
    let new = (capacity - retx).min(new_segment_quota.unwrap_or(u64::MAX));
    plan.segments
        .extend(stream.next_new()..stream.next_new() + new);
    plan.retransmissions = retx;
    plan.new_segments = new;

    plan.data_bits = 0;
    let mut remaining = plan.segments.len() as u64;
    while remaining > 0 {
        let size = remaining.min(segments_per_mpdu as u64) as u32;
        plan.mpdu_sizes.push(size);
        plan.data_bits += mpdu_bits(arith, size, msdu_len);
        remaining -= size as u64;
    }
    plan.total_bits = plan.data_bits + tf_bits;
}

pub fn build_dl_ampdu(
    stream: &StationStream,
    segments_per_mpdu: u32,
    capacity: u64,
    new_segment_quota: Option<u64>,
    arith: &FrameArithmetic,
    msdu_len: u32,
    tf_bits: u64,
) -> DlAmpduPlan {
    let mut plan = DlAmpduPlan::default();
    build_dl_ampdu_into(
        stream,
        segments_per_mpdu,
        capacity,
        new_segment_quota,
        arith,
        msdu_len,
        tf_bits,
        &mut plan,
    );
    plan
}

/// Per-station segment budget for one DL PPDU: the largest segment count
/// whose A-MPDU (data MPDUs plus the TF MPDU) stays within the MPDU-count
/// cap and, preamble included, within the PPDU duration cap.
pub fn station_dl_capacity(
    segments_per_mpdu: u32,
    msdu_len: u32,
    tf_bits: u64,
    dl_rate: f64,
    dl_preamble: f64,
    arith: &FrameArithmetic,
    timing: &TimingConstants,
) -> u64 {
    let full_bits = mpdu_bits(arith, segments_per_mpdu, msdu_len);
    let fits = |d: u64| -> bool {
        let mpdus = d.div_ceil(segments_per_mpdu as u64) + 1;
        if mpdus > arith.ba_window as u64 {
            return false;
        }
        let fulls = d / segments_per_mpdu as u64;
        let rem = (d % segments_per_mpdu as u64) as u32;
        let mut bits = fulls * full_bits + tf_bits;
        if rem > 0 {
            bits += mpdu_bits(arith, rem, msdu_len);
        }
        mu_ppdu_duration(bits, dl_rate, dl_preamble, timing.dl_symbol) <= timing.max_ppdu_duration
    };
    let hi = (arith.ba_window as u64 - 1) * segments_per_mpdu as u64;
    if fits(hi) {
        return hi;
    }
    let (mut lo, mut hi) = (0u64, hi);
    while lo < hi {
        let mid = (lo + hi + 1) / 2;
        if fits(mid) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    lo
}

/// Integer ack target `ceil(load * stations * max_acks)` with a small guard
/// against binary-float noise (0.95 * 47840 lands a hair above the exact
/// 45448 in f64).
pub fn ack_target(load: f64, stations: u64, max_acks: u64) -> u64 {
    let raw = load * (stations * max_acks) as f64;
    (raw - 1e-9).ceil().max(1.0) as u64
}

/// Strategy termination test, evaluated after each DL data cycle's BAck.
pub fn strategy_terminated(
    streams: &[StationStream],
    strategy: SchedulingStrategy,
    load: f64,
    max_acks: u64,
) -> bool {
    match strategy {
        SchedulingStrategy::MinimalResponse => {
            streams.iter().any(|s| s.pending_acks() >= max_acks)
        }
        SchedulingStrategy::TargetResponse => {
            streams.iter().all(|s| s.pending_acks() >= max_acks)
        }
        SchedulingStrategy::MaxGoodput => {
            let have: u64 = streams.iter().map(|s| s.pending_acks().min(max_acks)).sum();
            have >= ack_target(load, streams.len() as u64, max_acks)
        }
    }
}

/// Link-level parameters fixed for a scenario once the MCS pair is chosen.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkParams {
    pub dl: McsEntry,
    pub ul: McsEntry,
    pub ber_dl: f64,
    /// On-air MSDU length of one TCP Data segment.
    pub msdu_len: u32,
    /// TCP payload bits per segment.
    pub payload_bits: u64,
    /// Optimizer's segment count per DL MPDU.
    pub segments_per_mpdu: u32,
    /// Per-station segment budget per DL PPDU.
    pub station_capacity: u64,
    /// Max TCP Acks per station per ack A-MPDU.
    pub max_acks: u64,
}

/// Phases of a TXOP, in on-air order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Backoff,
    Aifs,
    DlData,
    Sifs,
    BlockAck,
    TriggerFrame,
    UlAck,
    MultiStationBack,
}

impl Phase {
    pub fn name(&self) -> &'static str {
        match self {
            Phase::Backoff => "backoff",
            Phase::Aifs => "aifs",
            Phase::DlData => "dl_data",
            Phase::Sifs => "sifs",
            Phase::BlockAck => "back",
            Phase::TriggerFrame => "tf",
            Phase::UlAck => "ul_ack",
            Phase::MultiStationBack => "mba",
        }
    }
}

/// One trace line: a phase with its start offset inside the TXOP, duration
/// and total MAC payload bits on air.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseRecord {
    pub phase: Phase,
    pub start_us: f64,
    pub duration_us: f64,
    pub bits: u64,
}

pub trait TraceSink {
    fn record(&mut self, txop_index: u64, rec: PhaseRecord);
}

/// Discards everything.
pub struct NoTrace;

impl TraceSink for NoTrace {
    fn record(&mut self, _: u64, _: PhaseRecord) {}
}

impl TraceSink for Vec<(u64, PhaseRecord)> {
    fn record(&mut self, txop_index: u64, rec: PhaseRecord) {
        self.push((txop_index, rec));
    }
}

/// Aggregate outcome of one TXOP.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TxopRecord {
    /// Backoff through the end of the Multi-Station BAck.
    pub duration_us: f64,
    pub dl_cycles: u32,
    /// Segments TCP-acked in this TXOP (= acks transmitted).
    pub data_segments_delivered: u64,
    pub data_bits_delivered: u64,
    pub acks_transmitted: u64,
    /// Diagnostic: segments that went on air as retransmissions.
    pub retransmitted_segments: u64,
}

/// Everything `TxopEngine` needs besides the streams.
#[derive(Debug, Clone)]
pub struct TxopParams {
    pub stations: u32,
    pub strategy: SchedulingStrategy,
    /// Only meaningful for `MaxGoodput`.
    pub load: f64,
    pub timing: TimingConstants,
    pub frames: ControlFrameSizes,
    pub arith: FrameArithmetic,
    pub link: LinkParams,
    pub max_cycles: u32,
}

struct Clock<'a> {
    t: f64,
    txop: u64,
    trace: &'a mut dyn TraceSink,
}

impl Clock<'_> {
    fn phase(&mut self, phase: Phase, duration_us: f64, bits: u64) {
        self.trace.record(
            self.txop,
            PhaseRecord {
                phase,
                start_us: self.t,
                duration_us,
                bits,
            },
        );
        self.t += duration_us;
    }
}

/// Runs TXOPs against a set of station streams, reusing per-station
/// scratch buffers between cycles.
pub struct TxopEngine {
    params: TxopParams,
    dl_plans: Vec<DlAmpduPlan>,
    ack_counts: Vec<u64>,
}

impl TxopEngine {
    pub fn new(params: TxopParams) -> Result<Self> {
        if params.link.max_acks == 0 {
            return Err(SimError::InvalidConfig(
                "UL A-MPDU cannot carry a single TCP Ack within the PPDU cap".into(),
            ));
        }
        if params.link.station_capacity == 0 {
            return Err(SimError::InvalidConfig(
                "DL A-MPDU cannot carry a single TCP Data segment within the PPDU cap".into(),
            ));
        }
        if params.strategy == SchedulingStrategy::MaxGoodput
            && !(params.load > 0.0 && params.load <= 1.0)
        {
            return Err(SimError::InvalidConfig(format!(
                "strategy 3 requires 0 < load <= 1 (got {})",
                params.load
            )));
        }
        let stations = params.stations as usize;
        Ok(TxopEngine {
            params,
            dl_plans: vec![DlAmpduPlan::default(); stations],
            ack_counts: vec![0; stations],
        })
    }

    pub fn params(&self) -> &TxopParams {
        &self.params
    }

    /// Run one TXOP. Streams carry over to the next call; the RNG is
    /// consumed one draw per data MPDU in transmission order.
    pub fn run_txop(
        &mut self,
        streams: &mut [StationStream],
        rng: &mut impl RngCore,
        txop_index: u64,
        trace: &mut dyn TraceSink,
    ) -> Result<TxopRecord> {
        let p = &self.params;
        debug_assert_eq!(streams.len(), p.stations as usize);
        let link = &p.link;
        let tf_bits = p.frames.tf_bytes as u64 * 8;
        let back_bits = p.frames.back_bytes as u64 * 8;
        let back_ppdu =
            mu_ppdu_duration(back_bits, link.ul.ul_rate, link.ul.ul_preamble, p.timing.ul_symbol);

        let mut clock = Clock {
            t: 0.0,
            txop: txop_index,
            trace,
        };
        clock.phase(Phase::Backoff, p.timing.avg_backoff, 0);
        clock.phase(Phase::Aifs, p.timing.aifs_ap, 0);

        let mut cycles = 0u32;
        let mut retransmitted = 0u64;
        loop {
            if cycles >= p.max_cycles {
                return Err(SimError::NonTerminating(p.max_cycles));
            }
            cycles += 1;

            // DL MU PPDU: one A-MPDU per station, duration is the slowest
            // station's share.
            let mut dl_dur = 0.0f64;
            let mut dl_bits = 0u64;
            for (stream, plan) in streams.iter_mut().zip(self.dl_plans.iter_mut()) {
                build_dl_ampdu_into(
                    stream,
                    link.segments_per_mpdu,
                    link.station_capacity,
                    None,
                    &p.arith,
                    link.msdu_len,
                    tf_bits,
                    plan,
                );
                stream.advance_next_new(plan.new_segments);
                retransmitted += plan.retransmissions;
                dl_bits += plan.total_bits;
                let d = mu_ppdu_duration(
                    plan.total_bits,
                    link.dl.dl_rate,
                    link.dl.dl_preamble,
                    p.timing.dl_symbol,
                );
                dl_dur = dl_dur.max(d);
            }
            clock.phase(Phase::DlData, dl_dur, dl_bits);

            // Per-MPDU delivery draws, station order then A-MPDU order; the
            // TF MPDU is control traffic and never lost.
            for (stream, plan) in streams.iter_mut().zip(self.dl_plans.iter()) {
                let mut off = 0usize;
                for &size in &plan.mpdu_sizes {
                    let segs = &plan.segments[off..off + size as usize];
                    off += size as usize;
                    let bits = mpdu_bits(&p.arith, size, link.msdu_len);
                    let p_success = if link.ber_dl == 0.0 {
                        1.0
                    } else {
                        (1.0 - link.ber_dl).powi(bits as i32)
                    };
                    let delivered = bernoulli(rng, p_success);
                    stream.apply_block_ack(segs, delivered);
                }
            }

            clock.phase(Phase::Sifs, p.timing.sifs, 0);
            clock.phase(Phase::BlockAck, back_ppdu, back_bits * p.stations as u64);
            clock.phase(Phase::Sifs, p.timing.sifs, 0);

            if strategy_terminated(streams, p.strategy, p.load, link.max_acks) {
                break;
            }
        }

        // Ack cycle: broadcast TF, then every station empties up to one
        // full ack A-MPDU, acknowledged by the Multi-Station BAck.
        clock.phase(
            Phase::TriggerFrame,
            legacy_frame_duration(
                tf_bits,
                link.dl.legacy_rate,
                link.dl.legacy_preamble,
                p.timing.legacy_symbol,
            ),
            tf_bits,
        );
        clock.phase(Phase::Sifs, p.timing.sifs, 0);

        let mut ul_dur = 0.0f64;
        let mut ul_bits = 0u64;
        let mut acks_total = 0u64;
        for (stream, out) in streams.iter().zip(self.ack_counts.iter_mut()) {
            let n = stream.pending_acks().min(link.max_acks);
            *out = n;
            if n > 0 {
                let plan = plan_ack_ampdu(n, &link.ul, &p.arith, &p.timing);
                debug_assert_eq!(plan.total_msdus, n);
                let d = mu_ppdu_duration(
                    plan.on_air_bits,
                    link.ul.ul_rate,
                    link.ul.ul_preamble,
                    p.timing.ul_symbol,
                );
                ul_dur = ul_dur.max(d);
                ul_bits += plan.on_air_bits;
                acks_total += n;
            }
        }
        clock.phase(Phase::UlAck, ul_dur, ul_bits);
        clock.phase(Phase::Sifs, p.timing.sifs, 0);

        let mba_bits =
            (p.frames.mba_base_bytes as u64 + p.stations as u64 * p.frames.mba_per_station_bytes as u64) * 8;
        clock.phase(
            Phase::MultiStationBack,
            legacy_frame_duration(
                mba_bits,
                link.dl.legacy_rate,
                link.dl.legacy_preamble,
                p.timing.legacy_symbol,
            ),
            mba_bits,
        );

        for (stream, &n) in streams.iter_mut().zip(self.ack_counts.iter()) {
            stream.advance_base(n);
        }

        Ok(TxopRecord {
            duration_us: clock.t,
            dl_cycles: cycles,
            data_segments_delivered: acks_total,
            data_bits_delivered: acks_total * link.payload_bits,
            acks_transmitted: acks_total,
            retransmitted_segments: retransmitted,
        })
    }
}

/// One always-consumed 53-bit uniform draw per call. `rand`'s Bernoulli
/// short-circuits p = 1 without drawing, which would break the
/// one-draw-per-MPDU reproducibility contract.
fn bernoulli(rng: &mut impl RngCore, p_success: f64) -> bool {
    let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    u < p_success
}

/// Derive `LinkParams` from a chosen MCS pair and scenario knobs.
#[allow(clippy::too_many_arguments)]
pub fn link_params(
    dl: McsEntry,
    ul: McsEntry,
    ber_dl: f64,
    segment_bytes: u32,
    frames: &ControlFrameSizes,
    arith: &FrameArithmetic,
    timing: &TimingConstants,
) -> Result<LinkParams> {
    if ber_dl >= 1.0 {
        return Err(SimError::ChannelUnusable(format!(
            "DL BER is 1 at MCS {}",
            dl.mcs_index
        )));
    }
    let msdu_len = crate::aggregation::msdu_on_air_size(arith, segment_bytes);
    let payload_bits = segment_bytes as u64 * 8;
    let packing =
        crate::aggregation::optimal_segments_per_mpdu(arith, ber_dl, dl.dl_rate, msdu_len, payload_bits)?;
    let capacity = station_dl_capacity(
        packing.segments_per_mpdu,
        msdu_len,
        frames.tf_bytes as u64 * 8,
        dl.dl_rate,
        dl.dl_preamble,
        arith,
        timing,
    );
    let max_acks = max_acks_per_station(&ul, arith, timing);
    Ok(LinkParams {
        dl,
        ul,
        ber_dl,
        msdu_len,
        payload_bits,
        segments_per_mpdu: packing.segments_per_mpdu,
        station_capacity: capacity,
        max_acks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phy_tables::embedded_phy_table;
    use proptest::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use rand_core::SeedableRng;

    fn arith() -> FrameArithmetic {
        FrameArithmetic::default()
    }

    fn stream_with(base: u64, next_new: u64, holes: &[u64]) -> StationStream {
        StationStream {
            base,
            next_new,
            holes: holes.iter().copied().collect(),
        }
    }

    #[test]
    fn build_plan_exact_division() {
        let s = stream_with(0, 100, &[]);
        let plan = build_dl_ampdu(&s, 7, 70, None, &arith(), 1524, 800);
        assert_eq!(plan.mpdu_sizes, vec![7; 10]);
        assert_eq!(plan.new_segments, 70);
        assert_eq!(plan.retransmissions, 0);
        assert_eq!(plan.data_bits, 10 * 85_600);
        assert_eq!(plan.total_bits, 10 * 85_600 + 800);
    }

    #[test]
    fn build_plan_retransmission_only() {
        let s = stream_with(0, 50, &[3, 17, 40]);
        let plan = build_dl_ampdu(&s, 7, 531, Some(0), &arith(), 1524, 800);
        assert_eq!(plan.mpdu_sizes, vec![3]);
        assert_eq!(plan.segments, vec![3, 17, 40]);
        assert_eq!(plan.retransmissions, 3);
        assert_eq!(plan.new_segments, 0);
    }

    #[test]
    fn build_plan_quota_limited() {
        let s = stream_with(0, 20, &[]);
        let plan = build_dl_ampdu(&s, 7, 531, Some(10), &arith(), 1524, 800);
        assert_eq!(plan.mpdu_sizes, vec![7, 3]);
        assert_eq!(plan.new_segments, 10);
        assert_eq!(plan.segments, (20..30).collect::<Vec<_>>());
    }

    #[test]
    fn termination_examples() {
        let s_full = stream_with(0, 200, &[]); // pending 200
        let s_empty = stream_with(0, 0, &[]);
        let max_acks = 150;

        let streams = vec![s_full.clone(), s_empty.clone(), s_empty.clone(), s_empty.clone()];
        assert!(strategy_terminated(
            &streams,
            SchedulingStrategy::MinimalResponse,
            0.0,
            max_acks
        ));
        assert!(!strategy_terminated(
            &streams,
            SchedulingStrategy::TargetResponse,
            0.0,
            max_acks
        ));

        // One station one ack short of the target.
        let almost = vec![
            s_full.clone(),
            s_full.clone(),
            s_full.clone(),
            stream_with(0, 149, &[]),
        ];
        assert!(!strategy_terminated(
            &almost,
            SchedulingStrategy::TargetResponse,
            0.0,
            max_acks
        ));
        assert!(strategy_terminated(
            &vec![s_full.clone(); 4],
            SchedulingStrategy::TargetResponse,
            0.0,
            max_acks
        ));
    }

    proptest! {
        /// With min-capping, load = 1 is the all-stations test.
        #[test]
        fn strategy3_load1_equals_strategy2(pendings in prop::collection::vec(0u64..400, 1..12),
                                            max_acks in 1u64..300) {
            let streams: Vec<StationStream> =
                pendings.iter().map(|&p| stream_with(0, p, &[])).collect();
            let s2 = strategy_terminated(&streams, SchedulingStrategy::TargetResponse, 0.0, max_acks);
            let s3 = strategy_terminated(&streams, SchedulingStrategy::MaxGoodput, 1.0, max_acks);
            prop_assert_eq!(s2, s3);
        }

        /// The fast hole-set stream against a naive acked-set reference
        /// under random transmit / BAck / advance sequences.
        #[test]
        fn stream_matches_reference_model(ops in prop::collection::vec(
            (0u64..40, prop::collection::vec(prop::bool::ANY, 1..8), 0u64..30), 1..40))
        {
            let mut fast = StationStream::new();
            let mut ref_acked: BTreeSet<u64> = BTreeSet::new();
            let (mut ref_base, mut ref_next) = (0u64, 0u64);
            let a = arith();

            for (capacity, outcomes, advance_frac) in ops {
                // Build a cycle: retransmissions first, then new segments.
                let plan = build_dl_ampdu(&fast, 3, capacity, None, &a, 1524, 800);
                fast.advance_next_new(plan.new_segments);

                // Reference builds its own expectation of the segment list.
                let mut expected: Vec<u64> = (ref_base..ref_next)
                    .filter(|s| !ref_acked.contains(s))
                    .take(capacity as usize)
                    .collect();
                let new = (capacity - expected.len() as u64).min(u64::MAX);
                expected.extend(ref_next..ref_next + new);
                ref_next += new;
                prop_assert_eq!(&plan.segments, &expected);

                for (i, mpdu) in plan.mpdus().enumerate() {
                    let delivered = outcomes[i % outcomes.len()];
                    fast.apply_block_ack(mpdu, delivered);
                    if delivered {
                        for s in mpdu {
                            ref_acked.insert(*s);
                        }
                    }
                }

                // Reference pending: contiguous acked run from base.
                let mut ref_pending = 0u64;
                while ref_base + ref_pending < ref_next && ref_acked.contains(&(ref_base + ref_pending)) {
                    ref_pending += 1;
                }
                prop_assert_eq!(fast.pending_acks(), ref_pending);
                prop_assert_eq!(fast.next_new(), ref_next);
                let ref_holes: Vec<u64> = (ref_base..ref_next)
                    .filter(|s| !ref_acked.contains(s))
                    .collect();
                prop_assert_eq!(fast.holes().collect::<Vec<_>>(), ref_holes);
                // Conservation: delivered + acked-in-window + holes = generated.
                prop_assert_eq!(
                    ref_base + fast.mac_acked_len() + fast.holes_len(),
                    ref_next
                );

                let k = if ref_pending == 0 { 0 } else { advance_frac % (ref_pending + 1) };
                fast.advance_base(k);
                for s in ref_base..ref_base + k {
                    ref_acked.remove(&s);
                }
                ref_base += k;
                prop_assert_eq!(fast.base(), ref_base);
            }
        }
    }

    fn params_4st_mcs11(strategy: SchedulingStrategy, load: f64) -> TxopParams {
        let phy = embedded_phy_table(4).unwrap();
        let timing = TimingConstants::default();
        let frames = ControlFrameSizes::default();
        let a = arith();
        let link = link_params(phy.entries[11], phy.entries[11], 0.0, 1460, &frames, &a, &timing)
            .unwrap();
        TxopParams {
            stations: 4,
            strategy,
            load,
            timing,
            frames,
            arith: a,
            link,
            max_cycles: 10_000,
        }
    }

    #[test]
    fn capacity_and_max_acks_4st_mcs11() {
        let p = params_4st_mcs11(SchedulingStrategy::TargetResponse, 0.0);
        // 398 symbols of 16333.6 bits minus the TF MPDU: 75 full MPDUs of
        // 7 segments plus a 6-segment partial.
        assert_eq!(p.link.station_capacity, 531);
        assert_eq!(p.link.max_acks, 11_960);
        assert_eq!(p.link.segments_per_mpdu, 7);
    }

    #[test]
    fn clean_channel_strategy2_cycle_count() {
        let p = params_4st_mcs11(SchedulingStrategy::TargetResponse, 0.0);
        let (cap, s) = (p.link.station_capacity, p.link.max_acks);
        let mut engine = TxopEngine::new(p).unwrap();
        let mut streams = vec![StationStream::new(); 4];
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let rec = engine
            .run_txop(&mut streams, &mut rng, 0, &mut NoTrace)
            .unwrap();
        // Every cycle fills each station to capacity; stop once everyone
        // holds a full ack A-MPDU.
        assert_eq!(rec.dl_cycles, s.div_ceil(cap) as u32);
        assert_eq!(rec.acks_transmitted, 4 * s);
        assert_eq!(rec.data_bits_delivered, 4 * s * 1460 * 8);
        assert_eq!(rec.retransmitted_segments, 0);
    }

    #[test]
    fn clean_channel_no_retransmissions_any_seed() {
        for seed in [1u64, 99, 123_456] {
            let p = params_4st_mcs11(SchedulingStrategy::MinimalResponse, 0.0);
            let mut engine = TxopEngine::new(p).unwrap();
            let mut streams = vec![StationStream::new(); 4];
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for i in 0..5 {
                let rec = engine
                    .run_txop(&mut streams, &mut rng, i, &mut NoTrace)
                    .unwrap();
                assert_eq!(rec.retransmitted_segments, 0);
            }
        }
    }

    #[test]
    fn strategy3_small_load_single_cycle() {
        let p = params_4st_mcs11(SchedulingStrategy::MaxGoodput, 0.03);
        let mut engine = TxopEngine::new(p).unwrap();
        let mut streams = vec![StationStream::new(); 4];
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let rec = engine
            .run_txop(&mut streams, &mut rng, 0, &mut NoTrace)
            .unwrap();
        assert_eq!(rec.dl_cycles, 1);
    }

    #[test]
    fn forced_loss_hits_cycle_guard() {
        // DL BER high enough that every MPDU fails (success probability
        // underflows to 0); the TXOP can never terminate.
        let phy = embedded_phy_table(4).unwrap();
        let timing = TimingConstants::default();
        let frames = ControlFrameSizes::default();
        let a = arith();
        let link =
            link_params(phy.entries[11], phy.entries[0], 0.5, 1460, &frames, &a, &timing).unwrap();
        let mut engine = TxopEngine::new(TxopParams {
            stations: 2,
            strategy: SchedulingStrategy::TargetResponse,
            load: 0.0,
            timing,
            frames,
            arith: a,
            link,
            max_cycles: 50,
        })
        .unwrap();
        let mut streams = vec![StationStream::new(); 2];
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        assert!(matches!(
            engine.run_txop(&mut streams, &mut rng, 0, &mut NoTrace),
            Err(SimError::NonTerminating(50))
        ));
    }

    #[test]
    fn degenerate_link_rejected_upfront() {
        // A PPDU cap below the UL preamble leaves no room for one ack.
        let phy = embedded_phy_table(4).unwrap();
        let timing = TimingConstants {
            max_ppdu_duration: 60.0,
            ..TimingConstants::default()
        };
        let frames = ControlFrameSizes::default();
        let a = arith();
        let link =
            link_params(phy.entries[11], phy.entries[11], 0.0, 1460, &frames, &a, &timing).unwrap();
        assert_eq!(link.max_acks, 0);
        let err = TxopEngine::new(TxopParams {
            stations: 4,
            strategy: SchedulingStrategy::TargetResponse,
            load: 0.0,
            timing,
            frames,
            arith: a,
            link,
            max_cycles: 100,
        });
        assert!(matches!(err, Err(SimError::InvalidConfig(_))));
    }

    #[test]
    fn trace_durations_sum_to_record() {
        let p = params_4st_mcs11(SchedulingStrategy::TargetResponse, 0.0);
        let mut engine = TxopEngine::new(p).unwrap();
        let mut streams = vec![StationStream::new(); 4];
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut trace: Vec<(u64, PhaseRecord)> = Vec::new();
        let rec = engine.run_txop(&mut streams, &mut rng, 3, &mut trace).unwrap();
        let mut t = 0.0f64;
        for (idx, ph) in &trace {
            assert_eq!(*idx, 3);
            assert_eq!(ph.start_us, t);
            t += ph.duration_us;
        }
        assert_eq!(t, rec.duration_us);
        // PPDU phases respect the duration cap.
        for (_, ph) in &trace {
            if matches!(ph.phase, Phase::DlData | Phase::UlAck) {
                assert!(ph.duration_us <= 5484.0);
            }
        }
    }

    #[test]
    fn base_monotone_across_txops() {
        let p = params_4st_mcs11(SchedulingStrategy::MinimalResponse, 0.0);
        let mut engine = TxopEngine::new(p).unwrap();
        let mut streams = vec![StationStream::new(); 4];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut bases = vec![0u64; 4];
        for i in 0..6 {
            engine.run_txop(&mut streams, &mut rng, i, &mut NoTrace).unwrap();
            for (s, prev) in streams.iter().zip(bases.iter_mut()) {
                assert!(s.base() >= *prev);
                assert!(s.pending_acks() <= s.next_new() - s.base());
                *prev = s.base();
            }
        }
    }
}
