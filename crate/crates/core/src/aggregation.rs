//! MSDU/MPDU/A-MPDU size arithmetic, the per-MPDU packing optimizer and
//! ack A-MPDU planning.
//!
//! The packing optimizer picks the number of segments per MPDU that
//! maximizes the expected delivered payload rate of a single MPDU: with a
//! per-bit error probability `ber`, an MPDU of `bits` survives with
//! probability (1 - ber)^bits, so longer MPDUs amortize header overhead but
//! risk losing more payload per corrupted frame.

use crate::airtime::{mu_ppdu_duration, TimingConstants};
use crate::error::{Result, SimError};
use crate::phy_tables::McsEntry;

/// Frame-size constants. All byte counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameArithmetic {
    pub mac_header: u32,
    pub fcs: u32,
    /// TCP header + IP header.
    pub tcp_ip_headers: u32,
    pub llc_snap: u32,
    pub subheader: u32,
    /// MSDUs are padded to a multiple of this.
    pub msdu_align: u32,
    /// Upper bound on one MPDU.
    pub mpdu_size_limit: u32,
    /// Block Ack window: max MPDUs per A-MPDU.
    pub ba_window: u32,
}

impl Default for FrameArithmetic {
    fn default() -> Self {
        FrameArithmetic {
            mac_header: 28,
            fcs: 4,
            tcp_ip_headers: 40,
            llc_snap: 8,
            subheader: 14,
            msdu_align: 4,
            mpdu_size_limit: 11454,
            ba_window: 256,
        }
    }
}

impl FrameArithmetic {
    /// MAC header + FCS bytes charged once per MPDU.
    pub fn mpdu_overhead(&self) -> u32 {
        self.mac_header + self.fcs
    }
}

/// On-air MSDU size for a TCP segment with `tcp_payload` payload bytes
/// (0 means a pure TCP Ack): headers plus subheader, aligned up.
pub fn msdu_on_air_size(arith: &FrameArithmetic, tcp_payload: u32) -> u32 {
    let raw = tcp_payload + arith.tcp_ip_headers + arith.llc_snap + arith.subheader;
    raw.div_ceil(arith.msdu_align) * arith.msdu_align
}

/// How many MSDUs of `msdu_len` bytes fit under the MPDU size limit.
pub fn max_msdus_per_mpdu(arith: &FrameArithmetic, msdu_len: u32) -> u32 {
    arith.mpdu_size_limit / msdu_len
}

/// On-air bits of one MPDU holding `msdu_count` MSDUs of `msdu_len` bytes,
/// MAC header and FCS included.
pub fn mpdu_bits(arith: &FrameArithmetic, msdu_count: u32, msdu_len: u32) -> u64 {
    8 * (arith.mpdu_overhead() as u64 + msdu_count as u64 * msdu_len as u64)
}

/// Result of the per-MPDU packing search.
#[derive(Debug, Clone, PartialEq)]
pub struct PackingResult {
    /// Optimal number of segments per MPDU (lowest count on ties).
    pub segments_per_mpdu: u32,
    /// Local throughput at the optimum, Mbps.
    pub throughput_mbps: f64,
    /// ln of `throughput_mbps`; immune to underflow at large BER, used to
    /// compare candidates across MCSs.
    pub log_throughput: f64,
    /// Diagnostic: throughput per candidate count (index 0 is one segment).
    pub throughput_by_count: Vec<f64>,
}

/// Exhaustive search for the segment count per MPDU maximizing local
/// throughput `count * payload_bits * (1 - ber)^bits(count) / time(count)`
/// with `time = bits / rate` (continuous, no preamble share: the MPDU is a
/// slice of a larger A-MPDU).
pub fn optimal_segments_per_mpdu(
    arith: &FrameArithmetic,
    ber: f64,
    dl_rate_mbps: f64,
    msdu_len: u32,
    payload_bits_per_segment: u64,
) -> Result<PackingResult> {
    if !(0.0..=1.0).contains(&ber) {
        return Err(SimError::InvalidConfig(format!("BER {ber} out of [0,1]")));
    }
    if ber >= 1.0 {
        return Err(SimError::DegenerateChannel);
    }
    if dl_rate_mbps <= 0.0 || msdu_len == 0 {
        return Err(SimError::InvalidConfig(
            "rate and MSDU length must be positive".into(),
        ));
    }
    let max_count = max_msdus_per_mpdu(arith, msdu_len).max(1);
    // ln(1 - ber), exactly 0 for a clean channel.
    let log_survival = (-ber).ln_1p();
    let mut best_count = 1u32;
    let mut best_score = f64::NEG_INFINITY;
    let mut table = Vec::with_capacity(max_count as usize);
    for count in 1..=max_count {
        let bits = mpdu_bits(arith, count, msdu_len) as f64;
        let score = (count as f64 * payload_bits_per_segment as f64 * dl_rate_mbps / bits).ln()
            + bits * log_survival;
        table.push(score.exp());
        if score > best_score {
            best_score = score;
            best_count = count;
        }
    }
    Ok(PackingResult {
        segments_per_mpdu: best_count,
        throughput_mbps: best_score.exp(),
        log_throughput: best_score,
        throughput_by_count: table,
    })
}

/// An A-MPDU plan: as many full MPDUs as possible plus at most one partial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MpduPlan {
    /// MSDUs in a full MPDU.
    pub msdus_per_mpdu: u32,
    pub mpdu_count: u32,
    /// MSDUs in the trailing partial MPDU, 0 when every MPDU is full.
    pub last_mpdu_msdus: u32,
    pub total_msdus: u64,
    pub on_air_bits: u64,
}

impl MpduPlan {
    fn empty(per_full: u32) -> Self {
        MpduPlan {
            msdus_per_mpdu: per_full,
            mpdu_count: 0,
            last_mpdu_msdus: 0,
            total_msdus: 0,
            on_air_bits: 0,
        }
    }
}

fn ack_plan_bits(arith: &FrameArithmetic, n: u64, per_full: u32, ack_len: u32) -> u64 {
    let full = n / per_full as u64;
    let rem = (n % per_full as u64) as u32;
    let mut bits = full * mpdu_bits(arith, per_full, ack_len);
    if rem > 0 {
        bits += mpdu_bits(arith, rem, ack_len);
    }
    bits
}

fn ack_plan_mpdus(n: u64, per_full: u32) -> u64 {
    n.div_ceil(per_full as u64)
}

/// Plan the UL A-MPDU carrying `requested` TCP Acks. The plan is truncated
/// (trailing acks dropped) so that it satisfies both protocol caps: at most
/// `ba_window` MPDUs and a PPDU duration, preamble included, of at most
/// `max_ppdu_duration`.
pub fn plan_ack_ampdu(
    requested: u64,
    ul: &McsEntry,
    arith: &FrameArithmetic,
    timing: &TimingConstants,
) -> MpduPlan {
    let ack_len = msdu_on_air_size(arith, 0);
    let per_full = max_msdus_per_mpdu(arith, ack_len);
    let fits = |n: u64| -> bool {
        if ack_plan_mpdus(n, per_full) > arith.ba_window as u64 {
            return false;
        }
        let bits = ack_plan_bits(arith, n, per_full, ack_len);
        mu_ppdu_duration(bits, ul.ul_rate, ul.ul_preamble, timing.ul_symbol)
            <= timing.max_ppdu_duration
    };
    let cap = requested.min(arith.ba_window as u64 * per_full as u64);
    let n = if fits(cap) {
        cap
    } else {
        // Largest transmittable prefix; bits and duration are monotone in n.
        let (mut lo, mut hi) = (0u64, cap);
        while lo < hi {
            let mid = (lo + hi + 1) / 2;
            if fits(mid) {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        lo
    };
    if n == 0 {
        return MpduPlan::empty(per_full);
    }
    let full = n / per_full as u64;
    let rem = (n % per_full as u64) as u32;
    MpduPlan {
        msdus_per_mpdu: per_full,
        mpdu_count: full as u32 + (rem > 0) as u32,
        last_mpdu_msdus: rem,
        total_msdus: n,
        on_air_bits: ack_plan_bits(arith, n, per_full, ack_len),
    }
}

/// The maximum number of TCP Acks one station can put in a single A-MPDU
/// under the MPDU-count and PPDU-duration caps.
pub fn max_acks_per_station(
    ul: &McsEntry,
    arith: &FrameArithmetic,
    timing: &TimingConstants,
) -> u64 {
    let ack_len = msdu_on_air_size(arith, 0);
    let protocol_cap = arith.ba_window as u64 * max_msdus_per_mpdu(arith, ack_len) as u64;
    plan_ack_ampdu(protocol_cap, ul, arith, timing).total_msdus
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phy_tables::embedded_phy_table;
    use proptest::prelude::*;

    fn arith() -> FrameArithmetic {
        FrameArithmetic::default()
    }

    #[test]
    fn msdu_sizes() {
        let a = arith();
        assert_eq!(msdu_on_air_size(&a, 1460), 1524);
        assert_eq!(msdu_on_air_size(&a, 208), 272);
        assert_eq!(msdu_on_air_size(&a, 0), 64);
    }

    #[test]
    fn msdus_per_mpdu_counts() {
        let a = arith();
        assert_eq!(max_msdus_per_mpdu(&a, 1524), 7);
        assert_eq!(max_msdus_per_mpdu(&a, 272), 42);
        assert_eq!(max_msdus_per_mpdu(&a, 64), 178);
    }

    #[test]
    fn mpdu_bit_counts() {
        let a = arith();
        assert_eq!(mpdu_bits(&a, 1, 1524), 12_448);
        assert_eq!(mpdu_bits(&a, 7, 1524), 85_600);
        assert_eq!(mpdu_bits(&a, 178, 64), 91_392);
    }

    /// Independent brute-force argmax over the candidate counts, computed
    /// directly in linear space.
    fn brute_force_best(a: &FrameArithmetic, ber: f64, rate: f64, msdu_len: u32, l_bits: u64) -> u32 {
        let max = max_msdus_per_mpdu(a, msdu_len);
        let mut best = 1u32;
        let mut best_u = f64::NEG_INFINITY;
        for x in 1..=max {
            let bits = mpdu_bits(a, x, msdu_len) as f64;
            let time = bits / rate;
            let u = x as f64 * l_bits as f64 * (1.0 - ber).powf(bits) / time;
            if u > best_u {
                best_u = u;
                best = x;
            }
        }
        best
    }

    #[test]
    fn packing_examples() {
        let a = arith();
        // Clean channel: throughput strictly increases with the count, so
        // the size cap binds.
        let r = optimal_segments_per_mpdu(&a, 0.0, 1201.0, 1524, 1460 * 8).unwrap();
        assert_eq!(r.segments_per_mpdu, 7);
        for w in r.throughput_by_count.windows(2) {
            assert!(w[1] > w[0]);
        }
        assert_eq!(
            r.segments_per_mpdu,
            brute_force_best(&a, 0.0, 1201.0, 1524, 1460 * 8)
        );

        let r = optimal_segments_per_mpdu(&a, 1e-4, 1201.0, 1524, 1460 * 8).unwrap();
        assert_eq!(r.segments_per_mpdu, 1);
        assert_eq!(
            r.segments_per_mpdu,
            brute_force_best(&a, 1e-4, 1201.0, 1524, 1460 * 8)
        );

        let r = optimal_segments_per_mpdu(&a, 1e-5, 1201.0, 1524, 1460 * 8).unwrap();
        assert_eq!(r.segments_per_mpdu, 7);
        assert_eq!(
            r.segments_per_mpdu,
            brute_force_best(&a, 1e-5, 1201.0, 1524, 1460 * 8)
        );
    }

    #[test]
    fn packing_degenerate_ber() {
        let a = arith();
        assert!(matches!(
            optimal_segments_per_mpdu(&a, 1.0, 1201.0, 1524, 1460 * 8),
            Err(SimError::DegenerateChannel)
        ));
        assert!(optimal_segments_per_mpdu(&a, 1.5, 1201.0, 1524, 1460 * 8).is_err());
    }

    proptest! {
        #[test]
        fn packing_matches_brute_force(ber in 0.0f64..1e-3, mcs in 0u32..12, seg in prop::bool::ANY) {
            let a = arith();
            let rate = embedded_phy_table(4).unwrap().entries[mcs as usize].dl_rate;
            let (len, bits) = if seg { (1524u32, 1460u64 * 8) } else { (272, 208 * 8) };
            let r = optimal_segments_per_mpdu(&a, ber, rate, len, bits).unwrap();
            prop_assert_eq!(r.segments_per_mpdu, brute_force_best(&a, ber, rate, len, bits));
        }

        #[test]
        fn packing_monotone_in_ber(b0 in 0.0f64..1e-3, b1 in 0.0f64..1e-3) {
            let a = arith();
            let (lo, hi) = if b0 <= b1 { (b0, b1) } else { (b1, b0) };
            let x_lo = optimal_segments_per_mpdu(&a, lo, 1201.0, 1524, 1460 * 8).unwrap();
            let x_hi = optimal_segments_per_mpdu(&a, hi, 1201.0, 1524, 1460 * 8).unwrap();
            prop_assert!(x_hi.segments_per_mpdu <= x_lo.segments_per_mpdu);
        }

        #[test]
        fn msdu_size_aligned(payload in 0u32..66_000) {
            let a = arith();
            let s = msdu_on_air_size(&a, payload);
            prop_assert_eq!(s % 4, 0);
            prop_assert!(s >= 64);
        }
    }

    #[test]
    fn ack_plan_examples() {
        let a = arith();
        let t = embedded_phy_table(4).unwrap();
        let ul = t.entries[11];
        let timing = TimingConstants::default();

        let p = plan_ack_ampdu(0, &ul, &a, &timing);
        assert_eq!(p.mpdu_count, 0);
        assert_eq!(p.total_msdus, 0);
        assert_eq!(p.on_air_bits, 0);

        let p = plan_ack_ampdu(178, &ul, &a, &timing);
        assert_eq!(p.mpdu_count, 1);
        assert_eq!(p.last_mpdu_msdus, 0);
        assert_eq!(p.total_msdus, 178);

        let p = plan_ack_ampdu(179, &ul, &a, &timing);
        assert_eq!(p.mpdu_count, 2);
        assert_eq!(p.last_mpdu_msdus, 1);
        assert_eq!(p.total_msdus, 179);
    }

    #[test]
    fn protocol_cap_without_duration_limit() {
        let a = arith();
        let t = embedded_phy_table(4).unwrap();
        let timing = TimingConstants {
            max_ppdu_duration: f64::INFINITY,
            ..TimingConstants::default()
        };
        assert_eq!(max_acks_per_station(&t.entries[11], &a, &timing), 256 * 178);
    }

    /// Linear-scan reference for the ack capacity: grow n until the plan
    /// stops carrying everything.
    fn brute_force_max_acks(ul: &McsEntry, a: &FrameArithmetic, t: &TimingConstants) -> u64 {
        let mut n = 0u64;
        loop {
            let p = plan_ack_ampdu(n + 1, ul, a, t);
            if p.total_msdus < n + 1 {
                return n;
            }
            n += 1;
            if n > 256 * 178 {
                return n;
            }
        }
    }

    #[test]
    fn max_acks_4_stations_mcs11() {
        let a = arith();
        let timing = TimingConstants::default();
        let ul = embedded_phy_table(4).unwrap().entries[11];
        let s = max_acks_per_station(&ul, &a, &timing);
        assert_eq!(s, brute_force_max_acks(&ul, &a, &timing));
        // Duration-bound value at 1134.2 Mbps: 67 full MPDUs plus a
        // 34-ack partial.
        assert_eq!(s, 11_960);
    }

    #[test]
    fn max_acks_single_full_mpdu_boundary() {
        let a = arith();
        let timing = TimingConstants::default();
        // Pick a UL rate so exactly one full MPDU fits in the PPDU cap:
        // 91392 bits at 25.0 Mbps * 14.4 us = 360 bits/symbol -> 253.866..
        // symbols -> 254 symbols = 3657.6 us + 64.8 us preamble, well under
        // the cap; two full MPDUs would need 508 symbols = 7315.2 us.
        let ul = McsEntry {
            mcs_index: 0,
            ul_rate: 25.0,
            ul_preamble: 64.8,
            dl_rate: 25.0,
            dl_preamble: 68.8,
            legacy_rate: 24.0,
            legacy_preamble: 20.0,
        };
        let s = max_acks_per_station(&ul, &a, &timing);
        assert_eq!(s, brute_force_max_acks(&ul, &a, &timing));
        // One full MPDU plus the partial that still fits.
        assert!(s >= 178 && s < 2 * 178, "{s}");
    }

    proptest! {
        #[test]
        fn ack_plan_respects_caps(requested in 0u64..80_000, rate in 5.0f64..1500.0) {
            let a = arith();
            let timing = TimingConstants::default();
            let ul = McsEntry {
                mcs_index: 0,
                ul_rate: rate,
                ul_preamble: 64.8,
                dl_rate: rate,
                dl_preamble: 68.8,
                legacy_rate: 24.0,
                legacy_preamble: 20.0,
            };
            let p = plan_ack_ampdu(requested, &ul, &a, &timing);
            prop_assert!(p.mpdu_count as u64 <= 256);
            prop_assert!(p.total_msdus <= requested);
            if p.on_air_bits > 0 {
                let d = mu_ppdu_duration(p.on_air_bits, ul.ul_rate, ul.ul_preamble, timing.ul_symbol);
                prop_assert!(d <= timing.max_ppdu_duration);
            }
            // Plan invariant: totals decompose into fulls plus the partial.
            let fulls = p.mpdu_count - (p.last_mpdu_msdus > 0) as u32;
            prop_assert_eq!(
                p.total_msdus,
                fulls as u64 * p.msdus_per_mpdu as u64 + p.last_mpdu_msdus as u64
            );
            // When no cap binds the plan carries everything.
            let s = max_acks_per_station(&ul, &a, &timing);
            if requested <= s {
                prop_assert_eq!(p.total_msdus, requested);
            } else {
                prop_assert_eq!(p.total_msdus, s);
            }
        }
    }
}
