//! SNR-driven MCS selection: a reliable UL and a throughput-optimal DL.

use crate::aggregation::{optimal_segments_per_mpdu, FrameArithmetic};
use crate::error::{Result, SimError};
use crate::phy_tables::{PhyTable, MCS_COUNT};

/// Highest MCS with a zero bit error rate. The UL must be reliable: TCP
/// Acks and BAck frames are modeled as loss-free, which is only sound when
/// their MCS shows BER = 0 at the operating SNR.
pub fn select_ul_mcs(ber_row: &[f64; MCS_COUNT]) -> Result<u8> {
    ber_row
        .iter()
        .rposition(|&b| b == 0.0)
        .map(|m| m as u8)
        .ok_or_else(|| SimError::ChannelUnusable("no MCS with zero BER for the UL".into()))
}

/// DL MCS maximizing the optimizer's local throughput at that MCS's BER and
/// rate; ties break toward the higher index. Candidates with BER = 1 carry
/// zero throughput and are selected only never.
pub fn select_dl_mcs(
    ber_row: &[f64; MCS_COUNT],
    phy: &PhyTable,
    arith: &FrameArithmetic,
    msdu_len: u32,
    payload_bits_per_segment: u64,
) -> Result<u8> {
    let mut best: Option<(u8, f64)> = None;
    for (m, entry) in phy.entries.iter().enumerate() {
        let score = if ber_row[m] >= 1.0 {
            f64::NEG_INFINITY
        } else {
            optimal_segments_per_mpdu(arith, ber_row[m], entry.dl_rate, msdu_len, payload_bits_per_segment)?
                .log_throughput
        };
        if best.map_or(true, |(_, s)| score >= s) && score > f64::NEG_INFINITY {
            best = Some((m as u8, score));
        }
    }
    best.map(|(m, _)| m)
        .ok_or_else(|| SimError::ChannelUnusable("BER is 1 at every MCS".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phy_tables::{embedded_ber_table_160, embedded_phy_table};

    #[test]
    fn ul_selection_examples() {
        let t = embedded_ber_table_160();
        assert_eq!(select_ul_mcs(&t.lookup_row(36.6).unwrap().ber).unwrap(), 11);
        assert_eq!(select_ul_mcs(&t.lookup_row(35.1).unwrap().ber).unwrap(), 10);
        assert_eq!(select_ul_mcs(&t.lookup_row(10.2).unwrap().ber).unwrap(), 0);
        let all_bad = [1.0; MCS_COUNT];
        assert!(select_ul_mcs(&all_bad).is_err());
    }

    #[test]
    fn dl_selection_examples() {
        let ber = embedded_ber_table_160();
        let phy = embedded_phy_table(4).unwrap();
        let a = FrameArithmetic::default();
        let dl = |snr: f64| {
            select_dl_mcs(&ber.lookup_row(snr).unwrap().ber, &phy, &a, 1524, 1460 * 8).unwrap()
        };
        assert_eq!(dl(36.6), 11);
        assert_eq!(dl(30.2), 7);
    }

    #[test]
    fn ul_never_above_dl_reliability() {
        let ber = embedded_ber_table_160();
        let phy = embedded_phy_table(4).unwrap();
        let a = FrameArithmetic::default();
        for row in &ber.rows {
            let ul = select_ul_mcs(&row.ber).unwrap();
            let dl = select_dl_mcs(&row.ber, &phy, &a, 1524, 1460 * 8).unwrap();
            assert_eq!(row.ber[ul as usize], 0.0);
            assert!(ul <= dl || row.ber[dl as usize] == 0.0);
        }
    }

    #[test]
    fn ul_selection_monotone_in_snr() {
        let ber = embedded_ber_table_160();
        let mut prev = 0u8;
        for row in &ber.rows {
            let ul = select_ul_mcs(&row.ber).unwrap();
            assert!(ul >= prev, "UL MCS decreased at SNR {}", row.snr_db);
            prev = ul;
        }
    }
}
