//! On-air durations of PPDUs and legacy control frames.
//!
//! Payloads are quantized to whole OFDM symbols on top of the preamble.

/// Channel-access and symbol timing for one scenario. All durations in us.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingConstants {
    pub sifs: f64,
    /// AIFS of the AP (Best Effort access category).
    pub aifs_ap: f64,
    /// AIFS of a station. Stations never contend in this model (triggered
    /// access); kept as a configuration knob.
    pub aifs_sta: f64,
    pub slot_time: f64,
    pub cw_min: u32,
    /// Average backoff charged at TXOP start. The default is the worked
    /// value (CW_min - 1) / 2 * SlotTime = 67.5 us.
    pub avg_backoff: f64,
    /// Base OFDM symbol, without guard interval.
    pub symbol_base: f64,
    /// DL MU symbol (GI 0.8 us).
    pub dl_symbol: f64,
    /// UL MU symbol (GI 1.6 us, looser due to UL arrival-time spread).
    pub ul_symbol: f64,
    /// Legacy-mode symbol.
    pub legacy_symbol: f64,
    /// Cap on any single PPDU, preamble included.
    pub max_ppdu_duration: f64,
}

impl Default for TimingConstants {
    fn default() -> Self {
        TimingConstants {
            sifs: 16.0,
            aifs_ap: 43.0,
            aifs_sta: 52.0,
            slot_time: 9.0,
            cw_min: 16,
            avg_backoff: 67.5,
            symbol_base: 12.8,
            dl_symbol: 13.6,
            ul_symbol: 14.4,
            legacy_symbol: 4.0,
            max_ppdu_duration: 5484.0,
        }
    }
}

/// Duration of a (share of a) MU PPDU: preamble plus the payload rounded up
/// to whole symbols at `rate_mbps`. A zero-bit payload costs only the
/// preamble.
pub fn mu_ppdu_duration(payload_bits: u64, rate_mbps: f64, preamble_us: f64, symbol_us: f64) -> f64 {
    preamble_us + symbols_for(payload_bits, rate_mbps, symbol_us) as f64 * symbol_us
}

/// Duration of a legacy-mode control frame (TF, Multi-Station BAck).
pub fn legacy_frame_duration(
    payload_bits: u64,
    legacy_rate_mbps: f64,
    legacy_preamble_us: f64,
    legacy_symbol_us: f64,
) -> f64 {
    mu_ppdu_duration(payload_bits, legacy_rate_mbps, legacy_preamble_us, legacy_symbol_us)
}

/// Number of whole symbols needed for `payload_bits` at `rate_mbps`.
pub fn symbols_for(payload_bits: u64, rate_mbps: f64, symbol_us: f64) -> u64 {
    if payload_bits == 0 {
        return 0;
    }
    let bits_per_symbol = rate_mbps * symbol_us;
    (payload_bits as f64 / bits_per_symbol).ceil() as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn mu_ppdu_examples() {
        assert_eq!(mu_ppdu_duration(0, 1201.0, 68.8, 13.6), 68.8);
        assert_eq!(mu_ppdu_duration(1, 1201.0, 68.8, 13.6), 68.8 + 13.6);
        // 1134.2 Mbps * 14.4 us = 16332.48 bits per symbol; 100000 bits
        // need 7 symbols.
        let d = mu_ppdu_duration(100_000, 1134.2, 64.8, 14.4);
        assert!((d - 165.6).abs() < 1e-9, "{d}");
    }

    #[test]
    fn legacy_examples() {
        assert_eq!(legacy_frame_duration(0, 48.0, 20.0, 4.0), 20.0);
        // 48 Mbps * 4 us = 192 bits per symbol.
        assert_eq!(legacy_frame_duration(800, 48.0, 20.0, 4.0), 40.0);
        // 6 Mbps * 4 us = 24 bits per symbol.
        assert_eq!(legacy_frame_duration(800, 6.0, 20.0, 4.0), 156.0);
    }

    #[test]
    fn default_backoff_matches_contention_window() {
        let t = TimingConstants::default();
        assert_eq!(t.avg_backoff, (t.cw_min - 1) as f64 / 2.0 * t.slot_time);
        assert_eq!(t.dl_symbol, t.symbol_base + 0.8);
        assert_eq!(t.ul_symbol, t.symbol_base + 1.6);
    }

    proptest! {
        #[test]
        fn payload_is_whole_symbols(bits in 0u64..10_000_000, rate in 1.0f64..2000.0) {
            let sym = 13.6;
            let d = mu_ppdu_duration(bits, rate, 68.8, sym);
            let payload = d - 68.8;
            let k = (payload / sym).round();
            prop_assert!((payload - k * sym).abs() < 1e-6);
        }

        #[test]
        fn duration_monotone(bits in 0u64..1_000_000, extra in 0u64..1_000_000,
                             rate in 1.0f64..2000.0, faster in 0.0f64..500.0) {
            let d0 = mu_ppdu_duration(bits, rate, 64.8, 14.4);
            let d1 = mu_ppdu_duration(bits + extra, rate, 64.8, 14.4);
            prop_assert!(d1 >= d0);
            let d2 = mu_ppdu_duration(bits, rate + faster, 64.8, 14.4);
            prop_assert!(d2 <= d0);
        }
    }
}
