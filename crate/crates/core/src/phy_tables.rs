//! MCS rate/preamble tables and SNR-to-BER tables.
//!
//! The embedded defaults cover the four supported MU group sizes
//! (4/8/16/32 stations on 160/80/40/20 MHz resource units, one spatial
//! stream per station) and the 160 MHz SNR/BER table. User-supplied tables
//! are loaded from CSV and validated against the same invariants.

use std::io;
use std::path::Path;

use crate::error::{Result, SimError};

pub const MCS_COUNT: usize = 12;

/// Per-MCS PHY rates and preamble durations for the three transmission
/// modes used by the model: MU UL data (GI 1.6 us), MU DL data (GI 0.8 us)
/// and legacy control frames.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McsEntry {
    pub mcs_index: u8,
    /// Mbps per spatial stream.
    pub ul_rate: f64,
    /// us
    pub ul_preamble: f64,
    /// Mbps per spatial stream.
    pub dl_rate: f64,
    /// us
    pub dl_preamble: f64,
    /// Mbps
    pub legacy_rate: f64,
    /// us
    pub legacy_preamble: f64,
}

/// The 12-entry MCS table for one MU group size.
#[derive(Debug, Clone, PartialEq)]
pub struct PhyTable {
    /// One of 4, 8, 16, 32.
    pub station_count: u32,
    pub entries: [McsEntry; MCS_COUNT],
}

/// One SNR row: bit error rate per MCS index.
#[derive(Debug, Clone, PartialEq)]
pub struct BerRow {
    pub snr_db: f64,
    pub ber: [f64; MCS_COUNT],
}

/// SNR-to-BER mapping for one RU bandwidth, rows sorted by ascending SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct BerTable {
    pub bandwidth_mhz: u32,
    pub rows: Vec<BerRow>,
}

/// RU bandwidth implied by the MU group size (equal split of 160 MHz).
pub fn bandwidth_for_stations(stations: u32) -> Result<u32> {
    match stations {
        4 => Ok(160),
        8 => Ok(80),
        16 => Ok(40),
        32 => Ok(20),
        other => Err(SimError::InvalidConfig(format!(
            "station count must be one of 4, 8, 16, 32 (got {other})"
        ))),
    }
}

const fn entry(
    mcs_index: u8,
    ul_rate: f64,
    dl_rate: f64,
    dl_preamble: f64,
    legacy_rate: f64,
) -> McsEntry {
    McsEntry {
        mcs_index,
        ul_rate,
        ul_preamble: 64.8,
        dl_rate,
        dl_preamble,
        legacy_rate,
        legacy_preamble: 20.0,
    }
}

const PHY_4_STATIONS: [McsEntry; MCS_COUNT] = [
    entry(0, 68.1, 72.1, 72.8, 48.0),
    entry(1, 136.1, 144.1, 72.8, 48.0),
    entry(2, 204.2, 216.2, 68.8, 48.0),
    entry(3, 272.2, 288.2, 68.8, 48.0),
    entry(4, 408.3, 432.4, 68.8, 48.0),
    entry(5, 544.4, 576.5, 68.8, 48.0),
    entry(6, 612.5, 648.5, 68.8, 48.0),
    entry(7, 680.6, 720.6, 68.8, 48.0),
    entry(8, 816.7, 864.7, 68.8, 48.0),
    entry(9, 907.4, 960.7, 68.8, 48.0),
    entry(10, 1020.8, 1080.4, 68.8, 48.0),
    entry(11, 1134.2, 1201.0, 68.8, 48.0),
];

const PHY_8_STATIONS: [McsEntry; MCS_COUNT] = [
    entry(0, 34.0, 36.0, 76.8, 36.0),
    entry(1, 68.1, 72.1, 76.8, 48.0),
    entry(2, 102.1, 108.1, 72.8, 48.0),
    entry(3, 136.1, 144.1, 72.8, 48.0),
    entry(4, 204.2, 216.2, 68.8, 48.0),
    entry(5, 272.2, 288.2, 68.8, 48.0),
    entry(6, 306.3, 324.3, 68.8, 48.0),
    entry(7, 340.3, 360.3, 68.8, 48.0),
    entry(8, 408.3, 432.4, 68.8, 48.0),
    entry(9, 453.7, 480.4, 68.8, 48.0),
    entry(10, 510.4, 540.4, 68.8, 48.0),
    entry(11, 567.1, 600.4, 68.8, 48.0),
];

const PHY_16_STATIONS: [McsEntry; MCS_COUNT] = [
    entry(0, 16.3, 17.2, 84.8, 12.0),
    entry(1, 32.5, 34.4, 84.8, 12.0),
    entry(2, 48.8, 51.6, 76.8, 24.0),
    entry(3, 65.0, 68.8, 76.8, 48.0),
    entry(4, 97.5, 103.2, 72.8, 48.0),
    entry(5, 130.0, 137.6, 72.8, 48.0),
    entry(6, 146.3, 154.9, 72.8, 48.0),
    entry(7, 162.5, 172.1, 72.8, 48.0),
    entry(8, 195.0, 206.5, 72.8, 48.0),
    entry(9, 216.7, 229.4, 72.8, 48.0),
    entry(10, 243.8, 258.1, 72.8, 48.0),
    entry(11, 270.8, 286.8, 72.8, 48.0),
];

const PHY_32_STATIONS: [McsEntry; MCS_COUNT] = [
    entry(0, 8.1, 8.6, 104.8, 6.0),
    entry(1, 16.3, 17.2, 104.8, 12.0),
    entry(2, 24.4, 25.8, 84.8, 24.0),
    entry(3, 32.5, 34.4, 84.8, 24.0),
    entry(4, 48.8, 51.6, 80.8, 48.0),
    entry(5, 65.0, 68.8, 80.8, 48.0),
    entry(6, 73.1, 77.4, 80.8, 48.0),
    entry(7, 81.3, 86.0, 80.8, 48.0),
    entry(8, 97.5, 103.2, 80.8, 48.0),
    entry(9, 108.3, 114.7, 80.8, 48.0),
    entry(10, 121.9, 129.0, 80.8, 48.0),
    entry(11, 135.4, 143.4, 80.8, 48.0),
];

/// Embedded default MCS table for a MU group size.
pub fn embedded_phy_table(stations: u32) -> Result<PhyTable> {
    let entries = match stations {
        4 => PHY_4_STATIONS,
        8 => PHY_8_STATIONS,
        16 => PHY_16_STATIONS,
        32 => PHY_32_STATIONS,
        other => {
            return Err(SimError::InvalidConfig(format!(
                "no embedded PHY table for {other} stations"
            )))
        }
    };
    Ok(PhyTable {
        station_count: stations,
        entries,
    })
}

// (snr_db, [ber for MCS 0..=11]); ascending SNR. 160 MHz, 1 spatial stream.
const BER_160: [(f64, [f64; MCS_COUNT]); 18] = [
    (10.2, [0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]),
    (13.6, [0.0, 0.0, 0.4188, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]),
    (14.6, [0.0, 0.0, 0.0003, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]),
    (16.4, [0.0, 0.0, 0.0, 0.4973, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]),
    (17.5, [0.0, 0.0, 0.0, 0.0005, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]),
    (19.7, [0.0, 0.0, 0.0, 0.0, 0.5970, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]),
    (20.1, [0.0, 0.0, 0.0, 0.0, 0.1417, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]),
    (24.7, [0.0, 0.0, 0.0, 0.0, 0.0, 0.0010, 0.832, 1.0, 1.0, 1.0, 1.0, 1.0]),
    (25.9, [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0022, 1.0, 1.0, 1.0, 1.0, 1.0]),
    (27.1, [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0749, 1.0, 1.0, 1.0, 1.0]),
    (30.2, [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.6457, 1.0, 1.0, 1.0]),
    (31.7, [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.9412, 1.0, 1.0]),
    (32.5, [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0987, 1.0, 1.0]),
    (33.5, [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0005, 0.4958, 1.0]),
    (33.6, [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.3696, 1.0]),
    (34.0, [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0222, 1.0]),
    (35.1, [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.6595]),
    (36.6, [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
];

/// Embedded 160 MHz SNR-to-BER table (the only bandwidth with published
/// data; other bandwidths need a user table or the same-BER approximation).
pub fn embedded_ber_table_160() -> BerTable {
    BerTable {
        bandwidth_mhz: 160,
        rows: BER_160
            .iter()
            .map(|&(snr_db, ber)| BerRow { snr_db, ber })
            .collect(),
    }
}

/// Pure lookup of one MCS entry.
pub fn lookup_mcs(table: &PhyTable, mcs: u32) -> Result<&McsEntry> {
    table
        .entries
        .get(mcs as usize)
        .ok_or(SimError::McsOutOfRange(mcs))
}

impl BerTable {
    /// The row whose SNR is the largest table value <= the query
    /// (floor step function; the table has no model between rows).
    pub fn lookup_row(&self, snr_db: f64) -> Result<&BerRow> {
        let mut best: Option<&BerRow> = None;
        for row in &self.rows {
            if row.snr_db <= snr_db {
                best = Some(row);
            } else {
                break;
            }
        }
        best.ok_or_else(|| {
            SimError::ChannelUnusable(format!(
                "SNR {} dB below the smallest table row ({} dB) for {} MHz",
                snr_db,
                self.rows.first().map(|r| r.snr_db).unwrap_or(f64::NAN),
                self.bandwidth_mhz
            ))
        })
    }

    pub fn min_snr(&self) -> Option<f64> {
        self.rows.first().map(|r| r.snr_db)
    }
}

/// Step-function BER lookup for one (SNR, MCS) pair.
pub fn lookup_ber(table: &BerTable, snr_db: f64, mcs: u32) -> Result<f64> {
    if mcs as usize >= MCS_COUNT {
        return Err(SimError::McsOutOfRange(mcs));
    }
    Ok(table.lookup_row(snr_db)?.ber[mcs as usize])
}

fn validate_phy(table: &PhyTable) -> Result<()> {
    for (i, e) in table.entries.iter().enumerate() {
        if e.mcs_index as usize != i {
            return Err(SimError::TableValidation(format!(
                "MCS indices must cover 0..=11 in order (row {i} has index {})",
                e.mcs_index
            )));
        }
        let rates = [e.ul_rate, e.dl_rate, e.legacy_rate];
        if rates.iter().any(|r| !r.is_finite() || *r <= 0.0) {
            return Err(SimError::TableValidation(format!(
                "all rates must be positive and finite (MCS {i})"
            )));
        }
        let preambles = [e.ul_preamble, e.dl_preamble, e.legacy_preamble];
        if preambles.iter().any(|p| !p.is_finite() || *p <= 0.0) {
            return Err(SimError::TableValidation(format!(
                "all preambles must be positive and finite (MCS {i})"
            )));
        }
    }
    Ok(())
}

fn validate_ber(table: &BerTable) -> Result<()> {
    if table.rows.is_empty() {
        return Err(SimError::TableValidation("BER table has no rows".into()));
    }
    let mut prev_snr: Option<f64> = None;
    for row in &table.rows {
        if let Some(p) = prev_snr {
            if row.snr_db == p {
                return Err(SimError::TableValidation(format!(
                    "duplicate SNR row {}",
                    row.snr_db
                )));
            }
            if row.snr_db < p {
                return Err(SimError::TableValidation(format!(
                    "rows must be sorted ascending by SNR ({} after {})",
                    row.snr_db, p
                )));
            }
        }
        prev_snr = Some(row.snr_db);
        for (m, &b) in row.ber.iter().enumerate() {
            if !(0.0..=1.0).contains(&b) {
                return Err(SimError::TableValidation(format!(
                    "BER out of [0,1] at SNR {} MCS {m}",
                    row.snr_db
                )));
            }
            if m > 0 && b < row.ber[m - 1] {
                return Err(SimError::TableValidation(format!(
                    "BER must be non-decreasing in MCS within a row (SNR {}, MCS {m})",
                    row.snr_db
                )));
            }
        }
    }
    // For a fixed MCS, BER may only improve (decrease) as SNR grows.
    for m in 0..MCS_COUNT {
        for w in table.rows.windows(2) {
            if w[1].ber[m] > w[0].ber[m] {
                return Err(SimError::TableValidation(format!(
                    "BER must be non-increasing in SNR for fixed MCS (MCS {m}, SNR {} -> {})",
                    w[0].snr_db, w[1].snr_db
                )));
            }
        }
    }
    Ok(())
}

pub const PHY_CSV_HEADER: [&str; 7] = [
    "mcs",
    "ul_rate",
    "ul_preamble",
    "dl_rate",
    "dl_preamble",
    "legacy_rate",
    "legacy_preamble",
];

fn schema_err(e: impl std::fmt::Display) -> SimError {
    SimError::TableSchema(e.to_string())
}

/// Load and validate a PHY table from CSV. The file carries no station
/// count; the caller binds it to the group size of the run.
pub fn load_phy_table(path: &Path, stations: u32) -> Result<PhyTable> {
    bandwidth_for_stations(stations)?;
    let file = std::fs::File::open(path)?;
    parse_phy_csv(file, stations)
}

pub fn parse_phy_csv(reader: impl io::Read, stations: u32) -> Result<PhyTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers().map_err(schema_err)?.clone();
    if headers.iter().collect::<Vec<_>>() != PHY_CSV_HEADER {
        return Err(SimError::TableSchema(format!(
            "expected header {}, got {}",
            PHY_CSV_HEADER.join(","),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut entries = Vec::with_capacity(MCS_COUNT);
    for rec in rdr.records() {
        let rec = rec.map_err(schema_err)?;
        if rec.len() != PHY_CSV_HEADER.len() {
            return Err(SimError::TableSchema(format!(
                "expected {} columns, got {}",
                PHY_CSV_HEADER.len(),
                rec.len()
            )));
        }
        let num = |i: usize| -> Result<f64> {
            rec[i]
                .parse::<f64>()
                .map_err(|e| SimError::TableSchema(format!("column {}: {e}", PHY_CSV_HEADER[i])))
        };
        entries.push(McsEntry {
            mcs_index: rec[0]
                .parse::<u8>()
                .map_err(|e| SimError::TableSchema(format!("column mcs: {e}")))?,
            ul_rate: num(1)?,
            ul_preamble: num(2)?,
            dl_rate: num(3)?,
            dl_preamble: num(4)?,
            legacy_rate: num(5)?,
            legacy_preamble: num(6)?,
        });
    }
    let entries: [McsEntry; MCS_COUNT] = entries.try_into().map_err(|v: Vec<McsEntry>| {
        SimError::TableSchema(format!("expected {} data rows, got {}", MCS_COUNT, v.len()))
    })?;
    let table = PhyTable {
        station_count: stations,
        entries,
    };
    validate_phy(&table)?;
    Ok(table)
}

/// Load and validate a BER table from CSV; bandwidth comes from the run.
pub fn load_ber_table(path: &Path, bandwidth_mhz: u32) -> Result<BerTable> {
    let file = std::fs::File::open(path)?;
    parse_ber_csv(file, bandwidth_mhz)
}

pub fn parse_ber_csv(reader: impl io::Read, bandwidth_mhz: u32) -> Result<BerTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers().map_err(schema_err)?.clone();
    let expected = ber_csv_header();
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(SimError::TableSchema(format!(
            "expected header {}, got {}",
            expected.join(","),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(schema_err)?;
        if rec.len() != MCS_COUNT + 1 {
            return Err(SimError::TableSchema(format!(
                "expected {} columns, got {}",
                MCS_COUNT + 1,
                rec.len()
            )));
        }
        let snr_db = rec[0]
            .parse::<f64>()
            .map_err(|e| SimError::TableSchema(format!("column snr_db: {e}")))?;
        let mut ber = [0.0; MCS_COUNT];
        for (m, slot) in ber.iter_mut().enumerate() {
            *slot = rec[m + 1]
                .parse::<f64>()
                .map_err(|e| SimError::TableSchema(format!("column mcs{m}: {e}")))?;
        }
        rows.push(BerRow { snr_db, ber });
    }
    let table = BerTable {
        bandwidth_mhz,
        rows,
    };
    validate_ber(&table)?;
    Ok(table)
}

pub fn ber_csv_header() -> Vec<String> {
    let mut h = vec!["snr_db".to_string()];
    h.extend((0..MCS_COUNT).map(|m| format!("mcs{m}")));
    h
}

/// Shortest float formatting that round-trips through parse.
pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

pub fn write_phy_csv(table: &PhyTable, w: &mut impl io::Write) -> Result<()> {
    writeln!(w, "{}", PHY_CSV_HEADER.join(","))?;
    for e in &table.entries {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            e.mcs_index,
            fmt_f64(e.ul_rate),
            fmt_f64(e.ul_preamble),
            fmt_f64(e.dl_rate),
            fmt_f64(e.dl_preamble),
            fmt_f64(e.legacy_rate),
            fmt_f64(e.legacy_preamble)
        )?;
    }
    Ok(())
}

pub fn write_ber_csv(table: &BerTable, w: &mut impl io::Write) -> Result<()> {
    writeln!(w, "{}", ber_csv_header().join(","))?;
    for row in &table.rows {
        let mut line = fmt_f64(row.snr_db);
        for b in &row.ber {
            line.push(',');
            line.push_str(&fmt_f64(*b));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}
