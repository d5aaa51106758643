//! Command-line front end: scenario runs, sweeps, plot-data emission,
//! table import/export and per-TXOP trace dumps.
//!
//! Results are CSV with the effective configuration echoed as `#` comment
//! lines, so every output file is reproducible from its own header.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::aggregation::{msdu_on_air_size, optimal_segments_per_mpdu, FrameArithmetic};
use crate::config::{parse_mcs_pair, RunSpec};
use crate::error::{Result, SimError};
use crate::phy_tables::{
    bandwidth_for_stations, embedded_ber_table_160, embedded_phy_table, fmt_f64, load_ber_table,
    load_phy_table, lookup_mcs, write_ber_csv, write_phy_csv,
};
use crate::sim_engine::{simulate_traced, sweep, SimulationOutput, SweepAxis};
use crate::txop::{NoTrace, PhaseRecord, TraceSink};

pub const RESULT_HEADER: &str = "scenario_id,stations,segment,strategy,load,snr_db,dl_mcs,ul_mcs,\
goodput_mbps,mean_txop_ms,txop_p95_ms,mean_dl_cycles,goodput_stderr";

pub const TRACE_HEADER: &str = "txop,phase,start_us,duration_us,bits";

#[derive(Parser, Debug)]
#[command(
    name = "axsim",
    version,
    about = "IEEE 802.11ax MU downlink-TCP TXOP scheduling simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run one scenario and emit a one-row results CSV.
    Simulate(ScenarioArgs),
    /// Run one simulation per value along a swept axis.
    Sweep(SweepArgs),
    /// Reshape results CSVs into tidy (x, series, y) plot data.
    PlotData(PlotArgs),
    /// Write the embedded PHY/BER tables as CSV.
    ExportTables(ExportArgs),
    /// Dump the per-MPDU packing throughput table for one link.
    PackingTable(PackingArgs),
}

/// Scenario flags. Every flag has a config-file equivalent under the same
/// name; command-line values override the file.
#[derive(Args, Debug, Default, Clone)]
pub struct ScenarioArgs {
    /// Flat key=value config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// MU group size: 4, 8, 16 or 32.
    #[arg(long)]
    pub stations: Option<u32>,
    /// TCP Data segment payload, bytes.
    #[arg(long)]
    pub segment: Option<u32>,
    /// 1 = minimal response, 2 = target response, 3 = max-goodput (needs --load).
    #[arg(long)]
    pub strategy: Option<u8>,
    /// Strategy-3 ack-target fraction in (0, 1].
    #[arg(long)]
    pub load: Option<f64>,
    /// Operating SNR, dB.
    #[arg(long)]
    pub snr: Option<f64>,
    /// Pin the MCS pair as DL:UL and bypass selection (UL stays loss-free).
    #[arg(long)]
    pub mcs: Option<String>,
    /// TXOPs per scenario.
    #[arg(long)]
    pub txops: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Abort a TXOP after this many DL data cycles.
    #[arg(long = "max-cycles")]
    pub max_cycles: Option<u32>,
    /// CSV MCS table replacing the embedded one.
    #[arg(long = "phy-table")]
    pub phy_table: Option<PathBuf>,
    /// CSV BER table replacing the embedded one.
    #[arg(long = "ber-table")]
    pub ber_table: Option<PathBuf>,
    /// Reuse the 160 MHz BER table for 80/40/20 MHz runs (approximation).
    #[arg(long = "assume-same-ber", action = clap::ArgAction::SetTrue)]
    pub assume_same_ber: Option<bool>,
    /// Trigger Frame size, bytes.
    #[arg(long = "tf-bytes")]
    pub tf_bytes: Option<u32>,
    /// Per-cycle BAck frame size, bytes.
    #[arg(long = "back-bytes")]
    pub back_bytes: Option<u32>,
    /// Multi-Station BAck fixed part, bytes.
    #[arg(long = "mba-base")]
    pub mba_base: Option<u32>,
    /// Multi-Station BAck per-station part, bytes.
    #[arg(long = "mba-per-sta")]
    pub mba_per_sta: Option<u32>,
    #[arg(long)]
    pub sifs: Option<f64>,
    #[arg(long = "aifs-ap")]
    pub aifs_ap: Option<f64>,
    #[arg(long = "aifs-sta")]
    pub aifs_sta: Option<f64>,
    #[arg(long = "slot-time")]
    pub slot_time: Option<f64>,
    #[arg(long = "cw-min")]
    pub cw_min: Option<u32>,
    /// Average backoff, us; derived from cw-min and slot-time when absent.
    #[arg(long = "avg-backoff")]
    pub avg_backoff: Option<f64>,
    /// PPDU duration cap, us, preamble included.
    #[arg(long = "max-ppdu-us")]
    pub max_ppdu_us: Option<f64>,
    /// Per-TXOP phase trace CSV (simulate only).
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Results CSV destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// One of: snr, load, stations, segment.
    #[arg(long)]
    pub axis: String,
    /// Comma list ("0.03,0.1,0.95") or range "start:end:linN" / "start:end:logN".
    #[arg(long)]
    pub values: String,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum PlotLayout {
    #[value(name = "goodput_vs_snr")]
    GoodputVsSnr,
    #[value(name = "delay_vs_snr")]
    DelayVsSnr,
    #[value(name = "goodput_vs_delay")]
    GoodputVsDelay,
    #[value(name = "goodput_vs_load")]
    GoodputVsLoad,
}

#[derive(Args, Debug)]
pub struct PlotArgs {
    #[arg(long, value_enum)]
    pub layout: PlotLayout,
    /// One or more results CSVs produced by simulate/sweep.
    #[arg(long = "input", required = true, num_args = 1..)]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ExportArgs {
    #[arg(long, default_value_t = 4)]
    pub stations: u32,
    #[arg(long = "phy-out")]
    pub phy_out: Option<PathBuf>,
    #[arg(long = "ber-out")]
    pub ber_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PackingArgs {
    #[arg(long, default_value_t = 1460)]
    pub segment: u32,
    #[arg(long, default_value_t = 4)]
    pub stations: u32,
    /// DL MCS supplying the PHY rate.
    #[arg(long)]
    pub mcs: u8,
    /// Explicit DL bit error rate (exclusive with --snr).
    #[arg(long)]
    pub ber: Option<f64>,
    /// Look the BER up from the table at this SNR (exclusive with --ber).
    #[arg(long)]
    pub snr: Option<f64>,
    #[arg(long = "phy-table")]
    pub phy_table: Option<PathBuf>,
    #[arg(long = "ber-table")]
    pub ber_table: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A simulator error plus whether it is a usage problem (exit 2) or a
/// runtime failure (exit 1).
struct CliFailure {
    error: SimError,
    usage: bool,
}

type CliResult = std::result::Result<(), CliFailure>;

impl From<SimError> for CliFailure {
    fn from(error: SimError) -> Self {
        CliFailure {
            error,
            usage: false,
        }
    }
}

impl From<io::Error> for CliFailure {
    fn from(error: io::Error) -> Self {
        SimError::from(error).into()
    }
}

fn usage(error: SimError) -> CliFailure {
    CliFailure { error, usage: true }
}

/// Configuration-shaped errors during setup are usage errors; anything
/// touching files or the simulation itself is a runtime failure.
fn classify(error: SimError) -> CliFailure {
    let usage = matches!(
        error,
        SimError::InvalidConfig(_) | SimError::McsOutOfRange(_)
    );
    CliFailure { error, usage }
}

pub fn run(cli: Cli) -> i32 {
    let outcome = match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::PlotData(args) => cmd_plot_data(args),
        Command::ExportTables(args) => cmd_export_tables(args),
        Command::PackingTable(args) => cmd_packing_table(args),
    };
    match outcome {
        Ok(()) => 0,
        Err(f) => {
            eprintln!(
                "error code={} message={:?}",
                f.error.code(),
                f.error.to_string()
            );
            if f.usage {
                2
            } else {
                1
            }
        }
    }
}

/// Parse argv and run; clap itself exits 2 on malformed flags.
pub fn run_from_args() -> i32 {
    run(Cli::parse())
}

fn build_spec(args: &ScenarioArgs) -> Result<RunSpec> {
    let mut spec = match &args.config {
        Some(p) => RunSpec::from_file(p)?,
        None => RunSpec::default(),
    };
    if let Some(v) = args.stations {
        spec.stations = v;
    }
    if let Some(v) = args.segment {
        spec.segment = v;
    }
    if let Some(v) = args.strategy {
        spec.strategy = Some(v);
    }
    if let Some(v) = args.load {
        spec.load = Some(v);
    }
    if let Some(v) = args.snr {
        spec.snr = Some(v);
    }
    if let Some(v) = &args.mcs {
        spec.mcs = Some(parse_mcs_pair(v)?);
    }
    if let Some(v) = args.txops {
        spec.txops = v;
    }
    if let Some(v) = args.seed {
        spec.seed = v;
    }
    if let Some(v) = args.max_cycles {
        spec.max_cycles = v;
    }
    if let Some(v) = &args.phy_table {
        spec.phy_table = Some(v.clone());
    }
    if let Some(v) = &args.ber_table {
        spec.ber_table = Some(v.clone());
    }
    if args.assume_same_ber == Some(true) {
        spec.assume_same_ber = true;
    }
    if let Some(v) = args.tf_bytes {
        spec.tf_bytes = v;
    }
    if let Some(v) = args.back_bytes {
        spec.back_bytes = v;
    }
    if let Some(v) = args.mba_base {
        spec.mba_base = v;
    }
    if let Some(v) = args.mba_per_sta {
        spec.mba_per_sta = v;
    }
    if let Some(v) = args.sifs {
        spec.sifs = v;
    }
    if let Some(v) = args.aifs_ap {
        spec.aifs_ap = v;
    }
    if let Some(v) = args.aifs_sta {
        spec.aifs_sta = v;
    }
    if let Some(v) = args.slot_time {
        spec.slot_time = v;
    }
    if let Some(v) = args.cw_min {
        spec.cw_min = v;
    }
    if let Some(v) = args.avg_backoff {
        spec.avg_backoff = Some(v);
    }
    if let Some(v) = args.max_ppdu_us {
        spec.max_ppdu_us = v;
    }
    if let Some(v) = &args.trace {
        spec.trace = Some(v.clone());
    }
    if let Some(v) = &args.out {
        spec.out = Some(v.clone());
    }
    Ok(spec)
}

/// One results row; errors carry their machine-readable code.
struct CsvRow {
    stations: u32,
    segment: u32,
    strategy: u8,
    load: Option<f64>,
    snr_db: f64,
    seed: u64,
    outcome: std::result::Result<SimulationOutput, String>,
}

impl CsvRow {
    fn scenario_id(&self) -> String {
        let load = self
            .load
            .map(|l| format!("-load{}", fmt_f64(l)))
            .unwrap_or_default();
        format!(
            "st{}-seg{}-s{}{}-snr{}-seed{}",
            self.stations,
            self.segment,
            self.strategy,
            load,
            fmt_f64(self.snr_db),
            self.seed
        )
    }

    fn write(&self, w: &mut impl Write) -> io::Result<()> {
        let load = self.load.map(fmt_f64).unwrap_or_default();
        match &self.outcome {
            Ok(out) => writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                self.scenario_id(),
                self.stations,
                self.segment,
                self.strategy,
                load,
                fmt_f64(self.snr_db),
                out.dl_mcs,
                out.ul_mcs,
                fmt_f64(out.metrics.goodput_mbps),
                fmt_f64(out.metrics.mean_txop_ms),
                fmt_f64(out.metrics.txop_p95_ms),
                fmt_f64(out.metrics.mean_dl_cycles),
                fmt_f64(out.metrics.goodput_stderr_mbps),
            ),
            Err(code) => writeln!(
                w,
                "{},{},{},{},{},{},,,ERROR:{},,,,",
                self.scenario_id(),
                self.stations,
                self.segment,
                self.strategy,
                load,
                fmt_f64(self.snr_db),
                code,
            ),
        }
    }
}

fn emit_results(dest: &Option<PathBuf>, echo: &[String], rows: &[CsvRow]) -> Result<()> {
    let mut buf = Vec::new();
    for line in echo {
        writeln!(&mut buf, "{line}")?;
    }
    writeln!(&mut buf, "{RESULT_HEADER}")?;
    for row in rows {
        row.write(&mut buf)?;
    }
    write_output(dest, &buf)
}

fn write_output(dest: &Option<PathBuf>, bytes: &[u8]) -> Result<()> {
    match dest {
        Some(p) => std::fs::write(p, bytes)?,
        None => io::stdout().write_all(bytes)?,
    }
    Ok(())
}

/// Streams phase records into a trace CSV.
struct CsvTrace {
    w: BufWriter<File>,
    err: Option<io::Error>,
}

impl CsvTrace {
    fn create(path: &PathBuf) -> Result<Self> {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "{TRACE_HEADER}")?;
        Ok(CsvTrace { w, err: None })
    }

    fn finish(mut self) -> Result<()> {
        if let Some(e) = self.err.take() {
            return Err(e.into());
        }
        self.w.flush()?;
        Ok(())
    }
}

impl TraceSink for CsvTrace {
    fn record(&mut self, txop_index: u64, rec: PhaseRecord) {
        if self.err.is_some() {
            return;
        }
        if let Err(e) = writeln!(
            self.w,
            "{},{},{},{},{}",
            txop_index,
            rec.phase.name(),
            fmt_f64(rec.start_us),
            fmt_f64(rec.duration_us),
            rec.bits
        ) {
            self.err = Some(e);
        }
    }
}

fn cmd_simulate(args: ScenarioArgs) -> CliResult {
    let spec = build_spec(&args).map_err(usage)?;
    let cfg = spec.resolve().map_err(classify)?;
    let output = match &spec.trace {
        Some(path) => {
            let mut trace = CsvTrace::create(path)?;
            let out = simulate_traced(&cfg, &mut trace)?;
            trace.finish()?;
            out
        }
        None => simulate_traced(&cfg, &mut NoTrace)?,
    };
    let row = CsvRow {
        stations: cfg.stations,
        segment: cfg.segment_bytes,
        strategy: cfg.strategy.id(),
        load: cfg.load,
        snr_db: cfg.snr_db,
        seed: cfg.seed,
        outcome: Ok(output),
    };
    emit_results(&spec.out, &spec.echo_lines(), &[row])?;
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> CliResult {
    let mut spec = build_spec(&args.scenario).map_err(usage)?;
    if spec.trace.is_some() {
        return Err(usage(SimError::InvalidConfig(
            "per-TXOP traces are only available with simulate".into(),
        )));
    }
    let axis = SweepAxis::parse(&args.axis).map_err(usage)?;
    let values = parse_values(&args.values).map_err(usage)?;
    if values.is_empty() {
        return Err(usage(SimError::InvalidConfig("no sweep values".into())));
    }
    // The swept axis may supply the otherwise-required base value.
    match axis {
        SweepAxis::Snr if spec.snr.is_none() => spec.snr = Some(values[0]),
        SweepAxis::Load if spec.load.is_none() => spec.load = Some(values[0]),
        _ => {}
    }
    let base = spec.resolve().map_err(classify)?;
    let provider = |stations: u32| spec.resolve_tables(stations);
    let points = sweep(&base, axis, &values, &provider);
    let rows: Vec<CsvRow> = points
        .into_iter()
        .map(|p| CsvRow {
            stations: p.stations,
            segment: p.segment_bytes,
            strategy: p.strategy.id(),
            load: p.load,
            snr_db: p.snr_db,
            seed: p.seed,
            outcome: p.outcome.map_err(|e| e.code().to_string()),
        })
        .collect();
    let mut echo = spec.echo_lines();
    echo.push(format!("# axis={}", axis.name()));
    echo.push(format!("# values={}", args.values));
    emit_results(&spec.out, &echo, &rows)?;
    Ok(())
}

/// Parse sweep values: a comma list, or "start:end:linN" / "start:end:logN"
/// for N evenly (log-evenly) spaced points, endpoints included.
pub fn parse_values(s: &str) -> Result<Vec<f64>> {
    let bad = |m: String| SimError::InvalidConfig(m);
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(bad(format!("range must be start:end:linN or start:end:logN (got {s:?})")));
        }
        let start: f64 = parts[0]
            .parse()
            .map_err(|_| bad(format!("bad range start {:?}", parts[0])))?;
        let end: f64 = parts[1]
            .parse()
            .map_err(|_| bad(format!("bad range end {:?}", parts[1])))?;
        let (log, n): (bool, usize) = if let Some(n) = parts[2].strip_prefix("log") {
            (true, n.parse().map_err(|_| bad(format!("bad point count {:?}", parts[2])))?)
        } else if let Some(n) = parts[2].strip_prefix("lin") {
            (false, n.parse().map_err(|_| bad(format!("bad point count {:?}", parts[2])))?)
        } else {
            return Err(bad(format!("range kind must be linN or logN (got {:?})", parts[2])));
        };
        if n < 2 {
            return Err(bad("ranges need at least 2 points".into()));
        }
        if log && (start <= 0.0 || end <= 0.0) {
            return Err(bad("log ranges need positive endpoints".into()));
        }
        let mut vals = Vec::with_capacity(n);
        for i in 0..n {
            let f = i as f64 / (n - 1) as f64;
            let v = if log {
                start * (end / start).powf(f)
            } else {
                start + (end - start) * f
            };
            vals.push(v);
        }
        Ok(vals)
    } else {
        s.split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| bad(format!("bad value {p:?}")))
            })
            .collect()
    }
}

struct ParsedRow {
    strategy: u8,
    load: Option<f64>,
    snr_db: f64,
    goodput_mbps: f64,
    mean_txop_ms: f64,
}

fn read_result_rows(paths: &[PathBuf]) -> Result<Vec<ParsedRow>> {
    let mut rows = Vec::new();
    for path in paths {
        let text = std::fs::read_to_string(path)?;
        let mut saw_header = false;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if !saw_header {
                if line != RESULT_HEADER {
                    return Err(SimError::TableSchema(format!(
                        "{}: not a results CSV (unexpected header)",
                        path.display()
                    )));
                }
                saw_header = true;
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 13 {
                return Err(SimError::TableSchema(format!(
                    "{}: expected 13 columns, got {}",
                    path.display(),
                    cols.len()
                )));
            }
            if cols[8].starts_with("ERROR:") {
                continue;
            }
            let parse = |i: usize| -> Result<f64> {
                cols[i].parse::<f64>().map_err(|_| {
                    SimError::TableSchema(format!("{}: bad number {:?}", path.display(), cols[i]))
                })
            };
            rows.push(ParsedRow {
                strategy: cols[3].parse::<u8>().map_err(|_| {
                    SimError::TableSchema(format!("{}: bad strategy {:?}", path.display(), cols[3]))
                })?,
                load: if cols[4].is_empty() {
                    None
                } else {
                    Some(parse(4)?)
                },
                snr_db: parse(5)?,
                goodput_mbps: parse(8)?,
                mean_txop_ms: parse(9)?,
            });
        }
    }
    Ok(rows)
}

fn series_key(strategy: u8, load: Option<f64>) -> String {
    match (strategy, load) {
        (3, Some(l)) => format!("s3@{}", fmt_f64(l)),
        (s, _) => format!("s{s}"),
    }
}

fn cmd_plot_data(args: PlotArgs) -> CliResult {
    let rows = read_result_rows(&args.inputs)?;
    let mut points: Vec<(String, f64, f64)> = Vec::new();
    for r in &rows {
        let series = series_key(r.strategy, r.load);
        let (x, y) = match args.layout {
            PlotLayout::GoodputVsSnr => (r.snr_db, r.goodput_mbps),
            PlotLayout::DelayVsSnr => (r.snr_db, r.mean_txop_ms),
            PlotLayout::GoodputVsDelay => (r.mean_txop_ms, r.goodput_mbps),
            PlotLayout::GoodputVsLoad => match r.load {
                Some(l) => (l, r.goodput_mbps),
                None => continue,
            },
        };
        points.push((series, x, y));
    }
    if points.is_empty() {
        return Err(SimError::InvalidConfig("empty result set".into()).into());
    }
    points.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then(a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal))
            .then(a.2.partial_cmp(&b.2).unwrap_or(std::cmp::Ordering::Equal))
    });
    let mut buf = Vec::new();
    writeln!(&mut buf, "x,series,y")?;
    for (series, x, y) in &points {
        writeln!(&mut buf, "{},{},{}", fmt_f64(*x), series, fmt_f64(*y))?;
    }
    write_output(&args.out, &buf)?;
    Ok(())
}

fn cmd_export_tables(args: ExportArgs) -> CliResult {
    if args.phy_out.is_none() && args.ber_out.is_none() {
        return Err(usage(SimError::InvalidConfig(
            "nothing to export: pass --phy-out and/or --ber-out".into(),
        )));
    }
    if let Some(path) = &args.phy_out {
        let table = embedded_phy_table(args.stations).map_err(usage)?;
        let mut buf = Vec::new();
        write_phy_csv(&table, &mut buf)?;
        std::fs::write(path, buf).map_err(SimError::from)?;
    }
    if let Some(path) = &args.ber_out {
        let mut buf = Vec::new();
        write_ber_csv(&embedded_ber_table_160(), &mut buf)?;
        std::fs::write(path, buf).map_err(SimError::from)?;
    }
    Ok(())
}

fn cmd_packing_table(args: PackingArgs) -> CliResult {
    let phy = match &args.phy_table {
        Some(p) => load_phy_table(p, args.stations)?,
        None => embedded_phy_table(args.stations).map_err(usage)?,
    };
    let entry = lookup_mcs(&phy, args.mcs as u32).map_err(usage)?;
    let ber = match (args.ber, args.snr) {
        (Some(b), None) => b,
        (None, Some(snr)) => {
            let table = match &args.ber_table {
                Some(p) => {
                    let bw = bandwidth_for_stations(args.stations).map_err(usage)?;
                    load_ber_table(p, bw)?
                }
                None => embedded_ber_table_160(),
            };
            crate::phy_tables::lookup_ber(&table, snr, args.mcs as u32)?
        }
        _ => {
            return Err(usage(SimError::InvalidConfig(
                "pass exactly one of --ber or --snr".into(),
            )))
        }
    };
    let arith = FrameArithmetic::default();
    let msdu_len = msdu_on_air_size(&arith, args.segment);
    let packing = optimal_segments_per_mpdu(
        &arith,
        ber,
        entry.dl_rate,
        msdu_len,
        args.segment as u64 * 8,
    )?;
    let mut buf = Vec::new();
    writeln!(&mut buf, "# segment={} msdu_len={}", args.segment, msdu_len)?;
    writeln!(
        &mut buf,
        "# mcs={} dl_rate={} ber={}",
        args.mcs,
        fmt_f64(entry.dl_rate),
        fmt_f64(ber)
    )?;
    writeln!(&mut buf, "# optimum={}", packing.segments_per_mpdu)?;
    writeln!(&mut buf, "segments_per_mpdu,throughput_mbps")?;
    for (i, u) in packing.throughput_by_count.iter().enumerate() {
        writeln!(&mut buf, "{},{}", i + 1, fmt_f64(*u))?;
    }
    write_output(&args.out, &buf)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_ranges_parse() {
        assert_eq!(parse_values("0.03,0.1,0.95").unwrap(), vec![0.03, 0.1, 0.95]);
        let v = parse_values("0.01:1.0:log20").unwrap();
        assert_eq!(v.len(), 20);
        assert!((v[0] - 0.01).abs() < 1e-12);
        assert!((v[19] - 1.0).abs() < 1e-12);
        for w in v.windows(2) {
            assert!(w[1] > w[0]);
        }
        let v = parse_values("1:5:lin5").unwrap();
        assert_eq!(v, vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        assert!(parse_values("0:1:log5").is_err());
        assert!(parse_values("1:2").is_err());
        assert!(parse_values("a,b").is_err());
    }

    #[test]
    fn series_keys() {
        assert_eq!(series_key(1, None), "s1");
        assert_eq!(series_key(2, None), "s2");
        assert_eq!(series_key(3, Some(0.03)), "s3@0.03");
        assert_eq!(series_key(3, Some(0.95)), "s3@0.95");
    }
}
