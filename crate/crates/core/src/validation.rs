//! Real-trace pipeline: ingestion, window resampling, per-hour statistics,
//! pairwise correlation and transmission counting under prediction plus
//! aggregation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDateTime;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::correlation::{average_correlation, prob_no_transmission, CorrelationMatrix, MvnOptions};
use crate::error::{domain, Error, Result};
use crate::prediction::threshold_from_accuracy;

/// Motes of the Intel Berkeley Research lab deployment used for the
/// nine-node comparison.
pub const INTEL_LAB_NODES: [u32; 9] = [21, 22, 26, 31, 38, 40, 42, 45, 46];

pub const DEFAULT_ACCURACY_LEVELS: [f64; 6] = [0.5, 0.6, 0.7, 0.8, 0.9, 0.95];

const DAY: f64 = 86_400.0;
const HOUR: f64 = 3_600.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reading {
    /// Seconds since the Unix epoch, in the trace's local clock.
    pub timestamp: f64,
    pub node: u32,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceMetadata {
    pub source: String,
    pub field: String,
    /// Lines that could not be parsed and were skipped.
    pub malformed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementTrace {
    pub readings: Vec<Reading>,
    pub metadata: TraceMetadata,
}

impl MeasurementTrace {
    /// Sorts readings by time so every node's sequence is non-decreasing.
    pub fn new(mut readings: Vec<Reading>, source: impl Into<String>, field: impl Into<String>) -> Self {
        readings.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp).then(a.node.cmp(&b.node)));
        Self {
            readings,
            metadata: TraceMetadata {
                source: source.into(),
                field: field.into(),
                malformed: 0,
            },
        }
    }

    pub fn nodes(&self) -> BTreeSet<u32> {
        self.readings.iter().map(|r| r.node).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.readings.is_empty()
    }

    pub fn len(&self) -> usize {
        self.readings.len()
    }

    /// Keeps only readings from `nodes`.
    pub fn filter_nodes(&self, nodes: &[u32]) -> Self {
        let keep: BTreeSet<u32> = nodes.iter().copied().collect();
        Self {
            readings: self.readings.iter().filter(|r| keep.contains(&r.node)).copied().collect(),
            metadata: self.metadata.clone(),
        }
    }

    /// Midnight of the first reading's day.
    pub fn first_midnight(&self) -> Option<f64> {
        self.readings.first().map(|r| (r.timestamp / DAY).floor() * DAY)
    }
}

/// Sensor column of the Intel-Lab text format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceField {
    Temperature,
    Humidity,
    Light,
    Voltage,
}

impl TraceField {
    fn column(self) -> usize {
        match self {
            TraceField::Temperature => 4,
            TraceField::Humidity => 5,
            TraceField::Light => 6,
            TraceField::Voltage => 7,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TraceField::Temperature => "temperature",
            TraceField::Humidity => "humidity",
            TraceField::Light => "light",
            TraceField::Voltage => "voltage",
        }
    }
}

impl fmt::Display for TraceField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TraceField {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "temperature" => Ok(TraceField::Temperature),
            "humidity" => Ok(TraceField::Humidity),
            "light" => Ok(TraceField::Light),
            "voltage" => Ok(TraceField::Voltage),
            _ => Err(Error::Config(format!(
                "unknown field '{s}' (expected temperature, humidity, light, voltage)"
            ))),
        }
    }
}

/// Reads an Intel-Lab style whitespace file
/// (`date time epoch moteid temperature humidity light voltage`) or a CSV
/// file with a `timestamp,node,value` header.
pub fn parse_trace(path: impl AsRef<Path>, field: TraceField) -> Result<MeasurementTrace> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_trace_str(&text, field, &path.display().to_string())
}

pub fn parse_trace_str(text: &str, field: TraceField, source: &str) -> Result<MeasurementTrace> {
    let first = text.lines().find(|l| !l.trim().is_empty());
    let Some(first) = first else {
        return Err(Error::Trace(format!("{source}: trace is empty")));
    };
    let (readings, malformed, total) = if first.contains(',') {
        parse_csv(text)?
    } else {
        parse_intel_lab(text, field)
    };
    if total == 0 || malformed * 2 > total {
        return Err(Error::Trace(format!(
            "{source}: {malformed} of {total} lines are malformed"
        )));
    }
    if malformed > 0 {
        log::warn!("{source}: skipped {malformed} malformed lines");
    }
    let field_name = if first.contains(',') { "value" } else { field.as_str() };
    let mut trace = MeasurementTrace::new(readings, source, field_name);
    trace.metadata.malformed = malformed;
    Ok(trace)
}

fn parse_intel_lab(text: &str, field: TraceField) -> (Vec<Reading>, usize, usize) {
    let mut readings = Vec::new();
    let (mut malformed, mut total) = (0, 0);
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        total += 1;
        match parse_intel_line(line, field) {
            Some(r) => readings.push(r),
            None => malformed += 1,
        }
    }
    (readings, malformed, total)
}

fn parse_intel_line(line: &str, field: TraceField) -> Option<Reading> {
    let cols: Vec<&str> = line.split_whitespace().collect();
    if cols.len() <= field.column() {
        return None;
    }
    let stamp = format!("{} {}", cols[0], cols[1]);
    let time = NaiveDateTime::parse_from_str(&stamp, "%Y-%m-%d %H:%M:%S%.f").ok()?;
    let utc = time.and_utc();
    let timestamp = utc.timestamp() as f64 + f64::from(utc.timestamp_subsec_nanos()) * 1e-9;
    let node = cols[3].parse().ok()?;
    let value: f64 = cols[field.column()].parse().ok()?;
    value.is_finite().then_some(Reading { timestamp, node, value })
}

fn parse_csv(text: &str) -> Result<(Vec<Reading>, usize, usize)> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).flexible(true).from_reader(text.as_bytes());
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::Trace(format!("CSV trace lacks a '{name}' column")))
    };
    let (t, n, v) = (col("timestamp")?, col("node")?, col("value")?);
    let mut readings = Vec::new();
    let (mut malformed, mut total) = (0, 0);
    for record in rdr.records() {
        total += 1;
        let parsed = record.ok().and_then(|r| {
            Some(Reading {
                timestamp: r.get(t)?.parse().ok()?,
                node: r.get(n)?.parse().ok()?,
                value: r.get(v)?.parse::<f64>().ok().filter(|x| x.is_finite())?,
            })
        });
        match parsed {
            Some(r) => readings.push(r),
            None => malformed += 1,
        }
    }
    Ok((readings, malformed, total))
}

/// One value (or nothing) per node per window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResampledSeries {
    pub window: f64,
    pub start: f64,
    pub windows: usize,
    pub nodes: Vec<u32>,
    /// `values[node_index][window]`
    pub values: Vec<Vec<Option<f64>>>,
}

impl ResampledSeries {
    pub fn coverage(&self, node_index: usize) -> f64 {
        let present = self.values[node_index].iter().filter(|v| v.is_some()).count();
        present as f64 / self.windows as f64
    }

    fn hour_of(&self, w: usize) -> usize {
        (w as f64 * self.window / HOUR).floor() as usize
    }

    fn hours(&self) -> usize {
        if self.windows == 0 {
            0
        } else {
            self.hour_of(self.windows - 1) + 1
        }
    }
}

/// Picks one reading per node in each `window`-second interval of a
/// `days`-long slice starting at `start` (midnight of the first reading by
/// default). Windows without readings borrow the reading closest to the
/// window centre within the same hour, or stay missing.
pub fn resample(
    trace: &MeasurementTrace,
    window: f64,
    days: u32,
    start: Option<f64>,
    seed: u64,
) -> Result<ResampledSeries> {
    if !(window > 0.0 && window.is_finite()) {
        return domain(format!("window must be > 0 seconds, got {window}"));
    }
    if days == 0 {
        return domain("resampling needs at least one day");
    }
    let Some(start) = start.or_else(|| trace.first_midnight()) else {
        return Err(Error::Trace("cannot resample an empty trace".into()));
    };
    let windows = (f64::from(days) * DAY / window).round() as usize;
    let nodes: Vec<u32> = trace.nodes().into_iter().collect();
    let mut per_node: BTreeMap<u32, Vec<(f64, f64)>> = BTreeMap::new();
    for r in &trace.readings {
        per_node.entry(r.node).or_default().push((r.timestamp, r.value));
    }

    let values = nodes
        .iter()
        .map(|node| {
            let series = &per_node[node];
            // one stream per node keeps picks independent of the node set
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(u64::from(*node));
            let first_at = |t: f64| series.partition_point(|(ts, _)| *ts < t);
            (0..windows)
                .map(|w| {
                    let lo_t = start + w as f64 * window;
                    let (lo, hi) = (first_at(lo_t), first_at(lo_t + window));
                    if hi > lo {
                        return Some(series[rng.random_range(lo..hi)].1);
                    }
                    let hour = ((w as f64 * window) / HOUR).floor();
                    let (h_lo, h_hi) = (first_at(start + hour * HOUR), first_at(start + (hour + 1.0) * HOUR));
                    let centre = lo_t + window / 2.0;
                    series[h_lo..h_hi]
                        .iter()
                        .min_by(|a, b| (a.0 - centre).abs().total_cmp(&(b.0 - centre).abs()))
                        .map(|r| r.1)
                })
                .collect()
        })
        .collect();

    Ok(ResampledSeries {
        window,
        start,
        windows,
        nodes,
        values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HourStat {
    pub count: usize,
    pub mean: Option<f64>,
    /// Sample standard deviation; `None` with fewer than two values.
    pub std: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HourlyStats {
    /// `hours[node_index][hour]`, hours counted from the series start.
    pub hours: Vec<Vec<HourStat>>,
}

impl HourlyStats {
    pub fn get(&self, node_index: usize, hour: usize) -> Option<&HourStat> {
        self.hours.get(node_index)?.get(hour)
    }
}

pub fn hourly_stats(series: &ResampledSeries) -> Result<HourlyStats> {
    if series.windows == 0 || series.nodes.is_empty() {
        return Err(Error::Trace("no resampled values to summarize".into()));
    }
    let hours = series
        .values
        .iter()
        .map(|vals| {
            let mut buckets = vec![Vec::new(); series.hours()];
            for (w, v) in vals.iter().enumerate() {
                if let Some(v) = v {
                    buckets[series.hour_of(w)].push(*v);
                }
            }
            buckets.iter().map(|b| summarize(b)).collect()
        })
        .collect();
    Ok(HourlyStats { hours })
}

fn summarize(values: &[f64]) -> HourStat {
    let n = values.len();
    if n == 0 {
        return HourStat { count: 0, mean: None, std: None };
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let std = (n >= 2).then(|| {
        let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
        (ss / (n - 1) as f64).sqrt()
    });
    HourStat { count: n, mean: Some(mean), std }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpsCount {
    pub accuracy: f64,
    /// Windows in which at least one node's reading left its acceptance band.
    pub transmissions: u64,
    /// Percentage of the counted windows.
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DpsCounts {
    /// Every node sends every window, no aggregation.
    pub no_dps_baseline: u64,
    /// One aggregated packet per window.
    pub aggregation_baseline: u64,
    /// Windows where no node had a usable reading and hour statistics.
    pub excluded_windows: u64,
    pub rows: Vec<DpsCount>,
}

/// Counts root uplinks per accuracy level. A node takes part in a window
/// when it has a reading there and its hour has a standard deviation; the
/// prediction is the node-hour mean.
pub fn count_dps_transmissions(series: &ResampledSeries, stats: &HourlyStats, accuracy: &[f64]) -> Result<DpsCounts> {
    if stats.hours.len() != series.nodes.len() {
        return Err(Error::Dimension {
            expected: series.nodes.len(),
            got: stats.hours.len(),
        });
    }
    if let Some(a) = accuracy.iter().find(|a| !(0.0..=1.0).contains(*a)) {
        return domain(format!("accuracy must lie in [0, 1], got {a}"));
    }
    // (|deviation|, σ) of each usable reading, per window
    let mut usable: Vec<Vec<(f64, f64)>> = vec![Vec::new(); series.windows];
    for (i, vals) in series.values.iter().enumerate() {
        for (w, v) in vals.iter().enumerate() {
            let Some(v) = v else { continue };
            let Some(stat) = stats.get(i, series.hour_of(w)) else { continue };
            if let (Some(mean), Some(std)) = (stat.mean, stat.std) {
                usable[w].push(((v - mean).abs(), std));
            }
        }
    }
    let excluded = usable.iter().filter(|u| u.is_empty()).count() as u64;
    let counted = series.windows as u64 - excluded;

    let rows = accuracy
        .iter()
        .map(|&alpha| {
            let mut sent = 0u64;
            for window in &usable {
                let mut any = false;
                for &(dev, std) in window {
                    let eps = if alpha >= 1.0 { f64::INFINITY } else { threshold_from_accuracy(alpha, std)? };
                    if dev > eps {
                        any = true;
                        break;
                    }
                }
                sent += u64::from(any);
            }
            let percent = if counted == 0 { 0.0 } else { 100.0 * sent as f64 / counted as f64 };
            Ok(DpsCount {
                accuracy: alpha,
                transmissions: sent,
                percent,
            })
        })
        .collect::<Result<_>>()?;

    Ok(DpsCounts {
        no_dps_baseline: (series.nodes.len() * series.windows) as u64,
        aggregation_baseline: series.windows as u64,
        excluded_windows: excluded,
        rows,
    })
}

/// Pearson correlations between every node pair over windows where both
/// have a value.
pub fn pairwise_correlation(series: &ResampledSeries) -> Result<CorrelationMatrix> {
    let n = series.nodes.len();
    let mut rows = vec![vec![0.0; n]; n];
    for i in 0..n {
        rows[i][i] = 1.0;
        for j in i + 1..n {
            let pairs: Vec<(f64, f64)> = series.values[i]
                .iter()
                .zip(&series.values[j])
                .filter_map(|(a, b)| Some(((*a)?, (*b)?)))
                .collect();
            let r = pearson(&pairs).ok_or_else(|| {
                Error::Trace(format!(
                    "nodes {} and {} lack enough overlapping, non-constant values",
                    series.nodes[i], series.nodes[j]
                ))
            })?;
            rows[i][j] = r;
            rows[j][i] = r;
        }
    }
    CorrelationMatrix::from_rows(&rows)
}

fn pearson(pairs: &[(f64, f64)]) -> Option<f64> {
    if pairs.len() < 3 {
        return None;
    }
    let k = pairs.len() as f64;
    let (mx, my) = pairs.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (mx / k, my / k);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in pairs {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx).powi(2);
        syy += (y - my).powi(2);
    }
    (sxx > 0.0 && syy > 0.0).then(|| (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationRow {
    pub accuracy: f64,
    pub real_percent: f64,
    pub model_percent: f64,
    /// `real_percent - model_percent`
    pub difference: f64,
    pub model_stderr_percent: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationOptions {
    pub window: f64,
    pub days: u32,
    pub start: Option<f64>,
    pub seed: u64,
    pub samples: u64,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self {
            window: 300.0,
            days: 8,
            start: None,
            seed: 0,
            samples: crate::correlation::DEFAULT_SAMPLES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub nodes: Vec<u32>,
    pub average_correlation: f64,
    pub counts: DpsCounts,
    pub table: Vec<ValidationRow>,
}

/// Full pipeline: resample, hour statistics, counting, Fisher-averaged
/// correlation and the model column for the same node count.
pub fn validate_trace(trace: &MeasurementTrace, accuracy: &[f64], opts: ValidationOptions) -> Result<ValidationReport> {
    if trace.is_empty() {
        return Err(Error::Trace("trace has no readings".into()));
    }
    let series = resample(trace, opts.window, opts.days, opts.start, opts.seed)?;
    let stats = hourly_stats(&series)?;
    let counts = count_dps_transmissions(&series, &stats, accuracy)?;
    let rho = if series.nodes.len() >= 2 {
        average_correlation(&pairwise_correlation(&series)?)?
    } else {
        0.0
    };
    // the model only covers non-negative equicorrelation
    let model_rho = rho.max(0.0);
    let mvn = MvnOptions::new(opts.samples, opts.seed);
    let table = counts
        .rows
        .iter()
        .map(|row| {
            let p = prob_no_transmission(series.nodes.len(), row.accuracy, model_rho, mvn)?;
            let model = 100.0 * (1.0 - p.p);
            Ok(ValidationRow {
                accuracy: row.accuracy,
                real_percent: row.percent,
                model_percent: model,
                difference: row.percent - model,
                model_stderr_percent: 100.0 * p.stderr,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ValidationReport {
        nodes: series.nodes,
        average_correlation: rho,
        counts,
        table,
    })
}
