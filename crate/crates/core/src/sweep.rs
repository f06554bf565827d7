//! Parameter sweeps, simulator runs and trace validation as table-producing
//! commands. Rows are plot-ready long format; every numeric column name
//! carries its unit.

use std::io::Write;
use std::path::{Path, PathBuf};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correlation::{aggregated_rx, aggregated_tx, ceil_count, CorrelationSpec, Expectation, MvnOptions, DEFAULT_SAMPLES};
use crate::energy::{transmission_energy, EnergyParams};
use crate::error::{domain, Error, Result};
use crate::prediction::DpsConfig;
use crate::simulator::{analytical_expectations, build_tree, compare_with_model, generate_measurements, run, Scheme};
use crate::topology::SubtreeTable;
use crate::traffic::{baseline_node_traffic, dissemination_traffic, DisseminationMode, TrafficReport};
use crate::validation::{
    parse_trace, validate_trace, TraceField, ValidationOptions, ValidationReport, DEFAULT_ACCURACY_LEVELS,
    INTEL_LAB_NODES,
};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Grid and settings shared by `sweep` and `simulate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub neighbors: Vec<u32>,
    pub rings: Vec<u32>,
    pub accuracy: Vec<f64>,
    pub rho: Vec<f64>,
    /// Measurements per second.
    pub f: f64,
    /// Seconds between prediction-model choices.
    pub period: f64,
    pub mode: DisseminationMode,
    pub schemes: Vec<Scheme>,
    pub seed: u64,
    /// Monte Carlo samples per multivariate-normal probability.
    pub samples: u64,
    /// Adds simulator columns to sweep rows.
    pub simulate: bool,
    pub energy: EnergyParams,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        let mut rho: Vec<f64> = (1..=9).map(|i| f64::from(i) / 10.0).collect();
        rho.push(0.95);
        Self {
            neighbors: vec![3],
            rings: (1..=10).collect(),
            accuracy: vec![0.5, 0.7, 0.9, 0.95],
            rho,
            f: 1.0 / 60.0,
            period: 3.0 * 86_400.0,
            mode: DisseminationMode::GwUnicast,
            schemes: Scheme::ALL.to_vec(),
            seed: 0,
            samples: DEFAULT_SAMPLES,
            simulate: false,
            energy: EnergyParams::default(),
            format: OutputFormat::Csv,
            out: None,
        }
    }
}

impl SweepSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Checks every grid value before anything is computed.
    pub fn validate(&self) -> Result<()> {
        let grids = [
            ("neighbors", self.neighbors.is_empty()),
            ("rings", self.rings.is_empty()),
            ("accuracy", self.accuracy.is_empty()),
            ("rho", self.rho.is_empty()),
            ("schemes", self.schemes.is_empty()),
        ];
        if let Some((name, _)) = grids.iter().find(|(_, empty)| *empty) {
            return Err(Error::Config(format!("grid '{name}' is empty")));
        }
        if self.neighbors.contains(&0) {
            return Err(Error::Config("neighbors must be >= 1".into()));
        }
        if self.rings.contains(&0) {
            return Err(Error::Config("rings must be >= 1".into()));
        }
        if let Some(a) = self.accuracy.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return Err(Error::Config(format!("accuracy {a} outside [0, 1]")));
        }
        if let Some(r) = self.rho.iter().find(|r| !(0.0..=1.0).contains(*r)) {
            return Err(Error::Config(format!("rho {r} outside [0, 1]")));
        }
        if !(self.f > 0.0 && self.f.is_finite() && self.period > 0.0 && self.period.is_finite()) {
            return Err(Error::Config(format!(
                "f and period must be > 0, got f={}, period={}",
                self.f, self.period
            )));
        }
        if self.f * self.period < 1.0 {
            return Err(Error::Config(format!(
                "f * period = {} holds no complete measurement",
                self.f * self.period
            )));
        }
        if self.samples == 0 {
            return Err(Error::Config("samples must be >= 1".into()));
        }
        self.energy.validate().map_err(|e| Error::Config(e.to_string()))
    }

    fn points(&self) -> Vec<Point> {
        let mut points = Vec::new();
        for &neighbors in &self.neighbors {
            for &rings in &self.rings {
                for &accuracy in &self.accuracy {
                    for &rho in &self.rho {
                        points.push(Point {
                            index: points.len() as u64,
                            neighbors,
                            rings,
                            accuracy,
                            rho,
                        });
                    }
                }
            }
        }
        points
    }
}

#[derive(Debug, Clone, Copy)]
struct Point {
    index: u64,
    neighbors: u32,
    rings: u32,
    accuracy: f64,
    rho: f64,
}

/// Independent seed for grid point `index`.
pub fn point_seed(master: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng.next_u64()
}

/// Expected data packets (dissemination excluded) of a ring-`d` node over
/// one period, with the Monte Carlo error of the total.
#[allow(clippy::too_many_arguments)]
pub fn data_traffic(
    scheme: Scheme,
    d: u32,
    rings: u32,
    alpha: f64,
    rho: f64,
    f: f64,
    period: f64,
    opts: MvnOptions,
) -> Result<(TrafficReport, f64)> {
    let slots = f * period;
    let table = SubtreeTable::new(rings);
    let k = table.subtree_size(d)?;
    let miss = 1.0 - alpha;
    Ok(match scheme {
        Scheme::None => (baseline_node_traffic(d, rings, f, period)?, 0.0),
        Scheme::PredictionOnly => (TrafficReport::new((1.0 + k) * miss, k * miss) * slots, 0.0),
        Scheme::AggregationOnly => {
            let children = ceil_count(table.child_ratio(d)?) as f64;
            (TrafficReport::new(1.0, children) * slots, 0.0)
        }
        Scheme::PredictionAggregation => {
            let tx: Expectation = aggregated_tx(d, rings, alpha, rho, opts)?;
            let rx = aggregated_rx(d, rings, alpha, rho, opts)?;
            (
                TrafficReport::new(tx.value, rx.value) * slots,
                (tx.stderr + rx.stderr) * slots,
            )
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub neighbors: u32,
    pub rings: u32,
    pub nodes: u64,
    pub accuracy: f64,
    pub rho: f64,
    pub f_hz: f64,
    pub period_s: f64,
    pub mode: DisseminationMode,
    pub scheme: Scheme,
    /// First-ring node, per period, dissemination included.
    pub tx_packets: f64,
    pub rx_packets: f64,
    pub total_packets: f64,
    pub dissemination_packets: f64,
    pub stderr_packets: f64,
    /// Total relative to the same node without prediction or aggregation.
    pub baseline_pct: f64,
    /// Transmissions relative to aggregation alone.
    pub tx_aggregation_pct: f64,
    pub energy_j: f64,
    /// Reduction of radio energy against no prediction and no aggregation.
    pub energy_reduction_pct: f64,
    pub sim_tx_packets: Option<f64>,
    pub sim_rx_packets: Option<f64>,
    pub sim_within_3sigma: Option<bool>,
}

/// Evaluates the first-ring node for every grid point and scheme.
pub fn cmd_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let points = spec.points();
    let per_point: Vec<Vec<SweepRow>> = points
        .par_iter()
        .map(|p| sweep_point(spec, p))
        .collect::<Result<_>>()?;
    Ok(per_point.into_iter().flatten().collect())
}

fn sweep_point(spec: &SweepSpec, p: &Point) -> Result<Vec<SweepRow>> {
    let seed = point_seed(spec.seed, p.index);
    let opts = MvnOptions::new(spec.samples, seed);
    let (d, rings) = (1, p.rings);
    let traffic = |s| data_traffic(s, d, rings, p.accuracy, p.rho, spec.f, spec.period, opts);
    let (none, _) = traffic(Scheme::None)?;
    let (aggregation, _) = traffic(Scheme::AggregationOnly)?;
    let none_energy = transmission_energy(&none, &spec.energy, DisseminationMode::Independent, d, rings, false)?;

    let sim = if spec.simulate {
        Some(simulate_point(spec, p, seed)?)
    } else {
        None
    };

    spec.schemes
        .iter()
        .map(|&scheme| {
            let (data, stderr) = if scheme == Scheme::None {
                (none, 0.0)
            } else if scheme == Scheme::AggregationOnly {
                (aggregation, 0.0)
            } else {
                traffic(scheme)?
            };
            let mode = if scheme.uses_prediction() {
                spec.mode
            } else {
                DisseminationMode::Independent
            };
            let dissemination = dissemination_traffic(mode, d, rings)?;
            let total = data + dissemination;
            let energy = transmission_energy(&data, &spec.energy, mode, d, rings, scheme.aggregates())?;
            let sim_row = sim.as_ref().and_then(|s: &Vec<(Scheme, TrafficReport, bool)>| {
                s.iter().find(|(sc, _, _)| *sc == scheme).copied()
            });
            Ok(SweepRow {
                neighbors: p.neighbors,
                rings,
                nodes: u64::from(p.neighbors) * u64::from(rings) * u64::from(rings),
                accuracy: p.accuracy,
                rho: p.rho,
                f_hz: spec.f,
                period_s: spec.period,
                mode,
                scheme,
                tx_packets: total.tx,
                rx_packets: total.rx,
                total_packets: total.total(),
                dissemination_packets: dissemination.total(),
                stderr_packets: stderr,
                baseline_pct: 100.0 * total.total() / none.total(),
                tx_aggregation_pct: 100.0 * total.tx / aggregation.tx,
                energy_j: energy + spec.energy.en_min,
                energy_reduction_pct: 100.0 * (1.0 - energy / none_energy),
                sim_tx_packets: sim_row.map(|r| r.1.tx),
                sim_rx_packets: sim_row.map(|r| r.1.rx),
                sim_within_3sigma: sim_row.map(|r| r.2),
            })
        })
        .collect()
}

/// First-ring mean counters of one simulated period per scheme.
fn simulate_point(spec: &SweepSpec, p: &Point, seed: u64) -> Result<Vec<(Scheme, TrafficReport, bool)>> {
    let tree = build_tree(p.neighbors, p.rings, seed)?;
    let n = tree.len();
    let trace = generate_measurements(&CorrelationSpec::Rho(p.rho), &vec![0.0; n], &vec![1.0; n], spec.f, spec.period, seed)?;
    let cfg = DpsConfig::uniform(p.accuracy, spec.f, spec.period, spec.mode);
    let opts = MvnOptions::new(spec.samples, seed);
    spec.schemes
        .iter()
        .map(|&scheme| {
            let result = run(scheme, &tree, &trace, &cfg, seed)?;
            let model = analytical_expectations(scheme, &tree, p.accuracy, p.rho, spec.mode, opts)?;
            let cmp = compare_with_model(&result, &model)?;
            let within = cmp.first_ring.tx.within() && cmp.first_ring.rx.within();
            Ok((scheme, result.first_ring_mean(), within))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimRow {
    pub neighbors: u32,
    pub rings: u32,
    pub accuracy: f64,
    pub rho: f64,
    pub scheme: Scheme,
    pub seed: u64,
    pub slots: u64,
    pub node: usize,
    pub ring: u32,
    pub tx_packets: u64,
    pub rx_packets: u64,
    pub expected_tx_packets: f64,
    pub expected_rx_packets: f64,
    pub tolerance_tx_packets: f64,
    pub tolerance_rx_packets: f64,
    pub flagged: bool,
}

/// Simulates every grid point for `f * period` slots and reports each
/// node's counters next to the model expectation.
pub fn cmd_simulate(spec: &SweepSpec) -> Result<Vec<SimRow>> {
    spec.validate()?;
    let per_point: Vec<Vec<SimRow>> = spec
        .points()
        .par_iter()
        .map(|p| {
            let seed = point_seed(spec.seed, p.index);
            let tree = build_tree(p.neighbors, p.rings, seed)?;
            let n = tree.len();
            let trace = generate_measurements(
                &CorrelationSpec::Rho(p.rho),
                &vec![0.0; n],
                &vec![1.0; n],
                spec.f,
                spec.period,
                seed,
            )?;
            let cfg = DpsConfig::uniform(p.accuracy, spec.f, spec.period, spec.mode);
            let opts = MvnOptions::new(spec.samples, seed);
            let mut rows = Vec::new();
            for &scheme in &spec.schemes {
                let result = run(scheme, &tree, &trace, &cfg, seed)?;
                let model = analytical_expectations(scheme, &tree, p.accuracy, p.rho, spec.mode, opts)?;
                let cmp = compare_with_model(&result, &model)?;
                for (c, m) in result.counters.iter().zip(&cmp.nodes) {
                    rows.push(SimRow {
                        neighbors: p.neighbors,
                        rings: p.rings,
                        accuracy: p.accuracy,
                        rho: p.rho,
                        scheme,
                        seed,
                        slots: result.slots,
                        node: c.node,
                        ring: c.ring,
                        tx_packets: c.tx,
                        rx_packets: c.rx,
                        expected_tx_packets: m.tx.expected,
                        expected_rx_packets: m.rx.expected,
                        tolerance_tx_packets: m.tx.tolerance,
                        tolerance_rx_packets: m.rx.tolerance,
                        flagged: m.flagged(),
                    });
                }
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    Ok(per_point.into_iter().flatten().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidateSpec {
    pub trace: PathBuf,
    pub field: TraceField,
    /// Nodes to keep; `None` keeps the nine-node lab subset for Intel-Lab
    /// files and every node otherwise.
    pub nodes: Option<Vec<u32>>,
    pub days: u32,
    /// Slice start in trace seconds; midnight of the first reading if unset.
    pub start: Option<f64>,
    pub window: f64,
    pub seed: u64,
    pub samples: u64,
    pub accuracy: Vec<f64>,
}

impl ValidateSpec {
    pub fn new(trace: impl Into<PathBuf>) -> Self {
        Self {
            trace: trace.into(),
            field: TraceField::Temperature,
            nodes: None,
            days: 8,
            start: None,
            window: 300.0,
            seed: 0,
            samples: DEFAULT_SAMPLES,
            accuracy: DEFAULT_ACCURACY_LEVELS.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationTableRow {
    pub accuracy: f64,
    pub real_pct: f64,
    pub model_pct: f64,
    pub difference_pp: f64,
    pub model_stderr_pp: f64,
}

pub fn cmd_validate(spec: &ValidateSpec) -> Result<ValidationReport> {
    if spec.accuracy.is_empty() {
        return Err(Error::Config("accuracy grid is empty".into()));
    }
    let trace = parse_trace(&spec.trace, spec.field)?;
    let nodes = match &spec.nodes {
        Some(nodes) => nodes.clone(),
        None if trace.metadata.field != "value" => INTEL_LAB_NODES.to_vec(),
        None => trace.nodes().into_iter().collect(),
    };
    let trace = trace.filter_nodes(&nodes);
    if trace.is_empty() {
        return domain(format!("trace holds no readings for nodes {nodes:?}"));
    }
    let opts = ValidationOptions {
        window: spec.window,
        days: spec.days,
        start: spec.start,
        seed: spec.seed,
        samples: spec.samples,
    };
    validate_trace(&trace, &spec.accuracy, opts)
}

pub fn validation_rows(report: &ValidationReport) -> Vec<ValidationTableRow> {
    report
        .table
        .iter()
        .map(|r| ValidationTableRow {
            accuracy: r.accuracy,
            real_pct: r.real_percent,
            model_pct: r.model_percent,
            difference_pp: r.difference,
            model_stderr_pp: r.model_stderr_percent,
        })
        .collect()
}

/// Writes rows as CSV (with header) or a JSON array, to `out` or stdout.
pub fn write_rows<T: Serialize>(rows: &[T], format: OutputFormat, out: Option<&Path>) -> Result<()> {
    let mut sink: Box<dyn Write> = match out {
        Some(path) => Box::new(std::io::BufWriter::new(std::fs::File::create(path)?)),
        None => Box::new(std::io::stdout().lock()),
    };
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(&mut sink);
            for row in rows {
                w.serialize(row)?;
            }
            w.flush()?;
        }
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut sink, rows)?;
            writeln!(sink)?;
        }
    }
    sink.flush()?;
    Ok(())
}
