//! Command-line front end. Values come from flags, then the `--config` TOML
//! file, then built-in defaults.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::energy::EnergyParams;
use crate::error::{Error, Result};
use crate::simulator::Scheme;
use crate::sweep::{
    cmd_simulate, cmd_sweep, cmd_validate, validation_rows, write_rows, OutputFormat, SweepSpec, ValidateSpec,
};
use crate::traffic::DisseminationMode;
use crate::validation::TraceField;

#[derive(Debug, Parser)]
#[command(name = "wsn-dps", version, about = "Traffic and energy model for prediction plus aggregation in ring sensor networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the analytical model over a parameter grid.
    Sweep(SweepArgs),
    /// Run the slot simulator and compare every node with the model.
    Simulate(GridArgs),
    /// Reproduce the transmission table from a sensor trace.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    /// Add simulator columns (one simulated period per grid point).
    #[arg(long)]
    pub simulate: bool,
}

#[derive(Debug, Args, Default)]
pub struct GridArgs {
    /// TOML file with any SweepSpec field.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Neighbor density C grid.
    #[arg(long, value_delimiter = ',')]
    pub neighbors: Option<Vec<u32>>,
    /// Ring count D grid.
    #[arg(long, value_delimiter = ',')]
    pub rings: Option<Vec<u32>>,
    /// Average prediction accuracy grid.
    #[arg(long, value_delimiter = ',')]
    pub accuracy: Option<Vec<f64>>,
    /// Equicorrelation grid.
    #[arg(long, value_delimiter = ',')]
    pub rho: Option<Vec<f64>>,
    /// Measurements per second.
    #[arg(long)]
    pub f: Option<f64>,
    /// Seconds between prediction-model choices.
    #[arg(long)]
    pub period: Option<f64>,
    /// independent, gw-unicast, sensor-chosen, gw-unicast-aggregated or gw-broadcast.
    #[arg(long)]
    pub mode: Option<DisseminationMode>,
    /// none, prediction-only, aggregation-only, prediction+aggregation.
    #[arg(long, value_delimiter = ',')]
    pub schemes: Option<Vec<Scheme>>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Monte Carlo samples per multivariate-normal probability.
    #[arg(long)]
    pub samples: Option<u64>,
    /// Joules per transmitted packet.
    #[arg(long)]
    pub en_tx: Option<f64>,
    /// Joules per received packet.
    #[arg(long)]
    pub en_rx: Option<f64>,
    /// Joules of baseline consumption per period.
    #[arg(long)]
    pub en_min: Option<f64>,
    /// Cost multiplier for aggregated packets.
    #[arg(long)]
    pub payload_scale: Option<f64>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl GridArgs {
    pub fn to_spec(&self) -> Result<SweepSpec> {
        let mut spec = match &self.config {
            Some(path) => SweepSpec::from_toml(&std::fs::read_to_string(path)?)?,
            None => SweepSpec::default(),
        };
        fn set<T: Clone>(dst: &mut T, src: &Option<T>) {
            if let Some(v) = src {
                *dst = v.clone();
            }
        }
        set(&mut spec.neighbors, &self.neighbors);
        set(&mut spec.rings, &self.rings);
        set(&mut spec.accuracy, &self.accuracy);
        set(&mut spec.rho, &self.rho);
        set(&mut spec.f, &self.f);
        set(&mut spec.period, &self.period);
        set(&mut spec.mode, &self.mode);
        set(&mut spec.schemes, &self.schemes);
        set(&mut spec.seed, &self.seed);
        set(&mut spec.samples, &self.samples);
        set(&mut spec.format, &self.format);
        let EnergyParams {
            en_tx,
            en_rx,
            en_min,
            payload_scale,
        } = &mut spec.energy;
        set(en_tx, &self.en_tx);
        set(en_rx, &self.en_rx);
        set(en_min, &self.en_min);
        set(payload_scale, &self.payload_scale);
        if self.out.is_some() {
            spec.out = self.out.clone();
        }
        Ok(spec)
    }
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Intel-Lab text file or CSV with timestamp,node,value columns.
    pub trace: PathBuf,
    #[arg(long, default_value = "temperature")]
    pub field: TraceField,
    /// Nodes to keep; defaults to the nine-node lab subset for Intel-Lab files.
    #[arg(long, value_delimiter = ',')]
    pub nodes: Option<Vec<u32>>,
    #[arg(long, default_value_t = 8)]
    pub days: u32,
    /// Slice start, trace seconds; defaults to midnight of the first reading.
    #[arg(long)]
    pub start: Option<f64>,
    /// Resampling window in seconds.
    #[arg(long, default_value_t = 300.0)]
    pub window: f64,
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.6,0.7,0.8,0.9,0.95")]
    pub accuracy: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = crate::correlation::DEFAULT_SAMPLES)]
    pub samples: u64,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: OutputFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sweep(args) => {
            let mut spec = args.grid.to_spec()?;
            spec.simulate |= args.simulate;
            let rows = cmd_sweep(&spec)?;
            write_rows(&rows, spec.format, spec.out.as_deref())
        }
        Command::Simulate(args) => {
            let spec = args.to_spec()?;
            let rows = cmd_simulate(&spec)?;
            let flagged = rows.iter().filter(|r| r.flagged).count();
            if flagged > 0 {
                log::warn!("{flagged} node counters fall outside their 3-sigma band");
            }
            write_rows(&rows, spec.format, spec.out.as_deref())
        }
        Command::Validate(args) => {
            if args.accuracy.is_empty() {
                return Err(Error::Config("accuracy grid is empty".into()));
            }
            let spec = ValidateSpec {
                trace: args.trace,
                field: args.field,
                nodes: args.nodes,
                days: args.days,
                start: args.start,
                window: args.window,
                seed: args.seed,
                samples: args.samples,
                accuracy: args.accuracy,
            };
            let report = cmd_validate(&spec)?;
            log::info!(
                "nodes {:?}, average correlation {:.6}, baselines {} / {}, excluded windows {}",
                report.nodes,
                report.average_correlation,
                report.counts.no_dps_baseline,
                report.counts.aggregation_baseline,
                report.counts.excluded_windows
            );
            write_rows(&validation_rows(&report), args.format, args.out.as_deref())
        }
    }
}
