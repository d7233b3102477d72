use std::path::PathBuf;

use clap::Args;
use ppuf_core::attack::{crps_from_interpretation, shuffle_responses, Z_99_ONE_SIDED};
use ppuf_core::{build_interpretation, susceptibility_sweep, AttackConfig, FeatureMode};

use super::{classify, display, load_all, InterpretationSel};
use crate::error::{CliError, CliResult};
use crate::report::{Record, Report};

#[derive(Debug, Clone, Args)]
pub struct AttackArgs {
    pub file: PathBuf,

    #[arg(long)]
    pub interpretation: InterpretationSel,

    /// Comma-separated training-set sizes.
    #[arg(long, value_delimiter = ',', default_values_t = AttackConfig::default().train_sizes)]
    pub train_sizes: Vec<usize>,

    #[arg(long, default_value_t = AttackConfig::default().holdout)]
    pub holdout: usize,

    /// Seed for the data split, initialization and batch order.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, default_value_t = AttackConfig::default().epochs)]
    pub epochs: usize,

    /// Comma-separated hidden layer widths.
    #[arg(long, value_delimiter = ',', default_values_t = AttackConfig::default().hidden)]
    pub hidden: Vec<usize>,

    #[arg(long, default_value_t = AttackConfig::default().learning_rate)]
    pub learning_rate: f64,

    #[arg(long, default_value_t = AttackConfig::default().batch_size)]
    pub batch_size: usize,

    /// Challenge features: `bits` (24 encoded bits) or `observables`.
    #[arg(long, default_value_t = FeatureMode::Bits)]
    pub features: FeatureMode,

    /// Permute responses against challenges with this seed first (an
    /// unlearnable control).
    #[arg(long)]
    pub shuffle_responses: Option<u64>,

    /// Result file; stdout if omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

impl AttackArgs {
    pub fn config(&self) -> AttackConfig {
        AttackConfig {
            hidden: self.hidden.clone(),
            learning_rate: self.learning_rate,
            batch_size: self.batch_size,
            epochs: self.epochs,
            train_sizes: self.train_sizes.clone(),
            holdout: self.holdout,
            seed: self.seed,
            features: self.features,
        }
    }
}

pub fn run(args: &AttackArgs) -> CliResult<Report> {
    let set = load_all(std::slice::from_ref(&args.file))?.remove(0);
    let sel = args.interpretation;
    let cfg = args.config();
    let interp = build_interpretation(&set.data, sel.output, sel.bit).map_err(classify)?;
    let mut crps = crps_from_interpretation(&set.data, &interp).map_err(classify)?;
    if let Some(s) = args.shuffle_responses {
        crps = shuffle_responses(&crps, s);
    }
    let width = interp.responses.width();
    let result = susceptibility_sweep(&crps, width, &cfg).map_err(|e| match e {
        ppuf_core::Error::Divergence { .. } => CliError::from_data(e),
        other => classify(other),
    })?;

    let mut report = Report::new();
    report.comment(format!(
        "file={} puf_seed={} interpretation={sel}",
        display(&set.path),
        set.header.puf_seed
    ));
    report.comment(format!(
        "hidden={:?} learning_rate={} batch_size={} epochs={} seed={} features={} shuffle_responses={}",
        cfg.hidden,
        cfg.learning_rate,
        cfg.batch_size,
        cfg.epochs,
        cfg.seed,
        cfg.features,
        args.shuffle_responses.map_or("none".to_string(), |s| s.to_string())
    ));
    report.comment(format!(
        "chance test: one-sided Wilson lower bound at records x width / design_effect trials, z={Z_99_ONE_SIDED}"
    ));
    for p in &result.points {
        report.push(
            Record::new("point")
                .field("train_size", p.train_size)
                .field("accuracy", p.accuracy)
                .field("design_effect", p.design_effect)
                .field("lower_bound", p.lower_bound)
                .field("beats_chance", p.beats_chance)
                .field("reaches_target", p.reaches_target),
        );
    }
    report.push(
        Record::new("result")
            .field("output", sel.output)
            .field("bit", sel.bit)
            .field("response_width", result.response_width)
            .field("holdout", result.holdout)
            .opt_field("n_chance", result.n_chance)
            .opt_field("n_65", result.n_65),
    );
    Ok(report)
}
