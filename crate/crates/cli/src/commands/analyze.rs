use std::path::PathBuf;

use clap::{Args, ValueEnum};
use ppuf_core::metrics::response_autocorrelation;
use ppuf_core::{build_interpretation, crp_scatter};

use super::{classify, display, load_all, InterpretationSel};
use crate::error::CliResult;
use crate::report::Report;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Analysis {
    /// `(challenge, response)` integer pairs in challenge order.
    Scatter,
    /// `(lag, acf)` of the responses read as integers.
    Autocorr,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    pub file: PathBuf,

    #[arg(long)]
    pub interpretation: InterpretationSel,

    #[arg(long, value_enum)]
    pub analysis: Analysis,

    #[arg(long, default_value_t = 1000)]
    pub max_lag: usize,

    /// Export file; stdout if omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

pub fn run(args: &AnalyzeArgs) -> CliResult<Report> {
    let set = load_all(std::slice::from_ref(&args.file))?.remove(0);
    let sel = args.interpretation;
    let interp = build_interpretation(&set.data, sel.output, sel.bit).map_err(classify)?;
    let mut report = Report::new();
    report.comment(format!(
        "file={} puf_seed={} interpretation={sel}",
        display(&set.path),
        set.header.puf_seed
    ));
    match args.analysis {
        Analysis::Scatter => {
            let rows = crp_scatter(set.data.challenge_bits(), &interp).map_err(classify)?;
            report.comment("challenge response");
            for (c, r) in rows {
                report.row(c, r);
            }
        }
        Analysis::Autocorr => {
            let acf = response_autocorrelation(&interp, args.max_lag).map_err(classify)?;
            report.comment("lag acf");
            for (lag, v) in acf.iter().enumerate() {
                report.row(lag, format!("{v:?}"));
            }
        }
    }
    Ok(report)
}
