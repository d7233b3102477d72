use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use ppuf_core::encoding::is_more_significant;
use ppuf_core::metrics::{bit_aliasing_profile, Summary};
use ppuf_core::{build_interpretation, reliability, uniformity, uniqueness, ResponseSet};
use rayon::prelude::*;

use super::{check_compatible, classify, display, load_all, InterpretationSel, Loaded};
use crate::error::{CliError, CliResult};
use crate::report::{Record, Report};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Metric {
    Uniqueness,
    Uniformity,
    BitAliasing,
    Reliability,
}

impl Metric {
    fn name(self) -> &'static str {
        match self {
            Metric::Uniqueness => "uniqueness",
            Metric::Uniformity => "uniformity",
            Metric::BitAliasing => "bit-aliasing",
            Metric::Reliability => "reliability",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct MetricsArgs {
    /// Dataset files, all on the same grid.
    #[arg(required = true)]
    pub files: Vec<PathBuf>,

    #[arg(long, value_enum)]
    pub metric: Metric,

    /// Interpretation(s) to evaluate as `<1|2>:<0..23>`; all 48 if omitted.
    #[arg(long = "interpretation")]
    pub interpretations: Vec<InterpretationSel>,

    /// Report file; stdout if omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

fn significance(bit: usize) -> &'static str {
    if is_more_significant(bit) {
        "more"
    } else {
        "less"
    }
}

fn base(name: &str, sel: InterpretationSel) -> Record {
    Record::new("metric")
        .field("name", name)
        .field("output", sel.output)
        .field("bit", sel.bit)
        .field("significance", significance(sel.bit))
}

/// Values tagged by bit index, summarised over all, more- and
/// less-significant interpretations.
fn push_group_summaries(report: &mut Report, head: Record, values: &[(usize, f64)]) {
    for group in ["all", "more", "less"] {
        let picked: Vec<f64> = values
            .iter()
            .filter(|(b, _)| group == "all" || significance(*b) == group)
            .map(|&(_, v)| v)
            .collect();
        if let Some(s) = Summary::of(&picked) {
            report.push(head.clone().field("group", group).summary(&s));
        }
    }
}

fn summary_head(name: &str, scope: &str) -> Record {
    Record::new("summary").field("name", name).field("scope", scope)
}

fn responses(set: &Loaded, sel: InterpretationSel) -> CliResult<ResponseSet> {
    build_interpretation(&set.data, sel.output, sel.bit)
        .map(|i| i.responses)
        .map_err(classify)
}

pub fn run(args: &MetricsArgs) -> CliResult<Report> {
    let sets = load_all(&args.files)?;
    check_compatible(&sets)?;
    let sels = if args.interpretations.is_empty() {
        InterpretationSel::all()
    } else {
        args.interpretations.clone()
    };
    let first = &sets[0].header;
    let name = args.metric.name();
    let mut report = Report::new();
    report.comment(format!("metric={name}"));
    report.comment(format!("files={}", sets.len()));
    report.comment(format!("cells={} records={}", first.cells, first.records));
    for s in &sets {
        report.comment(format!(
            "file={} puf_seed={} repeat={}",
            display(&s.path),
            s.header.puf_seed,
            s.header.repeat
        ));
    }

    match args.metric {
        Metric::Uniqueness => {
            if sets.len() < 2 {
                return Err(CliError::usage("uniqueness needs at least two dataset files"));
            }
            let values = sels
                .par_iter()
                .map(|&sel| -> CliResult<f64> {
                    let rs = sets.iter().map(|s| responses(s, sel)).collect::<CliResult<Vec<_>>>()?;
                    uniqueness(&rs.iter().collect::<Vec<_>>()).map_err(classify)
                })
                .collect::<CliResult<Vec<_>>>()?;
            for (&sel, &v) in sels.iter().zip(&values) {
                report.push(base(name, sel).field("k", sets.len()).field("value", v));
            }
            let tagged: Vec<_> = sels.iter().map(|s| s.bit).zip(values).collect();
            push_group_summaries(&mut report, summary_head(name, "cross-puf"), &tagged);
        }
        Metric::Uniformity => {
            let per_file = sets
                .par_iter()
                .map(|set| -> CliResult<Vec<f64>> {
                    sels.iter()
                        .map(|&sel| uniformity(&responses(set, sel)?).map_err(classify))
                        .collect()
                })
                .collect::<CliResult<Vec<_>>>()?;
            let mut everything = Vec::new();
            for (set, values) in sets.iter().zip(&per_file) {
                for (&sel, &v) in sels.iter().zip(values) {
                    report.push(
                        base(name, sel)
                            .field("puf_seed", set.header.puf_seed)
                            .field("repeat", set.header.repeat)
                            .field("value", v),
                    );
                    everything.push((sel.bit, v));
                }
            }
            for (set, values) in sets.iter().zip(&per_file) {
                let tagged: Vec<_> = sels.iter().map(|s| s.bit).zip(values.iter().copied()).collect();
                let head = summary_head(name, "puf")
                    .field("puf_seed", set.header.puf_seed)
                    .field("repeat", set.header.repeat);
                push_group_summaries(&mut report, head, &tagged);
            }
            push_group_summaries(&mut report, summary_head(name, "all"), &everything);
        }
        Metric::BitAliasing => {
            let profiles = sels
                .par_iter()
                .map(|&sel| -> CliResult<Vec<f64>> {
                    let rs = sets.iter().map(|s| responses(s, sel)).collect::<CliResult<Vec<_>>>()?;
                    bit_aliasing_profile(&rs.iter().collect::<Vec<_>>()).map_err(classify)
                })
                .collect::<CliResult<Vec<_>>>()?;
            for (&sel, profile) in sels.iter().zip(&profiles) {
                for (pos, &v) in profile.iter().enumerate() {
                    report.push(
                        base(name, sel)
                            .field("position", pos)
                            .field("k", sets.len())
                            .field("value", v),
                    );
                }
            }
            for (&sel, profile) in sels.iter().zip(&profiles) {
                let s = Summary::of(profile).expect("at least one cell");
                report.push(
                    summary_head(name, "interpretation")
                        .field("output", sel.output)
                        .field("bit", sel.bit)
                        .field("significance", significance(sel.bit))
                        .summary(&s),
                );
            }
            let everything: Vec<_> = sels
                .iter()
                .zip(&profiles)
                .flat_map(|(s, p)| p.iter().map(move |&v| (s.bit, v)))
                .collect();
            push_group_summaries(&mut report, summary_head(name, "all"), &everything);
        }
        Metric::Reliability => {
            let mut groups: BTreeMap<u64, Vec<&Loaded>> = BTreeMap::new();
            for s in &sets {
                groups.entry(s.header.puf_seed).or_default().push(s);
            }
            let groups: Vec<(u64, Vec<&Loaded>)> = groups
                .into_iter()
                .map(|(seed, mut g)| {
                    g.sort_by_key(|s| s.header.repeat);
                    (seed, g)
                })
                .filter(|(_, g)| g.len() >= 2)
                .collect();
            if groups.is_empty() {
                return Err(CliError::data(
                    "reliability needs a baseline and at least one repeat of the same PUF",
                ));
            }
            let mut everything = Vec::new();
            for (seed, group) in &groups {
                let values = sels
                    .par_iter()
                    .map(|&sel| -> CliResult<f64> {
                        let baseline = responses(group[0], sel)?;
                        let repeats = group[1..].iter().map(|s| responses(s, sel)).collect::<CliResult<Vec<_>>>()?;
                        reliability(&baseline, &repeats.iter().collect::<Vec<_>>()).map_err(classify)
                    })
                    .collect::<CliResult<Vec<_>>>()?;
                for (&sel, &v) in sels.iter().zip(&values) {
                    report.push(
                        base(name, sel)
                            .field("puf_seed", seed)
                            .field("baseline_repeat", group[0].header.repeat)
                            .field("repeats", group.len() - 1)
                            .field("value", v),
                    );
                    everything.push((sel.bit, v));
                }
            }
            push_group_summaries(&mut report, summary_head(name, "all"), &everything);
        }
    }
    Ok(report)
}
