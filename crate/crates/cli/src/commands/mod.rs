pub mod analyze;
pub mod attack;
pub mod generate;
pub mod metrics;

use std::path::{Path, PathBuf};
use std::str::FromStr;

use ppuf_core::encoding::BITS;
use ppuf_core::{CrpDataset, Output};
use rayon::prelude::*;

use crate::error::{CliError, CliResult};
use crate::format::{read_dataset, DatasetHeader};

/// An `<output>:<bit>` selector such as `1:6`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct InterpretationSel {
    pub output: Output,
    pub bit: usize,
}

impl InterpretationSel {
    /// All 48 selectors, Output 1 first.
    pub fn all() -> Vec<Self> {
        Output::ALL
            .iter()
            .flat_map(|&output| (0..BITS).map(move |bit| Self { output, bit }))
            .collect()
    }
}

impl FromStr for InterpretationSel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (o, b) = s
            .split_once(':')
            .ok_or_else(|| format!("{s:?} is not of the form <1|2>:<0..23>"))?;
        let output = o.parse::<Output>().map_err(|e| e.to_string())?;
        let bit = b
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&b| b < BITS)
            .ok_or_else(|| format!("bit index {b:?} is not in 0..=23"))?;
        Ok(Self { output, bit })
    }
}

impl std::fmt::Display for InterpretationSel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.output, self.bit)
    }
}

pub(crate) struct Loaded {
    pub path: PathBuf,
    pub header: DatasetHeader,
    pub data: CrpDataset,
}

/// Read every file, failing on the first unreadable one in argument order.
pub(crate) fn load_all(paths: &[PathBuf]) -> CliResult<Vec<Loaded>> {
    if paths.is_empty() {
        return Err(CliError::usage("no dataset files given"));
    }
    paths
        .par_iter()
        .map(|p| {
            read_dataset(p).map(|(header, data)| Loaded {
                path: p.clone(),
                header,
                data,
            })
        })
        .collect()
}

/// All files must share one grid and one cell count.
pub(crate) fn check_compatible(sets: &[Loaded]) -> CliResult<()> {
    let Some(first) = sets.first() else {
        return Ok(());
    };
    for s in &sets[1..] {
        if s.header.grid != first.header.grid || s.header.cells != first.header.cells {
            return Err(CliError::data(format!(
                "{} and {} were generated with different grids or cell counts",
                first.path.display(),
                s.path.display()
            )));
        }
    }
    Ok(())
}

/// Data-shaped core failures are input errors; everything else is a bad
/// argument.
pub(crate) fn classify(e: ppuf_core::Error) -> CliError {
    match e {
        ppuf_core::Error::Degenerate(_) | ppuf_core::Error::Shape(_) => CliError::from_data(e),
        _ => CliError::from_config(e),
    }
}

pub(crate) fn display(p: &Path) -> String {
    p.display().to_string()
}
