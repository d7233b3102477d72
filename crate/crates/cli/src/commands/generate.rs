use std::path::{Path, PathBuf};

use clap::Args;
use ppuf_core::dataset::NoiseConfig;
use ppuf_core::puf::DEFAULT_CELLS;
use ppuf_core::{CrpDataset, GridConfig, PufInstance};

use crate::error::{CliError, CliResult};
use crate::format::{write_dataset, DatasetHeader, Encoding};
use crate::manifest::{noise_seed, puf_seed, RunManifest, TOOL_VERSION};
use crate::report::{Record, Report};

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    /// Master seed; PUF `i` uses seed `seed + i`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, default_value_t = 10)]
    pub pufs: usize,

    #[arg(long, default_value_t = DEFAULT_CELLS)]
    pub cells: usize,

    #[arg(long, default_value_t = GridConfig::default().ex2_step)]
    pub ex2_step: f64,

    #[arg(long, default_value_t = GridConfig::default().ex2_count)]
    pub ex2_count: usize,

    /// First grid index along E_x^2 (0 would include E_x^2 = 0).
    #[arg(long, default_value_t = GridConfig::default().ex2_start_index)]
    pub ex2_start: usize,

    #[arg(long, default_value_t = GridConfig::default().dphi_step)]
    pub dphi_step: f64,

    #[arg(long, default_value_t = GridConfig::default().dphi_count)]
    pub dphi_count: usize,

    /// First grid index along the phase (0 would include Δφ = 0).
    #[arg(long, default_value_t = GridConfig::default().dphi_start_index)]
    pub dphi_start: usize,

    /// Output directory, created if missing.
    #[arg(long, short)]
    pub output: PathBuf,

    /// Write the packed binary encoding instead of text.
    #[arg(long)]
    pub binary: bool,

    /// Noisy re-measurements per PUF, written next to the noiseless file.
    #[arg(long, default_value_t = 0)]
    pub repeats: usize,

    /// Standard deviation of Gaussian noise on response E_x^2.
    #[arg(long, default_value_t = 0.0)]
    pub noise_ex2: f64,

    /// Standard deviation of Gaussian noise on response Δφ (radians).
    #[arg(long, default_value_t = 0.0)]
    pub noise_phase: f64,
}

impl GenerateArgs {
    pub fn grid(&self) -> GridConfig {
        GridConfig {
            ex2_step: self.ex2_step,
            ex2_count: self.ex2_count,
            ex2_start_index: self.ex2_start,
            dphi_step: self.dphi_step,
            dphi_count: self.dphi_count,
            dphi_start_index: self.dphi_start,
        }
    }

    pub fn encoding(&self) -> Encoding {
        if self.binary {
            Encoding::Binary
        } else {
            Encoding::Text
        }
    }
}

/// File name of PUF `index`, repeat `repeat` (0 = noiseless).
pub fn dataset_file_name(index: usize, repeat: usize, encoding: Encoding) -> String {
    match repeat {
        0 => format!("puf_{index:02}.{}", encoding.extension()),
        r => format!("puf_{index:02}_r{r:02}.{}", encoding.extension()),
    }
}

pub fn run(args: &GenerateArgs) -> CliResult<Report> {
    let grid = args.grid();
    grid.validate().map_err(CliError::from_config)?;
    if args.pufs == 0 {
        return Err(CliError::usage("--pufs must be at least 1"));
    }
    // Final responses carry one bit per cell in a 32-bit word.
    if !(1..=32).contains(&args.cells) {
        return Err(CliError::usage("--cells must be in 1..=32"));
    }
    for (name, s) in [("--noise-ex2", args.noise_ex2), ("--noise-phase", args.noise_phase)] {
        if !(s >= 0.0 && s.is_finite()) {
            return Err(CliError::usage(format!("{name} must be a finite non-negative number")));
        }
    }
    std::fs::create_dir_all(&args.output).map_err(|e| CliError::write(&args.output, e))?;

    let encoding = args.encoding();
    let mut manifest = RunManifest::new(
        args.seed,
        &grid,
        args.pufs,
        args.cells,
        args.repeats,
        args.noise_ex2,
        args.noise_phase,
        encoding,
    );
    let hash = manifest.hash();
    let mut report = Report::new();
    report.comment(format!("manifest_hash={hash}"));

    for index in 0..args.pufs {
        let seed = puf_seed(args.seed, index);
        let puf = PufInstance::build(seed, args.cells).map_err(CliError::from_config)?;
        for repeat in 0..=args.repeats {
            let (data, nseed) = if repeat == 0 {
                (CrpDataset::generate(&puf, &grid), 0)
            } else {
                let noise = NoiseConfig {
                    sigma_ex2: args.noise_ex2,
                    sigma_phase: args.noise_phase,
                    seed: noise_seed(seed, repeat),
                };
                (CrpDataset::generate_noisy(&puf, &grid, noise), noise.seed)
            };
            let data = data.map_err(CliError::from_config)?;
            let (sx, sp) = if repeat == 0 { (0.0, 0.0) } else { (args.noise_ex2, args.noise_phase) };
            let header = DatasetHeader {
                tool_version: TOOL_VERSION.to_string(),
                manifest_hash: hash.clone(),
                master_seed: args.seed,
                puf_index: index,
                puf_seed: seed,
                repeat,
                cells: args.cells,
                grid,
                noise_ex2: sx,
                noise_phase: sp,
                noise_seed: nseed,
                encoding,
                records: data.len(),
            };
            let name = dataset_file_name(index, repeat, encoding);
            let path = args.output.join(&name);
            write_dataset(&path, &header, &data)?;
            report.push(
                Record::new("dataset")
                    .field("file", &name)
                    .field("puf_index", index)
                    .field("puf_seed", seed)
                    .field("repeat", repeat)
                    .field("records", data.len()),
            );
            manifest.outputs.push(name);
        }
    }
    manifest.write_json(&args.output.join("manifest.json"))?;
    Ok(report)
}

/// Paths of the noiseless datasets a default `generate` run writes.
pub fn baseline_paths(dir: &Path, pufs: usize, encoding: Encoding) -> Vec<PathBuf> {
    (0..pufs).map(|i| dir.join(dataset_file_name(i, 0, encoding))).collect()
}
