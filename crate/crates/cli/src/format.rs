//! On-disk CRP datasets.
//!
//! Both encodings start with UTF-8 header lines of the form `# key=value`.
//!
//! Text records follow the header, one challenge per line, fields separated
//! by single spaces:
//!
//! ```text
//! <ex2> <dphi> <challenge> <cell0.out1> <cell0.out2> <cell1.out1> ...
//! ```
//!
//! with bitstrings as 24 ASCII `0`/`1` characters, bit index 0 first.
//!
//! Binary payloads start after a `#data` line. Each record is fixed-size:
//! `ex2` and `dphi` as little-endian `f64`, then the challenge and every
//! interim response as a 3-byte little-endian integer (the MSB-first value
//! of the bitstring).

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use ppuf_core::{Bitstring24, CrpDataset, GridConfig, Observables};

use crate::error::{CliError, CliResult};

const MAGIC: &str = "# ppuf crp dataset";
const DATA_MARKER: &str = "#data";
pub const INTERIM_ORDER: &str = "cell-major,output1-then-output2";
pub const CHALLENGE_ORDER: &str = "ex2-major";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Encoding {
    Text,
    Binary,
}

impl Encoding {
    pub fn extension(self) -> &'static str {
        match self {
            Encoding::Text => "crp",
            Encoding::Binary => "crpb",
        }
    }
}

impl fmt::Display for Encoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Encoding::Text => "text",
            Encoding::Binary => "binary",
        })
    }
}

impl FromStr for Encoding {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "text" => Ok(Encoding::Text),
            "binary" => Ok(Encoding::Binary),
            other => Err(format!("unknown encoding {other:?}")),
        }
    }
}

/// Everything a dataset header records.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetHeader {
    pub tool_version: String,
    pub manifest_hash: String,
    pub master_seed: u64,
    pub puf_index: usize,
    pub puf_seed: u64,
    /// 0 for the noiseless baseline, `r ≥ 1` for noisy repeats.
    pub repeat: usize,
    pub cells: usize,
    pub grid: GridConfig,
    pub noise_ex2: f64,
    pub noise_phase: f64,
    pub noise_seed: u64,
    pub encoding: Encoding,
    pub records: usize,
}

impl DatasetHeader {
    fn lines(&self) -> Vec<String> {
        let g = &self.grid;
        let mut fields = vec!["ex2".to_string(), "dphi".to_string(), "challenge".to_string()];
        fields.extend((0..self.cells).flat_map(|c| [format!("c{c}o1"), format!("c{c}o2")]));
        vec![
            MAGIC.to_string(),
            format!("# tool_version={}", self.tool_version),
            format!("# manifest_hash={}", self.manifest_hash),
            format!("# master_seed={}", self.master_seed),
            format!("# puf_index={}", self.puf_index),
            format!("# puf_seed={}", self.puf_seed),
            format!("# repeat={}", self.repeat),
            format!("# cells={}", self.cells),
            format!("# ex2_step={:?}", g.ex2_step),
            format!("# ex2_count={}", g.ex2_count),
            format!("# ex2_start_index={}", g.ex2_start_index),
            format!("# dphi_step={:?}", g.dphi_step),
            format!("# dphi_count={}", g.dphi_count),
            format!("# dphi_start_index={}", g.dphi_start_index),
            format!("# challenge_order={CHALLENGE_ORDER}"),
            format!("# noise_ex2={:?}", self.noise_ex2),
            format!("# noise_phase={:?}", self.noise_phase),
            format!("# noise_seed={}", self.noise_seed),
            format!("# interim_order={INTERIM_ORDER}"),
            format!("# fields={}", fields.join(",")),
            format!("# encoding={}", self.encoding),
            format!("# records={}", self.records),
        ]
    }

    fn parse(lines: &[String], path: &Path) -> CliResult<Self> {
        let bad = |msg: String| CliError::data(format!("{}: {msg}", path.display()));
        if lines.first().map(String::as_str) != Some(MAGIC) {
            return Err(bad("not a ppuf dataset (missing magic line)".into()));
        }
        let mut map = std::collections::HashMap::new();
        for line in &lines[1..] {
            let body = line.trim_start_matches('#').trim();
            if let Some((k, v)) = body.split_once('=') {
                map.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        let get = |key: &str| -> CliResult<&String> {
            map.get(key).ok_or_else(|| bad(format!("header is missing {key}")))
        };
        fn num<T: FromStr>(raw: &str, key: &str, bad: &dyn Fn(String) -> CliError) -> CliResult<T> {
            raw.parse().map_err(|_| bad(format!("header {key}={raw:?} is not a number")))
        }
        let n = |key: &str| -> CliResult<usize> { num(get(key)?, key, &bad) };
        let u = |key: &str| -> CliResult<u64> { num(get(key)?, key, &bad) };
        let f = |key: &str| -> CliResult<f64> { num(get(key)?, key, &bad) };

        if get("interim_order")? != INTERIM_ORDER || get("challenge_order")? != CHALLENGE_ORDER {
            return Err(bad("unsupported record order".into()));
        }
        Ok(Self {
            tool_version: get("tool_version")?.clone(),
            manifest_hash: get("manifest_hash")?.clone(),
            master_seed: u("master_seed")?,
            puf_index: n("puf_index")?,
            puf_seed: u("puf_seed")?,
            repeat: n("repeat")?,
            cells: n("cells")?,
            grid: GridConfig {
                ex2_step: f("ex2_step")?,
                ex2_count: n("ex2_count")?,
                ex2_start_index: n("ex2_start_index")?,
                dphi_step: f("dphi_step")?,
                dphi_count: n("dphi_count")?,
                dphi_start_index: n("dphi_start_index")?,
            },
            noise_ex2: f("noise_ex2")?,
            noise_phase: f("noise_phase")?,
            noise_seed: u("noise_seed")?,
            encoding: get("encoding")?.parse().map_err(bad)?,
            records: n("records")?,
        })
    }
}

/// Write `ds` under `header`; `header.records` must equal `ds.len()`.
pub fn write_dataset(path: &Path, header: &DatasetHeader, ds: &CrpDataset) -> CliResult<()> {
    assert_eq!(header.records, ds.len(), "header record count must match the dataset");
    let file = File::create(path).map_err(|e| CliError::write(path, e))?;
    let mut w = BufWriter::with_capacity(1 << 20, file);
    let io = |e| CliError::write(path, e);
    for line in header.lines() {
        writeln!(w, "{line}").map_err(io)?;
    }
    match header.encoding {
        Encoding::Text => {
            for i in 0..ds.len() {
                let c = ds.challenges()[i];
                write!(w, "{:?} {:?} {}", c.ex2, c.dphi, ds.challenge_bits()[i]).map_err(io)?;
                for b in ds.interim_record(i) {
                    write!(w, " {b}").map_err(io)?;
                }
                w.write_all(b"\n").map_err(io)?;
            }
        }
        Encoding::Binary => {
            writeln!(w, "{DATA_MARKER}").map_err(io)?;
            for i in 0..ds.len() {
                let c = ds.challenges()[i];
                w.write_all(&c.ex2.to_le_bytes()).map_err(io)?;
                w.write_all(&c.dphi.to_le_bytes()).map_err(io)?;
                w.write_all(&ds.challenge_bits()[i].value().to_le_bytes()[..3]).map_err(io)?;
                for b in ds.interim_record(i) {
                    w.write_all(&b.value().to_le_bytes()[..3]).map_err(io)?;
                }
            }
        }
    }
    w.flush().map_err(io)
}

fn binary_record_len(cells: usize) -> usize {
    16 + 3 * (1 + 2 * cells)
}

/// Read a dataset written by [`write_dataset`], checking the declared
/// record count against the records actually present.
pub fn read_dataset(path: &Path) -> CliResult<(DatasetHeader, CrpDataset)> {
    let file = File::open(path).map_err(|e| CliError::read(path, e))?;
    let mut r = BufReader::with_capacity(1 << 20, file);
    let bad = |msg: String| CliError::data(format!("{}: {msg}", path.display()));

    let mut header_lines = Vec::new();
    let mut first_record = None;
    loop {
        let mut line = String::new();
        let n = r.read_line(&mut line).map_err(|e| CliError::read(path, e))?;
        if n == 0 {
            break;
        }
        let line = line.trim_end_matches(['\n', '\r']).to_string();
        if line == DATA_MARKER {
            break;
        }
        if line.starts_with('#') {
            header_lines.push(line);
        } else {
            first_record = Some(line);
            break;
        }
    }
    let header = DatasetHeader::parse(&header_lines, path)?;
    if header.cells == 0 {
        return Err(bad("header declares zero cells".into()));
    }
    let n_fields = 3 + 2 * header.cells;
    let mut challenges = Vec::with_capacity(header.records);
    let mut challenge_bits = Vec::with_capacity(header.records);
    let mut interim = Vec::with_capacity(header.records * 2 * header.cells);

    match header.encoding {
        Encoding::Text => {
            let mut parse_line = |line: &str, lineno: usize| -> CliResult<()> {
                if line.is_empty() {
                    return Ok(());
                }
                let fields: Vec<&str> = line.split(' ').collect();
                if fields.len() != n_fields {
                    return Err(bad(format!("record {lineno} has {} fields, expected {n_fields}", fields.len())));
                }
                let float = |s: &str| s.parse::<f64>().map_err(|_| bad(format!("record {lineno}: bad number {s:?}")));
                let bits = |s: &str| {
                    s.parse::<Bitstring24>()
                        .map_err(|e| bad(format!("record {lineno}: {e}")))
                };
                challenges.push(Observables::new(float(fields[0])?, float(fields[1])?));
                challenge_bits.push(bits(fields[2])?);
                for s in &fields[3..] {
                    interim.push(bits(s)?);
                }
                Ok(())
            };
            let mut lineno = 0;
            if let Some(line) = first_record {
                parse_line(&line, lineno)?;
                lineno += 1;
            }
            for line in r.lines() {
                let line = line.map_err(|e| CliError::read(path, e))?;
                parse_line(&line, lineno)?;
                lineno += 1;
            }
        }
        Encoding::Binary => {
            let mut payload = Vec::new();
            r.read_to_end(&mut payload).map_err(|e| CliError::read(path, e))?;
            let len = binary_record_len(header.cells);
            if payload.len() % len != 0 {
                return Err(bad(format!("binary payload of {} bytes is not a whole number of records", payload.len())));
            }
            for rec in payload.chunks_exact(len) {
                let f = |o: usize| f64::from_le_bytes(rec[o..o + 8].try_into().expect("8 bytes"));
                challenges.push(Observables::new(f(0), f(8)));
                let bits = |o: usize| {
                    Bitstring24::new(u32::from_le_bytes([rec[o], rec[o + 1], rec[o + 2], 0]))
                        .expect("3 bytes fit in 24 bits")
                };
                challenge_bits.push(bits(16));
                interim.extend((0..2 * header.cells).map(|k| bits(19 + 3 * k)));
            }
        }
    }
    if challenges.len() != header.records {
        return Err(bad(format!(
            "header declares {} records but the file holds {}",
            header.records,
            challenges.len()
        )));
    }
    let ds = CrpDataset::from_parts(
        header.grid,
        header.puf_seed,
        header.cells,
        challenges,
        challenge_bits,
        interim,
    )
    .map_err(|e| bad(e.to_string()))?;
    Ok((header, ds))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ppuf_core::PufInstance;

    fn sample(encoding: Encoding) -> (DatasetHeader, CrpDataset) {
        let grid = GridConfig::with_counts(3, 2);
        let ds = CrpDataset::generate(&PufInstance::build(5, 4).unwrap(), &grid).unwrap();
        let header = DatasetHeader {
            tool_version: "0.0.0".into(),
            manifest_hash: "abc".into(),
            master_seed: 5,
            puf_index: 0,
            puf_seed: 5,
            repeat: 0,
            cells: 4,
            grid,
            noise_ex2: 0.0,
            noise_phase: 0.0,
            noise_seed: 0,
            encoding,
            records: ds.len(),
        };
        (header, ds)
    }

    #[test]
    fn round_trip_both_encodings() {
        let dir = tempfile::tempdir().unwrap();
        for enc in [Encoding::Text, Encoding::Binary] {
            let (h, ds) = sample(enc);
            let path = dir.path().join(format!("d.{}", enc.extension()));
            write_dataset(&path, &h, &ds).unwrap();
            let (h2, ds2) = read_dataset(&path).unwrap();
            assert_eq!(h2, h);
            assert_eq!(ds2, ds);
        }
    }

    #[test]
    fn text_layout() {
        let dir = tempfile::tempdir().unwrap();
        let (h, ds) = sample(Encoding::Text);
        let path = dir.path().join("d.crp");
        write_dataset(&path, &h, &ds).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let records: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(records.len(), 6);
        let fields: Vec<&str> = records[0].split(' ').collect();
        assert_eq!(fields.len(), 3 + 8);
        assert_eq!(fields[0], "0.0003");
        assert_eq!(fields[1], "0.087");
        assert_eq!(fields[2], "000000000001000000101100");
        assert!(fields[3..].iter().all(|f| f.len() == 24));
        assert!(text.contains("# records=6\n"));
    }

    #[test]
    fn record_count_mismatch_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        for enc in [Encoding::Text, Encoding::Binary] {
            let (h, ds) = sample(enc);
            let path = dir.path().join("d");
            write_dataset(&path, &h, &ds).unwrap();
            let text = std::fs::read(&path).unwrap();
            let marker = b"# records=6";
            let pos = text.windows(marker.len()).position(|w| w == marker).unwrap();
            let mut edited = text.clone();
            edited[pos + marker.len() - 1] = b'7';
            std::fs::write(&path, edited).unwrap();
            assert!(matches!(read_dataset(&path), Err(CliError::Data(_))));
        }
    }

    #[test]
    fn truncated_binary_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let (h, ds) = sample(Encoding::Binary);
        let path = dir.path().join("d.crpb");
        write_dataset(&path, &h, &ds).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes.truncate(bytes.len() - 5);
        std::fs::write(&path, bytes).unwrap();
        assert!(matches!(read_dataset(&path), Err(CliError::Data(_))));
    }

    #[test]
    fn garbage_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("junk");
        std::fs::write(&path, "hello\n").unwrap();
        assert!(matches!(read_dataset(&path), Err(CliError::Data(_))));
        assert!(matches!(read_dataset(&dir.path().join("missing")), Err(CliError::Data(_))));
    }
}
