//! Challenge grid, 24-bit fixed-point state encoding, and interpretations.
//!
//! A state `(E_x^2, Δφ)` encodes to 24 bits, index 0 first:
//!
//! - bits 0..=11: `floor(E_x^2 · 2^12)`, MSB at index 0;
//! - bits 12..=23: `Δφ` as 3 integer bits (MSB at index 12) followed by 9
//!   fraction bits.
//!
//! Both parts truncate. An interpretation `(output, k)` takes bit `k` of
//! every cell's interim response on one output; cell `j` supplies response
//! bit `j`.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use crate::dataset::CrpDataset;
use crate::error::{config, domain, shape, Error, Result};
use crate::jones::{wrap_phase, Observables};
use crate::puf::{Output, BELOW_ONE};

pub const BITS: usize = 24;
pub const FIELD_BITS: usize = 12;
const FRACTION_SCALE: f64 = 4096.0;
const PHASE_FRACTION_SCALE: f64 = 512.0;

/// Regular grid of challenges over `(E_x^2, Δφ)`.
///
/// Generated values are `ex2_step · i` for
/// `i ∈ [ex2_start_index, ex2_start_index + ex2_count)` and likewise for the
/// phase. The default is the 2999 x 71 grid of 212,929 challenges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    pub ex2_step: f64,
    pub ex2_count: usize,
    pub dphi_step: f64,
    pub dphi_count: usize,
    pub ex2_start_index: usize,
    pub dphi_start_index: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            ex2_step: 0.0003,
            ex2_count: 2999,
            dphi_step: 0.087,
            dphi_count: 71,
            ex2_start_index: 1,
            dphi_start_index: 1,
        }
    }
}

impl GridConfig {
    /// Grid with the default steps and start indices but custom counts.
    pub fn with_counts(ex2_count: usize, dphi_count: usize) -> Self {
        Self {
            ex2_count,
            dphi_count,
            ..Self::default()
        }
    }

    pub fn len(&self) -> usize {
        self.ex2_count * self.dphi_count
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn ex2_at(&self, i: usize) -> f64 {
        self.ex2_step * (self.ex2_start_index + i) as f64
    }

    fn dphi_at(&self, j: usize) -> f64 {
        self.dphi_step * (self.dphi_start_index + j) as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.ex2_count == 0 || self.dphi_count == 0 {
            return Err(config("grid counts must be positive"));
        }
        if !(self.ex2_step > 0.0 && self.ex2_step.is_finite()) {
            return Err(config(format!("ex2 step {} must be positive", self.ex2_step)));
        }
        if !(self.dphi_step > 0.0 && self.dphi_step.is_finite()) {
            return Err(config(format!("dphi step {} must be positive", self.dphi_step)));
        }
        let ex2_max = self.ex2_at(self.ex2_count - 1);
        if self.ex2_start_index == 0 || ex2_max >= 1.0 {
            return Err(config(format!(
                "ex2 grid must lie in (0, 1); start index {} gives max {ex2_max}",
                self.ex2_start_index
            )));
        }
        let dphi_max = self.dphi_at(self.dphi_count - 1);
        if dphi_max >= TAU {
            return Err(config(format!("dphi grid max {dphi_max} is not below 2π")));
        }
        Ok(())
    }
}

/// All grid challenges in ex2-major order (phase varies fastest), so
/// consecutive challenges in a row are one phase step apart.
pub fn generate_challenge_grid(cfg: &GridConfig) -> Result<Vec<Observables>> {
    cfg.validate()?;
    let mut out = Vec::with_capacity(cfg.len());
    for i in 0..cfg.ex2_count {
        let ex2 = cfg.ex2_at(i);
        for j in 0..cfg.dphi_count {
            out.push(Observables::new(ex2, cfg.dphi_at(j)));
        }
    }
    Ok(out)
}

/// `floor(x · 2^12)` for `x ∈ [0, 1)`.
pub fn quantize12_fraction(x: f64) -> Result<u16> {
    if !(0.0..1.0).contains(&x) {
        return Err(domain(format!("fraction {x} is outside [0, 1)")));
    }
    Ok((x * FRACTION_SCALE).floor() as u16)
}

/// 3-bit integer part and 9-bit fraction of `x ∈ [0, 2π)`.
pub fn quantize12_phase(x: f64) -> Result<u16> {
    if !(0.0..TAU).contains(&x) {
        return Err(domain(format!("phase {x} is outside [0, 2π)")));
    }
    let int = x.floor();
    let frac = ((x - int) * PHASE_FRACTION_SCALE).floor() as u16;
    Ok(((int as u16) << 9) | frac)
}

/// Lower edge of the `E_x^2` bin of a 12-bit code.
pub fn decode12_fraction(q: u16) -> f64 {
    f64::from(q & 0xfff) / FRACTION_SCALE
}

/// Lower edge of the phase bin of a 12-bit code.
pub fn decode12_phase(q: u16) -> f64 {
    f64::from((q >> 9) & 0x7) + f64::from(q & 0x1ff) / PHASE_FRACTION_SCALE
}

/// Encode a challenge state; errors outside `[0, 1) x [0, 2π)`.
pub fn encode_state(ex2: f64, dphi: f64) -> Result<Bitstring24> {
    let hi = u32::from(quantize12_fraction(ex2)?);
    let lo = u32::from(quantize12_phase(dphi)?);
    Ok(Bitstring24((hi << 12) | lo))
}

/// Encode a response state with the challenge encoder.
///
/// Extracted observables can reach `E_x^2 = 1` exactly, so `E_x^2` saturates
/// at the top bin and the phase is re-wrapped first.
pub fn encode_response(obs: Observables) -> Bitstring24 {
    let ex2 = obs.ex2.clamp(0.0, BELOW_ONE);
    encode_state(ex2, wrap_phase(obs.dphi)).expect("clamped observables are in range")
}

/// 24 bits, index 0 the most significant. Stored in the low bits of a `u32`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Bitstring24(u32);

impl Bitstring24 {
    pub const MAX: u32 = (1 << BITS) - 1;

    pub fn new(value: u32) -> Result<Self> {
        if value > Self::MAX {
            return Err(domain(format!("{value} does not fit in 24 bits")));
        }
        Ok(Self(value))
    }

    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        if bits.len() != BITS {
            return Err(shape(format!("expected 24 bits, got {}", bits.len())));
        }
        Ok(Self(bits.iter().fold(0, |acc, &b| (acc << 1) | u32::from(b))))
    }

    /// MSB-first integer value, in `[0, 2^24)`.
    pub fn value(self) -> u32 {
        self.0
    }

    /// Bit at `index` (0 = MSB). Panics if `index >= 24`.
    pub fn bit(self, index: usize) -> bool {
        assert!(index < BITS, "bit index {index} out of range");
        (self.0 >> (BITS - 1 - index)) & 1 == 1
    }

    pub fn with_bit_flipped(self, index: usize) -> Self {
        assert!(index < BITS, "bit index {index} out of range");
        Self(self.0 ^ (1 << (BITS - 1 - index)))
    }

    pub fn bits(self) -> [bool; BITS] {
        std::array::from_fn(|i| self.bit(i))
    }

    pub fn ex2_code(self) -> u16 {
        (self.0 >> 12) as u16
    }

    pub fn phase_code(self) -> u16 {
        (self.0 & 0xfff) as u16
    }
}

/// MSB-first integer value of a 24-bit string.
pub fn bits_to_integer(b: Bitstring24) -> u32 {
    b.value()
}

impl fmt::Display for Bitstring24 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:024b}", self.0)
    }
}

impl FromStr for Bitstring24 {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.len() != BITS || !s.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(domain(format!("{s:?} is not a 24-character 0/1 string")));
        }
        Ok(Self(u32::from_str_radix(s, 2).expect("validated binary digits")))
    }
}

/// A list of equal-width responses, `width ≤ 32`, bit 0 the MSB.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResponseSet {
    width: usize,
    values: Vec<u32>,
}

impl ResponseSet {
    pub fn new(width: usize, values: Vec<u32>) -> Result<Self> {
        if width == 0 || width > 32 {
            return Err(domain(format!("response width {width} is outside 1..=32")));
        }
        if width < 32 {
            if let Some(v) = values.iter().find(|&&v| v >> width != 0) {
                return Err(domain(format!("response {v} does not fit in {width} bits")));
            }
        }
        Ok(Self { width, values })
    }

    /// Parse responses written as 0/1 strings of a common length.
    pub fn from_strs(responses: &[&str]) -> Result<Self> {
        let width = responses.first().map_or(1, |s| s.len());
        let values = responses
            .iter()
            .map(|s| {
                if s.len() != width || !s.bytes().all(|b| b == b'0' || b == b'1') {
                    return Err(domain(format!("{s:?} is not a {width}-bit 0/1 string")));
                }
                u32::from_str_radix(s, 2).map_err(|e| domain(e.to_string()))
            })
            .collect::<Result<_>>()?;
        Self::new(width, values)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    /// Bit `position` (0 = MSB) of response `index`.
    pub fn bit(&self, index: usize, position: usize) -> bool {
        (self.values[index] >> (self.width - 1 - position)) & 1 == 1
    }

    /// The same responses with every bit inverted.
    pub fn complement(&self) -> Self {
        let mask = if self.width == 32 { u32::MAX } else { (1 << self.width) - 1 };
        Self {
            width: self.width,
            values: self.values.iter().map(|v| !v & mask).collect(),
        }
    }

    pub fn permuted(&self, order: &[usize]) -> Self {
        Self {
            width: self.width,
            values: order.iter().map(|&i| self.values[i]).collect(),
        }
    }
}

/// Final responses formed from one interim bit index of one output.
#[derive(Debug, Clone, PartialEq)]
pub struct Interpretation {
    pub output: Output,
    pub bit_index: usize,
    pub responses: ResponseSet,
}

impl Interpretation {
    /// Bit indices 0..=5 and 12..=17 are the more-significant ones.
    pub fn is_more_significant(&self) -> bool {
        is_more_significant(self.bit_index)
    }
}

pub fn is_more_significant(bit_index: usize) -> bool {
    bit_index % FIELD_BITS < 6
}

/// The 12 less-significant bit indices: 6..=11 and 18..=23.
pub fn less_significant_indices() -> impl Iterator<Item = usize> {
    (0..BITS).filter(|&b| !is_more_significant(b))
}

/// The 12 more-significant bit indices: 0..=5 and 12..=17.
pub fn more_significant_indices() -> impl Iterator<Item = usize> {
    (0..BITS).filter(|&b| is_more_significant(b))
}

/// Assemble interpretation `(output, bit_index)` of a dataset.
pub fn build_interpretation(
    ds: &CrpDataset,
    output: Output,
    bit_index: usize,
) -> Result<Interpretation> {
    if bit_index >= BITS {
        return Err(domain(format!("bit index {bit_index} is outside 0..=23")));
    }
    let n = ds.n_cells();
    if n > 32 {
        return Err(domain(format!("{n} cells do not fit a 32-bit response")));
    }
    let shift = BITS - 1 - bit_index;
    let values = (0..ds.len())
        .map(|c| {
            ds.interim_row(c, output)
                .fold(0u32, |acc, b| (acc << 1) | ((b.value() >> shift) & 1))
        })
        .collect();
    Ok(Interpretation {
        output,
        bit_index,
        responses: ResponseSet::new(n, values)?,
    })
}

/// All `2 x 24` interpretations, Output 1 first.
pub fn all_interpretations(ds: &CrpDataset) -> Result<Vec<Interpretation>> {
    Output::ALL
        .iter()
        .flat_map(|&o| (0..BITS).map(move |b| (o, b)))
        .map(|(o, b)| build_interpretation(ds, o, b))
        .collect()
}
