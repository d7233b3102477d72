//! Challenge-response datasets: the challenge grid plus every cell's two
//! interim responses per challenge.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::encoding::{encode_response, encode_state, generate_challenge_grid, Bitstring24, GridConfig};
use crate::error::{shape, Result};
use crate::jones::{JonesVector, Observables};
use crate::puf::{Output, PufInstance};

/// Gaussian noise applied to response observables before encoding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseConfig {
    pub sigma_ex2: f64,
    pub sigma_phase: f64,
    /// Challenge `i` draws its noise from this seed on ChaCha stream `i`.
    pub seed: u64,
}

/// Interim responses are stored challenge-major, then cell-major, with
/// Output 1 before Output 2.
#[derive(Debug, Clone, PartialEq)]
pub struct CrpDataset {
    grid: GridConfig,
    puf_seed: u64,
    n_cells: usize,
    challenges: Vec<Observables>,
    challenge_bits: Vec<Bitstring24>,
    interim: Vec<Bitstring24>,
}

impl CrpDataset {
    /// Evaluate every grid challenge on `puf`.
    pub fn generate(puf: &PufInstance, grid: &GridConfig) -> Result<Self> {
        Self::generate_inner(puf, grid, None)
    }

    /// Like [`generate`](Self::generate) but with noisy response observables.
    pub fn generate_noisy(puf: &PufInstance, grid: &GridConfig, noise: NoiseConfig) -> Result<Self> {
        Self::generate_inner(puf, grid, Some(noise))
    }

    fn generate_inner(puf: &PufInstance, grid: &GridConfig, noise: Option<NoiseConfig>) -> Result<Self> {
        let challenges = generate_challenge_grid(grid)?;
        let challenge_bits = challenges
            .iter()
            .map(|c| encode_state(c.ex2, c.dphi))
            .collect::<Result<Vec<_>>>()?;
        let rows: Vec<Vec<Bitstring24>> = challenges
            .par_iter()
            .enumerate()
            .map(|(i, c)| -> Result<Vec<Bitstring24>> {
                let v = JonesVector::from_observables(c.ex2, c.dphi)?;
                match noise {
                    None => puf
                        .evaluate(&v)
                        .iter()
                        .flat_map(|(o1, o2)| [o1, o2])
                        .map(|o| o.observables().map(encode_response))
                        .collect(),
                    Some(n) => {
                        let mut rng = ChaCha20Rng::seed_from_u64(n.seed);
                        rng.set_stream(i as u64);
                        Ok(puf
                            .evaluate_noisy(&v, n.sigma_ex2, n.sigma_phase, &mut rng)?
                            .iter()
                            .flatten()
                            .map(|&o| encode_response(o))
                            .collect())
                    }
                }
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            grid: *grid,
            puf_seed: puf.seed(),
            n_cells: puf.n_cells(),
            challenges,
            challenge_bits,
            interim: rows.into_iter().flatten().collect(),
        })
    }

    /// Assemble a dataset from already-encoded parts (e.g. read from disk).
    ///
    /// `interim` must hold `challenges.len() · n_cells · 2` entries in the
    /// documented order.
    pub fn from_parts(
        grid: GridConfig,
        puf_seed: u64,
        n_cells: usize,
        challenges: Vec<Observables>,
        challenge_bits: Vec<Bitstring24>,
        interim: Vec<Bitstring24>,
    ) -> Result<Self> {
        if n_cells == 0 {
            return Err(shape("dataset needs at least one cell"));
        }
        if challenge_bits.len() != challenges.len() {
            return Err(shape(format!(
                "{} challenge bitstrings for {} challenges",
                challenge_bits.len(),
                challenges.len()
            )));
        }
        if interim.len() != challenges.len() * n_cells * 2 {
            return Err(shape(format!(
                "{} interim responses, expected {}",
                interim.len(),
                challenges.len() * n_cells * 2
            )));
        }
        Ok(Self {
            grid,
            puf_seed,
            n_cells,
            challenges,
            challenge_bits,
            interim,
        })
    }

    pub fn grid(&self) -> &GridConfig {
        &self.grid
    }

    pub fn puf_seed(&self) -> u64 {
        self.puf_seed
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    /// Number of challenges.
    pub fn len(&self) -> usize {
        self.challenges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.challenges.is_empty()
    }

    pub fn challenges(&self) -> &[Observables] {
        &self.challenges
    }

    pub fn challenge_bits(&self) -> &[Bitstring24] {
        &self.challenge_bits
    }

    /// Interim response of `cell` on `output` for challenge `challenge`.
    pub fn interim(&self, challenge: usize, cell: usize, output: Output) -> Bitstring24 {
        self.interim[(challenge * self.n_cells + cell) * 2 + output.offset()]
    }

    /// All `2 · n_cells` interim responses of one challenge in record order.
    pub fn interim_record(&self, challenge: usize) -> &[Bitstring24] {
        let w = self.n_cells * 2;
        &self.interim[challenge * w..(challenge + 1) * w]
    }

    /// The interim responses of every cell on one output, cell order.
    pub fn interim_row(&self, challenge: usize, output: Output) -> impl Iterator<Item = Bitstring24> + '_ {
        self.interim_record(challenge)
            .iter()
            .skip(output.offset())
            .step_by(2)
            .copied()
    }

    pub fn set_interim(&mut self, challenge: usize, cell: usize, output: Output, value: Bitstring24) {
        self.interim[(challenge * self.n_cells + cell) * 2 + output.offset()] = value;
    }
}
