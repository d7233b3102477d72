//! Seeded PUF instances built from Haar-random lossless components.
//!
//! Each cell is a shared prefix path (input waveguide, coupler 1, waveguide,
//! coupler 2) feeding two output arms (waveguide, coupler-3 port). Every
//! component is an independent Haar-random unitary.
//!
//! Seed schedule: cell `i` of a PUF with seed `s` draws from
//! `ChaCha20Rng::seed_from_u64(s)` switched to stream `i`. Within a cell the
//! components are drawn in path order: all prefix components, then the
//! Output-1 arm, then the Output-2 arm.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{domain, Error, Result};
use crate::jones::{wrap_phase, JonesMatrix, JonesVector, Observables};

pub const DEFAULT_CELLS: usize = 24;

/// Largest `f64` strictly below one.
pub(crate) const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;

/// One of the two outputs of a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Output {
    One,
    Two,
}

impl Output {
    pub const ALL: [Output; 2] = [Output::One, Output::Two];

    /// 1-based index as used in reports and on the command line.
    pub fn index(self) -> usize {
        match self {
            Output::One => 1,
            Output::Two => 2,
        }
    }

    pub fn from_index(index: usize) -> Result<Self> {
        match index {
            1 => Ok(Output::One),
            2 => Ok(Output::Two),
            other => Err(domain(format!("output index {other} is not 1 or 2"))),
        }
    }

    pub(crate) fn offset(self) -> usize {
        self.index() - 1
    }
}

impl fmt::Display for Output {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

impl FromStr for Output {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let index = s
            .trim()
            .parse::<usize>()
            .map_err(|_| domain(format!("output index {s:?} is not an integer")))?;
        Self::from_index(index)
    }
}

/// Number of components on the shared prefix and on each output arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellLayout {
    pub prefix_components: usize,
    pub suffix_components: usize,
}

impl Default for CellLayout {
    fn default() -> Self {
        Self {
            prefix_components: 4,
            suffix_components: 2,
        }
    }
}

impl CellLayout {
    pub fn components_per_cell(&self) -> usize {
        self.prefix_components + 2 * self.suffix_components
    }
}

/// The composed transfer paths of one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellModel {
    pub prefix: JonesMatrix,
    pub suffix1: JonesMatrix,
    pub suffix2: JonesMatrix,
    /// Individual components in draw order (prefix, arm 1, arm 2).
    components: Vec<JonesMatrix>,
}

/// Product of components in light-propagation order: the first component
/// acts first, so it is the rightmost factor.
fn compose(components: &[JonesMatrix]) -> JonesMatrix {
    components
        .iter()
        .fold(JonesMatrix::identity(), |acc, &c| c * acc)
}

impl CellModel {
    pub fn from_paths(prefix: JonesMatrix, suffix1: JonesMatrix, suffix2: JonesMatrix) -> Self {
        Self {
            prefix,
            suffix1,
            suffix2,
            components: vec![prefix, suffix1, suffix2],
        }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, layout: CellLayout) -> Self {
        let components: Vec<JonesMatrix> = (0..layout.components_per_cell())
            .map(|_| JonesMatrix::haar_random(rng))
            .collect();
        let (prefix, arms) = components.split_at(layout.prefix_components);
        let (arm1, arm2) = arms.split_at(layout.suffix_components);
        Self {
            prefix: compose(prefix),
            suffix1: compose(arm1),
            suffix2: compose(arm2),
            components,
        }
    }

    pub fn components(&self) -> &[JonesMatrix] {
        &self.components
    }

    /// Propagate a challenge to both outputs.
    pub fn evaluate(&self, challenge: &JonesVector) -> (JonesVector, JonesVector) {
        let shared = self.prefix.apply(challenge);
        (self.suffix1.apply(&shared), self.suffix2.apply(&shared))
    }
}

/// A PUF: an ordered list of cells, fully determined by its seed and layout.
#[derive(Debug, Clone, PartialEq)]
pub struct PufInstance {
    seed: u64,
    layout: CellLayout,
    cells: Vec<CellModel>,
}

impl PufInstance {
    pub fn build(seed: u64, n_cells: usize) -> Result<Self> {
        Self::build_with_layout(seed, n_cells, CellLayout::default())
    }

    pub fn build_with_layout(seed: u64, n_cells: usize, layout: CellLayout) -> Result<Self> {
        if n_cells == 0 {
            return Err(domain("a PUF needs at least one cell"));
        }
        if layout.prefix_components == 0 || layout.suffix_components == 0 {
            return Err(domain("each path needs at least one component"));
        }
        let cells = (0..n_cells)
            .map(|i| {
                let mut rng = ChaCha20Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                CellModel::random(&mut rng, layout)
            })
            .collect();
        Ok(Self {
            seed,
            layout,
            cells,
        })
    }

    /// Assemble an instance from explicit cells, e.g. for hand-built tests.
    pub fn from_cells(seed: u64, cells: Vec<CellModel>) -> Result<Self> {
        if cells.is_empty() {
            return Err(domain("a PUF needs at least one cell"));
        }
        Ok(Self {
            seed,
            layout: CellLayout {
                prefix_components: 1,
                suffix_components: 1,
            },
            cells,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn layout(&self) -> CellLayout {
        self.layout
    }

    pub fn cells(&self) -> &[CellModel] {
        &self.cells
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    /// Output-1 and Output-2 states of every cell, in cell order.
    pub fn evaluate(&self, challenge: &JonesVector) -> Vec<(JonesVector, JonesVector)> {
        self.cells.iter().map(|c| c.evaluate(challenge)).collect()
    }

    /// Observables of every cell output with additive Gaussian noise.
    ///
    /// `E_x^2` is clamped to `[0, 1)` and `Δφ` wrapped into `[0, 2π)` after
    /// the noise is added. Noise is drawn per cell as (out1 ex2, out1 dphi,
    /// out2 ex2, out2 dphi).
    pub fn evaluate_noisy<R: Rng + ?Sized>(
        &self,
        challenge: &JonesVector,
        sigma_ex2: f64,
        sigma_phase: f64,
        rng: &mut R,
    ) -> Result<Vec<[Observables; 2]>> {
        let ex2_noise = noise(sigma_ex2, "sigma_ex2")?;
        let phase_noise = noise(sigma_phase, "sigma_phase")?;
        let mut perturb = |obs: Observables| Observables {
            ex2: (obs.ex2 + ex2_noise.sample(rng)).clamp(0.0, BELOW_ONE),
            dphi: wrap_phase(obs.dphi + phase_noise.sample(rng)),
        };
        self.cells
            .iter()
            .map(|cell| {
                let (o1, o2) = cell.evaluate(challenge);
                let (o1, o2) = (o1.observables()?, o2.observables()?);
                Ok([perturb(o1), perturb(o2)])
            })
            .collect()
    }
}

fn noise(sigma: f64, name: &str) -> Result<Normal<f64>> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(domain(format!("{name} = {sigma} must be finite and non-negative")));
    }
    Normal::new(0.0, sigma).map_err(|e| domain(format!("{name}: {e}")))
}
