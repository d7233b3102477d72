//! Jones vectors, lossless Jones matrices and observable extraction.
//!
//! A state is stored as its two complex field components
//! `(E_x e^{iφ_x}, E_y e^{iφ_y})`. Components of the PUF are 2x2 unitaries.

use std::f64::consts::TAU;
use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{domain, Result};

/// Entrywise tolerance for `M†M = I`, and slack on the det/trace bounds.
pub const LOSSLESS_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Reduce a phase into `[0, 2π)`.
///
/// `rem_euclid` can round a tiny negative input up to exactly `2π`, which
/// is folded back to zero.
pub fn wrap_phase(phase: f64) -> f64 {
    let wrapped = phase.rem_euclid(TAU);
    if wrapped >= TAU {
        0.0
    } else {
        wrapped
    }
}

/// The two quantities a state is reduced to before encoding: the
/// normalized x-intensity `E_x^2` and the phase difference `φ_y - φ_x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables {
    pub ex2: f64,
    pub dphi: f64,
}

impl Observables {
    pub fn new(ex2: f64, dphi: f64) -> Self {
        Self { ex2, dphi }
    }
}

/// A polarization state as two complex field components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JonesVector {
    x: Complex64,
    y: Complex64,
}

impl JonesVector {
    pub fn from_components(x: Complex64, y: Complex64) -> Self {
        Self { x, y }
    }

    /// Build from magnitudes and absolute phases.
    pub fn from_polar(ex: f64, phix: f64, ey: f64, phiy: f64) -> Self {
        Self {
            x: Complex64::from_polar(ex, phix),
            y: Complex64::from_polar(ey, phiy),
        }
    }

    /// Normalized challenge state with `E_x^2 = ex2`, `φ_x = 0` and
    /// `φ_y = dphi`.
    pub fn from_observables(ex2: f64, dphi: f64) -> Result<Self> {
        if !(ex2 > 0.0 && ex2 < 1.0) {
            return Err(domain(format!("ex2 = {ex2} is outside (0, 1)")));
        }
        if !(0.0..TAU).contains(&dphi) {
            return Err(domain(format!("dphi = {dphi} is outside [0, 2π)")));
        }
        Ok(Self::from_polar(ex2.sqrt(), 0.0, (1.0 - ex2).sqrt(), dphi))
    }

    pub fn x(&self) -> Complex64 {
        self.x
    }

    pub fn y(&self) -> Complex64 {
        self.y
    }

    pub fn ex(&self) -> f64 {
        self.x.norm()
    }

    pub fn ey(&self) -> f64 {
        self.y.norm()
    }

    /// Phase of the x component in `[0, 2π)`; zero for a null component.
    pub fn phix(&self) -> f64 {
        wrap_phase(self.x.arg())
    }

    pub fn phiy(&self) -> f64 {
        wrap_phase(self.y.arg())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.x.norm_sqr() + self.y.norm_sqr()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Multiply both components by `e^{iγ}`.
    pub fn with_global_phase(&self, gamma: f64) -> Self {
        let g = Complex64::from_polar(1.0, gamma);
        Self {
            x: self.x * g,
            y: self.y * g,
        }
    }

    /// Extract `(E_x^2, Δφ)`.
    ///
    /// `E_x^2` is renormalized by the total intensity. `Δφ` is wrapped into
    /// `[0, 2π)` and defined as zero when either component vanishes.
    pub fn observables(&self) -> Result<Observables> {
        let ix = self.x.norm_sqr();
        let iy = self.y.norm_sqr();
        let total = ix + iy;
        if !(total > 0.0) {
            return Err(domain("cannot extract observables of a null Jones vector"));
        }
        let dphi = if self.x == ZERO || self.y == ZERO {
            0.0
        } else {
            // arg(y x*) = φ_y - φ_x without an intermediate subtraction.
            wrap_phase((self.y * self.x.conj()).arg())
        };
        Ok(Observables {
            ex2: ix / total,
            dphi,
        })
    }
}

/// A 2x2 complex transfer matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JonesMatrix {
    m: [[Complex64; 2]; 2],
}

impl JonesMatrix {
    pub fn new(m00: Complex64, m01: Complex64, m10: Complex64, m11: Complex64) -> Self {
        Self {
            m: [[m00, m01], [m10, m11]],
        }
    }

    pub fn from_real(m00: f64, m01: f64, m10: f64, m11: f64) -> Self {
        Self::new(m00.into(), m01.into(), m10.into(), m11.into())
    }

    pub fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.m[row][col]
    }

    pub fn entries(&self) -> [Complex64; 4] {
        [self.m[0][0], self.m[0][1], self.m[1][0], self.m[1][1]]
    }

    /// Draw a Haar-uniform element of U(2).
    ///
    /// Uses `U = e^{iα} [[e^{iψ}cosθ, e^{iχ}sinθ], [-e^{-iχ}sinθ, e^{-iψ}cosθ]]`
    /// with `α, ψ, χ ~ U[0, 2π)` and `θ = asin(√u)`, `u ~ U[0, 1)`. The four
    /// uniforms are drawn in the order α, ψ, χ, u; seeds depend on it.
    pub fn haar_random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let alpha = rng.random::<f64>() * TAU;
        let psi = rng.random::<f64>() * TAU;
        let chi = rng.random::<f64>() * TAU;
        let u = rng.random::<f64>();
        let theta = u.sqrt().asin();
        let (sin, cos) = theta.sin_cos();
        let global = Complex64::from_polar(1.0, alpha);
        let m = Self::new(
            global * Complex64::from_polar(cos, psi),
            global * Complex64::from_polar(sin, chi),
            -global * Complex64::from_polar(sin, -chi),
            global * Complex64::from_polar(cos, -psi),
        );
        debug_assert!(m.is_lossless(), "Haar sample failed the lossless check");
        m
    }

    pub fn det(&self) -> Complex64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn trace(&self) -> Complex64 {
        self.m[0][0] + self.m[1][1]
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::new(
            self.m[0][0].conj(),
            self.m[1][0].conj(),
            self.m[0][1].conj(),
            self.m[1][1].conj(),
        )
    }

    /// Largest entrywise deviation of `M†M` from the identity.
    pub fn unitarity_error(&self) -> f64 {
        let g = self.adjoint() * *self;
        let id = Self::identity();
        g.entries()
            .iter()
            .zip(id.entries().iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Lossless check: unitary within [`LOSSLESS_TOL`], `|det| ≤ 1` and
    /// `|trace| ≤ 2` (bounds on moduli, with the same slack).
    pub fn is_lossless(&self) -> bool {
        self.unitarity_error() < LOSSLESS_TOL
            && self.det().norm() <= 1.0 + LOSSLESS_TOL
            && self.trace().norm() <= 2.0 + LOSSLESS_TOL
    }

    pub fn apply(&self, v: &JonesVector) -> JonesVector {
        JonesVector {
            x: self.m[0][0] * v.x + self.m[0][1] * v.y,
            y: self.m[1][0] * v.x + self.m[1][1] * v.y,
        }
    }

    /// Largest entrywise absolute difference to another matrix.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.entries()
            .iter()
            .zip(other.entries().iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Mul for JonesMatrix {
    type Output = JonesMatrix;

    fn mul(self, rhs: JonesMatrix) -> JonesMatrix {
        let a = &self.m;
        let b = &rhs.m;
        JonesMatrix::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

impl Mul<JonesVector> for JonesMatrix {
    type Output = JonesVector;

    fn mul(self, rhs: JonesVector) -> JonesVector {
        self.apply(&rhs)
    }
}

impl fmt::Display for JonesMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{}, {}], [{}, {}]]",
            self.m[0][0], self.m[0][1], self.m[1][0], self.m[1][1]
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn symmetric_split() {
        let v = JonesVector::from_observables(0.5, FRAC_PI_2).unwrap();
        assert_abs_diff_eq!(v.ex(), 0.5f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(v.ey(), 0.5f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(v.phix(), 0.0);
        assert_abs_diff_eq!(v.phiy(), FRAC_PI_2, epsilon = 1e-15);
        assert_abs_diff_eq!(v.norm_sqr(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn quarter_intensity() {
        let v = JonesVector::from_observables(0.25, 0.0).unwrap();
        assert_eq!(v.ex(), 0.5);
        assert_abs_diff_eq!(v.ey(), 0.75f64.sqrt(), epsilon = 1e-15);
        assert_eq!(v.phix(), 0.0);
        assert_eq!(v.phiy(), 0.0);
    }

    #[test]
    fn challenge_domain_is_enforced() {
        for (ex2, dphi) in [(0.0, 1.0), (1.0, 1.0), (-0.1, 0.0), (0.5, -1e-9), (0.5, TAU), (f64::NAN, 0.0)] {
            assert!(matches!(
                JonesVector::from_observables(ex2, dphi),
                Err(crate::Error::Domain(_))
            ));
        }
    }

    #[test]
    fn lossless_examples() {
        assert!(JonesMatrix::identity().is_lossless());
        assert!(!JonesMatrix::from_real(2.0, 0.0, 0.0, 0.0).is_lossless());
        let t = 0.3;
        let diag = JonesMatrix::new(
            Complex64::from_polar(1.0, t),
            ZERO,
            ZERO,
            Complex64::from_polar(1.0, -t),
        );
        assert!(diag.is_lossless());
        // Unitary but scaled: fails on unitarity before the moduli bounds.
        let scaled = JonesMatrix::from_real(0.5, 0.0, 0.0, 0.5);
        assert!(!scaled.is_lossless());
    }

    #[test]
    fn apply_examples() {
        let v = JonesVector::from_observables(0.3, 1.0).unwrap();
        assert_eq!(JonesMatrix::identity().apply(&v), v);

        let swap = JonesMatrix::from_real(0.0, 1.0, 1.0, 0.0);
        let out = swap * JonesVector::from_polar(1.0, 0.0, 0.0, 0.0);
        assert_eq!(out.ex(), 0.0);
        assert_eq!(out.ey(), 1.0);
    }

    #[test]
    fn degenerate_phase_convention() {
        let v = JonesVector::from_polar(1.0, 0.0, 0.0, 0.0);
        let obs = v.observables().unwrap();
        assert_eq!(obs, Observables::new(1.0, 0.0));
        // A phase on the non-null component does not leak into Δφ.
        let w = JonesVector::from_polar(0.0, 0.0, 2.0, 1.3);
        assert_eq!(w.observables().unwrap(), Observables::new(0.0, 0.0));
    }

    #[test]
    fn null_vector_is_rejected() {
        let v = JonesVector::from_polar(0.0, 0.0, 0.0, 0.0);
        assert!(matches!(v.observables(), Err(crate::Error::Domain(_))));
    }

    #[test]
    fn observables_round_trip_example() {
        let obs = JonesVector::from_observables(0.3, 1.0)
            .unwrap()
            .observables()
            .unwrap();
        assert_abs_diff_eq!(obs.ex2, 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(obs.dphi, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn unnormalized_vectors_are_renormalized() {
        let v = JonesVector::from_polar(3.0, 0.2, 4.0, 0.2 + PI);
        let obs = v.observables().unwrap();
        assert_abs_diff_eq!(obs.ex2, 9.0 / 25.0, epsilon = 1e-15);
        assert_abs_diff_eq!(obs.dphi, PI, epsilon = 1e-12);
    }

    #[test]
    fn wrap_phase_stays_half_open() {
        assert_eq!(wrap_phase(-1e-18), 0.0);
        assert_abs_diff_eq!(wrap_phase(-FRAC_PI_2), 1.5 * PI, epsilon = 1e-15);
        assert_abs_diff_eq!(wrap_phase(TAU + 0.25), 0.25, epsilon = 1e-15);
        assert!(wrap_phase(TAU) < TAU);
    }

    #[test]
    fn haar_samples_are_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let m = JonesMatrix::haar_random(&mut rng);
            assert!(m.unitarity_error() < 1e-10);
            let d = m.det().norm();
            assert!((1.0 - 1e-10..=1.0 + 1e-10).contains(&d), "|det| = {d}");
            assert!(m.is_lossless());
        }
    }

    #[test]
    fn haar_is_deterministic_per_seed() {
        let a = JonesMatrix::haar_random(&mut ChaCha8Rng::seed_from_u64(5));
        let b = JonesMatrix::haar_random(&mut ChaCha8Rng::seed_from_u64(5));
        assert_eq!(a, b);
    }

    #[test]
    fn haar_output_intensity_has_uniform_mean() {
        // For Haar U and a fixed input, E_x^2 of the output is U[0, 1].
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let v = JonesVector::from_observables(0.2, 0.7).unwrap();
        let n = 10_000;
        let mean = (0..n)
            .map(|_| JonesMatrix::haar_random(&mut rng).apply(&v).observables().unwrap().ex2)
            .sum::<f64>()
            / n as f64;
        assert!((mean - 0.5).abs() < 0.02, "mean = {mean}");
    }

    #[test]
    fn matrix_product_matches_sequential_application() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = JonesMatrix::haar_random(&mut rng);
        let b = JonesMatrix::haar_random(&mut rng);
        let v = JonesVector::from_observables(0.4, 2.0).unwrap();
        let direct = (a * b).apply(&v);
        let seq = a.apply(&b.apply(&v));
        assert_abs_diff_eq!((direct.x() - seq.x()).norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!((direct.y() - seq.y()).norm(), 0.0, epsilon = 1e-14);
    }
}
