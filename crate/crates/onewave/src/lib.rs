//! One-wave factorization method for two-dimensional inverse acoustic
//! scattering.
//!
//! The library synthesizes far-field data for simple scatterers and sources,
//! evaluates spectral indicator functions of that data against analytic test
//! disks, and reconstructs convex targets from a *single* far-field pattern.
//!
//! # Method overview
//!
//! A time-harmonic incident wave hits a target `D` and produces a scattered
//! wave whose angular amplitude at infinity is the far-field pattern
//! `u∞(θ̂)`. Classical factorization/sampling methods need `u∞` for *all*
//! incident directions (the far-field operator `F`); the one-wave variant
//! gets by with a single pattern by comparing it against the closed-form
//! far-field eigensystems of auxiliary *test disks* `B_h(z)`:
//!
//! * the sound-soft disk's far-field operator has eigenvalues
//!   `λ_n = −2πC · J_n(kh)/H⁽¹⁾_n(kh)` with eigenfunctions
//!   `φ_n(θ̂) = e^{inθ̂} e^{−ik z·x̂}`,
//! * the Picard-type series `W(z,h) = Σ_j |⟨u∞, φ_j⟩|² / |λ_j|` is finite
//!   if and only if `D ⊆ B_h(z)`,
//! * a Tikhonov-stabilized surrogate `W̃(z,h)` turns that dichotomy into
//!   threshold logic that survives discretization and noise.
//!
//! Two reconstruction schemes build on `W̃`: Scheme I thresholds `W̃(z_n, ·)`
//! along a radius grid for centers `z_n` on a known circle and intersects the
//! resulting disks; Scheme II sums `W̃(z_n, |x−z_n|)` into an indicator field
//! whose small values trace out the target's convex hull.
//!
//! # Modules
//!
//! * [`specfun`] — cylinder functions `J_n`, `Y_n`, `H⁽¹⁾_n` and derivatives
//!   (the only transcendental kernel needed).
//! * [`linalg`] — dense complex Hermitian eigendecomposition, SVD,
//!   truncated-SVD least squares, LU, matrix absolute value.
//! * [`forward`] — far-field synthesis for point scatterers, disks, polygon
//!   sources and sound-soft polygon obstacles; multistatic matrices; noise.
//! * [`spectral`] — test-disk eigensystems and data inner products.
//! * [`indicators`] — the one-wave series, its regularized form, the ESM
//!   comparison indicator, and classical multi-wave indicators.
//! * [`imaging`] — Scheme I / Scheme II reconstructions and field output.
//! * [`cli`] — the `onewave` command-line front end
//!   (`synthesize` / `invert` / `spectrum` / `sweep`).
//!
//! # Quick start
//!
//! ```
//! use onewave::forward::{point_far_field, Direction};
//! use onewave::spectral::{spectral_system, TestDisk, BoundaryCondition};
//! use onewave::indicators::{regularized_indicator, RegularizationParams};
//!
//! // Far field of a point target at (-2, 0) for wavenumber k = 6.
//! let k = 6.0;
//! let u = point_far_field(&[[-2.0, 0.0]], k, 512).unwrap();
//!
//! // Probe it with test disks centered at (4, 0): the indicator stays tiny
//! // until the disk radius h reaches the distance 6 to the target.
//! let reg = RegularizationParams { alpha: 1e-13, truncation: 60 };
//! let small = {
//!     let disk = TestDisk::sound_soft([4.0, 0.0], 5.0);
//!     let spec = spectral_system(&disk, k, 60).unwrap();
//!     regularized_indicator(&u, &spec, &reg).unwrap()
//! };
//! let large = {
//!     let disk = TestDisk::sound_soft([4.0, 0.0], 7.0);
//!     let spec = spectral_system(&disk, k, 60).unwrap();
//!     regularized_indicator(&u, &spec, &reg).unwrap()
//! };
//! assert!(large.value > 100.0 * small.value);
//! # let _ = Direction::new(0.0);
//! ```

pub mod cli;
pub mod forward;
pub mod imaging;
pub mod indicators;
pub mod linalg;
pub mod specfun;
pub mod spectral;
