//! Far-field synthesis for every scatterer and source class used by the
//! inversion schemes: point scatterers, disks (analytic series), polygonal
//! sources (closed-form triangle integrals), and polygonal sound-soft
//! obstacles (numerical boundary solvers), plus multistatic matrices, noise
//! injection, and the on-disk file formats.
//!
//! # Conventions
//!
//! The scattered/radiated field obeys `u^s(x) ≈ e^{ikr}/sqrt(r)·u∞(x̂)` as
//! `r → ∞`; the 2D fundamental solution `(i/4)H_0^(1)(k|x−y|)` then has
//! far-field coefficient `γ·e^{−ik x̂·y}` with `γ = e^{iπ/4}/sqrt(8πk)`.
//! Directions are unit vectors `x̂(θ) = (cos θ, sin θ)`; patterns are sampled
//! at the uniform angles `θ_j = 2πj/n_theta`.
//!
//! # Polygonal obstacles: two solvers
//!
//! [`polygon_obstacle_far_field`] is the method of fundamental solutions
//! (MFS): point charges inside the obstacle, truncated-SVD collocation fit,
//! and an a-posteriori boundary-residual gate that rejects bad solutions.
//! MFS is spectrally accurate for smooth boundaries but **cannot** meet a
//! `1e−3` residual gate on polygons with true corners: the scattered field
//! has branch-point singularities at the corners, so no superposition of
//! interior point sources converges faster than algebraically there. For
//! corner domains use [`NystromSolver`], a combined-field boundary-integral
//! solver with a corner-graded Kress quadrature, which passes the same gate
//! with orders of magnitude to spare. Both report the measured residual, so
//! the guarantee is identical — only the achievable accuracy differs.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::linalg::{ComplexMatrix, LinalgError, LuDecomposition};
use crate::specfun::{bessel_j_all, hankel1_all, SpecFunError, EULER_GAMMA};

use std::f64::consts::{FRAC_PI_4, PI, TAU};

/// 2D coordinate (length units).
pub type Point = [f64; 2];

/// Patterns are sampled on at least this many angles.
pub const MIN_N_THETA: usize = 16;

/// Hard cap on the disk-series truncation order.
const TRUNCATION_CAP: usize = 150;
/// Disk-series tail bound: truncation stops once `|r_N| < TAIL_BOUND`.
const TAIL_BOUND: f64 = 1e-16;
/// Boundary solvers reject solutions whose residual exceeds this times
/// `max|u^i|`.
const RESIDUAL_GATE: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum ForwardError {
    #[error("invalid parameter: {context}")]
    InvalidParameter { context: String },
    #[error("invalid scene: {reason}")]
    InvalidScene { reason: String },
    #[error(
        "disk series truncation insufficient: kh = {kh:.6}, tail |r_N| = {min_tail:.3e} \
         at the order cap {cap} (bound {TAIL_BOUND:.1e})"
    )]
    TruncationInsufficient { kh: f64, cap: usize, min_tail: f64 },
    #[error("degenerate triangle (area {area:.3e})")]
    DegenerateTriangle { area: f64 },
    #[error("boundary residual {residual:.6e} exceeds the gate {gate:.1e}")]
    ResidualTooLarge { residual: f64, gate: f64 },
    #[error("scene does not support this operation: {context}")]
    UnsupportedScene { context: String },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

// --------------------------------------------------------------------
// Small vector helpers
// --------------------------------------------------------------------

fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}

/// `e^{ix}`.
fn cis(x: f64) -> Complex64 {
    Complex64::new(x.cos(), x.sin())
}

/// 2D far-field coefficient of the fundamental solution:
/// `γ = e^{iπ/4}/sqrt(8πk)`.
fn far_field_gamma(k: f64) -> Complex64 {
    Complex64::from_polar(1.0 / (8.0 * PI * k).sqrt(), FRAC_PI_4)
}

/// Disk-series constant `C = sqrt(2/(kπ))·e^{−iπ/4}`.
pub(crate) fn series_constant(k: f64) -> Complex64 {
    Complex64::from_polar((2.0 / (k * PI)).sqrt(), -FRAC_PI_4)
}

fn check_wavenumber(k: f64) -> Result<(), ForwardError> {
    if !(k.is_finite() && k > 0.0) {
        return Err(ForwardError::InvalidParameter {
            context: format!("wavenumber k must be finite and positive, got {k}"),
        });
    }
    Ok(())
}

fn check_n_theta(n_theta: usize) -> Result<(), ForwardError> {
    if n_theta < MIN_N_THETA {
        return Err(ForwardError::InvalidParameter {
            context: format!("n_theta must be at least {MIN_N_THETA}, got {n_theta}"),
        });
    }
    Ok(())
}

// --------------------------------------------------------------------
// Domain types
// --------------------------------------------------------------------

/// A direction on the unit circle, stored as an angle in canonical range
/// `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    theta: f64,
}

impl Direction {
    /// Wraps any finite angle into `[0, 2π)`.
    pub fn new(theta: f64) -> Self {
        assert!(theta.is_finite(), "direction angle must be finite");
        let mut t = theta.rem_euclid(TAU);
        // rem_euclid can return exactly TAU after rounding for tiny
        // negative inputs; fold that back to zero.
        if t >= TAU {
            t = 0.0;
        }
        Self { theta: t }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Unit vector `(cos θ, sin θ)`.
    pub fn unit(&self) -> Point {
        [self.theta.cos(), self.theta.sin()]
    }

    /// The opposite direction `θ + π`.
    pub fn opposite(&self) -> Self {
        Self::new(self.theta + PI)
    }
}

/// A far-field pattern sampled at the uniform angles `θ_j = 2πj/n_theta`.
#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldPattern {
    k: f64,
    values: Vec<Complex64>,
}

impl FarFieldPattern {
    /// Validates `k > 0`, at least [`MIN_N_THETA`] samples, all finite.
    pub fn new(k: f64, values: Vec<Complex64>) -> Result<Self, ForwardError> {
        check_wavenumber(k)?;
        check_n_theta(values.len())?;
        if let Some(j) = values
            .iter()
            .position(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            return Err(ForwardError::InvalidParameter {
                context: format!("far-field value at index {j} is not finite"),
            });
        }
        Ok(Self { k, values })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn n_theta(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Sample angle of index `j`.
    pub fn theta(&self, j: usize) -> f64 {
        TAU * j as f64 / self.values.len() as f64
    }
}

/// Boundary condition of an obstacle or test disk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryCondition {
    /// Dirichlet `u = 0`.
    SoundSoft,
    /// `∂_ν u + η u = 0`; requires `Im(η) ≥ 0`.
    Impedance(Complex64),
}

impl BoundaryCondition {
    pub fn validate(&self) -> Result<(), ForwardError> {
        if let BoundaryCondition::Impedance(eta) = self {
            if !(eta.re.is_finite() && eta.im.is_finite()) || eta.im < 0.0 {
                return Err(ForwardError::InvalidParameter {
                    context: format!("impedance eta must be finite with Im(eta) >= 0, got {eta}"),
                });
            }
        }
        Ok(())
    }
}

/// Source-prefactor convention for radiating polygon sources.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// `γ = e^{iπ/4}/sqrt(8πk)` — the standard 2D far-field coefficient,
    /// consistent with the disk-series convention. The default.
    Standard,
    /// `γ = i/4` — the bare fundamental-solution coefficient, as written in
    /// some derivations of the source far field. Indicator finiteness is
    /// invariant under this constant rescaling.
    PaperLiteral,
}

/// Independent point scatterers of unit strength (multiple scattering
/// neglected).
#[derive(Debug, Clone, PartialEq)]
pub struct PointScatterers {
    pub points: Vec<Point>,
}

/// A disk obstacle.
#[derive(Debug, Clone, PartialEq)]
pub struct DiskObstacle {
    pub center: Point,
    pub radius: f64,
    pub bc: BoundaryCondition,
}

/// A convex polygonal source region with constant density.
#[derive(Debug, Clone, PartialEq)]
pub struct PolygonSource {
    /// Strictly convex, counter-clockwise.
    pub vertices: Vec<Point>,
    pub density: Complex64,
    pub normalization: Normalization,
}

/// A convex sound-soft polygonal obstacle.
#[derive(Debug, Clone, PartialEq)]
pub struct PolygonObstacle {
    /// Strictly convex, counter-clockwise.
    pub vertices: Vec<Point>,
}

/// A forward-model description.
#[derive(Debug, Clone, PartialEq)]
pub enum Scene {
    PointScatterers(PointScatterers),
    DiskObstacle(DiskObstacle),
    PolygonSource(PolygonSource),
    PolygonObstacle(PolygonObstacle),
}

fn validate_points(points: &[Point]) -> Result<(), ForwardError> {
    for (i, p) in points.iter().enumerate() {
        if !(p[0].is_finite() && p[1].is_finite()) {
            return Err(ForwardError::InvalidScene {
                reason: format!("coordinate {i} is not finite"),
            });
        }
    }
    Ok(())
}

/// Strict convexity + counter-clockwise orientation. A repeated vertex
/// forces a zero or negative turn, so no separate duplicate check is needed.
fn validate_polygon(vertices: &[Point]) -> Result<(), ForwardError> {
    validate_points(vertices)?;
    let n = vertices.len();
    if n < 3 {
        return Err(ForwardError::InvalidScene {
            reason: format!("polygon needs at least 3 vertices, got {n}"),
        });
    }
    let scale = vertices
        .iter()
        .flat_map(|v| v.iter())
        .fold(1.0_f64, |m, &x| m.max(x.abs()));
    let eps = 1e-12 * scale * scale;
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        let c = vertices[(i + 2) % n];
        let turn = cross(sub(b, a), sub(c, b));
        if turn <= eps {
            return Err(ForwardError::InvalidScene {
                reason: format!(
                    "polygon must be strictly convex and counter-clockwise \
                     (turn {turn:.3e} at vertex {})",
                    (i + 1) % n
                ),
            });
        }
    }
    Ok(())
}

impl Scene {
    /// Checks the structural invariants of the scene description.
    pub fn validate(&self) -> Result<(), ForwardError> {
        match self {
            Scene::PointScatterers(s) => validate_points(&s.points),
            Scene::DiskObstacle(s) => {
                validate_points(std::slice::from_ref(&s.center))?;
                if !(s.radius.is_finite() && s.radius > 0.0) {
                    return Err(ForwardError::InvalidScene {
                        reason: format!("disk radius must be positive, got {}", s.radius),
                    });
                }
                s.bc.validate()
            }
            Scene::PolygonSource(s) => {
                validate_polygon(&s.vertices)?;
                if !(s.density.re.is_finite() && s.density.im.is_finite()) {
                    return Err(ForwardError::InvalidScene {
                        reason: "source density is not finite".into(),
                    });
                }
                Ok(())
            }
            Scene::PolygonObstacle(s) => validate_polygon(&s.vertices),
        }
    }
}

// --------------------------------------------------------------------
// Point scatterers
// --------------------------------------------------------------------

/// Far field of independent unit-strength point scatterers:
/// `u∞(θ_j) = Σ_m exp(−i·k·z*_m·x̂(θ_j))`.
pub fn point_far_field(
    points: &[Point],
    k: f64,
    n_theta: usize,
) -> Result<FarFieldPattern, ForwardError> {
    check_wavenumber(k)?;
    check_n_theta(n_theta)?;
    validate_points(points)?;
    if points.is_empty() {
        return Err(ForwardError::InvalidScene {
            reason: "point_far_field needs at least one scatterer".into(),
        });
    }
    let values = (0..n_theta)
        .map(|j| {
            let th = TAU * j as f64 / n_theta as f64;
            let xhat = [th.cos(), th.sin()];
            points.iter().map(|&z| cis(-k * dot(z, xhat))).sum()
        })
        .collect();
    FarFieldPattern::new(k, values)
}

// --------------------------------------------------------------------
// Disk obstacle (analytic series)
// --------------------------------------------------------------------

/// Reflection coefficients `r_n = J_n(kh)/H_n^(1)(kh)` (sound-soft) or
/// `(kJ'_n + ηJ_n)/(kH'_n + ηH_n)` (impedance) for exactly `n = 0..=n_max`,
/// with no tail-convergence requirement — spectral truncations ask for the
/// orders they need, which may sit far short of the series tail at large
/// `kh`. Non-finite Hankel values (deep saturation of `Y_n`) yield
/// `r_n = 0`.
pub(crate) fn reflection_ladder(
    k: f64,
    h: f64,
    bc: BoundaryCondition,
    n_max: usize,
) -> Result<Vec<Complex64>, ForwardError> {
    check_wavenumber(k)?;
    if !(h.is_finite() && h > 0.0) {
        return Err(ForwardError::InvalidParameter {
            context: format!("disk radius must be positive, got {h}"),
        });
    }
    bc.validate()?;
    if n_max > crate::specfun::MAX_ORDER as usize {
        return Err(ForwardError::InvalidParameter {
            context: format!(
                "order {n_max} exceeds the supported range {}",
                crate::specfun::MAX_ORDER
            ),
        });
    }
    let t = k * h;
    let j = bessel_j_all(n_max + 1, t);
    let hk = hankel1_all(n_max + 1, t)?;
    let finite = |z: Complex64| z.re.is_finite() && z.im.is_finite();

    let mut r = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let rn = match bc {
            BoundaryCondition::SoundSoft => {
                if finite(hk[n]) {
                    Complex64::new(j[n], 0.0) / hk[n]
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
            BoundaryCondition::Impedance(eta) => {
                let jp = if n == 0 { -j[1] } else { 0.5 * (j[n - 1] - j[n + 1]) };
                let hp = if n == 0 {
                    -hk[1]
                } else {
                    0.5 * (hk[n - 1] - hk[n + 1])
                };
                let den = k * hp + eta * hk[n];
                if finite(hk[n]) && finite(hp) && finite(den) && den.norm() > 0.0 {
                    (k * jp + eta * j[n]) / den
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
        };
        r.push(rn);
    }
    Ok(r)
}

/// Tail-seeking variant for series synthesis: coefficients for
/// `n = 0..=N` where `N` is the smallest order `≥ min_n` with
/// `|r_N| < 1e−16`, erroring if the cap of 150 cannot reach the tail.
pub(crate) fn reflection_coefficients(
    k: f64,
    h: f64,
    bc: BoundaryCondition,
    min_n: usize,
) -> Result<Vec<Complex64>, ForwardError> {
    if min_n > TRUNCATION_CAP {
        return Err(ForwardError::InvalidParameter {
            context: format!("truncation order {min_n} exceeds the cap {TRUNCATION_CAP}"),
        });
    }
    let mut r = reflection_ladder(k, h, bc, TRUNCATION_CAP)?;
    let t = k * h;

    match (min_n..=TRUNCATION_CAP).find(|&n| r[n].norm() < TAIL_BOUND) {
        Some(n_eff) => {
            r.truncate(n_eff + 1);
            Ok(r)
        }
        None => {
            let min_tail = r[min_n..].iter().map(|v| v.norm()).fold(f64::MAX, f64::min);
            Err(ForwardError::TruncationInsufficient {
                kh: t,
                cap: TRUNCATION_CAP,
                min_tail,
            })
        }
    }
}

/// Analytic far field of a disk obstacle under a plane wave from direction
/// `d`:
///
/// `u∞(θ̂) = e^{ikz·(d−x̂)}·(−C)·Σ_{|n|≤N} r_n e^{in(θ̂−θ_d)}`,
/// `C = sqrt(2/(kπ))·e^{−iπ/4}`.
///
/// `truncation` is the minimum series order; the series is extended
/// automatically until the tail bound `|r_N| < 1e−16` holds (pass 0 for a
/// fully automatic choice). If the bound is not reached by order 150 the
/// call fails with [`ForwardError::TruncationInsufficient`].
pub fn disk_far_field(
    center: Point,
    radius: f64,
    bc: BoundaryCondition,
    k: f64,
    d: Direction,
    n_theta: usize,
    truncation: usize,
) -> Result<FarFieldPattern, ForwardError> {
    check_n_theta(n_theta)?;
    validate_points(std::slice::from_ref(&center))?;
    let r = reflection_coefficients(k, radius, bc, truncation)?;
    let c = series_constant(k);
    let dvec = d.unit();
    let z_dot_d = dot(center, dvec);

    let values = (0..n_theta)
        .map(|jj| {
            let th = TAU * jj as f64 / n_theta as f64;
            let xhat = [th.cos(), th.sin()];
            let delta = th - d.theta();
            // r_{−n} = r_n, so the two-sided sum collapses to a cosine series.
            let (cd, mut c_prev, mut c_cur) = (delta.cos(), 1.0, delta.cos());
            let mut sum = r[0];
            for &rn in &r[1..] {
                sum += rn * (2.0 * c_cur);
                let c_next = 2.0 * cd * c_cur - c_prev;
                c_prev = c_cur;
                c_cur = c_next;
            }
            cis(k * (z_dot_d - dot(center, xhat))) * (-c) * sum
        })
        .collect();
    FarFieldPattern::new(k, values)
}

// --------------------------------------------------------------------
// Triangle source integral
// --------------------------------------------------------------------

/// `g(x) = (e^x − 1)/x`, series below `|x| = 1e−3`.
fn expm1_over(x: Complex64) -> Complex64 {
    if x.norm() < 1e-3 {
        let x2 = x * x;
        1.0 + x * 0.5 + x2 / 6.0 + x2 * x / 24.0 + x2 * x2 / 120.0
    } else {
        (x.exp() - 1.0) / x
    }
}

/// Divided difference of `g` on `{a, b}` — equals the iterated simplex
/// integral `∫_0^1 ∫_0^{1−s} e^{as+bt} dt ds`. Switches to the midpoint
/// derivative `g'(m)` (2nd-order Taylor of the difference quotient) when
/// `|a − b| < 1e−6` to dodge cancellation, and to a joint power series when
/// both arguments are small.
fn ddexp(a: Complex64, b: Complex64) -> Complex64 {
    if (a - b).norm() >= 1e-6 {
        (expm1_over(a) - expm1_over(b)) / (a - b)
    } else {
        let m = 0.5 * (a + b);
        if m.norm() < 1e-3 {
            Complex64::new(0.5, 0.0)
                + (a + b) / 6.0
                + (a * a + a * b + b * b) / 24.0
                + (a * a * a + a * a * b + a * b * b + b * b * b) / 120.0
        } else {
            // g'(m) = (e^m(m−1)+1)/m²
            (m.exp() * (m - 1.0) + 1.0) / (m * m)
        }
    }
}

/// Exact `∫_T exp(−i q·z) dz` over the triangle `(v1, v2, v3)`.
///
/// With `a = −i q·(v2−v1)`, `b = −i q·(v3−v1)` the integral is
/// `2·Area·e^{−i q·v1}·ddexp(a, b)`; all small-denominator regimes
/// (`|q·edge| < 1e−6`) are served by Taylor fallbacks inside [`ddexp`].
pub fn triangle_exp_integral(
    v1: Point,
    v2: Point,
    v3: Point,
    q: [f64; 2],
) -> Result<Complex64, ForwardError> {
    validate_points(&[v1, v2, v3])?;
    if !(q[0].is_finite() && q[1].is_finite()) {
        return Err(ForwardError::InvalidParameter {
            context: "wave vector q must be finite".into(),
        });
    }
    let twice_area = cross(sub(v2, v1), sub(v3, v1));
    let area = 0.5 * twice_area.abs();
    if area <= 1e-12 {
        return Err(ForwardError::DegenerateTriangle { area });
    }
    let a = Complex64::new(0.0, -dot(q, sub(v2, v1)));
    let b = Complex64::new(0.0, -dot(q, sub(v3, v1)));
    Ok(twice_area.abs() * cis(-dot(q, v1)) * ddexp(a, b))
}

// --------------------------------------------------------------------
// Polygon source
// --------------------------------------------------------------------

/// Far field of a convex polygonal source with constant density:
/// `u∞(x̂) = γ·density·∫_D e^{−ik x̂·z} dz`, the integral assembled by
/// fan-triangulating from the first vertex. `γ` follows the scene's
/// [`Normalization`].
pub fn polygon_source_far_field(
    scene: &PolygonSource,
    k: f64,
    n_theta: usize,
) -> Result<FarFieldPattern, ForwardError> {
    check_wavenumber(k)?;
    check_n_theta(n_theta)?;
    Scene::PolygonSource(scene.clone()).validate()?;
    let gamma = match scene.normalization {
        Normalization::Standard => far_field_gamma(k),
        Normalization::PaperLiteral => Complex64::new(0.0, 0.25),
    };
    let v = &scene.vertices;
    let values = (0..n_theta)
        .map(|j| {
            let th = TAU * j as f64 / n_theta as f64;
            let q = [k * th.cos(), k * th.sin()];
            let mut integral = Complex64::new(0.0, 0.0);
            for i in 1..v.len() - 1 {
                integral += triangle_exp_integral(v[0], v[i], v[i + 1], q)?;
            }
            // Multiply the density last so that rescaling it rescales the
            // value exactly (bit-for-bit linearity).
            Ok(gamma * integral * scene.density)
        })
        .collect::<Result<Vec<_>, ForwardError>>()?;
    FarFieldPattern::new(k, values)
}

// --------------------------------------------------------------------
// Shared polygon geometry helpers
// --------------------------------------------------------------------

/// Area centroid of a convex counter-clockwise polygon.
fn polygon_centroid(v: &[Point]) -> Point {
    let n = v.len();
    let mut twice_area = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    for i in 0..n {
        let a = v[i];
        let b = v[(i + 1) % n];
        let w = cross(a, b);
        twice_area += w;
        cx += (a[0] + b[0]) * w;
        cy += (a[1] + b[1]) * w;
    }
    [cx / (3.0 * twice_area), cy / (3.0 * twice_area)]
}

/// Cumulative edge lengths: `cum[i]` is the arc length up to vertex `i`,
/// with `cum[n]` the full perimeter.
fn cumulative_lengths(v: &[Point]) -> Vec<f64> {
    let n = v.len();
    let mut cum = Vec::with_capacity(n + 1);
    cum.push(0.0);
    for i in 0..n {
        let len = norm(sub(v[(i + 1) % n], v[i]));
        cum.push(cum[i] + len);
    }
    cum
}

/// Boundary point at arc-length position `s ∈ [0, perimeter)`.
fn point_at_arc(v: &[Point], cum: &[f64], s: f64) -> Point {
    let n = v.len();
    let mut edge = match cum[1..].iter().position(|&c| s < c) {
        Some(e) => e,
        None => n - 1,
    };
    if edge >= n {
        edge = n - 1;
    }
    let a = v[edge];
    let b = v[(edge + 1) % n];
    let frac = (s - cum[edge]) / (cum[edge + 1] - cum[edge]);
    [a[0] + frac * (b[0] - a[0]), a[1] + frac * (b[1] - a[1])]
}

// --------------------------------------------------------------------
// Polygon obstacle: method of fundamental solutions
// --------------------------------------------------------------------

/// MFS discretization parameters. Defaults are tuned for smooth-ish convex
/// polygons at moderate wavenumbers.
#[derive(Debug, Clone)]
pub struct MfsParams {
    /// Charges sit at `centroid + scale·(boundary − centroid)`.
    pub charge_scale: f64,
    pub n_charge: usize,
    pub n_coll: usize,
    /// Corner-grading exponent of the collocation spacing.
    pub grading: f64,
    /// Relative TSVD cutoff of the collocation fit.
    pub tsvd_cutoff: f64,
    /// Number of boundary check points for the residual gate.
    pub n_check: usize,
}

impl Default for MfsParams {
    fn default() -> Self {
        Self {
            charge_scale: 0.7,
            n_charge: 128,
            n_coll: 256,
            grading: 3.0,
            tsvd_cutoff: 1e-12,
            n_check: 512,
        }
    }
}

/// A solved obstacle problem: the far field plus the measured boundary
/// residual (already below the gate, or the solve would have failed).
#[derive(Debug, Clone)]
pub struct BoundarySolution {
    pub pattern: FarFieldPattern,
    /// `max |u^s + u^i|` over the check points, relative to `max|u^i| = 1`.
    pub boundary_residual: f64,
}

/// Corner-graded edge map `s^p/(s^p + (1−s)^p)`.
fn graded(s: f64, p: f64) -> f64 {
    let a = s.powf(p);
    let b = (1.0 - s).powf(p);
    a / (a + b)
}

/// Sound-soft polygon far field by the method of fundamental solutions with
/// explicit parameters. Fails with [`ForwardError::ResidualTooLarge`] when
/// the boundary residual at the check points exceeds `1e−3·max|u^i|` — which
/// it will for true corner domains; see the module docs and
/// [`NystromSolver`].
pub fn polygon_obstacle_far_field_mfs(
    scene: &PolygonObstacle,
    k: f64,
    d: Direction,
    n_theta: usize,
    params: &MfsParams,
) -> Result<BoundarySolution, ForwardError> {
    check_wavenumber(k)?;
    check_n_theta(n_theta)?;
    Scene::PolygonObstacle(scene.clone()).validate()?;
    if params.n_charge == 0 || params.n_coll < params.n_charge {
        return Err(ForwardError::InvalidParameter {
            context: "MFS needs n_coll >= n_charge >= 1".into(),
        });
    }
    let v = &scene.vertices;
    let n_edges = v.len();
    let centroid = polygon_centroid(v);
    let cum = cumulative_lengths(v);
    let perimeter = cum[n_edges];

    // Charge points: uniform in arc length, pulled toward the centroid.
    let charges: Vec<Point> = (0..params.n_charge)
        .map(|j| {
            let s = (j as f64 + 0.5) / params.n_charge as f64 * perimeter;
            let b = point_at_arc(v, &cum, s);
            [
                centroid[0] + params.charge_scale * (b[0] - centroid[0]),
                centroid[1] + params.charge_scale * (b[1] - centroid[1]),
            ]
        })
        .collect();

    // Collocation points: per-edge corner-graded spacing.
    let mut coll: Vec<Point> = Vec::with_capacity(params.n_coll);
    let base = params.n_coll / n_edges;
    let extra = params.n_coll % n_edges;
    for e in 0..n_edges {
        let m = base + usize::from(e < extra);
        let a = v[e];
        let b = v[(e + 1) % n_edges];
        for i in 0..m {
            let w = graded((i as f64 + 0.5) / m as f64, params.grading);
            coll.push([a[0] + w * (b[0] - a[0]), a[1] + w * (b[1] - a[1])]);
        }
    }

    let dvec = d.unit();
    let phi = |x: Point, y: Point| -> Result<Complex64, ForwardError> {
        let t = k * norm(sub(x, y));
        Ok(Complex64::new(0.0, 0.25) * hankel1_all(0, t)?[0])
    };

    // Collocation system Φ c = −u^i.
    let mut data = Vec::with_capacity(coll.len() * charges.len());
    for &x in &coll {
        for &y in &charges {
            data.push(phi(x, y)?);
        }
    }
    let a_mat = ComplexMatrix::from_row_major(coll.len(), charges.len(), data)?;
    let rhs: Vec<Complex64> = coll.iter().map(|&x| -cis(k * dot(x, dvec))).collect();
    let coeff = crate::linalg::tsvd_solve(&a_mat, &rhs, params.tsvd_cutoff)?;

    // Residual gate at offset check points.
    let mut residual = 0.0_f64;
    for i in 0..params.n_check {
        let s = (i as f64 + 0.37) / params.n_check as f64 * perimeter;
        let x = point_at_arc(v, &cum, s);
        let mut us = Complex64::new(0.0, 0.0);
        for (cj, &y) in coeff.iter().zip(&charges) {
            us += cj * phi(x, y)?;
        }
        residual = residual.max((us + cis(k * dot(x, dvec))).norm());
    }
    if residual > RESIDUAL_GATE {
        return Err(ForwardError::ResidualTooLarge {
            residual,
            gate: RESIDUAL_GATE,
        });
    }

    let gamma = far_field_gamma(k);
    let values = (0..n_theta)
        .map(|j| {
            let th = TAU * j as f64 / n_theta as f64;
            let xhat = [th.cos(), th.sin()];
            gamma
                * coeff
                    .iter()
                    .zip(&charges)
                    .map(|(cj, &y)| cj * cis(-k * dot(xhat, y)))
                    .sum::<Complex64>()
        })
        .collect();
    Ok(BoundarySolution {
        pattern: FarFieldPattern::new(k, values)?,
        boundary_residual: residual,
    })
}

/// Sound-soft polygon far field via MFS with default parameters. See
/// [`polygon_obstacle_far_field_mfs`] for the gate semantics and
/// [`NystromSolver`] for corner domains.
pub fn polygon_obstacle_far_field(
    scene: &PolygonObstacle,
    k: f64,
    d: Direction,
    n_theta: usize,
) -> Result<FarFieldPattern, ForwardError> {
    polygon_obstacle_far_field_mfs(scene, k, d, n_theta, &MfsParams::default())
        .map(|s| s.pattern)
}

// --------------------------------------------------------------------
// Polygon obstacle: combined-field Nyström solver
// --------------------------------------------------------------------

/// Number of boundary check points for the Nyström residual gate.
const NYSTROM_N_CHECK: usize = 512;
/// Corner-grading exponent of the Kress parametrization. Higher exponents
/// grade harder but underflow the derivative near corners; 4 is the sweet
/// spot at these resolutions.
const KRESS_EXPONENT: f64 = 4.0;

/// Combined-field boundary-integral solver for sound-soft convex polygons.
///
/// Represents `u^s = DL[φ] − iη·SL[φ]` with coupling `η = k`; the boundary
/// condition gives the uniquely solvable second-kind equation
/// `(½I + K − iηS)φ = −u^i`. Discretization: Kress corner-graded global
/// parametrization (each edge mapped through `w(s) = s^p/(s^p+(1−s)^p)`),
/// midpoint node grid, Kusmaul–Martensen splitting of the log-singular
/// kernels, and the spectral log-quadrature weights `R_j`. One LU
/// factorization serves every incident direction.
///
/// Every solve is gated a posteriori: the boundary values of the computed
/// scattered field are interpolated/requadratured at off-node check points
/// and compared against `−u^i`; residuals above `1e−3` are rejected.
pub struct NystromSolver {
    k: f64,
    eta: f64,
    n: usize,
    /// Node positions.
    x: Vec<Point>,
    /// Parametrization speeds `|x'(t_j)|`.
    sp: Vec<f64>,
    /// Unit outward normals.
    nrm: Vec<Point>,
    lu: LuDecomposition,
    /// Combined boundary-evaluation matrix at the check points: row `c`
    /// against density values `ψ` yields `u^s(x*_c)` (exterior limit).
    check_eval: ComplexMatrix,
    /// Check-point positions (for the incident field).
    check_x: Vec<Point>,
}

/// Kress-graded boundary position and derivative at global parameter
/// `t ∈ [0, 2π)`.
fn kress_point(v: &[Point], t: f64) -> (Point, Point) {
    let n_edges = v.len();
    let span = TAU / n_edges as f64;
    let mut e = (t / span) as usize;
    if e >= n_edges {
        e = n_edges - 1;
    }
    let s = (t - e as f64 * span) / span;
    let a = v[e];
    let b = v[(e + 1) % n_edges];
    let p = KRESS_EXPONENT;
    let (sp_, sm) = (s.powf(p), (1.0 - s).powf(p));
    let w = sp_ / (sp_ + sm);
    // w'(s) = p·s^{p−1}(1−s)^{p−1}/(s^p+(1−s)^p)²
    let wp = p * s.powf(p - 1.0) * (1.0 - s).powf(p - 1.0) / ((sp_ + sm) * (sp_ + sm));
    let pos = [a[0] + w * (b[0] - a[0]), a[1] + w * (b[1] - a[1])];
    let scale = wp / span;
    let deriv = [scale * (b[0] - a[0]), scale * (b[1] - a[1])];
    (pos, deriv)
}

/// Kress quadrature weight `R(Δ)` for the kernel `ln(4 sin²(Δ/2))` on an
/// `n`-point periodic grid:
/// `R(Δ) = −(4π/n)·Σ_{m=1}^{n/2−1} cos(mΔ)/m − (4π/n²)·cos(nΔ/2)`.
fn kress_weight(delta: f64, n: usize) -> f64 {
    let mut s = 0.0;
    for m in 1..n / 2 {
        s += (m as f64 * delta).cos() / m as f64;
    }
    -(4.0 * PI / n as f64) * s - (4.0 * PI / (n * n) as f64) * (0.5 * n as f64 * delta).cos()
}

/// Trigonometric cardinal function `ℓ_j(t)` of the `n`-point grid:
/// `sin(nΔ/2)·cot(Δ/2)/n` with `Δ = t − t_j`.
fn trig_cardinal(delta: f64, n: usize) -> f64 {
    let half = 0.5 * delta;
    if half.sin().abs() < 1e-12 {
        return 1.0;
    }
    (0.5 * n as f64 * delta).sin() * (half.cos() / half.sin()) / n as f64
}

/// The four split-kernel values `(L1, L2, M1, M2)` between a target point
/// (position `xt`, global parameter `tt`) and source node `j`.
fn split_kernels(
    xt: Point,
    tt: f64,
    xj: Point,
    tj: f64,
    nj: Point,
    k: f64,
) -> Result<(f64, Complex64, f64, Complex64), ForwardError> {
    let r = norm(sub(xt, xj));
    let t = k * r;
    let j01 = bessel_j_all(1, t);
    let h01 = hankel1_all(1, t)?;
    let lg = (4.0 * (0.5 * (tt - tj)).sin().powi(2)).ln();
    let m1 = -j01[0] / (4.0 * PI);
    let m2 = Complex64::new(0.0, 0.25) * h01[0] - m1 * lg;
    let dq = dot(sub(xt, xj), nj);
    let l1 = -(k / (4.0 * PI)) * j01[1] * dq / r;
    let l = Complex64::new(0.0, 0.25 * k) * h01[1] * (dq / r);
    let l2 = l - l1 * lg;
    Ok((l1, l2, m1, m2))
}

impl NystromSolver {
    /// Builds the solver with an automatic resolution:
    /// `n = max(512, 64·⌈k⌉, 24·n_vertices)`, rounded up to a multiple of
    /// `2·n_vertices` so the midpoint grid never touches a corner. The
    /// per-vertex floor matters for many-vertex polygons: the graded
    /// parametrization is only C³ at each corner, and the global spectral
    /// rule needs roughly two dozen nodes per edge before that error drops
    /// below the residual gate.
    pub fn new(scene: &PolygonObstacle, k: f64) -> Result<Self, ForwardError> {
        check_wavenumber(k)?;
        let nv = scene.vertices.len().max(1);
        let want = 512_usize
            .max(64 * k.ceil() as usize)
            .max(24 * nv);
        let unit = 2 * nv;
        let n = want.div_ceil(unit) * unit;
        Self::with_resolution(scene, k, n)
    }

    /// Builds the solver with `n` boundary nodes (`n` must be even and a
    /// multiple of `2·n_vertices`).
    pub fn with_resolution(
        scene: &PolygonObstacle,
        k: f64,
        n: usize,
    ) -> Result<Self, ForwardError> {
        check_wavenumber(k)?;
        Scene::PolygonObstacle(scene.clone()).validate()?;
        let nv = scene.vertices.len();
        if n == 0 || n % (2 * nv) != 0 {
            return Err(ForwardError::InvalidParameter {
                context: format!("node count {n} must be a positive multiple of 2*{nv}"),
            });
        }
        let v = &scene.vertices;
        let eta = k;

        // Midpoint node grid and geometry.
        let t_node: Vec<f64> = (0..n).map(|j| TAU * (j as f64 + 0.5) / n as f64).collect();
        let mut x = Vec::with_capacity(n);
        let mut sp = Vec::with_capacity(n);
        let mut nrm = Vec::with_capacity(n);
        for &t in &t_node {
            let (pos, deriv) = kress_point(v, t);
            let s = norm(deriv);
            x.push(pos);
            sp.push(s);
            nrm.push([deriv[1] / s, -deriv[0] / s]);
        }

        // Circulant log-quadrature weights on the node grid.
        let r_wt: Vec<f64> = (0..n)
            .map(|dd| kress_weight(TAU * dd as f64 / n as f64, n))
            .collect();

        // System matrix A[i][j] = δ_ij·(1/(2 sp_j))
        //   + R_{i−j}·(L1 − iη·M1) + (2π/n)·(L2 − iη·M2).
        let w_trap = TAU / n as f64;
        let ie = Complex64::new(0.0, eta);
        let mut a = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    // Diagonal limits on a straight edge: L1 = L2 = 0,
                    // M1 = −1/(4π), M2 = i/4 − γ/(2π) − ln(k·sp/2)/(2π).
                    let m1 = -1.0 / (4.0 * PI);
                    let m2 = Complex64::new(
                        -(EULER_GAMMA + (0.5 * k * sp[i]).ln()) / (2.0 * PI),
                        0.25,
                    );
                    a[(i, i)] = Complex64::new(0.5 / sp[i], 0.0)
                        - ie * (r_wt[0] * m1 + w_trap * m2);
                } else {
                    let (l1, l2, m1, m2) =
                        split_kernels(x[i], t_node[i], x[j], t_node[j], nrm[j], k)?;
                    let d = (i + n - j) % n;
                    a[(i, j)] = r_wt[d] * (l1 - ie * m1) + w_trap * (l2 - ie * m2);
                }
            }
        }
        let lu = LuDecomposition::factor(&a)?;

        // Off-node check points: boundary evaluation = ½φ (trigonometric
        // cardinal interpolation) + Kress requadrature of K − iηS. The
        // points are uniform in *arc length* on the true boundary, mapped
        // into the graded parameter by inverting w per edge — uniform
        // parameter points would land exponentially close to the corners,
        // where φ is singular and the evaluation is hopeless in either
        // exact or floating arithmetic.
        let n_check = NYSTROM_N_CHECK;
        let cum = cumulative_lengths(v);
        let perimeter = cum[nv];
        let span = TAU / nv as f64;
        let mut check_eval = ComplexMatrix::zeros(n_check, n);
        let mut check_x = Vec::with_capacity(n_check);
        for ci in 0..n_check {
            let s_arc = (ci as f64 + 0.31) / n_check as f64 * perimeter;
            let mut e = cum[1..].iter().position(|&c| s_arc < c).unwrap_or(nv - 1);
            if e >= nv {
                e = nv - 1;
            }
            let frac = (s_arc - cum[e]) / (cum[e + 1] - cum[e]);
            let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if graded(mid, KRESS_EXPONENT) < frac {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let tc = (e as f64 + 0.5 * (lo + hi)) * span;
            let (xc, dc) = kress_point(v, tc);
            // Interpolate the smooth density ψ = φ·|x'| trigonometrically and
            // divide by the *check-point* speed; interpolating the grid values
            // ψ_j/sp_j directly would ring near corners, where φ blows up.
            let sp_c = norm(dc);
            check_x.push(xc);
            // R_j(tc) for all j by per-m accumulation.
            let mut rj = vec![0.0_f64; n];
            let zs: Vec<Complex64> = t_node.iter().map(|&tj| cis(tc - tj)).collect();
            let mut pw = zs.clone();
            for m in 1..n / 2 {
                if m > 1 {
                    for (p, &z) in pw.iter_mut().zip(&zs) {
                        *p *= z;
                    }
                }
                let inv = 1.0 / m as f64;
                for (r, p) in rj.iter_mut().zip(&pw) {
                    *r += p.re * inv;
                }
            }
            for (j, r) in rj.iter_mut().enumerate() {
                let delta = tc - t_node[j];
                *r = -(4.0 * PI / n as f64) * *r
                    - (4.0 * PI / (n * n) as f64) * (0.5 * n as f64 * delta).cos();
            }
            for j in 0..n {
                let (l1, l2, m1, m2) = split_kernels(xc, tc, x[j], t_node[j], nrm[j], k)?;
                let cardinal = 0.5 * trig_cardinal(tc - t_node[j], n) / sp_c;
                check_eval[(ci, j)] =
                    Complex64::new(cardinal, 0.0) + rj[j] * (l1 - ie * m1) + w_trap * (l2 - ie * m2);
            }
        }

        Ok(Self {
            k,
            eta,
            n,
            x,
            sp,
            nrm,
            lu,
            check_eval,
            check_x,
        })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    /// Solves for the incident direction `d`, gates the boundary residual,
    /// and evaluates the far field on `n_theta` angles.
    pub fn far_field(
        &self,
        d: Direction,
        n_theta: usize,
    ) -> Result<BoundarySolution, ForwardError> {
        check_n_theta(n_theta)?;
        let dvec = d.unit();
        let rhs: Vec<Complex64> = self.x.iter().map(|&p| -cis(self.k * dot(p, dvec))).collect();
        let psi = self.lu.solve(&rhs)?;

        let mut residual = 0.0_f64;
        for ci in 0..self.check_x.len() {
            let mut us = Complex64::new(0.0, 0.0);
            for j in 0..self.n {
                us += self.check_eval[(ci, j)] * psi[j];
            }
            let ui = cis(self.k * dot(self.check_x[ci], dvec));
            residual = residual.max((us + ui).norm());
        }
        if residual > RESIDUAL_GATE {
            return Err(ForwardError::ResidualTooLarge {
                residual,
                gate: RESIDUAL_GATE,
            });
        }

        let gamma = far_field_gamma(self.k);
        let w_trap = TAU / self.n as f64;
        let values = (0..n_theta)
            .map(|jj| {
                let th = TAU * jj as f64 / n_theta as f64;
                let xhat = [th.cos(), th.sin()];
                let mut sum = Complex64::new(0.0, 0.0);
                for j in 0..self.n {
                    let fj = Complex64::new(0.0, -self.k * dot(xhat, self.nrm[j]) - self.eta);
                    sum += fj * cis(-self.k * dot(xhat, self.x[j])) * psi[j];
                }
                gamma * w_trap * sum
            })
            .collect();
        Ok(BoundarySolution {
            pattern: FarFieldPattern::new(self.k, values)?,
            boundary_residual: residual,
        })
    }

    /// Parametrization speeds at the nodes (useful for diagnostics).
    pub fn speeds(&self) -> &[f64] {
        &self.sp
    }
}

/// Which numerical solver handles polygon obstacles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ObstacleSolver {
    /// Boundary-integral Nyström solver — passes the residual gate on
    /// corner domains; the default.
    #[default]
    Nystrom,
    /// Method of fundamental solutions with default parameters — fine for
    /// smooth-ish polygons, rejects itself on true corners.
    Mfs,
}

/// Far field of any scene under a plane wave from `d`. Point scatterers
/// and polygon sources radiate independently of `d` (the paper's
/// fixed-incidence normalization); `d` is used by the obstacle scenes.
pub fn scene_far_field(
    scene: &Scene,
    k: f64,
    d: Direction,
    n_theta: usize,
    solver: ObstacleSolver,
) -> Result<FarFieldPattern, ForwardError> {
    scene.validate()?;
    match scene {
        Scene::PointScatterers(s) => point_far_field(&s.points, k, n_theta),
        Scene::DiskObstacle(s) => disk_far_field(s.center, s.radius, s.bc, k, d, n_theta, 0),
        Scene::PolygonSource(s) => polygon_source_far_field(s, k, n_theta),
        Scene::PolygonObstacle(s) => match solver {
            ObstacleSolver::Mfs => polygon_obstacle_far_field(s, k, d, n_theta),
            ObstacleSolver::Nystrom => {
                Ok(NystromSolver::new(s, k)?.far_field(d, n_theta)?.pattern)
            }
        },
    }
}

// --------------------------------------------------------------------
// Multistatic matrix
// --------------------------------------------------------------------

/// Discretized far-field operator: entry `(p, q) = u∞(θ_p; d = θ_q)·2π/n_theta`
/// (trapezoidal weights folded in). Point scatterers carry the Born phase
/// `e^{ik z·d}` per incident direction; polygon sources do not radiate per
/// direction and are rejected.
pub fn multistatic_matrix(
    scene: &Scene,
    k: f64,
    n_theta: usize,
) -> Result<ComplexMatrix, ForwardError> {
    multistatic_matrix_with(scene, k, n_theta, ObstacleSolver::default())
}

/// [`multistatic_matrix`] with an explicit obstacle solver. The Nyström
/// path factorizes the boundary system once and back-substitutes per
/// column; the MFS path re-solves per column and is much slower.
pub fn multistatic_matrix_with(
    scene: &Scene,
    k: f64,
    n_theta: usize,
    solver: ObstacleSolver,
) -> Result<ComplexMatrix, ForwardError> {
    scene.validate()?;
    check_wavenumber(k)?;
    check_n_theta(n_theta)?;
    let w = TAU / n_theta as f64;
    let theta = |j: usize| TAU * j as f64 / n_theta as f64;

    match scene {
        Scene::PointScatterers(s) => {
            let mut m = ComplexMatrix::zeros(n_theta, n_theta);
            for &z in &s.points {
                // u∞(x̂; d) = e^{ik z·d}·e^{−ik z·x̂}: a rank-one Hermitian
                // update per scatterer.
                let col: Vec<Complex64> = (0..n_theta)
                    .map(|p| {
                        let xh = [theta(p).cos(), theta(p).sin()];
                        cis(-k * dot(z, xh))
                    })
                    .collect();
                for p in 0..n_theta {
                    for q in 0..n_theta {
                        m[(p, q)] += col[p] * col[q].conj() * w;
                    }
                }
            }
            Ok(m)
        }
        Scene::DiskObstacle(s) => {
            let r = reflection_coefficients(k, s.radius, s.bc, 0)?;
            let c = series_constant(k);
            let mut m = ComplexMatrix::zeros(n_theta, n_theta);
            for p in 0..n_theta {
                let th = theta(p);
                let xhat = [th.cos(), th.sin()];
                for q in 0..n_theta {
                    let td = theta(q);
                    let dvec = [td.cos(), td.sin()];
                    let delta = th - td;
                    let (cd, mut c_prev, mut c_cur) = (delta.cos(), 1.0, delta.cos());
                    let mut sum = r[0];
                    for &rn in &r[1..] {
                        sum += rn * (2.0 * c_cur);
                        let c_next = 2.0 * cd * c_cur - c_prev;
                        c_prev = c_cur;
                        c_cur = c_next;
                    }
                    let phase = cis(k * (dot(s.center, dvec) - dot(s.center, xhat)));
                    m[(p, q)] = phase * (-c) * sum * w;
                }
            }
            Ok(m)
        }
        Scene::PolygonSource(_) => Err(ForwardError::UnsupportedScene {
            context: "a polygon source has no per-direction response; \
                      multistatic data is undefined"
                .into(),
        }),
        Scene::PolygonObstacle(s) => {
            let mut m = ComplexMatrix::zeros(n_theta, n_theta);
            match solver {
                ObstacleSolver::Nystrom => {
                    let ny = NystromSolver::new(s, k)?;
                    for q in 0..n_theta {
                        let sol = ny.far_field(Direction::new(theta(q)), n_theta)?;
                        for p in 0..n_theta {
                            m[(p, q)] = sol.pattern.values()[p] * w;
                        }
                    }
                }
                ObstacleSolver::Mfs => {
                    let params = MfsParams::default();
                    for q in 0..n_theta {
                        let sol = polygon_obstacle_far_field_mfs(
                            s,
                            k,
                            Direction::new(theta(q)),
                            n_theta,
                            &params,
                        )?;
                        for p in 0..n_theta {
                            m[(p, q)] = sol.pattern.values()[p] * w;
                        }
                    }
                }
            }
            Ok(m)
        }
    }
}

// --------------------------------------------------------------------
// Noise
// --------------------------------------------------------------------

/// Multiplicative uniform noise: `values[j]·(1 + δ·κ_j)` with `κ_j` i.i.d.
/// uniform on `[−1, 1]` from a seeded generator. The uniform deviates are
/// built from raw generator output (53-bit mantissa construction), so the
/// same seed gives bit-identical noise across platforms and dependency
/// versions.
pub fn add_noise(
    u: &FarFieldPattern,
    delta: f64,
    seed: u64,
) -> Result<FarFieldPattern, ForwardError> {
    if !(delta.is_finite() && (0.0..1.0).contains(&delta)) {
        return Err(ForwardError::InvalidParameter {
            context: format!("noise level delta must lie in [0, 1), got {delta}"),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = u
        .values()
        .iter()
        .map(|&v| {
            let u01 = (rng.next_u64() >> 11) as f64 / 9_007_199_254_740_992.0;
            let kappa = 2.0 * u01 - 1.0;
            v * (1.0 + delta * kappa)
        })
        .collect();
    FarFieldPattern::new(u.k(), values)
}

// --------------------------------------------------------------------
// File formats
// --------------------------------------------------------------------

/// Formats a float with 15 significant digits (full decimal, '.' separator).
pub(crate) fn fmt_full(x: f64) -> String {
    format!("{x:.14e}")
}

/// Writes a far-field pattern: header `# farfield k=<float> ntheta=<int>`
/// followed by `theta,re,im` rows at 15 significant digits.
pub fn write_far_field(path: &Path, u: &FarFieldPattern) -> Result<(), ForwardError> {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# farfield k={} ntheta={}",
        fmt_full(u.k()),
        u.n_theta()
    );
    for (j, v) in u.values().iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{}",
            fmt_full(u.theta(j)),
            fmt_full(v.re),
            fmt_full(v.im)
        );
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn parse_header(line: &str, tag: &str) -> Result<(f64, usize), ForwardError> {
    let err = |message: String| ForwardError::Parse { line: 1, message };
    let rest = line
        .strip_prefix('#')
        .map(str::trim)
        .and_then(|r| r.strip_prefix(tag))
        .ok_or_else(|| err(format!("expected header '# {tag} k=<float> ntheta=<int>'")))?;
    let mut k = None;
    let mut n_theta = None;
    for tok in rest.split_whitespace() {
        if let Some(v) = tok.strip_prefix("k=") {
            k = Some(v.parse::<f64>().map_err(|e| err(format!("bad k: {e}")))?);
        } else if let Some(v) = tok.strip_prefix("ntheta=") {
            n_theta = Some(
                v.parse::<usize>()
                    .map_err(|e| err(format!("bad ntheta: {e}")))?,
            );
        } else {
            return Err(err(format!("unexpected header token '{tok}'")));
        }
    }
    match (k, n_theta) {
        (Some(k), Some(n)) => Ok((k, n)),
        _ => Err(err("header must carry both k= and ntheta=".into())),
    }
}

/// Reads a far-field pattern written by [`write_far_field`].
pub fn read_far_field(path: &Path) -> Result<FarFieldPattern, ForwardError> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(ForwardError::Parse {
        line: 1,
        message: "empty file".into(),
    })?;
    let (k, n_theta) = parse_header(header, "farfield")?;
    let mut values = Vec::with_capacity(n_theta);
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 3 {
            return Err(ForwardError::Parse {
                line: lineno,
                message: format!("expected 'theta,re,im', got {} fields", parts.len()),
            });
        }
        let nums: Vec<f64> = parts
            .iter()
            .map(|p| {
                p.trim().parse::<f64>().map_err(|e| ForwardError::Parse {
                    line: lineno,
                    message: format!("bad number '{}': {e}", p.trim()),
                })
            })
            .collect::<Result<_, _>>()?;
        let expected_theta = TAU * values.len() as f64 / n_theta as f64;
        if (nums[0] - expected_theta).abs() > 1e-9 {
            return Err(ForwardError::Parse {
                line: lineno,
                message: format!(
                    "theta {} out of order (expected {expected_theta})",
                    nums[0]
                ),
            });
        }
        values.push(Complex64::new(nums[1], nums[2]));
    }
    if values.len() != n_theta {
        return Err(ForwardError::Parse {
            line: text.lines().count(),
            message: format!("expected {n_theta} rows, found {}", values.len()),
        });
    }
    FarFieldPattern::new(k, values)
}

/// Writes a multistatic matrix: header `# multistatic k=<float> ntheta=<int>`
/// followed by `p,q,re,im` rows.
pub fn write_multistatic(path: &Path, k: f64, m: &ComplexMatrix) -> Result<(), ForwardError> {
    check_wavenumber(k)?;
    if m.rows() != m.cols() {
        return Err(ForwardError::InvalidParameter {
            context: "multistatic matrix must be square".into(),
        });
    }
    let n = m.rows();
    let mut out = String::new();
    let _ = writeln!(out, "# multistatic k={} ntheta={n}", fmt_full(k));
    for p in 0..n {
        for q in 0..n {
            let v = m[(p, q)];
            let _ = writeln!(out, "{p},{q},{},{}", fmt_full(v.re), fmt_full(v.im));
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Reads a multistatic matrix written by [`write_multistatic`]; returns
/// `(k, matrix)`.
pub fn read_multistatic(path: &Path) -> Result<(f64, ComplexMatrix), ForwardError> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(ForwardError::Parse {
        line: 1,
        message: "empty file".into(),
    })?;
    let (k, n) = parse_header(header, "multistatic")?;
    if n < MIN_N_THETA {
        return Err(ForwardError::Parse {
            line: 1,
            message: format!("ntheta must be at least {MIN_N_THETA}, got {n}"),
        });
    }
    let mut m = ComplexMatrix::zeros(n, n);
    let mut seen = vec![false; n * n];
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 4 {
            return Err(ForwardError::Parse {
                line: lineno,
                message: format!("expected 'p,q,re,im', got {} fields", parts.len()),
            });
        }
        let p: usize = parts[0].trim().parse().map_err(|e| ForwardError::Parse {
            line: lineno,
            message: format!("bad row index: {e}"),
        })?;
        let q: usize = parts[1].trim().parse().map_err(|e| ForwardError::Parse {
            line: lineno,
            message: format!("bad column index: {e}"),
        })?;
        if p >= n || q >= n {
            return Err(ForwardError::Parse {
                line: lineno,
                message: format!("index ({p},{q}) outside {n}x{n}"),
            });
        }
        let re: f64 = parts[2].trim().parse().map_err(|e| ForwardError::Parse {
            line: lineno,
            message: format!("bad real part: {e}"),
        })?;
        let im: f64 = parts[3].trim().parse().map_err(|e| ForwardError::Parse {
            line: lineno,
            message: format!("bad imaginary part: {e}"),
        })?;
        m[(p, q)] = Complex64::new(re, im);
        seen[p * n + q] = true;
    }
    if let Some(missing) = seen.iter().position(|&s| !s) {
        return Err(ForwardError::Parse {
            line: text.lines().count(),
            message: format!(
                "entry ({}, {}) missing from the file",
                missing / n,
                missing % n
            ),
        });
    }
    Ok((k, m))
}

/// Parses a complex number written as `a`, `bi`, `a+bi`, or `a-bi`
/// (scientific notation allowed in either part; `i` alone means `1i`).
pub(crate) fn parse_complex(s: &str) -> Result<Complex64, String> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err("empty complex literal".into());
    }
    let parse_imag_coeff = |txt: &str| -> Result<f64, String> {
        match txt {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => txt
                .parse::<f64>()
                .map_err(|e| format!("bad imaginary part '{txt}': {e}")),
        }
    };
    if let Some(body) = s.strip_suffix('i') {
        // Find the sign splitting real and imaginary parts: a '+'/'-' that
        // is not the leading sign and not part of an exponent.
        let bytes = body.as_bytes();
        let mut split = None;
        for i in (1..bytes.len()).rev() {
            let c = bytes[i] as char;
            if (c == '+' || c == '-') && !matches!(bytes[i - 1] as char, 'e' | 'E') {
                split = Some(i);
                break;
            }
        }
        match split {
            Some(i) => {
                let re: f64 = body[..i]
                    .parse()
                    .map_err(|e| format!("bad real part '{}': {e}", &body[..i]))?;
                Ok(Complex64::new(re, parse_imag_coeff(&body[i..])?))
            }
            None => Ok(Complex64::new(0.0, parse_imag_coeff(body)?)),
        }
    } else {
        let re: f64 = s.parse().map_err(|e| format!("bad real number '{s}': {e}"))?;
        Ok(Complex64::new(re, 0.0))
    }
}

fn parse_point_list(s: &str, line: usize) -> Result<Vec<Point>, ForwardError> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(';')
        .map(|pair| {
            let coords: Vec<&str> = pair.split(',').collect();
            if coords.len() != 2 {
                return Err(ForwardError::Parse {
                    line,
                    message: format!("expected 'x,y', got '{pair}'"),
                });
            }
            let x: f64 = coords[0].trim().parse().map_err(|e| ForwardError::Parse {
                line,
                message: format!("bad coordinate '{}': {e}", coords[0].trim()),
            })?;
            let y: f64 = coords[1].trim().parse().map_err(|e| ForwardError::Parse {
                line,
                message: format!("bad coordinate '{}': {e}", coords[1].trim()),
            })?;
            Ok([x, y])
        })
        .collect()
}

/// Parses a scene description: flat `key=value` lines, `#` comments.
///
/// Keys: `type` (`point|disk|polygon-source|polygon-obstacle`),
/// `points`/`vertices` (semicolon-separated `x,y` pairs), `center`,
/// `radius`, `bc` (`soundsoft|impedance`), `eta` (`a+bi`), `density`
/// (default `1`), `normalization` (`standard|paper-literal`, default
/// `standard`).
pub fn parse_scene_str(text: &str) -> Result<Scene, ForwardError> {
    let mut kv: Vec<(usize, String, String)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or(ForwardError::Parse {
            line: lineno,
            message: format!("expected 'key=value', got '{line}'"),
        })?;
        let key = key.trim().to_string();
        if kv.iter().any(|(_, k, _)| *k == key) {
            return Err(ForwardError::Parse {
                line: lineno,
                message: format!("duplicate key '{key}'"),
            });
        }
        kv.push((lineno, key, value.trim().to_string()));
    }
    let get = |key: &str| kv.iter().find(|(_, k, _)| k == key);
    let known = [
        "type",
        "points",
        "vertices",
        "center",
        "radius",
        "bc",
        "eta",
        "density",
        "normalization",
    ];
    if let Some((line, key, _)) = kv.iter().find(|(_, k, _)| !known.contains(&k.as_str())) {
        return Err(ForwardError::Parse {
            line: *line,
            message: format!("unknown key '{key}'"),
        });
    }
    let (type_line, _, scene_type) = get("type").ok_or(ForwardError::Parse {
        line: 1,
        message: "missing 'type' key".into(),
    })?;

    let bc = || -> Result<BoundaryCondition, ForwardError> {
        match get("bc") {
            None => Ok(BoundaryCondition::SoundSoft),
            Some((line, _, v)) => match v.as_str() {
                "soundsoft" => Ok(BoundaryCondition::SoundSoft),
                "impedance" => {
                    let (eta_line, _, eta_txt) = get("eta").ok_or(ForwardError::Parse {
                        line: *line,
                        message: "impedance boundary condition needs an 'eta' key".into(),
                    })?;
                    let eta = parse_complex(eta_txt).map_err(|message| ForwardError::Parse {
                        line: *eta_line,
                        message,
                    })?;
                    Ok(BoundaryCondition::Impedance(eta))
                }
                other => Err(ForwardError::Parse {
                    line: *line,
                    message: format!("unknown boundary condition '{other}'"),
                }),
            },
        }
    };

    let scene = match scene_type.as_str() {
        "point" => {
            let (line, _, txt) = get("points").ok_or(ForwardError::Parse {
                line: *type_line,
                message: "point scene needs a 'points' key".into(),
            })?;
            Scene::PointScatterers(PointScatterers {
                points: parse_point_list(txt, *line)?,
            })
        }
        "disk" => {
            let (cline, _, ctxt) = get("center").ok_or(ForwardError::Parse {
                line: *type_line,
                message: "disk scene needs a 'center' key".into(),
            })?;
            let center = parse_point_list(ctxt, *cline)?;
            if center.len() != 1 {
                return Err(ForwardError::Parse {
                    line: *cline,
                    message: "center must be a single 'x,y' pair".into(),
                });
            }
            let (rline, _, rtxt) = get("radius").ok_or(ForwardError::Parse {
                line: *type_line,
                message: "disk scene needs a 'radius' key".into(),
            })?;
            let radius: f64 = rtxt.parse().map_err(|e| ForwardError::Parse {
                line: *rline,
                message: format!("bad radius: {e}"),
            })?;
            Scene::DiskObstacle(DiskObstacle {
                center: center[0],
                radius,
                bc: bc()?,
            })
        }
        "polygon-source" => {
            let (line, _, txt) = get("vertices").ok_or(ForwardError::Parse {
                line: *type_line,
                message: "polygon scene needs a 'vertices' key".into(),
            })?;
            let density = match get("density") {
                None => Complex64::new(1.0, 0.0),
                Some((dline, _, dtxt)) => {
                    parse_complex(dtxt).map_err(|message| ForwardError::Parse {
                        line: *dline,
                        message,
                    })?
                }
            };
            let normalization = match get("normalization") {
                None => Normalization::Standard,
                Some((nline, _, ntxt)) => match ntxt.as_str() {
                    "standard" => Normalization::Standard,
                    "paper-literal" => Normalization::PaperLiteral,
                    other => {
                        return Err(ForwardError::Parse {
                            line: *nline,
                            message: format!("unknown normalization '{other}'"),
                        })
                    }
                },
            };
            Scene::PolygonSource(PolygonSource {
                vertices: parse_point_list(txt, *line)?,
                density,
                normalization,
            })
        }
        "polygon-obstacle" => {
            let (line, _, txt) = get("vertices").ok_or(ForwardError::Parse {
                line: *type_line,
                message: "polygon scene needs a 'vertices' key".into(),
            })?;
            if let Some((bline, _, btxt)) = get("bc") {
                if btxt != "soundsoft" {
                    return Err(ForwardError::Parse {
                        line: *bline,
                        message: "polygon obstacles are sound-soft only".into(),
                    });
                }
            }
            Scene::PolygonObstacle(PolygonObstacle {
                vertices: parse_point_list(txt, *line)?,
            })
        }
        other => {
            return Err(ForwardError::Parse {
                line: *type_line,
                message: format!("unknown scene type '{other}'"),
            })
        }
    };
    scene.validate()?;
    Ok(scene)
}

/// Reads and validates a scene file; see [`parse_scene_str`].
pub fn read_scene(path: &Path) -> Result<Scene, ForwardError> {
    parse_scene_str(&std::fs::read_to_string(path)?)
}
