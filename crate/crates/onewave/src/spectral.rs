//! Spectral systems of analytic test disks.
//!
//! The far-field operator of a disk `B_h(z)` diagonalizes in the basis
//! `φ_n(θ̂) = e^{inθ̂}·e^{−ik z·x̂(θ̂)}` with eigenvalues
//!
//! * sound-soft: `λ_n = −2πC·J_n(kh)/H_n^(1)(kh)`,
//! * impedance: `λ_n = −2πC·(kJ'_n(kh) + ηJ_n(kh))/(kH'_n(kh) + ηH_n(kh))`,
//!
//! where `C = sqrt(2/(kπ))·e^{−iπ/4}`. These explicit pairs are what make
//! the one-wave indicators computable: no operator ever has to be
//! diagonalized numerically, the test disk supplies its own spectrum.
//!
//! Eigenvalues depend on the radius only; translating the disk translates
//! the eigenfunctions through the `e^{−ik z·x̂}` factor. Both facts are
//! load-bearing downstream (radius sweeps reuse one center's inner
//! products) and are pinned by tests here.
//!
//! Inner products against sampled far-field data use the periodic
//! trapezoid rule `⟨v, φ⟩ = (2π/n_θ)·Σ_j v_j·conj(φ(θ_j))`, which is
//! spectrally accurate — *provided* the integrand is resolved. The product
//! `v·conj(φ_n)` carries frequencies up to `|n| + k|z|` plus the content of
//! `v`, so [`inner_product`] enforces `n_θ ≥ 2(|n| + ⌈k|z|⌉) + 16` and
//! refuses to silently alias.

use num_complex::Complex64;
use thiserror::Error;

use crate::forward::{ForwardError, Point};
use crate::specfun::bessel_j_all;

use std::f64::consts::TAU;

pub use crate::forward::{BoundaryCondition, FarFieldPattern};

/// Orders with `|J_n(kh)|` below this count as interior-resonance
/// degenerate.
const DIRICHLET_PROXIMITY: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("invalid parameter: {context}")]
    InvalidParameter { context: String },
    #[error(
        "aliasing risk: n_theta = {n_theta} cannot resolve the integrand \
         (need at least {required})"
    )]
    AliasingRisk { n_theta: usize, required: usize },
    #[error(transparent)]
    Forward(#[from] ForwardError),
}

/// A probe disk `B_h(z)` with a boundary condition.
#[derive(Debug, Clone, PartialEq)]
pub struct TestDisk {
    pub center: Point,
    pub radius: f64,
    pub bc: BoundaryCondition,
}

impl TestDisk {
    pub fn sound_soft(center: Point, radius: f64) -> Self {
        Self {
            center,
            radius,
            bc: BoundaryCondition::SoundSoft,
        }
    }

    pub fn impedance(center: Point, radius: f64, eta: Complex64) -> Self {
        Self {
            center,
            radius,
            bc: BoundaryCondition::Impedance(eta),
        }
    }

    pub fn validate(&self) -> Result<(), SpectralError> {
        if !(self.center[0].is_finite() && self.center[1].is_finite()) {
            return Err(SpectralError::InvalidParameter {
                context: "disk center must be finite".into(),
            });
        }
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return Err(SpectralError::InvalidParameter {
                context: format!("disk radius must be positive, got {}", self.radius),
            });
        }
        self.bc.validate()?;
        Ok(())
    }
}

/// A single disk eigenvalue with its interior-resonance proximity flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskEigenvalue {
    pub value: Complex64,
    /// `|J_n(kh)| < 1e−12`: the wavenumber sits (numerically) on an interior
    /// Dirichlet eigenvalue of the disk, where the sound-soft eigenvalue
    /// degenerates to 0 and indicator terms `|⟨u,φ⟩|²/|λ|` are untrustworthy.
    pub near_interior_resonance: bool,
}

/// The spectral system of a test disk up to truncation order `N`:
/// eigenvalues `λ_n` for `n = −N..=N` (symmetric, `λ_{−n} = λ_n`) and the
/// orders flagged as degenerate.
#[derive(Debug, Clone, PartialEq)]
pub struct DiskSpectrum {
    k: f64,
    disk: TestDisk,
    n_max: usize,
    /// Indexed by `n + n_max`.
    eigenvalues: Vec<Complex64>,
    degenerate_orders: Vec<i32>,
}

impl DiskSpectrum {
    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn disk(&self) -> &TestDisk {
        &self.disk
    }

    /// Truncation order `N`.
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// `λ_n`; panics if `|n| > N`.
    pub fn eigenvalue(&self, n: i32) -> Complex64 {
        assert!(
            n.unsigned_abs() as usize <= self.n_max,
            "order {n} outside truncation {}",
            self.n_max
        );
        self.eigenvalues[(n + self.n_max as i32) as usize]
    }

    /// All orders `−N..=N` in ascending order.
    pub fn orders(&self) -> impl Iterator<Item = i32> + '_ {
        let n = self.n_max as i32;
        -n..=n
    }

    /// Orders whose eigenvalue sits on an interior resonance (see
    /// [`DiskEigenvalue::near_interior_resonance`]); ascending, symmetric.
    pub fn degenerate_orders(&self) -> &[i32] {
        &self.degenerate_orders
    }
}

fn check_wavenumber(k: f64) -> Result<(), SpectralError> {
    if !(k.is_finite() && k > 0.0) {
        return Err(SpectralError::InvalidParameter {
            context: format!("wavenumber k must be finite and positive, got {k}"),
        });
    }
    Ok(())
}

/// `λ_n` of the disk `B_h(·)` (center-independent) at wavenumber `k`.
pub fn disk_eigenvalue(
    n: i32,
    k: f64,
    h: f64,
    bc: BoundaryCondition,
) -> Result<DiskEigenvalue, SpectralError> {
    check_wavenumber(k)?;
    let m = n.unsigned_abs() as usize;
    let r = crate::forward::reflection_ladder(k, h, bc, m)?;
    let j = bessel_j_all(m, k * h);
    Ok(DiskEigenvalue {
        value: -TAU * crate::forward::series_constant(k) * r[m],
        near_interior_resonance: j[m].abs() < DIRICHLET_PROXIMITY,
    })
}

/// Eigenfunction sample `φ_n(θ̂) = e^{inθ̂}·e^{−ik z·x̂(θ̂)}` for the disk
/// centered at `z`.
pub fn eigenfunction_value(n: i32, z: Point, k: f64, theta_hat: f64) -> Complex64 {
    assert!(k.is_finite() && k > 0.0, "wavenumber must be positive");
    assert!(theta_hat.is_finite(), "angle must be finite");
    let xhat = [theta_hat.cos(), theta_hat.sin()];
    let phase = n as f64 * theta_hat - k * (z[0] * xhat[0] + z[1] * xhat[1]);
    Complex64::new(phase.cos(), phase.sin())
}

fn required_samples(n: usize, k: f64, z: Point) -> usize {
    let kz = (k * z[0].hypot(z[1])).ceil() as usize;
    2 * (n + kz) + 16
}

/// Trapezoid inner product `⟨v, φ_n^{(z)}⟩ = (2π/n_θ)·Σ_j v_j·conj(φ_n(θ_j))`.
///
/// Fails with [`SpectralError::AliasingRisk`] when the grid cannot resolve
/// the oscillation `|n| + k|z|` of the eigenfunction.
pub fn inner_product(
    v: &FarFieldPattern,
    n: i32,
    z: Point,
) -> Result<Complex64, SpectralError> {
    let all = inner_products_all(v, n.unsigned_abs() as usize, z)?;
    Ok(all[(n + n.abs()) as usize])
}

/// All inner products `⟨v, φ_n^{(z)}⟩` for `n = −N..=N` in one pass over the
/// data (index `n + N`). The per-sample eigenfunction phases advance by
/// rotation recurrences, so the cost is `O(N·n_θ)` complex multiplies with
/// no trigonometry in the inner loop.
pub fn inner_products_all(
    v: &FarFieldPattern,
    n_max: usize,
    z: Point,
) -> Result<Vec<Complex64>, SpectralError> {
    if !(z[0].is_finite() && z[1].is_finite()) {
        return Err(SpectralError::InvalidParameter {
            context: "center z must be finite".into(),
        });
    }
    let n_theta = v.n_theta();
    let required = required_samples(n_max, v.k(), z);
    if n_theta < required {
        return Err(SpectralError::AliasingRisk { n_theta, required });
    }

    let mut sums = vec![Complex64::new(0.0, 0.0); 2 * n_max + 1];
    for (j, &vj) in v.values().iter().enumerate() {
        let theta = v.theta(j);
        let xhat = [theta.cos(), theta.sin()];
        // conj(φ_n) = e^{−inθ}·e^{+ik z·x̂}
        let base = {
            let p = v.k() * (z[0] * xhat[0] + z[1] * xhat[1]);
            vj * Complex64::new(p.cos(), p.sin())
        };
        let step = Complex64::new(theta.cos(), -theta.sin());
        sums[n_max] += base;
        let mut fwd = base;
        let mut bwd = base;
        for m in 1..=n_max {
            fwd *= step;
            bwd *= step.conj();
            sums[n_max + m] += fwd;
            sums[n_max - m] += bwd;
        }
    }
    let w = TAU / n_theta as f64;
    for s in &mut sums {
        *s *= w;
    }
    Ok(sums)
}

/// The full spectral system of `disk` at wavenumber `k`, truncated at order
/// `n_max` (`n_max = 0` is allowed and yields the single eigenvalue `λ_0`).
pub fn spectral_system(
    disk: &TestDisk,
    k: f64,
    n_max: usize,
) -> Result<DiskSpectrum, SpectralError> {
    disk.validate()?;
    check_wavenumber(k)?;
    let r = crate::forward::reflection_ladder(k, disk.radius, disk.bc, n_max)?;
    let c = crate::forward::series_constant(k);
    let j = bessel_j_all(n_max, k * disk.radius);

    let half: Vec<Complex64> = (0..=n_max).map(|m| -TAU * c * r[m]).collect();
    let mut eigenvalues = Vec::with_capacity(2 * n_max + 1);
    for m in (1..=n_max).rev() {
        eigenvalues.push(half[m]);
    }
    eigenvalues.extend_from_slice(&half);

    let mut degenerate_orders = Vec::new();
    for m in (1..=n_max as i32).rev() {
        if j[m as usize].abs() < DIRICHLET_PROXIMITY {
            degenerate_orders.push(-m);
        }
    }
    for m in 0..=n_max as i32 {
        if j[m as usize].abs() < DIRICHLET_PROXIMITY {
            degenerate_orders.push(m);
        }
    }

    Ok(DiskSpectrum {
        k,
        disk: disk.clone(),
        n_max,
        eigenvalues,
        degenerate_orders,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::{point_far_field, series_constant};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    // ----------------------------------------------------------------
    // eigenvalues
    // ----------------------------------------------------------------

    #[test]
    fn eigenvalues_are_symmetric_in_order() {
        let disk = TestDisk::sound_soft([1.0, -2.0], 1.5);
        let spec = spectral_system(&disk, 6.0, 25).unwrap();
        for n in 0..=25 {
            assert_eq!(spec.eigenvalue(n), spec.eigenvalue(-n));
        }
    }

    #[test]
    fn eigenvalues_ignore_the_center() {
        let a = spectral_system(&TestDisk::sound_soft([0.0, 0.0], 1.0), 6.0, 40).unwrap();
        let b = spectral_system(&TestDisk::sound_soft([5.0, -3.25], 1.0), 6.0, 40).unwrap();
        for n in a.orders() {
            assert_eq!(a.eigenvalue(n), b.eigenvalue(n), "order {n}");
        }
    }

    #[test]
    fn eigenvalue_decay_at_paper_parameters() {
        // k = 6, h = 1: sixty orders buy at least sixty decades.
        let spec = spectral_system(&TestDisk::sound_soft([0.0, 0.0], 1.0), 6.0, 60).unwrap();
        let ratio = spec.eigenvalue(60).norm() / spec.eigenvalue(0).norm();
        assert!(ratio < 1e-60, "ratio {ratio:e}");
        assert!(spec.eigenvalue(60).norm() > 0.0, "must not underflow to zero");
    }

    #[test]
    fn log_magnitudes_decay_superexponentially() {
        // Past the oscillatory regime the decrements ln|λ_{j+1}| − ln|λ_j|
        // are negative and keep growing in size.
        let spec = spectral_system(&TestDisk::sound_soft([0.0, 0.0], 1.0), 6.0, 41).unwrap();
        let lg: Vec<f64> = (10..=41).map(|n| spec.eigenvalue(n).norm().ln()).collect();
        for w in lg.windows(2) {
            assert!(w[1] < w[0]);
        }
        for i in 0..lg.len() - 2 {
            let d1 = lg[i + 1] - lg[i];
            let d2 = lg[i + 2] - lg[i + 1];
            assert!(d2 < d1, "decrements must steepen: {d1} vs {d2}");
        }
    }

    #[test]
    fn sound_soft_eigenvalues_lie_on_the_known_circle() {
        // λ_n = −2πC·J_n/H_n with J/H = J(J−iY)/|H|²: writing it out shows
        // |λ_n + πC| = π|C| exactly for every order and radius.
        for (k, h) in [(6.0, 1.0), (2.0, 0.7), (9.0, 2.3)] {
            let spec = spectral_system(&TestDisk::sound_soft([0.0, 0.0], h), k, 30).unwrap();
            let cc = series_constant(k);
            let center = -PI * cc;
            let radius = PI * cc.norm();
            for n in 0..=30 {
                let dev = ((spec.eigenvalue(n) - center).norm() - radius).abs() / radius;
                assert!(dev < 1e-6, "k={k} h={h} n={n}: deviation {dev:e}");
            }
        }
    }

    #[test]
    fn impedance_spectrum_is_finite_and_distinct_from_sound_soft() {
        let soft = spectral_system(&TestDisk::sound_soft([0.0, 0.0], 1.0), 6.0, 20).unwrap();
        let imp = spectral_system(
            &TestDisk::impedance([0.0, 0.0], 1.0, c(0.0, 6.0)),
            6.0,
            20,
        )
        .unwrap();
        let mut max_rel = 0.0_f64;
        for n in 0..=20 {
            let li = imp.eigenvalue(n);
            assert!(li.re.is_finite() && li.im.is_finite());
            assert_eq!(imp.eigenvalue(-n), li);
            if n <= 10 {
                max_rel = max_rel.max((li - soft.eigenvalue(n)).norm() / soft.eigenvalue(n).norm());
            }
        }
        assert!(max_rel > 0.1, "impedance must actually change the spectrum");
    }

    #[test]
    fn single_eigenvalue_matches_system() {
        // The ladders run to different depths (|n| vs the system's n_max),
        // so the backward-recurrence start orders differ; agreement is to
        // the recurrence tail accuracy, not bitwise.
        let disk = TestDisk::impedance([0.3, 0.3], 1.2, c(0.4, 1.1));
        let spec = spectral_system(&disk, 6.0, 12).unwrap();
        for n in [-12, -5, 0, 3, 12] {
            let single = disk_eigenvalue(n, 6.0, 1.2, disk.bc).unwrap();
            let want = spec.eigenvalue(n);
            assert!(
                (single.value - want).norm() <= 1e-13 * want.norm(),
                "order {n}: {} vs {want}",
                single.value
            );
        }
    }

    #[test]
    fn truncation_zero_yields_single_eigenvalue() {
        let disk = TestDisk::sound_soft([0.0, 0.0], 1.0);
        let spec = spectral_system(&disk, 6.0, 0).unwrap();
        assert_eq!(spec.n_max(), 0);
        assert_eq!(spec.orders().count(), 1);
        let single = disk_eigenvalue(0, 6.0, 1.0, BoundaryCondition::SoundSoft).unwrap();
        assert_eq!(spec.eigenvalue(0), single.value);
    }

    #[test]
    fn interior_resonance_is_flagged_not_rejected() {
        // k·h at the first zero of J_0: order 0 degenerates.
        let j0_zero = 2.404_825_557_695_773;
        let spec = spectral_system(&TestDisk::sound_soft([0.0, 0.0], 1.0), j0_zero, 3).unwrap();
        assert_eq!(spec.degenerate_orders(), &[0]);
        assert!(spec.eigenvalue(0).norm() < 1e-11);
        let single = disk_eigenvalue(0, j0_zero, 1.0, BoundaryCondition::SoundSoft).unwrap();
        assert!(single.near_interior_resonance);
        let off = disk_eigenvalue(1, j0_zero, 1.0, BoundaryCondition::SoundSoft).unwrap();
        assert!(!off.near_interior_resonance);
    }

    // ----------------------------------------------------------------
    // eigenfunctions and inner products
    // ----------------------------------------------------------------

    #[test]
    fn eigenfunctions_are_orthogonal_on_the_grid() {
        // The z-phases cancel in φ_m·conj(φ_n), leaving ∫e^{i(m−n)θ} = 2πδ.
        let (k, z, n_theta) = (6.0, [0.3, -0.2], 512);
        for m in [-5_i32, 0, 3] {
            let values: Vec<Complex64> = (0..n_theta)
                .map(|j| eigenfunction_value(m, z, k, TAU * j as f64 / n_theta as f64))
                .collect();
            let v = FarFieldPattern::new(k, values).unwrap();
            for n in [-5_i32, -1, 0, 3, 5] {
                let ip = inner_product(&v, n, z).unwrap();
                let expect = if m == n { TAU } else { 0.0 };
                assert!(
                    (ip - c(expect, 0.0)).norm() < 1e-10,
                    "m={m} n={n}: got {ip}"
                );
            }
        }
    }

    #[test]
    fn plane_wave_coefficients_follow_jacobi_anger() {
        // e^{−ik x̂·z*} against the centered eigenfunctions: coefficient
        // magnitudes are 2π|J_n(k|z*|)|.
        let (k, zs, n_theta) = (6.0, [-2.0, 0.0], 512);
        let v = point_far_field(&[zs], k, n_theta).unwrap();
        let j = bessel_j_all(20, k * zs[0].hypot(zs[1]));
        for n in 0..=20_i32 {
            let ip = inner_product(&v, n, [0.0, 0.0]).unwrap();
            let expect = TAU * j[n as usize].abs();
            assert!(
                (ip.norm() - expect).abs() < 1e-10,
                "order {n}: {} vs {expect}",
                ip.norm()
            );
        }
    }

    #[test]
    fn translated_inner_product_equals_modulated_centered_one() {
        let (k, n_theta) = (6.0, 512);
        let z = [1.2, -0.7];
        let v = point_far_field(&[[-2.0, 0.5], [1.0, 1.0]], k, n_theta).unwrap();
        // v_j·e^{ik z·x̂_j} re-centers the data at z.
        let modulated: Vec<Complex64> = v
            .values()
            .iter()
            .enumerate()
            .map(|(j, &vj)| {
                let th = v.theta(j);
                let p = k * (z[0] * th.cos() + z[1] * th.sin());
                vj * c(p.cos(), p.sin())
            })
            .collect();
        let vm = FarFieldPattern::new(k, modulated).unwrap();
        for n in [-7_i32, -1, 0, 2, 7] {
            let a = inner_product(&v, n, z).unwrap();
            let b = inner_product(&vm, n, [0.0, 0.0]).unwrap();
            assert!((a - b).norm() < 1e-12, "order {n}");
        }
    }

    #[test]
    fn batched_inner_products_match_single_calls() {
        let v = point_far_field(&[[1.5, -0.4]], 6.0, 512).unwrap();
        let z = [0.8, 0.9];
        let all = inner_products_all(&v, 9, z).unwrap();
        for n in -9..=9_i32 {
            let single = inner_product(&v, n, z).unwrap();
            assert!((all[(n + 9) as usize] - single).norm() < 1e-13);
        }
    }

    #[test]
    fn unresolvable_grids_are_rejected() {
        let v = point_far_field(&[[1.0, 0.0]], 6.0, 64).unwrap();
        // |n| = 30, k|z| = 18 ⇒ need 2(30+18)+16 = 112 > 64.
        match inner_product(&v, 30, [3.0, 0.0]).unwrap_err() {
            SpectralError::AliasingRisk { n_theta, required } => {
                assert_eq!(n_theta, 64);
                assert_eq!(required, 112);
            }
            other => panic!("expected aliasing error, got {other:?}"),
        }
    }
}
