//! Dense complex linear algebra for the multi-wave baseline and the forward
//! solvers: Hermitian eigendecomposition, SVD, matrix absolute value,
//! truncated-SVD least squares, LU with partial pivoting, and eigenvalues of
//! normal matrices.
//!
//! Everything is written for the problem sizes this crate actually meets
//! (discretized far-field operators up to 512×512, boundary-integral systems
//! up to ~2048): straightforward `O(n³)` dense algorithms, no blocking, no
//! parallelism.
//!
//! # Choices
//!
//! * Eigendecomposition by cyclic **complex Jacobi rotations**: each 2×2
//!   Hermitian block is phase-rotated to a real symmetric block and then
//!   annihilated by a classical Jacobi rotation. Jacobi is simple to get
//!   right, unconditionally stable, and fast enough at these sizes.
//! * **SVD via `A*A`**: eigendecompose the (Hermitian) cross-product matrix
//!   and recover left singular vectors as `u_j = A·v_j/σ_j`. This loses half
//!   the digits for singular values near `sqrt(ε)·σ_max`; every consumer
//!   here either truncates (TSVD) or regularizes (Tikhonov `α`) far above
//!   that floor, and the limit is part of the documented contract.
//! * **Eigenvalues of normal matrices** (far-field operators of sound-soft
//!   scatterers are normal but not Hermitian): split `A = B + iC` into
//!   commuting Hermitian parts, eigendecompose the single Hermitian mix
//!   `B + ρC` with an irrational mixing weight `ρ` (so distinct `(Re λ,
//!   Im λ)` pairs cannot accidentally collide in the mix), and read each
//!   eigenvalue off as `v*Bv + i·v*Cv`.

use num_complex::Complex64;
use thiserror::Error;

/// Mixing weight for [`normal_eigen`]: the Dottie number (fixed point of
/// cosine). Any irrational-ish constant works; this one is reproducible and
/// far from small rationals, so distinct eigenvalue pairs of the normal
/// matrix stay distinct in the Hermitian mix.
const NORMAL_MIX: f64 = 0.739_085_133_215_160_7;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian: max deviation {deviation:e} exceeds {tolerance:e}")]
    NotHermitian { deviation: f64, tolerance: f64 },
    #[error("matrix is not normal: commutator norm {deviation:e} exceeds {tolerance:e}")]
    NotNormal { deviation: f64, tolerance: f64 },
    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal mass {off:e})")]
    NoConvergence { sweeps: usize, off: f64 },
    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },
    #[error("matrix entry at ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },
    #[error("matrix is singular to working precision (pivot {pivot:e} at step {step})")]
    Singular { pivot: f64, step: usize },
}

/// Dense complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    /// All-zero matrix.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    /// Identity matrix.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Build from row-major data. Fails on non-finite entries or a length
    /// mismatch.
    pub fn from_row_major(
        rows: usize,
        cols: usize,
        data: Vec<Complex64>,
    ) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch {
                context: format!(
                    "row-major data length {} does not equal {rows}x{cols}",
                    data.len()
                ),
            });
        }
        for (idx, v) in data.iter().enumerate() {
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(LinalgError::NonFinite {
                    row: idx / cols,
                    col: idx % cols,
                });
            }
        }
        Ok(Self { rows, cols, data })
    }

    /// Build from a nested row list (convenience for tests and examples).
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self, LinalgError> {
        let r = rows.len();
        assert!(r > 0, "matrix needs at least one row");
        let c = rows[0].len();
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(LinalgError::DimensionMismatch {
                    context: "ragged row lengths".into(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::from_row_major(r, c, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Row-major data slice.
    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    /// Conjugate transpose `A*`.
    pub fn conj_transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    /// Matrix product `self · other`.
    pub fn mul(&self, other: &Self) -> Result<Self, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch {
                context: format!(
                    "product of {}x{} and {}x{}",
                    self.rows, self.cols, other.rows, other.cols
                ),
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self[(i, l)];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let lhs = l * other.cols;
                let dst = i * other.cols;
                for j in 0..other.cols {
                    out.data[dst + j] += a * other.data[lhs + j];
                }
            }
        }
        Ok(out)
    }

    /// Matrix–vector product `self · v`.
    pub fn mul_vec(&self, v: &[Complex64]) -> Result<Vec<Complex64>, LinalgError> {
        if v.len() != self.cols {
            return Err(LinalgError::DimensionMismatch {
                context: format!("matrix {}x{} times vector {}", self.rows, self.cols, v.len()),
            });
        }
        Ok((0..self.rows)
            .map(|i| {
                let row = &self.data[i * self.cols..(i + 1) * self.cols];
                row.iter().zip(v).map(|(a, x)| a * x).sum()
            })
            .collect())
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// j-th column as a vector.
    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigendecomposition of a Hermitian matrix: real eigenvalues sorted
/// descending, orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub eigenvalues: Vec<f64>,
    /// Columns are the eigenvectors, in eigenvalue order.
    pub eigenvectors: ComplexMatrix,
}

/// Thin singular value decomposition `A = U·diag(σ)·V*`.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    /// Singular values, descending, non-negative.
    pub singular_values: Vec<f64>,
    pub v: ComplexMatrix,
}

/// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
///
/// The input must be Hermitian within `1e−8·‖A‖_max`; it is symmetrized
/// internally. Rotations run in sweeps until the off-diagonal Frobenius mass
/// drops below `1e−14·‖A‖_F`, with tiny pivots skipped (threshold Jacobi).
///
/// # Errors
///
/// Non-square or non-Hermitian input, or no convergence after 100 sweeps.
pub fn hermitian_eigen(a: &ComplexMatrix) -> Result<HermitianEigen, LinalgError> {
    if a.rows != a.cols {
        return Err(LinalgError::NotSquare {
            rows: a.rows,
            cols: a.cols,
        });
    }
    let n = a.rows;
    let max_abs = a.max_abs();
    let mut dev = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    let herm_tol = 1e-8 * max_abs.max(f64::MIN_POSITIVE);
    if dev > herm_tol {
        return Err(LinalgError::NotHermitian {
            deviation: dev,
            tolerance: herm_tol,
        });
    }

    // Symmetrize: work on (A + A*)/2 with an exactly real diagonal.
    let mut m = a.clone();
    for i in 0..n {
        m[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
        for j in i + 1..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)].conj());
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }

    let fro = m.frobenius_norm();
    let tol = 1e-14 * fro;
    // Accumulate W = J_k*···J_1* (rows of W are conjugated eigenvectors):
    // row operations on a row-major matrix stay contiguous.
    let mut w = ComplexMatrix::identity(n);

    if n > 1 {
        let mut converged = fro == 0.0 || off_diagonal_norm(&m) <= tol;
        let mut sweeps = 0;
        while !converged {
            if sweeps >= 100 {
                return Err(LinalgError::NoConvergence {
                    sweeps,
                    off: off_diagonal_norm(&m),
                });
            }
            let skip_below = tol / n as f64;
            for p in 0..n - 1 {
                for q in p + 1..n {
                    jacobi_rotate(&mut m, &mut w, p, q, skip_below);
                }
            }
            sweeps += 1;
            converged = off_diagonal_norm(&m) <= tol;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].re.partial_cmp(&m[(i, i)].re).unwrap());

    let eigenvalues: Vec<f64> = order.iter().map(|&i| m[(i, i)].re).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        // Eigenvector = conjugate of W's row `src`.
        for i in 0..n {
            vectors[(i, col)] = w[(src, i)].conj();
        }
    }
    Ok(HermitianEigen {
        eigenvalues,
        eigenvectors: vectors,
    })
}

fn off_diagonal_norm(m: &ComplexMatrix) -> f64 {
    let n = m.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += m[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// One complex Jacobi rotation annihilating the (p, q) entry of the
/// Hermitian matrix `m`, accumulating the transform into `w` (as `J*·w`).
fn jacobi_rotate(m: &mut ComplexMatrix, w: &mut ComplexMatrix, p: usize, q: usize, skip: f64) {
    let apq = m[(p, q)];
    let r = apq.norm();
    if r <= skip {
        return;
    }
    let omega = apq / r; // phase of the pivot entry
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;

    // Phase-rotate the block to real symmetric, then classical Jacobi.
    let tau = (aqq - app) / (2.0 * r);
    let t = if tau.abs() > 1e12 {
        0.5 / tau
    } else {
        tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    let n = m.rows();
    // Row update: row_p ← c·row_p − s·ω·row_q ; row_q ← s·row_p + c·ω·row_q.
    let s_omega = s * omega;
    let c_omega = c * omega;
    for j in 0..n {
        let mp = m[(p, j)];
        let mq = m[(q, j)];
        m[(p, j)] = c * mp - s_omega * mq;
        m[(q, j)] = s * mp + c_omega * mq;
    }
    // Column update with the conjugate coefficients.
    let s_omega_c = s_omega.conj();
    let c_omega_c = c_omega.conj();
    for i in 0..n {
        let mp = m[(i, p)];
        let mq = m[(i, q)];
        m[(i, p)] = c * mp - s_omega_c * mq;
        m[(i, q)] = s * mp + c_omega_c * mq;
    }
    // Restore exact Hermitian structure of the worked entries.
    m[(p, q)] = Complex64::new(0.0, 0.0);
    m[(q, p)] = Complex64::new(0.0, 0.0);
    m[(p, p)] = Complex64::new(m[(p, p)].re, 0.0);
    m[(q, q)] = Complex64::new(m[(q, q)].re, 0.0);

    // Same row operation on the accumulated transform.
    for j in 0..n {
        let wp = w[(p, j)];
        let wq = w[(q, j)];
        w[(p, j)] = c * wp - s_omega * wq;
        w[(q, j)] = s * wp + c_omega * wq;
    }
}

/// Thin SVD via the Hermitian eigendecomposition of `A*A`.
///
/// Left singular vectors are recovered as `u_j = A·v_j/σ_j`; columns whose
/// singular value sits below `1e−12·σ_max` are rebuilt by Gram–Schmidt
/// against the already-recovered columns, so `U` always has orthonormal
/// columns. Precision floor: singular values below `~sqrt(ε)·σ_max` carry
/// half precision (documented consequence of the cross-product approach).
pub fn svd(a: &ComplexMatrix) -> Result<Svd, LinalgError> {
    if a.rows < a.cols {
        // Decompose the conjugate transpose and swap factors:
        // A* = U Σ V*  ⇒  A = V Σ U*.
        let t = svd(&a.conj_transpose())?;
        return Ok(Svd {
            u: t.v,
            singular_values: t.singular_values,
            v: t.u,
        });
    }
    let ata = a.conj_transpose().mul(a)?;
    let eig = hermitian_eigen(&ata)?;
    let n = a.cols;
    let m = a.rows;

    let singular_values: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|&mu| mu.max(0.0).sqrt())
        .collect();
    let sigma_max = singular_values.first().copied().unwrap_or(0.0);
    let v = eig.eigenvectors;

    let mut u = ComplexMatrix::zeros(m, n);
    for j in 0..n {
        let vj = v.column(j);
        let avj = a.mul_vec(&vj)?;
        let reliable = singular_values[j] > 1e-12 * sigma_max && singular_values[j] > 0.0;
        let mut col: Vec<Complex64> = if reliable {
            let inv = 1.0 / singular_values[j];
            avj.iter().map(|x| x * inv).collect()
        } else {
            // Rank-deficient direction: rebuild any unit vector orthogonal to
            // the recovered columns (Gram–Schmidt over the canonical basis).
            orthonormal_complement_column(&u, j, m)
        };
        // One re-orthogonalization pass guards against drift from the
        // half-precision eigenvectors of A*A.
        for prev in 0..j {
            let dot: Complex64 = (0..m).map(|i| u[(i, prev)].conj() * col[i]).sum();
            for (i, c) in col.iter_mut().enumerate() {
                *c -= dot * u[(i, prev)];
            }
        }
        let norm = col.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            for c in col.iter_mut() {
                *c /= norm;
            }
        }
        for i in 0..m {
            u[(i, j)] = col[i];
        }
    }
    Ok(Svd {
        u,
        singular_values,
        v,
    })
}

/// A unit column orthogonal to the first `filled` columns of `u`.
fn orthonormal_complement_column(u: &ComplexMatrix, filled: usize, m: usize) -> Vec<Complex64> {
    for seed in 0..m {
        let mut col = vec![Complex64::new(0.0, 0.0); m];
        col[seed] = Complex64::new(1.0, 0.0);
        for prev in 0..filled {
            let dot: Complex64 = (0..m).map(|i| u[(i, prev)].conj() * col[i]).sum();
            for (i, c) in col.iter_mut().enumerate() {
                *c -= dot * u[(i, prev)];
            }
        }
        let norm = col.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            for c in col.iter_mut() {
                *c /= norm;
            }
            return col;
        }
    }
    unreachable!("an m-dimensional space always has a complement direction")
}

/// Matrix absolute value `|A| = V·|diag(μ)|·V*` of a Hermitian matrix.
/// The result is Hermitian positive semidefinite.
pub fn matrix_abs(a: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    let eig = hermitian_eigen(a)?;
    let n = a.rows();
    let v = &eig.eigenvectors;
    let mut out = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut sum = Complex64::new(0.0, 0.0);
            for (l, &mu) in eig.eigenvalues.iter().enumerate() {
                sum += v[(i, l)] * mu.abs() * v[(j, l)].conj();
            }
            out[(i, j)] = sum;
        }
    }
    // Clean up: exact Hermitian output.
    for i in 0..n {
        out[(i, i)] = Complex64::new(out[(i, i)].re, 0.0);
        for j in i + 1..n {
            let avg = 0.5 * (out[(i, j)] + out[(j, i)].conj());
            out[(i, j)] = avg;
            out[(j, i)] = avg.conj();
        }
    }
    Ok(out)
}

/// Truncated-SVD least squares: the minimizer of `‖Ax − b‖` restricted to
/// singular directions with `σ_j ≥ rel_cutoff·σ_max`.
///
/// Requires `rows ≥ cols` (overdetermined or square systems only).
pub fn tsvd_solve(
    a: &ComplexMatrix,
    b: &[Complex64],
    rel_cutoff: f64,
) -> Result<Vec<Complex64>, LinalgError> {
    assert!(
        rel_cutoff > 0.0 && rel_cutoff < 1.0,
        "rel_cutoff must lie in (0, 1)"
    );
    if a.rows < a.cols {
        return Err(LinalgError::DimensionMismatch {
            context: format!("tsvd_solve needs rows >= cols, got {}x{}", a.rows, a.cols),
        });
    }
    if b.len() != a.rows {
        return Err(LinalgError::DimensionMismatch {
            context: format!("rhs length {} does not match {} rows", b.len(), a.rows),
        });
    }
    let dec = svd(a)?;
    let sigma_max = dec.singular_values.first().copied().unwrap_or(0.0);
    let mut x = vec![Complex64::new(0.0, 0.0); a.cols];
    if sigma_max == 0.0 {
        return Ok(x);
    }
    for (j, &sigma) in dec.singular_values.iter().enumerate() {
        if sigma < rel_cutoff * sigma_max {
            continue;
        }
        let uj_b: Complex64 = (0..a.rows).map(|i| dec.u[(i, j)].conj() * b[i]).sum();
        let coeff = uj_b / sigma;
        for i in 0..a.cols {
            x[i] += coeff * dec.v[(i, j)];
        }
    }
    Ok(x)
}

/// LU factorization with partial pivoting, for the square dense systems of
/// the boundary-integral forward solver.
#[derive(Debug, Clone)]
pub struct LuDecomposition {
    lu: ComplexMatrix,
    perm: Vec<usize>,
}

impl LuDecomposition {
    /// Factor a square matrix. Fails if a pivot falls below
    /// `1e−13·max|A|` (singular to working precision).
    pub fn factor(a: &ComplexMatrix) -> Result<Self, LinalgError> {
        if a.rows != a.cols {
            return Err(LinalgError::NotSquare {
                rows: a.rows,
                cols: a.cols,
            });
        }
        let n = a.rows;
        let scale = a.max_abs();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (pivot_row, pivot_abs) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
                .unwrap();
            if pivot_abs <= 1e-13 * scale {
                return Err(LinalgError::Singular {
                    pivot: pivot_abs,
                    step: k,
                });
            }
            if pivot_row != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(pivot_row, j)];
                    lu[(pivot_row, j)] = tmp;
                }
                perm.swap(k, pivot_row);
            }
            let inv_pivot = Complex64::new(1.0, 0.0) / lu[(k, k)];
            for i in k + 1..n {
                let factor = lu[(i, k)] * inv_pivot;
                lu[(i, k)] = factor;
                if factor.re == 0.0 && factor.im == 0.0 {
                    continue;
                }
                for j in k + 1..n {
                    let upd = factor * lu[(k, j)];
                    lu[(i, j)] -= upd;
                }
            }
        }
        Ok(Self { lu, perm })
    }

    /// Solve `A·x = b` using the stored factors.
    pub fn solve(&self, b: &[Complex64]) -> Result<Vec<Complex64>, LinalgError> {
        let n = self.lu.rows;
        if b.len() != n {
            return Err(LinalgError::DimensionMismatch {
                context: format!("rhs length {} for {}x{} system", b.len(), n, n),
            });
        }
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            let mut sum = x[i];
            for j in 0..i {
                sum -= self.lu[(i, j)] * x[j];
            }
            x[i] = sum;
        }
        for i in (0..n).rev() {
            let mut sum = x[i];
            for j in i + 1..n {
                sum -= self.lu[(i, j)] * x[j];
            }
            x[i] = sum / self.lu[(i, i)];
        }
        Ok(x)
    }
}

/// Eigenvalues and eigenvectors of a **normal** matrix (`AA* = A*A`),
/// sorted by descending modulus.
///
/// Splits `A = B + iC` with Hermitian `B = (A+A*)/2`, `C = (A−A*)/(2i)`;
/// for a normal matrix these commute and share an eigenbasis, found by
/// eigendecomposing the single Hermitian mix `B + ρC`. Each complex
/// eigenvalue is then `v*Bv + i·v*Cv`.
pub fn normal_eigen(
    a: &ComplexMatrix,
) -> Result<(Vec<Complex64>, ComplexMatrix), LinalgError> {
    if a.rows != a.cols {
        return Err(LinalgError::NotSquare {
            rows: a.rows,
            cols: a.cols,
        });
    }
    let n = a.rows;
    let at = a.conj_transpose();
    let aat = a.mul(&at)?;
    let ata = at.mul(a)?;
    let mut comm = 0.0_f64;
    for i in 0..n * n {
        comm += (aat.data[i] - ata.data[i]).norm_sqr();
    }
    let comm = comm.sqrt();
    let scale = a.frobenius_norm();
    let tol = 1e-8 * scale * scale;
    if comm > tol.max(f64::MIN_POSITIVE) {
        return Err(LinalgError::NotNormal {
            deviation: comm,
            tolerance: tol,
        });
    }

    let mut mix = ComplexMatrix::zeros(n, n);
    let mut b = ComplexMatrix::zeros(n, n);
    let mut c = ComplexMatrix::zeros(n, n);
    let neg_half_i = Complex64::new(0.0, -0.5);
    for i in 0..n {
        for j in 0..n {
            let bij = 0.5 * (a[(i, j)] + at[(i, j)]);
            let cij = neg_half_i * (a[(i, j)] - at[(i, j)]);
            b[(i, j)] = bij;
            c[(i, j)] = cij;
            mix[(i, j)] = bij + NORMAL_MIX * cij;
        }
    }
    let eig = hermitian_eigen(&mix)?;
    let v = eig.eigenvectors;

    let mut eigenvalues = Vec::with_capacity(n);
    for j in 0..n {
        let vj = v.column(j);
        let bv = b.mul_vec(&vj)?;
        let cv = c.mul_vec(&vj)?;
        let re: Complex64 = vj.iter().zip(&bv).map(|(x, y)| x.conj() * y).sum();
        let im: Complex64 = vj.iter().zip(&cv).map(|(x, y)| x.conj() * y).sum();
        eigenvalues.push(Complex64::new(re.re, im.re));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eigenvalues[j]
            .norm()
            .partial_cmp(&eigenvalues[i].norm())
            .unwrap()
    });
    let sorted_vals: Vec<Complex64> = order.iter().map(|&i| eigenvalues[i]).collect();
    let mut sorted_vecs = ComplexMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        for i in 0..n {
            sorted_vecs[(i, col)] = v[(i, src)];
        }
    }
    Ok((sorted_vals, sorted_vecs))
}
