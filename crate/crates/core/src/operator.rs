//! Hermitian base operators, resolvents and the graph inner product.
//!
//! A [`BaseOperator`] is a finite Hermitian matrix, stored dense or as a
//! Hermitian tridiagonal band. Resolvents are computed by linear solve on
//! the shifted matrix; the spectral decomposition is cached lazily and
//! serves the spectrum guard and the diagonalization oracles.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Absolute distance below which a shift counts as sitting on the spectrum.
pub const SPECTRUM_GUARD: f64 = 1e-10;

/// Relative Hermiticity tolerance for stored operators.
pub const HERMITICITY_TOL: f64 = 1e-12;

pub(crate) fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Relative max-norm defect of `m` against its conjugate transpose.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let scale = max_abs(m).max(f64::MIN_POSITIVE);
    let defect = max_abs(&(m - m.adjoint()));
    defect / scale
}

pub(crate) fn require_hermitian(m: &CMatrix, tol: f64) -> Result<()> {
    let defect = hermitian_defect(m);
    if defect > tol {
        return Err(Error::NotHermitian { defect });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Dense,
    Tridiagonal,
}

#[derive(Debug, Clone)]
enum Storage {
    Dense(CMatrix),
    /// Hermitian band: real diagonal and the superdiagonal; the subdiagonal
    /// is its conjugate.
    Tridiagonal { diag: Vec<f64>, off: Vec<Complex64> },
}

/// A finite self-adjoint operator.
#[derive(Debug)]
pub struct BaseOperator {
    dim: usize,
    storage: Storage,
    eigenvalues: OnceLock<Vec<f64>>,
    eigenvectors: OnceLock<CMatrix>,
}

impl Clone for BaseOperator {
    fn clone(&self) -> Self {
        let op = BaseOperator {
            dim: self.dim,
            storage: self.storage.clone(),
            eigenvalues: OnceLock::new(),
            eigenvectors: OnceLock::new(),
        };
        if let Some(vals) = self.eigenvalues.get() {
            let _ = op.eigenvalues.set(vals.clone());
        }
        if let Some(vecs) = self.eigenvectors.get() {
            let _ = op.eigenvectors.set(vecs.clone());
        }
        op
    }
}

impl BaseOperator {
    pub fn dense(entries: CMatrix) -> Result<Self> {
        if entries.nrows() == 0 || entries.nrows() != entries.ncols() {
            return Err(Error::DimensionMismatch {
                expected: entries.nrows(),
                got: entries.ncols(),
            });
        }
        require_hermitian(&entries, HERMITICITY_TOL)?;
        if entries.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidSpec("non-finite operator entry".into()));
        }
        Ok(BaseOperator {
            dim: entries.nrows(),
            storage: Storage::Dense(entries),
            eigenvalues: OnceLock::new(),
            eigenvectors: OnceLock::new(),
        })
    }

    pub fn dense_from_real(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        let m = CMatrix::from_fn(n, n, |i, j| Complex64::new(rows[i][j], 0.0));
        Self::dense(m)
    }

    pub fn tridiagonal(diag: Vec<f64>, off: Vec<Complex64>) -> Result<Self> {
        let n = diag.len();
        if n == 0 || off.len() + 1 != n {
            return Err(Error::DimensionMismatch {
                expected: n.saturating_sub(1),
                got: off.len(),
            });
        }
        if diag.iter().any(|d| !d.is_finite())
            || off.iter().any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::InvalidSpec("non-finite operator entry".into()));
        }
        Ok(BaseOperator {
            dim: n,
            storage: Storage::Tridiagonal { diag, off },
            eigenvalues: OnceLock::new(),
            eigenvectors: OnceLock::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> OperatorKind {
        match self.storage {
            Storage::Dense(_) => OperatorKind::Dense,
            Storage::Tridiagonal { .. } => OperatorKind::Tridiagonal,
        }
    }

    /// Band storage, when the operator is tridiagonal.
    pub fn band(&self) -> Option<(&[f64], &[Complex64])> {
        match &self.storage {
            Storage::Dense(_) => None,
            Storage::Tridiagonal { diag, off } => Some((diag, off)),
        }
    }

    pub fn to_dense(&self) -> CMatrix {
        match &self.storage {
            Storage::Dense(m) => m.clone(),
            Storage::Tridiagonal { diag, off } => {
                let n = self.dim;
                let mut m = CMatrix::zeros(n, n);
                for i in 0..n {
                    m[(i, i)] = Complex64::new(diag[i], 0.0);
                }
                for i in 0..n - 1 {
                    m[(i, i + 1)] = off[i];
                    m[(i + 1, i)] = off[i].conj();
                }
                m
            }
        }
    }

    pub fn apply(&self, v: &CVector) -> Result<CVector> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
            });
        }
        Ok(match &self.storage {
            Storage::Dense(m) => m * v,
            Storage::Tridiagonal { diag, off } => {
                let n = self.dim;
                let mut out = CVector::zeros(n);
                for i in 0..n {
                    let mut acc = v[i] * diag[i];
                    if i > 0 {
                        acc += off[i - 1].conj() * v[i - 1];
                    }
                    if i + 1 < n {
                        acc += off[i] * v[i + 1];
                    }
                    out[i] = acc;
                }
                out
            }
        })
    }

    pub fn apply_matrix(&self, m: &CMatrix) -> Result<CMatrix> {
        if m.nrows() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: m.nrows(),
            });
        }
        Ok(match &self.storage {
            Storage::Dense(a) => a * m,
            Storage::Tridiagonal { .. } => {
                let mut out = CMatrix::zeros(m.nrows(), m.ncols());
                for j in 0..m.ncols() {
                    let col = self.apply(&CVector::from_column_slice(m.column(j).as_slice()))?;
                    out.set_column(j, &col);
                }
                out
            }
        })
    }

    /// Sorted real eigenvalues, computed once and cached.
    pub fn eigenvalues(&self) -> &[f64] {
        self.eigenvalues.get_or_init(|| match &self.storage {
            Storage::Dense(_) => {
                let (vals, vecs) = dense_eig(&self.to_dense()).expect("Hermitian eigensolve");
                let _ = self.eigenvectors.set(vecs);
                vals
            }
            Storage::Tridiagonal { diag, off } => tridiag_eigenvalues(diag, off),
        })
    }

    /// Full spectral decomposition with ascending eigenvalues and an
    /// orthonormal eigenvector matrix.
    pub fn diagonalize(&self) -> Result<(Vec<f64>, CMatrix)> {
        let vals = self.eigenvalues().to_vec();
        if self.eigenvectors.get().is_none() {
            let vecs = match &self.storage {
                Storage::Dense(_) => dense_eig(&self.to_dense())?.1,
                Storage::Tridiagonal { diag, off } => {
                    if self.dim <= 512 {
                        dense_eig(&self.to_dense())?.1
                    } else {
                        tridiag_eigenvectors(diag, off, &vals)?
                    }
                }
            };
            let _ = self.eigenvectors.set(vecs);
        }
        Ok((vals, self.eigenvectors.get().unwrap().clone()))
    }

    /// Distance from `z` to the spectrum.
    pub fn spectrum_distance(&self, z: Complex64) -> f64 {
        self.eigenvalues()
            .iter()
            .map(|&l| (z - Complex64::new(l, 0.0)).norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Fails with `SpectrumCollision` unless `z` is safely inside the
    /// resolvent set.
    pub fn guard_resolvent_point(&self, z: Complex64) -> Result<()> {
        let dist = self.spectrum_distance(z);
        if dist <= SPECTRUM_GUARD {
            return Err(Error::SpectrumCollision { z, dist });
        }
        Ok(())
    }

    /// Solves (-A + zI) X = B.
    pub fn solve_shifted(&self, z: Complex64, rhs: &CMatrix) -> Result<CMatrix> {
        if rhs.nrows() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: rhs.nrows(),
            });
        }
        self.guard_resolvent_point(z)?;
        match &self.storage {
            Storage::Dense(a) => {
                let shifted = CMatrix::from_fn(self.dim, self.dim, |i, j| {
                    let d = if i == j { z } else { Complex64::ZERO };
                    d - a[(i, j)]
                });
                shifted
                    .lu()
                    .solve(rhs)
                    .ok_or(Error::SingularResolvent { z })
            }
            Storage::Tridiagonal { diag, off } => {
                let n = self.dim;
                let sub: Vec<Complex64> = off.iter().map(|c| -c.conj()).collect();
                let main: Vec<Complex64> =
                    diag.iter().map(|&d| z - Complex64::new(d, 0.0)).collect();
                let sup: Vec<Complex64> = off.iter().map(|c| -c).collect();
                solve_tridiag_pivoted(&sub, &main, &sup, rhs)
                    .ok_or(Error::SingularResolvent { z })
                    .map(|x| {
                        debug_assert_eq!(x.nrows(), n);
                        x
                    })
            }
        }
    }

    /// Solves (-A + zI) x = b for a single vector.
    pub fn solve_shifted_vec(&self, z: Complex64, rhs: &CVector) -> Result<CVector> {
        let m = CMatrix::from_column_slice(rhs.len(), 1, rhs.as_slice());
        let x = self.solve_shifted(z, &m)?;
        Ok(CVector::from_column_slice(x.column(0).as_slice()))
    }

    /// The resolvent R(z) = (-A + zI)^{-1} as a dense matrix.
    pub fn resolvent(&self, z: Complex64) -> Result<CMatrix> {
        self.solve_shifted(z, &CMatrix::identity(self.dim, self.dim))
    }

    /// Max-norm of the operator, used for relative tolerances.
    pub fn max_norm(&self) -> f64 {
        match &self.storage {
            Storage::Dense(m) => max_abs(m),
            Storage::Tridiagonal { diag, off } => diag
                .iter()
                .map(|d| d.abs())
                .chain(off.iter().map(|c| c.norm()))
                .fold(0.0, f64::max),
        }
    }
}

/// The graph metric of a base operator: <phi,psi>_+ = <A phi, A psi> + <phi, psi>.
pub struct GraphMetric<'a> {
    op: &'a BaseOperator,
}

impl<'a> GraphMetric<'a> {
    pub fn new(op: &'a BaseOperator) -> Self {
        GraphMetric { op }
    }

    pub fn inner(&self, phi: &CVector, psi: &CVector) -> Result<Complex64> {
        if phi.len() != self.op.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.op.dim(),
                got: phi.len(),
            });
        }
        if psi.len() != self.op.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.op.dim(),
                got: psi.len(),
            });
        }
        let aphi = self.op.apply(phi)?;
        let apsi = self.op.apply(psi)?;
        Ok(aphi.dotc(&apsi) + phi.dotc(psi))
    }

    pub fn norm(&self, phi: &CVector) -> Result<f64> {
        Ok(self.inner(phi, phi)?.re.max(0.0).sqrt())
    }
}

fn dense_eig(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    // Symmetrize away round-off before handing to the Hermitian solver.
    let h = (m + m.adjoint()).scale(0.5);
    let eig = nalgebra::SymmetricEigen::try_new(h, f64::EPSILON, 100_000)
        .ok_or(Error::ConvergenceFailure)?;
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = CMatrix::zeros(n, n);
    for (j, &i) in order.iter().enumerate() {
        vecs.set_column(j, &eig.eigenvectors.column(i).into_owned());
    }
    Ok((vals, vecs))
}

/// Number of eigenvalues of the Hermitian tridiagonal (diag, off) strictly
/// below `x`, by the Sturm sequence.
fn sturm_count(diag: &[f64], off_sq: &[f64], x: f64) -> usize {
    let n = diag.len();
    let mut count = 0usize;
    let mut t = diag[0] - x;
    if t < 0.0 {
        count += 1;
    }
    for i in 1..n {
        let denom = if t.abs() < f64::MIN_POSITIVE.sqrt() {
            if t < 0.0 {
                -f64::MIN_POSITIVE.sqrt()
            } else {
                f64::MIN_POSITIVE.sqrt()
            }
        } else {
            t
        };
        t = diag[i] - x - off_sq[i - 1] / denom;
        if t < 0.0 {
            count += 1;
        }
    }
    count
}

fn tridiag_eigenvalues(diag: &[f64], off: &[Complex64]) -> Vec<f64> {
    let n = diag.len();
    if n == 1 {
        return vec![diag[0]];
    }
    let off_sq: Vec<f64> = off.iter().map(|c| c.norm_sqr()).collect();
    // Gershgorin bounds.
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let mut r = 0.0;
        if i > 0 {
            r += off[i - 1].norm();
        }
        if i + 1 < n {
            r += off[i].norm();
        }
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    let span = (hi - lo).max(1.0);
    let tol = 1e-14 * span.max(lo.abs()).max(hi.abs());
    let mut vals = Vec::with_capacity(n);
    for j in 0..n {
        let mut a = lo;
        let mut b = hi;
        for _ in 0..200 {
            if b - a <= tol {
                break;
            }
            let mid = 0.5 * (a + b);
            if sturm_count(diag, &off_sq, mid) > j {
                b = mid;
            } else {
                a = mid;
            }
        }
        vals.push(0.5 * (a + b));
    }
    vals
}

/// Eigenvectors of a Hermitian tridiagonal by inverse iteration, given
/// accurate eigenvalues. Vectors inside near-degenerate clusters are
/// re-orthogonalized.
fn tridiag_eigenvectors(diag: &[f64], off: &[Complex64], vals: &[f64]) -> Result<CMatrix> {
    let n = diag.len();
    let scale = vals.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut vecs = CMatrix::zeros(n, n);
    let sub: Vec<Complex64> = off.iter().map(|c| c.conj()).collect();
    let mut cluster_start = 0usize;
    for j in 0..n {
        // Tiny shift off the exact eigenvalue keeps the solve nonsingular.
        let shift = vals[j] + 1e-12 * scale;
        let main: Vec<Complex64> = diag
            .iter()
            .map(|&d| Complex64::new(d - shift, 0.0))
            .collect();
        let sup: Vec<Complex64> = off.to_vec();
        let mut v = CVector::from_fn(n, |i, _| {
            // Deterministic pseudo-random start.
            let t = ((i * 2654435761 + j * 40503) % 1000) as f64 / 1000.0;
            Complex64::new(t - 0.5, 0.0)
        });
        if j > 0 && vals[j] - vals[j - 1] > 1e-8 * scale.max(1.0) {
            cluster_start = j;
        }
        let mut ok = false;
        for _ in 0..4 {
            let rhs = CMatrix::from_column_slice(n, 1, v.as_slice());
            let x = match solve_tridiag_pivoted(&sub, &main, &sup, &rhs) {
                Some(x) => x,
                None => break,
            };
            v = CVector::from_column_slice(x.column(0).as_slice());
            for c in cluster_start..j {
                let proj = vecs.column(c).dotc(&v);
                let prev = vecs.column(c).into_owned();
                v -= prev * proj;
            }
            let nrm = v.norm();
            if nrm == 0.0 {
                break;
            }
            v /= Complex64::new(nrm, 0.0);
            ok = true;
        }
        if !ok {
            return Err(Error::ConvergenceFailure);
        }
        vecs.set_column(j, &v);
    }
    Ok(vecs)
}

/// LU with partial pivoting for a tridiagonal system with multiple
/// right-hand sides. Returns `None` when the matrix is numerically singular.
fn solve_tridiag_pivoted(
    sub: &[Complex64],
    main: &[Complex64],
    sup: &[Complex64],
    rhs: &CMatrix,
) -> Option<CMatrix> {
    let n = main.len();
    let m = rhs.ncols();
    if n == 1 {
        if main[0].norm() == 0.0 {
            return None;
        }
        let mut x = rhs.clone();
        for j in 0..m {
            x[(0, j)] /= main[0];
        }
        return Some(x);
    }
    // Band with one extra superdiagonal for pivot fill-in.
    let mut d = main.to_vec();
    let mut e = sup.to_vec();
    let mut f = vec![Complex64::ZERO; n.saturating_sub(2)];
    let mut b = rhs.clone();
    for i in 0..n - 1 {
        let a_next = sub[i];
        if d[i].norm() >= a_next.norm() {
            if d[i].norm() == 0.0 {
                return None;
            }
            let l = a_next / d[i];
            d[i + 1] -= l * e[i];
            // f[i] stays zero when no row swap happened at this step.
            for j in 0..m {
                let t = b[(i, j)] * l;
                b[(i + 1, j)] -= t;
            }
        } else {
            // Swap rows i and i+1.
            let (ri_d, ri_e) = (d[i], e[i]);
            d[i] = a_next;
            e[i] = d[i + 1];
            let fi = if i + 2 < n { e[i + 1] } else { Complex64::ZERO };
            if i + 2 < n {
                f[i] = fi;
            }
            let l = ri_d / d[i];
            d[i + 1] = ri_e - l * e[i];
            if i + 2 < n {
                e[i + 1] = -l * fi;
            }
            for j in 0..m {
                let bi = b[(i, j)];
                b[(i, j)] = b[(i + 1, j)];
                b[(i + 1, j)] = bi - l * b[(i, j)];
            }
        }
    }
    if d[n - 1].norm() == 0.0 {
        return None;
    }
    // Back substitution over the (at most) two superdiagonals.
    let mut x = CMatrix::zeros(n, m);
    for j in 0..m {
        x[(n - 1, j)] = b[(n - 1, j)] / d[n - 1];
        if n >= 2 {
            let i = n - 2;
            x[(i, j)] = (b[(i, j)] - e[i] * x[(i + 1, j)]) / d[i];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            x[(i, j)] = (b[(i, j)] - e[i] * x[(i + 1, j)] - f[i] * x[(i + 2, j)]) / d[i];
        }
    }
    Some(x)
}
