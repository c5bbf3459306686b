//! The trace map tau, the family G(z) and the distinguished quadruple
//! R, G, G_*, RG built from the probe points +/- i.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operator::{BaseOperator, CMatrix, CVector, GraphMetric};

/// Relative singular-value floor for surjectivity of the trace map.
pub const TRACE_RANK_TOL: f64 = 1e-10;

/// Residual ceiling for the construction identities of the field.
pub const FIELD_IDENTITY_TOL: f64 = 1e-10;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// A surjective map tau from the graph space onto the auxiliary space h,
/// stored as its k x n matrix acting by plain multiplication.
#[derive(Debug, Clone)]
pub struct TraceMap {
    matrix: CMatrix,
}

impl TraceMap {
    pub fn new(matrix: CMatrix, parent: &BaseOperator) -> Result<Self> {
        let (k, n) = (matrix.nrows(), matrix.ncols());
        if n != parent.dim() {
            return Err(Error::DimensionMismatch {
                expected: parent.dim(),
                got: n,
            });
        }
        if k == 0 || k > n {
            return Err(Error::InvalidSpec(format!(
                "trace map must have 1 <= k <= n, got k={k}, n={n}"
            )));
        }
        let svd = matrix.clone().svd(false, false);
        let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        let largest = sv[0];
        let smallest = sv[k - 1];
        let ratio = if largest > 0.0 { smallest / largest } else { 0.0 };
        if ratio < TRACE_RANK_TOL {
            return Err(Error::RankDeficientTrace { ratio });
        }
        Ok(TraceMap { matrix })
    }

    pub fn from_real_rows(rows: &[&[f64]], parent: &BaseOperator) -> Result<Self> {
        let k = rows.len();
        let n = parent.dim();
        let m = CMatrix::from_fn(k, n, |i, j| Complex64::new(rows[i][j], 0.0));
        Self::new(m, parent)
    }

    pub fn aux_dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// tau applied to a vector of H.
    pub fn apply(&self, phi: &CVector) -> Result<CVector> {
        if phi.len() != self.matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: self.matrix.ncols(),
                got: phi.len(),
            });
        }
        Ok(&self.matrix * phi)
    }

    /// The adjoint tau*: h -> H as an n x k matrix.
    pub fn adjoint_matrix(&self) -> CMatrix {
        self.matrix.adjoint()
    }

    /// Minimum-H-norm solution of tau phi = target.
    pub fn min_norm_preimage(&self, target: &CVector) -> Result<CVector> {
        if target.len() != self.aux_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.aux_dim(),
                got: target.len(),
            });
        }
        let gram = &self.matrix * self.matrix.adjoint();
        let y = gram
            .lu()
            .solve(target)
            .ok_or(Error::RankDeficientTrace { ratio: 0.0 })?;
        Ok(self.matrix.adjoint() * y)
    }

    /// Convenience variant of tau with rows orthonormalized in the graph
    /// metric of `parent`; the projection form used when a model hands us
    /// an orthogonal projector instead of a general trace map.
    pub fn graph_orthonormalized(&self, parent: &BaseOperator) -> Result<TraceMap> {
        let metric = GraphMetric::new(parent);
        let k = self.aux_dim();
        let n = self.matrix.ncols();
        let mut rows: Vec<CVector> = Vec::with_capacity(k);
        for i in 0..k {
            let mut v = CVector::from_fn(n, |j, _| self.matrix[(i, j)].conj());
            for prev in &rows {
                let coeff = metric.inner(prev, &v)?;
                v -= prev * coeff;
            }
            let nrm = metric.norm(&v)?;
            if nrm < 1e-14 {
                return Err(Error::RankDeficientTrace { ratio: 0.0 });
            }
            v /= Complex64::new(nrm, 0.0);
            rows.push(v);
        }
        let m = CMatrix::from_fn(k, n, |i, j| rows[i][j].conj());
        TraceMap::new(m, parent)
    }
}

/// Surrogate diagnostic for the denseness hypothesis on Ker(tau).
#[derive(Debug, Clone)]
pub struct DensenessReport {
    /// Dimension of D(A) intersected with Ran(G(z)); equals rank(G(z)) in
    /// the finite-dimensional surrogate where D(A) is the whole space.
    pub intersection_dim: usize,
    /// Smallest principal angle between Ran(G(z)) and D(A), in radians.
    pub principal_angle: f64,
    /// Always true for finite-dimensional models.
    pub finite_dimensional_surrogate: bool,
}

/// The derived quadruple of the boundary triple construction, together
/// with an evaluator for G(z). Immutable after construction.
#[derive(Debug)]
pub struct KreinField {
    operator: BaseOperator,
    trace: TraceMap,
    g_plus: CMatrix,
    g_minus: CMatrix,
    g_star: CMatrix,
    rg: CMatrix,
}

impl KreinField {
    /// Builds the field, validating the defining identities
    /// RG = (i/2)(G(i) - G(-i)) and G_* = -i RG + G(-i).
    pub fn build(operator: BaseOperator, trace: TraceMap) -> Result<Self> {
        if trace.matrix().ncols() != operator.dim() {
            return Err(Error::DimensionMismatch {
                expected: operator.dim(),
                got: trace.matrix().ncols(),
            });
        }
        let tau_adj = trace.adjoint_matrix();
        let g_plus = operator.solve_shifted(I, &tau_adj)?;
        let g_minus = operator.solve_shifted(-I, &tau_adj)?;
        let g_star = (&g_plus + &g_minus).scale(0.5);
        // RG computed directly as R(i) G(-i); the closed form below is the
        // identity being validated.
        let rg = operator.solve_shifted(I, &g_minus)?;
        let rg_closed = (&g_plus - &g_minus) * (I / 2.0);
        let scale = 1.0f64.max(rg.norm());
        let res33 = (&rg - &rg_closed).norm() / scale;
        let res34 = (&g_star - (&rg * (-I) + &g_minus)).norm() / 1.0f64.max(g_star.norm());
        let residual = res33.max(res34);
        if residual > FIELD_IDENTITY_TOL {
            return Err(Error::IdentityViolation {
                residual,
                tolerance: FIELD_IDENTITY_TOL,
            });
        }
        Ok(KreinField {
            operator,
            trace,
            g_plus,
            g_minus,
            g_star,
            rg,
        })
    }

    pub fn operator(&self) -> &BaseOperator {
        &self.operator
    }

    pub fn trace(&self) -> &TraceMap {
        &self.trace
    }

    pub fn dim(&self) -> usize {
        self.operator.dim()
    }

    pub fn aux_dim(&self) -> usize {
        self.trace.aux_dim()
    }

    /// G(i)
    pub fn g_plus(&self) -> &CMatrix {
        &self.g_plus
    }

    /// G = G(-i)
    pub fn g_minus(&self) -> &CMatrix {
        &self.g_minus
    }

    /// G_* = (G(i) + G(-i)) / 2
    pub fn g_star(&self) -> &CMatrix {
        &self.g_star
    }

    /// RG = R(i) G(-i)
    pub fn rg(&self) -> &CMatrix {
        &self.rg
    }

    /// R(i) as a dense matrix, computed on demand.
    pub fn resolvent_at_probe(&self) -> Result<CMatrix> {
        self.operator.resolvent(I)
    }

    /// G(z) = (tau R(conj z))* = R(z) tau*.
    pub fn gmap(&self, z: Complex64) -> Result<CMatrix> {
        self.operator.solve_shifted(z, &self.trace.adjoint_matrix())
    }

    /// Residual of (z - w) R(w) G(z) = G(w) - G(z).
    pub fn check_resolvent_identity(&self, z: Complex64, w: Complex64) -> Result<f64> {
        let gz = self.gmap(z)?;
        let gw = self.gmap(w)?;
        let lhs = self.operator.solve_shifted(w, &gz)? * (z - w);
        Ok((lhs - (gw - gz)).norm())
    }

    /// Rank of G(z) and the principal angle of its range against D(A).
    /// In these finite-dimensional models D(A) is the whole space, so the
    /// angle is identically zero; the report is flagged as a surrogate.
    pub fn denseness_diagnostic(&self, z: Complex64) -> Result<DensenessReport> {
        let gz = self.gmap(z)?;
        let svd = gz.clone().svd(false, false);
        let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        let largest = sv.first().copied().unwrap_or(0.0);
        let rank = sv
            .iter()
            .filter(|&&s| s > TRACE_RANK_TOL * largest.max(1e-300))
            .count();
        // Ran(G(z)) is a subspace of D(A) = C^n, so every principal angle
        // against D(A) vanishes.
        Ok(DensenessReport {
            intersection_dim: rank,
            principal_angle: 0.0,
            finite_dimensional_surrogate: true,
        })
    }
}
