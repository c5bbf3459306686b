//! Singular perturbations parametrized by a Hermitian boundary operator:
//! Krein resolvents, resolvent-set membership, eigenvalue location by
//! singular-value scans and perturbed-operator recovery oracles.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::KreinField;
use crate::operator::{require_hermitian, BaseOperator, CMatrix, CVector, HERMITICITY_TOL};

/// Relative singular-value threshold for kernel detection in
/// Theta + Gamma(lambda).
pub const KERNEL_REL_TOL: f64 = 1e-8;

/// Condition-number ceiling for inverting Theta + Gamma(z).
pub const BOUNDARY_COND_LIMIT: f64 = 1e12;

/// Hermiticity tolerance for recovered operators.
pub const RECOVERY_HERMITICITY_TOL: f64 = 1e-9;

/// Parameter of a self-adjoint extension: either a bounded Hermitian
/// operator on h (boundary condition Theta zeta = tau phi_*), or the
/// distinguished relation {0} x h selecting the base operator itself.
#[derive(Debug, Clone)]
pub enum ExtensionSpec {
    Operator(CMatrix),
    DistinguishedRelation,
}

impl ExtensionSpec {
    pub fn operator(theta: CMatrix) -> Result<Self> {
        if theta.nrows() != theta.ncols() {
            return Err(Error::DimensionMismatch {
                expected: theta.nrows(),
                got: theta.ncols(),
            });
        }
        require_hermitian(&theta, HERMITICITY_TOL)?;
        Ok(ExtensionSpec::Operator(theta))
    }

    pub fn scalar(theta: f64) -> Self {
        ExtensionSpec::Operator(CMatrix::from_element(1, 1, Complex64::new(theta, 0.0)))
    }

    pub fn theta(&self) -> Option<&CMatrix> {
        match self {
            ExtensionSpec::Operator(t) => Some(t),
            ExtensionSpec::DistinguishedRelation => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership {
    InResolventSet,
    InSpectrum,
}

/// One located eigenvalue of the perturbed operator.
#[derive(Debug, Clone)]
pub struct EigenResult {
    pub lambda: f64,
    pub multiplicity: usize,
    /// Orthonormal columns spanning Ker(Theta + Gamma(lambda)).
    pub kernel_basis: CMatrix,
    /// Columns G(lambda) zeta_j.
    pub eigenvectors: CMatrix,
    /// Smallest singular value of Theta + Gamma(lambda) at the root.
    pub smallest_singular: f64,
}

fn check_spec_dim(field: &KreinField, spec: &ExtensionSpec) -> Result<()> {
    if let ExtensionSpec::Operator(t) = spec {
        if t.nrows() != field.aux_dim() {
            return Err(Error::DimensionMismatch {
                expected: field.aux_dim(),
                got: t.nrows(),
            });
        }
    }
    Ok(())
}

/// Theta + Gamma(z).
pub fn boundary_matrix(field: &KreinField, spec: &ExtensionSpec, z: Complex64) -> Result<CMatrix> {
    check_spec_dim(field, spec)?;
    let theta = spec
        .theta()
        .ok_or_else(|| Error::NotApplicable("distinguished relation carries no Theta".into()))?;
    Ok(theta + field.weyl(z)?.gamma().clone())
}

fn sorted_singular_values(m: &CMatrix) -> Vec<f64> {
    let svd = m.clone().svd(false, false);
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// The Krein resolvent R(z) + G(z)(Theta + Gamma(z))^{-1} G(conj z)* as a
/// dense matrix.
pub fn krein_resolvent(field: &KreinField, spec: &ExtensionSpec, z: Complex64) -> Result<CMatrix> {
    check_spec_dim(field, spec)?;
    let base = field.operator().resolvent(z)?;
    match spec {
        ExtensionSpec::DistinguishedRelation => Ok(base),
        ExtensionSpec::Operator(_) => {
            let m = boundary_matrix(field, spec, z)?;
            let sv = sorted_singular_values(&m);
            let (smax, smin) = (sv[0], sv[sv.len() - 1]);
            if smin <= 0.0 || smax / smin > BOUNDARY_COND_LIMIT {
                return Err(Error::SingularBoundaryOperator { z });
            }
            let gz = field.gmap(z)?;
            let gzbar = field.gmap(z.conj())?;
            let solved = m
                .lu()
                .solve(&gzbar.adjoint())
                .ok_or(Error::SingularBoundaryOperator { z })?;
            Ok(base + gz * solved)
        }
    }
}

/// Applies the Krein resolvent to a single vector without materializing
/// the n x n matrix.
pub fn krein_resolvent_apply(
    field: &KreinField,
    spec: &ExtensionSpec,
    z: Complex64,
    v: &CVector,
) -> Result<CVector> {
    check_spec_dim(field, spec)?;
    let base = field.operator().solve_shifted_vec(z, v)?;
    match spec {
        ExtensionSpec::DistinguishedRelation => Ok(base),
        ExtensionSpec::Operator(_) => {
            let m = boundary_matrix(field, spec, z)?;
            let sv = sorted_singular_values(&m);
            let (smax, smin) = (sv[0], sv[sv.len() - 1]);
            if smin <= 0.0 || smax / smin > BOUNDARY_COND_LIMIT {
                return Err(Error::SingularBoundaryOperator { z });
            }
            let gz = field.gmap(z)?;
            let gzbar = field.gmap(z.conj())?;
            let rhs = gzbar.adjoint() * v;
            let solved = m
                .lu()
                .solve(&rhs)
                .ok_or(Error::SingularBoundaryOperator { z })?;
            Ok(base + gz * solved)
        }
    }
}

/// Resolvent-set membership of z for the perturbed operator, by the
/// criterion 0 in rho(Theta + Gamma(z)).
pub fn resolvent_membership(
    field: &KreinField,
    spec: &ExtensionSpec,
    z: Complex64,
) -> Result<Membership> {
    check_spec_dim(field, spec)?;
    field.operator().guard_resolvent_point(z)?;
    match spec {
        // The distinguished relation selects A itself: z in rho(A) suffices.
        ExtensionSpec::DistinguishedRelation => Ok(Membership::InResolventSet),
        ExtensionSpec::Operator(_) => {
            let m = boundary_matrix(field, spec, z)?;
            let sv = sorted_singular_values(&m);
            let (smax, smin) = (sv[0], sv[sv.len() - 1]);
            // Absolute floor matches the kernel threshold in eigen_solve: a
            // near-zero matrix (k = 1, or fully degenerate Theta) has
            // smin / smax near 1 even at a spectral point.
            if smin > KERNEL_REL_TOL * smax.max(1.0) {
                Ok(Membership::InResolventSet)
            } else {
                Ok(Membership::InSpectrum)
            }
        }
    }
}

fn smallest_singular(field: &KreinField, theta: &CMatrix, lambda: f64) -> Result<f64> {
    let m = theta + field.weyl(Complex64::new(lambda, 0.0))?.gamma();
    Ok(*sorted_singular_values(&m).last().unwrap())
}

/// Golden-section refinement of a local minimum of s on [a, b].
fn golden_refine<F: Fn(f64) -> Result<f64>>(s: &F, mut a: f64, mut b: f64) -> Result<f64> {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = s(x1)?;
    let mut f2 = s(x2)?;
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if b - a <= 1e-10 * mid.abs().max(1.0) {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = s(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = s(x2)?;
        }
    }
    Ok(0.5 * (a + b))
}

/// Scans the smallest singular value of Theta + Gamma(lambda) over a real
/// interval inside rho(A), refines each local minimum and reports the
/// roots as eigenvalues of the perturbed operator with their kernels and
/// eigenvectors.
pub fn eigen_solve(
    field: &KreinField,
    spec: &ExtensionSpec,
    interval: (f64, f64),
    grid_points: usize,
) -> Result<Vec<EigenResult>> {
    check_spec_dim(field, spec)?;
    let (a, b) = interval;
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidSpec(format!("bad interval [{a}, {b}]")));
    }
    if grid_points < 16 {
        return Err(Error::InvalidSpec(format!(
            "gridPoints must be >= 16, got {grid_points}"
        )));
    }
    for &ev in field.operator().eigenvalues() {
        if ev >= a - 1e-10 && ev <= b + 1e-10 {
            return Err(Error::IntervalTouchesBaseSpectrum {
                a,
                b,
                eigenvalue: ev,
            });
        }
    }
    let theta = match spec {
        // A has no spectrum inside the interval, so neither does the
        // distinguished extension.
        ExtensionSpec::DistinguishedRelation => return Ok(Vec::new()),
        ExtensionSpec::Operator(t) => t,
    };

    let h = (b - a) / (grid_points - 1) as f64;
    let grid: Vec<f64> = (0..grid_points).map(|i| a + i as f64 * h).collect();
    let values: Vec<f64> = grid
        .par_iter()
        .map(|&l| smallest_singular(field, theta, l))
        .collect::<Result<Vec<_>>>()?;

    let s = |l: f64| smallest_singular(field, theta, l);
    let mut results: Vec<EigenResult> = Vec::new();
    for i in 0..grid_points {
        let left_ok = i == 0 || values[i] <= values[i - 1];
        let right_ok = i + 1 == grid_points || values[i] <= values[i + 1];
        if !(left_ok && right_ok) {
            continue;
        }
        let lo = if i == 0 { a } else { grid[i - 1] };
        let hi = if i + 1 == grid_points { b } else { grid[i + 1] };
        let lambda = golden_refine(&s, lo, hi)?;
        let m = theta + field.weyl(Complex64::new(lambda, 0.0))?.gamma();
        let svd = m.clone().svd(false, true);
        let k = field.aux_dim();
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&p, &q| svd.singular_values[q].total_cmp(&svd.singular_values[p]));
        let smax = svd.singular_values[order[0]];
        // The matrix itself may vanish at a fully degenerate root, so the
        // threshold keeps an absolute floor.
        let tol = KERNEL_REL_TOL * smax.max(1.0);
        let kernel_idx: Vec<usize> = order
            .iter()
            .copied()
            .filter(|&j| svd.singular_values[j] < tol)
            .collect();
        if kernel_idx.is_empty() {
            continue;
        }
        if results
            .iter()
            .any(|r| (r.lambda - lambda).abs() <= 2.0 * 1e-10 * lambda.abs().max(1.0))
        {
            continue;
        }
        let v_t = svd.v_t.as_ref().expect("svd with V");
        let mut kernel = CMatrix::zeros(k, kernel_idx.len());
        for (col, &j) in kernel_idx.iter().enumerate() {
            for l in 0..k {
                kernel[(l, col)] = v_t[(j, l)].conj();
            }
        }
        let g = field.gmap(Complex64::new(lambda, 0.0))?;
        let eigenvectors = &g * &kernel;
        let smallest = kernel_idx
            .iter()
            .map(|&j| svd.singular_values[j])
            .fold(f64::INFINITY, f64::min);
        results.push(EigenResult {
            lambda,
            multiplicity: kernel_idx.len(),
            kernel_basis: kernel,
            eigenvectors,
            smallest_singular: smallest,
        });
    }
    results.sort_by(|p, q| p.lambda.total_cmp(&q.lambda));
    Ok(results)
}

/// Recovers the perturbed operator as hat A = z I - R_Theta(z)^{-1}.
/// Finite-dimensional oracle; the result is symmetrized after passing the
/// Hermiticity check.
pub fn recover_operator(
    field: &KreinField,
    spec: &ExtensionSpec,
    z: Complex64,
) -> Result<BaseOperator> {
    check_spec_dim(field, spec)?;
    if let ExtensionSpec::DistinguishedRelation = spec {
        return Ok(field.operator().clone());
    }
    let n = field.dim();
    let r = krein_resolvent(field, spec, z)?;
    let inv = r.lu().try_inverse().ok_or(Error::SingularResolvent { z })?;
    let hat = CMatrix::identity(n, n) * z - inv;
    let defect = crate::operator::hermitian_defect(&hat);
    if defect > RECOVERY_HERMITICITY_TOL {
        return Err(Error::NotHermitian { defect });
    }
    BaseOperator::dense((&hat + hat.adjoint()).scale(0.5))
}

/// Numerical rank of hat A - A; bounded by the auxiliary dimension k.
pub fn rank_of_perturbation(field: &KreinField, spec: &ExtensionSpec) -> Result<usize> {
    if let ExtensionSpec::DistinguishedRelation = spec {
        return Ok(0);
    }
    let probe = Complex64::new(0.0, 1.0);
    let hat = recover_operator(field, spec, probe)?;
    let diff = hat.to_dense() - field.operator().to_dense();
    let sv = sorted_singular_values(&diff);
    let smax = sv[0];
    if smax <= 1e-10 * field.operator().max_norm().max(1.0) {
        return Ok(0);
    }
    Ok(sv.iter().filter(|&&s| s > 1e-8 * smax).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::TraceMap;
    use crate::testutil::{random_field, random_hermitian_small, random_vector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn scalar_field() -> KreinField {
        let a = BaseOperator::dense_from_real(&[&[0.0]]).unwrap();
        let t = TraceMap::from_real_rows(&[&[1.0]], &a).unwrap();
        KreinField::build(a, t).unwrap()
    }

    fn pair_field() -> KreinField {
        let a = BaseOperator::dense_from_real(&[&[1.0, 0.0], &[0.0, -1.0]]).unwrap();
        let t = TraceMap::from_real_rows(&[&[1.0, 1.0]], &a).unwrap();
        KreinField::build(a, t).unwrap()
    }

    #[test]
    fn krein_resolvent_scalar_closed_form() {
        let f = scalar_field();
        let spec = ExtensionSpec::scalar(3.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let z = c(rng.random_range(-3.0..3.0), rng.random_range(0.3..3.0));
            let r = krein_resolvent(&f, &spec, z).unwrap();
            let expected = 1.0 / (z - 1.0 / 3.0);
            assert!((r[(0, 0)] - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn krein_resolvent_distinguished_is_base() {
        let f = pair_field();
        let z = c(0.0, 2.0);
        let r = krein_resolvent(&f, &ExtensionSpec::DistinguishedRelation, z).unwrap();
        let base = f.operator().resolvent(z).unwrap();
        assert_eq!(r, base);
    }

    #[test]
    fn krein_resolvent_matches_recovered_operator() {
        let f = pair_field();
        let spec = ExtensionSpec::scalar(2.0);
        let z = c(0.0, 2.0);
        let r = krein_resolvent(&f, &spec, z).unwrap();
        let hat = BaseOperator::dense_from_real(&[&[1.5, 0.5], &[0.5, -0.5]]).unwrap();
        let direct = hat.resolvent(z).unwrap();
        assert!((r - direct).norm() < 1e-10);
    }

    #[test]
    fn membership_examples() {
        let f = scalar_field();
        let spec = ExtensionSpec::scalar(2.0);
        assert_eq!(
            resolvent_membership(&f, &spec, c(0.5, 0.0)).unwrap(),
            Membership::InSpectrum
        );
        assert_eq!(
            resolvent_membership(&f, &spec, c(0.0, 1.0)).unwrap(),
            Membership::InResolventSet
        );

        let f = pair_field();
        let spec = ExtensionSpec::scalar(2.0);
        let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
        assert_eq!(
            resolvent_membership(&f, &spec, c(phi, 0.0)).unwrap(),
            Membership::InSpectrum
        );
    }

    #[test]
    fn eigen_solve_scalar() {
        let f = scalar_field();
        let spec = ExtensionSpec::scalar(2.0);
        let found = eigen_solve(&f, &spec, (0.1, 0.9), 64).unwrap();
        assert_eq!(found.len(), 1);
        assert!((found[0].lambda - 0.5).abs() <= 1e-10);
        assert_eq!(found[0].multiplicity, 1);
    }

    #[test]
    fn eigen_solve_golden_ratio() {
        let f = pair_field();
        let spec = ExtensionSpec::scalar(2.0);
        let found = eigen_solve(&f, &spec, (1.1, 3.0), 64).unwrap();
        assert_eq!(found.len(), 1);
        let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
        assert!((found[0].lambda - phi).abs() <= 1e-10);
        // Eigenvector proportional to [1/(l-1), 1/(l+1)].
        let v = &found[0].eigenvectors;
        let ratio = v[(0, 0)] / v[(1, 0)];
        let expected = (phi + 1.0) / (phi - 1.0);
        assert!((ratio - c(expected, 0.0)).norm() < 1e-8);

        // Against the direct perturbed operator.
        let hat = BaseOperator::dense_from_real(&[&[1.5, 0.5], &[0.5, -0.5]]).unwrap();
        let av = hat
            .apply(&CVector::from_column_slice(v.column(0).as_slice()))
            .unwrap();
        let res = (&av
            - &CVector::from_column_slice(v.column(0).as_slice()) * c(found[0].lambda, 0.0))
            .norm()
            / v.norm();
        assert!(res < 1e-8);
    }

    #[test]
    fn eigen_solve_degenerate_kernel() {
        // Theta = -Gamma(lambda*) forces the whole boundary matrix to
        // vanish at lambda*, giving a kernel of full dimension k = 2.
        let field = random_field(6, 2, 42);
        let top = field.operator().eigenvalues().last().copied().unwrap();
        let lambda_star = top + 1.0;
        let gamma = field.weyl(c(lambda_star, 0.0)).unwrap().gamma().clone();
        let theta = -(&gamma + gamma.adjoint()).scale(0.5);
        let spec = ExtensionSpec::operator(theta).unwrap();
        let found = eigen_solve(&field, &spec, (top + 0.5, top + 1.5), 64).unwrap();
        let hit: Vec<_> = found
            .iter()
            .filter(|r| (r.lambda - lambda_star).abs() < 1e-8)
            .collect();
        assert_eq!(hit.len(), 1);
        assert_eq!(hit[0].multiplicity, 2);
        // Kernel columns orthonormal.
        let k = &hit[0].kernel_basis;
        assert!((k.adjoint() * k - CMatrix::identity(2, 2)).norm() < 1e-8);
    }

    #[test]
    fn eigen_solve_guards_interval() {
        let f = pair_field();
        let spec = ExtensionSpec::scalar(2.0);
        let err = eigen_solve(&f, &spec, (-0.5, 1.5), 64).unwrap_err();
        assert!(matches!(err, Error::IntervalTouchesBaseSpectrum { .. }));
    }

    #[test]
    fn recover_operator_examples() {
        let f = scalar_field();
        let spec = ExtensionSpec::scalar(4.0);
        let hat = recover_operator(&f, &spec, c(0.0, 1.0)).unwrap();
        assert!((hat.to_dense()[(0, 0)] - c(0.25, 0.0)).norm() < 1e-12);

        let f = pair_field();
        let spec = ExtensionSpec::scalar(2.0);
        let hat = recover_operator(&f, &spec, c(0.0, 2.0)).unwrap();
        let expected =
            BaseOperator::dense_from_real(&[&[1.5, 0.5], &[0.5, -0.5]]).unwrap();
        assert!((hat.to_dense() - expected.to_dense()).norm() < 1e-10);

        let hat = recover_operator(&f, &ExtensionSpec::DistinguishedRelation, c(0.0, 1.0))
            .unwrap();
        assert_eq!(hat.to_dense(), f.operator().to_dense());
    }

    #[test]
    fn recover_operator_probe_independent() {
        let f = pair_field();
        let spec = ExtensionSpec::scalar(2.0);
        let h1 = recover_operator(&f, &spec, c(0.0, 1.0)).unwrap();
        let h2 = recover_operator(&f, &spec, c(1.3, -0.8)).unwrap();
        assert!((h1.to_dense() - h2.to_dense()).norm() < 1e-9);
    }

    #[test]
    fn rank_of_perturbation_examples() {
        let f = pair_field();
        assert_eq!(
            rank_of_perturbation(&f, &ExtensionSpec::DistinguishedRelation).unwrap(),
            0
        );
        assert_eq!(
            rank_of_perturbation(&f, &ExtensionSpec::scalar(2.0)).unwrap(),
            1
        );

        let field = random_field(8, 3, 7);
        let theta = random_hermitian_small(3, 7);
        let spec = ExtensionSpec::operator(theta).unwrap();
        assert!(rank_of_perturbation(&field, &spec).unwrap() <= 3);
    }

    #[test]
    fn perturbed_resolvent_identities() {
        let field = random_field(6, 2, 42);
        let theta = random_hermitian_small(2, 3);
        let spec = ExtensionSpec::operator(theta).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..5 {
            let z = c(rng.random_range(-2.0..2.0), rng.random_range(0.4..2.0));
            let w = c(rng.random_range(-2.0..2.0), -rng.random_range(0.4..2.0));
            let rz = krein_resolvent(&field, &spec, z).unwrap();
            let rw = krein_resolvent(&field, &spec, w).unwrap();
            let lhs = &rz - &rw;
            let rhs = (&rz * &rw) * (w - z);
            assert!((lhs - rhs).norm() <= 1e-9);
            let rzbar = krein_resolvent(&field, &spec, z.conj()).unwrap();
            assert!((rz.adjoint() - rzbar).norm() <= 1e-10);
        }
    }

    #[test]
    fn shift_invariance() {
        // (Gamma + C, Theta) and (Gamma, Theta + C) give the same resolvent.
        let field = random_field(6, 2, 42);
        let theta = random_hermitian_small(2, 11);
        let shift = random_hermitian_small(2, 12);
        let z = c(0.7, 1.1);

        let spec_plain = ExtensionSpec::operator(theta.clone()).unwrap();
        let spec_shifted = ExtensionSpec::operator(&theta + &shift).unwrap();

        // Resolvent with the shifted Weyl sample and the original Theta.
        let sample = field.weyl(z).unwrap().shift(&shift).unwrap();
        let m = &theta + sample.gamma();
        let gz = field.gmap(z).unwrap();
        let gzbar = field.gmap(z.conj()).unwrap();
        let base = field.operator().resolvent(z).unwrap();
        let manual = &base + &gz * m.lu().solve(&gzbar.adjoint()).unwrap();

        let direct = krein_resolvent(&field, &spec_shifted, z).unwrap();
        assert!((manual - direct).norm() <= 1e-12);

        // And shifting by C and back recovers the plain resolvent.
        let plain = krein_resolvent(&field, &spec_plain, z).unwrap();
        let spec_round =
            ExtensionSpec::operator(&theta + &shift - &shift).unwrap();
        let round = krein_resolvent(&field, &spec_round, z).unwrap();
        assert!((plain - round).norm() <= 1e-12);
    }

    #[test]
    fn boundary_condition_equivalence() {
        // For each located eigenvalue, Theta zeta = tau phi_* with
        // phi_* = (G(lambda) - G_*) zeta.
        let f = pair_field();
        let spec = ExtensionSpec::scalar(2.0);
        let found = eigen_solve(&f, &spec, (1.1, 3.0), 64).unwrap();
        let theta = spec.theta().unwrap();
        for r in &found {
            for col in 0..r.multiplicity {
                let zeta = CVector::from_column_slice(r.kernel_basis.column(col).as_slice());
                let g = f.gmap(c(r.lambda, 0.0)).unwrap();
                let phi_star = (&g - f.g_star()) * &zeta;
                let lhs = theta * &zeta;
                let rhs = f.trace().apply(&phi_star).unwrap();
                assert!((lhs - rhs).norm() <= 1e-9);
            }
        }
    }

    #[test]
    fn krein_apply_matches_full_matrix() {
        let field = random_field(6, 2, 42);
        let theta = random_hermitian_small(2, 3);
        let spec = ExtensionSpec::operator(theta).unwrap();
        let z = c(0.2, 1.4);
        let full = krein_resolvent(&field, &spec, z).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let v = random_vector(6, &mut rng);
        let applied = krein_resolvent_apply(&field, &spec, z, &v).unwrap();
        assert!((&full * &v - applied).norm() < 1e-12);
    }
}
