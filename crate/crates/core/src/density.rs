//! Herglotz certification of the Weyl function and approximate spectral
//! densities by Stieltjes inversion of (Theta + Gamma)^{-1}.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::extension::{boundary_matrix, ExtensionSpec};
use crate::field::KreinField;
use crate::operator::CMatrix;
use crate::triple::{max_eig_hermitian, min_eig_hermitian};

/// Eigenvalue slack for the Herglotz sign checks.
pub const HERGLOTZ_SLACK: f64 = 1e-10;

/// One Stieltjes-inverted sample of the boundary measure at lambda + i eps.
#[derive(Debug, Clone)]
pub struct DensitySample {
    pub lambda: f64,
    pub epsilon: f64,
    /// (1/pi) Im[-(Theta + Gamma(lambda + i eps))^{-1}], positive
    /// semidefinite by the pinned sign convention.
    pub density: CMatrix,
    /// trace of `density`.
    pub trace_density: f64,
    /// Density of states of the perturbed operator relative to the base,
    /// (1/pi) Im tr[M G(conj z)* G(z)] with M = -(Theta + Gamma(z))^{-1}.
    /// Its Lorentzian mass at an isolated eigenvalue is the multiplicity.
    pub states_density: f64,
}

/// One certified point of the Herglotz report.
#[derive(Debug, Clone)]
pub struct HerglotzSample {
    pub z: Complex64,
    pub min_eig_im_gamma: f64,
    /// Largest eigenvalue of Im[(Theta + Gamma(z))^{-1}]; nonpositive up
    /// to slack. Absent for the distinguished relation.
    pub max_eig_im_inverse: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct HerglotzReport {
    pub samples: Vec<HerglotzSample>,
    pub all_pass: bool,
}

/// Certifies Im Gamma(z) >= 0 and Im[(Theta + Gamma(z))^{-1}] <= 0 on a
/// set of upper-half-plane samples.
pub fn herglotz_certify(
    field: &KreinField,
    spec: &ExtensionSpec,
    z_samples: &[Complex64],
) -> Result<HerglotzReport> {
    let mut samples = Vec::with_capacity(z_samples.len());
    let mut all_pass = true;
    for &z in z_samples {
        if z.im <= 0.0 {
            return Err(Error::SampleOutsideUpperHalfPlane { z });
        }
        let weyl = field.weyl(z)?;
        let min_gamma = weyl.min_eig_im();
        let max_inv = match spec {
            ExtensionSpec::DistinguishedRelation => None,
            ExtensionSpec::Operator(_) => {
                let m = boundary_matrix(field, spec, z)?;
                let inv = m
                    .lu()
                    .try_inverse()
                    .ok_or(Error::SingularBoundaryOperator { z })?;
                let im = (&inv - inv.adjoint()) * Complex64::new(0.0, -0.5);
                Some(max_eig_hermitian(&im))
            }
        };
        let pass = min_gamma >= -HERGLOTZ_SLACK
            && max_inv.map_or(true, |m| m <= HERGLOTZ_SLACK);
        all_pass &= pass;
        samples.push(HerglotzSample {
            z,
            min_eig_im_gamma: min_gamma,
            max_eig_im_inverse: max_inv,
            pass,
        });
    }
    Ok(HerglotzReport { samples, all_pass })
}

/// Stieltjes inversion at lambda + i eps for the extension Theta.
pub fn stieltjes_density(
    field: &KreinField,
    spec: &ExtensionSpec,
    lambda: f64,
    epsilon: f64,
) -> Result<DensitySample> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidSpec(format!("epsilon must be positive, got {epsilon}")));
    }
    if spec.theta().is_none() {
        return Err(Error::NotApplicable(
            "spectral density of (Theta + Gamma)^{-1} is undefined for the distinguished relation".into(),
        ));
    }
    let z = Complex64::new(lambda, epsilon);
    let m = boundary_matrix(field, spec, z)?;
    let inv = m
        .lu()
        .try_inverse()
        .ok_or(Error::SingularBoundaryOperator { z })?;
    let neg_inv = -inv;
    let density = (&neg_inv - neg_inv.adjoint()) * Complex64::new(0.0, -0.5 / std::f64::consts::PI);
    let min_eig = min_eig_hermitian(&density);
    if min_eig < -HERGLOTZ_SLACK {
        return Err(Error::NonPositiveDensity { min_eig });
    }
    let trace_density = density.diagonal().iter().map(|c| c.re).sum();
    let gz = field.gmap(z)?;
    let gzbar = field.gmap(z.conj())?;
    let weighted = &neg_inv * (gzbar.adjoint() * gz);
    let states_density = weighted.diagonal().iter().map(|c| c.im).sum::<f64>()
        / std::f64::consts::PI;
    Ok(DensitySample {
        lambda,
        epsilon,
        density,
        trace_density,
        states_density,
    })
}

/// Uniform grid driver over `stieltjes_density`; per-point errors are
/// recorded, not fatal.
pub fn density_scan(
    field: &KreinField,
    spec: &ExtensionSpec,
    interval: (f64, f64),
    grid_points: usize,
    epsilon: f64,
) -> Result<Vec<(f64, Result<DensitySample>)>> {
    if spec.theta().is_none() {
        return Err(Error::NotApplicable(
            "density scan requires an operator parameter Theta".into(),
        ));
    }
    let (a, b) = interval;
    if !(a < b) || grid_points < 2 {
        return Err(Error::InvalidSpec(format!(
            "bad density grid: interval [{a}, {b}], {grid_points} points"
        )));
    }
    let h = (b - a) / (grid_points - 1) as f64;
    let grid: Vec<f64> = (0..grid_points).map(|i| a + i as f64 * h).collect();
    Ok(grid
        .into_par_iter()
        .map(|l| (l, stieltjes_density(field, spec, l, epsilon)))
        .collect())
}
