//! Seeded invariant suite aggregating the algebraic identities of the
//! construction; backs the `verify` command and the acceptance tests.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::extension::{krein_resolvent, recover_operator, ExtensionSpec};
use crate::field::KreinField;
use crate::operator::{CMatrix, CVector};
use crate::triple::DomainElement;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn new(name: &str, max_residual: f64, tolerance: f64) -> Self {
        Check {
            name: name.to_string(),
            max_residual,
            tolerance,
            pass: max_residual <= tolerance,
        }
    }
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.pass)
    }
}

fn random_vec(n: usize, rng: &mut ChaCha8Rng) -> CVector {
    CVector::from_fn(n, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

/// A z off the real axis, scaled to the spectral range of the operator.
fn random_upper_z(field: &KreinField, rng: &mut ChaCha8Rng) -> Complex64 {
    let evs = field.operator().eigenvalues();
    let lo = evs.first().copied().unwrap_or(0.0) - 1.0;
    let hi = evs.last().copied().unwrap_or(0.0) + 1.0;
    Complex64::new(rng.random_range(lo..hi), rng.random_range(0.1..10.0))
}

/// Runs the full identity suite on a field and an optional extension
/// parameter. The oracle comparison is skipped above `oracle_cap`.
pub fn run_suite(
    field: &KreinField,
    spec: Option<&ExtensionSpec>,
    seed: u64,
    oracle_cap: usize,
) -> Result<VerifyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    let n = field.dim();
    let k = field.aux_dim();

    // Construction identities, recomputed as absolute residuals.
    let rg_closed = (field.g_plus() - field.g_minus()) * Complex64::new(0.0, 0.5);
    checks.push(Check::new(
        "field identity RG = (i/2)(G(i) - G(-i))",
        (field.rg() - rg_closed).norm(),
        1e-12 * field.rg().norm().max(1.0),
    ));
    let gstar_closed = field.rg() * Complex64::new(0.0, -1.0) + field.g_minus();
    checks.push(Check::new(
        "field identity G_* = -i RG + G",
        (field.g_star() - gstar_closed).norm(),
        1e-12 * field.g_star().norm().max(1.0),
    ));

    // First-resolvent identity for G: (z - w) R(w) G(z) = G(w) - G(z).
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let z = random_upper_z(field, &mut rng);
        let w = random_upper_z(field, &mut rng).conj();
        worst = worst.max(field.check_resolvent_identity(z, w)?);
    }
    checks.push(Check::new("resolvent identity for G(z)", worst, 1e-10));

    // Green's identity over random domain elements.
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let e1 = DomainElement::new(random_vec(n, &mut rng), random_vec(k, &mut rng));
        let e2 = DomainElement::new(random_vec(n, &mut rng), random_vec(k, &mut rng));
        worst = worst.max(field.greens_residual(&e1, &e2)?);
    }
    checks.push(Check::new("Green's identity", worst, 1e-10));

    // Q-function identity across half-planes.
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let z = random_upper_z(field, &mut rng);
        let w = if rng.random_range(0.0..1.0) < 0.5 {
            random_upper_z(field, &mut rng)
        } else {
            random_upper_z(field, &mut rng).conj()
        };
        worst = worst.max(field.q_identity_residual(z, w)?);
    }
    checks.push(Check::new("Q-function identity", worst, 1e-10));

    // Dissipativity and the equality Im Gamma(z) = Im z * G(z)* G(z).
    let mut worst_eig = 0.0f64;
    let mut worst_eq = 0.0f64;
    for _ in 0..20 {
        let z = random_upper_z(field, &mut rng);
        let s = field.weyl(z)?;
        worst_eig = worst_eig.max((-s.min_eig_im()).max(0.0));
        let g = field.gmap(z)?;
        let rhs = (g.adjoint() * &g).scale(z.im);
        worst_eq = worst_eq.max((s.im_gamma() - rhs).norm());
    }
    checks.push(Check::new("dissipativity of Gamma", worst_eig, 1e-10));
    checks.push(Check::new(
        "Im Gamma(z) = Im z * G(z)*G(z)",
        worst_eq,
        1e-10,
    ));

    // Boundary-map surjectivity round trips.
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let t1 = random_vec(k, &mut rng);
        let t2 = random_vec(k, &mut rng);
        let el = field.surjectivity_witness(&t1, &t2)?;
        worst = worst.max((field.gamma1(&el)? - &t1).norm());
        worst = worst.max((field.gamma2(&el)? - &t2).norm());
    }
    checks.push(Check::new("boundary-map surjectivity", worst, 1e-10));

    if let Some(spec) = spec {
        // Shift invariance: moving a Hermitian C between Gamma and Theta.
        if let Some(theta) = spec.theta() {
            let raw = CMatrix::from_fn(k, k, |_, _| {
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            let c = (raw.clone() + raw.adjoint()).scale(0.5);
            let z = random_upper_z(field, &mut rng);
            let shifted_spec = ExtensionSpec::operator(theta + &c)?;
            let sample = field.weyl(z)?.shift(&c)?;
            let m = theta + sample.gamma();
            let gz = field.gmap(z)?;
            let gzbar = field.gmap(z.conj())?;
            let base = field.operator().resolvent(z)?;
            let via_shifted_weyl = &base
                + &gz
                    * m.lu()
                        .solve(&gzbar.adjoint())
                        .ok_or(crate::error::Error::SingularBoundaryOperator { z })?;
            let via_shifted_theta = krein_resolvent(field, &shifted_spec, z)?;
            checks.push(Check::new(
                "shift invariance (Gamma + C vs Theta + C)",
                (via_shifted_weyl - via_shifted_theta).norm(),
                1e-12,
            ));
        }

        // Krein formula against the recovered-operator oracle.
        if n <= oracle_cap {
            let probe = Complex64::new(0.0, 1.0);
            let hat = recover_operator(field, spec, probe)?;
            let mut worst = 0.0f64;
            for _ in 0..10 {
                let z = random_upper_z(field, &mut rng);
                let krein = krein_resolvent(field, spec, z)?;
                let direct = hat.resolvent(z)?;
                worst = worst.max((krein - direct).norm());
            }
            checks.push(Check::new("Krein formula vs recovered operator", worst, 1e-9));

            let hat2 = recover_operator(field, spec, Complex64::new(0.4, -1.3))?;
            checks.push(Check::new(
                "recovered operator probe independence",
                (hat.to_dense() - hat2.to_dense()).norm(),
                1e-9,
            ));
        }

        // Perturbed first-resolvent identity and adjoint symmetry.
        let mut worst_fr = 0.0f64;
        let mut worst_adj = 0.0f64;
        for _ in 0..5 {
            let z = random_upper_z(field, &mut rng);
            let w = random_upper_z(field, &mut rng).conj();
            let rz = krein_resolvent(field, spec, z)?;
            let rw = krein_resolvent(field, spec, w)?;
            worst_fr = worst_fr.max((&rz - &rw - (&rz * &rw) * (w - z)).norm());
            let rzbar = krein_resolvent(field, spec, z.conj())?;
            worst_adj = worst_adj.max((rz.adjoint() - rzbar).norm());
        }
        checks.push(Check::new(
            "perturbed first resolvent identity",
            worst_fr,
            1e-9,
        ));
        checks.push(Check::new("perturbed adjoint symmetry", worst_adj, 1e-10));
    }

    Ok(VerifyReport { seed, checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_model, ModelSpec};
    use crate::testutil::random_hermitian_small;

    #[test]
    fn suite_passes_on_fixtures() {
        for spec in [
            ModelSpec::ScalarZero,
            ModelSpec::DiagPair,
            ModelSpec::RandomHermitian { n: 8, k: 3, seed: 7 },
        ] {
            let m = build_model(&spec).unwrap();
            let k = m.trace.aux_dim();
            let field = KreinField::build(m.operator, m.trace).unwrap();
            let theta = ExtensionSpec::operator(random_hermitian_small(k, 7)).unwrap();
            let report = run_suite(&field, Some(&theta), 42, 4096).unwrap();
            assert!(
                report.all_pass(),
                "failing check: {:?}",
                report.first_failure()
            );
        }
    }
}
