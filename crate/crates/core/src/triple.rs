//! The boundary triple {h, gamma1, gamma2} for the restricted adjoint,
//! domain elements as (regular, charge) pairs, the Weyl function and its
//! constant-shift reparametrization.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::KreinField;
use crate::operator::{require_hermitian, CMatrix, CVector, HERMITICITY_TOL};

/// A point of the extended domain, represented by the pair
/// phi = phi_* + G_* zeta. The decomposition is never inverted: in finite
/// dimensions recovering the pair from the sum is ill-posed.
#[derive(Debug, Clone)]
pub struct DomainElement {
    regular: CVector,
    charge: CVector,
}

impl DomainElement {
    pub fn new(regular: CVector, charge: CVector) -> Self {
        DomainElement { regular, charge }
    }

    pub fn regular(&self) -> &CVector {
        &self.regular
    }

    pub fn charge(&self) -> &CVector {
        &self.charge
    }

    /// The represented vector phi_* + G_* zeta.
    pub fn represented(&self, field: &KreinField) -> Result<CVector> {
        field.check_element(self)?;
        Ok(self.regular.clone() + field.g_star() * &self.charge)
    }
}

/// One evaluation of the Weyl function.
#[derive(Debug, Clone)]
pub struct WeylSample {
    z: Complex64,
    gamma: CMatrix,
}

impl WeylSample {
    pub fn z(&self) -> Complex64 {
        self.z
    }

    pub fn gamma(&self) -> &CMatrix {
        &self.gamma
    }

    /// Hermitian part of the imaginary part (Gamma - Gamma*) / 2i.
    pub fn im_gamma(&self) -> CMatrix {
        (&self.gamma - self.gamma.adjoint()) * Complex64::new(0.0, -0.5)
    }

    /// Smallest eigenvalue of Im Gamma; nonnegative on the upper half-plane.
    pub fn min_eig_im(&self) -> f64 {
        min_eig_hermitian(&self.im_gamma())
    }

    /// Shifts the sample by a z-independent Hermitian C. Paired with the
    /// parameter shift Theta -> Theta - C this leaves the Krein resolvent
    /// unchanged.
    pub fn shift(&self, c: &CMatrix) -> Result<WeylSample> {
        if c.nrows() != self.gamma.nrows() || c.ncols() != self.gamma.ncols() {
            return Err(Error::DimensionMismatch {
                expected: self.gamma.nrows(),
                got: c.nrows(),
            });
        }
        require_hermitian(c, HERMITICITY_TOL)?;
        Ok(WeylSample {
            z: self.z,
            gamma: &self.gamma + c,
        })
    }
}

/// Smallest eigenvalue of a (numerically) Hermitian matrix.
pub(crate) fn min_eig_hermitian(m: &CMatrix) -> f64 {
    let h = (m + m.adjoint()).scale(0.5);
    let eig = nalgebra::SymmetricEigen::try_new(h, f64::EPSILON, 100_000)
        .expect("Hermitian eigensolve");
    eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

pub(crate) fn max_eig_hermitian(m: &CMatrix) -> f64 {
    let h = (m + m.adjoint()).scale(0.5);
    let eig = nalgebra::SymmetricEigen::try_new(h, f64::EPSILON, 100_000)
        .expect("Hermitian eigensolve");
    eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

impl KreinField {
    pub(crate) fn check_element(&self, el: &DomainElement) -> Result<()> {
        if el.regular.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: el.regular.len(),
            });
        }
        if el.charge.len() != self.aux_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.aux_dim(),
                got: el.charge.len(),
            });
        }
        Ok(())
    }

    /// Action of the restricted adjoint: A phi_* + RG zeta.
    pub fn adjoint_action(&self, el: &DomainElement) -> Result<CVector> {
        self.check_element(el)?;
        Ok(self.operator().apply(el.regular())? + self.rg() * el.charge())
    }

    /// gamma1 phi = -tau phi_*.
    pub fn gamma1(&self, el: &DomainElement) -> Result<CVector> {
        self.check_element(el)?;
        Ok(-self.trace().apply(el.regular())?)
    }

    /// gamma2 phi = zeta.
    pub fn gamma2(&self, el: &DomainElement) -> Result<CVector> {
        self.check_element(el)?;
        Ok(el.charge().clone())
    }

    /// Residual of the abstract Green's identity
    /// <A* phi, psi> - <phi, A* psi> = [g1 phi, g2 psi] - [g2 phi, g1 psi].
    pub fn greens_residual(&self, el1: &DomainElement, el2: &DomainElement) -> Result<f64> {
        let phi = el1.represented(self)?;
        let psi = el2.represented(self)?;
        let aphi = self.adjoint_action(el1)?;
        let apsi = self.adjoint_action(el2)?;
        let lhs = aphi.dotc(&psi) - phi.dotc(&apsi);
        let g1p = self.gamma1(el1)?;
        let g2p = self.gamma2(el1)?;
        let g1q = self.gamma1(el2)?;
        let g2q = self.gamma2(el2)?;
        let rhs = g1p.dotc(&g2q) - g2p.dotc(&g1q);
        Ok((lhs - rhs).norm())
    }

    /// The Weyl function Gamma(z) = tau (G_* - G(z)).
    pub fn weyl(&self, z: Complex64) -> Result<WeylSample> {
        let gz = self.gmap(z)?;
        let gamma = self.trace().matrix() * (self.g_star() - gz);
        Ok(WeylSample { z, gamma })
    }

    /// Residual of the Q-function identity
    /// Gamma(z) - Gamma(w)* = (z - conj w) G(w)* G(z).
    pub fn q_identity_residual(&self, z: Complex64, w: Complex64) -> Result<f64> {
        let gz = self.weyl(z)?;
        let gw = self.weyl(w)?;
        let gmz = self.gmap(z)?;
        let gmw = self.gmap(w)?;
        let rhs = (gmw.adjoint() * gmz) * (z - w.conj());
        Ok((gz.gamma() - gw.gamma().adjoint() - rhs).norm())
    }

    /// Constructs a domain element hitting the prescribed boundary values:
    /// gamma1 = target1 (via the minimum-norm solve of tau phi_* = -target1)
    /// and gamma2 = target2 exactly.
    pub fn surjectivity_witness(
        &self,
        target1: &CVector,
        target2: &CVector,
    ) -> Result<DomainElement> {
        if target1.len() != self.aux_dim() || target2.len() != self.aux_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.aux_dim(),
                got: target1.len(),
            });
        }
        let regular = self.trace().min_norm_preimage(&(-target1))?;
        Ok(DomainElement::new(regular, target2.clone()))
    }
}
