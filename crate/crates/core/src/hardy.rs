//! Hardy-type initial state and its two counterfactual values.
//!
//! `|Ψ⟩ = |l'⟩|r'⟩ − ⟨l̄|l'⟩⟨r|r'⟩ |l̄⟩|r⟩`, `|0⟩ = Ψ/‖Ψ‖`, with
//! `l = L2+`, `l̄ = L2−`, `l' = L1+`, `r = R2+`, `r' = R1−`.
//!
//! L2 and R2 are the computational bases; L1 is L2 rotated by `alpha` and
//! R1 is R2 rotated by `beta`, so `|⟨l|l'⟩|² = cos²α`, `|⟨l̄|l'⟩|² = sin²α`
//! and `|⟨r|r'⟩|² = cos²β`. All overlaps are real.

use std::f64::consts::FRAC_PI_2;

use crate::counterfactual::Scenario;
use crate::error::{Error, Result};
use crate::hilbert::{tensor, BipartiteSpace, DensityOperator, Factor, Ket};
use crate::measurement::MeasurementBasis;
use crate::spacetime::OrderTag;

pub const L: &str = "L2+";
pub const L_BAR: &str = "L2-";
pub const L_PRIME: &str = "L1+";
pub const R: &str = "R2+";
pub const R_PRIME: &str = "R1-";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardyParams {
    alpha: f64,
    beta: f64,
}

impl HardyParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        let inside = |a: f64| a > 0.0 && a < FRAC_PI_2;
        if !(inside(alpha) && inside(beta)) {
            return Err(Error::DegenerateParams { alpha, beta });
        }
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `|⟨l|l'⟩|²`
    pub fn l_overlap_sq(&self) -> f64 {
        self.alpha.cos().powi(2)
    }

    /// `|⟨l̄|l'⟩|²`
    pub fn l_bar_overlap_sq(&self) -> f64 {
        self.alpha.sin().powi(2)
    }

    /// `|⟨r|r'⟩|²`
    pub fn r_overlap_sq(&self) -> f64 {
        self.beta.cos().powi(2)
    }
}

#[derive(Debug, Clone)]
pub struct HardySetup {
    pub params: HardyParams,
    pub space: BipartiteSpace,
    /// Normalized initial state.
    pub ket0: Ket,
    /// `‖Ψ‖²` before normalization.
    pub psi_norm_sq: f64,
    pub l2: MeasurementBasis,
    pub l1: MeasurementBasis,
    pub r2: MeasurementBasis,
    pub r1: MeasurementBasis,
}

impl HardySetup {
    pub fn rho0(&self) -> DensityOperator {
        DensityOperator::pure(self.space, &self.ket0).expect("qubit pair")
    }

    /// 𝓛 = L2, 𝓡 = R2, 𝓡′ = R1.
    pub fn scenario(&self, order: OrderTag) -> Scenario {
        Scenario::new(self.rho0(), self.l2.clone(), self.r2.clone(), self.r1.clone(), order)
            .expect("R1 and R2 are incompatible for interior beta")
    }
}

pub fn build_hardy(params: HardyParams) -> Result<HardySetup> {
    let space = BipartiteSpace::qubits();
    let l2 = MeasurementBasis::computational(Factor::L, &[L, L_BAR])?;
    let l1 = MeasurementBasis::rotated(Factor::L, params.alpha, [L_PRIME, "L1-"])?;
    let r2 = MeasurementBasis::computational(Factor::R, &[R, "R2-"])?;
    // R1− = (cos β, sin β), R1+ its complement.
    let (sb, cb) = params.beta.sin_cos();
    let r1 = MeasurementBasis::new(
        Factor::R,
        vec![Ket::from_real(&[-sb, cb])?, Ket::from_real(&[cb, sb])?],
        vec!["R1+".into(), R_PRIME.into()],
    )?;

    let l_bar = l2.vector(L_BAR)?;
    let l_prime = l1.vector(L_PRIME)?;
    let r = r2.vector(R)?;
    let r_prime = r1.vector(R_PRIME)?;

    let coeff = l_bar.inner(l_prime) * r.inner(r_prime);
    let psi = tensor(space, l_prime, r_prime)?.amplitudes() - tensor(space, l_bar, r)?.amplitudes() * coeff;
    let psi_norm_sq = psi.norm_squared();
    let ket0 = Ket::normalized(psi)?;
    Ok(HardySetup {
        params,
        space,
        ket0,
        psi_norm_sq,
        l2,
        l1,
        r2,
        r1,
    })
}

/// The R-first counterfactual in terms of squared overlaps:
/// `(|⟨l|l'⟩|² + |⟨l̄|l'⟩|² (1 − |⟨r|r'⟩|²)²) / (|⟨l|l'⟩|² + |⟨l̄|l'⟩|² (1 − |⟨r|r'⟩|²))`.
pub fn r_first_ratio(l_overlap_sq: f64, l_bar_overlap_sq: f64, r_overlap_sq: f64) -> f64 {
    let miss = 1.0 - r_overlap_sq;
    (l_overlap_sq + l_bar_overlap_sq * miss * miss) / (l_overlap_sq + l_bar_overlap_sq * miss)
}

/// R-first closed form; strictly below 1 for interior parameters.
pub fn closed_form_r_l(params: HardyParams) -> f64 {
    r_first_ratio(params.l_overlap_sq(), params.l_bar_overlap_sq(), params.r_overlap_sq())
}

/// L-first closed form: given `r`, the L-jump leaves R in `|r'⟩` with certainty.
pub fn closed_form_l_r(_params: HardyParams) -> f64 {
    1.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, FRAC_PI_6};

    #[test]
    fn rejects_endpoints() {
        for (a, b) in [(0.0, 0.5), (0.5, FRAC_PI_2), (-0.1, 0.3), (f64::NAN, 0.3)] {
            assert!(matches!(HardyParams::new(a, b), Err(Error::DegenerateParams { .. })));
        }
    }

    #[test]
    fn symmetric_state_amplitudes() {
        // Expanded by hand in the L2⊗R2 basis: (cαcβ, cαsβ, 0, sαsβ)/‖Ψ‖,
        // ‖Ψ‖² = 1 − sin²α cos²β = 3/4 at α = β = π/4.
        let h = build_hardy(HardyParams::new(FRAC_PI_4, FRAC_PI_4).unwrap()).unwrap();
        assert!((h.psi_norm_sq - 0.75).abs() < 1e-15);
        let n = 0.75f64.sqrt();
        let want = [0.5 / n, 0.5 / n, 0.0, 0.5 / n];
        for (a, w) in h.ket0.amplitudes().iter().zip(want) {
            assert!((a.re - w).abs() < 1e-15 && a.im.abs() < 1e-15);
        }
    }

    #[test]
    fn hardy_zero_and_nonzero_components() {
        let h = build_hardy(HardyParams::new(0.4, 1.1).unwrap()).unwrap();
        let l_bar_r = tensor(h.space, h.l2.vector(L_BAR).unwrap(), h.r2.vector(R).unwrap()).unwrap();
        assert!(l_bar_r.inner(&h.ket0).norm() < 1e-15);
        let lp_rp = tensor(h.space, h.l1.vector(L_PRIME).unwrap(), h.r1.vector(R_PRIME).unwrap()).unwrap();
        assert!(lp_rp.inner(&h.ket0).norm() > 0.1);
    }

    #[test]
    fn closed_form_examples() {
        let sym = HardyParams::new(FRAC_PI_4, FRAC_PI_4).unwrap();
        assert!((closed_form_r_l(sym) - 5.0 / 6.0).abs() < 1e-15);
        assert_eq!(closed_form_l_r(sym), 1.0);
        // |⟨r|r'⟩|² → 1 and |⟨l̄|l'⟩|² → 0 both give 1.
        assert!((r_first_ratio(0.5, 0.5, 1.0) - 1.0).abs() < 1e-15);
        assert!((r_first_ratio(1.0, 0.0, 0.3) - 1.0).abs() < 1e-15);
        let p = HardyParams::new(FRAC_PI_3, FRAC_PI_6).unwrap();
        assert!(closed_form_r_l(p) < 1.0);
    }
}
