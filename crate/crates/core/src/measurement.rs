//! Projective measurements on one factor of a bipartite system.
//!
//! A nondegenerate observable is represented by its labelled eigenbasis
//! ([`MeasurementBasis`]). Updates:
//!
//! - nonselective `ρ → Σ_l (P_l ⊗ I) ρ (P_l ⊗ I)`; the result is not registered,
//!   and the other factor's reduced state is unchanged;
//! - selective `ρ → (P_l ⊗ I) ρ (P_l ⊗ I) / ⟨l|ρ_L|l⟩`; the other factor's
//!   reduced state becomes `⟨l|ρ|l⟩ / ⟨l|ρ_L|l⟩`;
//! - for pure states, `|0⟩ → |l⟩ ⊗ ⟨l|0⟩/‖⟨l|0⟩‖`.

use std::collections::HashSet;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::hilbert::{
    check_dim, contract, partial_trace_l, partial_trace_r, tensor, BipartiteSpace, DensityOperator, Factor, Ket,
    Operator, C64,
};
use crate::{EPS_NUM, EPS_PROB};

/// Labelled orthonormal eigenbasis of a nondegenerate observable on one factor.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementBasis {
    factor: Factor,
    vectors: Vec<Ket>,
    labels: Vec<String>,
}

impl MeasurementBasis {
    pub fn new(factor: Factor, vectors: Vec<Ket>, labels: Vec<String>) -> Result<Self> {
        let dim = vectors.len();
        if dim == 0 {
            return Err(Error::InvalidDimension("empty basis".into()));
        }
        check_dim(dim, labels.len())?;
        for v in &vectors {
            check_dim(dim, v.dim())?;
        }
        let mut worst = 0.0f64;
        for (i, a) in vectors.iter().enumerate() {
            for (j, b) in vectors.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((a.inner(b) - C64::new(target, 0.0)).norm());
            }
        }
        if worst > EPS_NUM {
            return Err(Error::NotOrthonormal(worst));
        }
        let mut seen = HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        Ok(Self {
            factor,
            vectors,
            labels,
        })
    }

    pub fn computational(factor: Factor, labels: &[&str]) -> Result<Self> {
        let d = labels.len();
        Self::new(
            factor,
            (0..d).map(|k| Ket::basis(d, k)).collect(),
            labels.iter().map(|s| s.to_string()).collect(),
        )
    }

    /// Real qubit basis rotated by `theta`: `(cos θ, sin θ)` carries
    /// `labels[0]`, `(−sin θ, cos θ)` carries `labels[1]`.
    pub fn rotated(factor: Factor, theta: f64, labels: [&str; 2]) -> Result<Self> {
        let (s, c) = theta.sin_cos();
        Self::new(
            factor,
            vec![Ket::from_real(&[c, s])?, Ket::from_real(&[-s, c])?],
            labels.iter().map(|s| s.to_string()).collect(),
        )
    }

    pub fn factor(&self) -> Factor {
        self.factor
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn vectors(&self) -> &[Ket] {
        &self.vectors
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn vector(&self, label: &str) -> Result<&Ket> {
        Ok(&self.vectors[self.index_of(label)?])
    }

    /// Applies a local unitary to every basis vector.
    pub fn rotate(&self, unitary: &Operator) -> Result<Self> {
        let vectors = self
            .vectors
            .iter()
            .map(|v| v.evolve(unitary))
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.factor, vectors, self.labels.clone())
    }

    /// Largest elementwise commutator norm over all projector pairs.
    pub fn commutator_norm(&self, other: &MeasurementBasis) -> f64 {
        let mut worst = 0.0f64;
        for a in &self.vectors {
            let pa = a.projector();
            for b in &other.vectors {
                worst = worst.max(pa.commutator(&b.projector()).max_abs());
            }
        }
        worst
    }

    fn check_fits(&self, space: BipartiteSpace) -> Result<()> {
        check_dim(space.factor_dim(self.factor), self.dim())
    }

    fn embedded_projector(&self, space: BipartiteSpace, k: usize) -> Operator {
        self.vectors[k]
            .projector()
            .embed(space, self.factor)
            .expect("basis fits space")
    }
}

/// Born weight of one outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub label: String,
    pub probability: f64,
}

fn marginal_on(rho: &DensityOperator, factor: Factor) -> Operator {
    match factor {
        Factor::L => partial_trace_r(rho),
        Factor::R => partial_trace_l(rho),
    }
}

/// `⟨l|ρ_F|l⟩` with `F` the basis factor.
pub fn outcome_probability(rho: &DensityOperator, basis: &MeasurementBasis, label: &str) -> Result<f64> {
    basis.check_fits(rho.space())?;
    let marginal = marginal_on(rho, basis.factor);
    Ok(marginal.expectation(basis.vector(label)?))
}

pub fn outcome_distribution(rho: &DensityOperator, basis: &MeasurementBasis) -> Result<Vec<Outcome>> {
    basis.check_fits(rho.space())?;
    let marginal = marginal_on(rho, basis.factor);
    Ok(basis
        .labels
        .iter()
        .zip(&basis.vectors)
        .map(|(label, v)| Outcome {
            label: label.clone(),
            probability: marginal.expectation(v).max(0.0),
        })
        .collect())
}

pub fn nonselective_update(rho: &DensityOperator, basis: &MeasurementBasis) -> Result<DensityOperator> {
    let space = rho.space();
    basis.check_fits(space)?;
    let mut acc = Operator::zeros(space.dim());
    for k in 0..basis.dim() {
        let p = basis.embedded_projector(space, k);
        acc = acc.add(&p.mul(rho.operator()).mul(&p));
    }
    Ok(DensityOperator::from_map_output(space, acc.into_matrix()))
}

pub fn selective_update(rho: &DensityOperator, basis: &MeasurementBasis, label: &str) -> Result<DensityOperator> {
    let space = rho.space();
    basis.check_fits(space)?;
    let k = basis.index_of(label)?;
    let probability = outcome_probability(rho, basis, label)?;
    if probability <= EPS_PROB {
        return Err(Error::ImpossibleOutcome {
            label: label.to_string(),
            probability,
        });
    }
    let p = basis.embedded_projector(space, k);
    let projected = p.mul(rho.operator()).mul(&p).scale(1.0 / probability);
    Ok(DensityOperator::from_map_output(space, projected.into_matrix()))
}

/// Selective measurement on a pure composite state. Returns the post-
/// measurement ket `|l⟩ ⊗ |partner⟩` and the partner on the other factor.
pub fn pure_selective(space: BipartiteSpace, psi: &Ket, basis: &MeasurementBasis, label: &str) -> Result<(Ket, Ket)> {
    basis.check_fits(space)?;
    let l = basis.vector(label)?;
    let v = contract(space, psi, basis.factor, l)?;
    let probability = v.norm_squared();
    if probability <= EPS_PROB {
        return Err(Error::ImpossibleOutcome {
            label: label.to_string(),
            probability,
        });
    }
    let partner = Ket::normalized(v)?;
    let joint = match basis.factor {
        Factor::L => tensor(space, l, &partner)?,
        Factor::R => tensor(space, &partner, l)?,
    };
    Ok((joint, partner))
}

/// Residual of the symmetric-case condition for one outcome: the partner
/// induced by `label`, contracted back into `psi`, should reproduce the
/// outcome vector up to phase. Returns the sine of the angle between them.
pub fn symmetric_residual(space: BipartiteSpace, psi: &Ket, basis: &MeasurementBasis, label: &str) -> Result<f64> {
    let (_, partner) = pure_selective(space, psi, basis, label)?;
    let back = contract(space, psi, basis.factor.other(), &partner)?;
    if back.norm_squared() <= EPS_PROB {
        return Err(Error::ImpossibleOutcome {
            label: label.to_string(),
            probability: back.norm_squared(),
        });
    }
    let back = Ket::normalized(back)?;
    Ok(basis.vector(label)?.ray_distance(&back))
}

pub fn is_symmetric_outcome(space: BipartiteSpace, psi: &Ket, basis: &MeasurementBasis, label: &str) -> Result<bool> {
    Ok(symmetric_residual(space, psi, basis, label)? <= EPS_NUM)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryEntry {
    pub factor: Factor,
    pub label: String,
    /// `None` when the outcome has zero amplitude in the state.
    pub residual: Option<f64>,
}

impl SymmetryEntry {
    pub fn symmetric(&self) -> Option<bool> {
        self.residual.map(|r| r <= EPS_NUM)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryReport {
    pub entries: Vec<SymmetryEntry>,
}

impl SymmetryReport {
    /// Conjunction over every outcome with nonzero amplitude.
    pub fn all_symmetric(&self) -> bool {
        let defined: Vec<bool> = self.entries.iter().filter_map(|e| e.symmetric()).collect();
        !defined.is_empty() && defined.into_iter().all(|b| b)
    }
}

/// Symmetric-case check for every outcome of both bases.
pub fn symmetric_case(
    space: BipartiteSpace,
    psi: &Ket,
    l_basis: &MeasurementBasis,
    r_basis: &MeasurementBasis,
) -> Result<SymmetryReport> {
    let mut entries = Vec::new();
    for basis in [l_basis, r_basis] {
        basis.check_fits(space)?;
        for label in &basis.labels {
            let residual = match symmetric_residual(space, psi, basis, label) {
                Ok(r) => Some(r),
                Err(Error::ImpossibleOutcome { .. }) => None,
                Err(e) => return Err(e),
            };
            entries.push(SymmetryEntry {
                factor: basis.factor,
                label: label.clone(),
                residual,
            });
        }
    }
    Ok(SymmetryReport { entries })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReciprocityStatus {
    Holds,
    Violated,
    /// `⟨a|0⟩` vanishes: the antecedent outcome never occurs.
    NullPremise,
    /// `⟨⊥partner|0⟩` vanishes, as for product states.
    NullConclusion,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReciprocityEntry {
    /// Factor of the antecedent outcome.
    pub factor: Factor,
    pub label: String,
    /// Normalized `⟨a|0⟩` on the other factor.
    pub partner: Option<Ket>,
    /// Largest of `|⟨⊥p|p⟩|` and `|⟨⊥p|⟨a|0⟩|` (normalized).
    pub premise_residual: Option<f64>,
    /// Largest of `|⟨a|⟨⊥p|0⟩|` (normalized) and the distance of the
    /// normalized `⟨⊥p|0⟩` from the ray of `⊥a`.
    pub conclusion_residual: Option<f64>,
    pub status: ReciprocityStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReciprocityReport {
    pub entries: Vec<ReciprocityEntry>,
}

impl ReciprocityReport {
    pub fn holds(&self) -> bool {
        self.entries.iter().all(|e| e.status != ReciprocityStatus::Violated)
    }

    pub fn max_residual(&self) -> f64 {
        self.entries
            .iter()
            .flat_map(|e| [e.premise_residual, e.conclusion_residual])
            .flatten()
            .fold(0.0, f64::max)
    }
}

/// Orthogonal complement of a unit qubit vector, `(x, y) → (−ȳ, x̄)`.
fn qubit_complement(k: &Ket) -> Ket {
    let a = k.amplitudes();
    Ket::normalized(DVector::from_vec(vec![-a[1].conj(), a[0].conj()])).expect("unit input")
}

fn reciprocity_entry(space: BipartiteSpace, psi: &Ket, basis: &MeasurementBasis, k: usize) -> Result<ReciprocityEntry> {
    let factor = basis.factor;
    let a = &basis.vectors[k];
    // In two dimensions the other basis vector spans the complement.
    let a_perp = &basis.vectors[1 - k];
    let mut entry = ReciprocityEntry {
        factor,
        label: basis.labels[k].clone(),
        partner: None,
        premise_residual: None,
        conclusion_residual: None,
        status: ReciprocityStatus::NullPremise,
    };

    let v = contract(space, psi, factor, a)?;
    let v_norm = v.norm();
    if v_norm * v_norm <= EPS_PROB {
        return Ok(entry);
    }
    let partner = Ket::normalized(v.clone())?;
    let partner_perp = qubit_complement(&partner);
    let premise = partner_perp
        .inner(&partner)
        .norm()
        .max(partner_perp.amplitudes().dotc(&v).norm() / v_norm);
    entry.partner = Some(partner);
    entry.premise_residual = Some(premise);

    let w = contract(space, psi, factor.other(), &partner_perp)?;
    let w_norm = w.norm();
    if w_norm * w_norm <= EPS_PROB {
        entry.status = ReciprocityStatus::NullConclusion;
        return Ok(entry);
    }
    let along_a = a.amplitudes().dotc(&w).norm() / w_norm;
    let w_hat = Ket::normalized(w)?;
    let conclusion = along_a.max(a_perp.ray_distance(&w_hat));
    entry.conclusion_residual = Some(conclusion);
    entry.status = if premise.max(conclusion) <= EPS_NUM {
        ReciprocityStatus::Holds
    } else {
        ReciprocityStatus::Violated
    };
    Ok(entry)
}

/// Checks `(|a⟩ ⇒ |p⟩) ⇒ (|⊥p⟩ ⇒ |⊥a⟩)` for every antecedent `a` in both
/// qubit bases, where `|p⟩ ∝ ⟨a|0⟩` is the induced partner. Null contractions
/// are reported in the entry status.
pub fn check_reciprocity(
    space: BipartiteSpace,
    psi: &Ket,
    l_basis: &MeasurementBasis,
    r_basis: &MeasurementBasis,
) -> Result<ReciprocityReport> {
    if space.d_l() != 2 || space.d_r() != 2 {
        return Err(Error::NotTwoDimensional(space.d_l().max(space.d_r())));
    }
    check_dim(space.dim(), psi.dim())?;
    let mut entries = Vec::new();
    for (basis, expected) in [(l_basis, Factor::L), (r_basis, Factor::R)] {
        if basis.factor != expected {
            return Err(Error::WrongFactor {
                expected,
                got: basis.factor,
            });
        }
        for k in 0..2 {
            entries.push(reciprocity_entry(space, psi, basis, k)?);
        }
    }
    Ok(ReciprocityReport { entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn z(factor: Factor) -> MeasurementBasis {
        MeasurementBasis::computational(factor, &["0", "1"]).unwrap()
    }

    fn singlet() -> Ket {
        Ket::from_real(&[0.0, 1.0, -1.0, 0.0]).unwrap()
    }

    #[test]
    fn basis_validation() {
        let bad = MeasurementBasis::new(
            Factor::L,
            vec![Ket::basis(2, 0), Ket::from_real(&[1.0, 1.0]).unwrap()],
            vec!["a".into(), "b".into()],
        );
        assert!(matches!(bad, Err(Error::NotOrthonormal(_))));
        let dup = MeasurementBasis::computational(Factor::L, &["a", "a"]);
        assert_eq!(dup, Err(Error::DuplicateLabel("a".into())));
        assert!(z(Factor::L).vector("2").is_err());
    }

    #[test]
    fn nonselective_fixes_diagonal_states() {
        let s = BipartiteSpace::qubits();
        let rho_l = Operator::new(nalgebra::DMatrix::from_diagonal(&DVector::from_vec(vec![
            C64::new(0.3, 0.0),
            C64::new(0.7, 0.0),
        ])))
        .unwrap();
        let sigma = Ket::from_real(&[1.0, 2.0]).unwrap().projector();
        let rho = DensityOperator::product(s, &rho_l, &sigma).unwrap();
        let out = nonselective_update(&rho, &z(Factor::L)).unwrap();
        assert!(out.max_abs_diff(&rho) < 1e-15);
    }

    #[test]
    fn nonselective_dephases_plus_state() {
        let s = BipartiteSpace::qubits();
        let plus = Ket::from_real(&[1.0, 1.0]).unwrap().projector();
        let sigma = Ket::from_real(&[2.0, -1.0]).unwrap().projector();
        let rho = DensityOperator::product(s, &plus, &sigma).unwrap();
        let out = nonselective_update(&rho, &z(Factor::L)).unwrap();
        let want = DensityOperator::product(s, &Operator::identity(2).scale(0.5), &sigma).unwrap();
        assert!(out.max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn selective_certain_and_impossible_outcomes() {
        let s = BipartiteSpace::qubits();
        let sigma = Operator::identity(2).scale(0.5);
        let rho = DensityOperator::product(s, &Ket::basis(2, 0).projector(), &sigma).unwrap();
        let basis = z(Factor::L);
        assert!((outcome_probability(&rho, &basis, "0").unwrap() - 1.0).abs() < 1e-15);
        let out = selective_update(&rho, &basis, "0").unwrap();
        assert!(out.max_abs_diff(&rho) < 1e-15);
        match selective_update(&rho, &basis, "1") {
            Err(Error::ImpossibleOutcome { label, .. }) => assert_eq!(label, "1"),
            other => panic!("expected ImpossibleOutcome, got {other:?}"),
        }
    }

    #[test]
    fn selective_on_entangled_state_changes_remote_marginal() {
        let s = BipartiteSpace::qubits();
        let rho = DensityOperator::pure(s, &singlet()).unwrap();
        let after = selective_update(&rho, &z(Factor::L), "0").unwrap();
        let moved = partial_trace_l(&after).max_abs_diff(&partial_trace_l(&rho));
        assert!(moved > 1e-3);
        assert!(partial_trace_r(&after).max_abs_diff(&Ket::basis(2, 0).projector()) < 1e-15);
    }

    #[test]
    fn distribution_examples() {
        let s = BipartiteSpace::qubits();
        let mixed = DensityOperator::pure(s, &singlet()).unwrap();
        let rotated = MeasurementBasis::rotated(Factor::R, 0.3, ["+", "-"]).unwrap();
        for o in outcome_distribution(&mixed, &rotated).unwrap() {
            assert!((o.probability - 0.5).abs() < 1e-15);
        }
        let sigma = Operator::identity(2).scale(0.5);
        let rho = DensityOperator::product(s, &Ket::basis(2, 0).projector(), &sigma).unwrap();
        let d = outcome_distribution(&rho, &z(Factor::L)).unwrap();
        assert_eq!(d[0].probability, 1.0);
        assert_eq!(d[1].probability, 0.0);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let s = BipartiteSpace::new(2, 3).unwrap();
        let rho = DensityOperator::maximally_mixed(s);
        assert!(matches!(
            nonselective_update(&rho, &z(Factor::R)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn pure_selective_examples() {
        let s = BipartiteSpace::qubits();
        let b = Ket::from_real(&[0.6, 0.8]).unwrap();
        let psi = tensor(s, &Ket::basis(2, 0), &b).unwrap();
        let (joint, partner) = pure_selective(s, &psi, &z(Factor::L), "0").unwrap();
        assert!(partner.ray_distance(&b) < 1e-15);
        assert!(joint.ray_distance(&psi) < 1e-15);

        let (_, partner) = pure_selective(s, &singlet(), &z(Factor::L), "0").unwrap();
        assert!(partner.ray_distance(&Ket::basis(2, 1)) < 1e-15);
        assert!(matches!(
            pure_selective(s, &psi, &z(Factor::L), "1"),
            Err(Error::ImpossibleOutcome { .. })
        ));
    }

    #[test]
    fn symmetric_case_examples() {
        let s = BipartiteSpace::qubits();
        let diag = MeasurementBasis::rotated(Factor::L, FRAC_PI_4, ["+", "-"]).unwrap();
        let anti = MeasurementBasis::rotated(Factor::R, -FRAC_PI_4, ["+", "-"]).unwrap();
        let report = symmetric_case(s, &singlet(), &diag, &anti).unwrap();
        assert!(report.all_symmetric());

        // |a⟩|b⟩ with |l⟩ ≠ |a⟩: back-contraction returns |a⟩.
        let a = Ket::from_real(&[0.6, 0.8]).unwrap();
        let psi = tensor(s, &a, &Ket::basis(2, 1)).unwrap();
        assert!(!is_symmetric_outcome(s, &psi, &z(Factor::L), "0").unwrap());

        // |l⟩|b⟩ measured in a basis containing |l⟩.
        let psi = tensor(s, &Ket::basis(2, 0), &Ket::from_real(&[1.0, 3.0]).unwrap()).unwrap();
        assert!(is_symmetric_outcome(s, &psi, &z(Factor::L), "0").unwrap());
        let report = symmetric_case(s, &psi, &z(Factor::L), &z(Factor::R)).unwrap();
        assert_eq!(report.entries[1].residual, None);
    }

    #[test]
    fn singlet_reciprocity() {
        let s = BipartiteSpace::qubits();
        let report = check_reciprocity(s, &singlet(), &z(Factor::L), &z(Factor::R)).unwrap();
        assert!(report.holds());
        assert!(report.max_residual() < 1e-15);
        let first = &report.entries[0];
        assert_eq!(first.status, ReciprocityStatus::Holds);
        assert!(first.partner.as_ref().unwrap().ray_distance(&Ket::basis(2, 1)) < 1e-15);
    }

    #[test]
    fn product_state_reciprocity_is_degenerate() {
        let s = BipartiteSpace::qubits();
        let psi = tensor(
            s,
            &Ket::from_real(&[1.0, 2.0]).unwrap(),
            &Ket::from_real(&[3.0, -1.0]).unwrap(),
        )
        .unwrap();
        let report = check_reciprocity(s, &psi, &z(Factor::L), &z(Factor::R)).unwrap();
        assert!(report
            .entries
            .iter()
            .all(|e| e.status == ReciprocityStatus::NullConclusion));
    }

    #[test]
    fn reciprocity_needs_qubits() {
        let s = BipartiteSpace::new(3, 2).unwrap();
        let psi = Ket::basis(6, 0);
        let lb = MeasurementBasis::computational(Factor::L, &["0", "1", "2"]).unwrap();
        assert!(matches!(
            check_reciprocity(s, &psi, &lb, &z(Factor::R)),
            Err(Error::NotTwoDimensional(3))
        ));
    }
}
