//! Conditional and counterfactual probabilities under either causelike order.
//!
//! Setting: a measurement of 𝓛 on L and a selective measurement of 𝓡 with
//! outcome `r` on R. For actual outcomes the conditional `P(l|r)` is the same
//! whichever jump comes first. The counterfactual probability of outcome `r'`
//! of an incompatible 𝓡′ is `⟨r'|ρ_R|r'⟩`, where `ρ_R` is
//!
//! - `Tr_L ρ⁰` when the R-jump comes first (the nonselective L-measurement
//!   happens later and cannot matter), and
//! - `Σ_l P(l|r) ⟨l|ρ⁰|l⟩ / ⟨l|ρ⁰_L|l⟩` when the L-jump comes first.
//!
//! The two values differ in general.

use crate::error::{Error, Result};
use crate::hilbert::{
    contract, partial_trace_l, partial_trace_r, sandwich, tensor, BipartiteSpace, DensityOperator, Factor, Ket,
    Operator,
};
use crate::measurement::{nonselective_update, outcome_probability, selective_update, MeasurementBasis};
use crate::spacetime::OrderTag;
use crate::{EPS_NUM, EPS_PROB};

fn expect_factor(basis: &MeasurementBasis, expected: Factor) -> Result<()> {
    if basis.factor() != expected {
        return Err(Error::WrongFactor {
            expected,
            got: basis.factor(),
        });
    }
    Ok(())
}

fn check_pair(l_basis: &MeasurementBasis, r_basis: &MeasurementBasis) -> Result<()> {
    expect_factor(l_basis, Factor::L)?;
    expect_factor(r_basis, Factor::R)
}

fn impossible_condition(label: &str, probability: f64) -> Error {
    Error::ImpossibleCondition {
        label: label.to_string(),
        probability,
    }
}

/// `P(l, r) = ⟨l|⟨r|ρ⁰|r⟩|l⟩`
pub fn joint_prob(
    rho0: &DensityOperator,
    l_basis: &MeasurementBasis,
    r_basis: &MeasurementBasis,
    l_label: &str,
    r_label: &str,
) -> Result<f64> {
    check_pair(l_basis, r_basis)?;
    let lr = tensor(rho0.space(), l_basis.vector(l_label)?, r_basis.vector(r_label)?)?;
    Ok(rho0.operator().expectation(&lr).clamp(0.0, 1.0))
}

/// `P(l|r)` given which jump comes first.
///
/// `RFirst`: select `r`, then take the Born weight of `l` in the updated
/// state, i.e. `P(rl)/P(r)`. `LFirst`: the L-measurement acts first, so the
/// joint weight is `P(l)·P(r | l)` along the branch `l`, normalized by the
/// weight of `r` after the nonselective L-update, i.e. `N_lr/(N_lr + N_l̄r)`.
pub fn conditional_prob(
    rho0: &DensityOperator,
    l_basis: &MeasurementBasis,
    r_basis: &MeasurementBasis,
    l_label: &str,
    r_label: &str,
    order: OrderTag,
) -> Result<f64> {
    check_pair(l_basis, r_basis)?;
    l_basis.index_of(l_label)?;
    let value = match order {
        OrderTag::RFirst => {
            let p_r = outcome_probability(rho0, r_basis, r_label)?;
            if p_r <= EPS_PROB {
                return Err(impossible_condition(r_label, p_r));
            }
            let after_r = selective_update(rho0, r_basis, r_label)?;
            outcome_probability(&after_r, l_basis, l_label)?
        }
        OrderTag::LFirst => {
            let dephased = nonselective_update(rho0, l_basis)?;
            let p_r = outcome_probability(&dephased, r_basis, r_label)?;
            if p_r <= EPS_PROB {
                return Err(impossible_condition(r_label, p_r));
            }
            let p_l = outcome_probability(rho0, l_basis, l_label)?;
            if p_l <= EPS_PROB {
                0.0
            } else {
                let after_l = selective_update(rho0, l_basis, l_label)?;
                p_l * outcome_probability(&after_l, r_basis, r_label)? / p_r
            }
        }
    };
    Ok(value.clamp(0.0, 1.0))
}

/// R-factor state in which 𝓡′ would have been measured.
pub fn counterfactual_state(
    rho0: &DensityOperator,
    l_basis: &MeasurementBasis,
    r_basis: &MeasurementBasis,
    r_label: &str,
    order: OrderTag,
) -> Result<Operator> {
    check_pair(l_basis, r_basis)?;
    let rho_r = partial_trace_l(rho0);
    let r = r_basis.vector(r_label)?;
    if order == OrderTag::RFirst {
        return Ok(rho_r);
    }
    let p_r = rho_r.expectation(r);
    if p_r <= EPS_PROB {
        return Err(impossible_condition(r_label, p_r));
    }
    let rho_l = partial_trace_r(rho0);
    let mut mixture = Operator::zeros(rho0.space().d_r());
    for (l_label, l) in l_basis.labels().iter().zip(l_basis.vectors()) {
        let p_l = rho_l.expectation(l);
        if p_l <= EPS_PROB {
            continue;
        }
        let weight = joint_prob(rho0, l_basis, r_basis, l_label, r_label)? / p_r;
        let branch = sandwich(rho0, Factor::L, l)?.scale(1.0 / p_l);
        mixture = mixture.add(&branch.scale(weight));
    }
    Ok(mixture)
}

/// ρ⁰ together with the three observables and the hypothesized jump order.
#[derive(Debug, Clone)]
pub struct Scenario {
    rho0: DensityOperator,
    l_basis: MeasurementBasis,
    r_basis: MeasurementBasis,
    r_prime_basis: MeasurementBasis,
    order: OrderTag,
}

impl Scenario {
    /// Rejects bases on the wrong factor and a counterfactual observable
    /// that commutes with the actual one.
    pub fn new(
        rho0: DensityOperator,
        l_basis: MeasurementBasis,
        r_basis: MeasurementBasis,
        r_prime_basis: MeasurementBasis,
        order: OrderTag,
    ) -> Result<Self> {
        check_pair(&l_basis, &r_basis)?;
        expect_factor(&r_prime_basis, Factor::R)?;
        let space = rho0.space();
        for (b, d) in [
            (&l_basis, space.d_l()),
            (&r_basis, space.d_r()),
            (&r_prime_basis, space.d_r()),
        ] {
            if b.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: b.dim(),
                });
            }
        }
        if r_basis.commutator_norm(&r_prime_basis) <= EPS_NUM {
            return Err(Error::CommutingObservables(
                r_basis.labels().join("/"),
                r_prime_basis.labels().join("/"),
            ));
        }
        Ok(Self {
            rho0,
            l_basis,
            r_basis,
            r_prime_basis,
            order,
        })
    }

    pub fn with_order(&self, order: OrderTag) -> Self {
        Self { order, ..self.clone() }
    }

    pub fn rho0(&self) -> &DensityOperator {
        &self.rho0
    }

    pub fn l_basis(&self) -> &MeasurementBasis {
        &self.l_basis
    }

    pub fn r_basis(&self) -> &MeasurementBasis {
        &self.r_basis
    }

    pub fn r_prime_basis(&self) -> &MeasurementBasis {
        &self.r_prime_basis
    }

    pub fn order(&self) -> OrderTag {
        self.order
    }
}

/// `P^cf(r') = ⟨r'|ρ_R|r'⟩` for the scenario's order.
///
/// When ρ⁰ is pure the value is also recomputed from amplitudes with
/// [`pure_r_first`] / [`pure_l_first`] and a disagreement is an error.
pub fn counterfactual_prob(scenario: &Scenario, r_label: &str, r_prime_label: &str) -> Result<f64> {
    let rho0 = &scenario.rho0;
    let state = counterfactual_state(rho0, &scenario.l_basis, &scenario.r_basis, r_label, scenario.order)?;
    let r_prime = scenario.r_prime_basis.vector(r_prime_label)?;
    let value = state.expectation(r_prime).clamp(0.0, 1.0);

    let purity = rho0.purity();
    if purity > 1.0 - EPS_NUM {
        let psi = rho0.principal_ket();
        let space = rho0.space();
        let r = scenario.r_basis.vector(r_label)?;
        let closed = match scenario.order {
            OrderTag::RFirst => pure_r_first(space, &psi, r_prime)?,
            OrderTag::LFirst => pure_l_first(space, &psi, &scenario.l_basis, r, r_prime)?,
        };
        // Residual mixedness perturbs both paths by at most ~ (1 - purity)
        // over the conditioning weights.
        let p_r = partial_trace_l(rho0).expectation(r);
        let tol = 1e-9 + (1.0 - purity).max(0.0) / p_r.max(EPS_PROB);
        if (value - closed).abs() > tol {
            return Err(Error::ClosedFormMismatch {
                pipeline: value,
                closed_form: closed,
            });
        }
    }
    Ok(value)
}

/// `P^cf(LFirst) − P^cf(RFirst)`; the scenario's own order is ignored.
pub fn ordering_gap(scenario: &Scenario, r_label: &str, r_prime_label: &str) -> Result<f64> {
    let l_first = counterfactual_prob(&scenario.with_order(OrderTag::LFirst), r_label, r_prime_label)?;
    let r_first = counterfactual_prob(&scenario.with_order(OrderTag::RFirst), r_label, r_prime_label)?;
    Ok(l_first - r_first)
}

/// Pure ρ⁰, R-jump first: `Tr_L{⟨r'|0⟩⟨0|r'⟩} = ‖⟨r'|0⟩‖²`.
pub fn pure_r_first(space: BipartiteSpace, psi: &Ket, r_prime: &Ket) -> Result<f64> {
    Ok(contract(space, psi, Factor::R, r_prime)?.norm_squared())
}

/// Pure ρ⁰, L-jump first:
/// `Σ_l |⟨l r|0⟩|² |⟨l r'|0⟩|² / (‖⟨r|0⟩‖² ‖⟨l|0⟩‖²)`.
pub fn pure_l_first(
    space: BipartiteSpace,
    psi: &Ket,
    l_basis: &MeasurementBasis,
    r: &Ket,
    r_prime: &Ket,
) -> Result<f64> {
    expect_factor(l_basis, Factor::L)?;
    let p_r = contract(space, psi, Factor::R, r)?.norm_squared();
    if p_r <= EPS_PROB {
        return Err(impossible_condition("r", p_r));
    }
    let mut total = 0.0;
    for l in l_basis.vectors() {
        let p_l = contract(space, psi, Factor::L, l)?.norm_squared();
        if p_l <= EPS_PROB {
            continue;
        }
        let a_r = tensor(space, l, r)?.inner(psi).norm_sqr();
        let a_rp = tensor(space, l, r_prime)?.inner(psi).norm_sqr();
        total += a_r * a_rp / (p_r * p_l);
    }
    Ok(total)
}

/// One term of the L-first sum for a general ρ⁰:
/// `⟨r|⟨l|ρ⁰|l⟩|r⟩ ⟨r'|⟨l|ρ⁰|l⟩|r'⟩ / (⟨r|ρ⁰_R|r⟩ ⟨l|ρ⁰_L|l⟩)`.
fn l_first_term(rho0: &DensityOperator, l: &Ket, r: &Ket, r_prime: &Ket, p_r: f64) -> Result<f64> {
    let p_l = partial_trace_r(rho0).expectation(l);
    if p_l <= EPS_PROB {
        return Ok(0.0);
    }
    let branch = sandwich(rho0, Factor::L, l)?;
    Ok(branch.expectation(r) * branch.expectation(r_prime) / (p_r * p_l))
}

/// L-first counterfactual written as the explicit sum over `l` of
/// [`l_first_term`], for any ρ⁰.
pub fn l_first_sum(rho0: &DensityOperator, l_basis: &MeasurementBasis, r: &Ket, r_prime: &Ket) -> Result<f64> {
    expect_factor(l_basis, Factor::L)?;
    let p_r = partial_trace_l(rho0).expectation(r);
    if p_r <= EPS_PROB {
        return Err(impossible_condition("r", p_r));
    }
    l_basis
        .vectors()
        .iter()
        .map(|l| l_first_term(rho0, l, r, r_prime, p_r))
        .sum()
}

/// Two-outcome form `f(l) + f(l̄)` of [`l_first_sum`] for a qubit L-factor.
pub fn l_first_two_outcome(rho0: &DensityOperator, l_basis: &MeasurementBasis, r: &Ket, r_prime: &Ket) -> Result<f64> {
    expect_factor(l_basis, Factor::L)?;
    if l_basis.dim() != 2 {
        return Err(Error::NotTwoDimensional(l_basis.dim()));
    }
    let p_r = partial_trace_l(rho0).expectation(r);
    if p_r <= EPS_PROB {
        return Err(impossible_condition("r", p_r));
    }
    let [l, l_bar] = [&l_basis.vectors()[0], &l_basis.vectors()[1]];
    Ok(l_first_term(rho0, l, r, r_prime, p_r)? + l_first_term(rho0, l_bar, r, r_prime, p_r)?)
}
