//! Reference implementations used as test oracles.
//!
//! Everything here works on raw `DMatrix` entries with explicit index
//! arithmetic and never calls the library's partial traces or updates.

#![allow(dead_code)]

use causelike::hilbert::{BipartiteSpace, DensityOperator, Ket, Operator, C64};
use causelike::measurement::MeasurementBasis;
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `Tr_L` by summing diagonal L-blocks.
pub fn trace_out_l(m: &DMatrix<C64>, d_l: usize, d_r: usize) -> DMatrix<C64> {
    let mut out = DMatrix::zeros(d_r, d_r);
    for a in 0..d_r {
        for b in 0..d_r {
            for i in 0..d_l {
                out[(a, b)] += m[(i * d_r + a, i * d_r + b)];
            }
        }
    }
    out
}

/// `Tr_R` by summing within each L-block.
pub fn trace_out_r(m: &DMatrix<C64>, d_l: usize, d_r: usize) -> DMatrix<C64> {
    let mut out = DMatrix::zeros(d_l, d_l);
    for a in 0..d_l {
        for b in 0..d_l {
            for j in 0..d_r {
                out[(a, b)] += m[(a * d_r + j, b * d_r + j)];
            }
        }
    }
    out
}

pub fn outer(v: &Ket) -> DMatrix<C64> {
    let a = v.amplitudes();
    a * a.adjoint()
}

/// `P ⊗ I`
pub fn on_l(p: &DMatrix<C64>, d_r: usize) -> DMatrix<C64> {
    p.kronecker(&DMatrix::identity(d_r, d_r))
}

/// `I ⊗ P`
pub fn on_r(p: &DMatrix<C64>, d_l: usize) -> DMatrix<C64> {
    DMatrix::<C64>::identity(d_l, d_l).kronecker(p)
}

pub fn tr(m: &DMatrix<C64>) -> f64 {
    m.trace().re
}

pub fn max_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn op_diff(a: &Operator, b: &DMatrix<C64>) -> f64 {
    max_diff(a.matrix(), b)
}

/// Projector sum `Σ_k (P_k ⊗ I) ρ (P_k ⊗ I)`.
pub fn dephase_l(rho: &DMatrix<C64>, basis: &MeasurementBasis, d_r: usize) -> DMatrix<C64> {
    let mut out = DMatrix::zeros(rho.nrows(), rho.ncols());
    for v in basis.vectors() {
        let p = on_l(&outer(v), d_r);
        out += &p * rho * &p;
    }
    out
}

/// Joint weights `Tr[(P_l ⊗ P_r) ρ]`, indexed `[l][r]`.
pub fn joint_table(rho: &DensityOperator, lb: &MeasurementBasis, rb: &MeasurementBasis) -> Vec<Vec<f64>> {
    lb.vectors()
        .iter()
        .map(|l| {
            rb.vectors()
                .iter()
                .map(|r| tr(&(outer(l).kronecker(&outer(r)) * rho.matrix())))
                .collect()
        })
        .collect()
}

/// `Tr[(I ⊗ P_r) ρ]`
pub fn r_weight(rho: &DensityOperator, r: &Ket) -> f64 {
    tr(&(on_r(&outer(r), rho.space().d_l()) * rho.matrix()))
}

/// `Tr[(P_l ⊗ I) ρ]`
pub fn l_weight(rho: &DensityOperator, l: &Ket) -> f64 {
    tr(&(on_l(&outer(l), rho.space().d_r()) * rho.matrix()))
}

/// R-first counterfactual `Tr[(I ⊗ P_r') ρ]`.
pub fn cf_r_first(rho: &DensityOperator, r_prime: &Ket) -> f64 {
    r_weight(rho, r_prime)
}

/// L-first counterfactual
/// `Σ_l Tr[(P_l⊗P_r)ρ] Tr[(P_l⊗P_r')ρ] / (Tr[(I⊗P_r)ρ] Tr[(P_l⊗I)ρ])`.
pub fn cf_l_first(rho: &DensityOperator, lb: &MeasurementBasis, r: &Ket, r_prime: &Ket) -> f64 {
    let p_r = r_weight(rho, r);
    lb.vectors()
        .iter()
        .map(|l| {
            let p_l = l_weight(rho, l);
            if p_l < 1e-14 {
                return 0.0;
            }
            let a = tr(&(outer(l).kronecker(&outer(r)) * rho.matrix()));
            let b = tr(&(outer(l).kronecker(&outer(r_prime)) * rho.matrix()));
            a * b / (p_r * p_l)
        })
        .sum()
}

pub fn qubits() -> BipartiteSpace {
    BipartiteSpace::qubits()
}

/// Dimensions `(d_l, d_r)` drawn from {2, 3, 4}.
pub fn small_dims(seed: u64) -> (usize, usize) {
    let d = [2, 3, 4];
    (d[(seed % 3) as usize], d[((seed / 3) % 3) as usize])
}
