//! Random states, bases and unitaries for property checks and sweeps.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::hilbert::{BipartiteSpace, DensityOperator, Factor, Ket, Operator, C64};
use crate::measurement::MeasurementBasis;

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Haar-random unitary via QR of a Ginibre matrix with phase-fixed R.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Operator {
    let qr = ginibre(rng, dim, dim).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    Operator::new(q).expect("square")
}

pub fn random_ket<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Ket {
    let v = nalgebra::DVector::from_fn(dim, |_, _| gaussian(rng));
    Ket::normalized(v).expect("gaussian vector is nonzero")
}

/// Random mixed state `G G† / Tr(G G†)` with Ginibre `G` of the given rank.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, space: BipartiteSpace, rank: usize) -> DensityOperator {
    let g = ginibre(rng, space.dim(), rank.max(1));
    let m = &g * g.adjoint();
    let tr = m.trace();
    DensityOperator::new(space, m / tr).expect("Ginibre state is valid")
}

pub fn random_pure<R: Rng + ?Sized>(rng: &mut R, space: BipartiteSpace) -> (Ket, DensityOperator) {
    let k = random_ket(rng, space.dim());
    let rho = DensityOperator::pure(space, &k).expect("dimensions match");
    (k, rho)
}

/// Random orthonormal basis on `factor`, labelled `{prefix}0`, `{prefix}1`, …
pub fn random_basis<R: Rng + ?Sized>(rng: &mut R, factor: Factor, dim: usize, prefix: &str) -> MeasurementBasis {
    let u = random_unitary(rng, dim);
    let vectors = (0..dim)
        .map(|j| Ket::normalized(u.matrix().column(j).into_owned()).expect("unit column"))
        .collect();
    let labels = (0..dim).map(|j| format!("{prefix}{j}")).collect();
    MeasurementBasis::new(factor, vectors, labels).expect("unitary columns are orthonormal")
}

/// `(U_L ⊗ U_R)|Φ⁺⟩` for Haar-random local unitaries: maximally entangled.
pub fn random_maximally_entangled<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Ket {
    let space = BipartiteSpace::new(d, d).expect("valid dimension");
    let mut v = nalgebra::DVector::zeros(d * d);
    for i in 0..d {
        v[space.index(i, i)] = C64::new(1.0, 0.0);
    }
    let phi = Ket::normalized(v).expect("nonzero");
    let u = random_unitary(rng, d).kron(&random_unitary(rng, d));
    phi.evolve(&u).expect("dimensions match")
}
