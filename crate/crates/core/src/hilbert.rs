//! Dense linear algebra on finite bipartite Hilbert spaces.
//!
//! Composite indices are L-major: basis vector `|i_L⟩|i_R⟩` sits at
//! `k = i_L * d_R + i_R`, so tracing out R sums the diagonals of contiguous
//! `d_R × d_R` blocks.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::{EPS_HERM, EPS_NORM, EPS_PSD, MAX_COMPOSITE_DIM};

pub type C64 = Complex<f64>;

/// Which tensor factor an object lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Factor {
    L,
    R,
}

impl Factor {
    pub fn other(self) -> Factor {
        match self {
            Factor::L => Factor::R,
            Factor::R => Factor::L,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BipartiteSpace {
    d_l: usize,
    d_r: usize,
}

impl BipartiteSpace {
    pub fn new(d_l: usize, d_r: usize) -> Result<Self> {
        if d_l < 2 || d_r < 2 {
            return Err(Error::InvalidDimension(format!(
                "each factor needs dimension >= 2, got {d_l}x{d_r}"
            )));
        }
        if d_l * d_r > MAX_COMPOSITE_DIM {
            return Err(Error::InvalidDimension(format!(
                "composite dimension {} exceeds {MAX_COMPOSITE_DIM}",
                d_l * d_r
            )));
        }
        Ok(Self { d_l, d_r })
    }

    pub fn qubits() -> Self {
        Self { d_l: 2, d_r: 2 }
    }

    pub fn d_l(&self) -> usize {
        self.d_l
    }

    pub fn d_r(&self) -> usize {
        self.d_r
    }

    pub fn dim(&self) -> usize {
        self.d_l * self.d_r
    }

    pub fn factor_dim(&self, factor: Factor) -> usize {
        match factor {
            Factor::L => self.d_l,
            Factor::R => self.d_r,
        }
    }

    #[inline]
    pub fn index(&self, i_l: usize, i_r: usize) -> usize {
        i_l * self.d_r + i_r
    }

    /// Composite index with `local` on `factor` and `rest` on the other one.
    #[inline]
    fn index_on(&self, factor: Factor, local: usize, rest: usize) -> usize {
        match factor {
            Factor::L => self.index(local, rest),
            Factor::R => self.index(rest, local),
        }
    }
}

/// A normalized state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    amps: DVector<C64>,
}

impl Ket {
    /// Accepts amplitudes that are already normalized within `EPS_NORM`.
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::InvalidDimension("empty ket".into()));
        }
        let v = DVector::from_vec(amps);
        let n2 = v.norm_squared();
        if (n2 - 1.0).abs() > EPS_NORM {
            return Err(Error::NotNormalized(n2));
        }
        Ok(Self { amps: v })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(amps: DVector<C64>) -> Result<Self> {
        let n = amps.norm();
        if amps.is_empty() || !n.is_finite() || n <= f64::MIN_POSITIVE.sqrt() {
            return Err(Error::ZeroVector);
        }
        Ok(Self {
            amps: amps / C64::from(n),
        })
    }

    pub fn from_real(amps: &[f64]) -> Result<Self> {
        Self::normalized(DVector::from_iterator(
            amps.len(),
            amps.iter().map(|&a| C64::new(a, 0.0)),
        ))
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        assert!(k < dim, "basis index {k} out of range for dimension {dim}");
        let mut amps = DVector::zeros(dim);
        amps[k] = C64::new(1.0, 0.0);
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &Ket) -> C64 {
        self.amps.dotc(&other.amps)
    }

    pub fn projector(&self) -> Operator {
        Operator {
            m: &self.amps * self.amps.adjoint(),
        }
    }

    /// Phase-insensitive distance between rays: the norm of the part of
    /// `other` orthogonal to `self`, i.e. the sine of the angle between them.
    pub fn ray_distance(&self, other: &Ket) -> f64 {
        let c = self.inner(other);
        (&other.amps - &self.amps * c).norm()
    }

    /// Applies a unitary and returns the resulting ket.
    pub fn evolve(&self, unitary: &Operator) -> Result<Ket> {
        if unitary.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: unitary.dim(),
            });
        }
        Ket::normalized(&unitary.m * &self.amps)
    }
}

/// A square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    m: DMatrix<C64>,
}

impl Operator {
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                got: m.ncols(),
            });
        }
        Ok(Self { m })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            m: DMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            m: DMatrix::zeros(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.m
    }

    pub fn trace(&self) -> C64 {
        self.m.trace()
    }

    pub fn adjoint(&self) -> Operator {
        Operator { m: self.m.adjoint() }
    }

    pub fn scale(&self, s: f64) -> Operator {
        Operator {
            m: &self.m * C64::from(s),
        }
    }

    pub fn kron(&self, other: &Operator) -> Operator {
        Operator {
            m: self.m.kronecker(&other.m),
        }
    }

    pub fn mul(&self, other: &Operator) -> Operator {
        Operator { m: &self.m * &other.m }
    }

    pub fn add(&self, other: &Operator) -> Operator {
        Operator { m: &self.m + &other.m }
    }

    pub fn commutator(&self, other: &Operator) -> Operator {
        Operator {
            m: &self.m * &other.m - &other.m * &self.m,
        }
    }

    /// Largest elementwise modulus.
    pub fn max_abs(&self) -> f64 {
        self.m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        assert_eq!(self.dim(), other.dim(), "operator dimensions differ");
        self.m
            .iter()
            .zip(other.m.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.m[(i, j)] - self.m[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let h = (&self.m + self.m.adjoint()) * C64::from(0.5);
        let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Real part of `⟨v|A|v⟩`.
    pub fn expectation(&self, v: &Ket) -> f64 {
        assert_eq!(self.dim(), v.dim(), "operator/ket dimensions differ");
        v.amps.dotc(&(&self.m * &v.amps)).re
    }

    /// Checks Hermiticity, unit trace and positivity at the crate tolerances.
    pub fn check_density(&self) -> Result<()> {
        let herm = self.hermitian_deviation();
        if herm > EPS_HERM {
            return Err(Error::NotHermitian(herm));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > EPS_NORM || tr.im.abs() > EPS_NORM {
            return Err(Error::InvalidTrace(tr.re));
        }
        let min = self.hermitian_eigenvalues()[0];
        if min < -EPS_PSD {
            return Err(Error::NotPositive(min));
        }
        Ok(())
    }

    /// `A ⊗ I` or `I ⊗ A` on the composite space.
    pub fn embed(&self, space: BipartiteSpace, factor: Factor) -> Result<Operator> {
        check_dim(space.factor_dim(factor), self.dim())?;
        Ok(match factor {
            Factor::L => self.kron(&Operator::identity(space.d_r)),
            Factor::R => Operator::identity(space.d_l).kron(self),
        })
    }

    /// Traces out `traced` from an operator on the composite space.
    pub fn partial_trace(&self, space: BipartiteSpace, traced: Factor) -> Result<Operator> {
        check_dim(space.dim(), self.dim())?;
        let kept = traced.other();
        let d_keep = space.factor_dim(kept);
        let d_sum = space.factor_dim(traced);
        let m = DMatrix::from_fn(d_keep, d_keep, |i, j| {
            (0..d_sum)
                .map(|s| self.m[(space.index_on(kept, i, s), space.index_on(kept, j, s))])
                .sum()
        });
        Ok(Operator { m })
    }

    /// Partial matrix element `⟨v|A|v⟩` over `factor`, leaving an operator on
    /// the complementary factor.
    pub fn partial_expectation(&self, space: BipartiteSpace, factor: Factor, v: &Ket) -> Result<Operator> {
        check_dim(space.dim(), self.dim())?;
        check_dim(space.factor_dim(factor), v.dim())?;
        let d_other = space.factor_dim(factor.other());
        let d = v.dim();
        let a = v.amplitudes();
        let m = DMatrix::from_fn(d_other, d_other, |i, j| {
            let mut acc = C64::new(0.0, 0.0);
            for x in 0..d {
                let cx = a[x].conj();
                if cx == C64::new(0.0, 0.0) {
                    continue;
                }
                for y in 0..d {
                    acc += cx * self.m[(space.index_on(factor, x, i), space.index_on(factor, y, j))] * a[y];
                }
            }
            acc
        });
        Ok(Operator { m })
    }
}

/// Statistical operator of the bipartite system: Hermitian, unit trace, PSD.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    space: BipartiteSpace,
    op: Operator,
}

impl DensityOperator {
    pub fn new(space: BipartiteSpace, m: DMatrix<C64>) -> Result<Self> {
        let op = Operator::new(m)?;
        check_dim(space.dim(), op.dim())?;
        op.check_density()?;
        Ok(Self { space, op })
    }

    /// `|ψ⟩⟨ψ|`
    pub fn pure(space: BipartiteSpace, ket: &Ket) -> Result<Self> {
        check_dim(space.dim(), ket.dim())?;
        Ok(Self {
            space,
            op: ket.projector(),
        })
    }

    pub fn product(space: BipartiteSpace, rho_l: &Operator, rho_r: &Operator) -> Result<Self> {
        check_dim(space.d_l, rho_l.dim())?;
        check_dim(space.d_r, rho_r.dim())?;
        Self::new(space, rho_l.kron(rho_r).m)
    }

    pub fn maximally_mixed(space: BipartiteSpace) -> Self {
        Self {
            space,
            op: Operator::identity(space.dim()).scale(1.0 / space.dim() as f64),
        }
    }

    /// Wraps the output of a trace-preserving positive map. The Hermitian
    /// part is kept to stop rounding drift from accumulating.
    pub(crate) fn from_map_output(space: BipartiteSpace, m: DMatrix<C64>) -> Self {
        let h = (&m + m.adjoint()) * C64::from(0.5);
        debug_assert!((h.trace().re - 1.0).abs() < 1e-8);
        Self {
            space,
            op: Operator { m: h },
        }
    }

    pub fn space(&self) -> BipartiteSpace {
        self.space
    }

    pub fn operator(&self) -> &Operator {
        &self.op
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.op.m
    }

    /// `Tr ρ²`
    pub fn purity(&self) -> f64 {
        // Tr(ρ ρ) = Σ |ρ_ij|² for Hermitian ρ
        self.op.m.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Dominant eigenvector, meaningful when the state is pure.
    pub fn principal_ket(&self) -> Ket {
        let h = &self.op.m;
        let eig = h.clone().symmetric_eigen();
        let (k, _) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty spectrum");
        Ket::normalized(eig.eigenvectors.column(k).into_owned()).expect("unit eigenvector")
    }

    pub fn max_abs_diff(&self, other: &DensityOperator) -> f64 {
        self.op.max_abs_diff(&other.op)
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// `|a⟩ ⊗ |b⟩` with `a` on L and `b` on R.
pub fn tensor(space: BipartiteSpace, a: &Ket, b: &Ket) -> Result<Ket> {
    check_dim(space.d_l, a.dim())?;
    check_dim(space.d_r, b.dim())?;
    Ok(Ket {
        amps: a.amps.kronecker(&b.amps),
    })
}

/// `ρ_R = Tr_L ρ`
pub fn partial_trace_l(rho: &DensityOperator) -> Operator {
    rho.op
        .partial_trace(rho.space, Factor::L)
        .expect("density operator matches its space")
}

/// `ρ_L = Tr_R ρ`
pub fn partial_trace_r(rho: &DensityOperator) -> Operator {
    rho.op
        .partial_trace(rho.space, Factor::R)
        .expect("density operator matches its space")
}

/// `⟨v|ρ|v⟩` with `v` on `factor`: an unnormalized operator on the other
/// factor whose trace is the Born weight of `v`.
pub fn sandwich(rho: &DensityOperator, factor: Factor, v: &Ket) -> Result<Operator> {
    rho.op.partial_expectation(rho.space, factor, v)
}

/// Partial inner product `⟨v|ψ⟩` with `v` on `factor`; the result is an
/// unnormalized vector on the other factor.
pub fn contract(space: BipartiteSpace, psi: &Ket, factor: Factor, v: &Ket) -> Result<DVector<C64>> {
    check_dim(space.dim(), psi.dim())?;
    check_dim(space.factor_dim(factor), v.dim())?;
    let d_other = space.factor_dim(factor.other());
    let a = v.amplitudes();
    Ok(DVector::from_fn(d_other, |i, _| {
        (0..v.dim())
            .map(|x| a[x].conj() * psi.amps[space.index_on(factor, x, i)])
            .sum()
    }))
}
