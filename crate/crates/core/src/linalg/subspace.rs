use serde::{Serialize, Serializer};

use super::echelon::EchelonBasis;
use super::{GaussianRational, MatrixGQ};
use crate::error::LinalgError;

/// A linear subspace of M_n(ℚ(i)) in canonical form.
///
/// Matrices are vectorized row-major, so coordinate `i * n + j` is entry
/// (i, j). The stored basis is the reduced row echelon form of the
/// vectorized spanning set; equal subspaces therefore have identical bases
/// and `==` is subspace equality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperatorSubspace {
    n: usize,
    basis: EchelonBasis,
}

fn check_square(m: &MatrixGQ, n: usize) -> Result<(), LinalgError> {
    if m.rows() != n || m.cols() != n {
        return Err(LinalgError::dims(format!("{n}x{n}"), format!("{}x{}", m.rows(), m.cols())));
    }
    Ok(())
}

impl OperatorSubspace {
    pub fn zero(n: usize) -> Self {
        OperatorSubspace { n, basis: EchelonBasis::new(n * n) }
    }

    pub fn full(n: usize) -> Self {
        let units = (0..n).flat_map(|i| (0..n).map(move |j| MatrixGQ::unit(n, i, j)));
        Self::span_iter(n, units)
    }

    pub fn scalars(n: usize) -> Self {
        Self::span_iter(n, std::iter::once(MatrixGQ::identity(n)))
    }

    pub fn diagonal(n: usize) -> Self {
        Self::span_iter(n, (0..n).map(|i| MatrixGQ::unit(n, i, i)))
    }

    /// Span of matrix units E_ij over the given index pairs.
    pub fn from_units(n: usize, units: impl IntoIterator<Item = (usize, usize)>) -> Self {
        Self::span_iter(n, units.into_iter().map(|(i, j)| MatrixGQ::unit(n, i, j)))
    }

    pub fn span(mats: &[MatrixGQ], n: usize) -> Result<Self, LinalgError> {
        let mut s = Self::zero(n);
        for m in mats {
            s.insert(m)?;
        }
        Ok(s)
    }

    fn span_iter(n: usize, mats: impl IntoIterator<Item = MatrixGQ>) -> Self {
        let mut s = Self::zero(n);
        for m in mats {
            debug_assert!(m.rows() == n && m.cols() == n);
            s.basis.insert(m.entries());
        }
        s
    }

    /// Adds a matrix to the span; returns whether the dimension grew.
    pub fn insert(&mut self, m: &MatrixGQ) -> Result<bool, LinalgError> {
        check_square(m, self.n)?;
        Ok(self.basis.insert(m.entries()))
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.basis.rank()
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn is_full(&self) -> bool {
        self.basis.is_full()
    }

    pub fn basis(&self) -> Vec<MatrixGQ> {
        self.basis
            .rows()
            .iter()
            .map(|row| MatrixGQ::new(self.n, self.n, row.clone()).expect("vectorized n×n"))
            .collect()
    }

    fn basis_iter(&self) -> impl Iterator<Item = MatrixGQ> + '_ {
        self.basis.rows().iter().map(|row| MatrixGQ::new(self.n, self.n, row.clone()).expect("vectorized n×n"))
    }

    pub fn contains(&self, a: &MatrixGQ) -> Result<bool, LinalgError> {
        check_square(a, self.n)?;
        Ok(self.basis.contains(a.entries()))
    }

    fn check_same_ambient(&self, other: &Self) -> Result<(), LinalgError> {
        if self.n != other.n {
            return Err(LinalgError::dims(format!("ambient M_{}", self.n), format!("ambient M_{}", other.n)));
        }
        Ok(())
    }

    /// S ⊆ T.
    pub fn leq(&self, other: &Self) -> Result<bool, LinalgError> {
        self.check_same_ambient(other)?;
        if self.dim() > other.dim() {
            return Ok(false);
        }
        Ok(self.basis.rows().iter().all(|row| other.basis.contains(row)))
    }

    /// First basis element of `self` outside `other`.
    pub fn first_outside(&self, other: &Self) -> Result<Option<MatrixGQ>, LinalgError> {
        self.check_same_ambient(other)?;
        Ok(self.basis_iter().find(|b| !other.basis.contains(b.entries())))
    }

    /// span{A·B : A ∈ S, B ∈ T}.
    pub fn product(&self, other: &Self) -> Result<Self, LinalgError> {
        self.check_same_ambient(other)?;
        let mut out = Self::zero(self.n);
        let rhs: Vec<MatrixGQ> = other.basis();
        for a in self.basis_iter() {
            for b in &rhs {
                if out.is_full() {
                    return Ok(out);
                }
                out.basis.insert(a.try_mul(b)?.entries());
            }
        }
        Ok(out)
    }

    /// span(S ∪ T).
    pub fn join(&self, other: &Self) -> Result<Self, LinalgError> {
        self.check_same_ambient(other)?;
        let mut out = self.clone();
        for row in other.basis.rows() {
            out.basis.insert(row);
        }
        Ok(out)
    }

    pub fn is_adjoint_closed(&self) -> bool {
        self.first_adjoint_violation().is_none()
    }

    /// A basis element whose adjoint lies outside the subspace, if any.
    pub fn first_adjoint_violation(&self) -> Option<MatrixGQ> {
        self.basis_iter().find(|b| !self.basis.contains(b.adjoint().entries()))
    }

    pub fn contains_identity(&self) -> bool {
        self.basis.contains(MatrixGQ::identity(self.n).entries())
    }

    /// {X : XG = GX and XG* = G*X for every generator G}, the commutant of
    /// the *-algebra generated by `gens`.
    pub fn commutant(gens: &[MatrixGQ], n: usize) -> Result<Self, LinalgError> {
        for g in gens {
            check_square(g, n)?;
        }
        let mut equations = EchelonBasis::new(n * n);
        let mut row = vec![GaussianRational::zero(); n * n];
        for g in gens {
            let adj = g.adjoint();
            for h in [g, &adj] {
                for i in 0..n {
                    for j in 0..n {
                        // (XH − HX)_ij = Σ_k X_ik H_kj − Σ_k H_ik X_kj
                        row.iter_mut().for_each(|x| *x = GaussianRational::zero());
                        for k in 0..n {
                            let hkj = h.get(k, j);
                            if !hkj.is_zero() {
                                row[i * n + k] += hkj;
                            }
                            let hik = h.get(i, k);
                            if !hik.is_zero() {
                                row[k * n + j] -= hik;
                            }
                        }
                        if row.iter().any(|x| !x.is_zero()) {
                            equations.insert(&row);
                        }
                    }
                }
            }
        }
        let mut out = Self::zero(n);
        for v in equations.kernel() {
            out.basis.insert(&v);
        }
        Ok(out)
    }

    /// S ⊗ M_d inside M_{nd}, with S on the outer block index.
    pub fn tensor_full(&self, d: usize) -> Self {
        let mut out = Self::zero(self.n * d);
        for b in self.basis_iter() {
            for alpha in 0..d {
                for beta in 0..d {
                    out.basis.insert(b.kron(&MatrixGQ::unit(d, alpha, beta)).entries());
                }
            }
        }
        out
    }
}

impl Serialize for OperatorSubspace {
    /// Serialized as the list of canonical basis matrices.
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.basis().serialize(serializer)
    }
}
