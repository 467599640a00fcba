//! Finite quantum sets, quantum adjacency matrices and quantum graphs as
//! operator-system bimodules.
//!
//! B = ⊕_b M_{n_b} carries the trace ψ = Σ_b w_b Tr_b. Elements of B and of
//! the GNS space L²(B) are coordinate vectors in the matrix-unit basis
//! e^b_ij, ordered block by block and row-major inside a block. This basis
//! is orthogonal with ⟨e^b_ij, e^b_ij⟩ = w_b, so GNS adjoints are
//! T* = G⁻¹ T^H G with G = diag(w_b), and everything stays rational:
//!
//! ```text
//! m(e^b_ij ⊗ e^c_kl) = δ_bc δ_jk e^b_il      η(1) = Σ_b Σ_i e^b_ii
//! m*(e^b_il) = (1/w_b) Σ_j e^b_ij ⊗ e^b_jl     η*(e^b_ij) = w_b δ_ij
//! ```
//!
//! so m m* acts on block b as n_b / w_b, and ψ is a δ-form exactly when
//! n_b / w_b is the same for every block.
//!
//! Operators on L²(B) are matrices in the same basis. Left multiplication
//! by B is closed under conjugate transpose there, and G is right
//! multiplication by the central element ⊕ w_b 1_b, so it lies in M'. An
//! M'-bimodule S therefore satisfies G S G⁻¹ = S, and conjugate-transpose
//! closure of S coincides with closure under GNS adjoints.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{GaussianRational, MatrixGQ, OperatorSubspace, Rational};
use crate::report::{CheckResult, VerificationReport};
use crate::wstar::{QuantumMetricFiltration, VNAlgebra, WstarError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QgraphError {
    #[error("quantum set needs at least one block")]
    NoBlocks,
    #[error("block {block} has size 0")]
    EmptyBlock { block: usize },
    #[error("{blocks} blocks but {weights} weights")]
    WeightCount { blocks: usize, weights: usize },
    #[error("weight of block {block} is {weight}, must be positive")]
    NonPositiveWeight { block: usize, weight: Rational },
    #[error("NotDeltaForm: m m* acts on block {block} as {value}, on block 0 as {first}")]
    NotDeltaForm { block: usize, value: Rational, first: Rational },
    #[error("adjacency is {rows}x{cols}, quantum set has dimension {dim}")]
    AdjacencyShape { rows: usize, cols: usize, dim: usize },
    #[error("adjacency matrix is not square")]
    NotSquare,
    #[error("adjacency entry ({i},{j}) is not 0 or 1")]
    NotZeroOne { i: usize, j: usize },
    #[error("NotReflexive: diagonal entry {i} is 0")]
    NotReflexive { i: usize },
    #[error("NotSymmetric({i},{j})")]
    NotSymmetric { i: usize, j: usize },
    #[error("NotIdempotent: P∘P − P has largest entry {residual}")]
    NotIdempotent { residual: f64 },
    #[error("structure maps violate the {0} law")]
    StructureLaw(&'static str),
    #[error("not a quantum graph: failed {0}")]
    NotQuantumGraph(String),
    #[error(transparent)]
    Wstar(#[from] WstarError),
}

/// B = ⊕ M_{n_b} with the trace Σ w_b Tr_b.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "QuantumSetJson", into = "QuantumSetJson")]
pub struct FiniteQuantumSet {
    blocks: Vec<usize>,
    weights: Vec<Rational>,
    /// First basis index of each block.
    offsets: Vec<usize>,
    dim: usize,
}

#[derive(Serialize, Deserialize)]
struct QuantumSetJson {
    blocks: Vec<usize>,
    weights: Vec<Rational>,
}

impl TryFrom<QuantumSetJson> for FiniteQuantumSet {
    type Error = QgraphError;
    fn try_from(raw: QuantumSetJson) -> Result<Self, QgraphError> {
        build_quantum_set(&raw.blocks, &raw.weights)
    }
}

impl From<FiniteQuantumSet> for QuantumSetJson {
    fn from(q: FiniteQuantumSet) -> Self {
        QuantumSetJson { blocks: q.blocks, weights: q.weights }
    }
}

/// Coordinates of an element of B (or L²(B)) in the matrix-unit basis.
type Vector = Vec<GaussianRational>;

pub fn build_quantum_set(block_sizes: &[usize], psi_weights: &[Rational]) -> Result<FiniteQuantumSet, QgraphError> {
    if block_sizes.is_empty() {
        return Err(QgraphError::NoBlocks);
    }
    if block_sizes.len() != psi_weights.len() {
        return Err(QgraphError::WeightCount { blocks: block_sizes.len(), weights: psi_weights.len() });
    }
    if let Some(block) = block_sizes.iter().position(|&n| n == 0) {
        return Err(QgraphError::EmptyBlock { block });
    }
    if let Some(block) = psi_weights.iter().position(|w| !w.is_positive()) {
        return Err(QgraphError::NonPositiveWeight { block, weight: psi_weights[block].clone() });
    }
    let mut offsets = Vec::with_capacity(block_sizes.len());
    let mut dim = 0;
    for &n in block_sizes {
        offsets.push(dim);
        dim += n * n;
    }
    let q = FiniteQuantumSet { blocks: block_sizes.to_vec(), weights: psi_weights.to_vec(), offsets, dim };
    q.check_structure()?;
    Ok(q)
}

impl FiniteQuantumSet {
    /// Cⁿ with every weight 1/n, so that δ² = n.
    pub fn classical(n: usize) -> Self {
        build_quantum_set(&vec![1; n], &vec![Rational::new(1, n as i64); n]).expect("valid classical set")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn is_classical(&self) -> bool {
        self.blocks.iter().all(|&n| n == 1)
    }

    /// ψ(1) = Σ_b w_b n_b.
    pub fn psi_of_unit(&self) -> Rational {
        self.blocks.iter().zip(&self.weights).map(|(&n, w)| w.clone() * Rational::from(n as i64)).sum()
    }

    fn index(&self, b: usize, i: usize, j: usize) -> usize {
        self.offsets[b] + i * self.blocks[b] + j
    }

    /// (block, row, column) of a basis index.
    fn locate(&self, k: usize) -> (usize, usize, usize) {
        let b = self.offsets.partition_point(|&o| o <= k) - 1;
        let r = k - self.offsets[b];
        (b, r / self.blocks[b], r % self.blocks[b])
    }

    fn zero(&self) -> Vector {
        vec![GaussianRational::zero(); self.dim]
    }

    fn unit_vector(&self, k: usize) -> Vector {
        let mut v = self.zero();
        v[k] = GaussianRational::one();
        v
    }

    /// η(1).
    fn unit(&self) -> Vector {
        let mut v = self.zero();
        for (b, &n) in self.blocks.iter().enumerate() {
            for i in 0..n {
                v[self.index(b, i, i)] = GaussianRational::one();
            }
        }
        v
    }

    /// m(u ⊗ v) = uv, blockwise matrix product.
    fn mult(&self, u: &[GaussianRational], v: &[GaussianRational]) -> Vector {
        let mut out = self.zero();
        for (b, &n) in self.blocks.iter().enumerate() {
            for i in 0..n {
                for j in 0..n {
                    let x = &u[self.index(b, i, j)];
                    if x.is_zero() {
                        continue;
                    }
                    for l in 0..n {
                        let y = &v[self.index(b, j, l)];
                        if !y.is_zero() {
                            out[self.index(b, i, l)] += &(x * y);
                        }
                    }
                }
            }
        }
        out
    }

    /// ψ(uv) = Σ_b w_b Σ_ij u^b_ij v^b_ji, without forming uv.
    fn psi_of_product(&self, u: &[GaussianRational], v: &[GaussianRational]) -> GaussianRational {
        let mut t = GaussianRational::zero();
        for (b, &n) in self.blocks.iter().enumerate() {
            let mut block = GaussianRational::zero();
            for i in 0..n {
                for j in 0..n {
                    let (x, y) = (&u[self.index(b, i, j)], &v[self.index(b, j, i)]);
                    if !x.is_zero() && !y.is_zero() {
                        block += &(x * y);
                    }
                }
            }
            if !block.is_zero() {
                t += &(&block * &GaussianRational::from(self.weights[b].clone()));
            }
        }
        t
    }

    /// m*(e_k) = (1/w_b) Σ_j e^b_ij ⊗ e^b_jl as (coefficient, left, right).
    fn m_star(&self, k: usize) -> Vec<(GaussianRational, usize, usize)> {
        let (b, i, l) = self.locate(k);
        let c = GaussianRational::from(self.weights[b].recip());
        (0..self.blocks[b]).map(|j| (c.clone(), self.index(b, i, j), self.index(b, j, l))).collect()
    }

    fn check_structure(&self) -> Result<(), QgraphError> {
        let one = self.unit();
        for k in 0..self.dim {
            let e = self.unit_vector(k);
            if self.mult(&one, &e) != e || self.mult(&e, &one) != e {
                return Err(QgraphError::StructureLaw("unit"));
            }
        }
        // Associativity on basis triples that can multiply nontrivially.
        for p in 0..self.dim {
            let (b, _, j) = self.locate(p);
            let ep = self.unit_vector(p);
            for k in 0..self.blocks[b] {
                let q = self.index(b, j, k);
                let eq = self.unit_vector(q);
                let pq = self.mult(&ep, &eq);
                for l in 0..self.blocks[b] {
                    let er = self.unit_vector(self.index(b, k, l));
                    if self.mult(&pq, &er) != self.mult(&ep, &self.mult(&eq, &er)) {
                        return Err(QgraphError::StructureLaw("associativity"));
                    }
                }
            }
        }
        Ok(())
    }

    /// The algebra B acting on L²(B) by left multiplication. Classical sets
    /// give the abelian diagonal algebra labelled 0..n−1.
    pub fn algebra(&self) -> VNAlgebra {
        if self.is_classical() {
            return VNAlgebra::abelian_diagonal((0..self.dim).map(|i| i.to_string()).collect());
        }
        let gens = (0..self.dim)
            .map(|k| {
                let e = self.unit_vector(k);
                let cols: Vec<Vector> = (0..self.dim).map(|c| self.mult(&e, &self.unit_vector(c))).collect();
                MatrixGQ::from_fn(self.dim, self.dim, |r, c| cols[c][r].clone())
            })
            .collect();
        VNAlgebra::general(self.dim, gens).expect("dim×dim generators")
    }
}

/// δ² if m m* = δ² id, else `NotDeltaForm` naming the first disagreeing block.
pub fn is_delta_form(q: &FiniteQuantumSet) -> Result<Rational, QgraphError> {
    // Compute m m* on basis vectors and read off the scalar per block.
    let mut first: Option<Rational> = None;
    for (b, &n) in q.blocks.iter().enumerate() {
        let k = q.index(b, 0, 0);
        let mut image = q.zero();
        for (c, l, r) in q.m_star(k) {
            let prod = q.mult(&q.unit_vector(l), &q.unit_vector(r));
            for (x, y) in image.iter_mut().zip(&prod) {
                *x += &(&c * y);
            }
        }
        let value = image[k].re.clone();
        debug_assert_eq!(value, Rational::from(n as i64) / q.weights[b].clone());
        match &first {
            None => first = Some(value),
            Some(f) if *f != value => {
                return Err(QgraphError::NotDeltaForm { block: b, value, first: f.clone() });
            }
            Some(_) => {}
        }
    }
    Ok(first.expect("at least one block"))
}

/// A linear map on L²(B), as a matrix in the matrix-unit basis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QuantumAdjacency {
    pub matrix: MatrixGQ,
}

impl QuantumAdjacency {
    fn column(&self, k: usize) -> Vector {
        (0..self.matrix.rows()).map(|r| self.matrix.get(r, k).clone()).collect()
    }

    fn check_shape(&self, q: &FiniteQuantumSet) -> Result<(), QgraphError> {
        let (rows, cols) = (self.matrix.rows(), self.matrix.cols());
        if rows != q.dim || cols != q.dim {
            return Err(QgraphError::AdjacencyShape { rows, cols, dim: q.dim });
        }
        Ok(())
    }
}

fn matrix_from_columns(cols: &[Vector]) -> MatrixGQ {
    let n = cols.len();
    MatrixGQ::from_fn(n, n, |r, c| cols[c][r].clone())
}

/// Compares two operators column by column; on failure the note carries the
/// full residual matrix and the witness is its first nonzero (row, column).
fn identity_check(name: &str, lhs: &[Vector], rhs: &[Vector]) -> CheckResult {
    let mut result =
        CheckResult { name: name.into(), pass: true, max_residual: 0.0, witness: None, structural: false, note: None };
    if lhs == rhs {
        return result;
    }
    let diff: Vec<Vector> = lhs.iter().zip(rhs).map(|(l, r)| l.iter().zip(r).map(|(x, y)| x - y).collect()).collect();
    let diff = matrix_from_columns(&diff);
    for r in 0..diff.rows() {
        for c in 0..diff.cols() {
            let z = diff.get(r, c);
            if !z.is_zero() {
                result.max_residual = result.max_residual.max(z.norm_sqr().to_f64().sqrt());
                result.witness.get_or_insert_with(|| vec![r, c]);
            }
        }
    }
    result.pass = false;
    result.note = Some(format!("residual {diff:?}"));
    result
}

/// The three adjacency axioms as exact matrix identities on L²(B):
///
/// 1. m(A ⊗ A)m* = δ² A
/// 2. (id ⊗ η*m)(id ⊗ A ⊗ id)(m*η ⊗ id) = A
/// 3. m(A ⊗ id)m* = δ² id
///
/// Witnesses are the first nonzero entry (row, column) of the residual.
pub fn verify_quantum_adjacency(q: &FiniteQuantumSet, a: &QuantumAdjacency) -> Result<VerificationReport, QgraphError> {
    let delta2 = GaussianRational::from(is_delta_form(q)?);
    a.check_shape(q)?;
    let d = q.dim;
    let acols: Vec<Vector> = (0..d).map(|k| a.column(k)).collect();
    let units: Vec<Vector> = (0..d).map(|k| q.unit_vector(k)).collect();
    let scaled = |v: &Vector| -> Vector { v.iter().map(|x| x * &delta2).collect() };

    // m(S ⊗ T)m* applied to e_k, for S, T given by columns.
    let sandwich = |s: &[Vector], t: &[Vector], k: usize| {
        let mut out = q.zero();
        for (c, l, r) in q.m_star(k) {
            let prod = q.mult(&s[l], &t[r]);
            for (x, y) in out.iter_mut().zip(&prod) {
                if !y.is_zero() {
                    *x += &(&c * y);
                }
            }
        }
        out
    };

    let lhs1: Vec<Vector> = (0..d).map(|k| sandwich(&acols, &acols, k)).collect();
    let rhs1: Vec<Vector> = acols.iter().map(scaled).collect();

    // (m*η ⊗ id)(x) = Σ c e_l ⊗ e_r ⊗ x over the terms of m*(1); then
    // id ⊗ A ⊗ id and id ⊗ η*m give Σ c ψ(A(e_r)·x) e_l.
    let m_star_unit: Vec<(GaussianRational, usize, usize)> = {
        let one = q.unit();
        (0..d).filter(|&k| !one[k].is_zero()).flat_map(|k| q.m_star(k)).collect()
    };
    let lhs2: Vec<Vector> = (0..d)
        .map(|xk| {
            let mut out = q.zero();
            for (c, l, r) in &m_star_unit {
                let s = q.psi_of_product(&acols[*r], &units[xk]);
                if !s.is_zero() {
                    out[*l] += &(c * &s);
                }
            }
            out
        })
        .collect();

    let lhs3: Vec<Vector> = (0..d).map(|k| sandwich(&acols, &units, k)).collect();
    let rhs3: Vec<Vector> = units.iter().map(scaled).collect();

    let mut report = VerificationReport::new();
    report.push(identity_check("axiom_1", &lhs1, &rhs1));
    report.push(identity_check("axiom_2", &lhs2, &acols));
    report.push(identity_check("axiom_3", &lhs3, &rhs3));
    Ok(report)
}

/// Checks a 0/1 matrix is square, symmetric and reflexive.
pub fn check_reflexive_adjacency(adj: &[Vec<u8>]) -> Result<(), QgraphError> {
    let n = adj.len();
    if adj.iter().any(|r| r.len() != n) {
        return Err(QgraphError::NotSquare);
    }
    for i in 0..n {
        for j in 0..n {
            if adj[i][j] > 1 {
                return Err(QgraphError::NotZeroOne { i, j });
            }
        }
    }
    if let Some(i) = (0..n).find(|&i| adj[i][i] != 1) {
        return Err(QgraphError::NotReflexive { i });
    }
    for i in 0..n {
        for j in i + 1..n {
            if adj[i][j] != adj[j][i] {
                return Err(QgraphError::NotSymmetric { i, j });
            }
        }
    }
    Ok(())
}

/// Cⁿ with uniform weights 1/n (δ² = n) and A the adjacency matrix acting
/// on ℓ²(n) in the basis of minimal projections.
pub fn classical_graph_embed(adj: &[Vec<u8>]) -> Result<(FiniteQuantumSet, QuantumAdjacency), QgraphError> {
    check_reflexive_adjacency(adj)?;
    let n = adj.len();
    let q = FiniteQuantumSet::classical(n);
    let matrix = MatrixGQ::from_fn(n, n, |i, j| GaussianRational::from(i64::from(adj[i][j])));
    Ok((q, QuantumAdjacency { matrix }))
}

/// Reflexive 0/1 adjacency matrix of an edge list on n vertices.
pub fn reflexive_adjacency(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<u8>> {
    let mut adj = vec![vec![0u8; n]; n];
    for (i, row) in adj.iter_mut().enumerate() {
        row[i] = 1;
    }
    for &(i, j) in edges {
        adj[i][j] = 1;
        adj[j][i] = 1;
    }
    adj
}

/// S = image of P(T) = δ⁻² m(A ⊗ T)m* on B(L²(B)), after checking P∘P = P
/// exactly.
pub fn bimodule_from_adjacency(q: &FiniteQuantumSet, a: &QuantumAdjacency) -> Result<OperatorSubspace, QgraphError> {
    let delta2 = is_delta_form(q)?;
    a.check_shape(q)?;
    let d = q.dim;
    let inv = GaussianRational::from(delta2.recip());
    let acols: Vec<Vector> = (0..d).map(|k| a.column(k)).collect();
    // P applied to T given as a matrix.
    let apply = |t: &MatrixGQ| -> MatrixGQ {
        let cols: Vec<Vector> = (0..d)
            .map(|k| {
                let mut out = q.zero();
                for (c, l, r) in q.m_star(k) {
                    let tcol: Vector = (0..d).map(|row| t.get(row, r).clone()).collect();
                    if tcol.iter().all(GaussianRational::is_zero) {
                        continue;
                    }
                    let prod = q.mult(&acols[l], &tcol);
                    let coef = &c * &inv;
                    for (x, y) in out.iter_mut().zip(&prod) {
                        if !y.is_zero() {
                            *x += &(&coef * y);
                        }
                    }
                }
                out
            })
            .collect();
        matrix_from_columns(&cols)
    };
    let mut image = OperatorSubspace::zero(d);
    let mut residual = 0.0f64;
    for p in 0..d {
        for r in 0..d {
            let pt = apply(&MatrixGQ::unit(d, p, r));
            let ppt = apply(&pt);
            let diff = ppt.try_sub(&pt).expect("same shape");
            for z in diff.entries() {
                if !z.is_zero() {
                    residual = residual.max(z.norm_sqr().to_f64().sqrt());
                }
            }
            image.insert(&pt).expect("d×d");
        }
    }
    if residual > 0.0 {
        return Err(QgraphError::NotIdempotent { residual });
    }
    Ok(image)
}

/// Quantum graph conditions for S ⊆ M_n over M: 1 ∈ S, S* = S, and
/// M'SM' ⊆ S (checked as M'S ⊆ S and SM' ⊆ S, equivalent since 1 ∈ M').
pub fn verify_quantum_graph_os(s: &OperatorSubspace, m: &VNAlgebra) -> VerificationReport {
    let mut report = VerificationReport::new();
    if s.ambient_dim() != m.n() {
        report.fail("ambient", Some(vec![s.ambient_dim(), m.n()]), "DimensionMismatch");
        return report;
    }
    let unit = s.contains_identity();
    report.push(CheckResult {
        name: "contains_identity".into(),
        pass: unit,
        max_residual: 0.0,
        witness: None,
        structural: false,
        note: None,
    });
    let adj = s.first_adjoint_violation();
    let basis = s.basis();
    report.push(CheckResult {
        name: "adjoint_closed".into(),
        pass: adj.is_none(),
        max_residual: 0.0,
        witness: adj.map(|b| vec![basis.iter().position(|x| *x == b).expect("basis element")]),
        structural: false,
        note: None,
    });
    let comm = m.commutant().basis();
    let mut witness = None;
    'outer: for (i, c) in comm.iter().enumerate() {
        for (j, b) in basis.iter().enumerate() {
            let left = c.try_mul(b).expect("same ambient");
            let right = b.try_mul(c).expect("same ambient");
            for (side, prod) in [("left", left), ("right", right)] {
                if !s.contains(&prod).expect("same ambient") {
                    witness = Some((vec![i, j], format!("{side} product with commutant element {i} leaves S")));
                    break 'outer;
                }
            }
        }
    }
    let (w, note) = witness.unzip();
    report.push(CheckResult { name: "bimodule".into(), pass: w.is_none(), max_residual: 0.0, witness: w, structural: false, note });
    report
}

/// V_0 = M', V_1 = span(M' ∪ S), V_k = V_1^k until V_1^{k+1} = V_1^k.
pub fn filtration_from_quantum_graph(s: &OperatorSubspace, m: &VNAlgebra) -> Result<QuantumMetricFiltration, QgraphError> {
    let report = verify_quantum_graph_os(s, m);
    if !report.pass {
        let names: Vec<&str> = report.failed().map(|c| c.name.as_str()).collect();
        return Err(QgraphError::NotQuantumGraph(names.join(", ")));
    }
    let v0 = m.commutant();
    let v1 = v0.join(s).map_err(WstarError::from)?;
    let mut breakpoints = vec![Rational::zero()];
    let mut subspaces = vec![v0.clone()];
    if v1 != v0 {
        let mut current = v1.clone();
        let mut k = 1;
        loop {
            breakpoints.push(Rational::from(k));
            subspaces.push(current.clone());
            let next = current.product(&v1).map_err(WstarError::from)?;
            if next == current {
                break;
            }
            current = next;
            k += 1;
        }
    }
    Ok(QuantumMetricFiltration::new(m.clone(), breakpoints, subspaces)?)
}

/// Input file for quantum-graph commands: either a classical reflexive 0/1
/// adjacency matrix or a quantum set with an adjacency on its GNS space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum QuantumGraphInput {
    Classical { adjacency: Vec<Vec<u8>> },
    Quantum { quantum_set: FiniteQuantumSet, adjacency: QuantumAdjacency },
}

impl QuantumGraphInput {
    pub fn load(self) -> Result<(FiniteQuantumSet, QuantumAdjacency), QgraphError> {
        match self {
            QuantumGraphInput::Classical { adjacency } => classical_graph_embed(&adjacency),
            QuantumGraphInput::Quantum { quantum_set, adjacency } => Ok((quantum_set, adjacency)),
        }
    }
}
