//! Finite-dimensional W*-quantum metrics as step filtrations of operator
//! subspaces.
//!
//! A filtration stores breakpoints 0 = t_0 < t_1 < … < t_k and subspaces
//! S_0 ⊆ … ⊆ S_k; V_t = S_i on [t_i, t_{i+1}) and V_t = S_k for t ≥ t_k.
//! Right-continuity holds by this encoding.
//!
//! Checking V_s V_t ⊆ V_{s+t} at breakpoint pairs suffices for all real
//! s, t ≥ 0: if V_s = S_i and V_t = S_j then t_i ≤ s and t_j ≤ t, so the
//! largest breakpoint t_m ≤ t_i + t_j satisfies S_m ⊆ V_{s+t} by nesting.

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::algebra::{is_magic_unitary, GameAlgebraRep, RepBlocks};
use crate::error::LinalgError;
use crate::linalg::{MatrixCF, MatrixGQ, OperatorSubspace, Rational};
use crate::metric::{min_complete_graph, validate_metric, FiniteMetricSpace, GraphError, MetricError, WeightedGraph};
use crate::report::{CheckResult, VerificationReport};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WstarError {
    #[error("NotAbelian: metric recovery needs an abelian diagonal algebra")]
    NotAbelian,
    #[error("NoFiniteDistance({x},{y})")]
    NoFiniteDistance { x: usize, y: usize },
    #[error("recovered distances do not form a metric: {0}")]
    InvalidMetric(MetricError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("graph edge {i}-{j} has weight {weight}; an unweighted graph is required")]
    WeightedEdge { i: usize, j: usize, weight: Rational },
    #[error("filtration needs at least one breakpoint")]
    Empty,
    #[error("first breakpoint is {0}, expected 0")]
    FirstBreakpoint(Rational),
    #[error("breakpoints not strictly increasing at index {0}")]
    NotIncreasing(usize),
    #[error("{breakpoints} breakpoints but {subspaces} subspaces")]
    LengthMismatch { breakpoints: usize, subspaces: usize },
    #[error("DimensionMismatch: {0}")]
    DimensionMismatch(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AlgebraKind {
    AbelianDiagonal { labels: Vec<String> },
    FullMatrix,
    General,
}

/// A von Neumann algebra M ⊆ M_n given by generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VNAlgebra {
    n: usize,
    generators: Vec<MatrixGQ>,
    kind: AlgebraKind,
}

impl VNAlgebra {
    /// ℓ∞(X) acting diagonally on ℓ²(X).
    pub fn abelian_diagonal(labels: Vec<String>) -> Self {
        let n = labels.len();
        VNAlgebra {
            n,
            generators: (0..n).map(|i| MatrixGQ::unit(n, i, i)).collect(),
            kind: AlgebraKind::AbelianDiagonal { labels },
        }
    }

    /// M_n, generated by E_{i,i+1} (E_11 when n = 1).
    pub fn full_matrix(n: usize) -> Self {
        let generators =
            if n == 1 { vec![MatrixGQ::unit(1, 0, 0)] } else { (0..n - 1).map(|i| MatrixGQ::unit(n, i, i + 1)).collect() };
        VNAlgebra { n, generators, kind: AlgebraKind::FullMatrix }
    }

    pub fn general(n: usize, generators: Vec<MatrixGQ>) -> Result<Self, WstarError> {
        Self::with_kind(n, generators, AlgebraKind::General)
    }

    fn with_kind(n: usize, generators: Vec<MatrixGQ>, kind: AlgebraKind) -> Result<Self, WstarError> {
        if let Some(g) = generators.iter().find(|g| g.rows() != n || g.cols() != n) {
            return Err(WstarError::DimensionMismatch(format!(
                "generator is {}x{}, ambient is {n}x{n}",
                g.rows(),
                g.cols()
            )));
        }
        if let AlgebraKind::AbelianDiagonal { labels } = &kind {
            if labels.len() != n {
                return Err(WstarError::DimensionMismatch(format!("{} labels for ambient {n}", labels.len())));
            }
        }
        Ok(VNAlgebra { n, generators, kind })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[MatrixGQ] {
        &self.generators
    }

    pub fn kind(&self) -> &AlgebraKind {
        &self.kind
    }

    /// M' computed from the generators.
    pub fn commutant(&self) -> OperatorSubspace {
        OperatorSubspace::commutant(&self.generators, self.n).expect("generators are n×n")
    }
}

/// {V_t} as a step function of t.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantumMetricFiltration {
    algebra: VNAlgebra,
    breakpoints: Vec<Rational>,
    subspaces: Vec<OperatorSubspace>,
}

impl QuantumMetricFiltration {
    /// Checks the shape only (breakpoints, lengths, ambient sizes); the
    /// axioms are left to [`verify_filtration_axioms`].
    pub fn new(
        algebra: VNAlgebra,
        breakpoints: Vec<Rational>,
        subspaces: Vec<OperatorSubspace>,
    ) -> Result<Self, WstarError> {
        let first = breakpoints.first().ok_or(WstarError::Empty)?;
        if !first.is_zero() {
            return Err(WstarError::FirstBreakpoint(first.clone()));
        }
        if let Some(i) = breakpoints.windows(2).position(|w| w[0] >= w[1]) {
            return Err(WstarError::NotIncreasing(i + 1));
        }
        if breakpoints.len() != subspaces.len() {
            return Err(WstarError::LengthMismatch { breakpoints: breakpoints.len(), subspaces: subspaces.len() });
        }
        if let Some(s) = subspaces.iter().find(|s| s.ambient_dim() != algebra.n) {
            return Err(WstarError::DimensionMismatch(format!(
                "subspace in M_{}, algebra in M_{}",
                s.ambient_dim(),
                algebra.n
            )));
        }
        Ok(QuantumMetricFiltration { algebra, breakpoints, subspaces })
    }

    pub fn algebra(&self) -> &VNAlgebra {
        &self.algebra
    }

    pub fn n(&self) -> usize {
        self.algebra.n
    }

    pub fn breakpoints(&self) -> &[Rational] {
        &self.breakpoints
    }

    pub fn subspaces(&self) -> &[OperatorSubspace] {
        &self.subspaces
    }

    /// Index of the largest breakpoint ≤ t; `None` for t < 0.
    pub fn index_at(&self, t: &Rational) -> Option<usize> {
        let k = self.breakpoints.partition_point(|b| b <= t);
        k.checked_sub(1)
    }

    /// V_t; beyond the last breakpoint this is S_k.
    pub fn subspace_at(&self, t: &Rational) -> Option<&OperatorSubspace> {
        self.index_at(t).map(|i| &self.subspaces[i])
    }

    pub fn dims(&self) -> Vec<usize> {
        self.subspaces.iter().map(OperatorSubspace::dim).collect()
    }
}

/// V_t = span{E_xy : d(x, y) ≤ t} over ℓ∞(X).
pub fn filtration_from_metric(x: &FiniteMetricSpace) -> QuantumMetricFiltration {
    let n = x.len();
    let mut breakpoints = vec![Rational::zero()];
    breakpoints.extend(x.distinct_distances().into_iter().filter(|t| !t.is_zero()));
    let subspaces = breakpoints
        .iter()
        .map(|t| {
            OperatorSubspace::from_units(
                n,
                (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|&(i, j)| x.distance(i, j) <= t),
            )
        })
        .collect();
    QuantumMetricFiltration::new(VNAlgebra::abelian_diagonal(x.labels().to_vec()), breakpoints, subspaces)
        .expect("breakpoints from sorted distinct distances")
}

/// Ambient algebra for [`filtration_from_graph_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphAlgebra {
    /// M_n with S_0 = scalars.
    #[default]
    Full,
    /// ℓ∞(V) with S_0 = diagonal.
    Abelian,
}

/// Graph filtration on M_n: S_1 = span{E_ij : i = j or ij ∈ E}, S_k = S_1^k.
pub fn filtration_from_graph(g: &WeightedGraph) -> Result<QuantumMetricFiltration, WstarError> {
    filtration_from_graph_with(g, GraphAlgebra::Full)
}

pub fn filtration_from_graph_with(
    g: &WeightedGraph,
    algebra: GraphAlgebra,
) -> Result<QuantumMetricFiltration, WstarError> {
    if let Some((i, j, w)) = g.edges().iter().find(|(_, _, w)| !w.is_one()) {
        return Err(WstarError::WeightedEdge { i: *i, j: *j, weight: w.clone() });
    }
    min_complete_graph(g)?;
    let n = g.len();
    let (alg, s0) = match algebra {
        GraphAlgebra::Full => (VNAlgebra::full_matrix(n), OperatorSubspace::scalars(n)),
        GraphAlgebra::Abelian => (VNAlgebra::abelian_diagonal(g.labels().to_vec()), OperatorSubspace::diagonal(n)),
    };
    let mut breakpoints = vec![Rational::zero()];
    let mut subspaces = vec![s0];
    if n > 1 {
        let s1 = OperatorSubspace::from_units(
            n,
            (0..n).map(|i| (i, i)).chain(g.edges().iter().flat_map(|&(i, j, _)| [(i, j), (j, i)])),
        );
        let mut current = s1.clone();
        let mut k = 1;
        loop {
            breakpoints.push(Rational::from(k));
            subspaces.push(current.clone());
            if current.is_full() {
                break;
            }
            current = current.product(&s1)?;
            k += 1;
        }
    }
    QuantumMetricFiltration::new(alg, breakpoints, subspaces)
}

/// d(x, y) = min{t_i : S_i has a nonzero (x, y) coordinate}.
///
/// The basis is in reduced echelon form, so "some basis element is nonzero
/// at (x, y)" does not depend on the choice of basis.
pub fn recover_metric(f: &QuantumMetricFiltration) -> Result<FiniteMetricSpace, WstarError> {
    let AlgebraKind::AbelianDiagonal { labels } = f.algebra.kind() else {
        return Err(WstarError::NotAbelian);
    };
    let n = f.n();
    let mut dist: Vec<Vec<Option<Rational>>> = vec![vec![None; n]; n];
    for (t, s) in f.breakpoints.iter().zip(&f.subspaces) {
        for b in s.basis() {
            for x in 0..n {
                for y in 0..n {
                    if dist[x][y].is_none() && !b.get(x, y).is_zero() {
                        dist[x][y] = Some(t.clone());
                    }
                }
            }
        }
    }
    let mut rows = Vec::with_capacity(n);
    for (x, row) in dist.into_iter().enumerate() {
        let mut r = Vec::with_capacity(n);
        for (y, d) in row.into_iter().enumerate() {
            r.push(d.ok_or(WstarError::NoFiniteDistance { x, y })?);
        }
        rows.push(r);
    }
    validate_metric(labels.clone(), rows).map_err(WstarError::InvalidMetric)
}

fn check(name: &str, witness: Option<Vec<usize>>, note: Option<String>) -> CheckResult {
    CheckResult { name: name.to_string(), pass: witness.is_none(), max_residual: 0.0, witness, structural: false, note }
}

/// Exact check of the three axioms plus the operator-system conditions.
///
/// * `nesting`: S_i ⊆ S_{i+1}, witness `[i]`;
/// * `axiom_1`: S_i S_j ⊆ S_m with t_m the largest breakpoint ≤ t_i + t_j,
///   witness `[i, j]` for the first failing pair in row-major order;
/// * `axiom_2`: right-continuity, structural;
/// * `axiom_3`: S_0 = M';
/// * `operator_system`: each S_i adjoint-closed and containing 1, witness `[i]`.
pub fn verify_filtration_axioms(f: &QuantumMetricFiltration) -> VerificationReport {
    let mut report = VerificationReport::new();
    let s = &f.subspaces;
    let k = s.len();

    let nesting = (0..k - 1).find(|&i| !s[i].leq(&s[i + 1]).expect("same ambient"));
    report.push(check("nesting", nesting.map(|i| vec![i]), None));

    let bases: Vec<Vec<MatrixGQ>> = s.iter().map(OperatorSubspace::basis).collect();
    let mut axiom1 = None;
    'pairs: for i in 0..k {
        for j in 0..k {
            let sum = f.breakpoints[i].clone() + f.breakpoints[j].clone();
            let m = f.index_at(&sum).expect("sum of nonnegative breakpoints");
            if s[m].is_full() {
                continue;
            }
            for a in &bases[i] {
                for b in &bases[j] {
                    let prod = a.try_mul(b).expect("same ambient");
                    if !s[m].contains(&prod).expect("same ambient") {
                        axiom1 = Some((vec![i, j], format!("S_{i}·S_{j} ⊄ S_{m}: product {prod:?}")));
                        break 'pairs;
                    }
                }
            }
        }
    }
    let (w, note) = axiom1.unzip();
    report.push(check("axiom_1", w, note));
    report.structural("axiom_2", "right-continuity holds by the half-open step encoding");

    let commutant = f.algebra.commutant();
    let axiom3 = if s[0] == commutant {
        None
    } else {
        Some(format!("dim S_0 = {}, dim M' = {}", s[0].dim(), commutant.dim()))
    };
    report.push(CheckResult {
        name: "axiom_3".into(),
        pass: axiom3.is_none(),
        max_residual: 0.0,
        witness: None,
        structural: false,
        note: axiom3,
    });

    let opsys = (0..k).find_map(|i| {
        if !s[i].contains_identity() {
            Some((vec![i], format!("S_{i} does not contain the identity")))
        } else {
            s[i].first_adjoint_violation().map(|b| (vec![i], format!("S_{i} not adjoint-closed at {b:?}")))
        }
    });
    let (w, note) = opsys.unzip();
    report.push(check("operator_system", w, note));
    report
}

/// Orthonormal basis (complex, vectorized row-major) of a subspace.
fn orthonormal_basis(s: &OperatorSubspace) -> Vec<Vec<Complex64>> {
    let mut out: Vec<Vec<Complex64>> = Vec::new();
    for b in s.basis() {
        let mut v: Vec<Complex64> = b.entries().iter().map(|z| z.to_complex()).collect();
        for _ in 0..2 {
            for q in &out {
                let c: Complex64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                v.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        out.push(v);
    }
    out
}

/// Distance from `v` to the span of an orthonormal family.
fn distance_to_span(v: &[Complex64], onb: &[Vec<Complex64>]) -> f64 {
    let mut r = v.to_vec();
    for q in onb {
        let c: Complex64 = q.iter().zip(&r).map(|(a, b)| a.conj() * b).sum();
        r.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
    }
    r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Checks P(A ⊗ 1_d)P* ∈ W_t ⊗ M_d for every basis element A of V_t, at
/// every breakpoint of either filtration, where P has block (y, x) equal
/// to E_xy. For d = 1 and an isometry g this sends E_xy to E_{g(x)g(y)}.
///
/// Membership is tested slice by slice: the n×n matrix of (α, β) entries
/// of the blocks must lie in W_t. One check per breakpoint, named `t=<t>`,
/// with witness `[basis index, α, β]`; exact representations are checked
/// exactly.
pub fn conjugation_invariance_check(
    rep: &GameAlgebraRep,
    fv: &QuantumMetricFiltration,
    fw: &QuantumMetricFiltration,
    tol: f64,
) -> Result<VerificationReport, WstarError> {
    let n = rep.nx();
    if rep.ny() != n || fv.n() != n || fw.n() != n {
        return Err(WstarError::DimensionMismatch(format!(
            "rep is {}x{}, filtrations act on M_{} and M_{}",
            rep.nx(),
            rep.ny(),
            fv.n(),
            fw.n()
        )));
    }
    let d = rep.d();
    let mut report = VerificationReport::new();
    let mu = is_magic_unitary(rep, tol);
    report.push(CheckResult {
        name: "magic_unitary".into(),
        pass: mu.pass,
        max_residual: mu.max_residual(),
        witness: None,
        structural: false,
        note: None,
    });

    let mut times: Vec<Rational> = fv.breakpoints().iter().chain(fw.breakpoints()).cloned().collect();
    times.sort();
    times.dedup();
    for t in &times {
        let v = fv.subspace_at(t).expect("t ≥ 0");
        let w = fw.subspace_at(t).expect("t ≥ 0");
        let name = format!("t={t}");
        let mut result = CheckResult { name, pass: true, max_residual: 0.0, witness: None, structural: false, note: None };
        match rep.blocks() {
            RepBlocks::Exact(e) => {
                'basis: for (idx, a) in v.basis().iter().enumerate() {
                    let blocks = conjugate_exact(e, a, n, d);
                    for alpha in 0..d {
                        for beta in 0..d {
                            let slice = MatrixGQ::from_fn(n, n, |y, y2| blocks[y * n + y2].get(alpha, beta).clone());
                            if !w.contains(&slice).expect("n×n") {
                                result.pass = false;
                                result.max_residual = 1.0;
                                result.witness = Some(vec![idx, alpha, beta]);
                                result.note = Some(format!("image of basis element {a:?} leaves W_t"));
                                break 'basis;
                            }
                        }
                    }
                }
            }
            RepBlocks::Float(e) => {
                let onb = orthonormal_basis(w);
                for (idx, a) in v.basis().iter().enumerate() {
                    let blocks = conjugate_float(e, &a.to_float(), n, d);
                    for alpha in 0..d {
                        for beta in 0..d {
                            let slice: Vec<Complex64> =
                                (0..n * n).map(|k| blocks[k].get(alpha, beta)).collect();
                            let r = distance_to_span(&slice, &onb);
                            if r > result.max_residual {
                                result.max_residual = r;
                            }
                            if r > tol && result.pass {
                                result.pass = false;
                                result.witness = Some(vec![idx, alpha, beta]);
                                result.note = Some(format!("image of basis element {a:?} leaves W_t"));
                            }
                        }
                    }
                }
            }
        }
        report.push(result);
    }
    Ok(report)
}

/// Blocks (y, y') of P(A ⊗ 1)P*: Σ_{x,x'} a_{xx'} E_{xy} E_{x'y'}.
fn conjugate_exact(e: &[Vec<MatrixGQ>], a: &MatrixGQ, n: usize, d: usize) -> Vec<MatrixGQ> {
    let mut out = vec![MatrixGQ::zeros(d, d); n * n];
    for x in 0..n {
        for x2 in 0..n {
            let c = a.get(x, x2);
            if c.is_zero() {
                continue;
            }
            for y in 0..n {
                if e[x][y].is_zero() {
                    continue;
                }
                for y2 in 0..n {
                    let prod = e[x][y].try_mul(&e[x2][y2]).expect("d×d");
                    if !prod.is_zero() {
                        out[y * n + y2] = out[y * n + y2].try_add(&prod.scale(c)).expect("d×d");
                    }
                }
            }
        }
    }
    out
}

fn conjugate_float(e: &[Vec<MatrixCF>], a: &MatrixCF, n: usize, d: usize) -> Vec<MatrixCF> {
    let mut out = vec![MatrixCF::zeros(d, d); n * n];
    for x in 0..n {
        for x2 in 0..n {
            let c = a.get(x, x2);
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            for y in 0..n {
                for y2 in 0..n {
                    let prod = e[x][y].try_mul(&e[x2][y2]).expect("d×d");
                    out[y * n + y2] = out[y * n + y2].try_add(&prod.scale(c)).expect("d×d");
                }
            }
        }
    }
    out
}

#[derive(Serialize, Deserialize)]
struct AlgebraJson {
    #[serde(flatten)]
    kind: AlgebraKind,
    generators: Vec<MatrixGQ>,
}

#[derive(Serialize, Deserialize)]
struct FiltrationJson {
    n: usize,
    algebra: AlgebraJson,
    breakpoints: Vec<Rational>,
    subspaces: Vec<Vec<MatrixGQ>>,
}

impl Serialize for QuantumMetricFiltration {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        FiltrationJson {
            n: self.n(),
            algebra: AlgebraJson { kind: self.algebra.kind.clone(), generators: self.algebra.generators.clone() },
            breakpoints: self.breakpoints.clone(),
            subspaces: self.subspaces.iter().map(OperatorSubspace::basis).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for QuantumMetricFiltration {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = FiltrationJson::deserialize(deserializer)?;
        let algebra = VNAlgebra::with_kind(raw.n, raw.algebra.generators, raw.algebra.kind).map_err(D::Error::custom)?;
        let subspaces = raw
            .subspaces
            .iter()
            .map(|mats| OperatorSubspace::span(mats, raw.n))
            .collect::<Result<Vec<_>, _>>()
            .map_err(D::Error::custom)?;
        QuantumMetricFiltration::new(algebra, raw.breakpoints, subspaces).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{pauli_block_rep, rep_from_isometry};
    use crate::metric::fixtures::*;
    use crate::metric::{enumerate_isometries, Isometry};

    fn r(n: i64) -> Rational {
        Rational::from(n)
    }

    /// Oracle: all-pairs BFS distances of an unweighted graph.
    fn bfs(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<Option<usize>>> {
        let mut adj = vec![Vec::new(); n];
        for &(i, j) in edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        (0..n)
            .map(|s| {
                let mut dist = vec![None; n];
                dist[s] = Some(0);
                let mut queue = std::collections::VecDeque::from([s]);
                while let Some(u) = queue.pop_front() {
                    for &v in &adj[u] {
                        if dist[v].is_none() {
                            dist[v] = Some(dist[u].unwrap() + 1);
                            queue.push_back(v);
                        }
                    }
                }
                dist
            })
            .collect()
    }

    #[test]
    fn metric_filtration_examples() {
        let f = filtration_from_metric(&line3());
        assert_eq!(f.breakpoints(), &[r(0), r(1), r(2)]);
        assert_eq!(f.dims(), vec![3, 7, 9]);
        let f = filtration_from_metric(&point());
        assert_eq!((f.breakpoints().len(), f.dims()), (1, vec![1]));
        let f = filtration_from_metric(&triangle());
        assert_eq!(f.dims(), vec![3, 9]);
    }

    #[test]
    fn step_semantics() {
        let f = filtration_from_metric(&line3());
        assert!(f.subspace_at(&Rational::new(-1, 2)).is_none());
        assert_eq!(f.subspace_at(&Rational::new(1, 2)).unwrap().dim(), 3);
        assert_eq!(f.subspace_at(&r(1)).unwrap().dim(), 7);
        assert_eq!(f.subspace_at(&Rational::new(19, 10)).unwrap().dim(), 7);
        assert_eq!(f.subspace_at(&r(100)).unwrap().dim(), 9);
    }

    #[test]
    fn round_trip() {
        for x in [line3(), triangle(), point(), equidistant(4, 3)] {
            assert_eq!(recover_metric(&filtration_from_metric(&x)).unwrap(), x);
        }
    }

    #[test]
    fn recover_errors() {
        let f = filtration_from_metric(&line3());
        let mut subspaces = f.subspaces().to_vec();
        let units = (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).filter(|&p| p != (0, 1));
        subspaces[2] = OperatorSubspace::from_units(3, units.clone());
        subspaces[1] = OperatorSubspace::from_units(3, units.filter(|&(i, j)| i.abs_diff(j) <= 1));
        let tampered = QuantumMetricFiltration::new(f.algebra().clone(), f.breakpoints().to_vec(), subspaces).unwrap();
        assert_eq!(recover_metric(&tampered), Err(WstarError::NoFiniteDistance { x: 0, y: 1 }));

        let g = WeightedGraph::unweighted(2, &[(0, 1)]).unwrap();
        assert_eq!(recover_metric(&filtration_from_graph(&g).unwrap()), Err(WstarError::NotAbelian));
    }

    #[test]
    fn graph_filtration_examples() {
        let p3 = WeightedGraph::unweighted(3, &[(0, 1), (1, 2)]).unwrap();
        let f = filtration_from_graph(&p3).unwrap();
        assert_eq!(f.breakpoints(), &[r(0), r(1), r(2)]);
        assert_eq!(f.dims(), vec![1, 7, 9]);
        assert!(verify_filtration_axioms(&f).pass);

        let k3 = WeightedGraph::unweighted(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let f = filtration_from_graph(&k3).unwrap();
        assert_eq!(f.dims(), vec![1, 9]);

        let single = WeightedGraph::unweighted(1, &[]).unwrap();
        let f = filtration_from_graph(&single).unwrap();
        assert_eq!(f.dims(), vec![1]);
        assert!(verify_filtration_axioms(&f).pass);

        let split = WeightedGraph::unweighted(3, &[(0, 1)]).unwrap();
        assert!(matches!(filtration_from_graph(&split), Err(WstarError::Graph(GraphError::Disconnected { .. }))));
    }

    #[test]
    fn graph_products_match_bfs() {
        let edges = [(0, 1), (1, 2), (2, 3), (1, 4)];
        let g = WeightedGraph::unweighted(5, &edges).unwrap();
        let dist = bfs(5, &edges);
        let f = filtration_from_graph(&g).unwrap();
        for (k, s) in f.subspaces().iter().enumerate().skip(1) {
            let oracle = OperatorSubspace::from_units(
                5,
                (0..5).flat_map(|i| (0..5).map(move |j| (i, j))).filter(|&(i, j)| dist[i][j].unwrap() <= k),
            );
            assert_eq!(s, &oracle, "k = {k}");
        }
        let abelian = filtration_from_graph_with(&g, GraphAlgebra::Abelian).unwrap();
        assert!(verify_filtration_axioms(&abelian).pass);
        assert_eq!(recover_metric(&abelian).unwrap(), min_complete_graph(&g).unwrap());
    }

    #[test]
    fn axioms_pass_on_metric() {
        let report = verify_filtration_axioms(&filtration_from_metric(&line3()));
        assert!(report.pass, "{report:?}");
        assert!(report.check("axiom_2").unwrap().structural);
    }

    #[test]
    fn axiom_3_fails_without_e11() {
        let f = filtration_from_metric(&line3());
        let mut subspaces = f.subspaces().to_vec();
        subspaces[0] = OperatorSubspace::from_units(3, [(1, 1), (2, 2)]);
        let tampered = QuantumMetricFiltration::new(f.algebra().clone(), f.breakpoints().to_vec(), subspaces).unwrap();
        let report = verify_filtration_axioms(&tampered);
        assert!(!report.check("axiom_3").unwrap().pass);
    }

    #[test]
    fn axiom_1_fails_without_e13() {
        let p3 = WeightedGraph::unweighted(3, &[(0, 1), (1, 2)]).unwrap();
        let f = filtration_from_graph(&p3).unwrap();
        let mut subspaces = f.subspaces().to_vec();
        subspaces[2] = OperatorSubspace::from_units(
            3,
            (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).filter(|&p| p != (0, 2)),
        );
        let tampered = QuantumMetricFiltration::new(f.algebra().clone(), f.breakpoints().to_vec(), subspaces).unwrap();
        let report = verify_filtration_axioms(&tampered);
        let a1 = report.check("axiom_1").unwrap();
        assert!(!a1.pass);
        assert_eq!(a1.witness.as_deref(), Some(&[1, 1][..]));
    }

    #[test]
    fn nesting_and_operator_system_failures() {
        let f = filtration_from_metric(&line3());
        let mut subspaces = f.subspaces().to_vec();
        subspaces[1] = OperatorSubspace::from_units(3, [(0, 0), (1, 1), (2, 2), (0, 1)]);
        let tampered = QuantumMetricFiltration::new(f.algebra().clone(), f.breakpoints().to_vec(), subspaces).unwrap();
        let report = verify_filtration_axioms(&tampered);
        assert!(report.check("nesting").unwrap().pass);
        assert_eq!(report.check("operator_system").unwrap().witness.as_deref(), Some(&[1][..]));
    }

    #[test]
    fn constructor_rejects_bad_shapes() {
        let alg = VNAlgebra::abelian_diagonal(vec!["a".into()]);
        let s = OperatorSubspace::full(1);
        assert_eq!(QuantumMetricFiltration::new(alg.clone(), vec![], vec![]), Err(WstarError::Empty));
        assert!(matches!(
            QuantumMetricFiltration::new(alg.clone(), vec![r(1)], vec![s.clone()]),
            Err(WstarError::FirstBreakpoint(_))
        ));
        assert_eq!(
            QuantumMetricFiltration::new(alg.clone(), vec![r(0), r(0)], vec![s.clone(), s.clone()]),
            Err(WstarError::NotIncreasing(1))
        );
        assert!(matches!(
            QuantumMetricFiltration::new(alg, vec![r(0)], vec![OperatorSubspace::full(2)]),
            Err(WstarError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn conjugation_by_isometries() {
        let x = line3();
        let y = line3().relabel(&[1, 0, 2]);
        let (fx, fy) = (filtration_from_metric(&x), filtration_from_metric(&y));
        for g in enumerate_isometries(&x, &y) {
            let report = conjugation_invariance_check(&rep_from_isometry(&g), &fx, &fy, 0.0).unwrap();
            assert!(report.pass, "{report:?}");
        }
        let non_iso = rep_from_isometry(&Isometry::identity(3));
        let report = conjugation_invariance_check(&non_iso, &fx, &fy, 0.0).unwrap();
        assert!(!report.pass);
        let failed = report.failed().next().unwrap();
        assert_eq!(failed.name, "t=1");
        assert!(failed.witness.is_some());
    }

    #[test]
    fn conjugation_pauli() {
        let x = equidistant(4, 1);
        let p = MatrixCF::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]).unwrap();
        let q = MatrixCF::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]).unwrap();
        let rep = pauli_block_rep(&p, &q, &x, &x, 1e-9).unwrap();
        let f = filtration_from_metric(&x);
        let report = conjugation_invariance_check(&rep, &f, &f, 1e-9).unwrap();
        assert!(report.pass, "{report:?}");
        assert!(report.max_residual() < 1e-12);
    }

    #[test]
    fn filtration_json_round_trip() {
        let f = filtration_from_metric(&line3());
        let json = serde_json::to_string(&f).unwrap();
        assert!(json.starts_with(r#"{"n":3,"algebra":{"kind":"abelian-diagonal","labels":["#));
        assert!(json.contains(r#""breakpoints":["0","1","2"]"#));
        let back: QuantumMetricFiltration = serde_json::from_str(&json).unwrap();
        assert_eq!(back, f);

        let g = filtration_from_graph(&WeightedGraph::unweighted(2, &[(0, 1)]).unwrap()).unwrap();
        let back: QuantumMetricFiltration = serde_json::from_str(&serde_json::to_string(&g).unwrap()).unwrap();
        assert_eq!(back, g);
    }
}
