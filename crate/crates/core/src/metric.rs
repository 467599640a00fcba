//! Finite metric spaces, weighted graphs and classical isometries.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{GaussianRational, MatrixGQ, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[serde(tag = "violation")]
pub enum MetricError {
    #[error("distance matrix is {rows}x{cols} but there are {points} points")]
    Shape { points: usize, rows: usize, cols: usize },
    #[error("duplicate point label {label:?}")]
    DuplicateLabel { label: String },
    #[error("NonzeroDiagonal({i})")]
    NonzeroDiagonal { i: usize },
    #[error("NotSymmetric({i},{j})")]
    NotSymmetric { i: usize, j: usize },
    #[error("ZeroOffDiagonal({i},{j})")]
    ZeroOffDiagonal { i: usize, j: usize },
    #[error("NegativeDistance({i},{j})")]
    NegativeDistance { i: usize, j: usize },
    /// d(i,k) > d(i,via) + d(via,k).
    #[error("TriangleViolation({i},{k},{via}): {lhs} > {rhs}")]
    TriangleViolation { i: usize, k: usize, via: usize, lhs: Rational, rhs: Rational },
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[serde(tag = "violation")]
pub enum GraphError {
    #[error("duplicate point label {label:?}")]
    DuplicateLabel { label: String },
    #[error("edge references unknown point {label:?}")]
    UnknownPoint { label: String },
    #[error("edge index {index} out of range for {points} points")]
    IndexOutOfRange { index: usize, points: usize },
    #[error("loop at {i}")]
    Loop { i: usize },
    #[error("parallel edge {i}-{j}")]
    ParallelEdge { i: usize, j: usize },
    #[error("edge {i}-{j} has non-positive weight {weight}")]
    NonPositiveWeight { i: usize, j: usize, weight: Rational },
    #[error("graph is disconnected; unreachable pairs {pairs:?}")]
    Disconnected { pairs: Vec<(usize, usize)> },
}

fn check_labels(labels: &[String]) -> Result<(), String> {
    let mut seen = HashMap::new();
    for l in labels {
        if seen.insert(l.as_str(), ()).is_some() {
            return Err(l.clone());
        }
    }
    Ok(())
}

/// A validated finite metric space with exact rational distances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteMetricSpace {
    labels: Vec<String>,
    dist: Vec<Rational>,
}

impl FiniteMetricSpace {
    pub fn new(labels: Vec<String>, distances: Vec<Vec<Rational>>) -> Result<Self, MetricError> {
        validate_metric(labels, distances)
    }

    /// Points labelled "0", "1", … with integer distances.
    pub fn from_int_rows(rows: &[&[i64]]) -> Result<Self, MetricError> {
        let labels = (0..rows.len()).map(|i| i.to_string()).collect();
        let d = rows.iter().map(|r| r.iter().map(|&x| Rational::from(x)).collect()).collect();
        validate_metric(labels, d)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn distance(&self, i: usize, j: usize) -> &Rational {
        &self.dist[i * self.len() + j]
    }

    pub fn distance_rows(&self) -> Vec<Vec<Rational>> {
        let n = self.len();
        (0..n).map(|i| self.dist[i * n..(i + 1) * n].to_vec()).collect()
    }

    /// D as an exact matrix.
    pub fn distance_matrix(&self) -> MatrixGQ {
        let n = self.len();
        MatrixGQ::from_fn(n, n, |i, j| GaussianRational::real(self.distance(i, j).clone()))
    }

    /// Distinct nonzero distances in increasing order.
    pub fn distinct_distances(&self) -> Vec<Rational> {
        let mut v: Vec<Rational> = self.dist.iter().filter(|d| !d.is_zero()).cloned().collect();
        v.sort();
        v.dedup();
        v
    }

    /// The same space with its points reordered: point `i` of the result is
    /// point `order[i]` of `self`.
    pub fn relabel(&self, order: &[usize]) -> Self {
        let n = self.len();
        assert_eq!(order.len(), n, "permutation length");
        let labels = order.iter().map(|&i| self.labels[i].clone()).collect();
        let mut dist = Vec::with_capacity(n * n);
        for &i in order {
            for &j in order {
                dist.push(self.distance(i, j).clone());
            }
        }
        FiniteMetricSpace { labels, dist }
    }
}

/// Checks the metric axioms and returns the validated space or the first
/// violation found (diagonal, then symmetry, then positivity, then the
/// triangle inequality, each scanned in index order).
pub fn validate_metric(labels: Vec<String>, d: Vec<Vec<Rational>>) -> Result<FiniteMetricSpace, MetricError> {
    let n = labels.len();
    if d.len() != n || d.iter().any(|r| r.len() != n) {
        let cols = d.iter().map(Vec::len).find(|&c| c != n).unwrap_or(n);
        return Err(MetricError::Shape { points: n, rows: d.len(), cols });
    }
    if let Err(label) = check_labels(&labels) {
        return Err(MetricError::DuplicateLabel { label });
    }
    for i in 0..n {
        if !d[i][i].is_zero() {
            return Err(MetricError::NonzeroDiagonal { i });
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if d[i][j] != d[j][i] {
                return Err(MetricError::NotSymmetric { i, j });
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if d[i][j].is_zero() {
                return Err(MetricError::ZeroOffDiagonal { i, j });
            }
            if d[i][j].is_negative() {
                return Err(MetricError::NegativeDistance { i, j });
            }
        }
    }
    for i in 0..n {
        for k in i + 1..n {
            for via in 0..n {
                if via == i || via == k {
                    continue;
                }
                let rhs = &d[i][via] + &d[via][k];
                if d[i][k] > rhs {
                    return Err(MetricError::TriangleViolation { i, k, via, lhs: d[i][k].clone(), rhs });
                }
            }
        }
    }
    let dist = d.into_iter().flatten().collect();
    Ok(FiniteMetricSpace { labels, dist })
}

/// Undirected, loop-free weighted graph with positive rational weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedGraph {
    labels: Vec<String>,
    edges: Vec<(usize, usize, Rational)>,
}

impl WeightedGraph {
    /// Edges are normalized to `i < j`.
    pub fn new(labels: Vec<String>, edges: Vec<(usize, usize, Rational)>) -> Result<Self, GraphError> {
        if let Err(label) = check_labels(&labels) {
            return Err(GraphError::DuplicateLabel { label });
        }
        let n = labels.len();
        let mut seen = HashMap::new();
        let mut normalized = Vec::with_capacity(edges.len());
        for (a, b, w) in edges {
            for index in [a, b] {
                if index >= n {
                    return Err(GraphError::IndexOutOfRange { index, points: n });
                }
            }
            if a == b {
                return Err(GraphError::Loop { i: a });
            }
            let (i, j) = (a.min(b), a.max(b));
            if !w.is_positive() {
                return Err(GraphError::NonPositiveWeight { i, j, weight: w });
            }
            if seen.insert((i, j), ()).is_some() {
                return Err(GraphError::ParallelEdge { i, j });
            }
            normalized.push((i, j, w));
        }
        Ok(WeightedGraph { labels, edges: normalized })
    }

    /// Unit-weight graph from an edge list.
    pub fn unweighted(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let labels = (0..n).map(|i| i.to_string()).collect();
        Self::new(labels, edges.iter().map(|&(i, j)| (i, j, Rational::one())).collect())
    }

    /// Complete graph whose weights are the distances of `x`.
    pub fn complete_from_metric(x: &FiniteMetricSpace) -> Self {
        let n = x.len();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                edges.push((i, j, x.distance(i, j).clone()));
            }
        }
        WeightedGraph { labels: x.labels().to_vec(), edges }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn edges(&self) -> &[(usize, usize, Rational)] {
        &self.edges
    }
}

/// Shortest-path metric of a connected weighted graph (exact Floyd–Warshall).
pub fn min_complete_graph(g: &WeightedGraph) -> Result<FiniteMetricSpace, GraphError> {
    let n = g.len();
    let mut d: Vec<Vec<Option<Rational>>> = vec![vec![None; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = Some(Rational::zero());
    }
    for (i, j, w) in g.edges() {
        d[*i][*j] = Some(w.clone());
        d[*j][*i] = Some(w.clone());
    }
    for k in 0..n {
        for i in 0..n {
            let Some(dik) = d[i][k].clone() else { continue };
            for j in 0..n {
                let Some(dkj) = &d[k][j] else { continue };
                let via = &dik + dkj;
                if d[i][j].as_ref().is_none_or(|cur| via < *cur) {
                    d[i][j] = Some(via);
                }
            }
        }
    }
    let mut unreachable = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if d[i][j].is_none() {
                unreachable.push((i, j));
            }
        }
    }
    if !unreachable.is_empty() {
        return Err(GraphError::Disconnected { pairs: unreachable });
    }
    let rows = d.into_iter().map(|r| r.into_iter().map(|x| x.expect("connected")).collect()).collect();
    Ok(validate_metric(g.labels().to_vec(), rows).expect("shortest-path distances form a metric"))
}

/// A distance-preserving bijection X → Y; `perm[i]` is the image of point i.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Isometry {
    pub perm: Vec<usize>,
}

impl Isometry {
    pub fn identity(n: usize) -> Self {
        Isometry { perm: (0..n).collect() }
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.perm.len()];
        for (i, &p) in self.perm.iter().enumerate() {
            inv[p] = i;
        }
        Isometry { perm: inv }
    }

    /// `self ∘ other`: first apply `other`, then `self`.
    pub fn compose(&self, other: &Isometry) -> Self {
        Isometry { perm: other.perm.iter().map(|&i| self.perm[i]).collect() }
    }

    pub fn preserves(&self, x: &FiniteMetricSpace, y: &FiniteMetricSpace) -> bool {
        let n = x.len();
        n == y.len()
            && self.perm.len() == n
            && (0..n).all(|i| (0..n).all(|j| x.distance(i, j) == y.distance(self.perm[i], self.perm[j])))
    }
}

/// All isometries X → Y in lexicographic order of `perm`.
///
/// Backtracking over points of X in index order, trying images in index
/// order and pruning as soon as a distance to an already-placed point
/// disagrees.
pub fn enumerate_isometries(x: &FiniteMetricSpace, y: &FiniteMetricSpace) -> Vec<Isometry> {
    let n = x.len();
    let mut out = Vec::new();
    if n != y.len() {
        return out;
    }
    let mut perm = Vec::with_capacity(n);
    let mut used = vec![false; n];
    extend(x, y, &mut perm, &mut used, &mut out, false);
    out
}

/// The lexicographically first isometry, if any.
pub fn first_isometry(x: &FiniteMetricSpace, y: &FiniteMetricSpace) -> Option<Isometry> {
    let n = x.len();
    if n != y.len() {
        return None;
    }
    let mut out = Vec::new();
    extend(x, y, &mut Vec::with_capacity(n), &mut vec![false; n], &mut out, true);
    out.pop()
}

fn extend(
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
    perm: &mut Vec<usize>,
    used: &mut [bool],
    out: &mut Vec<Isometry>,
    first_only: bool,
) -> bool {
    let i = perm.len();
    if i == x.len() {
        out.push(Isometry { perm: perm.clone() });
        return first_only;
    }
    for cand in 0..y.len() {
        if used[cand] {
            continue;
        }
        if (0..i).any(|j| x.distance(i, j) != y.distance(cand, perm[j])) {
            continue;
        }
        used[cand] = true;
        perm.push(cand);
        let stop = extend(x, y, perm, used, out, first_only);
        perm.pop();
        used[cand] = false;
        if stop {
            return true;
        }
    }
    false
}

/// Isometry invariants: cheap certificates of non-isometry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MetricInvariants {
    /// Distances d(i,j), i < j, sorted.
    pub distance_multiset: Vec<Rational>,
    /// det(λI − D), highest degree first.
    pub char_poly: Vec<Rational>,
}

pub fn metric_invariants(x: &FiniteMetricSpace) -> MetricInvariants {
    let n = x.len();
    let mut distance_multiset = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            distance_multiset.push(x.distance(i, j).clone());
        }
    }
    distance_multiset.sort();
    let char_poly = x.distance_matrix().char_poly().into_iter().map(|c| c.re).collect();
    MetricInvariants { distance_multiset, char_poly }
}

/// Formats coefficients (highest degree first) as a polynomial in λ.
pub fn format_poly(coeffs: &[Rational]) -> String {
    let deg = coeffs.len().saturating_sub(1);
    let mut out = String::new();
    for (k, c) in coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let power = deg - k;
        let negative = c.is_negative();
        let mag = c.abs();
        if out.is_empty() {
            if negative {
                out.push('-');
            }
        } else {
            out.push_str(if negative { " - " } else { " + " });
        }
        let show_coeff = !mag.is_one() || power == 0;
        if show_coeff {
            out.push_str(&mag.to_string());
        }
        match power {
            0 => {}
            1 => out.push('λ'),
            p => out.push_str(&format!("λ^{p}")),
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

/// Metric file: `{"points": [...], "distances": [["0","1"], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricJson {
    pub points: Vec<String>,
    pub distances: Vec<Vec<Rational>>,
}

impl From<&FiniteMetricSpace> for MetricJson {
    fn from(x: &FiniteMetricSpace) -> Self {
        MetricJson { points: x.labels().to_vec(), distances: x.distance_rows() }
    }
}

impl TryFrom<MetricJson> for FiniteMetricSpace {
    type Error = MetricError;
    fn try_from(m: MetricJson) -> Result<Self, MetricError> {
        validate_metric(m.points, m.distances)
    }
}

/// Graph file: `{"points": [...], "edges": [["a","b","3/2"], ...]}`; the
/// weight may be omitted for unit weight.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphJson {
    pub points: Vec<String>,
    pub edges: Vec<Vec<String>>,
}

impl TryFrom<GraphJson> for WeightedGraph {
    type Error = GraphError;
    fn try_from(g: GraphJson) -> Result<Self, GraphError> {
        let index: HashMap<&str, usize> = g.points.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
        let lookup = |l: &str| index.get(l).copied().ok_or_else(|| GraphError::UnknownPoint { label: l.to_string() });
        let mut edges = Vec::with_capacity(g.edges.len());
        for e in &g.edges {
            let (a, b, w) = match e.as_slice() {
                [a, b] => (a, b, Rational::one()),
                [a, b, w] => (
                    a,
                    b,
                    w.parse::<Rational>().map_err(|_| GraphError::UnknownPoint { label: format!("weight {w:?}") })?,
                ),
                _ => return Err(GraphError::UnknownPoint { label: format!("malformed edge {e:?}") }),
            };
            edges.push((lookup(a)?, lookup(b)?, w));
        }
        WeightedGraph::new(g.points.clone(), edges)
    }
}

impl From<&WeightedGraph> for GraphJson {
    fn from(g: &WeightedGraph) -> Self {
        GraphJson {
            points: g.labels().to_vec(),
            edges: g
                .edges()
                .iter()
                .map(|(i, j, w)| vec![g.labels()[*i].clone(), g.labels()[*j].clone(), w.to_string()])
                .collect(),
        }
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    fn q(rows: &[&[i64]]) -> Vec<Vec<Rational>> {
        rows.iter().map(|r| r.iter().map(|&x| Rational::from(x)).collect()).collect()
    }

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| i.to_string()).collect()
    }

    #[test]
    fn validate_examples() {
        assert!(validate_metric(labels(3), q(&[&[0, 1, 2], &[1, 0, 1], &[2, 1, 0]])).is_ok());
        let err = validate_metric(labels(3), q(&[&[0, 1, 3], &[1, 0, 1], &[3, 1, 0]])).unwrap_err();
        assert!(matches!(err, MetricError::TriangleViolation { i: 0, k: 2, via: 1, .. }));
        assert_eq!(err.to_string(), "TriangleViolation(0,2,1): 3 > 2");
        let err = validate_metric(labels(2), q(&[&[0, 1], &[2, 0]])).unwrap_err();
        assert_eq!(err, MetricError::NotSymmetric { i: 0, j: 1 });
    }

    #[test]
    fn validate_other_violations() {
        assert_eq!(
            validate_metric(labels(2), q(&[&[1, 1], &[1, 0]])).unwrap_err(),
            MetricError::NonzeroDiagonal { i: 0 }
        );
        assert_eq!(
            validate_metric(labels(2), q(&[&[0, 0], &[0, 0]])).unwrap_err(),
            MetricError::ZeroOffDiagonal { i: 0, j: 1 }
        );
        assert_eq!(
            validate_metric(labels(2), q(&[&[0, -1], &[-1, 0]])).unwrap_err(),
            MetricError::NegativeDistance { i: 0, j: 1 }
        );
        assert!(matches!(
            validate_metric(vec!["a".into(), "a".into()], q(&[&[0, 1], &[1, 0]])),
            Err(MetricError::DuplicateLabel { .. })
        ));
        assert!(matches!(validate_metric(labels(2), q(&[&[0, 1]])), Err(MetricError::Shape { .. })));
    }

    /// Floyd–Warshall by hand on three vertices.
    #[test]
    fn mcg_three_vertices() {
        let g = WeightedGraph::new(
            vec!["x".into(), "y".into(), "z".into()],
            vec![(0, 1, Rational::from(1)), (1, 2, Rational::from(2)), (0, 2, Rational::from(10))],
        )
        .unwrap();
        let m = min_complete_graph(&g).unwrap();
        assert_eq!(m.distance_rows(), q(&[&[0, 1, 3], &[1, 0, 2], &[3, 2, 0]]));
    }

    #[test]
    fn mcg_idempotent_on_metric_input() {
        let x = line3();
        let g = WeightedGraph::complete_from_metric(&x);
        assert_eq!(min_complete_graph(&g).unwrap(), x);
    }

    #[test]
    fn mcg_disconnected() {
        let g = WeightedGraph::unweighted(2, &[]).unwrap();
        assert_eq!(min_complete_graph(&g).unwrap_err(), GraphError::Disconnected { pairs: vec![(0, 1)] });
    }

    #[test]
    fn graph_construction_errors() {
        assert!(matches!(WeightedGraph::unweighted(2, &[(0, 0)]), Err(GraphError::Loop { i: 0 })));
        assert!(matches!(WeightedGraph::unweighted(2, &[(0, 1), (1, 0)]), Err(GraphError::ParallelEdge { .. })));
        assert!(matches!(WeightedGraph::unweighted(2, &[(0, 2)]), Err(GraphError::IndexOutOfRange { .. })));
        let bad = WeightedGraph::new(labels(2), vec![(0, 1, Rational::zero())]);
        assert!(matches!(bad, Err(GraphError::NonPositiveWeight { .. })));
    }

    #[test]
    fn isometry_examples() {
        let isos = enumerate_isometries(&line3(), &line3());
        assert_eq!(isos, vec![Isometry { perm: vec![0, 1, 2] }, Isometry { perm: vec![2, 1, 0] }]);
        assert!(enumerate_isometries(&line3(), &triangle()).is_empty());
        assert_eq!(enumerate_isometries(&point(), &point()), vec![Isometry::identity(1)]);
        assert!(enumerate_isometries(&point(), &line3()).is_empty());
        assert_eq!(first_isometry(&line3(), &line3()), Some(Isometry::identity(3)));
    }

    #[test]
    fn invariants_examples() {
        let tri = metric_invariants(&triangle());
        assert_eq!(tri.char_poly, [1, 0, -3, -2].map(Rational::from).to_vec());
        assert_eq!(metric_invariants(&point()).char_poly, [1, 0].map(Rational::from).to_vec());
        let line = metric_invariants(&line3());
        assert_eq!(line.distance_multiset, [1, 1, 2].map(Rational::from).to_vec());
        assert_eq!(line.char_poly, [1, 0, -6, -4].map(Rational::from).to_vec());
    }

    #[test]
    fn poly_formatting() {
        assert_eq!(format_poly(&metric_invariants(&line3()).char_poly), "λ^3 - 6λ - 4");
        assert_eq!(format_poly(&[Rational::one(), Rational::zero()]), "λ");
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"points":["a","b","c"],"distances":[["0","1","2"],["1","0","1"],["2","1","0"]]}"#;
        let parsed: MetricJson = serde_json::from_str(text).unwrap();
        let x = FiniteMetricSpace::try_from(parsed).unwrap();
        assert_eq!(x.distance(0, 2), &Rational::from(2));
        assert_eq!(serde_json::to_string(&MetricJson::from(&x)).unwrap(), text);

        let g: GraphJson = serde_json::from_str(r#"{"points":["a","b"],"edges":[["a","b","3/2"]]}"#).unwrap();
        let g = WeightedGraph::try_from(g).unwrap();
        assert_eq!(g.edges(), &[(0, 1, Rational::new(3, 2))]);
    }
}
