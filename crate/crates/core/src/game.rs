//! Synchronous nonlocal games, the metric isometry game, strategies and
//! seeded round simulation.
//!
//! Inputs and outputs of the isometry game range over I = X ⊔ Y, indexed
//! with X first: point `i < |X|` is x_i and point `|X| + j` is y_j.
//! Correlation tensors are indexed `[v][w][a][b]` row-major.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::algebra::{is_magic_unitary, GameAlgebraRep, RepBlocks};
use crate::linalg::{GaussianRational, MatrixCF, MatrixGQ, Rational};
use crate::metric::{first_isometry, FiniteMetricSpace, Isometry};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("correlation tensor has {found} entries, expected {expected}")]
    Shape { expected: usize, found: usize },
    #[error("negative probability at {tuple:?}")]
    Negative { tuple: [usize; 4] },
    #[error("probabilities for inputs ({v},{w}) sum to {sum}, not 1")]
    Normalization { v: usize, w: usize, sum: String },
    #[error("non-finite probability at {tuple:?}")]
    NonFinite { tuple: [usize; 4] },
    #[error("NotAStrategy: {0}")]
    NotAStrategy(String),
    #[error("strategy has {found} outputs, expected {expected}")]
    StrategyLength { expected: usize, found: usize },
    #[error("output {output} out of range for {size} points")]
    OutputOutOfRange { output: usize, size: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GamePoint {
    pub side: Side,
    pub index: usize,
}

/// A game with shared input and output set {0, …, N−1} and rule λ.
pub trait Game {
    fn size(&self) -> usize;
    fn wins(&self, v: usize, w: usize, a: usize, b: usize) -> bool;
}

/// The isometry game Isom(X, Y).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynchronousGame {
    x: FiniteMetricSpace,
    y: FiniteMetricSpace,
}

pub fn isom_rule(x: &FiniteMetricSpace, y: &FiniteMetricSpace) -> SynchronousGame {
    SynchronousGame { x: x.clone(), y: y.clone() }
}

impl SynchronousGame {
    pub fn x(&self) -> &FiniteMetricSpace {
        &self.x
    }

    pub fn y(&self) -> &FiniteMetricSpace {
        &self.y
    }

    pub fn point(&self, i: usize) -> GamePoint {
        let nx = self.x.len();
        if i < nx {
            GamePoint { side: Side::X, index: i }
        } else {
            GamePoint { side: Side::Y, index: i - nx }
        }
    }

    pub fn index_of(&self, p: GamePoint) -> usize {
        match p.side {
            Side::X => p.index,
            Side::Y => self.x.len() + p.index,
        }
    }

    /// Label with a side prefix, e.g. `x:a` or `y:0`.
    pub fn label(&self, i: usize) -> String {
        let p = self.point(i);
        match p.side {
            Side::X => format!("x:{}", self.x.labels()[p.index]),
            Side::Y => format!("y:{}", self.y.labels()[p.index]),
        }
    }

    fn distance(&self, p: GamePoint, q: GamePoint) -> &Rational {
        match p.side {
            Side::X => self.x.distance(p.index, q.index),
            Side::Y => self.y.distance(p.index, q.index),
        }
    }
}

impl Game for SynchronousGame {
    fn size(&self) -> usize {
        self.x.len() + self.y.len()
    }

    fn wins(&self, v: usize, w: usize, a: usize, b: usize) -> bool {
        let (v, w, a, b) = (self.point(v), self.point(w), self.point(a), self.point(b));
        if v.side == a.side || w.side == b.side {
            return false;
        }
        if v.side == w.side {
            // a and b then lie together on the other side.
            self.distance(v, w) == self.distance(a, b)
        } else {
            (v == b) == (w == a)
        }
    }
}

/// A game given by an explicit table, mainly for constructed examples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableGame {
    n: usize,
    table: Vec<bool>,
}

impl TableGame {
    pub fn from_fn(n: usize, mut rule: impl FnMut(usize, usize, usize, usize) -> bool) -> Self {
        let mut table = Vec::with_capacity(n.pow(4));
        for v in 0..n {
            for w in 0..n {
                for a in 0..n {
                    for b in 0..n {
                        table.push(rule(v, w, a, b));
                    }
                }
            }
        }
        TableGame { n, table }
    }

    pub fn from_game(game: &impl Game) -> Self {
        TableGame::from_fn(game.size(), |v, w, a, b| game.wins(v, w, a, b))
    }
}

impl Game for TableGame {
    fn size(&self) -> usize {
        self.n
    }

    fn wins(&self, v: usize, w: usize, a: usize, b: usize) -> bool {
        let n = self.n;
        self.table[((v * n + w) * n + a) * n + b]
    }
}

/// Exhaustive 0/1 export of λ, row-major in (v, w, a, b).
pub fn rule_table(game: &impl Game) -> Vec<u8> {
    let n = game.size();
    let mut out = Vec::with_capacity(n.pow(4));
    for v in 0..n {
        for w in 0..n {
            for a in 0..n {
                for b in 0..n {
                    out.push(u8::from(game.wins(v, w, a, b)));
                }
            }
        }
    }
    out
}

/// First tuple (v, v, a, b) with a ≠ b that wins, if any.
pub fn synchronous_violation(game: &impl Game) -> Option<[usize; 4]> {
    let n = game.size();
    for v in 0..n {
        for a in 0..n {
            for b in 0..n {
                if a != b && game.wins(v, v, a, b) {
                    return Some([v, v, a, b]);
                }
            }
        }
    }
    None
}

/// Equal inputs never win with different outputs.
pub fn is_synchronous(game: &impl Game) -> bool {
    synchronous_violation(game).is_none()
}

/// First violation of bisynchronicity: a synchronous violation, or a
/// winning tuple (v, w, a, a) with v ≠ w.
pub fn bisynchronous_violation(game: &impl Game) -> Option<[usize; 4]> {
    if let Some(t) = synchronous_violation(game) {
        return Some(t);
    }
    let n = game.size();
    for v in 0..n {
        for w in 0..n {
            for a in 0..n {
                if v != w && game.wins(v, w, a, a) {
                    return Some([v, w, a, a]);
                }
            }
        }
    }
    None
}

pub fn is_bisynchronous(game: &impl Game) -> bool {
    bisynchronous_violation(game).is_none()
}

/// Both players answer `f[v]` on input v.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeterministicStrategy {
    pub f: Vec<usize>,
}

impl DeterministicStrategy {
    /// f = g ⊔ g⁻¹ on X ⊔ Y.
    pub fn from_isometry(g: &Isometry) -> Self {
        let n = g.perm.len();
        let inv = g.inverse();
        let f = g.perm.iter().map(|&y| n + y).chain(inv.perm.iter().copied()).collect();
        DeterministicStrategy { f }
    }

    fn validate(&self, size: usize) -> Result<(), GameError> {
        if self.f.len() != size {
            return Err(GameError::StrategyLength { expected: size, found: self.f.len() });
        }
        match self.f.iter().find(|&&o| o >= size) {
            Some(&output) => Err(GameError::OutputOutOfRange { output, size }),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PerfectCheck {
    pub perfect: bool,
    /// First input pair (v, w) in row-major order that loses.
    pub counterexample: Option<(usize, usize)>,
}

pub fn is_perfect_deterministic(s: &DeterministicStrategy, game: &impl Game) -> Result<PerfectCheck, GameError> {
    let n = game.size();
    s.validate(n)?;
    for v in 0..n {
        for w in 0..n {
            if !game.wins(v, w, s.f[v], s.f[w]) {
                return Ok(PerfectCheck { perfect: false, counterexample: Some((v, w)) });
            }
        }
    }
    Ok(PerfectCheck { perfect: true, counterexample: None })
}

/// The strategy g ⊔ g⁻¹ for the lexicographically first isometry g.
pub fn find_perfect_deterministic(game: &SynchronousGame) -> Option<DeterministicStrategy> {
    first_isometry(game.x(), game.y()).map(|g| DeterministicStrategy::from_isometry(&g))
}

#[derive(Debug, Clone, PartialEq)]
pub enum CorrelationData {
    Exact(Vec<Rational>),
    Float(Vec<f64>),
}

/// Conditional probabilities p(a, b | v, w).
#[derive(Debug, Clone, PartialEq)]
pub struct Correlation {
    n: usize,
    data: CorrelationData,
}

/// Normalization tolerance in float mode.
pub const CORRELATION_TOL: f64 = 1e-9;

impl Correlation {
    pub fn exact(n: usize, p: Vec<Rational>) -> Result<Self, GameError> {
        check_len(n, p.len())?;
        for (k, value) in p.iter().enumerate() {
            if value.is_negative() {
                return Err(GameError::Negative { tuple: unflatten(n, k) });
            }
        }
        for (k, chunk) in p.chunks(n * n.max(1)).enumerate() {
            let sum: Rational = chunk.iter().cloned().sum();
            if !sum.is_one() {
                return Err(GameError::Normalization { v: k / n, w: k % n, sum: sum.to_string() });
            }
        }
        Ok(Correlation { n, data: CorrelationData::Exact(p) })
    }

    pub fn float(n: usize, p: Vec<f64>) -> Result<Self, GameError> {
        check_len(n, p.len())?;
        for (k, &value) in p.iter().enumerate() {
            if !value.is_finite() {
                return Err(GameError::NonFinite { tuple: unflatten(n, k) });
            }
            if value < 0.0 {
                return Err(GameError::Negative { tuple: unflatten(n, k) });
            }
        }
        for (k, chunk) in p.chunks(n * n.max(1)).enumerate() {
            let sum: f64 = chunk.iter().sum();
            if (sum - 1.0).abs() > CORRELATION_TOL {
                return Err(GameError::Normalization { v: k / n, w: k % n, sum: sum.to_string() });
            }
        }
        Ok(Correlation { n, data: CorrelationData::Float(p) })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &CorrelationData {
        &self.data
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.data, CorrelationData::Exact(_))
    }

    fn offset(&self, v: usize, w: usize, a: usize, b: usize) -> usize {
        let n = self.n;
        ((v * n + w) * n + a) * n + b
    }

    pub fn get_f64(&self, v: usize, w: usize, a: usize, b: usize) -> f64 {
        let k = self.offset(v, w, a, b);
        match &self.data {
            CorrelationData::Exact(p) => p[k].to_f64(),
            CorrelationData::Float(p) => p[k],
        }
    }

    pub fn get_exact(&self, v: usize, w: usize, a: usize, b: usize) -> Option<&Rational> {
        match &self.data {
            CorrelationData::Exact(p) => Some(&p[self.offset(v, w, a, b)]),
            CorrelationData::Float(_) => None,
        }
    }
}

fn check_len(n: usize, found: usize) -> Result<(), GameError> {
    let expected = n.pow(4);
    if found != expected {
        return Err(GameError::Shape { expected, found });
    }
    Ok(())
}

fn unflatten(n: usize, k: usize) -> [usize; 4] {
    [k / (n * n * n), (k / (n * n)) % n, (k / n) % n, k % n]
}

#[derive(Serialize, Deserialize)]
struct CorrelationJson<P> {
    mode: String,
    #[serde(rename = "N")]
    n: usize,
    p: Vec<P>,
}

impl Serialize for Correlation {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match &self.data {
            CorrelationData::Exact(p) => {
                CorrelationJson { mode: "exact".into(), n: self.n, p: p.clone() }.serialize(serializer)
            }
            CorrelationData::Float(p) => {
                CorrelationJson { mode: "float".into(), n: self.n, p: p.clone() }.serialize(serializer)
            }
        }
    }
}

impl<'de> Deserialize<'de> for Correlation {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let value = serde_json::Value::deserialize(deserializer)?;
        match value.get("mode").and_then(|m| m.as_str()) {
            Some("exact") => {
                let raw: CorrelationJson<Rational> = serde_json::from_value(value).map_err(D::Error::custom)?;
                Correlation::exact(raw.n, raw.p).map_err(D::Error::custom)
            }
            Some("float") | None => {
                let raw: CorrelationJson<f64> = serde_json::from_value(value).map_err(D::Error::custom)?;
                Correlation::float(raw.n, raw.p).map_err(D::Error::custom)
            }
            Some(other) => Err(D::Error::custom(format!("unknown mode {other:?}"))),
        }
    }
}

/// p(a, b | v, w) = [a = f(v)]·[b = f(w)], exact.
pub fn correlation_from_deterministic(s: &DeterministicStrategy) -> Result<Correlation, GameError> {
    let n = s.f.len();
    s.validate(n)?;
    let mut p = vec![Rational::zero(); n.pow(4)];
    for v in 0..n {
        for w in 0..n {
            p[((v * n + w) * n + s.f[v]) * n + s.f[w]] = Rational::one();
        }
    }
    Correlation::exact(n, p)
}

/// p(a, b | v, w) = (1/d)·Re Tr(E_{v,a} E_{w,b}) over I = X ⊔ Y, where
/// E_{x,y} = E_{y,x} is the block of the representation and within-side
/// generators are zero.
///
/// Exact representations give exact correlations; floating ones are
/// clamped to [0, 1].
pub fn correlation_from_projections(rep: &GameAlgebraRep, tol: f64) -> Result<Correlation, GameError> {
    let report = is_magic_unitary(rep, tol);
    if !report.pass {
        let names: Vec<&str> = report.failed().map(|c| c.name.as_str()).collect();
        return Err(GameError::NotAStrategy(format!("not a magic unitary ({})", names.join(", "))));
    }
    let (nx, d) = (rep.nx(), rep.d());
    let n = nx + rep.ny();
    // Map a game pair (v, a) to its block, if the pair is across sides.
    let block = |v: usize, a: usize| -> Option<(usize, usize)> {
        match (v < nx, a < nx) {
            (true, false) => Some((v, a - nx)),
            (false, true) => Some((a, v - nx)),
            _ => None,
        }
    };
    match rep.blocks() {
        RepBlocks::Exact(b) => {
            let inv_d = Rational::new(1, d as i64);
            let mut p = vec![Rational::zero(); n.pow(4)];
            for v in 0..n {
                for a in 0..n {
                    let Some((i, j)) = block(v, a) else { continue };
                    for w in 0..n {
                        for bb in 0..n {
                            let Some((k, l)) = block(w, bb) else { continue };
                            let t = trace_product_gq(&b[i][j], &b[k][l]);
                            p[((v * n + w) * n + a) * n + bb] = t.re * inv_d.clone();
                        }
                    }
                }
            }
            Correlation::exact(n, p)
        }
        RepBlocks::Float(b) => {
            let mut p = vec![0.0; n.pow(4)];
            for v in 0..n {
                for a in 0..n {
                    let Some((i, j)) = block(v, a) else { continue };
                    for w in 0..n {
                        for bb in 0..n {
                            let Some((k, l)) = block(w, bb) else { continue };
                            let t = trace_product_cf(&b[i][j], &b[k][l]).re / d as f64;
                            p[((v * n + w) * n + a) * n + bb] = t.clamp(0.0, 1.0);
                        }
                    }
                }
            }
            Correlation::float(n, p)
        }
    }
}

fn trace_product_gq(a: &MatrixGQ, b: &MatrixGQ) -> GaussianRational {
    let d = a.rows();
    let mut t = GaussianRational::zero();
    for i in 0..d {
        for k in 0..d {
            let (x, y) = (a.get(i, k), b.get(k, i));
            if !x.is_zero() && !y.is_zero() {
                t += &(x.clone() * y.clone());
            }
        }
    }
    t
}

fn trace_product_cf(a: &MatrixCF, b: &MatrixCF) -> num_complex::Complex64 {
    let d = a.rows();
    (0..d).flat_map(|i| (0..d).map(move |k| (i, k))).map(|(i, k)| a.get(i, k) * b.get(k, i)).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationCheck {
    pub perfect: bool,
    /// Losing tuple (v, w, a, b) of largest probability, first in row-major
    /// order among ties; absent when every losing tuple has probability 0.
    pub worst: Option<[usize; 4]>,
    pub worst_probability: f64,
}

/// Perfect iff every losing tuple has probability ≤ tol (exactly 0 for
/// exact correlations).
pub fn is_perfect_correlation(p: &Correlation, game: &impl Game, tol: f64) -> CorrelationCheck {
    let n = game.size();
    let mut worst: Option<([usize; 4], f64)> = None;
    let mut perfect = n == p.size();
    if perfect {
        for v in 0..n {
            for w in 0..n {
                for a in 0..n {
                    for b in 0..n {
                        if game.wins(v, w, a, b) {
                            continue;
                        }
                        let (bad, value) = match p.get_exact(v, w, a, b) {
                            Some(q) => (!q.is_zero(), q.to_f64()),
                            None => {
                                let q = p.get_f64(v, w, a, b);
                                (q > tol, q)
                            }
                        };
                        perfect &= !bad;
                        if value > 0.0 && worst.is_none_or(|(_, m)| value > m) {
                            worst = Some(([v, w, a, b], value));
                        }
                    }
                }
            }
        }
    }
    CorrelationCheck {
        perfect,
        worst: worst.map(|(t, _)| t),
        worst_probability: worst.map_or(0.0, |(_, m)| m),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputDist {
    /// (v, w) uniform over I², drawn as `below(N²)`.
    #[default]
    Uniform,
    /// Round r plays input pair r mod N² in row-major order.
    ExhaustiveCycle,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Round {
    pub v: usize,
    pub w: usize,
    pub a: usize,
    pub b: usize,
    pub won: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundTranscript {
    pub seed: u64,
    pub input_dist: InputDist,
    pub total: usize,
    pub wins: usize,
    pub win_rate: f64,
    #[serde(skip)]
    pub rounds: Vec<Round>,
}

impl RoundTranscript {
    /// One JSON object per round, newline-terminated.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.rounds {
            out.push_str(&serde_json::to_string(r).expect("plain struct"));
            out.push('\n');
        }
        out
    }
}

/// Plays `rounds` rounds with the SplitMix64 stream for `seed`.
///
/// Each round draws the input pair (uniform mode only), then one
/// `next_f64` value u, and answers with the first (a, b) in row-major order
/// whose cumulative probability exceeds u. Exact correlations compare
/// exactly against the dyadic value of u.
pub fn simulate_rounds(
    p: &Correlation,
    game: &impl Game,
    rounds: usize,
    seed: u64,
    input_dist: InputDist,
) -> Result<RoundTranscript, GameError> {
    let n = game.size();
    if p.size() != n {
        return Err(GameError::Shape { expected: n.pow(4), found: p.size().pow(4) });
    }
    let mut rng = SplitMix64::new(seed);
    let mut log = Vec::with_capacity(rounds);
    let mut wins = 0;
    for r in 0..rounds {
        let pair = match input_dist {
            InputDist::Uniform => rng.below(n * n),
            InputDist::ExhaustiveCycle => r % (n * n),
        };
        let (v, w) = (pair / n, pair % n);
        let u = rng.next_f64();
        let (a, b) = sample_outputs(p, v, w, u);
        let won = game.wins(v, w, a, b);
        wins += usize::from(won);
        log.push(Round { v, w, a, b, won });
    }
    let win_rate = if rounds == 0 { 1.0 } else { wins as f64 / rounds as f64 };
    Ok(RoundTranscript { seed, input_dist, total: rounds, wins, win_rate, rounds: log })
}

fn sample_outputs(p: &Correlation, v: usize, w: usize, u: f64) -> (usize, usize) {
    let n = p.size();
    let mut last = (0, 0);
    match p.data() {
        CorrelationData::Exact(_) => {
            let u = Rational::from_f64(u).expect("finite draw");
            let mut cum = Rational::zero();
            for a in 0..n {
                for b in 0..n {
                    let q = p.get_exact(v, w, a, b).expect("exact");
                    if q.is_zero() {
                        continue;
                    }
                    cum += q.clone();
                    last = (a, b);
                    if u < cum {
                        return (a, b);
                    }
                }
            }
        }
        CorrelationData::Float(_) => {
            let mut cum = 0.0;
            for a in 0..n {
                for b in 0..n {
                    let q = p.get_f64(v, w, a, b);
                    if q <= 0.0 {
                        continue;
                    }
                    cum += q;
                    last = (a, b);
                    if u < cum {
                        return (a, b);
                    }
                }
            }
        }
    }
    last
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{pauli_block_rep, rep_from_isometry};
    use crate::metric::enumerate_isometries;
    use crate::metric::fixtures::*;

    /// Independent transcription of the four winning conditions over
    /// tagged points.
    fn oracle(x: &FiniteMetricSpace, y: &FiniteMetricSpace, v: usize, w: usize, a: usize, b: usize) -> bool {
        let nx = x.len();
        let side = |i: usize| i >= nx;
        let local = |i: usize| if i >= nx { i - nx } else { i };
        let d = |i: usize, j: usize| {
            if side(i) {
                y.distance(local(i), local(j)).clone()
            } else {
                x.distance(local(i), local(j)).clone()
            }
        };
        let c1 = side(v) != side(a);
        let c2 = side(w) != side(b);
        if !(c1 && c2) {
            return false;
        }
        if side(v) == side(w) {
            d(v, w) == d(a, b)
        } else {
            (v == b) == (w == a)
        }
    }

    #[test]
    fn rule_matches_oracle() {
        for (x, y) in [(line3(), line3()), (line3(), triangle()), (point(), line3())] {
            let g = isom_rule(&x, &y);
            let n = g.size();
            for v in 0..n {
                for w in 0..n {
                    for a in 0..n {
                        for b in 0..n {
                            assert_eq!(g.wins(v, w, a, b), oracle(&x, &y, v, w, a, b));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn rule_examples() {
        let g = isom_rule(&line3(), &line3());
        let n = g.size();
        // same-side answer loses
        for w in 0..n {
            for b in 0..n {
                assert!(!g.wins(0, w, 1, b));
            }
        }
        // v = w, a ≠ b at positive distance
        assert!(!g.wins(0, 0, 3, 4));
        // v = x1, w = y1, a = y1, b = x1
        assert!(g.wins(0, 3, 3, 0));
    }

    #[test]
    fn synchronicity() {
        assert!(is_synchronous(&isom_rule(&line3(), &line3())));
        assert!(is_synchronous(&isom_rule(&point(), &point())));
        // A rule rewarding different answers on equal inputs.
        let toy = TableGame::from_fn(2, |v, w, a, b| v != w || a != b);
        assert!(!is_synchronous(&toy));
        assert_eq!(synchronous_violation(&toy), Some([0, 0, 0, 1]));
    }

    #[test]
    fn bisynchronicity() {
        for (x, y) in [(line3(), line3()), (line3(), triangle()), (point(), triangle())] {
            assert!(is_bisynchronous(&isom_rule(&x, &y)));
        }
        // Synchronous, but equal answers win on different inputs.
        let toy = TableGame::from_fn(2, |v, w, a, b| v != w || a == b);
        assert!(is_synchronous(&toy));
        assert!(!is_bisynchronous(&toy));
        assert_eq!(bisynchronous_violation(&toy), Some([0, 1, 0, 0]));
    }

    #[test]
    fn rule_table_export() {
        let g = isom_rule(&point(), &point());
        let t = rule_table(&g);
        assert_eq!(t.len(), 16);
        // Winning tuples: (x,x,y,y), (y,y,x,x), (x,y,y,x), (y,x,x,y).
        let winners: Vec<usize> = t.iter().enumerate().filter(|(_, &b)| b == 1).map(|(k, _)| k).collect();
        assert_eq!(winners, vec![0b0011, 0b0110, 0b1001, 0b1100]);
        assert_eq!(TableGame::from_game(&g).wins(0, 1, 1, 0), g.wins(0, 1, 1, 0));
    }

    #[test]
    fn deterministic_strategies() {
        let g = isom_rule(&line3(), &line3());
        let id = DeterministicStrategy::from_isometry(&Isometry::identity(3));
        assert_eq!(id.f, vec![3, 4, 5, 0, 1, 2]);
        assert!(is_perfect_deterministic(&id, &g).unwrap().perfect);

        let mut within = id.clone();
        within.f[0] = 1;
        let check = is_perfect_deterministic(&within, &g).unwrap();
        assert_eq!(check.counterexample, Some((0, 0)));

        // Two-point spaces, f|_X = swap, f|_Y = identity: not inverse to each other.
        let two = equidistant(2, 1);
        let g2 = isom_rule(&two, &two);
        let bad = DeterministicStrategy { f: vec![3, 2, 0, 1] };
        let check = is_perfect_deterministic(&bad, &g2).unwrap();
        assert!(!check.perfect);
        let (v, w) = check.counterexample.unwrap();
        assert!((v < 2) != (w < 2), "condition 4 involves inputs on both sides");
    }

    #[test]
    fn find_strategy() {
        let s = find_perfect_deterministic(&isom_rule(&line3(), &line3())).unwrap();
        assert_eq!(s, DeterministicStrategy::from_isometry(&Isometry::identity(3)));
        assert!(find_perfect_deterministic(&isom_rule(&line3(), &triangle())).is_none());
        let s = find_perfect_deterministic(&isom_rule(&point(), &point())).unwrap();
        assert_eq!(s.f, vec![1, 0]);
    }

    #[test]
    fn deterministic_correlation() {
        let g = isom_rule(&line3(), &line3());
        for iso in enumerate_isometries(&line3(), &line3()) {
            let s = DeterministicStrategy::from_isometry(&iso);
            let p = correlation_from_deterministic(&s).unwrap();
            let n = 6;
            for v in 0..n {
                for w in 0..n {
                    assert!(p.get_exact(v, w, s.f[v], s.f[w]).unwrap().is_one());
                }
            }
            assert!(is_perfect_correlation(&p, &g, 0.0).perfect);
        }
        // Perfect iff deterministic check says so.
        let bad = DeterministicStrategy { f: vec![4, 3, 5, 0, 1, 2] };
        let p = correlation_from_deterministic(&bad).unwrap();
        let check = is_perfect_correlation(&p, &g, 0.0);
        assert_eq!(check.perfect, is_perfect_deterministic(&bad, &g).unwrap().perfect);
        assert!(!check.perfect);
        assert_eq!(check.worst_probability, 1.0);
    }

    #[test]
    fn projections_match_deterministic() {
        for iso in enumerate_isometries(&line3(), &line3()) {
            let rep = rep_from_isometry(&iso);
            let p = correlation_from_projections(&rep, 1e-9).unwrap();
            let q = correlation_from_deterministic(&DeterministicStrategy::from_isometry(&iso)).unwrap();
            assert_eq!(p, q);
        }
    }

    #[test]
    fn pauli_correlation_is_perfect_and_synchronous() {
        let x = equidistant(4, 1);
        let p = MatrixCF::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]).unwrap();
        let q = MatrixCF::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]).unwrap();
        let rep = pauli_block_rep(&p, &q, &x, &x, 1e-9).unwrap();
        let corr = correlation_from_projections(&rep, 1e-9).unwrap();
        let game = isom_rule(&x, &x);
        for v in 0..8 {
            for a in 0..8 {
                for b in 0..8 {
                    if a != b {
                        assert!(corr.get_f64(v, v, a, b) <= 1e-9);
                    }
                }
            }
        }
        assert!(is_perfect_correlation(&corr, &game, 1e-9).perfect);
        let t = simulate_rounds(&corr, &game, 2000, 0, InputDist::Uniform).unwrap();
        assert_eq!(t.win_rate, 1.0);
    }

    #[test]
    fn not_a_strategy() {
        let p = MatrixGQ::from_int_rows(&[&[1, 0], &[0, 0]]);
        let bad = GameAlgebraRep::exact(2, 2, 2, vec![vec![p.clone(), p.clone()], vec![p.clone(), p]]).unwrap();
        assert!(matches!(correlation_from_projections(&bad, 1e-9), Err(GameError::NotAStrategy(_))));
    }

    #[test]
    fn correlation_validation() {
        assert!(matches!(Correlation::float(1, vec![0.5]), Err(GameError::Normalization { .. })));
        assert!(matches!(Correlation::float(1, vec![1.0, 0.0]), Err(GameError::Shape { .. })));
        assert!(matches!(
            Correlation::exact(1, vec![Rational::from(-1)]),
            Err(GameError::Negative { tuple: [0, 0, 0, 0] })
        ));
    }

    #[test]
    fn correlation_json() {
        let s = DeterministicStrategy::from_isometry(&Isometry::identity(1));
        let p = correlation_from_deterministic(&s).unwrap();
        let json = serde_json::to_string(&p).unwrap();
        assert!(json.starts_with(r#"{"mode":"exact","N":2,"p":["0","0","0","1","0""#));
        let back: Correlation = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn simulation() {
        let game = isom_rule(&line3(), &line3());
        let perfect = correlation_from_deterministic(&DeterministicStrategy::from_isometry(&Isometry::identity(3))).unwrap();
        for seed in [0, 1, 99] {
            let t = simulate_rounds(&perfect, &game, 500, seed, InputDist::Uniform).unwrap();
            assert_eq!((t.wins, t.win_rate), (500, 1.0));
        }

        // Input 0 answers within its own side: every round with v = 0 or w = 0 loses.
        let within = DeterministicStrategy { f: vec![1, 4, 5, 0, 1, 2] };
        let p = correlation_from_deterministic(&within).unwrap();
        let t = simulate_rounds(&p, &game, 72, 3, InputDist::ExhaustiveCycle).unwrap();
        let offending: Vec<&Round> = t.rounds.iter().filter(|r| r.v == 0 || r.w == 0).collect();
        assert_eq!(offending.len(), 22);
        assert!(offending.iter().all(|r| !r.won));

        // Uniform random answers on one-point spaces: the sole valid answers win.
        let one = isom_rule(&point(), &point());
        let mut probs = vec![Rational::zero(); 16];
        for v in 0..2 {
            for w in 0..2 {
                probs[((v * 2 + w) * 2 + (1 - v)) * 2 + (1 - w)] = Rational::one();
            }
        }
        let p = Correlation::exact(2, probs).unwrap();
        let t = simulate_rounds(&p, &one, 100, 5, InputDist::Uniform).unwrap();
        assert_eq!(t.win_rate, 1.0);
        assert_eq!(t.to_jsonl().lines().count(), 100);
    }

    #[test]
    fn simulation_is_deterministic() {
        let game = isom_rule(&line3(), &line3());
        let n = 6;
        let p = Correlation::float(n, vec![1.0 / 36.0; n.pow(4)]).unwrap();
        let a = simulate_rounds(&p, &game, 300, 42, InputDist::Uniform).unwrap();
        let b = simulate_rounds(&p, &game, 300, 42, InputDist::Uniform).unwrap();
        assert_eq!(a.to_jsonl(), b.to_jsonl());
        let c = simulate_rounds(&p, &game, 300, 43, InputDist::Uniform).unwrap();
        assert_ne!(a.to_jsonl(), c.to_jsonl());
    }
}
