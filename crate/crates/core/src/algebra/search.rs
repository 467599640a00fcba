//! Heuristic witness search and random magic unitaries.
//!
//! The search looks for a point in the intersection of two sets of block
//! tuples (E_xy):
//!
//! * the affine set L cut out by the linear relations (row sums, column
//!   sums, distance intertwining), which act entrywise on the d×d blocks
//!   with the same real coefficient matrix C;
//! * the set P of tuples whose blocks are all orthogonal projections.
//!
//! Every point of L ∩ P is a representation (orthogonality within rows and
//! columns follows from projections summing to 1). The iteration is
//! Douglas–Rachford splitting, z ← z + P_P(2P_L z − z) − P_L z, where P_L is
//! the orthogonal projection x − C⁺(Cx − b) and P_P rounds each Hermitian
//! block's spectrum to {0, 1} at ½. Candidates are polished by alternating
//! projections and accepted only if they pass [`verify_rep_relations`] at
//! `1e-8`, so a returned representation is always verified; `NotFound` is
//! inconclusive.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::rep::{scalar_block, GameAlgebraRep};
use super::verify::verify_rep_relations;
use crate::linalg::{rref, GaussianRational, MatrixCF, MatrixGQ};
use crate::metric::FiniteMetricSpace;
use crate::rng::SplitMix64;

/// Acceptance tolerance for a found representation.
pub const SEARCH_ACCEPT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchParams {
    pub restarts: usize,
    pub max_iters: usize,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams { restarts: 8, max_iters: 2000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "outcome")]
pub enum SearchOutcome {
    Found {
        rep: GameAlgebraRep,
        /// Sum of squared Frobenius residuals of all relations.
        penalty: f64,
        restart: usize,
        iterations: usize,
    },
    NotFound {
        reason: String,
        best_penalty: Option<f64>,
    },
}

impl SearchOutcome {
    pub fn is_found(&self) -> bool {
        matches!(self, SearchOutcome::Found { .. })
    }

    pub fn rep(&self) -> Option<&GameAlgebraRep> {
        match self {
            SearchOutcome::Found { rep, .. } => Some(rep),
            SearchOutcome::NotFound { .. } => None,
        }
    }
}

/// Searches for a d-dimensional representation with default restarts.
pub fn search_quantum_rep(
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
    d: usize,
    seed: u64,
    max_iters: usize,
) -> SearchOutcome {
    let params = SearchParams { max_iters, ..SearchParams::default() };
    search_quantum_rep_with(x, y, d, seed, &params)
}

/// Restart `i` uses seed `seed + i`; the winner is the verified candidate of
/// lowest penalty, ties going to the lowest restart index.
pub fn search_quantum_rep_with(
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
    d: usize,
    seed: u64,
    params: &SearchParams,
) -> SearchOutcome {
    let n = x.len();
    if n != y.len() {
        return SearchOutcome::NotFound {
            reason: "SizeMismatch: |X| != |Y| rules out a magic unitary".into(),
            best_penalty: None,
        };
    }
    if d == 0 {
        return SearchOutcome::NotFound { reason: "dimension must be at least 1".into(), best_penalty: None };
    }
    let Some(affine) = AffineProjector::new(x, y) else {
        return SearchOutcome::NotFound {
            reason: "the linear relations have no solution, so no representation exists in any dimension".into(),
            best_penalty: None,
        };
    };
    let problem = Problem { n, d, affine, x, y };
    let runs: Vec<RunResult> =
        (0..params.restarts).into_par_iter().map(|i| problem.run(seed.wrapping_add(i as u64), params.max_iters)).collect();

    let mut best: Option<(usize, &RunResult)> = None;
    for (i, r) in runs.iter().enumerate() {
        if r.verified && best.is_none_or(|(_, b)| r.penalty < b.penalty) {
            best = Some((i, r));
        }
    }
    match best {
        Some((restart, r)) => SearchOutcome::Found {
            rep: problem.to_rep(&r.blocks),
            penalty: r.penalty,
            restart,
            iterations: r.iterations,
        },
        None => SearchOutcome::NotFound {
            reason: "no verified candidate within the iteration budget (inconclusive)".into(),
            best_penalty: runs.iter().map(|r| r.penalty).reduce(f64::min),
        },
    }
}

/// Orthogonal projection onto {a ∈ ℂ^{n²} : C a = b}, applied per block entry.
///
/// Built exactly over ℚ: with R the independent rows of C (and b_R the
/// matching right-hand side), the row-space projector is Rᵀ(RRᵀ)⁻¹R and the
/// minimum-norm solution is Rᵀ(RRᵀ)⁻¹b_R.
struct AffineProjector {
    /// I − C⁺C
    kernel_proj: DMatrix<f64>,
    /// C⁺ b₁, the minimum-norm solution for diagonal block entries.
    offset: DVector<f64>,
}

impl AffineProjector {
    /// `None` when C a = b₁ is inconsistent.
    fn new(x: &FiniteMetricSpace, y: &FiniteMetricSpace) -> Option<Self> {
        let n = x.len();
        let m = n * n;
        let idx = |i: usize, j: usize| i * n + j;
        let rows = 2 * n + m;
        // Augmented [C | b₁].
        let mut aug = MatrixGQ::zeros(rows, m + 1);
        let one = GaussianRational::one();
        for i in 0..n {
            for j in 0..n {
                aug.set(i, idx(i, j), one.clone());
                aug.set(n + j, idx(i, j), one.clone());
            }
            aug.set(i, m, one.clone());
            aug.set(n + i, m, one.clone());
        }
        for i in 0..n {
            for j in 0..n {
                let r = 2 * n + idx(i, j);
                for k in 0..n {
                    let a = aug.get(r, idx(k, j)).clone() + GaussianRational::from(x.distance(i, k).clone());
                    aug.set(r, idx(k, j), a);
                    let b = aug.get(r, idx(i, k)).clone() - GaussianRational::from(y.distance(k, j).clone());
                    aug.set(r, idx(i, k), b);
                }
            }
        }
        let red = rref(&aug);
        if red.pivots.last() == Some(&m) {
            return None;
        }
        let r = red.rank;
        let rmat = MatrixGQ::from_fn(r, m, |i, j| red.reduced.get(i, j).clone());
        let brhs = MatrixGQ::from_fn(r, 1, |i, _| red.reduced.get(i, m).clone());
        let rt = rmat.transpose();
        let gram = rmat.try_mul(&rt).expect("shapes");
        let inv = invert(&gram);
        let left = rt.try_mul(&inv).expect("shapes");
        let row_proj = left.try_mul(&rmat).expect("shapes");
        let offset = left.try_mul(&brhs).expect("shapes");
        let kernel_proj = DMatrix::from_fn(m, m, |i, j| {
            let delta = if i == j { 1.0 } else { 0.0 };
            delta - row_proj.get(i, j).re.to_f64()
        });
        let offset = DVector::from_fn(m, |i, _| offset.get(i, 0).re.to_f64());
        Some(AffineProjector { kernel_proj, offset })
    }
}

/// Inverse of an invertible square matrix by row reduction of [M | I].
fn invert(mat: &MatrixGQ) -> MatrixGQ {
    let k = mat.rows();
    let aug = MatrixGQ::from_fn(k, 2 * k, |i, j| {
        if j < k {
            mat.get(i, j).clone()
        } else if j - k == i {
            GaussianRational::one()
        } else {
            GaussianRational::zero()
        }
    });
    let red = rref(&aug).reduced;
    MatrixGQ::from_fn(k, k, |i, j| red.get(i, k + j).clone())
}

struct Problem<'a> {
    n: usize,
    d: usize,
    affine: AffineProjector,
    x: &'a FiniteMetricSpace,
    y: &'a FiniteMetricSpace,
}

/// Blocks stored block-major: `blocks[x * n + y]` is a d×d matrix, row-major.
type Blocks = Vec<Vec<Complex64>>;

struct RunResult {
    blocks: Blocks,
    penalty: f64,
    verified: bool,
    iterations: usize,
}

impl Problem<'_> {
    fn project_affine(&self, z: &Blocks) -> Blocks {
        let (nn, dd) = (self.n * self.n, self.d * self.d);
        let mut out = vec![vec![Complex64::new(0.0, 0.0); dd]; nn];
        let mut a_re = DVector::<f64>::zeros(nn);
        let mut a_im = DVector::<f64>::zeros(nn);
        for alpha in 0..self.d {
            for beta in 0..self.d {
                let pos = alpha * self.d + beta;
                for k in 0..nn {
                    a_re[k] = z[k][pos].re;
                    a_im[k] = z[k][pos].im;
                }
                let mut re = &self.affine.kernel_proj * &a_re;
                let im = &self.affine.kernel_proj * &a_im;
                if alpha == beta {
                    re += &self.affine.offset;
                }
                for k in 0..nn {
                    out[k][pos] = Complex64::new(re[k], im[k]);
                }
            }
        }
        out
    }

    fn project_projections(&self, z: &Blocks) -> Blocks {
        z.iter().map(|b| nearest_projection(b, self.d)).collect()
    }

    fn penalty(&self, blocks: &Blocks) -> f64 {
        let (n, d) = (self.n, self.d);
        let mats: Vec<MatrixCF> =
            blocks.iter().map(|b| MatrixCF::new(d, d, b.clone()).expect("finite blocks")).collect();
        let at = |i: usize, j: usize| &mats[i * n + j];
        let id = MatrixCF::identity(d);
        let mut total = 0.0;
        for m in &mats {
            total += m.try_sub(&m.adjoint()).unwrap().frobenius_sqr();
            total += m.try_mul(m).unwrap().try_sub(m).unwrap().frobenius_sqr();
        }
        for i in 0..n {
            let row = (0..n).fold(MatrixCF::zeros(d, d), |acc, j| acc.try_add(at(i, j)).unwrap());
            let col = (0..n).fold(MatrixCF::zeros(d, d), |acc, j| acc.try_add(at(j, i)).unwrap());
            total += row.try_sub(&id).unwrap().frobenius_sqr();
            total += col.try_sub(&id).unwrap().frobenius_sqr();
            for j in 0..n {
                for k in 0..n {
                    if j != k {
                        total += at(i, j).try_mul(at(i, k)).unwrap().frobenius_sqr();
                        total += at(j, i).try_mul(at(k, i)).unwrap().frobenius_sqr();
                    }
                }
                let mut diff = MatrixCF::zeros(d, d);
                for k in 0..n {
                    let wx = self.x.distance(i, k).to_f64();
                    let wy = self.y.distance(k, j).to_f64();
                    diff = diff
                        .try_add(&at(k, j).scale(Complex64::new(wx, 0.0)))
                        .unwrap()
                        .try_sub(&at(i, k).scale(Complex64::new(wy, 0.0)))
                        .unwrap();
                }
                total += diff.frobenius_sqr();
            }
        }
        total
    }

    fn random_start(&self, rng: &mut SplitMix64) -> Blocks {
        let (n, d) = (self.n, self.d);
        (0..n * n)
            .map(|_| {
                let mut b = vec![Complex64::new(0.0, 0.0); d * d];
                for a in 0..d {
                    b[a * d + a] = Complex64::new(1.0 / n as f64 + rng.uniform(-0.5, 0.5), 0.0);
                    for c in a + 1..d {
                        let z = Complex64::new(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5));
                        b[a * d + c] = z;
                        b[c * d + a] = z.conj();
                    }
                }
                b
            })
            .collect()
    }

    fn to_rep(&self, blocks: &Blocks) -> GameAlgebraRep {
        let (n, d) = (self.n, self.d);
        if d == 1 && blocks.iter().all(|b| b[0] == Complex64::new(0.0, 0.0) || b[0] == Complex64::new(1.0, 0.0)) {
            let exact = (0..n).map(|i| (0..n).map(|j| scalar_block(blocks[i * n + j][0].re as i64)).collect()).collect();
            return GameAlgebraRep::exact(n, n, 1, exact).expect("n×n blocks");
        }
        let float = (0..n)
            .map(|i| (0..n).map(|j| MatrixCF::new(d, d, blocks[i * n + j].clone()).expect("finite")).collect())
            .collect();
        GameAlgebraRep::float(n, n, d, float).expect("n×n blocks")
    }

    fn accept(&self, blocks: &Blocks) -> bool {
        let rep = self.to_rep(blocks);
        verify_rep_relations(&rep, self.x, self.y, SEARCH_ACCEPT_TOL).map(|r| r.pass).unwrap_or(false)
    }

    /// Alternating projections from a candidate, keeping the best penalty.
    fn polish(&self, mut blocks: Blocks) -> (Blocks, f64) {
        let mut penalty = self.penalty(&blocks);
        for _ in 0..200 {
            if penalty < 1e-26 {
                break;
            }
            let next = self.project_projections(&self.project_affine(&blocks));
            let p = self.penalty(&next);
            if p >= penalty {
                break;
            }
            blocks = next;
            penalty = p;
        }
        (blocks, penalty)
    }

    fn run(&self, seed: u64, max_iters: usize) -> RunResult {
        let mut rng = SplitMix64::new(seed);
        let mut z = self.random_start(&mut rng);
        let mut best: Option<(Blocks, f64)> = None;
        for it in 1..=max_iters {
            let pl = self.project_affine(&z);
            let reflected: Blocks = pl
                .iter()
                .zip(&z)
                .map(|(p, zz)| p.iter().zip(zz).map(|(a, b)| 2.0 * a - b).collect())
                .collect();
            let r = self.project_projections(&reflected);
            let mut gap = 0.0;
            for ((zb, rb), pb) in z.iter_mut().zip(&r).zip(&pl) {
                for ((zv, rv), pv) in zb.iter_mut().zip(rb).zip(pb) {
                    let step = rv - pv;
                    gap += step.norm_sqr();
                    *zv += step;
                }
            }
            if gap < 1e-12 || it == max_iters {
                let (cand, penalty) = self.polish(r);
                let verified = self.accept(&cand);
                if verified || best.as_ref().is_none_or(|(_, p)| penalty < *p) {
                    best = Some((cand.clone(), penalty));
                }
                if verified {
                    return RunResult { blocks: cand, penalty, verified, iterations: it };
                }
                if gap < 1e-12 {
                    // Stuck at a fixed point that is not a solution.
                    break;
                }
            }
        }
        let (blocks, penalty) = best.unwrap_or_else(|| {
            let b = self.project_projections(&z);
            let p = self.penalty(&b);
            (b, p)
        });
        RunResult { blocks, penalty, verified: false, iterations: max_iters }
    }
}

/// Nearest orthogonal projection to the Hermitian part of a d×d block:
/// eigenvalues ≥ ½ go to 1, the rest to 0.
fn nearest_projection(block: &[Complex64], d: usize) -> Vec<Complex64> {
    if d == 1 {
        let v = if block[0].re >= 0.5 { 1.0 } else { 0.0 };
        return vec![Complex64::new(v, 0.0)];
    }
    let m = DMatrix::<Complex64>::from_fn(d, d, |i, j| (block[i * d + j] + block[j * d + i].conj()) * 0.5);
    let eig = m.symmetric_eigen();
    let mut out = vec![Complex64::new(0.0, 0.0); d * d];
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda < 0.5 {
            continue;
        }
        let v = eig.eigenvectors.column(k);
        for i in 0..d {
            for j in 0..d {
                out[i * d + j] += v[i] * v[j].conj();
            }
        }
    }
    out
}

fn random_unitary(d: usize, rng: &mut SplitMix64) -> DMatrix<Complex64> {
    let g = DMatrix::<Complex64>::from_fn(d, d, |_, _| Complex64::new(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)));
    g.qr().q()
}

fn random_projection(d: usize, rank: usize, rng: &mut SplitMix64) -> MatrixCF {
    let u = random_unitary(d, rng);
    MatrixCF::from_fn(d, d, |i, j| (0..rank).map(|k| u[(i, k)] * u[(j, k)].conj()).sum())
}

fn random_perm(n: usize, rng: &mut SplitMix64) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut p);
    p
}

/// A random n×n magic unitary with d×d blocks.
///
/// For n ≥ 4 and d ≥ 2 roughly half of the draws embed a noncommutative
/// 4×4 block pattern built from two random projections; the rest are
/// mixtures Σ_k [σ_k(x) = y] P_k of random permutations over a random
/// orthonormal frame.
pub fn random_magic_unitary(n: usize, d: usize, rng: &mut SplitMix64) -> GameAlgebraRep {
    assert!(n >= 1 && d >= 1);
    let zero = MatrixCF::zeros(d, d);
    let id = MatrixCF::identity(d);
    let mut blocks = vec![vec![zero.clone(); n]; n];
    if n >= 4 && d >= 2 && rng.below(2) == 0 {
        let p = random_projection(d, 1 + rng.below(d - 1), rng);
        let q = random_projection(d, 1 + rng.below(d - 1), rng);
        let (pc, qc) = (id.try_sub(&p).unwrap(), id.try_sub(&q).unwrap());
        let pattern = [[&p, &pc], [&pc, &p]];
        let pattern_q = [[&q, &qc], [&qc, &q]];
        for a in 0..2 {
            for b in 0..2 {
                blocks[a][b] = pattern[a][b].clone();
                blocks[2 + a][2 + b] = pattern_q[a][b].clone();
            }
        }
        for (k, row) in blocks.iter_mut().enumerate().skip(4) {
            row[k] = id.clone();
        }
        let (sigma, tau) = (random_perm(n, rng), random_perm(n, rng));
        let permuted = (0..n).map(|i| (0..n).map(|j| blocks[sigma[i]][tau[j]].clone()).collect()).collect();
        return GameAlgebraRep::float(n, n, d, permuted).expect("n×n blocks");
    }
    let u = random_unitary(d, rng);
    for k in 0..d {
        let pk = MatrixCF::from_fn(d, d, |i, j| u[(i, k)] * u[(j, k)].conj());
        let sigma = random_perm(n, rng);
        for (x, &y) in sigma.iter().enumerate() {
            blocks[x][y] = blocks[x][y].try_add(&pk).unwrap();
        }
    }
    GameAlgebraRep::float(n, n, d, blocks).expect("n×n blocks")
}
