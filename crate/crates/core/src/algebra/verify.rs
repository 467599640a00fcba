use serde::Serialize;

use super::rep::{scalar_block, Block, GameAlgebraRep, RepBlocks};
use super::AlgebraError;
use crate::linalg::{MatrixCF, MatrixGQ, Rational};
use crate::metric::{format_poly, metric_invariants, FiniteMetricSpace, Isometry};
use crate::report::{ResidualTracker, VerificationReport};

fn sum_blocks<'a, B: Block + 'a>(d: usize, it: impl Iterator<Item = &'a B>) -> B {
    it.fold(B::zeros(d), |acc, b| acc.add(b))
}

fn magic_unitary_blocks<B: Block>(blocks: &[Vec<B>], d: usize, tol: f64) -> VerificationReport {
    let n = blocks.len();
    let id = B::identity(d);
    let mut report = VerificationReport::new();
    let mut adj = ResidualTracker::new("self_adjoint", tol, B::EXACT);
    let mut idem = ResidualTracker::new("idempotent", tol, B::EXACT);
    for (x, row) in blocks.iter().enumerate() {
        for (y, e) in row.iter().enumerate() {
            let (r, z) = e.sub(&e.adjoint()).residual();
            adj.record(r, z, || vec![x, y]);
            let (r, z) = e.mul(e).sub(e).residual();
            idem.record(r, z, || vec![x, y]);
        }
    }
    report.push(adj.finish());
    report.push(idem.finish());
    let mut rows = ResidualTracker::new("row_sums", tol, B::EXACT);
    for (x, row) in blocks.iter().enumerate() {
        let (r, z) = sum_blocks(d, row.iter()).sub(&id).residual();
        rows.record(r, z, || vec![x]);
    }
    report.push(rows.finish());
    let mut cols = ResidualTracker::new("column_sums", tol, B::EXACT);
    for y in 0..n {
        let (r, z) = sum_blocks(d, blocks.iter().map(|row| &row[y])).sub(&id).residual();
        cols.record(r, z, || vec![y]);
    }
    report.push(cols.finish());
    report
}

/// Checks that [E_xy] is a magic unitary: every block a projection and every
/// row and column summing to the identity.
pub fn is_magic_unitary(rep: &GameAlgebraRep, tol: f64) -> VerificationReport {
    if rep.nx() != rep.ny() {
        let mut report = VerificationReport::new();
        report.fail("size", Some(vec![rep.nx(), rep.ny()]), "SizeMismatch: a magic unitary is square");
        return report;
    }
    match rep.blocks() {
        RepBlocks::Exact(b) => magic_unitary_blocks(b, rep.d(), tol),
        RepBlocks::Float(b) => magic_unitary_blocks(b, rep.d(), tol),
    }
}

fn relations_blocks<B: Block>(
    blocks: &[Vec<B>],
    d: usize,
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
    tol: f64,
) -> VerificationReport {
    let (nx, ny) = (x.len(), y.len());
    let id = B::identity(d);
    let mut report = VerificationReport::new();
    report.structural("relation_1", "e_{x,x'} and e_{y,y'} are zero by storage");

    let mut proj = ResidualTracker::new("relation_2", tol, B::EXACT);
    for (i, row) in blocks.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            let (r1, z1) = e.sub(&e.adjoint()).residual();
            let (r2, z2) = e.mul(e).sub(e).residual();
            proj.record(r1.max(r2), z1 && z2, || vec![i, j]);
        }
    }
    report.push(proj.finish());
    report.structural("relation_3", "e_{x,y} = e_{y,x} by storage");

    let mut rows = ResidualTracker::new("relation_4", tol, B::EXACT);
    for (i, row) in blocks.iter().enumerate() {
        let (r, z) = sum_blocks(d, row.iter()).sub(&id).residual();
        rows.record(r, z, || vec![i]);
    }
    report.push(rows.finish());

    let mut cols = ResidualTracker::new("relation_5", tol, B::EXACT);
    for j in 0..ny {
        let (r, z) = sum_blocks(d, blocks.iter().map(|row| &row[j])).sub(&id).residual();
        cols.record(r, z, || vec![j]);
    }
    report.push(cols.finish());

    let mut row_orth = ResidualTracker::new("relation_6", tol, B::EXACT);
    for (i, row) in blocks.iter().enumerate() {
        for j in 0..ny {
            for k in 0..ny {
                if j != k {
                    let (r, z) = row[j].mul(&row[k]).residual();
                    row_orth.record(r, z, || vec![i, j, k]);
                }
            }
        }
    }
    report.push(row_orth.finish());

    let mut col_orth = ResidualTracker::new("relation_7", tol, B::EXACT);
    for j in 0..ny {
        for i in 0..nx {
            for k in 0..nx {
                if i != k {
                    let (r, z) = blocks[i][j].mul(&blocks[k][j]).residual();
                    col_orth.record(r, z, || vec![i, k, j]);
                }
            }
        }
    }
    report.push(col_orth.finish());

    // Σ_{x'} d_X(x,x') e_{x',y} = Σ_{y'} d_Y(y',y) e_{x,y'}
    let mut dist = ResidualTracker::new("relation_8", tol, B::EXACT);
    for i in 0..nx {
        for j in 0..ny {
            let mut lhs = B::zeros(d);
            for k in 0..nx {
                let w = x.distance(i, k);
                if !w.is_zero() {
                    lhs = lhs.add(&blocks[k][j].scale_rational(w));
                }
            }
            let mut rhs = B::zeros(d);
            for k in 0..ny {
                let w = y.distance(k, j);
                if !w.is_zero() {
                    rhs = rhs.add(&blocks[i][k].scale_rational(w));
                }
            }
            let (r, z) = lhs.sub(&rhs).residual();
            dist.record(r, z, || vec![i, j]);
        }
    }
    report.push(dist.finish());
    report
}

/// Checks the defining relations of the game algebra of Isom(X, Y) on a
/// concrete representation. Relations (1) and (3) hold by the storage
/// format and are reported as structural passes.
pub fn verify_rep_relations(
    rep: &GameAlgebraRep,
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
    tol: f64,
) -> Result<VerificationReport, AlgebraError> {
    if x.len() != rep.nx() || y.len() != rep.ny() {
        return Err(AlgebraError::SpaceMismatch { nx: rep.nx(), ny: rep.ny(), x: x.len(), y: y.len() });
    }
    Ok(match rep.blocks() {
        RepBlocks::Exact(b) => relations_blocks(b, rep.d(), x, y, tol),
        RepBlocks::Float(b) => relations_blocks(b, rep.d(), x, y, tol),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntertwinerCheck {
    pub pass: bool,
    /// Largest entry of (D_X ⊗ 1)U − U(D_Y ⊗ 1).
    pub residual: f64,
}

/// Checks (D_X ⊗ 1_d) U = U (D_Y ⊗ 1_d) for U = [E_xy] ∈ M_n(M_d).
pub fn verify_intertwiner(
    rep: &GameAlgebraRep,
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
    tol: f64,
) -> Result<IntertwinerCheck, AlgebraError> {
    let n = rep.nx();
    if rep.ny() != n || x.len() != n || y.len() != n {
        return Err(AlgebraError::SizeMismatch { nx: rep.nx(), ny: rep.ny() });
    }
    let d = rep.d();
    let dx = x.distance_matrix().kron(&MatrixGQ::identity(d));
    let dy = y.distance_matrix().kron(&MatrixGQ::identity(d));
    match rep.blocks() {
        RepBlocks::Exact(b) => {
            let u = MatrixGQ::from_fn(n * d, n * d, |r, c| b[r / d][c / d].get(r % d, c % d).clone());
            let diff = dx.try_mul(&u).and_then(|l| l.try_sub(&u.try_mul(&dy)?)).expect("square");
            let (residual, zero) = Block::residual(&diff);
            Ok(IntertwinerCheck { pass: zero, residual })
        }
        RepBlocks::Float(b) => {
            let u = MatrixCF::from_fn(n * d, n * d, |r, c| b[r / d][c / d].get(r % d, c % d));
            let (dx, dy) = (dx.to_float(), dy.to_float());
            let diff = dx.try_mul(&u).and_then(|l| l.try_sub(&u.try_mul(&dy)?)).expect("square");
            let residual = diff.max_abs();
            Ok(IntertwinerCheck { pass: residual <= tol, residual })
        }
    }
}

/// The one-dimensional representation E_xy = [g(x) = y].
pub fn rep_from_isometry(g: &Isometry) -> GameAlgebraRep {
    let n = g.perm.len();
    let blocks = (0..n).map(|x| (0..n).map(|y| scalar_block(i64::from(g.perm[x] == y))).collect()).collect();
    GameAlgebraRep::exact(n, n, 1, blocks).expect("well-formed permutation blocks")
}

/// The permutation a one-dimensional 0/1 representation encodes, if it is one.
pub fn permutation_of(rep: &GameAlgebraRep) -> Option<Vec<usize>> {
    if rep.d() != 1 || rep.nx() != rep.ny() {
        return None;
    }
    let RepBlocks::Exact(b) = rep.blocks() else { return None };
    let mut perm = Vec::with_capacity(rep.nx());
    for row in b {
        let ones: Vec<usize> = (0..row.len()).filter(|&y| row[y].get(0, 0).is_one()).collect();
        if ones.len() != 1 || row.iter().any(|e| !e.get(0, 0).is_one() && !e.get(0, 0).is_zero()) {
            return None;
        }
        perm.push(ones[0]);
    }
    Some(perm)
}

fn check_projection<B: Block>(m: &B, tol: f64) -> bool {
    let (r1, z1) = m.sub(&m.adjoint()).residual();
    let (r2, z2) = m.mul(m).sub(m).residual();
    if B::EXACT {
        z1 && z2
    } else {
        r1.max(r2) <= tol
    }
}

fn pauli_blocks<B: Block>(p: &B, q: &B) -> Vec<Vec<B>> {
    let d = p.dim();
    let id = B::identity(d);
    let z = B::zeros(d);
    let (pc, qc) = (id.sub(p), id.sub(q));
    vec![
        vec![p.clone(), pc.clone(), z.clone(), z.clone()],
        vec![pc, p.clone(), z.clone(), z.clone()],
        vec![z.clone(), z.clone(), q.clone(), qc.clone()],
        vec![z.clone(), z, qc, q.clone()],
    ]
}

fn check_pauli_inputs(
    p: (usize, usize),
    q: (usize, usize),
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
) -> Result<usize, AlgebraError> {
    if x.len() != 4 || y.len() != 4 {
        return Err(AlgebraError::SpaceMismatch { nx: 4, ny: 4, x: x.len(), y: y.len() });
    }
    if p.0 != p.1 || q != p || p.0 == 0 {
        return Err(AlgebraError::BlockShape(format!("P is {}x{}, Q is {}x{}", p.0, p.1, q.0, q.1)));
    }
    Ok(p.0)
}

/// The 4×4 block pattern [[P,1−P,0,0],[1−P,P,0,0],[0,0,Q,1−Q],[0,0,1−Q,Q]],
/// a magic unitary whenever P and Q are projections. It is noncommutative
/// exactly when P and Q do not commute.
pub fn pauli_block_rep(
    p: &MatrixCF,
    q: &MatrixCF,
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
    tol: f64,
) -> Result<GameAlgebraRep, AlgebraError> {
    let d = check_pauli_inputs((p.rows(), p.cols()), (q.rows(), q.cols()), x, y)?;
    for (name, m) in [("P", p), ("Q", q)] {
        if !check_projection(m, tol) {
            return Err(AlgebraError::NotProjection { which: name.to_string() });
        }
    }
    Ok(GameAlgebraRep::float(4, 4, d, pauli_blocks(p, q)).expect("4x4 blocks of equal size"))
}

/// Exact-mode variant of [`pauli_block_rep`].
pub fn pauli_block_rep_exact(
    p: &MatrixGQ,
    q: &MatrixGQ,
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
) -> Result<GameAlgebraRep, AlgebraError> {
    let d = check_pauli_inputs((p.rows(), p.cols()), (q.rows(), q.cols()), x, y)?;
    for (name, m) in [("P", p), ("Q", q)] {
        if !check_projection(m, 0.0) {
            return Err(AlgebraError::NotProjection { which: name.to_string() });
        }
    }
    Ok(GameAlgebraRep::exact(4, 4, d, pauli_blocks(p, q)).expect("4x4 blocks of equal size"))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ObstructionReport {
    pub obstructed: bool,
    pub reason: String,
    pub char_poly_x: String,
    pub char_poly_y: String,
    pub char_poly_x_coeffs: Vec<Rational>,
    pub char_poly_y_coeffs: Vec<Rational>,
}

/// Certificate that no finite-dimensional representation can intertwine the
/// distance matrices.
///
/// If (D_X ⊗ 1)U = U(D_Y ⊗ 1) with U unitary then D_X ⊗ 1_d and D_Y ⊗ 1_d
/// are similar, so χ_X^d = χ_Y^d and hence χ_X = χ_Y by unique
/// factorization. Differing characteristic polynomials therefore rule out
/// every dimension d at once.
pub fn spectral_obstruction(x: &FiniteMetricSpace, y: &FiniteMetricSpace) -> ObstructionReport {
    let px = metric_invariants(x).char_poly;
    let py = metric_invariants(y).char_poly;
    let (obstructed, reason) = if x.len() != y.len() {
        (true, "SizeMismatch: a magic unitary is square".to_string())
    } else if px != py {
        (true, "characteristic polynomials of the distance matrices differ".to_string())
    } else {
        (false, "characteristic polynomials agree; no spectral obstruction".to_string())
    };
    ObstructionReport {
        obstructed,
        reason,
        char_poly_x: format_poly(&px),
        char_poly_y: format_poly(&py),
        char_poly_x_coeffs: px,
        char_poly_y_coeffs: py,
    }
}
