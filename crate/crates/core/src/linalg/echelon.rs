//! Row reduction over ℚ(i).

use super::{GaussianRational, MatrixGQ};

/// Result of [`rref`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rref {
    pub reduced: MatrixGQ,
    pub rank: usize,
    pub pivots: Vec<usize>,
}

/// `row -= factor * pivot_row`, skipping structural zeros.
fn axpy_neg(row: &mut [GaussianRational], factor: &GaussianRational, pivot_row: &[GaussianRational]) {
    for (r, p) in row.iter_mut().zip(pivot_row) {
        if !p.is_zero() {
            *r -= &(factor * p);
        }
    }
}

fn normalize(row: &mut [GaussianRational], lead: usize) {
    let inv = row[lead].recip();
    if inv.is_one() {
        return;
    }
    for x in row.iter_mut() {
        if !x.is_zero() {
            *x = &*x * &inv;
        }
    }
}

/// Reduced row echelon form by Gauss–Jordan elimination.
pub fn rref(m: &MatrixGQ) -> Rref {
    let (rows, cols) = (m.rows(), m.cols());
    let mut data: Vec<Vec<GaussianRational>> = (0..rows).map(|i| m.row(i).to_vec()).collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !data[i][c].is_zero()) else {
            continue;
        };
        data.swap(r, p);
        normalize(&mut data[r], c);
        let pivot_row = data[r].clone();
        for (i, row) in data.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let factor = row[c].clone();
                axpy_neg(row, &factor, &pivot_row);
            }
        }
        pivots.push(c);
        r += 1;
    }
    let reduced = MatrixGQ::new(rows, cols, data.into_iter().flatten().collect()).expect("shape preserved");
    Rref { reduced, rank: pivots.len(), pivots }
}

/// Basis of the kernel {v : m v = 0}, one vector per free column; the vector
/// for free column `f` has a 1 at `f` and zeros at the other free columns.
pub fn null_space(m: &MatrixGQ) -> Vec<Vec<GaussianRational>> {
    let Rref { reduced, pivots, .. } = rref(m);
    kernel_from_rref(&reduced, &pivots, m.cols())
}

fn kernel_from_rref(reduced: &MatrixGQ, pivots: &[usize], cols: usize) -> Vec<Vec<GaussianRational>> {
    let mut is_pivot = vec![false; cols];
    for &p in pivots {
        is_pivot[p] = true;
    }
    (0..cols)
        .filter(|&f| !is_pivot[f])
        .map(|f| {
            let mut v = vec![GaussianRational::zero(); cols];
            v[f] = GaussianRational::one();
            for (r, &p) in pivots.iter().enumerate() {
                let x = reduced.get(r, f);
                if !x.is_zero() {
                    v[p] = -x;
                }
            }
            v
        })
        .collect()
}

/// Incrementally maintained reduced row echelon basis of a row space.
///
/// Rows are kept sorted by pivot column and fully reduced, so two bases of
/// the same space compare equal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EchelonBasis {
    width: usize,
    rows: Vec<Vec<GaussianRational>>,
    pivots: Vec<usize>,
}

impl EchelonBasis {
    pub fn new(width: usize) -> Self {
        EchelonBasis { width, rows: Vec::new(), pivots: Vec::new() }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn is_full(&self) -> bool {
        self.rows.len() == self.width
    }

    pub fn rows(&self) -> &[Vec<GaussianRational>] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn into_rows(self) -> Vec<Vec<GaussianRational>> {
        self.rows
    }

    /// Residual of `v` after elimination against the current rows.
    pub fn reduce(&self, v: &[GaussianRational]) -> Vec<GaussianRational> {
        assert_eq!(v.len(), self.width, "vector length");
        let mut v = v.to_vec();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if !v[p].is_zero() {
                let factor = v[p].clone();
                axpy_neg(&mut v, &factor, row);
            }
        }
        v
    }

    pub fn contains(&self, v: &[GaussianRational]) -> bool {
        if self.is_full() {
            return true;
        }
        self.reduce(v).iter().all(GaussianRational::is_zero)
    }

    /// Adds `v` to the span. Returns whether the rank grew.
    pub fn insert(&mut self, v: &[GaussianRational]) -> bool {
        if self.is_full() {
            return false;
        }
        let mut v = self.reduce(v);
        let Some(lead) = v.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        normalize(&mut v, lead);
        for row in &mut self.rows {
            if !row[lead].is_zero() {
                let factor = row[lead].clone();
                axpy_neg(row, &factor, &v);
            }
        }
        let at = self.pivots.partition_point(|&p| p < lead);
        self.pivots.insert(at, lead);
        self.rows.insert(at, v);
        true
    }

    /// Kernel of the matrix whose rows span this space.
    pub fn kernel(&self) -> Vec<Vec<GaussianRational>> {
        let m = MatrixGQ::new(self.rows.len(), self.width, self.rows.iter().flatten().cloned().collect())
            .expect("rows have basis width");
        kernel_from_rref(&m, &self.pivots, self.width)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rref_examples() {
        let r = rref(&MatrixGQ::from_int_rows(&[&[2, 4]]));
        assert_eq!(r.reduced, MatrixGQ::from_int_rows(&[&[1, 2]]));
        assert_eq!(r.rank, 1);

        let id = MatrixGQ::identity(3);
        let r = rref(&id);
        assert_eq!(r.reduced, id);
        assert_eq!(r.rank, 3);
        assert_eq!(r.pivots, vec![0, 1, 2]);

        let r = rref(&MatrixGQ::from_int_rows(&[&[1, 1], &[1, 1]]));
        assert_eq!(r.reduced, MatrixGQ::from_int_rows(&[&[1, 1], &[0, 0]]));
        assert_eq!(r.rank, 1);
    }

    #[test]
    fn null_space_examples() {
        let k = null_space(&MatrixGQ::from_int_rows(&[&[1, 1]]));
        assert_eq!(k, vec![vec![GaussianRational::from(-1), GaussianRational::from(1)]]);
        assert!(null_space(&MatrixGQ::identity(3)).is_empty());
        assert_eq!(null_space(&MatrixGQ::zeros(2, 2)).len(), 2);
    }

    #[test]
    fn incremental_matches_batch() {
        let m = MatrixGQ::from_int_rows(&[&[0, 2, 4, 1], &[1, 1, 0, 0], &[1, 3, 4, 1], &[0, 0, 0, 3]]);
        let mut basis = EchelonBasis::new(4);
        for i in 0..4 {
            basis.insert(m.row(i));
        }
        let batch = rref(&m);
        assert_eq!(basis.rank(), batch.rank);
        assert_eq!(basis.pivots(), &batch.pivots[..]);
        for (i, row) in basis.rows().iter().enumerate() {
            assert_eq!(row.as_slice(), batch.reduced.row(i));
        }
        assert!(basis.contains(m.row(2)));
    }
}
