use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::linalg::{GaussianRational, MatrixCF, MatrixGQ, Rational};

/// Arithmetic shared by exact and floating block matrices.
pub(crate) trait Block: Clone {
    const EXACT: bool;
    fn zeros(d: usize) -> Self;
    fn identity(d: usize) -> Self;
    fn dim(&self) -> usize;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn adjoint(&self) -> Self;
    fn scale_rational(&self, r: &Rational) -> Self;
    /// Largest entry modulus and whether the matrix is exactly zero.
    fn residual(&self) -> (f64, bool);
}

impl Block for MatrixGQ {
    const EXACT: bool = true;
    fn zeros(d: usize) -> Self {
        MatrixGQ::zeros(d, d)
    }
    fn identity(d: usize) -> Self {
        MatrixGQ::identity(d)
    }
    fn dim(&self) -> usize {
        self.rows()
    }
    fn add(&self, other: &Self) -> Self {
        self.try_add(other).expect("equal block sizes")
    }
    fn sub(&self, other: &Self) -> Self {
        self.try_sub(other).expect("equal block sizes")
    }
    fn mul(&self, other: &Self) -> Self {
        self.try_mul(other).expect("equal block sizes")
    }
    fn adjoint(&self) -> Self {
        MatrixGQ::adjoint(self)
    }
    fn scale_rational(&self, r: &Rational) -> Self {
        MatrixGQ::scale_rational(self, r)
    }
    fn residual(&self) -> (f64, bool) {
        let worst = self.entries().iter().map(|z| z.norm_sqr().to_f64().sqrt()).fold(0.0, f64::max);
        (worst, self.is_zero())
    }
}

impl Block for MatrixCF {
    const EXACT: bool = false;
    fn zeros(d: usize) -> Self {
        MatrixCF::zeros(d, d)
    }
    fn identity(d: usize) -> Self {
        MatrixCF::identity(d)
    }
    fn dim(&self) -> usize {
        self.rows()
    }
    fn add(&self, other: &Self) -> Self {
        self.try_add(other).expect("equal block sizes")
    }
    fn sub(&self, other: &Self) -> Self {
        self.try_sub(other).expect("equal block sizes")
    }
    fn mul(&self, other: &Self) -> Self {
        self.try_mul(other).expect("equal block sizes")
    }
    fn adjoint(&self) -> Self {
        MatrixCF::adjoint(self)
    }
    fn scale_rational(&self, r: &Rational) -> Self {
        self.scale(Complex64::new(r.to_f64(), 0.0))
    }
    fn residual(&self) -> (f64, bool) {
        let m = self.max_abs();
        (m, m == 0.0)
    }
}

/// Block storage of a representation, exact or floating.
#[derive(Debug, Clone, PartialEq)]
pub enum RepBlocks {
    Exact(Vec<Vec<MatrixGQ>>),
    Float(Vec<Vec<MatrixCF>>),
}

/// A candidate representation of the game algebra of Isom(X, Y).
///
/// `E[x][y]` (x ∈ X, y ∈ Y) is the image of e_{x,y}, which equals e_{y,x}.
/// Generators pairing two points of the same space are zero in the game
/// algebra and are not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct GameAlgebraRep {
    nx: usize,
    ny: usize,
    d: usize,
    blocks: RepBlocks,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RepShapeError {
    #[error("expected {expected} block rows, found {found}")]
    Rows { expected: usize, found: usize },
    #[error("block row {row} has {found} blocks, expected {expected}")]
    Cols { row: usize, expected: usize, found: usize },
    #[error("block ({x},{y}) is {rows}x{cols}, expected {d}x{d}")]
    BlockSize { x: usize, y: usize, rows: usize, cols: usize, d: usize },
    #[error("representation dimension must be at least 1")]
    ZeroDimension,
}

fn check_shape<B: Block>(
    blocks: &[Vec<B>],
    nx: usize,
    ny: usize,
    d: usize,
    shape: impl Fn(&B) -> (usize, usize),
) -> Result<(), RepShapeError> {
    if d == 0 {
        return Err(RepShapeError::ZeroDimension);
    }
    if blocks.len() != nx {
        return Err(RepShapeError::Rows { expected: nx, found: blocks.len() });
    }
    for (x, row) in blocks.iter().enumerate() {
        if row.len() != ny {
            return Err(RepShapeError::Cols { row: x, expected: ny, found: row.len() });
        }
        for (y, b) in row.iter().enumerate() {
            let (rows, cols) = shape(b);
            if rows != d || cols != d {
                return Err(RepShapeError::BlockSize { x, y, rows, cols, d });
            }
        }
    }
    Ok(())
}

impl GameAlgebraRep {
    pub fn exact(nx: usize, ny: usize, d: usize, blocks: Vec<Vec<MatrixGQ>>) -> Result<Self, RepShapeError> {
        check_shape(&blocks, nx, ny, d, |b| (b.rows(), b.cols()))?;
        Ok(GameAlgebraRep { nx, ny, d, blocks: RepBlocks::Exact(blocks) })
    }

    pub fn float(nx: usize, ny: usize, d: usize, blocks: Vec<Vec<MatrixCF>>) -> Result<Self, RepShapeError> {
        check_shape(&blocks, nx, ny, d, |b| (b.rows(), b.cols()))?;
        Ok(GameAlgebraRep { nx, ny, d, blocks: RepBlocks::Float(blocks) })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.blocks, RepBlocks::Exact(_))
    }

    pub fn blocks(&self) -> &RepBlocks {
        &self.blocks
    }

    pub fn mode_name(&self) -> &'static str {
        if self.is_exact() {
            "exact"
        } else {
            "float"
        }
    }

    /// Same representation with floating blocks.
    pub fn to_float(&self) -> GameAlgebraRep {
        match &self.blocks {
            RepBlocks::Float(_) => self.clone(),
            RepBlocks::Exact(b) => GameAlgebraRep {
                nx: self.nx,
                ny: self.ny,
                d: self.d,
                blocks: RepBlocks::Float(b.iter().map(|row| row.iter().map(MatrixGQ::to_float).collect()).collect()),
            },
        }
    }

    pub fn float_block(&self, x: usize, y: usize) -> MatrixCF {
        match &self.blocks {
            RepBlocks::Exact(b) => b[x][y].to_float(),
            RepBlocks::Float(b) => b[x][y].clone(),
        }
    }

    /// Replaces block (x, y); the new block must be d×d and of the same mode.
    pub fn with_exact_block(&self, x: usize, y: usize, block: MatrixGQ) -> Option<GameAlgebraRep> {
        let RepBlocks::Exact(b) = &self.blocks else { return None };
        if block.rows() != self.d || block.cols() != self.d {
            return None;
        }
        let mut b = b.clone();
        b[x][y] = block;
        Some(GameAlgebraRep { blocks: RepBlocks::Exact(b), ..self.clone() })
    }
}

#[derive(Serialize, Deserialize)]
struct RepJson<B> {
    nx: usize,
    ny: usize,
    d: usize,
    mode: String,
    blocks: Vec<Vec<B>>,
}

impl Serialize for GameAlgebraRep {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match &self.blocks {
            RepBlocks::Exact(b) => {
                RepJson { nx: self.nx, ny: self.ny, d: self.d, mode: "exact".into(), blocks: b.clone() }
                    .serialize(serializer)
            }
            RepBlocks::Float(b) => {
                RepJson { nx: self.nx, ny: self.ny, d: self.d, mode: "float".into(), blocks: b.clone() }
                    .serialize(serializer)
            }
        }
    }
}

impl<'de> Deserialize<'de> for GameAlgebraRep {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let value = serde_json::Value::deserialize(deserializer)?;
        let mode = value.get("mode").and_then(|m| m.as_str()).unwrap_or("float").to_string();
        match mode.as_str() {
            "exact" => {
                let raw: RepJson<MatrixGQ> = serde_json::from_value(value).map_err(D::Error::custom)?;
                GameAlgebraRep::exact(raw.nx, raw.ny, raw.d, raw.blocks).map_err(D::Error::custom)
            }
            "float" => {
                let raw: RepJson<MatrixCF> = serde_json::from_value(value).map_err(D::Error::custom)?;
                GameAlgebraRep::float(raw.nx, raw.ny, raw.d, raw.blocks).map_err(D::Error::custom)
            }
            other => Err(D::Error::custom(format!("unknown mode {other:?}"))),
        }
    }
}

/// Exact 1×1 block.
pub(crate) fn scalar_block(v: i64) -> MatrixGQ {
    MatrixGQ::new(1, 1, vec![GaussianRational::from(v)]).expect("1x1")
}
