//! Dense linear algebra over the tower fields.
//!
//! Matrices are immutable values tagged with the field their elimination is
//! performed over. Base-field (`GF(q)`) matrices hold embedded elements of
//! the top field; closure of the subfield under arithmetic keeps elimination
//! results inside it, so a single arithmetic core serves both tags.
//! Pivoting is deterministic (lowest row, lowest column) so echelon forms
//! are bit-reproducible.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf::{Element, FieldTower, Tower};

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrices use different field tags")]
    MixedFieldTags,
    #[error("matrices live over different field towers")]
    TowerMismatch,
    #[error("column index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("entry at ({0}, {1}) is not in the base subfield")]
    EntryNotInSubfield(usize, usize),
    #[error("linear system is inconsistent")]
    Inconsistent,
}

/// Which field's arithmetic governs elimination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FieldTag {
    #[serde(rename = "base_q")]
    BaseQ,
    #[serde(rename = "top_q")]
    TopQ,
}

#[derive(Debug, Clone)]
pub struct Matrix {
    tower: Tower,
    tag: FieldTag,
    rows: usize,
    cols: usize,
    entries: Vec<Element>,
}

impl PartialEq for Matrix {
    fn eq(&self, other: &Self) -> bool {
        self.tag == other.tag
            && self.rows == other.rows
            && self.cols == other.cols
            && self.entries == other.entries
            && *self.tower == *other.tower
    }
}
impl Eq for Matrix {}

impl Matrix {
    pub fn new(
        tower: Tower,
        tag: FieldTag,
        rows: usize,
        cols: usize,
        entries: Vec<Element>,
    ) -> Result<Self, LinalgError> {
        if entries.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        if tag == FieldTag::BaseQ {
            for (idx, &x) in entries.iter().enumerate() {
                if !tower.in_subfield(x) {
                    return Err(LinalgError::EntryNotInSubfield(idx / cols, idx % cols));
                }
            }
        }
        Ok(Matrix {
            tower,
            tag,
            rows,
            cols,
            entries,
        })
    }

    pub fn from_fn(
        tower: Tower,
        tag: FieldTag,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Element,
    ) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Matrix {
            tower,
            tag,
            rows,
            cols,
            entries,
        }
    }

    pub fn zeros(tower: Tower, tag: FieldTag, rows: usize, cols: usize) -> Self {
        Matrix {
            tower,
            tag,
            rows,
            cols,
            entries: vec![Element::ZERO; rows * cols],
        }
    }

    pub fn identity(tower: Tower, tag: FieldTag, n: usize) -> Self {
        Self::from_fn(tower, tag, n, n, |i, j| {
            if i == j {
                Element::ONE
            } else {
                Element::ZERO
            }
        })
    }

    pub fn tower(&self) -> &Tower {
        &self.tower
    }
    pub fn tag(&self) -> FieldTag {
        self.tag
    }
    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn entries(&self) -> &[Element] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> Element {
        self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Element) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Element] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Matrix {
        Self::from_fn(self.tower.clone(), self.tag, self.cols, self.rows, |i, j| {
            self.get(j, i)
        })
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        if *self.tower != *other.tower {
            return Err(LinalgError::TowerMismatch);
        }
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let t = &self.tower;
        let tag = if self.tag == FieldTag::BaseQ && other.tag == FieldTag::BaseQ {
            FieldTag::BaseQ
        } else {
            FieldTag::TopQ
        };
        let mut out = Matrix::zeros(self.tower.clone(), tag, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = t.add(out.get(i, j), t.mul(a, other.get(k, j)));
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    /// Reduced row-echelon form with the deterministic pivot rule
    /// (first nonzero entry in column order). Returns the form and the
    /// pivot column indices.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let t = self.tower.clone();
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(pr) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else {
                continue;
            };
            for j in 0..m.cols {
                let (a, b) = (m.get(r, j), m.get(pr, j));
                m.set(r, j, b);
                m.set(pr, j, a);
            }
            let inv = t.inv(m.get(r, c)).expect("pivot is nonzero");
            for j in 0..m.cols {
                m.set(r, j, t.mul(inv, m.get(r, j)));
            }
            for i in 0..m.rows {
                if i == r || m.get(i, c).is_zero() {
                    continue;
                }
                let f = m.get(i, c);
                for j in 0..m.cols {
                    let v = t.sub(m.get(i, j), t.mul(f, m.get(r, j)));
                    m.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Solves `self * X = b` column-wise. Free variables are set to zero.
    pub fn solve(&self, b: &Matrix) -> Result<Matrix, LinalgError> {
        if *self.tower != *b.tower {
            return Err(LinalgError::TowerMismatch);
        }
        if self.rows != b.rows {
            return Err(LinalgError::DimensionMismatch(format!(
                "coefficient matrix has {} rows, right-hand side {}",
                self.rows, b.rows
            )));
        }
        let aug = self.hconcat(b)?;
        let (r, pivots) = aug.rref();
        if pivots.iter().any(|&c| c >= self.cols) {
            return Err(LinalgError::Inconsistent);
        }
        let mut x = Matrix::zeros(self.tower.clone(), b.tag, self.cols, b.cols);
        for (row, &pc) in pivots.iter().enumerate() {
            for j in 0..b.cols {
                x.set(pc, j, r.get(row, self.cols + j));
            }
        }
        Ok(x)
    }

    /// Basis of the right kernel, from the reduced echelon form. Columns
    /// correspond to free variables in increasing index order.
    pub fn null_space(&self) -> Matrix {
        let t = self.tower.clone();
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut n = Matrix::zeros(t.clone(), self.tag, self.cols, free.len());
        for (k, &f) in free.iter().enumerate() {
            n.set(f, k, Element::ONE);
            for (row, &pc) in pivots.iter().enumerate() {
                n.set(pc, k, t.neg(r.get(row, f)));
            }
        }
        n
    }

    /// Projection upon the columns in `indices`, in increasing index order.
    pub fn project_cols(&self, indices: &[usize]) -> Result<Matrix, LinalgError> {
        let mut idx = indices.to_vec();
        idx.sort_unstable();
        if let Some(&bad) = idx.iter().find(|&&c| c >= self.cols) {
            return Err(LinalgError::IndexOutOfRange(bad));
        }
        Ok(Matrix::from_fn(
            self.tower.clone(),
            self.tag,
            self.rows,
            idx.len(),
            |i, j| self.get(i, idx[j]),
        ))
    }

    pub fn hconcat(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        if *self.tower != *other.tower {
            return Err(LinalgError::TowerMismatch);
        }
        if self.rows != other.rows {
            return Err(LinalgError::DimensionMismatch(
                "row counts differ in horizontal concatenation".into(),
            ));
        }
        let tag = if self.tag == other.tag {
            self.tag
        } else {
            FieldTag::TopQ
        };
        Ok(Matrix::from_fn(
            self.tower.clone(),
            tag,
            self.rows,
            self.cols + other.cols,
            |i, j| {
                if j < self.cols {
                    self.get(i, j)
                } else {
                    other.get(i, j - self.cols)
                }
            },
        ))
    }

    pub fn vconcat(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        if *self.tower != *other.tower {
            return Err(LinalgError::TowerMismatch);
        }
        if self.cols != other.cols {
            return Err(LinalgError::DimensionMismatch(
                "column counts differ in vertical concatenation".into(),
            ));
        }
        let tag = if self.tag == other.tag {
            self.tag
        } else {
            FieldTag::TopQ
        };
        Ok(Matrix::from_fn(
            self.tower.clone(),
            tag,
            self.rows + other.rows,
            self.cols,
            |i, j| {
                if i < self.rows {
                    self.get(i, j)
                } else {
                    other.get(i - self.rows, j)
                }
            },
        ))
    }
}

/// `diag(W_1, ..., W_g)` with zero off-diagonal blocks. Requires a uniform
/// field tag.
pub fn block_diag(blocks: &[Matrix]) -> Result<Matrix, LinalgError> {
    assert!(!blocks.is_empty(), "block_diag of no blocks");
    let tag = blocks[0].tag;
    let tower = blocks[0].tower.clone();
    for b in blocks {
        if b.tag != tag {
            return Err(LinalgError::MixedFieldTags);
        }
        if *b.tower != *tower {
            return Err(LinalgError::TowerMismatch);
        }
    }
    let rows: usize = blocks.iter().map(|b| b.rows).sum();
    let cols: usize = blocks.iter().map(|b| b.cols).sum();
    let mut out = Matrix::zeros(tower, tag, rows, cols);
    let (mut r0, mut c0) = (0, 0);
    for b in blocks {
        for i in 0..b.rows {
            for j in 0..b.cols {
                out.set(r0 + i, c0 + j, b.get(i, j));
            }
        }
        r0 += b.rows;
        c0 += b.cols;
    }
    Ok(out)
}

/// Rank over `GF(q)` of the `h x |v|` coordinate matrix of a vector over
/// `GF(Q)`.
pub fn rank_q(tower: &Tower, v: &[Element]) -> usize {
    if v.is_empty() {
        return 0;
    }
    let h = tower.h() as usize;
    let coords: Vec<Vec<Element>> = v.iter().map(|&x| tower.coords(x)).collect();
    let m = Matrix::from_fn(tower.clone(), FieldTag::BaseQ, h, v.len(), |i, j| {
        coords[j][i]
    });
    m.rank()
}

/// Coordinates of `x` against an arbitrary GF(q)-basis of GF(Q), via a
/// linear solve over the base field.
pub fn coords_in_basis(
    tower: &Tower,
    basis: &[Element],
    x: Element,
) -> Result<Vec<Element>, LinalgError> {
    let h = tower.h() as usize;
    assert_eq!(basis.len(), h);
    let cols: Vec<Vec<Element>> = basis.iter().map(|&b| tower.coords(b)).collect();
    let a = Matrix::from_fn(tower.clone(), FieldTag::BaseQ, h, h, |i, j| cols[j][i]);
    let xc = tower.coords(x);
    let b = Matrix::from_fn(tower.clone(), FieldTag::BaseQ, h, 1, |i, _| xc[i]);
    let sol = a.solve(&b)?;
    Ok((0..h).map(|i| sol.get(i, 0)).collect())
}

pub use json::MatrixJson;

mod json {
    use super::*;
    use crate::gf::FieldDescriptor;

    /// Wire form: `{rows, cols, field, tag, entries}` with entries as
    /// element text forms in row-major order.
    #[derive(Debug, Clone, Serialize, Deserialize)]
    pub struct MatrixJson {
        pub rows: usize,
        pub cols: usize,
        pub field: FieldDescriptor,
        pub tag: FieldTag,
        pub entries: Vec<String>,
    }

    impl Matrix {
        pub fn to_json(&self, power: bool) -> MatrixJson {
            MatrixJson {
                rows: self.rows,
                cols: self.cols,
                field: self.tower.descriptor(),
                tag: self.tag,
                entries: self
                    .entries
                    .iter()
                    .map(|&x| self.tower.format_element(x, power))
                    .collect(),
            }
        }

        pub fn from_json(json: &MatrixJson) -> Result<Matrix, crate::gf::GfError> {
            let tower = FieldTower::from_descriptor(&json.field)?;
            Self::from_json_with_tower(json, tower)
        }

        pub fn from_json_with_tower(
            json: &MatrixJson,
            tower: Tower,
        ) -> Result<Matrix, crate::gf::GfError> {
            let entries = json
                .entries
                .iter()
                .map(|s| tower.parse_element(s))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(
                Matrix::new(tower, json.tag, json.rows, json.cols, entries)
                    .map_err(|e| crate::gf::GfError::ParseElement(e.to_string()))?,
            )
        }
    }
}
