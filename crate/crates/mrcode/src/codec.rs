//! Systematic-free encode and erasure decode against a parity-check matrix.
//!
//! The generator is the row-reduced basis of the right kernel of `H`, so
//! it is canonical for a given code instance. Erasure decoding solves
//! `H|_E x = -H|_K c|_K` for the erased coordinates `E` given the known
//! ones `K`, and succeeds exactly when `H|_E` has full column rank.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf::{Element, GfError, Tower};
use crate::linalg::{FieldTag, LinalgError, Matrix};
use crate::mrcons::MrCode;

#[derive(Debug, Error)]
pub enum CodecError {
    #[error(transparent)]
    Gf(#[from] GfError),
    #[error("message has {got} symbols, expected k = {want}")]
    MessageLength { got: usize, want: usize },
    #[error("word has {got} symbols, expected n = {want}")]
    WordLength { got: usize, want: usize },
    #[error("erasure pattern is not recoverable: {erased} erasures but H restricted to them has rank {rank}")]
    UnrecoverablePattern { erased: usize, rank: usize },
    #[error("known symbols are not consistent with any codeword")]
    InconsistentWord,
}

/// A received word: `None` marks an erased coordinate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codeword {
    pub symbols: Vec<Option<Element>>,
}

impl Codeword {
    pub fn from_full(symbols: &[Element]) -> Codeword {
        Codeword {
            symbols: symbols.iter().map(|&s| Some(s)).collect(),
        }
    }

    pub fn erase(&mut self, coords: &[usize]) {
        for &c in coords {
            self.symbols[c] = None;
        }
    }

    pub fn erased_positions(&self) -> Vec<usize> {
        (0..self.symbols.len())
            .filter(|&i| self.symbols[i].is_none())
            .collect()
    }

    pub fn to_json(&self, tower: &Tower, power: bool) -> CodewordJson {
        CodewordJson {
            symbols: self
                .symbols
                .iter()
                .map(|s| s.map(|x| tower.format_element(x, power)))
                .collect(),
        }
    }

    pub fn from_json(json: &CodewordJson, tower: &Tower) -> Result<Codeword, CodecError> {
        let symbols = json
            .symbols
            .iter()
            .map(|s| s.as_deref().map(|t| tower.parse_element(t)).transpose())
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Codeword { symbols })
    }
}

/// Wire form of a received word; `null` is the erasure sentinel.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CodewordJson {
    pub symbols: Vec<Option<String>>,
}

/// Canonical `k x n` generator matrix: the row-reduced transpose of the
/// right kernel of `H`. Satisfies `G H^T = 0`.
pub fn generator(code: &MrCode) -> Matrix {
    let kernel = code.parity_check().null_space();
    let (g, _) = kernel.transpose().rref();
    g
}

/// `message * G` for a `k`-symbol message over the top field.
pub fn encode(code: &MrCode, g: &Matrix, message: &[Element]) -> Result<Vec<Element>, CodecError> {
    let k = code.params().k();
    if message.len() != k {
        return Err(CodecError::MessageLength {
            got: message.len(),
            want: k,
        });
    }
    let t = code.tower();
    let row = Matrix::from_fn(t.clone(), FieldTag::TopQ, 1, k, |_, j| message[j]);
    let word = row.mul(g).expect("generator shape fixed by construction");
    Ok(word.row(0).to_vec())
}

/// The syndrome `H c^T` of a full word; zero exactly for codewords.
pub fn syndrome(code: &MrCode, word: &[Element]) -> Result<Vec<Element>, CodecError> {
    let n = code.params().n();
    if word.len() != n {
        return Err(CodecError::WordLength {
            got: word.len(),
            want: n,
        });
    }
    let t = code.tower();
    let col = Matrix::from_fn(t.clone(), FieldTag::TopQ, n, 1, |i, _| word[i]);
    let s = code
        .parity_check()
        .mul(&col)
        .expect("parity-check shape fixed by construction");
    Ok((0..s.rows()).map(|i| s.get(i, 0)).collect())
}

/// Fills in the erased coordinates of `word`, or reports why it cannot.
pub fn decode_erasures(code: &MrCode, word: &Codeword) -> Result<Vec<Element>, CodecError> {
    let n = code.params().n();
    if word.symbols.len() != n {
        return Err(CodecError::WordLength {
            got: word.symbols.len(),
            want: n,
        });
    }
    let t = code.tower();
    let h = code.parity_check();
    let erased = word.erased_positions();

    // Right-hand side: minus the parity contribution of the known symbols.
    let mut rhs = Matrix::zeros(t.clone(), FieldTag::TopQ, h.rows(), 1);
    for i in 0..h.rows() {
        let mut acc = Element::ZERO;
        for (j, s) in word.symbols.iter().enumerate() {
            if let Some(x) = s {
                acc = t.add(acc, t.mul(h.get(i, j), *x));
            }
        }
        rhs.set(i, 0, t.neg(acc));
    }

    if erased.is_empty() {
        if (0..h.rows()).any(|i| !rhs.get(i, 0).is_zero()) {
            return Err(CodecError::InconsistentWord);
        }
        return Ok(word.symbols.iter().map(|s| s.unwrap()).collect());
    }

    let restricted = h
        .project_cols(&erased)
        .expect("erased positions are in range");
    let rank = restricted.rank();
    if rank < erased.len() {
        return Err(CodecError::UnrecoverablePattern {
            erased: erased.len(),
            rank,
        });
    }
    let solution = match restricted.solve(&rhs) {
        Ok(s) => s,
        Err(LinalgError::Inconsistent) => return Err(CodecError::InconsistentWord),
        Err(e) => panic!("erasure solve failed unexpectedly: {e}"),
    };

    let mut out: Vec<Element> = Vec::with_capacity(n);
    let mut next = 0usize;
    for s in &word.symbols {
        match s {
            Some(x) => out.push(*x),
            None => {
                out.push(solution.get(next, 0));
                next += 1;
            }
        }
    }
    Ok(out)
}
