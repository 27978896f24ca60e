//! The MR-code construction: Vandermonde local blocks `P1`, global power
//! block `P2`, its translation `beta = Gamma * P2` into the top field, and
//! the full parity-check matrix with `m` block-diagonal copies of `P1`
//! stacked over the `h` rows of twisted-evaluation blocks
//! `D(gamma^(i-1), beta, h, a)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf::{Element, FieldTower, GfError, Tower};
use crate::linalg::{block_diag, rank_q, FieldTag, LinalgError, Matrix, MatrixJson};
use crate::sumrank::{build_d, LrsError};

#[derive(Debug, Error)]
pub enum ConstructionError {
    #[error(transparent)]
    Gf(#[from] GfError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Lrs(#[from] LrsError),
    #[error("local distance parameter delta must be at least 2, got {0}")]
    DeltaTooSmall(u32),
    #[error("locality r must be at least 1")]
    ZeroLocality,
    #[error("at least one repair set is required")]
    ZeroRepairSets,
    #[error("h must be at least 1; with no global parities the code is just disjoint MDS locals")]
    NoGlobalParities,
    #[error("dimension k = m*r - h = {0} must be at least 1")]
    DimensionVanishes(i64),
    #[error("field too small: q = {q} but the alphas need q >= r + delta = {need}")]
    FieldTooSmallForAlphas { q: u64, need: u64 },
    #[error("field too small: q = {q} but the block multipliers need q >= m + 1 = {need}")]
    FieldTooSmallForBlocks { q: u64, need: u64 },
    #[error("expected {want} alphas, got {got}")]
    AlphaCount { got: usize, want: usize },
    #[error("alpha_{0} is zero")]
    AlphaZero(usize),
    #[error("alpha_{0} and alpha_{1} coincide")]
    AlphaRepeated(usize, usize),
    #[error("alpha_{0} is not in the base subfield GF(q)")]
    AlphaNotInSubfield(usize),
    #[error("supplied basis has {got} elements, expected h = {want}")]
    BasisCount { got: usize, want: usize },
    #[error("supplied basis is GF(q)-dependent (rank {0})")]
    BasisDependent(usize),
    #[error("parity-check matrix is rank deficient: rank {got}, expected {want}")]
    RankDeficient { got: usize, want: usize },
    #[error("matrix in code description has shape {rows}x{cols}, expected {want_rows}x{want_cols}")]
    ShapeMismatch {
        rows: usize,
        cols: usize,
        want_rows: usize,
        want_cols: usize,
    },
}

/// Parameter record for the construction. `q = p^e` is the base field,
/// `delta` the local distance, `r` the locality, `h` the number of global
/// parities, and `m` the number of repair sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MrParams {
    pub p: u64,
    pub e: u32,
    pub r: u32,
    pub delta: u32,
    pub h: u32,
    pub m: u32,
}

impl MrParams {
    /// Repair-set size `a = r + delta - 1`.
    pub fn a(&self) -> usize {
        (self.r + self.delta - 1) as usize
    }
    pub fn n(&self) -> usize {
        self.m as usize * self.a()
    }
    pub fn k(&self) -> usize {
        (self.m * self.r - self.h) as usize
    }
    pub fn q(&self) -> u64 {
        (0..self.e).fold(1u64, |acc, _| acc * self.p)
    }
    /// Top-field order `Q = q^h`.
    pub fn big_q(&self) -> u64 {
        (0..self.h).fold(1u64, |acc, _| acc * self.q())
    }
    /// Rows of the parity-check matrix: `m(delta-1) + h`.
    pub fn parity_rows(&self) -> usize {
        self.m as usize * (self.delta as usize - 1) + self.h as usize
    }

    pub fn validate(&self) -> Result<(), ConstructionError> {
        if self.delta < 2 {
            return Err(ConstructionError::DeltaTooSmall(self.delta));
        }
        if self.r == 0 {
            return Err(ConstructionError::ZeroLocality);
        }
        if self.m == 0 {
            return Err(ConstructionError::ZeroRepairSets);
        }
        if self.h == 0 {
            return Err(ConstructionError::NoGlobalParities);
        }
        let k = self.m as i64 * self.r as i64 - self.h as i64;
        if k < 1 {
            return Err(ConstructionError::DimensionVanishes(k));
        }
        let q = self.q();
        let need_alphas = (self.r + self.delta) as u64;
        if q < need_alphas {
            return Err(ConstructionError::FieldTooSmallForAlphas {
                q,
                need: need_alphas,
            });
        }
        let need_blocks = self.m as u64 + 1;
        if q < need_blocks {
            return Err(ConstructionError::FieldTooSmallForBlocks {
                q,
                need: need_blocks,
            });
        }
        Ok(())
    }

    /// Closed-form minimum Hamming distance of the constructed code:
    /// `(floor(h/r) + 1)(delta - 1) + h + 1`.
    pub fn predicted_distance(&self) -> usize {
        ((self.h / self.r) as usize + 1) * (self.delta as usize - 1) + self.h as usize + 1
    }
}

/// A constructed (or externally loaded) MR code instance.
#[derive(Debug, Clone)]
pub struct MrCode {
    params: MrParams,
    tower: Tower,
    alphas: Vec<Element>,
    gamma_basis: Vec<Element>,
    p1: Matrix,
    p2: Matrix,
    beta: Vec<Element>,
    parity: Matrix,
    repair_sets: Vec<Vec<usize>>,
    /// True when `parity` is exactly the matrix assembled from
    /// `(alphas, gamma_basis)`; the reduction verifier needs this.
    constructed: bool,
}

impl MrCode {
    pub fn params(&self) -> &MrParams {
        &self.params
    }
    pub fn tower(&self) -> &Tower {
        &self.tower
    }
    pub fn alphas(&self) -> &[Element] {
        &self.alphas
    }
    pub fn gamma_basis(&self) -> &[Element] {
        &self.gamma_basis
    }
    pub fn p1(&self) -> &Matrix {
        &self.p1
    }
    pub fn p2(&self) -> &Matrix {
        &self.p2
    }
    pub fn beta(&self) -> &[Element] {
        &self.beta
    }
    /// The parity-check matrix `H`, `m(delta-1)+h` rows by `n` columns.
    pub fn parity_check(&self) -> &Matrix {
        &self.parity
    }
    /// The partition of `[n]` into `m` contiguous repair sets of size `a`
    /// (0-based coordinates).
    pub fn repair_sets(&self) -> &[Vec<usize>] {
        &self.repair_sets
    }
    pub fn is_constructed(&self) -> bool {
        self.constructed
    }
    /// Which repair set a coordinate belongs to.
    pub fn set_of(&self, coord: usize) -> usize {
        coord / self.params.a()
    }
}

fn validate_alphas(
    tower: &Tower,
    alphas: &[Element],
    want: usize,
) -> Result<(), ConstructionError> {
    if alphas.len() != want {
        return Err(ConstructionError::AlphaCount {
            got: alphas.len(),
            want,
        });
    }
    for (i, &a) in alphas.iter().enumerate() {
        if a.is_zero() {
            return Err(ConstructionError::AlphaZero(i + 1));
        }
        if !tower.in_subfield(a) {
            return Err(ConstructionError::AlphaNotInSubfield(i + 1));
        }
        for (j, &b) in alphas.iter().enumerate().take(i) {
            if a == b {
                return Err(ConstructionError::AlphaRepeated(j + 1, i + 1));
            }
        }
    }
    Ok(())
}

/// The `(delta-1) x a` Vandermonde matrix with rows `alpha_j^0..alpha_j^(delta-2)`.
pub fn build_p1(
    tower: &Tower,
    alphas: &[Element],
    delta: u32,
) -> Result<Matrix, ConstructionError> {
    if delta < 2 {
        return Err(ConstructionError::DeltaTooSmall(delta));
    }
    validate_alphas(tower, alphas, alphas.len())?;
    Ok(Matrix::from_fn(
        tower.clone(),
        FieldTag::BaseQ,
        delta as usize - 1,
        alphas.len(),
        |i, j| tower.pow(alphas[j], i as u64),
    ))
}

/// The `h x a` matrix with rows `alpha_j^(delta-1)..alpha_j^(delta+h-2)`;
/// stacking `(P1; P2)` gives an `(h+delta-1) x a` Vandermonde matrix.
pub fn build_p2(
    tower: &Tower,
    alphas: &[Element],
    delta: u32,
    h: u32,
) -> Result<Matrix, ConstructionError> {
    if delta < 2 {
        return Err(ConstructionError::DeltaTooSmall(delta));
    }
    if h == 0 {
        return Err(ConstructionError::NoGlobalParities);
    }
    validate_alphas(tower, alphas, alphas.len())?;
    Ok(Matrix::from_fn(
        tower.clone(),
        FieldTag::BaseQ,
        h as usize,
        alphas.len(),
        |i, j| tower.pow(alphas[j], (delta as u64 - 1) + i as u64),
    ))
}

/// Translates each column of `P2` into an element of the top field:
/// `beta_j = sum_t gamma_t * (P2)_{t,j}`.
pub fn build_beta(tower: &Tower, basis: &[Element], p2: &Matrix) -> Vec<Element> {
    (0..p2.cols())
        .map(|j| {
            let mut acc = Element::ZERO;
            for (t, &g) in basis.iter().enumerate() {
                acc = tower.add(acc, tower.mul(g, p2.get(t, j)));
            }
            acc
        })
        .collect()
}

/// Builds the code with the default choices: `alpha_i = omega^(i-1)` and
/// `Gamma = (1, gamma, ..., gamma^(h-1))`.
pub fn build_code(params: &MrParams) -> Result<MrCode, ConstructionError> {
    build_code_with(params, None, None)
}

pub fn build_code_with(
    params: &MrParams,
    alphas: Option<Vec<Element>>,
    basis: Option<Vec<Element>>,
) -> Result<MrCode, ConstructionError> {
    params.validate()?;
    let tower = FieldTower::new(params.p, params.e, params.h)?;
    build_code_in_tower(params, tower, alphas, basis)
}

fn build_code_in_tower(
    params: &MrParams,
    tower: Tower,
    alphas: Option<Vec<Element>>,
    basis: Option<Vec<Element>>,
) -> Result<MrCode, ConstructionError> {
    let a = params.a();
    let alphas = match alphas {
        Some(v) => v,
        None => (0..a).map(|i| tower.pow(tower.omega(), i as u64)).collect(),
    };
    validate_alphas(&tower, &alphas, a)?;
    let basis = match basis {
        Some(v) => v,
        None => tower.gamma_basis().to_vec(),
    };
    if basis.len() != params.h as usize {
        return Err(ConstructionError::BasisCount {
            got: basis.len(),
            want: params.h as usize,
        });
    }
    let basis_rank = rank_q(&tower, &basis);
    if basis_rank != params.h as usize {
        return Err(ConstructionError::BasisDependent(basis_rank));
    }

    let p1 = build_p1(&tower, &alphas, params.delta)?;
    let p2 = build_p2(&tower, &alphas, params.delta, params.h)?;
    let beta = build_beta(&tower, &basis, &p2);
    let parity = assemble_parity(params, &tower, &p1, &beta)?;
    let want = params.parity_rows();
    let got = parity.rank();
    if got != want {
        return Err(ConstructionError::RankDeficient { got, want });
    }

    let repair_sets = (0..params.m as usize)
        .map(|i| (i * a..(i + 1) * a).collect())
        .collect();
    Ok(MrCode {
        params: *params,
        tower,
        alphas,
        gamma_basis: basis,
        p1,
        p2,
        beta,
        parity,
        repair_sets,
        constructed: true,
    })
}

fn assemble_parity(
    params: &MrParams,
    tower: &Tower,
    p1: &Matrix,
    beta: &[Element],
) -> Result<Matrix, ConstructionError> {
    let m = params.m as usize;
    let a = params.a();
    let locals = block_diag(&vec![p1.clone(); m])?;
    let mut global: Option<Matrix> = None;
    for i in 0..m {
        let block = build_d(tower, tower.gamma_pow(i as u64), beta, params.h as usize, a)?;
        global = Some(match global {
            None => block,
            Some(g) => g.hconcat(&block)?,
        });
    }
    Ok(locals.vconcat(&global.unwrap())?)
}

impl MrCode {
    /// Replaces the parity-check matrix wholesale (same shape required).
    /// The result is no longer tied to the construction, so only the
    /// direct verifier applies to it. Useful for sabotage experiments.
    pub fn with_parity_check(&self, parity: Matrix) -> Result<MrCode, ConstructionError> {
        if parity.rows() != self.parity.rows() || parity.cols() != self.parity.cols() {
            return Err(ConstructionError::ShapeMismatch {
                rows: parity.rows(),
                cols: parity.cols(),
                want_rows: self.parity.rows(),
                want_cols: self.parity.cols(),
            });
        }
        let mut out = self.clone();
        out.constructed = parity == out.parity;
        out.parity = parity;
        Ok(out)
    }
}

/// Wire form of a code instance: parameters, field modulus, alpha choices,
/// the parity-check matrix, and the repair-set partition (1-based).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CodeJson {
    pub params: MrParams,
    pub field: CodeFieldJson,
    pub alphas: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_basis: Option<Vec<String>>,
    #[serde(rename = "H")]
    pub h: MatrixJson,
    pub repair_sets: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CodeFieldJson {
    pub modulus: Vec<u64>,
}

impl MrCode {
    pub fn to_json(&self, power: bool) -> CodeJson {
        CodeJson {
            params: self.params,
            field: CodeFieldJson {
                modulus: self.tower.modulus().to_vec(),
            },
            alphas: self
                .alphas
                .iter()
                .map(|&x| self.tower.format_element(x, power))
                .collect(),
            gamma_basis: Some(
                self.gamma_basis
                    .iter()
                    .map(|&x| self.tower.format_element(x, power))
                    .collect(),
            ),
            h: self.parity.to_json(power),
            repair_sets: self
                .repair_sets
                .iter()
                .map(|s| s.iter().map(|&c| c + 1).collect())
                .collect(),
        }
    }

    /// Loads a code description. The parity-check matrix in the file is
    /// authoritative; when it matches the matrix the construction would
    /// produce from the recorded `(alphas, gamma_basis)`, the instance is
    /// marked constructed and the reduction verifier applies.
    pub fn from_json(json: &CodeJson) -> Result<MrCode, ConstructionError> {
        let params = json.params;
        params.validate()?;
        let tower = FieldTower::with_modulus(params.p, params.e, params.h, &json.field.modulus)?;
        let alphas = json
            .alphas
            .iter()
            .map(|s| tower.parse_element(s))
            .collect::<Result<Vec<_>, _>>()?;
        let basis = match &json.gamma_basis {
            Some(v) => Some(
                v.iter()
                    .map(|s| tower.parse_element(s))
                    .collect::<Result<Vec<_>, _>>()?,
            ),
            None => None,
        };
        let mut code = build_code_in_tower(&params, tower.clone(), Some(alphas), basis)?;
        let loaded = Matrix::from_json_with_tower(&json.h, tower)?;
        if loaded.rows() != params.parity_rows() || loaded.cols() != params.n() {
            return Err(ConstructionError::ShapeMismatch {
                rows: loaded.rows(),
                cols: loaded.cols(),
                want_rows: params.parity_rows(),
                want_cols: params.n(),
            });
        }
        if loaded != code.parity {
            let want = params.parity_rows();
            let got = loaded.rank();
            if got != want {
                return Err(ConstructionError::RankDeficient { got, want });
            }
            code.parity = loaded;
            code.constructed = false;
        }
        Ok(code)
    }
}
