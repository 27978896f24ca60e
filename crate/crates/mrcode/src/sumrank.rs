//! Linearized Reed-Solomon machinery: twisted-Frobenius evaluation
//! matrices, sum-rank weight and distance, brute-force MSRD checking, and
//! the rank identity for products with block-diagonal base-field matrices.

use thiserror::Error;

use crate::gf::{Element, Tower};
use crate::linalg::{block_diag, rank_q, FieldTag, Matrix};

/// Enumeration ceiling for brute-force sum-rank distance.
pub const ENUMERATION_LIMIT: u64 = 2_000_000;

#[derive(Debug, Error)]
pub enum LrsError {
    #[error("length partition must have at least one positive part")]
    EmptyPartition,
    #[error("number of blocks g={g} exceeds q-1={limit}")]
    TooManyBlocks { g: usize, limit: u64 },
    #[error("partition part L_{index}={part} exceeds the top extension degree {max}")]
    PartTooLong { index: usize, part: usize, max: u32 },
    #[error("basis argument has {got} elements, need at least {need}")]
    BasisTooShort { got: usize, need: usize },
    #[error("basis prefix of length {len} is GF(q)-dependent (rank {rank})")]
    BasisDependent { len: usize, rank: usize },
    #[error("dimension k={k} out of range 1..={n}")]
    BadDimension { k: usize, n: usize },
    #[error("codeword length {got} does not match partition total {want}")]
    LengthMismatch { got: usize, want: usize },
    #[error("W_{index} has {got} rows, expected L_{index}={want}")]
    BlockRowMismatch { index: usize, got: usize, want: usize },
    #[error("enumeration of {0} codewords exceeds the desk-scale limit")]
    TooLarge(u128),
    #[error(transparent)]
    Linalg(#[from] crate::linalg::LinalgError),
}

/// `(L_1, ..., L_g)` with `N = sum L_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LengthPartition {
    parts: Vec<usize>,
}

impl LengthPartition {
    pub fn new(parts: Vec<usize>) -> Result<Self, LrsError> {
        if parts.is_empty() || parts.iter().any(|&p| p == 0) {
            return Err(LrsError::EmptyPartition);
        }
        Ok(LengthPartition { parts })
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn g(&self) -> usize {
        self.parts.len()
    }

    pub fn total(&self) -> usize {
        self.parts.iter().sum()
    }

    /// Start offset of each block in a concatenated codeword.
    pub fn offsets(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.parts.len());
        let mut acc = 0;
        for &p in &self.parts {
            out.push(acc);
            acc += p;
        }
        out
    }
}

/// The `k x ell` matrix whose first row is `B|_[ell]` and whose row `i+1`
/// applies `D^i_alpha` entrywise.
pub fn build_d(
    tower: &Tower,
    alpha: Element,
    basis: &[Element],
    k: usize,
    ell: usize,
) -> Result<Matrix, LrsError> {
    if ell > basis.len() {
        return Err(LrsError::BasisTooShort {
            got: basis.len(),
            need: ell,
        });
    }
    Ok(Matrix::from_fn(
        tower.clone(),
        FieldTag::TopQ,
        k,
        ell,
        |i, j| tower.d_op(alpha, i as u64, basis[j]),
    ))
}

/// Column linearity of the twisted evaluation matrix: for base-field `A`,
/// `D(alpha, B, k, ell) * A == D(alpha, B|_[ell] * A, k, cols(A))`.
/// Always true; exists as a checkable predicate.
pub fn column_linearity_check(
    tower: &Tower,
    alpha: Element,
    basis: &[Element],
    k: usize,
    ell: usize,
    a: &Matrix,
) -> Result<bool, LrsError> {
    assert_eq!(a.rows(), ell, "A must have ell rows");
    let lhs = build_d(tower, alpha, basis, k, ell)?.mul(a)?;
    let mapped: Vec<Element> = (0..a.cols())
        .map(|j| {
            let mut acc = Element::ZERO;
            for (i, &b) in basis.iter().take(ell).enumerate() {
                acc = tower.add(acc, tower.mul(b, a.get(i, j)));
            }
            acc
        })
        .collect();
    let rhs = build_d(tower, alpha, &mapped, k, a.cols())?;
    Ok(lhs == rhs)
}

/// A narrow-sense linearized Reed-Solomon code with its concatenated
/// generator `(D(gamma^0, B, k, L_1), ..., D(gamma^(g-1), B, k, L_g))`.
#[derive(Debug, Clone)]
pub struct LrsCode {
    tower: Tower,
    k: usize,
    partition: LengthPartition,
    basis: Vec<Element>,
    generator: Matrix,
}

impl LrsCode {
    pub fn tower(&self) -> &Tower {
        &self.tower
    }
    pub fn k(&self) -> usize {
        self.k
    }
    pub fn partition(&self) -> &LengthPartition {
        &self.partition
    }
    pub fn basis(&self) -> &[Element] {
        &self.basis
    }
    pub fn generator(&self) -> &Matrix {
        &self.generator
    }
    pub fn n(&self) -> usize {
        self.partition.total()
    }
}

/// Builds the code, checking each defining constraint individually:
/// `g <= q-1`, every `L_i <= L <= h`, `B|_[L]` independent over GF(q),
/// and `1 <= k <= N`.
pub fn build_lrs_generator(
    tower: &Tower,
    k: usize,
    partition: LengthPartition,
    basis: &[Element],
) -> Result<LrsCode, LrsError> {
    let g = partition.g();
    let q = tower.q();
    if g as u64 > q - 1 {
        return Err(LrsError::TooManyBlocks { g, limit: q - 1 });
    }
    let max_part = *partition.parts().iter().max().unwrap();
    if max_part > tower.h() as usize {
        let index = partition
            .parts()
            .iter()
            .position(|&p| p == max_part)
            .unwrap();
        return Err(LrsError::PartTooLong {
            index: index + 1,
            part: max_part,
            max: tower.h(),
        });
    }
    if basis.len() < max_part {
        return Err(LrsError::BasisTooShort {
            got: basis.len(),
            need: max_part,
        });
    }
    let prefix_rank = rank_q(tower, &basis[..max_part]);
    if prefix_rank != max_part {
        return Err(LrsError::BasisDependent {
            len: max_part,
            rank: prefix_rank,
        });
    }
    let n = partition.total();
    if k == 0 || k > n {
        return Err(LrsError::BadDimension { k, n });
    }

    let mut generator: Option<Matrix> = None;
    for (i, &part) in partition.parts().iter().enumerate() {
        let block = build_d(tower, tower.gamma_pow(i as u64), basis, k, part)?;
        generator = Some(match generator {
            None => block,
            Some(g) => g.hconcat(&block)?,
        });
    }
    let generator = generator.unwrap();
    debug_assert_eq!(generator.rank(), k);
    Ok(LrsCode {
        tower: tower.clone(),
        k,
        partition,
        basis: basis.to_vec(),
        generator,
    })
}

/// Sum of the GF(q)-ranks of the codeword's partition segments.
pub fn sum_rank_weight(
    tower: &Tower,
    word: &[Element],
    partition: &LengthPartition,
) -> Result<usize, LrsError> {
    if word.len() != partition.total() {
        return Err(LrsError::LengthMismatch {
            got: word.len(),
            want: partition.total(),
        });
    }
    let mut total = 0;
    let mut off = 0;
    for &part in partition.parts() {
        total += rank_q(tower, &word[off..off + part]);
        off += part;
    }
    Ok(total)
}

pub fn sum_rank_distance(
    tower: &Tower,
    a: &[Element],
    b: &[Element],
    partition: &LengthPartition,
) -> Result<usize, LrsError> {
    if a.len() != b.len() {
        return Err(LrsError::LengthMismatch {
            got: b.len(),
            want: a.len(),
        });
    }
    let diff: Vec<Element> = a.iter().zip(b).map(|(&x, &y)| tower.sub(x, y)).collect();
    sum_rank_weight(tower, &diff, partition)
}

/// Minimum sum-rank weight over all nonzero codewords, by enumerating the
/// message space in canonical integer-code order. For an LRS code this must
/// equal `N - k + 1`.
pub fn msrd_min_distance(code: &LrsCode) -> Result<usize, LrsError> {
    let t = code.tower();
    let q1 = t.order();
    let count = (q1 as u128).pow(code.k as u32);
    if count > ENUMERATION_LIMIT as u128 {
        return Err(LrsError::TooLarge(count));
    }
    let n = code.n();
    let mut best = usize::MAX;
    let mut message = vec![Element::ZERO; code.k];
    for idx in 1..count as u64 {
        let mut c = idx;
        for slot in message.iter_mut() {
            *slot = t.element(c % q1).unwrap();
            c /= q1;
        }
        let mut word = vec![Element::ZERO; n];
        for (i, &mi) in message.iter().enumerate() {
            if mi.is_zero() {
                continue;
            }
            for (j, w) in word.iter_mut().enumerate() {
                *w = t.add(*w, t.mul(mi, code.generator.get(i, j)));
            }
        }
        let wt = sum_rank_weight(t, &word, &code.partition)?;
        if wt < best {
            best = wt;
        }
    }
    Ok(best)
}

/// The rank identity for generator-times-block-diagonal products:
/// `rank(G diag(W_1..W_g)) == min(k, sum rank(W_i))`. Always true for an
/// LRS generator; exists as a checkable predicate.
pub fn theorem1_rank_check(code: &LrsCode, blocks: &[Matrix]) -> Result<bool, LrsError> {
    if blocks.len() != code.partition.g() {
        return Err(LrsError::LengthMismatch {
            got: blocks.len(),
            want: code.partition.g(),
        });
    }
    for (i, (w, &part)) in blocks.iter().zip(code.partition.parts()).enumerate() {
        if w.rows() != part {
            return Err(LrsError::BlockRowMismatch {
                index: i + 1,
                got: w.rows(),
                want: part,
            });
        }
    }
    let diag = block_diag(blocks)?;
    let product = code.generator.mul(&diag)?;
    let rank_sum: usize = blocks.iter().map(|w| w.rank()).sum();
    Ok(product.rank() == code.k.min(rank_sum))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::FieldTower;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gf16() -> Tower {
        FieldTower::new(2, 2, 2).unwrap()
    }

    fn base_lrs(t: &Tower) -> LrsCode {
        let partition = LengthPartition::new(vec![2, 2]).unwrap();
        build_lrs_generator(t, 2, partition, t.gamma_basis()).unwrap()
    }

    #[test]
    fn build_d_examples() {
        let t = gf16();
        let b = t.gamma_basis().to_vec();
        // k = 1: single row (beta_1, ..., beta_ell)
        let d1 = build_d(&t, t.gamma(), &b, 1, 2).unwrap();
        assert_eq!(d1.row(0), &b[..]);
        // alpha = 1: second row is beta_j^q
        let d2 = build_d(&t, Element::ONE, &b, 2, 2).unwrap();
        for j in 0..2 {
            assert_eq!(d2.get(1, j), t.frobenius(b[j], 1));
        }
        // all-zero basis argument gives a zero matrix
        let z = build_d(&t, t.gamma(), &[Element::ZERO; 3], 2, 3).unwrap();
        assert!(z.entries().iter().all(|x| x.is_zero()));
        assert!(build_d(&t, t.gamma(), &b, 2, 3).is_err());
    }

    #[test]
    fn column_linearity_trivial_cases() {
        let t = gf16();
        let b = t.gamma_basis().to_vec();
        let id = Matrix::identity(t.clone(), FieldTag::BaseQ, 2);
        assert!(column_linearity_check(&t, t.gamma(), &b, 2, 2, &id).unwrap());
        let z = Matrix::zeros(t.clone(), FieldTag::BaseQ, 2, 3);
        assert!(column_linearity_check(&t, t.gamma(), &b, 2, 2, &z).unwrap());
    }

    #[test]
    fn column_linearity_random() {
        let t = gf16();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let sub = t.subfield_elements();
        let els: Vec<Element> = t.elements().collect();
        let mut checked = 0;
        while checked < 1000 {
            let k = rng.random_range(1..4);
            let ell = rng.random_range(1..3);
            let basis: Vec<Element> = (0..ell)
                .map(|_| els[rng.random_range(0..els.len())])
                .collect();
            let cols = rng.random_range(1..4);
            let a = Matrix::from_fn(t.clone(), FieldTag::BaseQ, ell, cols, |_, _| {
                sub[rng.random_range(0..sub.len())]
            });
            let alpha = els[rng.random_range(0..els.len())];
            assert!(column_linearity_check(&t, alpha, &basis, k, ell, &a).unwrap());
            checked += 1;
        }
    }

    #[test]
    fn lrs_special_cases() {
        // Hamming special case: all-ones partition over h = 1
        let t = FieldTower::new(2, 2, 1).unwrap(); // GF(4), q = 4, Q = 4
        let partition = LengthPartition::new(vec![1, 1, 1]).unwrap();
        let code = build_lrs_generator(&t, 2, partition, t.gamma_basis()).unwrap();
        // generator is Vandermonde-like: row i is D^i applied to blocks;
        // block j uses multiplier gamma^j, so entry (i, j) = norm_i(gamma^j)
        let g = code.generator();
        assert_eq!(g.rows(), 2);
        assert_eq!(g.cols(), 3);
        assert_eq!(g.rank(), 2);

        // rank-metric special case: g = 1, partition (N)
        let t16 = gf16();
        let partition = LengthPartition::new(vec![2]).unwrap();
        let code = build_lrs_generator(&t16, 1, partition, t16.gamma_basis()).unwrap();
        assert_eq!(code.generator().rows(), 1);
        assert_eq!(code.generator().cols(), 2);

        // GF(16)/GF(4), k = 2, partition (2,2), B = Gamma
        let code = base_lrs(&t16);
        assert_eq!(code.generator().rows(), 2);
        assert_eq!(code.generator().cols(), 4);
        assert_eq!(code.generator().rank(), 2);
    }

    #[test]
    fn lrs_constraint_errors_are_named() {
        let t = gf16();
        let b = t.gamma_basis().to_vec();
        // g > q - 1 = 3
        let p4 = LengthPartition::new(vec![1, 1, 1, 1]).unwrap();
        assert!(matches!(
            build_lrs_generator(&t, 2, p4, &b),
            Err(LrsError::TooManyBlocks { g: 4, .. })
        ));
        // L_i > h
        let p_long = LengthPartition::new(vec![3]).unwrap();
        assert!(matches!(
            build_lrs_generator(&t, 2, p_long, &b),
            Err(LrsError::PartTooLong { .. })
        ));
        // dependent basis prefix
        let dep = vec![Element::ONE, t.omega()];
        let p22 = LengthPartition::new(vec![2, 2]).unwrap();
        assert!(matches!(
            build_lrs_generator(&t, 2, p22.clone(), &dep),
            Err(LrsError::BasisDependent { .. })
        ));
        // k out of range
        assert!(matches!(
            build_lrs_generator(&t, 5, p22, &b),
            Err(LrsError::BadDimension { k: 5, n: 4 })
        ));
    }

    #[test]
    fn sum_rank_weight_examples() {
        let t = gf16();
        // unit partition reduces to Hamming weight
        let unit = LengthPartition::new(vec![1; 4]).unwrap();
        let els: Vec<Element> = t.elements().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let v: Vec<Element> = (0..4)
                .map(|_| els[rng.random_range(0..els.len())])
                .collect();
            let hamming = v.iter().filter(|x| !x.is_zero()).count();
            assert_eq!(sum_rank_weight(&t, &v, &unit).unwrap(), hamming);
        }
        let p22 = LengthPartition::new(vec![2, 2]).unwrap();
        assert_eq!(
            sum_rank_weight(&t, &[Element::ZERO; 4], &p22).unwrap(),
            0
        );
        // (1, gamma^5, 0, 0): first block spans a 1-dim GF(4)-space
        let v = vec![Element::ONE, t.pow(t.gamma(), 5), Element::ZERO, Element::ZERO];
        assert_eq!(sum_rank_weight(&t, &v, &p22).unwrap(), 1);
        assert!(sum_rank_weight(&t, &v[..3], &p22).is_err());
    }

    #[test]
    fn sum_rank_distance_is_a_metric_sampled() {
        let t = gf16();
        let p = LengthPartition::new(vec![2, 1]).unwrap();
        let els: Vec<Element> = t.elements().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..200 {
            let v = |rng: &mut ChaCha8Rng| -> Vec<Element> {
                (0..3).map(|_| els[rng.random_range(0..els.len())]).collect()
            };
            let (a, b, c) = (v(&mut rng), v(&mut rng), v(&mut rng));
            let dab = sum_rank_distance(&t, &a, &b, &p).unwrap();
            let dba = sum_rank_distance(&t, &b, &a, &p).unwrap();
            let dac = sum_rank_distance(&t, &a, &c, &p).unwrap();
            let dcb = sum_rank_distance(&t, &c, &b, &p).unwrap();
            assert_eq!(dab, dba);
            assert_eq!(dab == 0, a == b);
            assert!(dab <= dac + dcb);
        }
    }

    #[test]
    fn msrd_distance_examples() {
        let t = gf16();
        // k = N: the full space contains weight-1 words
        let p22 = LengthPartition::new(vec![2, 2]).unwrap();
        let full = build_lrs_generator(&t, 4, p22.clone(), t.gamma_basis()).unwrap();
        assert_eq!(msrd_min_distance(&full).unwrap(), 1);
        // k = 2, partition (2,2): enumeration of 256 codewords gives 3 = N-k+1
        let code = base_lrs(&t);
        assert_eq!(msrd_min_distance(&code).unwrap(), 3);
    }

    #[test]
    fn msrd_matches_hamming_brute_force_in_unit_partition() {
        let t = FieldTower::new(2, 2, 1).unwrap(); // GF(4) over GF(4)
        let partition = LengthPartition::new(vec![1, 1, 1]).unwrap();
        let code = build_lrs_generator(&t, 2, partition.clone(), t.gamma_basis()).unwrap();
        let d_sr = msrd_min_distance(&code).unwrap();
        // independent Hamming oracle over the same generator
        let q1 = t.order();
        let mut best = usize::MAX;
        for idx in 1..q1 * q1 {
            let m = [t.element(idx % q1).unwrap(), t.element(idx / q1).unwrap()];
            let mut wt = 0;
            for j in 0..3 {
                let mut c = Element::ZERO;
                for (i, &mi) in m.iter().enumerate() {
                    c = t.add(c, t.mul(mi, code.generator().get(i, j)));
                }
                if !c.is_zero() {
                    wt += 1;
                }
            }
            best = best.min(wt);
        }
        assert_eq!(d_sr, best);
        assert_eq!(d_sr, code.n() - code.k() + 1);
    }

    #[test]
    fn theorem1_trivial_cases() {
        let t = gf16();
        let code = base_lrs(&t);
        let zeros: Vec<Matrix> = code
            .partition()
            .parts()
            .iter()
            .map(|&l| Matrix::zeros(t.clone(), FieldTag::BaseQ, l, 2))
            .collect();
        assert!(theorem1_rank_check(&code, &zeros).unwrap());
        let ids: Vec<Matrix> = code
            .partition()
            .parts()
            .iter()
            .map(|&l| Matrix::identity(t.clone(), FieldTag::BaseQ, l))
            .collect();
        assert!(theorem1_rank_check(&code, &ids).unwrap());
    }

    #[test]
    fn theorem1_random_stratified() {
        let t = gf16();
        let code = base_lrs(&t);
        let sub = t.subfield_elements();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let (mut below, mut at_or_above) = (0, 0);
        while below < 100 || at_or_above < 100 {
            let blocks: Vec<Matrix> = code
                .partition()
                .parts()
                .iter()
                .map(|&l| {
                    let c = rng.random_range(1..4);
                    Matrix::from_fn(t.clone(), FieldTag::BaseQ, l, c, |_, _| {
                        sub[rng.random_range(0..sub.len())]
                    })
                })
                .collect();
            let rank_sum: usize = blocks.iter().map(|b| b.rank()).sum();
            if rank_sum < code.k() {
                below += 1;
            } else {
                at_or_above += 1;
            }
            assert!(theorem1_rank_check(&code, &blocks).unwrap());
        }
    }

    #[test]
    fn lrs_is_msrd_for_several_partitions() {
        let t = gf16();
        for (parts, k) in [
            (vec![2, 2], 2),
            (vec![2, 2], 3),
            (vec![1, 2], 2),
            (vec![2, 1, 1], 2),
        ] {
            let p = LengthPartition::new(parts).unwrap();
            let n = p.total();
            let code = build_lrs_generator(&t, k, p, t.gamma_basis()).unwrap();
            assert_eq!(msrd_min_distance(&code).unwrap(), n - k + 1);
        }
    }
}
