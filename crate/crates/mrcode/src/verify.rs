//! The claim-checking engine: exhaustive verification of maximal
//! recoverability by two independent methods, brute-force minimum
//! distance, and the bound calculators.
//!
//! Checking only the maximal erasure patterns — those of size
//! `m(delta-1)+h` meeting every repair set in at least `delta-1`
//! positions — suffices, because full column rank of `H` restricted to a
//! set is inherited by all of its subsets.

use std::collections::BTreeSet;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{self, CodecError};
use crate::gf::Element;
use crate::linalg::{FieldTag, LinalgError, Matrix};
use crate::mrcons::{ConstructionError, MrCode, MrParams};
use crate::sumrank::{build_d, LrsError};

/// Hard ceiling on the number of maximal patterns a single run will walk.
pub const PATTERN_LIMIT: u128 = 10_000_000;
/// Ceiling on the number of codewords for brute-force distance.
pub const DISTANCE_LIMIT: u128 = 4_000_000;
/// Ceiling on the number of rank checks the literal-definition verifier
/// will attempt.
pub const DEFINITION_LIMIT: u128 = 10_000_000;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("pattern space too large: {count} maximal patterns, limit {PATTERN_LIMIT}")]
    PatternSpaceTooLarge { count: u128 },
    #[error("instance too large for the literal definition check: {checks} rank checks, limit {DEFINITION_LIMIT}")]
    InstanceTooLarge { checks: u128 },
    #[error("message space too large for brute-force distance: {words} words, limit {DISTANCE_LIMIT}")]
    DistanceSpaceTooLarge { words: u128 },
    #[error("the reduction verifier needs a code assembled by the construction, not a foreign parity-check matrix")]
    NotConstructed,
    #[error("repair set {set} has {erased} erasures, fewer than the delta-1 = {need} the reduction requires")]
    PreconditionViolated {
        set: usize,
        erased: usize,
        need: usize,
    },
    #[error("the field-size lower bound needs h >= 2; for h = 1 the optimal field size is Theta(r+delta-1)")]
    BoundNeedsGlobalParities,
    #[error("the field-size lower bound needs at least two repair sets, got m = {0}")]
    BoundNeedsTwoSets(u32),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Lrs(#[from] LrsError),
    #[error(transparent)]
    Construction(#[from] ConstructionError),
    #[error(transparent)]
    Codec(#[from] CodecError),
}

/// A set of erased coordinates (0-based, sorted) with the derived count
/// per repair set.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ErasurePattern {
    pub erased: Vec<usize>,
    pub per_set: Vec<usize>,
}

impl ErasurePattern {
    pub fn new(params: &MrParams, mut erased: Vec<usize>) -> ErasurePattern {
        erased.sort_unstable();
        let a = params.a();
        let mut per_set = vec![0usize; params.m as usize];
        for &c in &erased {
            per_set[c / a] += 1;
        }
        ErasurePattern { erased, per_set }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Direct,
    Reduction,
    Definition,
}

#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub params: MrParams,
    pub method: Method,
    pub total_patterns: u64,
    pub failures: Vec<ErasurePattern>,
    pub min_distance: Option<usize>,
    pub elapsed_ms: u128,
}

impl VerificationReport {
    pub fn is_mr(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn to_json(&self) -> ReportJson {
        ReportJson {
            params: self.params,
            method: self.method,
            total_patterns: self.total_patterns,
            failures: self
                .failures
                .iter()
                .map(|f| FailureJson {
                    erased: f.erased.iter().map(|&c| c + 1).collect(),
                })
                .collect(),
            min_distance: self.min_distance,
            elapsed_ms: self.elapsed_ms,
        }
    }
}

/// Wire form of a verification report; erased coordinates are 1-based.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportJson {
    pub params: MrParams,
    pub method: Method,
    pub total_patterns: u64,
    pub failures: Vec<FailureJson>,
    pub min_distance: Option<usize>,
    pub elapsed_ms: u128,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FailureJson {
    pub erased: Vec<usize>,
}

fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Number of maximal patterns, by convolving per-set erasure counts.
pub fn count_maximal_patterns(params: &MrParams) -> u128 {
    let a = params.a() as u64;
    let lo = params.delta as u64 - 1;
    let target = params.parity_rows();
    let mut dp = vec![0u128; target + 1];
    dp[0] = 1;
    for _ in 0..params.m {
        let mut next = vec![0u128; target + 1];
        for (j, &ways) in dp.iter().enumerate() {
            if ways == 0 {
                continue;
            }
            for c in lo..=a.min((target - j) as u64) {
                next[j + c as usize] += ways * binomial(a, c);
            }
        }
        dp = next;
    }
    dp[target]
}

/// Every `E` of size `m(delta-1)+h` with `|E ∩ S_i| >= delta-1` for all
/// `i`, each exactly once, in lexicographic order of the sorted
/// coordinate lists.
pub fn enumerate_maximal_patterns(params: &MrParams) -> Vec<ErasurePattern> {
    let mut out = Vec::new();
    for_each_maximal_pattern(params, &mut |erased| {
        out.push(ErasurePattern::new(params, erased.to_vec()));
    });
    out
}

fn for_each_maximal_pattern(params: &MrParams, f: &mut impl FnMut(&[usize])) {
    let n = params.n();
    let a = params.a();
    let target = params.parity_rows();
    let need_per_set = params.delta as usize - 1;
    let mut chosen: Vec<usize> = Vec::with_capacity(target);
    let mut set_counts = vec![0usize; params.m as usize];
    dfs(
        0, n, a, target, need_per_set, &mut chosen, &mut set_counts, f,
    );
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    pos: usize,
    n: usize,
    a: usize,
    target: usize,
    need_per_set: usize,
    chosen: &mut Vec<usize>,
    set_counts: &mut Vec<usize>,
    f: &mut impl FnMut(&[usize]),
) {
    // entering a new repair set: the previous one must have met its quota
    if pos > 0 && pos % a == 0 && set_counts[pos / a - 1] < need_per_set {
        return;
    }
    if chosen.len() == target {
        // the current and all later sets still need their delta-1 erasures
        if (pos / a..set_counts.len()).all(|s| set_counts[s] >= need_per_set) {
            f(chosen);
        }
        return;
    }
    if pos == n || target - chosen.len() > n - pos {
        return;
    }
    let set = pos / a;
    chosen.push(pos);
    set_counts[set] += 1;
    dfs(pos + 1, n, a, target, need_per_set, chosen, set_counts, f);
    set_counts[set] -= 1;
    chosen.pop();
    dfs(pos + 1, n, a, target, need_per_set, chosen, set_counts, f);
}

/// The `H|_E` criterion: recoverable iff the erased columns of the
/// parity-check matrix are linearly independent.
pub fn is_recoverable_direct(code: &MrCode, pattern: &ErasurePattern) -> bool {
    if pattern.erased.is_empty() {
        return true;
    }
    let h = code.parity_check();
    if pattern.erased.len() > h.rows() {
        return false;
    }
    let restricted = h
        .project_cols(&pattern.erased)
        .expect("pattern coordinates are within [n]");
    restricted.rank() == pattern.erased.len()
}

/// The algebraic reduction: eliminate `delta-1` erasures per affected set
/// against the local Vandermonde rows, leaving a sum-rank condition on
/// the surviving columns which the block-rank identity resolves.
pub fn is_recoverable_reduction(
    code: &MrCode,
    pattern: &ErasurePattern,
) -> Result<bool, VerifyError> {
    if !code.is_constructed() {
        return Err(VerifyError::NotConstructed);
    }
    let params = code.params();
    let t = code.tower();
    let a = params.a();
    let dm1 = params.delta as usize - 1;
    let h = params.h as usize;

    let mut blocks: Vec<Matrix> = Vec::new();
    let mut residual_cols = 0usize;
    let mut rank_sum = 0usize;
    for (set, coords) in split_by_set(&pattern.erased, a, params.m as usize) {
        if coords.is_empty() {
            continue;
        }
        if coords.len() < dm1 {
            return Err(VerifyError::PreconditionViolated {
                set: set + 1,
                erased: coords.len(),
                need: dm1,
            });
        }
        let local: Vec<usize> = coords.iter().map(|&c| c - set * a).collect();
        let (star, bar) = local.split_at(dm1);
        if bar.is_empty() {
            continue;
        }
        // P1|_{E*} A = P1|_{Ebar}; the (delta-1)x(delta-1) Vandermonde
        // block is invertible, so A exists and is unique.
        let w = if dm1 == 0 {
            code.p2().project_cols(bar)?
        } else {
            let p1_star = code.p1().project_cols(star)?;
            let p1_bar = code.p1().project_cols(bar)?;
            let a_mat = p1_star.solve(&p1_bar)?;
            let p2_star = code.p2().project_cols(star)?;
            let p2_bar = code.p2().project_cols(bar)?;
            let shift = p2_star.mul(&a_mat)?;
            Matrix::from_fn(t.clone(), FieldTag::BaseQ, h, bar.len(), |i, j| {
                t.sub(p2_bar.get(i, j), shift.get(i, j))
            })
        };
        rank_sum += w.rank();
        residual_cols += bar.len();
        let beta_star: Vec<Element> = (0..w.cols())
            .map(|j| {
                let mut acc = Element::ZERO;
                for (row, &g) in code.gamma_basis().iter().enumerate() {
                    acc = t.add(acc, t.mul(g, w.get(row, j)));
                }
                acc
            })
            .collect();
        blocks.push(build_d(
            t,
            t.gamma_pow(set as u64),
            &beta_star,
            h,
            beta_star.len(),
        )?);
    }

    if residual_cols == 0 {
        return Ok(true);
    }
    if rank_sum != residual_cols {
        return Ok(false);
    }
    let mut assembled = blocks[0].clone();
    for b in &blocks[1..] {
        assembled = assembled.hconcat(b)?;
    }
    Ok(assembled.rank() == residual_cols)
}

fn split_by_set(erased: &[usize], a: usize, m: usize) -> Vec<(usize, Vec<usize>)> {
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); m];
    for &c in erased {
        buckets[c / a].push(c);
    }
    buckets.into_iter().enumerate().collect()
}

/// Runs the chosen method over every maximal pattern. The code is MR
/// exactly when the report carries no failures.
pub fn verify_mr(
    code: &MrCode,
    method: Method,
    jobs: Option<usize>,
) -> Result<VerificationReport, VerifyError> {
    if method == Method::Definition {
        return verify_mr_definition(code);
    }
    let params = *code.params();
    let count = count_maximal_patterns(&params);
    if count > PATTERN_LIMIT {
        return Err(VerifyError::PatternSpaceTooLarge { count });
    }
    let start = Instant::now();
    let patterns = enumerate_maximal_patterns(&params);

    let check = |p: &ErasurePattern| -> Result<bool, VerifyError> {
        match method {
            Method::Direct => Ok(is_recoverable_direct(code, p)),
            Method::Reduction => is_recoverable_reduction(code, p),
            Method::Definition => unreachable!(),
        }
    };
    let verdicts: Result<Vec<bool>, VerifyError> = match jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .expect("thread pool construction")
            .install(|| patterns.par_iter().map(check).collect()),
        None => patterns.par_iter().map(check).collect(),
    };
    let verdicts = verdicts?;

    // patterns were produced in lexicographic order, so filtering keeps
    // the first failure first regardless of worker scheduling
    let failures: Vec<ErasurePattern> = patterns
        .into_iter()
        .zip(&verdicts)
        .filter(|(_, &ok)| !ok)
        .map(|(p, _)| p)
        .collect();
    Ok(VerificationReport {
        params,
        method,
        total_patterns: count as u64,
        failures,
        min_distance: None,
        elapsed_ms: start.elapsed().as_millis(),
    })
}

/// The literal definition: for every co-selection leaving `delta-1`
/// coordinates per set, the punctured code must be MDS, i.e. every
/// `k`-subset of the punctured generator's columns has rank `k`.
pub fn verify_mr_definition(code: &MrCode) -> Result<VerificationReport, VerifyError> {
    let params = *code.params();
    let a = params.a() as u64;
    let r = params.r as u64;
    let k = params.k();
    let mr = (params.m * params.r) as u64;
    let selections = binomial(a, r).pow(params.m);
    let checks = selections * binomial(mr, k as u64);
    if checks > DEFINITION_LIMIT {
        return Err(VerifyError::InstanceTooLarge { checks });
    }
    let start = Instant::now();
    let g = codec::generator(code);
    let per_set: Vec<Vec<usize>> = subsets(params.a(), params.r as usize);
    let n = params.n();

    let mut failures: BTreeSet<ErasurePattern> = BTreeSet::new();
    let mut total: u64 = 0;
    let mut selection = vec![0usize; params.m as usize];
    loop {
        // assemble the retained coordinates of this selection
        let mut retained: Vec<usize> = Vec::with_capacity(mr as usize);
        for (set, &s) in selection.iter().enumerate() {
            retained.extend(per_set[s].iter().map(|&c| c + set * params.a()));
        }
        let punctured = g.project_cols(&retained)?;
        for cols in subsets(retained.len(), k) {
            total += 1;
            if punctured.project_cols(&cols)?.rank() != k {
                let kept: BTreeSet<usize> = cols.iter().map(|&j| retained[j]).collect();
                let erased: Vec<usize> = (0..n).filter(|c| !kept.contains(c)).collect();
                failures.insert(ErasurePattern::new(&params, erased));
            }
        }
        // odometer step over the per-set subset choices
        let mut i = 0;
        loop {
            if i == selection.len() {
                return Ok(VerificationReport {
                    params,
                    method: Method::Definition,
                    total_patterns: total,
                    failures: failures.into_iter().collect(),
                    min_distance: None,
                    elapsed_ms: start.elapsed().as_millis(),
                });
            }
            selection[i] += 1;
            if selection[i] < per_set.len() {
                break;
            }
            selection[i] = 0;
            i += 1;
        }
    }
}

fn subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = Vec::with_capacity(size);
    fn rec(start: usize, n: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        if n - start < size - cur.len() {
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, size, cur, out);
            cur.pop();
        }
    }
    rec(0, n, size, &mut cur, &mut out);
    out
}

/// Minimum Hamming weight over all nonzero codewords, by enumerating the
/// message space against the canonical generator.
pub fn min_distance_bruteforce(code: &MrCode) -> Result<usize, VerifyError> {
    let params = code.params();
    let k = params.k();
    let t = code.tower();
    let big_q = t.order() as u128;
    let words = big_q.pow(k as u32);
    if words > DISTANCE_LIMIT {
        return Err(VerifyError::DistanceSpaceTooLarge { words });
    }
    let g = codec::generator(code);
    let n = params.n();
    let rows: Vec<&[Element]> = (0..k).map(|i| g.row(i)).collect();
    let mut best = n;
    let mut msg = vec![Element::ZERO; k];
    for counter in 1..words {
        let mut c = counter;
        for digit in msg.iter_mut() {
            *digit = t
                .element((c % big_q) as u64)
                .expect("digit below field order");
            c /= big_q;
        }
        let mut weight = 0usize;
        for j in 0..n {
            let mut acc = Element::ZERO;
            for (i, &m) in msg.iter().enumerate() {
                if !m.is_zero() {
                    acc = t.add(acc, t.mul(m, rows[i][j]));
                }
            }
            if !acc.is_zero() {
                weight += 1;
                if weight >= best {
                    break;
                }
            }
        }
        if weight < best {
            best = weight;
        }
    }
    Ok(best)
}

/// The Singleton-like bound for locality: `d <= n-k+1-(ceil(k/r)-1)(delta-1)`.
pub fn singleton_lrc_bound(n: usize, k: usize, r: usize, delta: usize) -> usize {
    n - k + 1 - (k.div_ceil(r) - 1) * (delta - 1)
}

/// Which simplified field-size lower bound applies and its order-level
/// value. The bound hides constants, so this is informational only and
/// never a pass/fail verdict.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldSizeBound {
    pub epsilon: f64,
    /// 1, 2, or 3 for the simplified cases; absent when only the general
    /// `n * r^epsilon` form applies.
    pub case_id: Option<u8>,
    pub expression: String,
    pub value: f64,
}

pub fn field_size_lower_bound(
    n: usize,
    r: u32,
    delta: u32,
    h: u32,
    m: u32,
) -> Result<FieldSizeBound, VerifyError> {
    if h < 2 {
        return Err(VerifyError::BoundNeedsGlobalParities);
    }
    if m < 2 {
        return Err(VerifyError::BoundNeedsTwoSets(m));
    }
    let ceil_hm = h.div_ceil(m);
    let eps_num = (delta as i64 - 1).min(h as i64 - 2 * ceil_hm as i64);
    let epsilon = eps_num as f64 / ceil_hm as f64;
    let nf = n as f64;
    let rf = r as f64;
    if m >= h {
        let e = (delta as i64 - 1).min(h as i64 - 2);
        Ok(FieldSizeBound {
            epsilon,
            case_id: Some(1),
            expression: format!("n * r^{e}"),
            value: nf * rf.powi(e as i32),
        })
    } else if h % m == 0 && delta as i64 - 1 <= h as i64 - 2 * (h / m) as i64 {
        let exp = 1.0 + (m * (delta - 1)) as f64 / h as f64;
        Ok(FieldSizeBound {
            epsilon,
            case_id: Some(2),
            expression: format!("n^(1 + {}*{}/{})", m, delta - 1, h),
            value: nf.powf(exp),
        })
    } else if h % m == 0 {
        Ok(FieldSizeBound {
            epsilon,
            case_id: Some(3),
            expression: format!("n^{}", m - 1),
            value: nf.powi(m as i32 - 1),
        })
    } else {
        Ok(FieldSizeBound {
            epsilon,
            case_id: None,
            expression: format!("n * r^{epsilon:.4}"),
            value: nf * rf.powf(epsilon),
        })
    }
}
