//! Exponential sums over tuples of pairwise distinct residues,
//!
//! `I(m_1, …, m_k) = Σ exp(2πi (m_1 j_1 + … + m_k j_k) / n)`,
//!
//! evaluated by brute-force enumeration and by an exact integer recursion.

use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{DunklError, Result};

/// Largest modulus accepted by the enumerating evaluator.
pub const DIRECT_MAX_N: usize = 12;
/// Largest tuple length accepted by the enumerating evaluator.
pub const DIRECT_MAX_K: usize = 6;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExpSumQuery {
    n: usize,
    ms: Vec<usize>,
}

impl ExpSumQuery {
    /// Residues are reduced mod `n`; requires `n ≥ 1` and `k ≤ n`.
    pub fn new(n: usize, ms: &[i64]) -> Result<Self> {
        if n == 0 {
            return Err(DunklError::Precondition("modulus must be positive".into()));
        }
        if ms.len() > n {
            return Err(DunklError::Precondition(format!(
                "{} distinct indices do not exist mod {n}",
                ms.len()
            )));
        }
        Ok(ExpSumQuery {
            n,
            ms: ms.iter().map(|m| m.rem_euclid(n as i64) as usize).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn residues(&self) -> &[usize] {
        &self.ms
    }

    pub fn k(&self) -> usize {
        self.ms.len()
    }

    pub fn residue_sum(&self) -> usize {
        self.ms.iter().sum::<usize>() % self.n
    }
}

/// Enumerates every tuple of distinct residues. `I()` is 1.
pub fn expsum_direct(q: &ExpSumQuery) -> Result<Complex64> {
    if q.n > DIRECT_MAX_N || q.k() > DIRECT_MAX_K {
        return Err(DunklError::BudgetExceeded(format!(
            "direct enumeration limited to n ≤ {DIRECT_MAX_N}, k ≤ {DIRECT_MAX_K} (got n = {}, k = {})",
            q.n,
            q.k()
        )));
    }
    let n = q.n;
    let roots: Vec<Complex64> = (0..n)
        .map(|p| {
            let (c, s) = crate::root_system::cos_sin_pi_ratio(2 * p as i64, n as i64);
            Complex64::new(c, s)
        })
        .collect();

    fn walk(depth: usize, used: u32, phase: usize, ms: &[usize], roots: &[Complex64], acc: &mut Complex64) {
        let n = roots.len();
        if depth == ms.len() {
            *acc += roots[phase];
            return;
        }
        for j in 0..n {
            if used & (1 << j) == 0 {
                walk(depth + 1, used | (1 << j), (phase + ms[depth] * j) % n, ms, roots, acc);
            }
        }
    }

    let mut acc = Complex64::new(0.0, 0.0);
    walk(0, 0, 0, &q.ms, &roots, &mut acc);
    Ok(acc)
}

/// Exact evaluator built on the reduction rules:
///
/// * a zero residue is stripped with factor `n - k + 1`;
/// * a nonzero residue `m_k` is folded into each other entry, with a minus sign;
/// * `I(m) = n` if `m ≡ 0` and `0` otherwise.
///
/// Holds a memo table keyed by the sorted residues, so keep one per worker.
#[derive(Debug, Default)]
pub struct ExpSumReducer {
    memo: HashMap<(usize, Vec<usize>), i64>,
}

impl ExpSumReducer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn evaluate(&mut self, q: &ExpSumQuery) -> i64 {
        let mut key = q.ms.clone();
        key.sort_unstable();
        self.eval_sorted(q.n, key)
    }

    fn eval_sorted(&mut self, n: usize, ms: Vec<usize>) -> i64 {
        let k = ms.len();
        match k {
            0 => return 1,
            1 => return if ms[0] == 0 { n as i64 } else { 0 },
            _ => {}
        }
        let key = (n, ms);
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let ms = &key.1;
        let value = if ms[0] == 0 {
            // sorted, so a zero residue sits in front
            (n - k + 1) as i64 * self.eval_sorted(n, ms[1..].to_vec())
        } else {
            let (last, rest) = ms.split_last().unwrap();
            let mut total = 0;
            for i in 0..rest.len() {
                let mut folded = rest.to_vec();
                folded[i] = (folded[i] + last) % n;
                folded.sort_unstable();
                total -= self.eval_sorted(n, folded);
            }
            total
        };
        self.memo.insert(key, value);
        value
    }
}

pub fn expsum_reduced(q: &ExpSumQuery) -> i64 {
    ExpSumReducer::new().evaluate(q)
}

/// Rounds a complex value to the nearest Gaussian integer.
pub fn round_gaussian(z: Complex64) -> (i64, i64) {
    (z.re.round() as i64, z.im.round() as i64)
}

/// The integer `c` with `I(m_1..m_k) = c·I(m_1 + … + m_k)`.
///
/// When the residue sum is nonzero `I(Σm) = 0`, so only the vanishing of the
/// left-hand side is meaningful; that case returns `None`.
pub fn sum_reduction_factor(q: &ExpSumQuery, value: i64) -> Result<Option<i64>> {
    if q.residue_sum() != 0 {
        if value != 0 {
            return Err(DunklError::Precondition(format!(
                "I{:?} = {value} although the residue sum is nonzero",
                q.ms
            )));
        }
        return Ok(None);
    }
    let n = q.n as i64;
    if value % n != 0 {
        return Err(DunklError::Precondition(format!("I{:?} = {value} is not a multiple of {n}", q.ms)));
    }
    Ok(Some(value / n))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpSumRow {
    pub n: usize,
    pub k: usize,
    pub tuple: Vec<usize>,
    pub direct: [f64; 2],
    pub reduced: i64,
    #[serde(rename = "match")]
    pub matches: bool,
}

/// Evaluates one query both ways.
pub fn compare(q: &ExpSumQuery, reducer: &mut ExpSumReducer) -> Result<ExpSumRow> {
    let direct = expsum_direct(q)?;
    let reduced = reducer.evaluate(q);
    let (re, im) = round_gaussian(direct);
    Ok(ExpSumRow {
        n: q.n,
        k: q.k(),
        tuple: q.ms.clone(),
        direct: [direct.re, direct.im],
        reduced,
        matches: re == reduced && im == 0,
    })
}

/// `I_{k,ℓ}`: `ℓ` entries `+1` and `k - ℓ` entries `-1`. Requires `0 ≤ 2ℓ < k < n`
/// and checks that both evaluators return 0.
pub fn verify_ikl_vanishing(n: usize, k: usize, ell: usize) -> Result<bool> {
    if !(2 * ell < k && k < n) {
        return Err(DunklError::Precondition(format!("need 0 ≤ 2ℓ < k < n, got n={n} k={k} ℓ={ell}")));
    }
    let ms: Vec<i64> = (0..k).map(|i| if i < ell { 1 } else { -1 }).collect();
    let q = ExpSumQuery::new(n, &ms)?;
    let reduced = expsum_reduced(&q);
    let direct = if n <= DIRECT_MAX_N && k <= DIRECT_MAX_K {
        round_gaussian(expsum_direct(&q)?) == (0, 0)
    } else {
        true
    };
    Ok(direct && reduced == 0)
}
