//! Overlap of a product state with a conditional typical subspace.
//!
//! For side information J the conditional states ρ̃_j = Σ_i q(i|j)|φ_i⟩⟨φ_i|
//! have eigenbases {e_{k|j}} and spectra λ_{·|j}. The projector Π(J) spans the
//! e_{K|J} whose eigenindex string K is conditionally typical for λ given J,
//! and
//!
//! ```text
//! ⟨φ_I|Π(J)|φ_I⟩ = Σ_{K typical} Π_t |⟨e_{k_t|j_t}|φ_{i_t}⟩|².
//! ```
//!
//! Typicality constrains the counts N(j, k) separately for each j, and for a
//! fixed t the weights over k sum to one. So the sum factorizes over j, and
//! each factor is the probability that a sum of independent categorical draws
//! lands on a typical count vector, computed by dynamic programming.

use crate::error::{Error, Result};
use crate::linalg::{self, inner};
use crate::qcore::{EncodingKernel, Ensemble};

/// Largest DP table (count vectors × positions) attempted.
const DP_BUDGET: f64 = 5e8;

/// Eigen-data of the conditional states of a kernel.
#[derive(Clone, Debug)]
pub struct ConditionalSubspace {
    /// λ_{k|j}; empty for unused symbols.
    spectra: Vec<Vec<f64>>,
    /// weights[j][i][k] = |⟨e_{k|j}|φ_i⟩|².
    weights: Vec<Vec<Vec<f64>>>,
    inputs: usize,
    dim: usize,
}

impl ConditionalSubspace {
    /// Conditional states from the Bayes posteriors of `kernel` under the
    /// ensemble's prior, each diagonalized once.
    pub fn new(ensemble: &Ensemble, kernel: &EncodingKernel) -> Result<Self> {
        if kernel.inputs() != ensemble.len() {
            return Err(Error::DimensionMismatch {
                expected: ensemble.len(),
                got: kernel.inputs(),
            });
        }
        let d = ensemble.dim();
        let mut spectra = Vec::new();
        let mut weights = Vec::new();
        for post in kernel.posteriors(ensemble.probs()) {
            match post {
                None => {
                    spectra.push(Vec::new());
                    weights.push(Vec::new());
                }
                Some(x) => {
                    let eig = linalg::hermitian_eigen(&ensemble.mixture_matrix(&x));
                    let vecs: Vec<_> = (0..d).map(|k| eig.vector(k)).collect();
                    let lam: Vec<f64> = eig.values.iter().map(|v| v.clamp(0.0, 1.0)).collect();
                    let w: Vec<Vec<f64>> = ensemble
                        .states()
                        .iter()
                        .map(|s| {
                            let mut row: Vec<f64> = vecs.iter().map(|e| inner(e, s.amplitudes()).norm_sqr()).collect();
                            let total: f64 = row.iter().sum();
                            row.iter_mut().for_each(|v| *v /= total);
                            row
                        })
                        .collect();
                    let total: f64 = lam.iter().sum();
                    spectra.push(lam.into_iter().map(|v| v / total).collect());
                    weights.push(w);
                }
            }
        }
        Ok(ConditionalSubspace {
            spectra,
            weights,
            inputs: ensemble.len(),
            dim: d,
        })
    }

    pub fn spectrum(&self, j: usize) -> &[f64] {
        &self.spectra[j]
    }

    pub fn outputs(&self) -> usize {
        self.spectra.len()
    }

    /// Overlap from the joint counts n[i][j] of (I, J); order within the
    /// sequences does not matter.
    pub fn overlap_from_counts(&self, counts: &[Vec<usize>], delta: f64, eps_robust: f64) -> Result<f64> {
        if counts.len() != self.inputs {
            return Err(Error::DimensionMismatch {
                expected: self.inputs,
                got: counts.len(),
            });
        }
        let mut total = 1.0;
        for j in 0..self.outputs() {
            let column: Vec<usize> = counts.iter().map(|r| r.get(j).copied().unwrap_or(0)).collect();
            let nj: usize = column.iter().sum();
            if nj == 0 {
                continue;
            }
            if self.spectra[j].is_empty() {
                return Err(Error::InvalidArgument(format!(
                    "symbol {j} has zero probability under the kernel"
                )));
            }
            total *= self.factor(j, &column, delta, eps_robust)?;
        }
        Ok(total.clamp(0.0, 1.0))
    }

    /// Probability that the eigenindex counts for symbol j are typical.
    fn factor(&self, j: usize, column: &[usize], delta: f64, eps: f64) -> Result<f64> {
        let d = self.dim;
        let nj: usize = column.iter().sum();
        let lam = &self.spectra[j];
        let radius = delta * (nj as f64).sqrt() + eps * nj as f64 + 1e-9;
        let typical = |c: &[usize]| {
            c.iter()
                .zip(lam)
                .all(|(&ck, &l)| (ck as f64 - nj as f64 * l).abs() <= radius)
        };
        if d == 1 {
            return Ok(if typical(&[nj]) { 1.0 } else { 0.0 });
        }
        // Dense table over the first d − 1 counts, mixed radix nj + 1.
        let side = nj + 1;
        let cells = (side as f64).powi(d as i32 - 1);
        if cells * nj as f64 > DP_BUDGET {
            return Err(Error::BudgetExceeded(format!(
                "overlap DP with {nj} positions in dimension {d}"
            )));
        }
        let cells = cells as usize;
        let mut strides = vec![1usize; d - 1];
        for k in 1..d - 1 {
            strides[k] = strides[k - 1] * side;
        }
        let mut table = vec![0.0f64; cells];
        table[0] = 1.0;
        let mut placed = 0usize;
        for (i, &n_i) in column.iter().enumerate() {
            let a = &self.weights[j][i];
            for _ in 0..n_i {
                let mut next = vec![0.0f64; cells];
                for (idx, &v) in table.iter().enumerate() {
                    if v == 0.0 {
                        continue;
                    }
                    // Last eigenindex: counts unchanged in the table.
                    next[idx] += v * a[d - 1];
                    for k in 0..d - 1 {
                        if a[k] > 0.0 {
                            next[idx + strides[k]] += v * a[k];
                        }
                    }
                }
                table = next;
                placed += 1;
            }
        }
        debug_assert_eq!(placed, nj);
        let mut sum = 0.0;
        let mut c = vec![0usize; d];
        for (idx, &v) in table.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let mut rest = idx;
            let mut used = 0;
            for k in 0..d - 1 {
                c[k] = rest % side;
                rest /= side;
                used += c[k];
            }
            if used > nj {
                continue;
            }
            c[d - 1] = nj - used;
            if typical(&c) {
                sum += v;
            }
        }
        Ok(sum)
    }
}

/// ⟨φ_I|Π(J)|φ_I⟩ for the conditional typical projector of `kernel`.
pub fn projector_overlap(
    i_seq: &[usize],
    j_seq: &[usize],
    ensemble: &Ensemble,
    kernel: &EncodingKernel,
    delta: f64,
    eps_robust: f64,
) -> Result<f64> {
    let sub = ConditionalSubspace::new(ensemble, kernel)?;
    sub.overlap_from_counts(
        &joint_counts(i_seq, j_seq, ensemble.len(), kernel.outputs())?,
        delta,
        eps_robust,
    )
}

pub(crate) fn joint_counts(i_seq: &[usize], j_seq: &[usize], inputs: usize, outputs: usize) -> Result<Vec<Vec<usize>>> {
    if i_seq.len() != j_seq.len() {
        return Err(Error::DimensionMismatch {
            expected: i_seq.len(),
            got: j_seq.len(),
        });
    }
    let mut counts = vec![vec![0usize; outputs]; inputs];
    for (&i, &j) in i_seq.iter().zip(j_seq) {
        if i >= inputs || j >= outputs {
            return Err(Error::InvalidArgument(format!("pair ({i}, {j}) outside the alphabets")));
        }
        counts[i][j] += 1;
    }
    Ok(counts)
}
