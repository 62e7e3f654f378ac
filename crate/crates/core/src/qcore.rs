//! Quantum and classical information primitives for pure-state sources.
//!
//! All logarithms are base 2. Entropies are computed from Jacobi eigenvalues
//! clipped to `[0, 1]`, with `0 log 0 = 0`.

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64};

pub const STATE_TOL: f64 = 1e-12;
pub const PROB_TOL: f64 = 1e-12;
pub const HERMITIAN_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;

/// Normalized state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: Vec<C64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::Empty("state amplitudes"));
        }
        let n = linalg::norm_sqr(&amplitudes);
        if (n - 1.0).abs() > STATE_TOL {
            return Err(Error::NotNormalized(n));
        }
        Ok(PureState { amplitudes })
    }

    /// Normalizes the vector first. Fails only on the zero vector.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let n = linalg::norm_sqr(&amplitudes).sqrt();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::NotNormalized(n * n));
        }
        Ok(PureState {
            amplitudes: amplitudes.into_iter().map(|z| z / n).collect(),
        })
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::normalized(amplitudes.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// Computational basis vector |k⟩ in dimension `dim`.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut a = vec![linalg::ZERO; dim];
        a[k] = linalg::ONE;
        PureState { amplitudes: a }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn inner(&self, other: &PureState) -> C64 {
        linalg::inner(&self.amplitudes, &other.amplitudes)
    }

    /// |⟨self|other⟩|²
    pub fn overlap(&self, other: &PureState) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn projector(&self) -> DensityMatrix {
        DensityMatrix {
            matrix: CMatrix::outer(&self.amplitudes),
        }
    }

    pub fn apply(&self, u: &CMatrix) -> PureState {
        PureState {
            amplitudes: u.apply(&self.amplitudes),
        }
    }

    pub fn tensor(&self, other: &PureState) -> PureState {
        PureState {
            amplitudes: linalg::kron_vec(&self.amplitudes, &other.amplitudes),
        }
    }
}

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, trace and positivity.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let h = matrix.hermitian_defect();
        if h > HERMITIAN_TOL {
            return Err(Error::NotHermitian(h));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > PROB_TOL || tr.im.abs() > PROB_TOL {
            return Err(Error::InvalidTrace(tr.re));
        }
        let min = linalg::hermitian_eigenvalues(&matrix)
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if min < -PSD_TOL {
            return Err(Error::NotPositive(min));
        }
        Ok(DensityMatrix { matrix })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix {
            matrix: CMatrix::identity(dim).scale(1.0 / dim as f64),
        }
    }

    /// Σ w_k ρ_k. Weights must be a probability vector.
    pub fn mixture(parts: &[(DensityMatrix, f64)]) -> Result<Self> {
        let first = parts.first().ok_or(Error::Empty("mixture"))?;
        let d = first.0.dim();
        check_probabilities(&parts.iter().map(|p| p.1).collect::<Vec<_>>())?;
        let mut m = CMatrix::zeros(d);
        for (rho, w) in parts {
            if rho.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: rho.dim(),
                });
            }
            m.add_scaled(*w, &rho.matrix);
        }
        Ok(DensityMatrix { matrix: m })
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix {
            matrix: self.matrix.kron(&other.matrix),
        }
    }

    /// Eigenvalues clipped to [0, 1], ascending.
    pub fn spectrum(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.matrix)
            .into_iter()
            .map(|x| x.clamp(0.0, 1.0))
            .collect()
    }

    /// Returns the state vector if the matrix is (numerically) rank one.
    pub fn as_pure(&self) -> Option<PureState> {
        let eig = linalg::hermitian_eigen(&self.matrix);
        let top = *eig.values.last()?;
        if (top - 1.0).abs() < 1e-10 {
            PureState::normalized(eig.vector(self.dim() - 1)).ok()
        } else {
            None
        }
    }
}

/// Source ensemble {|φ_i⟩, p_i}.
#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble {
    states: Vec<PureState>,
    probs: Vec<f64>,
}

impl Ensemble {
    pub fn new(states: Vec<PureState>, probs: Vec<f64>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::Empty("ensemble"));
        }
        if states.len() != probs.len() {
            return Err(Error::DimensionMismatch {
                expected: states.len(),
                got: probs.len(),
            });
        }
        let d = states[0].dim();
        if let Some(s) = states.iter().find(|s| s.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: s.dim(),
            });
        }
        check_probabilities(&probs)?;
        Ok(Ensemble { states, probs })
    }

    pub fn uniform(states: Vec<PureState>) -> Result<Self> {
        let m = states.len();
        Self::new(states, vec![1.0 / m.max(1) as f64; m])
    }

    /// Same states, different prior.
    pub fn with_probs(&self, probs: Vec<f64>) -> Result<Self> {
        Self::new(self.states.clone(), probs)
    }

    pub fn states(&self) -> &[PureState] {
        &self.states
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Number of states m.
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Hilbert space dimension d.
    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    /// f(x) = Σ_i x_i |φ_i⟩⟨φ_i|.
    pub fn mixture_matrix(&self, x: &[f64]) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim());
        for (s, &w) in self.states.iter().zip(x) {
            if w != 0.0 {
                m.add_projector(w, s.amplitudes());
            }
        }
        m
    }

    pub fn average_state(&self) -> DensityMatrix {
        DensityMatrix {
            matrix: self.mixture_matrix(&self.probs),
        }
    }

    /// S(Σ_i x_i φ_i) for a weight vector x (not necessarily normalized).
    ///
    /// Uses the d×d mixture or the m×m Gram matrix √(x_i x_j)⟨φ_i|φ_j⟩,
    /// whichever is smaller; both share the same nonzero spectrum.
    pub fn mixture_entropy(&self, x: &[f64]) -> f64 {
        let support: Vec<usize> = (0..self.len()).filter(|&i| x[i] > 0.0).collect();
        match support.len() {
            0 => return 0.0,
            1 => return 0.0,
            _ => {}
        }
        let spectrum = if support.len() < self.dim() {
            let k = support.len();
            let mut g = CMatrix::zeros(k);
            for (a, &i) in support.iter().enumerate() {
                for (b, &j) in support.iter().enumerate() {
                    g[(a, b)] = self.states[i].inner(&self.states[j]) * (x[i] * x[j]).sqrt();
                }
            }
            linalg::hermitian_eigenvalues(&g)
        } else {
            linalg::hermitian_eigenvalues(&self.mixture_matrix(x))
        };
        entropy_of_spectrum(&spectrum)
    }

    /// S(E), the entropy of the average state.
    pub fn entropy(&self) -> f64 {
        self.mixture_entropy(&self.probs)
    }

    /// H(p).
    pub fn prior_entropy(&self) -> f64 {
        shannon_entropy(&self.probs)
    }

    /// Ensemble of product states φ_i ⊗ ψ_k with probabilities p_i q_k.
    pub fn tensor(&self, other: &Ensemble) -> Ensemble {
        let mut states = Vec::with_capacity(self.len() * other.len());
        let mut probs = Vec::with_capacity(self.len() * other.len());
        for (a, pa) in self.states.iter().zip(&self.probs) {
            for (b, pb) in other.states.iter().zip(&other.probs) {
                states.push(a.tensor(b));
                probs.push(pa * pb);
            }
        }
        Ensemble { states, probs }
    }
}

/// Classical side-information map p(j|i): one row per source symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct EncodingKernel {
    rows: Vec<Vec<f64>>,
}

impl EncodingKernel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let j = rows.first().map(|r| r.len()).ok_or(Error::Empty("kernel"))?;
        if j == 0 {
            return Err(Error::Empty("kernel columns"));
        }
        for r in &rows {
            if r.len() != j {
                return Err(Error::DimensionMismatch {
                    expected: j,
                    got: r.len(),
                });
            }
            check_probabilities(r)?;
        }
        Ok(EncodingKernel { rows })
    }

    pub fn identity(m: usize) -> Self {
        EncodingKernel {
            rows: (0..m)
                .map(|i| (0..m).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect(),
        }
    }

    /// Single-symbol kernel (no classical information).
    pub fn trivial(m: usize) -> Self {
        EncodingKernel {
            rows: vec![vec![1.0]; m],
        }
    }

    /// Deterministic kernel i ↦ labels[i].
    pub fn deterministic(labels: &[usize]) -> Self {
        let j = labels.iter().max().map_or(1, |&x| x + 1);
        EncodingKernel {
            rows: labels
                .iter()
                .map(|&l| (0..j).map(|c| if c == l { 1.0 } else { 0.0 }).collect())
                .collect(),
        }
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn inputs(&self) -> usize {
        self.rows.len()
    }

    pub fn outputs(&self) -> usize {
        self.rows[0].len()
    }

    /// Output marginal q_j = Σ_i p_i p(j|i).
    pub fn output_marginal(&self, prior: &[f64]) -> Vec<f64> {
        let mut q = vec![0.0; self.outputs()];
        for (row, &p) in self.rows.iter().zip(prior) {
            for (qj, &w) in q.iter_mut().zip(row) {
                *qj += p * w;
            }
        }
        q
    }

    /// Bayes posteriors q(·|j); `None` where q_j = 0.
    pub fn posteriors(&self, prior: &[f64]) -> Vec<Option<Vec<f64>>> {
        let q = self.output_marginal(prior);
        (0..self.outputs())
            .map(|j| {
                if q[j] <= 0.0 {
                    None
                } else {
                    Some(self.rows.iter().zip(prior).map(|(r, &p)| p * r[j] / q[j]).collect())
                }
            })
            .collect()
    }
}

pub fn check_probabilities(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::Empty("probability vector"));
    }
    if let Some(x) = p.iter().find(|x| !(**x >= 0.0) || !x.is_finite()) {
        return Err(Error::InvalidProbabilities(format!(
            "entry {x} is negative or not finite"
        )));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > PROB_TOL {
        return Err(Error::InvalidProbabilities(format!("sum is {s}")));
    }
    Ok(())
}

/// −x log₂ x with 0 log 0 = 0.
#[inline]
pub fn xlogx_neg(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -x * x.log2()
    }
}

fn entropy_of_spectrum(spectrum: &[f64]) -> f64 {
    spectrum.iter().map(|&l| xlogx_neg(l.clamp(0.0, 1.0))).sum()
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    entropy_of_spectrum(&rho.spectrum())
}

/// Validating entry point for raw matrices.
pub fn von_neumann_entropy_of(matrix: &CMatrix) -> Result<f64> {
    Ok(von_neumann_entropy(&DensityMatrix::new(matrix.clone())?))
}

/// Uhlmann fidelity (Tr √(√ω ρ √ω))², using ⟨ω|ρ|ω⟩ when either argument is pure.
pub fn fidelity(rho: &DensityMatrix, omega: &DensityMatrix) -> Result<f64> {
    if rho.dim() != omega.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            got: omega.dim(),
        });
    }
    if let Some(w) = omega.as_pure() {
        return Ok(expectation(rho, &w).clamp(0.0, 1.0));
    }
    if let Some(r) = rho.as_pure() {
        return Ok(expectation(omega, &r).clamp(0.0, 1.0));
    }
    let sqrt_omega = linalg::hermitian_function(omega.matrix(), |x| x.max(0.0).sqrt());
    let inner = sqrt_omega.matmul(rho.matrix()).matmul(&sqrt_omega);
    let root_trace: f64 = linalg::hermitian_eigenvalues(&inner)
        .into_iter()
        .map(|x| x.max(0.0).sqrt())
        .sum();
    Ok((root_trace * root_trace).clamp(0.0, 1.0))
}

/// ⟨ψ|ρ|ψ⟩
pub fn expectation(rho: &DensityMatrix, psi: &PureState) -> f64 {
    let rv = rho.matrix().apply(psi.amplitudes());
    linalg::inner(psi.amplitudes(), &rv).re
}

/// Holevo χ = S(Σ p_k ρ_k) − Σ p_k S(ρ_k).
pub fn holevo_chi(ensemble: &[(DensityMatrix, f64)]) -> Result<f64> {
    let avg = DensityMatrix::mixture(ensemble)?;
    let mean_entropy: f64 = ensemble.iter().map(|(r, p)| p * von_neumann_entropy(r)).sum();
    Ok((von_neumann_entropy(&avg) - mean_entropy).max(0.0))
}

/// S(A:C) = H(p) − Σ_j q_j H(q(·|j)).
pub fn classical_info(e: &Ensemble, k: &EncodingKernel) -> Result<f64> {
    check_kernel(e, k)?;
    let q = k.output_marginal(e.probs());
    let cond: f64 = k
        .posteriors(e.probs())
        .iter()
        .zip(&q)
        .filter_map(|(post, &qj)| post.as_ref().map(|x| qj * shannon_entropy(x)))
        .sum();
    Ok((e.prior_entropy() - cond).max(0.0))
}

/// S(A:B|C) = Σ_j q_j S(Σ_i q(i|j) φ_i).
pub fn conditional_chi(e: &Ensemble, k: &EncodingKernel) -> Result<f64> {
    check_kernel(e, k)?;
    let q = k.output_marginal(e.probs());
    Ok(k.posteriors(e.probs())
        .iter()
        .zip(&q)
        .filter_map(|(post, &qj)| post.as_ref().map(|x| qj * e.mixture_entropy(x)))
        .sum())
}

/// S(A:BC): Holevo χ of {φ_i ⊗ Σ_j p(j|i)|j⟩⟨j|, p_i}, computed as a block
/// sum over j of the unnormalized conditional mixtures.
pub fn joint_chi(e: &Ensemble, k: &EncodingKernel) -> Result<f64> {
    check_kernel(e, k)?;
    // Σ_i p_i φ_i ⊗ Σ_j p(j|i)|j⟩⟨j| is block diagonal in j with blocks
    // Σ_i p_i p(j|i) φ_i; members are (φ_i ⊗ diag(p(·|i))) with entropy H(p(·|i)).
    let mut s_avg = 0.0;
    for j in 0..k.outputs() {
        let w: Vec<f64> = (0..e.len()).map(|i| e.probs()[i] * k.rows()[i][j]).collect();
        let qj: f64 = w.iter().sum();
        if qj <= 0.0 {
            continue;
        }
        let x: Vec<f64> = w.iter().map(|v| v / qj).collect();
        s_avg += qj * e.mixture_entropy(&x) + xlogx_neg(qj);
    }
    let members: f64 = (0..e.len()).map(|i| e.probs()[i] * shannon_entropy(&k.rows()[i])).sum();
    Ok((s_avg - members).max(0.0))
}

fn check_kernel(e: &Ensemble, k: &EncodingKernel) -> Result<()> {
    if k.inputs() != e.len() {
        return Err(Error::DimensionMismatch {
            expected: e.len(),
            got: k.inputs(),
        });
    }
    Ok(())
}

/// Shannon entropy in bits of a (sub)probability vector; zeros contribute 0.
pub fn shannon_entropy(p: &[f64]) -> f64 {
    p.iter().map(|&x| xlogx_neg(x)).sum()
}

/// H₂(x).
pub fn binary_entropy(x: f64) -> f64 {
    xlogx_neg(x) + xlogx_neg(1.0 - x)
}

/// η(x) = −x log x for x ≤ 1/4 and 1/2 above.
pub fn eta(x: f64) -> Result<f64> {
    if x < 0.0 || x.is_nan() {
        return Err(Error::InvalidArgument(format!("eta of negative value {x}")));
    }
    Ok(if x <= 0.25 { xlogx_neg(x) } else { 0.5 })
}

/// Fannes continuity bound d·η(ε/d) on |S(ρ) − S(σ)| for ‖ρ − σ‖₁ ≤ ε.
pub fn fannes_bound(dim: usize, eps: f64) -> Result<f64> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    Ok(dim as f64 * eta(eps / dim as f64)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn plus() -> PureState {
        PureState::from_real(&[1.0, 1.0]).unwrap()
    }

    fn pair() -> Ensemble {
        Ensemble::uniform(vec![PureState::basis(2, 0), plus()]).unwrap()
    }

    // 2x2 closed form: eigenvalues of ½|0⟩⟨0| + ½|+⟩⟨+| are (1 ± √½)/2.
    fn pair_entropy_oracle() -> f64 {
        let r = 0.5f64.sqrt();
        binary_entropy((1.0 + r) / 2.0)
    }

    #[test]
    fn entropy_examples() {
        assert_abs_diff_eq!(
            von_neumann_entropy(&DensityMatrix::maximally_mixed(2)),
            1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(von_neumann_entropy(&plus().projector()), 0.0, epsilon = 1e-12);
        let rho = pair().average_state();
        let s = von_neumann_entropy(&rho);
        assert_abs_diff_eq!(s, pair_entropy_oracle(), epsilon = 1e-12);
        assert_abs_diff_eq!(s, 0.600876, epsilon = 1e-6);
    }

    #[test]
    fn entropy_rejects_invalid() {
        let bad = CMatrix::from_rows(&[
            vec![C64::new(0.5, 0.0), C64::new(0.1, 0.0)],
            vec![C64::new(0.2, 0.0), C64::new(0.5, 0.0)],
        ]);
        assert!(matches!(von_neumann_entropy_of(&bad), Err(Error::NotHermitian(_))));
        let bad_trace = CMatrix::identity(2);
        assert!(matches!(
            von_neumann_entropy_of(&bad_trace),
            Err(Error::InvalidTrace(_))
        ));
    }

    #[test]
    fn fidelity_examples() {
        let zero = PureState::basis(2, 0).projector();
        let p = plus().projector();
        let mixed = DensityMatrix::maximally_mixed(2);
        assert_abs_diff_eq!(fidelity(&mixed, &mixed).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fidelity(&zero, &p).unwrap(), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(fidelity(&mixed, &zero).unwrap(), 0.5, epsilon = 1e-12);
        let three = DensityMatrix::maximally_mixed(3);
        assert!(matches!(fidelity(&mixed, &three), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn fidelity_general_branch_is_symmetric() {
        let a =
            DensityMatrix::mixture(&[(PureState::basis(2, 0).projector(), 0.7), (plus().projector(), 0.3)]).unwrap();
        let b =
            DensityMatrix::mixture(&[(PureState::basis(2, 1).projector(), 0.4), (plus().projector(), 0.6)]).unwrap();
        let f1 = fidelity(&a, &b).unwrap();
        let f2 = fidelity(&b, &a).unwrap();
        assert_abs_diff_eq!(f1, f2, epsilon = 1e-10);
        assert!(f1 > 0.0 && f1 < 1.0);
        assert_abs_diff_eq!(fidelity(&a, &a).unwrap(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn holevo_examples() {
        let z = PureState::basis(2, 0).projector();
        let o = PureState::basis(2, 1).projector();
        assert_abs_diff_eq!(
            holevo_chi(&[(z.clone(), 0.3), (z.clone(), 0.7)]).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(holevo_chi(&[(z.clone(), 0.5), (o, 0.5)]).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            holevo_chi(&[(z, 0.5), (plus().projector(), 0.5)]).unwrap(),
            pair_entropy_oracle(),
            epsilon = 1e-12
        );
        assert!(matches!(holevo_chi(&[]), Err(Error::Empty(_))));
    }

    #[test]
    fn classical_info_examples() {
        let e = pair();
        let constant = EncodingKernel::new(vec![vec![0.3, 0.7], vec![0.3, 0.7]]).unwrap();
        assert_abs_diff_eq!(classical_info(&e, &constant).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            classical_info(&e, &EncodingKernel::identity(2)).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        let bsc = EncodingKernel::new(vec![vec![0.89, 0.11], vec![0.11, 0.89]]).unwrap();
        let oracle = 1.0 - binary_entropy(0.11);
        assert_abs_diff_eq!(classical_info(&e, &bsc).unwrap(), oracle, epsilon = 1e-12);
        assert_abs_diff_eq!(oracle, 0.500084, epsilon = 1e-6);
    }

    #[test]
    fn conditional_chi_examples() {
        let e = pair();
        assert_abs_diff_eq!(
            conditional_chi(&e, &EncodingKernel::trivial(2)).unwrap(),
            e.entropy(),
            epsilon = 1e-12
        );
        let orth = Ensemble::uniform(vec![PureState::basis(2, 0), PureState::basis(2, 1)]).unwrap();
        assert_abs_diff_eq!(
            conditional_chi(&orth, &EncodingKernel::identity(2)).unwrap(),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn scalar_helpers() {
        assert_abs_diff_eq!(eta(0.125).unwrap(), 0.375, epsilon = 1e-15);
        assert_abs_diff_eq!(eta(0.3).unwrap(), 0.5, epsilon = 1e-15);
        assert!(eta(-0.1).is_err());
        // −(1/3)log(1/3) − (2/3)log(2/3)
        let direct = (3.0f64).log2() - 2.0 / 3.0;
        assert_abs_diff_eq!(binary_entropy(1.0 / 3.0), direct, epsilon = 1e-14);
        assert_abs_diff_eq!(binary_entropy(1.0 / 3.0), 0.918296, epsilon = 1e-6);
        assert_abs_diff_eq!(fannes_bound(2, 0.25).unwrap(), 2.0 * eta(0.125).unwrap());
    }

    #[test]
    fn tensor_entropy_is_additive() {
        let a = pair().average_state();
        let b = DensityMatrix::mixture(&[
            (PureState::basis(3, 0).projector(), 0.2),
            (PureState::basis(3, 2).projector(), 0.8),
        ])
        .unwrap();
        let s = von_neumann_entropy(&a.tensor(&b));
        assert_abs_diff_eq!(s, von_neumann_entropy(&a) + von_neumann_entropy(&b), epsilon = 1e-9);
    }

    #[test]
    fn constructors_validate() {
        assert!(matches!(
            PureState::new(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)]),
            Err(Error::NotNormalized(_))
        ));
        assert!(Ensemble::new(vec![PureState::basis(2, 0)], vec![0.9]).is_err());
        assert!(EncodingKernel::new(vec![vec![0.5, 0.6]]).is_err());
        assert!(Ensemble::new(vec![], vec![]).is_err());
    }
}
