//! Types, typical sequences and conditional typicality.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::qcore::{check_probabilities, eta, shannon_entropy, EncodingKernel};

/// Slack on typicality comparisons so exact types are never rejected by rounding.
const COMPARE_SLACK: f64 = 1e-9;

/// Empirical counts N(i|I) of a length-n sequence.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TypeVector {
    counts: Vec<usize>,
    n: usize,
}

impl TypeVector {
    pub fn new(counts: Vec<usize>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::Empty("type"));
        }
        let n = counts.iter().sum();
        Ok(TypeVector { counts, n })
    }

    pub fn from_sequence(seq: &[usize], alphabet: usize) -> Result<Self> {
        let mut counts = vec![0; alphabet];
        for &s in seq {
            *counts
                .get_mut(s)
                .ok_or_else(|| Error::InvalidArgument(format!("symbol {s} outside an alphabet of {alphabet}")))? += 1;
        }
        TypeVector::new(counts)
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn alphabet(&self) -> usize {
        self.counts.len()
    }

    /// P_I(i) = N(i|I)/n.
    pub fn distribution(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64 / self.n.max(1) as f64).collect()
    }

    /// |P_I(i) − P(i)| ≤ δ/√n for every i.
    pub fn is_typical(&self, p: &[f64], delta: f64) -> bool {
        if p.len() != self.counts.len() || self.n == 0 {
            return false;
        }
        let n = self.n as f64;
        let radius = delta * n.sqrt() + COMPARE_SLACK;
        self.counts
            .iter()
            .zip(p)
            .all(|(&c, &pi)| (c as f64 - n * pi).abs() <= radius)
    }

    /// All types of length `n` over `alphabet` symbols.
    pub fn all(n: usize, alphabet: usize) -> Vec<TypeVector> {
        let mut out = Vec::new();
        for_each_composition(n, alphabet, &mut |c| out.push(TypeVector { counts: c.to_vec(), n }));
        out
    }

    /// Types of length `n` inside T_{P,δ}.
    pub fn typical(p: &[f64], delta: f64, n: usize) -> Vec<TypeVector> {
        let nf = n as f64;
        let radius = delta * nf.sqrt() + COMPARE_SLACK;
        let k = p.len();
        let mut out = Vec::new();
        let mut counts = vec![0usize; k];
        fn rec(
            i: usize,
            left: usize,
            p: &[f64],
            nf: f64,
            radius: f64,
            counts: &mut Vec<usize>,
            out: &mut Vec<TypeVector>,
        ) {
            let k = p.len();
            if i + 1 == k {
                if (left as f64 - nf * p[i]).abs() <= radius {
                    counts[i] = left;
                    out.push(TypeVector {
                        counts: counts.clone(),
                        n: nf as usize,
                    });
                }
                return;
            }
            let lo = (nf * p[i] - radius).ceil().max(0.0) as usize;
            let hi = ((nf * p[i] + radius).floor().max(-1.0) as i64).min(left as i64);
            for c in lo as i64..=hi {
                counts[i] = c as usize;
                rec(i + 1, left - c as usize, p, nf, radius, counts, out);
            }
        }
        if k > 0 {
            rec(0, n, p, nf, radius, &mut counts, &mut out);
        }
        out
    }

    /// |T_P| = n! / Π N(i)!, or `None` on overflow.
    pub fn class_size(&self) -> Option<u128> {
        let mut acc: u128 = 1;
        let mut placed = 0u128;
        for &c in &self.counts {
            // Multiply by C(placed + c, c) one factor at a time; every prefix is an integer.
            for t in 1..=c as u128 {
                placed += 1;
                acc = acc.checked_mul(placed)? / t;
            }
        }
        Some(acc)
    }

    pub fn log2_class_size(&self) -> f64 {
        let lf = LnFactorial::new(self.n);
        (lf.get(self.n) - self.counts.iter().map(|&c| lf.get(c)).sum::<f64>()) / std::f64::consts::LN_2
    }
}

/// Calls `f` on every composition of `n` into `parts` nonnegative parts.
pub(crate) fn for_each_composition(n: usize, parts: usize, f: &mut dyn FnMut(&[usize])) {
    fn rec(i: usize, left: usize, c: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if i + 1 == c.len() {
            c[i] = left;
            f(c);
            return;
        }
        for v in 0..=left {
            c[i] = v;
            rec(i + 1, left - v, c, f);
        }
    }
    if parts == 0 {
        return;
    }
    let mut c = vec![0; parts];
    rec(0, n, &mut c, f);
}

/// Table of ln k! for k ≤ n.
#[derive(Clone, Debug)]
pub(crate) struct LnFactorial(Vec<f64>);

impl LnFactorial {
    pub fn new(n: usize) -> Self {
        let mut t = Vec::with_capacity(n + 1);
        t.push(0.0);
        for k in 1..=n {
            t.push(t[k - 1] + (k as f64).ln());
        }
        LnFactorial(t)
    }

    pub fn get(&self, k: usize) -> f64 {
        self.0[k]
    }

    /// ln of the multinomial probability of `counts` under `probs`;
    /// −∞ when a positive count meets a zero probability.
    pub fn ln_multinomial(&self, counts: &[usize], probs: &[f64]) -> f64 {
        let n: usize = counts.iter().sum();
        let mut v = self.get(n);
        for (&c, &p) in counts.iter().zip(probs) {
            if c > 0 {
                if p <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                v += c as f64 * p.ln() - self.get(c);
            }
        }
        v
    }
}

/// log₂ bounds on |T_P| and |T_{P,δ}|.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CountBounds {
    pub class_lower: f64,
    pub class_upper: f64,
    pub typical_lower: f64,
    pub typical_upper: f64,
}

/// (n+1)^{−|I|} 2^{nH(P)} ≤ |T_P| ≤ 2^{nH(P)} and the corresponding bounds
/// on |T_{P,δ}| with the entropy shifted by ±|I| η(δ/√n).
pub fn typical_count_bounds(p: &[f64], delta: f64, n: usize) -> Result<CountBounds> {
    check_probabilities(p)?;
    if !(delta > 0.0) || n == 0 {
        return Err(Error::InvalidArgument("need δ > 0 and n ≥ 1".into()));
    }
    let nf = n as f64;
    let k = p.len() as f64;
    let h = shannon_entropy(p);
    let poly = k * (nf + 1.0).log2();
    let shift = k * eta(delta / nf.sqrt())?;
    Ok(CountBounds {
        class_lower: nf * h - poly,
        class_upper: nf * h,
        typical_lower: nf * (h - shift) - poly,
        typical_upper: nf * (h + shift) + poly,
    })
}

/// Exact |T_{P,δ}|, or `None` on overflow.
pub fn typical_set_size(p: &[f64], delta: f64, n: usize) -> Option<u128> {
    TypeVector::typical(p, delta, n)
        .iter()
        .try_fold(0u128, |acc, t| acc.checked_add(t.class_size()?))
}

/// Stochastic matrix W(j|i).
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelMatrix {
    rows: Vec<Vec<f64>>,
}

impl ChannelMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        Ok(ChannelMatrix {
            rows: EncodingKernel::new(rows)?.rows().to_vec(),
        })
    }

    pub fn identity(k: usize) -> Self {
        ChannelMatrix {
            rows: EncodingKernel::identity(k).rows().to_vec(),
        }
    }

    /// Binary symmetric channel with crossover `p`.
    pub fn bsc(p: f64) -> Result<Self> {
        ChannelMatrix::new(vec![vec![1.0 - p, p], vec![p, 1.0 - p]])
    }

    /// Every input mapped to the same output law `q`.
    pub fn constant(inputs: usize, q: &[f64]) -> Result<Self> {
        ChannelMatrix::new(vec![q.to_vec(); inputs])
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

    pub fn output_law(&self, p: &[f64]) -> Vec<f64> {
        let mut q = vec![0.0; self.outputs()];
        for (row, &pi) in self.rows.iter().zip(p) {
            for (qj, &w) in q.iter_mut().zip(row) {
                *qj += pi * w;
            }
        }
        q
    }

    /// H(W|P) = Σ_i P(i) H(W(·|i)).
    pub fn conditional_entropy(&self, p: &[f64]) -> f64 {
        self.rows.iter().zip(p).map(|(r, &pi)| pi * shannon_entropy(r)).sum()
    }

    /// H(P:W) = H(PW) − H(W|P).
    pub fn mutual_information(&self, p: &[f64]) -> f64 {
        (shannon_entropy(&self.output_law(p)) - self.conditional_entropy(p)).max(0.0)
    }
}

impl From<&EncodingKernel> for ChannelMatrix {
    fn from(k: &EncodingKernel) -> Self {
        ChannelMatrix {
            rows: k.rows().to_vec(),
        }
    }
}

/// Joint counts N(i, j) of a pair of sequences, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct JointType {
    pub inputs: usize,
    pub outputs: usize,
    pub counts: Vec<usize>,
}

impl JointType {
    pub fn from_sequences(i_seq: &[usize], j_seq: &[usize], inputs: usize, outputs: usize) -> Result<Self> {
        if i_seq.len() != j_seq.len() {
            return Err(Error::DimensionMismatch {
                expected: i_seq.len(),
                got: j_seq.len(),
            });
        }
        let mut counts = vec![0; inputs * outputs];
        for (&i, &j) in i_seq.iter().zip(j_seq) {
            if i >= inputs || j >= outputs {
                return Err(Error::InvalidArgument(format!("pair ({i}, {j}) outside the alphabets")));
            }
            counts[i * outputs + j] += 1;
        }
        Ok(JointType {
            inputs,
            outputs,
            counts,
        })
    }

    pub fn get(&self, i: usize, j: usize) -> usize {
        self.counts[i * self.outputs + j]
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.counts[i * self.outputs..(i + 1) * self.outputs]
    }

    pub fn row_sum(&self, i: usize) -> usize {
        self.row(i).iter().sum()
    }

    /// |N(i,j) − N(i) W(j|i)| ≤ δ√N(i) + ε N(i) for all i with N(i) > 0.
    pub fn is_cond_typical(&self, w: &ChannelMatrix, delta: f64, eps_robust: f64) -> bool {
        if w.inputs() != self.inputs || w.outputs() != self.outputs {
            return false;
        }
        (0..self.inputs).all(|i| {
            let ni = self.row_sum(i) as f64;
            if ni == 0.0 {
                return true;
            }
            let radius = delta * ni.sqrt() + eps_robust * ni + COMPARE_SLACK;
            self.row(i)
                .iter()
                .zip(&w.rows[i])
                .all(|(&c, &wij)| (c as f64 - ni * wij).abs() <= radius)
        })
    }
}

pub fn is_typical(seq: &[usize], p: &[f64], delta: f64) -> bool {
    TypeVector::from_sequence(seq, p.len()).is_ok_and(|t| t.is_typical(p, delta))
}

/// J ∈ T_{W,δ}(I), widened by ε N(i) in count form when `eps_robust` > 0.
pub fn is_cond_typical(j_seq: &[usize], i_seq: &[usize], w: &ChannelMatrix, delta: f64, eps_robust: f64) -> bool {
    JointType::from_sequences(i_seq, j_seq, w.inputs(), w.outputs())
        .is_ok_and(|t| t.is_cond_typical(w, delta, eps_robust))
}

/// Monte-Carlo estimate of a probability with a 95% normal-approximation half width.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub half_width: f64,
    pub samples: usize,
}

impl Estimate {
    pub fn from_mean_and_variance(mean: f64, variance: f64, samples: usize) -> Self {
        Estimate {
            mean,
            half_width: 1.96 * (variance.max(0.0) / samples.max(1) as f64).sqrt(),
            samples,
        }
    }

    pub(crate) fn from_values(values: &[f64]) -> Self {
        let n = values.len().max(1) as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        Estimate::from_mean_and_variance(mean, var, values.len())
    }

    fn bernoulli(hits: usize, samples: usize) -> Self {
        let m = hits as f64 / samples.max(1) as f64;
        Estimate::from_mean_and_variance(m, m * (1.0 - m), samples)
    }
}

pub(crate) fn sample_index<R: Rng>(rng: &mut R, cdf: &[f64]) -> usize {
    let u: f64 = rng.gen::<f64>() * cdf[cdf.len() - 1];
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
}

pub(crate) fn cumulative(p: &[f64]) -> Vec<f64> {
    p.iter()
        .scan(0.0, |acc, &v| {
            *acc += v;
            Some(*acc)
        })
        .collect()
}

/// Draws a length-n sequence from P^{⊗n}.
pub fn sample_sequence<R: Rng>(rng: &mut R, p: &[f64], n: usize) -> Vec<usize> {
    let cdf = cumulative(p);
    (0..n).map(|_| sample_index(rng, &cdf)).collect()
}

/// Draws a typical sequence by rejection from P^{⊗n}.
pub fn sample_typical_sequence<R: Rng>(rng: &mut R, p: &[f64], delta: f64, n: usize) -> Result<Vec<usize>> {
    for _ in 0..10_000 {
        let s = sample_sequence(rng, p, n);
        if is_typical(&s, p, delta) {
            return Ok(s);
        }
    }
    Err(Error::BudgetExceeded(format!(
        "no typical sequence in 10000 draws (n = {n}, δ = {delta})"
    )))
}

/// P^{⊗n}(T_{P,δ}) by sampling.
pub fn typical_mass_mc(p: &[f64], delta: f64, n: usize, samples: usize, seed: u64) -> Result<Estimate> {
    check_probabilities(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hits = (0..samples)
        .filter(|_| is_typical(&sample_sequence(&mut rng, p, n), p, delta))
        .count();
    Ok(Estimate::bernoulli(hits, samples))
}

/// W_I(T_{W,δ}(I)) by sampling J from W(·|i_1) ⊗ … ⊗ W(·|i_n).
pub fn cond_typical_mass_mc(
    i_seq: &[usize],
    w: &ChannelMatrix,
    delta: f64,
    samples: usize,
    seed: u64,
) -> Result<Estimate> {
    if let Some(&bad) = i_seq.iter().find(|&&i| i >= w.inputs()) {
        return Err(Error::InvalidArgument(format!(
            "symbol {bad} outside the channel inputs"
        )));
    }
    let cdfs: Vec<Vec<f64>> = w.rows.iter().map(|r| cumulative(r)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hits = (0..samples)
        .filter(|_| {
            let j: Vec<usize> = i_seq.iter().map(|&i| sample_index(&mut rng, &cdfs[i])).collect();
            is_cond_typical(&j, i_seq, w, delta, 0.0)
        })
        .count();
    Ok(Estimate::bernoulli(hits, samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_type_is_typical() {
        let t = TypeVector::new(vec![3, 1]).unwrap();
        assert!(t.is_typical(&[0.75, 0.25], 1e-6));
        assert!(!t.is_typical(&[0.5, 0.5], 0.1));
    }

    #[test]
    fn central_binomial_class() {
        let t = TypeVector::new(vec![5, 5]).unwrap();
        assert_eq!(t.class_size(), Some(252));
        assert!((t.log2_class_size() - 252f64.log2()).abs() < 1e-12);
        let b = typical_count_bounds(&[0.5, 0.5], 1.0, 10).unwrap();
        let l = 252f64.log2();
        assert!(b.class_lower <= l && l <= b.class_upper);
    }

    #[test]
    fn type_count_is_polynomial() {
        for (n, k) in [(5, 2), (7, 3), (4, 4)] {
            let all = TypeVector::all(n, k);
            let binom = (1..k).fold(1u64, |acc, i| acc * (n + i) as u64 / i as u64);
            assert_eq!(all.len() as u64, binom);
            assert!((all.len() as f64) <= ((n + 1) as f64).powi(k as i32));
        }
    }

    #[test]
    fn typical_types_match_membership() {
        let p = [0.5, 0.3, 0.2];
        let typ = TypeVector::typical(&p, 0.7, 12);
        let all = TypeVector::all(12, 3);
        let count = all.iter().filter(|t| t.is_typical(&p, 0.7)).count();
        assert_eq!(typ.len(), count);
        assert!(typ.iter().all(|t| t.is_typical(&p, 0.7)));
    }

    #[test]
    fn deterministic_channel_output_is_cond_typical() {
        let w = ChannelMatrix::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let i = [0, 1, 1, 0, 1];
        let j: Vec<usize> = i.iter().map(|&x| 1 - x).collect();
        assert!(is_cond_typical(&j, &i, &w, 1e-3, 0.0));
        assert!(!is_cond_typical(&i, &i, &w, 0.1, 0.0));
    }

    #[test]
    fn bsc_information() {
        let w = ChannelMatrix::bsc(0.11).unwrap();
        assert!((w.mutual_information(&[0.5, 0.5]) - 0.500084).abs() < 1e-6);
    }

    #[test]
    fn monte_carlo_masses_exceed_chebyshev() {
        let e = typical_mass_mc(&[0.3, 0.7], 2.0, 50, 4000, 1).unwrap();
        assert!(e.mean + e.half_width >= 1.0 - 1.0 / 4.0);
        let w = ChannelMatrix::bsc(0.2).unwrap();
        let i: Vec<usize> = (0..60).map(|k| k % 2).collect();
        let c = cond_typical_mass_mc(&i, &w, 2.0, 4000, 2).unwrap();
        assert!(c.mean + c.half_width >= 1.0 - 2.0 / 4.0);
    }

    proptest! {
        #[test]
        fn robust_widening_only_adds(
            seq in prop::collection::vec((0usize..2, 0usize..3), 1..40),
            delta in 0.05f64..3.0,
            eps in 0.0f64..0.5,
        ) {
            let w = ChannelMatrix::new(vec![vec![0.2, 0.5, 0.3], vec![0.6, 0.1, 0.3]]).unwrap();
            let (i, j): (Vec<usize>, Vec<usize>) = seq.into_iter().unzip();
            if is_cond_typical(&j, &i, &w, delta, 0.0) {
                prop_assert!(is_cond_typical(&j, &i, &w, delta, eps));
            }
        }

        #[test]
        fn class_sizes_sum_to_power(n in 1usize..12, k in 1usize..4) {
            let total: u128 = TypeVector::all(n, k).iter().map(|t| t.class_size().unwrap()).sum();
            prop_assert_eq!(total, (k as u128).pow(n as u32));
        }
    }
}
