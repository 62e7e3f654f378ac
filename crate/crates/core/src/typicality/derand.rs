//! Replacing shared randomness by a short list of sampled indices.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::types::{cumulative, sample_index};
use crate::error::{Error, Result};
use crate::qcore::check_probabilities;

pub const MAX_ATTEMPTS: usize = 10;

/// Chernoff–Hoeffding tail exp(−L ε² μ / (2 ln 2)) for the mean of L draws
/// falling below (1 − ε) μ.
pub fn chernoff_tail(samples: usize, eps: f64, mu: f64) -> f64 {
    (-(samples as f64) * eps * eps * mu / (2.0 * std::f64::consts::LN_2)).exp()
}

/// Smallest integer L above 2δ⁴ ln 2 · n log₂|I| / (|I|²|J|² μ).
pub fn required_samples(delta: f64, n: usize, inputs: usize, outputs: usize, mu: f64) -> usize {
    let (i, j) = (inputs as f64, outputs as f64);
    let l = 2.0 * delta.powi(4) * std::f64::consts::LN_2 * n as f64 * i.log2() / (i * i * j * j * mu);
    l.floor() as usize + 1
}

#[derive(Clone, Debug, PartialEq)]
pub struct Derandomized {
    pub indices: Vec<usize>,
    /// min over rows of Σ_ν x_ν F_I(ν).
    pub mu: f64,
    /// Worst row mean over the chosen indices.
    pub worst_mean: f64,
    pub attempts: usize,
}

/// Draws L indices from `x` until every row's mean over them is at least
/// (1 − ε) μ, μ being the smallest row expectation. Gives up after
/// [`MAX_ATTEMPTS`] draws.
pub fn derandomize(table: &[Vec<f64>], x: &[f64], samples: usize, eps: f64, seed: u64) -> Result<Derandomized> {
    check_probabilities(x)?;
    if table.is_empty() {
        return Err(Error::Empty("fidelity table"));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("ε must lie in (0, 1), got {eps}")));
    }
    if samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    for row in table {
        if row.len() != x.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                got: row.len(),
            });
        }
        if row.iter().any(|&f| !(0.0..=1.0).contains(&f)) {
            return Err(Error::InvalidArgument("fidelities must lie in [0, 1]".into()));
        }
    }
    let mu = table
        .iter()
        .map(|row| row.iter().zip(x).map(|(f, p)| f * p).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    let cdf = cumulative(x);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut last = 0.0;
    for attempt in 1..=MAX_ATTEMPTS {
        let indices: Vec<usize> = (0..samples).map(|_| sample_index(&mut rng, &cdf)).collect();
        let worst = table
            .iter()
            .map(|row| indices.iter().map(|&v| row[v]).sum::<f64>() / samples as f64)
            .fold(f64::INFINITY, f64::min);
        if worst >= (1.0 - eps) * mu - 1e-12 {
            return Ok(Derandomized {
                indices,
                mu,
                worst_mean: worst,
                attempts: attempt,
            });
        }
        last = worst;
    }
    Err(Error::VerificationFailed {
        attempts: MAX_ATTEMPTS,
        reason: format!("worst row mean {last:.6} below (1 − ε)μ = {:.6}", (1.0 - eps) * mu),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn constant_table_accepts_one_draw() {
        let t = vec![vec![1.0; 5]; 3];
        let d = derandomize(&t, &[0.2; 5], 1, 0.1, 0).unwrap();
        assert_eq!(d.indices.len(), 1);
        assert_eq!(d.attempts, 1);
    }

    #[test]
    fn zero_epsilon_is_rejected() {
        let t = vec![vec![1.0; 2]];
        assert!(derandomize(&t, &[0.5, 0.5], 4, 0.0, 0).is_err());
    }

    #[test]
    fn adversarial_table_fails() {
        // Each row is perfect on one index only; one draw cannot serve both rows.
        let t = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert!(matches!(
            derandomize(&t, &[0.5, 0.5], 1, 0.1, 3),
            Err(Error::VerificationFailed { .. })
        ));
    }

    #[test]
    fn bound_sized_lists_succeed_on_random_tables() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (rows, cols) = (16, 200);
        let table: Vec<Vec<f64>> = (0..rows)
            .map(|_| (0..cols).map(|_| 0.8 + 0.2 * rng.gen::<f64>()).collect())
            .collect();
        let x = vec![1.0 / cols as f64; cols];
        // |I| = 2, n = 4 gives |I|^n = 16 rows; ε = |I||J|/δ².
        let delta = 3.0;
        let eps = 4.0 / (delta * delta);
        let l = required_samples(delta, 4, 2, 2, 0.9);
        assert!(chernoff_tail(l, eps, 0.9) * rows as f64 <= 1.0);
        for seed in 0..20 {
            let d = derandomize(&table, &x, l, eps, seed).unwrap();
            assert!(d.worst_mean >= (1.0 - eps) * d.mu);
        }
    }
}
