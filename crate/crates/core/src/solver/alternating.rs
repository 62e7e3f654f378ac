//! Alternating minimization of the Lagrangian
//!
//! ```text
//! Σ_ij p_i p(j|i) [ −⟨φ_i| log σ_j |φ_i⟩ + β log(p(j|i) / r_j) ]
//! ```
//!
//! over the kernel p(j|i), the reference states σ_j and the output law r_j.
//! Each step is a closed-form minimization, so the objective never increases.
//! The fixed points are achievable decompositions, so they give an
//! independent upper bound on the program's optimum.

use super::grid::Atom;
use crate::linalg;
use crate::qcore::Ensemble;

const MAX_SWEEPS: usize = 400;
const EIGEN_FLOOR: f64 = 1e-30;

/// Slopes used when no particular rate is targeted.
pub fn default_slopes() -> Vec<f64> {
    let n = 18;
    (0..n)
        .map(|k| {
            let t = k as f64 / (n - 1) as f64;
            0.02f64.powf(1.0 - t) * 0.98f64.powf(t)
        })
        .collect()
}

/// Posteriors of the fixed point reached at slope `beta` ∈ (0, 1).
pub fn alternating_posteriors(ensemble: &Ensemble, prior: &[f64], beta: f64) -> Vec<Vec<f64>> {
    let m = ensemble.len();
    let states = ensemble.states();
    // Start from soft self-assignment: symbol j tracks state j.
    let sharp = 4.0 / beta.max(1e-3);
    let mut kernel: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let row: Vec<f64> = (0..m).map(|j| (sharp * states[i].overlap(&states[j])).exp()).collect();
            let s: f64 = row.iter().sum();
            row.into_iter().map(|v| v / s).collect()
        })
        .collect();

    let mut posteriors = Vec::new();
    for _ in 0..MAX_SWEEPS {
        let q: Vec<f64> = (0..m).map(|j| (0..m).map(|i| prior[i] * kernel[i][j]).sum()).collect();
        posteriors = (0..m)
            .map(|j| {
                if q[j] <= 1e-14 {
                    None
                } else {
                    Some((0..m).map(|i| prior[i] * kernel[i][j] / q[j]).collect::<Vec<f64>>())
                }
            })
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect();

        // Cost c_ij = −⟨φ_i| log σ_j |φ_i⟩ with σ_j the posterior mixture.
        let mut log_cost = vec![vec![f64::INFINITY; m]; m];
        for j in 0..m {
            if q[j] <= 1e-14 {
                continue;
            }
            let x: Vec<f64> = (0..m).map(|i| prior[i] * kernel[i][j] / q[j]).collect();
            let eig = linalg::hermitian_eigen(&ensemble.mixture_matrix(&x));
            let d = ensemble.dim();
            let logs: Vec<f64> = eig.values.iter().map(|&l| l.max(EIGEN_FLOOR).log2()).collect();
            let vecs: Vec<_> = (0..d).map(|k| eig.vector(k)).collect();
            for i in 0..m {
                let expect: f64 = (0..d)
                    .map(|k| logs[k] * linalg::inner(&vecs[k], states[i].amplitudes()).norm_sqr())
                    .sum();
                log_cost[i][j] = -expect;
            }
        }

        let mut change = 0.0f64;
        for i in 0..m {
            let exps: Vec<f64> = (0..m)
                .map(|j| {
                    if q[j] <= 1e-14 {
                        f64::NEG_INFINITY
                    } else {
                        q[j].log2() - log_cost[i][j] / beta
                    }
                })
                .collect();
            let top = exps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let row: Vec<f64> = exps.iter().map(|&e| (e - top).exp2()).collect();
            let s: f64 = row.iter().sum();
            for j in 0..m {
                let v = row[j] / s;
                change = change.max((v - kernel[i][j]).abs());
                kernel[i][j] = v;
            }
        }
        if change < 1e-11 {
            break;
        }
    }
    posteriors
}

/// Posteriors tilted towards each member state: x_i ∝ p_i exp(κ |⟨φ_i|φ_j⟩|²)
/// over a geometric ladder of κ.
pub(crate) fn tilted_atoms(ensemble: &Ensemble, prior: &[f64], steps: usize) -> Vec<Atom> {
    let states = ensemble.states();
    let mut atoms = Vec::new();
    for k in 0..steps {
        let kappa = 0.5 * 400f64.powf(k as f64 / (steps - 1).max(1) as f64);
        for target in states {
            let mut x: Vec<f64> = states
                .iter()
                .zip(prior)
                .map(|(s, &p)| p * (kappa * (s.overlap(target) - 1.0)).exp())
                .collect();
            let total: f64 = x.iter().sum();
            x.iter_mut().for_each(|v| *v /= total);
            atoms.push(Atom::new(ensemble, x));
        }
    }
    atoms
}
