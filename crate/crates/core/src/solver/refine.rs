//! Continuous refinement of a grid solution by column generation.
//!
//! Given the dual prices of the current program, a posterior x is worth adding
//! when its reduced cost
//!
//! ```text
//! α S(Σ x_i φ_i) − Σ π_i x_i − μ H(x)
//! ```
//!
//! is negative. Candidates are found by local descent started at the current
//! support and at the cheapest other candidates, then the program is re-solved
//! on a small working set. When that stalls (prices are often degenerate) the
//! next round re-solves over the whole pool.

use super::grid::{same_point, Atom};
use super::program::{Program, Restricted};
use crate::error::Result;
use crate::linalg;
use crate::qcore::{shannon_entropy, Ensemble};

const IMPROVEMENT_TOL: f64 = 1e-9;
const NEGATIVE_RC: f64 = -1e-10;
/// Pairwise moves cost O(m²) evaluations per sweep; larger sources use mirror descent.
const PAIRWISE_MAX_STATES: usize = 8;
/// Non-support candidates with the lowest reduced cost also start a descent.
const EXTRA_STARTS: usize = 4;
/// Rounds without improvement tolerated before stopping; with degenerate
/// prices a new column can enter without moving the value.
const STALL_ROUNDS: usize = 3;

#[derive(Clone, Copy, Debug, Default)]
pub struct RefineOptions {
    /// Column-generation rounds. `None` means 500 for sources of up to
    /// eight states and 8 above, where seeds already carry most of the value.
    pub max_iterations: Option<usize>,
}

impl RefineOptions {
    pub fn iterations_for(&self, states: usize) -> usize {
        self.max_iterations
            .unwrap_or(if states <= PAIRWISE_MAX_STATES { 500 } else { 8 })
    }
}

pub(crate) struct Pricing<'a> {
    ensemble: &'a Ensemble,
    quantum_weight: f64,
    prices: &'a [f64],
    rate_price: f64,
}

impl<'a> Pricing<'a> {
    pub fn new(program: &Program<'a>, sol: &'a Restricted) -> Self {
        Pricing {
            ensemble: program.ensemble,
            quantum_weight: program.quantum_weight(sol.rate_price),
            prices: &sol.prices,
            rate_price: sol.rate_price,
        }
    }

    /// Reduced cost of a candidate whose entropies are already known.
    pub fn atom_cost(&self, atom: &Atom) -> f64 {
        let linear: f64 = atom.x.iter().zip(self.prices).map(|(a, b)| a * b).sum();
        self.quantum_weight * atom.quantum - linear - self.rate_price * atom.classical
    }

    pub fn reduced_cost(&self, x: &[f64]) -> f64 {
        let linear: f64 = x.iter().zip(self.prices).map(|(a, b)| a * b).sum();
        self.quantum_weight * self.ensemble.mixture_entropy(x) - linear - self.rate_price * shannon_entropy(x)
    }

    /// Local minimization of the reduced cost from `start`.
    pub fn descend(&self, start: &[f64]) -> (Vec<f64>, f64) {
        if start.len() <= PAIRWISE_MAX_STATES {
            self.pairwise(start)
        } else {
            self.mirror(start)
        }
    }

    fn pairwise(&self, start: &[f64]) -> (Vec<f64>, f64) {
        let m = start.len();
        let mut x = start.to_vec();
        let mut best = self.reduced_cost(&x);
        let mut step: f64 = 0.125;
        let mut evaluations = 0usize;
        while step > 1e-7 && evaluations < 20_000 {
            let mut moved = false;
            for i in 0..m {
                for j in 0..m {
                    if i == j || x[i] <= 0.0 {
                        continue;
                    }
                    let t = step.min(x[i]);
                    let mut y = x.clone();
                    y[i] -= t;
                    y[j] += t;
                    if y[i] < 1e-15 {
                        y[i] = 0.0;
                    }
                    let v = self.reduced_cost(&y);
                    evaluations += 1;
                    if v < best - 1e-15 {
                        best = v;
                        x = y;
                        moved = true;
                    }
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
        (x, best)
    }

    /// Exponentiated-gradient descent on the simplex; zero coordinates stay zero.
    fn mirror(&self, start: &[f64]) -> (Vec<f64>, f64) {
        let mut x = start.to_vec();
        let mut best = self.reduced_cost(&x);
        let mut eta = 1.0;
        for _ in 0..300 {
            let grad = self.gradient(&x);
            let mean: f64 = x.iter().zip(&grad).map(|(a, g)| a * g).sum();
            let mut accepted = false;
            while eta > 1e-9 {
                let mut y: Vec<f64> = x
                    .iter()
                    .zip(&grad)
                    .map(|(&a, &g)| {
                        if a > 0.0 {
                            a * (-eta * (g - mean)).clamp(-50.0, 50.0).exp()
                        } else {
                            0.0
                        }
                    })
                    .collect();
                let s: f64 = y.iter().sum();
                y.iter_mut().for_each(|v| *v /= s);
                let v = self.reduced_cost(&y);
                if v < best - 1e-15 {
                    best = v;
                    x = y;
                    eta *= 1.5;
                    accepted = true;
                    break;
                }
                eta *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        (x, best)
    }

    /// Gradient of the reduced cost up to an additive constant.
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let rho = self.ensemble.mixture_matrix(x);
        let eig = linalg::hermitian_eigen(&rho);
        let logs: Vec<f64> = eig.values.iter().map(|&l| l.max(1e-300).log2()).collect();
        let d = rho.dim();
        self.ensemble
            .states()
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let mut expect = 0.0;
                for k in 0..d {
                    let e = eig.vector(k);
                    expect += logs[k] * linalg::inner(&e, s.amplitudes()).norm_sqr();
                }
                let entropy_term = if x[i] > 0.0 { self.rate_price * x[i].log2() } else { 0.0 };
                -self.quantum_weight * expect - self.prices[i] + entropy_term
            })
            .collect()
    }
}

/// Column generation from the optimum over `pool`. New atoms are appended to
/// `pool`; the returned solution indexes into it.
pub(crate) fn refine(
    program: &Program,
    pool: &mut Vec<Atom>,
    base: &[usize],
    options: RefineOptions,
) -> Result<Restricted> {
    let mut sol = program.solve(pool, None)?;
    let mut stalled = 0;
    for _ in 0..options.iterations_for(program.ensemble.len()) {
        let pricing = Pricing::new(program, &sol);
        let mut starts: Vec<usize> = sol.weights.iter().map(|w| w.0).collect();
        let mut others: Vec<(f64, usize)> = (0..pool.len())
            .filter(|i| !starts.contains(i))
            .map(|i| (pricing.atom_cost(&pool[i]), i))
            .collect();
        let extra = EXTRA_STARTS.min(others.len());
        if extra > 0 {
            others.select_nth_unstable_by(extra - 1, |a, b| a.0.total_cmp(&b.0));
            others[..extra].sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            starts.extend(others[..extra].iter().map(|o| o.1));
        }
        let mut fresh = Vec::new();
        for idx in starts {
            let (y, rc) = pricing.descend(&pool[idx].x);
            if rc < NEGATIVE_RC && !fresh.iter().any(|a: &Atom| same_point(&a.x, &y)) {
                fresh.push(Atom::new(program.ensemble, y));
            }
        }
        if fresh.is_empty() {
            break;
        }
        let mut working: Vec<usize> = base.to_vec();
        working.extend(sol.weights.iter().map(|w| w.0));
        for atom in fresh {
            working.push(pool.len());
            pool.push(atom);
        }
        working.sort_unstable();
        working.dedup();
        let next = if stalled > 0 {
            program.solve(pool, None)?
        } else {
            program.solve(pool, Some(&working))?
        };
        let gain = sol.value - next.value;
        sol = next;
        if gain < IMPROVEMENT_TOL {
            stalled += 1;
            if stalled >= STALL_ROUNDS {
                break;
            }
        } else {
            stalled = 0;
        }
    }
    Ok(sol)
}
