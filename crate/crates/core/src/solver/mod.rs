//! Trade-off curves through the barycentric decomposition program.
//!
//! An encoding p(j|i) is equivalent to writing the prior as an average of
//! posteriors, p = Σ_j q_j q(·|j). With candidate posteriors fixed, the
//! objective Σ q_j S(f(q(·|j))) and the rate constraint are linear in the
//! weights q_j, so the optimum over a candidate set is a linear program. A
//! lattice over the simplex gives the candidates, and column generation
//! refines them.

mod alternating;
mod grid;
pub(crate) mod lp;
mod program;
mod refine;

use rayon::prelude::*;

pub use alternating::{alternating_posteriors, default_slopes};
pub use grid::{default_resolution, lattice_size, Atom, SimplexGrid, MAX_GRID_POINTS};
pub use lp::{LinearProgram, LpSolution};
pub use program::Budget;
pub use refine::RefineOptions;

pub(crate) use grid::same_point;
pub(crate) use program::{Program, Restricted};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::qcore::{shannon_entropy, EncodingKernel, Ensemble, PureState};

/// Rates above the prior entropy by less than this are treated as equal to it.
pub const RATE_SLACK: f64 = 1e-9;
const TILT_STEPS: usize = 16;

/// One posterior of a decomposition of the prior.
#[derive(Clone, Debug, PartialEq)]
pub struct DecompositionPoint {
    pub posterior: Vec<f64>,
    pub weight: f64,
}

/// Converts a decomposition to the kernel p(j|i) = w_j x_j(i) / p_i.
pub fn witness_kernel(witness: &[DecompositionPoint], prior: &[f64]) -> Result<EncodingKernel> {
    if witness.is_empty() {
        return Err(Error::Empty("witness"));
    }
    let total: f64 = witness.iter().map(|w| w.weight).sum();
    let rows = prior
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let mut row: Vec<f64> = if p > 0.0 {
                witness.iter().map(|w| w.weight * w.posterior[i] / p).collect()
            } else {
                witness.iter().map(|w| w.weight / total).collect()
            };
            let s: f64 = row.iter().sum();
            row.iter_mut().for_each(|v| *v /= s);
            row
        })
        .collect();
    EncodingKernel::new(rows)
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub refine: Option<RefineOptions>,
    /// Add posteriors tilted towards each member state to the candidates.
    pub seeds: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            refine: Some(RefineOptions::default()),
            seeds: true,
        }
    }
}

impl SolveOptions {
    pub fn grid_only() -> Self {
        SolveOptions {
            refine: None,
            seeds: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub rate: f64,
    pub value: f64,
    pub witness: Vec<DecompositionPoint>,
    pub grid_resolution: usize,
    /// Declared discretization error of `value`.
    pub tolerance: f64,
}

impl Solution {
    pub fn support_size(&self) -> usize {
        self.witness.len()
    }

    pub fn kernel(&self, prior: &[f64]) -> Result<EncodingKernel> {
        witness_kernel(&self.witness, prior)
    }
}

fn check_rate(rate: f64) -> Result<()> {
    if rate.is_nan() {
        return Err(Error::InvalidArgument("rate is NaN".into()));
    }
    if rate < 0.0 {
        return Err(Error::Infeasible(format!("negative rate {rate}")));
    }
    Ok(())
}

fn check_grid(ensemble: &Ensemble, grid: &SimplexGrid) -> Result<()> {
    match grid.atoms().first() {
        Some(a) if a.x.len() == ensemble.len() => Ok(()),
        Some(a) => Err(Error::DimensionMismatch {
            expected: ensemble.len(),
            got: a.x.len(),
        }),
        None => Err(Error::Empty("grid")),
    }
}

/// Candidate pool: grid atoms, the prior and optional tilted seeds.
pub(crate) fn candidate_pool(
    ensemble: &Ensemble,
    prior: &[f64],
    grid: &SimplexGrid,
    options: &SolveOptions,
) -> Vec<Atom> {
    let mut pool = grid.atoms().to_vec();
    if !pool.iter().any(|a| grid::same_point(&a.x, prior)) {
        pool.push(Atom::new(ensemble, prior.to_vec()));
    }
    if options.seeds {
        pool.extend(alternating::tilted_atoms(ensemble, prior, TILT_STEPS));
    }
    pool
}

/// Indices of the vertices and the prior, always kept in working sets.
pub(crate) fn base_indices(pool: &[Atom], prior: &[f64]) -> Vec<usize> {
    pool.iter()
        .enumerate()
        .filter(|(_, a)| grid::same_point(&a.x, prior) || a.x.iter().filter(|&&v| v > 0.0).count() == 1)
        .map(|(i, _)| i)
        .collect()
}

pub(crate) fn witness_of(pool: &[Atom], sol: &Restricted) -> Vec<DecompositionPoint> {
    sol.weights
        .iter()
        .map(|&(i, w)| DecompositionPoint {
            posterior: pool[i].x.clone(),
            weight: w,
        })
        .collect()
}

/// Solves the program for one rate and returns the solution together with the
/// full candidate pool, including generated columns.
pub(crate) fn solve_program(
    program: &Program,
    mut pool: Vec<Atom>,
    options: &SolveOptions,
) -> Result<(Restricted, Vec<Atom>)> {
    let sol = match options.refine {
        Some(opts) => {
            let base = base_indices(&pool, program.prior);
            refine::refine(program, &mut pool, &base, opts)?
        }
        None => program.solve(&pool, None)?,
    };
    Ok((sol, pool))
}

fn solve_with_budget(
    ensemble: &Ensemble,
    prior: &[f64],
    rate: f64,
    budget: Budget,
    grid: &SimplexGrid,
    options: &SolveOptions,
) -> Result<Solution> {
    check_rate(rate)?;
    check_grid(ensemble, grid)?;
    let pool = candidate_pool(ensemble, prior, grid, options);
    let program = Program::new(ensemble, prior, rate, budget);
    let (sol, pool) = solve_program(&program, pool, options)?;
    Ok(Solution {
        rate,
        value: sol.value,
        witness: witness_of(&pool, &sol),
        grid_resolution: grid.resolution(),
        tolerance: grid.tolerance(),
    })
}

/// M(E, R): least average conditional entropy of a decomposition with
/// classical information at most `rate`.
pub fn solve_m(ensemble: &Ensemble, rate: f64, grid: &SimplexGrid) -> Result<Solution> {
    solve_m_with(ensemble, rate, grid, &SolveOptions::default())
}

pub fn solve_m_with(ensemble: &Ensemble, rate: f64, grid: &SimplexGrid, options: &SolveOptions) -> Result<Solution> {
    solve_with_budget(ensemble, ensemble.probs(), rate, Budget::Classical, grid, options)
}

/// M at a different prior over the same states.
pub fn solve_m_at_prior(
    ensemble: &Ensemble,
    prior: &[f64],
    rate: f64,
    grid: &SimplexGrid,
    options: &SolveOptions,
) -> Result<Solution> {
    crate::qcore::check_probabilities(prior)?;
    if prior.len() != ensemble.len() {
        return Err(Error::DimensionMismatch {
            expected: ensemble.len(),
            got: prior.len(),
        });
    }
    solve_with_budget(ensemble, prior, rate, Budget::Classical, grid, options)
}

/// X(E, R) = R + M(E, R).
pub fn solve_x(ensemble: &Ensemble, rate: f64, grid: &SimplexGrid) -> Result<f64> {
    Ok(rate + solve_m(ensemble, rate, grid)?.value)
}

/// N(E, R): least conditional quantum information with total information at
/// most `rate`. Infeasible below S(E).
pub fn solve_n_rsp(ensemble: &Ensemble, rate: f64, grid: &SimplexGrid) -> Result<Solution> {
    let floor = ensemble.entropy();
    if rate < floor - RATE_SLACK {
        return Err(Error::Infeasible(format!(
            "total information cannot fall below S(E) = {floor:.6} bits (asked for {rate:.6})"
        )));
    }
    solve_with_budget(
        ensemble,
        ensemble.probs(),
        rate.max(floor),
        Budget::Total,
        grid,
        &SolveOptions::default(),
    )
}

#[derive(Clone, Debug)]
pub struct CurveSample {
    pub rate: f64,
    pub value: f64,
    pub kernel: EncodingKernel,
    pub witness: Vec<DecompositionPoint>,
}

impl CurveSample {
    pub fn support_size(&self) -> usize {
        self.witness.len()
    }
}

/// Sampled trade-off curve; samples are strictly increasing in rate.
#[derive(Clone, Debug)]
pub struct TradeoffCurve {
    pub samples: Vec<CurveSample>,
    pub grid_resolution: usize,
    pub tolerance: f64,
}

impl TradeoffCurve {
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.samples.iter().map(|s| (s.rate, s.value)).collect()
    }

    /// Linear interpolation; zero beyond the last sample.
    pub fn value_at(&self, rate: f64) -> f64 {
        interpolate(&self.points(), rate)
    }
}

/// Piecewise-linear interpolation of (rate, value) pairs sorted by rate,
/// constant before the first sample and zero after the last.
pub fn interpolate(points: &[(f64, f64)], rate: f64) -> f64 {
    let Some(&(r0, q0)) = points.first() else {
        return 0.0;
    };
    if rate <= r0 {
        return q0;
    }
    for w in points.windows(2) {
        let (a, qa) = w[0];
        let (b, qb) = w[1];
        if rate <= b {
            let t = if b > a { (rate - a) / (b - a) } else { 1.0 };
            return qa + t * (qb - qa);
        }
    }
    let (last_r, last_q) = *points.last().unwrap();
    if rate <= last_r + RATE_SLACK {
        last_q
    } else {
        0.0
    }
}

/// Samples M(E, R) at `n_samples` evenly spaced rates over [0, H(p)].
///
/// Every rate is solved and refined independently, then all generated
/// candidates are pooled and every rate is re-solved over the common pool.
/// The value function of a fixed pool is convex and nonincreasing in R.
pub fn trade_off_curve(ensemble: &Ensemble, n_samples: usize, grid: &SimplexGrid) -> Result<TradeoffCurve> {
    trade_off_curve_with(ensemble, n_samples, grid, &SolveOptions::default())
}

pub fn trade_off_curve_with(
    ensemble: &Ensemble,
    n_samples: usize,
    grid: &SimplexGrid,
    options: &SolveOptions,
) -> Result<TradeoffCurve> {
    if n_samples < 2 {
        return Err(Error::InvalidArgument("a curve needs at least two samples".into()));
    }
    check_grid(ensemble, grid)?;
    let prior = ensemble.probs();
    let top = shannon_entropy(prior);
    let rates: Vec<f64> = if top <= 0.0 {
        vec![0.0]
    } else {
        (0..n_samples)
            .map(|i| top * i as f64 / (n_samples - 1) as f64)
            .collect()
    };
    let pool = candidate_pool(ensemble, prior, grid, options);

    let refined: Vec<Vec<Atom>> = rates
        .par_iter()
        .map(|&rate| {
            let program = Program::new(ensemble, prior, rate, Budget::Classical);
            let (_, p) = solve_program(&program, pool.clone(), options)?;
            Ok(p[pool.len()..].to_vec())
        })
        .collect::<Result<_>>()?;
    let mut merged = pool;
    for extra in refined {
        for a in extra {
            if !merged.iter().any(|b| grid::same_point(&a.x, &b.x)) {
                merged.push(a);
            }
        }
    }

    let samples = rates
        .par_iter()
        .map(|&rate| {
            let program = Program::new(ensemble, prior, rate, Budget::Classical);
            let sol = program.solve(&merged, None)?;
            let witness = witness_of(&merged, &sol);
            Ok(CurveSample {
                rate,
                value: sol.value,
                kernel: witness_kernel(&witness, prior)?,
                witness,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TradeoffCurve {
        samples,
        grid_resolution: grid.resolution(),
        tolerance: grid.tolerance(),
    })
}

/// Split of a reducible ensemble into mutually orthogonal components.
#[derive(Clone, Debug)]
pub struct BlindRate {
    /// Σ_l a_l S(E_l)
    pub rate: f64,
    /// S(E) − H(a), equal to `rate` up to rounding.
    pub rate_from_entropy: f64,
    /// Zero-based state indices of each component, ordered by first member.
    pub components: Vec<Vec<usize>>,
    pub weights: Vec<f64>,
}

/// States closer than this to orthogonal are treated as orthogonal.
pub const ORTHOGONALITY_TOL: f64 = 1e-10;

pub fn blind_rate(ensemble: &Ensemble) -> Result<BlindRate> {
    let m = ensemble.len();
    let states = ensemble.states();
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        let mut c = i;
        while parent[c] != r {
            let next = parent[c];
            parent[c] = r;
            c = next;
        }
        r
    }
    for i in 0..m {
        for j in i + 1..m {
            if states[i].inner(&states[j]).norm() > ORTHOGONALITY_TOL {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut components: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; m];
    for i in 0..m {
        let root = find(&mut parent, i);
        if slot[root] == usize::MAX {
            slot[root] = components.len();
            components.push(Vec::new());
        }
        components[slot[root]].push(i);
    }
    let probs = ensemble.probs();
    let weights: Vec<f64> = components.iter().map(|c| c.iter().map(|&i| probs[i]).sum()).collect();
    let mut rate = 0.0;
    for (comp, &a) in components.iter().zip(&weights) {
        if a <= 0.0 {
            continue;
        }
        let sub = Ensemble::new(
            comp.iter().map(|&i| states[i].clone()).collect(),
            comp.iter().map(|&i| probs[i] / a).collect(),
        )?;
        rate += a * sub.entropy();
    }
    Ok(BlindRate {
        rate,
        rate_from_entropy: ensemble.entropy() - shannon_entropy(&weights),
        components,
        weights,
    })
}

/// min over R₁ + R₂ = R of the two curves, each extended by zero past its
/// last sample. The sum is piecewise linear, so breakpoints suffice.
pub fn tensor_tradeoff(first: &TradeoffCurve, second: &TradeoffCurve, rate: f64) -> Result<f64> {
    tensor_points(&first.points(), &second.points(), rate)
}

/// [`tensor_tradeoff`] on bare (R, Q) samples sorted by rate.
pub fn tensor_points(a: &[(f64, f64)], b: &[(f64, f64)], rate: f64) -> Result<f64> {
    check_rate(rate)?;
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("curve"));
    }
    let mut splits: Vec<f64> = vec![0.0, rate];
    splits.extend(a.iter().map(|p| p.0));
    splits.extend(b.iter().map(|p| rate - p.0));
    Ok(splits
        .into_iter()
        .filter(|s| (0.0..=rate).contains(s))
        .map(|s| interpolate(a, s) + interpolate(b, rate - s))
        .fold(f64::INFINITY, f64::min))
}

/// Product ensemble E₁ ⊗ E₂.
pub fn product_ensemble(first: &Ensemble, second: &Ensemble) -> Ensemble {
    first.tensor(second)
}

#[derive(Clone, Debug)]
pub struct AvsResult {
    pub value: f64,
    pub prior: Vec<f64>,
    /// Barycentric coordinates of `prior` over the vertex priors.
    pub coordinates: Vec<f64>,
}

const AVS_MESH: usize = 16;
const AVS_MAX_MESH_POINTS: usize = 1500;

/// Largest M(E, p, R) over priors p in the convex hull of `vertices`.
///
/// A barycentric mesh is scanned with grid-only solves, and the best mesh
/// points are polished by Nelder–Mead on refined solves.
pub fn avs_sup(states: &[PureState], vertices: &[Vec<f64>], rate: f64, grid: &SimplexGrid) -> Result<AvsResult> {
    if vertices.is_empty() {
        return Err(Error::Empty("vertex priors"));
    }
    check_rate(rate)?;
    let m = states.len();
    for v in vertices {
        if v.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: v.len(),
            });
        }
        crate::qcore::check_probabilities(v)?;
    }
    let ensemble = Ensemble::new(states.to_vec(), vertices[0].clone())?;
    check_grid(&ensemble, grid)?;
    let n = vertices.len();
    let mix = |lambda: &[f64]| -> Vec<f64> {
        let mut p = vec![0.0; m];
        for (v, &l) in vertices.iter().zip(lambda) {
            for (pi, vi) in p.iter_mut().zip(v) {
                *pi += l * vi;
            }
        }
        let s: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= s);
        p
    };
    let evaluate = |lambda: &[f64], options: &SolveOptions| -> Result<f64> {
        let p = mix(lambda);
        Ok(solve_m_at_prior(&ensemble, &p, rate, grid, options)?.value)
    };

    if n == 1 {
        let value = evaluate(&[1.0], &SolveOptions::default())?;
        return Ok(AvsResult {
            value,
            prior: vertices[0].clone(),
            coordinates: vec![1.0],
        });
    }

    let mut resolution = AVS_MESH;
    while resolution > 1 && lattice_size(n, resolution) > AVS_MAX_MESH_POINTS {
        resolution -= 1;
    }
    let mut mesh = Vec::new();
    mesh_points(&mut vec![0; n], 0, resolution, &mut |c| {
        mesh.push(c.iter().map(|&v| v as f64 / resolution as f64).collect::<Vec<f64>>());
    });
    let coarse = SolveOptions::grid_only();
    let mut scored: Vec<(f64, Vec<f64>)> = mesh
        .into_par_iter()
        .map(|l| Ok((evaluate(&l, &coarse)?, l)))
        .collect::<Result<_>>()?;
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));

    let refined = SolveOptions::default();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for (_, start) in scored.into_iter().take(3) {
        let (value, lambda) = nelder_mead_on_simplex(&start, 1.0 / resolution as f64, |l| evaluate(l, &refined))?;
        if best.as_ref().map_or(true, |b| value > b.0) {
            best = Some((value, lambda));
        }
    }
    let (value, lambda) = best.expect("mesh is nonempty");
    Ok(AvsResult {
        value,
        prior: mix(&lambda),
        coordinates: lambda,
    })
}

fn mesh_points(counts: &mut Vec<usize>, pos: usize, left: usize, visit: &mut dyn FnMut(&[usize])) {
    if pos + 1 == counts.len() {
        counts[pos] = left;
        visit(counts);
        return;
    }
    for c in 0..=left {
        counts[pos] = c;
        mesh_points(counts, pos + 1, left - c, visit);
    }
}

/// Maximizes `f` over the probability simplex. Points are parameterized by
/// their first n − 1 coordinates; points outside the simplex score −∞.
fn nelder_mead_on_simplex(start: &[f64], scale: f64, f: impl Fn(&[f64]) -> Result<f64>) -> Result<(f64, Vec<f64>)> {
    let n = start.len() - 1;
    let lift = |y: &[f64]| -> Option<Vec<f64>> {
        let last = 1.0 - y.iter().sum::<f64>();
        if y.iter().any(|&v| v < -1e-12) || last < -1e-12 {
            return None;
        }
        let mut l: Vec<f64> = y.iter().map(|v| v.max(0.0)).collect();
        l.push(last.max(0.0));
        Some(l)
    };
    let score = |y: &[f64]| -> Result<f64> {
        match lift(y) {
            Some(l) => f(&l),
            None => Ok(f64::NEG_INFINITY),
        }
    };
    let y0: Vec<f64> = start[..n].to_vec();
    let mut simplex: Vec<(f64, Vec<f64>)> = vec![(score(&y0)?, y0.clone())];
    for k in 0..n {
        let mut y = y0.clone();
        // Step inward when the start sits on the boundary.
        y[k] += if y0[k] + scale <= 1.0 - 1e-12
            && lift(&{
                let mut t = y0.clone();
                t[k] += scale;
                t
            })
            .is_some()
        {
            scale
        } else {
            -scale
        };
        simplex.push((score(&y)?, y));
    }
    for _ in 0..200 {
        simplex.sort_by(|a, b| b.0.total_cmp(&a.0));
        let size = simplex
            .iter()
            .skip(1)
            .map(|(_, y)| {
                y.iter()
                    .zip(&simplex[0].1)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if size < 1e-4 {
            break;
        }
        let worst = simplex[n].clone();
        let centroid: Vec<f64> = (0..n)
            .map(|k| simplex[..n].iter().map(|(_, y)| y[k]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&worst.1).map(|(c, w)| c + t * (c - w)).collect() };
        let reflected = along(1.0);
        let fr = score(&reflected)?;
        if fr > simplex[0].0 {
            let expanded = along(2.0);
            let fe = score(&expanded)?;
            simplex[n] = if fe > fr { (fe, expanded) } else { (fr, reflected) };
        } else if fr > simplex[n - 1].0 {
            simplex[n] = (fr, reflected);
        } else {
            let contracted = along(if fr > worst.0 { 0.5 } else { -0.5 });
            let fc = score(&contracted)?;
            if fc > worst.0.max(fr) {
                simplex[n] = (fc, contracted);
            } else {
                let best = simplex[0].1.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let y: Vec<f64> = entry.1.iter().zip(&best).map(|(a, b)| b + 0.5 * (a - b)).collect();
                    *entry = (score(&y)?, y);
                }
            }
        }
    }
    simplex.sort_by(|a, b| b.0.total_cmp(&a.0));
    let (value, y) = simplex.swap_remove(0);
    Ok((value, lift(&y).expect("best vertex is feasible")))
}

/// Checks M(E, R) ≤ M(F, R) for F = {U_k φ_i, p_i a_k}.
///
/// `grid` discretizes E; F uses `f_resolution`. The comparison allows the
/// discretization error of the left-hand side.
pub fn schur_monotonicity_check(
    ensemble: &Ensemble,
    unitaries: &[CMatrix],
    weights: &[f64],
    rate: f64,
    grid: &SimplexGrid,
    f_resolution: usize,
) -> Result<bool> {
    if unitaries.is_empty() || unitaries.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            expected: unitaries.len().max(1),
            got: weights.len(),
        });
    }
    crate::qcore::check_probabilities(weights)?;
    let d = ensemble.dim();
    for u in unitaries {
        if u.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: u.dim(),
            });
        }
        let defect = u.unitarity_defect();
        if defect > 1e-10 {
            return Err(Error::NotUnitary(defect));
        }
    }
    let mut states = Vec::new();
    let mut probs = Vec::new();
    for (u, &a) in unitaries.iter().zip(weights) {
        for (s, &p) in ensemble.states().iter().zip(ensemble.probs()) {
            states.push(s.apply(u));
            probs.push(p * a);
        }
    }
    let rotated = Ensemble::new(states, probs)?;
    let grid_f = SimplexGrid::new(&rotated, f_resolution)?;
    let lhs = solve_m(ensemble, rate, grid)?.value;
    let rhs = solve_m(&rotated, rate, &grid_f)?.value;
    Ok(lhs <= rhs + grid.tolerance() + 1e-9)
}
