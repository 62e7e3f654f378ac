//! Finite group actions on an ensemble and the covariant reduction of the
//! decomposition program.
//!
//! An element g pairs a permutation of the labels with a unitary U_g such that
//! U_g|φ_i⟩⟨φ_i|U_g† = |φ_{g(i)}⟩⟨φ_{g(i)}|. Only projectors are compared, so
//! projective representations are fine. A distribution transforms as
//! (g·x)_{g(i)} = x_i.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};
use crate::qcore::{Ensemble, PureState};
use crate::solver::{
    candidate_pool, same_point, solve_program, witness_of, Budget, DecompositionPoint, Program, SimplexGrid, Solution,
    SolveOptions,
};

/// Tolerance on projector mismatch, unitarity and prior invariance.
pub const ACTION_TOL: f64 = 1e-9;
/// Closure under multiplication stops growing a group past this order.
pub const MAX_GROUP_ORDER: usize = 4096;

#[derive(Clone, Debug)]
pub struct GroupElement {
    pub perm: Vec<usize>,
    pub unitary: CMatrix,
}

impl GroupElement {
    pub fn new(perm: Vec<usize>, unitary: CMatrix) -> Self {
        GroupElement { perm, unitary }
    }

    pub fn identity(m: usize, d: usize) -> Self {
        GroupElement {
            perm: (0..m).collect(),
            unitary: CMatrix::identity(d),
        }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        GroupElement {
            perm: other.perm.iter().map(|&i| self.perm[i]).collect(),
            unitary: self.unitary.matmul(&other.unitary),
        }
    }

    /// Same permutation and unitaries equal up to a phase.
    pub fn projectively_equal(&self, other: &GroupElement) -> bool {
        if self.perm != other.perm || self.unitary.dim() != other.unitary.dim() {
            return false;
        }
        let d = self.unitary.dim();
        let t = self.unitary.adjoint().matmul(&other.unitary).trace();
        (t.norm() - d as f64).abs() <= ACTION_TOL * d as f64
    }

    /// g·x with (g·x)_{g(i)} = x_i.
    pub fn act(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; x.len()];
        for (i, &v) in x.iter().enumerate() {
            y[self.perm[i]] = v;
        }
        y
    }
}

/// A finite group acting on labels and states. Elements are listed explicitly.
#[derive(Clone, Debug)]
pub struct GroupAction {
    elements: Vec<GroupElement>,
}

impl GroupAction {
    pub fn new(elements: Vec<GroupElement>) -> Result<Self> {
        let first = elements.first().ok_or(Error::Empty("group"))?;
        let (m, d) = (first.perm.len(), first.unitary.dim());
        for g in &elements {
            if g.perm.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    got: g.perm.len(),
                });
            }
            if g.unitary.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: g.unitary.dim(),
                });
            }
        }
        Ok(GroupAction { elements })
    }

    /// The group generated by `generators`, closed under composition.
    pub fn generated_by(generators: Vec<GroupElement>) -> Result<Self> {
        let first = generators.first().ok_or(Error::Empty("generators"))?;
        let mut elements = vec![GroupElement::identity(first.perm.len(), first.unitary.dim())];
        let mut frontier = elements.clone();
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for g in &frontier {
                for s in &generators {
                    let h = s.compose(g);
                    if !elements.iter().any(|e| e.projectively_equal(&h)) {
                        elements.push(h.clone());
                        next.push(h);
                        if elements.len() > MAX_GROUP_ORDER {
                            return Err(Error::BudgetExceeded(format!(
                                "group generated by {} elements exceeds order {MAX_GROUP_ORDER}",
                                generators.len()
                            )));
                        }
                    }
                }
            }
            frontier = next;
        }
        GroupAction::new(elements)
    }

    pub fn trivial(m: usize, d: usize) -> Self {
        GroupAction {
            elements: vec![GroupElement::identity(m, d)],
        }
    }

    /// Z₂ acting on two states by the reflection that swaps them.
    pub fn pair_swap(a: &PureState, b: &PureState) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(Error::DimensionMismatch {
                expected: a.dim(),
                got: b.dim(),
            });
        }
        let d = a.dim();
        // Rephase b so that ⟨a|b⟩ ≥ 0; then the Householder reflection through
        // a − b maps a to b and b to a.
        let ip = a.inner(b);
        let phase = if ip.norm() > 0.0 {
            ip.conj() / ip.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        let v: Vec<C64> = a
            .amplitudes()
            .iter()
            .zip(b.amplitudes())
            .map(|(&x, &y)| x - y * phase)
            .collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let mut u = CMatrix::identity(d);
        if norm > 1e-12 {
            let v: Vec<C64> = v.iter().map(|z| z / norm).collect();
            u.add_scaled(-2.0, &CMatrix::outer(&v));
        }
        GroupAction::new(vec![GroupElement::identity(2, d), GroupElement::new(vec![1, 0], u)])
    }

    /// Z₂ × Z₂ on the four states |0⟩, cos θ|0⟩ + sin θ|1⟩, |1⟩,
    /// −sin θ|0⟩ + cos θ|1⟩: rotation by π/2 and reflection about the θ/2 axis.
    pub fn bb84(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        let rotation = GroupElement::new(
            vec![2, 3, 0, 1],
            CMatrix::from_real_rows(&[vec![0.0, -1.0], vec![1.0, 0.0]]),
        );
        let reflection = GroupElement::new(vec![1, 0, 3, 2], CMatrix::from_real_rows(&[vec![c, s], vec![s, -c]]));
        GroupAction::generated_by(vec![rotation, reflection]).expect("finite group")
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn labels(&self) -> usize {
        self.elements[0].perm.len()
    }

    /// Orbit index of every label, numbered by first appearance.
    pub fn orbit_of(&self) -> Vec<usize> {
        let m = self.labels();
        let mut parent: Vec<usize> = (0..m).collect();
        fn find(parent: &mut [usize], i: usize) -> usize {
            let mut r = i;
            while parent[r] != r {
                r = parent[r];
            }
            parent[i] = r;
            r
        }
        for g in &self.elements {
            for i in 0..m {
                let (a, b) = (find(&mut parent, i), find(&mut parent, g.perm[i]));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        let mut index = vec![usize::MAX; m];
        let mut out = vec![0; m];
        let mut next = 0;
        for i in 0..m {
            let r = find(&mut parent, i);
            if index[r] == usize::MAX {
                index[r] = next;
                next += 1;
            }
            out[i] = index[r];
        }
        out
    }

    /// Orbits as sorted label lists, in order of their smallest label.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let of = self.orbit_of();
        let t = of.iter().max().map_or(0, |&v| v + 1);
        let mut out = vec![Vec::new(); t];
        for (i, &o) in of.iter().enumerate() {
            out[o].push(i);
        }
        out
    }

    pub fn is_transitive(&self) -> bool {
        self.orbits().len() == 1
    }

    /// G-average (1/|G|) Σ_g g·p.
    pub fn symmetrize(&self, p: &[f64]) -> Vec<f64> {
        let n = self.order() as f64;
        let mut out = vec![0.0; p.len()];
        for g in &self.elements {
            for (o, v) in out.iter_mut().zip(g.act(p)) {
                *o += v / n;
            }
        }
        out
    }

    pub fn is_invariant(&self, p: &[f64]) -> bool {
        self.elements
            .iter()
            .all(|g| g.act(p).iter().zip(p).all(|(a, b)| (a - b).abs() <= ACTION_TOL))
    }
}

/// First failed condition found by [`verify_action`].
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    Shape {
        element: usize,
    },
    NotPermutation {
        element: usize,
    },
    NotUnitary {
        element: usize,
        defect: f64,
    },
    /// U_g φ_i U_g† differs from φ_{g(i)} by `gap` = 1 − |⟨φ_{g(i)}|U_g φ_i⟩|².
    StateMismatch {
        element: usize,
        state: usize,
        gap: f64,
    },
    MissingIdentity,
    NotClosed {
        first: usize,
        second: usize,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ActionReport {
    pub violation: Option<Violation>,
}

impl ActionReport {
    pub fn is_valid(&self) -> bool {
        self.violation.is_none()
    }
}

fn find_violation(ensemble: &Ensemble, action: &GroupAction) -> Option<Violation> {
    let (m, d) = (ensemble.len(), ensemble.dim());
    let states = ensemble.states();
    for (k, g) in action.elements.iter().enumerate() {
        if g.perm.len() != m || g.unitary.dim() != d {
            return Some(Violation::Shape { element: k });
        }
        let mut seen = vec![false; m];
        for &j in &g.perm {
            if j >= m || seen[j] {
                return Some(Violation::NotPermutation { element: k });
            }
            seen[j] = true;
        }
        let defect = g.unitary.unitarity_defect();
        if defect > ACTION_TOL {
            return Some(Violation::NotUnitary { element: k, defect });
        }
        for (i, s) in states.iter().enumerate() {
            let gap = 1.0 - s.apply(&g.unitary).overlap(&states[g.perm[i]]);
            if gap > ACTION_TOL {
                return Some(Violation::StateMismatch {
                    element: k,
                    state: i,
                    gap,
                });
            }
        }
    }
    let id = GroupElement::identity(m, d);
    if !action.elements.iter().any(|g| g.projectively_equal(&id)) {
        return Some(Violation::MissingIdentity);
    }
    for (a, g) in action.elements.iter().enumerate() {
        for (b, h) in action.elements.iter().enumerate() {
            let gh = g.compose(h);
            if !action.elements.iter().any(|k| k.projectively_equal(&gh)) {
                return Some(Violation::NotClosed { first: a, second: b });
            }
        }
    }
    None
}

/// Checks the action against the ensemble: shapes, permutations, unitarity,
/// state covariance, identity and closure, in that order.
pub fn verify_action(ensemble: &Ensemble, action: &GroupAction) -> ActionReport {
    ActionReport {
        violation: find_violation(ensemble, action),
    }
}

pub fn orbits(action: &GroupAction) -> Vec<Vec<usize>> {
    action.orbits()
}

pub fn symmetrize(p: &[f64], action: &GroupAction) -> Vec<f64> {
    action.symmetrize(p)
}

#[derive(Clone, Debug)]
pub struct CovariantSolution {
    /// Expanded, covariant witness.
    pub solution: Solution,
    /// Number of families (G-orbits of posteriors) carrying weight.
    pub families: usize,
    pub orbit_count: usize,
    pub group_order: usize,
    /// The prior was not invariant and was replaced by its G-average.
    pub symmetrized: bool,
}

impl CovariantSolution {
    /// |G|(t + 1).
    pub fn support_bound(&self) -> usize {
        self.group_order * (self.orbit_count + 1)
    }
}

fn lattice_key(x: &[f64]) -> Vec<i64> {
    x.iter().map(|v| (v * 1e9).round() as i64).collect()
}

/// Canonical representative key: the least key over all translates.
fn family_key(action: &GroupAction, x: &[f64]) -> Vec<i64> {
    action
        .elements
        .iter()
        .map(|g| lattice_key(&g.act(x)))
        .min()
        .expect("nonempty group")
}

/// M(E, R) over G-covariant decompositions. Each candidate stands for its
/// whole family {g·x} with one shared weight, so the coordinate rows collapse
/// to one per orbit.
///
/// A prior that is not G-invariant is an error unless `symmetrize_prior` is
/// set, in which case its G-average is used.
pub fn covariant_solve_m(
    ensemble: &Ensemble,
    action: &GroupAction,
    rate: f64,
    grid: &SimplexGrid,
    symmetrize_prior: bool,
) -> Result<CovariantSolution> {
    covariant_solve_m_with(ensemble, action, rate, grid, symmetrize_prior, &SolveOptions::default())
}

pub fn covariant_solve_m_with(
    ensemble: &Ensemble,
    action: &GroupAction,
    rate: f64,
    grid: &SimplexGrid,
    symmetrize_prior: bool,
    options: &SolveOptions,
) -> Result<CovariantSolution> {
    if let Some(v) = find_violation(ensemble, action) {
        return Err(Error::InvalidAction(format!("{v:?}")));
    }
    if rate.is_nan() {
        return Err(Error::InvalidArgument("rate is NaN".into()));
    }
    if grid.atoms().first().map(|a| a.x.len()) != Some(ensemble.len()) {
        return Err(Error::DimensionMismatch {
            expected: ensemble.len(),
            got: grid.atoms().first().map_or(0, |a| a.x.len()),
        });
    }
    let invariant = action.is_invariant(ensemble.probs());
    if !invariant && !symmetrize_prior {
        return Err(Error::InvalidArgument("prior is not invariant under the group".into()));
    }
    let prior = if invariant {
        ensemble.probs().to_vec()
    } else {
        action.symmetrize(ensemble.probs())
    };

    let mut seen = HashSet::new();
    let pool: Vec<_> = candidate_pool(ensemble, &prior, grid, options)
        .into_iter()
        .filter(|a| seen.insert(family_key(action, &a.x)))
        .collect();
    let orbit_of = action.orbit_of();
    let t = orbit_of.iter().max().map_or(0, |&v| v + 1);
    let program = Program::new(ensemble, &prior, rate, Budget::Classical).with_orbits(orbit_of);
    let (sol, pool) = solve_program(&program, pool, options)?;

    let n = action.order() as f64;
    let mut witness: Vec<DecompositionPoint> = Vec::new();
    for point in witness_of(&pool, &sol) {
        for g in &action.elements {
            let y = g.act(&point.posterior);
            match witness.iter_mut().find(|w| same_point(&w.posterior, &y)) {
                Some(w) => w.weight += point.weight / n,
                None => witness.push(DecompositionPoint {
                    posterior: y,
                    weight: point.weight / n,
                }),
            }
        }
    }
    Ok(CovariantSolution {
        solution: Solution {
            rate,
            value: sol.value,
            witness,
            grid_resolution: grid.resolution(),
            tolerance: grid.tolerance(),
        },
        families: sol.weights.len(),
        orbit_count: t,
        group_order: action.order(),
        symmetrized: !invariant,
    })
}

/// Optimal rate for the arbitrarily varying source over all priors on
/// `states`, given a transitive action: M at the uniform prior.
pub fn avs_transitive(states: &[PureState], action: &GroupAction, rate: f64, grid: &SimplexGrid) -> Result<f64> {
    let ensemble = Ensemble::uniform(states.to_vec())?;
    if let Some(v) = find_violation(&ensemble, action) {
        return Err(Error::InvalidAction(format!("{v:?}")));
    }
    if !action.is_transitive() {
        return Err(Error::InvalidAction(format!(
            "action has {} orbits; a transitive action is required",
            action.orbits().len()
        )));
    }
    Ok(covariant_solve_m(&ensemble, action, rate, grid, false)?.solution.value)
}
