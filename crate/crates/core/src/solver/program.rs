//! The barycentric linear program over candidate posteriors.
//!
//! Each candidate posterior x contributes one column: its (aggregated)
//! coordinates, which must average to the prior, and its contribution to the
//! rate row. The cost is S(Σ x_i φ_i).

use super::grid::Atom;
use super::lp::LinearProgram;
use crate::error::{Error, Result};
use crate::qcore::{shannon_entropy, Ensemble};

/// Which information quantity the rate `R` bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Budget {
    /// S(A:C) ≤ R
    Classical,
    /// S(A:BC) ≤ R
    Total,
}

#[derive(Clone, Debug)]
pub(crate) struct Program<'a> {
    pub ensemble: &'a Ensemble,
    pub prior: &'a [f64],
    pub rate: f64,
    pub budget: Budget,
    /// Row used by each coordinate; the identity unless coordinates are pooled by orbit.
    row_of: Vec<usize>,
    price_rows: usize,
}

#[derive(Clone, Debug)]
pub(crate) struct Restricted {
    pub value: f64,
    /// (atom index, weight) for atoms carrying positive weight.
    pub weights: Vec<(usize, f64)>,
    /// Dual price of each coordinate.
    pub prices: Vec<f64>,
    /// Dual price of the rate row, nonnegative.
    pub rate_price: f64,
}

impl<'a> Program<'a> {
    pub fn new(ensemble: &'a Ensemble, prior: &'a [f64], rate: f64, budget: Budget) -> Self {
        let m = ensemble.len();
        Program {
            ensemble,
            prior,
            rate,
            budget,
            row_of: (0..m).collect(),
            price_rows: m,
        }
    }

    /// Pools coordinates into one row per orbit.
    pub fn with_orbits(mut self, orbit_of: Vec<usize>) -> Self {
        self.price_rows = orbit_of.iter().max().map_or(0, |&t| t + 1);
        self.row_of = orbit_of;
        self
    }

    fn rows(&self) -> usize {
        self.price_rows + 1
    }

    fn rate_entry(&self, atom: &Atom) -> f64 {
        match self.budget {
            Budget::Classical => atom.classical,
            Budget::Total => atom.classical - atom.quantum,
        }
    }

    fn column(&self, atom: &Atom) -> Vec<f64> {
        let mut col = vec![0.0; self.rows()];
        for (i, &v) in atom.x.iter().enumerate() {
            col[self.row_of[i]] += v;
        }
        col[self.price_rows] = self.rate_entry(atom);
        col
    }

    fn rhs(&self) -> Vec<f64> {
        let mut b = vec![0.0; self.rows()];
        for (i, &v) in self.prior.iter().enumerate() {
            b[self.row_of[i]] += v;
        }
        b[self.price_rows] = shannon_entropy(self.prior) - self.rate;
        b
    }

    /// Weight on S(f(x)) in the reduced cost.
    pub fn quantum_weight(&self, rate_price: f64) -> f64 {
        match self.budget {
            Budget::Classical => 1.0,
            Budget::Total => 1.0 + rate_price,
        }
    }

    /// Solves the program over the atoms selected by `subset` (all when `None`).
    pub fn solve(&self, atoms: &[Atom], subset: Option<&[usize]>) -> Result<Restricted> {
        if self.rate < 0.0 {
            return Err(Error::Infeasible(format!("negative rate {}", self.rate)));
        }
        let mut lp = LinearProgram::new(self.rhs());
        let indices: Vec<usize> = match subset {
            Some(s) => s.to_vec(),
            None => (0..atoms.len()).collect(),
        };
        for &i in &indices {
            lp.push(atoms[i].quantum, self.column(&atoms[i]));
        }
        let mut slack = vec![0.0; self.rows()];
        slack[self.price_rows] = -1.0;
        lp.push(0.0, slack);

        let sol = lp.solve().map_err(|e| match e {
            Error::Infeasible(_) => {
                Error::Infeasible(format!("no decomposition meets the rate budget {:.6} bits", self.rate))
            }
            other => other,
        })?;
        let weights = indices
            .iter()
            .zip(&sol.values)
            .filter(|(_, &w)| w > 1e-13)
            .map(|(&i, &w)| (i, w))
            .collect();
        let prices = self.row_of.iter().map(|&r| sol.duals[r]).collect();
        Ok(Restricted {
            value: sol.objective.max(0.0),
            weights,
            prices,
            rate_price: sol.duals[self.price_rows].max(0.0),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::PureState;
    use crate::solver::grid::SimplexGrid;
    use approx::assert_abs_diff_eq;

    fn orthogonal(k: usize) -> Ensemble {
        Ensemble::uniform((0..k).map(|i| PureState::basis(k, i)).collect()).unwrap()
    }

    #[test]
    fn orthogonal_line() {
        let e = orthogonal(4);
        let grid = SimplexGrid::new(&e, 4).unwrap();
        let prog = Program::new(&e, e.probs(), 0.75, Budget::Classical);
        let s = prog.solve(grid.atoms(), None).unwrap();
        assert_abs_diff_eq!(s.value, 1.25, epsilon = 1e-9);
        assert!(s.weights.len() <= e.len() + 1);
    }

    #[test]
    fn total_budget_below_source_entropy_is_infeasible() {
        let e = orthogonal(2);
        let grid = SimplexGrid::new(&e, 8).unwrap();
        let prog = Program::new(&e, e.probs(), 0.5, Budget::Total);
        assert!(matches!(prog.solve(grid.atoms(), None), Err(Error::Infeasible(_))));
    }

    #[test]
    fn duals_price_out_every_column() {
        let e = Ensemble::uniform(vec![PureState::basis(2, 0), PureState::from_real(&[1.0, 1.0]).unwrap()]).unwrap();
        let grid = SimplexGrid::new(&e, 16).unwrap();
        let prog = Program::new(&e, e.probs(), 0.4, Budget::Classical);
        let s = prog.solve(grid.atoms(), None).unwrap();
        for a in grid.atoms() {
            let rc =
                a.quantum - a.x.iter().zip(&s.prices).map(|(x, y)| x * y).sum::<f64>() - s.rate_price * a.classical;
            assert!(rc > -1e-9, "negative reduced cost {rc}");
        }
    }
}
