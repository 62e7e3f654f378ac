use crate::error::{Error, Result};
use crate::qcore::{shannon_entropy, Ensemble};

/// Lattice points allowed before grid construction refuses.
pub const MAX_GRID_POINTS: usize = 2_000_000;

/// A posterior distribution with its cached entropies S(f(x)) and H(x).
#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub x: Vec<f64>,
    pub quantum: f64,
    pub classical: f64,
}

impl Atom {
    pub fn new(ensemble: &Ensemble, x: Vec<f64>) -> Self {
        let quantum = ensemble.mixture_entropy(&x);
        let classical = shannon_entropy(&x);
        Atom { x, quantum, classical }
    }

    pub fn vertex(ensemble: &Ensemble, i: usize) -> Self {
        let mut x = vec![0.0; ensemble.len()];
        x[i] = 1.0;
        Atom {
            x,
            quantum: 0.0,
            classical: 0.0,
        }
    }
}

/// Integer lattice of the probability simplex with denominator `k`, annotated
/// with the entropies of each point for a fixed list of states.
#[derive(Clone, Debug)]
pub struct SimplexGrid {
    resolution: usize,
    atoms: Vec<Atom>,
}

/// Default lattice denominator for `m` states, if one exists.
pub fn default_resolution(m: usize) -> Option<usize> {
    match m {
        1 | 2 => Some(64),
        3 => Some(24),
        4 => Some(12),
        _ => None,
    }
}

/// Number of lattice points C(k + m − 1, m − 1), saturating.
pub fn lattice_size(m: usize, k: usize) -> usize {
    let mut acc: u128 = 1;
    for i in 1..m {
        acc = acc * (k + i) as u128 / i as u128;
        if acc > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    acc as usize
}

impl SimplexGrid {
    /// Lattice over the states of `ensemble` plus its prior. The cost grows
    /// like k^(m−1); `k = 0` keeps only the vertices and the prior.
    pub fn new(ensemble: &Ensemble, resolution: usize) -> Result<Self> {
        let m = ensemble.len();
        let mut atoms = Vec::new();
        if resolution == 0 {
            atoms.extend((0..m).map(|i| Atom::vertex(ensemble, i)));
        } else {
            let size = lattice_size(m, resolution);
            if size > MAX_GRID_POINTS {
                return Err(Error::BudgetExceeded(format!(
                    "simplex grid with m = {m}, k = {resolution} has {size} points"
                )));
            }
            atoms.reserve(size + 1);
            let mut counts = vec![0usize; m];
            enumerate(&mut counts, 0, resolution, &mut |c| {
                let x: Vec<f64> = c.iter().map(|&v| v as f64 / resolution as f64).collect();
                atoms.push(Atom::new(ensemble, x));
            });
        }
        let mut grid = SimplexGrid { resolution, atoms };
        grid.insert_prior(ensemble, ensemble.probs());
        Ok(grid)
    }

    /// Grid at the default resolution for the ensemble size.
    pub fn default_for(ensemble: &Ensemble) -> Result<Self> {
        let k = default_resolution(ensemble.len()).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "no default grid resolution for {} states; pass one explicitly",
                ensemble.len()
            ))
        })?;
        Self::new(ensemble, k)
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Declared discretization error of a value computed on this grid.
    pub fn tolerance(&self) -> f64 {
        if self.resolution == 0 {
            0.5
        } else {
            0.5 / self.resolution as f64
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.atoms.iter().any(|a| same_point(&a.x, x))
    }

    /// Adds `p` as a grid point unless it is already present.
    pub fn insert_prior(&mut self, ensemble: &Ensemble, p: &[f64]) {
        if !self.contains(p) {
            self.atoms.push(Atom::new(ensemble, p.to_vec()));
        }
    }
}

pub(crate) fn same_point(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12)
}

fn enumerate(counts: &mut [usize], pos: usize, left: usize, visit: &mut dyn FnMut(&[usize])) {
    if pos + 1 == counts.len() {
        counts[pos] = left;
        visit(counts);
        return;
    }
    for c in (0..=left).rev() {
        counts[pos] = c;
        enumerate(counts, pos + 1, left - c, visit);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::PureState;

    fn three() -> Ensemble {
        Ensemble::new(
            vec![
                PureState::basis(3, 0),
                PureState::from_real(&[1.0, 1.0, 0.0]).unwrap(),
                PureState::basis(3, 2),
            ],
            vec![0.3, 0.3, 0.4],
        )
        .unwrap()
    }

    #[test]
    fn lattice_counts() {
        assert_eq!(lattice_size(2, 64), 65);
        assert_eq!(lattice_size(3, 24), 325);
        assert_eq!(lattice_size(4, 12), 455);
        let g = SimplexGrid::new(&three(), 24).unwrap();
        // 0.3 is not a multiple of 1/24, so the prior is appended.
        assert_eq!(g.len(), 326);
        assert!(g.contains(&[0.3, 0.3, 0.4]));
        for i in 0..3 {
            let mut v = vec![0.0; 3];
            v[i] = 1.0;
            assert!(g.contains(&v));
        }
        for a in g.atoms() {
            assert!((a.x.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(a.x.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn prior_on_lattice_is_not_duplicated() {
        let e = Ensemble::uniform(vec![PureState::basis(2, 0), PureState::basis(2, 1)]).unwrap();
        assert_eq!(SimplexGrid::new(&e, 64).unwrap().len(), 65);
    }

    #[test]
    fn oversized_grid_is_refused() {
        let states: Vec<_> = (0..8).map(|i| PureState::basis(8, i)).collect();
        let e = Ensemble::uniform(states).unwrap();
        assert!(matches!(SimplexGrid::new(&e, 200), Err(Error::BudgetExceeded(_))));
        assert!(SimplexGrid::default_for(&e).is_err());
        assert_eq!(SimplexGrid::new(&e, 0).unwrap().len(), 9);
    }
}
