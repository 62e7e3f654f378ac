//! Ensemble, kernel and curve files.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use tradeoff_core::symmetry::GroupElement;
use tradeoff_core::{CMatrix, EncodingKernel, Ensemble, GroupAction, PureState, C64};

/// Squared norms further than this from 1 are reported before normalizing.
const NORM_WARNING: f64 = 1e-6;

/// A complex number as `[re, im]`.
type Complex = [f64; 2];

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleFile {
    pub dim: usize,
    pub states: Vec<Vec<Complex>>,
    /// Uniform when absent.
    #[serde(default)]
    pub probs: Option<Vec<f64>>,
    #[serde(default)]
    pub group: Option<GroupFile>,
}

/// Generators of a symmetry group: zero-based label permutations and the
/// matching unitaries, row-major.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GroupFile {
    pub perms: Vec<Vec<usize>>,
    pub unitaries: Vec<Vec<Vec<Complex>>>,
}

pub struct Loaded {
    pub ensemble: Ensemble,
    pub group: Option<GroupAction>,
}

fn c64(z: &Complex) -> C64 {
    C64::new(z[0], z[1])
}

pub fn load_ensemble(path: &Path) -> Result<Loaded> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file: EnsembleFile = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    file.build().with_context(|| format!("in {}", path.display()))
}

impl EnsembleFile {
    pub fn build(&self) -> Result<Loaded> {
        if self.states.is_empty() {
            bail!("no states");
        }
        let mut states = Vec::with_capacity(self.states.len());
        for (i, s) in self.states.iter().enumerate() {
            if s.len() != self.dim {
                bail!("state {i} has {} amplitudes, expected {}", s.len(), self.dim);
            }
            let amps: Vec<C64> = s.iter().map(c64).collect();
            let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
            if (norm - 1.0).abs() > NORM_WARNING {
                eprintln!("warning: state {i} has squared norm {norm}; normalizing");
            }
            states.push(PureState::normalized(amps)?);
        }
        let m = states.len();
        let probs = self.probs.clone().unwrap_or_else(|| vec![1.0 / m as f64; m]);
        let ensemble = Ensemble::new(states, probs)?;
        let group = self.group.as_ref().map(|g| g.build(self.dim)).transpose()?;
        Ok(Loaded { ensemble, group })
    }
}

impl GroupFile {
    fn build(&self, dim: usize) -> Result<GroupAction> {
        if self.perms.len() != self.unitaries.len() {
            bail!(
                "group has {} permutations but {} unitaries",
                self.perms.len(),
                self.unitaries.len()
            );
        }
        let mut generators = Vec::with_capacity(self.perms.len());
        for (perm, rows) in self.perms.iter().zip(&self.unitaries) {
            if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                bail!("group unitaries must be {dim}×{dim}");
            }
            let rows: Vec<Vec<C64>> = rows.iter().map(|r| r.iter().map(c64).collect()).collect();
            generators.push(GroupElement::new(perm.clone(), CMatrix::from_rows(&rows)));
        }
        Ok(GroupAction::generated_by(generators)?)
    }
}

/// Stochastic matrix rows from a JSON file `[[w(0|0), w(1|0), ...], ...]`.
pub fn load_rows(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn kernel_from_labels(labels: &[usize]) -> EncodingKernel {
    EncodingKernel::deterministic(labels)
}

/// (R, Q) pairs from a curve CSV with a header whose first two columns are R and Q.
pub fn load_curve(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().context("empty curve file")?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols.len() < 2 || cols[0] != "R" {
        bail!("{}: expected a header starting with R,Q", path.display());
    }
    let mut points = Vec::new();
    for (k, line) in lines.enumerate() {
        let mut fields = line.split(',');
        let parse = |f: Option<&str>| -> Result<f64> {
            f.context("missing field")?
                .trim()
                .parse::<f64>()
                .with_context(|| format!("{}: row {}", path.display(), k + 2))
        };
        points.push((parse(fields.next())?, parse(fields.next())?));
    }
    if points.is_empty() {
        bail!("{}: no samples", path.display());
    }
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(points)
}

pub fn parse_list<T: std::str::FromStr>(text: &str) -> Result<Vec<T>>
where
    T::Err: std::error::Error + Send + Sync + 'static,
{
    text.split(',')
        .map(|s| s.trim().parse::<T>().with_context(|| format!("bad list entry '{s}'")))
        .collect()
}
