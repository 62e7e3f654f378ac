//! Fidelity audit of the block code built from a kernel.
//!
//! For a typical input I the classical part J comes from the channel
//! simulation of the kernel. If J is conditionally typical the state is
//! projected onto the conditional typical subspace Π(J); success has
//! probability ov = ⟨φ_I|Π(J)|φ_I⟩ and leaves a state of fidelity ov, so the
//! code's fidelity on I is at least E_J[1{J typical} ov²]. The audit estimates
//! that expectation from draws of J and subtracts a one-sided Hoeffding
//! margin, which makes the reported bound hold with the stated confidence.

use std::collections::HashMap;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::overlap::ConditionalSubspace;
use super::rst::{sample_panel, RstCode};
use super::types::{ChannelMatrix, JointType};
use crate::error::{Error, Result};
use crate::qcore::{classical_info, conditional_chi, eta, EncodingKernel, Ensemble};

pub const MAX_AUDIT_BLOCK: usize = 400;

#[derive(Clone, Debug)]
pub struct AuditOptions {
    /// Typical inputs audited.
    pub panel: usize,
    /// Draws of J per input.
    pub draws: usize,
    /// Probability that a reported bound is wrong.
    pub alpha: f64,
}

impl Default for AuditOptions {
    fn default() -> Self {
        AuditOptions {
            panel: 8,
            draws: 2000,
            alpha: 0.05,
        }
    }
}

#[derive(Clone, Debug)]
pub struct AuditEntry {
    /// Type of I.
    pub counts: Vec<usize>,
    /// Fraction of draws with J conditionally typical.
    pub typical_fraction: f64,
    pub mean_overlap: f64,
    /// Sample mean of 1{J typical} ov².
    pub fidelity_estimate: f64,
    /// `fidelity_estimate` minus the Hoeffding margin.
    pub fidelity_lower: f64,
}

#[derive(Clone, Debug)]
pub struct AuditReport {
    pub n: usize,
    pub delta: f64,
    /// 1 − 4|I||J|/δ².
    pub bound: f64,
    pub entries: Vec<AuditEntry>,
    /// n S(A:C) and n S(A:B|C).
    pub classical_leading: f64,
    pub quantum_leading: f64,
    /// Measured log₂ M of the channel simulation.
    pub classical_measured: f64,
    /// n S(A:B|C) + 3dn|I||J| η(2δ|I||J|/√n) + d|J| log₂(n+1).
    pub quantum_budget: f64,
}

impl AuditReport {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.fidelity_lower >= self.bound)
    }

    pub fn worst_lower(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.fidelity_lower)
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn coded_fidelity_audit(
    ensemble: &Ensemble,
    kernel: &EncodingKernel,
    n: usize,
    delta: f64,
    seed: u64,
) -> Result<AuditReport> {
    coded_fidelity_audit_with(ensemble, kernel, n, delta, seed, &AuditOptions::default())
}

pub fn coded_fidelity_audit_with(
    ensemble: &Ensemble,
    kernel: &EncodingKernel,
    n: usize,
    delta: f64,
    seed: u64,
    options: &AuditOptions,
) -> Result<AuditReport> {
    if n == 0 || n > MAX_AUDIT_BLOCK {
        return Err(Error::InvalidArgument(format!(
            "block length must be in 1..={MAX_AUDIT_BLOCK}, got {n}"
        )));
    }
    if options.draws == 0 || !(options.alpha > 0.0 && options.alpha < 1.0) {
        return Err(Error::InvalidArgument("need draws ≥ 1 and α in (0, 1)".into()));
    }
    let w = ChannelMatrix::from(kernel);
    let code = RstCode::new(&w, ensemble.probs(), n, delta)?;
    let sub = ConditionalSubspace::new(ensemble, kernel)?;
    let panel = sample_panel(&code, options.panel.max(1), seed)?;
    let laws = panel
        .par_iter()
        .map(|c| code.law(c, None))
        .collect::<Result<Vec<_>>>()?;
    let log_m = laws.iter().map(|l| l.log_m).fold(f64::NEG_INFINITY, f64::max);
    let margin = ((1.0 / options.alpha).ln() / (2.0 * options.draws as f64)).sqrt();
    let (inputs, outputs) = (w.inputs(), w.outputs());

    let entries = panel
        .par_iter()
        .enumerate()
        .map(|(k, counts)| {
            let law = code.law(counts, Some(log_m))?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64 + 1);
            let mut cache: HashMap<usize, (bool, f64)> = HashMap::new();
            let (mut typical, mut ov_sum, mut fid_sum) = (0usize, 0.0, 0.0);
            for _ in 0..options.draws {
                let t = law.sample(&mut rng);
                let (is_typ, ov) = match cache.get(&t) {
                    Some(&v) => v,
                    None => {
                        let table = &law.tables[t];
                        // The empty table collects joint types outside the support of W.
                        let v = if table.is_empty() {
                            (false, 0.0)
                        } else {
                            let joint = JointType {
                                inputs,
                                outputs,
                                counts: table.clone(),
                            };
                            let rows: Vec<Vec<usize>> = table.chunks(outputs).map(|r| r.to_vec()).collect();
                            (
                                joint.is_cond_typical(&w, delta, 0.0),
                                sub.overlap_from_counts(&rows, delta, 0.0)?,
                            )
                        };
                        cache.insert(t, v);
                        v
                    }
                };
                ov_sum += ov;
                if is_typ {
                    typical += 1;
                    fid_sum += ov * ov;
                }
            }
            let d = options.draws as f64;
            Ok(AuditEntry {
                counts: counts.clone(),
                typical_fraction: typical as f64 / d,
                mean_overlap: ov_sum / d,
                fidelity_estimate: fid_sum / d,
                fidelity_lower: fid_sum / d - margin,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let nf = n as f64;
    let (i, j, dim) = (inputs as f64, outputs as f64, ensemble.dim() as f64);
    let quantum_leading = nf * conditional_chi(ensemble, kernel)?;
    Ok(AuditReport {
        n,
        delta,
        bound: 1.0 - 4.0 * i * j / (delta * delta),
        entries,
        classical_leading: nf * classical_info(ensemble, kernel)?,
        quantum_leading,
        classical_measured: log_m,
        quantum_budget: quantum_leading
            + 3.0 * dim * nf * i * j * eta(2.0 * delta * i * j / nf.sqrt())?
            + dim * j * (nf + 1.0).log2(),
    })
}
