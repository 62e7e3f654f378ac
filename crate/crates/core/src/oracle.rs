//! Brute-force references for small instances.
//!
//! Nothing here touches the decomposition program or the Jacobi solver:
//! kernels p(j|i) are enumerated row by row on a lattice, and eigenvalues
//! come from the quadratic formula or a shifted QR iteration.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64, ONE, ZERO};
use crate::qcore::{shannon_entropy, EncodingKernel, Ensemble};

/// Most kernels a brute-force call may enumerate.
pub const KERNEL_BUDGET: u128 = 1_000_000_000;
pub const MAX_STATES: usize = 3;
pub const MAX_SYMBOLS: usize = 4;

#[derive(Clone, Debug, PartialEq)]
pub struct Eigenpairs {
    /// Ascending.
    pub values: Vec<f64>,
    /// `vectors[k]` belongs to `values[k]`.
    pub vectors: Vec<Vec<C64>>,
}

/// Closed-form eigenpairs of a 2×2 Hermitian matrix.
pub fn eig2(a: &CMatrix) -> Result<Eigenpairs> {
    if a.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: a.dim(),
        });
    }
    let defect = a.hermitian_defect();
    if defect > 1e-10 {
        return Err(Error::NotHermitian(defect));
    }
    let (p, q, b) = (a[(0, 0)].re, a[(1, 1)].re, a[(0, 1)]);
    let (lo, hi) = eig2_values(p, q, b.norm());
    let vector = |l: f64| -> Vec<C64> {
        // (A − l)v = 0 with v = (b, l − p) or (l − q, b*)
        let v1 = [b, C64::new(l - p, 0.0)];
        let v2 = [C64::new(l - q, 0.0), b.conj()];
        let n1 = v1[0].norm_sqr() + v1[1].norm_sqr();
        let n2 = v2[0].norm_sqr() + v2[1].norm_sqr();
        let (v, n) = if n1 >= n2 { (v1, n1) } else { (v2, n2) };
        if n < 1e-300 {
            return vec![ONE, ZERO];
        }
        let s = n.sqrt();
        vec![v[0] / s, v[1] / s]
    };
    let mut vectors = vec![vector(lo), vector(hi)];
    if (hi - lo).abs() < 1e-300 {
        vectors = vec![vec![ONE, ZERO], vec![ZERO, ONE]];
    }
    Ok(Eigenpairs {
        values: vec![lo, hi],
        vectors,
    })
}

fn eig2_values(p: f64, q: f64, off: f64) -> (f64, f64) {
    let mean = 0.5 * (p + q);
    let half = 0.5 * (p - q);
    let r = half.hypot(off);
    (mean - r, mean + r)
}

/// Eigenpairs of a small Hermitian matrix: closed form up to 2×2, shifted QR
/// with deflation above.
pub fn eig_small(a: &CMatrix) -> Result<Eigenpairs> {
    let d = a.dim();
    let defect = a.hermitian_defect();
    if defect > 1e-10 {
        return Err(Error::NotHermitian(defect));
    }
    match d {
        0 => Err(Error::Empty("matrix")),
        1 => Ok(Eigenpairs {
            values: vec![a[(0, 0)].re],
            vectors: vec![vec![ONE]],
        }),
        2 => eig2(a),
        _ => Ok(qr_eigen(a)),
    }
}

fn qr_eigen(a: &CMatrix) -> Eigenpairs {
    let d = a.dim();
    let mut m: Vec<Vec<C64>> = (0..d).map(|i| (0..d).map(|j| a[(i, j)]).collect()).collect();
    let mut v: Vec<Vec<C64>> = (0..d)
        .map(|i| (0..d).map(|j| if i == j { ONE } else { ZERO }).collect())
        .collect();
    let scale = a.frobenius().max(1e-300);
    let mut active = d;
    let mut iterations = 0;
    while active > 1 && iterations < 10_000 {
        iterations += 1;
        let n = active;
        let tail: f64 = (0..n - 1).map(|j| m[n - 1][j].norm_sqr()).sum::<f64>().sqrt();
        if tail <= 1e-15 * scale {
            active -= 1;
            continue;
        }
        // Wilkinson shift from the trailing 2×2 block.
        let (lo, hi) = eig2_values(m[n - 2][n - 2].re, m[n - 1][n - 1].re, m[n - 2][n - 1].norm());
        let corner = m[n - 1][n - 1].re;
        let shift = if (lo - corner).abs() < (hi - corner).abs() {
            lo
        } else {
            hi
        };
        for (i, row) in m.iter_mut().enumerate().take(n) {
            row[i] -= shift;
        }
        // Modified Gram–Schmidt QR of the active block.
        let mut q = vec![vec![ZERO; n]; n];
        let mut r = vec![vec![ZERO; n]; n];
        for j in 0..n {
            let mut col: Vec<C64> = (0..n).map(|i| m[i][j]).collect();
            // Two passes keep Q orthonormal when columns nearly cancel.
            for _ in 0..2 {
                for k in 0..j {
                    let dot: C64 = (0..n).map(|i| q[i][k].conj() * col[i]).sum();
                    r[k][j] += dot;
                    for i in 0..n {
                        col[i] -= dot * q[i][k];
                    }
                }
            }
            let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            r[j][j] = C64::new(norm, 0.0);
            if norm > 1e-13 * scale {
                for i in 0..n {
                    q[i][j] = col[i] / norm;
                }
            } else {
                // Rank-deficient column: any unit vector orthogonal to the previous ones.
                for e in 0..n {
                    let mut cand: Vec<C64> = (0..n).map(|i| if i == e { ONE } else { ZERO }).collect();
                    for k in 0..j {
                        let dot: C64 = (0..n).map(|i| q[i][k].conj() * cand[i]).sum();
                        for i in 0..n {
                            cand[i] -= dot * q[i][k];
                        }
                    }
                    let cn = cand.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                    if cn > 1e-6 {
                        for i in 0..n {
                            q[i][j] = cand[i] / cn;
                        }
                        break;
                    }
                }
            }
        }
        // Active block ← R Q + shift; the rest of the matrix is rotated by Q.
        let mut next = vec![vec![ZERO; n]; n];
        for i in 0..n {
            for j in 0..n {
                next[i][j] = (i..n).map(|k| r[i][k] * q[k][j]).sum();
            }
            next[i][i] += shift;
        }
        for i in 0..n {
            for j in 0..n {
                m[i][j] = next[i][j];
            }
        }
        // Deflated rows/cols couple to the active block through Qᴴ.
        for i in n..d {
            let row: Vec<C64> = (0..n).map(|j| (0..n).map(|k| m[i][k] * q[k][j]).sum()).collect();
            for j in 0..n {
                m[i][j] = row[j];
                m[j][i] = row[j].conj();
            }
        }
        for row in v.iter_mut() {
            let updated: Vec<C64> = (0..n).map(|j| (0..n).map(|k| row[k] * q[k][j]).sum()).collect();
            row[..n].copy_from_slice(&updated);
        }
    }
    let mut pairs: Vec<(f64, Vec<C64>)> = (0..d)
        .map(|k| (m[k][k].re, (0..d).map(|i| v[i][k]).collect()))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Eigenpairs {
        values: pairs.iter().map(|p| p.0).collect(),
        vectors: pairs.into_iter().map(|p| p.1).collect(),
    }
}

fn spectrum_entropy(values: &[f64]) -> f64 {
    values
        .iter()
        .map(|&l| {
            let l = l.clamp(0.0, 1.0);
            if l > 0.0 {
                -l * l.log2()
            } else {
                0.0
            }
        })
        .sum()
}

/// S(Σ x_i φ_i) using the smaller of the density and Gram matrices.
fn mixture_entropy(ensemble: &Ensemble, x: &[f64]) -> Result<f64> {
    let states = ensemble.states();
    let support: Vec<usize> = (0..x.len()).filter(|&i| x[i] > 0.0).collect();
    if support.len() <= 1 {
        return Ok(0.0);
    }
    let d = ensemble.dim();
    let matrix = if support.len() < d {
        let k = support.len();
        let mut g = CMatrix::zeros(k);
        for (a, &i) in support.iter().enumerate() {
            for (b, &j) in support.iter().enumerate() {
                let ov: C64 = states[i]
                    .amplitudes()
                    .iter()
                    .zip(states[j].amplitudes())
                    .map(|(u, w)| u.conj() * w)
                    .sum();
                g[(a, b)] = ov * (x[i] * x[j]).sqrt();
            }
        }
        g
    } else {
        let mut rho = CMatrix::zeros(d);
        for &i in &support {
            let amp = states[i].amplitudes();
            for r in 0..d {
                for c in 0..d {
                    rho[(r, c)] += amp[r] * amp[c].conj() * x[i];
                }
            }
        }
        rho
    };
    Ok(spectrum_entropy(&eig_small(&matrix)?.values))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Constraint {
    Classical,
    Total,
}

/// Compositions of `total` into `parts` nonnegative integers.
fn compositions(total: usize, parts: usize) -> Vec<Vec<u32>> {
    fn rec(left: usize, parts: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if parts == 1 {
            cur.push(left as u32);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for c in 0..=left {
            cur.push(c as u32);
            rec(left - c, parts - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(total, parts, &mut Vec::new(), &mut out);
    out
}

fn binomial(n: u128, k: u128) -> u128 {
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Number of kernels enumerated for the given sizes, before symmetry reduction.
pub fn kernel_count(m: usize, symbols: usize, steps: usize) -> u128 {
    let per_row = binomial((steps + symbols - 1) as u128, (symbols - 1) as u128);
    per_row.checked_pow(m as u32).unwrap_or(u128::MAX)
}

fn brute_force(
    ensemble: &Ensemble,
    rates: &[f64],
    symbols: usize,
    steps: usize,
    constraint: Constraint,
) -> Result<Vec<f64>> {
    let m = ensemble.len();
    if m > MAX_STATES {
        return Err(Error::InvalidArgument(format!(
            "brute force supports at most {MAX_STATES} states"
        )));
    }
    if symbols == 0 || symbols > MAX_SYMBOLS {
        return Err(Error::InvalidArgument(format!(
            "symbol count must be in 1..={MAX_SYMBOLS}"
        )));
    }
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be positive".into()));
    }
    let count = kernel_count(m, symbols, steps);
    if count > KERNEL_BUDGET {
        return Err(Error::BudgetExceeded(format!(
            "{count} kernels exceed the budget of {KERNEL_BUDGET}"
        )));
    }

    // Column table: counts (c_1..c_m) ↦ (q H(x), q S(f(x))) with a_i = p_i c_i / steps.
    let probs = ensemble.probs();
    let stride: Vec<usize> = (0..m).map(|i| (steps + 1).pow(i as u32)).collect();
    let table_len = (steps + 1).pow(m as u32);
    let table: Vec<(f64, f64)> = (0..table_len)
        .into_par_iter()
        .map(|idx| {
            let a: Vec<f64> = (0..m)
                .map(|i| probs[i] * ((idx / stride[i]) % (steps + 1)) as f64 / steps as f64)
                .collect();
            let q: f64 = a.iter().sum();
            if q <= 0.0 {
                return Ok((0.0, 0.0));
            }
            let x: Vec<f64> = a.iter().map(|v| v / q).collect();
            Ok((q * shannon_entropy(&x), q * mixture_entropy(ensemble, &x)?))
        })
        .collect::<Result<_>>()?;

    let h_prior = shannon_entropy(probs);
    let slack = 1.0 / steps as f64;
    let comps = compositions(steps, symbols);
    // Columns may be permuted freely, so the first row is taken non-increasing.
    let first: Vec<&Vec<u32>> = comps.iter().filter(|c| c.windows(2).all(|w| w[0] >= w[1])).collect();
    let limits: Vec<f64> = rates.iter().map(|r| r + slack).collect();

    let best = first
        .par_iter()
        .map(|row0| {
            let mut best = vec![f64::INFINITY; rates.len()];
            let mut offsets = vec![0usize; symbols];
            for (j, &c) in row0.iter().enumerate() {
                offsets[j] = c as usize * stride[0];
            }
            descend(1, m, &comps, &stride, &mut offsets, &mut |offs| {
                let mut cond = 0.0;
                let mut chi = 0.0;
                for &o in offs {
                    let (h, s) = table[o];
                    cond += h;
                    chi += s;
                }
                let info = h_prior - cond;
                let used = match constraint {
                    Constraint::Classical => info,
                    Constraint::Total => info + chi,
                };
                for (b, &lim) in best.iter_mut().zip(&limits) {
                    if used <= lim && chi < *b {
                        *b = chi;
                    }
                }
            });
            best
        })
        .reduce(
            || vec![f64::INFINITY; rates.len()],
            |a, b| a.iter().zip(&b).map(|(x, y)| x.min(*y)).collect(),
        );
    if let Some(r) = rates.iter().zip(&best).find(|(_, b)| b.is_infinite()).map(|(r, _)| r) {
        return Err(Error::Infeasible(format!("no kernel meets rate {r}")));
    }
    Ok(best.into_iter().map(|b| b.max(0.0)).collect())
}

fn descend(
    row: usize,
    m: usize,
    comps: &[Vec<u32>],
    stride: &[usize],
    offsets: &mut [usize],
    visit: &mut dyn FnMut(&[usize]),
) {
    if row == m {
        visit(offsets);
        return;
    }
    let saved = offsets.to_vec();
    for c in comps {
        for (j, &v) in c.iter().enumerate() {
            offsets[j] = saved[j] + v as usize * stride[row];
        }
        descend(row + 1, m, comps, stride, offsets, visit);
    }
    offsets.copy_from_slice(&saved);
}

/// Exhaustive minimum of S(A:B|C) over lattice kernels with S(A:C) ≤ R + 1/steps.
pub fn brute_force_m(ensemble: &Ensemble, rate: f64, symbols: usize, steps: usize) -> Result<f64> {
    Ok(brute_force(ensemble, &[rate], symbols, steps, Constraint::Classical)?[0])
}

/// [`brute_force_m`] at several rates in one enumeration.
pub fn brute_force_m_many(ensemble: &Ensemble, rates: &[f64], symbols: usize, steps: usize) -> Result<Vec<f64>> {
    brute_force(ensemble, rates, symbols, steps, Constraint::Classical)
}

/// Exhaustive minimum of S(A:B|C) over lattice kernels with S(A:BC) ≤ R + 1/steps.
pub fn brute_force_n(ensemble: &Ensemble, rate: f64, symbols: usize, steps: usize) -> Result<f64> {
    Ok(brute_force(ensemble, &[rate], symbols, steps, Constraint::Total)?[0])
}

/// Most eigenindex strings [`brute_force_overlap`] may enumerate.
pub const OVERLAP_BUDGET: usize = 1 << 22;

/// ⟨φ_I|Π(J)|φ_I⟩ by enumerating every eigenindex string K, with the
/// conditional states built directly from Bayes' rule.
pub fn brute_force_overlap(
    i_seq: &[usize],
    j_seq: &[usize],
    ensemble: &Ensemble,
    kernel: &EncodingKernel,
    delta: f64,
    eps_robust: f64,
) -> Result<f64> {
    let n = i_seq.len();
    if j_seq.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: j_seq.len(),
        });
    }
    if let Some(&i) = i_seq.iter().find(|&&i| i >= ensemble.len()) {
        return Err(Error::InvalidArgument(format!(
            "symbol {i} outside the source alphabet"
        )));
    }
    let d = ensemble.dim();
    let outputs = kernel.outputs();
    let total = (d as f64).powi(n as i32);
    if total > OVERLAP_BUDGET as f64 {
        return Err(Error::BudgetExceeded(format!("{d}^{n} eigenindex strings")));
    }
    let p = ensemble.probs();
    let rows = kernel.rows();
    // Conditional state and its eigenpairs for every output symbol that occurs.
    let mut eig: Vec<Option<Eigenpairs>> = vec![None; outputs];
    for &j in j_seq {
        if j >= outputs {
            return Err(Error::InvalidArgument(format!("symbol {j} outside the kernel outputs")));
        }
        if eig[j].is_some() {
            continue;
        }
        let qj: f64 = (0..ensemble.len()).map(|i| p[i] * rows[i][j]).sum();
        if qj <= 0.0 {
            return Err(Error::InvalidArgument(format!("symbol {j} has zero probability")));
        }
        let mut rho = CMatrix::zeros(d);
        for (i, s) in ensemble.states().iter().enumerate() {
            let w = p[i] * rows[i][j] / qj;
            let a = s.amplitudes();
            for r in 0..d {
                for c in 0..d {
                    rho[(r, c)] += a[r] * a[c].conj() * w;
                }
            }
        }
        eig[j] = Some(eig_small(&rho)?);
    }
    let mut nj = vec![0usize; outputs];
    for &j in j_seq {
        nj[j] += 1;
    }
    let mut k = vec![0usize; n];
    let mut sum = 0.0;
    for _ in 0..total as usize {
        let mut counts = vec![vec![0usize; d]; outputs];
        let mut prod = 1.0;
        for t in 0..n {
            let e = eig[j_seq[t]].as_ref().expect("filled above");
            counts[j_seq[t]][k[t]] += 1;
            let v = &e.vectors[k[t]];
            let amp: C64 = v
                .iter()
                .zip(ensemble.states()[i_seq[t]].amplitudes())
                .map(|(x, y)| x.conj() * y)
                .sum();
            prod *= amp.norm_sqr();
        }
        let typical = (0..outputs).filter(|&j| nj[j] > 0).all(|j| {
            let e = eig[j].as_ref().expect("filled above");
            let nf = nj[j] as f64;
            let radius = delta * nf.sqrt() + eps_robust * nf + 1e-9;
            (0..d).all(|kk| (counts[j][kk] as f64 - nf * e.values[kk].clamp(0.0, 1.0)).abs() <= radius)
        });
        if typical {
            sum += prod;
        }
        // Next string in base d.
        for slot in k.iter_mut() {
            *slot += 1;
            if *slot < d {
                break;
            }
            *slot = 0;
        }
    }
    Ok(sum)
}
