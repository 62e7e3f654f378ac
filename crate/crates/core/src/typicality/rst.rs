//! Channel simulation with a random codebook.
//!
//! Shared randomness supplies candidates J_1, J_2, … drawn i.i.d. from q^{⊗n},
//! q the output law of W under P. Given I the encoder walks the list and
//! accepts J_m with probability min(1, W(J_m|I) / (c q(J_m))), sending the
//! first accepted index; after M rejections it sends index 0. The decoder
//! outputs the candidate it is told.
//!
//! Accepted outputs follow min(q, W/c) normalized, which equals W(·|I) except
//! for the mass clipped where W/q > c. The threshold c is the smallest value
//! clipping at most half the target distance, and M = ln(2/target)/a with a
//! the per-candidate acceptance probability, so failures cost at most the
//! other half. Both laws depend on J only through the joint type of (I, J),
//! so output laws, distances and samples are computed over joint types.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::types::{
    cumulative, for_each_composition, sample_index, sample_typical_sequence, ChannelMatrix, Estimate, LnFactorial,
    TypeVector,
};
use crate::error::{Error, Result};
use crate::qcore::check_probabilities;

/// Most joint types enumerated for one input type.
pub const MAX_TABLES: usize = 4_000_000;
pub const MAX_BLOCK: usize = 10_000;

fn log_sum_exp(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.filter(|x| *x > f64::NEG_INFINITY).collect();
    let top = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    top + v.iter().map(|x| (x - top).exp()).sum::<f64>().ln()
}

/// The simulation scheme for a channel, source law, block length and δ.
#[derive(Clone, Debug)]
pub struct RstCode {
    channel: ChannelMatrix,
    prior: Vec<f64>,
    n: usize,
    delta: f64,
    /// Target distance |I||J|/δ², capped below 1.
    target: f64,
    ln_q: Vec<f64>,
    lf: LnFactorial,
}

/// Output law of the scheme for one input type, over joint types.
#[derive(Clone, Debug)]
pub struct OutputLaw {
    /// Joint counts N(i, j), row-major. An empty table stands for every joint
    /// type outside the support of W(·|I), merged into one entry.
    pub tables: Vec<Vec<usize>>,
    /// ln W^{⊗n}(table | I).
    pub ln_channel: Vec<f64>,
    /// Scheme output probability of each table.
    pub output: Vec<f64>,
    /// log₂ c.
    pub log_threshold: f64,
    /// log₂ of the codebook size this type needs.
    pub log_m: f64,
    /// Probability that all M candidates are rejected.
    pub failure: f64,
    /// ½‖W(·|I) − output‖₁, exact.
    pub tv: f64,
    cdf: Vec<f64>,
}

impl OutputLaw {
    pub fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        sample_index(rng, &self.cdf)
    }

    /// Unbiased estimate of the distance from `samples` draws:
    /// TV = E_out[(1 − W/out)₊].
    pub fn tv_estimate<R: Rng>(&self, rng: &mut R, samples: usize) -> Estimate {
        let values: Vec<f64> = (0..samples)
            .map(|_| {
                let t = self.sample(rng);
                (1.0 - self.ln_channel[t].exp() / self.output[t]).max(0.0)
            })
            .collect();
        Estimate::from_values(&values)
    }
}

impl RstCode {
    pub fn new(channel: &ChannelMatrix, prior: &[f64], n: usize, delta: f64) -> Result<Self> {
        check_probabilities(prior)?;
        if prior.len() != channel.inputs() {
            return Err(Error::DimensionMismatch {
                expected: channel.inputs(),
                got: prior.len(),
            });
        }
        if n == 0 || n > MAX_BLOCK {
            return Err(Error::InvalidArgument(format!(
                "block length must be in 1..={MAX_BLOCK}, got {n}"
            )));
        }
        if !(delta > 0.0) {
            return Err(Error::InvalidArgument("δ must be positive".into()));
        }
        let ln = |v: f64| if v > 0.0 { v.ln() } else { f64::NEG_INFINITY };
        let q = channel.output_law(prior);
        let target = ((channel.inputs() * channel.outputs()) as f64 / (delta * delta)).min(0.5);
        Ok(RstCode {
            channel: channel.clone(),
            prior: prior.to_vec(),
            n,
            delta,
            target,
            ln_q: q.iter().map(|&v| ln(v)).collect(),
            lf: LnFactorial::new(n),
        })
    }

    pub fn target(&self) -> f64 {
        self.target
    }

    pub fn channel(&self) -> &ChannelMatrix {
        &self.channel
    }

    /// Joint types with row sums `counts` inside the support of W, with ln W
    /// and ln q^{⊗n} probabilities, plus the merged outside entry if q reaches it.
    fn tables(&self, counts: &[usize]) -> Result<(Vec<Vec<usize>>, Vec<f64>, Vec<f64>)> {
        let outputs = self.channel.outputs();
        let mut rows: Vec<Vec<(Vec<usize>, f64, f64)>> = Vec::new();
        let mut size = 1usize;
        // ln q^{⊗n} of all tables inside the support of W(·|I).
        let mut ln_inside = 0.0;
        for (i, &ni) in counts.iter().enumerate() {
            let w = &self.channel.rows()[i];
            let support: Vec<usize> = (0..outputs).filter(|&j| w[j] > 0.0).collect();
            let q_in: f64 = support.iter().map(|&j| self.ln_q[j].exp()).sum();
            ln_inside += ni as f64 * q_in.min(1.0).ln();
            let mut r = Vec::new();
            let mut full = vec![0usize; outputs];
            for_each_composition(ni, support.len(), &mut |c| {
                for (&j, &k) in support.iter().zip(c) {
                    full[j] = k;
                }
                let lw = self.lf.ln_multinomial(&full, w);
                let lq = self.ln_q_row(&full);
                r.push((full.clone(), lw, lq));
            });
            size = size.saturating_mul(r.len());
            if size > MAX_TABLES {
                return Err(Error::BudgetExceeded(format!(
                    "more than {MAX_TABLES} joint types for input type {counts:?}"
                )));
            }
            rows.push(r);
        }
        let mut tables = Vec::with_capacity(size);
        let mut lw = Vec::with_capacity(size);
        let mut lq = Vec::with_capacity(size);
        let mut idx = vec![0usize; rows.len()];
        loop {
            let mut t = Vec::with_capacity(counts.len() * outputs);
            let (mut a, mut b) = (0.0, 0.0);
            for (r, &k) in rows.iter().zip(&idx) {
                t.extend_from_slice(&r[k].0);
                a += r[k].1;
                b += r[k].2;
            }
            tables.push(t);
            lw.push(a);
            lq.push(b);
            let mut pos = 0;
            loop {
                if pos == rows.len() {
                    if ln_inside < -1e-15 {
                        tables.push(Vec::new());
                        lw.push(f64::NEG_INFINITY);
                        lq.push((-ln_inside.exp_m1()).ln());
                    }
                    return Ok((tables, lw, lq));
                }
                idx[pos] += 1;
                if idx[pos] < rows[pos].len() {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
        }
    }

    fn ln_q_row(&self, c: &[usize]) -> f64 {
        let n: usize = c.iter().sum();
        let mut v = self.lf.get(n);
        for (&k, &lq) in c.iter().zip(&self.ln_q) {
            if k > 0 {
                if lq == f64::NEG_INFINITY {
                    return lq;
                }
                v += k as f64 * lq - self.lf.get(k);
            }
        }
        v
    }

    /// Output law for an input of type `counts`, with codebook size `log_m`
    /// (log₂) or the type's own requirement when `None`.
    pub fn law(&self, counts: &[usize], log_m: Option<f64>) -> Result<OutputLaw> {
        if counts.len() != self.channel.inputs() || counts.iter().sum::<usize>() != self.n {
            return Err(Error::InvalidArgument(format!(
                "input type {counts:?} does not match the code (n = {})",
                self.n
            )));
        }
        let (tables, lw, lq) = self.tables(counts)?;
        if lw
            .iter()
            .zip(&lq)
            .any(|(&w, &q)| w > f64::NEG_INFINITY && q == f64::NEG_INFINITY)
        {
            return Err(Error::Infeasible(
                "the channel reaches outputs the source never produces".into(),
            ));
        }
        let clip = self.target / 2.0;
        let ln_c = threshold(&lw, &lq, clip);
        // Per-candidate acceptance probability a = Σ min(q, W/c).
        let ln_min: Vec<f64> = lw.iter().zip(&lq).map(|(&w, &q)| q.min(w - ln_c)).collect();
        let ln_a = log_sum_exp(ln_min.iter().copied()).min(0.0);
        let own_ln_m = (2.0 / self.target).ln().ln() - ln_a;
        let ln_m = match log_m {
            Some(bits) => bits * std::f64::consts::LN_2,
            None => own_ln_m,
        };
        let ln_m = round_up_count(ln_m);
        // (1 − a)^M, through −ln(1 − a) ≈ a when a is tiny.
        let a = ln_a.exp();
        let ln_g = if a < 1e-12 { ln_a } else { (-(-a).ln_1p()).ln() };
        let failure = if a >= 1.0 { 0.0 } else { (-(ln_m + ln_g).exp()).exp() };

        let ln_reject_norm = if a >= 1.0 { f64::NEG_INFINITY } else { (-a).ln_1p() };
        let output: Vec<f64> = ln_min
            .iter()
            .zip(&lq)
            .map(|(&m, &q)| {
                let accepted = (m - ln_a).exp() * (1.0 - failure);
                let rejected = if failure > 0.0 && q > f64::NEG_INFINITY {
                    // q − min(q, W/c) = q (1 − e^{m − q})
                    let frac = -(m - q).exp_m1();
                    if frac > 0.0 {
                        (q + frac.ln() - ln_reject_norm).exp() * failure
                    } else {
                        0.0
                    }
                } else {
                    0.0
                };
                accepted + rejected
            })
            .collect();
        let tv = 0.5 * output.iter().zip(&lw).map(|(&d, &w)| (d - w.exp()).abs()).sum::<f64>();
        let cdf = cumulative(&output);
        Ok(OutputLaw {
            tables,
            ln_channel: lw,
            output,
            log_threshold: ln_c / std::f64::consts::LN_2,
            log_m: own_ln_m.max(ln_m) / std::f64::consts::LN_2,
            failure,
            tv,
            cdf,
        })
    }
}

/// Codebook sizes are integers; below 2^50 round ln M up to ln ⌈M⌉.
fn round_up_count(ln_m: f64) -> f64 {
    if ln_m < 50.0 * std::f64::consts::LN_2 {
        ln_m.exp().ceil().max(1.0).ln()
    } else {
        ln_m
    }
}

/// ln of the smallest c with Σ (W − c q)₊ ≤ `clip`.
fn threshold(lw: &[f64], lq: &[f64], clip: f64) -> f64 {
    let mut order: Vec<usize> = (0..lw.len()).filter(|&t| lw[t] > f64::NEG_INFINITY).collect();
    let ratio = |t: usize| lw[t] - lq[t];
    order.sort_by(|&a, &b| ratio(b).total_cmp(&ratio(a)));
    let mut s1 = 0.0;
    let mut ln_s2 = f64::NEG_INFINITY;
    for (k, &t) in order.iter().enumerate() {
        s1 += lw[t].exp();
        ln_s2 = log_sum_exp([ln_s2, lq[t]].into_iter());
        let next = order.get(k + 1).map_or(f64::NEG_INFINITY, |&u| ratio(u));
        // g(c) = s1 − c s2 on [r_{k+1}, r_k]; stop once g(r_{k+1}) exceeds the budget.
        if s1 > clip {
            let ln_c = (s1 - clip).ln() - ln_s2;
            if ln_c >= next {
                return ln_c.min(ratio(t));
            }
        }
    }
    // All of W's mass fits under the clip budget: any c works, take the smallest ratio.
    order.last().map_or(0.0, |&t| ratio(t))
}

#[derive(Clone, Debug)]
pub struct RstOptions {
    /// Typical inputs examined.
    pub panel: usize,
    /// Monte-Carlo draws of the output, split over the panel.
    pub trials: usize,
}

impl Default for RstOptions {
    fn default() -> Self {
        RstOptions {
            panel: 8,
            trials: 10_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PanelEntry {
    pub counts: Vec<usize>,
    pub log_threshold: f64,
    pub failure: f64,
    pub tv: f64,
    pub tv_estimate: Estimate,
}

#[derive(Clone, Debug)]
pub struct RstReport {
    pub n: usize,
    pub delta: f64,
    /// log₂ M in bits: the largest codebook any panel input needs.
    pub log_m: f64,
    /// Leading terms n H(P:W) and n H(W|P) of the message and randomness sizes.
    pub leading_log_m: f64,
    pub leading_log_n: f64,
    /// |I||J|/δ² (capped at ½).
    pub target: f64,
    /// Largest exact distance over the panel.
    pub tv: f64,
    /// Monte-Carlo estimate of the panel entry with the largest estimate.
    pub tv_estimate: Estimate,
    pub panel: Vec<PanelEntry>,
}

impl RstReport {
    pub fn rate(&self) -> f64 {
        self.log_m / self.n as f64
    }
}

pub fn reverse_shannon_sim(
    channel: &ChannelMatrix,
    prior: &[f64],
    n: usize,
    delta: f64,
    seed: u64,
) -> Result<RstReport> {
    reverse_shannon_sim_with(channel, prior, n, delta, seed, &RstOptions::default())
}

pub fn reverse_shannon_sim_with(
    channel: &ChannelMatrix,
    prior: &[f64],
    n: usize,
    delta: f64,
    seed: u64,
    options: &RstOptions,
) -> Result<RstReport> {
    let code = RstCode::new(channel, prior, n, delta)?;
    let panel = sample_panel(&code, options.panel.max(1), seed)?;
    let own: Vec<OutputLaw> = panel.par_iter().map(|c| code.law(c, None)).collect::<Result<_>>()?;
    let log_m = own.iter().map(|l| l.log_m).fold(f64::NEG_INFINITY, f64::max);
    let per = options.trials.div_ceil(panel.len());
    let entries: Vec<PanelEntry> = panel
        .par_iter()
        .enumerate()
        .map(|(k, counts)| {
            let law = code.law(counts, Some(log_m))?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64 + 1);
            Ok(PanelEntry {
                counts: counts.clone(),
                log_threshold: law.log_threshold,
                failure: law.failure,
                tv: law.tv,
                tv_estimate: law.tv_estimate(&mut rng, per),
            })
        })
        .collect::<Result<_>>()?;
    let tv = entries.iter().map(|e| e.tv).fold(0.0, f64::max);
    let tv_estimate = entries
        .iter()
        .map(|e| e.tv_estimate)
        .max_by(|a, b| a.mean.total_cmp(&b.mean))
        .expect("nonempty panel");
    Ok(RstReport {
        n,
        delta,
        log_m,
        leading_log_m: n as f64 * channel.mutual_information(prior),
        leading_log_n: n as f64 * channel.conditional_entropy(prior),
        target: code.target,
        tv,
        tv_estimate,
        panel: entries,
    })
}

/// Types of `size` typical inputs drawn from P^{⊗n}.
pub(crate) fn sample_panel(code: &RstCode, size: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..size)
        .map(|_| {
            let s = sample_typical_sequence(&mut rng, &code.prior, code.delta, code.n)?;
            Ok(TypeVector::from_sequence(&s, code.prior.len())?.counts().to_vec())
        })
        .collect()
}
