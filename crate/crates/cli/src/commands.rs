use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde_json::{json, Value};
use tradeoff_core::closedform::{devetak_berger_at_rate, discretize_uniform_qubit, uniform_qubit_curve};
use tradeoff_core::oracle::{brute_force_m_many, brute_force_n};
use tradeoff_core::solver::{
    avs_sup, blind_rate, default_resolution, solve_m, solve_n_rsp, tensor_points, trade_off_curve, SimplexGrid,
    Solution,
};
use tradeoff_core::symmetry::avs_transitive;
use tradeoff_core::typicality::{
    coded_fidelity_audit_with, reverse_shannon_sim_with, AuditOptions, ChannelMatrix, RstOptions,
};
use tradeoff_core::{EncodingKernel, Ensemble, Error};

use crate::input::{kernel_from_labels, load_curve, load_ensemble, load_rows, parse_list};
use crate::report::{manifest, num, ManifestInput, Sink, Table};
use crate::{Cli, Command, Quantity};

/// 1: malformed input, 2: infeasible query, 3: budget exceeded.
pub fn exit_code(e: &anyhow::Error) -> u8 {
    match e.chain().find_map(|c| c.downcast_ref::<Error>()) {
        Some(Error::Infeasible(_)) => 2,
        Some(Error::BudgetExceeded(_)) => 3,
        _ => 1,
    }
}

struct Outcome {
    table: Table,
    grid: Option<usize>,
    results: Value,
}

pub fn run(cli: &Cli) -> Result<()> {
    let threads = cli.global.threads.unwrap_or(0);
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let start = Instant::now();
    let seed = cli.global.seed;
    let outcome = match &cli.command {
        Command::Curve(a) => curve(&a.ensemble, a.samples, a.grid)?,
        Command::Point(a) => point(a)?,
        Command::Avs(a) => avs(a)?,
        Command::Blind(a) => blind(&load_ensemble(&a.ensemble)?.ensemble)?,
        Command::Tensor(a) => tensor(a)?,
        Command::UniformQubit(a) => uniform(a)?,
        Command::SimulateRst(a) => rst(a, seed)?,
        Command::AuditCoding(a) => audit(a, seed)?,
        Command::Oracle(a) => oracle(a)?,
    };
    let sink = Sink::new(cli.global.output.clone(), cli.global.manifest.clone());
    sink.write_table(&outcome.table)?;
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let command = serde_json::to_value(&cli.command)?;
    let name = command
        .as_object()
        .and_then(|o| o.keys().next().cloned())
        .unwrap_or_default();
    sink.write_manifest(&manifest(ManifestInput {
        command: &name,
        argv: &argv,
        flags: json!({ "global": &cli.global, "command": command[&name] }),
        seed,
        threads: rayon::current_num_threads(),
        grid_resolution: outcome.grid,
        rows: outcome.table.len(),
        results: outcome.results,
        wall_time: start.elapsed().as_secs_f64(),
    }))
}

fn grid_for(ensemble: &Ensemble, k: Option<usize>) -> Result<SimplexGrid> {
    Ok(match k {
        Some(k) => SimplexGrid::new(ensemble, k)?,
        // Larger sources start from the vertices and rely on seeded refinement.
        None => SimplexGrid::new(ensemble, default_resolution(ensemble.len()).unwrap_or(0))?,
    })
}

fn curve(path: &std::path::Path, samples: usize, k: Option<usize>) -> Result<Outcome> {
    let e = load_ensemble(path)?.ensemble;
    let grid = grid_for(&e, k)?;
    let c = trade_off_curve(&e, samples, &grid)?;
    let mut table = Table::new(&["R", "Q", "grid_k", "support_size"]);
    for s in &c.samples {
        table.push(vec![
            num(s.rate),
            num(s.value),
            c.grid_resolution.to_string(),
            s.support_size().to_string(),
        ]);
    }
    Ok(Outcome {
        table,
        grid: Some(c.grid_resolution),
        results: json!({ "entropy": e.entropy(), "prior_entropy": e.prior_entropy(), "tolerance": c.tolerance }),
    })
}

fn point(a: &crate::PointArgs) -> Result<Outcome> {
    let e = load_ensemble(&a.ensemble)?.ensemble;
    let grid = grid_for(&e, a.grid)?;
    let (label, value, sol): (&str, f64, Solution) = match a.quantity {
        Quantity::M => {
            let s = solve_m(&e, a.rate, &grid)?;
            ("Q", s.value, s)
        }
        Quantity::X => {
            let s = solve_m(&e, a.rate, &grid)?;
            ("X", a.rate + s.value, s)
        }
        Quantity::N => {
            let s = solve_n_rsp(&e, a.rate, &grid)?;
            ("N", s.value, s)
        }
    };
    let mut table = Table::new(&["R", label, "grid_k", "support_size"]);
    table.push(vec![
        num(a.rate),
        num(value),
        sol.grid_resolution.to_string(),
        sol.support_size().to_string(),
    ]);
    Ok(Outcome {
        table,
        grid: Some(sol.grid_resolution),
        results: json!({ "value": value, "tolerance": sol.tolerance }),
    })
}

fn avs(a: &crate::AvsArgs) -> Result<Outcome> {
    let loaded = load_ensemble(&a.ensemble)?;
    let states = loaded.ensemble.states().to_vec();
    let m = states.len();
    let uniform = Ensemble::uniform(states.clone())?;
    let grid = grid_for(&uniform, a.grid)?;
    let (value, prior) = if a.transitive {
        let action = loaded
            .group
            .context("--transitive needs a group in the ensemble file")?;
        (
            avs_transitive(&states, &action, a.rate, &grid)?,
            vec![1.0 / m as f64; m],
        )
    } else {
        let vertices: Vec<Vec<f64>> = if a.vertex.is_empty() {
            (0..m)
                .map(|i| (0..m).map(|k| if k == i { 1.0 } else { 0.0 }).collect())
                .collect()
        } else {
            a.vertex.iter().map(|v| parse_list(v)).collect::<Result<_>>()?
        };
        let r = avs_sup(&states, &vertices, a.rate, &grid)?;
        (r.value, r.prior)
    };
    let mut header = vec!["R".to_string(), "Q".to_string()];
    header.extend((1..=m).map(|i| format!("p_{i}")));
    let mut table = Table::new(&header);
    let mut row = vec![num(a.rate), num(value)];
    row.extend(prior.iter().map(|&p| num(p)));
    table.push(row);
    Ok(Outcome {
        table,
        grid: Some(grid.resolution()),
        results: json!({ "value": value, "prior": prior }),
    })
}

fn blind(e: &Ensemble) -> Result<Outcome> {
    let b = blind_rate(e)?;
    let components = b
        .components
        .iter()
        .map(|c| {
            format!(
                "[{}]",
                c.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(",")
            )
        })
        .collect::<Vec<_>>()
        .join(",");
    let mut table = Table::new(&["Q_blind", "S_minus_H", "components"]);
    table.push(vec![num(b.rate), num(b.rate_from_entropy), components.clone()]);
    Ok(Outcome {
        table,
        grid: None,
        results: json!({ "rate": b.rate, "components": components, "weights": b.weights }),
    })
}

fn even_rates(lo: f64, hi: f64, samples: usize) -> Result<Vec<f64>> {
    if samples < 2 {
        bail!("need at least two samples");
    }
    Ok((0..samples)
        .map(|k| lo + (hi - lo) * k as f64 / (samples - 1) as f64)
        .collect())
}

fn tensor(a: &crate::TensorArgs) -> Result<Outcome> {
    let first = load_curve(&a.first)?;
    let second = load_curve(&a.second)?;
    let top = first.last().unwrap().0 + second.last().unwrap().0;
    let mut table = Table::new(&["R", "Q"]);
    for r in even_rates(0.0, top, a.samples)? {
        table.push(vec![num(r), num(tensor_points(&first, &second, r)?)]);
    }
    Ok(Outcome {
        table,
        grid: None,
        results: json!({ "max_rate": top }),
    })
}

fn uniform(a: &crate::UniformArgs) -> Result<Outcome> {
    let Some(points) = a.points else {
        let mut table = Table::new(&["R", "Q"]);
        for (r, q) in uniform_qubit_curve(a.samples)? {
            table.push(vec![num(r), num(q)]);
        }
        return Ok(Outcome {
            table,
            grid: None,
            results: Value::Null,
        });
    };
    if !(a.from >= 0.0 && a.to >= a.from) {
        bail!("need 0 ≤ --from ≤ --to");
    }
    let d = discretize_uniform_qubit(points)?;
    let grid = grid_for(&d.ensemble, None)?;
    let mut table = Table::new(&["R", "Q_closed_form", "Q_discretized", "grid_k", "support_size"]);
    let mut worst: f64 = 0.0;
    let mut lowest: f64 = f64::INFINITY;
    for r in even_rates(a.from, a.to, a.samples)? {
        let exact = devetak_berger_at_rate(r)?;
        let s = solve_m(&d.ensemble, r, &grid)?;
        worst = worst.max((s.value - exact).abs());
        lowest = lowest.min(s.value - exact);
        table.push(vec![
            num(r),
            num(exact),
            num(s.value),
            s.grid_resolution.to_string(),
            s.support_size().to_string(),
        ]);
    }
    Ok(Outcome {
        table,
        grid: Some(grid.resolution()),
        results: json!({ "covering_radius": d.covering_radius, "max_abs_gap": worst, "min_signed_gap": lowest }),
    })
}

fn rst(a: &crate::RstArgs, seed: u64) -> Result<Outcome> {
    let channel = match (&a.bsc, &a.channel) {
        (Some(p), None) => ChannelMatrix::bsc(*p)?,
        (None, Some(path)) => ChannelMatrix::new(load_rows(path)?)?,
        _ => bail!("give exactly one of --bsc and --channel"),
    };
    let k = channel.inputs();
    let prior = match &a.prior {
        Some(p) => parse_list(p)?,
        None => vec![1.0 / k as f64; k],
    };
    let options = RstOptions {
        panel: a.panel,
        trials: a.trials,
    };
    let r = reverse_shannon_sim_with(&channel, &prior, a.n, a.delta, seed, &options)?;
    let info = channel.mutual_information(&prior);
    let mut table = Table::new(&[
        "n",
        "delta",
        "log_m",
        "rate",
        "mutual_information",
        "target",
        "tv",
        "tv_estimate",
        "tv_half_width",
    ]);
    table.push(vec![
        a.n.to_string(),
        num(a.delta),
        num(r.log_m),
        num(r.rate()),
        num(info),
        num(r.target),
        num(r.tv),
        num(r.tv_estimate.mean),
        num(r.tv_estimate.half_width),
    ]);
    Ok(Outcome {
        table,
        grid: None,
        results: json!({
            "leading_log_m": r.leading_log_m,
            "leading_log_n": r.leading_log_n,
            "panel": r.panel.iter().map(|p| json!({
                "type": p.counts,
                "tv": p.tv,
                "failure": p.failure,
                "tv_estimate": p.tv_estimate.mean,
            })).collect::<Vec<_>>(),
        }),
    })
}

fn audit(a: &crate::AuditArgs, seed: u64) -> Result<Outcome> {
    let e = load_ensemble(&a.ensemble)?.ensemble;
    let kernel = match (&a.labels, &a.kernel) {
        (Some(l), None) => kernel_from_labels(&parse_list::<usize>(l)?),
        (None, Some(p)) => EncodingKernel::new(load_rows(p)?)?,
        _ => bail!("give exactly one of --labels and --kernel"),
    };
    let options = AuditOptions {
        panel: a.panel,
        draws: a.draws,
        ..AuditOptions::default()
    };
    let r = coded_fidelity_audit_with(&e, &kernel, a.n, a.delta, seed, &options)?;
    let mut table = Table::new(&[
        "entry",
        "type",
        "typical_fraction",
        "mean_overlap",
        "fidelity_estimate",
        "fidelity_lower",
        "bound",
        "pass",
    ]);
    for (k, en) in r.entries.iter().enumerate() {
        table.push(vec![
            k.to_string(),
            en.counts.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" "),
            num(en.typical_fraction),
            num(en.mean_overlap),
            num(en.fidelity_estimate),
            num(en.fidelity_lower),
            num(r.bound),
            (en.fidelity_lower >= r.bound).to_string(),
        ]);
    }
    Ok(Outcome {
        table,
        grid: None,
        results: json!({
            "all_pass": r.all_pass(),
            "classical_leading": r.classical_leading,
            "classical_measured": r.classical_measured,
            "quantum_leading": r.quantum_leading,
            "quantum_budget": r.quantum_budget,
        }),
    })
}

fn oracle(a: &crate::OracleArgs) -> Result<Outcome> {
    let e = load_ensemble(&a.ensemble)?.ensemble;
    let rates: Vec<f64> = parse_list(&a.rates)?;
    let symbols = a.symbols.unwrap_or(e.len() + 1);
    let (label, values) = match a.quantity {
        Quantity::M => ("Q", brute_force_m_many(&e, &rates, symbols, a.steps)?),
        Quantity::N => (
            "N",
            rates
                .iter()
                .map(|&r| brute_force_n(&e, r, symbols, a.steps))
                .collect::<tradeoff_core::Result<_>>()?,
        ),
        Quantity::X => bail!("the oracle computes M or N"),
    };
    let mut table = Table::new(&["R", label]);
    for (r, v) in rates.iter().zip(&values) {
        table.push(vec![num(*r), num(*v)]);
    }
    Ok(Outcome {
        table,
        grid: None,
        results: json!({ "steps": a.steps, "symbols": symbols }),
    })
}
