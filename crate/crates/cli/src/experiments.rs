//! One function per experiment kind. Each writes its CSVs and a
//! `summary.json` into the run directory.

use std::path::Path;

use serde::Serialize;
use serde_json::json;

use ucp_lab::anderson::{eigenvalue_lift, ssf_dense, uncertainty_check, wegner_mc, DeloneAndersonModel, LiftReport};
use ucp_lab::constants::{constants_report, CarlemanConfig, ConstantsInput, ConstantsReport};
use ucp_lab::geometry::{generate_delone, BoundaryCondition, BoxSpec, DeloneCheck, DeloneParams};
use ucp_lab::operator::{build_hamiltonian, rho_switch, DiscreteHamiltonian, Grid, GridFunction, Region};
use ucp_lab::rng;
use ucp_lab::ucp::{verify_ucp, UcpReport};

use crate::config::{ExperimentConfig, ExperimentKind, LiftParams, Params, SsfParams, SsfSource};
use crate::output::RunDir;
use crate::Failure;

/// Largest matrix dimension accepted by the dense SSF experiment.
const SSF_MAX_DIM: usize = 3000;

fn kind_name(kind: ExperimentKind) -> String {
    serde_json::to_value(kind)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

/// Executes a parsed config. The resolved config and the provenance log are
/// written even when the computation fails.
pub fn run(cfg: &ExperimentConfig, args: &[String]) -> Result<(), Failure> {
    let mut dir = RunDir::create(&cfg.output.dir)?;
    dir.json("resolved_config.json", cfg)?;
    let outcome = execute(cfg, &mut dir);
    dir.finish(args, &kind_name(cfg.experiment), outcome.as_ref().err())?;
    outcome
}

fn execute(cfg: &ExperimentConfig, dir: &mut RunDir) -> Result<(), Failure> {
    match (&cfg.params, cfg.experiment) {
        (Params::Ucp(spec), _) => {
            let summary = verify_ucp(spec).map_err(|e| Failure::from_core("ucp", e))?;
            dir.csv("ucp.csv", UcpReport::CSV_HEADER, summary.reports.iter().map(UcpReport::csv_row))?;
            dir.json("summary.json", &summary)
        }
        (Params::Wegner(p), _) => {
            let table = wegner_mc(&p.model, &p.wegner).map_err(|e| Failure::from_core("wegner", e))?;
            dir.csv("wegner.csv", ucp_lab::anderson::WegnerTable::CSV_HEADER, table.csv_rows())?;
            dir.json("summary.json", &table)
        }
        (Params::Lift(p), ExperimentKind::Uncertainty) => uncertainty(p, dir),
        (Params::Lift(p), _) => {
            let (_, report) = lift(p)?;
            dir.csv("lift.csv", LiftReport::CSV_HEADER, report.csv_rows())?;
            dir.json("summary.json", &report)
        }
        (Params::Ssf(p), _) => ssf(p, cfg.seed, dir),
        (Params::Constants(p), _) => {
            let report = constants(&p.input, &p.config)?;
            dir.csv("constants.csv", ConstantsReport::CSV_HEADER, [report.csv_row()])?;
            dir.json("summary.json", &report)
        }
        (Params::GenDelone(p), _) => {
            let window = BoxSpec::centered(p.delone.d, p.side, p.bc).map_err(|e| Failure::from_core("gen-delone", e))?;
            let arr = generate_delone(&p.delone, &window, cfg.seed).map_err(|e| Failure::from_core("gen-delone", e))?;
            let check = arr.validate(&window);
            dir.json("delone.json", &arr)?;
            dir.json("summary.json", &delone_summary(arr.gamma1.len(), arr.gamma2.len(), &check))
        }
    }
}

fn delone_summary(n1: usize, n2: usize, check: &DeloneCheck) -> serde_json::Value {
    let witness = match check {
        DeloneCheck::Ok => serde_json::Value::Null,
        DeloneCheck::Violation(w) => serde_json::to_value(w).unwrap_or_default(),
    };
    json!({ "gamma1": n1, "gamma2": n2, "delone_ok": check.is_ok(), "violation": witness })
}

fn constants(input: &ConstantsInput, config: &CarlemanConfig) -> Result<ConstantsReport, Failure> {
    constants_report(input, config).map_err(|e| Failure::from_core("constants", e))
}

/// The `constants` subcommand: same artifacts as a `constants` run.
pub fn constants_to_dir(input: &ConstantsInput, config: &CarlemanConfig, out: &Path, args: &[String]) -> Result<(), Failure> {
    let mut dir = RunDir::create(out)?;
    dir.json("resolved_config.json", &json!({ "experiment": "constants", "params": { "input": input, "config": config } }))?;
    let outcome = constants(input, config).and_then(|report| {
        dir.csv("constants.csv", ConstantsReport::CSV_HEADER, [report.csv_row()])?;
        dir.json("summary.json", &report)
    });
    dir.finish(args, "constants", outcome.as_ref().err())?;
    outcome
}

pub fn gen_delone(params: &DeloneParams, side: f64, bc: BoundaryCondition, seed: u64) -> Result<String, Failure> {
    let window = BoxSpec::centered(params.d, side, bc).map_err(|e| Failure::from_core("gen-delone", e))?;
    let arr = generate_delone(params, &window, seed).map_err(|e| Failure::from_core("gen-delone", e))?;
    arr.to_json().map_err(|e| Failure::from_core("gen-delone", e))
}

struct LiftSetup {
    h0: DiscreteHamiltonian,
    w: GridFunction,
    model: DeloneAndersonModel,
}

fn lift_setup(p: &LiftParams) -> Result<LiftSetup, Failure> {
    let core = |e| Failure::from_core("lift setup", e);
    let bx = BoxSpec::centered(p.d, p.l as f64, p.bc).map_err(core)?;
    let grid = Grid::new(bx.clone(), p.nodes_per_unit * p.l).map_err(core)?;
    let model = p.model.build(&bx).map_err(core)?;
    let w = model.single_site_sum(&grid).map_err(core)?;
    let h0 = build_hamiltonian(&grid, &model.v0.sample(&grid)).map_err(core)?;
    Ok(LiftSetup { h0, w, model })
}

fn lift(p: &LiftParams) -> Result<(LiftSetup, LiftReport), Failure> {
    let s = lift_setup(p)?;
    let report = eigenvalue_lift(&s.h0, &s.w, &p.t_grid, s.model.c_minus, &s.model.arrangement, p.tol, &p.eig)
        .map_err(|e| Failure::from_core("lift", e))?;
    Ok((s, report))
}

fn uncertainty(p: &LiftParams, dir: &mut RunDir) -> Result<(), Failure> {
    let (s, lift_report) = lift(p)?;
    dir.csv("lift.csv", LiftReport::CSV_HEADER, lift_report.csv_rows())?;
    let kappa = lift_report.kappa_emp;
    let f = |v: f64| format!("{v:.16e}");
    match uncertainty_check(&s.h0, &s.w, p.q, kappa, p.tol, &p.eig) {
        Ok(u) => {
            let row = [f(p.q), f(kappa), f(u.top), u.dim_p.to_string(), f(u.min_compression), f(u.bound), u.ok.to_string()];
            dir.csv("uncertainty.csv", UNCERTAINTY_HEADER, [row.join(",")])?;
            dir.json("summary.json", &json!({ "lift": lift_report, "uncertainty": u, "empty_projector": false }))
        }
        // Vacuous: no spectrum below the window top.
        Err(ucp_lab::Error::EmptyProjector) => {
            dir.csv("uncertainty.csv", UNCERTAINTY_HEADER, std::iter::empty())?;
            dir.json("summary.json", &json!({ "lift": lift_report, "uncertainty": null, "empty_projector": true }))
        }
        Err(e) => Err(Failure::from_core("uncertainty", e)),
    }
}

const UNCERTAINTY_HEADER: &str = "q,kappa_emp,top,dim_p,min_compression,bound,ok";

#[derive(Serialize)]
struct SsfPairSummary {
    pair: usize,
    n: usize,
    rank: usize,
    xi_min: i64,
    xi_max: i64,
    max_residual: f64,
}

/// Random symmetric `H₁` with entries in `[−½, ½)` and `u = Σ g gᵀ` over
/// `rank` random vectors, all drawn from counter streams keyed by the pair.
fn random_pair(seed: u64, pair: u64, n: usize, rank: usize) -> (Vec<f64>, Vec<f64>) {
    let mut h1 = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = rng::uniform(seed, pair, (i * n + j) as u64) - 0.5;
            h1[i * n + j] = v;
            h1[j * n + i] = v;
        }
    }
    let mut u = vec![0.0; n * n];
    for r in 0..rank {
        let g: Vec<f64> = (0..n)
            .map(|i| rng::uniform(seed, pair, (n * n + r * n + i) as u64) - 0.5)
            .collect();
        for i in 0..n {
            for j in 0..n {
                u[i * n + j] += g[i] * g[j];
            }
        }
    }
    (h1, u)
}

fn grid_pair(src: &SsfSource) -> Result<(usize, Vec<f64>, Vec<f64>), Failure> {
    let SsfSource::Grid { d, l, bc, nodes_per_unit, v0, center, radius, c } = src else {
        unreachable!("called with a grid source")
    };
    let core = |e| Failure::from_core("ssf setup", e);
    if center.len() != *d {
        return Err(Failure::Config(format!("params.source.center has {} coordinates, expected {d}", center.len())));
    }
    let bx = BoxSpec::centered(*d, *l as f64, *bc).map_err(core)?;
    let grid = Grid::new(bx, nodes_per_unit * l).map_err(core)?;
    let n = grid.len();
    if n > SSF_MAX_DIM {
        return Err(Failure::Config(format!("ssf grid has {n} unknowns, dense limit is {SSF_MAX_DIM}")));
    }
    let h = build_hamiltonian(&grid, &v0.sample(&grid)).map_err(core)?;
    let ball = Region::Ball { center: center.clone(), radius: *radius };
    let mut u = vec![0.0; n * n];
    for i in 0..n {
        if ball.contains(&grid.coords(i), grid.h) {
            u[i * n + i] = *c;
        }
    }
    Ok((n, h.matrix.to_dense(), u))
}

fn ssf(p: &SsfParams, seed: u64, dir: &mut RunDir) -> Result<(), Failure> {
    let rho = rho_switch(p.epsilon).map_err(|e| Failure::from_core("ssf", e))?;
    let pairs: Vec<(usize, usize, Vec<f64>, Vec<f64>)> = match &p.source {
        SsfSource::RandomDense { n, rank, n_pairs } => {
            if *n == 0 || *n > SSF_MAX_DIM || *rank > *n {
                return Err(Failure::Config(format!("params.source: need 0 < n ≤ {SSF_MAX_DIM} and rank ≤ n")));
            }
            (0..*n_pairs)
                .map(|k| {
                    let (h1, u) = random_pair(seed, k as u64, *n, *rank);
                    (*n, *rank, h1, u)
                })
                .collect()
        }
        SsfSource::Grid { .. } => {
            let (n, h1, u) = grid_pair(&p.source)?;
            let rank = (0..n).filter(|&i| u[i * n + i] != 0.0).count();
            vec![(n, rank, h1, u)]
        }
    };
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for (k, (n, rank, h1, u)) in pairs.iter().enumerate() {
        let res = ssf_dense(*n, h1, u, &rho, &p.centers).map_err(|e| Failure::from_core(&format!("ssf pair {k}"), e))?;
        rows.extend(res.record.csv_rows().into_iter().map(|r| format!("{k},{r}")));
        summaries.push(SsfPairSummary {
            pair: k,
            n: *n,
            rank: *rank,
            xi_min: res.record.xi.iter().copied().min().unwrap_or(0),
            xi_max: res.record.xi.iter().copied().max().unwrap_or(0),
            max_residual: res.max_residual,
        });
    }
    dir.csv("ssf.csv", "pair,lambda,xi", rows)?;
    let worst = summaries.iter().map(|s| s.max_residual).fold(0.0, f64::max);
    dir.json("summary.json", &json!({ "epsilon": p.epsilon, "centers": p.centers, "max_residual": worst, "pairs": summaries }))
}
