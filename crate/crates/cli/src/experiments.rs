//! The six experiments. Each returns its CSV table and a JSON summary for
//! the manifest.

use std::f64::consts::PI;

use qnpu_core::ansatz::{Ansatz, AnsatzSpec};
use qnpu_core::burgers::{direct_euler_trajectory, evolve, full_template, BurgersState};
use qnpu_core::grid::{ground_state, EnergyBreakdown, PotentialSpec};
use qnpu_core::mps::{ipr, mps_to_circuit, mps_to_dense, random_mps, s_max};
use qnpu_core::optimizer::{
    brickwall_curve, brickwall_template, cost, fidelity_of, minimize_cost, scan_single_param, staircase_curve,
    CostMode, FitOptions, MinimizeOptions, Problem,
};
use qnpu_core::sampler::{compute_constants, detect_nmin, empirical_errors, predict_errors, stream};
use qnpu_core::statevector::StateVector;
use qnpu_core::{Error, Result};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{
    AnsatzConfig, BurgersEvolveConfig, FitFidelityConfig, MpsCompileConfig, SamplingAnalysisConfig, ScanCostConfig,
    SolveGpeConfig,
};
use crate::output::{Cell, Table};

fn energy_cells(e: &EnergyBreakdown) -> [Cell; 4] {
    [e.kinetic.into(), e.potential.into(), e.interaction.into(), e.total.into()]
}

fn scan_points(step: f64, end: f64) -> Result<usize> {
    if !(step > 0.0) || !(end > 0.0) {
        return Err(Error::InvalidArgument(format!("scan needs step > 0 and end > 0, got {step}, {end}")));
    }
    Ok((end / step - 1e-9).ceil() as usize)
}

pub fn scan_cost(cfg: &ScanCostConfig, seed: u64) -> Result<(Table, Value)> {
    let grid = cfg.grid.build()?;
    if grid.n != 2 {
        return Err(Error::InvalidArgument("the single-parameter circuit acts on n = 2".into()));
    }
    let (step, end) = (cfg.scan.step, cfg.scan.end);
    let count = scan_points(step, end)?;
    let mut table = Table::new(&["g", "lambda", "kinetic", "potential", "interaction", "total"]);
    let mut summary = Vec::new();
    for (gi, g) in cfg.g.values().into_iter().enumerate() {
        let problem = Problem::new(grid, &cfg.potential, g)?;
        let points: Vec<(f64, EnergyBreakdown)> = match cfg.shots {
            None => scan_single_param(&problem, step, end)?,
            Some(shots) => (0..count)
                .into_par_iter()
                .map(|k| {
                    let lambda = k as f64 * step;
                    let mode = CostMode::Sampled {
                        shots,
                        seed: stream(stream(seed, gi as u64), k as u64),
                    };
                    Ok((lambda, cost(&Ansatz::SingleParam, &[lambda], &problem, mode)?.energies))
                })
                .collect::<Result<_>>()?,
        };
        let best = points
            .iter()
            .min_by(|a, b| a.1.total.total_cmp(&b.1.total))
            .ok_or_else(|| Error::InvalidArgument("empty scan".into()))?;
        summary.push(json!({ "g": g, "lambda_min": best.0, "energies": best.1 }));
        for (lambda, e) in &points {
            let mut row = vec![g.into(), (*lambda).into()];
            row.extend(energy_cells(e));
            table.push(row);
        }
    }
    Ok((table, json!({ "minima": summary })))
}

fn build_ansatz(cfg: AnsatzConfig, n: usize) -> Result<Ansatz> {
    match cfg {
        AnsatzConfig::SingleParam => {
            if n != 2 {
                return Err(Error::InvalidArgument("the single-parameter circuit acts on n = 2".into()));
            }
            Ok(Ansatz::SingleParam)
        }
        AnsatzConfig::Brickwall { d } => Ok(Ansatz::Brickwall(AnsatzSpec::new(n, d)?)),
    }
}

/// Real amplitudes of `psi` with the sign that makes `<reference|psi>` non-negative.
fn aligned(psi: &StateVector, reference: &StateVector) -> Result<Vec<f64>> {
    let s = if reference.inner(psi)?.re < 0.0 { -1.0 } else { 1.0 };
    Ok(psi.real_parts().into_iter().map(|v| s * v).collect())
}

pub fn solve_gpe(cfg: &SolveGpeConfig, seed: u64) -> Result<(Table, Value)> {
    let grid = cfg.grid.build()?;
    let ansatz = cfg.ansatz.map(|a| build_ansatz(a, grid.n as usize)).transpose()?;
    let mut header = vec!["g", "k", "x", "psi_oracle"];
    if ansatz.is_some() {
        header.push("psi_ansatz");
    }
    let mut table = Table::new(&header);
    let mut summary = Vec::new();
    for (gi, g) in cfg.g.values().into_iter().enumerate() {
        let gs = ground_state(&grid, &cfg.potential, g)?;
        let oracle = gs.psi.real_parts();
        let mut entry = json!({ "g": g, "oracle": gs.energies, "iterations": gs.iterations });
        let mut fitted = None;
        if let Some(a) = &ansatz {
            let problem = Problem::new(grid, &cfg.potential, g)?;
            let opts = MinimizeOptions {
                budget: cfg.minimize.budget,
                scan_points: cfg.minimize.scan_points,
                restarts: cfg.minimize.restarts,
                seed: stream(seed, gi as u64),
                ..MinimizeOptions::default()
            };
            let r = minimize_cost(a, &problem, &vec![0.0; a.param_count()?], &opts)?;
            let psi = a.prepare(&r.params)?;
            entry["ansatz"] = json!({
                "energies": r.energies,
                "params": r.params,
                "evaluations": r.evaluations,
                "converged": r.converged,
                "fidelity": gs.psi.inner(&psi)?.norm(),
            });
            fitted = Some(aligned(&psi, &gs.psi)?);
        }
        for k in 0..grid.points() {
            let mut row = vec![g.into(), k.into(), grid.x(k).into(), oracle[k].into()];
            if let Some(f) = &fitted {
                row.push(f[k].into());
            }
            table.push(row);
        }
        summary.push(entry);
    }
    Ok((table, json!({ "solutions": summary })))
}

pub fn fit_fidelity(cfg: &FitFidelityConfig, _seed: u64) -> Result<(Table, Value)> {
    let grid = cfg.grid.build()?;
    let fit = &cfg.fit;
    let opts = FitOptions {
        sweeps: fit.sweeps,
        ..FitOptions::default()
    };
    let jobs: Vec<(f64, f64)> = cfg
        .g
        .values()
        .into_iter()
        .flat_map(|g| fit.kappa_indices.iter().map(move |&idx| (g, idx)))
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(g, idx)| {
            let s1 = fit.s1.unwrap_or(5e3 * (idx / 16.0).powi(2));
            let pot = PotentialSpec::bichromatic(s1, fit.ratio, 2.0 * PI * idx);
            let gs = ground_state(&grid, &pot, g)?;
            let bw = brickwall_curve(&gs.psi, &fit.depths, &opts)?;
            let sc = staircase_curve(&gs.psi, &fit.chis, &opts)?;
            Ok((gs, bw, sc))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(&["g", "kappa_index", "family", "size", "param_count", "eps_r"]);
    let mut summary = Vec::new();
    for (&(g, idx), (gs, bw, sc)) in jobs.iter().zip(&results) {
        for (family, curve) in [("brickwall", bw), ("staircase", sc)] {
            for p in curve {
                table.push(vec![
                    g.into(),
                    idx.into(),
                    family.into(),
                    p.depth.into(),
                    p.param_count.into(),
                    p.eps_r.into(),
                ]);
            }
        }
        let needed = bw.iter().find(|p| p.eps_r <= 0.05).map(|p| p.param_count);
        summary.push(json!({
            "g": g,
            "kappa_index": idx,
            "ipr": ipr(&gs.psi),
            "s_max": s_max(&gs.psi),
            "params_for_eps_0.05": needed,
        }));
    }
    Ok((table, json!({ "states": summary })))
}

pub fn mps_compile(cfg: &MpsCompileConfig, seed: u64) -> Result<(Table, Value)> {
    let s = &cfg.mps;
    let jobs: Vec<(usize, usize, usize)> = s
        .n
        .iter()
        .flat_map(|&n| s.chi.iter().flat_map(move |&chi| (0..s.samples).map(move |k| (n, chi, k))))
        .collect();
    let rows = jobs
        .par_iter()
        .enumerate()
        .map(|(idx, &(n, chi, k))| {
            let m = random_mps(n, chi, stream(seed, idx as u64))?;
            let compiled = mps_to_circuit(&m)?;
            let (target, _) = mps_to_dense(&m)?;
            let fidelity = fidelity_of(&target, &compiled.circuit)?;
            Ok(vec![
                n.into(),
                chi.into(),
                k.into(),
                (1.0 - fidelity).into(),
                compiled.unitaries.into(),
                compiled.block_qubits.into(),
                compiled.depth_two_qubit.map_or(Cell::Text(String::new()), Cell::from),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = rows
        .iter()
        .filter_map(|r| match r[3] {
            Cell::Float(v) => Some(v),
            _ => None,
        })
        .fold(0.0, f64::max);
    let mut table = Table::new(&[
        "n",
        "chi",
        "sample",
        "infidelity",
        "unitaries",
        "block_qubits",
        "two_qubit_gates",
    ]);
    rows.into_iter().for_each(|r| table.push(r));
    Ok((table, json!({ "max_infidelity": worst, "circuits": jobs.len() })))
}

pub fn sampling_analysis(cfg: &SamplingAnalysisConfig, seed: u64) -> Result<(Table, Value)> {
    let grid = cfg.grid.build()?;
    let s = cfg.sampling;
    let mut table = Table::new(&["g", "term", "value", "sigma", "predicted_std", "empirical_std", "constant"]);
    let mut summary = Vec::new();
    for (gi, g) in cfg.g.values().into_iter().enumerate() {
        let gs = ground_state(&grid, &cfg.potential, g)?;
        let e = gs.energies;
        let pred = predict_errors(&e, &grid, g, s.shots)?;
        let emp = empirical_errors(&e, &grid, g, s.shots, s.repeats, stream(seed, gi as u64))?;
        let constants = compute_constants(&gs.psi, &grid, &cfg.potential, g).ok();
        let c = |f: fn(&qnpu_core::sampler::SamplingConstants) -> f64| constants.as_ref().map_or(f64::NAN, f);
        let terms = [
            ("kinetic", e.kinetic, e.sigma_k, pred.kinetic.abs, emp[0], c(|c| c.c_k)),
            ("potential", e.potential, e.sigma_p, pred.potential.abs, emp[1], c(|c| c.c_p)),
            ("interaction", e.interaction, e.sigma_i, pred.interaction.abs, emp[2], c(|c| c.c_i)),
        ];
        for (name, value, sigma, p, m, cst) in terms {
            table.push(vec![
                g.into(),
                name.into(),
                value.into(),
                sigma.into(),
                p.into(),
                m.into(),
                cst.into(),
            ]);
        }
        let mut entry = json!({ "g": g, "energies": e, "prediction": pred, "constants": constants });
        if let Some([lo, hi]) = s.nmin_range {
            entry["n_min"] = json!(detect_nmin(&cfg.potential, g, lo, hi)?);
        }
        summary.push(entry);
    }
    Ok((table, json!({ "states": summary })))
}

pub fn burgers_evolve(cfg: &BurgersEvolveConfig, _seed: u64) -> Result<(Table, Value)> {
    let grid = cfg.grid.build()?;
    let b = &cfg.burgers;
    let n = grid.n as usize;
    let template = match cfg.ansatz {
        None => full_template(n)?,
        Some(AnsatzConfig::Brickwall { d }) => brickwall_template(&AnsatzSpec::new(n, d)?)?,
        Some(AnsatzConfig::SingleParam) => {
            return Err(Error::InvalidArgument("Burgers evolution needs a brick-wall or the default template".into()))
        }
    };
    let opts = FitOptions {
        sweeps: b.sweeps,
        tol: 1e-15,
        random_init: None,
    };
    let f0 = b.initial.values(&grid)?;
    let init = BurgersState::from_function(&f0, grid, b.nu, &template, &opts)?;
    let traj = evolve(&init, b.tau, b.steps, &opts)?;
    let oracle = direct_euler_trajectory(&f0, &grid, b.nu, b.tau, b.steps)?;
    let mut header = vec!["t".to_string(), "lambda0".to_string()];
    header.extend((0..grid.points()).map(|k| format!("f_{k}")));
    let mut table = Table::new(&header);
    let mut max_err: f64 = 0.0;
    for (s, o) in traj.iter().zip(&oracle) {
        let values = s.values();
        let err = values.iter().zip(o).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        max_err = max_err.max(err);
        let mut row = vec![s.t.into(), s.lambda0.into()];
        row.extend(values.iter().map(|v| Cell::from(v.re)));
        table.push(row);
    }
    let last = traj.last().expect("non-empty");
    Ok((
        table,
        json!({
            "max_oracle_deviation": max_err,
            "final_lambda0": last.lambda0,
            "final_t": last.t,
        }),
    ))
}
