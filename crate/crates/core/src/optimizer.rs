//! Cost function assembly, derivative-free parameter minimization and
//! fidelity maximization by sweeping SVD updates of individual gates.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ansatz::{gate_slots, param_count, Ansatz, AnsatzSpec};
use crate::error::{Error, Result};
use crate::grid::{eval_potential, EnergyBreakdown, GridSpec, PotentialSpec, PotentialValues};
use crate::linalg::polar_maximizer;
use crate::mps::{dense_to_mps, mps_to_circuit};
use crate::qnpu::shift_overlap;
use crate::sampler::sampled_energies;
use crate::statevector::{environment, Circuit, Gate, StateVector, C64};

/// Grid, sampled potential and interaction strength of one ground-state problem.
#[derive(Clone, Debug)]
pub struct Problem {
    pub grid: GridSpec,
    pub pot: PotentialValues,
    pub g: f64,
}

impl Problem {
    pub fn new(grid: GridSpec, pot: &PotentialSpec, g: f64) -> Result<Self> {
        Ok(Self {
            grid,
            pot: eval_potential(pot, &grid)?,
            g,
        })
    }

    /// Energies of a normalized register state from the three ancilla
    /// expectations evaluated directly.
    pub fn energies(&self, psi: &StateVector) -> Result<EnergyBreakdown> {
        if psi.len() != self.grid.points() {
            return Err(Error::DimensionMismatch {
                expected: self.grid.points(),
                actual: psi.len(),
            });
        }
        let sigma_k = shift_overlap(psi);
        let probs = psi.probabilities();
        let sigma_p: f64 = probs.iter().zip(&self.pot.tilde).map(|(p, v)| p * v).sum();
        let sigma_i: f64 = probs.iter().map(|p| p * p).sum();
        Ok(EnergyBreakdown::from_sigmas(
            sigma_k,
            sigma_p,
            sigma_i,
            self.pot.alpha,
            &self.grid,
            self.g,
        ))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CostMode {
    Exact,
    Sampled { shots: usize, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CostReport {
    pub energies: EnergyBreakdown,
    pub params: Vec<f64>,
    pub evaluations: usize,
    pub converged: bool,
}

impl CostReport {
    pub fn total(&self) -> f64 {
        self.energies.total
    }
}

pub fn cost(ansatz: &Ansatz, params: &[f64], problem: &Problem, mode: CostMode) -> Result<CostReport> {
    let psi = ansatz.prepare(params)?;
    let exact = problem.energies(&psi)?;
    let energies = match mode {
        CostMode::Exact => exact,
        CostMode::Sampled { shots, seed } => sampled_energies(&exact, &problem.grid, problem.g, shots, seed)?,
    };
    Ok(CostReport {
        energies,
        params: params.to_vec(),
        evaluations: 1,
        converged: true,
    })
}

/// Costs of the single-parameter circuit on `lambda = k * step`, `k` from 0
/// while below `end`.
pub fn scan_single_param(problem: &Problem, step: f64, end: f64) -> Result<Vec<(f64, EnergyBreakdown)>> {
    let count = (end / step - 1e-9).ceil() as usize;
    (0..count)
        .map(|k| {
            let lambda = k as f64 * step;
            let r = cost(&Ansatz::SingleParam, &[lambda], problem, CostMode::Exact)?;
            Ok((lambda, r.energies))
        })
        .collect()
}

#[derive(Clone, Copy, Debug)]
pub struct MinimizeOptions {
    /// Maximum number of cost evaluations.
    pub budget: usize,
    /// Grid points of the coarse scan per coordinate over one period.
    pub scan_points: usize,
    /// Stop when a full sweep improves the cost by less than this (relative).
    pub tol: f64,
    /// Extra runs from random starting points; the best run is returned.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            budget: 200_000,
            scan_points: 16,
            tol: 1e-14,
            restarts: 0,
            seed: 0,
        }
    }
}

struct Counter<'a> {
    ansatz: &'a Ansatz,
    problem: &'a Problem,
    evaluations: usize,
}

impl Counter<'_> {
    fn eval(&mut self, params: &[f64]) -> Result<f64> {
        self.evaluations += 1;
        let psi = self.ansatz.prepare(params)?;
        Ok(self.problem.energies(&psi)?.total)
    }
}

/// Cyclic coordinate descent with exact cost evaluations. Each coordinate is
/// scanned over one period and the best scan point refined by golden-section
/// search; a move is accepted only if it lowers the cost.
pub fn minimize_cost(ansatz: &Ansatz, problem: &Problem, init: &[f64], opts: &MinimizeOptions) -> Result<CostReport> {
    if opts.budget < 1 {
        return Err(Error::InvalidArgument("budget must be >= 1".into()));
    }
    let expected = ansatz.param_count()?;
    if init.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            actual: init.len(),
        });
    }
    let mut best = descend(ansatz, problem, init.to_vec(), opts, opts.budget)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut used = best.evaluations;
    for _ in 0..opts.restarts {
        if used >= opts.budget {
            break;
        }
        let start: Vec<f64> = (0..expected).map(|_| rng.random_range(-PI..PI)).collect();
        let run = descend(ansatz, problem, start, opts, opts.budget - used)?;
        used += run.evaluations;
        if run.total() < best.total() {
            best = run;
        }
    }
    best.evaluations = used;
    Ok(best)
}

fn descend(ansatz: &Ansatz, problem: &Problem, mut x: Vec<f64>, opts: &MinimizeOptions, budget: usize) -> Result<CostReport> {
    let mut c = Counter {
        ansatz,
        problem,
        evaluations: 0,
    };
    let mut fx = c.eval(&x)?;
    let period = match ansatz {
        Ansatz::SingleParam => 4.0 * PI,
        Ansatz::Brickwall(_) => 2.0 * PI,
    };
    let mut converged = false;
    let mut exhausted = false;
    while !exhausted {
        let start = fx;
        for i in 0..x.len() {
            if c.evaluations + opts.scan_points + 80 > budget {
                exhausted = true;
                break;
            }
            let x0 = x[i];
            let step = period / opts.scan_points as f64;
            let mut best_t = x0;
            let mut best_f = fx;
            let mut probe = x.clone();
            for m in 1..opts.scan_points {
                probe[i] = x0 + step * m as f64;
                let f = c.eval(&probe)?;
                if f < best_f {
                    best_f = f;
                    best_t = probe[i];
                }
            }
            let (t, f) = golden_section(&mut c, &mut probe, i, best_t - step, best_t + step, 1e-11)?;
            if f < best_f {
                best_f = f;
                best_t = t;
            }
            if best_f < fx {
                x[i] = best_t;
                fx = best_f;
            }
        }
        if !exhausted && (start - fx) <= opts.tol * fx.abs().max(1.0) {
            converged = true;
            break;
        }
    }
    let psi = ansatz.prepare(&x)?;
    Ok(CostReport {
        energies: problem.energies(&psi)?,
        params: x,
        evaluations: c.evaluations,
        converged,
    })
}

fn golden_section(c: &mut Counter, x: &mut [f64], i: usize, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)> {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut p = b - r * (b - a);
    let mut q = a + r * (b - a);
    x[i] = p;
    let mut fp = c.eval(x)?;
    x[i] = q;
    let mut fq = c.eval(x)?;
    while b - a > tol {
        if fp < fq {
            b = q;
            q = p;
            fq = fp;
            p = b - r * (b - a);
            x[i] = p;
            fp = c.eval(x)?;
        } else {
            a = p;
            p = q;
            fp = fq;
            q = a + r * (b - a);
            x[i] = q;
            fq = c.eval(x)?;
        }
    }
    Ok(if fp < fq { (p, fp) } else { (q, fq) })
}

/// Result of a fidelity fit.
#[derive(Clone, Debug)]
pub struct FitResult {
    pub circuit: Circuit,
    pub fidelity: f64,
    pub eps_r: f64,
    pub sweeps: usize,
    /// Fidelity after every single-gate update.
    pub history: Vec<f64>,
}

#[derive(Clone, Copy, Debug)]
pub struct FitOptions {
    /// Maximum number of sweeps; one sweep visits every gate left to right
    /// and back.
    pub sweeps: usize,
    /// Stop once a sweep gains less than this in fidelity.
    pub tol: f64,
    /// Replace the template's gates by random real orthogonal ones first.
    pub random_init: Option<u64>,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            sweeps: 200,
            tol: 1e-14,
            random_init: None,
        }
    }
}

/// Brick-wall template with identity gates.
pub fn brickwall_template(spec: &AnsatzSpec) -> Result<Circuit> {
    let mut c = Circuit::new(spec.n, 0);
    for slot in gate_slots(spec) {
        c.push(Gate::real(&DMatrix::identity(4, 4), vec![slot.q, slot.q + 1])?)?;
    }
    Ok(c)
}

/// Staircase template of an MPS with bond dimension `chi`: `n - s` identity
/// blocks on `s + 1` qubits, the last block first.
pub fn staircase_template(n: usize, chi: usize) -> Result<Circuit> {
    let s = if chi <= 1 { 0 } else { (usize::BITS - (chi - 1).leading_zeros()) as usize };
    if s + 1 > n {
        return Err(Error::InvalidArgument(format!("chi = {chi} too large for {n} qubits")));
    }
    let dim = 1usize << (s + 1);
    let mut c = Circuit::new(n, 0);
    for site in (s + 1..=n).rev() {
        c.push(Gate::real(&DMatrix::identity(dim, dim), (site - s - 1..site).collect())?)?;
    }
    Ok(c)
}

/// Brick wall of depth `spec.d >= n - 1` whose gates hold the staircase
/// circuit of the best bond-dimension-2 MPS approximation of `target`; the
/// other gates are identities. The staircase is built on the reversed qubit
/// order so that its gate on qubits `(p, p + 1)` lands in column `p`.
pub fn brickwall_from_mps(target: &StateVector, spec: &AnsatzSpec) -> Result<Circuit> {
    let n = spec.n;
    if target.n_qubits() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: target.n_qubits(),
        });
    }
    if spec.d + 1 < n {
        return Err(Error::InvalidArgument(format!("staircase needs depth >= {}", n - 1)));
    }
    let dim = target.len();
    let rev: Vec<C64> = (0..dim)
        .map(|k| target.amplitudes()[k.reverse_bits() >> (usize::BITS as usize - n)])
        .collect();
    let compiled = mps_to_circuit(&dense_to_mps(&StateVector::from_amplitudes(rev)?, 2)?)?;
    let slots = gate_slots(spec);
    let swap = Gate::swap(0, 1).matrix().clone();
    let mut c = brickwall_template(spec)?;
    for g in &compiled.circuit.gates {
        let p = n - 2 - g.targets()[0];
        let idx = slots
            .iter()
            .position(|s| s.column == p && s.q == p)
            .expect("column p holds a gate on (p, p + 1)");
        c.gates[idx].set_matrix(&swap * g.matrix() * &swap);
    }
    Ok(c)
}

fn random_orthogonal(dim: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let m = DMatrix::from_fn(dim, dim, |_, _| rng.random_range(-1.0..1.0));
    let qr = m.qr();
    let mut q = qr.q();
    let r = qr.r();
    for i in 0..dim {
        if r[(i, i)] < 0.0 {
            q.column_mut(i).neg_mut();
        }
    }
    q
}

/// Maximizes `|<target|circuit|0>|` over the gate matrices of `template`.
/// Each update replaces one gate by `V W^dag` from the SVD `R = W S V^dag` of
/// its environment, which is the exact maximizer with all other gates fixed.
pub fn maximize_fidelity(target: &StateVector, template: &Circuit, opts: &FitOptions) -> Result<FitResult> {
    let n = template.n_qubits();
    if target.n_qubits() != n || template.n_ancilla != 0 {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: target.n_qubits(),
        });
    }
    if (target.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::Precondition("target must be normalized".into()));
    }
    let mut circuit = template.clone();
    if let Some(seed) = opts.random_init {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for g in &mut circuit.gates {
            let dim = g.matrix().nrows();
            g.set_matrix(random_orthogonal(dim, &mut rng).map(|v| C64::new(v, 0.0)));
        }
    }
    let m = circuit.gates.len();
    let mut history = Vec::new();
    let mut fidelity = fidelity_of(target, &circuit)?;
    let mut sweeps = 0;
    if m == 0 {
        return Ok(FitResult {
            circuit,
            fidelity,
            eps_r: 1.0 - fidelity,
            sweeps,
            history,
        });
    }
    while sweeps < opts.sweeps {
        let before = fidelity;
        // backward states chi_j = U_{j+1}^dag ... U_m^dag |target>
        let mut back = vec![target.clone(); m];
        for j in (0..m - 1).rev() {
            let mut s = back[j + 1].clone();
            s.apply_gate(&circuit.gates[j + 1].adjoint())?;
            back[j] = s;
        }
        // left to right, storing the forward states for the return pass
        let mut fwd = Vec::with_capacity(m);
        let mut phi = StateVector::zero(n);
        for j in 0..m {
            fidelity = update_gate(&mut circuit.gates[j], &phi, &back[j]);
            history.push(fidelity);
            fwd.push(phi.clone());
            phi.apply_gate(&circuit.gates[j])?;
        }
        // right to left
        let mut chi = target.clone();
        for j in (0..m).rev() {
            fidelity = update_gate(&mut circuit.gates[j], &fwd[j], &chi);
            history.push(fidelity);
            chi.apply_gate(&circuit.gates[j].adjoint())?;
        }
        sweeps += 1;
        if fidelity - before < opts.tol {
            break;
        }
    }
    let fidelity = fidelity_of(target, &circuit)?;
    Ok(FitResult {
        circuit,
        fidelity,
        eps_r: 1.0 - fidelity,
        sweeps,
        history,
    })
}

fn update_gate(gate: &mut Gate, phi: &StateVector, chi: &StateVector) -> f64 {
    let r = environment(phi, chi, gate.targets());
    let (u, best) = polar_maximizer(&r);
    gate.set_matrix(u);
    best
}

pub fn fidelity_of(target: &StateVector, circuit: &Circuit) -> Result<f64> {
    Ok(target.inner(&circuit.prepare())?.norm())
}

/// One point of a representation-error curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub depth: usize,
    pub param_count: usize,
    pub eps_r: f64,
}

/// Brick-wall fits of increasing depth. Each depth starts from the previous
/// optimum with one identity column appended, so the error cannot grow.
pub fn brickwall_curve(target: &StateVector, depths: &[usize], opts: &FitOptions) -> Result<Vec<CurvePoint>> {
    let n = target.n_qubits();
    let mut out = Vec::with_capacity(depths.len());
    let mut warm: Option<Circuit> = None;
    let mut warm_depth = 0;
    for (idx, &d) in depths.iter().enumerate() {
        if idx > 0 && d <= depths[idx - 1] {
            return Err(Error::InvalidArgument("depths must increase".into()));
        }
        let spec = AnsatzSpec::new(n, d)?;
        let mut template = brickwall_template(&spec)?;
        let mut fit_opts = *opts;
        if let Some(prev) = &warm {
            // gates of the first warm_depth columns come first in slot order
            let kept = prev.gates.len();
            debug_assert_eq!(gate_slots(&AnsatzSpec::new(n, warm_depth)?).len(), kept);
            template.gates[..kept].clone_from_slice(&prev.gates);
            fit_opts.random_init = None;
        }
        let fit = maximize_fidelity(target, &template, &fit_opts)?;
        out.push(CurvePoint {
            depth: d,
            param_count: param_count(&spec)?,
            eps_r: fit.eps_r,
        });
        warm = Some(fit.circuit);
        warm_depth = d;
    }
    Ok(out)
}

/// Staircase (MPS-structured) fits for each bond dimension.
pub fn staircase_curve(target: &StateVector, chis: &[usize], opts: &FitOptions) -> Result<Vec<CurvePoint>> {
    let n = target.n_qubits();
    chis.iter()
        .map(|&chi| {
            let fit = maximize_fidelity(target, &staircase_template(n, chi)?, opts)?;
            Ok(CurvePoint {
                depth: chi,
                param_count: crate::mps::mps_param_count_for(n, chi),
                eps_r: fit.eps_r,
            })
        })
        .collect()
}
