//! Explicit Euler time stepping of the periodic Burgers equation
//! `df/dt = nu f'' - f f'`, both on dense vectors and variationally with
//! `f = lambda0 |psi>`.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::optimizer::{maximize_fidelity, staircase_template, FitOptions};
use crate::qnpu::{BurgersOverlap, EvalPath};
use crate::statevector::{Circuit, StateVector};

/// Periodic central difference `(f_{k+1} - f_{k-1}) / 2h`.
pub fn central_difference<T>(f: &[T], h: f64) -> Vec<T>
where
    T: Copy + std::ops::Sub<Output = T> + std::ops::Div<f64, Output = T>,
{
    let n = f.len();
    (0..n).map(|k| (f[(k + 1) % n] - f[(k + n - 1) % n]) / (2.0 * h)).collect()
}

fn laplacian<T>(f: &[T], h: f64) -> Vec<T>
where
    T: Copy
        + std::ops::Add<Output = T>
        + std::ops::Sub<Output = T>
        + std::ops::Mul<f64, Output = T>
        + std::ops::Div<f64, Output = T>,
{
    let n = f.len();
    (0..n)
        .map(|k| (f[(k + 1) % n] + f[(k + n - 1) % n] - f[k] * 2.0) / (h * h))
        .collect()
}

fn check_len(len: usize, grid: &GridSpec) -> Result<()> {
    if len != grid.points() {
        return Err(Error::DimensionMismatch {
            expected: grid.points(),
            actual: len,
        });
    }
    Ok(())
}

/// `nu Lap f - f * grad f`.
pub fn burgers_rhs(f: &[f64], grid: &GridSpec, nu: f64) -> Result<Vec<f64>> {
    check_len(f.len(), grid)?;
    let h = grid.spacing();
    let lap = laplacian(f, h);
    let grad = central_difference(f, h);
    Ok((0..f.len()).map(|k| nu * lap[k] - f[k] * grad[k]).collect())
}

/// One Euler step `(1 + tau O) f`, also for complex amplitudes.
fn euler_update(f: &[C64], h: f64, nu: f64, tau: f64) -> Vec<C64> {
    let lap = laplacian(f, h);
    let grad = central_difference(f, h);
    (0..f.len())
        .map(|k| f[k] + (lap[k] * nu - f[k] * grad[k]) * tau)
        .collect()
}

/// Largest stable step `h^2 / (2 nu)`; infinite without viscosity.
pub fn stable_step(grid: &GridSpec, nu: f64) -> f64 {
    if nu > 0.0 {
        grid.spacing().powi(2) / (2.0 * nu)
    } else {
        f64::INFINITY
    }
}

fn check_step(grid: &GridSpec, nu: f64, tau: f64) -> Result<()> {
    if !(tau > 0.0) || nu < 0.0 {
        return Err(Error::InvalidArgument(format!("need tau > 0 and nu >= 0, got {tau}, {nu}")));
    }
    if tau > stable_step(grid, nu) {
        return Err(Error::Precondition(format!(
            "tau = {tau} exceeds the stability bound {}",
            stable_step(grid, nu)
        )));
    }
    Ok(())
}

/// Dense Euler trajectory, initial data included: `steps + 1` entries.
pub fn direct_euler_trajectory(f: &[f64], grid: &GridSpec, nu: f64, tau: f64, steps: usize) -> Result<Vec<Vec<f64>>> {
    check_len(f.len(), grid)?;
    if steps > 0 {
        check_step(grid, nu, tau)?;
    }
    let mut out = vec![f.to_vec()];
    let mut cur = f.to_vec();
    for _ in 0..steps {
        let rhs = burgers_rhs(&cur, grid, nu)?;
        for (c, r) in cur.iter_mut().zip(rhs) {
            *c += tau * r;
        }
        out.push(cur.clone());
    }
    Ok(out)
}

pub fn direct_euler(f: &[f64], grid: &GridSpec, nu: f64, tau: f64, steps: usize) -> Result<Vec<f64>> {
    Ok(direct_euler_trajectory(f, grid, nu, tau, steps)?.pop().expect("non-empty"))
}

/// Template able to represent any state of `n` qubits: the MPS staircase
/// with bond dimension `2^(n/2)`.
pub fn full_template(n: usize) -> Result<Circuit> {
    staircase_template(n, 1 << (n / 2))
}

/// `f = lambda0 * circuit|0>` at time `t`.
#[derive(Clone, Debug)]
pub struct BurgersState {
    pub lambda0: f64,
    pub circuit: Circuit,
    pub grid: GridSpec,
    pub nu: f64,
    pub t: f64,
}

impl BurgersState {
    /// Fits `template` to `f / |f|`. A zero `f` keeps the template and sets
    /// `lambda0 = 0`.
    pub fn from_function(f: &[f64], grid: GridSpec, nu: f64, template: &Circuit, opts: &FitOptions) -> Result<Self> {
        check_len(f.len(), &grid)?;
        let target: Vec<C64> = f.iter().map(|&v| C64::new(v, 0.0)).collect();
        let (lambda0, circuit) = fit_scaled(&target, template, opts)?;
        Ok(Self {
            lambda0,
            circuit,
            grid,
            nu,
            t: 0.0,
        })
    }

    pub fn psi(&self) -> StateVector {
        self.circuit.prepare()
    }

    pub fn values(&self) -> Vec<C64> {
        self.psi().amplitudes().iter().map(|a| a * self.lambda0).collect()
    }

    pub fn real_values(&self) -> Vec<f64> {
        self.values().iter().map(|a| a.re).collect()
    }

    /// `<f|f>`.
    pub fn norm_sqr(&self) -> f64 {
        self.values().iter().map(|a| a.norm_sqr()).sum()
    }
}

/// Best `(lambda0, circuit)` for `lambda0 circuit|0> ~ target`. The SVD
/// updates leave `<target|psi>` real and positive, so `lambda0 = Re<psi|target>`.
fn fit_scaled(target: &[C64], warm: &Circuit, opts: &FitOptions) -> Result<(f64, Circuit)> {
    let norm = target.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Ok((0.0, warm.clone()));
    }
    let unit = StateVector::from_amplitudes(target.iter().map(|a| a / norm).collect())?;
    let fit = maximize_fidelity(&unit, warm, opts)?;
    let psi = fit.circuit.prepare();
    let lambda0 = psi
        .amplitudes()
        .iter()
        .zip(target)
        .map(|(p, t)| p.conj() * t)
        .sum::<C64>()
        .re;
    Ok((lambda0, fit.circuit))
}

/// Real parts of the five overlaps `<psi~|X|psi>` in `BurgersOverlap::ALL`
/// order.
pub fn overlap_terms(prev: &Circuit, trial: &Circuit, path: EvalPath) -> Result<[f64; 5]> {
    let mut out = [0.0; 5];
    let (p, q) = (prev.prepare(), trial.prepare());
    for (slot, ov) in out.iter_mut().zip(BurgersOverlap::ALL) {
        *slot = match path {
            EvalPath::Algebraic => ov.algebraic(&p, &q).re,
            EvalPath::Circuit => ov.circuit(prev, trial)?,
        };
    }
    Ok(out)
}

/// `Re<psi|(1 + tau O)|psi~>` with `O = nu Lap - lambda0~ D_psi~ grad`.
pub fn euler_overlap(trial: &Circuit, prev: &BurgersState, tau: f64, path: EvalPath) -> Result<f64> {
    let [id, s, sa, sd, sad] = overlap_terms(&prev.circuit, trial, path)?;
    let h = prev.grid.spacing();
    Ok(id + tau * prev.nu * (s + sa - 2.0 * id) / (h * h) + tau * prev.lambda0 * (sd - sad) / (2.0 * h))
}

/// Euler cost without the constant `|(1 + tau O) f~|^2`.
pub fn euler_cost(lambda0: f64, trial: &Circuit, prev: &BurgersState, tau: f64, path: EvalPath) -> Result<f64> {
    if !(tau >= 0.0) {
        return Err(Error::InvalidArgument(format!("tau must be non-negative, got {tau}")));
    }
    let c = euler_overlap(trial, prev, tau, path)?;
    Ok(lambda0 * lambda0 - 2.0 * lambda0 * prev.lambda0 * c)
}

/// Minimizes the Euler cost: the circuit is fitted to `(1 + tau O) f~` by
/// fidelity sweeps from the previous gates, then `lambda0` is set to the
/// minimizer of the quadratic.
pub fn variational_euler_step(prev: &BurgersState, tau: f64, opts: &FitOptions) -> Result<BurgersState> {
    check_step(&prev.grid, prev.nu, tau)?;
    let target = euler_update(&prev.values(), prev.grid.spacing(), prev.nu, tau);
    let (lambda0, circuit) = fit_scaled(&target, &prev.circuit, opts)?;
    Ok(BurgersState {
        lambda0,
        circuit,
        grid: prev.grid,
        nu: prev.nu,
        t: prev.t + tau,
    })
}

/// Variational trajectory, initial state included.
pub fn evolve(initial: &BurgersState, tau: f64, steps: usize, opts: &FitOptions) -> Result<Vec<BurgersState>> {
    let mut out = vec![initial.clone()];
    for _ in 0..steps {
        let next = variational_euler_step(out.last().expect("non-empty"), tau, opts)?;
        out.push(next);
    }
    Ok(out)
}
