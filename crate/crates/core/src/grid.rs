//! Periodic grids, external potentials, the discrete nonlinear Schrödinger
//! energy functional and an imaginary-time ground-state solver used as the
//! exact reference throughout the crate.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statevector::{StateVector, C64};

const NORM_TOL: f64 = 1e-10;

/// `N = 2^n` equidistant points `x_k = a + h k` on the periodic interval `[a, b)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: u32,
    pub a: f64,
    pub b: f64,
}

impl GridSpec {
    pub fn points(&self) -> usize {
        1usize << self.n
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    pub fn spacing(&self) -> f64 {
        self.length() / self.points() as f64
    }

    pub fn x(&self, k: usize) -> f64 {
        self.a + self.spacing() * k as f64
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.points()).map(|k| self.x(k)).collect()
    }
}

pub fn build_grid(n: u32, a: f64, b: f64) -> Result<GridSpec> {
    if n < 1 {
        return Err(Error::InvalidArgument("grid needs at least one qubit".into()));
    }
    if n > 40 {
        return Err(Error::InvalidArgument(format!("n = {n} is too large")));
    }
    if !(b > a) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "interval [{a}, {b}) is empty or not finite"
        )));
    }
    Ok(GridSpec { n, a, b })
}

/// Default second wavenumber of the bichromatic lattice, `2 kappa1 / (1 + sqrt 5)`.
pub fn golden_kappa2(kappa1: f64) -> f64 {
    2.0 * kappa1 / (1.0 + 5f64.sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    /// `strength * (x - center)^2`
    Harmonic { center: f64, strength: f64 },
    /// `s1 sin(kappa1 x) + s2 sin(kappa2 x)`
    Bichromatic {
        s1: f64,
        s2: f64,
        kappa1: f64,
        #[serde(default)]
        kappa2: Option<f64>,
    },
    Tabulated { values: Vec<f64> },
}

impl PotentialSpec {
    pub fn zero(grid: &GridSpec) -> Self {
        Self::Tabulated {
            values: vec![0.0; grid.points()],
        }
    }

    /// Strongly disordered lattice with `s2 = s1 / ratio` and the golden `kappa2`.
    pub fn bichromatic(s1: f64, ratio: f64, kappa1: f64) -> Self {
        Self::Bichromatic {
            s1,
            s2: s1 / ratio,
            kappa1,
            kappa2: None,
        }
    }

    pub fn values(&self, grid: &GridSpec) -> Result<Vec<f64>> {
        match self {
            Self::Harmonic { center, strength } => Ok(grid
                .xs()
                .into_iter()
                .map(|x| strength * (x - center) * (x - center))
                .collect()),
            Self::Bichromatic {
                s1,
                s2,
                kappa1,
                kappa2,
            } => {
                let k2 = kappa2.unwrap_or_else(|| golden_kappa2(*kappa1));
                Ok(grid
                    .xs()
                    .into_iter()
                    .map(|x| s1 * (kappa1 * x).sin() + s2 * (k2 * x).sin())
                    .collect())
            }
            Self::Tabulated { values } => {
                if values.len() != grid.points() {
                    return Err(Error::DimensionMismatch {
                        expected: grid.points(),
                        actual: values.len(),
                    });
                }
                Ok(values.clone())
            }
        }
    }
}

/// Potential sampled on a grid together with its unit-norm direction.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialValues {
    pub values: Vec<f64>,
    pub alpha: f64,
    pub tilde: Vec<f64>,
}

pub fn eval_potential(spec: &PotentialSpec, grid: &GridSpec) -> Result<PotentialValues> {
    let values = spec.values(grid)?;
    let alpha = values.iter().map(|v| v * v).sum::<f64>().sqrt();
    let tilde = if alpha > 0.0 {
        values.iter().map(|v| v / alpha).collect()
    } else {
        vec![0.0; values.len()]
    };
    Ok(PotentialValues {
        values,
        alpha,
        tilde,
    })
}

/// Kinetic, potential and interaction energies plus the matching ancilla
/// expectations `sigma_K = Re sum conj(psi_k) psi_{k+1}`,
/// `sigma_P = sum Vtilde_k |psi_k|^2` and `sigma_I = sum |psi_k|^4`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct EnergyBreakdown {
    pub kinetic: f64,
    pub potential: f64,
    pub interaction: f64,
    pub total: f64,
    pub sigma_k: f64,
    pub sigma_p: f64,
    pub sigma_i: f64,
    pub alpha: f64,
}

impl EnergyBreakdown {
    /// Assembles energies from ancilla expectations.
    pub fn from_sigmas(sigma_k: f64, sigma_p: f64, sigma_i: f64, alpha: f64, grid: &GridSpec, g: f64) -> Self {
        let h = grid.spacing();
        let kinetic = (1.0 - sigma_k) / (h * h);
        let potential = alpha * sigma_p;
        let interaction = g / (2.0 * h) * sigma_i;
        Self {
            kinetic,
            potential,
            interaction,
            total: kinetic + potential + interaction,
            sigma_k,
            sigma_p,
            sigma_i,
            alpha,
        }
    }
}

pub fn discrete_energies(
    psi: &StateVector,
    grid: &GridSpec,
    pot: &PotentialSpec,
    g: f64,
) -> Result<EnergyBreakdown> {
    if psi.len() != grid.points() {
        return Err(Error::DimensionMismatch {
            expected: grid.points(),
            actual: psi.len(),
        });
    }
    let norm2: f64 = psi.probabilities().iter().sum();
    if (norm2 - 1.0).abs() > NORM_TOL {
        return Err(Error::Precondition(format!(
            "state must be normalized, got squared norm {norm2}"
        )));
    }
    let pv = eval_potential(pot, grid)?;
    Ok(energies_with(psi.amplitudes(), grid, &pv, g))
}

pub(crate) fn energies_with(amps: &[C64], grid: &GridSpec, pv: &PotentialValues, g: f64) -> EnergyBreakdown {
    let n = amps.len();
    let h = grid.spacing();
    let mut stencil = 0.0;
    let mut sigma_k = 0.0;
    let mut potential = 0.0;
    let mut sigma_p = 0.0;
    let mut sigma_i = 0.0;
    for k in 0..n {
        let up = amps[(k + 1) % n];
        let down = amps[(k + n - 1) % n];
        let p = amps[k];
        stencil += (p.conj() * (up - 2.0 * p + down)).re;
        sigma_k += (p.conj() * up).re;
        let d = p.norm_sqr();
        potential += pv.values[k] * d;
        sigma_p += pv.tilde[k] * d;
        sigma_i += d * d;
    }
    let kinetic = -0.5 * stencil / (h * h);
    let interaction = g / (2.0 * h) * sigma_i;
    EnergyBreakdown {
        kinetic,
        potential,
        interaction,
        total: kinetic + potential + interaction,
        sigma_k,
        sigma_p,
        sigma_i,
        alpha: pv.alpha,
    }
}

/// Eigenvalues `2 N^2 (cos(2 pi k / N) - 1)` of the periodic FDM Laplacian on
/// the unit interval, in QFT order.
pub fn laplacian_spectrum(points: usize) -> Vec<f64> {
    let nf = points as f64;
    (0..points)
        .map(|k| 2.0 * nf * nf * ((2.0 * PI * k as f64 / nf).cos() - 1.0))
        .collect()
}

/// Periodic three-point Laplacian `(f_{k+1} - 2 f_k + f_{k-1}) / h^2`.
pub fn periodic_laplacian(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    (0..n)
        .map(|k| (f[(k + 1) % n] - 2.0 * f[k] + f[(k + n - 1) % n]) / (h * h))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ImagTimeScheme {
    /// `psi <- normalize(psi - dt H[psi] psi)`.
    Explicit,
    /// `(1 + dt (H[psi] - c)) psi' = psi`, normalized, with the
    /// nonlinearity lagged and `c` a lower bound of the spectrum.
    SemiImplicit,
}

#[derive(Clone, Copy, Debug)]
pub struct ImagTimeOptions {
    pub scheme: ImagTimeScheme,
    /// Time step; `None` picks `0.1 h^2` (explicit) or `1.0` (semi-implicit).
    pub dt: Option<f64>,
    /// Relative energy change per step that counts as converged.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for ImagTimeOptions {
    fn default() -> Self {
        Self {
            scheme: ImagTimeScheme::SemiImplicit,
            dt: None,
            tol: 1e-12,
            max_iters: 200_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GroundState {
    pub psi: StateVector,
    pub energies: EnergyBreakdown,
    pub iterations: usize,
}

impl GroundState {
    pub fn energy(&self) -> f64 {
        self.energies.total
    }
}

pub fn imaginary_time_ground_state(
    grid: &GridSpec,
    pot: &PotentialSpec,
    g: f64,
    opts: &ImagTimeOptions,
) -> Result<GroundState> {
    let pv = eval_potential(pot, grid)?;
    let n = grid.points();
    let h = grid.spacing();
    let dt = match (opts.dt, opts.scheme) {
        (Some(dt), _) => dt,
        (None, ImagTimeScheme::Explicit) => 0.1 * h * h,
        (None, ImagTimeScheme::SemiImplicit) => 1.0,
    };
    if !(dt > 0.0) || !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument("dt and tol must be positive".into()));
    }
    let shift = pv.values.iter().cloned().fold(f64::INFINITY, f64::min).min(0.0);
    let mut psi = vec![1.0 / (n as f64).sqrt(); n];
    let energy_of = |psi: &[f64]| {
        let amps: Vec<C64> = psi.iter().map(|&v| C64::new(v, 0.0)).collect();
        energies_with(&amps, grid, &pv, g)
    };
    let mut last = energy_of(&psi);
    let mut change = f64::INFINITY;
    for it in 1..=opts.max_iters {
        psi = match opts.scheme {
            ImagTimeScheme::Explicit => explicit_step(&psi, &pv.values, g, h, dt),
            ImagTimeScheme::SemiImplicit => semi_implicit_step(&psi, &pv.values, g, h, dt, shift),
        };
        normalize_real(&mut psi)?;
        let e = energy_of(&psi);
        change = (e.total - last.total).abs() / last.total.abs().max(1.0);
        last = e;
        if change < opts.tol {
            fix_gauge(&mut psi);
            return Ok(GroundState {
                psi: StateVector::from_real(&psi)?,
                energies: energy_of(&psi),
                iterations: it,
            });
        }
    }
    fix_gauge(&mut psi);
    Err(Error::ConvergenceFailure {
        iterations: opts.max_iters,
        last_change: change,
        last: Box::new(StateVector::from_real(&psi)?),
    })
}

/// Ground state with default options.
pub fn ground_state(grid: &GridSpec, pot: &PotentialSpec, g: f64) -> Result<GroundState> {
    imaginary_time_ground_state(grid, pot, g, &ImagTimeOptions::default())
}

/// `H[psi] psi` for the discrete Gross–Pitaevskii operator acting on
/// `psi_k = sqrt(h) f_k`; the nonlinearity is `g |f|^2 = g |psi|^2 / h`.
pub fn gp_operator_apply(psi: &[f64], v: &[f64], g: f64, h: f64) -> Vec<f64> {
    let lap = periodic_laplacian(psi, h);
    psi.iter()
        .zip(&lap)
        .zip(v)
        .map(|((&p, &l), &vk)| -0.5 * l + vk * p + g * p * p / h * p)
        .collect()
}

fn explicit_step(psi: &[f64], v: &[f64], g: f64, h: f64, dt: f64) -> Vec<f64> {
    let hp = gp_operator_apply(psi, v, g, h);
    psi.iter().zip(&hp).map(|(p, q)| p - dt * q).collect()
}

fn semi_implicit_step(psi: &[f64], v: &[f64], g: f64, h: f64, dt: f64, shift: f64) -> Vec<f64> {
    let off = -dt * 0.5 / (h * h);
    let diag: Vec<f64> = psi
        .iter()
        .zip(v)
        .map(|(&p, &vk)| 1.0 + dt * (1.0 / (h * h) + vk + g * p * p / h - shift))
        .collect();
    solve_cyclic_tridiagonal(&diag, off, psi)
}

/// Solves the symmetric cyclic tridiagonal system with constant off-diagonal
/// `off` (including the corner entries) by Sherman–Morrison on top of Thomas.
pub(crate) fn solve_cyclic_tridiagonal(diag: &[f64], off: f64, rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    if n <= 2 {
        // both neighbours coincide for two points
        if n == 1 {
            return vec![rhs[0] / (diag[0] + 2.0 * off)];
        }
        let (a, b, c, d) = (diag[0], 2.0 * off, 2.0 * off, diag[1]);
        let det = a * d - b * c;
        return vec![(d * rhs[0] - b * rhs[1]) / det, (a * rhs[1] - c * rhs[0]) / det];
    }
    let gamma = -diag[0];
    let mut modified = diag.to_vec();
    modified[0] -= gamma;
    modified[n - 1] -= off * off / gamma;
    let y = thomas(&modified, off, rhs);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = off;
    let z = thomas(&modified, off, &u);
    let factor = (y[0] + off / gamma * y[n - 1]) / (1.0 + z[0] + off / gamma * z[n - 1]);
    y.iter().zip(&z).map(|(a, b)| a - factor * b).collect()
}

fn thomas(diag: &[f64], off: f64, rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = off / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - off * c[i - 1];
        c[i] = off / m;
        d[i] = (rhs[i] - off * d[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

fn normalize_real(v: &mut [f64]) -> Result<()> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::ZeroNorm);
    }
    v.iter_mut().for_each(|x| *x /= norm);
    Ok(())
}

fn fix_gauge(v: &mut [f64]) {
    if v.iter().sum::<f64>() < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}
