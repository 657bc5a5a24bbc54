//! Shot-noise model for the ancilla measurements, the Monte Carlo error laws
//! and the detection of the minimal grid size.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{build_grid, eval_potential, ground_state, EnergyBreakdown, GridSpec, PotentialSpec};
use crate::statevector::StateVector;

/// Mean of `shots` outcomes `+1` (probability `p_plus`) or `-1`.
pub fn sample_sigma_z(p_plus: f64, shots: usize, seed: u64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_plus) {
        return Err(Error::InvalidArgument(format!("p_plus = {p_plus} is not a probability")));
    }
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let plus = (0..shots).filter(|_| rng.random_bool(p_plus)).count();
    Ok((2 * plus) as f64 / shots as f64 - 1.0)
}

/// Samples an ancilla with expectation `sigma`.
pub fn sample_expectation(sigma: f64, shots: usize, seed: u64) -> Result<f64> {
    sample_sigma_z(((1.0 + sigma) / 2.0).clamp(0.0, 1.0), shots, seed)
}

/// Energies assembled from shot estimates of the three ancilla expectations.
/// The three QNPUs use independent streams derived from `seed`.
pub fn sampled_energies(exact: &EnergyBreakdown, grid: &GridSpec, g: f64, shots: usize, seed: u64) -> Result<EnergyBreakdown> {
    let sk = sample_expectation(exact.sigma_k, shots, stream(seed, 0))?;
    let sp = sample_expectation(exact.sigma_p, shots, stream(seed, 1))?;
    let si = sample_expectation(exact.sigma_i, shots, stream(seed, 2))?;
    Ok(EnergyBreakdown::from_sigmas(sk, sp, si, exact.alpha, grid, g))
}

/// Independent seed for sub-stream `k` of `seed`.
pub fn stream(seed: u64, k: u64) -> u64 {
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(k.wrapping_mul(0xbf58_476d_1ce4_e5b9)) ^ k
}

/// Absolute and relative Monte Carlo error of one energy term.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct TermError {
    pub abs: f64,
    pub rel: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct ErrorPrediction {
    pub kinetic: TermError,
    pub potential: TermError,
    pub interaction: TermError,
}

fn binomial_width(sigma: f64) -> f64 {
    (1.0 - sigma * sigma).max(0.0).sqrt()
}

fn relative(abs: f64, value: f64) -> f64 {
    if value == 0.0 {
        if abs == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        abs / value.abs()
    }
}

/// Predicted sampling errors for `shots` measurements of each ancilla.
pub fn predict_errors(e: &EnergyBreakdown, grid: &GridSpec, g: f64, shots: usize) -> Result<ErrorPrediction> {
    for s in [e.sigma_k, e.sigma_p, e.sigma_i] {
        if s.abs() > 1.0 + 1e-12 {
            return Err(Error::Precondition(format!("ancilla expectation {s} outside [-1, 1]")));
        }
    }
    let root_m = (shots as f64).sqrt();
    let inv_h = 1.0 / grid.spacing();
    let k_abs = inv_h * inv_h * binomial_width(e.sigma_k) / root_m;
    let p_abs = e.alpha * binomial_width(e.sigma_p) / root_m;
    let i_abs = 0.5 * g * inv_h * binomial_width(e.sigma_i) / root_m;
    Ok(ErrorPrediction {
        kinetic: TermError {
            abs: k_abs,
            rel: relative(k_abs, e.kinetic),
        },
        potential: TermError {
            abs: p_abs,
            rel: relative(p_abs, e.potential),
        },
        interaction: TermError {
            abs: i_abs,
            rel: relative(i_abs, e.interaction),
        },
    })
}

/// Sample standard deviations of the three energy estimates over `repeats`
/// independent runs of `shots` measurements each.
pub fn empirical_errors(
    exact: &EnergyBreakdown,
    grid: &GridSpec,
    g: f64,
    shots: usize,
    repeats: usize,
    seed: u64,
) -> Result<[f64; 3]> {
    if repeats < 2 {
        return Err(Error::InvalidArgument("need at least two repeats".into()));
    }
    let runs: Vec<EnergyBreakdown> = (0..repeats as u64)
        .into_par_iter()
        .map(|r| sampled_energies(exact, grid, g, shots, stream(seed, r)))
        .collect::<Result<_>>()?;
    let sd = |f: fn(&EnergyBreakdown) -> f64| {
        let m = runs.iter().map(f).sum::<f64>() / repeats as f64;
        (runs.iter().map(|e| (f(e) - m).powi(2)).sum::<f64>() / (repeats - 1) as f64).sqrt()
    };
    Ok([sd(|e| e.kinetic), sd(|e| e.potential), sd(|e| e.interaction)])
}

/// Smallest length scale of a potential under the four-points-per-wavelength
/// rule, `(2 pi / kappa) / 4` for the largest lattice wavenumber.
pub fn smallest_length_scale(pot: &PotentialSpec) -> Result<f64> {
    match pot {
        PotentialSpec::Bichromatic { kappa1, kappa2, .. } => {
            let k2 = kappa2.unwrap_or_else(|| crate::grid::golden_kappa2(*kappa1));
            let k = kappa1.abs().max(k2.abs());
            if k == 0.0 {
                return Err(Error::InvalidArgument("lattice without wavenumber".into()));
            }
            Ok(2.0 * PI / k / 4.0)
        }
        _ => Err(Error::InvalidArgument(
            "length scale is defined for lattice potentials only".into(),
        )),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SamplingConstants {
    pub c_p: f64,
    pub c_k: f64,
    /// `g N_min / (2 l I')` with `I' = g 2^n sum |psi_k|^4` on the unit
    /// interval, i.e. twice the interaction energy used elsewhere.
    pub c_i: f64,
    /// The same ratio with the interaction energy `(g / 2h) sum |psi_k|^4`.
    pub c_i_canonical: f64,
    pub n_min_points: f64,
    pub n_min: u32,
}

pub fn compute_constants(psi: &StateVector, grid: &GridSpec, pot: &PotentialSpec, g: f64) -> Result<SamplingConstants> {
    let e = crate::grid::discrete_energies(psi, grid, pot, g)?;
    let ell = grid.length();
    let ell_min = smallest_length_scale(pot)?;
    let n_min_points = ell / ell_min;
    if e.potential == 0.0 {
        return Err(Error::UndefinedConstant);
    }
    let ratio = e.alpha * e.alpha / (e.potential * e.potential);
    let c_p = (ratio - 1.0).max(0.0).sqrt();
    let c_k = 2f64.sqrt() / (ell_min * e.kinetic.sqrt());
    let c_i_canonical = g * n_min_points / (2.0 * ell * e.interaction);
    Ok(SamplingConstants {
        c_p,
        c_k,
        c_i: 0.5 * c_i_canonical,
        c_i_canonical,
        n_min_points,
        n_min: n_min_points.log2().round() as u32,
    })
}

/// Ancilla expectations of an oracle ground state at one grid size.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScalingPoint {
    pub n: u32,
    pub sigma_k: f64,
    pub sigma_p: f64,
    pub sigma_i: f64,
}

/// Oracle ground states on `[0, 1)` for each `n` in `lo..=hi`.
pub fn scaling_table(pot: &PotentialSpec, g: f64, lo: u32, hi: u32) -> Result<Vec<ScalingPoint>> {
    (lo..=hi)
        .into_par_iter()
        .map(|n| {
            let grid = build_grid(n, 0.0, 1.0)?;
            eval_potential(pot, &grid)?;
            let gs = ground_state(&grid, pot, g)?;
            Ok(ScalingPoint {
                n,
                sigma_k: gs.energies.sigma_k,
                sigma_p: gs.energies.sigma_p,
                sigma_i: gs.energies.sigma_i,
            })
        })
        .collect()
}

/// Slopes of `log2(1 - sigma_K)` and `log2(sigma_I)` from `n` to `n + 1`.
pub fn scaling_slopes(table: &[ScalingPoint]) -> Vec<(u32, f64, f64)> {
    table
        .windows(2)
        .map(|w| {
            let dk = (1.0 - w[1].sigma_k).log2() - (1.0 - w[0].sigma_k).log2();
            let di = w[1].sigma_i.log2() - w[0].sigma_i.log2();
            (w[0].n, dk, di)
        })
        .collect()
}

pub const SLOPE_TOL: f64 = 0.3;

/// Smallest `n` such that every later step `m -> m + 1` (`m > n`) of the table
/// shows slopes `-2` for `log2(1 - sigma_K)` and `-1` for `log2(sigma_I)`
/// within `SLOPE_TOL`, with at least two such steps available.
pub fn detect_nmin_from_table(table: &[ScalingPoint]) -> Result<u32> {
    if table.len() < 4 {
        return Err(Error::InvalidArgument("need at least four grid sizes".into()));
    }
    let lo = table[0].n;
    let hi = table[table.len() - 1].n;
    if table.iter().all(|p| 1.0 - p.sigma_k < 1e-14) {
        return Ok(lo);
    }
    let slopes = scaling_slopes(table);
    let ok: Vec<bool> = slopes
        .iter()
        .map(|&(_, dk, di)| (dk + 2.0).abs() <= SLOPE_TOL && (di + 1.0).abs() <= SLOPE_TOL)
        .collect();
    // slopes[i] is the step starting at lo + i; candidate n needs steps from n + 1 on
    for n in lo..=hi {
        let first = (n + 1 - lo) as usize;
        if first + 2 > ok.len() {
            break;
        }
        if ok[first..].iter().all(|&b| b) {
            return Ok(n);
        }
    }
    Err(Error::DetectionFailure { lo, hi })
}

pub fn detect_nmin(pot: &PotentialSpec, g: f64, lo: u32, hi: u32) -> Result<u32> {
    if hi < lo + 3 {
        return Err(Error::InvalidArgument("n range must span at least four values".into()));
    }
    detect_nmin_from_table(&scaling_table(pot, g, lo, hi)?)
}

/// The strongly disordered lattice family with `s1 = 5000 (kappa1 / 2 pi 16)^2`,
/// `s1 / s2 = 2` and the golden second wavenumber.
pub fn disordered_family(kappa_index: f64) -> PotentialSpec {
    let kappa1 = 2.0 * PI * kappa_index;
    let s1 = 5e3 * (kappa_index / 16.0).powi(2);
    PotentialSpec::bichromatic(s1, 2.0, kappa1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn std_dev(xs: &[f64]) -> f64 {
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
    }

    #[test]
    fn deterministic_outcomes() {
        assert_eq!(sample_sigma_z(1.0, 1000, 3).unwrap(), 1.0);
        assert_eq!(sample_sigma_z(0.0, 1000, 3).unwrap(), -1.0);
        assert!(sample_sigma_z(1.5, 10, 1).is_err());
        assert!(sample_sigma_z(0.5, 0, 1).is_err());
    }

    #[test]
    fn fair_coin_mean() {
        let m = 1_000_000;
        assert!(sample_sigma_z(0.5, m, 11).unwrap().abs() < 5.0 / (m as f64).sqrt());
    }

    #[test]
    fn spread_matches_binomial_width() {
        let sigma = 0.6;
        let m = 10_000;
        let xs: Vec<f64> = (0..1000)
            .map(|s| sample_expectation(sigma, m, s).unwrap())
            .collect();
        let predicted = (1.0 - sigma * sigma).sqrt() / (m as f64).sqrt();
        assert!((std_dev(&xs) / predicted - 1.0).abs() < 0.1);
    }

    #[test]
    fn empirical_errors_follow_prediction() {
        let grid = build_grid(4, 0.0, 1.0).unwrap();
        let e = EnergyBreakdown::from_sigmas(0.9, 0.3, 0.2, 2.0, &grid, 4.0);
        let p = predict_errors(&e, &grid, 4.0, 5000).unwrap();
        let m = empirical_errors(&e, &grid, 4.0, 5000, 800, 5).unwrap();
        assert_eq!(m, empirical_errors(&e, &grid, 4.0, 5000, 800, 5).unwrap());
        for (got, want) in m.iter().zip([p.kinetic.abs, p.potential.abs, p.interaction.abs]) {
            assert!((got / want - 1.0).abs() < 0.1, "{got} vs {want}");
        }
    }

    #[test]
    fn deterministic_ancilla_has_no_error() {
        let grid = build_grid(4, 0.0, 1.0).unwrap();
        let e = EnergyBreakdown::from_sigmas(1.0, -1.0, 1.0, 3.0, &grid, 2.0);
        let p = predict_errors(&e, &grid, 2.0, 100).unwrap();
        assert_eq!(p.potential.abs, 0.0);
        assert_eq!(p.kinetic.abs, 0.0);
        assert_eq!(p.interaction.abs, 0.0);
        let bad = EnergyBreakdown::from_sigmas(1.5, 0.0, 0.0, 1.0, &grid, 1.0);
        assert!(predict_errors(&bad, &grid, 1.0, 10).is_err());
    }

    #[test]
    fn n_min_from_wavenumber() {
        let grid = build_grid(8, 0.0, 1.0).unwrap();
        for (idx, n_min) in [(16.0, 6), (32.0, 7), (64.0, 8), (128.0, 9)] {
            let pot = disordered_family(idx);
            let psi = StateVector::uniform(8);
            let c = compute_constants(&psi, &grid, &pot, 10.0).unwrap();
            assert_eq!(c.n_min, n_min);
        }
    }

    #[test]
    fn c_p_from_potential_weight() {
        let grid = build_grid(3, 0.0, 1.0).unwrap();
        let pot = PotentialSpec::Bichromatic {
            s1: 1.0,
            s2: 0.0,
            kappa1: 2.0 * PI * 2.0,
            kappa2: Some(0.0),
        };
        // sin(4 pi x) on 8 points: nonzero at k = 1, 3, 5, 7 only
        let psi = StateVector::basis(3, 1).unwrap();
        let c = compute_constants(&psi, &grid, &pot, 1.0).unwrap();
        assert!((c.c_p - 3f64.sqrt()).abs() < 1e-12);
        let flat = PotentialSpec::Bichromatic {
            s1: 0.0,
            s2: 0.0,
            kappa1: 1.0,
            kappa2: Some(1.0),
        };
        assert!(matches!(
            compute_constants(&psi, &grid, &flat, 1.0),
            Err(Error::UndefinedConstant)
        ));
    }

    #[test]
    fn detection_rule() {
        let mk = |n: u32, k: f64, i: f64| ScalingPoint {
            n,
            sigma_k: 1.0 - k,
            sigma_p: 0.0,
            sigma_i: i,
        };
        // plateau up to 6, then ideal scaling
        let mut table = vec![mk(4, 0.1, 0.05), mk(5, 0.1, 0.05), mk(6, 0.08, 0.04)];
        for n in 7..=10 {
            let d = (n - 6) as i32;
            table.push(mk(n, 0.08 * 4f64.powi(-d), 0.04 * 2f64.powi(-d)));
        }
        // step 6 -> 7 already has the ideal slope, so detection returns 5
        assert_eq!(detect_nmin_from_table(&table).unwrap(), 5);
        let flat: Vec<ScalingPoint> = (3..=7).map(|n| mk(n, 0.0, 1.0 / (1u64 << n) as f64)).collect();
        assert_eq!(detect_nmin_from_table(&flat).unwrap(), 3);
        let noisy: Vec<ScalingPoint> = (3..=7).map(|n| mk(n, 0.1, 0.1)).collect();
        assert!(matches!(detect_nmin_from_table(&noisy), Err(Error::DetectionFailure { .. })));
    }

    #[test]
    fn detection_on_free_problem() {
        let pot = PotentialSpec::Bichromatic {
            s1: 0.0,
            s2: 0.0,
            kappa1: 1.0,
            kappa2: Some(1.0),
        };
        assert_eq!(detect_nmin(&pot, 0.0, 3, 6).unwrap(), 3);
        assert!(detect_nmin(&pot, 0.0, 3, 5).is_err());
    }
}
