//! Measurement circuits: the cyclic adder, Hadamard-test QNPUs for the
//! kinetic, potential and nonlinear terms, ancilla-free sampling circuits and
//! the amplitude readout circuit.
//!
//! Every QNPU can be evaluated by emulating its full circuit or by summing
//! the target quantity directly; the two must agree.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DMatrix;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{laplacian_spectrum, GridSpec};
use crate::statevector::{qft, Circuit, Gate, StateVector, C64};

/// Which evaluation produced `QnpuResult::sigma_z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalPath {
    Circuit,
    Algebraic,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QnpuResult {
    pub sigma_z: f64,
    pub algebraic: f64,
    pub path: EvalPath,
}

impl QnpuResult {
    fn algebraic(value: f64) -> Self {
        Self {
            sigma_z: value,
            algebraic: value,
            path: EvalPath::Algebraic,
        }
    }

    fn circuit(sigma_z: f64, algebraic: f64) -> Self {
        Self {
            sigma_z,
            algebraic,
            path: EvalPath::Circuit,
        }
    }
}

/// Gate tallies of a circuit, by kind.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct GateCounts {
    pub not: usize,
    pub cnot: usize,
    pub toffoli: usize,
    pub other: usize,
}

pub fn count_gates(c: &Circuit) -> GateCounts {
    let mut out = GateCounts::default();
    for g in &c.gates {
        match (g.is_not(), g.controls().len()) {
            (true, 0) => out.not += 1,
            (true, 1) => out.cnot += 1,
            (true, 2) => out.toffoli += 1,
            _ => out.other += 1,
        }
    }
    out
}

/// The QNPU adder: `A|k> = |k - 1 mod N>` on the register, controlled by
/// one qubit and using `max(n - 2, 0)` work ancillas that start and end in 0.
///
/// Qubit layout of `circuit`: register `0..n`, work ancillas
/// `n..n + work`, control last.
#[derive(Clone, Debug)]
pub struct Adder {
    pub circuit: Circuit,
    pub n: usize,
    pub work: usize,
    pub control: usize,
}

impl Adder {
    pub fn counts(&self) -> GateCounts {
        count_gates(&self.circuit)
    }

    /// Block of the dense matrix with the control set and the work ancillas
    /// in 0, indexed by register basis states.
    pub fn register_matrix(&self) -> DMatrix<C64> {
        let dim = 1usize << self.n;
        let total = self.circuit.n_qubits();
        let shift = total - self.n;
        let ctrl_bit = 1usize << (total - 1 - self.control);
        let mut m = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
        for j in 0..dim {
            let mut s = StateVector::basis(total, (j << shift) | ctrl_bit).expect("in range");
            s.apply_circuit(&self.circuit).expect("widths agree");
            for i in 0..dim {
                m[(i, j)] = s.amplitudes()[(i << shift) | ctrl_bit];
            }
        }
        m
    }
}

/// Controlled decrement of the register `reg` (`reg[0]` most significant).
/// `work` must hold `max(reg.len() - 2, 0)` qubits in `|0>`.
pub fn adder_gates(reg: &[usize], work: &[usize], control: usize) -> Vec<Gate> {
    let n = reg.len();
    // b[i] is bit i counted from the least significant end
    let b = |i: usize| reg[n - 1 - i];
    let mut gates = vec![Gate::x(b(0)).with_control(control)];
    if n == 1 {
        return gates;
    }
    if n == 2 {
        gates.push(Gate::toffoli(control, b(0), b(1)));
        return gates;
    }
    // work[i - 1] holds "bits 0..i were all zero before the decrement"
    let a = |i: usize| work[i - 1];
    gates.push(Gate::toffoli(control, b(0), b(1)));
    gates.push(Gate::toffoli(control, b(0), a(1)));
    for i in 1..n - 2 {
        gates.push(Gate::toffoli(a(i), b(i), a(i + 1)));
        gates.push(Gate::cnot(a(i + 1), b(i + 1)));
    }
    gates.push(Gate::toffoli(a(n - 2), b(n - 2), b(n - 1)));
    for i in (1..n - 2).rev() {
        gates.push(Gate::toffoli(a(i), b(i), a(i + 1)));
    }
    gates.push(Gate::toffoli(control, b(0), a(1)));
    gates
}

pub fn work_ancillas(n: usize) -> usize {
    n.saturating_sub(2)
}

pub fn build_adder(n: usize) -> Result<Adder> {
    if n < 1 {
        return Err(Error::InvalidArgument("adder needs n >= 1".into()));
    }
    let work = work_ancillas(n);
    let control = n + work;
    let mut circuit = Circuit::new(n, work + 1);
    let reg: Vec<usize> = (0..n).collect();
    let anc: Vec<usize> = (n..n + work).collect();
    for g in adder_gates(&reg, &anc, control) {
        circuit.push(g)?;
    }
    Ok(Adder {
        circuit,
        n,
        work,
        control,
    })
}

fn require_plain_prep(prep: &Circuit) -> Result<()> {
    if prep.n_ancilla != 0 {
        return Err(Error::InvalidArgument(
            "state preparation circuits must not use ancillas".into(),
        ));
    }
    Ok(())
}

/// Runs a Hadamard test on ancilla `anc`: H, `controlled` with every gate
/// controlled by the ancilla, H. `before` is applied uncontrolled first.
fn hadamard_test(total: usize, anc: usize, before: &Circuit, controlled: &Circuit) -> Result<f64> {
    let mut s = StateVector::zero(total);
    let mut c = Circuit::new(total, 0);
    for g in &before.gates {
        c.push(g.clone())?;
    }
    c.push(Gate::h(anc))?;
    for g in &controlled.gates {
        c.push(g.clone().with_control(anc))?;
    }
    c.push(Gate::h(anc))?;
    s.apply_circuit(&c)?;
    s.sigma_z(anc)
}

/// `Re sum conj(psi_k) psi_{k+1}`.
pub fn shift_overlap(psi: &StateVector) -> f64 {
    let a = psi.amplitudes();
    let n = a.len();
    (0..n).map(|k| (a[k].conj() * a[(k + 1) % n]).re).sum()
}

pub fn kinetic_qnpu(prep: &Circuit, grid: &GridSpec, path: EvalPath) -> Result<(QnpuResult, f64)> {
    require_plain_prep(prep)?;
    let n = prep.n_register;
    if n != grid.n as usize {
        return Err(Error::DimensionMismatch {
            expected: grid.n as usize,
            actual: n,
        });
    }
    let algebraic = shift_overlap(&prep.prepare());
    let result = match path {
        EvalPath::Algebraic => QnpuResult::algebraic(algebraic),
        EvalPath::Circuit => {
            let work = work_ancillas(n);
            let anc = n + work;
            let total = anc + 1;
            let mut before = Circuit::new(total, 0);
            before.append_at(prep, 0)?;
            let mut inner = Circuit::new(total, 0);
            let reg: Vec<usize> = (0..n).collect();
            let wk: Vec<usize> = (n..n + work).collect();
            // the ancilla control is added by the Hadamard test
            for g in adder_gates(&reg, &wk, anc) {
                let mut g = g;
                strip_control(&mut g, anc);
                inner.push(g)?;
            }
            QnpuResult::circuit(hadamard_test(total, anc, &before, &inner)?, algebraic)
        }
    };
    let h = grid.spacing();
    let k = (1.0 - result.sigma_z) / (h * h);
    Ok((result, k))
}

/// Removes `q` from a gate's controls; a NOT with no controls left stays a NOT.
fn strip_control(g: &mut Gate, q: usize) {
    let targets = g.targets().to_vec();
    let controls: Vec<usize> = g.controls().iter().copied().filter(|&c| c != q).collect();
    *g = Gate::new(g.matrix().clone(), targets, controls).expect("same gate, fewer controls");
}

/// CNOTs `a[j] -> b[j]`, pairing two registers index by index.
fn pairing(a: &[usize], b: &[usize]) -> Vec<Gate> {
    a.iter().zip(b).map(|(&x, &y)| Gate::cnot(x, y)).collect()
}

/// Sigma for the potential term. `pot_circuit` prepares `sum Vtilde_k |k>`.
pub fn potential_qnpu(
    prep: &Circuit,
    pot_circuit: &Circuit,
    alpha: f64,
    path: EvalPath,
) -> Result<(QnpuResult, f64)> {
    require_plain_prep(prep)?;
    require_plain_prep(pot_circuit)?;
    let n = prep.n_register;
    if pot_circuit.n_register != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: pot_circuit.n_register,
        });
    }
    let psi = prep.prepare();
    let vt = pot_circuit.prepare();
    let algebraic: f64 = psi
        .amplitudes()
        .iter()
        .zip(vt.amplitudes())
        .map(|(p, v)| (v * p.norm_sqr()).re)
        .sum();
    let result = match path {
        EvalPath::Algebraic => QnpuResult::algebraic(algebraic),
        EvalPath::Circuit => {
            let total = 2 * n + 1;
            let anc = 2 * n;
            let mut before = Circuit::new(total, 0);
            before.append_at(prep, 0)?;
            let mut inner = Circuit::new(total, 0);
            inner.append_at(pot_circuit, n)?;
            let r1: Vec<usize> = (0..n).collect();
            let r2: Vec<usize> = (n..2 * n).collect();
            for g in pairing(&r1, &r2) {
                inner.push(g)?;
            }
            QnpuResult::circuit(hadamard_test(total, anc, &before, &inner)?, algebraic)
        }
    };
    Ok((result, alpha * result.sigma_z))
}

/// Sigma for the nonlinear term, `sum |psi_k|^4`. The second input port is
/// fed `U`, the third `U*`.
pub fn nonlinear_qnpu(prep: &Circuit, path: EvalPath) -> Result<QnpuResult> {
    require_plain_prep(prep)?;
    let n = prep.n_register;
    let psi = prep.prepare();
    let algebraic: f64 = psi.probabilities().iter().map(|p| p * p).sum();
    Ok(match path {
        EvalPath::Algebraic => QnpuResult::algebraic(algebraic),
        EvalPath::Circuit => {
            let total = 3 * n + 1;
            let anc = 3 * n;
            let mut before = Circuit::new(total, 0);
            before.append_at(prep, 0)?;
            let mut inner = Circuit::new(total, 0);
            inner.append_at(prep, n)?;
            inner.append_at(&prep.conj(), 2 * n)?;
            let r1: Vec<usize> = (0..n).collect();
            let r2: Vec<usize> = (n..2 * n).collect();
            let r3: Vec<usize> = (2 * n..3 * n).collect();
            for g in pairing(&r1, &r2).into_iter().chain(pairing(&r1, &r3)) {
                inner.push(g)?;
            }
            QnpuResult::circuit(hadamard_test(total, anc, &before, &inner)?, algebraic)
        }
    })
}

fn sample_indices(probs: &[f64], shots: usize, seed: u64) -> Result<Vec<usize>> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be >= 1".into()));
    }
    let dist = WeightedIndex::new(probs)
        .map_err(|e| Error::InvalidArgument(format!("cannot sample state: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..shots).map(|_| dist.sample(&mut rng)).collect())
}

/// Shot estimate of `sum_k o_k |psi_k|^2` from computational-basis samples.
pub fn diagonal_sampling(state: &StateVector, diag: &[f64], shots: usize, seed: u64) -> Result<f64> {
    if diag.len() != state.len() {
        return Err(Error::DimensionMismatch {
            expected: state.len(),
            actual: diag.len(),
        });
    }
    let ks = sample_indices(&state.probabilities(), shots, seed)?;
    Ok(ks.iter().map(|&k| diag[k]).sum::<f64>() / shots as f64)
}

/// Shot estimate of `<psi|Laplacian|psi>` on the unit interval, sampling in
/// the Fourier basis.
pub fn laplace_sampling(state: &StateVector, shots: usize, seed: u64) -> Result<f64> {
    let spec = laplacian_spectrum(state.len());
    diagonal_sampling(&qft(state), &spec, shots, seed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Part {
    Real,
    Imaginary,
}

/// Hadamard-test readout against the product state `R_y(theta_j)|0>` on every
/// register qubit, anti-controlled by the ancilla. Returns
/// `Re` (or `Im`) of `<theta|psi>`.
fn readout_with_angles(prep: &Circuit, thetas: &[f64], part: Part) -> Result<f64> {
    require_plain_prep(prep)?;
    let n = prep.n_register;
    let anc = n;
    let mut c = Circuit::new(n + 1, 0);
    c.push(Gate::h(anc))?;
    for g in &prep.gates {
        c.push(g.clone().with_control(anc))?;
    }
    c.push(Gate::x(anc))?;
    for (q, &t) in thetas.iter().enumerate() {
        if t != 0.0 {
            c.push(Gate::ry(t, q).with_control(anc))?;
        }
    }
    c.push(Gate::x(anc))?;
    if part == Part::Imaginary {
        c.push(Gate::phase(-FRAC_PI_2, anc))?;
    }
    c.push(Gate::h(anc))?;
    let mut s = StateVector::zero(n + 1);
    s.apply_circuit(&c)?;
    s.sigma_z(anc)
}

pub fn readout_amplitude(prep: &Circuit, k: usize, part: Part) -> Result<f64> {
    let n = prep.n_register;
    if k >= 1usize << n {
        return Err(Error::OutOfRange {
            index: k,
            limit: 1 << n,
        });
    }
    let thetas: Vec<f64> = (0..n)
        .map(|j| PI * ((k >> (n - 1 - j)) & 1) as f64)
        .collect();
    readout_with_angles(prep, &thetas, part)
}

/// `Re` of `2^{-(n-c)/2} sum_{fine} psi_{coarse, fine}` for every coarse
/// index over the leading `coarse_bits` qubits.
pub fn coarse_average_readout(prep: &Circuit, coarse_bits: usize) -> Result<Vec<f64>> {
    let n = prep.n_register;
    if coarse_bits < 1 || coarse_bits > n {
        return Err(Error::OutOfRange {
            index: coarse_bits,
            limit: n + 1,
        });
    }
    (0..1usize << coarse_bits)
        .map(|c| {
            let thetas: Vec<f64> = (0..n)
                .map(|j| {
                    if j < coarse_bits {
                        PI * ((c >> (coarse_bits - 1 - j)) & 1) as f64
                    } else {
                        FRAC_PI_2
                    }
                })
                .collect();
            readout_with_angles(prep, &thetas, Part::Real)
        })
        .collect()
}

/// Overlaps `<psi~|X|psi>` entering the Burgers cost, with `psi~ = U~|0>`
/// the previous state and `psi = U|0>` the trial state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BurgersOverlap {
    /// `<psi~|psi>`
    Identity,
    /// `<psi~|A|psi>`
    Shift,
    /// `<psi~|A^dag|psi>`
    ShiftAdjoint,
    /// `<psi~|A D^dag_{psi~}|psi>`
    ShiftDiag,
    /// `<psi~|A^dag D^dag_{psi~}|psi>`
    ShiftAdjointDiag,
}

impl BurgersOverlap {
    pub const ALL: [BurgersOverlap; 5] = [
        BurgersOverlap::Identity,
        BurgersOverlap::Shift,
        BurgersOverlap::ShiftAdjoint,
        BurgersOverlap::ShiftDiag,
        BurgersOverlap::ShiftAdjointDiag,
    ];

    /// Direct evaluation on state vectors.
    pub fn algebraic(self, prev: &StateVector, psi: &StateVector) -> C64 {
        let p = prev.amplitudes();
        let q = psi.amplitudes();
        let n = p.len();
        let up = |k: usize| (k + 1) % n;
        let down = |k: usize| (k + n - 1) % n;
        (0..n)
            .map(|k| match self {
                BurgersOverlap::Identity => p[k].conj() * q[k],
                BurgersOverlap::Shift => p[k].conj() * q[up(k)],
                BurgersOverlap::ShiftAdjoint => p[k].conj() * q[down(k)],
                BurgersOverlap::ShiftDiag => p[k].conj() * p[up(k)].conj() * q[up(k)],
                BurgersOverlap::ShiftAdjointDiag => p[k].conj() * p[down(k)].conj() * q[down(k)],
            })
            .sum()
    }

    /// Real part of the overlap from a Hadamard test in which the
    /// preparation of the first input port is controlled as well: `U~` runs
    /// uncontrolled, then the ancilla controls `X U U~^dag` on it.
    pub fn circuit(self, prev: &Circuit, trial: &Circuit) -> Result<f64> {
        require_plain_prep(prev)?;
        require_plain_prep(trial)?;
        let n = prev.n_register;
        if trial.n_register != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: trial.n_register,
            });
        }
        let with_diag = matches!(self, BurgersOverlap::ShiftDiag | BurgersOverlap::ShiftAdjointDiag);
        let with_shift = !matches!(self, BurgersOverlap::Identity);
        let r2 = if with_diag { n } else { 0 };
        let work = if with_shift { work_ancillas(n) } else { 0 };
        let total = n + r2 + work + 1;
        let anc = total - 1;
        let mut before = Circuit::new(total, 0);
        before.append_at(prev, 0)?;
        let mut inner = Circuit::new(total, 0);
        inner.append_at(&prev.inverse(), 0)?;
        inner.append_at(trial, 0)?;
        let r1: Vec<usize> = (0..n).collect();
        if with_diag {
            inner.append_at(&prev.conj(), n)?;
            let r2q: Vec<usize> = (n..2 * n).collect();
            for g in pairing(&r1, &r2q) {
                inner.push(g)?;
            }
        }
        if with_shift {
            let wk: Vec<usize> = (n + r2..n + r2 + work).collect();
            let mut shift = Circuit::new(total, 0);
            for mut g in adder_gates(&r1, &wk, anc) {
                strip_control(&mut g, anc);
                shift.push(g)?;
            }
            if matches!(self, BurgersOverlap::ShiftAdjoint | BurgersOverlap::ShiftAdjointDiag) {
                shift = shift.inverse();
            }
            for g in shift.gates {
                inner.push(g)?;
            }
        }
        hadamard_test(total, anc, &before, &inner)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::{build_brickwall, AnsatzSpec, param_count};
    use crate::grid::build_grid;
    use rand::Rng;

    fn random_prep(n: usize, seed: u64) -> Circuit {
        let spec = AnsatzSpec::new(n, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p: Vec<f64> = (0..param_count(&spec).unwrap())
            .map(|_| rng.random_range(-PI..PI))
            .collect();
        build_brickwall(&spec, &p).unwrap()
    }

    /// Brick wall followed by random single-qubit phases, for complex states.
    fn random_complex_prep(n: usize, seed: u64) -> Circuit {
        let mut c = random_prep(n, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcdef);
        for q in 0..n {
            c.push(Gate::phase(rng.random_range(-PI..PI), q)).unwrap();
            c.push(Gate::h(q)).unwrap();
            c.push(Gate::phase(rng.random_range(-PI..PI), q)).unwrap();
        }
        c
    }

    fn down_shift(n: usize) -> DMatrix<C64> {
        let dim = 1usize << n;
        let mut m = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
        for j in 0..dim {
            m[((j + dim - 1) % dim, j)] = C64::new(1.0, 0.0);
        }
        m
    }

    #[test]
    fn adder_counts() {
        let a = build_adder(1).unwrap();
        assert_eq!((a.work, a.counts().cnot, a.counts().toffoli), (0, 1, 0));
        let a = build_adder(2).unwrap();
        assert_eq!((a.work, a.counts().cnot, a.counts().toffoli), (0, 1, 1));
        for n in 3..=8 {
            let a = build_adder(n).unwrap();
            let c = a.counts();
            assert_eq!(a.work, n - 2);
            assert_eq!(c.cnot, n - 2);
            assert_eq!(c.toffoli, 2 * n - 2);
            assert_eq!(c.not + c.other, 0);
        }
        assert!(build_adder(0).is_err());
    }

    #[test]
    fn adder_two_qubit_example() {
        let a = build_adder(2).unwrap();
        let m = a.register_matrix();
        assert_eq!(m[(3, 0)], C64::new(1.0, 0.0));
    }

    #[test]
    fn adder_is_down_shift_and_restores_ancillas() {
        for n in 1..=6 {
            let a = build_adder(n).unwrap();
            let diff = (a.register_matrix() - down_shift(n)).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(diff < 1e-12, "n = {n}");
            // control off: identity; work ancillas always return to 0
            let total = a.circuit.n_qubits();
            for j in 0..1usize << n {
                for ctrl in 0..2usize {
                    let idx = (j << (total - n)) | ctrl;
                    let mut s = StateVector::basis(total, idx).unwrap();
                    s.apply_circuit(&a.circuit).unwrap();
                    let work: Vec<usize> = (n..n + a.work).collect();
                    assert!((s.prob_all_zero(&work) - 1.0).abs() < 1e-12);
                    if ctrl == 0 {
                        assert!((s.amplitudes()[idx].re - 1.0).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn qft_diagonalizes_adder() {
        for n in 1..=6 {
            let a = down_shift(n);
            let f = crate::statevector::qft_circuit(n).dense_matrix();
            let d = &f * a * f.adjoint();
            let dim = 1usize << n;
            for i in 0..dim {
                for j in 0..dim {
                    if i != j {
                        assert!(d[(i, j)].norm() < 1e-9);
                    }
                }
                let expected = C64::from_polar(1.0, -2.0 * PI * i as f64 / dim as f64);
                assert!((d[(i, i)] - expected).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn kinetic_examples() {
        let grid = build_grid(3, 0.0, 1.0).unwrap();
        let mut uniform = Circuit::new(3, 0);
        for q in 0..3 {
            uniform.push(Gate::h(q)).unwrap();
        }
        let (r, k) = kinetic_qnpu(&uniform, &grid, EvalPath::Circuit).unwrap();
        assert!((r.sigma_z - 1.0).abs() < 1e-12 && k.abs() < 1e-9);
        let (r, k) = kinetic_qnpu(&Circuit::new(3, 0), &grid, EvalPath::Circuit).unwrap();
        assert!(r.sigma_z.abs() < 1e-12);
        assert!((k - 64.0).abs() < 1e-9);
    }

    #[test]
    fn qnpu_paths_agree() {
        for n in 1..=4usize {
            let grid = build_grid(n as u32, 0.0, 1.0).unwrap();
            for seed in 0..5 {
                let prep = if n >= 2 { random_complex_prep(n, seed) } else {
                    let mut c = Circuit::new(1, 0);
                    c.push(Gate::ry(0.3 + seed as f64, 0)).unwrap();
                    c
                };
                let (r, _) = kinetic_qnpu(&prep, &grid, EvalPath::Circuit).unwrap();
                assert!((r.sigma_z - r.algebraic).abs() < 1e-9);
                let r = nonlinear_qnpu(&prep, EvalPath::Circuit).unwrap();
                assert!((r.sigma_z - r.algebraic).abs() < 1e-9);
                if n >= 2 {
                    let pot = random_prep(n, seed + 100);
                    let (r, p) = potential_qnpu(&prep, &pot, 2.0, EvalPath::Circuit).unwrap();
                    assert!((r.sigma_z - r.algebraic).abs() < 1e-9);
                    assert!((p - 2.0 * r.sigma_z).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn nonlinear_examples() {
        let mut basis = Circuit::new(3, 0);
        basis.push(Gate::x(1)).unwrap();
        let r = nonlinear_qnpu(&basis, EvalPath::Circuit).unwrap();
        assert!((r.sigma_z - 1.0).abs() < 1e-12);
        let mut uniform = Circuit::new(3, 0);
        for q in 0..3 {
            uniform.push(Gate::h(q)).unwrap();
        }
        let r = nonlinear_qnpu(&uniform, EvalPath::Circuit).unwrap();
        assert!((r.sigma_z - 0.125).abs() < 1e-12);
    }

    #[test]
    fn potential_uniform_direction() {
        let mut uniform = Circuit::new(2, 0);
        uniform.push(Gate::h(0)).unwrap();
        uniform.push(Gate::h(1)).unwrap();
        let prep = random_prep(2, 7);
        let (r, _) = potential_qnpu(&prep, &uniform, 1.0, EvalPath::Circuit).unwrap();
        assert!((r.sigma_z - 0.5).abs() < 1e-12);
        assert!(potential_qnpu(&prep, &Circuit::new(3, 0), 1.0, EvalPath::Circuit).is_err());
    }

    #[test]
    fn readout_examples() {
        let id = Circuit::new(3, 0);
        assert!((readout_amplitude(&id, 0, Part::Real).unwrap() - 1.0).abs() < 1e-12);
        for k in 1..8 {
            assert!(readout_amplitude(&id, k, Part::Real).unwrap().abs() < 1e-12);
        }
        assert!(readout_amplitude(&id, 8, Part::Real).is_err());
        let prep = random_complex_prep(3, 4);
        let psi = prep.prepare();
        for k in 0..8 {
            let re = readout_amplitude(&prep, k, Part::Real).unwrap();
            let im = readout_amplitude(&prep, k, Part::Imaginary).unwrap();
            assert!((re - psi.amplitudes()[k].re).abs() < 1e-10);
            assert!((im - psi.amplitudes()[k].im).abs() < 1e-10);
        }
    }

    #[test]
    fn coarse_readout() {
        let prep = random_prep(4, 9);
        let psi = prep.prepare();
        let full = coarse_average_readout(&prep, 4).unwrap();
        for (k, v) in full.iter().enumerate() {
            assert!((v - psi.amplitudes()[k].re).abs() < 1e-10);
        }
        let coarse = coarse_average_readout(&prep, 2).unwrap();
        for (c, v) in coarse.iter().enumerate() {
            let direct: f64 = (0..4).map(|f| psi.amplitudes()[c * 4 + f].re).sum::<f64>() / 2.0;
            assert!((v - direct).abs() < 1e-10);
        }
        let mut uniform = Circuit::new(4, 0);
        for q in 0..4 {
            uniform.push(Gate::h(q)).unwrap();
        }
        let flat = coarse_average_readout(&uniform, 3).unwrap();
        assert!(flat.iter().all(|v| (v - flat[0]).abs() < 1e-12));
        assert!(coarse_average_readout(&prep, 0).is_err());
        assert!(coarse_average_readout(&prep, 5).is_err());
    }

    #[test]
    fn sampling_examples() {
        let psi = random_prep(3, 1).prepare();
        assert_eq!(diagonal_sampling(&psi, &[1.0; 8], 100, 3).unwrap(), 1.0);
        let basis = StateVector::basis(3, 5).unwrap();
        let o: Vec<f64> = (0..8).map(|k| k as f64 * 0.5).collect();
        assert_eq!(diagonal_sampling(&basis, &o, 50, 1).unwrap(), 2.5);
        assert_eq!(
            diagonal_sampling(&psi, &o, 1000, 42).unwrap(),
            diagonal_sampling(&psi, &o, 1000, 42).unwrap()
        );
        assert!(diagonal_sampling(&psi, &o, 0, 1).is_err());
        assert!(diagonal_sampling(&psi, &o[..4], 10, 1).is_err());
    }

    #[test]
    fn laplace_sampling_examples() {
        let uniform = StateVector::uniform(4);
        assert!(laplace_sampling(&uniform, 100, 1).unwrap().abs() < 1e-9);
        // psi_k = exp(-2 pi i j k / N)/sqrt(N) is mapped to |j> by the QFT
        let j = 3usize;
        let amps: Vec<C64> = (0..16)
            .map(|k| C64::from_polar(0.25, -2.0 * PI * (j * k) as f64 / 16.0))
            .collect();
        let wave = StateVector::from_amplitudes(amps).unwrap();
        let spec = laplacian_spectrum(16);
        assert!((laplace_sampling(&wave, 100, 1).unwrap() - spec[j]).abs() < 1e-6);
    }

    #[test]
    fn burgers_overlap_paths_agree() {
        for n in 1..=4usize {
            for seed in 0..3 {
                let (prev, trial) = if n == 1 {
                    let mut a = Circuit::new(1, 0);
                    a.push(Gate::ry(0.4 + seed as f64, 0)).unwrap();
                    let mut b = Circuit::new(1, 0);
                    b.push(Gate::ry(-1.1 + seed as f64, 0)).unwrap();
                    (a, b)
                } else {
                    (random_complex_prep(n, seed), random_complex_prep(n, seed + 50))
                };
                let p = prev.prepare();
                let q = trial.prepare();
                for o in BurgersOverlap::ALL {
                    let c = o.circuit(&prev, &trial).unwrap();
                    assert!((c - o.algebraic(&p, &q).re).abs() < 1e-9, "{o:?} n={n}");
                }
            }
        }
    }
}
