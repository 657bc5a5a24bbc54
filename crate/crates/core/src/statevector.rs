//! Dense state-vector simulation.
//!
//! Qubit `0` is the most significant bit of the basis index, so a register of
//! `n` qubits holding `|q_0 q_1 ... q_{n-1}>` sits at index
//! `k = sum_j q_j 2^(n-1-j)`. When a circuit carries ancillas they follow the
//! register qubits, which puts the register in the high bits of the index.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

const UNITARY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// `|0...0>` on `n` qubits.
    pub fn zero(n: usize) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
        amps[0] = C64::new(1.0, 0.0);
        Self { n, amps }
    }

    pub fn basis(n: usize, k: usize) -> Result<Self> {
        let dim = 1usize << n;
        if k >= dim {
            return Err(Error::OutOfRange { index: k, limit: dim });
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[k] = C64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    /// Wraps raw amplitudes without normalizing them.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let len = amps.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "amplitude count {len} is not a power of two"
            )));
        }
        Ok(Self {
            n: len.trailing_zeros() as usize,
            amps,
        })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::from_amplitudes(values.iter().map(|&v| C64::new(v, 0.0)).collect())
    }

    /// Uniform superposition over all basis states.
    pub fn uniform(n: usize) -> Self {
        let dim = 1usize << n;
        let a = 1.0 / (dim as f64).sqrt();
        Self {
            n,
            amps: vec![C64::new(a, 0.0); dim],
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.re).collect()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Rescales to unit norm and returns the previous norm.
    pub fn normalize(&mut self) -> Result<f64> {
        let norm = self.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroNorm);
        }
        let inv = 1.0 / norm;
        self.amps.iter_mut().for_each(|a| *a *= inv);
        Ok(norm)
    }

    pub fn conj(&self) -> Self {
        Self {
            n: self.n,
            amps: self.amps.iter().map(|a| a.conj()).collect(),
        }
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: other.n,
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `self ⊗ other`, with `self` occupying the high (leading) qubits.
    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let mut amps = Vec::with_capacity(self.len() * other.len());
        for a in &self.amps {
            amps.extend(other.amps.iter().map(|b| a * b));
        }
        StateVector {
            n: self.n + other.n,
            amps,
        }
    }

    /// Pads with `extra` trailing qubits in `|0>`.
    pub fn extend_zeros(&self, extra: usize) -> StateVector {
        self.tensor(&StateVector::zero(extra))
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        gate.check_width(self.n)?;
        let kernel = GateKernel::new(gate, self.n);
        let m = gate.matrix();
        let dim = kernel.offsets.len();
        let mut buf = vec![C64::new(0.0, 0.0); dim];
        for base in kernel.bases() {
            for (slot, off) in buf.iter_mut().zip(&kernel.offsets) {
                *slot = self.amps[base | off];
            }
            for (r, off) in kernel.offsets.iter().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for (c, v) in buf.iter().enumerate() {
                    acc += m[(r, c)] * v;
                }
                self.amps[base | off] = acc;
            }
        }
        Ok(())
    }

    pub fn apply_circuit(&mut self, circuit: &Circuit) -> Result<()> {
        if circuit.n_qubits() != self.n {
            return Err(Error::DimensionMismatch {
                expected: circuit.n_qubits(),
                actual: self.n,
            });
        }
        for gate in &circuit.gates {
            self.apply_gate(gate)?;
        }
        Ok(())
    }

    /// `<sigma_z>` of one qubit: +1 weight where the bit is 0, -1 where it is 1.
    pub fn sigma_z(&self, qubit: usize) -> Result<f64> {
        if qubit >= self.n {
            return Err(Error::OutOfRange {
                index: qubit,
                limit: self.n,
            });
        }
        let mask = 1usize << (self.n - 1 - qubit);
        Ok(self
            .amps
            .iter()
            .enumerate()
            .map(|(i, a)| {
                if i & mask == 0 {
                    a.norm_sqr()
                } else {
                    -a.norm_sqr()
                }
            })
            .sum())
    }

    /// Probability that `qubits` all read 0.
    pub fn prob_all_zero(&self, qubits: &[usize]) -> f64 {
        let mask = qubits
            .iter()
            .fold(0usize, |m, &q| m | (1usize << (self.n - 1 - q)));
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask == 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Register amplitudes where the trailing `n - keep` qubits are all 0.
    pub fn project_leading(&self, keep: usize) -> StateVector {
        let shift = self.n - keep;
        let amps = (0..1usize << keep).map(|k| self.amps[k << shift]).collect();
        StateVector { n: keep, amps }
    }
}

/// Bit of qubit `j` (0 = most significant) in the `n`-qubit index `k`.
pub fn qubit_bit(n: usize, k: usize, j: usize) -> usize {
    (k >> (n - 1 - j)) & 1
}

pub fn init_basis(n: usize, k: usize) -> Result<StateVector> {
    StateVector::basis(n, k)
}

pub fn apply_circuit(state: &StateVector, circuit: &Circuit) -> Result<StateVector> {
    let mut out = state.clone();
    out.apply_circuit(circuit)?;
    Ok(out)
}

pub fn inner(u: &StateVector, v: &StateVector) -> Result<C64> {
    u.inner(v)
}

pub fn ancilla_sigma_z(state: &StateVector, ancilla_index: usize) -> Result<f64> {
    state.sigma_z(ancilla_index)
}

/// Quantum Fourier transform of the whole register,
/// `phi_j = N^{-1/2} sum_k exp(2 pi i j k / N) psi_k`, emulated gate by gate.
pub fn qft(state: &StateVector) -> StateVector {
    let mut out = state.clone();
    out.apply_circuit(&qft_circuit(state.n_qubits()))
        .expect("qft circuit matches register width");
    out
}

/// Textbook QFT circuit: Hadamards, controlled phases, final bit reversal.
pub fn qft_circuit(n: usize) -> Circuit {
    let mut c = Circuit::new(n, 0);
    for j in 0..n {
        c.push_unchecked(Gate::h(j));
        for m in 2..=(n - j) {
            let control = j + m - 1;
            let phi = 2.0 * std::f64::consts::PI / (1u64 << m) as f64;
            c.push_unchecked(Gate::phase(phi, j).with_control(control));
        }
    }
    for j in 0..n / 2 {
        c.push_unchecked(Gate::swap(j, n - 1 - j));
    }
    c
}

/// Index bookkeeping for applying a gate to a state of a given width.
struct GateKernel {
    offsets: Vec<usize>,
    fixed_sorted: Vec<usize>,
    control_mask: usize,
    free_bits: usize,
}

impl GateKernel {
    fn new(gate: &Gate, n: usize) -> Self {
        let pos = |q: usize| n - 1 - q;
        let m = gate.targets.len();
        let offsets = (0..1usize << m)
            .map(|a| {
                (0..m).fold(0usize, |acc, r| {
                    if (a >> (m - 1 - r)) & 1 == 1 {
                        acc | (1usize << pos(gate.targets[r]))
                    } else {
                        acc
                    }
                })
            })
            .collect();
        let mut fixed_sorted: Vec<usize> = gate
            .targets
            .iter()
            .chain(&gate.controls)
            .map(|&q| pos(q))
            .collect();
        fixed_sorted.sort_unstable();
        let control_mask = gate
            .controls
            .iter()
            .fold(0usize, |acc, &q| acc | (1usize << pos(q)));
        Self {
            offsets,
            free_bits: n - fixed_sorted.len(),
            fixed_sorted,
            control_mask,
        }
    }

    /// Every index whose target bits are 0 and control bits are 1.
    fn bases(&self) -> impl Iterator<Item = usize> + '_ {
        (0..1usize << self.free_bits).map(move |mut x| {
            for &p in &self.fixed_sorted {
                x = ((x >> p) << (p + 1)) | (x & ((1usize << p) - 1));
            }
            x | self.control_mask
        })
    }
}

/// Environment matrix `R[a][b] = sum_r phi[a, r] conj(chi[b, r])` of the
/// qubits `targets`, so that `<chi|U|phi> = tr(U R)` for a gate `U` on them.
pub fn environment(phi: &StateVector, chi: &StateVector, targets: &[usize]) -> DMatrix<C64> {
    let probe = Gate {
        matrix: DMatrix::identity(1 << targets.len(), 1 << targets.len()),
        targets: targets.to_vec(),
        controls: vec![],
    };
    let kernel = GateKernel::new(&probe, phi.n);
    let dim = kernel.offsets.len();
    let mut r = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
    for base in kernel.bases() {
        for (a, oa) in kernel.offsets.iter().enumerate() {
            let pa = phi.amps[base | oa];
            if pa == C64::new(0.0, 0.0) {
                continue;
            }
            for (b, ob) in kernel.offsets.iter().enumerate() {
                r[(a, b)] += pa * chi.amps[base | ob].conj();
            }
        }
    }
    r
}

/// A (possibly controlled) unitary block on an ordered list of target qubits.
/// `targets[0]` is the most significant bit of the block's matrix index.
#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    matrix: DMatrix<C64>,
    targets: Vec<usize>,
    controls: Vec<usize>,
}

impl Gate {
    pub fn new(matrix: DMatrix<C64>, targets: Vec<usize>, controls: Vec<usize>) -> Result<Self> {
        let dim = 1usize << targets.len();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: matrix.nrows(),
            });
        }
        let mut all: Vec<usize> = targets.iter().chain(&controls).copied().collect();
        all.sort_unstable();
        all.dedup();
        if all.len() != targets.len() + controls.len() {
            return Err(Error::InvalidArgument(
                "gate targets and controls must be distinct".into(),
            ));
        }
        let defect = (matrix.adjoint() * &matrix - DMatrix::<C64>::identity(dim, dim))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if defect > UNITARY_TOL {
            return Err(Error::InvalidArgument(format!(
                "gate matrix is not unitary (defect {defect:e})"
            )));
        }
        Ok(Self {
            matrix,
            targets,
            controls,
        })
    }

    fn fixed(matrix: DMatrix<C64>, targets: Vec<usize>) -> Self {
        Self {
            matrix,
            targets,
            controls: vec![],
        }
    }

    fn single(m: [[C64; 2]; 2], q: usize) -> Self {
        Self::fixed(
            DMatrix::from_row_slice(2, 2, &[m[0][0], m[0][1], m[1][0], m[1][1]]),
            vec![q],
        )
    }

    pub fn h(q: usize) -> Self {
        let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self::single([[s, s], [s, -s]], q)
    }

    pub fn x(q: usize) -> Self {
        let (o, l) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
        Self::single([[o, l], [l, o]], q)
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Self::x(target).with_control(control)
    }

    pub fn toffoli(c1: usize, c2: usize, target: usize) -> Self {
        Self::x(target).with_control(c1).with_control(c2)
    }

    /// `R_y(theta) = exp(-i theta sigma_y / 2)`.
    pub fn ry(theta: f64, q: usize) -> Self {
        let (s, c) = (0.5 * theta).sin_cos();
        Self::single(
            [
                [C64::new(c, 0.0), C64::new(-s, 0.0)],
                [C64::new(s, 0.0), C64::new(c, 0.0)],
            ],
            q,
        )
    }

    /// Phase shift `diag(1, e^{i phi})`.
    pub fn phase(phi: f64, q: usize) -> Self {
        let (o, l) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
        Self::single([[l, o], [o, C64::from_polar(1.0, phi)]], q)
    }

    pub fn swap(a: usize, b: usize) -> Self {
        let mut m = DMatrix::from_element(4, 4, C64::new(0.0, 0.0));
        for (r, c) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
            m[(r, c)] = C64::new(1.0, 0.0);
        }
        Self::fixed(m, vec![a, b])
    }

    /// Builds a gate from a real orthogonal matrix.
    pub fn real(matrix: &DMatrix<f64>, targets: Vec<usize>) -> Result<Self> {
        Self::new(matrix.map(|v| C64::new(v, 0.0)), targets, vec![])
    }

    pub fn with_control(mut self, control: usize) -> Self {
        debug_assert!(!self.targets.contains(&control) && !self.controls.contains(&control));
        self.controls.push(control);
        self
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
            targets: self.targets.clone(),
            controls: self.controls.clone(),
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            matrix: self.matrix.map(|z| z.conj()),
            targets: self.targets.clone(),
            controls: self.controls.clone(),
        }
    }

    pub fn remapped(&self, map: &[usize]) -> Self {
        Self {
            matrix: self.matrix.clone(),
            targets: self.targets.iter().map(|&q| map[q]).collect(),
            controls: self.controls.iter().map(|&q| map[q]).collect(),
        }
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn set_matrix(&mut self, matrix: DMatrix<C64>) {
        debug_assert_eq!(matrix.nrows(), self.matrix.nrows());
        self.matrix = matrix;
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn controls(&self) -> &[usize] {
        &self.controls
    }

    /// Largest qubit index touched, plus one.
    pub fn width(&self) -> usize {
        self.targets
            .iter()
            .chain(&self.controls)
            .max()
            .map_or(0, |&q| q + 1)
    }

    /// True for a single-target NOT.
    pub fn is_not(&self) -> bool {
        self.targets.len() == 1
            && (self.matrix[(0, 0)].norm() < 1e-14)
            && (self.matrix[(0, 1)] - C64::new(1.0, 0.0)).norm() < 1e-14
            && (self.matrix[(1, 0)] - C64::new(1.0, 0.0)).norm() < 1e-14
    }

    pub fn is_real(&self) -> bool {
        self.matrix.iter().all(|z| z.im.abs() < 1e-14)
    }

    fn check_width(&self, n: usize) -> Result<()> {
        let w = self.width();
        if w > n {
            return Err(Error::OutOfRange {
                index: w - 1,
                limit: n,
            });
        }
        Ok(())
    }
}

/// Ordered gate list over `n_register + n_ancilla` qubits; the register
/// comes first.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    pub n_register: usize,
    pub n_ancilla: usize,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_register: usize, n_ancilla: usize) -> Self {
        Self {
            n_register,
            n_ancilla,
            gates: Vec::new(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_register + self.n_ancilla
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.check_width(self.n_qubits())?;
        self.gates.push(gate);
        Ok(())
    }

    pub(crate) fn push_unchecked(&mut self, gate: Gate) {
        debug_assert!(gate.width() <= self.n_qubits());
        self.gates.push(gate);
    }

    /// Appends `other` with its qubit `q` mapped to `map[q]`.
    pub fn append_mapped(&mut self, other: &Circuit, map: &[usize]) -> Result<()> {
        if map.len() < other.n_qubits() {
            return Err(Error::DimensionMismatch {
                expected: other.n_qubits(),
                actual: map.len(),
            });
        }
        for g in &other.gates {
            self.push(g.remapped(map))?;
        }
        Ok(())
    }

    /// Appends `other` on qubits `offset..offset + other.n_qubits()`.
    pub fn append_at(&mut self, other: &Circuit, offset: usize) -> Result<()> {
        let map: Vec<usize> = (offset..offset + other.n_qubits()).collect();
        self.append_mapped(other, &map)
    }

    /// Gate-wise adjoint in reverse order.
    pub fn inverse(&self) -> Circuit {
        Circuit {
            n_register: self.n_register,
            n_ancilla: self.n_ancilla,
            gates: self.gates.iter().rev().map(Gate::adjoint).collect(),
        }
    }

    /// Element-wise complex conjugate, preparing `U*|0>`.
    pub fn conj(&self) -> Circuit {
        Circuit {
            n_register: self.n_register,
            n_ancilla: self.n_ancilla,
            gates: self.gates.iter().map(Gate::conj).collect(),
        }
    }

    /// Adds `control` to every gate.
    pub fn controlled_by(&self, control: usize) -> Circuit {
        Circuit {
            n_register: self.n_register,
            n_ancilla: self.n_ancilla,
            gates: self
                .gates
                .iter()
                .map(|g| g.clone().with_control(control))
                .collect(),
        }
    }

    /// State obtained from `|0...0>` on all qubits.
    pub fn prepare(&self) -> StateVector {
        let mut s = StateVector::zero(self.n_qubits());
        s.apply_circuit(self).expect("widths agree");
        s
    }

    /// Register state prepared from `|0...0>`, assuming ancillas return to 0.
    pub fn prepare_register(&self) -> StateVector {
        self.prepare().project_leading(self.n_register)
    }

    /// Dense unitary on all qubits. Column `j` is the image of basis state `j`.
    pub fn dense_matrix(&self) -> DMatrix<C64> {
        let n = self.n_qubits();
        let dim = 1usize << n;
        let mut m = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
        for j in 0..dim {
            let mut s = StateVector::basis(n, j).expect("in range");
            s.apply_circuit(self).expect("widths agree");
            for (i, a) in s.amps.iter().enumerate() {
                m[(i, j)] = *a;
            }
        }
        m
    }

    pub fn is_real(&self) -> bool {
        self.gates.iter().all(Gate::is_real)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C64, b: C64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn basis_states() {
        let s = init_basis(2, 0).unwrap();
        assert_eq!(s.real_parts(), vec![1.0, 0.0, 0.0, 0.0]);
        let s = init_basis(2, 3).unwrap();
        assert_eq!(s.real_parts(), vec![0.0, 0.0, 0.0, 1.0]);
        let s = init_basis(1, 1).unwrap();
        assert_eq!(s.real_parts(), vec![0.0, 1.0]);
        assert!(matches!(init_basis(2, 4), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn bit_order_is_msb_first() {
        let n = 4;
        for k in 0..16 {
            let s = init_basis(n, k).unwrap();
            for j in 0..n {
                let expect = if (k >> (n - 1 - j)) & 1 == 1 { -1.0 } else { 1.0 };
                assert_eq!(s.sigma_z(j).unwrap(), expect);
            }
        }
    }

    #[test]
    fn hadamard_on_one_qubit() {
        let mut c = Circuit::new(1, 0);
        c.push(Gate::h(0)).unwrap();
        let s = apply_circuit(&StateVector::zero(1), &c).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!(close(s.amplitudes()[0], C64::new(r, 0.0)));
        assert!(close(s.amplitudes()[1], C64::new(r, 0.0)));
    }

    #[test]
    fn empty_circuit_is_identity() {
        let s = StateVector::uniform(3);
        let out = apply_circuit(&s, &Circuit::new(3, 0)).unwrap();
        assert_eq!(s, out);
    }

    #[test]
    fn controlled_gate_only_acts_on_control_one() {
        let mut c = Circuit::new(2, 0);
        c.push(Gate::cnot(0, 1)).unwrap();
        let out = apply_circuit(&init_basis(2, 2).unwrap(), &c).unwrap();
        assert_eq!(out.real_parts(), vec![0.0, 0.0, 0.0, 1.0]);
        let out = apply_circuit(&init_basis(2, 1).unwrap(), &c).unwrap();
        assert_eq!(out.real_parts(), vec![0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn qft_of_zero_and_uniform() {
        let s = qft(&StateVector::zero(2));
        for a in s.amplitudes() {
            assert!(close(*a, C64::new(0.5, 0.0)));
        }
        let back = qft(&StateVector::uniform(2));
        assert!(close(back.amplitudes()[0], C64::new(1.0, 0.0)));
        for a in &back.amplitudes()[1..] {
            assert!(a.norm() < 1e-12);
        }
    }

    #[test]
    fn sigma_z_of_single_ancilla() {
        let zero = StateVector::uniform(2).tensor(&StateVector::zero(1));
        assert!((zero.sigma_z(2).unwrap() - 1.0).abs() < 1e-15);
        let one = StateVector::uniform(2).tensor(&init_basis(1, 1).unwrap());
        assert!((one.sigma_z(2).unwrap() + 1.0).abs() < 1e-15);
        let plus = StateVector::uniform(2).tensor(&StateVector::uniform(1));
        assert!(plus.sigma_z(2).unwrap().abs() < 1e-15);
        assert!(plus.sigma_z(3).is_err());
    }

    #[test]
    fn inner_products() {
        let u = StateVector::uniform(3);
        assert!(close(u.inner(&u).unwrap(), C64::new(1.0, 0.0)));
        let z = init_basis(3, 0).unwrap();
        let o = init_basis(3, 1).unwrap();
        assert!(close(z.inner(&o).unwrap(), C64::new(0.0, 0.0)));
        let k = init_basis(3, 5).unwrap();
        assert!(close(u.inner(&k).unwrap(), C64::new(1.0 / 8f64.sqrt(), 0.0)));
        assert!(u.inner(&StateVector::zero(2)).is_err());
    }

    #[test]
    fn rejects_non_unitary_and_overlapping() {
        let m = DMatrix::from_element(2, 2, C64::new(1.0, 0.0));
        assert!(Gate::new(m, vec![0], vec![]).is_err());
        let id = DMatrix::identity(2, 2);
        assert!(Gate::new(id, vec![0], vec![0]).is_err());
    }

    #[test]
    fn width_mismatch_is_reported() {
        let mut c = Circuit::new(3, 0);
        c.push(Gate::h(2)).unwrap();
        let mut s = StateVector::zero(2);
        assert!(matches!(
            s.apply_circuit(&c),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(c.push(Gate::h(3)).is_err());
    }
}
