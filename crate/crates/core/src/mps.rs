//! Matrix product states: construction, analytic function states, QR-based
//! compilation into a staircase circuit, and entanglement diagnostics.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::statevector::{Circuit, Gate, StateVector, C64};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Site tensor `B^q` for `q = 0, 1`, each a `left x right` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SiteTensor {
    pub b: [DMatrix<C64>; 2],
}

impl SiteTensor {
    pub fn new(b0: DMatrix<C64>, b1: DMatrix<C64>) -> Result<Self> {
        if b0.shape() != b1.shape() {
            return Err(Error::DimensionMismatch {
                expected: b0.nrows() * b0.ncols(),
                actual: b1.nrows() * b1.ncols(),
            });
        }
        Ok(Self { b: [b0, b1] })
    }

    pub fn left(&self) -> usize {
        self.b[0].nrows()
    }

    pub fn right(&self) -> usize {
        self.b[0].ncols()
    }

    /// `(left * 2) x right` matrix with row index `alpha * 2 + q`.
    fn stacked(&self) -> DMatrix<C64> {
        let (l, r) = (self.left(), self.right());
        DMatrix::from_fn(2 * l, r, |row, c| self.b[row % 2][(row / 2, c)])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mps {
    tensors: Vec<SiteTensor>,
}

impl Mps {
    pub fn new(tensors: Vec<SiteTensor>) -> Result<Self> {
        if tensors.is_empty() {
            return Err(Error::InvalidArgument("MPS needs at least one site".into()));
        }
        if tensors[0].left() != 1 || tensors[tensors.len() - 1].right() != 1 {
            return Err(Error::InvalidArgument("boundary bonds must have dimension 1".into()));
        }
        for w in tensors.windows(2) {
            if w[0].right() != w[1].left() {
                return Err(Error::DimensionMismatch {
                    expected: w[0].right(),
                    actual: w[1].left(),
                });
            }
        }
        Ok(Self { tensors })
    }

    pub fn n_sites(&self) -> usize {
        self.tensors.len()
    }

    pub fn tensors(&self) -> &[SiteTensor] {
        &self.tensors
    }

    pub fn bond_dims(&self) -> Vec<usize> {
        self.tensors[..self.n_sites() - 1].iter().map(SiteTensor::right).collect()
    }

    pub fn max_bond(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    /// `sqrt(<m|m>)` by transfer-matrix contraction.
    pub fn norm(&self) -> f64 {
        let mut env = DMatrix::from_element(1, 1, ONE);
        for t in &self.tensors {
            env = t.b[0].adjoint() * &env * &t.b[0] + t.b[1].adjoint() * &env * &t.b[1];
        }
        env[(0, 0)].re.max(0.0).sqrt()
    }

    /// Amplitude of basis index `k` (site 1 most significant).
    pub fn amplitude(&self, k: usize) -> C64 {
        let n = self.n_sites();
        let mut v = DMatrix::from_element(1, 1, ONE);
        for (j, t) in self.tensors.iter().enumerate() {
            v = v * &t.b[(k >> (n - 1 - j)) & 1];
        }
        v[(0, 0)]
    }

    fn scale_first(&mut self, f: C64) {
        for b in &mut self.tensors[0].b {
            *b *= f;
        }
    }
}

/// Random MPS with bonds `min(chi, 2^j, 2^(n-j))` and uniform complex
/// entries in the unit square.
pub fn random_mps(n: usize, chi: usize, seed: u64) -> Result<Mps> {
    if n < 1 || chi < 1 {
        return Err(Error::InvalidArgument("need n >= 1 and chi >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bond = |j: usize| -> usize {
        if j == 0 || j == n {
            1
        } else {
            let cap = 1usize << j.min(n - j).min(20);
            chi.min(cap)
        }
    };
    let tensors = (0..n)
        .map(|j| {
            let (l, r) = (bond(j), bond(j + 1));
            let mut draw = || {
                DMatrix::from_fn(l, r, |_, _| {
                    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                })
            };
            let b0 = draw();
            let b1 = draw();
            SiteTensor::new(b0, b1)
        })
        .collect::<Result<Vec<_>>>()?;
    Mps::new(tensors)
}

/// Contracts the chain into a normalized dense state; also returns the norm.
pub fn mps_to_dense(m: &Mps) -> Result<(StateVector, f64)> {
    let n = m.n_sites();
    if n > 24 {
        return Err(Error::InvalidArgument(format!("{n} sites is too many for a dense state")));
    }
    // rows: basis index of the sites so far, columns: open right bond
    let mut acc = DMatrix::from_element(1, 1, ONE);
    for t in m.tensors() {
        let rows = acc.nrows();
        let r = t.right();
        let mut next = DMatrix::from_element(rows * 2, r, ZERO);
        for q in 0..2 {
            let part = &acc * &t.b[q];
            for i in 0..rows {
                for c in 0..r {
                    next[(2 * i + q, c)] = part[(i, c)];
                }
            }
        }
        acc = next;
    }
    let mut psi = StateVector::from_amplitudes(acc.column(0).iter().copied().collect())?;
    let norm = psi.normalize()?;
    Ok((psi, norm))
}

/// Left-canonical MPS of `psi` by successive SVDs, keeping `chi` singular
/// values at every bond (zeros included, so inner bonds have the full
/// dimension `min(chi, 2^j, 2^(n-j))`).
pub fn dense_to_mps(psi: &StateVector, chi: usize) -> Result<Mps> {
    if chi == 0 {
        return Err(Error::InvalidArgument("bond dimension must be >= 1".into()));
    }
    let n = psi.n_qubits();
    let mut rest = DMatrix::from_row_slice(1, psi.len(), psi.amplitudes());
    let mut tensors = Vec::with_capacity(n);
    for _ in 0..n - 1 {
        let left = rest.nrows();
        let cols = rest.ncols() / 2;
        let m = DMatrix::from_fn(2 * left, cols, |row, c| rest[(row / 2, (row % 2) * cols + c)]);
        let d = crate::linalg::svd(&m);
        let k = chi.min(d.s.len());
        let b = |q: usize| DMatrix::from_fn(left, k, |a, j| d.u[(2 * a + q, j)]);
        tensors.push(SiteTensor::new(b(0), b(1))?);
        rest = DMatrix::from_fn(k, cols, |j, c| d.v[(c, j)].conj() * d.s[j]);
    }
    let left = rest.nrows();
    let b = |q: usize| DMatrix::from_fn(left, 1, |a, _| rest[(a, q)]);
    tensors.push(SiteTensor::new(b(0), b(1))?);
    Mps::new(tensors)
}

/// Plane wave `2^(-n/2) exp(i kappa sum_j q_j 2^(-j))`, a product state.
pub fn mps_plane_wave(kappa: f64, n: usize) -> Mps {
    plane_wave_sum(&[(ONE, kappa)], n)
}

/// `sum_t c_t exp(i kappa_t x)` as a diagonal MPS of bond dimension equal to
/// the number of terms, each plane wave carrying `2^(-n/2)`.
fn plane_wave_sum(terms: &[(C64, f64)], n: usize) -> Mps {
    let w = terms.len();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let tensors = (0..n)
        .map(|j| {
            let step = 0.5f64.powi(j as i32 + 1);
            let mk = |q: usize| {
                let phases: Vec<C64> = terms
                    .iter()
                    .map(|&(_, kappa)| C64::from_polar(s, kappa * step * q as f64))
                    .collect();
                let mut d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(phases));
                if j == 0 {
                    let coeffs = nalgebra::RowDVector::from_iterator(w, terms.iter().map(|t| t.0));
                    d = DMatrix::from_row_slice(1, w, coeffs.as_slice()) * d;
                }
                if j == n - 1 {
                    d = d * DMatrix::from_element(w, 1, ONE);
                }
                d
            };
            SiteTensor { b: [mk(0), mk(1)] }
        })
        .collect();
    Mps { tensors }
}

fn normalized_function(terms: &[(C64, f64)], n: usize) -> Result<Mps> {
    let mut m = plane_wave_sum(terms, n);
    let norm = m.norm();
    let scale: f64 = terms.iter().map(|t| t.0.norm_sqr()).sum::<f64>().sqrt();
    if !(norm > 1e-10 * scale) {
        return Err(Error::DegenerateFunction);
    }
    m.scale_first(C64::new(1.0 / norm, 0.0));
    Ok(m)
}

/// Normalized `sin(kappa x)` on the unit interval, bond dimension 2.
pub fn mps_sine(kappa: f64, n: usize) -> Result<Mps> {
    let c = C64::new(0.0, -0.5);
    normalized_function(&[(c, kappa), (-c, -kappa)], n)
}

/// Normalized `s1 sin(kappa1 x) + s2 sin(kappa2 x)`, bond dimension 4.
pub fn mps_two_sines(s1: f64, s2: f64, kappa1: f64, kappa2: f64, n: usize) -> Result<Mps> {
    let c1 = C64::new(0.0, -0.5 * s1);
    let c2 = C64::new(0.0, -0.5 * s2);
    normalized_function(&[(c1, kappa1), (-c1, -kappa1), (c2, kappa2), (-c2, -kappa2)], n)
}

/// Circuit preparing the plane wave: a Hadamard and a phase gate per qubit.
pub fn plane_wave_circuit(kappa: f64, n: usize) -> Circuit {
    let mut c = Circuit::new(n, 0);
    for j in 0..n {
        c.push_unchecked(Gate::h(j));
        c.push_unchecked(Gate::phase(kappa * 0.5f64.powi(j as i32 + 1), j));
    }
    c
}

#[derive(Clone, Debug)]
pub struct CompiledMps {
    pub circuit: Circuit,
    /// Number of qubits each staircase unitary acts on, `s + 1`.
    pub block_qubits: usize,
    /// Number of staircase unitaries, `n - s`.
    pub unitaries: usize,
    /// Two-qubit gate count after decomposing the blocks: `n - 1` for
    /// two-qubit blocks, `5 (n - 2) + 1` for three-qubit blocks, `None` for
    /// larger blocks.
    pub depth_two_qubit: Option<usize>,
    pub norm_factor: f64,
}

/// QR with the diagonal of `R` made real and non-negative.
pub fn qr_positive(m: DMatrix<C64>) -> (DMatrix<C64>, DMatrix<C64>) {
    let qr = m.qr();
    let mut q = qr.q();
    let mut r = qr.r();
    for i in 0..r.nrows().min(r.ncols()) {
        let d = r[(i, i)];
        if d.norm() > 0.0 {
            let ph = d / d.norm();
            for row in 0..q.nrows() {
                q[(row, i)] *= ph;
            }
            for col in 0..r.ncols() {
                r[(i, col)] *= ph.conj();
            }
        }
    }
    (q, r)
}

/// Embeds the orthonormal columns of `iso` as the leading columns of a
/// `dim x dim` unitary, completing with modified Gram–Schmidt against the
/// canonical basis in index order.
pub fn complete_unitary(iso: &DMatrix<C64>, dim: usize) -> DMatrix<C64> {
    complete_columns(iso, dim, dim)
}

/// Like `complete_unitary` but stops after `cols` orthonormal columns.
pub fn complete_columns(iso: &DMatrix<C64>, dim: usize, cols: usize) -> DMatrix<C64> {
    let k = iso.ncols();
    let mut u = DMatrix::from_element(dim, cols.max(k), ZERO);
    for c in 0..k {
        for r in 0..iso.nrows() {
            u[(r, c)] = iso[(r, c)];
        }
    }
    let mut filled = k;
    for e in 0..dim {
        if filled >= cols {
            break;
        }
        let mut v = nalgebra::DVector::from_element(dim, ZERO);
        v[e] = ONE;
        // two passes keep the completion orthogonal to rounding level
        for _ in 0..2 {
            for c in 0..filled {
                let col = u.column(c);
                let p = col.dotc(&v);
                v -= col * p;
            }
        }
        let nv = v.norm();
        if nv > 1e-8 {
            u.set_column(filled, &(v / C64::new(nv, 0.0)));
            filled += 1;
        }
    }
    u
}

/// Compiles an MPS into a staircase of `(s + 1)`-qubit unitaries with
/// `s = ceil(log2 chi)`, applied from the last site backwards.
pub fn mps_to_circuit(m: &Mps) -> Result<CompiledMps> {
    let n = m.n_sites();
    if n < 2 {
        return Err(Error::InvalidArgument("compilation needs n >= 2".into()));
    }
    let chi = m.max_bond();
    let s = usize::BITS as usize - (chi - 1).leading_zeros() as usize;
    let s = if chi == 1 { 0 } else { s };
    let chi_t = 1usize << s;
    if s + 1 > n {
        return Err(Error::InvalidArgument(format!(
            "bond dimension {chi} needs more than {n} sites"
        )));
    }

    // leading block: sites 1..s+1 merged, rows = q_1 ... q_{s+1}
    let mut block = DMatrix::from_element(1, 1, ONE);
    for t in &m.tensors()[..=s] {
        let rows = block.nrows();
        let mut next = DMatrix::from_element(rows * 2, t.right(), ZERO);
        for q in 0..2 {
            let part = &block * &t.b[q];
            for i in 0..rows {
                for c in 0..t.right() {
                    next[(2 * i + q, c)] = part[(i, c)];
                }
            }
        }
        block = next;
    }

    let mut isometries = Vec::with_capacity(n - s);
    let (q, mut r) = qr_positive(block);
    isometries.push(q);
    for t in &m.tensors()[s + 1..] {
        let absorbed = SiteTensor {
            b: [&r * &t.b[0], &r * &t.b[1]],
        };
        let (q, r_next) = qr_positive(absorbed.stacked());
        isometries.push(q);
        r = r_next;
    }
    let norm_factor = r[(0, 0)].re;
    if !(norm_factor > 0.0) {
        return Err(Error::ZeroNorm);
    }

    let dim = 2 * chi_t;
    let mut circuit = Circuit::new(n, 0);
    // isometries[i] belongs to site s + 1 + i (1-based); apply the last first
    for (i, iso) in isometries.iter().enumerate().rev() {
        let site = s + 1 + i;
        let u = complete_unitary(iso, dim);
        let targets: Vec<usize> = (site - s - 1..site).collect();
        circuit.push(Gate::new(u, targets, vec![])?)?;
    }
    let depth_two_qubit = match s {
        0 => Some(0),
        1 => Some(n - 1),
        2 => Some(5 * (n - 2) + 1),
        _ => None,
    };
    Ok(CompiledMps {
        circuit,
        block_qubits: s + 1,
        unitaries: n - s,
        depth_two_qubit,
        norm_factor,
    })
}

/// Outcome of one ancilla branch of the trigonometric state circuit.
#[derive(Clone, Debug)]
pub struct TrigBranch {
    /// 0 for the cosine branch, 1 for the sine branch.
    pub branch: usize,
    pub probability: f64,
    /// Normalized register state, absent when the branch cannot occur.
    pub state: Option<StateVector>,
}

/// Emulates the ancilla interference circuit: plane waves `exp(+i kappa x)`
/// and `exp(-i kappa x)` prepared in the two ancilla branches, then a
/// Hadamard on the ancilla. Returns both measurement branches.
pub fn trig_branches(kappa: f64, n: usize) -> Result<[TrigBranch; 2]> {
    let anc = n;
    let mut c = Circuit::new(n + 1, 0);
    c.push(Gate::h(anc))?;
    for j in 0..n {
        c.push(Gate::h(j))?;
        let phi = kappa * 0.5f64.powi(j as i32 + 1);
        c.push(Gate::phase(-phi, j).with_control(anc))?;
        c.push(Gate::x(anc))?;
        c.push(Gate::phase(phi, j).with_control(anc))?;
        c.push(Gate::x(anc))?;
    }
    c.push(Gate::h(anc))?;
    let out = c.prepare();
    let branch = |b: usize| -> Result<TrigBranch> {
        let amps: Vec<C64> = (0..1usize << n).map(|k| out.amplitudes()[2 * k + b]).collect();
        let probability: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        let state = if probability > 1e-24 {
            let mut s = StateVector::from_amplitudes(amps)?;
            s.normalize()?;
            Some(s)
        } else {
            None
        };
        Ok(TrigBranch {
            branch: b,
            probability,
            state,
        })
    };
    Ok([branch(0)?, branch(1)?])
}

/// Samples one branch of the trigonometric state circuit.
pub fn generate_trig_state(kappa: f64, n: usize, seed: u64) -> Result<TrigBranch> {
    let [b0, b1] = trig_branches(kappa, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u: f64 = rng.random();
    Ok(if u < b0.probability { b0 } else { b1 })
}

/// Inverse participation ratio `1 / (N sum |psi_k|^4)`.
pub fn ipr(psi: &StateVector) -> f64 {
    let s: f64 = psi.probabilities().iter().map(|p| p * p).sum();
    1.0 / (psi.len() as f64 * s)
}

/// Von Neumann entropies (natural log) across every cut `1..n`.
pub fn cut_entropies(psi: &StateVector) -> Vec<f64> {
    let n = psi.n_qubits();
    (1..n)
        .map(|cut| {
            let rows = 1usize << cut;
            let cols = 1usize << (n - cut);
            let m = DMatrix::from_fn(rows, cols, |r, c| psi.amplitudes()[r * cols + c]);
            let sv = crate::linalg::singular_values(&m);
            -sv.iter()
                .map(|s| s * s)
                .filter(|&p| p > 1e-300)
                .map(|p| p * p.ln())
                .sum::<f64>()
        })
        .collect()
}

pub fn s_max(psi: &StateVector) -> f64 {
    cut_entropies(psi).into_iter().fold(0.0, f64::max)
}

/// Free parameters of the left-canonical isometries of an MPS.
pub fn mps_param_count(m: &Mps) -> usize {
    m.tensors()
        .iter()
        .map(|t| {
            let (l, r) = (t.left(), t.right());
            2 * l * r - r * (r + 1) / 2
        })
        .sum()
}

/// Parameter count of an MPS with the given maximal bond dimension.
pub fn mps_param_count_for(n: usize, chi: usize) -> usize {
    let bond = |j: usize| -> usize {
        if j == 0 || j == n {
            1
        } else {
            chi.min(1usize << j.min(n - j).min(30))
        }
    };
    (0..n)
        .map(|j| {
            let (l, r) = (bond(j), bond(j + 1));
            2 * l * r - r * (r + 1) / 2
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, eval_potential, PotentialSpec};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn fidelity(a: &StateVector, b: &StateVector) -> f64 {
        a.inner(b).unwrap().norm()
    }

    fn product(v: [C64; 2], n: usize) -> Mps {
        let t = SiteTensor::new(
            DMatrix::from_element(1, 1, v[0]),
            DMatrix::from_element(1, 1, v[1]),
        )
        .unwrap();
        Mps::new(vec![t; n]).unwrap()
    }

    #[test]
    fn dense_round_trip_and_truncation() {
        let (psi, _) = mps_to_dense(&random_mps(7, 4, 21).unwrap()).unwrap();
        let exact = dense_to_mps(&psi, 4).unwrap();
        assert!(exact.max_bond() <= 4);
        let (back, norm) = mps_to_dense(&exact).unwrap();
        assert!((norm - 1.0).abs() < 1e-12);
        assert!((psi.inner(&back).unwrap().norm() - 1.0).abs() < 1e-12);
        let cut = dense_to_mps(&psi, 2).unwrap();
        assert_eq!(cut.bond_dims(), vec![2; 6]);
        assert!(cut.norm() < 1.0);
    }

    #[test]
    fn dense_of_product_states() {
        let (psi, norm) = mps_to_dense(&product([ONE, ZERO], 3)).unwrap();
        assert_eq!(psi, StateVector::zero(3));
        assert!((norm - 1.0).abs() < 1e-15);
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let (psi, _) = mps_to_dense(&product([h, h], 4)).unwrap();
        assert!((fidelity(&psi, &StateVector::uniform(4)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dense_matches_per_index_products() {
        let m = random_mps(8, 4, 3).unwrap();
        let (psi, norm) = mps_to_dense(&m).unwrap();
        assert!((norm - m.norm()).abs() < 1e-10 * norm);
        for k in 0..256 {
            let a = m.amplitude(k) / norm;
            assert!((a - psi.amplitudes()[k]).norm() < 1e-12);
        }
    }

    #[test]
    fn invalid_chains_rejected() {
        let t = SiteTensor::new(DMatrix::from_element(1, 2, ONE), DMatrix::from_element(1, 2, ONE)).unwrap();
        assert!(Mps::new(vec![t.clone()]).is_err());
        assert!(Mps::new(vec![t.clone(), t]).is_err());
        assert!(Mps::new(vec![]).is_err());
    }

    #[test]
    fn plane_wave_values() {
        let (psi, _) = mps_to_dense(&mps_plane_wave(0.0, 3)).unwrap();
        assert!((fidelity(&psi, &StateVector::uniform(3)) - 1.0).abs() < 1e-12);
        let (psi, _) = mps_to_dense(&mps_plane_wave(2.0 * PI, 3)).unwrap();
        for k in 0..8 {
            let e = C64::from_polar(1.0 / 8f64.sqrt(), 2.0 * PI * k as f64 / 8.0);
            assert!((psi.amplitudes()[k] - e).norm() < 1e-12);
        }
        let c = plane_wave_circuit(2.0 * PI * 3.3, 5);
        assert!(c.gates.iter().all(|g| g.targets().len() == 1 && g.controls().is_empty()));
        let (psi, _) = mps_to_dense(&mps_plane_wave(2.0 * PI * 3.3, 5)).unwrap();
        assert!((psi.inner(&c.prepare()).unwrap() - ONE).norm() < 1e-12);
    }

    #[test]
    fn sine_matches_potential_direction() {
        let kappa = 2.0 * PI * 32.0;
        let grid = build_grid(8, 0.0, 1.0).unwrap();
        let pot = PotentialSpec::Bichromatic {
            s1: 2e4,
            s2: 0.0,
            kappa1: kappa,
            kappa2: None,
        };
        let pv = eval_potential(&pot, &grid).unwrap();
        let (psi, _) = mps_to_dense(&mps_sine(kappa, 8).unwrap()).unwrap();
        for (a, v) in psi.amplitudes().iter().zip(&pv.tilde) {
            assert!((a - C64::new(*v, 0.0)).norm() < 1e-10);
        }
        assert!(matches!(mps_sine(0.0, 5), Err(Error::DegenerateFunction)));
    }

    #[test]
    fn two_sines_reduce_and_match_potential() {
        let k1 = 2.0 * PI * 16.0;
        let (a, _) = mps_to_dense(&mps_two_sines(3.0, 0.0, k1, 7.0, 7).unwrap()).unwrap();
        let (b, _) = mps_to_dense(&mps_sine(k1, 7).unwrap()).unwrap();
        assert!((fidelity(&a, &b) - 1.0).abs() < 1e-12);
        let grid = build_grid(9, 0.0, 1.0).unwrap();
        let pot = PotentialSpec::bichromatic(5e3, 2.0, k1);
        let pv = eval_potential(&pot, &grid).unwrap();
        let k2 = crate::grid::golden_kappa2(k1);
        let m = mps_two_sines(5e3, 2.5e3, k1, k2, 9).unwrap();
        assert_eq!(m.max_bond(), 4);
        let (psi, _) = mps_to_dense(&m).unwrap();
        for (a, v) in psi.amplitudes().iter().zip(&pv.tilde) {
            assert!((a - C64::new(*v, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn compile_counts() {
        let c2 = mps_to_circuit(&random_mps(6, 2, 1).unwrap()).unwrap();
        assert_eq!((c2.unitaries, c2.block_qubits, c2.depth_two_qubit), (5, 2, Some(5)));
        let c4 = mps_to_circuit(&random_mps(6, 4, 1).unwrap()).unwrap();
        assert_eq!((c4.unitaries, c4.block_qubits, c4.depth_two_qubit), (4, 3, Some(21)));
        assert_eq!(c4.circuit.gates.len(), 4);
    }

    #[test]
    fn compile_zero_norm_rejected() {
        let z = SiteTensor::new(DMatrix::from_element(1, 1, ZERO), DMatrix::from_element(1, 1, ZERO)).unwrap();
        let m = Mps::new(vec![z; 3]).unwrap();
        assert!(matches!(mps_to_circuit(&m), Err(Error::ZeroNorm)));
    }

    #[test]
    fn compile_is_deterministic() {
        let m = random_mps(7, 4, 11).unwrap();
        let a = mps_to_circuit(&m).unwrap();
        let b = mps_to_circuit(&m).unwrap();
        assert_eq!(a.circuit, b.circuit);
        assert_eq!(a.norm_factor.to_bits(), b.norm_factor.to_bits());
    }

    #[test]
    fn trig_branches_behave() {
        let [b0, b1] = trig_branches(0.0, 4).unwrap();
        assert!((b0.probability - 1.0).abs() < 1e-12);
        assert!(b1.state.is_none());
        let kappa = 2.0 * PI * 1.3;
        let [b0, b1] = trig_branches(kappa, 5).unwrap();
        assert!((b0.probability + b1.probability - 1.0).abs() < 1e-12);
        let cos: Vec<f64> = (0..32).map(|k| (kappa * k as f64 / 32.0).cos()).collect();
        let norm = cos.iter().map(|v| v * v).sum::<f64>().sqrt();
        let st = b0.state.unwrap();
        for (a, c) in st.amplitudes().iter().zip(&cos) {
            assert!((a - C64::new(c / norm, 0.0)).norm() < 1e-10);
        }
        let [c0, c1] = trig_branches(2.0 * PI * 16.0, 8).unwrap();
        assert!((c0.probability + c1.probability - 1.0).abs() < 1e-12);
        let pick = generate_trig_state(kappa, 5, 3).unwrap();
        assert!(pick.branch < 2);
    }

    #[test]
    fn localization_measures() {
        let u = StateVector::uniform(5);
        assert!((ipr(&u) - 1.0).abs() < 1e-12);
        assert!(s_max(&u).abs() < 1e-12);
        let b = StateVector::basis(5, 9).unwrap();
        assert!((ipr(&b) - 1.0 / 32.0).abs() < 1e-15);
        assert!(s_max(&b).abs() < 1e-12);
        // Bell pair: ln 2
        let bell = StateVector::from_real(&[1.0, 0.0, 0.0, 1.0]).unwrap();
        let mut bell = bell;
        bell.normalize().unwrap();
        assert!((s_max(&bell) - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn param_counting() {
        let t22 = SiteTensor::new(DMatrix::from_element(2, 2, ONE), DMatrix::from_element(2, 2, ONE)).unwrap();
        let t12 = SiteTensor::new(DMatrix::from_element(1, 2, ONE), DMatrix::from_element(1, 2, ONE)).unwrap();
        let t21 = SiteTensor::new(DMatrix::from_element(2, 1, ONE), DMatrix::from_element(2, 1, ONE)).unwrap();
        let m = Mps::new(vec![t12.clone(), t22, t21.clone()]).unwrap();
        // 1 + 5 + 3
        assert_eq!(mps_param_count(&m), 9);
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        assert_eq!(mps_param_count(&product([h, h], 6)), 6);
        assert_eq!(mps_param_count(&Mps::new(vec![t12, t21]).unwrap()), 1 + 3);
        assert_eq!(mps_param_count_for(3, 2), 9);
        let a = mps_param_count_for(10, 2);
        let b = mps_param_count_for(11, 2);
        let c = mps_param_count_for(12, 2);
        assert_eq!(c - b, b - a);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn compiled_state_matches(n in 4usize..=8, chi in prop_oneof![Just(2usize), Just(4usize)], seed in 0u64..1000) {
            let m = random_mps(n, chi, seed).unwrap();
            let compiled = mps_to_circuit(&m).unwrap();
            let (psi, norm) = mps_to_dense(&m).unwrap();
            let prepared = compiled.circuit.prepare();
            prop_assert!((psi.inner(&prepared).unwrap() - ONE).norm() < 1e-9);
            prop_assert!((compiled.norm_factor - norm).abs() < 1e-9 * norm);
            for g in &compiled.circuit.gates {
                let u = g.matrix();
                let d = u.nrows();
                let defect = (u.adjoint() * u - DMatrix::<C64>::identity(d, d)).iter().map(|z| z.norm()).fold(0.0, f64::max);
                prop_assert!(defect < 1e-10);
            }
        }

        #[test]
        fn entropy_bounded_by_bond(n in 4usize..=8, chi in 1usize..=4, seed in 0u64..1000) {
            let m = random_mps(n, chi, seed).unwrap();
            let (psi, _) = mps_to_dense(&m).unwrap();
            prop_assert!(s_max(&psi) <= (chi as f64).ln() + 1e-9);
        }
    }
}
