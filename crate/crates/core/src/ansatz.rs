//! Variational circuit families: the brick-wall network and the
//! single-parameter two-qubit circuit used for the harmonic-trap experiment.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statevector::{Circuit, Gate, StateVector};

/// Brick-wall layout: `d` columns of two-qubit gates on `n` qubits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub n: usize,
    pub d: usize,
    #[serde(default = "default_real")]
    pub real_valued: bool,
}

fn default_real() -> bool {
    true
}

impl AnsatzSpec {
    pub fn new(n: usize, d: usize) -> Result<Self> {
        let spec = Self {
            n,
            d,
            real_valued: true,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidArgument("brick-wall needs n >= 2".into()));
        }
        if self.d < 1 {
            return Err(Error::InvalidArgument("brick-wall needs d >= 1".into()));
        }
        Ok(())
    }
}

/// One two-qubit gate slot of the brick wall.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GateSlot {
    /// Column, starting at 0.
    pub column: usize,
    /// Upper qubit; the gate acts on `(q, q + 1)`.
    pub q: usize,
    /// Offset of this gate's angles in the flat parameter vector.
    pub offset: usize,
    /// 3 in the first column, 6 elsewhere.
    pub angles: usize,
}

/// Gate slots in column-major order. Even columns (0, 2, ...) pair qubits
/// `(0,1), (2,3), ...`; odd columns pair `(1,2), (3,4), ...`.
pub fn gate_slots(spec: &AnsatzSpec) -> Vec<GateSlot> {
    let mut slots = Vec::new();
    let mut offset = 0;
    for column in 0..spec.d {
        let angles = if column == 0 { 3 } else { 6 };
        let mut q = column % 2;
        while q + 1 < spec.n {
            slots.push(GateSlot {
                column,
                q,
                offset,
                angles,
            });
            offset += angles;
            q += 2;
        }
    }
    slots
}

pub fn param_count(spec: &AnsatzSpec) -> Result<usize> {
    if !spec.real_valued {
        return Err(Error::InvalidArgument(
            "parameter counting is defined for real gates only".into(),
        ));
    }
    spec.validate()?;
    Ok(gate_slots(spec).iter().map(|s| s.angles).sum())
}

/// Rotation by `theta` in the `(i, j)` plane of `R^4`.
fn givens(i: usize, j: usize, theta: f64) -> DMatrix<f64> {
    let mut g = DMatrix::identity(4, 4);
    let (s, c) = theta.sin_cos();
    g[(i, i)] = c;
    g[(j, j)] = c;
    g[(i, j)] = -s;
    g[(j, i)] = s;
    g
}

const PLANES: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// First-column gate. Only its action on `|00>` matters, and the three
/// angles are hyperspherical coordinates of that image on the unit 3-sphere.
pub fn first_column_gate(angles: &[f64]) -> DMatrix<f64> {
    givens(0, 1, angles[0]) * givens(0, 2, angles[1]) * givens(0, 3, angles[2])
}

/// Interior gate: product of rotations in all six planes, covering SO(4).
pub fn interior_gate(angles: &[f64]) -> DMatrix<f64> {
    PLANES
        .iter()
        .zip(angles)
        .fold(DMatrix::identity(4, 4), |acc, (&(i, j), &t)| acc * givens(i, j, t))
}

/// Real orthogonal matrix of each slot, in slot order.
pub fn gate_matrices(spec: &AnsatzSpec, params: &[f64]) -> Result<Vec<DMatrix<f64>>> {
    let expected = param_count(spec)?;
    if params.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            actual: params.len(),
        });
    }
    Ok(gate_slots(spec)
        .iter()
        .map(|s| {
            let a = &params[s.offset..s.offset + s.angles];
            if s.angles == 3 {
                first_column_gate(a)
            } else {
                interior_gate(a)
            }
        })
        .collect())
}

pub fn build_brickwall(spec: &AnsatzSpec, params: &[f64]) -> Result<Circuit> {
    let mats = gate_matrices(spec, params)?;
    let mut c = Circuit::new(spec.n, 0);
    for (slot, m) in gate_slots(spec).iter().zip(&mats) {
        c.push(Gate::real(m, vec![slot.q, slot.q + 1])?)?;
    }
    Ok(c)
}

pub fn prepare(spec: &AnsatzSpec, params: &[f64]) -> Result<StateVector> {
    Ok(build_brickwall(spec, params)?.prepare())
}

/// Two-qubit circuit with one parameter: `R_y(lambda)` on qubit 0, a CNOT
/// from qubit 0 to qubit 1, then `R_y(lambda)` on qubit 1.
pub fn build_single_param(lambda: f64) -> Circuit {
    let mut c = Circuit::new(2, 0);
    c.push_unchecked(Gate::ry(lambda, 0));
    c.push_unchecked(Gate::cnot(0, 1));
    c.push_unchecked(Gate::ry(lambda, 1));
    c
}

/// A variational family preparing register states from a flat parameter list.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ansatz {
    SingleParam,
    Brickwall(AnsatzSpec),
}

impl Ansatz {
    pub fn n_qubits(&self) -> usize {
        match self {
            Ansatz::SingleParam => 2,
            Ansatz::Brickwall(s) => s.n,
        }
    }

    pub fn param_count(&self) -> Result<usize> {
        match self {
            Ansatz::SingleParam => Ok(1),
            Ansatz::Brickwall(s) => param_count(s),
        }
    }

    pub fn circuit(&self, params: &[f64]) -> Result<Circuit> {
        match self {
            Ansatz::SingleParam => {
                if params.len() != 1 {
                    return Err(Error::DimensionMismatch {
                        expected: 1,
                        actual: params.len(),
                    });
                }
                Ok(build_single_param(params[0]))
            }
            Ansatz::Brickwall(s) => build_brickwall(s, params),
        }
    }

    pub fn prepare(&self, params: &[f64]) -> Result<StateVector> {
        Ok(self.circuit(params)?.prepare())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec(n: usize, d: usize) -> AnsatzSpec {
        AnsatzSpec::new(n, d).unwrap()
    }

    #[test]
    fn counts_for_six_qubits() {
        assert_eq!(param_count(&spec(6, 1)).unwrap(), 9);
        assert_eq!(gate_slots(&spec(6, 5)).len(), 13);
        assert_eq!(param_count(&spec(6, 5)).unwrap(), 69);
        assert_eq!(param_count(&spec(2, 1)).unwrap(), 3);
    }

    #[test]
    fn complex_counting_rejected() {
        let mut s = spec(4, 2);
        s.real_valued = false;
        assert!(param_count(&s).is_err());
        assert!(AnsatzSpec::new(1, 1).is_err());
        assert!(AnsatzSpec::new(3, 0).is_err());
    }

    #[test]
    fn zero_params_prepare_zero_state() {
        let s = spec(5, 4);
        let psi = prepare(&s, &vec![0.0; param_count(&s).unwrap()]).unwrap();
        assert!((psi.amplitudes()[0].re - 1.0).abs() < 1e-15);
        assert!(psi.amplitudes()[1..].iter().all(|a| a.norm() < 1e-15));
    }

    #[test]
    fn wrong_length_rejected() {
        let s = spec(4, 2);
        assert!(matches!(
            build_brickwall(&s, &[0.0; 3]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn first_column_reaches_any_real_unit_vector() {
        // hyperspherical inverse of a fixed target
        let target = [0.1_f64, -0.7, 0.5, 0.0];
        let norm = target.iter().map(|v| v * v).sum::<f64>().sqrt();
        let t: Vec<f64> = target.iter().map(|v| v / norm).collect();
        let a3 = t[3].asin();
        let a2 = (t[2] / a3.cos()).asin();
        let a1 = t[1].atan2(t[0]);
        let m = first_column_gate(&[a1, a2, a3]);
        for k in 0..4 {
            assert!((m[(k, 0)] - t[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn single_param_reference_and_period() {
        let psi = build_single_param(0.0).prepare();
        assert_eq!(psi.real_parts(), vec![1.0, 0.0, 0.0, 0.0]);
        for &l in &[0.3, 1.7, 5.0] {
            let a = build_single_param(l).prepare();
            let b = build_single_param(l + 4.0 * std::f64::consts::PI).prepare();
            for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
                assert!((x - y).norm() < 1e-12);
                assert_eq!(x.im, 0.0);
            }
        }
        assert!(build_single_param(0.4).is_real());
    }

    proptest! {
        #[test]
        fn slots_match_count(n in 2usize..=16, d in 1usize..=12) {
            let s = spec(n, d);
            let slots = gate_slots(&s);
            let total: usize = slots.iter().map(|x| x.angles).sum();
            prop_assert_eq!(total, param_count(&s).unwrap());
            let c1 = n / 2;
            let c2 = (n - 1) / 2;
            let expected = 3 * c1 + 6 * ((d - 1) / 2 * c1 + d / 2 * c2);
            prop_assert_eq!(total, expected);
        }

        #[test]
        fn prepared_states_are_normalized(
            params in proptest::collection::vec(-3.2f64..3.2, 3 * 2 + 6 * (1 + 2 + 1))
        ) {
            let s = spec(4, 4);
            let psi = prepare(&s, &params[..param_count(&s).unwrap()]).unwrap();
            prop_assert!((psi.norm() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn interior_gates_are_special_orthogonal(a in proptest::collection::vec(-3.2f64..3.2, 6)) {
            let m = interior_gate(&a);
            let defect = (m.transpose() * &m - DMatrix::identity(4, 4)).abs().max();
            prop_assert!(defect < 1e-12);
            prop_assert!((m.determinant() - 1.0).abs() < 1e-12);
        }
    }
}
