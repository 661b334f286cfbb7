//! Built-in instances: the Pauli X/Z measurement pair and the qubit-qutrit
//! distillation scenario used by the demo command and many tests.

use crate::assemblage::{BipartiteState, MeasurementAssemblage, StateAssemblage};
use crate::error::Result;
use crate::filter::FilterKraus;
use crate::linalg::{cpx, CMatrix, CVector, GeneralOperator, HermitianOperator};

/// Kronecker product of Hermitian operators (A ⊗ B).
pub fn kron(a: &HermitianOperator, b: &HermitianOperator) -> HermitianOperator {
    HermitianOperator::symmetrize(a.matrix().kronecker(b.matrix()))
}

/// Projective qubit measurements along Z (input 0) and X (input 1):
/// `E_{0|0} = |0⟩⟨0|`, `E_{0|1} = |+⟩⟨+|`.
pub fn pauli_pair() -> Result<MeasurementAssemblage> {
    let zero = CVector::from_vec(vec![cpx(1.0, 0.0), cpx(0.0, 0.0)]);
    let one = CVector::from_vec(vec![cpx(0.0, 0.0), cpx(1.0, 0.0)]);
    let plus = CVector::from_vec(vec![cpx(1.0, 0.0), cpx(1.0, 0.0)]).scale(1.0 / 2f64.sqrt());
    let minus = CVector::from_vec(vec![cpx(1.0, 0.0), cpx(-1.0, 0.0)]).scale(1.0 / 2f64.sqrt());
    let proj = HermitianOperator::projector_onto;
    MeasurementAssemblage::full_space(vec![
        vec![proj(&zero), proj(&one)],
        vec![proj(&plus), proj(&minus)],
    ])
}

/// The maximally steerable two-qubit assemblage `σ_{a|x} = E^Pauli_{a|x}/2`.
pub fn pauli_halved_assemblage() -> Result<StateAssemblage> {
    let meas = pauli_pair()?;
    let elements = meas
        .elements()
        .iter()
        .map(|row| row.iter().map(|e| e.scale(0.5)).collect())
        .collect();
    StateAssemblage::new(elements)
}

/// `|φ+⟩⟨φ+|` on two qubits.
pub fn maximally_entangled_qubits() -> Result<BipartiteState> {
    let mut psi = CVector::zeros(4);
    psi[0] = cpx(1.0 / 2f64.sqrt(), 0.0);
    psi[3] = cpx(1.0 / 2f64.sqrt(), 0.0);
    BipartiteState::new(2, 2, HermitianOperator::projector_onto(&psi))
}

/// The qubit-qutrit interpolation
/// `ρ_AB^(v) = v |φ+⟩⟨φ+| + (1-v) (I_A/2) ⊗ |2⟩⟨2|`, where `|φ+⟩` is
/// maximally entangled between qubit A and `span{|0⟩,|1⟩}` of qutrit B.
pub fn paper_bipartite_state(v: f64) -> Result<BipartiteState> {
    let mut psi = CVector::zeros(6); // index a*3 + b
    psi[0] = cpx(1.0 / 2f64.sqrt(), 0.0); // |00⟩
    psi[4] = cpx(1.0 / 2f64.sqrt(), 0.0); // |11⟩
    let ent = HermitianOperator::projector_onto(&psi);
    let half = HermitianOperator::identity(2).scale(0.5);
    let two = HermitianOperator::from_real_diagonal(&[0.0, 0.0, 1.0]);
    let noise = kron(&half, &two);
    let mat = ent.scale(v).add(&noise.scale(1.0 - v));
    BipartiteState::new(2, 3, mat)
}

/// Closed form of the paper's initial assemblage:
/// `σ^(v)_{a|x} = v E^T_{a|x}/2 ⊕ ((1-v)/2)|2⟩⟨2|` (the Pauli pair here is
/// real, so the transpose is invisible).
pub fn paper_assemblage(v: f64) -> Result<StateAssemblage> {
    let meas = pauli_pair()?;
    let mut elements = Vec::new();
    for x in 0..2 {
        let mut row = Vec::new();
        for a in 0..2 {
            let mut m = CMatrix::zeros(3, 3);
            m.view_mut((0, 0), (2, 2))
                .copy_from(&meas.element(x, a).matrix().transpose().scale(v / 2.0));
            m[(2, 2)] = cpx((1.0 - v) / 2.0, 0.0);
            row.push(HermitianOperator::symmetrize(m));
        }
        elements.push(row);
    }
    StateAssemblage::new(elements)
}

/// The distilled assemblage `E^Pauli_{a|x}/2` embedded in the qutrit.
pub fn paper_final_assemblage_qutrit() -> Result<StateAssemblage> {
    let meas = pauli_pair()?;
    let mut elements = Vec::new();
    for x in 0..2 {
        let mut row = Vec::new();
        for a in 0..2 {
            let mut m = CMatrix::zeros(3, 3);
            m.view_mut((0, 0), (2, 2)).copy_from(&meas.element(x, a).matrix().scale(0.5));
            row.push(HermitianOperator::symmetrize(m));
        }
        elements.push(row);
    }
    StateAssemblage::new(elements)
}

/// The paper's filter `K = |0⟩⟨0| + |1⟩⟨1|` on the qutrit.
pub fn paper_filter() -> Result<FilterKraus> {
    let mut k = CMatrix::zeros(3, 3);
    k[(0, 0)] = cpx(1.0, 0.0);
    k[(1, 1)] = cpx(1.0, 0.0);
    FilterKraus::new(GeneralOperator::new(k))
}
