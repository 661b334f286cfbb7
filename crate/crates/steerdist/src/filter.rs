//! Single-Kraus local filters: application with post-selection, synthesis
//! of the optimal filter from an ordering witness, and the maximal success
//! probability over a witness list.

use crate::assemblage::{split_reduced_state, StateAssemblage};
use crate::error::{Error, Result};
use crate::linalg::{spectral_decompose, CMatrix, GeneralOperator, HermitianOperator};
use crate::maxrelent::{lambda_opt, ExtendedReal};
use crate::ordering::{verify_order_witness, OrderWitness};

/// Success probabilities below this are treated as vanishing.
pub const TOL_P_SUCC: f64 = 1e-12;

/// A single Kraus operator `K` with `K†K ≤ I`.
#[derive(Debug, Clone)]
pub struct FilterKraus {
    kraus: GeneralOperator,
    contraction_slack: f64,
}

impl FilterKraus {
    /// Validates the contraction condition; `contraction_slack` is the
    /// minimum eigenvalue of `I - K†K` and may be slightly negative within
    /// the floor.
    pub fn new(kraus: GeneralOperator) -> Result<Self> {
        let d = kraus.cols();
        let gram = HermitianOperator::symmetrize(
            CMatrix::identity(d, d) - kraus.matrix().adjoint() * kraus.matrix(),
        );
        let slack = spectral_decompose(&gram)?.last().map(|p| p.0).unwrap_or(0.0);
        if slack < -1e-9 {
            return Err(Error::ContractionViolation { slack });
        }
        Ok(Self { kraus, contraction_slack: slack })
    }

    /// Rescales marginal contraction violations away and retries. Used when
    /// floating-point error pushes a singular value just above one.
    fn new_renormalized(kraus: GeneralOperator) -> Result<Self> {
        match Self::new(kraus.clone()) {
            Ok(f) => Ok(f),
            Err(Error::ContractionViolation { slack }) if slack > -1e-6 => {
                let scaled = GeneralOperator::new(kraus.matrix().scale(1.0 / (1.0 + 1e-12)));
                Self::new(scaled)
            }
            Err(e) => Err(e),
        }
    }

    pub fn kraus(&self) -> &GeneralOperator {
        &self.kraus
    }

    pub fn contraction_slack(&self) -> f64 {
        self.contraction_slack
    }

    pub fn dim(&self) -> usize {
        self.kraus.cols()
    }
}

/// A filtered assemblage together with its success probability.
#[derive(Debug, Clone)]
pub struct FilterOutcome {
    pub output: StateAssemblage,
    pub p_succ: f64,
}

/// Applies the filter with post-selection:
/// `σ_{a|x} ↦ K σ_{a|x} K† / p_succ` with `p_succ = tr(K ρ_σ K†)`.
pub fn apply_filter(sigma: &StateAssemblage, filter: &FilterKraus) -> Result<FilterOutcome> {
    if filter.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            context: format!("filter dim {} vs assemblage dim {}", filter.dim(), sigma.dim()),
        });
    }
    if filter.contraction_slack < -1e-9 {
        return Err(Error::ContractionViolation { slack: filter.contraction_slack });
    }
    let rho = sigma.reduced_state()?;
    let k = filter.kraus.matrix();
    let p_succ = (k * rho.matrix() * k.adjoint()).trace().re;
    if p_succ <= TOL_P_SUCC {
        return Err(Error::VanishingSuccessProbability { p: p_succ });
    }
    let elements = sigma
        .elements()
        .iter()
        .map(|row| row.iter().map(|e| e.conjugate_by(k).scale(1.0 / p_succ)).collect())
        .collect();
    let output = StateAssemblage::new(elements)?;
    Ok(FilterOutcome { output, p_succ })
}

/// Builds the optimal filter `L = λ_opt^{-1/2} √ρ_τ U √ρ_σ⁻¹` for a
/// verified ordering witness `U`. Its success probability on `σ` is exactly
/// `λ_opt⁻¹ = 2^{-D_max(ρ_τ ‖ U ρ_σ U†)}`.
pub fn synthesize_filter(
    sigma: &StateAssemblage,
    tau: &StateAssemblage,
    witness: &GeneralOperator,
) -> Result<FilterKraus> {
    let w = verify_order_witness(sigma, tau, witness)?;
    synthesize_filter_from_witness(sigma, tau, &w)
}

/// As [`synthesize_filter`] but for an already-verified witness.
pub fn synthesize_filter_from_witness(
    sigma: &StateAssemblage,
    tau: &StateAssemblage,
    witness: &OrderWitness,
) -> Result<FilterKraus> {
    let lam = match witness.lambda_opt {
        ExtendedReal::Finite(l) => l,
        ExtendedReal::Infinite => {
            return Err(Error::SupportViolation {
                context: "synthesize_filter: infinite λ_opt (support not included)".into(),
            })
        }
    };
    let s_sigma = split_reduced_state(sigma)?;
    let t_tau = split_reduced_state(tau)?;
    let l = (t_tau.sqrt.matrix() * witness.unitary.matrix() * s_sigma.sqrt_pinv.matrix())
        .scale(1.0 / lam.sqrt());
    FilterKraus::new_renormalized(GeneralOperator::new(l))
}

/// Max of `2^{-D_max(ρ_τ ‖ U ρ_σ U†)}` over the supplied witnesses.
///
/// Every witness must verify the ordering. Returns the achieving witness;
/// ties are broken by the first index. The result is a lower bound on the
/// supremum over all consistent unitaries, tight when the list exhausts
/// them.
pub fn max_success_probability(
    sigma: &StateAssemblage,
    tau: &StateAssemblage,
    witnesses: &[GeneralOperator],
) -> Result<(f64, GeneralOperator)> {
    if witnesses.is_empty() {
        return Err(Error::EmptyWitnessList);
    }
    let rho_tau = tau.reduced_state()?;
    let rho_sigma = sigma.reduced_state()?;
    let mut best: Option<(f64, usize)> = None;
    for (i, u) in witnesses.iter().enumerate() {
        verify_order_witness(sigma, tau, u)?;
        let rotated = rho_sigma.conjugate_by(u.matrix());
        let p = match lambda_opt(&rho_tau, &rotated)? {
            ExtendedReal::Finite(l) => 1.0 / l,
            ExtendedReal::Infinite => 0.0,
        };
        if best.map(|(bp, _)| p > bp).unwrap_or(true) {
            best = Some((p, i));
        }
    }
    let (p, i) = best.expect("non-empty witness list");
    Ok((p, witnesses[i].clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::cpx;
    use crate::presets;

    #[test]
    fn identity_filter_is_noop() {
        let sigma = presets::pauli_halved_assemblage().unwrap();
        let f = FilterKraus::new(GeneralOperator::identity(2)).unwrap();
        let out = apply_filter(&sigma, &f).unwrap();
        assert!((out.p_succ - 1.0).abs() < 1e-12);
        for x in 0..2 {
            for a in 0..2 {
                let d = (out.output.element(x, a).matrix() - sigma.element(x, a).matrix()).norm();
                assert!(d < 1e-12);
            }
        }
    }

    #[test]
    fn paper_filter_distills_exactly() {
        for v in [0.1, 0.5, 1.0] {
            let sigma = presets::paper_assemblage(v).unwrap();
            let k = presets::paper_filter().unwrap();
            let out = apply_filter(&sigma, &k).unwrap();
            assert!((out.p_succ - v).abs() < 1e-12, "p_succ {} != v {}", out.p_succ, v);
            let expect = presets::paper_final_assemblage_qutrit().unwrap();
            for x in 0..2 {
                for a in 0..2 {
                    let d = (out.output.element(x, a).matrix()
                        - expect.element(x, a).matrix())
                    .norm();
                    assert!(d < 1e-12, "v={v} ({a}|{x}): {d}");
                }
            }
        }
    }

    #[test]
    fn vanishing_probability_rejected() {
        // ρ_σ = |1⟩⟨1|, filter projects onto |0⟩.
        let one = HermitianOperator::from_real_diagonal(&[0.0, 1.0]);
        let sigma = StateAssemblage::new(vec![vec![one.scale(0.5), one.scale(0.5)]]).unwrap();
        let mut k = CMatrix::zeros(2, 2);
        k[(0, 0)] = cpx(1.0, 0.0);
        let f = FilterKraus::new(GeneralOperator::new(k)).unwrap();
        assert!(matches!(
            apply_filter(&sigma, &f),
            Err(Error::VanishingSuccessProbability { .. })
        ));
    }

    #[test]
    fn expansion_is_not_a_contraction() {
        let k = GeneralOperator::new(CMatrix::identity(2, 2).scale(1.5));
        assert!(matches!(FilterKraus::new(k), Err(Error::ContractionViolation { .. })));
    }

    #[test]
    fn synthesize_identity_case_gives_support_projector() {
        let sigma = presets::paper_assemblage(0.7).unwrap();
        let f = synthesize_filter(&sigma, &sigma, &GeneralOperator::identity(3)).unwrap();
        let split = split_reduced_state(&sigma).unwrap();
        assert!((f.kraus().matrix() - split.projector.matrix()).norm() < 1e-8);
        let out = apply_filter(&sigma, &f).unwrap();
        assert!((out.p_succ - 1.0).abs() < 1e-9);
    }

    #[test]
    fn synthesize_paper_filter() {
        // With U = I the synthesized L is exactly the paper's K, and
        // p_succ = v.
        for v in [0.2, 0.6] {
            let sigma = presets::paper_assemblage(v).unwrap();
            let tau = presets::paper_final_assemblage_qutrit().unwrap();
            let f = synthesize_filter(&sigma, &tau, &GeneralOperator::identity(3)).unwrap();
            let expect = presets::paper_filter().unwrap();
            assert!(
                (f.kraus().matrix() - expect.kraus().matrix()).norm() < 1e-9,
                "v={v}"
            );
            let out = apply_filter(&sigma, &f).unwrap();
            assert!((out.p_succ - v).abs() < 1e-9);
            for x in 0..2 {
                for a in 0..2 {
                    let d = (out.output.element(x, a).matrix() - tau.element(x, a).matrix())
                        .norm();
                    assert!(d < 1e-7);
                }
            }
        }
    }

    #[test]
    fn rank_increase_is_a_support_violation() {
        // σ^final has rank 2; trying to reach the rank-3 σ^(v) must fail.
        let sigma = presets::paper_final_assemblage_qutrit().unwrap();
        let tau = presets::paper_assemblage(0.5).unwrap();
        let err = synthesize_filter(&sigma, &tau, &GeneralOperator::identity(3));
        assert!(err.is_err());
    }

    #[test]
    fn max_success_probability_paper_value() {
        for v in [0.3, 0.8] {
            let sigma = presets::paper_assemblage(v).unwrap();
            let tau = presets::paper_final_assemblage_qutrit().unwrap();
            let (p, _) =
                max_success_probability(&sigma, &tau, &[GeneralOperator::identity(3)]).unwrap();
            assert!((p - v).abs() < 1e-9, "p = {p}, v = {v}");
        }
    }

    #[test]
    fn max_success_probability_requires_witnesses() {
        let sigma = presets::pauli_halved_assemblage().unwrap();
        assert!(matches!(
            max_success_probability(&sigma, &sigma, &[]),
            Err(Error::EmptyWitnessList)
        ));
    }

    #[test]
    fn synthesized_probability_matches_dmax() {
        for v in [0.25, 0.75] {
            let sigma = presets::paper_assemblage(v).unwrap();
            let tau = presets::paper_final_assemblage_qutrit().unwrap();
            let f = synthesize_filter(&sigma, &tau, &GeneralOperator::identity(3)).unwrap();
            let out = apply_filter(&sigma, &f).unwrap();
            let rho_tau = tau.reduced_state().unwrap();
            let rho_sigma = sigma.reduced_state().unwrap();
            let lam = lambda_opt(&rho_tau, &rho_sigma).unwrap().finite().unwrap();
            assert!((out.p_succ - 1.0 / lam).abs() < 1e-9);
        }
    }

    #[test]
    fn filter_composition_matches_product() {
        let sigma = presets::paper_assemblage(0.9).unwrap();
        let k1 = presets::paper_filter().unwrap();
        let mut m = CMatrix::zeros(3, 3);
        m[(0, 0)] = cpx(0.8, 0.0);
        m[(1, 1)] = cpx(0.5, 0.1);
        m[(0, 1)] = cpx(0.1, 0.0);
        let k2 = FilterKraus::new(GeneralOperator::new(m.clone())).unwrap();
        let seq = apply_filter(&apply_filter(&sigma, &k1).unwrap().output, &k2).unwrap();
        let prod =
            FilterKraus::new(GeneralOperator::new(&m * k1.kraus().matrix())).unwrap();
        let direct = apply_filter(&sigma, &prod).unwrap();
        for x in 0..2 {
            for a in 0..2 {
                let d = (seq.output.element(x, a).matrix()
                    - direct.output.element(x, a).matrix())
                .norm();
                assert!(d < 1e-8);
            }
        }
    }
}
