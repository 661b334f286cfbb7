//! The built-in qubit-qutrit distillation walkthrough.
//!
//! Party A holds a qubit, B a qutrit, and they share
//! `ρ_AB^(v) = v|φ+⟩⟨φ+| + (1-v)(I_A/2)⊗|2⟩⟨2|` with the entangled part
//! confined to `span{|0⟩,|1⟩}` of B. Measuring Pauli Z and X on A leaves B
//! with an assemblage whose steerability degrades as `v → 0`, yet the local
//! filter `K = |0⟩⟨0| + |1⟩⟨1|` distils it — with success probability
//! exactly `v` — to the maximally steerable two-qubit assemblage
//! `E^Pauli/2`. The filter is genuinely irreversible: the rank of the
//! reduced state drops from 3 to 2 and no filter can restore it.

use crate::assemblage::{compute_seo, steer_from_state};
use crate::error::{Error, Result};
use crate::filter::apply_filter;
use crate::linalg::GeneralOperator;
use crate::maxrelent::{lambda_opt, ExtendedReal};
use crate::ordering::{search_order_witness, OrderVerdict, SearchConfig};
use crate::presets;
use crate::robustness::{
    consistent_steering_robustness, incompatibility_robustness, steering_robustness,
    RobustnessResult,
};

/// Everything the walkthrough computes, for reports and assertions.
pub struct DemoTrace {
    pub v: f64,
    /// Max entrywise deviation of the steered assemblage from the closed
    /// form of `σ^(v)`.
    pub steering_error: f64,
    /// Max entrywise deviation of the filtered output from `E^Pauli/2`.
    pub final_error: f64,
    pub p_succ: f64,
    pub seo_carrier_rank: usize,
    pub sr_before: RobustnessResult,
    pub sr_after: RobustnessResult,
    pub src_before: RobustnessResult,
    pub src_after: RobustnessResult,
    pub ir_of_seo: RobustnessResult,
    /// Verdict of the reverse search (final → initial), refuted by rank.
    pub reverse_refuted_by_rank: bool,
    /// Optimal success probability reported by the forward witness search.
    pub p_max_forward: Option<f64>,
}

/// Runs the full trace at visibility `v ∈ (0, 1]`.
pub fn run(v: f64) -> Result<DemoTrace> {
    if !(v > 0.0 && v <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "v".into(),
            value: v,
            context: "the visibility must lie in (0, 1]".into(),
        });
    }
    let rho_ab = presets::paper_bipartite_state(v)?;
    let pauli = presets::pauli_pair()?;
    let sigma = steer_from_state(&rho_ab, &pauli)?;

    let closed_form = presets::paper_assemblage(v)?;
    let steering_error = max_entry_distance(&sigma, &closed_form);

    let seo = compute_seo(&sigma)?;
    let seo_carrier_rank = seo.carrier_rank()?;

    let filter = presets::paper_filter()?;
    let outcome = apply_filter(&sigma, &filter)?;
    let expected_final = presets::paper_final_assemblage_qutrit()?;
    let final_error = max_entry_distance(&outcome.output, &expected_final);

    let sr_before = steering_robustness(&sigma)?;
    let sr_after = steering_robustness(&outcome.output)?;
    let src_before = consistent_steering_robustness(&sigma)?;
    let src_after = consistent_steering_robustness(&outcome.output)?;
    let ir_of_seo = incompatibility_robustness(&seo)?;

    // The ordering view of the same transformation: forward holds with the
    // identity witness (deterministic restart 0), the reverse is a rank
    // no-go. λ_opt confirms p_succ = 1/λ_opt = v.
    let config = SearchConfig { n_restarts: 6, max_iters: 300, ..Default::default() };
    let forward = search_order_witness(&sigma, &outcome.output, &config)?;
    let p_max_forward = match &forward {
        OrderVerdict::Holds { best_witness, .. } => {
            best_witness.lambda_opt.finite().map(|l| 1.0 / l)
        }
        _ => None,
    };
    let reverse = search_order_witness(&outcome.output, &sigma, &config)?;
    let reverse_refuted_by_rank = matches!(reverse, OrderVerdict::RefutedByRank { .. });

    // Cross-check the success probability against the max-relative-entropy
    // formula with the identity witness.
    let rho_sigma = sigma.reduced_state()?;
    let rho_tau = outcome.output.reduced_state()?;
    if let ExtendedReal::Finite(lam) = lambda_opt(&rho_tau, &rho_sigma)? {
        debug_assert!((outcome.p_succ - 1.0 / lam).abs() < 1e-9);
    }
    let _ = GeneralOperator::identity(3);

    Ok(DemoTrace {
        v,
        steering_error,
        final_error,
        p_succ: outcome.p_succ,
        seo_carrier_rank,
        sr_before,
        sr_after,
        src_before,
        src_after,
        ir_of_seo,
        reverse_refuted_by_rank,
        p_max_forward,
    })
}

fn max_entry_distance(
    a: &crate::assemblage::StateAssemblage,
    b: &crate::assemblage::StateAssemblage,
) -> f64 {
    let mut worst = 0.0f64;
    for x in 0..a.n_inputs() {
        for ai in 0..a.n_outputs() {
            let d = a.element(x, ai).matrix() - b.element(x, ai).matrix();
            for z in d.iter() {
                worst = worst.max(z.norm());
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn demo_reproduces_the_exact_numbers() {
        for v in [0.1, 0.5, 1.0] {
            let trace = run(v).unwrap();
            assert!(trace.steering_error < 1e-12);
            assert!(trace.final_error < 1e-12);
            assert!((trace.p_succ - v).abs() < 1e-12);
            assert_eq!(trace.seo_carrier_rank, if v < 1.0 { 3 } else { 2 });
            // SR^c is invariant under the filter and matches IR of the SEO.
            assert!((trace.src_before.value - trace.src_after.value).abs() < 1e-5);
            assert!((trace.src_before.value - trace.ir_of_seo.value).abs() < 1e-5);
            if v < 1.0 {
                assert!(trace.reverse_refuted_by_rank);
                assert!(trace.sr_before.value <= trace.sr_after.value + 1e-7);
            }
            if let Some(p) = trace.p_max_forward {
                assert!(p >= v - 1e-7, "p_max {p} below v {v}");
            }
        }
    }

    #[test]
    fn demo_rejects_bad_visibility() {
        assert!(run(0.0).is_err());
        assert!(run(1.5).is_err());
    }

    #[test]
    fn weak_input_still_distills_to_maximal() {
        let trace = run(0.1).unwrap();
        // The filtered assemblage is maximally steerable while the input is
        // barely steerable.
        assert!(trace.sr_after.value > 0.17);
        assert!(trace.sr_before.value < trace.sr_after.value);
        assert!((trace.p_succ - 0.1).abs() < 1e-12);
    }
}
