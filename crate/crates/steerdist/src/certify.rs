//! Batch certification of the theorem-level identities on random
//! instances: the distillation identity between incompatibility robustness
//! and consistent steering robustness, the incompatibility upper bound on
//! distilled steerability, monotonicity under free operations, and the
//! witness-search round trip.
//!
//! Each suite draws its instances from seed-derived streams, reports the
//! worst margin seen, and fails loudly past its tolerance.

use crate::assemblage::compute_seo;
use crate::error::Result;
use crate::filter::{apply_filter, synthesize_filter_from_witness};
use crate::ordering::{search_order_witness, OrderVerdict, SearchConfig};
use crate::random::{
    random_contraction, random_full_rank_contraction, random_measurement_assemblage,
    random_state_assemblage, rng_for,
};
use crate::robustness::{
    apply_incompatibility_free_op, consistent_steering_robustness, incompatibility_robustness,
    random_free_op, steering_induced_incompatibility, steering_robustness, InducedMeasure,
    InducedSearchConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    /// |IR(E) - SR^c(E/d)| on random measurement assemblages.
    Observation1,
    /// SR(filtered) ≤ IR(SEO) for random assemblages and filters.
    Theorem3,
    /// IR and the induced-measure lower bound never increase under random
    /// free operations.
    Monotonicity,
    /// Witness search success and filter reconstruction on filtered pairs.
    RoundTrip,
    /// SR^c is invariant under full-rank filters.
    SrcInvariance,
}

impl Suite {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "obs1" => Some(Suite::Observation1),
            "thm3" => Some(Suite::Theorem3),
            "monotone" => Some(Suite::Monotonicity),
            "roundtrip" => Some(Suite::RoundTrip),
            "src-invariance" => Some(Suite::SrcInvariance),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Observation1 => "obs1",
            Suite::Theorem3 => "thm3",
            Suite::Monotonicity => "monotone",
            Suite::RoundTrip => "roundtrip",
            Suite::SrcInvariance => "src-invariance",
        }
    }
}

#[derive(Debug, Clone)]
pub struct CertifyOutcome {
    pub suite: Suite,
    pub n_instances: usize,
    pub seed: u64,
    pub tolerance: f64,
    /// Worst signed margin (≤ tolerance passes; the meaning is per suite).
    pub worst_margin: f64,
    pub failures: Vec<String>,
    /// Per-suite extra counters (e.g. witness-search successes).
    pub counters: Vec<(String, f64)>,
    pub pass: bool,
}

/// |IR(E) - SR^c(E/d)| ≤ tol on random qubit assemblages.
pub fn certify_observation1(n_instances: usize, seed: u64) -> Result<CertifyOutcome> {
    let tolerance = 1e-5;
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for i in 0..n_instances {
        let mut rng = rng_for(seed, "certify-obs1", i as u64);
        let meas = random_measurement_assemblage(&mut rng, 2, 2, false)?;
        let ir = incompatibility_robustness(&meas)?.value;
        let d = meas.dim() as f64;
        let elements = meas
            .elements()
            .iter()
            .map(|row| row.iter().map(|e| e.scale(1.0 / d)).collect())
            .collect();
        let sigma = crate::assemblage::StateAssemblage::new(elements)?;
        let src = consistent_steering_robustness(&sigma)?.value;
        let gap = (ir - src).abs();
        worst = worst.max(gap);
        if gap > tolerance {
            failures.push(format!("instance {i}: |IR - SRc| = {gap:.3e}"));
        }
    }
    Ok(CertifyOutcome {
        suite: Suite::Observation1,
        n_instances,
        seed,
        tolerance,
        worst_margin: worst,
        pass: failures.is_empty(),
        failures,
        counters: Vec::new(),
    })
}

/// SR(filtered) ≤ IR(SEO(σ)) + tol across random filters.
pub fn certify_theorem3(
    n_instances: usize,
    filters_per_instance: usize,
    seed: u64,
) -> Result<CertifyOutcome> {
    let tolerance = 1e-6;
    let mut worst = f64::NEG_INFINITY;
    let mut failures = Vec::new();
    for i in 0..n_instances {
        let mut rng = rng_for(seed, "certify-thm3", i as u64);
        let dim = if i % 2 == 0 { 2 } else { 3 };
        let sigma = random_state_assemblage(&mut rng, dim, 2, 2, true)?;
        let seo = compute_seo(&sigma)?;
        let ir = incompatibility_robustness(&seo)?.value;
        for f in 0..filters_per_instance {
            let filter = random_contraction(&mut rng, dim, 0.01);
            let tau = match apply_filter(&sigma, &filter) {
                Ok(out) => out.output,
                Err(_) => continue,
            };
            let sr = steering_robustness(&tau)?.value;
            let margin = sr - ir;
            worst = worst.max(margin);
            if margin > tolerance {
                failures.push(format!(
                    "instance {i}, filter {f}: SR {sr:.8} exceeds IR {ir:.8}"
                ));
            }
        }
    }
    Ok(CertifyOutcome {
        suite: Suite::Theorem3,
        n_instances,
        seed,
        tolerance,
        worst_margin: worst,
        pass: failures.is_empty(),
        failures,
        counters: Vec::new(),
    })
}

/// Monotonicity under random incompatibility free operations: neither IR
/// nor the induced-measure lower bound may exceed the pre-image value.
pub fn certify_monotonicity(n_instances: usize, seed: u64) -> Result<CertifyOutcome> {
    let tolerance = 1e-6;
    let mut worst = f64::NEG_INFINITY;
    let mut failures = Vec::new();
    let induced_config =
        InducedSearchConfig { n_restarts: 4, max_evals_per_restart: 90, seed };
    for i in 0..n_instances {
        let mut rng = rng_for(seed, "certify-monotone", i as u64);
        let meas = random_measurement_assemblage(&mut rng, 2, 2, false)?;
        let ir_before = incompatibility_robustness(&meas)?.value;
        let op = random_free_op(&mut rng, 2, 2, 2);
        let mapped = apply_incompatibility_free_op(&meas, &op)?;
        let ir_after = incompatibility_robustness(&mapped)?.value;
        let ir_margin = ir_after - ir_before;
        worst = worst.max(ir_margin);
        if ir_margin > tolerance {
            failures.push(format!("instance {i}: IR rose by {ir_margin:.3e}"));
        }
        // The search is heuristic, so the sound comparison is against the
        // exact pre-image measure: I_SR(E) = IR(E), and any lower bound on
        // I_SR of the image must stay below it.
        let induced = steering_induced_incompatibility(
            &mapped,
            InducedMeasure::SteeringRobustness,
            &induced_config,
        )?;
        let induced_margin = induced.lower_bound - ir_before;
        worst = worst.max(induced_margin);
        if induced_margin > tolerance {
            failures.push(format!(
                "instance {i}: induced bound rose to {:.8} above IR {:.8}",
                induced.lower_bound, ir_before
            ));
        }
    }
    Ok(CertifyOutcome {
        suite: Suite::Monotonicity,
        n_instances,
        seed,
        tolerance,
        worst_margin: worst,
        pass: failures.is_empty(),
        failures,
        counters: Vec::new(),
    })
}

/// Witness search on filtered pairs: the search must verify at least
/// `min_success_rate` of the instances; each success must reconstruct the
/// target through the synthesized filter and report at least the realised
/// success probability. Failures stay `Unknown`, never refutations.
pub fn certify_roundtrip(
    n_instances: usize,
    seed: u64,
    restarts: usize,
    min_success_rate: f64,
) -> Result<CertifyOutcome> {
    let tolerance = 1e-6;
    let mut failures = Vec::new();
    let mut successes = 0usize;
    let mut worst_reconstruction = 0.0f64;
    let mut worst_probability_gap = f64::NEG_INFINITY;
    for i in 0..n_instances {
        let mut rng = rng_for(seed, "certify-roundtrip", i as u64);
        let dim = if i % 2 == 0 { 2 } else { 3 };
        let sigma = random_state_assemblage(&mut rng, dim, 2, 2, true)?;
        let filter = random_contraction(&mut rng, dim, 0.01);
        let outcome = apply_filter(&sigma, &filter)?;
        let tau = outcome.output;
        let config = SearchConfig {
            n_restarts: restarts,
            max_iters: 500,
            seed: seed.wrapping_add(i as u64),
            ..Default::default()
        };
        match search_order_witness(&sigma, &tau, &config)? {
            OrderVerdict::Holds { best_witness, .. } => {
                successes += 1;
                let synth = synthesize_filter_from_witness(&sigma, &tau, &best_witness)?;
                let replay = apply_filter(&sigma, &synth)?;
                let mut err = 0.0f64;
                for x in 0..tau.n_inputs() {
                    for a in 0..tau.n_outputs() {
                        let d = replay.output.element(x, a).matrix()
                            - tau.element(x, a).matrix();
                        err = err.max(d.norm());
                    }
                }
                worst_reconstruction = worst_reconstruction.max(err);
                if err > tolerance {
                    failures.push(format!("instance {i}: reconstruction error {err:.3e}"));
                }
                let p_best = best_witness
                    .lambda_opt
                    .finite()
                    .map(|l| 1.0 / l)
                    .unwrap_or(0.0);
                let gap = outcome.p_succ - p_best;
                worst_probability_gap = worst_probability_gap.max(gap);
                if gap > 1e-7 {
                    failures.push(format!(
                        "instance {i}: reported p_max {p_best:.9} below realised {:.9}",
                        outcome.p_succ
                    ));
                }
            }
            OrderVerdict::RefutedByRank { .. } => {
                failures.push(format!(
                    "instance {i}: impossible rank refutation on a filtered pair"
                ));
            }
            OrderVerdict::Unknown { best_residual } => {
                // Logged, not a refutation; counted against the rate.
                let _ = best_residual;
            }
        }
    }
    let rate = successes as f64 / n_instances.max(1) as f64;
    let mut pass = failures.is_empty();
    if rate < min_success_rate {
        failures.push(format!(
            "search succeeded on {successes}/{n_instances} ({:.0}%), required {:.0}%",
            rate * 100.0,
            min_success_rate * 100.0
        ));
        pass = false;
    }
    Ok(CertifyOutcome {
        suite: Suite::RoundTrip,
        n_instances,
        seed,
        tolerance,
        worst_margin: worst_reconstruction,
        pass,
        failures,
        counters: vec![
            ("successes".into(), successes as f64),
            ("success_rate".into(), rate),
            ("worst_probability_gap".into(), worst_probability_gap),
        ],
    })
}

/// |SR^c(σ) - SR^c(filtered σ)| ≤ tol for full-rank filters.
pub fn certify_src_invariance(n_instances: usize, seed: u64) -> Result<CertifyOutcome> {
    let tolerance = 1e-5;
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for i in 0..n_instances {
        let mut rng = rng_for(seed, "certify-src", i as u64);
        let dim = if i % 2 == 0 { 2 } else { 3 };
        let sigma = random_state_assemblage(&mut rng, dim, 2, 2, true)?;
        let before = consistent_steering_robustness(&sigma)?.value;
        let filter = random_full_rank_contraction(&mut rng, dim);
        let tau = apply_filter(&sigma, &filter)?.output;
        let after = consistent_steering_robustness(&tau)?.value;
        let gap = (before - after).abs();
        worst = worst.max(gap);
        if gap > tolerance {
            failures.push(format!("instance {i}: SRc moved by {gap:.3e}"));
        }
    }
    Ok(CertifyOutcome {
        suite: Suite::SrcInvariance,
        n_instances,
        seed,
        tolerance,
        worst_margin: worst,
        pass: failures.is_empty(),
        failures,
        counters: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_obs1_batch_passes() {
        let outcome = certify_observation1(4, 11).unwrap();
        assert!(outcome.pass, "failures: {:?}", outcome.failures);
        assert!(outcome.worst_margin <= 1e-5);
    }

    #[test]
    fn small_thm3_batch_passes() {
        let outcome = certify_theorem3(3, 2, 12).unwrap();
        assert!(outcome.pass, "failures: {:?}", outcome.failures);
    }

    #[test]
    fn small_roundtrip_batch_passes() {
        let outcome = certify_roundtrip(4, 13, 12, 0.95).unwrap();
        assert!(outcome.pass, "failures: {:?}", outcome.failures);
    }

    #[test]
    fn small_src_invariance_batch_passes() {
        let outcome = certify_src_invariance(3, 14).unwrap();
        assert!(outcome.pass, "failures: {:?}", outcome.failures);
    }

    #[test]
    fn small_monotonicity_batch_passes() {
        let outcome = certify_monotonicity(2, 15).unwrap();
        assert!(outcome.pass, "failures: {:?}", outcome.failures);
    }
}
