//! Free operations and monotonicity.
//!
//! Applies random classical pre/post-processing to measurement assemblages
//! and steering-side free operations to state assemblages, checking that
//! the respective robustness measures never increase.
//!
//! Run with: cargo run --example free_operations

use steerdist::random::{random_measurement_assemblage, random_state_assemblage, rng_for};
use steerdist::robustness::{
    apply_incompatibility_free_op, apply_steering_free_op, incompatibility_robustness,
    random_free_op, steering_robustness,
};

fn main() -> Result<(), steerdist::Error> {
    let mut rng = rng_for(11, "free-ops-example", 0);

    println!("incompatibility side:");
    for i in 0..3 {
        let meas = random_measurement_assemblage(&mut rng, 2, 2, true)?;
        let before = incompatibility_robustness(&meas)?.value;
        let op = random_free_op(&mut rng, 2, 2, 2);
        let mapped = apply_incompatibility_free_op(&meas, &op)?;
        let after = incompatibility_robustness(&mapped)?.value;
        println!("  instance {i}: IR {before:.6} -> {after:.6} (monotone: {})", after <= before + 1e-9);
    }

    println!("steering side:");
    for i in 0..3 {
        let sigma = random_state_assemblage(&mut rng, 2, 2, 2, true)?;
        let before = steering_robustness(&sigma)?.value;
        let op = random_free_op(&mut rng, 2, 2, 2);
        let mapped = apply_steering_free_op(&sigma, &op)?;
        let after = steering_robustness(&mapped)?.value;
        println!("  instance {i}: SR {before:.6} -> {after:.6} (monotone: {})", after <= before + 1e-9);
    }
    Ok(())
}
