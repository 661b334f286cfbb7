//! Robustness measures and membership certificates.
//!
//! Computes the generalised steering robustness, its consistent variant,
//! and the incompatibility robustness for the Pauli Z/X pair, then shows
//! the two faces of a membership query: an explicit LHS decomposition for
//! an unsteerable assemblage and a separating witness for a steerable one.
//!
//! Run with: cargo run --example robustness_measures

use steerdist::linalg::HermitianOperator;
use steerdist::presets;
use steerdist::robustness::{
    consistent_steering_robustness, incompatibility_robustness, lhs_membership,
    steering_robustness, Membership,
};

fn main() -> Result<(), steerdist::Error> {
    let sigma = presets::pauli_halved_assemblage()?;
    let meas = presets::pauli_pair()?;

    let sr = steering_robustness(&sigma)?;
    let src = consistent_steering_robustness(&sigma)?;
    let ir = incompatibility_robustness(&meas)?;
    println!("Pauli pair, maximally steerable assemblage E/2:");
    println!("  SR  = {:.9}", sr.value);
    println!("  SRc = {:.9}", src.value);
    println!("  IR  = {:.9}", ir.value);
    println!("  (all three coincide at 3 - 2√2 = {:.9})", 3.0 - 2.0 * 2f64.sqrt());
    println!();

    match lhs_membership(&sigma)? {
        Membership::Infeasible { witness } => {
            println!("E/2 is steerable; witness value {:.6} > 1", witness.value);
        }
        Membership::Member { .. } => unreachable!("E/2 is steerable"),
    }

    // An unsteerable assemblage: conditional probabilities times one state.
    let rho = HermitianOperator::from_real_diagonal(&[0.7, 0.3]);
    let p = [[0.2, 0.8], [0.6, 0.4]];
    let elements = (0..2)
        .map(|x| (0..2).map(|a| rho.scale(p[x][a])).collect())
        .collect();
    let lhs = steerdist::assemblage::StateAssemblage::new(elements)?;
    match lhs_membership(&lhs)? {
        Membership::Member { decomposition, reproduction_error } => {
            println!(
                "conditional family is LHS: {} components reproduce it to {:.1e}",
                decomposition.len(),
                reproduction_error
            );
        }
        Membership::Infeasible { .. } => unreachable!("manifestly LHS"),
    }
    Ok(())
}
