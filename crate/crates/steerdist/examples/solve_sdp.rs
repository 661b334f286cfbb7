//! Using the SDP solver directly.
//!
//! States the max-relative-entropy scaling constant as a small SDP with a
//! free scalar block — minimise λ subject to λρ - η ⪰ 0 — solves it, and
//! cross-checks against the spectral formula. Also shows the sparse
//! triplet dump for external verification.
//!
//! Run with: cargo run --example solve_sdp

use steerdist::linalg::{hermitian_basis, HermitianOperator};
use steerdist::maxrelent::{dmax, ExtendedReal};
use steerdist::random::{random_density, rng_for};
use steerdist::sdp::{solve, SdpOptions, SdpProblem};

fn main() -> Result<(), steerdist::Error> {
    let mut rng = rng_for(3, "sdp-example", 0);
    let eta = random_density(&mut rng, 2);
    let rho = random_density(&mut rng, 2);

    let mut problem = SdpProblem::new();
    let lam = problem.add_block("lambda", 1, false);
    let slack = problem.add_block("slack", 2, true);
    problem.set_objective(lam, HermitianOperator::identity(1));
    for f in hermitian_basis(2) {
        // tr(F·slack) - λ tr(F·ρ) = -tr(F·η), i.e. slack = λρ - η.
        problem.add_equality(
            vec![
                (slack, f.clone()),
                (lam, HermitianOperator::identity(1).scale(-f.inner(&rho))),
            ],
            -f.inner(&eta),
        );
    }

    let mut dump = Vec::new();
    problem.write_triplet_dump(&mut dump).expect("dump");
    println!("--- problem dump ---");
    print!("{}", String::from_utf8_lossy(&dump));
    println!("--------------------");

    let sol = solve(&problem, &SdpOptions::default())?;
    println!("status: {:?}", sol.status);
    println!("λ (SDP):       {:.12}", sol.primal_objective);
    if let ExtendedReal::Finite(d) = dmax(&eta, &rho)? {
        println!("λ (spectral):  {:.12}", 2f64.powf(d));
    }
    println!("duality gap:   {:.2e}", sol.gap);
    println!("feasibility:   {:.2e}", sol.primal_residual);
    Ok(())
}
