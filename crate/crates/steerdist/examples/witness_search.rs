//! Deciding the SEO ordering between two assemblages.
//!
//! Draws a random steerable assemblage, filters it through a random
//! single-Kraus contraction, and asks the search to recover a witness for
//! σ ≻ τ from the pair alone. The synthesized optimal filter is then
//! replayed and its success probability compared with the realised one.
//!
//! Run with: cargo run --example witness_search

use steerdist::filter::{apply_filter, synthesize_filter_from_witness};
use steerdist::ordering::{search_order_witness, OrderVerdict, SearchConfig};
use steerdist::random::{random_contraction, random_state_assemblage, rng_for};

fn main() -> Result<(), steerdist::Error> {
    let mut rng = rng_for(7, "witness-search-example", 0);
    let sigma = random_state_assemblage(&mut rng, 3, 2, 2, true)?;
    let filter = random_contraction(&mut rng, 3, 0.05);
    let outcome = apply_filter(&sigma, &filter)?;
    println!("realised filter success probability: {:.9}", outcome.p_succ);

    let config = SearchConfig { n_restarts: 12, seed: 1, ..Default::default() };
    match search_order_witness(&sigma, &outcome.output, &config)? {
        OrderVerdict::Holds { witness, best_witness, n_verified } => {
            println!("ordering holds; {n_verified} verified witnesses");
            println!("first witness residual: {:.3e}", witness.residual);
            if let Some(lam) = best_witness.lambda_opt.finite() {
                println!("optimal success probability 1/λ_opt = {:.9}", 1.0 / lam);
            }
            let synth = synthesize_filter_from_witness(&sigma, &outcome.output, &best_witness)?;
            let replay = apply_filter(&sigma, &synth)?;
            let mut err = 0.0f64;
            for x in 0..2 {
                for a in 0..2 {
                    err = err.max(
                        (replay.output.element(x, a).matrix()
                            - outcome.output.element(x, a).matrix())
                        .norm(),
                    );
                }
            }
            println!("synthesized filter reproduces τ to {err:.3e}");
            println!("and achieves p_succ = {:.9}", replay.p_succ);
        }
        OrderVerdict::RefutedByRank { rank_sigma, rank_tau } => {
            println!("refuted: rank(ρ_τ) = {rank_tau} exceeds rank(ρ_σ) = {rank_sigma}");
        }
        OrderVerdict::Unknown { best_residual } => {
            println!("search inconclusive (best residual {best_residual:.3e});");
            println!("this is not a refutation — the search is incomplete by nature");
        }
    }
    Ok(())
}
