use std::time::Instant;

#[test]
fn time_criterion6_and_4_subsets() {
    let t0 = Instant::now();
    let outcome = steerdist::certify::certify_src_invariance(10, 2024).unwrap();
    println!("src-invariance x10: {:.1}s pass={} worst={:.2e}", t0.elapsed().as_secs_f64(), outcome.pass, outcome.worst_margin);
    let t0 = Instant::now();
    let outcome = steerdist::certify::certify_theorem3(20, 5, 2024).unwrap();
    println!("thm3 20x5: {:.1}s pass={} worst={:.2e}", t0.elapsed().as_secs_f64(), outcome.pass, outcome.worst_margin);
}
