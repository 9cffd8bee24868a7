//! Run the acceptance battery with a chosen seed: `cargo run --example verify -- 7`.
fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let results = mhk::acceptance::run_all(seed);
    for r in &results {
        println!("{}", r.line());
    }
    let failed = results.iter().filter(|r| !r.pass).count();
    println!("{} of {} criteria pass", results.len() - failed, results.len());
    std::process::exit(i32::from(failed > 0));
}
