// Möbius table, Mertens function and the squarefree density.
//
// `cargo run --release --example sieve_mertens`

use ncflow::moebius::MoebiusTable;

pub fn run_example() -> ncflow::Result<()> {
    let n_max = 1_000_000;
    let table = MoebiusTable::build(n_max)?;
    println!("{} primes up to {n_max}", table.primes().len());
    println!("{:>9} {:>8} {:>12} {:>10}", "N", "M(N)", "M(N)/N", "Q(N)/N");
    for (n, ratio) in table.mertens_series(&[10, 100, 1_000, 10_000, 100_000, n_max])? {
        println!(
            "{n:>9} {:>8} {ratio:>12.3e} {:>10.6}",
            table.mertens(n)?,
            table.squarefree_density(n)?
        );
    }
    println!("6/π² = {:.6}", 6.0 / std::f64::consts::PI.powi(2));
    Ok(())
}

#[allow(dead_code)]
fn main() -> ncflow::Result<()> {
    run_example()
}
