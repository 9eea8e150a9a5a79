// A quasi-free shift flow whose Möbius average does not decay.
//
// `cargo run --release --example counterexample`

use ncflow::car_fock::counterexample_flow;
use ncflow::flows::{geometric_checkpoints, Flow};
use ncflow::moebius::MoebiusTable;

pub fn run_example() -> ncflow::Result<()> {
    let l = 10_000;
    let table = MoebiusTable::build(l)?;
    let flows = counterexample_flow(l, &table)?;
    let checkpoints = geometric_checkpoints(1.0, 4.0, 0.5);
    let bh = flows.bh_series(&table, &checkpoints, 2)?;
    let car = flows.car_series(&table, &checkpoints, 2)?;
    println!("{:>6} {:>10} {:>10} {:>10}", "N", "bh s_N", "Q(N)/N", "car s_N");
    for (i, &n) in checkpoints.iter().enumerate() {
        println!(
            "{n:>6} {:>10.6} {:>10.6} {:>10.6}",
            bh.values[i].re,
            table.squarefree_density(n)?,
            car.values[i].re
        );
    }
    for n in [1, 2, 4, 6, 30] {
        println!(
            "car flow at n = {n}: {} (μ(n) = {})",
            flows.car_flow.evaluate(n).re,
            table.mu(n)
        );
    }
    println!("3/π² = {:.6}", 3.0 / std::f64::consts::PI.powi(2));
    Ok(())
}

#[allow(dead_code)]
fn main() -> ncflow::Result<()> {
    run_example()
}
