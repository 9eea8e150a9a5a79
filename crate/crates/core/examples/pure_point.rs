// Quasi-free flows of a diagonal one-particle unitary with generic
// eigenphases.
//
// `cargo run --release --example pure_point`

use rand::Rng;

use ncflow::car_fock::{pure_point_flow, CARMonomial, CARPolynomial, Symbol};
use ncflow::flows::{average_series, decay_fit, default_checkpoints};
use ncflow::linalg::seeded_rng;
use ncflow::moebius::MoebiusTable;

pub fn run_example() -> ncflow::Result<()> {
    let n_max = 100_000;
    let table = MoebiusTable::build(n_max)?;
    let checkpoints: Vec<u64> = default_checkpoints().into_iter().filter(|&n| n <= n_max).collect();
    let d = 6;
    for seed in 1..=3 {
        let mut rng = seeded_rng(seed);
        let angles: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
        let t = Symbol::random(d, &mut rng);
        let a = CARPolynomial::from_monomial(CARMonomial::random_balanced(d, 4, &mut rng));
        let flow = pure_point_flow(&angles, &a, t)?;
        let series = average_series(&flow, &table, &checkpoints, 4)?;
        let fit = decay_fit(&series)?;
        println!(
            "seed {seed}: |s_N| at N = {n_max} is {:.2e}, fitted h = {:.2}",
            series.last().norm(),
            fit.h
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> ncflow::Result<()> {
    run_example()
}
