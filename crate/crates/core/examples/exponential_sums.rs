// Möbius-weighted exponential sums with polynomial phases and a decay fit.
//
// `cargo run --release --example exponential_sums`

use ncflow::flows::{average_series, decay_fit, default_checkpoints, FnFlow};
use ncflow::moebius::{unit_phase, MoebiusTable, PolynomialPhase};

pub fn run_example() -> ncflow::Result<()> {
    let n_max = 100_000;
    let table = MoebiusTable::build(n_max)?;
    let golden = (5f64.sqrt() - 1.0) / 2.0;

    for coeffs in [vec![0.0, golden], vec![0.0, 0.0, 2f64.sqrt()], vec![0.0, 0.5]] {
        let phase = PolynomialPhase::new(coeffs.clone(), 1, 0)?;
        println!("phase {coeffs:?}: s_N = {:.3e}", table.exp_sum(&phase, n_max)?.norm());
    }

    // restricted to an arithmetic progression
    let phase = PolynomialPhase::new(vec![0.0, golden], 3, 1)?;
    println!("n ≡ 1 (3): s_N = {:.3e}", table.exp_sum(&phase, n_max)?.norm());

    let p = PolynomialPhase::linear(golden);
    let flow = FnFlow::new("golden rotation", 1.0, move |n| unit_phase(p.reduced_value(n)));
    let checkpoints: Vec<u64> = default_checkpoints().into_iter().filter(|&n| n <= n_max).collect();
    let series = average_series(&flow, &table, &checkpoints, 2)?;
    for (n, v) in series.checkpoints.iter().zip(&series.values) {
        println!("{n:>8} {:.3e}", v.norm());
    }
    let fit = decay_fit(&series)?;
    println!(
        "|s_N| ≈ {:.3} (log N)^-{:.2}  (r² = {:.2})",
        fit.c, fit.h, fit.r_squared
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> ncflow::Result<()> {
    run_example()
}
