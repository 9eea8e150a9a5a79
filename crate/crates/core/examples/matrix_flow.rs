// Inner-automorphism flows `n ↦ tr(ρ Uⁿ A U*ⁿ)` on matrix algebras.
//
// `cargo run --release --example matrix_flow`

use ncflow::flows::{average_series, decay_fit, default_checkpoints, periodic_flow, regrouped_periodic_average};
use ncflow::linalg::{seeded_rng, CMatrix, DensityState, UnitaryMatrix};
use ncflow::matrix_dynamics::{ad_flow, FdAlgebra};
use ncflow::moebius::MoebiusTable;

pub fn run_example() -> ncflow::Result<()> {
    let n_max = 100_000;
    let table = MoebiusTable::build(n_max)?;
    let mut rng = seeded_rng(11);

    // a generic unitary on M_3 ⊕ M_5
    let alg = FdAlgebra::new(vec![3, 5])?;
    let u = UnitaryMatrix::new(alg.block_diag(&[
        UnitaryMatrix::haar(3, &mut rng).matrix().clone(),
        UnitaryMatrix::haar(5, &mut rng).matrix().clone(),
    ])?)?;
    let a = CMatrix::random_with_norm(alg.matrix_size(), 1.0, &mut rng);
    let rho = DensityState::random(alg.matrix_size(), &mut rng);
    let flow = ad_flow(&u, &a, &rho)?;
    let checkpoints: Vec<u64> = default_checkpoints().into_iter().filter(|&n| n <= n_max).collect();
    let series = average_series(&flow, &table, &checkpoints, 4)?;
    for (n, v) in series.checkpoints.iter().zip(&series.values) {
        println!("{n:>8} |s_N| = {:.3e}", v.norm());
    }
    let fit = decay_fit(&series)?;
    println!("decay exponent h = {:.2}", fit.h);

    // a periodic unitary reduces to Möbius sums over residue classes
    let q = 6;
    let angles: Vec<f64> = (0..4).map(|j| (j * j % q) as f64 / q as f64).collect();
    let up = UnitaryMatrix::diagonal_phases(&angles);
    let ap = CMatrix::random_with_norm(4, 1.0, &mut rng);
    let rp = DensityState::random(4, &mut rng);
    let pf = periodic_flow(&up, &rp, &ap, 64)?;
    let direct = average_series(&pf, &table, &[n_max], 1)?.last();
    let regrouped = regrouped_periodic_average(pf.values(), &table, n_max)?;
    println!("period {}: direct {direct:.3e}, regrouped {regrouped:.3e}", pf.period());
    Ok(())
}

#[allow(dead_code)]
fn main() -> ncflow::Result<()> {
    run_example()
}
