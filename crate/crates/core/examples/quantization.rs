// Rounding eigenphases to a finite grid and the resulting bound on the
// Möbius average.
//
// `cargo run --release --example quantization`

use ncflow::linalg::{seeded_rng, CMatrix, UnitaryMatrix};
use ncflow::matrix_dynamics::{finite_vn_average_bound, quantize_unitary, DEFAULT_GRID_CAP};
use ncflow::moebius::MoebiusTable;

pub fn run_example() -> ncflow::Result<()> {
    let horizon = 100;
    let table = MoebiusTable::build(horizon)?;
    let mut rng = seeded_rng(2024);
    let u = UnitaryMatrix::haar(8, &mut rng);
    let t = CMatrix::random_with_norm(8, 1.0, &mut rng);
    let a = CMatrix::random(8, 8, &mut rng);

    for epsilon in [0.1, 0.01] {
        let q = quantize_unitary(&u, epsilon, horizon, DEFAULT_GRID_CAP)?;
        println!("ε = {epsilon}: grid m = {}, ‖U − V‖ = {:.2e}", q.grid, q.step_error);
        for (n, gap) in &q.sampled {
            println!("  ‖U^{n} − V^{n}‖ = {gap:.2e}");
        }
        let r = finite_vn_average_bound(&u, &q, &t, &a, &table, horizon)?;
        println!(
            "  |s_N(U)| = {:.3e}  |s_N(V)| = {:.3e}  bound = {:.3e}  coarse bound = {:.3e}",
            r.s_n.norm(),
            r.s_n_quantized.norm(),
            r.bound,
            r.cs_bound
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> ncflow::Result<()> {
    run_example()
}
