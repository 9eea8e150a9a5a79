// Möbius sums of normalized traces of products of unitary powers, computed
// directly and through eigen-expansions, plus the rank-one tensor identity.
//
// `cargo run --release --example trace_products`

use num_rational::Ratio;

use ncflow::linalg::{random_unit_vector, seeded_rng, CMatrix, UnitaryMatrix};
use ncflow::matrix_dynamics::{rank_one_flow, trace_product_sum, IntegerPhase, TraceProductSpec};
use ncflow::moebius::MoebiusTable;

pub fn run_example() -> ncflow::Result<()> {
    let n = 1_000;
    let table = MoebiusTable::build(n)?;

    for k in [2, 4, 8] {
        let spec = TraceProductSpec::random_linear(k, 2, 5);
        let r = trace_product_sum(&spec, &table, n, true)?;
        println!(
            "k = {k}: |value| = {:.3e}, per-term path gap {:.1e}",
            r.value.norm(),
            r.max_term_gap
        );
    }

    // quadratic exponents n(n−1)/2 and n on odd n only
    let mut rng = seeded_rng(3);
    let spec = TraceProductSpec::new(
        vec![UnitaryMatrix::haar(3, &mut rng), UnitaryMatrix::haar(3, &mut rng)],
        vec![
            CMatrix::random_with_norm(3, 1.0, &mut rng),
            CMatrix::random_with_norm(3, 0.5, &mut rng),
        ],
        vec![
            IntegerPhase::new(vec![Ratio::new(0, 1), Ratio::new(-1, 2), Ratio::new(1, 2)])?,
            IntegerPhase::from_integers(&[0, 1]),
        ],
        2,
        1,
    )?;
    let r = trace_product_sum(&spec, &table, n, true)?;
    println!(
        "quadratic phase: {:.3e} (eigen path {:.3e})",
        r.value,
        r.eigen_value.unwrap_or_default()
    );

    let u = UnitaryMatrix::haar(4, &mut rng);
    let xi = random_unit_vector(4, &mut rng);
    let eta = random_unit_vector(4, &mut rng);
    let flow = rank_one_flow(&u, &xi, &eta)?;
    let worst = (0..=100)
        .map(|m| (flow.product_value(m) - flow.tensor_value(m)).norm())
        .fold(0.0, f64::max);
    println!("rank-one tensor identity, n <= 100: max gap {worst:.1e}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> ncflow::Result<()> {
    run_example()
}
