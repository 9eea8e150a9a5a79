// Reduced words in the free group, non-crossing partitions and the free
// central limit theorem.
//
// `cargo run --release --example free_probability`

use num_rational::BigRational;

use ncflow::free_words::{
    bkn_coefficients, bkn_moment_norm, free_clt_moments, moments_to_cumulants, nc_partitions, semicircle_moments,
    word_expansion_moments, GroupElementSum, ReducedWord, DEFAULT_WORD_BUDGET,
};
use ncflow::moebius::MoebiusTable;

pub fn run_example() -> ncflow::Result<()> {
    let a = ReducedWord::from_runs(&[(0, 2), (1, -1)]);
    let b = ReducedWord::from_runs(&[(1, 1), (0, 1)]);
    println!("({a}) · ({b}) = {}", a.multiply(&b));
    println!("shifted by 3: {}", a.shift(3));

    let x =
        GroupElementSum::<i64>::from_terms([(ReducedWord::generator(0), 1), (ReducedWord::generator(0).inverse(), 1)]);
    println!("τ((g + g⁻¹)⁴) = {}", x.pow(4).trace());

    for n in 1..=8 {
        print!("|NC({n})| = {}  ", nc_partitions(n)?.len());
    }
    println!();

    let half = BigRational::new(1.into(), 2.into());
    let semi = semicircle_moments(&half, 8);
    let kappa = moments_to_cumulants(&semi)?;
    println!(
        "semicircle cumulants: {:?}",
        (1..=4).map(|k| kappa.kappa(k).to_string()).collect::<Vec<_>>()
    );

    for q in [2, 10, 100] {
        let m = free_clt_moments(q, 4)?;
        println!("q = {q}: m₄ = {}", m[3]);
    }
    let words = word_expansion_moments(2, 6, DEFAULT_WORD_BUDGET)?;
    println!(
        "word expansion at q = 2: {:?}",
        words.iter().map(|m| m.to_string()).collect::<Vec<_>>()
    );

    let table = MoebiusTable::build(1_000)?;
    let coeffs = bkn_coefficients(&table, 1, 1, 6)?;
    let est = bkn_moment_norm(1, &ReducedWord::generator(0), 1, &coeffs, 4, DEFAULT_WORD_BUDGET)?;
    println!(
        "μ coefficients {coeffs:?}: τ((B*B)²) = {}, ‖B/q‖ ≥ {:.4}",
        est.trace_power, est.norm_estimate
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> ncflow::Result<()> {
    run_example()
}
