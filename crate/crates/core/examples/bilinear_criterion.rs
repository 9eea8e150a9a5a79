// Checking the bilinear prime-pair hypothesis for a flow and comparing the
// Möbius sum with the resulting bound.
//
// `cargo run --release --example bilinear_criterion`

use ncflow::flows::{bsz_check, constant_flow, rotation_flow, BszParams, Flow};
use ncflow::linalg::c;
use ncflow::moebius::MoebiusTable;

pub fn run_example() -> ncflow::Result<()> {
    let n = 1_000_000;
    let table = MoebiusTable::build(n)?;
    let golden: Box<dyn Flow> = Box::new(rotation_flow((5f64.sqrt() - 1.0) / 2.0));
    let constant: Box<dyn Flow> = Box::new(constant_flow(c(1.0, 0.0)));
    for flow in [golden, constant] {
        let r = bsz_check(&flow, &table, BszParams::new(0.25, 10_000, n))?;
        println!(
            "{}: hypothesis {} (worst ratio {:.3} on {:?}), |Σμf| = {:.1} vs bound {:.1}",
            flow.label(),
            if r.hypothesis_holds { "holds" } else { "fails" },
            r.max_correlation_ratio,
            r.worst_pair,
            r.mobius_sum_abs,
            r.criterion_bound
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> ncflow::Result<()> {
    run_example()
}
