mod sieve_mertens {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/sieve_mertens.rs"));
}

#[test]
fn sieve_mertens_example_runs() {
    sieve_mertens::run_example().expect("sieve_mertens example should run");
}

mod exponential_sums {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/exponential_sums.rs"));
}

#[test]
fn exponential_sums_example_runs() {
    exponential_sums::run_example().expect("exponential_sums example should run");
}

mod matrix_flow {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/matrix_flow.rs"));
}

#[test]
fn matrix_flow_example_runs() {
    matrix_flow::run_example().expect("matrix_flow example should run");
}

mod trace_products {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/trace_products.rs"));
}

#[test]
fn trace_products_example_runs() {
    trace_products::run_example().expect("trace_products example should run");
}

mod quantization {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/quantization.rs"));
}

#[test]
fn quantization_example_runs() {
    quantization::run_example().expect("quantization example should run");
}

mod car_algebra {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/car_algebra.rs"));
}

#[test]
fn car_algebra_example_runs() {
    car_algebra::run_example().expect("car_algebra example should run");
}

mod counterexample {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/counterexample.rs"));
}

#[test]
fn counterexample_example_runs() {
    counterexample::run_example().expect("counterexample example should run");
}

mod pure_point {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/pure_point.rs"));
}

#[test]
fn pure_point_example_runs() {
    pure_point::run_example().expect("pure_point example should run");
}

mod free_probability {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/free_probability.rs"));
}

#[test]
fn free_probability_example_runs() {
    free_probability::run_example().expect("free_probability example should run");
}

mod bilinear_criterion {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/bilinear_criterion.rs"));
}

#[test]
fn bilinear_criterion_example_runs() {
    bilinear_criterion::run_example().expect("bilinear_criterion example should run");
}

mod run_experiment {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/run_experiment.rs"));
}

#[test]
fn run_experiment_example_runs() {
    run_experiment::run_example().expect("run_experiment example should run");
}
