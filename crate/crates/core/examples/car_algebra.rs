// Creation operators on the fermionic Fock space, second quantization and
// quasi-free states.
//
// `cargo run --release --example car_algebra`

use ncflow::car_fock::{
    gamma, normal_order, quasifree_density_matrix, quasifree_eval, CARMonomial, CARPolynomial, FockSpace, Symbol,
};
use ncflow::linalg::{inner, random_vector, seeded_rng, CMatrix, UnitaryMatrix};

pub fn run_example() -> ncflow::Result<()> {
    let d = 4;
    let space = FockSpace::new(d)?;
    let mut rng = seeded_rng(7);
    let f = random_vector(d, &mut rng);
    let g = random_vector(d, &mut rng);
    let af = space.creation_matrix(&f)?;
    let ag = space.creation_matrix(&g)?;
    let anti = &(&af * &ag.adjoint()) + &(&ag.adjoint() * &af);
    let id = CMatrix::identity(space.dim()).scale(inner(&f, &g));
    println!("Fock dimension {}", space.dim());
    println!("{{a(f), a(g)*}} − ⟨f,g⟩ = {:.1e}", anti.max_abs_diff(&id));
    println!(
        "a(f)² = {:.1e}",
        (&af * &af).max_abs_diff(&CMatrix::zeros(space.dim(), space.dim()))
    );

    let u = UnitaryMatrix::haar(d, &mut rng);
    let gu = gamma(&space, &u)?;
    let moved = &(gu.matrix() * &af) * &gu.matrix().adjoint();
    println!(
        "Γ(U) a(f) Γ(U)* − a(Uf) = {:.1e}",
        moved.max_abs_diff(&space.creation_matrix(&u.apply(&f))?)
    );

    // a(f) a(g)* normal-orders to ⟨f,g⟩ − a(g)* a(f)
    let p = &CARPolynomial::create(f.clone()) * &CARPolynomial::annihilate(g.clone());
    let ordered = normal_order(&p);
    println!(
        "normal order: {} terms, matrix gap {:.1e}",
        ordered.terms().len(),
        p.matrix(&space)?.max_abs_diff(&ordered.matrix(&space)?)
    );

    let t = Symbol::random(d, &mut rng);
    let rho = quasifree_density_matrix(&t, &space)?;
    for m in 1..=3 {
        let mono = CARPolynomial::from_monomial(CARMonomial::random_normal_ordered(d, m, m, &mut rng));
        let det = quasifree_eval(&t, &mono)?;
        let dens = rho.expect(&mono.matrix(&space)?);
        println!("degree {}: determinant {det:.6} density {dens:.6}", 2 * m);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> ncflow::Result<()> {
    run_example()
}
