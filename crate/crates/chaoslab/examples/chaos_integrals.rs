//! Multiple Wiener-Itô integrals: evaluation, the multiplication formula
//! and exact moments.
//!
//! Run with `cargo run --example chaos_integrals`.

use chaoslab::chaos::{eval_integral, fourth_moment, hermite, square_expand, GaussianSample};
use chaoslab::tensor::{symmetrize, Tensor};
use chaoslab::ChaosFunctional;

fn main() -> chaoslab::Result<()> {
    println!("h_3(2) = {}", hermite(3, 2.0)?);

    // a reproducible draw of the isonormal coordinates
    let z = GaussianSample::draw(2, 42, 0);
    println!("Z = ({:.4}, {:.4})  [seed 42, stream 0]", z.coord(0), z.coord(1));

    let e11 = symmetrize(&Tensor::basis(2, &[0, 0])?);
    let e12 = symmetrize(&Tensor::basis(2, &[0, 1])?);
    println!(
        "I_2(e1⊗e1)(Z) = {:.6} = Z1^2 - 1 = {:.6}",
        eval_integral(&e11, &z)?,
        z.coord(0) * z.coord(0) - 1.0
    );
    println!(
        "I_2((e1⊗e2)_s)(Z) = {:.6} = Z1 Z2 = {:.6}",
        eval_integral(&e12, &z)?,
        z.coord(0) * z.coord(1)
    );

    // the square of an integral expands into lower and higher chaoses
    let sq = square_expand(&e11)?;
    println!("I_2(e1⊗e1)^2 expands to:");
    println!("  constant {}", sq.constant_term());
    for (order, kernel) in sq.kernels() {
        println!("  order {order}: {} entries, norm^2 {}", kernel.entry_count(), kernel.norm_sq());
    }
    println!(
        "  pointwise check: {:.12} vs {:.12}",
        sq.eval(&z)?,
        eval_integral(&e11, &z)?.powi(2)
    );

    // moments come from kernels, never from sampling
    let func = ChaosFunctional::from_kernel(e12.clone())?;
    println!("E[I_2((e1⊗e2)_s)^2] = {}", func.second_moment());
    println!("E[I_2(e1⊗e1)^4] = {}  (= E[(Z^2-1)^4])", fourth_moment(&e11)?);
    println!("E[I_2((e1⊗e2)_s)^4] = {}  (= E[Z1^4] E[Z2^4])", fourth_moment(&e12)?);
    Ok(())
}
