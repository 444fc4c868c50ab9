//! Conditioning a square on the early coordinates: the mixture variance
//! appears as an exact kernel identity.
//!
//! Run with `cargo run --example conditional_moments`.

use chaoslab::chaos::{conditional_second_moment, eval_integral, GaussianSample};
use chaoslab::limitlab::{generate_sequence, SequenceKind};

fn main() -> chaoslab::Result<()> {
    // hub-and-spokes kernel: F = Z0 * (Z1 + ... + Zn)/sqrt(n)
    let seq = generate_sequence(SequenceKind::Mixture, 8)?;
    println!(
        "mixture n = {}: E[F^2] = {}",
        seq.n,
        2.0 * seq.kernel.norm_sq()
    );

    // E[F^2 | F_{0.5}] collapses to 1 + I_2(e0⊗e0) = Z0^2, exactly
    let csm = conditional_second_moment(&seq.kernel, &seq.basis, seq.cutoff)?;
    println!("conditional second moment at t = {}:", seq.cutoff);
    println!("  constant {}", csm.constant_term());
    for (order, kernel) in csm.kernels() {
        for (key, v) in kernel.iter() {
            println!("  order {order}: {key:?} -> {v}");
        }
    }
    println!("  distance to Y = X(e0)^2: {:.3e}", csm.l2_distance(seq.law.functional())?);

    // pointwise, the conditional second moment is a function of Z0 alone
    for stream in 0..3u64 {
        let z = GaussianSample::draw(seq.basis.dim(), 7, stream);
        println!(
            "  Z0 = {:+.4}: E[F^2|Z0] = {:.6}, Z0^2 = {:.6}, F = {:+.6}",
            z.coord(0),
            csm.eval(&z)?,
            z.coord(0) * z.coord(0),
            eval_integral(&seq.kernel, &z)?
        );
    }
    Ok(())
}
