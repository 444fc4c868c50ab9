//! The central chain: vanishing contractions, fourth moments approaching 3
//! and the empirical law approaching the standard Gaussian.
//!
//! Run with `cargo run --example central_limit`.

use chaoslab::chaos::{eval_integral, GaussianSample};
use chaoslab::limitlab::{check_clt_conditions, generate_sequence, SequenceKind};
use chaoslab::mc;

fn main() -> chaoslab::Result<()> {
    let ns = [16usize, 64, 256];
    let mut band = Vec::new();
    println!("n    variance        ||f⊗1f||^2   E F^4");
    for &n in &ns {
        let seq = generate_sequence(SequenceKind::Central, n)?;
        let c = check_clt_conditions(&seq.kernel)?;
        let sq = c.contraction_norms[0] * c.contraction_norms[0];
        println!("{n:<4} {:<15.12} {sq:<12.6} {:.6}", c.variance, c.fourth_moment);
        band.push((n as f64, sq));
    }
    let slope = mc::log_log_slope(
        &band.iter().map(|&(n, _)| n).collect::<Vec<_>>(),
        &band.iter().map(|&(_, v)| v).collect::<Vec<_>>(),
    );
    println!("fitted contraction decay exponent: {slope:.3}");

    // empirical distribution at n = 256
    let seq = generate_sequence(SequenceKind::Central, 256)?;
    let values: Vec<f64> = mc::map_blocks(50_000, |range| {
        let mut out = Vec::new();
        for i in range {
            let z = GaussianSample::draw(seq.basis.dim(), 42, (256u64 << 40) | i);
            out.push(eval_integral(&seq.kernel, &z).unwrap());
        }
        out
    })
    .concat();
    println!(
        "KS distance of 50k samples at n = 256 vs N(0,1): {:.4}",
        mc::ks_statistic(&values, mc::normal_cdf)
    );
    Ok(())
}
