//! The square-equality identity on discrete channel/time atoms: both sides
//! summed by brute force balance to machine precision.
//!
//! Run with `cargo run --example square_equality`.

use chaoslab::limitlab::{random_sqeq_instance, sqeq_check};

fn main() -> chaoslab::Result<()> {
    println!("m r |A| atoms  lhs          rhs          |diff|");
    for seed in 0..8u64 {
        let m = 1 + (seed as usize % 2);
        let r = 1 + ((seed / 2) as usize % 2);
        let channels = 2 + ((seed / 4) as usize % 2);
        let inst = random_sqeq_instance(m, r, channels, 4, seed);
        let (lhs, rhs, diff) = sqeq_check(&inst)?;
        println!(
            "{m} {r} {channels}   {}     {lhs:<12.6} {rhs:<12.6} {diff:.2e}",
            inst.times.len()
        );
    }
    Ok(())
}
