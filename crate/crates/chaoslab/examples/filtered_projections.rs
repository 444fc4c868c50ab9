//! Time-stamped bases: projections, generalized contractions, fully
//! orthogonal generators and the time change.
//!
//! Run with `cargo run --example filtered_projections`.

use chaoslab::filtration::{
    fully_orthogonalize, generalized_contraction, project_tensor, time_change, FilteredBasis,
    ProjectionMode,
};
use chaoslab::tensor::{contract, symmetrize, Tensor};

fn main() -> chaoslab::Result<()> {
    // two directions stamped 0.3 and 0.7
    let basis = FilteredBasis::new(vec![0.3, 0.7], vec![1, 1])?;
    let f = symmetrize(&Tensor::basis(2, &[0, 1])?);
    let raw = f.to_tensor();

    for &s in &[0.0, 0.5, 1.0] {
        let early = project_tensor(&raw, &basis, s, ProjectionMode::KeepEarly)?;
        let rest = project_tensor(&raw, &basis, s, ProjectionMode::KeepRest)?;
        println!(
            "s = {s}: early part {} entries, late part {} entries",
            early.entry_count(),
            rest.entry_count()
        );
    }

    // generalized contraction: plain at s = 0, zero at s = 1
    let plain = contract(&f, &f, 1)?;
    let gen0 = generalized_contraction(&f, &basis, 1, 0.0)?;
    let gen1 = generalized_contraction(&f, &basis, 1, 1.0)?;
    println!(
        "generalized contraction: |at 0 - plain| = {}, at 1 is zero: {}",
        gen0.sub(&plain)?.max_abs(),
        gen1.is_zero()
    );

    // tied stamps force rank 2 and a two-generator family
    let tied = FilteredBasis::new(vec![0.2, 0.2, 0.6, 0.6], vec![1, 2, 1, 2])?;
    let gens = fully_orthogonalize(&tied);
    println!(
        "stamps (.2,.2,.6,.6): rank {}, fully orthogonal {}, reproducing {}",
        gens.rank,
        gens.is_fully_orthogonal(&tied, 1e-12),
        gens.is_reproducing(&tied)
    );

    // the time change spreads generator mass linearly
    let (map, restamped) = time_change(&tied, &gens)?;
    println!("time change steps: {:?}", map.steps());
    println!("re-stamped times:  {:?}", restamped.times());
    Ok(())
}
