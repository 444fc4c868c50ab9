//! Symmetric kernels: symmetrization, contractions and inner products.
//!
//! Run with `cargo run --example kernel_algebra`.

use chaoslab::tensor::{contract, inner, symmetrize, Tensor};

fn main() -> chaoslab::Result<()> {
    // raw monomial e1 ⊗ e2 over a 2-dimensional basis (indices are 0-based)
    let raw = Tensor::basis(2, &[0, 1])?;
    let f = symmetrize(&raw);
    println!("(e1⊗e2)_s coefficients:");
    for (key, v) in f.iter() {
        println!("  {key:?} -> {v}");
    }
    println!("||(e1⊗e2)_s||^2 = {}  (= 1/2)", f.norm_sq());

    // contractions: p = 0 is the tensor product, p = d the squared norm
    let c0 = contract(&f, &f, 0)?;
    let c1 = contract(&f, &f, 1)?;
    let c2 = contract(&f, &f, 2)?;
    println!("f ⊗_0 f has {} entries of order {}", c0.entry_count(), c0.order());
    println!(
        "f ⊗_1 f = diag({}, {})  (= 1/4 (e1⊗e1 + e2⊗e2))",
        c1.get(&[0, 0]),
        c1.get(&[1, 1])
    );
    println!("f ⊗_2 f = {}  (= ||f||^2)", c2.get(&[]));

    // the symmetrization is the orthogonal projection onto symmetric tensors
    let probe = symmetrize(&Tensor::basis(2, &[1, 0])?);
    println!(
        "<(e1⊗e2)_s, probe> = {}  = <e1⊗e2, probe> = {}",
        f.inner_sym(&probe)?,
        inner(&raw, &probe.to_tensor())?
    );
    Ok(())
}
