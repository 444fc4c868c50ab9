//! Brute-force checker for the square-equality identity behind the
//! contraction decomposition.
//!
//! The identity lives on a product of a channel set and a time axis: an
//! inner pairing over one index block, squared and integrated over the
//! other, splits into two max-comparison pieces. In the continuum the
//! splitting events `max(left) = max(right)` are null; a discrete model
//! must resolve them deterministically. Expanding both squares over
//! coefficient 4-tuples shows the split is exact iff ties count for the
//! left-block piece and against the right-block piece, so the first
//! indicator compares with `<=` and the second with `<`. Both sides are
//! computed by direct summation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// A discrete instance of the square-equality identity.
#[derive(Debug, Clone)]
pub struct SqeqInstance {
    /// Number of channel labels.
    pub channels: usize,
    /// Distinct time atoms.
    pub times: Vec<f64>,
    /// Atom weights, indexed `channel * times.len() + time_index`.
    pub weights: Vec<f64>,
    /// Left block size.
    pub m: usize,
    /// Right block size.
    pub r: usize,
    /// Allowed time-index tuples for the left block.
    pub c_set: Vec<Vec<usize>>,
    /// Allowed time-index tuples for the right block.
    pub d_set: Vec<Vec<usize>>,
    /// Symmetric function on atom `(m+r)`-tuples, dense row-major with the
    /// atom index `channel * times.len() + time_index` as digit.
    pub f: Vec<f64>,
}

/// Tuples over `0..base` of length `len`, as flat digit vectors.
fn enumerate_tuples(base: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        let mut next = Vec::with_capacity(out.len() * base);
        for t in &out {
            for v in 0..base {
                let mut t2 = t.clone();
                t2.push(v);
                next.push(t2);
            }
        }
        out = next;
    }
    out
}

struct BlockConfigs {
    /// flat offset of the atom tuple (in its own digit positions)
    flat: Vec<usize>,
    weight: Vec<f64>,
    max_time: Vec<f64>,
}

/// All atom tuples of length `len` whose time-index tuple is allowed.
fn block_configs(inst: &SqeqInstance, len: usize, allowed: &[Vec<usize>]) -> BlockConfigs {
    let t = inst.times.len();
    let n = inst.channels * t;
    let mut cfg = BlockConfigs {
        flat: Vec::new(),
        weight: Vec::new(),
        max_time: Vec::new(),
    };
    let allowed: std::collections::BTreeSet<&[usize]> =
        allowed.iter().map(|v| v.as_slice()).collect();
    for atoms in enumerate_tuples(n, len) {
        let time_idx: Vec<usize> = atoms.iter().map(|a| a % t).collect();
        if !allowed.contains(time_idx.as_slice()) {
            continue;
        }
        let mut flat = 0usize;
        let mut weight = 1.0;
        let mut max_time = f64::NEG_INFINITY;
        for &a in &atoms {
            flat = flat * n + a;
            weight *= inst.weights[a];
            max_time = max_time.max(inst.times[a % t]);
        }
        if weight == 0.0 {
            continue;
        }
        cfg.flat.push(flat);
        cfg.weight.push(weight);
        cfg.max_time.push(max_time);
    }
    cfg
}

/// Evaluate both sides of the identity; returns `(lhs, rhs, |lhs - rhs|)`.
pub fn sqeq_check(inst: &SqeqInstance) -> Result<(f64, f64, f64)> {
    let t = inst.times.len();
    if t == 0 || inst.channels == 0 {
        return Err(Error::invalid("need at least one atom"));
    }
    for i in 0..t {
        for j in (i + 1)..t {
            if inst.times[i] == inst.times[j] {
                return Err(Error::invalid(format!(
                    "duplicated time atom {}: the identity needs pairwise distinct time \
                     values (the discrete form of non-atomicity)",
                    inst.times[i]
                )));
            }
        }
    }
    let n = inst.channels * t;
    if inst.weights.len() != n {
        return Err(Error::invalid("weights must cover every atom"));
    }
    if inst.weights.iter().any(|&w| w.is_nan() || w < 0.0 || !w.is_finite()) {
        return Err(Error::invalid("weights must be finite and nonnegative"));
    }
    let expected_len = n.pow((inst.m + inst.r) as u32);
    if inst.f.len() != expected_len {
        return Err(Error::invalid(format!(
            "f must have {expected_len} entries, got {}",
            inst.f.len()
        )));
    }
    if inst.c_set.iter().any(|c| c.len() != inst.m)
        || inst.d_set.iter().any(|d| d.len() != inst.r)
    {
        return Err(Error::invalid("index-set tuple lengths must match m and r"));
    }

    let left = block_configs(inst, inst.m, &inst.c_set);
    let right = block_configs(inst, inst.r, &inst.d_set);
    let nr = n.pow(inst.r as u32);

    // f(xi, alpha) with xi in the leading block
    let value = |flat_left: usize, flat_right: usize| inst.f[flat_left * nr + flat_right];

    let mut lhs = 0.0;
    let mut rhs1 = 0.0;
    for (i, &fi) in left.flat.iter().enumerate() {
        for (j, &fj) in left.flat.iter().enumerate() {
            let mut plain = 0.0;
            let mut cut = 0.0;
            let threshold = left.max_time[i].max(left.max_time[j]);
            for (k, &fk) in right.flat.iter().enumerate() {
                let prod = right.weight[k] * value(fi, fk) * value(fj, fk);
                plain += prod;
                // tie rule: a right-block max equal to the left-block max
                // counts as earlier
                if right.max_time[k] <= threshold {
                    cut += prod;
                }
            }
            let w = left.weight[i] * left.weight[j];
            lhs += w * plain * plain;
            rhs1 += w * cut * cut;
        }
    }

    let mut rhs2 = 0.0;
    for (i, &fi) in right.flat.iter().enumerate() {
        for (j, &fj) in right.flat.iter().enumerate() {
            let threshold = right.max_time[i].max(right.max_time[j]);
            let mut cut = 0.0;
            for (k, &fk) in left.flat.iter().enumerate() {
                if left.max_time[k] < threshold {
                    cut += left.weight[k] * value(fk, fi) * value(fk, fj);
                }
            }
            rhs2 += right.weight[i] * right.weight[j] * cut * cut;
        }
    }

    let rhs = rhs1 + rhs2;
    Ok((lhs, rhs, (lhs - rhs).abs()))
}

/// Random instance with symmetric `f`, distinct times and random index sets.
pub fn random_sqeq_instance(
    m: usize,
    r: usize,
    channels: usize,
    n_times: usize,
    seed: u64,
) -> SqeqInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut times: Vec<f64> = (0..n_times)
        .map(|k| (k as f64 + rng.gen_range(0.05..0.95)) / n_times as f64)
        .collect();
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = channels * n_times;
    let weights: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();

    // random dense f, symmetrized over the m+r slots
    let len = n.pow((m + r) as u32);
    let raw: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut f = vec![0.0; len];
    let slots = m + r;
    let mut perm: Vec<usize> = (0..slots).collect();
    let mut perms = Vec::new();
    loop {
        perms.push(perm.clone());
        // next permutation
        let mut i = slots.wrapping_sub(1);
        while i > 0 && perm[i - 1] >= perm[i] {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        let mut j = slots - 1;
        while perm[j] <= perm[i - 1] {
            j -= 1;
        }
        perm.swap(i - 1, j);
        perm[i..].reverse();
    }
    let factor = 1.0 / perms.len() as f64;
    for (flat, slot_digits) in enumerate_tuples(n, slots).iter().enumerate() {
        let mut acc = 0.0;
        for p in &perms {
            let mut permuted = 0usize;
            for &s in p {
                permuted = permuted * n + slot_digits[s];
            }
            acc += raw[permuted];
        }
        f[flat] = acc * factor;
    }

    // random nonempty index sets
    let pick = |rng: &mut ChaCha8Rng, len: usize| -> Vec<Vec<usize>> {
        let all = enumerate_tuples(n_times, len);
        let out: Vec<Vec<usize>> = all.into_iter().filter(|_| rng.gen_bool(0.5)).collect();
        if out.is_empty() {
            vec![vec![0; len]]
        } else {
            out
        }
    };
    let c_set = pick(&mut rng, m);
    let d_set = pick(&mut rng, r);

    SqeqInstance {
        channels,
        times,
        weights,
        m,
        r,
        c_set,
        d_set,
        f,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_function_gives_zero() {
        let mut inst = random_sqeq_instance(1, 1, 2, 4, 7);
        inst.f.iter_mut().for_each(|x| *x = 0.0);
        let (lhs, rhs, diff) = sqeq_check(&inst).unwrap();
        assert_eq!((lhs, rhs, diff), (0.0, 0.0, 0.0));
    }

    #[test]
    fn random_small_instances_balance() {
        for seed in 0..30u64 {
            let inst = random_sqeq_instance(1, 1, 2, 4, seed);
            let (lhs, rhs, diff) = sqeq_check(&inst).unwrap();
            assert!(
                diff <= 1e-10 * lhs.abs().max(rhs.abs()).max(1.0),
                "seed {seed}: {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn random_m2_r1_instances_balance() {
        for seed in 0..10u64 {
            let inst = random_sqeq_instance(2, 1, 2, 4, 100 + seed);
            let (lhs, rhs, diff) = sqeq_check(&inst).unwrap();
            assert!(
                diff <= 1e-10 * lhs.abs().max(rhs.abs()).max(1.0),
                "seed {seed}: {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn duplicated_time_atoms_rejected() {
        let mut inst = random_sqeq_instance(1, 1, 2, 3, 1);
        inst.times[1] = inst.times[0];
        let err = sqeq_check(&inst).unwrap_err();
        assert!(err.to_string().contains("duplicated time atom"));
    }
}
