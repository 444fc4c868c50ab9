//! Unitary equivalence between an abstract filtered basis and its concrete
//! channel/time-cell model.
//!
//! Given a fully orthogonal reproducing generator set, every projection
//! increment of a generator spans one concrete direction; normalizing the
//! increments column-by-column yields an orthogonal matrix intertwining the
//! two resolutions at every breakpoint. Kernels, samples and integrals move
//! across via the tensor powers of that matrix.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::chaos::{eval_integral, GaussianSample};
use crate::error::{Error, Result};
use crate::filtration::{
    generalized_contraction, project_tensor, FilteredBasis, GeneratorSet, ProjectionMode,
};
use crate::tensor::{inner, symmetrize, SymmetricKernel, Tensor};

/// Which way to move a kernel across the transport.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransportDirection {
    /// Concrete to abstract: apply the matrix to every slot.
    Forward,
    /// Abstract to concrete: apply the transpose to every slot.
    Inverse,
}

/// Orthogonal map from the concrete filtered basis onto the target basis.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMap {
    /// Column `j` holds the target-coordinates image of concrete direction `j`.
    q: Vec<Vec<f64>>,
    concrete: FilteredBasis,
    target: FilteredBasis,
}

impl UnitaryMap {
    /// Validate orthogonality (`|Q^T Q - I| <= 1e-12`) and wrap.
    pub fn new(q: Vec<Vec<f64>>, concrete: FilteredBasis, target: FilteredBasis) -> Result<Self> {
        let n = target.dim();
        if concrete.dim() != n || q.len() != n || q.iter().any(|row| row.len() != n) {
            return Err(Error::DimMismatch {
                left: concrete.dim(),
                right: n,
            });
        }
        for a in 0..n {
            for b in 0..n {
                let dot: f64 = (0..n).map(|r| q[r][a] * q[r][b]).sum();
                let expect = if a == b { 1.0 } else { 0.0 };
                if (dot - expect).abs() > 1e-12 {
                    return Err(Error::invalid(format!(
                        "matrix is not orthogonal: column pair ({a},{b}) pairs to {dot}"
                    )));
                }
            }
        }
        Ok(UnitaryMap {
            q,
            concrete,
            target,
        })
    }

    pub fn dim(&self) -> usize {
        self.target.dim()
    }

    pub fn concrete_basis(&self) -> &FilteredBasis {
        &self.concrete
    }

    pub fn target_basis(&self) -> &FilteredBasis {
        &self.target
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.q
    }

    /// Apply `Q` to a concrete coordinate vector.
    pub fn forward_vec(&self, h: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|r| (0..n).map(|c| self.q[r][c] * h[c]).sum())
            .collect()
    }

    /// Apply `Q^T` to a target coordinate vector.
    pub fn inverse_vec(&self, h: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|r| (0..n).map(|c| self.q[c][r] * h[c]).sum())
            .collect()
    }

    /// Transport a sample of the target process into concrete coordinates.
    pub fn transport_sample(&self, z: &GaussianSample) -> GaussianSample {
        GaussianSample::from_coords(self.inverse_vec(z.coords()))
    }

    /// Largest entry of `pi_t Q - Q pi#_t`.
    pub fn intertwining_residual(&self, t: f64) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for r in 0..n {
            let keep_row = self.target.time(r) <= t;
            for c in 0..n {
                let keep_col = self.concrete.time(c) <= t;
                let lhs = if keep_row { self.q[r][c] } else { 0.0 };
                let rhs = if keep_col { self.q[r][c] } else { 0.0 };
                worst = worst.max((lhs - rhs).abs());
            }
        }
        worst
    }
}

/// Build the concrete basis and the unitary transport from a fully
/// orthogonal reproducing generator set.
///
/// One concrete direction is created per nonzero projection increment of a
/// generator; its channel is the generator index (1-based) and its stamp is
/// the upper endpoint of the increment cell. Zero increments carry no
/// measure and are dropped.
pub fn build_transport(
    basis: &FilteredBasis,
    generators: &GeneratorSet,
) -> Result<(FilteredBasis, UnitaryMap)> {
    let n = basis.dim();
    if generators.vectors.iter().any(|g| g.len() != n) {
        return Err(Error::DimMismatch {
            left: generators.vectors.first().map_or(0, |g| g.len()),
            right: n,
        });
    }
    if !generators.is_fully_orthogonal(basis, 1e-12) {
        return Err(Error::invalid("generator set is not fully orthogonal"));
    }
    if !generators.is_reproducing(basis) {
        return Err(Error::invalid("generator set is not reproducing"));
    }

    let breaks = basis.breakpoints();
    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut times = Vec::new();
    let mut channels = Vec::new();
    for (j, g) in generators.vectors.iter().enumerate() {
        if g.iter().all(|&x| x == 0.0) {
            return Err(Error::invalid(format!(
                "generator {j} is degenerate: all increments vanish"
            )));
        }
        for (l, &b) in breaks.iter().enumerate() {
            let lo = if l == 0 { 0.0 } else { breaks[l - 1] };
            let increment: Vec<f64> = (0..n)
                .map(|i| {
                    let t = basis.time(i);
                    if t > lo && t <= b {
                        g[i]
                    } else {
                        0.0
                    }
                })
                .collect();
            let norm_sq: f64 = increment.iter().map(|x| x * x).sum();
            if norm_sq == 0.0 {
                continue;
            }
            let norm = norm_sq.sqrt();
            columns.push(increment.iter().map(|x| x / norm).collect());
            times.push(b);
            channels.push((j + 1) as u32);
        }
    }
    if columns.len() != n {
        return Err(Error::invalid(format!(
            "generator increments span {} cells, need exactly {n}",
            columns.len()
        )));
    }
    let mut q = vec![vec![0.0; n]; n];
    for (c, col) in columns.iter().enumerate() {
        for (r, &x) in col.iter().enumerate() {
            q[r][c] = x;
        }
    }
    let concrete = FilteredBasis::new(times, channels)?;
    let map = UnitaryMap::new(q, concrete.clone(), basis.clone())?;
    Ok((concrete, map))
}

/// Apply the transport (or its inverse) to every slot of a tensor.
pub fn pushforward_kernel(
    map: &UnitaryMap,
    f: &Tensor,
    direction: TransportDirection,
) -> Result<Tensor> {
    let n = map.dim();
    if f.dim() != n {
        return Err(Error::DimMismatch {
            left: f.dim(),
            right: n,
        });
    }
    let d = f.order();
    let size = n.checked_pow(d as u32).filter(|&s| s <= 20_000_000);
    let Some(size) = size else {
        return Err(Error::Capacity {
            what: "dense pushforward size",
            requested: usize::MAX,
            cap: 20_000_000,
        });
    };
    let mut dense = vec![0.0f64; size.max(1)];
    for (key, v) in f.iter() {
        let mut idx = 0usize;
        for &i in key {
            idx = idx * n + i as usize;
        }
        dense[idx] = v;
    }
    let entry = |r: usize, c: usize| match direction {
        TransportDirection::Forward => map.q[r][c],
        TransportDirection::Inverse => map.q[c][r],
    };
    // mode-by-mode multiplication
    let mut scratch = vec![0.0f64; dense.len()];
    for slot in 0..d {
        scratch.iter_mut().for_each(|x| *x = 0.0);
        let inner_stride = n.pow((d - 1 - slot) as u32);
        let outer = dense.len() / (inner_stride * n);
        for o in 0..outer {
            for j in 0..n {
                let src_base = (o * n + j) * inner_stride;
                for r in 0..n {
                    let w = entry(r, j);
                    if w == 0.0 {
                        continue;
                    }
                    let dst_base = (o * n + r) * inner_stride;
                    for k in 0..inner_stride {
                        scratch[dst_base + k] += w * dense[src_base + k];
                    }
                }
            }
        }
        std::mem::swap(&mut dense, &mut scratch);
    }
    let mut out = Tensor::zeros(d, n)?;
    let mut key = vec![0usize; d];
    for (flat, &v) in dense.iter().enumerate() {
        if v != 0.0 {
            let mut rem = flat;
            for s in (0..d).rev() {
                key[s] = rem % n;
                rem /= n;
            }
            out.add_entry(&key, v)?;
        }
    }
    Ok(out)
}

/// Residual families reported by [`verify_transport`].
#[derive(Debug, Clone)]
pub struct TransportReport {
    /// `|I_d(f)(Z) - I_d(pulled-back f)(Q^T Z)|`.
    pub integral_residual: f64,
    /// `(r, t, |lhs - rhs|)` for the late-part norms of the generalized
    /// contractions on both sides.
    pub norm_residuals: Vec<(usize, f64, f64)>,
    /// `(t, residual)` for the intertwining check at each requested time.
    pub intertwining_residuals: Vec<(f64, f64)>,
}

impl TransportReport {
    pub fn max_residual(&self) -> f64 {
        let a = self.integral_residual;
        let b = self
            .norm_residuals
            .iter()
            .map(|&(_, _, v)| v)
            .fold(0.0f64, f64::max);
        let c = self
            .intertwining_residuals
            .iter()
            .map(|&(_, v)| v)
            .fold(0.0f64, f64::max);
        a.max(b).max(c)
    }
}

/// Check the transport identities on one kernel and one sample: the
/// integral identity, the generalized-contraction norm identity per
/// `(r, t)`, and the intertwining residual per `t`.
pub fn verify_transport(
    map: &UnitaryMap,
    f: &SymmetricKernel,
    times: &[f64],
    z: &GaussianSample,
) -> Result<TransportReport> {
    let d = f.order();
    let pulled = symmetrize(&pushforward_kernel(
        map,
        &f.to_tensor(),
        TransportDirection::Inverse,
    )?);
    let w = map.transport_sample(z);
    let integral_residual = (eval_integral(f, z)? - eval_integral(&pulled, &w)?).abs();

    let mut norm_residuals = Vec::new();
    for &t in times {
        for r in 1..d {
            let lhs = project_tensor(
                &generalized_contraction(f, map.target_basis(), d - r, t)?,
                map.target_basis(),
                t,
                ProjectionMode::KeepRest,
            )?;
            let rhs = project_tensor(
                &generalized_contraction(&pulled, map.concrete_basis(), d - r, t)?,
                map.concrete_basis(),
                t,
                ProjectionMode::KeepRest,
            )?;
            let ln = inner(&lhs, &lhs)?.sqrt();
            let rn = inner(&rhs, &rhs)?.sqrt();
            norm_residuals.push((r, t, (ln - rn).abs()));
        }
    }

    let intertwining_residuals = times
        .iter()
        .map(|&t| (t, map.intertwining_residual(t)))
        .collect();

    Ok(TransportReport {
        integral_residual,
        norm_residuals,
        intertwining_residuals,
    })
}

/// Convenience: a random filtered basis with stamp ties, its mixed
/// generator set and the resulting (non-permutation) transport.
pub fn random_instance(
    n: usize,
    seed: u64,
) -> Result<(FilteredBasis, GeneratorSet, FilteredBasis, UnitaryMap)> {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // stamp pool smaller than n forces ties
    let pool: Vec<f64> = (1..=n.max(2) / 2 + 1)
        .map(|k| k as f64 / (n.max(2) / 2 + 1) as f64)
        .collect();
    let times: Vec<f64> = (0..n)
        .map(|_| pool[rng.gen_range(0..pool.len())])
        .collect();
    let channels: Vec<u32> = (0..n).map(|_| rng.gen_range(1..=3)).collect();
    let basis = FilteredBasis::new(times, channels)?;
    let gens = crate::filtration::fully_orthogonalize(&basis).mixed_within_ties(&basis, &mut rng);
    let (concrete, map) = build_transport(&basis, &gens)?;
    Ok((basis, gens, concrete, map))
}
