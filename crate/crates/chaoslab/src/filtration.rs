//! Finite filtered Hilbert space: basis directions carrying time stamps and
//! channel labels, encoding a diagonal resolution of the identity.
//!
//! The projection family acts coordinate-wise: at time `s`, direction `i`
//! survives iff its stamp satisfies `tau_i <= s`. Stamps live in `(0, 1]`,
//! so the family starts at 0 and ends at the identity. Time stamps are
//! compared exactly; two directions share a stamp only when the `f64`
//! values are identical.

use crate::error::{Error, Result};
use crate::tensor::{contract_with_filter, SymmetricKernel, Tensor};

/// Orthonormal basis directions with per-direction time stamp and channel.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredBasis {
    times: Vec<f64>,
    channels: Vec<u32>,
}

impl FilteredBasis {
    /// Build a basis; every stamp must lie in `(0, 1]`.
    pub fn new(times: Vec<f64>, channels: Vec<u32>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::invalid("basis must contain at least one direction"));
        }
        if times.len() != channels.len() {
            return Err(Error::DimMismatch {
                left: times.len(),
                right: channels.len(),
            });
        }
        for (i, &t) in times.iter().enumerate() {
            if !(t > 0.0 && t <= 1.0) || !t.is_finite() {
                return Err(Error::invalid(format!(
                    "direction {i}: time must lie in (0,1], got {t}"
                )));
            }
        }
        Ok(FilteredBasis { times, channels })
    }

    /// Single-channel basis with stamps `1/n, 2/n, ..., 1`.
    pub fn uniform(n: usize) -> Result<Self> {
        let times = (1..=n).map(|i| i as f64 / n as f64).collect();
        FilteredBasis::new(times, vec![1; n])
    }

    pub fn dim(&self) -> usize {
        self.times.len()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.times[i]
    }

    pub fn channel(&self, i: usize) -> u32 {
        self.channels[i]
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Sorted distinct stamp values.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut v = self.times.clone();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v.dedup();
        v
    }

    pub(crate) fn all_early(&self, key: &[u16], s: f64) -> bool {
        key.iter().all(|&i| self.times[i as usize] <= s)
    }

    fn check_dim(&self, other: usize) -> Result<()> {
        if self.dim() != other {
            return Err(Error::DimMismatch {
                left: other,
                right: self.dim(),
            });
        }
        Ok(())
    }
}

/// Which part of the tensor-product projection to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectionMode {
    /// Apply the projection itself: a tuple survives iff all stamps `<= s`.
    KeepEarly,
    /// Apply identity minus the projection: survives iff some stamp `> s`.
    KeepRest,
}

/// Apply the order-`m` tensor power of the projection (or its complement).
pub fn project_tensor(
    t: &Tensor,
    basis: &FilteredBasis,
    s: f64,
    mode: ProjectionMode,
) -> Result<Tensor> {
    basis.check_dim(t.dim())?;
    Ok(match mode {
        ProjectionMode::KeepEarly => t.filtered(|k| basis.all_early(k, s)),
        ProjectionMode::KeepRest => t.filtered(|k| !basis.all_early(k, s)),
    })
}

/// Same as [`project_tensor`] for canonical symmetric kernels. The survival
/// predicate is permutation invariant, so canonical storage is preserved.
pub fn project_kernel(
    f: &SymmetricKernel,
    basis: &FilteredBasis,
    s: f64,
    mode: ProjectionMode,
) -> Result<SymmetricKernel> {
    basis.check_dim(f.dim())?;
    Ok(match mode {
        ProjectionMode::KeepEarly => f.filtered(|k| basis.all_early(k, s)),
        ProjectionMode::KeepRest => f.filtered(|k| !basis.all_early(k, s)),
    })
}

/// Generalized contraction: pair `p` slots of `f` with itself, restricted to
/// contracted tuples that are not entirely stamped before `s`.
///
/// At `s = 0` (and `p >= 1`) this is the plain contraction; at `s = 1` it
/// vanishes; at `p = d` it is the squared norm of the late part of `f`. For
/// `p = 0` the empty contracted tuple counts as "entirely early", so the
/// result is the zero tensor of order `2d`.
pub fn generalized_contraction(
    f: &SymmetricKernel,
    basis: &FilteredBasis,
    p: usize,
    s: f64,
) -> Result<Tensor> {
    basis.check_dim(f.dim())?;
    if p > f.order() {
        return Err(Error::invalid(format!(
            "contraction order {p} exceeds kernel order {}",
            f.order()
        )));
    }
    contract_with_filter(f, f, p, |key| !basis.all_early(key, s))
}

/// A reproducing family of generator vectors with pairwise fully orthogonal
/// projections.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSet {
    /// One coordinate vector per generator.
    pub vectors: Vec<Vec<f64>>,
    /// Number of generators = maximal stamp multiplicity.
    pub rank: usize,
}

/// Build a fully orthogonal reproducing set for the basis.
///
/// Directions sharing a stamp value are spread across distinct generators,
/// so each generator sees every one of its stamps exactly once; the rank is
/// therefore the maximal number of directions sharing a stamp. Each
/// direction gets weight `1/sqrt(n)`, which normalizes the family to total
/// squared norm 1.
pub fn fully_orthogonalize(basis: &FilteredBasis) -> GeneratorSet {
    let n = basis.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        basis
            .time(a)
            .partial_cmp(&basis.time(b))
            .unwrap()
            .then(a.cmp(&b))
    });

    let mut rank = 0usize;
    let mut assignment = vec![0usize; n];
    let mut pos = 0usize;
    while pos < n {
        let t = basis.time(order[pos]);
        let mut end = pos;
        while end < n && basis.time(order[end]) == t {
            end += 1;
        }
        for (slot, &dir) in order[pos..end].iter().enumerate() {
            assignment[dir] = slot;
        }
        rank = rank.max(end - pos);
        pos = end;
    }

    let weight = 1.0 / (n as f64).sqrt();
    let mut vectors = vec![vec![0.0; n]; rank];
    for i in 0..n {
        vectors[assignment[i]][i] = weight;
    }
    GeneratorSet { vectors, rank }
}

impl GeneratorSet {
    pub fn total_norm_sq(&self) -> f64 {
        self.vectors
            .iter()
            .map(|g| g.iter().map(|x| x * x).sum::<f64>())
            .sum()
    }

    /// Check `(pi_s g_i, pi_t g_j) = 0` for `i != j` at every breakpoint
    /// pair; for the diagonal model it suffices to check the cumulative
    /// overlaps at each stamp value.
    pub fn is_fully_orthogonal(&self, basis: &FilteredBasis, tol: f64) -> bool {
        let breaks = basis.breakpoints();
        for i in 0..self.vectors.len() {
            for j in (i + 1)..self.vectors.len() {
                for &b in &breaks {
                    let overlap: f64 = (0..basis.dim())
                        .filter(|&k| basis.time(k) <= b)
                        .map(|k| self.vectors[i][k] * self.vectors[j][k])
                        .sum();
                    if overlap.abs() > tol {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Projection increments of every generator across the breakpoint grid,
    /// one row per (generator, cell). Zero rows are dropped.
    pub fn increment_matrix(&self, basis: &FilteredBasis) -> Vec<Vec<f64>> {
        let breaks = basis.breakpoints();
        let mut rows = Vec::new();
        for g in &self.vectors {
            for (l, &b) in breaks.iter().enumerate() {
                let lo = if l == 0 { 0.0 } else { breaks[l - 1] };
                let row: Vec<f64> = (0..basis.dim())
                    .map(|k| {
                        let t = basis.time(k);
                        if t > lo && t <= b {
                            g[k]
                        } else {
                            0.0
                        }
                    })
                    .collect();
                if row.iter().any(|&x| x != 0.0) {
                    rows.push(row);
                }
            }
        }
        rows
    }

    /// The span condition: stacked increments must have full rank.
    pub fn is_reproducing(&self, basis: &FilteredBasis) -> bool {
        matrix_rank(self.increment_matrix(basis), 1e-9) == basis.dim()
    }

    /// Mix the generator coefficients of every stamp-tie group by a random
    /// orthogonal matrix. Directions sharing a stamp contribute a constant
    /// block to every projection overlap, so orthogonality under the whole
    /// projection family, normalization and the reproducing property are
    /// all preserved; the supports stop being disjoint, which makes the
    /// derived transport a genuinely non-permutation unitary.
    pub fn mixed_within_ties(
        &self,
        basis: &FilteredBasis,
        rng: &mut impl rand::Rng,
    ) -> GeneratorSet {
        let mut vectors = self.vectors.clone();
        for &b in &basis.breakpoints() {
            let dirs: Vec<usize> = (0..basis.dim()).filter(|&i| basis.time(i) == b).collect();
            let holders: Vec<usize> = (0..vectors.len())
                .filter(|&j| dirs.iter().any(|&i| vectors[j][i] != 0.0))
                .collect();
            if holders.len() < 2 {
                continue;
            }
            let m = holders.len();
            let rot = random_orthogonal(m, rng);
            // new coefficient rows: block = rot * old block
            let old: Vec<Vec<f64>> = holders
                .iter()
                .map(|&j| dirs.iter().map(|&i| vectors[j][i]).collect())
                .collect();
            for (a, &j) in holders.iter().enumerate() {
                for (c, &i) in dirs.iter().enumerate() {
                    vectors[j][i] = (0..m).map(|b_| rot[a][b_] * old[b_][c]).sum();
                }
            }
        }
        GeneratorSet {
            vectors,
            rank: self.rank,
        }
    }
}

/// Random orthogonal matrix via Gram-Schmidt on a Gaussian matrix.
pub(crate) fn random_orthogonal(m: usize, rng: &mut impl rand::Rng) -> Vec<Vec<f64>> {
    loop {
        let mut rows: Vec<Vec<f64>> = (0..m)
            .map(|_| {
                (0..m)
                    .map(|_| {
                        rand_distr::Distribution::<f64>::sample(&rand_distr::StandardNormal, rng)
                    })
                    .collect()
            })
            .collect();
        let mut ok = true;
        for i in 0..m {
            for j in 0..i {
                let dot: f64 = (0..m).map(|c| rows[i][c] * rows[j][c]).sum();
                for c in 0..m {
                    rows[i][c] -= dot * rows[j][c];
                }
            }
            let norm: f64 = (0..m).map(|c| rows[i][c] * rows[i][c]).sum::<f64>().sqrt();
            if norm < 1e-6 {
                ok = false;
                break;
            }
            for c in 0..m {
                rows[i][c] /= norm;
            }
        }
        if ok {
            return rows;
        }
    }
}

/// Rank via Gaussian elimination with partial pivoting.
pub(crate) fn matrix_rank(mut rows: Vec<Vec<f64>>, tol: f64) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let cols = rows[0].len();
    let mut rank = 0usize;
    for col in 0..cols {
        let Some((pivot, _)) = rows
            .iter()
            .enumerate()
            .skip(rank)
            .map(|(r, row)| (r, row[col].abs()))
            .filter(|(_, v)| *v > tol)
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        else {
            continue;
        };
        rows.swap(rank, pivot);
        let lead = rows[rank][col];
        for r in (rank + 1)..rows.len() {
            let factor = rows[r][col] / lead;
            if factor != 0.0 {
                for c in col..cols {
                    rows[r][c] -= factor * rows[rank][c];
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// Step reparametrization of the time axis built from generator masses.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeChangeMap {
    /// `(stamp value, cumulative mass)` at every breakpoint, ascending.
    steps: Vec<(f64, f64)>,
}

impl TimeChangeMap {
    /// Cumulative mass `phi(t)` of directions stamped `<= t`.
    pub fn phi(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for &(v, m) in &self.steps {
            if v <= t {
                acc = m;
            } else {
                break;
            }
        }
        acc
    }

    /// Right-continuous generalized inverse `psi(t) = inf { a : phi(a) >= t }`.
    pub fn psi(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        for &(v, m) in &self.steps {
            if m >= t {
                return v;
            }
        }
        1.0
    }

    pub fn steps(&self) -> &[(f64, f64)] {
        &self.steps
    }
}

/// Reparametrize the resolution so that generator mass accrues linearly.
///
/// Returns the map `phi(t) = sum_j ||pi_t g_j||^2` together with the
/// re-stamped basis `tau_i' = phi(tau_i)`. At every jump value `t` of `phi`
/// the re-stamped resolution satisfies `sum_j ||pi'_t g_j||^2 = t`.
pub fn time_change(
    basis: &FilteredBasis,
    generators: &GeneratorSet,
) -> Result<(TimeChangeMap, FilteredBasis)> {
    for g in &generators.vectors {
        if g.len() != basis.dim() {
            return Err(Error::DimMismatch {
                left: g.len(),
                right: basis.dim(),
            });
        }
    }
    let total = generators.total_norm_sq();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!(
            "generators must be normalized to total squared norm 1, got {total}"
        )));
    }

    // per-direction mass
    let mass: Vec<f64> = (0..basis.dim())
        .map(|i| generators.vectors.iter().map(|g| g[i] * g[i]).sum())
        .collect();

    let breaks = basis.breakpoints();
    let mut steps = Vec::with_capacity(breaks.len());
    let mut acc = 0.0;
    for &b in &breaks {
        let jump: f64 = (0..basis.dim())
            .filter(|&i| basis.time(i) == b)
            .map(|i| mass[i])
            .sum();
        acc += jump;
        steps.push((b, acc.min(1.0)));
    }
    // normalization was validated above; snap the endpoint to exactly 1 so
    // the re-stamped basis stays inside (0, 1]
    if let Some(last) = steps.last_mut() {
        last.1 = 1.0;
    }
    let map = TimeChangeMap { steps };

    let new_times: Vec<f64> = basis.times().iter().map(|&t| map.phi(t)).collect();
    for (i, &t) in new_times.iter().enumerate() {
        if t <= 0.0 {
            return Err(Error::invalid(format!(
                "direction {i} receives zero mass; cannot re-stamp"
            )));
        }
    }
    let channels = (0..basis.dim()).map(|i| basis.channel(i)).collect();
    let restamped = FilteredBasis::new(new_times, channels)?;
    Ok((map, restamped))
}
