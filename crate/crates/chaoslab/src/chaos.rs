//! Sampling of the isonormal process and exact computation with multiple
//! Wiener-Itô integrals.
//!
//! A kernel of order `d` maps to the random variable `I_d(f)`; on a basis
//! monomial with index multiplicities `(a_1, a_2, ...)` the integral equals
//! the product of (unnormalized, probabilist) Hermite polynomials
//! `prod_j h_{a_j}(Z_j)`. This is the unique normalization consistent with
//! the isometry `E[I_d(f)^2] = d! ||f||^2`, and it is what [`eval_integral`]
//! implements: moments are always computed exactly from kernels, Monte
//! Carlo is reserved for distributional claims.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::filtration::{project_tensor, FilteredBasis, ProjectionMode};
use crate::tensor::{
    arrangement_count, binomial, contract, factorial, symmetrize, SymmetricKernel, MAX_ORDER,
};

/// Largest supported Hermite degree.
pub const MAX_HERMITE: usize = 64;

/// Probabilist Hermite polynomial `h_k` with `h_0 = 1`, `h_1 = x` and
/// `h_{k+1} = x h_k - k h_{k-1}` (so `E[h_k(Z)^2] = k!`).
pub fn hermite(k: usize, x: f64) -> Result<f64> {
    if k > MAX_HERMITE {
        return Err(Error::Capacity {
            what: "hermite degree",
            requested: k,
            cap: MAX_HERMITE,
        });
    }
    let mut prev = 1.0;
    if k == 0 {
        return Ok(prev);
    }
    let mut cur = x;
    for j in 1..k {
        let next = x * cur - j as f64 * prev;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// One realization of the isonormal process: iid standard normal
/// coordinates, reproducible from `(seed, stream)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSample {
    coords: Vec<f64>,
    seed: u64,
    stream: u64,
}

impl GaussianSample {
    /// Draw `dim` coordinates from the counter-based stream
    /// `(seed, stream)`; coordinate `i` is the `i`-th normal of the stream.
    pub fn draw(dim: usize, seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let coords = (0..dim)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        GaussianSample {
            coords,
            seed,
            stream,
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coord(&self, i: usize) -> f64 {
        self.coords[i]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Copy with coordinate `i` replaced; used by measurability tests.
    pub fn with_coord(&self, i: usize, value: f64) -> Self {
        let mut out = self.clone();
        out.coords[i] = value;
        out
    }

    /// Wrap derived coordinates (e.g. rotated by a unitary map). Such a
    /// sample is not tied to a stream; seed and stream are recorded as 0.
    pub fn from_coords(coords: Vec<f64>) -> Self {
        GaussianSample {
            coords,
            seed: 0,
            stream: 0,
        }
    }
}

/// Draw a sample matching the basis dimension.
pub fn sample(basis: &FilteredBasis, seed: u64, stream: u64) -> GaussianSample {
    GaussianSample::draw(basis.dim(), seed, stream)
}

/// Evaluate the multiple Wiener-Itô integral `I_d(f)` at a sample.
pub fn eval_integral(f: &SymmetricKernel, z: &GaussianSample) -> Result<f64> {
    if f.dim() != z.dim() {
        return Err(Error::DimMismatch {
            left: f.dim(),
            right: z.dim(),
        });
    }
    let mut total = 0.0;
    for (key, v) in f.iter() {
        let mut prod = 1.0;
        let mut run = 1usize;
        for w in 1..=key.len() {
            if w < key.len() && key[w] == key[w - 1] {
                run += 1;
            } else {
                prod *= hermite(run, z.coord(key[w - 1] as usize))?;
                run = 1;
            }
        }
        total += v * arrangement_count(key) * prod;
    }
    Ok(total)
}

/// Constant plus a finite sum of multiple integrals of distinct orders.
#[derive(Debug, Clone, PartialEq)]
pub struct ChaosFunctional {
    dim: usize,
    constant: f64,
    kernels: BTreeMap<usize, SymmetricKernel>,
}

impl ChaosFunctional {
    pub fn constant(dim: usize, c: f64) -> Result<Self> {
        if !c.is_finite() {
            return Err(Error::invalid("non-finite constant"));
        }
        Ok(ChaosFunctional {
            dim,
            constant: c,
            kernels: BTreeMap::new(),
        })
    }

    pub fn from_kernel(f: SymmetricKernel) -> Result<Self> {
        let mut out = ChaosFunctional::constant(f.dim(), 0.0)?;
        out.add_kernel(f)?;
        Ok(out)
    }

    /// Merge a kernel in; orders stay distinct by summing equal orders.
    pub fn add_kernel(&mut self, f: SymmetricKernel) -> Result<()> {
        if f.dim() != self.dim {
            return Err(Error::DimMismatch {
                left: f.dim(),
                right: self.dim,
            });
        }
        if f.order() == 0 {
            return Err(Error::invalid(
                "order-0 kernels belong in the constant term",
            ));
        }
        if f.is_zero() {
            return Ok(());
        }
        match self.kernels.remove(&f.order()) {
            None => {
                self.kernels.insert(f.order(), f);
            }
            Some(existing) => {
                let merged = existing.add(&f)?;
                if !merged.is_zero() {
                    self.kernels.insert(merged.order(), merged);
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constant_term(&self) -> f64 {
        self.constant
    }

    pub fn set_constant(&mut self, c: f64) {
        self.constant = c;
    }

    pub fn kernel(&self, order: usize) -> Option<&SymmetricKernel> {
        self.kernels.get(&order)
    }

    pub fn orders(&self) -> impl Iterator<Item = usize> + '_ {
        self.kernels.keys().copied()
    }

    pub fn kernels(&self) -> impl Iterator<Item = (usize, &SymmetricKernel)> {
        self.kernels.iter().map(|(&d, k)| (d, k))
    }

    pub fn max_order(&self) -> usize {
        self.kernels.keys().max().copied().unwrap_or(0)
    }

    /// Pointwise evaluation `c + sum_d I_d(f_d)(Z)`.
    pub fn eval(&self, z: &GaussianSample) -> Result<f64> {
        let mut total = self.constant;
        for k in self.kernels.values() {
            total += eval_integral(k, z)?;
        }
        Ok(total)
    }

    /// `E[F^2] = c^2 + sum_d d! ||f_d||^2` by orthogonality of chaoses.
    pub fn second_moment(&self) -> f64 {
        let mut total = self.constant * self.constant;
        for (&d, k) in &self.kernels {
            total += factorial(d) * k.norm_sq();
        }
        total
    }

    /// Condition on the early coordinates: every kernel is projected onto
    /// tuples stamped `<= s`; the constant is unchanged.
    pub fn conditional_expectation(&self, basis: &FilteredBasis, s: f64) -> Result<Self> {
        let mut out = ChaosFunctional::constant(self.dim, self.constant)?;
        for k in self.kernels.values() {
            let projected = crate::filtration::project_kernel(k, basis, s, ProjectionMode::KeepEarly)?;
            out.add_kernel(projected)?;
        }
        Ok(out)
    }

    /// Directional Malliavin derivative `D_i F = sum_q q I_{q-1}(f_q(i,·))`.
    pub fn derivative_in(&self, i: usize) -> Result<Self> {
        if i >= self.dim {
            return Err(Error::invalid(format!(
                "direction {i} out of range for dim {}",
                self.dim
            )));
        }
        let mut out = ChaosFunctional::constant(self.dim, 0.0)?;
        for (&q, kernel) in &self.kernels {
            let slice = kernel.slice_first(i)?.scale(q as f64);
            if q == 1 {
                out.constant += slice.get(&[]);
            } else {
                out.add_kernel(slice)?;
            }
        }
        Ok(out)
    }

    pub fn scale(&self, factor: f64) -> Self {
        let kernels = self
            .kernels
            .iter()
            .map(|(&d, k)| (d, k.scale(factor)))
            .filter(|(_, k)| !k.is_zero())
            .collect();
        ChaosFunctional {
            dim: self.dim,
            constant: self.constant * factor,
            kernels,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        let mut out = self.clone();
        out.constant += other.constant;
        for k in other.kernels.values() {
            out.add_kernel(k.clone())?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    /// Per-order L2 distance components against another functional:
    /// `|Δc|` at order 0 and `sqrt(d! ||Δf_d||^2)` at order `d`.
    pub fn l2_distance_components(&self, other: &Self) -> Result<Vec<(usize, f64)>> {
        let diff = self.sub(other)?;
        let mut out = vec![(0usize, diff.constant.abs())];
        for (&d, k) in &diff.kernels {
            out.push((d, (factorial(d) * k.norm_sq()).sqrt()));
        }
        Ok(out)
    }

    /// Full L2 distance.
    pub fn l2_distance(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.second_moment().sqrt())
    }
}

/// Chaos expansion of `I_d(f)^2`:
/// `d! ||f||^2 + sum_{r=1}^{d} (d-r)! C(d,r)^2 I_{2r}((f ⊗_{d-r} f)_s)`.
pub fn square_expand(f: &SymmetricKernel) -> Result<ChaosFunctional> {
    expand_square_projected(f, None)
}

/// Chaos expansion of `E[I_d(f)^2 | F_s]`: same combinatorics with every
/// contraction kernel projected onto early tuples before symmetrization.
pub fn conditional_second_moment(
    f: &SymmetricKernel,
    basis: &FilteredBasis,
    s: f64,
) -> Result<ChaosFunctional> {
    expand_square_projected(f, Some((basis, s)))
}

fn expand_square_projected(
    f: &SymmetricKernel,
    projection: Option<(&FilteredBasis, f64)>,
) -> Result<ChaosFunctional> {
    let d = f.order();
    if d == 0 {
        return Err(Error::invalid("square expansion needs order >= 1"));
    }
    if 2 * d > MAX_ORDER {
        return Err(Error::Capacity {
            what: "square expansion order",
            requested: 2 * d,
            cap: MAX_ORDER,
        });
    }
    if let Some((basis, _)) = projection {
        if basis.dim() != f.dim() {
            return Err(Error::DimMismatch {
                left: basis.dim(),
                right: f.dim(),
            });
        }
    }
    let mut out = ChaosFunctional::constant(f.dim(), factorial(d) * f.norm_sq())?;
    for r in 1..=d {
        let weight = factorial(d - r) * binomial(d, r) * binomial(d, r);
        let mut raw = contract(f, f, d - r)?;
        if let Some((basis, s)) = projection {
            raw = project_tensor(&raw, basis, s, ProjectionMode::KeepEarly)?;
        }
        let kernel = symmetrize(&raw).scale(weight);
        out.add_kernel(kernel)?;
    }
    Ok(out)
}

/// `E[I_d(f)^4]` computed exactly through the multiplication formula.
pub fn fourth_moment(f: &SymmetricKernel) -> Result<f64> {
    Ok(square_expand(f)?.second_moment())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{inner, Tensor};
    use rand::Rng;

    fn sym(dim: usize, idx: &[usize]) -> SymmetricKernel {
        symmetrize(&Tensor::basis(dim, idx).unwrap())
    }

    fn random_kernel(order: usize, dim: usize, rng: &mut ChaCha8Rng) -> SymmetricKernel {
        let mut raw = Tensor::zeros(order, dim).unwrap();
        let mut idx = vec![0usize; order];
        loop {
            raw.add_entry(&idx, rng.gen_range(-1.0..1.0)).unwrap();
            let mut carried = false;
            for slot in idx.iter_mut().rev() {
                *slot += 1;
                if *slot < dim {
                    carried = true;
                    break;
                }
                *slot = 0;
            }
            if !carried {
                break;
            }
        }
        symmetrize(&raw)
    }

    #[test]
    fn hermite_values() {
        assert_eq!(hermite(0, 3.7).unwrap(), 1.0);
        assert_eq!(hermite(1, -2.5).unwrap(), -2.5);
        assert_eq!(hermite(2, 1.0).unwrap(), 0.0);
        assert_eq!(hermite(3, 2.0).unwrap(), 2.0);
        assert_eq!(hermite(4, 1.0).unwrap(), -2.0); // x^4 - 6x^2 + 3
        assert!(hermite(65, 0.0).is_err());
    }

    #[test]
    fn sampling_is_reproducible() {
        let a = GaussianSample::draw(16, 42, 3);
        let b = GaussianSample::draw(16, 42, 3);
        assert_eq!(a, b);
        let c = GaussianSample::draw(16, 42, 4);
        assert_ne!(a, c);
        let d = GaussianSample::draw(16, 43, 3);
        assert_ne!(a, d);
    }

    #[test]
    fn sampling_moments() {
        let m = 1_000_000usize;
        let mut acc = crate::mc::PowerSums::default();
        for i in 0..m as u64 {
            let z = GaussianSample::draw(1, 7, i);
            acc.push(z.coord(0));
        }
        assert!(acc.mean().abs() < 3e-3, "mean {}", acc.mean());
        assert!((acc.variance() - 1.0).abs() < 5e-3, "var {}", acc.variance());
    }

    #[test]
    fn eval_integral_examples() {
        let z = GaussianSample::draw(3, 1, 0);
        let z1 = z.coord(0);
        let z2 = z.coord(1);

        let f = sym(3, &[0]);
        assert!((eval_integral(&f, &z).unwrap() - z1).abs() < 1e-15);

        let f = sym(3, &[0, 0]);
        assert!((eval_integral(&f, &z).unwrap() - (z1 * z1 - 1.0)).abs() < 1e-15);

        let f = sym(3, &[0, 1]);
        assert!((eval_integral(&f, &z).unwrap() - z1 * z2).abs() < 1e-15);
    }

    #[test]
    fn monomial_normalization_matches_isometry() {
        // I_d((⊗ e_j^{a_j})_s) = prod h_{a_j}(Z_j), with second moment prod a_j!
        let z = GaussianSample::draw(4, 5, 9);
        let cases: &[&[usize]] = &[&[0, 0, 1], &[0, 1, 2], &[1, 1, 1], &[0, 0, 1, 1, 3]];
        for idx in cases {
            let f = sym(4, idx);
            let mut expected = 1.0;
            let mut mult = 1.0;
            for j in 0..4usize {
                let a = idx.iter().filter(|&&i| i == j).count();
                expected *= hermite(a, z.coord(j)).unwrap();
                mult *= factorial(a);
            }
            let got = eval_integral(&f, &z).unwrap();
            assert!((got - expected).abs() < 1e-12, "{idx:?}");
            let sm = ChaosFunctional::from_kernel(f).unwrap().second_moment();
            assert!((sm - mult).abs() < 1e-12, "{idx:?}");
        }
    }

    #[test]
    fn chaos_eval_examples() {
        let z = GaussianSample::draw(1, 11, 2).with_coord(0, 2.0);
        let c = ChaosFunctional::constant(1, 3.0).unwrap();
        assert_eq!(c.eval(&z).unwrap(), 3.0);

        let mut f = ChaosFunctional::constant(1, 1.0).unwrap();
        f.add_kernel(sym(1, &[0, 0])).unwrap();
        assert!((f.eval(&z).unwrap() - 4.0).abs() < 1e-15);

        // additivity across orders
        let mut g = ChaosFunctional::constant(1, 0.0).unwrap();
        g.add_kernel(sym(1, &[0])).unwrap();
        g.add_kernel(sym(1, &[0, 0])).unwrap();
        let parts = eval_integral(&sym(1, &[0]), &z).unwrap()
            + eval_integral(&sym(1, &[0, 0]), &z).unwrap();
        assert!((g.eval(&z).unwrap() - parts).abs() < 1e-15);
    }

    #[test]
    fn square_expand_examples() {
        // f = e1⊗e1: constant 2, order-2 kernel 4 e1⊗e1, order-4 kernel e1^{⊗4}
        let f = sym(1, &[0, 0]);
        let sq = square_expand(&f).unwrap();
        assert!((sq.constant_term() - 2.0).abs() < 1e-15);
        assert!((sq.kernel(2).unwrap().get(&[0, 0]) - 4.0).abs() < 1e-15);
        assert!((sq.kernel(4).unwrap().get(&[0, 0, 0, 0]) - 1.0).abs() < 1e-15);
        for i in 0..50u64 {
            let z = GaussianSample::draw(1, 3, i);
            let a = z.coord(0) * z.coord(0) - 1.0;
            assert!((sq.eval(&z).unwrap() - a * a).abs() < 1e-12);
        }

        // d = 1: X(e1)^2 = 1 + I_2(e1⊗e1)
        let f = sym(1, &[0]);
        let sq = square_expand(&f).unwrap();
        assert!((sq.constant_term() - 1.0).abs() < 1e-15);
        assert!((sq.kernel(2).unwrap().get(&[0, 0]) - 1.0).abs() < 1e-15);

        // f = (e1⊗e2)_s: constant 1, eval = Z1^2 Z2^2
        let f = sym(2, &[0, 1]);
        let sq = square_expand(&f).unwrap();
        assert!((sq.constant_term() - 1.0).abs() < 1e-15);
        for i in 0..50u64 {
            let z = GaussianSample::draw(2, 4, i);
            let expect = (z.coord(0) * z.coord(1)).powi(2);
            assert!((sq.eval(&z).unwrap() - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn multiplication_formula_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for trial in 0..30 {
            let order = 1 + (trial % 3);
            let dim = 2 + (trial % 4);
            let f = random_kernel(order, dim, &mut rng);
            let sq = square_expand(&f).unwrap();
            let z = GaussianSample::draw(dim, 1000, trial as u64);
            let direct = eval_integral(&f, &z).unwrap().powi(2);
            let expanded = sq.eval(&z).unwrap();
            assert!(
                (direct - expanded).abs() < 1e-9,
                "order {order} dim {dim}: {direct} vs {expanded}"
            );
        }
    }

    #[test]
    fn second_moment_examples() {
        let f = ChaosFunctional::from_kernel(sym(2, &[0, 1])).unwrap();
        assert!((f.second_moment() - 1.0).abs() < 1e-15);

        let c = ChaosFunctional::constant(2, -2.5).unwrap();
        assert!((c.second_moment() - 6.25).abs() < 1e-15);

        let mut g = ChaosFunctional::constant(1, 1.0).unwrap();
        g.add_kernel(sym(1, &[0, 0])).unwrap();
        assert!((g.second_moment() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn fourth_moment_values() {
        assert!((fourth_moment(&sym(1, &[0, 0])).unwrap() - 60.0).abs() < 1e-12);
        assert!((fourth_moment(&sym(2, &[0, 1])).unwrap() - 9.0).abs() < 1e-12);
        let mut t = Tensor::zeros(2, 2).unwrap();
        t.add_entry(&[0, 0], 0.5).unwrap();
        t.add_entry(&[1, 1], 0.5).unwrap();
        let f = symmetrize(&t);
        assert!((fourth_moment(&f).unwrap() - 9.0).abs() < 1e-12);
    }

    #[test]
    fn fourth_moment_closed_form_d2() {
        // E F^4 = 3 (2 ||f||^2)^2 + 48 ||f ⊗_1 f||^2 for d = 2
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..30 {
            let f = random_kernel(2, 5, &mut rng);
            let general = fourth_moment(&f).unwrap();
            let c1 = contract(&f, &f, 1).unwrap();
            let closed = 3.0 * (2.0 * f.norm_sq()).powi(2) + 48.0 * inner(&c1, &c1).unwrap();
            assert!(
                (general - closed).abs() < 1e-12 * general.abs().max(1.0),
                "{general} vs {closed}"
            );
        }
    }

    #[test]
    fn conditional_expectation_examples() {
        let basis = FilteredBasis::new(vec![0.3, 0.7], vec![1, 1]).unwrap();
        let f = ChaosFunctional::from_kernel(sym(2, &[0, 1])).unwrap();

        let full = f.conditional_expectation(&basis, 1.0).unwrap();
        assert_eq!(full, f);

        let mid = f.conditional_expectation(&basis, 0.5).unwrap();
        assert_eq!(mid.constant_term(), 0.0);
        assert!(mid.kernel(2).is_none());

        let g = ChaosFunctional::from_kernel(sym(2, &[0, 0])).unwrap();
        let mid = g.conditional_expectation(&basis, 0.5).unwrap();
        assert_eq!(mid, g);
    }

    #[test]
    fn conditional_expectation_is_early_measurable() {
        let basis = FilteredBasis::new(vec![0.2, 0.5, 0.9], vec![1, 1, 1]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let f = ChaosFunctional::from_kernel(random_kernel(3, 3, &mut rng)).unwrap();
        let ce = f.conditional_expectation(&basis, 0.6).unwrap();
        let z = GaussianSample::draw(3, 77, 0);
        let v = ce.eval(&z).unwrap();
        // perturbing the late coordinate (stamp 0.9) changes nothing
        let v2 = ce.eval(&z.with_coord(2, 10.0)).unwrap();
        assert_eq!(v, v2);
        // perturbing an early coordinate does (almost surely)
        let v3 = ce.eval(&z.with_coord(0, 10.0)).unwrap();
        assert_ne!(v, v3);
    }

    fn mixture_kernel(n: usize) -> (SymmetricKernel, FilteredBasis) {
        let mut times = vec![0.1];
        times.extend((1..=n).map(|k| 0.5 + k as f64 / (2 * n) as f64));
        let mut channels = vec![1u32];
        channels.extend(std::iter::repeat_n(2, n));
        let basis = FilteredBasis::new(times, channels).unwrap();
        let mut f = SymmetricKernel::zeros(2, n + 1).unwrap();
        let c = 0.5 / (n as f64).sqrt();
        for k in 1..=n {
            f.add_canonical(&[0, k], c).unwrap();
        }
        (f, basis)
    }

    #[test]
    fn conditional_second_moment_cases() {
        let (f, basis) = mixture_kernel(6);

        // at the cutoff, E[F^2 | F_s] = Z_0^2 = 1 + I_2(e0⊗e0)
        let csm = conditional_second_moment(&f, &basis, 0.5).unwrap();
        assert!((csm.constant_term() - 1.0).abs() < 1e-12);
        let k2 = csm.kernel(2).unwrap();
        assert!((k2.get(&[0, 0]) - 1.0).abs() < 1e-12);
        assert_eq!(k2.entry_count(), 1);
        assert!(csm.kernel(4).is_none());
        for i in 0..20u64 {
            let z = GaussianSample::draw(7, 13, i);
            let expect = z.coord(0) * z.coord(0);
            assert!((csm.eval(&z).unwrap() - expect).abs() < 1e-12);
        }

        // s = 1 recovers the full square expansion
        let full = conditional_second_moment(&f, &basis, 1.0).unwrap();
        assert_eq!(full, square_expand(&f).unwrap());

        // s = 0 leaves only the constant d! ||f||^2
        let none = conditional_second_moment(&f, &basis, 0.0).unwrap();
        assert!((none.constant_term() - 1.0).abs() < 1e-12);
        assert_eq!(none.orders().count(), 0);
    }

    #[test]
    fn conditional_second_moment_agrees_with_projected_square() {
        // two routes: project-then-symmetrize vs condition the expansion
        let basis = FilteredBasis::new(vec![0.2, 0.5, 0.8, 0.9], vec![1, 1, 2, 2]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let f = random_kernel(2, 4, &mut rng);
            for &s in &[0.0, 0.3, 0.55, 0.85, 1.0] {
                let a = conditional_second_moment(&f, &basis, s).unwrap();
                let b = square_expand(&f)
                    .unwrap()
                    .conditional_expectation(&basis, s)
                    .unwrap();
                assert!(a.l2_distance(&b).unwrap() < 1e-12);
            }
        }
    }

    #[test]
    fn mc_isometry_and_orthogonality() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let f = random_kernel(2, 4, &mut rng);
        let g = random_kernel(3, 4, &mut rng);
        let m = 100_000u64;
        let mut ff = crate::mc::PowerSums::default();
        let mut cross = crate::mc::PowerSums::default();
        for i in 0..m {
            let z = GaussianSample::draw(4, 555, i);
            let a = eval_integral(&f, &z).unwrap();
            let b = eval_integral(&g, &z).unwrap();
            ff.push(a * a);
            cross.push(a * b);
        }
        let target = 2.0 * f.norm_sq();
        assert!(
            (ff.mean() - target).abs() <= 4.0 * ff.se_mean(),
            "isometry: {} vs {target} (se {})",
            ff.mean(),
            ff.se_mean()
        );
        assert!(
            cross.mean().abs() <= 4.0 * cross.se_mean(),
            "orthogonality: {} (se {})",
            cross.mean(),
            cross.se_mean()
        );
    }
}
