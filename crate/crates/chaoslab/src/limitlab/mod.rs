//! Condition checkers for the limit theorems, kernel-sequence generators
//! and Monte-Carlo experiments.
//!
//! The central-limit chain checks variance normalization, plain contraction
//! norms and the fourth moment. The stable (mixture-of-Gaussians) chain
//! additionally tracks the projected kernel norm, the distance of the
//! conditional second moment to the target mixture variance and the late
//! part of the generalized contractions. Everything here is computed
//! exactly from kernels; sampling noise only enters the experiment drivers
//! in [`experiments`].

mod experiments;
mod sqeq;

pub use experiments::{
    cvdiff_experiment, dds_experiment, stable_test, stable_test_sequences, CfPoint, CondCfPoint,
    CvdiffReport, DdsGridPoint, DdsReport, StableBlock, StableReport, DEFAULT_GRID,
};
pub use sqeq::{random_sqeq_instance, sqeq_check, SqeqInstance};

use crate::chaos::{conditional_second_moment, fourth_moment, ChaosFunctional, GaussianSample};
use crate::error::{Error, Result};
use crate::filtration::{
    generalized_contraction, project_kernel, project_tensor, FilteredBasis, ProjectionMode,
};
use crate::tensor::{contract, factorial, inner, SymmetricKernel, MAX_ORDER};

/// A certified-nonnegative mixture variance `Y` with its chaos expansion.
///
/// Only explicit nonnegative forms are accepted: squares `X(h)^2` and
/// nonnegative constants. A generic `1 + I_2(g)` need not be nonnegative,
/// so it cannot certify a mixture law.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureLaw {
    functional: ChaosFunctional,
    certificate: Certificate,
}

#[derive(Debug, Clone, PartialEq)]
enum Certificate {
    SquareOfVector(Vec<f64>),
    NonnegativeConstant(f64),
}

impl MixtureLaw {
    /// `Y = X(h)^2 = ||h||^2 + I_2(h ⊗ h)`.
    pub fn from_square(h: &[f64]) -> Result<Self> {
        if h.is_empty() || h.iter().all(|&x| x == 0.0) {
            return Err(Error::invalid("mixture variance must not vanish"));
        }
        let dim = h.len();
        let mut kernel = SymmetricKernel::zeros(1, dim)?;
        for (i, &x) in h.iter().enumerate() {
            if x != 0.0 {
                kernel.add_canonical(&[i], x)?;
            }
        }
        let functional = crate::chaos::square_expand(&kernel)?;
        Ok(MixtureLaw {
            functional,
            certificate: Certificate::SquareOfVector(h.to_vec()),
        })
    }

    /// Constant variance `Y = c >= 0`.
    pub fn from_constant(dim: usize, c: f64) -> Result<Self> {
        if c.is_nan() || c < 0.0 || !c.is_finite() {
            return Err(Error::invalid(format!(
                "constant mixture variance must be nonnegative, got {c}"
            )));
        }
        Ok(MixtureLaw {
            functional: ChaosFunctional::constant(dim, c)?,
            certificate: Certificate::NonnegativeConstant(c),
        })
    }

    pub fn functional(&self) -> &ChaosFunctional {
        &self.functional
    }

    pub fn mean(&self) -> f64 {
        self.functional.constant_term()
    }

    pub fn dim(&self) -> usize {
        self.functional.dim()
    }

    /// Evaluate through the certificate, so the result is nonnegative by
    /// construction (not merely up to rounding).
    pub fn eval(&self, z: &GaussianSample) -> Result<f64> {
        match &self.certificate {
            Certificate::NonnegativeConstant(c) => Ok(*c),
            Certificate::SquareOfVector(h) => {
                if h.len() != z.dim() {
                    return Err(Error::DimMismatch {
                        left: h.len(),
                        right: z.dim(),
                    });
                }
                let x: f64 = h.iter().zip(z.coords()).map(|(a, b)| a * b).sum();
                Ok(x * x)
            }
        }
    }

    /// Characteristic function of the mixture at `lambda`, pointwise in
    /// `omega`: `exp(-lambda^2 Y / 2)`.
    pub fn cf(&self, lambda: f64, z: &GaussianSample) -> Result<f64> {
        Ok((-0.5 * lambda * lambda * self.eval(z)?).exp())
    }
}

/// Numeric condition norms for the limit theorems.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ConditionReport {
    pub order: usize,
    /// `d! ||f||^2`.
    pub variance: f64,
    /// `||f ⊗_{d-r} f||` for `r = 1..d-1`.
    pub contraction_norms: Vec<f64>,
    pub fourth_moment: f64,
    /// `|E F^4 - 3 (E F^2)^2|`.
    pub fourth_excess: f64,
    /// `||pi_t^{⊗d} f||` (stable checks only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub neg_norm: Option<f64>,
    /// L2 distance of the conditional second moment to `Y`, per chaos order
    /// (order 0 compares the means).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norm_distance_per_order: Option<Vec<(usize, f64)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norm_distance: Option<f64>,
    /// Late-part norms of the generalized contractions, `r = 1..d-1`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ascv_norms: Option<Vec<f64>>,
}

/// Central-limit conditions: variance, contraction norms and the distance
/// of the fourth moment from 3 variance^2.
pub fn check_clt_conditions(f: &SymmetricKernel) -> Result<ConditionReport> {
    let d = f.order();
    if d == 0 {
        return Err(Error::invalid("kernel order must be at least 1"));
    }
    if 2 * d > MAX_ORDER {
        return Err(Error::Capacity {
            what: "fourth moment order",
            requested: 2 * d,
            cap: MAX_ORDER,
        });
    }
    let variance = factorial(d) * f.norm_sq();
    let mut contraction_norms = Vec::new();
    for r in 1..d {
        let c = contract(f, f, d - r)?;
        contraction_norms.push(inner(&c, &c)?.sqrt());
    }
    let m4 = fourth_moment(f)?;
    Ok(ConditionReport {
        order: d,
        variance,
        contraction_norms,
        fourth_moment: m4,
        fourth_excess: (m4 - 3.0 * variance * variance).abs(),
        neg_norm: None,
        norm_distance_per_order: None,
        norm_distance: None,
        ascv_norms: None,
    })
}

/// Stable-convergence conditions at cutoff `t` against the target mixture
/// variance `y`.
pub fn check_stable_conditions(
    f: &SymmetricKernel,
    basis: &FilteredBasis,
    t: f64,
    y: &ChaosFunctional,
) -> Result<ConditionReport> {
    let d = f.order();
    if y.max_order() > 2 * (d.saturating_sub(1)) {
        return Err(Error::invalid(format!(
            "mixture variance of chaos order {} is incompatible with integrals of order {d}; \
             the conditional variance lives in orders up to {}",
            y.max_order(),
            2 * (d - 1)
        )));
    }
    let mut report = check_clt_conditions(f)?;

    let projected = project_kernel(f, basis, t, ProjectionMode::KeepEarly)?;
    report.neg_norm = Some(projected.norm());

    let csm = conditional_second_moment(f, basis, t)?;
    let per_order = csm.l2_distance_components(y)?;
    report.norm_distance = Some(csm.l2_distance(y)?);
    report.norm_distance_per_order = Some(per_order);

    let mut ascv = Vec::new();
    for r in 1..d {
        let gen = generalized_contraction(f, basis, d - r, t)?;
        let late = project_tensor(&gen, basis, t, ProjectionMode::KeepRest)?;
        ascv.push(inner(&late, &late)?.sqrt());
    }
    report.ascv_norms = Some(ascv);
    Ok(report)
}

/// Slot-wise late/early split norms of the generalized contraction for
/// `d = 2`: `||(late ⊗ late) g||` and `||(late ⊗ early) g||` with
/// `g = f ⊗_1^{pi,t} f`. Together with the symmetric early/late piece they
/// exhaust the `asCV` norm; in the double-integral chain they control the
/// distance of the conditional fourth moment from `3 Y^2`.
pub fn double_chain_excess(
    f: &SymmetricKernel,
    basis: &FilteredBasis,
    t: f64,
) -> Result<(f64, f64)> {
    if f.order() != 2 {
        return Err(Error::invalid("double-integral chain needs order 2"));
    }
    let gen = generalized_contraction(f, basis, 1, t)?;
    let late_late = gen.filtered(|key| basis.time(key[0] as usize) > t && basis.time(key[1] as usize) > t);
    let late_early =
        gen.filtered(|key| basis.time(key[0] as usize) > t && basis.time(key[1] as usize) <= t);
    Ok((
        inner(&late_late, &late_late)?.sqrt(),
        inner(&late_early, &late_early)?.sqrt(),
    ))
}

/// Which built-in kernel sequence to generate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SequenceKind {
    /// Early hub times late spokes; converges stably to a mixture with
    /// variance `Z_0^2`.
    Mixture,
    /// Sliding pair band with unit variance; satisfies the CLT chain.
    Central,
}

impl std::fmt::Display for SequenceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SequenceKind::Mixture => write!(f, "mixture"),
            SequenceKind::Central => write!(f, "central"),
        }
    }
}

impl std::str::FromStr for SequenceKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mixture" => Ok(SequenceKind::Mixture),
            "central" => Ok(SequenceKind::Central),
            other => Err(Error::invalid(format!(
                "unknown sequence kind '{other}' (expected mixture|central)"
            ))),
        }
    }
}

/// One member of a kernel sequence.
#[derive(Debug, Clone)]
pub struct KernelSequence {
    pub n: usize,
    pub kernel: SymmetricKernel,
    pub basis: FilteredBasis,
    /// Cutoff time `t_n` for the stable conditions.
    pub cutoff: f64,
    pub law: MixtureLaw,
}

/// Generate the `n`-th member of a built-in sequence.
///
/// Mixture: direction 0 is the hub with stamp 0.1 on channel 1; directions
/// `1..=n` are spokes with distinct stamps in `(0.5, 1]` on channel 2;
/// the kernel is `(1/sqrt(n)) sum_k (e_0 ⊙ e_k)` with cutoff `0.5` and
/// `Y = X(e_0)^2`. Central: stamps `k/n` on one channel, kernel
/// `(1/sqrt(n-1)) sum_k (e_k ⊙ e_{k+1})`, cutoff 0 and `Y = 1`.
pub fn generate_sequence(kind: SequenceKind, n: usize) -> Result<KernelSequence> {
    if n < 2 {
        return Err(Error::invalid(format!(
            "sequence size must be at least 2, got {n}"
        )));
    }
    match kind {
        SequenceKind::Mixture => {
            let dim = n + 1;
            let mut times = vec![0.1];
            times.extend((1..=n).map(|k| 0.5 + k as f64 / (2 * n) as f64));
            let mut channels = vec![1u32];
            channels.extend(std::iter::repeat_n(2, n));
            let basis = FilteredBasis::new(times, channels)?;
            let mut kernel = SymmetricKernel::zeros(2, dim)?;
            let c = 0.5 / (n as f64).sqrt();
            for k in 1..=n {
                kernel.add_canonical(&[0, k], c)?;
            }
            let mut h = vec![0.0; dim];
            h[0] = 1.0;
            Ok(KernelSequence {
                n,
                kernel,
                basis,
                cutoff: 0.5,
                law: MixtureLaw::from_square(&h)?,
            })
        }
        SequenceKind::Central => {
            let basis = FilteredBasis::uniform(n)?;
            let mut kernel = SymmetricKernel::zeros(2, n)?;
            let c = 0.5 / ((n - 1) as f64).sqrt();
            for k in 0..n - 1 {
                kernel.add_canonical(&[k, k + 1], c)?;
            }
            Ok(KernelSequence {
                n,
                kernel,
                basis,
                cutoff: 0.0,
                law: MixtureLaw::from_constant(n, 1.0)?,
            })
        }
    }
}
