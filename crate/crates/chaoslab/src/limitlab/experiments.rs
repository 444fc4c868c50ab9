//! Monte-Carlo experiment drivers: stable-convergence characteristic
//! function checks, the projected-derivative concentration check and the
//! time-changed martingale (DDS) suite.
//!
//! Every driver fans samples out in fixed blocks ([`crate::mc`]); sample
//! `i` of size `n` uses the random stream `(n << 40) | i`, so reports are
//! reproducible bit-for-bit from `(seed, stream)` for any lane count.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{
    check_stable_conditions, generate_sequence, ConditionReport, KernelSequence, SequenceKind,
};
use crate::chaos::{eval_integral, sample, ChaosFunctional, GaussianSample};
use crate::error::{Error, Result};
use crate::filtration::FilteredBasis;
use crate::malliavin::{adapted_projection, derivative, projection_norm_sq};
use crate::mc::{self, ComplexMean, PowerSums};

/// Default characteristic-function grid for both `lambda` and `gamma`.
pub const DEFAULT_GRID: [f64; 9] = [-3.0, -2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 3.0];

/// Reference-coordinate bin edges for the conditional CF (7 bins).
const BIN_EDGES: [f64; 6] = [-1.5, -0.75, -0.25, 0.25, 0.75, 1.5];

fn bin_of(x: f64) -> usize {
    BIN_EDGES.iter().filter(|&&e| x > e).count()
}

fn stream_of(n: usize, i: u64) -> u64 {
    ((n as u64) << 40) | i
}

/// Joint characteristic-function residual at one `(lambda, gamma)` point.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CfPoint {
    pub lambda: f64,
    pub gamma: f64,
    pub residual: f64,
    pub se: f64,
}

/// Conditional characteristic-function residual at one `(lambda, bin)`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CondCfPoint {
    pub lambda: f64,
    pub bin: usize,
    pub bin_count: u64,
    pub residual: f64,
    pub se: f64,
}

/// Per-`n` results of the stable-convergence experiment.
#[derive(Debug, Clone, Serialize)]
pub struct StableBlock {
    pub n: usize,
    pub samples: u64,
    pub conditions: ConditionReport,
    pub sample_mean: f64,
    pub sample_variance: f64,
    pub sample_fourth: f64,
    pub ks_vs_normal: f64,
    pub joint: Vec<CfPoint>,
    pub conditional: Vec<CondCfPoint>,
    /// Largest `residual / (4 se)` over the joint grid (0 when exact).
    pub max_joint_excess: f64,
    pub max_conditional_excess: f64,
}

/// Full stable-convergence experiment output.
#[derive(Debug, Clone, Serialize)]
pub struct StableReport {
    pub kind: String,
    pub seed: u64,
    pub samples: u64,
    pub lambda_grid: Vec<f64>,
    pub gamma_grid: Vec<f64>,
    pub stream_scheme: String,
    pub blocks: Vec<StableBlock>,
}

struct StableAccum {
    f_stats: PowerSums,
    f_values: Vec<f64>,
    joint: Vec<ComplexMean>,
    cond: Vec<ComplexMean>,
    bin_counts: Vec<u64>,
}

impl StableAccum {
    fn new(n_lambda: usize, n_gamma: usize) -> Self {
        let bins = BIN_EDGES.len() + 1;
        StableAccum {
            f_stats: PowerSums::default(),
            f_values: Vec::new(),
            joint: vec![ComplexMean::default(); n_lambda * n_gamma],
            cond: vec![ComplexMean::default(); n_lambda * bins],
            bin_counts: vec![0; bins],
        }
    }

    fn merge(&mut self, other: StableAccum) {
        self.f_stats.merge(&other.f_stats);
        self.f_values.extend_from_slice(&other.f_values);
        for (a, b) in self.joint.iter_mut().zip(&other.joint) {
            a.merge(b);
        }
        for (a, b) in self.cond.iter_mut().zip(&other.cond) {
            a.merge(b);
        }
        for (a, b) in self.bin_counts.iter_mut().zip(&other.bin_counts) {
            *a += b;
        }
    }
}

/// Run the stable-convergence experiment on a built-in sequence kind.
pub fn stable_test(
    kind: SequenceKind,
    ns: &[usize],
    samples: u64,
    lambda_grid: &[f64],
    gamma_grid: &[f64],
    seed: u64,
) -> Result<StableReport> {
    let seqs = ns
        .iter()
        .map(|&n| generate_sequence(kind, n))
        .collect::<Result<Vec<_>>>()?;
    stable_test_sequences(&kind.to_string(), &seqs, samples, lambda_grid, gamma_grid, seed)
}

/// Run the experiment on explicitly provided sequence members.
pub fn stable_test_sequences(
    kind: &str,
    seqs: &[KernelSequence],
    samples: u64,
    lambda_grid: &[f64],
    gamma_grid: &[f64],
    seed: u64,
) -> Result<StableReport> {
    if samples == 0 {
        return Err(Error::invalid("sample count must be positive"));
    }
    let mut blocks = Vec::with_capacity(seqs.len());
    for seq in seqs {
        blocks.push(run_stable_block(seq, samples, lambda_grid, gamma_grid, seed)?);
    }
    Ok(StableReport {
        kind: kind.to_string(),
        seed,
        samples,
        lambda_grid: lambda_grid.to_vec(),
        gamma_grid: gamma_grid.to_vec(),
        stream_scheme: "stream = (n << 40) | sample_index".to_string(),
        blocks,
    })
}

fn run_stable_block(
    seq: &KernelSequence,
    samples: u64,
    lambda_grid: &[f64],
    gamma_grid: &[f64],
    seed: u64,
) -> Result<StableBlock> {
    let conditions =
        check_stable_conditions(&seq.kernel, &seq.basis, seq.cutoff, seq.law.functional())?;
    let nl = lambda_grid.len();
    let ng = gamma_grid.len();
    let bins = BIN_EDGES.len() + 1;

    let partials = mc::map_blocks(samples, |range| {
        let mut acc = StableAccum::new(nl, ng);
        let mut eif = vec![Complex64::new(0.0, 0.0); nl];
        let mut ey = vec![0.0f64; nl];
        let mut eig = vec![Complex64::new(0.0, 0.0); ng];
        for i in range {
            let z = sample(&seq.basis, seed, stream_of(seq.n, i));
            let f = eval_integral(&seq.kernel, &z).expect("shapes fixed by construction");
            let y = seq.law.eval(&z).expect("law dim matches basis");
            let zref = z.coord(0);
            acc.f_stats.push(f);
            acc.f_values.push(f);
            for (k, &l) in lambda_grid.iter().enumerate() {
                eif[k] = Complex64::new(0.0, l * f).exp();
                ey[k] = (-0.5 * l * l * y).exp();
            }
            for (k, &g) in gamma_grid.iter().enumerate() {
                eig[k] = Complex64::new(0.0, g * zref).exp();
            }
            for (li, _) in lambda_grid.iter().enumerate() {
                let diff = eif[li] - ey[li];
                for (gi, _) in gamma_grid.iter().enumerate() {
                    acc.joint[li * ng + gi].push(eig[gi] * diff);
                }
            }
            let b = bin_of(zref);
            acc.bin_counts[b] += 1;
            for (li, _) in lambda_grid.iter().enumerate() {
                acc.cond[li * bins + b].push(eif[li] - ey[li]);
            }
        }
        acc
    });
    let mut acc = StableAccum::new(nl, ng);
    for p in partials {
        acc.merge(p);
    }

    let mut joint = Vec::with_capacity(nl * ng);
    let mut max_joint_excess = 0.0f64;
    for (li, &l) in lambda_grid.iter().enumerate() {
        for (gi, &g) in gamma_grid.iter().enumerate() {
            let m = &acc.joint[li * ng + gi];
            let residual = m.mean().norm();
            let se = m.se();
            if se > 0.0 {
                max_joint_excess = max_joint_excess.max(residual / (4.0 * se));
            } else if residual > 0.0 {
                max_joint_excess = f64::INFINITY;
            }
            joint.push(CfPoint {
                lambda: l,
                gamma: g,
                residual,
                se,
            });
        }
    }

    let mut conditional = Vec::with_capacity(nl * bins);
    let mut max_conditional_excess = 0.0f64;
    for (li, &l) in lambda_grid.iter().enumerate() {
        for b in 0..bins {
            let m = &acc.cond[li * bins + b];
            if m.n == 0 {
                continue;
            }
            let residual = m.mean().norm();
            let se = m.se();
            if se > 0.0 {
                max_conditional_excess = max_conditional_excess.max(residual / (4.0 * se));
            } else if residual > 0.0 {
                max_conditional_excess = f64::INFINITY;
            }
            conditional.push(CondCfPoint {
                lambda: l,
                bin: b,
                bin_count: m.n,
                residual,
                se,
            });
        }
    }

    let ks_vs_normal = mc::ks_statistic(&acc.f_values, mc::normal_cdf);

    Ok(StableBlock {
        n: seq.n,
        samples,
        conditions,
        sample_mean: acc.f_stats.mean(),
        sample_variance: acc.f_stats.variance(),
        sample_fourth: acc.f_stats.central4(),
        ks_vs_normal,
        joint,
        conditional,
        max_joint_excess,
        max_conditional_excess,
    })
}

/// Concentration of the adapted-derivative norm on the mixture sequence:
/// `sum_i u_i(Z)^2` should match the mixture variance `Y(Z)` pointwise.
#[derive(Debug, Clone, Serialize)]
pub struct CvdiffReport {
    pub n: usize,
    pub samples: u64,
    pub seed: u64,
    pub cutoff: f64,
    /// Monte-Carlo mean of `|sum_i u_i^2 - Y|` and its standard error.
    pub mean_abs_deviation: f64,
    pub se_abs_deviation: f64,
    /// Mean of the early part `sum_{tau_i <= t_n} u_i^2` and its SE.
    pub mean_cutoff_part: f64,
    pub se_cutoff_part: f64,
}

pub fn cvdiff_experiment(n: usize, samples: u64, seed: u64) -> Result<CvdiffReport> {
    let seq = generate_sequence(SequenceKind::Mixture, n)?;
    let field = adapted_projection(&derivative(&seq.kernel)?, &seq.basis)?;

    let partials = mc::map_blocks(samples, |range| {
        let mut dev = PowerSums::default();
        let mut cut = PowerSums::default();
        for i in range {
            let z = sample(&seq.basis, seed, stream_of(seq.n, i));
            let p = projection_norm_sq(&field, &seq.basis, &z, None).expect("shapes fixed");
            let y = seq.law.eval(&z).expect("law dim matches");
            dev.push((p - y).abs());
            let c = projection_norm_sq(&field, &seq.basis, &z, Some(seq.cutoff))
                .expect("shapes fixed");
            cut.push(c);
        }
        (dev, cut)
    });
    let mut dev = PowerSums::default();
    let mut cut = PowerSums::default();
    for (d, c) in partials {
        dev.merge(&d);
        cut.merge(&c);
    }
    Ok(CvdiffReport {
        n,
        samples,
        seed,
        cutoff: seq.cutoff,
        mean_abs_deviation: dev.mean(),
        se_abs_deviation: dev.se_mean(),
        mean_cutoff_part: cut.mean(),
        se_cutoff_part: cut.se_mean(),
    })
}

/// One grid point of the martingale second-moment comparison.
#[derive(Debug, Clone, Serialize)]
pub struct DdsGridPoint {
    pub t: f64,
    pub mean: f64,
    pub mean_se: f64,
    pub second_moment: f64,
    pub second_moment_se: f64,
    /// `E[Phi^2] * ||(pi_{t ∧ t2} - pi_{t ∧ t1}) h||^2`.
    pub expected: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DdsReport {
    pub samples: u64,
    pub seed: u64,
    pub t1: f64,
    pub t2: f64,
    pub grid: Vec<DdsGridPoint>,
    /// `(cell start, early direction, correlation)` rows.
    pub correlations: Vec<(f64, usize, f64)>,
    pub max_abs_correlation: f64,
    /// KS statistic of the pooled time-changed increments against N(0,1).
    pub ks_time_changed: f64,
    pub pooled_increments: u64,
}

#[derive(Debug, Clone, Copy, Default)]
struct CorrAccum {
    n: u64,
    sx: f64,
    sy: f64,
    sxy: f64,
    sxx: f64,
    syy: f64,
}

impl CorrAccum {
    fn push(&mut self, x: f64, y: f64) {
        self.n += 1;
        self.sx += x;
        self.sy += y;
        self.sxy += x * y;
        self.sxx += x * x;
        self.syy += y * y;
    }

    fn merge(&mut self, o: &CorrAccum) {
        self.n += o.n;
        self.sx += o.sx;
        self.sy += o.sy;
        self.sxy += o.sxy;
        self.sxx += o.sxx;
        self.syy += o.syy;
    }

    fn corr(&self) -> f64 {
        let n = self.n as f64;
        let cov = self.sxy - self.sx * self.sy / n;
        let vx = self.sxx - self.sx * self.sx / n;
        let vy = self.syy - self.sy * self.sy / n;
        if vx <= 0.0 || vy <= 0.0 {
            0.0
        } else {
            cov / (vx * vy).sqrt()
        }
    }
}

struct DdsAccum {
    level: Vec<PowerSums>,
    square: Vec<PowerSums>,
    corr: Vec<CorrAccum>,
    zscores: Vec<f64>,
}

/// Simulate the martingale `t -> delta(pi_t u)` for the elementary adapted
/// field `u = Phi * (pi_{t2} - pi_{t1}) h` and compare its second moments,
/// post-stopping increment correlations and time-changed increments with
/// the Brownian predictions.
#[allow(clippy::too_many_arguments)]
pub fn dds_experiment(
    basis: &FilteredBasis,
    h: &[f64],
    phi: &ChaosFunctional,
    t1: f64,
    t2: f64,
    grid: &[f64],
    samples: u64,
    seed: u64,
) -> Result<DdsReport> {
    if !(0.0..=1.0).contains(&t1) || !(0.0..=1.0).contains(&t2) || t1 >= t2 {
        return Err(Error::invalid(format!(
            "invalid interval: need 0 <= t1 < t2 <= 1, got ({t1}, {t2})"
        )));
    }
    if h.len() != basis.dim() || phi.dim() != basis.dim() {
        return Err(Error::DimMismatch {
            left: h.len(),
            right: basis.dim(),
        });
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) || grid.is_empty() {
        return Err(Error::invalid("grid must be strictly increasing"));
    }
    if grid.iter().any(|&t| !(0.0..=1.0).contains(&t)) {
        return Err(Error::invalid("grid points must lie in [0, 1]"));
    }
    // Phi must be measurable at t1
    let early = phi.conditional_expectation(basis, t1)?;
    if early.l2_distance(phi)? > 1e-12 {
        return Err(Error::invalid(
            "the pre-stopping factor must depend on coordinates stamped <= t1",
        ));
    }

    // deterministic per-grid-point segment masses ||(pi_{t∧t2} - pi_{t∧t1}) h||^2
    let seg = |t: f64| -> f64 {
        (0..basis.dim())
            .filter(|&i| {
                let tau = basis.time(i);
                tau > t1 && tau <= t.min(t2)
            })
            .map(|i| h[i] * h[i])
            .sum::<f64>()
            + 0.0
    };
    let seg_mass: Vec<f64> = grid.iter().map(|&t| seg(t)).collect();
    let phi_sq = phi.second_moment();
    let early_dirs: Vec<usize> = (0..basis.dim()).filter(|&i| basis.time(i) <= t1).collect();
    let cells: Vec<usize> = (0..grid.len() - 1).filter(|&j| grid[j] >= t1).collect();

    let partials = mc::map_blocks(samples, |range| {
        let mut acc = DdsAccum {
            level: vec![PowerSums::default(); grid.len()],
            square: vec![PowerSums::default(); grid.len()],
            corr: vec![CorrAccum::default(); cells.len() * early_dirs.len()],
            zscores: Vec::new(),
        };
        let mut path = vec![0.0f64; grid.len()];
        for i in range {
            let z = sample(basis, seed, i);
            let phi_val = phi.eval(&z).expect("shapes fixed");
            for (j, &t) in grid.iter().enumerate() {
                let m = if t <= t1 {
                    0.0
                } else {
                    let inc: f64 = (0..basis.dim())
                        .filter(|&k| {
                            let tau = basis.time(k);
                            tau > t1 && tau <= t.min(t2)
                        })
                        .map(|k| h[k] * z.coord(k))
                        .sum();
                    phi_val * inc
                };
                path[j] = m;
                acc.level[j].push(m);
                acc.square[j].push(m * m);
            }
            for (ci, &j) in cells.iter().enumerate() {
                let dm = path[j + 1] - path[j];
                for (ei, &dir) in early_dirs.iter().enumerate() {
                    acc.corr[ci * early_dirs.len() + ei].push(dm, z.coord(dir));
                }
                let dpsi = phi_val * phi_val * (seg_mass[j + 1] - seg_mass[j]);
                if dpsi > 0.0 {
                    acc.zscores.push(dm / dpsi.sqrt());
                }
            }
        }
        acc
    });
    let mut level = vec![PowerSums::default(); grid.len()];
    let mut square = vec![PowerSums::default(); grid.len()];
    let mut corr = vec![CorrAccum::default(); cells.len() * early_dirs.len()];
    let mut zscores = Vec::new();
    for p in partials {
        for (a, b) in level.iter_mut().zip(&p.level) {
            a.merge(b);
        }
        for (a, b) in square.iter_mut().zip(&p.square) {
            a.merge(b);
        }
        for (a, b) in corr.iter_mut().zip(&p.corr) {
            a.merge(b);
        }
        zscores.extend_from_slice(&p.zscores);
    }

    let grid_points: Vec<DdsGridPoint> = grid
        .iter()
        .enumerate()
        .map(|(j, &t)| DdsGridPoint {
            t,
            mean: level[j].mean(),
            mean_se: level[j].se_mean(),
            second_moment: square[j].mean(),
            second_moment_se: square[j].se_mean(),
            expected: phi_sq * seg_mass[j],
        })
        .collect();

    let mut correlations = Vec::new();
    let mut max_abs = 0.0f64;
    for (ci, &j) in cells.iter().enumerate() {
        for (ei, &dir) in early_dirs.iter().enumerate() {
            let c = corr[ci * early_dirs.len() + ei].corr();
            max_abs = max_abs.max(c.abs());
            correlations.push((grid[j], dir, c));
        }
    }

    let ks_time_changed = if zscores.is_empty() {
        0.0
    } else {
        mc::ks_statistic(&zscores, mc::normal_cdf)
    };

    Ok(DdsReport {
        samples,
        seed,
        t1,
        t2,
        grid: grid_points,
        correlations,
        max_abs_correlation: max_abs,
        ks_time_changed,
        pooled_increments: zscores.len() as u64,
    })
}
