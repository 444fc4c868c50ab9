//! Subcommand driver behind the `chaoslab` binary.
//!
//! Every subcommand runs library operations, records named assertions and
//! metric rows into a [`Report`](crate::report::Report) and exits 0 iff all
//! assertions pass. Reports are deterministic for a fixed `(config, seed)`
//! pair regardless of `CHAOSLAB_THREADS`; progress and timing go to stderr.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chaos::{
    conditional_second_moment, eval_integral, fourth_moment, square_expand, ChaosFunctional,
    GaussianSample,
};
use crate::error::{Error, Result};
use crate::filtration::{
    fully_orthogonalize, generalized_contraction, project_tensor, time_change, FilteredBasis,
    ProjectionMode,
};
use crate::kernel_file::parse_kernel_file;
use crate::limitlab::{
    check_clt_conditions, dds_experiment, generate_sequence, random_sqeq_instance, sqeq_check,
    stable_test_sequences, KernelSequence, SequenceKind, StableReport, DEFAULT_GRID,
};
use crate::malliavin::{clark_ocone_residual, derivative, skorohod};
use crate::mc;
use crate::report::{Report, ReportFormat};
use crate::tensor::{contract, inner, symmetrize, SymmetricKernel, Tensor};
use crate::transport::{random_instance, verify_transport};

#[derive(Parser, Debug)]
#[command(
    name = "chaoslab",
    about = "Wiener-chaos numerical laboratory: kernel checkers and Monte-Carlo experiments",
    long_about = "Runs exact kernel identities, limit-theorem condition checkers and \
                  Monte-Carlo experiments, emitting deterministic JSON/CSV reports. \
                  The CHAOSLAB_THREADS environment variable caps the worker lanes; \
                  results are bit-identical for any lane count."
)]
pub struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Exact-identity invariant suites (kernel algebra through transport)
    Selftest(CommonArgs),
    /// Central-limit condition table over a kernel sequence
    Clt(CommonArgs),
    /// Stable-convergence conditions plus the characteristic-function experiment
    Stable(CommonArgs),
    /// Square-equality identity residuals on random discrete instances
    Sqeq(CommonArgs),
    /// Martingale second-moment and time-change simulation
    Dds(CommonArgs),
    /// Transport identity residuals on random instances
    #[command(name = "transport-verify")]
    TransportVerify(CommonArgs),
    /// Clark-Ocone reconstruction residuals
    #[command(name = "clark-ocone")]
    ClarkOcone(CommonArgs),
}

#[derive(Args, Debug, Clone)]
struct CommonArgs {
    /// Kernel/experiment file (JSON)
    #[arg(long)]
    kernel: Option<PathBuf>,
    /// Built-in sequence kind: mixture | central
    #[arg(long)]
    kind: Option<String>,
    /// Comma-separated sequence sizes
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// Cutoff time for stable conditions on custom kernels
    #[arg(long)]
    t: Option<f64>,
    /// Monte-Carlo samples (or instance count for sqeq/transport-verify)
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Tolerance for exact identities
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Report path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format: json | csv
    #[arg(long, default_value = "json")]
    format: String,
}

impl CommonArgs {
    fn record(&self, report: &mut Report) {
        if let Some(k) = &self.kernel {
            report.param("kernel", k.display());
        }
        if let Some(k) = &self.kind {
            report.param("kind", k);
        }
        if let Some(ns) = &self.n {
            report.param(
                "n",
                ns.iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
            );
        }
        if let Some(t) = self.t {
            report.param("t", t);
        }
        report.param("format", &self.format);
    }
}

/// Parse from process arguments and run; returns the exit code.
pub fn run() -> i32 {
    run_cli(Cli::parse())
}

/// Run an already-parsed invocation.
pub fn run_cli(cli: Cli) -> i32 {
    let started = Instant::now();
    let (args, result) = match &cli.command {
        Cmd::Selftest(a) => (a, selftest(a)),
        Cmd::Clt(a) => (a, clt(a)),
        Cmd::Stable(a) => (a, stable(a)),
        Cmd::Sqeq(a) => (a, sqeq(a)),
        Cmd::Dds(a) => (a, dds(a)),
        Cmd::TransportVerify(a) => (a, transport_verify(a)),
        Cmd::ClarkOcone(a) => (a, clark_ocone(a)),
    };
    let report = match result {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    for check in &report.checks {
        eprintln!(
            "{} {:<40} value {:<12.3e} bound {:.3e}",
            if check.pass { "PASS" } else { "FAIL" },
            check.name,
            check.value,
            check.bound
        );
    }
    let format: ReportFormat = match args.format.parse() {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    if let Err(e) = report.emit(args.out.as_deref(), format) {
        eprintln!("error: {e}");
        return 2;
    }
    eprintln!(
        "{}: {} checks, {} metrics, {:.2}s",
        report.command,
        report.checks.len(),
        report.metrics.len(),
        started.elapsed().as_secs_f64()
    );
    if report.all_pass() {
        0
    } else {
        1
    }
}

fn random_dense_kernel(order: usize, dim: usize, rng: &mut ChaCha8Rng) -> SymmetricKernel {
    let mut raw = Tensor::zeros(order, dim).unwrap();
    for _ in 0..(2 * dim * dim) {
        let idx: Vec<usize> = (0..order).map(|_| rng.gen_range(0..dim)).collect();
        raw.add_entry(&idx, rng.gen_range(-1.0..1.0)).unwrap();
    }
    symmetrize(&raw)
}

fn random_offdiag_kernel(order: usize, dim: usize, rng: &mut ChaCha8Rng) -> SymmetricKernel {
    let mut f = SymmetricKernel::zeros(order, dim).unwrap();
    for _ in 0..(2 * dim) {
        let mut idx: Vec<usize> = (0..dim).collect();
        for k in 0..order {
            let pick = rng.gen_range(k..dim);
            idx.swap(k, pick);
        }
        let mut tuple = idx[..order].to_vec();
        tuple.sort_unstable();
        let v: f64 = rng.gen_range(-1.0..1.0);
        let old = f.get(&tuple);
        f.add_canonical(&tuple, v - old).unwrap();
    }
    f
}

fn random_basis(dim: usize, rng: &mut ChaCha8Rng) -> FilteredBasis {
    let times: Vec<f64> = (0..dim)
        .map(|i| ((i + 1) as f64 + rng.gen_range(-0.3..0.3)) / (dim as f64 + 0.5))
        .map(|t| t.clamp(0.05, 1.0))
        .collect();
    let channels: Vec<u32> = (0..dim).map(|_| rng.gen_range(1..=2)).collect();
    FilteredBasis::new(times, channels).unwrap()
}

// ---------------------------------------------------------------- selftest

fn selftest(args: &CommonArgs) -> Result<Report> {
    let samples = args.samples.unwrap_or(60);
    let mut report = Report::new("selftest", args.seed, samples, args.tol);
    args.record(&mut report);
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);

    // kernel algebra: symmetrization projection property and full contraction
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let order = rng.gen_range(1..=3);
        let dim = rng.gen_range(2..=5);
        let f = random_dense_kernel(order, dim, &mut rng);
        let s = random_dense_kernel(order, dim, &mut rng);
        let raw = f.to_tensor();
        let lhs = inner(&symmetrize(&raw).to_tensor(), &s.to_tensor())?;
        let rhs = inner(&raw, &s.to_tensor())?;
        worst = worst.max((lhs - rhs).abs());
        let full = contract(&f, &f, order)?.get(&[]);
        worst = worst.max((full - f.norm_sq()).abs());
    }
    report.check("kernel_algebra_identities", worst, args.tol);

    // projection decomposition of contractions at every breakpoint
    let mut worst = 0.0f64;
    for _ in 0..samples.min(30) {
        let dim = rng.gen_range(2..=4);
        let d = rng.gen_range(2..=3);
        let f = random_dense_kernel(d, dim, &mut rng);
        let basis = random_basis(dim, &mut rng);
        let s = rng.gen_range(0.0..1.0);
        let pf = crate::filtration::project_kernel(&f, &basis, s, ProjectionMode::KeepEarly)?;
        for r in 1..=d {
            let p = d - r;
            let lhs = project_tensor(
                &contract(&f, &f, p)?,
                &basis,
                s,
                ProjectionMode::KeepEarly,
            )?;
            let gen = project_tensor(
                &generalized_contraction(&f, &basis, p, s)?,
                &basis,
                s,
                ProjectionMode::KeepEarly,
            )?;
            let rhs = gen.add(&contract(&pf, &pf, p)?)?;
            worst = worst.max(lhs.sub(&rhs)?.max_abs());
        }
        // endpoint cases of the generalized contraction
        for p in 1..=d {
            let at_zero = generalized_contraction(&f, &basis, p, 0.0)?;
            worst = worst.max(at_zero.sub(&contract(&f, &f, p)?)?.max_abs());
            worst = worst.max(generalized_contraction(&f, &basis, p, 1.0)?.max_abs());
        }
    }
    report.check("projection_decomposition", worst, args.tol);

    // multiplication formula pointwise
    let mut worst = 0.0f64;
    for i in 0..samples {
        let order = rng.gen_range(1..=3);
        let dim = rng.gen_range(2..=6);
        let f = random_dense_kernel(order, dim, &mut rng);
        let z = GaussianSample::draw(dim, args.seed ^ 0x5e1f, i);
        let direct = eval_integral(&f, &z)?.powi(2);
        let via = square_expand(&f)?.eval(&z)?;
        worst = worst.max((direct - via).abs());
    }
    report.check("multiplication_formula", worst, args.tol);

    // pinned fourth-moment values and the order-2 closed form
    let e11 = symmetrize(&Tensor::basis(2, &[0, 0])?);
    let e12 = symmetrize(&Tensor::basis(2, &[0, 1])?);
    let mut worst = (fourth_moment(&e11)? - 60.0).abs();
    worst = worst.max((fourth_moment(&e12)? - 9.0).abs());
    for _ in 0..samples.min(40) {
        let f = random_dense_kernel(2, rng.gen_range(2..=6), &mut rng);
        let c1 = contract(&f, &f, 1)?;
        let closed = 3.0 * (2.0 * f.norm_sq()).powi(2) + 48.0 * inner(&c1, &c1)?;
        let general = fourth_moment(&f)?;
        worst = worst.max((general - closed).abs() / general.abs().max(1.0));
    }
    report.check("fourth_moment_values", worst, 1e-12);

    // delta(DF) = d F
    let mut worst = 0.0f64;
    for i in 0..samples.min(30) {
        let order = rng.gen_range(1..=3);
        let dim = rng.gen_range(3..=6);
        let f = random_dense_kernel(order, dim, &mut rng);
        let z = GaussianSample::draw(dim, args.seed ^ 0xd0f, i);
        let lhs = skorohod(&derivative(&f)?, &z)?;
        worst = worst.max((lhs - order as f64 * eval_integral(&f, &z)?).abs());
    }
    report.check("number_operator", worst, args.tol);

    // Clark-Ocone reconstruction on vanishing-diagonal kernels
    let mut worst = 0.0f64;
    for i in 0..samples.min(40) {
        let order = rng.gen_range(2..=3);
        let dim = 6;
        let f = random_offdiag_kernel(order, dim, &mut rng);
        let basis = random_basis(dim, &mut rng);
        let z = GaussianSample::draw(dim, args.seed ^ 0xc0, i);
        worst = worst.max(clark_ocone_residual(&f, &basis, &z)?.abs());
    }
    report.check("clark_ocone", worst, args.tol);

    // conditional second moment equals the conditioned square expansion
    let mut worst = 0.0f64;
    for _ in 0..samples.min(30) {
        let dim = rng.gen_range(2..=5);
        let f = random_dense_kernel(rng.gen_range(1..=3), dim, &mut rng);
        let basis = random_basis(dim, &mut rng);
        let s = rng.gen_range(0.0..1.0);
        let a = conditional_second_moment(&f, &basis, s)?;
        let b = square_expand(&f)?.conditional_expectation(&basis, s)?;
        worst = worst.max(a.l2_distance(&b)?);
    }
    report.check("conditional_second_moment", worst, args.tol);

    // transport identities on random rotated instances
    let mut worst = 0.0f64;
    for i in 0..samples.min(25) {
        let n = 4 + (i as usize % 4);
        let (_, _, _, map) = random_instance(n, args.seed ^ (1000 + i))?;
        let f = random_dense_kernel(2 + (i as usize % 2), n, &mut rng);
        let z = GaussianSample::draw(n, args.seed ^ 0x7a, i);
        let rep = verify_transport(&map, &f, &[0.25, 0.5, 0.75, 1.0], &z)?;
        worst = worst.max(rep.max_residual());
    }
    report.check("transport_identities", worst, args.tol);

    // time change and generator postconditions
    let mut worst = 0.0f64;
    for _ in 0..samples.min(25) {
        let dim = rng.gen_range(2..=8);
        let basis = random_basis(dim, &mut rng);
        let gens = fully_orthogonalize(&basis);
        if !gens.is_fully_orthogonal(&basis, 1e-12) || !gens.is_reproducing(&basis) {
            worst = f64::INFINITY;
        }
        let (map, restamped) = time_change(&basis, &gens)?;
        for &(_, m) in map.steps() {
            let total: f64 = gens
                .vectors
                .iter()
                .map(|g| {
                    (0..dim)
                        .filter(|&i| restamped.time(i) <= m)
                        .map(|i| g[i] * g[i])
                        .sum::<f64>()
                })
                .sum();
            worst = worst.max((total - m).abs());
        }
    }
    report.check("time_change", worst, args.tol);

    // square-equality residuals (exact identity, tighter bound)
    let mut worst = 0.0f64;
    for i in 0..samples.min(40) {
        let inst = random_sqeq_instance(
            1 + (i as usize % 2),
            1 + ((i / 2) as usize % 2),
            2,
            4,
            args.seed ^ (7000 + i),
        );
        let (_, _, diff) = sqeq_check(&inst)?;
        worst = worst.max(diff);
    }
    report.check("square_equality", worst, 1e-10);

    Ok(report)
}

// --------------------------------------------------------------------- clt

fn load_custom(args: &CommonArgs) -> Result<Option<KernelSequence>> {
    let Some(path) = &args.kernel else {
        return Ok(None);
    };
    let parsed = parse_kernel_file(path)?;
    if parsed.kernels.len() != 1 {
        return Err(Error::invalid(format!(
            "expected exactly one kernel in {}, got {}",
            path.display(),
            parsed.kernels.len()
        )));
    }
    let kernel = parsed.kernels.into_iter().next().unwrap();
    let dim = kernel.dim();
    let law = match parsed.law {
        Some(law) => law,
        None => crate::limitlab::MixtureLaw::from_constant(
            dim,
            crate::tensor::factorial(kernel.order()) * kernel.norm_sq(),
        )?,
    };
    Ok(Some(KernelSequence {
        n: dim,
        kernel,
        basis: parsed.basis,
        cutoff: args.t.unwrap_or(0.0),
        law,
    }))
}

fn clt(args: &CommonArgs) -> Result<Report> {
    let samples = args.samples.unwrap_or(100_000);
    let mut report = Report::new("clt", args.seed, samples, args.tol);
    args.record(&mut report);

    let custom = load_custom(args)?;
    let generated = custom.is_none();
    let seqs: Vec<KernelSequence> = match custom {
        Some(seq) => vec![seq],
        None => {
            let kind: SequenceKind = args.kind.as_deref().unwrap_or("central").parse()?;
            if kind != SequenceKind::Central {
                return Err(Error::invalid("clt expects --kind central or --kernel"));
            }
            let ns = args.n.clone().unwrap_or_else(|| vec![16, 64, 256]);
            ns.iter()
                .map(|&n| generate_sequence(kind, n))
                .collect::<Result<Vec<_>>>()?
        }
    };

    let mut band_norms = Vec::new();
    for seq in &seqs {
        let cond = check_clt_conditions(&seq.kernel)?;
        let n = seq.n as u64;
        report.metric(n, "variance", cond.variance);
        for (i, c) in cond.contraction_norms.iter().enumerate() {
            report.metric(n, format!("contraction_norm_r{}", i + 1), *c);
        }
        report.metric(n, "fourth_moment", cond.fourth_moment);
        report.metric(n, "fourth_excess", cond.fourth_excess);
        if generated {
            report.check(
                format!("variance_unit_n{}", seq.n),
                (cond.variance - 1.0).abs(),
                args.tol,
            );
        }
        if let Some(r1) = cond.contraction_norms.first() {
            band_norms.push((seq.n as f64, r1 * r1));
        }
    }

    if generated && seqs.len() >= 2 {
        // contraction norms must decrease strictly along the sequence
        let mut max_increase = f64::NEG_INFINITY;
        for w in band_norms.windows(2) {
            max_increase = max_increase.max(w[1].1 - w[0].1);
        }
        report.check("contraction_sq_decreasing", max_increase, 0.0);
        let ns: Vec<f64> = band_norms.iter().map(|&(n, _)| n).collect();
        let vals: Vec<f64> = band_norms.iter().map(|&(_, v)| v).collect();
        let slope = mc::log_log_slope(&ns, &vals);
        report.metric(0, "contraction_sq_decay_exponent", slope);
        report.check("decay_exponent", slope, -0.9);

        // fourth moments must fall along the sequence
        let mut max_increase = f64::NEG_INFINITY;
        let fourths: Vec<f64> = seqs
            .iter()
            .map(|s| check_clt_conditions(&s.kernel).map(|c| c.fourth_moment))
            .collect::<Result<_>>()?;
        for w in fourths.windows(2) {
            max_increase = max_increase.max(w[1] - w[0]);
        }
        report.check("fourth_moment_decreasing", max_increase, 0.0);

        // the absolute closeness bounds are pinned at size 256
        let last = seqs.last().unwrap();
        if last.n >= 256 {
            let m4 = *fourths.last().unwrap();
            report.check(format!("fourth_near_3_n{}", last.n), (m4 - 3.0).abs(), 0.1);
        }
    }

    // KS distance against N(0,1) at the largest size
    if let Some(seq) = seqs.last() {
        let values = sample_integral_values(seq, samples, args.seed);
        let ks = mc::ks_statistic(&values, mc::normal_cdf);
        report.metric(seq.n as u64, "ks_vs_normal", ks);
        if generated && seq.n >= 256 {
            report.check(format!("ks_n{}", seq.n), ks, 0.02);
        }
    }

    Ok(report)
}

fn sample_integral_values(seq: &KernelSequence, samples: u64, seed: u64) -> Vec<f64> {
    let partials = mc::map_blocks(samples, |range| {
        let mut out = Vec::with_capacity((range.end - range.start) as usize);
        for i in range {
            let z = GaussianSample::draw(seq.basis.dim(), seed, ((seq.n as u64) << 40) | i);
            out.push(eval_integral(&seq.kernel, &z).expect("shapes fixed"));
        }
        out
    });
    partials.concat()
}

// ------------------------------------------------------------------ stable

fn stable(args: &CommonArgs) -> Result<Report> {
    let samples = args.samples.unwrap_or(100_000);
    let mut report = Report::new("stable", args.seed, samples, args.tol);
    args.record(&mut report);

    let custom = load_custom(args)?;
    let (label, exact_zero, seqs): (String, bool, Vec<KernelSequence>) = match custom {
        Some(seq) => {
            if args.t.is_none() {
                return Err(Error::invalid("custom stable runs need --t"));
            }
            ("custom".to_string(), false, vec![seq])
        }
        None => {
            let kind: SequenceKind = args.kind.as_deref().unwrap_or("mixture").parse()?;
            let ns = args.n.clone().unwrap_or_else(|| vec![8, 32, 128]);
            let seqs = ns
                .iter()
                .map(|&n| generate_sequence(kind, n))
                .collect::<Result<Vec<_>>>()?;
            (kind.to_string(), kind == SequenceKind::Mixture, seqs)
        }
    };

    let stable: StableReport =
        stable_test_sequences(&label, &seqs, samples, &DEFAULT_GRID, &DEFAULT_GRID, args.seed)?;

    for block in &stable.blocks {
        let n = block.n as u64;
        let cond = &block.conditions;
        report.metric(n, "variance", cond.variance);
        report.metric(n, "neg_norm", cond.neg_norm.unwrap_or(0.0));
        report.metric(n, "norm_distance", cond.norm_distance.unwrap_or(0.0));
        for (order, dist) in cond.norm_distance_per_order.iter().flatten() {
            report.metric(n, format!("norm_distance_order{order}"), *dist);
        }
        for (i, a) in cond.ascv_norms.iter().flatten().enumerate() {
            report.metric(n, format!("ascv_norm_r{}", i + 1), *a);
        }
        report.metric(n, "fourth_moment", cond.fourth_moment);
        report.metric(n, "sample_mean", block.sample_mean);
        report.metric(n, "sample_variance", block.sample_variance);
        report.metric(n, "sample_fourth", block.sample_fourth);
        report.metric(n, "ks_vs_normal", block.ks_vs_normal);
        report.metric(n, "joint_cf_max_excess", block.max_joint_excess);
        report.metric(n, "conditional_cf_max_excess", block.max_conditional_excess);
        for p in &block.joint {
            report.metric(
                n,
                format!("joint_cf_residual[l={},g={}]", p.lambda, p.gamma),
                p.residual,
            );
        }
        for p in &block.conditional {
            report.metric(
                n,
                format!("cond_cf_residual[l={},bin={}]", p.lambda, p.bin),
                p.residual,
            );
        }

        if exact_zero {
            report.check(
                format!("neg_norm_zero_n{}", block.n),
                cond.neg_norm.unwrap_or(0.0),
                args.tol,
            );
            report.check(
                format!("norm_distance_zero_n{}", block.n),
                cond.norm_distance.unwrap_or(0.0),
                args.tol,
            );
            for (i, a) in cond.ascv_norms.iter().flatten().enumerate() {
                report.check(format!("ascv_zero_r{}_n{}", i + 1, block.n), *a, args.tol);
            }
            report.check(
                format!("variance_unit_n{}", block.n),
                (cond.variance - 1.0).abs(),
                args.tol,
            );
        }
        if label != "central" {
            // the mixture identity is exact in distribution, so the CF
            // residuals are pure Monte-Carlo noise: 4 standard errors
            report.check(
                format!("joint_cf_within_4se_n{}", block.n),
                block.max_joint_excess,
                1.0,
            );
            report.check(
                format!("conditional_cf_within_4se_n{}", block.n),
                block.max_conditional_excess,
                1.0,
            );
        }
    }

    if label == "central" && stable.blocks.len() >= 2 {
        // deterministic norms must fall along the sequence
        let mut max_increase = f64::NEG_INFINITY;
        for w in stable.blocks.windows(2) {
            let a = w[0].conditions.ascv_norms.as_ref().unwrap()[0];
            let b = w[1].conditions.ascv_norms.as_ref().unwrap()[0];
            max_increase = max_increase.max(b - a);
        }
        report.check("ascv_decreasing", max_increase, 0.0);
    }

    Ok(report)
}

// -------------------------------------------------------------------- sqeq

fn sqeq(args: &CommonArgs) -> Result<Report> {
    let instances = args.samples.unwrap_or(200);
    let mut report = Report::new("sqeq", args.seed, instances, args.tol);
    args.record(&mut report);
    let bound = 1e-10f64;
    let mut worst = 0.0f64;
    for i in 0..instances {
        let m = 1 + (i as usize % 2);
        let r = 1 + ((i / 2) as usize % 2);
        let channels = 2 + ((i / 4) as usize % 2);
        let inst = random_sqeq_instance(m, r, channels, 4, args.seed.wrapping_add(i));
        let (lhs, rhs, diff) = sqeq_check(&inst)?;
        let scale = lhs.abs().max(rhs.abs()).max(1.0);
        let resid = diff / scale;
        report.metric(i, "relative_residual", resid);
        worst = worst.max(resid);
    }
    report.check("sqeq_max_residual", worst, bound);
    Ok(report)
}

// --------------------------------------------------------------------- dds

fn dds(args: &CommonArgs) -> Result<Report> {
    let samples = args.samples.unwrap_or(100_000);
    let mut report = Report::new("dds", args.seed, samples, args.tol);
    args.record(&mut report);

    let times = vec![0.1, 0.2, 0.35, 0.5, 0.62, 0.74, 0.9, 1.0];
    let dim = times.len();
    let basis = FilteredBasis::new(times, vec![1; dim])?;
    let h = vec![0.4, -0.3, 0.9, 0.7, -0.6, 0.5, 0.8, -0.2];
    let (t1, t2) = (0.3, 0.8);
    let grid = [0.0, 0.15, 0.3, 0.45, 0.6, 0.75, 0.9, 1.0];
    report.param("t1", t1);
    report.param("t2", t2);

    let constant_phi = ChaosFunctional::constant(dim, 1.0)?;
    let mut coord_phi = ChaosFunctional::constant(dim, 0.0)?;
    coord_phi.add_kernel(symmetrize(&Tensor::basis(dim, &[0])?))?;

    for (vi, (name, phi)) in [("phi_const", &constant_phi), ("phi_coord", &coord_phi)]
        .into_iter()
        .enumerate()
    {
        let r = dds_experiment(
            &basis,
            &h,
            phi,
            t1,
            t2,
            &grid,
            samples,
            args.seed.wrapping_add(vi as u64),
        )?;
        let key = (vi + 1) as u64;
        let mut worst_gap = 0.0f64;
        for p in &r.grid {
            report.metric(key, format!("{name}_second_moment[t={}]", p.t), p.second_moment);
            report.metric(key, format!("{name}_expected[t={}]", p.t), p.expected);
            let gap = (p.second_moment - p.expected).abs();
            let bound = 4.0 * p.second_moment_se + args.tol;
            report.check(format!("{name}_qv_match[t={}]", p.t), gap, bound);
            worst_gap = worst_gap.max(gap);
        }
        report.metric(key, format!("{name}_max_qv_gap"), worst_gap);
        report.metric(key, format!("{name}_max_abs_correlation"), r.max_abs_correlation);
        report.check(
            format!("{name}_increments_uncorrelated"),
            r.max_abs_correlation,
            4.0 / (samples as f64).sqrt(),
        );
        report.metric(key, format!("{name}_ks_time_changed"), r.ks_time_changed);
        report.check(format!("{name}_ks_time_changed"), r.ks_time_changed, 0.02);
    }
    Ok(report)
}

// -------------------------------------------------------- transport-verify

fn transport_verify(args: &CommonArgs) -> Result<Report> {
    let instances = args.samples.unwrap_or(100);
    let mut report = Report::new("transport-verify", args.seed, instances, args.tol);
    args.record(&mut report);
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut worst_int = 0.0f64;
    let mut worst_norm = 0.0f64;
    let mut worst_twine = 0.0f64;
    for i in 0..instances {
        let n = 4 + (i as usize % 5);
        let d = 2 + (i as usize % 2);
        let (_, _, _, map) = random_instance(n, args.seed.wrapping_add(i))?;
        let f = random_dense_kernel(d, n, &mut rng);
        let z = GaussianSample::draw(n, args.seed ^ 0xbeef, i);
        let rep = verify_transport(&map, &f, &[0.2, 0.4, 0.6, 0.8, 1.0], &z)?;
        let nmax = rep
            .norm_residuals
            .iter()
            .map(|&(_, _, v)| v)
            .fold(0.0f64, f64::max);
        let tmax = rep
            .intertwining_residuals
            .iter()
            .map(|&(_, v)| v)
            .fold(0.0f64, f64::max);
        report.metric(i, "integral_residual", rep.integral_residual);
        report.metric(i, "norm_residual", nmax);
        report.metric(i, "intertwining_residual", tmax);
        worst_int = worst_int.max(rep.integral_residual);
        worst_norm = worst_norm.max(nmax);
        worst_twine = worst_twine.max(tmax);
    }
    report.check("integral_identity", worst_int, args.tol);
    report.check("contraction_norm_identity", worst_norm, args.tol);
    report.check("intertwining", worst_twine, args.tol);
    Ok(report)
}

// ------------------------------------------------------------- clark-ocone

fn clark_ocone(args: &CommonArgs) -> Result<Report> {
    let instances = args.samples.unwrap_or(100);
    let mut report = Report::new("clark-ocone", args.seed, instances, args.tol);
    args.record(&mut report);
    let mut worst = 0.0f64;
    if let Some(seq) = load_custom(args)? {
        for i in 0..instances {
            let z = GaussianSample::draw(seq.basis.dim(), args.seed, i);
            let r = clark_ocone_residual(&seq.kernel, &seq.basis, &z)?.abs();
            report.metric(i, "residual", r);
            worst = worst.max(r);
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
        for i in 0..instances {
            let order = 2 + (i as usize % 2);
            let dim = 6;
            let f = random_offdiag_kernel(order, dim, &mut rng);
            let basis = random_basis(dim, &mut rng);
            let z = GaussianSample::draw(dim, args.seed ^ 0xc1a2, i);
            let r = clark_ocone_residual(&f, &basis, &z)?.abs();
            report.metric(i, "residual", r);
            worst = worst.max(r);
        }
    }
    report.check("clark_ocone_max_residual", worst, args.tol);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::Parser;

    #[test]
    fn cli_parses_spec_flags() {
        let cli = Cli::try_parse_from([
            "chaoslab", "stable", "--kind", "mixture", "--n", "8,32,128", "--samples", "1000",
            "--seed", "7", "--tol", "1e-9", "--format", "json",
        ])
        .unwrap();
        match cli.command {
            Cmd::Stable(a) => {
                assert_eq!(a.n, Some(vec![8, 32, 128]));
                assert_eq!(a.seed, 7);
                assert_eq!(a.samples, Some(1000));
            }
            _ => panic!("wrong subcommand"),
        }
    }

    #[test]
    fn unknown_subcommand_rejected() {
        assert!(Cli::try_parse_from(["chaoslab", "frobnicate"]).is_err());
    }
}
