//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured values (visible with `--nocapture`). Tolerances are pinned
//! in the assertions.

use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use chaoslab::chaos::{eval_integral, fourth_moment, square_expand, GaussianSample};
use chaoslab::filtration::{
    generalized_contraction, project_kernel, project_tensor, FilteredBasis, ProjectionMode,
};
use chaoslab::limitlab::{
    check_clt_conditions, check_stable_conditions, cvdiff_experiment, dds_experiment,
    generate_sequence, random_sqeq_instance, sqeq_check, stable_test, SequenceKind, DEFAULT_GRID,
};
use chaoslab::malliavin::{clark_ocone_residual, derivative, skorohod};
use chaoslab::mc;
use chaoslab::tensor::{contract, inner, symmetrize, SymmetricKernel, Tensor};
use chaoslab::transport::{random_instance, verify_transport};
use chaoslab::ChaosFunctional;

fn random_dense(order: usize, dim: usize, rng: &mut ChaCha8Rng) -> SymmetricKernel {
    let mut raw = Tensor::zeros(order, dim).unwrap();
    for _ in 0..(3 * dim * dim) {
        let idx: Vec<usize> = (0..order).map(|_| rng.gen_range(0..dim)).collect();
        raw.add_entry(&idx, rng.gen_range(-1.0..1.0)).unwrap();
    }
    symmetrize(&raw)
}

fn random_offdiag(order: usize, dim: usize, rng: &mut ChaCha8Rng) -> SymmetricKernel {
    let mut f = SymmetricKernel::zeros(order, dim).unwrap();
    for _ in 0..(3 * dim) {
        let mut pool: Vec<usize> = (0..dim).collect();
        for k in 0..order {
            let pick = rng.gen_range(k..dim);
            pool.swap(k, pick);
        }
        let mut tuple = pool[..order].to_vec();
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
    FilteredBasis::new(times, vec![1; dim]).unwrap()
}

#[test]
fn criterion_1_exact_algebra() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(10_001);

    // multiplication formula pointwise, 100 random kernels
    let mut worst_mult = 0.0f64;
    for i in 0..100u64 {
        let order = 1 + (i as usize % 3);
        let dim = 2 + (i as usize % 7);
        let f = random_dense(order, dim, &mut rng);
        let z = GaussianSample::draw(dim, 91, i);
        let direct = eval_integral(&f, &z).unwrap().powi(2);
        let via = square_expand(&f).unwrap().eval(&z).unwrap();
        worst_mult = worst_mult.max((direct - via).abs());
    }
    assert!(worst_mult <= 1e-9, "multiplication formula: {worst_mult}");

    // contraction decomposition under the projection, all r, <= 1e-12
    let mut worst_dec = 0.0f64;
    for i in 0..40u64 {
        let d = 2 + (i as usize % 2);
        let dim = 3 + (i as usize % 4);
        let f = random_dense(d, dim, &mut rng);
        let basis = random_basis(dim, &mut rng);
        let s = rng.gen_range(0.0..1.0);
        let pf = project_kernel(&f, &basis, s, ProjectionMode::KeepEarly).unwrap();
        for r in 1..=d {
            let p = d - r;
            let lhs = project_tensor(
                &contract(&f, &f, p).unwrap(),
                &basis,
                s,
                ProjectionMode::KeepEarly,
            )
            .unwrap();
            let rhs = project_tensor(
                &generalized_contraction(&f, &basis, p, s).unwrap(),
                &basis,
                s,
                ProjectionMode::KeepEarly,
            )
            .unwrap()
            .add(&contract(&pf, &pf, p).unwrap())
            .unwrap();
            worst_dec = worst_dec.max(lhs.sub(&rhs).unwrap().max_abs());
        }
    }
    assert!(worst_dec <= 1e-12, "projection decomposition: {worst_dec}");

    // endpoint cases of the generalized contraction
    let mut worst_op3 = 0.0f64;
    for i in 0..20u64 {
        let d = 2 + (i as usize % 2);
        let dim = 3 + (i as usize % 3);
        let f = random_dense(d, dim, &mut rng);
        let basis = random_basis(dim, &mut rng);
        for p in 1..=d {
            let zero_cut = generalized_contraction(&f, &basis, p, 0.0).unwrap();
            let plain = contract(&f, &f, p).unwrap();
            worst_op3 = worst_op3.max(zero_cut.sub(&plain).unwrap().max_abs());
            assert!(generalized_contraction(&f, &basis, p, 1.0)
                .unwrap()
                .is_zero());
        }
        // full contraction equals the late-part squared norm
        for &s in &[0.2, 0.5, 0.8] {
            let full = generalized_contraction(&f, &basis, d, s).unwrap().get(&[]);
            let late = project_kernel(&f, &basis, s, ProjectionMode::KeepRest)
                .unwrap()
                .norm_sq();
            worst_op3 = worst_op3.max((full - late).abs());
        }
        // order 0 vanishes identically
        assert!(generalized_contraction(&f, &basis, 0, 0.4).unwrap().is_zero());
    }
    assert!(worst_op3 <= 1e-12, "endpoint cases: {worst_op3}");

    // Clark-Ocone reconstruction on vanishing-diagonal kernels
    let mut worst_co = 0.0f64;
    for i in 0..100u64 {
        let order = 2 + (i as usize % 2);
        let f = random_offdiag(order, 6, &mut rng);
        let basis = random_basis(6, &mut rng);
        let z = GaussianSample::draw(6, 17, i);
        worst_co = worst_co.max(clark_ocone_residual(&f, &basis, &z).unwrap().abs());
    }
    assert!(worst_co <= 1e-9, "clark-ocone: {worst_co}");

    // number operator delta(DF) = d F
    let mut worst_num = 0.0f64;
    for i in 0..50u64 {
        let order = 1 + (i as usize % 3);
        let dim = 3 + (i as usize % 4);
        let f = random_dense(order, dim, &mut rng);
        let z = GaussianSample::draw(dim, 23, i);
        let lhs = skorohod(&derivative(&f).unwrap(), &z).unwrap();
        let rhs = order as f64 * eval_integral(&f, &z).unwrap();
        worst_num = worst_num.max((lhs - rhs).abs());
    }
    assert!(worst_num <= 1e-9, "number operator: {worst_num}");

    let secs = start.elapsed().as_secs_f64();
    assert!(secs < 10.0, "runtime {secs:.1}s");
    println!(
        "PASS criterion 1 exact algebra: mult {worst_mult:.2e}, decomposition {worst_dec:.2e}, \
         endpoints {worst_op3:.2e}, clark-ocone {worst_co:.2e}, number-op {worst_num:.2e} \
         ({secs:.1}s)"
    );
}

#[test]
fn criterion_2_fourth_moment_values() {
    let start = Instant::now();
    let e11 = symmetrize(&Tensor::basis(2, &[0, 0]).unwrap());
    let e12 = symmetrize(&Tensor::basis(2, &[0, 1]).unwrap());
    let v60 = fourth_moment(&e11).unwrap();
    let v9 = fourth_moment(&e12).unwrap();
    assert!((v60 - 60.0).abs() <= 1e-12, "{v60}");
    assert!((v9 - 9.0).abs() <= 1e-12, "{v9}");

    let mut worst = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(10_002);
    for i in 0..100 {
        let dim = 2 + (i % 6);
        let f = random_dense(2, dim, &mut rng);
        let general = fourth_moment(&f).unwrap();
        let c1 = contract(&f, &f, 1).unwrap();
        let closed = 3.0 * (2.0 * f.norm_sq()).powi(2) + 48.0 * inner(&c1, &c1).unwrap();
        worst = worst.max((general - closed).abs() / general.abs().max(1.0));
    }
    assert!(worst <= 1e-12, "closed form: {worst}");

    let secs = start.elapsed().as_secs_f64();
    assert!(secs < 5.0, "runtime {secs:.1}s");
    println!(
        "PASS criterion 2 fourth moments: E[(Z^2-1)^4] = {v60}, E[(Z1 Z2)^4] = {v9}, \
         closed-form residual {worst:.2e} ({secs:.1}s)"
    );
}

#[test]
fn criterion_3_square_equality() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for i in 0..200u64 {
        let m = 1 + (i as usize % 2);
        let r = 1 + ((i / 2) as usize % 2);
        let channels = 2 + ((i / 4) as usize % 2);
        let inst = random_sqeq_instance(m, r, channels, 4, 30_000 + i);
        let (lhs, rhs, diff) = sqeq_check(&inst).unwrap();
        worst = worst.max(diff / lhs.abs().max(rhs.abs()).max(1.0));
    }
    let secs = start.elapsed().as_secs_f64();
    assert!(worst <= 1e-10, "square equality residual: {worst}");
    assert!(secs < 30.0, "runtime {secs:.1}s");
    println!("PASS criterion 3 square equality: max residual {worst:.2e} over 200 instances ({secs:.1}s)");
}

#[test]
fn criterion_4_transport_suite() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(10_004);
    let mut worst_int = 0.0f64;
    let mut worst_norm = 0.0f64;
    let mut worst_twine = 0.0f64;
    for i in 0..100u64 {
        let n = 4 + (i as usize % 5);
        let d = 2 + (i as usize % 2);
        let (_, _, _, map) = random_instance(n, 40_000 + i).unwrap();
        let f = random_dense(d, n, &mut rng);
        let z = GaussianSample::draw(n, 47, i);
        let report = verify_transport(&map, &f, &[0.2, 0.4, 0.6, 0.8, 1.0], &z).unwrap();
        worst_int = worst_int.max(report.integral_residual);
        worst_norm = worst_norm.max(
            report
                .norm_residuals
                .iter()
                .map(|&(_, _, v)| v)
                .fold(0.0, f64::max),
        );
        worst_twine = worst_twine.max(
            report
                .intertwining_residuals
                .iter()
                .map(|&(_, v)| v)
                .fold(0.0, f64::max),
        );
    }
    let secs = start.elapsed().as_secs_f64();
    assert!(worst_int <= 1e-9, "integral identity: {worst_int}");
    assert!(worst_norm <= 1e-9, "norm identity: {worst_norm}");
    assert!(worst_twine <= 1e-9, "intertwining: {worst_twine}");
    assert!(secs < 30.0, "runtime {secs:.1}s");
    println!(
        "PASS criterion 4 transport: integral {worst_int:.2e}, norm {worst_norm:.2e}, \
         intertwining {worst_twine:.2e} over 100 instances ({secs:.1}s)"
    );
}

#[test]
fn criterion_5_mixture_experiment() {
    let start = Instant::now();
    let ns = [8usize, 32, 128];
    for &n in &ns {
        let seq = generate_sequence(SequenceKind::Mixture, n).unwrap();
        let report =
            check_stable_conditions(&seq.kernel, &seq.basis, seq.cutoff, seq.law.functional())
                .unwrap();
        assert_eq!(report.neg_norm, Some(0.0), "NEG at n={n}");
        assert_eq!(report.ascv_norms, Some(vec![0.0]), "asCV at n={n}");
        assert!(
            report.norm_distance.unwrap() <= 1e-12,
            "NORM distance at n={n}: {:?}",
            report.norm_distance
        );
    }
    let stable = stable_test(
        SequenceKind::Mixture,
        &ns,
        100_000,
        &DEFAULT_GRID,
        &DEFAULT_GRID,
        42,
    )
    .unwrap();
    let mut worst_joint = 0.0f64;
    let mut worst_cond = 0.0f64;
    for block in &stable.blocks {
        assert!(
            block.max_joint_excess <= 1.0,
            "joint CF beyond 4 SE at n={}: {}",
            block.n,
            block.max_joint_excess
        );
        assert!(
            block.max_conditional_excess <= 1.0,
            "conditional CF beyond 4 SE at n={}: {}",
            block.n,
            block.max_conditional_excess
        );
        worst_joint = worst_joint.max(block.max_joint_excess);
        worst_cond = worst_cond.max(block.max_conditional_excess);
    }
    let secs = start.elapsed().as_secs_f64();
    assert!(secs < 180.0, "runtime {secs:.1}s");
    println!(
        "PASS criterion 5 mixture: NEG = asCV = 0 exactly, NORM <= 1e-12; CF residuals within \
         4 SE (worst joint {worst_joint:.2}x, conditional {worst_cond:.2}x of budget) ({secs:.1}s)"
    );
}

#[test]
fn criterion_6_central_experiment() {
    let start = Instant::now();
    let ns = [16usize, 64, 256];
    let mut band = Vec::new();
    let mut fourths = Vec::new();
    for &n in &ns {
        let seq = generate_sequence(SequenceKind::Central, n).unwrap();
        let report = check_clt_conditions(&seq.kernel).unwrap();
        assert!(
            (report.variance - 1.0).abs() <= 1e-12,
            "variance at n={n}: {}",
            report.variance
        );
        let c1 = report.contraction_norms[0];
        band.push((n as f64, c1 * c1));
        fourths.push(report.fourth_moment);
    }
    for w in band.windows(2) {
        assert!(w[1].1 < w[0].1, "contraction norms not decreasing");
    }
    for w in fourths.windows(2) {
        assert!(w[1] < w[0], "fourth moments not decreasing");
    }
    let slope = mc::log_log_slope(
        &band.iter().map(|&(n, _)| n).collect::<Vec<_>>(),
        &band.iter().map(|&(_, v)| v).collect::<Vec<_>>(),
    );
    assert!(slope <= -0.9, "decay exponent {slope}");
    let gap = (fourths.last().unwrap() - 3.0).abs();
    assert!(gap <= 0.1, "fourth moment at n=256: {}", fourths.last().unwrap());

    // KS of 1e5 samples at n = 256 against N(0,1)
    let seq = generate_sequence(SequenceKind::Central, 256).unwrap();
    let values: Vec<f64> = mc::map_blocks(100_000, |range| {
        let mut out = Vec::new();
        for i in range {
            let z = GaussianSample::draw(seq.basis.dim(), 42, (256u64 << 40) | i);
            out.push(eval_integral(&seq.kernel, &z).unwrap());
        }
        out
    })
    .concat();
    let ks = mc::ks_statistic(&values, mc::normal_cdf);
    assert!(ks <= 0.02, "KS at n=256: {ks}");

    let secs = start.elapsed().as_secs_f64();
    assert!(secs < 180.0, "runtime {secs:.1}s");
    println!(
        "PASS criterion 6 central: variance exact, decay exponent {slope:.3}, \
         |EF^4 - 3| = {gap:.3} at n=256, KS = {ks:.4} ({secs:.1}s)"
    );
}

#[test]
fn criterion_7_cvdiff() {
    let start = Instant::now();
    let r = cvdiff_experiment(128, 100_000, 42).unwrap();
    assert!(
        r.mean_abs_deviation <= 4.0 * r.se_abs_deviation + 1e-9,
        "derivative-norm deviation: {} (se {})",
        r.mean_abs_deviation,
        r.se_abs_deviation
    );
    assert!(
        r.mean_cutoff_part <= 4.0 * r.se_cutoff_part + 1e-9,
        "cutoff part: {} (se {})",
        r.mean_cutoff_part,
        r.se_cutoff_part
    );
    let secs = start.elapsed().as_secs_f64();
    assert!(secs < 120.0, "runtime {secs:.1}s");
    println!(
        "PASS criterion 7 cvdiff: mean |proj-norm^2 - Y| = {:.2e}, cutoff part {:.2e} ({secs:.1}s)",
        r.mean_abs_deviation, r.mean_cutoff_part
    );
}

#[test]
fn criterion_8_dds_martingale() {
    let start = Instant::now();
    let times = vec![0.1, 0.2, 0.35, 0.5, 0.62, 0.74, 0.9, 1.0];
    let dim = times.len();
    let basis = FilteredBasis::new(times, vec![1; dim]).unwrap();
    let h = vec![0.4, -0.3, 0.9, 0.7, -0.6, 0.5, 0.8, -0.2];
    let grid = [0.0, 0.15, 0.3, 0.45, 0.6, 0.75, 0.9, 1.0];
    let mut phi = ChaosFunctional::constant(dim, 0.0).unwrap();
    phi.add_kernel(symmetrize(&Tensor::basis(dim, &[0]).unwrap()))
        .unwrap();

    let mut worst_gap = 0.0f64;
    let mut worst_corr = 0.0f64;
    for (vi, phi) in [ChaosFunctional::constant(dim, 1.0).unwrap(), phi]
        .iter()
        .enumerate()
    {
        let r = dds_experiment(&basis, &h, phi, 0.3, 0.8, &grid, 100_000, 42 + vi as u64).unwrap();
        for p in &r.grid {
            let gap = (p.second_moment - p.expected).abs();
            assert!(
                gap <= 4.0 * p.second_moment_se + 1e-12,
                "variant {vi} t={}: {} vs {}",
                p.t,
                p.second_moment,
                p.expected
            );
            if p.second_moment_se > 0.0 {
                worst_gap = worst_gap.max(gap / (4.0 * p.second_moment_se));
            }
        }
        assert!(
            r.max_abs_correlation <= 4.0 / (r.samples as f64).sqrt(),
            "variant {vi} correlation: {}",
            r.max_abs_correlation
        );
        worst_corr = worst_corr.max(r.max_abs_correlation);
    }
    let secs = start.elapsed().as_secs_f64();
    assert!(secs < 120.0, "runtime {secs:.1}s");
    println!(
        "PASS criterion 8 dds: quadratic-variation gaps within 4 SE (worst {worst_gap:.2}x), \
         post-stopping correlation {worst_corr:.2e} ({secs:.1}s)"
    );
}

#[test]
fn criterion_9_determinism() {
    let bin = env!("CARGO_BIN_EXE_chaoslab");
    let tmp = tempfile::tempdir().unwrap();
    let run = |threads: &str, out: &std::path::Path, args: &[&str]| {
        let status = Command::new(bin)
            .args(args)
            .arg("--out")
            .arg(out)
            .env("CHAOSLAB_THREADS", threads)
            .stderr(std::process::Stdio::null())
            .status()
            .unwrap();
        assert!(status.success(), "run failed: {args:?}");
    };

    let stable_args = [
        "stable", "--kind", "mixture", "--n", "8,32,128", "--samples", "100000", "--seed", "42",
    ];
    let a = tmp.path().join("stable_t1.json");
    let b = tmp.path().join("stable_t6.json");
    let c = tmp.path().join("stable_t6_repeat.json");
    run("1", &a, &stable_args);
    run("6", &b, &stable_args);
    run("6", &c, &stable_args);
    let bytes_a = std::fs::read(&a).unwrap();
    assert_eq!(bytes_a, std::fs::read(&b).unwrap(), "lane count changed the report");
    assert_eq!(bytes_a, std::fs::read(&c).unwrap(), "repeat run changed the report");

    let dds_args = ["dds", "--samples", "50000", "--seed", "42"];
    let d1 = tmp.path().join("dds_t2.json");
    let d2 = tmp.path().join("dds_t8.json");
    run("2", &d1, &dds_args);
    run("8", &d2, &dds_args);
    assert_eq!(
        std::fs::read(&d1).unwrap(),
        std::fs::read(&d2).unwrap(),
        "lane count changed the dds report"
    );
    println!("PASS criterion 9 determinism: byte-identical reports across lane counts and repeats");
}
