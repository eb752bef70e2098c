//! Acceptance suite: ten numbered end-to-end checks covering the cipher,
//! the solver, both pipelines, the leakage bound, concentration, and CLI
//! determinism. Each test prints exactly one `criterion N: PASS/FAIL`
//! line (visible with `--nocapture`) and fails the build on FAIL.
//!
//! Thresholds were calibrated by seeded pilot runs and are generous:
//! every statistical check passes with at least an order of magnitude
//! of margin at the frozen seeds.

use std::time::{Duration, Instant};

use ptc_core::cipher::{CipherKind, Permutation, PermutationCipher, SecretKey};
use ptc_core::concentration::{DeviationExperiment, Verdict};
use ptc_core::leakage::{
    exact_leakage_given_type, leakage_bound, modulo_sum_exact_leakage,
    total_leakage_decomposition_check, Budgets,
};
use ptc_core::model::{DistortionMeasure, Sequence, SourceModel};
use ptc_core::rd::{
    build_codebook, measure_performance, rd_point_at_distortion, rd_point_at_rate, NearestCodeword,
};
use ptc_core::rng;
use ptc_core::typeclass::{type_distribution_entropy, TypeComposition};

/// Master seed for every randomized acceptance check.
const SEED: u64 = 2024;

/// Prints the one-line verdict and enforces it.
fn report(criterion: u32, ok: bool, detail: &str) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    println!("criterion {criterion}: {verdict} - {detail}");
    assert!(ok, "criterion {criterion} failed: {detail}");
}

fn binary_entropy_bits(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
}

fn mean_and_se(samples: &[f64]) -> (f64, f64) {
    let count = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / count;
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (count - 1.0);
    (mean, (var / count).sqrt())
}

/// The (block length, alphabet size, cipher family) grid shared by the
/// round-trip and preservation checks.
fn cipher_grid() -> Vec<(usize, usize, CipherKind)> {
    let mut grid = Vec::new();
    for n in [8usize, 16, 32] {
        for k in [2usize, 4] {
            for kind in [CipherKind::TypeI, CipherKind::TypeII] {
                grid.push((n, k, kind));
            }
        }
    }
    grid
}

#[test]
fn criterion_01_cipher_round_trip() {
    let start = Instant::now();
    let trials_per_cell = 834u64; // 12 cells x 834 > 10^4 (block, key) pairs
    let key_space = 64u64;
    let mut failures = 0u64;
    let mut total = 0u64;
    for (n, k, kind) in cipher_grid() {
        let uniform = SourceModel::new(vec![1.0 / k as f64; k]).unwrap();
        let mut rng = rng::substream(SEED, "round-trip", (n * k) as u64 + kind as u64);
        let cipher = PermutationCipher::build(kind, n, key_space, &mut rng).unwrap();
        for _ in 0..trials_per_cell {
            let x = uniform.sample_iid(n, &mut rng).unwrap();
            let key = SecretKey::sample_uniform(key_space, &mut rng).unwrap();
            let y = cipher.encrypt(key, &x).unwrap();
            let back = cipher.decrypt(key, &y).unwrap();
            if back != x {
                failures += 1;
            }
            total += 1;
        }
    }
    let elapsed = start.elapsed();
    report(
        1,
        failures == 0 && total >= 10_000 && elapsed < Duration::from_secs(5),
        &format!(
            "decrypt(encrypt(x)) = x on {total} random (block, key) pairs across \
             12 cipher cells, {failures} failures, {elapsed:.2?}"
        ),
    );
}

#[test]
fn criterion_02_type_and_law_preservation() {
    let start = Instant::now();

    // (a) Encryption never changes a block's symbol counts.
    let trials_per_cell = 834u64;
    let key_space = 64u64;
    let mut type_changes = 0u64;
    for (n, k, kind) in cipher_grid() {
        let uniform = SourceModel::new(vec![1.0 / k as f64; k]).unwrap();
        let mut rng = rng::substream(SEED, "type-check", (n * k) as u64 + kind as u64);
        let cipher = PermutationCipher::build(kind, n, key_space, &mut rng).unwrap();
        for _ in 0..trials_per_cell {
            let x = uniform.sample_iid(n, &mut rng).unwrap();
            let key = SecretKey::sample_uniform(key_space, &mut rng).unwrap();
            let y = cipher.encrypt(key, &x).unwrap();
            let tx = TypeComposition::of_sequence(&x, k).unwrap();
            let ty = TypeComposition::of_sequence(&y, k).unwrap();
            if tx != ty {
                type_changes += 1;
            }
        }
    }

    // (b) A fixed permutation leaves the exact block law untouched:
    // full enumeration at n = 4 over a biased binary source.
    let n = 4usize;
    let source = SourceModel::new(vec![0.7, 0.3]).unwrap();
    let mut perm_rng = rng::for_role(SEED, "law-permutations");
    let mut max_deviation = 0.0f64;
    for _ in 0..5 {
        let sigma = Permutation::sample_uniform(n, &mut perm_rng).unwrap();
        let mut output_law = vec![0.0f64; 1 << n];
        let mut input_law = vec![0.0f64; 1 << n];
        for code in 0..(1u32 << n) {
            let symbols: Vec<u8> = (0..n).map(|i| ((code >> i) & 1) as u8).collect();
            let x = Sequence::new(symbols).unwrap();
            let p = source.sequence_probability(&x).unwrap();
            let y = sigma.apply(&x).unwrap();
            let y_code: u32 = y
                .symbols()
                .iter()
                .enumerate()
                .map(|(i, &s)| (s as u32) << i)
                .sum();
            input_law[code as usize] += p;
            output_law[y_code as usize] += p;
        }
        for (a, b) in input_law.iter().zip(&output_law) {
            max_deviation = max_deviation.max((a - b).abs());
        }
    }

    let elapsed = start.elapsed();
    report(
        2,
        type_changes == 0 && max_deviation <= 1e-14 && elapsed < Duration::from_secs(5),
        &format!(
            "symbol counts preserved on all trials ({type_changes} changes); exact \
             output law matches input law for 5 fixed permutations at n = 4 \
             (max deviation {max_deviation:.2e}), {elapsed:.2?}"
        ),
    );
}

#[test]
fn criterion_03_conventional_system_perfect_secrecy() {
    let start = Instant::now();
    let budgets = Budgets::default();
    let n = 6usize;
    let m = 8u64;
    let source = SourceModel::new(vec![0.5, 0.5]).unwrap();
    let distortion = DistortionMeasure::hamming(2).unwrap();
    let point = rd_point_at_rate(&source, &distortion, (m as f64).ln() / n as f64).unwrap();
    let mut cb_rng = rng::for_role(SEED, "secrecy-codebook");
    let codebook = build_codebook(&point, n, m, &mut cb_rng).unwrap();
    let g = NearestCodeword::new(&codebook, &distortion).unwrap();
    // Key space equals the index count: the pad is a one-time pad.
    let leakage = modulo_sum_exact_leakage(&g, &source, n, m, &budgets)
        .unwrap()
        .nats();
    let elapsed = start.elapsed();
    report(
        3,
        leakage <= 1e-12 && elapsed < Duration::from_secs(10),
        &format!(
            "exact leakage of the padded index over all 64 blocks x 8 keys is \
             {leakage:.3e} nats (<= 1e-12), {elapsed:.2?}"
        ),
    );
}

#[test]
fn criterion_04_solver_matches_the_closed_form_curve() {
    let start = Instant::now();
    let hamming = DistortionMeasure::hamming(2).unwrap();
    let mut max_error_bits = 0.0f64;
    let mut cells = 0u32;
    for p in [0.1f64, 0.2, 0.3, 0.4, 0.5] {
        let source = SourceModel::new(vec![1.0 - p, p]).unwrap();
        for d in [0.02f64, 0.05, 0.1, p.min(0.2) - 0.01] {
            let point = rd_point_at_distortion(&source, &hamming, d).unwrap();
            let oracle_bits = if d >= p {
                0.0
            } else {
                binary_entropy_bits(p) - binary_entropy_bits(d)
            };
            let error = (point.rate.bits() - oracle_bits).abs();
            max_error_bits = max_error_bits.max(error);
            cells += 1;
        }
    }
    let elapsed = start.elapsed();
    report(
        4,
        max_error_bits <= 1e-6 && elapsed < Duration::from_secs(30),
        &format!(
            "iterative solver vs closed-form binary-Hamming rate over {cells} \
             (p, D) cells: max |error| = {max_error_bits:.2e} bits (<= 1e-6), \
             {elapsed:.2?}"
        ),
    );
}

#[test]
fn criterion_05_distortion_improves_with_block_length() {
    let start = Instant::now();
    let source = SourceModel::new(vec![0.5, 0.5]).unwrap();
    let distortion = DistortionMeasure::hamming(2).unwrap();
    // Half a bit per symbol; the curve pays distortion ~0.110 there.
    let rate_nats = 0.5 * core::f64::consts::LN_2;
    let point = rd_point_at_rate(&source, &distortion, rate_nats).unwrap();

    let mut results = Vec::new();
    for n in [8usize, 12, 16, 20] {
        let m = 1u64 << (n / 2);
        let mut cb_rng = rng::substream(SEED, "acceptance-codebook", n as u64);
        let codebook = build_codebook(&point, n, m, &mut cb_rng).unwrap();
        let mut trial_rng = rng::substream(SEED, "acceptance-trials", n as u64);
        let perf =
            measure_performance(&codebook, &source, &distortion, 500, &mut trial_rng).unwrap();
        results.push((n, perf.mean_distortion, perf.std_error));
    }

    let mut trend_ok = true;
    for pair in results.windows(2) {
        let (_, prev_mean, prev_se) = pair[0];
        let (_, mean, se) = pair[1];
        let joint = 2.0 * (prev_se * prev_se + se * se).sqrt();
        if mean > prev_mean + joint {
            trend_ok = false;
        }
    }
    let (_, final_mean, _) = *results.last().unwrap();
    let threshold = 0.26; // calibrated: seeded runs give ~0.152 at n = 20
    let elapsed = start.elapsed();
    let summary: Vec<String> = results
        .iter()
        .map(|(n, mean, _)| format!("n={n}:{mean:.3}"))
        .collect();
    report(
        5,
        trend_ok && final_mean <= threshold && elapsed < Duration::from_secs(120),
        &format!(
            "mean distortion at half a bit per symbol is non-increasing in block \
             length [{}] with curve value {:.3}; final mean {final_mean:.3} <= \
             {threshold}, {elapsed:.2?}",
            summary.join(", "),
            point.distortion
        ),
    );
}

#[test]
fn criterion_06_leakage_bound_holds_for_both_cipher_families() {
    let start = Instant::now();
    let budgets = Budgets::default();
    let source = SourceModel::new(vec![0.5, 0.5]).unwrap();
    let distortion = DistortionMeasure::hamming(2).unwrap();
    let composition = TypeComposition::new(vec![5, 5]).unwrap();
    let class_size = composition.view(budgets.enumeration).unwrap().size();
    assert_eq!(class_size, 252);

    let m = 4u64;
    let key_space = 8192u64;
    let big_delta = 64u64;
    let delta = 0.5f64;
    let rate_nats = 0.5 * core::f64::consts::LN_2;
    let point = rd_point_at_rate(&source, &distortion, rate_nats).unwrap();
    let mut cb_rng = rng::for_role(SEED, "bound-codebook");
    let codebook = build_codebook(&point, 10, m, &mut cb_rng).unwrap();
    let g = NearestCodeword::new(&codebook, &distortion).unwrap();

    let mut ok = true;
    let mut details = Vec::new();
    for (kind, frozen_total) in [
        (CipherKind::TypeI, 0.863964),
        (CipherKind::TypeII, 1.018383),
    ] {
        let bound = leakage_bound(
            composition.ln_class_size(),
            m,
            key_space,
            big_delta,
            delta,
            kind,
        )
        .unwrap();
        // The analytic ceiling evaluates to the frozen reference value.
        if (bound.total - frozen_total).abs() > 1e-3 || !bound.regime_ok {
            ok = false;
        }
        let mut leakages = Vec::new();
        for i in 0..100u64 {
            let mut rng = rng::substream(SEED, "bound-cipher", i);
            let cipher = PermutationCipher::build(kind, 10, key_space, &mut rng).unwrap();
            let exact = exact_leakage_given_type(&g, &cipher, &composition, &budgets).unwrap();
            leakages.push(exact.leakage.nats());
        }
        let (mean, se) = mean_and_se(&leakages);
        if mean + 3.0 * se > bound.total {
            ok = false;
        }
        details.push(format!(
            "{kind:?}: mean+3se {:.6} <= bound {:.6}",
            mean + 3.0 * se,
            bound.total
        ));
    }
    let elapsed = start.elapsed();
    report(
        6,
        ok && elapsed < Duration::from_secs(300),
        &format!(
            "exact per-class leakage over 100 seeded ciphers stays under the \
             three-term ceiling ({}), {elapsed:.2?}",
            details.join("; ")
        ),
    );
}

#[test]
fn criterion_07_leakage_splits_into_type_plus_conditional() {
    let start = Instant::now();
    let budgets = Budgets::default();
    let n = 6usize;
    let m = 4u64;
    let key_space = 8u64;
    let source = SourceModel::new(vec![0.7, 0.3]).unwrap();
    let distortion = DistortionMeasure::hamming(2).unwrap();
    let point = rd_point_at_rate(&source, &distortion, (m as f64).ln() / n as f64).unwrap();
    let mut cb_rng = rng::for_role(SEED, "split-codebook");
    let codebook = build_codebook(&point, n, m, &mut cb_rng).unwrap();
    let g = NearestCodeword::new(&codebook, &distortion).unwrap();
    let type_entropy = type_distribution_entropy(&source, n as u64).unwrap().nats();

    let mut ok = true;
    let mut max_gap = 0.0f64;
    let mut min_slack = f64::INFINITY;
    for (offset, kind) in [(0u64, CipherKind::TypeI), (10u64, CipherKind::TypeII)] {
        for i in 0..10u64 {
            let mut rng = rng::substream(SEED, "split-cipher", offset + i);
            let cipher = PermutationCipher::build(kind, n, key_space, &mut rng).unwrap();
            let check = total_leakage_decomposition_check(&g, &cipher, &source, &budgets).unwrap();
            max_gap = max_gap.max(check.gap.abs());
            // Total leakage never exceeds the type entropy plus the
            // conditional leakage; record the slack of that ceiling.
            let slack = type_entropy + check.conditional_part.nats() - check.total.nats();
            min_slack = min_slack.min(slack);
            if check.gap.abs() > 1e-10 || slack < -1e-9 {
                ok = false;
            }
        }
    }
    let elapsed = start.elapsed();
    report(
        7,
        ok && elapsed < Duration::from_secs(60),
        &format!(
            "on 20 seeded ciphers the total leakage equals type part plus \
             conditional part (max gap {max_gap:.2e}) and stays below type \
             entropy + conditional (min slack {min_slack:.4} nats), {elapsed:.2?}"
        ),
    );
}

#[test]
fn criterion_08_concentration_tails_stay_under_their_bounds() {
    let start = Instant::now();
    let budgets = Budgets::default();
    let composition = TypeComposition::new(vec![5, 5]).unwrap();
    let redraws = 2000u64;

    // (label, delta, big_delta, key_space, kind, expect_zero_deviations,
    //  frozen bound)
    let cells: [(&str, f64, u64, u64, CipherKind, bool, f64); 3] = [
        (
            "strict mutual",
            0.5,
            16,
            1024,
            CipherKind::TypeI,
            true,
            0.081524,
        ),
        (
            "loose mutual",
            0.2,
            2,
            256,
            CipherKind::TypeI,
            false,
            0.624697,
        ),
        ("pairwise", 0.5, 16, 1024, CipherKind::TypeII, false, 0.0625),
    ];

    let mut ok = true;
    let mut details = Vec::new();
    for (label, delta, big_delta, key_space, kind, expect_zero, frozen_bound) in cells {
        let experiment = DeviationExperiment::with_prefix_bin(
            composition.clone(),
            big_delta,
            0,
            key_space,
            delta,
            kind,
            budgets.enumeration,
        )
        .unwrap();
        let mut rng = rng::for_role(SEED, "concentration");
        let estimate = experiment
            .estimate_tail(redraws, &budgets, &mut rng)
            .unwrap();
        if (estimate.bound - frozen_bound).abs() > 1e-4 {
            ok = false;
        }
        if estimate.bound >= 1.0 {
            ok = false; // all three cells must exercise a nontrivial bound
        }
        if expect_zero && estimate.deviations != 0 {
            ok = false;
        }
        if estimate.empirical + 2.0 * estimate.std_error > estimate.bound {
            ok = false;
        }
        if estimate.verdict != Verdict::Holds {
            ok = false;
        }
        details.push(format!(
            "{label}: {}/{} deviations, empirical {:.4} <= bound {:.4}",
            estimate.deviations, estimate.redraws, estimate.empirical, estimate.bound
        ));
    }
    let elapsed = start.elapsed();
    report(
        8,
        ok && elapsed < Duration::from_secs(300),
        &format!(
            "redrawn-cipher deviation frequencies stay under the matching \
             analytic tails ({}), {elapsed:.2?}",
            details.join("; ")
        ),
    );
}

#[test]
fn criterion_09_leakage_decays_as_the_key_space_grows() {
    let start = Instant::now();
    let budgets = Budgets::default();
    let source = SourceModel::new(vec![0.5, 0.5]).unwrap();
    let distortion = DistortionMeasure::hamming(2).unwrap();
    let composition = TypeComposition::new(vec![5, 5]).unwrap();
    let rate_nats = 0.5 * core::f64::consts::LN_2;
    let point = rd_point_at_rate(&source, &distortion, rate_nats).unwrap();
    let mut cb_rng = rng::for_role(SEED, "bound-codebook");
    let codebook = build_codebook(&point, 10, 4, &mut cb_rng).unwrap();
    let g = NearestCodeword::new(&codebook, &distortion).unwrap();

    let mut results = Vec::new();
    for key_space in [16u64, 64, 256, 1024] {
        let mut leakages = Vec::new();
        for i in 0..30u64 {
            let mut rng = rng::substream(SEED, "decay-cipher", i);
            let cipher =
                PermutationCipher::build(CipherKind::TypeI, 10, key_space, &mut rng).unwrap();
            let exact = exact_leakage_given_type(&g, &cipher, &composition, &budgets).unwrap();
            leakages.push(exact.leakage.nats());
        }
        let (mean, se) = mean_and_se(&leakages);
        results.push((key_space, mean, se));
    }

    let mut ok = true;
    for pair in results.windows(2) {
        let (_, prev_mean, prev_se) = pair[0];
        let (_, mean, se) = pair[1];
        let joint = 2.0 * (prev_se * prev_se + se * se).sqrt();
        // Non-increasing within noise, and the point estimates themselves
        // must strictly decrease (the seeded margins are enormous).
        if mean > prev_mean + joint || mean >= prev_mean {
            ok = false;
        }
    }
    let elapsed = start.elapsed();
    let summary: Vec<String> = results
        .iter()
        .map(|(ks, mean, _)| format!("N={ks}:{mean:.5}"))
        .collect();
    report(
        9,
        ok && elapsed < Duration::from_secs(300),
        &format!(
            "ensemble-mean conditional leakage falls monotonically along the \
             key-space grid [{}] nats, {elapsed:.2?}",
            summary.join(", ")
        ),
    );
}

#[test]
fn criterion_10_every_command_is_byte_deterministic() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();

    let config_for = |key_space: u64| {
        format!(
            r#"{{
                "version": 1,
                "seed": 42,
                "source": {{"pmf": [0.7, 0.3]}},
                "block_len": 6,
                "distortion": {{"kind": "hamming"}},
                "codebook_size": 4,
                "key_space": {key_space},
                "cipher": "type-i",
                "trials": 50,
                "leakage": {{"big_delta": 4, "delta": 0.5}},
                "concentration": {{
                    "composition": [3, 3],
                    "big_delta": 4,
                    "delta": 0.5,
                    "redraws": 200
                }},
                "rd_sweep": {{"slopes": [0.5, 1.0, 2.0]}}
            }}"#
        )
    };
    let wide = dir.path().join("wide.json");
    std::fs::write(&wide, config_for(8)).unwrap();
    let wide = wide.to_str().unwrap();
    let matched = dir.path().join("matched.json");
    std::fs::write(&matched, config_for(4)).unwrap();
    let matched = matched.to_str().unwrap();

    let commands: Vec<Vec<&str>> = vec![
        vec!["--config", wide, "--format", "csv", "rd-sweep"],
        vec!["--config", wide, "rd-sweep"],
        vec!["--config", wide, "pipeline", "--system", "reversed"],
        vec!["--config", matched, "pipeline", "--system", "conventional"],
        vec!["--config", wide, "leakage"],
        vec!["--config", wide, "--format", "csv", "concentration"],
        vec!["--config", matched, "compare"],
        vec![
            "--config", wide, "encrypt", "--block", "010011", "--key", "3",
        ],
        vec!["--config", wide, "compress", "--block", "010011"],
    ];

    let mut ok = true;
    for args in &commands {
        let first = std::process::Command::new(env!("CARGO_BIN_EXE_ptc"))
            .args(args)
            .output()
            .unwrap();
        let second = std::process::Command::new(env!("CARGO_BIN_EXE_ptc"))
            .args(args)
            .output()
            .unwrap();
        if !first.status.success()
            || !second.status.success()
            || first.stdout.is_empty()
            || first.stdout != second.stdout
        {
            ok = false;
        }
    }
    let elapsed = start.elapsed();
    report(
        10,
        ok && elapsed < Duration::from_secs(60),
        &format!(
            "{} command invocations re-run with identical config and seed \
             produce byte-identical reports, {elapsed:.2?}",
            commands.len()
        ),
    );
}
