//! Acceptance gate: one test per criterion, each printing a single
//! pass/fail line (visible with --nocapture, or on failure).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use evenpad::analysis::{
    information_quantity, run_erosion, run_shift, ErosionConfig, KernelTag, ShiftConfig,
};
use evenpad::cli::{median, quadrant_net};
use evenpad::conv::{conv2d_backward, conv2d_forward, naive_oracle_conv, ConvLayer};
use evenpad::data::{gen_quadrant_blobs_with, SplitTag};
use evenpad::gradcheck::{check_conv, check_network};
use evenpad::nn::{
    backward, build, cross_entropy, forward, train_and_eval, LayerSpec, LrSchedule, NetworkSpec,
    TrainConfig,
};
use evenpad::padding::{
    assign_directions, offsets, pad_amounts, Direction, OffsetTag, PaddingPolicy,
};
use evenpad::tensor::{Shape, Tensor};

fn verdict(n: usize, name: &str, pass: bool) {
    println!(
        "ACCEPTANCE {n} {name}: {}",
        if pass { "pass" } else { "FAIL" }
    );
}

#[test]
fn acceptance_1_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    let mut worst = 0.0f64;
    let mut cases = 0usize;
    for k in 1..=5usize {
        let policies: Vec<PaddingPolicy> = if k % 2 == 1 {
            vec![PaddingPolicy::SymmetricOdd]
        } else {
            let mut v: Vec<PaddingPolicy> = Direction::ALL
                .iter()
                .map(|&d| PaddingPolicy::Asymmetric(d))
                .collect();
            v.push(PaddingPolicy::GroupedSymmetric);
            v
        };
        for policy in policies {
            for stride in [1usize, 2] {
                for _ in 0..50 {
                    let grouped = matches!(policy, PaddingPolicy::GroupedSymmetric);
                    let n = rng.gen_range(1..=2);
                    let c_in = if grouped {
                        4 * rng.gen_range(1..=2)
                    } else {
                        rng.gen_range(1..=8)
                    };
                    let c_out = rng.gen_range(1..=8);
                    let h = rng.gen_range(k.max(2)..=9);
                    let w = rng.gen_range(k.max(2)..=9);
                    let x = Tensor::random_normal_with(
                        &mut rng,
                        Shape::new(n, c_in, h, w),
                        0.0,
                        1.0,
                    )
                    .unwrap();
                    let wt = Tensor::random_normal_with(
                        &mut rng,
                        Shape::new(c_out, c_in, k, k),
                        0.0,
                        1.0,
                    )
                    .unwrap();
                    let layer = ConvLayer::new(wt, None, stride, policy).unwrap();
                    let fused = conv2d_forward(&x, &layer).unwrap();
                    let oracle = naive_oracle_conv(
                        &x,
                        &layer.weights,
                        &layer.channel_pads().unwrap(),
                        stride,
                    )
                    .unwrap();
                    let diff = fused
                        .data()
                        .iter()
                        .zip(oracle.data())
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0f64, f64::max);
                    worst = worst.max(diff);
                    cases += 1;
                }
            }
        }
    }
    let pass = worst <= 1e-12 && cases >= 50 * 22;
    verdict(1, "oracle equivalence", pass);
    assert!(pass, "{cases} cases, worst diff {worst:.3e}");
}

#[test]
fn acceptance_2_gradient_checks() {
    // single conv layers across kernel sizes and policies
    let mut conv_worst = 0.0f64;
    for (k, policy) in [
        (1, PaddingPolicy::SymmetricOdd),
        (2, PaddingPolicy::Asymmetric(Direction::OriginLT)),
        (2, PaddingPolicy::GroupedSymmetric),
        (3, PaddingPolicy::SymmetricOdd),
        (4, PaddingPolicy::GroupedSymmetric),
        (5, PaddingPolicy::SymmetricOdd),
    ] {
        for stride in [1usize, 2] {
            let w = Tensor::random_normal(Shape::new(3, 4, k, k), 0.0, 0.5, 40 + k as u64)
                .unwrap();
            let layer = ConvLayer::new(
                w,
                Some(vec![0.1, -0.2, 0.05]),
                stride,
                policy,
            )
            .unwrap();
            let x = Tensor::random_normal(Shape::new(2, 4, 7, 6), 0.0, 1.0, 50 + k as u64)
                .unwrap();
            let err = check_conv(&layer, &x, 1e-6, 6).unwrap();
            conv_worst = conv_worst.max(err);
        }
    }

    // three parameterized layers end to end: conv, grouped conv, dense,
    // with BatchNorm in between
    let spec = NetworkSpec {
        layers: vec![
            LayerSpec::Conv { k: 3, c_out: 4, stride: 1, policy: PaddingPolicy::SymmetricOdd },
            LayerSpec::BatchNorm,
            LayerSpec::ReLU,
            LayerSpec::Conv { k: 2, c_out: 4, stride: 1, policy: PaddingPolicy::GroupedSymmetric },
            LayerSpec::ReLU,
            LayerSpec::GlobalAvgPool,
            LayerSpec::Dense { units: 3 },
        ],
        input: Shape::new(2, 2, 6, 6),
        classes: 3,
    };
    let mut net = build(&spec, 60).unwrap();
    let x = Tensor::random_normal(spec.input, 0.0, 1.0, 61).unwrap();
    let labels = vec![0usize, 2];
    let (logits, cache) = forward(&mut net, &x, true).unwrap();
    let (_, d_logits) = cross_entropy(&logits, &labels).unwrap();
    let grads = backward(&net, &cache, &d_logits).unwrap();
    let net_err = check_network(&mut net, &grads, &x, &labels, 1e-6, 7);

    let pass = conv_worst <= 1e-5 && net_err <= 1e-4;
    verdict(2, "gradient checks", pass);
    assert!(pass, "conv {conv_worst:.3e}, network {net_err:.3e}");
}

#[test]
fn acceptance_3_shift_law() {
    // 16 uniform 2x2 kernels, all padding on bottom/right, 65x65 delta
    let mut lt = ShiftConfig::for_tag(KernelTag::C2, 16, 65);
    lt.width = 4;
    let rep = run_shift(&lt).unwrap();
    let (dy, dx) = rep.final_displacement();
    let total_ok = (dy + 8.0).abs() <= 1.0 && (dx + 8.0).abs() <= 1.0;

    // per-layer increment is exactly half a pixel up-left while the mass
    // has not reached a border (support grows one pixel per layer, far
    // from the 32-pixel margin)
    let mut increment_ok = true;
    for w in rep.rows.windows(2) {
        let iy = w[1].cy - w[0].cy;
        let ix = w[1].cx - w[0].cx;
        if (iy + 0.5).abs() > 1e-9 || (ix + 0.5).abs() > 1e-9 {
            increment_ok = false;
        }
    }

    let grouped = ShiftConfig {
        policy: PaddingPolicy::GroupedSymmetric,
        ..lt
    };
    let grep = run_shift(&grouped).unwrap();
    let (gy, gx) = grep.final_displacement();
    let grouped_ok = gy.abs() <= 0.5 && gx.abs() <= 0.5;

    let pass = total_ok && increment_ok && grouped_ok;
    verdict(3, "shift law", pass);
    assert!(
        pass,
        "asymmetric ({dy:.4},{dx:.4}), increments exact: {increment_ok}, grouped ({gy:.4},{gx:.4})"
    );
}

#[test]
fn acceptance_4_erosion_ordering() {
    let config = ErosionConfig::default();
    let report = run_erosion(&config).unwrap();
    let layer = 18;

    let mut clauses = Vec::new();
    for (larger, smaller) in [
        (KernelTag::C2sp, KernelTag::C3),
        (KernelTag::C3, KernelTag::C2),
        (KernelTag::C4sp, KernelTag::C4),
    ] {
        let check = report.ordering_check(larger, smaller, layer).unwrap();
        println!(
            "  Q({larger}) > Q({smaller}) at layer {layer}: gap={:.4e} 2se={:.4e} {}",
            check.gap,
            check.two_se,
            if check.pass { "pass" } else { "FAIL" }
        );
        clauses.push(check.pass);
    }
    let violations = report.monotonicity_violations();
    let total_transitions = report.records.len() * (config.depth - 1);
    let mono_ok = violations.is_empty();
    println!(
        "  per-seed monotone decrease: {} violations of {} transitions: {}",
        violations.len(),
        total_transitions,
        if mono_ok { "pass" } else { "FAIL" }
    );
    let pass = clauses.iter().all(|&c| c) && mono_ok;
    verdict(4, "erosion ordering", pass);
    assert!(pass, "ordering clauses {clauses:?}, monotone {mono_ok}");
}

#[test]
fn acceptance_5_classification_analogue() {
    let size = 16;
    let (ntrain, ntest) = (384, 384);
    let noise = 0.3;
    let (depth, width) = (12, 8);
    let epochs = 30;
    let batch = 64;
    let mut medians = Vec::new();
    for tag in [KernelTag::C2, KernelTag::C2sp, KernelTag::C3] {
        let mut finals = Vec::new();
        for seed in 0..5u64 {
            let train = gen_quadrant_blobs_with(
                ntrain,
                size,
                noise,
                seed * 2 + 1,
                SplitTag::Train,
                None,
            )
            .unwrap();
            let test = gen_quadrant_blobs_with(
                ntest,
                size,
                noise,
                seed * 2 + 2,
                SplitTag::Test,
                Some(train.norm),
            )
            .unwrap();
            let spec = quadrant_net(tag, depth, width, Shape::new(batch, 1, size, size));
            let cfg = TrainConfig {
                epochs,
                batch_size: batch,
                learning_rate: 0.1,
                momentum: 0.9,
                weight_decay: 1e-4,
                seed,
                schedule: LrSchedule::Step { gamma: 0.1, every: 2 * epochs / 3 },
                eval_every: epochs,
            };
            let (_, metrics) = train_and_eval(&spec, &cfg, &train, &test).unwrap();
            finals.push(metrics.final_test_acc());
        }
        let med = median(&mut finals);
        println!("  {tag}: per-seed {finals:?} median {med:.4}");
        medians.push((tag, med));
    }
    let c2 = medians[0].1;
    let c2sp = medians[1].1;
    let c3 = medians[2].1;
    let pass = c2sp > c2 && c3 - c2sp <= 0.02;
    verdict(5, "classification analogue", pass);
    assert!(pass, "medians C2={c2:.4} C2sp={c2sp:.4} C3={c3:.4}");
}

#[test]
fn acceptance_6_invariant_suite() {
    // compact deterministic sweep of the invariants that also run under
    // proptest in tests/properties.rs
    let mut pass = true;

    for k in [1usize, 3, 5] {
        pass &= offsets(k, OffsetTag::Center).unwrap().mean() == (0.0, 0.0);
    }
    for k in [2usize, 4] {
        let (mut sy, mut sx) = (0.0, 0.0);
        for dir in Direction::ALL {
            let set = offsets(k, OffsetTag::Shifted(dir)).unwrap();
            pass &= set.mean() == dir.mean_offset();
            sy += set.mean().0;
            sx += set.mean().1;
        }
        pass &= (sy, sx) == (0.0, 0.0);
    }
    for k in 1..=6usize {
        let tags = if k % 2 == 1 {
            vec![OffsetTag::Center]
        } else {
            Direction::ALL.iter().map(|&d| OffsetTag::Shifted(d)).collect()
        };
        for tag in tags {
            let p = pad_amounts(k, tag).unwrap();
            pass &= p.top + p.bottom == k - 1 && p.left + p.right == k - 1;
        }
    }
    for c in [4usize, 8, 64, 256] {
        let asg = assign_directions(c).unwrap();
        pass &= asg.mean_offset() == (0.0, 0.0);
        pass &= asg.counts() == [c / 4; 4];
    }

    let t = Tensor::random_normal(Shape::new(2, 3, 5, 5), 0.0, 1.0, 70).unwrap();
    let a = -1.75;
    pass &= (information_quantity(&t.scale(a)) - a.abs() * information_quantity(&t)).abs()
        <= 1e-12;

    // adjoint and determinism spot checks
    let x = Tensor::random_normal(Shape::new(1, 4, 6, 6), 0.0, 1.0, 71).unwrap();
    let w = Tensor::random_normal(Shape::new(2, 4, 2, 2), 0.0, 1.0, 72).unwrap();
    let layer = ConvLayer::new(w, None, 1, PaddingPolicy::GroupedSymmetric).unwrap();
    let out = conv2d_forward(&x, &layer).unwrap();
    let r = Tensor::random_normal(out.shape(), 0.0, 1.0, 73).unwrap();
    let grads = conv2d_backward(&x, &layer, &r).unwrap();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
    let lhs = dot(out.data(), r.data());
    pass &= (lhs - dot(x.data(), grads.d_input.data())).abs() <= 1e-9 * (1.0 + lhs.abs());
    pass &= (lhs - dot(layer.weights.data(), grads.d_weights.data())).abs()
        <= 1e-9 * (1.0 + lhs.abs());
    let out2 = conv2d_forward(&x, &layer).unwrap();
    pass &= out.data() == out2.data();

    verdict(6, "invariant suite", pass);
    assert!(pass);
}
