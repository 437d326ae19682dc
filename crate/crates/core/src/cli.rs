//! Command-line surface: the erosion and shift experiments, gradient and
//! oracle verification gates, quadrant-task training, and heatmap export.
//!
//! Exit codes: 0 success, 1 assertion or tolerance failure, 2 usage error.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{
    run_erosion, run_shift, ErosionConfig, ErosionReport, KernelTag, ShiftConfig,
};
use crate::conv::{conv2d_forward, naive_oracle_conv, ConvLayer};
use crate::data::{gen_quadrant_blobs_with, SplitTag};
use crate::error::{Error, Result};
use crate::gradcheck::check_network;
use crate::nn::{
    backward, cross_entropy, forward, train_and_eval, LayerSpec, LrSchedule, NetworkSpec,
    TrainConfig,
};
use crate::padding::{Direction, PaddingPolicy};
use crate::tensor::{Shape, Tensor};

#[derive(Parser, Debug)]
#[command(name = "evenpad", version, about = "Even-kernel convolution experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Layerwise information-erosion experiment over untrained stacks
    Erode(ErodeArgs),
    /// Centroid-shift trajectory of a delta through a conv stack
    Shift(ShiftArgs),
    /// Finite-difference gradient verification of a network spec
    Gradcheck(GradcheckArgs),
    /// Fused conv vs naive reference on random cases
    OracleDiff(OracleDiffArgs),
    /// Train small plain nets on the quadrant-blob task
    Train(TrainArgs),
    /// Render a tensor dump as a grayscale PGM heatmap
    Heatmap(HeatmapArgs),
}

#[derive(Args, Debug)]
pub struct ErodeArgs {
    /// Comma-separated kernel tags
    #[arg(long, default_value = "C2,C2sp,C3,C4,C4sp,C5", value_delimiter = ',')]
    pub kernels: Vec<KernelTag>,
    #[arg(long, default_value_t = 54)]
    pub depth: usize,
    #[arg(long, default_value_t = 16)]
    pub width: usize,
    /// Input spatial size
    #[arg(long, default_value_t = 32)]
    pub input: usize,
    /// Number of seeds (0..n)
    #[arg(long, default_value_t = 20)]
    pub seeds: u64,
    #[arg(long, default_value_t = 8)]
    pub batch: usize,
    /// "on" or "off"
    #[arg(long, default_value = "on")]
    pub relu: String,
    /// Base seed added to every per-cell seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Layer at which the kernel ordering is asserted
    #[arg(long, default_value_t = 18)]
    pub check_layer: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Optional line-plot of mean Q per layer
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ShiftArgs {
    #[arg(long, default_value = "C2")]
    pub kernel: KernelTag,
    /// Override policy: odd | grouped | LT | RT | LB | RB
    #[arg(long)]
    pub policy: Option<String>,
    #[arg(long, default_value_t = 16)]
    pub depth: usize,
    #[arg(long, default_value_t = 65)]
    pub size: usize,
    #[arg(long, default_value_t = 4)]
    pub width: usize,
    /// uniform | random
    #[arg(long, default_value = "uniform")]
    pub kernel_content: String,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
    /// Optional line-plot of dy and dx per layer
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct GradcheckArgs {
    /// Layer chain, e.g. "C3x4-bn-relu-C2spx4-relu-gap-dense3"
    #[arg(long, default_value = "C3x4-bn-relu-C2spx4-relu-gap-dense3")]
    pub spec: String,
    /// Input shape as N,C,H,W
    #[arg(long, default_value = "2,2,6,6")]
    pub input: String,
    #[arg(long, default_value_t = 1e-6)]
    pub step: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    /// Probed coordinates per parameter tensor
    #[arg(long, default_value_t = 5)]
    pub samples: usize,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct OracleDiffArgs {
    /// Random cases per (k, policy, stride) configuration
    #[arg(long, default_value_t = 50)]
    pub cases: usize,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[arg(long, default_value = "quadrant")]
    pub task: String,
    /// Comma-separated kernel tags for the variant convs
    #[arg(long, default_value = "C2sp", value_delimiter = ',')]
    pub kernel: Vec<KernelTag>,
    /// Total conv count, including the fixed 3x3 stem
    #[arg(long, default_value_t = 12)]
    pub depth: usize,
    #[arg(long, default_value_t = 16)]
    pub width: usize,
    #[arg(long, default_value_t = 30)]
    pub epochs: usize,
    #[arg(long, default_value_t = 5)]
    pub seeds: u64,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 16)]
    pub size: usize,
    #[arg(long, default_value_t = 384)]
    pub ntrain: usize,
    #[arg(long, default_value_t = 384)]
    pub ntest: usize,
    #[arg(long, default_value_t = 0.3)]
    pub noise: f64,
    #[arg(long, default_value_t = 64)]
    pub batch: usize,
    #[arg(long, default_value_t = 0.1)]
    pub lr: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct HeatmapArgs {
    /// Tensor dump produced by this crate's binary format
    #[arg(long)]
    pub from: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

/// EVENPAD_SEED overrides the default when no --seed flag is given.
fn resolve_seed(flag: Option<u64>, default: u64) -> u64 {
    if let Some(s) = flag {
        return s;
    }
    match std::env::var("EVENPAD_SEED") {
        Ok(v) => v.parse().unwrap_or(default),
        Err(_) => default,
    }
}

fn parse_policy(s: &str) -> Result<PaddingPolicy> {
    match s {
        "odd" | "symmetric" => Ok(PaddingPolicy::SymmetricOdd),
        "grouped" | "sp" => Ok(PaddingPolicy::GroupedSymmetric),
        other => other
            .parse::<Direction>()
            .map(PaddingPolicy::Asymmetric),
    }
}

fn write_svg_lines(path: &Path, series: &[(String, Vec<(f64, f64)>)]) -> Result<()> {
    let (w, h) = (640.0, 400.0);
    let margin = 40.0;
    let mut xmin = f64::INFINITY;
    let mut xmax = f64::NEG_INFINITY;
    let mut ymin = f64::INFINITY;
    let mut ymax = f64::NEG_INFINITY;
    for (_, pts) in series {
        for &(x, y) in pts {
            xmin = xmin.min(x);
            xmax = xmax.max(x);
            ymin = ymin.min(y);
            ymax = ymax.max(y);
        }
    }
    if !xmin.is_finite() {
        xmin = 0.0;
        xmax = 1.0;
        ymin = 0.0;
        ymax = 1.0;
    }
    let xspan = (xmax - xmin).max(1e-12);
    let yspan = (ymax - ymin).max(1e-12);
    let colors = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"];
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">"
    )?;
    writeln!(out, "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>")?;
    for (i, (name, pts)) in series.iter().enumerate() {
        let color = colors[i % colors.len()];
        let path_pts: Vec<String> = pts
            .iter()
            .map(|&(x, y)| {
                let px = margin + (x - xmin) / xspan * (w - 2.0 * margin);
                let py = h - margin - (y - ymin) / yspan * (h - 2.0 * margin);
                format!("{px:.1},{py:.1}")
            })
            .collect();
        writeln!(
            out,
            "<polyline fill=\"none\" stroke=\"{color}\" points=\"{}\"/>",
            path_pts.join(" ")
        )?;
        writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" fill=\"{color}\" font-size=\"12\">{name}</text>",
            w - margin - 60.0,
            margin + 14.0 * i as f64
        )?;
    }
    writeln!(out, "</svg>")?;
    Ok(())
}

fn run_erode(args: &ErodeArgs) -> Result<bool> {
    let base = resolve_seed(args.seed, 0);
    let relu = match args.relu.as_str() {
        "on" => true,
        "off" => false,
        other => {
            return Err(Error::InvalidArgument(format!(
                "--relu expects on|off, got '{other}'"
            )))
        }
    };
    let third = args.depth / 3;
    let config = ErosionConfig {
        kernels: args.kernels.clone(),
        depth: args.depth,
        width: args.width,
        input_size: args.input,
        batch: args.batch,
        seeds: (0..args.seeds).map(|s| base + s).collect(),
        relu,
        downsample_after: if third > 0 {
            vec![third, 2 * third]
        } else {
            vec![]
        },
        ..Default::default()
    };
    println!(
        "erode: kernels={:?} depth={} width={} input={} batch={} seeds={}..{} relu={} check_layer={}",
        args.kernels.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
        config.depth,
        config.width,
        config.input_size,
        config.batch,
        base,
        base + args.seeds,
        relu,
        args.check_layer
    );
    let report = run_erosion(&config)?;
    let mut out = BufWriter::new(File::create(&args.out)?);
    report.write_csv(&mut out)?;
    out.flush()?;
    if let Some(svg) = &args.svg {
        let series: Vec<(String, Vec<(f64, f64)>)> = config
            .kernels
            .iter()
            .map(|&tag| {
                let pts = (1..=config.depth.max(1))
                    .filter_map(|l| report.mean_q(tag, l).map(|q| (l as f64, q.max(1e-300).ln())))
                    .collect();
                (tag.to_string(), pts)
            })
            .collect();
        write_svg_lines(svg, &series)?;
    }
    Ok(check_erosion_ordering(&report, args.check_layer))
}

/// Prints each applicable pairwise clause of the qualitative ordering
/// C2sp > C3 > C2, C4sp > C4 at the given layer; returns overall pass.
pub fn check_erosion_ordering(report: &ErosionReport, layer: usize) -> bool {
    let pairs = [
        (KernelTag::C2sp, KernelTag::C3),
        (KernelTag::C3, KernelTag::C2),
        (KernelTag::C2sp, KernelTag::C2),
        (KernelTag::C4sp, KernelTag::C4),
    ];
    let mut all_pass = true;
    for (larger, smaller) in pairs {
        if let Some(check) = report.ordering_check(larger, smaller, layer) {
            let ok = check.gap > 0.0;
            println!(
                "ordering Q({larger}) > Q({smaller}) at layer {layer}: gap={:.3e} 2se={:.3e} {}",
                check.gap,
                check.two_se,
                if ok { "pass" } else { "FAIL" }
            );
            all_pass &= ok;
        }
    }
    all_pass
}

fn run_shift_cmd(args: &ShiftArgs) -> Result<bool> {
    let seed = resolve_seed(args.seed, 0);
    let mut config = ShiftConfig::for_tag(args.kernel, args.depth, args.size);
    if let Some(p) = &args.policy {
        config.policy = parse_policy(p)?;
    }
    config.width = args.width;
    config.content = args.kernel_content.parse()?;
    config.seed = seed;
    println!(
        "shift: kernel={} k={} policy={:?} depth={} size={} width={} content={} seed={}",
        args.kernel, config.k, config.policy, config.depth, config.size, config.width,
        args.kernel_content, seed
    );
    let report = run_shift(&config)?;
    let mut out = BufWriter::new(File::create(&args.out)?);
    report.write_csv(&mut out)?;
    out.flush()?;
    if let Some(svg) = &args.svg {
        let dy: Vec<(f64, f64)> = report.rows.iter().map(|r| (r.layer as f64, r.dy)).collect();
        let dx: Vec<(f64, f64)> = report.rows.iter().map(|r| (r.layer as f64, r.dx)).collect();
        write_svg_lines(svg, &[("dy".into(), dy), ("dx".into(), dx)])?;
    }
    let (dy, dx) = report.final_displacement();
    // predicted content displacement is minus the accumulated mean offset
    let (my, mx) = match config.policy {
        PaddingPolicy::Asymmetric(d) => d.mean_offset(),
        _ => (0.0, 0.0),
    };
    let (py, px) = (
        -(config.depth as f64) * my,
        -(config.depth as f64) * mx,
    );
    println!("final displacement (dy, dx) = ({dy:.4}, {dx:.4})");
    println!("predicted            (dy, dx) = ({py:.4}, {px:.4})");
    if report.truncated {
        println!("trajectory truncated: feature map went all-zero");
    }
    Ok(true)
}

fn parse_shape(s: &str) -> Result<Shape> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad shape component '{p}'")))
        })
        .collect::<Result<_>>()?;
    if parts.len() != 4 {
        return Err(Error::InvalidArgument(format!(
            "shape needs 4 components, got {}",
            parts.len()
        )));
    }
    Ok(Shape::new(parts[0], parts[1], parts[2], parts[3]))
}

/// Layer-chain mini-language: tokens joined by '-'.
/// Conv token: kernel tag, then 'x' and the output channels, then an
/// optional '/2' stride, e.g. "C2spx8/2". Other tokens: relu, bn, gap,
/// dense<units>.
pub fn parse_netspec(s: &str, input: Shape) -> Result<NetworkSpec> {
    let mut layers = Vec::new();
    let mut classes = 0;
    for tok in s.split('-') {
        let tok = tok.trim();
        if tok.is_empty() {
            continue;
        }
        match tok {
            "relu" => layers.push(LayerSpec::ReLU),
            "bn" => layers.push(LayerSpec::BatchNorm),
            "gap" => layers.push(LayerSpec::GlobalAvgPool),
            _ if tok.starts_with("dense") => {
                let units: usize = tok[5..].parse().map_err(|_| {
                    Error::InvalidArgument(format!("bad dense token '{tok}'"))
                })?;
                layers.push(LayerSpec::Dense { units });
                classes = units;
            }
            _ => {
                let (head, stride) = match tok.split_once('/') {
                    Some((h, s)) => (
                        h,
                        s.parse().map_err(|_| {
                            Error::InvalidArgument(format!("bad stride in '{tok}'"))
                        })?,
                    ),
                    None => (tok, 1),
                };
                let (tag_str, c_str) = head.split_once('x').ok_or_else(|| {
                    Error::InvalidArgument(format!("bad conv token '{tok}'"))
                })?;
                let tag: KernelTag = tag_str.parse()?;
                let c_out: usize = c_str.parse().map_err(|_| {
                    Error::InvalidArgument(format!("bad channel count in '{tok}'"))
                })?;
                layers.push(LayerSpec::Conv {
                    k: tag.k(),
                    c_out,
                    stride,
                    policy: tag.policy(),
                });
            }
        }
    }
    let spec = NetworkSpec {
        layers,
        input,
        classes,
    };
    spec.validate()?;
    Ok(spec)
}

fn run_gradcheck(args: &GradcheckArgs) -> Result<bool> {
    let seed = resolve_seed(args.seed, 11);
    let input = parse_shape(&args.input)?;
    let spec = parse_netspec(&args.spec, input)?;
    println!(
        "gradcheck: spec={} input={},{},{},{} step={:e} tol={:e} samples={} seed={}",
        args.spec, input.n, input.c, input.h, input.w, args.step, args.tol, args.samples, seed
    );
    let mut net = crate::nn::build(&spec, seed)?;
    let x = Tensor::random_normal(input, 0.0, 1.0, seed.wrapping_add(1))?;
    let labels: Vec<usize> = (0..input.n).map(|i| i % spec.classes).collect();
    let (logits, cache) = forward(&mut net, &x, true)?;
    let (loss, d_logits) = cross_entropy(&logits, &labels)?;
    let grads = backward(&net, &cache, &d_logits)?;
    let err = check_network(&mut net, &grads, &x, &labels, args.step, args.samples);
    let pass = err <= args.tol;
    println!(
        "loss={loss:.6} max relative error {err:.3e} vs tol {:.3e}: {}",
        args.tol,
        if pass { "pass" } else { "FAIL" }
    );
    Ok(pass)
}

fn run_oracle_diff(args: &OracleDiffArgs) -> Result<bool> {
    let seed = resolve_seed(args.seed, 17);
    println!(
        "oracle-diff: cases={} tol={:e} seed={}",
        args.cases, args.tol, seed
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut total = 0usize;
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
                let mut case_worst = 0.0f64;
                for _ in 0..args.cases {
                    let n = rng.gen_range(1..=2);
                    let grouped = matches!(policy, PaddingPolicy::GroupedSymmetric);
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
                    )?;
                    let wt = Tensor::random_normal_with(
                        &mut rng,
                        Shape::new(c_out, c_in, k, k),
                        0.0,
                        1.0,
                    )?;
                    let layer = ConvLayer::new(wt, None, stride, policy)?;
                    let fused = conv2d_forward(&x, &layer)?;
                    let oracle =
                        naive_oracle_conv(&x, &layer.weights, &layer.channel_pads()?, stride)?;
                    let diff = fused
                        .data()
                        .iter()
                        .zip(oracle.data())
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0f64, f64::max);
                    case_worst = case_worst.max(diff);
                    total += 1;
                }
                println!(
                    "k={k} policy={policy:?} stride={stride}: {} cases, max abs diff {case_worst:.3e}",
                    args.cases
                );
                worst = worst.max(case_worst);
            }
        }
    }
    let pass = worst <= args.tol;
    println!(
        "{total} cases total, worst {worst:.3e} vs tol {:.3e}: {}",
        args.tol,
        if pass { "pass" } else { "FAIL" }
    );
    Ok(pass)
}

/// Plain 12-conv net for the quadrant task: a fixed 3x3 stem (the input has
/// a single channel, which grouped padding cannot split four ways), then
/// depth-1 convs of the chosen kernel with stride 2 and channel doubling at
/// one and two thirds of the variant stack. Each conv is followed by
/// BatchNorm and ReLU, then global average pooling and a dense head.
pub fn quadrant_net(tag: KernelTag, depth: usize, width: usize, input: Shape) -> NetworkSpec {
    let mut layers = vec![
        LayerSpec::Conv {
            k: 3,
            c_out: width,
            stride: 1,
            policy: PaddingPolicy::SymmetricOdd,
        },
        LayerSpec::BatchNorm,
        LayerSpec::ReLU,
    ];
    let variant = depth.saturating_sub(1);
    let mut c = width;
    for i in 0..variant {
        let downsample = variant >= 3 && (i == variant / 3 || i == 2 * variant / 3);
        let (stride, c_out) = if downsample { (2, c * 2) } else { (1, c) };
        layers.push(LayerSpec::Conv {
            k: tag.k(),
            c_out,
            stride,
            policy: tag.policy(),
        });
        layers.push(LayerSpec::BatchNorm);
        layers.push(LayerSpec::ReLU);
        c = c_out;
    }
    layers.push(LayerSpec::GlobalAvgPool);
    layers.push(LayerSpec::Dense { units: 4 });
    NetworkSpec {
        layers,
        input,
        classes: 4,
    }
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn run_train(args: &TrainArgs) -> Result<bool> {
    if args.task != "quadrant" {
        return Err(Error::InvalidArgument(format!(
            "unknown task '{}'",
            args.task
        )));
    }
    let base = resolve_seed(args.seed, 0);
    println!(
        "train: task={} kernels={:?} depth={} width={} epochs={} seeds={}..{} size={} ntrain={} ntest={} noise={} batch={} lr={}",
        args.task,
        args.kernel.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
        args.depth,
        args.width,
        args.epochs,
        base,
        base + args.seeds,
        args.size,
        args.ntrain,
        args.ntest,
        args.noise,
        args.batch,
        args.lr
    );
    let mut out = BufWriter::new(File::create(&args.out)?);
    writeln!(out, "kernel,seed,epoch,train_loss,test_acc")?;
    let mut summary = Vec::new();
    for &tag in &args.kernel {
        let mut finals = Vec::new();
        for s in 0..args.seeds {
            let seed = base + s;
            let train = gen_quadrant_blobs_with(
                args.ntrain,
                args.size,
                args.noise,
                seed * 2 + 1,
                SplitTag::Train,
                None,
            )?;
            let test = gen_quadrant_blobs_with(
                args.ntest,
                args.size,
                args.noise,
                seed * 2 + 2,
                SplitTag::Test,
                Some(train.norm),
            )?;
            let input = Shape::new(args.batch, 1, args.size, args.size);
            let spec = quadrant_net(tag, args.depth, args.width, input);
            let cfg = TrainConfig {
                epochs: args.epochs,
                batch_size: args.batch,
                learning_rate: args.lr,
                momentum: 0.9,
                weight_decay: 1e-4,
                seed,
                schedule: LrSchedule::Step {
                    gamma: 0.1,
                    every: (2 * args.epochs / 3).max(1),
                },
                eval_every: 1,
            };
            let (_, metrics) = train_and_eval(&spec, &cfg, &train, &test)?;
            for e in &metrics.epochs {
                writeln!(
                    out,
                    "{tag},{seed},{},{:.6},{:.6}",
                    e.epoch, e.train_loss, e.test_acc
                )?;
            }
            let acc = metrics.final_test_acc();
            println!("{tag} seed {seed}: final test accuracy {acc:.4}");
            finals.push(acc);
        }
        let med = median(&mut finals);
        println!("{tag}: median final test accuracy {med:.4}");
        summary.push((tag, med));
    }
    out.flush()?;
    Ok(true)
}

fn run_heatmap(args: &HeatmapArgs) -> Result<bool> {
    println!(
        "heatmap: from={} out={}",
        args.from.display(),
        args.out.display()
    );
    let t = Tensor::load(&args.from)?;
    crate::analysis::export_heatmap(&t, &args.out)?;
    println!("wrote {}x{} PGM", t.shape().w, t.shape().h);
    Ok(true)
}

/// Runs one parsed command. Ok(true) = success, Ok(false) = assertion
/// failure (exit 1), Err = configuration/runtime error.
pub fn run(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Erode(a) => run_erode(a),
        Command::Shift(a) => run_shift_cmd(a),
        Command::Gradcheck(a) => run_gradcheck(a),
        Command::OracleDiff(a) => run_oracle_diff(a),
        Command::Train(a) => run_train(a),
        Command::Heatmap(a) => run_heatmap(a),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn netspec_round_trip() {
        let spec = parse_netspec(
            "C3x4-bn-relu-C2spx4/2-relu-gap-dense3",
            Shape::new(1, 2, 8, 8),
        )
        .unwrap();
        assert_eq!(spec.classes, 3);
        assert_eq!(spec.layers.len(), 7);
        match spec.layers[3] {
            LayerSpec::Conv { k, c_out, stride, policy } => {
                assert_eq!((k, c_out, stride), (2, 4, 2));
                assert_eq!(policy, PaddingPolicy::GroupedSymmetric);
            }
            _ => panic!("expected conv"),
        }
        assert!(parse_netspec("nonsense", Shape::new(1, 1, 4, 4)).is_err());
    }

    #[test]
    fn quadrant_net_shape() {
        let spec = quadrant_net(KernelTag::C2sp, 12, 8, Shape::new(4, 1, 16, 16));
        spec.validate().unwrap();
        let convs = spec
            .layers
            .iter()
            .filter(|l| matches!(l, LayerSpec::Conv { .. }))
            .count();
        assert_eq!(convs, 12);
        let strides: Vec<usize> = spec
            .layers
            .iter()
            .filter_map(|l| match l {
                LayerSpec::Conv { stride, .. } => Some(*stride),
                _ => None,
            })
            .collect();
        assert_eq!(strides.iter().filter(|&&s| s == 2).count(), 2);
    }

    #[test]
    fn median_odd_even() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn policy_strings() {
        assert_eq!(parse_policy("odd").unwrap(), PaddingPolicy::SymmetricOdd);
        assert_eq!(
            parse_policy("grouped").unwrap(),
            PaddingPolicy::GroupedSymmetric
        );
        assert!(matches!(
            parse_policy("RB").unwrap(),
            PaddingPolicy::Asymmetric(_)
        ));
        assert!(parse_policy("diag").is_err());
    }
}
