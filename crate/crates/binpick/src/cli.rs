//! Batch command-line front end. Every command is a pure function of its
//! input files, flags, and seed: reruns produce byte-identical outputs, and
//! each run emits a manifest with the resolved configuration and input file
//! digests.
//!
//! Exit codes: 0 success, 2 usage/config errors, 3 I/O and parse errors,
//! 4 degenerate training data, 1 anything else.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::features::{read_dataset, write_dataset, BinningConfig, DatasetRow};
use crate::learn::{
    evaluate, train_forest, train_svm, Evaluation, ForestConfig, TrainedModel, TrainingSet,
};
use crate::oracle::{generate_dataset, run_pick_selection, run_training_trial, PipelineConfig};
use crate::plan::{generate_grasp_db, GraspDatabase, SelectionMode};
use crate::rng::derive_seed;
use crate::scene::{gen_scene, Bin, BinScene};
use crate::shape::{ObjectModel, Shape};

#[derive(Parser)]
#[command(
    name = "binpick",
    version,
    about = "Bin-picking decision toolkit: synthetic scenes, swept-volume features, discriminators, and tiered grasp selection"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate settled bin scenes.
    Gen(GenArgs),
    /// Produce a labeled feature dataset from scenes (or fresh trials).
    Dataset(DatasetArgs),
    /// Train a discriminator on a dataset CSV.
    Train(TrainArgs),
    /// Evaluate a model: confusion matrix, rates, and scatter data.
    Eval(EvalArgs),
    /// Run the tiered selection loop on one scene and emit the trace.
    Pick(PickArgs),
    /// Generate a grasp configuration database for an object.
    Gendb(GendbArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Number of scenes to generate.
    #[arg(long, default_value_t = 1)]
    count: usize,
    /// Objects per scene.
    #[arg(long)]
    objects: Option<usize>,
    #[arg(long)]
    bin_x: Option<f64>,
    #[arg(long)]
    bin_y: Option<f64>,
    #[arg(long)]
    bin_wall: Option<f64>,
    /// Maximum adjacency gap between a new object and the pile.
    #[arg(long)]
    gap: Option<f64>,
    /// Object shape: box, cylinder, or sphere.
    #[arg(long)]
    shape: Option<ShapeKind>,
    /// Shape dimensions, comma-separated (box: x,y,z; cylinder: r,h; sphere: r).
    #[arg(long)]
    dims: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for scene_<k>.json and manifest.json.
    #[arg(long)]
    out: PathBuf,
    /// Optional JSON config file; explicit flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct DatasetArgs {
    /// Scene files to run one training trial each on.
    #[arg(long, num_args = 1..)]
    scenes: Vec<PathBuf>,
    /// Generate this many fresh trials instead of using scene files.
    #[arg(long)]
    trials: Option<usize>,
    /// Grasp database file; generated procedurally when omitted.
    #[arg(long)]
    db: Option<PathBuf>,
    #[arg(long)]
    db_size: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for dataset.csv and manifest.json.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Algo {
    Svm,
    Forest,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ShapeKind {
    Box,
    Cylinder,
    Sphere,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    algo: Algo,
    /// Soft-margin penalty (svm).
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = 300)]
    epochs: usize,
    /// Number of trees (forest).
    #[arg(long, default_value_t = 200)]
    trees: usize,
    #[arg(long, default_value_t = 5)]
    depth: usize,
    /// Subsample ratio per tree (forest).
    #[arg(long, default_value_t = 0.7)]
    ratio: f64,
    /// Consider only sqrt(dim) random features per split (forest).
    #[arg(long)]
    feature_subsample: bool,
    /// Train trees sequentially instead of on the thread pool; the model
    /// file is identical either way.
    #[arg(long)]
    serial: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output model file; a .manifest.json sibling is written next to it.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    dataset: PathBuf,
    /// Output directory for report.txt, report.csv, scatter.csv, manifest.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PickArgs {
    #[arg(long)]
    scene: PathBuf,
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    db: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for trace.json and manifest.json.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct GendbArgs {
    #[arg(long, default_value_t = 172)]
    size: usize,
    #[arg(long)]
    shape: Option<ShapeKind>,
    #[arg(long)]
    dims: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output database file; a .manifest.json sibling is written next to it.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Partial pipeline configuration accepted from `--config` files; every key
/// is optional and fills in over the defaults. Explicit command-line flags
/// override config values, never silently (a note is printed).
#[derive(Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub object: Option<ObjectModel>,
    pub object_count: Option<usize>,
    pub bin: Option<Bin>,
    pub adjacency_gap: Option<f64>,
    pub sensor: Option<crate::scene::SensorConfig>,
    pub gripper: Option<crate::geometry::GripperModel>,
    pub oracle: Option<crate::oracle::OracleConfig>,
    pub db_size: Option<usize>,
    pub tier_count: Option<usize>,
    pub swept_margin: Option<f64>,
    pub removal_threshold: Option<f64>,
    pub binning: Option<BinningConfig>,
    pub pose_sigma_t: Option<f64>,
    pub pose_sigma_r: Option<f64>,
    pub pose_error_threshold: Option<f64>,
}

fn load_partial_config(path: Option<&Path>) -> Result<PartialConfig> {
    let Some(path) = path else {
        return Ok(PartialConfig::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))
}

fn merge_config(base: PipelineConfig, partial: &PartialConfig) -> PipelineConfig {
    PipelineConfig {
        object: partial.object.unwrap_or(base.object),
        object_count: partial.object_count.unwrap_or(base.object_count),
        bin: partial.bin.unwrap_or(base.bin),
        adjacency_gap: partial.adjacency_gap.unwrap_or(base.adjacency_gap),
        sensor: partial.sensor.unwrap_or(base.sensor),
        gripper: partial.gripper.unwrap_or(base.gripper),
        oracle: partial.oracle.unwrap_or(base.oracle),
        db_size: partial.db_size.unwrap_or(base.db_size),
        tier_count: partial.tier_count.unwrap_or(base.tier_count),
        swept_margin: partial.swept_margin.unwrap_or(base.swept_margin),
        removal_threshold: partial.removal_threshold.unwrap_or(base.removal_threshold),
        binning: partial.binning.unwrap_or(base.binning),
        pose_sigma_t: partial.pose_sigma_t.unwrap_or(base.pose_sigma_t),
        pose_sigma_r: partial.pose_sigma_r.unwrap_or(base.pose_sigma_r),
        pose_error_threshold: partial
            .pose_error_threshold
            .unwrap_or(base.pose_error_threshold),
    }
}

/// Applies a flag over a config-file value, printing a note when the flag
/// wins over a differing config value.
fn resolve_flag<T: PartialEq + std::fmt::Debug + Copy>(
    flag: Option<T>,
    from_config: Option<T>,
    current: T,
    name: &str,
) -> T {
    match (flag, from_config) {
        (Some(f), Some(c)) if f != c => {
            eprintln!("note: --{name} {f:?} overrides config value {c:?}");
            f
        }
        (Some(f), _) => f,
        (None, Some(c)) => c,
        (None, None) => current,
    }
}

fn parse_object(shape: Option<ShapeKind>, dims: Option<&str>) -> Result<Option<ObjectModel>> {
    let Some(kind) = shape else {
        if dims.is_some() {
            return Err(Error::Usage("--dims requires --shape".into()));
        }
        return Ok(None);
    };
    let dims = dims.ok_or_else(|| Error::Usage("--shape requires --dims".into()))?;
    let values: Vec<f64> = dims
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Usage(format!("bad dimension {s:?}")))
        })
        .collect::<Result<_>>()?;
    let shape = match (kind, values.as_slice()) {
        (ShapeKind::Box, [x, y, z]) => Shape::Box { size: [*x, *y, *z] },
        (ShapeKind::Cylinder, [r, h]) => Shape::Cylinder {
            radius: *r,
            height: *h,
        },
        (ShapeKind::Sphere, [r]) => Shape::Sphere { radius: *r },
        _ => {
            return Err(Error::Usage(
                "dimension count does not match the shape (box: 3, cylinder: 2, sphere: 1)".into(),
            ))
        }
    };
    ObjectModel::new(shape).map(Some)
}

// ---------------------------------------------------------------------------
// Manifests
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct InputDigest {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a, C: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    seed: u64,
    config: C,
    inputs: Vec<InputDigest>,
    outputs: Vec<String>,
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let digest = Sha256::digest(&bytes);
    let mut hex = String::with_capacity(64);
    for b in digest {
        let _ = write!(hex, "{b:02x}");
    }
    Ok(hex)
}

fn input_digests(paths: &[&Path]) -> Result<Vec<InputDigest>> {
    paths
        .iter()
        .map(|p| {
            Ok(InputDigest {
                path: p.display().to_string(),
                sha256: sha256_file(p)?,
            })
        })
        .collect()
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text =
        serde_json::to_string_pretty(value).map_err(|e| Error::parse(path, e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

fn ensure_out_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn manifest_sibling(out_file: &Path) -> PathBuf {
    let stem = out_file
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    out_file.with_file_name(format!("{stem}.manifest.json"))
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

fn cmd_gen(args: &GenArgs) -> Result<()> {
    if args.count < 1 {
        return Err(Error::Usage("--count must be >= 1".into()));
    }
    let partial = load_partial_config(args.config.as_deref())?;
    let mut cfg = merge_config(PipelineConfig::default(), &partial);
    if let Some(obj) = parse_object(args.shape, args.dims.as_deref())? {
        cfg.object = obj;
    }
    cfg.object_count = resolve_flag(
        args.objects,
        partial.object_count,
        cfg.object_count,
        "objects",
    );
    if cfg.object_count < 1 {
        return Err(Error::Usage("--objects must be >= 1".into()));
    }
    let config_bin = partial.bin;
    cfg.bin.size_x = resolve_flag(args.bin_x, config_bin.map(|b| b.size_x), cfg.bin.size_x, "bin-x");
    cfg.bin.size_y = resolve_flag(args.bin_y, config_bin.map(|b| b.size_y), cfg.bin.size_y, "bin-y");
    cfg.bin.wall_height = resolve_flag(
        args.bin_wall,
        config_bin.map(|b| b.wall_height),
        cfg.bin.wall_height,
        "bin-wall",
    );
    cfg.adjacency_gap = resolve_flag(args.gap, partial.adjacency_gap, cfg.adjacency_gap, "gap");
    ensure_out_dir(&args.out)?;

    let mut outputs = Vec::new();
    for k in 0..args.count {
        let scene_seed = derive_seed(args.seed, k as u64);
        let scene = gen_scene(
            &cfg.object,
            cfg.object_count,
            &cfg.bin,
            cfg.adjacency_gap,
            scene_seed,
        )?;
        let name = format!("scene_{k}.json");
        scene.save(args.out.join(&name))?;
        outputs.push(name);
    }

    #[derive(Serialize)]
    struct GenConfig<'a> {
        count: usize,
        scene_seeds: Vec<u64>,
        pipeline: &'a PipelineConfig,
    }
    let manifest = Manifest {
        tool: "binpick",
        version: env!("CARGO_PKG_VERSION"),
        command: "gen",
        seed: args.seed,
        config: GenConfig {
            count: args.count,
            scene_seeds: (0..args.count).map(|k| derive_seed(args.seed, k as u64)).collect(),
            pipeline: &cfg,
        },
        inputs: Vec::new(),
        outputs: outputs.clone(),
    };
    write_json(&args.out.join("manifest.json"), &manifest)?;
    println!(
        "wrote {} scene(s) with {} objects each to {}",
        args.count,
        cfg.object_count,
        args.out.display()
    );
    Ok(())
}

fn cmd_dataset(args: &DatasetArgs) -> Result<()> {
    let partial = load_partial_config(args.config.as_deref())?;
    let mut cfg = merge_config(PipelineConfig::default(), &partial);
    cfg.db_size = resolve_flag(args.db_size, partial.db_size, cfg.db_size, "db-size");
    ensure_out_dir(&args.out)?;

    let mut input_paths: Vec<&Path> = Vec::new();
    if let Some(p) = args.config.as_deref() {
        input_paths.push(p);
    }
    for p in &args.scenes {
        input_paths.push(p);
    }
    if let Some(p) = args.db.as_deref() {
        input_paths.push(p);
    }

    let (rows, balance, trial_seeds): (Vec<DatasetRow>, (usize, usize), Vec<u64>) =
        if !args.scenes.is_empty() {
            let db = match args.db.as_deref() {
                Some(p) => GraspDatabase::load(p)?,
                None => {
                    // the scenes define the object; keep the database consistent
                    let first = BinScene::load(&args.scenes[0])?;
                    cfg.object = first.objects[0].0;
                    generate_grasp_db(&cfg.object, &cfg.gripper, cfg.db_size, derive_seed(args.seed, 0))?
                }
            };
            let mut rows = Vec::new();
            let mut seeds = Vec::new();
            let mut success = 0;
            let mut failure = 0;
            for (k, scene_path) in args.scenes.iter().enumerate() {
                let scene = BinScene::load(scene_path)?;
                cfg.object = scene.objects[0].0;
                let trial_seed = derive_seed(args.seed, 100 + k as u64);
                match run_training_trial(&scene, &db, &cfg, trial_seed)? {
                    Some((row, outcome)) => {
                        if outcome.success {
                            success += 1;
                        } else {
                            failure += 1;
                        }
                        rows.push(row);
                        seeds.push(trial_seed);
                    }
                    None => {
                        eprintln!(
                            "note: no selectable grasp in {}, skipping",
                            scene_path.display()
                        );
                    }
                }
            }
            if rows.is_empty() {
                return Err(Error::Usage("no scene produced a labeled trial".into()));
            }
            (rows, (success, failure), seeds)
        } else if let Some(n) = args.trials {
            let (rows, stats) = generate_dataset(n, &cfg, args.seed)?;
            ((rows), (stats.success, stats.failure), stats.trial_seeds)
        } else {
            return Err(Error::Usage(
                "provide --scenes <files>... or --trials <n>".into(),
            ));
        };

    let csv_path = args.out.join("dataset.csv");
    write_dataset(&csv_path, &rows, &cfg.binning)?;

    #[derive(Serialize)]
    struct ClassBalance {
        success: usize,
        failure: usize,
    }
    #[derive(Serialize)]
    struct DatasetConfig<'a> {
        scenes: Vec<String>,
        trials: Option<usize>,
        trial_seeds: Vec<u64>,
        class_balance: ClassBalance,
        pipeline: &'a PipelineConfig,
    }
    let manifest = Manifest {
        tool: "binpick",
        version: env!("CARGO_PKG_VERSION"),
        command: "dataset",
        seed: args.seed,
        config: DatasetConfig {
            scenes: args.scenes.iter().map(|p| p.display().to_string()).collect(),
            trials: args.trials,
            trial_seeds,
            class_balance: ClassBalance {
                success: balance.0,
                failure: balance.1,
            },
            pipeline: &cfg,
        },
        inputs: input_digests(&input_paths)?,
        outputs: vec!["dataset.csv".into()],
    };
    write_json(&args.out.join("manifest.json"), &manifest)?;
    println!(
        "dataset: {} rows ({} success / {} failure) -> {}",
        rows.len(),
        balance.0,
        balance.1,
        csv_path.display()
    );
    Ok(())
}

fn cmd_train(args: &TrainArgs) -> Result<()> {
    let (rows, _, _) = read_dataset(&args.dataset)?;
    let model = match args.algo {
        Algo::Svm => {
            let set = TrainingSet::from_dataset_svm(&rows)?;
            TrainedModel::Svm(train_svm(&set, args.c, args.epochs, args.seed)?)
        }
        Algo::Forest => {
            let set = TrainingSet::from_dataset_hist(&rows)?;
            let cfg = ForestConfig {
                n_trees: args.trees,
                subsample_ratio: args.ratio,
                max_depth: args.depth,
                feature_subsample: args.feature_subsample,
                parallel: !args.serial,
            };
            TrainedModel::Forest(train_forest(&set, &cfg, args.seed)?)
        }
    };
    if let Some(parent) = args.out.parent() {
        if !parent.as_os_str().is_empty() {
            ensure_out_dir(parent)?;
        }
    }
    model.save(&args.out)?;

    #[derive(Serialize)]
    struct TrainConfig {
        algo: String,
        c: f64,
        epochs: usize,
        trees: usize,
        depth: usize,
        ratio: f64,
        feature_subsample: bool,
        parallel: bool,
        dataset: String,
        rows: usize,
    }
    let manifest = Manifest {
        tool: "binpick",
        version: env!("CARGO_PKG_VERSION"),
        command: "train",
        seed: args.seed,
        config: TrainConfig {
            algo: match args.algo {
                Algo::Svm => "svm".into(),
                Algo::Forest => "forest".into(),
            },
            c: args.c,
            epochs: args.epochs,
            trees: args.trees,
            depth: args.depth,
            ratio: args.ratio,
            feature_subsample: args.feature_subsample,
            parallel: !args.serial,
            dataset: args.dataset.display().to_string(),
            rows: rows.len(),
        },
        inputs: input_digests(&[&args.dataset])?,
        outputs: vec![args.out.display().to_string()],
    };
    write_json(&manifest_sibling(&args.out), &manifest)?;
    println!("trained {} model -> {}", manifest.config.algo, args.out.display());
    Ok(())
}

fn format_report(eval: &Evaluation) -> String {
    let c = eval.confusion;
    let mut out = String::new();
    let _ = writeln!(out, "confusion matrix");
    let _ = writeln!(out, "                     identified success   identified failure");
    let _ = writeln!(
        out,
        "  picking succeeded  {:>18}   {:>18}",
        c.succeeded_identified_success, c.succeeded_identified_failure
    );
    let _ = writeln!(
        out,
        "  picking failed     {:>18}   {:>18}",
        c.failed_identified_success, c.failed_identified_failure
    );
    match eval.filtered_success_rate {
        Some(r) => {
            let _ = writeln!(out, "filtered success rate:   {:.1}%", 100.0 * r);
        }
        None => {
            let _ = writeln!(out, "filtered success rate:   n/a");
        }
    }
    let _ = writeln!(
        out,
        "identified-success rate: {:.1}%",
        100.0 * eval.identified_success_rate
    );
    let _ = writeln!(out, "accuracy:                {:.1}%", 100.0 * eval.accuracy);
    out
}

fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let model = TrainedModel::load(&args.model)?;
    let (rows, _, _) = read_dataset(&args.dataset)?;
    let set = match model.kind() {
        crate::learn::FeatureKind::Svm2d => TrainingSet::from_dataset_svm(&rows)?,
        crate::learn::FeatureKind::Hist => TrainingSet::from_dataset_hist(&rows)?,
    };
    let eval = evaluate(&model, &set)?;
    ensure_out_dir(&args.out)?;

    let report = format_report(&eval);
    std::fs::write(args.out.join("report.txt"), &report)
        .map_err(|e| Error::io(args.out.join("report.txt"), e))?;

    let c = eval.confusion;
    let mut csv = String::from(
        "succeeded_identified_success,succeeded_identified_failure,failed_identified_success,failed_identified_failure,filtered_success_rate,identified_success_rate,accuracy\n",
    );
    let filtered = eval
        .filtered_success_rate
        .map(|r| format!("{r}"))
        .unwrap_or_default();
    let _ = writeln!(
        csv,
        "{},{},{},{},{},{},{}",
        c.succeeded_identified_success,
        c.succeeded_identified_failure,
        c.failed_identified_success,
        c.failed_identified_failure,
        filtered,
        eval.identified_success_rate,
        eval.accuracy
    );
    std::fs::write(args.out.join("report.csv"), &csv)
        .map_err(|e| Error::io(args.out.join("report.csv"), e))?;

    // 2-D feature scatter with labels, for external plotting
    let mut scatter = String::from("sum_h,sum_d,label\n");
    for row in &rows {
        let _ = writeln!(
            scatter,
            "{},{},{}",
            row.svm.sum_h,
            row.svm.sum_d,
            if row.label == crate::features::Label::Success { "+1" } else { "-1" }
        );
    }
    std::fs::write(args.out.join("scatter.csv"), &scatter)
        .map_err(|e| Error::io(args.out.join("scatter.csv"), e))?;

    #[derive(Serialize)]
    struct EvalConfig {
        model: String,
        dataset: String,
        rows: usize,
    }
    let manifest = Manifest {
        tool: "binpick",
        version: env!("CARGO_PKG_VERSION"),
        command: "eval",
        seed: 0,
        config: EvalConfig {
            model: args.model.display().to_string(),
            dataset: args.dataset.display().to_string(),
            rows: rows.len(),
        },
        inputs: input_digests(&[&args.model, &args.dataset])?,
        outputs: vec!["report.txt".into(), "report.csv".into(), "scatter.csv".into()],
    };
    write_json(&args.out.join("manifest.json"), &manifest)?;
    print!("{report}");
    Ok(())
}

fn cmd_pick(args: &PickArgs) -> Result<()> {
    if args.alpha < 0.0 || args.beta < 0.0 {
        return Err(Error::Usage("--alpha and --beta must be nonnegative".into()));
    }
    let partial = load_partial_config(args.config.as_deref())?;
    let mut cfg = merge_config(PipelineConfig::default(), &partial);
    let scene = BinScene::load(&args.scene)?;
    cfg.object = scene.objects[0].0;
    let model = TrainedModel::load(&args.model)?;
    let db = GraspDatabase::load(&args.db)?;
    ensure_out_dir(&args.out)?;

    let (report, scene_indices) = run_pick_selection(
        &scene,
        &db,
        Some(&model),
        &cfg,
        args.alpha,
        args.beta,
        SelectionMode::Execution,
        args.seed,
    )?;

    for t in &report.tiers {
        match (t.evaluated, t.predicted_success) {
            (true, Some(p)) => println!(
                "tier {}: {} candidates, {} reachable, {} predicted success",
                t.tier, t.candidates, t.reachable, p
            ),
            (true, None) => println!(
                "tier {}: {} candidates, {} reachable",
                t.tier, t.candidates, t.reachable
            ),
            (false, _) => println!("tier {}: {} candidates, not evaluated", t.tier, t.candidates),
        }
    }

    #[derive(Serialize)]
    struct ChosenRecord {
        entry_index: usize,
        object_index: usize,
        scene_object_index: usize,
        stability: f64,
        score: f64,
        swept_points: usize,
        pose: crate::geometry::Pose,
    }
    #[derive(Serialize)]
    struct Trace {
        abstained: bool,
        chosen: Option<ChosenRecord>,
        tiers: Vec<crate::plan::TierTrace>,
    }
    let trace = Trace {
        abstained: report.chosen.is_none(),
        chosen: report.chosen.as_ref().map(|sel| ChosenRecord {
            entry_index: sel.candidate.entry_index,
            object_index: sel.candidate.object_index,
            scene_object_index: scene_indices[sel.candidate.object_index],
            stability: sel.candidate.stability,
            score: sel.score,
            swept_points: sel.swept.len(),
            pose: sel.candidate.pose,
        }),
        tiers: report.tiers.clone(),
    };
    write_json(&args.out.join("trace.json"), &trace)?;

    match &trace.chosen {
        Some(c) => println!(
            "chosen: entry {} on scene object {} (stability {:.4}, score {:.6})",
            c.entry_index, c.scene_object_index, c.stability, c.score
        ),
        None => println!("abstained: no reachable candidate predicted successful"),
    }

    #[derive(Serialize)]
    struct PickConfig<'a> {
        scene: String,
        model: String,
        db: String,
        alpha: f64,
        beta: f64,
        pipeline: &'a PipelineConfig,
    }
    let mut inputs: Vec<&Path> = vec![&args.scene, &args.model, &args.db];
    if let Some(p) = args.config.as_deref() {
        inputs.push(p);
    }
    let manifest = Manifest {
        tool: "binpick",
        version: env!("CARGO_PKG_VERSION"),
        command: "pick",
        seed: args.seed,
        config: PickConfig {
            scene: args.scene.display().to_string(),
            model: args.model.display().to_string(),
            db: args.db.display().to_string(),
            alpha: args.alpha,
            beta: args.beta,
            pipeline: &cfg,
        },
        inputs: input_digests(&inputs)?,
        outputs: vec!["trace.json".into()],
    };
    write_json(&args.out.join("manifest.json"), &manifest)?;
    Ok(())
}

fn cmd_gendb(args: &GendbArgs) -> Result<()> {
    let partial = load_partial_config(args.config.as_deref())?;
    let cfg = merge_config(PipelineConfig::default(), &partial);
    let object = parse_object(args.shape, args.dims.as_deref())?.unwrap_or(cfg.object);
    let db = generate_grasp_db(&object, &cfg.gripper, args.size, args.seed)?;
    if let Some(parent) = args.out.parent() {
        if !parent.as_os_str().is_empty() {
            ensure_out_dir(parent)?;
        }
    }
    db.save(&args.out)?;

    #[derive(Serialize)]
    struct GendbConfig<'a> {
        object: &'a ObjectModel,
        gripper: &'a crate::geometry::GripperModel,
        size: usize,
    }
    let manifest = Manifest {
        tool: "binpick",
        version: env!("CARGO_PKG_VERSION"),
        command: "gendb",
        seed: args.seed,
        config: GendbConfig {
            object: &object,
            gripper: &cfg.gripper,
            size: args.size,
        },
        inputs: match args.config.as_deref() {
            Some(p) => input_digests(&[p])?,
            None => Vec::new(),
        },
        outputs: vec![args.out.display().to_string()],
    };
    write_json(&manifest_sibling(&args.out), &manifest)?;
    println!(
        "grasp database for {}: {} entries -> {}",
        db.object,
        db.entries.len(),
        args.out.display()
    );
    Ok(())
}

/// Parses the given argument list and runs the command; returns the process
/// exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version as "errors" with success status
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Dataset(a) => cmd_dataset(a),
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Pick(a) => cmd_pick(a),
        Command::Gendb(a) => cmd_gendb(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Entry point for the binary.
pub fn run() -> i32 {
    run_from(std::env::args_os())
}
