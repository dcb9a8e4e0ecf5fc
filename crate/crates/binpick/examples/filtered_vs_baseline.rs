//! Compares the oracle-measured pick success rate of discriminator-filtered
//! execution against the undiscriminating baseline (alpha = beta = 0, no
//! model, "just pick something feasible").
//!
//! Run with: cargo run --release --example filtered_vs_baseline

use binpick::learn::{train_forest, ForestConfig, TrainedModel, TrainingSet};
use binpick::oracle::{generate_dataset, run_experiment, PipelineConfig};
use binpick::plan::generate_grasp_db;
use binpick::rng::derive_seed;

fn main() -> binpick::Result<()> {
    let cfg = PipelineConfig::default();
    let seed = 7;
    let train_trials = 400;
    let eval_trials = 200;

    eprintln!("collecting {train_trials} training trials...");
    let (rows, stats) = generate_dataset(train_trials, &cfg, seed)?;
    println!(
        "training data: {} success / {} failure",
        stats.success, stats.failure
    );
    let set = TrainingSet::from_dataset_hist(&rows)?;
    let model = TrainedModel::Forest(train_forest(&set, &ForestConfig::default(), seed)?);

    let db = generate_grasp_db(&cfg.object, &cfg.gripper, cfg.db_size, derive_seed(seed, 0))?;

    eprintln!("running {eval_trials} baseline trials...");
    let baseline = run_experiment(&cfg, &db, None, 0.0, 0.0, eval_trials, derive_seed(seed, 1))?;
    eprintln!("running {eval_trials} filtered trials...");
    let filtered = run_experiment(
        &cfg,
        &db,
        Some(&model),
        1.0,
        1.0,
        eval_trials,
        derive_seed(seed, 1),
    )?;

    println!("\nbaseline (no discriminator, alpha = beta = 0):");
    report(&baseline);
    println!("\nfiltered (random forest, alpha = beta = 1):");
    report(&filtered);
    println!(
        "\nimprovement: {:+.1} percentage points",
        100.0 * (filtered.success_rate() - baseline.success_rate())
    );
    Ok(())
}

fn report(stats: &binpick::oracle::ExperimentStats) {
    println!(
        "  attempted {} of {} trials ({} abstained), {} succeeded ({:.1}%)",
        stats.attempted,
        stats.trials,
        stats.abstained,
        stats.succeeded,
        100.0 * stats.success_rate()
    );
}
