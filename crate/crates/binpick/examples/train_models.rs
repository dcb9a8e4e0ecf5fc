//! Generates an oracle-labeled dataset, trains both discriminators, and
//! prints their confusion matrices on a held-out split.
//!
//! Run with: cargo run --release --example train_models

use binpick::learn::{evaluate, train_forest, train_svm, ForestConfig, TrainedModel, TrainingSet};
use binpick::oracle::{generate_dataset, PipelineConfig};

fn main() -> binpick::Result<()> {
    let cfg = PipelineConfig::default();
    let n_trials = 600;
    let seed = 2024;
    eprintln!("generating {n_trials} labeled trials (seed {seed})...");
    let (rows, stats) = generate_dataset(n_trials, &cfg, seed)?;
    println!(
        "dataset: {} success / {} failure over {} attempts",
        stats.success, stats.failure, stats.attempts
    );

    let split = (rows.len() * 7) / 10;
    let (train_rows, test_rows) = rows.split_at(split);

    let svm_train = TrainingSet::from_dataset_svm(train_rows)?;
    let svm_test = TrainingSet::from_dataset_svm(test_rows)?;
    let svm = TrainedModel::Svm(train_svm(&svm_train, 1.0, 300, seed)?);
    let eval = evaluate(&svm, &svm_test)?;
    println!("\nlinear SVM, held-out ({} rows):", test_rows.len());
    print_eval(&eval);

    let hist_train = TrainingSet::from_dataset_hist(train_rows)?;
    let hist_test = TrainingSet::from_dataset_hist(test_rows)?;
    let forest = TrainedModel::Forest(train_forest(&hist_train, &ForestConfig::default(), seed)?);
    let eval = evaluate(&forest, &hist_test)?;
    println!("\nrandom forest, held-out ({} rows):", test_rows.len());
    print_eval(&eval);
    Ok(())
}

fn print_eval(eval: &binpick::learn::Evaluation) {
    let c = eval.confusion;
    println!("                     identified success   identified failure");
    println!(
        "  picking succeeded  {:>18}   {:>18}",
        c.succeeded_identified_success, c.succeeded_identified_failure
    );
    println!(
        "  picking failed     {:>18}   {:>18}",
        c.failed_identified_success, c.failed_identified_failure
    );
    println!("  accuracy: {:.1}%", 100.0 * eval.accuracy);
    match eval.filtered_success_rate {
        Some(r) => println!("  filtered success rate: {:.1}%", 100.0 * r),
        None => println!("  filtered success rate: n/a (nothing identified as success)"),
    }
    println!("  identified-success rate: {:.1}%", 100.0 * eval.identified_success_rate);
}
