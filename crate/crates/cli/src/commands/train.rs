use std::fmt::Write as _;

use sense_core::corpus::split;
use sense_core::models::{save_model, train_baseline, train_mlp, Architecture, KnnModel, ProjectionModel, TrainConfig, DEFAULT_K};
use sense_core::stats::report::{mse_csv, mse_table, paired_tests_csv};
use sense_core::stats::{mse_report, squared_errors};
use serde_json::json;

use super::data::CorpusSpec;
use super::{bar_chart_csv, paired_rows, predict, predictions_csv};
use crate::failure::{invalid, CmdResult, StageExt};
use crate::outputs::Outputs;
use crate::settings::Settings;

pub fn run(s: &mut Settings) -> CmdResult<Outputs> {
    let corpus = CorpusSpec::from_settings(s)?;
    let archs = match s.text("arch", "all").as_str() {
        "all" => Architecture::ALL.to_vec(),
        one => vec![one.parse::<Architecture>().map_err(invalid)?],
    };
    let split_seed: u64 = s.parse("split-seed", "0")?;
    let k: usize = s.parse("k", &DEFAULT_K.to_string())?;
    if k == 0 {
        return Err(invalid("`k` must be positive"));
    }
    let config = TrainConfig {
        learning_rate: s.parse("learning-rate", "0.001")?,
        epochs: s.parse("epochs", "10")?,
        batch_size: s.parse("batch-size", "128")?,
        seed: s.parse("train-seed", "0")?,
        hidden_sizes: s.list("hidden-sizes", "64,128")?,
        ..TrainConfig::default()
    };
    config.validate().map_err(invalid)?;
    let out_dir = s.out_dir()?;
    let mut out = Outputs::create(&out_dir, &s.config_hash())?;

    let (data, summary) = corpus.load()?;
    let parts = split(data.len(), split_seed).stage("splitting corpus")?;
    let train = data.examples(&parts.train);
    let dev = data.examples(&parts.dev);
    let test = data.examples(&parts.test);
    let test_entries: Vec<&str> = parts.test.iter().map(|&i| data.items[i].entry.as_str()).collect();

    let mut reports = Vec::new();
    let mut errors = Vec::new();
    for arch in archs {
        log::info!("training {arch} on {} items", train.len());
        let stage = format!("training {arch}");
        let (model, training) = match arch {
            Architecture::Baseline => (ProjectionModel::Baseline(train_baseline(&train, data.dim).stage(&stage)?), None),
            Architecture::Knn => (ProjectionModel::Knn(KnnModel::fit(&train, data.dim, k).stage(&stage)?), None),
            Architecture::Mlp => {
                let (m, report) = train_mlp(&train, &dev, data.dim, &config).stage(&stage)?;
                (ProjectionModel::Mlp(m), Some(report))
            }
        };
        let predictions = predict(&model, &test.inputs, "the test set")?;
        let report = mse_report(&predictions, &test.targets).stage("scoring the test set")?;
        errors.push((arch, squared_errors(&predictions, &test.targets).stage("scoring the test set")?));

        let metadata = json!({
            "config_hash": out.hash(),
            "split_seed": split_seed,
            "items": data.len(),
            "test_mse_avg": report.avg,
            "training": training,
            "train_config": (arch == Architecture::Mlp).then(|| config.clone()),
        });
        out.raw(&format!("model-{arch}.bin"), &save_model(&model, &metadata))?;
        out.stamped(&format!("mse-{arch}.csv"), &mse_csv(&report))?;
        out.stamped(&format!("predictions-{arch}.csv"), &predictions_csv(&test_entries, &predictions))?;
        if let Some(t) = training {
            out.json("training-mlp.json", serde_json::to_value(t).expect("report serializes"))?;
        }
        reports.push((arch, report));
    }

    let columns: Vec<(&str, _)> = reports.iter().map(|(a, r)| (a.key(), r)).collect();
    out.stamped("table.txt", &mse_table(&columns))?;
    out.stamped("bars.csv", &bar_chart_csv(&reports))?;
    if let Some((_, base)) = errors.iter().find(|(a, _)| *a == Architecture::Baseline) {
        for (arch, e) in errors.iter().filter(|(a, _)| *a != Architecture::Baseline) {
            out.stamped(&format!("ttest-{arch}-vs-baseline.csv"), &paired_tests_csv(&paired_rows(base, e)?))?;
        }
    }
    out.stamped("split.csv", &split_csv(&data.items, &parts))?;
    out.json("corpus.json", summary)?;
    Ok(out)
}

fn split_csv(items: &[sense_core::corpus::AlignedItem], parts: &sense_core::corpus::DataSplit) -> String {
    let mut out = String::from("entry,partition\n");
    for (name, idx) in [("train", &parts.train), ("dev", &parts.dev), ("test", &parts.test)] {
        for &i in idx {
            let _ = writeln!(out, "{},{name}", super::csv_field(&items[i].entry));
        }
    }
    out
}
