use sense_core::corpus::split;
use sense_core::models::{Architecture, Projection};
use sense_core::stats::report::{mse_csv, mse_table, paired_tests_csv};
use sense_core::stats::{mse_report, squared_errors};

use super::data::{load_model_file, CorpusSpec};
use super::{bar_chart_csv, paired_rows, predict, predictions_csv};
use crate::failure::{invalid, CmdResult, Failure, StageExt};
use crate::outputs::Outputs;
use crate::settings::Settings;

pub fn run(s: &mut Settings) -> CmdResult<Outputs> {
    let model_path = s.input("model")?;
    let baseline_path = s.opt_input("baseline-model")?;
    let corpus = CorpusSpec::from_settings(s)?;
    let (model, metadata) = load_model_file(&model_path)?;
    let from_model = metadata.get("split_seed").and_then(|v| v.as_u64());
    let split_seed: u64 = match (s.opt_parse("split-seed")?, from_model) {
        (Some(seed), _) => seed,
        (None, Some(seed)) => {
            s.text("split-seed", &seed.to_string());
            seed
        }
        (None, None) => return Err(invalid("the model records no split seed; pass --split-seed")),
    };
    let partition = s.text("partition", "test");
    if !["test", "dev", "train", "all"].contains(&partition.as_str()) {
        return Err(invalid(format!("unknown partition `{partition}`")));
    }
    let out_dir = s.out_dir()?;
    let mut out = Outputs::create(&out_dir, &s.config_hash())?;

    let (data, summary) = corpus.load()?;
    if model.dim() != data.dim {
        return Err(Failure::Runtime(anyhow::anyhow!(
            "{} expects {}-dimensional inputs but the embeddings have {}",
            model_path.display(),
            model.dim(),
            data.dim
        )));
    }
    let parts = split(data.len(), split_seed).stage("splitting corpus")?;
    let indices: Vec<usize> = match partition.as_str() {
        "test" => parts.test,
        "dev" => parts.dev,
        "train" => parts.train,
        _ => (0..data.len()).collect(),
    };
    let examples = data.examples(&indices);
    let entries: Vec<&str> = indices.iter().map(|&i| data.items[i].entry.as_str()).collect();

    let arch = model.architecture();
    let predictions = predict(&model, &examples.inputs, &partition)?;
    let report = mse_report(&predictions, &examples.targets).stage("scoring predictions")?;
    out.stamped(&format!("mse-{arch}.csv"), &mse_csv(&report))?;
    out.stamped(&format!("predictions-{arch}.csv"), &predictions_csv(&entries, &predictions))?;
    let mut reports = vec![(arch, report)];

    if let Some(path) = baseline_path {
        let (baseline, _) = load_model_file(&path)?;
        if baseline.architecture() != Architecture::Baseline {
            return Err(Failure::Runtime(anyhow::anyhow!(
                "{} holds a {} model, not a baseline",
                path.display(),
                baseline.architecture()
            )));
        }
        let base_pred = predict(&baseline, &examples.inputs, &partition)?;
        let base_err = squared_errors(&base_pred, &examples.targets).stage("scoring predictions")?;
        let model_err = squared_errors(&predictions, &examples.targets).stage("scoring predictions")?;
        out.stamped(
            &format!("ttest-{arch}-vs-baseline.csv"),
            &paired_tests_csv(&paired_rows(&base_err, &model_err)?),
        )?;
        reports.insert(0, (Architecture::Baseline, mse_report(&base_pred, &examples.targets).stage("scoring predictions")?));
    }
    let columns: Vec<(&str, _)> = reports.iter().map(|(a, r)| (a.key(), r)).collect();
    out.stamped("table.txt", &mse_table(&columns))?;
    out.stamped("bars.csv", &bar_chart_csv(&reports))?;
    out.json("corpus.json", summary)?;
    Ok(out)
}
