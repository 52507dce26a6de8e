mod common;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use common::*;
use sense_core::behavioral::{plan_scores, SelectionRateTable};
use sense_core::Modality;

fn snapshot(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else if path.file_name().unwrap() != "run.meta.json" {
                let key = path.strip_prefix(root).unwrap().display().to_string();
                out.insert(key, fs::read(&path).unwrap());
            }
        }
    }
    out
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    sxy / (sxx * syy).sqrt()
}

#[test]
fn pipeline_is_fast_complete_and_byte_identical_on_rerun() {
    let tmp = tempfile::tempdir().unwrap();
    let inputs = write_inputs(tmp.path());
    let root = tmp.path().join("run");

    let start = Instant::now();
    let pl = run_pipeline(&inputs, &root);
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 60, "pipeline took {elapsed:?}");

    let plan = read_plan(&pl.survey.join("survey.json"));
    assert_eq!(plan.questions.len(), 44);
    plan.validate().unwrap();
    for dir in [&pl.train, &pl.nonce, &pl.score, &pl.survey, &pl.rates, &pl.analyze] {
        assert!(dir.join("manifest.json").exists() && dir.join("run.meta.json").exists());
    }

    let first = snapshot(&root);
    fs::remove_dir_all(&root).unwrap();
    run_pipeline(&inputs, &root);
    let second = snapshot(&root);
    assert_eq!(first.keys().collect::<Vec<_>>(), second.keys().collect::<Vec<_>>());
    for (name, bytes) in &first {
        assert!(bytes == &second[name], "{name} differs between runs");
    }
}

#[test]
fn every_output_carries_the_config_hash() {
    let tmp = tempfile::tempdir().unwrap();
    let inputs = write_inputs(tmp.path());
    let pl = run_pipeline(&inputs, &tmp.path().join("run"));
    for dir in [&pl.train, &pl.nonce, &pl.score, &pl.survey, &pl.rates, &pl.analyze] {
        let manifest: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
        let hash = manifest["config_hash"].as_str().unwrap();
        assert_eq!(hash.len(), 64);
        let meta = fs::read_to_string(dir.join("run.meta.json")).unwrap();
        assert!(meta.contains(hash));
        for name in manifest["outputs"].as_object().unwrap().keys() {
            // plain word lists are read line by line by the external encoder
            if name == "candidates.txt" || name == "grams.txt" {
                continue;
            }
            let bytes = fs::read(dir.join(name)).unwrap();
            let text = String::from_utf8_lossy(&bytes);
            assert!(text.contains(hash), "{} lacks the config hash", dir.join(name).display());
        }
    }
}

#[test]
fn baseline_report_matches_independent_oracle() {
    let tmp = tempfile::tempdir().unwrap();
    let inputs = write_inputs(tmp.path());
    let out = tmp.path().join("train");
    ok(&[
        "train", "--embeddings", p(&inputs.glove), "--format", "glove-text", "--norms", p(&inputs.norms),
        "--arch", "baseline", "--split-seed", "5", "--out", p(&out),
    ]);
    let norms = sense_core::corpus::load_norms_csv(&inputs.norms, &Default::default()).unwrap().entries;
    let mut train = Vec::new();
    let mut test = Vec::new();
    for row in csv_rows(&out.join("split.csv")) {
        let v = norms[&row[0]];
        match row[1].as_str() {
            "train" => train.push(v),
            "test" => test.push(v),
            _ => {}
        }
    }
    assert_eq!(train.len() + test.len(), 400 - 60);
    let mut avg = 0.0;
    for m in Modality::ALL {
        let mean = train.iter().map(|v| v[m]).sum::<f64>() / train.len() as f64;
        avg += test.iter().map(|v| (v[m] - mean).powi(2)).sum::<f64>() / test.len() as f64;
    }
    avg /= 11.0;
    let rows = csv_rows(&out.join("mse-baseline.csv"));
    let reported: f64 = rows.iter().find(|r| r[0] == "average").unwrap()[1].parse().unwrap();
    assert!((reported - avg).abs() < 1e-12, "{reported} vs {avg}");
}

#[test]
fn arch_all_writes_three_reports_with_baseline_worst() {
    let tmp = tempfile::tempdir().unwrap();
    let inputs = write_inputs(tmp.path());
    let out = tmp.path().join("train");
    ok(&[
        "train", "--embeddings", p(&inputs.glove), "--format", "glove-text", "--norms", p(&inputs.norms),
        "--epochs", "60", "--batch-size", "32", "--learning-rate", "0.005", "--hidden-sizes", "32", "--out", p(&out),
    ]);
    let avg = |arch: &str| -> f64 {
        let rows = csv_rows(&out.join(format!("mse-{arch}.csv")));
        rows.iter().find(|r| r[0] == "average").unwrap()[1].parse().unwrap()
    };
    let (b, k, m) = (avg("baseline"), avg("knn"), avg("mlp"));
    assert!(b > k && b > m, "baseline {b}, knn {k}, mlp {m}");
    let table = fs::read_to_string(out.join("table.txt")).unwrap();
    assert!(table.contains("MSE_avg") && table.contains("baseline") && table.contains("mlp"));
    assert_eq!(csv_rows(&out.join("bars.csv")).len(), 33);
    assert_eq!(csv_rows(&out.join("ttest-mlp-vs-baseline.csv")).len(), 12);

    let eval = tmp.path().join("eval");
    ok(&[
        "eval", "--model", p(&out.join("model-mlp.bin")), "--baseline-model", p(&out.join("model-baseline.bin")),
        "--embeddings", p(&inputs.glove), "--format", "glove-text", "--norms", p(&inputs.norms), "--out", p(&eval),
    ]);
    assert_eq!(
        fs::read_to_string(eval.join("mse-mlp.csv")).unwrap().lines().skip(1).collect::<Vec<_>>(),
        fs::read_to_string(out.join("mse-mlp.csv")).unwrap().lines().skip(1).collect::<Vec<_>>()
    );
}

#[test]
fn analyze_recovers_fixture_correlations() {
    let tmp = tempfile::tempdir().unwrap();
    let inputs = write_inputs(tmp.path());
    let pl = run_pipeline(&inputs, &tmp.path().join("run"));
    let plan = read_plan(&pl.survey.join("survey.json"));
    let scores = plan_scores(&plan);
    let text = fs::read_to_string(pl.rates.join("rates.csv")).unwrap();
    let table = SelectionRateTable::from_csv(text.as_bytes()).unwrap();

    let rows = csv_rows(&pl.analyze.join("correlations.csv"));
    for (m, target) in replay_targets() {
        let rates = table.rates(m);
        let x: Vec<f64> = rates.values().copied().collect();
        let y: Vec<f64> = rates.keys().map(|w| scores[*w][m]).collect();
        let oracle = pearson(&x, &y);
        let row = rows.iter().find(|r| r[0] == m.key()).unwrap();
        let r: f64 = row[2].parse().unwrap();
        assert_eq!(row[1], "28");
        assert!((r - oracle).abs() < 1e-12);
        assert!((r - target).abs() < 0.01, "{m}: {r}");
    }
    assert!(pl.analyze.join("sublexical.csv").exists());
    assert!(pl.analyze.join("grams-interoceptive.csv").exists());
}

#[test]
fn missing_upstream_artifact_names_the_expected_file() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("score").join("scored.csv");
    let out = sense(&["survey", "--scores", p(&missing), "--out", p(&tmp.path().join("s"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains(p(&missing)));
    assert!(!tmp.path().join("s").exists());
}

#[test]
fn exit_codes_separate_validation_from_runtime_failures() {
    let tmp = tempfile::tempdir().unwrap();
    let inputs = write_inputs(tmp.path());
    let out = tmp.path().join("o");
    let bad_value = sense(&["nonce", "--seeds", p(&inputs.seeds), "--overlap", "3/2", "--out", p(&out)]);
    assert_eq!(bad_value.status.code(), Some(1));
    let unknown_flag = sense(&["nonce", "--sedes", "x"]);
    assert_eq!(unknown_flag.status.code(), Some(1));

    let corrupt = tmp.path().join("model.bin");
    fs::write(&corrupt, b"not a model").unwrap();
    let runtime = sense(&[
        "score", "--model", p(&corrupt), "--embeddings", p(&inputs.glove), "--words", p(&inputs.seeds), "--out", p(&out),
    ]);
    assert_eq!(runtime.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&runtime.stderr);
    assert!(stderr.contains("decoding model"), "{stderr}");
    assert_eq!(sense(&["--help"]).status.code(), Some(0));
}

#[test]
fn flags_override_the_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let inputs = write_inputs(tmp.path());
    let config = tmp.path().join("run.conf");
    fs::write(&config, format!("seeds = {}\nrng-seed = 1\nper-seed = 3\n", p(&inputs.seeds))).unwrap();
    let out = tmp.path().join("nonce");
    ok(&["nonce", "--config", p(&config), "--rng-seed", "2", "--out", p(&out)]);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["settings"]["rng-seed"], "2");
    assert_eq!(manifest["settings"]["per-seed"], "3");
    assert_eq!(manifest["settings"]["overlap"], "2/3");

    fs::write(&config, "sedes = x\n").unwrap();
    let typo = sense(&["nonce", "--config", p(&config), "--out", p(&out)]);
    assert_eq!(typo.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&typo.stderr).contains("unknown key `sedes`"));
}
