#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sense_core::behavioral::{simulate_random_responses, write_responses};
use sense_core::corpus::{write_text_embeddings, EmbeddingFormat};
use sense_core::fixtures::{correlated_responses, norms_csv, pseudo_embeddings, synthetic_corpus};
use sense_core::nonce::{read_candidates_csv, SurveyPlan};
use sense_core::Modality;

pub const DIM: usize = 16;
pub const VECTOR_SEED: u64 = 99;

pub fn sense(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sense"))
        .args(args)
        .output()
        .expect("sense binary runs")
}

/// Runs `sense` and panics with its stderr unless it exits 0.
pub fn ok(args: &[&str]) -> Output {
    let out = sense(args);
    assert!(
        out.status.success(),
        "sense {} failed ({:?}):\n{}",
        args.join(" "),
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

pub fn p(path: &Path) -> &str {
    path.to_str().expect("utf-8 temp path")
}

pub struct Inputs {
    pub norms: PathBuf,
    pub glove: PathBuf,
    pub seeds: PathBuf,
}

/// A 400-word synthetic corpus and a 200-word seed list drawn from it.
pub fn write_inputs(dir: &Path) -> Inputs {
    let corpus = synthetic_corpus(400, DIM, 7);
    let norms = dir.join("norms.csv");
    fs::write(&norms, norms_csv(&corpus.norms)).unwrap();
    let glove = dir.join("vectors.txt");
    write_text_embeddings(&corpus.embeddings, EmbeddingFormat::GloveText, fs::File::create(&glove).unwrap()).unwrap();
    let seeds = dir.join("seeds.txt");
    let words: String = corpus.norms.keys().take(200).map(|w| format!("{w}\n")).collect();
    fs::write(&seeds, words).unwrap();
    Inputs { norms, glove, seeds }
}

/// Stands in for the external encoder: one generic-TSV row per line of
/// `list`.
pub fn extract(list: &Path, tsv: &Path) {
    let text = fs::read_to_string(list).unwrap();
    let words: Vec<&str> = text.lines().filter(|l| !l.is_empty()).collect();
    let table = pseudo_embeddings(&words, DIM, VECTOR_SEED);
    write_text_embeddings(&table, EmbeddingFormat::GenericTsv, fs::File::create(tsv).unwrap()).unwrap();
}

pub fn read_plan(path: &Path) -> SurveyPlan {
    SurveyPlan::from_json(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Responses correlating with the model scores at `targets[m]` for the
/// listed modalities and random elsewhere.
pub fn write_responses_file(plan: &SurveyPlan, targets: &BTreeMap<Modality, f64>, path: &Path) {
    let mut records: Vec<_> = simulate_random_responses(plan, 60, 5)
        .into_iter()
        .filter(|r| !targets.keys().any(|m| r.question_id.starts_with(&format!("{m}-"))))
        .collect();
    for (&m, &r) in targets {
        records.extend(correlated_responses(plan, m, r, 400, 17).unwrap());
    }
    write_responses(&records, fs::File::create(path).unwrap()).unwrap();
}

pub struct Pipeline {
    pub train: PathBuf,
    pub eval: PathBuf,
    pub nonce: PathBuf,
    pub score: PathBuf,
    pub survey: PathBuf,
    pub rates: PathBuf,
    pub analyze: PathBuf,
}

pub fn replay_targets() -> BTreeMap<Modality, f64> {
    BTreeMap::from([(Modality::Interoceptive, 0.73), (Modality::Auditory, 0.69)])
}

/// Every stage from training to analysis, each writing into its own
/// directory under `root`.
pub fn run_pipeline(inputs: &Inputs, root: &Path) -> Pipeline {
    let d = |name: &str| root.join(name);
    let pl = Pipeline {
        train: d("train"),
        eval: d("eval"),
        nonce: d("nonce"),
        score: d("score"),
        survey: d("survey"),
        rates: d("rates"),
        analyze: d("analyze"),
    };
    ok(&[
        "train", "--embeddings", p(&inputs.glove), "--format", "glove-text", "--norms", p(&inputs.norms),
        "--arch", "all", "--epochs", "30", "--batch-size", "32", "--hidden-sizes", "16,32", "--out", p(&pl.train),
    ]);
    ok(&[
        "eval", "--model", p(&pl.train.join("model-knn.bin")), "--baseline-model", p(&pl.train.join("model-baseline.bin")),
        "--embeddings", p(&inputs.glove), "--format", "glove-text", "--norms", p(&inputs.norms), "--out", p(&pl.eval),
    ]);
    ok(&["nonce", "--seeds", p(&inputs.seeds), "--per-seed", "5", "--rng-seed", "3", "--out", p(&pl.nonce)]);
    let cand_tsv = root.join("candidates.tsv");
    extract(&pl.nonce.join("candidates.txt"), &cand_tsv);
    ok(&[
        "score", "--model", p(&pl.train.join("model-knn.bin")), "--embeddings", p(&cand_tsv),
        "--words", p(&pl.nonce.join("candidates.csv")), "--out", p(&pl.score),
    ]);
    ok(&["survey", "--scores", p(&pl.score.join("scored.csv")), "--rng-seed", "8", "--out", p(&pl.survey)]);
    let plan = read_plan(&pl.survey.join("survey.json"));
    let responses = root.join("responses.csv");
    write_responses_file(&plan, &replay_targets(), &responses);
    ok(&["rates", "--survey", p(&pl.survey.join("survey.json")), "--responses", p(&responses), "--out", p(&pl.rates)]);

    let scored = read_candidates_csv(fs::File::open(pl.score.join("scored.csv")).unwrap()).unwrap();
    assert!(!scored.is_empty());
    ok(&[
        "sublexical", "--rates", p(&pl.rates.join("rates.csv")), "--modalities", "interoceptive,auditory",
        "--out", p(&root.join("grams")),
    ]);
    let gram_tsv = root.join("grams.tsv");
    extract(&root.join("grams").join("grams.txt"), &gram_tsv);
    ok(&[
        "analyze", "--survey", p(&pl.survey.join("survey.json")), "--rates", p(&pl.rates.join("rates.csv")),
        "--modalities", "interoceptive,auditory", "--model", p(&pl.train.join("model-knn.bin")),
        "--gram-embeddings", p(&gram_tsv), "--out", p(&pl.analyze),
    ]);
    pl
}

/// Parses a stamped CSV into rows of fields, skipping the hash comment and
/// the header.
pub fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}
