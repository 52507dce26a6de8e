mod commands;
mod failure;
mod outputs;
mod settings;

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::SystemTime;

use clap::{Arg, ArgAction, ArgMatches, Command};
use sense_core::kv::{read_kv, KvMap};

use crate::failure::{invalid, CmdResult};
use crate::settings::Settings;

#[derive(Clone, Copy)]
enum Kind {
    Value,
    Repeated,
    Switch,
}

struct Opt {
    key: &'static str,
    kind: Kind,
    help: &'static str,
}

const fn v(key: &'static str, help: &'static str) -> Opt {
    Opt { key, kind: Kind::Value, help }
}

const OUT: Opt = v("out", "output directory");

const EMBEDDING_OPTS: [Opt; 5] = [
    v("embeddings", "embedding file"),
    v("format", "word2vec-binary | glove-text | generic-tsv [word2vec-binary]"),
    Opt {
        key: "intersect",
        kind: Kind::Repeated,
        help: "FORMAT:PATH of another embedding file; items are restricted to words every file covers",
    },
    v("norms", "sensorimotor norms CSV"),
    v("norms-header", "key-value file overriding norms column names"),
];

const SUBLEXICAL_OPTS: [Opt; 8] = [
    v("modalities", "comma-separated modalities to analyse [interoceptive]"),
    v("ngram-min", "shortest gram [2]"),
    v("ngram-max", "longest gram [4]"),
    v("min-support", "minimum number of containing words [3]"),
    v("model", "model container used to score grams"),
    v("gram-embeddings", "embedding file covering the grams"),
    v("gram-format", "format of --gram-embeddings [generic-tsv]"),
    Opt {
        key: "skip-missing-grams",
        kind: Kind::Switch,
        help: "drop grams without an embedding instead of failing",
    },
];

struct Spec {
    name: &'static str,
    about: &'static str,
    opts: Vec<&'static Opt>,
}

fn specs() -> Vec<Spec> {
    static TRAIN: [Opt; 8] = [
        v("arch", "all | baseline | knn | mlp [all]"),
        v("split-seed", "seed of the 70/15/15 split [0]"),
        v("train-seed", "seed of MLP initialisation and batch order [0]"),
        v("k", "neighbours for kNN [5]"),
        v("epochs", "MLP epochs [10]"),
        v("learning-rate", "Adam step size [0.001]"),
        v("batch-size", "mini-batch size [128]"),
        v("hidden-sizes", "comma-separated MLP widths tried on dev [64,128]"),
    ];
    static EVAL: [Opt; 4] = [
        v("model", "model container to evaluate"),
        v("baseline-model", "baseline container for paired t-tests"),
        v("split-seed", "split seed [taken from the model]"),
        v("partition", "test | dev | train | all [test]"),
    ];
    static SCORE: [Opt; 4] = [
        v("model", "model container"),
        v("embeddings", "embedding file covering the words"),
        v("format", "embedding format [generic-tsv]"),
        v("words", "candidates CSV from `nonce`, or a plain word list"),
    ];
    static NONCE: [Opt; 5] = [
        v("seeds", "seed word list, one per line"),
        v("lexicon", "lexicon for the novelty filters [the seed list]"),
        v("per-seed", "candidates generated per seed word [10]"),
        v("overlap", "share of segments kept from the seed, as a fraction or ratio [2/3]"),
        v("rng-seed", "generation seed [0]"),
    ];
    static SURVEY: [Opt; 5] = [
        v("scores", "scored candidates CSV from `score`"),
        v("min-score", "target threshold [0.5]"),
        v("top-n", "targets ranked per modality [12]"),
        v("rng-seed", "survey seed [0]"),
        v("phrases", "key-value file of modality = prompt phrase overrides"),
    ];
    static RATES: [Opt; 2] = [
        v("survey", "survey.json from `survey`"),
        v("responses", "responses CSV: participant_id,question_id,sel1,sel2,sel3"),
    ];
    static SUBLEXICAL: [Opt; 1] = [v("rates", "rates.csv from `rates`")];
    static ANALYZE: [Opt; 3] = [
        v("survey", "survey.json from `survey`"),
        v("rates", "rates.csv from `rates`"),
        v("expected-words", "words per modality to warn about [28]"),
    ];

    let with = |own: &'static [Opt], shared: &'static [Opt]| -> Vec<&'static Opt> {
        own.iter().chain(shared).chain(std::iter::once(&OUT)).collect()
    };
    vec![
        Spec {
            name: "train",
            about: "Train projection models and report test-set error",
            opts: with(&TRAIN, &EMBEDDING_OPTS),
        },
        Spec {
            name: "eval",
            about: "Evaluate a saved model on a partition of the aligned corpus",
            opts: with(&EVAL, &EMBEDDING_OPTS),
        },
        Spec {
            name: "score",
            about: "Predict sensorimotor norms for a list of words",
            opts: with(&SCORE, &[]),
        },
        Spec {
            name: "nonce",
            about: "Generate nonce-word candidates and apply the novelty filters",
            opts: with(&NONCE, &[]),
        },
        Spec {
            name: "survey",
            about: "Rank scored candidates and build the survey plan",
            opts: with(&SURVEY, &[]),
        },
        Spec {
            name: "rates",
            about: "Compute per-word selection rates from survey responses",
            opts: with(&RATES, &[]),
        },
        Spec {
            name: "sublexical",
            about: "Extract, rate and optionally score character n-grams",
            opts: with(&SUBLEXICAL, &SUBLEXICAL_OPTS),
        },
        Spec {
            name: "analyze",
            about: "Correlate selection rates with model scores, then run the sublexical analysis",
            opts: with(&ANALYZE, &SUBLEXICAL_OPTS),
        },
    ]
}

fn cli(specs: &[Spec]) -> Command {
    let mut cmd = Command::new("sense")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Sensorimotor projection of word embeddings and the nonce-word study pipeline")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .arg(
            Arg::new("config")
                .long("config")
                .global(true)
                .value_name("FILE")
                .help("key = value file; keys are the long flag names, flags win"),
        )
        .arg(
            Arg::new("verbose")
                .short('v')
                .long("verbose")
                .global(true)
                .action(ArgAction::Count)
                .help("more log output (repeatable)"),
        );
    for spec in specs {
        let mut sub = Command::new(spec.name).about(spec.about);
        for opt in &spec.opts {
            let arg = Arg::new(opt.key).long(opt.key).help(opt.help);
            sub = sub.arg(match opt.kind {
                Kind::Value => arg.value_name("VALUE"),
                Kind::Repeated => arg.value_name("VALUE").action(ArgAction::Append),
                Kind::Switch => arg.action(ArgAction::SetTrue),
            });
        }
        cmd = cmd.subcommand(sub);
    }
    cmd
}

/// Values the user typed on the command line; defaults and absent flags are
/// left to the config file and the command.
fn flag_values(spec: &Spec, m: &ArgMatches) -> KvMap {
    let mut out = KvMap::new();
    for opt in &spec.opts {
        if m.value_source(opt.key) != Some(clap::parser::ValueSource::CommandLine) {
            continue;
        }
        let value = match opt.kind {
            Kind::Switch => m.get_flag(opt.key).to_string(),
            _ => m
                .get_many::<String>(opt.key)
                .map(|vals| vals.cloned().collect::<Vec<_>>().join(","))
                .unwrap_or_default(),
        };
        out.insert(opt.key.to_string(), value);
    }
    out
}

fn config_file(m: &ArgMatches, specs: &[Spec]) -> CmdResult<KvMap> {
    let Some(path) = m.get_one::<String>("config").map(PathBuf::from) else {
        return Ok(KvMap::new());
    };
    let map = read_kv(&path).map_err(|e| invalid(format!("config file {}: {e}", path.display())))?;
    let known: BTreeSet<&str> = specs.iter().flat_map(|s| s.opts.iter().map(|o| o.key)).collect();
    if let Some(bad) = map.keys().find(|k| !known.contains(k.as_str())) {
        return Err(invalid(format!("config file {}: unknown key `{bad}`", path.display())));
    }
    Ok(map)
}

fn run(specs: &[Spec], matches: &ArgMatches) -> CmdResult<()> {
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    let spec = specs.iter().find(|s| s.name == name).expect("known subcommand");
    let file = config_file(sub, specs)?;
    let mut settings = Settings::new(name, file, flag_values(spec, sub));
    let started = SystemTime::now();
    let out = commands::run(&mut settings)?;
    out.finish(&settings, started)
}

fn main() -> ExitCode {
    let specs = specs();
    let matches = match cli(&specs).try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let level = match matches.subcommand().map_or(0, |(_, m)| m.get_count("verbose")) {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(&specs, &matches) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
