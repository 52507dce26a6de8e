//! Survey responses, per-word selection rates, and their correlation with
//! model scores.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::RejectedRow;
use crate::nonce::{OptionRole, SurveyPlan, TARGETS_PER_QUESTION};
use crate::stats::{pearson, CorrelationResult, StatsError};
use crate::{Modality, SensorimotorVector};

pub const RESPONSE_COLUMNS: [&str; 5] = ["participant_id", "question_id", "sel1", "sel2", "sel3"];

#[derive(Debug, thiserror::Error)]
pub enum BehavioralError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("response file lacks column `{0}`")]
    MissingColumn(String),
    #[error("rates file line {line}: {reason}")]
    BadRate { line: u64, reason: String },
    #[error("no score for `{0}`")]
    MissingScore(String),
    #[error("{modality}: {source}")]
    Correlation {
        modality: Modality,
        #[source]
        source: StatsError,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseRecord {
    pub participant_id: String,
    pub question_id: String,
    pub selected: [String; TARGETS_PER_QUESTION],
}

#[derive(Debug, Clone, Default)]
pub struct ResponseLoad {
    pub records: Vec<ResponseRecord>,
    pub rejected: Vec<RejectedRow>,
}

/// Parses a response CSV and validates every row against `plan`.
///
/// A row is rejected, with its line number, when it does not select exactly
/// three distinct options, names an unknown question, selects an option the
/// question does not offer, or repeats an earlier (participant, question).
pub fn read_responses<R: Read>(reader: R, plan: &SurveyPlan) -> Result<ResponseLoad, BehavioralError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).comment(Some(b'#')).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let mut cols = [0usize; 5];
    for (slot, name) in cols.iter_mut().zip(RESPONSE_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| BehavioralError::MissingColumn(name.to_string()))?;
    }

    let mut out = ResponseLoad::default();
    let mut answered: HashSet<(String, String)> = HashSet::new();
    for record in rdr.records() {
        let record = record?;
        let row = record.position().map_or(0, |p| p.line());
        let field = |i: usize| record.get(cols[i]).map(str::trim).unwrap_or("");
        let reject = |reason: String| RejectedRow { row, reason };
        let (participant, question_id) = (field(0), field(1));
        let picks: Vec<&str> = (2..5).map(field).filter(|s| !s.is_empty()).collect();
        let distinct: HashSet<&str> = picks.iter().copied().collect();
        if participant.is_empty() {
            out.rejected.push(reject("empty participant_id".into()));
            continue;
        }
        if distinct.len() != TARGETS_PER_QUESTION || picks.len() != TARGETS_PER_QUESTION {
            out.rejected.push(reject(format!("expected 3 distinct selections, found {}", distinct.len())));
            continue;
        }
        let Some(question) = plan.question(question_id) else {
            out.rejected.push(reject(format!("unknown question `{question_id}`")));
            continue;
        };
        if let Some(bad) = picks.iter().find(|p| question.option(p).is_none()) {
            out.rejected.push(reject(format!("`{bad}` is not an option of {question_id}")));
            continue;
        }
        if !answered.insert((participant.to_string(), question_id.to_string())) {
            out.rejected.push(reject(format!("duplicate answer by `{participant}` to {question_id}")));
            continue;
        }
        out.records.push(ResponseRecord {
            participant_id: participant.to_string(),
            question_id: question_id.to_string(),
            selected: [picks[0].to_string(), picks[1].to_string(), picks[2].to_string()],
        });
    }
    Ok(out)
}

pub fn load_responses(path: &Path, plan: &SurveyPlan) -> Result<ResponseLoad, BehavioralError> {
    let file = std::fs::File::open(path).map_err(|source| BehavioralError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_responses(file, plan)
}

pub fn write_responses<W: Write>(records: &[ResponseRecord], writer: W) -> Result<(), BehavioralError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(RESPONSE_COLUMNS)?;
    for r in records {
        w.write_record([&r.participant_id, &r.question_id, &r.selected[0], &r.selected[1], &r.selected[2]])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Participants who pick three of the seven options uniformly at random,
/// each answering the questions the plan's assignment rule gives them.
pub fn simulate_random_responses(plan: &SurveyPlan, participants: usize, seed: u64) -> Vec<ResponseRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for p in 0..participants {
        for id in plan.questions_for(p) {
            let q = plan.question(id).expect("assigned question exists");
            let picks: Vec<&str> = q
                .options
                .choose_multiple(&mut rng, TARGETS_PER_QUESTION)
                .map(|o| o.text.as_str())
                .collect();
            out.push(ResponseRecord {
                participant_id: format!("p{p:04}"),
                question_id: id.to_string(),
                selected: [picks[0].into(), picks[1].into(), picks[2].into()],
            });
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RateCell {
    pub selections: u64,
    pub exposures: u64,
}

impl RateCell {
    pub fn rate(&self) -> f64 {
        self.selections as f64 / self.exposures as f64
    }
}

/// Selection rate of each (word, modality) pair the survey showed.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SelectionRateTable {
    pub cells: BTreeMap<Modality, BTreeMap<String, RateCell>>,
}

impl SelectionRateTable {
    pub fn cell(&self, word: &str, m: Modality) -> Option<RateCell> {
        self.cells.get(&m)?.get(word).copied()
    }

    pub fn rate(&self, word: &str, m: Modality) -> Option<f64> {
        self.cell(word, m).map(|c| c.rate())
    }

    /// Words rated under `m`, sorted.
    pub fn words(&self, m: Modality) -> Vec<&str> {
        self.cells.get(&m).map(|c| c.keys().map(String::as_str).collect()).unwrap_or_default()
    }

    pub fn rates(&self, m: Modality) -> BTreeMap<&str, f64> {
        self.cells
            .get(&m)
            .map(|c| c.iter().map(|(w, cell)| (w.as_str(), cell.rate())).collect())
            .unwrap_or_default()
    }

    /// Mean rate over every word shown under `m`.
    pub fn base_rate(&self, m: Modality) -> Option<f64> {
        let rates = self.rates(m);
        (!rates.is_empty()).then(|| rates.values().sum::<f64>() / rates.len() as f64)
    }

    /// `modality,word,selections,exposures,rate`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("modality,word,selections,exposures,rate\n");
        for (m, words) in &self.cells {
            for (w, c) in words {
                let _ = writeln!(out, "{m},{w},{},{},{}", c.selections, c.exposures, c.rate());
            }
        }
        out
    }

    pub fn from_csv<R: Read>(reader: R) -> Result<Self, BehavioralError> {
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(reader);
        let mut table = SelectionRateTable::default();
        for record in rdr.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line());
            let bad = |reason: &str| BehavioralError::BadRate {
                line,
                reason: reason.to_string(),
            };
            let m: Modality = record.get(0).unwrap_or("").parse().map_err(|_| bad("unknown modality"))?;
            let word = record.get(1).filter(|w| !w.is_empty()).ok_or_else(|| bad("missing word"))?;
            let num = |i: usize| record.get(i).and_then(|v| v.parse::<u64>().ok()).ok_or_else(|| bad("bad count"));
            let cell = RateCell {
                selections: num(2)?,
                exposures: num(3)?,
            };
            if cell.exposures == 0 || cell.selections > cell.exposures {
                return Err(bad("selections must lie in [0, exposures] with exposures > 0"));
            }
            table.cells.entry(m).or_default().insert(word.to_string(), cell);
        }
        Ok(table)
    }
}

/// Rates per exposure: for each word shown under modality `m`, the share of
/// responses to questions offering it that selected it. Words no record was
/// exposed to are omitted and returned as `(modality, word)`.
pub fn selection_rates(
    records: &[ResponseRecord],
    plan: &SurveyPlan,
) -> (SelectionRateTable, Vec<(Modality, String)>) {
    let mut by_question: HashMap<&str, Vec<&ResponseRecord>> = HashMap::new();
    for r in records {
        by_question.entry(r.question_id.as_str()).or_default().push(r);
    }
    let mut table = SelectionRateTable::default();
    for q in &plan.questions {
        let answers = by_question.get(q.id.as_str()).map(Vec::as_slice).unwrap_or_default();
        let cells = table.cells.entry(q.modality).or_default();
        for o in &q.options {
            let cell = cells.entry(o.text.clone()).or_default();
            cell.exposures += answers.len() as u64;
            cell.selections += answers.iter().filter(|r| r.selected.contains(&o.text)).count() as u64;
        }
    }
    let mut omitted = Vec::new();
    for (m, cells) in &mut table.cells {
        cells.retain(|w, c| {
            if c.exposures == 0 {
                log::warn!("{m}: `{w}` was never shown; omitted from rates");
                omitted.push((*m, w.clone()));
            }
            c.exposures > 0
        });
    }
    (table, omitted)
}

/// Model scores of every option in the plan.
pub fn plan_scores(plan: &SurveyPlan) -> BTreeMap<String, SensorimotorVector> {
    plan.questions
        .iter()
        .flat_map(|q| &q.options)
        .map(|o| (o.text.clone(), o.scores))
        .collect()
}

/// Role each word plays under each modality.
fn plan_roles(plan: &SurveyPlan) -> HashMap<(Modality, &str), OptionRole> {
    plan.questions
        .iter()
        .flat_map(|q| q.options.iter().map(move |o| ((q.modality, o.text.as_str()), o.role)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub modality: Modality,
    pub word: String,
    pub rate: f64,
    pub score: f64,
    pub role: Option<OptionRole>,
}

/// Pearson correlation between selection rate and predicted score over every
/// word rated under `m`. The points are returned sorted by word.
pub fn modality_correlation(
    table: &SelectionRateTable,
    scores: &BTreeMap<String, SensorimotorVector>,
    m: Modality,
) -> Result<(CorrelationResult, Vec<ScatterPoint>), BehavioralError> {
    let mut points = Vec::new();
    for (word, rate) in table.rates(m) {
        let s = scores.get(word).ok_or_else(|| BehavioralError::MissingScore(word.to_string()))?;
        points.push(ScatterPoint {
            modality: m,
            word: word.to_string(),
            rate,
            score: s[m],
            role: None,
        });
    }
    let rates: Vec<f64> = points.iter().map(|p| p.rate).collect();
    let model: Vec<f64> = points.iter().map(|p| p.score).collect();
    let r = pearson(&rates, &model).map_err(|source| BehavioralError::Correlation { modality: m, source })?;
    Ok((r, points))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModalityAnalysis {
    pub correlations: Vec<(Modality, CorrelationResult)>,
    pub points: Vec<ScatterPoint>,
    /// Modalities whose correlation could not be computed, with the reason.
    pub failures: Vec<(Modality, String)>,
}

/// Correlations for every modality in the plan, with option roles attached
/// to the scatter points. `expected_words` only triggers a warning when a
/// modality has a different number of rated words.
pub fn analyze_plan(table: &SelectionRateTable, plan: &SurveyPlan, expected_words: Option<usize>) -> ModalityAnalysis {
    let scores = plan_scores(plan);
    let roles = plan_roles(plan);
    let mut out = ModalityAnalysis {
        correlations: Vec::new(),
        points: Vec::new(),
        failures: Vec::new(),
    };
    for m in Modality::ALL {
        let n = table.words(m).len();
        if let Some(e) = expected_words.filter(|&e| e != n) {
            log::warn!("{m}: {n} rated words, expected {e}");
        }
        match modality_correlation(table, &scores, m) {
            Ok((r, mut pts)) => {
                for p in &mut pts {
                    p.role = roles.get(&(m, p.word.as_str())).copied();
                }
                out.correlations.push((m, r));
                out.points.extend(pts);
            }
            Err(e) => out.failures.push((m, e.to_string())),
        }
    }
    out
}

/// `modality,word,role,rate,score`.
pub fn scatter_csv(points: &[ScatterPoint]) -> String {
    let mut out = String::from("modality,word,role,rate,score\n");
    for p in points {
        let role = p.role.map_or("", OptionRole::key);
        let _ = writeln!(out, "{},{},{},{},{}", p.modality, p.word, role, p.rate, p.score);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonce::{build_survey, PromptPhrases};

    fn plan(seed: u64) -> SurveyPlan {
        let (targets, pool) = crate::fixtures::survey_pools(seed);
        build_survey(&targets, &pool, seed, 0.5, &PromptPhrases::default()).unwrap()
    }

    fn csv_of(rows: &[&str]) -> String {
        let mut s = String::from("participant_id,question_id,sel1,sel2,sel3\n");
        for r in rows {
            s.push_str(r);
            s.push('\n');
        }
        s
    }

    fn options(plan: &SurveyPlan, id: &str) -> Vec<String> {
        plan.question(id).unwrap().options.iter().map(|o| o.text.clone()).collect()
    }

    #[test]
    fn well_formed_rows_load() {
        let plan = plan(1);
        let a = options(&plan, "auditory-q1");
        let h = options(&plan, "head-q2");
        let text = csv_of(&[
            &format!("p1,auditory-q1,{},{},{}", a[0], a[1], a[2]),
            &format!("p2,auditory-q1,{},{},{}", a[3], a[4], a[5]),
            &format!("p1,head-q2,{},{},{}", h[6], h[1], h[2]),
        ]);
        let load = read_responses(text.as_bytes(), &plan).unwrap();
        assert_eq!(load.records.len(), 3);
        assert!(load.rejected.is_empty());
    }

    #[test]
    fn invalid_rows_are_rejected_with_line_numbers() {
        let plan = plan(2);
        let a = options(&plan, "auditory-q1");
        let text = csv_of(&[
            &format!("p1,auditory-q1,{},{},{}", a[0], a[1], a[2]),
            &format!("p2,auditory-q1,{},{},notanoption", a[0], a[1]),
            &format!("p3,auditory-q1,{},{},", a[0], a[1]),
            &format!("p4,nosuch-q9,{},{},{}", a[0], a[1], a[2]),
            &format!("p1,auditory-q1,{},{},{}", a[3], a[4], a[5]),
            &format!("p5,auditory-q1,{},{},{}", a[0], a[0], a[2]),
        ]);
        let load = read_responses(text.as_bytes(), &plan).unwrap();
        assert_eq!(load.records.len(), 1);
        let rows: Vec<u64> = load.rejected.iter().map(|r| r.row).collect();
        assert_eq!(rows, vec![3, 4, 5, 6, 7]);
        assert!(load.rejected[0].reason.contains("notanoption"));
        assert!(load.rejected[2].reason.contains("unknown question"));
        assert!(load.rejected[3].reason.contains("duplicate"));
    }

    #[test]
    fn missing_column_rejects_file() {
        let plan = plan(3);
        let err = read_responses("participant_id,question_id,sel1,sel2\n".as_bytes(), &plan).unwrap_err();
        assert!(matches!(err, BehavioralError::MissingColumn(c) if c == "sel3"));
    }

    #[test]
    fn full_cohort_yields_6182_records() {
        let plan = plan(4);
        let records = simulate_random_responses(&plan, 281, 0);
        assert_eq!(records.len(), 281 * 22);
        assert_eq!(records.len(), 6182);
        let mut buf = Vec::new();
        write_responses(&records, &mut buf).unwrap();
        let load = read_responses(buf.as_slice(), &plan).unwrap();
        assert_eq!(load.records, records);
        assert!(load.rejected.is_empty());
    }

    #[test]
    fn all_or_nothing_rates() {
        let plan = plan(5);
        let q = plan.question("visual-q3").unwrap();
        let picks: Vec<String> = q.options.iter().take(3).map(|o| o.text.clone()).collect();
        let records: Vec<ResponseRecord> = (0..10)
            .map(|i| ResponseRecord {
                participant_id: format!("p{i}"),
                question_id: q.id.clone(),
                selected: [picks[0].clone(), picks[1].clone(), picks[2].clone()],
            })
            .collect();
        let (table, omitted) = selection_rates(&records, &plan);
        assert_eq!(table.rate(&picks[0], Modality::Visual), Some(1.0));
        assert_eq!(table.rate(&q.options[6].text, Modality::Visual), Some(0.0));
        assert_eq!(table.cell(&picks[0], Modality::Visual).unwrap().exposures, 10);
        // Only visual-q3 was answered.
        assert_eq!(omitted.len(), 44 * 7 - 7);
    }

    #[test]
    fn selections_per_record_sum_to_three() {
        let plan = plan(6);
        let records = simulate_random_responses(&plan, 50, 1);
        for r in &records {
            let q = plan.question(&r.question_id).unwrap();
            let hits = q.options.iter().filter(|o| r.selected.contains(&o.text)).count();
            assert_eq!(hits, 3);
        }
    }

    #[test]
    fn rates_ignore_record_order() {
        let plan = plan(7);
        let mut records = simulate_random_responses(&plan, 40, 2);
        let (a, _) = selection_rates(&records, &plan);
        records.shuffle(&mut ChaCha8Rng::seed_from_u64(3));
        let (b, _) = selection_rates(&records, &plan);
        assert_eq!(a, b);
    }

    #[test]
    fn random_responders_sit_at_three_sevenths() {
        let plan = plan(8);
        let records = simulate_random_responses(&plan, 2000, 4);
        let (table, omitted) = selection_rates(&records, &plan);
        assert!(omitted.is_empty());
        let p = 3.0 / 7.0;
        for m in Modality::ALL {
            for (w, cell) in &table.cells[&m] {
                let se = (p * (1.0 - p) / cell.exposures as f64).sqrt();
                assert!((cell.rate() - p).abs() < 4.5 * se, "{m} {w}: {}", cell.rate());
            }
        }
    }

    #[test]
    fn proportional_rates_correlate_perfectly() {
        let mut table = SelectionRateTable::default();
        let mut scores = BTreeMap::new();
        for (i, w) in ["aa", "bb", "cc", "dd"].iter().enumerate() {
            let mut v = SensorimotorVector::ZERO;
            v[Modality::Torso] = 0.2 * (i + 1) as f64;
            scores.insert(w.to_string(), v);
            table.cells.entry(Modality::Torso).or_default().insert(
                w.to_string(),
                RateCell {
                    selections: (i + 1) as u64,
                    exposures: 10,
                },
            );
        }
        let (r, pts) = modality_correlation(&table, &scores, Modality::Torso).unwrap();
        assert!((r.r - 1.0).abs() < 1e-12);
        assert_eq!(pts.len(), 4);
        let manual = pearson(&pts.iter().map(|p| p.rate).collect::<Vec<_>>(), &pts.iter().map(|p| p.score).collect::<Vec<_>>()).unwrap();
        assert_eq!(manual, r);
    }

    #[test]
    fn rates_csv_round_trips() {
        let plan = plan(9);
        let records = simulate_random_responses(&plan, 30, 5);
        let (table, _) = selection_rates(&records, &plan);
        let back = SelectionRateTable::from_csv(table.to_csv().as_bytes()).unwrap();
        assert_eq!(back, table);
        assert!(SelectionRateTable::from_csv("modality,word,selections,exposures,rate\nhead,x,3,2,1.5\n".as_bytes()).is_err());
    }

    #[test]
    fn analysis_covers_every_modality_with_28_words() {
        let plan = plan(10);
        let records = simulate_random_responses(&plan, 120, 6);
        let (table, _) = selection_rates(&records, &plan);
        let a = analyze_plan(&table, &plan, Some(28));
        assert_eq!(a.correlations.len(), 11);
        assert!(a.failures.is_empty());
        assert_eq!(a.points.len(), 11 * 28);
        assert!(a.points.iter().all(|p| p.role.is_some()));
        assert!(scatter_csv(&a.points).starts_with("modality,word,role,rate,score\n"));
    }
}
