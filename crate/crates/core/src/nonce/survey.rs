use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{NonceCandidate, NonceError};
use crate::{Modality, SensorimotorVector};

pub const QUESTIONS_PER_MODALITY: usize = 4;
pub const TARGETS_PER_QUESTION: usize = 3;
pub const DISTRACTORS_PER_QUESTION: usize = 4;

const PROMPT_PREFIX: &str = "Which 3 of the following nonsense words do you think most relate to ";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptionRole {
    Target,
    Distractor,
}

impl OptionRole {
    pub fn key(self) -> &'static str {
        match self {
            OptionRole::Target => "target",
            OptionRole::Distractor => "distractor",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyOption {
    pub text: String,
    pub role: OptionRole,
    pub scores: SensorimotorVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyQuestion {
    /// `<modality>-q<1..4>`.
    pub id: String,
    pub modality: Modality,
    pub prompt: String,
    /// Targets and distractors in presentation order.
    pub options: Vec<SurveyOption>,
}

impl SurveyQuestion {
    pub fn targets(&self) -> impl Iterator<Item = &SurveyOption> {
        self.options.iter().filter(|o| o.role == OptionRole::Target)
    }

    pub fn distractors(&self) -> impl Iterator<Item = &SurveyOption> {
        self.options.iter().filter(|o| o.role == OptionRole::Distractor)
    }

    pub fn option(&self, text: &str) -> Option<&SurveyOption> {
        self.options.iter().find(|o| o.text == text)
    }

    /// Probability that a uniformly random pick is a target.
    pub fn chance_hit_rate(&self) -> f64 {
        self.targets().count() as f64 / self.options.len() as f64
    }

    pub fn validate(&self, min_score: f64) -> Result<(), NonceError> {
        let bad = |msg: String| Err(NonceError::InvalidPlan(format!("{}: {msg}", self.id)));
        let m = self.modality;
        if self.options.len() != TARGETS_PER_QUESTION + DISTRACTORS_PER_QUESTION {
            return bad(format!("{} options", self.options.len()));
        }
        let distinct: HashSet<&str> = self.options.iter().map(|o| o.text.as_str()).collect();
        if distinct.len() != self.options.len() {
            return bad("repeated option".into());
        }
        if self.targets().count() != TARGETS_PER_QUESTION {
            return bad(format!("{} targets", self.targets().count()));
        }
        for t in self.targets() {
            if !(t.scores[m] > min_score) {
                return bad(format!("target `{}` scores {} in {m}", t.text, t.scores[m]));
            }
        }
        for d in self.distractors() {
            if !(d.scores[m] < min_score) {
                return bad(format!("distractor `{}` scores {} in {m}", d.text, d.scores[m]));
            }
            if !Modality::ALL.iter().any(|&o| o != m && d.scores[o] > min_score) {
                return bad(format!("distractor `{}` evokes no other modality", d.text));
            }
        }
        Ok(())
    }
}

/// Which questions each participant answers: per modality, question indices
/// `pair_cycle[p % len]` for participant `p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignmentRule {
    pub questions_per_modality: usize,
    pub pair_cycle: Vec<[usize; 2]>,
}

impl Default for AssignmentRule {
    /// Every pair of the four questions once; after any number of
    /// participants the per-question counts differ by at most one.
    fn default() -> Self {
        AssignmentRule {
            questions_per_modality: 2,
            pair_cycle: vec![[0, 1], [2, 3], [0, 2], [1, 3], [0, 3], [1, 2]],
        }
    }
}

impl AssignmentRule {
    pub fn pair_for(&self, participant: usize) -> [usize; 2] {
        self.pair_cycle[participant % self.pair_cycle.len()]
    }
}

/// Per-modality phrases substituted into the question prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptPhrases(pub BTreeMap<Modality, String>);

impl Default for PromptPhrases {
    fn default() -> Self {
        let table = [
            (Modality::Auditory, "the sense of hearing"),
            (Modality::Gustatory, "the sense of taste"),
            (Modality::Haptic, "the sense of touch"),
            (Modality::Interoceptive, "sensations inside the body"),
            (Modality::Olfactory, "the sense of smell"),
            (Modality::Visual, "the sense of sight"),
            (Modality::FootLeg, "actions with the foot or leg"),
            (Modality::HandArm, "actions with the hand or arm"),
            (Modality::Head, "actions with the head"),
            (Modality::MouthThroat, "actions with the mouth or throat"),
            (Modality::Torso, "actions with the torso"),
        ];
        PromptPhrases(table.into_iter().map(|(m, p)| (m, p.to_string())).collect())
    }
}

impl PromptPhrases {
    /// Defaults overridden by `modality = phrase` entries.
    pub fn with_overrides(entries: &BTreeMap<String, String>) -> Result<Self, crate::modality::UnknownModality> {
        let mut phrases = PromptPhrases::default();
        for (k, v) in entries {
            phrases.0.insert(k.parse()?, v.clone());
        }
        Ok(phrases)
    }

    pub fn render(&self, m: Modality) -> String {
        let phrase = self.0.get(&m).cloned().unwrap_or_else(|| format!("the {m} modality"));
        format!("{PROMPT_PREFIX}{phrase}?")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyPlan {
    pub rng_seed: u64,
    pub min_score: f64,
    pub questions: Vec<SurveyQuestion>,
    pub assignment_rule: AssignmentRule,
}

impl SurveyPlan {
    pub fn question(&self, id: &str) -> Option<&SurveyQuestion> {
        self.questions.iter().find(|q| q.id == id)
    }

    pub fn questions_for_modality(&self, m: Modality) -> impl Iterator<Item = &SurveyQuestion> {
        self.questions.iter().filter(move |q| q.modality == m)
    }

    /// Question ids answered by participant `p`.
    pub fn questions_for(&self, participant: usize) -> Vec<&str> {
        let pair = self.assignment_rule.pair_for(participant);
        Modality::ALL
            .iter()
            .flat_map(|&m| {
                let qs: Vec<&SurveyQuestion> = self.questions_for_modality(m).collect();
                pair.into_iter().filter_map(move |i| qs.get(i).map(|q| q.id.as_str()))
            })
            .collect()
    }

    /// Target texts per question id.
    pub fn answer_key(&self) -> BTreeMap<&str, Vec<&str>> {
        self.questions
            .iter()
            .map(|q| (q.id.as_str(), q.targets().map(|o| o.text.as_str()).collect()))
            .collect()
    }

    pub fn validate(&self) -> Result<(), NonceError> {
        let bad = |msg: String| Err(NonceError::InvalidPlan(msg));
        if self.questions.len() != QUESTIONS_PER_MODALITY * Modality::ALL.len() {
            return bad(format!("{} questions", self.questions.len()));
        }
        let ids: HashSet<&str> = self.questions.iter().map(|q| q.id.as_str()).collect();
        if ids.len() != self.questions.len() {
            return bad("duplicate question id".into());
        }
        for q in &self.questions {
            q.validate(self.min_score)?;
        }
        for m in Modality::ALL {
            let qs: Vec<&SurveyQuestion> = self.questions_for_modality(m).collect();
            if qs.len() != QUESTIONS_PER_MODALITY {
                return bad(format!("{m} has {} questions", qs.len()));
            }
            let mut seen = BTreeSet::new();
            for t in qs.iter().flat_map(|q| q.targets()) {
                if !seen.insert(t.text.as_str()) {
                    return bad(format!("{m} target `{}` used twice", t.text));
                }
            }
        }
        let rule = &self.assignment_rule;
        if rule.pair_cycle.is_empty()
            || rule.pair_cycle.iter().any(|p| p[0] == p[1] || p.iter().any(|&i| i >= QUESTIONS_PER_MODALITY))
        {
            return bad("malformed assignment rule".into());
        }
        Ok(())
    }

    /// JSON with questions, options, a separate answer key and the
    /// assignment rule.
    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("plan serializes");
        v["answer_key"] = serde_json::to_value(self.answer_key()).expect("answer key serializes");
        v
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// One row per option: `question_id,modality,prompt,position,option,role`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["question_id", "modality", "prompt", "position", "option", "role"])
            .expect("in-memory write");
        for q in &self.questions {
            for (i, o) in q.options.iter().enumerate() {
                let pos = (i + 1).to_string();
                w.write_record([q.id.as_str(), q.modality.key(), &q.prompt, &pos, &o.text, o.role.key()])
                    .expect("in-memory write");
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
    }
}

fn scores_of(c: &NonceCandidate) -> Result<SensorimotorVector, NonceError> {
    c.scores.ok_or_else(|| NonceError::Unscored(c.text.clone()))
}

/// The modality other than `m` that `scores` evokes most; lowest index on ties.
fn source_modality(scores: &SensorimotorVector, m: Modality) -> Modality {
    Modality::ALL
        .into_iter()
        .filter(|&o| o != m)
        .fold(None, |best: Option<Modality>, o| match best {
            Some(b) if scores[b] >= scores[o] => Some(b),
            _ => Some(o),
        })
        .expect("ten other modalities")
}

/// Builds four questions per modality.
///
/// The first twelve entries of `targets[m]` are shuffled and dealt three per
/// question. Sixteen distinct distractors per modality come from `pool`:
/// words scoring below `min_score` in `m` and above it elsewhere, grouped by
/// the other modality they evoke most and drawn round-robin across groups so
/// the sources stay balanced. Options are shuffled within each question.
pub fn build_survey(
    targets: &BTreeMap<Modality, Vec<NonceCandidate>>,
    pool: &[NonceCandidate],
    rng_seed: u64,
    min_score: f64,
    phrases: &PromptPhrases,
) -> Result<SurveyPlan, NonceError> {
    let need_targets = QUESTIONS_PER_MODALITY * TARGETS_PER_QUESTION;
    let need_distractors = QUESTIONS_PER_MODALITY * DISTRACTORS_PER_QUESTION;

    let mut seen = HashSet::new();
    let mut unique_pool = Vec::new();
    for c in pool {
        if seen.insert(c.text.as_str()) {
            unique_pool.push((c.text.as_str(), scores_of(c)?));
        }
    }

    let mut questions = Vec::with_capacity(QUESTIONS_PER_MODALITY * Modality::ALL.len());
    for m in Modality::ALL {
        let infeasible = |reason: String| NonceError::Infeasible { modality: m, reason };
        let listed = targets.get(&m).map(Vec::as_slice).unwrap_or_default();
        if listed.len() < need_targets {
            return Err(infeasible(format!("need {need_targets} targets, have {}", listed.len())));
        }
        let mut chosen: Vec<SurveyOption> = Vec::with_capacity(need_targets);
        let mut target_texts = HashSet::new();
        for c in &listed[..need_targets] {
            let scores = scores_of(c)?;
            if !(scores[m] > min_score) {
                return Err(infeasible(format!("target `{}` scores {} (must exceed {min_score})", c.text, scores[m])));
            }
            if !target_texts.insert(c.text.as_str()) {
                return Err(infeasible(format!("target `{}` listed twice", c.text)));
            }
            chosen.push(SurveyOption {
                text: c.text.clone(),
                role: OptionRole::Target,
                scores,
            });
        }

        let mut buckets: BTreeMap<Modality, Vec<(&str, SensorimotorVector)>> = BTreeMap::new();
        for &(text, scores) in &unique_pool {
            let elsewhere = Modality::ALL.iter().any(|&o| o != m && scores[o] > min_score);
            if scores[m] < min_score && elsewhere && !target_texts.contains(text) {
                buckets.entry(source_modality(&scores, m)).or_default().push((text, scores));
            }
        }
        let available: usize = buckets.values().map(Vec::len).sum();
        if available < need_distractors {
            return Err(infeasible(format!(
                "need {need_distractors} distractors scoring below {min_score} here and above it elsewhere, pool has {available}"
            )));
        }

        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        rng.set_stream(m.index() as u64);
        let mut groups: Vec<Vec<(&str, SensorimotorVector)>> = buckets.into_values().collect();
        for g in &mut groups {
            g.shuffle(&mut rng);
        }
        let start = rng.gen_range(0..groups.len());
        groups.rotate_left(start);
        let mut distractors = Vec::with_capacity(need_distractors);
        'deal: for round in 0.. {
            for g in &groups {
                if let Some(&(text, scores)) = g.get(round) {
                    distractors.push(SurveyOption {
                        text: text.to_string(),
                        role: OptionRole::Distractor,
                        scores,
                    });
                    if distractors.len() == need_distractors {
                        break 'deal;
                    }
                }
            }
        }

        chosen.shuffle(&mut rng);
        for q in 0..QUESTIONS_PER_MODALITY {
            let mut options: Vec<SurveyOption> = chosen[q * TARGETS_PER_QUESTION..(q + 1) * TARGETS_PER_QUESTION]
                .iter()
                .chain(&distractors[q * DISTRACTORS_PER_QUESTION..(q + 1) * DISTRACTORS_PER_QUESTION])
                .cloned()
                .collect();
            options.shuffle(&mut rng);
            questions.push(SurveyQuestion {
                id: format!("{m}-q{}", q + 1),
                modality: m,
                prompt: phrases.render(m),
                options,
            });
        }
    }

    let plan = SurveyPlan {
        rng_seed,
        min_score,
        questions,
        assignment_rule: AssignmentRule::default(),
    };
    plan.validate()?;
    Ok(plan)
}
