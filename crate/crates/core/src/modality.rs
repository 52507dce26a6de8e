use std::fmt;
use std::ops::{Index, IndexMut};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub const MODALITY_COUNT: usize = 11;

/// One of the eleven sensorimotor dimensions, in canonical order.
///
/// The first six are perceptual modalities, the last five action effectors.
/// Every vector, report row and serialized model uses this order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modality {
    Auditory,
    Gustatory,
    Haptic,
    Interoceptive,
    Olfactory,
    Visual,
    FootLeg,
    HandArm,
    Head,
    MouthThroat,
    Torso,
}

impl Modality {
    pub const ALL: [Modality; MODALITY_COUNT] = [
        Modality::Auditory,
        Modality::Gustatory,
        Modality::Haptic,
        Modality::Interoceptive,
        Modality::Olfactory,
        Modality::Visual,
        Modality::FootLeg,
        Modality::HandArm,
        Modality::Head,
        Modality::MouthThroat,
        Modality::Torso,
    ];

    pub const PERCEPTUAL: [Modality; 6] = [
        Modality::Auditory,
        Modality::Gustatory,
        Modality::Haptic,
        Modality::Interoceptive,
        Modality::Olfactory,
        Modality::Visual,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Modality> {
        Self::ALL.get(i).copied()
    }

    /// Stable snake_case identifier used in files and on the command line.
    pub fn key(self) -> &'static str {
        match self {
            Modality::Auditory => "auditory",
            Modality::Gustatory => "gustatory",
            Modality::Haptic => "haptic",
            Modality::Interoceptive => "interoceptive",
            Modality::Olfactory => "olfactory",
            Modality::Visual => "visual",
            Modality::FootLeg => "foot_leg",
            Modality::HandArm => "hand_arm",
            Modality::Head => "head",
            Modality::MouthThroat => "mouth_throat",
            Modality::Torso => "torso",
        }
    }

    pub fn is_perceptual(self) -> bool {
        self.index() < 6
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown modality `{0}`")]
pub struct UnknownModality(pub String);

impl FromStr for Modality {
    type Err = UnknownModality;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s
            .trim()
            .to_ascii_lowercase()
            .chars()
            .map(|c| if c == '/' || c == '-' || c == ' ' { '_' } else { c })
            .collect();
        let m = match norm.as_str() {
            "auditory" => Modality::Auditory,
            "gustatory" => Modality::Gustatory,
            "haptic" => Modality::Haptic,
            "interoceptive" => Modality::Interoceptive,
            "olfactory" => Modality::Olfactory,
            "visual" => Modality::Visual,
            "foot_leg" => Modality::FootLeg,
            "hand_arm" => Modality::HandArm,
            "head" => Modality::Head,
            "mouth_throat" | "mouth" => Modality::MouthThroat,
            "torso" => Modality::Torso,
            _ => return Err(UnknownModality(s.to_string())),
        };
        Ok(m)
    }
}

/// Eleven ratings indexed by [`Modality`].
///
/// Values are normalized to `[0, 1]`. The vector is not normalized to unit
/// length.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SensorimotorVector(pub [f64; MODALITY_COUNT]);

impl SensorimotorVector {
    pub const ZERO: SensorimotorVector = SensorimotorVector([0.0; MODALITY_COUNT]);

    pub fn new(values: [f64; MODALITY_COUNT]) -> Self {
        SensorimotorVector(values)
    }

    pub fn splat(v: f64) -> Self {
        SensorimotorVector([v; MODALITY_COUNT])
    }

    pub fn values(&self) -> &[f64; MODALITY_COUNT] {
        &self.0
    }

    pub fn get(&self, m: Modality) -> f64 {
        self.0[m.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (Modality, f64)> + '_ {
        Modality::ALL.iter().map(move |&m| (m, self.0[m.index()]))
    }

    pub fn in_unit_range(&self) -> bool {
        self.0.iter().all(|v| (0.0..=1.0).contains(v))
    }
}

impl Index<Modality> for SensorimotorVector {
    type Output = f64;

    fn index(&self, m: Modality) -> &f64 {
        &self.0[m.index()]
    }
}

impl IndexMut<Modality> for SensorimotorVector {
    fn index_mut(&mut self, m: Modality) -> &mut f64 {
        &mut self.0[m.index()]
    }
}
