use std::cmp::Ordering;

use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize, Serializer};

use crate::topology::TopologicalIndex;

/// A `(birth, death, index)` triple. `death` is `+inf` for sets that never die.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PersistencePoint {
    pub birth: f64,
    #[serde(serialize_with = "ser_death", deserialize_with = "de_death")]
    pub death: f64,
    pub index: TopologicalIndex,
}

impl PersistencePoint {
    pub fn new(birth: f64, death: f64, index: TopologicalIndex) -> Self {
        Self {
            birth,
            death,
            index,
        }
    }

    pub fn is_essential(&self) -> bool {
        self.death == f64::INFINITY
    }

    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }

    /// Order by index, then birth, then death.
    pub fn canonical_cmp(a: &Self, b: &Self) -> Ordering {
        a.index
            .cmp(&b.index)
            .then_with(|| a.birth.total_cmp(&b.birth))
            .then_with(|| a.death.total_cmp(&b.death))
    }
}

fn ser_death<S: Serializer>(death: &f64, s: S) -> Result<S::Ok, S::Error> {
    if death.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*death)
    }
}

fn de_death<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Str(String),
    }
    match Raw::deserialize(d)? {
        Raw::Num(x) => Ok(x),
        Raw::Str(s) if s == "inf" => Ok(f64::INFINITY),
        Raw::Str(s) => Err(de::Error::custom(format!("invalid death value {s:?}"))),
    }
}

/// Multiset of persistence points in canonical order, with the grid it was
/// computed on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersistenceDiagram {
    #[serde(default)]
    grid: Vec<f64>,
    points: Vec<PersistencePoint>,
}

impl PersistenceDiagram {
    pub fn new(grid: Vec<f64>, mut points: Vec<PersistencePoint>) -> Self {
        points.sort_by(PersistencePoint::canonical_cmp);
        Self { grid, points }
    }

    pub fn from_points(points: Vec<PersistencePoint>) -> Self {
        Self::new(Vec::new(), points)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn points(&self) -> &[PersistencePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("diagram serialization cannot fail")
    }

    /// Parses diagram JSON; points are put back into canonical order.
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        let raw: PersistenceDiagram = serde_json::from_str(text)?;
        Ok(Self::new(raw.grid, raw.points))
    }
}
