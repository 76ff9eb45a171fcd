//! The threshold filtration, Morse-set tracking and persistence diagrams.
//!
//! A filtration evaluates the multivector field at every grid value. Morse
//! sets at consecutive stages are related by containment; a track follows a
//! Morse set through these containments and dies when its set merges into an
//! older one or when the index of the set it lands in differs from its own.

mod bottleneck;
mod diagram;
mod matching;
mod svg;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::complex::{build_complex, Cell, StateComplex};
use crate::dynamics::{build_mgraph, morse_sets, MGraph, MorseSet};
use crate::markov::{ThresholdGrid, TransitionMatrix};
use crate::mvf::{build_mvf, is_valid_mvf, MultivectorField};
use crate::topology::{topological_index, TopologicalIndex, TopologyError};

pub use bottleneck::{bottleneck, bottleneck_distance, Bottleneck, MatchedPair};
pub use diagram::{PersistenceDiagram, PersistencePoint};
pub use matching::hopcroft_karp;
pub use svg::render_svg;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error("multivector field at gamma = {gamma} is not a valid partition")]
    InvalidField { gamma: f64 },
    #[error("Morse set {label} at gamma = {gamma} is not contained in a single Morse set at the next stage")]
    Containment { gamma: f64, label: Cell },
}

/// A Morse set with its topological index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexedMorseSet {
    pub set: MorseSet,
    pub index: TopologicalIndex,
}

/// Everything computed at one threshold.
#[derive(Debug, Clone)]
pub struct Stage {
    pub gamma: f64,
    pub field: MultivectorField,
    pub graph: MGraph,
    /// Sorted by label.
    pub morse: Vec<IndexedMorseSet>,
}

impl Stage {
    pub fn morse_index_of(&self, label: Cell) -> Option<usize> {
        self.morse.iter().position(|m| m.set.label == label)
    }
}

pub fn build_stage(
    complex: &StateComplex,
    matrix: &TransitionMatrix,
    gamma: f64,
) -> Result<Stage, PipelineError> {
    let field = build_mvf(complex, matrix, gamma);
    if !is_valid_mvf(&field, complex) {
        return Err(PipelineError::InvalidField { gamma });
    }
    let graph = build_mgraph(&field, complex);
    let morse = morse_sets(&graph, &field)
        .into_iter()
        .map(|set| {
            let index = topological_index(complex, &set)?;
            Ok(IndexedMorseSet { set, index })
        })
        .collect::<Result<_, TopologyError>>()?;
    Ok(Stage {
        gamma,
        field,
        graph,
        morse,
    })
}

#[derive(Debug, Clone)]
pub struct FiltrationResult {
    pub complex: StateComplex,
    pub grid: ThresholdGrid,
    /// One stage per grid value, ascending.
    pub stages: Vec<Stage>,
}

pub fn run_filtration(matrix: &TransitionMatrix) -> Result<FiltrationResult, PipelineError> {
    let complex = build_complex(matrix);
    let grid = matrix.threshold_grid();
    let stages = grid
        .values()
        .iter()
        .map(|&gamma| build_stage(&complex, matrix, gamma))
        .collect::<Result<_, _>>()?;
    Ok(FiltrationResult {
        complex,
        grid,
        stages,
    })
}

/// For each Morse set of `prev`, the position in `next.morse` of the unique
/// Morse set containing it.
pub fn containment_map(prev: &Stage, next: &Stage) -> Result<Vec<usize>, PipelineError> {
    let mut target_of: BTreeMap<Cell, usize> = BTreeMap::new();
    for (k, m) in next.morse.iter().enumerate() {
        for c in m.set.cells.iter() {
            target_of.insert(c, k);
        }
    }
    prev.morse
        .iter()
        .map(|m| {
            let violation = || PipelineError::Containment {
                gamma: prev.gamma,
                label: m.set.label,
            };
            let mut targets = m.set.cells.iter().map(|c| target_of.get(&c).copied());
            let first = targets.next().flatten().ok_or_else(violation)?;
            if targets.all(|t| t == Some(first)) {
                Ok(first)
            } else {
                Err(violation())
            }
        })
        .collect()
}

/// A Morse set followed through the filtration.
#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub birth: f64,
    /// Death threshold; `None` while alive.
    pub death: Option<f64>,
    pub index: TopologicalIndex,
    /// Label of the Morse set the track was born with.
    pub representative: Cell,
    /// Label of the Morse set currently (or last) followed.
    pub current: Cell,
}

impl Track {
    pub fn is_alive(&self) -> bool {
        self.death.is_none()
    }

    pub fn point(&self) -> PersistencePoint {
        PersistencePoint {
            birth: self.birth,
            death: self.death.unwrap_or(f64::INFINITY),
            index: self.index,
        }
    }
}

/// Runs the tracking procedure over a filtration; returns every track ever
/// created, in creation order.
///
/// Base-stage Morse sets start tracks born at the first grid value. At each
/// later stage the live tracks are grouped by the Morse set that contains
/// their current set. A track whose index differs from the new set's index
/// dies. Among the rest, the oldest track (ties: smallest representative)
/// survives and the others die. A set left without a surviving track starts
/// a new one.
pub fn track_filtration(filtration: &FiltrationResult) -> Result<Vec<Track>, PipelineError> {
    let Some(base) = filtration.stages.first() else {
        return Ok(Vec::new());
    };
    let mut tracks: Vec<Track> = base
        .morse
        .iter()
        .map(|m| Track {
            birth: base.gamma,
            death: None,
            index: m.index,
            representative: m.set.label,
            current: m.set.label,
        })
        .collect();
    // live track for each Morse set of the previous stage
    let mut live: Vec<usize> = (0..tracks.len()).collect();

    for pair in filtration.stages.windows(2) {
        let (prev, next) = (&pair[0], &pair[1]);
        let gamma = next.gamma;
        let map = containment_map(prev, next)?;
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); next.morse.len()];
        for (p, &t) in live.iter().enumerate() {
            groups[map[p]].push(t);
        }

        let mut next_live = Vec::with_capacity(next.morse.len());
        for (target, group) in groups.into_iter().enumerate() {
            let m = &next.morse[target];
            let mut survivor: Option<usize> = None;
            for &t in &group {
                if tracks[t].index != m.index {
                    tracks[t].death = Some(gamma);
                    continue;
                }
                survivor = match survivor {
                    Some(s) if older(&tracks[s], &tracks[t]) => Some(s),
                    _ => Some(t),
                };
            }
            for &t in &group {
                if Some(t) != survivor && tracks[t].is_alive() {
                    tracks[t].death = Some(gamma);
                }
            }
            let t = match survivor {
                Some(s) => s,
                None => {
                    tracks.push(Track {
                        birth: gamma,
                        death: None,
                        index: m.index,
                        representative: m.set.label,
                        current: m.set.label,
                    });
                    tracks.len() - 1
                }
            };
            tracks[t].current = m.set.label;
            next_live.push(t);
        }
        debug_assert_eq!(
            next_live.len(),
            tracks.iter().filter(|t| t.is_alive()).count(),
            "one live track per Morse set"
        );
        live = next_live;
    }
    Ok(tracks)
}

fn older(a: &Track, b: &Track) -> bool {
    (a.birth, a.representative) < (b.birth, b.representative)
}

pub fn build_diagram(filtration: &FiltrationResult) -> Result<PersistenceDiagram, PipelineError> {
    let tracks = track_filtration(filtration)?;
    Ok(PersistenceDiagram::new(
        filtration.grid.values().to_vec(),
        tracks.iter().map(Track::point).collect(),
    ))
}

/// Filtration and diagram in one call.
pub fn diagram_of(matrix: &TransitionMatrix) -> Result<PersistenceDiagram, PipelineError> {
    build_diagram(&run_filtration(matrix)?)
}
