//! Persistence of Morse decompositions of finite Markov chains.
//!
//! A transition matrix defines a 1-dimensional complex (states and the
//! transitions between them). Sweeping a threshold over the off-diagonal
//! probabilities yields a nested family of combinatorial multivector fields;
//! the strongly connected components of each field's graph are its Morse
//! sets. Following Morse sets across thresholds, together with the homology
//! of their closures and their Conley indices, produces a persistence
//! diagram. Diagrams are compared with an index-preserving bottleneck
//! distance.
//!
//! ```
//! use markov_morse::{diagram_of, TransitionMatrix};
//!
//! let p = TransitionMatrix::from_rows(vec![
//!     vec![0.5, 0.17, 0.33],
//!     vec![0.17, 0.6, 0.23],
//!     vec![0.15, 0.15, 0.7],
//! ])
//! .unwrap();
//! let diagram = diagram_of(&p).unwrap();
//! assert_eq!(diagram.len(), 7);
//! ```

pub mod complex;
pub mod dynamics;
pub mod harness;
pub mod markov;
pub mod mvf;
pub mod persistence;
pub mod topology;

mod union_find;

pub use complex::{build_complex, Cell, CellSet, StateComplex};
pub use dynamics::{build_mgraph, morse_order, morse_sets, pi_map, MGraph, MorseOrder, MorseSet};
pub use markov::{
    matrix_distance, parse_matrix, perturb, threshold_grid, Format, MatrixDistance, MatrixError,
    PerturbationSpec, ThresholdGrid, TransitionMatrix,
};
pub use mvf::{build_mvf, is_coarsening, is_valid_mvf, Multivector, MultivectorField};
pub use persistence::{
    bottleneck, bottleneck_distance, build_diagram, containment_map, diagram_of, run_filtration,
    FiltrationResult, PersistenceDiagram, PersistencePoint, PipelineError, Stage,
};
pub use topology::{
    conley_index_dims, homology_dims, is_critical, rank_gf2, topological_index, Gf2Matrix,
    TopologicalIndex,
};
