//! Randomized property and stability trials.
//!
//! Every run is reproducible from its seed: trial `t` derives its own seed
//! from the base seed, and that seed drives both the chain generator and the
//! perturbation sampler.

use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::markov::{matrix_distance, perturb, PerturbationSpec, TransitionMatrix};
use crate::mvf::{is_coarsening, is_valid_mvf};
use crate::persistence::{
    bottleneck_distance, build_diagram, containment_map, run_filtration, track_filtration,
    PipelineError,
};
use crate::topology::{graph_homology_dims, homology_dims};

/// Upper bound on perturbation magnitudes used by default.
pub const DEFAULT_MAX_DELTA: f64 = 0.05;

const SAMPLING_ATTEMPTS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RandomChainSpec {
    pub n: usize,
    /// Probability that an off-diagonal entry is positive.
    pub density: f64,
    pub seed: u64,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid random chain spec {0:?}: expected n=<int>[,density=<p>][,seed=<int>]")]
pub struct SpecParseError(String);

/// Parses `n=5,density=0.5,seed=7`; density defaults to 1 and seed to 0.
impl FromStr for RandomChainSpec {
    type Err = SpecParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SpecParseError(s.to_string());
        let mut spec = RandomChainSpec {
            n: 0,
            density: 1.0,
            seed: 0,
        };
        let mut has_n = false;
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part.split_once('=').ok_or_else(bad)?;
            match key.trim() {
                "n" => {
                    spec.n = value.trim().parse().map_err(|_| bad())?;
                    has_n = true;
                }
                "density" => spec.density = value.trim().parse().map_err(|_| bad())?,
                "seed" => spec.seed = value.trim().parse().map_err(|_| bad())?,
                _ => return Err(bad()),
            }
        }
        if !has_n || spec.n == 0 || !(0.0..=1.0).contains(&spec.density) {
            return Err(bad());
        }
        Ok(spec)
    }
}

impl RandomChainSpec {
    pub fn new(n: usize, density: f64, seed: u64) -> Self {
        Self { n, density, seed }
    }

    /// The spec for trial `t`, with its own derived seed.
    pub fn for_trial(&self, t: usize) -> Self {
        Self {
            seed: trial_seed(self.seed, t),
            ..*self
        }
    }
}

/// SplitMix64 finalizer over the base seed and trial number.
pub fn trial_seed(base: u64, t: usize) -> u64 {
    let mut z = base
        ^ (t as u64)
            .wrapping_add(1)
            .wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Random row-stochastic matrix: off-diagonal weights in (0, 1) kept with
/// probability `density`, a diagonal weight in [0.5, 1.5), then each row
/// normalized. The diagonal mass leaves room for compensated perturbations.
pub fn random_chain(spec: &RandomChainSpec) -> TransitionMatrix {
    assert!(spec.n >= 1, "a chain needs at least one state");
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.n;
    let rows = (0..n)
        .map(|i| {
            let weights: Vec<f64> = (0..n)
                .map(|j| {
                    if i == j {
                        rng.gen_range(0.5..1.5)
                    } else if rng.gen_bool(spec.density) {
                        1.0 - rng.gen::<f64>()
                    } else {
                        0.0
                    }
                })
                .collect();
            let total: f64 = weights.iter().sum();
            weights.iter().map(|w| w / total).collect()
        })
        .collect();
    TransitionMatrix::from_rows(rows).expect("normalized rows are stochastic")
}

/// Where each trial's unperturbed chain comes from.
#[derive(Debug, Clone)]
pub enum ChainSource {
    Fixed { matrix: TransitionMatrix, seed: u64 },
    Random(RandomChainSpec),
}

impl ChainSource {
    fn base_seed(&self) -> u64 {
        match self {
            ChainSource::Fixed { seed, .. } => *seed,
            ChainSource::Random(spec) => spec.seed,
        }
    }

    fn chain(&self, t: usize) -> TransitionMatrix {
        match self {
            ChainSource::Fixed { matrix, .. } => matrix.clone(),
            ChainSource::Random(spec) => random_chain(&spec.for_trial(t)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StabilityMode {
    /// One compensated off-diagonal change per trial.
    Single,
    /// `l` compensated changes at distinct off-diagonal entries.
    Multi(usize),
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub perturbations: Vec<PerturbationSpec>,
    /// Nominal magnitude bound `δ`.
    pub delta: f64,
    /// Largest realized entry change between the two matrices.
    pub realized_delta: f64,
    /// Number of changed off-diagonal entries.
    pub l: usize,
    /// `realized_delta` in single mode, `l · δ` in multi mode.
    pub bound: f64,
    pub bottleneck: f64,
    pub violation: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrices: Option<(TransitionMatrix, TransitionMatrix)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub mode: StabilityMode,
    pub trials: usize,
    /// Trials where no admissible perturbation could be sampled.
    pub skipped: usize,
    pub violations: usize,
    pub worst_ratio: f64,
    pub records: Vec<TrialRecord>,
}

impl StabilityReport {
    pub fn completed(&self) -> usize {
        self.records.len()
    }
}

/// Samples an admissible compensated change of a positive off-diagonal
/// entry: the entry stays positive, the diagonal stays in [0, 1], and the
/// new value does not coincide with any other off-diagonal value.
fn sample_change(
    matrix: &TransitionMatrix,
    magnitude: f64,
    exclude: &[(usize, usize)],
    rng: &mut ChaCha8Rng,
) -> Option<PerturbationSpec> {
    let targets: Vec<(usize, usize, f64)> = matrix
        .off_diagonal()
        .filter(|&(i, j, p)| p > 0.0 && !exclude.contains(&(i, j)))
        .collect();
    if targets.is_empty() {
        return None;
    }
    for _ in 0..SAMPLING_ATTEMPTS {
        let (i, j, p) = targets[rng.gen_range(0..targets.len())];
        let delta = if rng.gen_bool(0.5) {
            magnitude
        } else {
            -magnitude
        };
        let value = p + delta;
        let diag = matrix.get(i, i) - delta;
        if value <= 0.0 || value > 1.0 || !(0.0..=1.0).contains(&diag) {
            continue;
        }
        if matrix
            .off_diagonal()
            .any(|(a, b, q)| (a, b) != (i, j) && q == value)
        {
            continue;
        }
        return Some(PerturbationSpec::compensated(i, j, delta));
    }
    None
}

/// Magnitude in `(0, max]`.
fn magnitude_up_to(max: f64, rng: &mut ChaCha8Rng) -> f64 {
    max * (1.0 - rng.gen::<f64>())
}

/// Magnitude in `(0, bound)`.
fn magnitude_below(bound: f64, rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let m = bound * rng.gen::<f64>();
        if m > 0.0 && m < bound {
            return m;
        }
    }
}

type Sample = (TransitionMatrix, Vec<PerturbationSpec>, f64);

fn sample_perturbation(
    matrix: &TransitionMatrix,
    mode: StabilityMode,
    max_delta: f64,
    rng: &mut ChaCha8Rng,
) -> Option<Sample> {
    for _ in 0..SAMPLING_ATTEMPTS {
        match mode {
            StabilityMode::Single => {
                let magnitude = magnitude_up_to(max_delta, rng);
                let spec = sample_change(matrix, magnitude, &[], rng)?;
                let perturbed = perturb(matrix, &spec).ok()?;
                return Some((perturbed, vec![spec], magnitude));
            }
            StabilityMode::Multi(l) => {
                let delta = magnitude_up_to(max_delta, rng);
                let mut current = matrix.clone();
                let mut specs = Vec::with_capacity(l);
                let mut touched = Vec::with_capacity(l);
                for _ in 0..l {
                    let m = magnitude_below(delta, rng);
                    let Some(spec) = sample_change(&current, m, &touched, rng) else {
                        break;
                    };
                    let Ok(next) = perturb(&current, &spec) else {
                        break;
                    };
                    touched.push((spec.row, spec.col));
                    specs.push(spec);
                    current = next;
                }
                if specs.len() != l {
                    continue;
                }
                let dist = matrix_distance(matrix, &current).ok()?;
                if dist.l_offdiag == l && dist.delta_inf < delta {
                    return Some((current, specs, delta));
                }
            }
        }
    }
    None
}

/// Perturbs chains and compares the diagrams of the original and perturbed
/// matrices against the stability bound.
pub fn stability_trials(
    source: &ChainSource,
    trials: usize,
    mode: StabilityMode,
    max_delta: f64,
) -> Result<StabilityReport, PipelineError> {
    let mut report = StabilityReport {
        mode,
        trials,
        skipped: 0,
        violations: 0,
        worst_ratio: 0.0,
        records: Vec::with_capacity(trials),
    };
    for t in 0..trials {
        let seed = trial_seed(source.base_seed(), t);
        let original = source.chain(t);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xA5A5_5A5A_0F0F_F0F0);
        let Some((perturbed, perturbations, delta)) =
            sample_perturbation(&original, mode, max_delta, &mut rng)
        else {
            report.skipped += 1;
            continue;
        };
        let record = compare(t, seed, &original, &perturbed, perturbations, delta, mode)?;
        if record.violation {
            report.violations += 1;
        }
        if record.bound > 0.0 {
            report.worst_ratio = report.worst_ratio.max(record.bottleneck / record.bound);
        }
        report.records.push(record);
    }
    Ok(report)
}

/// Evaluates one (P, P') pair.
pub fn compare(
    trial: usize,
    seed: u64,
    original: &TransitionMatrix,
    perturbed: &TransitionMatrix,
    perturbations: Vec<PerturbationSpec>,
    delta: f64,
    mode: StabilityMode,
) -> Result<TrialRecord, PipelineError> {
    let dist = matrix_distance(original, perturbed).expect("same state space");
    let d_p = build_diagram(&run_filtration(original)?)?;
    let d_q = build_diagram(&run_filtration(perturbed)?)?;
    let d_b = bottleneck_distance(&d_p, &d_q);
    let (bound, violation) = match mode {
        StabilityMode::Single => (dist.delta_inf, d_b > dist.delta_inf),
        StabilityMode::Multi(_) => {
            let bound = dist.l_offdiag as f64 * delta;
            (bound, d_b >= bound)
        }
    };
    Ok(TrialRecord {
        trial,
        seed,
        perturbations,
        delta,
        realized_delta: dist.delta_inf,
        l: dist.l_offdiag,
        bound,
        bottleneck: d_b,
        violation,
        matrices: violation.then(|| (original.clone(), perturbed.clone())),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PropertyFailure {
    pub trial: usize,
    pub seed: u64,
    pub message: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct PropertyReport {
    pub trials: usize,
    pub stages: usize,
    pub homology_checks: usize,
    pub failures: Vec<PropertyFailure>,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn merge(&mut self, other: PropertyReport) {
        self.trials += other.trials;
        self.stages += other.stages;
        self.homology_checks += other.homology_checks;
        self.failures.extend(other.failures);
    }
}

/// Checks the structural guarantees of the pipeline on random chains:
/// field validity at every threshold, the coarsening chain, containment of
/// Morse sets between stages, one live track per Morse set, and agreement
/// of rank-based homology with the graph formula on every closure.
pub fn property_trials(spec: &RandomChainSpec, trials: usize) -> PropertyReport {
    let mut report = PropertyReport::default();
    for t in 0..trials {
        let trial_spec = spec.for_trial(t);
        let matrix = random_chain(&trial_spec);
        report.trials += 1;
        if let Err(message) = check_chain(&matrix, &mut report) {
            report.failures.push(PropertyFailure {
                trial: t,
                seed: trial_spec.seed,
                message,
            });
        }
    }
    report
}

/// Runs every property check on one matrix, counting into `report`.
pub fn check_chain(matrix: &TransitionMatrix, report: &mut PropertyReport) -> Result<(), String> {
    let f = run_filtration(matrix).map_err(|e| e.to_string())?;
    for stage in &f.stages {
        report.stages += 1;
        if !is_valid_mvf(&stage.field, &f.complex) {
            return Err(format!("invalid field at gamma = {}", stage.gamma));
        }
        for mv in stage.field.multivectors() {
            if !f.complex.is_locally_closed(mv.cells()) {
                return Err(format!("{} not locally closed", mv.cells()));
            }
        }
        for m in &stage.morse {
            let cl = f.complex.closure(&m.set.cells);
            let by_rank = homology_dims(&f.complex, &cl).map_err(|e| e.to_string())?;
            report.homology_checks += 1;
            if by_rank != graph_homology_dims(&cl) {
                return Err(format!("homology mismatch on {cl}"));
            }
        }
    }
    for w in f.stages.windows(2) {
        match is_coarsening(&w[1].field, &w[0].field) {
            Ok(true) => {}
            Ok(false) => {
                return Err(format!(
                    "field at {} does not coarsen field at {}",
                    w[1].gamma, w[0].gamma
                ))
            }
            Err(e) => return Err(e.to_string()),
        }
        containment_map(&w[0], &w[1]).map_err(|e| e.to_string())?;
    }
    let tracks = track_filtration(&f).map_err(|e| e.to_string())?;
    let live = tracks.iter().filter(|t| t.is_alive()).count();
    let last = f.stages.last().map_or(0, |s| s.morse.len());
    if live != last {
        return Err(format!("{live} live tracks for {last} Morse sets"));
    }
    Ok(())
}
