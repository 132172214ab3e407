//! Acceptance-ratio sweeps.
//!
//! For every parameter point a batch of task sets is generated once and
//! shared by all algorithms. A set is accepted at multiplier `m` when the
//! algorithm's schedule validates and its makespan is at most `m · LB`,
//! with `LB` the fast lower bound.

use std::fmt;
use std::str::FromStr;

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{lower_bound_fast, validate};
use crate::chain::{build_graph, Sequencer};
use crate::error::{Error, Result};
use crate::generator::{generate_taskset, GenConfig};
use crate::list::{list_schedule_bound, schedule, SchedulerConfig};
use crate::model::{Policy, TaskSet};
use crate::time::TimeValue;

/// Sequencer × {semi-partitioned, partitioned} × {preemptive, non-preemptive}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Algorithm {
    pub sequencer: Sequencer,
    pub partitioned: bool,
    pub preemptive: bool,
}

impl Algorithm {
    pub const fn new(sequencer: Sequencer, partitioned: bool, preemptive: bool) -> Self {
        Algorithm {
            sequencer,
            partitioned,
            preemptive,
        }
    }

    /// The eight JKS/POTTS variants.
    pub fn all() -> Vec<Algorithm> {
        let mut out = Vec::new();
        for sequencer in [Sequencer::Jks, Sequencer::Potts] {
            for partitioned in [false, true] {
                for preemptive in [true, false] {
                    out.push(Algorithm::new(sequencer, partitioned, preemptive));
                }
            }
        }
        out
    }

    /// Partitioned variants use the simple heuristic.
    pub fn scheduler_config(&self, processors: usize) -> SchedulerConfig {
        let policy = match (self.partitioned, self.preemptive) {
            (false, true) => Policy::SemiPartitionedP,
            (false, false) => Policy::SemiPartitionedNp,
            (true, _) => Policy::PartitionedSimple,
        };
        let mut config = SchedulerConfig::new(processors, policy);
        config.preempt_second_sections = self.preemptive;
        config
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}-{}-{}",
            self.sequencer.label(),
            if self.partitioned { "P" } else { "SP" },
            if self.preemptive { "P" } else { "NP" }
        )
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split('-').collect();
        let bad = || Error::Parse(format!("unknown algorithm {s:?}, expected e.g. POTTS-SP-P"));
        let [seq, place, preempt] = parts.as_slice() else { return Err(bad()) };
        let sequencer = match seq.to_ascii_uppercase().as_str() {
            "JKS" => Sequencer::Jks,
            "POTTS" => Sequencer::Potts,
            _ => return Err(bad()),
        };
        let partitioned = match place.to_ascii_uppercase().as_str() {
            "SP" => false,
            "P" => true,
            _ => return Err(bad()),
        };
        let preemptive = match preempt.to_ascii_uppercase().as_str() {
            "P" => true,
            "NP" => false,
            _ => return Err(bad()),
        };
        Ok(Algorithm::new(sequencer, partitioned, preemptive))
    }
}

impl TryFrom<String> for Algorithm {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Algorithm> for String {
    fn from(a: Algorithm) -> String {
        a.to_string()
    }
}

/// `1.00, 1.05, ..., 1.80`.
pub fn default_grid() -> Vec<TimeValue> {
    (0..=16).map(|i| TimeValue::ratio(100 + 5 * i, 100)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub processors: Vec<usize>,
    pub z: Vec<usize>,
    pub beta_ranges: Vec<(f64, f64)>,
    pub task_sets_per_point: usize,
    /// Tasks per processor in each generated set.
    pub tasks_per_processor: usize,
    pub per_task_cap: TimeValue,
    pub deadline_grid: Vec<TimeValue>,
    pub algorithms: Vec<Algorithm>,
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            processors: vec![8],
            z: vec![8],
            beta_ranges: vec![(0.1, 0.4)],
            task_sets_per_point: 200,
            tasks_per_processor: 10,
            per_task_cap: TimeValue::ratio(1, 2),
            deadline_grid: default_grid(),
            algorithms: Algorithm::all(),
            seed: 1,
        }
    }
}

impl SweepConfig {
    pub fn points(&self) -> Vec<SweepPoint> {
        let mut out = Vec::new();
        for &processors in &self.processors {
            for &z in &self.z {
                for &(beta_low, beta_high) in &self.beta_ranges {
                    out.push(SweepPoint {
                        processors,
                        z,
                        beta_low,
                        beta_high,
                    });
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub processors: usize,
    pub z: usize,
    pub beta_low: f64,
    pub beta_high: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub algorithm: Algorithm,
    pub processors: usize,
    pub z: usize,
    pub beta_low: f64,
    pub beta_high: f64,
    pub multiplier: TimeValue,
    pub accepted: usize,
    pub total: usize,
}

impl ExperimentRow {
    pub fn ratio(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.accepted as f64 / self.total as f64
        }
    }
}

/// Result of one algorithm on one task set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetOutcome {
    pub makespan: TimeValue,
    pub lower_bound: TimeValue,
    pub lemma8_bound: TimeValue,
    pub valid: bool,
}

impl SetOutcome {
    pub fn accepted_at(&self, multiplier: &TimeValue) -> bool {
        self.valid && self.makespan <= multiplier * &self.lower_bound
    }
}

pub fn evaluate_set(tasks: &TaskSet, algorithm: Algorithm, processors: usize) -> Result<SetOutcome> {
    let graph = build_graph(tasks, algorithm.sequencer)?;
    let sched = schedule(&graph, tasks, &algorithm.scheduler_config(processors))?;
    Ok(SetOutcome {
        makespan: sched.makespan(),
        lower_bound: lower_bound_fast(tasks, processors),
        lemma8_bound: list_schedule_bound(&graph, tasks, processors)?,
        valid: validate(&sched, tasks, &graph).is_empty(),
    })
}

/// Seeds and task sets for one point, independent of thread scheduling.
pub fn point_task_sets(config: &SweepConfig, point_index: usize) -> Result<Vec<(u64, TaskSet)>> {
    if config.task_sets_per_point == 0 {
        return Err(Error::Precondition("task_sets_per_point must be positive".into()));
    }
    let point = config
        .points()
        .get(point_index)
        .copied()
        .ok_or_else(|| Error::Precondition(format!("no sweep point {point_index}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(point_index as u64);
    let seeds: Vec<u64> = (0..config.task_sets_per_point).map(|_| rng.gen()).collect();
    seeds
        .into_par_iter()
        .map(|seed| {
            let gen = GenConfig {
                processors: point.processors,
                n_tasks: config.tasks_per_processor * point.processors,
                z: point.z,
                beta_low: point.beta_low,
                beta_high: point.beta_high,
                per_task_cap: config.per_task_cap.clone(),
                seed,
            };
            generate_taskset(&gen).map(|ts| (seed, ts))
        })
        .collect()
}

/// One acceptance-ratio data point.
pub fn run_point(
    config: &SweepConfig,
    point_index: usize,
    algorithm: Algorithm,
    multiplier: &TimeValue,
) -> Result<ExperimentRow> {
    let sets = point_task_sets(config, point_index)?;
    let point = config.points()[point_index];
    let outcomes: Vec<SetOutcome> = sets
        .par_iter()
        .map(|(_, ts)| evaluate_set(ts, algorithm, point.processors))
        .collect::<Result<_>>()?;
    Ok(ExperimentRow {
        algorithm,
        processors: point.processors,
        z: point.z,
        beta_low: point.beta_low,
        beta_high: point.beta_high,
        multiplier: multiplier.clone(),
        accepted: outcomes.iter().filter(|o| o.accepted_at(multiplier)).count(),
        total: outcomes.len(),
    })
}

/// A set some algorithm does not accept at the largest grid multiplier.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepException {
    pub algorithm: Algorithm,
    pub point: SweepPoint,
    pub seed: u64,
    pub outcome: SetOutcome,
    /// `lemma8_bound / lower_bound`, the multiplier at which acceptance is
    /// guaranteed for semi-partitioned schedules.
    pub lemma8_multiplier: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<ExperimentRow>,
    pub exceptions: Vec<SweepException>,
}

pub fn run_sweep(config: &SweepConfig) -> Result<SweepReport> {
    if config.deadline_grid.is_empty() || config.algorithms.is_empty() {
        return Err(Error::Precondition("deadline grid and algorithm list must be non-empty".into()));
    }
    let last = config.deadline_grid.iter().max().cloned().expect("non-empty");
    let mut rows = Vec::new();
    let mut exceptions = Vec::new();
    for (idx, point) in config.points().into_iter().enumerate() {
        let sets = point_task_sets(config, idx)?;
        let outcomes: Vec<Vec<SetOutcome>> = sets
            .par_iter()
            .map(|(_, ts)| {
                config
                    .algorithms
                    .iter()
                    .map(|&a| evaluate_set(ts, a, point.processors))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        for (ai, &algorithm) in config.algorithms.iter().enumerate() {
            for m in &config.deadline_grid {
                rows.push(ExperimentRow {
                    algorithm,
                    processors: point.processors,
                    z: point.z,
                    beta_low: point.beta_low,
                    beta_high: point.beta_high,
                    multiplier: m.clone(),
                    accepted: outcomes.iter().filter(|o| o[ai].accepted_at(m)).count(),
                    total: outcomes.len(),
                });
            }
            for ((seed, _), o) in sets.iter().zip(&outcomes) {
                let o = &o[ai];
                if !o.accepted_at(&last) {
                    exceptions.push(SweepException {
                        algorithm,
                        point,
                        seed: *seed,
                        lemma8_multiplier: if o.lower_bound.is_zero() {
                            f64::INFINITY
                        } else {
                            o.lemma8_bound.ratio_to(&o.lower_bound).to_f64().unwrap_or(f64::NAN)
                        },
                        outcome: o.clone(),
                    });
                }
            }
        }
    }
    rows.sort_by(|a, b| {
        (a.algorithm.to_string(), a.processors, a.z)
            .cmp(&(b.algorithm.to_string(), b.processors, b.z))
            .then(a.beta_low.total_cmp(&b.beta_low))
            .then(a.beta_high.total_cmp(&b.beta_high))
            .then(a.multiplier.cmp(&b.multiplier))
    });
    Ok(SweepReport { rows, exceptions })
}

pub const CSV_HEADER: [&str; 9] = ["algorithm", "M", "z", "beta_low", "beta_high", "multiplier", "accepted", "total", "ratio"];

fn multiplier_text(m: &TimeValue) -> String {
    m.to_decimal_string().unwrap_or_else(|| m.to_fraction_string())
}

pub fn rows_to_csv(rows: &[ExperimentRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for r in rows {
        w.write_record([
            r.algorithm.to_string(),
            r.processors.to_string(),
            r.z.to_string(),
            r.beta_low.to_string(),
            r.beta_high.to_string(),
            multiplier_text(&r.multiplier),
            r.accepted.to_string(),
            r.total.to_string(),
            format!("{:.6}", r.ratio()),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

/// Per-curve plot data: a `#` header line per curve followed by
/// `multiplier ratio` pairs.
pub fn series_text(rows: &[ExperimentRow]) -> String {
    let mut out = String::new();
    let mut current = None;
    for r in rows {
        let key = (r.algorithm, r.processors, r.z, r.beta_low.to_bits(), r.beta_high.to_bits());
        if current != Some(key) {
            out.push_str(&format!(
                "# {} M={} z={} beta=[{}, {}]\n",
                r.algorithm, r.processors, r.z, r.beta_low, r.beta_high
            ));
            current = Some(key);
        }
        out.push_str(&format!("{} {:.6}\n", multiplier_text(&r.multiplier), r.ratio()));
    }
    out
}

/// Human-readable summary of sets never accepted on the grid.
pub fn exceptions_text(report: &SweepReport) -> String {
    if report.exceptions.is_empty() {
        return "every set accepted by every algorithm at the largest multiplier\n".into();
    }
    let mut out = String::new();
    for e in &report.exceptions {
        out.push_str(&format!(
            "{} M={} z={} seed={}: makespan/LB = {:.4}, lemma8/LB = {:.4}, valid = {}\n",
            e.algorithm,
            e.point.processors,
            e.point.z,
            e.seed,
            e.outcome.makespan.ratio_to(&e.outcome.lower_bound).to_f64().unwrap_or(f64::NAN),
            e.lemma8_multiplier,
            e.outcome.valid
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SweepConfig {
        SweepConfig {
            processors: vec![2],
            z: vec![2],
            beta_ranges: vec![(0.1, 0.4)],
            task_sets_per_point: 6,
            algorithms: vec!["POTTS-SP-P".parse().unwrap(), "JKS-P-NP".parse().unwrap()],
            ..SweepConfig::default()
        }
    }

    #[test]
    fn labels_round_trip() {
        let labels: Vec<String> = Algorithm::all().iter().map(|a| a.to_string()).collect();
        assert_eq!(labels[0], "JKS-SP-P");
        assert_eq!(labels[7], "POTTS-P-NP");
        for l in &labels {
            assert_eq!(&l.parse::<Algorithm>().unwrap().to_string(), l);
        }
        assert!("BRUTE-SP-P".parse::<Algorithm>().is_err());
        assert!("POTTS-SP".parse::<Algorithm>().is_err());
    }

    #[test]
    fn default_grid_endpoints() {
        let g = default_grid();
        assert_eq!(g.len(), 17);
        assert_eq!(g[0], TimeValue::from_integer(1));
        assert_eq!(g[16], TimeValue::ratio(9, 5));
    }

    #[test]
    fn zero_sets_is_an_error() {
        let cfg = SweepConfig {
            task_sets_per_point: 0,
            ..small()
        };
        assert!(run_point(&cfg, 0, cfg.algorithms[0], &TimeValue::from_integer(1)).is_err());
    }

    #[test]
    fn point_matches_sweep_and_is_monotone() {
        let cfg = small();
        let report = run_sweep(&cfg).unwrap();
        assert_eq!(report.rows.len(), 2 * 17);
        let m = TimeValue::ratio(13, 10);
        let row = run_point(&cfg, 0, cfg.algorithms[0], &m).unwrap();
        let same = report
            .rows
            .iter()
            .find(|r| r.algorithm == row.algorithm && r.multiplier == m)
            .unwrap();
        assert_eq!(same, &row);
        for pair in report.rows.windows(2) {
            if pair[0].algorithm == pair[1].algorithm {
                assert!(pair[0].accepted <= pair[1].accepted);
            }
        }
        let csv = rows_to_csv(&report.rows);
        assert!(csv.starts_with("algorithm,M,z,beta_low,beta_high,multiplier,accepted,total,ratio\n"));
        assert!(csv.contains("JKS-P-NP,2,2,0.1,0.4,1.05,"));
        assert_eq!(csv, rows_to_csv(&run_sweep(&cfg).unwrap().rows));
    }

    #[test]
    fn config_json_defaults() {
        let cfg: SweepConfig = serde_json::from_str(r#"{"task_sets_per_point": 5, "algorithms": ["POTTS-SP-NP"]}"#).unwrap();
        assert_eq!(cfg.processors, vec![8]);
        assert_eq!(cfg.algorithms, vec![Algorithm::new(Sequencer::Potts, false, false)]);
        assert!(serde_json::from_str::<SweepConfig>(r#"{"bogus": 1}"#).is_err());
    }
}
