//! Bounds and schedule validation, plus the instance family on which
//! partitioned and semi-partitioned schedules of the optimal graph are slow.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::chain::{build_graph, Sequencer};
use crate::error::{Error, Result};
use crate::model::{
    total_work, DependencyGraph, Policy, Schedule, Segment, SubjobKind, SubjobRef, TaskId, TaskSet, TaskSpec,
};
use crate::time::TimeValue;

/// `max{ W/M, len(G*) }` with `len(G*)` from exhaustive sequencing of every
/// semaphore. Fails with [`Error::BruteForceCap`] on long chains.
pub fn lower_bound_exact(tasks: &TaskSet, processors: usize) -> Result<TimeValue> {
    let optimal = build_graph(tasks, Sequencer::BruteForce)?;
    let len = optimal.critical_path_length()?;
    Ok(total_work(tasks).div_int(processors).max(len))
}

/// `max{ W/M, min c1 + min c2 + max_k CriticalSum_k }`, a cheap lower bound
/// that never exceeds [`lower_bound_exact`].
pub fn lower_bound_fast(tasks: &TaskSet, processors: usize) -> TimeValue {
    if tasks.is_empty() {
        return TimeValue::zero();
    }
    let min_c1 = tasks.tasks().iter().map(|t| &t.c1).min().cloned().unwrap_or_default();
    let min_c2 = tasks.tasks().iter().map(|t| &t.c2).min().cloned().unwrap_or_default();
    let mut critical_sums = vec![TimeValue::zero(); tasks.z()];
    for t in tasks.tasks() {
        if let Some(s) = t.semaphore {
            critical_sums[s.0] += &t.a1;
        }
    }
    let longest_chain = critical_sums.into_iter().max().unwrap_or_default();
    let path = min_c1 + &min_c2 + longest_chain;
    total_work(tasks).div_int(processors).max(path)
}

/// `(W - len(G)) / M + len(G)`.
pub fn lemma8_bound(graph: &DependencyGraph, tasks: &TaskSet, processors: usize) -> Result<TimeValue> {
    crate::list::list_schedule_bound(graph, tasks, processors)
}

/// `1 + α - α/M` as an exact rational.
pub fn composite_ratio(alpha: &BigRational, processors: usize) -> BigRational {
    let m = BigRational::from_integer(BigInt::from(processors));
    BigRational::from_integer(1.into()) + alpha - alpha / m
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LowerBoundKind {
    Exact,
    Fast,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub lb_exact: Option<TimeValue>,
    pub lb_fast: TimeValue,
    pub lemma8_bound: TimeValue,
    pub achieved_makespan: TimeValue,
    /// `achieved_makespan / lb`, where `lb` is the bound named by `lb_used`.
    pub ratio_vs_lb: TimeValue,
    pub lb_used: LowerBoundKind,
}

/// Bounds for `schedule`, falling back to the fast lower bound when a chain
/// is too long for exhaustive sequencing.
pub fn bounds_report(tasks: &TaskSet, graph: &DependencyGraph, schedule: &Schedule) -> Result<BoundsReport> {
    let processors = schedule.processors;
    let lb_exact = match lower_bound_exact(tasks, processors) {
        Ok(lb) => Some(lb),
        Err(Error::BruteForceCap { .. }) => None,
        Err(e) => return Err(e),
    };
    let lb_fast = lower_bound_fast(tasks, processors);
    let achieved = schedule.makespan();
    let (lb, lb_used) = match &lb_exact {
        Some(lb) => (lb.clone(), LowerBoundKind::Exact),
        None => (lb_fast.clone(), LowerBoundKind::Fast),
    };
    let ratio_vs_lb = if lb.is_zero() {
        TimeValue::from_integer(1)
    } else {
        TimeValue::from_rational(achieved.ratio_to(&lb))?
    };
    Ok(BoundsReport {
        lb_exact,
        lb_fast,
        lemma8_bound: lemma8_bound(graph, tasks, processors)?,
        achieved_makespan: achieved,
        ratio_vs_lb,
        lb_used,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ViolationKind {
    Overlap,
    IntraTaskParallel,
    PrecedenceBroken,
    MutexBroken,
    PolicyBroken,
    WorkMismatch,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.kind, self.detail)
    }
}

fn describe(s: &Segment) -> String {
    format!("{} on P{} [{}, {})", s.subjob(), s.processor, s.start, s.end)
}

/// Checks `schedule` against the task set and dependency graph, and
/// against its declared policy. Returns every violated predicate; empty means valid.
///
/// Zero-length subjobs have no segments and complete as soon as all their
/// predecessors have completed.
pub fn validate(schedule: &Schedule, tasks: &TaskSet, graph: &DependencyGraph) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |kind, detail: String| out.push(Violation { kind, detail });

    let mut by_subjob: BTreeMap<SubjobRef, Vec<&Segment>> = BTreeMap::new();
    for seg in &schedule.segments {
        if tasks.get(seg.task).is_none() {
            push(ViolationKind::WorkMismatch, format!("{} refers to an unknown task", describe(seg)));
            continue;
        }
        if seg.start >= seg.end {
            push(ViolationKind::WorkMismatch, format!("{} is empty or reversed", describe(seg)));
        }
        if seg.processor == 0 || seg.processor > schedule.processors {
            push(
                ViolationKind::PolicyBroken,
                format!("{} uses a processor outside 1..={}", describe(seg), schedule.processors),
            );
        }
        by_subjob.entry(seg.subjob()).or_default().push(seg);
    }

    let mut by_processor: BTreeMap<usize, Vec<&Segment>> = BTreeMap::new();
    for seg in &schedule.segments {
        by_processor.entry(seg.processor).or_default().push(seg);
    }
    for segs in by_processor.values_mut() {
        segs.sort_by(|a, b| a.start.cmp(&b.start));
        for pair in segs.windows(2) {
            if pair[1].start < pair[0].end {
                push(
                    ViolationKind::Overlap,
                    format!("{} overlaps {}", describe(pair[0]), describe(pair[1])),
                );
            }
        }
    }

    let mut by_task: BTreeMap<TaskId, Vec<&Segment>> = BTreeMap::new();
    for seg in &schedule.segments {
        by_task.entry(seg.task).or_default().push(seg);
    }
    for segs in by_task.values() {
        for (i, a) in segs.iter().enumerate() {
            for b in &segs[i + 1..] {
                if a.processor != b.processor && a.overlaps(b) {
                    push(
                        ViolationKind::IntraTaskParallel,
                        format!("{} runs in parallel with {}", describe(a), describe(b)),
                    );
                }
            }
        }
        if schedule.policy.is_partitioned() && segs.iter().any(|s| s.processor != segs[0].processor) {
            push(
                ViolationKind::PolicyBroken,
                format!("task {} migrates under a partitioned policy", segs[0].task),
            );
        }
    }

    for task in tasks.tasks() {
        for kind in SubjobKind::ALL {
            let sj = SubjobRef::new(task.id, kind);
            let segs = by_subjob.get(&sj).map(Vec::as_slice).unwrap_or(&[]);
            let done: TimeValue = segs.iter().map(|s| s.length()).sum();
            if &done != task.duration(kind) {
                push(
                    ViolationKind::WorkMismatch,
                    format!("{sj} receives {done} units but needs {}", task.duration(kind)),
                );
            }
            let must_be_contiguous = match kind {
                SubjobKind::Critical => true,
                SubjobKind::FirstNonCritical => !schedule.policy.is_partitioned(),
                SubjobKind::SecondNonCritical => !schedule.policy.allows_split_second_section(),
            };
            if must_be_contiguous && segs.len() > 1 {
                push(
                    ViolationKind::PolicyBroken,
                    format!("{sj} is split into {} segments under {}", segs.len(), schedule.policy),
                );
            }
        }
    }

    let Ok(order) = graph.topological_order() else {
        push(ViolationKind::PrecedenceBroken, "dependency graph is cyclic".into());
        return out;
    };
    let mut completion = vec![TimeValue::zero(); graph.vertex_count()];
    for &v in &order {
        let sj = DependencyGraph::subjob(v);
        completion[v] = match by_subjob.get(&sj) {
            Some(segs) if !segs.is_empty() => segs.iter().map(|s| &s.end).max().cloned().unwrap_or_default(),
            _ => graph
                .predecessors(v)
                .iter()
                .map(|&u| &completion[u])
                .max()
                .cloned()
                .unwrap_or_default(),
        };
    }
    for (u, v) in graph.edges() {
        let to = DependencyGraph::subjob(v);
        let Some(segs) = by_subjob.get(&to) else { continue };
        let Some(start) = segs.iter().map(|s| &s.start).min() else { continue };
        if *start < completion[u] {
            let from = DependencyGraph::subjob(u);
            let kind = if from.task == to.task {
                ViolationKind::PrecedenceBroken
            } else {
                ViolationKind::MutexBroken
            };
            push(kind, format!("{to} starts at {start} before {from} completes at {}", completion[u]));
        }
    }

    for sem in 0..tasks.z() {
        let critical: Vec<&Segment> = schedule
            .segments
            .iter()
            .filter(|s| {
                s.kind == SubjobKind::Critical
                    && tasks.get(s.task).and_then(|t| t.semaphore) == Some(crate::model::SemaphoreId(sem))
            })
            .collect();
        for (i, a) in critical.iter().enumerate() {
            for b in &critical[i + 1..] {
                if a.task != b.task && a.overlaps(b) {
                    push(
                        ViolationKind::MutexBroken,
                        format!("{} and {} hold semaphore {:?} together", describe(a), describe(b), tasks.semaphore_name(crate::model::SemaphoreId(sem))),
                    );
                }
            }
        }
    }
    out
}

/// The dependency graph a schedule realizes: each semaphore's critical
/// sections chained in order of their first start time (task id on ties,
/// unscheduled ones last).
pub fn graph_from_schedule(schedule: &Schedule, tasks: &TaskSet) -> Result<DependencyGraph> {
    let chains = (0..tasks.z())
        .map(|k| {
            let mut members: Vec<(Option<TimeValue>, TaskId)> = tasks
                .tasks_of(crate::model::SemaphoreId(k))
                .iter()
                .map(|t| {
                    let start = schedule
                        .segments_of(SubjobRef::new(t.id, SubjobKind::Critical))
                        .map(|s| s.start.clone())
                        .min();
                    (start, t.id)
                })
                .collect();
            members.sort_by(|a, b| match (&a.0, &b.0) {
                (Some(x), Some(y)) => (x, a.1).cmp(&(y, b.1)),
                (Some(_), None) => std::cmp::Ordering::Less,
                (None, Some(_)) => std::cmp::Ordering::Greater,
                (None, None) => a.1.cmp(&b.1),
            });
            members.into_iter().map(|(_, id)| id).collect()
        })
        .collect();
    DependencyGraph::new(tasks, chains)
}

/// The lower-bound family: `N = M^2 - M + 1` tasks sharing one semaphore,
/// `τ_1 = (δ, Q - Q/M, Q/M + Nδ)` and `τ_i = (δ, δ, Q/M)` for `i >= 2`.
/// Requires `M >= 2` and `0 < δ < Q/(MN)`.
pub fn build_theorem5_instance(processors: usize, q: &TimeValue, delta: &TimeValue) -> Result<TaskSet> {
    if processors < 2 {
        return Err(Error::Infeasible(format!("the instance needs M >= 2, got {processors}")));
    }
    let n = processors * processors - processors + 1;
    if !delta.is_positive() || !q.is_positive() {
        return Err(Error::Infeasible("Q and delta must be positive".into()));
    }
    let limit = q.div_int(processors * n);
    if *delta >= limit {
        return Err(Error::Infeasible(format!("delta = {delta} must be below Q/(MN) = {limit}")));
    }
    let q_over_m = q.div_int(processors);
    let n_delta = delta.scale(&BigRational::from_integer(BigInt::from(n)));
    let mut specs = vec![TaskSpec::new(delta.clone(), q - &q_over_m, &q_over_m + &n_delta, Some("s1"))];
    for _ in 1..n {
        specs.push(TaskSpec::new(delta.clone(), delta.clone(), q_over_m.clone(), Some("s1")));
    }
    TaskSet::from_specs(specs, None)
}

struct Theorem5Params {
    processors: usize,
    n: usize,
    q: TimeValue,
    delta: TimeValue,
}

fn theorem5_params(instance: &TaskSet, processors: usize) -> Result<Theorem5Params> {
    let n = instance.len();
    if processors < 2 || n != processors * processors - processors + 1 {
        return Err(Error::Precondition(format!(
            "not a lower-bound instance for M = {processors}: N = {n}"
        )));
    }
    let delta = instance.task(TaskId(1)).c1.clone();
    let q = instance.task(TaskId(2)).c2.scale(&BigRational::from_integer(BigInt::from(processors)));
    let expected = build_theorem5_instance(processors, &q, &delta)?;
    if expected != *instance {
        return Err(Error::Precondition("task set does not match the lower-bound family".into()));
    }
    Ok(Theorem5Params {
        processors,
        n,
        q,
        delta,
    })
}

/// The optimal graph `G*`: `τ_1`'s critical section first, then `τ_2..τ_N`.
pub fn theorem5_optimal_graph(instance: &TaskSet) -> Result<DependencyGraph> {
    DependencyGraph::new(instance, vec![(1..=instance.len()).map(TaskId).collect()])
}

/// The graph realized by the reference schedule: critical sections in
/// reversed index order.
pub fn theorem5_reference_graph(instance: &TaskSet) -> Result<DependencyGraph> {
    DependencyGraph::new(instance, vec![(1..=instance.len()).rev().map(TaskId).collect()])
}

/// The partitioned reference schedule `S*` of makespan `(2N + M)δ + Q`.
///
/// `τ_1` runs alone on processor `M`. The other `N - 1 = M(M - 1)` tasks are
/// spread round-robin over processors `1..M-1`, `M` per processor. First
/// sections fill `[0, Mδ)`, critical sections run in reversed index order
/// from `Mδ`, and from `(M + N)δ` the second sections run back to back while
/// `τ_1` executes its critical and second sections.
pub fn theorem5_reference_schedule(instance: &TaskSet, processors: usize) -> Result<Schedule> {
    let p = theorem5_params(instance, processors)?;
    let d = |k: usize| p.delta.scale(&BigRational::from_integer(BigInt::from(k)));
    let q_over_m = p.q.div_int(p.processors);
    let mut segments = Vec::new();
    let mut seg = |task: usize, kind, processor, start: TimeValue, end: TimeValue| {
        segments.push(Segment {
            task: TaskId(task),
            kind,
            processor,
            start,
            end,
        })
    };

    seg(1, SubjobKind::FirstNonCritical, p.processors, TimeValue::zero(), d(1));
    for i in 2..=p.n {
        let j = i - 2;
        let proc = j % (p.processors - 1) + 1;
        let slot = j / (p.processors - 1);
        seg(i, SubjobKind::FirstNonCritical, proc, d(slot), d(slot + 1));
        let cs_start = d(p.processors + p.n - i);
        let cs_end = &cs_start + &p.delta;
        seg(i, SubjobKind::Critical, proc, cs_start, cs_end);
        let c2_start = d(p.processors + p.n) + q_over_m.scale(&BigRational::from_integer(BigInt::from(slot)));
        let c2_end = &c2_start + &q_over_m;
        seg(i, SubjobKind::SecondNonCritical, proc, c2_start, c2_end);
    }
    let tau1 = instance.task(TaskId(1));
    let cs_start = d(p.processors + p.n);
    let cs_end = &cs_start + &tau1.a1;
    let c2_end = &cs_end + &tau1.c2;
    seg(1, SubjobKind::Critical, p.processors, cs_start, cs_end.clone());
    seg(1, SubjobKind::SecondNonCritical, p.processors, cs_end, c2_end);
    Ok(Schedule::new(segments, p.processors, Policy::PartitionedTied))
}

/// `(2N + M)δ + Q`.
pub fn theorem5_reference_makespan(processors: usize, q: &TimeValue, delta: &TimeValue) -> TimeValue {
    let n = processors * processors - processors + 1;
    delta.scale(&BigRational::from_integer(BigInt::from(2 * n + processors))) + q
}

/// `δ + (2 - 1/M) Q`: no partitioned or semi-partitioned schedule of `G*`
/// finishes earlier.
pub fn theorem5_partitioned_lower_bound(processors: usize, q: &TimeValue, delta: &TimeValue) -> TimeValue {
    let factor = BigRational::new(BigInt::from(2 * processors - 1), BigInt::from(processors));
    q.scale(&factor) + delta
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TaskSpec;

    fn t(n: i64) -> TimeValue {
        TimeValue::ratio(n, 1)
    }

    fn set(specs: &[(i64, i64, i64, Option<&str>)]) -> TaskSet {
        TaskSet::from_specs(
            specs
                .iter()
                .map(|&(c1, a1, c2, s)| TaskSpec::new(t(c1), t(a1), t(c2), s))
                .collect(),
            None,
        )
        .unwrap()
    }

    fn hundredth(n: i64) -> TimeValue {
        TimeValue::ratio(n, 100)
    }

    #[test]
    fn theorem5_instance_m2() {
        let inst = build_theorem5_instance(2, &t(4), &hundredth(1)).unwrap();
        let rows: Vec<_> = inst.tasks().iter().map(|t| (t.c1.clone(), t.a1.clone(), t.c2.clone())).collect();
        assert_eq!(
            rows,
            vec![
                (hundredth(1), t(2), hundredth(203)),
                (hundredth(1), hundredth(1), t(2)),
                (hundredth(1), hundredth(1), t(2)),
            ]
        );
        assert_eq!(total_work(&inst), hundredth(808));
    }

    #[test]
    fn theorem5_instance_m3() {
        let delta = TimeValue::ratio(1, 1000);
        let inst = build_theorem5_instance(3, &t(9), &delta).unwrap();
        assert_eq!(inst.len(), 7);
        let t1 = inst.task(TaskId(1));
        assert_eq!((t1.a1.clone(), t1.c2.clone()), (t(6), t(3) + TimeValue::ratio(7, 1000)));
    }

    #[test]
    fn theorem5_instance_rejects_large_delta() {
        // Q/(MN) = 4/6.
        assert!(matches!(
            build_theorem5_instance(2, &t(4), &TimeValue::ratio(2, 3)),
            Err(Error::Infeasible(_))
        ));
        assert!(build_theorem5_instance(1, &t(4), &hundredth(1)).is_err());
    }

    #[test]
    fn theorem5_critical_paths() {
        let inst = build_theorem5_instance(2, &t(4), &hundredth(1)).unwrap();
        let g = theorem5_optimal_graph(&inst).unwrap();
        assert_eq!(g.critical_path_length().unwrap(), hundredth(404));
        let last = DependencyGraph::new(&inst, vec![vec![TaskId(2), TaskId(3), TaskId(1)]]).unwrap();
        assert_eq!(last.critical_path_length().unwrap(), hundredth(406));
        let brute = build_graph(&inst, Sequencer::BruteForce).unwrap();
        assert_eq!(brute.chain(crate::model::SemaphoreId(0))[0], TaskId(1));
        assert_eq!(lower_bound_exact(&inst, 2).unwrap(), hundredth(404));
        assert_eq!(lemma8_bound(&g, &inst, 2).unwrap(), hundredth(606));
    }

    #[test]
    fn theorem5_reference_schedule_is_valid_and_exact() {
        for (m, q, delta) in [(2, t(4), hundredth(1)), (3, t(9), TimeValue::ratio(1, 1000))] {
            let inst = build_theorem5_instance(m, &q, &delta).unwrap();
            let s = theorem5_reference_schedule(&inst, m).unwrap();
            assert_eq!(s.makespan(), theorem5_reference_makespan(m, &q, &delta));
            let g = theorem5_reference_graph(&inst).unwrap();
            assert_eq!(validate(&s, &inst, &g), vec![], "{}", s.gantt());
        }
        let inst = build_theorem5_instance(2, &t(4), &hundredth(1)).unwrap();
        assert_eq!(theorem5_reference_schedule(&inst, 2).unwrap().makespan(), hundredth(408));
        let inst3 = build_theorem5_instance(3, &t(9), &TimeValue::ratio(1, 1000)).unwrap();
        assert_eq!(
            theorem5_reference_schedule(&inst3, 3).unwrap().makespan(),
            TimeValue::ratio(9017, 1000)
        );
        assert!(theorem5_reference_schedule(&inst, 3).is_err());
    }

    #[test]
    fn realized_graph_of_reference_schedule_is_reversed_chain() {
        let inst = build_theorem5_instance(3, &t(9), &TimeValue::ratio(1, 1000)).unwrap();
        let s = theorem5_reference_schedule(&inst, 3).unwrap();
        let g = graph_from_schedule(&s, &inst).unwrap();
        assert_eq!(g.chains(), theorem5_reference_graph(&inst).unwrap().chains());
    }

    #[test]
    fn lower_bound_examples() {
        let one = set(&[(1, 2, 3, Some("s"))]);
        assert_eq!(lower_bound_exact(&one, 4).unwrap(), t(6));
        let fast = set(&[(1, 2, 0, Some("s")), (0, 3, 1, Some("s"))]);
        assert_eq!(lower_bound_fast(&fast, 2), t(5));
        let free = set(&[(1, 0, 2, None), (3, 0, 1, None)]);
        assert_eq!(lower_bound_fast(&free, 1), t(7));
        assert_eq!(lower_bound_fast(&free, 4), t(2));
        let equal = set(&[(1, 1, 1, Some("a")), (1, 1, 1, Some("b")), (1, 1, 1, Some("c"))]);
        assert_eq!(lower_bound_exact(&equal, 3).unwrap(), t(3));
    }

    #[test]
    fn lemma8_degenerate_cases() {
        let ts = set(&[(1, 2, 0, Some("s")), (0, 3, 1, Some("s")), (2, 0, 2, None)]);
        let g = build_graph(&ts, Sequencer::Potts).unwrap();
        assert_eq!(lemma8_bound(&g, &ts, 1).unwrap(), total_work(&ts));
        let serial = set(&[(1, 2, 3, Some("s"))]);
        let gs = build_graph(&serial, Sequencer::Jks).unwrap();
        assert_eq!(lemma8_bound(&gs, &serial, 3).unwrap(), t(6));
    }

    #[test]
    fn bounds_report_labels_fallback() {
        let many = set(&[(1, 1, 1, Some("s")); 10]);
        let g = build_graph(&many, Sequencer::Jks).unwrap();
        let s = crate::list::schedule_semi_partitioned(&g, &many, 2, false).unwrap();
        let report = bounds_report(&many, &g, &s).unwrap();
        assert_eq!(report.lb_used, LowerBoundKind::Fast);
        assert!(report.lb_exact.is_none());
        assert!(report.achieved_makespan <= report.lemma8_bound);
        let json = serde_json::to_value(&report).unwrap();
        assert_eq!(json["lb_used"], "fast");
    }
}
