//! Critical-section ordering.
//!
//! For each semaphore the tasks sharing it are turned into single-machine
//! jobs (release `c1`, processing `a1`, delivery `c2`). A sequence for that
//! problem fixes the order of the critical sections, and its latest delivery
//! equals the longest path through the resulting chain. The heuristics are
//! the extended Jackson's rule and Potts' improvement of it; an exhaustive
//! oracle gives the optimum for short chains.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DependencyGraph, SemaphoreId, Task, TaskId, TaskSet};
use crate::time::TimeValue;

/// Largest instance [`brute_force_optimal`] accepts by default.
pub const DEFAULT_BRUTE_FORCE_CAP: usize = 9;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeliveryJob {
    pub job_id: TaskId,
    pub release: TimeValue,
    pub processing: TimeValue,
    pub delivery: TimeValue,
}

impl DeliveryJob {
    pub fn new(job_id: TaskId, release: TimeValue, processing: TimeValue, delivery: TimeValue) -> Self {
        DeliveryJob {
            job_id,
            release,
            processing,
            delivery,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScheduledJob {
    pub job_id: TaskId,
    pub start: TimeValue,
    pub finish: TimeValue,
}

/// Non-preemptive single-machine sequence with earliest-start times.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SingleMachineSchedule {
    pub jobs: Vec<ScheduledJob>,
    /// `max_j (finish_j + q_j)`; zero for an empty sequence.
    pub delivered_by: TimeValue,
}

impl SingleMachineSchedule {
    /// Runs `order` (indices into `jobs`) back to back, each job starting at
    /// the later of its release and the previous finish.
    fn from_positions(jobs: &[DeliveryJob], order: &[usize]) -> Self {
        let mut now = TimeValue::zero();
        let mut delivered_by = TimeValue::zero();
        let mut scheduled = Vec::with_capacity(order.len());
        for &i in order {
            let job = &jobs[i];
            let start = if job.release > now { job.release.clone() } else { now };
            let finish = &start + &job.processing;
            let delivered = &finish + &job.delivery;
            if delivered > delivered_by {
                delivered_by = delivered;
            }
            now = finish.clone();
            scheduled.push(ScheduledJob {
                job_id: job.job_id,
                start,
                finish,
            });
        }
        SingleMachineSchedule {
            jobs: scheduled,
            delivered_by,
        }
    }

    /// Earliest-start schedule for an order given by job ids.
    pub fn from_order(jobs: &[DeliveryJob], order: &[TaskId]) -> Result<Self> {
        let positions = order
            .iter()
            .map(|id| {
                jobs.iter()
                    .position(|j| j.job_id == *id)
                    .ok_or_else(|| Error::Precondition(format!("job {id} not in instance")))
            })
            .collect::<Result<Vec<_>>>()?;
        if positions.iter().unique().count() != jobs.len() || positions.len() != jobs.len() {
            return Err(Error::Precondition("order is not a permutation of the jobs".into()));
        }
        Ok(Self::from_positions(jobs, &positions))
    }

    pub fn order(&self) -> Vec<TaskId> {
        self.jobs.iter().map(|j| j.job_id).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CriticalSequenceInfo {
    /// First job in the sequence whose delivery realizes `delivered_by`.
    pub critical_job: TaskId,
    /// Earliest job such that the machine never idles from it to the
    /// critical job.
    pub first_busy_job: TaskId,
    /// Last job of the critical sequence, before the critical job, whose
    /// delivery time is smaller than the critical job's.
    pub interference_job: Option<TaskId>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sequencer {
    Jks,
    Potts,
    BruteForce,
}

impl Sequencer {
    /// Proven bound on `len(G) / len(G*)`. `None` for the exact oracle.
    pub fn approximation_factor(self) -> Option<(u32, u32)> {
        match self {
            Sequencer::Jks => Some((2, 1)),
            Sequencer::Potts => Some((3, 2)),
            Sequencer::BruteForce => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Sequencer::Jks => "JKS",
            Sequencer::Potts => "POTTS",
            Sequencer::BruteForce => "BRUTE",
        }
    }
}

/// One job per task: `(r, p, q) = (c1, a1, c2)`.
pub fn reduce_to_delivery(tasks: &[&Task]) -> Vec<DeliveryJob> {
    tasks
        .iter()
        .map(|t| DeliveryJob::new(t.id, t.c1.clone(), t.a1.clone(), t.c2.clone()))
        .collect()
}

/// Extended Jackson's rule: whenever the machine is free, start the released
/// job with the largest delivery time (smallest id on ties); if none is
/// released, jump to the next release.
pub fn jks(jobs: &[DeliveryJob]) -> SingleMachineSchedule {
    SingleMachineSchedule::from_positions(jobs, &jks_positions(jobs))
}

fn jks_positions(jobs: &[DeliveryJob]) -> Vec<usize> {
    let mut by_release: Vec<usize> = (0..jobs.len()).collect();
    by_release.sort_by(|&a, &b| (&jobs[a].release, jobs[a].job_id).cmp(&(&jobs[b].release, jobs[b].job_id)));
    let mut pending = by_release.into_iter().peekable();
    let mut available: BinaryHeap<(TimeValue, Reverse<TaskId>, usize)> = BinaryHeap::new();
    let mut now = TimeValue::zero();
    let mut order = Vec::with_capacity(jobs.len());
    while order.len() < jobs.len() {
        while let Some(&i) = pending.peek() {
            if jobs[i].release <= now {
                available.push((jobs[i].delivery.clone(), Reverse(jobs[i].job_id), i));
                pending.next();
            } else {
                break;
            }
        }
        match available.pop() {
            Some((_, _, i)) => {
                now = &now + &jobs[i].processing;
                order.push(i);
            }
            None => {
                let next = pending.peek().expect("unscheduled jobs remain");
                now = jobs[*next].release.clone();
            }
        }
    }
    order
}

/// Locates the critical job, the start of its idle-free run and the
/// interference job. `None` for an empty schedule.
pub fn critical_sequence(schedule: &SingleMachineSchedule, jobs: &[DeliveryJob]) -> Option<CriticalSequenceInfo> {
    let delivery_of = |id: TaskId| -> &TimeValue {
        &jobs
            .iter()
            .find(|j| j.job_id == id)
            .expect("schedule job belongs to the instance")
            .delivery
    };
    let c = schedule
        .jobs
        .iter()
        .position(|sj| &sj.finish + delivery_of(sj.job_id) == schedule.delivered_by)?;
    let mut a = c;
    while a > 0 && schedule.jobs[a].start == schedule.jobs[a - 1].finish {
        a -= 1;
    }
    let q_c = delivery_of(schedule.jobs[c].job_id);
    let interference = (a..c)
        .rev()
        .find(|&pos| delivery_of(schedule.jobs[pos].job_id) < q_c)
        .map(|pos| schedule.jobs[pos].job_id);
    Some(CriticalSequenceInfo {
        critical_job: schedule.jobs[c].job_id,
        first_busy_job: schedule.jobs[a].job_id,
        interference_job: interference,
    })
}

/// Potts' iterative improvement over the extended Jackson's rule.
///
/// Each iteration runs JKS on a working copy of the instance. If the
/// resulting critical sequence has an interference job, its release is
/// raised to the critical job's release and JKS runs again, for at most `n`
/// runs in total. Every candidate order is re-timed against the original
/// releases, and the best one is returned.
pub fn potts(jobs: &[DeliveryJob]) -> SingleMachineSchedule {
    let mut working = jobs.to_vec();
    let mut best: Option<SingleMachineSchedule> = None;
    for _ in 0..jobs.len().max(1) {
        let positions = jks_positions(&working);
        let candidate = SingleMachineSchedule::from_positions(jobs, &positions);
        if best.as_ref().is_none_or(|b| candidate.delivered_by < b.delivered_by) {
            best = Some(candidate);
        }
        let modified = SingleMachineSchedule::from_positions(&working, &positions);
        let Some(info) = critical_sequence(&modified, &working) else {
            break;
        };
        let Some(b) = info.interference_job else {
            break;
        };
        let r_c = working
            .iter()
            .find(|j| j.job_id == info.critical_job)
            .expect("critical job in instance")
            .release
            .clone();
        let job_b = working.iter_mut().find(|j| j.job_id == b).expect("interference job in instance");
        job_b.release = r_c;
    }
    best.expect("at least one iteration")
}

/// Exhaustive search over all orders under earliest-start timing. Returns the
/// lexicographically first optimal order (by position in `jobs`).
///
/// Orders are explored depth first in lexicographic order and a branch is
/// cut once its lower bound shows it cannot beat the incumbent, so the
/// result is the same as full enumeration.
pub fn brute_force_optimal(jobs: &[DeliveryJob], cap: usize) -> Result<SingleMachineSchedule> {
    if jobs.len() > cap {
        return Err(Error::BruteForceCap { jobs: jobs.len(), cap });
    }
    let Some(scaled) = IntJobs::new(jobs) else {
        let mut best: Option<SingleMachineSchedule> = None;
        for perm in (0..jobs.len()).permutations(jobs.len()) {
            let candidate = SingleMachineSchedule::from_positions(jobs, &perm);
            if best.as_ref().is_none_or(|b| candidate.delivered_by < b.delivered_by) {
                best = Some(candidate);
            }
        }
        return Ok(best.expect("permutations of an empty set still yield one order"));
    };
    let upper = scaled.value(&jks_positions(jobs));
    let mut search = Search {
        jobs: &scaled,
        upper,
        best: None,
        prefix: Vec::with_capacity(jobs.len()),
        used: vec![false; jobs.len()],
    };
    search.dfs(0, 0);
    let (_, order) = search.best.expect("the upper bound is attained by some order");
    Ok(SingleMachineSchedule::from_positions(jobs, &order))
}

/// Jobs rescaled to integers by the common denominator.
struct IntJobs {
    r: Vec<i128>,
    p: Vec<i128>,
    q: Vec<i128>,
}

impl IntJobs {
    fn new(jobs: &[DeliveryJob]) -> Option<Self> {
        use num_integer::Integer;
        use num_traits::ToPrimitive;
        let mut den = num_bigint::BigInt::from(1);
        for j in jobs {
            for v in [&j.release, &j.processing, &j.delivery] {
                den = den.lcm(v.denom());
            }
        }
        let conv = |v: &TimeValue| (v.numer() * (&den / v.denom())).to_i128().filter(|x| x.abs() < 1 << 100);
        let mut out = IntJobs {
            r: Vec::new(),
            p: Vec::new(),
            q: Vec::new(),
        };
        for j in jobs {
            out.r.push(conv(&j.release)?);
            out.p.push(conv(&j.processing)?);
            out.q.push(conv(&j.delivery)?);
        }
        Some(out)
    }

    fn value(&self, order: &[usize]) -> i128 {
        let (mut now, mut best) = (0, 0);
        for &i in order {
            now = now.max(self.r[i]) + self.p[i];
            best = best.max(now + self.q[i]);
        }
        best
    }
}

struct Search<'a> {
    jobs: &'a IntJobs,
    upper: i128,
    best: Option<(i128, Vec<usize>)>,
    prefix: Vec<usize>,
    used: Vec<bool>,
}

impl Search<'_> {
    fn hopeless(&self, bound: i128) -> bool {
        bound > self.upper || self.best.as_ref().is_some_and(|(b, _)| bound >= *b)
    }

    fn dfs(&mut self, now: i128, partial: i128) {
        let n = self.used.len();
        if self.prefix.len() == n {
            if !self.hopeless(partial) {
                self.best = Some((partial, self.prefix.clone()));
            }
            return;
        }
        let j = self.jobs;
        let (mut lb, mut min_r, mut min_q, mut sum_p) = (partial, i128::MAX, i128::MAX, 0);
        for i in (0..n).filter(|&i| !self.used[i]) {
            lb = lb.max(now.max(j.r[i]) + j.p[i] + j.q[i]);
            min_r = min_r.min(j.r[i]);
            min_q = min_q.min(j.q[i]);
            sum_p += j.p[i];
        }
        lb = lb.max(now.max(min_r) + sum_p + min_q);
        if self.hopeless(lb) {
            return;
        }
        for i in 0..n {
            if self.used[i] {
                continue;
            }
            let finish = now.max(j.r[i]) + j.p[i];
            self.used[i] = true;
            self.prefix.push(i);
            self.dfs(finish, partial.max(finish + j.q[i]));
            self.prefix.pop();
            self.used[i] = false;
        }
    }
}

pub fn sequence(jobs: &[DeliveryJob], sequencer: Sequencer) -> Result<SingleMachineSchedule> {
    match sequencer {
        Sequencer::Jks => Ok(jks(jobs)),
        Sequencer::Potts => Ok(potts(jobs)),
        Sequencer::BruteForce => brute_force_optimal(jobs, DEFAULT_BRUTE_FORCE_CAP),
    }
}

/// Per-semaphore single-machine schedules chosen by `sequencer`, indexed by
/// semaphore.
pub fn sequence_all(tasks: &TaskSet, sequencer: Sequencer) -> Result<Vec<SingleMachineSchedule>> {
    (0..tasks.z())
        .map(|k| sequence(&reduce_to_delivery(&tasks.tasks_of(SemaphoreId(k))), sequencer))
        .collect()
}

/// Builds the dependency graph whose chains follow the sequencer's orders.
pub fn build_graph(tasks: &TaskSet, sequencer: Sequencer) -> Result<DependencyGraph> {
    let chains = sequence_all(tasks, sequencer)?.iter().map(SingleMachineSchedule::order).collect();
    DependencyGraph::new(tasks, chains)
}

/// `len(G)`; fails on a cyclic graph.
pub fn critical_path_length(graph: &DependencyGraph) -> Result<TimeValue> {
    graph.critical_path_length()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TaskSpec;
    use proptest::prelude::*;

    fn t(n: i64) -> TimeValue {
        TimeValue::ratio(n, 1)
    }

    fn job(id: usize, r: i64, p: i64, q: i64) -> DeliveryJob {
        DeliveryJob::new(TaskId(id), t(r), t(p), t(q))
    }

    fn ids(v: &[usize]) -> Vec<TaskId> {
        v.iter().map(|&i| TaskId(i)).collect()
    }

    /// Test oracle: evaluate every order directly.
    fn oracle_optimum(jobs: &[DeliveryJob]) -> TimeValue {
        (0..jobs.len())
            .permutations(jobs.len())
            .map(|perm| {
                let mut now = TimeValue::zero();
                let mut worst = TimeValue::zero();
                for i in perm {
                    let start = now.clone().max(jobs[i].release.clone());
                    now = start + &jobs[i].processing;
                    worst = worst.max(&now + &jobs[i].delivery);
                }
                worst
            })
            .min()
            .unwrap()
    }

    fn three_jobs() -> Vec<DeliveryJob> {
        vec![job(1, 0, 2, 3), job(2, 1, 2, 0), job(3, 2, 1, 1)]
    }

    #[test]
    fn reduction_maps_fields() {
        let ts = TaskSet::from_specs(vec![TaskSpec::new(t(0), t(2), t(3), Some("s"))], None).unwrap();
        let jobs = reduce_to_delivery(&ts.tasks_of(SemaphoreId(0)));
        assert_eq!(jobs, vec![job(1, 0, 2, 3)]);
        assert!(reduce_to_delivery(&[]).is_empty());
    }

    #[test]
    fn jks_examples() {
        let s = jks(&three_jobs());
        assert_eq!(s.order(), ids(&[1, 3, 2]));
        assert_eq!(s.delivered_by, t(5));
        assert_eq!(oracle_optimum(&three_jobs()), t(5));

        assert_eq!(jks(&[job(1, 5, 1, 4)]).delivered_by, t(10));

        let common = vec![job(1, 0, 3, 2), job(2, 0, 1, 2), job(3, 0, 4, 2)];
        assert_eq!(jks(&common).delivered_by, t(3 + 1 + 4 + 2));
    }

    #[test]
    fn jks_jumps_over_idle_time() {
        let s = jks(&[job(1, 4, 1, 0), job(2, 0, 1, 0)]);
        assert_eq!(s.order(), ids(&[2, 1]));
        assert_eq!(s.jobs[1].start, t(4));
        assert_eq!(s.delivered_by, t(5));
    }

    #[test]
    fn critical_sequence_examples() {
        let jobs = three_jobs();
        let info = critical_sequence(&jks(&jobs), &jobs).unwrap();
        assert_eq!(info.critical_job, TaskId(1));
        assert_eq!(info.first_busy_job, TaskId(1));
        assert_eq!(info.interference_job, None);

        let single = vec![job(1, 0, 1, 1)];
        let info = critical_sequence(&jks(&single), &single).unwrap();
        assert_eq!((info.critical_job, info.interference_job), (TaskId(1), None));

        let two = vec![job(1, 0, 1, 0), job(2, 0, 1, 10)];
        let s = SingleMachineSchedule::from_order(&two, &ids(&[2, 1])).unwrap();
        let info = critical_sequence(&s, &two).unwrap();
        assert_eq!((info.critical_job, info.interference_job), (TaskId(2), None));

        let blocking = vec![job(1, 0, 10, 0), job(2, 1, 1, 9)];
        let info = critical_sequence(&jks(&blocking), &blocking).unwrap();
        assert_eq!(info.critical_job, TaskId(2));
        assert_eq!(info.first_busy_job, TaskId(1));
        assert_eq!(info.interference_job, Some(TaskId(1)));
    }

    #[test]
    fn potts_examples() {
        let blocking = vec![job(1, 0, 10, 0), job(2, 1, 1, 9)];
        assert_eq!(jks(&blocking).delivered_by, t(20));
        let p = potts(&blocking);
        assert_eq!(p.order(), ids(&[2, 1]));
        assert_eq!(p.delivered_by, t(12));
        assert_eq!(oracle_optimum(&blocking), t(12));

        assert_eq!(potts(&three_jobs()).delivered_by, t(5));

        let no_interference = vec![job(1, 0, 1, 5), job(2, 0, 1, 1)];
        assert_eq!(potts(&no_interference), jks(&no_interference));
        assert_eq!(potts(&[]).delivered_by, TimeValue::zero());
    }

    #[test]
    fn brute_force_examples() {
        let s = brute_force_optimal(&three_jobs(), DEFAULT_BRUTE_FORCE_CAP).unwrap();
        assert_eq!(s.order(), ids(&[1, 3, 2]));
        assert_eq!(s.delivered_by, t(5));

        let single = vec![job(7, 1, 2, 3)];
        assert_eq!(brute_force_optimal(&single, 9).unwrap().order(), ids(&[7]));

        let twins = vec![job(1, 0, 2, 1), job(2, 0, 2, 1)];
        assert_eq!(brute_force_optimal(&twins, 9).unwrap().delivered_by, t(5));

        let many: Vec<_> = (1..=10).map(|i| job(i, 0, 1, 0)).collect();
        assert!(matches!(
            brute_force_optimal(&many, DEFAULT_BRUTE_FORCE_CAP),
            Err(Error::BruteForceCap { jobs: 10, cap: 9 })
        ));
    }

    #[test]
    fn graph_without_shared_semaphores_has_no_chain_edges() {
        let ts = TaskSet::from_specs(
            vec![
                TaskSpec::new(t(1), t(1), t(1), Some("a")),
                TaskSpec::new(t(1), t(1), t(1), Some("b")),
                TaskSpec::new(t(1), t(0), t(1), None),
            ],
            None,
        )
        .unwrap();
        let g = build_graph(&ts, Sequencer::Potts).unwrap();
        assert_eq!(g.edge_count(), 6);
        assert_eq!(critical_path_length(&g).unwrap(), t(3));
    }

    #[test]
    fn single_task_critical_path() {
        let ts = TaskSet::from_specs(vec![TaskSpec::new(t(1), t(2), t(3), Some("s"))], None).unwrap();
        let g = build_graph(&ts, Sequencer::Jks).unwrap();
        assert_eq!(critical_path_length(&g).unwrap(), t(6));
    }

    fn arb_jobs(max: usize) -> impl Strategy<Value = Vec<DeliveryJob>> {
        prop::collection::vec((0i64..6, 0i64..6, 0i64..6), 1..=max).prop_map(|v| {
            v.into_iter()
                .enumerate()
                .map(|(i, (r, p, q))| job(i + 1, r, p, q))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn sequencers_respect_their_ratios(jobs in arb_jobs(6)) {
            let opt = oracle_optimum(&jobs);
            let brute = brute_force_optimal(&jobs, 9).unwrap();
            prop_assert_eq!(&brute.delivered_by, &opt);
            let j = jks(&jobs).delivered_by;
            let p = potts(&jobs).delivered_by;
            prop_assert!(p <= j);
            prop_assert!(j <= &opt + &opt);
            prop_assert!(p.scale(&num_rational::BigRational::from_integer(2.into())) <= opt.scale(&num_rational::BigRational::from_integer(3.into())));
        }

        #[test]
        fn brute_force_invariant_under_relabeling(jobs in arb_jobs(5)) {
            let relabeled: Vec<_> = jobs
                .iter()
                .rev()
                .enumerate()
                .map(|(i, j)| DeliveryJob::new(TaskId(100 + i), j.release.clone(), j.processing.clone(), j.delivery.clone()))
                .collect();
            prop_assert_eq!(
                brute_force_optimal(&jobs, 9).unwrap().delivered_by,
                brute_force_optimal(&relabeled, 9).unwrap().delivered_by
            );
        }

        #[test]
        fn pruned_search_returns_first_optimal_order(jobs in arb_jobs(6), den in 1i64..4) {
            let scaled: Vec<_> = jobs
                .iter()
                .map(|j| {
                    let f = num_rational::BigRational::new(1.into(), den.into());
                    DeliveryJob::new(j.job_id, j.release.scale(&f), j.processing.scale(&f), j.delivery.scale(&f))
                })
                .collect();
            let first = (0..scaled.len())
                .permutations(scaled.len())
                .map(|perm| SingleMachineSchedule::from_positions(&scaled, &perm))
                .reduce(|best, c| if c.delivered_by < best.delivered_by { c } else { best })
                .unwrap();
            prop_assert_eq!(brute_force_optimal(&scaled, 9).unwrap(), first);
        }

        #[test]
        fn jks_is_earliest_start(jobs in arb_jobs(7)) {
            let s = jks(&jobs);
            let retimed = SingleMachineSchedule::from_order(&jobs, &s.order()).unwrap();
            prop_assert_eq!(s, retimed);
        }
    }
}
