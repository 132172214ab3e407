//! Multiprocessor schedules for a dependency graph.
//!
//! * [`schedule_dedicated`]: one processor per task, everything as early as
//!   precedence allows (`M >= N`). Its makespan is exactly `len(G)`.
//! * [`schedule_semi_partitioned`]: event-driven list scheduling of
//!   individual subjobs, optionally letting critical sections preempt
//!   running second non-critical sections.
//! * [`schedule_partitioned_tied`]: tied list scheduling, where a task is
//!   bound to the processor that starts it and second non-critical
//!   sections are padded into idle time afterwards.
//! * [`schedule_partitioned_simple`]: all first non-critical sections are
//!   list scheduled first, which fixes each task's processor; critical
//!   sections follow, then second sections are padded.
//!
//! Zero-length subjobs complete the instant they become eligible and never
//! produce segments.

use std::cmp::Reverse;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DependencyGraph, Policy, Schedule, Segment, SemaphoreId, SubjobKind, SubjobRef, TaskId, TaskSet, VertexId};
use crate::time::TimeValue;

/// Order in which eligible subjobs are dispatched.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum PriorityRule {
    /// Critical sections first, the one whose semaphore has the most
    /// unfinished critical-section work leading. Non-critical sections by
    /// descending bottom level. Ties by task id.
    #[default]
    LongestChainFirst,
    /// Highest level first: every eligible subjob by descending bottom level
    /// (longest path to a sink), ties by kind then task id.
    BottomLevel,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchedulerConfig {
    pub processors: usize,
    pub policy: Policy,
    /// For the partitioned policies: pad second non-critical sections
    /// preemptively (split across idle gaps) rather than contiguously.
    pub preempt_second_sections: bool,
    pub priority_rule: PriorityRule,
}

impl SchedulerConfig {
    pub fn new(processors: usize, policy: Policy) -> Self {
        SchedulerConfig {
            processors,
            policy,
            preempt_second_sections: true,
            priority_rule: PriorityRule::default(),
        }
    }
}

/// Dispatches to the scheduler for `config.policy`. The tied policy falls
/// back to [`schedule_dedicated`] when `N <= M`.
pub fn schedule(graph: &DependencyGraph, tasks: &TaskSet, config: &SchedulerConfig) -> Result<Schedule> {
    if config.processors == 0 {
        return Err(Error::Precondition("at least one processor is required".into()));
    }
    match config.policy {
        Policy::SemiPartitionedNp => {
            schedule_semi_partitioned_with(graph, tasks, config.processors, false, config.priority_rule)
        }
        Policy::SemiPartitionedP => {
            schedule_semi_partitioned_with(graph, tasks, config.processors, true, config.priority_rule)
        }
        Policy::PartitionedTied => {
            if tasks.len() <= config.processors {
                schedule_dedicated(graph, tasks, config.processors)
            } else {
                tied_list_schedule(graph, tasks, config)
            }
        }
        Policy::PartitionedSimple => simple_partitioned(graph, tasks, config),
    }
}

/// Task `i` runs entirely on processor `i`, each subjob starting as soon as
/// its predecessors in `graph` finish.
pub fn schedule_dedicated(graph: &DependencyGraph, tasks: &TaskSet, processors: usize) -> Result<Schedule> {
    if processors < tasks.len() {
        return Err(Error::Precondition(format!(
            "dedicated scheduling needs M >= N ({} < {}); use a list policy",
            processors,
            tasks.len()
        )));
    }
    let finish = graph.earliest_finish()?;
    let mut segments = Vec::new();
    for (v, end) in finish.iter().enumerate() {
        let duration = graph.duration(v);
        if duration.is_zero() {
            continue;
        }
        let sj = DependencyGraph::subjob(v);
        segments.push(Segment {
            task: sj.task,
            kind: sj.kind,
            processor: sj.task.0,
            start: end - duration,
            end: end.clone(),
        });
    }
    Ok(Schedule::new(segments, processors, Policy::PartitionedTied))
}

pub fn schedule_semi_partitioned(
    graph: &DependencyGraph,
    tasks: &TaskSet,
    processors: usize,
    preempt_c2: bool,
) -> Result<Schedule> {
    schedule_semi_partitioned_with(graph, tasks, processors, preempt_c2, PriorityRule::default())
}

pub fn schedule_partitioned_tied(graph: &DependencyGraph, tasks: &TaskSet, processors: usize) -> Result<Schedule> {
    schedule(graph, tasks, &SchedulerConfig::new(processors, Policy::PartitionedTied))
}

pub fn schedule_partitioned_simple(
    graph: &DependencyGraph,
    tasks: &TaskSet,
    processors: usize,
    preempt_c2: bool,
) -> Result<Schedule> {
    let mut config = SchedulerConfig::new(processors, Policy::PartitionedSimple);
    config.preempt_second_sections = preempt_c2;
    schedule(graph, tasks, &config)
}

/// `(W - len(G)) / M + len(G)`: the makespan bound every list schedule of
/// `graph` satisfies.
pub fn list_schedule_bound(graph: &DependencyGraph, tasks: &TaskSet, processors: usize) -> Result<TimeValue> {
    let len = graph.critical_path_length()?;
    let work = crate::model::total_work(tasks);
    Ok(work.saturating_sub(&len).div_int(processors) + len)
}

type Key = (u8, Reverse<TimeValue>, u8, TaskId);

/// Priority keys; smaller is dispatched first.
struct Priorities {
    rule: PriorityRule,
    bottom: Vec<TimeValue>,
    chain_remaining: Vec<TimeValue>,
    semaphore_of: Vec<Option<SemaphoreId>>,
}

impl Priorities {
    fn new(graph: &DependencyGraph, tasks: &TaskSet, rule: PriorityRule) -> Result<Self> {
        let mut chain_remaining = vec![TimeValue::zero(); tasks.z()];
        for task in tasks.tasks() {
            if let Some(s) = task.semaphore {
                chain_remaining[s.0] += &task.a1;
            }
        }
        Ok(Priorities {
            rule,
            bottom: graph.bottom_levels()?,
            chain_remaining,
            semaphore_of: tasks.tasks().iter().map(|t| t.semaphore).collect(),
        })
    }

    fn key(&self, v: VertexId) -> Key {
        let sj = DependencyGraph::subjob(v);
        let rank = kind_rank(sj.kind);
        match (sj.kind, self.rule) {
            (SubjobKind::Critical, PriorityRule::LongestChainFirst) => {
                let remaining = self.semaphore_of[sj.task.index()]
                    .map(|s| self.chain_remaining[s.0].clone())
                    .unwrap_or_default();
                (0, Reverse(remaining), rank, sj.task)
            }
            (_, PriorityRule::LongestChainFirst) => (1, Reverse(self.bottom[v].clone()), rank, sj.task),
            (_, PriorityRule::BottomLevel) => (0, Reverse(self.bottom[v].clone()), rank, sj.task),
        }
    }

    fn critical_done(&mut self, task: TaskId, a1: &TimeValue) {
        if let Some(s) = self.semaphore_of[task.index()] {
            self.chain_remaining[s.0] = self.chain_remaining[s.0].saturating_sub(a1);
        }
    }
}

fn kind_rank(kind: SubjobKind) -> u8 {
    match kind {
        SubjobKind::FirstNonCritical => 0,
        SubjobKind::Critical => 1,
        SubjobKind::SecondNonCritical => 2,
    }
}

#[derive(Clone, Debug)]
struct Run {
    vertex: VertexId,
    since: TimeValue,
}

/// Event-driven list scheduler over individual subjobs.
struct ListSim<'a> {
    graph: &'a DependencyGraph,
    priorities: Priorities,
    preempt_c2: bool,
    /// Remaining work of each vertex as of its last start or preemption.
    remaining: Vec<TimeValue>,
    preds_left: Vec<usize>,
    done: Vec<bool>,
    ready: Vec<VertexId>,
    running: Vec<Option<Run>>,
    segments: Vec<Segment>,
}

impl<'a> ListSim<'a> {
    fn new(graph: &'a DependencyGraph, priorities: Priorities, processors: usize, preempt_c2: bool) -> Self {
        let n = graph.vertex_count();
        ListSim {
            graph,
            priorities,
            preempt_c2,
            remaining: (0..n).map(|v| graph.duration(v).clone()).collect(),
            preds_left: (0..n).map(|v| graph.predecessors(v).len()).collect(),
            done: vec![false; n],
            ready: Vec::new(),
            running: vec![None; processors],
            segments: Vec::new(),
        }
    }

    fn release(&mut self, v: VertexId) {
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            if !self.graph.duration(u).is_zero() {
                self.ready.push(u);
                continue;
            }
            self.complete(u);
            for &w in self.graph.successors(u) {
                self.preds_left[w] -= 1;
                if self.preds_left[w] == 0 {
                    stack.push(w);
                }
            }
        }
    }

    fn complete(&mut self, v: VertexId) {
        self.done[v] = true;
        let sj = DependencyGraph::subjob(v);
        if sj.kind == SubjobKind::Critical {
            self.priorities.critical_done(sj.task, self.graph.duration(v));
        }
    }

    fn finish(&mut self, proc: usize, now: &TimeValue) {
        let run = self.running[proc].take().expect("finishing an idle processor");
        self.push_segment(run.vertex, proc, run.since, now.clone());
        self.remaining[run.vertex] = TimeValue::zero();
        self.complete(run.vertex);
        let succ: Vec<VertexId> = self.graph.successors(run.vertex).to_vec();
        for w in succ {
            self.preds_left[w] -= 1;
            if self.preds_left[w] == 0 {
                self.release(w);
            }
        }
    }

    fn push_segment(&mut self, v: VertexId, proc: usize, start: TimeValue, end: TimeValue) {
        if start < end {
            let sj = DependencyGraph::subjob(v);
            self.segments.push(Segment {
                task: sj.task,
                kind: sj.kind,
                processor: proc + 1,
                start,
                end,
            });
        }
    }

    fn dispatch(&mut self, now: &TimeValue) {
        let mut ready = std::mem::take(&mut self.ready);
        ready.sort_by_cached_key(|&v| self.priorities.key(v));
        let mut queue = ready.into_iter().peekable();
        for proc in 0..self.running.len() {
            if self.running[proc].is_none() {
                match queue.next() {
                    Some(v) => {
                        self.running[proc] = Some(Run {
                            vertex: v,
                            since: now.clone(),
                        })
                    }
                    None => break,
                }
            }
        }
        let mut leftover: Vec<VertexId> = Vec::new();
        for v in queue {
            let is_critical = DependencyGraph::subjob(v).kind == SubjobKind::Critical;
            if self.preempt_c2 && is_critical {
                if let Some(proc) = self.preemption_victim(now) {
                    let victim = self.running[proc].take().expect("victim is running");
                    let elapsed = now - &victim.since;
                    self.remaining[victim.vertex] = &self.remaining[victim.vertex] - &elapsed;
                    self.push_segment(victim.vertex, proc, victim.since, now.clone());
                    leftover.push(victim.vertex);
                    self.running[proc] = Some(Run {
                        vertex: v,
                        since: now.clone(),
                    });
                    continue;
                }
            }
            leftover.push(v);
        }
        self.ready = leftover;
    }

    /// Running second non-critical section with the most remaining work;
    /// highest processor index on ties. Sections dispatched at `now` are
    /// not candidates.
    fn preemption_victim(&self, now: &TimeValue) -> Option<usize> {
        let mut best: Option<(TimeValue, usize)> = None;
        for (proc, run) in self.running.iter().enumerate() {
            let Some(run) = run else { continue };
            if DependencyGraph::subjob(run.vertex).kind != SubjobKind::SecondNonCritical || run.since == *now {
                continue;
            }
            let left = self.remaining[run.vertex].saturating_sub(&(now - &run.since));
            if best.as_ref().is_none_or(|(b, _)| left >= *b) {
                best = Some((left, proc));
            }
        }
        best.map(|(_, p)| p)
    }

    fn run(mut self) -> Result<Vec<Segment>> {
        let mut now = TimeValue::zero();
        let sources: Vec<VertexId> = (0..self.graph.vertex_count())
            .filter(|&v| self.preds_left[v] == 0)
            .collect();
        for v in sources {
            self.release(v);
        }
        loop {
            self.dispatch(&now);
            let next = self
                .running
                .iter()
                .flatten()
                .map(|r| &r.since + &self.remaining[r.vertex])
                .min();
            let Some(next) = next else { break };
            now = next;
            for proc in 0..self.running.len() {
                let finishes = self.running[proc]
                    .as_ref()
                    .is_some_and(|r| &r.since + &self.remaining[r.vertex] == now);
                if finishes {
                    self.finish(proc, &now);
                }
            }
        }
        if self.done.iter().all(|&d| d) {
            Ok(self.segments)
        } else {
            Err(Error::CyclicGraph)
        }
    }
}

fn schedule_semi_partitioned_with(
    graph: &DependencyGraph,
    tasks: &TaskSet,
    processors: usize,
    preempt_c2: bool,
    rule: PriorityRule,
) -> Result<Schedule> {
    if processors == 0 {
        return Err(Error::Precondition("at least one processor is required".into()));
    }
    let priorities = Priorities::new(graph, tasks, rule)?;
    let segments = ListSim::new(graph, priorities, processors, preempt_c2).run()?;
    let policy = if preempt_c2 {
        Policy::SemiPartitionedP
    } else {
        Policy::SemiPartitionedNp
    };
    Ok(Schedule::new(segments, processors, policy))
}

/// Busy intervals of one processor, kept sorted by start.
#[derive(Default, Debug)]
struct Timeline {
    busy: Vec<(TimeValue, TimeValue)>,
}

impl Timeline {
    fn insert(&mut self, start: TimeValue, end: TimeValue) {
        let pos = self.busy.partition_point(|(s, _)| *s < start);
        self.busy.insert(pos, (start, end));
    }

    /// Idle gaps starting no earlier than `from`; the last gap is unbounded.
    fn gaps_from(&self, from: &TimeValue) -> Vec<(TimeValue, Option<TimeValue>)> {
        let mut gaps = Vec::new();
        let mut cursor = from.clone();
        for (s, e) in &self.busy {
            if *e <= cursor {
                continue;
            }
            if *s > cursor {
                gaps.push((cursor.clone(), Some(s.clone())));
            }
            cursor = e.clone();
        }
        gaps.push((cursor, None));
        gaps
    }

    /// Fills idle gaps from `from` onwards with `length` units, splitting as
    /// needed. Returns the pieces.
    fn fill_preemptive(&mut self, from: &TimeValue, length: &TimeValue) -> Vec<(TimeValue, TimeValue)> {
        let mut left = length.clone();
        let mut pieces = Vec::new();
        for (start, end) in self.gaps_from(from) {
            if left.is_zero() {
                break;
            }
            let room = end.as_ref().map(|e| e - &start);
            let take = match room {
                Some(room) if room < left => room,
                _ => left.clone(),
            };
            let piece_end = &start + &take;
            left = &left - &take;
            pieces.push((start, piece_end));
        }
        for (s, e) in &pieces {
            self.insert(s.clone(), e.clone());
        }
        pieces
    }

    /// First gap from `from` onwards that holds `length` contiguously.
    fn fill_contiguous(&mut self, from: &TimeValue, length: &TimeValue) -> (TimeValue, TimeValue) {
        let (start, _) = self
            .gaps_from(from)
            .into_iter()
            .find(|(s, e)| e.as_ref().is_none_or(|e| &(e - s) >= length))
            .expect("the trailing gap is unbounded");
        let end = &start + length;
        self.insert(start.clone(), end.clone());
        (start, end)
    }
}

/// Shared state for the partitioned schedulers: per-task binding and
/// completion times of first and critical sections.
struct TiedState {
    processor_of: Vec<Option<usize>>,
    c1_finish: Vec<Option<TimeValue>>,
    cs_finish: Vec<Option<TimeValue>>,
    cs_started: Vec<bool>,
    timelines: Vec<Timeline>,
    segments: Vec<Segment>,
}

impl TiedState {
    fn new(n: usize, processors: usize) -> Self {
        TiedState {
            processor_of: vec![None; n],
            c1_finish: vec![None; n],
            cs_finish: vec![None; n],
            cs_started: vec![false; n],
            timelines: (0..processors).map(|_| Timeline::default()).collect(),
            segments: Vec::new(),
        }
    }

    fn record(&mut self, task: TaskId, kind: SubjobKind, proc: usize, start: TimeValue, end: TimeValue) {
        if start < end {
            self.timelines[proc].insert(start.clone(), end.clone());
            self.segments.push(Segment {
                task,
                kind,
                processor: proc + 1,
                start,
                end,
            });
        }
    }

    fn critical_eligible(&self, graph: &DependencyGraph, task: TaskId) -> bool {
        let i = task.index();
        self.c1_finish[i].is_some()
            && !self.cs_started[i]
            && graph
                .chain_predecessor(task)
                .is_none_or(|p| self.cs_finish[p.index()].is_some())
    }

    /// Second non-critical sections as lowest-priority background work on
    /// each task's processor, never before the task's critical section ends.
    fn pad_second_sections(&mut self, tasks: &TaskSet, preemptive: bool) {
        let mut order: Vec<TaskId> = tasks.tasks().iter().map(|t| t.id).collect();
        order.sort_by(|a, b| (&self.cs_finish[a.index()], a).cmp(&(&self.cs_finish[b.index()], b)));
        for id in order {
            let task = tasks.task(id);
            if task.c2.is_zero() {
                continue;
            }
            let proc = self.processor_of[id.index()].expect("every task is bound");
            let from = self.cs_finish[id.index()].clone().expect("critical sections are complete");
            let pieces = if preemptive {
                self.timelines[proc].fill_preemptive(&from, &task.c2)
            } else {
                vec![self.timelines[proc].fill_contiguous(&from, &task.c2)]
            };
            for (start, end) in pieces {
                self.segments.push(Segment {
                    task: id,
                    kind: SubjobKind::SecondNonCritical,
                    processor: proc + 1,
                    start,
                    end,
                });
            }
        }
    }
}

/// Tied list scheduling for `N > M`.
///
/// One task is seeded per processor at time 0. Whenever processors are idle
/// at a decision time, each one in index order runs (a) an eligible critical
/// section of a task bound to it, else (b) an unfinished first section of a
/// bound task, else (c) binds the unassigned task with the largest total
/// work and starts its first section. Second sections are padded last.
fn tied_list_schedule(graph: &DependencyGraph, tasks: &TaskSet, config: &SchedulerConfig) -> Result<Schedule> {
    let m = config.processors;
    let n = tasks.len();
    let mut priorities = Priorities::new(graph, tasks, config.priority_rule)?;
    let mut state = TiedState::new(n, m);
    let mut unassigned: Vec<TaskId> = tasks.tasks().iter().map(|t| t.id).collect();
    unassigned.sort_by_key(|id| (Reverse(tasks.task(*id).total()), *id));
    let mut unassigned = unassigned.into_iter();
    let mut bound: Vec<Vec<TaskId>> = vec![Vec::new(); m];
    // (task, kind, end) of what each processor is running.
    let mut busy: Vec<Option<(TaskId, SubjobKind, TimeValue, TimeValue)>> = vec![None; m];
    let mut now = TimeValue::zero();

    let start_subjob = |state: &mut TiedState,
                        busy: &mut Vec<Option<(TaskId, SubjobKind, TimeValue, TimeValue)>>,
                        priorities: &mut Priorities,
                        proc: usize,
                        id: TaskId,
                        kind: SubjobKind,
                        now: &TimeValue| {
        let task = tasks.task(id);
        let len = task.duration(kind);
        if kind == SubjobKind::Critical {
            state.cs_started[id.index()] = true;
        }
        if len.is_zero() {
            complete_partitioned(state, priorities, tasks, id, kind, now);
        } else {
            busy[proc] = Some((id, kind, now.clone(), now + len));
        }
    };

    for (proc, slot) in bound.iter_mut().enumerate() {
        let id = unassigned.next().expect("N > M");
        slot.push(id);
        state.processor_of[id.index()] = Some(proc);
        start_subjob(&mut state, &mut busy, &mut priorities, proc, id, SubjobKind::FirstNonCritical, &now);
    }

    loop {
        let mut changed = true;
        while changed {
            changed = false;
            for proc in 0..m {
                if busy[proc].is_some() {
                    continue;
                }
                let critical = bound[proc]
                    .iter()
                    .copied()
                    .filter(|&id| state.critical_eligible(graph, id))
                    .min_by_key(|&id| priorities.key(DependencyGraph::vertex(SubjobRef::new(id, SubjobKind::Critical))));
                if let Some(id) = critical {
                    start_subjob(&mut state, &mut busy, &mut priorities, proc, id, SubjobKind::Critical, &now);
                    changed = true;
                    continue;
                }
                let pending_first = bound[proc]
                    .iter()
                    .copied()
                    .find(|&id| state.c1_finish[id.index()].is_none());
                if let Some(id) = pending_first {
                    start_subjob(&mut state, &mut busy, &mut priorities, proc, id, SubjobKind::FirstNonCritical, &now);
                    changed = true;
                    continue;
                }
                if let Some(id) = unassigned.next() {
                    bound[proc].push(id);
                    state.processor_of[id.index()] = Some(proc);
                    start_subjob(&mut state, &mut busy, &mut priorities, proc, id, SubjobKind::FirstNonCritical, &now);
                    changed = true;
                }
            }
        }
        if state.cs_finish.iter().all(Option::is_some) {
            break;
        }
        let Some(next) = busy.iter().flatten().map(|(_, _, _, end)| end).min().cloned() else {
            return Err(Error::Precondition("tied scheduling stalled; graph chains are inconsistent".into()));
        };
        now = next;
        for (proc, slot) in busy.iter_mut().enumerate() {
            if slot.as_ref().is_some_and(|(_, _, _, end)| *end == now) {
                let (id, kind, start, end) = slot.take().expect("checked");
                state.record(id, kind, proc, start, end);
                complete_partitioned(&mut state, &mut priorities, tasks, id, kind, &now);
            }
        }
    }

    state.pad_second_sections(tasks, config.preempt_second_sections);
    Ok(Schedule::new(state.segments, m, Policy::PartitionedTied))
}

/// Marks a first or critical section complete at `now`. A task without a
/// critical section finishes it together with its first section.
fn complete_partitioned(
    state: &mut TiedState,
    priorities: &mut Priorities,
    tasks: &TaskSet,
    id: TaskId,
    kind: SubjobKind,
    now: &TimeValue,
) {
    let task = tasks.task(id);
    match kind {
        SubjobKind::FirstNonCritical => {
            state.c1_finish[id.index()] = Some(now.clone());
            if task.semaphore.is_none() && task.a1.is_zero() {
                state.cs_started[id.index()] = true;
                state.cs_finish[id.index()] = Some(now.clone());
            }
        }
        SubjobKind::Critical => {
            state.cs_finish[id.index()] = Some(now.clone());
            priorities.critical_done(id, &task.a1);
        }
        SubjobKind::SecondNonCritical => unreachable!("second sections are padded separately"),
    }
}

/// The simple partitioning heuristic: list schedule every first section
/// (task order, earliest-free processor), bind each task to that processor,
/// then run critical sections on their bound processors no earlier than the
/// moment all first sections are done, then pad second sections.
fn simple_partitioned(graph: &DependencyGraph, tasks: &TaskSet, config: &SchedulerConfig) -> Result<Schedule> {
    let m = config.processors;
    let mut priorities = Priorities::new(graph, tasks, config.priority_rule)?;
    let mut state = TiedState::new(tasks.len(), m);
    let mut free_at = vec![TimeValue::zero(); m];
    let mut bound: Vec<Vec<TaskId>> = vec![Vec::new(); m];

    for task in tasks.tasks() {
        let proc = (0..m).min_by_key(|&p| (&free_at[p], p)).expect("M >= 1");
        let start = free_at[proc].clone();
        let end = &start + &task.c1;
        state.processor_of[task.id.index()] = Some(proc);
        bound[proc].push(task.id);
        state.record(task.id, SubjobKind::FirstNonCritical, proc, start, end.clone());
        complete_partitioned(&mut state, &mut priorities, tasks, task.id, SubjobKind::FirstNonCritical, &end);
        free_at[proc] = end;
    }

    let barrier = free_at.iter().max().cloned().unwrap_or_default();
    let mut now = barrier;
    let mut busy: Vec<Option<(TaskId, TimeValue, TimeValue)>> = vec![None; m];
    loop {
        let mut changed = true;
        while changed {
            changed = false;
            for proc in 0..m {
                if busy[proc].is_some() {
                    continue;
                }
                let pick = bound[proc]
                    .iter()
                    .copied()
                    .filter(|&id| state.critical_eligible(graph, id))
                    .min_by_key(|&id| priorities.key(DependencyGraph::vertex(SubjobRef::new(id, SubjobKind::Critical))));
                if let Some(id) = pick {
                    state.cs_started[id.index()] = true;
                    let a1 = &tasks.task(id).a1;
                    if a1.is_zero() {
                        complete_partitioned(&mut state, &mut priorities, tasks, id, SubjobKind::Critical, &now);
                    } else {
                        busy[proc] = Some((id, now.clone(), &now + a1));
                    }
                    changed = true;
                }
            }
        }
        if state.cs_finish.iter().all(Option::is_some) {
            break;
        }
        let Some(next) = busy.iter().flatten().map(|(_, _, end)| end).min().cloned() else {
            return Err(Error::Precondition("partitioned scheduling stalled; graph chains are inconsistent".into()));
        };
        now = next;
        for (proc, slot) in busy.iter_mut().enumerate() {
            if slot.as_ref().is_some_and(|(_, _, end)| *end == now) {
                let (id, start, end) = slot.take().expect("checked");
                state.record(id, SubjobKind::Critical, proc, start, end);
                complete_partitioned(&mut state, &mut priorities, tasks, id, SubjobKind::Critical, &now);
            }
        }
    }

    state.pad_second_sections(tasks, config.preempt_second_sections);
    Ok(Schedule::new(state.segments, m, Policy::PartitionedSimple))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{build_graph, Sequencer};
    use crate::model::{total_work, TaskSpec};

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

    fn fig1() -> (TaskSet, DependencyGraph) {
        let ts = set(&[(1, 1, 1, Some("s")); 4]);
        let g = DependencyGraph::new(&ts, vec![(1..=4).map(TaskId).collect()]).unwrap();
        (ts, g)
    }

    #[test]
    fn dedicated_examples() {
        let (ts, g) = fig1();
        let s = schedule_dedicated(&g, &ts, 4).unwrap();
        assert_eq!(s.makespan(), t(6));
        assert_eq!(s.makespan(), g.critical_path_length().unwrap());

        let one = set(&[(1, 2, 3, Some("s"))]);
        let g1 = build_graph(&one, Sequencer::Jks).unwrap();
        assert_eq!(schedule_dedicated(&g1, &one, 1).unwrap().makespan(), t(6));

        assert!(matches!(schedule_dedicated(&g, &ts, 3), Err(Error::Precondition(_))));
    }

    #[test]
    fn semi_partitioned_balances_independent_tasks() {
        let ts = set(&[(2, 0, 0, None); 4]);
        let g = build_graph(&ts, Sequencer::Jks).unwrap();
        for preempt in [false, true] {
            assert_eq!(schedule_semi_partitioned(&g, &ts, 2, preempt).unwrap().makespan(), t(4));
        }
    }

    #[test]
    fn critical_section_preempts_second_section() {
        let ts = set(&[(0, 2, 4, Some("s")), (0, 1, 1, Some("s")), (1, 1, 5, Some("s")), (3, 2, 4, Some("s"))]);
        let g = build_graph(&ts, Sequencer::Jks).unwrap();
        let p = schedule_semi_partitioned_with(&g, &ts, 2, true, PriorityRule::BottomLevel).unwrap();
        let pieces = p
            .segments_of(SubjobRef::new(TaskId(1), SubjobKind::SecondNonCritical))
            .count();
        assert_eq!(pieces, 2, "{}", p.gantt());
        let np = schedule_semi_partitioned_with(&g, &ts, 2, false, PriorityRule::BottomLevel).unwrap();
        assert!(np.segments.iter().all(|s| np.segments_of(s.subjob()).count() == 1));
        let bound = list_schedule_bound(&g, &ts, 2).unwrap();
        assert!(p.makespan() <= bound && np.makespan() <= bound);
    }

    #[test]
    fn chain_first_rule_never_leaves_a_critical_section_waiting() {
        // Under the default rule a critical section is always dispatched on
        // the processor freed by the event that made it eligible.
        let ts = set(&[(0, 2, 4, Some("s")), (0, 1, 1, Some("s")), (1, 1, 5, Some("s")), (3, 2, 4, Some("s"))]);
        let g = build_graph(&ts, Sequencer::Jks).unwrap();
        assert_eq!(
            schedule_semi_partitioned(&g, &ts, 2, true).unwrap().segments,
            schedule_semi_partitioned(&g, &ts, 2, false).unwrap().segments
        );
    }

    #[test]
    fn partitioned_single_processor_serializes() {
        let ts = set(&[(1, 2, 1, Some("s")), (2, 1, 0, Some("s")), (0, 3, 2, Some("s"))]);
        let g = build_graph(&ts, Sequencer::Potts).unwrap();
        let w = total_work(&ts);
        assert_eq!(schedule_partitioned_tied(&g, &ts, 1).unwrap().makespan(), w);
        assert_eq!(schedule_partitioned_simple(&g, &ts, 1, true).unwrap().makespan(), w);
        assert_eq!(schedule_partitioned_simple(&g, &ts, 1, false).unwrap().makespan(), w);
    }

    #[test]
    fn tied_falls_back_to_dedicated() {
        let (ts, g) = fig1();
        assert_eq!(
            schedule_partitioned_tied(&g, &ts, 4).unwrap(),
            schedule_dedicated(&g, &ts, 4).unwrap()
        );
    }

    #[test]
    fn simple_partitioned_balances_independent_tasks() {
        let ts = set(&[(1, 0, 2, None); 6]);
        let g = build_graph(&ts, Sequencer::Jks).unwrap();
        assert_eq!(schedule_partitioned_simple(&g, &ts, 3, true).unwrap().makespan(), t(6));
        assert_eq!(schedule_partitioned_simple(&g, &ts, 2, false).unwrap().makespan(), t(9));
    }

    #[test]
    fn shared_semaphore_serializes_critical_sections() {
        let ts = set(&[(1, 3, 1, Some("s")); 4]);
        let g = build_graph(&ts, Sequencer::Jks).unwrap();
        let sum_a = t(12);
        for s in [
            schedule_partitioned_simple(&g, &ts, 2, true).unwrap(),
            schedule_partitioned_tied(&g, &ts, 2).unwrap(),
            schedule_semi_partitioned(&g, &ts, 2, true).unwrap(),
        ] {
            assert!(s.makespan() >= sum_a);
        }
    }

    #[test]
    fn timeline_padding() {
        let mut tl = Timeline::default();
        tl.insert(t(2), t(4));
        tl.insert(t(5), t(6));
        assert_eq!(tl.fill_preemptive(&t(0), &t(3)), vec![(t(0), t(2)), (t(4), t(5))]);
        assert_eq!(tl.fill_contiguous(&t(0), &t(2)), (t(6), t(8)));
    }

    #[test]
    fn zero_length_subjobs_produce_no_segments() {
        let ts = set(&[(0, 2, 0, Some("s")), (0, 0, 3, None), (1, 1, 0, Some("s"))]);
        let g = build_graph(&ts, Sequencer::Jks).unwrap();
        for policy in [
            Policy::SemiPartitionedNp,
            Policy::SemiPartitionedP,
            Policy::PartitionedTied,
            Policy::PartitionedSimple,
        ] {
            let s = schedule(&g, &ts, &SchedulerConfig::new(2, policy)).unwrap();
            assert!(s.segments.iter().all(|seg| seg.start < seg.end));
            let subjobs: std::collections::BTreeSet<_> = s.segments.iter().map(Segment::subjob).collect();
            assert_eq!(subjobs.len(), 4, "{policy}: {}", s.gantt());
        }
    }
}
