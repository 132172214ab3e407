//! Domain types for task sets, dependency graphs and schedules.
//!
//! A task releases one job at time 0 consisting of three subjobs executed in
//! sequence: a first non-critical section, a critical section guarded by a
//! binary semaphore, and a second non-critical section.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::time::TimeValue;

/// 1-based task identifier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TaskId(pub usize);

impl TaskId {
    pub fn index(self) -> usize {
        self.0 - 1
    }
}

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Dense 0-based semaphore index. External names live in the [`TaskSet`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SemaphoreId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SubjobKind {
    FirstNonCritical,
    Critical,
    SecondNonCritical,
}

impl SubjobKind {
    pub const ALL: [SubjobKind; 3] = [
        SubjobKind::FirstNonCritical,
        SubjobKind::Critical,
        SubjobKind::SecondNonCritical,
    ];

    fn offset(self) -> usize {
        match self {
            SubjobKind::FirstNonCritical => 0,
            SubjobKind::Critical => 1,
            SubjobKind::SecondNonCritical => 2,
        }
    }

    /// Short name used in CSV and edge-list output.
    pub fn code(self) -> &'static str {
        match self {
            SubjobKind::FirstNonCritical => "c1",
            SubjobKind::Critical => "a",
            SubjobKind::SecondNonCritical => "c2",
        }
    }

    pub fn from_code(s: &str) -> Result<Self> {
        match s {
            "c1" => Ok(SubjobKind::FirstNonCritical),
            "a" => Ok(SubjobKind::Critical),
            "c2" => Ok(SubjobKind::SecondNonCritical),
            other => Err(Error::Parse(format!("unknown subjob kind {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SubjobRef {
    pub task: TaskId,
    pub kind: SubjobKind,
}

impl SubjobRef {
    pub fn new(task: TaskId, kind: SubjobKind) -> Self {
        SubjobRef { task, kind }
    }
}

impl fmt::Display for SubjobRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}.{}", self.task, self.kind.code())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Task {
    pub id: TaskId,
    pub c1: TimeValue,
    pub a1: TimeValue,
    pub c2: TimeValue,
    pub semaphore: Option<SemaphoreId>,
}

impl Task {
    pub fn duration(&self, kind: SubjobKind) -> &TimeValue {
        match kind {
            SubjobKind::FirstNonCritical => &self.c1,
            SubjobKind::Critical => &self.a1,
            SubjobKind::SecondNonCritical => &self.c2,
        }
    }

    pub fn total(&self) -> TimeValue {
        &(&self.c1 + &self.a1) + &self.c2
    }
}

/// Input form of a task, used by builders and the JSON document.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub c1: TimeValue,
    pub a1: TimeValue,
    pub c2: TimeValue,
    pub semaphore: Option<String>,
}

impl TaskSpec {
    pub fn new(c1: TimeValue, a1: TimeValue, c2: TimeValue, semaphore: Option<&str>) -> Self {
        TaskSpec {
            c1,
            a1,
            c2,
            semaphore: semaphore.map(str::to_string),
        }
    }
}

/// A frame-based task set. Ids are `1..=N` in order; every semaphore name is
/// used by at least one task.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaskSet {
    tasks: Vec<Task>,
    semaphore_names: Vec<String>,
    deadline: Option<TimeValue>,
}

impl TaskSet {
    pub fn new(tasks: Vec<Task>, semaphore_names: Vec<String>, deadline: Option<TimeValue>) -> Result<Self> {
        let mut used = vec![false; semaphore_names.len()];
        for (idx, task) in tasks.iter().enumerate() {
            if task.id != TaskId(idx + 1) {
                return Err(Error::InvalidTaskSet(format!(
                    "task ids must be contiguous from 1; found {} at position {}",
                    task.id,
                    idx + 1
                )));
            }
            match task.semaphore {
                Some(SemaphoreId(s)) => {
                    if task.a1.is_zero() {
                        return Err(Error::InvalidTaskSet(format!(
                            "task {} has a zero-length critical section but names a semaphore",
                            task.id
                        )));
                    }
                    if s >= semaphore_names.len() {
                        return Err(Error::InvalidTaskSet(format!("task {} refers to unknown semaphore {s}", task.id)));
                    }
                    used[s] = true;
                }
                None if task.a1.is_positive() => {
                    return Err(Error::InvalidTaskSet(format!(
                        "task {} has a critical section but no semaphore",
                        task.id
                    )));
                }
                None => {}
            }
        }
        if let Some(unused) = used.iter().position(|u| !u) {
            return Err(Error::InvalidTaskSet(format!(
                "semaphore {:?} is not used by any task",
                semaphore_names[unused]
            )));
        }
        Ok(TaskSet {
            tasks,
            semaphore_names,
            deadline,
        })
    }

    /// Builds a task set from specs, assigning ids `1..=N` and dense
    /// semaphore indices in order of first appearance.
    pub fn from_specs(specs: Vec<TaskSpec>, deadline: Option<TimeValue>) -> Result<Self> {
        let mut names: Vec<String> = Vec::new();
        let mut tasks = Vec::with_capacity(specs.len());
        for (idx, spec) in specs.into_iter().enumerate() {
            let semaphore = spec.semaphore.map(|name| match names.iter().position(|n| *n == name) {
                Some(pos) => SemaphoreId(pos),
                None => {
                    names.push(name);
                    SemaphoreId(names.len() - 1)
                }
            });
            tasks.push(Task {
                id: TaskId(idx + 1),
                c1: spec.c1,
                a1: spec.a1,
                c2: spec.c2,
                semaphore,
            });
        }
        TaskSet::new(tasks, names, deadline)
    }

    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    pub fn task(&self, id: TaskId) -> &Task {
        &self.tasks[id.index()]
    }

    pub fn get(&self, id: TaskId) -> Option<&Task> {
        id.0.checked_sub(1).and_then(|i| self.tasks.get(i))
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    /// Number of distinct semaphores.
    pub fn z(&self) -> usize {
        self.semaphore_names.len()
    }

    pub fn semaphore_name(&self, id: SemaphoreId) -> &str {
        &self.semaphore_names[id.0]
    }

    pub fn semaphore_names(&self) -> &[String] {
        &self.semaphore_names
    }

    pub fn deadline(&self) -> Option<&TimeValue> {
        self.deadline.as_ref()
    }

    pub fn with_deadline(mut self, deadline: Option<TimeValue>) -> Self {
        self.deadline = deadline;
        self
    }

    /// Tasks sharing semaphore `sem`, in id order.
    pub fn tasks_of(&self, sem: SemaphoreId) -> Vec<&Task> {
        self.tasks.iter().filter(|t| t.semaphore == Some(sem)).collect()
    }

    pub fn to_specs(&self) -> Vec<TaskSpec> {
        self.tasks
            .iter()
            .map(|t| TaskSpec {
                c1: t.c1.clone(),
                a1: t.a1.clone(),
                c2: t.c2.clone(),
                semaphore: t.semaphore.map(|s| self.semaphore_name(s).to_string()),
            })
            .collect()
    }
}

/// Sum of all subjob lengths.
pub fn total_work(tasks: &TaskSet) -> TimeValue {
    tasks.tasks().iter().map(Task::total).sum()
}

/// Dense vertex index inside a [`DependencyGraph`].
pub type VertexId = usize;

/// DAG over subjobs. Every task contributes three vertices (zero-length
/// ones included) and the edges `c1 -> a -> c2`; each semaphore contributes
/// a chain over the critical sections of its tasks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DependencyGraph {
    durations: Vec<TimeValue>,
    succ: Vec<Vec<VertexId>>,
    pred: Vec<Vec<VertexId>>,
    chains: Vec<Vec<TaskId>>,
    chain_pred: Vec<Option<TaskId>>,
}

impl DependencyGraph {
    /// `chains[k]` is the execution order of the critical sections guarded by
    /// semaphore `k`; it must be a permutation of the tasks using `k`.
    pub fn new(tasks: &TaskSet, chains: Vec<Vec<TaskId>>) -> Result<Self> {
        if chains.len() != tasks.z() {
            return Err(Error::InvalidTaskSet(format!(
                "expected {} semaphore chains, got {}",
                tasks.z(),
                chains.len()
            )));
        }
        for (k, chain) in chains.iter().enumerate() {
            let mut expected: Vec<TaskId> = tasks.tasks_of(SemaphoreId(k)).iter().map(|t| t.id).collect();
            let mut got = chain.clone();
            expected.sort();
            got.sort();
            if expected != got {
                return Err(Error::InvalidTaskSet(format!(
                    "chain for semaphore {:?} is not a permutation of its tasks",
                    tasks.semaphore_name(SemaphoreId(k))
                )));
            }
        }
        Ok(Self::build(tasks, chains, &[]))
    }

    /// Like [`DependencyGraph::new`] but adds arbitrary extra edges without
    /// any structural checks. Intended for exercising error paths.
    pub fn with_extra_edges(tasks: &TaskSet, chains: Vec<Vec<TaskId>>, extra: &[(SubjobRef, SubjobRef)]) -> Self {
        Self::build(tasks, chains, extra)
    }

    fn build(tasks: &TaskSet, chains: Vec<Vec<TaskId>>, extra: &[(SubjobRef, SubjobRef)]) -> Self {
        let n = tasks.len() * 3;
        let mut durations = Vec::with_capacity(n);
        for task in tasks.tasks() {
            for kind in SubjobKind::ALL {
                durations.push(task.duration(kind).clone());
            }
        }
        let mut graph = DependencyGraph {
            durations,
            succ: vec![Vec::new(); n],
            pred: vec![Vec::new(); n],
            chains: Vec::new(),
            chain_pred: vec![None; tasks.len()],
        };
        for task in tasks.tasks() {
            let c1 = Self::vertex(SubjobRef::new(task.id, SubjobKind::FirstNonCritical));
            let a = Self::vertex(SubjobRef::new(task.id, SubjobKind::Critical));
            let c2 = Self::vertex(SubjobRef::new(task.id, SubjobKind::SecondNonCritical));
            graph.push_edge(c1, a);
            graph.push_edge(a, c2);
        }
        for chain in &chains {
            for pair in chain.windows(2) {
                graph.push_edge(
                    Self::vertex(SubjobRef::new(pair[0], SubjobKind::Critical)),
                    Self::vertex(SubjobRef::new(pair[1], SubjobKind::Critical)),
                );
                graph.chain_pred[pair[1].index()] = Some(pair[0]);
            }
        }
        for (from, to) in extra {
            graph.push_edge(Self::vertex(*from), Self::vertex(*to));
        }
        graph.chains = chains;
        graph
    }

    fn push_edge(&mut self, from: VertexId, to: VertexId) {
        self.succ[from].push(to);
        self.pred[to].push(from);
    }

    pub fn vertex(subjob: SubjobRef) -> VertexId {
        subjob.task.index() * 3 + subjob.kind.offset()
    }

    pub fn subjob(v: VertexId) -> SubjobRef {
        SubjobRef::new(TaskId(v / 3 + 1), SubjobKind::ALL[v % 3])
    }

    pub fn vertex_count(&self) -> usize {
        self.durations.len()
    }

    pub fn task_count(&self) -> usize {
        self.durations.len() / 3
    }

    pub fn duration(&self, v: VertexId) -> &TimeValue {
        &self.durations[v]
    }

    pub fn predecessors(&self, v: VertexId) -> &[VertexId] {
        &self.pred[v]
    }

    pub fn successors(&self, v: VertexId) -> &[VertexId] {
        &self.succ[v]
    }

    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.succ
            .iter()
            .enumerate()
            .flat_map(|(u, vs)| vs.iter().map(move |&v| (u, v)))
    }

    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    /// Critical-section order for semaphore `sem`.
    pub fn chain(&self, sem: SemaphoreId) -> &[TaskId] {
        &self.chains[sem.0]
    }

    pub fn chains(&self) -> &[Vec<TaskId>] {
        &self.chains
    }

    /// The task whose critical section immediately precedes `task`'s in its
    /// semaphore chain.
    pub fn chain_predecessor(&self, task: TaskId) -> Option<TaskId> {
        self.chain_pred[task.index()]
    }

    /// Kahn's algorithm; smallest ready vertex first so the order is stable.
    pub fn topological_order(&self) -> Result<Vec<VertexId>> {
        let n = self.vertex_count();
        let mut indegree: Vec<usize> = self.pred.iter().map(Vec::len).collect();
        let mut queue: VecDeque<VertexId> = (0..n).filter(|&v| indegree[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &v in &self.succ[u] {
                indegree[v] -= 1;
                if indegree[v] == 0 {
                    queue.push_back(v);
                }
            }
        }
        if order.len() == n {
            Ok(order)
        } else {
            Err(Error::CyclicGraph)
        }
    }

    pub fn is_acyclic(&self) -> bool {
        self.topological_order().is_ok()
    }

    /// Each chain vertex has at most one chain predecessor and one chain
    /// successor, and chain edges only join critical sections.
    pub fn chains_well_formed(&self) -> bool {
        (0..self.vertex_count()).all(|v| {
            let sj = Self::subjob(v);
            let foreign_in = self.pred[v].iter().filter(|&&u| Self::subjob(u).task != sj.task).count();
            let foreign_out = self.succ[v].iter().filter(|&&w| Self::subjob(w).task != sj.task).count();
            if sj.kind == SubjobKind::Critical {
                let cross_ok = self.pred[v]
                    .iter()
                    .chain(self.succ[v].iter())
                    .filter(|&&u| Self::subjob(u).task != sj.task)
                    .all(|&u| Self::subjob(u).kind == SubjobKind::Critical);
                foreign_in <= 1 && foreign_out <= 1 && cross_ok
            } else {
                foreign_in == 0 && foreign_out == 0
            }
        })
    }

    /// Longest-path finishing time of every vertex when all vertices start as
    /// soon as their predecessors finish (vertex durations included).
    pub fn earliest_finish(&self) -> Result<Vec<TimeValue>> {
        let order = self.topological_order()?;
        let mut finish = vec![TimeValue::zero(); self.vertex_count()];
        for v in order {
            let start = self.pred[v].iter().map(|&u| &finish[u]).max().cloned().unwrap_or_default();
            finish[v] = start + &self.durations[v];
        }
        Ok(finish)
    }

    /// Longest path from each vertex (inclusive) to any sink.
    pub fn bottom_levels(&self) -> Result<Vec<TimeValue>> {
        let order = self.topological_order()?;
        let mut level = vec![TimeValue::zero(); self.vertex_count()];
        for &v in order.iter().rev() {
            let tail = self.succ[v].iter().map(|&w| &level[w]).max().cloned().unwrap_or_default();
            level[v] = tail + &self.durations[v];
        }
        Ok(level)
    }

    /// `len(G)`: the maximum total duration over all directed paths.
    pub fn critical_path_length(&self) -> Result<TimeValue> {
        Ok(self.earliest_finish()?.into_iter().max().unwrap_or_default())
    }

    /// Longest path over the subgraph induced by the given tasks' vertices.
    pub fn critical_path_length_of(&self, tasks: &[TaskId]) -> Result<TimeValue> {
        let mut member = vec![false; self.vertex_count()];
        for t in tasks {
            for kind in SubjobKind::ALL {
                member[Self::vertex(SubjobRef::new(*t, kind))] = true;
            }
        }
        let order = self.topological_order()?;
        let mut finish = vec![TimeValue::zero(); self.vertex_count()];
        let mut best = TimeValue::zero();
        for v in order.into_iter().filter(|&v| member[v]) {
            let start = self.pred[v]
                .iter()
                .filter(|&&u| member[u])
                .map(|&u| &finish[u])
                .max()
                .cloned()
                .unwrap_or_default();
            finish[v] = start + &self.durations[v];
            if finish[v] > best {
                best = finish[v].clone();
            }
        }
        Ok(best)
    }

    /// One `u -> v` line per edge, in vertex order.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for (u, v) in self.edges() {
            out.push_str(&format!("{} -> {}\n", Self::subjob(u), Self::subjob(v)));
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Policy {
    SemiPartitionedNp,
    SemiPartitionedP,
    PartitionedTied,
    PartitionedSimple,
}

impl Policy {
    pub fn is_partitioned(self) -> bool {
        matches!(self, Policy::PartitionedTied | Policy::PartitionedSimple)
    }

    /// Whether second non-critical sections may be split into several
    /// segments.
    pub fn allows_split_second_section(self) -> bool {
        !matches!(self, Policy::SemiPartitionedNp)
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Policy::SemiPartitionedNp => "sp-np",
            Policy::SemiPartitionedP => "sp-p",
            Policy::PartitionedTied => "p-tied",
            Policy::PartitionedSimple => "p-simple",
        })
    }
}

/// One contiguous execution interval `[start, end)` of a subjob.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Segment {
    pub task: TaskId,
    pub kind: SubjobKind,
    /// 1-based processor index.
    pub processor: usize,
    pub start: TimeValue,
    pub end: TimeValue,
}

impl Segment {
    pub fn subjob(&self) -> SubjobRef {
        SubjobRef::new(self.task, self.kind)
    }

    pub fn length(&self) -> TimeValue {
        self.end.saturating_sub(&self.start)
    }

    pub fn overlaps(&self, other: &Segment) -> bool {
        self.start < other.end && other.start < self.end
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schedule {
    pub segments: Vec<Segment>,
    pub processors: usize,
    pub policy: Policy,
}

impl Schedule {
    pub fn new(mut segments: Vec<Segment>, processors: usize, policy: Policy) -> Self {
        segments.sort_by(|a, b| {
            (a.processor, &a.start, a.task, a.kind).cmp(&(b.processor, &b.start, b.task, b.kind))
        });
        Schedule {
            segments,
            processors,
            policy,
        }
    }

    /// Latest segment end; `0` for an empty schedule.
    pub fn makespan(&self) -> TimeValue {
        self.segments.iter().map(|s| &s.end).max().cloned().unwrap_or_default()
    }

    pub fn segments_of(&self, subjob: SubjobRef) -> impl Iterator<Item = &Segment> {
        self.segments.iter().filter(move |s| s.subjob() == subjob)
    }

    /// Textual per-processor timeline.
    pub fn gantt(&self) -> String {
        let mut by_proc: BTreeMap<usize, Vec<&Segment>> = BTreeMap::new();
        for s in &self.segments {
            by_proc.entry(s.processor).or_default().push(s);
        }
        let mut out = String::new();
        for p in 1..=self.processors {
            out.push_str(&format!("P{p}:"));
            if let Some(segs) = by_proc.get(&p) {
                for s in segs {
                    out.push_str(&format!(" [{}, {}) {}", s.start, s.end, s.subjob()));
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Latest segment end of a schedule.
pub fn makespan(schedule: &Schedule) -> TimeValue {
    schedule.makespan()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(n: i64) -> TimeValue {
        TimeValue::ratio(n, 1)
    }

    fn spec(c1: i64, a1: i64, c2: i64, sem: Option<&str>) -> TaskSpec {
        TaskSpec::new(t(c1), t(a1), t(c2), sem)
    }

    #[test]
    fn total_work_examples() {
        let empty = TaskSet::from_specs(vec![], None).unwrap();
        assert_eq!(total_work(&empty), TimeValue::zero());
        let ts = TaskSet::from_specs(
            vec![spec(1, 2, 3, Some("s")), spec(0, 1, 0, Some("s")), spec(2, 0, 2, None)],
            None,
        )
        .unwrap();
        assert_eq!(total_work(&ts), t(11));
    }

    #[test]
    fn semaphore_iff_critical_section() {
        assert!(TaskSet::from_specs(vec![spec(1, 0, 1, Some("s"))], None).is_err());
        assert!(TaskSet::from_specs(vec![spec(1, 1, 1, None)], None).is_err());
        assert!(TaskSet::from_specs(vec![spec(1, 0, 1, None)], None).is_ok());
    }

    #[test]
    fn ids_must_be_contiguous() {
        let task = Task {
            id: TaskId(2),
            c1: t(1),
            a1: t(0),
            c2: t(1),
            semaphore: None,
        };
        assert!(TaskSet::new(vec![task], vec![], None).is_err());
    }

    #[test]
    fn unused_semaphore_rejected() {
        let task = Task {
            id: TaskId(1),
            c1: t(1),
            a1: t(0),
            c2: t(1),
            semaphore: None,
        };
        assert!(TaskSet::new(vec![task], vec!["s".into()], None).is_err());
    }

    #[test]
    fn graph_structure_and_critical_path() {
        let ts = TaskSet::from_specs((0..4).map(|_| spec(1, 1, 1, Some("s"))).collect(), None).unwrap();
        let g = DependencyGraph::new(&ts, vec![vec![TaskId(1), TaskId(2), TaskId(3), TaskId(4)]]).unwrap();
        assert_eq!(g.edge_count(), 8 + 3);
        assert!(g.is_acyclic());
        assert!(g.chains_well_formed());
        assert_eq!(g.critical_path_length().unwrap(), t(6));
        assert_eq!(g.chain_predecessor(TaskId(3)), Some(TaskId(2)));
        assert_eq!(g.chain_predecessor(TaskId(1)), None);
        let levels = g.bottom_levels().unwrap();
        assert_eq!(levels[DependencyGraph::vertex(SubjobRef::new(TaskId(1), SubjobKind::FirstNonCritical))], t(6));
    }

    #[test]
    fn chain_must_be_permutation() {
        let ts = TaskSet::from_specs(vec![spec(1, 1, 1, Some("s")), spec(1, 1, 1, Some("s"))], None).unwrap();
        assert!(DependencyGraph::new(&ts, vec![vec![TaskId(1)]]).is_err());
        assert!(DependencyGraph::new(&ts, vec![]).is_err());
    }

    #[test]
    fn cycle_detected() {
        let ts = TaskSet::from_specs(vec![spec(1, 1, 1, Some("s")), spec(1, 1, 1, Some("s"))], None).unwrap();
        let back = (
            SubjobRef::new(TaskId(2), SubjobKind::Critical),
            SubjobRef::new(TaskId(1), SubjobKind::Critical),
        );
        let g = DependencyGraph::with_extra_edges(&ts, vec![vec![TaskId(1), TaskId(2)]], &[back]);
        assert!(!g.is_acyclic());
        assert!(matches!(g.critical_path_length(), Err(Error::CyclicGraph)));
    }

    #[test]
    fn makespan_examples() {
        let seg = |task, kind, start, end| Segment {
            task: TaskId(task),
            kind,
            processor: 1,
            start: t(start),
            end: t(end),
        };
        let s = Schedule::new(
            vec![
                seg(1, SubjobKind::FirstNonCritical, 0, 1),
                seg(1, SubjobKind::Critical, 1, 3),
                seg(1, SubjobKind::SecondNonCritical, 3, 6),
            ],
            1,
            Policy::PartitionedTied,
        );
        assert_eq!(makespan(&s), t(6));
        assert_eq!(makespan(&Schedule::new(vec![], 2, Policy::SemiPartitionedNp)), TimeValue::zero());
        let mut two = vec![seg(1, SubjobKind::FirstNonCritical, 0, 6), seg(2, SubjobKind::FirstNonCritical, 0, 4)];
        two[1].processor = 2;
        assert_eq!(makespan(&Schedule::new(two, 2, Policy::PartitionedTied)), t(6));
    }
}
