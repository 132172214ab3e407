//! File formats: task sets as JSON, schedules as CSV.
//!
//! ```json
//! {"tasks": [{"id": 1, "c1": "1", "a1": "1/3", "c2": "0.5", "semaphore": "s1"}],
//!  "deadline": null}
//! ```
//!
//! Schedule CSV has the header `task,kind,processor,start,end`, with `kind`
//! one of `c1`, `a`, `c2` and times written as `n` or `n/d`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Policy, Schedule, Segment, SubjobKind, TaskId, TaskSet, TaskSpec};
use crate::time::TimeValue;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskRecord {
    pub id: usize,
    pub c1: TimeValue,
    pub a1: TimeValue,
    pub c2: TimeValue,
    #[serde(default)]
    pub semaphore: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSetDoc {
    pub tasks: Vec<TaskRecord>,
    #[serde(default)]
    pub deadline: Option<TimeValue>,
}

impl From<&TaskSet> for TaskSetDoc {
    fn from(ts: &TaskSet) -> Self {
        TaskSetDoc {
            tasks: ts
                .to_specs()
                .into_iter()
                .enumerate()
                .map(|(i, s)| TaskRecord {
                    id: i + 1,
                    c1: s.c1,
                    a1: s.a1,
                    c2: s.c2,
                    semaphore: s.semaphore,
                })
                .collect(),
            deadline: ts.deadline().cloned(),
        }
    }
}

impl TryFrom<TaskSetDoc> for TaskSet {
    type Error = Error;

    fn try_from(mut doc: TaskSetDoc) -> Result<TaskSet> {
        doc.tasks.sort_by_key(|t| t.id);
        for (i, t) in doc.tasks.iter().enumerate() {
            if t.id != i + 1 {
                return Err(Error::InvalidTaskSet(format!("task ids must be 1..={}", doc.tasks.len())));
            }
        }
        let specs = doc
            .tasks
            .into_iter()
            .map(|t| TaskSpec {
                c1: t.c1,
                a1: t.a1,
                c2: t.c2,
                semaphore: t.semaphore,
            })
            .collect();
        TaskSet::from_specs(specs, doc.deadline)
    }
}

pub fn taskset_to_json(ts: &TaskSet) -> String {
    serde_json::to_string_pretty(&TaskSetDoc::from(ts)).expect("task set serializes") + "\n"
}

pub fn taskset_from_json(text: &str) -> Result<TaskSet> {
    let doc: TaskSetDoc = serde_json::from_str(text).map_err(|e| Error::Parse(format!("task set JSON: {e}")))?;
    doc.try_into()
}

#[derive(Debug, Serialize, Deserialize)]
struct SegmentRow {
    task: usize,
    kind: String,
    processor: usize,
    start: String,
    end: String,
}

pub fn schedule_to_csv(schedule: &Schedule) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for s in &schedule.segments {
        w.serialize(SegmentRow {
            task: s.task.0,
            kind: s.kind.code().to_string(),
            processor: s.processor,
            start: s.start.to_fraction_string(),
            end: s.end.to_fraction_string(),
        })
        .expect("in-memory write");
    }
    if schedule.segments.is_empty() {
        w.write_record(["task", "kind", "processor", "start", "end"]).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

/// Parses a schedule CSV. Processor count and policy are not part of the
/// format and must be supplied.
pub fn schedule_from_csv(text: &str, processors: usize, policy: Policy) -> Result<Schedule> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = r.headers().map_err(|e| Error::Parse(format!("schedule CSV: {e}")))?;
    if headers.iter().collect::<Vec<_>>() != ["task", "kind", "processor", "start", "end"] {
        return Err(Error::Parse("schedule CSV header must be task,kind,processor,start,end".into()));
    }
    let mut segments = Vec::new();
    for (line, row) in r.deserialize::<SegmentRow>().enumerate() {
        let row = row.map_err(|e| Error::Parse(format!("schedule CSV row {}: {e}", line + 1)))?;
        segments.push(Segment {
            task: TaskId(row.task),
            kind: SubjobKind::from_code(&row.kind)?,
            processor: row.processor,
            start: row.start.parse()?,
            end: row.end.parse()?,
        });
    }
    Ok(Schedule::new(segments, processors, policy))
}
