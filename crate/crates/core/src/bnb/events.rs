//! Search event log, serializable as one JSON record per line.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Selected,
    NodeSolved,
    Incumbent,
    Branched,
    Pruned,
}

/// One search event. Bounds are in minimization form; `pb` is absent before
/// the first incumbent and `db` before the root LP is solved.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    pub kind: EventKind,
    pub node_id: usize,
    pub pb: Option<f64>,
    pub db: Option<f64>,
    pub depth: usize,
}

pub fn write_event_log<W: Write>(events: &[Event], mut out: W) -> Result<()> {
    for e in events {
        let line = serde_json::to_string(e).expect("events serialize");
        writeln!(out, "{line}").map_err(|err| Error::io("<event log>", err))?;
    }
    Ok(())
}

pub fn read_event_log<R: BufRead>(input: R) -> Result<Vec<Event>> {
    let mut events = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|err| Error::io("<event log>", err))?;
        if line.trim().is_empty() {
            continue;
        }
        let e = serde_json::from_str(&line).map_err(|err| Error::Parse {
            path: "<event log>".into(),
            line: i + 1,
            field: "event".into(),
            message: err.to_string(),
        })?;
        events.push(e);
    }
    Ok(events)
}

/// Quantities recovered by replaying an event log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogSummary {
    pub nodes_processed: usize,
    pub final_pb: Option<f64>,
    pub final_db: Option<f64>,
    pub incumbents: usize,
}

pub fn replay_event_log(events: &[Event]) -> LogSummary {
    let mut s = LogSummary {
        nodes_processed: 0,
        final_pb: None,
        final_db: None,
        incumbents: 0,
    };
    for e in events {
        match e.kind {
            EventKind::NodeSolved => s.nodes_processed += 1,
            EventKind::Incumbent => s.incumbents += 1,
            _ => {}
        }
        s.final_pb = e.pb.or(s.final_pb);
        s.final_db = e.db.or(s.final_db);
    }
    s
}
