use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::day::Day;

/// One coded behavior at a date.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Event {
    pub t: Day,
    pub c: String,
}

impl Event {
    pub fn new(t: Day, c: impl Into<String>) -> Self {
        Event { t, c: c.into() }
    }
}

/// A person's events, kept sorted by `(t, c)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trajectory {
    pub person: Option<String>,
    #[serde(deserialize_with = "sorted_events")]
    pub events: Vec<Event>,
}

fn sorted_events<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Vec<Event>, D::Error> {
    let mut events = Vec::<Event>::deserialize(d)?;
    events.sort();
    Ok(events)
}

impl Trajectory {
    pub fn new(person: Option<String>, mut events: Vec<Event>) -> Self {
        events.sort();
        Trajectory { person, events }
    }

    pub fn anonymous(events: Vec<Event>) -> Self {
        Self::new(None, events)
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Earliest date of `category`, if the trajectory has any such event.
    pub fn first(&self, category: &str) -> Option<Day> {
        self.events.iter().find(|e| e.c == category).map(|e| e.t)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum TrajectoryIoError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Reads one JSON trajectory per line. Blank lines are skipped.
pub fn read_trajectories<R: BufRead>(reader: R) -> Result<Vec<Trajectory>, TrajectoryIoError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let t = serde_json::from_str(&line)
            .map_err(|e| TrajectoryIoError::Malformed { line: i + 1, message: e.to_string() })?;
        out.push(t);
    }
    Ok(out)
}

pub fn write_trajectories<W: Write>(mut w: W, trajectories: &[Trajectory]) -> std::io::Result<()> {
    for t in trajectories {
        serde_json::to_writer(&mut w, t)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}
