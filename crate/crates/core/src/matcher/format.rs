use std::io::{self, Write};

use super::{Gate, MatchResult, RankedResults, Subject};

fn subject_ids(s: &Subject) -> String {
    match s {
        Subject::Individual { person } => person.to_string(),
        Subject::Neighborhood { seed, members } => std::iter::once(seed)
            .chain(members.iter().filter(|m| *m != seed))
            .map(|m| m.as_str())
            .collect::<Vec<_>>()
            .join(","),
    }
}

fn breakdown(r: &MatchResult) -> String {
    r.breakdown
        .iter()
        .map(|m| match (&m.matched_by, m.timestamp) {
            (Some(by), Some(t)) => format!("{}={}@{}", m.category, by, t),
            (Some(by), None) => format!("{}={}", m.category, by),
            (None, _) => format!("{}=-", m.category),
        })
        .collect::<Vec<_>>()
        .join(";")
}

fn gates(r: &MatchResult) -> String {
    r.failed_gates
        .iter()
        .map(|g| match g {
            Gate::Country => "country",
            Gate::Organization => "organization",
        })
        .collect::<Vec<_>>()
        .join(",")
}

/// One tab-separated record per result:
/// `subject ids (seed first)`, `score (6 decimals)`, `category=member@date;...`,
/// and a fourth field naming failed gates when there are any.
pub fn write_lines<W: Write>(results: &RankedResults, limit: Option<usize>, mut out: W) -> io::Result<()> {
    for r in results.entries.iter().take(limit.unwrap_or(usize::MAX)) {
        write!(out, "{}\t{:.6}\t{}", subject_ids(&r.subject), r.score, breakdown(r))?;
        if !r.failed_gates.is_empty() {
            write!(out, "\tgates-failed:{}", gates(r))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn write_table<W: Write>(results: &RankedResults, limit: Option<usize>, mut out: W) -> io::Result<()> {
    let shown: Vec<&MatchResult> = results.entries.iter().take(limit.unwrap_or(usize::MAX)).collect();
    let subjects: Vec<String> = shown.iter().map(|r| subject_ids(&r.subject)).collect();
    let width = subjects.iter().map(String::len).max().unwrap_or(0).max("subject".len());
    writeln!(
        out,
        "query {:?}  threshold {}  graph version {}  {} result(s)",
        results.query.name,
        results.query.threshold,
        results.graph_version,
        results.entries.len()
    )?;
    writeln!(out, "{:>4}  {:<width$}  {:>8}  matched", "rank", "subject", "score")?;
    for (i, (r, s)) in shown.iter().zip(&subjects).enumerate() {
        let matched: Vec<&str> = r.breakdown.iter().filter(|m| m.matched).map(|m| m.category.as_str()).collect();
        writeln!(out, "{:>4}  {:<width$}  {:>8.6}  {}", i + 1, s, r.score, matched.join(","))?;
    }
    Ok(())
}
