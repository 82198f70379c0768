use std::fmt::Write;

use super::ast::{MatchMode, QueryGraph};

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if matches!(c, '"' | '\\') {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

/// Canonical text for `q`; [`parse`](super::parse) of the output yields `q` again.
///
/// Numbers are written with Rust's shortest round-trip float formatting.
pub fn print(q: &QueryGraph) -> String {
    let mut out = format!("query {} {{\n", quote(&q.name));
    for r in &q.requirements {
        let _ = writeln!(out, "  indicator {} weight {}", quote(&r.category), r.weight);
    }
    if let Some(c) = &q.country_filter {
        let _ = writeln!(out, "  in {}", quote(c));
    }
    if let Some(o) = &q.org_filter {
        let _ = writeln!(out, "  with {}", quote(o));
    }
    let _ = writeln!(out, "  threshold {}", q.threshold);
    match q.mode {
        MatchMode::Individual => out.push_str("  mode individual\n"),
        MatchMode::Neighborhood { radius } => {
            let _ = writeln!(out, "  mode neighborhood radius {radius}");
        }
    }
    out.push_str("}\n");
    out
}
