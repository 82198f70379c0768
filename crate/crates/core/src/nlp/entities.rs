use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::day::Day;

/// Byte range `[start, end)` into the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DateMatch {
    pub date: Day,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityMatch {
    pub name: String,
    pub span: Span,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractedEntities {
    pub dates: Vec<DateMatch>,
    pub persons: Vec<EntityMatch>,
    pub organizations: Vec<EntityMatch>,
}

/// Alias → canonical name maps. File form: `{"persons": {...}, "orgs": {...}}`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gazetteer {
    #[serde(default)]
    pub persons: BTreeMap<String, String>,
    #[serde(default)]
    pub orgs: BTreeMap<String, String>,
}

impl Gazetteer {
    pub fn load(path: &Path) -> Result<Self, std::io::Error> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(std::io::Error::other)
    }
}

const MONTHS: &str = "january|february|march|april|may|june|july|august|september|october|november|december|jan|feb|mar|apr|jun|jul|aug|sept|sep|oct|nov|dec";

fn month_number(name: &str) -> Option<u32> {
    let n = name.to_lowercase();
    let key = n.get(..3)?;
    ["jan", "feb", "mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec"]
        .iter()
        .position(|m| *m == key)
        .map(|i| i as u32 + 1)
}

struct DatePatterns {
    iso: Regex,
    month_first: Regex,
    day_first: Regex,
}

fn patterns() -> &'static DatePatterns {
    static P: OnceLock<DatePatterns> = OnceLock::new();
    P.get_or_init(|| DatePatterns {
        iso: Regex::new(r"\b(\d{4})-(\d{2})-(\d{2})\b").expect("iso pattern"),
        month_first: Regex::new(&format!(r"(?i)\b({MONTHS})\.?\s+(\d{{1,2}})(?:st|nd|rd|th)?,\s*(\d{{4}})\b"))
            .expect("month-first pattern"),
        day_first: Regex::new(&format!(r"(?i)\b(\d{{1,2}})(?:st|nd|rd|th)?\s+({MONTHS})\.?,?\s+(\d{{4}})\b"))
            .expect("day-first pattern"),
    })
}

fn find_dates(text: &str) -> Vec<DateMatch> {
    let p = patterns();
    let mut found = Vec::new();
    let mut push = |m: regex::Match<'_>, y: &str, mo: Option<u32>, d: &str| {
        let (Ok(y), Some(mo), Ok(d)) = (y.parse(), mo, d.parse()) else { return };
        if let Some(date) = Day::from_ymd(y, mo, d) {
            found.push(DateMatch { date, span: Span { start: m.start(), end: m.end() } });
        }
    };
    for c in p.iso.captures_iter(text) {
        push(c.get(0).unwrap(), &c[1], c[2].parse().ok(), &c[3]);
    }
    for c in p.month_first.captures_iter(text) {
        push(c.get(0).unwrap(), &c[3], month_number(&c[1]), &c[2]);
    }
    for c in p.day_first.captures_iter(text) {
        push(c.get(0).unwrap(), &c[3], month_number(&c[2]), &c[1]);
    }
    // earliest start wins, longer first on ties; overlapping later matches dropped
    found.sort_by_key(|m| (m.span.start, std::cmp::Reverse(m.span.end)));
    let mut out: Vec<DateMatch> = Vec::new();
    for m in found {
        if out.last().is_none_or(|prev| m.span.start >= prev.span.end) {
            out.push(m);
        }
    }
    out
}

fn words(text: &str) -> Vec<(Span, String)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices().chain(std::iter::once((text.len(), ' '))) {
        match (c.is_alphanumeric(), start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push((Span { start: s, end: i }, text[s..i].to_lowercase()));
                start = None;
            }
            _ => {}
        }
    }
    out
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum EntityKind {
    Person,
    Organization,
}

/// First alias word → (alias words, canonical name, kind).
type AliasIndex<'a> = HashMap<String, Vec<(Vec<String>, &'a str, EntityKind)>>;

/// Dates by pattern; persons and organizations by longest case-insensitive
/// gazetteer alias match over word boundaries, scanning left to right.
pub fn extract_entities(text: &str, gazetteer: &Gazetteer) -> ExtractedEntities {
    let mut aliases: AliasIndex = HashMap::new();
    let tagged = gazetteer
        .persons
        .iter()
        .map(|(a, c)| (a, c, EntityKind::Person))
        .chain(gazetteer.orgs.iter().map(|(a, c)| (a, c, EntityKind::Organization)));
    for (alias, canonical, kind) in tagged {
        let toks: Vec<String> = words(alias).into_iter().map(|(_, w)| w).collect();
        if let Some(first) = toks.first() {
            aliases.entry(first.clone()).or_default().push((toks, canonical.as_str(), kind));
        }
    }

    let mut out = ExtractedEntities { dates: find_dates(text), ..Default::default() };
    let toks = words(text);
    let mut i = 0;
    while i < toks.len() {
        let best = aliases
            .get(&toks[i].1)
            .into_iter()
            .flatten()
            .filter(|(alias, _, _)| {
                toks.len() - i >= alias.len() && alias.iter().zip(&toks[i..]).all(|(a, (_, t))| a == t)
            })
            // longest alias; persons before organizations on equal length
            .max_by_key(|(alias, _, kind)| (alias.len(), *kind == EntityKind::Person));
        match best {
            Some((alias, canonical, kind)) => {
                let span = Span { start: toks[i].0.start, end: toks[i + alias.len() - 1].0.end };
                let m = EntityMatch { name: canonical.to_string(), span };
                match kind {
                    EntityKind::Person => out.persons.push(m),
                    EntityKind::Organization => out.organizations.push(m),
                }
                i += alias.len();
            }
            None => i += 1,
        }
    }
    out
}
