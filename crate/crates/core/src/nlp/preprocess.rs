use std::collections::HashSet;
use std::sync::OnceLock;

/// English function words dropped before stemming.
pub const STOP_WORDS: &[&str] = &[
    "a",
    "about",
    "above",
    "after",
    "again",
    "against",
    "all",
    "also",
    "am",
    "an",
    "and",
    "any",
    "are",
    "as",
    "at",
    "be",
    "because",
    "been",
    "before",
    "being",
    "below",
    "between",
    "both",
    "but",
    "by",
    "can",
    "could",
    "did",
    "do",
    "does",
    "doing",
    "down",
    "during",
    "each",
    "few",
    "for",
    "from",
    "further",
    "had",
    "has",
    "have",
    "having",
    "he",
    "her",
    "here",
    "hers",
    "herself",
    "him",
    "himself",
    "his",
    "how",
    "i",
    "if",
    "in",
    "into",
    "is",
    "it",
    "its",
    "itself",
    "just",
    "me",
    "more",
    "most",
    "my",
    "myself",
    "no",
    "nor",
    "not",
    "now",
    "of",
    "off",
    "on",
    "once",
    "only",
    "or",
    "other",
    "our",
    "ours",
    "ourselves",
    "out",
    "over",
    "own",
    "same",
    "she",
    "should",
    "so",
    "some",
    "such",
    "than",
    "that",
    "the",
    "their",
    "theirs",
    "them",
    "themselves",
    "then",
    "there",
    "these",
    "they",
    "this",
    "those",
    "through",
    "to",
    "too",
    "under",
    "until",
    "up",
    "very",
    "was",
    "we",
    "were",
    "what",
    "when",
    "where",
    "which",
    "while",
    "who",
    "whom",
    "why",
    "will",
    "with",
    "would",
    "you",
    "your",
    "yours",
    "yourself",
    "yourselves",
];

/// Ordered suffix rewrites; the first matching rule wins.
const SUFFIX_RULES: &[(&str, &str)] = &[
    ("ational", "ate"),
    ("ization", "ize"),
    ("fulness", "ful"),
    ("iveness", "ive"),
    ("ousness", "ous"),
    ("ments", ""),
    ("ment", ""),
    ("ness", ""),
    ("ingly", ""),
    ("edly", ""),
    ("ings", ""),
    ("ing", ""),
    ("sses", "ss"),
    ("ies", "y"),
    ("ied", "y"),
    ("ed", ""),
    ("ly", ""),
    ("s", ""),
];

/// Shortest stem (in characters) a rule may leave behind.
const MIN_STEM: usize = 3;

fn stop_words() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| STOP_WORDS.iter().copied().collect())
}

fn undouble(stem: &mut String) {
    let tail: Vec<char> = stem.chars().rev().take(2).collect();
    if let [a, b] = tail[..] {
        if a == b && a.is_ascii_alphabetic() && !"aeiouylsz".contains(a) {
            stem.pop();
        }
    }
}

/// Table-driven suffix stripping. Deterministic stand-in for lemmatization.
pub fn stem(word: &str) -> String {
    if (word.ends_with("ss") || word.ends_with("us") || word.ends_with("is")) && !word.ends_with("sses") {
        return word.to_string();
    }
    for (suffix, replacement) in SUFFIX_RULES {
        if let Some(base) = word.strip_suffix(suffix) {
            if base.chars().count() < MIN_STEM {
                continue;
            }
            let mut out = format!("{base}{replacement}");
            if replacement.is_empty() && matches!(*suffix, "ing" | "ings" | "ed" | "edly" | "ingly") {
                undouble(&mut out);
            }
            return out;
        }
    }
    word.to_string()
}

/// Lowercases, splits on non-alphanumerics, drops stop words and stems.
pub fn preprocess(text: &str) -> Vec<String> {
    let lower = text.to_lowercase();
    lower
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty() && !stop_words().contains(w))
        .map(stem)
        .collect()
}
