//! Trigger words shared by candidate enumeration, program features, text-based
//! type detection, and antonym augmentation.

use std::collections::BTreeSet;
use std::fmt;

use crate::table::parse_number;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Trigger {
    Superlative,
    Comparative,
    Only,
    And,
    Count,
    Sum,
    Avg,
    Negation,
    Numeral,
}

impl Trigger {
    pub fn name(self) -> &'static str {
        match self {
            Trigger::Superlative => "superlative",
            Trigger::Comparative => "comparative",
            Trigger::Only => "only",
            Trigger::And => "and",
            Trigger::Count => "count",
            Trigger::Sum => "sum",
            Trigger::Avg => "avg",
            Trigger::Negation => "negation",
            Trigger::Numeral => "numeral",
        }
    }
}

impl fmt::Display for Trigger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

const SUPERLATIVE_MAX: &[&str] = &[
    "highest", "most", "largest", "biggest", "greatest", "maximum", "best", "top", "longest",
];
const SUPERLATIVE_MIN: &[&str] = &[
    "lowest", "least", "smallest", "fewest", "minimum", "worst", "shortest",
];
const COMPARATIVE_MORE: &[&str] = &[
    "higher", "more", "larger", "bigger", "greater", "longer", "above", "over", "exceeds",
];
const COMPARATIVE_LESS: &[&str] = &["lower", "less", "fewer", "smaller", "shorter", "below", "under"];
const ONLY: &[&str] = &["only", "unique", "sole"];
const AND: &[&str] = &["and", "both"];
const COUNT: &[&str] = &["how", "many", "number", "count", "times", "rows"];
const SUM: &[&str] = &["total", "sum", "combined", "altogether"];
const AVG: &[&str] = &["average", "mean"];
const NEGATION: &[&str] = &["not", "never", "no", "other"];

/// Words ending in "est" that are not superlatives.
const EST_EXCEPTIONS: &[&str] = &[
    "interest", "west", "forest", "rest", "guest", "request", "contest", "honest", "modest",
    "suggest", "protest", "harvest", "manifest", "invest", "arrest", "test", "quest", "chest",
    "nest", "pest", "vest", "digest", "midwest", "everest", "bucharest", "budapest",
];

/// Mirrored word pairs; every word appears in exactly one pair.
pub const ANTONYMS: &[(&str, &str)] = &[
    ("higher", "lower"),
    ("highest", "lowest"),
    ("longer", "shorter"),
    ("longest", "shortest"),
    ("more", "less"),
    ("most", "least"),
    ("greater", "smaller"),
    ("greatest", "smallest"),
    ("above", "below"),
    ("maximum", "minimum"),
];

pub fn antonym(word: &str) -> Option<&'static str> {
    ANTONYMS.iter().find_map(|&(a, b)| {
        if word == a {
            Some(b)
        } else if word == b {
            Some(a)
        } else {
            None
        }
    })
}

pub fn is_superlative_word(tok: &str) -> bool {
    SUPERLATIVE_MAX.contains(&tok)
        || SUPERLATIVE_MIN.contains(&tok)
        || (tok.len() >= 5 && tok.ends_with("est") && !EST_EXCEPTIONS.contains(&tok))
}

/// Which directions of superlative the text asks for: (max, min).
/// Unknown "-est" words enable both.
pub fn superlative_direction(tokens: &[&str]) -> (bool, bool) {
    let mut max = false;
    let mut min = false;
    for t in tokens {
        if SUPERLATIVE_MAX.contains(t) {
            max = true;
        } else if SUPERLATIVE_MIN.contains(t) {
            min = true;
        } else if is_superlative_word(t) {
            max = true;
            min = true;
        }
    }
    (max, min)
}

/// Which directions of comparison the text asks for: (greater, less).
pub fn comparative_direction(tokens: &[&str]) -> (bool, bool) {
    let mut more = false;
    let mut less = false;
    for (i, t) in tokens.iter().enumerate() {
        if COMPARATIVE_MORE.contains(t) {
            more = true;
        } else if COMPARATIVE_LESS.contains(t) {
            less = true;
        } else if t.ends_with("er") && tokens.get(i + 1) == Some(&"than") {
            more = true;
            less = true;
        }
    }
    (more, less)
}

/// Comparative morphology followed by "than" within three tokens, as in
/// "-er than", "more than", or "a higher attendance than".
pub fn has_comparative_phrase(tokens: &[&str]) -> bool {
    tokens.iter().enumerate().any(|(j, t)| {
        *t == "than"
            && tokens[j.saturating_sub(3)..j].iter().any(|w| {
                w.ends_with("er") || COMPARATIVE_MORE.contains(w) || COMPARATIVE_LESS.contains(w)
            })
    })
}

pub fn triggers(tokens: &[&str]) -> BTreeSet<Trigger> {
    let mut out = BTreeSet::new();
    let (max, min) = superlative_direction(tokens);
    if max || min {
        out.insert(Trigger::Superlative);
    }
    let (more, less) = comparative_direction(tokens);
    if more || less {
        out.insert(Trigger::Comparative);
    }
    let any = |list: &[&str]| tokens.iter().any(|t| list.contains(t));
    if any(ONLY) {
        out.insert(Trigger::Only);
    }
    if any(AND) {
        out.insert(Trigger::And);
    }
    if any(COUNT) {
        out.insert(Trigger::Count);
    }
    if any(SUM) {
        out.insert(Trigger::Sum);
    }
    if any(AVG) {
        out.insert(Trigger::Avg);
    }
    if any(NEGATION) || tokens.iter().any(|t| t.ends_with("n't")) {
        out.insert(Trigger::Negation);
    }
    if tokens.iter().any(|t| parse_number(t).is_some()) {
        out.insert(Trigger::Numeral);
    }
    out
}

const VERBS: &[&str] = &[
    "is", "are", "was", "were", "has", "have", "had", "did", "does", "do", "scored", "won",
    "lost", "played", "finished", "got", "received", "made", "took", "be", "been",
];

/// Rough verb test for clause detection.
pub fn is_verb_like(tok: &str) -> bool {
    VERBS.contains(&tok) || (tok.len() > 3 && tok.ends_with("ed"))
}
