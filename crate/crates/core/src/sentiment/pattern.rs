//! Adjective-lexicon polarity/subjectivity scorer (pattern family).
//!
//! Text is tokenised, lowercased and walked left to right. Known words
//! contribute their lexicon (polarity, subjectivity, intensity); a preceding
//! intensifier multiplies the next known word, a preceding negation inverts
//! the intensity and halves-and-flips the polarity, `!` boosts the previous
//! word and `(!)` marks irony. Emoticons contribute fixed moods. The score is
//! the plain mean over all assessed chunks.

use std::collections::{HashMap, HashSet};
use std::sync::LazyLock;

use regex::Regex;

use super::text::{is_py_alpha, is_py_space};
use crate::error::{Error, Result};

/// Punctuation split off token edges, and the set used to skip emoticon lookup.
const PUNCTUATION: &str = ".,;:!?()[]{}`''\"@#$^&*+-|=~_";
const EOS: &str = "END-OF-SENTENCE";
const NEGATIONS: &[&str] = &["no", "not", "n't", "never"];

const CONTRACTIONS: &[(&str, &str)] = &[
    ("'d", " 'd"),
    ("'m", " 'm"),
    ("'s", " 's"),
    ("'ll", " 'll"),
    ("'re", " 're"),
    ("'ve", " 've"),
    ("n't", " n't"),
];

const ABBREVIATIONS: &[&str] = &[
    "a.", "adj.", "adv.", "al.", "a.m.", "c.", "cf.", "comp.", "conf.", "def.", "ed.", "e.g.",
    "esp.", "etc.", "ex.", "f.", "fig.", "gen.", "id.", "i.e.", "int.", "l.", "m.", "Med.", "Mil.",
    "Mr.", "n.", "n.q.", "orig.", "pl.", "pred.", "pres.", "p.m.", "ref.", "v.", "vs.", "w/",
];

/// Mood polarity and the emoticons expressing it, checked in this order.
const EMOTICONS: &[(f64, &[&str])] = &[
    (1.00, &["<3", "♥"]),
    (1.00, &[">:D", ":-D", ":D", "=-D", "=D", "X-D", "x-D", "XD", "xD", "8-D"]),
    (0.75, &[">:P", ":-P", ":P", ":-p", ":p", ":-b", ":b", ":c)", ":o)", ":^)"]),
    (0.50, &[">:)", ":-)", ":)", "=)", "=]", ":]", ":}", ":>", ":3", "8)", "8-)"]),
    (0.25, &[">;]", ";-)", ";)", ";-]", ";]", ";D", ";^)", "*-)", "*)"]),
    (0.05, &[">:o", ":-O", ":O", ":o", ":-o", "o_O", "o.O", "°O°", "°o°"]),
    (-0.25, &[">:/", ":-/", ":/", ":\\", ">:\\", ":-.", ":-s", ":s", ":S", ":-S", ">.>"]),
    (-0.75, &[">:[", ":-(", ":(", "=(", ":-[", ":[", ":{", ":-<", ":c", ":-c", "=/"]),
    (-1.00, &[":'(", ":'''(", ";'("]),
];

static RE_LINEBREAK: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\n{2,}").unwrap());
static RE_ABBR1: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^[A-Za-z]\.$").unwrap());
static RE_ABBR2: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^([A-Za-z]\.)+$").unwrap());
// The `|` inside the class is literal, as in the original tokenizer.
static RE_ABBR3: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^[A-Z][b|c|d|f|g|h|j|k|l|m|n|p|q|r|s|t|v|w|x|z]+.$").unwrap());
static RE_SARCASM: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\( ?! ?\)").unwrap());
/// Emoticons whose characters were spaced apart by punctuation splitting.
static RE_EMOTICONS: LazyLock<Regex> = LazyLock::new(|| {
    let mut alts = Vec::new();
    for (_, group) in EMOTICONS {
        let mut group: Vec<&str> = group.to_vec();
        group.sort_by_key(|e| std::cmp::Reverse(e.chars().count()));
        for e in group {
            let parts: Vec<String> = e.chars().map(|c| regex::escape(&c.to_string())).collect();
            alts.push(parts.join(" ?"));
        }
    }
    Regex::new(&format!(r"({})($|\s)", alts.join("|"))).unwrap()
});

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PatternScore {
    pub polarity: f64,
    pub subjectivity: f64,
}

#[derive(Debug, Clone, Copy)]
struct Entry {
    polarity: f64,
    subjectivity: f64,
    intensity: f64,
}

struct Chunk {
    polarity: f64,
    subjectivity: f64,
    intensity: f64,
    negated: bool,
}

pub struct PatternAnalyzer {
    lexicon: HashMap<String, Entry>,
    modifiers: HashSet<String>,
}

static BUNDLED_LEXICON: &str = include_str!("../../data/pattern_lexicon.csv");
static BUNDLED_MODIFIERS: &str = include_str!("../../data/pattern_modifiers.txt");

impl PatternAnalyzer {
    pub fn bundled() -> Self {
        Self::from_sources(BUNDLED_LEXICON, BUNDLED_MODIFIERS).expect("bundled lexicon is valid")
    }

    /// `lexicon` is CSV `token,polarity,subjectivity,intensity`; `modifiers` lists
    /// one intensifier token per line.
    pub fn from_sources(lexicon: &str, modifiers: &str) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(lexicon.as_bytes());
        let mut map = HashMap::new();
        for rec in rdr.records() {
            let rec = rec?;
            let num = |i: usize| -> Result<f64> {
                rec.get(i)
                    .and_then(|v| v.trim().parse().ok())
                    .ok_or_else(|| Error::Data(format!("pattern lexicon: bad row {rec:?}")))
            };
            let token = rec.get(0).unwrap_or_default().to_string();
            map.insert(
                token,
                Entry {
                    polarity: num(1)?,
                    subjectivity: num(2)?,
                    intensity: num(3)?,
                },
            );
        }
        let modifiers = modifiers
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(str::to_string)
            .collect();
        Ok(PatternAnalyzer {
            lexicon: map,
            modifiers,
        })
    }

    pub fn score(&self, text: &str) -> PatternScore {
        let sentences = find_tokens(text);
        let joined = sentences.join(" ");
        let words: Vec<String> = joined.split(is_py_space).filter(|w| !w.is_empty()).map(str::to_lowercase).collect();
        let chunks = self.assess(&words);
        if chunks.is_empty() {
            return PatternScore::default();
        }
        let n = chunks.len() as f64;
        let mut p = 0.0;
        let mut s = 0.0;
        for c in &chunks {
            p += if c.negated { c.polarity * -0.5 } else { c.polarity };
            s += c.subjectivity;
        }
        PatternScore {
            polarity: p / n,
            subjectivity: s / n,
        }
    }

    fn assess(&self, words: &[String]) -> Vec<Chunk> {
        let clamp = |v: f64| v.clamp(-1.0, 1.0);
        let mut a: Vec<Chunk> = Vec::new();
        let mut modifier: Option<&str> = None;
        let mut negation: Option<&str> = None;
        for w in words {
            let w = w.as_str();
            if let Some(e) = self.lexicon.get(w) {
                if let (Some(_), Some(last)) = (modifier, a.last_mut()) {
                    last.polarity = clamp(e.polarity * last.intensity);
                    last.subjectivity = clamp(e.subjectivity * last.intensity);
                    last.intensity = e.intensity;
                } else {
                    a.push(Chunk {
                        polarity: e.polarity,
                        subjectivity: e.subjectivity,
                        intensity: e.intensity,
                        negated: false,
                    });
                }
                if negation.is_some() {
                    let last = a.last_mut().expect("chunk pushed above");
                    last.intensity = 1.0 / last.intensity;
                    last.negated = true;
                }
                modifier = self.modifiers.contains(w).then_some(w);
                negation = NEGATIONS.contains(&w).then_some(w);
            } else {
                if NEGATIONS.contains(&w) {
                    negation = Some(w);
                } else if negation.is_some() && w.trim_matches('\'').chars().count() > 1 {
                    negation = None;
                }
                if negation.is_some() && modifier.is_some_and(|m| m.ends_with("ly")) {
                    if let Some(last) = a.last_mut() {
                        last.negated = true;
                    }
                    negation = None;
                } else if modifier.is_some() && w.chars().count() > 2 {
                    modifier = None;
                }
                if w == "!" {
                    if let Some(last) = a.last_mut() {
                        last.polarity = clamp(last.polarity * 1.25);
                    }
                }
                if w == "(!)" {
                    a.push(Chunk {
                        polarity: 0.0,
                        subjectivity: 1.0,
                        intensity: 1.0,
                        negated: false,
                    });
                }
                if !is_py_alpha(w) && w.chars().count() <= 5 && !PUNCTUATION.contains(w) {
                    if let Some(p) = emoticon_polarity(w) {
                        a.push(Chunk {
                            polarity: p,
                            subjectivity: 1.0,
                            intensity: 1.0,
                            negated: false,
                        });
                    }
                }
            }
        }
        a
    }
}

fn emoticon_polarity(w: &str) -> Option<f64> {
    EMOTICONS
        .iter()
        .find(|(_, es)| es.iter().any(|e| e.to_lowercase() == w))
        .map(|(p, _)| *p)
}

fn is_split_punct(c: char) -> bool {
    c != '.' && PUNCTUATION.contains(c)
}

fn is_abbreviation(t: &str) -> bool {
    ABBREVIATIONS.contains(&t) || RE_ABBR1.is_match(t) || RE_ABBR2.is_match(t) || RE_ABBR3.is_match(t)
}

/// Splits text into sentences of space-separated tokens.
pub fn find_tokens(text: &str) -> Vec<String> {
    let mut s = text.to_string();
    for (a, b) in CONTRACTIONS {
        s = s.replace(a, b);
    }
    for q in ["“", "”", "‘", "’", "'", "\""] {
        s = s.replace(q, &format!(" {q} "));
    }
    let s = s.replace("\r\n", "\n");
    let s = RE_LINEBREAK.replace_all(&s, format!(" {EOS} ").as_str());

    let mut tokens: Vec<String> = Vec::new();
    for raw in s.split(is_py_space).filter(|t| !t.is_empty()) {
        let contraction = |t: &str| CONTRACTIONS.iter().any(|(k, _)| *k == t);
        let mut t = raw;
        let mut tail: Vec<&str> = Vec::new();
        while t.starts_with(is_split_punct) && !contraction(t) {
            tokens.push(t[..1].to_string());
            t = &t[1..];
        }
        while (t.ends_with(is_split_punct) || t.ends_with('.')) && !contraction(t) {
            if t.ends_with(is_split_punct) {
                tail.push(&t[t.len() - 1..]);
                t = &t[..t.len() - 1];
            }
            if t.ends_with("...") {
                tail.push("...");
                t = t[..t.len() - 3].trim_end_matches('.');
            }
            if t.ends_with('.') {
                if is_abbreviation(t) {
                    break;
                }
                tail.push(".");
                t = &t[..t.len() - 1];
            }
        }
        if !t.is_empty() {
            tokens.push(t.to_string());
        }
        tokens.extend(tail.into_iter().rev().map(str::to_string));
    }

    let is_end = |t: &str| matches!(t, "..." | "." | "!" | "?") || t == EOS;
    let is_trailer = |t: &str| matches!(t, "'" | "\"" | "”" | "’" | "..." | "." | "!" | "?" | ")") || t == EOS;
    let mut sentences: Vec<Vec<&str>> = vec![Vec::new()];
    let (mut i, mut j) = (0usize, 0usize);
    while j < tokens.len() {
        if is_end(&tokens[j]) {
            while j < tokens.len() && is_trailer(&tokens[j]) {
                let t = tokens[j].as_str();
                if (t == "'" || t == "\"") && sentences.last().unwrap().iter().filter(|x| **x == t).count() % 2 == 0 {
                    break;
                }
                j += 1;
            }
            let cur = sentences.last_mut().unwrap();
            cur.extend(tokens[i..j].iter().map(String::as_str).filter(|t| *t != EOS));
            sentences.push(Vec::new());
            i = j;
        }
        j += 1;
    }
    let end = j.min(tokens.len());
    if i < end {
        sentences.last_mut().unwrap().extend(tokens[i..end].iter().map(String::as_str));
    }

    sentences
        .into_iter()
        .filter(|s| !s.is_empty())
        .map(|s| {
            let s = s.join(" ");
            let s = RE_SARCASM.replace_all(&s, "(!)");
            RE_EMOTICONS
                .replace_all(&s, |c: &regex::Captures<'_>| format!("{}{}", c[1].replace(' ', ""), &c[2]))
                .into_owned()
        })
        .collect()
}
