//! Lexicon-and-rule valence scorer (VADER family).
//!
//! Token valences come from a `token<TAB>valence` lexicon and are adjusted by
//! the usual rule set: preceding boosters and dampeners, negations within a
//! three-token window, ALL-CAPS emphasis when only part of the text is
//! capitalised, "but" clause reweighting, "least"/"no" handling, a handful of
//! idioms, and exclamation/question-mark amplification. Scores are returned
//! unrounded.

use std::collections::HashMap;
use std::path::Path;

use super::text::{is_py_upper, py_split, strip_ascii_punct};
use crate::error::{Error, Result};

const BOOST_INCR: f64 = 0.293;
const BOOST_DECR: f64 = -0.293;
const CAPS_INCR: f64 = 0.733;
const NEGATION_SCALAR: f64 = -0.74;
const NORMALIZE_ALPHA: f64 = 15.0;

const NEGATE: &[&str] = &[
    "aint", "arent", "cannot", "cant", "couldnt", "darent", "didnt", "doesnt", "ain't", "aren't",
    "can't", "couldn't", "daren't", "didn't", "doesn't", "dont", "hadnt", "hasnt", "havent",
    "isnt", "mightnt", "mustnt", "neither", "don't", "hadn't", "hasn't", "haven't", "isn't",
    "mightn't", "mustn't", "neednt", "needn't", "never", "none", "nope", "nor", "not", "nothing",
    "nowhere", "oughtnt", "shant", "shouldnt", "uhuh", "wasnt", "werent", "oughtn't", "shan't",
    "shouldn't", "uh-uh", "wasn't", "weren't", "without", "wont", "wouldnt", "won't", "wouldn't",
    "rarely", "seldom", "despite",
];

const BOOSTERS_UP: &[&str] = &[
    "absolutely", "amazingly", "awfully", "completely", "considerable", "considerably",
    "decidedly", "deeply", "effing", "enormous", "enormously", "entirely", "especially",
    "exceptional", "exceptionally", "extreme", "extremely", "fabulously", "flipping", "flippin",
    "frackin", "fracking", "fricking", "frickin", "frigging", "friggin", "fully", "fuckin",
    "fucking", "fuggin", "fugging", "greatly", "hella", "highly", "hugely", "incredible",
    "incredibly", "intensely", "major", "majorly", "more", "most", "particularly", "purely",
    "quite", "really", "remarkably", "so", "substantially", "thoroughly", "total", "totally",
    "tremendous", "tremendously", "uber", "unbelievably", "unusually", "utter", "utterly", "very",
];

const BOOSTERS_DOWN: &[&str] = &[
    "almost", "barely", "hardly", "just enough", "kind of", "kinda", "kindof", "kind-of", "less",
    "little", "marginal", "marginally", "occasional", "occasionally", "partly", "scarce",
    "scarcely", "slight", "slightly", "somewhat", "sort of", "sorta", "sortof", "sort-of",
];

const SPECIAL_CASES: &[(&str, f64)] = &[
    ("the shit", 3.0),
    ("the bomb", 3.0),
    ("bad ass", 1.5),
    ("badass", 1.5),
    ("bus stop", 0.0),
    ("yeah right", -2.0),
    ("kiss of death", -1.5),
    ("to die for", 3.0),
    ("beating heart", 3.5),
];

/// pos/neg/neu proportions and the normalised compound valence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VaderScore {
    pub pos: f64,
    pub neg: f64,
    pub neu: f64,
    pub compound: f64,
}

impl VaderScore {
    pub const EMPTY: VaderScore = VaderScore {
        pos: 0.0,
        neg: 0.0,
        neu: 1.0,
        compound: 0.0,
    };
}

pub struct VaderAnalyzer {
    lexicon: HashMap<String, f64>,
    emojis: HashMap<char, String>,
    boosters: HashMap<&'static str, f64>,
    special: HashMap<&'static str, f64>,
}

static BUNDLED_LEXICON: &str = include_str!("../../data/vader_lexicon.tsv");
static BUNDLED_EMOJI: &str = include_str!("../../data/emoji_lexicon.tsv");

impl VaderAnalyzer {
    /// Analyzer over the lexicon files shipped with the crate.
    pub fn bundled() -> Self {
        Self::from_sources(BUNDLED_LEXICON, Some(BUNDLED_EMOJI)).expect("bundled lexicon is valid")
    }

    pub fn from_files(lexicon: &Path, emoji: Option<&Path>) -> Result<Self> {
        let read = |p: &Path| std::fs::read_to_string(p).map_err(|e| Error::io(p, e));
        let lex = read(lexicon)?;
        let emo = emoji.map(read).transpose()?;
        Self::from_sources(&lex, emo.as_deref())
    }

    pub fn from_sources(lexicon: &str, emoji: Option<&str>) -> Result<Self> {
        let mut lex = HashMap::new();
        for (n, line) in lexicon.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut cols = line.split('\t');
            let (Some(tok), Some(val)) = (cols.next(), cols.next()) else {
                return Err(Error::Data(format!("lexicon line {}: expected token<TAB>valence", n + 1)));
            };
            let val: f64 = val
                .trim()
                .parse()
                .map_err(|_| Error::Data(format!("lexicon line {}: bad valence {val:?}", n + 1)))?;
            lex.insert(tok.to_string(), val);
        }
        let mut emojis = HashMap::new();
        for line in emoji.unwrap_or("").lines() {
            let mut cols = line.trim_matches(|c: char| c == '\r' || c == '\n').splitn(3, '\t');
            if let (Some(e), Some(desc)) = (cols.next(), cols.next()) {
                let mut chars = e.chars();
                if let (Some(c), None) = (chars.next(), chars.next()) {
                    emojis.insert(c, desc.to_string());
                }
            }
        }
        let boosters = BOOSTERS_UP
            .iter()
            .map(|w| (*w, BOOST_INCR))
            .chain(BOOSTERS_DOWN.iter().map(|w| (*w, BOOST_DECR)))
            .collect();
        Ok(VaderAnalyzer {
            lexicon: lex,
            emojis,
            boosters,
            special: SPECIAL_CASES.iter().copied().collect(),
        })
    }

    pub fn valence(&self, token: &str) -> Option<f64> {
        self.lexicon.get(token).copied()
    }

    pub fn score(&self, text: &str) -> VaderScore {
        let text = self.replace_emojis(text);
        let text = text.trim_matches(super::text::is_py_space);
        let words: Vec<&str> = py_split(text).map(strip_ascii_punct).collect();
        let lower: Vec<String> = words.iter().map(|w| w.to_lowercase()).collect();
        let cap_diff = allcap_differential(&words);

        let mut sentiments = Vec::with_capacity(words.len());
        for (i, item) in lower.iter().enumerate() {
            if self.boosters.contains_key(item.as_str())
                || (item == "kind" && lower.get(i + 1).is_some_and(|n| n == "of"))
            {
                sentiments.push(0.0);
                continue;
            }
            sentiments.push(self.token_valence(&words, &lower, i, cap_diff));
        }
        but_check(&lower, &mut sentiments);
        score_valence(&sentiments, text)
    }

    fn replace_emojis(&self, text: &str) -> String {
        if self.emojis.is_empty() {
            return text.to_string();
        }
        let mut out = String::with_capacity(text.len());
        let mut prev_space = true;
        for c in text.chars() {
            if let Some(desc) = self.emojis.get(&c) {
                if !prev_space {
                    out.push(' ');
                }
                out.push_str(desc);
                prev_space = false;
            } else {
                out.push(c);
                prev_space = c == ' ';
            }
        }
        out
    }

    fn in_lexicon(&self, w: &str) -> bool {
        self.lexicon.contains_key(w)
    }

    fn token_valence(&self, words: &[&str], lower: &[String], i: usize, cap_diff: bool) -> f64 {
        let item = lower[i].as_str();
        let Some(base) = self.valence(item) else {
            return 0.0;
        };
        let mut valence = base;

        // "no" directly ahead of a lexicon word acts as a negator, not a lexicon item.
        if item == "no" && i + 1 < lower.len() && self.in_lexicon(&lower[i + 1]) {
            valence = 0.0;
        }
        if (i > 0 && lower[i - 1] == "no")
            || (i > 1 && lower[i - 2] == "no")
            || (i > 2 && lower[i - 3] == "no" && (lower[i - 1] == "or" || lower[i - 1] == "nor"))
        {
            valence = base * NEGATION_SCALAR;
        }

        if is_py_upper(words[i]) && cap_diff {
            if valence > 0.0 {
                valence += CAPS_INCR;
            } else {
                valence -= CAPS_INCR;
            }
        }

        for start in 0..3 {
            if i > start && !self.in_lexicon(&lower[i - (start + 1)]) {
                let mut s = self.scalar_inc_dec(words[i - (start + 1)], &lower[i - (start + 1)], valence, cap_diff);
                if start == 1 && s != 0.0 {
                    s *= 0.95;
                }
                if start == 2 && s != 0.0 {
                    s *= 0.9;
                }
                valence += s;
                valence = negation_check(valence, lower, start, i);
                if start == 2 {
                    valence = self.special_idioms_check(valence, lower, i);
                }
            }
        }
        self.least_check(valence, lower, i)
    }

    fn scalar_inc_dec(&self, word: &str, lower: &str, valence: f64, cap_diff: bool) -> f64 {
        let Some(&b) = self.boosters.get(lower) else {
            return 0.0;
        };
        let mut scalar = if valence < 0.0 { -b } else { b };
        if is_py_upper(word) && cap_diff {
            if valence > 0.0 {
                scalar += CAPS_INCR;
            } else {
                scalar -= CAPS_INCR;
            }
        }
        scalar
    }

    fn least_check(&self, valence: f64, lower: &[String], i: usize) -> f64 {
        if i > 1 && !self.in_lexicon(&lower[i - 1]) && lower[i - 1] == "least" {
            if lower[i - 2] != "at" && lower[i - 2] != "very" {
                return valence * NEGATION_SCALAR;
            }
        } else if i > 0 && !self.in_lexicon(&lower[i - 1]) && lower[i - 1] == "least" {
            return valence * NEGATION_SCALAR;
        }
        valence
    }

    /// Only called with `i >= 3`.
    fn special_idioms_check(&self, mut valence: f64, lower: &[String], i: usize) -> f64 {
        let onezero = format!("{} {}", lower[i - 1], lower[i]);
        let twoonezero = format!("{} {} {}", lower[i - 2], lower[i - 1], lower[i]);
        let twoone = format!("{} {}", lower[i - 2], lower[i - 1]);
        let threetwoone = format!("{} {} {}", lower[i - 3], lower[i - 2], lower[i - 1]);
        let threetwo = format!("{} {}", lower[i - 3], lower[i - 2]);

        for seq in [&onezero, &twoonezero, &twoone, &threetwoone, &threetwo] {
            if let Some(&v) = self.special.get(seq.as_str()) {
                valence = v;
                break;
            }
        }
        if lower.len() - 1 > i {
            let zeroone = format!("{} {}", lower[i], lower[i + 1]);
            if let Some(&v) = self.special.get(zeroone.as_str()) {
                valence = v;
            }
        }
        if lower.len() - 1 > i + 1 {
            let zeroonetwo = format!("{} {} {}", lower[i], lower[i + 1], lower[i + 2]);
            if let Some(&v) = self.special.get(zeroonetwo.as_str()) {
                valence = v;
            }
        }
        for ngram in [&threetwoone, &threetwo, &twoone] {
            if let Some(&b) = self.boosters.get(ngram.as_str()) {
                valence += b;
            }
        }
        valence
    }
}

fn is_negation(word: &str) -> bool {
    NEGATE.contains(&word) || word.contains("n't")
}

fn negation_check(valence: f64, lower: &[String], start: usize, i: usize) -> f64 {
    let w = |k: usize| lower[i - k].as_str();
    match start {
        0 => {
            if is_negation(w(1)) {
                return valence * NEGATION_SCALAR;
            }
        }
        1 => {
            if w(2) == "never" && (w(1) == "so" || w(1) == "this") {
                return valence * 1.25;
            } else if w(2) == "without" && w(1) == "doubt" {
                return valence;
            } else if is_negation(w(2)) {
                return valence * NEGATION_SCALAR;
            }
        }
        _ => {
            if (w(3) == "never" && (w(2) == "so" || w(2) == "this")) || (w(1) == "so" || w(1) == "this") {
                return valence * 1.25;
            } else if w(3) == "without" && (w(2) == "doubt" || w(1) == "doubt") {
                return valence;
            } else if is_negation(w(3)) {
                return valence * NEGATION_SCALAR;
            }
        }
    }
    valence
}

/// True when some, but not all, tokens are upper case.
fn allcap_differential(words: &[&str]) -> bool {
    let caps = words.iter().filter(|w| is_py_upper(w)).count();
    let diff = words.len() - caps;
    0 < diff && diff < words.len()
}

/// Halves valences before the first "but" and boosts the ones after it by half.
///
/// Each element is located by value (first equal entry), so repeated valences
/// are rewritten at their first occurrence; this matches the established
/// reference behaviour and is kept for score parity.
fn but_check(lower: &[String], sentiments: &mut [f64]) {
    let Some(bi) = lower.iter().position(|w| w == "but") else {
        return;
    };
    for k in 0..sentiments.len() {
        let s = sentiments[k];
        let si = sentiments.iter().position(|&v| v == s).unwrap_or(k);
        if si < bi {
            sentiments[si] = s * 0.5;
        } else if si > bi {
            sentiments[si] = s * 1.5;
        }
    }
}

fn punctuation_emphasis(text: &str) -> f64 {
    let ep = text.matches('!').count().min(4) as f64 * 0.292;
    let qm_count = text.matches('?').count();
    let qm = if qm_count > 1 {
        if qm_count <= 3 {
            qm_count as f64 * 0.18
        } else {
            0.96
        }
    } else {
        0.0
    };
    ep + qm
}

fn normalize(score: f64) -> f64 {
    (score / (score * score + NORMALIZE_ALPHA).sqrt()).clamp(-1.0, 1.0)
}

fn score_valence(sentiments: &[f64], text: &str) -> VaderScore {
    if sentiments.is_empty() {
        return VaderScore::EMPTY;
    }
    let mut sum: f64 = sentiments.iter().sum();
    let amp = punctuation_emphasis(text);
    if sum > 0.0 {
        sum += amp;
    } else if sum < 0.0 {
        sum -= amp;
    }
    let compound = normalize(sum);

    let mut pos_sum = 0.0;
    let mut neg_sum = 0.0;
    let mut neu_count = 0usize;
    for &s in sentiments {
        if s > 0.0 {
            pos_sum += s + 1.0;
        }
        if s < 0.0 {
            neg_sum += s - 1.0;
        }
        if s == 0.0 {
            neu_count += 1;
        }
    }
    if pos_sum > neg_sum.abs() {
        pos_sum += amp;
    } else if pos_sum < neg_sum.abs() {
        neg_sum -= amp;
    }
    let total = pos_sum + neg_sum.abs() + neu_count as f64;
    VaderScore {
        pos: (pos_sum / total).abs(),
        neg: (neg_sum / total).abs(),
        neu: (neu_count as f64 / total).abs(),
        compound,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn analyzer() -> VaderAnalyzer {
        VaderAnalyzer::bundled()
    }

    #[test]
    fn empty_and_blank_text_use_neutral_convention() {
        let a = analyzer();
        assert_eq!(a.score(""), VaderScore::EMPTY);
        assert_eq!(a.score("   \n\t"), VaderScore::EMPTY);
    }

    #[test]
    fn reference_sentence() {
        let s = analyzer().score("VADER is smart, handsome, and funny.");
        assert!((s.compound - 0.8316).abs() < 1e-3, "{s:?}");
        assert!((s.pos + s.neg + s.neu - 1.0).abs() < 1e-12);
    }

    #[test]
    fn negation_flips_sign() {
        let a = analyzer();
        assert!(a.score("good").compound > 0.0);
        assert!(a.score("not good").compound < 0.0);
        assert!(a.score("isn't good").compound < 0.0);
    }

    #[test]
    fn boosters_caps_and_punctuation_amplify() {
        let a = analyzer();
        let plain = a.score("The movie is good").compound;
        assert!(a.score("The movie is very good").compound > plain);
        assert!(a.score("The movie is GOOD").compound > plain);
        assert!(a.score("The movie is good!!").compound > plain);
        assert!(a.score("The movie is slightly good").compound < plain);
    }

    #[test]
    fn but_shifts_weight_to_second_clause() {
        let a = analyzer();
        let s = a.score("The food was great but the service was terrible");
        assert!(s.compound < 0.0, "{s:?}");
    }

    #[test]
    fn but_check_locates_values_by_first_occurrence() {
        let lower: Vec<String> = ["x", "but", "y", "z"].iter().map(|s| s.to_string()).collect();
        let mut s = vec![2.0, 0.0, 1.0, 3.0];
        but_check(&lower, &mut s);
        // 2.0 -> 1.0 first; the later 1.0 then matches index 0 and halves it again.
        assert_eq!(s, vec![0.5, 0.0, 1.0, 4.5]);
    }

    #[test]
    fn compound_is_bounded() {
        let a = analyzer();
        let s = a.score("GREAT GREAT GREAT amazing wonderful love love love!!!!!! best");
        assert!(s.compound <= 1.0 && s.compound > 0.9);
    }
}
