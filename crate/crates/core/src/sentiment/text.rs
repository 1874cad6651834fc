//! Small string predicates shared by the lexicon scorers.
//!
//! Both lexicons were built against tokenisers with specific notions of
//! whitespace, case and punctuation; these helpers mirror those notions so the
//! scores line up.

const ASCII_PUNCT: &str = "!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~";

/// Whitespace as understood by `str.split()`: Unicode White_Space plus the
/// ASCII information separators.
pub fn is_py_space(c: char) -> bool {
    c.is_whitespace() || ('\u{1c}'..='\u{1f}').contains(&c)
}

pub fn py_split(s: &str) -> impl Iterator<Item = &str> {
    s.split(is_py_space).filter(|t| !t.is_empty())
}

/// Strips ASCII punctuation from both ends, unless that leaves two or fewer
/// characters (which keeps emoticons such as `:)` intact).
pub fn strip_ascii_punct(token: &str) -> &str {
    let stripped = token.trim_matches(|c: char| ASCII_PUNCT.contains(c));
    if stripped.chars().count() <= 2 {
        token
    } else {
        stripped
    }
}

/// At least one cased character and no lowercase ones.
pub fn is_py_upper(s: &str) -> bool {
    let mut cased = false;
    for c in s.chars() {
        if c.is_lowercase() {
            return false;
        }
        if c.is_uppercase() {
            cased = true;
        }
    }
    cased
}

/// Non-empty and every character alphabetic.
pub fn is_py_alpha(s: &str) -> bool {
    !s.is_empty() && s.chars().all(char::is_alphabetic)
}
