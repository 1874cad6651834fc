//! Lexicon sentiment for a few lines of text, or for each line on stdin.
//!
//!     cargo run --example score_text
//!     echo "bitcoin is soaring :)" | cargo run --example score_text -- -

use std::io::BufRead;

use sentiforge::sentiment::{score_pattern, score_vader};

fn main() {
    let lines: Vec<String> = if std::env::args().nth(1).as_deref() == Some("-") {
        std::io::stdin().lock().lines().map_while(Result::ok).collect()
    } else {
        [
            "Bitcoin hits a new all-time high!",
            "Exchange hacked, funds are NOT safe.",
            "The network processed 300k transactions today.",
            "Not bad at all, pretty good week for crypto :)",
        ]
        .map(String::from)
        .to_vec()
    };
    println!("{:>7} {:>7} {:>7} {:>8} {:>9} {:>7}  text", "pos", "neg", "neu", "compound", "polarity", "subj");
    for line in &lines {
        let v = score_vader(line);
        let p = score_pattern(line);
        println!(
            "{:>7.3} {:>7.3} {:>7.3} {:>8.4} {:>9.4} {:>7.4}  {line}",
            v.pos, v.neg, v.neu, v.compound, p.polarity, p.subjectivity
        );
    }
}
