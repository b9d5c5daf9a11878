//! Tokenizes a tweet and prints each token's binary feature flags.
//!
//! ```text
//! cargo run --example featurize -- "Sooo happy @anna!!! #blessed :)"
//! ```

use std::env;

use intensity_attn::data::{Emotion, Tweet};
use intensity_attn::features::{featurize_tweet, FLAG_NAMES};

pub fn run_example(text: &str, tags: Option<&[char]>) -> intensity_attn::Result<()> {
    let tweet = Tweet {
        id: "example".into(),
        text: text.into(),
        emotion: Emotion::Joy,
        intensity: None,
    };
    println!("{:<14} pos  {}", "token", FLAG_NAMES.join(" "));
    for (tok, pos, flags) in featurize_tweet(&tweet, tags)? {
        let cells: Vec<String> = FLAG_NAMES
            .iter()
            .zip(flags.flags())
            .map(|(name, &on)| format!("{:^w$}", if on { "x" } else { "." }, w = name.len()))
            .collect();
        println!("{:<14} {pos:^3}  {}", tok.surface, cells.join(" "));
    }
    Ok(())
}

fn main() -> intensity_attn::Result<()> {
    let text = env::args()
        .nth(1)
        .unwrap_or_else(|| "Sooo happy @anna!!! #blessed :) 100%".into());
    run_example(&text, None)
}
