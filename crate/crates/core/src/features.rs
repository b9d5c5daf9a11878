//! Twitter-aware tokenization and per-token binary features.

use std::fmt;
use std::sync::OnceLock;

use regex::Regex;

use crate::data::Tweet;
use crate::error::{Error, Result};

/// Tag used when no POS tagger output is available for a token.
pub const PLACEHOLDER_TAG: char = '?';

/// Number of binary flags per token.
pub const FEATURE_DIM: usize = 9;

/// POS codes mapped to flags 0..8, in flag order.
const POS_FLAG_CODES: [char; 8] = ['A', '!', '#', 'E', '@', 'V', '$', 'O'];

pub const FLAG_NAMES: [&str; FEATURE_DIM] = [
    "adjective",
    "interjection",
    "hashtag",
    "emoji",
    "at_mention",
    "verb",
    "numeral",
    "personal_pronoun",
    "elongation",
];

const HASHTAG: usize = 2;
const AT_MENTION: usize = 4;
const ELONGATION: usize = 8;

// Curated emoticons; entries beginning or ending in a letter get word boundaries.
const EMOTICONS: &[&str] = &[
    ":-)", ":)", ":-(", ":(", ";-)", ";)", ":-D", ":D", ";D", ":-P", ":P", ":-p", ":p", ";P", ";p",
    ":'(", ":'-(", ":')", ":-/", ":/", ":-|", ":|", ":-o", ":o", ":-O", ":O", ":*", ":-*", "<3",
    "</3", "^_^", "^^", "-_-", "o_O", "O_o", "xD", "XD", "=)", "=(", "=D", ">:(", ">:-(",
];

/// A token and its byte span in the source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub start: usize,
    pub end: usize,
}

fn token_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        let emoticons = EMOTICONS
            .iter()
            .map(|e| {
                let mut pat = regex::escape(e);
                if e.chars().next().is_some_and(char::is_alphanumeric) {
                    pat = format!(r"\b{pat}");
                }
                if e.chars().last().is_some_and(char::is_alphanumeric) {
                    pat.push_str(r"\b");
                }
                pat
            })
            .collect::<Vec<_>>()
            .join("|");
        let pattern = [
            r"https?://\S+|www\.\S+",
            r"@\w+",
            r"#\w+",
            &emoticons,
            r"\d+(?:[.,:/]\d+)+%?|\d+%",
            r"\w+(?:['’]\w+)*",
            r"[^\w\s#@]+",
            r"[#@]",
        ]
        .iter()
        .map(|p| format!("(?:{p})"))
        .collect::<Vec<_>>()
        .join("|");
        Regex::new(&pattern).expect("token pattern compiles")
    })
}

/// Splits `text` with ordered rules: URLs, mentions, hashtags, emoticons,
/// numbers, words and punctuation runs. Whitespace only separates tokens.
pub fn tokenize(text: &str) -> Vec<Token> {
    token_regex()
        .find_iter(text)
        .map(|m| Token {
            surface: m.as_str().to_string(),
            start: m.start(),
            end: m.end(),
        })
        .collect()
}

/// Nine ordered binary flags: eight POS-derived flags then elongation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct TokenFeatures(pub [bool; FEATURE_DIM]);

impl TokenFeatures {
    pub fn flags(&self) -> &[bool; FEATURE_DIM] {
        &self.0
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.0.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()
    }
}

impl fmt::Display for TokenFeatures {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// True when some character (case-folded) repeats at least three times in a row.
pub fn is_elongated(surface: &str) -> bool {
    let mut prev = None;
    let mut run = 0;
    for c in surface.chars().flat_map(char::to_lowercase) {
        if Some(c) == prev {
            run += 1;
            if run >= 3 {
                return true;
            }
        } else {
            prev = Some(c);
            run = 1;
        }
    }
    false
}

pub fn extract_features(surface: &str, pos: char) -> TokenFeatures {
    let mut flags = [false; FEATURE_DIM];
    if pos == PLACEHOLDER_TAG {
        flags[HASHTAG] = surface.starts_with('#');
        flags[AT_MENTION] = surface.starts_with('@');
    } else if let Some(i) = POS_FLAG_CODES.iter().position(|&c| c == pos) {
        flags[i] = true;
    }
    flags[ELONGATION] = is_elongated(surface);
    TokenFeatures(flags)
}

/// Tokenizes a tweet and pairs each token with its tag and features. Without
/// tags every token is treated as carrying the placeholder.
pub fn featurize_tweet(
    tweet: &Tweet,
    tags: Option<&[char]>,
) -> Result<Vec<(Token, char, TokenFeatures)>> {
    let tokens = tokenize(&tweet.text);
    if let Some(tags) = tags {
        if tags.len() != tokens.len() {
            return Err(Error::Alignment {
                id: tweet.id.clone(),
                message: format!("{} tags for {} tokens", tags.len(), tokens.len()),
            });
        }
    }
    Ok(tokens
        .into_iter()
        .enumerate()
        .map(|(i, tok)| {
            let pos = tags.map_or(PLACEHOLDER_TAG, |t| t[i]);
            let feats = extract_features(&tok.surface, pos);
            (tok, pos, feats)
        })
        .collect())
}
