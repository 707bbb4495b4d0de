//! Comment text scoring: markdown cleanup, the scorer interface, and the
//! bundled lexicon scorer.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

/// Sentiment, usefulness, and toxicity verdict for one text.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TextScore {
    /// In [-1, 1].
    pub sentiment: f64,
    pub useful: bool,
    pub toxic: bool,
}

impl TextScore {
    pub const NEUTRAL: TextScore = TextScore {
        sentiment: 0.0,
        useful: false,
        toxic: false,
    };
}

/// One text to score, identified by comment id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScoreRequest<'a> {
    pub id: i64,
    pub text: &'a str,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("text scorer failed: {0}")]
pub struct ScorerError(pub String);

/// Pluggable text classifier. Implementations receive markdown that has
/// already had fenced code blocks and URLs removed, and must return one
/// score per request in request order.
pub trait TextScorer {
    fn score_batch(&mut self, requests: &[ScoreRequest<'_>]) -> Result<Vec<TextScore>, ScorerError>;
}

/// Strip fenced code and URLs, then score a single text.
pub fn score_text(body: &str, scorer: &mut dyn TextScorer) -> Result<TextScore, ScorerError> {
    let cleaned = strip_for_scoring(body);
    let mut scores = scorer.score_batch(&[ScoreRequest { id: 0, text: &cleaned }])?;
    scores
        .pop()
        .ok_or_else(|| ScorerError("scorer returned no result".into()))
}

/// Remove fenced code blocks (``` or ~~~) including their contents.
pub fn strip_fenced_code(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut fence: Option<&str> = None;
    for line in text.lines() {
        let trimmed = line.trim_start();
        match fence {
            Some(marker) => {
                if trimmed.starts_with(marker) {
                    fence = None;
                }
            }
            None => {
                if trimmed.starts_with("```") {
                    fence = Some("```");
                } else if trimmed.starts_with("~~~") {
                    fence = Some("~~~");
                } else {
                    out.push_str(line);
                    out.push('\n');
                }
            }
        }
    }
    out
}

fn is_url_start(rest: &str) -> bool {
    let lower = |p: &str| rest.len() >= p.len() && rest.as_bytes()[..p.len()].eq_ignore_ascii_case(p.as_bytes());
    lower("http://") || lower("https://") || lower("www.")
}

fn url_end(c: char) -> bool {
    c.is_whitespace() || matches!(c, ')' | '>' | ']' | '"' | '\'')
}

/// Remove `http(s)://` and `www.` URLs.
pub fn strip_urls(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    let bytes = text.as_bytes();
    while i < text.len() {
        let at_boundary = i == 0 || !(bytes[i - 1] as char).is_ascii_alphanumeric();
        if at_boundary && is_url_start(&text[i..]) {
            let end = text[i..].find(url_end).map_or(text.len(), |n| i + n);
            i = end;
            continue;
        }
        let ch = text[i..].chars().next().unwrap_or(' ');
        out.push(ch);
        i += ch.len_utf8();
    }
    out
}

/// Remove inline `code` spans (including the backticks).
pub fn strip_inline_code(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(start) = rest.find('`') {
        let ticks = rest[start..].chars().take_while(|&c| c == '`').count();
        let delim = &rest[start..start + ticks];
        let after = &rest[start + ticks..];
        match after.find(delim) {
            Some(close) => {
                out.push_str(&rest[..start]);
                out.push(' ');
                rest = &after[close + ticks..];
            }
            None => {
                out.push_str(&rest[..start + ticks]);
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

/// Preprocessing applied before any scorer sees a text.
pub fn strip_for_scoring(text: &str) -> String {
    strip_urls(&strip_fenced_code(text))
}

/// Preprocessing for readability: scoring cleanup plus inline code.
pub fn strip_code(text: &str) -> String {
    strip_inline_code(&strip_for_scoring(text))
}

const POSITIVE: &[&str] = &[
    "good",
    "great",
    "nice",
    "thanks",
    "thank",
    "awesome",
    "excellent",
    "love",
    "perfect",
    "helpful",
    "clean",
    "cool",
    "glad",
    "happy",
    "appreciate",
    "appreciated",
    "agree",
    "works",
    "fixed",
    "neat",
    "elegant",
    "better",
    "welcome",
    "congrats",
    "amazing",
    "well",
    "wonderful",
    "lgtm",
    "correct",
    "beautiful",
    "fantastic",
    "pleased",
    "improvement",
    "useful",
];

const NEGATIVE: &[&str] = &[
    "bad",
    "wrong",
    "broken",
    "fail",
    "fails",
    "failed",
    "failing",
    "error",
    "bug",
    "ugly",
    "hate",
    "terrible",
    "awful",
    "confusing",
    "confused",
    "worse",
    "worst",
    "problem",
    "issue",
    "crash",
    "crashes",
    "annoying",
    "sad",
    "unfortunately",
    "slow",
    "mess",
    "messy",
    "poor",
    "horrible",
    "useless",
    "regression",
    "sorry",
    "disappointed",
    "painful",
];

const PROFANITY: &[&str] = &[
    "damn",
    "dammit",
    "crap",
    "crappy",
    "shit",
    "shitty",
    "bullshit",
    "fuck",
    "fucking",
    "fucked",
    "wtf",
    "stupid",
    "idiot",
    "idiotic",
    "moron",
    "dumb",
    "retarded",
    "sucks",
    "garbage",
    "trash",
    "pathetic",
    "asshole",
    "bastard",
    "bitch",
    "dickhead",
    "loser",
    "shut up",
    "screw you",
];

const IMPERATIVES: &[&str] = &[
    "add",
    "remove",
    "rename",
    "use",
    "move",
    "replace",
    "change",
    "fix",
    "delete",
    "drop",
    "avoid",
    "consider",
    "check",
    "update",
    "extract",
    "split",
    "merge",
    "simplify",
    "refactor",
    "document",
    "test",
    "handle",
    "return",
    "make",
    "please",
    "should",
    "must",
    "need",
    "needs",
    "revert",
    "inline",
    "mark",
    "keep",
    "pass",
    "call",
    "initialize",
    "validate",
];

const CODE_EXTENSIONS: &[&str] = &[
    ".rs", ".py", ".c", ".h", ".cc", ".cpp", ".hpp", ".f90", ".f", ".js", ".ts", ".java", ".go", ".cu", ".md", ".txt",
    ".toml", ".yaml", ".yml", ".json", ".cmake", ".sh",
];

fn words(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !(c.is_alphanumeric() || c == '\''))
        .filter(|w| !w.is_empty())
        .map(|w| w.trim_matches('\'').to_lowercase())
        .filter(|w| !w.is_empty())
}

fn looks_like_code_reference(token: &str) -> bool {
    let t = token.trim_matches(|c: char| matches!(c, ',' | '.' | ';' | ':' | '!' | '?' | '"' | '\''));
    if t.is_empty() {
        return false;
    }
    let has_call = t.contains("()") || (t.contains('(') && t.ends_with(')'));
    let has_path = t.contains("::") || t.contains("->") || (t.contains('/') && t.chars().any(char::is_alphabetic));
    let lower = t.to_lowercase();
    let has_ext = CODE_EXTENSIONS
        .iter()
        .any(|ext| lower.ends_with(ext) && lower.len() > ext.len());
    let snake = t.contains('_') && t.chars().all(|c| c.is_alphanumeric() || c == '_');
    let camel = t.chars().next().is_some_and(char::is_lowercase)
        && t.chars().skip(1).any(char::is_uppercase)
        && t.chars().all(char::is_alphanumeric);
    let line_ref = lower.starts_with('l') && lower.len() > 1 && lower[1..].bytes().all(|b| b.is_ascii_digit());
    has_call || has_path || has_ext || snake || camel || line_ref
}

fn sentence_starts(text: &str) -> impl Iterator<Item = &str> {
    text.split(['.', '!', '?', '\n'])
        .filter_map(|s| s.split_whitespace().next())
}

/// Deterministic word-list scorer shipped with the crate.
///
/// * sentiment: mean of +1/-1 over positive and negative lexicon hits
///   (0 when nothing matches),
/// * toxic: any hit in the profanity lexicon,
/// * useful: an inline backtick, a code-like token (call, path, file name,
///   snake/camel identifier, `L42` line reference), or a sentence starting
///   with an imperative verb.
#[derive(Debug, Clone, Copy, Default)]
pub struct LexiconScorer;

impl LexiconScorer {
    pub fn score(&self, text: &str) -> TextScore {
        if text.trim().is_empty() {
            return TextScore::NEUTRAL;
        }
        let mut pos = 0i64;
        let mut neg = 0i64;
        let tokens: Vec<String> = words(text).collect();
        for w in &tokens {
            if POSITIVE.contains(&w.as_str()) {
                pos += 1;
            } else if NEGATIVE.contains(&w.as_str()) {
                neg += 1;
            }
        }
        let sentiment = if pos + neg == 0 {
            0.0
        } else {
            (pos - neg) as f64 / (pos + neg) as f64
        };

        let lowered = text.to_lowercase();
        let joined = {
            let mut s = String::new();
            for w in &tokens {
                s.push(' ');
                s.push_str(w);
            }
            s.push(' ');
            s
        };
        let toxic = PROFANITY.iter().any(|p| {
            let needle = alloc::format!(" {p} ");
            joined.contains(&needle)
        });

        let useful = text.contains('`')
            || text.split_whitespace().any(looks_like_code_reference)
            || sentence_starts(&lowered).any(|w| {
                let w = w.trim_matches(|c: char| !c.is_alphanumeric());
                IMPERATIVES.contains(&w)
            });

        TextScore {
            sentiment,
            useful,
            toxic,
        }
    }
}

impl TextScorer for LexiconScorer {
    fn score_batch(&mut self, requests: &[ScoreRequest<'_>]) -> Result<Vec<TextScore>, ScorerError> {
        Ok(requests.iter().map(|r| self.score(r.text)).collect())
    }
}
