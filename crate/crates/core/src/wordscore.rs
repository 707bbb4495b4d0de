//! Fighting words: log-odds ratios with an informative Dirichlet prior,
//! contrasting the vocabulary of useful and not-useful review comments.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::enrich::text::{strip_fenced_code, strip_inline_code, strip_urls};
use crate::num;
use crate::svg::{escape, f2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UtteranceClass {
    Useful,
    NotUseful,
}

impl UtteranceClass {
    pub fn as_str(self) -> &'static str {
        match self {
            UtteranceClass::Useful => "useful",
            UtteranceClass::NotUseful => "not_useful",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledUtterance {
    pub comment_id: i64,
    pub repo_slug: String,
    pub text: String,
    pub class: UtteranceClass,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FightingWordsConfig {
    /// Symmetric prior pseudo-count per token.
    pub alpha: f64,
    /// 1 for unigrams only, 2 to add bigrams, and so on.
    pub ngram_max: usize,
    /// Minimum combined count for a token to enter the vocabulary.
    pub min_count: u64,
    /// Tokens flagged per class.
    pub top_n: usize,
}

impl Default for FightingWordsConfig {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            ngram_max: 2,
            min_count: 5,
            top_n: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenZScore {
    pub token: String,
    pub count_useful: u64,
    pub count_not_useful: u64,
    pub log_odds: f64,
    pub z: f64,
    /// Set for the `top_n` most useful-leaning and not-useful-leaning tokens.
    pub top_class: Option<UtteranceClass>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FightingWords {
    /// Sorted by z descending, ties by token.
    pub tokens: Vec<TokenZScore>,
    /// Utterances that were empty after cleaning.
    pub dropped_empty: usize,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WordscoreError {
    #[error("fighting words needs utterances from both classes; none are {0}")]
    SingleClassCorpus(&'static str),
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
}

fn remove_mentions(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut prev: Option<char> = None;
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        let boundary = prev.is_none_or(|p| !(p.is_alphanumeric() || p == '_'));
        let starts_login = chars.peek().is_some_and(|n| n.is_ascii_alphanumeric());
        if c == '@' && boundary && starts_login {
            while chars
                .peek()
                .is_some_and(|n| n.is_ascii_alphanumeric() || matches!(n, '-' | '_'))
            {
                chars.next();
            }
            out.push(' ');
            prev = Some(' ');
            continue;
        }
        out.push(c);
        prev = Some(c);
    }
    out
}

/// Lowercase, drop fenced and inline code, URLs and @-mentions, turn
/// punctuation into spaces (apostrophes survive inside words), and collapse
/// whitespace.
pub fn clean_text(raw: &str) -> String {
    let stripped = remove_mentions(&strip_urls(&strip_inline_code(&strip_fenced_code(raw))));
    let lowered = stripped.to_lowercase();
    let chars: Vec<char> = lowered.chars().collect();
    let mut spaced = String::with_capacity(lowered.len());
    for (i, &c) in chars.iter().enumerate() {
        let keep = c.is_alphanumeric()
            || (c == '\''
                && i > 0
                && chars[i - 1].is_alphanumeric()
                && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric()));
        spaced.push(if keep { c } else { ' ' });
    }
    let mut out = String::with_capacity(spaced.len());
    for word in spaced.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

/// All n-grams up to `ngram_max` of an already-cleaned utterance.
pub fn ngrams(cleaned: &str, ngram_max: usize) -> Vec<String> {
    let words: Vec<&str> = cleaned.split_whitespace().collect();
    let mut out = Vec::new();
    for n in 1..=ngram_max {
        for window in words.windows(n) {
            out.push(window.join(" "));
        }
    }
    out
}

fn count_tokens(utterances: &[&str], ngram_max: usize, counts: &mut BTreeMap<String, [u64; 2]>, side: usize) -> usize {
    let mut kept = 0;
    for u in utterances {
        let cleaned = clean_text(u);
        if cleaned.is_empty() {
            continue;
        }
        kept += 1;
        for gram in ngrams(&cleaned, ngram_max) {
            counts.entry(gram).or_default()[side] += 1;
        }
    }
    kept
}

/// Score every token whose combined count reaches `min_count`.
///
/// With counts `y1`, `y2` over the retained vocabulary `V`, class totals
/// `n1`, `n2`, and `a0 = alpha * |V|`:
/// `delta = ln((y1 + a) / (n1 + a0 - y1 - a)) - ln((y2 + a) / (n2 + a0 - y2 - a))`,
/// `z = delta / sqrt(1 / (y1 + a) + 1 / (y2 + a))`.
pub fn fighting_words(
    useful: &[&str],
    not_useful: &[&str],
    config: &FightingWordsConfig,
) -> Result<FightingWords, WordscoreError> {
    if config.alpha.is_nan() || config.alpha <= 0.0 {
        return Err(WordscoreError::InvalidConfig("alpha must be positive"));
    }
    if config.ngram_max == 0 {
        return Err(WordscoreError::InvalidConfig("ngram_max must be at least 1"));
    }
    let mut counts: BTreeMap<String, [u64; 2]> = BTreeMap::new();
    let kept_useful = count_tokens(useful, config.ngram_max, &mut counts, 0);
    let kept_not = count_tokens(not_useful, config.ngram_max, &mut counts, 1);
    let dropped_empty = useful.len() + not_useful.len() - kept_useful - kept_not;
    if kept_useful == 0 {
        return Err(WordscoreError::SingleClassCorpus(UtteranceClass::Useful.as_str()));
    }
    if kept_not == 0 {
        return Err(WordscoreError::SingleClassCorpus(UtteranceClass::NotUseful.as_str()));
    }

    counts.retain(|_, [a, b]| *a + *b >= config.min_count);
    let n1: u64 = counts.values().map(|c| c[0]).sum();
    let n2: u64 = counts.values().map(|c| c[1]).sum();
    let a = config.alpha;
    let a0 = a * counts.len() as f64;
    let (n1, n2) = (n1 as f64, n2 as f64);

    let mut tokens: Vec<TokenZScore> = counts
        .into_iter()
        .map(|(token, [c1, c2])| {
            let (y1, y2) = (c1 as f64, c2 as f64);
            let delta = num::ln((y1 + a) / (n1 + a0 - y1 - a)) - num::ln((y2 + a) / (n2 + a0 - y2 - a));
            let sigma = num::sqrt(1.0 / (y1 + a) + 1.0 / (y2 + a));
            TokenZScore {
                token,
                count_useful: c1,
                count_not_useful: c2,
                log_odds: delta,
                z: delta / sigma,
                top_class: None,
            }
        })
        .collect();
    tokens.sort_by(|x, y| y.z.total_cmp(&x.z).then_with(|| x.token.cmp(&y.token)));

    for t in tokens.iter_mut().filter(|t| t.z > 0.0).take(config.top_n) {
        t.top_class = Some(UtteranceClass::Useful);
    }
    for t in tokens.iter_mut().rev().filter(|t| t.z < 0.0).take(config.top_n) {
        t.top_class = Some(UtteranceClass::NotUseful);
    }
    Ok(FightingWords { tokens, dropped_empty })
}

/// [`fighting_words`] over labeled utterances.
pub fn fighting_words_labeled(
    utterances: &[LabeledUtterance],
    config: &FightingWordsConfig,
) -> Result<FightingWords, WordscoreError> {
    let of = |class| -> Vec<&str> {
        utterances
            .iter()
            .filter(|u| u.class == class)
            .map(|u| u.text.as_str())
            .collect()
    };
    fighting_words(&of(UtteranceClass::Useful), &of(UtteranceClass::NotUseful), config)
}

/// Scatter plot of z against combined frequency (log10 scale), with the
/// flagged tokens labeled.
pub fn render_scatter_svg(result: &FightingWords, title: &str) -> String {
    const W: f64 = 720.0;
    const H: f64 = 480.0;
    const LEFT: f64 = 60.0;
    const RIGHT: f64 = 140.0;
    const TOP: f64 = 40.0;
    const BOTTOM: f64 = 50.0;

    let freq = |t: &TokenZScore| libm::log10((t.count_useful + t.count_not_useful) as f64);
    let x_max = result.tokens.iter().map(freq).fold(1.0f64, f64::max);
    let z_abs = result.tokens.iter().map(|t| num::abs(t.z)).fold(1.0f64, f64::max);
    let plot_w = W - LEFT - RIGHT;
    let plot_h = H - TOP - BOTTOM;
    let x_of = |v: f64| LEFT + v / x_max * plot_w;
    let y_of = |z: f64| TOP + plot_h / 2.0 - z / z_abs * (plot_h / 2.0);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="10">"#,
        w = f2(W),
        h = f2(H)
    );
    s.push_str("<style>.useful{fill:#1b7837}.not_useful{fill:#c51b7d}.other{fill:#9e9e9e}.axis{stroke:#333;stroke-width:1}</style>\n");
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" font-size="13">{}</text>"#,
        f2(LEFT),
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<line class="axis" x1="{x0}" y1="{y}" x2="{x1}" y2="{y}"/>"#,
        x0 = f2(LEFT),
        x1 = f2(LEFT + plot_w),
        y = f2(y_of(0.0))
    );
    let _ = writeln!(
        s,
        r#"<line class="axis" x1="{x}" y1="{y0}" x2="{x}" y2="{y1}"/>"#,
        x = f2(LEFT),
        y0 = f2(TOP),
        y1 = f2(TOP + plot_h)
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}">frequency (log10)</text>"#,
        f2(LEFT + plot_w / 2.0 - 40.0),
        f2(H - 15.0)
    );
    let _ = writeln!(
        s,
        r#"<text x="15" y="{y}" transform="rotate(-90 15 {y})">z-score</text>"#,
        y = f2(TOP + plot_h / 2.0)
    );
    for (label, z) in [(f2(z_abs), z_abs), (f2(-z_abs), -z_abs)] {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            f2(LEFT - 4.0),
            f2(y_of(z) + 3.0),
            label
        );
    }
    for t in &result.tokens {
        let class = t.top_class.map_or("other", UtteranceClass::as_str);
        let (x, y) = (x_of(freq(t)), y_of(t.z));
        let _ = writeln!(
            s,
            r#"<circle class="{class}" cx="{}" cy="{}" r="2.5"><title>{} z={}</title></circle>"#,
            f2(x),
            f2(y),
            escape(&t.token),
            f2(t.z)
        );
        if t.top_class.is_some() {
            let _ = writeln!(
                s,
                r#"<text class="{class}" x="{}" y="{}">{}</text>"#,
                f2(x + 4.0),
                f2(y + 3.0),
                escape(&t.token)
            );
        }
    }
    s.push_str("</svg>\n");
    s
}
