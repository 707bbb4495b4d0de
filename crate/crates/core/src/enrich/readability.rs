//! Flesch Reading Ease.

use super::text::strip_code;

/// Flesch Reading Ease of the code-stripped text:
/// `206.835 - 1.015 * words/sentences - 84.6 * syllables/words`.
/// `None` when the text has no words.
pub fn readability(body: &str) -> Option<f64> {
    let text = strip_code(body);
    let stats = TextStats::of(&text);
    if stats.words == 0 {
        return None;
    }
    let words = stats.words as f64;
    let sentences = stats.sentences.max(1) as f64;
    let syllables = stats.syllables as f64;
    Some(206.835 - 1.015 * (words / sentences) - 84.6 * (syllables / words))
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct TextStats {
    pub words: usize,
    pub sentences: usize,
    pub syllables: usize,
}

impl TextStats {
    pub fn of(text: &str) -> Self {
        let mut stats = TextStats::default();
        let mut pending_sentence = false;
        for raw in text.split_whitespace() {
            let word: alloc::string::String = raw.chars().filter(|c| c.is_alphabetic()).collect();
            if !word.is_empty() {
                stats.words += 1;
                stats.syllables += syllables(&word);
                pending_sentence = true;
            }
            let ends_sentence = raw
                .trim_end_matches(['"', '\'', ')', ']', '*', '_'])
                .ends_with(['.', '!', '?']);
            if ends_sentence && pending_sentence {
                stats.sentences += 1;
                pending_sentence = false;
            }
        }
        if pending_sentence {
            stats.sentences += 1;
        }
        stats
    }
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y')
}

/// Heuristic English syllable count: vowel groups, minus a silent final
/// `e`, at least one.
pub fn syllables(word: &str) -> usize {
    let w = word.to_lowercase();
    let chars: alloc::vec::Vec<char> = w.chars().filter(|c| c.is_alphabetic()).collect();
    if chars.is_empty() {
        return 0;
    }
    let mut groups = 0;
    let mut prev_vowel = false;
    for &c in &chars {
        let v = is_vowel(c);
        if v && !prev_vowel {
            groups += 1;
        }
        prev_vowel = v;
    }
    let n = chars.len();
    if groups > 1 && chars[n - 1] == 'e' && !(n >= 3 && chars[n - 2] == 'l' && !is_vowel(chars[n - 3])) {
        groups -= 1;
    }
    groups.max(1)
}
