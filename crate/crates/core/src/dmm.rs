//! Delta-maintainability scores from unified diffs.
//!
//! A diff is rebuilt into the new-side text of each hunk, function-like
//! units are located with a light lexical scan, and every unit that the
//! hunk touched contributes its churn to the low- or high-risk side of
//! three properties: unit size, cyclomatic complexity, and interfacing
//! (parameter count).

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

/// A function-like unit touched by a change.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangedUnit {
    pub file_path: String,
    pub unit_name: String,
    pub size_loc: u32,
    pub cyclomatic: u32,
    pub param_count: u32,
    pub churn: u32,
}

/// Inclusive upper bounds for a unit to count as low risk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RiskThresholds {
    pub max_size_loc: u32,
    pub max_cyclomatic: u32,
    pub max_params: u32,
}

impl Default for RiskThresholds {
    fn default() -> Self {
        Self {
            max_size_loc: 15,
            max_cyclomatic: 5,
            max_params: 2,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DmmScores {
    pub size: Option<f64>,
    pub complexity: Option<f64>,
    pub interfacing: Option<f64>,
}

/// Proportion of churn that landed in low-risk units, per property.
/// All three are absent when there are no units (or no churn).
pub fn dmm_scores(units: &[ChangedUnit], thresholds: &RiskThresholds) -> DmmScores {
    let total: u64 = units.iter().map(|u| u64::from(u.churn)).sum();
    if total == 0 {
        return DmmScores::default();
    }
    let share = |low_risk: &dyn Fn(&ChangedUnit) -> bool| {
        let low: u64 = units.iter().filter(|u| low_risk(u)).map(|u| u64::from(u.churn)).sum();
        Some(low as f64 / total as f64)
    };
    DmmScores {
        size: share(&|u| u.size_loc <= thresholds.max_size_loc),
        complexity: share(&|u| u.cyclomatic <= thresholds.max_cyclomatic),
        interfacing: share(&|u| u.param_count <= thresholds.max_params),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Language {
    CLike,
    Python,
    /// `fixed` is true for fixed-form sources, where a `c`, `C`, `*` or `!`
    /// in column one starts a comment line.
    Fortran {
        fixed: bool,
    },
}

impl Language {
    pub fn from_path(path: &str) -> Option<Self> {
        let file = path.rsplit('/').next().unwrap_or(path);
        let ext = file.rsplit_once('.')?.1.to_ascii_lowercase();
        Some(match ext.as_str() {
            "c" | "h" | "cc" | "cpp" | "cxx" | "c++" | "hh" | "hpp" | "hxx" | "h++" | "ipp" | "tpp" | "cu" | "cuh"
            | "java" | "js" | "mjs" | "ts" | "go" | "rs" | "cs" | "m" | "mm" | "swift" | "kt" | "scala" | "php" => {
                Language::CLike
            }
            "py" | "pyx" | "pyi" => Language::Python,
            "f90" | "f95" | "f03" | "f08" | "f18" => Language::Fortran { fixed: false },
            "f" | "for" | "f77" | "ftn" => Language::Fortran { fixed: true },
            _ => return None,
        })
    }
}

/// Changed units of one file's diff. Files in unsupported languages (and
/// diffs without hunks) yield nothing.
pub fn extract_units(diff_text: &str, file_path: &str) -> Vec<ChangedUnit> {
    let Some(lang) = Language::from_path(file_path) else {
        return Vec::new();
    };
    let mut units = Vec::new();
    for hunk in parse_hunks(diff_text) {
        let source = Source::new(&hunk.lines, lang);
        for span in source.units(lang) {
            let churn: u32 = (span.first..=span.last)
                .map(|i| u32::from(hunk.added[i]) + hunk.deleted[i])
                .sum();
            if churn == 0 {
                continue;
            }
            units.push(ChangedUnit {
                file_path: file_path.into(),
                unit_name: span.name,
                size_loc: source.code_lines(span.first, span.last),
                cyclomatic: 1 + source.branches(span.first, span.last, lang),
                param_count: span.params,
                churn,
            });
        }
    }
    units
}

/// New side of a hunk, with per-line change markers. Deleted lines are
/// attached to the new-side line that follows them (or the last line when
/// they close the hunk).
#[derive(Debug, Default)]
struct Hunk {
    lines: Vec<String>,
    added: Vec<bool>,
    deleted: Vec<u32>,
}

fn hunk_counts(header: &str) -> Option<(u32, u32)> {
    let body = header.strip_prefix("@@ ")?;
    let body = &body[..body.find(" @@")?];
    let mut parts = body.split_whitespace();
    let count = |range: &str| -> Option<u32> {
        match range.split_once(',') {
            Some((_, n)) => n.parse().ok(),
            None => Some(1),
        }
    };
    let old = count(parts.next()?.strip_prefix('-')?)?;
    let new = count(parts.next()?.strip_prefix('+')?)?;
    Some((old, new))
}

fn parse_hunks(diff: &str) -> Vec<Hunk> {
    let mut hunks = Vec::new();
    let mut lines = diff.lines();
    while let Some(line) = lines.next() {
        let Some((mut old_left, mut new_left)) = hunk_counts(line) else {
            continue;
        };
        let mut hunk = Hunk::default();
        let mut pending = 0u32;
        while old_left > 0 || new_left > 0 {
            let Some(line) = lines.next() else { break };
            let (tag, text) = match line.chars().next() {
                Some(c @ ('+' | '-' | ' ')) => (c, &line[1..]),
                Some('\\') => continue,
                // some tools strip the lone space of an empty context line
                None => (' ', ""),
                Some(_) => break,
            };
            match tag {
                '-' => {
                    pending += 1;
                    old_left = old_left.saturating_sub(1);
                }
                _ => {
                    hunk.lines.push(text.into());
                    hunk.added.push(tag == '+');
                    hunk.deleted.push(core::mem::take(&mut pending));
                    new_left = new_left.saturating_sub(1);
                    if tag == ' ' {
                        old_left = old_left.saturating_sub(1);
                    }
                }
            }
        }
        if pending > 0 {
            if let Some(last) = hunk.deleted.last_mut() {
                *last += pending;
            }
        }
        if !hunk.lines.is_empty() {
            hunks.push(hunk);
        }
    }
    hunks
}

#[derive(Debug)]
struct Span {
    name: String,
    first: usize,
    last: usize,
    params: u32,
}

/// Hunk text with comments blanked and string contents replaced by spaces
/// (delimiters kept), so line structure and positions survive.
struct Source {
    chars: Vec<char>,
    line_start: Vec<usize>,
}

impl Source {
    fn new(lines: &[String], lang: Language) -> Self {
        let mut chars = Vec::new();
        let mut line_start = Vec::with_capacity(lines.len());
        for line in lines {
            line_start.push(chars.len());
            chars.extend(line.chars());
            chars.push('\n');
        }
        match lang {
            Language::CLike => mask_c(&mut chars),
            Language::Python => mask_python(&mut chars),
            Language::Fortran { fixed } => mask_fortran(&mut chars, &line_start, fixed),
        }
        Self { chars, line_start }
    }

    fn line_count(&self) -> usize {
        self.line_start.len()
    }

    fn line(&self, i: usize) -> &[char] {
        let end = self.line_start.get(i + 1).map_or(self.chars.len(), |&s| s - 1);
        &self.chars[self.line_start[i]..end]
    }

    fn line_of(&self, pos: usize) -> usize {
        self.line_start.partition_point(|&s| s <= pos).saturating_sub(1)
    }

    fn range(&self, first: usize, last: usize) -> &[char] {
        let end = self.line_start.get(last + 1).copied().unwrap_or(self.chars.len());
        &self.chars[self.line_start[first]..end]
    }

    fn code_lines(&self, first: usize, last: usize) -> u32 {
        (first..=last)
            .filter(|&i| self.line(i).iter().any(|c| !c.is_whitespace()))
            .count() as u32
    }

    fn branches(&self, first: usize, last: usize, lang: Language) -> u32 {
        let text = self.range(first, last);
        let words = words(text);
        let mut n = 0u32;
        match lang {
            Language::CLike => {
                n += words
                    .iter()
                    .filter(|w| matches!(w.as_str(), "if" | "for" | "while" | "case" | "catch"))
                    .count() as u32;
                n += operators(text, &["&&", "||"]);
            }
            Language::Python => {
                n += words
                    .iter()
                    .filter(|w| matches!(w.as_str(), "if" | "elif" | "for" | "while" | "except" | "and" | "or"))
                    .count() as u32;
            }
            Language::Fortran { .. } => {
                let lower: Vec<String> = words.iter().map(|w| w.to_ascii_lowercase()).collect();
                for (i, w) in lower.iter().enumerate() {
                    let prev = if i > 0 { lower[i - 1].as_str() } else { "" };
                    let counted = match w.as_str() {
                        "if" | "do" => prev != "end",
                        "elseif" => true,
                        "case" => prev != "select",
                        _ => false,
                    };
                    n += u32::from(counted);
                }
                let lowered: Vec<char> = text.iter().map(|c| c.to_ascii_lowercase()).collect();
                n += operators(&lowered, &[".and.", ".or."]);
            }
        }
        n
    }

    fn units(&self, lang: Language) -> Vec<Span> {
        match lang {
            Language::CLike => self.c_units(),
            Language::Python => self.python_units(),
            Language::Fortran { .. } => self.fortran_units(),
        }
    }

    fn c_units(&self) -> Vec<Span> {
        let chars = &self.chars;
        let mut out = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            if chars[i] == '{' {
                if let Some((start, name, params)) = c_signature(chars, i) {
                    let close = matching(chars, i, '{', '}').unwrap_or(chars.len() - 1);
                    out.push(Span {
                        name,
                        first: self.line_of(start),
                        last: self.line_of(close),
                        params: count_params(&params, true),
                    });
                    i = close + 1;
                    continue;
                }
            }
            i += 1;
        }
        out
    }

    fn python_units(&self) -> Vec<Span> {
        let mut out = Vec::new();
        for li in 0..self.line_count() {
            let line = self.line(li);
            let indent = line.iter().take_while(|c| c.is_whitespace()).count();
            let rest: String = line[indent..].iter().collect();
            let rest = rest.strip_prefix("async ").map_or(rest.as_str(), str::trim_start);
            let Some(after_def) = rest.strip_prefix("def ") else {
                continue;
            };
            let name: String = after_def
                .trim_start()
                .chars()
                .take_while(|c| c.is_alphanumeric() || *c == '_')
                .collect();
            if name.is_empty() {
                continue;
            }
            let line_pos = self.line_start[li];
            let Some(open) = (line_pos..self.chars.len()).find(|&p| self.chars[p] == '(') else {
                continue;
            };
            let close = matching(&self.chars, open, '(', ')').unwrap_or(self.chars.len() - 1);
            let params: String = self.chars[open + 1..close].iter().collect();
            let header_end = self.line_of(close);
            let mut last = header_end;
            for body in header_end + 1..self.line_count() {
                let text = self.line(body);
                let Some(ind) = text.iter().position(|c| !c.is_whitespace()) else {
                    continue;
                };
                if ind <= indent {
                    break;
                }
                last = body;
            }
            out.push(Span {
                name,
                first: li,
                last,
                params: count_params(&params, false),
            });
        }
        out
    }

    fn fortran_units(&self) -> Vec<Span> {
        let lines: Vec<Vec<String>> = (0..self.line_count())
            .map(|i| {
                words(self.line(i))
                    .into_iter()
                    .map(|w| w.to_ascii_lowercase())
                    .collect()
            })
            .collect();
        let mut out = Vec::new();
        for (li, tokens) in lines.iter().enumerate() {
            let Some(name) = fortran_start(tokens) else { continue };
            let mut depth = 0usize;
            let mut last = self.line_count() - 1;
            for (j, t) in lines.iter().enumerate().skip(li + 1) {
                if fortran_start(t).is_some() {
                    depth += 1;
                } else if fortran_end(t) {
                    if depth == 0 {
                        last = j;
                        break;
                    }
                    depth -= 1;
                }
            }
            let params = self.fortran_params(li, &name);
            out.push(Span {
                name,
                first: li,
                last,
                params,
            });
        }
        out
    }

    fn fortran_params(&self, li: usize, name: &str) -> u32 {
        let line: String = self.line(li).iter().collect::<String>().to_ascii_lowercase();
        let Some(at) = find_word(&line, name) else { return 0 };
        let after = line[at + name.len()..].trim_start();
        if !after.starts_with('(') {
            return 0;
        }
        let offset = line.len() - after.len();
        let open = self.line_start[li] + line[..offset].chars().count();
        match matching(&self.chars, open, '(', ')') {
            Some(close) => count_params(&self.chars[open + 1..close].iter().collect::<String>(), false),
            None => 0,
        }
    }
}

const FORTRAN_PREFIXES: &[&str] = &[
    "pure",
    "impure",
    "elemental",
    "recursive",
    "module",
    "integer",
    "real",
    "logical",
    "character",
    "complex",
    "double",
    "precision",
    "type",
    "class",
    "kind",
    "len",
];

fn fortran_start(tokens: &[String]) -> Option<String> {
    let pos = tokens.iter().position(|t| t == "subroutine" || t == "function")?;
    let prefix_ok = tokens[..pos]
        .iter()
        .all(|t| FORTRAN_PREFIXES.contains(&t.as_str()) || t.bytes().all(|b| b.is_ascii_digit()));
    if !prefix_ok {
        return None;
    }
    tokens.get(pos + 1).cloned()
}

fn fortran_end(tokens: &[String]) -> bool {
    match tokens {
        [only] => only == "end" || only == "endsubroutine" || only == "endfunction",
        [first, second, ..] => {
            (first == "end" && (second == "subroutine" || second == "function"))
                || first == "endsubroutine"
                || first == "endfunction"
        }
        [] => false,
    }
}

fn find_word(line: &str, word: &str) -> Option<usize> {
    let bytes = line.as_bytes();
    let is_ident = |b: u8| b.is_ascii_alphanumeric() || b == b'_';
    let mut from = 0;
    while let Some(rel) = line[from..].find(word) {
        let at = from + rel;
        let end = at + word.len();
        let before_ok = at == 0 || !is_ident(bytes[at - 1]);
        let after_ok = end >= bytes.len() || !is_ident(bytes[end]);
        if before_ok && after_ok {
            return Some(at);
        }
        from = at + 1;
    }
    None
}

fn words(text: &[char]) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for &c in text {
        if c.is_alphanumeric() || c == '_' {
            cur.push(c);
        } else if !cur.is_empty() {
            out.push(core::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn operators(text: &[char], ops: &[&str]) -> u32 {
    let mut n = 0;
    let mut i = 0;
    'scan: while i < text.len() {
        for op in ops {
            let len = op.chars().count();
            if i + len <= text.len() && text[i..i + len].iter().copied().eq(op.chars()) {
                n += 1;
                i += len;
                continue 'scan;
            }
        }
        i += 1;
    }
    n
}

/// Index of the bracket closing the one at `open`.
fn matching(chars: &[char], open: usize, lo: char, hi: char) -> Option<usize> {
    let mut depth = 0usize;
    for (i, &c) in chars.iter().enumerate().skip(open) {
        if c == lo {
            depth += 1;
        } else if c == hi {
            depth -= 1;
            if depth == 0 {
                return Some(i);
            }
        }
    }
    None
}

/// Backward counterpart of [`matching`].
fn matching_back(chars: &[char], close: usize, lo: char, hi: char) -> Option<usize> {
    let mut depth = 0usize;
    for i in (0..=close).rev() {
        if chars[i] == hi {
            depth += 1;
        } else if chars[i] == lo {
            depth -= 1;
            if depth == 0 {
                return Some(i);
            }
        }
    }
    None
}

const CONTROL: &[&str] = &[
    "if",
    "else",
    "for",
    "while",
    "do",
    "switch",
    "case",
    "catch",
    "try",
    "return",
    "match",
    "loop",
    "throw",
    "sizeof",
    "constexpr",
    "elif",
];

/// If the `{` at `brace` opens a function body, return the signature's start
/// offset, the unit name, and the raw parameter text.
fn c_signature(chars: &[char], brace: usize) -> Option<(usize, String, String)> {
    let mut s = brace;
    while s > 0 && !matches!(chars[s - 1], ';' | '{' | '}') {
        s -= 1;
    }
    let start = (s..brace).find(|&p| !chars[p].is_whitespace())?;
    if chars[start] == '#' {
        return None;
    }
    let first_word: String = chars[start..brace]
        .iter()
        .take_while(|c| c.is_alphanumeric() || **c == '_')
        .collect();
    if CONTROL.contains(&first_word.as_str()) {
        return None;
    }
    let mut j = start;
    while j < brace {
        match chars[j] {
            '(' => {
                let close = matching(chars, j, '(', ')')?;
                if close >= brace {
                    return None;
                }
                let name = ident_before(chars, start, j)?;
                if name == "func" {
                    j = close + 1;
                    continue;
                }
                if CONTROL.contains(&name.as_str()) {
                    return None;
                }
                let params = chars[j + 1..close].iter().collect();
                return Some((start, name, params));
            }
            // brackets, as in attributes or array declarators, are skipped whole
            '[' => j = matching(chars, j, '[', ']')? + 1,
            _ => j += 1,
        }
    }
    None
}

fn ident_before(chars: &[char], lo: usize, paren: usize) -> Option<String> {
    let mut k = paren;
    while k > lo && chars[k - 1].is_whitespace() {
        k -= 1;
    }
    if k > lo && chars[k - 1] == '>' {
        k = matching_back(chars, k - 1, '<', '>')?;
        while k > lo && chars[k - 1].is_whitespace() {
            k -= 1;
        }
    }
    let end = k;
    while k > lo && (chars[k - 1].is_alphanumeric() || matches!(chars[k - 1], '_' | ':' | '~' | '$')) {
        k -= 1;
    }
    let name: String = chars[k..end].iter().collect();
    let name = name.trim_start_matches(':');
    if name.is_empty() || name.starts_with(|c: char| c.is_ascii_digit()) {
        return None;
    }
    Some(name.into())
}

/// Top-level comma-separated entries of a parameter list. An empty list or
/// a lone `void` has none.
fn count_params(params: &str, angle_brackets: bool) -> u32 {
    let trimmed = params.trim();
    if trimmed.is_empty() || trimmed == "void" {
        return 0;
    }
    let mut depth = 0i32;
    let mut pieces = Vec::new();
    let mut cur = String::new();
    for c in trimmed.chars() {
        match c {
            '(' | '[' | '{' => depth += 1,
            ')' | ']' | '}' => depth -= 1,
            '<' if angle_brackets => depth += 1,
            '>' if angle_brackets && depth > 0 => depth -= 1,
            ',' if depth == 0 => {
                pieces.push(core::mem::take(&mut cur));
                continue;
            }
            _ => {}
        }
        cur.push(c);
    }
    pieces.push(cur);
    // bare `*` and `/` are Python keyword/positional markers, not parameters
    pieces
        .iter()
        .map(|p| p.trim())
        .filter(|p| !p.is_empty() && *p != "*" && *p != "/")
        .count() as u32
}

fn blank(chars: &mut [char], from: usize, to: usize) {
    for c in &mut chars[from..to] {
        if *c != '\n' {
            *c = ' ';
        }
    }
}

/// Index just past a quoted literal starting at `open` (the quote itself).
fn skip_quoted(chars: &[char], open: usize, quote: char, escapes: bool) -> usize {
    let mut i = open + 1;
    while i < chars.len() {
        match chars[i] {
            '\\' if escapes => i += 2,
            c if c == quote => return i + 1,
            '\n' => return i,
            _ => i += 1,
        }
    }
    chars.len()
}

fn mask_c(chars: &mut [char]) {
    let mut i = 0;
    while i < chars.len() {
        match chars[i] {
            '/' if chars.get(i + 1) == Some(&'/') => {
                let end = (i..chars.len()).find(|&p| chars[p] == '\n').unwrap_or(chars.len());
                blank(chars, i, end);
                i = end;
            }
            '/' if chars.get(i + 1) == Some(&'*') => {
                let end = (i + 2..chars.len().saturating_sub(1))
                    .find(|&p| chars[p] == '*' && chars[p + 1] == '/')
                    .map_or(chars.len(), |p| p + 2);
                blank(chars, i, end);
                i = end;
            }
            '"' => {
                let end = skip_quoted(chars, i, '"', true);
                blank(chars, i + 1, end.saturating_sub(1).max(i + 1));
                i = end;
            }
            // a character literal, as opposed to a lifetime or digit separator
            '\'' if chars.get(i + 1) == Some(&'\\') || chars.get(i + 2) == Some(&'\'') => {
                let end = skip_quoted(chars, i, '\'', true);
                blank(chars, i + 1, end.saturating_sub(1).max(i + 1));
                i = end;
            }
            _ => i += 1,
        }
    }
}

fn mask_python(chars: &mut [char]) {
    let mut i = 0;
    while i < chars.len() {
        match chars[i] {
            '#' => {
                let end = (i..chars.len()).find(|&p| chars[p] == '\n').unwrap_or(chars.len());
                blank(chars, i, end);
                i = end;
            }
            q @ ('"' | '\'') => {
                let triple = chars.get(i + 1) == Some(&q) && chars.get(i + 2) == Some(&q);
                if triple {
                    let mut j = i + 3;
                    let end = loop {
                        if j + 2 >= chars.len() {
                            break chars.len();
                        }
                        if chars[j] == '\\' {
                            j += 2;
                            continue;
                        }
                        if chars[j] == q && chars[j + 1] == q && chars[j + 2] == q {
                            break j + 3;
                        }
                        j += 1;
                    };
                    blank(chars, i + 3, end.saturating_sub(3).max(i + 3));
                    i = end;
                } else {
                    let end = skip_quoted(chars, i, q, true);
                    blank(chars, i + 1, end.saturating_sub(1).max(i + 1));
                    i = end;
                }
            }
            _ => i += 1,
        }
    }
}

fn mask_fortran(chars: &mut [char], line_start: &[usize], fixed: bool) {
    if fixed {
        for &s in line_start {
            if matches!(chars.get(s), Some('c' | 'C' | '*' | '!')) {
                let end = (s..chars.len()).find(|&p| chars[p] == '\n').unwrap_or(chars.len());
                blank(chars, s, end);
            }
        }
    }
    let mut i = 0;
    while i < chars.len() {
        match chars[i] {
            '!' => {
                let end = (i..chars.len()).find(|&p| chars[p] == '\n').unwrap_or(chars.len());
                blank(chars, i, end);
                i = end;
            }
            q @ ('"' | '\'') => {
                let end = skip_quoted(chars, i, q, false);
                blank(chars, i + 1, end.saturating_sub(1).max(i + 1));
                i = end;
            }
            _ => i += 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::vec;

    fn added_file(path: &str, body: &str) -> String {
        let n = body.lines().count();
        let mut diff = format!("diff --git a/{path} b/{path}\n--- /dev/null\n+++ b/{path}\n@@ -0,0 +1,{n} @@\n");
        for line in body.lines() {
            diff.push('+');
            diff.push_str(line);
            diff.push('\n');
        }
        diff
    }

    const TEN_LINE_C: &str = "int clamp(int x)\n{\n    int lo = 0;\n    int hi = 10;\n    if (x < lo) {\n        x = lo;\n    }\n    int y = x;\n    return y;\n}\n";

    #[test]
    fn ten_line_function_with_one_if() {
        let units = extract_units(&added_file("src/clamp.c", TEN_LINE_C), "src/clamp.c");
        assert_eq!(units.len(), 1);
        let u = &units[0];
        assert_eq!(u.unit_name, "clamp");
        assert_eq!(u.size_loc, 10);
        assert_eq!(u.cyclomatic, 2);
        assert_eq!(u.param_count, 1);
        assert_eq!(u.churn, 10);
    }

    #[test]
    fn readme_has_no_units() {
        assert!(extract_units(
            &added_file("README.md", "# Title\n\nint f() { return 1; }\n"),
            "README.md"
        )
        .is_empty());
    }

    #[test]
    fn three_parameters() {
        let src = "double mix(double a, double b, double t) {\n    return a + (b - a) * t;\n}\n";
        let units = extract_units(&added_file("mix.cpp", src), "mix.cpp");
        assert_eq!(units.len(), 1);
        assert_eq!(units[0].param_count, 3);
        assert_eq!(units[0].cyclomatic, 1);
    }

    #[test]
    fn void_and_template_parameters() {
        let src = "int f(void) {\n  return 0;\n}\nint g(std::map<int, int> m, int k) {\n  return m[k];\n}\n";
        let units = extract_units(&added_file("a.cc", src), "a.cc");
        let params: Vec<_> = units.iter().map(|u| (u.unit_name.as_str(), u.param_count)).collect();
        assert_eq!(params, vec![("f", 0), ("g", 2)]);
    }

    #[test]
    fn control_blocks_and_lambdas_are_not_units() {
        let src = "void run() {\n  auto f = [](int x) { return x; };\n  if (a && b || c) { go(); }\n  while (x) { step(); }\n}\n";
        let units = extract_units(&added_file("r.cpp", src), "r.cpp");
        assert_eq!(units.len(), 1);
        assert_eq!(units[0].unit_name, "run");
        // if, while, &&, ||
        assert_eq!(units[0].cyclomatic, 5);
    }

    #[test]
    fn strings_and_comments_do_not_count_as_branches() {
        let src =
            "int f() {\n  // if for while\n  const char *s = \"if (x) { while }\";\n  /* case && */\n  return 0;\n}\n";
        let units = extract_units(&added_file("s.c", src), "s.c");
        assert_eq!(units.len(), 1);
        assert_eq!(units[0].cyclomatic, 1);
        // the comment-only lines are not code
        assert_eq!(units[0].size_loc, 4);
    }

    #[test]
    fn rust_functions_with_return_types() {
        let src = "fn parse(s: &str) -> Result<u32, Error> {\n    if s.is_empty() {\n        return Err(Error);\n    }\n    s.parse()\n}\n";
        let units = extract_units(&added_file("lib.rs", src), "lib.rs");
        assert_eq!(units.len(), 1);
        assert_eq!(units[0].unit_name, "parse");
        assert_eq!(units[0].param_count, 1);
        assert_eq!(units[0].cyclomatic, 2);
    }

    #[test]
    fn python_def_with_indented_body() {
        let src = "import os\n\ndef walk(root, depth, *, follow=False):\n    \"\"\"Walk.\n\n    if this were code\n    \"\"\"\n    for d in os.listdir(root):\n        if d and depth:\n            yield d\n\nx = 1\n";
        let units = extract_units(&added_file("w.py", src), "w.py");
        assert_eq!(units.len(), 1);
        let u = &units[0];
        assert_eq!(u.unit_name, "walk");
        assert_eq!(u.param_count, 3);
        // for, if, and
        assert_eq!(u.cyclomatic, 4);
        // def, the two docstring delimiters, and three body lines
        assert_eq!(u.size_loc, 6);
    }

    #[test]
    fn fortran_subroutine() {
        let src = "subroutine axpy(n, a, x, y)\n  integer :: n, i\n  real :: a, x(n), y(n)\n  do i = 1, n\n    if (a > 0 .and. x(i) > 0) then\n      y(i) = y(i) + a * x(i)\n    end if\n  end do\nend subroutine axpy\n";
        let units = extract_units(&added_file("blas.f90", src), "blas.f90");
        assert_eq!(units.len(), 1);
        let u = &units[0];
        assert_eq!(u.unit_name, "axpy");
        assert_eq!(u.param_count, 4);
        // do, if, .and.
        assert_eq!(u.cyclomatic, 4);
        assert_eq!(u.size_loc, 9);
    }

    #[test]
    fn churn_counts_only_touched_lines() {
        let diff =
            "@@ -1,6 +1,6 @@\n int a(int x) {\n-  return x;\n+  return x + 1;\n }\n int b(int y) {\n   return y;\n }\n";
        let units = extract_units(diff, "m.c");
        assert_eq!(units.len(), 1, "{units:?}");
        assert_eq!(units[0].unit_name, "a");
        // one added line plus the deleted line attached to it
        assert_eq!(units[0].churn, 2);
    }

    fn unit(size: u32, cc: u32, params: u32, churn: u32) -> ChangedUnit {
        ChangedUnit {
            file_path: "f.c".into(),
            unit_name: "u".into(),
            size_loc: size,
            cyclomatic: cc,
            param_count: params,
            churn,
        }
    }

    #[test]
    fn all_low_risk_scores_one() {
        let s = dmm_scores(&[unit(5, 1, 0, 3), unit(15, 5, 2, 7)], &RiskThresholds::default());
        assert_eq!(
            s,
            DmmScores {
                size: Some(1.0),
                complexity: Some(1.0),
                interfacing: Some(1.0)
            }
        );
    }

    #[test]
    fn half_the_churn_is_high_risk_on_size() {
        let s = dmm_scores(&[unit(10, 1, 0, 10), unit(40, 1, 0, 10)], &RiskThresholds::default());
        assert_eq!(s.size, Some(0.5));
        assert_eq!(s.complexity, Some(1.0));
    }

    #[test]
    fn no_units_means_absent() {
        assert_eq!(dmm_scores(&[], &RiskThresholds::default()), DmmScores::default());
    }
}
