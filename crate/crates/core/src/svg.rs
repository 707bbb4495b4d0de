// Shared pieces of the hand-written SVG output.

use alloc::string::String;

/// Fixed two-decimal formatting without a negative zero, so output bytes
/// do not depend on the sign of a rounded-away value.
pub(crate) fn f2(x: f64) -> String {
    let s = alloc::format!("{x:.2}");
    if s == "-0.00" {
        String::from("0.00")
    } else {
        s
    }
}

pub(crate) fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            _ => out.push(c),
        }
    }
    out
}
