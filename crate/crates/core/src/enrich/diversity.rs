//! Shannon diversity over categorical counts.

use alloc::collections::BTreeMap;
use alloc::string::String;

use crate::num;

/// Category counts for a diversity computation. Zero counts are not stored.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DiversityInput {
    counts: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("diversity input has no categories")]
pub struct EmptyInput;

impl DiversityInput {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, category: impl Into<String>, count: u64) {
        if count > 0 {
            *self.counts.entry(category.into()).or_insert(0) += count;
        }
    }

    pub fn category_count(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn counts(&self) -> impl Iterator<Item = (&str, u64)> {
        self.counts.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

impl<S: Into<String>> FromIterator<S> for DiversityInput {
    /// One observation per item.
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        let mut input = DiversityInput::new();
        for s in iter {
            input.add(s, 1);
        }
        input
    }
}

/// `H' = -sum(p_i ln p_i)` with `p_i = count_i / total`.
///
/// Zero exactly when a single category is present; bounded above by
/// `ln R` for `R` categories.
pub fn shannon_index(input: &DiversityInput) -> Result<f64, EmptyInput> {
    if input.is_empty() {
        return Err(EmptyInput);
    }
    if input.category_count() == 1 {
        return Ok(0.0);
    }
    let total: u64 = input.counts.values().sum();
    let total = total as f64;
    let h = input
        .counts
        .values()
        .map(|&c| {
            let p = c as f64 / total;
            -p * num::ln(p)
        })
        .sum::<f64>();
    Ok(h.max(0.0))
}
