//! Nonparametric project comparison: Wilcoxon signed-rank, Holm step-down
//! adjustment, Cliff's delta, and the pairwise comparison matrix.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::component::Component;
use crate::metricize::MonthlyRow;
use crate::num;

/// Largest sample for which the exact null distribution is used.
pub const EXACT_MAX_N: usize = 25;

/// Fewest shared components two projects need for a comparison.
pub const MIN_SHARED_COMPONENTS: usize = 5;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("every paired difference is zero; the signed-rank test is undefined")]
    AllZeroDifferences,
    #[error("paired samples differ in length ({a} vs {b})")]
    LengthMismatch { a: usize, b: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("p-value {0} outside (0, 1]")]
    InvalidPValue(f64),
    #[error("need at least two projects, got {0}")]
    TooFewProjects(usize),
    #[error("{a} and {b} share only {shared} components (need {MIN_SHARED_COMPONENTS})")]
    InsufficientOverlap { a: String, b: String, shared: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PMethod {
    Exact,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wilcoxon {
    /// `min(w_plus, w_minus)`.
    pub w: f64,
    pub w_plus: f64,
    pub w_minus: f64,
    /// Number of nonzero differences.
    pub n: usize,
    /// Two-sided p-value.
    pub p: f64,
    pub method: PMethod,
}

/// Ranks of `values` (1-based), ties receiving the mean of their positions.
/// Returns the ranks and the sizes of tie groups with more than one member.
pub fn midranks(values: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        if j > i {
            ties.push(j - i + 1);
        }
        i = j + 1;
    }
    (ranks, ties)
}

/// Paired two-sided Wilcoxon signed-rank test on `a - b`.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<Wilcoxon, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch { a: a.len(), b: b.len() });
    }
    if a.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    wilcoxon_differences(&diffs)
}

/// Signed-rank test on precomputed differences. Zero differences are
/// dropped; the exact distribution is used for up to [`EXACT_MAX_N`]
/// tie-free differences, the tie- and continuity-corrected normal
/// approximation otherwise.
pub fn wilcoxon_differences(diffs: &[f64]) -> Result<Wilcoxon, StatsError> {
    let (w_plus, w_minus, n, ties) = signed_rank_sums(diffs)?;
    let w = w_plus.min(w_minus);
    let (p, method) = if n <= EXACT_MAX_N && ties.is_empty() {
        // w is an integer when there are no ties
        (wilcoxon_exact_p(n, w as u64), PMethod::Exact)
    } else {
        (normal_p(n, w, &ties), PMethod::Normal)
    };
    Ok(Wilcoxon {
        w,
        w_plus,
        w_minus,
        n,
        p,
        method,
    })
}

/// The normal-approximation p-value for the same differences, regardless
/// of sample size or ties.
pub fn wilcoxon_normal_p(diffs: &[f64]) -> Result<f64, StatsError> {
    let (w_plus, w_minus, n, ties) = signed_rank_sums(diffs)?;
    Ok(normal_p(n, w_plus.min(w_minus), &ties))
}

fn signed_rank_sums(diffs: &[f64]) -> Result<(f64, f64, usize, Vec<usize>), StatsError> {
    let nonzero: Vec<f64> = diffs.iter().copied().filter(|d| *d != 0.0).collect();
    if nonzero.is_empty() {
        return Err(StatsError::AllZeroDifferences);
    }
    let magnitudes: Vec<f64> = nonzero.iter().map(|d| num::abs(*d)).collect();
    let (ranks, ties) = midranks(&magnitudes);
    let mut w_plus = 0.0;
    let mut w_minus = 0.0;
    for (d, r) in nonzero.iter().zip(&ranks) {
        if *d > 0.0 {
            w_plus += r;
        } else {
            w_minus += r;
        }
    }
    Ok((w_plus, w_minus, nonzero.len(), ties))
}

fn normal_p(n: usize, w: f64, ties: &[usize]) -> f64 {
    let n = n as f64;
    let mean = n * (n + 1.0) / 4.0;
    let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / 48.0;
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term;
    let z = (num::abs(w - mean) - 0.5).max(0.0) / num::sqrt(var);
    (2.0 * num::normal_sf(z)).min(1.0)
}

/// Number of sign assignments of ranks `1..=n` for each positive-rank sum.
pub fn signed_rank_counts(n: usize) -> Vec<u64> {
    let max = n * (n + 1) / 2;
    let mut counts = vec![0u64; max + 1];
    counts[0] = 1;
    for r in 1..=n {
        for s in (r..=max).rev() {
            counts[s] += counts[s - r];
        }
    }
    counts
}

/// Exact two-sided p-value `min(1, 2 P(W+ <= w))` for `n` tie-free ranks.
pub fn wilcoxon_exact_p(n: usize, w: u64) -> f64 {
    let counts = signed_rank_counts(n);
    let upto = (w as usize).min(counts.len() - 1);
    let tail: u64 = counts[..=upto].iter().sum();
    let total = libm::ldexp(1.0, n as i32);
    (2.0 * tail as f64 / total).min(1.0)
}

/// Holm step-down adjustment, returned in input order.
pub fn holm_bonferroni(p_values: &[f64]) -> Result<Vec<f64>, StatsError> {
    if p_values.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    if let Some(&bad) = p_values.iter().find(|p| !(**p > 0.0 && **p <= 1.0)) {
        return Err(StatsError::InvalidPValue(bad));
    }
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| p_values[i].total_cmp(&p_values[j]).then(i.cmp(&j)));
    let mut adjusted = vec![0.0; m];
    let mut running = 0.0f64;
    for (rank, &i) in order.iter().enumerate() {
        running = running.max((m - rank) as f64 * p_values[i]).min(1.0);
        adjusted[i] = running;
    }
    Ok(adjusted)
}

/// `(#{a_i > b_j} - #{a_i < b_j}) / (|a| |b|)`.
pub fn cliffs_delta(a: &[f64], b: &[f64]) -> Result<f64, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    let mut balance = 0i64;
    for x in a {
        for y in b {
            if x > y {
                balance += 1;
            } else if x < y {
                balance -= 1;
            }
        }
    }
    Ok(balance as f64 / (a.len() * b.len()) as f64)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Stars {
    #[default]
    None,
    One,
    Two,
    Three,
}

impl Stars {
    /// Strict thresholds 0.05, 0.01, 0.001 on an adjusted p-value.
    pub fn from_p(p: Option<f64>) -> Self {
        match p {
            Some(p) if p < 0.001 => Stars::Three,
            Some(p) if p < 0.01 => Stars::Two,
            Some(p) if p < 0.05 => Stars::One,
            _ => Stars::None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Stars::None => "",
            Stars::One => "*",
            Stars::Two => "**",
            Stars::Three => "***",
        }
    }
}

impl fmt::Display for Stars {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Whole-history mean of every non-sentiment STG component for one project.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentMeanVector {
    pub repo_slug: String,
    /// Parallel to [`ComponentMeanVector::components`]; `None` when the
    /// component never had a value.
    pub means: Vec<Option<f64>>,
}

impl ComponentMeanVector {
    pub fn components() -> Vec<Component> {
        Component::stg_components().filter(|c| !c.is_sentiment()).collect()
    }

    pub fn from_rows(repo_slug: impl Into<String>, rows: &[MonthlyRow]) -> Self {
        let means = Self::components()
            .into_iter()
            .map(|c| {
                let present: Vec<f64> = rows.iter().filter_map(|r| r.get(c)).collect();
                num::mean(&present)
            })
            .collect();
        Self {
            repo_slug: repo_slug.into(),
            means,
        }
    }

    /// Values of the components both vectors have, in component order.
    pub fn shared_with(&self, other: &Self) -> (Vec<f64>, Vec<f64>) {
        self.means
            .iter()
            .zip(&other.means)
            .filter_map(|(a, b)| Some(((*a)?, (*b)?)))
            .unzip()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseComparison {
    pub repo_a: String,
    pub repo_b: String,
    pub cliffs_delta: f64,
    /// Absent when every shared component is identical.
    pub p_raw: Option<f64>,
    pub p_adjusted: Option<f64>,
    pub stars: Stars,
    pub shared_components: usize,
}

/// Every ordered pair of distinct projects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonMatrix {
    pub projects: Vec<String>,
    /// Row-major over `projects`, skipping the diagonal.
    pub pairs: Vec<PairwiseComparison>,
}

impl ComparisonMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<&PairwiseComparison> {
        self.pairs.iter().find(|p| p.repo_a == a && p.repo_b == b)
    }

    /// Square text table: row project against column project, cells as
    /// `delta` with stars (or `-` when not significant).
    pub fn render_table(&self) -> String {
        let mut cells: Vec<Vec<String>> = Vec::new();
        let mut header = vec![String::from("Project")];
        header.extend(self.projects.iter().cloned());
        cells.push(header);
        for a in &self.projects {
            let mut row = vec![a.clone()];
            for b in &self.projects {
                row.push(match self.get(a, b) {
                    None => String::new(),
                    Some(p) => {
                        let stars = if p.stars == Stars::None { "-" } else { p.stars.as_str() };
                        alloc::format!("{:.2}{}", p.cliffs_delta, stars)
                    }
                });
            }
            cells.push(row);
        }
        let cols = cells[0].len();
        let widths: Vec<usize> = (0..cols)
            .map(|c| cells.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for row in &cells {
            let mut line = String::new();
            for (c, cell) in row.iter().enumerate() {
                if c > 0 {
                    line.push_str("  ");
                }
                let _ = write!(line, "{cell:>width$}", width = widths[c]);
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
        out
    }
}

/// Paired Wilcoxon and Cliff's delta over component means for every pair of
/// projects, with Holm adjustment across all unordered pairs.
pub fn compare_projects(vectors: &[ComponentMeanVector]) -> Result<ComparisonMatrix, StatsError> {
    if vectors.len() < 2 {
        return Err(StatsError::TooFewProjects(vectors.len()));
    }
    struct Unordered {
        i: usize,
        j: usize,
        delta: f64,
        p: Option<f64>,
        shared: usize,
    }
    let mut unordered = Vec::new();
    for i in 0..vectors.len() {
        for j in i + 1..vectors.len() {
            let (a, b) = vectors[i].shared_with(&vectors[j]);
            if a.len() < MIN_SHARED_COMPONENTS {
                return Err(StatsError::InsufficientOverlap {
                    a: vectors[i].repo_slug.clone(),
                    b: vectors[j].repo_slug.clone(),
                    shared: a.len(),
                });
            }
            let p = match wilcoxon_signed_rank(&a, &b) {
                Ok(w) => Some(w.p),
                Err(StatsError::AllZeroDifferences) => None,
                Err(e) => return Err(e),
            };
            unordered.push(Unordered {
                i,
                j,
                delta: cliffs_delta(&a, &b)?,
                p,
                shared: a.len(),
            });
        }
    }

    let raw: Vec<f64> = unordered.iter().filter_map(|u| u.p).collect();
    let adjusted = if raw.is_empty() {
        Vec::new()
    } else {
        holm_bonferroni(&raw)?
    };
    let mut adjusted = adjusted.into_iter();
    let adjusted: Vec<Option<f64>> = unordered.iter().map(|u| u.p.and_then(|_| adjusted.next())).collect();

    let projects: Vec<String> = vectors.iter().map(|v| v.repo_slug.clone()).collect();
    let mut pairs = Vec::with_capacity(vectors.len() * (vectors.len() - 1));
    for a in 0..vectors.len() {
        for b in 0..vectors.len() {
            if a == b {
                continue;
            }
            let (k, flipped) = match unordered.iter().position(|u| (u.i, u.j) == (a, b)) {
                Some(k) => (k, false),
                None => (
                    unordered
                        .iter()
                        .position(|u| (u.i, u.j) == (b, a))
                        .expect("every pair computed"),
                    true,
                ),
            };
            let u = &unordered[k];
            pairs.push(PairwiseComparison {
                repo_a: projects[a].clone(),
                repo_b: projects[b].clone(),
                cliffs_delta: if flipped { -u.delta } else { u.delta },
                p_raw: u.p,
                p_adjusted: adjusted[k],
                stars: Stars::from_p(adjusted[k]),
                shared_components: u.shared,
            });
        }
    }
    Ok(ComparisonMatrix { projects, pairs })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples_are_undefined() {
        assert_eq!(
            wilcoxon_signed_rank(&[1.0, 2.0], &[1.0, 2.0]),
            Err(StatsError::AllZeroDifferences)
        );
    }

    #[test]
    fn five_positive_differences() {
        let w = wilcoxon_differences(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!(w.w_minus, 0.0);
        assert_eq!(w.w, 0.0);
        assert_eq!(w.method, PMethod::Exact);
        assert_eq!(w.p, 0.0625);
    }

    #[test]
    fn balanced_tie_gives_p_one() {
        let w = wilcoxon_differences(&[1.0, -1.0]).unwrap();
        assert_eq!((w.w_plus, w.w_minus), (1.5, 1.5));
        assert_eq!(w.p, 1.0);
    }

    #[test]
    fn zero_differences_are_dropped() {
        let w = wilcoxon_differences(&[0.0, 1.0, 2.0, 0.0]).unwrap();
        assert_eq!(w.n, 2);
        // both signs positive: P(W+ <= 0) = 1/4, doubled
        assert_eq!(w.p, 0.5);
    }

    #[test]
    fn counts_sum_to_two_to_the_n() {
        for n in 0..=25 {
            let total: u64 = signed_rank_counts(n).iter().sum();
            assert_eq!(total, 1u64 << n);
        }
    }

    #[test]
    fn midrank_ties() {
        let (ranks, ties) = midranks(&[3.0, 1.0, 3.0, 2.0]);
        assert_eq!(ranks, vec![3.5, 1.0, 3.5, 2.0]);
        assert_eq!(ties, vec![2]);
    }

    #[test]
    fn holm_examples() {
        assert_eq!(holm_bonferroni(&[0.03]).unwrap(), vec![0.03]);
        let adj = holm_bonferroni(&[0.01, 0.04, 0.03]).unwrap();
        let expected = [0.03, 0.06, 0.06];
        for (got, want) in adj.iter().zip(expected) {
            assert!((got - want).abs() < 1e-15, "{adj:?}");
        }
        assert_eq!(holm_bonferroni(&[0.5, 0.9]).unwrap(), vec![1.0, 1.0]);
        assert_eq!(holm_bonferroni(&[]), Err(StatsError::EmptyInput));
        assert_eq!(holm_bonferroni(&[0.0]), Err(StatsError::InvalidPValue(0.0)));
    }

    #[test]
    fn cliffs_examples() {
        assert_eq!(cliffs_delta(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(cliffs_delta(&[3.0, 4.0], &[1.0, 2.0]).unwrap(), 1.0);
        assert_eq!(cliffs_delta(&[1.0, 3.0], &[2.0]).unwrap(), 0.0);
        assert_eq!(cliffs_delta(&[], &[2.0]), Err(StatsError::EmptyInput));
    }

    #[test]
    fn stars_are_strict() {
        assert_eq!(Stars::from_p(Some(0.05)), Stars::None);
        assert_eq!(Stars::from_p(Some(0.0499)), Stars::One);
        assert_eq!(Stars::from_p(Some(0.01)), Stars::One);
        assert_eq!(Stars::from_p(Some(0.001)), Stars::Two);
        assert_eq!(Stars::from_p(Some(0.0009)), Stars::Three);
        assert_eq!(Stars::from_p(None), Stars::None);
    }

    fn vector(slug: &str, values: &[f64]) -> ComponentMeanVector {
        let n = ComponentMeanVector::components().len();
        let mut means = vec![None; n];
        for (m, v) in means.iter_mut().zip(values) {
            *m = Some(*v);
        }
        ComponentMeanVector {
            repo_slug: slug.into(),
            means,
        }
    }

    #[test]
    fn forty_four_components() {
        assert_eq!(ComponentMeanVector::components().len(), 44);
    }

    #[test]
    fn identical_projects_have_no_p() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let m = compare_projects(&[vector("a", &v), vector("b", &v)]).unwrap();
        let ab = m.get("a", "b").unwrap();
        assert_eq!(ab.cliffs_delta, 0.0);
        assert_eq!(ab.p_raw, None);
        assert_eq!(ab.stars, Stars::None);
    }

    #[test]
    fn matrix_is_antisymmetric() {
        let a = vector("a", &[1.0, 5.0, 3.0, 8.0, 2.0, 9.0]);
        let b = vector("b", &[2.0, 4.0, 1.0, 7.0, 3.0, 3.5]);
        let c = vector("c", &[0.5, 0.1, 0.2, 0.3, 0.4, 0.6]);
        let m = compare_projects(&[a, b, c]).unwrap();
        assert_eq!(m.pairs.len(), 6);
        for p in &m.pairs {
            let q = m.get(&p.repo_b, &p.repo_a).unwrap();
            assert_eq!(p.cliffs_delta, -q.cliffs_delta);
            assert_eq!(p.p_adjusted, q.p_adjusted);
        }
        let table = m.render_table();
        assert_eq!(table.lines().count(), 4);
    }

    #[test]
    fn too_little_overlap() {
        let a = vector("a", &[1.0, 2.0, 3.0, 4.0]);
        let b = vector("b", &[1.0, 2.0, 3.0, 5.0, 6.0]);
        assert!(matches!(
            compare_projects(&[a, b]),
            Err(StatsError::InsufficientOverlap { shared: 4, .. })
        ));
        assert_eq!(compare_projects(&[]), Err(StatsError::TooFewProjects(0)));
    }

    #[test]
    fn absent_components_dropped_pairwise() {
        let mut a = vector("a", &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let b = vector("b", &[2.0, 3.0, 4.0, 5.0, 6.0, 7.0]);
        a.means[0] = None;
        let (x, y) = a.shared_with(&b);
        assert_eq!(x, vec![2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(y, vec![3.0, 4.0, 5.0, 6.0, 7.0]);
    }
}
