//! Offline lookup tables: first name to gender category, location phrase
//! to country, and generic mail providers.
//!
//! Tables are plain TSV text. Lines starting with `#` are comments; a
//! `# version: N` comment sets the table version.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};

const BUNDLED_GENDER: &str = include_str!("../../resources/gender.tsv");
const BUNDLED_COUNTRY: &str = include_str!("../../resources/country.tsv");
const BUNDLED_GENERIC_MAIL: &str = include_str!("../../resources/generic_mail.txt");

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TableError {
    #[error("line {line}: expected two tab-separated fields")]
    Fields { line: usize },
    #[error("name {name:?}: unknown gender category {value:?}")]
    Category { name: String, value: String },
}

/// Gender guess categories, following the usual name-guesser taxonomy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum GenderCategory {
    Female,
    Male,
    MostlyFemale,
    MostlyMale,
    Androgynous,
    Unknown,
}

/// The side a category counts toward in a gender ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenderSide {
    Female,
    Male,
    Unknown,
}

impl GenderCategory {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "female" => GenderCategory::Female,
            "male" => GenderCategory::Male,
            "mostly_female" => GenderCategory::MostlyFemale,
            "mostly_male" => GenderCategory::MostlyMale,
            "andy" | "androgynous" => GenderCategory::Androgynous,
            "unknown" => GenderCategory::Unknown,
            _ => return None,
        })
    }

    /// "mostly" categories count toward their majority side; androgynous
    /// counts as unknown.
    pub fn side(self) -> GenderSide {
        match self {
            GenderCategory::Female | GenderCategory::MostlyFemale => GenderSide::Female,
            GenderCategory::Male | GenderCategory::MostlyMale => GenderSide::Male,
            GenderCategory::Androgynous | GenderCategory::Unknown => GenderSide::Unknown,
        }
    }
}

fn version_of(line: &str) -> Option<u32> {
    line.trim_start_matches('#')
        .trim()
        .strip_prefix("version:")
        .and_then(|v| v.trim().parse().ok())
}

fn parse_pairs(text: &str) -> Result<(u32, BTreeMap<String, String>), TableError> {
    let mut version = 0;
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        if line.starts_with('#') {
            if let Some(v) = version_of(line) {
                version = v;
            }
            continue;
        }
        let (key, value) = line.split_once('\t').ok_or(TableError::Fields { line: i + 1 })?;
        map.insert(key.trim().to_lowercase(), value.trim().to_string());
    }
    Ok((version, map))
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GenderTable {
    pub version: u32,
    names: BTreeMap<String, GenderCategory>,
}

impl GenderTable {
    pub fn parse(text: &str) -> Result<Self, TableError> {
        let (version, pairs) = parse_pairs(text)?;
        let mut names = BTreeMap::new();
        for (name, cat) in pairs {
            let Some(category) = GenderCategory::parse(&cat.to_lowercase()) else {
                return Err(TableError::Category { name, value: cat });
            };
            names.insert(name, category);
        }
        Ok(Self { version, names })
    }

    pub fn bundled() -> Self {
        Self::parse(BUNDLED_GENDER).expect("bundled gender table parses")
    }

    pub fn insert(&mut self, name: &str, category: GenderCategory) {
        self.names.insert(name.to_lowercase(), category);
    }

    /// Category of a display name, keyed by its first word. Unknown names
    /// map to [`GenderCategory::Unknown`].
    pub fn lookup(&self, display_name: &str) -> GenderCategory {
        display_name
            .split_whitespace()
            .next()
            .map(|first| first.trim_matches(|c: char| !c.is_alphabetic()).to_lowercase())
            .and_then(|first| self.names.get(&first).copied())
            .unwrap_or(GenderCategory::Unknown)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CountryTable {
    pub version: u32,
    phrases: BTreeMap<String, String>,
}

impl CountryTable {
    pub fn parse(text: &str) -> Result<Self, TableError> {
        let (version, phrases) = parse_pairs(text)?;
        Ok(Self { version, phrases })
    }

    pub fn bundled() -> Self {
        Self::parse(BUNDLED_COUNTRY).expect("bundled country table parses")
    }

    pub fn insert(&mut self, phrase: &str, country: &str) {
        self.phrases.insert(phrase.to_lowercase(), country.into());
    }

    /// Resolve free-text profile location to a country name: the whole
    /// phrase first, then each comma/slash-separated part from last to
    /// first. `None` when nothing matches.
    pub fn resolve(&self, location: &str) -> Option<&str> {
        let lowered = location.trim().to_lowercase();
        if lowered.is_empty() {
            return None;
        }
        if let Some(c) = self.phrases.get(&lowered) {
            return Some(c);
        }
        lowered
            .rsplit([',', '/', '|', ';', '·'])
            .map(|part| part.trim().trim_matches(|c: char| matches!(c, '.' | '(' | ')')))
            .filter(|part| !part.is_empty())
            .find_map(|part| self.phrases.get(part))
            .map(String::as_str)
    }
}

/// Mail domains that say nothing about organizational affiliation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GenericMailProviders {
    domains: BTreeSet<String>,
}

pub const UNAFFILIATED: &str = "unaffiliated";

impl GenericMailProviders {
    pub fn parse(text: &str) -> Self {
        let domains = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_lowercase)
            .collect();
        Self { domains }
    }

    pub fn bundled() -> Self {
        Self::parse(BUNDLED_GENERIC_MAIL)
    }

    /// Affiliation bucket for a commit email: its domain, or
    /// [`UNAFFILIATED`] for generic providers and malformed addresses.
    pub fn affiliation(&self, email: &str) -> String {
        let email = email.trim().to_lowercase();
        match email.rsplit_once('@') {
            Some((_, domain)) if !domain.is_empty() && !self.domains.contains(domain) => domain.into(),
            _ => UNAFFILIATED.into(),
        }
    }
}

/// Everything enrichment needs from offline tables.
#[derive(Debug, Clone, Default)]
pub struct Tables {
    pub gender: GenderTable,
    pub country: CountryTable,
    pub generic_mail: GenericMailProviders,
}

impl Tables {
    pub fn bundled() -> Self {
        Self {
            gender: GenderTable::bundled(),
            country: CountryTable::bundled(),
            generic_mail: GenericMailProviders::bundled(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_tables_load_with_versions() {
        let t = Tables::bundled();
        assert_eq!(t.gender.version, 1);
        assert_eq!(t.country.version, 1);
        assert_eq!(t.gender.lookup("Alice Smith"), GenderCategory::Female);
        assert_eq!(t.gender.lookup("Zzyzx"), GenderCategory::Unknown);
    }

    #[test]
    fn country_resolution() {
        let t = CountryTable::bundled();
        assert_eq!(t.resolve("Knoxville, TN"), Some("United States"));
        assert_eq!(t.resolve("Berlin"), Some("Germany"));
        assert_eq!(t.resolve("Paris, France"), Some("France"));
        assert_eq!(t.resolve("Cambridge, MA"), Some("United States"));
        assert_eq!(t.resolve("somewhere on earth"), None);
        assert_eq!(t.resolve(""), None);
    }

    #[test]
    fn gender_sides() {
        assert_eq!(GenderCategory::MostlyMale.side(), GenderSide::Male);
        assert_eq!(GenderCategory::MostlyFemale.side(), GenderSide::Female);
        assert_eq!(GenderCategory::Androgynous.side(), GenderSide::Unknown);
    }

    #[test]
    fn affiliation_buckets_generic_providers() {
        let g = GenericMailProviders::bundled();
        assert_eq!(g.affiliation("someone@ornl.gov"), "ornl.gov");
        assert_eq!(g.affiliation("Someone@GMail.com"), UNAFFILIATED);
        assert_eq!(g.affiliation("not-an-email"), UNAFFILIATED);
    }

    #[test]
    fn malformed_rows_are_errors() {
        assert_eq!(GenderTable::parse("alice female"), Err(TableError::Fields { line: 1 }));
        assert!(matches!(
            GenderTable::parse("alice\tgirl"),
            Err(TableError::Category { .. })
        ));
    }
}
