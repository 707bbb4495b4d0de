//! `repoecg.toml`: where data lives, which projects to analyze, and the
//! knobs each stage exposes.
//!
//! ```toml
//! data_dir = "data"
//! out_dir = "out"
//! api_base_url = "https://api.github.com"
//!
//! [[projects]]
//! slug = "owner/name"
//! clone = "../clones/name"   # optional, enables commit mining
//! branch = "main"            # optional, defaults to HEAD
//!
//! [scorer]
//! kind = "external"          # or "bundled"
//! command = "python3 score.py"
//! ```
//!
//! Relative paths resolve against the directory holding the config file.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use repoecg_core::dmm::RiskThresholds;
use repoecg_core::enrich::cbe::GenderRatioMode;
use repoecg_core::enrich::tables::{CountryTable, GenderTable, GenericMailProviders, Tables};
use repoecg_core::enrich::EnrichConfig;
use repoecg_core::stg::StyleConfig;
use repoecg_core::wordscore::FightingWordsConfig;
use serde::Deserialize;

use crate::error::{Error, Result};

pub const DEFAULT_API_BASE_URL: &str = "https://api.github.com";
pub const TOKEN_ENV: &str = "REPOECG_TOKEN";

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectConfig {
    pub slug: String,
    #[serde(default)]
    pub clone: Option<PathBuf>,
    #[serde(default)]
    pub branch: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ScorerConfig {
    #[default]
    Bundled,
    /// A shell command speaking line-delimited JSON on stdin/stdout.
    External { command: String },
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TablePaths {
    pub gender: Option<PathBuf>,
    pub country: Option<PathBuf>,
    pub generic_mail: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenderMode {
    #[default]
    FemaleShare,
    MaleShare,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnrichSection {
    pub gender_mode: GenderMode,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub data_dir: PathBuf,
    pub out_dir: PathBuf,
    pub api_base_url: String,
    /// In-flight page fetches per repository.
    pub concurrency: usize,
    pub page_size: u32,
    /// Longest single sleep spent waiting out a rate limit.
    pub rate_limit_max_wait_secs: u64,
    /// Projects processed in parallel.
    pub jobs: usize,
    pub projects: Vec<ProjectConfig>,
    pub scorer: ScorerConfig,
    pub thresholds: RiskThresholds,
    pub enrich: EnrichSection,
    pub tables: TablePaths,
    pub words: FightingWordsConfig,
    pub style: StyleConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            data_dir: "data".into(),
            out_dir: "out".into(),
            api_base_url: DEFAULT_API_BASE_URL.into(),
            concurrency: 4,
            page_size: 100,
            rate_limit_max_wait_secs: 3600,
            jobs: 4,
            projects: Vec::new(),
            scorer: ScorerConfig::Bundled,
            thresholds: RiskThresholds::default(),
            enrich: EnrichSection::default(),
            tables: TablePaths::default(),
            words: FightingWordsConfig::default(),
            style: StyleConfig::default(),
        }
    }
}

/// `owner/name` with both parts nonempty and free of path separators.
pub fn check_slug(slug: &str) -> Result<(&str, &str)> {
    let bad = || Error::Config(format!("malformed repository slug {slug:?}, expected owner/name"));
    let (owner, name) = slug.split_once('/').ok_or_else(bad)?;
    let ok = |s: &str| {
        !s.is_empty() && s != "." && s != ".." && s.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c))
    };
    if ok(owner) && ok(name) {
        Ok((owner, name))
    } else {
        Err(bad())
    }
}

impl Config {
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut cfg: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.resolve_paths(base);
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Config::parse(&text, base)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        join(&mut self.data_dir);
        join(&mut self.out_dir);
        for p in &mut self.projects {
            if let Some(c) = p.clone.as_mut() {
                join(c);
            }
        }
        for p in [
            &mut self.tables.gender,
            &mut self.tables.country,
            &mut self.tables.generic_mail,
        ]
        .into_iter()
        .flatten()
        {
            join(p);
        }
    }

    fn check(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for p in &self.projects {
            check_slug(&p.slug)?;
            if !seen.insert(p.slug.to_ascii_lowercase()) {
                return Err(Error::Config(format!("project {:?} is listed twice", p.slug)));
            }
        }
        if self.concurrency == 0 || self.jobs == 0 {
            return Err(Error::Config("concurrency and jobs must be at least 1".into()));
        }
        if !(1..=100).contains(&self.page_size) {
            return Err(Error::Config("page_size must be between 1 and 100".into()));
        }
        if let ScorerConfig::External { command } = &self.scorer {
            if command.trim().is_empty() {
                return Err(Error::Config("external scorer needs a command".into()));
            }
        }
        Ok(())
    }

    pub fn project(&self, slug: &str) -> Result<&ProjectConfig> {
        self.projects
            .iter()
            .find(|p| p.slug.eq_ignore_ascii_case(slug))
            .ok_or_else(|| Error::Usage(format!("project {slug:?} is not in the config")))
    }

    pub fn enrich_config(&self) -> EnrichConfig {
        EnrichConfig {
            gender_mode: match self.enrich.gender_mode {
                GenderMode::FemaleShare => GenderRatioMode::FemaleShare,
                GenderMode::MaleShare => GenderRatioMode::MaleShare,
            },
        }
    }

    /// Bundled tables with any configured overrides swapped in.
    pub fn tables(&self) -> Result<Tables> {
        let mut t = Tables::bundled();
        let read = |p: &PathBuf| fs::read_to_string(p).map_err(Error::io(p));
        if let Some(p) = &self.tables.gender {
            t.gender = GenderTable::parse(&read(p)?)?;
        }
        if let Some(p) = &self.tables.country {
            t.country = CountryTable::parse(&read(p)?)?;
        }
        if let Some(p) = &self.tables.generic_mail {
            t.generic_mail = GenericMailProviders::parse(&read(p)?);
        }
        Ok(t)
    }
}
