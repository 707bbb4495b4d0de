//! The staged commands: mine, metrics, stg, compare, words. Each stage
//! reads the files the previous one wrote.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use log::{info, warn};
use repoecg_core::enrich::text::strip_for_scoring;
use repoecg_core::enrich::{monthly_metrics, ScoreRequest};
use repoecg_core::stats::{compare_projects, ComparisonMatrix, ComponentMeanVector};
use repoecg_core::stg::{build_stg, render_svg, resolve_window, StgError, Window, REGISTRY};
use repoecg_core::wordscore::{fighting_words, render_scatter_svg, FightingWords, WordscoreError};
use repoecg_core::ParentKind;

use crate::config::{Config, ProjectConfig};
use crate::csvio::{read_monthly, write_monthly};
use crate::error::{Error, Result};
use crate::gitlog::mine_commits;
use crate::ingest::dump::{project_dir, raw_dir, write_atomic, write_commits};
use crate::ingest::{fetch_repo, load_dump, parallel_map, ApiClient, ClientConfig, DumpManifest, RecordKind};
use crate::scorer::make_scorer;

pub const STAR_LEGEND: &str = "*: p-value<0.05, **: p-value<0.01, ***: p-value<0.001 (Holm-adjusted)";

/// Which configured projects a command runs on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Target {
    One(String),
    All,
}

/// Shared command context.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub config: Config,
    pub token: Option<String>,
    /// Label projects P1..Pn (config order) in every output.
    pub anonymize: bool,
}

/// How a project appears in outputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Label {
    /// Title text: the slug, or `Pk`.
    pub name: String,
    /// Output directory name: `owner__name`, or `Pk`.
    pub dir: String,
}

pub fn monthly_path(data_dir: &Path, slug: &str) -> Result<PathBuf> {
    Ok(project_dir(data_dir, slug)?.join("monthly.csv"))
}

impl Pipeline {
    pub fn new(config: Config, token: Option<String>, anonymize: bool) -> Self {
        Self {
            config,
            token,
            anonymize,
        }
    }

    fn projects(&self, target: &Target) -> Result<Vec<ProjectConfig>> {
        match target {
            Target::One(slug) => Ok(vec![self.config.project(slug)?.clone()]),
            Target::All if self.config.projects.is_empty() => Err(Error::Config("no projects configured".into())),
            Target::All => Ok(self.config.projects.clone()),
        }
    }

    pub fn label(&self, slug: &str) -> Result<Label> {
        if self.anonymize {
            let i = self
                .config
                .projects
                .iter()
                .position(|p| p.slug.eq_ignore_ascii_case(slug))
                .ok_or_else(|| Error::Usage(format!("project {slug:?} is not in the config")))?;
            let name = format!("P{}", i + 1);
            return Ok(Label {
                dir: name.clone(),
                name,
            });
        }
        let dir = project_dir(Path::new(""), slug)?.to_string_lossy().into_owned();
        Ok(Label {
            name: slug.to_string(),
            dir,
        })
    }

    fn out_dir(&self, slug: &str) -> Result<PathBuf> {
        let dir = self.config.out_dir.join(self.label(slug)?.dir);
        fs::create_dir_all(&dir).map_err(Error::io(&dir))?;
        Ok(dir)
    }

    /// Run `f` for each project in the bounded pool. Every project runs;
    /// the first failure (in config order) is returned after all finish.
    fn each<R: Send>(
        &self,
        projects: &[ProjectConfig],
        f: impl Fn(&ProjectConfig) -> Result<R> + Sync,
    ) -> Result<Vec<R>> {
        let results = parallel_map(projects, self.config.jobs, |p| Ok(f(p)))?;
        let mut out = Vec::new();
        let mut first = None;
        for (p, r) in projects.iter().zip(results) {
            match r {
                Ok(v) => out.push(v),
                Err(e) => {
                    eprintln!("{}: {e}", p.slug);
                    first.get_or_insert(e);
                }
            }
        }
        first.map_or(Ok(out), Err)
    }

    fn client(&self) -> Result<ApiClient> {
        ApiClient::new(ClientConfig {
            api_base_url: self.config.api_base_url.clone(),
            token: self.token.clone(),
            page_size: self.config.page_size,
            concurrency: self.config.concurrency,
            max_wait: Duration::from_secs(self.config.rate_limit_max_wait_secs),
        })
    }

    /// Commits from the local clone (when configured), then the API dump.
    /// The manifest is the last file written.
    pub fn mine(&self, target: &Target) -> Result<Vec<DumpManifest>> {
        let projects = self.projects(target)?;
        let client = self.client()?;
        self.each(&projects, |p| {
            let raw = raw_dir(&self.config.data_dir, &p.slug)?;
            if let Some(clone) = &p.clone {
                let mined = mine_commits(clone, p.branch.as_deref(), &self.config.thresholds)?;
                if mined.skipped > 0 {
                    warn!("{}: {} unreadable commits skipped", p.slug, mined.skipped);
                }
                write_commits(&raw, &mined.commits)?;
                info!("{}: {} commits", p.slug, mined.commits.len());
            }
            let m = fetch_repo(&client, &p.slug, &RecordKind::ALL, &raw, self.config.concurrency)?;
            println!("{}: mined {}", p.slug, counts_line(&m));
            Ok(m)
        })
    }

    pub fn metrics(&self, target: &Target) -> Result<Vec<PathBuf>> {
        let projects = self.projects(target)?;
        let tables = self.config.tables()?;
        let enrich = self.config.enrich_config();
        self.each(&projects, |p| {
            let dump = load_dump(&raw_dir(&self.config.data_dir, &p.slug)?)?;
            let mut scorer = make_scorer(&self.config.scorer);
            let m = monthly_metrics(&dump.records, scorer.as_mut(), &tables, &enrich)?;
            if dump.malformed > 0 {
                println!("{}: warning: {} malformed records skipped", p.slug, dump.malformed);
            }
            if m.metric_warnings.negative_durations > 0 {
                println!(
                    "{}: warning: {} closures before creation clamped to 0s",
                    p.slug, m.metric_warnings.negative_durations
                );
            }
            if m.enrich_warnings.scorer_failures > 0 {
                println!(
                    "{}: warning: scorer failed for {} month batches; their text metrics are empty",
                    p.slug, m.enrich_warnings.scorer_failures
                );
            }
            let path = monthly_path(&self.config.data_dir, &p.slug)?;
            write_monthly(&path, &m.rows)?;
            println!("{}: {} months -> {}", p.slug, m.rows.len(), path.display());
            Ok(path)
        })
    }

    pub fn stg(&self, target: &Target, windows: &[Window]) -> Result<Vec<PathBuf>> {
        let projects = self.projects(target)?;
        let windows = if windows.is_empty() {
            &Window::STANDARD[..]
        } else {
            windows
        };
        let files = self.each(&projects, |p| {
            let rows = read_monthly(&monthly_path(&self.config.data_dir, &p.slug)?, &p.slug)?;
            let label = self.label(&p.slug)?;
            let dir = self.out_dir(&p.slug)?;
            let mut written = Vec::new();
            for &window in windows {
                let resolved = resolve_window(&rows, window).map_err(|e| match e {
                    StgError::EmptyWindow => Error::MissingMetrics(format!("{}: monthly.csv has no months", p.slug)),
                    other => other.into(),
                })?;
                if resolved.clamped {
                    println!(
                        "{}: warning: window {window} exceeds the {}-month history; drawing all of it",
                        label.name,
                        resolved.months()
                    );
                }
                let doc = build_stg(&label.name, &rows, resolved, &REGISTRY)?;
                let path = dir.join(format!("stg_{window}.svg"));
                write_atomic(&path, render_svg(&doc, &self.config.style).as_bytes())?;
                written.push(path);
            }
            Ok(written)
        })?;
        Ok(files.into_iter().flatten().collect())
    }

    /// Pairwise comparison of every configured project with metrics.
    pub fn compare(&self) -> Result<ComparisonMatrix> {
        let mut vectors = Vec::new();
        for p in &self.config.projects {
            match read_monthly(&monthly_path(&self.config.data_dir, &p.slug)?, &p.slug) {
                Ok(rows) => vectors.push(ComponentMeanVector::from_rows(self.label(&p.slug)?.name, &rows)),
                Err(Error::MissingMetrics(m)) => println!("{}: skipped ({m})", p.slug),
                Err(e) => return Err(e),
            }
        }
        let matrix = compare_projects(&vectors)?;
        let out = &self.config.out_dir;
        fs::create_dir_all(out).map_err(Error::io(out))?;
        write_atomic(&out.join("comparison.csv"), comparison_csv(&matrix).as_bytes())?;
        let table = matrix.render_table();
        write_atomic(
            &out.join("comparison.txt"),
            format!("{table}\n{STAR_LEGEND}\n").as_bytes(),
        )?;
        println!("{table}");
        println!("{STAR_LEGEND}");
        Ok(matrix)
    }

    /// Fighting words over each project's review comments, split by the
    /// scorer's usefulness verdict. With `Target::All`, single-class
    /// projects are skipped with a notice.
    pub fn words(&self, target: &Target) -> Result<Vec<FightingWords>> {
        let projects = self.projects(target)?;
        let all = *target == Target::All;
        let results = self.each(&projects, |p| {
            let dump = load_dump(&raw_dir(&self.config.data_dir, &p.slug)?)?;
            let texts: Vec<(i64, String)> = dump
                .records
                .comments
                .iter()
                .filter(|c| c.parent_kind == ParentKind::Review)
                .map(|c| (c.comment_id, strip_for_scoring(&c.body)))
                .collect();
            let requests: Vec<ScoreRequest<'_>> = texts
                .iter()
                .map(|(id, text)| ScoreRequest {
                    id: *id,
                    text: text.as_str(),
                })
                .collect();
            let scores = make_scorer(&self.config.scorer)
                .score_batch(&requests)
                .map_err(|e| Error::Other(e.to_string()))?;
            if scores.len() != requests.len() {
                return Err(Error::Other(format!(
                    "{}: scorer returned {} results for {}",
                    p.slug,
                    scores.len(),
                    requests.len()
                )));
            }
            let (mut useful, mut not_useful) = (Vec::new(), Vec::new());
            for (c, s) in dump
                .records
                .comments
                .iter()
                .filter(|c| c.parent_kind == ParentKind::Review)
                .zip(&scores)
            {
                if s.useful {
                    useful.push(c.body.as_str());
                } else {
                    not_useful.push(c.body.as_str());
                }
            }
            let label = self.label(&p.slug)?;
            let fw = match fighting_words(&useful, &not_useful, &self.config.words) {
                Ok(fw) => fw,
                Err(WordscoreError::SingleClassCorpus(missing)) => {
                    let msg = format!(
                        "{}: no review comments are {missing}; fighting words needs both classes",
                        label.name
                    );
                    if all {
                        println!("{msg} (skipped)");
                        return Ok(None);
                    }
                    return Err(Error::SingleClass(msg));
                }
                Err(e) => return Err(Error::Config(e.to_string())),
            };
            let dir = self.out_dir(&p.slug)?;
            write_atomic(&dir.join("fighting_words.csv"), words_csv(&fw).as_bytes())?;
            let title = format!("{}: useful vs not useful review comments", label.name);
            write_atomic(
                &dir.join("fighting_words.svg"),
                render_scatter_svg(&fw, &title).as_bytes(),
            )?;
            println!("{}: {} tokens scored", label.name, fw.tokens.len());
            Ok(Some(fw))
        })?;
        Ok(results.into_iter().flatten().collect())
    }
}

fn counts_line(m: &DumpManifest) -> String {
    let mut s = String::new();
    for (k, v) in &m.record_counts {
        let _ = write!(s, "{}{k}={v}", if s.is_empty() { "" } else { " " });
    }
    s
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

pub fn comparison_csv(m: &ComparisonMatrix) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(["a", "b", "delta", "p_raw", "p_adjusted", "stars"])
        .expect("in-memory write");
    for p in &m.pairs {
        w.write_record([
            p.repo_a.clone(),
            p.repo_b.clone(),
            p.cliffs_delta.to_string(),
            opt(p.p_raw),
            opt(p.p_adjusted),
            p.stars.as_str().to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("UTF-8")
}

pub fn words_csv(fw: &FightingWords) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record([
        "token",
        "count_useful",
        "count_not_useful",
        "log_odds",
        "z",
        "top10_class",
    ])
    .expect("in-memory write");
    for t in &fw.tokens {
        w.write_record([
            t.token.clone(),
            t.count_useful.to_string(),
            t.count_not_useful.to_string(),
            t.log_odds.to_string(),
            t.z.to_string(),
            t.top_class.map_or("", |c| c.as_str()).to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("UTF-8")
}
