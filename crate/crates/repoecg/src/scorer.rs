//! Text scorer that delegates to an external command speaking
//! line-delimited JSON: requests `{"id", "text"}` on stdin, one response
//! `{"id", "sentiment", "useful", "toxic"}` per line on stdout.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::process::{Command, Stdio};

use repoecg_core::enrich::{LexiconScorer, ScoreRequest, ScorerError, TextScore, TextScorer};
use serde::{Deserialize, Serialize};

use crate::config::ScorerConfig;

#[derive(Serialize)]
struct Request<'a> {
    id: i64,
    text: &'a str,
}

#[derive(Deserialize)]
struct Response {
    id: i64,
    sentiment: f64,
    useful: bool,
    toxic: bool,
}

/// Runs `sh -c <command>` once per batch.
#[derive(Debug, Clone)]
pub struct ExternalScorer {
    pub command: String,
}

impl TextScorer for ExternalScorer {
    fn score_batch(&mut self, requests: &[ScoreRequest<'_>]) -> Result<Vec<TextScore>, ScorerError> {
        if requests.is_empty() {
            return Ok(Vec::new());
        }
        let fail = |m: String| ScorerError(format!("{}: {m}", self.command));
        let mut input = Vec::new();
        for r in requests {
            serde_json::to_writer(&mut input, &Request { id: r.id, text: r.text }).map_err(|e| fail(e.to_string()))?;
            input.push(b'\n');
        }
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(&self.command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| fail(e.to_string()))?;
        let mut stdin = child.stdin.take().expect("stdin is piped");
        let writer = std::thread::spawn(move || stdin.write_all(&input));
        let out = child.wait_with_output().map_err(|e| fail(e.to_string()))?;
        // a scorer may exit without reading everything; its output decides
        let _ = writer.join();
        if !out.status.success() {
            return Err(fail(format!("exited with {}", out.status)));
        }
        let mut by_id = BTreeMap::new();
        for line in String::from_utf8_lossy(&out.stdout)
            .lines()
            .filter(|l| !l.trim().is_empty())
        {
            let r: Response = serde_json::from_str(line).map_err(|e| fail(format!("bad response line: {e}")))?;
            by_id.insert(
                r.id,
                TextScore {
                    sentiment: r.sentiment,
                    useful: r.useful,
                    toxic: r.toxic,
                },
            );
        }
        requests
            .iter()
            .map(|r| {
                by_id
                    .get(&r.id)
                    .copied()
                    .ok_or_else(|| fail(format!("no response for id {}", r.id)))
            })
            .collect()
    }
}

pub fn make_scorer(cfg: &ScorerConfig) -> Box<dyn TextScorer> {
    match cfg {
        ScorerConfig::Bundled => Box::new(LexiconScorer),
        ScorerConfig::External { command } => Box::new(ExternalScorer {
            command: command.clone(),
        }),
    }
}
