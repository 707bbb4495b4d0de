//! Shared helpers for the integration tests: a small GitHub-compatible
//! fixture server, a scripted git repository builder, and config writers.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread;

use serde_json::{json, Value};

pub const ALPHA: &str = "fixture/alpha";

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn alpha_dir() -> PathBuf {
    fixtures().join("alpha")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// What the fixture server returns for one repository.
#[derive(Debug, Clone, Default)]
pub struct RepoData {
    pub issues: Vec<Value>,
    pub pulls: Vec<Value>,
    pub issue_comments: Vec<Value>,
    pub review_comments: Vec<Value>,
}

impl RepoData {
    pub fn alpha() -> Self {
        let dir = alpha_dir();
        let list = |name: &str| read_json(&dir.join(name)).as_array().unwrap().clone();
        Self {
            issues: list("issues.json"),
            pulls: list("pulls.json"),
            issue_comments: list("issue_comments.json"),
            review_comments: list("review_comments.json"),
        }
    }
}

pub fn alpha_users() -> BTreeMap<String, Value> {
    read_json(&alpha_dir().join("users.json"))
        .as_object()
        .unwrap()
        .iter()
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect()
}

/// Server-side behavior switches.
#[derive(Debug, Clone, Default)]
pub struct ServerOptions {
    /// Reject requests without `Authorization: Bearer <token>` with 401.
    pub require_token: Option<String>,
    /// Answer the first N requests with 429 and `retry-after: 0`.
    pub rate_limit_first: usize,
    /// Answer every request after the first N with 500.
    pub fail_after: Option<usize>,
    /// Leave `rel="last"` out of Link headers so clients must walk `next`.
    pub omit_last: bool,
}

struct State {
    repos: BTreeMap<String, RepoData>,
    users: BTreeMap<String, Value>,
    opts: ServerOptions,
    requests: AtomicUsize,
    stop: AtomicBool,
}

/// A threaded HTTP/1.1 server on 127.0.0.1 answering the REST paths the
/// miner uses. Every connection carries one request.
pub struct FixtureServer {
    pub base_url: String,
    state: Arc<State>,
    addr: std::net::SocketAddr,
    handle: Option<thread::JoinHandle<()>>,
}

impl FixtureServer {
    pub fn start(repos: BTreeMap<String, RepoData>, users: BTreeMap<String, Value>, opts: ServerOptions) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let base_url = format!("http://{addr}");
        let state = Arc::new(State {
            repos,
            users,
            opts,
            requests: AtomicUsize::new(0),
            stop: AtomicBool::new(false),
        });
        let st = Arc::clone(&state);
        let base = base_url.clone();
        let handle = thread::spawn(move || {
            for stream in listener.incoming() {
                if st.stop.load(Ordering::SeqCst) {
                    break;
                }
                let Ok(stream) = stream else { continue };
                let st = Arc::clone(&st);
                let base = base.clone();
                thread::spawn(move || {
                    let _ = serve(stream, &st, &base);
                });
            }
        });
        Self {
            base_url,
            state,
            addr,
            handle: Some(handle),
        }
    }

    pub fn alpha(opts: ServerOptions) -> Self {
        Self::start(
            BTreeMap::from([(ALPHA.to_string(), RepoData::alpha())]),
            alpha_users(),
            opts,
        )
    }

    pub fn requests(&self) -> usize {
        self.state.requests.load(Ordering::SeqCst)
    }
}

impl Drop for FixtureServer {
    fn drop(&mut self) {
        self.state.stop.store(true, Ordering::SeqCst);
        let _ = TcpStream::connect(self.addr);
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

fn serve(stream: TcpStream, st: &State, base: &str) -> std::io::Result<()> {
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut request_line = String::new();
    if reader.read_line(&mut request_line)? == 0 {
        return Ok(());
    }
    let mut auth = None;
    let mut content_length = 0usize;
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line)? == 0 || line.trim().is_empty() {
            break;
        }
        if let Some((k, v)) = line.split_once(':') {
            let (k, v) = (k.trim().to_ascii_lowercase(), v.trim().to_string());
            match k.as_str() {
                "authorization" => auth = Some(v),
                "content-length" => content_length = v.parse().unwrap_or(0),
                _ => {}
            }
        }
    }
    if content_length > 0 {
        let mut sink = vec![0; content_length];
        reader.read_exact(&mut sink)?;
    }
    let n = st.requests.fetch_add(1, Ordering::SeqCst) + 1;
    let target = request_line.split_whitespace().nth(1).unwrap_or("/").to_string();
    let (status, headers, body) = route(st, base, &target, auth.as_deref(), n);
    let mut out = stream;
    let mut head = format!(
        "HTTP/1.1 {status}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n",
        body.len()
    );
    for (k, v) in headers {
        head.push_str(&format!("{k}: {v}\r\n"));
    }
    head.push_str("\r\n");
    out.write_all(head.as_bytes())?;
    out.write_all(body.as_bytes())?;
    out.flush()
}

type Reply = (&'static str, Vec<(String, String)>, String);

fn error(status: &'static str, message: &str) -> Reply {
    (status, Vec::new(), json!({ "message": message }).to_string())
}

fn route(st: &State, base: &str, target: &str, auth: Option<&str>, n: usize) -> Reply {
    if let Some(token) = &st.opts.require_token {
        if auth != Some(format!("Bearer {token}").as_str()) {
            return error("401 Unauthorized", "Bad credentials");
        }
    }
    if n <= st.opts.rate_limit_first {
        let (s, mut h, b) = error("429 Too Many Requests", "rate limited");
        h.push(("retry-after".into(), "0".into()));
        return (s, h, b);
    }
    if st.opts.fail_after.is_some_and(|limit| n > limit) {
        return error("500 Internal Server Error", "boom");
    }

    let (path, query) = target.split_once('?').unwrap_or((target, ""));
    let params: BTreeMap<&str, &str> = query.split('&').filter_map(|kv| kv.split_once('=')).collect();
    let parts: Vec<&str> = path.trim_matches('/').split('/').collect();
    match parts.as_slice() {
        ["users", login] => match st.users.get(*login) {
            Some(u) => ("200 OK", Vec::new(), u.to_string()),
            None => error("404 Not Found", "Not Found"),
        },
        ["repos", owner, name, rest @ ..] => {
            let slug = format!("{owner}/{name}");
            let Some(repo) = st.repos.get(&slug) else {
                return error("404 Not Found", "Not Found");
            };
            let list = match rest {
                [] => return ("200 OK", Vec::new(), json!({ "full_name": slug }).to_string()),
                ["issues"] => repo.issues.clone(),
                ["pulls"] => repo.pulls.clone(),
                ["issues", "comments"] => repo.issue_comments.clone(),
                ["pulls", "comments"] => repo.review_comments.clone(),
                _ => return error("404 Not Found", "Not Found"),
            };
            paged(st, base, path, &params, list)
        }
        _ => error("404 Not Found", "Not Found"),
    }
}

fn paged(st: &State, base: &str, path: &str, params: &BTreeMap<&str, &str>, items: Vec<Value>) -> Reply {
    let per_page: usize = params
        .get("per_page")
        .and_then(|v| v.parse().ok())
        .unwrap_or(30)
        .clamp(1, 100);
    let page: usize = params.get("page").and_then(|v| v.parse().ok()).unwrap_or(1).max(1);
    let last = items.len().div_ceil(per_page).max(1);
    let chunk: Vec<Value> = items.into_iter().skip((page - 1) * per_page).take(per_page).collect();
    let keep: String = params
        .iter()
        .filter(|(k, _)| **k != "page")
        .map(|(k, v)| format!("{k}={v}&"))
        .collect();
    let link = |p: usize, rel: &str| format!("<{base}{path}?{keep}page={p}>; rel=\"{rel}\"");
    let mut links = Vec::new();
    if page < last {
        links.push(link(page + 1, "next"));
        if !st.opts.omit_last {
            links.push(link(last, "last"));
        }
    }
    if page > 1 {
        links.push(link(1, "first"));
        links.push(link(page - 1, "prev"));
    }
    let headers = if links.is_empty() {
        Vec::new()
    } else {
        vec![("Link".to_string(), links.join(", "))]
    };
    ("200 OK", headers, Value::Array(chunk).to_string())
}

/// Build the scripted repository from `git_script.json` under `dir`.
/// Author and committer identity and dates come from the script, so the
/// history is the same on every run.
pub fn build_git_repo(dir: &Path) {
    let script = read_json(&alpha_dir().join("git_script.json"));
    fs::create_dir_all(dir).unwrap();
    git(dir, &["init", "-q", "-b", "main"], None);
    let mut current = "main".to_string();
    for c in script.as_array().unwrap() {
        let branch = c["branch"].as_str().unwrap();
        if branch != current {
            let exists = git_ok(dir, &["rev-parse", "--verify", "-q", &format!("refs/heads/{branch}")]);
            if exists {
                git(dir, &["checkout", "-q", branch], None);
            } else {
                git(dir, &["checkout", "-q", "-b", branch], None);
            }
            current = branch.to_string();
        }
        let ident = Ident {
            name: c["author_name"].as_str().unwrap(),
            email: c["author_email"].as_str().unwrap(),
            date: c["date"].as_str().unwrap(),
        };
        let message = c["message"].as_str().unwrap();
        if let Some(other) = c["merge"].as_str() {
            git(
                dir,
                &["merge", "-q", "--no-ff", "--no-edit", "-m", message, other],
                Some(&ident),
            );
            continue;
        }
        for (path, content) in c["write"].as_object().unwrap() {
            let p = dir.join(path);
            fs::create_dir_all(p.parent().unwrap()).unwrap();
            fs::write(&p, content.as_str().unwrap()).unwrap();
        }
        for path in c["delete"].as_array().unwrap() {
            fs::remove_file(dir.join(path.as_str().unwrap())).unwrap();
        }
        git(dir, &["add", "-A"], None);
        git(dir, &["commit", "-q", "-m", message], Some(&ident));
    }
    if current != "main" {
        git(dir, &["checkout", "-q", "main"], None);
    }
}

pub struct Ident<'a> {
    pub name: &'a str,
    pub email: &'a str,
    pub date: &'a str,
}

fn git_command(dir: &Path, args: &[&str], ident: Option<&Ident>) -> Command {
    let mut cmd = Command::new("git");
    cmd.current_dir(dir)
        .args(args)
        .env("GIT_CONFIG_NOSYSTEM", "1")
        .env("GIT_CONFIG_GLOBAL", "/dev/null")
        .env("GIT_AUTHOR_NAME", "Fixture")
        .env("GIT_AUTHOR_EMAIL", "fixture@example.test")
        .env("GIT_COMMITTER_NAME", "Fixture")
        .env("GIT_COMMITTER_EMAIL", "fixture@example.test");
    if let Some(i) = ident {
        cmd.env("GIT_AUTHOR_NAME", i.name)
            .env("GIT_AUTHOR_EMAIL", i.email)
            .env("GIT_AUTHOR_DATE", i.date)
            .env("GIT_COMMITTER_NAME", i.name)
            .env("GIT_COMMITTER_EMAIL", i.email)
            .env("GIT_COMMITTER_DATE", i.date);
    }
    cmd
}

pub fn git(dir: &Path, args: &[&str], ident: Option<&Ident>) {
    let out = git_command(dir, args, ident).output().unwrap();
    assert!(
        out.status.success(),
        "git {args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn git_ok(dir: &Path, args: &[&str]) -> bool {
    git_command(dir, args, None).output().unwrap().status.success()
}

/// One `[[projects]]` entry.
pub struct Project<'a> {
    pub slug: &'a str,
    pub clone: Option<&'a Path>,
}

/// Write a config using the fixture scorer and tables. Returns its path.
pub fn write_config(dir: &Path, api_base_url: &str, projects: &[Project], extra: &str) -> PathBuf {
    let alpha = alpha_dir();
    let q = |p: &Path| toml_string(&p.to_string_lossy());
    let mut text = format!(
        "data_dir = \"data\"\nout_dir = \"out\"\napi_base_url = {}\n{extra}\n\n[scorer]\nkind = \"external\"\ncommand = {}\n\n[tables]\ngender = {}\ncountry = {}\ngeneric_mail = {}\n",
        toml_string(api_base_url),
        toml_string(&format!("python3 {}", alpha.join("scorer.py").display())),
        q(&alpha.join("gender.tsv")),
        q(&alpha.join("country.tsv")),
        q(&alpha.join("generic_mail.txt")),
    );
    for p in projects {
        text.push_str(&format!("\n[[projects]]\nslug = {}\n", toml_string(p.slug)));
        if let Some(c) = p.clone {
            text.push_str(&format!("clone = {}\n", q(c)));
        }
    }
    let path = dir.join("repoecg.toml");
    fs::write(&path, text).unwrap();
    path
}

fn toml_string(s: &str) -> String {
    toml::Value::String(s.to_string()).to_string()
}

/// Run the built binary with `args` and the given token.
pub fn run(config: &Path, args: &[&str], token: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_repoecg"));
    cmd.arg("--config")
        .arg(config)
        .args(args)
        .env_remove("REPOECG_TOKEN")
        .env("RUST_LOG", "error");
    if let Some(t) = token {
        cmd.env("REPOECG_TOKEN", t);
    }
    cmd.output().unwrap()
}

pub fn code(out: &Output) -> i32 {
    out.status.code().unwrap_or(-1)
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Golden CSV cells are compared numerically; the oracle's logarithms come
/// from a different math library, so the last bits may differ.
pub const TOLERANCE: f64 = 1e-9;

fn parse(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

/// Differences between two CSVs as readable strings; empty when they agree.
pub fn csv_diff(got: &str, want: &str) -> Vec<String> {
    let (g, w) = (parse(got), parse(want));
    let mut diffs = Vec::new();
    if g.first() != w.first() {
        diffs.push(format!(
            "header differs:\n  got  {:?}\n  want {:?}",
            g.first(),
            w.first()
        ));
        return diffs;
    }
    if g.len() != w.len() {
        diffs.push(format!("row count {} != {}", g.len(), w.len()));
    }
    let header = &w[0];
    for (gr, wr) in g.iter().zip(&w).skip(1) {
        for ((col, a), b) in header.iter().zip(gr).zip(wr) {
            let same = match (a.parse::<f64>(), b.parse::<f64>()) {
                (Ok(x), Ok(y)) => (x - y).abs() <= TOLERANCE * y.abs().max(1.0),
                _ => a == b,
            };
            if !same {
                diffs.push(format!("{} {col}: got {a:?}, want {b:?}", wr[0]));
            }
        }
    }
    diffs
}
