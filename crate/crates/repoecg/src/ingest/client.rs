//! Blocking REST client: auth, link-header pagination, and rate-limit waits.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use log::{debug, warn};
use reqwest::blocking::{Client, Response};
use reqwest::header::{HeaderMap, ACCEPT, AUTHORIZATION, LINK, RETRY_AFTER, USER_AGENT};
use reqwest::{StatusCode, Url};
use serde_json::Value;

use crate::error::{Error, Result};

/// Retries after a rate-limit response before giving up.
pub const RATE_LIMIT_RETRIES: u32 = 3;

#[derive(Debug, Clone)]
pub struct ClientConfig {
    pub api_base_url: String,
    pub token: Option<String>,
    pub page_size: u32,
    pub concurrency: usize,
    pub max_wait: Duration,
}

pub struct ApiClient {
    http: Client,
    base: String,
    token: Option<String>,
    page_size: u32,
    concurrency: usize,
    max_wait: Duration,
}

/// Targets of a `Link` header, by relation.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct Links {
    pub next: Option<String>,
    pub last: Option<String>,
}

pub fn parse_link_header(value: &str) -> Links {
    let mut links = Links::default();
    for part in value.split(',') {
        let mut pieces = part.split(';');
        let Some(target) = pieces.next().map(str::trim) else {
            continue;
        };
        let Some(url) = target.strip_prefix('<').and_then(|t| t.strip_suffix('>')) else {
            continue;
        };
        for param in pieces {
            let param = param.trim();
            let Some(rel) = param.strip_prefix("rel=") else {
                continue;
            };
            for r in rel.trim_matches('"').split_whitespace() {
                match r {
                    "next" => links.next = Some(url.to_string()),
                    "last" => links.last = Some(url.to_string()),
                    _ => {}
                }
            }
        }
    }
    links
}

fn page_of(url: &Url) -> Option<usize> {
    url.query_pairs()
        .find(|(k, _)| k == "page")
        .and_then(|(_, v)| v.parse().ok())
}

fn with_page(url: &Url, page: usize) -> Url {
    let pairs: Vec<(String, String)> = url
        .query_pairs()
        .map(|(k, v)| {
            let v = if k == "page" { page.to_string() } else { v.into_owned() };
            (k.into_owned(), v)
        })
        .collect();
    let mut out = url.clone();
    out.query_pairs_mut().clear().extend_pairs(pairs);
    out
}

fn now_secs() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

/// Seconds to wait when `headers` advertise an exhausted rate limit.
fn rate_limit_wait(status: StatusCode, headers: &HeaderMap) -> Option<u64> {
    let header = |name: &str| headers.get(name).and_then(|v| v.to_str().ok()).map(str::trim);
    let retry_after = header(RETRY_AFTER.as_str()).and_then(|v| v.parse::<u64>().ok());
    let exhausted = header("x-ratelimit-remaining") == Some("0");
    let limited = status == StatusCode::TOO_MANY_REQUESTS
        || (status == StatusCode::FORBIDDEN && (exhausted || retry_after.is_some()));
    if !limited {
        return None;
    }
    if let Some(secs) = retry_after {
        return Some(secs);
    }
    let reset = header("x-ratelimit-reset").and_then(|v| v.parse::<u64>().ok());
    Some(reset.map_or(60, |r| r.saturating_sub(now_secs())))
}

impl ApiClient {
    pub fn new(cfg: ClientConfig) -> Result<Self> {
        let http = Client::builder()
            .timeout(Duration::from_secs(60))
            .build()
            .map_err(|e| Error::Network(e.to_string()))?;
        Ok(Self {
            http,
            base: cfg.api_base_url.trim_end_matches('/').to_string(),
            token: cfg.token.filter(|t| !t.trim().is_empty()),
            page_size: cfg.page_size,
            concurrency: cfg.concurrency.max(1),
            max_wait: cfg.max_wait,
        })
    }

    pub fn base_url(&self) -> &str {
        &self.base
    }

    fn url(&self, path: &str) -> Result<Url> {
        Url::parse(&format!("{}{}", self.base, path)).map_err(|e| Error::Config(format!("bad API URL: {e}")))
    }

    fn send(&self, url: &Url) -> Result<Response> {
        let mut attempt = 0;
        loop {
            let mut req = self
                .http
                .get(url.clone())
                .header(USER_AGENT, concat!("repoecg/", env!("CARGO_PKG_VERSION")))
                .header(ACCEPT, "application/vnd.github+json");
            if let Some(token) = &self.token {
                req = req.header(AUTHORIZATION, format!("Bearer {token}"));
            }
            debug!("GET {url}");
            let resp = req.send().map_err(|e| Error::Network(format!("{url}: {e}")))?;
            let status = resp.status();
            if status.is_success() {
                return Ok(resp);
            }
            if let Some(wait) = rate_limit_wait(status, resp.headers()) {
                if attempt == RATE_LIMIT_RETRIES {
                    return Err(Error::RateLimited(format!(
                        "{url}: still limited after {attempt} retries"
                    )));
                }
                attempt += 1;
                let wait = Duration::from_secs(wait).min(self.max_wait);
                warn!(
                    "rate limited on {url}; waiting {}s (retry {attempt}/{RATE_LIMIT_RETRIES})",
                    wait.as_secs()
                );
                thread::sleep(wait);
                continue;
            }
            let detail = format!("{url}: HTTP {}", status.as_u16());
            return Err(match status {
                StatusCode::UNAUTHORIZED | StatusCode::FORBIDDEN => Error::Auth(detail),
                StatusCode::NOT_FOUND | StatusCode::GONE => Error::NotFound(detail),
                _ => Error::Network(detail),
            });
        }
    }

    fn read_json(url: &Url, resp: Response) -> Result<Value> {
        let body = resp.bytes().map_err(|e| Error::Network(format!("{url}: {e}")))?;
        serde_json::from_slice(&body).map_err(|e| Error::Schema(format!("{url}: invalid JSON: {e}")))
    }

    pub fn get_json(&self, path: &str) -> Result<Value> {
        let url = self.url(path)?;
        let resp = self.send(&url)?;
        Self::read_json(&url, resp)
    }

    fn get_page(&self, url: &Url) -> Result<(Vec<Value>, Links)> {
        let resp = self.send(url)?;
        let links = resp
            .headers()
            .get(LINK)
            .and_then(|v| v.to_str().ok())
            .map(parse_link_header)
            .unwrap_or_default();
        match Self::read_json(url, resp)? {
            Value::Array(items) => Ok((items, links)),
            _ => Err(Error::Schema(format!("{url}: expected a JSON array"))),
        }
    }

    /// Every item of a paginated list endpoint, in page order. When the
    /// first page announces the last one, the rest are fetched in parallel.
    pub fn get_paged(&self, path: &str, query: &[(&str, &str)]) -> Result<Vec<Value>> {
        let mut first = self.url(path)?;
        {
            let mut q = first.query_pairs_mut();
            for (k, v) in query {
                q.append_pair(k, v);
            }
            q.append_pair("per_page", &self.page_size.to_string());
            q.append_pair("page", "1");
        }
        let (mut items, links) = self.get_page(&first)?;

        let last = links.last.as_deref().and_then(|l| Url::parse(l).ok());
        if let Some((last, n)) = last.and_then(|u| page_of(&u).map(|n| (u, n))) {
            if n >= 2 {
                items.extend(self.fetch_pages(&last, n)?.into_iter().flatten());
            }
            return Ok(items);
        }

        let mut next = links.next;
        while let Some(link) = next {
            let url = Url::parse(&link).map_err(|e| Error::Schema(format!("bad next link {link:?}: {e}")))?;
            let (page, links) = self.get_page(&url)?;
            items.extend(page);
            next = links.next;
        }
        Ok(items)
    }

    fn fetch_pages(&self, last: &Url, n: usize) -> Result<Vec<Vec<Value>>> {
        let slots: Mutex<Vec<Option<Vec<Value>>>> = Mutex::new(vec![None; n - 1]);
        let failure: Mutex<Option<Error>> = Mutex::new(None);
        let cursor = AtomicUsize::new(2);
        thread::scope(|s| {
            for _ in 0..self.concurrency.min(n - 1) {
                s.spawn(|| loop {
                    if failure.lock().unwrap().is_some() {
                        return;
                    }
                    let page = cursor.fetch_add(1, Ordering::SeqCst);
                    if page > n {
                        return;
                    }
                    match self.get_page(&with_page(last, page)) {
                        Ok((items, _)) => slots.lock().unwrap()[page - 2] = Some(items),
                        Err(e) => {
                            failure.lock().unwrap().get_or_insert(e);
                            return;
                        }
                    }
                });
            }
        });
        if let Some(e) = failure.into_inner().unwrap() {
            return Err(e);
        }
        Ok(slots
            .into_inner()
            .unwrap()
            .into_iter()
            .map(Option::unwrap_or_default)
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use reqwest::header::HeaderValue;

    #[test]
    fn link_header() {
        let v = r#"<https://api.x/repos/a/b/issues?page=2&per_page=100>; rel="next", <https://api.x/repos/a/b/issues?page=7&per_page=100>; rel="last""#;
        let l = parse_link_header(v);
        assert_eq!(
            l.next.as_deref(),
            Some("https://api.x/repos/a/b/issues?page=2&per_page=100")
        );
        let last = Url::parse(l.last.as_deref().unwrap()).unwrap();
        assert_eq!(page_of(&last), Some(7));
        assert_eq!(
            with_page(&last, 3).as_str(),
            "https://api.x/repos/a/b/issues?page=3&per_page=100"
        );
        assert_eq!(parse_link_header("garbage"), Links::default());
    }

    #[test]
    fn rate_limit_detection() {
        let mut h = HeaderMap::new();
        assert_eq!(rate_limit_wait(StatusCode::FORBIDDEN, &h), None);
        h.insert("retry-after", HeaderValue::from_static("7"));
        assert_eq!(rate_limit_wait(StatusCode::FORBIDDEN, &h), Some(7));
        let mut h = HeaderMap::new();
        h.insert("x-ratelimit-remaining", HeaderValue::from_static("0"));
        h.insert("x-ratelimit-reset", HeaderValue::from_static("1"));
        assert_eq!(rate_limit_wait(StatusCode::FORBIDDEN, &h), Some(0));
        assert_eq!(rate_limit_wait(StatusCode::NOT_FOUND, &h), None);
    }
}
