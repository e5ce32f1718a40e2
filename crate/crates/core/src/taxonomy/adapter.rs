//! External classifier adapters.
//!
//! An adapter substitutes its own detect/categorize decisions for the rule
//! engine, speaking line-delimited JSON over a subprocess pipe or HTTP POST.
//!
//! Wire format, one request per line (pipe) or per POST body (HTTP):
//!   {"op":"detect","post":{...PostRecord...},"author_is_bot":false}
//!   {"op":"categorize","post":{...},"author_is_bot":false}
//! Response, one line / one body:
//!   {"ok":true,"is_piracy":true}                  for detect
//!   {"ok":true,"verdict":{...PostVerdict...}}     for categorize
//!   {"ok":false,"error":"message"}                for failures

use crate::platform::PostRecord;
use crate::taxonomy::labels::PostVerdict;
use crate::taxonomy::rules::RuleClassifier;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::sync::Mutex;
use std::time::Duration;
use thiserror::Error;

pub const DEFAULT_ADAPTER_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Debug, Error)]
pub enum AdapterError {
    #[error("adapter io failure: {0}")]
    Io(String),
    #[error("adapter timed out after {0:?}")]
    Timeout(Duration),
    #[error("adapter protocol violation: {0}")]
    Protocol(String),
    #[error("adapter reported error: {0}")]
    Remote(String),
    #[error("adapter unusable after earlier failure")]
    Broken,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdapterOp {
    Detect,
    Categorize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdapterRequest {
    pub op: AdapterOp,
    pub post: PostRecord,
    #[serde(default)]
    pub author_is_bot: bool,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct AdapterResponse {
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub is_piracy: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<PostVerdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl AdapterResponse {
    pub fn detect(is_piracy: bool) -> Self {
        AdapterResponse { ok: true, is_piracy: Some(is_piracy), ..Default::default() }
    }
    pub fn verdict(verdict: PostVerdict) -> Self {
        AdapterResponse { ok: true, verdict: Some(verdict), ..Default::default() }
    }
    pub fn err(msg: impl Into<String>) -> Self {
        AdapterResponse { ok: false, error: Some(msg.into()), ..Default::default() }
    }
}

/// Behavioral contract for classification backends. `categorize` is only
/// called on posts where `detect` returned true.
pub trait ClassifierAdapter {
    fn detect(&self, post: &PostRecord) -> Result<bool, AdapterError>;
    fn categorize(&self, post: &PostRecord) -> Result<PostVerdict, AdapterError>;
}

impl ClassifierAdapter for RuleClassifier {
    fn detect(&self, post: &PostRecord) -> Result<bool, AdapterError> {
        Ok(RuleClassifier::detect(self, post))
    }

    fn categorize(&self, post: &PostRecord) -> Result<PostVerdict, AdapterError> {
        // A detector/categorizer disagreement surfaces as piracy without
        // labels; the caller logs it.
        Ok(match RuleClassifier::categorize(self, post) {
            Ok(v) => v,
            Err(_) => PostVerdict {
                channel_id: post.channel_id.clone(),
                post_id: post.post_id,
                is_piracy: true,
                labels: Vec::new(),
            },
        })
    }
}

/// Two-stage driver over any adapter: benign verdict unless detect fires,
/// otherwise the adapter's categorization.
pub fn classify_post(
    adapter: &dyn ClassifierAdapter,
    post: &PostRecord,
) -> Result<PostVerdict, AdapterError> {
    if !adapter.detect(post)? {
        return Ok(PostVerdict::benign(post.channel_id.clone(), post.post_id));
    }
    adapter.categorize(post)
}

/// Wraps an adapter with rule-engine fallback on any adapter failure.
pub struct FallbackClassifier<A> {
    primary: A,
    rules: RuleClassifier,
    fallbacks: AtomicUsize,
}

impl<A: ClassifierAdapter> FallbackClassifier<A> {
    pub fn new(primary: A, rules: RuleClassifier) -> Self {
        FallbackClassifier { primary, rules, fallbacks: AtomicUsize::new(0) }
    }

    /// Number of calls answered by the rule engine instead of the adapter.
    pub fn fallback_count(&self) -> usize {
        self.fallbacks.load(Ordering::Relaxed)
    }
}

impl<A: ClassifierAdapter> ClassifierAdapter for FallbackClassifier<A> {
    fn detect(&self, post: &PostRecord) -> Result<bool, AdapterError> {
        match self.primary.detect(post) {
            Ok(v) => Ok(v),
            Err(_) => {
                self.fallbacks.fetch_add(1, Ordering::Relaxed);
                ClassifierAdapter::detect(&self.rules, post)
            }
        }
    }

    fn categorize(&self, post: &PostRecord) -> Result<PostVerdict, AdapterError> {
        match self.primary.categorize(post) {
            Ok(v) => Ok(v),
            Err(_) => {
                self.fallbacks.fetch_add(1, Ordering::Relaxed);
                ClassifierAdapter::categorize(&self.rules, post)
            }
        }
    }
}

/// Adapter speaking the line protocol to a child process. One in-flight
/// request at a time; a timeout or broken pipe poisons the adapter so later
/// calls fail fast (and typically fall back to rules).
pub struct SubprocessAdapter {
    inner: Mutex<SubprocessInner>,
    timeout: Duration,
}

struct SubprocessInner {
    child: Child,
    stdin: ChildStdin,
    lines: mpsc::Receiver<std::io::Result<String>>,
    broken: bool,
}

impl SubprocessAdapter {
    pub fn spawn(program: &str, args: &[String], timeout: Duration) -> Result<Self, AdapterError> {
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| AdapterError::Io(format!("spawn {program}: {e}")))?;
        let stdin = child.stdin.take().expect("stdin piped");
        let stdout = child.stdout.take().expect("stdout piped");
        let (tx, lines) = mpsc::channel();
        std::thread::spawn(move || {
            let reader = BufReader::new(stdout);
            for line in reader.lines() {
                let stop = line.is_err();
                if tx.send(line).is_err() || stop {
                    break;
                }
            }
        });
        Ok(SubprocessAdapter {
            inner: Mutex::new(SubprocessInner { child, stdin, lines, broken: false }),
            timeout,
        })
    }

    fn call(&self, request: &AdapterRequest) -> Result<AdapterResponse, AdapterError> {
        let mut inner = self.inner.lock().expect("adapter mutex");
        if inner.broken {
            return Err(AdapterError::Broken);
        }
        let mut line = serde_json::to_string(request)
            .map_err(|e| AdapterError::Protocol(e.to_string()))?;
        line.push('\n');
        if let Err(e) = inner.stdin.write_all(line.as_bytes()).and_then(|_| inner.stdin.flush()) {
            inner.broken = true;
            return Err(AdapterError::Io(e.to_string()));
        }
        match inner.lines.recv_timeout(self.timeout) {
            Ok(Ok(reply)) => parse_response(&reply),
            Ok(Err(e)) => {
                inner.broken = true;
                Err(AdapterError::Io(e.to_string()))
            }
            Err(mpsc::RecvTimeoutError::Timeout) => {
                inner.broken = true;
                Err(AdapterError::Timeout(self.timeout))
            }
            Err(mpsc::RecvTimeoutError::Disconnected) => {
                inner.broken = true;
                Err(AdapterError::Io("adapter process closed its output".into()))
            }
        }
    }
}

impl Drop for SubprocessAdapter {
    fn drop(&mut self) {
        if let Ok(mut inner) = self.inner.lock() {
            let _ = inner.child.kill();
            let _ = inner.child.wait();
        }
    }
}

fn parse_response(raw: &str) -> Result<AdapterResponse, AdapterError> {
    let resp: AdapterResponse =
        serde_json::from_str(raw).map_err(|e| AdapterError::Protocol(e.to_string()))?;
    if resp.ok {
        Ok(resp)
    } else {
        Err(AdapterError::Remote(resp.error.unwrap_or_else(|| "unspecified".into())))
    }
}

fn response_detect(resp: AdapterResponse) -> Result<bool, AdapterError> {
    resp.is_piracy
        .ok_or_else(|| AdapterError::Protocol("detect response missing is_piracy".into()))
}

fn response_verdict(resp: AdapterResponse, post: &PostRecord) -> Result<PostVerdict, AdapterError> {
    let v = resp
        .verdict
        .ok_or_else(|| AdapterError::Protocol("categorize response missing verdict".into()))?;
    if v.channel_id != post.channel_id || v.post_id != post.post_id {
        return Err(AdapterError::Protocol(format!(
            "verdict for {}/{} does not match post {}/{}",
            v.channel_id, v.post_id, post.channel_id, post.post_id
        )));
    }
    if v.labels.len() > 3 {
        return Err(AdapterError::Protocol("verdict carries more than 3 labels".into()));
    }
    Ok(v)
}

impl ClassifierAdapter for SubprocessAdapter {
    fn detect(&self, post: &PostRecord) -> Result<bool, AdapterError> {
        let resp = self.call(&AdapterRequest {
            op: AdapterOp::Detect,
            post: post.clone(),
            author_is_bot: false,
        })?;
        response_detect(resp)
    }

    fn categorize(&self, post: &PostRecord) -> Result<PostVerdict, AdapterError> {
        let resp = self.call(&AdapterRequest {
            op: AdapterOp::Categorize,
            post: post.clone(),
            author_is_bot: false,
        })?;
        response_verdict(resp, post)
    }
}

/// Adapter POSTing each request to an HTTP endpoint.
pub struct HttpAdapter {
    agent: ureq::Agent,
    url: String,
}

impl HttpAdapter {
    pub fn new(url: impl Into<String>, timeout: Duration) -> Self {
        let config = ureq::Agent::config_builder().timeout_global(Some(timeout)).build();
        HttpAdapter { agent: config.new_agent(), url: url.into() }
    }

    fn call(&self, request: &AdapterRequest) -> Result<AdapterResponse, AdapterError> {
        let body = serde_json::to_string(request)
            .map_err(|e| AdapterError::Protocol(e.to_string()))?;
        let mut resp = self
            .agent
            .post(&self.url)
            .header("content-type", "application/json")
            .send(body.as_bytes())
            .map_err(|e| AdapterError::Io(e.to_string()))?;
        let status = resp.status().as_u16();
        if status != 200 {
            return Err(AdapterError::Remote(format!("http status {status}")));
        }
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| AdapterError::Io(e.to_string()))?;
        parse_response(&text)
    }
}

impl ClassifierAdapter for HttpAdapter {
    fn detect(&self, post: &PostRecord) -> Result<bool, AdapterError> {
        let resp = self.call(&AdapterRequest {
            op: AdapterOp::Detect,
            post: post.clone(),
            author_is_bot: false,
        })?;
        response_detect(resp)
    }

    fn categorize(&self, post: &PostRecord) -> Result<PostVerdict, AdapterError> {
        let resp = self.call(&AdapterRequest {
            op: AdapterOp::Categorize,
            post: post.clone(),
            author_is_bot: false,
        })?;
        response_verdict(resp, post)
    }
}

/// Serve the wire protocol over stdio using the given backend. Used by the
/// CLI's reference adapter mode; also convenient for loopback testing.
pub fn serve_stdio(
    rules: &RuleClassifier,
    input: impl BufRead,
    mut output: impl Write,
) -> std::io::Result<()> {
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let resp = match serde_json::from_str::<AdapterRequest>(&line) {
            Ok(req) => match req.op {
                AdapterOp::Detect => AdapterResponse::detect(rules.detect(&req.post)),
                AdapterOp::Categorize => match rules.categorize_with(&req.post, req.author_is_bot)
                {
                    Ok(v) => AdapterResponse::verdict(v),
                    Err(e) => AdapterResponse::verdict(PostVerdict {
                        channel_id: e.channel_id,
                        post_id: e.post_id,
                        is_piracy: true,
                        labels: Vec::new(),
                    }),
                },
            },
            Err(e) => AdapterResponse::err(format!("bad request: {e}")),
        };
        serde_json::to_writer(&mut output, &resp)?;
        output.write_all(b"\n")?;
        output.flush()?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::platform::Attachment;
    use crate::taxonomy::labels::Leaf;

    fn piracy_post() -> PostRecord {
        let mut p = PostRecord::new("ch0001", 9, 1_000, "Crimson Harbor 1080p ready");
        p.attachment = Some(Attachment {
            file_name: "ch.mkv".into(),
            file_size_bytes: 1_000,
        });
        p
    }

    #[test]
    fn request_wire_format_is_stable() {
        let req = AdapterRequest {
            op: AdapterOp::Detect,
            post: PostRecord::new("ch0001", 1, 10, "hi"),
            author_is_bot: false,
        };
        let json = serde_json::to_value(&req).unwrap();
        assert_eq!(json["op"], "detect");
        assert_eq!(json["post"]["channel_id"], "ch0001");
        assert_eq!(json["author_is_bot"], false);
    }

    #[test]
    fn rule_engine_implements_adapter_contract() {
        let rules = RuleClassifier::default();
        let adapter: &dyn ClassifierAdapter = &rules;
        let post = piracy_post();
        assert!(adapter.detect(&post).unwrap());
        let v = adapter.categorize(&post).unwrap();
        assert_eq!(v.primary(), Some(Leaf::DirectDownload));
        let benign = classify_post(adapter, &PostRecord::new("ch0001", 2, 10, "hello")).unwrap();
        assert!(!benign.is_piracy);
    }

    struct AlwaysFails;
    impl ClassifierAdapter for AlwaysFails {
        fn detect(&self, _post: &PostRecord) -> Result<bool, AdapterError> {
            Err(AdapterError::Io("down".into()))
        }
        fn categorize(&self, _post: &PostRecord) -> Result<PostVerdict, AdapterError> {
            Err(AdapterError::Io("down".into()))
        }
    }

    #[test]
    fn fallback_uses_rules_when_adapter_fails() {
        let fb = FallbackClassifier::new(AlwaysFails, RuleClassifier::default());
        let post = piracy_post();
        assert!(ClassifierAdapter::detect(&fb, &post).unwrap());
        let v = ClassifierAdapter::categorize(&fb, &post).unwrap();
        assert!(v.is_piracy);
        assert_eq!(fb.fallback_count(), 2);
    }

    #[test]
    fn serve_stdio_round_trips_requests() {
        let rules = RuleClassifier::default();
        let post = piracy_post();
        let mut input = Vec::new();
        for op in [AdapterOp::Detect, AdapterOp::Categorize] {
            let req = AdapterRequest { op, post: post.clone(), author_is_bot: false };
            input.extend_from_slice(serde_json::to_string(&req).unwrap().as_bytes());
            input.push(b'\n');
        }
        let mut output = Vec::new();
        serve_stdio(&rules, &input[..], &mut output).unwrap();
        let lines: Vec<&str> = std::str::from_utf8(&output).unwrap().lines().collect();
        assert_eq!(lines.len(), 2);
        let detect: AdapterResponse = serde_json::from_str(lines[0]).unwrap();
        assert_eq!(detect.is_piracy, Some(true));
        let categorize: AdapterResponse = serde_json::from_str(lines[1]).unwrap();
        assert_eq!(categorize.verdict.unwrap().primary(), Some(Leaf::DirectDownload));
    }

    #[test]
    fn malformed_request_yields_error_response_line() {
        let rules = RuleClassifier::default();
        let mut output = Vec::new();
        serve_stdio(&rules, &b"{not json}\n"[..], &mut output).unwrap();
        let resp: AdapterResponse =
            serde_json::from_str(std::str::from_utf8(&output).unwrap().trim()).unwrap();
        assert!(!resp.ok);
        assert!(resp.error.is_some());
    }

    #[test]
    fn mismatched_verdict_rejected() {
        let post = PostRecord::new("ch0001", 1, 10, "x");
        let resp = AdapterResponse::verdict(PostVerdict::benign("ch0002", 1));
        assert!(matches!(response_verdict(resp, &post), Err(AdapterError::Protocol(_))));
    }
}
