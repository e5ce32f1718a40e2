//! Messaging-platform access layer: record types, the client trait the rest
//! of the pipeline is written against, and a deterministic in-process
//! simulator used for testing and offline runs.

pub mod sim;

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Hard cap on attachment size; mirrors the hosting platform's 2 GiB limit.
pub const MAX_ATTACHMENT_BYTES: u64 = 2 * 1024 * 1024 * 1024;

/// What an in-platform link points at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkKind {
    Channel,
    Bot,
    Invite,
}

/// A link to another entity on the same platform. `target` is a handle for
/// channel/bot links and an opaque invite token for invite links.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct InternalLink {
    pub kind: LinkKind,
    pub target: String,
}

impl InternalLink {
    pub fn channel(target: impl Into<String>) -> Self {
        InternalLink { kind: LinkKind::Channel, target: target.into() }
    }
    pub fn bot(target: impl Into<String>) -> Self {
        InternalLink { kind: LinkKind::Bot, target: target.into() }
    }
    pub fn invite(token: impl Into<String>) -> Self {
        InternalLink { kind: LinkKind::Invite, target: token.into() }
    }
}

/// File attached to a post.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attachment {
    pub file_name: String,
    pub file_size_bytes: u64,
}

/// Channel or bot metadata as returned by the platform.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelRecord {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub handle: Option<String>,
    pub title: String,
    pub subscriber_count: u64,
    /// Unix seconds of the oldest visible post; 0 when the feed is empty.
    pub earliest_post_time: i64,
    pub is_bot: bool,
}

/// One post in a channel feed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PostRecord {
    pub channel_id: String,
    pub post_id: i64,
    /// Unix seconds.
    pub time: i64,
    pub text: String,
    pub view_count: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub internal_links: Vec<InternalLink>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub external_links: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attachment: Option<Attachment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub language_tag: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub screenshot_ref: Option<String>,
}

impl PostRecord {
    pub fn new(channel_id: impl Into<String>, post_id: i64, time: i64, text: impl Into<String>) -> Self {
        PostRecord {
            channel_id: channel_id.into(),
            post_id,
            time,
            text: text.into(),
            view_count: 0,
            internal_links: Vec::new(),
            external_links: Vec::new(),
            attachment: None,
            language_tag: None,
            screenshot_ref: None,
        }
    }
}

/// Errors surfaced by platform access.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum PlatformError {
    /// Transient throttle; the caller should back off and retry.
    #[error("rate limited")]
    RateLimited,
    /// Network or protocol failure; retryable.
    #[error("transport failure: {0}")]
    Transport(String),
    /// The entity existed but has been removed (takedown or self-deletion).
    #[error("channel gone: {0}")]
    ChannelGone(String),
    /// The id was never known to the platform.
    #[error("unknown entity: {0}")]
    UnknownEntity(String),
}

impl PlatformError {
    /// Retryable errors are transient; the rest are terminal for the entity.
    pub fn is_retryable(&self) -> bool {
        matches!(self, PlatformError::RateLimited | PlatformError::Transport(_))
    }
}

/// Read-only platform access. Implementations must be safe to call from a
/// single-threaded driver in any order; `fetch_posts` returns posts newest
/// first, at most `limit` of them.
pub trait PlatformClient {
    /// Resolve a public handle. `Ok(None)` means the handle is unassigned.
    fn resolve_handle(&self, handle: &str) -> Result<Option<ChannelRecord>, PlatformError>;

    /// Metadata for a known entity id.
    fn channel_meta(&self, channel_id: &str) -> Result<ChannelRecord, PlatformError>;

    /// Newest-first feed page for a channel. Bots have no feed; asking for
    /// one returns an empty page rather than an error.
    fn fetch_posts(&self, channel_id: &str, limit: usize) -> Result<Vec<PostRecord>, PlatformError>;
}

impl fmt::Display for LinkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinkKind::Channel => f.write_str("channel"),
            LinkKind::Bot => f.write_str("bot"),
            LinkKind::Invite => f.write_str("invite"),
        }
    }
}

/// Retry a platform call with fixed backoff on retryable errors.
/// `sleeper` is injected so tests can observe the schedule without waiting.
pub fn with_retries<T>(
    attempts: usize,
    mut sleeper: impl FnMut(usize),
    mut call: impl FnMut() -> Result<T, PlatformError>,
) -> Result<T, PlatformError> {
    let attempts = attempts.max(1);
    let mut last = None;
    for attempt in 0..attempts {
        match call() {
            Ok(v) => return Ok(v),
            Err(e) if e.is_retryable() && attempt + 1 < attempts => {
                sleeper(attempt);
                last = Some(e);
            }
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("loop ran at least once"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn link_kind_wire_names() {
        assert_eq!(serde_json::to_string(&LinkKind::Channel).unwrap(), "\"channel\"");
        assert_eq!(serde_json::to_string(&LinkKind::Bot).unwrap(), "\"bot\"");
        assert_eq!(serde_json::to_string(&LinkKind::Invite).unwrap(), "\"invite\"");
    }

    #[test]
    fn post_record_optional_fields_omitted() {
        let p = PostRecord::new("ch0001", 1, 1000, "hello");
        let json = serde_json::to_value(&p).unwrap();
        assert!(json.get("attachment").is_none());
        assert!(json.get("internal_links").is_none());
        assert!(json.get("language_tag").is_none());
        let back: PostRecord = serde_json::from_value(json).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn retry_helper_honors_schedule() {
        let mut calls = 0;
        let mut sleeps = Vec::new();
        let out = with_retries(
            3,
            |a| sleeps.push(a),
            || {
                calls += 1;
                if calls < 3 {
                    Err(PlatformError::RateLimited)
                } else {
                    Ok(calls)
                }
            },
        );
        assert_eq!(out.unwrap(), 3);
        assert_eq!(sleeps, vec![0, 1]);
    }

    #[test]
    fn retry_helper_fails_fast_on_terminal_errors() {
        let mut calls = 0;
        let out: Result<(), _> = with_retries(
            5,
            |_| panic!("must not sleep on terminal error"),
            || {
                calls += 1;
                Err(PlatformError::ChannelGone("ch0009".into()))
            },
        );
        assert_eq!(out.unwrap_err(), PlatformError::ChannelGone("ch0009".into()));
        assert_eq!(calls, 1);
    }

    #[test]
    fn retry_helper_exhausts_budget() {
        let mut calls = 0;
        let out: Result<(), _> = with_retries(
            3,
            |_| {},
            || {
                calls += 1;
                Err(PlatformError::RateLimited)
            },
        );
        assert_eq!(out.unwrap_err(), PlatformError::RateLimited);
        assert_eq!(calls, 3);
    }
}
