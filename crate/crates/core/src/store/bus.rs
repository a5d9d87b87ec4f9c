// Copyright 2026 tangleshare contributors
// SPDX-License-Identifier: Apache-2.0

//! Hierarchical publish/subscribe bus. Topics are slash-separated paths
//! like `provider1/vehicle7/speed`; subscribing to a topic delivers events
//! published on it and on every topic below it.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use parking_lot::Mutex;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BusError {
    #[error("invalid topic {0:?}: {1}")]
    InvalidTopic(String, &'static str),
}

/// A validated topic path: one or more segments of `[a-z0-9-]+` joined by
/// `/`, at most 256 bytes overall.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Topic(String);

impl Topic {
    pub fn new(path: &str) -> Result<Self, BusError> {
        let invalid = |reason| BusError::InvalidTopic(path.to_string(), reason);
        if path.is_empty() {
            return Err(invalid("empty"));
        }
        if path.len() > 256 {
            return Err(invalid("longer than 256 bytes"));
        }
        for segment in path.split('/') {
            if segment.is_empty() {
                return Err(invalid("empty segment"));
            }
            if !segment.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'-') {
                return Err(invalid("segments must match [a-z0-9-]+"));
            }
        }
        Ok(Topic(path.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn segments(&self) -> impl Iterator<Item = &str> {
        self.0.split('/')
    }

    /// True when `self` is `other` or an ancestor of `other`.
    pub fn covers(&self, other: &Topic) -> bool {
        let mut mine = self.segments();
        let mut theirs = other.segments();
        loop {
            match (mine.next(), theirs.next()) {
                (None, _) => return true,
                (Some(_), None) => return false,
                (Some(a), Some(b)) if a == b => continue,
                _ => return false,
            }
        }
    }
}

impl fmt::Display for Topic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One delivered publication.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub topic: Topic,
    /// Position within the exact topic it was published on, starting at 1.
    pub seq: u64,
    pub data: Vec<u8>,
}

type Queue = Arc<Mutex<VecDeque<Event>>>;

struct Subscriber {
    id: u64,
    topic: Topic,
    queue: Queue,
}

#[derive(Default)]
struct BusInner {
    subscribers: Vec<Subscriber>,
    seqs: HashMap<Topic, u64>,
    next_id: u64,
}

/// In-process broker. Cheap to clone handles via `Arc` if needed; all
/// operations lock briefly and never block on subscribers.
#[derive(Default)]
pub struct Bus {
    inner: Mutex<BusInner>,
}

impl Bus {
    pub fn new() -> Self {
        Self::default()
    }

    /// Publish `data` on `topic`, delivering to every subscription that
    /// covers the topic. Returns the per-topic sequence number.
    pub fn publish(&self, topic: &Topic, data: &[u8]) -> u64 {
        let mut inner = self.inner.lock();
        let seq = inner.seqs.entry(topic.clone()).or_insert(0);
        *seq += 1;
        let seq = *seq;
        let event = Event { topic: topic.clone(), seq, data: data.to_vec() };
        for sub in &inner.subscribers {
            if sub.topic.covers(topic) {
                sub.queue.lock().push_back(event.clone());
            }
        }
        seq
    }

    /// Subscribe to `topic` and everything beneath it. Dropping the returned
    /// subscription unsubscribes.
    pub fn subscribe(self: &Arc<Self>, topic: Topic) -> Subscription {
        let queue: Queue = Arc::new(Mutex::new(VecDeque::new()));
        let mut inner = self.inner.lock();
        inner.next_id += 1;
        let id = inner.next_id;
        inner.subscribers.push(Subscriber { id, topic: topic.clone(), queue: queue.clone() });
        Subscription { bus: Arc::clone(self), id, topic, queue }
    }

    fn unsubscribe(&self, id: u64) {
        self.inner.lock().subscribers.retain(|s| s.id != id);
    }

    pub fn subscriber_count(&self) -> usize {
        self.inner.lock().subscribers.len()
    }
}

/// Receiving end of a subscription; poll-based, no background threads.
pub struct Subscription {
    bus: Arc<Bus>,
    id: u64,
    topic: Topic,
    queue: Queue,
}

impl Subscription {
    pub fn topic(&self) -> &Topic {
        &self.topic
    }

    /// Next pending event, if any.
    pub fn try_recv(&self) -> Option<Event> {
        self.queue.lock().pop_front()
    }

    /// All pending events, in delivery order.
    pub fn drain(&self) -> Vec<Event> {
        self.queue.lock().drain(..).collect()
    }
}

impl Drop for Subscription {
    fn drop(&mut self) {
        self.bus.unsubscribe(self.id);
    }
}
