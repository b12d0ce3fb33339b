//! Bounded random samples of a stream.
//!
//! [`Reservoir`] keeps `k` items with inclusion probability proportional to
//! their measure: an item arriving at position `j > k` is accepted with
//! probability `min(1, k·m/T_j)` (where `T_j` is the total measure seen so far)
//! and, if accepted, overwrites a uniformly chosen slot. With unit measures this
//! is the classic uniform reservoir.
//!
//! [`WindowSampler`] keeps a uniform sample of the items whose event time lies
//! in a sliding window, by priority sampling: each arrival draws a priority in
//! `[0, 1)` and the sample is the `k` smallest priorities among live items.

use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{RngSeed, StreamRng};

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedItem<T> {
    pub payload: T,
    measure: f64,
}

impl<T> WeightedItem<T> {
    pub fn new(payload: T, measure: f64) -> Result<Self> {
        if !(measure > 0.0 && measure.is_finite()) {
            return Err(Error::InvalidMeasure(measure));
        }
        Ok(WeightedItem { payload, measure })
    }

    pub fn unit(payload: T) -> Self {
        WeightedItem {
            payload,
            measure: 1.0,
        }
    }

    pub fn measure(&self) -> f64 {
        self.measure
    }
}

/// Weighted k-reservoir. Single owner; the generator is private to the instance.
#[derive(Debug, Clone)]
pub struct Reservoir<T> {
    capacity: usize,
    items: Vec<WeightedItem<T>>,
    total_weight: f64,
    count_seen: u64,
    rng: StreamRng,
}

impl<T> Reservoir<T> {
    pub fn new(capacity: usize, seed: RngSeed) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::domain("capacity", "must be at least 1"));
        }
        Ok(Reservoir {
            capacity,
            items: Vec::with_capacity(capacity),
            total_weight: 0.0,
            count_seen: 0,
            rng: seed.rng(),
        })
    }

    /// Offers one item. Returns whether it entered the reservoir.
    pub fn offer(&mut self, item: WeightedItem<T>) -> bool {
        self.count_seen += 1;
        self.total_weight += item.measure;
        if self.items.len() < self.capacity {
            self.items.push(item);
            return true;
        }
        let p = (self.capacity as f64 * item.measure / self.total_weight).min(1.0);
        if self.rng.random::<f64>() < p {
            let slot = self.rng.random_range(0..self.capacity);
            self.items[slot] = item;
            true
        } else {
            false
        }
    }

    pub fn offer_weighted(&mut self, payload: T, measure: f64) -> Result<bool> {
        Ok(self.offer(WeightedItem::new(payload, measure)?))
    }

    /// `min(1, k·measure / T_n)` for an item of the given measure at the current stage.
    pub fn inclusion_probability(&self, item_measure: f64) -> Result<f64> {
        if !(item_measure > 0.0 && item_measure.is_finite()) {
            return Err(Error::InvalidMeasure(item_measure));
        }
        if self.total_weight <= 0.0 {
            return Err(Error::UndefinedState(
                "inclusion probability needs a reservoir with positive total weight",
            ));
        }
        Ok((self.capacity as f64 * item_measure / self.total_weight).min(1.0))
    }

    pub fn items(&self) -> &[WeightedItem<T>] {
        &self.items
    }

    pub fn payloads(&self) -> impl Iterator<Item = &T> {
        self.items.iter().map(|i| &i.payload)
    }

    pub fn snapshot(&self) -> Vec<T>
    where
        T: Clone,
    {
        self.payloads().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn count_seen(&self) -> u64 {
        self.count_seen
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowMode {
    /// k smallest priorities among live items: a uniform k-subset of the window.
    #[default]
    Exact,
    /// Shrinks on expiry, fills directly while not full, and once full replaces a
    /// random slot with probability `k / live`. Not uniform.
    Compat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LatePolicy {
    /// A timestamp older than the newest one seen is an error.
    #[default]
    Reject,
    /// Late items are treated as arriving at the newest timestamp.
    Clamp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowConfig {
    pub capacity: usize,
    /// Items with `newest - timestamp >= window_length` are expired.
    pub window_length: i64,
    pub mode: WindowMode,
    pub late: LatePolicy,
}

impl WindowConfig {
    pub fn new(capacity: usize, window_length: i64) -> Self {
        WindowConfig {
            capacity,
            window_length,
            mode: WindowMode::Exact,
            late: LatePolicy::Reject,
        }
    }
}

#[derive(Debug, Clone)]
struct Candidate<T> {
    item: T,
    timestamp: i64,
    priority: f64,
    seq: u64,
    /// Later arrivals with a smaller priority. At `capacity` the item can never
    /// be sampled again and is dropped.
    beaten_by: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowEntry<'a, T> {
    pub item: &'a T,
    pub timestamp: i64,
    /// Always 0 in compat mode.
    pub priority: f64,
}

#[derive(Debug, Clone)]
pub struct WindowSampler<T> {
    config: WindowConfig,
    newest: Option<i64>,
    seq: u64,
    rng: StreamRng,
    // exact mode
    candidates: VecDeque<Candidate<T>>,
    // compat mode
    slots: Vec<(T, i64)>,
    live_counts: VecDeque<(i64, u64)>,
    live_total: u64,
}

impl<T> WindowSampler<T> {
    pub fn new(config: WindowConfig, seed: RngSeed) -> Result<Self> {
        if config.capacity == 0 {
            return Err(Error::domain("capacity", "must be at least 1"));
        }
        if config.window_length <= 0 {
            return Err(Error::domain("window_length", "must be positive"));
        }
        Ok(WindowSampler {
            config,
            newest: None,
            seq: 0,
            rng: seed.rng(),
            candidates: VecDeque::new(),
            slots: Vec::new(),
            live_counts: VecDeque::new(),
            live_total: 0,
        })
    }

    pub fn config(&self) -> &WindowConfig {
        &self.config
    }

    pub fn newest(&self) -> Option<i64> {
        self.newest
    }

    pub fn offer(&mut self, item: T, timestamp: i64) -> Result<()> {
        let timestamp = match self.newest {
            Some(newest) if timestamp < newest => match self.config.late {
                LatePolicy::Reject => {
                    return Err(Error::Ordering {
                        newest,
                        got: timestamp,
                    })
                }
                LatePolicy::Clamp => newest,
            },
            _ => timestamp,
        };
        self.advance_to(timestamp);
        let seq = self.seq;
        self.seq += 1;
        match self.config.mode {
            WindowMode::Exact => self.offer_exact(item, timestamp, seq),
            WindowMode::Compat => self.offer_compat(item, timestamp),
        }
        Ok(())
    }

    fn offer_exact(&mut self, item: T, timestamp: i64, seq: u64) {
        let priority: f64 = self.rng.random();
        let k = self.config.capacity;
        // Ties go to the earlier arrival, so only strictly larger priorities are beaten.
        for c in self.candidates.iter_mut() {
            if c.priority > priority {
                c.beaten_by += 1;
            }
        }
        self.candidates.retain(|c| c.beaten_by < k);
        self.candidates.push_back(Candidate {
            item,
            timestamp,
            priority,
            seq,
            beaten_by: 0,
        });
    }

    fn offer_compat(&mut self, item: T, timestamp: i64) {
        match self.live_counts.back_mut() {
            Some((t, n)) if *t == timestamp => *n += 1,
            _ => self.live_counts.push_back((timestamp, 1)),
        }
        self.live_total += 1;
        let k = self.config.capacity;
        if self.slots.len() < k {
            self.slots.push((item, timestamp));
        } else if self.rng.random::<f64>() < k as f64 / self.live_total as f64 {
            let slot = self.rng.random_range(0..k);
            self.slots[slot] = (item, timestamp);
        }
    }

    /// Moves the window clock forward and evicts expired items. Times at or
    /// before the current clock are a no-op.
    pub fn advance_to(&mut self, now: i64) {
        if self.newest.is_some_and(|n| now <= n) {
            return;
        }
        self.newest = Some(now);
        let len = self.config.window_length;
        let expired = |ts: i64| now - ts >= len;
        while self.candidates.front().is_some_and(|c| expired(c.timestamp)) {
            self.candidates.pop_front();
        }
        while let Some(&(ts, n)) = self.live_counts.front() {
            if !expired(ts) {
                break;
            }
            self.live_counts.pop_front();
            self.live_total -= n;
        }
        self.slots.retain(|&(_, ts)| !expired(ts));
    }

    /// The current sample, in arrival order.
    pub fn entries(&self) -> Vec<WindowEntry<'_, T>> {
        match self.config.mode {
            WindowMode::Exact => {
                let k = self.config.capacity;
                let mut picked: Vec<&Candidate<T>> = self.candidates.iter().collect();
                if picked.len() > k {
                    picked.select_nth_unstable_by(k - 1, |a, b| {
                        a.priority.total_cmp(&b.priority).then(a.seq.cmp(&b.seq))
                    });
                    picked.truncate(k);
                }
                picked.sort_unstable_by_key(|c| c.seq);
                picked
                    .into_iter()
                    .map(|c| WindowEntry {
                        item: &c.item,
                        timestamp: c.timestamp,
                        priority: c.priority,
                    })
                    .collect()
            }
            WindowMode::Compat => self
                .slots
                .iter()
                .map(|(item, ts)| WindowEntry {
                    item,
                    timestamp: *ts,
                    priority: 0.0,
                })
                .collect(),
        }
    }

    pub fn sample(&self) -> Vec<&T> {
        self.entries().into_iter().map(|e| e.item).collect()
    }

    /// Number of items in the sample, at most `capacity`.
    pub fn len(&self) -> usize {
        match self.config.mode {
            WindowMode::Exact => self.candidates.len().min(self.config.capacity),
            WindowMode::Compat => self.slots.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Items held in memory, including exact-mode candidates not currently sampled.
    pub fn buffered(&self) -> usize {
        match self.config.mode {
            WindowMode::Exact => self.candidates.len(),
            WindowMode::Compat => self.slots.len(),
        }
    }
}
