//! Step delivery. A ticket says "session X should run its step number N";
//! workers lease tickets, run the step, and ack. At most one ticket per
//! session is leased at a time, and a ticket whose step already ran (the
//! session's step log is past N) is simply acked, so redelivery is harmless.

use std::collections::{HashSet, VecDeque};
use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepTicket {
    pub session_id: String,
    pub step_no: u64,
}

#[derive(Debug, PartialEq, Eq)]
pub struct StepLease {
    pub ticket: StepTicket,
}

pub trait StepQueue: Send + Sync {
    fn enqueue(&self, ticket: StepTicket);
    /// Waits up to `timeout` for a ticket whose session is not leased.
    fn lease(&self, timeout: Duration) -> Option<StepLease>;
    /// Finishes a lease.
    fn ack(&self, lease: StepLease);
    /// Returns a leased ticket to the front of the queue.
    fn nack(&self, lease: StepLease);
}

#[derive(Default)]
struct Inner {
    pending: VecDeque<StepTicket>,
    leased: HashSet<String>,
}

/// In-process queue.
#[derive(Default)]
pub struct MemoryStepQueue {
    inner: Mutex<Inner>,
    ready: Condvar,
}

impl MemoryStepQueue {
    pub fn len(&self) -> usize {
        self.inner.lock().unwrap().pending.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl StepQueue for MemoryStepQueue {
    fn enqueue(&self, ticket: StepTicket) {
        let mut inner = self.inner.lock().unwrap();
        if !inner.pending.contains(&ticket) {
            inner.pending.push_back(ticket);
        }
        self.ready.notify_all();
    }

    fn lease(&self, timeout: Duration) -> Option<StepLease> {
        let deadline = Instant::now() + timeout;
        let mut inner = self.inner.lock().unwrap();
        loop {
            let free = inner.pending.iter().position(|t| !inner.leased.contains(&t.session_id));
            if let Some(i) = free {
                let ticket = inner.pending.remove(i).expect("index in range");
                inner.leased.insert(ticket.session_id.clone());
                return Some(StepLease { ticket });
            }
            let now = Instant::now();
            if now >= deadline {
                return None;
            }
            inner = self.ready.wait_timeout(inner, deadline - now).unwrap().0;
        }
    }

    fn ack(&self, lease: StepLease) {
        self.inner.lock().unwrap().leased.remove(&lease.ticket.session_id);
        self.ready.notify_all();
    }

    fn nack(&self, lease: StepLease) {
        let mut inner = self.inner.lock().unwrap();
        inner.leased.remove(&lease.ticket.session_id);
        inner.pending.push_front(lease.ticket);
        self.ready.notify_all();
    }
}
