use std::collections::{BTreeMap, VecDeque};

use super::{AiError, ModelRequest, ModelResponse, QueryOptions, RequestId};
use crate::model::FrameDuration;

/// Outcome reported by a backend: `Ok(text)` or `Err(reason)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackendReply {
    pub request_id: RequestId,
    pub outcome: Result<String, String>,
}

/// The prompt-to-response boundary.
///
/// `submit` is called on the frame thread. A backend that works on other
/// threads hands results back through `poll`, which the hub calls once per
/// frame; replies may come back in any order.
pub trait Backend: Send {
    fn submit(&mut self, request: &ModelRequest, frame: u64);
    fn poll(&mut self, frame: u64) -> Vec<BackendReply>;
}

struct Pending {
    id: RequestId,
    deadline: u64,
}

struct Slot {
    backend: Box<dyn Backend>,
    pending: VecDeque<Pending>,
    ready: BTreeMap<RequestId, Result<String, String>>,
}

/// Routes queries to named backends and releases responses in request order.
pub struct AiHub {
    frame_duration: FrameDuration,
    slots: BTreeMap<String, Slot>,
    next_id: RequestId,
    /// Failures for queries to unknown backends, released at the next drain.
    orphans: Vec<ModelResponse>,
}

impl std::fmt::Debug for AiHub {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AiHub")
            .field("backends", &self.slots.keys().collect::<Vec<_>>())
            .field("next_id", &self.next_id)
            .field("pending", &self.pending_count())
            .finish()
    }
}

impl AiHub {
    pub fn new(frame_duration: FrameDuration) -> Self {
        Self {
            frame_duration,
            slots: BTreeMap::new(),
            next_id: 0,
            orphans: Vec::new(),
        }
    }

    pub fn register(&mut self, name: impl Into<String>, backend: Box<dyn Backend>) -> Result<(), AiError> {
        let name = name.into();
        if self.slots.contains_key(&name) {
            return Err(AiError::DuplicateBackend(name));
        }
        self.slots.insert(
            name,
            Slot {
                backend,
                pending: VecDeque::new(),
                ready: BTreeMap::new(),
            },
        );
        Ok(())
    }

    pub fn has_backend(&self, name: &str) -> bool {
        self.slots.contains_key(name)
    }

    /// Issues a request during `frame`. The earliest possible response is
    /// released by the drain of the following frame.
    pub fn query(
        &mut self,
        backend: &str,
        prompt: impl Into<String>,
        options: QueryOptions,
        frame: u64,
    ) -> Result<ModelRequest, AiError> {
        let request = ModelRequest::new(self.next_id, prompt, options)?;
        self.next_id += 1;
        match self.slots.get_mut(backend) {
            Some(slot) => {
                let timeout = self.frame_duration.frames_for(request.timeout_seconds).max(1);
                slot.pending.push_back(Pending {
                    id: request.request_id,
                    deadline: frame + timeout,
                });
                slot.backend.submit(&request, frame);
            }
            None => self.orphans.push(ModelResponse::failed(
                request.request_id,
                backend,
                format!("backend `{backend}` is not registered"),
            )),
        }
        Ok(request)
    }

    /// Responses due at `frame`, grouped by backend name and in request order
    /// within each backend.
    pub fn drain(&mut self, frame: u64) -> Vec<ModelResponse> {
        let mut out = std::mem::take(&mut self.orphans);
        for (name, slot) in &mut self.slots {
            for reply in slot.backend.poll(frame) {
                if slot.pending.iter().any(|p| p.id == reply.request_id) {
                    slot.ready.entry(reply.request_id).or_insert(reply.outcome);
                }
            }
            while let Some(front) = slot.pending.front() {
                let response = match slot.ready.remove(&front.id) {
                    Some(Ok(text)) => ModelResponse::ok(front.id, name, text),
                    Some(Err(reason)) => ModelResponse::failed(front.id, name, reason),
                    None if frame >= front.deadline => ModelResponse::timeout(front.id, name),
                    None => break,
                };
                slot.pending.pop_front();
                out.push(response);
            }
        }
        out
    }

    /// Fails everything still outstanding.
    pub fn close(&mut self) -> Vec<ModelResponse> {
        let mut out = std::mem::take(&mut self.orphans);
        for (name, slot) in &mut self.slots {
            for p in slot.pending.drain(..) {
                out.push(ModelResponse::failed(p.id, name, "session ended"));
            }
            slot.ready.clear();
        }
        out
    }

    pub fn pending_count(&self) -> usize {
        self.orphans.len() + self.slots.values().map(|s| s.pending.len()).sum::<usize>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ai::{MockBackend, MockRule, MockScript, ResponseStatus};

    fn mock(rules: &[(&str, &str, u64)], strict: bool) -> Box<MockBackend> {
        Box::new(MockBackend::new(MockScript {
            rules: rules.iter().map(|(m, r, d)| MockRule::new(*m, *r, *d)).collect(),
            strict,
        }))
    }

    fn run(hub: &mut AiHub, frames: std::ops::Range<u64>) -> Vec<(u64, ModelResponse)> {
        frames
            .flat_map(|f| hub.drain(f).into_iter().map(move |r| (f, r)))
            .collect()
    }

    #[test]
    fn delay_counts_frames() {
        let mut hub = AiHub::new(FrameDuration::SIXTIETH);
        hub.register("mock", mock(&[("poem", "ode to a mug", 3)], true))
            .unwrap();
        let req = hub.query("mock", "write a poem", QueryOptions::default(), 10).unwrap();
        let got = run(&mut hub, 11..20);
        assert_eq!(
            got,
            vec![(13, ModelResponse::ok(req.request_id, "mock", "ode to a mug".into()))]
        );
    }

    #[test]
    fn slow_request_holds_back_later_ones() {
        let mut hub = AiHub::new(FrameDuration::SIXTIETH);
        hub.register("mock", mock(&[("slow", "s", 5), ("fast", "f", 1)], true))
            .unwrap();
        hub.query("mock", "slow", QueryOptions::default(), 0).unwrap();
        hub.query("mock", "fast", QueryOptions::default(), 0).unwrap();
        let got: Vec<_> = run(&mut hub, 1..10)
            .into_iter()
            .map(|(f, r)| (f, r.request_id))
            .collect();
        assert_eq!(got, vec![(5, 0), (5, 1)]);
    }

    #[test]
    fn timeout_uses_simulated_frames() {
        let mut hub = AiHub::new(FrameDuration::SIXTIETH);
        hub.register("mock", mock(&[("x", "late", 100)], true)).unwrap();
        let options = QueryOptions {
            timeout_seconds: 0.5,
            ..QueryOptions::default()
        };
        hub.query("mock", "x", options, 0).unwrap();
        let got = run(&mut hub, 1..200);
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].0, 30);
        assert_eq!(got[0].1.status, ResponseStatus::Timeout);
    }

    #[test]
    fn unknown_backend_fails_at_next_drain() {
        let mut hub = AiHub::new(FrameDuration::SIXTIETH);
        let req = hub.query("cloud", "hello", QueryOptions::default(), 4).unwrap();
        let got = hub.drain(5);
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].request_id, req.request_id);
        assert_eq!(got[0].status, ResponseStatus::Failed);
        assert!(got[0].reason.as_deref().unwrap().contains("cloud"));
    }

    #[test]
    fn close_fails_pending() {
        let mut hub = AiHub::new(FrameDuration::SIXTIETH);
        hub.register("mock", mock(&[("x", "y", 50)], true)).unwrap();
        hub.query("mock", "x", QueryOptions::default(), 0).unwrap();
        assert_eq!(hub.pending_count(), 1);
        let closed = hub.close();
        assert_eq!(closed[0].reason.as_deref(), Some("session ended"));
        assert_eq!(hub.pending_count(), 0);
        assert!(hub.drain(100).is_empty());
    }

    #[test]
    fn request_validation() {
        let mut hub = AiHub::new(FrameDuration::SIXTIETH);
        assert_eq!(
            hub.query("m", "", QueryOptions::default(), 0),
            Err(AiError::EmptyPrompt)
        );
        let hot = QueryOptions {
            temperature: 2.5,
            ..QueryOptions::default()
        };
        assert_eq!(hub.query("m", "p", hot, 0), Err(AiError::InvalidTemperature(2.5)));
        assert!(hub.register("a", mock(&[], true)).is_ok());
        assert_eq!(
            hub.register("a", mock(&[], true)),
            Err(AiError::DuplicateBackend("a".into()))
        );
    }
}
