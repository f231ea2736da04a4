use serde::{Deserialize, Serialize};

use super::{AiError, Backend, BackendReply, ModelRequest, RequestId};

pub const MOCK_SCRIPT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MockMatch {
    pub substring: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MockResponse {
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct MockRule {
    #[serde(rename = "match")]
    pub matcher: MockMatch,
    pub response: MockResponse,
    #[serde(default)]
    pub delay_frames: u64,
}

impl MockRule {
    pub fn new(substring: impl Into<String>, text: impl Into<String>, delay_frames: u64) -> Self {
        Self {
            matcher: MockMatch {
                substring: substring.into(),
            },
            response: MockResponse { text: text.into() },
            delay_frames,
        }
    }
}

/// Mock backend script. The first rule whose substring occurs in the prompt
/// answers. Unmatched prompts fail in strict mode and are echoed otherwise.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MockScript {
    pub rules: Vec<MockRule>,
    pub strict: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MockScriptFile {
    version: u32,
    #[serde(default)]
    rules: Vec<MockRule>,
    #[serde(default)]
    strict: bool,
}

impl MockScript {
    pub fn from_json(text: &str) -> Result<Self, AiError> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| AiError::Malformed {
            what: "mock script",
            message: e.to_string(),
        })?;
        let found = value.get("version").and_then(|v| v.as_u64()).unwrap_or(0) as u32;
        if found != MOCK_SCRIPT_VERSION {
            return Err(AiError::UnsupportedVersion {
                what: "mock script",
                found,
                supported: MOCK_SCRIPT_VERSION,
            });
        }
        let file: MockScriptFile = serde_json::from_value(value).map_err(|e| AiError::Malformed {
            what: "mock script",
            message: e.to_string(),
        })?;
        Ok(Self {
            rules: file.rules,
            strict: file.strict,
        })
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(MockScriptFile {
            version: MOCK_SCRIPT_VERSION,
            rules: self.rules.clone(),
            strict: self.strict,
        })
        .expect("mock script serializes")
    }
}

/// Deterministic scripted backend.
#[derive(Debug, Clone)]
pub struct MockBackend {
    script: MockScript,
    /// (ready frame, id, outcome), kept sorted.
    queued: Vec<(u64, RequestId, Result<String, String>)>,
    requests: Vec<ModelRequest>,
}

impl MockBackend {
    pub fn new(script: MockScript) -> Self {
        Self {
            script,
            queued: Vec::new(),
            requests: Vec::new(),
        }
    }

    /// Every request submitted so far.
    pub fn requests(&self) -> &[ModelRequest] {
        &self.requests
    }
}

impl Backend for MockBackend {
    fn submit(&mut self, request: &ModelRequest, frame: u64) {
        self.requests.push(request.clone());
        let rule = self
            .script
            .rules
            .iter()
            .find(|r| request.prompt.contains(&r.matcher.substring));
        let (delay, outcome) = match rule {
            Some(rule) => (rule.delay_frames, Ok(rule.response.text.clone())),
            None if self.script.strict => (0, Err("no scripted response".to_string())),
            None => (0, Ok(request.prompt.clone())),
        };
        let entry = (frame + delay, request.request_id, outcome);
        let slot = self.queued.partition_point(|q| (q.0, q.1) <= (entry.0, entry.1));
        self.queued.insert(slot, entry);
    }

    fn poll(&mut self, frame: u64) -> Vec<BackendReply> {
        let due = self.queued.partition_point(|q| q.0 <= frame);
        self.queued
            .drain(..due)
            .map(|(_, request_id, outcome)| BackendReply { request_id, outcome })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ai::QueryOptions;

    fn request(id: RequestId, prompt: &str) -> ModelRequest {
        ModelRequest::new(id, prompt, QueryOptions::default()).unwrap()
    }

    #[test]
    fn first_matching_rule_answers() {
        let mut m = MockBackend::new(MockScript {
            rules: vec![
                MockRule::new("poem", "ode to a mug", 0),
                MockRule::new("po", "other", 0),
            ],
            strict: true,
        });
        m.submit(&request(0, "a poem please"), 0);
        assert_eq!(
            m.poll(0),
            vec![BackendReply {
                request_id: 0,
                outcome: Ok("ode to a mug".into())
            }]
        );
    }

    #[test]
    fn strict_rejects_unscripted_and_lenient_echoes() {
        let mut strict = MockBackend::new(MockScript {
            rules: vec![],
            strict: true,
        });
        strict.submit(&request(0, "hi"), 0);
        assert!(strict.poll(0)[0].outcome.is_err());
        let mut lenient = MockBackend::new(MockScript::default());
        lenient.submit(&request(1, "hi"), 0);
        assert_eq!(lenient.poll(0)[0].outcome, Ok("hi".into()));
    }

    #[test]
    fn script_file_round_trip() {
        let text = r#"{"version":1,"rules":[{"match":{"substring":"poem"},"response":{"text":"ode"},"delayFrames":3}],"strict":true}"#;
        let script = MockScript::from_json(text).unwrap();
        assert_eq!(script.rules[0].delay_frames, 3);
        assert_eq!(
            MockScript::from_json(&script.to_json_value().to_string()).unwrap(),
            script
        );
        assert!(matches!(
            MockScript::from_json(r#"{"version":2}"#),
            Err(AiError::UnsupportedVersion { found: 2, .. })
        ));
        assert!(MockScript::from_json(r#"{"version":1,"extra":0}"#).is_err());
    }
}
