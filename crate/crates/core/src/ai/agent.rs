use std::collections::{BTreeMap, VecDeque};
use std::sync::Arc;

use serde::{Serialize, Serializer};
use serde_json::{Map, Value};

use super::AiError;
use crate::model::ContextLog;

pub const MEMORY_CAPACITY: usize = 256;
/// Memory entries included in a composed prompt.
pub const MEMORY_WINDOW: usize = 8;
pub const PROMPT_FORMAT_VERSION: u32 = 1;

/// Builds the backend prompt (format version 1):
///
/// ```text
/// persona:<escaped persona>\n
/// memory:<escaped entry>\n        one line per entry, oldest first
/// <prompt>
/// ```
///
/// Escaping turns `\` into `\\` and a newline into `\n`. The prompt is
/// copied verbatim except that a leading `\` is added when it starts with
/// `memory:` or `\`, which keeps the encoding injective.
pub fn compose_prompt<'a>(persona: &str, memory: impl IntoIterator<Item = &'a str>, prompt: &str) -> String {
    let mut out = String::from("persona:");
    escape_into(persona, &mut out);
    out.push('\n');
    for entry in memory {
        out.push_str("memory:");
        escape_into(entry, &mut out);
        out.push('\n');
    }
    if prompt.starts_with("memory:") || prompt.starts_with('\\') {
        out.push('\\');
    }
    out.push_str(prompt);
    out
}

fn escape_into(text: &str, out: &mut String) {
    for c in text.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamType {
    Number,
    Text,
    Boolean,
}

impl ParamType {
    fn accepts(self, value: &Value) -> bool {
        match self {
            ParamType::Number => value.is_number(),
            ParamType::Text => value.is_string(),
            ParamType::Boolean => value.is_boolean(),
        }
    }
}

type Handler = Arc<dyn Fn(&Map<String, Value>) -> String + Send + Sync>;

#[derive(Clone)]
pub struct Tool {
    name: String,
    params: Vec<(String, ParamType)>,
    handler: Handler,
}

impl std::fmt::Debug for Tool {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Tool")
            .field("name", &self.name)
            .field("params", &self.params)
            .finish_non_exhaustive()
    }
}

impl Tool {
    pub fn new(
        name: impl Into<String>,
        params: &[(&str, ParamType)],
        handler: impl Fn(&Map<String, Value>) -> String + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            params: params.iter().map(|(n, t)| (n.to_string(), *t)).collect(),
            handler: Arc::new(handler),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Names of missing, mistyped or unexpected arguments, sorted.
    fn check(&self, args: &Map<String, Value>) -> Vec<String> {
        let mut bad: Vec<String> = self
            .params
            .iter()
            .filter(|(name, ty)| !args.get(name).is_some_and(|v| ty.accepts(v)))
            .map(|(name, _)| name.clone())
            .collect();
        bad.extend(
            args.keys()
                .filter(|k| !self.params.iter().any(|(name, _)| name == *k))
                .cloned(),
        );
        bad.sort();
        bad
    }
}

/// An agent: persona, bounded memory and a tool registry.
#[derive(Debug, Clone)]
pub struct Agent {
    id: String,
    persona: String,
    memory: VecDeque<String>,
    tools: BTreeMap<String, Tool>,
}

impl Agent {
    pub fn new(id: impl Into<String>, persona: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            persona: persona.into(),
            memory: VecDeque::new(),
            tools: BTreeMap::new(),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn persona(&self) -> &str {
        &self.persona
    }

    pub fn memory(&self) -> impl Iterator<Item = &str> {
        self.memory.iter().map(String::as_str)
    }

    pub fn remember(&mut self, item: impl Into<String>) {
        if self.memory.len() == MEMORY_CAPACITY {
            self.memory.pop_front();
        }
        self.memory.push_back(item.into());
    }

    /// Remembered items containing `substring`, oldest first.
    pub fn recall(&self, substring: &str) -> Vec<String> {
        self.memory.iter().filter(|m| m.contains(substring)).cloned().collect()
    }

    /// The prompt sent to the backend for `prompt`.
    pub fn compose(&self, prompt: &str) -> String {
        let skip = self.memory.len().saturating_sub(MEMORY_WINDOW);
        compose_prompt(&self.persona, self.memory.iter().skip(skip).map(String::as_str), prompt)
    }

    pub fn register_tool(&mut self, tool: Tool) -> Result<(), AiError> {
        if self.tools.contains_key(&tool.name) {
            return Err(AiError::DuplicateTool(tool.name));
        }
        self.tools.insert(tool.name.clone(), tool);
        Ok(())
    }

    /// Validates `args`, runs the tool and records the call in `context`.
    pub fn use_tool(
        &self,
        name: &str,
        args: &Map<String, Value>,
        frame_index: u64,
        context: &mut ContextLog,
    ) -> Result<String, AiError> {
        let tool = self
            .tools
            .get(name)
            .ok_or_else(|| AiError::NoSuchTool(name.to_string()))?;
        let bad = tool.check(args);
        if !bad.is_empty() {
            return Err(AiError::BadArgs(bad));
        }
        let result = (tool.handler)(args);
        let payload = serde_json::json!({
            "agent": self.id,
            "tool": name,
            "args": Value::Object(args.clone()),
            "result": result,
        });
        // Frames only move forward on the frame thread, so this cannot fail
        // unless a caller passes a stale frame index.
        let _ = context.push(frame_index, "tool", payload.to_string());
        Ok(result)
    }
}

impl Serialize for Agent {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct View<'a> {
            id: &'a str,
            persona: &'a str,
            memory: &'a VecDeque<String>,
            tools: Vec<&'a str>,
        }
        View {
            id: &self.id,
            persona: &self.persona,
            memory: &self.memory,
            tools: self.tools.keys().map(String::as_str).collect(),
        }
        .serialize(s)
    }
}
