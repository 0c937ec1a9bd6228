//! Command results: a human rendering, a machine-readable document,
//! and the process exit code, kept together so the two renderings can
//! never disagree about the verdict.

use serde_json::Value;

pub struct CommandOutput {
    command: &'static str,
    exit_code: i32,
    human: String,
    payload: Value,
}

impl CommandOutput {
    /// `payload` must be a JSON object; its fields are merged into the
    /// structured document alongside `command` and `exit_code`.
    pub fn new(command: &'static str, exit_code: i32, human: String, payload: Value) -> Self {
        debug_assert!(payload.is_object());
        CommandOutput {
            command,
            exit_code,
            human,
            payload,
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.exit_code
    }

    pub fn human(&self) -> &str {
        &self.human
    }

    /// The machine-readable document for `--structured` mode.
    pub fn structured(&self) -> Value {
        let mut doc = serde_json::Map::new();
        doc.insert("command".into(), Value::String(self.command.into()));
        doc.insert("exit_code".into(), Value::from(self.exit_code));
        if let Value::Object(fields) = &self.payload {
            for (k, v) in fields {
                doc.insert(k.clone(), v.clone());
            }
        }
        Value::Object(doc)
    }

    /// Renders the output, always ending in a newline.
    pub fn render(&self, structured: bool) -> String {
        if structured {
            let mut text = serde_json::to_string_pretty(&self.structured())
                .expect("structured documents hold only finite numbers");
            text.push('\n');
            text
        } else {
            let mut text = self.human.trim_end().to_string();
            text.push('\n');
            text
        }
    }
}

/// Formats a float for human output: plain decimal for ordinary
/// magnitudes, scientific notation for very small or large ones.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else if x.abs() < 1e-3 || x.abs() >= 1e6 {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}
