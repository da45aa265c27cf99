//! Line-oriented `key=value` command reports.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding {
    pub code: String,
    /// `$`-rooted item path, `line:col` in a text file, or `-`.
    pub path: String,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    /// Input rejected: validation or schema failure.
    Rejected,
    Usage,
}

impl Outcome {
    pub fn exit_code(self) -> u8 {
        match self {
            Outcome::Ok => 0,
            Outcome::Rejected => 1,
            Outcome::Usage => 2,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Outcome::Ok => "ok",
            Outcome::Rejected => "rejected",
            Outcome::Usage => "usage",
        }
    }
}

/// Rendered as `command=`, `outcome=`, the fields in insertion order, then
/// one `finding=` line per finding. `body` (a value dump, help text)
/// follows after a blank line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub command: String,
    pub outcome: Outcome,
    pub fields: Vec<(String, String)>,
    pub findings: Vec<Finding>,
    pub body: Option<String>,
}

impl Report {
    pub fn new(command: &str) -> Report {
        Report { command: command.into(), outcome: Outcome::Ok, fields: Vec::new(), findings: Vec::new(), body: None }
    }

    pub fn field(&mut self, key: &str, value: impl fmt::Display) -> &mut Report {
        self.fields.push((key.into(), value.to_string()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn reject(&mut self, code: &str, path: &str, message: impl fmt::Display) -> &mut Report {
        self.outcome = Outcome::Rejected;
        self.findings.push(Finding { code: code.into(), path: path.into(), message: message.to_string() });
        self
    }

    pub fn usage(&mut self, code: &str, message: impl fmt::Display) -> &mut Report {
        self.reject(code, "-", message);
        self.outcome = Outcome::Usage;
        self
    }

    pub fn exit_code(&self) -> u8 {
        self.outcome.exit_code()
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "command={}", self.command)?;
        writeln!(f, "outcome={}", self.outcome.name())?;
        for (k, v) in &self.fields {
            writeln!(f, "{k}={v}")?;
        }
        for x in &self.findings {
            let severity = if self.outcome == Outcome::Usage { "usage" } else { "error" };
            writeln!(f, "finding={severity} {} {} {}", x.path, x.code, x.message.replace('\n', " "))?;
        }
        if let Some(body) = &self.body {
            writeln!(f)?;
            f.write_str(body)?;
        }
        Ok(())
    }
}
