use std::fmt;
use std::io::Write;
use std::path::Path;

use crate::error::Result;

/// One pass/fail outcome with its measured evidence.
#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// Line-oriented report: `key = value` facts followed by verdict lines.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub experiment: String,
    pub entries: Vec<(String, String)>,
    pub verdicts: Vec<Verdict>,
}

impl Report {
    pub fn new(experiment: &str) -> Self {
        Report {
            experiment: experiment.to_string(),
            entries: Vec::new(),
            verdicts: Vec::new(),
        }
    }

    pub fn fact(&mut self, key: &str, value: impl fmt::Display) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn verdict(&mut self, name: &str, pass: bool, detail: impl Into<String>) {
        self.verdicts.push(Verdict {
            name: name.to_string(),
            pass,
            detail: detail.into(),
        });
    }

    /// One verdict from several sub-checks: passes when all of them do.
    pub fn verdict_parts(&mut self, name: &str, parts: Vec<(bool, String)>) {
        let pass = !parts.is_empty() && parts.iter().all(|p| p.0);
        let detail = parts
            .into_iter()
            .map(|(ok, d)| if ok { d } else { format!("FAILED {d}") })
            .collect::<Vec<_>>()
            .join("; ");
        self.verdict(name, pass, detail);
    }

    pub fn get(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }

    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn merge(&mut self, other: Report) {
        self.entries.extend(other.entries);
        self.verdicts.extend(other.verdicts);
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        write!(f, "{self}")?;
        Ok(())
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "experiment = {}", self.experiment)?;
        for (k, v) in &self.entries {
            writeln!(f, "{k} = {v}")?;
        }
        for v in &self.verdicts {
            let tag = if v.pass { "PASS" } else { "FAIL" };
            writeln!(f, "[{tag}] {}: {}", v.name, v.detail)?;
        }
        Ok(())
    }
}
