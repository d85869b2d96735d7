//! Output shapes shared by the commands. JSON output is versioned and
//! deterministic for a fixed input and seed: no timestamps, no paths,
//! map keys already arrive sorted.

use std::fmt::Write as _;

use anyhow::Result;
use serde::Serialize;

use reldoc_core::LawEntry;

use crate::instance::SCHEMA_VERSION;

#[derive(Serialize, Clone)]
pub struct Entry {
    pub law: String,
    pub scope: String,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl Entry {
    pub fn from_law(e: &LawEntry) -> Entry {
        Entry {
            law: e.law.clone(),
            scope: e.scope.clone(),
            status: if e.passed { "pass" } else { "fail" },
            witness: e.witness.clone(),
        }
    }

    pub fn flag(law: &str, scope: &str, passed: bool, witness: Option<String>) -> Entry {
        Entry {
            law: law.to_string(),
            scope: scope.to_string(),
            status: if passed { "pass" } else { "fail" },
            witness: if passed { None } else { witness },
        }
    }

    pub fn skipped(law: &str, scope: &str, reason: String) -> Entry {
        Entry {
            law: law.to_string(),
            scope: scope.to_string(),
            status: "skipped",
            witness: Some(reason),
        }
    }

    pub fn is_fail(&self) -> bool {
        self.status == "fail"
    }
}

#[derive(Serialize)]
pub struct Section {
    pub subject: String,
    pub entries: Vec<Entry>,
}

/// Output of the law-running commands (`check-laws`, `report`).
#[derive(Serialize)]
pub struct LawsOutput {
    pub schema_version: u32,
    pub command: &'static str,
    pub seed: u64,
    pub ok: bool,
    pub sections: Vec<Section>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub data: Vec<serde_json::Value>,
}

impl LawsOutput {
    pub fn new(command: &'static str, seed: u64, sections: Vec<Section>) -> LawsOutput {
        let ok = sections
            .iter()
            .all(|s| s.entries.iter().all(|e| !e.is_fail()));
        LawsOutput {
            schema_version: SCHEMA_VERSION,
            command,
            seed,
            ok,
            sections,
            data: Vec::new(),
        }
    }

    pub fn render(&self, json: bool) -> Result<String> {
        if json {
            return render_json(self);
        }
        let mut s = String::new();
        let _ = writeln!(s, "{} (seed {})", self.command, self.seed);
        for sec in &self.sections {
            let _ = writeln!(s, "{}", sec.subject);
            for e in &sec.entries {
                let _ = writeln!(s, "  {:<7} {}  [{}]", e.status, e.law, e.scope);
                if let Some(w) = &e.witness {
                    let _ = writeln!(s, "          {w}");
                }
            }
        }
        for d in &self.data {
            let _ = writeln!(s, "{}", render_data_text(d));
        }
        let _ = writeln!(s, "result: {}", if self.ok { "ok" } else { "fail" });
        Ok(s)
    }
}

fn render_data_text(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::Object(m) => {
            let mut s = String::new();
            for (k, val) in m {
                if !s.is_empty() {
                    s.push_str(", ");
                }
                let _ = write!(s, "{k}={val}");
            }
            s
        }
        other => other.to_string(),
    }
}

pub fn render_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}
