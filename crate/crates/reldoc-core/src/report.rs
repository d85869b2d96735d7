use std::fmt;

/// Outcome of checking one law: name, the scope that was covered
/// (exhaustive bounds or sample counts), and a witness on failure.
#[derive(Clone, Debug)]
pub struct LawEntry {
    pub law: String,
    pub scope: String,
    pub passed: bool,
    pub witness: Option<String>,
}

/// A batch of law-check outcomes.
#[derive(Clone, Debug, Default)]
pub struct LawReport {
    pub entries: Vec<LawEntry>,
}

impl LawReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn pass(&mut self, law: &str, scope: &str) {
        self.entries.push(LawEntry {
            law: law.to_string(),
            scope: scope.to_string(),
            passed: true,
            witness: None,
        });
    }

    pub fn fail(&mut self, law: &str, scope: &str, witness: String) {
        self.entries.push(LawEntry {
            law: law.to_string(),
            scope: scope.to_string(),
            passed: false,
            witness: Some(witness),
        });
    }

    pub fn record(&mut self, law: &str, scope: &str, ok: bool, witness: impl FnOnce() -> String) {
        if ok {
            self.pass(law, scope);
        } else {
            self.fail(law, scope, witness());
        }
    }

    pub fn all_passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &LawEntry> {
        self.entries.iter().filter(|e| !e.passed)
    }

    pub fn entry(&self, law: &str) -> Option<&LawEntry> {
        self.entries.iter().find(|e| e.law == law)
    }

    pub fn absorb(&mut self, other: LawReport) {
        self.entries.extend(other.entries);
    }
}

impl fmt::Display for LawReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            let status = if e.passed { "PASS" } else { "FAIL" };
            write!(f, "{} {} [{}]", status, e.law, e.scope)?;
            if let Some(w) = &e.witness {
                write!(f, ": {}", w)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
