//! Reporting helpers for the acceptance run. Each criterion produces one
//! line with its verdict and the measured values.

#[derive(Clone, Debug, Default)]
pub struct Check {
    pub pass: bool,
    notes: Vec<String>,
}

impl Check {
    pub fn new() -> Self {
        Check {
            pass: true,
            ..Check::default()
        }
    }

    /// Records a measured value without affecting the verdict.
    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    /// Records a condition; a false condition fails the criterion.
    pub fn require(&mut self, ok: bool, s: impl Into<String>) {
        let s = s.into();
        if !ok {
            self.pass = false;
        }
        self.notes.push(if ok { s } else { format!("NOT {s}") });
    }

    pub fn line(&self, id: u32, title: &str) -> String {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        format!(
            "criterion {id} {verdict} [{title}] {}",
            self.notes.join("; ")
        )
    }
}
