use serde::Serialize;

/// One numerical (or exact) verification with its outcome.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// Passes iff `deviation < tolerance` (NaN fails).
    pub fn within(name: impl Into<String>, deviation: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            max_deviation: deviation,
            tolerance,
            pass: deviation < tolerance,
        }
    }

    /// A yes/no condition; deviation is 0 or 1.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Check {
            name: name.into(),
            max_deviation: if ok { 0.0 } else { 1.0 },
            tolerance: 0.5,
            pass: ok,
        }
    }
}

/// Collapses repeated checks of the same name to the worst deviation.
pub fn merge_worst(checks: impl IntoIterator<Item = Check>) -> Vec<Check> {
    let mut out: Vec<Check> = Vec::new();
    for c in checks {
        match out.iter_mut().find(|o| o.name == c.name) {
            Some(o) => {
                if !(c.max_deviation <= o.max_deviation) {
                    o.max_deviation = c.max_deviation;
                }
                o.pass &= c.pass;
            }
            None => out.push(c),
        }
    }
    out
}

pub fn all_pass(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.pass)
}
