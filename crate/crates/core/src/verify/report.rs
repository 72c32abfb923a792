use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::instance::InstanceSpec;

/// Relative tolerance for inequalities evaluated in floating point.
pub const FLOAT_REL_TOL: f64 = 1e-12;

/// Outcome of one trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub holds: bool,
    /// `(rhs - lhs) / |rhs|` for inequalities; `None` for identities.
    pub slack: Option<f64>,
    pub note: Option<String>,
}

impl Trial {
    pub fn identity(holds: bool) -> Self {
        Trial { holds, slack: None, note: None }
    }

    /// `lhs <= rhs (1 + FLOAT_REL_TOL)`.
    pub fn le(lhs: f64, rhs: f64) -> Self {
        Trial { holds: lhs <= rhs * (1.0 + FLOAT_REL_TOL), slack: Some(slack(lhs, rhs)), note: None }
    }

    /// `lhs <= rhs` with no tolerance.
    pub fn le_exact(lhs: f64, rhs: f64) -> Self {
        Trial { holds: lhs <= rhs, slack: Some(slack(lhs, rhs)), note: None }
    }

    /// `lhs <= rhs + tol max(1, |rhs|)`.
    pub fn le_within(lhs: f64, rhs: f64, tol: f64) -> Self {
        Trial { holds: lhs <= rhs + tol * rhs.abs().max(1.0), slack: Some(slack(lhs, rhs)), note: None }
    }

    /// `|got - want| <= rel |want|`, for identities evaluated in floating point.
    pub fn close(got: f64, want: f64, rel: f64) -> Self {
        let err = (got - want).abs();
        let holds = err <= rel * want.abs();
        let t = Trial::identity(holds);
        if holds {
            t
        } else {
            t.with_note(format!("got {got:e}, want {want:e}"))
        }
    }

    /// An exact identity, with `what` named on failure.
    pub fn exact(holds: bool, what: impl FnOnce() -> String) -> Self {
        if holds {
            Trial::identity(true)
        } else {
            Trial::identity(false).with_note(what())
        }
    }

    /// All of `parts` must hold; the slack is the smallest one.
    pub fn all(parts: impl IntoIterator<Item = Trial>) -> Self {
        let mut out = Trial::identity(true);
        let mut notes = Vec::new();
        for p in parts {
            out.holds &= p.holds;
            out.slack = match (out.slack, p.slack) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            };
            if !p.holds {
                notes.extend(p.note);
            }
        }
        if !notes.is_empty() {
            out.note = Some(notes.join("; "));
        }
        out
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

fn slack(lhs: f64, rhs: f64) -> f64 {
    if lhs == rhs {
        return 0.0;
    }
    (rhs - lhs) / rhs.abs().max(f64::MIN_POSITIVE)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub trial: usize,
    pub message: String,
}

/// Aggregate of one suite run, emitted as one JSON line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub id: String,
    pub trials: usize,
    pub violations: usize,
    /// Smallest relative slack over inequality trials, recorded on pass too.
    pub worst_slack: Option<f64>,
    pub runtime_ms: f64,
    pub seed: u64,
    /// SHA-256 of crate version, target and instance spec.
    pub fingerprint: String,
    pub failures: Vec<Failure>,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    /// Equality apart from the runtime.
    pub fn same_outcome(&self, other: &Self) -> bool {
        PropertyReport { runtime_ms: 0.0, ..self.clone() } == PropertyReport { runtime_ms: 0.0, ..other.clone() }
    }
}

pub fn fingerprint(spec: &InstanceSpec) -> String {
    let mut h = Sha256::new();
    h.update(env!("CARGO_PKG_VERSION").as_bytes());
    h.update(std::env::consts::OS.as_bytes());
    h.update(std::env::consts::ARCH.as_bytes());
    h.update(serde_json::to_vec(spec).expect("spec serializes"));
    hex::encode(h.finalize())
}
