use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KillCause {
    Assertion,
    Exception,
    Timeout,
}

/// Outcome of one mutant, for one test or overall.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "cause", rename_all = "kebab-case")]
pub enum Verdict {
    Killed(KillCause),
    Survived,
    NotCovered,
}

impl Verdict {
    pub fn is_killed(self) -> bool {
        matches!(self, Verdict::Killed(_))
    }
}

impl fmt::Display for KillCause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KillCause::Assertion => "assertion",
            KillCause::Exception => "exception",
            KillCause::Timeout => "timeout",
        })
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Killed(c) => write!(f, "killed({c})"),
            Verdict::Survived => f.write_str("survived"),
            Verdict::NotCovered => f.write_str("not-covered"),
        }
    }
}
