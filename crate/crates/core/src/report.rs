//! Numeric claims tagged with where they came from.

use serde::{Deserialize, Serialize};

use crate::stats::McEstimate;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum Provenance {
    ClosedForm,
    Weingarten,
    MonteCarlo { samples: u64, stderr: f64 },
    Enumeration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Claim {
    pub value: f64,
    pub provenance: Provenance,
}

impl Claim {
    pub fn closed_form(value: f64) -> Self {
        Claim {
            value,
            provenance: Provenance::ClosedForm,
        }
    }

    pub fn weingarten(value: f64) -> Self {
        Claim {
            value,
            provenance: Provenance::Weingarten,
        }
    }

    pub fn enumeration(value: f64) -> Self {
        Claim {
            value,
            provenance: Provenance::Enumeration,
        }
    }

    pub fn monte_carlo(est: McEstimate) -> Self {
        Claim {
            value: est.mean,
            provenance: Provenance::MonteCarlo {
                samples: est.samples,
                stderr: est.stderr,
            },
        }
    }

    pub fn stderr(&self) -> Option<f64> {
        match self.provenance {
            Provenance::MonteCarlo { stderr, .. } => Some(stderr),
            _ => None,
        }
    }
}
