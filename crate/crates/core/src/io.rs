//! Configuration files: `{"centers": [[x,y,z], ...], "alpha": [{"re": r, "im": i} | "inf", ...]}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CenterConfiguration, Point3, StrengthTuple};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    centers: Vec<Point3>,
    alpha: StrengthTuple,
}

/// A validated configuration: distinct centers and one strength per center.
#[derive(Clone, Debug)]
pub struct Problem {
    pub config: CenterConfiguration,
    pub alpha: StrengthTuple,
}

impl Problem {
    pub fn new(config: CenterConfiguration, alpha: StrengthTuple) -> Result<Self> {
        if config.len() != alpha.len() {
            return Err(Error::LengthMismatch {
                alpha: alpha.len(),
                centers: config.len(),
            });
        }
        Ok(Self { config, alpha })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawConfig = serde_json::from_str(text)?;
        Self::new(CenterConfiguration::new(raw.centers)?, raw.alpha)
    }

    pub fn to_json(&self) -> String {
        let raw = RawConfig {
            centers: self.config.points().to_vec(),
            alpha: self.alpha.clone(),
        };
        serde_json::to_string_pretty(&raw).expect("plain data serializes")
    }
}
