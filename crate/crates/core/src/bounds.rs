//! Envelope reports: strip constants, the uniform envelope, and the signed
//! distance of every located zero to each bound.

use num_complex::Complex64;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::exppoly::{expand, uniform_envelope, StripBounds};
use crate::geometry::{reduce, CenterConfiguration, StrengthTuple};
use crate::rootfinder::{find_zeros_target, DetTarget, SearchWindow};

/// Margins are in Im-units: `upper = Im k − upper(Re k)` must be ≤ 0,
/// `lower = Im k − lower(Re k)` must be ≥ 0, and `uniform = decay − envelope`
/// must be ≥ 0 where the uniform envelope applies.
#[derive(Clone, Debug, Serialize)]
pub struct EnvelopeEntry {
    pub k: Complex64,
    pub multiplicity: usize,
    pub upper_margin: Option<f64>,
    pub lower_margin: Option<f64>,
    pub uniform_margin: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    UpperStrip,
    LowerStrip,
    UniformEnvelope,
}

#[derive(Clone, Debug, Serialize)]
pub struct Violation {
    pub k: Complex64,
    pub kind: ViolationKind,
    pub margin: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EnvelopeReport {
    /// SHA-256 of the canonical JSON of centers and strengths
    pub digest: String,
    pub constants: Option<StripBounds>,
    pub entries: Vec<EnvelopeEntry>,
    pub violations: Vec<Violation>,
    /// boxes the root finder could not resolve; their zeros are unchecked
    pub unresolved: usize,
    pub notes: Vec<String>,
}

impl EnvelopeReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn config_digest(alpha: &StrengthTuple, config: &CenterConfiguration) -> String {
    let doc = serde_json::json!({ "centers": config.points(), "alpha": alpha });
    let hash = Sha256::digest(doc.to_string().as_bytes());
    hash.iter().map(|b| format!("{b:02x}")).collect()
}

/// Finds every zero in the window and measures it against the strip bounds of
/// `det Γ` and, for resonances with `Re k > 0` of tuples in (C₋ ∪ R ∪ {∞})^N,
/// the uniform envelope of the full configuration.
pub fn check_envelope(
    alpha: &StrengthTuple,
    config: &CenterConfiguration,
    window: &SearchWindow,
) -> Result<EnvelopeReport> {
    let digest = config_digest(alpha, config);
    let (red, sub) = reduce(alpha, config)?;
    let ep = expand(&red, &sub)?;
    let mut notes = Vec::new();
    let constants = match ep.strip_bounds() {
        Ok(b) => Some(b),
        Err(Error::NoDelays) => {
            notes.push(format!("{} active center(s): no delays, strips do not apply", ep.n()));
            None
        }
        Err(e) => return Err(e),
    };
    let uniform = alpha.is_dissipative() && config.len() >= 2;

    let target = DetTarget::new(alpha, config)?;
    let set = find_zeros_target(&target, window)?;
    if !set.unresolved.is_empty() {
        notes.push(format!("{} unresolved box(es)", set.unresolved.len()));
    }
    let mut entries = Vec::with_capacity(set.roots.len());
    let mut violations = Vec::new();
    for root in &set.roots {
        let k = root.k;
        let upper_margin = constants.map(|b| k.im - b.upper(k.re));
        let lower_margin = constants.map(|b| k.im - b.lower(k.re));
        let uniform_margin = if uniform && k.re > 0.0 && k.im <= 0.0 {
            Some(-k.im - uniform_envelope(config, k.re)?)
        } else {
            None
        };
        let mut flag = |kind, margin| violations.push(Violation { k, kind, margin });
        if let Some(m) = upper_margin.filter(|&m| m > 0.0) {
            flag(ViolationKind::UpperStrip, m);
        }
        if let Some(m) = lower_margin.filter(|&m| m < 0.0) {
            flag(ViolationKind::LowerStrip, m);
        }
        if let Some(m) = uniform_margin.filter(|&m| m < 0.0) {
            flag(ViolationKind::UniformEnvelope, m);
        }
        entries.push(EnvelopeEntry {
            k,
            multiplicity: root.multiplicity,
            upper_margin,
            lower_margin,
            uniform_margin,
        });
    }
    if entries.len() == 1 && constants.is_none() {
        notes.push(format!("single zero at {}", entries[0].k));
    }
    Ok(EnvelopeReport {
        digest,
        constants,
        entries,
        violations,
        unresolved: set.unresolved.len(),
        notes,
    })
}

/// Deepest `Im k` at which `e^{−q_ν Im k}` stays comfortably inside f64 range.
const OVERFLOW_EXPONENT: f64 = 600.0;

/// A window around the strip for `|Re k| ≤ half_width`, one unit larger on
/// each side. The bottom is clipped where the determinant would overflow;
/// below the clip only lower-strip violations could hide, and the clip lies
/// above the lower curve only when that curve is itself unrepresentable.
pub fn strip_window(bounds: &StripBounds, half_width: f64) -> Result<SearchWindow> {
    let top = bounds.upper(0.0) + 1.0;
    let floor = -OVERFLOW_EXPONENT / bounds.max_delay;
    let bottom = (bounds.lower(half_width) - 1.0).max(floor);
    SearchWindow::from_bounds(-half_width, half_width, bottom, top)
}

/// Whether [`strip_window`] covers the full lower strip.
pub fn strip_window_is_full(bounds: &StripBounds, half_width: f64) -> bool {
    bounds.lower(half_width) - 1.0 >= -OVERFLOW_EXPONENT / bounds.max_delay
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ExtendedComplex;

    #[test]
    fn one_center_has_no_strips() {
        let cfg = CenterConfiguration::new(vec![[0.0; 3]]).unwrap();
        let alpha = StrengthTuple::from_real(&[0.1]);
        let w = SearchWindow::from_bounds(-2.0, 2.0, -3.0, 1.0).unwrap();
        let rep = check_envelope(&alpha, &cfg, &w).unwrap();
        assert!(rep.constants.is_none());
        assert_eq!(rep.entries.len(), 1);
        assert!(rep.passed());
        assert!(rep.notes.iter().any(|n| n.contains("single zero")));
    }

    #[test]
    fn two_centers_stay_in_strip() {
        let cfg = CenterConfiguration::new(vec![[0.0; 3], [1.0, 0.0, 0.0]]).unwrap();
        let alpha = StrengthTuple::from_real(&[0.0, 0.0]);
        let ep = expand(&alpha, &cfg).unwrap();
        let b = ep.strip_bounds().unwrap();
        let w = strip_window(&b, 30.0).unwrap();
        let rep = check_envelope(&alpha, &cfg, &w).unwrap();
        assert!(rep.entries.len() > 10);
        assert!(rep.passed(), "{:?}", rep.violations);
        assert_eq!(rep.unresolved, 0);
        assert!(rep.entries.iter().all(|e| e.uniform_margin.is_none_or(|m| m >= 0.0)));
    }

    #[test]
    fn digest_depends_on_alpha() {
        let cfg = CenterConfiguration::new(vec![[0.0; 3], [1.0, 0.0, 0.0]]).unwrap();
        let a = StrengthTuple::from_real(&[0.0, 0.0]);
        let b = a.with_entry(1, ExtendedComplex::Infinity);
        assert_ne!(config_digest(&a, &cfg), config_digest(&b, &cfg));
        assert_eq!(config_digest(&a, &cfg).len(), 64);
    }
}
