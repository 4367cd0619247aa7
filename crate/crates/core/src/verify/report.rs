use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Stable,
    Unstable,
    Violated,
}

impl Verdict {
    /// `violated` only from a failed sign or identity check; otherwise stability
    /// under refinement decides.
    pub fn classify(refinement_delta: f64, measured: f64, violated: bool) -> Self {
        if violated {
            Verdict::Violated
        } else if measured.is_finite() && refinement_delta < STABILITY_TOLERANCE {
            Verdict::Stable
        } else {
            Verdict::Unstable
        }
    }
}

/// Largest relative drift under 2× refinement still counted as stable.
pub const STABILITY_TOLERANCE: f64 = 0.1;

/// Relative change `|refined - base| / |base|`; zero when both vanish.
pub fn relative_delta(base: f64, refined: f64) -> f64 {
    if base == refined {
        return 0.0;
    }
    if !base.is_finite() || !refined.is_finite() {
        return f64::INFINITY;
    }
    (refined - base).abs() / base.abs().max(f64::MIN_POSITIVE)
}

/// One verification record, written as a JSON line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VerificationReport {
    pub suite: String,
    pub alpha: f64,
    pub beta: f64,
    #[serde(rename = "M")]
    pub m: u32,
    #[serde(rename = "N")]
    pub n: u32,
    pub flavor: String,
    pub gamma: Option<f64>,
    #[serde(rename = "measuredC", with = "non_finite")]
    pub measured_c: f64,
    #[serde(with = "non_finite")]
    pub refinement_delta: f64,
    pub samples: usize,
    pub verdict: Verdict,
    pub seed: u64,
    pub runtime_ms: u64,
    pub version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measured_inf: Option<f64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub exploratory: bool,
    #[serde(default)]
    pub skipped: usize,
    #[serde(default)]
    pub failures: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl VerificationReport {
    /// Copy with timing zeroed, for run-to-run comparisons.
    pub fn without_timing(&self) -> Self {
        Self { runtime_ms: 0, ..self.clone() }
    }
}

/// JSON has no infinities: non-finite values travel as `null` and come back as `+∞`.
mod non_finite {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> VerificationReport {
        VerificationReport {
            suite: "omega".into(),
            alpha: 0.5,
            beta: -0.25,
            m: 1,
            n: 2,
            flavor: "D".into(),
            gamma: Some(0.45),
            measured_c: 1.25e-12,
            refinement_delta: 0.03125,
            samples: 100,
            verdict: Verdict::Stable,
            seed: 7,
            runtime_ms: 12,
            version: "0.1.0".into(),
            measured_inf: Some(0.5),
            exploratory: false,
            skipped: 1,
            failures: 0,
            note: None,
        }
    }

    #[test]
    fn json_round_trip() {
        let r = sample();
        let line = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<VerificationReport>(&line).unwrap(), r);
        for key in ["\"suite\"", "\"alpha\"", "\"beta\"", "\"M\"", "\"N\"", "\"flavor\"", "\"gamma\"", "\"measuredC\"", "\"refinementDelta\"", "\"samples\"", "\"verdict\":\"stable\"", "\"seed\"", "\"runtimeMs\"", "\"version\""] {
            assert!(line.contains(key), "{key} missing from {line}");
        }
        assert!(!line.contains("exploratory"));
    }

    #[test]
    fn infinite_constant_survives_round_trip() {
        let r = VerificationReport { measured_c: f64::INFINITY, refinement_delta: f64::INFINITY, verdict: Verdict::Unstable, ..sample() };
        let back: VerificationReport = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn classification() {
        assert_eq!(Verdict::classify(0.05, 3.0, false), Verdict::Stable);
        assert_eq!(Verdict::classify(0.2, 3.0, false), Verdict::Unstable);
        assert_eq!(Verdict::classify(0.0, f64::INFINITY, false), Verdict::Unstable);
        assert_eq!(Verdict::classify(0.0, 1e30, false), Verdict::Stable);
        assert_eq!(Verdict::classify(0.0, 1.0, true), Verdict::Violated);
        assert_eq!(relative_delta(0.0, 0.0), 0.0);
        assert_eq!(relative_delta(2.0, 2.2), 0.10000000000000009);
    }
}
