use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SopMethod {
    Mc,
    Quadrature,
    Closed,
    ClosedAlpha2,
    ClosedAlpha4,
    Asymptotic,
}

impl SopMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            SopMethod::Mc => "mc",
            SopMethod::Quadrature => "quadrature",
            SopMethod::Closed => "closed",
            SopMethod::ClosedAlpha2 => "closed_alpha2",
            SopMethod::ClosedAlpha4 => "closed_alpha4",
            SopMethod::Asymptotic => "asymptotic",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SopResult {
    pub value: f64,
    pub method: SopMethod,
    pub abs_uncertainty: f64,
    /// SHA-256 of the canonical JSON of the inputs that produced the value.
    pub config_hash: String,
    pub warnings: Vec<String>,
}

impl SopResult {
    /// Clamps into [0, 1], folding any excursion into the uncertainty.
    pub(crate) fn new(raw: f64, method: SopMethod, abs_uncertainty: f64, config_hash: String) -> Self {
        let value = raw.clamp(0.0, 1.0);
        SopResult {
            value,
            method,
            abs_uncertainty: abs_uncertainty.abs() + (raw - value).abs(),
            config_hash,
            warnings: Vec::new(),
        }
    }
}

/// Hex SHA-256 of the JSON serialization of `value`.
pub fn config_hash<T: Serialize + ?Sized>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("plain data serializes");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = config_hash(&(1.0f64, "x"));
        assert_eq!(a.len(), 64);
        assert_eq!(a, config_hash(&(1.0f64, "x")));
        assert_ne!(a, config_hash(&(1.0000001f64, "x")));
    }

    #[test]
    fn clamping_records_excursion() {
        let r = SopResult::new(1.0 + 1e-12, SopMethod::Closed, 1e-13, String::new());
        assert_eq!(r.value, 1.0);
        assert!((r.abs_uncertainty - 1.1e-12).abs() < 1e-15);
        assert_eq!(
            serde_json::to_string(&SopMethod::ClosedAlpha4).unwrap(),
            "\"closed_alpha4\""
        );
        assert_eq!(SopMethod::ClosedAlpha2.as_str(), "closed_alpha2");
    }
}
