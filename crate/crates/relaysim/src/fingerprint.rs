//! Stable content fingerprints for configurations and cache keys.

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::Result;

/// Hex SHA-256 of a value's canonical JSON serialization.
///
/// Struct fields serialize in declaration order and floats round-trip
/// losslessly, so equal values always produce equal fingerprints.
pub fn fingerprint<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let bytes = serde_json::to_vec(value)?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

/// Short (16 hex character) form of [`fingerprint`] for CSV rows.
pub fn short_fingerprint<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    Ok(fingerprint(value)?[..16].to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_values_equal_fingerprints() {
        let a = vec![1.0_f64, 0.4 / 14.0];
        let b = vec![1.0_f64, 0.4 / 14.0];
        assert_eq!(fingerprint(&a).unwrap(), fingerprint(&b).unwrap());
        let c = vec![1.0_f64, 0.5];
        assert_ne!(fingerprint(&a).unwrap(), fingerprint(&c).unwrap());
    }

    #[test]
    fn short_form_prefixes_long_form() {
        let v = "abc";
        let long = fingerprint(v).unwrap();
        let short = short_fingerprint(v).unwrap();
        assert_eq!(long.len(), 64);
        assert!(long.starts_with(&short));
    }
}
