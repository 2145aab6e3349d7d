//! The frozen sign and ordering conventions, shipped with every report.

use sha2::{Digest, Sha256};

pub const LEDGER: &str = include_str!("../CONVENTIONS.md");

pub const VERSION: u32 = 1;

/// Lowercase hex SHA-256 of [`LEDGER`].
pub fn ledger_hash() -> String {
    let digest = Sha256::digest(LEDGER.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_stable_hex() {
        let h = ledger_hash();
        assert_eq!(h.len(), 64);
        assert!(h.chars().all(|c| c.is_ascii_hexdigit()));
        assert_eq!(h, ledger_hash());
        assert!(LEDGER.contains(&format!("Version {VERSION}.")));
    }
}
