// SPDX-License-Identifier: Apache-2.0

//! Sub-seed derivation. Every random stage draws from its own stream keyed
//! by a label, so adding a stage never shifts another stage's numbers.

use sha2::{Digest, Sha256};

pub fn derive_seed(master: u64, label: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update(label.as_bytes());
    let out = h.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&out[..8]);
    u64::from_le_bytes(bytes)
}
