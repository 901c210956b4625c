use crate::error::{Error, Result};

/// A single Ising spin, always -1 or +1.
pub type Spin = i8;

pub(crate) fn check_spins(spins: &[Spin]) -> Result<()> {
    match spins.iter().position(|&s| s != 1 && s != -1) {
        Some(index) => Err(Error::InvalidSpin { index, value: spins[index] }),
        None => Ok(()),
    }
}

pub(crate) fn check_assignment(spins: &[Spin], n: usize) -> Result<()> {
    if spins.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: spins.len() });
    }
    check_spins(spins)
}

/// Decodes bit `i` of `state` as spin `i` (set bit is +1).
pub fn spins_from_bits(state: u64, n: usize) -> Vec<Spin> {
    (0..n).map(|i| if state >> i & 1 == 1 { 1 } else { -1 }).collect()
}
