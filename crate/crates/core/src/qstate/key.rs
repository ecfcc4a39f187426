use std::fmt;

use super::{PureState, C64};

/// Amplitudes whose magnitudes differ by less than this are treated as tied
/// when choosing the phase anchor.
const TIE_TOL: f64 = 1e-9;

/// Shift of the quantization cells, in grid units. Exact dyadic and
/// `1/√2`-type amplitudes are common in circuit outputs; an irrational shift
/// keeps them away from cell boundaries.
const CELL_OFFSET: f64 = 0.381_966_011_250_105_1;

/// Opaque bucket identifier for a phase-fixed, quantized state.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateKey(u128);

impl StateKey {
    pub fn as_u128(self) -> u128 {
        self.0
    }

    pub fn from_u128(v: u128) -> Self {
        Self(v)
    }
}

impl fmt::Debug for StateKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StateKey({:032x})", self.0)
    }
}

impl fmt::Display for StateKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:032x}", self.0)
    }
}

/// Global-phase-invariant bucket key at resolution `grid`.
///
/// The largest-magnitude amplitude (lowest index among ties) is rotated onto
/// the positive real axis, then every real and imaginary part is quantized.
pub fn canonical_key(state: &PureState, grid: f64) -> StateKey {
    key_of_amplitudes(state.amplitudes(), grid)
}

pub(crate) fn key_of_amplitudes(amps: &[C64], grid: f64) -> StateKey {
    debug_assert!(grid > 0.0);
    let max = amps.iter().map(|a| a.norm()).fold(0.0, f64::max);
    let anchor = amps
        .iter()
        .position(|a| a.norm() >= max - TIE_TOL)
        .expect("nonempty state");
    let phase = amps[anchor].conj() / amps[anchor].norm();
    let inv = 1.0 / grid;

    let mut h = Fnv128::new();
    h.write_u64(amps.len() as u64);
    for a in amps {
        let z = a * phase;
        h.write_u64((z.re * inv + CELL_OFFSET).floor() as i64 as u64);
        h.write_u64((z.im * inv + CELL_OFFSET).floor() as i64 as u64);
    }
    StateKey(h.finish())
}

/// 128-bit FNV-1a; stable across platforms and toolchains so keys can be
/// persisted.
pub(crate) struct Fnv128(u128);

impl Fnv128 {
    const OFFSET: u128 = 0x6c62272e07bb014262b821756295c58d;
    const PRIME: u128 = 0x0000000001000000000000000000013B;

    pub(crate) fn new() -> Self {
        Self(Self::OFFSET)
    }

    pub(crate) fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= b as u128;
            self.0 = self.0.wrapping_mul(Self::PRIME);
        }
    }

    pub(crate) fn write_u64(&mut self, v: u64) {
        self.write(&v.to_le_bytes());
    }

    pub(crate) fn finish(&self) -> u128 {
        self.0
    }
}
