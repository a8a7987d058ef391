//! Stable hashing helpers used for seed derivation and cache keys.
//!
//! FNV-1a is used everywhere a hash must be reproducible across runs and
//! platforms; `std`'s default hasher is randomized per process and cannot
//! be used for anything that ends up in an output file or a seed.

const FNV_OFFSET: u64 = 0xcbf29ce484222325;
const FNV_PRIME: u64 = 0x100000001b3;

#[derive(Clone, Copy, Debug)]
pub struct Fnv64(u64);

impl Fnv64 {
    pub fn new() -> Self {
        Fnv64(FNV_OFFSET)
    }

    pub fn write(mut self, bytes: &[u8]) -> Self {
        for &b in bytes {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(FNV_PRIME);
        }
        self
    }

    pub fn write_u64(self, v: u64) -> Self {
        self.write(&v.to_le_bytes())
    }

    pub fn write_usize(self, v: usize) -> Self {
        self.write_u64(v as u64)
    }

    pub fn write_f64(self, v: f64) -> Self {
        self.write_u64(v.to_bits())
    }

    pub fn write_f64s(mut self, vs: &[f64]) -> Self {
        for &v in vs {
            self = self.write_f64(v);
        }
        self
    }

    pub fn write_str(self, s: &str) -> Self {
        self.write(s.as_bytes())
    }

    pub fn finish(self) -> u64 {
        self.0
    }
}

impl Default for Fnv64 {
    fn default() -> Self {
        Self::new()
    }
}
