//! Counter-based random number generation.
//!
//! Every Gaussian draw is a pure function of (seed, path, step, slot): the
//! seed keys a Philox 4x32-10 block cipher and the remaining coordinates form
//! the counter. Path p therefore sees identical noise no matter how paths are
//! scheduled across threads, which is what makes ensemble output invariant to
//! `--threads` and lets refinement tests re-derive the same increments.

const MULT: [u32; 2] = [0xD251_1F53, 0xCD9E_8D57];
const WEYL: [u32; 2] = [0x9E37_79B9, 0xBB67_AE85];

/// Slot for the (dW1, dW2) pair of a step.
pub const SLOT_W12: u32 = 0;
/// Slot for the dW3 draw of a step (second lane unused).
pub const SLOT_W3: u32 = 1;
/// Slot reserved for the deterministic bridge coefficient construction.
pub const SLOT_BRIDGE: u32 = 0x42;
/// Slot reserved for randomized test fixtures (strategy shapes and the like).
pub const SLOT_FIXTURE: u32 = 0x7e57;

#[derive(Debug, Clone, Copy)]
pub struct CounterRng {
    key: [u32; 2],
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        CounterRng {
            key: [seed as u32, (seed >> 32) as u32],
        }
    }

    /// One Philox 4x32-10 block.
    pub fn block(&self, ctr: [u32; 4]) -> [u32; 4] {
        let mut c = ctr;
        let mut k = self.key;
        for round in 0..10 {
            if round > 0 {
                k[0] = k[0].wrapping_add(WEYL[0]);
                k[1] = k[1].wrapping_add(WEYL[1]);
            }
            let p0 = u64::from(MULT[0]) * u64::from(c[0]);
            let p1 = u64::from(MULT[1]) * u64::from(c[2]);
            c = [
                ((p1 >> 32) as u32) ^ c[1] ^ k[0],
                p1 as u32,
                ((p0 >> 32) as u32) ^ c[3] ^ k[1],
                p0 as u32,
            ];
        }
        c
    }

    /// Four uniform words for the given coordinates.
    fn words(&self, path: u64, step: u32, slot: u32) -> [u32; 4] {
        self.block([path as u32, (path >> 32) as u32, step, slot])
    }

    /// Two independent standard normals at (path, step, slot), via Box-Muller.
    pub fn normal_pair(&self, path: u64, step: u32, slot: u32) -> (f64, f64) {
        let w = self.words(path, step, slot);
        let u1 = to_open_unit(w[0], w[1]);
        let u2 = to_open_unit(w[2], w[3]);
        let r = (-2.0 * u1.ln()).sqrt();
        let phi = 2.0 * std::f64::consts::PI * u2;
        (r * phi.cos(), r * phi.sin())
    }

    /// One standard normal, discarding the pair's second lane.
    pub fn normal(&self, path: u64, step: u32, slot: u32) -> f64 {
        self.normal_pair(path, step, slot).0
    }
}

/// Maps 64 random bits to the open interval (0, 1): 52-bit grid centered on
/// half-steps, so neither endpoint is reachable and the +0.5 offset stays
/// exactly representable at the top of the range.
fn to_open_unit(hi: u32, lo: u32) -> f64 {
    let x = (u64::from(hi) << 32) | u64::from(lo);
    const SCALE: f64 = 1.0 / 4503599627370496.0; // 2^-52
    ((x >> 12) as f64 + 0.5) * SCALE
}
