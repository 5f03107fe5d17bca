//! Test oracles shared by the integration suites.
#![allow(dead_code)]

/// Straight transliteration of Matsumoto & Nishimura's mt19937ar.c
/// (`init_genrand`, `genrand_int32`, `genrand_res53`), kept independent of
/// the library implementation.
pub struct MtReference {
    mt: [u32; 624],
    mti: usize,
}

impl MtReference {
    pub fn init_genrand(s: u32) -> Self {
        let mut mt = [0u32; 624];
        mt[0] = s;
        for mti in 1..624 {
            mt[mti] = 1812433253u32
                .wrapping_mul(mt[mti - 1] ^ (mt[mti - 1] >> 30))
                .wrapping_add(mti as u32);
        }
        MtReference { mt, mti: 624 }
    }

    pub fn genrand_int32(&mut self) -> u32 {
        const MAG01: [u32; 2] = [0x0, 0x9908b0df];
        if self.mti >= 624 {
            let mut kk = 0;
            while kk < 624 - 397 {
                let y = (self.mt[kk] & 0x80000000) | (self.mt[kk + 1] & 0x7fffffff);
                self.mt[kk] = self.mt[kk + 397] ^ (y >> 1) ^ MAG01[(y & 1) as usize];
                kk += 1;
            }
            while kk < 623 {
                let y = (self.mt[kk] & 0x80000000) | (self.mt[kk + 1] & 0x7fffffff);
                self.mt[kk] = self.mt[kk + 397 - 624] ^ (y >> 1) ^ MAG01[(y & 1) as usize];
                kk += 1;
            }
            let y = (self.mt[623] & 0x80000000) | (self.mt[0] & 0x7fffffff);
            self.mt[623] = self.mt[396] ^ (y >> 1) ^ MAG01[(y & 1) as usize];
            self.mti = 0;
        }
        let mut y = self.mt[self.mti];
        self.mti += 1;
        y ^= y >> 11;
        y ^= (y << 7) & 0x9d2c5680;
        y ^= (y << 15) & 0xefc60000;
        y ^= y >> 18;
        y
    }

    pub fn genrand_res53(&mut self) -> f64 {
        let a = self.genrand_int32() >> 5;
        let b = self.genrand_int32() >> 6;
        (a as f64 * 67108864.0 + b as f64) * (1.0 / 9007199254740992.0)
    }
}

/// First ten `genrand_int32` outputs for seed 5489 from the reference C code.
pub const MT_5489_FIRST_10: [u32; 10] = [
    3499211612, 581869302, 3890346734, 3586334585, 545404204, 4161255391, 3922919429, 949333985,
    2715962298, 1323567403,
];

/// First two 53-bit uniforms for seed 5489 as produced by numpy's
/// `RandomState(5489).random_sample()`.
pub const RES53_5489_FIRST_2: [f64; 2] = [0.8147236863931789, 0.9057919370756192];
