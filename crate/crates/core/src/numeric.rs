//! Small exact-arithmetic helpers shared by the counting and bound modules.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

pub fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * i)
}

/// `N! / (N - m)!`.
pub fn falling_factorial(n: u64, m: u64) -> BigUint {
    if m > n {
        return BigUint::zero();
    }
    ((n - m + 1)..=n).fold(BigUint::one(), |acc, i| acc * i)
}

/// Number of surjections from an `h`-set onto an `s`-set.
pub fn surjections(h: u64, s: u64) -> BigUint {
    let mut total = BigInt::zero();
    for i in 0..=s {
        let term = BigInt::from(binomial(s, i)) * BigInt::from(BigUint::from(s - i).pow(h as u32));
        if i % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    total.to_biguint().expect("surjection count is nonnegative")
}

/// Natural logarithm of a positive big integer, accurate to double precision.
pub fn ln_big(x: &BigUint) -> f64 {
    assert!(!x.is_zero(), "logarithm of zero");
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("fits in f64").ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().expect("64-bit prefix fits in f64");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

pub fn log2_big(x: &BigUint) -> f64 {
    ln_big(x) / std::f64::consts::LN_2
}

/// `⌈a / b⌉` for `b > 0`.
pub fn ceil_div(a: &BigUint, b: &BigUint) -> BigUint {
    assert!(!b.is_zero(), "division by zero");
    (a + b - BigUint::one()) / b
}

/// Serde adapter writing big integers as decimal strings.
pub mod decimal {
    use num_bigint::BigUint;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(x)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(D::Error::custom)
    }
}
