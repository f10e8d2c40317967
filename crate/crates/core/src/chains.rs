//! Exact t-chain counts in `B_n`.
//!
//! Two independent routes are provided: the inclusion–exclusion closed form
//! and a dynamic program over rank profiles `s_1 < s_2 < … < s_t`. Brute
//! enumeration lives in [`crate::lattice`].

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;

use crate::error::{param, Result};
use crate::lattice::middle_window;
use crate::numeric::binomial;

fn check_range(n: usize, t: usize) -> Result<()> {
    if t == 0 {
        return param("chain length t must be at least 1");
    }
    if t > n + 1 {
        return param(format!("chain length t = {t} exceeds the height n + 1 = {} of B_{n}", n + 1));
    }
    Ok(())
}

/// `h_p(t) = Σ_{j=0}^{t-1} (-1)^j C(t-1, j) (t+1-j)^p`.
pub fn h_formula(p: usize, t: usize) -> Result<BigUint> {
    check_range(p, t)?;
    let mut total = BigInt::zero();
    for j in 0..t {
        let term = BigInt::from(binomial((t - 1) as u64, j as u64))
            * BigInt::from(BigUint::from((t + 1 - j) as u64).pow(p as u32));
        if j % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    Ok(total.to_biguint().expect("chain count is nonnegative"))
}

/// Sum over rank profiles restricted to ranks `lo..=hi`.
fn rank_profile_count(n: usize, t: usize, lo: usize, hi: usize) -> BigUint {
    // ending[s] = number of j-chains whose top member has rank s.
    let mut ending: Vec<BigUint> = (0..=n)
        .map(|s| {
            if (lo..=hi).contains(&s) {
                binomial(n as u64, s as u64)
            } else {
                BigUint::zero()
            }
        })
        .collect();
    for _ in 1..t {
        let mut next = vec![BigUint::zero(); n + 1];
        for (top, slot) in next.iter_mut().enumerate().take(hi + 1).skip(lo) {
            for (prev, count) in ending.iter().enumerate().take(top) {
                if !count.is_zero() {
                    *slot += count * binomial((n - prev) as u64, (top - prev) as u64);
                }
            }
        }
        ending = next;
    }
    ending.into_iter().sum()
}

/// Rank-profile dynamic program; agrees with [`h_formula`].
pub fn h_rank_dp(n: usize, t: usize) -> Result<BigUint> {
    check_range(n, t)?;
    Ok(rank_profile_count(n, t, 0, n))
}

/// `h_{n,m}(t)`: t-chains inside the middle `m` ranks starting at
/// `⌊(n-m)/2⌋`.
pub fn h_window(n: usize, m: usize, t: usize) -> Result<BigUint> {
    let (lo, hi) = middle_window(n, m)?;
    if t == 0 || t > m {
        return param(format!("chain length t = {t} must satisfy 1 <= t <= m = {m}"));
    }
    Ok(rank_profile_count(n, t, lo, hi))
}
