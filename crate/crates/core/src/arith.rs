//! Integer arithmetic behind shell sizes: representation counts as sums of
//! squares, the divisor-class formula for two squares, primorials of primes
//! `≡ 1 (mod 4)` and pigeonhole selection of rich shells.

use serde::Serialize;

use crate::{Error, Result};

/// Number of integer points on the sphere `|k|² = n` in `Z^d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ShellCount {
    pub d: usize,
    pub n: u64,
    pub count: u64,
}

/// Integer square root, `⌊√n⌋`.
pub fn isqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u64;
    while x.checked_mul(x).is_none_or(|sq| sq > n) {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).is_some_and(|sq| sq <= n) {
        x += 1;
    }
    x
}

pub fn is_square(n: u64) -> bool {
    let r = isqrt(n);
    r * r == n
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::invalid(format!("dimension must be >= 2, got {d}")));
    }
    Ok(())
}

fn check_n(n: i64) -> Result<u64> {
    u64::try_from(n).map_err(|_| Error::invalid(format!("n must be >= 0, got {n}")))
}

/// Counts `k ∈ Z^d` with `|k|² = n` by exhaustive enumeration, pruning each
/// coordinate to `|k_i| ≤ ⌊√(remaining)⌋`.
pub fn sum_of_squares_count(d: usize, n: i64) -> Result<ShellCount> {
    check_dim(d)?;
    let n = check_n(n)?;
    Ok(ShellCount {
        d,
        n,
        count: count_rec(d, n),
    })
}

fn count_rec(d: usize, n: u64) -> u64 {
    if d == 1 {
        return match n {
            0 => 1,
            _ if is_square(n) => 2,
            _ => 0,
        };
    }
    let r = isqrt(n);
    let mut total = count_rec(d - 1, n);
    for x in 1..=r {
        total += 2 * count_rec(d - 1, n - x * x);
    }
    total
}

/// Prime factorization by trial division, as `(prime, exponent)` pairs in
/// increasing order.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    if n < 2 {
        return out;
    }
    let mut push = |p: u64, n: &mut u64| {
        let mut e = 0;
        while (*n).is_multiple_of(p) {
            *n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
    };
    push(2, &mut n);
    let mut p = 3;
    while p * p <= n {
        push(p, &mut n);
        p += 2;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// All divisors of `n`, unsorted.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut divs = vec![1u64];
    for (p, e) in factorize(n) {
        let base = divs.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..base {
                divs.push(divs[i] * pk);
            }
        }
    }
    divs
}

/// Jacobi's two-square formula `4·(d₁(n) − d₃(n))`, where `d_j` counts the
/// divisors of `n` congruent to `j` mod 4.
pub fn jacobi_count(n: i64) -> Result<u64> {
    if n <= 0 {
        return Err(Error::invalid(format!("n must be >= 1, got {n}")));
    }
    let (mut d1, mut d3) = (0i64, 0i64);
    for q in divisors(n as u64) {
        match q % 4 {
            1 => d1 += 1,
            3 => d3 += 1,
            _ => {}
        }
    }
    Ok(4 * (d1 - d3) as u64)
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && factorize(n).first() == Some(&(n, 1))
}

/// Product of all primes `p ≡ 1 (mod 4)` with `p ≤ bound`. Overflow of
/// `u64` is reported with the largest bound whose product still fits.
pub fn primorial_1mod4(bound: u64) -> Result<u64> {
    if bound < 5 {
        return Err(Error::invalid(format!("bound must be >= 5, got {bound}")));
    }
    let mut acc: u64 = 1;
    let mut p = 5;
    while p <= bound {
        if is_prime(p) {
            acc = match acc.checked_mul(p) {
                Some(v) => v,
                None => return Err(Error::Overflow { largest_safe: p - 1 }),
            };
        }
        p += 4;
    }
    Ok(acc)
}

/// Scans `n ∈ [(R − w)², (R + w)²]` and returns the richest shell in
/// dimension `d`; ties go to the smallest `n`.
pub fn rich_shell_near(d: usize, radius: f64, window: f64) -> Result<ShellCount> {
    check_dim(d)?;
    if !(window > 0.0 && window <= radius) {
        return Err(Error::invalid(format!(
            "need 0 < window <= R, got window {window}, R {radius}"
        )));
    }
    let lo = ((radius - window) * (radius - window)).ceil() as u64;
    let hi = ((radius + window) * (radius + window)).floor() as u64;
    if lo > hi {
        return Err(Error::Empty(format!("no integers in [{lo}, {hi}]")));
    }
    let mut best: Option<ShellCount> = None;
    for n in lo..=hi {
        let count = count_rec(d, n);
        if best.is_none_or(|b| count > b.count) {
            best = Some(ShellCount { d, n, count });
        }
    }
    best.ok_or_else(|| Error::Empty("empty candidate range".into()))
}
