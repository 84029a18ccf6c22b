//! Small number-theory helpers: Legendre/Kronecker symbols, factorization.

/// Legendre symbol (a/p) for an odd prime p. Returns 0 when p | a.
pub fn legendre(a: i128, p: u64) -> i8 {
    let p = p as i128;
    let r = a.rem_euclid(p);
    if r == 0 {
        return 0;
    }
    if pow_mod(r as u128, ((p - 1) / 2) as u128, p as u128) == 1 {
        1
    } else {
        -1
    }
}

/// Kronecker symbol (u/2) for odd u: +1 iff u ≡ ±1 (mod 8).
pub fn kronecker2(u: i128) -> i8 {
    match u.rem_euclid(8) {
        1 | 7 => 1,
        3 | 5 => -1,
        _ => 0,
    }
}

/// (u/p) for any prime p, using the Kronecker convention at 2.
pub fn unit_symbol(u: i128, p: u64) -> i8 {
    if p == 2 {
        kronecker2(u)
    } else {
        legendre(u, p)
    }
}

pub fn pow_mod(mut b: u128, mut e: u128, m: u128) -> u128 {
    let mut r = 1u128 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Primes below `bound` by sieve.
pub fn primes_below(bound: usize) -> Vec<u64> {
    if bound < 3 {
        return Vec::new();
    }
    let mut sieve = vec![true; bound];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i < bound {
        if sieve[i] {
            let mut j = i * i;
            while j < bound {
                sieve[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    (0..bound).filter(|&k| sieve[k]).map(|k| k as u64).collect()
}

/// Prime factorization as (prime, exponent) pairs, ascending.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        let mut e = 0;
        while n.is_multiple_of(d) {
            n /= d;
            e += 1;
        }
        if e > 0 {
            out.push((d, e));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// p-adic valuation of a nonzero integer.
pub fn valuation(mut n: u128, p: u64) -> u32 {
    let p = p as u128;
    let mut v = 0;
    while n != 0 && n.is_multiple_of(p) {
        n /= p;
        v += 1;
    }
    v
}

/// Squarefree part of a positive integer.
pub fn squarefree_part(n: u64) -> u64 {
    factorize(n)
        .into_iter()
        .filter(|&(_, e)| e % 2 == 1)
        .map(|(p, _)| p)
        .product()
}

/// If n = p^k for a prime p, return (p, k).
pub fn prime_power(n: u64) -> Option<(u64, u32)> {
    let f = factorize(n);
    if f.len() == 1 {
        Some(f[0])
    } else {
        None
    }
}

/// Inverse of a modulo m (gcd must be 1).
pub fn inv_mod(a: i128, m: i128) -> i128 {
    let (mut old_r, mut r) = (a.rem_euclid(m), m);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    assert_eq!(old_r, 1, "not invertible");
    old_s.rem_euclid(m)
}
