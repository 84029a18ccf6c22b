//! p-adic Jordan decomposition of an integral Gram matrix.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{Constituent, GenusSymbol, Oddity};
use crate::arith::{factorize, unit_symbol};
use crate::lattice::{add_basis, determinant, schur_1, schur_2, signature, GramMatrix};

fn val_int(x: &BigInt, p: u64) -> i64 {
    let p = BigInt::from(p);
    let mut x = x.abs();
    let mut v = 0;
    while (&x % &p).is_zero() {
        x /= &p;
        v += 1;
    }
    v
}

fn val(x: &BigRational, p: u64) -> Option<i64> {
    if x.is_zero() {
        None
    } else {
        Some(val_int(x.numer(), p) - val_int(x.denom(), p))
    }
}

/// Unit part of x at p, reduced modulo m (m = p or 8) as a small integer.
fn unit_residue(x: &BigRational, p: u64, m: u64) -> i128 {
    let pb = BigInt::from(p);
    let mut n = x.numer().clone();
    let mut d = x.denom().clone();
    while (&n % &pb).is_zero() {
        n /= &pb;
    }
    while (&d % &pb).is_zero() {
        d /= &pb;
    }
    let mb = BigInt::from(m);
    let n = n.mod_floor(&mb).to_i128().unwrap();
    let d = d.mod_floor(&mb).to_i128().unwrap();
    // units have Legendre/Kronecker symbol equal to that of n·d
    (n * d).rem_euclid(m as i128)
}

/// One Jordan block found during decomposition.
struct Block {
    val: i64,
    dim: u32,
    // unit residue of the block determinant (mod p, or mod 8 at p = 2)
    det_unit: i128,
    // 1×1 unit residue mod 8 at p = 2
    odd_unit: Option<i128>,
}

fn decompose(g: &GramMatrix, p: u64) -> Vec<Block> {
    let mut m: Vec<Vec<BigRational>> = g
        .to_big()
        .into_iter()
        .map(|r| r.into_iter().map(BigRational::from_integer).collect())
        .collect();
    let modulus = if p == 2 { 8 } else { p };
    let mut blocks = Vec::new();
    while !m.is_empty() {
        let n = m.len();
        let mut best: Option<(i64, usize, usize)> = None;
        for i in 0..n {
            for j in i..n {
                if let Some(v) = val(&m[i][j], p) {
                    let better = match best {
                        None => true,
                        Some((bv, bi, bj)) => v < bv || (v == bv && i == j && bi != bj),
                    };
                    if better {
                        best = Some((v, i, j));
                    }
                }
            }
        }
        let (v, i, j) = best.expect("nondegenerate");
        if i == j {
            let a = m[i][i].clone();
            let r = unit_residue(&a, p, modulus);
            blocks.push(Block { val: v, dim: 1, det_unit: r, odd_unit: (p == 2).then_some(r) });
            m = schur_1(&m, i);
        } else if p != 2 {
            // e_i <- e_i + e_j gives a diagonal entry of valuation v
            add_basis(&mut m, i, j, &BigRational::one());
            let a = m[i][i].clone();
            debug_assert_eq!(val(&a, p), Some(v));
            blocks.push(Block { val: v, dim: 1, det_unit: unit_residue(&a, p, modulus), odd_unit: None });
            m = schur_1(&m, i);
        } else {
            let d = &m[i][i] * &m[j][j] - &m[i][j] * &m[i][j];
            debug_assert_eq!(val(&d, 2), Some(2 * v));
            blocks.push(Block { val: v, dim: 2, det_unit: unit_residue(&d, 2, 8), odd_unit: None });
            m = schur_2(&m, i, j);
        }
    }
    blocks
}

/// Genus symbol of an integral lattice, with explicit unimodular parts.
pub fn symbol_from_gram(g: &GramMatrix) -> GenusSymbol {
    let (plus, minus) = signature(g).expect("nondegenerate");
    let det = determinant(g).abs().to_u64().expect("det fits u64");
    let mut primes: Vec<u64> = factorize(det).into_iter().map(|(p, _)| p).collect();
    if !primes.contains(&2) {
        primes.insert(0, 2);
    }
    let mut per_prime = BTreeMap::new();
    for p in primes {
        let mut by_val: BTreeMap<i64, Vec<Block>> = BTreeMap::new();
        for b in decompose(g, p) {
            by_val.entry(b.val).or_default().push(b);
        }
        let mut list = Vec::new();
        for (v, bs) in by_val {
            let dim: u32 = bs.iter().map(|b| b.dim).sum();
            let sign: i8 = bs.iter().map(|b| unit_symbol(b.det_unit, p)).product();
            let oddity = if p == 2 {
                let odd: Vec<i128> = bs.iter().filter_map(|b| b.odd_unit).collect();
                Some(if odd.is_empty() {
                    Oddity::TypeII
                } else {
                    Oddity::Odd((odd.iter().sum::<i128>().rem_euclid(8)) as u8)
                })
            } else {
                None
            };
            list.push(Constituent { prime: p, scale_exp: v as u32, dim, sign, oddity });
        }
        // drop trivial unimodular data at odd primes not dividing det
        per_prime.insert(p, list);
    }
    GenusSymbol { signature: Some((plus as u32, minus as u32)), even: g.is_even(), per_prime }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genus::parse_symbol;

    #[test]
    fn d4_and_44() {
        let d4 = symbol_from_gram(&GramMatrix::d_n(4, false));
        assert_eq!(d4.to_string(), "II_{0,4} 2_II^-2");
        let s44 = symbol_from_gram(&GramMatrix::rank_one(44).unwrap());
        assert_eq!(s44.to_string(), "II_{1,0} 4_3^-1 11^+1");
        assert_eq!(s44, parse_symbol("II_{1,0} 4_3^-1 11^+1").unwrap());
        let u = symbol_from_gram(&GramMatrix::hyperbolic());
        assert_eq!(u.to_string(), "II_{1,1}");
    }

    #[test]
    fn rank_one_symbols() {
        // values recomputed by hand for the Zv column
        for (m, s) in [
            (84, "II_{1,0} 4_5^-1 3^+1 7^-1"),
            (56, "II_{1,0} 8_7^+1 7^+1"),
            (60, "II_{1,0} 4_7^+1 3^-1 5^-1"),
            (66, "II_{1,0} 2_1^+1 3^+1 11^-1"),
            (120, "II_{1,0} 8_7^+1 3^+1 5^+1"),
            (18, "II_{1,0} 2_1^+1 9^-1"),
        ] {
            assert_eq!(symbol_from_gram(&GramMatrix::rank_one(m).unwrap()).to_string(), s, "<{m}>");
        }
    }
}
