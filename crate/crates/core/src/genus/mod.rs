//! Conway–Sloane genus symbols: parsing, printing, local invariants,
//! negation, existence, Jordan decomposition and 2-adic canonical forms.

mod canon;
mod jordan;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::arith::{is_prime, legendre, pow_mod, prime_power, unit_symbol};

pub use canon::{canonicalize_2adic, equivalent_2adic, move_closure};
pub use jordan::symbol_from_gram;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenusError {
    #[error("malformed token {0:?}: {1}")]
    Malformed(String, String),
    #[error("inconsistent dimensions at p={0}: {1}")]
    Inconsistent(u64, String),
    #[error("illegal constituent {0}")]
    Illegal(String),
    #[error("symbol has no signature; global checks are disabled")]
    NoSignature,
}

/// 2-adic oddity marker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Oddity {
    TypeII,
    Odd(u8),
}

/// One Jordan constituent q^{εn} (with oddity at p = 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Constituent {
    pub prime: u64,
    pub scale_exp: u32,
    pub dim: u32,
    pub sign: i8,
    pub oddity: Option<Oddity>,
}

impl Constituent {
    pub fn odd_prime(prime: u64, scale_exp: u32, dim: u32, sign: i8) -> Self {
        Constituent { prime, scale_exp, dim, sign, oddity: None }
    }

    pub fn two_adic(scale_exp: u32, dim: u32, sign: i8, oddity: Oddity) -> Self {
        Constituent { prime: 2, scale_exp, dim, sign, oddity: Some(oddity) }
    }

    pub fn scale(&self) -> u64 {
        self.prime.pow(self.scale_exp)
    }

    pub fn is_odd_type(&self) -> bool {
        matches!(self.oddity, Some(Oddity::Odd(_)))
    }

    pub fn oddity_value(&self) -> u8 {
        match self.oddity {
            Some(Oddity::Odd(t)) => t,
            _ => 0,
        }
    }

    /// Legality: type II needs even dim; odd 2-adic data must be realized by
    /// a diagonal form with entries in {1,3,5,7}.
    pub fn check(&self) -> Result<(), GenusError> {
        if self.sign != 1 && self.sign != -1 || self.dim == 0 {
            return Err(GenusError::Illegal(self.to_string()));
        }
        match (self.prime, self.oddity) {
            (2, Some(Oddity::TypeII)) if self.dim.is_multiple_of(2) => Ok(()),
            (2, Some(Oddity::Odd(t))) if odd_units(self.dim, self.sign, t).is_some() => Ok(()),
            (p, None) if p != 2 => Ok(()),
            _ => Err(GenusError::Illegal(self.to_string())),
        }
    }

    /// Contribution to the p-excess (odd p) or oddity (p = 2), mod 8.
    pub fn excess(&self) -> u8 {
        let anti = self.scale_exp % 2 == 1 && self.sign == -1;
        let four = if anti { 4 } else { 0 };
        if self.prime == 2 {
            ((self.oddity_value() as u32 + four) % 8) as u8
        } else {
            let q = pow_mod(self.prime as u128, self.scale_exp as u128, 8) as u32;
            ((self.dim * ((q + 7) % 8) + four) % 8) as u8
        }
    }
}

/// Diagonal units in {1,3,5,7} with Kronecker sign product `sign` and sum
/// ≡ t (mod 8), smallest first in lexicographic order of counts.
pub fn odd_units(dim: u32, sign: i8, t: u8) -> Option<Vec<u8>> {
    if (t as u32 % 2) != dim % 2 {
        return None;
    }
    for c1 in (0..=dim).rev() {
        for c7 in (0..=dim - c1).rev() {
            for c3 in (0..=dim - c1 - c7).rev() {
                let c5 = dim - c1 - c7 - c3;
                let s = if (c3 + c5).is_multiple_of(2) { 1 } else { -1 };
                let sum = (c1 + 7 * c7 + 3 * c3 + 5 * c5) % 8;
                if s == sign && sum == t as u32 {
                    let mut v = Vec::new();
                    v.extend(std::iter::repeat_n(1, c1 as usize));
                    v.extend(std::iter::repeat_n(3, c3 as usize));
                    v.extend(std::iter::repeat_n(5, c5 as usize));
                    v.extend(std::iter::repeat_n(7, c7 as usize));
                    return Some(v);
                }
            }
        }
    }
    None
}

impl fmt::Display for Constituent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.sign < 0 { '-' } else { '+' };
        match self.oddity {
            None => write!(f, "{}^{}{}", self.scale(), sign, self.dim),
            Some(Oddity::TypeII) => write!(f, "{}_II^{}{}", self.scale(), sign, self.dim),
            Some(Oddity::Odd(t)) => write!(f, "{}_{}^{}{}", self.scale(), t, sign, self.dim),
        }
    }
}

/// Signature plus per-prime constituents (ascending scale). With a signature,
/// unimodular constituents are stored explicitly.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GenusSymbol {
    pub signature: Option<(u32, u32)>,
    pub even: bool,
    pub per_prime: BTreeMap<u64, Vec<Constituent>>,
}

/// Outcome of the existence check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Existence {
    pub exists: bool,
    pub reason: String,
}

impl GenusSymbol {
    /// Fragment without signature.
    pub fn fragment(constituents: Vec<Constituent>) -> Self {
        let mut s = GenusSymbol { signature: None, even: true, per_prime: BTreeMap::new() };
        for c in constituents {
            s.per_prime.entry(c.prime).or_default().push(c);
        }
        s.normalize();
        s
    }

    fn normalize(&mut self) {
        for v in self.per_prime.values_mut() {
            v.sort_by_key(|c| c.scale_exp);
        }
        self.per_prime.retain(|_, v| !v.is_empty());
    }

    pub fn rank(&self) -> Option<u32> {
        self.signature.map(|(a, b)| a + b)
    }

    pub fn constituents(&self, p: u64) -> &[Constituent] {
        self.per_prime.get(&p).map(|v| v.as_slice()).unwrap_or(&[])
    }

    /// Nonunimodular constituents at p.
    pub fn nonunimodular(&self, p: u64) -> Vec<Constituent> {
        self.constituents(p).iter().copied().filter(|c| c.scale_exp > 0).collect()
    }

    /// Primes carrying nonunimodular constituents.
    pub fn primes(&self) -> Vec<u64> {
        self.per_prime
            .iter()
            .filter(|(_, v)| v.iter().any(|c| c.scale_exp > 0))
            .map(|(&p, _)| p)
            .collect()
    }

    /// |det| implied by the constituents.
    pub fn abs_det(&self) -> u128 {
        let mut d: u128 = 1;
        for v in self.per_prime.values() {
            for c in v {
                d *= (c.scale() as u128).pow(c.dim);
            }
        }
        d
    }

    /// Nonunimodular part only (the discriminant-form data).
    pub fn strip(&self) -> GenusSymbol {
        let mut s = self.clone();
        s.signature = None;
        for v in s.per_prime.values_mut() {
            v.retain(|c| c.scale_exp > 0);
        }
        s.normalize();
        s
    }

    /// Residue of the p-adic unit part of det modulo m (m = p or 8).
    fn det_unit_residue(&self, p: u64, m: u64) -> i128 {
        let (_, minus) = self.signature.unwrap_or((0, 0));
        let mut r: i128 = if minus % 2 == 1 { -1 } else { 1 };
        for (&q, v) in &self.per_prime {
            if q == p {
                continue;
            }
            for c in v {
                let e = (c.scale_exp * c.dim) as u128;
                r = r * pow_mod(q as u128, e, m as u128) as i128 % m as i128;
            }
        }
        r.rem_euclid(m as i128)
    }

    /// (u/p) for the unit part u of det at p.
    pub fn det_unit_symbol(&self, p: u64) -> i8 {
        let m = if p == 2 { 8 } else { p };
        unit_symbol(self.det_unit_residue(p, m), p)
    }

    /// Attach a signature and fill in unimodular constituents.
    pub fn with_signature(mut self, plus: u32, minus: u32, even: bool) -> Result<Self, GenusError> {
        self.signature = Some((plus, minus));
        self.even = even;
        let rank = plus + minus;
        let mut primes: Vec<u64> = self.per_prime.keys().copied().collect();
        if even && !primes.contains(&2) {
            primes.push(2);
        }
        for p in primes {
            let list = self.per_prime.entry(p).or_default();
            let l: u32 = list.iter().filter(|c| c.scale_exp > 0).map(|c| c.dim).sum();
            if l > rank {
                return Err(GenusError::Inconsistent(p, format!("length {l} exceeds rank {rank}")));
            }
            let n0 = rank - l;
            if let Some(u) = list.iter().find(|c| c.scale_exp == 0) {
                if u.dim != n0 {
                    return Err(GenusError::Inconsistent(p, format!("unimodular dim {} != {n0}", u.dim)));
                }
                continue;
            }
            if n0 == 0 {
                continue;
            }
            if p == 2 && !even {
                return Err(GenusError::Inconsistent(2, "odd lattice needs an explicit 2-adic unimodular constituent".into()));
            }
            if p == 2 && n0 % 2 == 1 {
                return Err(GenusError::Inconsistent(2, format!("even lattice with odd unimodular dim {n0}")));
            }
            let prod: i8 = list.iter().map(|c| c.sign).product();
            let sign = self.det_unit_symbol(p) * prod;
            let list = self.per_prime.get_mut(&p).unwrap();
            let c = if p == 2 {
                Constituent::two_adic(0, n0, sign, Oddity::TypeII)
            } else {
                Constituent::odd_prime(p, 0, n0, sign)
            };
            list.insert(0, c);
        }
        self.normalize();
        Ok(self)
    }

    pub fn p_length(&self, p: u64) -> u32 {
        self.constituents(p).iter().filter(|c| c.scale_exp > 0).map(|c| c.dim).sum()
    }

    pub fn negate(&self) -> GenusSymbol {
        let mut s = self.clone();
        s.signature = self.signature.map(|(a, b)| (b, a));
        for (&p, v) in s.per_prime.iter_mut() {
            for c in v.iter_mut() {
                if p == 2 {
                    if let Some(Oddity::Odd(t)) = c.oddity {
                        c.oddity = Some(Oddity::Odd((8 - t) % 8));
                    }
                } else if c.dim % 2 == 1 {
                    c.sign *= legendre(-1, p);
                }
            }
        }
        s
    }

    pub fn p_excess(&self, p: u64) -> u8 {
        assert!(p != 2);
        (self.constituents(p).iter().map(|c| c.excess() as u32).sum::<u32>() % 8) as u8
    }

    pub fn oddity(&self) -> u8 {
        (self.constituents(2).iter().map(|c| c.excess() as u32).sum::<u32>() % 8) as u8
    }

    pub fn check_constituents(&self) -> Result<(), GenusError> {
        for v in self.per_prime.values() {
            for c in v {
                c.check()?;
            }
        }
        Ok(())
    }

    /// Respell 2-adic compartments whose members are individually illegal
    /// (e.g. 2_5^+1 4_1^+1) with legal oddities of the same signs and the
    /// same compartment total. Only the compartment total is an invariant.
    pub fn respell_compartments(&self) -> Result<GenusSymbol, GenusError> {
        let mut out = self.clone();
        let Some(list) = out.per_prime.get_mut(&2) else {
            return Ok(out);
        };
        let mut i = 0;
        while i < list.len() {
            if !list[i].is_odd_type() {
                i += 1;
                continue;
            }
            let mut j = i + 1;
            while j < list.len() && list[j].is_odd_type() && list[j].scale_exp == list[j - 1].scale_exp + 1 {
                j += 1;
            }
            if list[i..j].iter().any(|c| c.check().is_err()) {
                let total = list[i..j].iter().map(|c| c.oddity_value() as u32).sum::<u32>() % 8;
                let k = j - i;
                let found = (0..8u32.pow(k as u32)).find_map(|code| {
                    let ts: Vec<u8> = (0..k).map(|m| ((code / 8u32.pow(m as u32)) % 8) as u8).collect();
                    let ok = ts.iter().map(|&t| t as u32).sum::<u32>() % 8 == total
                        && ts.iter().zip(&list[i..j]).all(|(&t, c)| odd_units(c.dim, c.sign, t).is_some());
                    ok.then_some(ts)
                });
                let ts = found.ok_or_else(|| GenusError::Illegal(list[i].to_string()))?;
                for (c, t) in list[i..j].iter_mut().zip(ts) {
                    c.oddity = Some(Oddity::Odd(t));
                }
            }
            i = j;
        }
        Ok(out)
    }

    /// Global existence: local legality, determinant compatibility, parity,
    /// and the oddity formula.
    pub fn exists(&self) -> Result<Existence, GenusError> {
        self.check_constituents()?;
        let (plus, minus) = self.signature.ok_or(GenusError::NoSignature)?;
        let rank = plus + minus;
        let no = |r: String| Ok(Existence { exists: false, reason: r });
        for (&p, v) in &self.per_prime {
            let total: u32 = v.iter().map(|c| c.dim).sum();
            if total != rank {
                return no(format!("dims at {p} sum to {total}, rank is {rank}"));
            }
            let prod: i8 = v.iter().map(|c| c.sign).product();
            let want = self.det_unit_symbol(p);
            if prod != want {
                return no(format!("determinant condition fails at {p}: sign product {prod}, unit symbol {want}"));
            }
        }
        if self.even {
            if let Some(u) = self.constituents(2).iter().find(|c| c.scale_exp == 0) {
                if u.oddity != Some(Oddity::TypeII) {
                    return no("even lattice with odd 2-adic unimodular constituent".into());
                }
            }
        } else if !self.constituents(2).iter().any(|c| c.scale_exp == 0 && c.is_odd_type()) {
            return no("odd lattice without odd 2-adic unimodular constituent".into());
        }
        let mut lhs = (plus as i64 - minus as i64).rem_euclid(8);
        for &p in self.per_prime.keys().filter(|&&p| p != 2) {
            lhs += self.p_excess(p) as i64;
        }
        let lhs = lhs.rem_euclid(8) as u8;
        let odd = self.oddity();
        if lhs != odd {
            return no(format!("oddity formula fails: signature + excesses = {lhs}, oddity = {odd}"));
        }
        Ok(Existence { exists: true, reason: "all local and global conditions hold".into() })
    }
}

impl fmt::Display for GenusSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        if let Some((a, b)) = self.signature {
            parts.push(format!("{}_{{{a},{b}}}", if self.even { "II" } else { "I" }));
        }
        for (&p, v) in &self.per_prime {
            for c in v {
                let show = c.scale_exp > 0 || (p == 2 && !self.even);
                if show {
                    parts.push(c.to_string());
                }
            }
        }
        write!(f, "{}", parts.join(" "))
    }
}

pub fn print_symbol(s: &GenusSymbol) -> String {
    s.to_string()
}

/// Map Unicode input spellings to ASCII.
fn asciify(text: &str) -> String {
    let mut out = String::new();
    for ch in text.chars() {
        match ch {
            '−' | '–' => out.push('-'),
            '₀'..='₉' => {
                out.push('_');
                out.push(char::from_digit(ch as u32 - '₀' as u32, 10).unwrap());
            }
            '⁰' | '¹' | '²' | '³' | '⁴' | '⁵' | '⁶' | '⁷' | '⁸' | '⁹' => {
                let d = "⁰¹²³⁴⁵⁶⁷⁸⁹".chars().position(|c| c == ch).unwrap();
                out.push(char::from_digit(d as u32, 10).unwrap());
            }
            '⁺' => out.push('+'),
            '⁻' => out.push('-'),
            '{' | '}' => {}
            _ => out.push(ch),
        }
    }
    // "_1_3" style from consecutive subscripts collapses to "_13"
    out.replace("__", "_")
}

fn parse_prefix(tok: &str) -> Option<Result<(bool, u32, u32), GenusError>> {
    let (even, rest) = if let Some(r) = tok.strip_prefix("II_") {
        (true, r)
    } else {
        let r = tok.strip_prefix("I_")?;
        (false, r)
    };
    let bad = || GenusError::Malformed(tok.to_string(), "signature prefix".into());
    let mut it = rest.split(',');
    let a = it.next().and_then(|x| x.trim().parse().ok());
    let b = it.next().and_then(|x| x.trim().parse().ok());
    Some(match (a, b, it.next()) {
        (Some(a), Some(b), None) => Ok((even, a, b)),
        _ => Err(bad()),
    })
}

fn parse_constituent(tok: &str) -> Result<Constituent, GenusError> {
    let bad = |m: &str| GenusError::Malformed(tok.to_string(), m.to_string());
    let (head, tail) = tok.split_once('^').ok_or_else(|| bad("missing '^'"))?;
    let (scale_s, odd_s) = match head.split_once('_') {
        Some((s, o)) => (s, Some(o)),
        None => (head, None),
    };
    let scale: u64 = scale_s.parse().map_err(|_| bad("scale"))?;
    let (prime, scale_exp) = if scale == 1 {
        (2, 0)
    } else {
        let (p, e) = prime_power(scale).ok_or_else(|| bad("scale is not a prime power"))?;
        (p, e)
    };
    if scale == 1 && odd_s.is_none() {
        return Err(bad("unimodular constituent needs a 2-adic oddity"));
    }
    let mut chars = tail.chars();
    let sign = match chars.next() {
        Some('+') => 1,
        Some('-') => -1,
        _ => return Err(bad("sign")),
    };
    let dim: u32 = chars.as_str().parse().map_err(|_| bad("dimension"))?;
    if dim == 0 {
        return Err(bad("dimension must be positive"));
    }
    let oddity = match odd_s {
        None if prime == 2 => return Err(bad("2-adic constituent needs an oddity or II")),
        None => None,
        Some(_) if prime != 2 => return Err(bad("oddity only at p = 2")),
        Some("II") => Some(Oddity::TypeII),
        Some(o) => {
            let t: u8 = o.parse().map_err(|_| bad("oddity"))?;
            if t > 7 {
                return Err(bad("oddity out of range"));
            }
            Some(Oddity::Odd(t))
        }
    };
    debug_assert!(is_prime(prime));
    Ok(Constituent { prime, scale_exp, dim, sign, oddity })
}

/// Parse the whitespace-separated symbol grammar.
pub fn parse_symbol(text: &str) -> Result<GenusSymbol, GenusError> {
    let text = asciify(text);
    let mut sig = None;
    let mut cons = Vec::new();
    for (i, tok) in text.split_whitespace().enumerate() {
        if let Some(r) = parse_prefix(tok) {
            if i != 0 {
                return Err(GenusError::Malformed(tok.into(), "prefix must come first".into()));
            }
            sig = Some(r?);
            continue;
        }
        cons.push(parse_constituent(tok)?);
    }
    let mut s = GenusSymbol::fragment(Vec::new());
    for c in cons {
        let list = s.per_prime.entry(c.prime).or_default();
        if list.iter().any(|d| d.scale_exp == c.scale_exp) {
            return Err(GenusError::Malformed(c.to_string(), "repeated scale".into()));
        }
        list.push(c);
    }
    s.normalize();
    match sig {
        Some((even, a, b)) => s.with_signature(a, b, even),
        None => Ok(s),
    }
}

impl std::str::FromStr for GenusSymbol {
    type Err = GenusError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_symbol(s)
    }
}
