//! 2-adic symbol moves: oddity fusion inside compartments and sign walking
//! along trains. Canonical forms are picked from the full move closure.

use std::collections::BTreeSet;

use super::{odd_units, Constituent, GenusError, GenusSymbol, Oddity};

/// Fixed combinatorics of a 2-adic symbol: compartments and trains.
struct Layout {
    cons: Vec<Constituent>,
    // compartment index for odd constituents
    comp: Vec<Option<usize>>,
    ncomp: usize,
    // effects of each legal walk: (sign flip mask, per-compartment +4 mask)
    walks: Vec<(Vec<bool>, Vec<bool>)>,
}

impl Layout {
    fn new(cons: Vec<Constituent>) -> Self {
        let n = cons.len();
        let exps: Vec<u32> = cons.iter().map(|c| c.scale_exp).collect();
        let odd_at = |e: u32| cons.iter().position(|c| c.scale_exp == e && c.is_odd_type());
        let mut comp = vec![None; n];
        let mut ncomp = 0;
        for i in 0..n {
            if !cons[i].is_odd_type() {
                continue;
            }
            let prev = exps[i].checked_sub(1).and_then(odd_at);
            comp[i] = match prev {
                Some(j) => comp[j],
                None => {
                    ncomp += 1;
                    Some(ncomp - 1)
                }
            };
        }
        let mut walks = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let mut bump = vec![false; ncomp];
                let mut ok = true;
                for k in exps[i]..exps[j] {
                    match (odd_at(k), odd_at(k + 1)) {
                        (Some(a), _) => bump[comp[a].unwrap()] ^= true,
                        (None, Some(b)) => bump[comp[b].unwrap()] ^= true,
                        (None, None) => {
                            ok = false;
                            break;
                        }
                    }
                }
                // a pair of odd neighbours shares one compartment: +4 once
                if ok {
                    let mut flip = vec![false; n];
                    flip[i] = true;
                    flip[j] = true;
                    walks.push((flip, bump));
                }
            }
        }
        Layout { cons, comp, ncomp, walks }
    }

    fn members(&self, c: usize) -> Vec<usize> {
        (0..self.cons.len()).filter(|&i| self.comp[i] == Some(c)).collect()
    }

    /// All legal oddity assignments for compartment c with given signs and total.
    fn distributions(&self, c: usize, signs: &[i8], total: u8, limit: usize) -> Vec<Vec<u8>> {
        let mem = self.members(c);
        let mut out = Vec::new();
        let mut cur = Vec::new();
        self.dist_rec(&mem, signs, total, &mut cur, &mut out, limit);
        out
    }

    fn dist_rec(&self, mem: &[usize], signs: &[i8], total: u8, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>, limit: usize) {
        if out.len() >= limit {
            return;
        }
        let k = cur.len();
        if k == mem.len() {
            let s: u32 = cur.iter().map(|&t| t as u32).sum();
            if s % 8 == total as u32 {
                out.push(cur.clone());
            }
            return;
        }
        let c = &self.cons[mem[k]];
        for t in 0..8u8 {
            if odd_units(c.dim, signs[mem[k]], t).is_some() {
                cur.push(t);
                self.dist_rec(mem, signs, total, cur, out, limit);
                cur.pop();
            }
        }
    }

    fn legal(&self, signs: &[i8], totals: &[u8]) -> bool {
        // even constituents: dim ≥ 2 even, any sign is realizable
        (0..self.ncomp).all(|c| !self.distributions(c, signs, totals[c], 1).is_empty())
    }

    fn start(&self) -> (Vec<i8>, Vec<u8>) {
        let signs = self.cons.iter().map(|c| c.sign).collect();
        let mut totals = vec![0u8; self.ncomp];
        for (i, c) in self.cons.iter().enumerate() {
            if let Some(k) = self.comp[i] {
                totals[k] = (totals[k] + c.oddity_value()) % 8;
            }
        }
        (signs, totals)
    }

    /// Legal states reachable by any combination of walks.
    fn closure(&self) -> Vec<(Vec<i8>, Vec<u8>)> {
        let start = self.start();
        let mut seen = BTreeSet::new();
        seen.insert(start.clone());
        let mut stack = vec![start];
        while let Some((s, t)) = stack.pop() {
            for (flip, bump) in &self.walks {
                let ns: Vec<i8> = s.iter().zip(flip).map(|(&x, &f)| if f { -x } else { x }).collect();
                let nt: Vec<u8> = t.iter().zip(bump).map(|(&x, &b)| if b { (x + 4) % 8 } else { x }).collect();
                let st = (ns, nt);
                if seen.insert(st.clone()) {
                    stack.push(st);
                }
            }
        }
        seen.into_iter().filter(|(s, t)| self.legal(s, t)).collect()
    }

    fn spell(&self, signs: &[i8], odds: &[(usize, Vec<u8>)]) -> Vec<Constituent> {
        let mut out = self.cons.clone();
        for (i, c) in out.iter_mut().enumerate() {
            c.sign = signs[i];
        }
        for (c, dist) in odds {
            for (m, &t) in self.members(*c).iter().zip(dist) {
                out[*m].oddity = Some(Oddity::Odd(t));
            }
        }
        out
    }
}

fn two_adic_part(s: &GenusSymbol) -> Result<Vec<Constituent>, GenusError> {
    let cons: Vec<Constituent> = s.constituents(2).to_vec();
    for c in &cons {
        c.check()?;
    }
    Ok(cons)
}

fn with_two_adic(s: &GenusSymbol, cons: Vec<Constituent>) -> GenusSymbol {
    let mut out = s.clone();
    if !cons.is_empty() {
        out.per_prime.insert(2, cons);
    }
    out
}

/// Canonical 2-adic spelling: fewest minus signs, pushed to the lowest
/// scales, then smallest compartment totals and oddity distributions.
pub fn canonicalize_2adic(s: &GenusSymbol) -> Result<GenusSymbol, GenusError> {
    let cons = two_adic_part(s)?;
    if cons.is_empty() {
        return Ok(s.clone());
    }
    let lay = Layout::new(cons);
    let mut states = lay.closure();
    if states.is_empty() {
        return Err(GenusError::Illegal(format!("{s}")));
    }
    states.sort_by_key(|(sg, t)| {
        let minus = sg.iter().filter(|&&x| x < 0).count();
        (minus, sg.clone(), t.clone())
    });
    let (sg, t) = states.swap_remove(0);
    let odds: Vec<(usize, Vec<u8>)> =
        (0..lay.ncomp).map(|c| (c, lay.distributions(c, &sg, t[c], 1).remove(0))).collect();
    Ok(with_two_adic(s, lay.spell(&sg, &odds)))
}

/// Every legal spelling reachable by fusion and walking moves.
pub fn move_closure(s: &GenusSymbol) -> Result<Vec<GenusSymbol>, GenusError> {
    let cons = two_adic_part(s)?;
    if cons.is_empty() {
        return Ok(vec![s.clone()]);
    }
    let lay = Layout::new(cons);
    let mut out = BTreeSet::new();
    for (sg, t) in lay.closure() {
        let per: Vec<Vec<Vec<u8>>> = (0..lay.ncomp).map(|c| lay.distributions(c, &sg, t[c], usize::MAX)).collect();
        let mut idx = vec![0usize; lay.ncomp];
        loop {
            let odds: Vec<(usize, Vec<u8>)> = (0..lay.ncomp).map(|c| (c, per[c][idx[c]].clone())).collect();
            out.insert(lay.spell(&sg, &odds));
            let mut k = 0;
            while k < lay.ncomp {
                idx[k] += 1;
                if idx[k] < per[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == lay.ncomp {
                break;
            }
        }
    }
    Ok(out.into_iter().map(|c| with_two_adic(s, c)).collect())
}

/// Same 2-adic lattice (by canonical forms).
pub fn equivalent_2adic(a: &GenusSymbol, b: &GenusSymbol) -> Result<bool, GenusError> {
    let ca = canonicalize_2adic(a)?;
    let cb = canonicalize_2adic(b)?;
    Ok(ca.constituents(2) == cb.constituents(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genus::parse_symbol;

    fn sym(s: &str) -> GenusSymbol {
        parse_symbol(s).unwrap()
    }

    #[test]
    fn all_plus_is_canonical() {
        let s = sym("2_1^+1 4_1^+1 16_1^+1");
        assert_eq!(canonicalize_2adic(&s).unwrap().to_string(), "2_1^+1 4_1^+1 16_1^+1");
    }

    #[test]
    fn idempotent() {
        for t in ["2_1^+1 4_1^+1", "2_3^-1 4_3^-1", "2_II^-2 8_3^-1", "2_5^+3 7^-1", "4_2^+2 8_5^-1"] {
            let c = canonicalize_2adic(&sym(t)).unwrap();
            assert_eq!(canonicalize_2adic(&c).unwrap(), c, "{t}");
        }
    }

    #[test]
    fn closure_classes() {
        let a = move_closure(&sym("2_1^+1 4_1^+1")).unwrap();
        let b = move_closure(&sym("2_3^-1 4_3^-1")).unwrap();
        assert_eq!(a, b);
        assert!(a.contains(&sym("2_3^-1 4_3^-1")));
        assert!(!a.contains(&sym("2_7^+1 4_3^-1")));
    }

    #[test]
    fn fake_walk_with_unimodular_part() {
        let a = sym("II_{0,21} 2_7^+1 3^-1 11^-1");
        let b = sym("II_{0,21} 2_3^-1 3^-1 11^-1");
        assert!(equivalent_2adic(&a, &b).unwrap());
        assert!(!equivalent_2adic(&sym("2_7^+1"), &sym("2_3^-1")).unwrap());
    }
}
