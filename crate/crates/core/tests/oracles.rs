use std::collections::BTreeMap;

use genusforge::arith::{legendre, primes_below};
use genusforge::classify::{embedded_entries, ClassificationEntry};
use genusforge::criteria::{tame_conditions, CharacteristicContext, Realized};
use genusforge::discform::isometric;
use genusforge::genus::{equivalent_2adic, move_closure, parse_symbol, symbol_from_gram};
use genusforge::lattice::{determinant, discriminant_form, GramMatrix};
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn move_closure_of_table_spellings() {
    let a = move_closure(&parse_symbol("2_1^+1 4_1^+1").unwrap()).unwrap();
    // 4_3^+1 alone is not a legal constituent; the compartment total is
    let raw = parse_symbol("2_7^+1 4_3^+1").unwrap();
    let b = move_closure(&raw.respell_compartments().unwrap()).unwrap();
    assert_eq!(a, b);
    assert!(move_closure(&raw).is_err());
    let shown: Vec<String> = a.iter().map(|s| s.to_string()).collect();
    assert_eq!(shown, ["2_3^-1 4_3^-1", "2_1^+1 4_1^+1"]);
}

fn random_even(rng: &mut ChaCha8Rng, n: usize) -> Option<GramMatrix> {
    let mut m = vec![vec![0i64; n]; n];
    for i in 0..n {
        m[i][i] = 2 * rng.gen_range(-3..=3);
        for j in i + 1..n {
            let x = rng.gen_range(-2..=2);
            m[i][j] = x;
            m[j][i] = x;
        }
    }
    let g = GramMatrix::new(m).ok()?;
    let d = determinant(&g);
    (!d.is_zero() && d.to_i64().unwrap().abs() <= 128).then_some(g)
}

// An even 2-adic lattice is fixed by its rank, its determinant square class
// and the 2-part of its discriminant form. Compare that with the symbol
// calculus on random lattices sharing rank and determinant.
#[test]
fn two_adic_equivalence_matches_discriminant_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut pools: BTreeMap<(usize, i64), Vec<GramMatrix>> = BTreeMap::new();
    for _ in 0..4000 {
        let n = rng.gen_range(2..=4);
        if let Some(g) = random_even(&mut rng, n) {
            let d = determinant(&g).to_i64().unwrap();
            let pool = pools.entry((n, d)).or_default();
            if pool.len() < 6 {
                pool.push(g);
            }
        }
    }
    let (mut same, mut different) = (0, 0);
    for pool in pools.values() {
        for i in 0..pool.len() {
            for j in i + 1..pool.len() {
                let (g, h) = (&pool[i], &pool[j]);
                let sym = equivalent_2adic(&symbol_from_gram(g), &symbol_from_gram(h)).unwrap();
                let a = discriminant_form(g).unwrap().sylow(2);
                let b = discriminant_form(h).unwrap().sylow(2);
                let form = isometric(&a, &b).unwrap();
                assert_eq!(sym, form, "{:?} vs {:?}", g.entries(), h.entries());
                if sym {
                    same += 1;
                } else {
                    different += 1;
                }
            }
        }
    }
    assert!(same > 100 && different > 20, "weak sample: {same} equivalent, {different} not");
}

#[test]
fn characteristic_contexts_balance() {
    for p in primes_below(200) {
        let ctx = CharacteristicContext::new(p).unwrap();
        let ns = &ctx.ns_genus;
        assert!(ns.exists().unwrap().exists);
        let excess: i64 = ns.primes().into_iter().filter(|&q| q != 2).map(|q| ns.p_excess(q) as i64).sum();
        assert_eq!((-20 + excess - ns.oddity() as i64).rem_euclid(8), 0, "p = {p}");
        assert_eq!(ctx.h_form().order(), p * p);
        assert!(isometric(&ctx.h_form(), &ctx.ns_form()).unwrap());
    }
}

fn is_square_det(e: &ClassificationEntry) -> bool {
    let d = e.genus.abs_det();
    let r = (d as f64).sqrt().round() as u128;
    r * r == d
}

#[test]
fn tame_conditions_single_out_realizable_rank4() {
    let realizable = ["102", "106", "108", "110", "111", "112", "118", "119", "121", "134"];
    let es = embedded_entries();
    let mut seen = 0;
    for e in es.iter().filter(|e| e.rank_fixed == 4 && !is_square_det(e)) {
        if e.genus.primes().iter().any(|&q| e.genus.p_length(q) > 2) {
            continue;
        }
        seen += 1;
        let d = e.genus.abs_det();
        let order = e.group_order.unwrap_or(1);
        for p in primes_below(200) {
            if p == 2 || d % p as u128 == 0 || order % p == 0 || legendre(d as i128, p) != -1 {
                continue;
            }
            let yes = tame_conditions(e, p).unwrap().realized == Realized::Yes;
            assert_eq!(yes, realizable.contains(&e.hm_id.to_string().as_str()), "HM {} at {p}", e.hm_id);
        }
    }
    assert!(seen >= 10);
}
