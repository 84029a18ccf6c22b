//! One line per acceptance criterion. A criterion that cannot be met is
//! reported as FAIL and listed in EXPECTED_FAILURES with the reason; the
//! test breaks if any other criterion fails or a listed one starts passing.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use genusforge::arith::primes_below;
use genusforge::classify::*;
use genusforge::criteria::{Realized, CharacteristicContext};
use genusforge::discform::{
    all_complements, anti_isometric, enumerate_gluings, from_genus, glue, isometric, FiniteQuadraticForm, Q,
};
use genusforge::genus::{parse_symbol, symbol_from_gram, Constituent, Oddity};
use genusforge::lattice::{discriminant_form, GramMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Row 182b of the glue table: the second printed spelling 2_3^-1 3^-1 11^-1
/// has the same discriminant form and genus as 2_7^+1 3^-1 11^-1, so any
/// form-level glue test gives the same answer for both rows.
const EXPECTED_FAILURES: &[u32] = &[1];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn timed<F: FnOnce() -> Outcome>(limit: Duration, f: F) -> Outcome {
    let t = Instant::now();
    let mut o = f();
    let el = t.elapsed();
    if el > limit {
        o.pass = false;
    }
    o.detail = format!("{} [{:.2?} / limit {:?}]", o.detail, el, limit);
    o
}

fn table_outcome(id: u32) -> Outcome {
    let d = reproduce_table(id).unwrap();
    let bad: Vec<String> = d
        .mismatches()
        .iter()
        .map(|r| format!("{} expected `{}` computed `{}`", r.entry, r.expected, r.computed))
        .collect();
    let n = d.rows.len();
    if bad.is_empty() {
        outcome(true, format!("{n}/{n} rows match"))
    } else {
        outcome(false, format!("{}/{n} rows match; {}", n - bad.len(), bad.join("; ")))
    }
}

fn criterion_1() -> Outcome {
    timed(Duration::from_secs(1), || table_outcome(1))
}

fn criterion_2() -> Outcome {
    let t = table_outcome(2);
    let es = embedded_entries();
    let verdicts: Vec<String> = ["162", "171", "179", "188", "194"]
        .iter()
        .map(|hm| {
            let out = genusforge::criteria::rank3_char2_workflow(find_entry(&es, hm).unwrap()).unwrap();
            if out.verdict.realized == Realized::Yes { "ok" } else { "no" }.to_string()
        })
        .collect();
    let want = ["no", "ok", "no", "no", "ok"];
    let pass = t.pass && verdicts == want;
    outcome(pass, format!("{}; verdicts ({})", t.detail, verdicts.join(", ")))
}

fn criterion_3() -> Outcome {
    let t = table_outcome(7);
    let es = embedded_entries();
    let quoted = [
        ("102", 5, "(21/5)=1"),
        ("108", 2, "(105/2)=1"),
        ("110", 3, "(10/3)=1"),
        ("111", 3, "(7/3)=1"),
        ("112", 11, "(3/11)=1"),
        ("118", 11, "(5/11)=1"),
        ("119", 7, "(30/7)=1"),
        ("106", 5, "(6/5)=1"),
        ("121", 7, "(2/7)=1"),
        ("106", 2, "*"),
        ("112", 2, "**"),
        ("134", 3, "***"),
    ];
    let mut bad = Vec::new();
    for (hm, p, tag) in quoted {
        let v = classify_entry(find_entry(&es, hm).unwrap(), p).unwrap();
        if v.realized != Realized::No || v.short.as_deref() != Some(tag) {
            bad.push(format!("{hm}@{p} gave {:?}", v.short));
        }
    }
    // the 2-adic shorthand is the mod-8 class: 105 = 1 mod 8 is a 2-adic square
    let mod8 = 105 % 8 == 1;
    let pass = t.pass && bad.is_empty() && mod8;
    outcome(pass, format!("{}; {} quoted reasons reproduced{}", t.detail, quoted.len() - bad.len(), bad.join("; ")))
}

fn criterion_4() -> Outcome {
    let t = table_outcome(6);
    let es = embedded_entries();
    let mut shown = Vec::new();
    let mut pass = t.pass;
    for (hm, p) in [("120", 11), ("128", 5), ("129", 7)] {
        let e = find_entry(&es, hm).unwrap();
        let yes: Vec<u64> = primes_below(200)
            .into_iter()
            .filter(|&q| classify_entry(e, q).unwrap().realized == Realized::Yes)
            .collect();
        pass &= yes == [p];
        shown.push(format!("{hm}: yes at {yes:?}"));
    }
    outcome(pass, format!("{}; {}", t.detail, shown.join(", ")))
}

fn form(s: &str) -> FiniteQuadraticForm {
    from_genus(&parse_symbol(s).unwrap()).unwrap()
}

fn criterion_5() -> Outcome {
    let a = form("2_7^+1 3^+2 9^-1");
    let b = form("3^+2");
    let target = form("2_7^+1 9^-1");
    let glued: Vec<FiniteQuadraticForm> = enumerate_gluings(&a, &b, 3)
        .unwrap()
        .iter()
        .filter(|d| d.order() == 9)
        .map(|d| glue(d).unwrap())
        .collect();
    if glued.is_empty() {
        return outcome(false, "no order-9 glue");
    }
    let all_target = glued.iter().all(|r| isometric(r, &target).unwrap());
    let v = discriminant_form(&GramMatrix::rank_one(18).unwrap()).unwrap();
    let lp = &glued[0];
    let at2 = anti_isometric(&lp.sylow(2), &v.sylow(2)).unwrap();
    let at9 = anti_isometric(&lp.sylow(3), &v.sylow(3)).unwrap();
    let pass = all_target && at2 && !at9;
    outcome(
        pass,
        format!(
            "{} order-9 glues, all give A(2_7^+1 9^-1): {all_target}; vs <18>: glues at 2 {at2}, does not glue to v at 9 {}",
            glued.len(),
            !at9
        ),
    )
}

/// Random nondegenerate block with order a power of 2, 3, 5 or 7.
fn random_block(rng: &mut ChaCha8Rng) -> FiniteQuadraticForm {
    match rng.gen_range(0..5) {
        0 => FiniteQuadraticForm::u_block(1 << rng.gen_range(1..=3)),
        1 => FiniteQuadraticForm::v_block(1 << rng.gen_range(1..=3)),
        2 => {
            let n = 1i64 << rng.gen_range(1..=3);
            let u = [1, 3, 5, 7][rng.gen_range(0..4)];
            FiniteQuadraticForm::cyclic(n as u64, Q::new(u, n)).unwrap()
        }
        _ => {
            let n = [3i64, 5, 7, 9][rng.gen_range(0..4)];
            let u = loop {
                let u = rng.gen_range(1..n);
                if u % 3 != 0 || n % 3 != 0 {
                    break u;
                }
            };
            FiniteQuadraticForm::cyclic(n as u64, Q::new(2 * u, n)).unwrap()
        }
    }
}

fn criterion_6() -> Outcome {
    timed(Duration::from_secs(300), || {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let (mut forms, mut embeddings, mut multi) = (0, 0, 0);
        let mut failures = Vec::new();
        while forms < 500 {
            let mut q0 = FiniteQuadraticForm::trivial();
            for _ in 0..rng.gen_range(1..=2) {
                let blk = if rng.gen_bool(0.5) { FiniteQuadraticForm::u_block(2) } else { FiniteQuadraticForm::v_block(2) };
                q0 = q0.direct_sum(&blk);
            }
            let mut a = q0.clone();
            for _ in 0..rng.gen_range(0..=4) {
                let b = random_block(&mut rng);
                let two_rank = a.direct_sum(&b).orders().iter().filter(|n| n.is_power_of_two()).count();
                if a.order() * b.order() <= 1 << 12 && two_rank <= 6 {
                    a = a.direct_sum(&b);
                }
            }
            forms += 1;
            let cs = all_complements(&a, &q0).unwrap();
            embeddings += cs.len();
            if cs.len() > 1 {
                multi += 1;
            }
            if cs.is_empty() || !cs.iter().all(|c| isometric(c, &cs[0]).unwrap()) {
                failures.push(forms);
            }
        }
        // the integer-valued hypothesis is needed
        let h = |n, d| Q::new(n, d);
        let z = Q::from_integer(0);
        let a = FiniteQuadraticForm::new(
            vec![2, 2, 4, 4],
            vec![
                vec![h(1, 2), z, z, z],
                vec![z, h(3, 2), z, z],
                vec![z, z, h(3, 4), z],
                vec![z, z, z, h(3, 4)],
            ],
        )
        .unwrap();
        let q0 = FiniteQuadraticForm::new(vec![2, 2], vec![vec![h(1, 2), z], vec![z, h(3, 2)]]).unwrap();
        let d1 = FiniteQuadraticForm::new(vec![4, 4], vec![vec![h(3, 4), z], vec![z, h(3, 4)]]).unwrap();
        let d2 = FiniteQuadraticForm::new(vec![4, 4], vec![vec![h(5, 4), z], vec![z, h(1, 4)]]).unwrap();
        let cs = all_complements(&a, &q0).unwrap();
        let has = |d: &FiniteQuadraticForm| cs.iter().any(|c| isometric(c, d).unwrap());
        let example = has(&d1) && has(&d2) && !isometric(&d1, &d2).unwrap();
        outcome(
            failures.is_empty() && example && multi > 100,
            format!(
                "{forms} forms, {embeddings} image subgroups ({multi} forms with several), disagreements {failures:?}; \
                 non-integral example gives diag(3/4,3/4) and diag(5/4,1/4), non-isometric: {example}"
            ),
        )
    })
}

/// Gram matrices used by the cross-module and genus-engine checks.
fn lattice_corpus() -> Vec<(String, GramMatrix)> {
    let mut out: Vec<(String, GramMatrix)> = vec![
        ("U".into(), GramMatrix::hyperbolic()),
        ("U(2)".into(), GramMatrix::hyperbolic().rescale(2).unwrap()),
        ("A2".into(), GramMatrix::a_n(2, false)),
        ("D4".into(), GramMatrix::d_n(4, false)),
        ("E8".into(), GramMatrix::e_n(8, false)),
        ("<44>".into(), GramMatrix::rank_one(44).unwrap()),
        ("<84>".into(), GramMatrix::rank_one(84).unwrap()),
        ("L0".into(), GramMatrix::new(vec![vec![-4, 8], vec![8, -8]]).unwrap()),
    ];
    for m in [56, 60, 66, 120, 18, 6] {
        out.push((format!("<{m}>"), GramMatrix::rank_one(m).unwrap()));
    }
    let sums = [
        ("A2+<44>", GramMatrix::a_n(2, true).direct_sum(&GramMatrix::rank_one(44).unwrap())),
        ("D4+U(2)", GramMatrix::d_n(4, true).direct_sum(&GramMatrix::hyperbolic().rescale(2).unwrap())),
        ("E8+<84>", GramMatrix::e_n(8, false).direct_sum(&GramMatrix::rank_one(84).unwrap())),
        ("A2+A2+D4", GramMatrix::a_n(2, false).direct_sum(&GramMatrix::a_n(2, false)).direct_sum(&GramMatrix::d_n(4, false))),
    ];
    out.extend(sums.into_iter().map(|(n, g)| (n.to_string(), g)));
    let negs: Vec<(String, GramMatrix)> = out.iter().map(|(n, g)| (format!("-{n}"), g.rescale(-1).unwrap())).collect();
    out.extend(negs);
    out
}

fn criterion_7() -> Outcome {
    let mut bad = Vec::new();
    let d4 = symbol_from_gram(&GramMatrix::d_n(4, false));
    if d4.to_string() != "II_{0,4} 2_II^-2" {
        bad.push(format!("D4 -> {d4}"));
    }
    let s44 = symbol_from_gram(&GramMatrix::rank_one(44).unwrap());
    if s44.to_string() != "II_{1,0} 4_3^-1 11^+1" {
        bad.push(format!("<44> -> {s44}"));
    }
    if Constituent::two_adic(1, 1, 1, Oddity::Odd(3)).check().is_ok() {
        bad.push("2_3^+1 accepted".into());
    }
    let mut excess = 0;
    for p in [3u64, 5, 7, 11] {
        for eps in [1i64, -1] {
            let s = parse_symbol(&format!("{p}^{}2", if eps > 0 { '+' } else { '-' })).unwrap();
            let want = (2 * (p as i64 - 1) + 2 * (1 - eps)).rem_euclid(8);
            if s.p_excess(p) as i64 != want {
                bad.push(format!("excess {p}^{eps}2 = {}", s.p_excess(p)));
            }
            excess += 1;
        }
    }
    let corpus = lattice_corpus();
    for (n, g) in &corpus {
        let ex = symbol_from_gram(g).exists().unwrap();
        if !ex.exists {
            bad.push(format!("{n}: {}", ex.reason));
        }
    }
    let es = embedded_entries();
    for e in &es {
        if !e.genus.exists().unwrap().exists {
            bad.push(format!("HM {}", e.hm_id));
        }
    }
    let mut ctxs = 0;
    for p in primes_below(200) {
        let ctx = CharacteristicContext::new(p).unwrap();
        ctxs += [&ctx.ns_genus, &ctx.h_genus].iter().filter(|g| g.exists().unwrap().exists).count();
    }
    let pass = bad.is_empty() && ctxs == 2 * primes_below(200).len();
    outcome(
        pass,
        format!(
            "D4 -> 2_II^-2, <44> -> 4_3^-1 11^+1, 2_3^+1 rejected, {excess} p-excess values, mod-8 congruence on {} lattices, {} entries, {ctxs} NS/H genera{}",
            corpus.len(),
            es.len(),
            if bad.is_empty() { String::new() } else { format!("; failures: {}", bad.join("; ")) }
        ),
    )
}

fn criterion_8() -> Outcome {
    timed(Duration::from_secs(30), || {
        let want: BTreeSet<u64> = [1u64, 121, 169, 289, 361, 529].iter().flat_map(|&r| [r, 840 - r]).collect();
        let got = mukai_residues();
        let wide = mukai_residues_up_to(1_000_000);
        let es = embedded_entries();
        let realizable = ["102", "106", "108", "110", "111", "112", "118", "119", "121", "134"];
        let below_200 = primes_below(200).into_iter().filter(|&p| mukai_holds(p)).count();
        let wider: Vec<u64> = primes_below(3000).into_iter().filter(|&p| mukai_holds(p)).collect();
        let mut clash = Vec::new();
        for &p in &wider {
            for hm in realizable {
                if classify_entry(find_entry(&es, hm).unwrap(), p).unwrap().realized != Realized::No {
                    clash.push(format!("{hm}@{p}"));
                }
            }
        }
        let pass = got == want && wide == want && clash.is_empty();
        outcome(
            pass,
            format!(
                "residues {got:?}; bucketing primes < 10^6 agrees: {}; {below_200} primes < 200 and {} primes < 3000 satisfy it, tame rank-4 groups realized at none{}",
                wide == want,
                wider.len(),
                if clash.is_empty() { String::new() } else { format!(" except {clash:?}") }
            ),
        )
    })
}

fn criterion_9() -> Outcome {
    let corpus = lattice_corpus();
    let mut bad = Vec::new();
    let mut lengths = 0;
    for (n, g) in &corpus {
        let s = symbol_from_gram(g);
        let a = discriminant_form(g).unwrap();
        if !isometric(&from_genus(&s).unwrap(), &a).unwrap() {
            bad.push(format!("{n}: forms differ"));
        }
        for p in a.primes() {
            lengths += 1;
            if s.p_length(p) as usize != a.p_length(p) {
                bad.push(format!("{n}: l_{p}"));
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!("{} lattices, {lengths} p-lengths{}", corpus.len(), if bad.is_empty() { String::new() } else { format!("; {}", bad.join("; ")) }),
    )
}

// harness = false: the lines print even when the run succeeds
fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 9] = [
        (1, "glue table for rank-3 fixed lattices", criterion_1),
        (2, "characteristic-2 workflow table", criterion_2),
        (3, "rank 4 in small characteristic", criterion_3),
        (4, "square-determinant rank 4", criterion_4),
        (5, "HM 201 glue identity", criterion_5),
        (6, "Witt cancellation suite", criterion_6),
        (7, "genus engine", criterion_7),
        (8, "residues mod 840", criterion_8),
        (9, "symbol side vs form side", criterion_9),
    ];
    let mut failed = Vec::new();
    for (id, name, f) in criteria {
        let o = f();
        println!("criterion {id} {} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed.push(id);
        }
    }
    if failed != EXPECTED_FAILURES {
        eprintln!("failing criteria changed: {failed:?}, expected {EXPECTED_FAILURES:?}");
        std::process::exit(1);
    }
    println!("acceptance: {} of 9 pass; expected failures {EXPECTED_FAILURES:?}", 9 - failed.len());
}
