use genusforge::discform::{enumerate_gluings, from_genus, glue, isometric};
use genusforge::genus::{
    canonicalize_2adic, move_closure, parse_symbol, print_symbol, symbol_from_gram, GenusSymbol,
};
use genusforge::lattice::{
    determinant, discriminant_form, mat_mul, signature, smith_normal_form, GramMatrix,
};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

const MAX_DET: i64 = 400;

/// Even symmetric Gram matrices of small size with 0 < |det| ≤ MAX_DET.
fn even_gram(max_dim: usize) -> impl Strategy<Value = GramMatrix> {
    (1..=max_dim)
        .prop_flat_map(|n| {
            let diag = prop::collection::vec((-4i64..=4).prop_map(|x| 2 * x), n);
            let off = prop::collection::vec(-3i64..=3, n * (n - 1) / 2);
            (Just(n), diag, off)
        })
        .prop_filter_map("degenerate or large", |(n, diag, off)| {
            let mut m = vec![vec![0i64; n]; n];
            let mut k = 0;
            for i in 0..n {
                m[i][i] = diag[i];
                for j in i + 1..n {
                    m[i][j] = off[k];
                    m[j][i] = off[k];
                    k += 1;
                }
            }
            let g = GramMatrix::new(m).ok()?;
            let d = determinant(&g);
            (!d.is_zero() && d.abs() <= BigInt::from(MAX_DET)).then_some(g)
        })
}

/// Product of elementary integer matrices; determinant ±1.
fn unimodular(n: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    prop::collection::vec((0..n, 0..n, -2i64..=2, any::<bool>()), 0..6).prop_map(move |ops| {
        let mut p: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
        for (i, j, c, flip) in ops {
            if i != j {
                for r in p.iter_mut() {
                    r[j] += c * r[i];
                }
            } else if flip {
                for r in p.iter_mut() {
                    r[i] = -r[i];
                }
            }
        }
        p
    })
}

fn gram_and_basis() -> impl Strategy<Value = (GramMatrix, Vec<Vec<i64>>)> {
    even_gram(4).prop_flat_map(|g| {
        let n = g.dim();
        (Just(g), unimodular(n))
    })
}

fn big(m: &[Vec<i64>]) -> Vec<Vec<BigInt>> {
    m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn signature_and_det_survive_base_change((g, p) in gram_and_basis()) {
        let h = g.conjugate(&p).unwrap();
        prop_assert_eq!(signature(&g).unwrap(), signature(&h).unwrap());
        prop_assert_eq!(determinant(&g), determinant(&h));
        prop_assert!(isometric(&discriminant_form(&g).unwrap(), &discriminant_form(&h).unwrap()).unwrap());
        let (a, b) = (symbol_from_gram(&g), symbol_from_gram(&h));
        prop_assert!(same_genus(&a, &b), "{} vs {}", a, b);
    }

    #[test]
    fn snf_is_exact(rows in prop::collection::vec(prop::collection::vec(-9i64..=9, 3), 1..4)) {
        let m = big(&rows);
        let s = smith_normal_form(&m);
        prop_assert_eq!(mat_mul(&mat_mul(&s.left, &m), &s.right), s.diag.clone());
        let d = s.diagonal();
        for w in d.windows(2) {
            if !w[0].is_zero() {
                prop_assert!((&w[1] % &w[0]).is_zero(), "{:?}", d);
            } else {
                prop_assert!(w[1].is_zero());
            }
        }
        prop_assert!(d.iter().all(|x| !x.is_negative()));
        for u in [&s.left, &s.right] {
            let n = u.len();
            let det = genusforge::lattice::bareiss_det(u.clone());
            prop_assert!(det.abs() == BigInt::one(), "{} x {} det {}", n, n, det);
        }
    }

    #[test]
    fn discriminant_order_and_additivity(g in even_gram(3), h in even_gram(2)) {
        let a = discriminant_form(&g).unwrap();
        let b = discriminant_form(&h).unwrap();
        prop_assert_eq!(BigInt::from(a.order()), determinant(&g).abs());
        let s = discriminant_form(&g.direct_sum(&h)).unwrap();
        prop_assert!(isometric(&s, &a.direct_sum(&b)).unwrap());
    }

    #[test]
    fn genus_of_random_lattices(g in even_gram(4)) {
        let s = symbol_from_gram(&g);
        let ex = s.exists().unwrap();
        prop_assert!(ex.exists, "{} : {}", s, ex.reason);
        prop_assert_eq!(parse_symbol(&print_symbol(&s)).unwrap(), s.clone());
        // cross-module: symbol side and form side describe the same group and form
        let a = discriminant_form(&g).unwrap();
        prop_assert!(isometric(&from_genus(&s).unwrap(), &a).unwrap(), "{}", s);
        for p in a.primes() {
            prop_assert_eq!(s.p_length(p) as usize, a.p_length(p));
        }
    }

    #[test]
    fn negation(g in even_gram(4)) {
        let s = symbol_from_gram(&g);
        let n = s.negate();
        prop_assert_eq!(n.negate(), s.clone());
        for p in s.primes() {
            let (a, b) = (s.constituents(p), n.constituents(p));
            prop_assert_eq!(a.len(), b.len());
            for (x, y) in a.iter().zip(b) {
                prop_assert_eq!((x.scale_exp, x.dim, x.is_odd_type()), (y.scale_exp, y.dim, y.is_odd_type()));
            }
        }
        let m = symbol_from_gram(&g.rescale(-1).unwrap());
        prop_assert!(same_genus(&m, &n), "{} vs {}", m, n);
    }

    #[test]
    fn canonical_form_is_a_class_function(g in even_gram(4)) {
        let s = symbol_from_gram(&g);
        let c = canonicalize_2adic(&s).unwrap();
        prop_assert_eq!(canonicalize_2adic(&c).unwrap(), c.clone());
        for t in move_closure(&s).unwrap() {
            prop_assert_eq!(canonicalize_2adic(&t).unwrap(), c.clone(), "{}", t);
        }
    }

    #[test]
    fn gluing_orders(g in even_gram(2), h in even_gram(2), p in prop::sample::select(vec![2u64, 3])) {
        let a = discriminant_form(&g).unwrap();
        let b = discriminant_form(&h).unwrap();
        let ds = enumerate_gluings(&a, &b, p).unwrap();
        prop_assert!(isometric(&glue(&ds[0]).unwrap(), &a.direct_sum(&b)).unwrap());
        for d in &ds {
            let gamma = d.order();
            prop_assert_eq!(glue(d).unwrap().order() * gamma * gamma, a.order() * b.order());
        }
    }
}

/// Equal away from 2 and 2-adically equivalent.
fn same_genus(a: &GenusSymbol, b: &GenusSymbol) -> bool {
    let odd = |s: &GenusSymbol| s.primes().into_iter().filter(|&p| p != 2).map(|p| s.constituents(p).to_vec()).collect::<Vec<_>>();
    a.rank() == b.rank()
        && odd(a) == odd(b)
        && canonicalize_2adic(a).map(|x| x.constituents(2).to_vec()).ok() == canonicalize_2adic(b).map(|x| x.constituents(2).to_vec()).ok()
}
