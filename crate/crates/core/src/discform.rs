//! Finite quadratic forms: element-level brute force, embeddings, isometry,
//! orthogonal complements, anti-isometry gluing and Witt cancellation.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::lattice::{smith_normal_form, unimodular_inverse, ZMatrix};

pub type Q = Ratio<i64>;

pub const DEFAULT_ELEMENT_CAP: u64 = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormError {
    #[error("group of order {0} exceeds the element cap {1}")]
    CapExceeded(u64, u64),
    #[error("form is not well defined: {0}")]
    IllDefined(String),
    #[error("subgroup is not isotropic")]
    NotIsotropic,
    #[error("subgroup is not the graph of an anti-isometry")]
    NotGraph,
    #[error("restricted form on the subgroup is degenerate")]
    DegenerateSub,
    #[error("no embedding of the block form exists")]
    NoEmbedding,
    #[error("complements of two embeddings are not isometric")]
    ComplementsDisagree,
    #[error("block form must be a sum of u(2) and v(2)")]
    NotEvenTwoElementary,
    #[error(transparent)]
    Genus(#[from] crate::genus::GenusError),
}

/// Finite abelian group ⊕ Z/n_i with a rational Gram matrix on generators;
/// diagonal entries live in Q/2Z, off-diagonal ones in Q/Z.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteQuadraticForm {
    orders: Vec<u64>,
    gram: Vec<Vec<Q>>,
    cap: u64,
    // exponent e and the Gram matrix scaled by e
    exp: i64,
    igram: Vec<Vec<i64>>,
}

/// Element coordinates with respect to the generators.
pub type Element = Vec<i64>;

fn modq(x: Q, m: i64) -> Q {
    let m = Q::from_integer(m);
    x - (x / m).floor() * m
}

impl FiniteQuadraticForm {
    pub fn new(orders: Vec<u64>, gram: Vec<Vec<Q>>) -> Result<Self, FormError> {
        let k = orders.len();
        if gram.len() != k || gram.iter().any(|r| r.len() != k) {
            return Err(FormError::IllDefined("shape".into()));
        }
        if orders.iter().any(|&n| n < 2) {
            return Err(FormError::IllDefined("generator order below 2".into()));
        }
        let mut g = gram;
        for i in 0..k {
            for j in 0..k {
                if g[i][j] != g[j][i] && modq(g[i][j] - g[j][i], 1) != Q::zero() {
                    return Err(FormError::IllDefined("asymmetric".into()));
                }
            }
        }
        for i in 0..k {
            for j in 0..k {
                g[i][j] = if i == j { modq(g[i][j], 2) } else { modq(g[i][j], 1) };
            }
        }
        for i in 0..k {
            let n = Q::from_integer(orders[i] as i64);
            for j in 0..k {
                if !(n * g[i][j]).is_integer() {
                    return Err(FormError::IllDefined(format!("b(n e_{i}, e_{j}) not integral")));
                }
            }
            let t = n * n * g[i][i];
            if !t.is_integer() || t.to_integer() % 2 != 0 {
                return Err(FormError::IllDefined(format!("q(n e_{i}) not in 2Z")));
            }
        }
        let exp = orders.iter().fold(1i64, |a, &n| a.lcm(&(n as i64)));
        let igram = (0..k)
            .map(|i| (0..k).map(|j| (g[i][j] * exp).to_integer()).collect())
            .collect();
        Ok(FiniteQuadraticForm { orders, gram: g, cap: DEFAULT_ELEMENT_CAP, exp, igram })
    }

    pub fn trivial() -> Self {
        Self::new(vec![], vec![]).unwrap()
    }

    /// Cyclic form ⟨a/n⟩ of order n.
    pub fn cyclic(n: u64, value: Q) -> Result<Self, FormError> {
        Self::new(vec![n], vec![vec![value]])
    }

    /// u(2^k) (hyperbolic) block.
    pub fn u_block(q: u64) -> Self {
        let h = Q::new(1, q as i64);
        Self::new(vec![q, q], vec![vec![Q::zero(), h], vec![h, Q::zero()]]).unwrap()
    }

    /// v(2^k) block.
    pub fn v_block(q: u64) -> Self {
        let h = Q::new(1, q as i64);
        Self::new(vec![q, q], vec![vec![h * 2, h], vec![h, h * 2]]).unwrap()
    }

    pub fn with_cap(mut self, cap: u64) -> Self {
        self.cap = cap;
        self
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }

    pub fn orders(&self) -> &[u64] {
        &self.orders
    }

    pub fn gram(&self) -> &[Vec<Q>] {
        &self.gram
    }

    pub fn num_generators(&self) -> usize {
        self.orders.len()
    }

    /// Group order |A|.
    pub fn order(&self) -> u64 {
        self.orders.iter().product()
    }

    /// Exponent of the group; values of q lie in (1/e)Z/2Z.
    pub fn exponent(&self) -> i64 {
        self.exp
    }

    pub fn is_trivial(&self) -> bool {
        self.orders.is_empty()
    }

    fn check_cap(&self) -> Result<(), FormError> {
        let n = self.order();
        if n > self.cap {
            Err(FormError::CapExceeded(n, self.cap))
        } else {
            Ok(())
        }
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        let (a, b) = (self.orders.len(), other.orders.len());
        let mut orders = self.orders.clone();
        orders.extend_from_slice(&other.orders);
        let mut gram = vec![vec![Q::zero(); a + b]; a + b];
        for i in 0..a {
            gram[i][..a].copy_from_slice(&self.gram[i]);
        }
        for i in 0..b {
            gram[a + i][a..].copy_from_slice(&other.gram[i]);
        }
        Self::new(orders, gram).unwrap().with_cap(self.cap.max(other.cap))
    }

    /// The form with q replaced by −q.
    pub fn negate(&self) -> Self {
        let gram = self.gram.iter().map(|r| r.iter().map(|&x| -x).collect()).collect();
        Self::new(self.orders.clone(), gram).unwrap().with_cap(self.cap)
    }

    /// e·q(x) as an integer mod 2e.
    pub fn q_scaled(&self, x: &[i64]) -> i64 {
        let k = self.orders.len();
        let m = 2 * self.exp;
        let mut s: i128 = 0;
        for i in 0..k {
            if x[i] == 0 {
                continue;
            }
            s += (x[i] as i128) * (x[i] as i128) * self.igram[i][i] as i128;
            for j in i + 1..k {
                s += 2 * (x[i] as i128) * (x[j] as i128) * self.igram[i][j] as i128;
            }
            s %= m as i128;
        }
        (s.rem_euclid(m as i128)) as i64
    }

    /// e·b(x,y) as an integer mod e.
    pub fn b_scaled(&self, x: &[i64], y: &[i64]) -> i64 {
        let k = self.orders.len();
        let mut s: i128 = 0;
        for i in 0..k {
            if x[i] == 0 {
                continue;
            }
            for j in 0..k {
                s += (x[i] as i128) * (y[j] as i128) * self.igram[i][j] as i128;
            }
            s %= self.exp as i128;
        }
        s.rem_euclid(self.exp as i128) as i64
    }

    pub fn q(&self, x: &[i64]) -> Q {
        Q::new(self.q_scaled(x), self.exp)
    }

    pub fn b(&self, x: &[i64], y: &[i64]) -> Q {
        Q::new(self.b_scaled(x, y), self.exp)
    }

    pub fn element(&self, index: u64) -> Element {
        let mut idx = index;
        self.orders
            .iter()
            .map(|&n| {
                let c = idx % n;
                idx /= n;
                c as i64
            })
            .collect()
    }

    pub fn index_of(&self, x: &[i64]) -> u64 {
        let mut idx = 0u64;
        for (i, &n) in self.orders.iter().enumerate().rev() {
            idx = idx * n + x[i].rem_euclid(n as i64) as u64;
        }
        idx
    }

    pub fn reduce(&self, x: &[i64]) -> Element {
        x.iter().zip(&self.orders).map(|(&c, &n)| c.rem_euclid(n as i64)).collect()
    }

    pub fn add(&self, x: &[i64], y: &[i64]) -> Element {
        self.reduce(&x.iter().zip(y).map(|(a, b)| a + b).collect::<Vec<_>>())
    }

    pub fn scale(&self, x: &[i64], k: i64) -> Element {
        self.reduce(&x.iter().map(|a| a * k).collect::<Vec<_>>())
    }

    pub fn element_order(&self, x: &[i64]) -> u64 {
        x.iter()
            .zip(&self.orders)
            .map(|(&c, &n)| n / (c.rem_euclid(n as i64) as u64).gcd(&n))
            .fold(1u64, |a, b| a.lcm(&b))
    }

    /// All elements, guarded by the element cap.
    pub fn elements(&self) -> Result<Vec<Element>, FormError> {
        self.check_cap()?;
        Ok((0..self.order()).map(|i| self.element(i)).collect())
    }

    /// Table of (order, e·q) for every element index.
    fn table(&self) -> Result<Vec<(u64, i64)>, FormError> {
        self.check_cap()?;
        Ok((0..self.order())
            .map(|i| {
                let x = self.element(i);
                (self.element_order(&x), self.q_scaled(&x))
            })
            .collect())
    }

    /// Census of (element order, q value) pairs with multiplicities.
    pub fn census(&self) -> Result<Vec<((u64, Q), usize)>, FormError> {
        let mut m = std::collections::BTreeMap::new();
        for (o, qs) in self.table()? {
            *m.entry((o, Q::new(qs, self.exp))).or_insert(0usize) += 1;
        }
        Ok(m.into_iter().collect())
    }

    pub fn is_nondegenerate(&self) -> Result<bool, FormError> {
        let els = self.elements()?;
        let k = self.orders.len();
        for x in els.iter().skip(1) {
            let radical = (0..k).all(|i| {
                let mut e = vec![0; k];
                e[i] = 1;
                self.b_scaled(x, &e) == 0
            });
            if radical {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// The p-primary part, with generators m·e_i where n_i = p^a·m.
    pub fn sylow(&self, p: u64) -> Self {
        let mut gens = Vec::new();
        let mut orders = Vec::new();
        for (i, &n) in self.orders.iter().enumerate() {
            let mut pp = 1u64;
            let mut r = n;
            while r % p == 0 {
                r /= p;
                pp *= p;
            }
            if pp > 1 {
                let mut g = vec![0i64; self.orders.len()];
                g[i] = r as i64;
                gens.push(g);
                orders.push(pp);
            }
        }
        self.form_on(&gens, &orders)
    }

    /// Primes dividing the group order.
    pub fn primes(&self) -> Vec<u64> {
        let mut s = BTreeSet::new();
        for &n in &self.orders {
            for (p, _) in crate::arith::factorize(n) {
                s.insert(p);
            }
        }
        s.into_iter().collect()
    }

    /// Length of the p-part (minimal number of generators).
    pub fn p_length(&self, p: u64) -> usize {
        self.sylow(p).invariant_factors().len()
    }

    /// Minimal number of generators of the whole group.
    pub fn length(&self) -> usize {
        self.primes().into_iter().map(|p| self.p_length(p)).max().unwrap_or(0)
    }

    /// Invariant factors of the underlying group (ascending, divisibility chain).
    pub fn invariant_factors(&self) -> Vec<u64> {
        let k = self.orders.len();
        let m: ZMatrix = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| if i == j { BigInt::from(self.orders[i]) } else { BigInt::zero() })
                    .collect()
            })
            .collect();
        smith_normal_form(&m)
            .diagonal()
            .into_iter()
            .filter_map(|d| d.to_u64())
            .filter(|&d| d > 1)
            .collect()
    }

    /// Restriction of the form to explicit generators with given orders.
    fn form_on(&self, gens: &[Element], orders: &[u64]) -> Self {
        let k = gens.len();
        let mut gram = vec![vec![Q::zero(); k]; k];
        for i in 0..k {
            for j in 0..k {
                gram[i][j] = if i == j { self.q(&gens[i]) } else { self.b(&gens[i], &gens[j]) };
            }
        }
        Self::new(orders.to_vec(), gram)
            .expect("restriction is well defined")
            .with_cap(self.cap)
    }

    /// Row-echelon basis of the lattice spanned by `gens` together with the
    /// relation lattice ⊕ n_i Z.
    fn span_basis(&self, gens: &[Element]) -> ZMatrix {
        let k = self.orders.len();
        let mut rows: ZMatrix = gens
            .iter()
            .map(|g| g.iter().map(|&c| BigInt::from(c)).collect())
            .collect();
        for i in 0..k {
            let mut r = vec![BigInt::zero(); k];
            r[i] = BigInt::from(self.orders[i]);
            rows.push(r);
        }
        echelon(rows, k)
    }

    /// Form on the subquotient ⟨sub⟩/⟨gamma⟩ (gamma ⊂ sub, gamma isotropic
    /// and orthogonal to sub).
    pub fn subquotient(&self, sub: &[Element], gamma: &[Element]) -> Self {
        let k = self.orders.len();
        if k == 0 {
            return self.clone();
        }
        let basis = self.span_basis(sub);
        let mut rel: Vec<Element> = gamma.to_vec();
        for i in 0..k {
            let mut r = vec![0i64; k];
            r[i] = self.orders[i] as i64;
            rel.push(r);
        }
        let coords: ZMatrix = rel.iter().map(|v| solve_upper(&basis, v)).collect();
        let snf = smith_normal_form(&coords);
        let vinv = unimodular_inverse(&snf.right);
        let diag = snf.diagonal();
        let mut gens = Vec::new();
        let mut orders = Vec::new();
        for i in 0..k {
            let d = diag.get(i).cloned().unwrap_or_else(BigInt::zero);
            let d = d.abs();
            if d == BigInt::one() {
                continue;
            }
            // new generator: row i of right^{-1} · basis
            let g: Element = (0..k)
                .map(|c| {
                    let v: BigInt = (0..k).map(|l| &vinv[i][l] * &basis[l][c]).sum();
                    let n = BigInt::from(self.orders[c]);
                    v.mod_floor(&n).to_i64().unwrap()
                })
                .collect();
            gens.push(g);
            orders.push(d.to_u64().expect("quotient is finite"));
        }
        self.form_on(&gens, &orders)
    }

    /// Generators of {x : b(x, s) = 0 for all s in gens}.
    pub fn perp_generators(&self, gens: &[Element]) -> Vec<Element> {
        let k = self.orders.len();
        let m = gens.len();
        if k == 0 {
            return vec![];
        }
        let e = self.exp;
        // x ↦ (e·b(x, s_j))_j mod e; kernel of [A | I] stacked with [eI | 0]
        let mut rows: ZMatrix = Vec::new();
        for i in 0..k {
            let mut ei = vec![0i64; k];
            ei[i] = 1;
            let mut r: Vec<BigInt> = gens.iter().map(|s| BigInt::from(self.b_scaled(&ei, s))).collect();
            r.extend((0..k).map(|j| if j == i { BigInt::one() } else { BigInt::zero() }));
            rows.push(r);
        }
        for j in 0..m {
            let mut r = vec![BigInt::zero(); m + k];
            r[j] = BigInt::from(e);
            rows.push(r);
        }
        let ech = echelon(rows, m + k);
        ech.into_iter()
            .filter(|r| r[..m].iter().all(|x| x.is_zero()))
            .map(|r| {
                (0..k)
                    .map(|c| r[m + c].mod_floor(&BigInt::from(self.orders[c])).to_i64().unwrap())
                    .collect()
            })
            .collect()
    }

    /// All elements of the subgroup generated by `gens`.
    pub fn subgroup_elements(&self, gens: &[Element]) -> BTreeSet<u64> {
        let mut seen = BTreeSet::new();
        let zero = vec![0i64; self.orders.len()];
        seen.insert(self.index_of(&zero));
        let mut frontier = vec![zero];
        while let Some(x) = frontier.pop() {
            for g in gens {
                let y = self.add(&x, g);
                if seen.insert(self.index_of(&y)) {
                    frontier.push(y);
                }
            }
        }
        seen
    }
}

/// Integer row echelon form (upper triangular in the first `cols` columns),
/// dropping zero rows.
pub(crate) fn echelon(mut rows: ZMatrix, cols: usize) -> ZMatrix {
    let mut out: ZMatrix = Vec::new();
    for c in 0..cols {
        let mut with: Vec<Vec<BigInt>> = Vec::new();
        let mut without: Vec<Vec<BigInt>> = Vec::new();
        for r in rows.drain(..) {
            if r[c].is_zero() {
                without.push(r);
            } else {
                with.push(r);
            }
        }
        // gcd-combine the rows with nonzero entry in column c
        while with.len() > 1 {
            let (mi, _) = with
                .iter()
                .enumerate()
                .min_by(|a, b| a.1[c].abs().cmp(&b.1[c].abs()))
                .unwrap();
            let piv = with.swap_remove(mi);
            let mut next = vec![piv.clone()];
            for mut r in with.drain(..) {
                let q = r[c].div_floor(&piv[c]);
                for (x, y) in r.iter_mut().zip(piv.iter()) {
                    *x -= &q * y;
                }
                if r[c].is_zero() {
                    if r.iter().any(|x| !x.is_zero()) {
                        without.push(r);
                    }
                } else {
                    next.push(r);
                }
            }
            with = next;
        }
        if let Some(mut piv) = with.pop() {
            if piv[c].is_negative() {
                for x in piv.iter_mut() {
                    *x = -x.clone();
                }
            }
            out.push(piv);
        }
        rows = without;
    }
    out.extend(rows.into_iter().filter(|r| r.iter().any(|x| !x.is_zero())));
    out
}

/// Coordinates of v in the row basis of a square upper-triangular matrix.
fn solve_upper(basis: &ZMatrix, v: &[i64]) -> Vec<BigInt> {
    let k = basis.len();
    let mut rem: Vec<BigInt> = v.iter().map(|&x| BigInt::from(x)).collect();
    let mut x = vec![BigInt::zero(); k];
    for i in 0..k {
        let piv = &basis[i][i];
        assert!((&rem[i] % piv).is_zero(), "vector outside the span");
        let c = &rem[i] / piv;
        for j in i..k {
            rem[j] -= &c * &basis[i][j];
        }
        x[i] = c;
    }
    x
}

/// Images of the generators of a source form inside a target form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Embedding {
    pub images: Vec<Element>,
}

struct Search<'a> {
    src: &'a FiniteQuadraticForm,
    dst: &'a FiniteQuadraticForm,
    sign: i64,
    cands: Vec<Vec<Element>>,
    src_elements: Vec<Element>,
}

impl<'a> Search<'a> {
    /// Target value for s·v (v measured in src units) expressed in dst units
    /// modulo `m·e_dst`, or None when no element can have it.
    fn convert(&self, v: i64, m: i64) -> Option<i64> {
        let (es, ed) = (self.src.exp, self.dst.exp);
        let num = self.sign * v * ed;
        if num % es != 0 {
            return None;
        }
        Some((num / es).rem_euclid(m * ed))
    }

    fn run(&self, limit: usize) -> Vec<Embedding> {
        let mut out = Vec::new();
        self.each(&mut |imgs| {
            out.push(Embedding { images: imgs.to_vec() });
            out.len() < limit
        });
        out
    }

    /// Calls `f` on every embedding until it returns false.
    fn each(&self, f: &mut dyn FnMut(&[Element]) -> bool) {
        let mut cur: Vec<Element> = Vec::new();
        self.rec(&mut cur, f);
    }

    fn rec(&self, cur: &mut Vec<Element>, f: &mut dyn FnMut(&[Element]) -> bool) -> bool {
        let i = cur.len();
        if i == self.src.orders.len() {
            return !self.injective(cur) || f(cur);
        }
        let k = self.src.orders.len();
        for c in &self.cands[i] {
            let ok = (0..i).all(|j| {
                let mut ei = vec![0i64; k];
                ei[i] = 1;
                let mut ej = vec![0i64; k];
                ej[j] = 1;
                match self.convert(self.src.b_scaled(&ei, &ej), 1) {
                    Some(t) => self.dst.b_scaled(c, &cur[j]) == t,
                    None => false,
                }
            });
            if ok {
                cur.push(c.clone());
                let go = self.rec(cur, f);
                cur.pop();
                if !go {
                    return false;
                }
            }
        }
        true
    }

    fn injective(&self, imgs: &[Element]) -> bool {
        let k = self.dst.orders.len();
        for x in self.src_elements.iter().skip(1) {
            let mut y = vec![0i64; k];
            for (c, img) in x.iter().zip(imgs) {
                for t in 0..k {
                    y[t] += c * img[t];
                }
            }
            if self.dst.reduce(&y).iter().all(|&t| t == 0) {
                return false;
            }
        }
        true
    }
}

fn search<'a>(
    src: &'a FiniteQuadraticForm,
    dst: &'a FiniteQuadraticForm,
    sign: i64,
) -> Result<Option<Search<'a>>, FormError> {
    dst.check_cap()?;
    src.check_cap()?;
    let table = dst.table()?;
    let k = src.orders.len();
    let mut s = Search { src, dst, sign, cands: Vec::new(), src_elements: src.elements()? };
    for i in 0..k {
        let mut ei = vec![0i64; k];
        ei[i] = 1;
        let Some(target) = s.convert(src.q_scaled(&ei), 2) else {
            return Ok(None);
        };
        let n = src.orders[i];
        let c: Vec<Element> = table
            .iter()
            .enumerate()
            .filter(|(_, &(o, qv))| o == n && qv == target)
            .map(|(idx, _)| dst.element(idx as u64))
            .collect();
        s.cands.push(c);
    }
    Ok(Some(s))
}

/// All injective form-preserving homomorphisms q0 → a.
pub fn embeddings(q0: &FiniteQuadraticForm, a: &FiniteQuadraticForm) -> Result<Vec<Embedding>, FormError> {
    Ok(match search(q0, a, 1)? {
        Some(s) => s.run(usize::MAX),
        None => vec![],
    })
}

/// All injective homomorphisms with q∘γ = −q.
pub fn anti_embeddings(q0: &FiniteQuadraticForm, a: &FiniteQuadraticForm) -> Result<Vec<Embedding>, FormError> {
    Ok(match search(q0, a, -1)? {
        Some(s) => s.run(usize::MAX),
        None => vec![],
    })
}

pub fn isometric(a: &FiniteQuadraticForm, b: &FiniteQuadraticForm) -> Result<bool, FormError> {
    if a.order() != b.order() {
        return Ok(false);
    }
    if a.invariant_factors() != b.invariant_factors() {
        return Ok(false);
    }
    if a.census()? != b.census()? {
        return Ok(false);
    }
    Ok(match search(a, b, 1)? {
        Some(s) => !s.run(1).is_empty(),
        None => false,
    })
}

pub fn anti_isometric(a: &FiniteQuadraticForm, b: &FiniteQuadraticForm) -> Result<bool, FormError> {
    isometric(&a.negate(), b)
}

/// Form restricted to {x : b(x, s) = 0 for all s in sub}.
pub fn orthogonal_complement(sub: &[Element], a: &FiniteQuadraticForm) -> Result<FiniteQuadraticForm, FormError> {
    a.check_cap()?;
    let sub_set = a.subgroup_elements(sub);
    let perp = a.perp_generators(sub);
    let perp_set = a.subgroup_elements(&perp);
    let meet = sub_set.intersection(&perp_set).count();
    if meet != 1 || (sub_set.len() as u64) * (perp_set.len() as u64) != a.order() {
        return Err(FormError::DegenerateSub);
    }
    Ok(a.subquotient(&perp, &[]))
}

/// Isotropic graph subgroup Γ of left ⊕ right.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GluingDatum {
    pub left: FiniteQuadraticForm,
    pub right: FiniteQuadraticForm,
    /// Generators of Γ in coordinates of left ⊕ right.
    pub graph: Vec<Element>,
}

impl GluingDatum {
    pub fn sum(&self) -> FiniteQuadraticForm {
        self.left.direct_sum(&self.right)
    }

    /// |Γ|.
    pub fn order(&self) -> u64 {
        self.sum().subgroup_elements(&self.graph).len() as u64
    }

    pub fn validate(&self) -> Result<(), FormError> {
        let s = self.sum();
        let els = s.subgroup_elements(&self.graph);
        let kl = self.left.orders.len();
        let mut lefts = BTreeSet::new();
        let mut rights = BTreeSet::new();
        for &i in &els {
            let x = s.element(i);
            if s.q_scaled(&x) != 0 {
                return Err(FormError::NotIsotropic);
            }
            lefts.insert(x[..kl].to_vec());
            rights.insert(x[kl..].to_vec());
        }
        if lefts.len() != els.len() || rights.len() != els.len() {
            return Err(FormError::NotGraph);
        }
        Ok(())
    }
}

/// Γ⊥/Γ.
pub fn glue(d: &GluingDatum) -> Result<FiniteQuadraticForm, FormError> {
    d.validate()?;
    let s = d.sum();
    let perp = s.perp_generators(&d.graph);
    Ok(s.subquotient(&perp, &d.graph))
}

/// Cyclic p-subgroups of any order and elementary subgroups of order p²,
/// as (basis, orders), deduplicated.
fn glue_subgroups(b: &FiniteQuadraticForm, p: u64) -> Result<Vec<(Vec<Element>, Vec<u64>)>, FormError> {
    let els = b.elements()?;
    let mut out = Vec::new();
    // generators of cyclic groups already listed
    let mut covered: BTreeSet<u64> = BTreeSet::new();
    for x in els.iter().skip(1) {
        let n = b.element_order(x);
        if crate::arith::prime_power(n).map(|(q, _)| q) != Some(p) || covered.contains(&b.index_of(x)) {
            continue;
        }
        for k in 1..n as i64 {
            if k.gcd(&(n as i64)) == 1 {
                covered.insert(b.index_of(&b.scale(x, k)));
            }
        }
        out.push((vec![x.clone()], vec![n]));
    }
    let order_p: Vec<&Element> = els.iter().filter(|x| b.element_order(x) == p).collect();
    let lines: Vec<Element> = out.iter().filter(|(_, o)| o[0] == p).map(|(g, _)| g[0].clone()).collect();
    let mut planes: Vec<BTreeSet<u64>> = Vec::new();
    for l in &lines {
        let li = b.index_of(l);
        let span = b.subgroup_elements(std::slice::from_ref(l));
        for y in &order_p {
            let yi = b.index_of(y);
            if span.contains(&yi) || planes.iter().any(|s| s.contains(&li) && s.contains(&yi)) {
                continue;
            }
            let g = vec![l.clone(), (*y).clone()];
            planes.push(b.subgroup_elements(&g));
            out.push((g, vec![p, p]));
        }
    }
    Ok(out)
}

/// All gluings of a and b along Γ whose projection to b is a cyclic
/// p-subgroup or an elementary subgroup of order p². Γ = 0 comes first.
pub fn enumerate_gluings(
    a: &FiniteQuadraticForm,
    b: &FiniteQuadraticForm,
    p: u64,
) -> Result<Vec<GluingDatum>, FormError> {
    let mut out = vec![GluingDatum { left: a.clone(), right: b.clone(), graph: vec![] }];
    let mut seen: BTreeSet<BTreeSet<u64>> = BTreeSet::new();
    for (basis, orders) in glue_subgroups(b, p)? {
        let sub = b.form_on(&basis, &orders);
        for emb in anti_embeddings(&sub, a)? {
            let graph: Vec<Element> = emb
                .images
                .iter()
                .zip(&basis)
                .map(|(x, y)| {
                    let mut g = x.clone();
                    g.extend_from_slice(y);
                    g
                })
                .collect();
            let d = GluingDatum { left: a.clone(), right: b.clone(), graph };
            if seen.insert(d.sum().subgroup_elements(&d.graph)) {
                out.push(d);
            }
        }
    }
    Ok(out)
}

/// Splits q0 into u(2)/v(2) blocks check: exponent 2 and integral values.
fn is_even_two_elementary(q0: &FiniteQuadraticForm) -> Result<bool, FormError> {
    if q0.orders.iter().any(|&n| n != 2) {
        return Ok(false);
    }
    Ok(q0.table()?.iter().all(|&(_, qv)| qv % q0.exp == 0))
}

/// The common complement of every embedding of q0 (a sum of u(2), v(2)) in a.
pub fn witt_complement(a: &FiniteQuadraticForm, q0: &FiniteQuadraticForm) -> Result<FiniteQuadraticForm, FormError> {
    if !is_even_two_elementary(q0)? {
        return Err(FormError::NotEvenTwoElementary);
    }
    let mut first: Option<FiniteQuadraticForm> = None;
    for c in all_complements(a, q0)? {
        match &first {
            None => first = Some(c),
            Some(f) => {
                if !isometric(f, &c)? {
                    return Err(FormError::ComplementsDisagree);
                }
            }
        }
    }
    first.ok_or(FormError::NoEmbedding)
}

/// Distinct image subgroups of q0 in a, with their complements.
pub fn all_complements(
    a: &FiniteQuadraticForm,
    q0: &FiniteQuadraticForm,
) -> Result<Vec<FiniteQuadraticForm>, FormError> {
    let Some(search) = search(q0, a, 1)? else {
        return Ok(vec![]);
    };
    let mut seen: BTreeSet<BTreeSet<u64>> = BTreeSet::new();
    let mut images: Vec<Vec<Element>> = Vec::new();
    search.each(&mut |imgs| {
        if seen.insert(a.subgroup_elements(imgs)) {
            images.push(imgs.to_vec());
        }
        true
    });
    images.iter().map(|im| orthogonal_complement(im, a)).collect()
}

fn even_rep(u: i64, q: i64) -> i64 {
    if u % 2 == 0 {
        u
    } else {
        u + q
    }
}

/// Orthogonal sum of standard blocks for the nonunimodular constituents.
pub fn from_genus(s: &crate::genus::GenusSymbol) -> Result<FiniteQuadraticForm, FormError> {
    use crate::genus::{odd_units, Oddity};
    let mut out = FiniteQuadraticForm::trivial();
    for (&p, list) in &s.per_prime {
        for c in list.iter().filter(|c| c.scale_exp > 0) {
            c.check()?;
            let q = c.scale() as i64;
            let blocks: Vec<FiniteQuadraticForm> = match c.oddity {
                None => {
                    // one non-residue unit when the sign is −
                    let nonres = (2..p as i64).find(|&a| crate::arith::legendre(a as i128, p) == -1).unwrap();
                    (0..c.dim)
                        .map(|k| {
                            let u = if k == 0 && c.sign < 0 { nonres } else { 1 };
                            FiniteQuadraticForm::cyclic(q as u64, Q::new(even_rep(u, q), q)).unwrap()
                        })
                        .collect()
                }
                Some(Oddity::TypeII) => (0..c.dim / 2)
                    .map(|k| {
                        if k == 0 && c.sign < 0 {
                            FiniteQuadraticForm::v_block(q as u64)
                        } else {
                            FiniteQuadraticForm::u_block(q as u64)
                        }
                    })
                    .collect(),
                Some(Oddity::Odd(t)) => odd_units(c.dim, c.sign, t)
                    .expect("checked legal")
                    .into_iter()
                    .map(|u| FiniteQuadraticForm::cyclic(q as u64, Q::new(u as i64, q)).unwrap())
                    .collect(),
            };
            for b in blocks {
                out = out.direct_sum(&b);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genus::parse_symbol;
    use crate::lattice::{discriminant_form, GramMatrix};

    fn form(s: &str) -> FiniteQuadraticForm {
        from_genus(&parse_symbol(s).unwrap()).unwrap()
    }

    fn q(a: i64, b: i64) -> Q {
        Q::new(a, b)
    }

    #[test]
    fn standard_blocks() {
        let v = form("2_II^-2");
        assert_eq!(v.gram(), &[vec![q(1, 1), q(1, 2)], vec![q(1, 2), q(1, 1)]]);
        let u = form("2_II^+2");
        assert_eq!(u.gram(), &[vec![q(0, 1), q(1, 2)], vec![q(1, 2), q(0, 1)]]);
        assert!(form("").is_trivial());
        assert!(!isometric(&u, &v).unwrap());
        assert!(isometric(&v, &v).unwrap());
    }

    #[test]
    fn lattice_forms() {
        let d4 = discriminant_form(&GramMatrix::d_n(4, false)).unwrap();
        assert!(isometric(&d4, &FiniteQuadraticForm::v_block(2)).unwrap());
        assert!(discriminant_form(&GramMatrix::e_n(8, false)).unwrap().is_trivial());
        let f44 = discriminant_form(&GramMatrix::rank_one(44).unwrap()).unwrap();
        let want = FiniteQuadraticForm::cyclic(4, q(11, 4))
            .unwrap()
            .direct_sum(&FiniteQuadraticForm::cyclic(11, q(4, 11)).unwrap());
        assert!(isometric(&f44, &want).unwrap());
        assert_eq!(f44.sylow(2).gram()[0][0], q(11, 4) - 2);
        let two = GramMatrix::d_n(4, false).direct_sum(&GramMatrix::d_n(4, false));
        let dd = discriminant_form(&two).unwrap();
        assert!(isometric(&dd, &d4.direct_sum(&d4)).unwrap());
    }

    #[test]
    fn gluing_examples() {
        let u = FiniteQuadraticForm::u_block(2);
        let trivial = GluingDatum { left: u.clone(), right: u.clone(), graph: vec![] };
        assert!(isometric(&glue(&trivial).unwrap(), &u.direct_sum(&u)).unwrap());
        let diag = GluingDatum { left: u.clone(), right: u.clone(), graph: vec![vec![1, 0, 1, 0], vec![0, 1, 0, 1]] };
        assert!(glue(&diag).unwrap().is_trivial());
        let bad = GluingDatum { left: u.clone(), right: u.clone(), graph: vec![vec![1, 1, 0, 0]] };
        assert!(glue(&bad).is_err());

        // HM 201
        let a = form("2_7^+1 3^+2 9^-1");
        let b = form("3^+2");
        let gl = enumerate_gluings(&a, &b, 3).unwrap();
        let nine: Vec<_> = gl.iter().filter(|d| d.order() == 9).collect();
        assert!(!nine.is_empty());
        let target = form("2_7^+1 9^-1");
        for d in nine {
            let r = glue(d).unwrap();
            assert_eq!(r.order() * 81, a.order() * b.order());
            assert!(isometric(&r, &target).unwrap());
        }
        // HM 169 cannot glue to <6> at 3
        let a = form("2_1^+1 3^-1 9^+1");
        let b = discriminant_form(&GramMatrix::rank_one(6).unwrap()).unwrap();
        let gl = enumerate_gluings(&a, &b, 3).unwrap();
        assert!(gl.iter().all(|d| d.order() == 1));
    }

    #[test]
    fn embeddings_and_complements() {
        let v = FiniteQuadraticForm::v_block(2);
        let a = form("2_5^+3");
        assert!(!embeddings(&v, &a).unwrap().is_empty());
        assert!(embeddings(&v, &FiniteQuadraticForm::u_block(2)).unwrap().is_empty());
        let id = embeddings(&v, &v).unwrap();
        assert!(id.iter().any(|e| e.images == vec![vec![1, 0], vec![0, 1]]));
        // complement of <w1+w2, w2+w3> is generated by w1+w2+w3 of square 5/2
        let c = orthogonal_complement(&[vec![1, 1, 0], vec![0, 1, 1]], &a).unwrap();
        assert_eq!(c.orders(), &[2]);
        assert_eq!(c.gram()[0][0], q(5, 2) - 2);
        assert!(orthogonal_complement(&[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]], &a).unwrap().is_trivial());
    }

    #[test]
    fn integer_valued_hypothesis_is_needed() {
        let a = FiniteQuadraticForm::new(
            vec![2, 2, 4, 4],
            vec![
                vec![q(1, 2), q(0, 1), q(0, 1), q(0, 1)],
                vec![q(0, 1), q(3, 2), q(0, 1), q(0, 1)],
                vec![q(0, 1), q(0, 1), q(3, 4), q(0, 1)],
                vec![q(0, 1), q(0, 1), q(0, 1), q(3, 4)],
            ],
        )
        .unwrap();
        let c1 = orthogonal_complement(&[vec![1, 0, 0, 0], vec![0, 1, 0, 0]], &a).unwrap();
        let c2 = orthogonal_complement(&[vec![1, 0, 2, 0], vec![0, 1, 0, 2]], &a).unwrap();
        let d1 = FiniteQuadraticForm::new(vec![4, 4], vec![vec![q(3, 4), q(0, 1)], vec![q(0, 1), q(3, 4)]]).unwrap();
        let d2 = FiniteQuadraticForm::new(vec![4, 4], vec![vec![q(5, 4), q(0, 1)], vec![q(0, 1), q(1, 4)]]).unwrap();
        assert!(isometric(&c1, &d1).unwrap());
        assert!(isometric(&c2, &d2).unwrap());
        assert!(!isometric(&d1, &d2).unwrap());
    }

    #[test]
    fn witt_examples() {
        let v = FiniteQuadraticForm::v_block(2);
        let c = witt_complement(&form("2_5^+3 7^-1"), &v).unwrap();
        assert!(isometric(&c, &form("2_5^-1 7^-1")).unwrap());
        let c = witt_complement(&form("2_II^-2 8_3^-1"), &v).unwrap();
        assert!(isometric(&c, &form("8_3^-1")).unwrap());
        assert!(witt_complement(&v, &v).unwrap().is_trivial());
        assert_eq!(witt_complement(&form("8_3^-1"), &v), Err(FormError::NoEmbedding));
    }

    #[test]
    fn cap_is_enforced() {
        let big = form("2_II^+2").with_cap(2);
        assert!(matches!(big.elements(), Err(FormError::CapExceeded(4, 2))));
    }
}
