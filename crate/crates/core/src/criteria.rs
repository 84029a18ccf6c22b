//! Decision lemmas for symplectic actions on the supersingular K3 surface
//! of Artin invariant one, plus the rank-3 and rank-4 workflows.
//!
//! Sign conventions: the coinvariant lattice is negative definite of rank
//! 24 − r, the Néron–Severi lattice has signature (1, 21), and H is the
//! negative definite rank-4 lattice with A(H) ≅ −A(NS).

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::arith::{is_prime, legendre, squarefree_part, unit_symbol, valuation};
use crate::classify::ClassificationEntry;
use crate::discform::{
    anti_isometric, embeddings, enumerate_gluings, from_genus, glue, isometric, witt_complement,
    FiniteQuadraticForm, FormError, Q,
};
use crate::genus::{canonicalize_2adic, odd_units, Constituent, GenusError, GenusSymbol, Oddity};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CriteriaError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Genus(#[from] GenusError),
}

type Result<T> = std::result::Result<T, CriteriaError>;

/// Sign ε of the p-constituent p^{ε2} of NS(X_{0,p}); −1 encodes v(2) at 2.
pub fn ns_sign(p: u64) -> i8 {
    if p == 2 {
        -1
    } else {
        -legendre(-1, p)
    }
}

fn artin_one_fragment(p: u64) -> GenusSymbol {
    let c = if p == 2 {
        Constituent::two_adic(1, 2, -1, Oddity::TypeII)
    } else {
        Constituent::odd_prime(p, 1, 2, ns_sign(p))
    };
    GenusSymbol::fragment(vec![c])
}

/// Per-characteristic data: NS(X_{0,p}) and the lattice H^(p).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharacteristicContext {
    pub p: u64,
    pub artin_invariant: u32,
    pub ns_genus: GenusSymbol,
    pub h_genus: GenusSymbol,
}

impl CharacteristicContext {
    pub fn new(p: u64) -> Result<Self> {
        if !is_prime(p) {
            return Err(CriteriaError::NotPrime(p));
        }
        let frag = artin_one_fragment(p);
        let ns_genus = frag.clone().with_signature(1, 21, true)?;
        let h_genus = frag.with_signature(0, 4, true)?;
        for g in [&ns_genus, &h_genus] {
            let ex = g.exists()?;
            if !ex.exists {
                return Err(CriteriaError::Precondition(format!("{g}: {}", ex.reason)));
            }
        }
        Ok(CharacteristicContext { p, artin_invariant: 1, ns_genus, h_genus })
    }

    pub fn h_form(&self) -> FiniteQuadraticForm {
        from_genus(&self.h_genus).expect("legal symbol")
    }

    pub fn ns_form(&self) -> FiniteQuadraticForm {
        from_genus(&self.ns_genus).expect("legal symbol")
    }
}

/// Outcome of a single predicate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Check {
    Pass(String),
    Fail(String),
    NotApplicable(String),
}

impl Check {
    pub fn is_fail(&self) -> bool {
        matches!(self, Check::Fail(_))
    }

    pub fn is_pass(&self) -> bool {
        matches!(self, Check::Pass(_))
    }

    pub fn text(&self) -> &str {
        match self {
            Check::Pass(t) | Check::Fail(t) | Check::NotApplicable(t) => t,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (tag, t) = match self {
            Check::Pass(t) => ("pass", t),
            Check::Fail(t) => ("fail", t),
            Check::NotApplicable(t) => ("n/a", t),
        };
        if t.is_empty() {
            write!(f, "{tag}")
        } else {
            write!(f, "{tag} {t}")
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Realized {
    Yes,
    No,
    Undetermined,
}

impl fmt::Display for Realized {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Realized::Yes => "yes",
            Realized::No => "no",
            Realized::Undetermined => "undetermined",
        })
    }
}

/// Tame: p ∤ |G|. Wild otherwise. Unknown when |G| is not recorded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Tame,
    Wild,
    Unknown,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Tame => "tame",
            Regime::Wild => "wild",
            Regime::Unknown => "unknown",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reason {
    pub id: String,
    pub text: String,
    pub anchor: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub realized: Realized,
    pub regime: Regime,
    pub reasons: Vec<Reason>,
    /// Compact failure tag in table style, e.g. "(21/5)=1" or "*".
    pub short: Option<String>,
}

impl Verdict {
    fn new(regime: Regime) -> Self {
        Verdict { realized: Realized::Undetermined, regime, reasons: Vec::new(), short: None }
    }

    fn note(&mut self, id: &str, text: impl Into<String>, anchor: &str) {
        self.reasons.push(Reason { id: id.into(), text: text.into(), anchor: anchor.into() });
    }

    fn fail(mut self, id: &str, text: impl Into<String>, anchor: &str, short: Option<String>) -> Self {
        self.note(id, text, anchor);
        self.realized = Realized::No;
        self.short = short;
        self
    }

    fn pass(mut self) -> Self {
        self.realized = Realized::Yes;
        self
    }

    /// Reason chain joined by "; ".
    pub fn chain(&self) -> String {
        self.reasons.iter().map(|r| format!("{}: {}", r.id, r.text)).collect::<Vec<_>>().join("; ")
    }
}

pub fn regime(e: &ClassificationEntry, p: u64) -> Regime {
    match e.group_order {
        Some(n) if n % p == 0 => Regime::Wild,
        Some(_) => Regime::Tame,
        None => Regime::Unknown,
    }
}

/// Primes p with l_p(Λ_G) > rk Λ^G − 2; two or more exclude every p.
pub fn length_criterion(e: &ClassificationEntry) -> BTreeSet<u64> {
    let bound = e.rank_fixed.saturating_sub(2);
    e.genus.primes().into_iter().filter(|&p| e.genus.p_length(p) > bound).collect()
}

/// Fails when l_p = rk Λ^G and more than rk Λ^G − 2 dimensions sit at
/// scales above p.
pub fn constituent_criterion(e: &ClassificationEntry, p: u64) -> Check {
    let l = e.genus.p_length(p);
    if l != e.rank_fixed {
        return Check::NotApplicable(format!("l_{p} = {l} differs from rank {}", e.rank_fixed));
    }
    let high: u32 = e.genus.constituents(p).iter().filter(|c| c.scale_exp > 1).map(|c| c.dim).sum();
    let bound = e.rank_fixed - 2;
    if high > bound {
        Check::Fail(format!("{high} dimensions above scale {p} exceed {bound}"))
    } else {
        Check::Pass(format!("{high} dimensions above scale {p}, bound {bound}"))
    }
}

/// Legal p-adic fragments without unimodular part whose standard form is
/// isometric to the p-part of `f`.
pub fn symbols_for_form(f: &FiniteQuadraticForm, p: u64) -> Result<Vec<Vec<Constituent>>> {
    let fp = f.sylow(p);
    let mut scales: Vec<(u32, u32)> = Vec::new();
    for n in fp.invariant_factors() {
        let e = valuation(n as u128, p);
        match scales.last_mut() {
            Some((s, d)) if *s == e => *d += 1,
            _ => scales.push((e, 1)),
        }
    }
    let options: Vec<Vec<Constituent>> = scales
        .iter()
        .map(|&(e, n)| {
            let mut v = Vec::new();
            for sign in [1i8, -1] {
                if p != 2 {
                    v.push(Constituent::odd_prime(p, e, n, sign));
                    continue;
                }
                if n % 2 == 0 {
                    v.push(Constituent::two_adic(e, n, sign, Oddity::TypeII));
                }
                for t in 0..8u8 {
                    if odd_units(n, sign, t).is_some() {
                        v.push(Constituent::two_adic(e, n, sign, Oddity::Odd(t)));
                    }
                }
            }
            v
        })
        .collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; options.len()];
    loop {
        let pick: Vec<Constituent> = idx.iter().zip(&options).map(|(&i, o)| o[i]).collect();
        let g = from_genus(&GenusSymbol::fragment(pick.clone()))?;
        if isometric(&g, &fp)? {
            out.push(pick);
        }
        let mut k = 0;
        loop {
            if k == idx.len() {
                return Ok(out);
            }
            idx[k] += 1;
            if idx[k] < options[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// An even lattice genus with signature (plus, minus) and discriminant
/// form isometric to `f`, if one exists (canonical 2-adic spelling).
pub fn realize_form(f: &FiniteQuadraticForm, plus: u32, minus: u32) -> Result<Option<GenusSymbol>> {
    let rank = plus + minus;
    let primes = f.primes();
    if primes.iter().any(|&p| f.p_length(p) as u32 > rank) {
        return Ok(None);
    }
    let mut per_prime = Vec::new();
    for &p in &primes {
        let c = symbols_for_form(f, p)?;
        if c.is_empty() {
            return Err(CriteriaError::Precondition(format!("no symbol realizes the {p}-part")));
        }
        per_prime.push(c);
    }
    let mut idx = vec![0usize; per_prime.len()];
    loop {
        let mut all = Vec::new();
        for (i, opts) in idx.iter().zip(&per_prime) {
            all.extend_from_slice(&opts[*i]);
        }
        if let Ok(s) = GenusSymbol::fragment(all).with_signature(plus, minus, true) {
            if s.exists()?.exists {
                return Ok(Some(canonicalize_2adic(&s)?));
            }
        }
        let mut k = 0;
        loop {
            if k == idx.len() {
                return Ok(None);
            }
            idx[k] += 1;
            if idx[k] < per_prime[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Print only the nonunimodular data of a genus.
pub fn fragment_text(s: &GenusSymbol) -> String {
    s.strip().to_string()
}

fn prime_to(n: u128, p: u64) -> u128 {
    let mut n = n;
    while n.is_multiple_of(p as u128) {
        n /= p as u128;
    }
    n
}

/// Sign products over the candidate complements realizing −A_{p'}(Λ_G)
/// without unimodular part.
fn complement_sign_products(e: &ClassificationEntry, pp: u64) -> Result<(Vec<Vec<Constituent>>, BTreeSet<i8>)> {
    let target = e.form().sylow(pp).negate();
    let cands = symbols_for_form(&target, pp)?;
    let prods = cands.iter().map(|c| c.iter().map(|x| x.sign).product::<i8>()).collect();
    Ok((cands, prods))
}

fn spell(c: &[Constituent]) -> String {
    c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

/// The p'-adic determinant condition on Λ_G^⊥ ⊂ NS(X_{0,p}) when
/// l_{p'}(Λ_G) = rk Λ^G − 2.
pub fn determinant_condition(e: &ClassificationEntry, p: u64, pp: u64) -> Result<Check> {
    let l = e.genus.p_length(pp);
    if pp == p {
        return Ok(Check::NotApplicable(format!("p' = p = {p}")));
    }
    if l == 0 || l + 2 != e.rank_fixed {
        return Ok(Check::NotApplicable(format!("l_{pp} = {l}, need {}", e.rank_fixed.saturating_sub(2))));
    }
    // −det Λ_G, with det Λ_G = (−1)^{rank}|det|
    let abs = e.genus.abs_det();
    let neg = e.coinvariant_rank().is_multiple_of(2);
    let d = prime_to(abs, pp) as i128 * if neg { -1 } else { 1 };
    let want = unit_symbol(d, pp);
    let (cands, prods) = complement_sign_products(e, pp)?;
    let shown = cands.iter().map(|c| spell(c)).collect::<Vec<_>>().join(" | ");
    let sym = |s: i8| if s > 0 { "1" } else { "-1" };
    if prods.contains(&want) {
        Ok(Check::Pass(format!("complement {shown}, ({d}/{pp})={}", sym(want))))
    } else {
        Ok(Check::Fail(format!("complement {shown}, but ({d}/{pp})={}", sym(want))))
    }
}

/// Square-class test at p for a positive d prime to p; at 2 this is the
/// mod-8 test (d ≡ ±1 counts as a square).
fn is_square_class(d: u128, p: u64) -> bool {
    if p == 2 {
        matches!(d % 8, 1 | 7)
    } else {
        legendre(d as i128, p) == 1
    }
}

/// Conditions for rank Λ^G = 4 and p ∤ det Λ_G.
pub fn tame_conditions(e: &ClassificationEntry, p: u64) -> Result<Verdict> {
    if e.rank_fixed != 4 {
        return Err(CriteriaError::Precondition(format!("rank of fixed lattice is {}, need 4", e.rank_fixed)));
    }
    if !is_prime(p) {
        return Err(CriteriaError::NotPrime(p));
    }
    let reg = regime(e, p);
    let mut v = Verdict::new(reg);
    let abs = e.genus.abs_det();
    if abs.is_multiple_of(p as u128) {
        v.note("tame", format!("{p} divides det = {abs}; the tame checks do not apply"), "p ∤ det");
        return Ok(v);
    }
    let cond_i = match reg {
        Regime::Tame => format!("{p} ∤ |G|"),
        Regime::Wild => format!("{p} | |G| but {p} ∤ det, tame checks still apply"),
        Regime::Unknown => "group order unknown".to_string(),
    };
    v.note("(i)", cond_i, "tame regime");
    for q in e.genus.primes() {
        let l = e.genus.p_length(q);
        if l > 2 {
            return Ok(v.fail("(ii)", format!("l_{q} = {l} > 2"), "length of A(Λ^G)", Some(format!("l_{q}={l}"))));
        }
    }
    v.note("(ii)", "length of A(Λ^G) at most 2", "length of A(Λ^G)");
    v.note("(iii)", "Artin invariant 1 (consequence)", "σ₀ = 1");
    let s = squarefree_part(abs as u64);
    if is_square_class(abs, p) {
        let t = format!("({s}/{p})=1");
        return Ok(v.fail("(iv)", format!("{t}: det Λ^G is a square at {p}"), "det non-square mod p", Some(t)));
    }
    v.note("(iv)", format!("({s}/{p})=-1"), "det non-square mod p");
    for q in e.genus.primes() {
        if e.genus.p_length(q) != 2 {
            continue;
        }
        let d = -(prime_to(abs, q) as i128);
        let want = unit_symbol(d, q);
        let (cands, prods) = complement_sign_products(e, q)?;
        let shown = cands.iter().map(|c| spell(c)).collect::<Vec<_>>().join(" | ");
        if !prods.contains(&want) {
            let t = format!("({d}/{q})={want}");
            return Ok(v.fail("(v)", format!("complement {shown}, but {t}"), "(−d'/p') = Π ε", Some(t)));
        }
        v.note("(v)", format!("at {q}: complement {shown}, ({d}/{q})={want}"), "(−d'/p') = Π ε");
    }
    Ok(v.pass())
}

/// Legendre symbol of the orbit-length product at an odd p not dividing it.
pub fn legendre_orbit_condition(lengths: &[u32], p: u64) -> Check {
    if lengths.len() != 4 || lengths.iter().sum::<u32>() != 24 || lengths.contains(&0) {
        return Check::NotApplicable(format!("orbit lengths {lengths:?} are not four positive integers summing to 24"));
    }
    let prod: u64 = lengths.iter().map(|&l| l as u64).product();
    let s = squarefree_part(prod);
    if p == 2 {
        let class = if matches!(prod % 8, 1 | 7) { "square" } else { "non-square" };
        return Check::NotApplicable(format!("({s}/2): mod-8 class of {prod} is {class}, decided 2-adically"));
    }
    if prod.is_multiple_of(p) {
        return Check::NotApplicable(format!("{p} divides {prod}"));
    }
    if legendre(prod as i128, p) == 1 {
        Check::Fail(format!("({s}/{p})=1"))
    } else {
        Check::Pass(format!("({s}/{p})=-1"))
    }
}

/// Rank-3 glue test of Λ_G against ⟨v²⟩ for one v².
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlueProfile {
    pub v2: u64,
    /// Primes q with A_q(Λ_G) ≅ −A_q(⟨v²⟩).
    pub glues_at: BTreeSet<u64>,
    /// The characteristic left over, if its residual glue yields NS(X_{0,p}).
    pub p: Option<u64>,
}

fn cyclic_form(v2: u64) -> FiniteQuadraticForm {
    FiniteQuadraticForm::cyclic(v2, Q::new(1, v2 as i64)).expect("cyclic form")
}

/// Whether the p-parts of a and b glue along some Γ to the p-part of NS.
fn residual_glues(a: &FiniteQuadraticForm, b: &FiniteQuadraticForm, p: u64) -> Result<bool> {
    let target = CharacteristicContext::new(p)?.ns_form();
    for d in enumerate_gluings(&a.sylow(p), &b.sylow(p), p)? {
        if isometric(&glue(&d)?, &target)? {
            return Ok(true);
        }
    }
    Ok(false)
}

pub fn rank3_glue_profile(e: &ClassificationEntry, v2: u64) -> Result<GlueProfile> {
    if e.rank_fixed != 3 {
        return Err(CriteriaError::Precondition(format!("rank of fixed lattice is {}, need 3", e.rank_fixed)));
    }
    if v2 == 0 || v2 % 2 == 1 {
        return Err(CriteriaError::Precondition(format!("v² = {v2} must be even and positive")));
    }
    let a = e.form();
    let b = cyclic_form(v2);
    let mut primes: BTreeSet<u64> = a.primes().into_iter().collect();
    primes.extend(b.primes());
    let mut glues_at = BTreeSet::new();
    for &q in &primes {
        if anti_isometric(&a.sylow(q), &b.sylow(q))? {
            glues_at.insert(q);
        }
    }
    let rest: Vec<u64> = primes.difference(&glues_at).copied().collect();
    let p = match rest.as_slice() {
        [p] if residual_glues(&a, &b, *p)? => Some(*p),
        _ => None,
    };
    Ok(GlueProfile { v2, glues_at, p })
}

/// All (p, v²) realizing the rank-3 glue. v² = m·p^k with m the prime-to-p
/// part of |det Λ_G|; the bookkeeping |det|·v²/|Γ|² = p² bounds k by
/// v_p(det) + 2 with k ≡ v_p(det) (mod 2). v lies in an even lattice, so
/// odd v² is skipped.
pub fn rank3_glue_search(e: &ClassificationEntry) -> Result<Vec<GlueProfile>> {
    let abs = e.genus.abs_det();
    let mut out = Vec::new();
    for p in e.genus.primes() {
        let a = valuation(abs, p);
        let m = prime_to(abs, p) as u64;
        // |det| first, then the other admissible exponents
        let mut ks = vec![a];
        ks.extend((0..=a + 2).filter(|&k| k != a && k % 2 == a % 2));
        for k in ks {
            let v2 = m * p.pow(k);
            if v2 % 2 == 1 {
                continue;
            }
            let prof = rank3_glue_profile(e, v2)?;
            if prof.p == Some(p) {
                out.push(prof);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct Char2Outcome {
    pub l_prime: Option<FiniteQuadraticForm>,
    pub l_prime_symbol: Option<GenusSymbol>,
    pub v2: Option<u64>,
    pub verdict: Verdict,
}

/// Rank 3 at p = 2 with l_2 ≥ 2: v(2) must embed; its Witt complement L′
/// must be cyclic with −A(L′) ≅ A(⟨|L′|⟩).
pub fn rank3_char2_workflow(e: &ClassificationEntry) -> Result<Char2Outcome> {
    if e.rank_fixed != 3 || e.genus.p_length(2) < 2 {
        return Err(CriteriaError::Precondition("needs rank 3 and l_2 ≥ 2".into()));
    }
    let reg = regime(e, 2);
    let a = e.form();
    let v = FiniteQuadraticForm::v_block(2);
    let none = |verdict| Char2Outcome { l_prime: None, l_prime_symbol: None, v2: None, verdict };
    if embeddings(&v, &a)?.is_empty() {
        let verdict = Verdict::new(reg).fail("v(2)", "v(2) does not embed into A(Λ_G)", "v(2) ↪ A(Λ_G)", Some("v(2)".into()));
        return Ok(none(verdict));
    }
    let lp = witt_complement(&a, &v)?;
    let sym = realize_form(&lp, 0, 25)?;
    let shown = sym.as_ref().map(fragment_text).unwrap_or_else(|| "?".into());
    let mut verdict = Verdict::new(reg);
    verdict.note("v(2)", "v(2) embeds into A(Λ_G)", "v(2) ↪ A(Λ_G)");
    verdict.note("witt", format!("L′ = {shown}"), "Witt cancellation");
    if lp.invariant_factors().len() > 1 {
        let verdict = verdict.fail("glue", format!("A(L′) of length {} cannot glue to a vector", lp.length()), "glue to v", Some("no".into()));
        return Ok(Char2Outcome { l_prime: Some(lp), l_prime_symbol: sym, v2: None, verdict });
    }
    let v2 = lp.order();
    let ok = anti_isometric(&lp, &cyclic_form(v2))?;
    let verdict = if ok {
        verdict.note("glue", format!("L′ glues to v with v² = {v2}"), "glue to v");
        verdict.pass()
    } else {
        verdict.fail("glue", format!("−A(L′) ≇ A(⟨{v2}⟩)"), "glue to v", Some("no".into()))
    };
    Ok(Char2Outcome { l_prime: Some(lp), l_prime_symbol: sym, v2: Some(v2), verdict })
}

/// One gluing of Λ_G with H^(p) and the fate of its complement in L_{1,25}.
#[derive(Debug, Clone)]
pub struct GlueOutcome {
    pub glue_order: u64,
    pub l_prime: FiniteQuadraticForm,
    /// Genus of the complement NS^G, when it exists.
    pub complement: Option<GenusSymbol>,
    pub failure: Option<String>,
}

/// Glue A(Λ_G) to A(H^(p)) along every admissible Γ; the complement of the
/// saturation L′ in L_{1,25} has signature (1, r − 3) and form −A(L′).
pub fn lattice_pipeline(e: &ClassificationEntry, ctx: &CharacteristicContext) -> Result<Vec<GlueOutcome>> {
    let r = e.rank_fixed;
    let a = e.form();
    let h = ctx.h_form();
    let mut out = Vec::new();
    for d in enumerate_gluings(&a, &h, ctx.p)? {
        let lp = glue(&d)?;
        let neg = lp.negate();
        let len = lp.length() as u32;
        let (complement, failure) = if len > r - 2 {
            (None, Some(format!("length {len} of A(L′) exceeds {}", r - 2)))
        } else {
            match realize_form(&neg, 1, r - 3)? {
                Some(s) => (Some(s), None),
                None => (None, Some("no even genus of signature (1, r−3) carries −A(L′)".to_string())),
            }
        };
        out.push(GlueOutcome { glue_order: d.order(), l_prime: lp, complement, failure });
    }
    Ok(out)
}

/// Lattice-side verdict from the gluing pipeline with star tags:
/// "**" no nontrivial glue, "*" all nontrivial 2-glues fail, "***" all
/// nontrivial odd glues fail.
pub fn wild_rank4_reasons(e: &ClassificationEntry, p: u64) -> Result<Verdict> {
    let ctx = CharacteristicContext::new(p)?;
    pipeline_verdict(e, &ctx)
}

pub(crate) fn pipeline_verdict(e: &ClassificationEntry, ctx: &CharacteristicContext) -> Result<Verdict> {
    let p = ctx.p;
    let outcomes = lattice_pipeline(e, ctx)?;
    let mut v = Verdict::new(regime(e, p));
    if let Some(o) = outcomes.iter().find(|o| o.complement.is_some()) {
        let c = o.complement.as_ref().unwrap();
        v.note("glue", format!("|Γ| = {}, complement {c}", o.glue_order), "glue with H");
        return Ok(v.pass());
    }
    let nontrivial: Vec<&GlueOutcome> = outcomes.iter().filter(|o| o.glue_order > 1).collect();
    for o in &outcomes {
        v.note("glue", format!("|Γ| = {}: {}", o.glue_order, o.failure.as_deref().unwrap_or("")), "glue with H");
    }
    let (tag, text) = if nontrivial.is_empty() {
        ("**", "no nontrivial glue with H exists and the direct sum fails")
    } else if p == 2 {
        ("*", "every glue along 2-torsion fails")
    } else {
        ("***", "every glue along p-torsion fails")
    };
    Ok(v.fail(tag, text, "glue with H", Some(tag.to_string())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contexts_exist() {
        for p in [2, 3, 5, 7, 11, 13, 101] {
            let ctx = CharacteristicContext::new(p).unwrap();
            assert_eq!(ctx.ns_genus.rank(), Some(22));
            assert_eq!(ctx.h_form().order(), p * p);
        }
        assert_eq!(ns_sign(3), 1);
        assert_eq!(ns_sign(5), -1);
        assert!(CharacteristicContext::new(9).is_err());
    }

    #[test]
    fn orbit_legendre() {
        assert_eq!(legendre_orbit_condition(&[1, 1, 1, 21], 5).to_string(), "fail (21/5)=1");
        assert!(legendre_orbit_condition(&[1, 1, 1, 21], 11).is_pass());
        assert!(matches!(legendre_orbit_condition(&[1, 1, 7, 15], 2), Check::NotApplicable(_)));
        assert!(matches!(legendre_orbit_condition(&[1, 1, 7, 15], 7), Check::NotApplicable(_)));
        assert_eq!(legendre_orbit_condition(&[1, 1, 6, 16], 5).to_string(), "fail (6/5)=1");
    }

    #[test]
    fn symbols_for_small_forms() {
        let f = FiniteQuadraticForm::cyclic(2, Q::new(5, 2)).unwrap();
        let mut got: Vec<String> = symbols_for_form(&f, 2).unwrap().iter().map(|c| spell(c)).collect();
        got.sort();
        assert_eq!(got, vec!["2_1^+1", "2_5^-1"]);
        let v = FiniteQuadraticForm::v_block(2);
        let got: Vec<String> = symbols_for_form(&v, 2).unwrap().iter().map(|c| spell(c)).collect();
        assert_eq!(got, vec!["2_II^-2"]);
        let g = realize_form(&FiniteQuadraticForm::trivial(), 1, 1).unwrap().unwrap();
        assert_eq!(g.to_string(), "II_{1,1}");
        assert!(realize_form(&FiniteQuadraticForm::trivial(), 1, 2).unwrap().is_none());
    }
}
