//! Classification entries, data ingestion, the per-characteristic driver
//! and the residue characterization of characteristics where the
//! square-class conditions all hold.

mod golden;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::arith::{is_prime, legendre, primes_below, squarefree_part};
use crate::criteria::{
    self, constituent_criterion, determinant_condition, length_criterion, pipeline_verdict, rank3_char2_workflow,
    rank3_glue_search, tame_conditions, CharacteristicContext, CriteriaError, Realized, Reason, Regime, Verdict,
};
use crate::discform::{from_genus, FiniteQuadraticForm};
use crate::genus::{parse_symbol, GenusSymbol};

pub use golden::{expected_verdicts, reproduce_table, reproduce_table_with, table_ids, ExpectedVerdict, TableDiff, TableRow};

/// Environment variable naming an external entries file.
pub const DATA_ENV: &str = "GENUSFORGE_DATA";
/// Default bound for "all characteristics" queries.
pub const DEFAULT_PRIME_BOUND: u64 = 200;

const EMBEDDED: &str = include_str!("../../data/entries.tsv");

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClassifyError {
    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error("cannot read {0}: {1}")]
    Io(String, String),
    #[error("unknown table {0}")]
    UnknownTable(u32),
    #[error("unknown entry {0}")]
    UnknownEntry(String),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("prime {0} exceeds the configured bound {1}")]
    AboveBound(u64, u64),
    #[error(transparent)]
    Criteria(#[from] CriteriaError),
}

/// Höhn–Mason number with an optional variant letter for alternative
/// symbol spellings of the same row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HmId {
    pub number: u32,
    pub variant: Option<char>,
}

impl HmId {
    pub fn new(number: u32) -> Self {
        HmId { number, variant: None }
    }
}

impl fmt::Display for HmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number)?;
        if let Some(c) = self.variant {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for HmId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let digits: String = s.chars().take_while(|c| c.is_ascii_digit()).collect();
        let rest = &s[digits.len()..];
        let number = digits.parse::<u32>().map_err(|_| format!("bad hm id {s:?}"))?;
        let variant = match rest.len() {
            0 => None,
            1 if rest.chars().all(|c| c.is_ascii_lowercase()) => rest.chars().next(),
            _ => return Err(format!("bad hm id {s:?}")),
        };
        Ok(HmId { number, variant })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassificationEntry {
    pub hm_id: HmId,
    pub group_name: String,
    pub group_order: Option<u64>,
    /// Genus of Λ_G, completed to signature (0, 24 − rank_fixed).
    pub genus: GenusSymbol,
    pub rank_fixed: u32,
    /// One or more alternative orbit-length quadruples.
    pub orbit_lengths: Vec<[u32; 4]>,
    /// Containment facts, "group@p" or plain group names.
    pub contained_in: Vec<String>,
}

impl ClassificationEntry {
    /// Build from a genus text; a signature-free symbol is completed as a
    /// negative definite even lattice of rank 24 − rank_fixed.
    pub fn new(
        hm_id: HmId,
        group_name: &str,
        group_order: Option<u64>,
        rank_fixed: u32,
        genus: &str,
    ) -> Result<Self, String> {
        if !(3..=24).contains(&rank_fixed) {
            return Err(format!("rank_fixed = {rank_fixed} outside 3..=24"));
        }
        let mut g = parse_symbol(genus).and_then(|g| g.respell_compartments()).map_err(|e| e.to_string())?;
        if g.signature.is_none() {
            g = g.with_signature(0, 24 - rank_fixed, true).map_err(|e| e.to_string())?;
        }
        Ok(ClassificationEntry {
            hm_id,
            group_name: group_name.to_string(),
            group_order,
            genus: g,
            rank_fixed,
            orbit_lengths: Vec::new(),
            contained_in: Vec::new(),
        })
    }

    pub fn coinvariant_rank(&self) -> u32 {
        24 - self.rank_fixed
    }

    /// A(Λ_G).
    pub fn form(&self) -> FiniteQuadraticForm {
        from_genus(&self.genus).expect("validated symbol")
    }

    /// Containment facts recorded for characteristic p.
    pub fn containments_at(&self, p: u64) -> Vec<&str> {
        let tag = format!("@{p}");
        self.contained_in.iter().filter_map(|c| c.strip_suffix(&tag)).collect()
    }

    /// Violations of the entry invariants.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.rank_fixed < 3 {
            out.push(format!("rank_fixed = {} < 3", self.rank_fixed));
        }
        match self.genus.rank() {
            Some(n) if n + self.rank_fixed == 24 => {}
            Some(n) => out.push(format!("symbol rank {n} != 24 - {}", self.rank_fixed)),
            None => out.push("symbol has no signature".into()),
        }
        match self.genus.exists() {
            Ok(ex) if ex.exists => {}
            Ok(ex) => out.push(format!("genus does not exist: {}", ex.reason)),
            Err(e) => out.push(e.to_string()),
        }
        if self.group_order == Some(0) {
            out.push("group order 0".into());
        }
        let det_class = squarefree_part(self.genus.abs_det() as u64);
        for o in &self.orbit_lengths {
            if o.iter().sum::<u32>() != 24 || o.contains(&0) {
                out.push(format!("orbit lengths {o:?} do not sum to 24"));
                continue;
            }
            let prod: u64 = o.iter().map(|&l| l as u64).product();
            if squarefree_part(prod) != det_class {
                out.push(format!("orbit product {prod} not in the square class of det ({det_class})"));
            }
        }
        out
    }
}

/// Parse entries in the tab-separated schema
/// `hm_id group order rank_fixed genus orbits contains`.
pub fn parse_entries(text: &str) -> Result<Vec<ClassificationEntry>, ClassifyError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |m: String| ClassifyError::Schema { line, message: m };
        let l = raw.trim_end_matches('\r');
        if l.trim().is_empty() || l.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = l.split('\t').collect();
        if f.len() != 7 {
            return Err(err(format!("expected 7 tab-separated fields, found {}", f.len())));
        }
        let hm: HmId = f[0].parse().map_err(err)?;
        let order = match f[2].trim() {
            "-" => None,
            s => Some(s.parse::<u64>().map_err(|_| err(format!("bad order {s:?}")))?),
        };
        let rank: u32 = f[3].trim().parse().map_err(|_| err(format!("bad rank_fixed {:?}", f[3])))?;
        let mut e = ClassificationEntry::new(hm, f[1].trim(), order, rank, f[4]).map_err(err)?;
        if f[5].trim() != "-" {
            for alt in f[5].split('|') {
                let v: Vec<u32> = alt
                    .split(',')
                    .map(|x| x.trim().parse::<u32>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| err(format!("bad orbits {alt:?}")))?;
                let arr: [u32; 4] = v.try_into().map_err(|_| err(format!("need four orbit lengths in {alt:?}")))?;
                e.orbit_lengths.push(arr);
            }
        }
        if f[6].trim() != "-" {
            e.contained_in = f[6].split(',').map(|s| s.trim().to_string()).collect();
        }
        let v = e.violations();
        if !v.is_empty() {
            return Err(err(v.join("; ")));
        }
        out.push(e);
    }
    Ok(out)
}

pub fn load_entries(path: &Path) -> Result<Vec<ClassificationEntry>, ClassifyError> {
    let text = std::fs::read_to_string(path).map_err(|e| ClassifyError::Io(path.display().to_string(), e.to_string()))?;
    parse_entries(&text)
}

/// The embedded corpus, plus the file named by GENUSFORGE_DATA if set.
pub fn default_entries() -> Result<Vec<ClassificationEntry>, ClassifyError> {
    let mut v = embedded_entries();
    if let Ok(p) = std::env::var(DATA_ENV) {
        v.extend(load_entries(Path::new(&p))?);
    }
    Ok(v)
}

pub fn embedded_entries() -> Vec<ClassificationEntry> {
    parse_entries(EMBEDDED).expect("embedded corpus is valid")
}

pub fn find_entry<'a>(entries: &'a [ClassificationEntry], id: &str) -> Result<&'a ClassificationEntry, ClassifyError> {
    let hm: HmId = id.parse().map_err(|_| ClassifyError::UnknownEntry(id.to_string()))?;
    entries.iter().find(|e| e.hm_id == hm).ok_or_else(|| ClassifyError::UnknownEntry(id.to_string()))
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub checked: usize,
    pub violations: Vec<(HmId, String)>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate_entries(entries: &[ClassificationEntry]) -> ValidationReport {
    let mut r = ValidationReport { checked: entries.len(), violations: Vec::new() };
    let mut seen = BTreeSet::new();
    for e in entries {
        if !seen.insert(e.hm_id) {
            r.violations.push((e.hm_id, "duplicate hm id".into()));
        }
        for v in e.violations() {
            r.violations.push((e.hm_id, v));
        }
    }
    r
}

fn reason(id: &str, text: impl Into<String>, anchor: &str) -> Reason {
    Reason { id: id.into(), text: text.into(), anchor: anchor.into() }
}

fn no(regime: Regime, mut reasons: Vec<Reason>, r: Reason, short: String) -> Verdict {
    reasons.push(r);
    Verdict { realized: Realized::No, regime, reasons, short: Some(short) }
}

fn classify_rank3(e: &ClassificationEntry, p: u64) -> Result<Verdict, ClassifyError> {
    let reg = criteria::regime(e, p);
    let mut chain = Vec::new();
    let forced = length_criterion(e);
    let list = forced.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(",");
    if forced.len() >= 2 {
        let r = reason("length", format!("l_q > 1 at {{{list}}}: excluded in every characteristic"), "p-length vs rank");
        return Ok(no(reg, chain, r, "length".into()));
    }
    if let Some(&q) = forced.iter().next() {
        if q != p {
            let r = reason("length", format!("l_{q} > 1 forces characteristic {q}"), "p-length vs rank");
            return Ok(no(reg, chain, r, "length".into()));
        }
        chain.push(reason("length", format!("l_{q} > 1 forces characteristic {q}"), "p-length vs rank"));
    }
    let c = constituent_criterion(e, p);
    if c.is_fail() {
        return Ok(no(reg, chain, reason("constituent", c.text(), "constituent census"), "constituent".into()));
    }
    for q in e.genus.primes() {
        let d = determinant_condition(e, p, q)?;
        if d.is_fail() {
            return Ok(no(reg, chain, reason("determinant", format!("at {q}: {}", d.text()), "(d'/p') = Π ε"), "det".into()));
        }
        if d.is_pass() {
            chain.push(reason("determinant", format!("at {q}: {}", d.text()), "(d'/p') = Π ε"));
        }
    }
    if p == 2 && e.genus.p_length(2) >= 2 {
        let out = rank3_char2_workflow(e)?;
        let mut v = out.verdict;
        chain.append(&mut v.reasons);
        v.reasons = chain;
        return Ok(v);
    }
    let hits: Vec<_> = rank3_glue_search(e)?.into_iter().filter(|g| g.p == Some(p)).collect();
    match hits.first() {
        Some(g) => {
            let at = g.glues_at.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(",");
            chain.push(reason("glue", format!("v² = {} glues at {{{at}}}, residue at {p} is NS", g.v2), "glue to v"));
            Ok(Verdict { realized: Realized::Yes, regime: reg, reasons: chain, short: None })
        }
        None => {
            let r = reason("glue", format!("no v² glues Λ_G into NS(X_0,{p})"), "glue to v");
            Ok(no(reg, chain, r, "glue".into()))
        }
    }
}

/// Lattice-side verdict for entry e in characteristic p.
pub fn classify_entry(e: &ClassificationEntry, p: u64) -> Result<Verdict, ClassifyError> {
    if !is_prime(p) {
        return Err(ClassifyError::NotPrime(p));
    }
    let mut v = match e.rank_fixed {
        3 => classify_rank3(e, p)?,
        4 if !e.genus.abs_det().is_multiple_of(p as u128) => tame_conditions(e, p)?,
        _ => pipeline_verdict(e, &CharacteristicContext::new(p)?)?,
    };
    if v.realized == Realized::Yes {
        for g in e.containments_at(p) {
            v.reasons.push(reason("containment", format!("contained in {g} (data)"), "subgroup relation"));
        }
    }
    Ok(v)
}

/// classify_entry with the default prime bound enforced.
pub fn classify_bounded(e: &ClassificationEntry, p: u64, bound: u64) -> Result<Verdict, ClassifyError> {
    if p > bound {
        return Err(ClassifyError::AboveBound(p, bound));
    }
    classify_entry(e, p)
}

/// Verdicts for every entry and prime below the bound, ordered by (hm_id, p).
pub fn classify_all(entries: &[ClassificationEntry], bound: u64) -> Result<Vec<(HmId, u64, Verdict)>, ClassifyError> {
    let primes = primes_below(bound as usize);
    let mut sorted: Vec<&ClassificationEntry> = entries.iter().collect();
    sorted.sort_by_key(|e| e.hm_id);
    let mut out = Vec::new();
    for e in sorted {
        for &p in &primes {
            out.push((e.hm_id, p, classify_entry(e, p)?));
        }
    }
    Ok(out)
}

/// Answer for every characteristic: verdicts at the primes dividing
/// 2·det·|G| listed one by one, the rest by residue class of p.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CongruenceAnswer {
    pub modulus: u64,
    pub exceptional: Vec<(u64, Realized)>,
    pub yes_residues: BTreeSet<u64>,
    pub no_residues: BTreeSet<u64>,
    /// classes with no prime below the sampling bound
    pub unsampled: BTreeSet<u64>,
    /// classes whose sampled primes disagree
    pub mixed: BTreeSet<u64>,
}

impl fmt::Display for CongruenceAnswer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |s: &BTreeSet<u64>| s.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let ex: Vec<String> = self.exceptional.iter().map(|(p, r)| format!("{p}:{r}")).collect();
        write!(f, "at {}; otherwise yes iff p mod {} in {{{}}}", ex.join(" "), self.modulus, list(&self.yes_residues))?;
        if !self.unsampled.is_empty() {
            write!(f, "; unsampled {{{}}}", list(&self.unsampled))?;
        }
        if !self.mixed.is_empty() {
            write!(f, "; mixed {{{}}}", list(&self.mixed))?;
        }
        Ok(())
    }
}

/// Away from 2·det·|G| the criteria see p only through Legendre symbols of
/// divisors of 2·det and −1, so the verdict is a function of p mod
/// 8·rad(det). Each class is sampled by every prime below `bound`.
pub fn congruence_answer(e: &ClassificationEntry, bound: u64) -> Result<CongruenceAnswer, ClassifyError> {
    let det = e.genus.abs_det() as u64;
    let rad: u64 = crate::arith::factorize(det).iter().map(|&(q, _)| q).product();
    let modulus = 8 * rad;
    let mut special: BTreeSet<u64> = e.genus.primes().into_iter().collect();
    special.insert(2);
    if let Some(n) = e.group_order {
        special.extend(crate::arith::factorize(n).into_iter().map(|(q, _)| q));
    }
    let mut exceptional = Vec::new();
    for &p in &special {
        exceptional.push((p, classify_entry(e, p)?.realized));
    }
    let mut classes: BTreeMap<u64, BTreeSet<Realized>> = BTreeMap::new();
    for p in primes_below(bound as usize).into_iter().filter(|p| !special.contains(p)) {
        classes.entry(p % modulus).or_default().insert(classify_entry(e, p)?.realized);
    }
    let mut ans = CongruenceAnswer {
        modulus,
        exceptional,
        yes_residues: BTreeSet::new(),
        no_residues: BTreeSet::new(),
        unsampled: BTreeSet::new(),
        mixed: BTreeSet::new(),
    };
    for r in (1..modulus).filter(|r| num_integer::Integer::gcd(r, &modulus) == 1) {
        match classes.get(&r) {
            None => ans.unsampled.insert(r),
            Some(s) if s.len() > 1 => ans.mixed.insert(r),
            Some(s) if s.contains(&Realized::Yes) => ans.yes_residues.insert(r),
            Some(_) => ans.no_residues.insert(r),
        };
    }
    Ok(ans)
}

/// Machine line `hm_id<TAB>p<TAB>yes|no<TAB>reason-chain`.
pub fn verdict_line(id: HmId, p: u64, v: &Verdict) -> String {
    format!("{id}\t{p}\t{}\t{}", v.realized, v.chain())
}

/// 2, 3, 5 and 7 are all non-zero squares mod p.
pub fn mukai_holds(p: u64) -> bool {
    is_prime(p) && p > 7 && [2i128, 3, 5, 7].iter().all(|&a| legendre(a, p) == 1)
}

/// Residues mod 840 of the primes below `bound` satisfying mukai_holds;
/// panics if some residue class mixes both answers.
pub fn mukai_residues_up_to(bound: u64) -> BTreeSet<u64> {
    let mut classes: BTreeMap<u64, bool> = BTreeMap::new();
    for p in primes_below(bound as usize) {
        if p <= 7 {
            continue;
        }
        let h = mukai_holds(p);
        let prev = classes.insert(p % 840, h);
        assert!(prev.is_none_or(|x| x == h), "residue class {} is not constant", p % 840);
    }
    classes.into_iter().filter(|&(_, h)| h).map(|(r, _)| r).collect()
}

pub fn mukai_residues() -> BTreeSet<u64> {
    mukai_residues_up_to(20_000)
}
