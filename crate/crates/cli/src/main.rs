use std::collections::BTreeSet;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use genusforge::arith::is_prime;
use genusforge::classify::{
    self, classify_bounded, congruence_answer, default_entries, find_entry, load_entries, mukai_holds,
    mukai_residues_up_to, reproduce_table, reproduce_table_with, validate_entries, verdict_line,
    ClassificationEntry, HmId, DEFAULT_PRIME_BOUND,
};
use genusforge::criteria::{
    self, constituent_criterion, determinant_condition, legendre_orbit_condition, length_criterion,
    rank3_char2_workflow, rank3_glue_profile, rank3_glue_search, symbols_for_form, tame_conditions,
    wild_rank4_reasons, Check, Verdict,
};
use genusforge::discform::{
    all_complements, anti_isometric, embeddings, enumerate_gluings, from_genus, glue, isometric,
    orthogonal_complement, witt_complement, FiniteQuadraticForm,
};
use genusforge::genus::{canonicalize_2adic, parse_symbol, print_symbol, symbol_from_gram, GenusSymbol};
use genusforge::lattice::{determinant, discriminant_form, signature, smith_normal_form, GramMatrix};
use serde_json::{json, Value};

mod ops;

#[derive(Parser)]
#[command(name = "genusforge", version, about = "Genus symbols, discriminant forms and lattice-side verdicts")]
struct Cli {
    /// One JSON object per output line
    #[arg(long, global = true)]
    json: bool,
    /// Entries file replacing the GENUSFORGE_DATA lookup (added to the embedded corpus)
    #[arg(long, global = true, value_name = "PATH")]
    data: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Genus symbols
    #[command(subcommand)]
    Genus(GenusCmd),
    /// Finite quadratic forms
    #[command(subcommand)]
    Disc(DiscCmd),
    /// Integral lattices given by Gram matrix or name
    #[command(subcommand)]
    Lattice(LatticeCmd),
    /// Single criteria on a corpus entry
    #[command(subcommand)]
    Criteria(CriteriaCmd),
    /// Verdicts and table reproduction
    #[command(subcommand)]
    Classify(ClassifyCmd),
    /// The quadratic residue condition on 2, 3, 5, 7
    #[command(subcommand)]
    Mukai(MukaiCmd),
    /// Entry files
    #[command(subcommand)]
    Data(DataCmd),
    /// List library operations with a sample invocation each
    Ops,
}

#[derive(Subcommand)]
enum GenusCmd {
    /// Parse and describe a symbol
    Parse { symbol: String },
    /// Print a symbol in normalized ASCII spelling
    Print { symbol: String },
    /// Symbol of the negated lattice
    Negate { symbol: String },
    /// Canonical 2-adic spelling
    Canon { symbol: String },
    /// p-excess, or the oddity at p = 2
    Excess {
        symbol: String,
        #[arg(long = "p")]
        p: u64,
    },
    /// Global existence of the genus
    Exists {
        symbol: String,
        #[command(flatten)]
        sig: SigArgs,
    },
    /// Symbol of a Gram matrix or named lattice
    FromGram { lattice: String },
}

#[derive(Args)]
struct SigArgs {
    /// Signature "plus,minus" for a symbol written without one
    #[arg(long, value_name = "PLUS,MINUS")]
    signature: Option<String>,
    /// Odd lattice (with --signature)
    #[arg(long)]
    odd: bool,
}

#[derive(Subcommand)]
enum DiscCmd {
    /// Gluings of A and B along subgroups whose B-side is a p-group
    Glue {
        a: String,
        b: String,
        #[arg(long = "p")]
        p: u64,
    },
    /// Complement of a u(2)/v(2) sum Q inside A
    Witt { a: String, q: String },
    /// Embeddings of Q into A and their complements
    Embed {
        q: String,
        a: String,
        /// Stop after this many embeddings
        #[arg(long, default_value_t = 64)]
        limit: usize,
    },
    /// Isometry test
    Iso {
        a: String,
        b: String,
        /// Test A against -B
        #[arg(long)]
        anti: bool,
    },
}

#[derive(Subcommand)]
enum LatticeCmd {
    Det { lattice: String },
    Sig { lattice: String },
    /// Smith normal form of an integer matrix
    Snf { matrix: String },
    /// Discriminant form
    Disc { lattice: String },
    /// Orthogonal sum
    Sum { a: String, b: String },
    /// Multiply the form by k
    Rescale {
        lattice: String,
        #[arg(long, allow_hyphen_values = true)]
        k: i64,
    },
}

#[derive(Subcommand)]
enum CriteriaCmd {
    /// Primes forced by p-length
    Length { hm: String },
    Constituent {
        hm: String,
        #[arg(long = "p")]
        p: u64,
    },
    /// Determinant condition at q in characteristic p
    Det {
        hm: String,
        #[arg(long = "p")]
        p: u64,
        #[arg(long = "q")]
        q: u64,
    },
    Tame {
        hm: String,
        #[arg(long = "p")]
        p: u64,
    },
    /// Orbit-length Legendre condition
    Legendre {
        #[arg(long, value_delimiter = ',')]
        orbits: Vec<u32>,
        #[arg(long = "p")]
        p: u64,
    },
    /// Rank-3 glue to a vector; every admissible v^2 without --v2
    Glue {
        hm: String,
        #[arg(long)]
        v2: Option<u64>,
    },
    /// Rank-3 workflow at p = 2
    Char2 { hm: String },
    /// Gluing pipeline with star tags
    Wild {
        hm: String,
        #[arg(long = "p")]
        p: u64,
    },
}

#[derive(Subcommand)]
enum ClassifyCmd {
    /// Verdict for one entry
    Entry {
        hm: String,
        #[arg(long = "p", required_unless_present = "congruence")]
        p: Option<u64>,
        /// Answer for every characteristic by residue class
        #[arg(long, conflicts_with = "p")]
        congruence: bool,
        #[arg(long, default_value_t = DEFAULT_PRIME_BOUND)]
        bound: u64,
        /// Primes below this sample each residue class (with --congruence)
        #[arg(long, default_value_t = 5000)]
        sample: u64,
    },
    /// Diff a golden table against recomputed verdicts
    Table { id: u32 },
    /// Every entry at every prime below the bound
    All {
        #[arg(long, default_value_t = DEFAULT_PRIME_BOUND)]
        bound: u64,
    },
}

#[derive(Subcommand)]
enum MukaiCmd {
    Holds { p: u64 },
    /// Residues mod 840 where the condition holds
    Residues {
        #[arg(long, default_value_t = 20_000)]
        bound: u64,
    },
}

#[derive(Subcommand)]
enum DataCmd {
    /// Load entries (the default corpus without a path)
    Load { path: Option<PathBuf> },
    /// Check schema invariants
    Validate { path: Option<PathBuf> },
}

enum Failure {
    Usage(String),
    Mismatch,
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Res<T> = Result<T, Failure>;

/// Collected output; text lines or JSON records.
struct Out {
    json: bool,
    lines: Vec<String>,
}

impl Out {
    fn emit(&mut self, text: String, record: Value) {
        let line = if self.json { record.to_string() } else { text };
        self.lines.push(ascii(&line));
    }
}

fn ascii(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        let rep = match ch {
            c if c.is_ascii() => {
                out.push(c);
                continue;
            }
            '\u{2212}' => "-",
            '\u{2032}' => "'",
            '\u{b2}' => "^2",
            '\u{b3}' => "^3",
            '\u{b9}' => "^1",
            '\u{2224}' => "does not divide",
            '\u{2247}' | '\u{2249}' => "not isometric to",
            '\u{2245}' => "isometric to",
            '\u{21aa}' => "embeds in",
            '\u{2265}' => ">=",
            '\u{2264}' => "<=",
            '\u{27e8}' => "<",
            '\u{27e9}' => ">",
            '\u{2295}' => "+",
            '\u{22a5}' => "perp",
            '\u{39b}' => "Lambda",
            '\u{393}' => "Gamma",
            '\u{3a0}' => "prod ",
            '\u{3b5}' => "eps",
            '\u{3c3}' => "sigma",
            c @ '\u{2080}'..='\u{2089}' => {
                out.push('_');
                out.push(char::from(b'0' + (c as u32 - 0x2080) as u8));
                continue;
            }
            c => {
                out.push_str(&format!("<U+{:04X}>", c as u32));
                continue;
            }
        };
        out.push_str(rep);
    }
    out
}

// ---- input parsing

fn parse_matrix(text: &str) -> Res<Vec<Vec<i64>>> {
    let rows: Vec<Vec<i64>> = text
        .split(';')
        .map(|r| r.split(',').map(|x| x.trim().parse::<i64>()).collect::<Result<Vec<_>, _>>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::Usage(format!("bad matrix {text:?}; write rows as 2,1;1,2")))?;
    if rows.is_empty() || rows.iter().any(|r| r.len() != rows[0].len()) {
        return Err(Failure::Usage(format!("ragged matrix {text:?}")));
    }
    Ok(rows)
}

/// Gram matrix "a,b;c,d", or a name: U, U(k), <m>, An, Dn, En (negative
/// definite; a trailing '+' gives the positive definite one).
fn parse_lattice(text: &str) -> Res<GramMatrix> {
    let t = text.trim();
    if t.contains(',') || t.contains(';') || t.parse::<i64>().is_ok() {
        let rows = parse_matrix(t)?;
        return GramMatrix::new_odd(rows).map_err(Failure::from);
    }
    let bad = || Failure::Usage(format!("unknown lattice {text:?}"));
    if t == "U" {
        return Ok(GramMatrix::hyperbolic());
    }
    if let Some(k) = t.strip_prefix("U(").and_then(|r| r.strip_suffix(')')) {
        let k: i64 = k.parse().map_err(|_| bad())?;
        return GramMatrix::hyperbolic().rescale(k).map_err(Failure::from);
    }
    if let Some(m) = t.strip_prefix('<').and_then(|r| r.strip_suffix('>')) {
        let m: i64 = m.parse().map_err(|_| bad())?;
        return GramMatrix::rank_one(m).map_err(Failure::from);
    }
    let (body, positive) = match t.strip_suffix('+') {
        Some(b) => (b, true),
        None => (t, false),
    };
    let mut cs = body.chars();
    let kind = cs.next().ok_or_else(bad)?;
    let n: usize = cs.as_str().parse().map_err(|_| bad())?;
    match (kind, n) {
        ('A', 1..=30) => Ok(GramMatrix::a_n(n, positive)),
        ('D', 4..=30) => Ok(GramMatrix::d_n(n, positive)),
        ('E', 6..=8) => Ok(GramMatrix::e_n(n, positive)),
        _ => Err(bad()),
    }
}

/// Parsed and respelled per 2-adic compartment; illegal constituents fail.
fn parse_genus(text: &str) -> Res<GenusSymbol> {
    parse_symbol(text)
        .and_then(|s| s.respell_compartments())
        .and_then(|s| s.check_constituents().map(|_| s))
        .map_err(|e| Failure::Usage(format!("cannot parse symbol {text:?}: {e}")))
}

/// A lattice (its discriminant form) or a genus symbol.
fn parse_form(text: &str) -> Res<FiniteQuadraticForm> {
    match parse_lattice(text) {
        Ok(g) => Ok(discriminant_form(&g)?),
        Err(_) => Ok(from_genus(&parse_genus(text)?)?),
    }
}

fn parse_signature(s: &str) -> Res<(u32, u32)> {
    let bad = || Failure::Usage(format!("bad signature {s:?}; write plus,minus"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

fn need_prime(p: u64) -> Res<u64> {
    if is_prime(p) {
        Ok(p)
    } else {
        Err(Failure::Usage(format!("{p} is not prime")))
    }
}

// ---- rendering

fn set_text<T: std::fmt::Display>(s: impl IntoIterator<Item = T>) -> String {
    let v: Vec<String> = s.into_iter().map(|x| x.to_string()).collect();
    format!("{{{}}}", v.join(","))
}

/// Nonunimodular symbol spelling of a form, or its generator orders and
/// Gram matrix when no spelling is found.
fn form_text(f: &FiniteQuadraticForm) -> String {
    if f.is_trivial() {
        return "trivial".into();
    }
    let mut parts = Vec::new();
    for p in f.primes() {
        match symbols_for_form(f, p) {
            Ok(c) if !c.is_empty() => parts.extend(c[0].iter().map(|x| x.to_string())),
            _ => return raw_form(f),
        }
    }
    parts.join(" ")
}

fn raw_form(f: &FiniteQuadraticForm) -> String {
    let rows: Vec<String> = f
        .gram()
        .iter()
        .map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
        .collect();
    format!("orders {} gram {}", set_text(f.orders()), rows.join(";"))
}

fn form_json(f: &FiniteQuadraticForm) -> Value {
    json!({
        "symbol": form_text(f),
        "order": f.order(),
        "invariant_factors": f.invariant_factors(),
    })
}

fn check_json(c: &Check) -> Value {
    let status = match c {
        Check::Pass(_) => "pass",
        Check::Fail(_) => "fail",
        Check::NotApplicable(_) => "n/a",
    };
    json!({ "status": status, "detail": c.text() })
}

fn verdict_json(v: &Verdict) -> Value {
    let reasons: Vec<Value> =
        v.reasons.iter().map(|r| json!({ "id": r.id, "text": r.text, "anchor": r.anchor })).collect();
    json!({
        "realized": v.realized.to_string(),
        "regime": v.regime.to_string(),
        "short": v.short,
        "reasons": reasons,
    })
}

fn verdict_text(v: &Verdict) -> String {
    let mut s = v.realized.to_string();
    if let Some(t) = &v.short {
        s.push_str(&format!(" [{t}]"));
    }
    if !v.reasons.is_empty() {
        s.push_str(&format!(": {}", v.chain()));
    }
    s
}

fn entry_json(e: &ClassificationEntry) -> Value {
    json!({
        "hm": e.hm_id.to_string(),
        "group": e.group_name,
        "order": e.group_order,
        "rank_fixed": e.rank_fixed,
        "genus": print_symbol(&e.genus),
        "orbits": e.orbit_lengths,
        "contained_in": e.contained_in,
    })
}

// ---- commands

struct Ctx {
    data: Option<PathBuf>,
}

impl Ctx {
    fn entries(&self) -> Res<Vec<ClassificationEntry>> {
        match &self.data {
            Some(p) => {
                let mut v = classify::embedded_entries();
                v.extend(load_entries(p)?);
                Ok(v)
            }
            None => Ok(default_entries()?),
        }
    }

    fn entry(&self, hm: &str) -> Res<ClassificationEntry> {
        Ok(find_entry(&self.entries()?, hm)?.clone())
    }
}

fn genus_cmd(cmd: GenusCmd, out: &mut Out) -> Res<()> {
    match cmd {
        GenusCmd::Parse { symbol } => {
            let s = parse_genus(&symbol)?;
            let lengths: Vec<(u64, u32)> = s.primes().into_iter().map(|p| (p, s.p_length(p))).collect();
            let ltext: Vec<String> = lengths.iter().map(|(p, l)| format!("l_{p}={l}")).collect();
            let rank = s.rank().map_or("-".into(), |r| r.to_string());
            out.emit(
                format!("{}\trank {rank}\tdet {}\t{}", print_symbol(&s), s.abs_det(), ltext.join(" ")),
                json!({
                    "symbol": print_symbol(&s),
                    "rank": s.rank(),
                    "signature": s.signature,
                    "even": s.even,
                    "abs_det": s.abs_det().to_string(),
                    "p_lengths": lengths,
                }),
            );
        }
        GenusCmd::Print { symbol } => {
            let s = print_symbol(&parse_genus(&symbol)?);
            out.emit(s.clone(), json!({ "symbol": s }));
        }
        GenusCmd::Negate { symbol } => {
            let s = print_symbol(&parse_genus(&symbol)?.negate());
            out.emit(s.clone(), json!({ "symbol": s }));
        }
        GenusCmd::Canon { symbol } => {
            let s = parse_genus(&symbol)?;
            let c = print_symbol(&canonicalize_2adic(&s)?);
            out.emit(c.clone(), json!({ "symbol": c }));
        }
        GenusCmd::Excess { symbol, p } => {
            let p = need_prime(p)?;
            let s = parse_genus(&symbol)?;
            let (name, v) = if p == 2 { ("oddity", s.oddity()) } else { ("excess", s.p_excess(p)) };
            out.emit(v.to_string(), json!({ "p": p, name: v }));
        }
        GenusCmd::Exists { symbol, sig } => {
            let mut s = parse_genus(&symbol)?;
            if let Some(t) = &sig.signature {
                let (a, b) = parse_signature(t)?;
                s = s.with_signature(a, b, !sig.odd)?;
            }
            let ex = s.exists()?;
            let word = if ex.exists { "yes" } else { "no" };
            out.emit(format!("{word}: {}", ex.reason), json!({ "exists": ex.exists, "reason": ex.reason }));
        }
        GenusCmd::FromGram { lattice } => {
            let s = print_symbol(&symbol_from_gram(&parse_lattice(&lattice)?));
            out.emit(s.clone(), json!({ "symbol": s }));
        }
    }
    Ok(())
}

fn disc_cmd(cmd: DiscCmd, out: &mut Out) -> Res<()> {
    match cmd {
        DiscCmd::Glue { a, b, p } => {
            let p = need_prime(p)?;
            let (fa, fb) = (parse_form(&a)?, parse_form(&b)?);
            for (i, d) in enumerate_gluings(&fa, &fb, p)?.iter().enumerate() {
                let g = glue(d)?;
                out.emit(
                    format!("{i}\t|Gamma|={}\t{}", d.order(), form_text(&g)),
                    json!({ "index": i, "glue_order": d.order(), "graph": d.graph, "result": form_json(&g) }),
                );
            }
        }
        DiscCmd::Witt { a, q } => {
            let c = witt_complement(&parse_form(&a)?, &parse_form(&q)?)?;
            out.emit(form_text(&c), json!({ "complement": form_json(&c) }));
        }
        DiscCmd::Embed { q, a, limit } => {
            let (fq, fa) = (parse_form(&q)?, parse_form(&a)?);
            let embs = embeddings(&fq, &fa)?;
            let mut seen = BTreeSet::new();
            for (i, e) in embs.iter().take(limit).enumerate() {
                let c = orthogonal_complement(&e.images, &fa)?;
                seen.insert(fa.subgroup_elements(&e.images));
                out.emit(
                    format!("{i}\t{:?}\tcomplement {}", e.images, form_text(&c)),
                    json!({ "index": i, "images": e.images, "complement": form_json(&c) }),
                );
            }
            let distinct = all_complements(&fa, &fq)?;
            let agree = distinct.windows(2).map(|w| isometric(&w[0], &w[1])).collect::<Result<Vec<_>, _>>()?;
            let agree = agree.into_iter().all(|x| x);
            out.emit(
                format!("embeddings {}\timages {}\tcomplements agree {}", embs.len(), distinct.len(), agree),
                json!({ "embeddings": embs.len(), "images": distinct.len(), "complements_agree": agree }),
            );
        }
        DiscCmd::Iso { a, b, anti } => {
            let (fa, fb) = (parse_form(&a)?, parse_form(&b)?);
            let r = if anti { anti_isometric(&fa, &fb)? } else { isometric(&fa, &fb)? };
            out.emit(if r { "yes" } else { "no" }.into(), json!({ "isometric": r, "anti": anti }));
        }
    }
    Ok(())
}

fn lattice_cmd(cmd: LatticeCmd, out: &mut Out) -> Res<()> {
    let gram_json = |g: &GramMatrix| json!(g.entries());
    let gram_text = |g: &GramMatrix| {
        g.entries().iter().map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")).collect::<Vec<_>>().join(";")
    };
    match cmd {
        LatticeCmd::Det { lattice } => {
            let d = determinant(&parse_lattice(&lattice)?).to_string();
            out.emit(d.clone(), json!({ "det": d }));
        }
        LatticeCmd::Sig { lattice } => {
            let (a, b) = signature(&parse_lattice(&lattice)?)?;
            out.emit(format!("({a},{b})"), json!({ "plus": a, "minus": b }));
        }
        LatticeCmd::Snf { matrix } => {
            let m: Vec<Vec<_>> = parse_matrix(&matrix)?.into_iter().map(|r| r.into_iter().map(Into::into).collect()).collect();
            let d: Vec<String> = smith_normal_form(&m).diagonal().iter().map(|x| x.to_string()).collect();
            out.emit(d.join(" "), json!({ "diagonal": d }));
        }
        LatticeCmd::Disc { lattice } => {
            let f = discriminant_form(&parse_lattice(&lattice)?)?;
            out.emit(format!("{}\t{}", form_text(&f), raw_form(&f)), form_json(&f));
        }
        LatticeCmd::Sum { a, b } => {
            let g = parse_lattice(&a)?.direct_sum(&parse_lattice(&b)?);
            out.emit(gram_text(&g), json!({ "gram": gram_json(&g) }));
        }
        LatticeCmd::Rescale { lattice, k } => {
            let g = parse_lattice(&lattice)?.rescale(k)?;
            out.emit(gram_text(&g), json!({ "gram": gram_json(&g) }));
        }
    }
    Ok(())
}

fn criteria_cmd(cmd: CriteriaCmd, ctx: &Ctx, out: &mut Out) -> Res<()> {
    let check = |out: &mut Out, c: Check| out.emit(c.to_string(), check_json(&c));
    match cmd {
        CriteriaCmd::Length { hm } => {
            let s = length_criterion(&ctx.entry(&hm)?);
            out.emit(set_text(&s), json!({ "primes": s }));
        }
        CriteriaCmd::Constituent { hm, p } => check(out, constituent_criterion(&ctx.entry(&hm)?, need_prime(p)?)),
        CriteriaCmd::Det { hm, p, q } => check(out, determinant_condition(&ctx.entry(&hm)?, need_prime(p)?, need_prime(q)?)?),
        CriteriaCmd::Tame { hm, p } => {
            let v = tame_conditions(&ctx.entry(&hm)?, need_prime(p)?)?;
            out.emit(verdict_text(&v), verdict_json(&v));
        }
        CriteriaCmd::Legendre { orbits, p } => {
            if orbits.is_empty() {
                return Err(Failure::Usage("--orbits needs at least one length".into()));
            }
            check(out, legendre_orbit_condition(&orbits, need_prime(p)?))
        }
        CriteriaCmd::Glue { hm, v2 } => {
            let e = ctx.entry(&hm)?;
            let profiles = match v2 {
                Some(v) => vec![rank3_glue_profile(&e, v)?],
                None => rank3_glue_search(&e)?,
            };
            for g in profiles {
                let p = g.p.map_or("-".into(), |p| p.to_string());
                out.emit(
                    format!("v2={} glues={} p={p}", g.v2, set_text(&g.glues_at)),
                    json!({ "v2": g.v2, "glues_at": g.glues_at, "p": g.p }),
                );
            }
        }
        CriteriaCmd::Char2 { hm } => {
            let o = rank3_char2_workflow(&ctx.entry(&hm)?)?;
            let lp = o.l_prime.as_ref().map(form_text);
            out.emit(
                format!("L'={} v2={} {}", lp.clone().unwrap_or("-".into()), o.v2.map_or("-".into(), |v| v.to_string()), verdict_text(&o.verdict)),
                json!({ "l_prime": lp, "v2": o.v2, "verdict": verdict_json(&o.verdict) }),
            );
        }
        CriteriaCmd::Wild { hm, p } => {
            let e = ctx.entry(&hm)?;
            let p = need_prime(p)?;
            let cc = criteria::CharacteristicContext::new(p)?;
            for o in criteria::lattice_pipeline(&e, &cc)? {
                let fate = match (&o.complement, &o.failure) {
                    (Some(s), _) => format!("complement {}", print_symbol(s)),
                    (None, Some(f)) => f.clone(),
                    (None, None) => "-".into(),
                };
                out.emit(
                    format!("|Gamma|={}\tL'={}\t{fate}", o.glue_order, form_text(&o.l_prime)),
                    json!({
                        "glue_order": o.glue_order,
                        "l_prime": form_json(&o.l_prime),
                        "complement": o.complement.as_ref().map(print_symbol),
                        "failure": o.failure,
                    }),
                );
            }
            let v = wild_rank4_reasons(&e, p)?;
            out.emit(verdict_text(&v), verdict_json(&v));
        }
    }
    Ok(())
}

type Row = (HmId, u64, Verdict);

fn classify_all_parallel(entries: &[ClassificationEntry], bound: u64) -> Res<Vec<Row>> {
    let mut sorted: Vec<&ClassificationEntry> = entries.iter().collect();
    sorted.sort_by_key(|e| e.hm_id);
    let primes = genusforge::arith::primes_below(bound as usize);
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get()).min(sorted.len().max(1));
    let chunk = sorted.len().div_ceil(threads.max(1)).max(1);
    let parts: Vec<Result<Vec<Row>, classify::ClassifyError>> = std::thread::scope(|s| {
        let handles: Vec<_> = sorted
            .chunks(chunk)
            .map(|part| {
                let primes = &primes;
                s.spawn(move || {
                    let mut v = Vec::new();
                    for e in part {
                        for &p in primes {
                            v.push((e.hm_id, p, classify::classify_entry(e, p)?));
                        }
                    }
                    Ok(v)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut out = Vec::new();
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

fn classify_cmd(cmd: ClassifyCmd, ctx: &Ctx, out: &mut Out) -> Res<()> {
    match cmd {
        ClassifyCmd::Entry { hm, p, congruence, bound, sample } => {
            let e = ctx.entry(&hm)?;
            if congruence {
                let a = congruence_answer(&e, sample)?;
                let ex: Vec<Value> = a.exceptional.iter().map(|(p, r)| json!({ "p": p, "realized": r.to_string() })).collect();
                out.emit(
                    format!("{}\t{a}", e.hm_id),
                    json!({
                        "hm": e.hm_id.to_string(),
                        "modulus": a.modulus,
                        "exceptional": ex,
                        "yes_residues": a.yes_residues,
                        "no_residues": a.no_residues,
                        "unsampled": a.unsampled,
                        "mixed": a.mixed,
                    }),
                );
                return Ok(());
            }
            let p = p.expect("clap enforces --p");
            let v = classify_bounded(&e, need_prime(p)?, bound)?;
            out.emit(
                verdict_line(e.hm_id, p, &v),
                json!({ "hm": e.hm_id.to_string(), "p": p, "verdict": verdict_json(&v) }),
            );
        }
        ClassifyCmd::Table { id } => {
            let diff = match &ctx.data {
                Some(_) => reproduce_table_with(id, &ctx.entries()?)?,
                None => {
                    if std::env::var(classify::DATA_ENV).is_ok() {
                        reproduce_table_with(id, &ctx.entries()?)?
                    } else {
                        reproduce_table(id)?
                    }
                }
            };
            for r in &diff.rows {
                let flag = if r.matched { "ok" } else { "MISMATCH" };
                out.emit(
                    format!("{}\t{}\t{flag}\texpected: {}\tcomputed: {}", id, r.entry, r.expected, r.computed),
                    json!({ "table": id, "entry": r.entry, "matched": r.matched, "expected": r.expected, "computed": r.computed }),
                );
            }
            if !diff.all_match() {
                return Err(Failure::Mismatch);
            }
        }
        ClassifyCmd::All { bound } => {
            for (id, p, v) in classify_all_parallel(&ctx.entries()?, bound)? {
                out.emit(
                    verdict_line(id, p, &v),
                    json!({ "hm": id.to_string(), "p": p, "realized": v.realized.to_string(), "short": v.short, "chain": v.chain() }),
                );
            }
        }
    }
    Ok(())
}

fn mukai_cmd(cmd: MukaiCmd, out: &mut Out) -> Res<()> {
    match cmd {
        MukaiCmd::Holds { p } => {
            let h = mukai_holds(p);
            out.emit(if h { "yes" } else { "no" }.into(), json!({ "p": p, "holds": h }));
        }
        MukaiCmd::Residues { bound } => {
            let r = mukai_residues_up_to(bound);
            out.emit(r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "), json!({ "modulus": 840, "residues": r }));
        }
    }
    Ok(())
}

fn data_cmd(cmd: DataCmd, ctx: &Ctx, out: &mut Out) -> Res<()> {
    let load = |path: Option<PathBuf>| -> Res<Vec<ClassificationEntry>> {
        match path {
            Some(p) => Ok(load_entries(&p)?),
            None => ctx.entries(),
        }
    };
    match cmd {
        DataCmd::Load { path } => {
            for e in load(path)? {
                let order = e.group_order.map_or("-".into(), |n| n.to_string());
                out.emit(
                    format!("{}\t{}\t{order}\t{}\t{}", e.hm_id, e.group_name, e.rank_fixed, print_symbol(&e.genus)),
                    entry_json(&e),
                );
            }
        }
        DataCmd::Validate { path } => {
            let r = validate_entries(&load(path)?);
            for (id, v) in &r.violations {
                out.emit(format!("{id}\t{v}"), json!({ "hm": id.to_string(), "violation": v }));
            }
            out.emit(
                format!("checked {} entries, {} violations", r.checked, r.violations.len()),
                json!({ "checked": r.checked, "violations": r.violations.len() }),
            );
            if !r.is_clean() {
                return Err(Failure::Mismatch);
            }
        }
    }
    Ok(())
}

fn run(cli: Cli, out: &mut Out) -> Res<()> {
    let ctx = Ctx { data: cli.data };
    match cli.cmd {
        Cmd::Genus(c) => genus_cmd(c, out),
        Cmd::Disc(c) => disc_cmd(c, out),
        Cmd::Lattice(c) => lattice_cmd(c, out),
        Cmd::Criteria(c) => criteria_cmd(c, &ctx, out),
        Cmd::Classify(c) => classify_cmd(c, &ctx, out),
        Cmd::Mukai(c) => mukai_cmd(c, out),
        Cmd::Data(c) => data_cmd(c, &ctx, out),
        Cmd::Ops => {
            for (op, argv) in ops::OPS {
                out.emit(format!("{op}\t{}", argv.join(" ")), json!({ "op": op, "argv": argv }));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = Out { json: cli.json, lines: Vec::new() };
    let res = run(cli, &mut out);
    let mut stdout = std::io::stdout().lock();
    for l in &out.lines {
        // a closed pipe is not an error of ours
        if writeln!(stdout, "{l}").is_err() {
            break;
        }
    }
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Mismatch) => ExitCode::from(1),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {}", ascii(&m));
            ExitCode::from(2)
        }
    }
}
