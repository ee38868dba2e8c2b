use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use serde::Serialize;

use scg_core::constructions::{
    admissible_scalars, gamma_even, gamma_odd, check_xi_even, check_xi_odd, omega_generators,
    rank4_direct_search, rank5_from_scalars, Parity, ParityFilter, Provenance as ScalarProvenance,
    ScalarChoice,
};
use scg_core::group::StabilizerChain;
use scg_core::search::{
    construct, general_rank5_search, involution_tuple_search_in, ConstructOptions, SearchBudget,
    SearchMode, TupleSearchOptions,
};
use scg_core::sggi::{omega5_order, IntersectionMode, SCGRep, VerificationReport, VerifyOptions};
use scg_core::{Field, QuadraticForm, ScgError, SquareClass};

use crate::document::{FieldSpec, Provenance, RepDocument, SearchDocument, SearchResult, SCHEMA_VERSION};
use crate::{
    cache, exit, CliError, Command, ConstructArgs, InfoArgs, MethodArg, Outcome, ParityArg, SearchArgs,
    SearchModeArg, VerifyArgs, VerifyModeArg,
};

/// Largest group whose elements the tuple search enumerates.
const ELEMENT_CAP: u128 = 1_000_000;

const RANK_RESTRICTION: &str = "an involution string tuple of length >= 6 in O(5, q) with adjacent \
                                products of order > 2 violates the intersection property, so no \
                                representation of rank >= 6 exists";

pub fn dispatch(command: &Command, command_line: &[String]) -> Result<Outcome, CliError> {
    match command {
        Command::Construct(a) => cmd_construct(a, command_line),
        Command::Verify(a) => cmd_verify(a),
        Command::Search(a) => cmd_search(a, command_line),
        Command::Info(a) => cmd_info(a),
    }
}

fn field_of(q: u32) -> Result<Arc<Field>, CliError> {
    Field::with_order(q).map(Arc::new).map_err(|e| CliError::Parse(format!("--q {q}: {e}")))
}

fn emit(json: String, out: Option<&Path>, code: u8, note: String) -> Result<Outcome, CliError> {
    match out {
        Some(path) => {
            std::fs::write(path, json + "\n")?;
            Ok(Outcome { code, stdout: String::new(), stderr: note })
        }
        None => Ok(Outcome { code, stdout: json + "\n", stderr: note }),
    }
}

/// `Omega(5, q)` on the standard form, with a chain.
fn omega5(field: &Arc<Field>) -> Result<StabilizerChain, CliError> {
    let form = QuadraticForm::standard(field.clone(), 5)?;
    Ok(omega_generators(&form)?.1)
}

fn cmd_construct(a: &ConstructArgs, command_line: &[String]) -> Result<Outcome, CliError> {
    let field = field_of(a.q)?;
    let rank = a.rank as usize;
    if a.q == 3 {
        // no representation exists; certify the requested rank exhaustively
        let chain = omega5(&field)?;
        let args = SearchArgs {
            q: 3,
            rank,
            mode: SearchModeArg::Exhaustive,
            budget: None,
            max_candidates: 0,
            seed: a.seed,
            out: a.out.clone(),
        };
        return tuple_search(&field, &chain, &args, command_line);
    }
    let verify = VerifyOptions::default();
    if a.method == MethodArg::DirectRank4 {
        if rank != 4 {
            return Err(CliError::Parse("--method direct-rank4 needs --rank 4".into()));
        }
        let res = rank4_direct_search(&field, &verify, 1);
        let Some((alpha, beta, rep)) = res.found.into_iter().next() else {
            return Ok(Outcome {
                code: exit::FAILURE,
                stdout: String::new(),
                stderr: format!(
                    "no (alpha, beta) in the direct rank 4 family gives a representation at q = {} \
                     ({} pairs: {} denominator, {} quick, {} verification rejections)\n",
                    a.q, res.candidates, res.rejected_denominator, res.rejected_quick, res.rejected_verification
                ),
            });
        };
        let mut prov = Provenance::new(command_line, a.seed, "direct-rank4");
        prov.scalars =
            Some(ScalarChoice { xi: alpha, alpha: beta, parity: Parity::Odd, provenance: ScalarProvenance::DirectRank4 });
        let doc = RepDocument::from_rep(&rep, None, prov);
        let note = format!("rank 4, type {:?}, order {:?}\n", rep.schlafli(), rep.group_order());
        return emit(doc.to_json(), a.out.as_deref(), exit::SUCCESS, note);
    }
    let opts = ConstructOptions {
        rank,
        parity: match a.parity {
            ParityArg::Any => ParityFilter::None,
            ParityArg::Odd => ParityFilter::AllOdd,
        },
        verify,
        budget: SearchBudget { seed: a.seed, ..SearchBudget::default() },
        ..ConstructOptions::default()
    };
    let done = match construct(&field, &opts) {
        Ok(d) => d,
        Err(ScgError::NoScalarsFound { q }) => {
            return Ok(Outcome {
                code: exit::FAILURE,
                stdout: String::new(),
                stderr: format!("no rank {rank} representation found at q = {q}\n"),
            })
        }
        Err(e) => return Err(e.into()),
    };
    let method = if done.source.choice.is_some() { "scalar-sets" } else { "template-search" };
    let mut prov = Provenance::new(command_line, a.seed, method);
    prov.scalars = done.source.choice.clone();
    prov.diagonal = done.source.diagonal.clone();
    prov.reductions = done.reductions;
    if done.reductions > 0 {
        prov.source_schlafli = Some(done.source.rep.schlafli().to_vec());
    }
    let doc = RepDocument::from_rep(&done.rep, done.source.form.as_ref(), prov);
    let note = format!(
        "rank {rank}, type {:?}, order {}\n",
        done.rep.schlafli(),
        done.rep.group_order().unwrap_or_default()
    );
    emit(doc.to_json(), a.out.as_deref(), exit::SUCCESS, note)
}

#[derive(Serialize)]
struct VerifyOutput {
    report: Option<VerificationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    failure: Option<String>,
    stored_verdict: Option<bool>,
    matches_stored: Option<bool>,
    digest_ok: bool,
}

fn cmd_verify(a: &VerifyArgs) -> Result<Outcome, CliError> {
    let doc = RepDocument::load(&a.input)?;
    let (field, gens, form) = doc.rebuild()?;
    let digest_ok = doc.digest_ok();
    let stored_verdict = doc.report.as_ref().map(|r| r.verified);
    let mode = match a.mode {
        VerifyModeArg::Auto => IntersectionMode::Auto,
        VerifyModeArg::Enumerate => IntersectionMode::Enumerate,
        VerifyModeArg::Geometric => IntersectionMode::Geometric,
        VerifyModeArg::Both => IntersectionMode::Both,
    };
    if matches!(mode, IntersectionMode::Geometric | IntersectionMode::Both) && form.is_none() {
        return Err(CliError::Parse("geometric verification needs a form in the document".into()));
    }
    let mut opts = VerifyOptions { mode, ..VerifyOptions::default() };
    if mode == IntersectionMode::Enumerate {
        opts.enumerate_cap = 20_000_000;
    }
    let checked = SCGRep::new(field, gens).and_then(|rep| rep.verify(&opts, form.as_ref()));
    let (report, failure) = match checked {
        Ok(rep) => {
            let r = rep.report().cloned().expect("verified");
            let failure = r.failure.clone();
            (Some(r), failure)
        }
        Err(e @ (ScgError::NotInvolution { .. } | ScgError::DimMismatch { .. } | ScgError::NoGenerators)) => {
            (None, Some(e.to_string()))
        }
        Err(e) => return Err(e.into()),
    };
    let verified = report.as_ref().is_some_and(|r| r.verified);
    let out = VerifyOutput {
        matches_stored: stored_verdict.map(|s| s == verified),
        report,
        failure: failure.clone(),
        stored_verdict,
        digest_ok,
    };
    let mut note = String::new();
    if !digest_ok {
        note.push_str("warning: document digest does not match its contents\n");
    }
    match &failure {
        Some(f) => writeln!(note, "not verified: {f}").expect("string"),
        None => note.push_str("verified\n"),
    }
    let code = if verified { exit::SUCCESS } else { exit::FAILURE };
    emit(serde_json::to_string_pretty(&out).expect("serializable"), None, code, note)
}

fn cmd_search(a: &SearchArgs, command_line: &[String]) -> Result<Outcome, CliError> {
    let field = field_of(a.q)?;
    if a.rank < 2 {
        return Err(CliError::Parse("--rank must be at least 2".into()));
    }
    let mode = match a.mode {
        SearchModeArg::Exhaustive => "exhaustive",
        SearchModeArg::Sampled => "sampled",
    };
    let mut doc = SearchDocument {
        schema_version: SCHEMA_VERSION,
        field: FieldSpec::of(&field),
        rank: a.rank,
        mode: mode.into(),
        result: SearchResult::None,
        group_order: Some(omega5_order(a.q as u64)),
        found: Vec::new(),
        certificate: None,
        argument: None,
        candidates: 0,
        depth_counts: Vec::new(),
        provenance: Provenance::new(command_line, a.seed, "search"),
        digest: String::new(),
    };
    if a.rank >= 6 {
        doc.provenance.method = "rank-restriction".into();
        doc.argument = Some(RANK_RESTRICTION.into());
        doc.seal();
        let note = format!("no representation of rank {} (rank restriction)\n", a.rank);
        return emit(doc.to_json(), a.out.as_deref(), exit::EMPTY, note);
    }
    if a.rank == 5 && a.q >= 4 {
        let budget = SearchBudget { max_seconds: a.budget, seed: a.seed, ..SearchBudget::default() };
        let res = general_rank5_search(&field, 1, ParityFilter::None, &VerifyOptions::default(), &budget)?;
        doc.provenance.method = "template-search".into();
        doc.candidates = res.canonical;
        let code = match res.found.into_iter().next() {
            Some(c) => {
                let mut prov = Provenance::new(command_line, a.seed, "template-search");
                prov.diagonal = c.diagonal.clone();
                doc.found.push(RepDocument::from_rep(&c.rep, c.form.as_ref(), prov));
                doc.result = SearchResult::Found;
                exit::SUCCESS
            }
            None => {
                doc.result = SearchResult::Inconclusive;
                doc.argument = Some(if res.complete {
                    "no template diagonal works; other generating tuples were not searched".into()
                } else {
                    "budget exhausted".into()
                });
                exit::FAILURE
            }
        };
        doc.seal();
        let note = format!("{:?}\n", doc.result);
        return emit(doc.to_json(), a.out.as_deref(), code, note);
    }
    let chain = omega5(&field)?;
    tuple_search(&field, &chain, a, command_line)
}

fn tuple_search(
    field: &Arc<Field>,
    chain: &StabilizerChain,
    a: &SearchArgs,
    command_line: &[String],
) -> Result<Outcome, CliError> {
    if chain.order() > ELEMENT_CAP {
        return Err(ScgError::GroupTooLarge { order: chain.order(), cap: ELEMENT_CAP }.into());
    }
    let table = cache::element_table(chain, ELEMENT_CAP)?;
    let mode = match a.mode {
        SearchModeArg::Exhaustive => SearchMode::Exhaustive,
        SearchModeArg::Sampled => SearchMode::Sampled,
    };
    let opts = TupleSearchOptions {
        mode,
        budget: SearchBudget {
            max_candidates: a.max_candidates,
            max_seconds: a.budget,
            workers: None,
            seed: a.seed,
        },
        ..TupleSearchOptions::default()
    };
    let mut doc = SearchDocument {
        schema_version: SCHEMA_VERSION,
        field: FieldSpec::of(field),
        rank: a.rank,
        mode: if mode == SearchMode::Exhaustive { "exhaustive" } else { "sampled" }.into(),
        result: SearchResult::Inconclusive,
        group_order: Some(chain.order()),
        found: Vec::new(),
        certificate: None,
        argument: None,
        candidates: 0,
        depth_counts: Vec::new(),
        provenance: Provenance::new(command_line, a.seed, "involution-tuple-search"),
        digest: String::new(),
    };
    let code = match involution_tuple_search_in(chain, &table, a.rank, &opts) {
        Ok(out) => {
            doc.candidates = out.candidates;
            doc.depth_counts = out.depth_counts;
            for rep in &out.found {
                let prov = Provenance::new(command_line, a.seed, "involution-tuple-search");
                doc.found.push(RepDocument::from_rep(rep, None, prov));
            }
            if !doc.found.is_empty() {
                doc.result = SearchResult::Found;
                exit::SUCCESS
            } else {
                doc.argument = out.certificate.as_ref().map(|c| c.argument.clone());
                doc.certificate = out.certificate;
                doc.result = SearchResult::None;
                exit::EMPTY
            }
        }
        Err(ScgError::BudgetExhausted) => {
            doc.argument = Some("budget exhausted".into());
            exit::FAILURE
        }
        Err(e) => return Err(e.into()),
    };
    doc.seal();
    let note = format!("{:?}: rank {} over a group of order {}\n", doc.result, a.rank, chain.order());
    emit(doc.to_json(), a.out.as_deref(), code, note)
}

fn class_name(c: SquareClass) -> &'static str {
    match c {
        SquareClass::Square => "square",
        SquareClass::NonSquare => "non-square",
        SquareClass::EvenChar => "trivial (q even)",
    }
}

fn cmd_info(a: &InfoArgs) -> Result<Outcome, CliError> {
    let field = field_of(a.q)?;
    let f = &*field;
    let q = a.q;
    let mut s = String::new();
    let w = &mut s;
    writeln!(w, "q = {q} (p = {}, e = {})", f.characteristic(), f.degree()).expect("string");
    writeln!(w, "|PSp(4, q)| = |Omega(5, q)| = {}", omega5_order(q as u64)).expect("string");
    if q == 3 {
        writeln!(w, "rk = ∅ (no string C-group representation of any rank)").expect("string");
    } else if q < 3 {
        writeln!(w, "q < 3 is outside the covered range").expect("string");
    }
    let (lo, hi) = if f.is_even() { (q - 1, q + 1) } else { ((q - 1) / 2, (q + 1) / 2) };
    if q >= 4 {
        writeln!(w, "rank 5 Schläfli entries (scalar sets): p in {{{lo}, {hi}}}").expect("string");
    }
    let theta = if f.is_even() {
        SquareClass::EvenChar
    } else {
        QuadraticForm::standard(field.clone(), 5)?.theta_minus_identity()?
    };
    writeln!(w, "theta(-1), standard form: {}", class_name(theta)).expect("string");
    if q >= 4 {
        writeln!(w, "xi  |Gamma(xi)|").expect("string");
        let mut nonempty = 0;
        let mut valid = 0;
        for xi in f.nonzero_elements() {
            let ok = if f.is_even() { check_xi_even(f, xi) } else { check_xi_odd(f, xi) };
            if ok.is_err() {
                continue;
            }
            valid += 1;
            let n = if f.is_even() { gamma_even(f, xi)?.len() } else { gamma_odd(f, xi)?.len() };
            nonempty += usize::from(n > 0);
            writeln!(w, "{:<3} {n}", xi.value()).expect("string");
        }
        writeln!(w, "valid xi: {valid} of {}; with nonempty Gamma: {nonempty}", q - 1).expect("string");
        let adm = admissible_scalars(f, ParityFilter::None);
        if let Some(&(xi, s0)) = adm.first() {
            let (form, _, _) = rank5_from_scalars(&field, xi, s0)?;
            let t = if f.is_even() { SquareClass::EvenChar } else { form.theta_minus_identity()? };
            writeln!(w, "theta(-1), template form for xi = {}: {}", xi.value(), class_name(t)).expect("string");
            writeln!(w, "rank 5 route: scalar sets ({} admissible pairs)", adm.len()).expect("string");
        } else {
            writeln!(w, "rank 5 route: template search (scalar sets empty)").expect("string");
        }
    }
    Ok(Outcome { code: exit::SUCCESS, stdout: s, stderr: String::new() })
}
