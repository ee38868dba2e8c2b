//! Search harnesses: scalar sweeps, the general rank 5 template search,
//! involution-tuple searches with conjugacy pruning, and rank 6 sampling.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::constructions::{
    build_rank5, check_xi_even, check_xi_odd, gamma_even, gamma_odd, phi_string,
    predicted_schlafli, rank5_from_scalars, rank5_sweep, template_generators, Construction,
    ParityFilter, Rank5Options,
};
use crate::error::{Result, ScgError};
use crate::ffield::{Field, FieldElement, SquareClass};
use crate::group::{intersect_small, intersection_is_subgroup, GeneratedGroup, StabilizerChain};
use crate::matlin::{eigenspace, fixed_space, Matrix, Subspace, Vector};
use crate::quadspace::QuadraticForm;
use crate::sggi::{omega5_order, rank_reduce, string_violation, SCGRep, VerifyOptions};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SearchBudget {
    /// Candidate limit for sampled modes; exhaustive modes ignore it.
    pub max_candidates: u64,
    pub max_seconds: Option<f64>,
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
    pub seed: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { max_candidates: 20_000, max_seconds: None, workers: None, seed: 1 }
    }
}

impl SearchBudget {
    fn deadline(&self) -> Option<Instant> {
        self.max_seconds.map(|s| Instant::now() + Duration::from_secs_f64(s))
    }

    /// Runs `op` inside a pool with the requested worker count.
    pub fn install<T: Send>(&self, op: impl FnOnce() -> T + Send) -> T {
        match self.workers {
            Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
                Ok(pool) => pool.install(op),
                Err(_) => op(),
            },
            None => op(),
        }
    }
}

/// Density statistics and verified representations from the scalar sets.
#[derive(Clone, Debug)]
pub struct ScalarSweep {
    pub q: u32,
    pub xi_total: usize,
    pub xi_valid: usize,
    /// Valid `xi` whose scalar set is nonempty.
    pub xi_nonempty: usize,
    /// `(xi, |Gamma(xi)|)` for each valid `xi`.
    pub gamma_sizes: Vec<(FieldElement, usize)>,
    pub reps: Vec<Construction>,
}

impl ScalarSweep {
    /// Fraction of nonzero `xi` admitting a nonempty scalar set.
    pub fn density(&self) -> f64 {
        self.xi_nonempty as f64 / self.xi_total.max(1) as f64
    }
}

/// Sweeps `xi` over `F_q^*` and verifies up to `limit` representations from
/// admissible scalars passing `parity`.
pub fn scalar_sweep(
    field: &Arc<Field>,
    parity: ParityFilter,
    limit: usize,
    verify: &VerifyOptions,
) -> Result<ScalarSweep> {
    let f = &**field;
    let mut out = ScalarSweep {
        q: f.order(),
        xi_total: f.order() as usize - 1,
        xi_valid: 0,
        xi_nonempty: 0,
        gamma_sizes: Vec::new(),
        reps: Vec::new(),
    };
    if f.order() < 4 {
        return Ok(out);
    }
    for xi in f.nonzero_elements() {
        let valid = if f.is_even() { check_xi_even(f, xi) } else { check_xi_odd(f, xi) };
        if valid.is_err() {
            continue;
        }
        out.xi_valid += 1;
        let set = if f.is_even() { gamma_even(f, xi)? } else { gamma_odd(f, xi)? };
        if !set.is_empty() {
            out.xi_nonempty += 1;
        }
        out.gamma_sizes.push((xi, set.len()));
    }
    let admissible = crate::constructions::admissible_scalars(f, parity);
    for (xi, s) in admissible.into_iter().take(limit) {
        let (form, gens, choice) = rank5_from_scalars(field, xi, s)?;
        let rep = SCGRep::new(field.clone(), gens)?.verify(verify, Some(&form))?;
        if rep.is_verified() {
            let diagonal = Some((0..5).map(|i| form.phi().get(i, i)).collect());
            out.reps.push(Construction { rep, form: Some(form), choice: Some(choice), diagonal });
        }
    }
    Ok(out)
}

/// Outcome of [`general_rank5_search`].
#[derive(Clone, Debug)]
pub struct Rank5Search {
    pub found: Vec<Construction>,
    /// Class-constrained diagonals considered before pruning.
    pub candidates: u64,
    /// Diagonals left after scaling pruning.
    pub canonical: u64,
    pub rejected_form: u64,
    pub rejected_theta: u64,
    pub rejected_parity: u64,
    pub rejected_quick: u64,
    pub rejected_verification: u64,
    pub complete: bool,
}

/// Rescaling `u_i` by `(t, 1/t, t, 1/t, t)` keeps the superdiagonal and maps
/// the diagonal to `(m a_1, a_2/m, m a_3, a_4/m, m a_5)` with `m = t^2`; a
/// diagonal is kept only if it is least in its orbit.
fn is_canonical_diagonal(f: &Field, diag: &[FieldElement], scalings: &[FieldElement]) -> bool {
    let key = |d: &[FieldElement]| d.iter().map(|x| x.value()).collect::<Vec<_>>();
    let base = key(diag);
    scalings.iter().all(|&m| {
        let mi = f.inv(m).expect("nonzero");
        let scaled: Vec<FieldElement> = diag
            .iter()
            .enumerate()
            .map(|(k, &a)| f.mul(a, if k % 2 == 0 { m } else { mi }))
            .collect();
        base <= key(&scaled)
    })
}

/// Sweeps the template `Phi(a_1, .., a_5)` with all `a_i` in one square
/// class `c` (any nonzero values when q is even). For q odd only forms with
/// `theta(-1) = c` are kept and the generators are `-sigma_{u_i}`; these lie
/// in `Omega(V)` by the generation lemma. Candidates whose predicted type
/// fails `parity` are skipped; every other survivor is fully verified.
/// Stops after `limit` successes.
pub fn general_rank5_search(
    field: &Arc<Field>,
    limit: usize,
    parity: ParityFilter,
    verify: &VerifyOptions,
    budget: &SearchBudget,
) -> Result<Rank5Search> {
    let f = &**field;
    let deadline = budget.deadline();
    let classes: Vec<Option<SquareClass>> = if f.is_even() {
        vec![None]
    } else {
        vec![Some(SquareClass::Square), Some(SquareClass::NonSquare)]
    };
    let mut out = Rank5Search {
        found: Vec::new(),
        candidates: 0,
        canonical: 0,
        rejected_form: 0,
        rejected_theta: 0,
        rejected_parity: 0,
        rejected_quick: 0,
        rejected_verification: 0,
        complete: true,
    };
    let scalings: Vec<FieldElement> = f
        .nonzero_elements()
        .filter(|&m| m != f.one() && (f.is_even() || f.is_nonzero_square(m)))
        .collect();
    for class in classes {
        let values: Vec<FieldElement> = f
            .nonzero_elements()
            .filter(|&a| class.is_none_or(|c| f.square_class(a).ok() == Some(c)))
            .collect();
        let n = values.len();
        let total = n.pow(5);
        out.candidates += total as u64;
        let diags: Vec<Vec<FieldElement>> = (0..total)
            .map(|mut k| {
                let mut d = vec![FieldElement::ZERO; 5];
                for slot in d.iter_mut().rev() {
                    *slot = values[k % n];
                    k /= n;
                }
                d
            })
            .filter(|d| is_canonical_diagonal(f, d, &scalings))
            .collect();
        out.canonical += diags.len() as u64;
        let chunk = rayon::current_num_threads().max(1) * 2;
        for block in diags.chunks(chunk) {
            if deadline.is_some_and(|d| Instant::now() > d) {
                out.complete = false;
                return Ok(out);
            }
            let results: Vec<(u8, Option<Construction>)> = block
                .par_iter()
                .map(|d| template_candidate(field, d, class, parity, verify))
                .collect();
            for (code, c) in results {
                match code {
                    0 => out.rejected_form += 1,
                    1 => out.rejected_theta += 1,
                    2 => out.rejected_quick += 1,
                    3 => out.rejected_verification += 1,
                    5 => out.rejected_parity += 1,
                    _ => out.found.push(c.expect("found")),
                }
                if out.found.len() >= limit {
                    out.complete = false;
                    return Ok(out);
                }
            }
        }
    }
    Ok(out)
}

fn template_candidate(
    field: &Arc<Field>,
    diag: &[FieldElement],
    class: Option<SquareClass>,
    parity: ParityFilter,
    verify: &VerifyOptions,
) -> (u8, Option<Construction>) {
    let f = &**field;
    let Ok(form) = phi_string(field, diag) else { return (0, None) };
    if let Some(c) = class {
        match form.theta_minus_identity() {
            Ok(t) if t == c => {}
            _ => return (1, None),
        }
    }
    let Ok(gens) = template_generators(&form) else { return (0, None) };
    match predicted_schlafli(f, diag) {
        Ok(s) if s.iter().all(|&p| p > 2) => {
            if !parity.accepts(&s) {
                return (5, None);
            }
        }
        _ => return (2, None),
    }
    let order = GeneratedGroup::new(field.clone(), gens.clone())
        .and_then(|g| g.chain_with(&verify.chain))
        .map(|c| c.order());
    if order.ok() != Some(omega5_order(f.order() as u64)) {
        return (2, None);
    }
    let rep = match SCGRep::new(field.clone(), gens).and_then(|r| r.verify(verify, Some(&form))) {
        Ok(r) if r.is_verified() => r,
        _ => return (3, None),
    };
    let c = Construction { rep, form: Some(form), choice: None, diagonal: Some(diag.to_vec()) };
    (4, Some(c))
}

/// Rank 5 via the scalar sets, falling back to the general template search
/// when they are empty.
pub fn construct_rank5(
    field: &Arc<Field>,
    opts: &Rank5Options,
    budget: &SearchBudget,
) -> Result<Construction> {
    match build_rank5(field, opts) {
        Err(ScgError::NoScalarsFound { q }) => {
            let res = general_rank5_search(field, 1, opts.parity, &opts.verify, budget)?;
            match res.found.into_iter().next() {
                Some(c) => Ok(c),
                None if res.complete => Err(ScgError::NoScalarsFound { q }),
                None => Err(ScgError::BudgetExhausted),
            }
        }
        other => other,
    }
}

#[derive(Clone, Debug)]
pub struct ConstructOptions {
    /// Target rank: 5, or 4 and 3 by successive rank reductions.
    pub rank: usize,
    pub parity: ParityFilter,
    pub prefer_uniform: bool,
    pub verify: VerifyOptions,
    pub budget: SearchBudget,
}

impl Default for ConstructOptions {
    fn default() -> Self {
        ConstructOptions {
            rank: 5,
            parity: ParityFilter::None,
            prefer_uniform: true,
            verify: VerifyOptions::default(),
            budget: SearchBudget::default(),
        }
    }
}

/// A verified representation of the requested rank and the rank 5
/// construction it was reduced from.
#[derive(Clone, Debug)]
pub struct Constructed {
    pub rep: SCGRep,
    pub source: Construction,
    pub reductions: usize,
}

fn reduce_to(source: Construction, reductions: usize, verify: &VerifyOptions) -> Result<Constructed> {
    let mut rep = source.rep.clone();
    for _ in 0..reductions {
        rep = rank_reduce(&rep, verify)?;
    }
    Ok(Constructed { rep, source, reductions })
}

/// Rank 5 from the scalar sets (or the template search when they are
/// empty), followed by `5 - rank` rank reductions. Rank 5 candidates are
/// tried in sweep order until every reduction succeeds; for ranks 4 and 3
/// the parity filter defaults to [`ParityFilter::ReductionOdd`].
pub fn construct(field: &Arc<Field>, opts: &ConstructOptions) -> Result<Constructed> {
    let q = field.order();
    if !(3..=5).contains(&opts.rank) {
        return Err(ScgError::UnsupportedRank { rank: opts.rank });
    }
    let reductions = 5 - opts.rank;
    let parity = match (opts.parity, reductions) {
        (ParityFilter::None, 1..) => ParityFilter::ReductionOdd,
        (p, _) => p,
    };
    let r5 = Rank5Options { parity, prefer_uniform: opts.prefer_uniform, verify: opts.verify.clone() };
    if reductions == 0 {
        let c = construct_rank5(field, &r5, &opts.budget)?;
        return Ok(Constructed { rep: c.rep.clone(), source: c, reductions: 0 });
    }
    let mut last_err = None;
    if q >= 4 {
        for (xi, s) in rank5_sweep(field, &r5) {
            let (form, gens, choice) = rank5_from_scalars(field, xi, s)?;
            let rep = SCGRep::new(field.clone(), gens)?.verify(&opts.verify, Some(&form))?;
            if !rep.is_verified() {
                continue;
            }
            let diagonal = Some((0..5).map(|i| form.phi().get(i, i)).collect());
            let c = Construction { rep, form: Some(form), choice: Some(choice), diagonal };
            match reduce_to(c, reductions, &opts.verify) {
                Ok(done) => return Ok(done),
                Err(e) => last_err = Some(e),
            }
        }
    }
    // the first template hit usually reduces; sweep everything otherwise
    let mut res = general_rank5_search(field, 1, parity, &opts.verify, &opts.budget)?;
    for limit in [1, usize::MAX] {
        if limit > 1 {
            res = general_rank5_search(field, limit, parity, &opts.verify, &opts.budget)?;
        }
        for c in std::mem::take(&mut res.found) {
            match reduce_to(c, reductions, &opts.verify) {
                Ok(done) => return Ok(done),
                Err(e) => last_err = Some(e),
            }
        }
        if res.complete {
            break;
        }
    }
    Err(match (res.complete, last_err) {
        (false, _) => ScgError::BudgetExhausted,
        (true, Some(e)) => e,
        (true, None) => ScgError::NoScalarsFound { q },
    })
}

/// All elements of a group with a lookup index.
#[derive(Clone, Debug)]
pub struct ElementTable {
    field: Arc<Field>,
    elements: Vec<Matrix>,
    index: FxHashMap<Matrix, u32>,
    involutions: Vec<u32>,
}

impl ElementTable {
    pub fn from_chain(chain: &StabilizerChain, cap: u128) -> Result<ElementTable> {
        let elements = chain.enumerate_elements(cap)?;
        Ok(Self::from_elements(chain.field().clone(), elements))
    }

    pub fn from_elements(field: Arc<Field>, mut elements: Vec<Matrix>) -> ElementTable {
        elements.sort();
        let index = elements.iter().enumerate().map(|(k, g)| (g.clone(), k as u32)).collect();
        let involutions = elements
            .iter()
            .enumerate()
            .filter(|(_, g)| !g.is_identity() && g.is_involution(&field))
            .map(|(k, _)| k as u32)
            .collect();
        ElementTable { field, elements, index, involutions }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Matrix] {
        &self.elements
    }

    pub fn involutions(&self) -> impl Iterator<Item = &Matrix> + '_ {
        self.involutions.iter().map(|&k| &self.elements[k as usize])
    }

    pub fn involution_count(&self) -> usize {
        self.involutions.len()
    }

    pub fn position(&self, g: &Matrix) -> Option<usize> {
        self.index.get(g).map(|&k| k as usize)
    }
}

/// A conjugacy class of involutions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvolutionClass {
    pub representative: Matrix,
    pub size: usize,
    /// Dimension of the (-1)-eigenspace (support dimension when q is even).
    pub minus_dim: usize,
    /// Members as positions in the involution list of the element table.
    #[serde(skip)]
    pub members: Vec<usize>,
}

/// Involution classes of the group, by orbit refinement under conjugation
/// by its generators. Classes are ordered by their least member.
pub fn conjugacy_involution_classes(
    chain: &StabilizerChain,
    table: &ElementTable,
) -> Result<Vec<InvolutionClass>> {
    let f = &*table.field;
    let invs: Vec<&Matrix> = table.involutions().collect();
    let pos: FxHashMap<&Matrix, usize> = invs.iter().enumerate().map(|(k, g)| (*g, k)).collect();
    let gens: Vec<(Matrix, Matrix)> = chain
        .generators()
        .iter()
        .map(|g| Ok((g.clone(), g.inverse(f)?)))
        .collect::<Result<_>>()?;
    let mut class_of = vec![usize::MAX; invs.len()];
    let mut classes = Vec::new();
    for start in 0..invs.len() {
        if class_of[start] != usize::MAX {
            continue;
        }
        let id = classes.len();
        class_of[start] = id;
        let mut members = vec![start];
        let mut i = 0;
        while i < members.len() {
            let x = invs[members[i]];
            for (g, gi) in &gens {
                let y = gi.mul(x, f).mul(g, f);
                let k = *pos.get(&y).ok_or_else(|| {
                    ScgError::VerificationFailed("conjugate left the element table".into())
                })?;
                if class_of[k] == usize::MAX {
                    class_of[k] = id;
                    members.push(k);
                }
            }
            i += 1;
        }
        members.sort_unstable();
        let rep = invs[start].clone();
        let minus_dim = if f.is_even() {
            crate::matlin::support(&rep, f).dim()
        } else {
            eigenspace(&rep, f.neg(f.one()), f).dim()
        };
        classes.push(InvolutionClass { representative: rep, size: members.len(), minus_dim, members });
    }
    Ok(classes)
}

/// Writes a non-central involution (q odd) as `sign * sigma_u` or
/// `sign * sigma_u sigma_w` with `w` in `u^perp`, returning the sign and
/// the vectors; `None` if no such expression exists.
pub fn involution_taxonomy(form: &QuadraticForm, g: &Matrix) -> Option<(i8, Vec<Vector>)> {
    let f = &**form.field();
    if f.is_even() || !g.is_involution(f) || !form.is_isometry(g) {
        return None;
    }
    let minus = eigenspace(g, f.neg(f.one()), f);
    let plus = fixed_space(g, f);
    let (sign, w) = match (minus.dim(), plus.dim()) {
        (1 | 2, _) => (1i8, minus),
        (_, 1 | 2) => (-1i8, plus),
        _ => return None,
    };
    let u = w.vectors(f).find(|v| form.is_nonsingular_vector(v))?;
    let mut us = vec![u.clone()];
    if w.dim() == 2 {
        let rest = w.intersection(f, &form.perp(&Subspace::span(f, form.dim(), &[u])));
        let v = rest.basis().first()?.clone();
        if !form.is_nonsingular_vector(&v) {
            return None;
        }
        us.push(v);
    }
    let mut h = Matrix::identity(form.dim());
    for v in &us {
        h = h.mul(&form.symmetry(v).ok()?, f);
    }
    if sign < 0 {
        h = h.neg(f);
    }
    (h == *g).then_some((sign, us))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMode {
    Exhaustive,
    Sampled,
}

/// Completeness record for an exhaustive search that found nothing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NonexistenceCertificate {
    pub rank: usize,
    pub group_order: u128,
    pub involutions: usize,
    /// Row-major element codes of the class representatives used for `rho_0`.
    pub class_representatives: Vec<Vec<u32>>,
    pub class_sizes: Vec<usize>,
    /// Partial tuples of length `k + 1` that passed every check, per `k`.
    pub depth_counts: Vec<u64>,
    /// Number of `(class representative, rho_1)` tasks the tree was split into.
    pub partition_tasks: usize,
    pub workers: usize,
    pub complete: bool,
    pub argument: String,
}

#[derive(Clone, Debug)]
pub struct TupleSearchOutcome {
    pub found: Vec<SCGRep>,
    pub certificate: Option<NonexistenceCertificate>,
    pub candidates: u64,
    pub depth_counts: Vec<u64>,
}

#[derive(Clone, Debug)]
pub struct TupleSearchOptions {
    pub mode: SearchMode,
    pub budget: SearchBudget,
    /// Stop after this many representations.
    pub max_found: usize,
    /// Cap on the group order for building the element table.
    pub element_cap: u128,
    pub verify: VerifyOptions,
}

impl Default for TupleSearchOptions {
    fn default() -> Self {
        TupleSearchOptions {
            mode: SearchMode::Exhaustive,
            budget: SearchBudget::default(),
            max_found: 1,
            element_cap: 1_000_000,
            verify: VerifyOptions::default(),
        }
    }
}

/// Whether `<g_0..g_{k-1}> cap <g_1..g_k> = <g_1..g_{k-1}>` for `gens = g_0..g_k`.
pub fn top_interval_holds(field: &Arc<Field>, gens: &[Matrix], opts: &VerifyOptions) -> Result<bool> {
    let k = gens.len() - 1;
    let chain = |s: &[Matrix]| -> Result<StabilizerChain> {
        let s = if s.is_empty() { vec![Matrix::identity(gens[0].dim())] } else { s.to_vec() };
        GeneratedGroup::new(field.clone(), s)?.chain_with(&opts.chain)
    };
    let a = chain(&gens[..k])?;
    let b = chain(&gens[1..])?;
    let c = chain(&gens[1..k])?;
    if a.order().min(b.order()) <= opts.auto_enumerate_limit {
        Ok(intersect_small(&a, &b, opts.enumerate_cap)?.order() == c.order())
    } else {
        Ok(intersection_is_subgroup(&a, &b, &c, opts.coset_cap)?.holds)
    }
}

struct TupleCtx<'a> {
    field: &'a Arc<Field>,
    invs: Vec<&'a Matrix>,
    rank: usize,
    group_order: u128,
    opts: &'a TupleSearchOptions,
    stop: AtomicBool,
    deadline: Option<Instant>,
}

impl TupleCtx<'_> {
    fn commute(&self, a: usize, b: usize) -> bool {
        self.invs[a].commutes_with(self.invs[b], self.field)
    }

    /// Candidates for the next position given the partial tuple.
    fn admissible(&self, tuple: &[usize], x: usize) -> bool {
        let k = tuple.len();
        if k > 0 && self.commute(x, tuple[k - 1]) {
            return false;
        }
        tuple[..k.saturating_sub(1)].iter().all(|&t| self.commute(x, t))
    }

    fn gens(&self, tuple: &[usize]) -> Vec<Matrix> {
        tuple.iter().map(|&k| self.invs[k].clone()).collect()
    }

    /// Interval checks ending at the newest position.
    fn intervals_ok(&self, tuple: &[usize]) -> Result<bool> {
        let k = tuple.len() - 1;
        let gens = self.gens(tuple);
        for i in (0..k.saturating_sub(1)).rev() {
            if !top_interval_holds(self.field, &gens[i..=k], &self.opts.verify)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn generates(&self, tuple: &[usize]) -> Result<bool> {
        let chain = GeneratedGroup::new(self.field.clone(), self.gens(tuple))?
            .chain_with(&self.opts.verify.chain)?;
        Ok(chain.order() == self.group_order)
    }

    fn out_of_time(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() > d)
    }

    fn dfs(&self, tuple: &mut Vec<usize>, counts: &mut [u64], found: &mut Vec<Vec<usize>>) -> Result<()> {
        if self.stop.load(Ordering::Relaxed) {
            return Ok(());
        }
        if tuple.len() == self.rank {
            if self.generates(tuple)? {
                found.push(tuple.clone());
                if found.len() >= self.opts.max_found {
                    self.stop.store(true, Ordering::Relaxed);
                }
            }
            return Ok(());
        }
        if self.out_of_time() {
            self.stop.store(true, Ordering::Relaxed);
            return Ok(());
        }
        for x in 0..self.invs.len() {
            if !self.admissible(tuple, x) {
                continue;
            }
            tuple.push(x);
            if self.intervals_ok(tuple)? {
                counts[tuple.len() - 1] += 1;
                self.dfs(tuple, counts, found)?;
            }
            tuple.pop();
            if self.stop.load(Ordering::Relaxed) {
                break;
            }
        }
        Ok(())
    }
}

/// Searches for string C-group representations of rank `rank` among
/// involution tuples of the group.
///
/// Exhaustive mode lets `rho_0` range over class representatives only:
/// conjugating a representation by any group element gives another one, so
/// every representation is conjugate to one whose first generator is a
/// representative. Tuples grow left to right, keeping the string property,
/// adjacent orders above 2, and every interval intersection ending at the
/// new position; complete tuples must generate the whole group.
pub fn involution_tuple_search(
    chain: &StabilizerChain,
    rank: usize,
    opts: &TupleSearchOptions,
) -> Result<TupleSearchOutcome> {
    let table = ElementTable::from_chain(chain, opts.element_cap)?;
    involution_tuple_search_in(chain, &table, rank, opts)
}

/// As [`involution_tuple_search`], with a prebuilt element table.
pub fn involution_tuple_search_in(
    chain: &StabilizerChain,
    table: &ElementTable,
    rank: usize,
    opts: &TupleSearchOptions,
) -> Result<TupleSearchOutcome> {
    let field = chain.field().clone();
    if rank < 2 {
        return Err(ScgError::RankTooSmall { rank });
    }
    let ctx = TupleCtx {
        field: &field,
        invs: table.involutions().collect(),
        rank,
        group_order: chain.order(),
        opts,
        stop: AtomicBool::new(false),
        deadline: opts.budget.deadline(),
    };
    let (found, counts, candidates, classes, tasks) = match opts.mode {
        SearchMode::Exhaustive => {
            let classes = conjugacy_involution_classes(chain, table)?;
            let tasks: Vec<(usize, usize)> = classes
                .iter()
                .flat_map(|c| {
                    let r0 = c.members[0];
                    (0..ctx.invs.len()).map(move |x| (r0, x))
                })
                .filter(|&(r0, x)| !ctx.commute(r0, x))
                .collect();
            let results: Result<Vec<(Vec<u64>, Vec<Vec<usize>>)>> = opts.budget.install(|| {
                tasks
                    .par_iter()
                    .map(|&(r0, x)| {
                        let mut counts = vec![0u64; rank];
                        let mut found = Vec::new();
                        let mut tuple = vec![r0, x];
                        if ctx.stop.load(Ordering::Relaxed) || !ctx.intervals_ok(&tuple)? {
                            return Ok((counts, found));
                        }
                        counts[1] += 1;
                        ctx.dfs(&mut tuple, &mut counts, &mut found)?;
                        Ok((counts, found))
                    })
                    .collect()
            });
            let mut counts = vec![0u64; rank];
            counts[0] = classes.len() as u64;
            let mut found = Vec::new();
            for (c, f) in results? {
                for (a, b) in counts.iter_mut().zip(&c).skip(1) {
                    *a += b;
                }
                found.extend(f);
            }
            let candidates = counts[rank - 1];
            let ntasks = tasks.len();
            (found, counts, candidates, Some(classes), ntasks)
        }
        SearchMode::Sampled => {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.budget.seed);
            let mut counts = vec![0u64; rank];
            let mut found = Vec::new();
            let mut candidates = 0u64;
            let n = ctx.invs.len();
            while candidates < opts.budget.max_candidates && !ctx.out_of_time() && n > 0 {
                candidates += 1;
                let mut tuple = vec![rng.gen_range(0..n)];
                counts[0] += 1;
                while tuple.len() < rank {
                    let mut options: Vec<usize> = (0..n).filter(|&x| ctx.admissible(&tuple, x)).collect();
                    options.shuffle(&mut rng);
                    let mut extended = false;
                    for x in options.into_iter().take(8) {
                        tuple.push(x);
                        if ctx.intervals_ok(&tuple)? {
                            counts[tuple.len() - 1] += 1;
                            extended = true;
                            break;
                        }
                        tuple.pop();
                    }
                    if !extended {
                        break;
                    }
                }
                if tuple.len() == rank && ctx.generates(&tuple)? {
                    found.push(tuple);
                    if found.len() >= opts.max_found {
                        break;
                    }
                }
            }
            (found, counts, candidates, None, 0)
        }
    };
    let stopped_early = ctx.out_of_time();
    let mut reps = Vec::new();
    for t in &found {
        let rep = SCGRep::new(field.clone(), ctx.gens(t))?.verify(&opts.verify, None)?;
        if !rep.is_verified() {
            return Err(ScgError::VerificationFailed(
                "search result failed cold re-verification".into(),
            ));
        }
        reps.push(rep);
    }
    let certificate = match (&classes, reps.is_empty(), stopped_early) {
        (Some(classes), true, false) => Some(NonexistenceCertificate {
            rank,
            group_order: chain.order(),
            involutions: ctx.invs.len(),
            class_representatives: classes.iter().map(|c| c.representative.to_codes()).collect(),
            class_sizes: classes.iter().map(|c| c.size).collect(),
            depth_counts: counts.clone(),
            partition_tasks: tasks,
            workers: opts.budget.workers.unwrap_or_else(rayon::current_num_threads),
            complete: true,
            argument: "every representation is conjugate to one whose first generator is a \
                       class representative; all extensions of every representative were \
                       enumerated with string, order and interval-intersection pruning, and no \
                       complete tuple generates the group"
                .into(),
        }),
        _ => None,
    };
    if reps.is_empty() && certificate.is_none() {
        return Err(ScgError::BudgetExhausted);
    }
    Ok(TupleSearchOutcome { found: reps, certificate, candidates, depth_counts: counts })
}

fn random_vector<R: Rng>(f: &Field, space: &Subspace, rng: &mut R) -> Option<Vector> {
    if space.dim() == 0 {
        return None;
    }
    let q = f.order();
    let mut v = crate::matlin::zero_vector(space.ambient());
    for b in space.basis() {
        let c = f.element(rng.gen_range(0..q)).expect("in range");
        v = crate::matlin::vec_axpy(f, &v, c, b);
    }
    (!crate::matlin::is_zero_vector(&v)).then_some(v)
}

/// A random involution commuting with each of `with`: `+-sigma_u` or
/// `+-sigma_u sigma_w` where `u`, `w` are eigenvectors of every element of
/// `with` (so conjugation fixes the symmetries) and `w` is in `u^perp`.
fn random_commuting_involution<R: Rng>(
    form: &QuadraticForm,
    with: &[Matrix],
    rng: &mut R,
) -> Option<Matrix> {
    let f = &**form.field();
    let d = form.dim();
    let eigen_meet = |rng: &mut R| {
        with.iter().fold(Subspace::full(d), |acc, g| {
            let e = if f.is_even() || rng.gen_bool(0.5) {
                fixed_space(g, f)
            } else {
                eigenspace(g, f.neg(f.one()), f)
            };
            acc.intersection(f, &e)
        })
    };
    let pick = |space: &Subspace, rng: &mut R| {
        (0..8)
            .filter_map(|_| random_vector(f, space, rng))
            .find(|v| form.is_nonsingular_vector(v))
    };
    let u = pick(&eigen_meet(rng), rng)?;
    let mut g = form.symmetry(&u).ok()?;
    if rng.gen_bool(0.5) {
        let u_perp = form.perp(&Subspace::span(f, d, &[u]));
        let w = pick(&eigen_meet(rng).intersection(f, &u_perp), rng)?;
        g = g.mul(&form.symmetry(&w).ok()?, f);
    }
    if !f.is_even() && rng.gen_bool(0.5) {
        g = g.neg(f);
    }
    (!g.is_identity() && !(g == Matrix::identity(d).neg(f))).then_some(g)
}

/// Samples involution `len`-tuples in `O(V)` with the string property and
/// adjacent products of order above 2. Returns the tuples and the number of
/// attempts used.
pub fn sample_string_tuples(
    form: &QuadraticForm,
    len: usize,
    count: usize,
    seed: u64,
    max_attempts: usize,
) -> (Vec<Vec<Matrix>>, usize) {
    let f = form.field().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut attempts = 0;
    while out.len() < count && attempts < max_attempts {
        attempts += 1;
        let mut tuple: Vec<Matrix> = Vec::new();
        while tuple.len() < len {
            let k = tuple.len();
            let fixed = &tuple[..k.saturating_sub(1)];
            let next = (0..32).find_map(|_| {
                let g = random_commuting_involution(form, fixed, &mut rng)?;
                let ok = k == 0 || !g.commutes_with(&tuple[k - 1], &f);
                ok.then_some(g)
            });
            match next {
                Some(g) => tuple.push(g),
                None => break,
            }
        }
        if tuple.len() < len {
            continue;
        }
        let Ok(rep) = SCGRep::new(f.clone(), tuple.clone()) else { continue };
        if string_violation(&rep).is_none() && rep.schlafli().iter().all(|&p| p > 2) {
            out.push(tuple);
        }
    }
    (out, attempts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matlin::unit_vector;

    fn field(q: u32) -> Arc<Field> {
        Arc::new(Field::with_order(q).unwrap())
    }

    fn vecf(f: &Field, xs: &[i64]) -> Vector {
        xs.iter().map(|&x| f.from_i64(x)).collect()
    }

    #[test]
    fn canonical_diagonals_cover_orbits() {
        let f = field(7);
        let squares: Vec<_> =
            f.nonzero_elements().filter(|&m| m != f.one() && f.is_nonzero_square(m)).collect();
        let vals: Vec<_> = f.nonzero_elements().filter(|&a| f.is_nonzero_square(a)).collect();
        let mut canon = 0;
        for a in &vals {
            for b in &vals {
                let d = [*a, *b, f.one(), f.one(), f.one()];
                canon += is_canonical_diagonal(&f, &d, &squares) as usize;
            }
        }
        // (a, b, 1, 1, 1) is never fixed by a nontrivial scaling
        assert_eq!(canon * 3, vals.len() * vals.len());
    }

    #[test]
    fn dihedral_rank2_found() {
        let f = field(7);
        let form = QuadraticForm::standard(f.clone(), 2).unwrap();
        let a = form.symmetry(&unit_vector(2, 0)).unwrap();
        let b = form.symmetry(&vecf(&f, &[1, 1])).unwrap();
        let chain = GeneratedGroup::new(f.clone(), vec![a, b]).unwrap().chain().unwrap();
        let out = involution_tuple_search(&chain, 2, &TupleSearchOptions::default()).unwrap();
        assert_eq!(out.found.len(), 1);
        assert_eq!(out.found[0].group_order(), Some(chain.order()));
    }

    #[test]
    fn modes_agree_on_small_groups() {
        // O(3, 3) is the Coxeter group of type B_3 (order 48)
        let f = field(3);
        let form = QuadraticForm::standard(f.clone(), 3).unwrap();
        let gens: Vec<Matrix> = form
            .nonsingular_points(&Subspace::full(3))
            .iter()
            .map(|u| form.symmetry(u).unwrap())
            .collect();
        let chain = GeneratedGroup::new(f.clone(), gens).unwrap().chain().unwrap();
        assert_eq!(chain.order(), 48);
        for rank in [3, 4] {
            let ex = involution_tuple_search(&chain, rank, &TupleSearchOptions::default());
            let sampled = involution_tuple_search(
                &chain,
                rank,
                &TupleSearchOptions { mode: SearchMode::Sampled, ..TupleSearchOptions::default() },
            );
            let ex_found = ex.as_ref().map(|o| !o.found.is_empty()).unwrap();
            let sa_found = sampled.map(|o| !o.found.is_empty()).unwrap_or(false);
            assert_eq!(ex_found, sa_found, "rank {rank}");
            assert_eq!(ex_found, rank == 3);
            if rank == 4 {
                assert!(ex.unwrap().certificate.unwrap().complete);
            }
        }
    }

    #[test]
    fn klein_group_classes() {
        let f = field(5);
        let form = QuadraticForm::standard(f.clone(), 3).unwrap();
        let a = form.symmetry(&unit_vector(3, 0)).unwrap();
        let b = form.symmetry(&unit_vector(3, 1)).unwrap();
        let chain = GeneratedGroup::new(f.clone(), vec![a, b]).unwrap().chain().unwrap();
        let table = ElementTable::from_chain(&chain, 100).unwrap();
        let classes = conjugacy_involution_classes(&chain, &table).unwrap();
        assert_eq!(table.involution_count(), 3);
        assert_eq!(classes.iter().map(|c| c.size).collect::<Vec<_>>(), vec![1, 1, 1]);
    }

    #[test]
    fn sampled_tuples_satisfy_string_property() {
        let f = field(5);
        let form = QuadraticForm::standard(f.clone(), 5).unwrap();
        let (tuples, _) = sample_string_tuples(&form, 6, 5, 3, 10_000);
        assert_eq!(tuples.len(), 5);
        for t in &tuples {
            let rep = SCGRep::new(f.clone(), t.clone()).unwrap();
            assert!(string_violation(&rep).is_none());
            assert!(t.iter().all(|g| form.is_isometry(g)));
        }
    }
}
