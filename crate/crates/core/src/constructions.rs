//! Explicit constructions: the string-form template, the `h` matrices,
//! scalar sets, rank 5 generators and the direct rank 4 family.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ScgError};
use crate::ffield::{Field, FieldElement, SquareClass};
use crate::group::{GeneratedGroup, StabilizerChain};
use crate::matlin::{mat_order, Matrix, Subspace};
use crate::quadspace::QuadraticForm;
use crate::sggi::{omega5_order, string_violation, SCGRep, VerifyOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Parity {
    Even,
    Odd,
}

/// Which rule admitted a scalar choice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    GammaEven,
    GammaOdd,
    GeneralSearch,
    DirectRank4,
}

/// Scalars behind a construction. For the odd branch `alpha` is a square
/// root of the chosen element of `Gamma_odd(xi)`; for the direct rank 4
/// family `xi` and `alpha` hold that family's `alpha` and `beta`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScalarChoice {
    pub xi: FieldElement,
    pub alpha: FieldElement,
    pub parity: Parity,
    pub provenance: Provenance,
}

/// Upper-triangular form with diagonal `alphas` and ones on the superdiagonal.
pub fn phi_string(field: &Arc<Field>, alphas: &[FieldElement]) -> Result<QuadraticForm> {
    if let Some(index) = alphas.iter().position(|a| a.is_zero()) {
        return Err(ScgError::ZeroDiagonal { index });
    }
    let d = alphas.len();
    let mut phi = Matrix::diagonal(alphas);
    for i in 0..d.saturating_sub(1) {
        phi.set(i, i + 1, field.one());
    }
    QuadraticForm::new(field.clone(), phi)
}

/// `Phi(xi, xi, alpha, alpha, xi)`.
pub fn phi_even(field: &Arc<Field>, xi: FieldElement, alpha: FieldElement) -> Result<QuadraticForm> {
    phi_string(field, &[xi, xi, alpha, alpha, xi])
}

/// `Phi(1, xi^2, 1, alpha^2, 1)`, given `s = alpha^2`.
pub fn phi_odd(field: &Arc<Field>, xi: FieldElement, s: FieldElement) -> Result<QuadraticForm> {
    let one = field.one();
    phi_string(field, &[one, field.mul(xi, xi), one, s, one])
}

/// `h(a, b) = [[-1, 1/b], [-1/a, 1/(ab) - 1]]`, the action of
/// `sigma_{u_i} sigma_{u_{i+1}}` on `<u_i, u_{i+1}>`.
pub fn h2(f: &Field, a: FieldElement, b: FieldElement) -> Result<Matrix> {
    if a.is_zero() || b.is_zero() {
        return Err(ScgError::ZeroDenominator);
    }
    let ia = f.inv(a)?;
    let ib = f.inv(b)?;
    let codes = [
        f.neg(f.one()),
        ib,
        f.neg(ia),
        f.sub(f.mul(ia, ib), f.one()),
    ];
    let mut m = Matrix::zero(2);
    for (k, &x) in codes.iter().enumerate() {
        m.set(k / 2, k % 2, x);
    }
    Ok(m)
}

fn h_order(f: &Field, a: FieldElement, b: FieldElement) -> Result<u64> {
    mat_order(&h2(f, a, b)?, 4 * f.order() as u64, f)
}

fn q_pm(f: &Field) -> [u64; 2] {
    let q = f.order() as u64;
    if f.is_even() {
        [q - 1, q + 1]
    } else {
        [(q - 1) / 2, (q + 1) / 2]
    }
}

/// Whether `xi` is admissible for the even branch: `h(xi, xi)` of order `q +- 1`.
pub fn check_xi_even(f: &Field, xi: FieldElement) -> Result<()> {
    if !f.is_even() {
        return Err(ScgError::BadXi("even branch needs q even".into()));
    }
    if xi.is_zero() {
        return Err(ScgError::BadXi("xi = 0".into()));
    }
    let o = h_order(f, xi, xi)?;
    if !q_pm(f).contains(&o) {
        return Err(ScgError::BadXi(format!("h(xi, xi) has order {o}, not q +- 1")));
    }
    Ok(())
}

/// `Gamma_even(xi)`: `alpha != 0, xi` with `h(alpha, alpha)` and `h(xi, alpha)`
/// both of order `q +- 1`.
pub fn gamma_even(field: &Field, xi: FieldElement) -> Result<Vec<FieldElement>> {
    check_xi_even(field, xi)?;
    let targets = q_pm(field);
    let mut out = Vec::new();
    for a in field.nonzero_elements() {
        if a == xi {
            continue;
        }
        if targets.contains(&h_order(field, a, a)?) && targets.contains(&h_order(field, xi, a)?) {
            out.push(a);
        }
    }
    Ok(out)
}

/// Whether `xi` is admissible for the odd branch.
pub fn check_xi_odd(f: &Field, xi: FieldElement) -> Result<()> {
    if f.is_even() {
        return Err(ScgError::BadXi("odd branch needs q odd".into()));
    }
    if xi.is_zero() {
        return Err(ScgError::BadXi("xi = 0".into()));
    }
    let half = f.inv(f.from_i64(2))?;
    if xi == half {
        return Err(ScgError::BadXi("xi = 1/2".into()));
    }
    let xi2 = f.mul(xi, xi);
    if !f.is_nonzero_square(f.sub(xi2, half)) {
        return Err(ScgError::BadXi("xi^2 - 1/2 is not a nonzero square".into()));
    }
    let o = h_order(f, f.one(), xi2)?;
    if !q_pm(f).contains(&o) {
        return Err(ScgError::BadXi(format!("h(1, xi^2) has order {o}, not (q +- 1)/2")));
    }
    Ok(())
}

/// The stages of the odd scalar set for one `xi`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GammaOddDetail {
    pub xi: FieldElement,
    /// Nonzero squares `s` with `h(1, s)` of order `(q +- 1)/2`.
    pub a: Vec<FieldElement>,
    /// Excluded values that exist in the field.
    pub excluded: Vec<FieldElement>,
    pub gamma0: Vec<FieldElement>,
    pub m: FieldElement,
    pub b: FieldElement,
    pub gamma_odd: Vec<FieldElement>,
}

/// The six values removed from `A`; any whose denominator vanishes is skipped.
pub fn gamma0_exclusions(f: &Field, xi: FieldElement) -> Vec<FieldElement> {
    let c = |n: i64| f.from_i64(n);
    let x2 = f.mul(xi, xi);
    let frac = |num: FieldElement, den: FieldElement| f.div(num, den).ok();
    let quarter = f.inv(c(4)).expect("q odd");
    let eighth3 = f.div(c(3), c(8)).expect("q odd");
    let four_x2 = f.mul(c(4), x2);
    let cands = [
        frac(c(1), c(2)),
        Some(quarter),
        frac(x2, f.sub(four_x2, c(1))),
        frac(f.sub(f.mul(c(2), x2), quarter), f.sub(four_x2, c(1))),
        frac(f.sub(x2, quarter), f.sub(four_x2, c(2))),
        frac(f.sub(x2, eighth3), f.sub(f.mul(c(2), x2), c(1))),
    ];
    let mut out: Vec<FieldElement> = cands.into_iter().flatten().collect();
    out.sort();
    out.dedup();
    out
}

/// `m(xi) = 16 (2 xi^2 - 1)^2` and `b(xi) = -(32 xi^4 - 28 xi^2 + 6)`.
pub fn m_b(f: &Field, xi: FieldElement) -> (FieldElement, FieldElement) {
    let c = |n: i64| f.from_i64(n);
    let x2 = f.mul(xi, xi);
    let t = f.sub(f.mul(c(2), x2), c(1));
    let m = f.mul(c(16), f.mul(t, t));
    let x4 = f.mul(x2, x2);
    let b = f.neg(f.add(f.sub(f.mul(c(32), x4), f.mul(c(28), x2)), c(6)));
    (m, b)
}

pub fn gamma_odd_detail(f: &Field, xi: FieldElement) -> Result<GammaOddDetail> {
    check_xi_odd(f, xi)?;
    let targets = q_pm(f);
    let mut a = Vec::new();
    for s in f.nonzero_elements() {
        if f.is_nonzero_square(s) && targets.contains(&h_order(f, f.one(), s)?) {
            a.push(s);
        }
    }
    let excluded = gamma0_exclusions(f, xi);
    let gamma0: Vec<FieldElement> = a.iter().copied().filter(|s| !excluded.contains(s)).collect();
    let (m, b) = m_b(f, xi);
    let gamma_odd = gamma0
        .iter()
        .copied()
        .filter(|&s| f.is_nonzero_square(f.mul_add(s, m, b)))
        .collect();
    Ok(GammaOddDetail { xi, a, excluded, gamma0, m, b, gamma_odd })
}

/// `Gamma_odd(xi)`, as squares `alpha^2`.
pub fn gamma_odd(f: &Field, xi: FieldElement) -> Result<Vec<FieldElement>> {
    Ok(gamma_odd_detail(f, xi)?.gamma_odd)
}

/// Generators `sigma_{u_i}` (q even) or `-sigma_{u_i}` (q odd) of a form
/// written in the basis `u_1..u_d`.
pub fn template_generators(form: &QuadraticForm) -> Result<Vec<Matrix>> {
    let f = form.field();
    (0..form.dim())
        .map(|i| {
            let s = form.symmetry(&crate::matlin::unit_vector(form.dim(), i))?;
            Ok(if f.is_even() { s } else { s.neg(f) })
        })
        .collect()
}

/// Conditions (a)-(c) for a template form with `generators` built by
/// [`template_generators`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateConditions {
    pub adjacent_orders: Vec<u64>,
    pub orders_ok: bool,
    pub spans_nonsingular: bool,
    /// `None` when q is even.
    pub spinor_ok: Option<bool>,
}

impl TemplateConditions {
    pub fn all(&self) -> bool {
        self.orders_ok && self.spans_nonsingular && self.spinor_ok.unwrap_or(true)
    }
}

pub fn template_conditions(form: &QuadraticForm) -> Result<TemplateConditions> {
    let f = form.field();
    let d = form.dim();
    let diag: Vec<FieldElement> = (0..d).map(|i| form.phi().get(i, i)).collect();
    let targets = q_pm(f);
    let adjacent_orders: Vec<u64> = (0..d - 1)
        .map(|i| h_order(f, diag[i], diag[i + 1]))
        .collect::<Result<_>>()?;
    let orders_ok = adjacent_orders.iter().all(|o| targets.contains(o));
    let spans_nonsingular = (0..d).all(|i| {
        (i..d).all(|j| {
            let basis: Vec<_> = (i..=j).map(|k| crate::matlin::unit_vector(d, k)).collect();
            form.is_nonsingular(&Subspace::span(f, d, &basis))
        })
    });
    let spinor_ok = if f.is_even() {
        None
    } else {
        let minus_one = form.theta_minus_identity()?;
        let mut ok = true;
        for &a in &diag {
            ok &= f.square_class(a)? == minus_one;
        }
        Some(ok)
    };
    Ok(TemplateConditions { adjacent_orders, orders_ok, spans_nonsingular, spinor_ok })
}

/// A constructed representation with the data needed to rebuild it.
#[derive(Clone, Debug)]
pub struct Construction {
    pub rep: SCGRep,
    pub form: Option<QuadraticForm>,
    pub choice: Option<ScalarChoice>,
    /// Diagonal of the template form, when one was used.
    pub diagonal: Option<Vec<FieldElement>>,
}

/// Parity constraint on the Schläfli type of a rank 5 construction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParityFilter {
    #[default]
    None,
    /// Every entry odd.
    AllOdd,
    /// `p_3` and `p_4` odd: what two successive rank reductions need of
    /// `rho_2 rho_3` and then `rho_3 rho_4`.
    ReductionOdd,
}

impl ParityFilter {
    pub fn accepts(self, schlafli: &[u64]) -> bool {
        match self {
            ParityFilter::None => true,
            ParityFilter::AllOdd => schlafli.iter().all(|p| p % 2 == 1),
            ParityFilter::ReductionOdd => schlafli.len() >= 4 && schlafli[2] % 2 == 1 && schlafli[3] % 2 == 1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Rank5Options {
    pub parity: ParityFilter,
    /// Move scalars giving a uniform type `[p, p, p, p]` to the front of
    /// the sweep.
    pub prefer_uniform: bool,
    pub verify: VerifyOptions,
}

impl Default for Rank5Options {
    fn default() -> Self {
        Rank5Options { parity: ParityFilter::None, prefer_uniform: true, verify: VerifyOptions::default() }
    }
}

/// Schläfli type predicted by the `h` orders of the template diagonal.
pub fn predicted_schlafli(f: &Field, diag: &[FieldElement]) -> Result<Vec<u64>> {
    diag.windows(2).map(|w| h_order(f, w[0], w[1])).collect()
}

fn template_diagonal(f: &Field, xi: FieldElement, s: FieldElement) -> [FieldElement; 5] {
    if f.is_even() {
        [xi, xi, s, s, xi]
    } else {
        let one = f.one();
        [one, f.mul(xi, xi), one, s, one]
    }
}

/// Every admissible `(xi, alpha)` pair in sweep order (field enumeration
/// order for `xi`, then for `alpha`), with `alpha` given as the set element
/// (`alpha` itself for q even, `alpha^2` for q odd), filtered by parity.
pub fn admissible_scalars(f: &Field, parity: ParityFilter) -> Vec<(FieldElement, FieldElement)> {
    let mut out = Vec::new();
    for xi in f.nonzero_elements() {
        let set = if f.is_even() { gamma_even(f, xi) } else { gamma_odd(f, xi) };
        let Ok(set) = set else { continue };
        for s in set {
            let Ok(sch) = predicted_schlafli(f, &template_diagonal(f, xi, s)) else { continue };
            if parity.accepts(&sch) {
                out.push((xi, s));
            }
        }
    }
    out
}

/// Form and generators for one admissible pair from [`admissible_scalars`].
pub fn rank5_from_scalars(
    field: &Arc<Field>,
    xi: FieldElement,
    s: FieldElement,
) -> Result<(QuadraticForm, Vec<Matrix>, ScalarChoice)> {
    let f = &**field;
    let (form, choice) = if f.is_even() {
        let form = phi_even(field, xi, s)?;
        let choice = ScalarChoice { xi, alpha: s, parity: Parity::Even, provenance: Provenance::GammaEven };
        (form, choice)
    } else {
        let alpha = f.sqrt(s).ok_or_else(|| ScgError::BadXi("alpha^2 is not a square".into()))?;
        let form = phi_odd(field, xi, s)?;
        let choice = ScalarChoice { xi, alpha, parity: Parity::Odd, provenance: Provenance::GammaOdd };
        (form, choice)
    };
    let gens = template_generators(&form)?;
    Ok((form, gens, choice))
}

/// Admissible scalars in the order [`build_rank5`] tries them.
pub fn rank5_sweep(f: &Field, opts: &Rank5Options) -> Vec<(FieldElement, FieldElement)> {
    let mut sweep = admissible_scalars(f, opts.parity);
    if opts.prefer_uniform {
        // stable, so sweep order is kept within each group
        sweep.sort_by_key(|&(xi, s)| {
            let sch = predicted_schlafli(f, &template_diagonal(f, xi, s)).unwrap_or_default();
            !sch.windows(2).all(|w| w[0] == w[1])
        });
    }
    sweep
}

/// The rank 5 construction from the first admissible scalars in sweep order.
/// Conditions (a)-(c) are asserted and the result is fully verified.
pub fn build_rank5(field: &Arc<Field>, opts: &Rank5Options) -> Result<Construction> {
    let q = field.order();
    if q < 4 {
        return Err(ScgError::NoScalarsFound { q });
    }
    let Some((xi, s)) = rank5_sweep(field, opts).into_iter().next() else {
        return Err(ScgError::NoScalarsFound { q });
    };
    let (form, gens, choice) = rank5_from_scalars(field, xi, s)?;
    let cond = template_conditions(&form)?;
    if !cond.all() {
        return Err(ScgError::VerificationFailed(format!(
            "template conditions fail for admissible scalars: {cond:?}"
        )));
    }
    let rep = SCGRep::new(field.clone(), gens)?.verify(&opts.verify, Some(&form))?;
    let report = rep.report().expect("verified");
    if !report.verified || report.is_expected_group != Some(true) {
        return Err(ScgError::VerificationFailed(format!(
            "rank 5 construction at q = {q}: {}",
            report.failure.clone().unwrap_or_else(|| "unexpected group order".into())
        )));
    }
    let diagonal = (0..5).map(|i| form.phi().get(i, i)).collect();
    Ok(Construction { rep, form: Some(form), choice: Some(choice), diagonal: Some(diagonal) })
}

/// `f(a) = (1 - a^2)/(1 + a^2)` and `g(a) = -2a/(1 + a^2)`.
pub fn f_g(f: &Field, a: FieldElement) -> Result<(FieldElement, FieldElement)> {
    let a2 = f.mul(a, a);
    let den = f.add(f.one(), a2);
    if den.is_zero() {
        return Err(ScgError::ZeroDenominator);
    }
    let fa = f.div(f.sub(f.one(), a2), den)?;
    let ga = f.div(f.neg(f.mul(f.from_i64(2), a)), den)?;
    Ok((fa, ga))
}

/// The four generators of the direct rank 4 family.
pub fn rank4_direct_generators(
    field: &Arc<Field>,
    alpha: FieldElement,
    beta: FieldElement,
) -> Result<Vec<Matrix>> {
    let f = &**field;
    if f.is_even() || f.order() < 5 {
        return Err(ScgError::InvalidField("direct rank 4 family needs q odd, q >= 5".into()));
    }
    let (fa, ga) = f_g(f, alpha)?;
    let (fb, gb) = f_g(f, beta)?;
    let one = f.one();
    let m1 = f.neg(one);
    let z = f.zero();
    let mk = |rows: [[FieldElement; 5]; 5]| {
        let mut m = Matrix::zero(5);
        for (i, r) in rows.iter().enumerate() {
            for (j, &x) in r.iter().enumerate() {
                m.set(i, j, x);
            }
        }
        m
    };
    let r0 = Matrix::diagonal(&[m1, one, one, one, m1]);
    let r1 = mk([
        [fa, ga, z, z, z],
        [ga, f.neg(fa), z, z, z],
        [z, z, one, z, z],
        [z, z, z, f.neg(fa), ga],
        [z, z, z, ga, fa],
    ]);
    let r2 = mk([
        [m1, z, z, z, z],
        [z, fb, f.neg(gb), z, z],
        [z, f.neg(gb), f.neg(fb), z, z],
        [z, z, z, m1, z],
        [z, z, z, z, m1],
    ]);
    let r3 = mk([
        [z, z, z, z, one],
        [z, z, z, one, z],
        [z, z, one, z, z],
        [z, one, z, z, z],
        [one, z, z, z, z],
    ]);
    Ok(vec![r0, r1, r2, r3])
}

/// Cheap necessary conditions for a candidate tuple: involutions, string
/// property, adjacent orders above 2 and the expected group order.
fn quick_reject(field: &Arc<Field>, gens: &[Matrix], opts: &VerifyOptions) -> Option<String> {
    let rep = match SCGRep::new(field.clone(), gens.to_vec()) {
        Ok(r) => r,
        Err(e) => return Some(e.to_string()),
    };
    if let Some((i, j)) = string_violation(&rep) {
        return Some(format!("rho_{i} and rho_{j} do not commute"));
    }
    if rep.schlafli().iter().any(|&p| p <= 2) {
        return Some("adjacent product of order <= 2".into());
    }
    if gens[0].dim() == 5 {
        let order = GeneratedGroup::new(field.clone(), gens.to_vec())
            .and_then(|g| g.chain_with(&opts.chain))
            .map(|c| c.order());
        match order {
            Ok(o) if o == omega5_order(field.order() as u64) => {}
            Ok(o) => return Some(format!("group order {o}")),
            Err(e) => return Some(e.to_string()),
        }
    }
    None
}

/// Assembles and fully verifies the direct rank 4 family for one `(alpha, beta)`.
pub fn build_rank4_direct(
    field: &Arc<Field>,
    alpha: FieldElement,
    beta: FieldElement,
    opts: &VerifyOptions,
) -> Result<SCGRep> {
    let gens = rank4_direct_generators(field, alpha, beta)?;
    let tag = |msg: String| {
        ScgError::VerificationFailed(format!("alpha = {}, beta = {}: {msg}", alpha.value(), beta.value()))
    };
    let rep = SCGRep::new(field.clone(), gens).map_err(|e| tag(e.to_string()))?;
    let rep = rep.verify(opts, None)?;
    let report = rep.report().expect("verified");
    if !report.verified {
        return Err(tag(report.failure.clone().unwrap_or_default()));
    }
    if report.is_expected_group != Some(true) {
        return Err(tag(format!("group order {:?}", report.group_order)));
    }
    Ok(rep)
}

/// Outcome of the `(alpha, beta)` sweep for the direct rank 4 family.
#[derive(Clone, Debug)]
pub struct Rank4Search {
    pub found: Vec<(FieldElement, FieldElement, SCGRep)>,
    pub candidates: usize,
    pub rejected_denominator: usize,
    pub rejected_quick: usize,
    pub rejected_verification: usize,
    pub complete: bool,
}

/// Sweeps `(alpha, beta)` over `F_q^2` in enumeration order, verifying each
/// candidate outright. Stops after `limit` successes.
pub fn rank4_direct_search(field: &Arc<Field>, opts: &VerifyOptions, limit: usize) -> Rank4Search {
    let f = &**field;
    let pairs: Vec<(FieldElement, FieldElement)> = f
        .elements()
        .flat_map(|a| f.elements().map(move |b| (a, b)))
        .collect();
    let mut out = Rank4Search {
        found: Vec::new(),
        candidates: pairs.len(),
        rejected_denominator: 0,
        rejected_quick: 0,
        rejected_verification: 0,
        complete: true,
    };
    let chunk = rayon::current_num_threads().max(1);
    for block in pairs.chunks(chunk) {
        let results: Vec<_> = block
            .par_iter()
            .map(|&(a, b)| {
                let gens = match rank4_direct_generators(field, a, b) {
                    Ok(g) => g,
                    Err(_) => return (a, b, 0, None),
                };
                if quick_reject(field, &gens, opts).is_some() {
                    return (a, b, 1, None);
                }
                match build_rank4_direct(field, a, b, opts) {
                    Ok(rep) => (a, b, 3, Some(rep)),
                    Err(_) => (a, b, 2, None),
                }
            })
            .collect();
        for (a, b, code, rep) in results {
            match code {
                0 => out.rejected_denominator += 1,
                1 => out.rejected_quick += 1,
                2 => out.rejected_verification += 1,
                _ => out.found.push((a, b, rep.expect("found"))),
            }
            if out.found.len() >= limit {
                out.complete = false;
                return out;
            }
        }
    }
    out
}

/// Generators of `Omega(V)` for an odd-dimensional form: `-sigma_u` over
/// points whose value lies in the class of `theta(-1)` (q odd), or `sigma_u`
/// over all nonsingular points (q even). Generators are added greedily,
/// skipping any already in the group generated so far.
pub fn omega_generators(form: &QuadraticForm) -> Result<(Vec<Matrix>, StabilizerChain)> {
    let f = form.field().clone();
    let d = form.dim();
    let target = if f.is_even() { None } else { Some(form.theta_minus_identity()?) };
    let mut gens: Vec<Matrix> = Vec::new();
    let mut chain: Option<StabilizerChain> = None;
    for u in form.nonsingular_points(&Subspace::full(d)) {
        let g = match target {
            None => form.symmetry(&u)?,
            Some(c) => {
                if f.square_class(form.phi_eval(&u))? != c {
                    continue;
                }
                form.symmetry(&u)?.neg(&f)
            }
        };
        if chain.as_ref().is_some_and(|c| c.contains(&g)) {
            continue;
        }
        gens.push(g);
        chain = Some(GeneratedGroup::new(f.clone(), gens.clone())?.chain()?);
    }
    let chain = chain.ok_or(ScgError::NoGenerators)?;
    Ok((gens, chain))
}

/// Square class of `theta(-1)` for the form, or `EvenChar`.
pub fn theta_minus_one(form: &QuadraticForm) -> Result<SquareClass> {
    if form.field().is_even() {
        Ok(SquareClass::EvenChar)
    } else {
        form.theta_minus_identity()
    }
}
