//! String C-group checks: string property, Schläfli type, intersection
//! property over intervals, geometric certificates, rank reduction.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ScgError};
use crate::ffield::{Field, SquareClass};
use crate::group::{
    first_nontrivial_member, intersect_small, intersection_is_subgroup, ChainOptions, ChainStats,
    GeneratedGroup, StabilizerChain,
};
use crate::matlin::{fixed_space, mat_order, support, Matrix, Subspace, Vector};
use crate::quadspace::QuadraticForm;

/// Cap used when computing orders of generator products.
const PRODUCT_ORDER_CAP: u64 = 1 << 32;

/// `|Omega(5, q)| = |PSp(4, q)| = q^4 (q^2 - 1)(q^4 - 1) / gcd(2, q - 1)`.
pub fn omega5_order(q: u64) -> u128 {
    let q = q as u128;
    let g = if q % 2 == 1 { 2 } else { 1 };
    q.pow(4) * (q * q - 1) * (q.pow(4) - 1) / g
}

/// An ordered sequence of involutions with its Schläfli type.
#[derive(Clone, Debug)]
pub struct SCGRep {
    field: Arc<Field>,
    generators: Vec<Matrix>,
    schlafli: Vec<u64>,
    report: Option<VerificationReport>,
}

impl SCGRep {
    /// Validates the involutions and computes the Schläfli type (which is
    /// only meaningful once the string property holds).
    pub fn new(field: Arc<Field>, generators: Vec<Matrix>) -> Result<SCGRep> {
        let first = generators.first().ok_or(ScgError::NoGenerators)?;
        let d = first.dim();
        for (index, g) in generators.iter().enumerate() {
            if g.dim() != d {
                return Err(ScgError::DimMismatch { expected: d, found: g.dim() });
            }
            if g.is_identity() || !g.is_involution(&field) {
                return Err(ScgError::NotInvolution { index });
            }
        }
        let schlafli = schlafli_of(&field, &generators)?;
        Ok(SCGRep { field, generators, schlafli, report: None })
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    pub fn generators(&self) -> &[Matrix] {
        &self.generators
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn dim(&self) -> usize {
        self.generators[0].dim()
    }

    pub fn schlafli(&self) -> &[u64] {
        &self.schlafli
    }

    pub fn report(&self) -> Option<&VerificationReport> {
        self.report.as_ref()
    }

    pub fn group_order(&self) -> Option<u128> {
        self.report.as_ref().and_then(|r| r.group_order)
    }

    pub fn is_verified(&self) -> bool {
        self.report.as_ref().is_some_and(|r| r.verified)
    }

    /// The reversed sequence.
    pub fn dual(&self) -> SCGRep {
        let mut generators = self.generators.clone();
        generators.reverse();
        let mut schlafli = self.schlafli.clone();
        schlafli.reverse();
        SCGRep { field: self.field.clone(), generators, schlafli, report: None }
    }

    /// Runs [`verify`] and attaches the report.
    pub fn verify(mut self, opts: &VerifyOptions, form: Option<&QuadraticForm>) -> Result<SCGRep> {
        let report = verify(&self, opts, form)?;
        self.report = Some(report);
        Ok(self)
    }

    /// Attaches a report produced elsewhere.
    pub fn with_report(mut self, report: VerificationReport) -> SCGRep {
        self.report = Some(report);
        self
    }
}

fn schlafli_of(f: &Field, gens: &[Matrix]) -> Result<Vec<u64>> {
    gens.windows(2)
        .map(|w| mat_order(&w[0].mul(&w[1], f), PRODUCT_ORDER_CAP, f))
        .collect()
}

/// First non-adjacent pair that fails to commute.
pub fn string_violation(rep: &SCGRep) -> Option<(usize, usize)> {
    let f = &*rep.field;
    let n = rep.rank();
    (0..n)
        .flat_map(|i| (i + 2..n).map(move |j| (i, j)))
        .find(|&(i, j)| !rep.generators[i].commutes_with(&rep.generators[j], f))
}

/// True iff all non-adjacent generators commute.
pub fn check_string(rep: &SCGRep) -> Result<bool> {
    for (index, g) in rep.generators.iter().enumerate() {
        if g.is_identity() || !g.is_involution(&rep.field) {
            return Err(ScgError::NotInvolution { index });
        }
    }
    Ok(string_violation(rep).is_none())
}

pub fn schlafli_type(rep: &SCGRep) -> Vec<u64> {
    rep.schlafli.clone()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntersectionMode {
    /// Enumerate small intersections, cosets otherwise.
    Auto,
    Enumerate,
    Coset,
    /// Geometric certificate where it applies, `Auto` elsewhere.
    Geometric,
    /// Geometric certificate and `Auto`, which must agree.
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntersectionMethod {
    Enumerate,
    Coset,
    Geometric,
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub mode: IntersectionMode,
    /// Largest group enumerated by the enumerate method.
    pub enumerate_cap: u128,
    /// In auto mode, enumerate when the smaller group is at most this big.
    pub auto_enumerate_limit: u128,
    /// Largest coset count for the coset method.
    pub coset_cap: u64,
    /// Also run the full power-set check (rank <= 4, order <= `power_set_cap`).
    pub power_set: bool,
    pub power_set_cap: u128,
    pub chain: ChainOptions,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            mode: IntersectionMode::Auto,
            enumerate_cap: 1_000_000,
            auto_enumerate_limit: 20_000,
            coset_cap: 20_000_000,
            power_set: false,
            power_set_cap: 100_000,
            chain: ChainOptions::default(),
        }
    }
}

/// One interval check `<rho_i..rho_{j-1}> cap <rho_{i+1}..rho_j> = <rho_{i+1}..rho_{j-1}>`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalCheck {
    pub i: usize,
    pub j: usize,
    pub order_left: u128,
    pub order_right: u128,
    pub order_middle: u128,
    pub method: IntersectionMethod,
    pub holds: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intersection_order: Option<u128>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coset_count: Option<u64>,
    /// Result of the second method in `Both` mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cross_check: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub rank: usize,
    pub involutions_ok: bool,
    pub string_ok: bool,
    pub schlafli: Vec<u64>,
    pub intervals: Vec<IntervalCheck>,
    pub intersection_ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power_set_ok: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group_order: Option<u128>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain: Option<ChainStats>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_order: Option<u128>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub is_expected_group: Option<bool>,
    pub verified: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

impl VerificationReport {
    fn failed(rep: &SCGRep, involutions_ok: bool, string_ok: bool, failure: String) -> Self {
        VerificationReport {
            rank: rep.rank(),
            involutions_ok,
            string_ok,
            schlafli: rep.schlafli.clone(),
            intervals: Vec::new(),
            intersection_ok: false,
            power_set_ok: None,
            group_order: None,
            chain: None,
            expected_order: None,
            is_expected_group: None,
            verified: false,
            failure: Some(failure),
        }
    }
}

/// Chains of every interval subgroup `<rho_i..rho_j>`.
struct IntervalChains {
    chains: BTreeMap<(usize, usize), StabilizerChain>,
    trivial: StabilizerChain,
}

impl IntervalChains {
    fn build(field: &Arc<Field>, gens: &[Matrix], opts: &ChainOptions, max_len: usize) -> Result<Self> {
        let n = gens.len();
        let keys: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (i..n).map(move |j| (i, j)))
            .filter(|&(i, j)| j - i < max_len)
            .collect();
        let built: Result<Vec<_>> = keys
            .par_iter()
            .map(|&(i, j)| {
                let g = GeneratedGroup::new(field.clone(), gens[i..=j].to_vec())?;
                Ok(((i, j), g.chain_with(opts)?))
            })
            .collect();
        let d = gens[0].dim();
        let trivial = GeneratedGroup::new(field.clone(), vec![Matrix::identity(d)])?.chain()?;
        Ok(IntervalChains { chains: built?.into_iter().collect(), trivial })
    }

    /// Chain of `<rho_i..rho_j>`, the trivial group when `j < i`.
    fn get(&self, i: usize, j: isize) -> &StabilizerChain {
        if j < i as isize {
            &self.trivial
        } else {
            &self.chains[&(i, j as usize)]
        }
    }
}

fn interval_pairs(n: usize) -> Vec<(usize, usize)> {
    (1..n)
        .flat_map(|len| (0..n - len).map(move |i| (i, i + len)))
        .collect()
}

fn check_by_enumeration(
    a: &StabilizerChain,
    b: &StabilizerChain,
    c: &StabilizerChain,
    cap: u128,
) -> Result<(bool, u128)> {
    let meet = intersect_small(a, b, cap)?;
    Ok((meet.order() == c.order(), meet.order()))
}

fn check_interval_algebraic(
    i: usize,
    j: usize,
    a: &StabilizerChain,
    b: &StabilizerChain,
    c: &StabilizerChain,
    mode: IntersectionMode,
    opts: &VerifyOptions,
) -> Result<IntervalCheck> {
    let small = a.order().min(b.order());
    let use_enum = match mode {
        IntersectionMode::Enumerate => true,
        IntersectionMode::Coset => false,
        _ => small <= opts.auto_enumerate_limit,
    };
    let mut check = IntervalCheck {
        i,
        j,
        order_left: a.order(),
        order_right: b.order(),
        order_middle: c.order(),
        method: IntersectionMethod::Coset,
        holds: false,
        intersection_order: None,
        coset_count: None,
        cross_check: None,
    };
    if use_enum {
        let (holds, order) = check_by_enumeration(a, b, c, opts.enumerate_cap)?;
        check.method = IntersectionMethod::Enumerate;
        check.holds = holds;
        check.intersection_order = Some(order);
    } else {
        let res = intersection_is_subgroup(a, b, c, opts.coset_cap)?;
        check.holds = res.holds;
        check.coset_count = Some(res.index);
    }
    Ok(check)
}

/// Full verification: involutions, string property, interval intersection
/// checks (smallest intervals first) and the group order.
pub fn verify(
    rep: &SCGRep,
    opts: &VerifyOptions,
    form: Option<&QuadraticForm>,
) -> Result<VerificationReport> {
    check_string(rep)?;
    if let Some((i, j)) = string_violation(rep) {
        return Ok(VerificationReport::failed(
            rep,
            true,
            false,
            format!("string property: rho_{i} and rho_{j} do not commute"),
        ));
    }
    let f = rep.field.clone();
    let n = rep.rank();
    let chains = IntervalChains::build(&f, &rep.generators, &opts.chain, n)?;
    let full = chains.get(0, n as isize - 1);

    let certificate = match opts.mode {
        IntersectionMode::Geometric | IntersectionMode::Both => {
            let form = form.ok_or_else(|| {
                ScgError::VerificationFailed("geometric mode needs the quadratic form".into())
            })?;
            Some(geometric_intersection_certificate(rep, form)?)
        }
        _ => None,
    };

    let mut intervals = Vec::new();
    let pairs = interval_pairs(n);
    for len in 1..n {
        let level: Vec<(usize, usize)> =
            pairs.iter().copied().filter(|&(i, j)| j - i == len).collect();
        let checks: Result<Vec<IntervalCheck>> = level
            .par_iter()
            .map(|&(i, j)| {
                let a = chains.get(i, j as isize - 1);
                let b = chains.get(i + 1, j as isize);
                let c = chains.get(i + 1, j as isize - 1);
                let geo = certificate
                    .as_ref()
                    .filter(|cert| cert.certifies(i, j));
                match (opts.mode, geo) {
                    (IntersectionMode::Geometric, Some(_)) => Ok(IntervalCheck {
                        i,
                        j,
                        order_left: a.order(),
                        order_right: b.order(),
                        order_middle: c.order(),
                        method: IntersectionMethod::Geometric,
                        holds: true,
                        intersection_order: None,
                        coset_count: None,
                        cross_check: None,
                    }),
                    (IntersectionMode::Both, Some(_)) => {
                        let mut chk = check_interval_algebraic(
                            i, j, a, b, c, IntersectionMode::Auto, opts,
                        )?;
                        chk.cross_check = Some(true);
                        Ok(chk)
                    }
                    (IntersectionMode::Geometric | IntersectionMode::Both, None) => {
                        check_interval_algebraic(i, j, a, b, c, IntersectionMode::Auto, opts)
                    }
                    (mode, _) => check_interval_algebraic(i, j, a, b, c, mode, opts),
                }
            })
            .collect();
        intervals.extend(checks?);
    }
    let mut failure = intervals
        .iter()
        .find(|c| !c.holds)
        .map(|c| format!("intersection property fails at interval ({}, {})", c.i, c.j));
    if failure.is_none() {
        if let Some(c) = intervals.iter().find(|c| c.cross_check == Some(true) && !c.holds) {
            failure = Some(format!("methods disagree at interval ({}, {})", c.i, c.j));
        }
    }
    let intersection_ok = failure.is_none();

    let power_set_ok = if opts.power_set && n <= 4 && full.order() <= opts.power_set_cap {
        let ok = power_set_check(&f, &rep.generators, opts.power_set_cap)?;
        if !ok && failure.is_none() {
            failure = Some("power-set intersection check fails".into());
        }
        Some(ok)
    } else {
        None
    };

    let group_order = full.order();
    let expected_order = (rep.dim() == 5).then(|| omega5_order(f.order() as u64));
    Ok(VerificationReport {
        rank: n,
        involutions_ok: true,
        string_ok: true,
        schlafli: rep.schlafli.clone(),
        intervals,
        intersection_ok,
        power_set_ok,
        group_order: Some(group_order),
        chain: Some(full.stats()),
        expected_order,
        is_expected_group: expected_order.map(|e| e == group_order),
        verified: failure.is_none(),
        failure,
    })
}

/// Checks `<rho_I> cap <rho_J> = <rho_{I cap J}>` for every pair of index
/// subsets by explicit enumeration.
pub fn power_set_check(field: &Arc<Field>, gens: &[Matrix], cap: u128) -> Result<bool> {
    let n = gens.len();
    let d = gens[0].dim();
    let sets: Result<Vec<FxHashSet<Matrix>>> = (0u32..1 << n)
        .into_par_iter()
        .map(|mask| {
            let sub: Vec<Matrix> = (0..n)
                .filter(|k| mask & (1 << k) != 0)
                .map(|k| gens[k].clone())
                .collect();
            if sub.is_empty() {
                return Ok(std::iter::once(Matrix::identity(d)).collect());
            }
            let chain = GeneratedGroup::new(field.clone(), sub)?.chain()?;
            Ok(chain.enumerate_elements(cap)?.into_iter().collect())
        })
        .collect();
    let sets = sets?;
    for a in 0..sets.len() {
        for b in a + 1..sets.len() {
            let meet = sets[a].iter().filter(|x| sets[b].contains(*x)).count();
            if meet != sets[a & b].len() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Span check for one interval `<u_i..u_j>` in a geometric certificate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanCheck {
    pub i: usize,
    pub j: usize,
    pub dim: usize,
    pub nonsingular: bool,
    /// Order of `<sigma_{u_i}..sigma_{u_j}>`.
    pub sigma_order: u128,
    /// Whether that group contains every `sigma_w` of the matching class
    /// with `w` in the span, i.e. equals the relevant `Sigma(U)`.
    pub generated: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeometricCertificate {
    /// +1 for `sigma_u` generators, -1 for `-sigma_u`.
    pub sign: i8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<SquareClass>,
    pub spans: Vec<SpanCheck>,
    pub certified_intervals: Vec<(usize, usize)>,
    pub refused_intervals: Vec<(usize, usize, String)>,
    pub certified: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refusal: Option<String>,
}

impl GeometricCertificate {
    pub fn certifies(&self, i: usize, j: usize) -> bool {
        self.certified_intervals.contains(&(i, j))
    }

    fn refused(sign: i8, reason: String) -> Self {
        GeometricCertificate {
            sign,
            class: None,
            spans: Vec::new(),
            certified_intervals: Vec::new(),
            refused_intervals: Vec::new(),
            certified: false,
            refusal: Some(reason),
        }
    }
}

/// Writes `g` as `sign * sigma_u`, returning `(u, sign)`.
pub fn symmetry_vector(form: &QuadraticForm, g: &Matrix) -> Option<(Vector, i8)> {
    let f = &**form.field();
    let s = support(g, f);
    if s.dim() == 1 {
        let u = s.basis()[0].clone();
        if form.symmetry(&u).ok().as_ref() == Some(g) {
            return Some((u, 1));
        }
    }
    if !f.is_even() {
        let fix = fixed_space(g, f);
        if fix.dim() == 1 {
            let u = fix.basis()[0].clone();
            if form.symmetry(&u).ok().map(|s| s.neg(f)).as_ref() == Some(g) {
                return Some((u, -1));
            }
        }
    }
    None
}

/// Certifies the interval intersection checks without enumeration, for
/// generators `sigma_{u_i}` (or all `-sigma_{u_i}`) of `form`.
///
/// For each interval the span `U` must be nonsingular and
/// `<sigma_{u_i}..sigma_{u_j}>` must contain `sigma_w` for every point `w` of
/// `U` whose value lies in the class of the `phi(u_i)` (all nonsingular `w`
/// when q is even), so that it equals `Sigma(U)` restricted to that class.
/// Intersections of such groups are then `Sigma` of the intersection of
/// spans. For negated generators the map `g -> (-1)^pi(g) g` carries these
/// groups onto the interval subgroups of the representation; it preserves
/// the intersection as long as `A cap -B` is empty, which holds when
/// `U_A^perp` and `U_B^perp` are not orthogonal.
pub fn geometric_intersection_certificate(
    rep: &SCGRep,
    form: &QuadraticForm,
) -> Result<GeometricCertificate> {
    let f = form.field().clone();
    let n = rep.rank();
    if rep.dim() != form.dim() {
        return Err(ScgError::DimMismatch { expected: form.dim(), found: rep.dim() });
    }
    let mut us = Vec::with_capacity(n);
    let mut signs = Vec::with_capacity(n);
    for (index, g) in rep.generators.iter().enumerate() {
        let (u, s) = symmetry_vector(form, g).ok_or(ScgError::NotSymmetryForm { index })?;
        us.push(u);
        signs.push(s);
    }
    let sign = if f.is_even() { 1 } else { signs[0] };
    if !f.is_even() && signs.iter().any(|&s| s != sign) {
        return Ok(GeometricCertificate::refused(sign, "mixed signs".into()));
    }
    let class = if f.is_even() {
        None
    } else {
        let c = f.square_class(form.phi_eval(&us[0]))?;
        for u in &us[1..] {
            if f.square_class(form.phi_eval(u))? != c {
                return Ok(GeometricCertificate::refused(
                    sign,
                    "symmetry vectors lie in different square classes".into(),
                ));
            }
        }
        Some(c)
    };
    if Subspace::span(&f, form.dim(), &us).dim() != n {
        return Ok(GeometricCertificate::refused(
            sign,
            "symmetry vectors are linearly dependent".into(),
        ));
    }
    let sigmas: Vec<Matrix> = us.iter().map(|u| form.symmetry(u)).collect::<Result<_>>()?;

    let keys: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i..n).map(move |j| (i, j)))
        .filter(|&(i, j)| j - i + 1 < n)
        .collect();
    let spans: Result<Vec<(SpanCheck, Subspace)>> = keys
        .par_iter()
        .map(|&(i, j)| {
            let span = Subspace::span(&f, form.dim(), &us[i..=j]);
            let nonsingular = form.is_nonsingular(&span);
            let chain = GeneratedGroup::new(f.clone(), sigmas[i..=j].to_vec())?.chain()?;
            let mut generated = nonsingular;
            if nonsingular {
                for w in form.nonsingular_points(&span) {
                    let matches = match class {
                        None => true,
                        Some(c) => f.square_class(form.phi_eval(&w))? == c,
                    };
                    if matches && !chain.contains(&form.symmetry(&w)?) {
                        generated = false;
                        break;
                    }
                }
            }
            let check = SpanCheck {
                i,
                j,
                dim: span.dim(),
                nonsingular,
                sigma_order: chain.order(),
                generated,
            };
            Ok((check, span))
        })
        .collect();
    let spans = spans?;
    let lookup = |i: usize, j: usize| spans.iter().find(|(c, _)| c.i == i && c.j == j);

    let mut certified_intervals = Vec::new();
    let mut refused_intervals = Vec::new();
    for (i, j) in interval_pairs(n) {
        let parts = [(i, j - 1), (i + 1, j)];
        let mut reason = None;
        for &(a, b) in parts.iter().chain((j > i + 1).then_some((i + 1, j - 1)).iter()) {
            let (c, _) = lookup(a, b).expect("interval span computed");
            if !c.nonsingular {
                reason = Some(format!("span ({a}, {b}) is singular"));
                break;
            }
            if !c.generated {
                reason = Some(format!("span ({a}, {b}) not generated by its symmetries"));
                break;
            }
        }
        if reason.is_none() && sign == -1 {
            let ua = &lookup(i, j - 1).unwrap().1;
            let ub = &lookup(i + 1, j).unwrap().1;
            let pa = form.perp(ua);
            let pb = form.perp(ub);
            let linked = pa
                .basis()
                .iter()
                .any(|x| pb.basis().iter().any(|y| !form.bform(x, y).is_zero()));
            if !linked {
                reason = Some("perpendicular spaces are orthogonal; sign transfer unproven".into());
            }
        }
        match reason {
            None => certified_intervals.push((i, j)),
            Some(r) => refused_intervals.push((i, j, r)),
        }
    }
    let certified = refused_intervals.is_empty();
    Ok(GeometricCertificate {
        sign,
        class,
        spans: spans.into_iter().map(|(c, _)| c).collect(),
        certified_intervals,
        refused_intervals,
        certified,
        refusal: None,
    })
}

/// `(rho_1, rho_0 rho_2, rho_3, .., rho_{n-1})`, re-verified from scratch.
pub fn rank_reduce(rep: &SCGRep, opts: &VerifyOptions) -> Result<SCGRep> {
    let n = rep.rank();
    if n < 4 {
        return Err(ScgError::RankTooSmall { rank: n });
    }
    if !rep.is_verified() {
        return Err(ScgError::NotVerified);
    }
    if let Some(k) = rep.schlafli.iter().position(|&p| p == 2) {
        return Err(ScgError::Reducible { index: k + 1 });
    }
    let f = rep.field.clone();
    let g = &rep.generators;
    let p23 = mat_order(&g[2].mul(&g[3], &f), PRODUCT_ORDER_CAP, &f)?;
    if p23 % 2 == 0 {
        return Err(ScgError::EvenOrderObstruction { order: p23 });
    }
    let mut gens = vec![g[1].clone(), g[0].mul(&g[2], &f)];
    gens.extend(g[3..].iter().cloned());
    let reduced = SCGRep::new(f, gens)?.verify(opts, None)?;
    let report = reduced.report().expect("just verified");
    if !report.verified {
        return Err(ScgError::VerificationFailed(format!(
            "rank reduction: {}",
            report.failure.clone().unwrap_or_default()
        )));
    }
    if reduced.group_order() != rep.group_order() {
        return Err(ScgError::VerificationFailed(
            "rank reduction changed the group order".into(),
        ));
    }
    Ok(reduced)
}

/// Outcome for one 6-tuple in [`rank6_violation_witness`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rank6Sample {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rejected: Option<String>,
    pub dim_support_left: usize,
    pub dim_support_right: usize,
    pub dim_support_meet: usize,
    pub order_left: u128,
    pub order_right: u128,
    /// `Some(true)` when a nontrivial element of `L cap R` was found,
    /// `Some(false)` when `L cap R = 1` was established, `None` when the
    /// search exceeded its cap.
    pub nontrivial_meet: Option<bool>,
    /// For tuples with `L cap R = 1`: whether some other interval still
    /// fails the intersection check (`None` when not computed).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intersection_fails_elsewhere: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rank6Report {
    pub samples: usize,
    pub rejected: usize,
    pub confirmed: usize,
    pub counterexamples: usize,
    pub inconclusive: usize,
    /// Counterexamples whose tuple nevertheless fails the intersection
    /// property on another interval.
    pub counterexamples_failing_elsewhere: usize,
    pub min_support_dim: usize,
    pub details: Vec<Rank6Sample>,
}

/// For string 6-tuples of involutions with adjacent orders above 2, checks
/// that `L = <rho_0, rho_1, rho_2>` and `R = <rho_3, rho_4, rho_5>` have
/// meeting supports and a nontrivial common element.
///
/// `L cap R` fixes `C_V(L) + C_V(R)` pointwise, so the witness search runs
/// over the pointwise stabilizer of `C_V(R)` in `L`, read off a chain whose
/// base starts with a basis of `C_V(R)`.
pub fn rank6_violation_witness(
    field: &Arc<Field>,
    form: Option<&QuadraticForm>,
    tuples: &[Vec<Matrix>],
    cap: u128,
) -> Rank6Report {
    let details: Vec<Rank6Sample> = tuples
        .par_iter()
        .map(|t| rank6_sample(field, form, t, cap))
        .collect();
    let rejected = details.iter().filter(|d| d.rejected.is_some()).count();
    let confirmed = details.iter().filter(|d| d.nontrivial_meet == Some(true)).count();
    let counterexamples = details
        .iter()
        .filter(|d| d.rejected.is_none() && d.nontrivial_meet == Some(false))
        .count();
    let inconclusive = details
        .iter()
        .filter(|d| d.rejected.is_none() && d.nontrivial_meet.is_none())
        .count();
    let counterexamples_failing_elsewhere = details
        .iter()
        .filter(|d| d.intersection_fails_elsewhere == Some(true))
        .count();
    let min_support_dim = details
        .iter()
        .filter(|d| d.rejected.is_none())
        .map(|d| d.dim_support_left.min(d.dim_support_right))
        .min()
        .unwrap_or(0);
    Rank6Report {
        samples: details.len(),
        rejected,
        confirmed,
        counterexamples,
        inconclusive,
        counterexamples_failing_elsewhere,
        min_support_dim,
        details,
    }
}

fn rank6_sample(
    field: &Arc<Field>,
    form: Option<&QuadraticForm>,
    t: &[Matrix],
    cap: u128,
) -> Rank6Sample {
    let mut out = Rank6Sample {
        rejected: None,
        dim_support_left: 0,
        dim_support_right: 0,
        dim_support_meet: 0,
        order_left: 0,
        order_right: 0,
        nontrivial_meet: None,
        intersection_fails_elsewhere: None,
    };
    let f = &**field;
    if t.len() != 6 {
        out.rejected = Some(format!("expected 6 generators, got {}", t.len()));
        return out;
    }
    let rep = match SCGRep::new(field.clone(), t.to_vec()) {
        Ok(r) => r,
        Err(e) => {
            out.rejected = Some(e.to_string());
            return out;
        }
    };
    if let Some(form) = form {
        if let Some(k) = t.iter().position(|g| !form.is_isometry(g)) {
            out.rejected = Some(format!("rho_{k} is not an isometry"));
            return out;
        }
    }
    if let Some((i, j)) = string_violation(&rep) {
        out.rejected = Some(format!("rho_{i} and rho_{j} do not commute"));
        return out;
    }
    if rep.schlafli.iter().any(|&p| p <= 2) {
        out.rejected = Some("adjacent product of order <= 2".into());
        return out;
    }
    let d = t[0].dim();
    let span_of = |gs: &[Matrix]| {
        gs.iter()
            .fold(Subspace::zero(d), |acc, g| acc.sum(f, &support(g, f)))
    };
    let fixed_of = |gs: &[Matrix]| {
        gs.iter()
            .fold(Subspace::full(d), |acc, g| acc.intersection(f, &fixed_space(g, f)))
    };
    let (left, right) = (&t[0..3], &t[3..6]);
    let vl = span_of(left);
    let vr = span_of(right);
    out.dim_support_left = vl.dim();
    out.dim_support_right = vr.dim();
    out.dim_support_meet = vl.intersection(f, &vr).dim();

    let chain_with_prefix = |gs: &[Matrix], prefix: &Subspace| -> Result<StabilizerChain> {
        let opts = ChainOptions { base_prefix: prefix.basis().to_vec(), ..ChainOptions::default() };
        GeneratedGroup::new(field.clone(), gs.to_vec())?.chain_with(&opts)
    };
    let cl = fixed_of(left);
    let cr = fixed_of(right);
    let result = (|| -> Result<Option<bool>> {
        let l = chain_with_prefix(left, &cr)?;
        let r = chain_with_prefix(right, &cl)?;
        out.order_left = l.order();
        out.order_right = r.order();
        let lt = l.tail_order(cr.dim());
        let rt = r.tail_order(cl.dim());
        let found = if lt <= rt {
            first_nontrivial_member(&l, cr.dim(), &r, cap)?
        } else {
            first_nontrivial_member(&r, cl.dim(), &l, cap)?
        };
        Ok(Some(found.is_some()))
    })();
    out.nontrivial_meet = result.unwrap_or(None);
    if out.nontrivial_meet == Some(false) {
        out.intersection_fails_elsewhere = rep
            .verify(&VerifyOptions::default(), None)
            .ok()
            .and_then(|r| r.report().map(|rr| !rr.intersection_ok));
    }
    out
}
