//! Stabilizer chains for matrix groups acting on row vectors.
//!
//! The action is on raw nonzero vectors of `F_q^d` (not projective points),
//! so `-I` is distinguished from `I`. Chains are built by Schreier-Sims: a
//! seeded random phase proposes strong generators, then every Schreier
//! generator at every level is sifted, which makes the final chain exact
//! regardless of what the random phase found.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};

use crate::error::{Result, ScgError};
use crate::ffield::Field;
use crate::matlin::{pack, unit_vector, Matrix, Vector};

/// A group given by invertible generators over one field.
#[derive(Clone, Debug)]
pub struct GeneratedGroup {
    field: Arc<Field>,
    dim: usize,
    generators: Vec<Matrix>,
}

impl GeneratedGroup {
    pub fn new(field: Arc<Field>, generators: Vec<Matrix>) -> Result<GeneratedGroup> {
        let first = generators.first().ok_or(ScgError::NoGenerators)?;
        let dim = first.dim();
        for g in &generators {
            if g.dim() != dim {
                return Err(ScgError::DimMismatch { expected: dim, found: g.dim() });
            }
            if g.det(&field).is_zero() {
                return Err(ScgError::Singular);
            }
        }
        Ok(GeneratedGroup { field, dim, generators })
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[Matrix] {
        &self.generators
    }

    pub fn chain(&self) -> Result<StabilizerChain> {
        StabilizerChain::build(self, &ChainOptions::default())
    }

    pub fn chain_with(&self, opts: &ChainOptions) -> Result<StabilizerChain> {
        StabilizerChain::build(self, opts)
    }
}

#[derive(Clone, Debug)]
pub struct ChainOptions {
    /// Largest admissible `q^d`.
    pub domain_cap: u128,
    /// Largest admissible orbit at any level; `None` means `q^d`.
    pub orbit_cap: Option<u64>,
    /// Seed for the random phase.
    pub seed: u64,
    /// Consecutive random elements that must sift to the identity before
    /// the deterministic verification phase starts.
    pub random_streak: usize,
    /// Preferred base points, tried before the standard basis vectors.
    pub base_hints: Vec<Vector>,
    /// Forced leading base points. The stabilizer at level `base_prefix.len()`
    /// is then the pointwise stabilizer of their span.
    pub base_prefix: Vec<Vector>,
}

impl Default for ChainOptions {
    fn default() -> Self {
        ChainOptions {
            domain_cap: 1 << 32,
            orbit_cap: None,
            seed: 0x5eed_0f_c4a1,
            random_streak: 16,
            base_hints: Vec::new(),
            base_prefix: Vec::new(),
        }
    }
}

/// Orbit of a vector, with a Schreier vector for transversal words.
#[derive(Clone, Debug)]
pub struct Orbit {
    points: Vec<Vector>,
    index: FxHashMap<u64, u32>,
    /// `(parent point, generator)` for every point but the root.
    parent: Vec<Option<(u32, u32)>>,
}

impl Orbit {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vector] {
        &self.points
    }

    pub fn position(&self, v: &[crate::ffield::FieldElement], q: u64) -> Option<usize> {
        self.index.get(&pack(v, q)).map(|&k| k as usize)
    }

    /// Generator indices of a word `g_{i_1} .. g_{i_r}` mapping the root to
    /// point `k`.
    pub fn word(&self, k: usize) -> Vec<usize> {
        let mut word = Vec::new();
        let mut cur = k;
        while let Some((p, g)) = self.parent[cur] {
            word.push(g as usize);
            cur = p as usize;
        }
        word.reverse();
        word
    }

    /// The group element spelled by [`Orbit::word`].
    pub fn transversal_element(&self, group: &GeneratedGroup, k: usize) -> Matrix {
        self.word(k)
            .into_iter()
            .fold(Matrix::identity(group.dim), |acc, g| {
                acc.mul(&group.generators[g], &group.field)
            })
    }
}

/// Orbit of `v` under `group`.
pub fn orbit(group: &GeneratedGroup, v: &Vector, cap: Option<u64>) -> Result<Orbit> {
    let q = group.field.order() as u64;
    check_domain(q, group.dim, u64::MAX as u128)?;
    let cap = cap.unwrap_or_else(|| q.saturating_pow(group.dim as u32));
    let mut out = Orbit {
        points: vec![v.clone()],
        index: FxHashMap::default(),
        parent: vec![None],
    };
    out.index.insert(pack(v, q), 0);
    let mut i = 0;
    while i < out.points.len() {
        for (gi, g) in group.generators.iter().enumerate() {
            let img = g.apply(&out.points[i], &group.field);
            let key = pack(&img, q);
            if !out.index.contains_key(&key) {
                if out.points.len() as u64 >= cap {
                    return Err(ScgError::OrbitCapExceeded { cap });
                }
                out.index.insert(key, out.points.len() as u32);
                out.points.push(img);
                out.parent.push(Some((i as u32, gi as u32)));
            }
        }
        i += 1;
    }
    Ok(out)
}

fn check_domain(q: u64, d: usize, cap: u128) -> Result<()> {
    let size = (q as u128).checked_pow(d as u32).unwrap_or(u128::MAX);
    let cap = cap.min(u64::MAX as u128);
    if size > cap {
        return Err(ScgError::DomainTooLarge { size, cap });
    }
    Ok(())
}

#[derive(Clone, Debug)]
struct Level {
    base: Vector,
    gens: Vec<Matrix>,
    gens_inv: Vec<Matrix>,
    orbit: Vec<Vector>,
    index: FxHashMap<u64, u32>,
    trans: Vec<Matrix>,
    trans_inv: Vec<Matrix>,
    /// Schreier generators `(point, gen)` with `point < checked.0` and
    /// `gen < checked.1` are known to sift.
    checked: (usize, usize),
}

impl Level {
    fn new(base: Vector, d: usize, q: u64) -> Level {
        let mut index = FxHashMap::default();
        index.insert(pack(&base, q), 0);
        Level {
            base: base.clone(),
            gens: Vec::new(),
            gens_inv: Vec::new(),
            orbit: vec![base],
            index,
            trans: vec![Matrix::identity(d)],
            trans_inv: vec![Matrix::identity(d)],
            checked: (0, 0),
        }
    }

    fn extend_orbit(&mut self, f: &Field, q: u64, cap: u64) -> Result<()> {
        let mut i = 0;
        while i < self.orbit.len() {
            for s in 0..self.gens.len() {
                let img = self.gens[s].apply(&self.orbit[i], f);
                let key = pack(&img, q);
                if self.index.contains_key(&key) {
                    continue;
                }
                if self.orbit.len() as u64 >= cap {
                    return Err(ScgError::OrbitCapExceeded { cap });
                }
                let t = self.trans[i].mul(&self.gens[s], f);
                let t_inv = self.gens_inv[s].mul(&self.trans_inv[i], f);
                self.index.insert(key, self.orbit.len() as u32);
                self.orbit.push(img);
                self.trans.push(t);
                self.trans_inv.push(t_inv);
            }
            i += 1;
        }
        Ok(())
    }
}

/// Summary statistics of a chain, for reports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainStats {
    pub base_length: usize,
    pub orbit_sizes: Vec<u64>,
    pub order: u128,
}

/// Base and strong generating set with explicit transversals.
#[derive(Clone, Debug)]
pub struct StabilizerChain {
    field: Arc<Field>,
    dim: usize,
    q: u64,
    generators: Vec<Matrix>,
    levels: Vec<Level>,
}

impl StabilizerChain {
    pub fn build(group: &GeneratedGroup, opts: &ChainOptions) -> Result<StabilizerChain> {
        let q = group.field.order() as u64;
        check_domain(q, group.dim, opts.domain_cap)?;
        let orbit_cap = opts
            .orbit_cap
            .unwrap_or_else(|| q.saturating_pow(group.dim as u32));
        let mut chain = StabilizerChain {
            field: group.field.clone(),
            dim: group.dim,
            q,
            generators: group.generators.clone(),
            levels: Vec::new(),
        };
        for b in &opts.base_prefix {
            if b.len() != group.dim {
                return Err(ScgError::DimMismatch { expected: group.dim, found: b.len() });
            }
            chain.levels.push(Level::new(b.clone(), group.dim, q));
        }
        for g in &group.generators {
            let (r, l) = chain.sift_from(g, 0);
            if l < chain.levels.len() || !r.is_identity() {
                chain.add_strong(r, 0, l, orbit_cap, &opts.base_hints)?;
            }
        }
        if chain.levels.iter().all(|l| l.gens.is_empty()) {
            return Ok(chain);
        }
        chain.random_phase(opts, orbit_cap)?;
        chain.verify_phase(orbit_cap, &opts.base_hints)?;
        Ok(chain)
    }

    fn random_phase(&mut self, opts: &ChainOptions, orbit_cap: u64) -> Result<()> {
        let f = self.field.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut state: Vec<Matrix> = self.generators.clone();
        while state.len() < 10 {
            let k = state.len() % self.generators.len();
            state.push(self.generators[k].clone());
        }
        let mut acc = Matrix::identity(self.dim);
        let n = state.len();
        let step = |rng: &mut ChaCha8Rng, state: &mut Vec<Matrix>, acc: &mut Matrix| {
            let i = rng.gen_range(0..n);
            let mut j = rng.gen_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            state[i] = if rng.gen_bool(0.5) {
                state[i].mul(&state[j], &f)
            } else {
                state[i].mul(&state[j].inverse(&f).expect("invertible"), &f)
            };
            *acc = acc.mul(&state[i], &f);
        };
        for _ in 0..50 {
            step(&mut rng, &mut state, &mut acc);
        }
        let mut streak = 0;
        while streak < opts.random_streak {
            step(&mut rng, &mut state, &mut acc);
            let (r, l) = self.sift_from(&acc, 0);
            if l < self.levels.len() || !r.is_identity() {
                // r fixes the first l base points; l >= 1 because level 0
                // already carries every original generator.
                let lo = l.min(1);
                self.add_strong(r, lo, l, orbit_cap, &opts.base_hints)?;
                streak = 0;
            } else {
                streak += 1;
            }
        }
        Ok(())
    }

    fn verify_phase(&mut self, orbit_cap: u64, hints: &[Vector]) -> Result<()> {
        let f = self.field.clone();
        let mut i = self.levels.len() as isize - 1;
        while i >= 0 {
            let li = i as usize;
            let mut found = None;
            let (pc, gc) = self.levels[li].checked;
            let (np, ng) = (self.levels[li].orbit.len(), self.levels[li].gens.len());
            'scan: for s in 0..ng {
                for a in 0..np {
                    if a < pc && s < gc {
                        continue;
                    }
                    let level = &self.levels[li];
                    let img = level.gens[s].apply(&level.orbit[a], &f);
                    let b = level.index[&pack(&img, self.q)] as usize;
                    let sg = level.trans[a]
                        .mul(&level.gens[s], &f)
                        .mul(&level.trans_inv[b], &f);
                    if sg.is_identity() {
                        continue;
                    }
                    let (r, l) = self.sift_from(&sg, li + 1);
                    if l < self.levels.len() || !r.is_identity() {
                        found = Some((r, l));
                        break 'scan;
                    }
                }
            }
            match found {
                Some((r, l)) => {
                    self.add_strong(r, li + 1, l, orbit_cap, hints)?;
                    i = l as isize;
                }
                None => {
                    self.levels[li].checked = (np, ng);
                    i -= 1;
                }
            }
        }
        Ok(())
    }

    /// Adds `h` (which fixes base points `0..lo`) to levels `lo..=hi`,
    /// appending a new level when `hi` is past the end.
    fn add_strong(
        &mut self,
        h: Matrix,
        lo: usize,
        hi: usize,
        orbit_cap: u64,
        hints: &[Vector],
    ) -> Result<()> {
        let f = self.field.clone();
        if hi >= self.levels.len() {
            let base = self.choose_base(&h, hints);
            self.levels.push(Level::new(base, self.dim, self.q));
        }
        let h_inv = h.inverse(&f)?;
        for l in lo..=hi {
            let level = &mut self.levels[l];
            level.gens.push(h.clone());
            level.gens_inv.push(h_inv.clone());
            level.extend_orbit(&f, self.q, orbit_cap)?;
        }
        Ok(())
    }

    fn choose_base(&self, h: &Matrix, hints: &[Vector]) -> Vector {
        let f = &*self.field;
        let std_basis = (0..self.dim).map(|i| unit_vector(self.dim, i));
        hints
            .iter()
            .cloned()
            .chain(std_basis)
            .find(|v| h.apply(v, f) != *v)
            .expect("a non-identity matrix moves some basis vector")
    }

    /// Sifts `g` through levels `from..`; returns the residue and the level
    /// where sifting stopped (`levels.len()` if it went all the way).
    fn sift_from(&self, g: &Matrix, from: usize) -> (Matrix, usize) {
        let mut h = g.clone();
        for l in from..self.levels.len() {
            let level = &self.levels[l];
            let img = h.apply(&level.base, &self.field);
            match level.index.get(&pack(&img, self.q)) {
                None => return (h, l),
                Some(&k) => h = h.mul(&level.trans_inv[k as usize], &self.field),
            }
        }
        (h, self.levels.len())
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[Matrix] {
        &self.generators
    }

    pub fn group(&self) -> GeneratedGroup {
        GeneratedGroup {
            field: self.field.clone(),
            dim: self.dim,
            generators: self.generators.clone(),
        }
    }

    pub fn order(&self) -> u128 {
        self.levels.iter().map(|l| l.orbit.len() as u128).product()
    }

    pub fn base(&self) -> Vec<Vector> {
        self.levels.iter().map(|l| l.base.clone()).collect()
    }

    pub fn stats(&self) -> ChainStats {
        ChainStats {
            base_length: self.levels.len(),
            orbit_sizes: self.levels.iter().map(|l| l.orbit.len() as u64).collect(),
            order: self.order(),
        }
    }

    /// Number of strong generators at each level.
    pub fn strong_generator_counts(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.gens.len()).collect()
    }

    /// Membership by sifting.
    pub fn contains(&self, g: &Matrix) -> bool {
        if g.dim() != self.dim {
            return false;
        }
        let (r, l) = self.sift_from(g, 0);
        l == self.levels.len() && r.is_identity()
    }

    /// Order of the stabilizer at level `k` (the whole group at `k = 0`).
    pub fn tail_order(&self, k: usize) -> u128 {
        self.levels[k.min(self.levels.len())..]
            .iter()
            .map(|l| l.orbit.len() as u128)
            .product()
    }

    /// Every element exactly once, as products of transversal elements.
    pub fn enumerate_elements(&self, cap: u128) -> Result<Vec<Matrix>> {
        self.enumerate_tail(0, cap)
    }

    /// Every element of the stabilizer at level `k`.
    pub fn enumerate_tail(&self, k: usize, cap: u128) -> Result<Vec<Matrix>> {
        let order = self.tail_order(k);
        if order > cap {
            return Err(ScgError::GroupTooLarge { order, cap });
        }
        let f = &*self.field;
        let mut out = vec![Matrix::identity(self.dim)];
        for level in self.levels[k.min(self.levels.len())..].iter().rev() {
            let mut next = Vec::with_capacity(out.len() * level.trans.len());
            for x in &out {
                for t in &level.trans {
                    next.push(x.mul(t, f));
                }
            }
            out = next;
        }
        Ok(out)
    }

    /// Uniformly random element.
    pub fn random_element<R: Rng>(&self, rng: &mut R) -> Matrix {
        let f = &*self.field;
        self.levels
            .iter()
            .rev()
            .fold(Matrix::identity(self.dim), |acc, level| {
                let k = rng.gen_range(0..level.trans.len());
                acc.mul(&level.trans[k], f)
            })
    }

    /// Canonical representative of the right coset `C g`, where `C` is this
    /// chain's group: at each level the transversal element minimising the
    /// image of the base point is absorbed.
    pub fn canonical_coset_rep(&self, g: &Matrix) -> Matrix {
        let f = &*self.field;
        let mut h = g.clone();
        for level in &self.levels {
            let best = level
                .orbit
                .iter()
                .enumerate()
                .map(|(k, pt)| (pack(&h.apply(pt, f), self.q), k))
                .min()
                .expect("orbit is nonempty")
                .1;
            h = level.trans[best].mul(&h, f);
        }
        h
    }
}

/// Chain for the group generated by a list of elements, picking a
/// generating subset greedily.
pub fn chain_from_elements(
    field: &Arc<Field>,
    dim: usize,
    elements: &[Matrix],
) -> Result<StabilizerChain> {
    let mut gens: Vec<Matrix> = Vec::new();
    let mut chain: Option<StabilizerChain> = None;
    for e in elements {
        if e.is_identity() {
            continue;
        }
        if chain.as_ref().is_some_and(|c| c.contains(e)) {
            continue;
        }
        gens.push(e.clone());
        chain = Some(GeneratedGroup::new(field.clone(), gens.clone())?.chain()?);
    }
    match chain {
        Some(c) => Ok(c),
        None => GeneratedGroup::new(field.clone(), vec![Matrix::identity(dim)])?.chain(),
    }
}

/// Explicit intersection of two groups.
#[derive(Clone, Debug)]
pub struct Intersection {
    pub elements: Vec<Matrix>,
    pub chain: StabilizerChain,
}

impl Intersection {
    pub fn order(&self) -> u128 {
        self.elements.len() as u128
    }
}

/// `A cap B` by enumerating the smaller group and filtering by membership
/// in the larger.
pub fn intersect_small(
    a: &StabilizerChain,
    b: &StabilizerChain,
    cap: u128,
) -> Result<Intersection> {
    let (small, large) = if a.order() <= b.order() { (a, b) } else { (b, a) };
    let elements: Vec<Matrix> = small
        .enumerate_elements(cap)?
        .into_iter()
        .filter(|g| large.contains(g))
        .collect();
    let chain = chain_from_elements(&a.field, a.dim, &elements)?;
    Ok(Intersection { elements, chain })
}

/// A nontrivial element of `A cap B`, if any, found by enumerating the
/// smaller group.
pub fn nontrivial_common_element(
    a: &StabilizerChain,
    b: &StabilizerChain,
    cap: u128,
) -> Result<Option<Matrix>> {
    let (small, large) = if a.order() <= b.order() { (a, b) } else { (b, a) };
    first_nontrivial_member(small, 0, large, cap)
}

/// Walks the stabilizer at level `k` of `chain` lazily and returns the first
/// nontrivial element lying in `other`.
pub fn first_nontrivial_member(
    chain: &StabilizerChain,
    k: usize,
    other: &StabilizerChain,
    cap: u128,
) -> Result<Option<Matrix>> {
    let order = chain.tail_order(k);
    if order > cap {
        return Err(ScgError::GroupTooLarge { order, cap });
    }
    let f = &*chain.field;
    let levels = &chain.levels[k.min(chain.levels.len())..];
    let sizes: Vec<usize> = levels.iter().map(|l| l.trans.len()).collect();
    let mut idx = vec![0usize; sizes.len()];
    loop {
        let g = levels
            .iter()
            .zip(&idx)
            .rev()
            .fold(Matrix::identity(chain.dim), |acc, (level, &t)| {
                acc.mul(&level.trans[t], f)
            });
        if !g.is_identity() && other.contains(&g) {
            return Ok(Some(g));
        }
        let mut pos = 0;
        loop {
            if pos == sizes.len() {
                return Ok(None);
            }
            idx[pos] += 1;
            if idx[pos] < sizes[pos] {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// Same group: equal orders and every generator of `A` lies in `B`.
pub fn subgroup_equal(a: &StabilizerChain, b: &StabilizerChain) -> bool {
    a.order() == b.order() && a.generators.iter().all(|g| b.contains(g))
}

/// Outcome of [`intersection_is_subgroup`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CosetCheck {
    pub holds: bool,
    /// Number of right cosets of `C` in the enumerated group.
    pub index: u64,
}

/// Decides `A cap B = C` for `C <= A cap B` without enumerating `A`.
///
/// Every element of `A cap B` lies in a right coset `C a`, and `C a` meets
/// `B` exactly when `a` lies in `B` (as `C <= B`). So it suffices to test one
/// representative of each nontrivial right coset of `C` in `A`. Cosets are
/// enumerated as the orbit of `C` under right multiplication by the
/// generators of `A`, using [`StabilizerChain::canonical_coset_rep`].
pub fn intersection_is_subgroup(
    a: &StabilizerChain,
    b: &StabilizerChain,
    c: &StabilizerChain,
    index_cap: u64,
) -> Result<CosetCheck> {
    let f = &*a.field;
    for g in c.generators() {
        if !a.contains(g) || !b.contains(g) {
            return Err(ScgError::VerificationFailed(
                "candidate intersection is not contained in both groups".into(),
            ));
        }
    }
    // enumerate cosets in whichever of A, B has the smaller index
    let (a, b) = if a.order() <= b.order() { (a, b) } else { (b, a) };
    let expected = a.order() / c.order();
    if expected > index_cap as u128 {
        return Err(ScgError::GroupTooLarge {
            order: a.order(),
            cap: index_cap as u128 * c.order(),
        });
    }
    let start = c.canonical_coset_rep(&Matrix::identity(a.dim));
    let mut seen: FxHashSet<Matrix> = FxHashSet::default();
    seen.insert(start.clone());
    let mut queue = vec![start.clone()];
    let mut holds = true;
    let mut i = 0;
    while i < queue.len() {
        for s in &a.generators {
            let next = c.canonical_coset_rep(&queue[i].mul(s, f));
            if seen.insert(next.clone()) {
                if holds && b.contains(&next) {
                    holds = false;
                }
                queue.push(next);
            }
        }
        i += 1;
    }
    debug_assert_eq!(queue.len() as u128, expected);
    if queue.len() as u128 != expected {
        return Err(ScgError::VerificationFailed(format!(
            "coset count {} disagrees with index {expected}",
            queue.len()
        )));
    }
    Ok(CosetCheck { holds, index: queue.len() as u64 })
}

/// Closure of the generators by breadth-first multiplication. Only for
/// small groups; serves as an independent check on chain orders.
pub fn naive_closure(group: &GeneratedGroup, cap: usize) -> Result<Vec<Matrix>> {
    let f = &*group.field;
    let id = Matrix::identity(group.dim);
    let mut seen: FxHashSet<Matrix> = FxHashSet::default();
    seen.insert(id.clone());
    let mut queue = vec![id];
    let mut i = 0;
    while i < queue.len() {
        for g in &group.generators {
            let x = queue[i].mul(g, f);
            if seen.insert(x.clone()) {
                if queue.len() >= cap {
                    return Err(ScgError::GroupTooLarge {
                        order: queue.len() as u128 + 1,
                        cap: cap as u128,
                    });
                }
                queue.push(x);
            }
        }
        i += 1;
    }
    Ok(queue)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matlin::{zero_vector, Subspace};
    use crate::quadspace::QuadraticForm;

    fn field(q: u32) -> Arc<Field> {
        Arc::new(Field::with_order(q).unwrap())
    }

    fn vecf(f: &Field, xs: &[i64]) -> Vector {
        xs.iter().map(|&x| f.from_i64(x)).collect()
    }

    fn group(f: &Arc<Field>, gens: Vec<Matrix>) -> GeneratedGroup {
        GeneratedGroup::new(f.clone(), gens).unwrap()
    }

    #[test]
    fn trivial_group() {
        let f = field(5);
        let g = group(&f, vec![Matrix::identity(3)]);
        let o = orbit(&g, &unit_vector(3, 0), None).unwrap();
        assert_eq!(o.len(), 1);
        let c = g.chain().unwrap();
        assert_eq!(c.order(), 1);
        assert!(c.contains(&Matrix::identity(3)));
        assert_eq!(c.enumerate_elements(10).unwrap(), vec![Matrix::identity(3)]);
    }

    #[test]
    fn symmetry_orbit_and_membership() {
        let f = field(5);
        let form = QuadraticForm::standard(f.clone(), 5).unwrap();
        let u = vecf(&f, &[1, 1, 0, 0, 0]);
        let s = form.symmetry(&u).unwrap();
        let g = group(&f, vec![s.clone()]);
        let o = orbit(&g, &u, None).unwrap();
        let minus_u = vecf(&f, &[-1, -1, 0, 0, 0]);
        assert_eq!(o.len(), 2);
        assert!(o.position(&minus_u, 5).is_some());
        let k = o.position(&minus_u, 5).unwrap();
        assert_eq!(o.transversal_element(&g, k).apply(&u, &f), minus_u);
        let c = g.chain().unwrap();
        assert_eq!(c.order(), 2);
        assert!(c.contains(&s));
        assert!(!c.contains(&Matrix::identity(5).neg(&f)));
        assert_eq!(c.enumerate_elements(10).unwrap().len(), 2);
    }

    #[test]
    fn commuting_symmetries_give_klein_group() {
        let f = field(7);
        let form = QuadraticForm::standard(f.clone(), 5).unwrap();
        let a = form.symmetry(&unit_vector(5, 0)).unwrap();
        let b = form.symmetry(&vecf(&f, &[0, 1, 1, 0, 0])).unwrap();
        let c = group(&f, vec![a, b]).chain().unwrap();
        assert_eq!(c.order(), 4);
    }

    #[test]
    fn dihedral_group_of_symmetries() {
        // (u, w) != 0 gives a dihedral group of order 2 * order(sigma_u sigma_w)
        let f = field(7);
        let form = QuadraticForm::standard(f.clone(), 3).unwrap();
        let a = form.symmetry(&unit_vector(3, 0)).unwrap();
        let b = form.symmetry(&vecf(&f, &[1, 1, 0])).unwrap();
        let p = crate::matlin::mat_order(&a.mul(&b, &f), 100, &f).unwrap();
        let g = group(&f, vec![a, b]);
        let c = g.chain().unwrap();
        assert_eq!(c.order(), 2 * p as u128);
        assert_eq!(naive_closure(&g, 1000).unwrap().len() as u128, c.order());
        let elems = c.enumerate_elements(1000).unwrap();
        let set: FxHashSet<_> = elems.iter().cloned().collect();
        assert_eq!(set.len(), elems.len());
    }

    #[test]
    fn orthogonal_group_order_and_closure() {
        // O(3, 3) has order 2 * |SO(3,3)| = 2 * 24 = 48
        let f = field(3);
        let form = QuadraticForm::standard(f.clone(), 3).unwrap();
        let sub = Subspace::full(3);
        let gens: Vec<Matrix> = form
            .nonsingular_points(&sub)
            .iter()
            .map(|u| form.symmetry(u).unwrap())
            .collect();
        let g = group(&f, gens);
        let c = g.chain().unwrap();
        assert_eq!(c.order(), 48);
        assert_eq!(naive_closure(&g, 1000).unwrap().len(), 48);
        for x in c.enumerate_elements(100).unwrap() {
            assert!(form.is_isometry(&x));
        }
    }

    #[test]
    fn intersections() {
        let f = field(5);
        let form = QuadraticForm::standard(f.clone(), 3).unwrap();
        let sx = form.symmetry(&unit_vector(3, 0)).unwrap();
        let sy = form.symmetry(&unit_vector(3, 1)).unwrap();
        let a = group(&f, vec![sx.clone()]).chain().unwrap();
        let b = group(&f, vec![sy]).chain().unwrap();
        let i = intersect_small(&a, &b, 100).unwrap();
        assert_eq!(i.order(), 1);
        let same = intersect_small(&a, &a, 100).unwrap();
        assert!(subgroup_equal(&same.chain, &a));
        assert_eq!(nontrivial_common_element(&a, &a, 100).unwrap(), Some(sx));
        assert_eq!(nontrivial_common_element(&a, &b, 100).unwrap(), None);
    }

    #[test]
    fn subgroup_equality() {
        let f = field(7);
        let form = QuadraticForm::standard(f.clone(), 3).unwrap();
        let a = form.symmetry(&unit_vector(3, 0)).unwrap();
        let b = form.symmetry(&vecf(&f, &[1, 1, 0])).unwrap();
        let c = form.symmetry(&vecf(&f, &[1, 1, 1])).unwrap();
        let g1 = group(&f, vec![a.clone(), b.clone(), c.clone()]).chain().unwrap();
        let g2 = group(&f, vec![c, a.clone(), b.clone()]).chain().unwrap();
        assert!(subgroup_equal(&g1, &g2));
        let one = group(&f, vec![a.clone()]).chain().unwrap();
        let two = group(&f, vec![a, b]).chain().unwrap();
        assert!(!subgroup_equal(&one, &two));
    }

    #[test]
    fn coset_method_agrees_with_enumeration() {
        let f = field(5);
        let form = QuadraticForm::standard(f.clone(), 4).unwrap();
        let s = |xs: &[i64]| form.symmetry(&vecf(&f, xs)).unwrap();
        let a = group(&f, vec![s(&[1, 0, 0, 0]), s(&[1, 1, 0, 0]), s(&[0, 1, 1, 0])])
            .chain()
            .unwrap();
        let b = group(&f, vec![s(&[1, 1, 0, 0]), s(&[0, 1, 1, 0]), s(&[0, 0, 1, 1])])
            .chain()
            .unwrap();
        let c = group(&f, vec![s(&[1, 1, 0, 0]), s(&[0, 1, 1, 0])]).chain().unwrap();
        let by_enum = intersect_small(&a, &b, 1 << 20).unwrap();
        let by_coset = intersection_is_subgroup(&a, &b, &c, 1 << 20).unwrap();
        assert_eq!(by_coset.holds, by_enum.order() == c.order());
        assert_eq!(by_coset.index as u128, a.order().min(b.order()) / c.order());
        // a strictly smaller candidate must be rejected
        let c1 = group(&f, vec![s(&[1, 1, 0, 0])]).chain().unwrap();
        assert!(!intersection_is_subgroup(&a, &b, &c1, 1 << 20).unwrap().holds);
    }

    #[test]
    fn canonical_coset_rep_is_constant_on_cosets() {
        let f = field(3);
        let form = QuadraticForm::standard(f.clone(), 4).unwrap();
        let s = |xs: &[i64]| form.symmetry(&vecf(&f, xs)).unwrap();
        let c = group(&f, vec![s(&[1, 0, 0, 0]), s(&[1, 1, 0, 0])]).chain().unwrap();
        let g = s(&[0, 1, 2, 0]).mul(&s(&[0, 0, 1, 0]), &f);
        let rep = c.canonical_coset_rep(&g);
        for x in c.enumerate_elements(1000).unwrap() {
            assert_eq!(c.canonical_coset_rep(&x.mul(&g, &f)), rep);
        }
    }

    #[test]
    fn base_prefix_gives_pointwise_stabilizer() {
        let f = field(3);
        let form = QuadraticForm::standard(f.clone(), 4).unwrap();
        let gens: Vec<Matrix> = form
            .nonsingular_points(&Subspace::full(4))
            .iter()
            .map(|u| form.symmetry(u).unwrap())
            .collect();
        let g = group(&f, gens);
        let full = g.chain().unwrap();
        let prefix = vec![unit_vector(4, 0), unit_vector(4, 1)];
        let opts = ChainOptions { base_prefix: prefix.clone(), ..ChainOptions::default() };
        let c = g.chain_with(&opts).unwrap();
        assert_eq!(c.order(), full.order());
        let tail = c.enumerate_tail(2, 1 << 20).unwrap();
        let expected: Vec<_> = full
            .enumerate_elements(1 << 20)
            .unwrap()
            .into_iter()
            .filter(|x| prefix.iter().all(|b| x.apply(b, &f) == *b))
            .collect();
        assert_eq!(tail.len(), expected.len());
        assert!(tail.iter().all(|x| expected.contains(x)));
    }

    #[test]
    fn domain_cap() {
        let f = field(5);
        let g = group(&f, vec![Matrix::identity(5).neg(&f)]);
        let opts = ChainOptions { domain_cap: 100, ..ChainOptions::default() };
        assert!(matches!(g.chain_with(&opts), Err(ScgError::DomainTooLarge { .. })));
        let o = orbit(&group(&f, vec![Matrix::identity(2).neg(&f)]), &zero_vector(2), Some(1));
        assert!(o.is_ok());
    }
}
