//! Fixtures shared by the benchmarks.

use std::sync::Arc;

use scg_core::constructions::omega_generators;
use scg_core::group::GeneratedGroup;
use scg_core::{Field, Matrix, QuadraticForm, Subspace};

pub fn field(q: u32) -> Arc<Field> {
    Arc::new(Field::with_order(q).expect("prime power"))
}

/// Generators of `Omega(5, q)` for the standard form, q odd.
pub fn omega5(q: u32) -> GeneratedGroup {
    let form = QuadraticForm::standard(field(q), 5).expect("odd q");
    let (gens, _) = omega_generators(&form).expect("generators");
    GeneratedGroup::new(form.field().clone(), gens).expect("group")
}

/// The full orthogonal group of the standard form of dimension `d`.
pub fn orthogonal(d: usize, q: u32) -> GeneratedGroup {
    let form = QuadraticForm::standard(field(q), d).expect("odd q");
    let gens: Vec<Matrix> = form
        .nonsingular_points(&Subspace::full(d))
        .iter()
        .map(|u| form.symmetry(u).expect("nonsingular"))
        .collect();
    GeneratedGroup::new(form.field().clone(), gens).expect("group")
}
