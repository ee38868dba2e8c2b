//! Quadratic forms and orthogonal geometry.
//!
//! A form is given by an upper-triangular Gram matrix `Phi` with
//! `Phi[i][i] = phi(e_i)` and `Phi[i][j] = (e_i, e_j)` for `i < j`. The
//! polar form has matrix `B = Phi + Phi^tr`.

use std::sync::Arc;

use crate::error::{Result, ScgError};
use crate::ffield::{Field, FieldElement, SquareClass};
use crate::matlin::{
    dot, is_zero_vector, projective_points, rank_of_rows, right_kernel, support, unit_vector,
    vec_add, vec_axpy, zero_vector, Matrix, Subspace, Vector,
};

#[derive(Clone, Debug)]
pub struct QuadraticForm {
    field: Arc<Field>,
    phi: Matrix,
    gram: Matrix,
}

impl QuadraticForm {
    /// Builds a form from its upper-triangular matrix, rejecting matrices
    /// with entries below the diagonal and forms whose radical is not the
    /// allowed one (zero, or a single anisotropic line in odd dimension over
    /// a field of characteristic two).
    pub fn new(field: Arc<Field>, phi: Matrix) -> Result<QuadraticForm> {
        let d = phi.dim();
        for i in 0..d {
            for j in 0..i {
                if !phi.get(i, j).is_zero() {
                    return Err(ScgError::DegenerateForm(format!(
                        "Phi has a nonzero entry below the diagonal at ({i}, {j})"
                    )));
                }
            }
        }
        let gram = phi.add(&phi.transpose(), &field);
        let form = QuadraticForm { field, phi, gram };
        if !form.is_nonsingular(&Subspace::full(d)) {
            let rad = form.radical(&Subspace::full(d));
            return Err(ScgError::DegenerateForm(format!(
                "radical has dimension {} (d = {d}, q = {})",
                rad.dim(),
                form.field.order()
            )));
        }
        Ok(form)
    }

    /// The form `sum x_i^2` (odd characteristic).
    pub fn standard(field: Arc<Field>, d: usize) -> Result<QuadraticForm> {
        if field.is_even() {
            return Err(ScgError::EvenCharacteristic);
        }
        QuadraticForm::new(field, Matrix::identity(d))
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.phi.dim()
    }

    /// Upper-triangular matrix `Phi`.
    pub fn phi(&self) -> &Matrix {
        &self.phi
    }

    /// Matrix of the polar form, `Phi + Phi^tr`.
    pub fn gram(&self) -> &Matrix {
        &self.gram
    }

    /// `phi(v) = v Phi v^tr`.
    pub fn phi_eval(&self, v: &[FieldElement]) -> FieldElement {
        let f = &*self.field;
        let d = self.dim();
        let mut acc = FieldElement::ZERO;
        for i in 0..d {
            if v[i].is_zero() {
                continue;
            }
            let mut row = FieldElement::ZERO;
            for j in i..d {
                row = f.mul_add(self.phi.get(i, j), v[j], row);
            }
            acc = f.mul_add(v[i], row, acc);
        }
        acc
    }

    /// Polar form `(u, v) = phi(u + v) - phi(u) - phi(v) = u B v^tr`.
    pub fn bform(&self, u: &[FieldElement], v: &[FieldElement]) -> FieldElement {
        dot(&self.field, &self.gram.apply(u, &self.field), v)
    }

    /// `U^perp = {v : (v, U) = 0}`.
    pub fn perp(&self, u: &Subspace) -> Subspace {
        let f = &*self.field;
        let d = self.dim();
        if u.dim() == 0 {
            return Subspace::full(d);
        }
        let rows: Vec<Vector> = u.basis().iter().map(|b| self.gram.apply(b, f)).collect();
        Subspace::span(f, d, &right_kernel(f, &rows, d))
    }

    /// `U cap U^perp`.
    pub fn radical(&self, u: &Subspace) -> Subspace {
        u.intersection(&self.field, &self.perp(u))
    }

    /// Whether the restriction of the form to `U` is nondegenerate in the
    /// sense used throughout: trivial radical, except in odd dimension over a
    /// field of characteristic two, where the radical must be a single line
    /// `<z>` with `phi(z) != 0`.
    pub fn is_nonsingular(&self, u: &Subspace) -> bool {
        let f = &*self.field;
        let k = u.dim();
        if k == 0 {
            return true;
        }
        let basis = u.basis();
        let gram_rows: Vec<Vector> = basis
            .iter()
            .map(|bi| basis.iter().map(|bj| self.bform(bi, bj)).collect())
            .collect();
        let r = rank_of_rows(f, &gram_rows);
        if !f.is_even() || k % 2 == 0 {
            return r == k;
        }
        if r != k - 1 {
            return false;
        }
        let kernel = right_kernel(f, &gram_rows, k);
        let coords = &kernel[0];
        let z = basis
            .iter()
            .zip(coords.iter())
            .fold(zero_vector(self.dim()), |acc, (b, &c)| vec_axpy(f, &acc, c, b));
        !self.phi_eval(&z).is_zero()
    }

    pub fn is_nonsingular_vector(&self, v: &[FieldElement]) -> bool {
        !self.phi_eval(v).is_zero()
    }

    /// Matrix of the symmetry `sigma_u : v -> v - ((u, v) / phi(u)) u`.
    pub fn symmetry(&self, u: &[FieldElement]) -> Result<Matrix> {
        let f = &*self.field;
        let d = self.dim();
        let phi_u = self.phi_eval(u);
        if phi_u.is_zero() {
            return Err(ScgError::SingularVector);
        }
        let c = f.inv(phi_u)?;
        // row i is e_i - c (e_i, u) u
        let w = self.gram.apply_column(u, f);
        let mut m = Matrix::identity(d);
        for i in 0..d {
            let coef = f.mul(c, w[i]);
            if coef.is_zero() {
                continue;
            }
            for j in 0..d {
                m.set(i, j, f.sub(m.get(i, j), f.mul(coef, u[j])));
            }
        }
        Ok(m)
    }

    /// Exact isometry test: `phi(e_i g) = phi(e_i)` for each basis vector and
    /// `(e_i g, e_j g) = (e_i, e_j)` for every pair `i < j`.
    pub fn is_isometry(&self, g: &Matrix) -> bool {
        let f = &*self.field;
        let d = self.dim();
        if g.dim() != d {
            return false;
        }
        let images: Vec<Vector> = (0..d).map(|i| g.row(i).iter().copied().collect()).collect();
        for i in 0..d {
            if self.phi_eval(&images[i]) != self.phi.get(i, i) {
                return false;
            }
            for j in i + 1..d {
                if self.bform(&images[i], &images[j]) != self.phi.get(i, j) {
                    return false;
                }
            }
        }
        !g.det(f).is_zero()
    }

    /// `dim [V, g] mod 2`.
    pub fn pi_map(&self, g: &Matrix) -> Result<u8> {
        if !self.is_isometry(g) {
            return Err(ScgError::NotIsometry);
        }
        Ok((support(g, &self.field).dim() % 2) as u8)
    }

    /// Spinor norm of `sigma_u`: the square class of `phi(u)`.
    pub fn spinor_norm_symmetry(&self, u: &[FieldElement]) -> Result<SquareClass> {
        if self.field.is_even() {
            return Err(ScgError::EvenCharacteristic);
        }
        let v = self.phi_eval(u);
        if v.is_zero() {
            return Err(ScgError::SingularVector);
        }
        self.field.square_class(v)
    }

    /// Pairwise orthogonal nonsingular basis, starting from the standard
    /// basis.
    pub fn orthogonalize(&self) -> Result<Vec<Vector>> {
        let start: Vec<Vector> = (0..self.dim()).map(|i| unit_vector(self.dim(), i)).collect();
        self.orthogonalize_from(&start)
    }

    /// Gram-Schmidt over a spanning list. At each step every candidate is
    /// projected onto the orthogonal complement of the vectors chosen so far;
    /// the first projection with `phi != 0` is taken. If all projections are
    /// singular, the first pair `v, w` with `(v, w) != 0` is combined into
    /// `v + w`, which has `phi(v + w) = (v, w) != 0`.
    pub fn orthogonalize_from(&self, start: &[Vector]) -> Result<Vec<Vector>> {
        let f = &*self.field;
        if f.is_even() {
            return Err(ScgError::EvenCharacteristic);
        }
        let d = self.dim();
        let mut chosen: Vec<Vector> = Vec::with_capacity(d);
        // (w, w) = 2 phi(w), inverted once per chosen vector
        let mut norms_inv: Vec<FieldElement> = Vec::with_capacity(d);
        while chosen.len() < d {
            let projected: Vec<Vector> = start
                .iter()
                .map(|v| {
                    chosen.iter().zip(&norms_inv).fold(v.clone(), |acc, (w, &ninv)| {
                        let c = f.neg(f.mul(self.bform(v, w), ninv));
                        vec_axpy(f, &acc, c, w)
                    })
                })
                .filter(|v| !is_zero_vector(v))
                .collect();
            let next = match projected.iter().find(|v| self.is_nonsingular_vector(v)) {
                Some(v) => v.clone(),
                None => {
                    let mut pick = None;
                    'outer: for (a, v) in projected.iter().enumerate() {
                        for w in &projected[a + 1..] {
                            if !self.bform(v, w).is_zero() {
                                pick = Some(vec_add(f, v, w));
                                break 'outer;
                            }
                        }
                    }
                    pick.ok_or_else(|| {
                        ScgError::DegenerateForm(
                            "orthogonal complement is totally singular".into(),
                        )
                    })?
                }
            };
            let n = self.bform(&next, &next);
            norms_inv.push(f.inv(n)?);
            chosen.push(next);
        }
        Ok(chosen)
    }

    /// `theta(-1)`: the square class of `prod phi(w_i)` over an orthogonal
    /// basis.
    pub fn theta_minus_identity(&self) -> Result<SquareClass> {
        let basis = self.orthogonalize()?;
        self.theta_of_orthogonal_basis(&basis)
    }

    pub fn theta_of_orthogonal_basis(&self, basis: &[Vector]) -> Result<SquareClass> {
        let f = &*self.field;
        let prod = basis
            .iter()
            .fold(FieldElement::ONE, |acc, w| f.mul(acc, self.phi_eval(w)));
        f.square_class(prod)
    }

    /// Spinor norm of `sigma_{u_1} .. sigma_{u_r}`.
    pub fn theta_of_symmetry_product(&self, us: &[Vector]) -> Result<SquareClass> {
        us.iter().try_fold(SquareClass::Square, |acc, u| {
            Ok(acc.mul(self.spinor_norm_symmetry(u)?))
        })
    }

    /// Representatives of the nonsingular points of `P(U)`.
    pub fn nonsingular_points(&self, u: &Subspace) -> Vec<Vector> {
        let f = &*self.field;
        projective_points(f, u.dim())
            .map(|coords| {
                u.basis()
                    .iter()
                    .zip(coords.iter())
                    .fold(zero_vector(self.dim()), |acc, (b, &c)| vec_axpy(f, &acc, c, b))
            })
            .filter(|v| self.is_nonsingular_vector(v))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matlin::{eigenspace_dim, fixed_space, mat_order};
    use proptest::prelude::*;

    fn field(q: u32) -> Arc<Field> {
        Arc::new(Field::with_order(q).unwrap())
    }

    fn v(f: &Field, xs: &[i64]) -> Vector {
        xs.iter().map(|&x| f.from_i64(x)).collect()
    }

    /// Phi(a_1, .., a_d): diagonal a_i, superdiagonal 1.
    fn string_form(f: &Arc<Field>, diag: &[FieldElement]) -> QuadraticForm {
        let d = diag.len();
        let mut m = Matrix::diagonal(diag);
        for i in 0..d - 1 {
            m.set(i, i + 1, FieldElement::ONE);
        }
        QuadraticForm::new(f.clone(), m).unwrap()
    }

    fn phi_odd(f: &Arc<Field>, xi: i64, alpha: i64) -> QuadraticForm {
        let d = [1, xi * xi, 1, alpha * alpha, 1].map(|x| f.from_i64(x));
        string_form(f, &d)
    }

    #[test]
    fn phi_eval_examples() {
        let f = field(11);
        let form = phi_odd(&f, 3, 2);
        assert_eq!(form.phi_eval(&zero_vector(5)), FieldElement::ZERO);
        assert_eq!(form.phi_eval(&unit_vector(5, 1)), f.from_i64(9));
        // phi(-u1 + 2u2 - u3) = 4 xi^2 - 2 = 34 = 1 mod 11
        assert_eq!(form.phi_eval(&v(&f, &[-1, 2, -1, 0, 0])), f.from_i64(1));
    }

    #[test]
    fn polarization() {
        let f = field(7);
        let form = phi_odd(&f, 2, 3);
        let x = v(&f, &[1, 2, 3, 4, 5]);
        let y = v(&f, &[6, 0, 1, 1, 2]);
        let lhs = form.bform(&x, &y);
        let rhs = f.sub(
            f.sub(form.phi_eval(&vec_add(&f, &x, &y)), form.phi_eval(&x)),
            form.phi_eval(&y),
        );
        assert_eq!(lhs, rhs);
        assert_eq!(form.bform(&x, &x), f.mul(f.from_i64(2), form.phi_eval(&x)));

        let f2 = field(4);
        let form2 = string_form(&f2, &[FieldElement::ONE; 5]);
        assert_eq!(form2.bform(&x_even(&f2), &x_even(&f2)), FieldElement::ZERO);
    }

    fn x_even(f: &Field) -> Vector {
        (0..5).map(|i| f.element(i % 4).unwrap()).collect()
    }

    #[test]
    fn string_template_bilinear_values() {
        let f = field(13);
        let form = phi_odd(&f, 2, 5);
        for i in 0..5 {
            for j in 0..5 {
                let b = form.bform(&unit_vector(5, i), &unit_vector(5, j));
                if i.abs_diff(j) == 1 {
                    assert_eq!(b, FieldElement::ONE);
                } else if i != j {
                    assert_eq!(b, FieldElement::ZERO);
                }
            }
        }
    }

    #[test]
    fn perp_of_odd_basis_vectors() {
        let f = field(11);
        let form = phi_odd(&f, 3, 2);
        let u = Subspace::span(&f, 5, &[unit_vector(5, 0), unit_vector(5, 2), unit_vector(5, 4)]);
        let expect = Subspace::span(
            &f,
            5,
            &[v(&f, &[-1, 2, -1, 0, 0]), v(&f, &[0, 0, -1, 2, -1])],
        );
        assert_eq!(form.perp(&u), expect);
        assert_eq!(form.perp(&Subspace::zero(5)), Subspace::full(5));
        // perp is an involution for a nondegenerate form
        assert_eq!(form.perp(&form.perp(&u)), u);
    }

    #[test]
    fn nonsingularity() {
        let f = field(5);
        let form = QuadraticForm::standard(f.clone(), 3).unwrap();
        let line = Subspace::span(&f, 3, &[v(&f, &[1, 0, 0])]);
        assert!(form.is_nonsingular(&line));
        // 1 + 4 = 0 mod 5
        let iso = Subspace::span(&f, 3, &[v(&f, &[1, 2, 0])]);
        assert!(!form.is_nonsingular(&iso));
    }

    #[test]
    fn degenerate_forms_rejected() {
        let f = field(5);
        let mut m = Matrix::identity(3);
        m.set(2, 2, FieldElement::ZERO);
        assert!(matches!(
            QuadraticForm::new(f.clone(), m),
            Err(ScgError::DegenerateForm(_))
        ));
        let mut lower = Matrix::identity(3);
        lower.set(1, 0, FieldElement::ONE);
        assert!(QuadraticForm::new(f, lower).is_err());
        // odd dimension, characteristic two: radical must be anisotropic
        let f2 = field(2);
        let mut m2 = Matrix::zero(3);
        m2.set(0, 1, FieldElement::ONE);
        assert!(QuadraticForm::new(f2.clone(), m2.clone()).is_err());
        m2.set(2, 2, FieldElement::ONE);
        assert!(QuadraticForm::new(f2, m2).is_ok());
    }

    #[test]
    fn symmetry_examples() {
        let f = field(5);
        let form = string_form(&f, &[FieldElement::ONE, FieldElement::ONE]);
        let s = form.symmetry(&unit_vector(2, 0)).unwrap();
        assert_eq!(s.apply(&unit_vector(2, 0), &f), v(&f, &[-1, 0]));
        assert_eq!(s.apply(&unit_vector(2, 1), &f), v(&f, &[-1, 1]));

        let f7 = field(7);
        let form7 = phi_odd(&f7, 2, 3);
        let u = v(&f7, &[1, 2, 0, 1, 3]);
        let s = form7.symmetry(&u).unwrap();
        let s2 = form7.symmetry(&crate::matlin::vec_scale(&f7, f7.from_i64(2), &u)).unwrap();
        assert_eq!(s, s2);
        assert_eq!(s.apply(&u, &f7), crate::matlin::vec_scale(&f7, f7.from_i64(-1), &u));
        assert!(s.mul(&s, &f7).is_identity());
        assert_eq!(s.det(&f7), f7.from_i64(-1));
        assert!(form7.is_isometry(&s));
        assert_eq!(fixed_space(&s, &f7), form7.perp(&Subspace::span(&f7, 5, &[u.clone()])));
        assert_eq!(crate::matlin::support(&s, &f7), Subspace::span(&f7, 5, &[u.clone()]));
        assert_eq!(mat_order(&s, 10, &f7).unwrap(), 2);
        assert_eq!(eigenspace_dim(&s, f7.from_i64(-1), &f7), 1);
        assert_eq!(eigenspace_dim(&s.neg(&f7), FieldElement::ONE, &f7), 1);

        // x^2 + xy + y^2 is anisotropic over GF(5); x^2 + y^2 is not
        assert!(form.symmetry(&v(&f, &[1, 2])).is_ok());
        let split = QuadraticForm::standard(f.clone(), 2).unwrap();
        assert_eq!(split.symmetry(&v(&f, &[1, 2])), Err(ScgError::SingularVector));
    }

    #[test]
    fn even_characteristic_symmetry_is_transvection() {
        let f = field(8);
        let form = string_form(&f, &[FieldElement::ONE; 5]);
        let u = unit_vector(5, 2);
        let s = form.symmetry(&u).unwrap();
        assert!(s.mul(&s, &f).is_identity());
        assert!(form.is_isometry(&s));
        assert_eq!(crate::matlin::support(&s, &f).dim(), 1);
        assert_eq!(form.spinor_norm_symmetry(&u), Err(ScgError::EvenCharacteristic));
    }

    #[test]
    fn isometry_negative_case() {
        let f = field(7);
        let form = QuadraticForm::standard(f.clone(), 3).unwrap();
        assert!(form.is_isometry(&Matrix::identity(3)));
        let g = Matrix::diagonal(&[f.from_i64(3), FieldElement::ONE, FieldElement::ONE]);
        assert!(!form.is_isometry(&g));
        assert_eq!(form.pi_map(&g), Err(ScgError::NotIsometry));
    }

    #[test]
    fn pi_examples() {
        let f = field(5);
        let form = QuadraticForm::standard(f.clone(), 4).unwrap();
        let a = form.symmetry(&unit_vector(4, 0)).unwrap();
        let b = form.symmetry(&v(&f, &[1, 1, 0, 0])).unwrap();
        assert_eq!(form.pi_map(&a).unwrap(), 1);
        assert_eq!(form.pi_map(&a.mul(&b, &f)).unwrap(), 0);
        assert_eq!(form.pi_map(&Matrix::identity(4)).unwrap(), 0);
    }

    #[test]
    fn spinor_norm_examples() {
        let f = field(11);
        let form = phi_odd(&f, 3, 2);
        assert_eq!(form.spinor_norm_symmetry(&unit_vector(5, 0)).unwrap(), SquareClass::Square);
        let f5 = field(5);
        let form5 = QuadraticForm::standard(f5.clone(), 2).unwrap();
        // phi(1,1) = 2, a non-square mod 5
        assert_eq!(
            form5.spinor_norm_symmetry(&v(&f5, &[1, 1])).unwrap(),
            SquareClass::NonSquare
        );
        assert_eq!(
            form5.spinor_norm_symmetry(&v(&f5, &[2, 2])).unwrap(),
            SquareClass::NonSquare
        );
    }

    #[test]
    fn orthogonalize_examples() {
        let f = field(5);
        let form = string_form(&f, &[FieldElement::ONE, FieldElement::ONE]);
        let w = form.orthogonalize().unwrap();
        assert_eq!(w[0], unit_vector(2, 0));
        // w2 spans the same line as -u1 + 2u2
        assert_eq!(crate::matlin::normalize(&f, &w[1]), crate::matlin::normalize(&f, &v(&f, &[-1, 2])));
        // phi(-u1 + 2u2) = 1 - 2 + 4
        assert_eq!(form.phi_eval(&v(&f, &[-1, 2])), f.from_i64(3));

        let f11 = field(11);
        let form11 = phi_odd(&f11, 3, 2);
        let basis = form11.orthogonalize().unwrap();
        assert_eq!(basis.len(), 5);
        for i in 0..5 {
            assert!(form11.is_nonsingular_vector(&basis[i]));
            for j in 0..i {
                assert!(form11.bform(&basis[i], &basis[j]).is_zero());
            }
        }
        let diag = QuadraticForm::standard(f.clone(), 3).unwrap();
        let b = diag.orthogonalize().unwrap();
        assert_eq!(b, (0..3).map(|i| unit_vector(3, i)).collect::<Vec<_>>());
    }

    #[test]
    fn theta_examples() {
        let f = field(5);
        let one = FieldElement::ONE;
        let form = QuadraticForm::new(f.clone(), Matrix::diagonal(&[one, one, one, one, f.from_i64(2)]))
            .unwrap();
        assert_eq!(form.theta_minus_identity().unwrap(), SquareClass::NonSquare);
        let d1 = QuadraticForm::new(f.clone(), Matrix::diagonal(&[f.from_i64(3)])).unwrap();
        assert_eq!(d1.theta_minus_identity().unwrap(), SquareClass::NonSquare);
    }

    #[test]
    fn theta_from_symmetry_factorisation_of_minus_one() {
        // -1 is the product of the symmetries of an orthogonal basis
        let f = field(11);
        let form = phi_odd(&f, 3, 2);
        let basis = form.orthogonalize().unwrap();
        let prod = basis.iter().fold(Matrix::identity(5), |acc, w| {
            acc.mul(&form.symmetry(w).unwrap(), &f)
        });
        assert_eq!(prod, Matrix::identity(5).neg(&f));
        assert_eq!(
            form.theta_of_symmetry_product(&basis).unwrap(),
            form.theta_minus_identity().unwrap()
        );
    }

    proptest! {
        #[test]
        fn pi_is_a_homomorphism(xs in proptest::collection::vec(0u32..7, 20)) {
            let f = field(7);
            let form = phi_odd(&f, 2, 3);
            let vecs: Vec<Vector> = xs.chunks(5).map(|c| c.iter().map(|&x| f.element(x).unwrap()).collect()).collect();
            let syms: Vec<Matrix> = vecs.iter().filter_map(|u| form.symmetry(u).ok()).collect();
            prop_assume!(syms.len() >= 2);
            let g = syms[0].clone();
            let h = syms[1..].iter().fold(Matrix::identity(5), |a, s| a.mul(s, &f));
            let lhs = form.pi_map(&g.mul(&h, &f)).unwrap();
            let rhs = (form.pi_map(&g).unwrap() + form.pi_map(&h).unwrap()) % 2;
            prop_assert_eq!(lhs, rhs);
            prop_assert_eq!(form.pi_map(&h).unwrap() as usize, (syms.len() - 1) % 2);
        }

        #[test]
        fn random_subspace_rank_nullity(xs in proptest::collection::vec(0u32..5, 15)) {
            let f = field(5);
            let form = QuadraticForm::standard(f.clone(), 5).unwrap();
            let vecs: Vec<Vector> = xs.chunks(5).map(|c| c.iter().map(|&x| f.element(x).unwrap()).collect()).collect();
            let u = Subspace::span(&f, 5, &vecs);
            prop_assert_eq!(u.dim() + form.perp(&u).dim(), 5);
        }
    }
}
