//! Arithmetic in GF(p^e).
//!
//! Elements are stored by their integer encoding: the coefficient vector
//! `(c_0, .., c_{e-1})` of the polynomial-basis representative maps to
//! `c_0 + c_1 p + .. + c_{e-1} p^{e-1}`. The encoding is canonical, so equality
//! of elements is equality of integers, and the same integers appear in every
//! serialized artifact.
//!
//! Multiplication goes through exp/log tables built from a primitive element;
//! addition is digit-wise (XOR in characteristic two).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Result, ScgError};

/// Largest supported field order.
pub const MAX_FIELD_ORDER: u32 = 1 << 20;

/// Below this order the square test uses a precomputed residue table.
const SQUARE_TABLE_LIMIT: u32 = 1 << 16;

/// Below this order (for proper extensions in odd characteristic) addition
/// uses a full table.
const ADD_TABLE_LIMIT: u32 = 256;

/// An element of a finite field, stored by its integer encoding in `[0, q)`.
#[derive(
    Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
#[repr(transparent)]
pub struct FieldElement(u32);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    /// Raw integer encoding.
    #[inline]
    pub fn value(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Quadratic-residue class of a nonzero field element.
///
/// In odd characteristic the nonzero squares form an index-2 subgroup and
/// the classes multiply like `Z/2` (`Square` is the identity). In
/// characteristic two every element is a square.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SquareClass {
    EvenChar,
    Square,
    NonSquare,
}

impl SquareClass {
    /// Product of two classes (the group law of `F^x / (F^x)^2`).
    pub fn mul(self, other: SquareClass) -> SquareClass {
        use SquareClass::*;
        match (self, other) {
            (EvenChar, _) | (_, EvenChar) => EvenChar,
            (Square, c) | (c, Square) => c,
            (NonSquare, NonSquare) => Square,
        }
    }

    /// `0` for squares, `1` for non-squares; `None` in characteristic two.
    pub fn as_z2(self) -> Option<u8> {
        match self {
            SquareClass::EvenChar => None,
            SquareClass::Square => Some(0),
            SquareClass::NonSquare => Some(1),
        }
    }
}

/// The field GF(p^e) with a fixed monic irreducible modulus.
///
/// Immutable after construction; share it behind an `Arc`.
pub struct Field {
    p: u32,
    e: u32,
    q: u32,
    modulus: Vec<u32>,
    generator: FieldElement,
    exp: Vec<u32>,
    log: Vec<u32>,
    neg: Vec<u32>,
    add_table: Option<Vec<u32>>,
    squares: Option<Vec<bool>>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("p", &self.p)
            .field("e", &self.e)
            .field("modulus", &self.modulus)
            .finish()
    }
}

impl Field {
    /// GF(p^e) with the lexicographically least monic irreducible modulus.
    pub fn new(p: u32, e: u32) -> Result<Field> {
        check_params(p, e)?;
        let modulus = least_irreducible(p, e);
        Self::build(p, e, modulus)
    }

    /// GF(q) for a prime power `q`.
    pub fn with_order(q: u32) -> Result<Field> {
        let (p, e) = prime_power(q)
            .ok_or_else(|| ScgError::InvalidField(format!("{q} is not a prime power")))?;
        Field::new(p, e)
    }

    /// GF(p^e) with an explicit modulus, given as `e + 1` little-endian
    /// coefficients with leading coefficient 1.
    pub fn with_modulus(p: u32, e: u32, modulus: &[u32]) -> Result<Field> {
        check_params(p, e)?;
        if modulus.len() != e as usize + 1 || modulus[e as usize] != 1 {
            return Err(ScgError::InvalidField(format!(
                "modulus must be monic of degree {e}"
            )));
        }
        if modulus.iter().any(|&c| c >= p) {
            return Err(ScgError::InvalidField("modulus coefficient out of range".into()));
        }
        if !is_irreducible(modulus, p) {
            return Err(ScgError::InvalidField(format!(
                "modulus {modulus:?} is reducible over GF({p})"
            )));
        }
        Self::build(p, e, modulus.to_vec())
    }

    fn build(p: u32, e: u32, modulus: Vec<u32>) -> Result<Field> {
        let q = p.pow(e);
        let generator = find_primitive(p, e, q, &modulus);
        let n = (q - 1) as usize;
        let mut exp = vec![0u32; 2 * n.max(1)];
        let mut log = vec![0u32; q as usize];
        let mut x = 1u32;
        for i in 0..n {
            exp[i] = x;
            exp[i + n] = x;
            log[x as usize] = i as u32;
            x = slow_mul(x, generator, p, e, &modulus);
        }
        let mut neg = vec![0u32; q as usize];
        for (a, slot) in neg.iter_mut().enumerate() {
            let digits = to_digits(a as u32, p, e);
            let negated: Vec<u32> = digits.iter().map(|&c| (p - c) % p).collect();
            *slot = from_digits(&negated, p);
        }
        let add_table = if e > 1 && p != 2 && q <= ADD_TABLE_LIMIT {
            let mut t = vec![0u32; (q * q) as usize];
            for a in 0..q {
                for b in 0..q {
                    t[(a * q + b) as usize] = digit_add(a, b, p, e);
                }
            }
            Some(t)
        } else {
            None
        };
        let mut field = Field {
            p,
            e,
            q,
            modulus,
            generator: FieldElement(generator),
            exp,
            log,
            neg,
            add_table,
            squares: None,
        };
        if p != 2 && q <= SQUARE_TABLE_LIMIT {
            let mut sq = vec![false; q as usize];
            for a in 1..q {
                let a = FieldElement(a);
                sq[field.mul(a, a).0 as usize] = true;
            }
            field.squares = Some(sq);
        }
        Ok(field)
    }

    #[inline]
    pub fn characteristic(&self) -> u32 {
        self.p
    }

    #[inline]
    pub fn degree(&self) -> u32 {
        self.e
    }

    #[inline]
    pub fn order(&self) -> u32 {
        self.q
    }

    /// Monic modulus, little-endian coefficients (length `e + 1`).
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    /// The primitive element used for the exp/log tables.
    pub fn primitive_element(&self) -> FieldElement {
        self.generator
    }

    #[inline]
    pub fn is_even(&self) -> bool {
        self.p == 2
    }

    #[inline]
    pub fn zero(&self) -> FieldElement {
        FieldElement::ZERO
    }

    #[inline]
    pub fn one(&self) -> FieldElement {
        FieldElement::ONE
    }

    /// Element with the given integer encoding.
    pub fn element(&self, code: u32) -> Result<FieldElement> {
        if code < self.q {
            Ok(FieldElement(code))
        } else {
            Err(ScgError::InvalidField(format!(
                "element code {code} out of range for GF({})",
                self.q
            )))
        }
    }

    /// Image of an integer in the prime subfield.
    pub fn from_i64(&self, n: i64) -> FieldElement {
        FieldElement(n.rem_euclid(self.p as i64) as u32)
    }

    /// Polynomial-basis coefficients, little-endian, length `e`.
    pub fn coeffs(&self, a: FieldElement) -> Vec<u32> {
        to_digits(a.0, self.p, self.e)
    }

    pub fn from_coeffs(&self, coeffs: &[u32]) -> Result<FieldElement> {
        if coeffs.len() != self.e as usize || coeffs.iter().any(|&c| c >= self.p) {
            return Err(ScgError::InvalidField("bad coefficient vector".into()));
        }
        Ok(FieldElement(from_digits(coeffs, self.p)))
    }

    /// All `q` elements in lexicographic coefficient order (`0, 1, .., q-1`).
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.q).map(FieldElement)
    }

    /// The nonzero elements in enumeration order.
    pub fn nonzero_elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (1..self.q).map(FieldElement)
    }

    #[inline]
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if self.e == 1 {
            let s = a.0 + b.0;
            FieldElement(if s >= self.p { s - self.p } else { s })
        } else if self.p == 2 {
            FieldElement(a.0 ^ b.0)
        } else if let Some(t) = &self.add_table {
            FieldElement(t[(a.0 * self.q + b.0) as usize])
        } else {
            FieldElement(digit_add(a.0, b.0, self.p, self.e))
        }
    }

    #[inline]
    pub fn neg(&self, a: FieldElement) -> FieldElement {
        FieldElement(self.neg[a.0 as usize])
    }

    #[inline]
    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if a.0 == 0 || b.0 == 0 {
            return FieldElement::ZERO;
        }
        let i = self.log[a.0 as usize] + self.log[b.0 as usize];
        FieldElement(self.exp[i as usize])
    }

    /// `a * b + c`.
    #[inline]
    pub fn mul_add(&self, a: FieldElement, b: FieldElement, c: FieldElement) -> FieldElement {
        self.add(self.mul(a, b), c)
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement> {
        if a.0 == 0 {
            return Err(ScgError::DivisionByZero);
        }
        let n = self.q - 1;
        let l = self.log[a.0 as usize];
        Ok(FieldElement(self.exp[((n - l) % n) as usize]))
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `a^n` by square-and-multiply; `0^0 = 1`.
    pub fn pow(&self, a: FieldElement, mut n: u64) -> FieldElement {
        let mut base = a;
        let mut acc = FieldElement::ONE;
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            n >>= 1;
        }
        acc
    }

    /// `a^n` for signed exponents; negative powers of zero are an error.
    pub fn pow_i64(&self, a: FieldElement, n: i64) -> Result<FieldElement> {
        if n >= 0 {
            Ok(self.pow(a, n as u64))
        } else {
            Ok(self.pow(self.inv(a)?, n.unsigned_abs()))
        }
    }

    /// Discrete logarithm to the base of [`Field::primitive_element`].
    pub fn log(&self, a: FieldElement) -> Result<u32> {
        if a.0 == 0 {
            return Err(ScgError::ZeroHasNoClass);
        }
        Ok(self.log[a.0 as usize])
    }

    /// Square class of a nonzero element.
    pub fn square_class(&self, a: FieldElement) -> Result<SquareClass> {
        if a.0 == 0 {
            return Err(ScgError::ZeroHasNoClass);
        }
        if self.p == 2 {
            return Ok(SquareClass::EvenChar);
        }
        let square = match &self.squares {
            Some(t) => t[a.0 as usize],
            None => self.pow(a, ((self.q - 1) / 2) as u64) == FieldElement::ONE,
        };
        Ok(if square {
            SquareClass::Square
        } else {
            SquareClass::NonSquare
        })
    }

    /// Square class by Euler's criterion, never consulting a table.
    pub fn square_class_by_power(&self, a: FieldElement) -> Result<SquareClass> {
        if a.0 == 0 {
            return Err(ScgError::ZeroHasNoClass);
        }
        if self.p == 2 {
            return Ok(SquareClass::EvenChar);
        }
        Ok(
            if self.pow(a, ((self.q - 1) / 2) as u64) == FieldElement::ONE {
                SquareClass::Square
            } else {
                SquareClass::NonSquare
            },
        )
    }

    /// True for nonzero squares (every nonzero element in characteristic two).
    pub fn is_nonzero_square(&self, a: FieldElement) -> bool {
        matches!(
            self.square_class(a),
            Ok(SquareClass::Square | SquareClass::EvenChar)
        )
    }

    /// The smaller (in enumeration order) square root of `a`, if any.
    pub fn sqrt(&self, a: FieldElement) -> Option<FieldElement> {
        if a.0 == 0 {
            return Some(a);
        }
        let n = self.q - 1;
        let l = self.log[a.0 as usize];
        let half = if self.p == 2 {
            // 2 is invertible modulo the odd number q - 1.
            ((l as u64 * (self.q as u64 / 2)) % n as u64) as u32
        } else if l % 2 == 0 {
            l / 2
        } else {
            return None;
        };
        let r = FieldElement(self.exp[half as usize]);
        Some(r.min(self.neg(r)))
    }

    /// Multiplicative order of a nonzero element.
    pub fn multiplicative_order(&self, a: FieldElement) -> Result<u32> {
        let l = self.log(a)?;
        let n = self.q - 1;
        Ok(n / gcd(n, l))
    }
}

fn check_params(p: u32, e: u32) -> Result<()> {
    if !is_prime(p) {
        return Err(ScgError::InvalidField(format!("{p} is not prime")));
    }
    if e == 0 {
        return Err(ScgError::InvalidField("degree must be >= 1".into()));
    }
    match p.checked_pow(e) {
        Some(q) if q <= MAX_FIELD_ORDER => Ok(()),
        _ => Err(ScgError::InvalidField(format!(
            "field order {p}^{e} exceeds the cap {MAX_FIELD_ORDER}"
        ))),
    }
}

pub(crate) fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= n as u64 {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// `(p, e)` with `q = p^e`, or `None` if `q` is not a prime power.
pub fn prime_power(q: u32) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q % d == 0)?;
    let mut e = 0;
    let mut r = q;
    while r % p == 0 {
        r /= p;
        e += 1;
    }
    (r == 1).then_some((p, e))
}

fn prime_factors(mut n: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn to_digits(mut a: u32, p: u32, e: u32) -> Vec<u32> {
    let mut d = Vec::with_capacity(e as usize);
    for _ in 0..e {
        d.push(a % p);
        a /= p;
    }
    d
}

fn from_digits(d: &[u32], p: u32) -> u32 {
    d.iter().rev().fold(0, |acc, &c| acc * p + c)
}

fn digit_add(mut a: u32, mut b: u32, p: u32, e: u32) -> u32 {
    let mut out = 0;
    let mut scale = 1;
    for _ in 0..e {
        let s = (a % p + b % p) % p;
        out += s * scale;
        scale *= p;
        a /= p;
        b /= p;
    }
    out
}

// Polynomials over GF(p): little-endian coefficient vectors, trimmed.

fn trim(mut a: Vec<u32>) -> Vec<u32> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn inv_mod_p(a: u32, p: u32) -> u32 {
    // p is prime and small; Fermat.
    let mut base = a as u64 % p as u64;
    let mut n = p as u64 - 2;
    let mut acc = 1u64;
    while n > 0 {
        if n & 1 == 1 {
            acc = acc * base % p as u64;
        }
        base = base * base % p as u64;
        n >>= 1;
    }
    acc as u32
}

fn poly_rem(a: &[u32], f: &[u32], p: u32) -> Vec<u32> {
    let mut r = trim(a.to_vec());
    let f = trim(f.to_vec());
    let df = f.len() - 1;
    let lead_inv = inv_mod_p(f[df], p) as u64;
    while r.len() > df {
        let dr = r.len() - 1;
        let c = r[dr] as u64 * lead_inv % p as u64;
        let shift = dr - df;
        for (i, &fc) in f.iter().enumerate() {
            let sub = c * fc as u64 % p as u64;
            r[i + shift] = ((r[i + shift] as u64 + p as u64 - sub) % p as u64) as u32;
        }
        r = trim(r);
    }
    r
}

fn poly_mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x as u64 * y as u64) % p as u64;
        }
    }
    trim(out.into_iter().map(|c| c as u32).collect())
}

fn poly_mulmod(a: &[u32], b: &[u32], f: &[u32], p: u32) -> Vec<u32> {
    poly_rem(&poly_mul(a, b, p), f, p)
}

fn poly_powmod(base: &[u32], mut n: u64, f: &[u32], p: u32) -> Vec<u32> {
    let mut acc = vec![1u32];
    let mut b = poly_rem(base, f, p);
    while n > 0 {
        if n & 1 == 1 {
            acc = poly_mulmod(&acc, &b, f, p);
        }
        b = poly_mulmod(&b, &b, f, p);
        n >>= 1;
    }
    acc
}

fn poly_sub(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|i| {
            let x = *a.get(i).unwrap_or(&0);
            let y = *b.get(i).unwrap_or(&0);
            (x + p - y) % p
        })
        .collect();
    trim(out)
}

fn poly_gcd(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut a = trim(a.to_vec());
    let mut b = trim(b.to_vec());
    while !b.is_empty() {
        let r = poly_rem(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

/// Rabin's irreducibility test for a monic polynomial over GF(p).
fn is_irreducible(f: &[u32], p: u32) -> bool {
    let e = f.len() - 1;
    if e == 1 {
        return true;
    }
    let x = vec![0u32, 1];
    // x^(p^k) mod f for k = 0..=e
    let mut frob = vec![poly_rem(&x, f, p)];
    for _ in 0..e {
        let last = frob.last().unwrap();
        frob.push(poly_powmod(last, p as u64, f, p));
    }
    if poly_sub(&frob[e], &x, p) != poly_rem(&[], f, p) {
        return false;
    }
    for r in prime_factors(e as u32) {
        let k = e / r as usize;
        let g = poly_gcd(f, &poly_sub(&frob[k], &x, p), p);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

fn least_irreducible(p: u32, e: u32) -> Vec<u32> {
    let count = p.pow(e);
    for code in 0..count {
        let mut f = to_digits(code, p, e);
        f.push(1);
        if is_irreducible(&f, p) {
            return f;
        }
    }
    unreachable!("irreducible polynomials of every degree exist")
}

fn slow_mul(a: u32, b: u32, p: u32, e: u32, modulus: &[u32]) -> u32 {
    let pa = trim(to_digits(a, p, e));
    let pb = trim(to_digits(b, p, e));
    let mut r = poly_mulmod(&pa, &pb, modulus, p);
    r.resize(e as usize, 0);
    from_digits(&r, p)
}

fn slow_pow(a: u32, mut n: u64, p: u32, e: u32, modulus: &[u32]) -> u32 {
    let mut acc = 1;
    let mut b = a;
    while n > 0 {
        if n & 1 == 1 {
            acc = slow_mul(acc, b, p, e, modulus);
        }
        b = slow_mul(b, b, p, e, modulus);
        n >>= 1;
    }
    acc
}

fn find_primitive(p: u32, e: u32, q: u32, modulus: &[u32]) -> u32 {
    let n = q - 1;
    if n == 1 {
        return 1;
    }
    let factors = prime_factors(n);
    (2..q)
        .find(|&g| {
            factors
                .iter()
                .all(|&r| slow_pow(g, (n / r) as u64, p, e, modulus) != 1)
        })
        .expect("a finite field has a primitive element")
}
