//! Finite-field tower engine.
//!
//! Arithmetic is carried out in the top field `GF(Q)` with `Q = p^(e*h)`,
//! built as `GF(p)[x]/(f)` for a primitive modulus `f`. The distinguished
//! subfield `GF(q)`, `q = p^e`, is represented by its embedded elements;
//! membership is `x^q == x`. On top of plain arithmetic this module provides
//! the Frobenius `sigma(x) = x^q`, the twisted norms
//! `norm_i(a) = sigma^(i-1)(a)...sigma(a)a`, and the linearized operator
//! `D^i_a(b) = sigma^i(b) * norm_i(a)`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Fields up to this order get exp/log tables; beyond it multiplication
/// falls back to polynomial reduction.
const TABLE_LIMIT: u64 = 1 << 20;

#[derive(Debug, Error)]
pub enum GfError {
    #[error("{0} is not prime")]
    NonPrime(u64),
    #[error("extension degree must be positive")]
    ZeroDegree,
    #[error("p^(e*h) does not fit in the element code space")]
    FieldTooLarge,
    #[error("division by zero")]
    DivisionByZero,
    #[error("element code {code} out of range for field of order {order}")]
    CodeOutOfRange { code: u64, order: u64 },
    #[error("invalid modulus: {0}")]
    BadModulus(String),
    #[error("cannot parse element from {0:?}")]
    ParseElement(String),
}

/// One element of `GF(Q)`, encoded as the integer packing its coefficient
/// vector over `GF(p)` in little-endian base-`p` digits. Code 0 is the
/// additive identity and code 1 the multiplicative identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Element(u64);

impl Element {
    pub const ZERO: Element = Element(0);
    pub const ONE: Element = Element(1);

    pub fn code(self) -> u64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Serialized field description: `{p, e, h, modulus}` with modulus
/// coefficients low-to-high.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldDescriptor {
    pub p: u64,
    pub e: u32,
    pub h: u32,
    pub modulus: Vec<u64>,
}

/// The tower `GF(p) < GF(q = p^e) < GF(Q = q^h)`.
///
/// Immutable after creation; all operations are pure.
pub struct FieldTower {
    p: u64,
    e: u32,
    h: u32,
    ext_deg: u32,
    q: u64,
    big_q: u64,
    modulus: Vec<u64>,
    gamma: Element,
    omega: Element,
    gamma_basis: Vec<Element>,
    /// exp[i] = gamma^i for 0 <= i < Q-1; empty when Q > TABLE_LIMIT.
    exp: Vec<u64>,
    /// log[code] for nonzero codes; log[0] unused.
    log: Vec<u64>,
    /// Frobenius as a GF(p)-linear map: column j holds digits of (x^j)^q.
    frob_cols: Vec<Vec<u64>>,
    /// Inverse of the digit matrix of the basis {omega^s * gamma^t},
    /// row-major, for coordinate extraction over GF(q).
    coord_inv_rows: Vec<Vec<u64>>,
}

pub type Tower = Arc<FieldTower>;

impl fmt::Debug for FieldTower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldTower")
            .field("p", &self.p)
            .field("e", &self.e)
            .field("h", &self.h)
            .field("modulus", &self.modulus)
            .finish()
    }
}

impl PartialEq for FieldTower {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.e == other.e && self.h == other.h && self.modulus == other.modulus
    }
}
impl Eq for FieldTower {}

impl FieldTower {
    /// Builds the tower with the canonical modulus: the primitive monic
    /// polynomial of degree `e*h` over `GF(p)` with the least integer code
    /// (coefficients packed little-endian base `p`).
    pub fn new(p: u64, e: u32, h: u32) -> Result<Tower, GfError> {
        if !is_prime(p) {
            return Err(GfError::NonPrime(p));
        }
        if e == 0 || h == 0 {
            return Err(GfError::ZeroDegree);
        }
        let d = e.checked_mul(h).ok_or(GfError::FieldTooLarge)?;
        let modulus = find_primitive_modulus(p, d)?;
        Self::with_modulus(p, e, h, &modulus)
    }

    /// Builds the tower over a caller-supplied modulus, which must be monic,
    /// primitive, and of degree `e*h`.
    pub fn with_modulus(p: u64, e: u32, h: u32, modulus: &[u64]) -> Result<Tower, GfError> {
        if !is_prime(p) {
            return Err(GfError::NonPrime(p));
        }
        if e == 0 || h == 0 {
            return Err(GfError::ZeroDegree);
        }
        let d = e.checked_mul(h).ok_or(GfError::FieldTooLarge)? as usize;
        let big_q = checked_pow(p, (d) as u32).ok_or(GfError::FieldTooLarge)?;
        let q = checked_pow(p, e).ok_or(GfError::FieldTooLarge)?;
        if modulus.len() != d + 1 {
            return Err(GfError::BadModulus(format!(
                "expected degree {}, got degree {}",
                d,
                modulus.len().saturating_sub(1)
            )));
        }
        if modulus[d] != 1 {
            return Err(GfError::BadModulus("not monic".into()));
        }
        if modulus.iter().any(|&c| c >= p) {
            return Err(GfError::BadModulus("coefficient not reduced mod p".into()));
        }
        if !is_primitive_modulus(modulus, p) {
            return Err(GfError::BadModulus(
                "not primitive (root does not generate the multiplicative group)".into(),
            ));
        }

        let gamma = if d == 1 {
            // Residue of x is -c for modulus x + c.
            Element((p - modulus[0]) % p)
        } else {
            Element(p)
        };

        let mut tower = FieldTower {
            p,
            e,
            h,
            ext_deg: d as u32,
            q,
            big_q,
            modulus: modulus.to_vec(),
            gamma,
            omega: Element::ZERO,
            gamma_basis: Vec::new(),
            exp: Vec::new(),
            log: Vec::new(),
            frob_cols: Vec::new(),
            coord_inv_rows: Vec::new(),
        };

        if big_q <= TABLE_LIMIT {
            tower.build_tables();
        }
        tower.omega = tower.pow(gamma, (big_q - 1) / (q - 1).max(1));
        if q == 2 {
            tower.omega = Element::ONE;
        }
        tower.gamma_basis = (0..h).map(|t| tower.pow(gamma, t as u64)).collect();
        tower.build_frobenius_matrix();
        tower.build_coord_matrix()?;
        Ok(Arc::new(tower))
    }

    pub fn from_descriptor(desc: &FieldDescriptor) -> Result<Tower, GfError> {
        Self::with_modulus(desc.p, desc.e, desc.h, &desc.modulus)
    }

    pub fn descriptor(&self) -> FieldDescriptor {
        FieldDescriptor {
            p: self.p,
            e: self.e,
            h: self.h,
            modulus: self.modulus.clone(),
        }
    }

    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn e(&self) -> u32 {
        self.e
    }
    pub fn h(&self) -> u32 {
        self.h
    }
    /// q = p^e, the order of the distinguished subfield.
    pub fn q(&self) -> u64 {
        self.q
    }
    /// Q = p^(e*h), the order of the top field.
    pub fn order(&self) -> u64 {
        self.big_q
    }
    pub fn ext_degree(&self) -> u32 {
        self.ext_deg
    }
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }
    /// The primitive element: the residue class of the indeterminate.
    pub fn gamma(&self) -> Element {
        self.gamma
    }
    /// Generator of `GF(q)^*`: `omega = gamma^((Q-1)/(q-1))`.
    pub fn omega(&self) -> Element {
        self.omega
    }
    /// The GF(q)-basis `(1, gamma, ..., gamma^(h-1))` of `GF(Q)`.
    pub fn gamma_basis(&self) -> &[Element] {
        &self.gamma_basis
    }

    pub fn element(&self, code: u64) -> Result<Element, GfError> {
        if code < self.big_q {
            Ok(Element(code))
        } else {
            Err(GfError::CodeOutOfRange {
                code,
                order: self.big_q,
            })
        }
    }

    /// All `Q` elements in code order.
    pub fn elements(&self) -> impl Iterator<Item = Element> + '_ {
        (0..self.big_q).map(Element)
    }

    fn build_tables(&mut self) {
        let n = (self.big_q - 1) as usize;
        let mut exp = Vec::with_capacity(n);
        let mut log = vec![0u64; self.big_q as usize];
        let mut cur = Element::ONE;
        for i in 0..n {
            exp.push(cur.0);
            log[cur.0 as usize] = i as u64;
            cur = self.mul_poly(cur, self.gamma);
        }
        debug_assert_eq!(cur, Element::ONE);
        self.exp = exp;
        self.log = log;
    }

    fn build_frobenius_matrix(&mut self) {
        let d = self.ext_deg as usize;
        let mut cols = Vec::with_capacity(d);
        for j in 0..d {
            let monomial = if d == 1 {
                // x reduces to gamma in a degree-1 extension.
                if j == 0 {
                    Element::ONE
                } else {
                    self.gamma
                }
            } else {
                Element(checked_pow(self.p, j as u32).unwrap())
            };
            let image = self.pow(monomial, self.q);
            cols.push(self.digits(image));
        }
        self.frob_cols = cols;
    }

    fn build_coord_matrix(&mut self) -> Result<(), GfError> {
        let d = self.ext_deg as usize;
        let e = self.e as usize;
        let h = self.h as usize;
        // Column t*e + s holds the digits of omega^s * gamma^t.
        let mut mat = vec![vec![0u64; d]; d];
        for t in 0..h {
            for s in 0..e {
                let v = self.mul(self.pow(self.omega, s as u64), self.gamma_basis[t]);
                let dig = self.digits(v);
                for i in 0..d {
                    mat[i][t * e + s] = dig[i];
                }
            }
        }
        let inv = invert_mod_p(&mat, self.p).ok_or_else(|| {
            GfError::BadModulus("tower basis is GF(p)-dependent (internal)".into())
        })?;
        self.coord_inv_rows = inv;
        Ok(())
    }

    /// Little-endian base-p digit vector of length `e*h`.
    pub fn digits(&self, x: Element) -> Vec<u64> {
        let d = self.ext_deg as usize;
        let mut out = vec![0u64; d];
        let mut c = x.0;
        for slot in out.iter_mut() {
            *slot = c % self.p;
            c /= self.p;
        }
        out
    }

    pub fn pack(&self, digits: &[u64]) -> Element {
        let mut code = 0u64;
        for &dg in digits.iter().rev() {
            code = code * self.p + dg % self.p;
        }
        Element(code)
    }

    pub fn add(&self, x: Element, y: Element) -> Element {
        if self.p == 2 {
            return Element(x.0 ^ y.0);
        }
        let (a, b) = (self.digits(x), self.digits(y));
        let sum: Vec<u64> = a.iter().zip(&b).map(|(u, v)| (u + v) % self.p).collect();
        self.pack(&sum)
    }

    pub fn neg(&self, x: Element) -> Element {
        if self.p == 2 {
            return x;
        }
        let a = self.digits(x);
        let n: Vec<u64> = a.iter().map(|&u| (self.p - u) % self.p).collect();
        self.pack(&n)
    }

    pub fn sub(&self, x: Element, y: Element) -> Element {
        self.add(x, self.neg(y))
    }

    pub fn mul(&self, x: Element, y: Element) -> Element {
        if x.is_zero() || y.is_zero() {
            return Element::ZERO;
        }
        if !self.exp.is_empty() {
            let n = self.big_q - 1;
            let i = (self.log[x.0 as usize] + self.log[y.0 as usize]) % n;
            Element(self.exp[i as usize])
        } else {
            self.mul_poly(x, y)
        }
    }

    fn mul_poly(&self, x: Element, y: Element) -> Element {
        let a = self.digits(x);
        let b = self.digits(y);
        let d = self.ext_deg as usize;
        let mut prod = vec![0u64; 2 * d - 1];
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for (j, &bj) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + ai * bj) % self.p;
            }
        }
        // Reduce modulo the monic modulus.
        for i in (d..prod.len()).rev() {
            let c = prod[i];
            if c == 0 {
                continue;
            }
            prod[i] = 0;
            for (k, &fk) in self.modulus.iter().enumerate().take(d) {
                let idx = i - d + k;
                prod[idx] = (prod[idx] + c * (self.p - fk)) % self.p;
            }
        }
        prod.truncate(d);
        self.pack(&prod)
    }

    pub fn inv(&self, x: Element) -> Result<Element, GfError> {
        if x.is_zero() {
            return Err(GfError::DivisionByZero);
        }
        if !self.exp.is_empty() {
            let n = self.big_q - 1;
            let i = (n - self.log[x.0 as usize]) % n;
            Ok(Element(self.exp[i as usize]))
        } else {
            Ok(self.pow(x, self.big_q - 2))
        }
    }

    pub fn div(&self, x: Element, y: Element) -> Result<Element, GfError> {
        Ok(self.mul(x, self.inv(y)?))
    }

    /// Square-and-multiply exponentiation; `x^0 = 1` including `0^0 = 1`.
    pub fn pow(&self, x: Element, t: u64) -> Element {
        if t == 0 {
            return Element::ONE;
        }
        if x.is_zero() {
            return Element::ZERO;
        }
        if !self.exp.is_empty() {
            let n = (self.big_q - 1) as u128;
            let i = (self.log[x.0 as usize] as u128 * t as u128) % n;
            return Element(self.exp[i as usize]);
        }
        let mut acc = Element::ONE;
        let mut base = x;
        let mut t = t;
        while t > 0 {
            if t & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            t >>= 1;
        }
        acc
    }

    /// gamma^k (with k reduced mod Q-1).
    pub fn gamma_pow(&self, k: u64) -> Element {
        if !self.exp.is_empty() {
            Element(self.exp[(k % (self.big_q - 1)) as usize])
        } else {
            self.pow(self.gamma, k % (self.big_q - 1))
        }
    }

    /// Discrete log base gamma; `None` for zero.
    pub fn log_gamma(&self, x: Element) -> Option<u64> {
        if x.is_zero() {
            return None;
        }
        if !self.log.is_empty() {
            return Some(self.log[x.0 as usize]);
        }
        let mut cur = Element::ONE;
        for i in 0..self.big_q - 1 {
            if cur == x {
                return Some(i);
            }
            cur = self.mul(cur, self.gamma);
        }
        None
    }

    /// `sigma^i(x) = x^(q^i)`, computed via the precomputed GF(p)-linear map.
    pub fn frobenius(&self, x: Element, i: u64) -> Element {
        let i = (i % self.h as u64) as u32;
        let mut dig = self.digits(x);
        let d = self.ext_deg as usize;
        for _ in 0..i {
            let mut out = vec![0u64; d];
            for (j, &dj) in dig.iter().enumerate() {
                if dj == 0 {
                    continue;
                }
                for r in 0..d {
                    out[r] = (out[r] + dj * self.frob_cols[j][r]) % self.p;
                }
            }
            dig = out;
        }
        self.pack(&dig)
    }

    /// The i-fold twisted product `sigma^(i-1)(a)...sigma(a)a`; `norm_0 = 1`.
    pub fn norm_i(&self, alpha: Element, i: u64) -> Element {
        let mut acc = Element::ONE;
        for j in 0..i {
            acc = self.mul(acc, self.frobenius(alpha, j));
        }
        acc
    }

    /// `D^i_alpha(beta) = sigma^i(beta) * norm_i(alpha)`; GF(q)-linear in beta.
    pub fn d_op(&self, alpha: Element, i: u64, beta: Element) -> Element {
        self.mul(self.frobenius(beta, i), self.norm_i(alpha, i))
    }

    /// Membership in the distinguished subfield: `x^q == x`.
    pub fn in_subfield(&self, x: Element) -> bool {
        self.frobenius(x, 1) == x
    }

    /// `{0} u {omega^j : 0 <= j < q-1}` in that deterministic order.
    pub fn subfield_elements(&self) -> Vec<Element> {
        let mut out = Vec::with_capacity(self.q as usize);
        out.push(Element::ZERO);
        let mut cur = Element::ONE;
        for _ in 0..self.q - 1 {
            out.push(cur);
            cur = self.mul(cur, self.omega);
        }
        out
    }

    /// The unique `(c_1,...,c_h)` over `GF(q)` with `x = sum c_t gamma^(t-1)`.
    pub fn coords(&self, x: Element) -> Vec<Element> {
        let d = self.ext_deg as usize;
        let e = self.e as usize;
        let dig = self.digits(x);
        let mut y = vec![0u64; d];
        for (i, row) in self.coord_inv_rows.iter().enumerate() {
            let mut acc = 0u64;
            for (j, &dj) in dig.iter().enumerate() {
                acc = (acc + row[j] * dj) % self.p;
            }
            y[i] = acc;
        }
        let mut out = Vec::with_capacity(self.h as usize);
        for t in 0..self.h as usize {
            let mut c = Element::ZERO;
            for s in 0..e {
                let scalar = Element(y[t * e + s]);
                c = self.add(c, self.mul(scalar, self.pow(self.omega, s as u64)));
            }
            out.push(c);
        }
        out
    }

    /// Inverse of `coords` against the tower basis.
    pub fn from_coords(&self, coords: &[Element]) -> Element {
        let mut acc = Element::ZERO;
        for (t, &c) in coords.iter().enumerate() {
            acc = self.add(acc, self.mul(c, self.gamma_basis[t]));
        }
        acc
    }

    /// Multiplicative order; zero has none.
    pub fn element_order(&self, x: Element) -> Option<u64> {
        if x.is_zero() {
            return None;
        }
        let n = self.big_q - 1;
        let mut ord = n;
        for (f, _) in factorize(n) {
            while ord % f == 0 && self.pow(x, ord / f) == Element::ONE {
                ord /= f;
            }
        }
        Some(ord)
    }

    /// Canonical text form: the decimal integer code, or `a^k` power
    /// notation when `power` is requested (`0` stays `0`).
    pub fn format_element(&self, x: Element, power: bool) -> String {
        if !power || x.is_zero() {
            return x.0.to_string();
        }
        format!("a^{}", self.log_gamma(x).unwrap())
    }

    /// Accepts the decimal code, `a^k` power notation, or bare `a`.
    pub fn parse_element(&self, s: &str) -> Result<Element, GfError> {
        let s = s.trim();
        if s == "a" {
            return Ok(self.gamma);
        }
        if let Some(k) = s.strip_prefix("a^") {
            let k: u64 = k
                .parse()
                .map_err(|_| GfError::ParseElement(s.to_string()))?;
            return Ok(self.gamma_pow(k));
        }
        let code: u64 = s
            .parse()
            .map_err(|_| GfError::ParseElement(s.to_string()))?;
        self.element(code)
    }
}

fn checked_pow(base: u64, exp: u32) -> Option<u64> {
    let mut acc: u64 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Distinct prime factors with multiplicities, by trial division.
pub(crate) fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            let mut m = 0;
            while n % d == 0 {
                n /= d;
                m += 1;
            }
            out.push((d, m));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

// --- polynomial arithmetic over GF(p), little-endian coefficient vectors ---

fn poly_trim(a: &mut Vec<u64>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn poly_rem(a: &[u64], f: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    poly_trim(&mut r);
    let df = f.len() - 1;
    let lead_inv = mod_inv(f[df], p);
    while r.len() > df {
        let c = (r[r.len() - 1] * lead_inv) % p;
        let shift = r.len() - 1 - df;
        for (k, &fk) in f.iter().enumerate() {
            let idx = shift + k;
            r[idx] = (r[idx] + c * (p - fk) % p) % p;
        }
        poly_trim(&mut r);
        if r.is_empty() {
            break;
        }
    }
    r
}

fn poly_mulmod(a: &[u64], b: &[u64], f: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut prod = vec![0u64; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + ai * bj) % p;
        }
    }
    poly_rem(&prod, f, p)
}

/// x^t mod f over GF(p).
fn poly_x_powmod(t: u64, f: &[u64], p: u64) -> Vec<u64> {
    let mut acc = vec![1u64];
    let mut base = poly_rem(&[0, 1], f, p);
    let mut t = t;
    while t > 0 {
        if t & 1 == 1 {
            acc = poly_mulmod(&acc, &base, f, p);
        }
        base = poly_mulmod(&base, &base, f, p);
        t >>= 1;
    }
    acc
}

fn poly_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    poly_trim(&mut a);
    poly_trim(&mut b);
    while !b.is_empty() {
        let r = poly_rem(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

fn mod_inv(a: u64, p: u64) -> u64 {
    // p is prime; Fermat.
    let mut acc = 1u64;
    let mut base = a % p;
    let mut t = p - 2;
    while t > 0 {
        if t & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        t >>= 1;
    }
    acc
}

fn is_irreducible(f: &[u64], p: u64) -> bool {
    let d = (f.len() - 1) as u64;
    if d == 1 {
        return true;
    }
    // x^(p^d) == x mod f, and gcd(x^(p^(d/l)) - x, f) = 1 for prime l | d.
    let pd = match checked_pow(p, d as u32) {
        Some(v) => v,
        None => return false,
    };
    let mut top = poly_x_powmod(pd, f, p);
    let x = poly_rem(&[0, 1], f, p);
    top = poly_sub(&top, &x, p);
    if !top.is_empty() {
        return false;
    }
    for (l, _) in factorize(d) {
        let sub = checked_pow(p, (d / l) as u32).unwrap();
        let g = poly_sub(&poly_x_powmod(sub, f, p), &x, p);
        let gcd = poly_gcd(f, &g, p);
        if gcd.len() != 1 {
            return false;
        }
    }
    true
}

fn poly_sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let n = a.len().max(b.len());
    let mut out = vec![0u64; n];
    for i in 0..n {
        let ai = a.get(i).copied().unwrap_or(0);
        let bi = b.get(i).copied().unwrap_or(0);
        out[i] = (ai + p - bi) % p;
    }
    poly_trim(&mut out);
    out
}

/// Irreducible and the residue of x has full multiplicative order p^d - 1.
fn is_primitive_modulus(f: &[u64], p: u64) -> bool {
    let d = (f.len() - 1) as u32;
    let n = match checked_pow(p, d) {
        Some(v) => v - 1,
        None => return false,
    };
    if !is_irreducible(f, p) {
        return false;
    }
    if n == 1 {
        // GF(2): x + 1 has root 1 which trivially generates.
        let root = (p - f[0]) % p;
        return root == 1;
    }
    // x must be a unit: constant term nonzero.
    if f[0] == 0 {
        return false;
    }
    for (l, _) in factorize(n) {
        let r = poly_x_powmod(n / l, f, p);
        if r == [1] {
            return false;
        }
    }
    true
}

/// Lexicographically-least primitive monic polynomial of degree `d` over
/// `GF(p)`, ordering candidates by their packed little-endian integer code.
pub fn find_primitive_modulus(p: u64, d: u32) -> Result<Vec<u64>, GfError> {
    let span = checked_pow(p, d).ok_or(GfError::FieldTooLarge)?;
    for low in 0..span {
        let mut coeffs = Vec::with_capacity(d as usize + 1);
        let mut c = low;
        for _ in 0..d {
            coeffs.push(c % p);
            c /= p;
        }
        coeffs.push(1);
        if is_primitive_modulus(&coeffs, p) {
            return Ok(coeffs);
        }
    }
    Err(GfError::BadModulus(format!(
        "no primitive polynomial of degree {d} over GF({p})"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf16() -> Tower {
        FieldTower::new(2, 2, 2).unwrap()
    }

    /// Independent search oracle: naive polynomial arithmetic, order of x
    /// checked by direct iteration.
    fn naive_least_primitive(p: u64, d: u32) -> Vec<u64> {
        let span = p.pow(d);
        'cand: for low in 0..span {
            let mut f = Vec::new();
            let mut c = low;
            for _ in 0..d {
                f.push(c % p);
                c /= p;
            }
            f.push(1);
            // order of x by brute iteration
            let n = p.pow(d) - 1;
            let mut cur = vec![0u64, 1];
            cur = poly_rem(&cur, &f, p);
            let start = cur.clone();
            for i in 1..=n {
                if cur == [1] {
                    if i == n {
                        return f;
                    }
                    continue 'cand;
                }
                cur = poly_mulmod(&cur, &start, &f, p);
            }
            continue 'cand;
        }
        panic!("no primitive polynomial found");
    }

    #[test]
    fn canonical_modulus_gf16() {
        let t = gf16();
        // x^4 + x + 1
        assert_eq!(t.modulus(), &[1, 1, 0, 0, 1]);
        assert_eq!(t.modulus(), naive_least_primitive(2, 4).as_slice());
    }

    #[test]
    fn canonical_modulus_prime_field() {
        let t = FieldTower::new(2, 1, 1).unwrap();
        assert_eq!(t.order(), 2);
        assert_eq!(t.modulus(), &[1, 1]); // x + 1
        assert_eq!(t.gamma(), Element::ONE);
    }

    #[test]
    fn canonical_modulus_gf9() {
        let t = FieldTower::new(3, 1, 2).unwrap();
        assert_eq!(t.order(), 9);
        assert_eq!(t.modulus(), naive_least_primitive(3, 2).as_slice());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(FieldTower::new(4, 1, 1), Err(GfError::NonPrime(4))));
        assert!(matches!(FieldTower::new(2, 0, 1), Err(GfError::ZeroDegree)));
    }

    #[test]
    fn arithmetic_examples_gf16() {
        let t = gf16();
        let g = t.gamma();
        assert_eq!(g.code(), 2);
        // gamma * gamma^3 = gamma^4 = gamma + 1 = code 3
        let g3 = t.pow(g, 3);
        assert_eq!(t.mul(g, g3).code(), 3);
        // characteristic 2: x + x = 0
        for x in t.elements() {
            assert_eq!(t.add(x, x), Element::ZERO);
        }
        assert_eq!(t.inv(Element::ONE).unwrap(), Element::ONE);
        assert!(t.inv(Element::ZERO).is_err());
    }

    #[test]
    fn table_mul_matches_polynomial_oracle() {
        let t = gf16();
        for x in t.elements() {
            for y in t.elements() {
                assert_eq!(t.mul(x, y), t.mul_poly(x, y));
            }
        }
        let t9 = FieldTower::new(3, 1, 2).unwrap();
        for x in t9.elements() {
            for y in t9.elements() {
                assert_eq!(t9.mul(x, y), t9.mul_poly(x, y));
            }
        }
    }

    #[test]
    fn field_axioms_exhaustive_small() {
        for t in [gf16(), FieldTower::new(3, 1, 2).unwrap()] {
            let els: Vec<_> = t.elements().collect();
            for &x in &els {
                for &y in &els {
                    assert_eq!(t.mul(x, y), t.mul(y, x));
                    assert_eq!(t.add(x, y), t.add(y, x));
                    for &z in &els {
                        assert_eq!(t.mul(t.mul(x, y), z), t.mul(x, t.mul(y, z)));
                        assert_eq!(t.add(t.add(x, y), z), t.add(x, t.add(y, z)));
                        assert_eq!(
                            t.mul(x, t.add(y, z)),
                            t.add(t.mul(x, y), t.mul(x, z))
                        );
                    }
                }
                if !x.is_zero() {
                    assert_eq!(t.mul(x, t.inv(x).unwrap()), Element::ONE);
                }
                assert_eq!(t.add(x, t.neg(x)), Element::ZERO);
            }
        }
    }

    #[test]
    fn frobenius_is_automorphism_and_matches_pow() {
        for t in [gf16(), FieldTower::new(2, 3, 2).unwrap()] {
            let els: Vec<_> = t.elements().collect();
            for &x in &els {
                assert_eq!(t.frobenius(x, 1), t.pow(x, t.q()));
                assert_eq!(t.frobenius(x, t.h() as u64), x); // sigma^h = id
                for &y in &els {
                    assert_eq!(
                        t.frobenius(t.mul(x, y), 1),
                        t.mul(t.frobenius(x, 1), t.frobenius(y, 1))
                    );
                    assert_eq!(
                        t.frobenius(t.add(x, y), 1),
                        t.add(t.frobenius(x, 1), t.frobenius(y, 1))
                    );
                }
            }
        }
    }

    #[test]
    fn frobenius_examples() {
        let t = gf16();
        assert_eq!(t.frobenius(Element::ZERO, 1), Element::ZERO);
        for w in t.subfield_elements() {
            assert_eq!(t.frobenius(w, 1), w);
        }
        // sigma(gamma) = gamma^4 = code 3
        assert_eq!(t.frobenius(t.gamma(), 1).code(), 3);
    }

    #[test]
    fn frobenius_linear_over_subfield() {
        let t = gf16();
        let sub = t.subfield_elements();
        let els: Vec<_> = t.elements().collect();
        for &a in &sub {
            for &b in &sub {
                for &x in &els {
                    for &y in &els {
                        let lhs = t.frobenius(t.add(t.mul(a, x), t.mul(b, y)), 1);
                        let rhs = t.add(
                            t.mul(a, t.frobenius(x, 1)),
                            t.mul(b, t.frobenius(y, 1)),
                        );
                        assert_eq!(lhs, rhs);
                    }
                }
            }
        }
    }

    #[test]
    fn norm_examples() {
        let t = gf16();
        let g = t.gamma();
        for x in t.elements() {
            assert_eq!(t.norm_i(x, 0), Element::ONE);
            assert_eq!(t.norm_i(x, 1), x);
        }
        // norm_2(gamma) = sigma(gamma) * gamma = gamma^4 * gamma = gamma^5
        assert_eq!(t.norm_i(g, 2), t.pow(g, 5));
    }

    #[test]
    fn d_op_examples_and_linearity() {
        let t = gf16();
        let g = t.gamma();
        for a in t.elements() {
            for b in t.elements() {
                assert_eq!(t.d_op(a, 0, b), b);
            }
            assert_eq!(t.d_op(a, 1, Element::ZERO), Element::ZERO);
        }
        // D^1_gamma(gamma^3) = (gamma^3)^4 * gamma = gamma^13
        assert_eq!(t.d_op(g, 1, t.pow(g, 3)), t.pow(g, 13));
        // GF(q)-linearity of D^i_alpha, all pairs in GF(16)
        let sub = t.subfield_elements();
        for i in 0..2u64 {
            for &a in &sub {
                for x in t.elements() {
                    for &c in &sub {
                        let lhs = t.d_op(a, i, t.mul(c, x));
                        let rhs = t.mul(c, t.d_op(a, i, x));
                        assert_eq!(lhs, rhs);
                    }
                }
            }
        }
    }

    #[test]
    fn coords_round_trip_and_examples() {
        let t = gf16();
        let g = t.gamma();
        // Gamma basis coords are unit vectors
        for (i, &b) in t.gamma_basis().iter().enumerate() {
            let c = t.coords(b);
            for (j, &cj) in c.iter().enumerate() {
                assert_eq!(cj, if i == j { Element::ONE } else { Element::ZERO });
            }
        }
        assert_eq!(t.coords(Element::ZERO), vec![Element::ZERO; 2]);
        // gamma^2 = gamma^5 * 1 + 1 * gamma
        let c = t.coords(t.pow(g, 2));
        assert_eq!(c, vec![t.pow(g, 5), Element::ONE]);
        // round trip is the identity, exhaustively
        for t in [gf16(), FieldTower::new(3, 1, 2).unwrap(), FieldTower::new(2, 3, 2).unwrap()] {
            for x in t.elements() {
                let c = t.coords(x);
                assert!(c.iter().all(|&ci| t.in_subfield(ci)));
                assert_eq!(t.from_coords(&c), x);
            }
        }
    }

    #[test]
    fn subfield_elements_examples() {
        let t = gf16();
        let sub = t.subfield_elements();
        assert_eq!(sub.len(), 4);
        for &w in &sub {
            assert!(t.in_subfield(w));
        }
        // span check: everything fixed by sigma is a GF(p)-combination of omega powers
        for x in t.elements() {
            if t.in_subfield(x) {
                assert!(sub.contains(&x));
            }
        }
        let t4 = FieldTower::new(2, 1, 2).unwrap();
        assert_eq!(
            t4.subfield_elements(),
            vec![Element::ZERO, Element::ONE]
        );
    }

    #[test]
    fn generator_orders() {
        for t in [gf16(), FieldTower::new(3, 1, 2).unwrap(), FieldTower::new(2, 3, 2).unwrap()] {
            assert_eq!(t.element_order(t.gamma()), Some(t.order() - 1));
            assert_eq!(t.element_order(t.omega()), Some(t.q() - 1));
            assert_eq!(t.frobenius(t.omega(), 1), t.omega());
        }
    }

    #[test]
    fn gamma_basis_is_independent() {
        let t = FieldTower::new(2, 2, 3).unwrap(); // GF(64) over GF(4)
        // coordinate matrix of the basis has rank h by construction of coords
        for (i, &b) in t.gamma_basis().iter().enumerate() {
            let c = t.coords(b);
            assert_eq!(c[i], Element::ONE);
        }
    }

    #[test]
    fn text_forms() {
        let t = gf16();
        let g = t.gamma();
        assert_eq!(t.format_element(Element::ZERO, true), "0");
        assert_eq!(t.format_element(g, false), "2");
        assert_eq!(t.format_element(t.pow(g, 6), true), "a^6");
        assert_eq!(t.parse_element("a^6").unwrap(), t.pow(g, 6));
        assert_eq!(t.parse_element("3").unwrap().code(), 3);
        assert_eq!(t.parse_element("0").unwrap(), Element::ZERO);
        assert_eq!(t.parse_element("a").unwrap(), g);
        assert!(t.parse_element("16").is_err());
        assert!(t.parse_element("x^2").is_err());
    }

    #[test]
    fn descriptor_round_trip() {
        let t = gf16();
        let d = t.descriptor();
        let t2 = FieldTower::from_descriptor(&d).unwrap();
        assert_eq!(*t, *t2);
        // a non-primitive modulus is rejected: x^4 + x^3 + x^2 + x + 1
        assert!(FieldTower::with_modulus(2, 2, 2, &[1, 1, 1, 1, 1]).is_err());
    }

    #[test]
    fn large_field_without_tables() {
        // GF(2^21) exceeds the table limit; polynomial path must still work.
        let t = FieldTower::new(2, 21, 1).unwrap();
        assert!(t.exp.is_empty());
        let g = t.gamma();
        let x = t.pow(g, 12345);
        assert_eq!(t.mul(x, t.inv(x).unwrap()), Element::ONE);
        assert_eq!(t.mul(x, t.pow(g, 54321)), t.pow(g, 12345 + 54321));
    }
}

/// Gaussian inversion of a square matrix over GF(p). Returns `None` when
/// singular.
fn invert_mod_p(mat: &[Vec<u64>], p: u64) -> Option<Vec<Vec<u64>>> {
    let n = mat.len();
    let mut a: Vec<Vec<u64>> = mat.to_vec();
    let mut inv: Vec<Vec<u64>> = (0..n)
        .map(|i| (0..n).map(|j| u64::from(i == j)).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| a[r][col] != 0)?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let pi = mod_inv(a[col][col], p);
        for j in 0..n {
            a[col][j] = a[col][j] * pi % p;
            inv[col][j] = inv[col][j] * pi % p;
        }
        for r in 0..n {
            if r == col || a[r][col] == 0 {
                continue;
            }
            let f = a[r][col];
            for j in 0..n {
                a[r][j] = (a[r][j] + f * (p - a[col][j]) % p) % p;
                inv[r][j] = (inv[r][j] + f * (p - inv[col][j]) % p) % p;
            }
        }
    }
    Some(inv)
}
