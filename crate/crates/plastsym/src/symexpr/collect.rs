//! Polynomial expansion and collection over opaque atoms.
//!
//! [`expand`] rewrites an expression as a collected sum of monomials
//! `coefficient · atom₁^k₁ · atom₂^k₂ · …`, where an *atom* is any node that
//! is not a sum, a product, or a small integer power: variables, parameters,
//! formal function applications, trig/exp/log subtrees (with their insides
//! expanded recursively), fractional powers. Exponents are signed, so
//! `t² · t⁻²` collects to 1 and Laurent-style coefficients (ubiquitous in
//! the similarity variables, which divide by powers of t) cancel exactly.
//!
//! This is not a simplifier with identities — `sin(2t)` and `2 sin t cos t`
//! stay distinct atoms — but it cancels everything that cancels
//! *polynomially*, which is what keeps iterated Lie brackets (and the
//! Baker–Campbell–Hausdorff series built from them) from growing without
//! bound: bracket components of the algebras handled here are polynomial in
//! the coordinates once slot functions are polynomial.
//!
//! Collection works pointwise on values: the output equals the input at
//! every point where the input is defined. Cancelling an inverse against a
//! factor can erase a removable singularity (`t/t ↦ 1`), so the output may
//! be defined at isolated points where the input was not.

use super::{Expr, Rat};
use num_traits::{One, ToPrimitive, Zero};
use std::collections::BTreeMap;

/// Largest integer exponent expanded multiplicatively; larger powers stay
/// atomic.
const POW_EXPAND_CAP: i32 = 8;

type Monomial = BTreeMap<Expr, i64>;
type Poly = BTreeMap<Monomial, Rat>;

/// Expand and collect. The result is numerically identical to the input and
/// in a deterministic (sorted) arrangement, so structurally equal inputs map
/// to structurally equal outputs.
pub fn expand(e: &Expr) -> Expr {
    rebuild(as_poly(e))
}

fn poly_const(r: Rat) -> Poly {
    if r.is_zero() {
        return Poly::new();
    }
    let mut p = Poly::new();
    p.insert(Monomial::new(), r);
    p
}

fn poly_atom(a: Expr) -> Poly {
    let mut m = Monomial::new();
    m.insert(a, 1);
    let mut p = Poly::new();
    p.insert(m, Rat::one());
    p
}

fn poly_add(mut a: Poly, b: Poly) -> Poly {
    for (m, c) in b {
        let entry = a.entry(m).or_insert_with(Rat::zero);
        *entry += c;
        if entry.is_zero() {
            // Removing now keeps the map canonical.
        }
    }
    a.retain(|_, c| !c.is_zero());
    a
}

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            let mut m = ma.clone();
            for (atom, k) in mb {
                *m.entry(atom.clone()).or_insert(0) += k;
            }
            m.retain(|_, k| *k != 0);
            let entry = out.entry(m).or_insert_with(Rat::zero);
            *entry += ca.clone() * cb.clone();
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn poly_pow(base: &Poly, e: u32) -> Poly {
    let mut acc = poly_const(Rat::one());
    for _ in 0..e {
        acc = poly_mul(&acc, base);
    }
    acc
}

fn as_poly(e: &Expr) -> Poly {
    match e {
        Expr::Num(r) => poly_const(r.clone()),
        Expr::Pi | Expr::Param(_) | Expr::Var(_) => poly_atom(e.clone()),
        Expr::Add(ts) => ts
            .iter()
            .map(as_poly)
            .fold(Poly::new(), poly_add),
        Expr::Mul(fs) => {
            let mut acc = poly_const(Rat::one());
            for f in fs {
                acc = poly_mul(&acc, &as_poly(f));
            }
            acc
        }
        Expr::Pow(b, r) => pow_poly(b, r),
        // Every other node is an atom with its children canonicalized.
        Expr::Func { name, order, arg } => poly_atom(Expr::Func {
            name: name.clone(),
            order: *order,
            arg: Box::new(expand(arg)),
        }),
        Expr::Sin(u) => poly_atom(expand(u).sin()),
        Expr::Cos(u) => poly_atom(expand(u).cos()),
        Expr::Tan(u) => poly_atom(expand(u).tan()),
        Expr::Atan(u) => poly_atom(expand(u).atan()),
        Expr::Atan2(y, x) => poly_atom(Expr::atan2(expand(y), expand(x))),
        Expr::Acos(u) => poly_atom(expand(u).acos()),
        Expr::Exp(u) => poly_atom(expand(u).exp()),
        Expr::Ln(u) => poly_atom(expand(u).ln()),
        Expr::Quad(q) => poly_atom(Expr::Quad(Box::new(super::Quadrature {
            dummy: q.dummy.clone(),
            integrand: expand(&q.integrand),
            lower: q.lower.clone(),
            upper: expand(&q.upper),
        }))),
    }
}

fn pow_poly(b: &Expr, r: &Rat) -> Poly {
    if r.is_integer() {
        if let Some(k) = r.to_integer().to_i64() {
            if (0..=POW_EXPAND_CAP as i64).contains(&k) {
                return poly_pow(&as_poly(b), k as u32);
            }
            if k < 0 {
                return inv_power(expand(b), k);
            }
            // Exponents above the cap fall through and stay atomic.
        }
    }
    poly_atom(Expr::pow(expand(b), r.clone()))
}

/// A negative integer power of a canonicalized base, as a signed monomial.
///
/// A product base distributes over its factors, a nonzero rational folds,
/// and an integer-power base merges its exponent (`(b^m)^k = b^(mk)`, exact
/// for integer m and k apart from re-admitting the removable point b = 0
/// when both are negative). Anything else — including a sum — becomes a
/// single monomial entry with exponent `k`, so repeated division by the
/// same subexpression still collects.
fn inv_power(base: Expr, k: i64) -> Poly {
    debug_assert!(k < 0);
    match base {
        Expr::Num(n) if !n.is_zero() => {
            // The constructor folds integer powers of nonzero rationals.
            match Expr::pow(Expr::Num(n), Rat::from_integer(k.into())) {
                Expr::Num(folded) => poly_const(folded),
                other => poly_atom(other),
            }
        }
        Expr::Mul(fs) => fs
            .into_iter()
            .fold(poly_const(Rat::one()), |acc, f| {
                poly_mul(&acc, &inv_power(f, k))
            }),
        Expr::Pow(inner, m) if m.is_integer() => {
            pow_poly(&inner, &(m * Rat::from_integer(k.into())))
        }
        atom => {
            let mut m = Monomial::new();
            m.insert(atom, k);
            let mut p = Poly::new();
            p.insert(m, Rat::one());
            p
        }
    }
}

fn rebuild(p: Poly) -> Expr {
    let mut terms = Vec::with_capacity(p.len());
    for (m, c) in p {
        let mut factors = Vec::with_capacity(m.len() + 1);
        if !c.is_one() {
            factors.push(Expr::Num(c));
        }
        for (atom, k) in m {
            factors.push(Expr::pow(atom, Rat::from_integer(k.into())));
        }
        terms.push(Expr::mul(factors));
    }
    Expr::add(terms)
}
