//! Exact expression kernel: arithmetic, elementary functions, exact
//! differentiation, substitution, and probabilistic zero-testing.
//!
//! This is deliberately *not* a general simplifier. Expressions are immutable
//! trees over exact rational constants, named parameters, variables, and
//! formal function symbols. Identities are decided by [`is_zero`], which
//! samples random in-domain points and compares against a relative tolerance,
//! instead of canonical rewriting.
//!
//! Construction folds constants lightly (flattening sums/products, dropping
//! zeros and ones) so that derivative trees stay readable, but no term
//! collection is attempted.

mod collect;
mod parser;

pub use collect::expand;
pub use parser::{parse, ParseError};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

/// Exact rational scalar used for all symbolic constants.
pub type Rat = BigRational;

/// Interned symbol name (variable, parameter, or function identifier).
///
/// Cloning is cheap; equality and ordering are by name.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sym(Arc<str>);

impl Sym {
    pub fn new(name: &str) -> Self {
        Sym(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<&str> for Sym {
    fn from(s: &str) -> Self {
        Sym::new(s)
    }
}

/// Definite integral with a fixed rational lower limit and an expression
/// upper limit. The integrand is an expression in a dedicated dummy variable.
///
/// Differentiation uses the fundamental theorem of calculus: the derivative
/// with respect to any variable is `integrand(upper) * d(upper)`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct Quadrature {
    pub dummy: Sym,
    pub integrand: Expr,
    pub lower: Rat,
    pub upper: Expr,
}

/// Symbolic expression tree.
///
/// The derived ordering is structural and carries no mathematical meaning;
/// it exists so expressions can key ordered maps during collection.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum Expr {
    /// Exact rational constant.
    Num(Rat),
    /// The circle constant.
    Pi,
    /// Named parameter (ρ, κ₁, a₁, …); numeric only at evaluation time.
    Param(Sym),
    /// Variable (base, jet, or reduction variable).
    Var(Sym),
    /// Application of a formal function symbol: `name` differentiated
    /// `order` times, applied to `arg`.
    Func {
        name: Sym,
        order: u32,
        arg: Box<Expr>,
    },
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    /// Rational power of a base expression.
    Pow(Box<Expr>, Rat),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Tan(Box<Expr>),
    Atan(Box<Expr>),
    /// Two-argument angle `atan2(y, x)`.
    Atan2(Box<Expr>, Box<Expr>),
    Acos(Box<Expr>),
    Exp(Box<Expr>),
    Ln(Box<Expr>),
    Quad(Box<Quadrature>),
}

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Expr {
    Expr::Num(Rat::from_integer(BigInt::from(n)))
}

/// Exact conversion of an IEEE double to a rational constant.
///
/// Every finite f64 is a rational number, so this loses nothing; it is the
/// sanctioned way to inject numeric group parameters (cos β, e^α, …) into
/// otherwise exact expressions.
pub fn num_f64(x: f64) -> Expr {
    Expr::Num(Rat::from_float(x).expect("finite float"))
}

pub fn var(name: &str) -> Expr {
    Expr::Var(Sym::new(name))
}

pub fn param(name: &str) -> Expr {
    Expr::Param(Sym::new(name))
}

/// Formal function application `name(arg)` (derivative order 0).
pub fn func(name: &str, arg: Expr) -> Expr {
    Expr::Func {
        name: Sym::new(name),
        order: 0,
        arg: Box::new(arg),
    }
}

impl Expr {
    pub fn zero() -> Expr {
        int(0)
    }

    pub fn one() -> Expr {
        int(1)
    }

    pub fn is_num_zero(&self) -> bool {
        matches!(self, Expr::Num(r) if r.is_zero())
    }

    pub fn is_num_one(&self) -> bool {
        matches!(self, Expr::Num(r) if r.is_one())
    }

    /// Flattening sum; folds rational constants, drops zeros.
    pub fn add(terms: Vec<Expr>) -> Expr {
        let mut acc = Rat::zero();
        let mut out: Vec<Expr> = Vec::new();
        for t in terms {
            match t {
                Expr::Num(r) => acc += r,
                Expr::Add(inner) => {
                    for s in inner {
                        match s {
                            Expr::Num(r) => acc += r,
                            other => out.push(other),
                        }
                    }
                }
                other => out.push(other),
            }
        }
        if !acc.is_zero() {
            out.push(Expr::Num(acc));
        }
        match out.len() {
            0 => Expr::zero(),
            1 => out.pop().unwrap(),
            _ => Expr::Add(out),
        }
    }

    /// Flattening product; folds rational constants, collapses on zero.
    pub fn mul(factors: Vec<Expr>) -> Expr {
        let mut acc = Rat::one();
        let mut out: Vec<Expr> = Vec::new();
        for f in factors {
            match f {
                Expr::Num(r) => acc *= r,
                Expr::Mul(inner) => {
                    for g in inner {
                        match g {
                            Expr::Num(r) => acc *= r,
                            other => out.push(other),
                        }
                    }
                }
                other => out.push(other),
            }
        }
        if acc.is_zero() {
            return Expr::zero();
        }
        if !acc.is_one() {
            out.insert(0, Expr::Num(acc));
        }
        match out.len() {
            0 => Expr::one(),
            1 => out.pop().unwrap(),
            _ => Expr::Mul(out),
        }
    }

    pub fn neg(self) -> Expr {
        Expr::mul(vec![int(-1), self])
    }

    pub fn sub(self, rhs: Expr) -> Expr {
        Expr::add(vec![self, rhs.neg()])
    }

    pub fn div(self, rhs: Expr) -> Expr {
        Expr::mul(vec![self, Expr::pow(rhs, rat(-1, 1))])
    }

    /// Rational power. Folds integer powers of rational constants and the
    /// trivial exponents 0 and 1. Nested powers are *not* combined:
    /// `(b^r)^s = b^(rs)` is unsound for fractional exponents on signed
    /// bases, and soundness beats prettiness here.
    pub fn pow(base: Expr, exponent: Rat) -> Expr {
        if exponent.is_zero() {
            return Expr::one();
        }
        if exponent.is_one() {
            return base;
        }
        if let Expr::Num(r) = &base {
            if exponent.is_integer() && !r.is_zero() {
                if let Some(e) = exponent.to_integer().to_i32() {
                    let p = if e >= 0 {
                        pow_rat(r, e as u32)
                    } else {
                        pow_rat(&r.recip(), (-e) as u32)
                    };
                    return Expr::Num(p);
                }
            }
        }
        Expr::Pow(Box::new(base), exponent)
    }

    pub fn sqrt(self) -> Expr {
        Expr::pow(self, rat(1, 2))
    }

    pub fn sin(self) -> Expr {
        Expr::Sin(Box::new(self))
    }

    pub fn cos(self) -> Expr {
        Expr::Cos(Box::new(self))
    }

    pub fn tan(self) -> Expr {
        Expr::Tan(Box::new(self))
    }

    pub fn atan(self) -> Expr {
        Expr::Atan(Box::new(self))
    }

    pub fn atan2(y: Expr, x: Expr) -> Expr {
        Expr::Atan2(Box::new(y), Box::new(x))
    }

    pub fn acos(self) -> Expr {
        Expr::Acos(Box::new(self))
    }

    pub fn exp(self) -> Expr {
        Expr::Exp(Box::new(self))
    }

    pub fn ln(self) -> Expr {
        Expr::Ln(Box::new(self))
    }

    pub fn quad(dummy: &str, integrand: Expr, lower: Rat, upper: Expr) -> Expr {
        Expr::Quad(Box::new(Quadrature {
            dummy: Sym::new(dummy),
            integrand,
            lower,
            upper,
        }))
    }

    /// Exact partial derivative with respect to `v`.
    ///
    /// Total on the grammar: formal function symbols increment their
    /// derivative order under the chain rule, quadratures differentiate via
    /// the fundamental theorem.
    pub fn diff(&self, v: &Sym) -> Expr {
        match self {
            Expr::Num(_) | Expr::Pi | Expr::Param(_) => Expr::zero(),
            Expr::Var(w) => {
                if w == v {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Expr::Func { name, order, arg } => {
                let inner = arg.diff(v);
                if inner.is_num_zero() {
                    return Expr::zero();
                }
                Expr::mul(vec![
                    Expr::Func {
                        name: name.clone(),
                        order: order + 1,
                        arg: arg.clone(),
                    },
                    inner,
                ])
            }
            Expr::Add(ts) => Expr::add(ts.iter().map(|t| t.diff(v)).collect()),
            Expr::Mul(fs) => {
                let mut terms = Vec::with_capacity(fs.len());
                for (i, fi) in fs.iter().enumerate() {
                    let di = fi.diff(v);
                    if di.is_num_zero() {
                        continue;
                    }
                    let mut prod = Vec::with_capacity(fs.len());
                    for (j, fj) in fs.iter().enumerate() {
                        if i == j {
                            prod.push(di.clone());
                        } else {
                            prod.push(fj.clone());
                        }
                    }
                    terms.push(Expr::mul(prod));
                }
                Expr::add(terms)
            }
            Expr::Pow(b, r) => {
                let db = b.diff(v);
                if db.is_num_zero() {
                    return Expr::zero();
                }
                Expr::mul(vec![
                    Expr::Num(r.clone()),
                    Expr::pow((**b).clone(), r.clone() - Rat::one()),
                    db,
                ])
            }
            Expr::Sin(u) => Expr::mul(vec![(**u).clone().cos(), u.diff(v)]),
            Expr::Cos(u) => Expr::mul(vec![int(-1), (**u).clone().sin(), u.diff(v)]),
            Expr::Tan(u) => {
                // d tan = (1 + tan²) du
                let t = (**u).clone().tan();
                Expr::mul(vec![
                    Expr::add(vec![Expr::one(), Expr::pow(t, rat(2, 1))]),
                    u.diff(v),
                ])
            }
            Expr::Atan(u) => {
                let den = Expr::add(vec![Expr::one(), Expr::pow((**u).clone(), rat(2, 1))]);
                u.diff(v).div(den)
            }
            Expr::Atan2(y, x) => {
                // d atan2(y, x) = (x dy - y dx) / (x² + y²)
                let den = Expr::add(vec![
                    Expr::pow((**x).clone(), rat(2, 1)),
                    Expr::pow((**y).clone(), rat(2, 1)),
                ]);
                let num = Expr::add(vec![
                    Expr::mul(vec![(**x).clone(), y.diff(v)]),
                    Expr::mul(vec![int(-1), (**y).clone(), x.diff(v)]),
                ]);
                num.div(den)
            }
            Expr::Acos(u) => {
                let du = u.diff(v);
                if du.is_num_zero() {
                    return Expr::zero();
                }
                let root = Expr::pow(
                    Expr::add(vec![
                        Expr::one(),
                        Expr::pow((**u).clone(), rat(2, 1)).neg(),
                    ]),
                    rat(-1, 2),
                );
                Expr::mul(vec![int(-1), root, du])
            }
            Expr::Exp(u) => Expr::mul(vec![(**u).clone().exp(), u.diff(v)]),
            Expr::Ln(u) => u.diff(v).div((**u).clone()),
            Expr::Quad(q) => {
                let dupper = q.upper.diff(v);
                if dupper.is_num_zero() {
                    return Expr::zero();
                }
                let at_upper = q.integrand.subst_var(&q.dummy, &q.upper);
                Expr::mul(vec![at_upper, dupper])
            }
        }
    }

    /// Substitute `repl` for every occurrence of variable `v`.
    pub fn subst_var(&self, v: &Sym, repl: &Expr) -> Expr {
        self.transform(&|e| match e {
            Expr::Var(w) if w == v => Some(repl.clone()),
            _ => None,
        })
    }

    /// Substitute several variables simultaneously.
    pub fn subst_vars(&self, map: &BTreeMap<Sym, Expr>) -> Expr {
        self.transform(&|e| match e {
            Expr::Var(w) => map.get(w).cloned(),
            _ => None,
        })
    }

    /// Bottom-up rebuild with a node-level rewrite hook.
    ///
    /// `hook` is consulted on each node first; returning `Some` replaces the
    /// node wholesale (no recursion into the replacement). Quadrature dummy
    /// variables shadow the hook inside their integrand.
    pub fn transform(&self, hook: &dyn Fn(&Expr) -> Option<Expr>) -> Expr {
        if let Some(e) = hook(self) {
            return e;
        }
        match self {
            Expr::Num(_) | Expr::Pi | Expr::Param(_) | Expr::Var(_) => self.clone(),
            Expr::Func { name, order, arg } => Expr::Func {
                name: name.clone(),
                order: *order,
                arg: Box::new(arg.transform(hook)),
            },
            Expr::Add(ts) => Expr::add(ts.iter().map(|t| t.transform(hook)).collect()),
            Expr::Mul(fs) => Expr::mul(fs.iter().map(|f| f.transform(hook)).collect()),
            Expr::Pow(b, r) => Expr::pow(b.transform(hook), r.clone()),
            Expr::Sin(u) => u.transform(hook).sin(),
            Expr::Cos(u) => u.transform(hook).cos(),
            Expr::Tan(u) => u.transform(hook).tan(),
            Expr::Atan(u) => u.transform(hook).atan(),
            Expr::Atan2(y, x) => Expr::atan2(y.transform(hook), x.transform(hook)),
            Expr::Acos(u) => u.transform(hook).acos(),
            Expr::Exp(u) => u.transform(hook).exp(),
            Expr::Ln(u) => u.transform(hook).ln(),
            Expr::Quad(q) => {
                let dummy = q.dummy.clone();
                let shielded = |e: &Expr| match e {
                    Expr::Var(w) if *w == dummy => Some(e.clone()),
                    _ => hook(e),
                };
                Expr::Quad(Box::new(Quadrature {
                    dummy: q.dummy.clone(),
                    integrand: q.integrand.transform(&shielded),
                    lower: q.lower.clone(),
                    upper: q.upper.transform(hook),
                }))
            }
        }
    }

    /// Free variables (quadrature dummies are bound and excluded).
    pub fn free_vars(&self) -> BTreeSet<Sym> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out, &mut BTreeSet::new());
        out
    }

    /// Free parameters.
    pub fn free_params(&self) -> BTreeSet<Sym> {
        let mut out = BTreeSet::new();
        self.walk(&mut |e| {
            if let Expr::Param(p) = e {
                out.insert(p.clone());
            }
        });
        out
    }

    /// Formal function symbols appearing in the expression, with the highest
    /// derivative order used for each.
    pub fn func_syms(&self) -> BTreeMap<Sym, u32> {
        let mut out: BTreeMap<Sym, u32> = BTreeMap::new();
        self.walk(&mut |e| {
            if let Expr::Func { name, order, .. } = e {
                let slot = out.entry(name.clone()).or_insert(0);
                *slot = (*slot).max(*order);
            }
        });
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<Sym>, bound: &mut BTreeSet<Sym>) {
        match self {
            Expr::Var(w) => {
                if !bound.contains(w) {
                    out.insert(w.clone());
                }
            }
            Expr::Num(_) | Expr::Pi | Expr::Param(_) => {}
            Expr::Func { arg, .. } => arg.collect_free(out, bound),
            Expr::Add(ts) => {
                for t in ts {
                    t.collect_free(out, bound);
                }
            }
            Expr::Mul(fs) => {
                for f in fs {
                    f.collect_free(out, bound);
                }
            }
            Expr::Pow(b, _) => b.collect_free(out, bound),
            Expr::Sin(u)
            | Expr::Cos(u)
            | Expr::Tan(u)
            | Expr::Atan(u)
            | Expr::Acos(u)
            | Expr::Exp(u)
            | Expr::Ln(u) => u.collect_free(out, bound),
            Expr::Atan2(y, x) => {
                y.collect_free(out, bound);
                x.collect_free(out, bound);
            }
            Expr::Quad(q) => {
                let fresh = bound.insert(q.dummy.clone());
                q.integrand.collect_free(out, bound);
                if fresh {
                    bound.remove(&q.dummy);
                }
                q.upper.collect_free(out, bound);
            }
        }
    }

    fn walk(&self, visit: &mut dyn FnMut(&Expr)) {
        visit(self);
        match self {
            Expr::Num(_) | Expr::Pi | Expr::Param(_) | Expr::Var(_) => {}
            Expr::Func { arg, .. } => arg.walk(visit),
            Expr::Add(ts) => {
                for t in ts {
                    t.walk(visit);
                }
            }
            Expr::Mul(fs) => {
                for f in fs {
                    f.walk(visit);
                }
            }
            Expr::Pow(b, _) => b.walk(visit),
            Expr::Sin(u)
            | Expr::Cos(u)
            | Expr::Tan(u)
            | Expr::Atan(u)
            | Expr::Acos(u)
            | Expr::Exp(u)
            | Expr::Ln(u) => u.walk(visit),
            Expr::Atan2(y, x) => {
                y.walk(visit);
                x.walk(visit);
            }
            Expr::Quad(q) => {
                q.integrand.walk(visit);
                q.upper.walk(visit);
            }
        }
    }
}

fn pow_rat(r: &Rat, e: u32) -> Rat {
    let mut acc = Rat::one();
    for _ in 0..e {
        acc *= r.clone();
    }
    acc
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

/// Errors surfaced by numeric evaluation.
#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum EvalError {
    #[error("unbound symbol `{symbol}`")]
    UnboundSymbol { symbol: String },
    #[error("domain violation in `{subterm}`: {detail} (argument {value})")]
    DomainViolation {
        subterm: String,
        detail: String,
        value: f64,
    },
    #[error("quadrature did not converge: estimated error {est:e} over [{lo}, {hi}]")]
    QuadratureFailure { est: f64, lo: f64, hi: f64 },
}

/// A numeric binding for a formal function symbol: supplies the value of the
/// `order`-th derivative at a point.
#[derive(Clone, Debug)]
pub enum FuncBinding {
    /// Dense polynomial coefficients `c₀ + c₁ t + c₂ t² + …`, differentiated
    /// exactly.
    Poly(Vec<f64>),
    /// An expression in one variable; derivatives are taken symbolically and
    /// evaluated, so trig/exponential bindings stay exact to all orders.
    ExprIn(Sym, Expr),
}

impl FuncBinding {
    /// Polynomial binding from integer coefficients, constant term first.
    pub fn poly(coeffs: &[f64]) -> Self {
        FuncBinding::Poly(coeffs.to_vec())
    }

    pub fn expr_in(var: &str, e: Expr) -> Self {
        FuncBinding::ExprIn(Sym::new(var), e)
    }

    pub fn eval(&self, order: u32, x: f64) -> Result<f64, EvalError> {
        match self {
            FuncBinding::Poly(coeffs) => {
                let mut c = coeffs.clone();
                for _ in 0..order {
                    c = c
                        .iter()
                        .enumerate()
                        .skip(1)
                        .map(|(k, v)| k as f64 * v)
                        .collect();
                }
                Ok(c.iter().rev().fold(0.0, |acc, v| acc * x + v))
            }
            FuncBinding::ExprIn(v, e) => {
                let mut d = e.clone();
                for _ in 0..order {
                    d = d.diff(v);
                }
                let mut env = Env::new();
                env.set_var(v.as_str(), x);
                d.eval(&env)
            }
        }
    }
}

/// Evaluation environment: numeric values for variables and parameters, and
/// bindings for formal function symbols.
#[derive(Clone, Debug, Default)]
pub struct Env {
    pub vars: BTreeMap<Sym, f64>,
    pub params: BTreeMap<Sym, f64>,
    pub funcs: BTreeMap<Sym, FuncBinding>,
}

impl Env {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set_var(&mut self, name: &str, value: f64) -> &mut Self {
        self.vars.insert(Sym::new(name), value);
        self
    }

    pub fn set_param(&mut self, name: &str, value: f64) -> &mut Self {
        self.params.insert(Sym::new(name), value);
        self
    }

    pub fn bind_func(&mut self, name: &str, binding: FuncBinding) -> &mut Self {
        self.funcs.insert(Sym::new(name), binding);
        self
    }
}

/// Scalar abstraction shared by plain `f64` evaluation and forward-mode
/// dual-number evaluation.
///
/// The two chain hooks are the only places a derivative rule enters:
/// `chain(v, d, inner)` lifts a unary map with value `v` and derivative `d`
/// at the inner point, and `chain2` the same for a binary map with partials
/// `da`, `db`.
pub trait Scalar:
    Copy
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Neg<Output = Self>
{
    fn constant(v: f64) -> Self;
    fn value(&self) -> f64;
    fn chain(value: f64, deriv: f64, inner: Self) -> Self;
    fn chain2(value: f64, da: f64, a: Self, db: f64, b: Self) -> Self;
}

impl Scalar for f64 {
    fn constant(v: f64) -> Self {
        v
    }

    fn value(&self) -> f64 {
        *self
    }

    fn chain(value: f64, _deriv: f64, _inner: Self) -> Self {
        value
    }

    fn chain2(value: f64, _da: f64, _a: Self, _db: f64, _b: Self) -> Self {
        value
    }
}

/// Absolute tolerance requested from adaptive quadrature during evaluation.
pub const QUAD_ABS_TOL: f64 = 1e-10;

impl Expr {
    /// Evaluate to an IEEE double. All free symbols must be bound; domain
    /// violations are reported as typed errors naming the offending subterm.
    pub fn eval(&self, env: &Env) -> Result<f64, EvalError> {
        self.eval_scalar::<f64>(env, &BTreeMap::new(), &mut |_| {})
    }

    /// Evaluate while tracking the largest intermediate magnitude, used for
    /// relative scaling in [`is_zero`].
    pub fn eval_tracking(&self, env: &Env) -> Result<(f64, f64), EvalError> {
        let mut max = 0.0f64;
        let v = self.eval_scalar::<f64>(env, &BTreeMap::new(), &mut |m| {
            if m.is_finite() && m.abs() > max {
                max = m.abs();
            }
        })?;
        Ok((v, max))
    }

    /// Generic evaluation. `seeds` overrides variable lookups with scalar
    /// values carrying derivative payloads (see [`Scalar`]); variables not in
    /// `seeds` fall back to `env.vars` as constants.
    pub fn eval_scalar<S: Scalar>(
        &self,
        env: &Env,
        seeds: &BTreeMap<Sym, S>,
        track: &mut dyn FnMut(f64),
    ) -> Result<S, EvalError> {
        let r = self.eval_inner(env, seeds, track)?;
        track(r.value());
        Ok(r)
    }

    fn eval_inner<S: Scalar>(
        &self,
        env: &Env,
        seeds: &BTreeMap<Sym, S>,
        track: &mut dyn FnMut(f64),
    ) -> Result<S, EvalError> {
        let dom = |sub: &Expr, detail: &str, value: f64| EvalError::DomainViolation {
            subterm: sub.to_string(),
            detail: detail.to_string(),
            value,
        };
        match self {
            Expr::Num(r) => Ok(S::constant(rat_to_f64(r))),
            Expr::Pi => Ok(S::constant(std::f64::consts::PI)),
            Expr::Param(p) => env
                .params
                .get(p)
                .map(|v| S::constant(*v))
                .ok_or_else(|| EvalError::UnboundSymbol {
                    symbol: p.to_string(),
                }),
            Expr::Var(w) => {
                if let Some(s) = seeds.get(w) {
                    Ok(*s)
                } else if let Some(v) = env.vars.get(w) {
                    Ok(S::constant(*v))
                } else {
                    Err(EvalError::UnboundSymbol {
                        symbol: w.to_string(),
                    })
                }
            }
            Expr::Func { name, order, arg } => {
                let binding = env
                    .funcs
                    .get(name)
                    .ok_or_else(|| EvalError::UnboundSymbol {
                        symbol: format!("{name}(·)"),
                    })?;
                let a = arg.eval_scalar(env, seeds, track)?;
                let v = binding.eval(*order, a.value())?;
                let d = binding.eval(*order + 1, a.value())?;
                Ok(S::chain(v, d, a))
            }
            Expr::Add(ts) => {
                let mut acc = S::constant(0.0);
                for t in ts {
                    acc = acc + t.eval_scalar(env, seeds, track)?;
                }
                Ok(acc)
            }
            Expr::Mul(fs) => {
                let mut acc = S::constant(1.0);
                for f in fs {
                    acc = acc * f.eval_scalar(env, seeds, track)?;
                }
                Ok(acc)
            }
            Expr::Pow(b, r) => {
                let base = b.eval_scalar(env, seeds, track)?;
                let bv = base.value();
                let e = rat_to_f64(r);
                if !r.is_integer() && bv < 0.0 {
                    return Err(dom(self, "fractional power of negative base", bv));
                }
                if e < 0.0 && bv == 0.0 {
                    return Err(dom(self, "negative power of zero", bv));
                }
                let v = bv.powf(e);
                if !v.is_finite() {
                    return Err(dom(self, "non-finite power result", bv));
                }
                let d = if bv == 0.0 { 0.0 } else { e * v / bv };
                Ok(S::chain(v, d, base))
            }
            Expr::Sin(u) => {
                let a = u.eval_scalar(env, seeds, track)?;
                Ok(S::chain(a.value().sin(), a.value().cos(), a))
            }
            Expr::Cos(u) => {
                let a = u.eval_scalar(env, seeds, track)?;
                Ok(S::chain(a.value().cos(), -a.value().sin(), a))
            }
            Expr::Tan(u) => {
                let a = u.eval_scalar(env, seeds, track)?;
                let v = a.value().tan();
                if !v.is_finite() {
                    return Err(dom(self, "tangent pole", a.value()));
                }
                Ok(S::chain(v, 1.0 + v * v, a))
            }
            Expr::Atan(u) => {
                let a = u.eval_scalar(env, seeds, track)?;
                let x = a.value();
                Ok(S::chain(x.atan(), 1.0 / (1.0 + x * x), a))
            }
            Expr::Atan2(ye, xe) => {
                let yv = ye.eval_scalar(env, seeds, track)?;
                let xv = xe.eval_scalar(env, seeds, track)?;
                let (y, x) = (yv.value(), xv.value());
                let r2 = x * x + y * y;
                if r2 == 0.0 {
                    return Err(dom(self, "atan2 at the origin", 0.0));
                }
                Ok(S::chain2(y.atan2(x), x / r2, yv, -y / r2, xv))
            }
            Expr::Acos(u) => {
                let a = u.eval_scalar(env, seeds, track)?;
                let x = a.value();
                if !(-1.0..=1.0).contains(&x) {
                    return Err(dom(self, "arccos argument outside [-1, 1]", x));
                }
                let d = -1.0 / (1.0 - x * x).sqrt();
                if !d.is_finite() {
                    return Err(dom(self, "arccos at a branch endpoint", x));
                }
                Ok(S::chain(x.acos(), d, a))
            }
            Expr::Exp(u) => {
                let a = u.eval_scalar(env, seeds, track)?;
                let v = a.value().exp();
                Ok(S::chain(v, v, a))
            }
            Expr::Ln(u) => {
                let a = u.eval_scalar(env, seeds, track)?;
                let x = a.value();
                if x <= 0.0 {
                    return Err(dom(self, "logarithm of a non-positive value", x));
                }
                Ok(S::chain(x.ln(), 1.0 / x, a))
            }
            Expr::Quad(q) => {
                let hi = q.upper.eval_scalar(env, seeds, track)?;
                let lo = rat_to_f64(&q.lower);
                let f = |x: f64| -> Result<f64, EvalError> {
                    let mut inner = env.clone();
                    inner.vars.insert(q.dummy.clone(), x);
                    q.integrand.eval(&inner)
                };
                let value = crate::solutions::quad::integrate(&f, lo, hi.value(), QUAD_ABS_TOL)?;
                let slope = f(hi.value())?;
                Ok(S::chain(value, slope, hi))
            }
        }
    }
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Fall back through a quotient of big integers scaled into range.
        let n = r.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = r.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

// ---------------------------------------------------------------------------
// Randomized zero-testing
// ---------------------------------------------------------------------------

/// Sampling region for [`is_zero`]: per-symbol ranges with a fallback range
/// for anything not listed.
#[derive(Clone, Debug)]
pub struct SampleBox {
    ranges: BTreeMap<Sym, (f64, f64)>,
    default_range: (f64, f64),
}

impl SampleBox {
    /// The default verification box: t, x, y ∈ [0.5, 2]; u ∈ [0.25, 1]
    /// (kept clear of u = 0 so v/u angles stay well-defined); v, σ ∈ [−1, 1];
    /// θ ∈ [0.2, 1.2] (clear of sin 2θ = 0); unlisted symbols in [0.5, 2].
    pub fn default_box() -> Self {
        let mut b = SampleBox {
            ranges: BTreeMap::new(),
            default_range: (0.5, 2.0),
        };
        b.set("t", 0.5, 2.0);
        b.set("x", 0.5, 2.0);
        b.set("y", 0.5, 2.0);
        b.set("u", 0.25, 1.0);
        b.set("v", -1.0, 1.0);
        b.set("sigma", -1.0, 1.0);
        b.set("theta", 0.2, 1.2);
        b
    }

    pub fn set(&mut self, name: &str, lo: f64, hi: f64) -> &mut Self {
        self.ranges.insert(Sym::new(name), (lo, hi));
        self
    }

    pub fn with(mut self, name: &str, lo: f64, hi: f64) -> Self {
        self.set(name, lo, hi);
        self
    }

    pub fn set_default_range(&mut self, lo: f64, hi: f64) -> &mut Self {
        self.default_range = (lo, hi);
        self
    }

    pub(crate) fn sample(&self, name: &Sym, rng: &mut ChaCha8Rng) -> f64 {
        let (lo, hi) = self.ranges.get(name).copied().unwrap_or(self.default_range);
        rng.gen_range(lo..=hi)
    }
}

/// Options for randomized zero-testing.
#[derive(Clone, Debug)]
pub struct ZeroOpts {
    pub sample_box: SampleBox,
    pub trials: usize,
    pub tol: f64,
    pub seed: u64,
    /// Pinned values and function bindings; pinned symbols are not sampled.
    pub env: Env,
}

impl Default for ZeroOpts {
    fn default() -> Self {
        ZeroOpts {
            sample_box: SampleBox::default_box(),
            trials: 32,
            tol: 1e-9,
            seed: 0x5eed,
            env: Env::new(),
        }
    }
}

/// A point at which a claimed identity failed, with the residual value seen.
#[derive(Clone, Debug)]
pub struct Witness {
    pub point: BTreeMap<String, f64>,
    pub value: f64,
    pub scale: f64,
}

/// Outcome of a randomized zero test.
#[derive(Clone, Debug)]
pub struct ZeroTest {
    pub is_zero: bool,
    /// Largest |residual| / (1 + largest subterm) seen over the samples.
    pub max_relative: f64,
    pub witness: Option<Witness>,
    pub samples: usize,
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum ZeroTestError {
    #[error("sampling never landed in the domain of the expression: last error: {last}")]
    AllPointsOutOfDomain { last: String },
}

/// Probabilistic zero test: samples random in-domain points and checks
/// |e| ≤ tol · (1 + |largest subterm|) at each. On failure returns a witness
/// point that re-evaluates to the reported value.
pub fn is_zero(e: &Expr, opts: &ZeroOpts) -> Result<ZeroTest, ZeroTestError> {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let free_vars = e.free_vars();
    let free_params = e.free_params();

    let mut ok = 0usize;
    let mut attempts = 0usize;
    let max_attempts = opts.trials * 64 + 64;
    let mut max_rel = 0.0f64;
    let mut last_err = String::from("none");

    while ok < opts.trials && attempts < max_attempts {
        attempts += 1;
        let mut env = opts.env.clone();
        let mut point = BTreeMap::new();
        for v in &free_vars {
            if !env.vars.contains_key(v) {
                let val = opts.sample_box.sample(v, &mut rng);
                env.vars.insert(v.clone(), val);
            }
            point.insert(v.to_string(), env.vars[v]);
        }
        for p in &free_params {
            if !env.params.contains_key(p) {
                let val = opts.sample_box.sample(p, &mut rng);
                env.params.insert(p.clone(), val);
            }
            point.insert(p.to_string(), env.params[p]);
        }
        match e.eval_tracking(&env) {
            Ok((value, scale)) => {
                ok += 1;
                let rel = value.abs() / (1.0 + scale);
                if rel > max_rel {
                    max_rel = rel;
                }
                if rel > opts.tol {
                    return Ok(ZeroTest {
                        is_zero: false,
                        max_relative: rel,
                        witness: Some(Witness {
                            point,
                            value,
                            scale,
                        }),
                        samples: ok,
                    });
                }
            }
            Err(err) => {
                last_err = err.to_string();
            }
        }
    }
    if ok == 0 {
        return Err(ZeroTestError::AllPointsOutOfDomain { last: last_err });
    }
    Ok(ZeroTest {
        is_zero: true,
        max_relative: max_rel,
        witness: None,
        samples: ok,
    })
}

// ---------------------------------------------------------------------------
// Display
// ---------------------------------------------------------------------------

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

impl Expr {
    /// Precedence levels: 0 sum, 1 product, 2 unary minus, 3 power, 4 atom.
    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
        match self {
            Expr::Num(r) => {
                let neg = r.is_negative();
                let need_paren = (neg && prec >= 1) || (!r.is_integer() && prec >= 1);
                if need_paren {
                    write!(f, "({r})")
                } else {
                    write!(f, "{r}")
                }
            }
            Expr::Pi => write!(f, "pi"),
            Expr::Param(p) => write!(f, "{p}"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Func { name, order, arg } => {
                write!(f, "{name}")?;
                for _ in 0..*order {
                    write!(f, "'")?;
                }
                write!(f, "(")?;
                arg.fmt_prec(f, 0)?;
                write!(f, ")")
            }
            Expr::Add(ts) => {
                if prec >= 1 {
                    write!(f, "(")?;
                }
                for (i, t) in ts.iter().enumerate() {
                    // Render a leading negative factor as subtraction.
                    if i > 0 {
                        if let Some(rest) = t.as_negated() {
                            write!(f, " - ")?;
                            rest.fmt_prec(f, 1)?;
                            continue;
                        }
                        write!(f, " + ")?;
                    }
                    t.fmt_prec(f, 1)?;
                }
                if prec >= 1 {
                    write!(f, ")")?;
                }
                Ok(())
            }
            Expr::Mul(fs) => {
                if prec >= 2 {
                    write!(f, "(")?;
                }
                for (i, g) in fs.iter().enumerate() {
                    if i > 0 {
                        write!(f, "*")?;
                    }
                    g.fmt_prec(f, 2)?;
                }
                if prec >= 2 {
                    write!(f, ")")?;
                }
                Ok(())
            }
            Expr::Pow(b, r) => {
                if prec > 3 {
                    write!(f, "(")?;
                }
                b.fmt_prec(f, 4)?;
                if r.is_integer() && !r.is_negative() {
                    write!(f, "^{r}")?;
                } else {
                    write!(f, "^({r})")?;
                }
                if prec > 3 {
                    write!(f, ")")?;
                }
                Ok(())
            }
            Expr::Sin(u) => write_call(f, "sin", &[u]),
            Expr::Cos(u) => write_call(f, "cos", &[u]),
            Expr::Tan(u) => write_call(f, "tan", &[u]),
            Expr::Atan(u) => write_call(f, "atan", &[u]),
            Expr::Atan2(y, x) => write_call(f, "atan2", &[y, x]),
            Expr::Acos(u) => write_call(f, "acos", &[u]),
            Expr::Exp(u) => write_call(f, "exp", &[u]),
            Expr::Ln(u) => write_call(f, "ln", &[u]),
            Expr::Quad(q) => write!(
                f,
                "quad({}, {}, {}, {})",
                q.dummy, q.integrand, q.lower, q.upper
            ),
        }
    }

    /// If this term is `(-1) * rest…`, return `rest…` for subtraction
    /// rendering.
    fn as_negated(&self) -> Option<Expr> {
        if let Expr::Mul(fs) = self {
            if let Some(Expr::Num(r)) = fs.first() {
                if *r == -Rat::one() {
                    return Some(Expr::mul(fs[1..].to_vec()));
                }
            }
        }
        None
    }
}

fn write_call(f: &mut fmt::Formatter<'_>, name: &str, args: &[&Expr]) -> fmt::Result {
    write!(f, "{name}(")?;
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        a.fmt_prec(f, 0)?;
    }
    write!(f, ")")
}

// ---------------------------------------------------------------------------
// Operator sugar for building expressions in Rust code
// ---------------------------------------------------------------------------

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::add(vec![self, rhs])
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::sub(self, rhs)
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::mul(vec![self, rhs])
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::div(self, rhs)
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env_xy(x: f64, y: f64) -> Env {
        let mut env = Env::new();
        env.set_var("x", x).set_var("y", y);
        env
    }

    #[test]
    fn eval_polynomial_point() {
        let e = parse("x^2 + y^2").unwrap();
        assert_eq!(e.eval(&env_xy(3.0, 4.0)).unwrap(), 25.0);
    }

    #[test]
    fn diff_sin_double_angle() {
        let e = parse("sin(2*theta)").unwrap();
        let d = e.diff(&Sym::new("theta"));
        let expected = parse("2*cos(2*theta)").unwrap();
        let residual = d - expected;
        let r = is_zero(&residual, &ZeroOpts::default()).unwrap();
        assert!(r.is_zero, "residual {:?}", r.witness);
    }

    #[test]
    fn diff_atan_ratio_matches_finite_differences() {
        use rand::SeedableRng;
        let e = parse("atan(y/x)").unwrap();
        let d = e.diff(&Sym::new("x"));
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let x = rng.gen_range(0.5..2.0);
            let y = rng.gen_range(0.5..2.0);
            let h = 1e-6;
            let fp = e.eval(&env_xy(x + h, y)).unwrap();
            let fm = e.eval(&env_xy(x - h, y)).unwrap();
            let fd = (fp - fm) / (2.0 * h);
            let sym = d.eval(&env_xy(x, y)).unwrap();
            assert!((fd - sym).abs() < 1e-7, "fd {fd} vs sym {sym}");
            // Also against the closed form -y/(x²+y²).
            let closed = -y / (x * x + y * y);
            assert!((sym - closed).abs() < 1e-12);
        }
    }

    #[test]
    fn acos_out_of_domain_is_typed() {
        let e = parse("acos(x)").unwrap();
        let err = e.eval(&env_xy(1.5, 0.0)).unwrap_err();
        match err {
            EvalError::DomainViolation { value, .. } => assert_eq!(value, 1.5),
            other => panic!("expected domain violation, got {other}"),
        }
    }

    #[test]
    fn unbound_symbol_is_typed() {
        let e = parse("x + q").unwrap();
        let err = e.eval(&env_xy(1.0, 1.0)).unwrap_err();
        assert_eq!(
            err,
            EvalError::UnboundSymbol {
                symbol: "q".into()
            }
        );
    }

    #[test]
    fn func_symbol_derivative_under_binding() {
        // f(t) = t³ bound as a polynomial: f'(2) = 12.
        let e = parse("f'(t)").unwrap();
        let mut env = Env::new();
        env.set_var("t", 2.0)
            .bind_func("f", FuncBinding::poly(&[0.0, 0.0, 0.0, 1.0]));
        assert!((e.eval(&env).unwrap() - 12.0).abs() < 1e-12);
    }

    #[test]
    fn func_symbol_chain_rule() {
        // d/dx f(x²) = f'(x²)·2x with f = sin bound symbolically.
        let e = func("f", parse("x^2").unwrap());
        let d = e.diff(&Sym::new("x"));
        let mut env = Env::new();
        env.set_var("x", 1.3).bind_func(
            "f",
            FuncBinding::expr_in("s", parse("sin(s)").unwrap()),
        );
        let got = d.eval(&env).unwrap();
        let want = (1.3f64 * 1.3).cos() * 2.0 * 1.3;
        assert!((got - want).abs() < 1e-12);
    }

    #[test]
    fn pythagorean_identity_is_zero() {
        let e = parse("sin(x)^2 + cos(x)^2 - 1").unwrap();
        let r = is_zero(&e, &ZeroOpts::default()).unwrap();
        assert!(r.is_zero);
        assert!(r.samples >= 32);
    }

    #[test]
    fn non_identity_yields_witness() {
        let e = parse("x - y").unwrap();
        let r = is_zero(&e, &ZeroOpts::default()).unwrap();
        assert!(!r.is_zero);
        let w = r.witness.expect("witness required on failure");
        // The witness must re-evaluate to the reported value.
        let mut env = Env::new();
        for (k, v) in &w.point {
            env.set_var(k, *v);
        }
        assert!((e.eval(&env).unwrap() - w.value).abs() < 1e-15);
    }

    #[test]
    fn atan2_matches_atan_on_right_half_plane() {
        let e = parse("atan2(y, x) - atan(y/x)").unwrap();
        let r = is_zero(&e, &ZeroOpts::default()).unwrap();
        assert!(r.is_zero, "witness {:?}", r.witness);
    }

    #[test]
    fn atan2_derivatives() {
        let e = parse("atan2(y, x)").unwrap();
        let dx = e.diff(&Sym::new("x"));
        let dy = e.diff(&Sym::new("y"));
        let env = env_xy(0.7, 1.9);
        let (x, y) = (0.7, 1.9);
        assert!((dx.eval(&env).unwrap() - (-y / (x * x + y * y))).abs() < 1e-12);
        assert!((dy.eval(&env).unwrap() - (x / (x * x + y * y))).abs() < 1e-12);
    }

    #[test]
    fn quadrature_evaluates_and_differentiates() {
        // q(x) = ∫₁^{x²} dη/η = 2 ln x; dq/dx = 2/x by the chain rule
        // through the fundamental theorem.
        let q = Expr::quad(
            "eta",
            parse("1/eta").unwrap(),
            rat(1, 1),
            parse("x^2").unwrap(),
        );
        let env = env_xy(1.7, 0.0);
        let got = q.eval(&env).unwrap();
        assert!((got - 2.0 * 1.7f64.ln()).abs() < 1e-9);
        let d = q.diff(&Sym::new("x"));
        let gotd = d.eval(&env).unwrap();
        assert!((gotd - 2.0 / 1.7).abs() < 1e-9);
    }

    #[test]
    fn quadrature_dummy_is_shadowed() {
        // Substituting for the dummy variable must not touch the integrand.
        let q = Expr::quad(
            "eta",
            parse("eta^2").unwrap(),
            rat(0, 1),
            parse("x").unwrap(),
        );
        let s = q.subst_var(&Sym::new("eta"), &int(5));
        let env = env_xy(2.0, 0.0);
        assert!((s.eval(&env).unwrap() - 8.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn derivative_of_square_root_hypotenuse() {
        let e = parse("sqrt(x^2 + y^2)").unwrap();
        let d = e.diff(&Sym::new("x"));
        let env = env_xy(3.0, 4.0);
        assert!((d.eval(&env).unwrap() - 0.6).abs() < 1e-12);
    }

    #[test]
    fn display_round_trips_through_parser() {
        let cases = [
            "x^2 + y^2",
            "sin(2*theta)",
            "atan2(y, x)",
            "-x*y + 3/4",
            "rho*(x^2 - y^2)^(1/2)",
            "f''(t)*exp(-t)",
            "t^(-2)",
        ];
        let mut env = Env::new();
        env.set_var("x", 1.9)
            .set_var("y", 1.4)
            .set_var("theta", 0.8)
            .set_var("t", 1.1)
            .set_param("rho", 1.5)
            .bind_func("f", FuncBinding::poly(&[1.0, 2.0, 3.0, 4.0]));
        for c in cases {
            let e = parse(c).unwrap();
            let text = e.to_string();
            let back = parse(&text).unwrap_or_else(|err| {
                panic!("re-parse of `{text}` failed: {err}");
            });
            let a = e.eval(&env).unwrap();
            let b = back.eval(&env).unwrap();
            assert!(
                (a - b).abs() <= 1e-12 * (1.0 + a.abs()),
                "case `{c}` printed `{text}`: {a} vs {b}"
            );
        }
    }

    #[test]
    fn decimal_literals_are_exact() {
        let e = parse("0.125*x").unwrap();
        assert_eq!(e, Expr::mul(vec![Expr::Num(rat(1, 8)), var("x")]));
    }

    #[test]
    fn is_zero_rejects_tiny_but_structural_nonzero() {
        // x·1e-6 is "small" but fails a relative tolerance of 1e-9 against
        // subterm scale ~1.
        let e = parse("x * 0.000001").unwrap();
        let r = is_zero(&e, &ZeroOpts::default()).unwrap();
        assert!(!r.is_zero);
    }

    #[test]
    fn all_points_out_of_domain_is_reported() {
        // acos(x + 10) is undefined throughout the default box.
        let e = parse("acos(x + 10)").unwrap();
        let err = is_zero(&e, &ZeroOpts::default()).unwrap_err();
        matches!(err, ZeroTestError::AllPointsOutOfDomain { .. });
    }

    #[test]
    fn free_symbol_queries() {
        let e = parse("rho*f'(t) + x").unwrap();
        let vars: Vec<_> = e.free_vars().into_iter().map(|s| s.to_string()).collect();
        assert_eq!(vars, vec!["t", "x"]);
        let params: Vec<_> = e.free_params().into_iter().map(|s| s.to_string()).collect();
        assert_eq!(params, vec!["rho"]);
        assert_eq!(e.func_syms()[&Sym::new("f")], 1);
    }
}
