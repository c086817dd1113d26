//! Constructive normal form for one-dimensional wing subalgebras ⟨X_f + Y_g⟩
//! with polynomial slots.
//!
//! The reduction applies the documented moves in order:
//!
//! 1. If the Wronskian f·g′ − f′·g vanishes identically (the slots are
//!    proportional), a rotation exp(βL) kills the Y-component.
//! 2. A time translation exp(t_z·P0) moves a root of the leading slot to
//!    t = 0. Roots are searched on the working interval [−3, 3] by bisection
//!    on sign changes; when none exists the constant-lead fallback applies
//!    (the representative keeps a non-vanishing value at t = 0, i.e. m1 = 0).
//! 3. The spanning vector is divided by the first non-vanishing Taylor
//!    coefficient, so the leading monomial t^{m1} has unit coefficient.
//! 4. A dilation exp(αD) rescales the next surviving coefficient to μ = ±1.
//!
//! The result is f(t) = t^{m1} + μ(t^{m2} + …) with μ ∈ {−1, 0, 1}; when the
//! X-slot reduces to a constant, the same moves are applied to the Y-slot
//! instead (the constant-X branch). The conjugator is returned as an ordered
//! list of group elements together with the accumulated span rescale, so that
//!
//! ```text
//! Ad(last) ∘ … ∘ Ad(first) (X_f + Y_g)  =  rescale · (X_{f'} + Y_{g'}).
//! ```
//!
//! A fine point about step 2: the working interval is *not* invariant under
//! the dilation of step 4, so a constant-lead result can re-acquire a root in
//! [−3, 3] (e.g. 1 − t²/100 dilates to 1 − t²). Whenever that happens the
//! procedure re-runs from the translation step on the intermediate result —
//! at most one restart is ever needed — which makes the map idempotent.

use crate::adjoint::{ad_closed, GroupElement};
use crate::symexpr::{expand, is_zero, num_f64, rat, var, Expr, ZeroOpts, ZeroTest, ZeroTestError};
use crate::vfield::{TableElem, VectorField};

/// Relative threshold below which a coefficient produced by the reduction is
/// treated as zero (dust from float shifts and rotations).
const COEFF_EPS: f64 = 1e-10;

/// Working interval for locating a real root of the leading slot.
pub const ROOT_INTERVAL: (f64, f64) = (-3.0, 3.0);

/// Which slot carries the reduced shape t^{m1} + μ(t^{m2} + …).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormalBranch {
    /// The X-slot is reduced; the Y-slot is transported along.
    X,
    /// The X-slot is a constant; the Y-slot is reduced instead.
    ConstantX,
}

/// Outcome of the one-dimensional reduction.
#[derive(Clone, Debug)]
pub struct NormalForm {
    pub branch: NormalBranch,
    /// Order of the first surviving coefficient of the reduced slot.
    pub m1: usize,
    /// Order of the second surviving coefficient, when one exists.
    pub m2: Option<usize>,
    /// Sign of the m2 coefficient after the dilation: −1, 0 (monomial), or 1.
    pub mu: i32,
    /// X-slot coefficients after reduction, ascending powers of t.
    pub f: Vec<f64>,
    /// Y-slot coefficients after reduction.
    pub g: Vec<f64>,
    /// Group moves in application order (first conjugation first).
    pub conjugator: Vec<GroupElement>,
    /// Scalar with Ad(conjugator)(input) = rescale · (X_f + Y_g).
    pub rescale: f64,
    /// Set when the final pass found no root in the working interval and the
    /// constant-lead fallback was used (the NoRealRoot diagnostic).
    pub no_root_fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NormalFormError {
    #[error("both slot polynomials are zero")]
    BothZero,
}

impl NormalForm {
    /// True when every conjugator parameter is (numerically) zero and the
    /// rescale is one: the input was already in normal form.
    pub fn is_identity_conjugator(&self) -> bool {
        self.conjugator.iter().all(|g| g.param.abs() <= 1e-9) && (self.rescale - 1.0).abs() <= 1e-9
    }

    /// The reduced element X_f + Y_g as a vector field.
    pub fn field(&self) -> VectorField {
        wing_field(&poly_to_expr(&self.f), &poly_to_expr(&self.g))
    }

    /// Human-readable account of the reduction.
    pub fn describe(&self) -> String {
        let mut s = format!(
            "f(t) = {}, g(t) = {}; m1 = {}, m2 = {}, mu = {:+}",
            poly_to_expr(&self.f),
            poly_to_expr(&self.g),
            self.m1,
            self.m2.map_or("-".into(), |m| m.to_string()),
            self.mu
        );
        if self.branch == NormalBranch::ConstantX {
            s.push_str(" (constant-X branch: m1/m2/mu describe the Y-slot)");
        }
        s.push_str("; conjugator: ");
        if self.conjugator.is_empty() {
            s.push_str("(none)");
        } else {
            let moves: Vec<String> = self.conjugator.iter().map(|g| g.label()).collect();
            s.push_str(&moves.join(" then "));
        }
        s.push_str(&format!(", span rescale {:.6}", self.rescale));
        if self.no_root_fallback {
            s.push_str("; no real root in the working interval (constant-lead fallback)");
        }
        s
    }
}

// ---------------------------------------------------------------------------
// Dense polynomial helpers over f64, ascending coefficients
// ---------------------------------------------------------------------------

/// Zero out dust and drop trailing zeros.
fn trim(mut p: Vec<f64>) -> Vec<f64> {
    let scale = p.iter().fold(1.0f64, |m, c| m.max(c.abs()));
    for c in p.iter_mut() {
        if c.abs() <= COEFF_EPS * scale {
            *c = 0.0;
        }
    }
    while p.last() == Some(&0.0) {
        p.pop();
    }
    p
}

fn poly_eval(p: &[f64], x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

fn poly_deriv(p: &[f64]) -> Vec<f64> {
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(n, c)| n as f64 * c)
        .collect()
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, ca) in a.iter().enumerate() {
        for (j, cb) in b.iter().enumerate() {
            out[i + j] += ca * cb;
        }
    }
    out
}

fn poly_sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len().max(b.len())];
    for (i, c) in a.iter().enumerate() {
        out[i] += c;
    }
    for (i, c) in b.iter().enumerate() {
        out[i] -= c;
    }
    out
}

/// p(t + t0) by binomial expansion.
fn poly_shift(p: &[f64], t0: f64) -> Vec<f64> {
    let n = p.len();
    let mut out = vec![0.0; n];
    for (deg, &c) in p.iter().enumerate() {
        // c·(t+t0)^deg = c·Σ_k C(deg,k) t0^{deg−k} t^k
        let mut binom = 1.0f64;
        let mut tp = t0.powi(deg as i32);
        for k in 0..=deg {
            out[k] += c * binom * tp;
            binom *= (deg - k) as f64 / (k + 1) as f64;
            if t0 != 0.0 {
                tp /= t0;
            } else {
                tp = if k + 1 == deg { 1.0 } else { 0.0 };
            }
        }
    }
    out
}

/// Coefficients of the polynomial as an exact expression Σ cᵢ tⁱ.
pub fn poly_to_expr(p: &[f64]) -> Expr {
    let t = var("t");
    let terms = p
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != 0.0)
        .map(|(i, c)| num_f64(*c) * Expr::pow(t.clone(), rat(i as i64, 1)))
        .collect();
    Expr::add(terms)
}

/// Extract ascending coefficients in t from a polynomial expression.
/// Fails when the expanded expression contains anything besides rational
/// multiples of integer powers of t.
pub fn expr_to_poly(e: &Expr) -> Result<Vec<f64>, String> {
    let expanded = expand(e);
    let mut coeffs: Vec<f64> = vec![];
    let mut put = |deg: usize, c: f64| {
        if coeffs.len() <= deg {
            coeffs.resize(deg + 1, 0.0);
        }
        coeffs[deg] += c;
    };
    let terms: Vec<Expr> = match expanded {
        Expr::Add(ts) => ts,
        other => vec![other],
    };
    for term in terms {
        let factors: Vec<Expr> = match term {
            Expr::Mul(fs) => fs,
            other => vec![other],
        };
        let mut coeff = 1.0f64;
        let mut deg = 0usize;
        for f in factors {
            match f {
                Expr::Num(r) => coeff *= crate::symexpr::rat_to_f64(&r),
                Expr::Var(ref v) if v.as_str() == "t" => deg += 1,
                Expr::Pow(base, exp) => match (*base, exp) {
                    (Expr::Var(v), exp) if v.as_str() == "t" && exp.is_integer() => {
                        use num_traits::ToPrimitive;
                        let k = exp
                            .to_integer()
                            .to_i64()
                            .filter(|k| *k >= 0)
                            .ok_or("negative or huge power of t")?;
                        deg += k as usize;
                    }
                    other => return Err(format!("non-polynomial factor {:?}", other)),
                },
                other => return Err(format!("non-polynomial factor {}", other)),
            }
        }
        put(deg, coeff);
    }
    while coeffs.last() == Some(&0.0) {
        coeffs.pop();
    }
    Ok(coeffs)
}

/// Parse a polynomial in t from text (e.g. "2t^2+6t^3").
pub fn poly_from_text(text: &str) -> Result<Vec<f64>, String> {
    // Accept the compact "2t^2" spelling by inserting the implied product.
    let mut spelled = String::with_capacity(text.len() + 4);
    let mut prev: Option<char> = None;
    for ch in text.chars() {
        if ch == 't' && matches!(prev, Some(p) if p.is_ascii_digit() || p == ')' || p == '.') {
            spelled.push('*');
        }
        spelled.push(ch);
        if !ch.is_whitespace() {
            prev = Some(ch);
        }
    }
    let e = crate::symexpr::parse(&spelled).map_err(|e| e.to_string())?;
    expr_to_poly(&e)
}

// ---------------------------------------------------------------------------
// Root location on the working interval
// ---------------------------------------------------------------------------

/// A real root of p in [−3, 3], preferring t = 0, then the root of smallest
/// magnitude. Sign changes are bisected; grid points where p nearly vanishes
/// (double roots touching zero) are polished by Newton steps.
fn find_root(p: &[f64]) -> Option<f64> {
    let scale = 1.0 + p.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let near = |v: f64| v.abs() <= 1e-12 * scale;
    if poly_eval(p, 0.0).abs() <= 1e-9 * scale {
        return Some(0.0);
    }
    let (lo, hi) = ROOT_INTERVAL;
    let n = 1200usize;
    let dp = poly_deriv(p);
    let mut candidates: Vec<f64> = vec![];
    let mut prev_t = lo;
    let mut prev_v = poly_eval(p, lo);
    for i in 1..=n {
        let t1 = lo + (hi - lo) * i as f64 / n as f64;
        let v1 = poly_eval(p, t1);
        if prev_v == 0.0 {
            candidates.push(prev_t);
        } else if prev_v * v1 < 0.0 {
            // bisect
            let (mut a, mut b, mut va) = (prev_t, t1, prev_v);
            for _ in 0..80 {
                let m = 0.5 * (a + b);
                let vm = poly_eval(p, m);
                if vm == 0.0 {
                    a = m;
                    b = m;
                    break;
                }
                if va * vm < 0.0 {
                    b = m;
                } else {
                    a = m;
                    va = vm;
                }
            }
            candidates.push(0.5 * (a + b));
        } else if v1.abs() <= 1e-7 * scale {
            // possible touching root: polish by Newton
            let mut t = t1;
            for _ in 0..60 {
                let d = poly_eval(&dp, t);
                if d == 0.0 {
                    break;
                }
                let step = poly_eval(p, t) / d;
                t -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            if t >= lo && t <= hi && near(poly_eval(p, t)) {
                candidates.push(t);
            }
        }
        prev_t = t1;
        prev_v = v1;
    }
    candidates.retain(|t| poly_eval(p, *t).abs() <= 1e-9 * scale);
    candidates
        .into_iter()
        .min_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap())
}

// ---------------------------------------------------------------------------
// The reduction
// ---------------------------------------------------------------------------

/// First index with a surviving coefficient.
fn first_nonzero(p: &[f64]) -> Option<usize> {
    p.iter().position(|c| *c != 0.0)
}

/// One pass of moves 2–4 on the anchor slot, transporting the companion.
/// Returns (m1, m2, mu, fallback).
fn reduce_anchor(
    anchor: &mut Vec<f64>,
    companion: &mut Vec<f64>,
    chain: &mut Vec<GroupElement>,
    rescale: &mut f64,
) -> (usize, Option<usize>, i32, bool) {
    // Move 2: translate a root to the origin.
    let (t_z, fallback) = match find_root(anchor) {
        Some(r) => (r, false),
        None => (0.0, true),
    };
    chain.push(GroupElement::new(TableElem::P0, t_z));
    if t_z != 0.0 {
        *anchor = trim(poly_shift(anchor, t_z));
        *companion = trim(poly_shift(companion, t_z));
    }

    // Move 3: divide the spanning vector by the first surviving coefficient.
    let m1 = first_nonzero(anchor).expect("anchor vanished during reduction");
    let head = anchor[m1];
    for c in anchor.iter_mut().chain(companion.iter_mut()) {
        *c /= head;
    }
    *rescale *= head;

    // Move 4: dilate the next coefficient to ±1.
    let m2 = anchor.iter().skip(m1 + 1).position(|c| *c != 0.0).map(|k| m1 + 1 + k);
    let (alpha, mu) = match m2 {
        Some(m2) => {
            let c = anchor[m2];
            (-c.abs().ln() / (m2 - m1) as f64, c.signum() as i32)
        }
        None => (0.0, 0),
    };
    chain.push(GroupElement::new(TableElem::D, alpha));
    if alpha != 0.0 {
        for (n, c) in anchor.iter_mut().enumerate() {
            *c *= (alpha * (n as f64 - m1 as f64)).exp();
        }
        for (n, c) in companion.iter_mut().enumerate() {
            *c *= (alpha * (n as f64 - m1 as f64)).exp();
        }
        *rescale *= (alpha * (m1 as f64 - 1.0)).exp();
    }
    // Snap the two pinned coefficients exactly.
    anchor[m1] = 1.0;
    if let Some(m2) = m2 {
        anchor[m2] = mu as f64;
    }
    *anchor = trim(std::mem::take(anchor));
    *companion = trim(std::mem::take(companion));
    (m1, m2, mu, fallback)
}

/// Reduce ⟨X_f + Y_g⟩ to its representative. Coefficients ascend in t.
pub fn normal_form_1d(f_in: &[f64], g_in: &[f64]) -> Result<NormalForm, NormalFormError> {
    let mut f = trim(f_in.to_vec());
    let mut g = trim(g_in.to_vec());
    if f.is_empty() && g.is_empty() {
        return Err(NormalFormError::BothZero);
    }

    let mut chain: Vec<GroupElement> = vec![];
    let mut rescale = 1.0f64;

    // Move 1: rotate the Y-component away when the slots are proportional.
    let wronskian = trim(poly_sub(
        &poly_mul(&f, &poly_deriv(&g)),
        &poly_mul(&poly_deriv(&f), &g),
    ));
    if wronskian.is_empty() && !g.is_empty() {
        let beta = if f.is_empty() {
            -std::f64::consts::FRAC_PI_2
        } else {
            // proportional slots: g = c·f with c read off the leading terms
            -(g[g.len() - 1] / f[f.len() - 1]).atan()
        };
        let (cb, sb) = (beta.cos(), beta.sin());
        let n = f.len().max(g.len());
        let at = |p: &[f64], i: usize| p.get(i).copied().unwrap_or(0.0);
        let mut fr = vec![0.0; n];
        let mut gr = vec![0.0; n];
        for i in 0..n {
            fr[i] = cb * at(&f, i) - sb * at(&g, i);
            gr[i] = sb * at(&f, i) + cb * at(&g, i);
        }
        f = trim(fr);
        g = trim(gr);
        debug_assert!(g.is_empty(), "rotation failed to kill the Y-slot");
        g.clear();
        chain.push(GroupElement::new(TableElem::L, beta));
    }

    // Constant X-slot with nothing else to reduce: divide the span and stop.
    if f.len() == 1 && g.is_empty() {
        rescale *= f[0];
        return Ok(NormalForm {
            branch: NormalBranch::ConstantX,
            m1: 0,
            m2: None,
            mu: 0,
            f: vec![1.0],
            g: vec![],
            conjugator: chain,
            rescale,
            no_root_fallback: false,
        });
    }

    let branch = if f.len() == 1 {
        NormalBranch::ConstantX
    } else {
        NormalBranch::X
    };

    // Moves 2–4 on the anchor slot, restarted once if the dilation brought a
    // root of a constant-lead representative back into the working interval.
    let (mut m1, mut m2, mut mu, mut fallback);
    loop {
        let (anchor, companion) = match branch {
            NormalBranch::X => (&mut f, &mut g),
            NormalBranch::ConstantX => (&mut g, &mut f),
        };
        (m1, m2, mu, fallback) = reduce_anchor(anchor, companion, &mut chain, &mut rescale);
        let stable = !fallback || find_root(anchor).is_none();
        if stable {
            break;
        }
    }

    Ok(NormalForm {
        branch,
        m1,
        m2,
        mu,
        f,
        g,
        conjugator: chain,
        rescale,
        no_root_fallback: fallback,
    })
}

// ---------------------------------------------------------------------------
// Conjugator application through the adjoint catalogue
// ---------------------------------------------------------------------------

/// The wing element X_f + Y_g as a vector field.
pub fn wing_field(f: &Expr, g: &Expr) -> VectorField {
    TableElem::X(f.clone())
        .field()
        .plus(&TableElem::Y(g.clone()).field())
        .collected()
}

/// Apply the conjugator moves in order to X_f + Y_g using the closed-form
/// adjoint action, reading the transported slots back off the field after
/// each move (rotations, translations and dilations preserve the wing).
pub fn conjugate_wing(chain: &[GroupElement], f: &Expr, g: &Expr) -> (Expr, Expr) {
    let mut fx = f.clone();
    let mut gy = g.clone();
    for elem in chain {
        let moved_x = ad_closed(elem, &TableElem::X(fx.clone()))
            .expect("point moves cover the wing")
            .field;
        let moved_y = ad_closed(elem, &TableElem::Y(gy.clone()))
            .expect("point moves cover the wing")
            .field;
        let total = moved_x.plus(&moved_y).collected();
        fx = expand(&total.component("x"));
        gy = expand(&total.component("y"));
    }
    (fx, gy)
}

/// Roundtrip check: Ad(conjugator)(X_f + Y_g) must equal
/// rescale · (X_{f'} + Y_{g'}) for the reduced slots.
pub fn roundtrip_check(
    f_in: &[f64],
    g_in: &[f64],
    nf: &NormalForm,
    opts: &ZeroOpts,
) -> Result<ZeroTest, ZeroTestError> {
    let (fc, gc) = conjugate_wing(&nf.conjugator, &poly_to_expr(f_in), &poly_to_expr(g_in));
    let lhs = wing_field(&fc, &gc);
    let rhs = nf.field().scale(num_f64(nf.rescale)).collected();
    let diff = lhs.minus(&rhs).collected();
    let mut worst = ZeroTest {
        is_zero: true,
        max_relative: 0.0,
        witness: None,
        samples: 0,
    };
    for (_, comp) in diff.components() {
        let t = is_zero(comp, opts)?;
        if t.max_relative > worst.max_relative {
            worst.max_relative = t.max_relative;
        }
        if !t.is_zero {
            worst.is_zero = false;
            worst.witness = t.witness;
            return Ok(worst);
        }
        worst.samples += t.samples;
    }
    Ok(worst)
}
