//! Representative subalgebras of the symmetry algebra and their verification.
//!
//! The classification splits the algebra as (point part) ⊳ (wing) ⊳ (pressure
//! shifts): the three-dimensional point part ⟨P0, D, L⟩, the wing of slotted
//! translations X_f, Y_g, and the pressure directions S_h. [`catalog`] stores
//! one representative per conjugacy class (instantiated over a parameter
//! grid), [`verify_representative`] checks closure, ideal containment and the
//! listed normalizer generators numerically, and [`normal_form_1d`] reduces a
//! one-dimensional wing subalgebra ⟨X_f + Y_g⟩ to its representative.
//!
//! Closure is decided by fitting the bracket of two basis elements as a
//! constant linear combination of the basis (least squares over sampled
//! points) and zero-testing the residual field; ideal checks restrict the fit
//! to the ideal's span, and normalizer checks apply a 24-term conjugation
//! series to each basis element before fitting.

mod normal_form;

pub use normal_form::{
    conjugate_wing, expr_to_poly, normal_form_1d, poly_from_text, poly_to_expr, roundtrip_check,
    wing_field, NormalBranch, NormalForm, NormalFormError, ROOT_INTERVAL,
};

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::adjoint::{ad_series, GroupElement};
use crate::symexpr::{is_zero, num_f64, parse, var, Expr, Rat, Sym, ZeroOpts};
use crate::vfield::{TableElem, VectorField, COORDS};

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

/// A stored representative subalgebra.
#[derive(Clone, Debug)]
pub struct Subalgebra {
    pub label: String,
    /// Which stratum the entry comes from: "point", "wing" or "pressure".
    pub family: &'static str,
    /// Labelled basis elements.
    pub basis: Vec<(String, VectorField)>,
    /// basis[..factor_dim] spans the factor part, basis[factor_dim..] the
    /// ideal. factor_dim == dim means there is no ideal part to check.
    pub factor_dim: usize,
    /// Normalizer generators to spot-check (with concrete parameters).
    pub normalizer: Vec<GroupElement>,
    /// Records any reading corrections applied to the stored form.
    pub note: Option<String>,
}

impl Subalgebra {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckKind {
    /// [b_i, b_j] lies in the span of the whole basis.
    Closure,
    /// [b_i, b_j] lies in the span of the ideal part alone.
    Ideal,
    /// Ad(n)(b_i) lies in the span of the whole basis.
    Normalizer,
}

/// One verified bracket or conjugation.
#[derive(Clone, Debug)]
pub struct PairCheck {
    pub kind: CheckKind,
    pub lhs: String,
    pub rhs: String,
    pub pass: bool,
    pub max_relative: f64,
    /// Fitted span coefficients (order matches the spanning set used).
    pub coeffs: Vec<f64>,
    pub witness: Option<String>,
}

#[derive(Clone, Debug)]
pub struct RepresentativeReport {
    pub label: String,
    pub family: &'static str,
    pub checks: Vec<PairCheck>,
    pub note: Option<String>,
}

impl RepresentativeReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&PairCheck> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }
}

/// A bracket that escaped the span it was required to lie in.
#[derive(Debug, Clone, thiserror::Error)]
#[error("{subalgebra}: [{lhs}, {rhs}] escapes the span ({detail})")]
pub struct ClosureFailure {
    pub subalgebra: String,
    pub lhs: String,
    pub rhs: String,
    pub detail: String,
}

/// Turn a report into a hard error on its first failing check.
pub fn require_pass(report: &RepresentativeReport) -> Result<(), ClosureFailure> {
    match report.checks.iter().find(|c| !c.pass) {
        None => Ok(()),
        Some(c) => Err(ClosureFailure {
            subalgebra: report.label.clone(),
            lhs: c.lhs.clone(),
            rhs: c.rhs.clone(),
            detail: format!(
                "{:?} residual {:.3e}{}",
                c.kind,
                c.max_relative,
                c.witness
                    .as_ref()
                    .map(|w| format!(" at {w}"))
                    .unwrap_or_default()
            ),
        }),
    }
}

/// Parameter grid used to instantiate the parametrized representatives.
#[derive(Clone, Debug)]
pub struct CatalogGrid {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

impl Default for CatalogGrid {
    fn default() -> Self {
        CatalogGrid {
            a: vec![-1.0, 0.5, 1.0, 2.0],
            b: vec![0.0, 1.0],
            c: vec![0.0, 1.0],
        }
    }
}

// ---------------------------------------------------------------------------
// Span fitting
// ---------------------------------------------------------------------------

fn fnv1a(text: &str) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for b in text.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Solve the normal equations G·λ = b by Gaussian elimination; G is expected
/// to carry a unit diagonal (column-normalized), so a tiny absolute ridge
/// suffices to guard exact rank deficiency.
fn solve_gram(mut g: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let k = b.len();
    for (i, row) in g.iter_mut().enumerate() {
        row[i] += 1e-14;
    }
    for col in 0..k {
        let piv = (col..k)
            .max_by(|i, j| g[*i][col].abs().partial_cmp(&g[*j][col].abs()).unwrap())
            .unwrap();
        g.swap(col, piv);
        b.swap(col, piv);
        let d = g[col][col];
        for r in col + 1..k {
            let m = g[r][col] / d;
            for c in col..k {
                g[r][c] -= m * g[col][c];
            }
            b[r] -= m * b[col];
        }
    }
    let mut lambda = vec![0.0; k];
    for col in (0..k).rev() {
        let mut s = b[col];
        for c in col + 1..k {
            s -= g[col][c] * lambda[c];
        }
        lambda[col] = s / g[col][col];
    }
    lambda
}

/// Least-squares fit of `target` in the span of `basis` over sampled points;
/// returns the coefficients and the residual field target − Σ λᵢ·basisᵢ.
fn fit_in_span(
    target: &VectorField,
    basis: &[&VectorField],
    opts: &ZeroOpts,
    seed: u64,
) -> Result<(Vec<f64>, VectorField), String> {
    let k = basis.len();
    let mut comps: Vec<Vec<Expr>> = Vec::with_capacity(k + 1);
    for f in basis.iter().copied().chain(std::iter::once(target)) {
        comps.push(COORDS.iter().map(|c| f.component(c)).collect());
    }
    let mut vars: BTreeSet<Sym> = BTreeSet::new();
    let mut params: BTreeSet<Sym> = BTreeSet::new();
    for row in &comps {
        for e in row {
            vars.extend(e.free_vars());
            params.extend(e.free_params());
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let npoints = 32usize;
    let mut got = 0usize;
    let mut attempts = 0usize;
    let mut gram = vec![vec![0.0f64; k]; k];
    let mut rhs = vec![0.0f64; k];
    let mut last_err = String::from("none");
    'points: while got < npoints && attempts < npoints * 64 + 64 {
        attempts += 1;
        let mut env = opts.env.clone();
        for v in &vars {
            if !env.vars.contains_key(v) {
                let val = opts.sample_box.sample(v, &mut rng);
                env.vars.insert(v.clone(), val);
            }
        }
        for p in &params {
            if !env.params.contains_key(p) {
                let val = opts.sample_box.sample(p, &mut rng);
                env.params.insert(p.clone(), val);
            }
        }
        let mut values = vec![[0.0f64; COORDS.len()]; k + 1];
        for (fi, row) in comps.iter().enumerate() {
            for (ci, e) in row.iter().enumerate() {
                match e.eval(&env) {
                    Ok(v) => values[fi][ci] = v,
                    Err(err) => {
                        last_err = err.to_string();
                        continue 'points;
                    }
                }
            }
        }
        got += 1;
        for ci in 0..COORDS.len() {
            for i in 0..k {
                for j in 0..k {
                    gram[i][j] += values[i][ci] * values[j][ci];
                }
                rhs[i] += values[i][ci] * values[k][ci];
            }
        }
    }
    if got == 0 {
        return Err(format!("sampling never landed in-domain: {last_err}"));
    }

    let lambda = if k > 0 {
        // Column-normalize so wildly different basis magnitudes (pressure
        // slots vs exponential wings) share one conditioning scale, then add
        // one refinement step to wash out the ridge bias.
        let norms: Vec<f64> = (0..k).map(|i| gram[i][i].sqrt().max(1e-150)).collect();
        let mut gn = vec![vec![0.0f64; k]; k];
        for i in 0..k {
            for j in 0..k {
                gn[i][j] = gram[i][j] / (norms[i] * norms[j]);
            }
        }
        let bn: Vec<f64> = (0..k).map(|i| rhs[i] / norms[i]).collect();
        let mut ln = solve_gram(gn.clone(), bn.clone());
        let defect: Vec<f64> = (0..k)
            .map(|i| bn[i] - (0..k).map(|j| gn[i][j] * ln[j]).sum::<f64>())
            .collect();
        for (l, d) in ln.iter_mut().zip(solve_gram(gn, defect)) {
            *l += d;
        }
        (0..k).map(|i| ln[i] / norms[i]).collect()
    } else {
        vec![]
    };
    let mut residual = target.clone();
    for (l, b) in lambda.iter().zip(basis) {
        residual = residual.minus(&b.scale(num_f64(*l)));
    }
    Ok((lambda, residual.collected()))
}

fn check_membership(
    kind: CheckKind,
    lhs: &str,
    rhs: &str,
    target: &VectorField,
    span: &[&VectorField],
    opts: &ZeroOpts,
    seed: u64,
) -> PairCheck {
    let fitted = fit_in_span(target, span, opts, seed);
    let (coeffs, residual) = match fitted {
        Ok(x) => x,
        Err(e) => {
            return PairCheck {
                kind,
                lhs: lhs.into(),
                rhs: rhs.into(),
                pass: false,
                max_relative: f64::INFINITY,
                coeffs: vec![],
                witness: Some(e),
            }
        }
    };
    let mut pass = true;
    let mut max_rel = 0.0f64;
    let mut witness = None;
    for (coord, comp) in residual.components() {
        let mut zopts = opts.clone();
        zopts.seed = seed ^ fnv1a(coord.as_str());
        match is_zero(comp, &zopts) {
            Ok(t) => {
                max_rel = max_rel.max(t.max_relative);
                if !t.is_zero {
                    pass = false;
                    if witness.is_none() {
                        witness = t.witness.map(|w| {
                            format!("d/d{coord} component: {:?} -> {:.3e}", w.point, w.value)
                        });
                    }
                }
            }
            Err(e) => {
                pass = false;
                witness.get_or_insert_with(|| format!("d/d{coord} component: {e}"));
            }
        }
    }
    PairCheck {
        kind,
        lhs: lhs.into(),
        rhs: rhs.into(),
        pass,
        max_relative: max_rel,
        coeffs,
        witness,
    }
}

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

/// Check closure, ideal containment and the listed normalizer generators of
/// one representative.
pub fn verify_representative(s: &Subalgebra, opts: &ZeroOpts) -> RepresentativeReport {
    let dim = s.dim();
    let full: Vec<&VectorField> = s.basis.iter().map(|(_, f)| f).collect();
    let ideal: Vec<&VectorField> = s.basis[s.factor_dim..].iter().map(|(_, f)| f).collect();
    let base_seed = opts.seed ^ fnv1a(&s.label);
    let mut checks = vec![];

    for i in 0..dim {
        for j in i + 1..dim {
            let (li, fi) = &s.basis[i];
            let (lj, fj) = &s.basis[j];
            let br = fi.bracket(fj).collected();
            let seed = base_seed ^ fnv1a(&format!("closure:{li}|{lj}"));
            checks.push(check_membership(
                CheckKind::Closure,
                li,
                lj,
                &br,
                &full,
                opts,
                seed,
            ));
            if s.factor_dim > 0 && s.factor_dim < dim && j >= s.factor_dim {
                let seed = base_seed ^ fnv1a(&format!("ideal:{li}|{lj}"));
                checks.push(check_membership(
                    CheckKind::Ideal,
                    li,
                    lj,
                    &br,
                    &ideal,
                    opts,
                    seed,
                ));
            }
        }
    }

    for n in &s.normalizer {
        for (bl, bf) in &s.basis {
            let moved = ad_series(&n.exponent(), bf, 24);
            let seed = base_seed ^ fnv1a(&format!("normalizer:{}|{bl}", n.label()));
            checks.push(check_membership(
                CheckKind::Normalizer,
                &n.label(),
                bl,
                &moved,
                &full,
                opts,
                seed,
            ));
        }
    }

    RepresentativeReport {
        label: s.label.clone(),
        family: s.family,
        checks,
        note: s.note.clone(),
    }
}

/// Verify a batch of representatives, parallel per entry.
pub fn verify_all(entries: &[Subalgebra], opts: &ZeroOpts) -> Vec<RepresentativeReport> {
    if entries.is_empty() {
        return vec![];
    }
    let workers = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(4)
        .min(entries.len());
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<RepresentativeReport>>> =
        entries.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= entries.len() {
                    break;
                }
                let report = verify_representative(&entries[i], opts);
                *slots[i].lock().unwrap() = Some(report);
            });
        }
    });
    slots
        .into_iter()
        .map(|m| m.into_inner().unwrap().expect("worker filled every slot"))
        .collect()
}

/// Instantiate and verify the whole catalog.
pub fn verify_catalog(grid: &CatalogGrid, opts: &ZeroOpts) -> Vec<RepresentativeReport> {
    verify_all(&catalog(grid), opts)
}

// ---------------------------------------------------------------------------
// The catalog
// ---------------------------------------------------------------------------

fn tpow(p: f64) -> Expr {
    Expr::pow(var("t"), Rat::from_float(p).expect("finite exponent"))
}

fn lincomb(parts: &[(f64, TableElem)]) -> VectorField {
    parts
        .iter()
        .fold(VectorField::new(), |acc, (c, e)| {
            acc.plus(&e.field().scale(num_f64(*c)))
        })
        .collected()
}

fn nor(elems: &[TableElem], param: f64) -> Vec<GroupElement> {
    elems
        .iter()
        .map(|e| GroupElement::new(e.clone(), param))
        .collect()
}

fn nor_full() -> Vec<GroupElement> {
    nor(&[TableElem::P0, TableElem::D, TableElem::L], 0.3)
}

/// exp(πL), the discrete rotation flipping both wing slots.
fn nor_pi_rotation() -> Vec<GroupElement> {
    vec![GroupElement::new(TableElem::L, std::f64::consts::PI)]
}

fn entry(
    family: &'static str,
    label: String,
    basis: Vec<(String, VectorField)>,
    factor_dim: usize,
    normalizer: Vec<GroupElement>,
    note: Option<&str>,
) -> Subalgebra {
    Subalgebra {
        label,
        family,
        basis,
        factor_dim,
        normalizer,
        note: note.map(|s| s.to_string()),
    }
}

fn l_plus_ad(a: f64) -> (String, VectorField) {
    (
        format!("L + {a}·D"),
        lincomb(&[(1.0, TableElem::L), (a, TableElem::D)]),
    )
}

fn x_of(f: Expr) -> (String, VectorField) {
    let label = format!("X[{f}]");
    (label, TableElem::X(f).field())
}

fn s_of(h: Expr) -> (String, VectorField) {
    let label = format!("S[{h}]");
    (label, TableElem::S(h).field())
}

/// X_f + Y_g (+ c·S_s) with a readable label.
fn wing_combo(f: Expr, g: Expr, s: Option<(f64, Expr)>) -> (String, VectorField) {
    let mut field = TableElem::X(f.clone())
        .field()
        .plus(&TableElem::Y(g.clone()).field());
    let mut label = format!("X[{f}] + Y[{g}]");
    if let Some((c, slot)) = s {
        field = field.plus(&TableElem::S(slot.clone()).field().scale(num_f64(c)));
        label.push_str(&format!(" + {c}·S[{slot}]"));
    }
    (label, field.collected())
}

/// The trig-slot wing element X_{t^b cos(ln t/a)} − Y_{t^b sin(ln t/a)}, the
/// eigenvector of L + aD with eigenvalue a(b−1); `s_deg_shift` selects the
/// accompanying pressure slot t^{b+shift} when c ≠ 0.
fn spiral_element(a: f64, b: f64, c: f64, s_deg_shift: f64) -> (String, VectorField) {
    let t = var("t");
    let w = t.clone().ln().div(num_f64(a));
    let f = tpow(b) * w.clone().cos();
    let g = (tpow(b) * w.sin()).neg();
    let s = (c != 0.0).then(|| (c, tpow(b + s_deg_shift)));
    wing_combo(f, g, s)
}

/// X_{e^{at} sin t} + Y_{e^{at} cos t} (+ c·S_{e^{at}}), the eigenvector of
/// L + P0 with eigenvalue a.
fn exp_trig_element(a: f64, c: f64) -> (String, VectorField) {
    let t = var("t");
    let ea = (num_f64(a) * t.clone()).exp();
    let f = ea.clone() * t.clone().sin();
    let g = ea.clone() * t.cos();
    let s = (c != 0.0).then(|| (c, ea));
    wing_combo(f, g, s)
}

/// All stored representatives, instantiated over `grid`.
pub fn catalog(grid: &CatalogGrid) -> Vec<Subalgebra> {
    use TableElem::{D, L, P0};
    let mut out: Vec<Subalgebra> = vec![];
    let point = |e: &TableElem| (e.label(), e.field());

    // --- the point part ⟨P0, D, L⟩ -------------------------------------
    out.push(entry(
        "point",
        "<L>".into(),
        vec![point(&L)],
        1,
        nor_full(),
        None,
    ));
    out.push(entry(
        "point",
        "<D>".into(),
        vec![point(&D)],
        1,
        nor(&[L, D], 0.3),
        None,
    ));
    out.push(entry(
        "point",
        "<P0>".into(),
        vec![point(&P0)],
        1,
        nor_full(),
        None,
    ));
    for &a in &grid.a {
        out.push(entry(
            "point",
            format!("<L + {a}·D>"),
            vec![l_plus_ad(a)],
            1,
            nor(&[L, D], 0.3),
            None,
        ));
    }
    out.push(entry(
        "point",
        "<L + P0>".into(),
        vec![(
            "L + P0".into(),
            lincomb(&[(1.0, L), (1.0, P0)]),
        )],
        1,
        nor(&[L, P0], 0.3),
        None,
    ));
    out.push(entry(
        "point",
        "<L, D>".into(),
        vec![point(&L), point(&D)],
        2,
        nor(&[L, D], 0.3),
        Some(
            "time translations do not normalize this plane: Ad(exp(t0·P0))D = D + t0·P0 \
             leaves the span, so the stored normalizer keeps L and D only",
        ),
    ));
    out.push(entry(
        "point",
        "<L, P0>".into(),
        vec![point(&L), point(&P0)],
        2,
        nor_full(),
        None,
    ));
    for &a in &grid.a {
        out.push(entry(
            "point",
            format!("<D + {a}·L, P0>"),
            vec![
                (
                    format!("D + {a}·L"),
                    lincomb(&[(1.0, D), (a, L)]),
                ),
                point(&P0),
            ],
            2,
            nor_full(),
            None,
        ));
    }
    out.push(entry(
        "point",
        "<P0, D, L>".into(),
        vec![point(&P0), point(&D), point(&L)],
        3,
        nor_full(),
        None,
    ));

    // --- two-dimensional point ⊳ wing representatives -------------------
    for &a in &grid.a {
        out.push(entry(
            "wing",
            format!("<D, X[t^{a}]>"),
            vec![point(&D), x_of(tpow(a))],
            1,
            nor(&[D], 0.3),
            None,
        ));
    }
    for sign in [1.0, -1.0] {
        out.push(entry(
            "wing",
            format!("<P0, X[exp({sign}·t)]>"),
            vec![point(&P0), x_of((num_f64(sign) * var("t")).exp())],
            1,
            nor(&[P0], 0.3),
            None,
        ));
    }
    for &a in &grid.a {
        for &b in &grid.b {
            let (lbl, field) = spiral_element(a, b, 0.0, 0.0);
            out.push(entry(
                "wing",
                format!("<L + {a}·D, {lbl}>"),
                vec![l_plus_ad(a), (lbl, field)],
                1,
                nor_pi_rotation(),
                None,
            ));
        }
    }
    for &a in &grid.a {
        let (lbl, field) = exp_trig_element(a, 0.0);
        out.push(entry(
            "wing",
            format!("<L + P0, {lbl}>"),
            vec![
                ("L + P0".into(), lincomb(&[(1.0, L), (1.0, P0)])),
                (lbl, field),
            ],
            1,
            nor_pi_rotation(),
            None,
        ));
    }

    // --- representatives touching the pressure directions ---------------
    let h_mu = parse("1 + t^2 + t^3").unwrap();
    let h_mono = var("t");
    for h in [h_mu.clone(), h_mono.clone()] {
        out.push(entry(
            "pressure",
            format!("<S[{h}]>"),
            vec![s_of(h)],
            0,
            vec![],
            None,
        ));
    }
    out.push(entry(
        "pressure",
        format!("<S[1], S[{h_mu}]>"),
        vec![s_of(Expr::one()), s_of(h_mu.clone())],
        0,
        vec![],
        None,
    ));
    let f_eps = parse("t + t^3 + t^4").unwrap();
    out.push(entry(
        "pressure",
        format!("<S[t^2], S[{f_eps}]>"),
        vec![s_of(parse("t^2").unwrap()), s_of(f_eps)],
        0,
        vec![],
        None,
    ));
    out.push(entry(
        "pressure",
        format!("<S[{h_mu}], S[t]>"),
        vec![s_of(h_mu.clone()), s_of(var("t"))],
        0,
        vec![],
        None,
    ));
    out.push(entry(
        "pressure",
        format!("<L, S[{h_mu}]>"),
        vec![point(&L), s_of(h_mu.clone())],
        1,
        vec![],
        None,
    ));
    out.push(entry(
        "pressure",
        "<D, S[1]>".into(),
        vec![point(&D), s_of(Expr::one())],
        1,
        vec![],
        None,
    ));
    for &a in &grid.a {
        out.push(entry(
            "pressure",
            format!("<D, S[t^{a}]>"),
            vec![point(&D), s_of(tpow(a))],
            1,
            vec![],
            None,
        ));
    }
    out.push(entry(
        "pressure",
        "<P0, S[1]>".into(),
        vec![point(&P0), s_of(Expr::one())],
        1,
        vec![],
        None,
    ));
    for sign in [1.0, -1.0] {
        out.push(entry(
            "pressure",
            format!("<P0, S[exp({sign}·t)]>"),
            vec![point(&P0), s_of((num_f64(sign) * var("t")).exp())],
            1,
            vec![],
            None,
        ));
    }
    for &a in &grid.a {
        out.push(entry(
            "pressure",
            format!("<L + {a}·D, S[1]>"),
            vec![l_plus_ad(a), s_of(Expr::one())],
            1,
            vec![],
            None,
        ));
        out.push(entry(
            "pressure",
            format!("<L + {a}·D, S[t^{a}]>"),
            vec![l_plus_ad(a), s_of(tpow(a))],
            1,
            vec![],
            None,
        ));
    }
    for &a in &grid.a {
        for &b in &grid.b {
            for &c in &grid.c {
                let (lbl, field) = spiral_element(a, b, c, -1.0);
                out.push(entry(
                    "pressure",
                    format!("<L + {a}·D, {lbl}>"),
                    vec![l_plus_ad(a), (lbl, field)],
                    1,
                    vec![],
                    Some(
                        "the pressure slot is t^(b-1): the bracket with L + a·D scales the \
                         wing pair by a(b-1) and the pressure term by a·(slot degree), so \
                         only degree b-1 keeps the element an eigenvector",
                    ),
                ));
            }
        }
    }
    out.push(entry(
        "pressure",
        "<L + P0, S[1]>".into(),
        vec![
            ("L + P0".into(), lincomb(&[(1.0, L), (1.0, P0)])),
            s_of(Expr::one()),
        ],
        1,
        vec![],
        None,
    ));
    for sign in [1.0, -1.0] {
        out.push(entry(
            "pressure",
            format!("<L + P0, S[exp({sign}·t)]>"),
            vec![
                ("L + P0".into(), lincomb(&[(1.0, L), (1.0, P0)])),
                s_of((num_f64(sign) * var("t")).exp()),
            ],
            1,
            vec![],
            None,
        ));
    }
    for &a in &grid.a {
        for &c in &grid.c {
            let (lbl, field) = exp_trig_element(a, c);
            out.push(entry(
                "pressure",
                format!("<L + P0, {lbl}>"),
                vec![
                    ("L + P0".into(), lincomb(&[(1.0, L), (1.0, P0)])),
                    (lbl, field),
                ],
                1,
                vec![],
                Some(
                    "the leading element is L + P0: exp(at)·(sin t, cos t) slots are \
                     eigenvectors of time translation combined with rotation, not of \
                     the dilation in L + a·D",
                ),
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_entry(
        basis: Vec<(String, VectorField)>,
        factor_dim: usize,
        normalizer: Vec<GroupElement>,
    ) -> Subalgebra {
        entry("point", "test".into(), basis, factor_dim, normalizer, None)
    }

    #[test]
    fn commuting_plane_closes_with_zero_coefficients() {
        let s = one_entry(
            vec![
                ("L".into(), TableElem::L.field()),
                ("D".into(), TableElem::D.field()),
            ],
            2,
            vec![],
        );
        let r = verify_representative(&s, &ZeroOpts::default());
        assert!(r.all_pass());
        let closure = &r.checks[0];
        assert!(closure.coeffs.iter().all(|c| c.abs() < 1e-6));
    }

    #[test]
    fn twisted_translation_row_brackets_back_to_p0() {
        let s = one_entry(
            vec![
                (
                    "D + 2·L".into(),
                    lincomb(&[(1.0, TableElem::D), (2.0, TableElem::L)]),
                ),
                ("P0".into(), TableElem::P0.field()),
            ],
            2,
            nor_full(),
        );
        let r = verify_representative(&s, &ZeroOpts::default());
        assert!(r.all_pass(), "failures: {:?}", r.failures());
        // [D + 2L, P0] = −P0
        let closure = &r.checks[0];
        assert!((closure.coeffs[0]).abs() < 1e-6);
        assert!((closure.coeffs[1] + 1.0).abs() < 1e-6);
    }

    #[test]
    fn dilation_wing_row_fits_the_eigenvalue() {
        // [D, X_{t³}] = (3−1)·X_{t³}
        let s = one_entry(
            vec![("D".into(), TableElem::D.field()), x_of(tpow(3.0))],
            1,
            nor(&[TableElem::D], 0.3),
        );
        let r = verify_representative(&s, &ZeroOpts::default());
        assert!(r.all_pass(), "failures: {:?}", r.failures());
        let closure = &r.checks[0];
        assert!((closure.coeffs[1] - 2.0).abs() < 1e-6, "coeffs {:?}", closure.coeffs);
        // the ideal check fits over the wing alone
        assert!(r.checks.iter().any(|c| c.kind == CheckKind::Ideal && c.pass));
    }

    #[test]
    fn translations_do_not_normalize_the_dilation_plane() {
        // Ad(exp(t0·P0))D = D + t0·P0 has a component outside ⟨L, D⟩.
        let with_translation = one_entry(
            vec![
                ("L".into(), TableElem::L.field()),
                ("D".into(), TableElem::D.field()),
            ],
            2,
            nor(&[TableElem::P0], 0.3),
        );
        let r = verify_representative(&with_translation, &ZeroOpts::default());
        let norm_checks: Vec<_> = r
            .checks
            .iter()
            .filter(|c| c.kind == CheckKind::Normalizer)
            .collect();
        assert!(
            norm_checks.iter().any(|c| !c.pass),
            "the translation conjugation should escape the span"
        );
        // while L and D themselves do normalize it
        let honest = one_entry(
            vec![
                ("L".into(), TableElem::L.field()),
                ("D".into(), TableElem::D.field()),
            ],
            2,
            nor(&[TableElem::L, TableElem::D], 0.3),
        );
        assert!(verify_representative(&honest, &ZeroOpts::default()).all_pass());
    }

    #[test]
    fn pressure_slot_needs_the_shifted_degree() {
        // With the pressure slot at degree b (not b−1) the bracket picks up
        // an S-term with the wrong scaling and closure fails.
        let a = 2.0;
        let b = 0.0;
        let (lbl_bad, bad) = spiral_element(a, b, 1.0, 0.0);
        let s_bad = one_entry(vec![l_plus_ad(a), (lbl_bad, bad)], 1, vec![]);
        let r_bad = verify_representative(&s_bad, &ZeroOpts::default());
        assert!(
            !r_bad.all_pass(),
            "degree-b pressure slot must break closure"
        );

        let (lbl_ok, ok) = spiral_element(a, b, 1.0, -1.0);
        let s_ok = one_entry(vec![l_plus_ad(a), (lbl_ok, ok)], 1, vec![]);
        let r_ok = verify_representative(&s_ok, &ZeroOpts::default());
        assert!(r_ok.all_pass(), "failures: {:?}", r_ok.failures());
    }

    #[test]
    fn exponential_trig_row_needs_the_translation_lead() {
        let a = 2.0;
        let (lbl, field) = exp_trig_element(a, 1.0);
        let with_p0 = one_entry(
            vec![
                (
                    "L + P0".into(),
                    lincomb(&[(1.0, TableElem::L), (1.0, TableElem::P0)]),
                ),
                (lbl.clone(), field.clone()),
            ],
            1,
            vec![],
        );
        assert!(verify_representative(&with_p0, &ZeroOpts::default()).all_pass());

        let with_dilation = one_entry(vec![l_plus_ad(a), (lbl, field)], 1, vec![]);
        let r = verify_representative(&with_dilation, &ZeroOpts::default());
        assert!(
            !r.all_pass(),
            "the dilation lead must not close on exponential-trig slots"
        );
    }

    #[test]
    fn closure_failure_reports_the_offending_pair() {
        let s = one_entry(
            vec![("L".into(), TableElem::L.field()), x_of(var("t"))],
            1,
            vec![],
        );
        let r = verify_representative(&s, &ZeroOpts::default());
        let err = require_pass(&r).unwrap_err();
        assert_eq!(err.lhs, "L");
        assert!(err.rhs.starts_with("X["));
    }

    #[test]
    fn catalog_covers_the_grid_and_passes() {
        let grid = CatalogGrid::default();
        let entries = catalog(&grid);
        assert_eq!(entries.len(), 82);
        let reports = verify_all(&entries, &ZeroOpts::default());
        let failures: Vec<String> = reports
            .iter()
            .filter(|r| !r.all_pass())
            .map(|r| {
                format!(
                    "{}: {:?}",
                    r.label,
                    r.failures()
                        .iter()
                        .map(|c| format!("[{}, {}] ({:?})", c.lhs, c.rhs, c.kind))
                        .collect::<Vec<_>>()
                )
            })
            .collect();
        assert!(failures.is_empty(), "catalog failures: {failures:#?}");
    }
}
