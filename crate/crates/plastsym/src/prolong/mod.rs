//! First prolongation of point-symmetry generators and the infinitesimal
//! symmetry criterion for the governing system.
//!
//! The governing equations, for flow velocity (u, v), mean pressure σ, and
//! shear-line angle θ, with density ρ and body force (F₁, F₂):
//!
//! ```text
//! (a)  σ_x − (θ_x cos 2θ + θ_y sin 2θ) + ρ(F₁ − u_t − u u_x − v u_y) = 0
//! (b)  σ_y − (θ_x sin 2θ − θ_y cos 2θ) + ρ(F₂ − v_t − u v_x − v v_y) = 0
//! (c)  (u_y + v_x) sin 2θ + (u_x − v_y) cos 2θ = 0
//! (d)  u_x + v_y = 0
//! ```
//!
//! A generator X is a point symmetry when pr⁽¹⁾X(E) vanishes on the solution
//! manifold E = 0. The system is solved for (σ_x, σ_y, v_x, v_y) — each
//! appearing linearly in exactly one equation — and the criterion is tested
//! after that substitution, over random base points and free jet values.

use crate::symexpr::{expand, is_zero, parse, Expr, SampleBox, Sym, ZeroOpts, ZeroTest};
use crate::vfield::VectorField;
use std::collections::BTreeMap;

/// Dependent variables, in equation order.
pub const DEPS: [&str; 4] = ["u", "v", "sigma", "theta"];
/// Independent variables.
pub const INDS: [&str; 3] = ["t", "x", "y"];

/// Jet variable name for ∂(dep)/∂(ind).
pub fn jet(dep: &str, ind: &str) -> String {
    format!("{dep}_{ind}")
}

fn jvar(dep: &str, ind: &str) -> Expr {
    crate::symexpr::var(&jet(dep, ind))
}

/// Total derivative D_j on first-order expressions:
/// D_j e = ∂e/∂j + Σ_a a_j · ∂e/∂a.
pub fn total_derivative(e: &Expr, ind: &str) -> Expr {
    let mut terms = vec![e.diff(&Sym::new(ind))];
    for dep in DEPS {
        let d = e.diff(&Sym::new(dep));
        if !d.is_num_zero() {
            terms.push(jvar(dep, ind) * d);
        }
    }
    Expr::add(terms)
}

/// A generator together with its first-prolongation coefficients
/// φ^{a,j} = D_j(φ^a) − Σ_i (D_j ξ^i) · a_i.
#[derive(Clone, Debug)]
pub struct Prolonged {
    pub base: VectorField,
    pub phi1: BTreeMap<(String, String), Expr>,
}

/// Compute the first prolongation of a point generator.
pub fn prolong1(vf: &VectorField) -> Prolonged {
    let mut phi1 = BTreeMap::new();
    for dep in DEPS {
        let phi = vf.component(dep);
        for ind in INDS {
            let mut e = total_derivative(&phi, ind);
            for i in INDS {
                let xi = vf.component(i);
                if xi.is_num_zero() {
                    continue;
                }
                e = e - total_derivative(&xi, ind) * jvar(dep, i);
            }
            phi1.insert((dep.to_string(), ind.to_string()), expand(&e));
        }
    }
    Prolonged {
        base: vf.clone(),
        phi1,
    }
}

impl Prolonged {
    /// Apply the prolonged field to a first-order expression:
    /// pr⁽¹⁾X(e) = Σ_i ξⁱ ∂e/∂i + Σ_a φᵃ ∂e/∂a + Σ_{a,j} φ^{a,j} ∂e/∂a_j.
    pub fn apply(&self, e: &Expr) -> Expr {
        let mut terms = vec![self.base.apply(e)];
        for ((dep, ind), coeff) in &self.phi1 {
            let d = e.diff(&Sym::new(&jet(dep, ind)));
            if !d.is_num_zero() {
                terms.push(coeff.clone() * d);
            }
        }
        Expr::add(terms)
    }
}

// ---------------------------------------------------------------------------
// Forces and the governing system
// ---------------------------------------------------------------------------

/// Body force (F₁, F₂) as expressions in (t, x, y, u, v) and parameters.
#[derive(Clone, Debug)]
pub struct Force {
    pub f1: Expr,
    pub f2: Expr,
}

impl Force {
    pub fn zero() -> Self {
        Force {
            f1: Expr::zero(),
            f2: Expr::zero(),
        }
    }

    pub fn custom(f1: Expr, f2: Expr) -> Self {
        Force { f1, f2 }
    }

    /// Monogenic force F = ∇V for a potential V(t, x, y).
    pub fn monogenic(vpot: &Expr) -> Self {
        Force {
            f1: vpot.diff(&Sym::new("x")),
            f2: vpot.diff(&Sym::new("y")),
        }
    }

    /// The velocity-dependent (friction) force family:
    ///
    /// ```text
    /// F₁ = (u h₁(u²+v²) + v h₂(u²+v²)) · exp((κ₁/κ₂) arctan(v/u))
    /// F₂ = (v h₁(u²+v²) − u h₂(u²+v²)) · exp((κ₁/κ₂) arctan(v/u))
    /// ```
    ///
    /// `h1` and `h2` are expressions in the squared speed `s`; κ₁, κ₂ enter
    /// as expressions (parameters or numbers).
    pub fn friction(h1: &Expr, h2: &Expr, kappa1: Expr, kappa2: Expr) -> Self {
        let s = Sym::new("s");
        let speed2 = parse("u^2 + v^2").unwrap();
        let hh1 = h1.subst_var(&s, &speed2);
        let hh2 = h2.subst_var(&s, &speed2);
        let (u, v) = (crate::symexpr::var("u"), crate::symexpr::var("v"));
        let phase = (kappa1 / kappa2 * (v.clone() / u.clone()).atan()).exp();
        Force {
            f1: (u.clone() * hh1.clone() + v.clone() * hh2.clone()) * phase.clone(),
            f2: (v * hh1 - u * hh2) * phase,
        }
    }

    /// Friction plus the time-dependent spiral contribution that trades away
    /// time translations:
    ///
    /// ```text
    /// F₁ += (t + κ₀/κ₁)⁻¹ (κ₃ sin w + κ₄ cos w),
    /// F₂ += (t + κ₀/κ₁)⁻¹ (κ₃ cos w − κ₄ sin w),
    ///   w = (κ₂/κ₁) ln(t + κ₀/κ₁).
    /// ```
    ///
    /// The sign of the F₂ contribution is forced: invariance under
    /// K = κ₀∂t + κ₁D + κ₂L requires κ₁T Ġ₁ + κ₁G₁ − κ₂G₂ = 0 and
    /// κ₁T Ġ₂ + κ₁G₂ + κ₂G₁ = 0 (T = t + κ₀/κ₁), whose general solution is
    /// exactly the pair above; flipping the sign of G₂ breaks both.
    #[allow(clippy::too_many_arguments)]
    pub fn friction_spiral(
        h1: &Expr,
        h2: &Expr,
        kappa0: Expr,
        kappa1: Expr,
        kappa2: Expr,
        kappa3: Expr,
        kappa4: Expr,
    ) -> Self {
        let base = Force::friction(h1, h2, kappa1.clone(), kappa2.clone());
        let shift = crate::symexpr::var("t") + kappa0 / kappa1.clone();
        let w = (kappa2 / kappa1) * shift.clone().ln();
        let amp = Expr::pow(shift, crate::symexpr::rat(-1, 1));
        Force {
            f1: base.f1
                + amp.clone() * (kappa3.clone() * w.clone().sin() + kappa4.clone() * w.clone().cos()),
            f2: base.f2 + amp * (kappa3 * w.clone().cos() - kappa4 * w.sin()),
        }
    }
}

/// The governing equations as first-order jet expressions.
#[derive(Clone, Debug)]
pub struct PdeSystem {
    pub equations: [Expr; 4],
    pub labels: [&'static str; 4],
    pub force: Force,
}

/// Build the governing system for a given body force.
pub fn system(force: Force) -> PdeSystem {
    let rho = crate::symexpr::param("rho");
    let two_theta = crate::symexpr::int(2) * crate::symexpr::var("theta");
    let (c2, s2) = (two_theta.clone().cos(), two_theta.sin());
    let (u, v) = (crate::symexpr::var("u"), crate::symexpr::var("v"));
    let j = jvar;

    let ea = j("sigma", "x") - (j("theta", "x") * c2.clone() + j("theta", "y") * s2.clone())
        + rho.clone()
            * (force.f1.clone() - j("u", "t") - u.clone() * j("u", "x") - v.clone() * j("u", "y"));
    let eb = j("sigma", "y") - (j("theta", "x") * s2.clone() - j("theta", "y") * c2.clone())
        + rho * (force.f2.clone() - j("v", "t") - u * j("v", "x") - v * j("v", "y"));
    let ec = (j("u", "y") + j("v", "x")) * s2 + (j("u", "x") - j("v", "y")) * c2;
    let ed = j("u", "x") + j("v", "y");

    PdeSystem {
        equations: [ea, eb, ec, ed],
        labels: ["equilibrium-x", "equilibrium-y", "coherence", "incompressibility"],
        force,
    }
}

/// Solve the system for (σ_x, σ_y, v_x, v_y) — the jet coordinates it
/// determines — as a simultaneous substitution map for on-manifold work.
pub fn manifold_solve(sys: &PdeSystem) -> BTreeMap<Sym, Expr> {
    let rho = crate::symexpr::param("rho");
    let two_theta = crate::symexpr::int(2) * crate::symexpr::var("theta");
    let (c2, s2) = (two_theta.clone().cos(), two_theta.sin());
    let (u, v) = (crate::symexpr::var("u"), crate::symexpr::var("v"));
    let j = jvar;

    // From (d): v_y = −u_x.
    let vy = -j("u", "x");
    // From (c) with v_y substituted: v_x = −u_y − 2 u_x cos2θ / sin2θ.
    let vx = -j("u", "y")
        - crate::symexpr::int(2) * j("u", "x") * c2.clone() / s2.clone();
    // From (a): σ_x = θ_x cos2θ + θ_y sin2θ − ρ(F₁ − u_t − u u_x − v u_y).
    let sx = j("theta", "x") * c2.clone() + j("theta", "y") * s2.clone()
        - rho.clone()
            * (sys.force.f1.clone() - j("u", "t") - u.clone() * j("u", "x")
                - v.clone() * j("u", "y"));
    // From (b), with v_x and v_y already eliminated:
    // σ_y = θ_x sin2θ − θ_y cos2θ − ρ(F₂ − v_t − u v_x − v v_y).
    let sy = j("theta", "x") * s2 - j("theta", "y") * c2
        - rho * (sys.force.f2.clone() - j("v", "t") - u * vx.clone() - v * vy.clone());

    let mut map = BTreeMap::new();
    map.insert(Sym::new("v_y"), vy);
    map.insert(Sym::new("v_x"), vx);
    map.insert(Sym::new("sigma_x"), sx);
    map.insert(Sym::new("sigma_y"), sy);
    map
}

/// Sampling box for symmetry checks: the default base box with θ restricted
/// to [0.2, 1.2] (clear of coherence degeneracy at sin 2θ = 0) and every
/// free jet coordinate in [−1, 1].
pub fn symmetry_box() -> SampleBox {
    let mut b = SampleBox::default_box();
    for dep in DEPS {
        for ind in INDS {
            b.set(&jet(dep, ind), -1.0, 1.0);
        }
    }
    b
}

/// Verdict for one equation of a symmetry check.
#[derive(Clone, Debug)]
pub struct EquationCheck {
    pub label: &'static str,
    pub pass: bool,
    pub max_relative: f64,
    pub witness: Option<String>,
}

/// Result of the infinitesimal symmetry criterion for one generator.
#[derive(Clone, Debug)]
pub struct SymmetryReport {
    pub checks: Vec<EquationCheck>,
}

impl SymmetryReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// The on-manifold residuals pr⁽¹⁾X(E_k)|_{E=0}, one per equation.
pub fn symmetry_residuals(vf: &VectorField, sys: &PdeSystem) -> [Expr; 4] {
    let pr = prolong1(vf);
    let solve = manifold_solve(sys);
    let apply = |e: &Expr| expand(&pr.apply(e).subst_vars(&solve));
    [
        apply(&sys.equations[0]),
        apply(&sys.equations[1]),
        apply(&sys.equations[2]),
        apply(&sys.equations[3]),
    ]
}

/// Test the infinitesimal symmetry criterion for a generator on a system.
pub fn check_symmetry(vf: &VectorField, sys: &PdeSystem, opts: &ZeroOpts) -> SymmetryReport {
    let residuals = symmetry_residuals(vf, sys);
    let mut checks = Vec::with_capacity(4);
    for (k, res) in residuals.iter().enumerate() {
        let outcome = is_zero(res, opts);
        let label = sys.labels[k];
        match outcome {
            Ok(ZeroTest {
                is_zero,
                max_relative,
                witness,
                ..
            }) => checks.push(EquationCheck {
                label,
                pass: is_zero,
                max_relative,
                witness: witness
                    .map(|w| format!("residual {:.3e} at {:?}", w.value, w.point)),
            }),
            Err(err) => checks.push(EquationCheck {
                label,
                pass: false,
                max_relative: f64::NAN,
                witness: Some(err.to_string()),
            }),
        }
    }
    SymmetryReport { checks }
}

/// Options tuned for symmetry checking (box with jets, tolerance 1e-8).
pub fn symmetry_opts(trials: usize) -> ZeroOpts {
    ZeroOpts {
        sample_box: symmetry_box(),
        trials,
        tol: 1e-8,
        ..Default::default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::var;
    use crate::vfield::generators as gen;
    use crate::vfield::Slot;

    /// Pull a first-order expression back along a concrete section
    /// (u, v, σ, θ) = s(t, x, y): dependents become the section components,
    /// jets become their actual partial derivatives.
    fn pullback(e: &Expr, section: &BTreeMap<&str, Expr>) -> Expr {
        let mut map = BTreeMap::new();
        for dep in DEPS {
            let s = section[dep].clone();
            for ind in INDS {
                map.insert(Sym::new(&jet(dep, ind)), s.diff(&Sym::new(ind)));
            }
            map.insert(Sym::new(dep), s);
        }
        e.subst_vars(&map)
    }

    #[test]
    fn prolongation_satisfies_chain_rule_oracle() {
        // Independent check of φ^{a,j}: pulled back along any section,
        //   φ^{a,j} ∘ j¹s  =  ∂_j(φ^a ∘ j¹s) − Σ_i ∂_j(ξ^i ∘ j¹s) · ∂_i s^a.
        // The right-hand side never uses the prolongation formula.
        let vf = VectorField::from_parts(vec![
            ("t", parse("t*x").unwrap()),
            ("x", parse("y^2 + u").unwrap()),
            ("y", parse("t + sigma").unwrap()),
            ("u", parse("u*v + theta").unwrap()),
            ("v", parse("x*y").unwrap()),
            ("sigma", parse("sigma^2").unwrap()),
            ("theta", parse("u + x").unwrap()),
        ]);
        let pr = prolong1(&vf);
        let mut section = BTreeMap::new();
        section.insert("u", parse("sin(t + x)*y").unwrap());
        section.insert("v", parse("x^2 - t*y").unwrap());
        section.insert("sigma", parse("exp(x - y) + t^2").unwrap());
        section.insert("theta", parse("x*y*t").unwrap());

        let mut opts = ZeroOpts::default();
        opts.trials = 24;
        for dep in DEPS {
            for ind in INDS {
                let lhs = pullback(&pr.phi1[&(dep.to_string(), ind.to_string())], &section);
                let phi_pulled = pullback(&vf.component(dep), &section);
                let mut rhs = phi_pulled.diff(&Sym::new(ind));
                for i in INDS {
                    let xi_pulled = pullback(&vf.component(i), &section);
                    rhs = rhs
                        - xi_pulled.diff(&Sym::new(ind))
                            * section[dep].diff(&Sym::new(i));
                }
                let t = is_zero(&(lhs - rhs), &opts).unwrap();
                assert!(t.is_zero, "φ^({dep},{ind}) oracle: {:?}", t.witness);
            }
        }
    }

    #[test]
    fn manifold_solve_zeroes_the_equations() {
        let sys = system(Force::zero());
        let solve = manifold_solve(&sys);
        let opts = symmetry_opts(32);
        for (k, e) in sys.equations.iter().enumerate() {
            let sub = expand(&e.subst_vars(&solve));
            let t = is_zero(&sub, &opts).unwrap();
            assert!(t.is_zero, "equation {k} not solved: {:?}", t.witness);
        }
    }

    #[test]
    fn null_force_generators_are_symmetries() {
        let sys = system(Force::zero());
        let opts = symmetry_opts(32);
        let f = Slot::concrete(parse("t^2").unwrap());
        for (name, vf) in [
            ("P0", gen::p0()),
            ("D", gen::dil()),
            ("L", gen::rot()),
            ("X[t^2]", gen::x_slot(&f)),
            ("Y[t^2]", gen::y_slot(&f)),
            ("S[t]", gen::s_slot(&Slot::concrete(var("t")))),
        ] {
            let rep = check_symmetry(&vf, &sys, &opts);
            assert!(
                rep.all_pass(),
                "{name} failed: {:?}",
                rep.checks.iter().filter(|c| !c.pass).collect::<Vec<_>>()
            );
        }
    }

    #[test]
    fn galilean_boost_alone_is_not_a_symmetry() {
        // x-translation by t∂x without the ∂u compensation must fail (a).
        let bad = VectorField::from_parts(vec![("x", var("t"))]);
        let sys = system(Force::zero());
        let rep = check_symmetry(&bad, &sys, &symmetry_opts(32));
        assert!(!rep.all_pass());
        let failing: Vec<_> = rep.checks.iter().filter(|c| !c.pass).collect();
        assert!(failing.iter().any(|c| c.label == "equilibrium-x"));
        assert!(failing.iter().all(|c| c.witness.is_some()));
    }

    #[test]
    fn rotation_requires_theta_drift() {
        // L without the −∂θ term must break the coherence equation.
        let mut crippled = gen::rot();
        crippled.set("theta", Expr::zero());
        let sys = system(Force::zero());
        let rep = check_symmetry(&crippled, &sys, &symmetry_opts(32));
        let coherence = rep
            .checks
            .iter()
            .find(|c| c.label == "coherence")
            .unwrap();
        assert!(!coherence.pass);
    }

    #[test]
    fn monogenic_potential_shifts_generators() {
        // With V = x²y + t·x, the force-adapted P0, D, L, B_x, B_y are
        // symmetries while the null-force P0 is not.
        let vpot = parse("x^2*y + t*x").unwrap();
        let sys = system(Force::monogenic(&vpot));
        let opts = symmetry_opts(32);
        let tau = Slot::concrete(parse("t^2 + 1").unwrap());
        for (name, vf) in [
            ("P0+V", gen::p0_pot(&vpot)),
            ("D+V", gen::dil_pot(&vpot)),
            ("L+V", gen::rot_pot(&vpot)),
            ("Bx", gen::bx_pot(&tau, &vpot)),
            ("By", gen::by_pot(&tau, &vpot)),
            ("S[t^2]", gen::s_slot(&Slot::concrete(parse("t^2").unwrap()))),
        ] {
            let rep = check_symmetry(&vf, &sys, &opts);
            assert!(
                rep.all_pass(),
                "{name} failed: {:?}",
                rep.checks.iter().filter(|c| !c.pass).collect::<Vec<_>>()
            );
        }
        let rep = check_symmetry(&gen::p0(), &sys, &opts);
        assert!(!rep.all_pass(), "plain P0 should fail against ∇V force");
    }

    #[test]
    fn friction_force_admits_twist_generator() {
        // h₁(s) = s, h₂(s) = 1, κ₁ = κ₂ = 1: K = D + L passes; P0, P1, P2,
        // P_σ pass as well.
        let h1 = var("s");
        let h2 = Expr::one();
        let force = Force::friction(&h1, &h2, Expr::one(), Expr::one());
        let sys = system(force);
        let opts = symmetry_opts(32);
        let k = gen::k_twist(Expr::zero(), Expr::one(), Expr::one());
        for (name, vf) in [
            ("K", k),
            ("P0", gen::p0()),
            ("P1", gen::p1()),
            ("P2", gen::p2()),
            ("Psigma", gen::p_sigma(&Slot::concrete(parse("cos(t)").unwrap()))),
        ] {
            let rep = check_symmetry(&vf, &sys, &opts);
            assert!(
                rep.all_pass(),
                "{name} failed: {:?}",
                rep.checks.iter().filter(|c| !c.pass).collect::<Vec<_>>()
            );
        }
    }

    #[test]
    fn spiral_force_drops_time_translation() {
        // With the κ₃ spiral term, K gains κ₀∂t and stays a symmetry, while
        // P0 fails with a witness.
        let h1 = var("s");
        let h2 = Expr::one();
        let force = Force::friction_spiral(
            &h1,
            &h2,
            Expr::one(),
            Expr::one(),
            Expr::one(),
            Expr::one(),
            Expr::zero(),
        );
        let sys = system(force);
        let opts = symmetry_opts(32);
        let k = gen::k_twist(Expr::one(), Expr::one(), Expr::one());
        let rep = check_symmetry(&k, &sys, &opts);
        assert!(
            rep.all_pass(),
            "K with κ₀ failed: {:?}",
            rep.checks.iter().filter(|c| !c.pass).collect::<Vec<_>>()
        );
        let rep = check_symmetry(&gen::p0(), &sys, &opts);
        assert!(!rep.all_pass());
        assert!(rep
            .checks
            .iter()
            .any(|c| !c.pass && c.witness.is_some()));
    }
}
