//! Symmetry-variable reductions: the invariant coordinates of the two wired
//! reducing subalgebras, with annihilation checks, and the first integral of
//! the dilation–rotation reduced system.

use crate::symexpr::{
    is_zero, param, rat, var, Env, EvalError, Expr, Sym, ZeroOpts, ZeroTest, ZeroTestError,
};
use crate::vfield::generators::{dil_pot, k_twist, rot_pot};
use crate::vfield::VectorField;

/// The reductions wired into the toolkit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reduction {
    /// The dilation–rotation plane ⟨D, L⟩ admitted with a monogenic force.
    DilationRotation,
    /// The one-dimensional twist ⟨K⟩, K = κ₁D + κ₂L, admitted with a
    /// velocity-dependent force.
    Twist,
}

#[derive(Debug, Clone, thiserror::Error)]
#[error("no reduction is wired for `{0}` (supported: DL, K)")]
pub struct UnsupportedAlgebra(pub String);

impl Reduction {
    /// Parse a command-line name. `DL` (aliases `D,L`, `D+L`) selects the
    /// dilation–rotation plane; `K` selects the twist.
    pub fn parse(text: &str) -> Result<Self, UnsupportedAlgebra> {
        match text.trim().to_ascii_uppercase().as_str() {
            "DL" | "D,L" | "D+L" => Ok(Reduction::DilationRotation),
            "K" => Ok(Reduction::Twist),
            other => Err(UnsupportedAlgebra(other.to_string())),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Reduction::DilationRotation => "<D, L>",
            Reduction::Twist => "<K>",
        }
    }
}

/// Invariant coordinates of a reducing subalgebra, with the annihilation
/// evidence X(I) = 0 for every generator X and invariant I.
#[derive(Clone, Debug)]
pub struct ReducedCoords {
    pub label: String,
    pub generators: Vec<(String, VectorField)>,
    pub invariants: Vec<(String, Expr)>,
    /// (generator, invariant, zero test of the application).
    pub checks: Vec<(String, String, ZeroTest)>,
}

impl ReducedCoords {
    pub fn all_annihilated(&self) -> bool {
        self.checks.iter().all(|(_, _, t)| t.is_zero)
    }
}

/// The invariant set of the chosen reduction. For the dilation–rotation
/// plane the generators carry the pressure corrections induced by the
/// potential `vpot`, so the invariants hold for any monogenic force; pass
/// `Expr::zero()` for the force-free case. The twist generator keeps κ₁, κ₂
/// formal.
///
/// Every invariant is re-verified here: each generator is applied to each
/// invariant and the result zero-tested. A failed test surfaces in `checks`;
/// sampling failures (no in-domain points) are returned as errors.
pub fn invariants_of(
    which: Reduction,
    vpot: &Expr,
    opts: &ZeroOpts,
) -> Result<ReducedCoords, ZeroTestError> {
    let (t, x, y, u, v) = (var("t"), var("x"), var("y"), var("u"), var("v"));
    let r2 = x.clone() * x.clone() + y.clone() * y.clone();
    let speed2 = u.clone() * u.clone() + v.clone() * v.clone();
    let plane_angle = (y.clone() / x.clone()).atan();
    let flow_angle = (v.clone() / u.clone()).atan();

    let (generators, invariants): (Vec<(String, VectorField)>, Vec<(String, Expr)>) = match which {
        Reduction::DilationRotation => (
            vec![
                ("D".into(), dil_pot(vpot)),
                ("L".into(), rot_pot(vpot)),
            ],
            vec![
                ("xi".into(), r2 / (t.clone() * t.clone())),
                ("T1".into(), var("theta") - Expr::atan2(y, x)),
                ("T2".into(), var("theta") - Expr::atan2(v, u)),
                ("R".into(), speed2),
                (
                    "S".into(),
                    var("sigma") + param("rho") * vpot.clone(),
                ),
            ],
        ),
        Reduction::Twist => {
            let k = k_twist(Expr::zero(), param("kappa1"), param("kappa2"));
            let log_t = t.clone().ln();
            (
                vec![("K".into(), k)],
                vec![
                    ("r".into(), r2 / (t.clone() * t.clone())),
                    (
                        "xi".into(),
                        param("kappa2") * log_t.clone() + param("kappa1") * plane_angle,
                    ),
                    ("R".into(), speed2),
                    (
                        "T1".into(),
                        param("kappa2") * log_t.clone() + param("kappa1") * var("theta"),
                    ),
                    (
                        "T2".into(),
                        param("kappa2") * log_t + param("kappa1") * flow_angle,
                    ),
                    ("S".into(), var("sigma")),
                ],
            )
        }
    };

    let mut checks = vec![];
    for (gl, g) in &generators {
        for (il, inv) in &invariants {
            let applied = g.apply(inv);
            let test = is_zero(&applied, opts)?;
            checks.push((gl.clone(), il.clone(), test));
        }
    }

    Ok(ReducedCoords {
        label: which.label().to_string(),
        generators,
        invariants,
        checks,
    })
}

/// Evidence that ½·ξ·R·(1 + cos(2T₁ − 2T₂)) stays at the constant `a1`
/// along candidate reduced functions.
#[derive(Clone, Debug)]
pub struct FirstIntegralReport {
    /// (ξ, integral value) samples over the requested interval.
    pub samples: Vec<(f64, f64)>,
    /// max |value − a1|.
    pub max_deviation: f64,
    /// max |d(value)/dξ|.
    pub max_slope: f64,
    pub tol: f64,
    pub constant: bool,
}

/// Evaluate the reduced-system first integral along candidate functions
/// R(ξ), T₁(ξ), T₂(ξ) (expressions in the variable `xi`; parameters bound
/// through `env`). Both the deviation from `a1` and the ξ-derivative are
/// checked on a uniform grid.
pub fn first_integral_check(
    r: &Expr,
    t1: &Expr,
    t2: &Expr,
    a1: f64,
    env: &Env,
    interval: (f64, f64),
    n: usize,
    tol: f64,
) -> Result<FirstIntegralReport, EvalError> {
    let xi = var("xi");
    let two = crate::symexpr::int(2);
    let phase = two.clone() * t1.clone() - two * t2.clone();
    let integral = Expr::Num(rat(1, 2)) * xi * r.clone() * (Expr::one() + phase.cos());
    let slope = integral.diff(&Sym::new("xi"));

    let mut samples = Vec::with_capacity(n);
    let mut max_deviation = 0.0f64;
    let mut max_slope = 0.0f64;
    for k in 0..n {
        let s = if n > 1 { k as f64 / (n - 1) as f64 } else { 0.0 };
        let at = interval.0 + s * (interval.1 - interval.0);
        let mut env2 = env.clone();
        env2.set_var("xi", at);
        let value = integral.eval(&env2)?;
        let dv = slope.eval(&env2)?;
        samples.push((at, value));
        max_deviation = max_deviation.max((value - a1).abs());
        max_slope = max_slope.max(dv.abs());
    }

    Ok(FirstIntegralReport {
        samples,
        max_deviation,
        max_slope,
        tol,
        constant: max_deviation <= tol && max_slope <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::{expand, parse};
    use crate::vfield::generators::dil;

    #[test]
    fn dilation_rotation_invariants_are_annihilated_for_a_potential() {
        let vpot = parse("x^2*y + t*x").unwrap();
        let rc = invariants_of(Reduction::DilationRotation, &vpot, &ZeroOpts::default()).unwrap();
        assert_eq!(rc.invariants.len(), 5);
        assert_eq!(rc.checks.len(), 10);
        for (g, i, t) in &rc.checks {
            assert!(t.is_zero, "{g}({i}) is not annihilated: {:?}", t.witness);
        }
    }

    #[test]
    fn twist_invariants_are_annihilated_with_formal_parameters() {
        let rc = invariants_of(Reduction::Twist, &Expr::zero(), &ZeroOpts::default()).unwrap();
        assert_eq!(rc.invariants.len(), 6);
        assert!(rc.all_annihilated());
    }

    #[test]
    fn dilation_kills_the_symmetry_variable_exactly() {
        let xi = parse("(x^2 + y^2) / t^2").unwrap();
        let applied = expand(&dil().apply(&xi));
        assert!(applied.is_num_zero(), "D(xi) = {applied}");
    }

    #[test]
    fn unsupported_reduction_names_are_rejected() {
        assert!(Reduction::parse("DL").is_ok());
        assert!(Reduction::parse("k").is_ok());
        let err = Reduction::parse("P0,D").unwrap_err();
        assert!(err.to_string().contains("P0,D"));
    }

    #[test]
    fn first_integral_is_constant_along_the_radial_profile() {
        // R = a1/ξ with equal angles: the integrand collapses to a1 exactly.
        let r = parse("a1 / xi").unwrap();
        let t1 = parse("pi/4").unwrap();
        let t2 = parse("pi/4").unwrap();
        let mut env = Env::new();
        env.set_param("a1", 1.0);
        let rep =
            first_integral_check(&r, &t1, &t2, 1.0, &env, (0.5, 2.0), 100, 1e-10).unwrap();
        assert!(rep.constant, "deviation {}", rep.max_deviation);
        assert!(rep.max_deviation <= 1e-10);
        assert_eq!(rep.samples.len(), 100);
    }

    #[test]
    fn quarter_turn_phase_gives_the_zero_constant() {
        // T1 = T2 − π/2 makes the cosine −1 for any R, so the integral is 0.
        let r = parse("xi^2 + 1").unwrap();
        let t2 = parse("atan(xi)").unwrap();
        let t1 = parse("atan(xi) - pi/2").unwrap();
        let rep =
            first_integral_check(&r, &t1, &t2, 0.0, &Env::new(), (0.5, 2.0), 50, 1e-10).unwrap();
        assert!(rep.constant);
    }

    #[test]
    fn a_non_solution_pair_drifts() {
        let r = parse("1").unwrap();
        let t1 = parse("xi").unwrap();
        let t2 = parse("0").unwrap();
        let rep =
            first_integral_check(&r, &t1, &t2, 1.0, &Env::new(), (0.5, 2.0), 50, 1e-10).unwrap();
        assert!(!rep.constant);
        assert!(rep.max_deviation > 0.1);
    }
}
