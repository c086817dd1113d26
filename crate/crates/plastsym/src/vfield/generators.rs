//! The symmetry generators admitted by the planar flow system, as vector
//! fields on (t, x, y, u, v, σ, θ).
//!
//! Slot functions of time (the f, g, h in X_f, Y_g, S_h) enter either as
//! formal function symbols — for structural identities — or as concrete
//! expressions in t, for numeric verification.

use super::VectorField;
use crate::symexpr::{expand, param, var, Expr, Sym};

/// A time-dependent slot function for X/Y/S-type generators.
#[derive(Clone, Debug)]
pub enum Slot {
    /// A formal symbol: derivatives stay unevaluated (`f`, `f'`, `f''`).
    Formal(Sym),
    /// A concrete expression in `t`: derivatives are taken symbolically.
    Concrete(Expr),
}

impl Slot {
    pub fn formal(name: &str) -> Self {
        Slot::Formal(Sym::new(name))
    }

    pub fn concrete(e: Expr) -> Self {
        Slot::Concrete(e)
    }

    /// The k-th time derivative of the slot function, as an expression in t.
    pub fn d(&self, k: u32) -> Expr {
        match self {
            Slot::Formal(name) => Expr::Func {
                name: name.clone(),
                order: k,
                arg: Box::new(var("t")),
            },
            Slot::Concrete(e) => {
                let t = Sym::new("t");
                let mut d = e.clone();
                for _ in 0..k {
                    d = d.diff(&t);
                }
                expand(&d)
            }
        }
    }
}

/// Time translation ∂t.
pub fn p0() -> VectorField {
    VectorField::from_parts(vec![("t", Expr::one())])
}

/// Space translations ∂x, ∂y (admitted for velocity-dependent forces).
pub fn p1() -> VectorField {
    VectorField::from_parts(vec![("x", Expr::one())])
}

pub fn p2() -> VectorField {
    VectorField::from_parts(vec![("y", Expr::one())])
}

/// Dilation D = t∂t + x∂x + y∂y.
pub fn dil() -> VectorField {
    VectorField::from_parts(vec![("t", var("t")), ("x", var("x")), ("y", var("y"))])
}

/// Rotation L = y∂x − x∂y + v∂u − u∂v − ∂θ.
pub fn rot() -> VectorField {
    VectorField::from_parts(vec![
        ("x", var("y")),
        ("y", -var("x")),
        ("u", var("v")),
        ("v", -var("u")),
        ("theta", -Expr::one()),
    ])
}

/// X_f = f ∂x + f′ ∂u + ρ x f″ ∂σ.
pub fn x_slot(f: &Slot) -> VectorField {
    VectorField::from_parts(vec![
        ("x", f.d(0)),
        ("u", f.d(1)),
        ("sigma", expand(&(param("rho") * var("x") * f.d(2)))),
    ])
}

/// Y_g = g ∂y + g′ ∂v + ρ y g″ ∂σ.
pub fn y_slot(g: &Slot) -> VectorField {
    VectorField::from_parts(vec![
        ("y", g.d(0)),
        ("v", g.d(1)),
        ("sigma", expand(&(param("rho") * var("y") * g.d(2)))),
    ])
}

/// S_h = h(t) ∂σ — pressure shifts by an arbitrary function of time.
pub fn s_slot(h: &Slot) -> VectorField {
    VectorField::from_parts(vec![("sigma", h.d(0))])
}

// ---------------------------------------------------------------------------
// Monogenic force F = ∇V
// ---------------------------------------------------------------------------

fn vx(vpot: &Expr) -> Expr {
    vpot.diff(&Sym::new("x"))
}

fn vy(vpot: &Expr) -> Expr {
    vpot.diff(&Sym::new("y"))
}

fn vt(vpot: &Expr) -> Expr {
    vpot.diff(&Sym::new("t"))
}

/// P₀ for a monogenic force: ∂t − ρ V_t ∂σ.
pub fn p0_pot(vpot: &Expr) -> VectorField {
    VectorField::from_parts(vec![
        ("t", Expr::one()),
        ("sigma", expand(&-(param("rho") * vt(vpot)))),
    ])
}

/// B_x = τ∂x + τ′∂u − ρ(τ V_x − x τ″)∂σ.
pub fn bx_pot(tau: &Slot, vpot: &Expr) -> VectorField {
    VectorField::from_parts(vec![
        ("x", tau.d(0)),
        ("u", tau.d(1)),
        (
            "sigma",
            expand(&-(param("rho") * (tau.d(0) * vx(vpot) - var("x") * tau.d(2)))),
        ),
    ])
}

/// B_y = τ∂y + τ′∂v − ρ(τ V_y − y τ″)∂σ.
pub fn by_pot(tau: &Slot, vpot: &Expr) -> VectorField {
    VectorField::from_parts(vec![
        ("y", tau.d(0)),
        ("v", tau.d(1)),
        (
            "sigma",
            expand(&-(param("rho") * (tau.d(0) * vy(vpot) - var("y") * tau.d(2)))),
        ),
    ])
}

/// D for a monogenic force: t∂t + x∂x + y∂y − ρ(tV_t + xV_x + yV_y)∂σ.
pub fn dil_pot(vpot: &Expr) -> VectorField {
    let drift = var("t") * vt(vpot) + var("x") * vx(vpot) + var("y") * vy(vpot);
    VectorField::from_parts(vec![
        ("t", var("t")),
        ("x", var("x")),
        ("y", var("y")),
        ("sigma", expand(&-(param("rho") * drift))),
    ])
}

/// L for a monogenic force: the null-force rotation plus ρ(xV_y − yV_x)∂σ.
pub fn rot_pot(vpot: &Expr) -> VectorField {
    let twist = var("x") * vy(vpot) - var("y") * vx(vpot);
    VectorField::from_parts(vec![
        ("x", var("y")),
        ("y", -var("x")),
        ("u", var("v")),
        ("v", -var("u")),
        ("sigma", expand(&(param("rho") * twist))),
        ("theta", -Expr::one()),
    ])
}

// ---------------------------------------------------------------------------
// Velocity-dependent (friction) forces
// ---------------------------------------------------------------------------

/// P_σ = ρ s(t) ∂σ, the pressure shift admitted alongside friction forces.
pub fn p_sigma(s: &Slot) -> VectorField {
    VectorField::from_parts(vec![("sigma", expand(&(param("rho") * s.d(0))))])
}

/// The twist–dilation generator admitted by velocity-dependent forces:
/// K = κ₀∂t + κ₁(t∂t + x∂x + y∂y) + κ₂(y∂x − x∂y + v∂u − u∂v − ∂θ).
///
/// κ₀ is zero for the time-independent force family and nonzero when the
/// force carries the logarithmic-spiral time contribution.
pub fn k_twist(kappa0: Expr, kappa1: Expr, kappa2: Expr) -> VectorField {
    p0().scale(kappa0)
        .plus(&dil().scale(kappa1))
        .plus(&rot().scale(kappa2))
}

// ---------------------------------------------------------------------------
// Text form for CLI use: linear combinations like "L + 2*D" or "X[t^2]"
// ---------------------------------------------------------------------------

/// Parse a generator description: a signed linear combination of
/// `P0 | P1 | P2 | D | L | X[expr] | Y[expr] | S[expr]` with numeric
/// coefficients, e.g. `L + 0.5*D`, `X[t^2] - Y[t]`, `S[1]`.
pub fn parse_generator(text: &str) -> Result<VectorField, String> {
    let mut acc = VectorField::new();
    let src: Vec<char> = text.chars().collect();
    let mut i = 0usize;
    let skip_ws = |i: &mut usize| {
        while *i < src.len() && src[*i].is_whitespace() {
            *i += 1;
        }
    };
    let mut first = true;
    loop {
        skip_ws(&mut i);
        if i >= src.len() {
            if first {
                return Err("empty generator".into());
            }
            break;
        }
        let mut sign = 1.0f64;
        if src[i] == '+' || src[i] == '-' {
            if src[i] == '-' {
                sign = -1.0;
            }
            i += 1;
        } else if !first {
            return Err(format!("expected + or - at position {i}"));
        }
        skip_ws(&mut i);
        // Optional numeric coefficient followed by '*'.
        let mut coef = 1.0f64;
        let start = i;
        while i < src.len() && (src[i].is_ascii_digit() || src[i] == '.') {
            i += 1;
        }
        if i > start {
            let numtext: String = src[start..i].iter().collect();
            let parsed: f64 = numtext
                .parse()
                .map_err(|_| format!("bad coefficient `{numtext}`"))?;
            skip_ws(&mut i);
            if i < src.len() && src[i] == '*' {
                i += 1;
                coef = parsed;
            } else {
                return Err(format!("coefficient `{numtext}` must be followed by `*`"));
            }
        }
        skip_ws(&mut i);
        // Primitive name.
        let ns = i;
        while i < src.len() && (src[i].is_ascii_alphanumeric()) {
            i += 1;
        }
        let name: String = src[ns..i].iter().collect();
        let field = match name.as_str() {
            "P0" => p0(),
            "P1" => p1(),
            "P2" => p2(),
            "D" => dil(),
            "L" => rot(),
            "X" | "Y" | "S" => {
                skip_ws(&mut i);
                if i >= src.len() || src[i] != '[' {
                    return Err(format!("`{name}` requires a slot like {name}[t^2]"));
                }
                i += 1;
                let es = i;
                while i < src.len() && src[i] != ']' {
                    i += 1;
                }
                if i >= src.len() {
                    return Err("unterminated slot: missing `]`".into());
                }
                let slot_text: String = src[es..i].iter().collect();
                i += 1;
                let e = crate::symexpr::parse(&slot_text).map_err(|err| err.to_string())?;
                let slot = Slot::concrete(e);
                match name.as_str() {
                    "X" => x_slot(&slot),
                    "Y" => y_slot(&slot),
                    _ => s_slot(&slot),
                }
            }
            "" => return Err(format!("expected a generator name at position {i}")),
            other => return Err(format!("unknown generator `{other}`")),
        };
        acc = acc.plus(&field.scale(crate::symexpr::num_f64(sign * coef)));
        first = false;
    }
    Ok(acc.collected())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::parse;

    #[test]
    fn parses_linear_combination() {
        let got = parse_generator("L + 2*D").unwrap();
        let want = rot().plus(&dil().scale(crate::symexpr::int(2)));
        assert_eq!(got, want.collected());
    }

    #[test]
    fn parses_slots() {
        let got = parse_generator("X[t^2] - Y[t]").unwrap();
        let want = x_slot(&Slot::concrete(parse("t^2").unwrap()))
            .minus(&y_slot(&Slot::concrete(parse("t").unwrap())));
        assert_eq!(got, want.collected());
    }

    #[test]
    fn rejects_unknown_names() {
        assert!(parse_generator("Q").is_err());
        assert!(parse_generator("X").is_err());
        assert!(parse_generator("2 D").is_err());
    }

    #[test]
    fn k_twist_combines_p0_dilation_rotation() {
        let k = k_twist(Expr::zero(), Expr::one(), Expr::one());
        assert_eq!(k, dil().plus(&rot()));
    }
}
