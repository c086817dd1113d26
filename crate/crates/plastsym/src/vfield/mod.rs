//! Vector fields on the base space (t, x, y, u, v, σ, θ): the symmetry
//! generators of the planar flow system, Lie brackets, and verification of
//! the commutation table.

pub mod generators;
mod table;

pub use generators::{parse_generator, Slot};
pub use table::{check_table, expected_bracket, SlotCheck, TableElem, TableReport};

use crate::symexpr::{expand, is_zero, Expr, Sym, ZeroOpts, ZeroTest, ZeroTestError};
use std::collections::BTreeMap;
use std::fmt;

/// Coordinates of the base space, in display order.
pub const COORDS: [&str; 7] = ["t", "x", "y", "u", "v", "sigma", "theta"];

/// A vector field Σᵢ ξⁱ(t,x,y,u,v,σ,θ) ∂ᵢ, stored sparsely.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct VectorField {
    components: BTreeMap<Sym, Expr>,
}

impl VectorField {
    pub fn new() -> Self {
        Self::default()
    }

    /// Build from (coordinate, coefficient) pairs.
    pub fn from_parts(parts: Vec<(&str, Expr)>) -> Self {
        let mut f = Self::new();
        for (c, e) in parts {
            f.set(c, e);
        }
        f
    }

    pub fn set(&mut self, coord: &str, e: Expr) {
        debug_assert!(COORDS.contains(&coord), "unknown coordinate {coord}");
        if e.is_num_zero() {
            self.components.remove(&Sym::new(coord));
        } else {
            self.components.insert(Sym::new(coord), e);
        }
    }

    /// Coefficient of ∂/∂`coord` (zero when absent).
    pub fn component(&self, coord: &str) -> Expr {
        self.components
            .get(&Sym::new(coord))
            .cloned()
            .unwrap_or_else(Expr::zero)
    }

    pub fn components(&self) -> &BTreeMap<Sym, Expr> {
        &self.components
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Apply the field to a scalar expression: Σᵢ ξⁱ ∂e/∂i.
    pub fn apply(&self, e: &Expr) -> Expr {
        let mut terms = Vec::new();
        for (coord, coeff) in &self.components {
            let d = e.diff(coord);
            if !d.is_num_zero() {
                terms.push(coeff.clone() * d);
            }
        }
        Expr::add(terms)
    }

    /// Lie bracket [self, other]ⁱ = self(otherⁱ) − other(selfⁱ), with each
    /// component expanded and collected.
    pub fn bracket(&self, other: &VectorField) -> VectorField {
        let mut out = VectorField::new();
        for coord in COORDS {
            let a = self.apply(&other.component(coord));
            let b = other.apply(&self.component(coord));
            let c = expand(&(a - b));
            out.set(coord, c);
        }
        out
    }

    pub fn scale(&self, k: Expr) -> VectorField {
        let mut out = VectorField::new();
        for (coord, coeff) in &self.components {
            out.set(coord.as_str(), expand(&(k.clone() * coeff.clone())));
        }
        out
    }

    pub fn plus(&self, other: &VectorField) -> VectorField {
        let mut out = self.clone();
        for (coord, coeff) in &other.components {
            let sum = expand(&(out.component(coord.as_str()) + coeff.clone()));
            out.set(coord.as_str(), sum);
        }
        out
    }

    pub fn minus(&self, other: &VectorField) -> VectorField {
        self.plus(&other.scale(crate::symexpr::int(-1)))
    }

    /// Expand and collect every component.
    pub fn collected(&self) -> VectorField {
        let mut out = VectorField::new();
        for (coord, coeff) in &self.components {
            out.set(coord.as_str(), expand(coeff));
        }
        out
    }

    /// Randomized test that every component vanishes. Returns the first
    /// failing component's test on failure, else the worst passing one.
    pub fn is_zero_field(&self, opts: &ZeroOpts) -> Result<FieldZeroTest, ZeroTestError> {
        let mut worst = ZeroTest {
            is_zero: true,
            max_relative: 0.0,
            witness: None,
            samples: 0,
        };
        let mut worst_coord = None;
        for (coord, coeff) in &self.components {
            let t = is_zero(coeff, opts)?;
            if !t.is_zero {
                return Ok(FieldZeroTest {
                    coord: Some(coord.to_string()),
                    test: t,
                });
            }
            if t.max_relative >= worst.max_relative {
                worst = t;
                worst_coord = Some(coord.to_string());
            }
        }
        Ok(FieldZeroTest {
            coord: worst_coord,
            test: worst,
        })
    }

    /// Randomized equality: `[self − other]` vanishes componentwise.
    pub fn equiv(&self, other: &VectorField, opts: &ZeroOpts) -> Result<FieldZeroTest, ZeroTestError> {
        self.minus(other).collected().is_zero_field(opts)
    }
}

/// Componentwise zero-test outcome for a vector field.
#[derive(Clone, Debug)]
pub struct FieldZeroTest {
    /// Coordinate whose test is reported (the failing one, or the worst
    /// passing one).
    pub coord: Option<String>,
    pub test: ZeroTest,
}

impl FieldZeroTest {
    pub fn is_zero(&self) -> bool {
        self.test.is_zero
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.components.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for coord in COORDS {
            if let Some(coeff) = self.components.get(&Sym::new(coord)) {
                if !first {
                    write!(f, " + ")?;
                }
                first = false;
                if coeff.is_num_one() {
                    write!(f, "d/d{coord}")?;
                } else {
                    write!(f, "({coeff}) d/d{coord}")?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::generators as gen;
    use super::*;
    use crate::symexpr::{parse, var};

    #[test]
    fn apply_is_directional_derivative() {
        let d = gen::dil();
        // D(x²+y²) = 2x² + 2y²; D(t·x) = 2tx.
        let e = parse("x^2 + y^2").unwrap();
        let got = expand(&d.apply(&e));
        let want = expand(&parse("2*x^2 + 2*y^2").unwrap());
        assert_eq!(got, want);
        let e2 = parse("t*x").unwrap();
        assert_eq!(expand(&d.apply(&e2)), expand(&parse("2*t*x").unwrap()));
    }

    #[test]
    fn bracket_antisymmetry() {
        let l = gen::rot();
        let x = gen::x_slot(&Slot::concrete(parse("t^2").unwrap()));
        let ab = l.bracket(&x);
        let ba = x.bracket(&l);
        assert_eq!(ab, ba.scale(crate::symexpr::int(-1)).collected());
    }

    #[test]
    fn bracket_of_p0_and_dilation_is_p0() {
        let p0 = gen::p0();
        let d = gen::dil();
        assert_eq!(p0.bracket(&d), p0);
    }

    #[test]
    fn jacobi_identity_on_a_triple() {
        let a = gen::dil();
        let b = gen::rot();
        let c = gen::x_slot(&Slot::concrete(parse("t^3").unwrap()));
        let j = a
            .bracket(&b.bracket(&c))
            .plus(&b.bracket(&c.bracket(&a)))
            .plus(&c.bracket(&a.bracket(&b)))
            .collected();
        assert!(j.is_empty(), "jacobi defect: {j}");
    }

    #[test]
    fn translations_in_x_are_degree_zero_slot() {
        let x1 = gen::x_slot(&Slot::concrete(Expr::one()));
        assert_eq!(x1.component("x"), Expr::one());
        assert!(x1.component("u").is_num_zero());
        assert!(x1.component("sigma").is_num_zero());
    }

    #[test]
    fn formal_and_concrete_slots_agree_under_binding() {
        use crate::symexpr::{Env, FuncBinding, SampleBox};
        let formal = gen::x_slot(&Slot::formal("f"));
        let concrete = gen::x_slot(&Slot::concrete(parse("t^3 - 2*t").unwrap()));
        let mut env = Env::new();
        env.bind_func("f", FuncBinding::poly(&[0.0, -2.0, 0.0, 1.0]));
        let opts = ZeroOpts {
            env,
            sample_box: SampleBox::default_box(),
            ..Default::default()
        };
        let t = formal.equiv(&concrete, &opts).unwrap();
        assert!(t.is_zero(), "{:?}", t.test.witness);
    }

    #[test]
    fn rotation_mixes_x_into_y_slot() {
        // [L, X_f] = Y_f.
        let l = gen::rot();
        let f = parse("t^2 + 1").unwrap();
        let got = l.bracket(&gen::x_slot(&Slot::concrete(f.clone())));
        let want = gen::y_slot(&Slot::concrete(f)).collected();
        assert_eq!(got, want);
    }

    #[test]
    fn x_slots_close_into_sigma_translations() {
        // [X_f1, X_f2] = ρ(f1 f̈2 − f2 f̈1) ∂σ, which is S-type.
        let x1 = gen::x_slot(&Slot::concrete(Expr::one()));
        let x2 = gen::x_slot(&Slot::concrete(parse("t^2").unwrap()));
        let got = x1.bracket(&x2);
        let want = gen::s_slot(&Slot::concrete(parse("2*rho").unwrap())).collected();
        assert_eq!(got, want);
    }

    #[test]
    fn display_is_readable() {
        let l = gen::rot();
        let s = l.to_string();
        assert!(s.contains("d/dtheta"), "{s}");
        assert!(var("x").to_string() == "x");
    }
}
