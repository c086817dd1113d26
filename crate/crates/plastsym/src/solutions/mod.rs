//! Explicit flow families, symmetry-variable reductions, and a numeric
//! residual oracle for the governing system.
//!
//! The oracle differentiates each family with forward-mode dual numbers
//! ([`Dual3`] carries ∂/∂t, ∂/∂x, ∂/∂y through [`crate::symexpr::Expr`]
//! evaluation, including quadrature nodes via the fundamental theorem of
//! calculus), binds the resulting jet values into the governing equations
//! from [`crate::prolong`], and reports the largest residual per equation.
//! Families that carry a documented transcription of a suspect source form
//! are stored verbatim next to the reduced-system rederivation, so the
//! residual report can show both numbers.

pub mod quad;

mod families;
mod flow;
mod reduce;

pub use families::{
    by_name, certify, family_names, friction_vortex, friction_vortex_printed, radial_jet,
    residual, rigid_vortex, rigid_vortex_printed, sample_points, spiral_transition,
    spiral_transition_printed, ResidualReport, SolutionFamily,
};
pub use flow::{flow_field, to_csv, to_svg, FlowFieldGrid, FlowSample, GridParseError, GridSpec};
pub use reduce::{
    first_integral_check, invariants_of, FirstIntegralReport, ReducedCoords, Reduction,
    UnsupportedAlgebra,
};

use std::collections::BTreeMap;

use crate::symexpr::{Env, EvalError, Expr, Scalar, Sym};

/// Forward-mode dual number with three derivative slots (∂t, ∂x, ∂y).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual3 {
    pub v: f64,
    pub d: [f64; 3],
}

impl Dual3 {
    pub fn constant(v: f64) -> Self {
        Dual3 { v, d: [0.0; 3] }
    }

    /// A seed value for the derivative slot `axis`.
    pub fn seed(v: f64, axis: usize) -> Self {
        let mut d = [0.0; 3];
        d[axis] = 1.0;
        Dual3 { v, d }
    }
}

impl std::ops::Add for Dual3 {
    type Output = Dual3;
    fn add(self, rhs: Dual3) -> Dual3 {
        Dual3 {
            v: self.v + rhs.v,
            d: [
                self.d[0] + rhs.d[0],
                self.d[1] + rhs.d[1],
                self.d[2] + rhs.d[2],
            ],
        }
    }
}

impl std::ops::Sub for Dual3 {
    type Output = Dual3;
    fn sub(self, rhs: Dual3) -> Dual3 {
        Dual3 {
            v: self.v - rhs.v,
            d: [
                self.d[0] - rhs.d[0],
                self.d[1] - rhs.d[1],
                self.d[2] - rhs.d[2],
            ],
        }
    }
}

impl std::ops::Mul for Dual3 {
    type Output = Dual3;
    fn mul(self, rhs: Dual3) -> Dual3 {
        Dual3 {
            v: self.v * rhs.v,
            d: [
                self.d[0] * rhs.v + self.v * rhs.d[0],
                self.d[1] * rhs.v + self.v * rhs.d[1],
                self.d[2] * rhs.v + self.v * rhs.d[2],
            ],
        }
    }
}

impl std::ops::Neg for Dual3 {
    type Output = Dual3;
    fn neg(self) -> Dual3 {
        Dual3 {
            v: -self.v,
            d: [-self.d[0], -self.d[1], -self.d[2]],
        }
    }
}

impl Scalar for Dual3 {
    fn constant(v: f64) -> Self {
        Dual3::constant(v)
    }

    fn value(&self) -> f64 {
        self.v
    }

    fn chain(value: f64, deriv: f64, inner: Self) -> Self {
        Dual3 {
            v: value,
            d: [
                deriv * inner.d[0],
                deriv * inner.d[1],
                deriv * inner.d[2],
            ],
        }
    }

    fn chain2(value: f64, da: f64, a: Self, db: f64, b: Self) -> Self {
        Dual3 {
            v: value,
            d: [
                da * a.d[0] + db * b.d[0],
                da * a.d[1] + db * b.d[1],
                da * a.d[2] + db * b.d[2],
            ],
        }
    }
}

/// Value and exact partials (∂t, ∂x, ∂y) of `e` at a base point. Symbols
/// other than t, x, y must be bound in `env` and are treated as constants.
pub fn partials(e: &Expr, env: &Env, t: f64, x: f64, y: f64) -> Result<Dual3, EvalError> {
    let mut seeds: BTreeMap<Sym, Dual3> = BTreeMap::new();
    seeds.insert(Sym::new("t"), Dual3::seed(t, 0));
    seeds.insert(Sym::new("x"), Dual3::seed(x, 1));
    seeds.insert(Sym::new("y"), Dual3::seed(y, 2));
    e.eval_scalar(env, &seeds, &mut |_| {})
}
