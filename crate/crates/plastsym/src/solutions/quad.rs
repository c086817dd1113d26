//! Adaptive Gauss–Kronrod quadrature (G7/K15).
//!
//! A 7-point Gauss rule embedded in a 15-point Kronrod extension gives a
//! value and an error estimate per panel; panels are bisected
//! worst-error-first until the summed estimate meets the requested absolute
//! tolerance. The error rescaling follows the classical QUADPACK heuristic.

use crate::symexpr::EvalError;

/// Abscissae of the 15-point Kronrod rule on [-1, 1]; entries at odd index
/// and the final zero are the embedded 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

/// Weights of the 7-point Gauss rule (pairs, then the centre node).
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Weights of the 15-point Kronrod rule.
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const MAX_PANELS: usize = 512;

type Integrand<'a> = dyn Fn(f64) -> Result<f64, EvalError> + 'a;

/// Integrate `f` over `[a, b]` to absolute tolerance `abs_tol`.
///
/// Errors from the integrand (domain violations, unbound symbols) propagate;
/// failure to converge within the panel budget is reported as a typed
/// quadrature error carrying the final estimate.
pub fn integrate(f: &Integrand<'_>, a: f64, b: f64, abs_tol: f64) -> Result<f64, EvalError> {
    if a == b {
        return Ok(0.0);
    }
    if b < a {
        return integrate(f, b, a, abs_tol).map(|v| -v);
    }

    struct Panel {
        lo: f64,
        hi: f64,
        value: f64,
        err: f64,
    }

    let eval_panel = |lo: f64, hi: f64| -> Result<Panel, EvalError> {
        let (value, err) = qk15(f, lo, hi)?;
        Ok(Panel { lo, hi, value, err })
    };

    let mut panels = vec![eval_panel(a, b)?];
    loop {
        let total_err: f64 = panels.iter().map(|p| p.err).sum();
        if total_err <= abs_tol {
            return Ok(panels.iter().map(|p| p.value).sum());
        }
        if panels.len() >= MAX_PANELS {
            return Err(EvalError::QuadratureFailure {
                est: total_err,
                lo: a,
                hi: b,
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|(_, p), (_, q)| p.err.total_cmp(&q.err))
            .map(|(i, _)| i)
            .unwrap();
        let Panel { lo, hi, .. } = panels.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        panels.push(eval_panel(lo, mid)?);
        panels.push(eval_panel(mid, hi)?);
    }
}

/// One application of the 15-point Kronrod rule with embedded 7-point Gauss
/// error estimate. Returns (integral, error estimate).
fn qk15(f: &Integrand<'_>, a: f64, b: f64) -> Result<(f64, f64), EvalError> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let abs_half = half.abs();

    let f_center = f(center)?;
    let mut result_gauss = f_center * WG[3];
    let mut result_kronrod = f_center * WGK[7];
    let mut result_abs = result_kronrod.abs();

    let mut fv1 = [0.0f64; 7];
    let mut fv2 = [0.0f64; 7];

    for j in 0..3 {
        let jtw = 2 * j + 1;
        let absc = half * XGK[jtw];
        let fval1 = f(center - absc)?;
        let fval2 = f(center + absc)?;
        fv1[jtw] = fval1;
        fv2[jtw] = fval2;
        let fsum = fval1 + fval2;
        result_gauss += WG[j] * fsum;
        result_kronrod += WGK[jtw] * fsum;
        result_abs += WGK[jtw] * (fval1.abs() + fval2.abs());
    }
    for j in 0..4 {
        let jtwm1 = 2 * j;
        let absc = half * XGK[jtwm1];
        let fval1 = f(center - absc)?;
        let fval2 = f(center + absc)?;
        fv1[jtwm1] = fval1;
        fv2[jtwm1] = fval2;
        let fsum = fval1 + fval2;
        result_kronrod += WGK[jtwm1] * fsum;
        result_abs += WGK[jtwm1] * (fval1.abs() + fval2.abs());
    }

    let mean = result_kronrod * 0.5;
    let mut result_asc = WGK[7] * (f_center - mean).abs();
    for j in 0..7 {
        result_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let result = result_kronrod * half;
    result_abs *= abs_half;
    result_asc *= abs_half;
    let err = rescale_error((result_kronrod - result_gauss) * half, result_abs, result_asc);
    Ok((result, err))
}

/// QUADPACK error rescaling: sharpen the raw Gauss/Kronrod difference while
/// keeping it above the attainable floor for the magnitudes involved.
fn rescale_error(err: f64, result_abs: f64, result_asc: f64) -> f64 {
    let mut err = err.abs();
    if result_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / result_asc).powf(1.5);
        err = if scale < 1.0 {
            result_asc * scale
        } else {
            result_asc
        };
    }
    if result_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        let min_err = 50.0 * f64::EPSILON * result_abs;
        if min_err > err {
            err = min_err;
        }
    }
    err
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ok(f: impl Fn(f64) -> f64) -> impl Fn(f64) -> Result<f64, EvalError> {
        move |x| Ok(f(x))
    }

    #[test]
    fn polynomial_is_exact() {
        let f = ok(|x| 3.0 * x * x);
        let v = integrate(&f, 0.0, 2.0, 1e-10).unwrap();
        assert!((v - 8.0).abs() < 1e-12);
    }

    #[test]
    fn oscillatory_integrand() {
        let f = ok(|x| (10.0 * x).sin());
        let v = integrate(&f, 0.0, std::f64::consts::PI, 1e-10).unwrap();
        let exact = (1.0 - (10.0 * std::f64::consts::PI).cos()) / 10.0;
        assert!((v - exact).abs() < 1e-10);
    }

    #[test]
    fn reversed_limits_negate() {
        let f = ok(|x| x.exp());
        let fwd = integrate(&f, 0.0, 1.0, 1e-10).unwrap();
        let rev = integrate(&f, 1.0, 0.0, 1e-10).unwrap();
        assert!((fwd + rev).abs() < 1e-12);
        assert!((fwd - (std::f64::consts::E - 1.0)).abs() < 1e-10);
    }

    #[test]
    fn integrable_endpoint_singularity() {
        // ∫₀¹ x^(-1/2) dx = 2; the integrand blows up at 0 but panels never
        // evaluate exactly at the endpoints.
        let f = ok(|x| x.powf(-0.5));
        let v = integrate(&f, 0.0, 1.0, 1e-8).unwrap();
        assert!((v - 2.0).abs() < 1e-6, "got {v}");
    }

    #[test]
    fn integrand_errors_propagate() {
        let f = |x: f64| -> Result<f64, EvalError> {
            if x > 0.5 {
                Err(EvalError::DomainViolation {
                    subterm: "test".into(),
                    detail: "poison".into(),
                    value: x,
                })
            } else {
                Ok(x)
            }
        };
        assert!(integrate(&f, 0.0, 1.0, 1e-10).is_err());
    }
}
