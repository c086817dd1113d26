//! End-to-end acceptance gates: one test per gate, one PASS line each.
//!
//! These pin the toolkit's headline guarantees at their committed
//! tolerances — the commutation table, the symmetry criterion for the
//! force-free and friction algebras, closed-form adjoints against the
//! series, the subalgebra catalogue, normal-form reduction, exact-solution
//! residuals, the reduced first integral, flow-field reproduction, and
//! report determinism.

use std::process::Command;
use std::time::{Duration, Instant};

use plastsym::adjoint::{ad_check, GroupElement};
use plastsym::classify::{
    normal_form_1d, poly_from_text, roundtrip_check, verify_catalog, CatalogGrid, NormalBranch,
};
use plastsym::prolong::{check_symmetry, symmetry_opts, system, Force};
use plastsym::solutions::{by_name, certify, first_integral_check};
use plastsym::symexpr::{num_f64, parse, rat, var, Env, Expr, ZeroOpts};
use plastsym::vfield::generators as gen;
use plastsym::vfield::{check_table, Slot, TableElem};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tpow(k: i64) -> Expr {
    Expr::pow(var("t"), rat(k, 1))
}

// ---------------------------------------------------------------------------
// 1. Commutation table — slots through degree 5, tol 1e-9, under 10 s.
// ---------------------------------------------------------------------------

#[test]
fn gate_01_commutation_table_closes_on_slots_through_degree_five() {
    let started = Instant::now();
    let slots: Vec<Expr> = (0..=5).map(tpow).collect();
    let opts = ZeroOpts {
        tol: 1e-9,
        ..Default::default()
    };
    let report = check_table(&slots, &opts);
    let failures = report.failures();
    assert!(
        failures.is_empty(),
        "bracket relations refuted: {failures:?}"
    );
    let elapsed = started.elapsed();
    assert!(
        elapsed < Duration::from_secs(10),
        "table verification took {elapsed:?}"
    );
    println!(
        "PASS  commutation table: {} bracket pairs on slots 1..t^5 at 1e-9 in {} ms (< 10 s)",
        report.checks.len(),
        elapsed.as_millis()
    );
}

// ---------------------------------------------------------------------------
// 2. Force-free basis — every generator passes the on-manifold criterion
//    at 1e-8 over 100 sampled jet points.
// ---------------------------------------------------------------------------

#[test]
fn gate_02_zero_force_basis_leaves_the_system_invariant() {
    let sys = system(Force::zero());
    let opts = symmetry_opts(100); // tol 1e-8, 100 jet points
    assert_eq!(opts.trials, 100);
    assert_eq!(opts.tol, 1e-8);

    let mut battery: Vec<(String, plastsym::vfield::VectorField)> = vec![
        ("P0".into(), gen::p0()),
        ("D".into(), gen::dil()),
        ("L".into(), gen::rot()),
    ];
    for k in 0..=3 {
        battery.push((format!("X[t^{k}]"), gen::x_slot(&Slot::concrete(tpow(k)))));
        battery.push((format!("Y[t^{k}]"), gen::y_slot(&Slot::concrete(tpow(k)))));
    }
    for k in [0, 2] {
        battery.push((format!("S[t^{k}]"), gen::s_slot(&Slot::concrete(tpow(k)))));
    }
    assert_eq!(battery.len(), 13);

    for (label, vf) in &battery {
        let rep = check_symmetry(vf, &sys, &opts);
        assert!(
            rep.all_pass(),
            "{label} violates the criterion: {:?}",
            rep.checks.iter().filter(|c| !c.pass).collect::<Vec<_>>()
        );
    }
    println!(
        "PASS  force-free basis: {} generators × 4 equations invariant at 1e-8, 100 jet points",
        battery.len()
    );
}

// ---------------------------------------------------------------------------
// 3. Friction force — the twist K is admitted; with the spiral term the
//    plain time translation is refused, with a concrete witness.
// ---------------------------------------------------------------------------

#[test]
fn gate_03_friction_twist_passes_and_spiral_time_translation_fails() {
    let h1 = var("s");
    let h2 = Expr::one();
    let opts = symmetry_opts(100);

    let friction = system(Force::friction(&h1, &h2, Expr::one(), Expr::one()));
    let k = gen::k_twist(Expr::zero(), Expr::one(), Expr::one());
    let rep = check_symmetry(&k, &friction, &opts);
    assert!(
        rep.all_pass(),
        "K should be a symmetry of the friction force: {:?}",
        rep.checks.iter().filter(|c| !c.pass).collect::<Vec<_>>()
    );

    let spiral = system(Force::friction_spiral(
        &h1,
        &h2,
        Expr::zero(),
        Expr::one(),
        Expr::one(),
        Expr::one(),
        Expr::zero(),
    ));
    let rep = check_symmetry(&gen::p0(), &spiral, &opts);
    assert!(!rep.all_pass(), "P0 must fail once the spiral term enters");
    let witness = rep
        .checks
        .iter()
        .find(|c| !c.pass && c.witness.is_some())
        .expect("a failing equation must carry a witness point");
    println!(
        "PASS  friction: K admitted at 1e-8; P0 refused under the spiral term ({} — {})",
        witness.label,
        witness.witness.as_deref().unwrap()
    );
}

// ---------------------------------------------------------------------------
// 4. Adjoint actions — closed forms match the 24-term series at 1e-8 for
//    parameters ≤ 0.5 and slots through degree 6; cobords match the 2-term
//    series to machine precision.
// ---------------------------------------------------------------------------

#[test]
fn gate_04_closed_form_adjoints_match_the_series_and_cobords_are_exact() {
    let group: Vec<GroupElement> = vec![
        GroupElement::new(TableElem::P0, 0.5),
        GroupElement::new(TableElem::D, 0.5),
        GroupElement::new(TableElem::L, 0.5),
        GroupElement::new(TableElem::X(Expr::one() + tpow(3)), 0.5),
        GroupElement::new(TableElem::Y(tpow(2)), 0.5),
        GroupElement::new(TableElem::S(tpow(4)), 0.5),
    ];
    let mut targets = vec![TableElem::P0, TableElem::D, TableElem::L];
    for k in 0..=6 {
        targets.push(TableElem::X(tpow(k)));
        targets.push(TableElem::Y(tpow(k)));
        targets.push(TableElem::S(tpow(k)));
    }

    let mut pairs = 0usize;
    for g in &group {
        for lambda in &targets {
            let check = ad_check(g, lambda, 24, 1e-8).expect("catalogued pair");
            assert!(
                check.pass,
                "{} deviates from the series: max {:.3e} ({:?})",
                check.label, check.max_relative, check.witness
            );
            pairs += 1;
        }
    }

    // Cobord rows once more, at machine-precision tolerance: the wing/shift
    // exponentials act on P0, D, L through a series that terminates.
    let mut cobords = 0usize;
    for g in &group[3..] {
        for lambda in [TableElem::P0, TableElem::D, TableElem::L] {
            let check = ad_check(g, &lambda, 24, 1e-12).expect("catalogued pair");
            assert!(
                check.pass,
                "cobord {} is not exact: max {:.3e}",
                check.label, check.max_relative
            );
            cobords += 1;
        }
    }
    println!(
        "PASS  adjoint: {pairs} closed-form actions match the 24-term series at 1e-8 \
         (params ≤ 0.5, slots through t^6); {cobords} cobord rows exact at 1e-12"
    );
}

// ---------------------------------------------------------------------------
// 5. Subalgebra catalogue — every representative passes closure and ideal
//    checks over the parameter grid a ∈ {−1, 0.5, 1, 2}, b, c ∈ {0, 1}.
// ---------------------------------------------------------------------------

#[test]
fn gate_05_catalog_representatives_close_over_the_parameter_grid() {
    let grid = CatalogGrid::default();
    assert_eq!(grid.a, vec![-1.0, 0.5, 1.0, 2.0]);
    assert_eq!(grid.b, vec![0.0, 1.0]);
    assert_eq!(grid.c, vec![0.0, 1.0]);

    let opts = ZeroOpts {
        tol: 1e-9,
        ..Default::default()
    };
    let reports = verify_catalog(&grid, &opts);
    assert!(!reports.is_empty());
    for rep in &reports {
        assert!(
            rep.all_pass(),
            "{} fails: {:?}",
            rep.label,
            rep.failures()
        );
    }
    for family in ["point", "wing", "pressure"] {
        assert!(
            reports.iter().any(|r| r.family == family),
            "stratum `{family}` missing from the catalogue"
        );
    }
    println!(
        "PASS  catalogue: {} representatives close (span + ideal + normalizer) over the grid",
        reports.len()
    );
}

// ---------------------------------------------------------------------------
// 6. Normal form — 2t² + 6t³ reduces with m1 = 2; the conjugator roundtrip
//    reproduces the input span at 1e-9; reduction is idempotent on 20
//    random inputs.
// ---------------------------------------------------------------------------

#[test]
fn gate_06_normal_form_reduction_is_faithful_and_idempotent() {
    let f = poly_from_text("2t^2+6t^3").unwrap();
    let nf = normal_form_1d(&f, &[]).unwrap();
    assert_eq!(nf.branch, NormalBranch::X);
    assert_eq!(nf.m1, 2);
    assert!(!nf.conjugator.is_empty());

    let opts = ZeroOpts {
        tol: 1e-9,
        ..Default::default()
    };
    let round = roundtrip_check(&f, &[], &nf, &opts).unwrap();
    assert!(
        round.is_zero,
        "conjugator does not reproduce the span: {:?}",
        round.witness
    );

    let mut rng = ChaCha8Rng::seed_from_u64(0xacce97);
    for case in 0..20 {
        let deg = rng.gen_range(1..=5);
        let f: Vec<f64> = (0..=deg).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let g: Vec<f64> = match case % 3 {
            0 => vec![],
            1 => f.iter().map(|c| 0.5 * c).collect(),
            _ => (0..=rng.gen_range(0..=4))
                .map(|_| rng.gen_range(-2.0..2.0))
                .collect(),
        };
        let first = normal_form_1d(&f, &g).unwrap();
        let round = roundtrip_check(&f, &g, &first, &opts).unwrap();
        assert!(round.is_zero, "case {case}: roundtrip failed (f={f:?}, g={g:?})");
        let second = normal_form_1d(&first.f, &first.g).unwrap();
        assert_eq!(
            (first.branch, first.m1, first.m2, first.mu),
            (second.branch, second.m1, second.m2, second.mu),
            "case {case}: signature unstable"
        );
        assert!(
            second.is_identity_conjugator(),
            "case {case}: reduced form moved again"
        );
    }
    println!(
        "PASS  normal form: m1 = 2 with faithful conjugator at 1e-9; idempotent on 20 random inputs"
    );
}

// ---------------------------------------------------------------------------
// 7. Exact solutions — R10 and R17 certify below 1e-9 (incompressibility
//    1e-12) at 100 in-domain points under default parameters; R16 and RF9
//    certify in corrected form while their verbatim transcriptions are
//    flagged suspect and genuinely fail.
// ---------------------------------------------------------------------------

#[test]
fn gate_07_solution_families_certify_or_carry_the_suspect_flag() {
    const TOL: f64 = 1e-9;
    const TOL_DIV: f64 = 1e-12;

    for name in ["R10", "R17", "R16", "RF9"] {
        let fam = by_name(name).unwrap();
        assert!(!fam.suspect);
        let rep = certify(&fam, 100, 0xacce07, TOL, TOL_DIV).unwrap();
        assert_eq!(rep.evaluated, 100, "{name}: every sampled point must evaluate");
        assert!(
            rep.pass(),
            "{name}: residual maxima {:?} exceed ({TOL:.0e}, {TOL_DIV:.0e})",
            rep.max_abs
        );
    }

    for name in ["R16-printed", "R17-printed", "RF9-printed"] {
        let fam = by_name(name).unwrap();
        assert!(fam.suspect, "{name} must carry the transcription-suspect flag");
        assert!(
            !fam.notes.is_empty(),
            "{name} must document the suspected defect"
        );
        let rep = certify(&fam, 100, 0xacce07, TOL, TOL_DIV).unwrap();
        assert!(
            !rep.pass(),
            "{name} unexpectedly meets the gate — the flag would be unwarranted"
        );
    }
    println!(
        "PASS  solutions: R10, R16, R17, RF9 certify at 1e-9 / 1e-12 over 100 points; \
         all three verbatim transcriptions are flagged and fail"
    );
}

// ---------------------------------------------------------------------------
// 8. First integral — along the radial profile R = a1/ξ with equal angles
//    the reduced invariant stays constant to 1e-10 over ξ ∈ [0.5, 2].
// ---------------------------------------------------------------------------

#[test]
fn gate_08_first_integral_is_constant_along_the_radial_profile() {
    let r = parse("a1 / xi").unwrap();
    let t1 = parse("pi/4").unwrap();
    let t2 = parse("pi/4").unwrap();
    for a1 in [1.0, 1.7] {
        let mut env = Env::new();
        env.set_param("a1", a1);
        let rep = first_integral_check(&r, &t1, &t2, a1, &env, (0.5, 2.0), 100, 1e-10).unwrap();
        assert!(
            rep.constant,
            "a1 = {a1}: deviation {:.3e}, slope {:.3e}",
            rep.max_deviation, rep.max_slope
        );
    }
    println!(
        "PASS  first integral: ½ξR(1 + cos(2T₁ − 2T₂)) constant to 1e-10 over ξ ∈ [0.5, 2]"
    );
}

// ---------------------------------------------------------------------------
// 9. Flow-field reproduction — R17 CSVs at t ∈ {0.1, 1, 10} via the CLI;
//    at probe (1, 0) the tangential/radial ratio exceeds 10 at t = 0.1 and
//    drops below 0.1 at t = 10; the SVG renders.
// ---------------------------------------------------------------------------

fn probe_ratio(csv: &str) -> f64 {
    for line in csv.lines().skip(2) {
        let mut cells = line.split(',');
        let x: f64 = cells.next().unwrap().parse().unwrap();
        let y: f64 = cells.next().unwrap().parse().unwrap();
        if x == 1.0 && y == 0.0 {
            let u: f64 = cells.next().unwrap().parse().unwrap();
            let v: f64 = cells.next().unwrap().parse().unwrap();
            // At (1, 0) the radial direction is +x and the tangential +y.
            return v.abs() / u.abs();
        }
    }
    panic!("probe point (1, 0) missing from the grid");
}

#[test]
fn gate_09_flow_field_turns_from_tangential_to_radial() {
    let dir = tempfile::tempdir().unwrap();
    let mut ratios = Vec::new();
    for t in ["0.1", "1", "10"] {
        let csv_path = dir.path().join(format!("r17_{t}.csv"));
        let svg_path = dir.path().join(format!("r17_{t}.svg"));
        let output = Command::new(env!("CARGO_BIN_EXE_plastsym"))
            .args([
                "solution",
                "flowfield",
                "--family",
                "R17",
                "--t",
                t,
                "--grid",
                "-2:2:21",
                "--csv",
                csv_path.to_str().unwrap(),
                "--svg",
                svg_path.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert!(
            output.status.success(),
            "flowfield run failed: {}",
            String::from_utf8_lossy(&output.stderr)
        );
        let csv = std::fs::read_to_string(&csv_path).unwrap();
        assert!(csv.starts_with("# family=R17"), "missing provenance comment");
        ratios.push(probe_ratio(&csv));

        let svg = std::fs::read_to_string(&svg_path).unwrap();
        assert!(svg.starts_with("<svg"), "not an SVG document");
        assert!(svg.trim_end().ends_with("</svg>"), "unterminated SVG");
        assert!(svg.contains("<path"), "quiver arrows missing");
    }
    assert!(
        ratios[0] > 10.0,
        "t = 0.1 should be tangential-dominated, ratio {}",
        ratios[0]
    );
    assert!(
        ratios[2] < 0.1,
        "t = 10 should be radial-dominated, ratio {}",
        ratios[2]
    );
    println!(
        "PASS  flow field: |v_tan|/|v_rad| at (1,0) = {:.2} → {:.2} → {:.4} across t = 0.1, 1, 10; SVGs render",
        ratios[0], ratios[1], ratios[2]
    );
}

// ---------------------------------------------------------------------------
// 10. Determinism — identical seeds give byte-identical JSON reports.
// ---------------------------------------------------------------------------

#[test]
fn gate_10_reports_are_byte_identical_for_a_fixed_seed() {
    let run = |args: &[&str]| -> Vec<u8> {
        let output = Command::new(env!("CARGO_BIN_EXE_plastsym"))
            .args(args)
            .output()
            .unwrap();
        assert!(
            output.status.success(),
            "run failed: {}",
            String::from_utf8_lossy(&output.stderr)
        );
        output.stdout
    };

    let table = ["--json", "--seed", "123", "check-table", "--degree", "2"];
    assert_eq!(run(&table), run(&table), "check-table reports diverged");

    let residual = [
        "--json",
        "--seed",
        "123",
        "solution",
        "residual",
        "--family",
        "R17",
    ];
    assert_eq!(run(&residual), run(&residual), "residual reports diverged");

    let flow = [
        "--json",
        "--seed",
        "123",
        "solution",
        "flowfield",
        "--family",
        "R17",
        "--t",
        "0.1",
        "--grid",
        "-2:2:11",
    ];
    assert_eq!(run(&flow), run(&flow), "flow-field reports diverged");
    println!("PASS  determinism: three report kinds byte-identical across reruns at seed 123");
}

// ---------------------------------------------------------------------------
// Generator compatibility spot checks shared by several gates above: the
// non-zero forces reuse the same system builder, so a quick cross-check
// that the zero-force system really is the special case keeps the gates
// honest.
// ---------------------------------------------------------------------------

#[test]
fn zero_force_is_the_specialization_of_the_monogenic_family() {
    let zero = system(Force::zero());
    let mono = system(Force::monogenic(&Expr::zero()));
    let opts = symmetry_opts(16);
    for vf in [gen::p0(), gen::dil(), gen::rot()] {
        let a = check_symmetry(&vf, &zero, &opts);
        let b = check_symmetry(&vf, &mono, &opts);
        assert_eq!(a.all_pass(), b.all_pass());
    }
    let _ = num_f64(1.0);
}
