//! The acceptance criteria, one line each. Runs as a plain binary so the
//! lines show up in `cargo test` output; exits nonzero if any fails.

use std::time::{Duration, Instant};

use funtf_cli::{cmd_connect, cmd_connect_nod, cmd_experiment_fullspark, RunConfig};
use funtf_core::eigensteps::{
    boundary_exit, is_interior, of_frame, sample_interior, EigenstepsTable,
};
use funtf_core::frames::{is_od, naimark_complement, od_perturb, spark};
use funtf_core::lifting::{lift_path, synthesize};
use funtf_core::motions::{
    align_for_morph, canonical_simplex, frame_operator_drift, simplex_onb_morph_path, spin,
    two_onb_swap_frames, two_onb_swap_path, SubframeSelector,
};
use funtf_core::numerics::{max_abs, CMat, Field, Matrix, PlaneRotation, UnitaryGeodesic};
use funtf_core::random::{haar_unitary, random_base, random_funtf, random_od_funtf};
use funtf_core::Frame;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    ok: bool,
    detail: String,
}

fn verdict(ok: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        ok,
        detail: detail.into(),
    }
}

fn fields() -> [Field; 2] {
    [Field::Real, Field::Complex]
}

fn block_defect(frame: &Frame, cols: std::ops::Range<usize>) -> f64 {
    let b = frame
        .select(&cols.collect::<Vec<_>>())
        .expect("columns in range");
    let k = b.len();
    max_abs(&(b.gram() - CMat::identity(k, k)))
}

/// OD fixtures of the requested shapes, cycling through block splits.
fn od_fixture(n: usize, d: usize, field: Field, rng: &mut ChaCha8Rng) -> Frame {
    let dims: Vec<usize> = match (n, d) {
        (4, 2) | (6, 2) => vec![1, 1],
        (6, 3) => vec![2, 1],
        (8, 4) if rng.random_bool(0.5) => vec![2, 2],
        (8, 4) => vec![3, 1],
        _ => unreachable!("no OD fixture for ({n}, {d})"),
    };
    random_od_funtf(n, d, &dims, field, rng).expect("fixture shapes are valid")
}

fn round_trip() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let (mut worst_table, mut worst_norm) = (0.0f64, 0.0f64);
    for (n, d) in [(4, 2), (5, 2), (5, 3), (6, 3), (8, 3), (8, 5)] {
        for k in 0..100 {
            let table = sample_interior(n, d, &mut rng).unwrap();
            let field = fields()[k % 2];
            let base = random_base(&table, field, &mut rng).unwrap();
            let frame = synthesize(&table, &base).unwrap();
            worst_table = worst_table.max(of_frame(&frame).max_deviation(&table));
            for c in frame.columns() {
                worst_norm = worst_norm.max((c.norm() - 1.0).abs());
            }
        }
    }
    let elapsed = start.elapsed();
    verdict(
        worst_table <= 1e-7 && worst_norm <= 1e-8 && elapsed < Duration::from_secs(30),
        format!("table dev {worst_table:.2e} (<= 1e-7), norm dev {worst_norm:.2e} (<= 1e-8), {elapsed:.1?} (< 30 s)"),
    )
}

fn lift_validity() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let (mut worst_res, mut worst_dev, mut boundary, mut errors) = (0.0f64, 0.0f64, 0, Vec::new());
    for (n, d) in [(5, 2), (6, 3)] {
        for k in 0..20 {
            let field = fields()[k % 2];
            let frame = random_funtf(n, d, field, &mut rng).unwrap();
            let lambda = of_frame(&frame);
            let target: EigenstepsTable = match k % 3 {
                0 => sample_interior(n, d, &mut rng).unwrap(),
                1 => boundary_exit(&lambda, &sample_interior(n, d, &mut rng).unwrap()).unwrap(),
                _ if n == 6 => of_frame(&od_fixture(n, d, field, &mut rng)),
                _ => boundary_exit(&sample_interior(n, d, &mut rng).unwrap(), &lambda).unwrap(),
            };
            if !is_interior(&target, 1e-9).unwrap() {
                boundary += 1;
            }
            match lift_path(&frame, &target, 64) {
                Ok(path) => {
                    worst_res = worst_res.max(path.max_funtf_residual());
                    worst_dev =
                        worst_dev.max(path.max_eigensteps_deviation().unwrap_or(f64::INFINITY));
                }
                Err(e) => errors.push(format!("({n},{d}) #{k}: {e}")),
            }
        }
    }
    verdict(
        errors.is_empty() && worst_res <= 1e-7 && worst_dev < 1e-7,
        format!(
            "40 lifts ({boundary} boundary targets): residual {worst_res:.2e} (<= 1e-7), eigensteps dev {worst_dev:.2e} (< 1e-7), errors {errors:?}"
        ),
    )
}

fn complex_connect() -> Verdict {
    let start = Instant::now();
    let config = RunConfig {
        tol: 1e-7,
        ..RunConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let (mut passed, mut worst_res, mut worst_end) = (0, 0.0f64, 0.0f64);
    let mut failures = Vec::new();
    for (n, d) in [(5, 2), (6, 3)] {
        for k in 0..20 {
            let f = random_funtf(n, d, Field::Complex, &mut rng).unwrap();
            let g = random_funtf(n, d, Field::Complex, &mut rng).unwrap();
            match cmd_connect(&f, &g, &config) {
                Ok((_, report)) => {
                    worst_res = worst_res.max(report.max_funtf_residual);
                    worst_end = worst_end.max(report.start_deviation.max(report.end_deviation));
                    if report.pass && report.end_deviation <= 1e-6 && report.start_deviation <= 1e-6
                    {
                        passed += 1;
                    } else {
                        failures.push(format!("({n},{d}) #{k}"));
                    }
                }
                Err(e) => failures.push(format!("({n},{d}) #{k}: {e}")),
            }
        }
    }
    let elapsed = start.elapsed();
    verdict(
        passed == 40 && elapsed < Duration::from_secs(60),
        format!(
            "{passed}/40 pass, residual {worst_res:.2e} (<= 1e-7), endpoint dev {worst_end:.2e} (<= 1e-6), {elapsed:.1?} (< 60 s) {failures:?}"
        ),
    )
}

fn nod_connect() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let config = RunConfig {
        tol: 1e-7,
        ..RunConfig::default()
    };
    let (mut min_margin, mut passed) = (f64::INFINITY, 0);
    let mut failures = Vec::new();
    for k in 0..10 {
        let f = random_funtf(6, 3, Field::Complex, &mut rng).unwrap();
        let g = random_funtf(6, 3, Field::Complex, &mut rng).unwrap();
        match cmd_connect_nod(&f, &g, &config) {
            Ok((path, report, _)) => {
                min_margin = min_margin.min(report.min_od_margin);
                if report.pass && path.end().max_column_distance(&g) <= 1e-6 {
                    passed += 1;
                }
            }
            Err(e) => failures.push(format!("#{k}: {e}")),
        }
    }
    verdict(
        passed == 10 && min_margin > 0.0,
        format!("{passed}/10 pass, min od_margin {min_margin:.3e} (> 0) {failures:?}"),
    )
}

fn two_onb_target() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut worst = 0.0f64;
    for (n, d) in [(4, 2), (6, 3)] {
        let rows = (0..=n)
            .map(|k| {
                (0..d)
                    .map(|i| match k <= d {
                        true => f64::from(u8::from(i < k)),
                        false if i < k - d => 2.0,
                        false => 1.0,
                    })
                    .collect()
            })
            .collect();
        let target = EigenstepsTable::new(n, d, rows).unwrap();
        for field in fields() {
            let frame = random_funtf(n, d, field, &mut rng).unwrap();
            let end = lift_path(&frame, &target, 64).unwrap().end().clone();
            worst = worst
                .max(block_defect(&end, 0..d))
                .max(block_defect(&end, d..n));
        }
    }
    verdict(
        worst <= 1e-6,
        format!("block ||B*B - I||_max {worst:.2e} (<= 1e-6)"),
    )
}

fn two_basis_swap() -> Verdict {
    let s = two_onb_swap_frames(3, None).unwrap();
    let (du, dv) = (s.u.unitarity_defect(), s.v.unitarity_defect());
    let (det_u, det_v) = (s.u.determinant().re, s.v.determinant().re);
    let path = two_onb_swap_path(3, None, 256).unwrap();
    let start = path.start().max_column_distance(&s.f_star);
    let end = path.end().max_column_distance(&s.g_star);
    let (margin, res) = (path.min_od_margin(), path.max_funtf_residual());
    let ok = du <= 1e-12
        && dv <= 1e-12
        && (det_u - 1.0).abs() <= 1e-9
        && (det_v - 1.0).abs() <= 1e-9
        && s.xi == [-1.0]
        && !is_od(&s.f_star)
        && start <= 1e-6
        && end <= 1e-6
        && margin > 0.0
        && res <= 1e-7;
    verdict(
        ok,
        format!(
            "unitarity {du:.1e}/{dv:.1e}, det {det_u:.12}/{det_v:.12}, xi {:?}, F* NOD {}, {} samples: start {start:.1e} end {end:.1e} (<= 1e-6), min od_margin {margin:.3e}, residual {res:.1e} (<= 1e-7)",
            s.xi,
            !is_od(&s.f_star),
            path.len()
        ),
    )
}

fn morph() -> Verdict {
    let (h, xi) = canonical_simplex(3).unwrap();
    let hp = align_for_morph(&xi, &h, &h, &xi).unwrap();
    let path = simplex_onb_morph_path(&xi, &h, &hp, &xi, 64).unwrap();
    let funtf = path.samples().iter().all(|s| s.frame.check_funtf(1e-8).ok);
    let end = path.end();
    let onb = block_defect(end, 0..3).max(block_defect(end, 3..6));
    let margin = path.min_od_margin();
    verdict(
        funtf && onb <= 1e-8 && margin > 0.0,
        format!("{} samples FUNTF at 1e-8: {funtf}, ONB defect at t=1 {onb:.1e} (<= 1e-8), min od_margin {margin:.3e} (> 0)", path.len()),
    )
}

fn naimark() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let shapes = [
        (3, 2),
        (4, 2),
        (5, 2),
        (4, 3),
        (5, 3),
        (6, 3),
        (7, 3),
        (6, 4),
        (8, 3),
        (8, 5),
    ];
    let (mut spread, mut od_agree, mut spark_agree, mut cases) = (0.0f64, 0, 0, 0);
    let check = |f: &Frame| -> (f64, bool, Option<bool>) {
        let g = naimark_complement(f).unwrap();
        let norms: Vec<f64> = g.columns().iter().map(|c| c.norm()).collect();
        let hi = norms.iter().cloned().fold(f64::MIN, f64::max);
        let lo = norms.iter().cloned().fold(f64::MAX, f64::min);
        let fs = spark(f, 1e-8).unwrap().full_spark == spark(&g, 1e-8).unwrap().full_spark;
        (hi - lo, is_od(f) == is_od(&g), Some(fs))
    };
    for k in 0..200 {
        let (n, d) = shapes[k % shapes.len()];
        let f = random_funtf(n, d, fields()[k % 2], &mut rng).unwrap();
        let (s, od, fs) = check(&f);
        spread = spread.max(s);
        od_agree += usize::from(od);
        if k < 100 {
            spark_agree += usize::from(fs == Some(true));
        }
        cases += 1;
    }
    let od_shapes = [(4, 2), (6, 2), (6, 3), (8, 4)];
    let mut od_total = 0;
    for k in 0..20 {
        let (n, d) = od_shapes[k % od_shapes.len()];
        let f = od_fixture(n, d, fields()[k % 2], &mut rng);
        let (s, od, _) = check(&f);
        spread = spread.max(s);
        od_total += usize::from(od);
    }
    verdict(
        spread <= 1e-8 && od_agree == cases && od_total == 20 && spark_agree == 100,
        format!(
            "norm spread {spread:.1e} (<= 1e-8), OD agree {od_agree}/200 random + {od_total}/20 OD, full spark agree {spark_agree}/100"
        ),
    )
}

fn boundary_od() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let shapes = [(4, 2), (6, 3), (8, 4)];
    let mut boundary = 0;
    for k in 0..50 {
        let (n, d) = shapes[k % 3];
        let f = od_fixture(n, d, fields()[k % 2], &mut rng);
        if !is_interior(&of_frame(&f), 1e-9).unwrap() {
            boundary += 1;
        }
    }
    verdict(
        boundary == 50,
        format!("{boundary}/50 OD frames on the boundary"),
    )
}

fn full_spark() -> Verdict {
    let start = Instant::now();
    let mut parts = Vec::new();
    let mut ok = true;
    for field in fields() {
        let config = RunConfig {
            seed: 1,
            field,
            ..RunConfig::default()
        };
        let s = cmd_experiment_fullspark(6, 3, 1000, &config).unwrap();
        ok &= s.ratio == 1.0;
        parts.push(format!("{field} ratio {}", s.ratio));
    }
    let elapsed = start.elapsed();
    verdict(
        ok && elapsed < Duration::from_secs(120),
        format!("{}, {elapsed:.1?} (< 120 s)", parts.join(", ")),
    )
}

fn od_density() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1111);
    let shapes = [(4, 2), (6, 2), (6, 3), (8, 4)];
    let mut good = 0;
    let mut worst_ratio = 0.0f64;
    for k in 0..20 {
        let (n, d) = shapes[k % shapes.len()];
        let f = od_fixture(n, d, fields()[k % 2], &mut rng);
        let mut all = true;
        for delta in [1e-2, 1e-3] {
            let g = od_perturb(&f, delta, &mut rng).unwrap();
            let dist = max_abs(&(g.data() - f.data()));
            worst_ratio = worst_ratio.max(dist / delta);
            all &= !is_od(&g) && g.check_funtf(1e-8).ok && dist <= 10.0 * delta;
        }
        good += usize::from(all);
    }
    verdict(
        good == 20,
        format!("{good}/20 fixtures NOD FUNTF after perturbing, worst distance {worst_ratio:.2} delta (<= 10 delta)"),
    )
}

fn spinning() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1212);
    let mut worst = 0.0f64;
    let mut errors = Vec::new();
    for k in 0..100 {
        let field = fields()[k % 2];
        let d = 2 + k % 3;
        let onb = haar_unitary(field, d, &mut rng);
        let rest = random_funtf(d + 2 + k % 2, d, field, &mut rng).unwrap();
        let mut data = CMat::zeros(d, d + rest.len());
        data.columns_mut(0, d).copy_from(onb.data());
        data.columns_mut(d, rest.len()).copy_from(rest.data());
        let frame = Frame::new(field, data).unwrap();
        let result = if k % 2 == 0 {
            // whole basis along a geodesic to a random unitary
            let mut u = haar_unitary(field, d, &mut rng);
            if field.is_real() && u.determinant().re < 0.0 {
                let mut m = u.into_data();
                m.column_mut(0).neg_mut();
                u = Matrix::new(field, m).unwrap();
            }
            let geo = UnitaryGeodesic::new(&Matrix::identity(field, d), &u).unwrap();
            spin(
                &frame,
                &SubframeSelector::new((0..d).collect()),
                &|t| geo.at(t).into_data(),
                32,
            )
        } else {
            // an orthonormal pair turned in its plane, with a phase when complex
            let (a, b) = (frame.column(0), frame.column(1));
            let mut rot = PlaneRotation::in_plane(a, b, rng.random_range(-3.0..3.0));
            if !field.is_real() {
                rot.phase = rng.random_range(-3.0..3.0);
            }
            spin(
                &frame,
                &SubframeSelector::new(vec![0, 1]),
                &|t| rot.matrix(t),
                32,
            )
        };
        match result {
            Ok(path) => worst = worst.max(frame_operator_drift(&path)),
            Err(e) => errors.push(format!("#{k}: {e}")),
        }
    }
    verdict(
        errors.is_empty() && worst <= 1e-8,
        format!("100 spins, frame operator drift {worst:.2e} (<= 1e-8) {errors:?}"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 12] = [
        ("eigensteps round trip", round_trip),
        ("lift validity", lift_validity),
        ("complex connectivity", complex_connect),
        ("NOD connectivity", nod_connect),
        ("two-ONB target", two_onb_target),
        ("two-basis swap artifacts", two_basis_swap),
        ("simplex to two-ONB morph", morph),
        ("Naimark properties", naimark),
        ("OD frames on the boundary", boundary_od),
        ("generic full spark", full_spark),
        ("OD density", od_density),
        ("spinning conservation", spinning),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let v = run();
        println!(
            "criterion {:>2} {} {name}: {}",
            k + 1,
            if v.ok { "PASS" } else { "FAIL" },
            v.detail
        );
        failed += usize::from(!v.ok);
    }
    println!("acceptance: {}/12 passed", 12 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
