//! Acceptance checks. One line per criterion; exits nonzero when any fails.

mod common;

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use graspmap::cli::{synth_scene, SynthOptions, SynthShape};
use graspmap::geometry::{pixel_center, pixel_index, reproject, shapes, TriangleMesh, Vec3};
use graspmap::handkin::{
    builtin_chain, default_initial_pose, fingertip_jacobian, ik_objective, partition_regions, solve_ik,
    FingerRegionAssignment, HandConfiguration, IkParams, TargetMode, ThumbSide, DEFAULT_STANDOFF,
};
use graspmap::ingest::{filter_mask, init_confidence_map, MaskImage};
use graspmap::metrics::{coverage, evaluate, gsr, isr, EvalCriteria};
use graspmap::reward::{contact_reward, kappa, pose_reward, track_score, RewardConfig};
use graspmap::sgcr::{convexity_expand, cross_view_refine, run_sgcr, Provenance, ScoredCloud, SgcrConfig};
use rand::Rng;
use rayon::prelude::*;

use common::episodes;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn test_meshes() -> Vec<(&'static str, TriangleMesh)> {
    [SynthShape::Sphere, SynthShape::Cube, SynthShape::Torus, SynthShape::Dumbbell]
        .into_iter()
        .map(|s| (s.name(), s.mesh()))
        .collect()
}

fn convexity_oracle() -> Outcome {
    const PAIRS: usize = 5000;
    let mut summary = Vec::new();
    for (k, (name, mesh)) in test_meshes().into_iter().enumerate() {
        let pts = mesh.surface_sample(2 * PAIRS, 100 + k as u64).map_err(|e| e.to_string())?;
        let agree: usize = (0..PAIRS)
            .into_par_iter()
            .map(|i| {
                let (a, b) = (&pts[2 * i], &pts[2 * i + 1]);
                let fast = mesh.segment_inside(a, b, 16, 1e-3).unwrap();
                let slow = common::sweep_inside(&mesh, a, b, 1000, 1e-3);
                usize::from(fast == slow)
            })
            .sum();
        let rate = agree as f64 / PAIRS as f64;
        ensure(rate >= 0.99, || format!("{name}: agreement {:.2}%", 100.0 * rate))?;
        summary.push(format!("{name} {:.2}%", 100.0 * rate));
    }
    Ok(summary.join(", "))
}

fn convex_completeness() -> Outcome {
    let scene = synth_scene(&SynthOptions::default()).map_err(|e| e.to_string())?;
    let out = run_sgcr(&scene, 0, &SgcrConfig::default()).map_err(|e| e.to_string())?;
    let d = &out.diagnostics;
    ensure(d.lifted_points > 0, || "nothing lifted".into())?;
    ensure(d.off_surface_dropped == 0, || format!("{} points dropped off-surface", d.off_surface_dropped))?;
    ensure(d.expansion.rejected == 0, || format!("{} points rejected", d.expansion.rejected))?;
    ensure(out.map.len() == d.lifted_points, || {
        format!("kept {} of {}", out.map.len(), d.lifted_points)
    })?;
    Ok(format!("{} of {} points kept", out.map.len(), d.lifted_points))
}

fn pairwise_semantics() -> Outcome {
    use graspmap::geometry::shapes::dumbbell_params::*;
    let r = 0.03;
    let mesh = SynthShape::Dumbbell.mesh();
    // seed on the axis of the offset neck, one point in each lobe
    let seed = Vec3::new(0.0, NECK_OFFSET * r, 0.0);
    let q1 = Vec3::new(-LOBE_OFFSET * r, 0.0, 0.0);
    let q2 = Vec3::new(LOBE_OFFSET * r, 0.0, 0.0);
    let mut cloud = ScoredCloud::default();
    for (i, p) in [seed, q1, q2].into_iter().enumerate() {
        cloud.push(p, 1.0, Provenance { view_id: 0, row: 0, col: i });
    }
    let cfg = SgcrConfig::default();
    let exp = convexity_expand(&cloud, &[0], &mesh, 0, &cfg).map_err(|e| e.to_string())?;
    ensure(exp.kept == vec![0, 1, 2], || format!("kept {:?}", exp.kept))?;
    for &(c, s) in &exp.witnesses {
        let (a, b) = (cloud.points[c], cloud.points[s]);
        ensure(common::sweep_inside(&mesh, &a, &b, 1000, cfg.surface_tol), || {
            format!("witness pair ({c}, {s}) leaves the volume")
        })?;
    }
    ensure(!common::sweep_inside(&mesh, &q1, &q2, 1000, cfg.surface_tol), || {
        "lobe-to-lobe segment stays inside".into()
    })?;
    let exits = (1..1000)
        .map(|i| q1 + (q2 - q1) * (i as f64 / 1000.0))
        .filter(|p| common::winding_number(&mesh, p) < 0.5 && common::brute_distance(&mesh, p) > 1e-3)
        .count();
    ensure(exits > 0, || "independent check found no exit".into())?;
    Ok(format!("both lobe points accepted via the neck seed; their segment exits at {exits}/999 samples"))
}

fn refinement_fixture() -> Outcome {
    let (_, views) = common::two_view_sphere(64);
    let cbar = [0.6, 0.6];
    let filtered: Vec<MaskImage> = views
        .iter()
        .map(|v| {
            let d = v.depth().unwrap();
            filter_mask(&MaskImage::from_depth(d), d).unwrap()
        })
        .collect();
    let maps: Vec<_> = views
        .iter()
        .zip(&filtered)
        .zip(cbar)
        .map(|((v, m), c)| init_confidence_map(v.view_id, m, c))
        .collect();
    let cfg = SgcrConfig {
        alpha: 0.5,
        tau: 0.01,
        ..SgcrConfig::default()
    };
    let refined = cross_view_refine(&maps, &views, &filtered, &cbar, &cfg).map_err(|e| e.to_string())?;
    let pixel_for = |dir: Vec3| -> Result<(usize, usize), String> {
        let p = dir.normalize() * common::SPHERE_RADIUS;
        let (px, _) = reproject(&p, &views[0].camera).map_err(|e| e.to_string())?;
        pixel_index(&px, 64, 64).ok_or_else(|| "off image".to_string())
    };
    // analytic visibility of the back-projected point from each camera
    let seen_from = |col: usize, row: usize, eye: Vec3| -> bool {
        let (o, d, _) = views[0].camera.ray(&pixel_center(col, row));
        let t = common::ray_sphere(&o, &d, &Vec3::zeros(), common::SPHERE_RADIUS).unwrap();
        let x = o + d * t;
        (eye - x).dot(&x) > 0.0
    };
    let (vc, vr) = pixel_for(Vec3::new(1.0, 1.0, 0.2))?;
    ensure(seen_from(vc, vr, Vec3::new(0.0, 0.35, 0.0)), || "shared pixel not visible from view 1".into())?;
    let s0 = maps[0].get(vc, vr);
    let got = refined[0].get(vc, vr);
    ensure((got - (s0 + 0.30)).abs() <= 1e-9, || format!("shared pixel: {got} vs {}", s0 + 0.30))?;
    let (oc, or) = pixel_for(Vec3::new(1.0, -1.0, 0.2))?;
    ensure(!seen_from(oc, or, Vec3::new(0.0, 0.35, 0.0)), || "occluded pixel is visible from view 1".into())?;
    let s0o = maps[0].get(oc, or);
    let goto = refined[0].get(oc, or);
    ensure(goto == s0o, || format!("occluded pixel: {goto} vs {s0o}"))?;
    Ok(format!("shared {s0} -> {got}, occluded stays {goto}"))
}

fn jacobian_check() -> Outcome {
    let mut rng = common::rng(7);
    let mut worst: f64 = 0.0;
    for name in ["shadow", "allegro"] {
        let chain = builtin_chain(name).map_err(|e| e.to_string())?;
        for _ in 0..100 {
            let h = common::random_configuration(&chain, &mut rng);
            let analytic = fingertip_jacobian(&chain, &h).map_err(|e| e.to_string())?;
            let numeric = common::fd_jacobian(&chain, &h, 1e-6);
            worst = worst.max((analytic - numeric).abs().max());
        }
    }
    ensure(worst < 1e-5, || format!("max abs error {worst:e}"))?;
    Ok(format!("max abs error {worst:.2e}"))
}

fn ik_reach() -> Outcome {
    let chain = builtin_chain("planar").map_err(|e| e.to_string())?;
    let target = common::planar_tip(0.9, 1.1);
    // reachability by grid search over the closed-form tip
    let reachable = (0..=720).any(|i| {
        (0..=720).any(|j| {
            let q = |k: i32| -std::f64::consts::PI + k as f64 * std::f64::consts::PI / 360.0;
            (common::planar_tip(q(i), q(j)) - target).norm() < 5e-4
        })
    });
    ensure(reachable, || "target not reachable".into())?;
    let region = vec![target];
    let assignment = FingerRegionAssignment::shared(&chain, &region);
    let h0 = HandConfiguration::new(Vec3::zeros(), Vec3::zeros(), vec![0.3, 0.4]);
    let res = solve_ik(&chain, &h0, &assignment, &IkParams::default()).map_err(|e| e.to_string())?;
    let obj = ik_objective(&chain, &res.pose, &assignment).map_err(|e| e.to_string())?;
    let tip = graspmap::handkin::forward_kinematics(&chain, &res.pose).map_err(|e| e.to_string())?[0];
    let dist = (tip - target).norm();
    ensure(dist <= 1e-3 && obj < 1e-6, || format!("distance {dist:e}, objective {obj:e}"))?;

    let fixed = IkParams {
        eta: 0.5,
        targets: TargetMode::Fixed,
        ..IkParams::default()
    };
    let locked = IkParams {
        lock_wrist: true,
        ..fixed.clone()
    };
    let far = [Vec3::new(0.14, 0.0, 0.0)];
    let cases = [
        (&fixed, FingerRegionAssignment::shared(&chain, &region)),
        (&locked, FingerRegionAssignment::shared(&chain, &region)),
        (&locked, FingerRegionAssignment::shared(&chain, &far)),
    ];
    for (params, a) in &cases {
        let r = solve_ik(&chain, &h0, a, params).map_err(|e| e.to_string())?;
        if let Some(w) = r.trace.windows(2).find(|w| w[1] > w[0]) {
            return Err(format!("trace rises from {:e} to {:e}", w[0], w[1]));
        }
    }
    Ok(format!("tip within {dist:.1e} m, objective {obj:.1e}; fixed-target traces non-increasing"))
}

fn reward_constants() -> Outcome {
    let cfg = RewardConfig::default();
    let checks = [
        ("r_track(0,0,0)", track_score(&Vec3::zeros(), &Vec3::zeros(), &[0.0; 20], &cfg), 1.0),
        ("kappa(80)", kappa(80.0, &cfg), 0.15),
        ("kappa(500)", kappa(500.0, &cfg), 0.15),
        ("r_pose(0, 1)", pose_reward(0.0, 1.0, &cfg), 0.55),
        ("r_contact(1, 1)", contact_reward(true, 1.0, &cfg), 0.25),
    ];
    for (name, got, want) in checks {
        ensure(got == want, || format!("{name} = {got}, expected {want}"))?;
    }
    Ok("all exact".into())
}

fn metric_fixtures() -> Outcome {
    let logs = episodes::boundary_logs();
    let map = episodes::origin_map();
    let maps = vec![&map; logs.len()];
    let c = EvalCriteria::default();
    let report = evaluate(&logs, &maps, None, &c).map_err(|e| e.to_string())?;
    ensure(report.gsr == episodes::EXPECTED_GSR, || format!("GSR {}", report.gsr))?;
    ensure(report.isr == episodes::EXPECTED_ISR, || format!("ISR {}", report.isr))?;
    ensure(report.msad == Some(episodes::expected_msad()), || format!("mSAD {:?}", report.msad))?;
    ensure(report.sd == Some(episodes::expected_sd()), || format!("SD {:?}", report.sd))?;

    let mut rng = common::rng(11);
    for set in 0..1000 {
        let n = rng.gen_range(1..=8);
        let logs: Vec<_> = (0..n)
            .map(|i| {
                let dists: Vec<f64> = (0..episodes::STEPS).map(|_| rng.gen_range(0.0..0.08)).collect();
                let near_run = rng.gen_range(0..=episodes::STEPS);
                let dists: Vec<f64> = dists
                    .iter()
                    .enumerate()
                    .map(|(t, &d)| if t < near_run { d * 0.5 } else { d })
                    .collect();
                let contacts = episodes::contacts_at(&[rng.gen_range(0.0..0.08)]);
                episodes::log(&format!("r{set}_{i}"), &dists, [0.0, 0.0], contacts)
            })
            .collect();
        let maps = vec![&map; logs.len()];
        let g = gsr(&logs, &c).map_err(|e| e.to_string())?;
        let i = isr(&logs, &maps, &c).map_err(|e| e.to_string())?;
        ensure(i <= g, || format!("set {set}: ISR {i} > GSR {g}"))?;
    }
    Ok(format!(
        "GSR {}, ISR {}, mSAD {:.4}, SD {:.4}; ISR <= GSR on 1000 random sets",
        report.gsr,
        report.isr,
        report.msad.unwrap(),
        report.sd.unwrap()
    ))
}

fn coverage_check() -> Outcome {
    let r = common::SPHERE_RADIUS;
    let mesh = common::sphere_mesh();
    let dirs: Vec<Vec3> = mesh.vertices().iter().take(640).map(|v| v.normalize()).collect();
    // alternate inward/outward; the first half of every group of four is 1 mm off
    let offset = |k: usize| {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let mag = if k % 4 < 2 { 0.001 } else { 0.010 };
        sign * mag
    };
    let mixed: Vec<Vec3> = dirs.iter().enumerate().map(|(k, d)| d * (r + offset(k))).collect();
    let far: Vec<Vec3> = mixed.iter().enumerate().filter(|(k, _)| k % 4 >= 2).map(|(_, p)| *p).collect();
    let near: Vec<Vec3> = mixed.iter().enumerate().filter(|(k, _)| k % 4 < 2).map(|(_, p)| *p).collect();
    let three_of_eight: Vec<Vec3> = near[..3].iter().chain(&far[..5]).copied().collect();
    let cov = |pts: &[Vec3], tau: f64| coverage(pts, &mesh, tau).map_err(|e| e.to_string());
    let checks = [
        ("mixed @5mm", cov(&mixed, 0.005)?, 50.0),
        ("mixed @2mm", cov(&mixed, 0.002)?, 50.0),
        ("r±10mm @2mm", cov(&far, 0.002)?, 0.0),
        ("r±10mm @5mm", cov(&far, 0.005)?, 0.0),
        ("r±1mm @2mm", cov(&near, 0.002)?, 100.0),
        ("3 near + 5 far @5mm", cov(&three_of_eight, 0.005)?, 37.5),
    ];
    for (name, got, want) in checks {
        ensure(got == want, || format!("{name}: {got}% expected {want}%"))?;
    }
    Ok("50 / 50 / 0 / 0 / 100 / 37.5 percent exact".into())
}

fn graspmap(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_graspmap"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!("{args:?} failed: {}", String::from_utf8_lossy(&out.stderr))
    })
}

fn output_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let bundle = tmp.path().join("bundle");
    let (a, b) = (tmp.path().join("run_a"), tmp.path().join("run_b"));
    let s = |p: &Path| p.to_str().unwrap().to_owned();
    graspmap(&["synth", "--shape", "sphere", "--out", &s(&bundle)])?;
    graspmap(&["run", "--bundle", &s(&bundle), "--out", &s(&a)])?;
    graspmap(&["run", "--bundle", &s(&bundle), "--out", &s(&b)])?;
    let (fa, fb) = (output_files(&a), output_files(&b));
    let docs: Vec<&String> = fa
        .iter()
        .map(|(n, _)| n)
        .filter(|n| n.starts_with("contact_map_") || n.starts_with("pseudo_pose_"))
        .collect();
    ensure(docs.len() >= 4, || format!("only {} output documents", docs.len()))?;
    ensure(fa == fb, || "outputs differ between runs".into())?;
    Ok(format!("{} files byte-identical", fa.len()))
}

fn ik_timing() -> Outcome {
    let chain = builtin_chain("shadow").map_err(|e| e.to_string())?;
    let mesh = shapes::icosphere(0.05, 3);
    let points = mesh.surface_sample(5000, 3).map_err(|e| e.to_string())?;
    let assignment = partition_regions(&points, &chain, ThumbSide::Positive).map_err(|e| e.to_string())?;
    let h0 = default_initial_pose(&chain, &points, Some(&mesh), DEFAULT_STANDOFF).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let res = solve_ik(&chain, &h0, &assignment, &IkParams::default()).map_err(|e| e.to_string())?;
    let took = start.elapsed();
    ensure(res.trace.len() == 13, || format!("trace length {}", res.trace.len()))?;
    ensure(took < Duration::from_secs(1), || format!("took {took:?}"))?;
    Ok(format!("5000 points, 12 iterations in {:.1} ms", took.as_secs_f64() * 1e3))
}

fn main() -> ExitCode {
    let criteria: [(&str, u64, fn() -> Outcome); 11] = [
        ("convexity oracle equivalence", 60, convexity_oracle),
        ("convex completeness", 10, convex_completeness),
        ("pairwise-seed semantics", 60, pairwise_semantics),
        ("cross-view refinement fixture", 5, refinement_fixture),
        ("jacobian correctness", 30, jacobian_check),
        ("ik reach", 5, ik_reach),
        ("reward constants", 1, reward_constants),
        ("metric fixtures", 30, metric_fixtures),
        ("coverage analytic check", 5, coverage_check),
        ("end-to-end determinism", 60, determinism),
        ("ik timing", 1, ik_timing),
    ];
    let mut failed = 0;
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        let outcome = outcome.and_then(|msg| {
            if secs < *budget as f64 {
                Ok(msg)
            } else {
                Err(format!("{msg}; over the {budget} s budget"))
            }
        });
        match outcome {
            Ok(msg) => println!("PASS {:>2} {name} ({secs:.2} s): {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({secs:.2} s): {msg}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
