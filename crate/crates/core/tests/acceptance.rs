//! Acceptance criteria, one line each. Runs as a plain binary so the lines
//! show up in `cargo test` output; exits non-zero if any criterion fails.

mod common;

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{exhaustive_minimum, random_arrangement, write_scene};
use massfit::extrusion::{check_closed_manifold, extrude_footprint, extrude_robust, ExtrudeOutcome, MassModel};
use massfit::footprint::{build_bip, evaluate_energy, solve, EnergyModel, EnergyParams, SolveMode};
use massfit::geometry::{Point2, Point3, Polygon2};
use massfit::metrics::{raindrop_check, segmentation_iou};
use massfit::pipeline::{run_pipeline, synth_generate, PipelineConfig, PipelineOutput, SceneSpec};
use massfit::profile::Profile;

type Verdict = Result<String, String>;

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn near(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn bip_oracle() -> Verdict {
    let p = EnergyParams::default();
    let mut solver_time = Duration::ZERO;
    let mut worst = 0.0f64;
    let mut largest = 0;
    for seed in 0..50 {
        let (arr, gis) = random_arrangement(seed);
        let labels = p.label_count(arr.kept_count(), gis);
        largest = largest.max(arr.kept_count());
        let oracle = exhaustive_minimum(&arr, &p, labels);
        let t = Instant::now();
        let bip = build_bip(EnergyModel::new(&arr, &p, labels), usize::MAX).map_err(|e| e.to_string())?;
        let exact = solve(&bip, SolveMode::Exact, Duration::from_secs(10)).map_err(|e| e.to_string())?;
        let bnb = solve(&bip, SolveMode::BranchAndBound, Duration::from_secs(10)).map_err(|e| e.to_string())?;
        solver_time += t.elapsed();
        for (name, s) in [("exact", &exact), ("bnb", &bnb)] {
            worst = worst.max((s.energy - oracle).abs());
            if !s.optimal || !near(s.energy, oracle, 1e-9) {
                return Err(format!("seed {seed}: {name} {} vs exhaustive {oracle}", s.energy));
            }
        }
    }
    check(
        solver_time < Duration::from_secs(10),
        format!("50 instances (up to {largest} cells), max |Δ| {worst:.1e}, solvers {solver_time:.2?}"),
    )
}

fn has_vertex(m: &MassModel, p: Point3) -> bool {
    m.mesh.vertices.iter().any(|v| (v - p).norm() <= 1e-6)
}

fn apex_and_ridge() -> Verdict {
    let slope = |n| vec![Profile::pitched(45.0, 10.0); n];
    let square = Polygon2::rect(Point2::new(0.0, 0.0), Point2::new(1.0, 1.0));
    let rect = Polygon2::rect(Point2::new(0.0, 0.0), Point2::new(2.0, 1.0));
    let a = extrude_footprint(0, &square, &slope(4), f64::INFINITY).map_err(|e| e.to_string())?;
    let r = extrude_footprint(0, &rect, &slope(4), f64::INFINITY).map_err(|e| e.to_string())?;
    let apex = has_vertex(&a, Point3::new(0.5, 0.5, 0.5));
    let top = a.mesh.vertices.iter().map(|v| v.z).fold(f64::MIN, f64::max);
    let ridge = has_vertex(&r, Point3::new(0.5, 0.5, 0.5)) && has_vertex(&r, Point3::new(1.5, 0.5, 0.5));
    check(
        apex && ridge && (top - 0.5).abs() <= 1e-6,
        format!("apex found {apex}, top z {top:.9}, ridge endpoints found {ridge}"),
    )
}

fn random_footprint(rng: &mut ChaCha8Rng) -> Polygon2 {
    match rng.gen_range(0..3) {
        0 => Polygon2::rect(
            Point2::new(0.0, 0.0),
            Point2::new(rng.gen_range(2.0..15.0), rng.gen_range(2.0..15.0)),
        ),
        1 => {
            let (w, h) = (rng.gen_range(6.0..15.0), rng.gen_range(6.0..15.0));
            let (cx, cy) = (rng.gen_range(2.0..w - 2.0), rng.gen_range(2.0..h - 2.0));
            let pts = [(0.0, 0.0), (w, 0.0), (w, cy), (cx, cy), (cx, h), (0.0, h)];
            Polygon2::new(pts.iter().map(|&(x, y)| Point2::new(x, y)).collect(), vec![]).unwrap()
        }
        _ => {
            // Jittered even angles keep every gap under pi, so the ring is
            // star-shaped about the origin and simple.
            let k = rng.gen_range(5..10);
            let step = std::f64::consts::TAU / k as f64;
            let angles: Vec<f64> = (0..k).map(|i| (i as f64 + rng.gen_range(0.0..0.6)) * step).collect();
            let pts = angles
                .iter()
                .map(|&a| {
                    let r = rng.gen_range(3.0..8.0);
                    Point2::new(r * a.cos(), r * a.sin())
                })
                .collect();
            Polygon2::new(pts, vec![]).unwrap()
        }
    }
}

fn random_profile(rng: &mut ChaCha8Rng) -> Profile {
    match rng.gen_range(0..4) {
        0 => Profile::vertical(rng.gen_range(2.0..8.0)),
        1 => Profile::pitched(rng.gen_range(20.0..70.0), 10.0),
        2 => Profile::wall_then_pitch(rng.gen_range(2.0..6.0), rng.gen_range(15.0..60.0), 10.0),
        _ => {
            let wall = rng.gen_range(2.0..5.0);
            let lower = rng.gen_range(1.0..2.0);
            Profile::new(
                vec![
                    Point2::origin(),
                    Point2::new(0.0, wall),
                    Point2::new(0.5, wall + lower),
                    Point2::new(8.0, wall + lower + 2.0),
                ],
                massfit::profile::Quality::High,
            )
            .unwrap()
        }
    }
}

/// Extruded models for the closure and drainage criteria: random
/// footprints with random profiles, plus every preset reconstruction.
fn model_corpus(runs: &[PipelineOutput]) -> Result<Vec<(String, MassModel, ExtrudeOutcome)>, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut out = Vec::new();
    for i in 0..200 {
        let fp = random_footprint(&mut rng);
        let uniform = rng.gen_bool(0.3);
        let first = random_profile(&mut rng);
        let profiles: Vec<Profile> = (0..fp.edge_count())
            .map(|_| if uniform { first.clone() } else { random_profile(&mut rng) })
            .collect();
        let cap = if rng.gen_bool(0.5) { f64::INFINITY } else { rng.gen_range(3.0..9.0) };
        let (m, o) = extrude_robust(i, &fp, &profiles, cap).map_err(|e| format!("random {i}: {e}"))?;
        out.push((format!("random {i}"), m, o));
    }
    for r in runs {
        for (k, (m, o)) in r.models.iter().zip(&r.outcomes).enumerate() {
            out.push((format!("{} model {k}", r.config.name), m.clone(), *o));
        }
    }
    Ok(out)
}

fn watertight(corpus: &[(String, MassModel, ExtrudeOutcome)]) -> Verdict {
    let bad: Vec<String> = corpus
        .iter()
        .filter_map(|(n, m, _)| check_closed_manifold(&m.mesh).err().map(|e| format!("{n}: {e}")))
        .collect();
    let fallback = corpus.iter().filter(|c| c.2 != ExtrudeOutcome::Clean).count();
    check(
        bad.is_empty(),
        format!(
            "{}/{} closed 2-manifold ({fallback} via nudge/prism fallback){}",
            corpus.len() - bad.len(),
            corpus.len(),
            bad.first().map(|b| format!("; first failure {b}")).unwrap_or_default()
        ),
    )
}

fn raindrops(corpus: &[(String, MassModel, ExtrudeOutcome)]) -> Verdict {
    let skeleton: Vec<_> = corpus.iter().filter(|c| c.2 != ExtrudeOutcome::Prism).collect();
    let bad: Vec<String> = skeleton
        .iter()
        .enumerate()
        .filter_map(|(i, (n, m, _))| {
            raindrop_check(m, 100, i as u64).failure.map(|p| format!("{n} stuck from ({:.3},{:.3},{:.3})", p.x, p.y, p.z))
        })
        .collect();
    check(
        bad.is_empty(),
        format!(
            "{}/{} skeleton models drain (n=100){}",
            skeleton.len() - bad.len(),
            skeleton.len(),
            bad.first().map(|b| format!("; {b}")).unwrap_or_default()
        ),
    )
}

fn scene_run(spec: SceneSpec, seed: u64, cfg: PipelineConfig) -> Result<(massfit::pipeline::SceneTruth, PipelineOutput), String> {
    let truth = synth_generate(&spec, seed).map_err(|e| e.to_string())?;
    let out = run_pipeline(&truth.mesh, &truth.spec.gis, &cfg).map_err(|e| e.to_string())?;
    Ok((truth, out))
}

fn named(name: &str) -> PipelineConfig {
    PipelineConfig { name: name.into(), ..PipelineConfig::default() }
}

fn box_and_terrace(box_run: &(massfit::pipeline::SceneTruth, PipelineOutput), terrace: &PipelineOutput) -> Verdict {
    let (truth, out) = box_run;
    let pred: Vec<Polygon2> = out.footprints.iter().map(|f| f.polygon.clone()).collect();
    let iou = segmentation_iou(&pred, &truth.footprints).mean_iou;
    let mse = out.stats.error_m2;
    let box_ok = out.footprints.len() == 1 && iou >= 0.95 && mse <= 0.05;

    // The party wall is the boundary the two terrace footprints share.
    let shared: Vec<Point2> = match terrace.footprints.as_slice() {
        [a, b] => a
            .polygon
            .outer
            .iter()
            .copied()
            .filter(|&p| b.polygon.boundary_distance(p) < 1e-6)
            .collect(),
        _ => vec![],
    };
    let wall_err = shared.iter().map(|p| (p.x - 6.0).abs()).fold(0.0, f64::max);
    let terrace_ok = terrace.footprints.len() == 2 && shared.len() >= 2 && wall_err <= 0.3;
    check(
        box_ok && terrace_ok,
        format!(
            "box: {} footprint, IoU {iou:.4}, MSE {mse:.4} m²; terrace: {} footprints, party wall off by {wall_err:.3} m",
            out.footprints.len(),
            terrace.footprints.len()
        ),
    )
}

fn alpha_beta(mesh: &massfit::geometry::TriMesh, gis: &[Polygon2], truth_count: usize) -> Verdict {
    let mut counts = Vec::new();
    for (alpha, beta) in [(90.0, 10.0), (40.0, 60.0), (10.0, 90.0)] {
        let cfg = PipelineConfig { alpha, beta, ..named("terrace") };
        counts.push(run_pipeline(mesh, gis, &cfg).map_err(|e| e.to_string())?.footprints.len());
    }
    check(
        counts[0] >= counts[1] && counts[1] >= counts[2] && counts[1] == truth_count,
        format!("counts (90,10) {} ≥ (40,60) {} ≥ (10,90) {}; truth {truth_count}", counts[0], counts[1], counts[2]),
    )
}

/// Best of `reps` timings of building and solving the program.
fn optimization_time(out: &PipelineOutput, gis: usize, cfg: &PipelineConfig, reps: usize) -> Duration {
    let ep = cfg.energy_params();
    let labels = ep.label_count(out.arrangement.kept_count(), gis);
    (0..reps)
        .map(|_| {
            let t = Instant::now();
            let bip = build_bip(EnergyModel::new(&out.arrangement, &ep, labels), cfg.max_variables).unwrap();
            std::hint::black_box(solve(&bip, cfg.solver, cfg.budget()).unwrap());
            t.elapsed()
        })
        .min()
        .unwrap()
}

fn gamma_sweep() -> Verdict {
    let truth = synth_generate(&SceneSpec::block(), 7).map_err(|e| e.to_string())?;
    let mut runs = Vec::new();
    for gamma in [50.0, 30.0, 10.0] {
        let cfg = PipelineConfig { gamma, ..named("block") };
        let out = run_pipeline(&truth.mesh, &truth.spec.gis, &cfg).map_err(|e| format!("gamma {gamma}: {e}"))?;
        let t = optimization_time(&out, truth.spec.gis.len(), &cfg, 200);
        runs.push((gamma, out, t));
    }
    let nested = runs.windows(2).all(|w| {
        w[0].1.sweep_edges.iter().all(|e| w[1].1.sweep_edges.contains(e))
    });
    let mse_ok = runs.windows(2).all(|w| w[1].1.stats.error_m2 <= w[0].1.stats.error_m2);
    let time_ok = runs.windows(2).all(|w| w[1].2 >= w[0].2);
    let detail = runs
        .iter()
        .map(|(g, o, t)| format!("γ{g}: {} sweeps, MSE {:.4}, opt {:.1?}", o.sweep_edges.len(), o.stats.error_m2, t))
        .collect::<Vec<_>>()
        .join("; ");
    check(nested && mse_ok && time_ok, format!("nested {nested}, mse {mse_ok}, time {time_ok}: {detail}"))
}

fn bip_matches_energy() -> Verdict {
    let p = EnergyParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for k in 0..200 {
        let (arr, gis) = random_arrangement(1000 + k);
        let labels = p.label_count(arr.kept_count(), gis);
        let bip = build_bip(EnergyModel::new(&arr, &p, labels), usize::MAX).map_err(|e| e.to_string())?;
        let assignment: Vec<usize> = (0..arr.kept_count()).map(|_| rng.gen_range(0..labels)).collect();
        let x = bip.encode(&assignment);
        if !bip.is_feasible(&x) {
            return Err(format!("labeling {k}: encoding infeasible"));
        }
        let lab = bip.model.to_labeling(&arr, &assignment);
        let direct = evaluate_energy(&arr, &lab, &p, labels).map_err(|e| e.to_string())?.total;
        let diff = (bip.objective_value(&x) - direct).abs();
        worst = worst.max(diff);
    }
    check(worst <= 1e-9, format!("200 labelings, max |objective − energy| {worst:.1e}"))
}

fn massfit() -> Command {
    Command::new(env!("CARGO_BIN_EXE_massfit"))
}

fn reconstruct(dir: &Path, out: &str, extra: &[&str]) -> Result<Duration, String> {
    let t = Instant::now();
    let st = massfit()
        .arg("reconstruct")
        .arg("--mesh")
        .arg(dir.join("mesh.obj"))
        .arg("--gis")
        .arg(dir.join("gis.geojson"))
        .arg("--out")
        .arg(dir.join(out))
        .args(extra)
        .output()
        .map_err(|e| e.to_string())?;
    if !st.status.success() {
        return Err(format!("exit {:?}: {}", st.status.code(), String::from_utf8_lossy(&st.stderr)));
    }
    Ok(t.elapsed())
}

fn house_runtime(dir: &Path) -> Verdict {
    let t = reconstruct(dir, "timed", &[])?;
    check(t <= Duration::from_secs(5), format!("massfit reconstruct on a single house took {t:.2?}"))
}

fn csv_and_obj(dir: &Path) -> Result<Vec<String>, String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .map_err(|e| format!("{}: {e}", dir.display()))?
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".csv") || n.ends_with(".obj"))
        .collect();
    names.sort();
    Ok(names)
}

// Each output set is produced twice, once per thread count, and every
// CSV/OBJ file is compared byte for byte.
fn deterministic(dir: &Path) -> Verdict {
    let mut jobs: Vec<(String, Vec<String>)> = vec![(
        "house".into(),
        ["reconstruct", "--mesh", "mesh.obj", "--gis", "gis.geojson"].map(String::from).to_vec(),
    )];
    for name in SceneSpec::PRESETS {
        jobs.push((format!("{name}_synth"), ["synth", "--scene", name, "--seed", "7"].map(String::from).to_vec()));
        jobs.push((format!("{name}_run"), ["reconstruct", "--scene", name, "--seed", "7"].map(String::from).to_vec()));
    }
    let (mut compared, mut differing) = (0, Vec::new());
    for (job, args) in &jobs {
        for (run, threads) in [("a", "1"), ("b", "4")] {
            let out = dir.join(format!("det_{run}")).join(job);
            let mut cmd = massfit();
            cmd.current_dir(dir).args(args).arg("--out").arg(&out).env("MASSFIT_THREADS", threads);
            if args[0] == "reconstruct" {
                cmd.args(["--timing", "false"]);
            }
            let st = cmd.output().map_err(|e| e.to_string())?;
            if !st.status.success() {
                return Err(format!("{job}: exit {:?}: {}", st.status.code(), String::from_utf8_lossy(&st.stderr)));
            }
        }
        let (a, b) = (dir.join("det_a").join(job), dir.join("det_b").join(job));
        let names = csv_and_obj(&a)?;
        if names != csv_and_obj(&b)? {
            differing.push(format!("{job}: file lists"));
        }
        for n in names {
            compared += 1;
            if fs::read(a.join(&n)).ok() != fs::read(b.join(&n)).ok() {
                differing.push(format!("{job}/{n}"));
            }
        }
    }
    check(
        differing.is_empty() && compared > 0,
        format!("{compared} CSV/OBJ files from {} jobs compared across 1 and 4 threads, {} differ {:?}", jobs.len(), differing.len(), differing),
    )
}

fn main() {
    let tmp = tempfile::tempdir().expect("temp dir");
    let house = synth_generate(&SceneSpec::house(), 3).expect("house scene");
    write_scene(&house, tmp.path());

    let box_run = scene_run(SceneSpec::box_scene(), 7, named("box"));
    let terrace_run = scene_run(SceneSpec::terrace(), 7, named("terrace"));
    let preset_runs: Vec<PipelineOutput> = SceneSpec::PRESETS
        .iter()
        .filter_map(|&name| scene_run(SceneSpec::preset(name).unwrap(), 7, named(name)).ok().map(|r| r.1))
        .collect();
    let corpus = model_corpus(&preset_runs);

    let results: Vec<(&str, Verdict)> = vec![
        ("1 solver matches exhaustive minimum", bip_oracle()),
        ("2 pyramid apex and hip ridge", apex_and_ridge()),
        ("3 extruded models watertight", corpus.as_ref().map_err(|e| e.clone()).and_then(|c| watertight(c))),
        ("4 raindrop drainage", corpus.as_ref().map_err(|e| e.clone()).and_then(|c| raindrops(c))),
        (
            "5 box and terrace recovery",
            match (&box_run, &terrace_run) {
                (Ok(b), Ok(t)) => box_and_terrace(b, &t.1),
                (Err(e), _) | (_, Err(e)) => Err(e.clone()),
            },
        ),
        (
            "6 alpha/beta footprint counts",
            match &terrace_run {
                Ok((truth, _)) => alpha_beta(&truth.mesh, &truth.spec.gis, truth.spec.masses.len()),
                Err(e) => Err(e.clone()),
            },
        ),
        ("7 gamma nesting, error and runtime", gamma_sweep()),
        ("8 program objective equals energy", bip_matches_energy()),
        ("9 single house under 5 s", house_runtime(tmp.path())),
        ("10 byte-identical reruns", deterministic(tmp.path())),
    ];

    let mut failed = 0;
    for (name, v) in &results {
        match v {
            Ok(d) => println!("PASS  {name}: {d}"),
            Err(d) => {
                failed += 1;
                println!("FAIL  {name}: {d}");
            }
        }
    }
    println!("{} of {} criteria pass", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
