use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Arg, ArgMatches, Command};
use geojson::JsonObject;

use massfit::error::{Error, Result, Stage};
use massfit::geometry::{Polygon2, TriMesh};
use massfit::metrics::write_stats_csv;
use massfit::pipeline::io::{footprints_geojson, load_inputs, write_mesh_obj, write_model_obj, MATERIALS_MTL};
use massfit::pipeline::{export_outputs, run_pipeline, synth_generate, OutputLock, PipelineConfig, Roof, SceneSpec};

const GRID_HEADER: &str = "alpha,beta,gamma,footprints,sweep_edges,variables,time_sec,error_m2";

fn config_args(cmd: Command) -> Command {
    let cmd = cmd.arg(
        Arg::new("config")
            .long("config")
            .value_name("FILE")
            .help("key = value config file; flags below override it"),
    );
    PipelineConfig::KEYS.iter().fold(cmd, |cmd, &key| {
        let dashed = key.replace('_', "-");
        let mut arg = Arg::new(key)
            .long(dashed.clone())
            .value_name("VALUE")
            .help(PipelineConfig::describe(key))
            .help_heading("Pipeline");
        if dashed != key {
            arg = arg.alias(key);
        }
        cmd.arg(arg)
    })
}

fn input_args(cmd: Command) -> Command {
    cmd.arg(Arg::new("mesh").long("mesh").value_name("OBJ").help("Input mesh"))
        .arg(Arg::new("gis").long("gis").value_name("GEOJSON").help("Input footprints"))
        .arg(
            Arg::new("scene")
                .long("scene")
                .value_name("PRESET|FILE")
                .conflicts_with_all(["mesh", "gis"])
                .help(format!(
                    "Generate the input instead: one of {} or a scene file",
                    SceneSpec::PRESETS.join(", ")
                )),
        )
        .arg(noise_arg("sigma", "Override scene vertex noise (m)"))
        .arg(noise_arg("dropout", "Override scene triangle dropout fraction"))
}

fn noise_arg(id: &'static str, help: &'static str) -> Arg {
    Arg::new(id)
        .long(id)
        .value_name("VALUE")
        .value_parser(clap::value_parser!(f64))
        .help(help)
}

fn cli() -> Command {
    Command::new("massfit")
        .about("Watertight building mass models from noisy meshes and GIS footprints")
        .version(env!("CARGO_PKG_VERSION"))
        .subcommand_required(true)
        .arg_required_else_help(true)
        .after_help("MASSFIT_THREADS caps the worker count. Exit codes: 0 ok, 1 input error, 2 stage failure.")
        .subcommand(config_args(input_args(
            Command::new("reconstruct")
                .about("Run the full pipeline and write models, footprints, stats and error grid")
                .arg(Arg::new("out").long("out").value_name("DIR").required(true)),
        )))
        .subcommand(
            Command::new("synth")
                .about("Generate a synthetic scene with known ground truth")
                .arg(
                    Arg::new("scene")
                        .long("scene")
                        .value_name("PRESET|FILE")
                        .required(true)
                        .help(format!("One of {} or a scene file", SceneSpec::PRESETS.join(", "))),
                )
                .arg(
                    Arg::new("seed")
                        .long("seed")
                        .value_name("N")
                        .default_value("0")
                        .value_parser(clap::value_parser!(u64)),
                )
                .arg(noise_arg("sigma", "Vertex noise (m)"))
                .arg(noise_arg("dropout", "Triangle dropout fraction"))
                .arg(Arg::new("out").long("out").value_name("DIR").required(true)),
        )
        .subcommand(config_args(input_args(
            Command::new("stats").about("Run the pipeline and print one stats CSV row"),
        )))
        .subcommand(config_args(input_args(
            Command::new("sweep-params")
                .about("Run a grid over alpha/beta/gamma and print a CSV table")
                .arg(list_arg("alphas"))
                .arg(list_arg("betas"))
                .arg(list_arg("gammas"))
                .arg(Arg::new("out").long("out").value_name("FILE").help("Write the table here instead of stdout")),
        )))
}

fn list_arg(id: &'static str) -> Arg {
    Arg::new(id)
        .long(id)
        .value_name("LIST")
        .value_delimiter(',')
        .value_parser(clap::value_parser!(f64))
        .help("Comma separated values; defaults to the configured one")
}

fn build_config(m: &ArgMatches) -> Result<PipelineConfig> {
    let mut cfg = match m.get_one::<String>("config") {
        Some(p) => PipelineConfig::load(Path::new(p))?,
        None => PipelineConfig::default(),
    };
    for &key in PipelineConfig::KEYS {
        if let Some(v) = m.get_one::<String>(key) {
            cfg.set(key, v)?;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn scene_spec(arg: &str, m: &ArgMatches) -> Result<SceneSpec> {
    let mut spec = match SceneSpec::preset(arg) {
        Some(s) => s,
        None if Path::new(arg).is_file() => SceneSpec::parse(&fs::read_to_string(arg)?)?,
        None => {
            return Err(Error::InvalidInput(format!(
                "`{arg}` is neither a preset ({}) nor a scene file",
                SceneSpec::PRESETS.join(", ")
            )))
        }
    };
    if let Some(&s) = m.get_one::<f64>("sigma") {
        spec.sigma = s;
    }
    if let Some(&d) = m.get_one::<f64>("dropout") {
        spec.dropout = d;
    }
    spec.validate()?;
    Ok(spec)
}

/// Mesh and footprints from files, or from a synthetic scene seeded by the
/// config seed.
fn inputs(m: &ArgMatches, cfg: &PipelineConfig) -> Result<(TriMesh, Vec<Polygon2>)> {
    if let Some(scene) = m.get_one::<String>("scene") {
        let truth = synth_generate(&scene_spec(scene, m)?, cfg.seed)?;
        return Ok((truth.mesh, truth.spec.gis));
    }
    match (m.get_one::<String>("mesh"), m.get_one::<String>("gis")) {
        (Some(mesh), Some(gis)) => load_inputs(Path::new(mesh), Path::new(gis)),
        _ => Err(Error::InvalidInput("need --mesh and --gis, or --scene".into())),
    }
}

fn reconstruct(m: &ArgMatches) -> Result<()> {
    let cfg = build_config(m).map_err(|e| e.at(Stage::Load))?;
    let out = PathBuf::from(m.get_one::<String>("out").unwrap());
    let _lock = OutputLock::acquire(&out).map_err(|e| e.at(Stage::Load))?;
    let (mesh, gis) = inputs(m, &cfg).map_err(|e| e.at(Stage::Load))?;
    let result = run_pipeline(&mesh, &gis, &cfg)?;
    let written = export_outputs(&result, &out).map_err(|e| e.at(Stage::Export))?;
    let s = &result.stats;
    eprintln!(
        "{}: {} footprints, {} sweep edges, {} variables, mse {:.4} m², {:.2} s",
        s.name,
        result.footprints.len(),
        s.sweep_edges,
        s.variables,
        s.error_m2,
        result.elapsed.as_secs_f64()
    );
    for p in written {
        println!("{}", p.display());
    }
    Ok(())
}

fn roof_name(r: Roof) -> String {
    match r {
        Roof::Flat => "flat".into(),
        Roof::Hip { pitch } => format!("hip {pitch}"),
        Roof::Gable { pitch } => format!("gable {pitch}"),
        Roof::Mansard { lower, upper } => format!("mansard {lower} {upper}"),
    }
}

fn synth(m: &ArgMatches) -> Result<()> {
    let seed = *m.get_one::<u64>("seed").unwrap();
    let spec = scene_spec(m.get_one::<String>("scene").unwrap(), m).map_err(|e| e.at(Stage::Load))?;
    let out = PathBuf::from(m.get_one::<String>("out").unwrap());
    let _lock = OutputLock::acquire(&out).map_err(|e| e.at(Stage::Load))?;
    let truth = synth_generate(&spec, seed)?;

    let file = |name: &str| -> Result<BufWriter<fs::File>> { Ok(BufWriter::new(fs::File::create(out.join(name))?)) };
    let mut w = file("mesh.obj")?;
    write_mesh_obj(&mut w, &truth.mesh)?;
    w.flush()?;
    file("materials.mtl")?.write_all(MATERIALS_MTL.as_bytes())?;
    let mut w = file("truth.obj")?;
    write_model_obj(&mut w, &truth.clean, Some("materials.mtl"))?;
    w.flush()?;
    let gis = footprints_geojson(&spec.gis, |_| JsonObject::new());
    file("gis.geojson")?.write_all(gis.as_bytes())?;
    let masses = footprints_geojson(&truth.footprints, |i| {
        let mut o = JsonObject::new();
        o.insert("mass".into(), i.into());
        o.insert("wall".into(), spec.masses[i].wall.into());
        o.insert("roof".into(), roof_name(spec.masses[i].roof).into());
        o
    });
    file("truth.geojson")?.write_all(masses.as_bytes())?;
    eprintln!(
        "{}: {} masses, {} triangles, seed {seed}",
        spec.name,
        spec.masses.len(),
        truth.mesh.triangles.len()
    );
    Ok(())
}

fn stats(m: &ArgMatches) -> Result<()> {
    let cfg = build_config(m).map_err(|e| e.at(Stage::Load))?;
    let (mesh, gis) = inputs(m, &cfg).map_err(|e| e.at(Stage::Load))?;
    let result = run_pipeline(&mesh, &gis, &cfg)?;
    let mut out = io::stdout().lock();
    write_stats_csv(&mut out, std::slice::from_ref(&result.stats))?;
    Ok(())
}

fn sweep_params(m: &ArgMatches) -> Result<()> {
    let base = build_config(m).map_err(|e| e.at(Stage::Load))?;
    let (mesh, gis) = inputs(m, &base).map_err(|e| e.at(Stage::Load))?;
    let list = |id: &str, default: f64| -> Vec<f64> {
        m.get_many::<f64>(id).map(|v| v.copied().collect()).unwrap_or_else(|| vec![default])
    };
    let (alphas, betas, gammas) = (list("alphas", base.alpha), list("betas", base.beta), list("gammas", base.gamma));

    let mut table = vec![GRID_HEADER.to_string()];
    for &gamma in &gammas {
        for &alpha in &alphas {
            for &beta in &betas {
                let cfg = PipelineConfig { alpha, beta, gamma, ..base.clone() };
                cfg.validate().map_err(|e| e.at(Stage::Load))?;
                // A grid point that fails (typically no sweep edges at a
                // large gamma) still gets a row, with empty measurements.
                match run_pipeline(&mesh, &gis, &cfg) {
                    Ok(r) => table.push(format!(
                        "{alpha},{beta},{gamma},{},{},{},{:.6},{:.6}",
                        r.footprints.len(),
                        r.stats.sweep_edges,
                        r.stats.variables,
                        r.stats.time_sec,
                        r.stats.error_m2
                    )),
                    Err(e) => {
                        eprintln!("alpha={alpha} beta={beta} gamma={gamma}: {e}");
                        table.push(format!("{alpha},{beta},{gamma},0,,,,"));
                    }
                }
            }
        }
    }
    let text = table.join("\n") + "\n";
    match m.get_one::<String>("out") {
        Some(p) => fs::write(p, text)?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn set_threads() -> Result<()> {
    let Ok(v) = std::env::var("MASSFIT_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::InvalidInput(format!("MASSFIT_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))
}

fn main() -> ExitCode {
    let matches = match cli().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let run = || -> Result<()> {
        set_threads()?;
        match matches.subcommand() {
            Some(("reconstruct", m)) => reconstruct(m),
            Some(("synth", m)) => synth(m),
            Some(("stats", m)) => stats(m),
            Some(("sweep-params", m)) => sweep_params(m),
            _ => unreachable!("subcommand is required"),
        }
    };
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("massfit: {e}");
            ExitCode::from(if e.is_input_error() { 1 } else { 2 })
        }
    }
}
