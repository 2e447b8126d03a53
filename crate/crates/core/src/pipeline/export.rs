use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use geojson::JsonObject;

use super::io::{footprints_geojson, write_model_obj, MATERIALS_MTL};
use super::PipelineOutput;
use crate::error::{Error, Result};
use crate::metrics::write_stats_csv;

pub const PROFILES_HEADER: &str = "footprint,edge,ax,ay,bx,by,quality,point,offset,height";
const LOCK_NAME: &str = ".massfit.lock";

/// Exclusive claim on an output directory, released on drop.
#[derive(Debug)]
pub struct OutputLock {
    path: PathBuf,
}

impl OutputLock {
    pub fn acquire(dir: &Path) -> Result<OutputLock> {
        fs::create_dir_all(dir)?;
        let path = dir.join(LOCK_NAME);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                writeln!(f, "{}", std::process::id())?;
                Ok(OutputLock { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                Err(Error::Locked(path.display().to_string()))
            }
            Err(e) => Err(e.into()),
        }
    }
}

impl Drop for OutputLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

fn create(dir: &Path, name: &str, written: &mut Vec<PathBuf>) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    let f = File::create(&path)?;
    written.push(path);
    Ok(BufWriter::new(f))
}

/// Writes per-model and combined OBJ files, footprints, stats, the error
/// grid and the fitted profiles into `dir`. Returns the paths written.
pub fn export_outputs(out: &PipelineOutput, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    create(dir, "materials.mtl", &mut written)?.write_all(MATERIALS_MTL.as_bytes())?;
    for (i, m) in out.models.iter().enumerate() {
        let mut w = create(dir, &format!("model_{i:03}.obj"), &mut written)?;
        write_model_obj(&mut w, m, Some("materials.mtl"))?;
        w.flush()?;
    }
    let mut w = create(dir, "block.obj", &mut written)?;
    write_model_obj(&mut w, &out.block(), Some("materials.mtl"))?;
    w.flush()?;

    let polys: Vec<_> = out.footprints.iter().map(|f| f.polygon.clone()).collect();
    let text = footprints_geojson(&polys, |i| {
        let mut o = JsonObject::new();
        o.insert("model".into(), i.into());
        o.insert("label".into(), out.footprints[i].label.into());
        o.insert("area_m2".into(), polys[i].area().into());
        o
    });
    create(dir, "footprints.geojson", &mut written)?.write_all(text.as_bytes())?;

    let mut w = create(dir, "stats.csv", &mut written)?;
    write_stats_csv(&mut w, std::slice::from_ref(&out.stats))?;
    w.flush()?;

    let mut w = create(dir, "error_grid.csv", &mut written)?;
    out.grid.write_csv(&mut w)?;
    w.flush()?;
    let mut w = create(dir, "error_grid.pgm", &mut written)?;
    out.grid.write_pgm(&mut w)?;
    w.flush()?;

    let mut w = create(dir, "profiles.csv", &mut written)?;
    writeln!(w, "{PROFILES_HEADER}")?;
    for (f, (fp, profiles)) in out.footprints.iter().zip(&out.profiles).enumerate() {
        for (e, ((_, _, a, b), p)) in fp.polygon.edges().zip(profiles).enumerate() {
            for (k, q) in p.points().iter().enumerate() {
                writeln!(w, "{f},{e},{},{},{},{},{},{k},{},{}", a.x, a.y, b.x, b.y, p.quality, q.x, q.y)?;
            }
        }
    }
    w.flush()?;

    create(dir, "config.txt", &mut written)?.write_all(out.config.serialize().as_bytes())?;
    Ok(written)
}
