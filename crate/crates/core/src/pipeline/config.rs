//! Flat `key = value` configuration. Every field of [`PipelineConfig`] is a
//! key; `#` starts a comment; unknown keys are an error.

use std::fmt::Write as _;
use std::time::Duration;

use crate::error::{Error, Result};
use crate::footprint::{EnergyParams, SolveMode};
use crate::fracture::FractureParams;
use crate::profile::{ProfileParams, Quality};
use crate::sweep::SweepParams;

trait ConfigValue: Sized {
    fn parse(s: &str) -> std::result::Result<Self, String>;
    fn render(&self) -> String;
}

macro_rules! from_str_value {
    ($($t:ty),*) => {$(
        impl ConfigValue for $t {
            fn parse(s: &str) -> std::result::Result<Self, String> {
                s.parse().map_err(|e| format!("{e}"))
            }
            fn render(&self) -> String {
                self.to_string()
            }
        }
    )*};
}
from_str_value!(f64, usize, u64, bool, String, Quality);

impl ConfigValue for SolveMode {
    fn parse(s: &str) -> std::result::Result<Self, String> {
        match s {
            "exact" => Ok(SolveMode::Exact),
            "bnb" | "branch_and_bound" => Ok(SolveMode::BranchAndBound),
            _ => Err(format!("unknown solver `{s}` (exact, bnb)")),
        }
    }
    fn render(&self) -> String {
        match self {
            SolveMode::Exact => "exact".into(),
            SolveMode::BranchAndBound => "bnb".into(),
        }
    }
}

macro_rules! config {
    ($( $(#[doc = $doc:literal])* $key:ident : $ty:ty = $default:expr ),* $(,)?) => {
        /// All pipeline knobs. Lengths in meters, areas in m², angles in
        /// degrees.
        #[derive(Debug, Clone, PartialEq)]
        pub struct PipelineConfig {
            $( $(#[doc = $doc])* pub $key: $ty, )*
        }

        impl Default for PipelineConfig {
            fn default() -> Self {
                PipelineConfig { $( $key: $default, )* }
            }
        }

        impl PipelineConfig {
            pub const KEYS: &'static [&'static str] = &[$( stringify!($key) ),*];

            /// One-line description of `key`, for CLI help.
            pub fn describe(key: &str) -> &'static str {
                match key {
                    $( stringify!($key) => concat!($($doc),*).trim_ascii(), )*
                    _ => "",
                }
            }

            pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
                let value = value.trim();
                match key {
                    $( stringify!($key) => {
                        self.$key = ConfigValue::parse(value)
                            .map_err(|e| Error::Parse(format!("{key} = {value}: {e}")))?;
                    } )*
                    _ => return Err(Error::Parse(format!("unknown config key `{key}`"))),
                }
                Ok(())
            }

            pub fn get(&self, key: &str) -> Option<String> {
                match key {
                    $( stringify!($key) => Some(self.$key.render()), )*
                    _ => None,
                }
            }
        }
    };
}

config! {
    /// Run name used in the stats table.
    name: String = "block".into(),
    /// Vertical spacing of the horizontal slices.
    interval: f64 = 0.2,
    /// Minimum supported wall area for a sweep edge.
    gamma: f64 = 10.0,
    /// Cost per meter of an unselected sweep edge.
    alpha: f64 = 40.0,
    /// Cost per meter of a selected non-sweep edge.
    beta: f64 = 60.0,
    /// Selected edges closer than this are penalized as a pair.
    pair_dist: f64 = 2.0,
    /// Selected edges meeting at less than this angle are penalized.
    pair_angle: f64 = 30.0,
    /// Label limit; 0 picks min(kept cells, footprints + 2).
    max_labels: usize = 0,
    /// Profile simplification: simple, moderate or high.
    quality: Quality = Quality::High,
    /// Footprint solver: exact or bnb.
    solver: SolveMode = SolveMode::BranchAndBound,
    /// Solver time budget in seconds.
    budget_sec: f64 = 30.0,
    /// Refuse integer programs with more variables than this.
    max_variables: usize = 200_000,
    /// Error-grid cell size.
    cell: f64 = 0.25,
    /// Contours within this angle of a GIS edge snap to it.
    theta_snap: f64 = 10.0,
    /// Contours within this distance of a GIS edge snap to it.
    d_snap: f64 = 1.0,
    /// Angular tolerance when clustering contours.
    theta_tol: f64 = 15.0,
    /// Offset tolerance when clustering contours.
    d_tol: f64 = 0.5,
    /// Douglas-Peucker tolerance for slice contours.
    contour_simplify: f64 = 0.15,
    /// Contour pieces shorter than this are ignored.
    min_contour_length: f64 = 0.3,
    /// Sweep edges are clipped to the footprint bounds grown by this.
    clip_margin: f64 = 2.0,
    /// Margin added around the footprints for the fracture box.
    bbox_margin: f64 = 5.0,
    /// Sweep lines closer than this are merged.
    dup_distance: f64 = 0.05,
    /// Sweep lines more parallel than this are merged.
    dup_angle: f64 = 0.5,
    /// Whether line extensions past a sweep edge count as sweep.
    continuations_count_as_sweep: bool = true,
    /// Cells within this distance of a footprint are kept.
    d_gis: f64 = 2.0,
    /// Cells with a higher mean mesh height are kept.
    h_min: f64 = 1.0,
    /// Distance between profile stations along an edge.
    profile_spacing: f64 = 1.0,
    /// Extrusion height limit above the highest mesh point.
    cap_margin: f64 = 0.5,
    /// Seed for sampled checks and synthetic scenes.
    seed: u64 = 0,
    /// Record solver time; false writes 0 for reproducible outputs.
    timing: bool = true,
}

impl PipelineConfig {
    pub fn parse(text: &str) -> Result<PipelineConfig> {
        let mut cfg = PipelineConfig::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", n + 1)))?;
            cfg.set(k.trim(), v)
                .map_err(|e| Error::Parse(format!("line {}: {e}", n + 1)))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<PipelineConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn serialize(&self) -> String {
        let mut s = String::new();
        for k in Self::KEYS {
            let _ = writeln!(s, "{k} = {}", self.get(k).unwrap_or_default());
        }
        s
    }

    pub fn validate(&self) -> Result<()> {
        // The name lands unquoted in the stats CSV and the config file.
        if self.name.is_empty()
            || self.name.trim() != self.name
            || self.name.contains(|c: char| c == ',' || c == '#' || c == '"' || c.is_control())
        {
            return Err(Error::InvalidInput(format!("name `{}` must be non-empty, trimmed, without , # \" or control characters", self.name.escape_default())));
        }
        let positive = [
            ("interval", self.interval),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("pair_dist", self.pair_dist),
            ("budget_sec", self.budget_sec),
            ("cell", self.cell),
            ("theta_tol", self.theta_tol),
            ("d_tol", self.d_tol),
            ("profile_spacing", self.profile_spacing),
        ];
        for (k, v) in positive {
            if !(v > 0.0) {
                return Err(Error::InvalidInput(format!("{k} must be positive, got {v}")));
            }
        }
        let non_negative = [
            ("gamma", self.gamma),
            ("theta_snap", self.theta_snap),
            ("d_snap", self.d_snap),
            ("contour_simplify", self.contour_simplify),
            ("min_contour_length", self.min_contour_length),
            ("clip_margin", self.clip_margin),
            ("bbox_margin", self.bbox_margin),
            ("dup_distance", self.dup_distance),
            ("dup_angle", self.dup_angle),
            ("d_gis", self.d_gis),
            ("h_min", self.h_min),
            ("cap_margin", self.cap_margin),
        ];
        for (k, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("{k} must be non-negative, got {v}")));
            }
        }
        if self.max_variables == 0 {
            return Err(Error::InvalidInput("max_variables must be positive".into()));
        }
        self.energy_params().validate()
    }

    pub fn sweep_params(&self) -> SweepParams {
        SweepParams {
            interval: self.interval,
            theta_snap: self.theta_snap.to_radians(),
            d_snap: self.d_snap,
            theta_tol: self.theta_tol.to_radians(),
            d_tol: self.d_tol,
            gamma: self.gamma,
            contour_simplify: self.contour_simplify,
            min_contour_length: self.min_contour_length,
            clip_margin: self.clip_margin,
        }
    }

    pub fn fracture_params(&self) -> FractureParams {
        FractureParams {
            bbox_margin: self.bbox_margin,
            dup_distance: self.dup_distance,
            dup_angle: self.dup_angle.to_radians(),
            continuations_count_as_sweep: self.continuations_count_as_sweep,
            d_gis: self.d_gis,
            h_min: self.h_min,
            ..FractureParams::default()
        }
    }

    pub fn energy_params(&self) -> EnergyParams {
        EnergyParams {
            alpha: self.alpha,
            beta: self.beta,
            pair_dist: self.pair_dist,
            pair_angle: self.pair_angle,
            max_labels: (self.max_labels > 0).then_some(self.max_labels),
        }
    }

    pub fn profile_params(&self) -> ProfileParams {
        ProfileParams {
            spacing: self.profile_spacing,
            quality: self.quality,
            ..ProfileParams::default()
        }
    }

    pub fn budget(&self) -> Duration {
        Duration::try_from_secs_f64(self.budget_sec).unwrap_or(Duration::MAX)
    }
}
