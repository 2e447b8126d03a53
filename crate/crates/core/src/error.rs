use std::fmt;

use crate::geometry::Point2;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Pipeline stage names used to tag propagated errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Load,
    Sweep,
    Fracture,
    Classify,
    Solve,
    Footprints,
    Profiles,
    Extrude,
    Metrics,
    Export,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::Load => "load",
            Stage::Sweep => "sweep",
            Stage::Fracture => "fracture",
            Stage::Classify => "classify",
            Stage::Solve => "solve",
            Stage::Footprints => "footprints",
            Stage::Profiles => "profiles",
            Stage::Extrude => "extrude",
            Stage::Metrics => "metrics",
            Stage::Export => "export",
        };
        f.write_str(name)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("mesh is empty")]
    EmptyMesh,

    #[error("no sweep edges; lower gamma")]
    NoSweepEdges,

    #[error("no building present: every arrangement polygon was classified outside")]
    NoBuilding,

    #[error("label {label} out of range for polygon {polygon} (label count {count})")]
    LabelOutOfRange {
        polygon: usize,
        label: usize,
        count: usize,
    },

    #[error("instance too large ({what}); raise gamma to reduce sweep edges")]
    InstanceTooLarge { what: String },

    #[error("solver budget must be positive")]
    InvalidBudget,

    #[error("internal solver error: {0}")]
    Infeasible(String),

    #[error("no usable profile samples")]
    NoProfileSamples,

    #[error("extrusion failed near ({}, {}) at height {height}: {reason}", .location.x, .location.y)]
    Extrusion {
        location: Point2,
        height: f64,
        reason: String,
    },

    #[error("no valid cells in error grid")]
    NoValidCells,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("output directory is locked by another process: {0}")]
    Locked(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("{stage}: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn at(self, stage: Stage) -> Error {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }

    /// The innermost error, skipping stage tags.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }

    /// Input problems map to exit code 1, everything else to 2.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::Stage { stage, .. } => *stage == Stage::Load,
            Error::InvalidInput(_)
            | Error::EmptyMesh
            | Error::Parse(_)
            | Error::Io(_)
            | Error::Locked(_) => true,
            _ => false,
        }
    }
}
