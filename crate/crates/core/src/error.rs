use std::fmt;

/// Position of a nodal value inside the mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Location {
    pub cell: (usize, usize),
    pub node: (usize, usize),
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "cell ({}, {}) node ({}, {})",
            self.cell.0, self.cell.1, self.node.0, self.node.1
        )
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unsupported polynomial degree k = {0} (supported: 0..={max})", max = crate::operators::MAX_DEGREE)]
    UnsupportedDegree(usize),

    #[error("inadmissible state: {quantity} = {value:e}{}", fmt_location(.location))]
    Inadmissible {
        quantity: &'static str,
        value: f64,
        location: Option<Location>,
    },

    #[error("non-finite value in {what}{}", fmt_location(.location))]
    NonFinite {
        what: &'static str,
        location: Option<Location>,
    },

    #[error("degenerate wave speeds: S_L = {sl:e}, S_R = {sr:e} for distinct states")]
    DegenerateSpeeds { sl: f64, sr: f64 },

    #[error("reconstruction infeasible in cell ({}, {}): edge data violate the cell-average constraint by {residual:e}", .cell.0, .cell.1)]
    InfeasibleReconstruction { cell: (usize, usize), residual: f64 },

    #[error("singular reconstruction system: {0}")]
    SingularSystem(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown problem '{0}'")]
    UnknownProblem(String),

    #[error("step {step} (t = {time:e}): {source}")]
    AtStep {
        step: usize,
        time: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

fn fmt_location(location: &Option<Location>) -> String {
    match location {
        Some(loc) => format!(" at {loc}"),
        None => String::new(),
    }
}

impl Error {
    /// Attaches a mesh location to errors that carry one and lack it.
    pub fn at(self, loc: Location) -> Self {
        match self {
            Error::Inadmissible {
                quantity,
                value,
                location: None,
            } => Error::Inadmissible {
                quantity,
                value,
                location: Some(loc),
            },
            Error::NonFinite {
                what,
                location: None,
            } => Error::NonFinite {
                what,
                location: Some(loc),
            },
            other => other,
        }
    }

    pub fn at_step(self, step: usize, time: f64) -> Self {
        match self {
            e @ Error::AtStep { .. } => e,
            other => Error::AtStep {
                step,
                time,
                source: Box::new(other),
            },
        }
    }

    /// Short machine-readable tag for the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::UnsupportedDegree(_) => "unsupported_degree",
            Error::Inadmissible { .. } => "inadmissible_state",
            Error::NonFinite { .. } => "non_finite",
            Error::DegenerateSpeeds { .. } => "degenerate_speeds",
            Error::InfeasibleReconstruction { .. } => "infeasible_reconstruction",
            Error::SingularSystem(_) => "singular_system",
            Error::InvalidMesh(_) => "invalid_mesh",
            Error::Config(_) => "config",
            Error::UnknownProblem(_) => "unknown_problem",
            Error::AtStep { source, .. } => source.kind(),
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn location_is_attached_once() {
        let e = Error::Inadmissible {
            quantity: "pressure",
            value: -1.0,
            location: None,
        }
        .at(Location {
            cell: (1, 2),
            node: (0, 1),
        })
        .at(Location {
            cell: (9, 9),
            node: (9, 9),
        });
        let msg = e.to_string();
        assert!(msg.contains("cell (1, 2) node (0, 1)"), "{msg}");
        assert_eq!(e.kind(), "inadmissible_state");
    }

    #[test]
    fn step_context_wraps_and_keeps_kind() {
        let e = Error::UnsupportedDegree(9).at_step(3, 0.5).at_step(4, 1.0);
        assert!(matches!(e, Error::AtStep { step: 3, .. }));
        assert_eq!(e.kind(), "unsupported_degree");
    }
}
