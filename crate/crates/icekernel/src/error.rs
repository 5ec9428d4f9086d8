//! Error type shared by all modules of the crate.

/// Everything that can go wrong when building lattice objects, enumerating
/// configurations, or evaluating determinants and contour integrals.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Torus side lengths below 2 would create self-loop edges.
    #[error("torus side length must be at least 2, got {n}")]
    TorusTooSmall {
        /// The rejected side length.
        n: i64,
    },

    /// Mid-edge coordinates must have exactly one odd doubled coordinate.
    #[error("({d1}, {d2}) is not a mid-edge: exactly one doubled coordinate must be odd")]
    InvalidMidEdge {
        /// Doubled first coordinate.
        d1: i64,
        /// Doubled second coordinate.
        d2: i64,
    },

    /// A parameter or weight set violates its domain constraints.
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    /// A configuration breaks the two-in/two-out rule at some vertex.
    #[error("ice rule violated at vertex ({v1}, {v2})")]
    IceRuleViolation {
        /// First coordinate of the offending vertex.
        v1: i64,
        /// Second coordinate of the offending vertex.
        v2: i64,
    },

    /// Exhaustive enumeration is capped at 2n² ≤ 26 edge bits.
    #[error("enumeration requires 2n² ≤ 26, got n = {n}")]
    EnumerationTooLarge {
        /// The rejected side length.
        n: i64,
    },

    /// Constraint lists must name distinct vertices.
    #[error("duplicate vertex ({v1}, {v2}) in constraint list")]
    DuplicateVertex {
        /// First coordinate of the repeated vertex.
        v1: i64,
        /// Second coordinate of the repeated vertex.
        v2: i64,
    },

    /// Vertex types are numbered 1 through 6.
    #[error("vertex type number must be in 1..=6, got {0}")]
    InvalidVertexType(u8),

    /// A mid-edge map failed to be a permutation or broke a step constraint.
    #[error("invalid snake configuration: {0}")]
    InvalidSnake(String),

    /// LU elimination met a zero pivot column.
    #[error("matrix is singular (rank deficiency found at pivot {pivot})")]
    SingularMatrix {
        /// Pivot index at which elimination stalled.
        pivot: usize,
    },

    /// The twisted spectral polynomial vanishes at a root-of-unity pair, so
    /// the Fourier inversion formula for that sector is undefined.
    #[error("spectral polynomial vanishes at a root-of-unity pair in sector θ = ({t1}, {t2})")]
    SingularSpectralPoint {
        /// First twist component.
        t1: u8,
        /// Second twist component.
        t2: u8,
    },

    /// A result lost more precision than the caller's tolerance allows.
    #[error("accuracy loss: {0}")]
    AccuracyLoss(String),

    /// Numerical integration did not reach the requested tolerance.
    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),
}

/// Crate-wide result alias.
pub type Result<T, E = Error> = std::result::Result<T, E>;
