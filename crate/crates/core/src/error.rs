use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("dimension {d} outside supported range 2..={max}")]
    Dimension { d: usize, max: usize },
    #[error("sites are not nearest neighbours")]
    NotAdjacent,
    #[error("radius of an empty set is undefined")]
    EmptySet,
    #[error("invalid cone: {0}")]
    InvalidCone(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SawError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("walk length {k} exceeds enumeration cap {cap} for d = {d}")]
    LengthCap { d: usize, k: usize, cap: usize },
    #[error("length must be at least 1")]
    ZeroLength,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PathError {
    #[error("consecutive sites {index} and {} are not adjacent", index + 1)]
    NotAdjacent { index: usize },
    #[error("site at position {index} repeats an earlier site")]
    RepeatedSite { index: usize },
    #[error("path must start at the origin")]
    NotFromOrigin,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SphereError {
    #[error("cluster escaped the truncation radius; its boundary is not available")]
    Escaped,
    #[error("cluster is not closed under moves towards the origin")]
    NotDownwardClosed,
    #[error("cluster does not contain the origin")]
    MissingOrigin,
    #[error("complex is not a closed manifold; inside test is undefined")]
    NotClosedManifold,
    #[error("complex is empty")]
    Empty,
    #[error("could not find a non-degenerate ray after {0} attempts")]
    RayDegenerate(usize),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundError {
    #[error("explicit bound requires p < (2d-1)^-2 = {limit} (got p = {p}, d = {d})")]
    OutsideExplicitRegime { p: f64, d: usize, limit: f64 },
    #[error("tail curve and bound curve disagree on (p, d, r_values)")]
    Mismatch,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OrientedError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("box size L = {0} is below the minimum of 4")]
    BoxTooSmall(usize),
    #[error("tolerance {0} is below the minimum of 1e-3")]
    ToleranceTooSmall(f64),
    #[error("operation only defined for d = 2 (got d = {0})")]
    PlanarOnly(usize),
    #[error("annulus index n = {0} must be at least 3")]
    AnnulusTooSmall(i32),
    #[error("skeleton precondition violated: {0}")]
    SkeletonPrecondition(String),
    #[error("no admissible base site within search bound {0}")]
    NoBaseSite(i32),
}
