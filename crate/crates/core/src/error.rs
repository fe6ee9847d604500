use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mesh has no faces")]
    EmptyMesh,

    #[error("face {face} has degree {degree}; only triangles and quads are supported")]
    UnsupportedFaceDegree { face: usize, degree: usize },

    #[error("face {face} references vertex {vertex} which does not exist")]
    VertexOutOfRange { face: usize, vertex: usize },

    #[error("face {face} repeats a vertex")]
    DegenerateFace { face: usize },

    #[error("edge ({0}, {1}) is shared by more than two faces")]
    NonManifoldEdge(usize, usize),

    #[error("faces adjacent across edge ({0}, {1}) have inconsistent orientation")]
    MixedOrientation(usize, usize),

    #[error("vertex {0} has a non-manifold neighborhood")]
    NonManifoldVertex(usize),

    #[error("vertex {0} is not referenced by any face")]
    IsolatedVertex(usize),

    #[error("mesh is not connected")]
    Disconnected,

    #[error("position count {got} does not match vertex count {expected}")]
    PositionCount { expected: usize, got: usize },

    #[error("edge {edge} has non-positive length")]
    ZeroLengthEdge { edge: usize },

    #[error("operation requires an all-quad mesh; face {face} has degree {degree}")]
    NotQuadMesh { face: usize, degree: usize },

    #[error("operation requires a closed mesh")]
    HasBoundary,

    #[error("operation requires a mesh with boundary or genus zero: {0}")]
    Topology(String),

    #[error("mesh has no vertex positions")]
    MissingPositions,

    #[error("loops are dependent: intersection matrix has rank {rank} < {expected}")]
    DependentLoops { rank: usize, expected: usize },

    #[error("intersection form is not unimodular (pivot {pivot}); generators are not primitive")]
    NonUnimodular { pivot: i64 },

    #[error("slicing did not produce a disk (chi = {chi}, boundary loops = {loops}); offending edges {edges:?}")]
    SliceFailed {
        chi: i64,
        loops: usize,
        edges: Vec<usize>,
    },

    #[error("degenerate triangle {0} in the auxiliary triangulation")]
    DegenerateTriangle(usize),

    #[error("linear solve failed: {0}")]
    Solver(String),

    #[error("period matrix of candidate holomorphic forms is singular")]
    SingularPeriodMatrix,

    #[error("holomorphic form vanishes on halfedge {0}; perturb the homology basis or metric")]
    ZeroOnEdge(usize),

    #[error("imaginary part of the b-period matrix is singular")]
    DegeneratePeriodLattice,

    #[error("divisor site is not a mesh vertex: {0}")]
    SiteNotVertex(String),

    #[error("index {index} out of range (0..{len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("zero and pole coincide at {0}; cancel them before building the differential")]
    CoincidentSingularity(String),

    #[error("singular points {0} and {1} snap to the same vertex {2}; refine the mesh")]
    SnapCollision(usize, usize, usize),

    #[error("conformal map has {0} flipped triangles")]
    FlippedTriangles(usize),

    #[error("branch of the fourth root tears across edge ({0}, {1})")]
    BranchTear(usize, usize),

    #[error("quartic balance violated: total pole order minus zero order is {0}, expected 8")]
    QuarticBalance(i64),

    #[error("unknown {kind} `{name}`; available: {available:?}")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        available: Vec<String>,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
