use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid group table: {0}")]
    InvalidGroup(String),
    #[error("invalid subgroup: {0}")]
    InvalidSubgroup(String),
    #[error("invalid subquotient pair: {0}")]
    InvalidPair(String),
    #[error("invalid orbit morphism: {0}")]
    InvalidMorphism(String),

    #[error("interpolation points {0} and {1} coincide")]
    DuplicatePoints(usize, usize),
    #[error("jet is not fixed by the stabilizer of its basepoint (element {0} moves it)")]
    JetNotFixed(usize),
    #[error("invalid linear action: {0}")]
    InvalidAction(String),

    #[error("dimension mismatch: {0}")]
    Shape(String),
    #[error("boundary does not square to zero at degree {degree}")]
    BoundaryNotNilpotent { degree: i64 },
    #[error("contravariant coefficient system passed to the homology assembler")]
    VarianceMismatch,
    #[error("boundary raises filtration at degree {degree}, generator {generator}")]
    FiltrationViolation { degree: i64, generator: usize },

    #[error("Hessian is degenerate at {point:?}: eigenvalue {eigenvalue:e}")]
    DegenerateHessian { point: Vec<f64>, eigenvalue: f64 },
    #[error("plateau half-width {0} is too large for the cutoff intervals")]
    DeltaTooLarge(f64),
    #[error("sphere function is not equivariant: defect {0:e}")]
    HNotEquivariant(f64),
    #[error("perturbation amplitude too large: {0} spurious critical points in the transition annuli")]
    EpsilonTooLarge(usize),
    #[error("no Morse chart supplied for the critical point at {0:?}")]
    ChartMissing(Vec<f64>),
    #[error("invalid Morse chart: {0}")]
    InvalidChart(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("{0} trajectories did not resolve")]
    UnresolvedTrajectories(usize),
    #[error("flow geometry not supported: {0}")]
    UnsupportedFlow(String),
    #[error("Morse boundary does not square to zero at degree {degree}")]
    BoundarySquareNonzero { degree: i64 },
    #[error("unsupported representation: {0}")]
    UnsupportedRep(String),
    #[error("group order {0} is not a power of {1}")]
    NotAPGroup(usize, u64),

    #[error("fixture error: {0}")]
    Fixture(String),
}

pub type Result<T> = std::result::Result<T, Error>;
