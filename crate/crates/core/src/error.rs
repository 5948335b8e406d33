use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("jet coordinate `{name}` has order {order}, above the cap {cap}")]
    JetOrderExceeded { name: String, order: u32, cap: u32 },
    #[error("total derivative would reach jet order {order}, above the hard limit {limit}")]
    HardJetLimitExceeded { order: u32, limit: u32 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("cyclic binding: replacement for `{0}` mentions a bound symbol")]
    CyclicBinding(String),
    #[error("term not expressible in the ansatz family: {0}")]
    NotInFamily(String),
    #[error("ansatz family is not closed under differentiation: {0}")]
    FamilyNotClosed(String),
    #[error("specialization failed: {0}")]
    SpecializationFailed(String),
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("every candidate xi-submatrix is singular")]
    SingularXi,
    #[error("right-hand side does not separate into x-coefficients times u-fields: {0}")]
    NotSeparable(String),
    #[error("no finite Vessiot-Guldberg structure found up to dimension {0}")]
    CapExceeded(usize),
    #[error("system is not of a solvable shape: {0}")]
    NotSolvableShape(String),
    #[error("direct reduction incomplete: {0}")]
    ReductionIncomplete(String),
    #[error("invalid workspace: {0}")]
    Workspace(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
