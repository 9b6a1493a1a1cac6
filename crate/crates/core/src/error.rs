use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SceneError {
    #[error("workspace dimensions must be positive")]
    InvalidWorkspace,
    #[error("scene contains non-finite values")]
    NonFinite,
    #[error("duplicate object id {0}")]
    DuplicateId(u32),
    #[error("object {0} has a non-positive or non-finite dimension")]
    InvalidShape(u32),
    #[error("object {0} has a non-positive mass")]
    InvalidMass(u32),
    #[error("object {0} center lies outside the workspace")]
    OutsideWorkspace(u32),
    #[error("task target {0} is not in the scene")]
    UnknownTarget(u32),
    #[error("goal lies outside the workspace")]
    GoalOutsideWorkspace,
    #[error("goal tolerance must be positive")]
    InvalidTolerance,
}

/// Errors from the line-oriented scene file reader.
#[derive(Debug, Error)]
pub enum SceneFileError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("semantic error: {0}")]
    Semantic(#[from] SceneError),
    #[error("missing `{0}` record")]
    MissingRecord(&'static str),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhysicsError {
    #[error("non-finite scene state")]
    NonFiniteState,
    #[error("non-finite robot action")]
    NonFiniteAction,
    #[error("rollout failed at step {index}: {source}")]
    Rollout {
        index: usize,
        #[source]
        source: Box<PhysicsError>,
    },
    #[error("rollout needs at least one action")]
    EmptyRollout,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RmpError {
    #[error("resolve needs at least one policy")]
    NoPolicies,
    #[error("policy {index} metric is not symmetric positive semidefinite")]
    MetricNotPsd { index: usize },
    #[error("target object {0} not found")]
    MissingTarget(u32),
    #[error("expected {expected} obstacle weights, got {got}")]
    WeightCount { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RewardError {
    #[error("states do not share the same object ids")]
    MismatchedObjects,
    #[error("target object {0} not found")]
    MissingTarget(u32),
    #[error("trajectory reward needs at least one step reward")]
    EmptyTrajectory,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error(transparent)]
    Rmp(#[from] RmpError),
    #[error(transparent)]
    Physics(#[from] PhysicsError),
    #[error(transparent)]
    Reward(#[from] RewardError),
    #[error("every sampled rollout failed")]
    AllRolloutsFailed,
    #[error("open-loop planning needs max_steps >= 1")]
    ZeroMaxSteps,
    #[error(
        "no sampled sequence reaches the goal in prediction (best distance {best_distance:.4} m)"
    )]
    GoalUnreachable { best_distance: f64 },
    #[error("invalid planner configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),
    #[error("invalid value `{value}` for `{key}`")]
    InvalidValue { key: String, value: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no episodes to evaluate")]
    Empty,
    #[error("k grid must be sorted ascending within [0, 1]")]
    BadGrid,
    #[error(transparent)]
    Scene(#[from] SceneFileError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("trajectory file: {0}")]
    Trajectory(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SceneGenError {
    #[error("invalid generator configuration: {0}")]
    InvalidConfig(String),
    #[error("could not place {what} within the rejection budget (workspace too crowded)")]
    Crowded { what: String },
}
