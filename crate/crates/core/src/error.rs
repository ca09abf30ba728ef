use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid angle: {0}")]
    InvalidAngle(f64),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate leg: start and end coincide at ({x}, {y})")]
    DegenerateLeg { x: f64, y: f64 },

    #[error("leg infeasible: wind {wind_speed} m/s defeats airspeed limit {u_max} m/s on this heading")]
    LegInfeasible { wind_speed: f64, u_max: f64 },

    #[error("wind speed {wind_speed} m/s exceeds the wind resistance of UAV {uav} ({limit} m/s)")]
    WindExceedsResistance { uav: String, wind_speed: f64, limit: f64 },

    #[error("turbines outside every effective flying range: {}", .0.join(", "))]
    UnreachableTurbines(Vec<String>),

    #[error("no feasible tour exists through all nodes")]
    InfeasibleTour,

    #[error("turbine {turbine} needs {round_trip:.1} s out-and-back, above t_max {t_max:.1} s")]
    InfeasibleTurbine { turbine: String, round_trip: f64, t_max: f64 },

    #[error("{nodes} nodes exceed the exact solver cap of {cap}")]
    SolverCapExceeded { nodes: usize, cap: usize },

    #[error("model error: {0}")]
    Model(String),

    #[error("cannot quantize: median(|W|) is zero")]
    QuantizationDegenerate,

    #[error("training failed: {0}")]
    Training(String),

    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("model container: {0}")]
    Codec(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
