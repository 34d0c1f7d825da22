use serde_json::{json, Value};

use jacstab_core::divisor::DivisorError;
use jacstab_core::graph::GraphError;
use jacstab_core::pushforward::PushforwardError;
use jacstab_core::stability::StabilityError;
use jacstab_core::twister::TwisterError;

/// An input problem reported with exit status 2.
#[derive(Debug)]
pub struct CliError {
    pub code: &'static str,
    pub message: String,
    pub details: Option<Value>,
}

impl CliError {
    pub fn new(code: &'static str, message: impl Into<String>) -> Self {
        CliError { code, message: message.into(), details: None }
    }

    pub fn to_json(&self) -> Value {
        let mut err = json!({"code": self.code, "message": self.message});
        if let Some(d) = &self.details {
            err["details"] = d.clone();
        }
        json!({"error": err})
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        let message = e.to_string();
        match e {
            GraphError::Invalid(violations) => CliError {
                code: "INVALID_GRAPH",
                message,
                details: serde_json::to_value(&violations).ok(),
            },
            GraphError::Json(_) => CliError::new("MALFORMED_JSON", message),
            GraphError::EmptyOrFull => CliError::new("EMPTY_OR_FULL", message),
            GraphError::Empty => CliError::new("EMPTY_SUBCURVE", message),
            GraphError::UnknownVertex(_) => CliError::new("UNKNOWN_VERTEX", message),
        }
    }
}

impl From<StabilityError> for CliError {
    fn from(e: StabilityError) -> Self {
        let message = e.to_string();
        match e {
            StabilityError::Graph(g) => g.into(),
            StabilityError::DegreeMismatch { .. } => CliError::new("DEGREE_MISMATCH", message),
            StabilityError::TauSum { .. } => CliError::new("TAU_SUM", message),
            StabilityError::TauLength { .. } => CliError::new("TAU_LENGTH", message),
            StabilityError::MultidegreeShape { .. } => CliError::new("MULTIDEGREE_SHAPE", message),
            StabilityError::MissingBasepoint => CliError::new("MISSING_BASEPOINT", message),
            StabilityError::Polarization(_) => CliError::new("INVALID_POLARIZATION", message),
            StabilityError::TooLarge { .. } => CliError::new("TOO_LARGE", message),
        }
    }
}

impl From<TwisterError> for CliError {
    fn from(e: TwisterError) -> Self {
        let message = e.to_string();
        match e {
            TwisterError::NotTreelike => CliError::new("NOT_TREELIKE", message),
            TwisterError::NonzeroTotal(_) => CliError::new("NONZERO_TOTAL", message),
            TwisterError::Stability(s) => s.into(),
        }
    }
}

impl From<DivisorError> for CliError {
    fn from(e: DivisorError) -> Self {
        let message = e.to_string();
        let code = match e {
            DivisorError::InvalidIndex { .. } => "INVALID_INDEX",
            DivisorError::TauSum { .. } => "TAU_SUM",
            DivisorError::TauLength { .. } => "TAU_LENGTH",
            DivisorError::ZeroTau => "ZERO_TAU",
            DivisorError::NoNegativeEntry => "NO_NEGATIVE_ENTRY",
            DivisorError::Unstable { .. } => "UNSTABLE_MODULI",
            DivisorError::TooManyMarkings(_) => "TOO_LARGE",
            DivisorError::ModuliMismatch => "MODULI_MISMATCH",
            DivisorError::Json(_) => "MALFORMED_JSON",
        };
        CliError::new(code, message)
    }
}

impl From<PushforwardError> for CliError {
    fn from(e: PushforwardError) -> Self {
        let message = e.to_string();
        match e {
            PushforwardError::Divisor(d) => d.into(),
            PushforwardError::Stability(s) => s.into(),
            PushforwardError::WrongShape => CliError::new("WRONG_SHAPE", message),
            PushforwardError::DegreeOverflow(_) => CliError::new("DEGREE_OVERFLOW", message),
            PushforwardError::UnknownSymbol(_) => CliError::new("UNKNOWN_SYMBOL", message),
        }
    }
}
