use std::fmt;
use std::io;

use circle_core::diophantine::DiophantineError;
use circle_core::graphflow::GraphError;
use circle_core::maps::MapError;
use circle_core::normalform::NormalFormError;
use circle_core::russmann::RussmannError;
use circle_core::trig::TrigError;

#[derive(Debug)]
pub enum LabError {
    Io(io::Error),
    Json(serde_json::Error),
    /// A configuration value is missing or out of range.
    Config(String),
    /// The α expression did not parse.
    Expr(String),
    /// The sidecar of an existing result file belongs to a different spec.
    SpecMismatch { expected: String, found: String },
    Dioph(DiophantineError),
    Map(MapError),
    Graph(GraphError),
    Russmann(RussmannError),
    NormalForm(NormalFormError),
    Trig(TrigError),
}

impl fmt::Display for LabError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabError::Io(e) => write!(f, "io: {e}"),
            LabError::Json(e) => write!(f, "json: {e}"),
            LabError::Config(m) => write!(f, "config: {m}"),
            LabError::Expr(m) => write!(f, "alpha expression: {m}"),
            LabError::SpecMismatch { expected, found } => {
                write!(f, "result file was written for spec {found}, current spec is {expected}")
            }
            LabError::Dioph(e) => write!(f, "{e}"),
            LabError::Map(e) => write!(f, "{e}"),
            LabError::Graph(e) => write!(f, "{e}"),
            LabError::Russmann(e) => write!(f, "{e}"),
            LabError::NormalForm(e) => write!(f, "{e}"),
            LabError::Trig(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for LabError {}

macro_rules! from_impl {
    ($t:ty, $v:ident) => {
        impl From<$t> for LabError {
            fn from(e: $t) -> Self {
                LabError::$v(e)
            }
        }
    };
}

from_impl!(io::Error, Io);
from_impl!(serde_json::Error, Json);
from_impl!(DiophantineError, Dioph);
from_impl!(MapError, Map);
from_impl!(GraphError, Graph);
from_impl!(RussmannError, Russmann);
from_impl!(NormalFormError, NormalForm);
from_impl!(TrigError, Trig);
