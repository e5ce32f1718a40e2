//! Piracy-behavior taxonomy: the closed label schema, a deterministic
//! rule-based reference classifier, external-adapter plumbing, and
//! verdict evaluation.

pub mod adapter;
pub mod eval;
pub mod labels;
pub mod rules;

pub use adapter::{
    classify_post, serve_stdio, AdapterError, AdapterOp, AdapterRequest, AdapterResponse,
    ClassifierAdapter, FallbackClassifier, HttpAdapter, SubprocessAdapter,
    DEFAULT_ADAPTER_TIMEOUT,
};
pub use eval::{evaluate, BinaryMetrics, EvalError, EvalMetrics};
pub use labels::{AssignedLabel, Group, Leaf, PostVerdict, TaxonomyLabel};
pub use rules::{NoLabelMatch, RuleClassifier, SignatureSet};
