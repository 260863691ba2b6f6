pub mod closed_form;
pub mod dist;
pub mod error;
pub mod gwj;
pub mod mc;
pub mod orders;
pub mod quad;
pub mod special;
pub mod verify;

pub use closed_form::{closed_form_gwj, ClosedFormKey};
pub use dist::{Distribution, Support, Weight};
pub use error::{GwjError, Result};
pub use gwj::{Engine, GwjResult, Method, Scheme, SchemeSpec};
pub use mc::{mc_gwj, McEstimate};
pub use orders::{aging_class_check, check_order, delta_regions, AgingClass, Direction, OrderReport, Relation};
pub use verify::{default_config, verify_theorem, TheoremConfig, Verdict, VerdictReport, THEOREM_IDS};
