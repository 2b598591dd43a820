//! Assertions: syntax, expression evaluation, demand sets, satisfaction and well-formedness.

mod ast;
mod demands;
mod eval;
mod models;
mod text;
mod wf;

pub use ast::{full, Assertion, CmpOp, Expr, Store, WandKind};
pub use demands::{antichain, close_wand, covered_demand, demands, pred_resource, sat, sat_in, wand_resource};
pub use eval::{field_amount, EvalCtx, EvalError};
pub use models::{minimal_models, minimal_models_from};
pub use text::{assertion_at, expr_at, parse_assertion, parse_expr, print_assertion, print_expr};
pub use wf::{check_wf, wf, WfError};
