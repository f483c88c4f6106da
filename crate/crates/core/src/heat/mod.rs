pub mod endpoint;
pub mod flow;
pub mod function;

pub use endpoint::{check_endpoint_inequality, mc_endpoint_nd, sharpness_demo, SharpnessRow, SharpnessTable};
pub use flow::{
    check_flow_monotone, endpoint_terms, flow_value, heat_apply_1d, heat_apply_fn, FlowMethod, FlowTrace,
    PositiveFunction,
};
pub use function::{Family, TestFunction};
