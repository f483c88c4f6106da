pub mod functions;
pub mod kernel;
pub mod normal;
pub mod table;

pub use functions::{
    bound_rhs, f_derivatives, f_eval, g_eval, g_prime, g_second, log_bound_rhs, log_f_eval,
    m_eval, n_eval, n_sup_eval, tables, FDerivatives, SpecialTables, F_DOMAIN_MAX,
};
pub use kernel::{auxiliaries, inv_k_prime, inv_mills, kernel_eval, Auxiliaries, KernelEval};
pub use table::SpecialFunctionTable;
