pub mod brownian;
pub mod checks;
pub mod tree;

pub use brownian::brownian_crosscheck;
pub use checks::{
    bellman_induction_check, check_log_bounds, check_g_bound, induction_margins, leaf_terms, run_batch,
    InductionMargins, LeafTerms,
};
pub use tree::{
    parse_manifest, quadratic_variation, random_batch, random_martingale, DyadicMartingale, Law, MartingaleSpec,
    QuadraticVariationField, MAX_DEPTH,
};
