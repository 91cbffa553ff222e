//! D2D placement delivery arrays: construction, validation, bounds, a
//! byte-level protocol simulator and an exhaustive search oracle.

pub mod array;
pub mod bounds;
pub mod cli;
pub mod construct;
pub mod search;
pub mod sim;
pub mod validate;

pub use array::{Dpda, DpdaError, Entry, SchemeParams};
pub use bounds::{compare_to_jcm, jcm_params, min_f_bound, MemoryCase, Rational};
pub use construct::{construct_even, construct_grid, construct_jcm, construct_odd, lift};
pub use search::{canonicalize, exists_dpda, search_min_s, SearchOptions, SearchResult};
pub use sim::{simulate, DemandMode, SimReport};
pub use validate::{check_rate_optimal, validate, ValidationReport};
