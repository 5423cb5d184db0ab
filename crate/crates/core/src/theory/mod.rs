//! Computable pieces of the finite-sample theory: Bernoulli KL divergence
//! with its lower bounds, the four-term majority-vote tail bound, and
//! Monte-Carlo / exact-enumeration estimators of selection probabilities
//! and deviation tails.

mod bound;
mod kl;
mod pk;

pub use bound::{move_bound, move_bound_terms, retrieval_bound, BoundInputs, BoundTerms};
pub use kl::{kl_bernoulli, kl_lower_bound_gamma, kl_lower_bound_ratio};
pub use pk::{
    estimate_pk, estimate_tk, eta_from_pk, exact_phat_enumeration, EmpiricalSampler, FreshSampler,
    PkTable, TailEstimate,
};
