//! A problem-agnostic NSGA-III engine.
//!
//! The generational loop samples an initial population inside the gene
//! bounds, then repeatedly:
//!
//! 1. picks parents by binary tournament (rank, then niche crowding),
//! 2. recombines them with simulated binary crossover and perturbs the
//!    children with bounded polynomial mutation,
//! 3. merges parents and offspring and keeps `N` survivors using
//!    non-dominated sorting followed by reference-point niching on the
//!    normalized objective space.
//!
//! All objectives are minimized. Evaluation is delegated to a [`Problem`]
//! implementation which receives an [`EvalTag`] so stochastic problems can
//! derive reproducible seeds per evaluation.

mod dominance;
mod engine;
mod error;
mod niching;
mod normalize;
mod operators;
mod reference;

pub use dominance::{dominates, nondominated_sort, try_dominates};
pub use engine::{
    evolve, EvalTag, FnProblem, GaConfig, GeneSpec, Generation, History, Individual, Problem,
};
pub use error::{EvolveError, MooError};
pub use niching::{associate, associate_and_niche, Association, NicheSelection};
pub use normalize::{normalize_objectives, Normalized, INTERCEPT_FLOOR};
pub use operators::{
    mutate_gene, niche_counts, polynomial_mutation, sbx_beta, sbx_crossover, sbx_pair,
    tournament_select, Bounds,
};
pub use reference::{binomial, das_dennis, partitions_for, ReferencePointSet};
