use std::error::Error;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dominance::nondominated_sort;
use crate::error::{EvolveError, MooError};
use crate::niching::{associate_and_niche, NicheSelection};
use crate::operators::{niche_counts, polynomial_mutation, sbx_crossover, tournament_select, Bounds};
use crate::reference::{das_dennis, partitions_for, ReferencePointSet};

/// Name and closed range of one decision variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneSpec {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
}

impl GeneSpec {
    pub fn new(name: impl Into<String>, lower: f64, upper: f64) -> Result<Self, MooError> {
        let spec = Self {
            name: name.into(),
            lower,
            upper,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), MooError> {
        if self.lower.is_finite() && self.upper.is_finite() && self.lower < self.upper {
            Ok(())
        } else {
            Err(MooError::InvalidGene {
                name: self.name.clone(),
                lower: self.lower,
                upper: self.upper,
            })
        }
    }

    pub fn bounds(&self) -> Bounds {
        Bounds::new(self.lower, self.upper)
    }
}

/// Identifies one evaluation: the generation it happened in and the slot of
/// the individual within that generation's batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EvalTag {
    pub generation: usize,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub genes: Vec<f64>,
    /// Minimized objective values.
    pub objectives: Vec<f64>,
    /// Index of the non-dominated front within the population that selected it.
    pub rank: usize,
    /// Associated reference point.
    pub niche: Option<usize>,
    /// Tag of the evaluation that produced `objectives`.
    pub tag: EvalTag,
}

/// Evaluation callback. Implementations must be pure given `(genes, tag)`:
/// the engine may call them concurrently and in any order.
pub trait Problem: Sync {
    fn n_objectives(&self) -> usize;

    fn evaluate(&self, genes: &[f64], tag: EvalTag) -> Result<Vec<f64>, Box<dyn Error + Send + Sync>>;
}

/// Adapts a closure into a [`Problem`].
pub struct FnProblem<F> {
    n_objectives: usize,
    f: F,
}

impl<F> FnProblem<F> {
    pub fn new(n_objectives: usize, f: F) -> Self {
        Self { n_objectives, f }
    }
}

impl<F, E> Problem for FnProblem<F>
where
    F: Fn(&[f64], EvalTag) -> Result<Vec<f64>, E> + Sync,
    E: Into<Box<dyn Error + Send + Sync>>,
{
    fn n_objectives(&self) -> usize {
        self.n_objectives
    }

    fn evaluate(&self, genes: &[f64], tag: EvalTag) -> Result<Vec<f64>, Box<dyn Error + Send + Sync>> {
        (self.f)(genes, tag).map_err(Into::into)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub genes: Vec<GeneSpec>,
    /// SBX distribution index.
    #[serde(default = "default_eta_c")]
    pub eta_c: f64,
    /// Probability that a selected pair is recombined.
    #[serde(default = "default_p_c")]
    pub p_c: f64,
    /// Polynomial mutation distribution index.
    #[serde(default = "default_eta_m")]
    pub eta_m: f64,
    /// Per-gene mutation probability; `None` means `1 / genes.len()`.
    #[serde(default)]
    pub p_m: Option<f64>,
    /// Das-Dennis partitions; `None` picks the smallest lattice with at
    /// least `population_size` points.
    #[serde(default)]
    pub partitions: Option<usize>,
    /// Re-evaluate surviving parents at every generation.
    #[serde(default)]
    pub reevaluate_survivors: bool,
    /// Dispatch a generation's evaluations on the rayon pool.
    #[serde(default = "default_parallel")]
    pub parallel: bool,
}

fn default_eta_c() -> f64 {
    30.0
}
fn default_p_c() -> f64 {
    1.0
}
fn default_eta_m() -> f64 {
    20.0
}
fn default_parallel() -> bool {
    true
}

impl GaConfig {
    pub fn new(population_size: usize, generations: usize, genes: Vec<GeneSpec>) -> Self {
        Self {
            population_size,
            generations,
            genes,
            eta_c: default_eta_c(),
            p_c: default_p_c(),
            eta_m: default_eta_m(),
            p_m: None,
            partitions: None,
            reevaluate_survivors: false,
            parallel: default_parallel(),
        }
    }

    pub fn mutation_probability(&self) -> f64 {
        self.p_m.unwrap_or(1.0 / self.genes.len().max(1) as f64)
    }

    pub fn validate(&self) -> Result<(), MooError> {
        if self.population_size == 0 {
            return Err(MooError::InvalidConfig("population size must be positive".into()));
        }
        if self.genes.is_empty() {
            return Err(MooError::InvalidConfig("at least one gene is required".into()));
        }
        for g in &self.genes {
            g.validate()?;
        }
        let p_m = self.mutation_probability();
        for (name, p) in [("p_c", self.p_c), ("p_m", p_m)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(MooError::InvalidConfig(format!("{name} = {p} is not a probability")));
            }
        }
        for (name, eta) in [("eta_c", self.eta_c), ("eta_m", self.eta_m)] {
            if !(eta >= 0.0 && eta.is_finite()) {
                return Err(MooError::InvalidConfig(format!("{name} = {eta} must be finite and >= 0")));
            }
        }
        Ok(())
    }

    pub fn reference_points(&self, n_objectives: usize) -> Result<ReferencePointSet, MooError> {
        let p = self
            .partitions
            .unwrap_or_else(|| partitions_for(n_objectives, self.population_size));
        das_dennis(n_objectives, p)
    }
}

/// The surviving population of one generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generation {
    pub index: usize,
    pub population: Vec<Individual>,
    pub ideal: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct History {
    pub reference_points: ReferencePointSet,
    pub generations: Vec<Generation>,
}

impl History {
    pub fn last(&self) -> &Generation {
        self.generations.last().expect("history always holds generation 0")
    }
}

/// Runs NSGA-III for `config.generations` generations.
///
/// Generation 0 is sampled uniformly inside the gene bounds. Each later
/// generation breeds `N` offspring by tournament selection, SBX and
/// polynomial mutation, and keeps `N` of the `2N` parents plus offspring.
/// All randomness comes from `seed`; evaluation results are merged by slot
/// so the history does not depend on how evaluations were scheduled.
pub fn evolve<P: Problem + ?Sized>(problem: &P, config: &GaConfig, seed: u64) -> Result<History, EvolveError> {
    config.validate()?;
    let n = config.population_size;
    let n_obj = problem.n_objectives();
    let refs = config.reference_points(n_obj)?;
    let bounds: Vec<Bounds> = config.genes.iter().map(GeneSpec::bounds).collect();
    let p_m = config.mutation_probability();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let initial: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            bounds
                .iter()
                .map(|b| b.lower + rng.random::<f64>() * (b.upper - b.lower))
                .collect()
        })
        .collect();
    let mut population = evaluate_batch(problem, initial, 0, 0, n_obj, config.parallel)?;

    let fronts = nondominated_sort(&objectives_of(&population));
    let selection = associate_and_niche(&objectives_of(&population), &fronts, &refs, n, &[]);
    let mut ideal = selection.ideal.clone();
    population = apply_selection(population, &selection);

    let mut generations = vec![Generation {
        index: 0,
        population: population.clone(),
        ideal: ideal.clone(),
    }];

    for g in 1..=config.generations {
        if config.reevaluate_survivors {
            let genes: Vec<Vec<f64>> = population.iter().map(|i| i.genes.clone()).collect();
            let fresh = evaluate_batch(problem, genes, g, n, n_obj, config.parallel)?;
            for (old, new) in population.iter_mut().zip(fresh) {
                old.objectives = new.objectives;
                old.tag = new.tag;
            }
        }

        let ranks: Vec<usize> = population.iter().map(|i| i.rank).collect();
        let niches: Vec<usize> = population.iter().map(|i| i.niche.unwrap_or(0)).collect();
        let crowding = niche_counts(&niches);

        let mut offspring: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        while offspring.len() < n {
            let a = tournament_select(&ranks, &crowding, &mut rng);
            let b = tournament_select(&ranks, &crowding, &mut rng);
            let (c1, c2) = sbx_crossover(
                &population[a].genes,
                &population[b].genes,
                &bounds,
                config.eta_c,
                config.p_c,
                &mut rng,
            );
            offspring.push(polynomial_mutation(&c1, config.eta_m, p_m, &bounds, &mut rng));
            offspring.push(polynomial_mutation(&c2, config.eta_m, p_m, &bounds, &mut rng));
        }
        offspring.truncate(n);

        let offspring = evaluate_batch(problem, offspring, g, 0, n_obj, config.parallel)?;
        let merged: Vec<Individual> = population.into_iter().chain(offspring).collect();
        let objectives = objectives_of(&merged);
        let fronts = nondominated_sort(&objectives);
        let selection = associate_and_niche(&objectives, &fronts, &refs, n, &ideal);
        ideal = selection.ideal.clone();
        population = apply_selection(merged, &selection);

        generations.push(Generation {
            index: g,
            population: population.clone(),
            ideal: ideal.clone(),
        });
    }

    Ok(History {
        reference_points: refs,
        generations,
    })
}

fn objectives_of(pop: &[Individual]) -> Vec<Vec<f64>> {
    pop.iter().map(|i| i.objectives.clone()).collect()
}

fn apply_selection(pop: Vec<Individual>, selection: &NicheSelection) -> Vec<Individual> {
    let mut slots: Vec<Option<Individual>> = pop.into_iter().map(Some).collect();
    selection
        .survivors
        .iter()
        .zip(&selection.ranks)
        .zip(&selection.associations)
        .map(|((&i, &rank), assoc)| {
            let mut ind = slots[i].take().expect("survivor selected twice");
            ind.rank = rank;
            ind.niche = Some(assoc.niche);
            ind
        })
        .collect()
}

fn evaluate_batch<P: Problem + ?Sized>(
    problem: &P,
    genes: Vec<Vec<f64>>,
    generation: usize,
    index_offset: usize,
    n_obj: usize,
    parallel: bool,
) -> Result<Vec<Individual>, EvolveError> {
    let run = |(slot, genes): (usize, &Vec<f64>)| {
        let tag = EvalTag {
            generation,
            index: index_offset + slot,
        };
        problem.evaluate(genes, tag)
    };
    let results: Vec<_> = if parallel {
        genes.par_iter().enumerate().map(run).collect()
    } else {
        genes.iter().enumerate().map(run).collect()
    };

    genes
        .into_iter()
        .zip(results)
        .enumerate()
        .map(|(slot, (genes, result))| {
            let index = index_offset + slot;
            let objectives = result.map_err(|source| EvolveError::Evaluation {
                generation,
                index,
                source,
            })?;
            if objectives.len() != n_obj {
                return Err(EvolveError::ObjectiveCount {
                    generation,
                    index,
                    expected: n_obj,
                    got: objectives.len(),
                });
            }
            if objectives.iter().any(|v| !v.is_finite()) {
                return Err(EvolveError::NonFinite { generation, index });
            }
            Ok(Individual {
                genes,
                objectives,
                rank: 0,
                niche: None,
                tag: EvalTag { generation, index },
            })
        })
        .collect()
}
