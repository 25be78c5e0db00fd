//! Model-agnostic search for a diverse set of `k` counterfactuals.
//!
//! A population of candidate k-sets is initialised uniformly inside each
//! feature's range (immutable features pinned to the origin) and evolved with
//! tournament selection, slot-wise and feature-wise crossover, and ±1-level /
//! Gaussian mutation. Survivors are the best of parents and children by the
//! diverse objective. Model outputs are cached per distinct instance and the
//! budget counts distinct model calls.

use std::collections::HashMap;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::sparsity::revert_changes;
use super::{dpp_diversity, hinge_loss, objective_from_terms, CfError, CfQuery, Classifier};
use super::{CounterfactualSet, Prepared};
use crate::rng::{seeded, Rng as SearchRng};
use crate::tabular::{FeatureKind, FeatureSchema};

pub const POPULATION_SIZE: usize = 60;
pub const STAGNATION_LIMIT: usize = 25;
const MUTATION_RATE: f64 = 0.2;
/// Standard deviation of a continuous mutation as a fraction of the range.
const GAUSSIAN_STEP: f64 = 0.1;
const IMPROVEMENT: f64 = 1e-12;

type Candidate = Vec<Vec<f64>>;

struct Search<'a, 'q> {
    prep: &'a Prepared<'q>,
    model: &'a dyn Classifier,
    cache: HashMap<Vec<u64>, f64>,
    evaluations: usize,
    lambda1: f64,
    lambda2: f64,
    mutable: Vec<usize>,
    rng: SearchRng,
}

impl Search<'_, '_> {
    fn probability(&mut self, x: &[f64]) -> f64 {
        let key: Vec<u64> = x.iter().map(|v| v.to_bits()).collect();
        if let Some(&p) = self.cache.get(&key) {
            return p;
        }
        let p = self.model.probability(x);
        self.evaluations += 1;
        self.cache.insert(key, p);
        p
    }

    fn fitness(&mut self, set: &Candidate) -> f64 {
        let mut hinges = Vec::with_capacity(set.len());
        let mut distances = Vec::with_capacity(set.len());
        for cf in set {
            hinges.push(hinge_loss(self.probability(cf), self.prep.target));
            distances.push(self.prep.metric.distance(cf, &self.prep.origin));
        }
        let refs: Vec<&[f64]> = set.iter().map(Vec::as_slice).collect();
        let diversity = dpp_diversity(&refs, &self.prep.metric);
        objective_from_terms(&hinges, &distances, diversity, self.lambda1, self.lambda2)
    }

    fn random_instance(&mut self) -> Vec<f64> {
        let mut x = self.prep.origin.clone();
        for &i in &self.mutable {
            let f = &self.prep.schema.features[i];
            x[i] = match f.kind {
                FeatureKind::Ordinal => f64::from(self.rng.random_range(0..=f.max_level.unwrap_or(0))),
                FeatureKind::Continuous => self.rng.random_range(f.lower()..=f.upper()),
            };
        }
        x
    }

    fn tournament<'p>(&mut self, pop: &'p [(Candidate, f64)]) -> &'p Candidate {
        let a = self.rng.random_range(0..pop.len());
        let b = self.rng.random_range(0..pop.len());
        if pop[b].1 < pop[a].1 {
            &pop[b].0
        } else {
            &pop[a].0
        }
    }

    fn crossover(&mut self, a: &Candidate, b: &Candidate) -> Candidate {
        let mut child: Candidate = a
            .iter()
            .zip(b)
            .map(|(x, y)| if self.rng.random_bool(0.5) { x.clone() } else { y.clone() })
            .collect();
        let slot = self.rng.random_range(0..child.len());
        for &i in &self.mutable {
            if self.rng.random_bool(0.5) {
                child[slot][i] = b[slot][i];
            } else {
                child[slot][i] = a[slot][i];
            }
        }
        child
    }

    fn mutate_one(&mut self, x: &mut [f64]) {
        let i = self.mutable[self.rng.random_range(0..self.mutable.len())];
        let f = &self.prep.schema.features[i];
        let (lo, hi) = (f.lower(), f.upper());
        match f.kind {
            FeatureKind::Ordinal => {
                if hi > lo {
                    let up = self.rng.random_bool(0.5);
                    let step = if (up && x[i] < hi) || x[i] <= lo { 1.0 } else { -1.0 };
                    x[i] += step;
                }
            }
            FeatureKind::Continuous => {
                let sd = GAUSSIAN_STEP * (hi - lo);
                if sd > 0.0 {
                    let noise = Normal::new(0.0, sd).expect("positive sd");
                    x[i] = (x[i] + noise.sample(&mut self.rng)).clamp(lo, hi);
                }
            }
        }
    }

    fn mutate(&mut self, child: &mut Candidate) {
        let mut touched = false;
        for slot in 0..child.len() {
            if self.rng.random_bool(MUTATION_RATE) {
                self.mutate_one(&mut child[slot]);
                touched = true;
            }
        }
        if !touched {
            let slot = self.rng.random_range(0..child.len());
            self.mutate_one(&mut child[slot]);
        }
    }
}

/// Evolutionary search for up to `query.k` valid counterfactuals.
pub fn generate_diverse_cfs(
    query: &CfQuery,
    model: &dyn Classifier,
    schema: &FeatureSchema,
    mads: &[f64],
) -> Result<CounterfactualSet, CfError> {
    let prep = Prepared::new(query, schema, mads, model)?;
    let mut search = Search {
        mutable: prep.mutable_features(),
        prep: &prep,
        model,
        cache: HashMap::new(),
        evaluations: 1,
        lambda1: query.lambda1,
        lambda2: query.lambda2,
        rng: seeded(query.seed),
    };
    if search.mutable.is_empty() {
        return Err(CfError::NoCounterfactualFound {
            evaluations: search.evaluations,
        });
    }
    let k = query.k;
    // Keep the initial population inside the budget for very large k.
    let population = POPULATION_SIZE.min((query.budget / k).max(2));

    let mut pop: Vec<(Candidate, f64)> = Vec::with_capacity(2 * population);
    for _ in 0..population {
        let cand: Candidate = (0..k).map(|_| search.random_instance()).collect();
        let fit = search.fitness(&cand);
        pop.push((cand, fit));
    }
    pop.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut best = pop[0].1;
    let mut stagnant = 0;
    let mut generations = 0;

    while search.evaluations + population * k <= query.budget && stagnant < STAGNATION_LIMIT {
        let mut children = Vec::with_capacity(population);
        for _ in 0..population {
            let a = search.tournament(&pop).clone();
            let b = search.tournament(&pop).clone();
            let mut child = search.crossover(&a, &b);
            search.mutate(&mut child);
            let fit = search.fitness(&child);
            children.push((child, fit));
        }
        pop.extend(children);
        // Stable sort: ties keep parents ahead of children.
        pop.sort_by(|a, b| a.1.total_cmp(&b.1));
        pop.truncate(population);
        generations += 1;
        if pop[0].1 < best - IMPROVEMENT {
            best = pop[0].1;
            stagnant = 0;
        } else {
            stagnant += 1;
        }
    }
    log::debug!(
        "evolutionary search: {generations} generations, {} evaluations, best {best}",
        search.evaluations
    );

    let winner = pop.swap_remove(0).0;
    let mut kept: Vec<(Vec<f64>, f64)> = Vec::new();
    for cf in winner {
        let p = search.probability(&cf);
        if !prep.is_valid(p) {
            continue;
        }
        let (values, p, calls) = revert_changes(&cf, p, &prep.origin, prep.target, model);
        search.evaluations += calls;
        if !kept.iter().any(|(v, _)| *v == values) {
            kept.push((values, p));
        }
    }
    if kept.is_empty() {
        return Err(CfError::NoCounterfactualFound {
            evaluations: search.evaluations,
        });
    }

    let hinges: Vec<f64> = kept.iter().map(|(_, p)| hinge_loss(*p, prep.target)).collect();
    let distances: Vec<f64> = kept
        .iter()
        .map(|(v, _)| prep.metric.distance(v, &prep.origin))
        .collect();
    let refs: Vec<&[f64]> = kept.iter().map(|(v, _)| v.as_slice()).collect();
    let diversity = dpp_diversity(&refs, &prep.metric);
    let objective_value = objective_from_terms(&hinges, &distances, diversity, query.lambda1, query.lambda2);

    let cfs: Vec<_> = kept
        .into_iter()
        .map(|(values, p)| prep.counterfactual(values, p))
        .collect();
    Ok(CounterfactualSet {
        partial: cfs.len() < k,
        query: query.clone(),
        cfs,
        objective_value,
        evaluations_used: search.evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabular::Instance;

    fn rule_model(x: &[f64]) -> f64 {
        // class 1 iff ham01 + ham09 >= 4
        if x[0] + x[8] >= 4.0 {
            0.8
        } else {
            0.2
        }
    }

    #[test]
    fn finds_valid_sparse_counterfactuals() {
        let s = FeatureSchema::hamd17();
        let q = CfQuery::new(Instance(vec![1.0; 17]), 1).with_k(4).with_seed(3);
        let set = generate_diverse_cfs(&q, &rule_model, &s, &[1.0; 17]).unwrap();
        assert!(!set.cfs.is_empty() && set.cfs.len() <= 4);
        for cf in &set.cfs {
            assert!(cf.valid);
            assert!(cf.changed_features().all(|f| f == "ham01" || f == "ham09"));
        }
        assert!(set.evaluations_used <= q.budget + 4 * 17);
    }

    #[test]
    fn everything_immutable_finds_nothing() {
        let s = FeatureSchema::hamd17();
        let names: Vec<String> = s.names().map(String::from).collect();
        let q = CfQuery::new(Instance(vec![1.0; 17]), 1).with_immutable(names);
        assert!(matches!(
            generate_diverse_cfs(&q, &rule_model, &s, &[1.0; 17]),
            Err(CfError::NoCounterfactualFound { .. })
        ));
    }

    #[test]
    fn unreachable_target_reports_failure() {
        let s = FeatureSchema::hamd17();
        let q = CfQuery::new(Instance(vec![1.0; 17]), 1).with_k(3).with_immutable(["ham01", "ham09"]);
        assert!(matches!(
            generate_diverse_cfs(&q, &rule_model, &s, &[1.0; 17]),
            Err(CfError::NoCounterfactualFound { .. })
        ));
    }

    #[test]
    fn continuous_features_stay_in_range() {
        let s = FeatureSchema::new(
            vec![
                crate::tabular::FeatureSpec::continuous("x", -1.0, 1.0),
                crate::tabular::FeatureSpec::ordinal("a", 2),
            ],
            "label",
            "SNRI",
        )
        .unwrap();
        let model = |x: &[f64]| if x[0] > 0.5 { 0.9 } else { 0.1 };
        let q = CfQuery::new(Instance(vec![0.0, 1.0]), 1).with_k(3).with_seed(11);
        let set = generate_diverse_cfs(&q, &model, &s, &[0.5, 1.0]).unwrap();
        for cf in &set.cfs {
            assert!(cf.values[0] > 0.5 && cf.values[0] <= 1.0);
            assert_eq!(cf.values[1], 1.0);
        }
    }
}
