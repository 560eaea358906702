//! Frequency counting of joint L/R outcomes under a given jump order.
//!
//! Each run samples the first measurement from its Born distribution,
//! applies the selective update for the drawn outcome, then samples the
//! second measurement from the updated state. Run `i` draws from ChaCha
//! stream `i` of the seeded key, so a table depends only on the inputs and
//! the seed, never on how the runs are sharded across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hilbert::{DensityOperator, Factor};
use crate::measurement::{outcome_distribution, selective_update, MeasurementBasis};
use crate::spacetime::OrderTag;
use crate::EPS_PROB;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunConfig {
    pub n_runs: u64,
    pub seed: u64,
    pub order: OrderTag,
}

impl RunConfig {
    pub fn new(n_runs: u64, seed: u64, order: OrderTag) -> Result<Self> {
        if n_runs == 0 {
            return Err(Error::InvalidConfig("n_runs must be at least 1".into()));
        }
        Ok(Self { n_runs, seed, order })
    }
}

/// Joint outcome counts `N_{l r}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTable {
    l_labels: Vec<String>,
    r_labels: Vec<String>,
    /// Row-major over `(l, r)`.
    counts: Vec<u64>,
    n_total: u64,
}

impl CountTable {
    fn empty(l_labels: &[String], r_labels: &[String]) -> Self {
        Self {
            l_labels: l_labels.to_vec(),
            r_labels: r_labels.to_vec(),
            counts: vec![0; l_labels.len() * r_labels.len()],
            n_total: 0,
        }
    }

    fn bump(&mut self, l: usize, r: usize) {
        self.counts[l * self.r_labels.len() + r] += 1;
        self.n_total += 1;
    }

    /// Adds another table over the same labels.
    pub fn merge(&mut self, other: &CountTable) {
        assert_eq!(self.l_labels, other.l_labels, "L labels differ");
        assert_eq!(self.r_labels, other.r_labels, "R labels differ");
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.n_total += other.n_total;
    }

    pub fn n_total(&self) -> u64 {
        self.n_total
    }

    pub fn l_labels(&self) -> &[String] {
        &self.l_labels
    }

    pub fn r_labels(&self) -> &[String] {
        &self.r_labels
    }

    fn l_index(&self, l: &str) -> Result<usize> {
        self.l_labels
            .iter()
            .position(|x| x == l)
            .ok_or_else(|| Error::UnknownLabel(l.to_string()))
    }

    fn r_index(&self, r: &str) -> Result<usize> {
        self.r_labels
            .iter()
            .position(|x| x == r)
            .ok_or_else(|| Error::UnknownLabel(r.to_string()))
    }

    pub fn count(&self, l: &str, r: &str) -> Result<u64> {
        Ok(self.counts[self.l_index(l)? * self.r_labels.len() + self.r_index(r)?])
    }

    /// `N_r = Σ_l N_{l r}`
    pub fn n_r(&self, r: &str) -> Result<u64> {
        let j = self.r_index(r)?;
        Ok((0..self.l_labels.len())
            .map(|i| self.counts[i * self.r_labels.len() + j])
            .sum())
    }

    /// `N_l = Σ_r N_{l r}`
    pub fn n_l(&self, l: &str) -> Result<u64> {
        let i = self.l_index(l)?;
        let w = self.r_labels.len();
        Ok(self.counts[i * w..(i + 1) * w].iter().sum())
    }

    /// `((l, r), N_{l r})` in label order.
    pub fn cells(&self) -> impl Iterator<Item = ((&str, &str), u64)> + '_ {
        let w = self.r_labels.len();
        self.counts
            .iter()
            .enumerate()
            .map(move |(k, &n)| ((self.l_labels[k / w].as_str(), self.r_labels[k % w].as_str()), n))
    }
}

/// Outcome index for uniform `u` by inverse CDF in label order. Outcomes
/// with zero weight are never returned.
fn inverse_cdf(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last = 0;
    for (k, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        last = k;
        acc += p;
        if u < acc {
            return k;
        }
    }
    last
}

struct SamplingPlan {
    first_factor: Factor,
    first: Vec<f64>,
    /// Distribution of the second measurement after each first outcome.
    second: Vec<Vec<f64>>,
}

impl SamplingPlan {
    fn new(rho: &DensityOperator, first: &MeasurementBasis, second: &MeasurementBasis) -> Result<Self> {
        let first_dist: Vec<f64> = outcome_distribution(rho, first)?
            .into_iter()
            .map(|o| if o.probability <= EPS_PROB { 0.0 } else { o.probability })
            .collect();
        let mut second_dist = Vec::with_capacity(first.dim());
        for (label, &p) in first.labels().iter().zip(&first_dist) {
            if p == 0.0 {
                second_dist.push(vec![0.0; second.dim()]);
                continue;
            }
            let after = selective_update(rho, first, label)?;
            second_dist.push(
                outcome_distribution(&after, second)?
                    .into_iter()
                    .map(|o| o.probability)
                    .collect(),
            );
        }
        Ok(Self {
            first_factor: first.factor(),
            first: first_dist,
            second: second_dist,
        })
    }

    /// `(l, r)` indices for one run.
    fn draw(&self, rng: &mut ChaCha8Rng) -> (usize, usize) {
        let a = inverse_cdf(&self.first, rng.random::<f64>());
        let b = inverse_cdf(&self.second[a], rng.random::<f64>());
        match self.first_factor {
            Factor::L => (a, b),
            Factor::R => (b, a),
        }
    }
}

/// Runs the counting experiment on the rayon pool.
pub fn simulate(
    rho0: &DensityOperator,
    l_basis: &MeasurementBasis,
    r_basis: &MeasurementBasis,
    config: RunConfig,
) -> Result<CountTable> {
    let shards = rayon::current_num_threads() * 4;
    simulate_sharded(rho0, l_basis, r_basis, config, shards)
}

/// Same as [`simulate`] with an explicit number of contiguous shards.
pub fn simulate_sharded(
    rho0: &DensityOperator,
    l_basis: &MeasurementBasis,
    r_basis: &MeasurementBasis,
    config: RunConfig,
    shards: usize,
) -> Result<CountTable> {
    if l_basis.factor() != Factor::L || r_basis.factor() != Factor::R {
        return Err(Error::WrongFactor {
            expected: Factor::L,
            got: l_basis.factor(),
        });
    }
    let plan = match config.order {
        OrderTag::LFirst => SamplingPlan::new(rho0, l_basis, r_basis)?,
        OrderTag::RFirst => SamplingPlan::new(rho0, r_basis, l_basis)?,
    };
    let n = config.n_runs;
    let shards = (shards.max(1) as u64).min(n);
    let key = ChaCha8Rng::seed_from_u64(config.seed);
    let empty = CountTable::empty(l_basis.labels(), r_basis.labels());

    let table = (0..shards)
        .into_par_iter()
        .map(|s| {
            let mut local = empty.clone();
            for run in (s * n / shards)..((s + 1) * n / shards) {
                let mut rng = key.clone();
                rng.set_stream(run);
                rng.set_word_pos(0);
                let (l, r) = plan.draw(&mut rng);
                local.bump(l, r);
            }
            local
        })
        .reduce(
            || empty.clone(),
            |mut a, b| {
                a.merge(&b);
                a
            },
        );
    Ok(table)
}

/// `N_{l r} / N_r`
pub fn empirical_conditional(table: &CountTable, l_label: &str, r_label: &str) -> Result<f64> {
    let n_r = table.n_r(r_label)?;
    if n_r == 0 {
        return Err(Error::NoConditionEvents(r_label.to_string()));
    }
    Ok(table.count(l_label, r_label)? as f64 / n_r as f64)
}

/// Standard deviation `√(n p (1 − p))` of a binomial count.
pub fn binomial_sigma(n: u64, p: f64) -> f64 {
    (n as f64 * p * (1.0 - p)).max(0.0).sqrt()
}
