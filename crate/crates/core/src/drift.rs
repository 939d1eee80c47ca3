//! The rescaled potential `g(P) = min{n^{ℓ(P)}, g_max}` used for the
//! (μ,λ) EA lower bound, frozen-population drift probes, and an exact
//! Markov-chain oracle for the (1+1) EA on OneMax-level objectives.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::benchmarks::{Fitness, Objective};
use crate::bitstring::{derive_seed, BitString, RandomSource};
use crate::engine::{one_generation, EAConfig, Population, Selection, TrajectoryPoint};
use crate::error::{Error, Result};
use crate::stats::{compensated_sum, Moments};
use crate::theory::{self, h_comma};

/// Largest dimension accepted by [`exact_hitting_time`].
pub const MAX_ORACLE_N: usize = 14;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialParams {
    pub n: usize,
    pub k: usize,
    pub lambda: usize,
    pub c: f64,
    pub big_c: f64,
    /// `h(n,λ)`.
    pub h: f64,
    /// `(1 - h(n,λ)) / (λ p_k)`.
    pub g_max: f64,
    /// Smallest `L in [1..k]` with `n^L >= g_max`.
    pub k_star: usize,
}

impl PotentialParams {
    pub fn new(n: usize, k: usize, lambda: usize, c: f64, big_c: f64) -> Result<Self> {
        if k < 2 || k > n {
            return Err(Error::Domain(format!("potential needs k in [2..n] (n={n}, k={k})")));
        }
        if lambda == 0 || !(c > 0.0) {
            return Err(Error::Domain(format!(
                "potential needs lambda >= 1 and c > 0 (lambda={lambda}, c={c})"
            )));
        }
        let h = h_comma(n as f64, lambda as f64, c);
        let g_max = theory::g_max(n as u64, k as u64, lambda as u64, c);
        let k_star = theory::k_star(n as u64, k as u64, g_max)
            .ok_or_else(|| Error::Precondition(format!("g_max = {g_max} is not positive: h(n,lambda) = {h} >= 1")))?
            as usize;
        Ok(Self {
            n,
            k,
            lambda,
            c,
            big_c,
            h,
            g_max,
            k_star,
        })
    }

    /// Parameters with a prescribed `g_max`, for probing the potential
    /// itself independently of `h(n,λ)`.
    pub fn with_g_max(n: usize, k: usize, lambda: usize, g_max: f64) -> Result<Self> {
        if k < 2 || k > n || !(g_max > 0.0) {
            return Err(Error::Domain(format!(
                "need k in [2..n] and g_max > 0 (n={n}, k={k}, g_max={g_max})"
            )));
        }
        let k_star = theory::k_star(n as u64, k as u64, g_max).unwrap_or(k as u64) as usize;
        Ok(Self {
            n,
            k,
            lambda,
            c: f64::NAN,
            big_c: f64::NAN,
            h: f64::NAN,
            g_max,
            k_star,
        })
    }

    /// `g(L) = min{n^L, g_max}` with `g(0) = 0`.
    pub fn potential_of_level(&self, level: usize) -> f64 {
        if level == 0 {
            0.0
        } else {
            (self.n as f64).powi(level as i32).min(self.g_max)
        }
    }

    pub fn level_of_onemax(&self, om: usize) -> usize {
        om.saturating_sub(self.n - self.k)
    }
}

/// `ℓ(x) = max{0, OM(x) - (n-k)}`.
pub fn individual_level(x: &BitString, n: usize, k: usize) -> usize {
    debug_assert!(k <= n && x.len() == n);
    x.onemax().saturating_sub(n - k)
}

/// `ℓ(P)`, the largest individual level.
pub fn population_level(pop: &[BitString], n: usize, k: usize) -> usize {
    pop.iter().map(|x| individual_level(x, n, k)).max().unwrap_or(0)
}

/// `g(P) = g(ℓ(P))`.
pub fn potential(pop: &[BitString], params: &PotentialParams) -> f64 {
    params.potential_of_level(population_level(pop, params.n, params.k))
}

/// Fills in `level` and `potential` from each point's `max_onemax`.
pub fn annotate_trajectory(points: &mut [TrajectoryPoint], params: &PotentialParams) {
    for p in points {
        let level = params.level_of_onemax(p.max_onemax);
        p.level = Some(level);
        p.potential = Some(params.potential_of_level(level));
    }
}

/// A uniformly random string with exactly `om` one-bits.
pub fn random_with_onemax<R: Rng + ?Sized>(n: usize, om: usize, rng: &mut R) -> BitString {
    assert!(om <= n, "OneMax value {om} exceeds n={n}");
    let mut idx: Vec<usize> = (0..n).collect();
    let (chosen, _) = idx.partial_shuffle(rng, om);
    let mut x = BitString::zeros(n);
    for &i in chosen.iter() {
        x.set(i, true);
    }
    x
}

/// `μ` independent individuals with OneMax value `om`.
pub fn population_with_onemax<R: Rng + ?Sized>(n: usize, mu: usize, om: usize, rng: &mut R) -> Population {
    Population::new((0..mu).map(|_| random_with_onemax(n, om, rng)).collect())
}

/// Worst-case population for start level `level`: every individual at
/// `OM = n - k + level`, so level 0 is the local optimum of `jump_{nk}`.
pub fn population_at_level<R: Rng + ?Sized>(
    params: &PotentialParams,
    mu: usize,
    level: usize,
    rng: &mut R,
) -> Result<Population> {
    if level >= params.k {
        return Err(Error::Precondition(format!(
            "start level {level} must be below k={} (level k is the optimum)",
            params.k
        )));
    }
    Ok(population_with_onemax(params.n, mu, params.n - params.k + level, rng))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionSample {
    pub start_level: usize,
    pub end_level: usize,
    pub g_before: f64,
    pub g_after: f64,
}

/// Frequency with its binomial standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Frequency {
    pub count: u64,
    pub frequency: f64,
    pub sem: f64,
}

impl Frequency {
    fn new(count: u64, total: u64) -> Self {
        let p = count as f64 / total as f64;
        Self {
            count,
            frequency: p,
            sem: (p * (1.0 - p) / total as f64).sqrt(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftEstimate {
    pub samples: u64,
    pub start_level: usize,
    pub g_before: f64,
    /// Mean of `g(P″) - g(P)`.
    pub mean_delta: f64,
    pub sem: f64,
    /// Counts of `ℓ(P″)` for levels `0..=k`.
    pub level_histogram: Vec<u64>,
    /// `Pr[ℓ(P″) = ℓ(P)]`.
    pub stay: Frequency,
    /// `Pr[ℓ(P″) = ℓ(P) + d]`, entry `d-1`, for `ℓ(P) + d <= k`.
    pub gain: Vec<Frequency>,
    /// True when `g(P) = g_max` already, so no increase is possible.
    pub saturated: bool,
}

/// One-generation transitions from the fixed population `pop`, each with its
/// own random stream derived from `seed` and the sample index.
pub fn sample_transitions(
    pop: &[BitString],
    config: &EAConfig,
    f: &Objective,
    params: &PotentialParams,
    samples: u64,
    seed: u64,
) -> Result<Vec<TransitionSample>> {
    check_probe(pop, config, f, params, samples)?;
    let start_level = population_level(pop, params.n, params.k);
    let g_before = params.potential_of_level(start_level);
    (0..samples)
        .into_par_iter()
        .map(|s| {
            let mut rng = RandomSource::new(derive_seed(seed, &[s]));
            let t = one_generation(pop, f, config, &mut rng)?;
            let end_level = population_level(&t.next, params.n, params.k);
            Ok(TransitionSample {
                start_level,
                end_level,
                g_before,
                g_after: params.potential_of_level(end_level),
            })
        })
        .collect()
}

fn check_probe(
    pop: &[BitString],
    config: &EAConfig,
    f: &Objective,
    params: &PotentialParams,
    samples: u64,
) -> Result<()> {
    let fail = |m: String| Err(Error::Precondition(m));
    if samples == 0 {
        return fail("drift probe needs at least one sample".into());
    }
    if config.selection != Selection::Comma {
        return fail("drift probe needs comma selection".into());
    }
    if f.jump_k() != Some(params.k) || f.n() != params.n || config.n != params.n {
        return fail(format!(
            "objective {f:?} and config n={} do not match potential (n={}, k={})",
            config.n, params.n, params.k
        ));
    }
    if config.lambda != params.lambda {
        return fail(format!(
            "config lambda={} differs from potential lambda={}",
            config.lambda, params.lambda
        ));
    }
    if pop.iter().any(|x| f.is_optimum(x)) {
        return fail("start population contains the optimum".into());
    }
    Ok(())
}

/// Monte Carlo estimate of `E[g(P″) - g(P)]` and of the level-transition
/// law from the frozen population `pop` under comma selection.
pub fn estimate_drift(
    pop: &[BitString],
    config: &EAConfig,
    f: &Objective,
    params: &PotentialParams,
    samples: u64,
    seed: u64,
) -> Result<DriftEstimate> {
    let ts = sample_transitions(pop, config, f, params, samples, seed)?;
    let start_level = population_level(pop, params.n, params.k);
    let g_before = params.potential_of_level(start_level);
    let deltas: Vec<f64> = ts.iter().map(|t| t.g_after - t.g_before).collect();
    let m = Moments::of(&deltas).expect("samples >= 1");
    let mut level_histogram = vec![0u64; params.k + 1];
    for t in &ts {
        level_histogram[t.end_level] += 1;
    }
    let gain = (1..=params.k - start_level)
        .map(|d| Frequency::new(level_histogram[start_level + d], samples))
        .collect();
    Ok(DriftEstimate {
        samples,
        start_level,
        g_before,
        mean_delta: m.mean,
        sem: m.sem,
        stay: Frequency::new(level_histogram[start_level], samples),
        level_histogram,
        gain,
        saturated: g_before >= params.g_max,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PersistenceEstimate {
    pub samples: u64,
    /// Fraction of transitions after which every parent is at least as fit
    /// as the local optimum.
    pub persistence: Frequency,
    /// `1 - exp(-(δ/(1+δ))² λ / (2e²))`.
    pub bound: f64,
}

/// Starting from an almost perfect population (all parents on the local
/// optimum of `jump_{nk}`), estimates how often the next population is again
/// almost perfect.
pub fn almost_perfect_persistence(
    config: &EAConfig,
    f: &Objective,
    delta: f64,
    samples: u64,
    seed: u64,
) -> Result<PersistenceEstimate> {
    let k = f
        .jump_k()
        .ok_or_else(|| Error::Precondition("persistence probe needs a jump objective".into()))?;
    if config.selection != Selection::Comma || samples == 0 {
        return Err(Error::Precondition(
            "persistence probe needs comma selection and samples >= 1".into(),
        ));
    }
    let n = f.n();
    let local_opt_fitness = n as i64;
    let mut rng = RandomSource::new(derive_seed(seed, &[u64::MAX]));
    let pop = population_with_onemax(n, config.mu, n - k, &mut rng);
    let kept: u64 = (0..samples)
        .into_par_iter()
        .map(|s| {
            let mut rng = RandomSource::new(derive_seed(seed, &[s]));
            let t = one_generation(&pop, f, config, &mut rng)?;
            Ok(u64::from(t.next_fitness.iter().all(|&v| v >= local_opt_fitness)))
        })
        .sum::<Result<u64>>()?;
    let e2 = std::f64::consts::E * std::f64::consts::E;
    Ok(PersistenceEstimate {
        samples,
        persistence: Frequency::new(kept, samples),
        bound: 1.0 - (-(delta / (1.0 + delta)).powi(2) * config.lambda as f64 / (2.0 * e2)).exp(),
    })
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (1..=k).fold(1.0, |acc, i| acc * (n - k + i) as f64 / i as f64)
}

/// `K[i][j] = Pr[OM(y) = j | OM(x) = i]` for standard bit mutation with the
/// given rate.
pub fn mutation_kernel(n: usize, rate: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n + 1, n + 1, |i, j| {
        // b one-bits flipped to zero, a = j - i + b zero-bits flipped to one
        compensated_sum((0..=i).filter_map(|b| {
            let a = j as isize - i as isize + b as isize;
            if a < 0 || a as usize > n - i {
                return None;
            }
            let flips = a as usize + b;
            Some(
                binomial(i, b)
                    * binomial(n - i, a as usize)
                    * rate.powi(flips as i32)
                    * (1.0 - rate).powi((n - flips) as i32),
            )
        }))
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactHittingTime {
    pub n: usize,
    /// Expected evaluations from a uniform initial point, counting the
    /// initial evaluation.
    pub expected: f64,
    /// Expected further iterations from each OneMax level (0 for optima).
    pub from_level: Vec<f64>,
}

/// Expected runtime of the (1+1) EA with rate `1/n` that accepts offspring of
/// equal or better fitness, solved exactly on the OneMax-level chain.
///
/// Needs an objective whose fitness depends only on `OM(x)`.
pub fn exact_hitting_time(f: &Objective) -> Result<ExactHittingTime> {
    let n = f.n();
    if n > MAX_ORACLE_N {
        return Err(Error::Domain(format!(
            "exact oracle limited to n <= {MAX_ORACLE_N}, got {n}"
        )));
    }
    let fit: Vec<i64> = (0..=n)
        .map(|om| f.onemax_profile(om))
        .collect::<Option<_>>()
        .ok_or_else(|| Error::Domain(format!("{f:?} is not a function of OneMax")))?;
    let opt = f.optimum_fitness();
    let kernel = mutation_kernel(n, 1.0 / n as f64);
    let transient: Vec<usize> = (0..=n).filter(|&i| fit[i] != opt).collect();
    let pos = |s: usize| transient.iter().position(|&t| t == s);
    let size = transient.len();

    // (I - Q) t = 1 over transient levels; rejected moves stay put.
    let mut a = DMatrix::<f64>::identity(size, size);
    for (r, &i) in transient.iter().enumerate() {
        let mut stay = 0.0;
        for j in 0..=n {
            let p = kernel[(i, j)];
            if fit[j] >= fit[i] {
                if let Some(cidx) = pos(j) {
                    a[(r, cidx)] -= p;
                }
            } else {
                stay += p;
            }
        }
        a[(r, r)] -= stay;
    }
    let t = a
        .lu()
        .solve(&DVector::from_element(size, 1.0))
        .ok_or_else(|| Error::Domain("level chain has no absorbing path".into()))?;

    let mut from_level = vec![0.0; n + 1];
    for (r, &i) in transient.iter().enumerate() {
        from_level[i] = t[r];
    }
    let scale = (n as f64).exp2();
    let expected = 1.0 + compensated_sum((0..=n).map(|i| binomial(n, i) / scale * from_level[i]));
    Ok(ExactHittingTime {
        n,
        expected,
        from_level,
    })
}
