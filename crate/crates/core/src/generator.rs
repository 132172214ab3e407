//! Synthetic frame-based task sets.
//!
//! Task totals come from the RandomFixedSum construction (uniform over the
//! simplex cut by a per-task cap). Every drawn quantity is quantized to
//! `1 / UNITS` so the generated set is exact: totals sum to `M` with no
//! rounding error.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{TaskSet, TaskSpec};
use crate::time::TimeValue;

/// Quantization denominator for every random draw.
pub const UNITS: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub processors: usize,
    pub n_tasks: usize,
    /// Number of semaphores.
    pub z: usize,
    /// Critical-section share of each task's total, drawn per task.
    pub beta_low: f64,
    pub beta_high: f64,
    pub per_task_cap: TimeValue,
    pub seed: u64,
}

impl GenConfig {
    /// `10·M` tasks, cap `1/2`.
    pub fn new(processors: usize, z: usize, beta_low: f64, beta_high: f64, seed: u64) -> Self {
        GenConfig {
            processors,
            n_tasks: 10 * processors,
            z,
            beta_low,
            beta_high,
            per_task_cap: TimeValue::ratio(1, 2),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.processors == 0 || self.n_tasks == 0 || self.z == 0 {
            return Err(Error::Precondition("M, n_tasks and z must be positive".into()));
        }
        let in_unit = |b: f64| (0.0..=1.0).contains(&b);
        if !in_unit(self.beta_low) || !in_unit(self.beta_high) || self.beta_low > self.beta_high {
            return Err(Error::Precondition(format!(
                "need 0 <= beta_low <= beta_high <= 1, got [{}, {}]",
                self.beta_low, self.beta_high
            )));
        }
        Ok(())
    }
}

/// `n` values in `(0, cap]` summing exactly to `total`, seeded.
pub fn random_fixed_sum(n: usize, total: &TimeValue, cap: &TimeValue, seed: u64) -> Result<Vec<TimeValue>> {
    random_fixed_sum_with(n, total, cap, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// [`random_fixed_sum`] drawing from `rng`.
///
/// Values are sampled in floating point, rounded to multiples of `1/UNITS`
/// and clamped to `[1/UNITS, cap]`. The rounding residue is then removed
/// from the last element backwards, never leaving the clamp range.
pub fn random_fixed_sum_with<R: Rng>(
    n: usize,
    total: &TimeValue,
    cap: &TimeValue,
    rng: &mut R,
) -> Result<Vec<TimeValue>> {
    if n == 0 {
        return Err(Error::Infeasible("random_fixed_sum needs n >= 1".into()));
    }
    let total_units = total
        .to_units(UNITS)
        .ok_or_else(|| Error::Infeasible(format!("total {total} is not a multiple of 1/{UNITS}")))?;
    // Largest representable value not above the cap.
    let cap_units = (cap.as_rational() * num_rational::BigRational::from_integer(UNITS.into()))
        .floor()
        .to_integer();
    let cap_units: u64 = u64::try_from(cap_units).map_err(|_| Error::Infeasible(format!("cap {cap} out of range")))?;
    let n_u64 = n as u64;
    if cap_units == 0 || total_units < n_u64 || n_u64.saturating_mul(cap_units) < total_units {
        return Err(Error::Infeasible(format!(
            "cannot draw {n} values in (0, {cap}] summing to {total}"
        )));
    }

    let raw = stafford(n, total_units as f64 / cap_units as f64, rng);
    let mut units: Vec<u64> = raw
        .iter()
        .map(|x| ((x * cap_units as f64).round() as u64).clamp(1, cap_units))
        .collect();
    let sum: u64 = units.iter().sum();
    if sum < total_units {
        let mut missing = total_units - sum;
        for u in units.iter_mut().rev() {
            let add = missing.min(cap_units - *u);
            *u += add;
            missing -= add;
        }
    } else {
        let mut extra = sum - total_units;
        for u in units.iter_mut().rev() {
            let take = extra.min(*u - 1);
            *u -= take;
            extra -= take;
        }
    }
    debug_assert_eq!(units.iter().sum::<u64>(), total_units);
    Ok(units.into_iter().map(|u| TimeValue::from_units(u, UNITS)).collect())
}

/// Stafford's sampler: `n` values in `[0, 1]` summing to `s`, uniformly
/// distributed over that slice of the unit cube.
fn stafford<R: Rng>(n: usize, s: f64, rng: &mut R) -> Vec<f64> {
    let k = (s.floor() as i64).clamp(0, n as i64 - 1) as usize;
    let s = s.clamp(k as f64, k as f64 + 1.0);
    // 1-based working arrays.
    let s1: Vec<f64> = (0..=n).map(|i| s - (k as f64 - i as f64 + 1.0)).collect();
    let s2: Vec<f64> = (0..=n).map(|i| (k + n) as f64 - i as f64 + 1.0 - s).collect();
    let mut w = vec![vec![0.0f64; n + 2]; n + 1];
    w[1][2] = f64::MAX;
    let mut t = vec![vec![0.0f64; n + 2]; n + 1];
    let tiny = f64::from_bits(1);
    for i in 2..=n {
        for j in 1..=i {
            let tmp1 = w[i - 1][j + 1] * s1[j] / i as f64;
            let tmp2 = w[i - 1][j] * s2[n - i + j] / i as f64;
            w[i][j + 1] = tmp1 + tmp2;
            let tmp3 = w[i][j + 1] + tiny;
            t[i - 1][j] = if s2[n - i + j] > s1[j] { tmp2 / tmp3 } else { 1.0 - tmp1 / tmp3 };
        }
    }
    let mut x = vec![0.0f64; n + 1];
    let mut rem = s;
    let mut j = k + 1;
    let mut sm = 0.0;
    let mut pr = 1.0;
    for i in (1..n).rev() {
        let rt: f64 = rng.gen();
        let rs: f64 = rng.gen();
        let e = rt <= t[i][j];
        let sx = rs.powf(1.0 / i as f64);
        sm += (1.0 - sx) * pr * rem / (i + 1) as f64;
        pr *= sx;
        x[n - i] = sm + if e { pr } else { 0.0 };
        if e {
            rem -= 1.0;
            j -= 1;
        }
    }
    x[n] = sm + pr * rem;
    let mut out = x.split_off(1);
    out.shuffle(rng);
    out
}

fn beta_units(b: f64) -> u64 {
    (b * UNITS as f64).round() as u64
}

/// A task set with totals summing to `M`, critical sections a random
/// share of each total, and semaphores spread over the tasks that have a
/// critical section (each of the `z` semaphores used at least once when
/// there are enough such tasks).
pub fn generate_taskset(config: &GenConfig) -> Result<TaskSet> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let totals = random_fixed_sum_with(
        config.n_tasks,
        &TimeValue::from_integer(config.processors as u64),
        &config.per_task_cap,
        &mut rng,
    )?;
    let (lo, hi) = (beta_units(config.beta_low), beta_units(config.beta_high));
    let mut parts = Vec::with_capacity(config.n_tasks);
    for u in &totals {
        let u = u.to_units(UNITS).expect("quantized");
        let beta = rng.gen_range(lo..=hi);
        let a1 = ((u as u128 * beta as u128 + UNITS as u128 / 2) / UNITS as u128) as u64;
        let rest = u - a1.min(u);
        let c1 = rng.gen_range(0..=rest);
        parts.push((c1, a1.min(u), rest - c1));
    }

    let mut holders: Vec<usize> = (0..parts.len()).filter(|&i| parts[i].1 > 0).collect();
    holders.shuffle(&mut rng);
    let mut semaphore = vec![None; parts.len()];
    for (rank, &i) in holders.iter().enumerate() {
        let s = if rank < config.z { rank } else { rng.gen_range(0..config.z) };
        semaphore[i] = Some(format!("s{}", s + 1));
    }

    let specs = parts
        .into_iter()
        .zip(semaphore)
        .map(|((c1, a1, c2), sem)| {
            TaskSpec::new(
                TimeValue::from_units(c1, UNITS),
                TimeValue::from_units(a1, UNITS),
                TimeValue::from_units(c2, UNITS),
                sem.as_deref(),
            )
        })
        .collect();
    TaskSet::from_specs(specs, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::total_work;

    #[test]
    fn forced_single_value() {
        let v = random_fixed_sum(1, &TimeValue::ratio(2, 5), &TimeValue::ratio(1, 2), 7).unwrap();
        assert_eq!(v, vec![TimeValue::ratio(2, 5)]);
    }

    #[test]
    fn exact_sum_and_cap() {
        let cap = TimeValue::ratio(1, 2);
        for seed in 0..20 {
            let v = random_fixed_sum(80, &TimeValue::from_integer(8), &cap, seed).unwrap();
            assert_eq!(v.len(), 80);
            assert_eq!(v.iter().cloned().sum::<TimeValue>(), TimeValue::from_integer(8));
            assert!(v.iter().all(|x| x.is_positive() && *x <= cap));
        }
    }

    #[test]
    fn tight_sum_hits_cap_everywhere() {
        let cap = TimeValue::ratio(1, 2);
        let v = random_fixed_sum(4, &TimeValue::from_integer(2), &cap, 1).unwrap();
        assert!(v.iter().all(|x| *x == cap));
    }

    #[test]
    fn deterministic_per_seed() {
        let cap = TimeValue::ratio(1, 2);
        let a = random_fixed_sum(30, &TimeValue::from_integer(4), &cap, 99).unwrap();
        let b = random_fixed_sum(30, &TimeValue::from_integer(4), &cap, 99).unwrap();
        let c = random_fixed_sum(30, &TimeValue::from_integer(4), &cap, 100).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn infeasible_parameters() {
        let cap = TimeValue::ratio(1, 2);
        assert!(random_fixed_sum(3, &TimeValue::from_integer(2), &cap, 0).is_err());
        assert!(random_fixed_sum(0, &TimeValue::from_integer(1), &cap, 0).is_err());
        assert!(random_fixed_sum(2, &TimeValue::ratio(1, 3), &cap, 0).is_err());
    }

    #[test]
    fn stafford_is_roughly_uniform() {
        // Uniform over {x in [0,1]^3 : sum = 1}: each coordinate has mean 1/3.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut mean = [0.0; 3];
        let trials = 20_000;
        for _ in 0..trials {
            let x = stafford(3, 1.0, &mut rng);
            assert!((x.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            for (m, v) in mean.iter_mut().zip(&x) {
                *m += v / trials as f64;
            }
        }
        assert!(mean.iter().all(|m| (m - 1.0 / 3.0).abs() < 0.01), "{mean:?}");
    }

    #[test]
    fn taskset_properties() {
        for seed in 0..10 {
            let cfg = GenConfig::new(4, 4, 0.1, 0.4, seed);
            let ts = generate_taskset(&cfg).unwrap();
            assert_eq!(ts.len(), 40);
            assert_eq!(total_work(&ts), TimeValue::from_integer(4));
            assert!(ts.tasks().iter().all(|t| t.total() <= cfg.per_task_cap));
            assert_eq!(ts.z(), 4);
            assert_eq!(ts, generate_taskset(&cfg).unwrap());
        }
    }

    #[test]
    fn zero_beta_means_no_semaphores() {
        let ts = generate_taskset(&GenConfig::new(2, 4, 0.0, 0.0, 3)).unwrap();
        assert_eq!(ts.z(), 0);
        assert!(ts.tasks().iter().all(|t| t.a1.is_zero() && t.semaphore.is_none()));
    }

    #[test]
    fn single_semaphore_shared_by_all() {
        let ts = generate_taskset(&GenConfig::new(2, 1, 0.2, 0.2, 3)).unwrap();
        assert_eq!(ts.z(), 1);
        assert!(ts.tasks().iter().all(|t| t.semaphore.is_some()));
    }
}
