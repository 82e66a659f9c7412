//! Discrete power-law fitting: maximum likelihood exponent, KS-based
//! selection of the lower cutoff and the semi-parametric bootstrap test.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_REPS: usize = 1000;

/// Below this tail size a fit is reported as low confidence.
pub const LOW_CONFIDENCE_TAIL: usize = 50;

const GAMMA_LO: f64 = 1.0001;
const GAMMA_HI: f64 = 6.0;
const GAMMA_TOL: f64 = 1e-4;

/// Even Bernoulli numbers B2..B18 divided by (2j)!.
const BERNOULLI_OVER_FACTORIAL: [f64; 9] = [
    1.0 / 6.0 / 2.0,
    -1.0 / 30.0 / 24.0,
    1.0 / 42.0 / 720.0,
    -1.0 / 30.0 / 40320.0,
    5.0 / 66.0 / 3628800.0,
    -691.0 / 2730.0 / 479001600.0,
    7.0 / 6.0 / 87178291200.0,
    -3617.0 / 510.0 / 20922789888000.0,
    43867.0 / 798.0 / 6402373705728000.0,
];

/// Shift used before switching to the Euler–Maclaurin tail.
const EM_SHIFT: f64 = 15.0;

/// Hurwitz zeta `ζ(s, a) = Σ_{k≥0} (a + k)^{-s}` for `s > 1`, `a > 0`.
pub fn hurwitz_zeta(s: f64, a: f64) -> f64 {
    debug_assert!(s > 1.0 && a > 0.0);
    let mut sum = 0.0;
    let mut b = a;
    while b < EM_SHIFT {
        sum += b.powf(-s);
        b += 1.0;
    }
    let b_pow = b.powf(-s);
    sum += b * b_pow / (s - 1.0) + 0.5 * b_pow;
    // Σ B_2j/(2j)! · s(s+1)…(s+2j-2) · b^{-s-2j+1}
    let inv_b2 = 1.0 / (b * b);
    let mut rising = s;
    let mut power = b_pow / b;
    for (j, coef) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        sum += coef * rising * power;
        let m = 2.0 * j as f64;
        rising *= (s + m + 1.0) * (s + m + 2.0);
        power *= inv_b2;
    }
    sum
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PowerLawFit {
    pub gamma: f64,
    pub x_min: u64,
    pub ks: f64,
    pub n_tail: usize,
    pub n: usize,
    pub p_value: Option<f64>,
    pub low_confidence: bool,
}

/// Sorted distinct values with counts plus suffix aggregates.
struct Prepared {
    values: Vec<u64>,
    counts: Vec<usize>,
    /// Samples with value >= values[i].
    tail_n: Vec<usize>,
    /// Σ ln x over samples with value >= values[i].
    tail_ln: Vec<f64>,
    n: usize,
}

impl Prepared {
    fn new(sample: &[u64]) -> Result<Self> {
        if sample.is_empty() {
            return Err(Error::DegenerateSample("empty sample".into()));
        }
        if sample.contains(&0) {
            return Err(Error::DegenerateSample(
                "power-law samples must be positive integers".into(),
            ));
        }
        let mut sorted = sample.to_vec();
        sorted.sort_unstable();
        let mut values = Vec::new();
        let mut counts: Vec<usize> = Vec::new();
        for &x in &sorted {
            if values.last() == Some(&x) {
                *counts.last_mut().unwrap() += 1;
            } else {
                values.push(x);
                counts.push(1);
            }
        }
        if values.len() < 2 {
            return Err(Error::DegenerateSample(format!(
                "all {} values equal {}",
                sample.len(),
                values[0]
            )));
        }
        let d = values.len();
        let mut tail_n = vec![0; d];
        let mut tail_ln = vec![0.0; d];
        let mut acc_n = 0;
        let mut acc_ln = 0.0;
        for i in (0..d).rev() {
            acc_n += counts[i];
            acc_ln += counts[i] as f64 * (values[i] as f64).ln();
            tail_n[i] = acc_n;
            tail_ln[i] = acc_ln;
        }
        Ok(Prepared {
            values,
            counts,
            tail_n,
            tail_ln,
            n: sample.len(),
        })
    }

    fn fit_at(&self, c: usize) -> (f64, f64) {
        let x_min = self.values[c] as f64;
        let n = self.tail_n[c] as f64;
        let mean_ln = self.tail_ln[c] / n;
        let gamma = mle_gamma(x_min, mean_ln);
        (gamma, self.ks_at(c, gamma))
    }

    fn ks_at(&self, c: usize, gamma: f64) -> f64 {
        let x_min = self.values[c];
        let norm = hurwitz_zeta(gamma, x_min as f64);
        let n_tail = self.tail_n[c] as f64;
        let mut cum = 0usize;
        let mut ks = 0.0f64;
        // ζ(γ, x) tracked by recurrence across short gaps.
        let mut zeta_x = norm;
        let mut at = x_min;
        let mut since_anchor = 0;
        for j in c..self.values.len() {
            let v = self.values[j];
            let gap = v - at;
            if gap > 0 {
                if gap <= 8 && since_anchor < 64 {
                    for x in at..v {
                        zeta_x -= (x as f64).powf(-gamma);
                    }
                    since_anchor += gap as usize;
                } else {
                    zeta_x = hurwitz_zeta(gamma, v as f64);
                    since_anchor = 0;
                }
                at = v;
            }
            let surv = zeta_x / norm;
            let emp_before = cum as f64 / n_tail;
            ks = ks.max((emp_before - (1.0 - surv)).abs());
            cum += self.counts[j];
            let surv_after = (zeta_x - (v as f64).powf(-gamma)) / norm;
            let emp_after = cum as f64 / n_tail;
            ks = ks.max((emp_after - (1.0 - surv_after)).abs());
        }
        ks.min(1.0)
    }

    /// Candidate cutoffs: distinct values whose tail holds at least two
    /// distinct values.
    fn candidates(&self) -> std::ops::Range<usize> {
        0..self.values.len() - 1
    }
}

/// Maximizes `-ln ζ(γ, x_min) - γ · mean_ln` by golden-section search.
fn mle_gamma(x_min: f64, mean_ln: f64) -> f64 {
    let objective = |g: f64| -hurwitz_zeta(g, x_min).ln() - g * mean_ln;
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (GAMMA_LO, GAMMA_HI);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = objective(x1);
    let mut f2 = objective(x2);
    while hi - lo > GAMMA_TOL {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = objective(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = objective(x1);
        }
    }
    0.5 * (lo + hi)
}

/// Exponent estimate for a fixed cutoff: only samples `>= x_min` are used.
pub fn fit_fixed_xmin(sample: &[u64], x_min: u64) -> Result<PowerLawFit> {
    let prepared = Prepared::new(sample)?;
    let c = prepared
        .values
        .iter()
        .position(|&v| v >= x_min)
        .ok_or_else(|| Error::DegenerateSample(format!("no samples at or above {x_min}")))?;
    if c + 1 >= prepared.values.len() {
        return Err(Error::DegenerateSample(format!(
            "tail above {x_min} has a single distinct value"
        )));
    }
    Ok(finish(&prepared, c))
}

/// Per-candidate `(x_min, gamma, ks)` scan, exposed for diagnostics and tests.
pub fn scan_xmin(sample: &[u64]) -> Result<Vec<(u64, f64, f64)>> {
    let p = Prepared::new(sample)?;
    Ok(p.candidates()
        .map(|c| {
            let (g, ks) = p.fit_at(c);
            (p.values[c], g, ks)
        })
        .collect())
}

fn finish(p: &Prepared, c: usize) -> PowerLawFit {
    let (gamma, ks) = p.fit_at(c);
    PowerLawFit {
        gamma,
        x_min: p.values[c],
        ks,
        n_tail: p.tail_n[c],
        n: p.n,
        p_value: None,
        low_confidence: p.tail_n[c] < LOW_CONFIDENCE_TAIL,
    }
}

/// Fits a discrete power law, choosing `x_min` among the distinct sample
/// values by minimum KS distance (first minimum on ties).
pub fn fit_power_law(sample: &[u64]) -> Result<PowerLawFit> {
    let p = Prepared::new(sample)?;
    let mut best: Option<(usize, f64, f64)> = None;
    for c in p.candidates() {
        let (gamma, ks) = p.fit_at(c);
        if best.is_none_or(|(_, _, b)| ks < b) {
            best = Some((c, gamma, ks));
        }
    }
    let (c, gamma, ks) = best.expect("at least one candidate");
    Ok(PowerLawFit {
        gamma,
        x_min: p.values[c],
        ks,
        n_tail: p.tail_n[c],
        n: p.n,
        p_value: None,
        low_confidence: p.tail_n[c] < LOW_CONFIDENCE_TAIL,
    })
}

/// Inverse-CDF sampler for `P(X = x) ∝ x^{-γ}`, `x >= x_min`.
#[derive(Clone, Debug)]
pub struct DiscretePowerLaw {
    gamma: f64,
    x_min: u64,
    norm: f64,
    /// survival[i] = P(X >= x_min + i)
    survival: Vec<f64>,
}

const SAMPLER_TABLE: usize = 4096;
const SAMPLER_CAP: u64 = 1 << 53;

impl DiscretePowerLaw {
    pub fn new(gamma: f64, x_min: u64) -> Result<Self> {
        if !(gamma > 1.0 && gamma.is_finite()) || x_min == 0 {
            return Err(Error::Config(format!(
                "power law needs gamma > 1 and x_min >= 1 (got {gamma}, {x_min})"
            )));
        }
        let norm = hurwitz_zeta(gamma, x_min as f64);
        let mut survival = Vec::with_capacity(SAMPLER_TABLE);
        let mut z = norm;
        for i in 0..SAMPLER_TABLE as u64 {
            survival.push(z / norm);
            z -= ((x_min + i) as f64).powf(-gamma);
        }
        Ok(DiscretePowerLaw {
            gamma,
            x_min,
            norm,
            survival,
        })
    }

    pub fn survival(&self, x: u64) -> f64 {
        if x <= self.x_min {
            return 1.0;
        }
        let i = (x - self.x_min) as usize;
        if i < self.survival.len() {
            self.survival[i]
        } else {
            hurwitz_zeta(self.gamma, x as f64) / self.norm
        }
    }

    /// Largest `x` with `P(X >= x) >= u`, for `u` in (0, 1].
    pub fn quantile(&self, u: f64) -> u64 {
        let last = *self.survival.last().unwrap();
        if u > last {
            // survival is decreasing: count entries >= u
            let k = self.survival.partition_point(|&s| s >= u);
            return self.x_min + k as u64 - 1;
        }
        let mut lo = self.x_min + self.survival.len() as u64 - 1;
        let mut hi = lo.saturating_mul(2);
        while self.survival(hi) >= u {
            if hi >= SAMPLER_CAP {
                return SAMPLER_CAP;
            }
            lo = hi;
            hi = hi.saturating_mul(2).min(SAMPLER_CAP);
        }
        // survival(lo) >= u > survival(hi)
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if self.survival(mid) >= u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let u = 1.0 - rng.random::<f64>();
        self.quantile(u)
    }
}

/// Independent stream for replicate `index` of a run seeded with `seed`.
pub fn replicate_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Semi-parametric bootstrap p-value: the fraction of synthetic replicates
/// whose refitted KS distance is at least the observed one.
pub fn gof_pvalue(sample: &[u64], fit: &PowerLawFit, reps: usize, seed: u64) -> Result<f64> {
    if reps < 1 {
        return Err(Error::Config("bootstrap needs at least one repetition".into()));
    }
    let below: Vec<u64> = sample.iter().copied().filter(|&x| x < fit.x_min).collect();
    let n = sample.len();
    let p_below = below.len() as f64 / n as f64;
    let model = DiscretePowerLaw::new(fit.gamma, fit.x_min)?;

    let exceed: usize = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_rng(seed, r as u64);
            let synthetic: Vec<u64> = (0..n)
                .map(|_| {
                    if !below.is_empty() && rng.random::<f64>() < p_below {
                        below[rng.random_range(0..below.len())]
                    } else {
                        model.sample(&mut rng)
                    }
                })
                .collect();
            // A replicate that cannot be refitted counts against rejection.
            match fit_power_law(&synthetic) {
                Ok(refit) => usize::from(refit.ks >= fit.ks),
                Err(_) => 1,
            }
        })
        .sum();
    Ok(exceed as f64 / reps as f64)
}
