//! First-return times of a sequence into its own n-cylinder, traces of
//! `log(tau_n)/n`, and the Ornstein-Weiss sampling experiment.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::word::{border_array, z_array, SymbolicPrefix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ReturnTime {
    Determined(usize),
    /// No return within the prefix; the true value exceeds `exceeds`.
    Undetermined { exceeds: usize },
}

impl ReturnTime {
    pub fn value(&self) -> Option<usize> {
        match self {
            ReturnTime::Determined(t) => Some(*t),
            ReturnTime::Undetermined { .. } => None,
        }
    }
}

/// Least `k >= 1` with `x_{i+k} = x_i` for `i = 1..n`, using a border-array scan.
pub fn first_return(x: &SymbolicPrefix, n: usize) -> Result<ReturnTime> {
    if n == 0 {
        return Err(Error::domain("n must be at least 1"));
    }
    let s = x.symbols();
    if n >= s.len() {
        return Ok(ReturnTime::Undetermined { exceeds: s.len().saturating_sub(n) });
    }
    let p = &s[..n];
    let border = border_array(p);
    let mut k = 0;
    // scan x_2 x_3 ... for the first occurrence of p
    for (i, &c) in s.iter().enumerate().skip(1) {
        while k > 0 && c != p[k] {
            k = border[k - 1];
        }
        if c == p[k] {
            k += 1;
        }
        if k == n {
            return Ok(ReturnTime::Determined(i + 1 - n));
        }
    }
    Ok(ReturnTime::Undetermined { exceeds: s.len() - n })
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceEntry {
    pub n: usize,
    pub tau: ReturnTime,
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RecurrenceTrace {
    pub prefix_len: usize,
    pub entries: Vec<TraceEntry>,
}

/// `tau_n` for `n = 1..=n_max` in one pass over the Z-array.
pub fn trace(x: &SymbolicPrefix, n_max: usize) -> Result<RecurrenceTrace> {
    if n_max == 0 {
        return Err(Error::domain("n_max must be at least 1"));
    }
    let s = x.symbols();
    let len = s.len();
    let z = z_array(s);
    let mut entries = Vec::with_capacity(n_max);
    let mut k = 1;
    for n in 1..=n_max {
        // tau is non-decreasing in n, so the search position never moves back
        while k < len && z[k] < n {
            k += 1;
        }
        let tau = if k < len && n < len {
            ReturnTime::Determined(k)
        } else {
            ReturnTime::Undetermined { exceeds: len.saturating_sub(n) }
        };
        let ratio = tau.value().map(|t| (t as f64).ln() / n as f64);
        entries.push(TraceEntry { n, tau, ratio });
    }
    Ok(RecurrenceTrace { prefix_len: len, entries })
}

/// Min and max of `log(tau_n)/n` over `n` in `[tail_start, n_max]`.
pub fn rate_bounds(trace: &RecurrenceTrace, tail_start: usize) -> Result<(f64, f64)> {
    let n_max = trace.entries.len();
    if tail_start == 0 || tail_start >= n_max {
        return Err(Error::domain(format!("tail_start must lie in 1..{n_max}")));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for e in &trace.entries[tail_start - 1..] {
        let r = e.ratio.ok_or_else(|| Error::domain(format!("tau_{} undetermined in the tail", e.n)))?;
        lo = lo.min(r);
        hi = hi.max(r);
    }
    Ok((lo, hi))
}

#[derive(Debug, Clone, Serialize)]
pub enum Sampler {
    Bernoulli(Vec<f64>),
    /// Stationary Markov chain with row-stochastic `matrix`.
    Markov(Vec<Vec<f64>>),
}

impl Sampler {
    pub fn alphabet_size(&self) -> usize {
        match self {
            Sampler::Bernoulli(p) => p.len(),
            Sampler::Markov(q) => q.len(),
        }
    }

    fn validate(&self) -> Result<()> {
        let rows: Vec<&Vec<f64>> = match self {
            Sampler::Bernoulli(p) => vec![p],
            Sampler::Markov(q) => {
                if q.iter().any(|r| r.len() != q.len()) {
                    return Err(Error::domain("transition matrix must be square"));
                }
                q.iter().collect()
            }
        };
        if !(2..=256).contains(&self.alphabet_size()) {
            return Err(Error::domain("alphabet must have 2..=256 symbols"));
        }
        for r in rows {
            if r.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) || (r.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return Err(Error::domain("probabilities must be non-negative and sum to 1"));
            }
        }
        Ok(())
    }

    pub fn stationary(&self) -> Vec<f64> {
        match self {
            Sampler::Bernoulli(p) => p.clone(),
            Sampler::Markov(q) => {
                let k = q.len();
                let mut pi = vec![1.0 / k as f64; k];
                for _ in 0..10_000 {
                    let mut next = vec![0.0; k];
                    for (i, row) in q.iter().enumerate() {
                        for (j, &v) in row.iter().enumerate() {
                            next[j] += pi[i] * v;
                        }
                    }
                    // lazy step keeps periodic chains from oscillating
                    let next: Vec<f64> = next.iter().zip(&pi).map(|(a, b)| 0.5 * (a + b)).collect();
                    let diff: f64 = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
                    pi = next;
                    if diff < 1e-15 {
                        break;
                    }
                }
                pi
            }
        }
    }

    /// Entropy rate in nats.
    pub fn entropy(&self) -> f64 {
        let plogp = |p: &[f64]| -p.iter().filter(|&&v| v > 0.0).map(|v| v * v.ln()).sum::<f64>();
        match self {
            Sampler::Bernoulli(p) => plogp(p),
            Sampler::Markov(q) => self.stationary().iter().zip(q).map(|(pi, row)| pi * plogp(row)).sum(),
        }
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng, len: usize) -> Result<Vec<u8>> {
        let bad = |_| Error::domain("degenerate probability vector");
        let mut out = Vec::with_capacity(len);
        match self {
            Sampler::Bernoulli(p) => {
                let d = WeightedIndex::new(p).map_err(bad)?;
                out.extend((0..len).map(|_| d.sample(rng) as u8));
            }
            Sampler::Markov(q) => {
                let rows = q.iter().map(|r| WeightedIndex::new(r).map_err(bad)).collect::<Result<Vec<_>>>()?;
                let init = WeightedIndex::new(self.stationary()).map_err(bad)?;
                let mut cur = init.sample(rng);
                for _ in 0..len {
                    out.push(cur as u8);
                    cur = rows[cur].sample(rng);
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OwSummary {
    pub n: usize,
    pub samples: usize,
    pub horizon: usize,
    pub seed: u64,
    /// Per-sample `log(tau_n)/n`; censored samples hold the lower bound `log(horizon)/n`.
    pub ratios: Vec<f64>,
    pub censored: usize,
    pub median: f64,
    pub mean: f64,
    pub q1: f64,
    pub q3: f64,
    pub entropy: f64,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Sample `num_samples` sequences of length `n + horizon`, one ChaCha8 stream
/// per sample, and collect `log(tau_n)/n`.
pub fn ornstein_weiss_experiment(
    sampler: &Sampler,
    n: usize,
    num_samples: usize,
    horizon: usize,
    seed: u64,
) -> Result<OwSummary> {
    sampler.validate()?;
    if n == 0 || num_samples == 0 || horizon == 0 {
        return Err(Error::domain("n, samples and horizon must be positive"));
    }
    let m = sampler.alphabet_size() as u16;
    let results: Vec<Result<Option<f64>>> = (0..num_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let seq = sampler.sample(&mut rng, n + horizon)?;
            let x = crate::word::Word::new(m, seq)?;
            Ok(match first_return(&x, n)? {
                ReturnTime::Determined(t) => Some((t as f64).ln() / n as f64),
                ReturnTime::Undetermined { .. } => None,
            })
        })
        .collect();
    let mut ratios = Vec::with_capacity(num_samples);
    let mut censored = 0;
    let floor = (horizon as f64).ln() / n as f64;
    for r in results {
        match r? {
            Some(v) => ratios.push(v),
            None => {
                censored += 1;
                ratios.push(floor);
            }
        }
    }
    let mut sorted = ratios.clone();
    sorted.sort_by(f64::total_cmp);
    Ok(OwSummary {
        n,
        samples: num_samples,
        horizon,
        seed,
        censored,
        median: quantile(&sorted, 0.5),
        mean: sorted.iter().sum::<f64>() / sorted.len() as f64,
        q1: quantile(&sorted, 0.25),
        q3: quantile(&sorted, 0.75),
        entropy: sampler.entropy(),
        ratios,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::Word;

    fn naive(x: &[u8], n: usize) -> Option<usize> {
        (1..=x.len().saturating_sub(n)).find(|&k| (0..n).all(|i| x[i + k] == x[i]))
    }

    #[test]
    fn examples() {
        let per = Word::new(2, (0..20).map(|i| (i % 2) as u8).collect()).unwrap();
        assert_eq!(first_return(&per, 2).unwrap(), ReturnTime::Determined(2));
        let zeros = Word::new(2, vec![0; 20]).unwrap();
        assert_eq!(first_return(&zeros, 5).unwrap(), ReturnTime::Determined(1));
        let w = Word::parse(2, "0111").unwrap();
        assert_eq!(first_return(&w, 1).unwrap(), ReturnTime::Undetermined { exceeds: 3 });
        assert!(first_return(&w, 0).is_err());
    }

    #[test]
    fn trace_matches_first_return() {
        let w = Word::parse(3, "0120120010212001201202101").unwrap();
        let tr = trace(&w, 12).unwrap();
        for e in &tr.entries {
            assert_eq!(e.tau, first_return(&w, e.n).unwrap(), "n = {}", e.n);
            assert_eq!(e.tau.value(), naive(w.symbols(), e.n));
        }
    }

    #[test]
    fn rate_bounds_windows() {
        let mk = |r: &[f64]| RecurrenceTrace {
            prefix_len: 0,
            entries: r
                .iter()
                .enumerate()
                .map(|(i, &v)| TraceEntry { n: i + 1, tau: ReturnTime::Determined(1), ratio: Some(v) })
                .collect(),
        };
        assert_eq!(rate_bounds(&mk(&[0.3; 6]), 2).unwrap(), (0.3, 0.3));
        assert_eq!(rate_bounds(&mk(&[9.0, 0.2, 0.7, 0.2, 0.7]), 2).unwrap(), (0.2, 0.7));
        assert!(rate_bounds(&mk(&[0.1, 0.2]), 2).is_err());
    }

    #[test]
    fn degenerate_bernoulli() {
        let s = ornstein_weiss_experiment(&Sampler::Bernoulli(vec![1.0, 0.0]), 8, 10, 50, 1).unwrap();
        assert!(s.ratios.iter().all(|&r| r == 0.0));
        assert_eq!(s.entropy, 0.0);
        assert_eq!(s.censored, 0);
    }

    #[test]
    fn markov_entropy() {
        // golden-mean chain with uniform choices after 0
        let q = Sampler::Markov(vec![vec![0.5, 0.5], vec![1.0, 0.0]]);
        let pi = q.stationary();
        assert!((pi[0] - 2.0 / 3.0).abs() < 1e-9);
        assert!((q.entropy() - (2.0 / 3.0) * 2f64.ln()).abs() < 1e-9);
    }
}
