//! Streaming ensemble statistics: one-pass central moments up to order four
//! with exact pairwise merging, exact medians, and uniform histograms.

use serde::{Deserialize, Serialize};

/// One-pass accumulator of count, mean and central sums M2..M4, mergeable so
/// worker partials combine into the same result as a single pass.
#[derive(Debug, Clone, Copy, Default)]
pub struct MomentAccumulator {
    n: u64,
    mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

impl MomentAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        let n1 = self.n as f64;
        self.n += 1;
        let n = self.n as f64;
        let delta = x - self.mean;
        let delta_n = delta / n;
        let delta_n2 = delta_n * delta_n;
        let term1 = delta * delta_n * n1;
        self.mean += delta_n;
        self.m4 += term1 * delta_n2 * (n * n - 3.0 * n + 3.0)
            + 6.0 * delta_n2 * self.m2
            - 4.0 * delta_n * self.m3;
        self.m3 += term1 * delta_n * (n - 2.0) - 3.0 * delta_n * self.m2;
        self.m2 += term1;
    }

    /// Pairwise merge (Pebay update formulas).
    pub fn merge(&self, other: &MomentAccumulator) -> MomentAccumulator {
        if other.n == 0 {
            return *self;
        }
        if self.n == 0 {
            return *other;
        }
        let (na, nb) = (self.n as f64, other.n as f64);
        let n = na + nb;
        let delta = other.mean - self.mean;
        let delta2 = delta * delta;
        let mean = self.mean + delta * nb / n;
        let m2 = self.m2 + other.m2 + delta2 * na * nb / n;
        let m3 = self.m3
            + other.m3
            + delta * delta2 * na * nb * (na - nb) / (n * n)
            + 3.0 * delta * (na * other.m2 - nb * self.m2) / n;
        let m4 = self.m4
            + other.m4
            + delta2 * delta2 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n)
            + 6.0 * delta2 * (na * na * other.m2 + nb * nb * self.m2) / (n * n)
            + 4.0 * delta * (na * other.m3 - nb * self.m3) / n;
        MomentAccumulator {
            n: self.n + other.n,
            mean,
            m2,
            m3,
            m4,
        }
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Population variance m2.
    pub fn variance(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.m2 / self.n as f64
        }
    }

    /// Standardized skewness m3 / m2^(3/2).
    pub fn skewness(&self) -> f64 {
        let n = self.n as f64;
        let m2 = self.m2 / n;
        if m2 <= 0.0 {
            return 0.0;
        }
        (self.m3 / n) / m2.powf(1.5)
    }

    /// Standardized kurtosis m4 / m2^2 (not excess).
    pub fn kurtosis(&self) -> f64 {
        let n = self.n as f64;
        let m2 = self.m2 / n;
        if m2 <= 0.0 {
            return 0.0;
        }
        (self.m4 / n) / (m2 * m2)
    }
}

/// Summary of one scalar field over the ensemble. Serialized keys are fixed
/// so downstream scripts can rely on them.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SummaryStats {
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub kurtosis: f64,
    pub median: f64,
    pub fraction_above: f64,
    pub n: u64,
}

/// Exact median by selection on a copy of the values; even counts take the
/// midpoint of the two central order statistics.
pub fn exact_median(values: &[f64]) -> f64 {
    assert!(!values.is_empty());
    let mut v = values.to_vec();
    let n = v.len();
    let mid = n / 2;
    let (_, upper, _) = v.select_nth_unstable_by(mid, |a, b| a.partial_cmp(b).unwrap());
    let upper = *upper;
    if n % 2 == 1 {
        upper
    } else {
        let (_, lower, _) = v.select_nth_unstable_by(mid - 1, |a, b| a.partial_cmp(b).unwrap());
        (*lower + upper) / 2.0
    }
}

/// Summarize values with a deterministic chunked merge of the streaming
/// accumulator (chunk order is fixed, so worker count cannot change the
/// result).
pub fn summarize_values(values: &[f64], threshold: f64) -> SummaryStats {
    assert!(!values.is_empty());
    let acc = values
        .chunks(4096)
        .map(|chunk| {
            let mut a = MomentAccumulator::new();
            for &x in chunk {
                a.push(x);
            }
            a
        })
        .fold(MomentAccumulator::new(), |a, b| a.merge(&b));
    let above = values.iter().filter(|&&x| x > threshold).count();
    SummaryStats {
        mean: acc.mean(),
        variance: acc.variance(),
        skewness: acc.skewness(),
        kurtosis: acc.kurtosis(),
        median: exact_median(values),
        fraction_above: above as f64 / values.len() as f64,
        n: values.len() as u64,
    }
}

/// Uniform-bin histogram over a fixed range; values at the upper edge land
/// in the last bin, values outside the range are clamped into the edge bins.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub low: f64,
    pub high: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn new(low: f64, high: f64, bins: usize) -> Self {
        assert!(bins >= 1 && low < high);
        Self {
            low,
            high,
            counts: vec![0; bins],
        }
    }

    pub fn push(&mut self, x: f64) {
        let bins = self.counts.len();
        let frac = (x - self.low) / (self.high - self.low);
        let idx = ((frac * bins as f64) as isize).clamp(0, bins as isize - 1) as usize;
        self.counts[idx] += 1;
    }

    pub fn from_values(values: &[f64], low: f64, high: f64, bins: usize) -> Self {
        let mut h = Self::new(low, high, bins);
        for &x in values {
            h.push(x);
        }
        h
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn bin_width(&self) -> f64 {
        (self.high - self.low) / self.counts.len() as f64
    }

    /// Rows (bin_low, bin_high, count, density); densities integrate to 1.
    pub fn rows(&self) -> Vec<(f64, f64, u64, f64)> {
        let w = self.bin_width();
        let total = self.total() as f64;
        self.counts
            .iter()
            .enumerate()
            .map(|(k, &c)| {
                let lo = self.low + k as f64 * w;
                let density = if total > 0.0 { c as f64 / (total * w) } else { 0.0 };
                (lo, lo + w, c, density)
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_low,bin_high,count,density\n");
        for (lo, hi, c, d) in self.rows() {
            out.push_str(&format!("{lo},{hi},{c},{d}\n"));
        }
        out
    }

    pub fn from_csv(text: &str) -> Option<Self> {
        let mut lows = Vec::new();
        let mut highs = Vec::new();
        let mut counts = Vec::new();
        for line in text.lines().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 4 {
                return None;
            }
            lows.push(f[0].parse::<f64>().ok()?);
            highs.push(f[1].parse::<f64>().ok()?);
            counts.push(f[2].parse::<u64>().ok()?);
        }
        if lows.is_empty() {
            return None;
        }
        Some(Self {
            low: lows[0],
            high: *highs.last().unwrap(),
            counts,
        })
    }
}
