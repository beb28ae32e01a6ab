//! Kernel density estimates and jitter heights for signed-distance plots.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Evaluation points per density curve.
pub const KDE_GRID: usize = 512;
/// The grid extends this many bandwidths past the extreme samples.
pub const KDE_REACH: f64 = 5.0;

fn sample_sd(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    if x.len() < 2 {
        return 0.0;
    }
    let mean = x.iter().sum::<f64>() / n;
    (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Silverman's rule `0.9 min(sd, IQR/1.34) n^{-1/5}`. Falls back to the
/// larger spread measure, then to a scale-relative floor, when the data are
/// too concentrated for the rule.
pub fn silverman_bandwidth(x: &[f64]) -> f64 {
    assert!(!x.is_empty(), "bandwidth of an empty sample");
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    let sd = sample_sd(x);
    let iqr = (quantile(&sorted, 0.75) - quantile(&sorted, 0.25)) / 1.34;
    let n = x.len() as f64;
    let spread = match (sd > 0.0, iqr > 0.0) {
        (true, true) => sd.min(iqr),
        _ => sd.max(iqr),
    };
    let h = 0.9 * spread * n.powf(-0.2);
    if h > 0.0 {
        h
    } else {
        1e-3 * sorted[sorted.len() / 2].abs().max(1.0)
    }
}

/// Gaussian KDE of `x` on an even grid; returns `(grid point, density)`.
pub fn kde(x: &[f64]) -> Vec<(f64, f64)> {
    let h = silverman_bandwidth(x);
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min) - KDE_REACH * h;
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max) + KDE_REACH * h;
    let step = (hi - lo) / (KDE_GRID - 1) as f64;
    let norm = 1.0 / (x.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
    (0..KDE_GRID)
        .map(|k| {
            let t = lo + k as f64 * step;
            let density = x
                .iter()
                .map(|&xi| (-0.5 * ((t - xi) / h).powi(2)).exp())
                .sum::<f64>()
                * norm;
            (t, density)
        })
        .collect()
}

/// Uniform heights in `[0, 1)`, one per sample, from a seeded ChaCha8 stream.
pub fn jitter(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random::<f64>()).collect()
}
