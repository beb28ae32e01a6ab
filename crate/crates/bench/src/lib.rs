//! Fixtures shared by the benchmarks under `benches/`.

use rdwd_core::simlab::{replication_rng, DirichletParams, DirichletSampler};
use rdwd_core::{Label, TrainingSet};

/// `Dirichlet(5)` against `Dirichlet(0.5)` training data in dimension `d`.
pub fn dirichlet_training(d: usize, n_pos: usize, n_neg: usize, seed: u64) -> TrainingSet {
    let mut rng = replication_rng(seed, 0, d);
    let plus = DirichletSampler::new(&DirichletParams::symmetric(5.0, d).unwrap());
    let minus = DirichletSampler::new(&DirichletParams::symmetric(0.5, d).unwrap());
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for _ in 0..n_pos {
        points.push(plus.sample_entries(&mut rng));
        labels.push(Label::Positive);
    }
    for _ in 0..n_neg {
        points.push(minus.sample_entries(&mut rng));
        labels.push(Label::Negative);
    }
    TrainingSet::new(points, labels).unwrap()
}
