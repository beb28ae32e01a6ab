use log::{debug, info};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::baselines::{default_ldwd_penalty, ldwd_fit, md_fit};
use crate::data::{Label, Scorer, TrainingSet};
use crate::rdwd::{fit, RdwdConfig};

use super::{
    DirichletParams, DirichletSampler, ErrorRow, ErrorTable, ExperimentScenario, Method, Rates,
    SimlabError, TestClass,
};

/// Environment variable capping the number of simulation threads.
pub const THREADS_ENV: &str = "RDWD_THREADS";

/// The generator behind every simulation draw: ChaCha8 seeded with
/// `seed + replication`, on stream `d`.
pub fn replication_rng(seed: u64, replication: usize, d: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(replication as u64));
    rng.set_stream(d as u64);
    rng
}

/// Thread cap from `RDWD_THREADS`; `None` when unset or invalid.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// One simulated data set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrawSpec {
    pub alpha_plus: f64,
    pub alpha_minus: f64,
    pub d: usize,
    pub n_pos: usize,
    pub n_neg: usize,
    pub n_test: usize,
    pub test_class: TestClass,
}

/// Misclassification counts of one method on the fresh test draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Counts {
    /// −1 test samples classified +1, out of `neg_total`.
    pub false_positives: usize,
    pub neg_total: usize,
    /// +1 test samples classified −1, out of `pos_total`.
    pub false_negatives: usize,
    pub pos_total: usize,
}

impl Counts {
    pub fn rates(&self) -> Rates {
        let rate = |k: usize, n: usize| (n > 0).then(|| k as f64 / n as f64);
        Rates {
            false_positive: rate(self.false_positives, self.neg_total),
            false_negative: rate(self.false_negatives, self.pos_total),
        }
    }
}

fn fit_method(method: Method, data: &TrainingSet) -> Result<Box<dyn Scorer + Send + Sync>, String> {
    match method {
        Method::Md => md_fit(data)
            .map(|m| Box::new(m) as Box<dyn Scorer + Send + Sync>)
            .map_err(|e| e.to_string()),
        Method::Ldwd => ldwd_fit(data, default_ldwd_penalty(data))
            .map(|m| Box::new(m) as Box<dyn Scorer + Send + Sync>)
            .map_err(|e| e.to_string()),
        Method::Rdwd => fit(data, &RdwdConfig::default())
            .map(|r| Box::new(r.model) as Box<dyn Scorer + Send + Sync>)
            .map_err(|e| e.to_string()),
    }
}

/// Draws a training set and test samples from `rng`, fits every method and
/// counts test errors. Draw order: +1 training, −1 training, then the −1
/// and +1 test samples, so the training data never depend on the test size.
/// Test samples are scored as they are drawn and never stored.
pub fn evaluate_draw<R: Rng>(
    spec: &DrawSpec,
    methods: &[Method],
    rng: &mut R,
) -> Result<Vec<(Method, Result<Counts, String>)>, SimlabError> {
    let plus = DirichletSampler::new(&DirichletParams::symmetric(spec.alpha_plus, spec.d)?);
    let minus = DirichletSampler::new(&DirichletParams::symmetric(spec.alpha_minus, spec.d)?);
    let mut points = Vec::with_capacity(spec.n_pos + spec.n_neg);
    let mut labels = Vec::with_capacity(spec.n_pos + spec.n_neg);
    for _ in 0..spec.n_pos {
        points.push(plus.sample_entries(rng));
        labels.push(Label::Positive);
    }
    for _ in 0..spec.n_neg {
        points.push(minus.sample_entries(rng));
        labels.push(Label::Negative);
    }
    let data = TrainingSet::new(points, labels)?;
    let models: Vec<(Method, Result<Box<dyn Scorer + Send + Sync>, String>)> = methods
        .iter()
        .map(|&m| (m, fit_method(m, &data)))
        .collect();

    let mut counts = vec![
        Counts {
            false_positives: 0,
            neg_total: 0,
            false_negatives: 0,
            pos_total: 0,
        };
        methods.len()
    ];
    let mut score = |x: &[f64], truth: Label| {
        for ((_, model), c) in models.iter().zip(counts.iter_mut()) {
            if let Ok(model) = model {
                let predicted = if model.score_point(x) >= 0.0 {
                    Label::Positive
                } else {
                    Label::Negative
                };
                match truth {
                    Label::Negative => {
                        c.neg_total += 1;
                        c.false_positives += usize::from(predicted == Label::Positive);
                    }
                    Label::Positive => {
                        c.pos_total += 1;
                        c.false_negatives += usize::from(predicted == Label::Negative);
                    }
                }
            }
        }
    };
    if spec.test_class.draws_neg() {
        for _ in 0..spec.n_test {
            score(&minus.sample_entries(rng), Label::Negative);
        }
    }
    if spec.test_class.draws_pos() {
        for _ in 0..spec.n_test {
            score(&plus.sample_entries(rng), Label::Positive);
        }
    }
    Ok(models
        .into_iter()
        .zip(counts)
        .map(|((m, model), c)| (m, model.map(|_| c)))
        .collect())
}

/// Runs every (dimension, replication) cell and summarizes the error rates.
/// Cells run in parallel, capped by `RDWD_THREADS`; the summary is reduced
/// in a fixed order, so the table does not depend on scheduling.
pub fn run_scenario(scenario: &ExperimentScenario) -> Result<ErrorTable, SimlabError> {
    run_scenario_with_threads(scenario, thread_cap())
}

pub fn run_scenario_with_threads(
    scenario: &ExperimentScenario,
    threads: Option<usize>,
) -> Result<ErrorTable, SimlabError> {
    scenario.validate()?;
    let tasks: Vec<(usize, usize)> = scenario
        .dims
        .iter()
        .flat_map(|&d| (0..scenario.replications).map(move |rep| (d, rep)))
        .collect();
    let run = |&(d, rep): &(usize, usize)| {
        let spec = DrawSpec {
            alpha_plus: scenario.alpha_plus,
            alpha_minus: scenario.alpha_minus,
            d,
            n_pos: scenario.n_pos,
            n_neg: scenario.n_neg,
            n_test: scenario.n_test,
            test_class: scenario.test_class,
        };
        let mut rng = replication_rng(scenario.seed, rep, d);
        let out = evaluate_draw(&spec, &scenario.methods, &mut rng);
        debug!("{}: d = {d}, replication {rep} done", scenario.name);
        out
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| SimlabError::ThreadPool(e.to_string()))?;
    info!(
        "{}: {} cells on {} threads",
        scenario.name,
        tasks.len(),
        pool.current_num_threads()
    );
    let results: Vec<_> = pool.install(|| tasks.par_iter().map(run).collect());
    let results = results.into_iter().collect::<Result<Vec<_>, _>>()?;

    let mut rows = Vec::new();
    for &method in &scenario.methods {
        for &d in &scenario.dims {
            let outcomes: Vec<Result<Rates, String>> = tasks
                .iter()
                .zip(&results)
                .filter(|((td, _), _)| *td == d)
                .map(|(_, cell)| {
                    cell.iter()
                        .find(|(m, _)| *m == method)
                        .map(|(_, c)| c.as_ref().map(Counts::rates).map_err(Clone::clone))
                        .expect("every method evaluated")
                })
                .collect();
            rows.push(ErrorRow::from_outcomes(method, d, &outcomes));
        }
    }
    Ok(ErrorTable { rows })
}

/// Misclassified −1 test samples per method in the single-run simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOne {
    pub n_test: usize,
    pub md: Result<usize, String>,
    pub ldwd: Result<usize, String>,
    pub rdwd: Result<usize, String>,
}

/// `d = 50`, 20 training samples per class, `Dirichlet(5, ..., 5)` against
/// `Dirichlet(0.5, ..., 0.5)`, 200 fresh −1 test samples.
pub fn simulation_one(seed: u64) -> Result<SimulationOne, SimlabError> {
    let spec = DrawSpec {
        alpha_plus: 5.0,
        alpha_minus: 0.5,
        d: 50,
        n_pos: 20,
        n_neg: 20,
        n_test: 200,
        test_class: TestClass::Neg,
    };
    let mut rng = replication_rng(seed, 0, spec.d);
    let out = evaluate_draw(&spec, &Method::ALL, &mut rng)?;
    let pick = |m: Method| {
        out.iter()
            .find(|(k, _)| *k == m)
            .map(|(_, c)| c.as_ref().map(|c| c.false_positives).map_err(Clone::clone))
            .expect("every method evaluated")
    };
    Ok(SimulationOne {
        n_test: spec.n_test,
        md: pick(Method::Md),
        ldwd: pick(Method::Ldwd),
        rdwd: pick(Method::Rdwd),
    })
}
