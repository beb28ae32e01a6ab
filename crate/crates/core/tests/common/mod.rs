//! Shared fixtures and independent oracles for the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rdwd_core::socp::{ConeBlock, ConeSpec, ConicProgram};
use rdwd_core::{Label, TrainingSet};

/// A random cone program with a known strictly feasible primal point and a
/// strictly feasible dual slack, so the optimum is attained.
pub struct RandomProgram {
    pub program: ConicProgram,
    pub interior: DVector<f64>,
    /// Bound on `||x - interior||` over the sublevel set `c^T x <= c^T interior`.
    pub radius: f64,
}

fn interior_block(rng: &mut ChaCha8Rng, block: ConeBlock) -> Vec<f64> {
    match block {
        ConeBlock::Nonneg(n) => (0..n).map(|_| rng.random_range(0.5..2.0)).collect(),
        ConeBlock::SecondOrder(n) => {
            let tail: Vec<f64> = (0..n - 1).map(|_| rng.random_range(-1.0..1.0)).collect();
            let head = tail.iter().map(|v| v * v).sum::<f64>().sqrt() + rng.random_range(0.5..1.5);
            std::iter::once(head).chain(tail).collect()
        }
    }
}

/// Smallest value of `s_b^T x_b / ||x_b||` over the cone block.
fn coercivity(block: ConeBlock, s: &[f64]) -> f64 {
    match block {
        ConeBlock::Nonneg(_) => s.iter().copied().fold(f64::INFINITY, f64::min),
        ConeBlock::SecondOrder(_) => {
            let t = s[1..].iter().map(|v| v * v).sum::<f64>().sqrt();
            (s[0] - t) / std::f64::consts::SQRT_2
        }
    }
}

pub fn random_program(seed: u64) -> RandomProgram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut blocks = Vec::new();
    let target = rng.random_range(3..=10usize);
    let mut nvar = 0;
    while nvar < target {
        let room = target - nvar;
        let block = if room >= 2 && rng.random_bool(0.6) {
            ConeBlock::SecondOrder(rng.random_range(2..=room.min(4)))
        } else {
            ConeBlock::Nonneg(rng.random_range(1..=room.min(3)))
        };
        nvar += block.len();
        blocks.push(block);
    }
    let cones = ConeSpec::new(blocks);
    let lo = nvar.saturating_sub(4).max(1);
    let hi = (nvar - 1).min(6);
    let m = rng.random_range(lo..=hi.max(lo));
    let a = DMatrix::from_fn(m, nvar, |_, _| rng.random_range(-1.0..1.0));
    let x0 = DVector::from_vec(
        cones
            .blocks()
            .iter()
            .flat_map(|&b| interior_block(&mut rng, b))
            .collect(),
    );
    let s0 = DVector::from_vec(
        cones
            .blocks()
            .iter()
            .flat_map(|&b| interior_block(&mut rng, b))
            .collect(),
    );
    let y0 = DVector::from_fn(m, |_, _| rng.random_range(-1.0..1.0));
    let b = &a * &x0;
    let c = a.transpose() * &y0 + &s0;
    let gamma = cones
        .ranges()
        .map(|(blk, r)| coercivity(blk, &s0.as_slice()[r]))
        .fold(f64::INFINITY, f64::min);
    let radius = s0.dot(&x0) / gamma + x0.norm();
    RandomProgram {
        program: ConicProgram::new(c, a, b, cones).unwrap(),
        interior: x0,
        radius,
    }
}

/// Orthonormal basis of the null space of `a`, built by Gram-Schmidt.
fn null_space(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.ncols();
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for i in 0..a.nrows() {
        let mut v = a.row(i).transpose();
        for _ in 0..2 {
            for q in &basis {
                let coef = q.dot(&v);
                v -= coef * q;
            }
        }
        let nv = v.norm();
        if nv > 1e-10 {
            basis.push(v / nv);
        }
    }
    let rank = basis.len();
    let mut null = Vec::new();
    for j in 0..n {
        let mut v = DVector::zeros(n);
        v[j] = 1.0;
        for _ in 0..2 {
            for q in basis.iter().chain(null.iter()) {
                let coef = q.dot(&v);
                v -= coef * q;
            }
        }
        let nv = v.norm();
        if nv > 1e-8 {
            null.push(v / nv);
        }
        if rank + null.len() == n {
            break;
        }
    }
    DMatrix::from_columns(&null)
}

/// Violation of cone membership and a subgradient of the violation in x.
fn worst_violation(cones: &ConeSpec, x: &DVector<f64>) -> Option<DVector<f64>> {
    let mut worst = 0.0;
    let mut grad = None;
    for (blk, r) in cones.ranges() {
        let xb = &x.as_slice()[r.clone()];
        match blk {
            ConeBlock::Nonneg(_) => {
                for (k, &v) in xb.iter().enumerate() {
                    if -v > worst {
                        worst = -v;
                        let mut g = DVector::zeros(x.len());
                        g[r.start + k] = -1.0;
                        grad = Some(g);
                    }
                }
            }
            ConeBlock::SecondOrder(_) => {
                let t = xb[1..].iter().map(|v| v * v).sum::<f64>().sqrt();
                if t - xb[0] > worst {
                    worst = t - xb[0];
                    let mut g = DVector::zeros(x.len());
                    g[r.start] = -1.0;
                    for k in 1..xb.len() {
                        g[r.start + k] = xb[k] / t;
                    }
                    grad = Some(g);
                }
            }
        }
    }
    grad
}

/// Minimum of `c^T x` over the feasible set, by brute force.
///
/// The feasible set is parametrized as `x0 + N t` with `N` a null-space basis
/// of `A`. A coarse grid over the bounding ball supplies an upper bound; a
/// central-cut ellipsoid method then refines it to near machine precision.
pub fn oracle_minimum(rp: &RandomProgram) -> f64 {
    let p = &rp.program;
    let null = null_space(&p.eq_matrix);
    let k_true = null.ncols();
    if k_true == 0 {
        return p.objective.dot(&rp.interior);
    }
    // pad 1-D problems so the ellipsoid update is defined
    let k = k_true.max(2);
    let embed = |t: &DVector<f64>| -> DVector<f64> { &rp.interior + &null * t.rows(0, k_true) };
    let to_t = |g: &DVector<f64>| -> DVector<f64> {
        let mut out = DVector::zeros(k);
        out.rows_mut(0, k_true).copy_from(&(null.transpose() * g));
        out
    };
    let c = &p.objective;
    let mut best = f64::INFINITY;

    // grid stage
    let per_axis = match k_true {
        1 => 201,
        2 => 61,
        3 => 21,
        4 => 11,
        _ => 7,
    };
    let mut idx = vec![0usize; k_true];
    loop {
        let t = DVector::from_fn(k, |i, _| {
            if i < k_true {
                rp.radius * (2.0 * idx[i] as f64 / (per_axis - 1) as f64 - 1.0)
            } else {
                0.0
            }
        });
        let x = embed(&t);
        if worst_violation(&p.cones, &x).is_none() {
            best = best.min(c.dot(&x));
        }
        let mut i = 0;
        while i < k_true {
            idx[i] += 1;
            if idx[i] < per_axis {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
        if i == k_true {
            break;
        }
    }

    // ellipsoid refinement
    let mut center = DVector::zeros(k);
    let mut shape = DMatrix::identity(k, k) * (rp.radius * rp.radius);
    let kf = k as f64;
    for _ in 0..20_000 {
        let x = embed(&center);
        let g = match worst_violation(&p.cones, &x) {
            Some(gx) => to_t(&gx),
            None => {
                best = best.min(c.dot(&x));
                to_t(c)
            }
        };
        let pg = &shape * &g;
        let width = g.dot(&pg);
        if width <= 1e-26 * (1.0 + best.abs()).powi(2) {
            break;
        }
        let gt = &pg / width.sqrt();
        center -= &gt / (kf + 1.0);
        shape = (&shape - (2.0 / (kf + 1.0)) * &gt * gt.transpose()) * (kf * kf / (kf * kf - 1.0));
        shape = (&shape + shape.transpose()) * 0.5;
    }
    best
}

/// The separable 2-D toy: a tight +1 cluster around (0.5, 0.5) and three −1 points.
pub fn toy_2d() -> TrainingSet {
    TrainingSet::new(
        vec![
            vec![0.4, 0.5],
            vec![0.6, 0.5],
            vec![0.5, 0.4],
            vec![0.5, 0.6],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![0.05, 0.05],
        ],
        vec![
            Label::Positive,
            Label::Positive,
            Label::Positive,
            Label::Positive,
            Label::Negative,
            Label::Negative,
            Label::Negative,
        ],
    )
    .unwrap()
}

/// Per-point loss after minimizing over the slack: for `r >= 1/sqrt(C)`
/// the slack is zero and the loss is `1/r`; below that the minimizer puts
/// `r + eps = 1/sqrt(C)`, giving `sqrt(C) + C (1/sqrt(C) - r)`.
fn oracle_loss(r: f64, c: f64) -> f64 {
    let knot = 1.0 / c.sqrt();
    if r >= knot {
        1.0 / r
    } else {
        c.sqrt() + c * (knot - r)
    }
}

/// Weighted sphere objective at `(center, radius)` with optimal slacks.
pub fn oracle_objective(
    data: &TrainingSet,
    center: &[f64],
    radius: f64,
    c: f64,
    weights: (f64, f64),
) -> f64 {
    (0..data.n())
        .map(|i| {
            let x = data.point(i);
            let dist = x.iter().zip(center).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let (y, w) = match data.label(i) {
                Label::Positive => (1.0, weights.0),
                Label::Negative => (-1.0, weights.1),
            };
            w * oracle_loss(y * (radius - dist), c)
        })
        .sum()
}

/// Best radius in `[0, r_max]` for a fixed center. The objective is convex in
/// `R`, so a ternary search suffices.
fn best_radius(data: &TrainingSet, center: &[f64], c: f64, w: (f64, f64), r_max: f64) -> (f64, f64) {
    let (mut lo, mut hi) = (0.0, r_max);
    for _ in 0..100 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if oracle_objective(data, center, m1, c, w) <= oracle_objective(data, center, m2, c, w) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let r = 0.5 * (lo + hi);
    (r, oracle_objective(data, center, r, c, w))
}

/// Brute-force sphere fit over centers in the unit square: a grid at
/// spacing 0.01, then a 1e-3 grid around the best cell. Returns
/// `(center, radius, objective)`.
pub fn oracle_sphere_2d(data: &TrainingSet, c: f64, w: (f64, f64)) -> (Vec<f64>, f64, f64) {
    let search = |xs: Vec<f64>, ys: Vec<f64>| {
        let mut best = (vec![0.0, 0.0], 0.0, f64::INFINITY);
        for &x in &xs {
            for &y in &ys {
                let (r, f) = best_radius(data, &[x, y], c, w, 1.0);
                if f < best.2 {
                    best = (vec![x, y], r, f);
                }
            }
        }
        best
    };
    let coarse: Vec<f64> = (0..=100).map(|k| k as f64 * 0.01).collect();
    let first = search(coarse.clone(), coarse);
    let around = |v: f64| -> Vec<f64> {
        (-20..=20)
            .map(|k| v + k as f64 * 1e-3)
            .filter(|t| (0.0..=1.0).contains(t))
            .collect()
    };
    search(around(first.0[0]), around(first.0[1]))
}

/// Flat Dirichlet-like sample: `n` points with i.i.d. gamma(`shape`) entries,
/// L1-normalized.
pub fn gamma_simplex(rng: &mut ChaCha8Rng, n: usize, d: usize, shape: f64) -> Vec<Vec<f64>> {
    use rand_distr::{Distribution, Gamma};
    let g = Gamma::new(shape, 1.0).unwrap();
    (0..n)
        .map(|_| {
            let v: Vec<f64> = (0..d).map(|_| g.sample(rng)).collect();
            let s: f64 = v.iter().sum();
            v.into_iter().map(|x| x / s).collect()
        })
        .collect()
}

/// Two-class simplex data: +1 concentrated (`shape_plus`), −1 spread out.
pub fn simplex_classes(seed: u64, d: usize, n_plus: usize, n_minus: usize) -> TrainingSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = gamma_simplex(&mut rng, n_plus, d, 5.0);
    points.extend(gamma_simplex(&mut rng, n_minus, d, 0.5));
    let labels = (0..n_plus + n_minus)
        .map(|i| if i < n_plus { Label::Positive } else { Label::Negative })
        .collect();
    TrainingSet::new(points, labels).unwrap()
}
