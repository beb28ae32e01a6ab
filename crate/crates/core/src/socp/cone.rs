//! Cone blocks, Jordan-algebra helpers and Nesterov–Todd scaling.
//!
//! Every primitive here works on one block at a time; [`ConeSpec`] lays the
//! blocks out contiguously in the variable vector.

/// One block of the product cone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeBlock {
    /// `len` coordinates, each nonnegative.
    Nonneg(usize),
    /// `S_k = {(t; u) : t >= ||u||_2}` with `k >= 2`.
    SecondOrder(usize),
}

impl ConeBlock {
    pub fn len(&self) -> usize {
        match *self {
            ConeBlock::Nonneg(n) | ConeBlock::SecondOrder(n) => n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Contribution to the barrier degree.
    pub fn degree(&self) -> usize {
        match *self {
            ConeBlock::Nonneg(n) => n,
            ConeBlock::SecondOrder(_) => 1,
        }
    }
}

/// Ordered list of cone blocks.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConeSpec {
    blocks: Vec<ConeBlock>,
}

impl ConeSpec {
    pub fn new(blocks: Vec<ConeBlock>) -> Self {
        Self { blocks }
    }

    pub fn push(&mut self, block: ConeBlock) -> &mut Self {
        self.blocks.push(block);
        self
    }

    pub fn blocks(&self) -> &[ConeBlock] {
        &self.blocks
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().map(ConeBlock::len).sum()
    }

    pub fn degree(&self) -> usize {
        self.blocks.iter().map(ConeBlock::degree).sum()
    }

    /// Blocks paired with their coordinate ranges.
    pub fn ranges(&self) -> impl Iterator<Item = (ConeBlock, std::ops::Range<usize>)> + '_ {
        let mut start = 0;
        self.blocks.iter().map(move |&b| {
            let r = start..start + b.len();
            start = r.end;
            (b, r)
        })
    }

    /// Largest violation of cone membership (0 when inside).
    pub fn violation(&self, x: &[f64]) -> f64 {
        self.ranges()
            .map(|(b, r)| block_violation(b, &x[r]))
            .fold(0.0, f64::max)
    }

    /// Identity element `e` (ones on orthant blocks, `(1; 0)` on cone blocks).
    pub fn identity(&self) -> Vec<f64> {
        let mut e = vec![0.0; self.dim()];
        for (b, r) in self.ranges() {
            match b {
                ConeBlock::Nonneg(_) => e[r].iter_mut().for_each(|v| *v = 1.0),
                ConeBlock::SecondOrder(_) => e[r.start] = 1.0,
            }
        }
        e
    }
}

pub(crate) fn block_violation(block: ConeBlock, x: &[f64]) -> f64 {
    match block {
        ConeBlock::Nonneg(_) => x.iter().map(|&v| (-v).max(0.0)).fold(0.0, f64::max),
        ConeBlock::SecondOrder(_) => (norm(&x[1..]) - x[0]).max(0.0),
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `x0^2 - ||x1||^2`, evaluated as a product to limit cancellation.
fn soc_det(x: &[f64]) -> f64 {
    let t = norm(&x[1..]);
    (x[0] - t) * (x[0] + t)
}

/// Smallest `alpha` such that `x + alpha * e` lies in the closed cone.
pub(crate) fn shift_to_cone(block: ConeBlock, x: &[f64]) -> f64 {
    match block {
        ConeBlock::Nonneg(_) => x.iter().map(|&v| -v).fold(f64::NEG_INFINITY, f64::max),
        ConeBlock::SecondOrder(_) => norm(&x[1..]) - x[0],
    }
}

/// Jordan product `x ∘ y` on one block.
pub(crate) fn jordan_product(block: ConeBlock, x: &[f64], y: &[f64], out: &mut [f64]) {
    match block {
        ConeBlock::Nonneg(_) => {
            for i in 0..x.len() {
                out[i] = x[i] * y[i];
            }
        }
        ConeBlock::SecondOrder(_) => {
            out[0] = dot(x, y);
            for i in 1..x.len() {
                out[i] = x[0] * y[i] + y[0] * x[i];
            }
        }
    }
}

/// Solves `lambda ∘ u = r` for `u` on one block.
pub(crate) fn jordan_divide(block: ConeBlock, lambda: &[f64], r: &[f64], out: &mut [f64]) {
    match block {
        ConeBlock::Nonneg(_) => {
            for i in 0..lambda.len() {
                out[i] = r[i] / lambda[i];
            }
        }
        ConeBlock::SecondOrder(_) => {
            let det = soc_det(lambda);
            let l0 = lambda[0];
            let u0 = (l0 * r[0] - dot(&lambda[1..], &r[1..])) / det;
            out[0] = u0;
            for i in 1..lambda.len() {
                out[i] = (r[i] - u0 * lambda[i]) / l0;
            }
        }
    }
}

/// Largest step `alpha` (possibly infinite) keeping `x + alpha * dx` in the cone.
pub(crate) fn max_step(block: ConeBlock, x: &[f64], dx: &[f64]) -> f64 {
    match block {
        ConeBlock::Nonneg(_) => x
            .iter()
            .zip(dx)
            .filter(|(_, &d)| d < 0.0)
            .map(|(&v, &d)| -v / d)
            .fold(f64::INFINITY, f64::min),
        ConeBlock::SecondOrder(_) => {
            // f(a) = (x0 + a d0)^2 - ||x1 + a d1||^2 = qa a^2 + 2 qb a + qc
            let qa = soc_det(dx);
            let qb = x[0] * dx[0] - dot(&x[1..], &dx[1..]);
            let qc = soc_det(x).max(0.0);
            let head_limit = if dx[0] < 0.0 { -x[0] / dx[0] } else { f64::INFINITY };
            let root = smallest_positive_root(qa, qb, qc);
            root.min(head_limit)
        }
    }
}

fn smallest_positive_root(a: f64, b: f64, c: f64) -> f64 {
    // roots of a t^2 + 2 b t + c = 0 with c >= 0
    if a == 0.0 {
        return if b < 0.0 { -c / (2.0 * b) } else { f64::INFINITY };
    }
    let disc = b * b - a * c;
    if disc < 0.0 {
        return f64::INFINITY;
    }
    let q = -(b + b.signum() * disc.sqrt());
    let mut best = f64::INFINITY;
    for r in [q / a, if q != 0.0 { c / q } else { f64::INFINITY }] {
        if r > 0.0 && r < best {
            best = r;
        }
    }
    best
}

/// Nesterov–Todd scaling for one block: the symmetric matrix `W` with
/// `W x = W^{-1} s = lambda`.
#[derive(Debug, Clone)]
pub(crate) enum BlockScaling {
    /// Diagonal `W = diag(d)`.
    Diagonal { d: Vec<f64> },
    /// `W = beta (2 v v^T - J)`, `W^{-1} = (1/beta)(2 J v v^T J - J)`.
    Lorentz { beta: f64, v: Vec<f64> },
}

impl BlockScaling {
    pub(crate) fn new(block: ConeBlock, x: &[f64], s: &[f64]) -> Self {
        match block {
            ConeBlock::Nonneg(_) => BlockScaling::Diagonal {
                d: x.iter().zip(s).map(|(&xi, &si)| (si / xi).sqrt()).collect(),
            },
            ConeBlock::SecondOrder(_) => {
                let xd = soc_det(x).sqrt();
                let sd = soc_det(s).sqrt();
                let xb: Vec<f64> = x.iter().map(|v| v / xd).collect();
                let sb: Vec<f64> = s.iter().map(|v| v / sd).collect();
                let gamma = ((1.0 + dot(&xb, &sb)) / 2.0).sqrt();
                // wbar = (sbar + J xbar) / (2 gamma)
                let mut w: Vec<f64> = sb
                    .iter()
                    .zip(&xb)
                    .enumerate()
                    .map(|(i, (&a, &b))| if i == 0 { a + b } else { a - b } / (2.0 * gamma))
                    .collect();
                let scale = (2.0 * (w[0] + 1.0)).sqrt();
                w[0] += 1.0;
                w.iter_mut().for_each(|v| *v /= scale);
                BlockScaling::Lorentz {
                    beta: (sd / xd).sqrt(),
                    v: w,
                }
            }
        }
    }

    /// `out = W u`.
    pub(crate) fn apply(&self, u: &[f64], out: &mut [f64]) {
        match self {
            BlockScaling::Diagonal { d } => {
                for i in 0..u.len() {
                    out[i] = d[i] * u[i];
                }
            }
            BlockScaling::Lorentz { beta, v } => {
                // beta (2 v (v.u) - J u)
                let vu = dot(v, u);
                out[0] = beta * (2.0 * v[0] * vu - u[0]);
                for i in 1..u.len() {
                    out[i] = beta * (2.0 * v[i] * vu + u[i]);
                }
            }
        }
    }

    /// `out = W^{-1} u`.
    pub(crate) fn apply_inv(&self, u: &[f64], out: &mut [f64]) {
        match self {
            BlockScaling::Diagonal { d } => {
                for i in 0..u.len() {
                    out[i] = u[i] / d[i];
                }
            }
            BlockScaling::Lorentz { beta, v } => {
                // (1/beta)(2 Jv (Jv . u) - J u)
                let jvu = v[0] * u[0] - dot(&v[1..], &u[1..]);
                out[0] = (2.0 * v[0] * jvu - u[0]) / beta;
                for i in 1..u.len() {
                    out[i] = (-2.0 * v[i] * jvu + u[i]) / beta;
                }
            }
        }
    }

    /// `out = W^{-2} u`.
    pub(crate) fn apply_inv_sq(&self, u: &[f64], out: &mut [f64]) {
        let mut tmp = vec![0.0; u.len()];
        self.apply_inv(u, &mut tmp);
        self.apply_inv(&tmp, out);
    }
}
