//! Primal-dual path-following interior-point method with Nesterov–Todd
//! scaling and Mehrotra predictor-corrector steps.
//!
//! Primal: `min c^T x  s.t. A x = b, x in K`.
//! Dual:   `max b^T y  s.t. A^T y + s = c, s in K`.
//!
//! Newton systems are reduced to the normal equations `A W^{-2} A^T dy = r`
//! and solved with a dense Cholesky factorization.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::cone::{self, BlockScaling, ConeBlock, ConeSpec};
use super::program::ConicProgram;
use super::SocpError;

/// Cone blocks longer than this use a precomputed Gram matrix when forming
/// the normal equations.
const GRAM_BLOCK_MIN: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverTolerances {
    /// Relative primal/dual residual tolerance.
    pub feas_tol: f64,
    /// Duality gap tolerance, relative to `max(1, |objective|)`.
    pub gap_tol: f64,
    pub max_iter: usize,
    /// Fraction-to-boundary factor.
    pub step_fraction: f64,
}

impl Default for SolverTolerances {
    fn default() -> Self {
        Self {
            feas_tol: 1e-8,
            gap_tol: 1e-8,
            max_iter: 100,
            step_fraction: 0.99,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    /// A primal infeasibility certificate was found (stored in `dual_eq`).
    Infeasible,
    /// A primal improving ray was found (stored in `primal`).
    Unbounded,
    /// Iteration cap reached or the step length collapsed.
    SlowProgress,
}

/// Per-iteration quantities, recorded for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// `x^T s`.
    pub complementarity: f64,
    /// `r_d^T x - y^T r_p`: the infeasibility correction in
    /// `c^T x - b^T y = x^T s + r_d^T x - y^T r_p`.
    pub residual_correction: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConicSolution {
    pub primal: DVector<f64>,
    pub dual_eq: DVector<f64>,
    pub dual_cone: DVector<f64>,
    pub objective_value: f64,
    pub dual_objective: f64,
    /// Absolute duality gap `|c^T x - b^T y|`.
    pub gap: f64,
    /// `||A x - b||_inf / (1 + ||b||_inf)`.
    pub primal_residual: f64,
    /// `||A^T y + s - c||_inf / (1 + ||c||_inf)`.
    pub dual_residual: f64,
    pub status: SolveStatus,
    pub iterations: usize,
    pub trace: Vec<IterationRecord>,
}

impl ConicSolution {
    /// Complementarity `<x, s>`.
    pub fn complementarity(&self) -> f64 {
        self.primal.dot(&self.dual_cone)
    }
}

/// Normal-equation contribution of one cone block.
struct BlockData {
    range: std::ops::Range<usize>,
    /// Rows of `A` with a nonzero in the block's columns.
    rows: Vec<usize>,
    /// `A_b` restricted to `rows`.
    sub: DMatrix<f64>,
    /// `sub sub^T` for long second-order blocks.
    gram: Option<DMatrix<f64>>,
}

struct Workspace<'a> {
    a: &'a DMatrix<f64>,
    blocks: Vec<BlockData>,
}

impl<'a> Workspace<'a> {
    fn new(a: &'a DMatrix<f64>, cones: &ConeSpec) -> Self {
        let blocks = cones
            .ranges()
            .map(|(block, range)| {
                let ab = a.columns(range.start, range.len());
                let rows: Vec<usize> = (0..a.nrows())
                    .filter(|&i| ab.row(i).iter().any(|&v| v != 0.0))
                    .collect();
                let sub = DMatrix::from_fn(rows.len(), range.len(), |r, j| ab[(rows[r], j)]);
                let gram = match block {
                    ConeBlock::SecondOrder(k) if k > GRAM_BLOCK_MIN && !rows.is_empty() => {
                        Some(&sub * sub.transpose())
                    }
                    _ => None,
                };
                BlockData {
                    range,
                    rows,
                    sub,
                    gram,
                }
            })
            .collect();
        Self { a, blocks }
    }

    fn normal_matrix(&self, scalings: &[BlockScaling]) -> DMatrix<f64> {
        let m = self.a.nrows();
        let mut mat = DMatrix::<f64>::zeros(m, m);
        if m == 0 {
            return mat;
        }
        for (bd, w) in self.blocks.iter().zip(scalings) {
            let r = bd.rows.len();
            if r == 0 {
                continue;
            }
            let ab = &bd.sub;
            let contribution = match (w, &bd.gram) {
                (BlockScaling::Lorentz { beta, v }, Some(gram)) => {
                    // W^{-2} = beta^{-2} (I + 4|v|^2 u u^T - 2 u v^T - 2 v u^T), u = J v
                    let mut u = v.clone();
                    u[1..].iter_mut().for_each(|e| *e = -*e);
                    let vv: f64 = v.iter().map(|e| e * e).sum();
                    let au = ab * DVector::from_column_slice(&u);
                    let av = ab * DVector::from_column_slice(v);
                    let inv_b2 = 1.0 / (beta * beta);
                    let mut part = gram * inv_b2;
                    part.ger(4.0 * vv * inv_b2, &au, &au, 1.0);
                    part.ger(-2.0 * inv_b2, &au, &av, 1.0);
                    part.ger(-2.0 * inv_b2, &av, &au, 1.0);
                    part
                }
                _ => {
                    // B = W^{-1} A_b^T, contribution B^T B
                    let k = bd.range.len();
                    let mut b = DMatrix::<f64>::zeros(k, r);
                    let mut row = vec![0.0; k];
                    let mut out = vec![0.0; k];
                    for i in 0..r {
                        for (j, e) in row.iter_mut().enumerate() {
                            *e = ab[(i, j)];
                        }
                        w.apply_inv(&row, &mut out);
                        b.column_mut(i).copy_from_slice(&out);
                    }
                    b.transpose() * b
                }
            };
            for (ci, &gc) in bd.rows.iter().enumerate() {
                for (ri, &gr) in bd.rows.iter().enumerate() {
                    mat[(gr, gc)] += contribution[(ri, ci)];
                }
            }
        }
        mat
    }
}

fn for_blocks(
    cones: &ConeSpec,
    mut f: impl FnMut(usize, ConeBlock, std::ops::Range<usize>),
) {
    for (i, (b, r)) in cones.ranges().enumerate() {
        f(i, b, r);
    }
}

fn apply_blockwise(
    cones: &ConeSpec,
    scalings: &[BlockScaling],
    u: &DVector<f64>,
    op: fn(&BlockScaling, &[f64], &mut [f64]),
) -> DVector<f64> {
    let mut out = DVector::zeros(u.len());
    for_blocks(cones, |i, _, r| {
        op(&scalings[i], &u.as_slice()[r.clone()], &mut out.as_mut_slice()[r]);
    });
    out
}

fn jordan_product(cones: &ConeSpec, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
    let mut out = DVector::zeros(x.len());
    for_blocks(cones, |_, b, r| {
        cone::jordan_product(
            b,
            &x.as_slice()[r.clone()],
            &y.as_slice()[r.clone()],
            &mut out.as_mut_slice()[r],
        );
    });
    out
}

fn jordan_divide(cones: &ConeSpec, lambda: &DVector<f64>, r: &DVector<f64>) -> DVector<f64> {
    let mut out = DVector::zeros(r.len());
    for_blocks(cones, |_, b, rg| {
        cone::jordan_divide(
            b,
            &lambda.as_slice()[rg.clone()],
            &r.as_slice()[rg.clone()],
            &mut out.as_mut_slice()[rg],
        );
    });
    out
}

fn max_step(cones: &ConeSpec, x: &DVector<f64>, dx: &DVector<f64>) -> f64 {
    let mut alpha = f64::INFINITY;
    for_blocks(cones, |_, b, r| {
        alpha = alpha.min(cone::max_step(
            b,
            &x.as_slice()[r.clone()],
            &dx.as_slice()[r],
        ));
    });
    alpha
}

/// Moves a least-squares estimate into the interior of the cone.
fn push_interior(cones: &ConeSpec, mut x: DVector<f64>) -> DVector<f64> {
    let mut shift = f64::NEG_INFINITY;
    for_blocks(cones, |_, b, r| {
        shift = shift.max(cone::shift_to_cone(b, &x.as_slice()[r]));
    });
    if shift >= 0.0 {
        let e = cones.identity();
        for (xi, ei) in x.iter_mut().zip(e) {
            *xi += (1.0 + shift) * ei;
        }
    }
    x
}

fn factor(mat: DMatrix<f64>) -> Result<Cholesky<f64, Dyn>, SocpError> {
    let scale = mat.diagonal().amax().max(1.0);
    let mut reg = 0.0;
    for _ in 0..8 {
        let mut trial = mat.clone();
        for i in 0..trial.nrows() {
            trial[(i, i)] += reg;
        }
        if let Some(ch) = Cholesky::new(trial) {
            return Ok(ch);
        }
        reg = if reg == 0.0 { 1e-14 * scale } else { reg * 100.0 };
    }
    Err(SocpError::Numerical(
        "normal equations are not positive definite".into(),
    ))
}

/// Solves `M x = rhs` with one step of iterative refinement.
fn solve_refined(mat: &DMatrix<f64>, ch: &Cholesky<f64, Dyn>, rhs: &DVector<f64>) -> DVector<f64> {
    let mut x = ch.solve(rhs);
    let r = rhs - mat * &x;
    x += ch.solve(&r);
    x
}

/// Solves a standard-form cone program.
///
/// Equality rows are presolved first; the returned `dual_eq` is expanded back
/// to the original row count (dropped rows get a zero multiplier).
pub fn solve(program: &ConicProgram, tol: &SolverTolerances) -> Result<ConicSolution, SocpError> {
    let reduced = program.presolve()?;
    let kept = kept_rows(program, &reduced);
    let mut sol = solve_presolved(&reduced, tol)?;
    if reduced.neq() != program.neq() {
        let mut y = DVector::zeros(program.neq());
        for (k, &i) in kept.iter().enumerate() {
            y[i] = sol.dual_eq[k];
        }
        sol.dual_eq = y;
    }
    Ok(sol)
}

fn kept_rows(full: &ConicProgram, reduced: &ConicProgram) -> Vec<usize> {
    if full.neq() == reduced.neq() {
        return (0..full.neq()).collect();
    }
    let mut kept = Vec::with_capacity(reduced.neq());
    let mut next = 0;
    for i in 0..full.neq() {
        if next < reduced.neq() && full.eq_matrix.row(i) == reduced.eq_matrix.row(next) {
            kept.push(i);
            next += 1;
        }
    }
    kept
}

fn solve_presolved(p: &ConicProgram, tol: &SolverTolerances) -> Result<ConicSolution, SocpError> {
    let a = &p.eq_matrix;
    let b = &p.eq_rhs;
    let c = &p.objective;
    let cones = &p.cones;
    let m = p.neq();
    let nu = cones.degree() as f64;
    let b_norm = 1.0 + b.amax();
    let c_norm = 1.0 + c.amax();

    let ws = Workspace::new(a, cones);

    // least-squares start
    let (mut x, mut y, mut s) = if m > 0 {
        let aat = factor(a * a.transpose())?;
        let x0 = a.transpose() * aat.solve(b);
        let y0 = aat.solve(&(a * c));
        let s0 = c - a.transpose() * &y0;
        (push_interior(cones, x0), y0, push_interior(cones, s0))
    } else {
        (
            push_interior(cones, DVector::zeros(p.nvar())),
            DVector::zeros(0),
            push_interior(cones, c.clone()),
        )
    };
    let e = DVector::from_vec(cones.identity());

    let mut trace = Vec::new();
    let mut status = SolveStatus::SlowProgress;
    let mut iterations = 0;
    let mut small_steps = 0;

    loop {
        let r_p = b - a * &x;
        let r_d = c - a.transpose() * &y - &s;
        let pobj = c.dot(&x);
        let dobj = b.dot(&y);
        let comp = x.dot(&s);
        let pres = r_p.amax() / b_norm;
        let dres = r_d.amax() / c_norm;
        let gap_scale = pobj.abs().min(dobj.abs()).max(1.0);

        if pres <= tol.feas_tol
            && dres <= tol.feas_tol
            && comp <= tol.gap_tol * gap_scale
            && (pobj - dobj).abs() <= tol.gap_tol * gap_scale
        {
            status = SolveStatus::Optimal;
            break;
        }
        // infeasibility certificates
        if dobj > 0.0 {
            let ray = (a.transpose() * &y + &s).amax() / dobj;
            if ray <= tol.feas_tol && pres > tol.feas_tol {
                status = SolveStatus::Infeasible;
                break;
            }
        }
        if pobj < 0.0 {
            let ray = (a * &x).amax() / -pobj;
            if ray <= tol.feas_tol && dres > tol.feas_tol {
                status = SolveStatus::Unbounded;
                break;
            }
        }
        if iterations >= tol.max_iter || small_steps >= 5 {
            break;
        }
        iterations += 1;

        let scalings: Vec<BlockScaling> = cones
            .ranges()
            .map(|(blk, r)| BlockScaling::new(blk, &x.as_slice()[r.clone()], &s.as_slice()[r]))
            .collect();
        let lambda = apply_blockwise(cones, &scalings, &x, BlockScaling::apply);
        let mat = ws.normal_matrix(&scalings);
        let ch = match (m > 0).then(|| factor(mat.clone())).transpose() {
            Ok(ch) => ch,
            // late breakdown: hand back the current iterate
            Err(_) if iterations > 1 => break,
            Err(e) => return Err(e),
        };

        // W dx + W^{-1} ds = xi,  A dx = r_p,  A^T dy + ds = r_d
        let newton = |xi: &DVector<f64>| -> (DVector<f64>, DVector<f64>, DVector<f64>) {
            let w2_rd = apply_blockwise(cones, &scalings, &r_d, BlockScaling::apply_inv_sq);
            let winv_xi = apply_blockwise(cones, &scalings, xi, BlockScaling::apply_inv);
            let dy = match &ch {
                Some(ch) => {
                    let rhs = &r_p + a * (&w2_rd - &winv_xi);
                    solve_refined(&mat, ch, &rhs)
                }
                None => DVector::zeros(0),
            };
            let at_dy = a.transpose() * &dy;
            let dx = apply_blockwise(cones, &scalings, &at_dy, BlockScaling::apply_inv_sq)
                - &w2_rd
                + &winv_xi;
            let ds = &r_d - at_dy;
            (dx, dy, ds)
        };

        let mu = comp / nu;
        // predictor
        let (dx_a, _, ds_a) = newton(&(-&lambda));
        let alpha_a = max_step(cones, &x, &dx_a).min(max_step(cones, &s, &ds_a)).min(1.0);
        let x_a = &x + alpha_a * &dx_a;
        let s_a = &s + alpha_a * &ds_a;
        let sigma = (x_a.dot(&s_a) / comp).clamp(0.0, 1.0).powi(3);

        // corrector
        let wdx = apply_blockwise(cones, &scalings, &dx_a, BlockScaling::apply);
        let winv_ds = apply_blockwise(cones, &scalings, &ds_a, BlockScaling::apply_inv);
        let rhs_c = -jordan_product(cones, &lambda, &lambda) - jordan_product(cones, &winv_ds, &wdx)
            + (sigma * mu) * &e;
        let xi = jordan_divide(cones, &lambda, &rhs_c);
        let (dx, dy, ds) = newton(&xi);
        let alpha_max = max_step(cones, &x, &dx).min(max_step(cones, &s, &ds));
        let alpha = (tol.step_fraction * alpha_max).min(1.0);
        if !alpha.is_finite() || alpha <= 0.0 {
            break;
        }
        small_steps = if alpha < 1e-8 { small_steps + 1 } else { 0 };
        let correction = r_d.dot(&x) - y.dot(&r_p);
        x += alpha * dx;
        y += alpha * dy;
        s += alpha * ds;

        trace.push(IterationRecord {
            primal_objective: pobj,
            dual_objective: dobj,
            complementarity: comp,
            residual_correction: correction,
            primal_residual: pres,
            dual_residual: dres,
            step: alpha,
        });
    }

    let r_p = b - a * &x;
    let r_d = c - a.transpose() * &y - &s;
    let pobj = c.dot(&x);
    let dobj = b.dot(&y);
    Ok(ConicSolution {
        objective_value: pobj,
        dual_objective: dobj,
        gap: (pobj - dobj).abs(),
        primal_residual: r_p.amax() / b_norm,
        dual_residual: r_d.amax() / c_norm,
        primal: x,
        dual_eq: y,
        dual_cone: s,
        status,
        iterations,
        trace,
    })
}
