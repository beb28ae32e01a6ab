//! Standard-form cone programs: `min c^T x  s.t.  A x = b,  x in K`.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use super::cone::{ConeBlock, ConeSpec};
use super::SocpError;

/// Relative threshold below which a projected equality row counts as dependent.
const DEPENDENT_ROW_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct ConicProgram {
    pub objective: DVector<f64>,
    pub eq_matrix: DMatrix<f64>,
    pub eq_rhs: DVector<f64>,
    pub cones: ConeSpec,
}

impl ConicProgram {
    pub fn new(
        objective: DVector<f64>,
        eq_matrix: DMatrix<f64>,
        eq_rhs: DVector<f64>,
        cones: ConeSpec,
    ) -> Result<Self, SocpError> {
        let nvar = objective.len();
        if cones.dim() != nvar {
            return Err(SocpError::Dimension(format!(
                "cones cover {} variables, objective has {nvar}",
                cones.dim()
            )));
        }
        if eq_matrix.ncols() != nvar || eq_matrix.nrows() != eq_rhs.len() {
            return Err(SocpError::Dimension(format!(
                "A is {}x{}, b has {} rows, {nvar} variables",
                eq_matrix.nrows(),
                eq_matrix.ncols(),
                eq_rhs.len()
            )));
        }
        for b in cones.blocks() {
            match *b {
                ConeBlock::SecondOrder(k) if k < 2 => {
                    return Err(SocpError::InvalidCone(format!("second-order block of size {k}")))
                }
                ConeBlock::Nonneg(0) => {
                    return Err(SocpError::InvalidCone("empty orthant block".into()))
                }
                _ => {}
            }
        }
        let finite = objective.iter().chain(eq_matrix.iter()).chain(eq_rhs.iter());
        if finite.into_iter().any(|v| !v.is_finite()) {
            return Err(SocpError::Dimension("non-finite problem data".into()));
        }
        Ok(Self {
            objective,
            eq_matrix,
            eq_rhs,
            cones,
        })
    }

    pub fn nvar(&self) -> usize {
        self.objective.len()
    }

    pub fn neq(&self) -> usize {
        self.eq_rhs.len()
    }

    /// Drops equality rows that are linear combinations of earlier rows.
    ///
    /// Rows are scanned in order and projected against an orthonormal basis of
    /// the rows kept so far; the rhs is carried through the same projection, so
    /// a dependent row with a mismatched rhs is reported as inconsistent.
    pub fn presolve(&self) -> Result<ConicProgram, SocpError> {
        let m = self.neq();
        let mut basis: Vec<(DVector<f64>, f64)> = Vec::new();
        let mut keep = Vec::with_capacity(m);
        for i in 0..m {
            let row = self.eq_matrix.row(i).transpose();
            let row_norm = row.norm();
            let mut a = row.clone();
            let mut rhs = self.eq_rhs[i];
            // two passes of Gram-Schmidt for stability
            for _ in 0..2 {
                for (q, beta) in &basis {
                    let coef = q.dot(&a);
                    a.axpy(-coef, q, 1.0);
                    rhs -= coef * beta;
                }
            }
            let resid = a.norm();
            if resid <= DEPENDENT_ROW_TOL * row_norm.max(f64::MIN_POSITIVE) {
                let scale = 1.0 + self.eq_rhs[i].abs() + self.eq_rhs.amax();
                if rhs.abs() > 1e-8 * scale {
                    return Err(SocpError::InconsistentEqualities { row: i });
                }
                continue;
            }
            basis.push((a / resid, rhs / resid));
            keep.push(i);
        }
        if keep.len() == m {
            return Ok(self.clone());
        }
        let eq_matrix = self.eq_matrix.select_rows(keep.iter());
        let eq_rhs = DVector::from_iterator(keep.len(), keep.iter().map(|&i| self.eq_rhs[i]));
        ConicProgram::new(self.objective.clone(), eq_matrix, eq_rhs, self.cones.clone())
    }

    /// Line-oriented text dump.
    ///
    /// ```text
    /// conic-program v1
    /// nvar <int>
    /// neq <int>
    /// cone nonneg <len> | cone soc <len>     one per block, in order
    /// c <j> <value>                          one per objective entry
    /// a <i> <j> <value>                      nonzero entries of A
    /// b <i> <value>                          one per rhs entry
    /// ```
    /// Indices are 0-based; values use 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("conic-program v1\n");
        let _ = writeln!(out, "nvar {}", self.nvar());
        let _ = writeln!(out, "neq {}", self.neq());
        for b in self.cones.blocks() {
            match *b {
                ConeBlock::Nonneg(n) => {
                    let _ = writeln!(out, "cone nonneg {n}");
                }
                ConeBlock::SecondOrder(n) => {
                    let _ = writeln!(out, "cone soc {n}");
                }
            }
        }
        for (j, v) in self.objective.iter().enumerate() {
            let _ = writeln!(out, "c {j} {v:.16e}");
        }
        for i in 0..self.neq() {
            for j in 0..self.nvar() {
                let v = self.eq_matrix[(i, j)];
                if v != 0.0 {
                    let _ = writeln!(out, "a {i} {j} {v:.16e}");
                }
            }
        }
        for (i, v) in self.eq_rhs.iter().enumerate() {
            let _ = writeln!(out, "b {i} {v:.16e}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, SocpError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let err = |line: usize, msg: &str| SocpError::Parse {
            line: line + 1,
            message: msg.to_string(),
        };
        match lines.next() {
            Some((_, "conic-program v1")) => {}
            Some((n, _)) => return Err(err(n, "expected header `conic-program v1`")),
            None => return Err(err(0, "empty input")),
        }
        let mut nvar = None;
        let mut neq = None;
        let mut cones = ConeSpec::default();
        let mut c = Vec::new();
        let mut a = Vec::new();
        let mut b = Vec::new();
        for (n, line) in lines {
            let fields: Vec<&str> = line.split_whitespace().collect();
            let int = |s: &str| s.parse::<usize>().map_err(|_| err(n, "bad integer"));
            let num = |s: &str| s.parse::<f64>().map_err(|_| err(n, "bad number"));
            match fields.as_slice() {
                ["nvar", v] => nvar = Some(int(v)?),
                ["neq", v] => neq = Some(int(v)?),
                ["cone", "nonneg", v] => {
                    cones.push(ConeBlock::Nonneg(int(v)?));
                }
                ["cone", "soc", v] => {
                    cones.push(ConeBlock::SecondOrder(int(v)?));
                }
                ["c", j, v] => c.push((int(j)?, num(v)?)),
                ["a", i, j, v] => a.push((int(i)?, int(j)?, num(v)?)),
                ["b", i, v] => b.push((int(i)?, num(v)?)),
                _ => return Err(err(n, "unrecognized record")),
            }
        }
        let nvar = nvar.ok_or_else(|| err(0, "missing nvar"))?;
        let neq = neq.ok_or_else(|| err(0, "missing neq"))?;
        let mut objective = DVector::zeros(nvar);
        let mut eq_matrix = DMatrix::zeros(neq, nvar);
        let mut eq_rhs = DVector::zeros(neq);
        for (j, v) in c {
            *objective.get_mut(j).ok_or_else(|| err(0, "c index out of range"))? = v;
        }
        for (i, j, v) in a {
            *eq_matrix
                .get_mut((i, j))
                .ok_or_else(|| err(0, "a index out of range"))? = v;
        }
        for (i, v) in b {
            *eq_rhs.get_mut(i).ok_or_else(|| err(0, "b index out of range"))? = v;
        }
        ConicProgram::new(objective, eq_matrix, eq_rhs, cones)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_var(rows: &[[f64; 2]], rhs: &[f64]) -> ConicProgram {
        let a = DMatrix::from_fn(rows.len(), 2, |i, j| rows[i][j]);
        ConicProgram::new(
            DVector::from_vec(vec![1.0, 1.0]),
            a,
            DVector::from_column_slice(rhs),
            ConeSpec::new(vec![ConeBlock::Nonneg(2)]),
        )
        .unwrap()
    }

    #[test]
    fn presolve_drops_dependent_rows() {
        let p = two_var(&[[1.0, 1.0], [2.0, 2.0]], &[1.0, 2.0]);
        let q = p.presolve().unwrap();
        assert_eq!(q.neq(), 1);
        assert_eq!(q.eq_matrix.row(0).iter().copied().collect::<Vec<_>>(), vec![1.0, 1.0]);
    }

    #[test]
    fn presolve_rejects_inconsistent_rows() {
        let p = two_var(&[[1.0, 0.0], [1.0, 0.0]], &[1.0, 2.0]);
        assert_eq!(
            p.presolve().unwrap_err(),
            SocpError::InconsistentEqualities { row: 1 }
        );
    }

    #[test]
    fn presolve_keeps_full_rank() {
        let p = two_var(&[[1.0, 2.0], [0.0, 3.0]], &[1.0, 2.0]);
        assert_eq!(p.presolve().unwrap(), p);
    }

    #[test]
    fn text_dump_round_trips() {
        let p = ConicProgram::new(
            DVector::from_vec(vec![1.0, 0.0, 0.0, 0.1]),
            DMatrix::from_row_slice(2, 4, &[0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0 / 3.0]),
            DVector::from_vec(vec![3.0, 4.0]),
            ConeSpec::new(vec![ConeBlock::SecondOrder(3), ConeBlock::Nonneg(1)]),
        )
        .unwrap();
        let text = p.to_text();
        assert!(text.starts_with("conic-program v1\nnvar 4\nneq 2\ncone soc 3\ncone nonneg 1\n"));
        assert_eq!(ConicProgram::from_text(&text).unwrap(), p);
        assert!(matches!(
            ConicProgram::from_text("conic-program v2\n"),
            Err(SocpError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn rejects_bad_cones() {
        let r = ConicProgram::new(
            DVector::zeros(1),
            DMatrix::zeros(0, 1),
            DVector::zeros(0),
            ConeSpec::new(vec![ConeBlock::SecondOrder(1)]),
        );
        assert!(matches!(r, Err(SocpError::InvalidCone(_))));
    }
}
