//! Dense two-phase simplex for `max cᵀx  s.t.  Ax = b, x ≥ 0`.
//!
//! The tableau carries the artificial columns through both phases, so at
//! optimality they hold `B⁻¹` and the dual solution `yᵀ = c_Bᵀ B⁻¹` can be
//! read off directly.

use crate::error::{Error, Result};

const OPTIMALITY_TOL: f64 = 1e-10;
const FEASIBILITY_TOL: f64 = 1e-9;
/// Consecutive degenerate pivots before switching to Bland's rule.
const STALL_LIMIT: usize = 50;
const MAX_PIVOTS: usize = 100_000;

/// Equality-form linear program, rows of `a` are constraints.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal {
        x: Vec<f64>,
        objective: f64,
        /// Dual solution: `Aᵀy ≥ c` and `bᵀy = objective`.
        y: Vec<f64>,
    },
    Unbounded,
    Infeasible,
}

/// Pivot threshold and refactorization period of one simplex attempt.
#[derive(Clone, Copy, Debug)]
struct Settings {
    pivot_tol: f64,
    refactor_every: usize,
}

const STANDARD: Settings = Settings {
    pivot_tol: 1e-7,
    refactor_every: 8,
};
/// Tried in order after a numerical breakdown.
const FALLBACKS: [Settings; 2] = [
    Settings {
        pivot_tol: 1e-6,
        refactor_every: 1,
    },
    Settings {
        pivot_tol: 1e-5,
        refactor_every: 1,
    },
];
/// Smallest pivot accepted when rebuilding the tableau.
const SINGULAR_TOL: f64 = 1e-13;

struct Tableau {
    rows: usize,
    /// real + artificial + rhs
    width: usize,
    real: usize,
    data: Vec<f64>,
    /// Initial tableau `[A | I | b]`, so that `data = B⁻¹·original`.
    original: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.width + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.at(i, self.width - 1)
    }

    fn pivot(&mut self, row: usize, col: usize, reduced: &mut [f64]) {
        let w = self.width;
        let p = self.data[row * w + col];
        for j in 0..w {
            self.data[row * w + j] /= p;
        }
        let pivot_row: Vec<f64> = self.data[row * w..(row + 1) * w].to_vec();
        for i in 0..self.rows {
            if i == row {
                continue;
            }
            let f = self.data[i * w + col];
            if f != 0.0 {
                let r = &mut self.data[i * w..(i + 1) * w];
                for (x, &pv) in r.iter_mut().zip(&pivot_row) {
                    *x -= f * pv;
                }
                r[col] = 0.0;
            }
        }
        let f = reduced[col];
        if f != 0.0 {
            for (x, &pv) in reduced.iter_mut().zip(&pivot_row) {
                *x -= f * pv;
            }
            reduced[col] = 0.0;
        }
        self.basis[row] = col;
    }

    /// `c_j − Σᵢ c_{B(i)}·T_ij`; the last entry is minus the objective.
    fn reduced_costs(&self, cost: &dyn Fn(usize) -> f64) -> Vec<f64> {
        let w = self.width;
        let mut reduced: Vec<f64> = (0..w - 1).map(cost).chain([0.0]).collect();
        for i in 0..self.rows {
            let cb = cost(self.basis[i]);
            if cb != 0.0 {
                for (j, r) in reduced.iter_mut().enumerate() {
                    *r -= cb * self.at(i, j);
                }
            }
        }
        for &b in &self.basis {
            reduced[b] = 0.0;
        }
        reduced
    }

    /// Recomputes `B⁻¹·original` for the current basis by Gauss–Jordan
    /// elimination with partial pivoting, discarding accumulated roundoff.
    fn refactor(&mut self) -> Result<()> {
        let (m, w) = (self.rows, self.width);
        let mut bmat: Vec<f64> = (0..m)
            .flat_map(|i| self.basis.iter().map(move |&b| (i, b)))
            .map(|(i, b)| self.original[i * w + b])
            .collect();
        let mut work = self.original.clone();
        for k in 0..m {
            let p = (k..m)
                .max_by(|&a, &b| bmat[a * m + k].abs().total_cmp(&bmat[b * m + k].abs()))
                .expect("nonempty range");
            if bmat[p * m + k].abs() < SINGULAR_TOL {
                return Err(Error::Numerical("singular simplex basis".into()));
            }
            if p != k {
                for j in 0..m {
                    bmat.swap(k * m + j, p * m + j);
                }
                for j in 0..w {
                    work.swap(k * w + j, p * w + j);
                }
            }
            let piv = bmat[k * m + k];
            for j in 0..m {
                bmat[k * m + j] /= piv;
            }
            for j in 0..w {
                work[k * w + j] /= piv;
            }
            for i in 0..m {
                let f = bmat[i * m + k];
                if i == k || f == 0.0 {
                    continue;
                }
                for j in 0..m {
                    bmat[i * m + j] -= f * bmat[k * m + j];
                }
                for j in 0..w {
                    work[i * w + j] -= f * work[k * w + j];
                }
            }
        }
        for i in 0..m {
            let r = &mut work[i * w + w - 1];
            if *r < 0.0 {
                if *r < -RESIDUAL_TOL {
                    return Err(Error::Numerical(format!(
                        "basic variable at {r:.3e} after refactoring"
                    )));
                }
                *r = 0.0;
            }
        }
        self.data = work;
        Ok(())
    }

    /// Simplex iterations over columns `< allowed`. Returns `false` when
    /// the objective is unbounded.
    fn optimize(
        &mut self,
        cost: &dyn Fn(usize) -> f64,
        allowed: usize,
        pivots: &mut usize,
        settings: Settings,
    ) -> Result<bool> {
        let pivot_tol = settings.pivot_tol;
        let mut reduced = self.reduced_costs(cost);
        let mut stalled = 0usize;
        let mut since_refactor = 0usize;
        loop {
            if *pivots >= MAX_PIVOTS {
                return Err(Error::NonConvergence(*pivots));
            }
            if since_refactor >= settings.refactor_every {
                self.refactor()?;
                reduced = self.reduced_costs(cost);
                since_refactor = 0;
            }
            let bland = stalled >= STALL_LIMIT;
            let entering = if bland {
                (0..allowed).find(|&j| reduced[j] > OPTIMALITY_TOL)
            } else {
                (0..allowed)
                    .filter(|&j| reduced[j] > OPTIMALITY_TOL)
                    .max_by(|&i, &j| reduced[i].total_cmp(&reduced[j]))
            };
            let Some(col) = entering else {
                if since_refactor > 0 {
                    // confirm optimality on a clean tableau
                    self.refactor()?;
                    reduced = self.reduced_costs(cost);
                    since_refactor = 0;
                    continue;
                }
                return Ok(true);
            };
            // Harris two-pass ratio test: bound the step with a small
            // feasibility slack, then take the largest pivot under that bound
            let mut limit = f64::INFINITY;
            for i in 0..self.rows {
                let a = self.at(i, col);
                if a > pivot_tol {
                    limit = limit.min((self.rhs(i).max(0.0) + FEASIBILITY_TOL) / a);
                }
            }
            let mut best: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let a = self.at(i, col);
                if a <= pivot_tol {
                    continue;
                }
                let ratio = self.rhs(i).max(0.0) / a;
                if ratio > limit {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((bi, _)) if bland => self.basis[i] < self.basis[bi],
                    Some((bi, _)) => a > self.at(bi, col),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            let Some((row, ratio)) = best else {
                return Ok(false);
            };
            if ratio <= 1e-12 {
                stalled += 1;
            } else {
                stalled = 0;
            }
            // the ratio test treated a slightly negative right-hand side as
            // zero; the pivot must agree or the error is divided by `a`
            let w = self.width;
            if self.data[row * w + w - 1] < 0.0 {
                self.data[row * w + w - 1] = 0.0;
            }
            self.pivot(row, col, &mut reduced);
            *pivots += 1;
            since_refactor += 1;
        }
    }
}

/// Relative norm below which a row counts as a combination of earlier ones.
const RANK_TOL: f64 = 1e-7;
/// Largest `|Ax − b|` accepted in the returned solution, relative to `‖b‖∞`.
const RESIDUAL_TOL: f64 = 1e-7;

/// Indices of a maximal set of linearly independent rows, by modified
/// Gram–Schmidt in row order.
fn independent_rows(a: &[Vec<f64>]) -> Vec<usize> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut keep = Vec::new();
    for (i, row) in a.iter().enumerate() {
        let norm0 = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm0 == 0.0 {
            continue;
        }
        let mut r = row.clone();
        for q in &basis {
            let dot: f64 = r.iter().zip(q).map(|(x, y)| x * y).sum();
            for (x, y) in r.iter_mut().zip(q) {
                *x -= dot * y;
            }
        }
        let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > RANK_TOL * norm0 {
            basis.push(r.into_iter().map(|x| x / norm).collect());
            keep.push(i);
        }
    }
    keep
}

impl LinearProgram {
    /// Solves the program after discarding linearly dependent constraints.
    /// Dual entries of discarded rows are zero.
    pub fn solve(&self) -> Result<LpOutcome> {
        let m = self.a.len();
        let n = self.c.len();
        if self.b.len() != m || self.a.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch(format!(
                "LP with {m} rows, {} rhs entries and {n} costs",
                self.b.len()
            )));
        }
        let keep = independent_rows(&self.a);
        let reduced = LinearProgram {
            a: keep.iter().map(|&i| self.a[i].clone()).collect(),
            b: keep.iter().map(|&i| self.b[i]).collect(),
            c: self.c.clone(),
        };
        let mut outcome = reduced.solve_full_rank(STANDARD);
        for settings in FALLBACKS {
            if !matches!(outcome, Err(Error::Numerical(_))) {
                break;
            }
            outcome = reduced.solve_full_rank(settings);
        }
        match outcome? {
            LpOutcome::Optimal { x, objective, y } => {
                let scale = 1.0 + self.b.iter().map(|v| v.abs()).fold(0.0, f64::max);
                let residual = |rows: &mut dyn Iterator<Item = usize>| {
                    rows.map(|i| {
                        let ax: f64 = self.a[i].iter().zip(&x).map(|(a, x)| a * x).sum();
                        (ax - self.b[i]).abs()
                    })
                    .fold(0.0, f64::max)
                };
                let kept = residual(&mut keep.iter().copied());
                if kept > RESIDUAL_TOL * scale {
                    return Err(Error::Numerical(format!(
                        "simplex solution violates its constraints by {kept:.3e}"
                    )));
                }
                if residual(&mut (0..m)) > RESIDUAL_TOL * scale {
                    // the dropped rows are inconsistent with the kept ones
                    return Ok(LpOutcome::Infeasible);
                }
                let mut full_y = vec![0.0; m];
                for (k, &i) in keep.iter().enumerate() {
                    full_y[i] = y[k];
                }
                Ok(LpOutcome::Optimal {
                    x,
                    objective,
                    y: full_y,
                })
            }
            other => Ok(other),
        }
    }

    fn solve_full_rank(&self, settings: Settings) -> Result<LpOutcome> {
        let m = self.a.len();
        let n = self.c.len();
        let width = n + m + 1;
        let mut data = vec![0.0; m * width];
        let mut flips = vec![1.0; m];
        for i in 0..m {
            let f = if self.b[i] < 0.0 { -1.0 } else { 1.0 };
            flips[i] = f;
            for j in 0..n {
                data[i * width + j] = f * self.a[i][j];
            }
            data[i * width + n + i] = 1.0;
            data[i * width + width - 1] = f * self.b[i];
        }
        let mut t = Tableau {
            rows: m,
            width,
            real: n,
            original: data.clone(),
            data,
            basis: (n..n + m).collect(),
        };
        let mut pivots = 0usize;

        // Phase I: maximize −Σ artificials.
        let phase1 = |j: usize| if (n..n + m).contains(&j) { -1.0 } else { 0.0 };
        t.optimize(&phase1, n, &mut pivots, settings)?;
        let infeasibility = t.reduced_costs(&phase1)[width - 1];
        let scale = 1.0 + self.b.iter().map(|x| x.abs()).fold(0.0, f64::max);
        if infeasibility > FEASIBILITY_TOL * scale {
            return Ok(LpOutcome::Infeasible);
        }
        // Drive the remaining artificials out of the basis. Rows have full
        // rank, so a real column is always available.
        let mut scratch = vec![0.0; width];
        for i in 0..m {
            if t.basis[i] >= n {
                // the artificial is zero up to the feasibility tolerance;
                // pivoting on a small entry must not amplify that residue
                t.data[i * width + width - 1] = 0.0;
                let col = (0..n)
                    .filter(|&j| t.at(i, j).abs() > settings.pivot_tol)
                    .max_by(|&a, &b| t.at(i, a).abs().total_cmp(&t.at(i, b).abs()))
                    .ok_or_else(|| {
                        Error::Numerical(format!("constraint {i} is numerically dependent"))
                    })?;
                t.pivot(i, col, &mut scratch);
                pivots += 1;
            }
        }
        t.refactor()?;

        // Phase II.
        let cost = |j: usize| if j < n { self.c[j] } else { 0.0 };
        if !t.optimize(&cost, t.real, &mut pivots, settings)? {
            return Ok(LpOutcome::Unbounded);
        }

        let mut x = vec![0.0; n];
        for i in 0..m {
            if t.basis[i] < n {
                x[t.basis[i]] = t.rhs(i).max(0.0);
            }
        }
        let mut y = vec![0.0; m];
        for (k, yk) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for i in 0..m {
                acc += cost(t.basis[i]) * t.at(i, n + k);
            }
            *yk = acc * flips[k];
        }
        let objective = self.c.iter().zip(&x).map(|(c, x)| c * x).sum();
        Ok(LpOutcome::Optimal { x, objective, y })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn optimal(lp: &LinearProgram) -> (Vec<f64>, f64, Vec<f64>) {
        match lp.solve().unwrap() {
            LpOutcome::Optimal { x, objective, y } => (x, objective, y),
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn small_max_problem() {
        // max 3x + 2y  s.t. x + y + s1 = 4, x + 3y + s2 = 6
        let lp = LinearProgram {
            a: vec![vec![1.0, 1.0, 1.0, 0.0], vec![1.0, 3.0, 0.0, 1.0]],
            b: vec![4.0, 6.0],
            c: vec![3.0, 2.0, 0.0, 0.0],
        };
        let (x, obj, y) = optimal(&lp);
        assert!((obj - 12.0).abs() < 1e-12);
        assert!((x[0] - 4.0).abs() < 1e-12);
        let dual_obj: f64 = y.iter().zip(&lp.b).map(|(a, b)| a * b).sum();
        assert!((dual_obj - obj).abs() < 1e-12);
        for j in 0..4 {
            let col: f64 = (0..2).map(|i| lp.a[i][j] * y[i]).sum();
            assert!(col >= lp.c[j] - 1e-12);
        }
    }

    #[test]
    fn negative_rhs_and_duals() {
        // max -x1 - x2  s.t.  -x1 + x2 = -1  (x1 = 1 + x2)
        let lp = LinearProgram {
            a: vec![vec![-1.0, 1.0]],
            b: vec![-1.0],
            c: vec![-1.0, -1.0],
        };
        let (x, obj, y) = optimal(&lp);
        assert!((obj + 1.0).abs() < 1e-12);
        assert!((x[0] - 1.0).abs() < 1e-12 && x[1].abs() < 1e-12);
        assert!((y[0] * -1.0 - obj).abs() < 1e-12);
    }

    #[test]
    fn redundant_rows_are_tolerated() {
        let lp = LinearProgram {
            a: vec![vec![1.0, 1.0], vec![2.0, 2.0]],
            b: vec![1.0, 2.0],
            c: vec![1.0, 0.0],
        };
        let (x, obj, y) = optimal(&lp);
        assert!((obj - 1.0).abs() < 1e-12 && (x[0] - 1.0).abs() < 1e-12);
        let dual_obj: f64 = y.iter().zip(&lp.b).map(|(a, b)| a * b).sum();
        assert!((dual_obj - 1.0).abs() < 1e-12);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let infeasible = LinearProgram {
            a: vec![vec![1.0, 1.0]],
            b: vec![-1.0],
            c: vec![0.0, 0.0],
        };
        assert_eq!(infeasible.solve().unwrap(), LpOutcome::Infeasible);
        let unbounded = LinearProgram {
            a: vec![vec![1.0, -1.0]],
            b: vec![0.0],
            c: vec![1.0, 0.0],
        };
        assert_eq!(unbounded.solve().unwrap(), LpOutcome::Unbounded);
    }
}
