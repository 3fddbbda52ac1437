//! Dense two-phase simplex for small linear programs.
//!
//! Problems here have at most a few hundred variables, so a full tableau
//! with Bland's rule (no cycling) is both fast enough and easy to audit.
//! Lexicographic tie-breaking restricts each stage to the optimal face of
//! the previous one: nonbasic columns with strictly negative reduced cost are
//! fixed at zero, so no objective slack is ever introduced.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

/// Relation of a linear row to its right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

const PIVOT_EPS: f64 = 1e-10;
const COST_EPS: f64 = 1e-10;
const FEASIBILITY_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct LpRow {
    pub coefficients: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// `maximize objective · x  s.t.  rows,  x ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    num_vars: usize,
    objective: Vec<f64>,
    rows: Vec<LpRow>,
    fixed_zero: BTreeSet<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpError {
    Infeasible,
    Unbounded,
    PivotLimit { pivots: usize },
}

/// Columns and rows pinned by the optimal face of a solve.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OptimalFace {
    pub zero_vars: Vec<usize>,
    pub tight_rows: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub value: f64,
    pub pivots: usize,
    pub face: OptimalFace,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            objective: vec![0.0; num_vars],
            rows: Vec::new(),
            fixed_zero: BTreeSet::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn rows(&self) -> &[LpRow] {
        &self.rows
    }

    pub fn set_objective(&mut self, objective: Vec<f64>) {
        assert_eq!(objective.len(), self.num_vars);
        self.objective = objective;
    }

    pub fn add_row(&mut self, coefficients: Vec<f64>, relation: Relation, rhs: f64) {
        assert_eq!(coefficients.len(), self.num_vars);
        self.rows.push(LpRow {
            coefficients,
            relation,
            rhs,
        });
    }

    /// Keeps only points of the optimal face described by `face`.
    pub fn restrict_to_face(&mut self, face: &OptimalFace) {
        for &r in &face.tight_rows {
            self.rows[r].relation = Relation::Eq;
        }
        self.fixed_zero.extend(face.zero_vars.iter().copied());
    }

    pub fn solve(&self, max_pivots: usize) -> Result<LpSolution, LpError> {
        Tableau::build(self).run(self, max_pivots)
    }

    /// Maximizes the objective, then minimizes each variable of `order` in
    /// turn over the optimal set of the previous stages.
    pub fn solve_lexicographic(&self, order: &[usize], max_pivots: usize) -> Result<LpSolution, LpError> {
        let mut current = self.clone();
        let mut best = current.solve(max_pivots)?;
        let mut pivots = best.pivots;
        current.restrict_to_face(&best.face);
        for &j in order {
            if current.fixed_zero.contains(&j) {
                continue;
            }
            let mut stage = current.clone();
            let mut objective = vec![0.0; self.num_vars];
            objective[j] = -1.0;
            stage.objective = objective;
            let sol = stage.solve(max_pivots.saturating_sub(pivots))?;
            pivots += sol.pivots;
            current.restrict_to_face(&sol.face);
            best.x = sol.x;
        }
        best.value = dot(&self.objective, &best.x);
        best.pivots = pivots;
        Ok(best)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Column {
    Structural(usize),
    /// Slack or surplus of the given (original) row.
    Slack(usize),
    Artificial,
}

struct Tableau {
    /// Constraint rows, each `ncols + 1` wide with the RHS last.
    a: Vec<Vec<f64>>,
    basis: Vec<usize>,
    columns: Vec<Column>,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let mut rows: Vec<(Vec<f64>, Relation, f64)> = lp
            .rows
            .iter()
            .map(|r| (r.coefficients.clone(), r.relation, r.rhs))
            .collect();
        for &j in &lp.fixed_zero {
            let mut c = vec![0.0; lp.num_vars];
            c[j] = 1.0;
            rows.push((c, Relation::Eq, 0.0));
        }
        let original_rows = lp.rows.len();
        for (c, rel, rhs) in rows.iter_mut() {
            if *rhs < 0.0 {
                c.iter_mut().for_each(|v| *v = -*v);
                *rhs = -*rhs;
                *rel = match rel {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
            }
        }
        let mut columns: Vec<Column> = (0..lp.num_vars).map(Column::Structural).collect();
        for (i, (_, rel, _)) in rows.iter().enumerate() {
            if *rel != Relation::Eq && i < original_rows {
                columns.push(Column::Slack(i));
            } else if *rel != Relation::Eq {
                unreachable!("face rows are equalities");
            }
        }
        let artificial_start = columns.len();
        let needs_artificial: Vec<bool> = rows.iter().map(|(_, rel, _)| *rel != Relation::Le).collect();
        columns.extend(needs_artificial.iter().filter(|&&b| b).map(|_| Column::Artificial));
        let ncols = columns.len();

        let mut a = Vec::with_capacity(rows.len());
        let mut basis = Vec::with_capacity(rows.len());
        let mut slack_col = lp.num_vars;
        let mut art_col = artificial_start;
        for (c, rel, rhs) in rows {
            let mut row = vec![0.0; ncols + 1];
            row[..lp.num_vars].copy_from_slice(&c);
            row[ncols] = rhs;
            match rel {
                Relation::Le => {
                    row[slack_col] = 1.0;
                    basis.push(slack_col);
                    slack_col += 1;
                }
                Relation::Ge => {
                    row[slack_col] = -1.0;
                    slack_col += 1;
                    row[art_col] = 1.0;
                    basis.push(art_col);
                    art_col += 1;
                }
                Relation::Eq => {
                    row[art_col] = 1.0;
                    basis.push(art_col);
                    art_col += 1;
                }
            }
            a.push(row);
        }
        Self { a, basis, columns }
    }

    fn ncols(&self) -> usize {
        self.columns.len()
    }

    fn pivot(&mut self, r: usize, e: usize, costs: &mut [f64]) {
        let w = self.ncols() + 1;
        let p = self.a[r][e];
        for v in self.a[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.a[r].clone();
        for (i, row) in self.a.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[e];
            if f != 0.0 {
                for k in 0..w {
                    row[k] -= f * pivot_row[k];
                }
                row[e] = 0.0;
                if row[w - 1] < 0.0 && row[w - 1] > -1e-12 {
                    row[w - 1] = 0.0;
                }
            }
        }
        let f = costs[e];
        if f != 0.0 {
            for k in 0..w {
                costs[k] -= f * pivot_row[k];
            }
            costs[e] = 0.0;
        }
        self.basis[r] = e;
    }

    /// Reduced-cost row `c_j − c_B B⁻¹ A_j` (RHS slot holds `−c_B b`).
    fn reduced_costs(&self, c: &[f64]) -> Vec<f64> {
        let w = self.ncols() + 1;
        let mut costs = vec![0.0; w];
        costs[..c.len()].copy_from_slice(c);
        for (i, row) in self.a.iter().enumerate() {
            let cb = if self.basis[i] < c.len() { c[self.basis[i]] } else { 0.0 };
            if cb != 0.0 {
                for k in 0..w {
                    costs[k] -= cb * row[k];
                }
            }
        }
        costs
    }

    /// Bland's rule simplex iterations over columns allowed by `allowed`.
    fn iterate(
        &mut self,
        costs: &mut [f64],
        allowed: impl Fn(usize) -> bool,
        pivots: &mut usize,
        max_pivots: usize,
    ) -> Result<(), LpError> {
        let n = self.ncols();
        loop {
            let Some(e) = (0..n).find(|&j| allowed(j) && costs[j] > COST_EPS) else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.a.iter().enumerate() {
                let coef = row[e];
                if coef > PIVOT_EPS {
                    let ratio = row[n] / coef;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - 1e-12 || (ratio <= lr + 1e-12 && self.basis[i] < self.basis[li]) {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else {
                return Err(LpError::Unbounded);
            };
            if *pivots >= max_pivots {
                return Err(LpError::PivotLimit { pivots: *pivots });
            }
            self.pivot(r, e, costs);
            *pivots += 1;
        }
    }

    fn run(mut self, lp: &LinearProgram, max_pivots: usize) -> Result<LpSolution, LpError> {
        let n = self.ncols();
        let is_art = |cols: &[Column], j: usize| cols[j] == Column::Artificial;
        let mut pivots = 0;

        // Phase 1: maximize −Σ artificials.
        let phase1: Vec<f64> = self
            .columns
            .iter()
            .map(|c| if *c == Column::Artificial { -1.0 } else { 0.0 })
            .collect();
        let mut costs = self.reduced_costs(&phase1);
        self.iterate(&mut costs, |_| true, &mut pivots, max_pivots)?;
        let infeasibility: f64 = self
            .a
            .iter()
            .zip(&self.basis)
            .filter(|(_, &b)| is_art(&self.columns, b))
            .map(|(row, _)| row[n])
            .sum();
        let scale = 1.0 + lp.rows.iter().map(|r| r.rhs.abs()).fold(0.0, f64::max);
        if infeasibility > FEASIBILITY_EPS * scale {
            return Err(LpError::Infeasible);
        }

        // Drive artificials out of the basis; drop rows that are redundant.
        let mut i = 0;
        while i < self.a.len() {
            if is_art(&self.columns, self.basis[i]) {
                let replacement = (0..n).find(|&j| !is_art(&self.columns, j) && self.a[i][j].abs() > PIVOT_EPS);
                match replacement {
                    Some(j) => {
                        let mut scratch = vec![0.0; n + 1];
                        self.pivot(i, j, &mut scratch);
                        pivots += 1;
                    }
                    None => {
                        self.a.remove(i);
                        self.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }

        // Phase 2.
        let mut phase2 = vec![0.0; n];
        phase2[..lp.num_vars].copy_from_slice(&lp.objective);
        let mut costs = self.reduced_costs(&phase2);
        let columns = self.columns.clone();
        self.iterate(
            &mut costs,
            |j| columns[j] != Column::Artificial,
            &mut pivots,
            max_pivots,
        )?;

        let mut x = vec![0.0; lp.num_vars];
        for (i, &b) in self.basis.iter().enumerate() {
            if let Column::Structural(j) = self.columns[b] {
                x[j] = self.a[i][n].max(0.0);
            }
        }
        let basic: BTreeSet<usize> = self.basis.iter().copied().collect();
        let mut face = OptimalFace::default();
        for (j, col) in self.columns.iter().enumerate() {
            if basic.contains(&j) || costs[j] >= -COST_EPS {
                continue;
            }
            match *col {
                Column::Structural(v) => face.zero_vars.push(v),
                Column::Slack(r) => face.tight_rows.push(r),
                Column::Artificial => {}
            }
        }
        Ok(LpSolution {
            value: dot(&lp.objective, &x),
            x,
            pivots,
            face,
        })
    }
}
