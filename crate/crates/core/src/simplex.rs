//! Dense two-phase simplex for the small linear programs behind the
//! generalized passive-decoy estimator.
//!
//! Pivoting follows Bland's rule (lowest eligible column enters, lowest
//! basic index leaves on ratio ties), so results are deterministic and the
//! method cannot cycle. Rows are scaled to unit max-norm before solving.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-12;
const COST_TOL: f64 = 1e-12;
const FEASIBILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
    pub label: String,
}

/// `min c.x` subject to the constraints and `x >= 0`.
#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    vars: usize,
    constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

impl LinearProgram {
    pub fn new(vars: usize) -> Self {
        Self {
            vars,
            constraints: Vec::new(),
        }
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn push(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64, label: impl Into<String>) {
        assert_eq!(coeffs.len(), self.vars);
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
            label: label.into(),
        });
    }

    /// Sparse helper: `terms` are `(variable, coefficient)` pairs.
    pub fn push_terms(&mut self, terms: &[(usize, f64)], relation: Relation, rhs: f64, label: impl Into<String>) {
        let mut coeffs = vec![0.0; self.vars];
        for &(k, c) in terms {
            coeffs[k] += c;
        }
        self.push(coeffs, relation, rhs, label);
    }

    pub fn minimize(&self, objective: &[f64]) -> Result<LpSolution> {
        assert_eq!(objective.len(), self.vars);
        Tableau::build(self).solve(objective)
    }

    pub fn maximize(&self, objective: &[f64]) -> Result<LpSolution> {
        let negated: Vec<f64> = objective.iter().map(|c| -c).collect();
        let mut sol = self.minimize(&negated)?;
        sol.objective = -sol.objective;
        Ok(sol)
    }
}

struct Tableau<'a> {
    lp: &'a LinearProgram,
    // rows x (cols + 1); last column is the right-hand side
    a: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
    first_artificial: usize,
    artificial_row: Vec<Option<usize>>,
}

impl<'a> Tableau<'a> {
    fn build(lp: &'a LinearProgram) -> Self {
        let m = lp.constraints.len();
        let n = lp.vars;
        let slacks = lp
            .constraints
            .iter()
            .filter(|c| c.relation != Relation::Eq)
            .count();
        // every row gets an artificial unless its slack can start basic
        let mut rows = Vec::with_capacity(m);
        for c in &lp.constraints {
            let scale = c.coeffs.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
            let scale = if scale > 0.0 { scale } else { 1.0 };
            let mut coeffs: Vec<f64> = c.coeffs.iter().map(|v| v / scale).collect();
            let mut rhs = c.rhs / scale;
            let mut relation = c.relation;
            if rhs < 0.0 {
                coeffs.iter_mut().for_each(|v| *v = -*v);
                rhs = -rhs;
                relation = match relation {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
            }
            rows.push((coeffs, relation, rhs));
        }
        let artificials = rows.iter().filter(|r| r.1 != Relation::Le).count();
        let first_artificial = n + slacks;
        let cols = first_artificial + artificials;
        let mut a = vec![vec![0.0; cols + 1]; m];
        let mut basis = vec![0; m];
        let mut artificial_row = vec![None; m];
        let mut slack = n;
        let mut art = first_artificial;
        for (r, (coeffs, relation, rhs)) in rows.into_iter().enumerate() {
            a[r][..n].copy_from_slice(&coeffs);
            a[r][cols] = rhs;
            match relation {
                Relation::Le => {
                    a[r][slack] = 1.0;
                    basis[r] = slack;
                    slack += 1;
                }
                Relation::Ge => {
                    a[r][slack] = -1.0;
                    slack += 1;
                    a[r][art] = 1.0;
                    basis[r] = art;
                    artificial_row[r] = Some(art);
                    art += 1;
                }
                Relation::Eq => {
                    a[r][art] = 1.0;
                    basis[r] = art;
                    artificial_row[r] = Some(art);
                    art += 1;
                }
            }
        }
        Tableau {
            lp,
            a,
            basis,
            cols,
            first_artificial,
            artificial_row,
        }
    }

    fn pivot(&mut self, z: &mut [f64], row: usize, col: usize) {
        let p = self.a[row][col];
        self.a[row].iter_mut().for_each(|v| *v /= p);
        let pivot_row = self.a[row].clone();
        for (r, line) in self.a.iter_mut().enumerate() {
            if r == row {
                continue;
            }
            let factor = line[col];
            if factor != 0.0 {
                for (v, pv) in line.iter_mut().zip(&pivot_row) {
                    *v -= factor * pv;
                }
                line[col] = 0.0;
            }
        }
        let factor = z[col];
        if factor != 0.0 {
            for (v, pv) in z.iter_mut().zip(&pivot_row) {
                *v -= factor * pv;
            }
            z[col] = 0.0;
        }
        self.basis[row] = col;
    }

    /// Runs simplex iterations on reduced-cost row `z` over columns `< limit`.
    fn iterate(&mut self, z: &mut [f64], limit: usize) -> Result<()> {
        let rhs = self.cols;
        let max_iter = 50 * (self.cols + self.a.len()) + 1000;
        for _ in 0..max_iter {
            let Some(col) = (0..limit).find(|&c| z[c] < -COST_TOL) else {
                return Ok(());
            };
            let mut best: Option<(usize, f64)> = None;
            for (r, line) in self.a.iter().enumerate() {
                if line[col] > PIVOT_TOL {
                    let ratio = line[rhs] / line[col];
                    match best {
                        None => best = Some((r, ratio)),
                        Some((br, bratio)) => {
                            if ratio < bratio - 1e-15
                                || (ratio <= bratio + 1e-15 && self.basis[r] < self.basis[br])
                            {
                                best = Some((r, ratio));
                            }
                        }
                    }
                }
            }
            let Some((row, _)) = best else {
                return Err(Error::Config("linear program is unbounded".into()));
            };
            self.pivot(z, row, col);
        }
        Err(Error::Config("simplex iteration limit reached".into()))
    }

    fn solve(mut self, objective: &[f64]) -> Result<LpSolution> {
        let rhs = self.cols;
        // phase 1: minimize the sum of artificials
        let mut z = vec![0.0; self.cols + 1];
        for c in self.first_artificial..self.cols {
            z[c] = 1.0;
        }
        for r in 0..self.a.len() {
            if self.artificial_row[r].is_some() {
                for c in 0..=self.cols {
                    z[c] -= self.a[r][c];
                }
            }
        }
        self.iterate(&mut z, self.cols)?;
        let infeasibility = -z[rhs];
        if infeasibility > FEASIBILITY_TOL {
            let worst = (0..self.a.len())
                .filter(|&r| self.basis[r] >= self.first_artificial)
                .max_by(|&x, &y| self.a[x][rhs].total_cmp(&self.a[y][rhs]));
            let row = worst
                .and_then(|r| self.artificial_row.iter().position(|&a| a == Some(self.basis[r])))
                .unwrap_or(0);
            return Err(Error::Infeasible {
                constraint: self.lp.constraints[row].label.clone(),
            });
        }
        // drive zero-level artificials out of the basis where possible
        for r in 0..self.a.len() {
            if self.basis[r] >= self.first_artificial {
                if let Some(col) =
                    (0..self.first_artificial).find(|&c| self.a[r][c].abs() > PIVOT_TOL)
                {
                    let mut dummy = vec![0.0; self.cols + 1];
                    self.pivot(&mut dummy, r, col);
                }
            }
        }
        // phase 2
        let mut z = vec![0.0; self.cols + 1];
        z[..self.lp.vars].copy_from_slice(objective);
        for r in 0..self.a.len() {
            let b = self.basis[r];
            let cb = z[b];
            if cb != 0.0 {
                for c in 0..=self.cols {
                    z[c] -= cb * self.a[r][c];
                }
            }
        }
        self.iterate(&mut z, self.first_artificial)?;
        let mut x = vec![0.0; self.lp.vars];
        for (r, &b) in self.basis.iter().enumerate() {
            if b < self.lp.vars {
                x[b] = self.a[r][rhs].max(0.0);
            }
        }
        let objective_value = objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        Ok(LpSolution {
            x,
            objective: objective_value,
        })
    }
}
