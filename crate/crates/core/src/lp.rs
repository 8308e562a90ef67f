//! Exact rational linear programming: `max c·x  s.t.  A x = b, x ≥ 0`.

use std::collections::HashSet;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::bell::{complement, encode, tuples, DeterministicStrategy, ProbabilityBox, Scenario};
use crate::constraints::ConstraintRegime;
use crate::error::{structural, Error, Result};
use crate::inequalities::BellFunctional;
use crate::scalar::{format_rational, Rational, Scalar};
use crate::RationalBox;

/// Equality-form LP over nonnegative variables, stored by sparse rows.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram {
    vars: usize,
    objective: Vec<Rational>,
    rows: Vec<Vec<(usize, Rational)>>,
    rhs: Vec<Rational>,
}

impl LinearProgram {
    pub fn new(vars: usize) -> Self {
        LinearProgram { vars, objective: vec![Rational::zero(); vars], rows: vec![], rhs: vec![] }
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn objective(&self) -> &[Rational] {
        &self.objective
    }

    pub fn row(&self, i: usize) -> &[(usize, Rational)] {
        &self.rows[i]
    }

    pub fn rhs(&self) -> &[Rational] {
        &self.rhs
    }

    pub fn set_objective(&mut self, c: Vec<Rational>) -> Result<()> {
        if c.len() != self.vars {
            return structural(format!("objective has {} entries, expected {}", c.len(), self.vars));
        }
        self.objective = c;
        Ok(())
    }

    /// Adds `Σ coef·x_j = rhs`; repeated indices are summed.
    pub fn add_row(&mut self, terms: impl IntoIterator<Item = (usize, Rational)>, rhs: Rational) -> Result<()> {
        let mut row: Vec<(usize, Rational)> = Vec::new();
        for (j, v) in terms {
            if j >= self.vars {
                return structural(format!("variable {j} out of range"));
            }
            row.push((j, v));
        }
        row.sort_by_key(|(j, _)| *j);
        let mut merged: Vec<(usize, Rational)> = Vec::with_capacity(row.len());
        for (j, v) in row {
            match merged.last_mut() {
                Some((k, w)) if *k == j => *w += v,
                _ => merged.push((j, v)),
            }
        }
        merged.retain(|(_, v)| !v.is_zero());
        self.rows.push(merged);
        self.rhs.push(rhs);
        Ok(())
    }

    pub fn add_dense_row(&mut self, coefs: &[Rational], rhs: Rational) -> Result<()> {
        if coefs.len() != self.vars {
            return structural("dense row length differs from the variable count");
        }
        self.add_row(coefs.iter().cloned().enumerate(), rhs)
    }

    pub fn value_of(&self, x: &[Rational]) -> Rational {
        self.objective.iter().zip(x).map(|(c, v)| c * v).fold(Rational::zero(), |a, b| a + b)
    }

    /// Exact feasibility of `x`.
    pub fn is_feasible(&self, x: &[Rational]) -> bool {
        x.len() == self.vars
            && x.iter().all(|v| !v.is_negative())
            && self.rows.iter().zip(&self.rhs).all(|(row, b)| {
                row.iter().map(|(j, v)| v * &x[*j]).fold(Rational::zero(), |a, t| a + t) == *b
            })
    }

    /// Reduced costs `c_j − y·A_j` for row multipliers `y`.
    pub fn reduced_costs(&self, y: &[Rational]) -> Vec<Rational> {
        let mut d = self.objective.clone();
        for (row, yi) in self.rows.iter().zip(y) {
            if yi.is_zero() {
                continue;
            }
            for (j, v) in row {
                d[*j] -= v * yi;
            }
        }
        d
    }

    /// True when `y` proves `value` is an upper bound: `Aᵀy ≥ c` and `b·y = value`.
    pub fn certifies(&self, y: &[Rational], value: &Rational) -> bool {
        y.len() == self.rows.len()
            && self.reduced_costs(y).iter().all(|d| !d.is_positive())
            && self.rhs.iter().zip(y).map(|(b, v)| b * v).fold(Rational::zero(), |a, t| a + t) == *value
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

impl fmt::Display for LpStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LpStatus::Optimal => "optimal",
            LpStatus::Infeasible => "infeasible",
            LpStatus::Unbounded => "unbounded",
        })
    }
}

/// `value`, `x` and `dual` are meaningful only when `status` is optimal.
#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub value: Rational,
    pub x: Vec<Rational>,
    /// Row multipliers with `Aᵀy ≥ c` and `b·y = value`.
    pub dual: Vec<Rational>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Pricing {
    /// Lowest-index improving column; lowest-index leaving variable on ties.
    #[default]
    Bland,
    /// Largest reduced cost, switching to Bland's rule for good after a run
    /// of degenerate pivots.
    LargestThenBland,
}

const DEGENERATE_STREAK: usize = 50;

pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution> {
    solve_lp_with(lp, Pricing::Bland)
}

/// Two-phase revised simplex in exact arithmetic. The returned optimum is
/// re-verified (primal feasibility, dual feasibility, equal objective) and
/// an internal error is raised if the check fails.
pub fn solve_lp_with(lp: &LinearProgram, pricing: Pricing) -> Result<LpSolution> {
    let n = lp.vars;
    let m = lp.rows.len();
    let sign: Vec<bool> = lp.rhs.iter().map(|b| b.is_negative()).collect();
    let mut cols: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); n + m];
    for (i, row) in lp.rows.iter().enumerate() {
        for (j, v) in row {
            cols[*j].push((i, if sign[i] { -v.clone() } else { v.clone() }));
        }
        cols[n + i].push((i, Rational::one()));
    }
    let b: Vec<Rational> = lp.rhs.iter().map(|v| v.abs()).collect();
    let mut t = Simplex::new(cols, b, n, pricing);

    let phase1: Vec<Rational> = (0..n + m).map(|j| if j < n { Rational::zero() } else { -Rational::one() }).collect();
    t.run(&phase1, n);
    let infeasibility: Rational = t.basis.iter().zip(&t.xb).filter(|(j, _)| **j >= n).map(|(_, v)| v.clone()).sum();
    if infeasibility.is_positive() {
        return Ok(LpSolution { status: LpStatus::Infeasible, value: Rational::zero(), x: vec![], dual: vec![] });
    }
    t.drive_out_artificials();

    let mut phase2 = lp.objective.clone();
    phase2.resize(n + m, Rational::zero());
    if !t.run(&phase2, n) {
        return Ok(LpSolution { status: LpStatus::Unbounded, value: Rational::zero(), x: vec![], dual: vec![] });
    }

    let mut x = vec![Rational::zero(); n];
    for (k, &j) in t.basis.iter().enumerate() {
        if j < n {
            x[j] = t.xb[k].clone();
        }
    }
    let dual: Vec<Rational> =
        t.duals(&phase2).into_iter().zip(&sign).map(|(y, &s)| if s { -y } else { y }).collect();
    let value = lp.value_of(&x);
    if !lp.is_feasible(&x) {
        return Err(Error::Internal("simplex optimum fails primal substitution".into()));
    }
    if !lp.certifies(&dual, &value) {
        return Err(Error::Internal("simplex optimum lacks a matching dual certificate".into()));
    }
    Ok(LpSolution { status: LpStatus::Optimal, value, x, dual })
}

struct Simplex {
    cols: Vec<Vec<(usize, Rational)>>,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    binv: Vec<Vec<Rational>>,
    xb: Vec<Rational>,
    structural: usize,
    pricing: Pricing,
}

impl Simplex {
    /// Starts from a slack-like basis: each row takes a structural column
    /// that is nonzero only there with a positive entry, else its artificial.
    fn new(cols: Vec<Vec<(usize, Rational)>>, b: Vec<Rational>, structural: usize, pricing: Pricing) -> Self {
        let m = b.len();
        let mut basis: Vec<usize> = (structural..structural + m).collect();
        for (j, col) in cols[..structural].iter().enumerate() {
            if let [(i, v)] = &col[..] {
                if v.is_positive() && basis[*i] >= structural {
                    basis[*i] = j;
                }
            }
        }
        let mut in_basis = vec![false; cols.len()];
        let mut binv = vec![vec![Rational::zero(); m]; m];
        let mut xb = b;
        for (i, &j) in basis.iter().enumerate() {
            in_basis[j] = true;
            let pivot = cols[j][0].1.clone();
            binv[i][i] = pivot.recip();
            xb[i] /= pivot;
        }
        Simplex { cols, basis, in_basis, binv, xb, structural, pricing }
    }

    fn duals(&self, cost: &[Rational]) -> Vec<Rational> {
        let m = self.basis.len();
        let mut y = vec![Rational::zero(); m];
        for (k, &j) in self.basis.iter().enumerate() {
            let c = &cost[j];
            if c.is_zero() {
                continue;
            }
            for (yi, v) in y.iter_mut().zip(&self.binv[k]) {
                if !v.is_zero() {
                    *yi += c * v;
                }
            }
        }
        y
    }

    fn reduced_cost(&self, j: usize, cost: &[Rational], y: &[Rational]) -> Rational {
        self.cols[j].iter().fold(cost[j].clone(), |acc, (i, v)| if y[*i].is_zero() { acc } else { acc - &y[*i] * v })
    }

    fn column(&self, j: usize) -> Vec<Rational> {
        self.binv
            .iter()
            .map(|row| {
                self.cols[j]
                    .iter()
                    .filter(|(i, _)| !row[*i].is_zero())
                    .fold(Rational::zero(), |acc, (i, v)| acc + &row[*i] * v)
            })
            .collect()
    }

    /// Maximizes `cost` letting only columns below `enter_limit` enter.
    /// Returns false if the objective is unbounded.
    fn run(&mut self, cost: &[Rational], enter_limit: usize) -> bool {
        let mut streak = 0;
        let mut bland = self.pricing == Pricing::Bland;
        loop {
            let y = self.duals(cost);
            let mut entering: Option<(usize, Rational)> = None;
            for j in 0..enter_limit {
                if self.in_basis[j] {
                    continue;
                }
                let d = self.reduced_cost(j, cost, &y);
                if !d.is_positive() {
                    continue;
                }
                if bland {
                    entering = Some((j, d));
                    break;
                }
                if entering.as_ref().is_none_or(|(_, best)| d > *best) {
                    entering = Some((j, d));
                }
            }
            let Some((q, _)) = entering else { return true };
            let u = self.column(q);
            let mut leave: Option<(usize, Rational)> = None;
            for (k, uk) in u.iter().enumerate() {
                if !uk.is_positive() {
                    continue;
                }
                let ratio = &self.xb[k] / uk;
                let better = match &leave {
                    None => true,
                    Some((p, r)) => ratio < *r || (ratio == *r && self.basis[k] < self.basis[*p]),
                };
                if better {
                    leave = Some((k, ratio));
                }
            }
            let Some((p, ratio)) = leave else { return false };
            if ratio.is_zero() {
                streak += 1;
                if streak >= DEGENERATE_STREAK {
                    bland = true;
                }
            } else {
                streak = 0;
            }
            self.pivot(p, q, &u);
        }
    }

    fn pivot(&mut self, p: usize, q: usize, u: &[Rational]) {
        let up = u[p].clone();
        for v in self.binv[p].iter_mut().filter(|v| !v.is_zero()) {
            *v /= &up;
        }
        self.xb[p] /= &up;
        let nz: Vec<(usize, Rational)> =
            self.binv[p].iter().enumerate().filter(|(_, v)| !v.is_zero()).map(|(i, v)| (i, v.clone())).collect();
        let xp = self.xb[p].clone();
        for (k, uk) in u.iter().enumerate() {
            if k == p || uk.is_zero() {
                continue;
            }
            for (i, v) in &nz {
                self.binv[k][*i] -= uk * v;
            }
            if !xp.is_zero() {
                self.xb[k] -= uk * &xp;
            }
        }
        self.in_basis[self.basis[p]] = false;
        self.in_basis[q] = true;
        self.basis[p] = q;
    }

    /// Replaces zero-level artificials by structural columns where the
    /// row allows it; the rest sit on redundant rows and stay at zero.
    fn drive_out_artificials(&mut self) {
        for p in 0..self.basis.len() {
            if self.basis[p] < self.structural {
                continue;
            }
            let row = &self.binv[p];
            let found = (0..self.structural).find(|&j| {
                !self.in_basis[j]
                    && !self.cols[j].iter().fold(Rational::zero(), |acc, (i, v)| acc + &row[*i] * v).is_zero()
            });
            if let Some(j) = found {
                let u = self.column(j);
                self.pivot(p, j, &u);
            }
        }
    }
}

/// Exact optimum over a constraint polytope with its witness box.
#[derive(Clone, Debug, PartialEq)]
pub struct PolytopeOptimum {
    pub value: Rational,
    pub witness: RationalBox,
    /// Multipliers for the rows of `polytope_program`; they bound the
    /// objective and their value equals `value`.
    pub certificate: Vec<Rational>,
}

impl PolytopeOptimum {
    pub fn to_json(&self) -> Value {
        json!({"value": format_rational(&self.value), "witness": self.witness.to_json(),
               "certificate": self.certificate.iter().map(format_rational).collect::<Vec<_>>()})
    }
}

/// Normalization rows plus one row per (protected subset, x_S, x_c ≠ 0, a_S)
/// tying the marginal to its value at the all-zeros complement input. The
/// last a_S of each group is implied by normalization and omitted.
pub fn polytope_program(scenario: &Scenario, regime: &ConstraintRegime) -> Result<LinearProgram> {
    let n = scenario.parties();
    let outs = scenario.output_count();
    let mut lp = LinearProgram::new(scenario.table_len());
    for xi in 0..scenario.input_count() {
        lp.add_row((0..outs).map(|ai| (xi * outs + ai, Rational::one())), Rational::one())?;
    }
    let out_tuples: Vec<Vec<usize>> = tuples(scenario.outputs()).collect();
    for c in regime.constraints(scenario)? {
        let subset = &c.subset;
        let comp = complement(subset, n);
        let in_s: Vec<usize> = subset.iter().map(|&p| scenario.inputs()[p]).collect();
        let in_c: Vec<usize> = comp.iter().map(|&p| scenario.inputs()[p]).collect();
        let out_s: Vec<usize> = subset.iter().map(|&p| scenario.outputs()[p]).collect();
        let groups: usize = out_s.iter().product();
        let a_s_index: Vec<usize> =
            out_tuples.iter().map(|a| encode(&subset.iter().map(|&p| a[p]).collect::<Vec<_>>(), &out_s)).collect();
        let full = |x_s: &[usize], x_c: &[usize]| {
            let mut x = vec![0; n];
            for (k, &p) in subset.iter().enumerate() {
                x[p] = x_s[k];
            }
            for (k, &p) in comp.iter().enumerate() {
                x[p] = x_c[k];
            }
            encode(&x, scenario.inputs())
        };
        let reference = vec![0; comp.len()];
        for x_s in tuples(&in_s) {
            let r = full(&x_s, &reference);
            for x_c in tuples(&in_c).skip(1) {
                let o = full(&x_s, &x_c);
                for g in 0..groups - 1 {
                    let terms = a_s_index.iter().enumerate().filter(|(_, &s)| s == g).flat_map(|(ai, _)| {
                        [(o * outs + ai, Rational::one()), (r * outs + ai, -Rational::one())]
                    });
                    lp.add_row(terms, Rational::zero())?;
                }
            }
        }
    }
    Ok(lp)
}

pub fn maximize_over_polytope(f: &BellFunctional, regime: &ConstraintRegime) -> Result<PolytopeOptimum> {
    let mut lp = polytope_program(f.scenario(), regime)?;
    lp.set_objective(f.coefficients().to_vec())?;
    let sol = solve_lp_with(&lp, Pricing::LargestThenBland)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Internal(format!("polytope LP is {}", sol.status)));
    }
    let witness = ProbabilityBox::new(f.scenario().clone(), sol.x)?;
    Ok(PolytopeOptimum { value: sol.value, witness, certificate: sol.dual })
}

/// Minimum of `f`; the certificate satisfies `Aᵀy ≤ c` with `b·y = value`.
pub fn minimize_over_polytope(f: &BellFunctional, regime: &ConstraintRegime) -> Result<PolytopeOptimum> {
    let mut opt = maximize_over_polytope(&f.negated(), regime)?;
    opt.value = -opt.value;
    opt.certificate.iter_mut().for_each(|y| *y = -y.clone());
    Ok(opt)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Bipartition {
    /// A and B joint, C alone.
    AbC,
    /// B and C joint, A alone.
    BcA,
    /// A and C joint, B alone.
    AcB,
}

impl Bipartition {
    pub const ALL: [Bipartition; 3] = [Bipartition::AbC, Bipartition::BcA, Bipartition::AcB];

    pub fn label(&self) -> &'static str {
        match self {
            Bipartition::AbC => "AB|C",
            Bipartition::BcA => "BC|A",
            Bipartition::AcB => "AC|B",
        }
    }

    /// The party on its own.
    pub fn single(&self) -> usize {
        match self {
            Bipartition::AbC => 2,
            Bipartition::BcA => 0,
            Bipartition::AcB => 1,
        }
    }
}

impl fmt::Display for Bipartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RcblCandidate {
    pub family: Bipartition,
    /// Response of the lone party to inputs 0 and 1.
    pub strategy: [usize; 2],
    pub value: Rational,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RcblOptimum {
    pub value: Rational,
    pub family: Bipartition,
    pub strategy: [usize; 2],
    /// Optimal box of the joint pair (two-party NS box, or for AC|B the
    /// pair's box with B's input kept as a spectator).
    pub component: RationalBox,
    /// The three-party box the maximum is attained on.
    pub witness: RationalBox,
    /// Every family/strategy subproblem in search order.
    pub candidates: Vec<RcblCandidate>,
}

impl RcblOptimum {
    pub fn to_json(&self) -> Value {
        json!({
            "value": format_rational(&self.value),
            "family": self.family.label(),
            "strategy": self.strategy,
            "component": self.component.to_json(),
            "witness": self.witness.to_json(),
            "candidates": self.candidates.iter().map(|c| json!({
                "family": c.family.label(), "strategy": c.strategy, "value": format_rational(&c.value)
            })).collect::<Vec<_>>(),
        })
    }
}

const STRATEGIES: [[usize; 2]; 4] = [[0, 0], [0, 1], [1, 0], [1, 1]];

fn require_three_binary(s: &Scenario) -> Result<()> {
    if s != &Scenario::binary(3) {
        return Err(Error::Unsupported("three binary-input binary-output parties required".into()));
    }
    Ok(())
}

/// Maximum of `f` over boxes that split along one of the three
/// bipartitions, with each term obeying the relativistic causality
/// constraints: the AB|C and BC|A terms are no-signaling two-party boxes,
/// the AC|B term lets the pair's joint statistics depend on B's input while
/// keeping each single-party marginal fixed. The lone party is taken
/// deterministic, which loses nothing for a linear objective.
pub fn rcbl_maximize(f: &BellFunctional) -> Result<RcblOptimum> {
    require_three_binary(f.scenario())?;
    let coef = |a: [usize; 3], x: [usize; 3]| f.coefficient(&a, &x).clone();
    let mut best: Option<RcblOptimum> = None;
    let mut candidates = Vec::new();
    for family in Bipartition::ALL {
        for strategy in STRATEGIES {
            let (component, witness, value) = match family {
                Bipartition::AbC | Bipartition::BcA => {
                    let mut g = BellFunctional::zero("component", Scenario::binary(2));
                    for i in 0..16 {
                        let (a2, x2) = g.scenario().entry(i);
                        let c: Rational = (0..2)
                            .map(|w| {
                                if family == Bipartition::AbC {
                                    coef([a2[0], a2[1], strategy[w]], [x2[0], x2[1], w])
                                } else {
                                    coef([strategy[w], a2[0], a2[1]], [w, x2[0], x2[1]])
                                }
                            })
                            .sum();
                        g.add_probability(&c, &a2, &x2)?;
                    }
                    let opt = maximize_over_polytope(&g, &ConstraintRegime::FullNS)?;
                    let lone = ProbabilityBox::from_deterministic(
                        &Scenario::binary(1),
                        &DeterministicStrategy::Local(vec![strategy.to_vec()]),
                    )?;
                    let pair = if family == Bipartition::AbC { [0, 1] } else { [1, 2] };
                    let w = ProbabilityBox::product(&opt.witness, &pair, &lone, &[family.single()])?;
                    (opt.witness, w, opt.value)
                }
                Bipartition::AcB => {
                    let s = Scenario::new(vec![2, 2, 2], vec![2, 1, 2])?;
                    let mut g = BellFunctional::zero("component", s);
                    for i in 0..g.scenario().table_len() {
                        let (a, x) = g.scenario().entry(i);
                        let c = coef([a[0], strategy[x[1]], a[2]], [x[0], x[1], x[2]]);
                        g.add_probability(&c, &a, &x)?;
                    }
                    let opt = maximize_over_polytope(&g, &ConstraintRegime::Custom(vec![vec![0], vec![2]]))?;
                    let comp = opt.witness.clone();
                    let w = ProbabilityBox::from_fn(Scenario::binary(3), |a, x| {
                        if a[1] == strategy[x[1]] {
                            comp.get(&[a[0], 0, a[2]], x).clone()
                        } else {
                            Rational::zero()
                        }
                    });
                    (opt.witness, w, opt.value)
                }
            };
            candidates.push(RcblCandidate { family, strategy, value: value.clone() });
            if best.as_ref().is_none_or(|b| value > b.value) {
                best = Some(RcblOptimum { value, family, strategy, component, witness, candidates: vec![] });
            }
        }
    }
    let mut best = best.expect("twelve subproblems");
    best.candidates = candidates;
    Ok(best)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlComponent {
    pub family: Bipartition,
    /// Deterministic product strategy, one output tuple per input index.
    pub strategy: DeterministicStrategy,
    pub weight: Rational,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlMembership {
    pub inside: bool,
    /// Max-norm distance from the (rationalized) box to the bilocal set.
    pub distance: Rational,
    /// Decomposition of the closest bilocal box.
    pub weights: Vec<BlComponent>,
}

impl BlMembership {
    pub fn to_json(&self) -> Value {
        json!({
            "inside": self.inside,
            "distance": format_rational(&self.distance),
            "weights": self.weights.iter().map(|c| {
                let DeterministicStrategy::Joint(t) = &c.strategy else { unreachable!() };
                json!({"family": c.family.label(), "outputs": t, "weight": format_rational(&c.weight)})
            }).collect::<Vec<_>>(),
        })
    }
}

/// Deterministic vertices of the bilocal set: for each bipartition the
/// pair's outputs are functions of both of their inputs and the lone
/// party's output a function of its own input. Duplicates across families
/// are kept once, under the first family that produces them.
pub fn bl_vertices() -> Vec<(Bipartition, Vec<Vec<usize>>)> {
    let inputs: Vec<Vec<usize>> = tuples(&[2, 2, 2]).collect();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for family in Bipartition::ALL {
        let lone = family.single();
        let pair: Vec<usize> = (0..3).filter(|&p| p != lone).collect();
        for f in 0..16usize {
            for g in 0..16usize {
                for h in STRATEGIES {
                    let table: Vec<Vec<usize>> = inputs
                        .iter()
                        .map(|x| {
                            let k = 2 * x[pair[0]] + x[pair[1]];
                            let mut a = vec![0; 3];
                            a[pair[0]] = f >> k & 1;
                            a[pair[1]] = g >> k & 1;
                            a[lone] = h[x[lone]];
                            a
                        })
                        .collect();
                    if seen.insert(table.clone()) {
                        out.push((family, table));
                    }
                }
            }
        }
    }
    out
}

/// Distance LP: minimize t with |Σ_v w_v V_v(e) − P(e)| ≤ t for every
/// entry e, w ≥ 0, Σ w = 1. Float boxes are rationalized first; the default
/// tolerance is 0 for exact boxes and 1e-6 otherwise.
pub fn bl_membership<T: Scalar>(b: &ProbabilityBox<T>, tolerance: Option<f64>) -> Result<BlMembership> {
    require_three_binary(b.scenario())?;
    let p = b.to_rational()?;
    let tol = match tolerance {
        Some(t) => Rational::from_f64_exact(t)?,
        None if T::EXACT => Rational::zero(),
        None => Rational::from_f64_exact(1e-6)?,
    };
    let s = p.scenario().clone();
    let vertices = bl_vertices();
    let nv = vertices.len();
    let entries = s.table_len();
    let t_var = nv;
    let vars = nv + 1 + 2 * entries;
    let mut lp = LinearProgram::new(vars);
    let mut support: Vec<Vec<usize>> = vec![Vec::new(); entries];
    for (v, (_, table)) in vertices.iter().enumerate() {
        for (xi, a) in table.iter().enumerate() {
            support[s.index(a, &s.entry(xi * s.output_count()).1)].push(v);
        }
    }
    for (e, vs) in support.iter().enumerate() {
        let pe = p.table()[e].clone();
        let plus = vs.iter().map(|&v| (v, Rational::one()));
        lp.add_row(plus.chain([(t_var, -Rational::one()), (nv + 1 + e, Rational::one())]), pe.clone())?;
        let minus = vs.iter().map(|&v| (v, -Rational::one()));
        lp.add_row(minus.chain([(t_var, -Rational::one()), (nv + 1 + entries + e, Rational::one())]), -pe)?;
    }
    lp.add_row((0..nv).map(|v| (v, Rational::one())), Rational::one())?;
    let mut c = vec![Rational::zero(); vars];
    c[t_var] = -Rational::one();
    lp.set_objective(c)?;
    let sol = solve_lp_with(&lp, Pricing::LargestThenBland)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Internal(format!("membership LP is {}", sol.status)));
    }
    let distance = -sol.value;
    let weights = vertices
        .into_iter()
        .zip(&sol.x)
        .filter(|(_, w)| w.is_positive())
        .map(|((family, table), w)| BlComponent {
            family,
            strategy: DeterministicStrategy::Joint(table),
            weight: w.clone(),
        })
        .collect();
    Ok(BlMembership { inside: distance <= tol, distance, weights })
}

trait ExactFromF64: Sized {
    fn from_f64_exact(v: f64) -> Result<Self>;
}

impl ExactFromF64 for Rational {
    fn from_f64_exact(v: f64) -> Result<Self> {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::InvalidArgument(format!("tolerance {v} must be finite and nonnegative")));
        }
        Rational::from_float(v).ok_or_else(|| Error::InvalidArgument(format!("tolerance {v}")))
    }
}
