//! Independent oracles and random generators shared by the integration tests.
#![allow(dead_code)]

use num_traits::{One, Signed, Zero};
use rand::Rng;
use relcausal::constructions::pr_box;
use relcausal::lp::LinearProgram;
use relcausal::scalar::{int, Rational};
use relcausal::{DeterministicStrategy, ProbabilityBox, RationalBox, Scenario};

/// Unique solution of `M x = b`, if the columns are independent and the
/// system is consistent.
fn solve_exact(mut m: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivot_row = 0;
    let mut pivots = Vec::new();
    for col in 0..cols {
        let r = (pivot_row..rows).find(|&r| !m[r][col].is_zero())?;
        m.swap(pivot_row, r);
        b.swap(pivot_row, r);
        let p = m[pivot_row][col].clone();
        for k in 0..cols {
            m[pivot_row][k] = &m[pivot_row][k] / &p;
        }
        b[pivot_row] = &b[pivot_row] / &p;
        for r in 0..rows {
            if r != pivot_row && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for k in 0..cols {
                    let v = &f * &m[pivot_row][k];
                    m[r][k] -= v;
                }
                let v = &f * &b[pivot_row];
                b[r] -= v;
            }
        }
        pivots.push(pivot_row);
        pivot_row += 1;
    }
    if (pivot_row..rows).any(|r| !b[r].is_zero()) {
        return None;
    }
    Some(pivots.into_iter().map(|r| b[r].clone()).collect())
}

/// Maximum over all basic feasible solutions, found by trying every set of
/// at most `rows` columns. `None` when no feasible basis exists. Only valid
/// for bounded programs.
pub fn vertex_enumeration_max(lp: &LinearProgram) -> Option<Rational> {
    let n = lp.vars();
    let m = lp.row_count();
    let dense: Vec<Vec<Rational>> = (0..m)
        .map(|i| {
            let mut row = vec![Rational::zero(); n];
            for (j, v) in lp.row(i) {
                row[*j] = v.clone();
            }
            row
        })
        .collect();
    let mut best: Option<Rational> = None;
    for mask in 0u32..(1 << n) {
        let cols: Vec<usize> = (0..n).filter(|j| mask >> j & 1 == 1).collect();
        if cols.len() > m {
            continue;
        }
        let sub: Vec<Vec<Rational>> = dense.iter().map(|row| cols.iter().map(|&j| row[j].clone()).collect()).collect();
        let Some(xb) = solve_exact(sub, lp.rhs().to_vec()) else { continue };
        if xb.iter().any(|v| v.is_negative()) {
            continue;
        }
        let mut x = vec![Rational::zero(); n];
        for (k, &j) in cols.iter().enumerate() {
            x[j] = xb[k].clone();
        }
        let v = lp.value_of(&x);
        if best.as_ref().is_none_or(|b| v > *b) {
            best = Some(v);
        }
    }
    best
}

/// Bounded random LP with at most 8 variables: a capacity row
/// Σx + s = K plus up to three random equality rows.
pub fn random_bounded_lp<R: Rng>(rng: &mut R) -> LinearProgram {
    let n = rng.gen_range(2..=6);
    let vars = n + 1;
    let mut lp = LinearProgram::new(vars);
    let c: Vec<Rational> = (0..vars).map(|j| if j < n { int(rng.gen_range(-5..=5)) } else { int(0) }).collect();
    lp.set_objective(c).unwrap();
    lp.add_row((0..vars).map(|j| (j, Rational::one())), int(rng.gen_range(1..=6))).unwrap();
    for _ in 0..rng.gen_range(0..=2) {
        let row: Vec<(usize, Rational)> = (0..n).map(|j| (j, int(rng.gen_range(-3..=3)))).collect();
        lp.add_row(row, int(rng.gen_range(-3..=4))).unwrap();
    }
    lp
}

/// Box with random small integer weights per row, some of them zero.
pub fn random_rational_box<R: Rng>(rng: &mut R, scenario: &Scenario) -> RationalBox {
    let k = scenario.output_count();
    let mut table = Vec::with_capacity(scenario.table_len());
    for _ in 0..scenario.input_count() {
        let mut w: Vec<i64> = (0..k).map(|_| if rng.gen_bool(0.3) { 0 } else { rng.gen_range(1..=9) }).collect();
        if w.iter().all(|&v| v == 0) {
            w[rng.gen_range(0..k)] = 1;
        }
        let total: i64 = w.iter().sum();
        table.extend(w.into_iter().map(|v| Rational::new(v.into(), total.into())));
    }
    ProbabilityBox::new(scenario.clone(), table).unwrap()
}

pub fn random_local_deterministic<R: Rng>(rng: &mut R, scenario: &Scenario) -> RationalBox {
    let tables = (0..scenario.parties())
        .map(|p| (0..scenario.inputs()[p]).map(|_| rng.gen_range(0..scenario.outputs()[p])).collect())
        .collect();
    ProbabilityBox::from_deterministic(scenario, &DeterministicStrategy::Local(tables)).unwrap()
}

/// PR box on a random pair of a binary three-party scenario, with the
/// remaining party deterministic and random output relabelings.
fn random_pr_component<R: Rng>(rng: &mut R) -> RationalBox {
    let lone = rng.gen_range(0..3);
    let pair: Vec<usize> = (0..3).filter(|&p| p != lone).collect();
    let flip: [usize; 2] = [rng.gen_range(0..2), rng.gen_range(0..2)];
    let pr = pr_box();
    let pr = ProbabilityBox::from_fn(Scenario::binary(2), |a, x| pr.get(&[a[0] ^ flip[0], a[1] ^ flip[1]], x).clone());
    let det = random_local_deterministic(rng, &Scenario::binary(1));
    ProbabilityBox::product(&pr, &pair, &det, &[lone]).unwrap()
}

/// Random no-signaling three-party binary box: a rational mixture of local
/// deterministic boxes and PR boxes tensored with a deterministic party.
pub fn random_ns_mixture<R: Rng>(rng: &mut R) -> RationalBox {
    let s = Scenario::binary(3);
    let count = rng.gen_range(1..=4);
    let comps: Vec<RationalBox> = (0..count)
        .map(|_| if rng.gen_bool(0.5) { random_pr_component(rng) } else { random_local_deterministic(rng, &s) })
        .collect();
    let w: Vec<i64> = (0..count).map(|_| rng.gen_range(1..=5)).collect();
    let total: i64 = w.iter().sum();
    let weighted: Vec<(Rational, &RationalBox)> =
        w.iter().zip(&comps).map(|(&v, b)| (Rational::new(v.into(), total.into()), b)).collect();
    ProbabilityBox::mix(&weighted).unwrap()
}
