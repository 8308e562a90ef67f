//! Explicit boxes, all exactly rational.

use crate::bell::{tuples, ProbabilityBox, Scenario};
use crate::error::{invalid, structural, Error, Result};
use crate::scalar::{int, rat, Rational, Scalar};
use crate::RationalBox;

fn half() -> Rational {
    rat(1, 2)
}

/// Box whose row at each input is uniform over the listed output tuples.
fn uniform_support(scenario: Scenario, support: impl Fn(&[usize]) -> Vec<Vec<usize>>) -> RationalBox {
    let mut table = vec![int(0); scenario.table_len()];
    for x in tuples(scenario.inputs()) {
        let outs = support(&x);
        let w = rat(1, outs.len() as i64);
        for a in outs {
            let i = scenario.index(&a, &x);
            table[i] = table[i].clone() + w.clone();
        }
    }
    ProbabilityBox::new(scenario, table).expect("table shape")
}

/// a ⊕ c = x·z with uniform marginals.
pub fn pr_box() -> RationalBox {
    ProbabilityBox::from_fn(Scenario::binary(2), |a, x| {
        if a[0] ^ a[1] == x[0] & x[1] {
            half()
        } else {
            int(0)
        }
    })
}

/// Three parties, b ≡ 0; a ⊕ c = x·y·z with a uniform.
pub fn example_mermin_box() -> RationalBox {
    uniform_support(Scenario::binary(3), |x| {
        if x == [1, 1, 1] {
            vec![vec![0, 0, 1], vec![1, 0, 0]]
        } else {
            vec![vec![0, 0, 0], vec![1, 0, 1]]
        }
    })
}

/// Correlated triples everywhere except (0,1,1), (1,1,0), (1,1,1).
pub fn monogamy_box() -> RationalBox {
    uniform_support(Scenario::binary(3), |x| match x {
        [0, 1, 1] => vec![vec![0, 0, 1], vec![1, 1, 0]],
        [1, 1, 0] => vec![vec![0, 1, 1], vec![1, 0, 0]],
        [1, 1, 1] => vec![vec![0, 1, 0], vec![1, 0, 1]],
        _ => vec![vec![0, 0, 0], vec![1, 1, 1]],
    })
}

/// b ≡ 0; a ⊕ c = 0 on inputs of weight ≤ 1, a ⊕ c = 1 otherwise.
pub fn rcbl_svetlichny_box() -> RationalBox {
    uniform_support(Scenario::binary(3), |x| {
        if x.iter().sum::<usize>() <= 1 {
            vec![vec![0, 0, 0], vec![1, 0, 1]]
        } else {
            vec![vec![0, 0, 1], vec![1, 0, 0]]
        }
    })
}

/// Alice and Bob with `m` inputs, Eve with one. Everyone outputs the same
/// uniform bit, except at (0, m−1) where Alice's bit is flipped.
pub fn qkd_attack_box(m: usize) -> Result<RationalBox> {
    if m < 2 {
        return invalid("qkd attack box needs m >= 2");
    }
    let s = Scenario::new(vec![m, m, 1], vec![2, 2, 2])?;
    Ok(uniform_support(s, |x| {
        if x[0] == 0 && x[1] == m - 1 {
            vec![vec![0, 1, 1], vec![1, 0, 0]]
        } else {
            vec![vec![0, 0, 0], vec![1, 1, 1]]
        }
    }))
}

fn mermin_sign_k(n: usize, weight: usize) -> usize {
    (n - weight) / 2
}

fn check_attack_args(n: usize, x_star: &[usize]) -> Result<()> {
    if n < 3 || n.is_multiple_of(2) {
        return invalid(format!("n must be odd and at least 3, got {n}"));
    }
    if x_star.len() != n || x_star.iter().any(|&b| b > 1) {
        return invalid("target input must be a bit string of length n");
    }
    if x_star.iter().sum::<usize>() % 2 == 0 {
        return invalid("target input must have odd weight");
    }
    Ok(())
}

/// Output forced at the target input: all zeros when the required
/// correlator there is +1, otherwise (1,0,…,0).
pub fn mermin_attack_anchor(x_star: &[usize]) -> Vec<usize> {
    let n = x_star.len();
    let k = mermin_sign_k(n, x_star.iter().sum());
    let mut a = vec![0; n];
    if k % 2 == 1 {
        a[0] = 1;
    }
    a
}

/// Deterministic at `x_star`, yet meeting every Mermin correlator
/// constraint and every line run constraint.
///
/// Pairs (a^l, a^r) are filled layer by layer in Hamming distance from the
/// target. An input at distance d comes from its predecessor with the
/// largest differing index i restored; the step toggles bit i of a^r when
/// d is odd and x*_i = 0 or d is even and x*_i = 1, and of a^l otherwise.
/// Each pair is checked against the closed form in which the position of
/// i among the differing indices plays the role of d.
pub fn mermin_attack_box(n: usize, x_star: &[usize]) -> Result<RationalBox> {
    check_attack_args(n, x_star)?;
    let scenario = Scenario::binary(n);
    let a_star = mermin_attack_anchor(x_star);
    let radix = vec![2; n];
    let count = 1usize << n;

    let mut order: Vec<Vec<usize>> = tuples(&radix).collect();
    let distance = |x: &[usize]| x.iter().zip(x_star).filter(|(a, b)| a != b).count();
    order.sort_by_key(|x| distance(x));

    let index = |x: &[usize]| crate::bell::encode(x, &radix);
    let mut pairs: Vec<Option<(Vec<usize>, Vec<usize>)>> = vec![None; count];
    for x in &order {
        let d = distance(x);
        let pair = if d == 0 {
            (a_star.clone(), a_star.clone())
        } else {
            let i = (0..n).rev().find(|&i| x[i] != x_star[i]).unwrap();
            let mut pred = x.clone();
            pred[i] = x_star[i];
            let (mut l, mut r) = pairs[index(&pred)].clone().ok_or_else(|| {
                Error::Internal(format!("predecessor of {x:?} not yet built"))
            })?;
            if (d % 2 == 1) == (x_star[i] == 0) {
                r[i] ^= 1;
            } else {
                l[i] ^= 1;
            }
            (l, r)
        };
        let expected = attack_pair_closed_form(x_star, &a_star, x);
        if pair != expected {
            return Err(Error::Internal(format!(
                "attack pair at {x:?} is {pair:?}, closed form gives {expected:?}"
            )));
        }
        pairs[index(x)] = Some(pair);
    }

    let mut table = vec![int(0); scenario.table_len()];
    for x in tuples(&radix) {
        let (l, r) = pairs[index(&x)].clone().unwrap();
        for a in [l, r] {
            let i = scenario.index(&a, &x);
            table[i] = table[i].clone() + half();
        }
    }
    let b = ProbabilityBox::new(scenario, table)?;
    if !b.validate().passes() {
        return structural("attack box failed validation");
    }
    Ok(b)
}

/// Differing index with rank r (1-based, ascending) goes to a^l when
/// r + x*_i is even and to a^r otherwise.
fn attack_pair_closed_form(x_star: &[usize], a_star: &[usize], x: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let (mut l, mut r) = (a_star.to_vec(), a_star.to_vec());
    let mut rank = 0;
    for i in 0..x.len() {
        if x[i] != x_star[i] {
            rank += 1;
            if (rank + x_star[i]).is_multiple_of(2) {
                l[i] ^= 1;
            } else {
                r[i] ^= 1;
            }
        }
    }
    (l, r)
}

/// ½ Σ |p − q|.
pub fn total_variation<T: Scalar>(p: &[T], q: &[T]) -> Result<T> {
    if p.len() != q.len() {
        return structural("distributions live on different domains");
    }
    let s = p.iter().zip(q).fold(T::zero(), |acc, (a, b)| acc + (a.clone() - b.clone()).abs());
    Ok(s / T::from_i64(2))
}
