use std::f64::consts::PI;

use serde_json::{json, Value};

use crate::constraints::ConstraintRegime;
use crate::error::{invalid, Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SpacetimeEvent {
    pub t: f64,
    pub r: Vec<f64>,
}

impl SpacetimeEvent {
    pub fn new(t: f64, r: Vec<f64>) -> Result<Self> {
        if r.is_empty() || r.len() > 3 {
            return invalid(format!("spatial dimension must be 1, 2 or 3, got {}", r.len()));
        }
        if !t.is_finite() || r.iter().any(|v| !v.is_finite()) {
            return invalid("event coordinates must be finite");
        }
        Ok(SpacetimeEvent { t, r })
    }

    pub fn dim(&self) -> usize {
        self.r.len()
    }

    pub fn to_json(&self) -> Value {
        json!({"t": self.t, "r": self.r})
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let t = v.get("t").and_then(Value::as_f64).ok_or_else(|| Error::Structural("event without t".into()))?;
        let r = v
            .get("r")
            .and_then(Value::as_array)
            .and_then(|r| r.iter().map(Value::as_f64).collect::<Option<Vec<_>>>())
            .ok_or_else(|| Error::Structural("event without numeric r".into()))?;
        SpacetimeEvent::new(t, r)
    }

    pub fn list_from_json(v: &Value) -> Result<Vec<Self>> {
        let items = v.as_array().ok_or_else(|| Error::Structural("expected a list of events".into()))?;
        let events = items.iter().map(SpacetimeEvent::from_json).collect::<Result<Vec<_>>>()?;
        same_dim(&events.iter().collect::<Vec<_>>())?;
        Ok(events)
    }
}

/// Superluminal influences travelling at `u`, with light speed `c`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InfluenceModel {
    pub u: f64,
    pub c: f64,
}

impl InfluenceModel {
    pub fn new(u: f64, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return invalid(format!("light speed must be positive, got {c}"));
        }
        if !(u > c) {
            return invalid(format!("influence speed {u} must exceed c = {c}"));
        }
        Ok(InfluenceModel { u, c })
    }

    /// Speed `u` in units of c = 1.
    pub fn with_speed(u: f64) -> Result<Self> {
        InfluenceModel::new(u, 1.0)
    }

    pub fn alpha(&self) -> f64 {
        self.c / self.u
    }
}

fn same_dim(events: &[&SpacetimeEvent]) -> Result<usize> {
    let d = events.first().map_or(1, |e| e.dim());
    if events.iter().any(|e| e.dim() != d) {
        return invalid("events live in different spatial dimensions");
    }
    Ok(d)
}

fn dist(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

fn dot(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| a * b).sum()
}

fn diff(p: &[f64], q: &[f64]) -> Vec<f64> {
    p.iter().zip(q).map(|(a, b)| a - b).collect()
}

/// Δs² = |Δr|² − c²Δt² > 0.
pub fn is_spacelike(e1: &SpacetimeEvent, e2: &SpacetimeEvent, c: f64) -> Result<bool> {
    same_dim(&[e1, e2])?;
    let dr = dist(&e1.r, &e2.r);
    let dt = e1.t - e2.t;
    Ok(dr * dr - c * c * dt * dt > 0.0)
}

/// π − 2 arcsin α.
pub fn phi_alpha(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return invalid(format!("alpha must lie in (0, 1], got {alpha}"));
    }
    Ok(PI - 2.0 * alpha.asin())
}

/// Angle ∠(A, E, B) at E, in [0, π].
pub fn angle_at(a: &[f64], e: &[f64], b: &[f64]) -> Result<f64> {
    let ea = diff(a, e);
    let eb = diff(b, e);
    let (na, nb) = (dot(&ea, &ea).sqrt(), dot(&eb, &eb).sqrt());
    if na == 0.0 || nb == 0.0 {
        return Err(Error::Degenerate("E coincides with A or B".into()));
    }
    Ok((dot(&ea, &eb) / (na * nb)).clamp(-1.0, 1.0).acos())
}

/// E lies in the region from which no superluminal signal can reach both
/// A and B: wide enough angle at E, and early enough to reach either one.
pub fn e_region_contains(a: &SpacetimeEvent, b: &SpacetimeEvent, e: &SpacetimeEvent, model: &InfluenceModel) -> Result<bool> {
    same_dim(&[a, b, e])?;
    let angle = angle_at(&a.r, &e.r, &b.r)?;
    let deadline = (a.t - dist(&e.r, &a.r) / model.u).min(b.t - dist(&e.r, &b.r) / model.u);
    Ok(angle >= phi_alpha(model.alpha())? && e.t <= deadline)
}

/// A signal from E relayed at A cannot outrun a direct one to S: α|EA| + |AS| < |ES|.
pub fn can_signal_via(e: &[f64], a: &[f64], s: &[f64], model: &InfluenceModel) -> bool {
    model.alpha() * dist(e, a) + dist(a, s) < dist(e, s)
}

/// Analytic form: ∠AEB < φ_α (tangent case excluded).
pub fn dual_signal_possible(e: &SpacetimeEvent, a: &SpacetimeEvent, b: &SpacetimeEvent, model: &InfluenceModel) -> Result<bool> {
    same_dim(&[a, b, e])?;
    Ok(angle_at(&a.r, &e.r, &b.r)? < phi_alpha(model.alpha())?)
}

/// |ES| − |AS| for S = E + R·u (u a unit vector, d = A − E), written to
/// avoid cancellation at large R.
fn path_gain(radius: f64, u: &[f64], d: &[f64]) -> f64 {
    let ru_minus_d: Vec<f64> = u.iter().zip(d).map(|(ui, di)| radius * ui - di).collect();
    (2.0 * radius * dot(u, d) - dot(d, d)) / (radius + dot(&ru_minus_d, &ru_minus_d).sqrt())
}

fn sphere_direction(d: usize, k: usize, count: usize) -> Vec<f64> {
    match d {
        1 => vec![if k.is_multiple_of(2) { 1.0 } else { -1.0 }],
        2 => {
            let th = 2.0 * PI * k as f64 / count as f64;
            vec![th.cos(), th.sin()]
        }
        _ => {
            // Fibonacci lattice.
            let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
            let rho = (1.0 - z * z).sqrt();
            let th = PI * (3.0 - 5f64.sqrt()) * k as f64;
            vec![rho * th.cos(), rho * th.sin(), z]
        }
    }
}

/// Maximizes `f` over unit vectors: a direction grid, then coordinate
/// steps with halving step size.
fn maximize_over_directions(d: usize, f: impl Fn(&[f64]) -> f64) -> (f64, Vec<f64>) {
    let count = match d {
        1 => 2,
        2 => 4096,
        _ => 20000,
    };
    let mut best = (f64::NEG_INFINITY, vec![0.0; d]);
    for k in 0..count {
        let u = sphere_direction(d, k, count);
        let m = f(&u);
        if m > best.0 {
            best = (m, u);
        }
    }
    if d > 1 {
        let mut step = if d == 2 { 2.0 * PI / count as f64 } else { (4.0 * PI / count as f64).sqrt() };
        for _ in 0..60 {
            let mut improved = false;
            for axis in 0..d {
                for sign in [-1.0, 1.0] {
                    let mut u = best.1.clone();
                    u[axis] += sign * step;
                    let n = dot(&u, &u).sqrt();
                    u.iter_mut().for_each(|v| *v /= n);
                    let m = f(&u);
                    if m > best.0 {
                        best = (m, u);
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
    }
    best
}

/// Sampled dual-signal search: looks for a relay point S with
/// `can_signal_via` toward both A and B over a direction grid and a range
/// of radii, refining locally around the best direction. Returns the best
/// margin found; a positive margin is a witness.
pub fn sampled_dual_signal_margin(e: &SpacetimeEvent, a: &SpacetimeEvent, b: &SpacetimeEvent, model: &InfluenceModel) -> Result<f64> {
    let d = same_dim(&[a, b, e])?;
    let da = diff(&a.r, &e.r);
    let db = diff(&b.r, &e.r);
    let scale = dot(&da, &da).sqrt().max(dot(&db, &db).sqrt());
    if scale == 0.0 {
        return Err(Error::Degenerate("E coincides with A and B".into()));
    }
    let alpha = model.alpha();
    let (la, lb) = (dot(&da, &da).sqrt(), dot(&db, &db).sqrt());
    let radii: Vec<f64> = (0..=12).map(|k| scale * 10f64.powi(k - 2)).collect();
    let margin = |u: &[f64]| {
        radii
            .iter()
            .map(|&r| (path_gain(r, u, &da) - alpha * la).min(path_gain(r, u, &db) - alpha * lb))
            .fold(f64::NEG_INFINITY, f64::max)
    };
    Ok(maximize_over_directions(d, margin).0)
}

pub fn sampled_dual_signal(e: &SpacetimeEvent, a: &SpacetimeEvent, b: &SpacetimeEvent, model: &InfluenceModel) -> Result<bool> {
    Ok(sampled_dual_signal_margin(e, a, b, model)? > 0.0)
}

/// Three parties on a line: the relativistic-causality regime applies when
/// the apex of the outer parties' joint future lies in the middle party's
/// future. The returned subsets use the caller's party indices. The apex
/// formula assumes the outer parties are spacelike separated.
pub fn classify_three_party_1p1(events: [&SpacetimeEvent; 3], c: f64) -> Result<ConstraintRegime> {
    for e in events {
        if e.dim() != 1 {
            return invalid("classification needs 1+1 dimensional events");
        }
    }
    if !(c > 0.0) {
        return invalid("light speed must be positive");
    }
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| events[i].r[0].total_cmp(&events[j].r[0]));
    let [lo, mid, hi] = order;
    let (a, b, cc) = (events[lo], events[mid], events[hi]);
    if a.r[0] == b.r[0] || b.r[0] == cc.r[0] {
        return Err(Error::Degenerate("parties must sit at distinct positions".into()));
    }
    let t_star = (a.t + cc.t) / 2.0 + (cc.r[0] - a.r[0]) / (2.0 * c);
    let r_star = (a.r[0] + cc.r[0]) / 2.0 + c * (cc.t - a.t) / 2.0;
    if (r_star - b.r[0]).abs() <= c * (t_star - b.t) {
        let pair = |p: usize, q: usize| if p < q { vec![p, q] } else { vec![q, p] };
        Ok(ConstraintRegime::Custom(vec![vec![0], vec![1], vec![2], pair(lo, mid), pair(mid, hi)]))
    } else {
        Ok(ConstraintRegime::FullNS)
    }
}

pub const ESCAPE_EPSILON: f64 = 1e-9;
const GRID: usize = 64;
const REFINE_WINDOW: f64 = 8.0;

/// Best value of g(r) = max_{i∈S}(t_i + |r−r_i|/c) − (t_j + |r−r_j|/c) found
/// by the grid search, and where.
#[derive(Clone, Debug, PartialEq)]
pub struct EscapeSearch {
    pub margin: f64,
    pub point: Vec<f64>,
}

/// Grid minimization of g over the bounding box of all events inflated by
/// three times their largest separation: a 64-per-axis grid, then
/// `refinements` passes on a window of ±8 old spacings around the best
/// point with a quarter of the spacing.
pub fn escape_search(events: &[SpacetimeEvent], subset: &[usize], j: usize, c: f64, refinements: usize) -> Result<EscapeSearch> {
    if subset.is_empty() {
        return invalid("subset must be non-empty");
    }
    if subset.iter().chain([&j]).any(|&i| i >= events.len()) {
        return invalid("event index out of range");
    }
    if !(c > 0.0) {
        return invalid("light speed must be positive");
    }
    let d = same_dim(&events.iter().collect::<Vec<_>>())?;
    let g = |r: &[f64]| {
        let front = subset.iter().map(|&i| events[i].t + dist(r, &events[i].r) / c).fold(f64::NEG_INFINITY, f64::max);
        front - (events[j].t + dist(r, &events[j].r) / c)
    };
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for e in events {
        for k in 0..d {
            lo[k] = lo[k].min(e.r[k]);
            hi[k] = hi[k].max(e.r[k]);
        }
    }
    let spread = events
        .iter()
        .flat_map(|p| events.iter().map(move |q| dist(&p.r, &q.r)))
        .fold(0.0, f64::max);
    let pad = if spread > 0.0 { 3.0 * spread } else { 1.0 };
    let mut best = EscapeSearch { margin: f64::INFINITY, point: vec![0.0; d] };
    let scan = |origin: &[f64], step: f64, count: usize, best: &mut EscapeSearch| {
        let mut idx = vec![0usize; d];
        loop {
            let r: Vec<f64> = (0..d).map(|k| origin[k] + step * idx[k] as f64).collect();
            let v = g(&r);
            if v < best.margin {
                *best = EscapeSearch { margin: v, point: r };
            }
            let mut k = 0;
            while k < d {
                idx[k] += 1;
                if idx[k] < count {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == d {
                break;
            }
        }
    };
    let origin: Vec<f64> = lo.iter().map(|v| v - pad).collect();
    let width = (0..d).map(|k| hi[k] - lo[k] + 2.0 * pad).fold(0.0, f64::max);
    let mut step = width / (GRID - 1) as f64;
    scan(&origin, step, GRID, &mut best);
    for _ in 0..refinements {
        let fine = step / 4.0;
        let half = (REFINE_WINDOW * 4.0) as usize;
        let origin: Vec<f64> = best.point.iter().map(|v| v - fine * half as f64).collect();
        scan(&origin, fine, 2 * half + 1, &mut best);
        step = fine;
    }
    Ok(best)
}

/// Infimum of g along rays r = R·u as R → ∞, minimized over directions:
/// max_{i∈S}(t_i − u·r_i/c) − (t_j − u·r_j/c). A negative value means g is
/// negative far enough out along that ray, beyond any bounded grid.
pub fn asymptotic_escape_margin(events: &[SpacetimeEvent], subset: &[usize], j: usize, c: f64) -> Result<f64> {
    if subset.is_empty() {
        return invalid("subset must be non-empty");
    }
    if subset.iter().chain([&j]).any(|&i| i >= events.len()) {
        return invalid("event index out of range");
    }
    let d = same_dim(&events.iter().collect::<Vec<_>>())?;
    let h = |u: &[f64]| {
        let front = subset.iter().map(|&i| events[i].t - dot(u, &events[i].r) / c).fold(f64::NEG_INFINITY, f64::max);
        front - (events[j].t - dot(u, &events[j].r) / c)
    };
    Ok(-maximize_over_directions(d, |u| -h(u)).0)
}

/// Some point of the subset's joint future lies outside j's future: the
/// bounded grid search or the asymptotic ray test finds g < −ε.
pub fn subset_escapes(events: &[SpacetimeEvent], subset: &[usize], j: usize, c: f64) -> Result<bool> {
    if subset.is_empty() {
        return invalid("subset must be non-empty");
    }
    if subset.contains(&j) {
        return Ok(false);
    }
    Ok(escape_search(events, subset, j, c, 2)?.margin < -ESCAPE_EPSILON
        || asymptotic_escape_margin(events, subset, j, c)? < -ESCAPE_EPSILON)
}

/// Four parties A, B, C, D with influence speed `v` (c = 1):
/// A at the origin at t = 0, D at (1,1,0) at t = 1/v, B and C at (1,0,0)
/// and (0,1,0) at t = (1+√2)/v.
pub fn four_party_configuration(v: f64) -> Result<Vec<SpacetimeEvent>> {
    if !(v > 1.0) {
        return invalid("influence speed must exceed c = 1");
    }
    let tb = (1.0 + 2f64.sqrt()) / v;
    Ok(vec![
        SpacetimeEvent::new(0.0, vec![0.0, 0.0, 0.0])?,
        SpacetimeEvent::new(tb, vec![1.0, 0.0, 0.0])?,
        SpacetimeEvent::new(tb, vec![0.0, 1.0, 0.0])?,
        SpacetimeEvent::new(1.0 / v, vec![1.0, 1.0, 0.0])?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(t: f64, r: &[f64]) -> SpacetimeEvent {
        SpacetimeEvent::new(t, r.to_vec()).unwrap()
    }

    #[test]
    fn spacelike_examples() {
        assert!(is_spacelike(&ev(0.0, &[0.0]), &ev(0.0, &[1.0]), 1.0).unwrap());
        assert!(!is_spacelike(&ev(0.0, &[0.0]), &ev(2.0, &[1.0]), 1.0).unwrap());
        assert!(!is_spacelike(&ev(0.0, &[0.0]), &ev(1.0, &[1.0]), 1.0).unwrap());
        assert!(is_spacelike(&ev(0.0, &[0.0]), &ev(0.0, &[1.0, 0.0]), 1.0).is_err());
    }

    #[test]
    fn phi_values() {
        assert!((phi_alpha(1e-12).unwrap() - PI).abs() < 1e-9);
        assert_eq!(phi_alpha(1.0).unwrap(), 0.0);
        assert!((phi_alpha(0.5).unwrap() - 2.0 * PI / 3.0).abs() < 1e-12);
        assert!(phi_alpha(0.0).is_err());
        assert!(phi_alpha(1.5).is_err());
    }

    #[test]
    fn model_validation() {
        assert!(InfluenceModel::with_speed(1.0).is_err());
        assert!(InfluenceModel::new(2.0, 0.0).is_err());
        assert_eq!(InfluenceModel::with_speed(4.0).unwrap().alpha(), 0.25);
    }

    #[test]
    fn region_examples() {
        let m = InfluenceModel::with_speed(2.0).unwrap();
        let (a, b) = (ev(1.0, &[-1.0, 0.0]), ev(1.0, &[1.0, 0.0]));
        assert!(e_region_contains(&a, &b, &ev(0.0, &[0.0, 0.0]), &m).unwrap());
        // Too late to reach A at speed u.
        assert!(!e_region_contains(&a, &b, &ev(0.9, &[0.0, 0.0]), &m).unwrap());
        assert!(!e_region_contains(&a, &b, &ev(-5.0, &[-3.0, 0.0]), &m).unwrap());
        assert!(e_region_contains(&a, &b, &ev(0.0, &[-1.0, 0.0]), &m).is_err());
        // One spatial dimension: between the parties or not.
        let (a1, b1) = (ev(1.0, &[-1.0]), ev(1.0, &[1.0]));
        assert!(e_region_contains(&a1, &b1, &ev(0.0, &[0.2]), &m).unwrap());
        assert!(!e_region_contains(&a1, &b1, &ev(0.0, &[2.0]), &m).unwrap());
    }

    #[test]
    fn signal_via_examples() {
        let m = InfluenceModel::with_speed(2.0).unwrap();
        assert!(can_signal_via(&[0.0], &[1.0], &[2.0], &m));
        assert!(can_signal_via(&[0.0], &[1.0], &[1.0], &m));
        let near_c = InfluenceModel::new(1.0 + 1e-15, 1.0).unwrap();
        assert!(!can_signal_via(&[0.0], &[1.0], &[2.0], &InfluenceModel { u: 1.0, c: 1.0 }));
        assert!(can_signal_via(&[0.0], &[1.0], &[2.0], &near_c) || near_c.alpha() == 1.0);
    }

    #[test]
    fn dual_signal_examples() {
        let m = InfluenceModel::with_speed(2.0).unwrap();
        let (a, b) = (ev(0.0, &[-1.0, 0.0]), ev(0.0, &[1.0, 0.0]));
        let mid = ev(0.0, &[0.0, 0.0]);
        assert!(!dual_signal_possible(&mid, &a, &b, &m).unwrap());
        assert!(!sampled_dual_signal(&mid, &a, &b, &m).unwrap());
        let far = ev(0.0, &[0.0, -50.0]);
        assert!(dual_signal_possible(&far, &a, &b, &m).unwrap());
        assert!(sampled_dual_signal(&far, &a, &b, &m).unwrap());
        // Tangent case: the angle equals φ exactly (120° at alpha = 1/2).
        let tangent = ev(0.0, &[0.0, -1.0 / 3f64.sqrt()]);
        let angle = angle_at(&a.r, &tangent.r, &b.r).unwrap();
        assert!((angle - phi_alpha(0.5).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn sampled_search_in_three_dimensions() {
        let m = InfluenceModel::with_speed(3.0).unwrap();
        let (a, b) = (ev(0.0, &[-1.0, 0.0, 0.0]), ev(0.0, &[1.0, 0.0, 0.0]));
        for (e, expect) in [(ev(0.0, &[0.0, 0.0, -20.0]), true), (ev(0.0, &[0.0, 0.1, 0.1]), false)] {
            assert_eq!(dual_signal_possible(&e, &a, &b, &m).unwrap(), expect);
            assert_eq!(sampled_dual_signal(&e, &a, &b, &m).unwrap(), expect);
        }
    }

    #[test]
    fn classify_examples() {
        let (a, b, c) = (ev(0.0, &[0.0]), ev(0.0, &[1.0]), ev(0.0, &[2.0]));
        assert_eq!(classify_three_party_1p1([&a, &b, &c], 1.0).unwrap(), ConstraintRegime::three_party_rc());
        // Far left, the second party is outermost and the first sits in the middle.
        let left = ev(0.0, &[-10.0]);
        assert_eq!(
            classify_three_party_1p1([&a, &left, &c], 1.0).unwrap(),
            ConstraintRegime::Custom(vec![vec![0], vec![1], vec![2], vec![0, 1], vec![0, 2]])
        );
        assert!(classify_three_party_1p1([&a, &b, &a], 1.0).is_err());
        // Caller order differs from spatial order: the middle party is index 0.
        let r = classify_three_party_1p1([&b, &a, &c], 1.0).unwrap();
        assert_eq!(r, ConstraintRegime::Custom(vec![vec![0], vec![1], vec![2], vec![0, 1], vec![0, 2]]));
        // Middle party measures late: outside its own future.
        let late = ev(5.0, &[1.0]);
        assert_eq!(classify_three_party_1p1([&a, &late, &c], 1.0).unwrap(), ConstraintRegime::FullNS);
    }

    #[test]
    fn escape_trivial_cases() {
        let evs = vec![ev(0.0, &[0.0, 0.0]), ev(0.0, &[0.0, 0.0]), ev(0.0, &[1.0, 0.0])];
        assert!(!subset_escapes(&evs, &[0, 2], 0, 1.0).unwrap());
        assert!(!subset_escapes(&evs, &[0], 1, 1.0).unwrap());
        assert!(subset_escapes(&evs, &[], 1, 1.0).is_err());
        // A single later party far away escapes an early one? No: the early
        // cone grows at the same speed, so nothing escapes when j is first.
        let pair = vec![ev(1.0, &[0.0]), ev(0.0, &[0.0])];
        assert!(!subset_escapes(&pair, &[0], 1, 1.0).unwrap());
        // Spacelike pair: each future leaves the other's.
        let apart = vec![ev(0.0, &[0.0]), ev(0.0, &[1.0])];
        assert!(subset_escapes(&apart, &[0], 1, 1.0).unwrap());
    }

    #[test]
    fn four_party_escapes() {
        let evs = four_party_configuration(2.5).unwrap();
        // ACD|B, ABD|C, ABC|D escape at v = 2.5.
        for (s, j) in [(vec![0, 2, 3], 1), (vec![0, 1, 3], 2), (vec![0, 1, 2], 3)] {
            assert!(subset_escapes(&evs, &s, j, 1.0).unwrap(), "{s:?} vs {j}");
        }
        // BCD|A needs t_B < 1/√2, i.e. v > 2 + √2.
        assert!(!subset_escapes(&evs, &[1, 2, 3], 0, 1.0).unwrap());
        assert!(!subset_escapes(&four_party_configuration(3.3).unwrap(), &[1, 2, 3], 0, 1.0).unwrap());
        let far = four_party_configuration(3.5).unwrap();
        assert!(subset_escapes(&far, &[1, 2, 3], 0, 1.0).unwrap());
        // That escape lies beyond the bounded grid.
        assert!(escape_search(&far, &[1, 2, 3], 0, 1.0, 2).unwrap().margin > 0.0);
    }

    #[test]
    fn events_json() {
        let v = serde_json::json!([{"t": 0.0, "r": [1.0]}, {"t": 1.0, "r": [2.0]}]);
        let evs = SpacetimeEvent::list_from_json(&v).unwrap();
        assert_eq!(evs[1], ev(1.0, &[2.0]));
        assert!(SpacetimeEvent::list_from_json(&serde_json::json!([{"t": 0.0, "r": [1.0]}, {"t": 1.0, "r": [2.0, 0.0]}])).is_err());
        assert!(SpacetimeEvent::new(f64::NAN, vec![0.0]).is_err());
    }
}
