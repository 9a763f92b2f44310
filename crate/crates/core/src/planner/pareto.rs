use super::feasibility::ObjectiveVector;
use crate::error::{Error, Result};
use crate::world::Action;

/// `a` dominates `b` when it is no worse anywhere and strictly better somewhere.
pub fn dominates(a: &ObjectiveVector, b: &ObjectiveVector) -> bool {
    let (a, b) = (a.as_array(), b.as_array());
    a.iter().zip(&b).all(|(x, y)| x <= y) && a.iter().zip(&b).any(|(x, y)| x < y)
}

/// Non-dominated subset, in input order.
///
/// Candidates are visited in lexicographic objective order; anything that
/// dominates a candidate precedes it in that order, so it suffices to test
/// each candidate against the front built so far.
pub fn pareto_front(
    scored: &[(Action, ObjectiveVector)],
) -> Result<Vec<(Action, ObjectiveVector)>> {
    if scored.is_empty() {
        return Err(Error::validation(
            "scored actions",
            "Pareto front of an empty set",
        ));
    }
    let mut order: Vec<usize> = (0..scored.len()).collect();
    order.sort_by(|&i, &j| {
        let (a, b) = (scored[i].1.as_array(), scored[j].1.as_array());
        a.iter()
            .zip(&b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });

    let mut front: Vec<usize> = Vec::new();
    for i in order {
        if !front.iter().any(|&f| dominates(&scored[f].1, &scored[i].1)) {
            front.push(i);
        }
    }
    front.sort_unstable();
    Ok(front.into_iter().map(|i| scored[i]).collect())
}

const TIE_EPS: f64 = 1e-12;

/// Weighted sum of max-normalised objectives; ties go to the smallest
/// `|heading_delta|`, then starboard, then the higher speed factor.
pub fn select_action(front: &[(Action, ObjectiveVector)], weights: &[f64; 4]) -> Result<Action> {
    if front.is_empty() {
        return Err(Error::validation(
            "front",
            "cannot select from an empty front",
        ));
    }
    let mut max = [0.0f64; 4];
    for (_, o) in front {
        for (m, v) in max.iter_mut().zip(o.as_array()) {
            *m = m.max(v);
        }
    }
    let score = |o: &ObjectiveVector| -> f64 {
        o.as_array()
            .iter()
            .zip(&max)
            .zip(weights)
            .map(|((v, m), w)| if *m > 0.0 { w * v / m } else { 0.0 })
            .sum()
    };
    let scores: Vec<f64> = front.iter().map(|(_, o)| score(o)).collect();
    let best = scores.iter().copied().fold(f64::INFINITY, f64::min);

    let preference = |a: &Action| {
        (
            a.heading_delta.abs(),
            a.heading_delta < 0.0,
            -a.speed_factor,
        )
    };
    front
        .iter()
        .zip(&scores)
        .filter(|(_, &s)| s <= best + TIE_EPS)
        .map(|((a, _), _)| *a)
        .min_by(|a, b| {
            let (pa, pb) = (preference(a), preference(b));
            pa.0.total_cmp(&pb.0)
                .then(pa.1.cmp(&pb.1))
                .then(pa.2.total_cmp(&pb.2))
        })
        .ok_or_else(|| Error::validation("front", "no finite scores"))
}
