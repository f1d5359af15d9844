//! QuAD acceptability degrees and the gold ranking derived from them.
//!
//! For an argument `a` with base weight `θ(a)`:
//!
//! ```text
//! v_a(a) = θ(a) · Π_{b ∈ Att(a)} (1 − σ(b))
//! v_s(a) = 1 − (1 − θ(a)) · Π_{c ∈ Sup(a)} (1 − σ(c))
//!
//! σ(a) = v_a(a)               attackers only
//!        v_s(a)               supporters only
//!        θ(a)                 neither
//!        (v_a(a) + v_s(a))/2  both
//! ```
//!
//! On an acyclic graph a single pass in topological order (sources before
//! targets) computes the unique solution.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{ArgumentId, DebateGraph};
use crate::scalar::Weight;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error("input {value} is outside [0, 1]")]
    OutOfRangeInput { value: f64 },
}

fn check_range<W: Weight>(value: &W) -> Result<(), QuadError> {
    if value.in_unit_interval() {
        Ok(())
    } else {
        Err(QuadError::OutOfRangeInput {
            value: value.as_f64(),
        })
    }
}

/// `θ · Π (1 − s)` over attacker strengths. An empty product is 1.
pub fn aggregate_attack<W: Weight>(theta: W, attacker_scores: &[W]) -> Result<W, QuadError> {
    check_range(&theta)?;
    attacker_scores.iter().try_for_each(check_range)?;
    Ok(attack_unchecked(theta, attacker_scores.iter()))
}

/// `1 − (1 − θ) · Π (1 − s)` over supporter strengths.
pub fn aggregate_support<W: Weight>(theta: W, supporter_scores: &[W]) -> Result<W, QuadError> {
    check_range(&theta)?;
    supporter_scores.iter().try_for_each(check_range)?;
    Ok(support_unchecked(theta, supporter_scores.iter()))
}

fn complement_product<'a, W: Weight>(scores: impl Iterator<Item = &'a W>) -> W {
    scores.fold(W::one(), |acc, s| acc * (W::one() - s.clone()))
}

fn attack_unchecked<'a, W: Weight>(theta: W, scores: impl Iterator<Item = &'a W>) -> W {
    theta * complement_product(scores)
}

// Written as `θ + (1 − θ)(1 − Π)` so that floating-point rounding can never
// push the result below θ.
fn support_unchecked<'a, W: Weight>(theta: W, scores: impl Iterator<Item = &'a W>) -> W {
    let lift = (W::one() - theta.clone()) * (W::one() - complement_product(scores));
    let v = theta + lift;
    if v > W::one() {
        W::one()
    } else {
        v
    }
}

/// Acceptability degree of every argument in a graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreMap<W = f64> {
    pub graph_name: String,
    pub scores: BTreeMap<ArgumentId, W>,
}

impl<W: Weight> ScoreMap<W> {
    pub fn get(&self, id: ArgumentId) -> Option<&W> {
        self.scores.get(&id)
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (ArgumentId, &W)> {
        self.scores.iter().map(|(&id, w)| (id, w))
    }

    pub fn to_f64(&self) -> ScoreMap<f64> {
        ScoreMap {
            graph_name: self.graph_name.clone(),
            scores: self.iter().map(|(id, w)| (id, w.as_f64())).collect(),
        }
    }
}

/// QuAD acceptability degrees for every argument of `graph`.
pub fn acceptability<W: Weight>(graph: &DebateGraph<W>) -> ScoreMap<W> {
    let mut sigma: Vec<Option<W>> = vec![None; graph.len()];
    let strength = |sigma: &[Option<W>], j: usize| -> W {
        sigma[j].clone().expect("topological order visits sources first")
    };
    for i in graph.evaluation_order() {
        let theta = graph.weight_at(i).clone();
        let att: Vec<W> = graph
            .attacker_indices(i)
            .iter()
            .map(|&j| strength(&sigma, j))
            .collect();
        let sup: Vec<W> = graph
            .supporter_indices(i)
            .iter()
            .map(|&j| strength(&sigma, j))
            .collect();
        sigma[i] = Some(combine(theta, &att, &sup));
    }
    ScoreMap {
        graph_name: graph.name().to_string(),
        scores: graph
            .arguments()
            .iter()
            .zip(sigma)
            .map(|(arg, s)| (arg.id, s.expect("every argument evaluated")))
            .collect(),
    }
}

/// Four-case combination of attacker and supporter strengths.
pub(crate) fn combine<W: Weight>(theta: W, attackers: &[W], supporters: &[W]) -> W {
    match (attackers.is_empty(), supporters.is_empty()) {
        (true, true) => theta,
        (false, true) => attack_unchecked(theta, attackers.iter()),
        (true, false) => support_unchecked(theta, supporters.iter()),
        (false, false) => {
            let va = attack_unchecked(theta.clone(), attackers.iter());
            let vs = support_unchecked(theta, supporters.iter());
            (va + vs) / (W::one() + W::one())
        }
    }
}

/// Arguments ordered best first, with equal-score arguments grouped.
///
/// `groups` partitions the arguments in rank order; a group with more than
/// one member is a tie. Ids ascend within each group and `ordered_ids` is the
/// concatenation of the groups.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ranking {
    ordered_ids: Vec<ArgumentId>,
    groups: Vec<Vec<ArgumentId>>,
}

impl Ranking {
    /// Ranking without ties, in the given order.
    pub fn strict(ids: Vec<ArgumentId>) -> Self {
        let groups = ids.iter().map(|&id| vec![id]).collect();
        Ranking {
            ordered_ids: ids,
            groups,
        }
    }

    /// Ranking from groups of tied arguments, best group first.
    pub fn from_groups(groups: Vec<Vec<ArgumentId>>) -> Self {
        let groups: Vec<Vec<ArgumentId>> = groups
            .into_iter()
            .filter(|g| !g.is_empty())
            .map(|mut g| {
                g.sort();
                g
            })
            .collect();
        Ranking {
            ordered_ids: groups.iter().flatten().copied().collect(),
            groups,
        }
    }

    pub fn ordered_ids(&self) -> &[ArgumentId] {
        &self.ordered_ids
    }

    pub fn groups(&self) -> &[Vec<ArgumentId>] {
        &self.groups
    }

    /// Groups of two or more arguments sharing a score.
    pub fn tie_groups(&self) -> impl Iterator<Item = &[ArgumentId]> {
        self.groups
            .iter()
            .filter(|g| g.len() > 1)
            .map(Vec::as_slice)
    }

    pub fn has_ties(&self) -> bool {
        self.tie_groups().next().is_some()
    }

    pub fn len(&self) -> usize {
        self.ordered_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ordered_ids.is_empty()
    }

    pub fn id_set(&self) -> BTreeSet<ArgumentId> {
        self.ordered_ids.iter().copied().collect()
    }

    /// Worst first. Tie groups stay intact.
    pub fn reversed(&self) -> Ranking {
        Ranking::from_groups(self.groups.iter().rev().cloned().collect())
    }

    /// Same relative order, limited to `keep`.
    pub fn restrict(&self, keep: &BTreeSet<ArgumentId>) -> Ranking {
        Ranking::from_groups(
            self.groups
                .iter()
                .map(|g| g.iter().copied().filter(|id| keep.contains(id)).collect())
                .collect(),
        )
    }
}

/// Descending by score; equal scores form one tie group listed by ascending
/// id. Ties are detected by exact equality of the computed scores.
pub fn gold_ranking<W: Weight>(scores: &ScoreMap<W>) -> Ranking {
    let mut entries: Vec<(ArgumentId, &W)> = scores.iter().collect();
    entries.sort_by(|(ia, a), (ib, b)| {
        b.partial_cmp(a)
            .unwrap_or(Ordering::Equal)
            .then_with(|| ia.cmp(ib))
    });
    let mut groups: Vec<Vec<ArgumentId>> = Vec::new();
    let mut last: Option<&W> = None;
    for (id, score) in entries {
        match (last, groups.last_mut()) {
            (Some(prev), Some(group)) if prev == score => group.push(id),
            _ => groups.push(vec![id]),
        }
        last = Some(score);
    }
    Ranking::from_groups(groups)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{aid, numbered_arguments, BaseWeights, Relation};
    use num_rational::Rational64;

    fn graph(n: u32, relations: Vec<Relation>) -> DebateGraph {
        DebateGraph::build("t", numbered_arguments(n), relations, BaseWeights::Uniform).unwrap()
    }

    #[test]
    fn attack_aggregation() {
        assert_eq!(aggregate_attack(0.5, &[0.5]).unwrap(), 0.25);
        assert_eq!(aggregate_attack(0.5, &[]).unwrap(), 0.5);
        assert_eq!(aggregate_attack(0.5, &[0.75]).unwrap(), 0.125);
    }

    #[test]
    fn support_aggregation() {
        assert_eq!(aggregate_support(0.5, &[0.5]).unwrap(), 0.75);
        assert_eq!(aggregate_support(0.5, &[]).unwrap(), 0.5);
        assert_eq!(aggregate_support(0.5, &[0.5, 0.25, 0.25]).unwrap(), 0.859375);
    }

    #[test]
    fn aggregation_rejects_out_of_range() {
        assert!(aggregate_attack(1.5, &[]).is_err());
        assert!(aggregate_attack(0.5, &[-0.1]).is_err());
        assert!(aggregate_support(0.5, &[f64::NAN]).is_err());
    }

    #[test]
    fn isolated_argument_keeps_its_weight() {
        let s = acceptability(&graph(1, vec![]));
        assert_eq!(s.get(aid(1)), Some(&0.5));
    }

    #[test]
    fn single_attacker_and_single_supporter() {
        let s = acceptability(&graph(2, vec![Relation::attack(2, 1)]));
        assert_eq!(s.get(aid(1)), Some(&0.25));
        let s = acceptability(&graph(2, vec![Relation::support(2, 1)]));
        assert_eq!(s.get(aid(1)), Some(&0.75));
    }

    fn mixed_case() -> DebateGraph {
        // 3 attacks 1 and is supported by 4; 2, 5, 7 support 1; 6 attacks 5;
        // 8 attacks 7.
        graph(
            8,
            vec![
                Relation::support(2, 1),
                Relation::attack(3, 1),
                Relation::support(4, 3),
                Relation::support(5, 1),
                Relation::attack(6, 5),
                Relation::support(7, 1),
                Relation::attack(8, 7),
            ],
        )
    }

    #[test]
    fn mixed_attack_and_support() {
        let s = acceptability(&mixed_case());
        assert_eq!(s.get(aid(3)), Some(&0.75));
        assert_eq!(s.get(aid(5)), Some(&0.25));
        assert_eq!(s.get(aid(1)), Some(&0.4921875));
        assert_eq!(format!("{:.4}", s.get(aid(1)).unwrap()), "0.4922");
    }

    #[test]
    fn exact_rational_evaluation() {
        let g: DebateGraph<Rational64> = mixed_case().convert_weights().unwrap();
        let s = acceptability(&g);
        assert_eq!(s.get(aid(1)), Some(&Rational64::new(63, 128)));
        assert_eq!(s.get(aid(3)), Some(&Rational64::new(3, 4)));
    }

    #[test]
    fn f32_evaluation_agrees() {
        let g: DebateGraph<f32> = mixed_case().convert_weights().unwrap();
        assert_eq!(acceptability(&g).get(aid(1)), Some(&0.4921875f32));
    }

    #[test]
    fn gold_ranking_orders_descending() {
        let scores = ScoreMap {
            graph_name: "t".into(),
            scores: [(aid(1), 0.49), (aid(3), 0.75), (aid(5), 0.25)]
                .into_iter()
                .collect(),
        };
        let r = gold_ranking(&scores);
        assert_eq!(r.ordered_ids(), &[aid(3), aid(1), aid(5)]);
        assert!(!r.has_ties());
    }

    #[test]
    fn gold_ranking_total_tie() {
        let scores = ScoreMap {
            graph_name: "t".into(),
            scores: [(aid(4), 0.5), (aid(2), 0.5), (aid(9), 0.5)]
                .into_iter()
                .collect(),
        };
        let r = gold_ranking(&scores);
        assert_eq!(r.ordered_ids(), &[aid(2), aid(4), aid(9)]);
        assert_eq!(r.groups().len(), 1);
    }

    #[test]
    fn gold_ranking_partial_tie() {
        let scores = ScoreMap {
            graph_name: "t".into(),
            scores: [(aid(1), 0.5), (aid(2), 0.5), (aid(3), 0.7)]
                .into_iter()
                .collect(),
        };
        let r = gold_ranking(&scores);
        assert_eq!(r.ordered_ids(), &[aid(3), aid(1), aid(2)]);
        let ties: Vec<&[ArgumentId]> = r.tie_groups().collect();
        assert_eq!(ties, vec![&[aid(1), aid(2)][..]]);
    }

    #[test]
    fn ranking_restrict_and_reverse() {
        let r = Ranking::from_groups(vec![vec![aid(3)], vec![aid(2), aid(1)], vec![aid(4)]]);
        assert_eq!(r.ordered_ids(), &[aid(3), aid(1), aid(2), aid(4)]);
        assert_eq!(
            r.reversed().ordered_ids(),
            &[aid(4), aid(1), aid(2), aid(3)]
        );
        let keep = [aid(2), aid(4)].into_iter().collect();
        assert_eq!(r.restrict(&keep).ordered_ids(), &[aid(2), aid(4)]);
    }
}
