//! Ranking agreement, edge recovery and quartile analyses.
//!
//! Correlations are tie-aware: Spearman's ρ is the Pearson correlation of
//! fractional ranks and Kendall's τ is the tau-b variant. A correlation that
//! is undefined (fewer than two arguments, or one side entirely tied) is
//! returned as `None` and left out of averages.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Float;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{ArgumentId, DebateGraph, Relation};
use crate::quad::Ranking;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("rankings cover different arguments")]
    MismatchedArgumentSets,
    #[error("no defined values to average")]
    AllUndefined,
    #[error("quartile buckets do not cover the ranked arguments")]
    BucketsDoNotCover,
}

/// `Some(value)` or `None` when the correlation is undefined.
pub type Correlation<F> = Option<F>;

fn cast<F: Float>(x: f64) -> F {
    F::from(x).expect("float conversion")
}

/// Fractional ranks: position 1 is best, tied arguments share the mean of
/// the positions they occupy.
#[derive(Clone, Debug, PartialEq)]
pub struct RankVector<F> {
    pub ranks: BTreeMap<ArgumentId, F>,
}

impl<F: Float> RankVector<F> {
    pub fn from_ranking(ranking: &Ranking) -> Self {
        let mut ranks = BTreeMap::new();
        let mut next = 1usize;
        for group in ranking.groups() {
            let first = next as f64;
            let last = (next + group.len() - 1) as f64;
            let shared = cast::<F>((first + last) / 2.0);
            for &id in group {
                ranks.insert(id, shared);
            }
            next += group.len();
        }
        RankVector { ranks }
    }

    /// Rank values ordered by argument id.
    pub fn values(&self) -> Vec<F> {
        self.ranks.values().copied().collect()
    }
}

fn paired_ranks<F: Float>(
    gold: &Ranking,
    predicted: &Ranking,
) -> Result<(Vec<F>, Vec<F>), MetricError> {
    if gold.len() != predicted.len() || gold.id_set() != predicted.id_set() {
        return Err(MetricError::MismatchedArgumentSets);
    }
    let g = RankVector::<F>::from_ranking(gold);
    let p = RankVector::<F>::from_ranking(predicted);
    Ok((g.values(), p.values()))
}

/// Pearson correlation; `None` when either side has zero variance.
pub fn pearson<F: Float>(x: &[F], y: &[F]) -> Correlation<F> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let nf = cast::<F>(n as f64);
    let mx = x.iter().fold(F::zero(), |a, &v| a + v) / nf;
    let my = y.iter().fold(F::zero(), |a, &v| a + v) / nf;
    let (mut sxy, mut sxx, mut syy) = (F::zero(), F::zero(), F::zero());
    for (&a, &b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy = sxy + dx * dy;
        sxx = sxx + dx * dx;
        syy = syy + dy * dy;
    }
    if sxx == F::zero() || syy == F::zero() {
        return None;
    }
    let r = sxy / (sxx * syy).sqrt();
    Some(r.max(-F::one()).min(F::one()))
}

/// Spearman's ρ between two rankings of the same arguments.
pub fn spearman_rho<F: Float>(
    gold: &Ranking,
    predicted: &Ranking,
) -> Result<Correlation<F>, MetricError> {
    let (g, p) = paired_ranks::<F>(gold, predicted)?;
    Ok(pearson(&g, &p))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TauVariant {
    /// Tie-corrected.
    #[default]
    B,
    /// `(C − D) / P`, no tie correction.
    A,
}

/// Pair counts behind Kendall's τ.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PairCounts {
    pub concordant: u64,
    pub discordant: u64,
    pub pairs: u64,
    /// Pairs tied in the first ranking (joint ties included).
    pub tied_first: u64,
    pub tied_second: u64,
}

fn pair_counts<F: Float>(x: &[F], y: &[F]) -> PairCounts {
    let n = x.len();
    let mut c = PairCounts {
        pairs: (n * n.saturating_sub(1) / 2) as u64,
        ..PairCounts::default()
    };
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = x[i].partial_cmp(&x[j]).expect("ranks are finite");
            let dy = y[i].partial_cmp(&y[j]).expect("ranks are finite");
            use std::cmp::Ordering::Equal;
            if dx == Equal {
                c.tied_first += 1;
            }
            if dy == Equal {
                c.tied_second += 1;
            }
            if dx != Equal && dy != Equal {
                if dx == dy {
                    c.concordant += 1;
                } else {
                    c.discordant += 1;
                }
            }
        }
    }
    c
}

/// Kendall's τ-b between two rankings of the same arguments.
pub fn kendall_tau<F: Float>(
    gold: &Ranking,
    predicted: &Ranking,
) -> Result<Correlation<F>, MetricError> {
    kendall_tau_with(gold, predicted, TauVariant::B)
}

pub fn kendall_tau_with<F: Float>(
    gold: &Ranking,
    predicted: &Ranking,
    variant: TauVariant,
) -> Result<Correlation<F>, MetricError> {
    let (g, p) = paired_ranks::<F>(gold, predicted)?;
    Ok(tau_from_counts(pair_counts(&g, &p), variant))
}

fn tau_from_counts<F: Float>(c: PairCounts, variant: TauVariant) -> Correlation<F> {
    if c.pairs == 0 {
        return None;
    }
    let num = cast::<F>(c.concordant as f64) - cast::<F>(c.discordant as f64);
    let tau = match variant {
        TauVariant::A => num / cast::<F>(c.pairs as f64),
        TauVariant::B => {
            let left = c.pairs - c.tied_first;
            let right = c.pairs - c.tied_second;
            if left == 0 || right == 0 {
                return None;
            }
            num / cast::<F>((left as f64) * (right as f64)).sqrt()
        }
    };
    Some(tau.max(-F::one()).min(F::one()))
}

/// Set of signed, directed edges.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeSet {
    pub edges: BTreeSet<Relation>,
}

impl EdgeSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_graph<W>(graph: &DebateGraph<W>) -> Self {
        graph.relations().iter().copied().collect()
    }

    pub fn insert(&mut self, edge: Relation) -> bool {
        self.edges.insert(edge)
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Relation> {
        self.edges.iter()
    }

    pub fn contains(&self, edge: &Relation) -> bool {
        self.edges.contains(edge)
    }
}

impl FromIterator<Relation> for EdgeSet {
    fn from_iter<I: IntoIterator<Item = Relation>>(iter: I) -> Self {
        EdgeSet {
            edges: iter.into_iter().collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrfScore<F = f64> {
    pub precision: F,
    pub recall: F,
    pub f1: F,
}

impl<F: Float> PrfScore<F> {
    pub fn from_counts(matched: usize, predicted: usize, gold: usize) -> Self {
        let ratio = |num: usize, den: usize| {
            if den == 0 {
                F::zero()
            } else {
                cast::<F>(num as f64) / cast::<F>(den as f64)
            }
        };
        let precision = ratio(matched, predicted);
        let recall = ratio(matched, gold);
        let sum = precision + recall;
        let f1 = if sum == F::zero() {
            F::zero()
        } else {
            cast::<F>(2.0) * precision * recall / sum
        };
        PrfScore {
            precision,
            recall,
            f1,
        }
    }
}

/// Exact-match edge recovery: an edge counts only if source, target and kind
/// all agree.
pub fn edge_prf<F: Float>(gold: &EdgeSet, predicted: &EdgeSet) -> PrfScore<F> {
    let matched = gold.edges.intersection(&predicted.edges).count();
    PrfScore::from_counts(matched, predicted.len(), gold.len())
}

/// Mean over the defined values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MacroAverage<F = f64> {
    pub mean: F,
    pub included: usize,
    pub excluded: usize,
}

/// Unweighted mean of the defined entries; undefined ones are counted.
pub fn macro_average<F: Float>(
    values: impl IntoIterator<Item = Option<F>>,
) -> Result<MacroAverage<F>, MetricError> {
    let (mut sum, mut included, mut excluded) = (F::zero(), 0usize, 0usize);
    for v in values {
        match v {
            Some(x) => {
                sum = sum + x;
                included += 1;
            }
            None => excluded += 1,
        }
    }
    if included == 0 {
        return Err(MetricError::AllUndefined);
    }
    Ok(MacroAverage {
        mean: sum / cast::<F>(included as f64),
        included,
        excluded,
    })
}

/// Per-graph metrics; any field may be undefined.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord<F = f64> {
    pub rho: Option<F>,
    pub tau: Option<F>,
    pub precision: Option<F>,
    pub recall: Option<F>,
    pub f1: Option<F>,
}

impl<F: Float> MetricRecord<F> {
    pub fn with_prf(mut self, prf: PrfScore<F>) -> Self {
        self.precision = Some(prf.precision);
        self.recall = Some(prf.recall);
        self.f1 = Some(prf.f1);
        self
    }
}

/// Macro averages per metric; `None` where nothing was defined.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AggregatedRecord<F = f64> {
    pub rho: Option<MacroAverage<F>>,
    pub tau: Option<MacroAverage<F>>,
    pub precision: Option<MacroAverage<F>>,
    pub recall: Option<MacroAverage<F>>,
    pub f1: Option<MacroAverage<F>>,
}

pub fn macro_average_records<F: Float>(records: &[MetricRecord<F>]) -> AggregatedRecord<F> {
    let field = |get: fn(&MetricRecord<F>) -> Option<F>| macro_average(records.iter().map(get)).ok();
    AggregatedRecord {
        rho: field(|r| r.rho),
        tau: field(|r| r.tau),
        precision: field(|r| r.precision),
        recall: field(|r| r.recall),
        f1: field(|r| r.f1),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuartileKey {
    /// Whitespace token count of the argument text.
    LengthTokens,
    /// Chronological position in the debate.
    Position,
}

impl QuartileKey {
    /// Bucket label prefix, `LQ` or `PQ`.
    pub fn prefix(self) -> &'static str {
        match self {
            QuartileKey::LengthTokens => "LQ",
            QuartileKey::Position => "PQ",
        }
    }
}

/// Number of whitespace-delimited tokens.
pub fn whitespace_tokens(text: &str) -> usize {
    text.split_whitespace().count()
}

/// Four disjoint buckets covering a graph's arguments, smallest key first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuartileBuckets {
    pub key: QuartileKey,
    pub buckets: [Vec<ArgumentId>; 4],
}

impl QuartileBuckets {
    pub fn label(&self, bucket: usize) -> String {
        format!("{}{}", self.key.prefix(), bucket + 1)
    }
}

/// Sizes of four nearly equal buckets; the first `n % 4` get one extra.
pub fn quartile_sizes(n: usize) -> [usize; 4] {
    let (base, extra) = (n / 4, n % 4);
    std::array::from_fn(|i| base + usize::from(i < extra))
}

/// Sort arguments by `key` (ties by ascending id) and cut into quartiles.
pub fn quartile_split<W>(
    graph: &DebateGraph<W>,
    key: QuartileKey,
    tokenizer: impl Fn(&str) -> usize,
) -> QuartileBuckets {
    let mut keyed: Vec<(usize, ArgumentId)> = graph
        .arguments()
        .iter()
        .map(|a| {
            let k = match key {
                QuartileKey::LengthTokens => tokenizer(&a.text),
                QuartileKey::Position => a.chronological_index,
            };
            (k, a.id)
        })
        .collect();
    keyed.sort();
    let mut ids = keyed.into_iter().map(|(_, id)| id);
    let sizes = quartile_sizes(graph.len());
    let buckets = sizes.map(|size| ids.by_ref().take(size).collect());
    QuartileBuckets { key, buckets }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct QuartileCorrelation<F = f64> {
    pub rho: Option<F>,
    pub tau: Option<F>,
}

/// ρ and τ inside each bucket, after restricting both rankings to the
/// bucket's arguments and re-ranking within it.
pub fn quartile_correlations<F: Float>(
    gold: &Ranking,
    predicted: &Ranking,
    buckets: &QuartileBuckets,
) -> Result<[QuartileCorrelation<F>; 4], MetricError> {
    if gold.id_set() != predicted.id_set() {
        return Err(MetricError::MismatchedArgumentSets);
    }
    let covered: BTreeSet<ArgumentId> = buckets.buckets.iter().flatten().copied().collect();
    let total: usize = buckets.buckets.iter().map(Vec::len).sum();
    if covered != gold.id_set() || total != covered.len() {
        return Err(MetricError::BucketsDoNotCover);
    }
    let mut out = [QuartileCorrelation { rho: None, tau: None }; 4];
    for (slot, bucket) in out.iter_mut().zip(&buckets.buckets) {
        let keep: BTreeSet<ArgumentId> = bucket.iter().copied().collect();
        let g = gold.restrict(&keep);
        let p = predicted.restrict(&keep);
        *slot = QuartileCorrelation {
            rho: spearman_rho(&g, &p)?,
            tau: kendall_tau(&g, &p)?,
        };
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{aid, Argument, BaseWeights, RelationKind};

    fn strict(ids: &[u32]) -> Ranking {
        Ranking::strict(ids.iter().map(|&i| aid(i)).collect())
    }

    /// Ranking in which argument `i` (1-based) sits at position `ranks[i-1]`.
    fn from_positions(ranks: &[usize]) -> Ranking {
        let mut order: Vec<(usize, u32)> = ranks
            .iter()
            .enumerate()
            .map(|(i, &r)| (r, i as u32 + 1))
            .collect();
        order.sort();
        strict(&order.into_iter().map(|(_, id)| id).collect::<Vec<_>>())
    }

    #[test]
    fn identity_and_reversal() {
        let r = strict(&[1, 2, 3, 4, 5]);
        assert_eq!(spearman_rho::<f64>(&r, &r).unwrap(), Some(1.0));
        assert_eq!(kendall_tau::<f64>(&r, &r).unwrap(), Some(1.0));
        let r4 = strict(&[1, 2, 3, 4]);
        assert_eq!(spearman_rho::<f64>(&r4, &r4.reversed()).unwrap(), Some(-1.0));
        let r3 = strict(&[1, 2, 3]);
        assert_eq!(kendall_tau::<f64>(&r3, &r3.reversed()).unwrap(), Some(-1.0));
    }

    #[test]
    fn spearman_adjacent_swaps() {
        let gold = from_positions(&[1, 2, 3, 4]);
        let pred = from_positions(&[2, 1, 4, 3]);
        let rho = spearman_rho::<f64>(&gold, &pred).unwrap().unwrap();
        assert!((rho - 0.6).abs() < 1e-12);
    }

    #[test]
    fn kendall_single_discordant_pair() {
        let gold = from_positions(&[1, 2, 3, 4]);
        let pred = from_positions(&[1, 3, 2, 4]);
        let tau = kendall_tau::<f64>(&gold, &pred).unwrap().unwrap();
        assert!((tau - 4.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn fractional_ranks_average_ties() {
        let r = Ranking::from_groups(vec![vec![aid(3)], vec![aid(1), aid(2)], vec![aid(4)]]);
        let v = RankVector::<f64>::from_ranking(&r);
        assert_eq!(v.ranks[&aid(3)], 1.0);
        assert_eq!(v.ranks[&aid(1)], 2.5);
        assert_eq!(v.ranks[&aid(2)], 2.5);
        assert_eq!(v.values().iter().sum::<f64>(), 10.0);
    }

    #[test]
    fn degenerate_inputs_are_undefined() {
        let one = strict(&[7]);
        assert_eq!(spearman_rho::<f64>(&one, &one).unwrap(), None);
        assert_eq!(kendall_tau::<f64>(&one, &one).unwrap(), None);
        let tied = Ranking::from_groups(vec![vec![aid(1), aid(2), aid(3)]]);
        let s = strict(&[1, 2, 3]);
        assert_eq!(spearman_rho::<f64>(&tied, &s).unwrap(), None);
        assert_eq!(kendall_tau::<f64>(&tied, &s).unwrap(), None);
        assert_eq!(
            spearman_rho::<f64>(&s, &strict(&[1, 2, 4])),
            Err(MetricError::MismatchedArgumentSets)
        );
    }

    #[test]
    fn tau_a_differs_from_tau_b_under_ties() {
        let gold = Ranking::from_groups(vec![vec![aid(1)], vec![aid(2), aid(3)]]);
        let pred = strict(&[1, 2, 3]);
        let b = kendall_tau_with::<f64>(&gold, &pred, TauVariant::B).unwrap().unwrap();
        let a = kendall_tau_with::<f64>(&gold, &pred, TauVariant::A).unwrap().unwrap();
        // C=2, D=0, P=3, one gold tie: b = 2/sqrt(2*3), a = 2/3.
        assert!((b - 2.0 / 6f64.sqrt()).abs() < 1e-12);
        assert!((a - 2.0 / 3.0).abs() < 1e-12);
    }

    fn edges(list: &[(u32, u32, RelationKind)]) -> EdgeSet {
        list.iter()
            .map(|&(s, t, k)| Relation::new(aid(s), aid(t), k))
            .collect()
    }

    #[test]
    fn edge_prf_cases() {
        use RelationKind::{Attack as A, Support as S};
        let gold = edges(&[(2, 1, A), (3, 1, S), (4, 3, A), (5, 1, S)]);
        let exact: PrfScore<f64> = edge_prf(&gold, &gold);
        assert_eq!((exact.precision, exact.recall, exact.f1), (1.0, 1.0, 1.0));

        let flipped: EdgeSet = gold
            .iter()
            .map(|r| Relation::new(r.source, r.target, r.kind.flipped()))
            .collect();
        let f: PrfScore<f64> = edge_prf(&gold, &flipped);
        assert_eq!((f.precision, f.recall, f.f1), (0.0, 0.0, 0.0));

        let pred = edges(&[(2, 1, A), (3, 1, S), (4, 3, A), (5, 1, A), (6, 1, S)]);
        let p: PrfScore<f64> = edge_prf(&gold, &pred);
        assert!((p.precision - 0.6).abs() < 1e-12);
        assert!((p.recall - 0.75).abs() < 1e-12);
        assert!((p.f1 - 2.0 / 3.0).abs() < 1e-12);

        let empty = EdgeSet::new();
        let e: PrfScore<f64> = edge_prf(&gold, &empty);
        assert_eq!((e.precision, e.recall, e.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn macro_average_cases() {
        let m = macro_average([Some(0.2), Some(0.4)]).unwrap();
        assert!((m.mean - 0.3f64).abs() < 1e-12);
        let m = macro_average([Some(0.5), None]).unwrap();
        assert_eq!((m.mean, m.included, m.excluded), (0.5, 1, 1));
        let m = macro_average([Some(0.41), Some(0.34), Some(0.33)]).unwrap();
        assert!((m.mean - 0.36f64).abs() < 0.005);
        assert_eq!(
            macro_average::<f64>([None, None]),
            Err(MetricError::AllUndefined)
        );
    }

    #[test]
    fn records_average_per_field() {
        let recs = [
            MetricRecord {
                rho: Some(0.2),
                tau: None,
                ..Default::default()
            },
            MetricRecord {
                rho: Some(0.4),
                tau: Some(0.1),
                ..Default::default()
            },
        ];
        let agg = macro_average_records(&recs);
        assert!((agg.rho.unwrap().mean - 0.3f64).abs() < 1e-12);
        assert_eq!(agg.tau.unwrap().excluded, 1);
        assert!(agg.f1.is_none());
    }

    fn graph_with_lengths(lengths: &[usize]) -> DebateGraph {
        let args = lengths
            .iter()
            .enumerate()
            .map(|(i, &len)| {
                let text = vec!["w"; len].join(" ");
                Argument::new(aid(i as u32 + 1), text, i)
            })
            .collect();
        DebateGraph::build("q", args, vec![], BaseWeights::Uniform).unwrap()
    }

    #[test]
    fn quartile_sizes_balanced() {
        assert_eq!(quartile_sizes(8), [2, 2, 2, 2]);
        assert_eq!(quartile_sizes(5), [2, 1, 1, 1]);
        assert_eq!(quartile_sizes(3), [1, 1, 1, 0]);
    }

    #[test]
    fn length_quartiles() {
        let g = graph_with_lengths(&[8, 1, 7, 2, 6, 3, 5, 4]);
        let b = quartile_split(&g, QuartileKey::LengthTokens, whitespace_tokens);
        assert_eq!(b.buckets[0], vec![aid(2), aid(4)]);
        assert_eq!(b.buckets[3], vec![aid(3), aid(1)]);
        assert_eq!(b.label(0), "LQ1");
    }

    #[test]
    fn position_quartiles() {
        let g = graph_with_lengths(&[1; 12]);
        let b = quartile_split(&g, QuartileKey::Position, whitespace_tokens);
        assert_eq!(b.buckets[0], vec![aid(1), aid(2), aid(3)]);
        assert_eq!(b.label(3), "PQ4");
    }

    #[test]
    fn quartile_correlations_restrict_and_rerank() {
        // Argument i has i tokens, so LQ1 = {1, 2}.
        let g = graph_with_lengths(&[1, 2, 3, 4, 5, 6, 7, 8]);
        let b = quartile_split(&g, QuartileKey::LengthTokens, whitespace_tokens);
        let gold = strict(&[1, 2, 3, 4, 5, 6, 7, 8]);
        let pred = strict(&[2, 1, 3, 4, 5, 6, 7, 8]);
        let q = quartile_correlations::<f64>(&gold, &pred, &b).unwrap();
        assert_eq!((q[0].rho, q[0].tau), (Some(-1.0), Some(-1.0)));
        for cell in &q[1..] {
            assert_eq!((cell.rho, cell.tau), (Some(1.0), Some(1.0)));
        }
        let same = quartile_correlations::<f64>(&gold, &gold, &b).unwrap();
        assert!(same.iter().all(|c| c.rho == Some(1.0) && c.tau == Some(1.0)));
    }

    #[test]
    fn singleton_bucket_is_undefined() {
        let g = graph_with_lengths(&[1, 2, 3, 4, 5]);
        let b = quartile_split(&g, QuartileKey::LengthTokens, whitespace_tokens);
        let gold = strict(&[1, 2, 3, 4, 5]);
        let q = quartile_correlations::<f64>(&gold, &gold, &b).unwrap();
        assert_eq!(q[0].rho, Some(1.0));
        assert_eq!(q[1].rho, None);
        assert_eq!(q[1].tau, None);
    }
}
