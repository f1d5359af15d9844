//! The response contract: a final `Ranking:` line and, for chain-of-thought
//! strategies, a signed adjacency list keyed by target argument.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::LazyLock;

use quadrank_core::{ArgumentId, EdgeSet, Ranking, Relation, RelationKind};
use regex::Regex;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum FormatError {
    #[error("no ranking found in the response")]
    MissingRanking,
    #[error("ranking is not a permutation of the debate's arguments (missing {missing:?}, repeated {repeated:?})")]
    NotAPermutation {
        missing: Vec<ArgumentId>,
        repeated: Vec<ArgumentId>,
    },
    #[error("ranking names Argument {0}, which is not in the debate")]
    UnknownArgumentId(u64),
    #[error("no adjacency list found in the response")]
    MissingAdjacency,
    #[error("every adjacency entry was rejected ({rejected} rejected)")]
    EmptyAfterRejection { rejected: usize },
}

static ARG_REF: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)\bargument\s*#?\s*(\d+)").unwrap());
static RANKING_MARKER: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)ranking[^\n:]{0,40}:").unwrap());
static LIST_ITEM: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^\s*(\d+\s*[.)]|[-*•])\s+").unwrap());
static ADJ_KEY: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r#"(?i)['"]?\s*argument\s*(\d+)\s*['"]?\s*:\s*\[([^\]]*)\]"#).unwrap()
});
static ADJ_TUPLE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r#"(?i)\(\s*['"]?\s*argument\s*(\d+)\s*['"]?\s*,\s*['"]?\s*([a-z+\-]+)\s*['"]?\s*\)"#).unwrap()
});
static ADJ_EMPTY: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)adjacency[^\n:]{0,20}:\s*\{\s*\}").unwrap());

/// Canonical ranking line: `Ranking: Argument 3 > Argument 1 = Argument 5`.
pub fn render_ranking(ranking: &Ranking) -> String {
    let groups: Vec<String> = ranking
        .groups()
        .iter()
        .map(|g| g.iter().map(|id| format!("Argument {id}")).collect::<Vec<_>>().join(" = "))
        .collect();
    format!("Ranking: {}", groups.join(" > "))
}

/// Groups of raw ids on one line; `=` between two references ties them.
fn groups_in_line(line: &str) -> Vec<Vec<u64>> {
    let mut groups: Vec<Vec<u64>> = Vec::new();
    let mut last_end = None;
    for cap in ARG_REF.captures_iter(line) {
        let m = cap.get(0).unwrap();
        let id: u64 = cap[1].parse().unwrap_or(u64::MAX);
        let tied = last_end.is_some_and(|end| line[end..m.start()].contains('='));
        match groups.last_mut() {
            Some(g) if tied => g.push(id),
            _ => groups.push(vec![id]),
        }
        last_end = Some(m.end());
    }
    groups
}

fn continues(line: &str) -> bool {
    matches!(line.trim_end().chars().last(), Some('>' | ',' | '='))
}

/// Groups from the block that starts at `rest`.
fn block_groups(rest: &str) -> Vec<Vec<u64>> {
    let mut lines = rest.lines().skip_while(|l| l.trim().is_empty() || !ARG_REF.is_match(l));
    let Some(first) = lines.next() else {
        return Vec::new();
    };
    let mut groups = Vec::new();
    if LIST_ITEM.is_match(first) {
        groups.extend(groups_in_line(&LIST_ITEM.replace(first, "")).into_iter().take(1));
        for line in lines {
            if !LIST_ITEM.is_match(line) || !ARG_REF.is_match(line) {
                break;
            }
            groups.extend(groups_in_line(&LIST_ITEM.replace(line, "")).into_iter().take(1));
        }
    } else {
        groups.extend(groups_in_line(first));
        let mut open = continues(first);
        for line in lines {
            if !open {
                break;
            }
            groups.extend(groups_in_line(line));
            open = continues(line);
        }
    }
    groups
}

/// Fallback when no `Ranking:` marker is present: the last line chaining
/// references with `>`, else the last numbered list of references.
fn unmarked_groups(text: &str) -> Vec<Vec<u64>> {
    let lines: Vec<&str> = text.lines().collect();
    if let Some(line) = lines
        .iter()
        .rev()
        .find(|l| l.contains('>') && ARG_REF.find_iter(l).count() >= 2)
    {
        return groups_in_line(line);
    }
    if let Some(last) = lines.iter().rposition(|l| LIST_ITEM.is_match(l) && ARG_REF.is_match(l)) {
        let start = lines[..=last]
            .iter()
            .rposition(|l| !(LIST_ITEM.is_match(l) && ARG_REF.is_match(l)))
            .map_or(0, |i| i + 1);
        return block_groups(&lines[start..=last].join("\n"));
    }
    Vec::new()
}

/// Extract the final ranking and check it is a permutation of `expected`.
pub fn parse_ranking(response: &str, expected: &BTreeSet<ArgumentId>) -> Result<Ranking, FormatError> {
    let raw = match RANKING_MARKER.find_iter(response).last() {
        Some(m) => block_groups(&response[m.end()..]),
        None => unmarked_groups(response),
    };
    if raw.is_empty() {
        return Err(FormatError::MissingRanking);
    }
    let mut groups = Vec::with_capacity(raw.len());
    let mut counts: BTreeMap<ArgumentId, usize> = BTreeMap::new();
    for g in raw {
        let mut ids = Vec::with_capacity(g.len());
        for id in g {
            let known = u32::try_from(id)
                .ok()
                .and_then(ArgumentId::new)
                .filter(|a| expected.contains(a))
                .ok_or(FormatError::UnknownArgumentId(id))?;
            *counts.entry(known).or_default() += 1;
            ids.push(known);
        }
        groups.push(ids);
    }
    let missing: Vec<ArgumentId> = expected.iter().filter(|id| !counts.contains_key(id)).copied().collect();
    let repeated: Vec<ArgumentId> = counts.iter().filter(|(_, &c)| c > 1).map(|(&id, _)| id).collect();
    if !missing.is_empty() || !repeated.is_empty() {
        return Err(FormatError::NotAPermutation { missing, repeated });
    }
    Ok(Ranking::from_groups(groups))
}

/// Canonical adjacency list, targets and sources ascending.
pub fn render_adjacency(edges: &EdgeSet) -> String {
    let mut by_target: BTreeMap<ArgumentId, Vec<&Relation>> = BTreeMap::new();
    for e in edges.iter() {
        by_target.entry(e.target).or_default().push(e);
    }
    let entries: Vec<String> = by_target
        .iter()
        .map(|(target, rels)| {
            let tuples: Vec<String> = rels
                .iter()
                .map(|r| format!("('Argument {}', '{}')", r.source, r.kind.as_str()))
                .collect();
            format!("'Argument {target}': [{}]", tuples.join(", "))
        })
        .collect();
    format!("Adjacency list: {{{}}}", entries.join(", "))
}

/// Why adjacency entries were dropped.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejections {
    pub unknown_id: usize,
    pub unknown_kind: usize,
    pub self_relation: usize,
    pub malformed: usize,
}

impl Rejections {
    pub fn total(&self) -> usize {
        self.unknown_id + self.unknown_kind + self.self_relation + self.malformed
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedAdjacency {
    pub edges: EdgeSet,
    pub rejections: Rejections,
}

/// Map a relation label to a kind; plural, participle and sign forms are
/// accepted.
pub fn normalize_kind(label: &str) -> Option<RelationKind> {
    match label.trim().to_ascii_lowercase().as_str() {
        "attack" | "attacks" | "attacking" | "attacked" | "-" | "neg" | "negative" | "against" | "con" => {
            Some(RelationKind::Attack)
        }
        "support" | "supports" | "supporting" | "supported" | "+" | "pos" | "positive" | "for" | "pro" => {
            Some(RelationKind::Support)
        }
        _ => None,
    }
}

fn known(id: &str, expected: &BTreeSet<ArgumentId>) -> Option<ArgumentId> {
    id.parse::<u32>().ok().and_then(ArgumentId::new).filter(|a| expected.contains(a))
}

/// Parse `'Argument i': [('Argument j', 'kind'), ...]` entries. The key is
/// the target, each tuple a source. Entries naming unknown ids or kinds are
/// rejected and tallied.
pub fn parse_adjacency(response: &str, expected: &BTreeSet<ArgumentId>) -> Result<ParsedAdjacency, FormatError> {
    let mut edges = EdgeSet::new();
    let mut rej = Rejections::default();
    let mut keys = 0usize;
    for key in ADJ_KEY.captures_iter(response) {
        keys += 1;
        let target = known(&key[1], expected);
        let body = &key[2];
        let mut tuples = 0usize;
        for t in ADJ_TUPLE.captures_iter(body) {
            tuples += 1;
            let (Some(target), Some(source)) = (target, known(&t[1], expected)) else {
                rej.unknown_id += 1;
                continue;
            };
            let Some(kind) = normalize_kind(&t[2]) else {
                rej.unknown_kind += 1;
                continue;
            };
            if source == target {
                rej.self_relation += 1;
                continue;
            }
            edges.insert(Relation::new(source, target, kind));
        }
        rej.malformed += body.matches('(').count().saturating_sub(tuples);
    }
    if keys == 0 && !ADJ_EMPTY.is_match(response) {
        return Err(FormatError::MissingAdjacency);
    }
    if edges.is_empty() && rej.total() > 0 {
        return Err(FormatError::EmptyAfterRejection { rejected: rej.total() });
    }
    Ok(ParsedAdjacency { edges, rejections: rej })
}

#[cfg(test)]
mod tests {
    use super::*;
    use quadrank_core::aid;

    fn ids(v: &[u32]) -> BTreeSet<ArgumentId> {
        v.iter().map(|&i| aid(i)).collect()
    }

    fn order(r: &Ranking) -> Vec<u32> {
        r.ordered_ids().iter().map(|a| a.get()).collect()
    }

    #[test]
    fn canonical_line() {
        let r = parse_ranking("Ranking: Argument 3 > Argument 1 > Argument 5", &ids(&[1, 3, 5])).unwrap();
        assert_eq!(order(&r), [3, 1, 5]);
        assert!(!r.has_ties());
    }

    #[test]
    fn lenient_separators() {
        let expected = ids(&[1, 2, 3]);
        let comma = parse_ranking("Final ranking: Argument 2, Argument 3, Argument 1", &expected).unwrap();
        assert_eq!(order(&comma), [2, 3, 1]);
        let listed = "Some thoughts.\n\n**Ranking:**\n1. Argument 3\n2. Argument 1\n3. Argument 2\n\nDone.";
        assert_eq!(order(&parse_ranking(listed, &expected).unwrap()), [3, 1, 2]);
        let wrapped = "Ranking: Argument 1 >\nArgument 3 >\nArgument 2\nArgument 1 is weak because...";
        assert_eq!(order(&parse_ranking(wrapped, &expected).unwrap()), [1, 3, 2]);
        let unmarked = "I think Argument 2 > Argument 1 > Argument 3.";
        assert_eq!(order(&parse_ranking(unmarked, &expected).unwrap()), [2, 1, 3]);
    }

    #[test]
    fn last_marker_wins() {
        let text = "Ranking: Argument 1 > Argument 2\nOn reflection:\nRanking: Argument 2 > Argument 1";
        assert_eq!(order(&parse_ranking(text, &ids(&[1, 2])).unwrap()), [2, 1]);
    }

    #[test]
    fn ties_parse_as_groups() {
        let r = parse_ranking("Ranking: Argument 2 = Argument 4 > Argument 1", &ids(&[1, 2, 4])).unwrap();
        assert_eq!(r.groups(), &[vec![aid(2), aid(4)], vec![aid(1)]]);
    }

    #[test]
    fn ranking_errors() {
        let expected = ids(&[1, 3, 5]);
        assert_eq!(parse_ranking("", &expected), Err(FormatError::MissingRanking));
        assert_eq!(parse_ranking("Ranking: none", &expected), Err(FormatError::MissingRanking));
        assert_eq!(
            parse_ranking("Ranking: Argument 3 > Argument 1", &expected),
            Err(FormatError::NotAPermutation { missing: vec![aid(5)], repeated: vec![] })
        );
        assert_eq!(
            parse_ranking("Ranking: Argument 3 > Argument 1 > Argument 3 > Argument 5", &expected),
            Err(FormatError::NotAPermutation { missing: vec![], repeated: vec![aid(3)] })
        );
        assert_eq!(
            parse_ranking("Ranking: Argument 3 > Argument 9 > Argument 5", &expected),
            Err(FormatError::UnknownArgumentId(9))
        );
        assert_eq!(
            parse_ranking("Ranking: Argument 0 > Argument 1", &expected),
            Err(FormatError::UnknownArgumentId(0))
        );
    }

    #[test]
    fn ranking_render_round_trip() {
        let r = Ranking::from_groups(vec![vec![aid(4)], vec![aid(1), aid(7)], vec![aid(2)]]);
        let line = render_ranking(&r);
        assert_eq!(line, "Ranking: Argument 4 > Argument 1 = Argument 7 > Argument 2");
        assert_eq!(parse_ranking(&line, &r.id_set()).unwrap(), r);
    }

    #[test]
    fn adjacency_example_syntax() {
        let parsed = parse_adjacency("'Argument 2': [('Argument 6','attack')]", &ids(&[2, 6])).unwrap();
        assert_eq!(parsed.edges.iter().copied().collect::<Vec<_>>(), [Relation::attack(6, 2)]);
        assert_eq!(parsed.rejections.total(), 0);
    }

    #[test]
    fn kind_normalization_table() {
        for (label, kind) in [
            ("attack", RelationKind::Attack),
            ("attacks", RelationKind::Attack),
            ("Attacking", RelationKind::Attack),
            ("-", RelationKind::Attack),
            ("support", RelationKind::Support),
            ("supports", RelationKind::Support),
            ("SUPPORTED", RelationKind::Support),
            ("+", RelationKind::Support),
        ] {
            assert_eq!(normalize_kind(label), Some(kind), "{label}");
        }
        assert_eq!(normalize_kind("rebuts"), None);
        let parsed = parse_adjacency("{'Argument 1': [('Argument 2', 'supports')]}", &ids(&[1, 2])).unwrap();
        assert!(parsed.edges.contains(&Relation::support(2, 1)));
    }

    #[test]
    fn rejections_are_tallied() {
        let text = "{'Argument 9': [('Argument 2', 'attack')], 'Argument 1': [('Argument 2', 'support'), ('Argument 3', 'rebuts'), ('Argument 1', 'attack'), ('Argument 3')]}";
        let parsed = parse_adjacency(text, &ids(&[1, 2, 3])).unwrap();
        assert_eq!(parsed.edges.len(), 1);
        assert_eq!(
            parsed.rejections,
            Rejections { unknown_id: 1, unknown_kind: 1, self_relation: 1, malformed: 1 }
        );
    }

    #[test]
    fn adjacency_errors() {
        let expected = ids(&[1, 2]);
        assert_eq!(parse_adjacency("Ranking: Argument 1 > Argument 2", &expected), Err(FormatError::MissingAdjacency));
        assert_eq!(
            parse_adjacency("'Argument 7': [('Argument 2','attack')]", &expected),
            Err(FormatError::EmptyAfterRejection { rejected: 1 })
        );
        assert!(parse_adjacency("Adjacency list: {}", &expected).unwrap().edges.is_empty());
        assert!(parse_adjacency("'Argument 1': []", &expected).unwrap().edges.is_empty());
    }

    #[test]
    fn adjacency_render_round_trip() {
        let edges: EdgeSet = [Relation::support(2, 1), Relation::attack(3, 1), Relation::support(4, 3)]
            .into_iter()
            .collect();
        let text = render_adjacency(&edges);
        assert_eq!(
            text,
            "Adjacency list: {'Argument 1': [('Argument 2', 'support'), ('Argument 3', 'attack')], 'Argument 3': [('Argument 4', 'support')]}"
        );
        assert_eq!(parse_adjacency(&text, &ids(&[1, 2, 3, 4])).unwrap().edges, edges);
        assert_eq!(render_adjacency(&EdgeSet::new()), "Adjacency list: {}");
        assert!(parse_adjacency(&render_adjacency(&EdgeSet::new()), &ids(&[1])).unwrap().edges.is_empty());
    }
}
