use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::LazyLock;

use quadrank_core::{acceptability, flatten_chronological, gold_ranking, Dialogue, EdgeSet, Graph, Ranking, RelationKind};
use regex::Regex;
use sha2::{Digest, Sha256};

use crate::format::{render_adjacency, render_ranking};
use crate::strategy::PromptStrategy;

#[derive(Debug, thiserror::Error)]
pub enum PromptError {
    #[error("{strategy} needs {expected} exemplar(s), got {got}")]
    ExemplarCountMismatch {
        strategy: PromptStrategy,
        expected: usize,
        got: usize,
    },
    #[error("template for {strategy} leaves placeholder {placeholder} unresolved")]
    UnresolvedPlaceholder {
        strategy: PromptStrategy,
        placeholder: String,
    },
    #[error("exemplar {index} lacks {missing}, which {strategy} requires")]
    IncompleteExemplar {
        strategy: PromptStrategy,
        index: usize,
        missing: &'static str,
    },
    #[error("reading template {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

static PLACEHOLDER: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\[(Arguments|(?:Exemplar|Ranking|Adjacency|Reasoning)_\d+)\]").unwrap());

/// One prompt template per strategy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TemplateSet {
    templates: BTreeMap<PromptStrategy, String>,
}

impl Default for TemplateSet {
    fn default() -> Self {
        let builtin = [
            (PromptStrategy::Vanilla, include_str!("../templates/vanilla.txt")),
            (PromptStrategy::IclOneShot, include_str!("../templates/icl-one-shot.txt")),
            (PromptStrategy::IclFewShot, include_str!("../templates/icl-few-shot.txt")),
            (PromptStrategy::CotZeroShot, include_str!("../templates/cot-zero-shot.txt")),
            (PromptStrategy::CotOneShot, include_str!("../templates/cot-one-shot.txt")),
            (PromptStrategy::CotFewShot, include_str!("../templates/cot-few-shot.txt")),
        ];
        TemplateSet {
            templates: builtin.into_iter().map(|(s, t)| (s, t.to_string())).collect(),
        }
    }
}

impl TemplateSet {
    /// Built-in templates, overridden by any `<strategy>.txt` in `dir`.
    pub fn with_overrides(dir: &Path) -> Result<Self, PromptError> {
        let mut set = TemplateSet::default();
        for strategy in PromptStrategy::ALL {
            let path = dir.join(format!("{strategy}.txt"));
            if path.exists() {
                let text = std::fs::read_to_string(&path).map_err(|source| PromptError::Io {
                    path: path.display().to_string(),
                    source,
                })?;
                set.templates.insert(strategy, text);
            }
        }
        Ok(set)
    }

    pub fn set(&mut self, strategy: PromptStrategy, template: impl Into<String>) {
        self.templates.insert(strategy, template.into());
    }

    pub fn get(&self, strategy: PromptStrategy) -> &str {
        &self.templates[&strategy]
    }

    /// Hex SHA-256 of one template's text.
    pub fn sha256(&self, strategy: PromptStrategy) -> String {
        hex::encode(Sha256::digest(self.get(strategy).as_bytes()))
    }
}

/// A solved debate shown to the model before the target.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Exemplar {
    pub name: String,
    pub dialogue: Dialogue,
    pub gold_ranking: Ranking,
    pub gold_adjacency: Option<EdgeSet>,
    pub reasoning_text: Option<String>,
}

impl Exemplar {
    /// Chronological dialogue, QuAD gold ranking, the graph's own edges and
    /// a generated walk-through of the relations.
    pub fn from_graph(graph: &Graph) -> Self {
        let ranking = gold_ranking(&acceptability(graph));
        Exemplar {
            name: graph.name().to_string(),
            dialogue: flatten_chronological(graph),
            reasoning_text: Some(reasoning_for(graph, &ranking)),
            gold_adjacency: Some(EdgeSet::from_graph(graph)),
            gold_ranking: ranking,
        }
    }
}

fn reasoning_for(graph: &Graph, ranking: &Ranking) -> String {
    let mut out = String::from("Reasoning:");
    let mut by_target: BTreeMap<_, Vec<_>> = BTreeMap::new();
    for r in graph.relations() {
        by_target.entry(r.target).or_insert_with(Vec::new).push(r);
    }
    for arg in graph.arguments() {
        match by_target.get(&arg.id) {
            None => {
                let _ = write!(out, " Argument {} is not answered by any other argument, so it keeps its initial strength.", arg.id);
            }
            Some(rels) => {
                let att = rels.iter().filter(|r| r.kind == RelationKind::Attack).count();
                let sup = rels.len() - att;
                let effect = match (att, sup) {
                    (_, 0) => "which weakens it",
                    (0, _) => "which strengthens it",
                    _ => "so the two effects are balanced against each other",
                };
                let _ = write!(
                    out,
                    " Argument {} has {} attacker(s) and {} supporter(s), {}.",
                    arg.id, att, sup, effect
                );
            }
        }
    }
    if let Some(top) = ranking.groups().first() {
        let names: Vec<String> = top.iter().map(|id| format!("Argument {id}")).collect();
        let _ = write!(out, " Strongest overall: {}.", names.join(" and "));
    }
    out
}

/// Expand the strategy's template for a target dialogue.
pub fn build_prompt(
    strategy: PromptStrategy,
    dialogue: &Dialogue,
    exemplars: &[Exemplar],
    templates: &TemplateSet,
) -> Result<String, PromptError> {
    let expected = strategy.exemplar_count();
    if exemplars.len() != expected {
        return Err(PromptError::ExemplarCountMismatch {
            strategy,
            expected,
            got: exemplars.len(),
        });
    }
    let template = templates.get(strategy);
    if !template.contains("[Arguments]") {
        return Err(PromptError::UnresolvedPlaceholder {
            strategy,
            placeholder: "[Arguments]".into(),
        });
    }
    let mut values: BTreeMap<String, String> = BTreeMap::new();
    for (i, ex) in exemplars.iter().enumerate() {
        let n = i + 1;
        values.insert(format!("Exemplar_{n}"), ex.dialogue.text().trim_end().to_string());
        values.insert(format!("Ranking_{n}"), render_ranking(&ex.gold_ranking));
        if strategy.is_cot() {
            let adjacency = ex.gold_adjacency.as_ref().ok_or(PromptError::IncompleteExemplar {
                strategy,
                index: n,
                missing: "an adjacency list",
            })?;
            let reasoning = ex.reasoning_text.as_ref().ok_or(PromptError::IncompleteExemplar {
                strategy,
                index: n,
                missing: "reasoning text",
            })?;
            values.insert(format!("Adjacency_{n}"), render_adjacency(adjacency));
            values.insert(format!("Reasoning_{n}"), reasoning.clone());
        }
    }
    values.insert("Arguments".into(), dialogue.text().trim_end().to_string());

    // Resolve every placeholder in one pass so text inserted from dialogues
    // is never scanned again.
    let mut unresolved = None;
    let prompt = PLACEHOLDER.replace_all(template, |caps: &regex::Captures| match values.get(&caps[1]) {
        Some(v) => v.clone(),
        None => {
            unresolved.get_or_insert_with(|| caps[0].to_string());
            String::new()
        }
    });
    if let Some(placeholder) = unresolved {
        return Err(PromptError::UnresolvedPlaceholder { strategy, placeholder });
    }
    Ok(prompt.into_owned())
}

#[cfg(test)]
mod tests {
    use super::*;
    use quadrank_core::graph::numbered_arguments;
    use quadrank_core::{build_graph, BaseWeights, Relation};

    fn debate(name: &str) -> Graph {
        build_graph(
            name,
            numbered_arguments(4),
            vec![Relation::support(2, 1), Relation::attack(3, 1), Relation::attack(4, 3)],
            BaseWeights::Uniform,
        )
        .unwrap()
    }

    #[test]
    fn vanilla_holds_dialogue_and_instruction_only() {
        let target = flatten_chronological(&debate("t"));
        let p = build_prompt(PromptStrategy::Vanilla, &target, &[], &TemplateSet::default()).unwrap();
        assert!(p.contains(target.text().trim_end()));
        assert!(p.contains("Ranking: Argument a > Argument b"));
        assert!(!p.contains("Adjacency list"));
        assert!(!PLACEHOLDER.is_match(&p));
    }

    #[test]
    fn one_shot_embeds_exemplar_before_target() {
        let ex = Exemplar::from_graph(&debate("ex"));
        let target = flatten_chronological(&debate("t"));
        let p = build_prompt(PromptStrategy::IclOneShot, &target, std::slice::from_ref(&ex), &TemplateSet::default()).unwrap();
        let ranking = render_ranking(&ex.gold_ranking);
        assert_eq!(ranking, "Ranking: Argument 1 > Argument 2 = Argument 4 > Argument 3");
        let at_ranking = p.find(&ranking).unwrap();
        let at_target = p.rfind("Argument 1: argument 1").unwrap();
        assert!(at_ranking < at_target);
        assert!(!p.contains("Reasoning:"));
    }

    #[test]
    fn cot_few_shot_needs_three() {
        let ex = Exemplar::from_graph(&debate("ex"));
        let target = flatten_chronological(&debate("t"));
        let err = build_prompt(PromptStrategy::CotFewShot, &target, &[ex.clone(), ex], &TemplateSet::default());
        assert!(matches!(
            err,
            Err(PromptError::ExemplarCountMismatch { expected: 3, got: 2, .. })
        ));
    }

    #[test]
    fn cot_exemplars_carry_adjacency_and_reasoning() {
        let ex = Exemplar::from_graph(&debate("ex"));
        let target = flatten_chronological(&debate("t"));
        let p = build_prompt(PromptStrategy::CotOneShot, &target, std::slice::from_ref(&ex), &TemplateSet::default()).unwrap();
        assert!(p.contains("Adjacency list: {'Argument 1': [('Argument 2', 'support'), ('Argument 3', 'attack')]"));
        assert!(p.contains("Argument 1 has 1 attacker(s) and 1 supporter(s)"));

        let bare = Exemplar { reasoning_text: None, ..ex };
        let err = build_prompt(PromptStrategy::CotOneShot, &target, std::slice::from_ref(&bare), &TemplateSet::default());
        assert!(matches!(err, Err(PromptError::IncompleteExemplar { .. })));
        assert!(build_prompt(PromptStrategy::IclOneShot, &target, &[bare], &TemplateSet::default()).is_ok());
    }

    #[test]
    fn unresolved_placeholders_are_reported() {
        let mut set = TemplateSet::default();
        set.set(PromptStrategy::Vanilla, "[Arguments]\n[Exemplar_1]");
        let target = flatten_chronological(&debate("t"));
        let err = build_prompt(PromptStrategy::Vanilla, &target, &[], &set).unwrap_err();
        assert!(matches!(err, PromptError::UnresolvedPlaceholder { placeholder, .. } if placeholder == "[Exemplar_1]"));
        set.set(PromptStrategy::Vanilla, "no slot");
        assert!(build_prompt(PromptStrategy::Vanilla, &target, &[], &set).is_err());
    }

    #[test]
    fn dialogue_text_is_not_expanded() {
        let g = build_graph::<f64>(
            "t",
            vec![quadrank_core::Argument::new(quadrank_core::aid(1), "see [Exemplar_1]", 0)],
            vec![],
            BaseWeights::Uniform,
        )
        .unwrap();
        let p = build_prompt(PromptStrategy::Vanilla, &flatten_chronological(&g), &[], &TemplateSet::default()).unwrap();
        assert!(p.contains("Argument 1: see [Exemplar_1]"));
    }

    #[test]
    fn overrides_and_hashes() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("vanilla.txt"), "Rank: [Arguments]").unwrap();
        let set = TemplateSet::with_overrides(dir.path()).unwrap();
        assert_eq!(set.get(PromptStrategy::Vanilla), "Rank: [Arguments]");
        assert_eq!(set.get(PromptStrategy::CotFewShot), TemplateSet::default().get(PromptStrategy::CotFewShot));
        assert_ne!(set.sha256(PromptStrategy::Vanilla), TemplateSet::default().sha256(PromptStrategy::Vanilla));
        assert_eq!(set.sha256(PromptStrategy::Vanilla).len(), 64);
    }
}
