//! NoDE pair XML.
//!
//! ```xml
//! <entailment-corpus>
//!   <pair id="1" topic="SobrietyTest" entailment="NO">
//!     <t id="3">...</t>
//!     <h id="1">...</h>
//!   </pair>
//! </entailment-corpus>
//! ```
//!
//! Each pair becomes one relation from `t` to `h`: support for `YES`,
//! attack for `NO`. Pairs are grouped into one graph per topic.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};

use quick_xml::events::{BytesDecl, BytesEnd, BytesStart, BytesText, Event};
use quick_xml::{Reader, Writer};

use super::{graph_error, IngestError};
use crate::graph::{Argument, ArgumentId, BaseWeights, DebateGraph, Relation, RelationKind};
use crate::scalar::Weight;
use crate::Graph;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Entailment {
    /// Support.
    Yes,
    /// Attack.
    No,
}

impl Entailment {
    pub fn kind(self) -> RelationKind {
        match self {
            Entailment::Yes => RelationKind::Support,
            Entailment::No => RelationKind::Attack,
        }
    }

    pub fn from_kind(kind: RelationKind) -> Self {
        match kind {
            RelationKind::Support => Entailment::Yes,
            RelationKind::Attack => Entailment::No,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Entailment::Yes => "YES",
            Entailment::No => "NO",
        }
    }
}

/// One `<pair>` as written in the file. Argument ids are kept verbatim.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawPair {
    pub pair_id: String,
    pub topic: String,
    pub entailment: Entailment,
    pub t_id: String,
    pub h_id: String,
    pub t_text: String,
    pub h_text: String,
}

/// Trim and collapse internal whitespace runs to one space.
pub fn canonical_text(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[derive(Default)]
struct PendingPair {
    pair_id: String,
    topic: String,
    entailment: String,
    t: Option<(String, String)>,
    h: Option<(String, String)>,
}

fn attribute(
    e: &BytesStart<'_>,
    name: &str,
    position: u64,
) -> Result<Option<String>, IngestError> {
    for attr in e.attributes() {
        let attr = attr.map_err(|err| IngestError::MalformedXml {
            position,
            message: err.to_string(),
        })?;
        if attr.key.as_ref() == name.as_bytes() {
            let value = attr
                .unescape_value()
                .map_err(|err| IngestError::MalformedXml {
                    position,
                    message: err.to_string(),
                })?;
            return Ok(Some(value.into_owned()));
        }
    }
    Ok(None)
}

/// Read every `<pair>` in document order.
pub fn parse_node_pairs<R: BufRead>(
    reader: R,
    fallback_topic: Option<&str>,
) -> Result<Vec<RawPair>, IngestError> {
    let mut reader = Reader::from_reader(reader);
    let mut buf = Vec::new();
    let mut pairs = Vec::new();
    let mut pending: Option<PendingPair> = None;
    // Open <t>/<h>: which one, its id, accumulated text.
    let mut child: Option<(&'static str, String, String)> = None;

    loop {
        let position = reader.buffer_position();
        let event = reader
            .read_event_into(&mut buf)
            .map_err(|err| IngestError::MalformedXml {
                position: reader.error_position(),
                message: err.to_string(),
            })?;
        match event {
            Event::Start(e) => match e.name().as_ref() {
                b"pair" => {
                    let topic = match attribute(&e, "topic", position)? {
                        Some(t) => t,
                        None => fallback_topic
                            .map(str::to_string)
                            .ok_or(IngestError::MissingAttribute {
                                element: "pair",
                                attribute: "topic",
                                position,
                            })?,
                    };
                    pending = Some(PendingPair {
                        pair_id: attribute(&e, "id", position)?.ok_or(
                            IngestError::MissingAttribute {
                                element: "pair",
                                attribute: "id",
                                position,
                            },
                        )?,
                        topic: canonical_text(&topic),
                        entailment: attribute(&e, "entailment", position)?.ok_or(
                            IngestError::MissingAttribute {
                                element: "pair",
                                attribute: "entailment",
                                position,
                            },
                        )?,
                        ..PendingPair::default()
                    });
                }
                name @ (b"t" | b"h") if pending.is_some() => {
                    let which = if name == b"t" { "t" } else { "h" };
                    let id = attribute(&e, "id", position)?.ok_or(
                        IngestError::MissingAttribute {
                            element: which,
                            attribute: "id",
                            position,
                        },
                    )?;
                    child = Some((which, id.trim().to_string(), String::new()));
                }
                _ => {}
            },
            Event::Empty(e) if matches!(e.name().as_ref(), b"t" | b"h") && pending.is_some() => {
                let which = if e.name().as_ref() == b"t" { "t" } else { "h" };
                let pair_id = pending.as_ref().map(|p| p.pair_id.clone()).unwrap_or_default();
                return Err(IngestError::EmptyText {
                    pair_id,
                    child: which,
                });
            }
            Event::Text(t) => {
                if let Some((_, _, text)) = child.as_mut() {
                    let s = t.unescape().map_err(|err| IngestError::MalformedXml {
                        position,
                        message: err.to_string(),
                    })?;
                    text.push_str(&s);
                }
            }
            Event::CData(c) => {
                if let Some((_, _, text)) = child.as_mut() {
                    text.push_str(&String::from_utf8_lossy(&c));
                }
            }
            Event::End(e) => match e.name().as_ref() {
                name @ (b"t" | b"h") => {
                    if let (Some((which, id, text)), Some(p)) = (child.take(), pending.as_mut()) {
                        debug_assert_eq!(which.as_bytes(), name);
                        let slot = if which == "t" { &mut p.t } else { &mut p.h };
                        *slot = Some((id, text));
                    }
                }
                b"pair" => {
                    if let Some(p) = pending.take() {
                        pairs.push(finish_pair(p)?);
                    }
                }
                _ => {}
            },
            Event::Eof => break,
            _ => {}
        }
        buf.clear();
    }
    if pending.is_some() {
        return Err(IngestError::MalformedXml {
            position: reader.buffer_position(),
            message: "unexpected end of document inside <pair>".into(),
        });
    }
    Ok(pairs)
}

fn finish_pair(p: PendingPair) -> Result<RawPair, IngestError> {
    let entailment = match p.entailment.trim() {
        v if v.eq_ignore_ascii_case("yes") => Entailment::Yes,
        v if v.eq_ignore_ascii_case("no") => Entailment::No,
        v => {
            return Err(IngestError::UnknownEntailmentValue {
                pair_id: p.pair_id,
                value: v.to_string(),
            })
        }
    };
    let take = |slot: Option<(String, String)>, child: &'static str| {
        let (id, text) = slot.ok_or_else(|| IngestError::MissingChild {
            pair_id: p.pair_id.clone(),
            child,
        })?;
        let text = canonical_text(&text);
        if text.is_empty() {
            return Err(IngestError::EmptyText {
                pair_id: p.pair_id.clone(),
                child,
            });
        }
        Ok((id, text))
    };
    let (t_id, t_text) = take(p.t.clone(), "t")?;
    let (h_id, h_text) = take(p.h.clone(), "h")?;
    Ok(RawPair {
        pair_id: p.pair_id,
        topic: p.topic,
        entailment,
        t_id,
        h_id,
        t_text,
        h_text,
    })
}

/// Group pairs by topic (in order of first appearance) and build one graph
/// per topic with uniform base weights.
///
/// Numeric argument ids are kept and define the chronology. If any id in a
/// topic is not a positive integer, that topic's arguments are renumbered
/// `1..` in order of first appearance (claim before reply within a pair).
pub fn graphs_from_pairs(pairs: &[RawPair]) -> Result<Vec<Graph>, IngestError> {
    let mut topics: Vec<&str> = Vec::new();
    let mut by_topic: HashMap<&str, Vec<&RawPair>> = HashMap::new();
    for p in pairs {
        by_topic
            .entry(p.topic.as_str())
            .or_insert_with(|| {
                topics.push(p.topic.as_str());
                Vec::new()
            })
            .push(p);
    }
    topics
        .into_iter()
        .map(|topic| build_topic(topic, &by_topic[topic]))
        .collect()
}

fn build_topic(topic: &str, pairs: &[&RawPair]) -> Result<Graph, IngestError> {
    // label -> text, in order of first appearance
    let mut seen: Vec<(String, String)> = Vec::new();
    let mut lookup: HashMap<String, usize> = HashMap::new();
    for p in pairs {
        for (label, text) in [(&p.h_id, &p.h_text), (&p.t_id, &p.t_text)] {
            match lookup.get(label) {
                Some(&i) if seen[i].1 != *text => {
                    return Err(IngestError::ConflictingArgumentText {
                        topic: topic.to_string(),
                        id: label.clone(),
                    })
                }
                Some(_) => {}
                None => {
                    lookup.insert(label.clone(), seen.len());
                    seen.push((label.clone(), text.clone()));
                }
            }
        }
    }

    let numeric: Option<Vec<ArgumentId>> =
        seen.iter().map(|(label, _)| label.parse().ok()).collect();
    let ids: BTreeMap<String, ArgumentId> = match numeric {
        Some(ids) => seen.iter().map(|(l, _)| l.clone()).zip(ids).collect(),
        None => seen
            .iter()
            .enumerate()
            .map(|(i, (l, _))| (l.clone(), crate::graph::aid(i as u32 + 1)))
            .collect(),
    };
    let mut arguments: Vec<(ArgumentId, String)> = seen
        .iter()
        .map(|(label, text)| (ids[label], text.clone()))
        .collect();
    if numeric_ids(&seen) {
        arguments.sort_by_key(|(id, _)| *id);
    }
    let arguments = arguments
        .into_iter()
        .enumerate()
        .map(|(i, (id, text))| Argument::new(id, text, i))
        .collect();
    let relations = pairs
        .iter()
        .map(|p| Relation::new(ids[&p.t_id], ids[&p.h_id], p.entailment.kind()))
        .collect();
    DebateGraph::build(topic, arguments, relations, BaseWeights::Uniform)
        .map_err(|e| graph_error(topic, e))
}

fn numeric_ids(seen: &[(String, String)]) -> bool {
    seen.iter().all(|(l, _)| l.parse::<ArgumentId>().is_ok())
}

/// Parse a whole NoDE document into graphs.
pub fn parse_node_xml<R: BufRead>(reader: R) -> Result<Vec<Graph>, IngestError> {
    graphs_from_pairs(&parse_node_pairs(reader, None)?)
}

/// Write graphs back as NoDE pair XML, one `<pair>` per relation. Arguments
/// that take part in no relation cannot be expressed in this format and are
/// dropped.
pub fn write_node_xml<W: Weight, Out: Write>(
    graphs: &[DebateGraph<W>],
    out: Out,
) -> Result<(), IngestError> {
    let mut writer = Writer::new_with_indent(out, b' ', 2);
    let io = |e: std::io::Error| IngestError::Io(e);
    writer
        .write_event(Event::Decl(BytesDecl::new("1.0", Some("UTF-8"), None)))
        .map_err(io)?;
    writer
        .write_event(Event::Start(BytesStart::new("entailment-corpus")))
        .map_err(io)?;
    let mut pair_id = 0usize;
    for g in graphs {
        for rel in g.relations() {
            pair_id += 1;
            let id = pair_id.to_string();
            let entailment = Entailment::from_kind(rel.kind).as_str();
            let pair = BytesStart::new("pair").with_attributes([
                ("id", id.as_str()),
                ("topic", g.name()),
                ("entailment", entailment),
            ]);
            writer.write_event(Event::Start(pair)).map_err(io)?;
            for (tag, arg_id) in [("t", rel.source), ("h", rel.target)] {
                let text = &g.argument(arg_id).expect("relation endpoints exist").text;
                let label = arg_id.to_string();
                writer
                    .write_event(Event::Start(
                        BytesStart::new(tag).with_attributes([("id", label.as_str())]),
                    ))
                    .map_err(io)?;
                writer
                    .write_event(Event::Text(BytesText::new(text)))
                    .map_err(io)?;
                writer
                    .write_event(Event::End(BytesEnd::new(tag)))
                    .map_err(io)?;
            }
            writer
                .write_event(Event::End(BytesEnd::new("pair")))
                .map_err(io)?;
        }
    }
    writer
        .write_event(Event::End(BytesEnd::new("entailment-corpus")))
        .map_err(io)?;
    writer.into_inner().write_all(b"\n").map_err(io)?;
    Ok(())
}
