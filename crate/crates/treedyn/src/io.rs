//! JSON file formats for trees, maps and extensions.
//!
//! Lengths and offsets are rational strings ("3/2") or plain integers;
//! serialization is deterministic so that files round-trip byte for byte.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constructions::{ArcRole, ExtensionResult};
use crate::markov::{MarkovError, MarkovMap};
use crate::rational::{format_rational, parse_rational, Rational};
use crate::tree::{MetricTree, TreeError, TreePoint};

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Markov(#[from] MarkovError),
    #[error("bad rational literal: {0}")]
    BadRational(String),
    #[error("bad arc role label: {0}")]
    BadArcRole(String),
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum RationalLit {
    Int(i64),
    Str(String),
}

impl RationalLit {
    pub fn parse(&self) -> Result<Rational, IoError> {
        match self {
            RationalLit::Int(n) => Ok(crate::rational::int(*n)),
            RationalLit::Str(s) => {
                parse_rational(s).ok_or_else(|| IoError::BadRational(s.clone()))
            }
        }
    }

    pub fn from_rational(r: &Rational) -> Self {
        RationalLit::Str(format_rational(r))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeFile {
    pub id: String,
    pub from: String,
    pub to: String,
    pub len: RationalLit,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TreeFile {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointFile {
    Vertex { vertex: String },
    Interior { edge: String, offset: RationalLit },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarkFile {
    pub id: String,
    pub at: PointFile,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MapFile {
    pub tree: TreeFile,
    pub marks: Vec<MarkFile>,
    pub image: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub arc_roles: BTreeMap<String, String>,
}

pub fn tree_to_file(tree: &MetricTree) -> TreeFile {
    TreeFile {
        vertices: tree.vertex_names().to_vec(),
        edges: tree
            .edges()
            .iter()
            .map(|e| EdgeFile {
                id: e.id.clone(),
                from: tree.vertex_name(e.from).to_string(),
                to: tree.vertex_name(e.to).to_string(),
                len: RationalLit::from_rational(&e.len),
            })
            .collect(),
    }
}

pub fn tree_from_file(file: &TreeFile) -> Result<MetricTree, IoError> {
    let edges = file
        .edges
        .iter()
        .map(|e| Ok((e.id.clone(), e.from.clone(), e.to.clone(), e.len.parse()?)))
        .collect::<Result<Vec<_>, IoError>>()?;
    Ok(MetricTree::build(file.vertices.clone(), edges)?)
}

pub fn map_to_file(map: &MarkovMap) -> MapFile {
    MapFile {
        tree: tree_to_file(map.tree()),
        marks: map
            .tree()
            .vertex_names()
            .iter()
            .map(|v| MarkFile { id: v.clone(), at: PointFile::Vertex { vertex: v.clone() } })
            .collect(),
        image: map.image_map(),
        arc_roles: BTreeMap::new(),
    }
}

pub fn map_from_file(file: &MapFile) -> Result<MarkovMap, IoError> {
    let tree = tree_from_file(&file.tree)?;
    let marks = file
        .marks
        .iter()
        .map(|m| {
            let at = match &m.at {
                PointFile::Vertex { vertex } => TreePoint::vertex(vertex),
                PointFile::Interior { edge, offset } => {
                    TreePoint::Interior { edge: edge.clone(), offset: offset.parse()? }
                }
            };
            Ok((m.id.clone(), at))
        })
        .collect::<Result<Vec<_>, IoError>>()?;
    Ok(MarkovMap::from_point_images(&tree, &marks, &file.image)?)
}

/// Extension files are map files plus an arc-role table keyed by arc index.
pub fn extension_to_file(ext: &ExtensionResult) -> MapFile {
    let mut file = map_to_file(&ext.map);
    file.arc_roles =
        ext.labels.keys().map(|&arc| (arc.to_string(), ext.role_label(arc))).collect();
    file
}

/// Rebuilds extension metadata (roles, defect set, parameters) from the
/// role table of a map file.
pub fn extension_from_file(file: &MapFile) -> Result<ExtensionResult, IoError> {
    let map = map_from_file(file)?;
    let mut labels: BTreeMap<usize, ArcRole> = BTreeMap::new();
    let mut n = 0usize;
    let mut big_n = 0usize;
    let mut m = 0usize;
    let mut p = 0usize;
    for (arc, label) in &file.arc_roles {
        let arc: usize =
            arc.parse().map_err(|_| IoError::BadArcRole(format!("arc index {arc}")))?;
        let role = parse_role(label).ok_or_else(|| IoError::BadArcRole(label.clone()))?;
        match role {
            ArcRole::Base(i) => p = p.max(i),
            ArcRole::Leg { i, j } => {
                n = n.max(i);
                big_n = big_n.max(j);
            }
            ArcRole::Sub { l } => m = m.max(l),
        }
        labels.insert(arc, role);
    }
    let defect = labels
        .iter()
        .filter(|(_, role)| match role {
            ArcRole::Leg { i: _, j } if *j == big_n => true,
            ArcRole::Leg { i, j } => *i == n && (*j == big_n - 4 || *j == big_n - 3),
            ArcRole::Sub { .. } => true,
            ArcRole::Base(_) => false,
        })
        .map(|(&arc, _)| arc)
        .collect();
    Ok(ExtensionResult { map, labels, n, big_n, m, p, defect, s_base: Vec::new() })
}

fn parse_role(label: &str) -> Option<ArcRole> {
    let inner: Vec<&str> = label.split(['[', ']']).filter(|s| !s.is_empty()).collect();
    match inner.as_slice() {
        ["B", i] => Some(ArcRole::Base(i.parse().ok()?)),
        ["A", i, j] => {
            let i = i.parse().ok()?;
            match j.split_once(',') {
                None => Some(ArcRole::Leg { i, j: j.parse().ok()? }),
                Some((_, l)) => Some(ArcRole::Sub { l: l.parse().ok()? }),
            }
        }
        _ => None,
    }
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<String, IoError> {
    let mut out = serde_json::to_string_pretty(value)?;
    out.push('\n');
    Ok(out)
}

pub fn from_json<'a, T: Deserialize<'a>>(text: &'a str) -> Result<T, IoError> {
    Ok(serde_json::from_str(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{extend_exact, star_map, StarVariant};
    use crate::rational::{int, ratio};

    #[test]
    fn tree_round_trip_is_byte_stable() {
        let tree = crate::tree::make_ye_tree(&[2, 2], 1).unwrap();
        let text = to_json_pretty(&tree_to_file(&tree)).unwrap();
        let parsed: TreeFile = from_json(&text).unwrap();
        let back = tree_from_file(&parsed).unwrap();
        let text2 = to_json_pretty(&tree_to_file(&back)).unwrap();
        assert_eq!(text, text2);
    }

    #[test]
    fn rational_literals_accept_ints_and_fractions() {
        assert_eq!(RationalLit::Int(3).parse().unwrap(), int(3));
        assert_eq!(RationalLit::Str("3/2".into()).parse().unwrap(), ratio(3, 2));
        assert!(RationalLit::Str("x".into()).parse().is_err());
        let text = r#"{"vertices":["u","v"],"edges":[{"id":"e","from":"u","to":"v","len":2}]}"#;
        let file: TreeFile = from_json(text).unwrap();
        assert_eq!(tree_from_file(&file).unwrap().edge(0).len, int(2));
    }

    #[test]
    fn map_round_trip_preserves_structure() {
        let (map, _) = star_map(3, StarVariant::FixedHub).unwrap();
        let text = to_json_pretty(&map_to_file(&map)).unwrap();
        let parsed: MapFile = from_json(&text).unwrap();
        let back = map_from_file(&parsed).unwrap();
        assert_eq!(map.image_map(), back.image_map());
        assert_eq!(map.arc_count(), back.arc_count());
        let text2 = to_json_pretty(&map_to_file(&back)).unwrap();
        assert_eq!(text, text2);
    }

    #[test]
    fn interior_marks_parse() {
        let text = r#"{
            "tree": {"vertices":["u","v"],"edges":[{"id":"e","from":"u","to":"v","len":1}]},
            "marks": [
                {"id":"p0","at":{"vertex":"u"}},
                {"id":"ph","at":{"edge":"e","offset":"1/2"}},
                {"id":"p1","at":{"vertex":"v"}}
            ],
            "image": {"p0":"p0","ph":"p1","p1":"p0"}
        }"#;
        let file: MapFile = from_json(text).unwrap();
        let map = map_from_file(&file).unwrap();
        assert_eq!(map.arc_count(), 2);
        let td = map.transition();
        assert_eq!(td.matrix.rows(), vec![vec![1, 1], vec![1, 1]]);
    }

    #[test]
    fn extension_file_round_trip() {
        let (base, s) = star_map(2, StarVariant::FixedHub).unwrap();
        let ext = extend_exact(&base, &s, 10).unwrap();
        let file = extension_to_file(&ext);
        let text = to_json_pretty(&file).unwrap();
        let parsed: MapFile = from_json(&text).unwrap();
        let back = extension_from_file(&parsed).unwrap();
        assert_eq!(back.n, 2);
        assert_eq!(back.big_n, 10);
        assert_eq!(back.m, 8);
        assert_eq!(back.p, 4);
        assert_eq!(back.defect, ext.defect);
        assert_eq!(back.labels, ext.labels);
    }
}
