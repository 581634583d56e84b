use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::model::DataModel;
use crate::syntax::{sym, Nominal};

#[derive(Debug, Error)]
pub enum ModelIoError {
    #[error("malformed model JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("naming key '{0}' is not a nominal")]
    BadNominal(String),
    #[error("duplicate node id '{0}'")]
    DuplicateNode(String),
}

/// External model format; node ids are opaque strings.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq, Eq)]
pub struct ModelJson {
    #[serde(default)]
    pub nodes: Vec<String>,
    #[serde(default)]
    pub edges: BTreeMap<String, Vec<(String, String)>>,
    #[serde(default)]
    pub data: BTreeMap<String, Vec<Vec<String>>>,
    #[serde(default)]
    pub valuation: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub naming: BTreeMap<String, String>,
}

impl ModelJson {
    /// Converts to the dense form. Unknown node ids become dangling indices
    /// so that `validate` can report them.
    pub fn into_model(self) -> Result<DataModel, ModelIoError> {
        let mut m = DataModel { nodes: Vec::new(), ..DataModel::default() };
        let mut index: BTreeMap<String, usize> = BTreeMap::new();
        for name in self.nodes {
            if index.insert(name.clone(), m.nodes.len()).is_some() {
                return Err(ModelIoError::DuplicateNode(name));
            }
            m.nodes.push(name);
        }
        let base = m.nodes.len();
        let mut dangling: Vec<String> = Vec::new();
        let mut id = |name: &str| -> usize {
            if let Some(&v) = index.get(name) {
                return v;
            }
            let v = base + dangling.len();
            dangling.push(name.to_string());
            index.insert(name.to_string(), v);
            v
        };
        for (rel, es) in self.edges {
            let es = es.iter().map(|(x, y)| (id(x), id(y))).collect();
            m.edges.insert(sym(&rel), es);
        }
        for (cmp, classes) in self.data {
            let classes = classes.iter().map(|c| c.iter().map(|v| id(v)).collect()).collect();
            m.data.insert(sym(&cmp), classes);
        }
        for (prop, vs) in self.valuation {
            let vs = vs.iter().map(|v| id(v)).collect();
            m.valuation.insert(sym(&prop), vs);
        }
        for (k, v) in self.naming {
            let i: u32 = k.parse().map_err(|_| ModelIoError::BadNominal(k.clone()))?;
            m.naming.insert(Nominal(i), id(&v));
        }
        m.dangling = dangling;
        Ok(m)
    }

    pub fn from_model(m: &DataModel) -> ModelJson {
        ModelJson {
            nodes: m.nodes.clone(),
            edges: m
                .edges
                .iter()
                .map(|(a, es)| (a.to_string(), es.iter().map(|&(x, y)| (m.name(x), m.name(y))).collect()))
                .collect(),
            data: m
                .data
                .iter()
                .map(|(c, cs)| (c.to_string(), cs.iter().map(|cl| cl.iter().map(|&v| m.name(v)).collect()).collect()))
                .collect(),
            valuation: m
                .valuation
                .iter()
                .map(|(p, vs)| (p.to_string(), vs.iter().map(|&v| m.name(v)).collect()))
                .collect(),
            naming: m.naming.iter().map(|(i, &v)| (i.to_string(), m.name(v))).collect(),
        }
    }
}

impl DataModel {
    pub fn from_json_str(text: &str) -> Result<DataModel, ModelIoError> {
        serde_json::from_str::<ModelJson>(text)?.into_model()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(ModelJson::from_model(self)).expect("model JSON is always serializable")
    }

    /// Graphviz rendering: relation edges solid and labelled, comparison classes
    /// as dashed undirected cliques, nominals and propositions in node labels.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph model {\n  node [shape=box];\n");
        for (v, name) in self.nodes.iter().enumerate() {
            let mut label = vec![name.clone()];
            let noms: Vec<String> = self.naming.iter().filter(|(_, &w)| w == v).map(|(i, _)| i.to_string()).collect();
            if !noms.is_empty() {
                label.push(format!("noms: {}", noms.join(",")));
            }
            let props: Vec<String> =
                self.valuation.iter().filter(|(_, vs)| vs.contains(&v)).map(|(p, _)| p.to_string()).collect();
            if !props.is_empty() {
                label.push(format!("props: {}", props.join(",")));
            }
            let _ = writeln!(out, "  n{v} [label=\"{}\"];", label.join("\\n"));
        }
        for (rel, es) in &self.edges {
            for &(x, y) in es {
                let _ = writeln!(out, "  n{x} -> n{y} [label=\"{rel}\"];");
            }
        }
        for (cmp, classes) in &self.data {
            for class in classes {
                for (k, &x) in class.iter().enumerate() {
                    for &y in &class[k + 1..] {
                        let _ = writeln!(out, "  n{x} -> n{y} [dir=none, style=dashed, label=\"{cmp}\"];");
                    }
                }
            }
        }
        out.push_str("}\n");
        out
    }
}
