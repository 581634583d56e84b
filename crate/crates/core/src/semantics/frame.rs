use std::fmt;
use std::str::FromStr;

use super::model::DataModel;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum FrameClass {
    #[default]
    All,
    Forest,
    Tree,
}

impl FromStr for FrameClass {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "all" => Ok(FrameClass::All),
            "forest" => Ok(FrameClass::Forest),
            "tree" => Ok(FrameClass::Tree),
            other => Err(format!("unknown frame class '{other}' (expected all, forest or tree)")),
        }
    }
}

impl fmt::Display for FrameClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FrameClass::All => "all",
            FrameClass::Forest => "forest",
            FrameClass::Tree => "tree",
        })
    }
}

/// Shape of the union of all relations of a model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrameShape {
    pub is_forest: bool,
    /// The node reaching every other node, when the model is a tree.
    pub tree_root: Option<usize>,
}

impl FrameShape {
    pub fn is_tree(&self) -> bool {
        self.tree_root.is_some()
    }

    pub fn admits(&self, frame: FrameClass) -> bool {
        match frame {
            FrameClass::All => true,
            FrameClass::Forest => self.is_forest,
            FrameClass::Tree => self.is_tree(),
        }
    }
}

/// Reachability sets under the transitive closure of the union of all edges.
pub fn reachability(m: &DataModel) -> Vec<Vec<bool>> {
    let n = m.nodes.len();
    let mut adj = vec![Vec::new(); n];
    for &(x, y) in m.edges.values().flatten() {
        if x < n && y < n {
            adj[x].push(y);
        }
    }
    (0..n)
        .map(|s| {
            let mut seen = vec![false; n];
            let mut stack: Vec<usize> = adj[s].clone();
            while let Some(v) = stack.pop() {
                if !std::mem::replace(&mut seen[v], true) {
                    stack.extend(&adj[v]);
                }
            }
            seen
        })
        .collect()
}

pub fn frame_of(m: &DataModel) -> FrameShape {
    let n = m.nodes.len();
    let reach = reachability(m);
    let irreflexive = (0..n).all(|v| !reach[v][v]);
    let mut parents: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(x, y) in m.edges.values().flatten() {
        if x < n && y < n && !parents[y].contains(&x) {
            parents[y].push(x);
        }
    }
    let is_forest = irreflexive && parents.iter().all(|p| p.len() <= 1);
    let tree_root = if is_forest {
        (0..n).find(|&r| (0..n).all(|v| v == r || reach[r][v]))
    } else {
        None
    };
    FrameShape { is_forest, tree_root }
}
