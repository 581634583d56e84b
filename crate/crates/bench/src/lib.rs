//! Fixed inputs shared by the benchmarks.

use hxpath_core::{parse_node, Node};

/// Named formulas, from a one-node model up to nested comparisons.
pub const FORMULAS: &[(&str, &str)] = &[
    ("prop", "p & !q"),
    ("fig2", "<a><@2 b (2)? =c b ((q & 3))?>"),
    ("sec5", "<a ((1 & p))? =c b> & <c @1 (!p)? =c b> & !<b !=c @1>"),
    ("boxes", "<a>p & <a>q & <a>r & [a](!p | !q) & [a]<b>(p & <b>q)"),
    ("chain", "<a><a><a><a>p & [a][a][a][a]!q & <a b =c a a b>"),
    ("unions", "<(a U b) (p)? =c (a U b) (q)?> & !<a (p)? !=c b (q)?>"),
    ("nominals", "1:<a>2 & 2:<b>3 & 3:!<a>1 & <@1 a =c @3> & <@2 !=c @1>"),
];

pub fn formulas() -> Vec<(&'static str, Node)> {
    FORMULAS.iter().map(|(name, text)| (*name, parse_node(text).expect("bench formulas parse"))).collect()
}
