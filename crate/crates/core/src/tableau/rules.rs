use std::fmt;

use serde::Serialize;

/// Every rule of the calculus, including the admissible copy variants, the
/// reachability rules for forests and trees, and the extension rules.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum RuleId {
    Root,
    NegNeg,
    And,
    NegAnd,
    Dia,
    NegDia,
    Nom,
    NegNom,
    Copy,
    Ref,
    Sym,
    Trans,
    Int1,
    Int2,
    NegCmp,
    DRef,
    Child,
    NegChild,
    Test,
    NegTest,
    Jump,
    NegJump,
    Union,
    NegUnion,
    Com1,
    Com2,
    DTrans,
    Copy0,
    Copy1,
    Copy2,
    PlusIntro,
    PlusTrans,
    PlusCopy,
    Pure(u16),
    NodeRule(u16),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum RuleType {
    /// Extends the branch linearly.
    Type1,
    /// Splits the branch.
    Type2,
    /// Handles diamonds by introducing a fresh nominal.
    Type3,
}

impl RuleId {
    pub fn classify(self) -> RuleType {
        match self {
            RuleId::NegAnd | RuleId::NegTest | RuleId::Union => RuleType::Type2,
            RuleId::Dia | RuleId::Child | RuleId::NodeRule(_) => RuleType::Type3,
            _ => RuleType::Type1,
        }
    }

    pub fn name(self) -> String {
        let s = match self {
            RuleId::Root => "root",
            RuleId::NegNeg => "¬¬",
            RuleId::And => "∧",
            RuleId::NegAnd => "¬∧",
            RuleId::Dia => "◇",
            RuleId::NegDia => "¬◇",
            RuleId::Nom => "nom",
            RuleId::NegNom => "¬nom",
            RuleId::Copy => "copy",
            RuleId::Ref => "ref",
            RuleId::Sym => "sym",
            RuleId::Trans => "trans",
            RuleId::Int1 => "int₁",
            RuleId::Int2 => "int₂",
            RuleId::NegCmp => "¬⋟",
            RuleId::DRef => "dRef",
            RuleId::Child => "child",
            RuleId::NegChild => "¬child",
            RuleId::Test => "test",
            RuleId::NegTest => "¬test",
            RuleId::Jump => "@",
            RuleId::NegJump => "¬@",
            RuleId::Union => "∪",
            RuleId::NegUnion => "¬∪",
            RuleId::Com1 => "com₁",
            RuleId::Com2 => "com₂",
            RuleId::DTrans => "dTrans",
            RuleId::Copy0 => "copy₀",
            RuleId::Copy1 => "copy₁",
            RuleId::Copy2 => "copy₂",
            RuleId::PlusIntro => "+intro",
            RuleId::PlusTrans => "trans+",
            RuleId::PlusCopy => "+copy",
            RuleId::Pure(k) => return format!("pure#{k}"),
            RuleId::NodeRule(k) => return format!("node-rule#{k}"),
        };
        s.to_string()
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

pub fn classify(rule: RuleId) -> RuleType {
    rule.classify()
}
