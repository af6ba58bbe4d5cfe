//! Deduction trees with assumption classes and discharge bookkeeping.
//!
//! A deduction is a tree of rule applications over judgments.  Leaves are
//! assumptions; every assumption carries a class label, and a rule
//! application may discharge entire classes, each in a specific *role* of
//! the rule (the antecedent of `→I`, the two cases of `∨E`, the witness
//! classes of `∃E`, and so on).  Empty classes are permitted, so vacuous
//! discharge is first-class.
//!
//! This module knows nothing about which rules are legal where — that is
//! the checker's business (`calculi`).  It provides the data model and the
//! structural operations the rewrite engine is built from: substitution of
//! terms for parameters throughout a deduction, grafting deductions onto
//! assumption classes, canonical relabeling, and subtree addressing.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt;

use crate::calculi::RuleTag;
use crate::syntax::{alpha_eq, alpha_eq_term, fresh_param, Formula, Term};

/// What a node concludes: a formula, or — in the Jaśkowski systems only —
/// a bare term, read as "this term denotes".
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Judgment {
    Formula(Formula),
    Term(Term),
}

impl Judgment {
    pub fn formula(&self) -> Option<&Formula> {
        match self {
            Judgment::Formula(f) => Some(f),
            Judgment::Term(_) => None,
        }
    }

    pub fn term(&self) -> Option<&Term> {
        match self {
            Judgment::Term(t) => Some(t),
            Judgment::Formula(_) => None,
        }
    }

    pub fn subst_param(&self, a: &str, t: &Term) -> Judgment {
        match self {
            Judgment::Formula(f) => Judgment::Formula(f.subst_param(a, t)),
            Judgment::Term(u) => Judgment::Term(u.subst_param(a, t)),
        }
    }

    pub fn params(&self) -> BTreeSet<String> {
        match self {
            Judgment::Formula(f) => f.params(),
            Judgment::Term(t) => t.params(),
        }
    }

    pub fn collect_names(&self, out: &mut BTreeSet<String>) {
        match self {
            Judgment::Formula(f) => f.collect_names(out),
            Judgment::Term(t) => t.collect_names(out),
        }
    }
}

/// α-equivalence lifted to judgments.
pub fn alpha_eq_judgment(a: &Judgment, b: &Judgment) -> bool {
    match (a, b) {
        (Judgment::Formula(f), Judgment::Formula(g)) => alpha_eq(f, g),
        (Judgment::Term(s), Judgment::Term(t)) => alpha_eq_term(s, t),
        _ => false,
    }
}

impl fmt::Display for Judgment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Judgment::Formula(formula) => write!(f, "{formula}"),
            Judgment::Term(term) => write!(f, "term {term}"),
        }
    }
}

/// An assumption-class label.  Labels are scoped to one deduction; the
/// canonical form (see [`Deduction::relabel`]) numbers them `1, 2, …` in
/// discovery order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClassLabel(pub u32);

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The slot a discharged class plays in its rule application.
///
/// Positional matching would be ambiguous — `ιI` discharges three classes
/// across two premises — so discharges name their role explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    /// The antecedent `A` discharged by `→I`.
    Antecedent,
    /// The left disjunct's class at `∨E`.
    CaseLeft,
    /// The right disjunct's class at `∨E`.
    CaseRight,
    /// The instance `A_a^x` discharged by `∃E` (and the analogue at `ιI`'s
    /// third premise).
    WitnessFormula,
    /// The existence assumption `∃!a` discharged by `∃E`, `∀I` or `ιI`.
    WitnessExistence,
    /// The term judgment `a` discharged by the Jaśkowski rules.
    WitnessTerm,
    /// The identity `a = t` discharged by `ιI` at its second premise, or
    /// by the generalised identity introduction.
    Id,
    /// The negation `¬A` discharged by classical falsum elimination.
    Negation,
}

impl Role {
    pub fn name(self) -> &'static str {
        match self {
            Role::Antecedent => "antecedent",
            Role::CaseLeft => "case-left",
            Role::CaseRight => "case-right",
            Role::WitnessFormula => "witness-formula",
            Role::WitnessExistence => "witness-existence",
            Role::WitnessTerm => "witness-term",
            Role::Id => "id",
            Role::Negation => "negation",
        }
    }

    pub fn from_name(name: &str) -> Option<Role> {
        [
            Role::Antecedent,
            Role::CaseLeft,
            Role::CaseRight,
            Role::WitnessFormula,
            Role::WitnessExistence,
            Role::WitnessTerm,
            Role::Id,
            Role::Negation,
        ]
        .into_iter()
        .find(|role| role.name() == name)
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A path from the root to a subtree: the sequence of premise indices.
pub type Position = Vec<usize>;

/// An assumption class as seen from a whole deduction: its label, a
/// representative judgment (absent for vacuous classes, whose judgment is
/// fixed by the discharging rule's schema instead), and how many leaves
/// carry it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssumptionClass {
    pub label: ClassLabel,
    pub judgment: Option<Judgment>,
    pub occurrences: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraftError {
    #[error("plug concludes {found} but the class assumes {expected}")]
    ConclusionMismatch {
        expected: Box<Judgment>,
        found: Box<Judgment>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("no subtree at position {0:?}")]
pub struct BadPosition(pub Position);

/// A deduction tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Deduction {
    /// An assumption leaf: a judgment together with its class label.
    Assume {
        judgment: Judgment,
        label: ClassLabel,
    },
    /// A rule application: the tag, the concluded judgment, the premise
    /// subtrees in schema order, and the discharged classes by role.
    Infer {
        rule: RuleTag,
        conclusion: Judgment,
        premises: Vec<Deduction>,
        discharges: Vec<(Role, ClassLabel)>,
    },
}

impl Deduction {
    pub fn assume(judgment: Judgment, label: ClassLabel) -> Deduction {
        Deduction::Assume { judgment, label }
    }

    pub fn assume_formula(f: Formula, label: ClassLabel) -> Deduction {
        Deduction::Assume {
            judgment: Judgment::Formula(f),
            label,
        }
    }

    pub fn infer(
        rule: RuleTag,
        conclusion: Judgment,
        premises: Vec<Deduction>,
        discharges: Vec<(Role, ClassLabel)>,
    ) -> Deduction {
        Deduction::Infer {
            rule,
            conclusion,
            premises,
            discharges,
        }
    }

    /// The judgment this deduction establishes.
    pub fn conclusion(&self) -> &Judgment {
        match self {
            Deduction::Assume { judgment, .. } => judgment,
            Deduction::Infer { conclusion, .. } => conclusion,
        }
    }

    pub fn rule(&self) -> Option<RuleTag> {
        match self {
            Deduction::Assume { .. } => None,
            Deduction::Infer { rule, .. } => Some(*rule),
        }
    }

    pub fn premises(&self) -> &[Deduction] {
        match self {
            Deduction::Assume { .. } => &[],
            Deduction::Infer { premises, .. } => premises,
        }
    }

    pub fn discharges(&self) -> &[(Role, ClassLabel)] {
        match self {
            Deduction::Assume { .. } => &[],
            Deduction::Infer { discharges, .. } => discharges,
        }
    }

    /// The label a discharge entry of the given role binds at this node.
    pub fn discharge_label(&self, role: Role) -> Option<ClassLabel> {
        self.discharges()
            .iter()
            .find(|(r, _)| *r == role)
            .map(|(_, label)| *label)
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        1 + self.premises().iter().map(Deduction::size).sum::<usize>()
    }

    /// Every node with its position, in preorder (root first, premises
    /// left to right).
    pub fn nodes(&self) -> Vec<(Position, &Deduction)> {
        let mut out = Vec::new();
        self.collect_nodes(&mut Vec::new(), &mut out);
        out
    }

    fn collect_nodes<'a>(
        &'a self,
        position: &mut Position,
        out: &mut Vec<(Position, &'a Deduction)>,
    ) {
        out.push((position.clone(), self));
        for (i, premise) in self.premises().iter().enumerate() {
            position.push(i);
            premise.collect_nodes(position, out);
            position.pop();
        }
    }

    /// The subtree at a premise-index path from the root.
    pub fn locate(&self, position: &[usize]) -> Result<&Deduction, BadPosition> {
        let mut node = self;
        for (depth, &index) in position.iter().enumerate() {
            node = node
                .premises()
                .get(index)
                .ok_or_else(|| BadPosition(position[..=depth].to_vec()))?;
        }
        Ok(node)
    }

    /// Rebuilds the tree with the subtree at `position` replaced.
    pub fn replace_at(
        &self,
        position: &[usize],
        replacement: Deduction,
    ) -> Result<Deduction, BadPosition> {
        match position.split_first() {
            None => Ok(replacement),
            Some((&index, rest)) => match self {
                Deduction::Assume { .. } => Err(BadPosition(position.to_vec())),
                Deduction::Infer {
                    rule,
                    conclusion,
                    premises,
                    discharges,
                } => {
                    if index >= premises.len() {
                        return Err(BadPosition(position.to_vec()));
                    }
                    let mut new_premises = premises.clone();
                    new_premises[index] = premises[index]
                        .replace_at(rest, replacement)
                        .map_err(|_| BadPosition(position.to_vec()))?;
                    Ok(Deduction::Infer {
                        rule: *rule,
                        conclusion: conclusion.clone(),
                        premises: new_premises,
                        discharges: discharges.clone(),
                    })
                }
            },
        }
    }

    /// The open assumptions: one `(label, judgment)` pair per assumption
    /// leaf not discharged by any node below it, in left-to-right leaf
    /// order.
    pub fn open_assumptions(&self) -> Vec<(ClassLabel, &Judgment)> {
        let mut out = Vec::new();
        self.collect_open(&mut Vec::new(), &mut out);
        out
    }

    fn collect_open<'a>(
        &'a self,
        closed: &mut Vec<ClassLabel>,
        out: &mut Vec<(ClassLabel, &'a Judgment)>,
    ) {
        match self {
            Deduction::Assume { judgment, label } => {
                if !closed.contains(label) {
                    out.push((*label, judgment));
                }
            }
            Deduction::Infer {
                premises,
                discharges,
                ..
            } => {
                let depth = closed.len();
                closed.extend(discharges.iter().map(|(_, label)| *label));
                for premise in premises {
                    premise.collect_open(closed, out);
                }
                closed.truncate(depth);
            }
        }
    }

    /// The open classes with a representative judgment each.
    pub fn open_classes(&self) -> BTreeMap<ClassLabel, Judgment> {
        let mut out = BTreeMap::new();
        for (label, judgment) in self.open_assumptions() {
            out.entry(label).or_insert_with(|| judgment.clone());
        }
        out
    }

    /// Every class mentioned anywhere — at a leaf or in a discharge map —
    /// with leaf count and representative judgment where one exists.
    pub fn assumption_classes(&self) -> Vec<AssumptionClass> {
        let mut seen: BTreeMap<ClassLabel, (Option<Judgment>, usize)> = BTreeMap::new();
        for (_, node) in self.nodes() {
            match node {
                Deduction::Assume { judgment, label } => {
                    let entry = seen.entry(*label).or_insert((None, 0));
                    entry.0.get_or_insert_with(|| judgment.clone());
                    entry.1 += 1;
                }
                Deduction::Infer { discharges, .. } => {
                    for (_, label) in discharges {
                        seen.entry(*label).or_insert((None, 0));
                    }
                }
            }
        }
        seen.into_iter()
            .map(|(label, (judgment, occurrences))| AssumptionClass {
                label,
                judgment,
                occurrences,
            })
            .collect()
    }

    /// Every label mentioned at a leaf or in a discharge map.
    pub fn labels(&self) -> BTreeSet<ClassLabel> {
        self.assumption_classes()
            .into_iter()
            .map(|class| class.label)
            .collect()
    }

    /// A label not used anywhere in this deduction.
    pub fn fresh_label(&self) -> ClassLabel {
        ClassLabel(
            self.labels()
                .iter()
                .map(|label| label.0)
                .max()
                .map_or(1, |max| max + 1),
        )
    }

    /// Parameters occurring in any judgment of the tree.
    pub fn params(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for (_, node) in self.nodes() {
            match node.conclusion() {
                Judgment::Formula(f) => f.collect_params(&mut out),
                Judgment::Term(t) => t.collect_params(&mut out),
            }
        }
        out
    }

    /// A parameter absent from the whole deduction (`a, a1, a2, …`, first
    /// unused).
    pub fn fresh_param(&self) -> String {
        fresh_param(&self.params())
    }

    /// Replaces the parameter `a` by `t` in every judgment, leaving rule
    /// tags, tree shape and discharges untouched.  The caller is
    /// responsible for eigenparameter side conditions; the checker will
    /// re-validate.
    pub fn subst_param(&self, a: &str, t: &Term) -> Deduction {
        match self {
            Deduction::Assume { judgment, label } => Deduction::Assume {
                judgment: judgment.subst_param(a, t),
                label: *label,
            },
            Deduction::Infer {
                rule,
                conclusion,
                premises,
                discharges,
            } => Deduction::Infer {
                rule: *rule,
                conclusion: conclusion.subst_param(a, t),
                premises: premises.iter().map(|p| p.subst_param(a, t)).collect(),
                discharges: discharges.clone(),
            },
        }
    }

    /// Replaces every open leaf of the class by a fresh plug from `make`,
    /// verifying that each plug concludes the leaf's judgment (up to α).
    ///
    /// Nodes that re-discharge the label shadow it: their subtrees are
    /// left alone.  (A checked deduction never does this above an open
    /// leaf — a label is discharged at most once per branch.)
    pub fn graft_with<F>(&self, label: ClassLabel, make: &mut F) -> Result<Deduction, GraftError>
    where
        F: FnMut() -> Deduction,
    {
        match self {
            Deduction::Assume {
                judgment,
                label: leaf_label,
            } => {
                if *leaf_label == label {
                    let plug = make();
                    if !alpha_eq_judgment(plug.conclusion(), judgment) {
                        return Err(GraftError::ConclusionMismatch {
                            expected: Box::new(judgment.clone()),
                            found: Box::new(plug.conclusion().clone()),
                        });
                    }
                    Ok(plug)
                } else {
                    Ok(self.clone())
                }
            }
            Deduction::Infer {
                rule,
                conclusion,
                premises,
                discharges,
            } => {
                if discharges.iter().any(|(_, l)| *l == label) {
                    return Ok(self.clone());
                }
                let premises = premises
                    .iter()
                    .map(|p| p.graft_with(label, make))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Deduction::Infer {
                    rule: *rule,
                    conclusion: conclusion.clone(),
                    premises,
                    discharges: discharges.clone(),
                })
            }
        }
    }

    /// Replaces every open leaf of the class by a copy of `plug`.
    pub fn graft(&self, label: ClassLabel, plug: &Deduction) -> Result<Deduction, GraftError> {
        self.graft_with(label, &mut || plug.clone())
    }

    /// Canonically renames assumption classes to `1, 2, …` in preorder
    /// discovery order (a node's discharge entries first, then its
    /// premises left to right).  Idempotent.
    pub fn relabel(&self) -> Deduction {
        let mut map = BTreeMap::new();
        self.discover_labels(&mut map);
        self.apply_relabel(&map)
    }

    fn discover_labels(&self, map: &mut BTreeMap<ClassLabel, ClassLabel>) {
        match self {
            Deduction::Assume { label, .. } => {
                let next = ClassLabel(map.len() as u32 + 1);
                map.entry(*label).or_insert(next);
            }
            Deduction::Infer {
                premises,
                discharges,
                ..
            } => {
                for (_, label) in discharges {
                    let next = ClassLabel(map.len() as u32 + 1);
                    map.entry(*label).or_insert(next);
                }
                for premise in premises {
                    premise.discover_labels(map);
                }
            }
        }
    }

    fn apply_relabel(&self, map: &BTreeMap<ClassLabel, ClassLabel>) -> Deduction {
        match self {
            Deduction::Assume { judgment, label } => Deduction::Assume {
                judgment: judgment.clone(),
                label: map[label],
            },
            Deduction::Infer {
                rule,
                conclusion,
                premises,
                discharges,
            } => Deduction::Infer {
                rule: *rule,
                conclusion: conclusion.clone(),
                premises: premises.iter().map(|p| p.apply_relabel(map)).collect(),
                discharges: discharges
                    .iter()
                    .map(|(role, label)| (*role, map[label]))
                    .collect(),
            },
        }
    }

    /// Renames every class label by adding `offset`; used to keep labels
    /// disjoint when combining deductions.
    pub fn shift_labels(&self, offset: u32) -> Deduction {
        match self {
            Deduction::Assume { judgment, label } => Deduction::Assume {
                judgment: judgment.clone(),
                label: ClassLabel(label.0 + offset),
            },
            Deduction::Infer {
                rule,
                conclusion,
                premises,
                discharges,
            } => Deduction::Infer {
                rule: *rule,
                conclusion: conclusion.clone(),
                premises: premises.iter().map(|p| p.shift_labels(offset)).collect(),
                discharges: discharges
                    .iter()
                    .map(|(role, label)| (*role, ClassLabel(label.0 + offset)))
                    .collect(),
            },
        }
    }
}

/// Structural equivalence up to α-renaming of judgments and a bijective
/// renaming of class labels: same shape, same rules, same roles.
pub fn alpha_isomorphic(a: &Deduction, b: &Deduction) -> bool {
    let mut forward = BTreeMap::new();
    let mut backward = BTreeMap::new();
    alpha_iso(a, b, &mut forward, &mut backward)
}

fn alpha_iso(
    a: &Deduction,
    b: &Deduction,
    forward: &mut BTreeMap<ClassLabel, ClassLabel>,
    backward: &mut BTreeMap<ClassLabel, ClassLabel>,
) -> bool {
    let labels_match = |la: ClassLabel,
                        lb: ClassLabel,
                        forward: &mut BTreeMap<ClassLabel, ClassLabel>,
                        backward: &mut BTreeMap<ClassLabel, ClassLabel>| {
        *forward.entry(la).or_insert(lb) == lb && *backward.entry(lb).or_insert(la) == la
    };
    match (a, b) {
        (
            Deduction::Assume {
                judgment: ja,
                label: la,
            },
            Deduction::Assume {
                judgment: jb,
                label: lb,
            },
        ) => alpha_eq_judgment(ja, jb) && labels_match(*la, *lb, forward, backward),
        (
            Deduction::Infer {
                rule: ra,
                conclusion: ca,
                premises: pa,
                discharges: da,
            },
            Deduction::Infer {
                rule: rb,
                conclusion: cb,
                premises: pb,
                discharges: db,
            },
        ) => {
            ra == rb
                && alpha_eq_judgment(ca, cb)
                && pa.len() == pb.len()
                && da.len() == db.len()
                && da.iter().zip(db).all(|((role_a, la), (role_b, lb))| {
                    role_a == role_b && labels_match(*la, *lb, forward, backward)
                })
                && pa
                    .iter()
                    .zip(pb)
                    .all(|(x, y)| alpha_iso(x, y, forward, backward))
        }
        _ => false,
    }
}
