//! Reduction procedures and the normalization driver.
//!
//! The module has three layers.  The *restriction* operations rebuild a
//! deduction so that the identity elimination concludes atomic formulas
//! only and the falsum rules conclude prime formulas only; both are
//! proof-preserving compilations, not reductions.  The *reduction*
//! operations each contract one redex: detour contractions remove an
//! introduction immediately followed by the matching elimination,
//! permutative contractions move an elimination above the rule that
//! stretches its major premise, the purge removes the maximal segments
//! of the identity family (which no rank measure counts), and the
//! classical reductions rewire a classical falsum application whose
//! conclusion feeds a ι elimination or the denotation rule.  The
//! [`normalize`] driver composes them: it restricts, purges, and then
//! repeatedly contracts a maximal segment of highest degree with nothing
//! of equal degree above it, recording a [`TraceStep`] per contraction,
//! until the deduction is normal.
//!
//! Everything here manufactures proof trees, so the module leans on two
//! global disciplines.  Fresh parameters and fresh class labels are
//! drawn from a [`Names`] allocator seeded with every name in the
//! ambient deduction: the purity condition on eigenparameters and the
//! scoping condition on assumption classes are global, so "fresh within
//! the fragment at hand" is not fresh enough.  And every time a subtree
//! is used twice, the copy goes through [`duplicate`], which renames the
//! classes discharged inside it and the eigenparameters of its
//! generalising inferences; sharing either across copies is a checker
//! violation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::analysis::{find_maximal, is_normal, rank, MaximalSegment, Rank, Species};
use crate::calculi::{
    check, eigen_of, elim_major, eq_instance, position_string, rule_schema, RuleTag, SystemConfig,
};
use crate::deduction::{ClassLabel, Deduction, Judgment, Position, Role};
use crate::syntax::{alpha_eq, alpha_eq_term, fresh_param, Formula, Term};

// ---------------------------------------------------------------------------
// Errors, redexes, traces
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RewriteError {
    /// The node at the given position does not match the requested
    /// reduction procedure.
    #[error("not a redex at {}: {reason}", position_string(position))]
    NotARedex { position: Position, reason: String },
    /// The operation is deliberately not defined for this system or
    /// this shape of deduction.
    #[error("{operation} is not available for {system}")]
    UnsupportedSystem {
        system: &'static str,
        operation: &'static str,
    },
    /// Normalization of the unprimed ι systems is out of scope: their
    /// deductions must first be translated into the primed system,
    /// whose quantifier and ι rules instantiate atomic terms only.
    #[error("normalization for {system} requires the primed rules: translate the deduction first")]
    MustTranslateToPrimed { system: &'static str },
    /// The driver exceeded its step budget.  The budget is generous
    /// enough that reaching it indicates a bug in the engine, not a
    /// slow proof.
    #[error("normalization exceeded {limit} steps; this is a bug in the reduction engine")]
    IterationLimitExceeded { limit: u64 },
}

/// The reduction procedures, named as they appear in traces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Procedure {
    DetourAnd,
    DetourOr,
    DetourImp,
    DetourForall,
    DetourExists,
    DetourIota1,
    DetourIota2,
    DetourIota3,
    PermuteOrE,
    PermuteExE,
    PermuteGenI,
    PurgeIdentity,
    PurgeExistence,
    PurgeEqElim,
    PurgeVacuousEq,
    ClassicalIota1,
    ClassicalIota2,
    ClassicalIota3,
    ClassicalAd,
}

impl Procedure {
    pub fn name(self) -> &'static str {
        match self {
            Procedure::DetourAnd => "detour.and",
            Procedure::DetourOr => "detour.or",
            Procedure::DetourImp => "detour.imp",
            Procedure::DetourForall => "detour.forall",
            Procedure::DetourExists => "detour.exists",
            Procedure::DetourIota1 => "detour.iota1",
            Procedure::DetourIota2 => "detour.iota2",
            Procedure::DetourIota3 => "detour.iota3",
            Procedure::PermuteOrE => "perm.orE",
            Procedure::PermuteExE => "perm.exE",
            Procedure::PermuteGenI => "perm.geni",
            Procedure::PurgeIdentity => "purge.eqI-AD",
            Procedure::PurgeExistence => "purge.AD-eqI",
            Procedure::PurgeEqElim => "purge.eqE-seg",
            Procedure::PurgeVacuousEq => "purge.eqE-vacuous",
            Procedure::ClassicalIota1 => "classical.iotaE1",
            Procedure::ClassicalIota2 => "classical.iotaE2",
            Procedure::ClassicalIota3 => "classical.iotaE3",
            Procedure::ClassicalAd => "classical.ad",
        }
    }
}

impl fmt::Display for Procedure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A reducible spot: the position of the consuming node, the procedure
/// that applies there, and the species of the maximal segment it ends.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Redex {
    pub position: Position,
    pub procedure: Procedure,
    pub species: Species,
}

/// One driver step.  Ranks are measured immediately before and after
/// the single procedure application, so consecutive steps chain:
/// each step's `rank_before` is the previous step's `rank_after`.
/// Detour, permutative and classical steps strictly lower the rank;
/// the identity purge's own steps leave it alone, since the rank never
/// counts the identity family.  `node_delta` is the signed change in
/// tree size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub procedure: Procedure,
    pub position: Position,
    pub rank_before: Rank,
    pub rank_after: Rank,
    pub node_delta: i64,
}

impl fmt::Display for TraceStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} at {}: rank {} -> {}, nodes {:+}",
            self.procedure,
            position_string(&self.position),
            self.rank_before,
            self.rank_after,
            self.node_delta
        )
    }
}

// ---------------------------------------------------------------------------
// Fresh names and subtree duplication
// ---------------------------------------------------------------------------

/// Allocator for globally fresh parameters and class labels.
///
/// Purity (an eigenparameter occurs nowhere outside the inference it
/// generalises for) and class scoping are conditions on the whole
/// deduction, so the allocator is seeded with every name and label in
/// the ambient tree and never hands one out twice.
#[derive(Debug, Clone)]
struct Names {
    used: BTreeSet<String>,
    next_label: u32,
}

impl Names {
    fn seeded(d: &Deduction) -> Names {
        let mut names = Names {
            used: BTreeSet::new(),
            next_label: 1,
        };
        names.absorb(d);
        names
    }

    /// Note every name and label of a subtree about to be spliced in.
    fn absorb(&mut self, d: &Deduction) {
        for (_, node) in d.nodes() {
            node.conclusion().collect_names(&mut self.used);
        }
        let ceiling = d.labels().iter().map(|l| l.0).max().unwrap_or(0) + 1;
        self.next_label = self.next_label.max(ceiling);
    }

    fn param(&mut self) -> String {
        let p = fresh_param(&self.used);
        self.used.insert(p.clone());
        p
    }

    fn label(&mut self) -> ClassLabel {
        let label = ClassLabel(self.next_label);
        self.next_label += 1;
        label
    }
}

/// Clone a subtree for use at a second place in the same tree.
///
/// The classes discharged inside the subtree get fresh labels (each
/// discharge owns its leaves; two copies may not pool them), and the
/// eigenparameters of its generalising inferences are renamed (purity
/// forbids the same parameter in two applications).  Classes left open
/// by the subtree keep their labels: their copies still belong to
/// whatever class the ambient tree discharges, or leaves open, below.
fn duplicate(d: &Deduction, names: &mut Names) -> Deduction {
    let renamed = freshen_eigens(d, names);
    freshen_internal_labels(&renamed, names)
}

fn freshen_eigens(d: &Deduction, names: &mut Names) -> Deduction {
    let Deduction::Infer {
        rule,
        conclusion,
        premises,
        discharges,
    } = d
    else {
        return d.clone();
    };
    let premises: Vec<Deduction> = premises.iter().map(|p| freshen_eigens(p, names)).collect();
    let node = Deduction::infer(*rule, conclusion.clone(), premises, discharges.clone());
    // Rename this node's own eigenparameter after the children have been
    // handled: in a checked tree eigenparameters are pairwise distinct,
    // so the children's renames never collide with the outer one.
    let Some(a) = eigen_of(&node) else {
        return node;
    };
    let fresh = Term::Param(names.param());
    let scope = rule_schema(*rule).eigen_scope;
    let Deduction::Infer {
        rule,
        conclusion,
        premises,
        discharges,
    } = node
    else {
        unreachable!("leaves have no eigenparameter");
    };
    let premises = premises
        .into_iter()
        .enumerate()
        .map(|(i, p)| {
            if scope.contains(&i) {
                p.subst_param(&a, &fresh)
            } else {
                p
            }
        })
        .collect();
    Deduction::infer(rule, conclusion, premises, discharges)
}

fn freshen_internal_labels(d: &Deduction, names: &mut Names) -> Deduction {
    let mut map: BTreeMap<ClassLabel, ClassLabel> = BTreeMap::new();
    for (_, node) in d.nodes() {
        for (_, label) in node.discharges() {
            map.entry(*label).or_insert_with(|| names.label());
        }
    }
    if map.is_empty() {
        return d.clone();
    }
    relabel_by(d, &map)
}

fn relabel_by(d: &Deduction, map: &BTreeMap<ClassLabel, ClassLabel>) -> Deduction {
    match d {
        Deduction::Assume { judgment, label } => {
            Deduction::assume(judgment.clone(), *map.get(label).unwrap_or(label))
        }
        Deduction::Infer {
            rule,
            conclusion,
            premises,
            discharges,
        } => Deduction::infer(
            *rule,
            conclusion.clone(),
            premises.iter().map(|p| relabel_by(p, map)).collect(),
            discharges
                .iter()
                .map(|(role, label)| (*role, *map.get(label).unwrap_or(label)))
                .collect(),
        ),
    }
}

fn build(
    rule: RuleTag,
    conclusion: Formula,
    premises: Vec<Deduction>,
    discharges: Vec<(Role, ClassLabel)>,
) -> Deduction {
    Deduction::infer(rule, Judgment::Formula(conclusion), premises, discharges)
}

fn formula_of(d: &Deduction) -> &Formula {
    d.conclusion()
        .formula()
        .expect("this construction handles formula judgments only")
}

/// Number of open leaves of the given class inside a subtree.
fn class_occurrences(d: &Deduction, label: ClassLabel) -> usize {
    d.open_assumptions()
        .iter()
        .filter(|(l, _)| *l == label)
        .count()
}

// ---------------------------------------------------------------------------
// Derived figures: denotation, identity, symmetry
// ---------------------------------------------------------------------------

/// Conclude that `t` denotes — `∃!t`, or the term judgment `t` in the
/// Jaśkowski systems — from an atomic premise mentioning `t`.  An
/// identity whose left side is a ι term yields the existence of its
/// *right* side through the third ι elimination, never through the
/// denotation rule; every other shape goes through the denotation rule.
fn denote(premise: Deduction, t: &Term, sys: &SystemConfig) -> Deduction {
    if sys.jaskowski {
        return Deduction::infer(
            RuleTag::AdJ,
            Judgment::Term(t.clone()),
            vec![premise],
            vec![],
        );
    }
    let tag = match formula_of(&premise) {
        Formula::Eq(l, r) if !l.is_atomic() && alpha_eq_term(r, t) => RuleTag::IotaE3,
        _ => RuleTag::Ad,
    };
    build(tag, Formula::ExistsBang(t.clone()), vec![premise], vec![])
}

/// Whether [`denote`] can conclude that `t` denotes from this premise:
/// the premise must be a predication or identity with `t` among its
/// immediate arguments, or already the desired existence statement
/// (in which case `denote` is not needed at all).
fn denotable(f: &Formula, t: &Term) -> bool {
    match f {
        Formula::Pred(_, args) if !args.is_empty() => args.iter().any(|u| alpha_eq_term(u, t)),
        Formula::Eq(l, r) => alpha_eq_term(l, t) || alpha_eq_term(r, t),
        _ => false,
    }
}

/// Conclude `t = t` from a proof that `t` denotes.  In the unprimed and
/// Jaśkowski systems this is one application of the identity
/// introduction; in the primed systems, where the introduction
/// generalises an assumed identity, it is the two-leaf figure that
/// eliminates the assumed `a = t` into itself.
fn identity_from_existence(premise: Deduction, sys: &SystemConfig, names: &mut Names) -> Deduction {
    if sys.jaskowski {
        let t = premise
            .conclusion()
            .term()
            .expect("the Jaśkowski identity introduction consumes a term judgment")
            .clone();
        return build(
            RuleTag::EqInJ,
            Formula::Eq(t.clone(), t),
            vec![premise],
            vec![],
        );
    }
    let Formula::ExistsBang(t) = formula_of(&premise).clone() else {
        panic!("identity introduction consumes an existence premise");
    };
    let conclusion = Formula::Eq(t.clone(), t.clone());
    if !sys.primed {
        return build(RuleTag::EqIn, conclusion, vec![premise], vec![]);
    }
    let a = Term::Param(names.param());
    let class = names.label();
    let assumed = Formula::Eq(a.clone(), t.clone());
    let inner = build(
        RuleTag::EqE,
        conclusion.clone(),
        vec![
            Deduction::assume_formula(assumed.clone(), class),
            Deduction::assume_formula(assumed, class),
        ],
        vec![],
    );
    build(
        RuleTag::EqInG,
        conclusion,
        vec![premise, inner],
        vec![(Role::Id, class)],
    )
}

/// Reverse an identity: from a subtree concluding `t1 = t2`, conclude
/// `t2 = t1`.  The premise is used twice (once to rewrite, once to
/// establish that `t1` denotes), so one copy is duplicated.
fn symmetry(premise: Deduction, sys: &SystemConfig, names: &mut Names) -> Deduction {
    let Formula::Eq(t1, t2) = formula_of(&premise).clone() else {
        panic!("symmetry needs an identity premise");
    };
    let conclusion = Formula::Eq(t2.clone(), t1.clone());
    let exists = denote(duplicate(&premise, names), &t1, sys);
    if !sys.primed {
        // Rewrite the first `t1` of `t1 = t1` into `t2` using the premise.
        let reflexive = identity_from_existence(exists, sys, names);
        return build(RuleTag::EqE, conclusion, vec![premise, reflexive], vec![]);
    }
    // Primed systems: generalise the assumed identity `a = t1` instead.
    // The assumption rewrites the premise to `a = t2` and is then itself
    // rewritten by it, which yields `t2 = t1` from two atomic steps.
    let a = Term::Param(names.param());
    let class = names.label();
    let assumed = Formula::Eq(a.clone(), t1.clone());
    let first = build(
        RuleTag::EqE,
        Formula::Eq(a.clone(), t2.clone()),
        vec![premise, Deduction::assume_formula(assumed.clone(), class)],
        vec![],
    );
    let second = build(
        RuleTag::EqE,
        conclusion.clone(),
        vec![first, Deduction::assume_formula(assumed, class)],
        vec![],
    );
    build(
        RuleTag::EqInG,
        conclusion,
        vec![exists, second],
        vec![(Role::Id, class)],
    )
}

// ---------------------------------------------------------------------------
// Compositional identity elimination
// ---------------------------------------------------------------------------

/// Derive `target` — the minor premise's formula with some occurrences
/// of `t1` replaced by `t2` — using the identity elimination on atomic
/// formulas only.  `forward` is a template subtree concluding
/// `t1 = t2`; it is duplicated at every use, and reversed through
/// [`symmetry`] at contravariant positions.  The replacement recurses
/// through the structure that `target` and the minor's formula share,
/// eliminating at the atoms where they differ.
fn atomic_eq_elim(
    forward: &Deduction,
    t1: &Term,
    t2: &Term,
    minor: Deduction,
    target: &Formula,
    sys: &SystemConfig,
    names: &mut Names,
) -> Deduction {
    let current = formula_of(&minor).clone();
    if alpha_eq(&current, target) {
        return minor;
    }
    if target.is_atomic() {
        return build(
            RuleTag::EqE,
            target.clone(),
            vec![duplicate(forward, names), minor],
            vec![],
        );
    }
    match (&current, target) {
        (Formula::And(a1, b1), Formula::And(a2, b2)) => {
            let left_src = build(RuleTag::AndEl, (**a1).clone(), vec![minor.clone()], vec![]);
            let right_src = build(
                RuleTag::AndEr,
                (**b1).clone(),
                vec![duplicate(&minor, names)],
                vec![],
            );
            let left = atomic_eq_elim(forward, t1, t2, left_src, a2, sys, names);
            let right = atomic_eq_elim(forward, t1, t2, right_src, b2, sys, names);
            build(RuleTag::AndI, target.clone(), vec![left, right], vec![])
        }
        (Formula::Imp(a1, b1), Formula::Imp(a2, b2)) => {
            // The antecedent runs in the opposite direction: assume the
            // target's antecedent and rewrite it back before applying
            // the minor.
            let class = names.label();
            let backward = symmetry(duplicate(forward, names), sys, names);
            let antecedent = atomic_eq_elim(
                &backward,
                t2,
                t1,
                Deduction::assume_formula((**a2).clone(), class),
                a1,
                sys,
                names,
            );
            let applied = build(
                RuleTag::ImpE,
                (**b1).clone(),
                vec![minor, antecedent],
                vec![],
            );
            let body = atomic_eq_elim(forward, t1, t2, applied, b2, sys, names);
            build(
                RuleTag::ImpI,
                target.clone(),
                vec![body],
                vec![(Role::Antecedent, class)],
            )
        }
        (Formula::Or(a1, b1), Formula::Or(a2, b2)) => {
            let left_class = names.label();
            let right_class = names.label();
            let left = atomic_eq_elim(
                forward,
                t1,
                t2,
                Deduction::assume_formula((**a1).clone(), left_class),
                a2,
                sys,
                names,
            );
            let right = atomic_eq_elim(
                forward,
                t1,
                t2,
                Deduction::assume_formula((**b1).clone(), right_class),
                b2,
                sys,
                names,
            );
            build(
                RuleTag::OrE,
                target.clone(),
                vec![
                    minor,
                    build(RuleTag::OrIl, target.clone(), vec![left], vec![]),
                    build(RuleTag::OrIr, target.clone(), vec![right], vec![]),
                ],
                vec![(Role::CaseLeft, left_class), (Role::CaseRight, right_class)],
            )
        }
        (Formula::Forall(x1, b1), Formula::Forall(x2, b2)) => {
            let p = Term::Param(names.param());
            let class = names.label();
            let inst1 = b1.subst_var(x1, &p);
            let inst2 = b2.subst_var(x2, &p);
            let (tag_e, tag_i, role, witness) = if sys.jaskowski {
                (
                    RuleTag::AllEJ,
                    RuleTag::AllIJ,
                    Role::WitnessTerm,
                    Deduction::assume(Judgment::Term(p.clone()), class),
                )
            } else {
                (
                    RuleTag::AllE,
                    RuleTag::AllI,
                    Role::WitnessExistence,
                    Deduction::assume_formula(Formula::ExistsBang(p.clone()), class),
                )
            };
            let instance = build(tag_e, inst1, vec![minor, witness], vec![]);
            let body = atomic_eq_elim(forward, t1, t2, instance, &inst2, sys, names);
            build(tag_i, target.clone(), vec![body], vec![(role, class)])
        }
        (Formula::Exists(x1, b1), Formula::Exists(x2, b2)) => {
            let p = Term::Param(names.param());
            let formula_class = names.label();
            let witness_class = names.label();
            let inst1 = b1.subst_var(x1, &p);
            let inst2 = b2.subst_var(x2, &p);
            let body = atomic_eq_elim(
                forward,
                t1,
                t2,
                Deduction::assume_formula(inst1, formula_class),
                &inst2,
                sys,
                names,
            );
            let (tag_e, tag_i, role, witness) = if sys.jaskowski {
                (
                    RuleTag::ExEJ,
                    RuleTag::ExIJ,
                    Role::WitnessTerm,
                    Deduction::assume(Judgment::Term(p.clone()), witness_class),
                )
            } else {
                (
                    RuleTag::ExE,
                    RuleTag::ExI,
                    Role::WitnessExistence,
                    Deduction::assume_formula(Formula::ExistsBang(p.clone()), witness_class),
                )
            };
            let introduced = build(tag_i, target.clone(), vec![body, witness], vec![]);
            build(
                tag_e,
                target.clone(),
                vec![minor, introduced],
                vec![(Role::WitnessFormula, formula_class), (role, witness_class)],
            )
        }
        _ => unreachable!("replacement target must be congruent to the minor premise"),
    }
}

/// Rebuild a deduction so every identity elimination concludes an
/// atomic formula.
///
/// Every `=E` with a complex conclusion is replaced by the compositional
/// figure of [`atomic_eq_elim`]; conclusion and open assumption classes
/// are preserved, and on a deduction that is valid apart from complex
/// `=E` conclusions the result checks.  Labels come out canonically
/// renumbered.
pub fn restrict_eq_elim(d: &Deduction, sys: &SystemConfig) -> Deduction {
    let mut names = Names::seeded(d);
    restrict_eq_walk(d, sys, &mut names).relabel()
}

fn restrict_eq_walk(d: &Deduction, sys: &SystemConfig, names: &mut Names) -> Deduction {
    let Deduction::Infer {
        rule,
        conclusion,
        premises,
        discharges,
    } = d
    else {
        return d.clone();
    };
    let premises: Vec<Deduction> = premises
        .iter()
        .map(|p| restrict_eq_walk(p, sys, names))
        .collect();
    if *rule == RuleTag::EqE {
        let target = conclusion.formula();
        let complex = target.is_some_and(|f| !f.is_atomic());
        if complex {
            let target = target.expect("checked above").clone();
            if let [major, minor] = &premises[..] {
                if let Formula::Eq(t1, t2) = formula_of(major).clone() {
                    if eq_instance(formula_of(minor), &target, &t1, &t2) {
                        let major = major.clone();
                        let minor = minor.clone();
                        return atomic_eq_elim(&major, &t1, &t2, minor, &target, sys, names);
                    }
                }
            }
        }
    }
    Deduction::infer(*rule, conclusion.clone(), premises, discharges.clone())
}

// ---------------------------------------------------------------------------
// Falsum restriction
// ---------------------------------------------------------------------------

/// Derive `target` from a subtree concluding `⊥`, applying the falsum
/// rule to prime formulas only.  Complex targets are split along their
/// main connective; atomic targets containing ι terms are assembled
/// from prime instances — an identity `ιx.F = t` with atomic `t` through
/// the ι introduction over three falsum premises, an identity with the ι
/// term on the right through [`symmetry`], and a predication or
/// existence statement on ι terms by eliminating the fresh-parameter
/// identities into a prime base.  The falsum subtree is duplicated at
/// every use.
fn derive_falsum(
    falsum: &Deduction,
    target: &Formula,
    sys: &SystemConfig,
    names: &mut Names,
) -> Deduction {
    match target {
        Formula::Bot => duplicate(falsum, names),
        f if f.is_prime() => build(
            RuleTag::BotE,
            f.clone(),
            vec![duplicate(falsum, names)],
            vec![],
        ),
        Formula::And(l, r) => {
            let left = derive_falsum(falsum, l, sys, names);
            let right = derive_falsum(falsum, r, sys, names);
            build(RuleTag::AndI, target.clone(), vec![left, right], vec![])
        }
        Formula::Or(l, _) => {
            let left = derive_falsum(falsum, l, sys, names);
            build(RuleTag::OrIl, target.clone(), vec![left], vec![])
        }
        Formula::Imp(_, r) => {
            let body = derive_falsum(falsum, r, sys, names);
            build(
                RuleTag::ImpI,
                target.clone(),
                vec![body],
                vec![(Role::Antecedent, names.label())],
            )
        }
        Formula::Forall(x, body) => {
            let p = Term::Param(names.param());
            let instance = derive_falsum(falsum, &body.subst_var(x, &p), sys, names);
            if sys.jaskowski {
                build(
                    RuleTag::AllIJ,
                    target.clone(),
                    vec![instance],
                    vec![(Role::WitnessTerm, names.label())],
                )
            } else {
                build(
                    RuleTag::AllI,
                    target.clone(),
                    vec![instance],
                    vec![(Role::WitnessExistence, names.label())],
                )
            }
        }
        Formula::Exists(x, body) => {
            let p = Term::Param(names.param());
            let instance = derive_falsum(falsum, &body.subst_var(x, &p), sys, names);
            if sys.jaskowski {
                // No falsum rule concludes a term judgment, but a prime
                // self-identity on the fresh parameter denotes it.
                let reflexive = build(
                    RuleTag::BotE,
                    Formula::Eq(p.clone(), p.clone()),
                    vec![duplicate(falsum, names)],
                    vec![],
                );
                let witness = denote(reflexive, &p, sys);
                build(RuleTag::ExIJ, target.clone(), vec![instance, witness], vec![])
            } else {
                let witness = derive_falsum(falsum, &Formula::ExistsBang(p.clone()), sys, names);
                build(RuleTag::ExI, target.clone(), vec![instance, witness], vec![])
            }
        }
        Formula::Eq(Term::Iota(x, body), r) if r.is_atomic() => {
            let a = Term::Param(names.param());
            let exists = derive_falsum(falsum, &Formula::ExistsBang(r.clone()), sys, names);
            let instance = derive_falsum(falsum, &body.subst_var(x, &a), sys, names);
            let identity = derive_falsum(falsum, &Formula::Eq(a.clone(), r.clone()), sys, names);
            build(
                RuleTag::IotaI,
                target.clone(),
                vec![exists, instance, identity],
                vec![
                    (Role::Id, names.label()),
                    (Role::WitnessFormula, names.label()),
                    (Role::WitnessExistence, names.label()),
                ],
            )
        }
        Formula::Eq(l, r) if l.is_atomic() && !r.is_atomic() => {
            let reversed = derive_falsum(falsum, &Formula::Eq(r.clone(), l.clone()), sys, names);
            symmetry(reversed, sys, names)
        }
        // A predication, existence statement or identity over ι terms:
        // conclude the prime instance on fresh parameters and eliminate
        // each parameter's identity with its ι term, left to right.
        // Each intermediate conclusion is atomic, which is all `=E`
        // asks.
        Formula::Pred(..) | Formula::ExistsBang(_) | Formula::Eq(..) => {
            let (args, rebuild): (Vec<Term>, Box<dyn Fn(Vec<Term>) -> Formula>) = match target {
                Formula::Pred(p, args) => {
                    let p = p.clone();
                    (args.clone(), Box::new(move |ts| Formula::Pred(p.clone(), ts)))
                }
                Formula::ExistsBang(t) => (
                    vec![t.clone()],
                    Box::new(|mut ts| Formula::ExistsBang(ts.remove(0))),
                ),
                Formula::Eq(l, r) => (
                    vec![l.clone(), r.clone()],
                    Box::new(|mut ts| {
                        let l = ts.remove(0);
                        Formula::Eq(l, ts.remove(0))
                    }),
                ),
                _ => unreachable!("outer match narrows to atomic shapes"),
            };
            let described: Vec<usize> = (0..args.len()).filter(|&i| !args[i].is_atomic()).collect();
            let mut current: Vec<Term> = args
                .iter()
                .enumerate()
                .map(|(i, t)| {
                    if described.contains(&i) {
                        Term::Param(names.param())
                    } else {
                        t.clone()
                    }
                })
                .collect();
            let mut acc = derive_falsum(falsum, &rebuild(current.clone()), sys, names);
            for i in described {
                let identity =
                    Formula::Eq(current[i].clone(), args[i].clone());
                let major = derive_falsum(falsum, &identity, sys, names);
                current[i] = args[i].clone();
                acc = build(RuleTag::EqE, rebuild(current.clone()), vec![major, acc], vec![]);
            }
            acc
        }
    }
}

/// Rebuild a deduction so every falsum elimination concludes a prime
/// formula.
///
/// An intuitionist falsum application with a complex or ι-containing
/// conclusion is replaced by the construction of [`derive_falsum`], and
/// one concluding `⊥` itself is dropped.  A *vacuous* classical falsum
/// application is treated the same way.  A classical application that
/// actually discharges a negation cannot be restricted by these means;
/// if its conclusion is complex the operation reports the deduction as
/// unsupported, and if it is atomic (possibly with ι terms) it stays.
pub fn restrict_bot_elim(d: &Deduction, sys: &SystemConfig) -> Result<Deduction, RewriteError> {
    let mut names = Names::seeded(d);
    let out = restrict_bot_walk(d, sys, &mut names)?;
    Ok(out.relabel())
}

fn restrict_bot_walk(
    d: &Deduction,
    sys: &SystemConfig,
    names: &mut Names,
) -> Result<Deduction, RewriteError> {
    let Deduction::Infer {
        rule,
        conclusion,
        premises,
        discharges,
    } = d
    else {
        return Ok(d.clone());
    };
    let premises: Vec<Deduction> = premises
        .iter()
        .map(|p| restrict_bot_walk(p, sys, names))
        .collect::<Result<_, _>>()?;
    let target = conclusion.formula();
    match rule {
        RuleTag::BotE => {
            let target = target.expect("falsum eliminations conclude formulas");
            if matches!(target, Formula::Bot) {
                let mut premises = premises;
                return Ok(premises.remove(0));
            }
            if !target.is_prime() {
                return Ok(derive_falsum(&premises[0], target, sys, names));
            }
        }
        RuleTag::BotEC => {
            let target = target.expect("falsum eliminations conclude formulas");
            let vacuous = d
                .discharge_label(Role::Negation)
                .is_none_or(|label| class_occurrences(&premises[0], label) == 0);
            if vacuous {
                if matches!(target, Formula::Bot) {
                    let mut premises = premises;
                    return Ok(premises.remove(0));
                }
                if !target.is_prime() {
                    return Ok(derive_falsum(&premises[0], target, sys, names));
                }
            } else if !target.is_atomic() {
                return Err(RewriteError::UnsupportedSystem {
                    system: sys.name(),
                    operation: "restricting a non-vacuous classical falsum with a complex conclusion",
                });
            }
        }
        _ => {}
    }
    Ok(Deduction::infer(
        *rule,
        conclusion.clone(),
        premises,
        discharges.clone(),
    ))
}

// ---------------------------------------------------------------------------
// Identity-family purge
// ---------------------------------------------------------------------------

fn parent_of(pos: &[usize]) -> Option<(Position, usize)> {
    let (&slot, head) = pos.split_last()?;
    Some((head.to_vec(), slot))
}

fn within(pos: &[usize], root: &[usize]) -> bool {
    pos.len() >= root.len() && pos[..root.len()] == *root
}

/// The position of the node discharging each class.
fn discharger_positions(d: &Deduction) -> BTreeMap<ClassLabel, Position> {
    let mut out = BTreeMap::new();
    for (pos, node) in d.nodes() {
        for (_, label) in node.discharges() {
            out.entry(*label).or_insert(pos.clone());
        }
    }
    out
}

/// Whether replacing the subtree at `removed` with (a copy of) the
/// subtree found at `source_pos` would orphan an assumption class: a
/// class open in the source but discharged by a node that the
/// replacement deletes.
fn replacement_leaks(
    d: &Deduction,
    removed: &[usize],
    source_pos: &[usize],
    source: &Deduction,
) -> bool {
    let dischargers = discharger_positions(d);
    source.open_assumptions().iter().any(|(label, _)| {
        dischargers
            .get(label)
            .is_some_and(|pos| within(pos, removed) && !within(pos, source_pos))
    })
}

/// Re-route a segment around its consumer.  The node at
/// `positions[pivot]` is replaced by `replacement` (which concludes
/// `goal`), every segment node below the pivot is re-concluded with
/// `goal` — parallel case branches repaired by `repair` — and the
/// consumer at the end of the segment is dropped in favour of the
/// result.  `None` when the positions do not form the parent chain a
/// segment promises.
fn reroute(
    d: &Deduction,
    positions: &[Position],
    pivot: usize,
    replacement: Deduction,
    goal: &Judgment,
    repair: &mut dyn FnMut(Deduction) -> Deduction,
) -> Option<Deduction> {
    let mut acc = replacement;
    for i in pivot + 1..positions.len() {
        let (parent, slot) = parent_of(&positions[i - 1])?;
        if parent != positions[i] {
            return None;
        }
        let node = d.locate(&positions[i]).ok()?;
        let Deduction::Infer {
            rule,
            premises,
            discharges,
            ..
        } = node
        else {
            return None;
        };
        let mut premises = premises.clone();
        match rule {
            RuleTag::OrE if slot == 1 || slot == 2 => {
                let other = 3 - slot;
                premises[other] = repair(premises[other].clone());
                premises[slot] = acc;
            }
            RuleTag::ExE | RuleTag::ExEJ | RuleTag::EqInG if slot == 1 => {
                premises[slot] = acc;
            }
            _ => return None,
        }
        acc = Deduction::infer(*rule, goal.clone(), premises, discharges.clone());
    }
    let (consumer, _) = parent_of(positions.last()?)?;
    debug_assert!(
        d.locate(&consumer)
            .is_ok_and(|c| crate::deduction::alpha_eq_judgment(c.conclusion(), goal)),
        "the re-routed segment must conclude what its consumer concluded"
    );
    d.replace_at(&consumer, acc).ok()
}

/// Repair a parallel case branch during an identity purge: the branch
/// concluded the segment's identity and must now conclude that `t`
/// denotes.  When the branch's own head introduced the identity from an
/// existence premise, that premise is reused; otherwise the identity is
/// handed to the denotation rule.
fn to_existence(branch: Deduction, t: &Term, sys: &SystemConfig) -> Deduction {
    match branch.rule() {
        Some(RuleTag::EqIn) if !sys.primed => branch.premises()[0].clone(),
        Some(RuleTag::EqInG) => {
            let major = &branch.premises()[0];
            if alpha_eq(formula_of(major), &Formula::ExistsBang(t.clone())) {
                major.clone()
            } else {
                denote(branch, t, sys)
            }
        }
        _ => denote(branch, t, sys),
    }
}

/// Repair a parallel case branch during an existence purge: the branch
/// concluded the existence statement and must now conclude the
/// self-identity.  When the branch's own head was the denotation rule
/// applied to that very self-identity, its premise is reused; otherwise
/// the identity introduction is applied.
fn to_identity(branch: Deduction, sys: &SystemConfig, names: &mut Names) -> Deduction {
    if matches!(branch.rule(), Some(RuleTag::Ad | RuleTag::IotaE3)) {
        if let Formula::ExistsBang(t) = formula_of(&branch).clone() {
            let premise = &branch.premises()[0];
            if let Formula::Eq(l, r) = formula_of(premise) {
                if alpha_eq_term(l, r) && alpha_eq_term(l, &t) {
                    return premise.clone();
                }
            }
        }
    }
    identity_from_existence(branch, sys, names)
}

fn existence_term(goal: &Judgment) -> Option<Term> {
    match goal {
        Judgment::Formula(Formula::ExistsBang(t)) => Some(t.clone()),
        Judgment::Term(t) => Some(t.clone()),
        _ => None,
    }
}

/// One identity-species removal.
fn purge_identity(
    d: &Deduction,
    sys: &SystemConfig,
    positions: &[Position],
    consumer_pos: &Position,
) -> Option<Deduction> {
    let mut names = Names::seeded(d);
    let goal = d.locate(consumer_pos).ok()?.conclusion().clone();
    let head = d.locate(&positions[0]).ok()?;
    if sys.jaskowski {
        // The head introduced `t = t` from a term judgment, and the
        // consumer turns the identity back into that term judgment.
        // Term judgments cannot stretch, so when the segment is longer
        // than one formula the head's premise is copied to the
        // consumer's place instead of re-routed.
        if head.rule() != Some(RuleTag::EqInJ) {
            return None;
        }
        let source = head.premises().first()?;
        if positions.len() == 1 {
            return d.replace_at(consumer_pos, source.clone()).ok();
        }
        let mut source_pos = positions[0].clone();
        source_pos.push(0);
        if replacement_leaks(d, consumer_pos, &source_pos, source) {
            return None;
        }
        let copy = duplicate(source, &mut names);
        return d.replace_at(consumer_pos, copy).ok();
    }
    let t = existence_term(&goal)?;
    if !sys.primed {
        if head.rule() != Some(RuleTag::EqIn) {
            return None;
        }
        let replacement = head.premises().first()?.clone();
        return reroute(d, positions, 0, replacement, &goal, &mut |branch| {
            to_existence(branch, &t, sys)
        });
    }
    // Primed: prefer the lowest generalised identity introduction on
    // the segment whose major premise already concludes the goal; its
    // minor — the whole segment above — is dropped.
    for j in (1..positions.len()).rev() {
        let node = d.locate(&positions[j]).ok()?;
        if node.rule() == Some(RuleTag::EqInG) {
            let major = node.premises().first()?;
            if alpha_eq(formula_of(major), &Formula::ExistsBang(t.clone())) {
                let replacement = major.clone();
                return reroute(d, positions, j, replacement, &goal, &mut |branch| {
                    to_existence(branch, &t, sys)
                });
            }
        }
    }
    // Otherwise the segment starts at a class assumption `a = t` of a
    // generalised identity introduction: a copy of that introduction's
    // major premise replaces the assumption.
    if let Deduction::Assume { label, .. } = head {
        let g_pos = discharger_positions(d).get(label)?.clone();
        let g = d.locate(&g_pos).ok()?;
        if g.rule() == Some(RuleTag::EqInG) {
            let major = g.premises().first()?;
            if alpha_eq(formula_of(major), &Formula::ExistsBang(t.clone())) {
                let replacement = duplicate(major, &mut names);
                return reroute(d, positions, 0, replacement, &goal, &mut |branch| {
                    to_existence(branch, &t, sys)
                });
            }
        }
    }
    None
}

/// One existence-species removal.
fn purge_existence(
    d: &Deduction,
    sys: &SystemConfig,
    positions: &[Position],
    consumer_pos: &Position,
) -> Option<Deduction> {
    let mut names = Names::seeded(d);
    let head = d.locate(&positions[0]).ok()?;
    if !matches!(
        head.rule(),
        Some(RuleTag::Ad | RuleTag::IotaE3 | RuleTag::AdJ)
    ) {
        return None;
    }
    let replacement = head.premises().first()?.clone();
    if sys.jaskowski {
        // Term judgments cannot stretch: the head feeds the consumer
        // directly, and the head's premise is the consumer's conclusion.
        return d.replace_at(consumer_pos, replacement).ok();
    }
    let goal = d.locate(consumer_pos).ok()?.conclusion().clone();
    reroute(d, positions, 0, replacement, &goal, &mut |branch| {
        to_identity(branch, sys, &mut names)
    })
}

/// One chain removal: a chain through `=E` minor premises that ends in
/// the denotation rule, or consists of existence statements.
fn purge_chain(
    d: &Deduction,
    sys: &SystemConfig,
    positions: &[Position],
) -> Option<Deduction> {
    // The links: chain members that are `=E` nodes consuming the
    // previous member as their minor premise.
    let links: Vec<usize> = (1..positions.len())
        .filter(|&i| {
            parent_of(&positions[i - 1])
                .is_some_and(|(p, slot)| p == positions[i] && slot == 1)
                && d.locate(&positions[i])
                    .is_ok_and(|n| n.rule() == Some(RuleTag::EqE))
        })
        .collect();
    let last = positions.last()?;
    let denotation = parent_of(last).and_then(|(p, slot)| {
        let node = d.locate(&p).ok()?;
        let is_denotation = slot == 0
            && matches!(
                node.rule(),
                Some(RuleTag::Ad | RuleTag::IotaE3 | RuleTag::AdJ)
            );
        is_denotation.then_some(p)
    });
    if let Some(consumer_pos) = denotation {
        let consumer = d.locate(&consumer_pos).ok()?;
        let t = existence_term(consumer.conclusion())?;
        // Candidate replacements, lowest first: the major premise of a
        // link whose identity has the denoted term as a side, then the
        // chain's first formula.
        let mut candidates: Vec<Position> = links
            .iter()
            .rev()
            .filter_map(|&i| {
                let link = d.locate(&positions[i]).ok()?;
                let Formula::Eq(l, r) = formula_of(&link.premises()[0]) else {
                    return None;
                };
                (alpha_eq_term(l, &t) || alpha_eq_term(r, &t)).then(|| {
                    let mut p = positions[i].clone();
                    p.push(0);
                    p
                })
            })
            .collect();
        candidates.push(positions[0].clone());
        for source_pos in candidates {
            let Ok(source) = d.locate(&source_pos) else {
                continue;
            };
            let replacement = match source.conclusion().formula() {
                Some(f) if alpha_eq(f, &Formula::ExistsBang(t.clone())) => source.clone(),
                Some(f) if denotable(f, &t) => denote(source.clone(), &t, sys),
                _ => continue,
            };
            if replacement_leaks(d, &consumer_pos, &source_pos, source) {
                continue;
            }
            return d.replace_at(&consumer_pos, replacement).ok();
        }
        return None;
    }
    // Every formula on the chain is an existence statement: conclude
    // the last link's conclusion from its own major premise and drop
    // the chain above it.
    let &i = links.last()?;
    let link = d.locate(&positions[i]).ok()?;
    let Formula::ExistsBang(tn) = formula_of(link).clone() else {
        return None;
    };
    let Formula::Eq(l, r) = formula_of(&link.premises()[0]) else {
        return None;
    };
    if !(alpha_eq_term(l, &tn) || alpha_eq_term(r, &tn)) {
        return None;
    }
    let replacement = denote(link.premises()[0].clone(), &tn, sys);
    d.replace_at(&positions[i], replacement).ok()
}

/// The deepest `=E` whose major premise is a self-identity; such an
/// application rewrites nothing.
fn deepest_vacuous_eq(d: &Deduction) -> Option<Position> {
    d.nodes()
        .into_iter()
        .filter(|(_, n)| {
            n.rule() == Some(RuleTag::EqE)
                && n.premises()
                    .first()
                    .and_then(|p| p.conclusion().formula())
                    .is_some_and(|f| matches!(f, Formula::Eq(l, r) if alpha_eq_term(l, r)))
        })
        .map(|(p, _)| p)
        .max_by(|a, b| (a.len(), a).cmp(&(b.len(), b)))
}

/// One purge micro-step, or `None` at the fixpoint.  Vacuous `=E`
/// applications go first; then the deepest identity-family maximal
/// whose subtree contains no other is removed (working top-down keeps a
/// lower removal from duplicating an upper segment's material).
fn purge_step(d: &Deduction, sys: &SystemConfig) -> Option<(Deduction, Procedure, Position)> {
    if let Some(pos) = deepest_vacuous_eq(d) {
        let minor = d.locate(&pos).ok()?.premises().get(1)?.clone();
        let next = d.replace_at(&pos, minor).ok()?;
        return Some((next, Procedure::PurgeVacuousEq, pos));
    }
    let mut family: Vec<MaximalSegment> = find_maximal(d, sys)
        .into_iter()
        .filter(|m| {
            matches!(
                m.species,
                Species::Identity | Species::Existence | Species::EqElim
            )
        })
        .collect();
    family.sort_by(|a, b| {
        let key = |m: &MaximalSegment| {
            let head = &m.segment.positions[0];
            (head.len(), head.clone())
        };
        key(b).cmp(&key(a))
    });
    for m in &family {
        let positions = &m.segment.positions;
        let attempt = match m.species {
            Species::Identity => parent_of(positions.last()?)
                .and_then(|(consumer, _)| purge_identity(d, sys, positions, &consumer)),
            Species::Existence => parent_of(positions.last()?)
                .and_then(|(consumer, _)| purge_existence(d, sys, positions, &consumer)),
            Species::EqElim => purge_chain(d, sys, positions),
            _ => None,
        };
        if let Some(next) = attempt {
            let procedure = match m.species {
                Species::Identity => Procedure::PurgeIdentity,
                Species::Existence => Procedure::PurgeExistence,
                _ => Procedure::PurgeEqElim,
            };
            return Some((next, procedure, positions[0].clone()));
        }
    }
    None
}

/// Remove every maximal segment of the identity family: self-identities
/// introduced only to be consumed by the denotation rule, existence
/// statements introduced only to feed the identity introduction, chains
/// through `=E` minor premises ending in the denotation rule or made of
/// existence statements, and `=E` applications whose major premise is a
/// self-identity.  The detour and reductio species — everything the
/// rank counts — are untouched.
///
/// The purge iterates micro-steps to a fixpoint.  A segment whose
/// removal would orphan assumption classes discharged in the removed
/// region is left in place; such segments do not arise from the
/// constructions in this crate.
pub fn purge_identity_maximals(d: &Deduction, sys: &SystemConfig) -> Deduction {
    let mut current = d.clone();
    let cap = 8 * (d.size() as u64) + 64;
    let mut steps = 0u64;
    while let Some((next, _, _)) = purge_step(&current, sys) {
        current = next;
        steps += 1;
        if steps > cap {
            debug_assert!(
                false,
                "identity purge failed to converge; this is a bug in the reduction engine"
            );
            break;
        }
    }
    current.relabel()
}

// ---------------------------------------------------------------------------
// Detour contractions and permutations
// ---------------------------------------------------------------------------

fn bad(position: &[usize], reason: impl Into<String>) -> RewriteError {
    RewriteError::NotARedex {
        position: position.to_vec(),
        reason: reason.into(),
    }
}

/// The term an `∀E`/`∃I` witness premise instantiates with: the term of
/// an existence formula, or the term judgment itself.
fn instantiating_term(witness: &Deduction) -> Option<Term> {
    match witness.conclusion() {
        Judgment::Formula(Formula::ExistsBang(t)) => Some(t.clone()),
        Judgment::Term(t) => Some(t.clone()),
        _ => None,
    }
}

/// Contract the detour at `position`: an elimination whose major premise
/// is concluded by the matching introduction.  Returns the reduced
/// deduction and the procedure applied.
fn contract_at(d: &Deduction, position: &[usize]) -> Result<(Deduction, Procedure), RewriteError> {
    let elim = d
        .locate(position)
        .map_err(|_| bad(position, "no node at this position"))?;
    let Some(elim_rule) = elim.rule() else {
        return Err(bad(position, "an assumption leaf cannot be contracted"));
    };
    if elim_major(elim_rule) != Some(0) {
        return Err(bad(position, format!("{elim_rule} is not an elimination")));
    }
    let major = &elim.premises()[0];
    let intro_rule = major.rule();
    let mut names = Names::seeded(d);
    // Each graft copy is renamed apart, so multiple class occurrences
    // cannot come to share eigenparameters or internal labels.
    let graft = |body: Deduction,
                 label: Option<ClassLabel>,
                 plug: &Deduction,
                 names: &mut Names|
     -> Result<Deduction, RewriteError> {
        match label {
            Some(label) => body
                .graft_with(label, &mut || duplicate(plug, names))
                .map_err(|e| bad(position, e.to_string())),
            None => Ok(body),
        }
    };
    let (replacement, procedure) = match (elim_rule, intro_rule) {
        (RuleTag::AndEl, Some(RuleTag::AndI)) => {
            (major.premises()[0].clone(), Procedure::DetourAnd)
        }
        (RuleTag::AndEr, Some(RuleTag::AndI)) => {
            (major.premises()[1].clone(), Procedure::DetourAnd)
        }
        (RuleTag::ImpE, Some(RuleTag::ImpI)) => {
            let body = major.premises()[0].clone();
            let minor = elim.premises()[1].clone();
            (
                graft(body, major.discharge_label(Role::Antecedent), &minor, &mut names)?,
                Procedure::DetourImp,
            )
        }
        (RuleTag::OrE, Some(RuleTag::OrIl)) => {
            let case = elim.premises()[1].clone();
            let arm = major.premises()[0].clone();
            (
                graft(case, elim.discharge_label(Role::CaseLeft), &arm, &mut names)?,
                Procedure::DetourOr,
            )
        }
        (RuleTag::OrE, Some(RuleTag::OrIr)) => {
            let case = elim.premises()[2].clone();
            let arm = major.premises()[0].clone();
            (
                graft(case, elim.discharge_label(Role::CaseRight), &arm, &mut names)?,
                Procedure::DetourOr,
            )
        }
        (RuleTag::AllE, Some(RuleTag::AllI)) | (RuleTag::AllEJ, Some(RuleTag::AllIJ)) => {
            let witness = elim.premises()[1].clone();
            let t = instantiating_term(&witness)
                .ok_or_else(|| bad(position, "the witness premise has no instantiating term"))?;
            let role = if elim_rule == RuleTag::AllE {
                Role::WitnessExistence
            } else {
                Role::WitnessTerm
            };
            let mut body = major.premises()[0].clone();
            if let Some(a) = eigen_of(major) {
                body = body.subst_param(&a, &t);
            }
            (
                graft(body, major.discharge_label(role), &witness, &mut names)?,
                Procedure::DetourForall,
            )
        }
        (RuleTag::ExE, Some(RuleTag::ExI)) | (RuleTag::ExEJ, Some(RuleTag::ExIJ)) => {
            let instance = major.premises()[0].clone();
            let witness = major.premises()[1].clone();
            let t = instantiating_term(&witness)
                .ok_or_else(|| bad(position, "the witness premise has no instantiating term"))?;
            let role = if elim_rule == RuleTag::ExE {
                Role::WitnessExistence
            } else {
                Role::WitnessTerm
            };
            let mut minor = elim.premises()[1].clone();
            if let Some(b) = eigen_of(elim) {
                minor = minor.subst_param(&b, &t);
            }
            let minor = graft(
                minor,
                elim.discharge_label(Role::WitnessFormula),
                &instance,
                &mut names,
            )?;
            (
                graft(minor, elim.discharge_label(role), &witness, &mut names)?,
                Procedure::DetourExists,
            )
        }
        (RuleTag::IotaE1, Some(RuleTag::IotaI)) => {
            let minor = elim.premises()[1].clone();
            let Some(Formula::Eq(u, _)) = minor.conclusion().formula() else {
                return Err(bad(position, "the minor premise must be an identity"));
            };
            let u = u.clone();
            let mut body = major.premises()[1].clone();
            if let Some(a) = eigen_of(major) {
                body = body.subst_param(&a, &u);
            }
            (
                graft(body, major.discharge_label(Role::Id), &minor, &mut names)?,
                Procedure::DetourIota1,
            )
        }
        (RuleTag::IotaE2, Some(RuleTag::IotaI)) => {
            let instance = elim.premises()[1].clone();
            let existence = elim.premises()[2].clone();
            let Some(Formula::ExistsBang(u)) = existence.conclusion().formula() else {
                return Err(bad(position, "the right premise must be an existence formula"));
            };
            let u = u.clone();
            let mut body = major.premises()[2].clone();
            if let Some(a) = eigen_of(major) {
                body = body.subst_param(&a, &u);
            }
            let body = graft(
                body,
                major.discharge_label(Role::WitnessFormula),
                &instance,
                &mut names,
            )?;
            (
                graft(
                    body,
                    major.discharge_label(Role::WitnessExistence),
                    &existence,
                    &mut names,
                )?,
                Procedure::DetourIota2,
            )
        }
        (RuleTag::IotaE3, Some(RuleTag::IotaI)) => {
            (major.premises()[0].clone(), Procedure::DetourIota3)
        }
        (_, Some(r)) => {
            return Err(bad(
                position,
                format!("{elim_rule} on a major premise concluded by {r} is not a detour"),
            ))
        }
        (_, None) => {
            return Err(bad(
                position,
                format!("the major premise of {elim_rule} is an assumption"),
            ))
        }
    };
    if !crate::deduction::alpha_eq_judgment(replacement.conclusion(), elim.conclusion()) {
        return Err(bad(
            position,
            "the contraction does not conclude what the elimination concluded",
        ));
    }
    let reduced = d
        .replace_at(position, replacement)
        .map_err(|_| bad(position, "no node at this position"))?;
    Ok((reduced, procedure))
}

/// Push the elimination at `position` above the case analysis, witness
/// extraction or generalised identity introduction that concludes its
/// major premise; that node is re-concluded with the elimination's
/// conclusion.  Shortens the segment ending at the major premise by one.
fn permute_at(d: &Deduction, position: &[usize]) -> Result<(Deduction, Procedure), RewriteError> {
    let elim = d
        .locate(position)
        .map_err(|_| bad(position, "no node at this position"))?;
    let Some(elim_rule) = elim.rule() else {
        return Err(bad(position, "an assumption leaf cannot be permuted"));
    };
    if elim_major(elim_rule) != Some(0) {
        return Err(bad(position, format!("{elim_rule} is not an elimination")));
    }
    let stretcher = &elim.premises()[0];
    let Some(s_rule) = stretcher.rule() else {
        return Err(bad(position, "the major premise is an assumption"));
    };
    let (minors, procedure): (&[usize], Procedure) = match s_rule {
        RuleTag::OrE => (&[1, 2], Procedure::PermuteOrE),
        RuleTag::ExE | RuleTag::ExEJ => (&[1], Procedure::PermuteExE),
        RuleTag::EqInG => (&[1], Procedure::PermuteGenI),
        _ => {
            return Err(bad(
                position,
                format!("the major premise is concluded by {s_rule}, which does not stretch a segment"),
            ))
        }
    };
    let goal = elim.conclusion().clone();
    let mut names = Names::seeded(d);
    let mut premises = stretcher.premises().to_vec();
    for &slot in minors {
        let mut shifted = elim.premises().to_vec();
        shifted[0] = premises[slot].clone();
        let pushed = Deduction::infer(
            elim_rule,
            goal.clone(),
            shifted,
            elim.discharges().to_vec(),
        );
        // With two case branches the elimination is copied into both;
        // renaming each copy apart keeps discharge labels and
        // eigenparameters from appearing under two dischargers.
        premises[slot] = if minors.len() > 1 {
            duplicate(&pushed, &mut names)
        } else {
            pushed
        };
    }
    let replacement = Deduction::infer(s_rule, goal, premises, stretcher.discharges().to_vec());
    let permuted = d
        .replace_at(position, replacement)
        .map_err(|_| bad(position, "no node at this position"))?;
    Ok((permuted, procedure))
}

/// Contract the intro/elim detour described by the redex.
pub fn detour_reduce(d: &Deduction, redex: &Redex) -> Result<Deduction, RewriteError> {
    let (reduced, procedure) = contract_at(d, &redex.position)?;
    if procedure != redex.procedure {
        return Err(bad(
            &redex.position,
            format!(
                "found a {procedure} contraction where {} was requested",
                redex.procedure
            ),
        ));
    }
    Ok(reduced.relabel())
}

/// Permute the elimination described by the redex above the node that
/// concludes its major premise.
pub fn permute_reduce(d: &Deduction, redex: &Redex) -> Result<Deduction, RewriteError> {
    let (permuted, procedure) = permute_at(d, &redex.position)?;
    if procedure != redex.procedure {
        return Err(bad(
            &redex.position,
            format!(
                "found a {procedure} permutation where {} was requested",
                redex.procedure
            ),
        ));
    }
    Ok(permuted.relabel())
}

// ---------------------------------------------------------------------------
// Vacuous-step simplification
// ---------------------------------------------------------------------------

fn simplify_walk(d: &Deduction) -> Deduction {
    let Deduction::Infer {
        rule,
        conclusion,
        premises,
        discharges,
    } = d
    else {
        return d.clone();
    };
    let premises: Vec<Deduction> = premises.iter().map(simplify_walk).collect();
    let rebuilt = Deduction::Infer {
        rule: *rule,
        conclusion: conclusion.clone(),
        premises,
        discharges: discharges.clone(),
    };
    let occurrences = |role: Role| -> usize {
        match rebuilt.discharge_label(role) {
            Some(label) => rebuilt
                .premises()
                .iter()
                .map(|p| class_occurrences(p, label))
                .sum(),
            None => 0,
        }
    };
    // A branch may only be kept if it leaves nothing orphaned: no class
    // discharged at this node may still have leaves inside it.
    let clean = |minor: &Deduction| {
        rebuilt
            .discharges()
            .iter()
            .all(|(_, label)| class_occurrences(minor, *label) == 0)
    };
    match rule {
        RuleTag::OrE => {
            if occurrences(Role::CaseLeft) == 0 && clean(&rebuilt.premises()[1]) {
                rebuilt.premises()[1].clone()
            } else if occurrences(Role::CaseRight) == 0 && clean(&rebuilt.premises()[2]) {
                rebuilt.premises()[2].clone()
            } else {
                rebuilt
            }
        }
        RuleTag::ExE | RuleTag::ExEJ => {
            let witness_role = if *rule == RuleTag::ExE {
                Role::WitnessExistence
            } else {
                Role::WitnessTerm
            };
            if occurrences(Role::WitnessFormula) == 0 && occurrences(witness_role) == 0 {
                rebuilt.premises()[1].clone()
            } else {
                rebuilt
            }
        }
        RuleTag::EqE => {
            let self_identity = matches!(
                rebuilt.premises()[0].conclusion().formula(),
                Some(Formula::Eq(l, r)) if alpha_eq_term(l, r)
            );
            if self_identity {
                rebuilt.premises()[1].clone()
            } else {
                rebuilt
            }
        }
        _ => rebuilt,
    }
}

/// Removes steps that analyse without using: case analyses in which one
/// of the case assumptions is never discharged (the branch that does
/// without its assumption is kept, the left one on a tie), witness
/// extractions that discharge nothing, and identity eliminations whose
/// major premise is a self-identity.  The conclusion is unchanged; open
/// assumptions can only shrink.
pub fn simplify_vacuous(d: &Deduction) -> Deduction {
    simplify_walk(d).relabel()
}

// ---------------------------------------------------------------------------
// Classical regularization
// ---------------------------------------------------------------------------

fn regular_walk(
    d: &Deduction,
    wrapped: &BTreeSet<ClassLabel>,
    names: &mut Names,
    is_imp_major: bool,
) -> Deduction {
    match d {
        Deduction::Assume { judgment, label } if wrapped.contains(label) && !is_imp_major => {
            let Judgment::Formula(Formula::Imp(antecedent, consequent)) = judgment else {
                return d.clone();
            };
            if !matches!(**consequent, Formula::Bot) {
                return d.clone();
            }
            let fresh = names.label();
            let falsum = build(
                RuleTag::ImpE,
                Formula::Bot,
                vec![
                    d.clone(),
                    Deduction::assume(Judgment::Formula((**antecedent).clone()), fresh),
                ],
                vec![],
            );
            build(
                RuleTag::ImpI,
                (**antecedent).clone().negated(),
                vec![falsum],
                vec![(Role::Antecedent, fresh)],
            )
        }
        Deduction::Assume { .. } => d.clone(),
        Deduction::Infer {
            rule,
            conclusion,
            premises,
            discharges,
        } => Deduction::Infer {
            rule: *rule,
            conclusion: conclusion.clone(),
            premises: premises
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    regular_walk(p, wrapped, names, *rule == RuleTag::ImpE && i == 0)
                })
                .collect(),
            discharges: discharges.clone(),
        },
    }
}

/// In the classical description system: rewrite the deduction so that
/// every assumption discharged by the classical falsum rule stands as
/// the major premise of an implication elimination.  A leaf `¬A` in any
/// other position is replaced by the two-step figure that assumes `A`
/// afresh, derives `⊥`, and re-concludes `¬A`.  Idempotent.
pub fn regularize(d: &Deduction, sys: &SystemConfig) -> Result<Deduction, RewriteError> {
    if !(sys.classical && sys.iota && sys.primed) {
        return Err(RewriteError::UnsupportedSystem {
            system: sys.name(),
            operation: "classical regularization",
        });
    }
    let mut wrapped = BTreeSet::new();
    for (_, node) in d.nodes() {
        if node.rule() == Some(RuleTag::BotEC) {
            if let Some(label) = node.discharge_label(Role::Negation) {
                wrapped.insert(label);
            }
        }
    }
    let mut names = Names::seeded(d);
    Ok(regular_walk(d, &wrapped, &mut names, false).relabel())
}

// ---------------------------------------------------------------------------
// Classical reductions
// ---------------------------------------------------------------------------

/// Whether every leaf of the class stands as the major premise of an
/// implication elimination — the regularity the classical reductions
/// rely on.
fn class_is_regular(pi: &Deduction, label: ClassLabel) -> bool {
    fn walk(d: &Deduction, label: ClassLabel, is_imp_major: bool, ok: &mut bool) {
        match d {
            Deduction::Assume { label: l, .. } => {
                if *l == label && !is_imp_major {
                    *ok = false;
                }
            }
            Deduction::Infer { rule, premises, .. } => {
                for (i, p) in premises.iter().enumerate() {
                    walk(p, label, *rule == RuleTag::ImpE && i == 0, ok);
                }
            }
        }
    }
    let mut ok = true;
    walk(pi, label, false, &mut ok);
    ok
}

/// Rebuild `pi`, replacing every implication elimination whose major
/// premise is a class-`from` assumption: the major becomes a class-`to`
/// assumption of `negation`, and the minor — rebuilt recursively first —
/// is passed through `make_minor` to conclude what `negation` negates.
fn rewire_class(
    pi: &Deduction,
    from: ClassLabel,
    to: ClassLabel,
    negation: &Formula,
    make_minor: &mut dyn FnMut(Deduction) -> Deduction,
) -> Deduction {
    match pi {
        Deduction::Assume { .. } => pi.clone(),
        Deduction::Infer {
            rule,
            conclusion,
            premises,
            discharges,
        } => {
            if *rule == RuleTag::ImpE {
                if matches!(&premises[0], Deduction::Assume { label, .. } if *label == from) {
                    let inner = rewire_class(&premises[1], from, to, negation, make_minor);
                    let major = Deduction::assume(Judgment::Formula(negation.clone()), to);
                    return build(
                        RuleTag::ImpE,
                        Formula::Bot,
                        vec![major, make_minor(inner)],
                        vec![],
                    );
                }
            }
            Deduction::Infer {
                rule: *rule,
                conclusion: conclusion.clone(),
                premises: premises
                    .iter()
                    .map(|p| rewire_class(p, from, to, negation, make_minor))
                    .collect(),
                discharges: discharges.clone(),
            }
        }
    }
}

/// Drop every implication elimination whose major premise is a class
/// assumption of `¬⊥`: its minor already concludes `⊥` on its own.
fn strip_class(pi: &Deduction, from: ClassLabel) -> Deduction {
    match pi {
        Deduction::Assume { .. } => pi.clone(),
        Deduction::Infer {
            rule,
            conclusion,
            premises,
            discharges,
        } => {
            if *rule == RuleTag::ImpE {
                if matches!(&premises[0], Deduction::Assume { label, .. } if *label == from) {
                    return strip_class(&premises[1], from);
                }
            }
            Deduction::Infer {
                rule: *rule,
                conclusion: conclusion.clone(),
                premises: premises.iter().map(|p| strip_class(p, from)).collect(),
                discharges: discharges.clone(),
            }
        }
    }
}

/// Conclude `target` classically from `pi ⊢ ⊥`, whose class-`label`
/// assumptions negate `target` and stand as implication-elimination
/// majors with minors concluding `target`.  Complex targets are lowered
/// to their parts — the eliminations applied to the minors, the falsum
/// rule applied atomically, the parts reassembled by introductions — so
/// that every classical falsum concludes an atomic formula.
fn lower_botc(
    pi: Deduction,
    label: ClassLabel,
    target: &Formula,
    sys: &SystemConfig,
    names: &mut Names,
) -> Result<Deduction, RewriteError> {
    match target {
        Formula::Bot => Ok(strip_class(&pi, label)),
        Formula::Imp(a, b) => {
            let (k, jb) = (names.label(), names.label());
            let neg_b = (**b).clone().negated();
            let rewired = rewire_class(&pi, label, jb, &neg_b, &mut |m| {
                build(
                    RuleTag::ImpE,
                    (**b).clone(),
                    vec![
                        m,
                        Deduction::assume(Judgment::Formula((**a).clone()), k),
                    ],
                    vec![],
                )
            });
            let body = lower_botc(rewired, jb, b, sys, names)?;
            Ok(build(
                RuleTag::ImpI,
                target.clone(),
                vec![body],
                vec![(Role::Antecedent, k)],
            ))
        }
        Formula::Forall(x, g) => {
            let p = names.param();
            let (k, jg) = (names.label(), names.label());
            let instance = g.subst_var(x, &Term::Param(p.clone()));
            let neg = instance.clone().negated();
            let rewired = rewire_class(&pi, label, jg, &neg, &mut |m| {
                build(
                    RuleTag::AllE,
                    instance.clone(),
                    vec![
                        m,
                        Deduction::assume(
                            Judgment::Formula(Formula::ExistsBang(Term::Param(p.clone()))),
                            k,
                        ),
                    ],
                    vec![],
                )
            });
            let body = lower_botc(rewired, jg, &instance, sys, names)?;
            Ok(build(
                RuleTag::AllI,
                target.clone(),
                vec![body],
                vec![(Role::WitnessExistence, k)],
            ))
        }
        // The classical description system's language is spare: there
        // are no rules for ∧, ∨ or ∃ to lower a falsum through.
        Formula::And(..) | Formula::Or(..) | Formula::Exists(..) => {
            Err(RewriteError::UnsupportedSystem {
                system: sys.name(),
                operation: "lowering a classical falsum over a connective without classical rules",
            })
        }
        _ => Ok(build(
            RuleTag::BotEC,
            target.clone(),
            vec![pi],
            vec![(Role::Negation, label)],
        )),
    }
}

/// Reduce the classical falsum maximal whose consumer sits at
/// `position`: the premise (or description-elimination major) there is
/// concluded by the classical falsum rule.
fn classical_at(
    d: &Deduction,
    sys: &SystemConfig,
    position: &[usize],
) -> Result<(Deduction, Procedure), RewriteError> {
    if !(sys.classical && sys.iota && sys.primed) {
        return Err(RewriteError::UnsupportedSystem {
            system: sys.name(),
            operation: "classical falsum reduction",
        });
    }
    let consumer = d
        .locate(position)
        .map_err(|_| bad(position, "no node at this position"))?;
    let Some(consumer_rule) = consumer.rule() else {
        return Err(bad(position, "an assumption leaf consumes nothing"));
    };
    let falsum_node = &consumer.premises()[0];
    let mut names = Names::seeded(d);
    match consumer_rule {
        // The denotation rule (or the final description elimination) on a
        // classically-derived prime premise: the existence conclusion is
        // re-derived from a minor premise of the discharged class, or
        // straight from `⊥` when the class is empty.
        RuleTag::Ad | RuleTag::IotaE3 => {
            let procedure = if consumer_rule == RuleTag::Ad {
                Procedure::ClassicalAd
            } else {
                Procedure::ClassicalIota3
            };
            let Some(t) = existence_term(consumer.conclusion()) else {
                return Err(bad(position, "the consumer does not conclude existence"));
            };
            let vacuous_replacement = |names: &mut Names| {
                derive_falsum(
                    &falsum_node.premises()[0],
                    &Formula::ExistsBang(t.clone()),
                    sys,
                    names,
                )
            };
            match falsum_node.rule() {
                Some(RuleTag::BotE) => {
                    let replacement = vacuous_replacement(&mut names);
                    let reduced = d
                        .replace_at(position, replacement)
                        .map_err(|_| bad(position, "no node at this position"))?;
                    Ok((reduced, procedure))
                }
                Some(RuleTag::BotEC) => {
                    let label = falsum_node.discharge_label(Role::Negation);
                    let pi = &falsum_node.premises()[0];
                    let vacuous =
                        label.is_none_or(|l| class_occurrences(pi, l) == 0);
                    if vacuous {
                        let replacement = vacuous_replacement(&mut names);
                        let reduced = d
                            .replace_at(position, replacement)
                            .map_err(|_| bad(position, "no node at this position"))?;
                        return Ok((reduced, procedure));
                    }
                    let label = label.expect("non-vacuous classes are labelled");
                    if !class_is_regular(pi, label) {
                        return Err(bad(
                            position,
                            "the deduction is not regular at the discharged class",
                        ));
                    }
                    // Candidate minors of the discharged class, leftmost
                    // first.
                    let mut pi_pos = position.to_vec();
                    pi_pos.extend([0, 0]);
                    let candidates: Vec<Position> = pi
                        .nodes()
                        .into_iter()
                        .filter(|(_, n)| {
                            n.rule() == Some(RuleTag::ImpE)
                                && matches!(
                                    &n.premises()[0],
                                    Deduction::Assume { label: l, .. } if *l == label
                                )
                        })
                        .map(|(rel, _)| {
                            let mut abs = pi_pos.clone();
                            abs.extend(rel);
                            abs.push(1);
                            abs
                        })
                        .collect();
                    for minor_pos in candidates {
                        let xi = d
                            .locate(&minor_pos)
                            .map_err(|_| bad(position, "no node at this position"))?;
                        // When the minor itself ends in the description
                        // introduction and the consumer extracts the
                        // described term's existence, contracting the
                        // fresh detour immediately: its first premise
                        // already concludes it.
                        let fold = match (xi.rule(), formula_of(xi)) {
                            (Some(RuleTag::IotaI), Formula::Eq(_, r))
                                if alpha_eq_term(r, &t) =>
                            {
                                Some({
                                    let mut p = minor_pos.clone();
                                    p.push(0);
                                    p
                                })
                            }
                            _ => None,
                        };
                        let (source_pos, replacement) = match fold {
                            Some(p) => {
                                let premise = xi.premises()[0].clone();
                                (p, premise)
                            }
                            None => (minor_pos.clone(), denote(xi.clone(), &t, sys)),
                        };
                        let source = d
                            .locate(&source_pos)
                            .map_err(|_| bad(position, "no node at this position"))?;
                        if replacement_leaks(d, position, &source_pos, source) {
                            continue;
                        }
                        let reduced = d
                            .replace_at(position, replacement)
                            .map_err(|_| bad(position, "no node at this position"))?;
                        return Ok((reduced, procedure));
                    }
                    // Every reusable minor depends on assumptions
                    // discharged between it and the falsum, so none can
                    // replace the whole derivation.  Fold the consumer
                    // into the minors instead: each one is wrapped in the
                    // consuming rule, and the falsum re-concludes the
                    // existence statement directly.  That statement is
                    // atomic, so the restriction on the classical falsum
                    // is kept, and nothing is discarded, so no assumption
                    // is orphaned.
                    let goal = Formula::ExistsBang(t.clone());
                    let j = names.label();
                    let negation = goal.clone().negated();
                    let rewired = rewire_class(pi, label, j, &negation, &mut |m| {
                        // A minor ending in the description introduction
                        // would make the wrapper a fresh detour; its
                        // existence premise already concludes the goal.
                        let folds = matches!(
                            (m.rule(), m.conclusion().formula()),
                            (Some(RuleTag::IotaI), Some(Formula::Eq(_, r)))
                                if alpha_eq_term(r, &t)
                        );
                        if folds {
                            m.premises()[0].clone()
                        } else {
                            denote(m, &t, sys)
                        }
                    });
                    let lowered = lower_botc(rewired, j, &goal, sys, &mut names)?;
                    let reduced = d
                        .replace_at(position, lowered)
                        .map_err(|_| bad(position, "no node at this position"))?;
                    Ok((reduced, procedure))
                }
                _ => Err(bad(position, "the premise is not a falsum conclusion")),
            }
        }
        // A description elimination whose major premise is classically
        // derived: the elimination is permuted above, applied to each
        // minor premise of the discharged class, and the classical
        // falsum re-concluded — atomically — for the new conclusion.
        RuleTag::IotaE1 | RuleTag::IotaE2 => {
            if falsum_node.rule() != Some(RuleTag::BotEC) {
                return Err(bad(position, "the major premise is not a falsum conclusion"));
            }
            let Some(label) = falsum_node.discharge_label(Role::Negation) else {
                return Err(bad(
                    position,
                    "a vacuous classical falsum cannot conclude a description identity",
                ));
            };
            let pi = falsum_node.premises()[0].clone();
            if !class_is_regular(&pi, label) {
                return Err(bad(
                    position,
                    "the deduction is not regular at the discharged class",
                ));
            }
            let Some(goal) = consumer.conclusion().formula().cloned() else {
                return Err(bad(position, "the consumer concludes a term judgment"));
            };
            let siblings: Vec<Deduction> = consumer.premises()[1..].to_vec();
            let j = names.label();
            let negation = goal.clone().negated();
            let rewired = rewire_class(&pi, label, j, &negation, &mut |m| {
                let mut premises = vec![m];
                premises.extend(siblings.iter().map(|s| duplicate(s, &mut names)));
                Deduction::infer(
                    consumer_rule,
                    Judgment::Formula(goal.clone()),
                    premises,
                    vec![],
                )
            });
            let lowered = lower_botc(rewired, j, &goal, sys, &mut names)?;
            let reduced = d
                .replace_at(position, lowered)
                .map_err(|_| bad(position, "no node at this position"))?;
            let procedure = if consumer_rule == RuleTag::IotaE1 {
                Procedure::ClassicalIota1
            } else {
                Procedure::ClassicalIota2
            };
            Ok((reduced, procedure))
        }
        _ => Err(bad(
            position,
            format!("{consumer_rule} does not consume a classical falsum"),
        )),
    }
}

/// Apply the classical falsum reduction described by the redex.
pub fn classical_reduce(
    d: &Deduction,
    sys: &SystemConfig,
    redex: &Redex,
) -> Result<Deduction, RewriteError> {
    let (reduced, procedure) = classical_at(d, sys, &redex.position)?;
    if procedure != redex.procedure {
        return Err(bad(
            &redex.position,
            format!(
                "found a {procedure} reduction where {} was requested",
                redex.procedure
            ),
        ));
    }
    Ok(reduced.relabel())
}

// ---------------------------------------------------------------------------
// The normalization driver
// ---------------------------------------------------------------------------

/// Whether a judgment mentions `∧`, `∨` or `∃`, looking inside ι
/// bodies.  The classical description system has no rules for these
/// connectives; deductions mentioning them lie outside its language.
fn outside_classical_language(j: &Judgment) -> bool {
    fn formula(f: &Formula) -> bool {
        match f {
            Formula::And(..) | Formula::Or(..) | Formula::Exists(..) => true,
            Formula::Pred(_, args) => args.iter().any(term),
            Formula::Eq(l, r) => term(l) || term(r),
            Formula::ExistsBang(t) => term(t),
            Formula::Bot => false,
            Formula::Imp(l, r) => formula(l) || formula(r),
            Formula::Forall(_, body) => formula(body),
        }
    }
    fn term(t: &Term) -> bool {
        match t {
            Term::Const(_) | Term::Param(_) | Term::Var(_) => false,
            Term::Iota(_, body) => formula(body),
        }
    }
    match j {
        Judgment::Formula(f) => formula(f),
        Judgment::Term(t) => term(t),
    }
}

/// The redex a counted maximal segment induces: the node consuming the
/// segment's last formula, and the procedure that applies there.  A
/// one-formula detour segment is contracted at the elimination; a
/// longer one is permuted at the rule that stretches it; a reductio
/// segment is handled by the classical falsum reduction at its
/// consumer.
fn segment_redex(d: &Deduction, m: &MaximalSegment) -> Option<Redex> {
    let last = m.segment.positions.last()?;
    let (position, _) = parent_of(last)?;
    let consumer = d.locate(&position).ok()?.rule()?;
    let procedure = match m.species {
        Species::Reductio => match consumer {
            RuleTag::Ad => Procedure::ClassicalAd,
            RuleTag::IotaE1 => Procedure::ClassicalIota1,
            RuleTag::IotaE2 => Procedure::ClassicalIota2,
            RuleTag::IotaE3 => Procedure::ClassicalIota3,
            _ => return None,
        },
        Species::IntroElim if m.segment.positions.len() > 1 => {
            match d.locate(last).ok()?.rule()? {
                RuleTag::OrE => Procedure::PermuteOrE,
                RuleTag::ExE | RuleTag::ExEJ => Procedure::PermuteExE,
                RuleTag::EqInG => Procedure::PermuteGenI,
                _ => return None,
            }
        }
        Species::IntroElim => match consumer {
            RuleTag::AndEl | RuleTag::AndEr => Procedure::DetourAnd,
            RuleTag::OrE => Procedure::DetourOr,
            RuleTag::ImpE => Procedure::DetourImp,
            RuleTag::AllE | RuleTag::AllEJ => Procedure::DetourForall,
            RuleTag::ExE | RuleTag::ExEJ => Procedure::DetourExists,
            RuleTag::IotaE1 => Procedure::DetourIota1,
            RuleTag::IotaE2 => Procedure::DetourIota2,
            RuleTag::IotaE3 => Procedure::DetourIota3,
            _ => return None,
        },
        _ => return None,
    };
    Some(Redex {
        position,
        procedure,
        species: m.species,
    })
}

/// Every redex the driver can choose from: one per maximal segment of
/// the detour and reductio species.
pub fn redexes(d: &Deduction, sys: &SystemConfig) -> Vec<Redex> {
    find_maximal(d, sys)
        .iter()
        .filter(|m| matches!(m.species, Species::IntroElim | Species::Reductio))
        .filter_map(|m| segment_redex(d, m))
        .collect()
}

/// `longer` lies strictly above `shorter` in the tree: its position
/// path properly extends the other's.
fn strictly_extends(longer: &[usize], shorter: &[usize]) -> bool {
    longer.len() > shorter.len() && longer[..shorter.len()] == *shorter
}

/// The Troelstra–Schwichtenberg choice: among the counted maximal
/// segments of highest degree with no other such segment standing
/// above their first formula, the rightmost.
fn select_redex(d: &Deduction, sys: &SystemConfig) -> Option<Redex> {
    let counted: Vec<MaximalSegment> = find_maximal(d, sys)
        .into_iter()
        .filter(|m| matches!(m.species, Species::IntroElim | Species::Reductio))
        .collect();
    let top = counted.iter().map(|m| m.degree).max()?;
    let mut eligible: Vec<&MaximalSegment> = Vec::new();
    for (i, m) in counted.iter().enumerate() {
        if m.degree != top {
            continue;
        }
        let first = &m.segment.positions[0];
        let shadowed = counted.iter().enumerate().any(|(k, other)| {
            k != i
                && other.degree == top
                && strictly_extends(
                    other.segment.positions.last().expect("segments are non-empty"),
                    first,
                )
        });
        if !shadowed {
            eligible.push(m);
        }
    }
    eligible
        .into_iter()
        .max_by_key(|m| m.segment.positions[0].clone())
        .and_then(|m| segment_redex(d, m))
}

/// Whether the classical reduction at this redex can run as the
/// deduction stands: every leaf of the falsum's discharged class is
/// the major premise of `→E`.
fn redex_is_regular(d: &Deduction, redex: &Redex) -> bool {
    let Ok(consumer) = d.locate(&redex.position) else {
        return true;
    };
    let Some(falsum) = consumer.premises().first() else {
        return true;
    };
    if falsum.rule() != Some(RuleTag::BotEC) {
        return true;
    }
    match falsum.discharge_label(Role::Negation) {
        Some(label) => class_is_regular(&falsum.premises()[0], label),
        None => true,
    }
}

/// The purge loop with trace recording; shares its micro-stepper with
/// [`purge_identity_maximals`].
fn purge_traced(d: &Deduction, sys: &SystemConfig, trace: &mut Vec<TraceStep>) -> Deduction {
    let mut current = d.clone();
    let cap = 8 * (d.size() as u64) + 64;
    let mut steps = 0u64;
    while let Some((next, procedure, position)) = purge_step(&current, sys) {
        trace.push(TraceStep {
            procedure,
            position,
            rank_before: rank(&current, sys),
            rank_after: rank(&next, sys),
            node_delta: next.size() as i64 - current.size() as i64,
        });
        current = next;
        steps += 1;
        if steps > cap {
            debug_assert!(
                false,
                "identity purge failed to converge; this is a bug in the reduction engine"
            );
            break;
        }
    }
    current.relabel()
}

/// The driver's default step budget: exponential in the total degree
/// of the judgments (the theoretical worst case for contraction-driven
/// duplication), clamped to stay runnable, plus a linear allowance for
/// degree-zero reductio chains.  Real proofs stay far below it;
/// reaching it means the engine looped.
fn default_limit(d: &Deduction) -> u64 {
    let total: u64 = d
        .nodes()
        .iter()
        .map(|(_, n)| match n.conclusion() {
            Judgment::Formula(f) => u64::from(f.degree()),
            Judgment::Term(t) => u64::from(t.degree()),
        })
        .sum();
    (1u64 << total.min(16)) + 4 * d.size() as u64 + 64
}

/// Bring a deduction into normal form, returning the result and the
/// full reduction trace.
///
/// The driver loops: purge the identity family, pick the rightmost
/// highest-degree detour or reductio segment with no other such
/// segment above it, apply the matching contraction, permutation or
/// classical falsum reduction, and purge again.  Every recorded step
/// of the detour, permutative and classical families strictly lowers
/// the rank, so the loop terminates; a generous budget guards against
/// engine bugs.  Classical description deductions are regularized the
/// first time a reduction requires it, so already-normal inputs come
/// back unchanged with an empty trace.
///
/// Refused inputs: the unprimed description systems, whose reductions
/// would substitute ι terms of unbounded degree (translate to the
/// primed system first); the full classical rule set; and classical
/// description deductions mentioning `∧`, `∨` or `∃`, which lie
/// outside that system's language.
pub fn normalize(
    d: &Deduction,
    sys: &SystemConfig,
) -> Result<(Deduction, Vec<TraceStep>), RewriteError> {
    normalize_with_limit(d, sys, default_limit(d))
}

/// [`normalize`] with an explicit budget of driver iterations (purge
/// micro-steps are not counted against it).
pub fn normalize_with_limit(
    d: &Deduction,
    sys: &SystemConfig,
    limit: u64,
) -> Result<(Deduction, Vec<TraceStep>), RewriteError> {
    if sys.iota && !sys.primed {
        return Err(RewriteError::MustTranslateToPrimed { system: sys.name() });
    }
    if sys.classical && sys.full_classical {
        return Err(RewriteError::UnsupportedSystem {
            system: sys.name(),
            operation: "normalization with the full classical rule set",
        });
    }
    if sys.classical && sys.iota {
        let offending = d
            .nodes()
            .iter()
            .any(|(_, n)| outside_classical_language(n.conclusion()));
        if offending {
            return Err(RewriteError::UnsupportedSystem {
                system: sys.name(),
                operation: "normalizing deductions that mention ∧, ∨ or ∃",
            });
        }
    }
    debug_assert!(
        check(d, sys).ok(),
        "normalize requires a deduction that checks"
    );
    let mut trace = Vec::new();
    let mut current = purge_traced(&d.relabel(), sys, &mut trace);
    let mut iterations = 0u64;
    let mut regularized = false;
    while let Some(redex) = select_redex(&current, sys) {
        if redex.species == Species::Reductio
            && !regularized
            && !redex_is_regular(&current, &redex)
        {
            current = regularize(&current, sys)?;
            regularized = true;
            continue;
        }
        iterations += 1;
        if iterations > limit {
            return Err(RewriteError::IterationLimitExceeded { limit });
        }
        let rank_before = rank(&current, sys);
        let size_before = current.size() as i64;
        let (stepped, procedure) = match redex.procedure {
            Procedure::DetourAnd
            | Procedure::DetourOr
            | Procedure::DetourImp
            | Procedure::DetourForall
            | Procedure::DetourExists
            | Procedure::DetourIota1
            | Procedure::DetourIota2
            | Procedure::DetourIota3 => contract_at(&current, &redex.position)?,
            Procedure::PermuteOrE | Procedure::PermuteExE | Procedure::PermuteGenI => {
                permute_at(&current, &redex.position)?
            }
            Procedure::ClassicalAd
            | Procedure::ClassicalIota1
            | Procedure::ClassicalIota2
            | Procedure::ClassicalIota3 => classical_at(&current, sys, &redex.position)?,
            Procedure::PurgeIdentity
            | Procedure::PurgeExistence
            | Procedure::PurgeEqElim
            | Procedure::PurgeVacuousEq => {
                unreachable!("the selector never chooses purge procedures")
            }
        };
        debug_assert_eq!(
            procedure, redex.procedure,
            "the applied procedure drifted from the selected redex"
        );
        debug_assert!(
            check(&stepped, sys).ok(),
            "a reduction step broke the deduction; this is a bug in the reduction engine"
        );
        let rank_after = rank(&stepped, sys);
        debug_assert!(
            rank_after < rank_before,
            "a reduction step failed to lower the rank; this is a bug in the reduction engine"
        );
        trace.push(TraceStep {
            procedure,
            position: redex.position,
            rank_before,
            rank_after,
            node_delta: stepped.size() as i64 - size_before,
        });
        current = purge_traced(&stepped.relabel(), sys, &mut trace);
    }
    debug_assert!(
        is_normal(&current, sys),
        "the driver stopped on a non-normal deduction; this is a bug in the reduction engine"
    );
    debug_assert!(
        crate::deduction::alpha_eq_judgment(current.conclusion(), d.conclusion()),
        "normalization changed the conclusion; this is a bug in the reduction engine"
    );
    Ok((current, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculi::check;
    use crate::deduction::alpha_isomorphic;

    fn cst(n: &str) -> Term {
        Term::Const(n.into())
    }

    fn par(n: &str) -> Term {
        Term::Param(n.into())
    }

    fn var(n: &str) -> Term {
        Term::Var(n.into())
    }

    fn pred(p: &str, args: Vec<Term>) -> Formula {
        Formula::Pred(p.into(), args)
    }

    fn eq(l: Term, r: Term) -> Formula {
        Formula::Eq(l, r)
    }

    fn bang(t: Term) -> Formula {
        Formula::ExistsBang(t)
    }

    fn and(l: Formula, r: Formula) -> Formula {
        Formula::And(Box::new(l), Box::new(r))
    }

    fn or(l: Formula, r: Formula) -> Formula {
        Formula::Or(Box::new(l), Box::new(r))
    }

    fn imp(l: Formula, r: Formula) -> Formula {
        Formula::Imp(Box::new(l), Box::new(r))
    }

    fn forall(v: &str, body: Formula) -> Formula {
        Formula::Forall(v.into(), Box::new(body))
    }

    fn exists(v: &str, body: Formula) -> Formula {
        Formula::Exists(v.into(), Box::new(body))
    }

    fn iota(v: &str, body: Formula) -> Term {
        Term::Iota(v.into(), Box::new(body))
    }

    fn leaf(f: Formula, label: u32) -> Deduction {
        Deduction::assume_formula(f, ClassLabel(label))
    }

    fn assert_checks(d: &Deduction, sys: &SystemConfig) {
        let report = check(d, sys);
        assert!(report.ok(), "expected a valid deduction, got:\n{report}");
    }

    /// The open classes as a set of debug-printed judgments: labels are
    /// renumbered by the operations, the judgments must survive.
    fn open_judgments(d: &Deduction) -> BTreeSet<String> {
        d.open_classes()
            .values()
            .map(|j| format!("{j:?}"))
            .collect()
    }

    fn no_complex_eq_elim(d: &Deduction) -> bool {
        d.nodes().iter().all(|(_, n)| {
            n.rule() != Some(RuleTag::EqE)
                || n.conclusion().formula().is_some_and(|f| f.is_atomic())
        })
    }

    fn falsum_concludes_prime(d: &Deduction) -> bool {
        d.nodes().iter().all(|(_, n)| match n.rule() {
            Some(RuleTag::BotE) => n.conclusion().formula().is_some_and(|f| f.is_prime()),
            _ => true,
        })
    }

    // -- identity elimination restriction -----------------------------------

    #[test]
    fn eq_elim_on_conjunction_becomes_atomic() {
        let t = cst("t");
        let s = cst("s");
        let minor = and(pred("P", vec![t.clone()]), pred("Q", vec![t.clone()]));
        let target = and(pred("P", vec![s.clone()]), pred("Q", vec![s.clone()]));
        let d = build(
            RuleTag::EqE,
            target.clone(),
            vec![leaf(eq(t, s), 1), leaf(minor, 2)],
            vec![],
        );
        assert!(!check(&d, &SystemConfig::INF).ok());
        let restricted = restrict_eq_elim(&d, &SystemConfig::INF);
        assert_checks(&restricted, &SystemConfig::INF);
        assert!(no_complex_eq_elim(&restricted));
        assert!(alpha_eq(formula_of(&restricted), &target));
        assert_eq!(open_judgments(&restricted), open_judgments(&d));
    }

    #[test]
    fn eq_elim_through_implication_reverses_the_antecedent() {
        let t = cst("t");
        let s = cst("s");
        let minor = imp(pred("P", vec![t.clone()]), pred("Q", vec![t.clone()]));
        let target = imp(pred("P", vec![s.clone()]), pred("Q", vec![s.clone()]));
        let d = build(
            RuleTag::EqE,
            target.clone(),
            vec![leaf(eq(t, s), 1), leaf(minor, 2)],
            vec![],
        );
        let restricted = restrict_eq_elim(&d, &SystemConfig::INF);
        assert_checks(&restricted, &SystemConfig::INF);
        assert!(no_complex_eq_elim(&restricted));
        assert!(alpha_eq(formula_of(&restricted), &target));
        assert_eq!(open_judgments(&restricted), open_judgments(&d));
    }

    #[test]
    fn eq_elim_through_quantifiers_and_disjunction() {
        let t = cst("t");
        let s = cst("s");
        let body = or(
            pred("P", vec![var("x"), t.clone()]),
            exists("y", pred("R", vec![var("x"), var("y"), t.clone()])),
        );
        let target_body = or(
            pred("P", vec![var("x"), s.clone()]),
            exists("y", pred("R", vec![var("x"), var("y"), s.clone()])),
        );
        let minor = forall("x", body);
        let target = forall("x", target_body);
        let d = build(
            RuleTag::EqE,
            target.clone(),
            vec![leaf(eq(t, s), 1), leaf(minor, 2)],
            vec![],
        );
        let restricted = restrict_eq_elim(&d, &SystemConfig::INF);
        assert_checks(&restricted, &SystemConfig::INF);
        assert!(no_complex_eq_elim(&restricted));
        assert!(alpha_eq(formula_of(&restricted), &target));
    }

    #[test]
    fn eq_elim_restriction_in_the_primed_system() {
        let t = cst("t");
        let s = cst("s");
        let minor = imp(pred("P", vec![t.clone()]), pred("Q", vec![t.clone()]));
        let target = imp(pred("P", vec![s.clone()]), pred("Q", vec![s.clone()]));
        let d = build(
            RuleTag::EqE,
            target.clone(),
            vec![leaf(eq(t, s), 1), leaf(minor, 2)],
            vec![],
        );
        let restricted = restrict_eq_elim(&d, &SystemConfig::INF_IOTA_PRIME);
        assert_checks(&restricted, &SystemConfig::INF_IOTA_PRIME);
        assert!(no_complex_eq_elim(&restricted));
        assert!(alpha_eq(formula_of(&restricted), &target));
    }

    #[test]
    fn eq_elim_restriction_in_the_jaskowski_system() {
        let t = cst("t");
        let s = cst("s");
        let minor = forall("x", pred("P", vec![var("x"), t.clone()]));
        let target = forall("x", pred("P", vec![var("x"), s.clone()]));
        let d = build(
            RuleTag::EqE,
            target.clone(),
            vec![leaf(eq(t, s), 1), leaf(minor, 2)],
            vec![],
        );
        let restricted = restrict_eq_elim(&d, &SystemConfig::INF_J);
        assert_checks(&restricted, &SystemConfig::INF_J);
        assert!(no_complex_eq_elim(&restricted));
        assert!(alpha_eq(formula_of(&restricted), &target));
    }

    #[test]
    fn atomic_eq_elim_left_alone() {
        let t = cst("t");
        let s = cst("s");
        let d = build(
            RuleTag::EqE,
            pred("P", vec![s.clone()]),
            vec![leaf(eq(t.clone(), s), 1), leaf(pred("P", vec![t]), 2)],
            vec![],
        );
        assert_checks(&d, &SystemConfig::INF);
        let restricted = restrict_eq_elim(&d, &SystemConfig::INF);
        assert_checks(&restricted, &SystemConfig::INF);
        assert_eq!(restricted.size(), d.size());
    }

    // -- falsum restriction -------------------------------------------------

    #[test]
    fn falsum_on_conjunction_splits() {
        let t = cst("t");
        let target = and(pred("P", vec![t.clone()]), pred("Q", vec![t]));
        let d = build(
            RuleTag::BotE,
            target.clone(),
            vec![leaf(Formula::Bot, 1)],
            vec![],
        );
        assert!(!check(&d, &SystemConfig::INF).ok());
        let restricted = restrict_bot_elim(&d, &SystemConfig::INF).expect("intuitionist");
        assert_checks(&restricted, &SystemConfig::INF);
        assert!(falsum_concludes_prime(&restricted));
        assert!(alpha_eq(formula_of(&restricted), &target));
        assert_eq!(open_judgments(&restricted), open_judgments(&d));
    }

    #[test]
    fn falsum_on_falsum_is_dropped() {
        let d = build(
            RuleTag::BotE,
            Formula::Bot,
            vec![leaf(Formula::Bot, 1)],
            vec![],
        );
        let restricted = restrict_bot_elim(&d, &SystemConfig::INF).expect("intuitionist");
        assert_eq!(restricted.size(), 1);
        assert!(alpha_eq(formula_of(&restricted), &Formula::Bot));
    }

    #[test]
    fn falsum_on_existential_introduces_a_witness() {
        let target = exists("x", pred("P", vec![var("x")]));
        let d = build(
            RuleTag::BotE,
            target.clone(),
            vec![leaf(Formula::Bot, 1)],
            vec![],
        );
        let restricted = restrict_bot_elim(&d, &SystemConfig::INF).expect("intuitionist");
        assert_checks(&restricted, &SystemConfig::INF);
        assert!(falsum_concludes_prime(&restricted));
        assert!(alpha_eq(formula_of(&restricted), &target));

        let j = restrict_bot_elim(&d, &SystemConfig::INF_J).expect("term judgments");
        assert_checks(&j, &SystemConfig::INF_J);
        assert!(falsum_concludes_prime(&j));
        assert!(alpha_eq(formula_of(&j), &target));
    }

    #[test]
    fn falsum_on_description_identity_goes_through_iota_introduction() {
        let t = cst("t");
        let description = iota("x", pred("P", vec![var("x")]));
        let target = eq(description, t);
        let d = build(
            RuleTag::BotE,
            target.clone(),
            vec![leaf(Formula::Bot, 1)],
            vec![],
        );
        for sys in [&SystemConfig::INF_IOTA, &SystemConfig::INF_IOTA_PRIME] {
            let restricted = restrict_bot_elim(&d, sys).expect("intuitionist");
            assert_checks(&restricted, sys);
            assert!(falsum_concludes_prime(&restricted));
            assert!(alpha_eq(formula_of(&restricted), &target));
        }
    }

    #[test]
    fn falsum_on_description_predication_eliminates_into_a_prime_base() {
        let description = iota("x", pred("P", vec![var("x")]));
        let target = pred("Q", vec![description.clone(), cst("t")]);
        let d = build(
            RuleTag::BotE,
            target.clone(),
            vec![leaf(Formula::Bot, 1)],
            vec![],
        );
        for sys in [&SystemConfig::INF_IOTA, &SystemConfig::INF_IOTA_PRIME] {
            let restricted = restrict_bot_elim(&d, sys).expect("intuitionist");
            assert_checks(&restricted, sys);
            assert!(falsum_concludes_prime(&restricted));
            assert!(alpha_eq(formula_of(&restricted), &target));
        }
    }

    #[test]
    fn falsum_on_reversed_description_identity_uses_symmetry() {
        let t = cst("t");
        let description = iota("x", pred("P", vec![var("x")]));
        let target = eq(t, description);
        let d = build(
            RuleTag::BotE,
            target.clone(),
            vec![leaf(Formula::Bot, 1)],
            vec![],
        );
        let restricted =
            restrict_bot_elim(&d, &SystemConfig::INF_IOTA_PRIME).expect("intuitionist");
        assert_checks(&restricted, &SystemConfig::INF_IOTA_PRIME);
        assert!(falsum_concludes_prime(&restricted));
        assert!(alpha_eq(formula_of(&restricted), &target));
    }

    #[test]
    fn falsum_on_existence_of_description() {
        let description = iota("x", pred("P", vec![var("x")]));
        let target = bang(description);
        let d = build(
            RuleTag::BotE,
            target.clone(),
            vec![leaf(Formula::Bot, 1)],
            vec![],
        );
        let restricted = restrict_bot_elim(&d, &SystemConfig::INF_IOTA).expect("intuitionist");
        assert_checks(&restricted, &SystemConfig::INF_IOTA);
        assert!(falsum_concludes_prime(&restricted));
        assert!(alpha_eq(formula_of(&restricted), &target));
    }

    #[test]
    fn vacuous_classical_falsum_is_restricted_like_the_intuitionist_rule() {
        let t = cst("t");
        let target = imp(pred("P", vec![t.clone()]), pred("Q", vec![t]));
        let d = build(
            RuleTag::BotEC,
            target.clone(),
            vec![leaf(Formula::Bot, 2)],
            vec![(Role::Negation, ClassLabel(1))],
        );
        let restricted = restrict_bot_elim(&d, &SystemConfig::CNF).expect("vacuous");
        assert_checks(&restricted, &SystemConfig::CNF);
        assert!(falsum_concludes_prime(&restricted));
        assert!(alpha_eq(formula_of(&restricted), &target));
    }

    #[test]
    fn discharging_classical_falsum_with_complex_conclusion_is_unsupported() {
        let t = cst("t");
        let target = imp(pred("P", vec![t.clone()]), pred("Q", vec![t]));
        let negation = imp(target.clone(), Formula::Bot);
        let d = build(
            RuleTag::BotEC,
            target,
            vec![build(
                RuleTag::ImpE,
                Formula::Bot,
                vec![leaf(negation.clone(), 1), leaf(negation, 2)],
                vec![],
            )],
            vec![(Role::Negation, ClassLabel(1))],
        );
        let err = restrict_bot_elim(&d, &SystemConfig::CNF).expect_err("cannot be restricted");
        assert!(matches!(err, RewriteError::UnsupportedSystem { .. }));
    }

    #[test]
    fn discharging_classical_falsum_with_atomic_conclusion_is_kept() {
        let t = cst("t");
        let s = cst("s");
        let target = eq(t, s);
        let negation = imp(target.clone(), Formula::Bot);
        let d = build(
            RuleTag::BotEC,
            target.clone(),
            vec![build(
                RuleTag::ImpE,
                Formula::Bot,
                vec![leaf(negation.clone(), 1), leaf(target.clone(), 2)],
                vec![],
            )],
            vec![(Role::Negation, ClassLabel(1))],
        );
        assert_checks(&d, &SystemConfig::CNF);
        let restricted = restrict_bot_elim(&d, &SystemConfig::CNF).expect("atomic stays");
        assert_checks(&restricted, &SystemConfig::CNF);
        assert_eq!(restricted.size(), d.size());
    }

    // -- the shared figures -------------------------------------------------

    #[test]
    fn symmetry_figure_checks_in_all_rule_sets() {
        let t = cst("t");
        let s = cst("s");
        for sys in [
            &SystemConfig::INF,
            &SystemConfig::INF_IOTA_PRIME,
            &SystemConfig::INF_J,
        ] {
            let mut names = Names::seeded(&leaf(eq(t.clone(), s.clone()), 1));
            let reversed = symmetry(leaf(eq(t.clone(), s.clone()), 1), sys, &mut names);
            assert_checks(&reversed.relabel(), sys);
            assert!(alpha_eq(formula_of(&reversed), &eq(s.clone(), t.clone())));
        }
    }

    #[test]
    fn denotation_of_a_description_identity_right_side_uses_iota_elim() {
        let t = cst("t");
        let description = iota("x", pred("P", vec![var("x")]));
        let premise = leaf(eq(description.clone(), t.clone()), 1);
        let mut names = Names::seeded(&premise);
        let through_right = denote(premise.clone(), &t, &SystemConfig::INF_IOTA);
        assert_eq!(through_right.rule(), Some(RuleTag::IotaE3));
        assert_checks(&through_right, &SystemConfig::INF_IOTA);
        let through_left = denote(premise, &description, &SystemConfig::INF_IOTA);
        assert_eq!(through_left.rule(), Some(RuleTag::Ad));
        assert_checks(&through_left, &SystemConfig::INF_IOTA);
        let _ = &mut names;
    }

    #[test]
    fn duplicate_refreshes_discharges_and_eigenparameters() {
        // ∀I over an instance on a parameter, inside a tree that also
        // uses the subtree a second time: without renaming, the two
        // copies would share an eigenparameter and a class label.
        let t = cst("t");
        let body = forall("x", pred("P", vec![var("x")]));
        let sub = build(
            RuleTag::AllI,
            body.clone(),
            vec![build(
                RuleTag::AllE,
                pred("P", vec![par("a")]),
                vec![leaf(body.clone(), 1), leaf(bang(par("a")), 2)],
                vec![],
            )],
            vec![(Role::WitnessExistence, ClassLabel(2))],
        );
        assert_checks(&sub, &SystemConfig::INF);
        let mut names = Names::seeded(&sub);
        let copy = duplicate(&sub, &mut names);
        let pair = build(
            RuleTag::AndI,
            and(body.clone(), body),
            vec![sub, copy],
            vec![],
        );
        assert_checks(&pair, &SystemConfig::INF);
        let _ = t;
    }

    // -- identity-family purge ---------------------------------------------

    fn assert_no_identity_family(d: &Deduction, sys: &SystemConfig) {
        let leftover: Vec<_> = find_maximal(d, sys)
            .into_iter()
            .filter(|m| {
                matches!(
                    m.species,
                    Species::Identity | Species::Existence | Species::EqElim
                )
            })
            .collect();
        assert!(leftover.is_empty(), "identity-family residue: {leftover:?}");
    }

    fn assert_purged(d: &Deduction, sys: &SystemConfig) -> Deduction {
        assert_checks(d, sys);
        let purged = purge_identity_maximals(d, sys);
        assert_checks(&purged, sys);
        assert!(crate::deduction::alpha_eq_judgment(
            purged.conclusion(),
            d.conclusion()
        ));
        assert_no_identity_family(&purged, sys);
        assert!(
            alpha_isomorphic(&purge_identity_maximals(&purged, sys), &purged),
            "purge must be idempotent"
        );
        purged
    }

    #[test]
    fn purge_removes_identity_round_trip() {
        // ∃!t up to t = t and back down to ∃!t: both steps vanish.
        let t = cst("t");
        let inner = build(
            RuleTag::Ad,
            bang(t.clone()),
            vec![leaf(pred("P", vec![t.clone()]), 1)],
            vec![],
        );
        let d = build(
            RuleTag::Ad,
            bang(t.clone()),
            vec![build(RuleTag::EqIn, eq(t.clone(), t.clone()), vec![inner.clone()], vec![])],
            vec![],
        );
        let purged = assert_purged(&d, &SystemConfig::INF);
        assert!(alpha_isomorphic(&purged, &inner));
    }

    #[test]
    fn purge_removes_existence_round_trip() {
        // t = t up to ∃!t and back down to t = t.
        let t = cst("t");
        let d = build(
            RuleTag::EqIn,
            eq(t.clone(), t.clone()),
            vec![build(
                RuleTag::Ad,
                bang(t.clone()),
                vec![leaf(eq(t.clone(), t.clone()), 1)],
                vec![],
            )],
            vec![],
        );
        let purged = assert_purged(&d, &SystemConfig::INF);
        assert!(alpha_isomorphic(&purged, &leaf(eq(t.clone(), t), 1)));
    }

    #[test]
    fn purge_reroutes_identity_stretched_through_cases() {
        // Both case branches conclude t = t via the identity
        // introduction, and the cases node feeds the denotation rule: the
        // rerouted cases node concludes ∃!t directly, each branch falling
        // back to its own existence premise.
        let t = cst("t");
        let branch = |p: &str, label: u32| {
            build(
                RuleTag::EqIn,
                eq(t.clone(), t.clone()),
                vec![build(
                    RuleTag::Ad,
                    bang(t.clone()),
                    vec![leaf(pred(p, vec![t.clone()]), label)],
                    vec![],
                )],
                vec![],
            )
        };
        let cases = build(
            RuleTag::OrE,
            eq(t.clone(), t.clone()),
            vec![
                leaf(
                    or(pred("P", vec![t.clone()]), pred("Q", vec![t.clone()])),
                    1,
                ),
                branch("P", 2),
                branch("Q", 3),
            ],
            vec![(Role::CaseLeft, ClassLabel(2)), (Role::CaseRight, ClassLabel(3))],
        );
        let d = build(RuleTag::Ad, bang(t.clone()), vec![cases], vec![]);
        let purged = assert_purged(&d, &SystemConfig::INF);
        assert_eq!(purged.rule(), Some(RuleTag::OrE));
        assert!(alpha_eq(formula_of(&purged), &bang(t.clone())));
        for minor in &purged.premises()[1..] {
            assert_eq!(minor.rule(), Some(RuleTag::Ad));
        }
    }

    #[test]
    fn purge_collapses_identity_chain_into_denotation() {
        // P(t), rewritten to P(k) by t = k, feeds the denotation rule for
        // ∃!k — but t = k itself already witnesses that k denotes.
        let t = cst("t");
        let k = cst("k");
        let d = build(
            RuleTag::Ad,
            bang(k.clone()),
            vec![build(
                RuleTag::EqE,
                pred("P", vec![k.clone()]),
                vec![
                    leaf(eq(t.clone(), k.clone()), 1),
                    leaf(pred("P", vec![t.clone()]), 2),
                ],
                vec![],
            )],
            vec![],
        );
        let purged = assert_purged(&d, &SystemConfig::INF);
        assert!(alpha_isomorphic(&purged, &build(
            RuleTag::Ad,
            bang(k.clone()),
            vec![leaf(eq(t, k), 1)],
            vec![],
        )));
    }

    #[test]
    fn purge_collapses_existence_chain() {
        // ∃!t rewritten to ∃!s by t = s: the identity already witnesses
        // that s denotes, without the detour through ∃!t.
        let t = cst("t");
        let s = cst("s");
        let d = build(
            RuleTag::EqE,
            bang(s.clone()),
            vec![leaf(eq(t.clone(), s.clone()), 1), leaf(bang(t.clone()), 2)],
            vec![],
        );
        let purged = assert_purged(&d, &SystemConfig::INF);
        assert!(alpha_isomorphic(&purged, &build(
            RuleTag::Ad,
            bang(s.clone()),
            vec![leaf(eq(t, s), 1)],
            vec![],
        )));
    }

    #[test]
    fn purge_replaces_class_assumption_with_generalised_major() {
        // A class assumption a = t fed straight to the denotation rule
        // inside the minor of the generalised identity introduction whose
        // major is ∃!t: the major replaces the round trip.
        let t = cst("t");
        let d = build(
            RuleTag::EqInG,
            bang(t.clone()),
            vec![
                leaf(bang(t.clone()), 9),
                build(
                    RuleTag::Ad,
                    bang(t.clone()),
                    vec![leaf(eq(par("a"), t.clone()), 1)],
                    vec![],
                ),
            ],
            vec![(Role::Id, ClassLabel(1))],
        );
        let purged = assert_purged(&d, &SystemConfig::INF_IOTA_PRIME);
        assert_eq!(purged.rule(), Some(RuleTag::EqInG));
        assert!(alpha_isomorphic(&purged.premises()[1], &leaf(bang(t), 9)));
    }

    #[test]
    fn purge_drops_generalised_introduction_round_trip() {
        // ∃!t generalised up to t = t and handed back to the denotation
        // rule: the whole figure collapses to the major premise.
        let t = cst("t");
        let assumed = || leaf(eq(par("a"), t.clone()), 1);
        let d = build(
            RuleTag::Ad,
            bang(t.clone()),
            vec![build(
                RuleTag::EqInG,
                eq(t.clone(), t.clone()),
                vec![
                    leaf(bang(t.clone()), 9),
                    build(
                        RuleTag::EqE,
                        eq(t.clone(), t.clone()),
                        vec![assumed(), assumed()],
                        vec![],
                    ),
                ],
                vec![(Role::Id, ClassLabel(1))],
            )],
            vec![],
        );
        let purged = assert_purged(&d, &SystemConfig::INF_IOTA_PRIME);
        assert!(alpha_isomorphic(&purged, &leaf(bang(t), 9)));
    }

    #[test]
    fn purge_removes_existence_feeding_generalised_introduction() {
        // t = t up to ∃!t, consumed as the major of a generalised
        // introduction that re-concludes t = t.
        let t = cst("t");
        let assumed = || leaf(eq(par("a"), t.clone()), 2);
        let d = build(
            RuleTag::EqInG,
            eq(t.clone(), t.clone()),
            vec![
                build(
                    RuleTag::Ad,
                    bang(t.clone()),
                    vec![leaf(eq(t.clone(), t.clone()), 1)],
                    vec![],
                ),
                build(
                    RuleTag::EqE,
                    eq(t.clone(), t.clone()),
                    vec![assumed(), assumed()],
                    vec![],
                ),
            ],
            vec![(Role::Id, ClassLabel(2))],
        );
        let purged = assert_purged(&d, &SystemConfig::INF_IOTA_PRIME);
        assert!(alpha_isomorphic(&purged, &leaf(eq(t.clone(), t), 1)));
    }

    #[test]
    fn purge_handles_term_judgment_round_trips() {
        let sys = SystemConfig::INF_J;
        let t = cst("t");
        let term_leaf = Deduction::assume(Judgment::Term(t.clone()), ClassLabel(1));
        let identity_trip = Deduction::infer(
            RuleTag::AdJ,
            Judgment::Term(t.clone()),
            vec![build(
                RuleTag::EqInJ,
                eq(t.clone(), t.clone()),
                vec![term_leaf.clone()],
                vec![],
            )],
            vec![],
        );
        let purged = assert_purged(&identity_trip, &sys);
        assert!(alpha_isomorphic(&purged, &term_leaf));

        let existence_trip = build(
            RuleTag::EqInJ,
            eq(t.clone(), t.clone()),
            vec![Deduction::infer(
                RuleTag::AdJ,
                Judgment::Term(t.clone()),
                vec![leaf(eq(t.clone(), t.clone()), 1)],
                vec![],
            )],
            vec![],
        );
        let purged = assert_purged(&existence_trip, &sys);
        assert!(alpha_isomorphic(&purged, &leaf(eq(t.clone(), t), 1)));
    }

    // -- detour contractions and permutations ------------------------------

    fn contract(d: &Deduction, sys: &SystemConfig, position: &[usize]) -> (Deduction, Procedure) {
        assert_checks(d, sys);
        let (reduced, procedure) = contract_at(d, position).expect("contraction applies");
        assert_checks(&reduced.relabel(), sys);
        assert!(crate::deduction::alpha_eq_judgment(
            reduced.conclusion(),
            d.conclusion()
        ));
        (reduced, procedure)
    }

    #[test]
    fn conjunction_detour_contracts_to_a_conjunct() {
        let t = cst("t");
        let p = pred("P", vec![t.clone()]);
        let q = pred("Q", vec![t.clone()]);
        let intro = build(
            RuleTag::AndI,
            and(p.clone(), q.clone()),
            vec![leaf(p.clone(), 1), leaf(q.clone(), 2)],
            vec![],
        );
        let left = build(RuleTag::AndEl, p.clone(), vec![intro.clone()], vec![]);
        let (reduced, procedure) = contract(&left, &SystemConfig::INF, &[]);
        assert_eq!(procedure, Procedure::DetourAnd);
        assert!(alpha_isomorphic(&reduced, &leaf(p, 1)));
        let right = build(RuleTag::AndEr, q.clone(), vec![intro], vec![]);
        let (reduced, _) = contract(&right, &SystemConfig::INF, &[]);
        assert!(alpha_isomorphic(&reduced, &leaf(q, 2)));
    }

    #[test]
    fn implication_detour_grafts_the_minor_into_the_antecedent_class() {
        let t = cst("t");
        let p = pred("P", vec![t.clone()]);
        let q = pred("Q", vec![t.clone()]);
        let body = build(
            RuleTag::ImpE,
            q.clone(),
            vec![leaf(imp(p.clone(), q.clone()), 1), leaf(p.clone(), 2)],
            vec![],
        );
        let intro = build(
            RuleTag::ImpI,
            imp(p.clone(), q.clone()),
            vec![body],
            vec![(Role::Antecedent, ClassLabel(2))],
        );
        let d = build(
            RuleTag::ImpE,
            q.clone(),
            vec![intro, leaf(p.clone(), 3)],
            vec![],
        );
        let (reduced, procedure) = contract(&d, &SystemConfig::INF, &[]);
        assert_eq!(procedure, Procedure::DetourImp);
        assert!(alpha_isomorphic(
            &reduced,
            &build(
                RuleTag::ImpE,
                q,
                vec![leaf(imp(p.clone(), q2(&t)), 1), leaf(p, 3)],
                vec![],
            )
        ));
    }

    fn q2(t: &Term) -> Formula {
        pred("Q", vec![t.clone()])
    }

    #[test]
    fn disjunction_detour_keeps_the_matching_case() {
        let t = cst("t");
        let p = pred("P", vec![t.clone()]);
        let q = pred("Q", vec![t.clone()]);
        let both = or(p.clone(), q.clone());
        let major = build(RuleTag::OrIl, both.clone(), vec![leaf(p.clone(), 1)], vec![]);
        let d = build(
            RuleTag::OrE,
            both.clone(),
            vec![
                major,
                build(RuleTag::OrIl, both.clone(), vec![leaf(p.clone(), 2)], vec![]),
                build(RuleTag::OrIr, both.clone(), vec![leaf(q.clone(), 3)], vec![]),
            ],
            vec![(Role::CaseLeft, ClassLabel(2)), (Role::CaseRight, ClassLabel(3))],
        );
        let (reduced, procedure) = contract(&d, &SystemConfig::INF, &[]);
        assert_eq!(procedure, Procedure::DetourOr);
        assert!(alpha_isomorphic(
            &reduced,
            &build(RuleTag::OrIl, both, vec![leaf(p, 1)], vec![])
        ));
    }

    #[test]
    fn universal_detour_substitutes_the_instantiating_term() {
        let t = cst("t");
        let all = forall("x", pred("P", vec![var("x")]));
        let intro = build(
            RuleTag::AllI,
            all.clone(),
            vec![build(
                RuleTag::AllE,
                pred("P", vec![par("a")]),
                vec![leaf(all.clone(), 1), leaf(bang(par("a")), 2)],
                vec![],
            )],
            vec![(Role::WitnessExistence, ClassLabel(2))],
        );
        let d = build(
            RuleTag::AllE,
            pred("P", vec![t.clone()]),
            vec![intro, leaf(bang(t.clone()), 3)],
            vec![],
        );
        let (reduced, procedure) = contract(&d, &SystemConfig::INF, &[]);
        assert_eq!(procedure, Procedure::DetourForall);
        assert!(alpha_isomorphic(
            &reduced,
            &build(
                RuleTag::AllE,
                pred("P", vec![t.clone()]),
                vec![leaf(all, 1), leaf(bang(t), 3)],
                vec![],
            )
        ));
    }

    #[test]
    fn existential_detour_replaces_the_witness() {
        let t = cst("t");
        let some = exists("x", pred("P", vec![var("x")]));
        let major = build(
            RuleTag::ExI,
            some.clone(),
            vec![leaf(pred("P", vec![t.clone()]), 1), leaf(bang(t.clone()), 2)],
            vec![],
        );
        let minor = build(
            RuleTag::ExI,
            some.clone(),
            vec![leaf(pred("P", vec![par("b")]), 3), leaf(bang(par("b")), 4)],
            vec![],
        );
        let d = build(
            RuleTag::ExE,
            some.clone(),
            vec![major.clone(), minor],
            vec![
                (Role::WitnessFormula, ClassLabel(3)),
                (Role::WitnessExistence, ClassLabel(4)),
            ],
        );
        let (reduced, procedure) = contract(&d, &SystemConfig::INF, &[]);
        assert_eq!(procedure, Procedure::DetourExists);
        assert!(alpha_isomorphic(&reduced, &major));
    }

    /// A description introduction for ιx(x = t): the instance premise and
    /// the coherence premise are single class assumptions.
    fn description_intro(t: &Term) -> Deduction {
        build(
            RuleTag::IotaI,
            eq(iota("x", eq(var("x"), t.clone())), t.clone()),
            vec![
                leaf(bang(t.clone()), 1),
                leaf(eq(par("a"), t.clone()), 5),
                leaf(eq(par("a"), t.clone()), 6),
            ],
            vec![
                (Role::Id, ClassLabel(5)),
                (Role::WitnessFormula, ClassLabel(6)),
                (Role::WitnessExistence, ClassLabel(7)),
            ],
        )
    }

    #[test]
    fn description_detours_contract_to_the_introduction_premises() {
        let sys = SystemConfig::INF_IOTA_PRIME;
        let t = cst("t");
        let s = cst("s");
        let intro = description_intro(&t);
        assert_checks(&intro, &sys);

        let first = build(
            RuleTag::IotaE1,
            eq(s.clone(), t.clone()),
            vec![intro.clone(), leaf(eq(s.clone(), t.clone()), 8)],
            vec![],
        );
        let (reduced, procedure) = contract(&first, &sys, &[]);
        assert_eq!(procedure, Procedure::DetourIota1);
        assert!(alpha_isomorphic(&reduced, &leaf(eq(s.clone(), t.clone()), 8)));

        let second = build(
            RuleTag::IotaE2,
            eq(s.clone(), t.clone()),
            vec![
                intro.clone(),
                leaf(eq(s.clone(), t.clone()), 8),
                leaf(bang(s.clone()), 9),
            ],
            vec![],
        );
        let (reduced, procedure) = contract(&second, &sys, &[]);
        assert_eq!(procedure, Procedure::DetourIota2);
        assert!(alpha_isomorphic(&reduced, &leaf(eq(s, t.clone()), 8)));

        let third = build(RuleTag::IotaE3, bang(t.clone()), vec![intro], vec![]);
        let (reduced, procedure) = contract(&third, &sys, &[]);
        assert_eq!(procedure, Procedure::DetourIota3);
        assert!(alpha_isomorphic(&reduced, &leaf(bang(t), 1)));
    }

    #[test]
    fn non_detours_are_rejected() {
        let t = cst("t");
        let p = pred("P", vec![t.clone()]);
        let d = build(
            RuleTag::AndEl,
            p.clone(),
            vec![leaf(and(p.clone(), p.clone()), 1)],
            vec![],
        );
        assert!(matches!(
            contract_at(&d, &[]),
            Err(RewriteError::NotARedex { .. })
        ));
        assert!(matches!(
            contract_at(&d, &[4]),
            Err(RewriteError::NotARedex { .. })
        ));
        let redex = Redex {
            position: vec![],
            procedure: Procedure::DetourAnd,
            species: Species::IntroElim,
        };
        assert!(detour_reduce(&d, &redex).is_err());
    }

    #[test]
    fn permutation_pushes_the_elimination_into_both_cases() {
        let t = cst("t");
        let p = pred("P", vec![t.clone()]);
        let q = pred("Q", vec![t.clone()]);
        let conj = and(p.clone(), q.clone());
        let cases = build(
            RuleTag::OrE,
            conj.clone(),
            vec![
                leaf(or(conj.clone(), conj.clone()), 1),
                leaf(conj.clone(), 2),
                leaf(conj.clone(), 3),
            ],
            vec![(Role::CaseLeft, ClassLabel(2)), (Role::CaseRight, ClassLabel(3))],
        );
        let d = build(RuleTag::AndEl, p.clone(), vec![cases], vec![]);
        assert_checks(&d, &SystemConfig::INF);
        let (permuted, procedure) = permute_at(&d, &[]).expect("permutation applies");
        assert_eq!(procedure, Procedure::PermuteOrE);
        let permuted = permuted.relabel();
        assert_checks(&permuted, &SystemConfig::INF);
        assert_eq!(permuted.rule(), Some(RuleTag::OrE));
        assert!(alpha_eq(formula_of(&permuted), &p));
        for minor in &permuted.premises()[1..] {
            assert_eq!(minor.rule(), Some(RuleTag::AndEl));
        }
        assert!(find_maximal(&permuted, &SystemConfig::INF).is_empty());
    }

    #[test]
    fn permutation_pushes_through_witness_extraction() {
        let t = cst("t");
        let p = pred("P", vec![t.clone()]);
        let q = pred("Q", vec![t.clone()]);
        let conj = and(p.clone(), q.clone());
        let extraction = build(
            RuleTag::ExE,
            conj.clone(),
            vec![leaf(exists("x", conj.clone()), 1), leaf(conj.clone(), 2)],
            vec![
                (Role::WitnessFormula, ClassLabel(2)),
                (Role::WitnessExistence, ClassLabel(3)),
            ],
        );
        let d = build(RuleTag::AndEl, p.clone(), vec![extraction], vec![]);
        assert_checks(&d, &SystemConfig::INF);
        let (permuted, procedure) = permute_at(&d, &[]).expect("permutation applies");
        assert_eq!(procedure, Procedure::PermuteExE);
        assert_checks(&permuted.relabel(), &SystemConfig::INF);
        assert_eq!(permuted.rule(), Some(RuleTag::ExE));
        assert!(alpha_eq(formula_of(&permuted), &p));
    }

    #[test]
    fn permutation_pushes_through_generalised_identity() {
        let sys = SystemConfig::INF_IOTA_PRIME;
        let t = cst("t");
        let p = pred("P", vec![t.clone()]);
        let q = pred("Q", vec![t.clone()]);
        let conj = and(p.clone(), q.clone());
        let generalised = build(
            RuleTag::EqInG,
            conj.clone(),
            vec![leaf(bang(t.clone()), 1), leaf(conj.clone(), 2)],
            vec![(Role::Id, ClassLabel(3))],
        );
        let d = build(RuleTag::AndEl, p.clone(), vec![generalised], vec![]);
        assert_checks(&d, &sys);
        let (permuted, procedure) = permute_at(&d, &[]).expect("permutation applies");
        assert_eq!(procedure, Procedure::PermuteGenI);
        assert_checks(&permuted.relabel(), &sys);
        assert_eq!(permuted.rule(), Some(RuleTag::EqInG));
        assert!(alpha_eq(formula_of(&permuted), &p));
    }

    #[test]
    fn vacuous_case_analysis_keeps_the_unused_branch() {
        let t = cst("t");
        let a = pred("A", vec![t.clone()]);
        let b = pred("B", vec![t.clone()]);
        let c = pred("C", vec![t.clone()]);
        // Neither case assumption is used: the left branch wins.
        let both_unused = build(
            RuleTag::OrE,
            c.clone(),
            vec![leaf(or(a.clone(), b.clone()), 1), leaf(c.clone(), 4), leaf(c.clone(), 5)],
            vec![(Role::CaseLeft, ClassLabel(2)), (Role::CaseRight, ClassLabel(3))],
        );
        assert_checks(&both_unused, &SystemConfig::INF);
        let simplified = simplify_vacuous(&both_unused);
        assert!(alpha_isomorphic(&simplified, &leaf(c.clone(), 1)));
        // Only the right case assumption is used: the left branch still
        // derives the conclusion on its own and is kept.
        let left_unused = build(
            RuleTag::OrE,
            b.clone(),
            vec![leaf(or(a.clone(), b.clone()), 1), leaf(b.clone(), 4), leaf(b.clone(), 3)],
            vec![(Role::CaseLeft, ClassLabel(2)), (Role::CaseRight, ClassLabel(3))],
        );
        assert_checks(&left_unused, &SystemConfig::INF);
        let simplified = simplify_vacuous(&left_unused);
        assert!(alpha_isomorphic(&simplified, &leaf(b.clone(), 1)));
        // Both case assumptions are used: nothing to simplify.
        let both_used = build(
            RuleTag::OrE,
            or(a.clone(), b.clone()),
            vec![
                leaf(or(a.clone(), b.clone()), 1),
                build(RuleTag::OrIl, or(a.clone(), b.clone()), vec![leaf(a.clone(), 2)], vec![]),
                build(RuleTag::OrIr, or(a.clone(), b.clone()), vec![leaf(b.clone(), 3)], vec![]),
            ],
            vec![(Role::CaseLeft, ClassLabel(2)), (Role::CaseRight, ClassLabel(3))],
        );
        assert_checks(&both_used, &SystemConfig::INF);
        assert!(alpha_isomorphic(&simplify_vacuous(&both_used), &both_used));
    }

    #[test]
    fn vacuous_witness_extraction_keeps_the_minor() {
        let t = cst("t");
        let p = pred("P", vec![t.clone()]);
        let c = pred("C", vec![t.clone()]);
        let d = build(
            RuleTag::ExE,
            c.clone(),
            vec![leaf(exists("x", p.clone()), 1), leaf(c.clone(), 2)],
            vec![
                (Role::WitnessFormula, ClassLabel(3)),
                (Role::WitnessExistence, ClassLabel(4)),
            ],
        );
        assert_checks(&d, &SystemConfig::INF);
        assert!(alpha_isomorphic(&simplify_vacuous(&d), &leaf(c, 1)));
    }

    #[test]
    fn regularization_wraps_naked_classical_assumptions() {
        let sys = SystemConfig::CNF_IOTA_PRIME;
        let t = cst("t");
        let c = pred("P", vec![t.clone()]);
        let negation = imp(c.clone(), Formula::Bot);
        // The ¬P(t) assumption of the classical falsum class stands as
        // the *minor* premise of →E — not regular.
        let falsum = build(
            RuleTag::ImpE,
            Formula::Bot,
            vec![
                leaf(imp(negation.clone(), Formula::Bot), 2),
                leaf(negation.clone(), 1),
            ],
            vec![],
        );
        let d = build(
            RuleTag::BotEC,
            c.clone(),
            vec![falsum],
            vec![(Role::Negation, ClassLabel(1))],
        );
        assert_checks(&d, &sys);
        let regular = regularize(&d, &sys).expect("classical description system");
        assert_checks(&regular, &sys);
        assert!(crate::deduction::alpha_eq_judgment(
            regular.conclusion(),
            d.conclusion()
        ));
        // The wrapped leaf now sits in →E-major position, one wrapper
        // deep, and a second pass changes nothing.
        assert_eq!(regular.size(), d.size() + 3);
        let again = regularize(&regular, &sys).expect("classical description system");
        assert!(alpha_isomorphic(&again, &regular));
        // Already-regular deductions are untouched.
        let regular_input = build(
            RuleTag::BotEC,
            c.clone(),
            vec![build(
                RuleTag::ImpE,
                Formula::Bot,
                vec![leaf(negation.clone(), 1), leaf(c.clone(), 2)],
                vec![],
            )],
            vec![(Role::Negation, ClassLabel(1))],
        );
        assert_checks(&regular_input, &sys);
        let untouched = regularize(&regular_input, &sys).expect("classical description system");
        assert!(alpha_isomorphic(&untouched, &regular_input));
        assert!(matches!(
            regularize(&d, &SystemConfig::INF),
            Err(RewriteError::UnsupportedSystem { .. })
        ));
    }

    #[test]
    fn purge_removes_vacuous_identity_elimination() {
        // An =E whose major premise is t = t rewrites nothing.
        let t = cst("t");
        let d = build(
            RuleTag::EqE,
            pred("P", vec![t.clone()]),
            vec![
                leaf(eq(t.clone(), t.clone()), 1),
                leaf(pred("P", vec![t.clone()]), 2),
            ],
            vec![],
        );
        let purged = assert_purged(&d, &SystemConfig::INF);
        assert!(alpha_isomorphic(&purged, &leaf(pred("P", vec![t]), 1)));
    }

    // -- classical reductions ----------------------------------------------

    fn classical(d: &Deduction, position: &[usize]) -> (Deduction, Procedure) {
        let sys = SystemConfig::CNF_IOTA_PRIME;
        assert_checks(d, &sys);
        let (reduced, procedure) = classical_at(d, &sys, position).expect("reduction applies");
        assert_checks(&reduced.relabel(), &sys);
        assert!(crate::deduction::alpha_eq_judgment(
            reduced.conclusion(),
            d.conclusion()
        ));
        (reduced, procedure)
    }

    /// `¬A`, spelled as the systems do.
    fn neg(f: Formula) -> Formula {
        imp(f, Formula::Bot)
    }

    #[test]
    fn classical_denotation_uses_the_discharged_minor() {
        let t = cst("t");
        let p = pred("P", vec![t.clone()]);
        let falsum = build(
            RuleTag::ImpE,
            Formula::Bot,
            vec![leaf(neg(p.clone()), 1), leaf(p.clone(), 2)],
            vec![],
        );
        let d = build(
            RuleTag::Ad,
            bang(t.clone()),
            vec![build(
                RuleTag::BotEC,
                p.clone(),
                vec![falsum],
                vec![(Role::Negation, ClassLabel(1))],
            )],
            vec![],
        );
        let (reduced, procedure) = classical(&d, &[]);
        assert_eq!(procedure, Procedure::ClassicalAd);
        assert!(alpha_isomorphic(
            &reduced,
            &build(RuleTag::Ad, bang(t), vec![leaf(p, 2)], vec![])
        ));
    }

    #[test]
    fn classical_denotation_on_a_vacuous_falsum_derives_from_bottom() {
        let t = cst("t");
        let p = pred("P", vec![t.clone()]);
        let q = pred("Q", vec![t.clone()]);
        let falsum = build(
            RuleTag::ImpE,
            Formula::Bot,
            vec![leaf(neg(q.clone()), 2), leaf(q.clone(), 3)],
            vec![],
        );
        let vacuous = build(
            RuleTag::BotEC,
            p.clone(),
            vec![falsum.clone()],
            vec![(Role::Negation, ClassLabel(1))],
        );
        let d = build(RuleTag::Ad, bang(t.clone()), vec![vacuous], vec![]);
        let (reduced, _) = classical(&d, &[]);
        assert!(alpha_isomorphic(
            &reduced,
            &build(RuleTag::BotE, bang(t.clone()), vec![falsum], vec![])
        ));

        let plain = build(
            RuleTag::Ad,
            bang(t.clone()),
            vec![build(RuleTag::BotE, p, vec![leaf(Formula::Bot, 1)], vec![])],
            vec![],
        );
        let (reduced, _) = classical(&plain, &[]);
        assert!(alpha_isomorphic(
            &reduced,
            &build(RuleTag::BotE, bang(t), vec![leaf(Formula::Bot, 1)], vec![])
        ));
    }

    #[test]
    fn classical_description_existence_folds_a_fresh_detour() {
        // The discharged class's minor ends in the description
        // introduction; its existence premise is reused outright.
        let t = cst("t");
        let identity = eq(iota("x", eq(var("x"), t.clone())), t.clone());
        let xi = description_intro(&t);
        let falsum = build(
            RuleTag::ImpE,
            Formula::Bot,
            vec![leaf(neg(identity.clone()), 8), xi],
            vec![],
        );
        let d = build(
            RuleTag::IotaE3,
            bang(t.clone()),
            vec![build(
                RuleTag::BotEC,
                identity,
                vec![falsum],
                vec![(Role::Negation, ClassLabel(8))],
            )],
            vec![],
        );
        let (reduced, procedure) = classical(&d, &[]);
        assert_eq!(procedure, Procedure::ClassicalIota3);
        assert!(alpha_isomorphic(&reduced, &leaf(bang(t), 1)));
    }

    #[test]
    fn classical_description_elimination_is_permuted_above_the_falsum() {
        let t = cst("t");
        let s = cst("s");
        let identity = eq(iota("x", eq(var("x"), t.clone())), t.clone());
        let falsum = build(
            RuleTag::ImpE,
            Formula::Bot,
            vec![leaf(neg(identity.clone()), 1), leaf(identity.clone(), 2)],
            vec![],
        );
        let major = build(
            RuleTag::BotEC,
            identity.clone(),
            vec![falsum],
            vec![(Role::Negation, ClassLabel(1))],
        );
        let first = build(
            RuleTag::IotaE1,
            eq(s.clone(), t.clone()),
            vec![major.clone(), leaf(eq(s.clone(), t.clone()), 3)],
            vec![],
        );
        let (reduced, procedure) = classical(&first, &[]);
        assert_eq!(procedure, Procedure::ClassicalIota1);
        assert_eq!(reduced.rule(), Some(RuleTag::BotEC));
        let inner = &reduced.premises()[0];
        assert_eq!(inner.rule(), Some(RuleTag::ImpE));
        assert_eq!(inner.premises()[1].rule(), Some(RuleTag::IotaE1));

        let second = build(
            RuleTag::IotaE2,
            eq(s.clone(), t.clone()),
            vec![
                major,
                leaf(eq(s.clone(), t.clone()), 3),
                leaf(bang(s.clone()), 4),
            ],
            vec![],
        );
        let (reduced, procedure) = classical(&second, &[]);
        assert_eq!(procedure, Procedure::ClassicalIota2);
        assert_eq!(reduced.rule(), Some(RuleTag::BotEC));
        assert_eq!(
            reduced.premises()[0].premises()[1].rule(),
            Some(RuleTag::IotaE2)
        );
    }

    #[test]
    fn classical_falsum_is_lowered_through_complex_conclusions() {
        let t = cst("t");
        let s = cst("s");
        // ιx(P(x) → Q(x)): the permuted elimination concludes an
        // implication, which the classical falsum cannot conclude
        // directly — it is lowered to the consequent.
        let body = imp(pred("P", vec![var("x")]), pred("Q", vec![var("x")]));
        let identity = eq(iota("x", body.clone()), t.clone());
        let falsum = build(
            RuleTag::ImpE,
            Formula::Bot,
            vec![leaf(neg(identity.clone()), 1), leaf(identity.clone(), 2)],
            vec![],
        );
        let major = build(
            RuleTag::BotEC,
            identity.clone(),
            vec![falsum],
            vec![(Role::Negation, ClassLabel(1))],
        );
        let d = build(
            RuleTag::IotaE1,
            imp(pred("P", vec![s.clone()]), pred("Q", vec![s.clone()])),
            vec![major.clone(), leaf(eq(s.clone(), t.clone()), 3)],
            vec![],
        );
        let (reduced, _) = classical(&d, &[]);
        assert_eq!(reduced.rule(), Some(RuleTag::ImpI));
        assert_eq!(reduced.premises()[0].rule(), Some(RuleTag::BotEC));

        // ιx ∀y R(x, y): lowered to a fresh instance and re-generalised.
        let all_body = forall("y", pred("R", vec![var("x"), var("y")]));
        let all_identity = eq(iota("x", all_body.clone()), t.clone());
        let all_falsum = build(
            RuleTag::ImpE,
            Formula::Bot,
            vec![leaf(neg(all_identity.clone()), 1), leaf(all_identity.clone(), 2)],
            vec![],
        );
        let all_major = build(
            RuleTag::BotEC,
            all_identity.clone(),
            vec![all_falsum],
            vec![(Role::Negation, ClassLabel(1))],
        );
        let d = build(
            RuleTag::IotaE1,
            forall("y", pred("R", vec![s.clone(), var("y")])),
            vec![all_major, leaf(eq(s.clone(), t.clone()), 3)],
            vec![],
        );
        let (reduced, _) = classical(&d, &[]);
        assert_eq!(reduced.rule(), Some(RuleTag::AllI));
        assert_eq!(reduced.premises()[0].rule(), Some(RuleTag::BotEC));
    }

    #[test]
    fn classical_reduction_requires_the_classical_description_system() {
        let t = cst("t");
        let d = build(
            RuleTag::Ad,
            bang(t.clone()),
            vec![leaf(pred("P", vec![t]), 1)],
            vec![],
        );
        assert!(matches!(
            classical_at(&d, &SystemConfig::INF, &[]),
            Err(RewriteError::UnsupportedSystem { .. })
        ));
        assert!(matches!(
            classical_at(&d, &SystemConfig::CNF_IOTA_PRIME, &[]),
            Err(RewriteError::NotARedex { .. })
        ));
    }

    // -- the driver ---------------------------------------------------------

    #[test]
    fn conjunction_detour_normalizes_in_one_traced_step() {
        let sys = SystemConfig::INF;
        let p = pred("P", vec![]);
        let q = pred("Q", vec![]);
        let d = build(
            RuleTag::AndEl,
            p.clone(),
            vec![build(
                RuleTag::AndI,
                and(p.clone(), q.clone()),
                vec![leaf(p.clone(), 1), leaf(q, 2)],
                vec![],
            )],
            vec![],
        );
        assert_checks(&d, &sys);
        let (normal, trace) = normalize(&d, &sys).expect("normalizes");
        assert_checks(&normal, &sys);
        assert!(alpha_isomorphic(&normal, &leaf(p, 1)));
        assert_eq!(trace.len(), 1);
        assert_eq!(trace[0].procedure, Procedure::DetourAnd);
        assert_eq!(
            trace[0].rank_before,
            Rank {
                degree: 1,
                length: 1
            }
        );
        assert_eq!(trace[0].rank_after, Rank::ZERO);
    }

    #[test]
    fn stretched_witness_detour_is_permuted_then_contracted() {
        let sys = SystemConfig::INF;
        let exists_p = exists("x", pred("P", vec![var("x")]));
        let exists_q = exists("y", pred("Q", vec![var("y")]));
        let intro = build(
            RuleTag::ExI,
            exists_p.clone(),
            vec![leaf(pred("P", vec![cst("k")]), 1), leaf(bang(cst("k")), 2)],
            vec![],
        );
        let stretcher = build(
            RuleTag::ExE,
            exists_p,
            vec![leaf(exists_q.clone(), 3), intro],
            vec![
                (Role::WitnessFormula, ClassLabel(4)),
                (Role::WitnessExistence, ClassLabel(5)),
            ],
        );
        let goal = pred("R", vec![]);
        let d = build(
            RuleTag::ExE,
            goal.clone(),
            vec![stretcher, leaf(goal.clone(), 6)],
            vec![
                (Role::WitnessFormula, ClassLabel(7)),
                (Role::WitnessExistence, ClassLabel(8)),
            ],
        );
        assert_checks(&d, &sys);
        let (normal, trace) = normalize(&d, &sys).expect("normalizes");
        assert_checks(&normal, &sys);
        let moves: Vec<(Procedure, Rank, Rank)> = trace
            .iter()
            .map(|s| (s.procedure, s.rank_before, s.rank_after))
            .collect();
        assert_eq!(
            moves,
            vec![
                (
                    Procedure::PermuteExE,
                    Rank {
                        degree: 2,
                        length: 2
                    },
                    Rank {
                        degree: 2,
                        length: 1
                    }
                ),
                (
                    Procedure::DetourExists,
                    Rank {
                        degree: 2,
                        length: 1
                    },
                    Rank::ZERO
                ),
            ]
        );
        // The vacuous witness extraction over the untouched major stays.
        let expected = build(
            RuleTag::ExE,
            goal.clone(),
            vec![leaf(exists_q, 1), leaf(goal, 2)],
            vec![
                (Role::WitnessFormula, ClassLabel(3)),
                (Role::WitnessExistence, ClassLabel(4)),
            ],
        );
        assert!(alpha_isomorphic(&normal, &expected));
    }

    #[test]
    fn normal_deductions_come_back_unchanged_with_an_empty_trace() {
        let p = pred("P", vec![]);
        let q = pred("Q", vec![]);
        let d = build(
            RuleTag::ImpE,
            q.clone(),
            vec![leaf(imp(p.clone(), q), 1), leaf(p, 2)],
            vec![],
        );
        let (normal, trace) = normalize(&d, &SystemConfig::INF).expect("already normal");
        assert!(trace.is_empty());
        assert!(alpha_isomorphic(&normal, &d));
    }

    #[test]
    fn normal_irregular_classical_deductions_are_not_disturbed() {
        // The falsum's class has a leaf in minor position, so the
        // deduction is not regular; nothing consumes the falsum's
        // conclusion, so it is normal, and the driver must not
        // regularize what it has no reduction for.
        let sys = SystemConfig::CNF_IOTA_PRIME;
        let p = pred("R", vec![cst("t")]);
        let d = build(
            RuleTag::BotEC,
            p.clone(),
            vec![build(
                RuleTag::ImpE,
                Formula::Bot,
                vec![leaf(neg(neg(p.clone())), 1), leaf(neg(p), 2)],
                vec![],
            )],
            vec![(Role::Negation, ClassLabel(2))],
        );
        assert_checks(&d, &sys);
        let (normal, trace) = normalize(&d, &sys).expect("already normal");
        assert!(trace.is_empty());
        assert!(alpha_isomorphic(&normal, &d));
    }

    #[test]
    fn irregular_classical_falsum_is_regularized_on_demand() {
        // The discharged negation sits in minor position, so the driver
        // must regularize first; the regularization wrapper's minor is
        // discharged inside the removed region, so the reduction then
        // folds the denotation rule into the class instead of reusing a
        // minor, and the falsum re-concludes the existence statement.
        let sys = SystemConfig::CNF_IOTA_PRIME;
        let t = cst("t");
        let p = pred("R", vec![t.clone()]);
        let falsum = build(
            RuleTag::BotEC,
            p.clone(),
            vec![build(
                RuleTag::ImpE,
                Formula::Bot,
                vec![leaf(neg(neg(p.clone())), 1), leaf(neg(p.clone()), 2)],
                vec![],
            )],
            vec![(Role::Negation, ClassLabel(2))],
        );
        let d = build(RuleTag::Ad, bang(t), vec![falsum], vec![]);
        assert_checks(&d, &sys);
        let (normal, trace) = normalize(&d, &sys).expect("normalizes");
        assert_checks(&normal, &sys);
        assert!(is_normal(&normal, &sys));
        assert_eq!(normal.conclusion(), d.conclusion());
        assert_eq!(normal.rule(), Some(RuleTag::BotEC));
        assert_eq!(trace.len(), 1);
        assert_eq!(trace[0].procedure, Procedure::ClassicalAd);
        // The regularization wrapper's minor joins the reductio chain,
        // so the rank is measured at ⟨0,2⟩ once the driver has
        // regularized.
        assert_eq!(
            trace[0].rank_before,
            Rank {
                degree: 0,
                length: 2
            }
        );
        assert_eq!(trace[0].rank_after, Rank::ZERO);
        assert_eq!(
            open_judgments(&normal),
            open_judgments(&leaf(neg(neg(p)), 1))
        );
    }

    #[test]
    fn unprimed_description_systems_are_refused() {
        let d = leaf(bang(cst("t")), 1);
        assert!(matches!(
            normalize(&d, &SystemConfig::INF_IOTA),
            Err(RewriteError::MustTranslateToPrimed { .. })
        ));
        assert!(matches!(
            normalize(&d, &SystemConfig::CNF_IOTA),
            Err(RewriteError::MustTranslateToPrimed { .. })
        ));
        let (_, trace) = normalize(&d, &SystemConfig::INF_IOTA_PRIME).expect("primed is in scope");
        assert!(trace.is_empty());
    }

    #[test]
    fn full_classical_rules_and_spare_connectives_are_refused() {
        let mut full = SystemConfig::CNF;
        full.full_classical = true;
        let p = pred("P", vec![]);
        let q = pred("Q", vec![]);
        assert!(matches!(
            normalize(&leaf(p.clone(), 1), &full),
            Err(RewriteError::UnsupportedSystem { .. })
        ));
        // A classical description deduction whose formulas mention a
        // connective the system has no rules for is refused outright…
        let d = leaf(and(p.clone(), q.clone()), 1);
        assert!(matches!(
            normalize(&d, &SystemConfig::CNF_IOTA_PRIME),
            Err(RewriteError::UnsupportedSystem { .. })
        ));
        // …while the intuitionist counterpart handles the connective.
        assert!(normalize(&d, &SystemConfig::INF_IOTA_PRIME).is_ok());
    }

    #[test]
    fn the_step_budget_is_enforced() {
        let p = pred("P", vec![]);
        let q = pred("Q", vec![]);
        let d = build(
            RuleTag::AndEl,
            p.clone(),
            vec![build(
                RuleTag::AndI,
                and(p.clone(), q.clone()),
                vec![leaf(p, 1), leaf(q, 2)],
                vec![],
            )],
            vec![],
        );
        assert!(matches!(
            normalize_with_limit(&d, &SystemConfig::INF, 0),
            Err(RewriteError::IterationLimitExceeded { limit: 0 })
        ));
    }
}
