//! The eight systems of negative free logic: rule tags, system
//! configuration, rule schemas, and the deduction checker.
//!
//! The checker validates a [`Deduction`] against a [`SystemConfig`]: every
//! node must instantiate a rule schema legal in the system, with all side
//! conditions — eigenparameter freshness, the pure variable condition,
//! discharge bookkeeping, the atomic-conclusion restriction on `=E`, the
//! prime-conclusion restriction on `⊥E`, and the atomic-term restrictions
//! of the primed systems.  It reports every violation with its position
//! rather than stopping at the first.

use std::fmt;

use crate::deduction::{alpha_eq_judgment, ClassLabel, Deduction, Judgment, Position, Role};
use crate::syntax::{
    alpha_eq, alpha_eq_term, alpha_eq_term_env, fresh_param, name_class, Formula, NameClass, Term,
};

/// The inference rules across all eight systems.
///
/// Variant names mirror the concrete proof-script spellings: `El`/`Er`
/// eliminate to the left/right conjunct, `Il`/`Ir` introduce from the
/// left/right disjunct, `BotEC` is classical falsum elimination (reductio),
/// `EqIn` is the identity introduction of negative free logic (from an
/// existence premise), `EqInG` its generalised form, `Ad` the atomic
/// denotation rule, and the `…J` tags are the Jaśkowski-style variants
/// that use term judgments instead of the existence predicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleTag {
    AndI,
    AndEl,
    AndEr,
    ImpI,
    ImpE,
    OrIl,
    OrIr,
    OrE,
    BotE,
    BotEC,
    AllI,
    AllE,
    ExI,
    ExE,
    EqIn,
    EqInG,
    EqE,
    Ad,
    IotaI,
    IotaE1,
    IotaE2,
    IotaE3,
    AllIJ,
    AllEJ,
    ExIJ,
    ExEJ,
    EqInJ,
    AdJ,
}

impl RuleTag {
    pub const ALL: [RuleTag; 28] = [
        RuleTag::AndI,
        RuleTag::AndEl,
        RuleTag::AndEr,
        RuleTag::ImpI,
        RuleTag::ImpE,
        RuleTag::OrIl,
        RuleTag::OrIr,
        RuleTag::OrE,
        RuleTag::BotE,
        RuleTag::BotEC,
        RuleTag::AllI,
        RuleTag::AllE,
        RuleTag::ExI,
        RuleTag::ExE,
        RuleTag::EqIn,
        RuleTag::EqInG,
        RuleTag::EqE,
        RuleTag::Ad,
        RuleTag::IotaI,
        RuleTag::IotaE1,
        RuleTag::IotaE2,
        RuleTag::IotaE3,
        RuleTag::AllIJ,
        RuleTag::AllEJ,
        RuleTag::ExIJ,
        RuleTag::ExEJ,
        RuleTag::EqInJ,
        RuleTag::AdJ,
    ];

    /// The spelling used in proof scripts and error messages.
    pub fn name(self) -> &'static str {
        match self {
            RuleTag::AndI => "andI",
            RuleTag::AndEl => "andEl",
            RuleTag::AndEr => "andEr",
            RuleTag::ImpI => "impI",
            RuleTag::ImpE => "impE",
            RuleTag::OrIl => "orIl",
            RuleTag::OrIr => "orIr",
            RuleTag::OrE => "orE",
            RuleTag::BotE => "botE",
            RuleTag::BotEC => "botEC",
            RuleTag::AllI => "allI",
            RuleTag::AllE => "allE",
            RuleTag::ExI => "exI",
            RuleTag::ExE => "exE",
            RuleTag::EqIn => "eqIn",
            RuleTag::EqInG => "eqInG",
            RuleTag::EqE => "eqE",
            RuleTag::Ad => "AD",
            RuleTag::IotaI => "iotaI",
            RuleTag::IotaE1 => "iotaE1",
            RuleTag::IotaE2 => "iotaE2",
            RuleTag::IotaE3 => "iotaE3",
            RuleTag::AllIJ => "allIJ",
            RuleTag::AllEJ => "allEJ",
            RuleTag::ExIJ => "exIJ",
            RuleTag::ExEJ => "exEJ",
            RuleTag::EqInJ => "eqInJ",
            RuleTag::AdJ => "ADJ",
        }
    }

    /// Parses a proof-script rule spelling.
    pub fn from_name(name: &str) -> Option<RuleTag> {
        RuleTag::ALL.iter().copied().find(|tag| tag.name() == name)
    }
}

impl fmt::Display for RuleTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

// ---------------------------------------------------------------------------
// System configuration
// ---------------------------------------------------------------------------

/// One of the eight systems, as a combination of four switches, plus the
/// `full_classical` toggle that re-admits `∧`, `∨`, `∃` in the classical
/// systems (off by default: the classical systems are taken with their
/// spartan rule set `→`, `∀`, `=`, `AD`, `⊥E_C`).
///
/// Legal combinations: `jaskowski` excludes `iota` and `primed`; `primed`
/// requires `iota` (the primed systems replace `=I^n` by `=I^nG` and
/// restrict quantifier and ι rules to atomic instantiating terms).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SystemConfig {
    pub classical: bool,
    pub iota: bool,
    pub primed: bool,
    pub jaskowski: bool,
    pub full_classical: bool,
}

impl SystemConfig {
    pub const INF: SystemConfig = SystemConfig::new(false, false, false, false);
    pub const CNF: SystemConfig = SystemConfig::new(true, false, false, false);
    pub const INF_IOTA: SystemConfig = SystemConfig::new(false, true, false, false);
    pub const CNF_IOTA: SystemConfig = SystemConfig::new(true, true, false, false);
    pub const INF_IOTA_PRIME: SystemConfig = SystemConfig::new(false, true, true, false);
    pub const CNF_IOTA_PRIME: SystemConfig = SystemConfig::new(true, true, true, false);
    pub const INF_J: SystemConfig = SystemConfig::new(false, false, false, true);
    pub const CNF_J: SystemConfig = SystemConfig::new(true, false, false, true);

    pub const ALL: [SystemConfig; 8] = [
        SystemConfig::INF,
        SystemConfig::CNF,
        SystemConfig::INF_IOTA,
        SystemConfig::CNF_IOTA,
        SystemConfig::INF_IOTA_PRIME,
        SystemConfig::CNF_IOTA_PRIME,
        SystemConfig::INF_J,
        SystemConfig::CNF_J,
    ];

    const fn new(classical: bool, iota: bool, primed: bool, jaskowski: bool) -> SystemConfig {
        SystemConfig {
            classical,
            iota,
            primed,
            jaskowski,
            full_classical: false,
        }
    }

    /// The CLI spelling of this system.
    pub fn name(&self) -> &'static str {
        match (self.classical, self.iota, self.primed, self.jaskowski) {
            (false, false, false, false) => "INF",
            (true, false, false, false) => "CNF",
            (false, true, false, false) => "INFi",
            (true, true, false, false) => "CNFi",
            (false, true, true, false) => "INFi-prime",
            (true, true, true, false) => "CNFi-prime",
            (false, false, false, true) => "INF-J",
            (true, false, false, true) => "CNF-J",
            _ => "invalid",
        }
    }

    /// Parses a CLI system name; `full_classical` starts out off.
    pub fn from_name(name: &str) -> Option<SystemConfig> {
        SystemConfig::ALL.iter().copied().find(|s| s.name() == name)
    }

    /// True iff the switch combination names one of the eight systems.
    pub fn is_valid(&self) -> bool {
        let ok_jaskowski = !self.jaskowski || (!self.iota && !self.primed);
        let ok_primed = !self.primed || self.iota;
        ok_jaskowski && ok_primed
    }

    /// Whether `∧`, `∨`, `∃` rules are available: always in the
    /// intuitionist systems, only under `full_classical` in the classical
    /// ones.
    fn full_connectives(&self) -> bool {
        !self.classical || self.full_classical
    }

    /// Whether a rule tag may appear in deductions of this system.
    pub fn allows(&self, tag: RuleTag) -> bool {
        use RuleTag::*;
        match tag {
            ImpI | ImpE | EqE | BotE => true,
            AndI | AndEl | AndEr | OrIl | OrIr | OrE => self.full_connectives(),
            BotEC => self.classical,
            AllI | AllE => !self.jaskowski,
            ExI | ExE => !self.jaskowski && self.full_connectives(),
            EqIn => !self.jaskowski && !self.primed,
            EqInG => self.primed,
            Ad => !self.jaskowski,
            IotaI | IotaE1 | IotaE2 | IotaE3 => self.iota,
            AllIJ | AllEJ | EqInJ | AdJ => self.jaskowski,
            ExIJ | ExEJ => self.jaskowski && self.full_connectives(),
        }
    }
}

impl fmt::Display for SystemConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

// ---------------------------------------------------------------------------
// Rule schemas
// ---------------------------------------------------------------------------

/// How a rule behaves for segment and maximal-formula analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleClass {
    /// Introduction rule of a connective, quantifier or ι — the rules
    /// whose conclusions can head a maximal formula.
    Intro,
    /// Elimination rule, with the index of its major premise.
    Elim { major: usize },
    /// Identity introduction (`=I^n`, `=I^nG`, `=I^nJ`) — tracked by the
    /// identity species of maximal segments, not the intro/elim detours.
    Identity,
    /// Atomic denotation (`AD`, `AD^J`).
    Denotation,
}

/// The machine-readable shape of a rule: premise count, which premises or
/// the conclusion are term judgments, the discharge roles with the premise
/// indices where each class's leaves must live, the premises an
/// eigenparameter is scoped to, and its analysis classification.
#[derive(Debug, Clone, Copy)]
pub struct RuleSchema {
    pub premises: usize,
    pub term_premises: &'static [usize],
    pub term_conclusion: bool,
    pub roles: &'static [(Role, &'static [usize])],
    pub eigen_scope: &'static [usize],
    pub class: RuleClass,
    pub description: &'static str,
}

pub fn rule_schema(tag: RuleTag) -> RuleSchema {
    use RuleClass::*;
    use RuleTag::*;
    let schema =
        |premises, term_premises, term_conclusion, roles, eigen_scope, class, description| {
            RuleSchema {
                premises,
                term_premises,
                term_conclusion,
                roles,
                eigen_scope,
                class,
                description,
            }
        };
    match tag {
        AndI => schema(2, &[], false, &[], &[], Intro, "premises [A; B], conclusion A & B"),
        AndEl => schema(1, &[], false, &[], &[], Elim { major: 0 }, "premise A & B, conclusion A"),
        AndEr => schema(1, &[], false, &[], &[], Elim { major: 0 }, "premise A & B, conclusion B"),
        ImpI => schema(
            1,
            &[],
            false,
            &[(Role::Antecedent, &[0])],
            &[],
            Intro,
            "premise B discharging A, conclusion A -> B",
        ),
        ImpE => schema(
            2,
            &[],
            false,
            &[],
            &[],
            Elim { major: 0 },
            "premises [A -> B; A], conclusion B",
        ),
        OrIl => schema(1, &[], false, &[], &[], Intro, "premise A, conclusion A | B"),
        OrIr => schema(1, &[], false, &[], &[], Intro, "premise B, conclusion A | B"),
        OrE => schema(
            3,
            &[],
            false,
            &[(Role::CaseLeft, &[1]), (Role::CaseRight, &[2])],
            &[],
            Elim { major: 0 },
            "premises [A | B; C discharging A; C discharging B], conclusion C",
        ),
        BotE => schema(
            1,
            &[],
            false,
            &[],
            &[],
            Elim { major: 0 },
            "premise bot, conclusion any prime formula",
        ),
        BotEC => schema(
            1,
            &[],
            false,
            &[(Role::Negation, &[0])],
            &[],
            Elim { major: 0 },
            "premise bot discharging ~A, conclusion A (prime if the discharge is vacuous, else atomic)",
        ),
        AllI => schema(
            1,
            &[],
            false,
            &[(Role::WitnessExistence, &[0])],
            &[0],
            Intro,
            "premise A_a^x discharging E! a, conclusion forall x. A (eigenparameter a)",
        ),
        AllE => schema(
            2,
            &[],
            false,
            &[],
            &[],
            Elim { major: 0 },
            "premises [forall x. A; E! t], conclusion A_t^x",
        ),
        ExI => schema(
            2,
            &[],
            false,
            &[],
            &[],
            Intro,
            "premises [A_t^x; E! t], conclusion exists x. A",
        ),
        ExE => schema(
            2,
            &[],
            false,
            &[(Role::WitnessFormula, &[1]), (Role::WitnessExistence, &[1])],
            &[1],
            Elim { major: 0 },
            "premises [exists x. A; C discharging A_a^x and E! a], conclusion C (eigenparameter a)",
        ),
        EqIn => schema(
            1,
            &[],
            false,
            &[],
            &[],
            Identity,
            "premise E! t, conclusion t = t",
        ),
        EqInG => schema(
            2,
            &[],
            false,
            &[(Role::Id, &[1])],
            &[1],
            Identity,
            "premises [E! t; C discharging a = t], conclusion C (eigenparameter a)",
        ),
        EqE => schema(
            2,
            &[],
            false,
            &[],
            &[],
            Elim { major: 0 },
            "premises [t1 = t2; A_t1^x], conclusion A_t2^x (atomic)",
        ),
        Ad => schema(
            1,
            &[],
            false,
            &[],
            &[],
            Denotation,
            "premise R(t1, ..., tn) or t1 = t2 (not E!), conclusion E! ti",
        ),
        IotaI => schema(
            3,
            &[],
            false,
            &[
                (Role::Id, &[1]),
                (Role::WitnessFormula, &[2]),
                (Role::WitnessExistence, &[2]),
            ],
            &[1, 2],
            Intro,
            "premises [E! t; F_a^x discharging a = t; a = t discharging F_a^x and E! a], conclusion iota x. F = t (eigenparameter a)",
        ),
        IotaE1 => schema(
            2,
            &[],
            false,
            &[],
            &[],
            Elim { major: 0 },
            "premises [iota x. F = t; u = t], conclusion F_u^x",
        ),
        IotaE2 => schema(
            3,
            &[],
            false,
            &[],
            &[],
            Elim { major: 0 },
            "premises [iota x. F = t; F_u^x; E! u], conclusion u = t",
        ),
        IotaE3 => schema(
            1,
            &[],
            false,
            &[],
            &[],
            Elim { major: 0 },
            "premise iota x. F = t, conclusion E! t",
        ),
        AllIJ => schema(
            1,
            &[],
            false,
            &[(Role::WitnessTerm, &[0])],
            &[0],
            Intro,
            "premise A_a^x discharging the term a, conclusion forall x. A (eigenparameter a)",
        ),
        AllEJ => schema(
            2,
            &[1],
            false,
            &[],
            &[],
            Elim { major: 0 },
            "premises [forall x. A; term t], conclusion A_t^x",
        ),
        ExIJ => schema(
            2,
            &[1],
            false,
            &[],
            &[],
            Intro,
            "premises [A_t^x; term t], conclusion exists x. A",
        ),
        ExEJ => schema(
            2,
            &[],
            false,
            &[(Role::WitnessFormula, &[1]), (Role::WitnessTerm, &[1])],
            &[1],
            Elim { major: 0 },
            "premises [exists x. A; C discharging A_a^x and the term a], conclusion C (eigenparameter a)",
        ),
        EqInJ => schema(
            1,
            &[0],
            false,
            &[],
            &[],
            Identity,
            "premise term t, conclusion t = t",
        ),
        AdJ => schema(
            1,
            &[],
            true,
            &[],
            &[],
            Denotation,
            "premise R(t1, ..., tn) or t1 = t2, conclusion term ti",
        ),
    }
}

/// Convenience: the major-premise index if the rule is an elimination.
pub fn elim_major(tag: RuleTag) -> Option<usize> {
    match rule_schema(tag).class {
        RuleClass::Elim { major } => Some(major),
        _ => None,
    }
}

/// Convenience: whether the rule is an introduction (for maximal-formula
/// detection).
pub fn is_intro(tag: RuleTag) -> bool {
    rule_schema(tag).class == RuleClass::Intro
}

// ---------------------------------------------------------------------------
// Check reports
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    /// A node's premises do not have the shapes its rule requires.
    MalformedNode,
    /// The rule tag is not available in the system being checked.
    IllegalRule,
    /// A judgment is not legal here: open bound variables, ι in a ι-free
    /// system, `∃!` or `ι` in a Jaśkowski system, a term judgment outside
    /// the designated slots, or ill-classed identifiers.
    IllegalJudgment,
    /// The conclusion does not follow from the premises by the rule.
    ConclusionMismatch,
    /// Discharge bookkeeping is broken: wrong roles for the rule, a class
    /// judgment that does not fit its role, leaves outside the designated
    /// premise subtree, or a label discharged twice on a branch.
    DischargeShape,
    /// Two leaves of one assumption class carry different judgments.
    ClassJudgmentConflict,
    /// A quoted eigenparameter side condition fails.
    EigenCondition,
    /// The pure variable condition fails: an eigenparameter occurs outside
    /// the subtrees of its rule application.
    PureVariable,
    /// `=E` concluded a non-atomic formula.
    NonAtomicEqElim,
    /// `⊥E` (or vacuous `⊥E_C`) concluded a non-prime formula.
    NonPrimeBotElim,
    /// Non-vacuous `⊥E_C` concluded a non-atomic formula.
    NonAtomicBotElimC,
    /// A primed-system rule used a complex instantiating term.
    NonAtomicInstance,
    /// `AD` concluded that the right term of a ι-identity denotes; that
    /// inference must be tagged `iotaE3`.
    WrongIotaTag,
}

impl ViolationKind {
    pub fn name(self) -> &'static str {
        match self {
            ViolationKind::MalformedNode => "malformed-node",
            ViolationKind::IllegalRule => "illegal-rule",
            ViolationKind::IllegalJudgment => "illegal-judgment",
            ViolationKind::ConclusionMismatch => "conclusion-mismatch",
            ViolationKind::DischargeShape => "discharge-shape",
            ViolationKind::ClassJudgmentConflict => "class-judgment-conflict",
            ViolationKind::EigenCondition => "eigen-condition",
            ViolationKind::PureVariable => "pure-variable",
            ViolationKind::NonAtomicEqElim => "non-atomic-eq-elim",
            ViolationKind::NonPrimeBotElim => "non-prime-bot-elim",
            ViolationKind::NonAtomicBotElimC => "non-atomic-bot-elim-c",
            ViolationKind::NonAtomicInstance => "non-atomic-instance",
            ViolationKind::WrongIotaTag => "wrong-iota-tag",
        }
    }
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub position: Position,
    pub kind: ViolationKind,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "at {}: {}: {}",
            position_string(&self.position),
            self.kind,
            self.message
        )
    }
}

/// Renders a premise-index path for messages: the root is `root`, its
/// second premise `root.1`, and so on.
pub fn position_string(position: &[usize]) -> String {
    if position.is_empty() {
        "root".to_string()
    } else {
        let mut out = "root".to_string();
        for index in position {
            out.push('.');
            out.push_str(&index.to_string());
        }
        out
    }
}

/// The checker's verdict: valid iff no violations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckReport {
    pub violations: Vec<Violation>,
}

impl CheckReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok() {
            writeln!(f, "ok")
        } else {
            for violation in &self.violations {
                writeln!(f, "{violation}")?;
            }
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// The checker
// ---------------------------------------------------------------------------

/// Validates a deduction against a system.  Never panics; reports every
/// violation it can find.
pub fn check(d: &Deduction, sys: &SystemConfig) -> CheckReport {
    let mut report = CheckReport {
        violations: Vec::new(),
    };
    if !sys.is_valid() {
        report.violations.push(Violation {
            position: vec![],
            kind: ViolationKind::IllegalRule,
            message: format!("switch combination is not one of the eight systems: {sys:?}"),
        });
        return report;
    }
    for (position, node) in d.nodes() {
        check_judgments(node, &position, sys, &mut report);
        if let Deduction::Infer { .. } = node {
            check_node(node, &position, sys, &mut report);
        }
    }
    check_class_consistency(d, &mut report);
    check_discharge_scoping(d, &mut report);
    check_purity(d, &mut report);
    report
}

/// Judgment-level legality at one node: closed, lexically well named, no ι
/// outside ι systems, no `∃!` or `ι` inside Jaśkowski systems, and term
/// judgments only in their designated slots.
fn check_judgments(
    node: &Deduction,
    position: &Position,
    sys: &SystemConfig,
    report: &mut CheckReport,
) {
    let judgment = node.conclusion();
    let mut push = |kind, message: String| {
        report.violations.push(Violation {
            position: position.clone(),
            kind,
            message,
        })
    };

    match judgment {
        Judgment::Formula(f) => {
            if !f.free_vars().is_empty() {
                push(
                    ViolationKind::IllegalJudgment,
                    format!("judgment {f} has unbound variables {:?}", f.free_vars()),
                );
            }
            if !sys.iota && f.contains_iota() {
                push(
                    ViolationKind::IllegalJudgment,
                    format!("judgment {f} uses a description term, absent from {sys}"),
                );
            }
            if sys.jaskowski && f.contains_exists_bang() {
                push(
                    ViolationKind::IllegalJudgment,
                    format!("judgment {f} uses the existence predicate, absent from {sys}"),
                );
            }
            if let Some(message) = lexical_problem_formula(f) {
                push(ViolationKind::IllegalJudgment, message);
            }
        }
        Judgment::Term(t) => {
            if !sys.jaskowski {
                push(
                    ViolationKind::IllegalJudgment,
                    format!("term judgment {t} is only legal in the Jaśkowski systems"),
                );
            }
            if !t.free_vars().is_empty() {
                push(
                    ViolationKind::IllegalJudgment,
                    format!("term judgment {t} has unbound variables"),
                );
            }
            if !sys.iota && t.contains_iota() {
                push(
                    ViolationKind::IllegalJudgment,
                    format!("term judgment {t} uses a description term, absent from {sys}"),
                );
            }
            if let Some(message) = lexical_problem_term(t) {
                push(ViolationKind::IllegalJudgment, message);
            }
            // A term judgment concluded by a rule must sit in a designated
            // slot of its consumer; that is checked at the consumer.  Here
            // only the producing side: among rules, only ADJ concludes one.
            if let Some(rule) = node.rule() {
                if !rule_schema(rule).term_conclusion {
                    push(
                        ViolationKind::IllegalJudgment,
                        format!("rule {rule} cannot conclude a term judgment"),
                    );
                }
            }
        }
    }
}

fn lexical_problem_formula(f: &Formula) -> Option<String> {
    match f {
        Formula::Pred(p, args) => {
            if name_class(p) != NameClass::Predicate {
                return Some(format!("identifier {p} is not a predicate name"));
            }
            args.iter().find_map(lexical_problem_term)
        }
        Formula::Eq(l, r) => lexical_problem_term(l).or_else(|| lexical_problem_term(r)),
        Formula::ExistsBang(t) => lexical_problem_term(t),
        Formula::Bot => None,
        Formula::And(l, r) | Formula::Or(l, r) | Formula::Imp(l, r) => {
            lexical_problem_formula(l).or_else(|| lexical_problem_formula(r))
        }
        Formula::Forall(v, body) | Formula::Exists(v, body) => {
            if name_class(v) != NameClass::Var {
                return Some(format!("binder {v} is not a bound-variable name"));
            }
            lexical_problem_formula(body)
        }
    }
}

fn lexical_problem_term(t: &Term) -> Option<String> {
    match t {
        Term::Const(n) => (name_class(n) != NameClass::Const)
            .then(|| format!("identifier {n} is not a constant name")),
        Term::Param(n) => (name_class(n) != NameClass::Param)
            .then(|| format!("identifier {n} is not a parameter name")),
        Term::Var(n) => (name_class(n) != NameClass::Var)
            .then(|| format!("identifier {n} is not a bound-variable name")),
        Term::Iota(v, body) => {
            if name_class(v) != NameClass::Var {
                return Some(format!("binder {v} is not a bound-variable name"));
            }
            lexical_problem_formula(body)
        }
    }
}

/// The per-node schema check: arity, discharge roles, premise shapes,
/// conclusion, restrictions and quoted eigenparameter conditions.
fn check_node(node: &Deduction, position: &Position, sys: &SystemConfig, report: &mut CheckReport) {
    let rule = node
        .rule()
        .expect("check_node is only called on rule applications");
    let schema = rule_schema(rule);
    let mut push = |kind, message: String| {
        report.violations.push(Violation {
            position: position.clone(),
            kind,
            message,
        })
    };

    if !sys.allows(rule) {
        push(
            ViolationKind::IllegalRule,
            format!("rule {rule} is not available in {sys}"),
        );
    }

    let premises = node.premises();
    if premises.len() != schema.premises {
        push(
            ViolationKind::MalformedNode,
            format!(
                "rule {rule} takes {} premise(s), found {}",
                schema.premises,
                premises.len()
            ),
        );
        return;
    }

    // Discharge entries must be exactly the schema's roles, once each, with
    // pairwise distinct labels (vacuous discharge uses a label unused
    // elsewhere).
    let mut roles_seen: Vec<Role> = Vec::new();
    let mut labels_seen: Vec<ClassLabel> = Vec::new();
    for (role, label) in node.discharges() {
        if !schema.roles.iter().any(|(r, _)| r == role) {
            push(
                ViolationKind::DischargeShape,
                format!("rule {rule} has no {role} discharge"),
            );
        }
        if roles_seen.contains(role) {
            push(
                ViolationKind::DischargeShape,
                format!("role {role} appears twice"),
            );
        }
        if labels_seen.contains(label) {
            push(
                ViolationKind::DischargeShape,
                format!("label {label} is used for two roles of one application"),
            );
        }
        roles_seen.push(*role);
        labels_seen.push(*label);
    }
    for (role, _) in schema.roles {
        if !roles_seen.contains(role) {
            push(
                ViolationKind::DischargeShape,
                format!("rule {rule} must carry a {role} discharge (possibly vacuous)"),
            );
        }
    }

    // Term-judgment slots.
    for (i, premise) in premises.iter().enumerate() {
        let expect_term = schema.term_premises.contains(&i);
        match premise.conclusion() {
            Judgment::Term(_) if !expect_term => push(
                ViolationKind::IllegalJudgment,
                format!("premise {} of {rule} must be a formula", i + 1),
            ),
            Judgment::Formula(_) if expect_term => push(
                ViolationKind::IllegalJudgment,
                format!("premise {} of {rule} must be a term judgment", i + 1),
            ),
            _ => {}
        }
    }
    match node.conclusion() {
        Judgment::Term(_) if !schema.term_conclusion => return, // already reported
        Judgment::Formula(_) if schema.term_conclusion => {
            push(
                ViolationKind::IllegalJudgment,
                format!("rule {rule} concludes a term judgment"),
            );
            return;
        }
        _ => {}
    }

    check_rule_shape(node, position, sys, report);
}

/// Premise formula of a node, if it is one (slot errors already reported).
fn premise_formula(node: &Deduction, i: usize) -> Option<&Formula> {
    node.premises()
        .get(i)
        .and_then(|p| p.conclusion().formula())
}

fn premise_term(node: &Deduction, i: usize) -> Option<&Term> {
    node.premises().get(i).and_then(|p| p.conclusion().term())
}

/// The judgment of the class a node discharges under `role`, if the class
/// has leaves (vacuous classes have their judgment fixed by the schema).
fn discharged_judgment(node: &Deduction, role: Role) -> Option<Judgment> {
    let label = node.discharge_label(role)?;
    find_class_judgment(node, label)
}

fn find_class_judgment(node: &Deduction, label: ClassLabel) -> Option<Judgment> {
    for premise in node.premises() {
        for (_, sub) in premise.nodes() {
            if let Deduction::Assume {
                judgment,
                label: leaf,
            } = sub
            {
                if *leaf == label {
                    return Some(judgment.clone());
                }
            }
        }
    }
    None
}

/// How the eigenparameter of an application was determined.
enum EigenResolution {
    /// The rule has no eigenparameter.
    NotApplicable,
    /// Vacuous discharges and an instance that fits any parameter: no
    /// constraints arise.
    Unconstrained,
    /// A concrete parameter.
    Param(String),
}

/// Parameters `c` with `body[x := c]` α-equal to `instance`.  Returns
/// `None` if the instance fits *any* parameter (x not free in body),
/// `Some(vec![])` if it fits none.
fn instance_params(body: &Formula, x: &str, instance: &Formula) -> Option<Vec<String>> {
    let mut used = body.names();
    instance.collect_names(&mut used);
    let fresh = fresh_param(&used);
    if alpha_eq(&body.subst_var(x, &Term::Param(fresh)), instance) {
        return None;
    }
    let candidates: Vec<String> = instance.params().into_iter().collect();
    Some(
        candidates
            .into_iter()
            .filter(|c| alpha_eq(&body.subst_var(x, &Term::Param(c.clone())), instance))
            .collect(),
    )
}

/// Resolves the eigenparameter of a rule application on an otherwise
/// well-shaped node, without reporting violations.  Used by the purity
/// sweep and by the rewrite engine's freshening.
pub fn eigen_of(node: &Deduction) -> Option<String> {
    match resolve_eigen(node) {
        EigenResolution::Param(a) => Some(a),
        _ => None,
    }
}

fn resolve_eigen(node: &Deduction) -> EigenResolution {
    let param_of_class_judgment = |j: &Judgment| -> Option<String> {
        match j {
            Judgment::Formula(Formula::ExistsBang(Term::Param(a))) => Some(a.clone()),
            Judgment::Formula(Formula::Eq(Term::Param(a), _)) => Some(a.clone()),
            Judgment::Term(Term::Param(a)) => Some(a.clone()),
            _ => None,
        }
    };
    let rule = match node.rule() {
        Some(rule) => rule,
        None => return EigenResolution::NotApplicable,
    };
    match rule {
        RuleTag::AllI | RuleTag::AllIJ => {
            let existence_role = if rule == RuleTag::AllI {
                Role::WitnessExistence
            } else {
                Role::WitnessTerm
            };
            if let Some(j) = discharged_judgment(node, existence_role) {
                return match param_of_class_judgment(&j) {
                    Some(a) => EigenResolution::Param(a),
                    None => EigenResolution::Unconstrained,
                };
            }
            // Vacuous: recover the parameter from the premise instance.
            if let (Some(Formula::Forall(x, body)), Some(instance)) =
                (node.conclusion().formula(), premise_formula(node, 0))
            {
                match instance_params(body, x, instance) {
                    None => EigenResolution::Unconstrained,
                    Some(choices) => match choices.first() {
                        Some(a) => EigenResolution::Param(a.clone()),
                        None => EigenResolution::Unconstrained,
                    },
                }
            } else {
                EigenResolution::Unconstrained
            }
        }
        RuleTag::ExE | RuleTag::ExEJ => {
            let existence_role = if rule == RuleTag::ExE {
                Role::WitnessExistence
            } else {
                Role::WitnessTerm
            };
            if let Some(j) = discharged_judgment(node, existence_role) {
                if let Some(a) = param_of_class_judgment(&j) {
                    return EigenResolution::Param(a);
                }
            }
            if let (Some(Formula::Exists(x, body)), Some(Judgment::Formula(instance))) = (
                premise_formula(node, 0),
                discharged_judgment(node, Role::WitnessFormula),
            ) {
                match instance_params(body, x, &instance) {
                    None => EigenResolution::Unconstrained,
                    Some(choices) => match choices.first() {
                        Some(a) => EigenResolution::Param(a.clone()),
                        None => EigenResolution::Unconstrained,
                    },
                }
            } else {
                EigenResolution::Unconstrained
            }
        }
        RuleTag::IotaI => {
            // The third premise concludes a = t: the eigenparameter is
            // always on display.
            match premise_formula(node, 2) {
                Some(Formula::Eq(Term::Param(a), _)) => EigenResolution::Param(a.clone()),
                _ => EigenResolution::Unconstrained,
            }
        }
        RuleTag::EqInG => match discharged_judgment(node, Role::Id) {
            Some(j) => match param_of_class_judgment(&j) {
                Some(a) => EigenResolution::Param(a),
                None => EigenResolution::Unconstrained,
            },
            None => EigenResolution::Unconstrained,
        },
        _ => EigenResolution::NotApplicable,
    }
}

/// True iff some open assumption of `premise`, outside the `exempt`
/// classes, mentions the parameter `a`.
fn opens_mention(premise: &Deduction, exempt: &[Option<ClassLabel>], a: &str) -> bool {
    premise
        .open_assumptions()
        .iter()
        .any(|(label, judgment)| !exempt.contains(&Some(*label)) && judgment.params().contains(a))
}

/// `instance` is `pattern` with some occurrences of `t1` replaced by `t2`
/// — the relation between the minor premise and conclusion of `=E`.
pub(crate) fn eq_instance(pattern: &Formula, instance: &Formula, t1: &Term, t2: &Term) -> bool {
    fn formulas(
        a: &Formula,
        b: &Formula,
        t1: &Term,
        t2: &Term,
        env: &mut Vec<(String, String)>,
    ) -> bool {
        match (a, b) {
            (Formula::Pred(p, xs), Formula::Pred(q, ys)) => {
                p == q
                    && xs.len() == ys.len()
                    && xs.iter().zip(ys).all(|(x, y)| terms(x, y, t1, t2, env))
            }
            (Formula::Eq(l1, r1), Formula::Eq(l2, r2)) => {
                terms(l1, l2, t1, t2, env) && terms(r1, r2, t1, t2, env)
            }
            (Formula::ExistsBang(x), Formula::ExistsBang(y)) => terms(x, y, t1, t2, env),
            (Formula::Bot, Formula::Bot) => true,
            (Formula::And(l1, r1), Formula::And(l2, r2))
            | (Formula::Or(l1, r1), Formula::Or(l2, r2))
            | (Formula::Imp(l1, r1), Formula::Imp(l2, r2)) => {
                formulas(l1, l2, t1, t2, env) && formulas(r1, r2, t1, t2, env)
            }
            (Formula::Forall(v1, b1), Formula::Forall(v2, b2))
            | (Formula::Exists(v1, b1), Formula::Exists(v2, b2)) => {
                env.push((v1.clone(), v2.clone()));
                let result = formulas(b1, b2, t1, t2, env);
                env.pop();
                result
            }
            _ => false,
        }
    }
    fn terms(a: &Term, b: &Term, t1: &Term, t2: &Term, env: &mut Vec<(String, String)>) -> bool {
        if alpha_eq_term_env(a, b, env) {
            return true;
        }
        // A replacement site: the left holds t1, the right t2.  Both are
        // closed, so the binder environment is irrelevant to them.
        if alpha_eq_term(a, t1) && alpha_eq_term(b, t2) {
            return true;
        }
        match (a, b) {
            (Term::Iota(v1, b1), Term::Iota(v2, b2)) => {
                env.push((v1.clone(), v2.clone()));
                let result = formulas(b1, b2, t1, t2, env);
                env.pop();
                result
            }
            _ => false,
        }
    }
    formulas(pattern, instance, t1, t2, &mut Vec::new())
}

/// The rule-specific relationships between premises, discharges and the
/// conclusion.
fn check_rule_shape(
    node: &Deduction,
    position: &Position,
    sys: &SystemConfig,
    report: &mut CheckReport,
) {
    let rule = node.rule().expect("rule applications only");
    let mut push = |kind, message: String| {
        report.violations.push(Violation {
            position: position.clone(),
            kind,
            message,
        })
    };
    let conclusion = node.conclusion();

    // α-comparison of an optional class judgment against its schema shape.
    let class_fits = |node: &Deduction, role: Role, expected: &Judgment| -> bool {
        match discharged_judgment(node, role) {
            None => true,
            Some(j) => alpha_eq_judgment(&j, expected),
        }
    };

    match rule {
        RuleTag::AndI => {
            if let (Some(l), Some(r), Some(c)) = (
                premise_formula(node, 0),
                premise_formula(node, 1),
                conclusion.formula(),
            ) {
                let built = Formula::And(Box::new(l.clone()), Box::new(r.clone()));
                if !alpha_eq(c, &built) {
                    push(
                        ViolationKind::ConclusionMismatch,
                        format!("expected {built}, concluded {c}"),
                    );
                }
            }
        }
        RuleTag::AndEl | RuleTag::AndEr => match (premise_formula(node, 0), conclusion.formula()) {
            (Some(Formula::And(l, r)), Some(c)) => {
                let expected = if rule == RuleTag::AndEl { l } else { r };
                if !alpha_eq(c, expected) {
                    push(
                        ViolationKind::ConclusionMismatch,
                        format!("expected {expected}, concluded {c}"),
                    );
                }
            }
            (Some(p), _) => push(
                ViolationKind::MalformedNode,
                format!("premise of {rule} must be a conjunction, found {p}"),
            ),
            _ => {}
        },
        RuleTag::ImpI => {
            if let Some(c) = conclusion.formula() {
                match c {
                    Formula::Imp(a, b) => {
                        if let Some(p) = premise_formula(node, 0) {
                            if !alpha_eq(p, b) {
                                push(
                                    ViolationKind::ConclusionMismatch,
                                    format!("premise {p} is not the consequent of {c}"),
                                );
                            }
                        }
                        if !class_fits(node, Role::Antecedent, &Judgment::Formula((**a).clone())) {
                            push(
                                ViolationKind::DischargeShape,
                                format!("discharged class does not assume the antecedent {a}"),
                            );
                        }
                    }
                    _ => push(
                        ViolationKind::ConclusionMismatch,
                        format!("conclusion of {rule} must be a conditional, found {c}"),
                    ),
                }
            }
        }
        RuleTag::ImpE => {
            match (
                premise_formula(node, 0),
                premise_formula(node, 1),
                conclusion.formula(),
            ) {
                (Some(Formula::Imp(a, b)), Some(minor), Some(c)) => {
                    if !alpha_eq(minor, a) {
                        push(
                            ViolationKind::ConclusionMismatch,
                            format!("minor premise {minor} is not the antecedent {a}"),
                        );
                    }
                    if !alpha_eq(c, b) {
                        push(
                            ViolationKind::ConclusionMismatch,
                            format!("conclusion {c} is not the consequent {b}"),
                        );
                    }
                }
                (Some(p), _, _) => push(
                    ViolationKind::MalformedNode,
                    format!("major premise of {rule} must be a conditional, found {p}"),
                ),
                _ => {}
            }
        }
        RuleTag::OrIl | RuleTag::OrIr => {
            if let (Some(p), Some(c)) = (premise_formula(node, 0), conclusion.formula()) {
                match c {
                    Formula::Or(l, r) => {
                        let expected = if rule == RuleTag::OrIl { l } else { r };
                        if !alpha_eq(p, expected) {
                            push(
                                ViolationKind::ConclusionMismatch,
                                format!("premise {p} is not the required disjunct of {c}"),
                            );
                        }
                    }
                    _ => push(
                        ViolationKind::ConclusionMismatch,
                        format!("conclusion of {rule} must be a disjunction, found {c}"),
                    ),
                }
            }
        }
        RuleTag::OrE => match (premise_formula(node, 0), conclusion.formula()) {
            (Some(Formula::Or(a, b)), Some(c)) => {
                for i in [1, 2] {
                    if let Some(p) = premise_formula(node, i) {
                        if !alpha_eq(p, c) {
                            push(
                                ViolationKind::ConclusionMismatch,
                                format!("case premise {p} differs from the conclusion {c}"),
                            );
                        }
                    }
                }
                if !class_fits(node, Role::CaseLeft, &Judgment::Formula((**a).clone())) {
                    push(
                        ViolationKind::DischargeShape,
                        format!("case-left class does not assume {a}"),
                    );
                }
                if !class_fits(node, Role::CaseRight, &Judgment::Formula((**b).clone())) {
                    push(
                        ViolationKind::DischargeShape,
                        format!("case-right class does not assume {b}"),
                    );
                }
            }
            (Some(p), _) => push(
                ViolationKind::MalformedNode,
                format!("major premise of {rule} must be a disjunction, found {p}"),
            ),
            _ => {}
        },
        RuleTag::BotE => {
            if let Some(p) = premise_formula(node, 0) {
                if *p != Formula::Bot {
                    push(
                        ViolationKind::MalformedNode,
                        format!("premise of {rule} must be bot, found {p}"),
                    );
                }
            }
            if let Some(c) = conclusion.formula() {
                if !c.is_prime() {
                    push(
                        ViolationKind::NonPrimeBotElim,
                        format!("{rule} may only conclude prime formulas, concluded {c}"),
                    );
                }
            }
        }
        RuleTag::BotEC => {
            if let Some(p) = premise_formula(node, 0) {
                if *p != Formula::Bot {
                    push(
                        ViolationKind::MalformedNode,
                        format!("premise of {rule} must be bot, found {p}"),
                    );
                }
            }
            if let Some(c) = conclusion.formula() {
                match discharged_judgment(node, Role::Negation) {
                    None => {
                        if !c.is_prime() {
                            push(
                                ViolationKind::NonPrimeBotElim,
                                format!(
                                    "{rule} with vacuous discharge may only conclude prime formulas, concluded {c}"
                                ),
                            );
                        }
                    }
                    Some(j) => {
                        let negation = Judgment::Formula(c.clone().negated());
                        if !alpha_eq_judgment(&j, &negation) {
                            push(
                                ViolationKind::DischargeShape,
                                format!("discharged class assumes {j}, expected ~{c}"),
                            );
                        }
                        if !c.is_atomic() {
                            push(
                                ViolationKind::NonAtomicBotElimC,
                                format!("{rule} may only conclude atomic formulas, concluded {c}"),
                            );
                        }
                    }
                }
            }
        }
        RuleTag::AllI | RuleTag::AllIJ => {
            if let Some(c) = conclusion.formula() {
                match c {
                    Formula::Forall(x, body) => {
                        let eigen = resolve_eigen(node);
                        match &eigen {
                            EigenResolution::Param(a) => {
                                let expected = body.subst_var(x, &Term::Param(a.clone()));
                                if let Some(p) = premise_formula(node, 0) {
                                    if !alpha_eq(p, &expected) {
                                        push(
                                            ViolationKind::ConclusionMismatch,
                                            format!(
                                                "premise {p} is not the instance {expected} of {c}"
                                            ),
                                        );
                                    }
                                }
                                let existence_judgment = if rule == RuleTag::AllI {
                                    Judgment::Formula(Formula::ExistsBang(Term::Param(a.clone())))
                                } else {
                                    Judgment::Term(Term::Param(a.clone()))
                                };
                                let role = if rule == RuleTag::AllI {
                                    Role::WitnessExistence
                                } else {
                                    Role::WitnessTerm
                                };
                                if !class_fits(node, role, &existence_judgment) {
                                    push(
                                        ViolationKind::DischargeShape,
                                        format!(
                                            "discharged class does not assume {existence_judgment}"
                                        ),
                                    );
                                }
                                if c.params().contains(a) {
                                    push(
                                        ViolationKind::EigenCondition,
                                        format!("eigenparameter {a} occurs in the conclusion {c}"),
                                    );
                                }
                                let exempt = [node.discharge_label(role)];
                                if opens_mention(&node.premises()[0], &exempt, a) {
                                    push(
                                        ViolationKind::EigenCondition,
                                        format!(
                                            "eigenparameter {a} occurs in an undischarged assumption of the premise"
                                        ),
                                    );
                                }
                            }
                            EigenResolution::Unconstrained => {
                                // A class judgment that exists but is not a
                                // parameter witness could not resolve the
                                // eigenparameter: bad shape.
                                let role = if rule == RuleTag::AllI {
                                    Role::WitnessExistence
                                } else {
                                    Role::WitnessTerm
                                };
                                if let Some(j) = discharged_judgment(node, role) {
                                    push(
                                        ViolationKind::DischargeShape,
                                        format!("discharged class assumes {j}, expected a parameter witness"),
                                    );
                                }
                                // The premise must still be *an* instance.
                                if let Some(p) = premise_formula(node, 0) {
                                    let fits =
                                        instance_params(body, x, p).is_none_or(|cs| !cs.is_empty());
                                    if !fits {
                                        push(
                                            ViolationKind::ConclusionMismatch,
                                            format!("premise {p} is not an instance of {c}"),
                                        );
                                    }
                                }
                            }
                            EigenResolution::NotApplicable => unreachable!(),
                        }
                    }
                    _ => push(
                        ViolationKind::ConclusionMismatch,
                        format!("conclusion of {rule} must be universal, found {c}"),
                    ),
                }
            }
        }
        RuleTag::AllE | RuleTag::AllEJ => {
            let instantiating = if rule == RuleTag::AllE {
                match premise_formula(node, 1) {
                    Some(Formula::ExistsBang(t)) => Some(t.clone()),
                    Some(p) => {
                        push(
                            ViolationKind::MalformedNode,
                            format!(
                                "minor premise of {rule} must be an existence formula, found {p}"
                            ),
                        );
                        None
                    }
                    None => None,
                }
            } else {
                premise_term(node, 1).cloned()
            };
            if let (Some(major), Some(t)) = (premise_formula(node, 0), instantiating) {
                match major {
                    Formula::Forall(x, body) => {
                        let expected = body.subst_var(x, &t);
                        if let Some(c) = conclusion.formula() {
                            if !alpha_eq(c, &expected) {
                                push(
                                    ViolationKind::ConclusionMismatch,
                                    format!("conclusion {c} is not the instance {expected}"),
                                );
                            }
                        }
                        if sys.primed && !t.is_atomic() {
                            push(
                                ViolationKind::NonAtomicInstance,
                                format!("{rule} in {sys} requires an atomic instantiating term, found {t}"),
                            );
                        }
                    }
                    _ => push(
                        ViolationKind::MalformedNode,
                        format!("major premise of {rule} must be universal, found {major}"),
                    ),
                }
            }
        }
        RuleTag::ExI | RuleTag::ExIJ => {
            let instantiating = if rule == RuleTag::ExI {
                match premise_formula(node, 1) {
                    Some(Formula::ExistsBang(t)) => Some(t.clone()),
                    Some(p) => {
                        push(
                            ViolationKind::MalformedNode,
                            format!(
                                "right premise of {rule} must be an existence formula, found {p}"
                            ),
                        );
                        None
                    }
                    None => None,
                }
            } else {
                premise_term(node, 1).cloned()
            };
            if let (Some(c), Some(t)) = (conclusion.formula(), instantiating) {
                match c {
                    Formula::Exists(x, body) => {
                        let expected = body.subst_var(x, &t);
                        if let Some(p) = premise_formula(node, 0) {
                            if !alpha_eq(p, &expected) {
                                push(
                                    ViolationKind::ConclusionMismatch,
                                    format!("premise {p} is not the instance {expected} of {c}"),
                                );
                            }
                        }
                        if sys.primed && !t.is_atomic() {
                            push(
                                ViolationKind::NonAtomicInstance,
                                format!("{rule} in {sys} requires an atomic instantiating term, found {t}"),
                            );
                        }
                    }
                    _ => push(
                        ViolationKind::ConclusionMismatch,
                        format!("conclusion of {rule} must be existential, found {c}"),
                    ),
                }
            }
        }
        RuleTag::ExE | RuleTag::ExEJ => {
            if let (Some(major), Some(minor), Some(c)) = (
                premise_formula(node, 0),
                premise_formula(node, 1),
                conclusion.formula(),
            ) {
                match major {
                    Formula::Exists(x, body) => {
                        if !alpha_eq(minor, c) {
                            push(
                                ViolationKind::ConclusionMismatch,
                                format!("minor premise {minor} differs from the conclusion {c}"),
                            );
                        }
                        let existence_role = if rule == RuleTag::ExE {
                            Role::WitnessExistence
                        } else {
                            Role::WitnessTerm
                        };
                        let existence_judgment = |a: &str| {
                            if rule == RuleTag::ExE {
                                Judgment::Formula(Formula::ExistsBang(Term::Param(a.into())))
                            } else {
                                Judgment::Term(Term::Param(a.into()))
                            }
                        };
                        match resolve_eigen(node) {
                            EigenResolution::Param(a) => {
                                let instance = body.subst_var(x, &Term::Param(a.clone()));
                                if !class_fits(
                                    node,
                                    Role::WitnessFormula,
                                    &Judgment::Formula(instance.clone()),
                                ) {
                                    push(
                                        ViolationKind::DischargeShape,
                                        format!("witness-formula class does not assume {instance}"),
                                    );
                                }
                                if !class_fits(node, existence_role, &existence_judgment(&a)) {
                                    push(
                                        ViolationKind::DischargeShape,
                                        format!(
                                            "{existence_role} class does not assume {}",
                                            existence_judgment(&a)
                                        ),
                                    );
                                }
                                if c.params().contains(&a) {
                                    push(
                                        ViolationKind::EigenCondition,
                                        format!("eigenparameter {a} occurs in the conclusion {c}"),
                                    );
                                }
                                if major.params().contains(&a) {
                                    push(
                                            ViolationKind::EigenCondition,
                                            format!("eigenparameter {a} occurs in the major premise {major}"),
                                        );
                                }
                                let exempt = [
                                    node.discharge_label(Role::WitnessFormula),
                                    node.discharge_label(existence_role),
                                ];
                                if opens_mention(&node.premises()[1], &exempt, &a) {
                                    push(
                                            ViolationKind::EigenCondition,
                                            format!(
                                                "eigenparameter {a} occurs in an undischarged assumption of the minor premise"
                                            ),
                                        );
                                }
                            }
                            EigenResolution::Unconstrained => {
                                if let Some(j) = discharged_judgment(node, existence_role) {
                                    push(
                                            ViolationKind::DischargeShape,
                                            format!(
                                                "discharged class assumes {j}, expected a parameter witness"
                                            ),
                                        );
                                }
                                if let Some(Judgment::Formula(wf)) =
                                    discharged_judgment(node, Role::WitnessFormula)
                                {
                                    let fits = instance_params(body, x, &wf)
                                        .is_none_or(|cs| !cs.is_empty());
                                    if !fits {
                                        push(
                                                ViolationKind::DischargeShape,
                                                format!(
                                                    "witness-formula class {wf} is not an instance of {major}"
                                                ),
                                            );
                                    }
                                }
                            }
                            EigenResolution::NotApplicable => unreachable!(),
                        }
                    }
                    _ => push(
                        ViolationKind::MalformedNode,
                        format!("major premise of {rule} must be existential, found {major}"),
                    ),
                }
            }
        }
        RuleTag::EqIn | RuleTag::EqInJ => {
            let t = if rule == RuleTag::EqIn {
                match premise_formula(node, 0) {
                    Some(Formula::ExistsBang(t)) => Some(t.clone()),
                    Some(p) => {
                        push(
                            ViolationKind::MalformedNode,
                            format!("premise of {rule} must be an existence formula, found {p}"),
                        );
                        None
                    }
                    None => None,
                }
            } else {
                premise_term(node, 0).cloned()
            };
            if let (Some(t), Some(c)) = (t, conclusion.formula()) {
                let expected = Formula::Eq(t.clone(), t);
                if !alpha_eq(c, &expected) {
                    push(
                        ViolationKind::ConclusionMismatch,
                        format!("expected {expected}, concluded {c}"),
                    );
                }
            }
        }
        RuleTag::EqInG => {
            if let (Some(major), Some(minor), Some(c)) = (
                premise_formula(node, 0),
                premise_formula(node, 1),
                conclusion.formula(),
            ) {
                let t = match major {
                    Formula::ExistsBang(t) => Some(t.clone()),
                    _ => {
                        push(
                                ViolationKind::MalformedNode,
                                format!("major premise of {rule} must be an existence formula, found {major}"),
                            );
                        None
                    }
                };
                if !alpha_eq(minor, c) {
                    push(
                        ViolationKind::ConclusionMismatch,
                        format!("minor premise {minor} differs from the conclusion {c}"),
                    );
                }
                if let (Some(t), Some(j)) = (t, discharged_judgment(node, Role::Id)) {
                    match j {
                            Judgment::Formula(Formula::Eq(Term::Param(a), right)) => {
                                if !alpha_eq_term(&right, &t) {
                                    push(
                                        ViolationKind::DischargeShape,
                                        format!("discharged identity is {a} = {right}, expected right side {t}"),
                                    );
                                }
                                if t.params().contains(&a) {
                                    push(
                                        ViolationKind::EigenCondition,
                                        format!("eigenparameter {a} occurs in the term {t}"),
                                    );
                                }
                                if c.params().contains(&a) {
                                    push(
                                        ViolationKind::EigenCondition,
                                        format!("eigenparameter {a} occurs in the conclusion {c}"),
                                    );
                                }
                                let exempt = [node.discharge_label(Role::Id)];
                                if opens_mention(&node.premises()[1], &exempt, &a) {
                                    push(
                                        ViolationKind::EigenCondition,
                                        format!(
                                            "eigenparameter {a} occurs in an undischarged assumption of the minor premise"
                                        ),
                                    );
                                }
                            }
                            other => push(
                                ViolationKind::DischargeShape,
                                format!("discharged class assumes {other}, expected a parameter-headed identity"),
                            ),
                        }
                }
            }
        }
        RuleTag::EqE => {
            if let (Some(major), Some(minor), Some(c)) = (
                premise_formula(node, 0),
                premise_formula(node, 1),
                conclusion.formula(),
            ) {
                match major {
                    Formula::Eq(t1, t2) => {
                        if !c.is_atomic() {
                            push(
                                ViolationKind::NonAtomicEqElim,
                                format!("{rule} may only conclude atomic formulas, concluded {c}"),
                            );
                        }
                        if !eq_instance(minor, c, t1, t2) {
                            push(
                                ViolationKind::ConclusionMismatch,
                                format!(
                                    "conclusion {c} does not come from {minor} by replacing {t1} with {t2}"
                                ),
                            );
                        }
                    }
                    _ => push(
                        ViolationKind::MalformedNode,
                        format!("major premise of {rule} must be an identity, found {major}"),
                    ),
                }
            }
        }
        RuleTag::Ad | RuleTag::AdJ => {
            let args: Option<Vec<Term>> = match premise_formula(node, 0) {
                Some(Formula::Pred(_, args)) if !args.is_empty() => Some(args.clone()),
                Some(Formula::Eq(l, r)) => Some(vec![l.clone(), r.clone()]),
                Some(p) => {
                    push(
                        ViolationKind::MalformedNode,
                        format!(
                            "premise of {rule} must be a predicate application or identity, found {p}"
                        ),
                    );
                    None
                }
                None => None,
            };
            let concluded: Option<Term> = if rule == RuleTag::Ad {
                match conclusion.formula() {
                    Some(Formula::ExistsBang(t)) => Some(t.clone()),
                    Some(c) => {
                        push(
                            ViolationKind::ConclusionMismatch,
                            format!("conclusion of {rule} must be an existence formula, found {c}"),
                        );
                        None
                    }
                    None => None,
                }
            } else {
                conclusion.term().cloned()
            };
            if let (Some(args), Some(t)) = (args, concluded) {
                if !args.iter().any(|arg| alpha_eq_term(arg, &t)) {
                    push(
                        ViolationKind::ConclusionMismatch,
                        format!("concluded term {t} is not among the premise's terms"),
                    );
                }
                // Concluding that the right term of a ι-identity denotes is
                // the business of iotaE3.
                if rule == RuleTag::Ad {
                    if let Some(Formula::Eq(Term::Iota(..), r)) = premise_formula(node, 0) {
                        if alpha_eq_term(&t, r) {
                            push(
                                ViolationKind::WrongIotaTag,
                                format!(
                                    "E! {t} concludes the right term of a description identity; use iotaE3"
                                ),
                            );
                        }
                    }
                }
            }
        }
        RuleTag::IotaI => {
            if let Some(c) = conclusion.formula() {
                match c {
                    Formula::Eq(Term::Iota(x, f_body), t) => {
                        if sys.primed && !t.is_atomic() {
                            push(
                                ViolationKind::NonAtomicInstance,
                                format!("{rule} in {sys} requires an atomic term, found {t}"),
                            );
                        }
                        match premise_formula(node, 0) {
                            Some(Formula::ExistsBang(t0)) if alpha_eq_term(t0, t) => {}
                            Some(p) => push(
                                ViolationKind::ConclusionMismatch,
                                format!("first premise must be E! {t}, found {p}"),
                            ),
                            None => {}
                        }
                        match resolve_eigen(node) {
                            EigenResolution::Param(a) => {
                                let a_term = Term::Param(a.clone());
                                let instance = f_body.subst_var(x, &a_term);
                                let identity = Formula::Eq(a_term.clone(), t.clone());
                                if let Some(p) = premise_formula(node, 1) {
                                    if !alpha_eq(p, &instance) {
                                        push(
                                            ViolationKind::ConclusionMismatch,
                                            format!("second premise {p} is not the instance {instance}"),
                                        );
                                    }
                                }
                                if let Some(p) = premise_formula(node, 2) {
                                    if !alpha_eq(p, &identity) {
                                        push(
                                            ViolationKind::ConclusionMismatch,
                                            format!("third premise {p} is not {identity}"),
                                        );
                                    }
                                }
                                if !class_fits(node, Role::Id, &Judgment::Formula(identity.clone())) {
                                    push(
                                        ViolationKind::DischargeShape,
                                        format!("id class does not assume {identity}"),
                                    );
                                }
                                if !class_fits(
                                    node,
                                    Role::WitnessFormula,
                                    &Judgment::Formula(instance.clone()),
                                ) {
                                    push(
                                        ViolationKind::DischargeShape,
                                        format!("witness-formula class does not assume {instance}"),
                                    );
                                }
                                if !class_fits(
                                    node,
                                    Role::WitnessExistence,
                                    &Judgment::Formula(Formula::ExistsBang(a_term.clone())),
                                ) {
                                    push(
                                        ViolationKind::DischargeShape,
                                        format!("witness-existence class does not assume E! {a}"),
                                    );
                                }
                                let iota_term = Term::Iota(x.clone(), f_body.clone());
                                if iota_term.params().contains(&a) {
                                    push(
                                        ViolationKind::EigenCondition,
                                        format!("eigenparameter {a} occurs in {iota_term}"),
                                    );
                                }
                                if t.params().contains(&a) {
                                    push(
                                        ViolationKind::EigenCondition,
                                        format!("eigenparameter {a} occurs in the term {t}"),
                                    );
                                }
                                let exempt = [
                                    node.discharge_label(Role::Id),
                                    node.discharge_label(Role::WitnessFormula),
                                    node.discharge_label(Role::WitnessExistence),
                                ];
                                for premise in node.premises() {
                                    if opens_mention(premise, &exempt, &a) {
                                        push(
                                            ViolationKind::EigenCondition,
                                            format!(
                                                "eigenparameter {a} occurs in an undischarged assumption"
                                            ),
                                        );
                                    }
                                }
                            }
                            _ => push(
                                ViolationKind::MalformedNode,
                                format!("third premise of {rule} must conclude a = {t} for a parameter a"),
                            ),
                        }
                    }
                    _ => push(
                        ViolationKind::ConclusionMismatch,
                        format!("conclusion of {rule} must be a description identity, found {c}"),
                    ),
                }
            }
        }
        RuleTag::IotaE1 => match (premise_formula(node, 0), premise_formula(node, 1)) {
            (Some(Formula::Eq(Term::Iota(x, f_body), t)), Some(Formula::Eq(u, t2))) => {
                if !alpha_eq_term(t2, t) {
                    push(
                        ViolationKind::ConclusionMismatch,
                        format!("premises equate different terms: {t} vs {t2}"),
                    );
                }
                let expected = f_body.subst_var(x, u);
                if let Some(c) = conclusion.formula() {
                    if !alpha_eq(c, &expected) {
                        push(
                            ViolationKind::ConclusionMismatch,
                            format!("conclusion {c} is not the instance {expected}"),
                        );
                    }
                }
                if sys.primed && (!t.is_atomic() || !u.is_atomic()) {
                    push(
                        ViolationKind::NonAtomicInstance,
                        format!("{rule} in {sys} requires atomic terms, found {u} and {t}"),
                    );
                }
            }
            (Some(p), _) if !matches!(p, Formula::Eq(Term::Iota(..), _)) => push(
                ViolationKind::MalformedNode,
                format!("major premise of {rule} must be a description identity, found {p}"),
            ),
            (_, Some(p)) => push(
                ViolationKind::MalformedNode,
                format!("minor premise of {rule} must be an identity, found {p}"),
            ),
            _ => {}
        },
        RuleTag::IotaE2 => {
            match (
                premise_formula(node, 0),
                premise_formula(node, 1),
                premise_formula(node, 2),
            ) {
                (
                    Some(Formula::Eq(Term::Iota(x, f_body), t)),
                    Some(minor),
                    Some(Formula::ExistsBang(u)),
                ) => {
                    let expected = f_body.subst_var(x, u);
                    if !alpha_eq(minor, &expected) {
                        push(
                            ViolationKind::ConclusionMismatch,
                            format!("second premise {minor} is not the instance {expected}"),
                        );
                    }
                    if let Some(c) = conclusion.formula() {
                        let concluded = Formula::Eq(u.clone(), t.clone());
                        if !alpha_eq(c, &concluded) {
                            push(
                                ViolationKind::ConclusionMismatch,
                                format!("expected {concluded}, concluded {c}"),
                            );
                        }
                    }
                    if sys.primed && (!t.is_atomic() || !u.is_atomic()) {
                        push(
                            ViolationKind::NonAtomicInstance,
                            format!("{rule} in {sys} requires atomic terms, found {u} and {t}"),
                        );
                    }
                }
                (Some(p), _, _) if !matches!(p, Formula::Eq(Term::Iota(..), _)) => push(
                    ViolationKind::MalformedNode,
                    format!("major premise of {rule} must be a description identity, found {p}"),
                ),
                (_, _, Some(p)) => push(
                    ViolationKind::MalformedNode,
                    format!("third premise of {rule} must be an existence formula, found {p}"),
                ),
                _ => {}
            }
        }
        RuleTag::IotaE3 => match premise_formula(node, 0) {
            Some(Formula::Eq(Term::Iota(..), t)) => {
                if let Some(c) = conclusion.formula() {
                    let expected = Formula::ExistsBang(t.clone());
                    if !alpha_eq(c, &expected) {
                        push(
                            ViolationKind::ConclusionMismatch,
                            format!("expected {expected}, concluded {c}"),
                        );
                    }
                }
            }
            Some(p) => push(
                ViolationKind::MalformedNode,
                format!("premise of {rule} must be a description identity, found {p}"),
            ),
            None => {}
        },
    }
}

/// All leaves of one class must carry α-equal judgments.
fn check_class_consistency(d: &Deduction, report: &mut CheckReport) {
    let mut representatives: Vec<(ClassLabel, Judgment, Position)> = Vec::new();
    for (position, node) in d.nodes() {
        if let Deduction::Assume { judgment, label } = node {
            match representatives.iter().find(|(l, _, _)| l == label) {
                None => representatives.push((*label, judgment.clone(), position)),
                Some((_, first, first_position)) => {
                    if !alpha_eq_judgment(first, judgment) {
                        report.violations.push(Violation {
                            position: position.clone(),
                            kind: ViolationKind::ClassJudgmentConflict,
                            message: format!(
                                "class {label} assumes {judgment} here but {first} at {}",
                                position_string(first_position)
                            ),
                        });
                    }
                }
            }
        }
    }
}

/// Discharge scoping: a label is discharged at most once on any
/// root-to-leaf branch, and every leaf of a discharged class lies in the
/// premise subtrees its role designates.
fn check_discharge_scoping(d: &Deduction, report: &mut CheckReport) {
    // Once per branch.
    fn walk(
        node: &Deduction,
        position: &mut Position,
        above: &mut Vec<ClassLabel>,
        report: &mut CheckReport,
    ) {
        let added = node
            .discharges()
            .iter()
            .map(|(_, label)| {
                if above.contains(label) {
                    report.violations.push(Violation {
                        position: position.clone(),
                        kind: ViolationKind::DischargeShape,
                        message: format!("label {label} is discharged twice on one branch"),
                    });
                }
                *label
            })
            .collect::<Vec<_>>();
        above.extend(added.iter().copied());
        for (i, premise) in node.premises().iter().enumerate() {
            position.push(i);
            walk(premise, position, above, report);
            position.pop();
        }
        above.truncate(above.len() - added.len());
    }
    walk(d, &mut Vec::new(), &mut Vec::new(), report);

    // Region containment: collect every leaf position per label, then
    // check each discharge entry against all of them.
    let mut leaf_positions: Vec<(ClassLabel, Position)> = Vec::new();
    for (position, node) in d.nodes() {
        if let Deduction::Assume { label, .. } = node {
            leaf_positions.push((*label, position));
        }
    }
    for (position, node) in d.nodes() {
        if node.rule().is_none() {
            continue;
        }
        let schema = rule_schema(node.rule().unwrap());
        for (role, label) in node.discharges() {
            let Some((_, regions)) = schema.roles.iter().find(|(r, _)| r == role) else {
                continue; // unknown role reported elsewhere
            };
            for (leaf_label, leaf_position) in &leaf_positions {
                if leaf_label != label {
                    continue;
                }
                let in_region = regions.iter().any(|&i| {
                    let mut prefix = position.clone();
                    prefix.push(i);
                    leaf_position.len() >= prefix.len()
                        && leaf_position[..prefix.len()] == prefix[..]
                });
                if !in_region {
                    report.violations.push(Violation {
                        position: leaf_position.clone(),
                        kind: ViolationKind::DischargeShape,
                        message: format!(
                            "leaf of class {label} lies outside the {role} subtree of the discharge at {}",
                            position_string(&position)
                        ),
                    });
                }
            }
        }
    }
}

/// Pure variable condition: the eigenparameter of an application occurs
/// nowhere in the deduction outside that application's designated premise
/// subtrees.
fn check_purity(d: &Deduction, report: &mut CheckReport) {
    let nodes = d.nodes();
    for (position, node) in &nodes {
        let Some(rule) = node.rule() else { continue };
        let scope = rule_schema(rule).eigen_scope;
        if scope.is_empty() {
            continue;
        }
        let Some(a) = eigen_of(node) else { continue };
        let scope_prefixes: Vec<Position> = scope
            .iter()
            .map(|&i| {
                let mut p = position.clone();
                p.push(i);
                p
            })
            .collect();
        for (other_position, other) in &nodes {
            let inside = scope_prefixes.iter().any(|prefix| {
                other_position.len() >= prefix.len() && other_position[..prefix.len()] == prefix[..]
            });
            if inside {
                continue;
            }
            if other.conclusion().params().contains(&a) {
                report.violations.push(Violation {
                    position: position.clone(),
                    kind: ViolationKind::PureVariable,
                    message: format!(
                        "eigenparameter {a} of the {rule} at {} occurs at {}",
                        position_string(position),
                        position_string(other_position)
                    ),
                });
            }
        }
    }
}

/// Γ entails A in the system by the given proof: the proof checks, its
/// conclusion is A (up to α), and its open assumptions all appear in Γ
/// (up to α).  Assumptions are read as sets: a deduction from some of the
/// formulas in Γ may use each of them any number of times.
pub fn entails(gamma: &[Judgment], a: &Judgment, sys: &SystemConfig, proof: &Deduction) -> bool {
    if !check(proof, sys).ok() {
        return false;
    }
    if !alpha_eq_judgment(proof.conclusion(), a) {
        return false;
    }
    proof
        .open_assumptions()
        .iter()
        .all(|(_, open)| gamma.iter().any(|g| alpha_eq_judgment(g, open)))
}

#[cfg(test)]
mod tests {
    use super::*;

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

    fn infer(
        rule: RuleTag,
        conclusion: Formula,
        premises: Vec<Deduction>,
        discharges: Vec<(Role, u32)>,
    ) -> Deduction {
        Deduction::infer(
            rule,
            Judgment::Formula(conclusion),
            premises,
            discharges
                .into_iter()
                .map(|(role, label)| (role, ClassLabel(label)))
                .collect(),
        )
    }

    fn kinds(report: &CheckReport) -> Vec<ViolationKind> {
        report.violations.iter().map(|v| v.kind).collect()
    }

    #[test]
    fn names_round_trip() {
        for tag in RuleTag::ALL {
            assert_eq!(RuleTag::from_name(tag.name()), Some(tag));
        }
        assert_eq!(RuleTag::from_name("noSuchRule"), None);
    }

    #[test]
    fn system_names_round_trip() {
        for sys in SystemConfig::ALL {
            assert!(sys.is_valid());
            assert_eq!(SystemConfig::from_name(sys.name()), Some(sys));
        }
        assert_eq!(SystemConfig::from_name("NF"), None);
        let bad = SystemConfig {
            jaskowski: true,
            iota: true,
            ..SystemConfig::INF
        };
        assert!(!bad.is_valid());
        let bad = SystemConfig {
            primed: true,
            ..SystemConfig::INF
        };
        assert!(!bad.is_valid());
    }

    #[test]
    fn rule_availability_per_system() {
        use RuleTag::*;
        assert!(SystemConfig::INF.allows(AndI));
        assert!(!SystemConfig::INF.allows(BotEC));
        assert!(!SystemConfig::INF.allows(IotaI));
        assert!(!SystemConfig::INF.allows(EqInG));
        assert!(!SystemConfig::INF.allows(AllIJ));

        assert!(SystemConfig::CNF.allows(BotEC));
        assert!(SystemConfig::CNF.allows(BotE));
        assert!(!SystemConfig::CNF.allows(AndI));
        assert!(!SystemConfig::CNF.allows(ExI));
        let mut full = SystemConfig::CNF;
        full.full_classical = true;
        assert!(full.allows(AndI));
        assert!(full.allows(ExE));

        assert!(SystemConfig::INF_IOTA.allows(IotaI));
        assert!(SystemConfig::INF_IOTA.allows(EqIn));
        assert!(!SystemConfig::INF_IOTA.allows(EqInG));
        assert!(SystemConfig::INF_IOTA_PRIME.allows(EqInG));
        assert!(!SystemConfig::INF_IOTA_PRIME.allows(EqIn));

        assert!(SystemConfig::INF_J.allows(AllIJ));
        assert!(SystemConfig::INF_J.allows(ExIJ));
        assert!(SystemConfig::INF_J.allows(EqE));
        assert!(!SystemConfig::INF_J.allows(AllI));
        assert!(!SystemConfig::INF_J.allows(Ad));
        assert!(!SystemConfig::INF_J.allows(EqIn));
        assert!(SystemConfig::CNF_J.allows(AdJ));
        assert!(!SystemConfig::CNF_J.allows(ExIJ));
    }

    #[test]
    fn schema_descriptions_match_the_displays() {
        assert_eq!(
            rule_schema(RuleTag::IotaE2).description,
            "premises [iota x. F = t; F_u^x; E! u], conclusion u = t"
        );
        assert_eq!(
            rule_schema(RuleTag::EqInG).description,
            "premises [E! t; C discharging a = t], conclusion C (eigenparameter a)"
        );
        assert_eq!(
            rule_schema(RuleTag::AdJ).description,
            "premise R(t1, ..., tn) or t1 = t2, conclusion term ti"
        );
        assert_eq!(elim_major(RuleTag::ImpE), Some(0));
        assert_eq!(elim_major(RuleTag::AndI), None);
        assert!(is_intro(RuleTag::IotaI));
        assert!(!is_intro(RuleTag::EqInG));
    }

    /// ∃!c ⊢ ∃x x=c: identity introduction then existential introduction,
    /// both existence premises in one class.
    fn hintikka_left_to_right() -> Deduction {
        let c = par("c");
        let t_eq = infer(
            RuleTag::EqIn,
            eq(c.clone(), c.clone()),
            vec![leaf(bang(c.clone()), 1)],
            vec![],
        );
        infer(
            RuleTag::ExI,
            exists("x", eq(var("x"), c.clone())),
            vec![t_eq, leaf(bang(c), 1)],
            vec![],
        )
    }

    /// ∃x x=c ⊢ ∃!c by existential elimination and atomic denotation.
    fn hintikka_right_to_left() -> Deduction {
        let c = par("c");
        let minor = infer(
            RuleTag::Ad,
            bang(c.clone()),
            vec![leaf(eq(par("a"), c.clone()), 2)],
            vec![],
        );
        infer(
            RuleTag::ExE,
            bang(c.clone()),
            vec![leaf(exists("x", eq(var("x"), c)), 1), minor],
            vec![(Role::WitnessFormula, 2), (Role::WitnessExistence, 3)],
        )
    }

    #[test]
    fn hintikka_deductions_check_in_inf() {
        let ltr = hintikka_left_to_right();
        let report = check(&ltr, &SystemConfig::INF);
        assert!(report.ok(), "{report}");

        let rtl = hintikka_right_to_left();
        let report = check(&rtl, &SystemConfig::INF);
        assert!(report.ok(), "{report}");
        assert_eq!(eigen_of(rtl.locate(&[]).unwrap()), Some("a".to_string()));
    }

    /// ∃!t ⊢ ιx(x=t) = t: the cancellation deduction, with the
    /// witness-existence class discharged vacuously.
    fn cancellation() -> Deduction {
        let t = cst("t");
        let a_eq_t = eq(par("a"), t.clone());
        infer(
            RuleTag::IotaI,
            eq(iota("x", eq(var("x"), t.clone())), t.clone()),
            vec![leaf(bang(t), 1), leaf(a_eq_t.clone(), 2), leaf(a_eq_t, 3)],
            vec![
                (Role::Id, 2),
                (Role::WitnessFormula, 3),
                (Role::WitnessExistence, 4),
            ],
        )
    }

    #[test]
    fn cancellation_checks_in_iota_systems_only() {
        let ca = cancellation();
        assert!(
            check(&ca, &SystemConfig::INF_IOTA).ok(),
            "{}",
            check(&ca, &SystemConfig::INF_IOTA)
        );
        assert!(check(&ca, &SystemConfig::INF_IOTA_PRIME).ok());
        let report = check(&ca, &SystemConfig::INF);
        assert!(!report.ok());
        assert!(kinds(&report).contains(&ViolationKind::IllegalRule));
        assert!(kinds(&report).contains(&ViolationKind::IllegalJudgment));
    }

    #[test]
    fn entailment_examples() {
        let t = cst("t");
        let ca = cancellation();
        assert!(entails(
            &[Judgment::Formula(bang(t.clone()))],
            &Judgment::Formula(eq(iota("y", eq(var("y"), t.clone())), t.clone())),
            &SystemConfig::INF_IOTA,
            &ca
        ));
        // Weakening: extra members of Γ do not hurt.
        assert!(entails(
            &[
                Judgment::Formula(bang(t.clone())),
                Judgment::Formula(Formula::Bot)
            ],
            &Judgment::Formula(eq(iota("y", eq(var("y"), t.clone())), t)),
            &SystemConfig::INF_IOTA,
            &ca
        ));
        // An unlisted open assumption fails.
        assert!(!entails(
            &[],
            &Judgment::Formula(exists("x", eq(var("x"), par("c")))),
            &SystemConfig::INF,
            &hintikka_left_to_right()
        ));
    }

    /// Identity symmetry t = s ⊢ s = t via the generalised identity
    /// introduction.
    fn symmetry() -> Deduction {
        let (t, s, a) = (cst("t"), cst("s"), par("a"));
        let major = infer(
            RuleTag::Ad,
            bang(t.clone()),
            vec![leaf(eq(t.clone(), s.clone()), 1)],
            vec![],
        );
        let step1 = infer(
            RuleTag::EqE,
            eq(a.clone(), s.clone()),
            vec![
                leaf(eq(t.clone(), s.clone()), 1),
                leaf(eq(a.clone(), t.clone()), 2),
            ],
            vec![],
        );
        let step2 = infer(
            RuleTag::EqE,
            eq(s.clone(), t.clone()),
            vec![step1, leaf(eq(a.clone(), t.clone()), 2)],
            vec![],
        );
        infer(
            RuleTag::EqInG,
            eq(s, t),
            vec![major, step2],
            vec![(Role::Id, 2)],
        )
    }

    #[test]
    fn symmetry_checks_in_the_primed_system() {
        let proof = symmetry();
        let report = check(&proof, &SystemConfig::INF_IOTA_PRIME);
        assert!(report.ok(), "{report}");
        assert!(entails(
            &[Judgment::Formula(eq(cst("t"), cst("s")))],
            &Judgment::Formula(eq(cst("s"), cst("t"))),
            &SystemConfig::INF_IOTA_PRIME,
            &proof
        ));
        // The generalised rule does not exist in the unprimed system.
        assert!(
            kinds(&check(&proof, &SystemConfig::INF_IOTA)).contains(&ViolationKind::IllegalRule)
        );
    }

    #[test]
    fn universal_elimination_instance_restriction() {
        let description = iota("y", pred("G", vec![var("y")]));
        let d = infer(
            RuleTag::AllE,
            pred("P", vec![description.clone()]),
            vec![
                leaf(forall("x", pred("P", vec![var("x")])), 1),
                leaf(bang(description), 2),
            ],
            vec![],
        );
        assert!(check(&d, &SystemConfig::INF_IOTA).ok());
        let report = check(&d, &SystemConfig::INF_IOTA_PRIME);
        assert_eq!(kinds(&report), vec![ViolationKind::NonAtomicInstance]);
    }

    #[test]
    fn eq_elimination_must_conclude_atomic_formulas() {
        let (a, b) = (par("a"), par("b"));
        let conj = |t: Term| {
            Formula::And(
                Box::new(pred("P", vec![t.clone()])),
                Box::new(pred("Q", vec![t])),
            )
        };
        let d = infer(
            RuleTag::EqE,
            conj(b.clone()),
            vec![leaf(eq(a.clone(), b), 1), leaf(conj(a), 2)],
            vec![],
        );
        let report = check(&d, &SystemConfig::INF);
        assert_eq!(kinds(&report), vec![ViolationKind::NonAtomicEqElim]);
    }

    #[test]
    fn eq_elimination_replacement_checking() {
        let (a, b) = (par("a"), par("b"));
        // Replacing inside a description body is fine.
        let d = infer(
            RuleTag::EqE,
            bang(iota("x", pred("G", vec![var("x"), b.clone()]))),
            vec![
                leaf(eq(a.clone(), b.clone()), 1),
                leaf(bang(iota("x", pred("G", vec![var("x"), a.clone()]))), 2),
            ],
            vec![],
        );
        assert!(check(&d, &SystemConfig::INF_IOTA).ok());
        // A conclusion unrelated to the premise is caught.
        let d = infer(
            RuleTag::EqE,
            pred("P", vec![par("c")]),
            vec![leaf(eq(a, b), 1), leaf(pred("Q", vec![par("c")]), 2)],
            vec![],
        );
        assert_eq!(
            kinds(&check(&d, &SystemConfig::INF)),
            vec![ViolationKind::ConclusionMismatch]
        );
    }

    #[test]
    fn falsum_rules_enforce_their_conclusion_restrictions() {
        let complex = Formula::And(Box::new(pred("P", vec![])), Box::new(pred("Q", vec![])));
        let d = infer(
            RuleTag::BotE,
            complex.clone(),
            vec![leaf(Formula::Bot, 1)],
            vec![],
        );
        assert_eq!(
            kinds(&check(&d, &SystemConfig::INF)),
            vec![ViolationKind::NonPrimeBotElim]
        );

        // Vacuous classical falsum elimination: still prime only.
        let d = infer(
            RuleTag::BotEC,
            complex.clone(),
            vec![leaf(Formula::Bot, 1)],
            vec![(Role::Negation, 2)],
        );
        assert_eq!(
            kinds(&check(&d, &SystemConfig::CNF)),
            vec![ViolationKind::NonPrimeBotElim]
        );

        // Non-vacuous: atomic conclusions allowed, complex still rejected.
        let atomic_not_prime = pred("P", vec![iota("x", pred("G", vec![var("x")]))]);
        let d = infer(
            RuleTag::BotEC,
            atomic_not_prime.clone(),
            vec![infer(
                RuleTag::ImpE,
                Formula::Bot,
                vec![
                    leaf(atomic_not_prime.clone().negated(), 2),
                    leaf(atomic_not_prime.clone(), 3),
                ],
                vec![],
            )],
            vec![(Role::Negation, 2)],
        );
        let report = check(&d, &SystemConfig::CNF_IOTA);
        assert!(report.ok(), "{report}");

        let d = infer(
            RuleTag::BotEC,
            complex.clone(),
            vec![infer(
                RuleTag::ImpE,
                Formula::Bot,
                vec![leaf(complex.clone().negated(), 2), leaf(complex.clone(), 3)],
                vec![],
            )],
            vec![(Role::Negation, 2)],
        );
        let full = SystemConfig {
            full_classical: true,
            ..SystemConfig::CNF
        };
        assert_eq!(
            kinds(&check(&d, &full)),
            vec![ViolationKind::NonAtomicBotElimC]
        );
    }

    #[test]
    fn denotation_on_description_identities_is_tag_sensitive() {
        let d_term = iota("x", pred("G", vec![var("x")]));
        let t = cst("t");
        // Concluding that the right term denotes must be iotaE3 …
        let wrong = infer(
            RuleTag::Ad,
            bang(t.clone()),
            vec![leaf(eq(d_term.clone(), t.clone()), 1)],
            vec![],
        );
        assert!(
            kinds(&check(&wrong, &SystemConfig::INF_IOTA)).contains(&ViolationKind::WrongIotaTag)
        );
        let right = infer(
            RuleTag::IotaE3,
            bang(t.clone()),
            vec![leaf(eq(d_term.clone(), t.clone()), 1)],
            vec![],
        );
        assert!(check(&right, &SystemConfig::INF_IOTA).ok());
        // … while concluding that the left (description) term denotes is AD.
        let left = infer(
            RuleTag::Ad,
            bang(d_term.clone()),
            vec![leaf(eq(d_term, t), 1)],
            vec![],
        );
        assert!(check(&left, &SystemConfig::INF_IOTA).ok());
    }

    #[test]
    fn denotation_premise_shape() {
        let d = infer(
            RuleTag::Ad,
            bang(par("a")),
            vec![leaf(bang(par("a")), 1)],
            vec![],
        );
        assert!(kinds(&check(&d, &SystemConfig::INF)).contains(&ViolationKind::MalformedNode));
        let d = infer(
            RuleTag::Ad,
            bang(par("a")),
            vec![leaf(pred("P", vec![par("b")]), 1)],
            vec![],
        );
        assert!(kinds(&check(&d, &SystemConfig::INF)).contains(&ViolationKind::ConclusionMismatch));
    }

    #[test]
    fn eigen_condition_on_universal_introduction() {
        // Premise depends on an open assumption mentioning the
        // eigenparameter.
        let d = infer(
            RuleTag::AllI,
            forall("x", pred("P", vec![var("x")])),
            vec![leaf(pred("P", vec![par("a")]), 2)],
            vec![(Role::WitnessExistence, 1)],
        );
        let report = check(&d, &SystemConfig::INF);
        assert_eq!(kinds(&report), vec![ViolationKind::EigenCondition]);

        // The proper form: P(a) comes from ∀xP(x) and the discharged ∃!a.
        let proper = infer(
            RuleTag::AllI,
            forall("x", pred("P", vec![var("x")])),
            vec![infer(
                RuleTag::AllE,
                pred("P", vec![par("a")]),
                vec![
                    leaf(forall("x", pred("P", vec![var("x")])), 1),
                    leaf(bang(par("a")), 2),
                ],
                vec![],
            )],
            vec![(Role::WitnessExistence, 2)],
        );
        assert!(check(&proper, &SystemConfig::INF).ok());
    }

    #[test]
    fn purity_sweep_catches_leaks() {
        // A valid universal introduction used inside a conjunction whose
        // other limb mentions the eigenparameter.
        let all_i = infer(
            RuleTag::AllI,
            forall("x", pred("P", vec![var("x")])),
            vec![infer(
                RuleTag::AllE,
                pred("P", vec![par("a")]),
                vec![
                    leaf(forall("x", pred("P", vec![var("x")])), 1),
                    leaf(bang(par("a")), 2),
                ],
                vec![],
            )],
            vec![(Role::WitnessExistence, 2)],
        );
        let d = infer(
            RuleTag::AndI,
            Formula::And(
                Box::new(forall("x", pred("P", vec![var("x")]))),
                Box::new(pred("Q", vec![par("a")])),
            ),
            vec![all_i, leaf(pred("Q", vec![par("a")]), 3)],
            vec![],
        );
        let report = check(&d, &SystemConfig::INF);
        assert!(kinds(&report).contains(&ViolationKind::PureVariable));
    }

    #[test]
    fn discharge_twice_on_a_branch_is_rejected() {
        let p = pred("P", vec![par("a")]);
        let inner = infer(
            RuleTag::ImpI,
            Formula::Imp(Box::new(p.clone()), Box::new(p.clone())),
            vec![leaf(p.clone(), 1)],
            vec![(Role::Antecedent, 1)],
        );
        let outer = infer(
            RuleTag::ImpI,
            Formula::Imp(
                Box::new(p.clone()),
                Box::new(Formula::Imp(Box::new(p.clone()), Box::new(p.clone()))),
            ),
            vec![inner],
            vec![(Role::Antecedent, 1)],
        );
        let report = check(&outer, &SystemConfig::INF);
        assert!(kinds(&report).contains(&ViolationKind::DischargeShape));
    }

    #[test]
    fn class_leaves_must_sit_in_their_role_region() {
        // ∨E discharging class 2 as case-left, but a leaf of class 2 sits
        // in the right case.
        let p = pred("P", vec![]);
        let q = pred("Q", vec![]);
        let or = Formula::Or(Box::new(p.clone()), Box::new(q.clone()));
        let d = infer(
            RuleTag::OrE,
            p.clone(),
            vec![
                leaf(or, 1),
                leaf(p.clone(), 2),
                infer(
                    RuleTag::BotE,
                    p.clone(),
                    vec![infer(
                        RuleTag::ImpE,
                        Formula::Bot,
                        vec![leaf(p.clone().negated(), 4), leaf(p.clone(), 2)],
                        vec![],
                    )],
                    vec![],
                ),
            ],
            vec![(Role::CaseLeft, 2), (Role::CaseRight, 3)],
        );
        let report = check(&d, &SystemConfig::INF);
        assert!(
            kinds(&report).contains(&ViolationKind::DischargeShape),
            "{report}"
        );
    }

    #[test]
    fn class_judgments_must_agree() {
        let d = infer(
            RuleTag::AndI,
            Formula::And(Box::new(pred("P", vec![])), Box::new(pred("Q", vec![]))),
            vec![leaf(pred("P", vec![]), 1), leaf(pred("Q", vec![]), 1)],
            vec![],
        );
        let report = check(&d, &SystemConfig::INF);
        assert!(kinds(&report).contains(&ViolationKind::ClassJudgmentConflict));
    }

    #[test]
    fn jaskowski_rules_and_judgments() {
        let t = cst("t");
        // ∀xP(x), t ⊢ P(t).
        let d = Deduction::infer(
            RuleTag::AllEJ,
            Judgment::Formula(pred("P", vec![t.clone()])),
            vec![
                leaf(forall("x", pred("P", vec![var("x")])), 1),
                Deduction::assume(Judgment::Term(t.clone()), ClassLabel(2)),
            ],
            vec![],
        );
        let report = check(&d, &SystemConfig::INF_J);
        assert!(report.ok(), "{report}");

        // Term judgments are illegal outside the Jaśkowski systems.
        let stray = Deduction::assume(Judgment::Term(t.clone()), ClassLabel(1));
        assert!(kinds(&check(&stray, &SystemConfig::INF)).contains(&ViolationKind::IllegalJudgment));

        // The existence predicate is gone in the Jaśkowski systems.
        let stray = leaf(bang(t.clone()), 1);
        assert!(
            kinds(&check(&stray, &SystemConfig::INF_J)).contains(&ViolationKind::IllegalJudgment)
        );

        // ADJ concludes a term from an atomic premise.
        let adj = Deduction::infer(
            RuleTag::AdJ,
            Judgment::Term(t.clone()),
            vec![leaf(pred("P", vec![t.clone(), cst("s")]), 1)],
            vec![],
        );
        assert!(check(&adj, &SystemConfig::INF_J).ok());

        // ∀I^J with its term-judgment discharge.
        let all_ij = Deduction::infer(
            RuleTag::AllIJ,
            Judgment::Formula(forall("x", pred("P", vec![var("x")]))),
            vec![Deduction::infer(
                RuleTag::AllEJ,
                Judgment::Formula(pred("P", vec![par("a")])),
                vec![
                    leaf(forall("x", pred("P", vec![var("x")])), 1),
                    Deduction::assume(Judgment::Term(par("a")), ClassLabel(2)),
                ],
                vec![],
            )],
            vec![(Role::WitnessTerm, ClassLabel(2))],
        );
        let report = check(&all_ij, &SystemConfig::INF_J);
        assert!(report.ok(), "{report}");
        assert_eq!(eigen_of(&all_ij), Some("a".to_string()));
    }

    #[test]
    fn bot_e_is_a_special_case_of_the_classical_rule() {
        let d = infer(
            RuleTag::BotE,
            pred("P", vec![]),
            vec![leaf(Formula::Bot, 1)],
            vec![],
        );
        assert!(check(&d, &SystemConfig::INF).ok());
        assert!(check(&d, &SystemConfig::CNF).ok());
        assert!(check(&d, &SystemConfig::CNF_J).ok());
    }

    #[test]
    fn lexical_classes_are_enforced_in_judgments() {
        // "x" is a bound-variable name and cannot serve as a parameter.
        let d = leaf(pred("P", vec![Term::Param("x".into())]), 1);
        assert!(kinds(&check(&d, &SystemConfig::INF)).contains(&ViolationKind::IllegalJudgment));
        // Free variables are not judgments.
        let d = leaf(pred("P", vec![var("x")]), 1);
        assert!(kinds(&check(&d, &SystemConfig::INF)).contains(&ViolationKind::IllegalJudgment));
    }

    #[test]
    fn check_reports_every_violation() {
        // Two unrelated problems in one tree: both reported.
        let d = infer(
            RuleTag::AndI,
            Formula::And(Box::new(pred("P", vec![])), Box::new(pred("Q", vec![]))),
            vec![
                infer(
                    RuleTag::BotE,
                    pred("P", vec![]).negated(),
                    vec![leaf(Formula::Bot, 1)],
                    vec![],
                ),
                infer(
                    RuleTag::AndEl,
                    pred("Q", vec![]),
                    vec![leaf(pred("R", vec![]), 2)],
                    vec![],
                ),
            ],
            vec![],
        );
        let report = check(&d, &SystemConfig::INF);
        assert!(kinds(&report).contains(&ViolationKind::NonPrimeBotElim));
        assert!(kinds(&report).contains(&ViolationKind::MalformedNode));
        assert!(kinds(&report).contains(&ViolationKind::ConclusionMismatch));
    }
}
