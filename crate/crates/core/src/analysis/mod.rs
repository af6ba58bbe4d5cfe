//! Structural analysis of checked deductions: segments, maximal segments
//! of every species, deduction rank, paths with their E/M/I decomposition,
//! and the subformula-property reports.
//!
//! A *segment* is a maximal chain of judgment occurrences that a single
//! formula rides through the rules that merely pass their conclusion
//! along: the minor premises of `∨E`/`∃E` (and their Jaśkowski variants)
//! and, in the primed systems, the minor premise of `=I^nG`.  Two further
//! chain shapes extend the notion: chains of occurrences threaded through
//! the minor premise of a non-vacuous `=E`, and — in the classical ι
//! system — chains stepping from the minor premise of an `→E` whose major
//! premise is discharged by `⊥E_C` to that `⊥E_C`'s conclusion.
//!
//! A segment is *maximal* when its shape witnesses a removable detour.
//! Five species are tracked; a deduction is in normal form exactly when
//! none are present, and the rank ⟨highest degree, total length at that
//! degree⟩ over the detour and reductio species is the measure the
//! normalization driver sends downward.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Range;

use crate::calculi::{elim_major, is_intro, position_string, RuleTag, SystemConfig};
use crate::deduction::{ClassLabel, Deduction, Judgment, Position};
use crate::syntax::{alpha_eq, alpha_eq_term, is_subformula, Formula, Term};

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnalysisError {
    /// The operation is deliberately not defined for this system: path
    /// theory and the subformula reports cover the ι-free systems only,
    /// and the term-judgment report covers `INF-J` alone.
    #[error("{operation} is not available for {system}")]
    UnsupportedSystem {
        system: &'static str,
        operation: &'static str,
    },
    /// An operation whose precondition is normal form was handed a
    /// deduction that still contains a maximal segment.
    #[error("deduction is not in normal form (maximal segment at {})", position_string(position))]
    NotNormal { position: Position },
}

// ---------------------------------------------------------------------------
// Segments and maximal segments
// ---------------------------------------------------------------------------

/// How the members of a segment are linked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SegmentKind {
    /// Linked through `∨E`/`∃E`/`∃E^J` minor premises and, in primed
    /// systems, `=I^nG` minor premises.  One-formula segments are plain.
    Plain,
    /// A sequence of plain segments, each entering the minor premise of a
    /// non-vacuous `=E` whose conclusion heads the next.
    EqElimChain,
    /// Steps from the minor premise of an `→E` whose major premise is an
    /// assumption discharged by `⊥E_C` to that `⊥E_C`'s conclusion.
    ReductioChain,
}

/// A segment: the positions of its judgment occurrences, in order from
/// first to last, with the linking shape that strings them together.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub positions: Vec<Position>,
    pub kind: SegmentKind,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// The species of maximal segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Species {
    /// An intro/elim detour or a permutative stage: the segment ends at
    /// the major premise of an elimination rule, and a one-formula
    /// segment is in addition concluded by an introduction rule.
    IntroElim,
    /// A self-identity `t = t` concluded by the identity introduction and
    /// consumed by the denotation rule (per-system variants; in primed
    /// systems also the class assumptions `a = t` of `=I^nG` consumed by
    /// a denotation rule concluding the existence of `t`).
    Identity,
    /// An existence formula concluded by the denotation rule from a
    /// self-identity and handed straight back to the identity
    /// introduction (in `INF-J`/`CNF-J`, the analogous term judgment).
    Existence,
    /// A chain through `=E` minors that ends in a denotation premise or
    /// consists entirely of existence formulas.
    EqElim,
    /// A `⊥E_C` (or `⊥E`) conclusion consumed as the major premise of an
    /// ι elimination or the premise of the denotation rule, together with
    /// the reductio chain that feeds it.  Tracked in `CNFi-prime` only.
    Reductio,
}

impl Species {
    pub fn name(self) -> &'static str {
        match self {
            Species::IntroElim => "detour",
            Species::Identity => "identity",
            Species::Existence => "existence",
            Species::EqElim => "identity-elim",
            Species::Reductio => "reductio",
        }
    }
}

impl fmt::Display for Species {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A maximal segment: the segment, its species, and the degree of the
/// judgment at its last occurrence (for chains through `=E`, the formulas
/// vary along the chain and the last one is the operative one).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaximalSegment {
    pub segment: Segment,
    pub species: Species,
    pub degree: u32,
}

/// The rank of a deduction: the highest degree among maximal segments of
/// the detour and reductio species (the ones the reduction procedures
/// measure), and the total length of those segments at that degree.
/// The identity, existence and identity-elim species are not counted;
/// they are removed by the purge phase without touching the rank.
/// Ordered lexicographically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rank {
    pub degree: u32,
    pub length: usize,
}

impl Rank {
    pub const ZERO: Rank = Rank {
        degree: 0,
        length: 0,
    };
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.degree, self.length)
    }
}

// ---------------------------------------------------------------------------
// The node table
// ---------------------------------------------------------------------------

/// A flattened view of a deduction: nodes in preorder with parent/child
/// indices, the discharging node of every class label, and every leaf of
/// every class.  All segment and path computations work over this table.
struct Table<'a> {
    nodes: Vec<(Position, &'a Deduction)>,
    parent: Vec<Option<(usize, usize)>>,
    children: Vec<Vec<usize>>,
    discharger: BTreeMap<ClassLabel, usize>,
    leaves: BTreeMap<ClassLabel, Vec<usize>>,
}

impl<'a> Table<'a> {
    fn build(d: &'a Deduction) -> Table<'a> {
        let nodes = d.nodes();
        let mut index: BTreeMap<Position, usize> = BTreeMap::new();
        for (i, (position, _)) in nodes.iter().enumerate() {
            index.insert(position.clone(), i);
        }
        let mut parent = vec![None; nodes.len()];
        let mut children = vec![Vec::new(); nodes.len()];
        for (i, (position, _)) in nodes.iter().enumerate().skip(1) {
            let p = index[&position[..position.len() - 1]];
            parent[i] = Some((p, *position.last().expect("non-root position")));
            children[p].push(i);
        }
        let mut discharger = BTreeMap::new();
        let mut leaves: BTreeMap<ClassLabel, Vec<usize>> = BTreeMap::new();
        for (i, (_, node)) in nodes.iter().enumerate() {
            match node {
                Deduction::Assume { label, .. } => leaves.entry(*label).or_default().push(i),
                Deduction::Infer { discharges, .. } => {
                    for (_, label) in discharges {
                        discharger.insert(*label, i);
                    }
                }
            }
        }
        Table {
            nodes,
            parent,
            children,
            discharger,
            leaves,
        }
    }

    fn len(&self) -> usize {
        self.nodes.len()
    }

    fn rule(&self, i: usize) -> Option<RuleTag> {
        self.nodes[i].1.rule()
    }

    fn judgment(&self, i: usize) -> &Judgment {
        self.nodes[i].1.conclusion()
    }

    fn formula(&self, i: usize) -> Option<&Formula> {
        self.judgment(i).formula()
    }

    fn child(&self, i: usize, slot: usize) -> Option<usize> {
        self.children[i].get(slot).copied()
    }

    /// The label of an assumption leaf.
    fn leaf_label(&self, i: usize) -> Option<ClassLabel> {
        match self.nodes[i].1 {
            Deduction::Assume { label, .. } => Some(*label),
            Deduction::Infer { .. } => None,
        }
    }

    /// The rule that discharges a leaf's class, if any.
    fn discharging_rule(&self, i: usize) -> Option<RuleTag> {
        let label = self.leaf_label(i)?;
        self.rule(*self.discharger.get(&label)?)
    }

    /// The next occurrence of a plain segment: the parent's conclusion
    /// when this occurrence sits in a pass-through minor-premise slot.
    fn plain_next(&self, i: usize) -> Option<usize> {
        let (p, slot) = self.parent[i]?;
        match self.rule(p)? {
            RuleTag::OrE if slot == 1 || slot == 2 => Some(p),
            RuleTag::ExE | RuleTag::ExEJ | RuleTag::EqInG if slot == 1 => Some(p),
            _ => None,
        }
    }

    /// All plain segments, one per occurrence that no plain link reaches.
    /// Segments that merge at a multi-minor case analysis share their
    /// tails; each is reported from its own head.
    fn plain_segments(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        for i in 0..self.len() {
            if self
                .rule(i)
                .is_some_and(|tag| matches!(tag, RuleTag::OrE | RuleTag::ExE | RuleTag::ExEJ | RuleTag::EqInG))
            {
                continue;
            }
            let mut segment = vec![i];
            let mut current = i;
            while let Some(p) = self.plain_next(current) {
                segment.push(p);
                current = p;
            }
            out.push(segment);
        }
        out
    }

    /// The reductio step from an occurrence: when it is the minor premise
    /// of an `→E` whose major premise is an assumption discharged by
    /// `⊥E_C`, the chain continues at that `⊥E_C`'s conclusion.
    fn reductio_next(&self, i: usize) -> Option<usize> {
        let (p, slot) = self.parent[i]?;
        if self.rule(p) != Some(RuleTag::ImpE) || slot != 1 {
            return None;
        }
        let major = self.child(p, 0)?;
        let label = self.leaf_label(major)?;
        let discharger = *self.discharger.get(&label)?;
        (self.rule(discharger) == Some(RuleTag::BotEC)).then_some(discharger)
    }

    /// All reductio chains.  A chain never opens at a `⊥E_C` conclusion;
    /// such a conclusion only continues a chain that reaches it.
    fn reductio_chains(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        for i in 0..self.len() {
            if self.reductio_next(i).is_none() || self.rule(i) == Some(RuleTag::BotEC) {
                continue;
            }
            let mut chain = vec![i];
            let mut current = i;
            while let Some(b) = self.reductio_next(current) {
                chain.push(b);
                current = b;
            }
            out.push(chain);
        }
        out
    }

    /// Whether an `=E` node rewrites nothing: its major premise is a
    /// self-identity.  Vacuous applications contribute no chain links —
    /// they are removed eagerly by the rewrite engine and excluded from
    /// segment analysis.
    fn eqe_vacuous(&self, e: usize) -> bool {
        let Some(major) = self.child(e, 0) else {
            return true;
        };
        match self.formula(major) {
            Some(Formula::Eq(l, r)) => alpha_eq_term(l, r),
            _ => true,
        }
    }

    /// Chains of plain segments through non-vacuous `=E` minors, as lists
    /// of indices into `segments`.  Every chain has at least two members.
    fn eqe_chains(&self, segments: &[Vec<usize>]) -> Vec<Vec<usize>> {
        let heads: BTreeMap<usize, usize> = segments
            .iter()
            .enumerate()
            .map(|(k, segment)| (segment[0], k))
            .collect();
        let link = |k: usize| -> Option<usize> {
            let last = *segments[k].last().expect("segments are non-empty");
            let (p, slot) = self.parent[last]?;
            if self.rule(p) == Some(RuleTag::EqE) && slot == 1 && !self.eqe_vacuous(p) {
                heads.get(&p).copied()
            } else {
                None
            }
        };
        let mut out = Vec::new();
        for k in 0..segments.len() {
            if link(k).is_none() {
                continue;
            }
            // A chain member whose head is itself a live `=E` conclusion
            // continues an earlier chain rather than opening one.
            let head = segments[k][0];
            if self.rule(head) == Some(RuleTag::EqE) && !self.eqe_vacuous(head) {
                continue;
            }
            let mut chain = vec![k];
            let mut current = k;
            while let Some(next) = link(current) {
                chain.push(next);
                current = next;
            }
            out.push(chain);
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Maximal-segment detection
// ---------------------------------------------------------------------------

fn judgment_degree(j: &Judgment) -> u32 {
    match j {
        Judgment::Formula(f) => f.degree(),
        Judgment::Term(t) => t.degree(),
    }
}

/// `Some(term)` when the formula is a self-identity `t = t`.
fn self_identity(f: &Formula) -> Option<&Term> {
    match f {
        Formula::Eq(l, r) if alpha_eq_term(l, r) => Some(l),
        _ => None,
    }
}

/// Whether the premise of a single-premise node is a self-identity on
/// the given term — the coherence that makes an existence conclusion a
/// genuine round trip (`t = t` up to the denotation rule and back).
fn premise_self_identity(table: &Table, node: usize, t: &Term) -> bool {
    let Some(premise) = table.child(node, 0) else {
        return false;
    };
    match table.formula(premise) {
        Some(Formula::Eq(l, r)) => alpha_eq_term(l, r) && alpha_eq_term(l, t),
        _ => false,
    }
}

/// The identity and existence species for one plain segment, in the
/// variant the system calls for.  Checked before the detour species so
/// that a segment consumed by `ιE3` — an elimination — is claimed by the
/// identity family it belongs to rather than double-reported.
fn identity_family(
    table: &Table,
    sys: &SystemConfig,
    segment: &[usize],
) -> Option<Species> {
    use RuleTag::*;
    let first = segment[0];
    let last = *segment.last().expect("segments are non-empty");
    let (p, slot) = table.parent[last]?;
    let consumer = table.rule(p)?;

    if sys.jaskowski {
        match table.judgment(last) {
            Judgment::Formula(f) => {
                if self_identity(f).is_some()
                    && table.rule(first) == Some(EqInJ)
                    && consumer == AdJ
                    && slot == 0
                {
                    return Some(Species::Identity);
                }
            }
            Judgment::Term(t) => {
                if table.rule(first) == Some(AdJ)
                    && premise_self_identity(table, first, t)
                    && consumer == EqInJ
                    && slot == 0
                {
                    return Some(Species::Existence);
                }
            }
        }
        return None;
    }

    let f = table.formula(last)?;
    if sys.primed {
        if matches!(consumer, Ad | IotaE3) && slot == 0 {
            if self_identity(f).is_some()
                && segment[1..].iter().any(|&n| table.rule(n) == Some(EqInG))
            {
                // A self-identity threaded through the minor premise of a
                // generalised identity introduction and handed to the
                // denotation rule.
                return Some(Species::Identity);
            }
            if let Formula::Eq(_, r) = f {
                // A class assumption of a generalised identity
                // introduction, consumed by the denotation rule to
                // conclude the existence of the class's right-hand term.
                let opens_at_class_leaf = table
                    .leaf_label(first)
                    .and_then(|label| table.discharger.get(&label))
                    .is_some_and(|&g| table.rule(g) == Some(EqInG));
                let concludes_right = match table.formula(p) {
                    Some(Formula::ExistsBang(u)) => alpha_eq_term(u, r),
                    _ => false,
                };
                if opens_at_class_leaf && concludes_right {
                    return Some(Species::Identity);
                }
            }
        }
        if let Formula::ExistsBang(t) = f {
            // Existence conclusions on a parameter are never counted:
            // they are the constructions that derive a formula different
            // from their premise, not detours.
            let concludes_matching_identity = match table.formula(p) {
                Some(conclusion) => {
                    self_identity(conclusion).is_some_and(|u| alpha_eq_term(u, t))
                }
                None => false,
            };
            if !matches!(t, Term::Param(_))
                && matches!(table.rule(first), Some(Ad | IotaE3))
                && premise_self_identity(table, first, t)
                && consumer == EqInG
                && slot == 0
                && concludes_matching_identity
            {
                return Some(Species::Existence);
            }
        }
        return None;
    }

    if matches!(consumer, Ad | IotaE3) && slot == 0 {
        if self_identity(f).is_some() && table.rule(first) == Some(EqIn) {
            return Some(Species::Identity);
        }
    }
    if let Formula::ExistsBang(t) = f {
        if matches!(table.rule(first), Some(Ad | IotaE3))
            && premise_self_identity(table, first, t)
            && consumer == EqIn
            && slot == 0
        {
            return Some(Species::Existence);
        }
    }
    None
}

/// The species of one plain segment, if any.
fn plain_species(table: &Table, sys: &SystemConfig, segment: &[usize]) -> Option<Species> {
    if let Some(species) = identity_family(table, sys, segment) {
        return Some(species);
    }
    // Intro/elim detours and permutative stages: the segment ends at the
    // major premise of an elimination rule, and a one-formula segment is
    // in addition concluded by an introduction.  `=E` majors end paths
    // instead of continuing them and are deliberately not counted here;
    // the chain species covers the identity elimination.
    let last = *segment.last().expect("segments are non-empty");
    let (p, slot) = table.parent[last]?;
    let consumer = table.rule(p)?;
    if consumer == RuleTag::EqE || elim_major(consumer) != Some(slot) {
        return None;
    }
    table.formula(last)?;
    if segment.len() == 1 && !table.rule(segment[0]).is_some_and(is_intro) {
        return None;
    }
    Some(Species::IntroElim)
}

/// Whether a chain of plain segments through `=E` minors is maximal: its
/// last segment enters the denotation rule, or every formula on it is an
/// existence predication (the latter shape cannot arise in the Jaśkowski
/// systems, which derive term judgments instead).
fn eqe_chain_maximal(
    table: &Table,
    sys: &SystemConfig,
    segments: &[Vec<usize>],
    chain: &[usize],
) -> bool {
    use RuleTag::*;
    let tail = *segments[*chain.last().expect("chains are non-empty")]
        .last()
        .expect("segments are non-empty");
    if let Some((p, 0)) = table.parent[tail] {
        let denotation = match table.rule(p) {
            Some(AdJ) => sys.jaskowski,
            Some(Ad | IotaE3) => !sys.jaskowski,
            _ => false,
        };
        if denotation {
            return true;
        }
    }
    !sys.jaskowski
        && chain.iter().all(|&k| {
            matches!(
                table.formula(*segments[k].last().expect("segments are non-empty")),
                Some(Formula::ExistsBang(_))
            )
        })
}

fn make_maximal(
    table: &Table,
    nodes: &[usize],
    kind: SegmentKind,
    species: Species,
) -> MaximalSegment {
    let last = *nodes.last().expect("segments are non-empty");
    MaximalSegment {
        segment: Segment {
            positions: nodes.iter().map(|&i| table.nodes[i].0.clone()).collect(),
            kind,
        },
        species,
        degree: judgment_degree(table.judgment(last)),
    }
}

/// Every maximal segment of every species applicable to the system.  No
/// segment is reported under two species; segments of different kinds may
/// share occurrences (a chain and one of its member plain segments are
/// distinct segments).
///
/// Precondition: the deduction checks under `sys`.
pub fn find_maximal(d: &Deduction, sys: &SystemConfig) -> Vec<MaximalSegment> {
    use RuleTag::*;
    let table = Table::build(d);
    let segments = table.plain_segments();
    let mut out = Vec::new();

    for segment in &segments {
        if let Some(species) = plain_species(&table, sys, segment) {
            out.push(make_maximal(&table, segment, SegmentKind::Plain, species));
        }
    }

    for chain in table.eqe_chains(&segments) {
        if eqe_chain_maximal(&table, sys, &segments, &chain) {
            let flat: Vec<usize> = chain
                .iter()
                .flat_map(|&k| segments[k].iter().copied())
                .collect();
            out.push(make_maximal(
                &table,
                &flat,
                SegmentKind::EqElimChain,
                Species::EqElim,
            ));
        }
    }

    // The reductio species belongs to the classical ι system: there
    // `⊥E_C` must conclude atomic formulas with ι terms, and those can
    // feed the ι eliminations and the denotation rule directly.  Each
    // qualifying conclusion is reported once per reductio chain reaching
    // it, or as a one-formula plain segment when no chain does.
    if sys.classical && sys.iota && sys.primed {
        let chains = table.reductio_chains();
        for b in 0..table.len() {
            if !matches!(table.rule(b), Some(BotEC | BotE)) {
                continue;
            }
            let Some((p, 0)) = table.parent[b] else {
                continue;
            };
            if !matches!(table.rule(p), Some(IotaE1 | IotaE2 | IotaE3 | Ad)) {
                continue;
            }
            let ending: Vec<&Vec<usize>> =
                chains.iter().filter(|chain| *chain.last().expect("chains are non-empty") == b).collect();
            if ending.is_empty() {
                out.push(make_maximal(
                    &table,
                    &[b],
                    SegmentKind::Plain,
                    Species::Reductio,
                ));
            } else {
                for chain in ending {
                    out.push(make_maximal(
                        &table,
                        chain,
                        SegmentKind::ReductioChain,
                        Species::Reductio,
                    ));
                }
            }
        }
    }

    out
}

/// The rank ⟨d, l⟩ of a deduction: d is the highest degree among maximal
/// segments of the detour and reductio species (0 when there are none),
/// and l the total length of those segments at degree d.  In
/// `CNFi-prime` a non-normal deduction can have rank ⟨0, l⟩: a reductio
/// conclusion consumed by the denotation rule may be a degree-0 formula.
///
/// Precondition: the deduction checks under `sys`.
pub fn rank(d: &Deduction, sys: &SystemConfig) -> Rank {
    let counted: Vec<MaximalSegment> = find_maximal(d, sys)
        .into_iter()
        .filter(|m| matches!(m.species, Species::IntroElim | Species::Reductio))
        .collect();
    let degree = counted.iter().map(|m| m.degree).max().unwrap_or(0);
    let length = counted
        .iter()
        .filter(|m| m.degree == degree)
        .map(|m| m.segment.len())
        .sum();
    Rank { degree, length }
}

/// Normal form: no maximal segments of any species.  This is *not* the
/// same as rank ⟨0, 0⟩ — the identity family is never counted by the
/// rank, and in `CNFi-prime` maximal reductio segments can have degree 0.
///
/// Precondition: the deduction checks under `sys`.
pub fn is_normal(d: &Deduction, sys: &SystemConfig) -> bool {
    find_maximal(d, sys).is_empty()
}

// ---------------------------------------------------------------------------
// Paths
// ---------------------------------------------------------------------------

/// A path through a deduction: a maximal thread of judgment occurrences
/// that starts at an assumption not discharged by a case analysis,
/// descends through the premises that determine their conclusions, jumps
/// from the major premise of `∨E`/`∃E` to the assumptions they discharge,
/// and ends at a minor premise of `→E`/`∀E`, a right premise of `∃I`, an
/// `=E` major premise, or the conclusion of the deduction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    /// The positions of the occurrences on the path, in order.
    pub nodes: Vec<Position>,
    /// 0 for a path ending in the conclusion of the deduction; otherwise
    /// one more than the least order of a path through a premise standing
    /// beside the path's last formula.
    pub order: u32,
    /// `nodes` divided into its segments, as index ranges.
    pub segments: Vec<Range<usize>>,
    /// How many leading segments form the E-part: the maximal prefix of
    /// segments consumed as elimination-rule major premises, never
    /// including the final segment.
    pub e_segments: usize,
    /// How many trailing segments form the I-part: the maximal suffix of
    /// segments concluded by introduction rules, capped so that the
    /// M-part in between is never empty.
    pub i_segments: usize,
}

impl Path {
    pub fn e_part(&self) -> &[Range<usize>] {
        &self.segments[..self.e_segments]
    }

    pub fn m_part(&self) -> &[Range<usize>] {
        &self.segments[self.e_segments..self.segments.len() - self.i_segments]
    }

    pub fn i_part(&self) -> &[Range<usize>] {
        &self.segments[self.segments.len() - self.i_segments..]
    }
}

enum PathStep {
    Continue(usize),
    Branch(Vec<usize>),
    End,
}

fn path_step(table: &Table, i: usize) -> PathStep {
    use RuleTag::*;
    let Some((p, slot)) = table.parent[i] else {
        return PathStep::End;
    };
    let Some(tag) = table.rule(p) else {
        return PathStep::End;
    };
    match tag {
        // From the major premise of a case analysis to every assumption
        // it discharges, in both of its classes.
        OrE | ExE | ExEJ if slot == 0 => {
            let mut targets = Vec::new();
            for (_, label) in table.nodes[p].1.discharges() {
                if let Some(leaves) = table.leaves.get(label) {
                    targets.extend(leaves.iter().copied());
                }
            }
            PathStep::Branch(targets)
        }
        // Pass-through minors continue inside the same segment.
        OrE if slot == 1 || slot == 2 => PathStep::Continue(p),
        ExE | ExEJ if slot == 1 => PathStep::Continue(p),
        // The left premise of `∃I` continues; the right premise ends.
        ExI | ExIJ => {
            if slot == 0 {
                PathStep::Continue(p)
            } else {
                PathStep::End
            }
        }
        // The premises of the denotation and identity-introduction rules
        // continue to their conclusions.
        Ad | AdJ | EqIn | EqInJ => PathStep::Continue(p),
        // The minor premise of `=E` continues; its major premise ends.
        EqE => {
            if slot == 1 {
                PathStep::Continue(p)
            } else {
                PathStep::End
            }
        }
        _ if is_intro(tag) => PathStep::Continue(p),
        _ => match elim_major(tag) {
            Some(major) if major == slot => PathStep::Continue(p),
            _ => PathStep::End,
        },
    }
}

fn extend_path(table: &Table, prefix: Vec<usize>, out: &mut Vec<Vec<usize>>) {
    let last = *prefix.last().expect("paths are non-empty");
    match path_step(table, last) {
        PathStep::Continue(next) => {
            let mut path = prefix;
            path.push(next);
            extend_path(table, path, out);
        }
        PathStep::Branch(targets) if !targets.is_empty() => {
            for target in targets {
                let mut path = prefix.clone();
                path.push(target);
                extend_path(table, path, out);
            }
        }
        // A case analysis with no discharged assumptions gives the path
        // nowhere to jump; it ends at the major premise.
        _ => out.push(prefix),
    }
}

/// Divides a path into segments and computes the E/M/I decomposition.
fn decompose(table: &Table, nodes: &[usize]) -> (Vec<Range<usize>>, usize, usize) {
    let mut segments = Vec::new();
    let mut start = 0;
    for j in 0..nodes.len() {
        let continues = j + 1 < nodes.len() && table.plain_next(nodes[j]) == Some(nodes[j + 1]);
        if !continues {
            segments.push(start..j + 1);
            start = j + 1;
        }
    }
    let total = segments.len();
    let mut e = 0;
    while e + 1 < total {
        let last = nodes[segments[e].end - 1];
        let qualifies = match table.parent[last] {
            Some((p, slot)) => table
                .rule(p)
                .is_some_and(|tag| tag != RuleTag::EqE && elim_major(tag) == Some(slot)),
            None => false,
        };
        if !qualifies {
            break;
        }
        e += 1;
    }
    let mut i = 0;
    while i < total - e - 1 {
        let first = nodes[segments[total - 1 - i].start];
        if !table.rule(first).is_some_and(is_intro) {
            break;
        }
        i += 1;
    }
    (segments, e, i)
}

/// All paths of the deduction, with orders and decompositions.  Defined
/// for the ι-free systems only; the ι systems have no path theory.
///
/// Precondition: the deduction checks under `sys`.
pub fn paths(d: &Deduction, sys: &SystemConfig) -> Result<Vec<Path>, AnalysisError> {
    use RuleTag::*;
    if sys.iota {
        return Err(AnalysisError::UnsupportedSystem {
            system: sys.name(),
            operation: "path analysis",
        });
    }
    let table = Table::build(d);
    let mut raw: Vec<Vec<usize>> = Vec::new();
    for i in 0..table.len() {
        if table.leaf_label(i).is_none() {
            continue;
        }
        if table
            .discharging_rule(i)
            .is_some_and(|tag| matches!(tag, OrE | ExE | ExEJ))
        {
            continue;
        }
        extend_path(&table, vec![i], &mut raw);
    }

    let mut containing: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (k, path) in raw.iter().enumerate() {
        for &node in path {
            containing.entry(node).or_default().push(k);
        }
    }
    let mut order: Vec<Option<u32>> = raw
        .iter()
        .map(|path| (*path.last().expect("paths are non-empty") == 0).then_some(0))
        .collect();
    // Assign the least consistent orders: repeatedly give the globally
    // smallest candidate (one more than the least order of a path through
    // a sibling premise of the terminal) to a still-unordered path.
    loop {
        let mut best: Option<(u32, usize)> = None;
        for (k, path) in raw.iter().enumerate() {
            if order[k].is_some() {
                continue;
            }
            let terminal = *path.last().expect("paths are non-empty");
            let Some((p, slot)) = table.parent[terminal] else {
                continue;
            };
            let mut candidate: Option<u32> = None;
            for (s, &sibling) in table.children[p].iter().enumerate() {
                if s == slot {
                    continue;
                }
                for &other in containing.get(&sibling).map(Vec::as_slice).unwrap_or(&[]) {
                    if let Some(o) = order[other] {
                        candidate = Some(candidate.map_or(o + 1, |c: u32| c.min(o + 1)));
                    }
                }
            }
            if let Some(c) = candidate {
                if best.is_none_or(|(b, _)| c < b) {
                    best = Some((c, k));
                }
            }
        }
        match best {
            Some((c, k)) => order[k] = Some(c),
            None => break,
        }
    }

    Ok(raw
        .into_iter()
        .zip(order)
        .map(|(path, order)| {
            let (segments, e, i) = decompose(&table, &path);
            Path {
                nodes: path
                    .iter()
                    .map(|&n| table.nodes[n].0.clone())
                    .collect(),
                order: order.expect("every path of a checked deduction is orderable"),
                segments,
                e_segments: e,
                i_segments: i,
            }
        })
        .collect())
}

// ---------------------------------------------------------------------------
// M-part audit
// ---------------------------------------------------------------------------

/// The shape the first segment of an M-part instantiates in a normal
/// deduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MPartShape {
    /// Opens an `=E` chain that spans the rest of the M-part.
    EqElimChain,
    /// Enters the denotation rule.
    DenotationFirst,
    /// Enters the identity introduction.
    IdentityIntroFirst,
    /// Is itself the last segment of the M-part.
    SingleSegment,
    /// None of the legal shapes — reported together with a violation.
    Other,
}

/// The result of auditing one path's M-part: which shape it takes, how
/// often the denotation rule and the identity introduction are applied on
/// it, and any violations of the expected discipline (at most one of
/// each, denotation before identity introduction with no `=E` in between,
/// and the shape-specific closure conditions).  On a normal deduction the
/// violation list is empty; a non-empty list signals an engine bug.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MPartAudit {
    pub shape: MPartShape,
    pub denotation_count: usize,
    pub identity_intro_count: usize,
    pub violations: Vec<String>,
    /// Set when the M-part closes with an `=E` chain after an identity
    /// introduction that follows the denotation rule.  The audit accepts
    /// the chain when it runs to the *last* segment of the M-part; the
    /// check as literally stated would close the chain at the first
    /// segment, which no deduction can instantiate.
    pub literal_divergence: bool,
}

/// Audits one path of a normal, ι-free deduction against the M-part
/// discipline.  Errors with `NotNormal` when the deduction still has
/// maximal segments.
pub fn mpart_audit(
    path: &Path,
    d: &Deduction,
    sys: &SystemConfig,
) -> Result<MPartAudit, AnalysisError> {
    use RuleTag::*;
    if sys.iota {
        return Err(AnalysisError::UnsupportedSystem {
            system: sys.name(),
            operation: "M-part audit",
        });
    }
    if let Some(m) = find_maximal(d, sys).first() {
        return Err(AnalysisError::NotNormal {
            position: m.segment.positions[0].clone(),
        });
    }
    let table = Table::build(d);
    let index: BTreeMap<&Position, usize> = table
        .nodes
        .iter()
        .enumerate()
        .map(|(i, (position, _))| (position, i))
        .collect();
    let nodes: Vec<usize> = path
        .nodes
        .iter()
        .map(|position| *index.get(position).expect("path belongs to this deduction"))
        .collect();

    let (ad_tag, id_tag) = if sys.jaskowski { (AdJ, EqInJ) } else { (Ad, EqIn) };
    let m_first = path.e_segments;
    let m_end = path.segments.len() - path.i_segments;
    // The node consuming each M-part segment's last occurrence.
    let consumer = |s: usize| -> Option<(usize, usize, RuleTag)> {
        let last = nodes[path.segments[s].end - 1];
        let (p, slot) = table.parent[last]?;
        Some((p, slot, table.rule(p)?))
    };
    let consumed_by = |s: usize, tag: RuleTag| -> bool {
        consumer(s).is_some_and(|(_, slot, t)| t == tag && slot == 0)
    };
    let eqe_minor = |s: usize| -> bool {
        consumer(s).is_some_and(|(_, slot, t)| t == RuleTag::EqE && slot == 1)
    };

    let mut violations = Vec::new();
    let denotation: Vec<usize> = (m_first..m_end).filter(|&s| consumed_by(s, ad_tag)).collect();
    let identity: Vec<usize> = (m_first..m_end).filter(|&s| consumed_by(s, id_tag)).collect();
    if denotation.len() > 1 {
        violations.push("more than one application of the denotation rule".to_string());
    }
    if identity.len() > 1 {
        violations.push("more than one application of the identity introduction".to_string());
    }
    if let (Some(&ad), Some(&id)) = (denotation.first(), identity.first()) {
        if ad > id {
            violations
                .push("identity introduction before the denotation rule".to_string());
        } else if ((ad + 1)..id).any(eqe_minor) {
            violations.push(
                "identity elimination between the denotation rule and the identity introduction"
                    .to_string(),
            );
        }
    }

    // Walks an `=E` chain from segment `s` and checks it closes the
    // M-part.
    let chain_closes = |mut s: usize, violations: &mut Vec<String>| {
        while eqe_minor(s) {
            s += 1;
        }
        if s != m_end - 1 {
            violations.push("identity-elimination chain does not close the M-part".to_string());
        }
    };

    let mut literal_divergence = false;
    let shape = if eqe_minor(m_first) {
        chain_closes(m_first, &mut violations);
        MPartShape::EqElimChain
    } else if consumed_by(m_first, ad_tag) {
        let conclusion = m_first + 1;
        if conclusion == m_end - 1 && !consumed_by(conclusion, id_tag) {
            // The denotation conclusion is the last segment of the M-part.
        } else if consumed_by(conclusion, id_tag) {
            let ad_premise = consumer(m_first)
                .and_then(|(p, _, _)| table.child(p, 0))
                .and_then(|premise| table.formula(premise).cloned());
            let id_conclusion = consumer(conclusion)
                .and_then(|(p, _, _)| table.formula(p).cloned());
            if let (Some(a), Some(c)) = (ad_premise, id_conclusion) {
                if alpha_eq(&a, &c) {
                    violations.push(
                        "denotation premise equals the identity-introduction conclusion"
                            .to_string(),
                    );
                }
            }
            let closing = conclusion + 1;
            if closing != m_end - 1 || eqe_minor(closing) {
                literal_divergence = true;
                chain_closes(closing, &mut violations);
            }
        } else {
            violations.push("denotation conclusion neither closes the M-part nor enters the identity introduction".to_string());
        }
        MPartShape::DenotationFirst
    } else if consumed_by(m_first, id_tag) {
        let conclusion = m_first + 1;
        if conclusion != m_end - 1 || eqe_minor(conclusion) {
            chain_closes(conclusion, &mut violations);
        }
        MPartShape::IdentityIntroFirst
    } else if m_first == m_end - 1 {
        MPartShape::SingleSegment
    } else {
        violations.push("M-part opens with an unexpected consumer".to_string());
        MPartShape::Other
    };

    Ok(MPartAudit {
        shape,
        denotation_count: denotation.len(),
        identity_intro_count: identity.len(),
        violations,
        literal_divergence,
    })
}

// ---------------------------------------------------------------------------
// Subformula reports
// ---------------------------------------------------------------------------

/// The verdict of a subformula-property report: every occurrence is a
/// subformula of the conclusion or an open assumption, exempt under the
/// property's stated exceptions, or a violation.  Occurrences that are
/// covered are never listed as exempt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubformulaReport {
    pub holds: bool,
    pub exempt: Vec<Position>,
    pub violations: Vec<Position>,
}

/// The free subformula property for `INF` and `CNF` deductions: all
/// formulas are subformulas of the conclusion or an open assumption,
/// except identities and predications on `=E` chains, existence premises
/// of `∀E`/`∃I`, existence assumptions discharged by `∀I`/`∃E`, and — in
/// `CNF` — negated assumptions discharged by `⊥E_C` together with the `⊥`
/// occurrences concluded from them.
///
/// On a normal `INF` deduction the report always holds.  Normal `CNF`
/// deductions can honestly violate it: the classical guarantee confines
/// exceptions to M-part interiors, which is weaker than this exemption
/// set (a vacuous `⊥E_C` conclusion consumed as an `=E` major is the
/// witness).
///
/// Precondition: the deduction checks and is normal.
pub fn free_subformula_report(
    d: &Deduction,
    sys: &SystemConfig,
) -> Result<SubformulaReport, AnalysisError> {
    use RuleTag::*;
    if sys.iota || sys.jaskowski {
        return Err(AnalysisError::UnsupportedSystem {
            system: sys.name(),
            operation: "free subformula report",
        });
    }
    let table = Table::build(d);
    let segments = table.plain_segments();
    let mut on_chain: BTreeSet<usize> = BTreeSet::new();
    for chain in table.eqe_chains(&segments) {
        for &k in &chain {
            for &n in &segments[k] {
                if matches!(
                    table.formula(n),
                    Some(Formula::Eq(..) | Formula::Pred(..))
                ) {
                    on_chain.insert(n);
                }
            }
        }
    }

    let conclusion = d.conclusion().formula().cloned();
    let opens: Vec<Formula> = d
        .open_classes()
        .values()
        .filter_map(|j| j.formula().cloned())
        .collect();
    let covered = |f: &Formula| {
        conclusion.as_ref().is_some_and(|c| is_subformula(f, c))
            || opens.iter().any(|g| is_subformula(f, g))
    };

    let mut exempt = Vec::new();
    let mut violations = Vec::new();
    for i in 0..table.len() {
        let Some(f) = table.formula(i) else {
            continue;
        };
        if covered(f) {
            continue;
        }
        let existence_minor = matches!(f, Formula::ExistsBang(_))
            && table
                .parent[i]
                .is_some_and(|(p, slot)| slot == 1 && matches!(table.rule(p), Some(AllE | ExI)));
        let existence_discharged = matches!(f, Formula::ExistsBang(_))
            && table
                .discharging_rule(i)
                .is_some_and(|tag| matches!(tag, AllI | ExE));
        let reductio_assumption =
            sys.classical && table.discharging_rule(i) == Some(BotEC);
        let reductio_falsum = sys.classical
            && *f == Formula::Bot
            && table.rule(i) == Some(ImpE)
            && table
                .child(i, 0)
                .is_some_and(|major| table.discharging_rule(major) == Some(BotEC));
        if on_chain.contains(&i)
            || existence_minor
            || existence_discharged
            || reductio_assumption
            || reductio_falsum
        {
            exempt.push(table.nodes[i].0.clone());
        } else {
            violations.push(table.nodes[i].0.clone());
        }
    }
    Ok(SubformulaReport {
        holds: violations.is_empty(),
        exempt,
        violations,
    })
}

/// The free term subformula property for `INF-J` deductions: all formulas
/// and term judgments are, or occur in, subformulas of the conclusion or
/// an open assumption, except identities and predications on `=E` chains.
/// A term judgment is covered when its term occurs in the conclusion, in
/// an open assumption formula, or in an open term-judgment assumption.
///
/// Precondition: the deduction checks under `INF-J` and is normal.
pub fn free_term_subformula_report(
    d: &Deduction,
    sys: &SystemConfig,
) -> Result<SubformulaReport, AnalysisError> {
    if !sys.jaskowski || sys.classical {
        return Err(AnalysisError::UnsupportedSystem {
            system: sys.name(),
            operation: "free term subformula report",
        });
    }
    let table = Table::build(d);
    let segments = table.plain_segments();
    let mut on_chain: BTreeSet<usize> = BTreeSet::new();
    for chain in table.eqe_chains(&segments) {
        for &k in &chain {
            for &n in &segments[k] {
                if matches!(
                    table.formula(n),
                    Some(Formula::Eq(..) | Formula::Pred(..))
                ) {
                    on_chain.insert(n);
                }
            }
        }
    }

    let mut formulas: Vec<Formula> = Vec::new();
    let mut terms: Vec<Term> = Vec::new();
    match d.conclusion() {
        Judgment::Formula(f) => formulas.push(f.clone()),
        Judgment::Term(t) => terms.push(t.clone()),
    }
    for j in d.open_classes().values() {
        match j {
            Judgment::Formula(f) => formulas.push(f.clone()),
            Judgment::Term(t) => terms.push(t.clone()),
        }
    }
    let covered_formula = |f: &Formula| formulas.iter().any(|g| is_subformula(f, g));
    let covered_term = |t: &Term| {
        formulas
            .iter()
            .any(|g| g.atomic_terms().iter().any(|u| alpha_eq_term(u, t)))
            || terms.iter().any(|u| alpha_eq_term(u, t))
    };

    let mut exempt = Vec::new();
    let mut violations = Vec::new();
    for i in 0..table.len() {
        match table.judgment(i) {
            Judgment::Formula(f) => {
                if covered_formula(f) {
                    continue;
                }
                if on_chain.contains(&i) {
                    exempt.push(table.nodes[i].0.clone());
                } else {
                    violations.push(table.nodes[i].0.clone());
                }
            }
            Judgment::Term(t) => {
                if !covered_term(t) {
                    violations.push(table.nodes[i].0.clone());
                }
            }
        }
    }
    Ok(SubformulaReport {
        holds: violations.is_empty(),
        exempt,
        violations,
    })
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
