//! Terms and formulas of negative free logic.
//!
//! The object language has individual constants, parameters (free
//! variables), bound variables, and definite descriptions `ιx.F` as its
//! terms; formulas are built from predicate applications, identity `t1 =
//! t2`, the existence predicate `∃!t`, falsum, the binary connectives, and
//! the quantifiers.  Negation is not a constructor: `¬A` abbreviates `A →
//! ⊥` throughout.
//!
//! Identifiers fall into disjoint lexical classes (see [`NameClass`]), so a
//! parameter can never be captured by a binder and replacement of terms in
//! formulas is always possible without renaming.  Substitution for bound
//! variables is nevertheless implemented capture-avoidingly, so the module
//! is safe on arbitrary input.

use std::collections::BTreeSet;
use std::fmt;

/// Lexical class of an identifier, determined by its spelling.
///
/// * `x, y, …, z`, optionally followed by digits, are bound variables;
/// * `a, b, …, e`, optionally followed by digits, are parameters;
/// * every other identifier starting with a lowercase letter is a constant;
/// * identifiers starting with an uppercase letter are predicate names.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NameClass {
    Var,
    Param,
    Const,
    Predicate,
}

/// Classifies an identifier by spelling alone.
pub fn name_class(name: &str) -> NameClass {
    let mut chars = name.chars();
    let first = match chars.next() {
        Some(c) => c,
        None => return NameClass::Const,
    };
    if first.is_ascii_uppercase() {
        return NameClass::Predicate;
    }
    let rest_digits = chars.all(|c| c.is_ascii_digit());
    match first {
        'u'..='z' if rest_digits => NameClass::Var,
        'a'..='e' if rest_digits => NameClass::Param,
        _ => NameClass::Const,
    }
}

/// A term of the object language.
///
/// Constants and parameters are the *atomic* terms; ι terms are *complex*.
/// `Var` occurrences only appear inside the body of a quantifier or ι
/// binder that binds them — judgments never expose a free variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    /// An individual constant, e.g. `t`, `s`, `k`.
    Const(String),
    /// A parameter (free variable), e.g. `a`, `b1`.  Parameters are never
    /// bound; they are what eigenvariable conditions range over.
    Param(String),
    /// An occurrence of a bound variable, e.g. the `x` in `∀x P(x)`.
    Var(String),
    /// A definite description `ιx.F`: "the x such that F".
    Iota(String, Box<Formula>),
}

/// A formula of the object language.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    /// A predicate applied to terms; nullary predicates are permitted.
    Pred(String, Vec<Term>),
    /// Identity, `t1 = t2`.
    Eq(Term, Term),
    /// The existence predicate, `∃!t`: "t denotes".
    ExistsBang(Term),
    /// Falsum.
    Bot,
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Imp(Box<Formula>, Box<Formula>),
    Forall(String, Box<Formula>),
    Exists(String, Box<Formula>),
}

/// Shape of a formula: *prime* formulas contain atomic terms only, *atomic*
/// formulas are predicate/identity/existence applications to any terms (or
/// `⊥`), and everything built by a connective or quantifier is *complex*.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormulaClass {
    Prime,
    Atomic,
    Complex,
}

impl Term {
    /// True for constants, parameters and bound-variable occurrences;
    /// false for ι terms.
    pub fn is_atomic(&self) -> bool {
        !matches!(self, Term::Iota(..))
    }

    /// The degree of a term: atomic terms have degree 0, and `ιx.F` has
    /// the degree of `F` plus one.
    pub fn degree(&self) -> u32 {
        match self {
            Term::Const(_) | Term::Param(_) | Term::Var(_) => 0,
            Term::Iota(_, body) => body.degree() + 1,
        }
    }

    /// Number of occurrences of `⊥`, `∧`, `∨`, `→`, `∀`, `∃` and `ι`.
    /// Unlike [`Term::degree`] this counts quantifiers once and ignores
    /// `=` and `∃!`; it is the measure that the falsum-restriction
    /// procedure decreases.
    pub fn connective_count(&self) -> u32 {
        match self {
            Term::Const(_) | Term::Param(_) | Term::Var(_) => 0,
            Term::Iota(_, body) => body.connective_count() + 1,
        }
    }

    /// Replaces free occurrences of the bound variable `x` by `t`,
    /// renaming ι binders where necessary to avoid capturing free
    /// variables of `t`.
    pub fn subst_var(&self, x: &str, t: &Term) -> Term {
        match self {
            Term::Var(v) if v == x => t.clone(),
            Term::Const(_) | Term::Param(_) | Term::Var(_) => self.clone(),
            Term::Iota(v, body) => {
                if v == x {
                    self.clone()
                } else if t.free_vars().contains(v.as_str()) {
                    let fresh = fresh_var_avoiding(v, body, t);
                    let renamed = body.subst_var(v, &Term::Var(fresh.clone()));
                    Term::Iota(fresh, Box::new(renamed.subst_var(x, t)))
                } else {
                    Term::Iota(v.clone(), Box::new(body.subst_var(x, t)))
                }
            }
        }
    }

    /// Replaces every occurrence of the parameter `a` by `t`.  Parameters
    /// are never bound, so this is a plain structural replacement.
    pub fn subst_param(&self, a: &str, t: &Term) -> Term {
        match self {
            Term::Param(p) if p == a => t.clone(),
            Term::Const(_) | Term::Param(_) | Term::Var(_) => self.clone(),
            Term::Iota(v, body) => Term::Iota(v.clone(), Box::new(body.subst_param(a, t))),
        }
    }

    /// Bound-variable names with a free occurrence in this term.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free_vars(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free_vars(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                if !bound.iter().any(|b| b == v) {
                    out.insert(v.clone());
                }
            }
            Term::Const(_) | Term::Param(_) => {}
            Term::Iota(v, body) => {
                bound.push(v.clone());
                body.collect_free_vars(bound, out);
                bound.pop();
            }
        }
    }

    /// Parameter names occurring in this term, including inside ι bodies.
    pub fn params(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_params(&mut out);
        out
    }

    pub(crate) fn collect_params(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Param(p) => {
                out.insert(p.clone());
            }
            Term::Const(_) | Term::Var(_) => {}
            Term::Iota(_, body) => body.collect_params(out),
        }
    }

    /// Atomic terms (constants and parameters) occurring in this term,
    /// including inside ι bodies.
    pub(crate) fn collect_atomic_terms(&self, out: &mut BTreeSet<Term>) {
        match self {
            Term::Const(_) | Term::Param(_) => {
                out.insert(self.clone());
            }
            Term::Var(_) => {}
            Term::Iota(_, body) => body.collect_atomic_terms(out),
        }
    }

    /// Every identifier occurring in this term: constant, parameter and
    /// variable names, binder names, and predicate names.
    pub(crate) fn collect_names(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Const(n) | Term::Param(n) | Term::Var(n) => {
                out.insert(n.clone());
            }
            Term::Iota(v, body) => {
                out.insert(v.clone());
                body.collect_names(out);
            }
        }
    }

    /// True if a ι term occurs anywhere in this term.
    pub fn contains_iota(&self) -> bool {
        match self {
            Term::Const(_) | Term::Param(_) | Term::Var(_) => false,
            Term::Iota(..) => true,
        }
    }
}

impl Formula {
    /// `¬self`, i.e. `self → ⊥`.
    pub fn negated(self) -> Formula {
        Formula::Imp(Box::new(self), Box::new(Formula::Bot))
    }

    /// Classifies the formula as prime, atomic or complex.
    pub fn classify(&self) -> FormulaClass {
        match self {
            Formula::Bot => FormulaClass::Prime,
            Formula::Pred(_, args) => {
                if args.iter().all(Term::is_atomic) {
                    FormulaClass::Prime
                } else {
                    FormulaClass::Atomic
                }
            }
            Formula::Eq(l, r) => {
                if l.is_atomic() && r.is_atomic() {
                    FormulaClass::Prime
                } else {
                    FormulaClass::Atomic
                }
            }
            Formula::ExistsBang(t) => {
                if t.is_atomic() {
                    FormulaClass::Prime
                } else {
                    FormulaClass::Atomic
                }
            }
            _ => FormulaClass::Complex,
        }
    }

    /// True for prime *and* atomic formulas: predicate, identity and
    /// existence applications, and `⊥`.
    pub fn is_atomic(&self) -> bool {
        self.classify() != FormulaClass::Complex
    }

    /// True iff the formula is atomic and all its terms are atomic.
    pub fn is_prime(&self) -> bool {
        self.classify() == FormulaClass::Prime
    }

    /// The degree of a formula.  Quantifiers count for two (their rules
    /// carry existence premises whose degree must stay below the
    /// quantified formula's); `ι`, `=` and `∃!` count one each; `⊥`
    /// counts one; predicate letters count nothing.
    ///
    /// A negation `¬B` — written `B → ⊥` here, since `¬` is an
    /// abbreviation — has degree `d(B) + 1`: the negation clause takes
    /// precedence over the general implication clause, which would
    /// otherwise also charge for the `⊥`.
    pub fn degree(&self) -> u32 {
        match self {
            Formula::Pred(_, args) => args.iter().map(Term::degree).sum(),
            Formula::Eq(l, r) => l.degree() + r.degree() + 1,
            Formula::ExistsBang(t) => t.degree() + 1,
            Formula::Bot => 1,
            Formula::Imp(l, r) if matches!(**r, Formula::Bot) => l.degree() + 1,
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Imp(l, r) => {
                l.degree() + r.degree() + 1
            }
            Formula::Forall(_, body) | Formula::Exists(_, body) => body.degree() + 2,
        }
    }

    /// Number of occurrences of `⊥`, `∧`, `∨`, `→`, `∀`, `∃` and `ι`,
    /// ignoring `=` and `∃!`.  See [`Term::connective_count`].
    pub fn connective_count(&self) -> u32 {
        match self {
            Formula::Pred(_, args) => args.iter().map(Term::connective_count).sum(),
            Formula::Eq(l, r) => l.connective_count() + r.connective_count(),
            Formula::ExistsBang(t) => t.connective_count(),
            Formula::Bot => 1,
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Imp(l, r) => {
                l.connective_count() + r.connective_count() + 1
            }
            Formula::Forall(_, body) | Formula::Exists(_, body) => body.connective_count() + 1,
        }
    }

    /// Replaces free occurrences of the bound variable `x` by `t`,
    /// renaming binders where necessary to avoid capturing free variables
    /// of `t`.  Total: binders for `x` simply shadow.
    pub fn subst_var(&self, x: &str, t: &Term) -> Formula {
        match self {
            Formula::Pred(p, args) => Formula::Pred(
                p.clone(),
                args.iter().map(|arg| arg.subst_var(x, t)).collect(),
            ),
            Formula::Eq(l, r) => Formula::Eq(l.subst_var(x, t), r.subst_var(x, t)),
            Formula::ExistsBang(arg) => Formula::ExistsBang(arg.subst_var(x, t)),
            Formula::Bot => Formula::Bot,
            Formula::And(l, r) => {
                Formula::And(Box::new(l.subst_var(x, t)), Box::new(r.subst_var(x, t)))
            }
            Formula::Or(l, r) => {
                Formula::Or(Box::new(l.subst_var(x, t)), Box::new(r.subst_var(x, t)))
            }
            Formula::Imp(l, r) => {
                Formula::Imp(Box::new(l.subst_var(x, t)), Box::new(r.subst_var(x, t)))
            }
            Formula::Forall(v, body) => {
                let (v, body) = subst_under_binder(v, body, x, t);
                Formula::Forall(v, Box::new(body))
            }
            Formula::Exists(v, body) => {
                let (v, body) = subst_under_binder(v, body, x, t);
                Formula::Exists(v, Box::new(body))
            }
        }
    }

    /// Replaces every occurrence of the parameter `a` by `t`, including
    /// inside ι bodies.
    pub fn subst_param(&self, a: &str, t: &Term) -> Formula {
        match self {
            Formula::Pred(p, args) => Formula::Pred(
                p.clone(),
                args.iter().map(|arg| arg.subst_param(a, t)).collect(),
            ),
            Formula::Eq(l, r) => Formula::Eq(l.subst_param(a, t), r.subst_param(a, t)),
            Formula::ExistsBang(arg) => Formula::ExistsBang(arg.subst_param(a, t)),
            Formula::Bot => Formula::Bot,
            Formula::And(l, r) => {
                Formula::And(Box::new(l.subst_param(a, t)), Box::new(r.subst_param(a, t)))
            }
            Formula::Or(l, r) => {
                Formula::Or(Box::new(l.subst_param(a, t)), Box::new(r.subst_param(a, t)))
            }
            Formula::Imp(l, r) => {
                Formula::Imp(Box::new(l.subst_param(a, t)), Box::new(r.subst_param(a, t)))
            }
            Formula::Forall(v, body) => {
                Formula::Forall(v.clone(), Box::new(body.subst_param(a, t)))
            }
            Formula::Exists(v, body) => {
                Formula::Exists(v.clone(), Box::new(body.subst_param(a, t)))
            }
        }
    }

    /// Bound-variable names with a free occurrence in this formula.  A
    /// well-formed judgment formula has none.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free_vars(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free_vars(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Formula::Pred(_, args) => {
                for arg in args {
                    arg.collect_free_vars(bound, out);
                }
            }
            Formula::Eq(l, r) => {
                l.collect_free_vars(bound, out);
                r.collect_free_vars(bound, out);
            }
            Formula::ExistsBang(t) => t.collect_free_vars(bound, out),
            Formula::Bot => {}
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Imp(l, r) => {
                l.collect_free_vars(bound, out);
                r.collect_free_vars(bound, out);
            }
            Formula::Forall(v, body) | Formula::Exists(v, body) => {
                bound.push(v.clone());
                body.collect_free_vars(bound, out);
                bound.pop();
            }
        }
    }

    /// Parameter names occurring in this formula.
    pub fn params(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_params(&mut out);
        out
    }

    pub(crate) fn collect_params(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Pred(_, args) => {
                for arg in args {
                    arg.collect_params(out);
                }
            }
            Formula::Eq(l, r) => {
                l.collect_params(out);
                r.collect_params(out);
            }
            Formula::ExistsBang(t) => t.collect_params(out),
            Formula::Bot => {}
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Imp(l, r) => {
                l.collect_params(out);
                r.collect_params(out);
            }
            Formula::Forall(_, body) | Formula::Exists(_, body) => body.collect_params(out),
        }
    }

    /// Atomic terms (constants and parameters) occurring in this formula.
    pub fn atomic_terms(&self) -> BTreeSet<Term> {
        let mut out = BTreeSet::new();
        self.collect_atomic_terms(&mut out);
        out
    }

    pub(crate) fn collect_atomic_terms(&self, out: &mut BTreeSet<Term>) {
        match self {
            Formula::Pred(_, args) => {
                for arg in args {
                    arg.collect_atomic_terms(out);
                }
            }
            Formula::Eq(l, r) => {
                l.collect_atomic_terms(out);
                r.collect_atomic_terms(out);
            }
            Formula::ExistsBang(t) => t.collect_atomic_terms(out),
            Formula::Bot => {}
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Imp(l, r) => {
                l.collect_atomic_terms(out);
                r.collect_atomic_terms(out);
            }
            Formula::Forall(_, body) | Formula::Exists(_, body) => body.collect_atomic_terms(out),
        }
    }

    /// Every identifier occurring in this formula.
    pub fn names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_names(&mut out);
        out
    }

    pub(crate) fn collect_names(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Pred(p, args) => {
                out.insert(p.clone());
                for arg in args {
                    arg.collect_names(out);
                }
            }
            Formula::Eq(l, r) => {
                l.collect_names(out);
                r.collect_names(out);
            }
            Formula::ExistsBang(t) => t.collect_names(out),
            Formula::Bot => {}
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Imp(l, r) => {
                l.collect_names(out);
                r.collect_names(out);
            }
            Formula::Forall(v, body) | Formula::Exists(v, body) => {
                out.insert(v.clone());
                body.collect_names(out);
            }
        }
    }

    /// True if a ι term occurs anywhere in this formula.
    pub fn contains_iota(&self) -> bool {
        match self {
            Formula::Pred(_, args) => args.iter().any(Term::contains_iota),
            Formula::Eq(l, r) => l.contains_iota() || r.contains_iota(),
            Formula::ExistsBang(t) => t.contains_iota(),
            Formula::Bot => false,
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Imp(l, r) => {
                l.contains_iota() || r.contains_iota()
            }
            Formula::Forall(_, body) | Formula::Exists(_, body) => body.contains_iota(),
        }
    }

    /// True if the existence predicate occurs anywhere in this formula.
    pub fn contains_exists_bang(&self) -> bool {
        match self {
            Formula::Pred(_, args) => args.iter().any(term_contains_exists_bang),
            Formula::Eq(l, r) => term_contains_exists_bang(l) || term_contains_exists_bang(r),
            Formula::ExistsBang(_) => true,
            Formula::Bot => false,
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Imp(l, r) => {
                l.contains_exists_bang() || r.contains_exists_bang()
            }
            Formula::Forall(_, body) | Formula::Exists(_, body) => body.contains_exists_bang(),
        }
    }
}

fn term_contains_exists_bang(t: &Term) -> bool {
    match t {
        Term::Const(_) | Term::Param(_) | Term::Var(_) => false,
        Term::Iota(_, body) => body.contains_exists_bang(),
    }
}

/// Shared binder case of [`Formula::subst_var`]: shadowing and
/// capture-avoiding renaming.
fn subst_under_binder(v: &str, body: &Formula, x: &str, t: &Term) -> (String, Formula) {
    if v == x {
        (v.to_string(), body.clone())
    } else if t.free_vars().contains(v) {
        let fresh = fresh_var_avoiding(v, body, t);
        let renamed = body.subst_var(v, &Term::Var(fresh.clone()));
        (fresh, renamed.subst_var(x, t))
    } else {
        (v.to_string(), body.subst_var(x, t))
    }
}

/// Picks a bound-variable name in the lexical class of `base` that clashes
/// neither with a name in `body` nor with a free variable of `t`.
fn fresh_var_avoiding(base: &str, body: &Formula, t: &Term) -> String {
    let mut used = body.names();
    for v in t.free_vars() {
        used.insert(v);
    }
    let letter = base.chars().next().unwrap_or('x');
    let mut i = 1u32;
    loop {
        let candidate = format!("{letter}{i}");
        if !used.contains(&candidate) {
            return candidate;
        }
        i += 1;
    }
}

/// Picks the first parameter name of the sequence `a, a1, a2, …` that does
/// not occur in `used`.
pub fn fresh_param(used: &BTreeSet<String>) -> String {
    if !used.contains("a") {
        return "a".to_string();
    }
    let mut i = 1u32;
    loop {
        let candidate = format!("a{i}");
        if !used.contains(&candidate) {
            return candidate;
        }
        i += 1;
    }
}

/// Picks the first constant name of the sequence `k0, k1, …` that does not
/// occur in `used`.
fn fresh_const(used: &BTreeSet<String>) -> String {
    let mut i = 0u32;
    loop {
        let candidate = format!("k{i}");
        if !used.contains(&candidate) {
            return candidate;
        }
        i += 1;
    }
}

/// α-equivalence of formulas: equality up to consistent renaming of bound
/// variables, including ι binders.  Parameters, constants and free
/// variables must match by name.
pub fn alpha_eq(a: &Formula, b: &Formula) -> bool {
    alpha_eq_formula(a, b, &mut Vec::new())
}

/// α-equivalence of terms.
pub fn alpha_eq_term(a: &Term, b: &Term) -> bool {
    alpha_eq_term_env(a, b, &mut Vec::new())
}

pub(crate) fn alpha_eq_formula(a: &Formula, b: &Formula, env: &mut Vec<(String, String)>) -> bool {
    match (a, b) {
        (Formula::Pred(p, xs), Formula::Pred(q, ys)) => {
            p == q
                && xs.len() == ys.len()
                && xs.iter().zip(ys).all(|(x, y)| alpha_eq_term_env(x, y, env))
        }
        (Formula::Eq(l1, r1), Formula::Eq(l2, r2)) => {
            alpha_eq_term_env(l1, l2, env) && alpha_eq_term_env(r1, r2, env)
        }
        (Formula::ExistsBang(x), Formula::ExistsBang(y)) => alpha_eq_term_env(x, y, env),
        (Formula::Bot, Formula::Bot) => true,
        (Formula::And(l1, r1), Formula::And(l2, r2))
        | (Formula::Or(l1, r1), Formula::Or(l2, r2))
        | (Formula::Imp(l1, r1), Formula::Imp(l2, r2)) => {
            alpha_eq_formula(l1, l2, env) && alpha_eq_formula(r1, r2, env)
        }
        (Formula::Forall(v1, b1), Formula::Forall(v2, b2))
        | (Formula::Exists(v1, b1), Formula::Exists(v2, b2)) => {
            env.push((v1.clone(), v2.clone()));
            let result = alpha_eq_formula(b1, b2, env);
            env.pop();
            result
        }
        _ => false,
    }
}

pub(crate) fn alpha_eq_term_env(a: &Term, b: &Term, env: &mut Vec<(String, String)>) -> bool {
    match (a, b) {
        (Term::Const(x), Term::Const(y)) | (Term::Param(x), Term::Param(y)) => x == y,
        (Term::Var(x), Term::Var(y)) => {
            // The innermost binder mentioning either side decides; if
            // neither side is bound, the variables are free and must agree
            // by name.
            for (l, r) in env.iter().rev() {
                if l == x || r == y {
                    return l == x && r == y;
                }
            }
            x == y
        }
        (Term::Iota(v1, b1), Term::Iota(v2, b2)) => {
            env.push((v1.clone(), v2.clone()));
            let result = alpha_eq_formula(b1, b2, env);
            env.pop();
            result
        }
        _ => false,
    }
}

/// The subformula relation, as the reflexive-transitive closure of:
/// immediate subformulas of a connective, and instances `B_t^x` of a
/// quantified formula `∀xB`/`∃xB` at *atomic* terms `t`.  Instances at ι
/// terms are deliberately not subformulas, and ι bodies contribute
/// nothing — the relation is only used for the ι-free systems.
///
/// Comparison is up to α-equivalence.  Instantiation is decided against
/// the atomic terms occurring in `a` and `b` plus one fresh constant:
/// any witnessing term outside that set can be renamed to the fresh
/// constant without disturbing `a` or `b`, so the search is complete.
pub fn is_subformula(a: &Formula, b: &Formula) -> bool {
    if alpha_eq(a, b) {
        return true;
    }
    match b {
        Formula::And(l, r) | Formula::Or(l, r) | Formula::Imp(l, r) => {
            is_subformula(a, l) || is_subformula(a, r)
        }
        Formula::Forall(x, body) | Formula::Exists(x, body) => {
            let mut candidates = a.atomic_terms();
            body.collect_atomic_terms(&mut candidates);
            let mut used = a.names();
            body.collect_names(&mut used);
            candidates.insert(Term::Const(fresh_const(&used)));
            candidates
                .iter()
                .any(|t| is_subformula(a, &body.subst_var(x, t)))
        }
        _ => false,
    }
}

// ---------------------------------------------------------------------------
// Rendering.  The concrete syntax is ASCII: `bot`, `&`, `|`, `->`, `~`
// (sugar for `-> bot`), `forall x. F`, `exists x. F`, `iota x. F`, `E! t`,
// `t1 = t2`, `P(t1,...,tn)`.  Precedence: `~` binds tightest, then `&`,
// then `|`, then `->`; the binary connectives associate to the right, and
// quantified formulas are parenthesized when they appear as an operand.
// ---------------------------------------------------------------------------

const PREC_TOP: u8 = 0;
const PREC_IMP: u8 = 1;
const PREC_OR: u8 = 2;
const PREC_AND: u8 = 3;
const PREC_ATOM: u8 = 4;

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(n) | Term::Param(n) | Term::Var(n) => f.write_str(n),
            Term::Iota(v, body) => write!(f, "iota {v}. {body}"),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_formula(self, PREC_TOP, f)
    }
}

fn fmt_formula(formula: &Formula, prec: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match formula {
        Formula::Pred(p, args) => {
            f.write_str(p)?;
            if !args.is_empty() {
                f.write_str("(")?;
                for (i, arg) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{arg}")?;
                }
                f.write_str(")")?;
            }
            Ok(())
        }
        Formula::Eq(l, r) => write!(f, "{l} = {r}"),
        Formula::ExistsBang(t) => write!(f, "E! {t}"),
        Formula::Bot => f.write_str("bot"),
        Formula::Imp(l, r) if **r == Formula::Bot => {
            f.write_str("~")?;
            fmt_formula(l, PREC_ATOM, f)
        }
        Formula::Imp(l, r) => {
            let parens = prec > PREC_IMP;
            if parens {
                f.write_str("(")?;
            }
            fmt_formula(l, PREC_OR, f)?;
            f.write_str(" -> ")?;
            fmt_formula(r, PREC_IMP, f)?;
            if parens {
                f.write_str(")")?;
            }
            Ok(())
        }
        Formula::Or(l, r) => {
            let parens = prec > PREC_OR;
            if parens {
                f.write_str("(")?;
            }
            fmt_formula(l, PREC_AND, f)?;
            f.write_str(" | ")?;
            fmt_formula(r, PREC_OR, f)?;
            if parens {
                f.write_str(")")?;
            }
            Ok(())
        }
        Formula::And(l, r) => {
            let parens = prec > PREC_AND;
            if parens {
                f.write_str("(")?;
            }
            fmt_formula(l, PREC_ATOM, f)?;
            f.write_str(" & ")?;
            fmt_formula(r, PREC_AND, f)?;
            if parens {
                f.write_str(")")?;
            }
            Ok(())
        }
        Formula::Forall(v, body) => {
            let parens = prec > PREC_TOP;
            if parens {
                f.write_str("(")?;
            }
            write!(f, "forall {v}. ")?;
            fmt_formula(body, PREC_TOP, f)?;
            if parens {
                f.write_str(")")?;
            }
            Ok(())
        }
        Formula::Exists(v, body) => {
            let parens = prec > PREC_TOP;
            if parens {
                f.write_str("(")?;
            }
            write!(f, "exists {v}. ")?;
            fmt_formula(body, PREC_TOP, f)?;
            if parens {
                f.write_str(")")?;
            }
            Ok(())
        }
    }
}
