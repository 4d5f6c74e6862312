//! Formula and program terms.
//!
//! Terms are hash-consed into a global store: structurally identical terms
//! share one id, so set membership, equality and map keys are cheap integer
//! operations. The module also houses the term-level machinery the solver is
//! built on: sizes, the α/β classification table, eventuality detection, the
//! formula closure, and capability-refutation sets.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::sync::{LazyLock, Mutex};

use thiserror::Error;

/// Interned identifier name (atom, atomic program, or agent).
#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Sym(u32);

/// Interned formula id.
#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct FId(u32);

/// Interned program id.
#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct PId(u32);

/// One-level view of a formula. Children are ids back into the store.
#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug)]
pub enum FView {
    True,
    False,
    Atom(Sym),
    Not(FId),
    Box(PId, FId),
    Cap(Sym, PId),
}

/// One-level view of a program.
#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug)]
pub enum PView {
    Atomic(Sym),
    Test(FId),
    Arrow(FId, FId),
    Seq(PId, PId),
    Choice(PId, PId),
    Star(PId),
}

/// α/β classification of a formula (`NotAlphaBeta` for everything the static
/// rule never touches: literals, constants, boxes/diamonds over atomic
/// programs or Ω, and capability statements over non-composite programs).
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum Classification {
    NotAlphaBeta,
    Alpha(FId, Option<FId>),
    Beta(FId, FId),
}

/// Ordered set of formulas (ordered by interned id, not by structure).
pub type FormulaSet = BTreeSet<FId>;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum SyntaxError {
    #[error("closure exceeded its cardinality budget: {got} formulas > cap {cap}")]
    ClosureBudget { got: usize, cap: usize },
    #[error("malformed capability-refutation arguments: {0}")]
    MalformedCpr(String),
}

#[derive(Default)]
struct Store {
    names: Vec<String>,
    name_ids: HashMap<String, Sym>,
    formulas: Vec<FView>,
    formula_ids: HashMap<FView, FId>,
    programs: Vec<PView>,
    program_ids: HashMap<PView, PId>,
}

static STORE: LazyLock<Mutex<Store>> = LazyLock::new(|| Mutex::new(Store::default()));

fn store() -> std::sync::MutexGuard<'static, Store> {
    STORE.lock().unwrap_or_else(|e| e.into_inner())
}

impl Store {
    fn intern_name(&mut self, name: &str) -> Sym {
        if let Some(&s) = self.name_ids.get(name) {
            return s;
        }
        let s = Sym(self.names.len() as u32);
        self.names.push(name.to_owned());
        self.name_ids.insert(name.to_owned(), s);
        s
    }

    fn intern_f(&mut self, view: FView) -> FId {
        if let Some(&f) = self.formula_ids.get(&view) {
            return f;
        }
        let f = FId(self.formulas.len() as u32);
        self.formulas.push(view);
        self.formula_ids.insert(view, f);
        f
    }

    fn intern_p(&mut self, view: PView) -> PId {
        if let Some(&p) = self.program_ids.get(&view) {
            return p;
        }
        let p = PId(self.programs.len() as u32);
        self.programs.push(view);
        self.program_ids.insert(view, p);
        p
    }

    fn fview(&self, f: FId) -> FView {
        self.formulas[f.0 as usize]
    }

    fn pview(&self, p: PId) -> PView {
        self.programs[p.0 as usize]
    }

    fn tt(&mut self) -> FId {
        self.intern_f(FView::True)
    }

    fn ff(&mut self) -> FId {
        self.intern_f(FView::False)
    }

    fn not(&mut self, f: FId) -> FId {
        self.intern_f(FView::Not(f))
    }

    fn boxf(&mut self, p: PId, f: FId) -> FId {
        self.intern_f(FView::Box(p, f))
    }

    fn cap(&mut self, agent: Sym, p: PId) -> FId {
        self.intern_f(FView::Cap(agent, p))
    }

    fn test(&mut self, f: FId) -> PId {
        self.intern_p(PView::Test(f))
    }

    fn omega(&mut self) -> PId {
        let t = self.tt();
        self.intern_p(PView::Arrow(t, t))
    }

    fn omega_star(&mut self) -> PId {
        let o = self.omega();
        self.intern_p(PView::Star(o))
    }

    fn is_omega(&self, p: PId) -> bool {
        match self.pview(p) {
            PView::Arrow(a, b) => self.fview(a) == FView::True && self.fview(b) == FView::True,
            _ => false,
        }
    }

    fn in_atp_omega(&self, p: PId) -> bool {
        matches!(self.pview(p), PView::Atomic(_)) || self.is_omega(p)
    }

    fn in_sigma(&self, p: PId) -> bool {
        matches!(
            self.pview(p),
            PView::Atomic(_) | PView::Test(_) | PView::Arrow(_, _)
        )
    }

    fn in_sigma_tilde(&self, p: PId) -> bool {
        matches!(self.pview(p), PView::Atomic(_) | PView::Arrow(_, _))
    }

    /// Conjunction, encoded as a diamond over a test: `a & b` = `~[?(a)]~b`.
    fn conj(&mut self, a: FId, b: FId) -> FId {
        let nb = self.not(b);
        let ta = self.test(a);
        let inner = self.boxf(ta, nb);
        self.not(inner)
    }

    /// Top-of-term normalisation of boxes over Ω.
    ///
    /// A positive box `[omega]f` is kept only in the self-reproducing shape
    /// `[omega][omega*]g` that the iteration rule emits; any other `[omega]f`
    /// is rewritten to `[omega*]f`, which is equivalent because the relation
    /// interpreting Ω is already reflexive and transitive. Only the outermost
    /// constructor is inspected: subterms surface later through rule
    /// application and are normalised when they are inserted into a label.
    fn norm_top(&mut self, f: FId) -> FId {
        if let FView::Box(p, body) = self.fview(f) {
            if self.is_omega(p) {
                let already_star_form = match self.fview(body) {
                    FView::Box(q, _) => match self.pview(q) {
                        PView::Star(inner) => self.is_omega(inner),
                        _ => false,
                    },
                    _ => false,
                };
                if !already_star_form {
                    let os = self.omega_star();
                    return self.boxf(os, body);
                }
            }
        }
        f
    }

    fn size_f(&self, f: FId, fmemo: &mut HashMap<FId, u64>, pmemo: &mut HashMap<PId, u64>) -> u64 {
        if let Some(&n) = fmemo.get(&f) {
            return n;
        }
        let n = match self.fview(f) {
            FView::True | FView::False | FView::Atom(_) => 1,
            FView::Not(g) => 1 + self.size_f(g, fmemo, pmemo),
            FView::Box(p, g) => 1 + self.size_p(p, fmemo, pmemo) + self.size_f(g, fmemo, pmemo),
            FView::Cap(_, p) => 1 + self.size_p(p, fmemo, pmemo),
        };
        fmemo.insert(f, n);
        n
    }

    fn size_p(&self, p: PId, fmemo: &mut HashMap<FId, u64>, pmemo: &mut HashMap<PId, u64>) -> u64 {
        if let Some(&n) = pmemo.get(&p) {
            return n;
        }
        let n = match self.pview(p) {
            PView::Atomic(_) => 1,
            PView::Test(f) => 1 + self.size_f(f, fmemo, pmemo),
            PView::Arrow(a, b) => 1 + self.size_f(a, fmemo, pmemo) + self.size_f(b, fmemo, pmemo),
            PView::Seq(a, b) => 1 + 2 * self.size_p(a, fmemo, pmemo) + self.size_p(b, fmemo, pmemo),
            PView::Choice(a, b) => 1 + self.size_p(a, fmemo, pmemo) + self.size_p(b, fmemo, pmemo),
            PView::Star(a) => 1 + 2 * self.size_p(a, fmemo, pmemo),
        };
        pmemo.insert(p, n);
        n
    }

    /// Total structural order on formulas, independent of interning order.
    /// Used for every observable tie-break so runs are reproducible.
    fn cmp_f(&self, a: FId, b: FId) -> Ordering {
        if a == b {
            return Ordering::Equal;
        }
        fn rank(v: &FView) -> u8 {
            match v {
                FView::True => 0,
                FView::False => 1,
                FView::Atom(_) => 2,
                FView::Not(_) => 3,
                FView::Box(_, _) => 4,
                FView::Cap(_, _) => 5,
            }
        }
        let (va, vb) = (self.fview(a), self.fview(b));
        rank(&va).cmp(&rank(&vb)).then_with(|| match (va, vb) {
            (FView::Atom(x), FView::Atom(y)) => self.cmp_sym(x, y),
            (FView::Not(x), FView::Not(y)) => self.cmp_f(x, y),
            (FView::Box(p, x), FView::Box(q, y)) => self.cmp_p(p, q).then_with(|| self.cmp_f(x, y)),
            (FView::Cap(i, p), FView::Cap(j, q)) => {
                self.cmp_sym(i, j).then_with(|| self.cmp_p(p, q))
            }
            _ => Ordering::Equal,
        })
    }

    fn cmp_sym(&self, a: Sym, b: Sym) -> Ordering {
        self.names[a.0 as usize].cmp(&self.names[b.0 as usize])
    }

    fn cmp_p(&self, a: PId, b: PId) -> Ordering {
        if a == b {
            return Ordering::Equal;
        }
        fn rank(v: &PView) -> u8 {
            match v {
                PView::Atomic(_) => 0,
                PView::Test(_) => 1,
                PView::Arrow(_, _) => 2,
                PView::Seq(_, _) => 3,
                PView::Choice(_, _) => 4,
                PView::Star(_) => 5,
            }
        }
        let (va, vb) = (self.pview(a), self.pview(b));
        rank(&va).cmp(&rank(&vb)).then_with(|| match (va, vb) {
            (PView::Atomic(x), PView::Atomic(y)) => self.cmp_sym(x, y),
            (PView::Test(x), PView::Test(y)) => self.cmp_f(x, y),
            (PView::Arrow(x1, y1), PView::Arrow(x2, y2)) => {
                self.cmp_f(x1, x2).then_with(|| self.cmp_f(y1, y2))
            }
            (PView::Seq(x1, y1), PView::Seq(x2, y2))
            | (PView::Choice(x1, y1), PView::Choice(x2, y2)) => {
                self.cmp_p(x1, x2).then_with(|| self.cmp_p(y1, y2))
            }
            (PView::Star(x), PView::Star(y)) => self.cmp_p(x, y),
            _ => Ordering::Equal,
        })
    }

    /// An eventuality is a negated chain of boxes that contains a box over an
    /// iterated program: `~[A1]...[Ak][A*]f` with `k >= 0`.
    fn is_eventuality(&self, f: FId) -> bool {
        let FView::Not(mut g) = self.fview(f) else {
            return false;
        };
        loop {
            match self.fview(g) {
                FView::Box(p, body) => {
                    if matches!(self.pview(p), PView::Star(_)) {
                        return true;
                    }
                    g = body;
                }
                _ => return false,
            }
        }
    }

    /// The formula an eventuality must eventually deliver: for
    /// `~[A1]...[Ak][A*]f` this is `~f'` where `[A'*]f'` is the *last* box
    /// over an iterated program in the chain (so that `~f'` is itself not an
    /// eventuality). `None` when `f` is not an eventuality.
    fn ev_target(&mut self, f: FId) -> Option<FId> {
        let FView::Not(mut g) = self.fview(f) else {
            return None;
        };
        let mut last_star_body = None;
        while let FView::Box(p, body) = self.fview(g) {
            if matches!(self.pview(p), PView::Star(_)) {
                last_star_body = Some(body);
            }
            g = body;
        }
        last_star_body.map(|body| self.not(body))
    }

    /// The α/β classification table. Boxes and diamonds over atomic programs
    /// and over Ω are not α/β (Ω is matched before the generic
    /// precondition-effect rows), and neither are capability statements over
    /// non-composite programs.
    fn classify(&mut self, f: FId) -> Classification {
        use Classification::*;
        match self.fview(f) {
            FView::True | FView::False | FView::Atom(_) => NotAlphaBeta,
            FView::Box(p, phi) => match self.pview(p) {
                PView::Atomic(_) => NotAlphaBeta,
                PView::Arrow(_, _) if self.is_omega(p) => NotAlphaBeta,
                PView::Test(psi) => {
                    let npsi = self.not(psi);
                    Beta(npsi, phi)
                }
                PView::Arrow(pre, post) => {
                    // [(pre => post)]phi  =>  (pre & [omega*][?(post)]phi) | [omega*]phi
                    let os = self.omega_star();
                    let tpost = self.test(post);
                    let boxed = self.boxf(tpost, phi);
                    let chain = self.boxf(os, boxed);
                    let b1 = self.conj(pre, chain);
                    let b2 = self.boxf(os, phi);
                    Beta(b1, b2)
                }
                PView::Seq(a, b) => {
                    let inner = self.boxf(b, phi);
                    Alpha(self.boxf(a, inner), None)
                }
                PView::Choice(a, b) => {
                    let fa = self.boxf(a, phi);
                    let fb = self.boxf(b, phi);
                    Alpha(fa, Some(fb))
                }
                PView::Star(a) => {
                    let rest = self.boxf(p, phi);
                    let fa = self.boxf(a, rest);
                    Alpha(phi, Some(fa))
                }
            },
            FView::Cap(agent, p) => match self.pview(p) {
                PView::Atomic(_) | PView::Test(_) | PView::Arrow(_, _) => NotAlphaBeta,
                PView::Seq(a, b) => {
                    let ca = self.cap(agent, a);
                    let cb = self.cap(agent, b);
                    let fb = self.boxf(a, cb);
                    Alpha(ca, Some(fb))
                }
                PView::Choice(a, b) => {
                    let ca = self.cap(agent, a);
                    let cb = self.cap(agent, b);
                    Alpha(ca, Some(cb))
                }
                PView::Star(a) => {
                    let ca = self.cap(agent, a);
                    Alpha(self.boxf(p, ca), None)
                }
            },
            FView::Not(g) => match self.fview(g) {
                FView::True | FView::False | FView::Atom(_) => NotAlphaBeta,
                FView::Not(h) => Alpha(h, None),
                FView::Box(p, phi) => match self.pview(p) {
                    PView::Atomic(_) => NotAlphaBeta,
                    PView::Arrow(_, _) if self.is_omega(p) => NotAlphaBeta,
                    PView::Test(psi) => {
                        let nphi = self.not(phi);
                        Alpha(nphi, Some(psi))
                    }
                    PView::Arrow(pre, post) => {
                        // ~[(pre => post)]phi  =>  ~[?(~pre)][omega]phi | ~[omega][?(post)]phi
                        let om = self.omega();
                        let npre = self.not(pre);
                        let tnpre = self.test(npre);
                        let ob = self.boxf(om, phi);
                        let lhs_inner = self.boxf(tnpre, ob);
                        let b1 = self.not(lhs_inner);
                        let tpost = self.test(post);
                        let pb = self.boxf(tpost, phi);
                        let rhs_inner = self.boxf(om, pb);
                        let b2 = self.not(rhs_inner);
                        Beta(b1, b2)
                    }
                    PView::Seq(a, b) => {
                        let inner = self.boxf(b, phi);
                        let chain = self.boxf(a, inner);
                        Alpha(self.not(chain), None)
                    }
                    PView::Choice(a, b) => {
                        let fa = self.boxf(a, phi);
                        let fb = self.boxf(b, phi);
                        let na = self.not(fa);
                        let nb = self.not(fb);
                        Beta(na, nb)
                    }
                    PView::Star(a) => {
                        let nphi = self.not(phi);
                        let rest = self.boxf(p, phi);
                        let chain = self.boxf(a, rest);
                        let nchain = self.not(chain);
                        Beta(nphi, nchain)
                    }
                },
                FView::Cap(agent, p) => match self.pview(p) {
                    PView::Atomic(_) | PView::Test(_) | PView::Arrow(_, _) => NotAlphaBeta,
                    PView::Seq(a, b) => {
                        let ca = self.cap(agent, a);
                        let cb = self.cap(agent, b);
                        let nca = self.not(ca);
                        let fb = self.boxf(a, cb);
                        let nfb = self.not(fb);
                        Beta(nca, nfb)
                    }
                    PView::Choice(a, b) => {
                        let ca = self.cap(agent, a);
                        let cb = self.cap(agent, b);
                        let nca = self.not(ca);
                        let ncb = self.not(cb);
                        Beta(nca, ncb)
                    }
                    PView::Star(a) => {
                        let ca = self.cap(agent, a);
                        let boxed = self.boxf(p, ca);
                        Alpha(self.not(boxed), None)
                    }
                },
            },
        }
    }
}

// ---------------------------------------------------------------------------
// Public constructors and views.
// ---------------------------------------------------------------------------

/// Intern an identifier name.
pub fn sym(name: &str) -> Sym {
    store().intern_name(name)
}

/// Resolve an interned name back to its string.
pub fn sym_name(s: Sym) -> String {
    store().names[s.0 as usize].clone()
}

pub fn tt() -> FId {
    store().tt()
}

pub fn ff() -> FId {
    store().ff()
}

pub fn atom(name: &str) -> FId {
    let mut st = store();
    let s = st.intern_name(name);
    st.intern_f(FView::Atom(s))
}

pub fn atom_sym(s: Sym) -> FId {
    store().intern_f(FView::Atom(s))
}

pub fn not(f: FId) -> FId {
    store().not(f)
}

pub fn boxf(p: PId, f: FId) -> FId {
    store().boxf(p, f)
}

pub fn cap(agent: Sym, p: PId) -> FId {
    store().cap(agent, p)
}

pub fn aprog(name: &str) -> PId {
    let mut st = store();
    let s = st.intern_name(name);
    st.intern_p(PView::Atomic(s))
}

pub fn aprog_sym(s: Sym) -> PId {
    store().intern_p(PView::Atomic(s))
}

pub fn test(f: FId) -> PId {
    store().test(f)
}

pub fn arrow(pre: FId, post: FId) -> PId {
    store().intern_p(PView::Arrow(pre, post))
}

pub fn seq(a: PId, b: PId) -> PId {
    store().intern_p(PView::Seq(a, b))
}

pub fn choice(a: PId, b: PId) -> PId {
    store().intern_p(PView::Choice(a, b))
}

pub fn star(a: PId) -> PId {
    store().intern_p(PView::Star(a))
}

/// The universal process Ω, canonically `(true => true)`.
pub fn omega() -> PId {
    store().omega()
}

/// `omega*` — the iterated universal process.
pub fn omega_star() -> PId {
    store().omega_star()
}

/// Conjunction `a & b`, desugared to `~[?(a)]~b`.
pub fn conj(a: FId, b: FId) -> FId {
    store().conj(a, b)
}

/// Disjunction `a | b`, desugared to `[?(~a)]b`.
pub fn disj(a: FId, b: FId) -> FId {
    let mut st = store();
    let na = st.not(a);
    let t = st.test(na);
    st.boxf(t, b)
}

/// Implication `a -> b`, desugared to `[?(a)]b`.
pub fn implies(a: FId, b: FId) -> FId {
    let mut st = store();
    let t = st.test(a);
    st.boxf(t, b)
}

/// Diamond `<A>f`, desugared to `~[A]~f`.
pub fn diamond(p: PId, f: FId) -> FId {
    let mut st = store();
    let nf = st.not(f);
    let inner = st.boxf(p, nf);
    st.not(inner)
}

pub fn fview(f: FId) -> FView {
    store().fview(f)
}

pub fn pview(p: PId) -> PView {
    store().pview(p)
}

pub fn is_omega(p: PId) -> bool {
    store().is_omega(p)
}

/// Membership in AtPΩ: atomic programs and Ω.
pub fn in_atp_omega(p: PId) -> bool {
    store().in_atp_omega(p)
}

/// Membership in Σ: atomic programs, tests, and precondition-effect terms.
pub fn in_sigma(p: PId) -> bool {
    store().in_sigma(p)
}

/// Membership in Σ̃: atomic programs and precondition-effect terms.
pub fn in_sigma_tilde(p: PId) -> bool {
    store().in_sigma_tilde(p)
}

/// Normalise the top of a formula: rewrites a positive box over Ω to a box
/// over `omega*` unless it already has the self-reproducing `[omega][omega*]_`
/// shape. Applied whenever a formula enters a label, the closure, or a
/// capability-refutation set.
pub fn norm_top(f: FId) -> FId {
    store().norm_top(f)
}

/// Size of a formula.
pub fn size_f(f: FId) -> u64 {
    let st = store();
    st.size_f(f, &mut HashMap::new(), &mut HashMap::new())
}

/// Size of a program.
pub fn size_p(p: PId) -> u64 {
    let st = store();
    st.size_p(p, &mut HashMap::new(), &mut HashMap::new())
}

/// Total structural order on formulas (constructor rank, then components,
/// with identifier names compared as strings).
pub fn canon_cmp_f(a: FId, b: FId) -> Ordering {
    store().cmp_f(a, b)
}

/// Total structural order on programs.
pub fn canon_cmp_p(a: PId, b: PId) -> Ordering {
    store().cmp_p(a, b)
}

/// Sort a slice of formulas into the canonical structural order.
pub fn canon_sort(fs: &mut [FId]) {
    let st = store();
    fs.sort_by(|&a, &b| st.cmp_f(a, b));
}

pub fn is_eventuality(f: FId) -> bool {
    store().is_eventuality(f)
}

/// The non-eventuality formula an eventuality must deliver (`~f'` for the
/// last iterated box in the chain); `None` for non-eventualities.
pub fn ev_target(f: FId) -> Option<FId> {
    store().ev_target(f)
}

pub fn classify(f: FId) -> Classification {
    store().classify(f)
}

/// True when `classify(f)` is α or β.
pub fn is_alpha_beta(f: FId) -> bool {
    !matches!(classify(f), Classification::NotAlphaBeta)
}

// ---------------------------------------------------------------------------
// Closure and capability-refutation sets.
// ---------------------------------------------------------------------------

/// Default closure cardinality cap, as a multiple of `size_f(f)^2`.
pub const CLOSURE_CAP_FACTOR: u64 = 64;

/// The formula closure: the least set containing `f` (top-normalised) that is
/// closed under reduction sets of α/β members, unboxing of boxes and diamonds
/// over atomic programs and Ω, and the operand rules for capability
/// statements over precondition-effect terms. Errors out when the fixpoint
/// exceeds `64·|f|²` members.
pub fn closure(f: FId) -> Result<FormulaSet, SyntaxError> {
    closure_of_set(std::slice::from_ref(&f))
}

/// Closure of a set of root formulas, with the budget computed from the sum
/// of their sizes (plus the sizes of the implicit conjunction glue).
pub fn closure_of_set(roots: &[FId]) -> Result<FormulaSet, SyntaxError> {
    let n: u64 = roots.iter().map(|&f| size_f(f)).sum::<u64>() + roots.len() as u64;
    let cap = (CLOSURE_CAP_FACTOR.saturating_mul(n.saturating_mul(n))).max(16) as usize;
    let mut out: FormulaSet = BTreeSet::new();
    let mut work: Vec<FId> = Vec::new();
    for &r in roots {
        let r = norm_top(r);
        if out.insert(r) {
            work.push(r);
        }
    }
    while let Some(g) = work.pop() {
        if out.len() > cap {
            return Err(SyntaxError::ClosureBudget {
                got: out.len(),
                cap,
            });
        }
        let mut new: Vec<FId> = Vec::new();
        match classify(g) {
            Classification::NotAlphaBeta => {}
            _ => {
                for set in crate::reduction::reduction_sets(g).expect("alpha/beta formula") {
                    new.extend(set);
                }
            }
        }
        match fview(g) {
            FView::Box(p, body) if in_atp_omega(p) => new.push(body),
            FView::Not(h) => match fview(h) {
                FView::Box(p, body) if in_atp_omega(p) => new.push(not(body)),
                FView::Cap(_, p) => {
                    if let PView::Arrow(pre, post) = pview(p) {
                        new.push(not(pre));
                        new.push(post);
                    }
                }
                _ => {}
            },
            FView::Cap(_, p) => {
                if let PView::Arrow(pre, post) = pview(p) {
                    new.push(pre);
                    new.push(not(post));
                }
            }
            _ => {}
        }
        for m in new {
            let m = norm_top(m);
            if out.insert(m) {
                work.push(m);
            }
        }
    }
    Ok(out)
}

/// Capability-refutation set: the formulas a successor state must carry to
/// witness that agent `ι` genuinely lacks the capability `neg_cap = ~cap(ι,A)`
/// given the positive precondition-effect capabilities in `gamma`
/// (`cap(ι, (φ1=>ψ1))`, …, `cap(ι, (φk=>ψk))`, all for the same agent).
///
/// The result always contains the chain
/// `~[A][?(~ψ1)]...[?(~ψk)]false` and all its unboxings down to `~false`;
/// when `A` is itself a precondition-effect term, four more formulas cover
/// its two decomposition branches.
pub fn cpr_set(neg_cap: FId, gamma: &[FId]) -> Result<Vec<FId>, SyntaxError> {
    let (a, _, posts) = refutation_parts(neg_cap, gamma)?;
    let chains = post_chains(&posts);
    let mut out: Vec<FId> = Vec::new();
    out.push(not(boxf(a, chains[0])));
    for &c in chains.iter() {
        out.push(not(c));
    }
    if let PView::Arrow(pre, post) = pview(a) {
        let om = omega();
        let npre = not(pre);
        let tnpre = test(npre);
        let ob = boxf(om, chains[0]);
        out.push(not(boxf(tnpre, ob)));
        out.push(not(ob));
        let tpost = test(post);
        let pb = boxf(tpost, chains[0]);
        out.push(not(boxf(om, pb)));
        out.push(not(pb));
    }
    let mut out: Vec<FId> = out.into_iter().map(norm_top).collect();
    canon_sort(&mut out);
    out.dedup();
    Ok(out)
}

/// The label of the witness state refuting `neg_cap = ~cap(ι,A)` against the
/// positive precondition-effect capabilities `gamma` of the same agent: all
/// their preconditions, plus a demand for an `A`-successor failing every one
/// of their effects (`~[A][?(~ψ1)]...[?(~ψk)]false`).
pub fn cap_demand_set(neg_cap: FId, gamma: &[FId]) -> Result<Vec<FId>, SyntaxError> {
    let (a, pres, posts) = refutation_parts(neg_cap, gamma)?;
    let chains = post_chains(&posts);
    let mut out: Vec<FId> = pres;
    out.push(not(boxf(a, chains[0])));
    let mut out: Vec<FId> = out.into_iter().map(norm_top).collect();
    canon_sort(&mut out);
    out.dedup();
    Ok(out)
}

/// Validate a capability-refutation instance and split it into the denied
/// program and the preconditions and effects of `gamma` in canonical order.
fn refutation_parts(neg_cap: FId, gamma: &[FId]) -> Result<(PId, Vec<FId>, Vec<FId>), SyntaxError> {
    let FView::Not(inner) = fview(neg_cap) else {
        return Err(SyntaxError::MalformedCpr(
            "negated capability expected".into(),
        ));
    };
    let FView::Cap(agent, a) = fview(inner) else {
        return Err(SyntaxError::MalformedCpr(
            "negated capability expected".into(),
        ));
    };
    if !in_sigma_tilde(a) {
        return Err(SyntaxError::MalformedCpr(
            "negated capability must concern an atomic or precondition-effect program".into(),
        ));
    }
    let mut sorted_gamma = gamma.to_vec();
    canon_sort(&mut sorted_gamma);
    sorted_gamma.dedup();
    let mut pres: Vec<FId> = Vec::with_capacity(sorted_gamma.len());
    let mut posts: Vec<FId> = Vec::with_capacity(sorted_gamma.len());
    for &g in &sorted_gamma {
        let FView::Cap(ag, p) = fview(g) else {
            return Err(SyntaxError::MalformedCpr(
                "gamma must contain positive capability statements".into(),
            ));
        };
        let PView::Arrow(pre, post) = pview(p) else {
            return Err(SyntaxError::MalformedCpr(
                "gamma capabilities must concern precondition-effect programs".into(),
            ));
        };
        if ag != agent {
            return Err(SyntaxError::MalformedCpr(
                "gamma capabilities must concern the same agent".into(),
            ));
        }
        pres.push(pre);
        posts.push(post);
    }
    Ok((a, pres, posts))
}

/// `chains[j] = [?(~ψ_{j+1})]...[?(~ψ_k)]false`, so `chains[k] = false` and
/// `chains[0]` tests every effect in turn.
fn post_chains(posts: &[FId]) -> Vec<FId> {
    let k = posts.len();
    let mut chains = vec![ff(); k + 1];
    for j in (0..k).rev() {
        let np = not(posts[j]);
        let t = test(np);
        chains[j] = boxf(t, chains[j + 1]);
    }
    chains
}

/// Membership test for a reduction set against a formula set, modulo the
/// top-of-term Ω normalisation applied when formulas enter labels.
pub fn red_set_in(set: &BTreeSet<FId>, phi: &FormulaSet) -> bool {
    set.iter().all(|&m| phi.contains(&norm_top(m)))
}
