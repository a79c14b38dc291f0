//! Hash-consed modal formulas: atoms, negation, finite conjunction and
//! disjunction over formula sets, and the box/diamond modalities.
//!
//! Structurally equal formulas share one node, so the labels produced by the
//! unfolding engine form a DAG instead of an exponentially duplicated tree.
//! Conjunction and disjunction members are deduplicated and kept in canonical
//! order at construction time, which makes parse → render → parse a fixed
//! point.

use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::kripke::{KripkeModel, WorldId};

/// Characters that delimit atom tags in the concrete grammar.
const TAG_DELIMITERS: &[char] = &[',', '{', '}', '(', ')', ' ', '\t', '\r', '\n'];

#[derive(Debug)]
pub enum Kind {
    Atom(String),
    Top,
    Not(Formula),
    Conj(Vec<Formula>),
    Disj(Vec<Formula>),
    Box_(Formula),
    Diamond(Formula),
}

#[derive(Debug)]
pub struct Node {
    id: u64,
    kind: Kind,
}

/// An immutable, interned modal formula. Cloning is a pointer copy and
/// equality is pointer equality.
#[derive(Clone, Debug)]
pub struct Formula(Arc<Node>);

impl PartialEq for Formula {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}
impl Eq for Formula {}

impl std::hash::Hash for Formula {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.id.hash(state);
    }
}

impl PartialOrd for Formula {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Canonical structural order: variant rank first, then payload. Used to sort
/// conjunction/disjunction members, so the order is stable across processes.
impl Ord for Formula {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering::*;
        if Arc::ptr_eq(&self.0, &other.0) {
            return Equal;
        }
        fn rank(k: &Kind) -> u8 {
            match k {
                Kind::Atom(_) => 0,
                Kind::Top => 1,
                Kind::Not(_) => 2,
                Kind::Box_(_) => 3,
                Kind::Diamond(_) => 4,
                Kind::Conj(_) => 5,
                Kind::Disj(_) => 6,
            }
        }
        match rank(&self.0.kind).cmp(&rank(&other.0.kind)) {
            Equal => {}
            ord => return ord,
        }
        match (&self.0.kind, &other.0.kind) {
            (Kind::Atom(a), Kind::Atom(b)) => a.cmp(b),
            (Kind::Top, Kind::Top) => Equal,
            (Kind::Not(a), Kind::Not(b))
            | (Kind::Box_(a), Kind::Box_(b))
            | (Kind::Diamond(a), Kind::Diamond(b)) => a.cmp(b),
            (Kind::Conj(a), Kind::Conj(b)) | (Kind::Disj(a), Kind::Disj(b)) => a.cmp(b),
            _ => unreachable!("rank already discriminated"),
        }
    }
}

/// Interner key: children are already interned, so their ids identify them.
#[derive(PartialEq, Eq, Hash)]
enum Key {
    Atom(String),
    Top,
    Not(u64),
    Conj(Vec<u64>),
    Disj(Vec<u64>),
    Box_(u64),
    Diamond(u64),
}

static TABLE: OnceLock<Mutex<HashMap<Key, Formula>>> = OnceLock::new();
static NEXT_ID: AtomicU64 = AtomicU64::new(0);

fn intern(key: Key, kind: impl FnOnce() -> Kind) -> Formula {
    let table = TABLE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut table = table.lock().expect("formula interner poisoned");
    if let Some(f) = table.get(&key) {
        return f.clone();
    }
    let node = Node {
        id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
        kind: kind(),
    };
    let f = Formula(Arc::new(node));
    table.insert(key, f.clone());
    f
}

impl Formula {
    /// Atomic proposition. The tag must not contain grammar delimiters.
    pub fn atom(tag: impl Into<String>) -> Result<Formula> {
        let tag = tag.into();
        if tag.chars().any(|c| TAG_DELIMITERS.contains(&c)) {
            return Err(Error::BadAtomTag(tag));
        }
        Ok(intern(Key::Atom(tag.clone()), || Kind::Atom(tag)))
    }

    pub fn top() -> Formula {
        intern(Key::Top, || Kind::Top)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        intern(Key::Not(f.id()), || Kind::Not(f))
    }

    pub fn box_(f: Formula) -> Formula {
        intern(Key::Box_(f.id()), || Kind::Box_(f))
    }

    pub fn diamond(f: Formula) -> Formula {
        intern(Key::Diamond(f.id()), || Kind::Diamond(f))
    }

    /// Finite conjunction. Members are deduplicated and canonically ordered;
    /// the empty conjunction is `Top` and a singleton collapses to its member.
    pub fn conj(fs: impl IntoIterator<Item = Formula>) -> Formula {
        let members = canonical_members(fs);
        match members.len() {
            0 => Formula::top(),
            1 => members.into_iter().next().unwrap(),
            _ => {
                let ids = members.iter().map(|f| f.id()).collect();
                intern(Key::Conj(ids), || Kind::Conj(members))
            }
        }
    }

    /// Finite disjunction. The empty disjunction is `¬Top`.
    pub fn disj(fs: impl IntoIterator<Item = Formula>) -> Formula {
        let members = canonical_members(fs);
        match members.len() {
            0 => Formula::not(Formula::top()),
            1 => members.into_iter().next().unwrap(),
            _ => {
                let ids = members.iter().map(|f| f.id()).collect();
                intern(Key::Disj(ids), || Kind::Disj(members))
            }
        }
    }

    pub fn kind(&self) -> &Kind {
        &self.0.kind
    }

    /// Stable id of the interned node within this process.
    pub fn id(&self) -> u64 {
        self.0.id
    }

    /// Atom tags occurring in the formula.
    pub fn atoms(&self) -> std::collections::BTreeSet<&str> {
        let mut out = std::collections::BTreeSet::new();
        fn walk<'a>(f: &'a Formula, out: &mut std::collections::BTreeSet<&'a str>) {
            match f.kind() {
                Kind::Atom(t) => {
                    out.insert(t.as_str());
                }
                Kind::Top => {}
                Kind::Not(g) | Kind::Box_(g) | Kind::Diamond(g) => walk(g, out),
                Kind::Conj(gs) | Kind::Disj(gs) => {
                    for g in gs {
                        walk(g, out);
                    }
                }
            }
        }
        walk(self, &mut out);
        out
    }
}

fn canonical_members(fs: impl IntoIterator<Item = Formula>) -> Vec<Formula> {
    let mut members: Vec<Formula> = fs.into_iter().collect();
    members.sort();
    members.dedup();
    members
}

/// `△Φ = ⋀◇Φ ∧ □⋁Φ`: the unfolding operator over a finite formula set.
pub fn triangle(fs: impl IntoIterator<Item = Formula>) -> Formula {
    let members = canonical_members(fs);
    let diamonds = Formula::conj(members.iter().cloned().map(Formula::diamond));
    let boxed = Formula::box_(Formula::disj(members));
    Formula::conj([diamonds, boxed])
}

// ---------------------------------------------------------------------------
// printer

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind() {
            Kind::Atom(t) => write!(f, "atom:{t}"),
            // canonical text for Top is the empty conjunction
            Kind::Top => write!(f, "/\\{{}}"),
            Kind::Not(g) => write!(f, "~{g}"),
            Kind::Box_(g) => write!(f, "[]{g}"),
            Kind::Diamond(g) => write!(f, "<>{g}"),
            Kind::Conj(gs) => write_set(f, "/\\", gs),
            Kind::Disj(gs) => write_set(f, "\\/", gs),
        }
    }
}

fn write_set(f: &mut fmt::Formatter<'_>, op: &str, gs: &[Formula]) -> fmt::Result {
    write!(f, "{op}{{")?;
    for (i, g) in gs.iter().enumerate() {
        if i > 0 {
            write!(f, ",")?;
        }
        write!(f, "{g}")?;
    }
    write!(f, "}}")
}

/// Deterministic canonical text; `parse(render(f))` is structurally `f`.
pub fn render(f: &Formula) -> String {
    f.to_string()
}

// ---------------------------------------------------------------------------
// parser

/// Parse the concrete grammar:
/// `atom:<id>`, `T`, `~F`, `/\{F,...}`, `\/{F,...}`, `[]F`, `<>F`, `(F)`.
/// The Unicode glyphs `□` and `◇` are accepted as aliases of `[]` and `<>`.
pub fn parse(text: &str) -> Result<Formula> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    p.skip_ws();
    let f = p.formula()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("trailing input"));
    }
    Ok(f)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> Error {
        Error::Syntax {
            offset: self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && (self.src[self.pos] as char).is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, lit: &str) -> bool {
        if self.src[self.pos..].starts_with(lit.as_bytes()) {
            self.pos += lit.len();
            true
        } else {
            false
        }
    }

    fn formula(&mut self) -> Result<Formula> {
        self.skip_ws();
        if self.eat("atom:") {
            return self.atom_tag();
        }
        if self.eat("~") {
            return Ok(Formula::not(self.formula()?));
        }
        if self.eat("[]") || self.eat("\u{25A1}") {
            return Ok(Formula::box_(self.formula()?));
        }
        if self.eat("<>") || self.eat("\u{25C7}") {
            return Ok(Formula::diamond(self.formula()?));
        }
        if self.eat("/\\") {
            return Ok(Formula::conj(self.set_body()?));
        }
        if self.eat("\\/") {
            return Ok(Formula::disj(self.set_body()?));
        }
        if self.eat("(") {
            let f = self.formula()?;
            self.skip_ws();
            if !self.eat(")") {
                return Err(self.err("expected ')'"));
            }
            return Ok(f);
        }
        if self.eat("T") {
            return Ok(Formula::top());
        }
        Err(self.err("expected a formula"))
    }

    fn atom_tag(&mut self) -> Result<Formula> {
        let start = self.pos;
        while self.pos < self.src.len() {
            // tags are raw bytes up to a delimiter; non-ASCII is allowed
            let b = self.src[self.pos];
            if b.is_ascii() && TAG_DELIMITERS.contains(&(b as char)) {
                break;
            }
            self.pos += 1;
        }
        let tag = std::str::from_utf8(&self.src[start..self.pos])
            .map_err(|_| self.err("atom tag is not valid UTF-8"))?;
        if tag.is_empty() {
            return Err(self.err("empty atom tag"));
        }
        Formula::atom(tag)
    }

    fn set_body(&mut self) -> Result<Vec<Formula>> {
        self.skip_ws();
        if !self.eat("{") {
            return Err(self.err("expected '{'"));
        }
        let mut members = Vec::new();
        self.skip_ws();
        if self.eat("}") {
            return Ok(members);
        }
        loop {
            members.push(self.formula()?);
            self.skip_ws();
            if self.eat(",") {
                continue;
            }
            if self.eat("}") {
                return Ok(members);
            }
            return Err(self.err("expected ',' or '}'"));
        }
    }
}

// ---------------------------------------------------------------------------
// evaluator

/// Kripke evaluation of `f` at world `w`, memoized per (world, subformula).
///
/// Box is the universal quantifier over R-successors and Diamond the
/// existential one; a world without successors satisfies every `[]g` and no
/// `<>g`.
pub fn eval(model: &KripkeModel, w: &WorldId, f: &Formula) -> Result<bool> {
    let wi = model
        .index_of(w)
        .ok_or_else(|| Error::UnknownWorld(w.to_string()))?;
    for tag in f.atoms() {
        if !model.has_atom(tag) {
            return Err(Error::UnknownAtom(tag.to_string()));
        }
    }
    let mut memo: HashMap<(usize, u64), bool> = HashMap::new();
    Ok(eval_at(model, wi, f, &mut memo))
}

fn eval_at(model: &KripkeModel, w: usize, f: &Formula, memo: &mut HashMap<(usize, u64), bool>) -> bool {
    if let Some(&v) = memo.get(&(w, f.id())) {
        return v;
    }
    let value = match f.kind() {
        Kind::Atom(t) => model.valuation_at(w).contains(t),
        Kind::Top => true,
        Kind::Not(g) => !eval_at(model, w, g, memo),
        Kind::Conj(gs) => gs.iter().all(|g| eval_at(model, w, g, memo)),
        Kind::Disj(gs) => gs.iter().any(|g| eval_at(model, w, g, memo)),
        Kind::Box_(g) => model
            .successors(w)
            .iter()
            .all(|&s| eval_at(model, s, g, memo)),
        Kind::Diamond(g) => model
            .successors(w)
            .iter()
            .any(|&s| eval_at(model, s, g, memo)),
    };
    memo.insert((w, f.id()), value);
    value
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kripke::build_model;
    use crate::testutil::Rng;
    use std::collections::BTreeMap;

    fn a(t: &str) -> Formula {
        Formula::atom(t).unwrap()
    }

    #[test]
    fn constructor_examples() {
        assert_eq!(parse("[]atom:a").unwrap(), Formula::box_(a("a")));
        assert_eq!(parse("/\\{}").unwrap(), Formula::top());
        // canonicalization oracle: set-based construction dedups members
        assert_eq!(
            parse("<>/\\{atom:a,atom:a}").unwrap(),
            Formula::diamond(a("a"))
        );
        assert_eq!(parse("\\/{}").unwrap(), Formula::not(Formula::top()));
        assert_eq!(parse("T").unwrap(), Formula::top());
        assert_eq!(parse("□atom:x").unwrap(), parse("[]atom:x").unwrap());
        assert_eq!(parse("◇atom:x").unwrap(), parse("<>atom:x").unwrap());
        assert_eq!(parse("( atom:x )").unwrap(), a("x"));
    }

    #[test]
    fn render_examples() {
        assert_eq!(render(&Formula::box_(a("a"))), "[]atom:a");
        assert_eq!(render(&Formula::top()), "/\\{}");
        // canonical-order oracle: members sorted lexicographically
        assert_eq!(render(&Formula::conj([a("b"), a("a")])), "/\\{atom:a,atom:b}");
    }

    #[test]
    fn parse_errors_carry_offsets() {
        match parse("/\\{atom:a,") {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 10),
            other => panic!("expected syntax error, got {other:?}"),
        }
        assert!(parse("atom:").is_err());
        assert!(parse("[]atom:a extra").is_err());
        assert!(Formula::atom("a,b").is_err());
    }

    #[test]
    fn triangle_examples() {
        // empty member set: the world has no members
        assert_eq!(
            triangle([]),
            Formula::conj([
                Formula::top(),
                Formula::box_(Formula::not(Formula::top()))
            ])
        );
        // singleton: ◇p ∧ □p
        assert_eq!(
            triangle([a("p")]),
            Formula::conj([Formula::diamond(a("p")), Formula::box_(a("p"))])
        );
        // pair: (◇p ∧ ◇q) ∧ □(p ∨ q), by direct expansion
        assert_eq!(
            triangle([a("p"), a("q")]),
            Formula::conj([
                Formula::conj([Formula::diamond(a("p")), Formula::diamond(a("q"))]),
                Formula::box_(Formula::disj([a("p"), a("q")]))
            ])
        );
    }

    fn two_world_model() -> KripkeModel {
        // w1 -> {w1, w2}, w2 -> {}, v1 = {p1}, v2 = {p2}
        let valuation: BTreeMap<String, Vec<String>> = [
            ("w1".to_string(), vec!["p1".to_string()]),
            ("w2".to_string(), vec!["p2".to_string()]),
        ]
        .into();
        build_model(
            vec!["w1".into(), "w2".into()],
            vec![("w1".into(), "w1".into()), ("w1".into(), "w2".into())],
            valuation,
            None,
        )
        .unwrap()
    }

    #[test]
    fn eval_examples() {
        let m = two_world_model();
        let w1 = WorldId::new("w1");
        let w2 = WorldId::new("w2");
        // no successors: vacuous Box, empty Diamond
        assert!(eval(&m, &w2, &Formula::box_(a("p1"))).unwrap());
        assert!(!eval(&m, &w2, &Formula::diamond(Formula::top())).unwrap());
        // enumerated by hand: both successors of w1 satisfy p1 ∨ p2
        assert!(eval(&m, &w1, &Formula::box_(Formula::disj([a("p1"), a("p2")]))).unwrap());
        assert!(eval(&m, &w1, &Formula::diamond(a("p2"))).unwrap());
        assert!(!eval(&m, &w1, &Formula::box_(a("p1"))).unwrap());

        assert!(matches!(
            eval(&m, &WorldId::new("nope"), &Formula::top()),
            Err(Error::UnknownWorld(_))
        ));
        assert!(matches!(
            eval(&m, &w1, &a("zz")),
            Err(Error::UnknownAtom(_))
        ));
    }

    /// Random formula over `tags` with the given depth budget.
    fn random_formula(rng: &mut Rng, depth: usize, tags: &[&str]) -> Formula {
        let pick = if depth == 0 { rng.below(2) } else { rng.below(7) };
        match pick {
            0 => a(tags[rng.below(tags.len() as u64) as usize]),
            1 => Formula::top(),
            2 => Formula::not(random_formula(rng, depth - 1, tags)),
            3 => Formula::box_(random_formula(rng, depth - 1, tags)),
            4 => Formula::diamond(random_formula(rng, depth - 1, tags)),
            n => {
                let len = rng.below(4) as usize;
                let members = (0..len).map(|_| random_formula(rng, depth - 1, tags));
                if n == 5 {
                    Formula::conj(members)
                } else {
                    Formula::disj(members)
                }
            }
        }
    }

    #[test]
    fn round_trip_random_formulas() {
        let mut rng = Rng::new(0x5eed);
        let tags = ["a", "b", "c/d", "x1"];
        for _ in 0..10_000 {
            let depth = 1 + rng.below(8) as usize;
            let f = random_formula(&mut rng, depth, &tags);
            let text = render(&f);
            let back = parse(&text).unwrap();
            assert_eq!(back, f, "round trip failed for {text}");
            assert_eq!(render(&back), text);
        }
    }

    /// All models with |W| <= 3 over one fixed relation sample per world
    /// count, exhaustive over valuations, plus all formulas of depth <= 3
    /// over two atoms is too large; instead sweep all relations for |W| <= 3
    /// with random formulas. This is the brute-force semantics grid.
    #[test]
    fn semantics_grid() {
        let mut rng = Rng::new(0xbead);
        let tags = ["p", "q"];
        for n in 1usize..=3 {
            let pair_count = n * n;
            for rel_bits in 0u32..(1 << pair_count) {
                // valuation: world i gets tag p iff bit i, q iff bit n+i
                for val_bits in 0u32..(1 << (2 * n)) {
                    let worlds: Vec<WorldId> =
                        (0..n).map(|i| WorldId::new(format!("w{i}"))).collect();
                    let mut access = Vec::new();
                    for i in 0..n {
                        for j in 0..n {
                            if rel_bits >> (i * n + j) & 1 == 1 {
                                access.push((worlds[i].clone(), worlds[j].clone()));
                            }
                        }
                    }
                    let mut valuation = BTreeMap::new();
                    for (i, w) in worlds.iter().enumerate() {
                        let mut tags_here = Vec::new();
                        if val_bits >> i & 1 == 1 {
                            tags_here.push("p".to_string());
                        }
                        if val_bits >> (n + i) & 1 == 1 {
                            tags_here.push("q".to_string());
                        }
                        valuation.insert(w.to_string(), tags_here);
                    }
                    let m = build_model(worlds.clone(), access, valuation, None)
                        .unwrap()
                        .with_declared_atoms(["p", "q"]);
                    let f = random_formula(&mut rng, 3, &tags);
                    let g = random_formula(&mut rng, 2, &tags);
                    for w in &worlds {
                        let vf = eval(&m, w, &f).unwrap();
                        let vg = eval(&m, w, &g).unwrap();
                        // negation
                        assert_eq!(eval(&m, w, &Formula::not(f.clone())).unwrap(), !vf);
                        // conjunction agrees with member evals
                        assert_eq!(
                            eval(&m, w, &Formula::conj([f.clone(), g.clone()])).unwrap(),
                            vf && vg
                        );
                        // duality: □f = ¬◇¬f
                        assert_eq!(
                            eval(&m, w, &Formula::box_(f.clone())).unwrap(),
                            eval(
                                &m,
                                w,
                                &Formula::not(Formula::diamond(Formula::not(f.clone())))
                            )
                            .unwrap()
                        );
                    }
                }
            }
        }
    }
}
