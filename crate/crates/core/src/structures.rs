//! Finite relational structures: signatures, relation tables, and the
//! structural operations (complement, canonical relation, homomorphisms,
//! cores, bipartiteness) that the classifier conditions on.
//!
//! Domain elements are canonical integers `0..n`. Named elements exist only
//! in the text format layer. All types are immutable after construction and
//! every operation is a pure function.

use std::collections::BTreeSet;
use std::fmt;

use itertools::Itertools;
use sha2::{Digest, Sha256};
use thiserror::Error;

/// A domain element of a finite structure.
pub type Element = usize;

/// Index of a relation within a [`Signature`] (0-based).
///
/// The token coding of sentences refers to relations by 1-based position;
/// use [`RelId::coding_index`] for that view.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RelId(pub usize);

impl RelId {
    /// 1-based index used by the token coding (`R bin(i)`).
    pub fn coding_index(self) -> usize {
        self.0 + 1
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StructureError {
    #[error("relation arity must be at least 1 (relation `{0}`)")]
    ZeroArity(String),
    #[error("duplicate relation name `{0}`")]
    DuplicateRelation(String),
    #[error("invalid relation name `{0}`: must be an identifier and not a variable or keyword")]
    InvalidRelationName(String),
    #[error("domain size must be at least 1")]
    EmptyDomain,
    #[error("expected {expected} tables, got {got}")]
    TableCountMismatch { expected: usize, got: usize },
    #[error("tuple {tuple:?} has {got} components, relation `{name}` has arity {expected}")]
    TupleArityMismatch {
        name: String,
        tuple: Vec<Element>,
        expected: usize,
        got: usize,
    },
    #[error("tuple {tuple:?} mentions element {element}, domain has {domain_size} elements")]
    ElementOutOfRange {
        tuple: Vec<Element>,
        element: Element,
        domain_size: usize,
    },
    #[error("tuple has {got} components, table has arity {expected}")]
    TableArityMismatch { expected: usize, got: usize },
    #[error("undefined on empty canonical relation")]
    EmptyCanonicalRelation,
    #[error("signatures differ: {0}")]
    SignatureMismatch(String),
    #[error("structure is not a digraph (expected a single binary relation)")]
    NotADigraph,
    #[error("edge relation is not symmetric: contains {0:?} but not its reverse")]
    AsymmetricEdges(Vec<Element>),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// A relation symbol: a name and an arity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationSymbol {
    pub name: String,
    pub arity: usize,
}

/// An ordered list of relation symbols with distinct names and arities >= 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    relations: Vec<RelationSymbol>,
}

fn valid_relation_name(name: &str) -> bool {
    if name == "exists" || name == "forall" {
        return false;
    }
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    if !name
        .chars()
        .all(|c| c.is_ascii_alphanumeric() || c == '_')
    {
        return false;
    }
    // Names of the shape v<digits> are reserved for variables.
    let mut it = name.chars();
    if it.next() == Some('v') {
        let rest: String = it.collect();
        if !rest.is_empty() && rest.chars().all(|c| c.is_ascii_digit()) {
            return false;
        }
    }
    true
}

impl Signature {
    pub fn new<S: Into<String>>(relations: Vec<(S, usize)>) -> Result<Signature, StructureError> {
        let mut seen = BTreeSet::new();
        let mut rels = Vec::with_capacity(relations.len());
        for (name, arity) in relations {
            let name = name.into();
            if !valid_relation_name(&name) {
                return Err(StructureError::InvalidRelationName(name));
            }
            if arity == 0 {
                return Err(StructureError::ZeroArity(name));
            }
            if !seen.insert(name.clone()) {
                return Err(StructureError::DuplicateRelation(name));
            }
            rels.push(RelationSymbol { name, arity });
        }
        Ok(Signature { relations: rels })
    }

    /// The digraph signature: a single binary relation `E`.
    pub fn digraph() -> Signature {
        Signature::new(vec![("E", 2)]).expect("digraph signature is valid")
    }

    pub fn relations(&self) -> &[RelationSymbol] {
        &self.relations
    }

    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<RelId> {
        self.relations
            .iter()
            .position(|r| r.name == name)
            .map(RelId)
    }

    pub fn symbol(&self, rel: RelId) -> Option<&RelationSymbol> {
        self.relations.get(rel.0)
    }

    pub fn arity(&self, rel: RelId) -> Option<usize> {
        self.symbol(rel).map(|r| r.arity)
    }

    /// Maximum arity over all relations, 0 for the empty signature.
    pub fn max_arity(&self) -> usize {
        self.relations.iter().map(|r| r.arity).max().unwrap_or(0)
    }
}

/// A set of same-length tuples over a finite domain.
///
/// Arity 0 is the distinguished sentinel for the empty canonical relation;
/// it never holds tuples and x-validity queries on it are errors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationTable {
    arity: usize,
    tuples: BTreeSet<Vec<Element>>,
}

impl RelationTable {
    pub fn new(arity: usize) -> RelationTable {
        RelationTable {
            arity,
            tuples: BTreeSet::new(),
        }
    }

    /// The arity-0 sentinel standing for an empty canonical relation.
    pub fn empty_sentinel() -> RelationTable {
        RelationTable::new(0)
    }

    pub fn from_tuples<I>(arity: usize, tuples: I) -> Result<RelationTable, StructureError>
    where
        I: IntoIterator<Item = Vec<Element>>,
    {
        let mut table = RelationTable::new(arity);
        for t in tuples {
            table.insert(t)?;
        }
        Ok(table)
    }

    pub fn insert(&mut self, tuple: Vec<Element>) -> Result<(), StructureError> {
        if tuple.len() != self.arity {
            return Err(StructureError::TableArityMismatch {
                expected: self.arity,
                got: tuple.len(),
            });
        }
        self.tuples.insert(tuple);
        Ok(())
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_sentinel(&self) -> bool {
        self.arity == 0
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn contains(&self, tuple: &[Element]) -> bool {
        self.tuples.contains(tuple)
    }

    /// Tuples in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = &Vec<Element>> {
        self.tuples.iter()
    }

    /// Does the table contain the constant tuple `(x, ..., x)`?
    pub fn is_x_valid(&self, x: Element) -> Result<bool, StructureError> {
        if self.is_sentinel() {
            return Err(StructureError::EmptyCanonicalRelation);
        }
        Ok(self.contains(&vec![x; self.arity]))
    }

    /// All `x` in `0..domain_size` whose constant tuple is in the table.
    pub fn all_valid_witnesses(
        &self,
        domain_size: usize,
    ) -> Result<BTreeSet<Element>, StructureError> {
        if self.is_sentinel() {
            return Err(StructureError::EmptyCanonicalRelation);
        }
        Ok((0..domain_size)
            .filter(|&x| self.contains(&vec![x; self.arity]))
            .collect())
    }

    /// Smallest witness, if any. Sentinel tables count as having none.
    pub fn first_valid_witness(&self, domain_size: usize) -> Option<Element> {
        if self.is_sentinel() {
            return None;
        }
        (0..domain_size).find(|&x| self.contains(&vec![x; self.arity]))
    }

    /// True iff every tuple has pairwise-distinct components.
    pub fn is_antireflexive(&self) -> bool {
        self.tuples
            .iter()
            .all(|t| t.iter().collect::<BTreeSet<_>>().len() == t.len())
    }

    /// Text rendering as one relation block of the structure format.
    pub fn to_text_block(&self, name: &str) -> String {
        let mut out = format!("relation {} {}\n", name, self.arity);
        for t in &self.tuples {
            out.push_str(&t.iter().map(|e| e.to_string()).join(" "));
            out.push('\n');
        }
        out
    }
}

/// A finite relational structure: signature, domain `0..n`, and one table
/// per relation symbol.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Structure {
    signature: Signature,
    domain_size: usize,
    tables: Vec<RelationTable>,
}

impl Structure {
    pub fn new(
        signature: Signature,
        domain_size: usize,
        tables: Vec<RelationTable>,
    ) -> Result<Structure, StructureError> {
        if domain_size == 0 {
            return Err(StructureError::EmptyDomain);
        }
        if tables.len() != signature.len() {
            return Err(StructureError::TableCountMismatch {
                expected: signature.len(),
                got: tables.len(),
            });
        }
        for (symbol, table) in signature.relations().iter().zip(&tables) {
            for t in table.iter() {
                if t.len() != symbol.arity {
                    return Err(StructureError::TupleArityMismatch {
                        name: symbol.name.clone(),
                        tuple: t.clone(),
                        expected: symbol.arity,
                        got: t.len(),
                    });
                }
                if let Some(&e) = t.iter().find(|&&e| e >= domain_size) {
                    return Err(StructureError::ElementOutOfRange {
                        tuple: t.clone(),
                        element: e,
                        domain_size,
                    });
                }
            }
        }
        Ok(Structure {
            signature,
            domain_size,
            tables,
        })
    }

    /// A structure with no relations at all.
    pub fn empty_signature(domain_size: usize) -> Result<Structure, StructureError> {
        Structure::new(Signature::new::<String>(vec![])?, domain_size, vec![])
    }

    /// The complete antireflexive digraph on `n` vertices.
    pub fn clique(n: usize) -> Result<Structure, StructureError> {
        if n == 0 {
            return Err(StructureError::EmptyDomain);
        }
        let mut edges = RelationTable::new(2);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    edges.insert(vec![i, j])?;
                }
            }
        }
        Structure::new(Signature::digraph(), n, vec![edges])
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn domain_size(&self) -> usize {
        self.domain_size
    }

    pub fn tables(&self) -> &[RelationTable] {
        &self.tables
    }

    pub fn table(&self, rel: RelId) -> Option<&RelationTable> {
        self.tables.get(rel.0)
    }

    /// Same signature and domain; every table replaced by its set-theoretic
    /// complement within `domain^arity`. An involution.
    pub fn complement(&self) -> Structure {
        let tables = self
            .signature
            .relations()
            .iter()
            .zip(&self.tables)
            .map(|(symbol, table)| {
                let mut out = RelationTable::new(symbol.arity);
                for tuple in (0..symbol.arity)
                    .map(|_| 0..self.domain_size)
                    .multi_cartesian_product()
                {
                    if !table.contains(&tuple) {
                        out.insert(tuple).expect("arity preserved");
                    }
                }
                // Arity 0 cannot occur: signatures reject it.
                out
            })
            .collect();
        Structure {
            signature: self.signature.clone(),
            domain_size: self.domain_size,
            tables,
        }
    }

    /// The canonical relation: the product of all non-empty relations, with
    /// the equality relation `{(x, x)}` appended as a final binary block when
    /// `include_equality` is set.
    ///
    /// If every relation is empty (and equality is excluded) this returns the
    /// arity-0 sentinel.
    pub fn canonical_relation(&self, include_equality: bool) -> RelationTable {
        let mut blocks: Vec<Vec<Vec<Element>>> = self
            .tables
            .iter()
            .filter(|t| !t.is_empty())
            .map(|t| t.iter().cloned().collect())
            .collect();
        if include_equality {
            blocks.push((0..self.domain_size).map(|x| vec![x, x]).collect());
        }
        if blocks.is_empty() {
            return RelationTable::empty_sentinel();
        }
        let arity: usize = blocks.iter().map(|b| b[0].len()).sum();
        let mut out = RelationTable::new(arity);
        for combo in blocks.iter().multi_cartesian_product() {
            let tuple: Vec<Element> = combo.into_iter().flatten().copied().collect();
            out.insert(tuple).expect("arity is the sum of block arities");
        }
        out
    }

    /// Canonical relation rendered as a `relation CANON <arity>` block.
    pub fn canonical_relation_text(&self, include_equality: bool) -> String {
        let canon = self.canonical_relation(include_equality);
        format!("domain {}\n{}", self.domain_size, canon.to_text_block("CANON"))
    }

    /// Some homomorphism into `target`, found by plain backtracking over
    /// vertices in domain order, or `None` if there is none.
    pub fn find_homomorphism(
        &self,
        target: &Structure,
    ) -> Result<Option<Vec<Element>>, StructureError> {
        if self.signature != target.signature {
            return Err(StructureError::SignatureMismatch(
                "homomorphism requires identical signatures".to_string(),
            ));
        }
        let mut image: Vec<Option<Element>> = vec![None; self.domain_size];
        if self.search_hom(target, 0, &mut image) {
            let h: Vec<Element> = image.into_iter().map(|v| v.expect("assigned")).collect();
            debug_assert!(self.check_homomorphism(target, &h));
            Ok(Some(h))
        } else {
            Ok(None)
        }
    }

    fn search_hom(&self, target: &Structure, vertex: usize, image: &mut Vec<Option<Element>>) -> bool {
        if vertex == self.domain_size {
            return true;
        }
        for candidate in 0..target.domain_size {
            image[vertex] = Some(candidate);
            if self.hom_consistent(target, image) && self.search_hom(target, vertex + 1, image) {
                return true;
            }
        }
        image[vertex] = None;
        false
    }

    /// Every fully-assigned tuple must map into the target table.
    fn hom_consistent(&self, target: &Structure, image: &[Option<Element>]) -> bool {
        for (rel, table) in self.tables.iter().enumerate() {
            let target_table = &target.tables[rel];
            'tuples: for t in table.iter() {
                let mut mapped = Vec::with_capacity(t.len());
                for &e in t {
                    match image[e] {
                        Some(m) => mapped.push(m),
                        None => continue 'tuples,
                    }
                }
                if !target_table.contains(&mapped) {
                    return false;
                }
            }
        }
        true
    }

    /// Direct tuple-by-tuple re-check that `h` is a homomorphism.
    pub fn check_homomorphism(&self, target: &Structure, h: &[Element]) -> bool {
        if h.len() != self.domain_size || self.signature != target.signature {
            return false;
        }
        self.tables.iter().enumerate().all(|(rel, table)| {
            table.iter().all(|t| {
                let mapped: Vec<Element> = t.iter().map(|&e| h[e]).collect();
                target.tables[rel].contains(&mapped)
            })
        })
    }

    /// Homomorphisms exist in both directions.
    pub fn hom_equivalent(&self, other: &Structure) -> Result<bool, StructureError> {
        Ok(self.find_homomorphism(other)?.is_some() && other.find_homomorphism(self)?.is_some())
    }

    /// The substructure induced on `vertices` (given in increasing order),
    /// with elements renumbered to `0..vertices.len()`.
    pub fn induced(&self, vertices: &[Element]) -> Structure {
        let index_of = |e: Element| vertices.iter().position(|&v| v == e);
        let tables = self
            .tables
            .iter()
            .map(|table| {
                let mut out = RelationTable::new(table.arity());
                for t in table.iter() {
                    if let Some(mapped) = t
                        .iter()
                        .map(|&e| index_of(e))
                        .collect::<Option<Vec<Element>>>()
                    {
                        out.insert(mapped).expect("arity preserved");
                    }
                }
                out
            })
            .collect();
        Structure {
            signature: self.signature.clone(),
            domain_size: vertices.len(),
            tables,
        }
    }

    /// The core: the induced substructure on the lexicographically least
    /// vertex subset of minimum cardinality that the structure maps into.
    pub fn core(&self) -> Structure {
        self.core_with_vertices().1
    }

    /// Core plus the vertex subset that carries it.
    pub fn core_with_vertices(&self) -> (Vec<Element>, Structure) {
        for size in 1..=self.domain_size {
            for subset in (0..self.domain_size).combinations(size) {
                let candidate = self.induced(&subset);
                let hom = self
                    .find_homomorphism(&candidate)
                    .expect("induced substructure shares the signature");
                if hom.is_some() {
                    return (subset, candidate);
                }
            }
        }
        unreachable!("the identity map reaches the full vertex set")
    }

    /// Brute-force isomorphism test (permutation search; desk scale).
    pub fn is_isomorphic(&self, other: &Structure) -> bool {
        if self.signature != other.signature || self.domain_size != other.domain_size {
            return false;
        }
        (0..self.domain_size).permutations(self.domain_size).any(|perm| {
            self.tables.iter().enumerate().all(|(rel, table)| {
                if table.len() != other.tables[rel].len() {
                    return false;
                }
                table.iter().all(|t| {
                    let mapped: Vec<Element> = t.iter().map(|&e| perm[e]).collect();
                    other.tables[rel].contains(&mapped)
                })
            })
        })
    }

    /// Is this a digraph: exactly one relation, of arity 2?
    pub fn is_digraph(&self) -> bool {
        self.signature.len() == 1 && self.signature.relations()[0].arity == 2
    }

    pub fn edge_table(&self) -> Option<&RelationTable> {
        if self.is_digraph() {
            self.tables.first()
        } else {
            None
        }
    }

    fn symmetric_edge_table(&self) -> Result<&RelationTable, StructureError> {
        let edges = self.edge_table().ok_or(StructureError::NotADigraph)?;
        for t in edges.iter() {
            if !edges.contains(&[t[1], t[0]]) {
                return Err(StructureError::AsymmetricEdges(t.clone()));
            }
        }
        Ok(edges)
    }

    /// Is this a digraph with a symmetric edge relation?
    pub fn is_undirected_graph(&self) -> bool {
        self.symmetric_edge_table().is_ok()
    }

    pub fn has_self_loop(&self) -> Option<Element> {
        let edges = self.edge_table()?;
        (0..self.domain_size).find(|&x| edges.contains(&[x, x]))
    }

    /// For undirected graphs: no loops and no odd cycle, i.e. the core is
    /// `K_1` or `K_2`. Errors on non-digraphs and asymmetric edge tables.
    pub fn is_bipartite_graph(&self) -> Result<bool, StructureError> {
        let edges = self.symmetric_edge_table()?;
        if !edges.is_antireflexive() {
            return Ok(false);
        }
        // BFS 2-colouring, component by component.
        let mut colour: Vec<Option<bool>> = vec![None; self.domain_size];
        for start in 0..self.domain_size {
            if colour[start].is_some() {
                continue;
            }
            colour[start] = Some(false);
            let mut queue = std::collections::VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                let cu = colour[u].expect("queued vertices are coloured");
                for t in edges.iter() {
                    if t[0] != u {
                        continue;
                    }
                    let w = t[1];
                    match colour[w] {
                        Some(cw) if cw == cu => return Ok(false),
                        Some(_) => {}
                        None => {
                            colour[w] = Some(!cu);
                            queue.push_back(w);
                        }
                    }
                }
            }
        }
        Ok(true)
    }

    /// Digraph with each edge mirrored.
    pub fn symmetric_closure(&self) -> Result<Structure, StructureError> {
        let edges = self.edge_table().ok_or(StructureError::NotADigraph)?;
        let mut closed = RelationTable::new(2);
        for t in edges.iter() {
            closed.insert(t.clone()).expect("binary");
            closed.insert(vec![t[1], t[0]]).expect("binary");
        }
        Structure::new(self.signature.clone(), self.domain_size, vec![closed])
    }

    /// Parse the structure text format:
    ///
    /// ```text
    /// domain <n>
    /// relation <name> <arity>
    /// <one tuple per line, space-separated element indices>
    /// <blank line ends the block>
    /// ```
    ///
    /// `#` starts a comment that runs to the end of the line.
    pub fn parse_text(text: &str) -> Result<Structure, StructureError> {
        let err = |line: usize, msg: String| StructureError::Parse { line, msg };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty() || true);

        // First meaningful line: domain <n>.
        let mut domain_size = None;
        let mut rest = Vec::new();
        for (no, line) in lines.by_ref() {
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            match (parts.next(), parts.next(), parts.next()) {
                (Some("domain"), Some(n), None) => {
                    let n: usize = n
                        .parse()
                        .map_err(|_| err(no, format!("invalid domain size `{n}`")))?;
                    if n == 0 {
                        return Err(StructureError::EmptyDomain);
                    }
                    domain_size = Some(n);
                }
                _ => return Err(err(no, "expected `domain <n>`".to_string())),
            }
            break;
        }
        let domain_size = domain_size.ok_or(err(0, "missing `domain <n>` line".to_string()))?;
        rest.extend(lines);

        let mut names: Vec<(String, usize)> = Vec::new();
        let mut tables: Vec<RelationTable> = Vec::new();
        let mut current: Option<usize> = None;
        for (no, line) in rest {
            if line.is_empty() {
                current = None;
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts[0] == "relation" {
                if parts.len() != 3 {
                    return Err(err(no, "expected `relation <name> <arity>`".to_string()));
                }
                let name = parts[1].to_string();
                let arity: usize = parts[2]
                    .parse()
                    .map_err(|_| err(no, format!("invalid arity `{}`", parts[2])))?;
                if arity == 0 {
                    return Err(StructureError::ZeroArity(name));
                }
                if names.iter().any(|(n, _)| *n == name) {
                    return Err(StructureError::DuplicateRelation(name));
                }
                names.push((name, arity));
                tables.push(RelationTable::new(arity));
                current = Some(tables.len() - 1);
            } else {
                let idx = current
                    .ok_or_else(|| err(no, "tuple outside a relation block".to_string()))?;
                let tuple: Vec<Element> = parts
                    .iter()
                    .map(|p| {
                        p.parse()
                            .map_err(|_| err(no, format!("invalid element `{p}`")))
                    })
                    .collect::<Result<_, _>>()?;
                if tuple.len() != tables[idx].arity() {
                    return Err(err(
                        no,
                        format!(
                            "tuple has {} components, relation `{}` has arity {}",
                            tuple.len(),
                            names[idx].0,
                            names[idx].1
                        ),
                    ));
                }
                if let Some(&e) = tuple.iter().find(|&&e| e >= domain_size) {
                    return Err(err(
                        no,
                        format!("element {e} out of range for domain {domain_size}"),
                    ));
                }
                tables[idx].insert(tuple).expect("arity checked");
            }
        }
        Structure::new(Signature::new(names)?, domain_size, tables)
    }

    /// Deterministic text rendering; `parse_text` round-trips it.
    pub fn to_text(&self) -> String {
        let mut out = format!("domain {}\n", self.domain_size);
        for (symbol, table) in self.signature.relations().iter().zip(&self.tables) {
            out.push('\n');
            out.push_str(&table.to_text_block(&symbol.name));
        }
        out
    }

    /// Short content digest of the canonical text rendering.
    pub fn digest(&self) -> String {
        let hash = Sha256::digest(self.to_text().as_bytes());
        hash.iter().take(6).map(|b| format!("{b:02x}")).collect()
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn digraph(n: usize, edges: &[(usize, usize)]) -> Structure {
        let table =
            RelationTable::from_tuples(2, edges.iter().map(|&(a, b)| vec![a, b])).unwrap();
        Structure::new(Signature::digraph(), n, vec![table]).unwrap()
    }

    #[test]
    fn clique_shapes() {
        let k1 = Structure::clique(1).unwrap();
        assert_eq!(k1.edge_table().unwrap().len(), 0);
        let k2 = Structure::clique(2).unwrap();
        assert_eq!(
            k2.edge_table().unwrap().iter().cloned().collect::<Vec<_>>(),
            vec![vec![0, 1], vec![1, 0]]
        );
        let k3 = Structure::clique(3).unwrap();
        assert_eq!(k3.edge_table().unwrap().len(), 6);
    }

    #[test]
    fn complement_of_k2_is_the_loops() {
        let k2 = Structure::clique(2).unwrap();
        let c = k2.complement();
        let expected = digraph(2, &[(0, 0), (1, 1)]);
        assert_eq!(c, expected);
        assert_eq!(c.complement(), k2);
    }

    #[test]
    fn complement_of_empty_binary_relation_is_full() {
        let e = digraph(2, &[]);
        assert_eq!(e.complement().edge_table().unwrap().len(), 4);
    }

    #[test]
    fn complement_of_k3_is_the_diagonal() {
        let k3 = Structure::clique(3).unwrap();
        let c = k3.complement();
        let expected = digraph(3, &[(0, 0), (1, 1), (2, 2)]);
        assert_eq!(c, expected);
    }

    #[test]
    fn canonical_relation_products_nonempty_relations() {
        let sig = Signature::new(vec![("R1", 1), ("R2", 2)]).unwrap();
        let t1 = RelationTable::from_tuples(1, vec![vec![0]]).unwrap();
        let t2 = RelationTable::from_tuples(2, vec![vec![0, 1]]).unwrap();
        let s = Structure::new(sig, 2, vec![t1, t2]).unwrap();
        let canon = s.canonical_relation(false);
        assert_eq!(canon.arity(), 3);
        assert!(canon.contains(&[0, 0, 1]));
        assert_eq!(canon.len(), 1);
    }

    #[test]
    fn canonical_relation_of_all_empty_is_the_sentinel() {
        let s = digraph(2, &[]);
        let canon = s.canonical_relation(false);
        assert!(canon.is_sentinel());
        assert!(canon.is_x_valid(0).is_err());
    }

    #[test]
    fn canonical_relation_drops_empty_relations() {
        let sig = Signature::new(vec![("R1", 1), ("R2", 2)]).unwrap();
        let t1 = RelationTable::new(1);
        let t2 = RelationTable::from_tuples(2, vec![vec![0, 1]]).unwrap();
        let s = Structure::new(sig, 2, vec![t1, t2]).unwrap();
        let canon = s.canonical_relation(false);
        assert_eq!(canon.arity(), 2);
        assert!(canon.contains(&[0, 1]));
        assert_eq!(canon.len(), 1);
    }

    #[test]
    fn equality_block_is_appended_last() {
        let k2 = Structure::clique(2).unwrap();
        let canon = k2.canonical_relation(true);
        assert_eq!(canon.arity(), 4);
        // E x equality: (0,1,0,0), (0,1,1,1), (1,0,0,0), (1,0,1,1)
        assert_eq!(canon.len(), 4);
        assert!(canon.contains(&[0, 1, 1, 1]));
        assert!(!canon.contains(&[0, 0, 0, 0]));
    }

    #[test]
    fn canonical_tuple_count_is_the_product_of_block_counts() {
        let sig = Signature::new(vec![("P", 1), ("E", 2)]).unwrap();
        let p = RelationTable::from_tuples(1, vec![vec![0], vec![2]]).unwrap();
        let e = RelationTable::from_tuples(2, vec![vec![0, 1], vec![1, 2], vec![2, 0]]).unwrap();
        let s = Structure::new(sig, 3, vec![p, e]).unwrap();
        assert_eq!(s.canonical_relation(false).len(), 2 * 3);
        assert_eq!(s.canonical_relation(true).len(), 2 * 3 * 3);
    }

    #[test]
    fn x_validity_scans_constant_tuples() {
        let k2 = Structure::clique(2).unwrap();
        assert_eq!(k2.edge_table().unwrap().is_x_valid(0), Ok(false));
        let t = RelationTable::from_tuples(2, vec![vec![1, 1]]).unwrap();
        assert_eq!(t.is_x_valid(1), Ok(true));
        let t3 =
            RelationTable::from_tuples(3, vec![vec![0, 0, 1], vec![2, 2, 2]]).unwrap();
        assert_eq!(
            t3.all_valid_witnesses(3).unwrap().into_iter().collect::<Vec<_>>(),
            vec![2]
        );
    }

    #[test]
    fn antireflexivity_matches_no_witness_on_binary_tables() {
        let k3 = Structure::clique(3).unwrap();
        assert!(k3.edge_table().unwrap().is_antireflexive());
        let t = RelationTable::from_tuples(3, vec![vec![0, 1, 0]]).unwrap();
        assert!(!t.is_antireflexive());
        let mixed =
            RelationTable::from_tuples(2, vec![vec![0, 1], vec![1, 0], vec![1, 1]]).unwrap();
        assert!(!mixed.is_antireflexive());
        assert!(mixed.all_valid_witnesses(2).unwrap().contains(&1));
    }

    #[test]
    fn homomorphism_search_finds_and_refuses() {
        let k2 = Structure::clique(2).unwrap();
        let k3 = Structure::clique(3).unwrap();
        let h = k2.find_homomorphism(&k3).unwrap().unwrap();
        assert!(k2.check_homomorphism(&k3, &h));
        assert!(k3.find_homomorphism(&k2).unwrap().is_none());
        let id = k3.find_homomorphism(&k3).unwrap().unwrap();
        assert!(k3.check_homomorphism(&k3, &id));
    }

    #[test]
    fn homomorphism_requires_matching_signatures() {
        let k2 = Structure::clique(2).unwrap();
        let sig = Signature::new(vec![("F", 2)]).unwrap();
        let other = Structure::new(sig, 2, vec![RelationTable::new(2)]).unwrap();
        assert!(matches!(
            k2.find_homomorphism(&other),
            Err(StructureError::SignatureMismatch(_))
        ));
    }

    #[test]
    fn core_of_path_is_k2() {
        let path = digraph(3, &[(0, 1), (1, 0), (1, 2), (2, 1)]);
        let core = path.core();
        assert!(core.is_isomorphic(&Structure::clique(2).unwrap()));
    }

    #[test]
    fn cliques_and_loops_are_their_own_cores() {
        let k3 = Structure::clique(3).unwrap();
        assert!(k3.core().is_isomorphic(&k3));
        let loop1 = digraph(1, &[(0, 0)]);
        assert_eq!(loop1.core(), loop1);
    }

    #[test]
    fn core_is_idempotent_and_hom_equivalent() {
        for s in [
            digraph(3, &[(0, 1), (1, 0), (1, 2), (2, 1)]),
            digraph(3, &[]),
            digraph(4, &[(0, 1), (1, 0), (2, 3), (3, 2)]),
        ] {
            let core = s.core();
            assert!(core.core().is_isomorphic(&core));
            assert!(s.hom_equivalent(&core).unwrap());
        }
    }

    #[test]
    fn hom_equivalence_examples() {
        let k2 = Structure::clique(2).unwrap();
        let k3 = Structure::clique(3).unwrap();
        let path = digraph(3, &[(0, 1), (1, 0), (1, 2), (2, 1)]);
        assert!(k2.hom_equivalent(&path).unwrap());
        assert!(!k2.hom_equivalent(&k3).unwrap());
        assert!(k3.hom_equivalent(&k3).unwrap());
    }

    #[test]
    fn hom_equivalence_agrees_with_core_isomorphism_on_small_digraphs() {
        // All undirected graphs on up to 3 vertices, against each other.
        let mut graphs = Vec::new();
        for n in 1..=3usize {
            let pairs: Vec<(usize, usize)> = (0..n)
                .flat_map(|i| (i..n).map(move |j| (i, j)))
                .collect();
            for mask in 0..(1u32 << pairs.len()) {
                let mut edges = Vec::new();
                for (bit, &(i, j)) in pairs.iter().enumerate() {
                    if mask & (1 << bit) != 0 {
                        edges.push((i, j));
                        if i != j {
                            edges.push((j, i));
                        }
                    }
                }
                graphs.push(digraph(n, &edges));
            }
        }
        for a in &graphs {
            for b in &graphs {
                let he = a.hom_equivalent(b).unwrap();
                let cores = a.core().is_isomorphic(&b.core());
                assert_eq!(he, cores, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn bipartiteness_matches_the_core_characterisation() {
        let k1 = Structure::clique(1).unwrap();
        let k2 = Structure::clique(2).unwrap();
        let k3 = Structure::clique(3).unwrap();
        let edgeless3 = digraph(3, &[]);
        let loop1 = digraph(1, &[(0, 0)]);
        for (s, expected) in [
            (&k2, true),
            (&k3, false),
            (&edgeless3, true),
            (&loop1, false),
        ] {
            assert_eq!(s.is_bipartite_graph().unwrap(), expected, "{s}");
            let core = s.core();
            let core_is_k1_or_k2 = core.is_isomorphic(&k1) || core.is_isomorphic(&k2);
            assert_eq!(core_is_k1_or_k2, expected, "core characterisation: {s}");
        }
    }

    #[test]
    fn bipartiteness_rejects_directed_input() {
        let directed = digraph(2, &[(0, 1)]);
        assert!(matches!(
            directed.is_bipartite_graph(),
            Err(StructureError::AsymmetricEdges(_))
        ));
        let unary = Structure::new(
            Signature::new(vec![("P", 1)]).unwrap(),
            2,
            vec![RelationTable::new(1)],
        )
        .unwrap();
        assert!(matches!(
            unary.is_bipartite_graph(),
            Err(StructureError::NotADigraph)
        ));
    }

    #[test]
    fn text_format_round_trips() {
        let k3 = Structure::clique(3).unwrap();
        let text = k3.to_text();
        let parsed = Structure::parse_text(&text).unwrap();
        assert_eq!(parsed, k3);

        let commented = "# a clique\ndomain 2\n\nrelation E 2\n0 1 # forward\n1 0\n";
        let parsed = Structure::parse_text(commented).unwrap();
        assert_eq!(parsed, Structure::clique(2).unwrap());
    }

    #[test]
    fn text_format_rejects_malformed_input() {
        assert!(Structure::parse_text("domain 0").is_err());
        assert!(Structure::parse_text("relation E 2").is_err());
        assert!(Structure::parse_text("domain 2\nrelation E 2\n0 1 2\n").is_err());
        assert!(Structure::parse_text("domain 2\nrelation E 2\n0 5\n").is_err());
        assert!(Structure::parse_text("domain 2\n0 1\n").is_err());
        assert!(Structure::parse_text("domain 2\nrelation E 2\nrelation E 2\n").is_err());
        assert!(Structure::parse_text("domain 2\nrelation v1 2\n").is_err());
    }

    #[test]
    fn complement_is_an_involution_on_small_structures() {
        let sig = Signature::new(vec![("P", 1), ("E", 2)]).unwrap();
        for n in 1..=3usize {
            // Sample a spread of table contents rather than all of them.
            for seed in 0..16usize {
                let mut p = RelationTable::new(1);
                let mut e = RelationTable::new(2);
                for x in 0..n {
                    if (seed >> (x % 4)) & 1 == 1 {
                        p.insert(vec![x]).unwrap();
                    }
                    for y in 0..n {
                        if (seed.wrapping_mul(31) >> ((x * n + y) % 8)) & 1 == 1 {
                            e.insert(vec![x, y]).unwrap();
                        }
                    }
                }
                let s = Structure::new(sig.clone(), n, vec![p, e]).unwrap();
                assert_eq!(s.complement().complement(), s);
            }
        }
    }

    #[test]
    fn symmetric_closure_mirrors_edges() {
        let directed = digraph(3, &[(0, 1), (1, 2)]);
        let closed = directed.symmetric_closure().unwrap();
        let expected = digraph(3, &[(0, 1), (1, 0), (1, 2), (2, 1)]);
        assert_eq!(closed, expected);
    }

    #[test]
    fn digest_is_stable_under_reparse() {
        let k3 = Structure::clique(3).unwrap();
        let reparsed = Structure::parse_text(&k3.to_text()).unwrap();
        assert_eq!(k3.digest(), reparsed.digest());
        assert_ne!(k3.digest(), Structure::clique(2).unwrap().digest());
    }
}
