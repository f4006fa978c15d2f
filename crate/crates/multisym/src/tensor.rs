//! The n-fold tensor power of a table algebra with its symmetric-group
//! action: sparse tensors over the tuple basis, elementary and typed
//! symmetric tensors, orbit-sum bases of invariants, rewriting invariants as
//! polynomials in the elementary symmetric tensors, and the structural maps
//! splitting a big symmetric power into smaller or nested ones.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::sync::Arc;

use num_bigint::BigInt;
use serde_json::{json, Value as Json};

use crate::algebra::{AlgElement, AlgebraMap, MultTableAlgebra};
use crate::error::{Error, Result};
use crate::perm::Permutation;
use crate::ring::{factorial, BaseRing, Scalar};

/// An n-type: a tuple of non-negative multiplicities with total weight at
/// most n.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TypeVector {
    n: usize,
    entries: Vec<u32>,
}

impl TypeVector {
    pub fn new(n: usize, entries: Vec<u32>) -> Result<TypeVector> {
        let weight: u32 = entries.iter().sum();
        if weight as usize > n {
            return Err(Error::WeightExceedsDegree { weight, degree: n });
        }
        Ok(TypeVector { n, entries })
    }

    pub fn weight(&self) -> u32 {
        self.entries.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn degree(&self) -> usize {
        self.n
    }
}

/// Sparse element of `(B|A)^{(x) n}` over the tuple basis of the algebra's
/// module basis.
#[derive(Clone, PartialEq, Eq)]
pub struct TensorElement {
    alg: Arc<MultTableAlgebra>,
    n: usize,
    terms: BTreeMap<Vec<u16>, Scalar>,
}

impl std::fmt::Debug for TensorElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let labels = self.alg.labels();
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(t, c)| {
                let factors: Vec<&str> =
                    t.iter().map(|&i| labels[i as usize].as_str()).collect();
                format!("({c})*{}", factors.join("(x)"))
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl TensorElement {
    pub fn zero(alg: &Arc<MultTableAlgebra>, n: usize) -> TensorElement {
        TensorElement { alg: alg.clone(), n, terms: BTreeMap::new() }
    }

    /// `1 (x) ... (x) 1`, the multiplicative unit.
    pub fn one(alg: &Arc<MultTableAlgebra>, n: usize) -> TensorElement {
        let ones: Vec<AlgElement> = (0..n).map(|_| alg.one()).collect();
        TensorElement::pure(alg, &ones).expect("unit tensor")
    }

    /// Pure tensor of the given elements, expanded into tuple coordinates.
    pub fn pure(alg: &Arc<MultTableAlgebra>, elems: &[AlgElement]) -> Result<TensorElement> {
        for e in elems {
            if e.algebra() != alg {
                return Err(Error::AlgebraMismatch);
            }
        }
        let mut acc: Vec<(Vec<u16>, Scalar)> = vec![(Vec::new(), alg.base().one())];
        for e in elems {
            let mut next = Vec::with_capacity(acc.len() * 2);
            for (prefix, c) in &acc {
                for (i, ci) in e.coords().iter().enumerate() {
                    if ci.is_zero() {
                        continue;
                    }
                    let mut t = prefix.clone();
                    t.push(i as u16);
                    next.push((t, c.mul(ci)));
                }
            }
            acc = next;
        }
        let mut terms = BTreeMap::new();
        for (t, c) in acc {
            insert_term(&mut terms, t, c);
        }
        Ok(TensorElement { alg: alg.clone(), n: elems.len(), terms })
    }

    pub fn from_terms(
        alg: &Arc<MultTableAlgebra>,
        n: usize,
        raw: Vec<(Vec<u16>, Scalar)>,
    ) -> Result<TensorElement> {
        let mut terms = BTreeMap::new();
        for (t, c) in raw {
            if t.len() != n {
                return Err(Error::ShapeMismatch("tuple length".into()));
            }
            if t.iter().any(|&i| i as usize >= alg.rank()) {
                return Err(Error::IndexOutOfRange { got: t.iter().max().map(|&i| i as usize).unwrap_or(0), max: alg.rank() - 1 });
            }
            if c.ring() != alg.base() {
                return Err(Error::RingMismatch {
                    expected: alg.base().to_string(),
                    got: c.ring().to_string(),
                });
            }
            insert_term(&mut terms, t, c);
        }
        Ok(TensorElement { alg: alg.clone(), n, terms })
    }

    pub fn algebra(&self) -> &Arc<MultTableAlgebra> {
        &self.alg
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u16>, Scalar> {
        &self.terms
    }

    pub fn coefficient(&self, tuple: &[u16]) -> Scalar {
        self.terms.get(tuple).cloned().unwrap_or_else(|| self.alg.base().zero())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn compatible(&self, other: &TensorElement) -> Result<()> {
        if self.alg != other.alg || self.n != other.n {
            return Err(Error::ShapeMismatch("tensor degree or algebra".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &TensorElement) -> Result<TensorElement> {
        self.compatible(other)?;
        let mut terms = self.terms.clone();
        for (t, c) in &other.terms {
            insert_term(&mut terms, t.clone(), c.clone());
        }
        Ok(TensorElement { alg: self.alg.clone(), n: self.n, terms })
    }

    pub fn sub(&self, other: &TensorElement) -> Result<TensorElement> {
        self.add(&other.scale(&self.alg.base().from_i64(-1)))
    }

    pub fn scale(&self, s: &Scalar) -> TensorElement {
        if s.is_zero() {
            return TensorElement::zero(&self.alg, self.n);
        }
        TensorElement {
            alg: self.alg.clone(),
            n: self.n,
            terms: self.terms.iter().map(|(t, c)| (t.clone(), c.mul(s))).collect(),
        }
    }

    /// Slot-wise product extended bilinearly.
    pub fn mul(&self, other: &TensorElement) -> Result<TensorElement> {
        self.compatible(other)?;
        let mut terms: BTreeMap<Vec<u16>, Scalar> = BTreeMap::new();
        for (t1, c1) in &self.terms {
            for (t2, c2) in &other.terms {
                // expand prod_s e_{t1[s]} e_{t2[s]}
                let mut acc: Vec<(Vec<u16>, Scalar)> =
                    vec![(Vec::with_capacity(self.n), c1.mul(c2))];
                for s in 0..self.n {
                    let prod = self.alg.product_coords(t1[s] as usize, t2[s] as usize);
                    let mut next = Vec::with_capacity(acc.len());
                    for (prefix, c) in &acc {
                        for (k, ck) in prod.iter().enumerate() {
                            if ck.is_zero() {
                                continue;
                            }
                            let mut t = prefix.clone();
                            t.push(k as u16);
                            next.push((t, c.mul(ck)));
                        }
                    }
                    acc = next;
                    if acc.is_empty() {
                        break;
                    }
                }
                for (t, c) in acc {
                    insert_term(&mut terms, t, c);
                }
            }
        }
        Ok(TensorElement { alg: self.alg.clone(), n: self.n, terms })
    }

    pub fn pow(&self, e: u32) -> Result<TensorElement> {
        let mut acc = TensorElement::one(&self.alg, self.n);
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Slot relabelling: the permuted tensor has the value of slot `s` moved
    /// to slot `sigma(s)`.
    pub fn permute(&self, sigma: &Permutation) -> Result<TensorElement> {
        if sigma.n() != self.n {
            return Err(Error::ShapeMismatch("permutation degree".into()));
        }
        let mut terms = BTreeMap::new();
        for (t, c) in &self.terms {
            let mut moved = vec![0u16; self.n];
            for (s, &v) in t.iter().enumerate() {
                moved[sigma.apply(s)] = v;
            }
            insert_term(&mut terms, moved, c.clone());
        }
        Ok(TensorElement { alg: self.alg.clone(), n: self.n, terms })
    }

    pub fn is_invariant(&self, generators: &[Permutation]) -> Result<bool> {
        for g in generators {
            if self.permute(g)? != *self {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Applies an algebra map slotwise, giving `f^{(x) n}`.
    pub fn map_slots(&self, f: &AlgebraMap) -> Result<TensorElement> {
        if f.source() != &self.alg {
            return Err(Error::AlgebraMismatch);
        }
        let target = f.target().clone();
        let mut out = TensorElement::zero(&target, self.n);
        for (t, c) in &self.terms {
            let elems: Vec<AlgElement> = t
                .iter()
                .map(|&i| f.apply(&self.alg.basis_element(i as usize)))
                .collect::<Result<Vec<_>>>()?;
            out = out.add(&TensorElement::pure(&target, &elems)?.scale(c))?;
        }
        Ok(out)
    }

    /// Coefficient vector over the orbit-sum basis of the S_n-invariants.
    /// Fails if the tensor is not S_n-invariant.
    pub fn orbit_coordinates(&self) -> Result<BTreeMap<Vec<u16>, Scalar>> {
        if !self.is_invariant(&Permutation::symmetric_group_generators(self.n))? {
            return Err(Error::NotInvariant);
        }
        let mut out = BTreeMap::new();
        for (t, c) in &self.terms {
            let mut key = t.clone();
            key.sort_unstable();
            if key == *t {
                out.insert(key, c.clone());
            }
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Json {
        json!({
            "algebra_ref": self.alg.to_json(),
            "n": self.n,
            "terms": self
                .terms
                .iter()
                .map(|(t, c)| json!({"tuple": t, "coeff": c.to_json()}))
                .collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Json) -> Result<TensorElement> {
        let alg = MultTableAlgebra::from_json(
            v.get("algebra_ref")
                .ok_or_else(|| Error::Json("tensor needs `algebra_ref`".into()))?,
        )?;
        let n = v
            .get("n")
            .and_then(|x| x.as_u64())
            .ok_or_else(|| Error::Json("tensor needs `n`".into()))? as usize;
        if n > 16 {
            return Err(Error::ResourceCap(format!("tensor degree {n} exceeds 16")));
        }
        let mut raw = Vec::new();
        for item in v
            .get("terms")
            .and_then(|x| x.as_array())
            .ok_or_else(|| Error::Json("tensor needs `terms`".into()))?
        {
            let tuple = item
                .get("tuple")
                .and_then(|x| x.as_array())
                .ok_or_else(|| Error::Json("term needs `tuple`".into()))?
                .iter()
                .map(|x| {
                    x.as_u64()
                        .and_then(|i| u16::try_from(i).ok())
                        .ok_or_else(|| Error::Json("bad tuple entry".into()))
                })
                .collect::<Result<Vec<u16>>>()?;
            let coeff = Scalar::from_json(
                alg.base(),
                item.get("coeff").ok_or_else(|| Error::Json("term needs `coeff`".into()))?,
            )?;
            raw.push((tuple, coeff));
        }
        TensorElement::from_terms(&alg, n, raw)
    }
}

fn insert_term(terms: &mut BTreeMap<Vec<u16>, Scalar>, t: Vec<u16>, c: Scalar) {
    use std::collections::btree_map::Entry;
    match terms.entry(t) {
        Entry::Vacant(e) => {
            if !c.is_zero() {
                e.insert(c);
            }
        }
        Entry::Occupied(mut e) => {
            let sum = e.get().add(&c);
            if sum.is_zero() {
                e.remove();
            } else {
                *e.get_mut() = sum;
            }
        }
    }
}

/// A tensor together with the subgroup (given by generators) it is invariant
/// under; invariance is verified at construction.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SymTensor {
    elem: TensorElement,
    generators: Vec<Permutation>,
}

impl SymTensor {
    pub fn new(elem: TensorElement, generators: Vec<Permutation>) -> Result<SymTensor> {
        if !elem.is_invariant(&generators)? {
            return Err(Error::NotInvariant);
        }
        Ok(SymTensor { elem, generators })
    }

    /// Full `S_n`-invariance.
    pub fn symmetric(elem: TensorElement) -> Result<SymTensor> {
        let gens = Permutation::symmetric_group_generators(elem.degree());
        SymTensor::new(elem, gens)
    }

    pub fn tensor(&self) -> &TensorElement {
        &self.elem
    }

    pub fn into_tensor(self) -> TensorElement {
        self.elem
    }

    pub fn degree(&self) -> usize {
        self.elem.degree()
    }

    pub fn algebra(&self) -> &Arc<MultTableAlgebra> {
        self.elem.algebra()
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.generators
    }
}

/// `iota_k(b)`: the pure tensor with `b` at slot `k` (1-based) and 1
/// elsewhere.
pub fn conjugate(b: &AlgElement, k: usize, n: usize) -> Result<TensorElement> {
    if k == 0 || k > n {
        return Err(Error::IndexOutOfRange { got: k, max: n });
    }
    let alg = b.algebra().clone();
    let elems: Vec<AlgElement> = (1..=n)
        .map(|s| if s == k { b.clone() } else { alg.one() })
        .collect();
    TensorElement::pure(&alg, &elems)
}

/// `rho_k(b)`: the k-th elementary symmetric n-tensor, the sum over all
/// k-subsets of slots of the pure tensor with `b` on the subset and 1
/// elsewhere.
pub fn elem_sym(b: &AlgElement, k: usize, n: usize) -> Result<SymTensor> {
    if k > n {
        return Err(Error::IndexOutOfRange { got: k, max: n });
    }
    let alg = b.algebra().clone();
    let mut acc = TensorElement::zero(&alg, n);
    let mut subset: Vec<usize> = (0..k).collect();
    loop {
        let elems: Vec<AlgElement> = (0..n)
            .map(|s| if subset.contains(&s) { b.clone() } else { alg.one() })
            .collect();
        acc = acc.add(&TensorElement::pure(&alg, &elems)?)?;
        // next k-subset of [n]
        if k == 0 {
            break;
        }
        let mut i = k;
        loop {
            if i == 0 {
                return SymTensor::symmetric(acc);
            }
            i -= 1;
            if subset[i] != i + n - k {
                break;
            }
        }
        subset[i] += 1;
        for j in i + 1..k {
            subset[j] = subset[j - 1] + 1;
        }
    }
    SymTensor::symmetric(acc)
}

/// `rho_a(b_1, ..., b_r)`: the sum over all functions `[n] -> {0..r}` with
/// fibre sizes given by the type, of the pure tensors with `b_{f(s)}` at
/// slot `s` (`b_0 = 1`).
pub fn typed_sym(a: &TypeVector, bs: &[AlgElement]) -> Result<SymTensor> {
    if bs.len() != a.len() {
        return Err(Error::ShapeMismatch(format!(
            "type length {} != element count {}",
            a.len(),
            bs.len()
        )));
    }
    let n = a.degree();
    let alg = match bs.first() {
        Some(b) => b.algebra().clone(),
        None => return Err(Error::ShapeMismatch("empty type needs an algebra; use TensorElement::one".into())),
    };
    for b in bs {
        if b.algebra() != &alg {
            return Err(Error::AlgebraMismatch);
        }
    }
    // multiset of entry indices: a.entries[i] copies of i+1, rest 0
    let mut pattern: Vec<usize> = Vec::with_capacity(n);
    for (i, &cnt) in a.entries().iter().enumerate() {
        pattern.extend(std::iter::repeat(i + 1).take(cnt as usize));
    }
    pattern.resize(n, 0);
    pattern.sort_unstable();
    let mut acc = TensorElement::zero(&alg, n);
    // iterate over distinct permutations of the pattern
    loop {
        let elems: Vec<AlgElement> = pattern
            .iter()
            .map(|&i| if i == 0 { alg.one() } else { bs[i - 1].clone() })
            .collect();
        acc = acc.add(&TensorElement::pure(&alg, &elems)?)?;
        if !next_permutation(&mut pattern) {
            break;
        }
    }
    SymTensor::symmetric(acc)
}

fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Orbit of a tuple under the subgroup generated by `gens`, as a sorted set.
fn tuple_orbit(tuple: &[u16], gens: &[Permutation]) -> Vec<Vec<u16>> {
    let mut seen: HashSet<Vec<u16>> = HashSet::new();
    let mut queue: VecDeque<Vec<u16>> = VecDeque::new();
    seen.insert(tuple.to_vec());
    queue.push_back(tuple.to_vec());
    while let Some(t) = queue.pop_front() {
        for g in gens {
            let mut moved = vec![0u16; t.len()];
            for (s, &v) in t.iter().enumerate() {
                moved[g.apply(s)] = v;
            }
            if seen.insert(moved.clone()) {
                queue.push_back(moved);
            }
        }
    }
    let mut orbit: Vec<Vec<u16>> = seen.into_iter().collect();
    orbit.sort();
    orbit
}

/// Orbit sums of the tuple basis under the subgroup generated by `gens`: a
/// free basis of the invariants.  For the full symmetric group these are the
/// typed symmetric tensors of full weight, one per multiset.
pub fn invariant_basis(
    alg: &Arc<MultTableAlgebra>,
    n: usize,
    gens: &[Permutation],
) -> Result<Vec<SymTensor>> {
    let rank = alg.rank();
    let total = (rank as u64).checked_pow(n as u32).ok_or_else(|| {
        Error::ResourceCap("tuple space too large".into())
    })?;
    if total > 1_000_000 {
        return Err(Error::ResourceCap(format!("{total} tuples")));
    }
    let mut seen: HashSet<Vec<u16>> = HashSet::new();
    let mut out = Vec::new();
    let mut tuple = vec![0u16; n];
    loop {
        if !seen.contains(&tuple) {
            let orbit = tuple_orbit(&tuple, gens);
            for t in &orbit {
                seen.insert(t.clone());
            }
            let one = alg.base().one();
            let elem = TensorElement::from_terms(
                alg,
                n,
                orbit.into_iter().map(|t| (t, one.clone())).collect(),
            )?;
            out.push(SymTensor::new(elem, gens.to_vec())?);
        }
        // next tuple in lexicographic order
        let mut i = n;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            if (tuple[i] as usize) + 1 < rank {
                tuple[i] += 1;
                for t in tuple.iter_mut().skip(i + 1) {
                    *t = 0;
                }
                break;
            }
        }
    }
}

/// All multisets of size `n` over `0..rank`, as sorted tuples: the canonical
/// index set of the S_n orbit basis.
pub fn multisets(rank: usize, n: usize) -> Vec<Vec<u16>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, left: usize, rank: usize, cur: &mut Vec<u16>, out: &mut Vec<Vec<u16>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for i in start..rank {
            cur.push(i as u16);
            rec(i, left - 1, rank, cur, out);
            cur.pop();
        }
    }
    rec(0, n, rank, &mut cur, &mut out);
    out
}

/// The orbit sum of a multiset key, with coefficient 1 on each distinct
/// arrangement.
pub fn orbit_sum(alg: &Arc<MultTableAlgebra>, key: &[u16]) -> Result<TensorElement> {
    let mut tuple = key.to_vec();
    tuple.sort_unstable();
    let one = alg.base().one();
    let mut raw = Vec::new();
    let mut v: Vec<usize> = tuple.iter().map(|&x| x as usize).collect();
    loop {
        raw.push((v.iter().map(|&x| x as u16).collect(), one.clone()));
        if !next_permutation(&mut v) {
            break;
        }
    }
    TensorElement::from_terms(alg, key.len(), raw)
}

/// `S_n(B|A)` itself as a table algebra over `A`: basis indexed by the
/// multisets of size `n`, structure constants read off from products of
/// orbit sums.  Intended for small ranks and degrees.
pub fn invariants_algebra(
    alg: &Arc<MultTableAlgebra>,
    n: usize,
) -> Result<(Arc<MultTableAlgebra>, Vec<Vec<u16>>)> {
    let keys = multisets(alg.rank(), n);
    let rank = keys.len();
    if rank > 128 {
        return Err(Error::ResourceCap(format!("invariants rank {rank}")));
    }
    let index: HashMap<&Vec<u16>, usize> =
        keys.iter().enumerate().map(|(i, k)| (k, i)).collect();
    let labels: Vec<String> = keys
        .iter()
        .map(|k| {
            let names: Vec<&str> =
                k.iter().map(|&i| alg.labels()[i as usize].as_str()).collect();
            format!("[{}]", names.join(","))
        })
        .collect();
    let zero = alg.base().zero();
    let mut table = vec![zero.clone(); rank * rank * rank];
    let sums: Vec<TensorElement> =
        keys.iter().map(|k| orbit_sum(alg, k)).collect::<Result<Vec<_>>>()?;
    for i in 0..rank {
        for j in 0..=i {
            let prod = sums[i].mul(&sums[j])?;
            let coords = prod.orbit_coordinates()?;
            for (key, c) in coords {
                let k = index[&key];
                table[(i * rank + j) * rank + k] = c.clone();
                table[(j * rank + i) * rank + k] = c;
            }
        }
    }
    let unit_tensor = TensorElement::one(alg, n);
    let mut unit = vec![zero; rank];
    for (key, c) in unit_tensor.orbit_coordinates()? {
        unit[index[&key]] = c;
    }
    let algebra = MultTableAlgebra::new(alg.base().clone(), rank, labels, table, unit)?;
    Ok((algebra, keys))
}

// ---------------------------------------------------------------------------
// Rewriting invariants in the elementary symmetric tensors.
// ---------------------------------------------------------------------------

/// A polynomial in the formal symbols `r{k}[label]` standing for the k-th
/// elementary symmetric tensor of the basis element with that label.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ElementaryExpr {
    n: usize,
    labels: Vec<String>,
    /// element of `A[r1[e_1], ..., rn[e_rank]]`, symbols ordered by (k, label)
    expr: Scalar,
}

impl ElementaryExpr {
    pub fn symbol_ring(alg: &MultTableAlgebra, n: usize) -> Result<BaseRing> {
        let mut labels: Vec<String> = alg.labels().to_vec();
        labels.sort();
        let mut vars = Vec::with_capacity(n * labels.len());
        for k in 1..=n {
            for l in &labels {
                vars.push(format!("r{k}[{l}]"));
            }
        }
        BaseRing::poly(alg.base().clone(), vars)
    }

    pub fn expr(&self) -> &Scalar {
        &self.expr
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    /// Evaluates the expression in `S_n(B|A)` by substituting the concrete
    /// elementary symmetric tensors.
    pub fn evaluate(&self, alg: &Arc<MultTableAlgebra>) -> Result<TensorElement> {
        let n = self.n;
        let mut labels: Vec<String> = alg.labels().to_vec();
        labels.sort();
        let rank = labels.len();
        let mut acc = TensorElement::zero(alg, n);
        for (mono, c) in self.expr.terms()? {
            let mut term = TensorElement::one(alg, n).scale(c);
            for (vi, &e) in mono.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let k = vi / rank + 1;
                let label = &labels[vi % rank];
                let bi = alg
                    .labels()
                    .iter()
                    .position(|l| l == label)
                    .expect("label set");
                let rho = elem_sym(&alg.basis_element(bi), k, n)?;
                term = term.mul(&rho.tensor().pow(e)?)?;
            }
            acc = acc.add(&term)?;
        }
        Ok(acc)
    }

    pub fn to_json(&self) -> Json {
        json!({
            "n": self.n,
            "labels": self.labels,
            "expr": self.expr.to_json(),
        })
    }
}

/// Canonical typed key: basis index -> positive multiplicity, total weight
/// at most the ambient degree.
type TypedKey = BTreeMap<u16, u32>;

/// Rewriter with memoised weight recursion.  `express` uses all elementary
/// symmetric tensors; `express_rho1` uses only the first ones and requires
/// `n!` to be invertible in the base.
pub struct ElementaryRewriter {
    alg: Arc<MultTableAlgebra>,
    n: usize,
    ring: BaseRing,
    memo: HashMap<Vec<(u16, u32)>, Scalar>,
    memo_r1: HashMap<Vec<(u16, u32)>, Scalar>,
}

impl ElementaryRewriter {
    pub fn new(alg: &Arc<MultTableAlgebra>, n: usize) -> Result<ElementaryRewriter> {
        Ok(ElementaryRewriter {
            alg: alg.clone(),
            n,
            ring: ElementaryExpr::symbol_ring(alg, n)?,
            memo: HashMap::new(),
            memo_r1: HashMap::new(),
        })
    }

    fn symbol(&self, k: u32, basis_index: u16) -> Result<Scalar> {
        let label = &self.alg.labels()[basis_index as usize];
        self.ring.var(&format!("r{k}[{label}]"))
    }

    /// The typed symmetric tensor of a canonical key, entries taken from the
    /// basis, remaining slots filled with the unit.
    pub fn typed_value(&self, key: &TypedKey) -> Result<TensorElement> {
        let entries: Vec<u32> = key.values().copied().collect();
        let elems: Vec<AlgElement> = key
            .keys()
            .map(|&i| self.alg.basis_element(i as usize))
            .collect();
        if elems.is_empty() {
            return Ok(TensorElement::one(&self.alg, self.n));
        }
        let tv = TypeVector::new(self.n, entries)?;
        Ok(typed_sym(&tv, &elems)?.into_tensor())
    }

    /// Formal expansion of `prod_q rho_{a_q}(x_q)` into typed keys: the sum
    /// over all ways slots can be shared between the factors; sharing
    /// multiplies the entries, splitting against the basis and merging equal
    /// basis entries with multinomial coefficients.
    fn expand_product(&self, factors: &[(AlgElement, u32)]) -> Result<Vec<(Scalar, TypedKey)>> {
        let r = factors.len();
        let base = self.alg.base().clone();
        // enumerate assignments n_T over nonempty subsets T of [r] with
        // sum_{T containing i} n_T = a_i
        let subsets: Vec<u32> = (1..(1u32 << r)).collect();
        let mut results: Vec<(Scalar, TypedKey)> = Vec::new();
        let mut counts = vec![0u32; subsets.len()];
        let budgets: Vec<u32> = factors.iter().map(|(_, a)| *a).collect();
        self.enumerate_assignments(
            &subsets,
            &budgets,
            0,
            &mut counts,
            &mut |counts: &[u32]| -> Result<()> {
                // typed term with entries m_T = prod_{i in T} x_i, count n_T
                let mut expanded: Vec<(Scalar, TypedKey)> =
                    vec![(base.one(), TypedKey::new())];
                for (ti, &cnt) in counts.iter().enumerate() {
                    if cnt == 0 {
                        continue;
                    }
                    let mask = subsets[ti];
                    let mut prod = self.alg.one();
                    for (i, (x, _)) in factors.iter().enumerate() {
                        if mask & (1 << i) != 0 {
                            prod = prod.mul(x)?;
                        }
                    }
                    // split cnt over the nonzero coordinates of prod
                    let coords = prod.coords();
                    let nz: Vec<(u16, &Scalar)> = coords
                        .iter()
                        .enumerate()
                        .filter(|(_, c)| !c.is_zero())
                        .map(|(i, c)| (i as u16, c))
                        .collect();
                    let mut splits: Vec<(Scalar, Vec<(u16, u32)>)> = Vec::new();
                    distribute(cnt, &nz, 0, &base.one(), &mut Vec::new(), &mut splits, &base);
                    let mut next = Vec::with_capacity(expanded.len() * splits.len());
                    for (c0, key0) in &expanded {
                        for (c1, parts) in &splits {
                            let mut key = key0.clone();
                            let mut coeff = c0.mul(c1);
                            for &(bi, k) in parts {
                                // merging with an existing entry for the same
                                // basis element picks up a binomial factor
                                let old = key.get(&bi).copied().unwrap_or(0);
                                if old > 0 {
                                    coeff = coeff.scale_int(&crate::ring::binomial(
                                        (old + k) as u64,
                                        k as u64,
                                    ));
                                }
                                *key.entry(bi).or_insert(0) += k;
                            }
                            next.push((coeff, key));
                        }
                    }
                    expanded = next;
                }
                results.extend(expanded);
                Ok(())
            },
        )?;
        // collect equal keys
        let mut merged: BTreeMap<Vec<(u16, u32)>, Scalar> = BTreeMap::new();
        for (c, key) in results {
            let k: Vec<(u16, u32)> = key.into_iter().collect();
            merged
                .entry(k)
                .and_modify(|acc| *acc = acc.add(&c))
                .or_insert(c);
        }
        Ok(merged
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| (c, k.into_iter().collect()))
            .collect())
    }

    fn enumerate_assignments(
        &self,
        subsets: &[u32],
        budgets: &[u32],
        ti: usize,
        counts: &mut Vec<u32>,
        f: &mut impl FnMut(&[u32]) -> Result<()>,
    ) -> Result<()> {
        if ti == subsets.len() {
            if budgets.iter().all(|&b| b == 0) {
                f(counts)?;
            }
            return Ok(());
        }
        let mask = subsets[ti];
        let max = budgets
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, &b)| b)
            .min()
            .unwrap_or(0);
        for c in 0..=max {
            let mut next_budgets = budgets.to_vec();
            if c > 0 {
                for (i, b) in next_budgets.iter_mut().enumerate() {
                    if mask & (1 << i) != 0 {
                        *b -= c;
                    }
                }
            }
            counts[ti] = c;
            self.enumerate_assignments(subsets, &next_budgets, ti + 1, counts, f)?;
        }
        counts[ti] = 0;
        Ok(())
    }

    /// Expression of a typed key using all elementary symmetric tensors.
    fn express_key(&mut self, key: &TypedKey) -> Result<Scalar> {
        let memo_key: Vec<(u16, u32)> = key.iter().map(|(&a, &b)| (a, b)).collect();
        if let Some(e) = self.memo.get(&memo_key) {
            return Ok(e.clone());
        }
        if key.is_empty() {
            let one = self.ring.one();
            self.memo.insert(memo_key, one.clone());
            return Ok(one);
        }
        let weight: u32 = key.values().sum();
        let factors: Vec<(AlgElement, u32)> = key
            .iter()
            .map(|(&i, &a)| (self.alg.basis_element(i as usize), a))
            .collect();
        let mut head = self.ring.one();
        for (&i, &a) in key.iter() {
            head = head.mul(&self.symbol(a, i)?);
        }
        let mut expr = head;
        for (c, term) in self.expand_product(&factors)? {
            if &term == key {
                debug_assert!(c.is_one(), "leading coefficient must be 1");
                continue;
            }
            debug_assert!(term.values().sum::<u32>() < weight);
            let sub = self.express_key(&term)?;
            expr = expr.sub(&sub.mul(&self.ring.from_scalar_coeff(&c)?));
        }
        self.memo.insert(memo_key, expr.clone());
        Ok(expr)
    }

    /// Expression of a typed key using only first elementary symmetric
    /// tensors; needs the factorials up to the key's multiplicities to be
    /// invertible.
    fn express_key_rho1(&mut self, key: &TypedKey) -> Result<Scalar> {
        let memo_key: Vec<(u16, u32)> = key.iter().map(|(&a, &b)| (a, b)).collect();
        if let Some(e) = self.memo_r1.get(&memo_key) {
            return Ok(e.clone());
        }
        let expr = if key.is_empty() {
            self.ring.one()
        } else if key.len() == 1 {
            let (&i, &k) = key.iter().next().unwrap();
            if k == 1 {
                self.symbol(1, i)?
            } else {
                // rho_1(e)^k = k! rho_k(e) + lower weight
                let e = self.alg.basis_element(i as usize);
                let head = self.express_key_rho1(&TypedKey::from([(i, 1)]))?.pow(k);
                let mut expr = head;
                let factors: Vec<(AlgElement, u32)> = (0..k).map(|_| (e.clone(), 1)).collect();
                for (c, term) in self.expand_product(&factors)? {
                    if &term == key {
                        continue; // coefficient k!, subtracted via division below
                    }
                    let sub = self.express_key_rho1(&term)?;
                    expr = expr.sub(&sub.mul(&self.ring.from_scalar_coeff(&c)?));
                }
                let inv = inverse_factorial(self.alg.base(), k)?;
                expr.mul(&self.ring.from_scalar_coeff(&inv)?)
            }
        } else {
            // rho_a(e) = prod_q rho_{a_q}(e_q) - lower weight
            let factors: Vec<(AlgElement, u32)> = key
                .iter()
                .map(|(&i, &a)| (self.alg.basis_element(i as usize), a))
                .collect();
            let mut head = self.ring.one();
            for (&i, &a) in key.iter() {
                let f = self.express_key_rho1(&TypedKey::from([(i, a)]))?;
                head = head.mul(&f);
            }
            let mut expr = head;
            for (c, term) in self.expand_product(&factors)? {
                if &term == key {
                    continue;
                }
                let sub = self.express_key_rho1(&term)?;
                expr = expr.sub(&sub.mul(&self.ring.from_scalar_coeff(&c)?));
            }
            expr
        };
        self.memo_r1.insert(memo_key, expr.clone());
        Ok(expr)
    }

    /// Rewrites an S_n-invariant tensor as a polynomial in the elementary
    /// symmetric tensors of the basis elements.  With `rho1_only` the result
    /// uses only the `r1` symbols, which requires `n!` invertible in `A`.
    pub fn express(&mut self, t: &SymTensor, rho1_only: bool) -> Result<ElementaryExpr> {
        if t.algebra() != &self.alg || t.degree() != self.n {
            return Err(Error::ShapeMismatch("tensor degree or algebra".into()));
        }
        if rho1_only && inverse_factorial(self.alg.base(), self.n as u32).is_err() {
            return Err(Error::FactorialNotInvertible(self.n as u32));
        }
        let coords = t.tensor().orbit_coordinates()?;
        let mut expr = self.ring.zero();
        for (key, c) in coords {
            let mut typed = TypedKey::new();
            for &i in &key {
                *typed.entry(i).or_insert(0) += 1;
            }
            let e = if rho1_only {
                self.express_key_rho1(&typed)?
            } else {
                self.express_key(&typed)?
            };
            expr = expr.add(&e.mul(&self.ring.from_scalar_coeff(&c)?));
        }
        let mut labels = self.alg.labels().to_vec();
        labels.sort();
        Ok(ElementaryExpr { n: self.n, labels, expr })
    }
}

fn inverse_factorial(ring: &BaseRing, k: u32) -> Result<Scalar> {
    let f = factorial(k as u64);
    ring.from_bigint(&f)
        .inverse()
        .ok_or(Error::FactorialNotInvertible(k))
}

fn distribute(
    left: u32,
    choices: &[(u16, &Scalar)],
    idx: usize,
    coeff: &Scalar,
    acc: &mut Vec<(u16, u32)>,
    out: &mut Vec<(Scalar, Vec<(u16, u32)>)>,
    base: &BaseRing,
) {
    if idx == choices.len() {
        if left == 0 {
            out.push((coeff.clone(), acc.clone()));
        }
        return;
    }
    if idx + 1 == choices.len() {
        // last choice takes everything
        let (bi, c) = choices[idx];
        let coeff = coeff.mul(&c.pow(left));
        if left > 0 {
            acc.push((bi, left));
            out.push((coeff, acc.clone()));
            acc.pop();
        } else {
            out.push((coeff, acc.clone()));
        }
        return;
    }
    let (bi, c) = choices[idx];
    for k in 0..=left {
        let coeff2 = coeff.mul(&c.pow(k));
        if k > 0 {
            acc.push((bi, k));
        }
        distribute(left - k, choices, idx + 1, &coeff2, acc, out, base);
        if k > 0 {
            acc.pop();
        }
    }
}

// ---------------------------------------------------------------------------
// Structural maps between symmetric powers.
// ---------------------------------------------------------------------------

/// An invariant of `(B|A)^{(x)(n_1 + ... + n_r)}` re-read along the product
/// subgroup: sparse coordinates over tuples of multiset keys, one sorted key
/// per block.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SplitTensor {
    alg: Arc<MultTableAlgebra>,
    parts: Vec<usize>,
    terms: BTreeMap<Vec<Vec<u16>>, Scalar>,
}

impl SplitTensor {
    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn terms(&self) -> &BTreeMap<Vec<Vec<u16>>, Scalar> {
        &self.terms
    }

    /// Back to the big tensor power: each key contributes the juxtaposition
    /// of the blockwise orbit sums.
    pub fn reconstruct(&self) -> Result<TensorElement> {
        let n: usize = self.parts.iter().sum();
        let mut acc = TensorElement::zero(&self.alg, n);
        for (key, c) in &self.terms {
            let blocks: Vec<TensorElement> = key
                .iter()
                .map(|k| orbit_sum(&self.alg, k))
                .collect::<Result<Vec<_>>>()?;
            let mut tuples: Vec<(Vec<u16>, Scalar)> = vec![(Vec::new(), c.clone())];
            for b in &blocks {
                let mut next = Vec::with_capacity(tuples.len() * b.terms().len());
                for (prefix, c0) in &tuples {
                    for (t, c1) in b.terms() {
                        let mut full = prefix.clone();
                        full.extend_from_slice(t);
                        next.push((full, c0.mul(c1)));
                    }
                }
                tuples = next;
            }
            acc = acc.add(&TensorElement::from_terms(&self.alg, n, tuples)?)?;
        }
        Ok(acc)
    }

    /// Componentwise product inside the tensor product of the smaller
    /// invariant rings: both factors are re-embedded in the big tensor
    /// power, multiplied there, and split again.
    pub fn mul(&self, other: &SplitTensor) -> Result<SplitTensor> {
        if self.parts != other.parts || self.alg != other.alg {
            return Err(Error::ShapeMismatch("split shapes differ".into()));
        }
        let prod = self.reconstruct()?.mul(&other.reconstruct()?)?;
        sigma_split_raw(&prod, &self.parts)
    }
}

/// `sigma_{n_1,...,n_r}`: re-reads an `S_{sum}`-invariant as an element of
/// the tensor product of the smaller invariant modules, by reading off the
/// coefficients at blockwise-sorted representative tuples.
pub fn sigma_map(t: &SymTensor, parts: &[usize]) -> Result<SplitTensor> {
    if parts.iter().sum::<usize>() != t.degree() {
        return Err(Error::ShapeMismatch("block sizes must sum to the degree".into()));
    }
    sigma_split_raw(t.tensor(), parts)
}

fn sigma_split_raw(t: &TensorElement, parts: &[usize]) -> Result<SplitTensor> {
    let mut terms = BTreeMap::new();
    for (tuple, c) in t.terms() {
        let mut key = Vec::with_capacity(parts.len());
        let mut offset = 0;
        let mut canonical = true;
        for &p in parts {
            let mut block = tuple[offset..offset + p].to_vec();
            let sorted = {
                let mut s = block.clone();
                s.sort_unstable();
                s
            };
            if block != sorted {
                canonical = false;
                break;
            }
            block.sort_unstable();
            key.push(block);
            offset += p;
        }
        if canonical {
            terms.insert(key, c.clone());
        }
    }
    Ok(SplitTensor { alg: t.algebra().clone(), parts: parts.to_vec(), terms })
}

/// An element of `S_m(S_n(B|A)|A)` in nested orbit coordinates: a sorted
/// multiset of `m` column keys, each column key a sorted `n`-multiset.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct NestedTensor {
    alg: Arc<MultTableAlgebra>,
    m: usize,
    n: usize,
    terms: BTreeMap<Vec<Vec<u16>>, Scalar>,
}

impl NestedTensor {
    pub fn terms(&self) -> &BTreeMap<Vec<Vec<u16>>, Scalar> {
        &self.terms
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.m, self.n)
    }
}

/// `tau_{m,n}`: re-reads an `S_{mn}`-invariant along the wreath subgroup,
/// columns of the `(x, y) -> x + m*y` grid becoming the inner factors.
pub fn tau_map(t: &SymTensor, m: usize, n: usize) -> Result<NestedTensor> {
    if m * n != t.degree() {
        return Err(Error::ShapeMismatch("m*n must equal the degree".into()));
    }
    let mut terms = BTreeMap::new();
    for (tuple, c) in t.tensor().terms() {
        // column x = slots x + m*y for y in 0..n
        let mut cols: Vec<Vec<u16>> = (0..m)
            .map(|x| (0..n).map(|y| tuple[x + m * y]).collect())
            .collect();
        // canonical iff every column is sorted and the column list is sorted
        if cols.iter().any(|c| c.windows(2).any(|w| w[0] > w[1])) {
            continue;
        }
        let sorted_cols = {
            let mut s = cols.clone();
            s.sort();
            s
        };
        if cols != sorted_cols {
            continue;
        }
        cols.sort();
        terms.insert(cols, c.clone());
    }
    Ok(NestedTensor { alg: t.algebra().clone(), m, n, terms })
}

/// Expands an element of `S_m(S_n(B|A)|A)` given in nested coordinates back
/// into `(B|A)^{(x) mn}` through the wreath identification.
pub fn nested_reconstruct(t: &NestedTensor) -> Result<TensorElement> {
    let (m, n) = (t.m, t.n);
    let mut acc = TensorElement::zero(&t.alg, m * n);
    for (cols, c) in &t.terms {
        // orbit of the wreath group: distinct column orderings x distinct
        // within-column orderings
        let mut col_list: Vec<Vec<u16>> = cols.clone();
        let mut raw: Vec<(Vec<u16>, Scalar)> = Vec::new();
        loop {
            // enumerate per-column arrangements
            let mut arrangements: Vec<Vec<Vec<u16>>> = vec![Vec::new()];
            for col in &col_list {
                let mut perms_of_col: Vec<Vec<u16>> = Vec::new();
                let mut v: Vec<usize> = col.iter().map(|&x| x as usize).collect();
                loop {
                    perms_of_col.push(v.iter().map(|&x| x as u16).collect());
                    if !next_permutation(&mut v) {
                        break;
                    }
                }
                let mut next = Vec::with_capacity(arrangements.len() * perms_of_col.len());
                for a in &arrangements {
                    for p in &perms_of_col {
                        let mut b = a.clone();
                        b.push(p.clone());
                        next.push(b);
                    }
                }
                arrangements = next;
            }
            for a in arrangements {
                let mut tuple = vec![0u16; m * n];
                for (x, col) in a.iter().enumerate() {
                    for (y, &v) in col.iter().enumerate() {
                        tuple[x + m * y] = v;
                    }
                }
                raw.push((tuple, c.clone()));
            }
            if !next_permutation_generic(&mut col_list) {
                break;
            }
        }
        acc = acc.add(&TensorElement::from_terms(&t.alg, m * n, raw)?)?;
    }
    Ok(acc)
}

fn next_permutation_generic<T: Ord + Clone>(v: &mut [T]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Multiplication in `S_m(S_n(B|A)|A)` computed inside the invariants
/// algebra of the inner symmetric power; small scale only.
pub fn nested_mul(a: &NestedTensor, b: &NestedTensor) -> Result<NestedTensor> {
    if a.m != b.m || a.n != b.n || a.alg != b.alg {
        return Err(Error::ShapeMismatch("nested shapes differ".into()));
    }
    let (sn_alg, keys) = invariants_algebra(&a.alg, a.n)?;
    let index: HashMap<&Vec<u16>, usize> =
        keys.iter().enumerate().map(|(i, k)| (k, i)).collect();
    let to_sn = |t: &NestedTensor| -> Result<TensorElement> {
        let mut raw = Vec::new();
        for (cols, c) in &t.terms {
            // orbit sum over distinct arrangements of the column multiset
            let mut col_list = cols.clone();
            loop {
                let tuple: Vec<u16> =
                    col_list.iter().map(|k| index[k] as u16).collect();
                raw.push((tuple, c.clone()));
                if !next_permutation_generic(&mut col_list) {
                    break;
                }
            }
        }
        TensorElement::from_terms(&sn_alg, t.m, raw)
    };
    let prod = to_sn(a)?.mul(&to_sn(b)?)?;
    let coords = prod.orbit_coordinates()?;
    let mut terms = BTreeMap::new();
    for (key, c) in coords {
        let cols: Vec<Vec<u16>> = key.iter().map(|&i| keys[i as usize].clone()).collect();
        terms.insert(cols, c);
    }
    Ok(NestedTensor { alg: a.alg.clone(), m: a.m, n: a.n, terms })
}

/// Functorial image under an algebra map: applies the map slotwise and
/// keeps the invariance witness.
pub fn map_invariant(t: &SymTensor, f: &AlgebraMap) -> Result<SymTensor> {
    SymTensor::new(t.tensor().map_slots(f)?, t.generators().to_vec())
}

/// Random invariant: a small random combination of the orbit basis.
pub fn random_invariant<R: rand::Rng + ?Sized>(
    alg: &Arc<MultTableAlgebra>,
    n: usize,
    terms: usize,
    rng: &mut R,
) -> Result<SymTensor> {
    let keys = multisets(alg.rank(), n);
    let mut acc = TensorElement::zero(alg, n);
    for _ in 0..terms {
        let key = &keys[rng.gen_range(0..keys.len())];
        let c = alg.base().sample(rng);
        acc = acc.add(&orbit_sum(alg, key)?.scale(&c))?;
    }
    SymTensor::symmetric(acc)
}

/// Integer coefficient view of a scalar; used in tests and the suite.
pub fn int_coeff(n: i64, ring: &BaseRing) -> Scalar {
    ring.from_bigint(&BigInt::from(n))
}
