//! Finite free algebras presented by multiplication tables, together with
//! free modules carrying an algebra action (good triples).  Tables are
//! validated on construction: commutativity, associativity and the unit law
//! are checked entry by entry, and a violation reports the offending indices.

use std::sync::Arc;

use rand::Rng;
use serde_json::{json, Value as Json};

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::ring::{BaseRing, RingHom, Scalar};

/// A commutative algebra `B` over a base ring `A`, free of finite rank as an
/// `A`-module, with multiplication given by structure constants
/// `e_i e_j = sum_k c_{ij}^k e_k`.
#[derive(Clone, PartialEq, Eq)]
pub struct MultTableAlgebra {
    base: BaseRing,
    rank: usize,
    labels: Vec<String>,
    table: Vec<Scalar>, // rank^3 entries, index (i*rank + j)*rank + k
    unit: Vec<Scalar>,
}

impl std::fmt::Debug for MultTableAlgebra {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Algebra[{}; rank {}; basis {:?}]", self.base, self.rank, self.labels)
    }
}

impl MultTableAlgebra {
    /// Validates and constructs; rejection names the violated axiom and the
    /// first offending index triple.
    pub fn new(
        base: BaseRing,
        rank: usize,
        labels: Vec<String>,
        table: Vec<Scalar>,
        unit: Vec<Scalar>,
    ) -> Result<Arc<MultTableAlgebra>> {
        if labels.len() != rank {
            return Err(Error::ShapeMismatch(format!(
                "{} labels for rank {rank}",
                labels.len()
            )));
        }
        {
            let mut seen = std::collections::BTreeSet::new();
            for l in &labels {
                if !seen.insert(l) {
                    return Err(Error::DuplicateLabel(l.clone()));
                }
            }
        }
        if table.len() != rank * rank * rank {
            return Err(Error::ShapeMismatch(format!(
                "table has {} entries, expected {}",
                table.len(),
                rank * rank * rank
            )));
        }
        if unit.len() != rank {
            return Err(Error::ShapeMismatch("unit coordinate length".into()));
        }
        for s in table.iter().chain(unit.iter()) {
            if s.ring() != &base {
                return Err(Error::RingMismatch {
                    expected: base.to_string(),
                    got: s.ring().to_string(),
                });
            }
        }
        let alg = MultTableAlgebra { base, rank, labels, table, unit };
        // commutativity
        for i in 0..rank {
            for j in 0..i {
                for k in 0..rank {
                    if alg.c(i, j, k) != alg.c(j, i, k) {
                        return Err(Error::NonCommutative(i, j, k));
                    }
                }
            }
        }
        // associativity by table contraction: (e_i e_j) e_l = e_i (e_j e_l)
        for i in 0..rank {
            for j in 0..rank {
                for l in 0..rank {
                    for m in 0..rank {
                        let mut lhs = alg.base.zero();
                        let mut rhs = alg.base.zero();
                        for k in 0..rank {
                            lhs = lhs.add(&alg.c(i, j, k).mul(alg.c(k, l, m)));
                            rhs = rhs.add(&alg.c(j, l, k).mul(alg.c(i, k, m)));
                        }
                        if lhs != rhs {
                            return Err(Error::NonAssociative(i, j, l));
                        }
                    }
                }
            }
        }
        // unit law on every basis vector
        let alg = Arc::new(alg);
        for j in 0..rank {
            let e = alg.basis_element(j);
            let u = AlgElement { alg: alg.clone(), coords: alg.unit.clone() };
            if u.mul(&e)?.coords != e.coords {
                return Err(Error::BadUnit(j));
            }
        }
        Ok(alg)
    }

    fn c(&self, i: usize, j: usize, k: usize) -> &Scalar {
        &self.table[(i * self.rank + j) * self.rank + k]
    }

    pub fn base(&self) -> &BaseRing {
        &self.base
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn unit_coords(&self) -> &[Scalar] {
        &self.unit
    }

    pub fn basis_element(self: &Arc<Self>, i: usize) -> AlgElement {
        let mut coords = vec![self.base.zero(); self.rank];
        coords[i] = self.base.one();
        AlgElement { alg: self.clone(), coords }
    }

    pub fn one(self: &Arc<Self>) -> AlgElement {
        AlgElement { alg: self.clone(), coords: self.unit.clone() }
    }

    pub fn zero(self: &Arc<Self>) -> AlgElement {
        AlgElement { alg: self.clone(), coords: vec![self.base.zero(); self.rank] }
    }

    pub fn element(self: &Arc<Self>, coords: Vec<Scalar>) -> Result<AlgElement> {
        if coords.len() != self.rank {
            return Err(Error::ShapeMismatch("coordinate length".into()));
        }
        for c in &coords {
            if c.ring() != &self.base {
                return Err(Error::RingMismatch {
                    expected: self.base.to_string(),
                    got: c.ring().to_string(),
                });
            }
        }
        Ok(AlgElement { alg: self.clone(), coords })
    }

    pub fn scalar_element(self: &Arc<Self>, s: &Scalar) -> Result<AlgElement> {
        if s.ring() != &self.base {
            return Err(Error::RingMismatch {
                expected: self.base.to_string(),
                got: s.ring().to_string(),
            });
        }
        Ok(AlgElement {
            alg: self.clone(),
            coords: self.unit.iter().map(|u| u.mul(s)).collect(),
        })
    }

    pub fn sample<R: Rng + ?Sized>(self: &Arc<Self>, rng: &mut R) -> AlgElement {
        AlgElement {
            alg: self.clone(),
            coords: (0..self.rank).map(|_| self.base.sample(rng)).collect(),
        }
    }

    /// Structure constants of `e_i e_j` as a coordinate vector.
    pub fn product_coords(&self, i: usize, j: usize) -> Vec<Scalar> {
        (0..self.rank).map(|k| self.c(i, j, k).clone()).collect()
    }

    /// Base change along a homomorphism of the base ring.
    pub fn base_change(&self, h: &RingHom) -> Result<Arc<MultTableAlgebra>> {
        if h.source() != &self.base {
            return Err(Error::RingMismatch {
                expected: self.base.to_string(),
                got: h.source().to_string(),
            });
        }
        MultTableAlgebra::new(
            h.target().clone(),
            self.rank,
            self.labels.clone(),
            self.table.iter().map(|s| h.apply(s)).collect::<Result<Vec<_>>>()?,
            self.unit.iter().map(|s| h.apply(s)).collect::<Result<Vec<_>>>()?,
        )
    }

    pub fn to_json(&self) -> Json {
        json!({
            "base": self.base.to_json(),
            "rank": self.rank,
            "labels": self.labels,
            "table": self.table.iter().map(|s| s.to_json()).collect::<Vec<_>>(),
            "unit": self.unit.iter().map(|s| s.to_json()).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Json) -> Result<Arc<MultTableAlgebra>> {
        let base = BaseRing::from_json(
            v.get("base").ok_or_else(|| Error::Json("algebra needs `base`".into()))?,
        )?;
        let rank = v
            .get("rank")
            .and_then(|r| r.as_u64())
            .ok_or_else(|| Error::Json("algebra needs integer `rank`".into()))?
            as usize;
        if rank > 64 {
            return Err(Error::ResourceCap(format!("rank {rank} exceeds 64")));
        }
        let labels = v
            .get("labels")
            .and_then(|l| l.as_array())
            .ok_or_else(|| Error::Json("algebra needs `labels`".into()))?
            .iter()
            .map(|l| {
                l.as_str()
                    .map(str::to_string)
                    .ok_or_else(|| Error::Json("labels must be strings".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        let table = v
            .get("table")
            .and_then(|t| t.as_array())
            .ok_or_else(|| Error::Json("algebra needs `table`".into()))?
            .iter()
            .map(|s| Scalar::from_json(&base, s))
            .collect::<Result<Vec<_>>>()?;
        let unit = v
            .get("unit")
            .and_then(|t| t.as_array())
            .ok_or_else(|| Error::Json("algebra needs `unit`".into()))?
            .iter()
            .map(|s| Scalar::from_json(&base, s))
            .collect::<Result<Vec<_>>>()?;
        MultTableAlgebra::new(base, rank, labels, table, unit)
    }
}

/// An element of a table algebra, stored as coordinates over the base.
#[derive(Clone, PartialEq, Eq)]
pub struct AlgElement {
    alg: Arc<MultTableAlgebra>,
    coords: Vec<Scalar>,
}

impl std::fmt::Debug for AlgElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self
            .coords
            .iter()
            .zip(self.alg.labels())
            .filter(|(c, _)| !c.is_zero())
            .map(|(c, l)| format!("({c})*{l}"))
            .collect();
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

impl AlgElement {
    pub fn algebra(&self) -> &Arc<MultTableAlgebra> {
        &self.alg
    }

    pub fn coords(&self) -> &[Scalar] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Scalar::is_zero)
    }

    fn same_algebra(&self, other: &AlgElement) -> Result<()> {
        if Arc::ptr_eq(&self.alg, &other.alg) || self.alg == other.alg {
            Ok(())
        } else {
            Err(Error::AlgebraMismatch)
        }
    }

    pub fn add(&self, other: &AlgElement) -> Result<AlgElement> {
        self.same_algebra(other)?;
        Ok(AlgElement {
            alg: self.alg.clone(),
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a.add(b))
                .collect(),
        })
    }

    pub fn sub(&self, other: &AlgElement) -> Result<AlgElement> {
        self.same_algebra(other)?;
        Ok(AlgElement {
            alg: self.alg.clone(),
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a.sub(b))
                .collect(),
        })
    }

    pub fn scale(&self, s: &Scalar) -> AlgElement {
        AlgElement {
            alg: self.alg.clone(),
            coords: self.coords.iter().map(|a| a.mul(s)).collect(),
        }
    }

    /// Bilinear product through the multiplication table.
    pub fn mul(&self, other: &AlgElement) -> Result<AlgElement> {
        self.same_algebra(other)?;
        let rank = self.alg.rank();
        let mut out = vec![self.alg.base().zero(); rank];
        for i in 0..rank {
            if self.coords[i].is_zero() {
                continue;
            }
            for j in 0..rank {
                if other.coords[j].is_zero() {
                    continue;
                }
                let c = self.coords[i].mul(&other.coords[j]);
                for (k, out_k) in out.iter_mut().enumerate() {
                    let t = self.alg.c(i, j, k);
                    if !t.is_zero() {
                        *out_k = out_k.add(&t.mul(&c));
                    }
                }
            }
        }
        Ok(AlgElement { alg: self.alg.clone(), coords: out })
    }

    pub fn pow(&self, mut e: u32) -> Result<AlgElement> {
        let mut base = self.clone();
        let mut acc = self.alg.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            base = base.mul(&base)?;
            e >>= 1;
        }
        Ok(acc)
    }

    pub fn base_change(&self, target: &Arc<MultTableAlgebra>, h: &RingHom) -> Result<AlgElement> {
        target.element(self.coords.iter().map(|c| h.apply(c)).collect::<Result<Vec<_>>>()?)
    }

    pub fn to_json(&self) -> Json {
        Json::Array(self.coords.iter().map(|c| c.to_json()).collect())
    }
}

/// An algebra map `B -> B'` over a common base, given by basis images.
#[derive(Clone)]
pub struct AlgebraMap {
    source: Arc<MultTableAlgebra>,
    target: Arc<MultTableAlgebra>,
    images: Vec<AlgElement>,
}

impl AlgebraMap {
    pub fn new(
        source: Arc<MultTableAlgebra>,
        target: Arc<MultTableAlgebra>,
        images: Vec<AlgElement>,
    ) -> Result<AlgebraMap> {
        if source.base() != target.base() {
            return Err(Error::RingMismatch {
                expected: source.base().to_string(),
                got: target.base().to_string(),
            });
        }
        if images.len() != source.rank() {
            return Err(Error::ShapeMismatch("one image per basis element".into()));
        }
        let map = AlgebraMap { source: source.clone(), target, images };
        // must send 1 to 1 and respect the table
        if map.apply(&source.one())? != map.target.one() {
            return Err(Error::Invalid("algebra map does not preserve the unit".into()));
        }
        for i in 0..source.rank() {
            for j in 0..source.rank() {
                let lhs = map.apply(
                    &source.basis_element(i).mul(&source.basis_element(j))?,
                )?;
                let rhs = map.images[i].mul(&map.images[j])?;
                if lhs != rhs {
                    return Err(Error::BadAction(i, j));
                }
            }
        }
        Ok(map)
    }

    pub fn source(&self) -> &Arc<MultTableAlgebra> {
        &self.source
    }

    pub fn target(&self) -> &Arc<MultTableAlgebra> {
        &self.target
    }

    pub fn apply(&self, x: &AlgElement) -> Result<AlgElement> {
        if x.algebra() != &self.source {
            return Err(Error::AlgebraMismatch);
        }
        let mut acc = self.target.zero();
        for (c, img) in x.coords().iter().zip(&self.images) {
            acc = acc.add(&img.scale(c))?;
        }
        Ok(acc)
    }
}

/// A good triple `(M|B|A)`: the algebra `B` over `A` acting on a free
/// `A`-module `M` of rank `n`, the action stored as one matrix per basis
/// element of `B`.
#[derive(Clone, PartialEq)]
pub struct GoodTriple {
    algebra: Arc<MultTableAlgebra>,
    module_rank: usize,
    action: Vec<Mat>,
}

impl std::fmt::Debug for GoodTriple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "GoodTriple[{:?}; module rank {}]", self.algebra, self.module_rank)
    }
}

impl GoodTriple {
    pub fn new(
        algebra: Arc<MultTableAlgebra>,
        module_rank: usize,
        action: Vec<Mat>,
    ) -> Result<GoodTriple> {
        if action.len() != algebra.rank() {
            return Err(Error::ShapeMismatch("one action matrix per basis element".into()));
        }
        for m in &action {
            if m.nrows() != module_rank || m.ncols() != module_rank {
                return Err(Error::ShapeMismatch("action matrix shape".into()));
            }
            if m.ring() != algebra.base() {
                return Err(Error::RingMismatch {
                    expected: algebra.base().to_string(),
                    got: m.ring().to_string(),
                });
            }
        }
        let triple = GoodTriple { algebra, module_rank, action };
        // the action must be a ring homomorphism B -> End(M)
        let unit_mat = triple.mult_matrix(&triple.algebra.one())?;
        if unit_mat != Mat::identity(triple.algebra.base(), module_rank) {
            return Err(Error::BadAction(usize::MAX, usize::MAX));
        }
        for i in 0..triple.algebra.rank() {
            for j in 0..=i {
                let lhs = triple.action[i].mul(&triple.action[j])?;
                let prod = triple.algebra.product_coords(i, j);
                let mut rhs = Mat::zeros(triple.algebra.base(), module_rank, module_rank);
                for (k, c) in prod.iter().enumerate() {
                    if !c.is_zero() {
                        rhs = rhs.add(&triple.action[k].scale(c))?;
                    }
                }
                if lhs != rhs {
                    return Err(Error::BadAction(i, j));
                }
            }
        }
        Ok(triple)
    }

    /// The regular representation: `B` acting on itself.
    pub fn regular(algebra: &Arc<MultTableAlgebra>) -> GoodTriple {
        let rank = algebra.rank();
        let action: Vec<Mat> = (0..rank)
            .map(|i| {
                let cols: Vec<Vec<Scalar>> =
                    (0..rank).map(|j| algebra.product_coords(i, j)).collect();
                Mat::from_columns(algebra.base(), cols).expect("table shape")
            })
            .collect();
        GoodTriple { algebra: algebra.clone(), module_rank: rank, action }
    }

    pub fn algebra(&self) -> &Arc<MultTableAlgebra> {
        &self.algebra
    }

    pub fn module_rank(&self) -> usize {
        self.module_rank
    }

    pub fn base(&self) -> &BaseRing {
        self.algebra.base()
    }

    pub fn action(&self) -> &[Mat] {
        &self.action
    }

    /// Matrix of the multiplication-by-`b` map on the module.
    pub fn mult_matrix(&self, b: &AlgElement) -> Result<Mat> {
        if b.algebra() != &self.algebra {
            return Err(Error::AlgebraMismatch);
        }
        let mut out = Mat::zeros(self.base(), self.module_rank, self.module_rank);
        for (i, c) in b.coords().iter().enumerate() {
            if !c.is_zero() {
                out = out.add(&self.action[i].scale(c))?;
            }
        }
        Ok(out)
    }

    pub fn base_change(&self, h: &RingHom) -> Result<GoodTriple> {
        let algebra = self.algebra.base_change(h)?;
        let action = self
            .action
            .iter()
            .map(|m| m.map(|s| h.apply(s)))
            .collect::<Result<Vec<_>>>()?;
        GoodTriple::new(algebra, self.module_rank, action)
    }
}

/// How two base rings combine over a common ground ring `R`: produces the
/// tensor ring `A (x)_R A'` together with the two canonical inclusions.
/// Supported shapes are `R` itself and polynomial rings over `R` with
/// disjoint variable sets.
pub fn tensor_base(a: &BaseRing, b: &BaseRing, r: &BaseRing) -> Result<(BaseRing, RingHom, RingHom)> {
    let vars_of = |ring: &BaseRing| -> Result<Vec<String>> {
        if ring == r {
            Ok(vec![])
        } else {
            match ring {
                BaseRing::Poly { coeff, vars } if coeff.as_ref() == r => Ok(vars.clone()),
                _ => Err(Error::BaseMismatch(format!("{ring} is not a polynomial ring over {r}"))),
            }
        }
    };
    let va = vars_of(a)?;
    let vb = vars_of(b)?;
    for v in &va {
        if vb.contains(v) {
            return Err(Error::BaseMismatch(format!("shared variable {v}")));
        }
    }
    let mut vars = va;
    vars.extend(vb);
    let tensor = if vars.is_empty() { r.clone() } else { BaseRing::poly(r.clone(), vars)? };
    let ha = RingHom::canonical(a, &tensor)?;
    let hb = RingHom::canonical(b, &tensor)?;
    Ok((tensor, ha, hb))
}

/// `B (x)_R B'` over `A (x)_R A'` with the product basis `e_i (x) e'_j`
/// ordered with the first factor varying fastest.
pub fn tensor_algebra(
    b: &Arc<MultTableAlgebra>,
    bt: &Arc<MultTableAlgebra>,
    r: &BaseRing,
) -> Result<Arc<MultTableAlgebra>> {
    let (base, ha, hb) = tensor_base(b.base(), bt.base(), r)?;
    let n = b.rank();
    let nt = bt.rank();
    let rank = n * nt;
    let flat = |i: usize, j: usize| i + n * j;
    let mut labels = vec![String::new(); rank];
    for i in 0..n {
        for j in 0..nt {
            labels[flat(i, j)] = format!("{}*{}", b.labels()[i], bt.labels()[j]);
        }
    }
    let zero = base.zero();
    let mut table = vec![zero.clone(); rank * rank * rank];
    for i in 0..n {
        for it in 0..nt {
            for j in 0..n {
                for jt in 0..nt {
                    let ci = b.product_coords(i, j);
                    let cj = bt.product_coords(it, jt);
                    for (k, ck) in ci.iter().enumerate() {
                        if ck.is_zero() {
                            continue;
                        }
                        let ck = ha.apply(ck)?;
                        for (kt, ckt) in cj.iter().enumerate() {
                            if ckt.is_zero() {
                                continue;
                            }
                            let idx = (flat(i, it) * rank + flat(j, jt)) * rank + flat(k, kt);
                            table[idx] = ck.mul(&hb.apply(ckt)?);
                        }
                    }
                }
            }
        }
    }
    let mut unit = vec![zero; rank];
    for (i, u) in b.unit_coords().iter().enumerate() {
        for (j, ut) in bt.unit_coords().iter().enumerate() {
            unit[flat(i, j)] = ha.apply(u)?.mul(&hb.apply(ut)?);
        }
    }
    MultTableAlgebra::new(base, rank, labels, table, unit)
}

/// Pure tensor `x (x) y` in a tensor algebra built by [`tensor_algebra`].
pub fn tensor_element(
    prod: &Arc<MultTableAlgebra>,
    x: &AlgElement,
    y: &AlgElement,
    r: &BaseRing,
) -> Result<AlgElement> {
    let (_, ha, hb) = tensor_base(x.algebra().base(), y.algebra().base(), r)?;
    let n = x.algebra().rank();
    let mut coords = vec![prod.base().zero(); prod.rank()];
    for (i, a) in x.coords().iter().enumerate() {
        for (j, b) in y.coords().iter().enumerate() {
            coords[i + n * j] = ha.apply(a)?.mul(&hb.apply(b)?);
        }
    }
    prod.element(coords)
}

/// An `n`-ic algebra `C` over a table algebra `B`: structure constants and
/// unit are `B`-elements.  Used to express ring towers `C|B|A`.
#[derive(Clone)]
pub struct TowerAlgebra {
    base_alg: Arc<MultTableAlgebra>,
    rank: usize,
    labels: Vec<String>,
    table: Vec<AlgElement>,
    unit: Vec<AlgElement>,
}

impl TowerAlgebra {
    pub fn new(
        base_alg: Arc<MultTableAlgebra>,
        rank: usize,
        labels: Vec<String>,
        table: Vec<AlgElement>,
        unit: Vec<AlgElement>,
    ) -> Result<TowerAlgebra> {
        if table.len() != rank * rank * rank || unit.len() != rank || labels.len() != rank {
            return Err(Error::ShapeMismatch("tower algebra data".into()));
        }
        for x in table.iter().chain(unit.iter()) {
            if x.algebra() != &base_alg {
                return Err(Error::TowerMismatch(
                    "structure constants must live in the base algebra".into(),
                ));
            }
        }
        Ok(TowerAlgebra { base_alg, rank, labels, table, unit })
    }

    /// `B[y]/(f)` for a monic `f` of degree `rank` with coefficients in `B`:
    /// `f = y^rank - (c_{rank-1} y^{rank-1} + ... + c_0)`.
    pub fn monogenic(
        base_alg: &Arc<MultTableAlgebra>,
        lower_coeffs: Vec<AlgElement>,
        var: &str,
    ) -> Result<TowerAlgebra> {
        let rank = lower_coeffs.len();
        if rank == 0 {
            return Err(Error::ShapeMismatch("rank must be positive".into()));
        }
        // powers[d] = coordinates of y^d in the basis 1, y, ..., y^{rank-1}
        let mut labels = Vec::with_capacity(rank);
        for d in 0..rank {
            labels.push(match d {
                0 => "1".to_string(),
                1 => var.to_string(),
                _ => format!("{var}^{d}"),
            });
        }
        let zero = base_alg.zero();
        let one = base_alg.one();
        let reduce_pow = |d: usize, cache: &mut Vec<Vec<AlgElement>>| {
            while cache.len() <= d {
                let prev = cache.last().unwrap().clone();
                // multiply by y: shift, then reduce the overflow via f
                let mut next = vec![zero.clone(); rank];
                let overflow = prev[rank - 1].clone();
                for k in (1..rank).rev() {
                    next[k] = prev[k - 1].clone();
                }
                for (k, c) in lower_coeffs.iter().enumerate() {
                    next[k] = next[k].add(&overflow.mul(c).unwrap()).unwrap();
                }
                cache.push(next);
            }
        };
        let mut cache: Vec<Vec<AlgElement>> = Vec::new();
        let mut first = vec![zero.clone(); rank];
        first[0] = one.clone();
        cache.push(first);
        let mut table = vec![zero.clone(); rank * rank * rank];
        for i in 0..rank {
            for j in 0..rank {
                reduce_pow(i + j, &mut cache);
                for k in 0..rank {
                    table[(i * rank + j) * rank + k] = cache[i + j][k].clone();
                }
            }
        }
        let mut unit = vec![zero; rank];
        unit[0] = one;
        TowerAlgebra::new(base_alg.clone(), rank, labels, table, unit)
    }

    pub fn base_algebra(&self) -> &Arc<MultTableAlgebra> {
        &self.base_alg
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// An element of `C` as a vector of `B`-elements.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<AlgElement> {
        (0..self.rank).map(|_| self.base_alg.sample(rng)).collect()
    }

    /// Matrix over `B` of multiplication by `c` in the `C`-basis.
    pub fn mult_matrix_over_base(&self, c: &[AlgElement]) -> Result<Vec<Vec<AlgElement>>> {
        if c.len() != self.rank {
            return Err(Error::ShapeMismatch("element coordinate length".into()));
        }
        // column j = coordinates of c * beta_j
        let mut cols = Vec::with_capacity(self.rank);
        for j in 0..self.rank {
            let mut col = vec![self.base_alg.zero(); self.rank];
            for (i, ci) in c.iter().enumerate() {
                if ci.is_zero() {
                    continue;
                }
                for k in 0..self.rank {
                    let t = &self.table[(i * self.rank + j) * self.rank + k];
                    col[k] = col[k].add(&ci.mul(t)?)?;
                }
            }
            cols.push(col);
        }
        Ok(cols)
    }

    /// Flattens the tower `C|B|A` to a table algebra `C|A` of rank `m*n`,
    /// with the basis `alpha_i beta_j` ordered first-factor-fastest.
    pub fn compose(&self) -> Result<Arc<MultTableAlgebra>> {
        let b = &self.base_alg;
        let m = b.rank();
        let n = self.rank;
        let rank = m * n;
        let flat = |i: usize, j: usize| i + m * j;
        let mut labels = vec![String::new(); rank];
        for i in 0..m {
            for j in 0..n {
                labels[flat(i, j)] = format!("{}*{}", b.labels()[i], self.labels[j]);
            }
        }
        let zero = b.base().zero();
        let mut table = vec![zero.clone(); rank * rank * rank];
        for i1 in 0..m {
            for j1 in 0..n {
                for i2 in 0..m {
                    for j2 in 0..n {
                        // (alpha_{i1} beta_{j1})(alpha_{i2} beta_{j2})
                        //   = (alpha_{i1} alpha_{i2}) * (beta_{j1} beta_{j2})
                        let a_prod = b.product_coords(i1, i2);
                        for k in 0..n {
                            let c = &self.table[(j1 * n + j2) * n + k]; // in B
                            if c.is_zero() {
                                continue;
                            }
                            // multiply the B-element c by alpha_{i1} alpha_{i2}
                            let mut acc = b.zero();
                            for (l, al) in a_prod.iter().enumerate() {
                                if !al.is_zero() {
                                    acc = acc.add(&b.basis_element(l).scale(al))?;
                                }
                            }
                            let prod = acc.mul(c)?;
                            for (l, cl) in prod.coords().iter().enumerate() {
                                if !cl.is_zero() {
                                    let idx = (flat(i1, j1) * rank + flat(i2, j2)) * rank
                                        + flat(l, k);
                                    table[idx] = table[idx].add(cl);
                                }
                            }
                        }
                    }
                }
            }
        }
        let mut unit = vec![zero; rank];
        for (j, u) in self.unit.iter().enumerate() {
            for (i, c) in u.coords().iter().enumerate() {
                unit[flat(i, j)] = unit[flat(i, j)].add(c);
            }
        }
        MultTableAlgebra::new(b.base().clone(), rank, labels, table, unit)
    }

    /// Coordinates over `A` of an element given as `B`-coordinates.
    pub fn flatten_element(&self, c: &[AlgElement]) -> Result<Vec<Scalar>> {
        let m = self.base_alg.rank();
        let mut out = vec![self.base_alg.base().zero(); m * self.rank];
        for (j, cj) in c.iter().enumerate() {
            for (i, a) in cj.coords().iter().enumerate() {
                out[i + m * j] = out[i + m * j].add(a);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples::{dual_numbers, f4_over_f2, gaussian_integers};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gaussian_table_is_valid_and_multiplies() {
        let zi = gaussian_integers();
        let i = zi.basis_element(1);
        let sq = i.mul(&i).unwrap();
        let minus_one = zi.one().scale(&BaseRing::Int.from_i64(-1));
        assert_eq!(sq, minus_one);
        assert_eq!(zi.one().mul(&i).unwrap(), i);
    }

    #[test]
    fn f4_multiplication() {
        let f4 = f4_over_f2();
        let w = f4.basis_element(1);
        let sq = w.mul(&w).unwrap();
        // w^2 = w + 1
        let expect = w.add(&f4.one()).unwrap();
        assert_eq!(sq, expect);
    }

    #[test]
    fn non_commutative_table_rejected() {
        let z = BaseRing::Int;
        let s = |n: i64| z.from_i64(n);
        // c_{01}^0 = 1 but c_{10}^0 = 0
        let table = vec![
            s(1), s(0),
            s(1), s(1),
            s(0), s(1),
            s(0), s(0),
        ];
        let err = MultTableAlgebra::new(
            z.clone(),
            2,
            vec!["1".into(), "x".into()],
            table,
            vec![s(1), s(0)],
        )
        .unwrap_err();
        assert_eq!(err, Error::NonCommutative(1, 0, 0));
    }

    #[test]
    fn non_associative_table_rejected() {
        let z = BaseRing::Int;
        let s = |n: i64| z.from_i64(n);
        // commutative but x*x = 1 + x with a broken unit row would fail
        // earlier, so break associativity instead: basis {1, x},
        // x*x = 1; then (x*x)*x = x but x*(x*x) = x. That is associative;
        // use a rank-3 example with a deliberately inconsistent table.
        let r = 3usize;
        let mut table = vec![s(0); r * r * r];
        let mut set = |i: usize, j: usize, k: usize, v: i64, t: &mut Vec<Scalar>| {
            t[(i * r + j) * r + k] = s(v);
        };
        // e0 = unit
        for j in 0..r {
            set(0, j, j, 1, &mut table);
            set(j, 0, j, 1, &mut table);
        }
        set(0, 0, 0, 1, &mut table);
        // e1*e1 = e2, e1*e2 = e2*e1 = 0, e2*e2 = e1  (not associative:
        // (e1 e1) e1 = e2 e1 = 0 but e1 (e1 e1) = 0; try (e2 e2) e1 = e1 e1 = e2
        // vs e2 (e2 e1) = 0)
        set(1, 1, 2, 1, &mut table);
        set(2, 2, 1, 1, &mut table);
        let err = MultTableAlgebra::new(
            z.clone(),
            r,
            vec!["1".into(), "a".into(), "b".into()],
            table,
            vec![s(1), s(0), s(0)],
        )
        .unwrap_err();
        assert!(matches!(err, Error::NonAssociative(..)), "{err:?}");
    }

    #[test]
    fn regular_action_and_mult_matrix() {
        let zi = gaussian_integers();
        let triple = GoodTriple::regular(&zi);
        let i = zi.basis_element(1);
        let m = triple.mult_matrix(&i).unwrap();
        let z = BaseRing::Int;
        // acting on basis {1, i}: i*1 = i, i*i = -1
        let expect = Mat::from_rows(
            &z,
            vec![
                vec![z.from_i64(0), z.from_i64(-1)],
                vec![z.from_i64(1), z.from_i64(0)],
            ],
        )
        .unwrap();
        assert_eq!(m, expect);
        assert_eq!(
            triple.mult_matrix(&zi.one()).unwrap(),
            Mat::identity(&z, 2)
        );
    }

    #[test]
    fn dual_numbers_nilpotent_matrix() {
        let dn = dual_numbers();
        let triple = GoodTriple::regular(&dn);
        let x = dn.basis_element(1);
        let m = triple.mult_matrix(&x).unwrap();
        let q = BaseRing::Rat;
        let expect = Mat::from_rows(
            &q,
            vec![
                vec![q.from_i64(0), q.from_i64(0)],
                vec![q.from_i64(1), q.from_i64(0)],
            ],
        )
        .unwrap();
        assert_eq!(m, expect);
    }

    #[test]
    fn mult_matrix_is_multiplicative() {
        let zi = gaussian_integers();
        let triple = GoodTriple::regular(&zi);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let a = zi.sample(&mut rng);
            let b = zi.sample(&mut rng);
            let lhs = triple.mult_matrix(&a.mul(&b).unwrap()).unwrap();
            let rhs = triple
                .mult_matrix(&a)
                .unwrap()
                .mul(&triple.mult_matrix(&b).unwrap())
                .unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn tensor_square_of_gaussians() {
        let zi = gaussian_integers();
        let prod = tensor_algebra(&zi, &zi, &BaseRing::Int).unwrap();
        assert_eq!(prod.rank(), 4);
        // (i (x) 1)^2 = -1 (x) 1 = -unit
        let i_tensor_1 = prod.basis_element(1 + 2 * 0);
        let sq = i_tensor_1.mul(&i_tensor_1).unwrap();
        let minus_one = prod.one().scale(&BaseRing::Int.from_i64(-1));
        assert_eq!(sq, minus_one);
    }

    #[test]
    fn rank_one_tensor_is_base() {
        let z = BaseRing::Int;
        let triv = MultTableAlgebra::new(
            z.clone(),
            1,
            vec!["1".into()],
            vec![z.one()],
            vec![z.one()],
        )
        .unwrap();
        let prod = tensor_algebra(&triv, &triv, &z).unwrap();
        assert_eq!(prod.rank(), 1);
        assert_eq!(prod.base(), &z);
    }

    #[test]
    fn tower_sqrt2_sqrt3() {
        // Q ⊂ Q[sqrt2] ⊂ Q[sqrt2][sqrt3], flattened to a rank-4 Q-algebra
        let q = BaseRing::Rat;
        let s = |n: i64| q.from_i64(n);
        let b = MultTableAlgebra::new(
            q.clone(),
            2,
            vec!["1".into(), "r2".into()],
            vec![s(1), s(0), s(0), s(1), s(0), s(1), s(2), s(0)],
            vec![s(1), s(0)],
        )
        .unwrap();
        // C = B[y]/(y^2 - 3): lower coefficients of f are [3, 0]
        let three = b.scalar_element(&s(3)).unwrap();
        let zero = b.zero();
        let c = TowerAlgebra::monogenic(&b, vec![three, zero], "r3").unwrap();
        assert_eq!(c.rank(), 2);
        let flat = c.compose().unwrap();
        assert_eq!(flat.rank(), 4);
        // (sqrt2 * sqrt3)^2 = 6
        let r2r3 = flat.basis_element(1 + 2 * 1);
        let sq = r2r3.mul(&r2r3).unwrap();
        assert_eq!(sq, flat.one().scale(&s(6)));
    }

    #[test]
    fn tower_with_trivial_base_is_unchanged() {
        // B = A: flattening C over A(=B) reproduces C's table
        let z = BaseRing::Int;
        let triv = MultTableAlgebra::new(
            z.clone(),
            1,
            vec!["1".into()],
            vec![z.one()],
            vec![z.one()],
        )
        .unwrap();
        let c = TowerAlgebra::monogenic(
            &triv,
            vec![triv.scalar_element(&z.from_i64(-1)).unwrap(), triv.zero()],
            "i",
        )
        .unwrap();
        let flat = c.compose().unwrap();
        assert_eq!(flat.rank(), 2);
        let i = flat.basis_element(1);
        assert_eq!(i.mul(&i).unwrap(), flat.one().scale(&z.from_i64(-1)));
    }

    #[test]
    fn algebra_json_round_trip() {
        let zi = gaussian_integers();
        let j = zi.to_json();
        let back = MultTableAlgebra::from_json(&j).unwrap();
        assert_eq!(*zi, *back);
        assert_eq!(j.to_string(), back.to_json().to_string());
    }
}
