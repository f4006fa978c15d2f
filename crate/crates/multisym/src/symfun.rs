//! Symmetric-polynomial machinery: rewriting a symmetric polynomial in the
//! elementary symmetric polynomials by leading-term reduction under the
//! graded-lex order, and the universal polynomials `w_k` relating the
//! characteristic polynomial of a Kronecker product to those of its factors.

use serde_json::{json, Value as Json};

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::ring::{BaseRing, Monomial, Scalar};

/// A polynomial in formal symbols standing for elementary symmetric
/// polynomials of one or two alphabets: `u_1..u_m` for the first, `v_1..v_n`
/// for the second.  Evaluating `expr` at `u_i = sigma_i(a)`, `v_j =
/// sigma_j(b)` recovers the encoded symmetric polynomial.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SymPolyExpr {
    pub m: usize,
    pub n: Option<usize>,
    pub expr: Scalar,
}

impl SymPolyExpr {
    pub fn ring(m: usize, n: Option<usize>, coeff: &BaseRing) -> Result<BaseRing> {
        let mut vars: Vec<String> = (1..=m).map(|i| format!("u{i}")).collect();
        if let Some(n) = n {
            vars.extend((1..=n).map(|j| format!("v{j}")));
        }
        BaseRing::poly(coeff.clone(), vars)
    }

    pub fn to_json(&self) -> Json {
        let mut obj = json!({
            "m": self.m,
            "expr": self.expr.to_json(),
        });
        if let Some(n) = self.n {
            obj["n"] = json!(n);
        }
        obj
    }

    pub fn from_json(coeff: &BaseRing, v: &Json) -> Result<SymPolyExpr> {
        let m = v
            .get("m")
            .and_then(|x| x.as_u64())
            .ok_or_else(|| Error::Json("SymPolyExpr needs `m`".into()))? as usize;
        let n = v.get("n").and_then(|x| x.as_u64()).map(|x| x as usize);
        let ring = SymPolyExpr::ring(m, n, coeff)?;
        let expr = Scalar::from_json(
            &ring,
            v.get("expr").ok_or_else(|| Error::Json("SymPolyExpr needs `expr`".into()))?,
        )?;
        Ok(SymPolyExpr { m, n, expr })
    }
}

/// `sigma_k` of the variables at positions `vars` of `ring`, `k >= 1`.
fn elementary_sym(ring: &BaseRing, vars: &[usize], k: usize) -> Scalar {
    let nvars = ring.vars().len();
    let mut acc = ring.zero();
    // all k-subsets of vars
    let mut idx: Vec<usize> = (0..k).collect();
    if k > vars.len() {
        return acc;
    }
    loop {
        let mut exps = vec![0u32; nvars];
        for &i in &idx {
            exps[vars[i]] = 1;
        }
        acc = acc.add(&ring.monomial(exps, ring.coeff_ring().one()).expect("shape"));
        // next combination
        let mut i = k;
        loop {
            if i == 0 {
                return acc;
            }
            i -= 1;
            if idx[i] != i + vars.len() - k {
                break;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Swaps two variables of every term.
fn swap_vars(p: &Scalar, a: usize, b: usize) -> Scalar {
    let ring = p.ring().clone();
    let terms = p.terms().expect("polynomial");
    let swapped: Vec<(Vec<u32>, Scalar)> = terms
        .iter()
        .map(|(m, c)| {
            let mut e = m.0.clone();
            e.swap(a, b);
            (e, c.clone())
        })
        .collect();
    Scalar::from_terms(&ring, swapped).expect("same ring")
}

/// Checks invariance of `p` under all transpositions of the listed variable
/// positions; reports the first violated pair.
pub fn check_symmetric(p: &Scalar, vars: &[usize]) -> Result<()> {
    for i in 0..vars.len() {
        for j in i + 1..vars.len() {
            if swap_vars(p, vars[i], vars[j]) != *p {
                return Err(Error::NotSymmetric(vars[i], vars[j]));
            }
        }
    }
    Ok(())
}

/// Core reduction: rewrites `p`, symmetric in the variable positions
/// `alphabet` of its ring, as a polynomial in the elementary symmetric
/// polynomials of those variables.  Every monomial of the result stands for
/// `prod_k sigma_k^{e_k}`; its coefficients are polynomials in the remaining
/// variables.  Deterministic: always cancels the graded-lex leading term.
fn decompose_in_vars(p: &Scalar, alphabet: &[usize]) -> Result<Vec<(Vec<u32>, Scalar)>> {
    check_symmetric(p, alphabet)?;
    let ring = p.ring().clone();
    let m = alphabet.len();
    let mut rest = p.clone();
    let mut out: Vec<(Vec<u32>, Scalar)> = Vec::new();
    let mut sigma_cache: Vec<Option<Scalar>> = vec![None; m + 1];
    while !rest.is_zero() {
        // graded-lex maximal alphabet-exponent pattern among the terms
        let terms = rest.terms()?;
        let key = |mono: &Monomial| -> Monomial {
            Monomial(alphabet.iter().map(|&v| mono.0[v]).collect())
        };
        let lead = terms.iter().map(|(mono, _)| key(mono)).max().expect("nonzero");
        // for a symmetric polynomial the leading pattern is weakly decreasing
        for w in lead.0.windows(2) {
            if w[0] < w[1] {
                return Err(Error::Invalid(
                    "leading exponent pattern of a symmetric polynomial must be sorted".into(),
                ));
            }
        }
        // collect the full coefficient of the leading alphabet-monomial: the
        // sum of terms whose alphabet part equals `lead`, divided by it
        let mut coeff_terms: Vec<(Vec<u32>, Scalar)> = Vec::new();
        for (mono, c) in terms {
            if key(mono) == lead {
                let mut e = mono.0.clone();
                for &v in alphabet {
                    e[v] = 0;
                }
                coeff_terms.push((e, c.clone()));
            }
        }
        let coeff = Scalar::from_terms(&ring, coeff_terms)?;
        // sigma-product exponents: lambda_i - lambda_{i+1} on sigma_i,
        // lambda_m on sigma_m
        let mut sig_exps = vec![0u32; m];
        for i in 0..m {
            let next = if i + 1 < m { lead.0[i + 1] } else { 0 };
            sig_exps[i] = lead.0[i] - next;
        }
        // subtract coeff * prod sigma_i^{sig_exps[i]}
        let mut prod = coeff.clone();
        for (i, &e) in sig_exps.iter().enumerate() {
            if e > 0 {
                if sigma_cache[i + 1].is_none() {
                    sigma_cache[i + 1] = Some(elementary_sym(&ring, alphabet, i + 1));
                }
                prod = prod.mul(&sigma_cache[i + 1].as_ref().unwrap().pow(e));
            }
        }
        rest = rest.sub(&prod);
        out.push((sig_exps, coeff));
    }
    Ok(out)
}

/// Rewrites a polynomial symmetric in the variables `a_1..a_m` (they must be
/// the ring's variables, in order) as a `SymPolyExpr` in `u_1..u_m`.  The
/// round trip is verified by the caller's tests via [`evaluate_single`].
pub fn elementary_decompose(p: &Scalar) -> Result<SymPolyExpr> {
    let ring = p.ring().clone();
    let m = ring.vars().len();
    let alphabet: Vec<usize> = (0..m).collect();
    let parts = decompose_in_vars(p, &alphabet)?;
    let coeff_ring = ring.coeff_ring().clone();
    let target = SymPolyExpr::ring(m, None, &coeff_ring)?;
    let mut terms: Vec<(Vec<u32>, Scalar)> = Vec::new();
    for (sig_exps, coeff) in parts {
        // the coefficient has no alphabet variables left; it is constant here
        let c = constant_coeff(&coeff)?;
        terms.push((sig_exps, c));
    }
    let expr = Scalar::from_terms(&target, terms)?;
    Ok(SymPolyExpr { m, n: None, expr })
}

/// Rewrites a polynomial in `a_1..a_m, b_1..b_n` (the ring's variables, in
/// that order), symmetric in each alphabet separately, as a `SymPolyExpr` in
/// `u_1..u_m, v_1..v_n`.  Decomposition runs alphabet by alphabet.
pub fn elementary_decompose_two(p: &Scalar, m: usize, n: usize) -> Result<SymPolyExpr> {
    let ring = p.ring().clone();
    if ring.vars().len() != m + n {
        return Err(Error::ShapeMismatch("variable count".into()));
    }
    let a_vars: Vec<usize> = (0..m).collect();
    let b_vars: Vec<usize> = (m..m + n).collect();
    let coeff_ring = ring.coeff_ring().clone();
    let target = SymPolyExpr::ring(m, Some(n), &coeff_ring)?;
    let mut terms: Vec<(Vec<u32>, Scalar)> = Vec::new();
    for (u_exps, coeff_b) in decompose_in_vars(p, &a_vars)? {
        // coeff_b is a polynomial in the b-variables, symmetric in them
        for (v_exps, coeff) in decompose_in_vars(&coeff_b, &b_vars)? {
            let c = constant_coeff(&coeff)?;
            let mut exps = u_exps.clone();
            exps.extend(v_exps);
            terms.push((exps, c));
        }
    }
    let expr = Scalar::from_terms(&target, terms)?;
    Ok(SymPolyExpr { m, n: Some(n), expr })
}

fn constant_coeff(p: &Scalar) -> Result<Scalar> {
    let mut acc = p.ring().coeff_ring().zero();
    for (mono, c) in p.terms()? {
        if mono.degree() != 0 {
            return Err(Error::Invalid("unexpected leftover variable".into()));
        }
        acc = acc.add(c);
    }
    Ok(acc)
}

/// Evaluates a one-alphabet `SymPolyExpr` back at `u_i = sigma_i(a)` in the
/// ring of `a_1..a_m` over the same coefficients.
pub fn evaluate_single(e: &SymPolyExpr, ring_a: &BaseRing) -> Result<Scalar> {
    let vars: Vec<usize> = (0..ring_a.vars().len()).collect();
    let sigmas: Vec<Scalar> =
        (1..=e.m).map(|k| elementary_sym(ring_a, &vars, k)).collect();
    substitute(&e.expr, ring_a, &sigmas)
}

/// Substitutes `vals` for the ring variables of `expr`, mapping coefficients
/// through the canonical inclusion.
pub fn substitute(expr: &Scalar, target: &BaseRing, vals: &[Scalar]) -> Result<Scalar> {
    let mut acc = target.zero();
    for (mono, c) in expr.terms()? {
        let mut term = target.from_scalar_coeff(c)?;
        for (e, val) in mono.0.iter().zip(vals) {
            if *e > 0 {
                term = term.mul(&val.pow(*e));
            }
        }
        acc = acc.add(&term);
    }
    Ok(acc)
}

/// The polynomials `w_0 = 1, w_1, ..., w_{mn}` with
/// `prod_{i,j} (t + a_i b_j) = sum_k w_k(sigma(a), sigma(b)) t^{mn-k}`.
pub fn compute_wk(m: usize, n: usize, max_mn: usize) -> Result<Vec<SymPolyExpr>> {
    if m == 0 || n == 0 {
        return Err(Error::Invalid("alphabet sizes must be positive".into()));
    }
    if m * n > max_mn {
        return Err(Error::ResourceCap(format!(
            "mn = {} exceeds the cap {max_mn}",
            m * n
        )));
    }
    // ring Z[a_1..a_m, b_1..b_n, t] with t the distinguished last variable
    let mut vars: Vec<String> = (1..=m).map(|i| format!("a{i}")).collect();
    vars.extend((1..=n).map(|j| format!("b{j}")));
    let ring_ab = BaseRing::poly(BaseRing::Int, vars)?;
    let ring = ring_ab.poly_extend("t")?;
    let t = ring.var("t")?;
    let mut prod = ring.one();
    for i in 1..=m {
        let a = ring.var(&format!("a{i}"))?;
        for j in 1..=n {
            let b = ring.var(&format!("b{j}"))?;
            prod = prod.mul(&t.add(&a.mul(&b)));
        }
    }
    let mn = m * n;
    let mut out = Vec::with_capacity(mn + 1);
    for k in 0..=mn {
        let coeff = prod.coeff_of_last_var((mn - k) as u32)?;
        let coeff = if ring_ab.vars().is_empty() {
            unreachable!("m, n >= 1")
        } else {
            coeff
        };
        out.push(elementary_decompose_two(&coeff, m, n)?);
    }
    Ok(out)
}

/// Outcome of the matrix-side check of the `w_k` table: either both routes
/// agree, or the first mismatching `t`-coefficient is reported.
#[derive(Clone, Debug, PartialEq)]
pub enum WkWitness {
    Verified,
    Mismatch { k: usize, lhs: Scalar, rhs: Scalar },
}

/// Checks `det(t + X (x) Y) = sum_k w_k(chi(X), chi(Y)) t^{mn-k}` for
/// concrete square matrices over a common ring, with the determinant side
/// computed directly from the Kronecker product.
pub fn verify_wk_on_matrices(wk: &[SymPolyExpr], x: &Mat, y: &Mat) -> Result<WkWitness> {
    let m = x.nrows();
    let n = y.nrows();
    if x.ncols() != m || y.ncols() != n {
        return Err(Error::ShapeMismatch("square matrices required".into()));
    }
    if wk.len() != m * n + 1 {
        return Err(Error::ShapeMismatch("w_k table size".into()));
    }
    if x.ring() != y.ring() {
        return Err(Error::RingMismatch {
            expected: x.ring().to_string(),
            got: y.ring().to_string(),
        });
    }
    let ring = x.ring().clone();
    let chi_x = x.alternating_charpoly()?; // chi_0..chi_m
    let chi_y = y.alternating_charpoly()?;
    let kron = x.kronecker(y);
    let det_side = kron.alternating_charpoly()?; // coefficients of t^{mn-k}
    // w_k evaluated at (chi_1(X)..chi_m(X), chi_1(Y)..chi_n(Y))
    let mut vals: Vec<Scalar> = chi_x[1..].to_vec();
    vals.extend(chi_y[1..].iter().cloned());
    for (k, w) in wk.iter().enumerate() {
        let rhs = substitute(&w.expr, &ring, &vals)?;
        if rhs != det_side[k] {
            return Ok(WkWitness::Mismatch { k, lhs: det_side[k].clone(), rhs });
        }
    }
    Ok(WkWitness::Verified)
}

impl BaseRing {
    /// Lifts a coefficient-ring element into this polynomial ring (or, for a
    /// ground ring, checks it already lives here).
    pub fn from_scalar_coeff(&self, c: &Scalar) -> Result<Scalar> {
        match self {
            BaseRing::Poly { .. } => {
                if c.ring() != self.coeff_ring() {
                    return Err(Error::RingMismatch {
                        expected: self.coeff_ring().to_string(),
                        got: c.ring().to_string(),
                    });
                }
                if c.is_zero() {
                    return Ok(self.zero());
                }
                self.monomial(vec![0; self.vars().len()], c.clone())
            }
            _ => {
                if c.ring() != self {
                    return Err(Error::RingMismatch {
                        expected: self.to_string(),
                        got: c.ring().to_string(),
                    });
                }
                Ok(c.clone())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ring_a(m: usize) -> BaseRing {
        BaseRing::poly(
            BaseRing::Int,
            (1..=m).map(|i| format!("a{i}")).collect(),
        )
        .unwrap()
    }

    #[test]
    fn sigma_one_decomposes_to_u1() {
        let r = ring_a(2);
        let p = r.var("a1").unwrap().add(&r.var("a2").unwrap());
        let e = elementary_decompose(&p).unwrap();
        let ur = SymPolyExpr::ring(2, None, &BaseRing::Int).unwrap();
        assert_eq!(e.expr, ur.var("u1").unwrap());
    }

    #[test]
    fn power_sum_two() {
        // a1^2 + a2^2 = u1^2 - 2 u2, hand-expanded oracle
        let r = ring_a(2);
        let p = r.var("a1").unwrap().pow(2).add(&r.var("a2").unwrap().pow(2));
        let e = elementary_decompose(&p).unwrap();
        let ur = SymPolyExpr::ring(2, None, &BaseRing::Int).unwrap();
        let expect = ur
            .var("u1")
            .unwrap()
            .pow(2)
            .sub(&ur.var("u2").unwrap().scale_int(&2.into()));
        assert_eq!(e.expr, expect);
        assert_eq!(evaluate_single(&e, &r).unwrap(), p);
    }

    #[test]
    fn product_plus_constant() {
        let r = ring_a(2);
        let p = r
            .var("a1")
            .unwrap()
            .mul(&r.var("a2").unwrap())
            .add(&r.one());
        let e = elementary_decompose(&p).unwrap();
        let ur = SymPolyExpr::ring(2, None, &BaseRing::Int).unwrap();
        assert_eq!(e.expr, ur.var("u2").unwrap().add(&ur.one()));
    }

    #[test]
    fn asymmetric_rejected_with_witness() {
        let r = ring_a(2);
        let p = r.var("a1").unwrap();
        assert_eq!(elementary_decompose(&p).unwrap_err(), Error::NotSymmetric(0, 1));
    }

    fn random_symmetric(r: &BaseRing, m: usize, rng: &mut ChaCha8Rng) -> Scalar {
        // symmetrize a random polynomial over all m! permutations
        let mut p = r.zero();
        for _ in 0..3 {
            let mut term = r.one();
            for i in 1..=m {
                let e = rng.gen_range(0..=2);
                term = term.mul(&r.var(&format!("a{i}")).unwrap().pow(e));
            }
            p = p.add(&term.scale_int(&rng.gen_range(-3..=3i64).into()));
        }
        let mut acc = r.zero();
        let perms = crate::perm::Permutation::all(m);
        for perm in &perms {
            let terms = p.terms().unwrap();
            let moved: Vec<(Vec<u32>, Scalar)> = terms
                .iter()
                .map(|(mono, c)| {
                    let mut e = vec![0u32; m];
                    for (i, &x) in mono.0.iter().enumerate() {
                        e[perm.apply(i)] = x;
                    }
                    (e, c.clone())
                })
                .collect();
            acc = acc.add(&Scalar::from_terms(r, moved).unwrap());
        }
        acc
    }

    #[test]
    fn round_trip_and_determinism_sampled() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for m in 1..=4usize {
            let r = ring_a(m);
            for _ in 0..8 {
                let p = random_symmetric(&r, m, &mut rng);
                let e1 = elementary_decompose(&p).unwrap();
                let e2 = elementary_decompose(&p).unwrap();
                assert_eq!(e1, e2);
                assert_eq!(evaluate_single(&e1, &r).unwrap(), p);
            }
        }
    }

    #[test]
    fn wk_11_is_u1v1() {
        let wk = compute_wk(1, 1, 12).unwrap();
        assert_eq!(wk.len(), 2);
        assert!(wk[0].expr.is_one());
        let ring = SymPolyExpr::ring(1, Some(1), &BaseRing::Int).unwrap();
        let expect = ring.var("u1").unwrap().mul(&ring.var("v1").unwrap());
        assert_eq!(wk[1].expr, expect);
    }

    #[test]
    fn wk_against_frozen_oracle() {
        let golden: serde_json::Value = serde_json::from_str(include_str!(
            "../tests/goldens/wk_tables.json"
        ))
        .unwrap();
        for (m, n) in [(1usize, 1usize), (1, 2), (2, 1), (2, 2)] {
            let wk = compute_wk(m, n, 12).unwrap();
            let table = &golden[format!("{m}x{n}")]["table"];
            let ring = SymPolyExpr::ring(m, Some(n), &BaseRing::Int).unwrap();
            for (k, w) in wk.iter().enumerate() {
                let terms = table[k]["terms"]
                    .as_array()
                    .unwrap()
                    .iter()
                    .map(|t| {
                        let exps: Vec<u32> = t["exponents"]
                            .as_array()
                            .unwrap()
                            .iter()
                            .map(|e| e.as_u64().unwrap() as u32)
                            .collect();
                        let c: i64 = t["coeff"].as_str().unwrap().parse().unwrap();
                        (exps, BaseRing::Int.from_i64(c))
                    })
                    .collect();
                let expect = Scalar::from_terms(&ring, terms).unwrap();
                assert_eq!(w.expr, expect, "w_{k} mismatch at (m,n)=({m},{n})");
            }
        }
    }

    #[test]
    fn wk_verified_on_symbolic_diagonals() {
        // diagonal matrices with symbolic entries: the defining identity
        let ring = BaseRing::poly(
            BaseRing::Int,
            vec!["p".into(), "q".into(), "r".into()],
        )
        .unwrap();
        let wk = compute_wk(2, 1, 12).unwrap();
        let x = Mat::from_rows(
            &ring,
            vec![
                vec![ring.var("p").unwrap(), ring.zero()],
                vec![ring.zero(), ring.var("q").unwrap()],
            ],
        )
        .unwrap();
        let y = Mat::from_rows(&ring, vec![vec![ring.var("r").unwrap()]]).unwrap();
        assert_eq!(verify_wk_on_matrices(&wk, &x, &y).unwrap(), WkWitness::Verified);
    }

    #[test]
    fn wk_verified_on_random_integer_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let z = BaseRing::Int;
        for (m, n) in [(1usize, 2usize), (2, 2)] {
            let wk = compute_wk(m, n, 12).unwrap();
            for _ in 0..10 {
                let x = random_mat(&z, m, &mut rng);
                let y = random_mat(&z, n, &mut rng);
                assert_eq!(
                    verify_wk_on_matrices(&wk, &x, &y).unwrap(),
                    WkWitness::Verified
                );
            }
        }
    }

    fn random_mat(ring: &BaseRing, n: usize, rng: &mut ChaCha8Rng) -> Mat {
        Mat::from_rows(
            ring,
            (0..n)
                .map(|_| (0..n).map(|_| ring.sample(rng)).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn identity_1x1_matrices() {
        let wk = compute_wk(1, 1, 12).unwrap();
        let z = BaseRing::Int;
        let x = Mat::identity(&z, 1);
        assert_eq!(
            verify_wk_on_matrices(&wk, &x, &x).unwrap(),
            WkWitness::Verified
        );
    }

    #[test]
    fn resource_cap_enforced() {
        assert!(matches!(compute_wk(4, 4, 12), Err(Error::ResourceCap(_))));
        assert!(compute_wk(4, 3, 12).is_ok());
    }
}
