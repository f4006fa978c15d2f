//! Stock algebras, triples and towers used by the identity suites and tests:
//! small hand-checked tables plus seeded random generators built from
//! companion matrices, which are valid by construction.

use std::sync::Arc;

use rand::Rng;

use crate::algebra::{AlgElement, GoodTriple, MultTableAlgebra, TowerAlgebra};
use crate::linalg::Mat;
use crate::ring::{BaseRing, Scalar};

/// Z[i]: rank 2 over Z with i^2 = -1.
pub fn gaussian_integers() -> Arc<MultTableAlgebra> {
    let z = BaseRing::Int;
    let s = |n: i64| z.from_i64(n);
    let table = vec![
        s(1), s(0), // 1*1
        s(0), s(1), // 1*i
        s(0), s(1), // i*1
        s(-1), s(0), // i*i
    ];
    MultTableAlgebra::new(z.clone(), 2, vec!["1".into(), "i".into()], table, vec![s(1), s(0)])
        .expect("valid table")
}

/// F_4 = F_2[w]/(w^2 + w + 1) over F_2.
pub fn f4_over_f2() -> Arc<MultTableAlgebra> {
    let f2 = BaseRing::prime_field(2).expect("2 is prime");
    let s = |n: i64| f2.from_i64(n);
    let table = vec![
        s(1), s(0),
        s(0), s(1),
        s(0), s(1),
        s(1), s(1), // w*w = w + 1
    ];
    MultTableAlgebra::new(f2.clone(), 2, vec!["1".into(), "w".into()], table, vec![s(1), s(0)])
        .expect("valid table")
}

/// Q[x]/(x^2), the dual numbers.
pub fn dual_numbers() -> Arc<MultTableAlgebra> {
    let q = BaseRing::Rat;
    let s = |n: i64| q.from_i64(n);
    let table = vec![
        s(1), s(0),
        s(0), s(1),
        s(0), s(1),
        s(0), s(0), // x*x = 0
    ];
    MultTableAlgebra::new(q.clone(), 2, vec!["1".into(), "x".into()], table, vec![s(1), s(0)])
        .expect("valid table")
}

/// Q[sqrt(2)].
pub fn sqrt2_over_q() -> Arc<MultTableAlgebra> {
    let q = BaseRing::Rat;
    let s = |n: i64| q.from_i64(n);
    let table = vec![
        s(1), s(0),
        s(0), s(1),
        s(0), s(1),
        s(2), s(0),
    ];
    MultTableAlgebra::new(q.clone(), 2, vec!["1".into(), "r2".into()], table, vec![s(1), s(0)])
        .expect("valid table")
}

/// The rank-1 algebra `A` over itself.
pub fn trivial_algebra(base: &BaseRing) -> Arc<MultTableAlgebra> {
    MultTableAlgebra::new(
        base.clone(),
        1,
        vec!["1".into()],
        vec![base.one()],
        vec![base.one()],
    )
    .expect("valid table")
}

/// `A[x]/(f)` where `f = x^n - (c_{n-1} x^{n-1} + ... + c_0)`, as a table
/// algebra with basis `1, x, ..., x^{n-1}`.
pub fn monogenic_algebra(
    base: &BaseRing,
    lower_coeffs: &[Scalar],
    var: &str,
) -> Arc<MultTableAlgebra> {
    let triv = trivial_algebra(base);
    let coeffs: Vec<AlgElement> = lower_coeffs
        .iter()
        .map(|c| triv.scalar_element(c).expect("base scalar"))
        .collect();
    TowerAlgebra::monogenic(&triv, coeffs, var)
        .and_then(|t| t.compose())
        .expect("companion table is valid")
}

/// Random monogenic algebra of the given rank with small integer-like
/// coefficients.
pub fn random_monogenic<R: Rng + ?Sized>(
    base: &BaseRing,
    rank: usize,
    rng: &mut R,
) -> Arc<MultTableAlgebra> {
    let coeffs: Vec<Scalar> = (0..rank).map(|_| base.sample(rng)).collect();
    monogenic_algebra(base, &coeffs, "x")
}

/// Random good triple `(M|B|A)`: `B = A[x]/(chi)` for the characteristic
/// polynomial `chi` of a random `n x n` action matrix `X`, acting on
/// `M = A^n` through `X`.  Cayley-Hamilton makes the action well defined.
/// The matrix is block upper triangular with an `l x l` leading block, so
/// the span of the first `l` basis vectors is `B`-stable.
pub fn random_triple_with_stable_block<R: Rng + ?Sized>(
    base: &BaseRing,
    n: usize,
    l: usize,
    rng: &mut R,
) -> (GoodTriple, usize) {
    assert!(l <= n);
    let mut x = Mat::zeros(base, n, n);
    for i in 0..n {
        for j in 0..n {
            if i >= l && j < l {
                continue; // keep the lower-left block zero
            }
            *x.at_mut(i, j) = base.sample(rng);
        }
    }
    let chi = x.charpoly_monic().expect("square");
    // chi = x^n + a_{n-1} x^{n-1} + ... + a_0; lower coefficients of the
    // monogenic presentation are -a_k
    let lower: Vec<Scalar> = chi[..n].iter().map(Scalar::neg).collect();
    let algebra = monogenic_algebra(base, &lower, "x");
    // action of x^k on M is X^k
    let mut action = Vec::with_capacity(n);
    let mut pow = Mat::identity(base, n);
    for _ in 0..n {
        action.push(pow.clone());
        pow = pow.mul(&x).expect("square");
    }
    let triple = GoodTriple::new(algebra, n, action).expect("Cayley-Hamilton");
    (triple, l)
}

/// Random good triple without a distinguished stable block.
pub fn random_triple<R: Rng + ?Sized>(base: &BaseRing, n: usize, rng: &mut R) -> GoodTriple {
    random_triple_with_stable_block(base, n, n, rng).0
}

/// Random tower `C|B|A` with `B = A[x]/(f)` of rank `m` and `C = B[y]/(g)`
/// of rank `n`.
pub fn random_tower<R: Rng + ?Sized>(
    base: &BaseRing,
    m: usize,
    n: usize,
    rng: &mut R,
) -> (Arc<MultTableAlgebra>, TowerAlgebra) {
    let b = random_monogenic(base, m, rng);
    let g: Vec<AlgElement> = (0..n).map(|_| b.sample(rng)).collect();
    let c = TowerAlgebra::monogenic(&b, g, "y").expect("monogenic tower");
    (b, c)
}
