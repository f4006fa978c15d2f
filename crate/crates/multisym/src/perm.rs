//! Permutations of `[n]` and the standard embeddings of products, grids and
//! wreath products into larger symmetric groups.  Indices are 0-based
//! internally; the grid identification sends `(x, y)` to `x + m*y` with the
//! first coordinate varying fastest.

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Permutation {
        Permutation { images: (0..n).collect() }
    }

    pub fn from_images(images: Vec<usize>) -> Result<Permutation> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i >= n || seen[i] {
                return Err(Error::Invalid("not a bijection".into()));
            }
            seen[i] = true;
        }
        Ok(Permutation { images })
    }

    pub fn transposition(n: usize, i: usize, j: usize) -> Permutation {
        let mut images: Vec<usize> = (0..n).collect();
        images.swap(i, j);
        Permutation { images }
    }

    pub fn cycle(n: usize) -> Permutation {
        Permutation { images: (0..n).map(|i| (i + 1) % n).collect() }
    }

    pub fn n(&self) -> usize {
        self.images.len()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// `self` after `other`: (self * other)(i) = self(other(i)).
    pub fn compose(&self, other: &Permutation) -> Permutation {
        Permutation { images: other.images.iter().map(|&i| self.images[i]).collect() }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.images.len()];
        for (i, &j) in self.images.iter().enumerate() {
            inv[j] = i;
        }
        Permutation { images: inv }
    }

    pub fn sign(&self) -> i64 {
        let mut seen = vec![false; self.images.len()];
        let mut sign = 1i64;
        for start in 0..self.images.len() {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                i = self.images[i];
                len += 1;
            }
            if len % 2 == 0 {
                sign = -sign;
            }
        }
        sign
    }

    /// Standard generators of `S_n`.
    pub fn symmetric_group_generators(n: usize) -> Vec<Permutation> {
        match n {
            0 | 1 => vec![],
            2 => vec![Permutation::transposition(2, 0, 1)],
            _ => vec![Permutation::transposition(n, 0, 1), Permutation::cycle(n)],
        }
    }

    /// All n! permutations; intended for small n only.
    pub fn all(n: usize) -> Vec<Permutation> {
        let mut out = Vec::new();
        let mut v: Vec<usize> = (0..n).collect();
        fn rec(v: &mut Vec<usize>, k: usize, out: &mut Vec<Permutation>) {
            if k == v.len() {
                out.push(Permutation { images: v.clone() });
                return;
            }
            for i in k..v.len() {
                v.swap(k, i);
                rec(v, k + 1, out);
                v.swap(k, i);
            }
        }
        rec(&mut v, 0, &mut out);
        out
    }
}

/// The three embeddings of permutation groups into larger symmetric groups
/// fixed by the index conventions above.
#[derive(Clone, Debug)]
pub enum GroupEmbedding {
    /// `S_{n_1} x ... x S_{n_r}` into `S_{n_1 + ... + n_r}`, acting blockwise.
    Product { block_sizes: Vec<usize> },
    /// `S_m x S_n` into `S_{mn}` preserving rows and columns of the
    /// `(x, y) -> x + m*y` grid.
    Grid { m: usize, n: usize },
    /// `S_m x (S_n)^m` into `S_{mn}` preserving columns of the grid: the
    /// outer permutation moves columns, each column carries its own inner
    /// permutation.
    Wreath { m: usize, n: usize },
}

impl GroupEmbedding {
    pub fn degree(&self) -> usize {
        match self {
            GroupEmbedding::Product { block_sizes } => block_sizes.iter().sum(),
            GroupEmbedding::Grid { m, n } | GroupEmbedding::Wreath { m, n } => m * n,
        }
    }

    pub fn embed_product(block_sizes: &[usize], parts: &[Permutation]) -> Result<Permutation> {
        if block_sizes.len() != parts.len() {
            return Err(Error::ShapeMismatch("product embedding arity".into()));
        }
        let total: usize = block_sizes.iter().sum();
        let mut images = Vec::with_capacity(total);
        let mut offset = 0;
        for (sz, p) in block_sizes.iter().zip(parts) {
            if p.n() != *sz {
                return Err(Error::ShapeMismatch("block size".into()));
            }
            for i in 0..*sz {
                images.push(offset + p.apply(i));
            }
            offset += sz;
        }
        Permutation::from_images(images)
    }

    pub fn embed_grid(m: usize, n: usize, sm: &Permutation, sn: &Permutation) -> Result<Permutation> {
        if sm.n() != m || sn.n() != n {
            return Err(Error::ShapeMismatch("grid embedding degrees".into()));
        }
        let mut images = vec![0; m * n];
        for x in 0..m {
            for y in 0..n {
                images[x + m * y] = sm.apply(x) + m * sn.apply(y);
            }
        }
        Permutation::from_images(images)
    }

    /// `(outer; inner_1, ..., inner_m)` with the outer permutation moving
    /// columns: grid slot `(x, y)` goes to `(outer(x), inner_x(y))`.
    pub fn embed_wreath(
        m: usize,
        n: usize,
        outer: &Permutation,
        inners: &[Permutation],
    ) -> Result<Permutation> {
        if outer.n() != m || inners.len() != m || inners.iter().any(|p| p.n() != n) {
            return Err(Error::ShapeMismatch("wreath embedding degrees".into()));
        }
        let mut images = vec![0; m * n];
        for x in 0..m {
            for y in 0..n {
                images[x + m * y] = outer.apply(x) + m * inners[x].apply(y);
            }
        }
        Permutation::from_images(images)
    }

    /// Generators of the image subgroup inside the big symmetric group.
    pub fn subgroup_generators(&self) -> Vec<Permutation> {
        match self {
            GroupEmbedding::Product { block_sizes } => {
                let mut gens = Vec::new();
                for (b, _) in block_sizes.iter().enumerate() {
                    for g in Permutation::symmetric_group_generators(block_sizes[b]) {
                        let parts: Vec<Permutation> = block_sizes
                            .iter()
                            .enumerate()
                            .map(|(i, &sz)| {
                                if i == b {
                                    g.clone()
                                } else {
                                    Permutation::identity(sz)
                                }
                            })
                            .collect();
                        gens.push(Self::embed_product(block_sizes, &parts).expect("embed"));
                    }
                }
                gens
            }
            GroupEmbedding::Grid { m, n } => {
                let mut gens = Vec::new();
                for g in Permutation::symmetric_group_generators(*m) {
                    gens.push(Self::embed_grid(*m, *n, &g, &Permutation::identity(*n)).unwrap());
                }
                for g in Permutation::symmetric_group_generators(*n) {
                    gens.push(Self::embed_grid(*m, *n, &Permutation::identity(*m), &g).unwrap());
                }
                gens
            }
            GroupEmbedding::Wreath { m, n } => {
                let mut gens = Vec::new();
                let id_inners: Vec<Permutation> =
                    (0..*m).map(|_| Permutation::identity(*n)).collect();
                for g in Permutation::symmetric_group_generators(*m) {
                    gens.push(Self::embed_wreath(*m, *n, &g, &id_inners).unwrap());
                }
                // inner generators in the first column suffice together with
                // the column-permuting outer part
                for g in Permutation::symmetric_group_generators(*n) {
                    let mut inners = id_inners.clone();
                    if *m > 0 {
                        inners[0] = g.clone();
                    }
                    gens.push(
                        Self::embed_wreath(*m, *n, &Permutation::identity(*m), &inners).unwrap(),
                    );
                }
                gens
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_perm(n: usize, rng: &mut ChaCha8Rng) -> Permutation {
        let mut v: Vec<usize> = (0..n).collect();
        v.shuffle(rng);
        Permutation::from_images(v).unwrap()
    }

    #[test]
    fn sign_of_transposition() {
        assert_eq!(Permutation::transposition(4, 1, 3).sign(), -1);
        assert_eq!(Permutation::identity(4).sign(), 1);
        assert_eq!(Permutation::cycle(3).sign(), 1);
    }

    #[test]
    fn embeddings_are_homomorphisms() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let (m, n) = (3, 2);
            let a1 = random_perm(m, &mut rng);
            let a2 = random_perm(m, &mut rng);
            let b1 = random_perm(n, &mut rng);
            let b2 = random_perm(n, &mut rng);
            // product
            let lhs = GroupEmbedding::embed_product(
                &[m, n],
                &[a1.compose(&a2), b1.compose(&b2)],
            )
            .unwrap();
            let rhs = GroupEmbedding::embed_product(&[m, n], &[a1.clone(), b1.clone()])
                .unwrap()
                .compose(&GroupEmbedding::embed_product(&[m, n], &[a2.clone(), b2.clone()]).unwrap());
            assert_eq!(lhs, rhs);
            // grid
            let lhs = GroupEmbedding::embed_grid(m, n, &a1.compose(&a2), &b1.compose(&b2)).unwrap();
            let rhs = GroupEmbedding::embed_grid(m, n, &a1, &b1)
                .unwrap()
                .compose(&GroupEmbedding::embed_grid(m, n, &a2, &b2).unwrap());
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn embeddings_are_injective() {
        let (m, n) = (2, 2);
        let mut seen = std::collections::HashSet::new();
        for a in Permutation::all(m) {
            for b in Permutation::all(n) {
                let img = GroupEmbedding::embed_grid(m, n, &a, &b).unwrap();
                assert!(seen.insert(img.images().to_vec()), "grid embedding not injective");
            }
        }
        assert_eq!(seen.len(), 4);
    }

    #[test]
    fn wreath_composition_law() {
        // (sigma; tau_1..tau_m) . (sigma'; tau'_1..tau'_m)
        //   = (sigma sigma'; tau_{sigma'(x)} tau'_x)
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let (m, n) = (3, 2);
        for _ in 0..20 {
            let s1 = random_perm(m, &mut rng);
            let s2 = random_perm(m, &mut rng);
            let t1: Vec<Permutation> = (0..m).map(|_| random_perm(n, &mut rng)).collect();
            let t2: Vec<Permutation> = (0..m).map(|_| random_perm(n, &mut rng)).collect();
            let g1 = GroupEmbedding::embed_wreath(m, n, &s1, &t1).unwrap();
            let g2 = GroupEmbedding::embed_wreath(m, n, &s2, &t2).unwrap();
            let prod_inners: Vec<Permutation> =
                (0..m).map(|x| t1[s2.apply(x)].compose(&t2[x])).collect();
            let expect =
                GroupEmbedding::embed_wreath(m, n, &s1.compose(&s2), &prod_inners).unwrap();
            assert_eq!(g1.compose(&g2), expect);
        }
    }

    #[test]
    fn wreath_preserves_columns() {
        // the image subgroup keeps "same column" (same residue of x) intact
        let (m, n) = (2, 3);
        for g in (GroupEmbedding::Wreath { m, n }).subgroup_generators() {
            for a in 0..m * n {
                for b in 0..m * n {
                    if a % m == b % m {
                        assert_eq!(g.apply(a) % m, g.apply(b) % m);
                    }
                }
            }
        }
    }
}
