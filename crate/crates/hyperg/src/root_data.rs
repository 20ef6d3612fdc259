//! Exact root-system data for type A.
//!
//! Roots live in the ambient space R^{n+1} with the standard basis `e_1..e_{n+1}`
//! and inner product `(u, v) = sum u_i v_i`. The simple roots are
//! `alpha_i = e_i - e_{i+1}`, the positive roots `e_i - e_j` for `i < j`, and the
//! Weyl group is the symmetric group on the n+1 coordinates. Every root has
//! squared length 2, so coroots coincide with roots.
//!
//! Root and fundamental-weight data are kept in exact (integer / rational)
//! arithmetic; spectral parameters are complex doubles.

use num_complex::Complex64;
use num_rational::Rational64;

use crate::error::{Error, Result};

pub const MAX_RANK: usize = 8;

const HOMOGENEITY_TOL: f64 = 1e-12;

/// Positive root `e_i - e_j` (`i < j`, zero-based indices into coordinates).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Root {
    i: usize,
    j: usize,
}

impl Root {
    pub fn i(&self) -> usize {
        self.i
    }

    pub fn j(&self) -> usize {
        self.j
    }

    /// Height = number of simple roots in the decomposition = j - i.
    pub fn height(&self) -> usize {
        self.j - self.i
    }

    /// Integer coordinates in the ambient space.
    pub fn coords(&self, dim: usize) -> Vec<i64> {
        let mut v = vec![0i64; dim];
        v[self.i] = 1;
        v[self.j] = -1;
        v
    }

    /// True if this is a simple root; then `j = i + 1`.
    pub fn is_simple(&self) -> bool {
        self.j == self.i + 1
    }
}

impl std::fmt::Display for Root {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "e{} - e{}", self.i + 1, self.j + 1)
    }
}

/// Root system of type A with a fixed rank.
#[derive(Debug, Clone)]
pub struct RootSystem {
    rank: usize,
    positive_roots: Vec<Root>,
    fundamental_weights: Vec<Vec<Rational64>>,
}

/// Builds the rank-`n` system. Positive roots are listed in lexicographic
/// order of `(i, j)`.
pub fn build_root_system(n: usize) -> Result<RootSystem> {
    if n == 0 || n > MAX_RANK {
        return Err(Error::InvalidRank(n));
    }
    let mut positive_roots = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in (i + 1)..=n {
            positive_roots.push(Root { i, j });
        }
    }
    // Lambda_j = e_1 + ... + e_j - (j/(n+1)) * (1, ..., 1), so that
    // (alpha_i, Lambda_j) = delta_ij holds exactly in the ambient space.
    let dim = n + 1;
    let mut fundamental_weights = Vec::with_capacity(n);
    for j in 1..=n {
        let shift = Rational64::new(j as i64, dim as i64);
        let w = (0..dim)
            .map(|l| if l < j { Rational64::from_integer(1) - shift } else { -shift })
            .collect();
        fundamental_weights.push(w);
    }
    Ok(RootSystem {
        rank: n,
        positive_roots,
        fundamental_weights,
    })
}

impl RootSystem {
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Ambient dimension n + 1.
    pub fn dim(&self) -> usize {
        self.rank + 1
    }

    pub fn positive_roots(&self) -> &[Root] {
        &self.positive_roots
    }

    pub fn num_positive_roots(&self) -> usize {
        self.positive_roots.len()
    }

    /// Simple root `alpha_i`, `i` in 1..=n.
    pub fn simple_root(&self, i: usize) -> Root {
        assert!(i >= 1 && i <= self.rank, "simple root index out of range");
        Root { i: i - 1, j: i }
    }

    pub fn simple_roots(&self) -> Vec<Root> {
        (1..=self.rank).map(|i| self.simple_root(i)).collect()
    }

    /// Fundamental weight `Lambda_j` in exact rational coordinates, `j` in 1..=n.
    pub fn fundamental_weight(&self, j: usize) -> &[Rational64] {
        assert!(j >= 1 && j <= self.rank, "fundamental weight index out of range");
        &self.fundamental_weights[j - 1]
    }

    /// Half-sum of positive roots in exact coordinates: delta_i = (n + 2 - 2i)/2
    /// (1-based i).
    pub fn half_sum_exact(&self) -> Vec<Rational64> {
        let n = self.rank as i64;
        (1..=(n + 1))
            .map(|i| Rational64::new(n + 2 - 2 * i, 2))
            .collect()
    }

    /// `(c/2) * sum of positive roots = c * delta`. With `c = k` this is the
    /// deformed half-sum rho(k); with `c = 1` it is delta itself.
    pub fn weighted_half_sum(&self, c: Complex64) -> Weight {
        let coords = self
            .half_sum_exact()
            .into_iter()
            .map(|q| c * rational_to_f64(q))
            .collect();
        Weight::new(coords)
    }

    /// rho(k) = k * delta.
    pub fn rho(&self, k: Complex64) -> Weight {
        self.weighted_half_sum(k)
    }

    pub fn delta(&self) -> Weight {
        self.weighted_half_sum(Complex64::new(1.0, 0.0))
    }

    /// Simple-root index assigned to every variable of pattern row `j`:
    /// row j carries alpha_{n+1-j}.
    pub fn row_root(&self, row: usize) -> Result<usize> {
        row_root(row, self.rank)
    }
}

/// Simple-root index for pattern row `j` (1-based): `alpha(j) = alpha_{n+1-j}`.
pub fn row_root(row: usize, n: usize) -> Result<usize> {
    if row == 0 || row > n {
        return Err(Error::RowOutOfRange { row, rank: n });
    }
    Ok(n + 1 - row)
}

pub fn rational_to_f64(q: Rational64) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

/// Coordinate vector in the ambient space; used for spectral parameters
/// (lambda, rho, delta) and exponent vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Weight {
    coords: Vec<Complex64>,
}

impl Weight {
    pub fn new(coords: Vec<Complex64>) -> Self {
        Weight { coords }
    }

    pub fn from_real(coords: &[f64]) -> Self {
        Weight {
            coords: coords.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }

    /// A spectral parameter: coordinates must sum to zero (within 1e-12).
    pub fn spectral(coords: Vec<Complex64>) -> Result<Self> {
        let sum: Complex64 = coords.iter().sum();
        if sum.norm() > HOMOGENEITY_TOL {
            return Err(Error::NotHomogeneous {
                sum: sum.norm(),
                tol: HOMOGENEITY_TOL,
            });
        }
        Ok(Weight { coords })
    }

    pub fn spectral_real(coords: &[f64]) -> Result<Self> {
        Self::spectral(coords.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn zero(dim: usize) -> Self {
        Weight {
            coords: vec![Complex64::new(0.0, 0.0); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    pub fn coord(&self, i: usize) -> Complex64 {
        self.coords[i]
    }

    pub fn add(&self, other: &Weight) -> Weight {
        assert_eq!(self.dim(), other.dim());
        Weight {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Weight) -> Weight {
        assert_eq!(self.dim(), other.dim());
        Weight {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, c: Complex64) -> Weight {
        Weight {
            coords: self.coords.iter().map(|a| a * c).collect(),
        }
    }

    /// Pairing with a root: `(w, e_i - e_j) = w_i - w_j`. Since all roots of
    /// type A have squared length 2 this is also the coroot pairing.
    pub fn root_pairing(&self, root: &Root) -> Complex64 {
        self.coords[root.i()] - self.coords[root.j()]
    }
}

/// Euclidean pairing `sum u_i v_i` (bilinear, no conjugation).
pub fn pairing(u: &Weight, v: &Weight) -> Result<Complex64> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch(u.dim(), v.dim()));
    }
    Ok(u.coords
        .iter()
        .zip(&v.coords)
        .map(|(a, b)| a * b)
        .sum())
}

/// Element of the Weyl group, stored as a permutation of coordinate
/// positions: `perm[i]` is the (zero-based) image of position `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeylElement {
    perm: Vec<usize>,
}

impl WeylElement {
    pub fn identity(dim: usize) -> Self {
        WeylElement {
            perm: (0..dim).collect(),
        }
    }

    /// Builds from a one-line notation with 1-based entries, e.g. `[2, 1, 3]`.
    pub fn from_one_line(line: &[usize]) -> Result<Self> {
        let dim = line.len();
        let mut seen = vec![false; dim];
        let mut perm = vec![0usize; dim];
        for (pos, &img) in line.iter().enumerate() {
            if img == 0 || img > dim || seen[img - 1] {
                return Err(Error::InvalidPermutation(format!("{:?}", line)));
            }
            seen[img - 1] = true;
            perm[pos] = img - 1;
        }
        Ok(WeylElement { perm })
    }

    /// The longest element: position i maps to dim - 1 - i.
    pub fn longest(dim: usize) -> Self {
        WeylElement {
            perm: (0..dim).rev().collect(),
        }
    }

    /// Simple transposition s_i swapping positions i and i+1 (1-based i).
    pub fn simple_transposition(dim: usize, i: usize) -> Self {
        assert!(i >= 1 && i < dim);
        let mut perm: Vec<usize> = (0..dim).collect();
        perm.swap(i - 1, i);
        WeylElement { perm }
    }

    /// All dim! elements, in lexicographic order of one-line notation.
    pub fn all(dim: usize) -> Vec<WeylElement> {
        use itertools::Itertools;
        (0..dim)
            .permutations(dim)
            .map(|perm| WeylElement { perm })
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn one_line(&self) -> Vec<usize> {
        self.perm.iter().map(|&p| p + 1).collect()
    }

    /// Number of inversions of the underlying permutation.
    pub fn length(&self) -> usize {
        let mut count = 0;
        for a in 0..self.perm.len() {
            for b in (a + 1)..self.perm.len() {
                if self.perm[a] > self.perm[b] {
                    count += 1;
                }
            }
        }
        count
    }

    /// Composition: `(self * other)` acts as `self` after `other`.
    pub fn compose(&self, other: &WeylElement) -> WeylElement {
        assert_eq!(self.dim(), other.dim());
        WeylElement {
            perm: (0..self.dim()).map(|i| self.perm[other.perm[i]]).collect(),
        }
    }

    /// Acts on a weight: coordinate `w(i)` of the result is coordinate `i` of
    /// the input, i.e. `(w lambda)_i = lambda_{w^{-1}(i)}`.
    pub fn apply(&self, lambda: &Weight) -> Result<Weight> {
        if self.dim() != lambda.dim() {
            return Err(Error::DimensionMismatch(self.dim(), lambda.dim()));
        }
        let mut coords = vec![Complex64::new(0.0, 0.0); lambda.dim()];
        for (i, &img) in self.perm.iter().enumerate() {
            coords[img] = lambda.coord(i);
        }
        Ok(Weight::new(coords))
    }
}

impl std::fmt::Display for WeylElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let line: Vec<String> = self.one_line().iter().map(|p| p.to_string()).collect();
        write!(f, "[{}]", line.join(","))
    }
}

/// Convenience free function mirroring `WeylElement::apply`.
pub fn weyl_act(w: &WeylElement, lambda: &Weight) -> Result<Weight> {
    w.apply(lambda)
}
