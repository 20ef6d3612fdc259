//! Truncated asymptotic series of the radial operator.
//!
//! The operator acts on functions of `z_1 .. z_{n+1}` as
//!
//! ```text
//! L(k) = sum_i (z_i d/dz_i)^2
//!        - k sum_{i<j} (z_j + z_i)/(z_j - z_i) (z_i d/dz_i - z_j d/dz_j)
//! ```
//!
//! and for generic `lambda` has an eigenfunction
//! `phi = z^{lambda + rho(k)} (1 + corrections)` with eigenvalue
//! `(lambda, lambda) - (rho, rho)`. The corrections are indexed by the cone of
//! the positive root lattice: in the chamber `|z_1| < |z_2| < ... < |z_{n+1}|`
//! every `z^alpha` with `alpha > 0` is small, expanding each
//! `(z_j + z_i)/(z_j - z_i)` as `1 + 2 sum_{m>=1} (z_i/z_j)^m` turns the eigen
//! equation into a height-triangular recursion
//!
//! ```text
//! (mu, mu + 2 lambda) G_mu
//!     = 2k sum_{alpha>0} sum_{m>=1} (lambda + rho + mu - m alpha, alpha) G_{mu - m alpha}
//! ```
//!
//! with `G_0 = 1`, solved exactly order by order.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::root_data::{pairing, RootSystem, Weight};

const RESONANCE_GUARD: f64 = 1e-10;

/// Exponent `mu = sum m_i alpha_i` over the simple roots, stored as the
/// vector of nonnegative coefficients `m_i`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(rank: usize) -> Self {
        MultiIndex(vec![0; rank])
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn height(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Subtracts `m` copies of the positive root spanning simple positions
    /// `i..j` (zero-based, exclusive at `j`), or `None` when leaving the cone.
    pub fn checked_sub_root(&self, i: usize, j: usize, m: u32) -> Option<MultiIndex> {
        let mut out = self.0.clone();
        for entry in &mut out[i..j] {
            *entry = entry.checked_sub(m)?;
        }
        Some(MultiIndex(out))
    }

    /// Coordinates of `mu` in the ambient basis: `mu_e[l] = m_l - m_{l-1}`
    /// with zero padding on both ends.
    pub fn ambient_coords(&self) -> Vec<f64> {
        let n = self.rank();
        let mut e = vec![0.0; n + 1];
        for l in 0..=n {
            let cur = if l < n { self.0[l] as f64 } else { 0.0 };
            let prev = if l > 0 { self.0[l - 1] as f64 } else { 0.0 };
            e[l] = cur - prev;
        }
        e
    }

    /// Pairing with the positive root `e_i - e_j` (zero-based).
    pub fn root_pairing(&self, i: usize, j: usize) -> f64 {
        let n = self.rank();
        let at = |l: usize| -> f64 {
            let cur = if l < n { self.0[l] as f64 } else { 0.0 };
            let prev = if l > 0 { self.0[l - 1] as f64 } else { 0.0 };
            cur - prev
        };
        at(i) - at(j)
    }

    pub fn norm_sq(&self) -> f64 {
        self.ambient_coords().iter().map(|x| x * x).sum()
    }

    /// All indices of height exactly `h`, lexicographic.
    pub fn all_of_height(rank: usize, h: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut cur = vec![0u32; rank];
        fn rec(pos: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            if pos + 1 == cur.len() {
                cur[pos] = left;
                out.push(MultiIndex(cur.clone()));
                return;
            }
            for take in 0..=left {
                cur[pos] = take;
                rec(pos + 1, left - take, cur, out);
            }
        }
        rec(0, h, &mut cur, &mut out);
        out
    }
}

impl std::fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|m| m.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Series `sum_{height(mu) <= N} G_mu z^mu`, normalized so the constant term
/// of a freshly built eigenseries is 1.
#[derive(Debug, Clone)]
pub struct FormalSeries {
    rank: usize,
    order: u32,
    coeffs: BTreeMap<MultiIndex, Complex64>,
}

impl FormalSeries {
    pub fn constant_one(rank: usize, order: u32) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(MultiIndex::zero(rank), Complex64::new(1.0, 0.0));
        FormalSeries {
            rank,
            order,
            coeffs,
        }
    }

    pub fn from_coeffs(rank: usize, order: u32, coeffs: BTreeMap<MultiIndex, Complex64>) -> Self {
        debug_assert!(coeffs.keys().all(|m| m.height() <= order && m.rank() == rank));
        FormalSeries {
            rank,
            order,
            coeffs,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn coeff(&self, mu: &MultiIndex) -> Complex64 {
        self.coeffs
            .get(mu)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.coeffs.iter()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn scale(&self, c: Complex64) -> FormalSeries {
        FormalSeries {
            rank: self.rank,
            order: self.order,
            coeffs: self.coeffs.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn add(&self, other: &FormalSeries) -> FormalSeries {
        assert_eq!(self.rank, other.rank);
        let mut coeffs = self.coeffs.clone();
        for (m, v) in &other.coeffs {
            *coeffs.entry(m.clone()).or_insert(Complex64::new(0.0, 0.0)) += v;
        }
        FormalSeries {
            rank: self.rank,
            order: self.order.max(other.order),
            coeffs,
        }
    }

    /// Largest coefficient deviation against `other` over all indices of
    /// height <= min(order), relative to `1 + |coeff|`.
    pub fn max_relative_deviation(&self, other: &FormalSeries) -> f64 {
        let order = self.order.min(other.order);
        let mut worst = 0.0f64;
        for h in 0..=order {
            for mu in MultiIndex::all_of_height(self.rank, h) {
                let a = self.coeff(&mu);
                let b = other.coeff(&mu);
                let dev = (a - b).norm() / (1.0 + a.norm().max(b.norm()));
                worst = worst.max(dev);
            }
        }
        worst
    }
}

/// Parameters of the radial operator: the deformation `k` and the rank.
#[derive(Debug, Clone, Copy)]
pub struct RadialOperatorParams {
    pub k: Complex64,
    pub n: usize,
}

/// Eigenvalue of the radial operator on the series with leading exponent
/// `lambda + rho(k)`: `(lambda, lambda) - (rho, rho)`.
pub fn eigenvalue(lambda: &Weight, k: Complex64, r: &RootSystem) -> Complex64 {
    let rho = r.rho(k);
    let ll = pairing(lambda, lambda).expect("dimension fixed by caller");
    let rr = pairing(&rho, &rho).expect("dimension fixed by caller");
    ll - rr
}

fn simple_span(root: &crate::root_data::Root) -> (usize, usize) {
    (root.i(), root.j())
}

fn resonance_scan(lambda: &Weight, rank: usize, order: u32) -> Result<()> {
    let mut worst: Option<(f64, MultiIndex)> = None;
    for h in 1..=order {
        for mu in MultiIndex::all_of_height(rank, h) {
            let den = recursion_denominator(lambda, &mu);
            let mag = den.norm();
            if worst.as_ref().map_or(true, |(m, _)| mag < *m) {
                worst = Some((mag, mu));
            }
        }
    }
    if let Some((mag, mu)) = worst {
        if mag < RESONANCE_GUARD {
            return Err(Error::Resonance {
                index: mu.to_string(),
                denominator: mag,
            });
        }
    }
    Ok(())
}

fn recursion_denominator(lambda: &Weight, mu: &MultiIndex) -> Complex64 {
    let mu_e = mu.ambient_coords();
    let mut den = Complex64::new(mu.norm_sq(), 0.0);
    for (l, &m) in mu_e.iter().enumerate() {
        den += 2.0 * lambda.coord(l) * m;
    }
    den
}

/// Coefficients of the eigenseries up to height `order`.
pub fn hc_coefficients(
    lambda: &Weight,
    k: Complex64,
    order: u32,
    r: &RootSystem,
) -> Result<FormalSeries> {
    let rank = r.rank();
    assert_eq!(lambda.dim(), rank + 1);
    resonance_scan(lambda, rank, order)?;

    let lr = lambda.add(&r.rho(k));
    let lr_pairings: Vec<Complex64> = r
        .positive_roots()
        .iter()
        .map(|root| lr.root_pairing(root))
        .collect();
    let spans: Vec<(usize, usize)> = r.positive_roots().iter().map(simple_span).collect();

    let mut coeffs: BTreeMap<MultiIndex, Complex64> = BTreeMap::new();
    coeffs.insert(MultiIndex::zero(rank), Complex64::new(1.0, 0.0));
    for h in 1..=order {
        for mu in MultiIndex::all_of_height(rank, h) {
            let mut rhs = Complex64::new(0.0, 0.0);
            for (ridx, &(i, j)) in spans.iter().enumerate() {
                let mut m = 1u32;
                while let Some(prev) = mu.checked_sub_root(i, j, m) {
                    if let Some(&g) = coeffs.get(&prev) {
                        let pair = lr_pairings[ridx] + prev.root_pairing(i, j);
                        rhs += pair * g;
                    }
                    m += 1;
                }
            }
            let value = 2.0 * k * rhs / recursion_denominator(lambda, &mu);
            if value.norm() != 0.0 {
                coeffs.insert(mu, value);
            }
        }
    }
    Ok(FormalSeries::from_coeffs(rank, order, coeffs))
}

/// Formal image of the radial operator on `z^{lambda+rho} s`, re-expanded in
/// the same chamber, truncated at the order of `s`, and returned with the
/// overall `z^{lambda+rho}` stripped.
pub fn apply_radial_operator(
    s: &FormalSeries,
    lambda: &Weight,
    params: &RadialOperatorParams,
) -> FormalSeries {
    let r = crate::root_data::build_root_system(params.n).expect("rank validated upstream");
    let rank = r.rank();
    let k = params.k;
    let rho = r.rho(k);
    let lr = lambda.add(&rho);
    let rho_sq = pairing(&rho, &rho).expect("matching dims");
    let spans: Vec<(usize, usize)> = r.positive_roots().iter().map(simple_span).collect();
    let lr_pairings: Vec<Complex64> = r
        .positive_roots()
        .iter()
        .map(|root| lr.root_pairing(root))
        .collect();

    let mut out: BTreeMap<MultiIndex, Complex64> = BTreeMap::new();
    for h in 0..=s.order() {
        for mu in MultiIndex::all_of_height(rank, h) {
            // diagonal: (lambda + mu, lambda + mu) - (rho, rho)
            let mut acc = Complex64::new(0.0, 0.0);
            let g_mu = s.coeff(&mu);
            if g_mu.norm() != 0.0 {
                let mu_e = mu.ambient_coords();
                let mut lm = Complex64::new(mu.norm_sq(), 0.0);
                for (l, &m) in mu_e.iter().enumerate() {
                    lm += 2.0 * lambda.coord(l) * m;
                }
                let diag = pairing(lambda, lambda).expect("matching dims") + lm - rho_sq;
                acc += diag * g_mu;
            }
            // off-diagonal ladder terms
            let mut ladder = Complex64::new(0.0, 0.0);
            for (ridx, &(i, j)) in spans.iter().enumerate() {
                let mut m = 1u32;
                while let Some(prev) = mu.checked_sub_root(i, j, m) {
                    let g = s.coeff(&prev);
                    if g.norm() != 0.0 {
                        ladder += (lr_pairings[ridx] + prev.root_pairing(i, j)) * g;
                    }
                    m += 1;
                }
            }
            acc -= 2.0 * k * ladder;
            if acc.norm() != 0.0 {
                out.insert(mu, acc);
            }
        }
    }
    FormalSeries::from_coeffs(rank, s.order(), out)
}

/// Output of [`transformation_image`]: the transformed series lives over the
/// leading exponent `lambda + rho(1-k)`, and the multiplicative constant that
/// was split off (the branch of the difference-product prefactor) is reported,
/// never folded back in.
#[derive(Debug, Clone)]
pub struct TransformationImage {
    pub series: FormalSeries,
    pub exponent: Weight,
    pub dropped_constant: Complex64,
}

/// Multiplies a normalized series by the chamber expansion of the
/// transformation prefactor `prod_{i<j} (z_i - z_j)^{2k-1} prod z_i^{(1-2k)n/2}`.
///
/// The pure monomial part of the prefactor equals `z^{-(2k-1) delta}` and is
/// absorbed into the leading exponent, turning `lambda + rho(k)` into
/// `lambda + rho(1-k)`; what remains is `prod_{i<j} (1 - z_i/z_j)^{2k-1}`
/// expanded by the binomial series and truncated at `order`. A constant
/// factor `(-1)^{(2k-1) n(n+1)/2}` (branch `-1 = e^{i pi}`) is split off and
/// reported in `dropped_constant`.
pub fn transformation_image(
    s: &FormalSeries,
    k: Complex64,
    lambda: &Weight,
    order: u32,
    r: &RootSystem,
) -> TransformationImage {
    let rank = r.rank();
    assert_eq!(s.rank(), rank);
    let e = 2.0 * k - 1.0;

    let mut coeffs = s.coeffs.clone();
    for root in r.positive_roots() {
        let (i, j) = simple_span(root);
        let step = root.height();
        // binomial coefficients of (1 - x)^e
        let mut binom = Vec::new();
        let mut c = Complex64::new(1.0, 0.0);
        binom.push(c);
        let mut m = 1u32;
        while (m as usize) * step <= order as usize {
            c = -c * (e - (m as f64 - 1.0)) / (m as f64);
            binom.push(c);
            m += 1;
        }
        let mut next: BTreeMap<MultiIndex, Complex64> = BTreeMap::new();
        for (mu, val) in &coeffs {
            for (m, b) in binom.iter().enumerate() {
                if mu.height() as usize + m * step > order as usize {
                    break;
                }
                let mut shifted = mu.0.clone();
                for entry in &mut shifted[i..j] {
                    *entry += m as u32;
                }
                let key = MultiIndex(shifted);
                *next.entry(key).or_insert(Complex64::new(0.0, 0.0)) += val * b;
            }
        }
        coeffs = next;
    }

    // constant term is exactly 1 for a normalized input; renormalize anyway
    // and report the full split-off constant
    let g0 = coeffs
        .get(&MultiIndex::zero(rank))
        .copied()
        .unwrap_or(Complex64::new(1.0, 0.0));
    let n_pos = r.num_positive_roots() as f64;
    let branch = (Complex64::new(0.0, std::f64::consts::PI) * e * n_pos).exp();
    let coeffs = coeffs
        .into_iter()
        .map(|(m, v)| (m, v / g0))
        .collect();

    let one_minus_k = Complex64::new(1.0, 0.0) - k;
    TransformationImage {
        series: FormalSeries::from_coeffs(rank, order, coeffs),
        exponent: lambda.add(&r.rho(one_minus_k)),
        dropped_constant: branch * g0,
    }
}

/// Evaluates `z^{lambda+rho} sum G_mu z^mu` at a point of the convergence
/// chamber `|z_1| < |z_2| < ... < |z_{n+1}|`, principal branches throughout.
pub fn evaluate_phi(
    lambda: &Weight,
    k: Complex64,
    z: &[Complex64],
    order: u32,
    r: &RootSystem,
) -> Result<Complex64> {
    let series = hc_coefficients(lambda, k, order, r)?;
    evaluate_phi_with(&series, lambda, k, z, r)
}

/// Same as [`evaluate_phi`] but reuses an already built series.
pub fn evaluate_phi_with(
    series: &FormalSeries,
    lambda: &Weight,
    k: Complex64,
    z: &[Complex64],
    r: &RootSystem,
) -> Result<Complex64> {
    let n = r.rank();
    if z.len() != n + 1 {
        return Err(Error::DimensionMismatch(z.len(), n + 1));
    }
    for (i, zi) in z.iter().enumerate() {
        if zi.norm() == 0.0 {
            return Err(Error::OutsideChamber { i, j: i });
        }
        if i + 1 < z.len() && zi.norm() >= z[i + 1].norm() {
            return Err(Error::OutsideChamber { i, j: i + 1 });
        }
    }
    let lr = lambda.add(&r.rho(k));
    let mut log_lead = Complex64::new(0.0, 0.0);
    for (l, zl) in z.iter().enumerate() {
        log_lead += lr.coord(l) * zl.ln();
    }
    // powers of the simple-root monomials x_i = z_i / z_{i+1}
    let ratios: Vec<Complex64> = (0..n).map(|i| z[i] / z[i + 1]).collect();
    let order = series.order() as usize;
    let mut pows: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for x in &ratios {
        let mut col = Vec::with_capacity(order + 1);
        let mut acc = Complex64::new(1.0, 0.0);
        for _ in 0..=order {
            col.push(acc);
            acc *= x;
        }
        pows.push(col);
    }
    let mut sum = Complex64::new(0.0, 0.0);
    for (mu, g) in series.iter() {
        let mut term = *g;
        for (i, &m) in mu.0.iter().enumerate() {
            term *= pows[i][m as usize];
        }
        sum += term;
    }
    Ok(log_lead.exp() * sum)
}

/// Height-graded coefficient sums `T_h = sum_{height(mu)=h} G_mu`, the only
/// data the limit toward the identity needs: along `z(s) = (s^n, ..., s, 1)`
/// every `z^mu` collapses to `s^{height(mu)}`.
///
/// Rank 1 and 2 run in O(N) / O(N^2) with rolling rows, which is what makes
/// truncation orders in the tens of thousands affordable.
pub fn height_sums(
    lambda: &Weight,
    k: Complex64,
    order: u32,
    r: &RootSystem,
) -> Result<Vec<Complex64>> {
    match r.rank() {
        1 => height_sums_rank1(lambda, k, order, r),
        2 => height_sums_rank2(lambda, k, order, r),
        _ => {
            let series = hc_coefficients(lambda, k, order, r)?;
            let mut sums = vec![Complex64::new(0.0, 0.0); order as usize + 1];
            for (mu, g) in series.iter() {
                sums[mu.height() as usize] += g;
            }
            Ok(sums)
        }
    }
}

fn height_sums_rank1(
    lambda: &Weight,
    k: Complex64,
    order: u32,
    r: &RootSystem,
) -> Result<Vec<Complex64>> {
    let a = lambda.root_pairing(&r.positive_roots()[0]);
    let mut coeffs = Vec::with_capacity(order as usize + 1);
    coeffs.push(Complex64::new(1.0, 0.0));
    let mut running = Complex64::new(0.0, 0.0);
    for m in 1..=(order as i64) {
        let mf = m as f64;
        // running sum of (lambda + rho + l alpha, alpha) G_l over l < m
        running += (a + k + 2.0 * (mf - 1.0)) * coeffs[m as usize - 1];
        let den = 2.0 * mf * mf + 2.0 * mf * a;
        if den.norm() < RESONANCE_GUARD {
            return Err(Error::Resonance {
                index: format!("({m})"),
                denominator: den.norm(),
            });
        }
        coeffs.push(2.0 * k * running / den);
    }
    Ok(coeffs)
}

fn height_sums_rank2(
    lambda: &Weight,
    k: Complex64,
    order: u32,
    r: &RootSystem,
) -> Result<Vec<Complex64>> {
    let roots = r.positive_roots();
    let a1 = lambda.root_pairing(&roots[0]); // alpha_1 = e1 - e2
    let a12 = lambda.root_pairing(&roots[1]); // alpha_1 + alpha_2 = e1 - e3
    let a2 = lambda.root_pairing(&roots[2]); // alpha_2 = e2 - e3

    let zero = Complex64::new(0.0, 0.0);
    let n = order as usize;
    let mut sums = vec![zero; n + 1];
    sums[0] = Complex64::new(1.0, 0.0);

    // rows indexed by p = coefficient of alpha_1; q = h - p
    let mut g_prev: Vec<Complex64> = vec![Complex64::new(1.0, 0.0)]; // height 0
    let mut g_prev2: Vec<Complex64> = Vec::new();
    let mut s1_prev: Vec<Complex64> = vec![zero];
    let mut s2_prev: Vec<Complex64> = vec![zero];
    let mut s12_prev: Vec<Complex64> = vec![zero]; // height h-1 (unused directly)
    let mut s12_prev2: Vec<Complex64> = Vec::new(); // height h-2

    for h in 1..=n {
        let mut g_cur = vec![zero; h + 1];
        let mut s1_cur = vec![zero; h + 1];
        let mut s2_cur = vec![zero; h + 1];
        let mut s12_cur = vec![zero; h + 1];
        for p in 0..=h {
            let q = h - p;
            let (pf, qf) = (p as f64, q as f64);
            if p >= 1 {
                s1_cur[p] = (a1 + k + (2.0 * (pf - 1.0) - qf)) * g_prev[p - 1] + s1_prev[p - 1];
            }
            if q >= 1 {
                s2_cur[p] = (a2 + k + (2.0 * (qf - 1.0) - pf)) * g_prev[p] + s2_prev[p];
            }
            if p >= 1 && q >= 1 {
                let g2 = g_prev2.get(p - 1).copied().unwrap_or(zero);
                let s2p = s12_prev2.get(p - 1).copied().unwrap_or(zero);
                s12_cur[p] = (a12 + 2.0 * k + (pf - 1.0) + (qf - 1.0)) * g2 + s2p;
            }
            let den = 2.0 * (pf * pf - pf * qf + qf * qf) + 2.0 * (pf * a1 + qf * a2);
            if den.norm() < RESONANCE_GUARD {
                return Err(Error::Resonance {
                    index: format!("({p},{q})"),
                    denominator: den.norm(),
                });
            }
            g_cur[p] = 2.0 * k * (s1_cur[p] + s2_cur[p] + s12_cur[p]) / den;
            sums[h] += g_cur[p];
        }
        g_prev2 = std::mem::replace(&mut g_prev, g_cur);
        s1_prev = s1_cur;
        s2_prev = s2_cur;
        s12_prev2 = std::mem::replace(&mut s12_prev, s12_cur);
    }
    Ok(sums)
}

/// Sequence acceleration used by [`evaluate_at_one`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Acceleration {
    None,
    Richardson,
    Epsilon,
}

/// Result of the accelerated limit toward the identity point.
#[derive(Debug, Clone, Copy)]
pub struct AcceleratedLimit {
    pub value: Complex64,
    pub error_estimate: f64,
    /// Number of path points that actually entered the tableau.
    pub samples: usize,
}

/// Limit of the series toward `z = (1, ..., 1)` along the geometric path
/// `z(s_j) = (s_j^n, ..., s_j, 1)`, `s_j = 1 - 2^{-j}`, `j = 1..12`,
/// accelerated by the requested tableau. Path points whose truncation tail is
/// not negligible for the given `order` are excluded before acceleration.
///
/// Returns an error (carrying the best value and the estimate) when the
/// tableau's own error estimate exceeds `tol`.
pub fn evaluate_at_one(
    lambda: &Weight,
    k: Complex64,
    order: u32,
    r: &RootSystem,
    acceleration: Acceleration,
    tol: f64,
) -> Result<AcceleratedLimit> {
    let sums = height_sums(lambda, k, order, r)?;
    let lr = lambda.add(&r.rho(k));
    let n = r.rank();
    // grading of the leading exponent along the path
    let mut lead_grade = Complex64::new(0.0, 0.0);
    for l in 0..=n {
        lead_grade += lr.coord(l) * (n - l) as f64;
    }
    let tail_scale = sums
        .iter()
        .rev()
        .take(16)
        .map(|t| t.norm())
        .fold(0.0f64, f64::max);

    let mut values = Vec::new();
    for j in 1..=12u32 {
        let eps = 2.0f64.powi(-(j as i32));
        let s = 1.0 - eps;
        // geometric tail bound |T_N| s^N / (1 - s); skip saturated points
        let tail = tail_scale * ((order as f64) * s.ln()).exp() / eps;
        if tail > 1e-13 {
            break;
        }
        let mut acc = Complex64::new(0.0, 0.0);
        let mut s_pow = 1.0f64;
        for t in &sums {
            acc += t * s_pow;
            s_pow *= s;
        }
        let lead = (lead_grade * s.ln()).exp();
        values.push(lead * acc);
    }
    if values.len() < 2 {
        return Err(Error::ConvergenceFailure {
            value_re: f64::NAN,
            value_im: f64::NAN,
            estimate: f64::INFINITY,
            tolerance: tol,
        });
    }

    let (value, error_estimate) = match acceleration {
        Acceleration::None => {
            let last = values[values.len() - 1];
            let prev = values[values.len() - 2];
            (last, (last - prev).norm())
        }
        Acceleration::Richardson => aitken_iterated(&values),
        Acceleration::Epsilon => wynn_epsilon(&values),
    };
    if !(error_estimate <= tol) {
        return Err(Error::ConvergenceFailure {
            value_re: value.re,
            value_im: value.im,
            estimate: error_estimate,
            tolerance: tol,
        });
    }
    Ok(AcceleratedLimit {
        value,
        error_estimate,
        samples: values.len(),
    })
}

/// Iterated Aitken delta-squared. On the geometric mesh the error terms form
/// near-geometric sequences, which a single Aitken sweep eliminates one at a
/// time.
fn aitken_iterated(seq: &[Complex64]) -> (Complex64, f64) {
    let mut cur = seq.to_vec();
    let mut best = *cur.last().expect("nonempty");
    let mut est = if cur.len() >= 2 {
        (cur[cur.len() - 1] - cur[cur.len() - 2]).norm()
    } else {
        f64::INFINITY
    };
    while cur.len() >= 3 {
        let mut next = Vec::with_capacity(cur.len() - 2);
        for i in 0..cur.len() - 2 {
            let d1 = cur[i + 1] - cur[i];
            let d2 = cur[i + 2] - cur[i + 1];
            let den = d2 - d1;
            if den.norm() < 1e-300 {
                next.push(cur[i + 2]);
            } else {
                next.push(cur[i + 2] - d2 * d2 / den);
            }
        }
        let cand = *next.last().expect("nonempty");
        let cand_est = if next.len() >= 2 {
            (next[next.len() - 1] - next[next.len() - 2]).norm()
        } else {
            (cand - best).norm()
        };
        let improved = cand_est <= est;
        if improved {
            best = cand;
            est = cand_est;
        }
        if next.len() < 3 || !improved {
            break;
        }
        cur = next;
    }
    (best, est.max(1e-16 * best.norm()))
}

/// Wynn epsilon algorithm; the limit estimate is read off the deepest even
/// column.
fn wynn_epsilon(seq: &[Complex64]) -> (Complex64, f64) {
    let n = seq.len();
    let mut prev_prev = vec![Complex64::new(0.0, 0.0); n + 1]; // eps_{-1}
    let mut prev = seq.to_vec(); // eps_0
    let mut best = *prev.last().expect("nonempty");
    let mut est = if n >= 2 {
        (prev[n - 1] - prev[n - 2]).norm()
    } else {
        f64::INFINITY
    };
    let mut col = 1usize;
    while prev.len() >= 2 {
        let mut cur = Vec::with_capacity(prev.len() - 1);
        for i in 0..prev.len() - 1 {
            let diff = prev[i + 1] - prev[i];
            if diff.norm() < 1e-300 {
                cur.push(prev_prev[i + 1]);
            } else {
                cur.push(prev_prev[i + 1] + 1.0 / diff);
            }
        }
        if col % 2 == 0 {
            let cand = *cur.last().expect("nonempty");
            let cand_est = if cur.len() >= 2 {
                (cur[cur.len() - 1] - cur[cur.len() - 2]).norm()
            } else {
                (cand - best).norm()
            };
            if cand_est <= est {
                best = cand;
                est = cand_est;
            }
        }
        prev_prev = std::mem::replace(&mut prev, cur);
        col += 1;
    }
    (best, est.max(1e-16 * best.norm()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::root_data::build_root_system;
    use crate::special_fn::opdam_value;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn multi_index_basics() {
        let mu = MultiIndex(vec![2, 0, 1]);
        assert_eq!(mu.height(), 3);
        assert_eq!(mu.ambient_coords(), vec![2.0, -2.0, 1.0, -1.0]);
        // subtracting alpha_1 + alpha_2 (positions 0..2)
        assert_eq!(mu.checked_sub_root(0, 2, 1), None); // m_2 = 0 blocks it
        assert_eq!(
            mu.checked_sub_root(0, 1, 2),
            Some(MultiIndex(vec![0, 0, 1]))
        );
        assert_eq!(MultiIndex::all_of_height(2, 2).len(), 3);
        assert_eq!(MultiIndex::all_of_height(3, 6).len(), 28);
    }

    #[test]
    fn eigenvalue_examples() {
        let r = build_root_system(1).unwrap();
        let a = 1.3;
        let lam = Weight::from_real(&[a / 2.0, -a / 2.0]);
        // k = 0: (lambda, lambda)
        let e0 = eigenvalue(&lam, c(0.0, 0.0), &r);
        assert!((e0 - c(a * a / 2.0, 0.0)).norm() < 1e-14);
        // generic k: a^2/2 - k^2/2
        let k = c(0.4, 0.1);
        let e = eigenvalue(&lam, k, &r);
        assert!((e - (c(a * a / 2.0, 0.0) - k * k / 2.0)).norm() < 1e-14);
    }

    #[test]
    fn eigenvalue_weyl_invariant() {
        let r = build_root_system(3).unwrap();
        let lam = Weight::from_real(&[1.9, 0.4, -0.8, -1.5]);
        let k = c(0.3, -0.2);
        let base = eigenvalue(&lam, k, &r);
        for w in crate::root_data::WeylElement::all(4) {
            let e = eigenvalue(&w.apply(&lam).unwrap(), k, &r);
            assert_eq!(e, base); // exact: a permutation of the coordinates
        }
    }

    #[test]
    fn normalization_and_rank1_first_coefficient() {
        let r = build_root_system(1).unwrap();
        let a = 1.8;
        let k = c(-0.3, 0.0);
        let lam = Weight::from_real(&[a / 2.0, -a / 2.0]);
        let s = hc_coefficients(&lam, k, 4, &r).unwrap();
        assert_eq!(s.coeff(&MultiIndex::zero(1)), c(1.0, 0.0));
        let g1 = s.coeff(&MultiIndex(vec![1]));
        let expected = k * (a + k) / (1.0 + a);
        assert!((g1 - expected).norm() < 1e-14);
    }

    #[test]
    fn k_zero_kills_all_corrections() {
        let r = build_root_system(2).unwrap();
        let lam = Weight::from_real(&[1.1, 0.3, -1.4]);
        let s = hc_coefficients(&lam, c(0.0, 0.0), 5, &r).unwrap();
        assert_eq!(s.len(), 1); // only G_0
    }

    #[test]
    fn resonance_is_detected_and_named() {
        let r = build_root_system(1).unwrap();
        // (mu, mu + 2 lambda) = 2m^2 + 2ma vanishes at m = 1 for a = -1
        let lam = Weight::from_real(&[-0.5, 0.5]);
        let err = hc_coefficients(&lam, c(0.3, 0.0), 3, &r).unwrap_err();
        match err {
            Error::Resonance { index, .. } => assert_eq!(index, "(1)"),
            other => panic!("expected resonance, got {other:?}"),
        }
    }

    #[test]
    fn radial_operator_is_diagonal_on_eigenseries() {
        // the formal triangular-solve property behind the recursion
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for n in 1..=3usize {
            let r = build_root_system(n).unwrap();
            for _ in 0..3 {
                let mut v: Vec<f64> = (0..=n).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let mean = v.iter().sum::<f64>() / v.len() as f64;
                v.iter_mut().for_each(|x| *x -= mean);
                let lam = Weight::from_real(&v);
                let k = c(rng.gen_range(-0.5..0.8), rng.gen_range(-0.3..0.3));
                let Ok(s) = hc_coefficients(&lam, k, 6, &r) else {
                    continue;
                };
                let image = apply_radial_operator(&s, &lam, &RadialOperatorParams { k, n });
                let ev = eigenvalue(&lam, k, &r);
                for h in 0..=6u32 {
                    for mu in MultiIndex::all_of_height(n, h) {
                        let lhs = image.coeff(&mu);
                        let rhs = ev * s.coeff(&mu);
                        assert!(
                            (lhs - rhs).norm() <= 1e-10 * (1.0 + rhs.norm()),
                            "n={n} mu={mu}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn radial_operator_on_constant_term_gives_eigenvalue() {
        let r = build_root_system(1).unwrap();
        let lam = Weight::from_real(&[0.9, -0.9]);
        let k = c(0.25, 0.0);
        let s = FormalSeries::constant_one(1, 0);
        let image = apply_radial_operator(&s, &lam, &RadialOperatorParams { k, n: 1 });
        let expected = eigenvalue(&lam, k, &r);
        assert!((image.coeff(&MultiIndex::zero(1)) - expected).norm() < 1e-14);
    }

    #[test]
    fn radial_operator_linearity_and_triangularity() {
        let mut rng = ChaCha8Rng::seed_from_u64(88);
        let n = 2;
        let lam = Weight::from_real(&[1.3, -0.2, -1.1]);
        let k = c(0.6, 0.15);
        let params = RadialOperatorParams { k, n };
        // random sparse series supported at heights >= 2
        let mut coeffs = BTreeMap::new();
        for h in 2..=5u32 {
            for mu in MultiIndex::all_of_height(n, h) {
                if rng.gen_bool(0.4) {
                    coeffs.insert(mu, c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
                }
            }
        }
        let s1 = FormalSeries::from_coeffs(n, 5, coeffs);
        let s2 = hc_coefficients(&lam, k, 5, &build_root_system(n).unwrap()).unwrap();

        // triangularity: image of height >= 2 support stays at height >= 2
        let im1 = apply_radial_operator(&s1, &lam, &params);
        for (mu, v) in im1.iter() {
            assert!(mu.height() >= 2 || v.norm() == 0.0);
        }

        // linearity
        let a = c(0.7, -0.3);
        let b = c(-1.2, 0.5);
        let combo = s1.scale(a).add(&s2.scale(b));
        let im_combo = apply_radial_operator(&combo, &lam, &params);
        let im2 = apply_radial_operator(&s2, &lam, &params);
        let expect = im1.scale(a).add(&im2.scale(b));
        assert!(im_combo.max_relative_deviation(&expect) < 1e-13);
    }

    #[test]
    fn transformation_constant_prefactor_at_k_half() {
        let r = build_root_system(2).unwrap();
        let lam = Weight::from_real(&[1.4, 0.1, -1.5]);
        let k = c(0.5, 0.0);
        let s = hc_coefficients(&lam, k, 6, &r).unwrap();
        let image = transformation_image(&s, k, &lam, 6, &r);
        assert!(image.series.max_relative_deviation(&s) < 1e-15);
        assert!((image.dropped_constant - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn transformation_law_small_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(4242);
        for n in 1..=2usize {
            let r = build_root_system(n).unwrap();
            for _ in 0..4 {
                let mut v: Vec<f64> = (0..=n).map(|_| rng.gen_range(-1.8..1.8)).collect();
                let mean = v.iter().sum::<f64>() / v.len() as f64;
                v.iter_mut().for_each(|x| *x -= mean);
                let lam = Weight::from_real(&v);
                let k = c(0.3, 0.0);
                let (Ok(s_k), Ok(s_dual)) = (
                    hc_coefficients(&lam, k, 6, &r),
                    hc_coefficients(&lam, 1.0 - k, 6, &r),
                ) else {
                    continue;
                };
                let image = transformation_image(&s_k, k, &lam, 6, &r);
                let dev = image.series.max_relative_deviation(&s_dual);
                assert!(dev < 1e-9, "n={n} dev={dev:e}");
            }
        }
    }

    #[test]
    fn transformation_exponent_bookkeeping() {
        // lambda + rho(k) - (2k-1) delta = lambda + rho(1-k)
        let r = build_root_system(3).unwrap();
        let lam = Weight::from_real(&[1.0, 0.5, -0.2, -1.3]);
        let k = c(0.37, -0.21);
        let s = hc_coefficients(&lam, k, 2, &r).unwrap();
        let image = transformation_image(&s, k, &lam, 2, &r);
        let lhs = lam
            .add(&r.rho(k))
            .sub(&r.delta().scale(2.0 * k - 1.0));
        for l in 0..4 {
            assert!((lhs.coord(l) - image.exponent.coord(l)).norm() < 1e-14);
        }
    }

    #[test]
    fn transformation_involution() {
        let r = build_root_system(2).unwrap();
        let lam = Weight::from_real(&[1.6, -0.3, -1.3]);
        let k = c(0.3, 0.11);
        let s = hc_coefficients(&lam, k, 6, &r).unwrap();
        let once = transformation_image(&s, k, &lam, 6, &r);
        let twice = transformation_image(&once.series, 1.0 - k, &lam, 6, &r);
        assert!(twice.series.max_relative_deviation(&s) < 1e-9);
    }

    #[test]
    fn evaluate_phi_chamber_checks() {
        let r = build_root_system(1).unwrap();
        let lam = Weight::from_real(&[0.7, -0.7]);
        let k = c(0.2, 0.0);
        let bad = [c(2.0, 0.0), c(1.0, 0.0)];
        assert!(matches!(
            evaluate_phi(&lam, k, &bad, 4, &r),
            Err(Error::OutsideChamber { .. })
        ));
        let good = [c(0.1, 0.0), c(1.0, 0.0)];
        assert!(evaluate_phi(&lam, k, &good, 4, &r).is_ok());
    }

    #[test]
    fn evaluate_phi_k_zero_is_monomial() {
        let r = build_root_system(2).unwrap();
        let lam = Weight::from_real(&[0.9, 0.2, -1.1]);
        let z = [c(0.2, 0.1), c(0.9, -0.3), c(1.5, 0.2)];
        let got = evaluate_phi(&lam, c(0.0, 0.0), &z, 8, &r).unwrap();
        let mut log = c(0.0, 0.0);
        for l in 0..3 {
            log += lam.coord(l) * z[l].ln();
        }
        assert!((got - log.exp()).norm() < 1e-13 * got.norm());
    }

    #[test]
    fn evaluate_phi_truncation_decay() {
        // successive truncations differ by O(x^{N+1}) at ratio x = 0.1
        let r = build_root_system(1).unwrap();
        let lam = Weight::from_real(&[0.8, -0.8]);
        let k = c(-0.3, 0.0);
        let z = [c(0.1, 0.0), c(1.0, 0.0)];
        let f6 = evaluate_phi(&lam, k, &z, 6, &r).unwrap();
        let f8 = evaluate_phi(&lam, k, &z, 8, &r).unwrap();
        let f12 = evaluate_phi(&lam, k, &z, 12, &r).unwrap();
        assert!((f8 - f6).norm() < 1e-6);
        assert!((f12 - f8).norm() < 1e-8);
        assert!((f12 - f8).norm() < (f8 - f6).norm() * 0.1);
    }

    /// Central-difference application of the radial operator in log
    /// coordinates; independent oracle for the coefficient recursion.
    fn numeric_radial_residual(
        lam: &Weight,
        k: Complex64,
        z: &[Complex64],
        order: u32,
        r: &RootSystem,
    ) -> f64 {
        let h = 1e-3;
        let n1 = z.len();
        let f = |zz: &[Complex64]| evaluate_phi(lam, k, zz, order, r).unwrap();
        let shift = |base: &[Complex64], i: usize, d: f64| -> Vec<Complex64> {
            let mut out = base.to_vec();
            out[i] *= c(d, 0.0).exp();
            out
        };
        let f0 = f(z);
        let mut lf = c(0.0, 0.0);
        for i in 0..n1 {
            let fp = f(&shift(z, i, h));
            let fm = f(&shift(z, i, -h));
            lf += (fp - 2.0 * f0 + fm) / (h * h);
        }
        for i in 0..n1 {
            for j in (i + 1)..n1 {
                let di = (f(&shift(z, i, h)) - f(&shift(z, i, -h))) / (2.0 * h);
                let dj = (f(&shift(z, j, h)) - f(&shift(z, j, -h))) / (2.0 * h);
                let coeff = (z[j] + z[i]) / (z[j] - z[i]);
                lf -= k * coeff * (di - dj);
            }
        }
        let ev = eigenvalue(lam, k, r);
        ((lf - ev * f0) / f0).norm()
    }

    #[test]
    fn series_solves_the_analytic_operator_rank1() {
        let r = build_root_system(1).unwrap();
        let lam = Weight::from_real(&[0.85, -0.85]);
        let k = c(-0.3, 0.0);
        let z = [c(0.1, 0.0), c(1.0, 0.0)];
        let res = numeric_radial_residual(&lam, k, &z, 14, &r);
        assert!(res < 1e-5, "residual {res:e}");
    }

    #[test]
    fn series_solves_the_analytic_operator_rank2() {
        let r = build_root_system(2).unwrap();
        let lam = Weight::from_real(&[1.2, 0.1, -1.3]);
        let k = c(0.35, 0.0);
        let z = [c(0.01, 0.0), c(0.1, 0.0), c(1.0, 0.0)];
        let res = numeric_radial_residual(&lam, k, &z, 12, &r);
        assert!(res < 1e-4, "residual {res:e}");
    }

    #[test]
    fn hc_first_order_coefficient_sharpens_numeric_residual() {
        // with G_1 included the numeric eigen-residual drops by an order of
        // magnitude in the chamber ratio
        let r = build_root_system(1).unwrap();
        let a = 1.8;
        let k = c(-0.3, 0.0);
        let lam = Weight::from_real(&[a / 2.0, -a / 2.0]);
        let z = [c(0.05, 0.0), c(1.0, 0.0)];
        let res_with = numeric_radial_residual(&lam, k, &z, 1, &r);

        // order-0 truncation: plain leading monomial
        let res_without = {
            let h = 1e-3;
            let lr = lam.add(&r.rho(k));
            let f = |zz: &[Complex64]| -> Complex64 {
                (lr.coord(0) * zz[0].ln() + lr.coord(1) * zz[1].ln()).exp()
            };
            let shift = |base: &[Complex64], i: usize, d: f64| -> Vec<Complex64> {
                let mut out = base.to_vec();
                out[i] *= c(d, 0.0).exp();
                out
            };
            let f0 = f(&z);
            let mut lf = c(0.0, 0.0);
            for i in 0..2 {
                let fp = f(&shift(&z, i, h));
                let fm = f(&shift(&z, i, -h));
                lf += (fp - 2.0 * f0 + fm) / (h * h);
            }
            let di = (f(&shift(&z, 0, h)) - f(&shift(&z, 0, -h))) / (2.0 * h);
            let dj = (f(&shift(&z, 1, h)) - f(&shift(&z, 1, -h))) / (2.0 * h);
            lf -= k * (z[1] + z[0]) / (z[1] - z[0]) * (di - dj);
            ((lf - eigenvalue(&lam, k, &r) * f0) / f0).norm()
        };
        assert!(
            res_with < res_without * 0.2,
            "order 1 residual {res_with:e} vs order 0 {res_without:e}"
        );
    }

    #[test]
    fn height_sums_match_generic_path() {
        let lam2 = Weight::from_real(&[1.4, 0.2, -1.6]);
        let k = c(-0.25, 0.0);
        let r2 = build_root_system(2).unwrap();
        let fast = height_sums(&lam2, k, 8, &r2).unwrap();
        let series = hc_coefficients(&lam2, k, 8, &r2).unwrap();
        let mut slow = vec![c(0.0, 0.0); 9];
        for (mu, g) in series.iter() {
            slow[mu.height() as usize] += g;
        }
        for h in 0..=8usize {
            assert!(
                (fast[h] - slow[h]).norm() <= 1e-12 * (1.0 + slow[h].norm()),
                "h={h}"
            );
        }

        let lam1 = Weight::from_real(&[0.9, -0.9]);
        let r1 = build_root_system(1).unwrap();
        let fast1 = height_sums(&lam1, k, 10, &r1).unwrap();
        let series1 = hc_coefficients(&lam1, k, 10, &r1).unwrap();
        for h in 0..=10u32 {
            let mu = MultiIndex(vec![h]);
            assert!((fast1[h as usize] - series1.coeff(&mu)).norm() < 1e-13);
        }
    }

    #[test]
    fn evaluate_at_one_k_zero_is_one() {
        let r = build_root_system(1).unwrap();
        let lam = Weight::from_real(&[0.8, -0.8]);
        let lim =
            evaluate_at_one(&lam, c(0.0, 0.0), 4096, &r, Acceleration::Richardson, 1e-8)
                .unwrap();
        assert!((lim.value - c(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn evaluate_at_one_matches_identity_value_rank1() {
        let r = build_root_system(1).unwrap();
        let a = 2.0;
        let k = c(-0.3, 0.0);
        let lam = Weight::from_real(&[a / 2.0, -a / 2.0]);
        let lim =
            evaluate_at_one(&lam, k, 1 << 18, &r, Acceleration::Richardson, 1e-6).unwrap();
        let closed = opdam_value(&lam, k, &r).unwrap();
        assert!(
            (lim.value - closed.value).norm() < 1e-6,
            "series {} vs closed form {}",
            lim.value,
            closed.value
        );
    }

    #[test]
    fn evaluate_at_one_reports_nonconvergence() {
        let r = build_root_system(1).unwrap();
        let a = 2.0;
        let k = c(-0.3, 0.0);
        let lam = Weight::from_real(&[a / 2.0, -a / 2.0]);
        // absurd tolerance: must refuse to hand back a silent value
        let err = evaluate_at_one(&lam, k, 4096, &r, Acceleration::None, 1e-14).unwrap_err();
        assert!(matches!(err, Error::ConvergenceFailure { .. }));
    }
}
