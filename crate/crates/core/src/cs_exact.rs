//! Exact Chern-Simons partition functions on `L(p,q)` from the
//! Hansen-Takata double permutation sum.
//!
//! The overall constant `C_N(p,q;g_s)` is set to one throughout, so every
//! comparison downstream is a ratio or a modulus.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dd::{cis, Dd};
use crate::error::{invalid, Error, Result};
use crate::lattice::LensSpace;
use crate::sum::CompensatedSum;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootData {
    pub rank_n: usize,
    pub weyl_vector: Vec<f64>,
    pub positive_roots: Vec<Vec<i32>>,
}

impl RootData {
    pub fn rho_squared(&self) -> f64 {
        self.weyl_vector.iter().map(|r| r * r).sum()
    }
}

pub fn root_data(n: usize) -> Result<RootData> {
    if n < 1 {
        return invalid("rank must be at least 1");
    }
    let weyl_vector = (1..=n).map(|i| (n as f64 + 1.0) / 2.0 - i as f64).collect();
    let mut positive_roots = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let mut a = vec![0; n];
            a[i] = 1;
            a[j] = -1;
            positive_roots.push(a);
        }
    }
    Ok(RootData { rank_n: n, weyl_vector, positive_roots })
}

/// All permutations of `0..n` with their signs, in lexicographic order.
pub fn permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        out.push((perm.clone(), sign(&perm)));
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| perm[i - 1] < perm[i]) else {
            break;
        };
        let j = (i..n).rev().find(|&j| perm[j] > perm[i - 1]).unwrap();
        perm.swap(i - 1, j);
        perm[i..].reverse();
    }
    out
}

fn sign(perm: &[usize]) -> f64 {
    let mut seen = vec![false; perm.len()];
    let mut s = 1.0;
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut k = start;
        while !seen[k] {
            seen[k] = true;
            k = perm[k];
            len += 1;
        }
        if len % 2 == 0 {
            s = -s;
        }
    }
    s
}

/// `sum_w eps(w) exp(i phi . w(rho))`.
pub fn weyl_sum(n: usize, phi: &[f64]) -> Result<Complex64> {
    if phi.len() != n {
        return invalid(format!("phi has length {}, expected {n}", phi.len()));
    }
    // Terms and their sum in double-double: the sum can be many orders of
    // magnitude below its N! unit terms.
    let rho = root_data(n)?.weyl_vector;
    let (mut re, mut im) = (Dd::ZERO, Dd::ZERO);
    for (w, eps) in permutations(n) {
        let theta = (0..n).fold(Dd::ZERO, |acc, i| acc.add(Dd::prod(phi[i], rho[w[i]])));
        let (c, s) = cis(theta);
        re = re.add(c.mul_f64(eps));
        im = im.add(s.mul_f64(eps));
    }
    Ok(Complex64::new(re.to_f64(), im.to_f64()))
}

/// `prod_{i<j} 2i sin((phi_i - phi_j)/2)`, the product side of the Weyl
/// denominator formula.
pub fn weyl_product(n: usize, phi: &[f64]) -> Result<Complex64> {
    if phi.len() != n {
        return invalid(format!("phi has length {}, expected {n}", phi.len()));
    }
    let mut acc = Complex64::new(1.0, 0.0);
    for i in 0..n {
        for j in i + 1..n {
            acc *= Complex64::new(0.0, 2.0 * ((phi[i] - phi[j]) / 2.0).sin());
        }
    }
    Ok(acc)
}

/// Sorted orbit representative of a `U(N)` flat connection.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FlatConnection {
    pub m: Vec<i64>,
}

impl FlatConnection {
    pub fn new(p: u32, m: &[i64]) -> Self {
        let mut m: Vec<i64> = m.iter().map(|x| x.rem_euclid(p as i64)).collect();
        m.sort_unstable_by(|a, b| b.cmp(a));
        Self { m }
    }

    /// Size of the `S_N` orbit of this vector.
    pub fn orbit_size(&self) -> u64 {
        let mut counts = std::collections::BTreeMap::new();
        for x in &self.m {
            *counts.entry(*x).or_insert(0u64) += 1;
        }
        counts.values().fold(factorial(self.m.len() as u64), |acc, &c| acc / factorial(c))
    }
}

fn factorial(n: u64) -> u64 {
    (1..=n).product()
}

/// Sorted multisets of size `n` from `0..p`.
pub fn flat_connections(p: u32, n: usize) -> Vec<FlatConnection> {
    fn rec(max: i64, left: usize, cur: &mut Vec<i64>, out: &mut Vec<FlatConnection>) {
        if left == 0 {
            out.push(FlatConnection { m: cur.clone() });
            return;
        }
        for v in (0..=max).rev() {
            cur.push(v);
            rec(v, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if p >= 1 {
        rec(p as i64 - 1, n, &mut Vec::new(), &mut out);
    }
    out
}

/// The coupling enters only through `g_s^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    #[serde(with = "crate::serde_complex::scalar")]
    pub gs2: Complex64,
}

impl Coupling {
    /// `g_s^2 = 4 pi i / (k + N)`.
    pub fn from_level(k: i64, n: usize) -> Result<Self> {
        let kh = k + n as i64;
        if kh == 0 {
            return invalid("k + N must be nonzero");
        }
        Ok(Self { gs2: Complex64::new(0.0, 4.0 * PI / kh as f64) })
    }

    pub fn from_gs(gs: Complex64) -> Self {
        Self { gs2: gs * gs }
    }

    pub fn from_gs_squared(gs2: Complex64) -> Self {
        Self { gs2 }
    }
}

/// Which integer vector stands for the class of `m`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Lift {
    /// Entries reduced to `{0, ..., p-1}`.
    #[default]
    Reduced,
    /// `sum m = 0`: reduce, then subtract `p` from the `sum/p` largest
    /// entries. Needs `sum m = 0 mod p`.
    Traceless,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactCSInput {
    pub ls: LensSpace,
    pub n: usize,
    pub coupling: Coupling,
    pub m: Vec<i64>,
    pub lift: Lift,
}

impl ExactCSInput {
    pub fn new(ls: LensSpace, n: usize, coupling: Coupling, m: Vec<i64>) -> Self {
        Self { ls, n, coupling, m, lift: Lift::Reduced }
    }

    pub fn with_lift(mut self, lift: Lift) -> Self {
        self.lift = lift;
        self
    }
}

/// Representative of `m` under `lift`, in the input's order.
pub fn lift_m(p: u32, m: &[i64], lift: Lift) -> Result<Vec<i64>> {
    let p = p as i64;
    let mut r: Vec<i64> = m.iter().map(|x| x.rem_euclid(p)).collect();
    if lift == Lift::Traceless {
        let s: i64 = r.iter().sum();
        if s % p != 0 {
            return invalid(format!("sum of m = {s} is not divisible by p = {p}"));
        }
        let mut idx: Vec<usize> = (0..r.len()).collect();
        idx.sort_by(|&a, &b| r[b].cmp(&r[a]).then(a.cmp(&b)));
        for &i in idx.iter().take((s / p) as usize) {
            r[i] -= p;
        }
    }
    Ok(r)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Convention {
    /// Always "C_N = 1".
    pub normalization: String,
    /// Representative of `m` actually used (empty for summed values).
    pub m_used: Vec<i64>,
    pub lift: Lift,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionValue {
    #[serde(with = "crate::serde_complex::scalar")]
    pub value: Complex64,
    pub convention: Convention,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactOptions {
    /// Largest rank allowed; the sum has `(N!)^2` terms.
    pub max_n: usize,
}

impl Default for ExactOptions {
    fn default() -> Self {
        Self { max_n: 7 }
    }
}

pub fn z_exact(input: &ExactCSInput) -> Result<PartitionValue> {
    z_exact_with(input, &ExactOptions::default())
}

pub fn z_exact_with(input: &ExactCSInput, opts: &ExactOptions) -> Result<PartitionValue> {
    let n = input.n;
    if n < 1 {
        return invalid("N must be at least 1");
    }
    if n > opts.max_n {
        return Err(Error::Budget(format!("N = {n} exceeds the permutation budget N <= {}", opts.max_n)));
    }
    if input.m.len() != n {
        return invalid(format!("m has {} entries, expected N = {n}", input.m.len()));
    }
    let g2 = input.coupling.gs2;
    if g2 == Complex64::new(0.0, 0.0) {
        return invalid("coupling must be nonzero");
    }
    let (p, q) = (input.ls.p() as f64, input.ls.q() as f64);
    let m = lift_m(input.ls.p(), &input.m, input.lift)?;
    let rho = root_data(n)?.weyl_vector;
    let perms = permutations(n);

    let m2: f64 = m.iter().map(|&x| (x * x) as f64).sum();
    let prefactor = (-(4.0 * PI * PI * q * m2) / (g2 * p)).exp();

    // Outer sum over w~ in parallel; partial sums merged in a fixed order.
    let partial: Vec<Complex64> = perms
        .par_iter()
        .map(|(wt, _)| {
            let mw: Vec<f64> = (0..n).map(|i| m[wt[i]] as f64).collect();
            let base: f64 = (0..n).map(|i| mw[i] * q * rho[i]).sum();
            let mut acc = CompensatedSum::default();
            for (w, eps) in &perms {
                let wr: f64 = (0..n).map(|i| rho[w[i]] * rho[i]).sum();
                let phase: f64 = base + (0..n).map(|i| mw[i] * rho[w[i]]).sum::<f64>();
                let z = g2 * (wr / (2.0 * p)) + Complex64::new(0.0, 2.0 * PI * phase / p);
                acc.add(z.exp() * *eps);
            }
            acc.value()
        })
        .collect();
    let total: CompensatedSum = partial.into_iter().collect();
    Ok(PartitionValue {
        value: prefactor * total.value(),
        convention: Convention { normalization: "C_N = 1".into(), m_used: m, lift: input.lift },
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum GaugeGroup {
    /// Sectors with `sum m = 0 mod p`, each at its traceless representative.
    #[default]
    SpecialUnitary,
    /// Every sorted `m` in `{0..p-1}^N` at its reduced representative.
    Unitary,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Weighting {
    /// One term per sorted representative.
    #[default]
    Representatives,
    /// Each representative weighted by its `S_N` orbit size.
    OrbitSize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FullSumOptions {
    pub group: GaugeGroup,
    pub weighting: Weighting,
    pub exact: ExactOptions,
}

/// Sectors entering the summed invariant under `opts`.
pub fn summed_sectors(p: u32, n: usize, group: GaugeGroup) -> Vec<FlatConnection> {
    flat_connections(p, n)
        .into_iter()
        .filter(|f| group == GaugeGroup::Unitary || f.m.iter().sum::<i64>() % p as i64 == 0)
        .collect()
}

/// Sum of `z_exact` over flat connections at level `k`.
pub fn z_full(ls: LensSpace, n: usize, k: i64, opts: &FullSumOptions) -> Result<PartitionValue> {
    let coupling = Coupling::from_level(k, n)?;
    let lift = match opts.group {
        GaugeGroup::SpecialUnitary => Lift::Traceless,
        GaugeGroup::Unitary => Lift::Reduced,
    };
    let mut acc = CompensatedSum::default();
    for f in summed_sectors(ls.p(), n, opts.group) {
        let w = match opts.weighting {
            Weighting::Representatives => 1.0,
            Weighting::OrbitSize => f.orbit_size() as f64,
        };
        let input = ExactCSInput { ls, n, coupling, m: f.m.clone(), lift };
        acc.add(z_exact_with(&input, &opts.exact)?.value * w);
    }
    Ok(PartitionValue {
        value: acc.value(),
        convention: Convention { normalization: "C_N = 1".into(), m_used: Vec::new(), lift },
    })
}

/// Lens spaces homeomorphic to `L(p,q)`: `q' = +-q` or `q q' = +-1 mod p`.
pub fn homeomorphic(a: LensSpace, b: LensSpace) -> bool {
    if a.p() != b.p() {
        return false;
    }
    let p = a.p() as i64;
    let (q, r) = (a.q() as i64, b.q() as i64);
    let m = |x: i64| x.rem_euclid(p);
    m(q - r) == 0 || m(q + r) == 0 || m(q * r - 1) == 0 || m(q * r + 1) == 0
}
