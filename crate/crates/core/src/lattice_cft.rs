//! Even lattices, the central-extension cocycle on lattice-valued branched
//! functions, discriminant groups and genus-1 theta functions.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::boundary::{pairing, BranchedFunction};
use crate::error::{Error, Result};
use crate::intlin::{determinant, smith_normal_form, IMat};
use crate::linalg::{max_abs, rank, re, CMat, C, I};
use crate::oav::OpenAbelianVariety;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvenLattice {
    gram: IMat,
}

pub fn make_even_lattice(gram: IMat) -> Result<EvenLattice> {
    let r = gram.len();
    if gram.iter().any(|row| row.len() != r) {
        return Err(Error::Lattice("Gram matrix is not square".into()));
    }
    for i in 0..r {
        for j in 0..r {
            if gram[i][j] != gram[j][i] {
                return Err(Error::Lattice("Gram matrix is not symmetric".into()));
            }
        }
        if gram[i][i] % 2 != 0 {
            return Err(Error::Lattice(format!("diagonal entry {} is odd", gram[i][i])));
        }
    }
    for k in 1..=r {
        let minor: IMat = gram[..k].iter().map(|row| row[..k].to_vec()).collect();
        if determinant(&minor) <= 0 {
            return Err(Error::Lattice("Gram matrix is not positive definite".into()));
        }
    }
    Ok(EvenLattice { gram })
}

impl EvenLattice {
    pub fn a1() -> Self {
        make_even_lattice(vec![vec![2]]).expect("A1")
    }

    pub fn a2() -> Self {
        make_even_lattice(vec![vec![2, -1], vec![-1, 2]]).expect("A2")
    }

    pub fn e8() -> Self {
        let mut g = vec![vec![0i64; 8]; 8];
        let edges = [(0, 2), (1, 3), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7)];
        for (i, row) in g.iter_mut().enumerate() {
            row[i] = 2;
        }
        for (a, b) in edges {
            g[a][b] = -1;
            g[b][a] = -1;
        }
        make_even_lattice(g).expect("E8")
    }

    pub fn rank(&self) -> usize {
        self.gram.len()
    }

    pub fn gram(&self) -> &IMat {
        &self.gram
    }

    pub fn inner(&self, x: &[i64], y: &[i64]) -> i64 {
        let mut acc = 0;
        for (i, row) in self.gram.iter().enumerate() {
            for (j, g) in row.iter().enumerate() {
                acc += x[i] * g * y[j];
            }
        }
        acc
    }

    fn inner_f(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (i, row) in self.gram.iter().enumerate() {
            for (j, &g) in row.iter().enumerate() {
                acc += x[i] * g as f64 * y[j];
            }
        }
        acc
    }

    fn gram_f(&self) -> Vec<Vec<f64>> {
        self.gram.iter().map(|r| r.iter().map(|&x| x as f64).collect()).collect()
    }
}

/// A ℤ/2-valued bilinear form on the lattice, stored as a 0/1 matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BForm {
    b: IMat,
}

impl BForm {
    pub fn matrix(&self) -> &IMat {
        &self.b
    }

    /// `b(x, y)` as an integer (not reduced mod 2).
    pub fn eval(&self, x: &[i64], y: &[i64]) -> i64 {
        let mut acc = 0;
        for (i, row) in self.b.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                acc += x[i] * v * y[j];
            }
        }
        acc
    }

    /// Checks `b(x, x) ≡ ½⟨x, x⟩ (mod 2)`.
    pub fn satisfies(&self, l: &EvenLattice, x: &[i64]) -> bool {
        (self.eval(x, x) - l.inner(x, x) / 2).rem_euclid(2) == 0
    }
}

/// The upper-triangular choice `B_ij = G_ij mod 2` (`i < j`),
/// `B_ii = G_ii/2 mod 2`.
pub fn attach_b(l: &EvenLattice) -> Result<BForm> {
    let r = l.rank();
    let g = l.gram();
    let mut b = vec![vec![0i64; r]; r];
    for i in 0..r {
        b[i][i] = (g[i][i] / 2).rem_euclid(2);
        for j in i + 1..r {
            b[i][j] = g[i][j].rem_euclid(2);
        }
    }
    let form = BForm { b };
    for i in 0..r {
        for j in i..r {
            let mut x = vec![0i64; r];
            x[i] += 1;
            x[j] += 1;
            if !form.satisfies(l, &x) {
                return Err(Error::Lattice("b-form congruence fails".into()));
            }
        }
    }
    Ok(form)
}

/// A map `[0, 1] → L_ℂ`: one branched function per lattice coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeBranchedMap {
    comps: Vec<BranchedFunction>,
}

impl LatticeBranchedMap {
    pub fn new(comps: Vec<BranchedFunction>) -> Result<Self> {
        if let Some(f) = comps.first() {
            let n = f.truncation();
            if let Some(g) = comps.iter().find(|g| g.truncation() != n) {
                return Err(Error::TruncationMismatch(n, g.truncation()));
            }
        }
        Ok(Self { comps })
    }

    pub fn zero(rank: usize, truncation: usize) -> Self {
        Self { comps: vec![BranchedFunction::zero(truncation); rank] }
    }

    pub fn components(&self) -> &[BranchedFunction] {
        &self.comps
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a + b).collect() }
    }

    /// Degree vector, rounded to integers.
    pub fn degree(&self, tol: f64) -> Result<Vec<i64>> {
        self.comps
            .iter()
            .map(|f| {
                let d = f.degree();
                let r = d.re.round();
                if (d - re(r)).norm() > tol {
                    Err(Error::Lattice(format!("degree {d} is not integral")))
                } else {
                    Ok(r as i64)
                }
            })
            .collect()
    }
}

/// Exponent `Σ G_αβ (S(f^α, g^β) + ½Δ_f^α Δ_g^β) + b(Δ_f, Δ_g)` of the
/// cocycle, with `S` supplied by the caller.
pub fn cocycle_exponent_with(
    l: &EvenLattice,
    b: &BForm,
    f: &LatticeBranchedMap,
    g: &LatticeBranchedMap,
    s: impl Fn(&BranchedFunction, &BranchedFunction) -> Result<C>,
) -> Result<C> {
    let r = l.rank();
    if f.comps.len() != r || g.comps.len() != r {
        return Err(Error::Dimension("map rank differs from lattice rank".into()));
    }
    let df = f.degree(1e-9)?;
    let dg = g.degree(1e-9)?;
    let mut acc = C::new(0.0, 0.0);
    for (a, row) in l.gram().iter().enumerate() {
        for (bb, &gab) in row.iter().enumerate() {
            if gab == 0 {
                continue;
            }
            let sab = s(&f.comps[a], &g.comps[bb])? + 0.5 * f.comps[a].degree() * g.comps[bb].degree();
            acc += gab as f64 * sab;
        }
    }
    Ok(acc + b.eval(&df, &dg) as f64)
}

/// `c(f, g) = exp(πi·[∮⟨f, dg⟩ − ⟨Δ_f, g(0)⟩ + b(Δ_f, Δ_g)])`.
pub fn cocycle(l: &EvenLattice, b: &BForm, f: &LatticeBranchedMap, g: &LatticeBranchedMap) -> Result<C> {
    let e = cocycle_exponent_with(l, b, f, g, pairing)?;
    Ok((PI * I * e).exp())
}

/// `|L′/L| = det G`.
pub fn discriminant(l: &EvenLattice) -> u64 {
    determinant(l.gram()) as u64
}

/// Representatives of `L′/L` in lattice-basis coordinates.
pub fn discriminant_representatives(l: &EvenLattice) -> Vec<Vec<f64>> {
    let s = smith_normal_form(l.gram());
    let r = l.rank();
    let mut reps = vec![vec![0i64; r]];
    for (i, &d) in s.d.iter().enumerate() {
        let mut next = Vec::new();
        for rep in &reps {
            for z in 0..d.abs() {
                let mut v = rep.clone();
                v[i] = z;
                next.push(v);
            }
        }
        reps = next;
    }
    reps.iter()
        .map(|z| {
            (0..r)
                .map(|row| (0..r).map(|k| s.v[row][k] as f64 * z[k] as f64 / s.d[k] as f64).sum())
                .collect()
        })
        .collect()
}

/// A boundary label: a coset representative `λ ∈ L′` in lattice-basis
/// coordinates and the orientation sign of its boundary component.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Label {
    pub lambda: Vec<f64>,
    pub epsilon: i8,
}

/// `|L′/L|^g` when `Σ ε_j λ_j ∈ L`, else 0.
pub fn cft_dimension(l: &EvenLattice, genus: u32, labels: &[Label]) -> Result<u64> {
    let r = l.rank();
    let g = l.gram_f();
    let tol = 1e-9;
    let mut total = vec![0.0; r];
    for lab in labels {
        if lab.lambda.len() != r {
            return Err(Error::Lattice("label has the wrong rank".into()));
        }
        if lab.epsilon != 1 && lab.epsilon != -1 {
            return Err(Error::Lattice("label sign must be ±1".into()));
        }
        for (i, row) in g.iter().enumerate() {
            let v: f64 = row.iter().zip(&lab.lambda).map(|(a, b)| a * b).sum();
            if (v - v.round()).abs() > tol {
                return Err(Error::Lattice(format!("label {:?} is not in the dual lattice", lab.lambda)));
            }
            let _ = i;
        }
        for (t, x) in total.iter_mut().zip(&lab.lambda) {
            *t += lab.epsilon as f64 * x;
        }
    }
    if total.iter().all(|x| (x - x.round()).abs() <= tol) {
        Ok(discriminant(l).pow(genus))
    } else {
        Ok(0)
    }
}

/// Points `μ + n` (`n ∈ ℤ^r`) with `⟨x, x⟩ ≤ bound`, by Fincke–Pohst
/// enumeration, sorted by norm and then lexicographically.
pub fn short_vectors(l: &EvenLattice, shift: &[f64], bound: f64) -> Vec<Vec<f64>> {
    let r = l.rank();
    let g = l.gram_f();
    // q-form: Q(x) = Σ_i q_ii (x_i + Σ_{j>i} q_ij x_j)^2
    let mut q = g.clone();
    for i in 0..r {
        for j in i + 1..r {
            q[j][i] = q[i][j];
            q[i][j] /= q[i][i];
        }
        for k in i + 1..r {
            for l2 in k..r {
                q[k][l2] -= q[k][i] * q[i][l2];
            }
        }
    }
    let mut out = Vec::new();
    let mut x = vec![0.0; r];
    fn rec(
        i: usize,
        q: &[Vec<f64>],
        shift: &[f64],
        remaining: f64,
        x: &mut Vec<f64>,
        out: &mut Vec<Vec<f64>>,
    ) {
        let r = x.len();
        let center: f64 = -(i + 1..r).map(|j| q[i][j] * x[j]).sum::<f64>();
        let half = (remaining.max(0.0) / q[i][i]).sqrt();
        let lo = (center - half - shift[i]).ceil() as i64;
        let hi = (center + half - shift[i]).floor() as i64;
        for n in lo..=hi {
            x[i] = n as f64 + shift[i];
            let t = x[i] - center;
            let rem = remaining - q[i][i] * t * t;
            if rem < -1e-9 {
                continue;
            }
            if i == 0 {
                out.push(x.clone());
            } else {
                rec(i - 1, q, shift, rem, x, out);
            }
        }
    }
    if r > 0 {
        rec(r - 1, &q, shift, bound, &mut x, &mut out);
    }
    let mut keyed: Vec<(f64, Vec<f64>)> = out.into_iter().map(|v| (l.inner_f(&v, &v), v)).collect();
    keyed.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap()
            .then_with(|| a.1.partial_cmp(&b.1).unwrap())
    });
    keyed.into_iter().map(|(_, v)| v).collect()
}

/// Default cutoff radius: `exp(−π Im τ R²) < 1e−12`.
pub fn default_radius(tau: C) -> f64 {
    (12.0 * 10f64.ln() / (PI * tau.im)).sqrt() * 1.1
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThetaReport {
    pub rank: usize,
    pub expected: u64,
    pub radius: f64,
    pub terms: Vec<usize>,
    pub singular_values: Vec<f64>,
}

/// Numerical rank of the theta functions `θ_μ`, `μ ∈ L′/L`, evaluated at
/// `samples` random points.
pub fn theta_rank(l: &EvenLattice, tau: C, radius: Option<f64>, samples: usize, seed: u64) -> Result<ThetaReport> {
    if tau.im <= 0.0 {
        return Err(Error::Input(format!("τ = {tau} is not in the upper half plane")));
    }
    let radius = radius.unwrap_or_else(|| default_radius(tau));
    let reps = discriminant_representatives(l);
    let r = l.rank();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zs: Vec<Vec<C>> = (0..samples)
        .map(|_| (0..r).map(|_| C::new(rng.gen_range(0.0..1.0), rng.gen_range(-0.2..0.2))).collect())
        .collect();
    let g = l.gram_f();
    let mut m = CMat::zeros(samples, reps.len());
    let mut terms = Vec::new();
    for (col, mu) in reps.iter().enumerate() {
        let pts = short_vectors(l, mu, radius * radius);
        terms.push(pts.len());
        for (row, z) in zs.iter().enumerate() {
            let mut acc = C::new(0.0, 0.0);
            for x in &pts {
                let norm = l.inner_f(x, x);
                let mut lz = C::new(0.0, 0.0);
                for (i, gi) in g.iter().enumerate() {
                    for (j, &gij) in gi.iter().enumerate() {
                        lz += x[i] * gij * z[j];
                    }
                }
                acc += (PI * I * tau * norm + 2.0 * PI * I * lz).exp();
            }
            m[(row, col)] = acc;
        }
    }
    let sv = crate::linalg::singular_values(&m);
    Ok(ThetaReport {
        rank: rank(&m, 1e-8),
        expected: discriminant(l),
        radius,
        terms,
        singular_values: sv,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct WlLattice {
    pub rank: usize,
    /// Generators in `ℂ^g ⊗ ℂ^r`, flattened with the lattice index fastest.
    pub generators: Vec<Vec<C>>,
}

/// The lattice of `L`-valued periods of the normalized holomorphic basis of
/// a closed genus-1 variety: generators `S(u, ω) ⊗ e_α` for `u` running
/// over the symplectic lattice basis.
pub fn wl_lattice(x: &OpenAbelianVariety, l: &EvenLattice) -> Result<WlLattice> {
    if !x.is_closed() {
        return Err(Error::NotClosed("W_L needs a closed variety".into()));
    }
    if x.genus() != 1 {
        return Err(Error::Lattice(format!("W_L needs genus 1, got {}", x.genus())));
    }
    let tau = x.period_matrix()?;
    let basis = x.symplectic_lattice()?;
    let a = basis.columns(0, 1).into_owned();
    let b = basis.columns(1, 1).into_owned();
    let am = x.w().transpose() * x.omega() * &b;
    let omega = x.w() * am.try_inverse().ok_or_else(|| Error::DegenerateLattice("singular a-period".into()))?;
    debug_assert!(max_abs(&(a.transpose() * x.omega() * &omega - &tau)) < 1e-6);
    let r = l.rank();
    let mut gens = Vec::new();
    for u in [&a, &b] {
        let period = (u.transpose() * x.omega() * &omega)[(0, 0)];
        for alpha in 0..r {
            let mut v = vec![C::new(0.0, 0.0); r];
            v[alpha] = period;
            gens.push(v);
        }
    }
    let real = CMat::from_fn(2 * r, gens.len(), |i, j| {
        let z = gens[j][i % r];
        re(if i < r { z.re } else { z.im })
    });
    Ok(WlLattice { rank: rank(&real, 1e-10), generators: gens })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn odd_lattice_rejected() {
        assert!(make_even_lattice(vec![vec![1]]).is_err());
        assert!(make_even_lattice(vec![vec![2, 1], vec![0, 2]]).is_err());
        assert!(make_even_lattice(vec![vec![2, 3], vec![3, 2]]).is_err());
    }

    #[test]
    fn discriminants() {
        assert_eq!(discriminant(&EvenLattice::a1()), 2);
        assert_eq!(discriminant(&EvenLattice::a2()), 3);
        assert_eq!(discriminant(&EvenLattice::e8()), 1);
        assert_eq!(discriminant_representatives(&EvenLattice::a2()).len(), 3);
    }

    #[test]
    fn b_form_of_a1() {
        let b = attach_b(&EvenLattice::a1()).unwrap();
        assert_eq!(b.eval(&[1], &[1]), 1);
    }

    #[test]
    fn e8_shell_counts() {
        let v = short_vectors(&EvenLattice::e8(), &[0.0; 8], 4.0 + 1e-9);
        assert_eq!(v.len(), 1 + 240 + 2160);
    }

    fn winding_map(d: &[i64], n: usize) -> LatticeBranchedMap {
        LatticeBranchedMap::new(d.iter().map(|&k| BranchedFunction::winding(re(k as f64), n)).collect()).unwrap()
    }

    #[test]
    fn a2_winding_commutator() {
        let l = EvenLattice::a2();
        let b = attach_b(&l).unwrap();
        let f = winding_map(&[1, 0], 4);
        let g = winding_map(&[0, 1], 4);
        let ratio = cocycle(&l, &b, &f, &g).unwrap() / cocycle(&l, &b, &g, &f).unwrap();
        assert!((ratio + 1.0).norm() < 1e-12);
    }

    #[test]
    fn theta_ranks_match_discriminant() {
        let tau = C::new(0.1, 1.1);
        for l in [EvenLattice::a1(), EvenLattice::a2(), EvenLattice::e8()] {
            let rep = theta_rank(&l, tau, None, 6, 7).unwrap();
            assert_eq!(rep.rank as u64, rep.expected);
        }
    }

    #[test]
    fn wl_rank_for_torus() {
        let x = OpenAbelianVariety::torus(C::new(0.2, 1.3));
        let w = wl_lattice(&x, &EvenLattice::a2()).unwrap();
        assert_eq!(w.rank, 4);
    }
}
