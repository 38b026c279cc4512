//! Integer linear algebra: symplectic normal form of alternating forms,
//! Smith normal form, exact determinants.

use crate::error::{Error, Result};

pub type IMat = Vec<Vec<i64>>;

fn gram_of(basis: &IMat, g: &IMat) -> IMat {
    let n = basis.len();
    let mut out = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0i64;
            for (k, gk) in g.iter().enumerate() {
                if basis[i][k] == 0 {
                    continue;
                }
                for (l, &gkl) in gk.iter().enumerate() {
                    acc += basis[i][k] * gkl * basis[j][l];
                }
            }
            out[i][j] = acc;
        }
    }
    out
}

fn pair(g: &IMat, x: &[i64], y: &[i64]) -> i64 {
    let mut acc = 0;
    for (k, gk) in g.iter().enumerate() {
        if x[k] == 0 {
            continue;
        }
        for (l, &gkl) in gk.iter().enumerate() {
            acc += x[k] * gkl * y[l];
        }
    }
    acc
}

fn axpy(y: &mut [i64], a: i64, x: &[i64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Result of [`alternating_normal_form`].
#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticBasis {
    /// Rows are the new basis vectors in old coordinates, ordered
    /// `a_1, b_1, a_2, b_2, …` followed by a basis of the radical.
    pub basis: IMat,
    /// `⟨a_k, b_k⟩ = d_k > 0`, each dividing the next.
    pub divisors: Vec<i64>,
}

impl SymplecticBasis {
    pub fn is_unimodular(&self) -> bool {
        self.divisors.iter().all(|&d| d == 1) && 2 * self.divisors.len() == self.basis.len()
    }
}

/// Brings an alternating integer matrix to the block form
/// `diag([[0, d_1], [−d_1, 0]], …, 0)` by a unimodular change of basis.
///
/// Pivots on the entry of smallest nonzero modulus (first in row-major
/// order among ties), so an already-normal input is left unchanged.
pub fn alternating_normal_form(g: &IMat) -> Result<SymplecticBasis> {
    let n = g.len();
    for (i, row) in g.iter().enumerate() {
        if row.len() != n {
            return Err(Error::Dimension("alternating matrix is not square".into()));
        }
        if row[i] != 0 || (0..n).any(|j| row[j] != -g[j][i]) {
            return Err(Error::Lattice("form is not alternating".into()));
        }
    }
    let mut vecs: IMat = (0..n)
        .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
        .collect();
    let mut done: IMat = Vec::new();
    let mut divisors = Vec::new();
    'outer: loop {
        let gram = gram_of(&vecs, g);
        let m = vecs.len();
        let mut best: Option<(usize, usize, i64)> = None;
        for p in 0..m {
            for q in 0..m {
                let v = gram[p][q];
                if v != 0 && best.is_none_or(|(_, _, b)| v.abs() < b.abs()) {
                    best = Some((p, q, v));
                }
            }
        }
        let Some((p, q, _)) = best else { break };
        let mut e = vecs[p].clone();
        let mut f = vecs[q].clone();
        let d = pair(g, &e, &f);
        let mut rest: IMat = (0..m).filter(|&r| r != p && r != q).map(|r| vecs[r].clone()).collect();
        for x in rest.iter_mut() {
            let a = pair(g, &e, x);
            let b = pair(g, &f, x);
            if a % d != 0 || b % d != 0 {
                axpy(x, -a.div_euclid(d), &f);
                axpy(x, b.div_euclid(d), &e);
                vecs = [vec![e, f], rest].concat();
                continue 'outer;
            }
            axpy(x, -a / d, &f);
            axpy(x, b / d, &e);
        }
        for r in 0..rest.len() {
            for s in 0..rest.len() {
                if pair(g, &rest[r], &rest[s]) % d != 0 {
                    let xr = rest[r].clone();
                    axpy(&mut e, 1, &xr);
                    vecs = [vec![e, f], rest].concat();
                    continue 'outer;
                }
            }
        }
        if d < 0 {
            f.iter_mut().for_each(|v| *v = -*v);
        }
        done.push(e);
        done.push(f);
        divisors.push(d.abs());
        vecs = rest;
    }
    done.extend(vecs);
    Ok(SymplecticBasis { basis: done, divisors })
}

/// Smith normal form `U A V = D` with `U`, `V` unimodular.
#[derive(Clone, Debug, PartialEq)]
pub struct Smith {
    pub u: IMat,
    pub d: Vec<i64>,
    pub v: IMat,
}

pub fn smith_normal_form(a: &IMat) -> Smith {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut m = a.clone();
    let mut u: IMat = (0..rows).map(|i| (0..rows).map(|j| i64::from(i == j)).collect()).collect();
    let mut v: IMat = (0..cols).map(|i| (0..cols).map(|j| i64::from(i == j)).collect()).collect();
    let k = rows.min(cols);
    let mut t = 0;
    while t < k {
        // pivot: smallest nonzero modulus in the trailing block
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if m[i][j] != 0 && best.is_none_or(|(bi, bj)| m[i][j].abs() < m[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        m.swap(t, pi);
        u.swap(t, pi);
        for row in m.iter_mut() {
            row.swap(t, pj);
        }
        for row in v.iter_mut() {
            row.swap(t, pj);
        }
        let p = m[t][t];
        let mut dirty = false;
        for i in t + 1..rows {
            let q = m[i][t].div_euclid(p);
            if q != 0 {
                let rt = m[t].clone();
                axpy(&mut m[i], -q, &rt);
                let ut = u[t].clone();
                axpy(&mut u[i], -q, &ut);
            }
            dirty |= m[i][t] != 0;
        }
        for j in t + 1..cols {
            let q = m[t][j].div_euclid(p);
            if q != 0 {
                for row in m.iter_mut() {
                    row[j] -= q * row[t];
                }
                for row in v.iter_mut() {
                    row[j] -= q * row[t];
                }
            }
            dirty |= m[t][j] != 0;
        }
        if dirty {
            continue;
        }
        if let Some(i) = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| m[i][j] % p != 0)) {
            let ri = m[i].clone();
            axpy(&mut m[t], 1, &ri);
            let ui = u[i].clone();
            axpy(&mut u[t], 1, &ui);
            continue;
        }
        if p < 0 {
            m[t].iter_mut().for_each(|x| *x = -*x);
            u[t].iter_mut().for_each(|x| *x = -*x);
        }
        t += 1;
    }
    let d = (0..k).map(|i| m[i][i]).collect();
    Smith { u, d, v }
}

/// Exact determinant by fraction-free elimination.
pub fn determinant(a: &IMat) -> i128 {
    let n = a.len();
    if n == 0 {
        return 1;
    }
    let mut m: Vec<Vec<i128>> = a.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if m[k][k] == 0 {
            match (k + 1..n).find(|&i| m[i][k] != 0) {
                Some(i) => {
                    m.swap(k, i);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
            }
        }
        prev = m[k][k];
    }
    sign * m[n - 1][n - 1]
}

/// Rounds a real matrix to integers, failing if any entry is farther than
/// `tol` from an integer.
pub fn round_matrix(a: &[Vec<f64>], tol: f64) -> Result<IMat> {
    a.iter()
        .map(|row| {
            row.iter()
                .map(|&x| {
                    let r = x.round();
                    if (x - r).abs() > tol {
                        Err(Error::Lattice(format!("entry {x} is not integral")))
                    } else {
                        Ok(r as i64)
                    }
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matmul(a: &IMat, b: &IMat) -> IMat {
        let n = a.len();
        let m = b[0].len();
        (0..n)
            .map(|i| (0..m).map(|j| (0..b.len()).map(|k| a[i][k] * b[k][j]).sum()).collect())
            .collect()
    }

    #[test]
    fn standard_form_is_fixed() {
        let g = vec![vec![0, 1], vec![-1, 0]];
        let s = alternating_normal_form(&g).unwrap();
        assert_eq!(s.basis, vec![vec![1, 0], vec![0, 1]]);
        assert!(s.is_unimodular());
    }

    #[test]
    fn reduces_to_blocks() {
        let g = vec![
            vec![0, 2, 3, 1],
            vec![-2, 0, 1, 4],
            vec![-3, -1, 0, 5],
            vec![-1, -4, -5, 0],
        ];
        let s = alternating_normal_form(&g).unwrap();
        let ng = gram_of(&s.basis, &g);
        assert_eq!(ng[0][1], s.divisors[0]);
        assert_eq!(ng[2][3], s.divisors[1]);
        assert_eq!(ng[0][2], 0);
        assert_eq!(ng[1][3], 0);
        assert_eq!(s.divisors[0] * s.divisors[1], determinant(&g).abs().isqrt() as i64);
    }

    #[test]
    fn smith_of_a2() {
        let g = vec![vec![2, -1], vec![-1, 2]];
        let s = smith_normal_form(&g);
        assert_eq!(s.d, vec![1, 3]);
        let prod = matmul(&matmul(&s.u, &g), &s.v);
        assert_eq!(prod, vec![vec![1, 0], vec![0, 3]]);
    }

    #[test]
    fn determinant_examples() {
        assert_eq!(determinant(&vec![vec![2, -1], vec![-1, 2]]), 3);
        assert_eq!(determinant(&vec![vec![0, 1], vec![1, 0]]), -1);
    }
}
