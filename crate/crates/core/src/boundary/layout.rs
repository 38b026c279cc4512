//! Coordinates on the truncated space `V = ⊕_A V_A`.
//!
//! Each component with boundaries `b_0 < … < b_{m-1}` (by id) contributes
//! `2N` mode coordinates per boundary (`c_{-N..-1}, c_{1..N}`), followed by
//! `(c_0, Δ)` for every boundary except the gauge boundary `b_0`. On `b_0`
//! the constant is fixed to zero and the degree is determined by the
//! degree-sum-zero condition, so a component contributes
//! `m(2N+2) − 2` complex coordinates.
//!
//! The "full" coordinates carry `(Δ, c_{-N}, …, c_N)` for every boundary
//! with no constraint or gauge; they are where the forms are written down.

use std::f64::consts::PI;

use crate::error::Result;
use crate::linalg::{re, CMat, CVec, C, I};

use super::block::BlockVector;
use super::function::BranchedFunction;
use super::signature::{Ordering, Signature};

#[derive(Clone, Debug, PartialEq)]
pub struct VLayout {
    signature: Signature,
    truncation: usize,
    offsets: Vec<usize>,
    dim: usize,
}

/// Which kind of coordinate a V-coordinate index is.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coord {
    Mode { boundary: usize, n: i64 },
    Constant { boundary: usize },
    Degree { boundary: usize },
}

impl VLayout {
    pub fn new(signature: Signature, truncation: usize) -> Self {
        let mut offsets = Vec::new();
        let mut dim = 0;
        for comp in signature.components() {
            offsets.push(dim);
            let m = comp.boundaries.len();
            dim += 2 * truncation * m + 2 * (m - 1);
        }
        Self { signature, truncation, offsets, dim }
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn full_dim(&self) -> usize {
        self.signature.boundary_count() * self.block()
    }

    fn block(&self) -> usize {
        2 * self.truncation + 2
    }

    pub fn full_degree_index(&self, boundary: usize) -> usize {
        boundary * self.block()
    }

    pub fn full_coeff_index(&self, boundary: usize, n: i64) -> usize {
        boundary * self.block() + 1 + (n + self.truncation as i64) as usize
    }

    /// Describes every V coordinate, in order. Boundaries are indexed by
    /// their canonical position in the signature.
    pub fn coords(&self) -> Vec<Coord> {
        let big_n = self.truncation as i64;
        let mut out = Vec::with_capacity(self.dim);
        let mut first = 0;
        for comp in self.signature.components() {
            let m = comp.boundaries.len();
            for k in 0..m {
                for n in (-big_n..=-1).chain(1..=big_n) {
                    out.push(Coord::Mode { boundary: first + k, n });
                }
            }
            for k in 1..m {
                out.push(Coord::Constant { boundary: first + k });
                out.push(Coord::Degree { boundary: first + k });
            }
            first += m;
        }
        out
    }

    /// Linear map from V coordinates to full coordinates.
    pub fn lift_matrix(&self) -> CMat {
        let mut l = CMat::zeros(self.full_dim(), self.dim);
        let mut first = 0;
        let eps: Vec<f64> = self.signature.boundaries().map(|b| b.epsilon()).collect();
        let comp_start: Vec<usize> = self
            .signature
            .components()
            .iter()
            .scan(0, |acc, c| {
                let s = *acc;
                *acc += c.boundaries.len();
                Some(s)
            })
            .collect();
        let _ = &mut first;
        for (col, coord) in self.coords().into_iter().enumerate() {
            match coord {
                Coord::Mode { boundary, n } => {
                    l[(self.full_coeff_index(boundary, n), col)] = re(1.0);
                }
                Coord::Constant { boundary } => {
                    l[(self.full_coeff_index(boundary, 0), col)] = re(1.0);
                }
                Coord::Degree { boundary } => {
                    l[(self.full_degree_index(boundary), col)] = re(1.0);
                    let gauge = *comp_start.iter().filter(|&&s| s <= boundary).last().unwrap();
                    l[(self.full_degree_index(gauge), col)] = re(-eps[gauge] * eps[boundary]);
                }
            }
        }
        l
    }

    /// Linear map from full coordinates to gauge-fixed V coordinates. The
    /// degree of each gauge boundary is dropped, so this is a left inverse
    /// of [`lift_matrix`](Self::lift_matrix) only on degree-balanced data.
    pub fn project_matrix(&self) -> CMat {
        let mut p = CMat::zeros(self.dim, self.full_dim());
        let comp_start = self.component_starts();
        for (row, coord) in self.coords().into_iter().enumerate() {
            match coord {
                Coord::Mode { boundary, n } => {
                    p[(row, self.full_coeff_index(boundary, n))] = re(1.0);
                }
                Coord::Constant { boundary } => {
                    let gauge = *comp_start.iter().filter(|&&s| s <= boundary).last().unwrap();
                    p[(row, self.full_coeff_index(boundary, 0))] = re(1.0);
                    p[(row, self.full_coeff_index(gauge, 0))] = re(-1.0);
                }
                Coord::Degree { boundary } => {
                    p[(row, self.full_degree_index(boundary))] = re(1.0);
                }
            }
        }
        p
    }

    fn component_starts(&self) -> Vec<usize> {
        let mut starts = Vec::new();
        let mut at = 0;
        for c in self.signature.components() {
            starts.push(at);
            at += c.boundaries.len();
        }
        starts
    }

    /// Full coordinates of a block vector.
    pub fn full_from_block(&self, x: &BlockVector) -> CVec {
        let big_n = self.truncation as i64;
        let mut v = CVec::zeros(self.full_dim());
        for (b, f) in x.funcs().iter().enumerate() {
            v[self.full_degree_index(b)] = f.degree();
            for n in -big_n..=big_n {
                v[self.full_coeff_index(b, n)] = f.coeff(n);
            }
        }
        v
    }

    pub fn block_from_full(&self, v: &CVec) -> BlockVector {
        let big_n = self.truncation as i64;
        let funcs = (0..self.signature.boundary_count())
            .map(|b| {
                let mut f = BranchedFunction::winding(v[self.full_degree_index(b)], self.truncation);
                for n in -big_n..=big_n {
                    f.set_coeff(n, v[self.full_coeff_index(b, n)]);
                }
                f
            })
            .collect();
        BlockVector::new(self.signature.clone(), funcs).expect("layout-consistent")
    }

    /// V coordinates of a block vector (gauge-fixed).
    pub fn coords_from_block(&self, x: &BlockVector) -> Result<CVec> {
        if x.signature() != &self.signature {
            return Err(crate::Error::SignatureMismatch(
                "block vector does not match layout".into(),
            ));
        }
        if x.truncation() != self.truncation {
            return Err(crate::Error::TruncationMismatch(x.truncation(), self.truncation));
        }
        Ok(self.project_matrix() * self.full_from_block(x))
    }

    pub fn block_from_coords(&self, v: &CVec) -> BlockVector {
        self.block_from_full(&(self.lift_matrix() * v))
    }

    /// Matrix of `S_<` on full coordinates.
    pub fn full_gram(&self, order: &Ordering) -> CMat {
        let big_n = self.truncation as i64;
        let d = self.full_dim();
        let mut g = CMat::zeros(d, d);
        let bounds: Vec<_> = self.signature.boundaries().copied().collect();
        for (b, bd) in bounds.iter().enumerate() {
            let e = bd.epsilon();
            let (di, ci) = (self.full_degree_index(b), self.full_coeff_index(b, 0));
            g[(ci, di)] += re(e);
            g[(di, ci)] -= re(e);
            for n in -big_n..=big_n {
                if n != 0 {
                    g[(self.full_coeff_index(b, -n), self.full_coeff_index(b, n))] +=
                        2.0 * PI * I * (n as f64) * e;
                }
            }
        }
        let ids = order.ids();
        for (a, &i) in ids.iter().enumerate() {
            for &j in &ids[a + 1..] {
                let pi = self.signature.position(i).expect("ordering covers signature");
                let pj = self.signature.position(j).expect("ordering covers signature");
                let k = 0.5 * bounds[pi].epsilon() * bounds[pj].epsilon();
                let (di, dj) = (self.full_degree_index(pi), self.full_degree_index(pj));
                g[(di, dj)] -= re(k);
                g[(dj, di)] += re(k);
            }
        }
        g
    }

    /// Matrix of `S_<` on V coordinates.
    pub fn gram(&self, order: &Ordering) -> CMat {
        let l = self.lift_matrix();
        l.transpose() * self.full_gram(order) * l
    }

    /// Standard transformation from `from` to `to` acting on V coordinates.
    pub fn standard_transform_matrix(&self, from: &Ordering, to: &Ordering) -> Result<CMat> {
        let ids = self.signature.ids();
        from.check_covers(&ids)?;
        to.check_covers(&ids)?;
        let fr = from.ranks();
        let tr = to.ranks();
        let bounds: Vec<_> = self.signature.boundaries().copied().collect();
        let mut t = CMat::identity(self.full_dim(), self.full_dim());
        for (pi, bi) in bounds.iter().enumerate() {
            for (pj, bj) in bounds.iter().enumerate() {
                if fr[&bj.id] < fr[&bi.id] && tr[&bi.id] < tr[&bj.id] {
                    t[(self.full_coeff_index(pi, 0), self.full_degree_index(pj))] -= re(bj.epsilon());
                }
            }
        }
        Ok(self.project_matrix() * t * self.lift_matrix())
    }

    /// Index permutation realising complex conjugation on V coordinates:
    /// `conj(x)[i] = conj(x[perm[i]])`.
    pub fn conj_permutation(&self) -> Vec<usize> {
        let coords = self.coords();
        let index = |c: &Coord| coords.iter().position(|d| d == c).unwrap();
        coords
            .iter()
            .map(|c| match *c {
                Coord::Mode { boundary, n } => index(&Coord::Mode { boundary, n: -n }),
                other => index(&other),
            })
            .collect()
    }

    /// Coordinates spanning the oriented positive polarization: modes with
    /// `ε·n ≥ 1` together with the degree coordinates.
    pub fn plus_indices(&self) -> Vec<usize> {
        let eps: Vec<f64> = self.signature.boundaries().map(|b| b.epsilon()).collect();
        self.coords()
            .iter()
            .enumerate()
            .filter(|(_, c)| match **c {
                Coord::Mode { boundary, n } => eps[boundary] * (n as f64) > 0.0,
                Coord::Degree { .. } => true,
                Coord::Constant { .. } => false,
            })
            .map(|(i, _)| i)
            .collect()
    }

    /// Complement of [`plus_indices`](Self::plus_indices): modes with
    /// `ε·n ≤ −1` and the constant coordinates.
    pub fn minus_indices(&self) -> Vec<usize> {
        let plus = self.plus_indices();
        (0..self.dim).filter(|i| !plus.contains(i)).collect()
    }

    /// Mode coordinates with `ε·n ≤ −1` only.
    pub fn minus_mode_indices(&self) -> Vec<usize> {
        let eps: Vec<f64> = self.signature.boundaries().map(|b| b.epsilon()).collect();
        self.coords()
            .iter()
            .enumerate()
            .filter(|(_, c)| matches!(**c, Coord::Mode { boundary, n } if eps[boundary] * (n as f64) < 0.0))
            .map(|(i, _)| i)
            .collect()
    }

    /// Generators of `V_const,ℤ`: the constant 1 on each non-gauge boundary
    /// (the constant on a gauge boundary is minus the sum of these).
    pub fn const_generators(&self) -> Vec<CVec> {
        self.unit_vectors(|c| matches!(c, Coord::Constant { .. }))
    }

    /// Generators of the integral degree lattice: unit degree on each
    /// non-gauge boundary, balanced on the gauge boundary.
    pub fn degree_generators(&self) -> Vec<CVec> {
        self.unit_vectors(|c| matches!(c, Coord::Degree { .. }))
    }

    fn unit_vectors(&self, pick: impl Fn(&Coord) -> bool) -> Vec<CVec> {
        self.coords()
            .iter()
            .enumerate()
            .filter(|(_, c)| pick(c))
            .map(|(i, _)| {
                let mut v = CVec::zeros(self.dim);
                v[i] = C::new(1.0, 0.0);
                v
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::block::block_pairing;
    use crate::boundary::signature::{Boundary, ComponentSignature};
    use crate::linalg::max_abs;

    fn three_holed() -> Signature {
        Signature::new(vec![ComponentSignature::new(
            0,
            vec![Boundary::outbound(1), Boundary::inbound(2), Boundary::inbound(3)],
        )
        .unwrap()])
        .unwrap()
    }

    #[test]
    fn dimension_count() {
        let l = VLayout::new(three_holed(), 5);
        assert_eq!(l.dim(), 3 * 12 - 2);
        assert_eq!(l.plus_indices().len(), l.dim() / 2);
    }

    #[test]
    fn lift_then_project_is_identity() {
        let l = VLayout::new(three_holed(), 3);
        let pl = l.project_matrix() * l.lift_matrix();
        assert!(max_abs(&(pl - CMat::identity(l.dim(), l.dim()))) < 1e-15);
    }

    #[test]
    fn gram_matches_block_pairing() {
        let l = VLayout::new(three_holed(), 2);
        let order = Ordering::new(vec![2, 1, 3]).unwrap();
        let g = l.gram(&order);
        let x = CVec::from_fn(l.dim(), |i, _| C::new((i as f64 * 0.37).sin(), (i as f64).cos()));
        let y = CVec::from_fn(l.dim(), |i, _| C::new((i as f64 * 1.3).cos(), 0.2 * i as f64));
        let direct = block_pairing(&l.block_from_coords(&x), &l.block_from_coords(&y), &order).unwrap();
        let via = (x.transpose() * &g * &y)[(0, 0)];
        assert!((direct - via).norm() < 1e-11 * direct.norm().max(1.0));
        assert!(max_abs(&(&g + g.transpose())) < 1e-12);
    }
}
