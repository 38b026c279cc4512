//! Boundary data on several circles: block vectors, the ordered form `S_<`,
//! standard transformations and the `V⁺/V⁻` split.

use crate::error::{Error, Result};
use crate::linalg::C;

use super::function::{pairing, BranchedFunction};
use super::signature::{Ordering, Signature};

/// One branched function per boundary component (canonical order of the
/// signature), modulo one constant per open connected component.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockVector {
    signature: Signature,
    funcs: Vec<BranchedFunction>,
}

impl BlockVector {
    pub fn new(signature: Signature, funcs: Vec<BranchedFunction>) -> Result<Self> {
        if funcs.len() != signature.boundary_count() {
            return Err(Error::Dimension(format!(
                "{} functions for {} boundary components",
                funcs.len(),
                signature.boundary_count()
            )));
        }
        if let Some(first) = funcs.first() {
            let n = first.truncation();
            if let Some(bad) = funcs.iter().find(|f| f.truncation() != n) {
                return Err(Error::TruncationMismatch(n, bad.truncation()));
            }
        }
        Ok(Self { signature, funcs })
    }

    pub fn zero(signature: Signature, truncation: usize) -> Self {
        let funcs = vec![BranchedFunction::zero(truncation); signature.boundary_count()];
        Self { signature, funcs }
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn funcs(&self) -> &[BranchedFunction] {
        &self.funcs
    }

    pub fn funcs_mut(&mut self) -> &mut [BranchedFunction] {
        &mut self.funcs
    }

    pub fn truncation(&self) -> usize {
        self.funcs.first().map(|f| f.truncation()).unwrap_or(0)
    }

    pub fn get(&self, id: u32) -> Option<&BranchedFunction> {
        self.signature.position(id).map(|p| &self.funcs[p])
    }

    pub fn get_mut(&mut self, id: u32) -> Option<&mut BranchedFunction> {
        self.signature.position(id).map(move |p| &mut self.funcs[p])
    }

    pub fn scale(&self) -> f64 {
        self.funcs.iter().map(|f| f.scale()).fold(0.0, f64::max)
    }

    /// `Σ_{i∈A⁺} Δ_i − Σ_{i∈A⁻} Δ_i` for each component.
    pub fn degree_sums(&self) -> Vec<C> {
        let mut at = 0;
        self.signature
            .components()
            .iter()
            .map(|comp| {
                let mut s = C::new(0.0, 0.0);
                for b in &comp.boundaries {
                    s += self.funcs[at].degree() * b.epsilon();
                    at += 1;
                }
                s
            })
            .collect()
    }

    pub fn check_degree_sum(&self, tol: f64) -> Result<()> {
        let scale = self.scale().max(1.0);
        for (comp, s) in self.signature.components().iter().zip(self.degree_sums()) {
            if s.norm() > tol * scale {
                return Err(Error::DegreeSum { component: comp.id, residual: s.norm() });
            }
        }
        Ok(())
    }

    /// Canonical representative of the constant quotient: `c_0 = 0` on the
    /// smallest-id boundary of every component.
    pub fn gauge_fixed(&self) -> Self {
        let mut out = self.clone();
        let mut at = 0;
        for comp in self.signature.components() {
            let shift = out.funcs[at].coeff(0);
            for k in 0..comp.boundaries.len() {
                out.funcs[at + k].add_constant(-shift);
            }
            at += comp.boundaries.len();
        }
        out
    }

    /// Equality in the quotient by per-component constants.
    pub fn quotient_eq(&self, other: &Self, tol: f64) -> bool {
        if self.signature != other.signature || self.truncation() != other.truncation() {
            return false;
        }
        let a = self.gauge_fixed();
        let b = other.gauge_fixed();
        let scale = self.scale().max(other.scale()).max(1.0);
        a.funcs.iter().zip(&b.funcs).all(|(f, g)| (f - g).scale() <= tol * scale)
    }

    pub fn conj(&self) -> Self {
        Self {
            signature: self.signature.clone(),
            funcs: self.funcs.iter().map(|f| f.conj()).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_compatible(self, other)?;
        Ok(Self {
            signature: self.signature.clone(),
            funcs: self.funcs.iter().zip(&other.funcs).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn scaled(&self, k: C) -> Self {
        Self {
            signature: self.signature.clone(),
            funcs: self.funcs.iter().map(|f| f * k).collect(),
        }
    }
}

fn check_compatible(x: &BlockVector, y: &BlockVector) -> Result<()> {
    if x.signature != y.signature {
        return Err(Error::SignatureMismatch("block vectors have different signatures".into()));
    }
    if x.truncation() != y.truncation() {
        return Err(Error::TruncationMismatch(x.truncation(), y.truncation()));
    }
    Ok(())
}

const DEGREE_TOL: f64 = 1e-10;

/// The ordered form
/// `S_<(x,y) = Σ_i ε_i S(x_i,y_i) − ½ Σ_{i<j} ε_iε_j (Δ_{x_i}Δ_{y_j} − Δ_{y_i}Δ_{x_j})`,
/// with `<` ranging over all boundary components.
pub fn block_pairing(x: &BlockVector, y: &BlockVector, order: &Ordering) -> Result<C> {
    check_compatible(x, y)?;
    order.check_covers(&x.signature.ids())?;
    x.check_degree_sum(DEGREE_TOL)?;
    y.check_degree_sum(DEGREE_TOL)?;

    let mut total = C::new(0.0, 0.0);
    for (b, (f, g)) in x.signature.boundaries().zip(x.funcs.iter().zip(&y.funcs)) {
        total += pairing(f, g)? * b.epsilon();
    }
    let ids = order.ids();
    for (a, &i) in ids.iter().enumerate() {
        for &j in &ids[a + 1..] {
            let (bi, bj) = (x.signature.boundary(i).unwrap(), x.signature.boundary(j).unwrap());
            let (xi, xj) = (x.get(i).unwrap().degree(), x.get(j).unwrap().degree());
            let (yi, yj) = (y.get(i).unwrap().degree(), y.get(j).unwrap().degree());
            total -= 0.5 * bi.epsilon() * bj.epsilon() * (xi * yj - yi * xj);
        }
    }
    Ok(total)
}

/// The standard transformation from `from` to `to`:
/// `x'_i = x_i − Σ { ε_j Δ_{x_j} : j <_from i and i <_to j }`.
pub fn standard_transform(x: &BlockVector, from: &Ordering, to: &Ordering) -> Result<BlockVector> {
    let ids = x.signature.ids();
    from.check_covers(&ids)?;
    to.check_covers(&ids)?;
    let from_rank = from.ranks();
    let to_rank = to.ranks();
    let mut out = x.clone();
    for bi in x.signature.boundaries() {
        let mut shift = C::new(0.0, 0.0);
        for bj in x.signature.boundaries() {
            if from_rank[&bj.id] < from_rank[&bi.id] && to_rank[&bi.id] < to_rank[&bj.id] {
                shift += x.get(bj.id).unwrap().degree() * bj.epsilon();
            }
        }
        out.get_mut(bi.id).unwrap().add_constant(-shift);
    }
    Ok(out)
}

/// Per-boundary decomposition into positive modes, negative modes, the
/// constant term and the winding part.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarizationSplit {
    pub plus: Vec<BranchedFunction>,
    pub minus: Vec<BranchedFunction>,
    pub constant: Vec<C>,
    pub degree: Vec<C>,
}

impl PolarizationSplit {
    pub fn recompose(&self, signature: Signature) -> Result<BlockVector> {
        let funcs = self
            .plus
            .iter()
            .zip(&self.minus)
            .zip(self.constant.iter().zip(&self.degree))
            .map(|((p, m), (&c0, &d))| {
                let mut f = p + m;
                f.add_constant(c0);
                f.set_degree(f.degree() + d);
                f
            })
            .collect();
        BlockVector::new(signature, funcs)
    }
}

pub fn polarization_split(x: &BlockVector) -> PolarizationSplit {
    let n = x.truncation();
    let big_n = n as i64;
    let mut split = PolarizationSplit {
        plus: Vec::new(),
        minus: Vec::new(),
        constant: Vec::new(),
        degree: Vec::new(),
    };
    for f in x.funcs() {
        let mut plus = BranchedFunction::zero(n);
        let mut minus = BranchedFunction::zero(n);
        for k in 1..=big_n {
            plus.set_coeff(k, f.coeff(k));
            minus.set_coeff(-k, f.coeff(-k));
        }
        split.plus.push(plus);
        split.minus.push(minus);
        split.constant.push(f.coeff(0));
        split.degree.push(f.degree());
    }
    split
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::signature::{Boundary, ComponentSignature};

    fn annulus_sig() -> Signature {
        Signature::new(vec![ComponentSignature::new(
            0,
            vec![Boundary::outbound(1), Boundary::inbound(2)],
        )
        .unwrap()])
        .unwrap()
    }

    fn one() -> C {
        C::new(1.0, 0.0)
    }

    #[test]
    fn annulus_example_pairs_to_one() {
        let sig = annulus_sig();
        let w = BranchedFunction::winding(one(), 4);
        let x = BlockVector::new(sig.clone(), vec![w.clone(), w]).unwrap();
        let y = BlockVector::new(
            sig.clone(),
            vec![BranchedFunction::zero(4), BranchedFunction::constant(one(), 4)],
        )
        .unwrap();
        let order = Ordering::new(vec![1, 2]).unwrap();
        let s = block_pairing(&x, &y, &order).unwrap();
        assert!((s - one()).norm() < 1e-14);
        assert!(block_pairing(&x, &x, &order).unwrap().norm() < 1e-14);
    }

    #[test]
    fn single_component_reduces_to_pairing() {
        let sig = Signature::new(vec![ComponentSignature::new(0, vec![Boundary::outbound(9)]).unwrap()])
            .unwrap();
        let f = BranchedFunction::mode(2, C::new(0.5, 1.0), 3);
        let g = BranchedFunction::mode(-2, C::new(-1.0, 0.25), 3);
        let x = BlockVector::new(sig.clone(), vec![f.clone()]).unwrap();
        let y = BlockVector::new(sig, vec![g.clone()]).unwrap();
        let order = Ordering::new(vec![9]).unwrap();
        let s = block_pairing(&x, &y, &order).unwrap();
        assert!((s - pairing(&f, &g).unwrap()).norm() < 1e-14);
    }

    #[test]
    fn standard_transform_swaps_annulus_order() {
        let sig = annulus_sig();
        let w = BranchedFunction::winding(one(), 4);
        let x = BlockVector::new(sig, vec![w.clone(), w.clone()]).unwrap();
        let from = Ordering::new(vec![1, 2]).unwrap();
        let to = Ordering::new(vec![2, 1]).unwrap();
        let xt = standard_transform(&x, &from, &to).unwrap();
        assert_eq!(xt.get(1).unwrap(), &w);
        let mut expected = w.clone();
        expected.add_constant(-one());
        assert_eq!(xt.get(2).unwrap(), &expected);
        assert_eq!(standard_transform(&x, &from, &from).unwrap(), x);
    }

    #[test]
    fn degree_violation_rejected() {
        let sig = annulus_sig();
        let x = BlockVector::new(
            sig,
            vec![BranchedFunction::winding(one(), 2), BranchedFunction::zero(2)],
        )
        .unwrap();
        let order = Ordering::new(vec![1, 2]).unwrap();
        assert!(matches!(block_pairing(&x, &x, &order), Err(Error::DegreeSum { .. })));
    }

    #[test]
    fn polarization_examples() {
        let sig = Signature::new(vec![ComponentSignature::new(0, vec![Boundary::outbound(1)]).unwrap()])
            .unwrap();
        let x = BlockVector::new(sig.clone(), vec![BranchedFunction::mode(1, one(), 3)]).unwrap();
        let s = polarization_split(&x);
        assert_eq!(s.plus[0], BranchedFunction::mode(1, one(), 3));
        assert_eq!(s.minus[0], BranchedFunction::zero(3));
        assert_eq!(s.constant[0], C::new(0.0, 0.0));

        let five = BlockVector::new(sig.clone(), vec![BranchedFunction::constant(C::new(5.0, 0.0), 3)]).unwrap();
        let s = polarization_split(&five);
        assert_eq!(s.constant[0], C::new(5.0, 0.0));
        assert_eq!(s.plus[0], BranchedFunction::zero(3));

        let mut f = BranchedFunction::winding(one(), 3);
        f.set_coeff(-1, one());
        let x = BlockVector::new(sig.clone(), vec![f]).unwrap();
        let s = polarization_split(&x);
        assert_eq!(s.degree[0], one());
        assert_eq!(s.minus[0], BranchedFunction::mode(-1, one(), 3));
        assert_eq!(s.recompose(sig).unwrap(), x);
    }
}
