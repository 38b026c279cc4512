//! The Torelli map on genus-0 circle domains.
//!
//! A circle domain is the unit disk minus disjoint closed round disks. The
//! outer circle is parametrized by `θ ↦ e^{iσθ}` and inner circle `k` by
//! `θ ↦ p_k + r_k e^{iσ_kθ}`. A circle is outbound when its parametrization
//! agrees with the induced boundary orientation (counterclockwise outside,
//! clockwise inside).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::boundary::{
    Boundary, BlockVector, BoundaryId, BranchedFunction, ComponentSignature, Ordering, Orientation,
    Signature, VLayout,
};
use crate::error::{Error, Result};
use crate::linalg::{hstack, lstsq, max_abs, re, CMat, CVec, C, I};
use crate::oav::OpenAbelianVariety;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: [f64; 2],
    pub radius: f64,
}

impl Disk {
    pub fn new(center: C, radius: f64) -> Self {
        Self { center: [center.re, center.im], radius }
    }

    pub fn center(&self) -> C {
        C::new(self.center[0], self.center[1])
    }
}

/// Input description of a circle domain. `ids` and `directions` list the
/// outer circle first, then the inner circles; they default to ids
/// `0, 1, …, m` and counterclockwise parametrizations.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub disks: Vec<Disk>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ids: Option<Vec<BoundaryId>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directions: Option<Vec<i8>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CircleDomain {
    disks: Vec<Disk>,
    ids: Vec<BoundaryId>,
    directions: Vec<i8>,
}

/// One boundary circle: center, radius and parametrization direction.
#[derive(Clone, Copy, Debug)]
struct Circle {
    center: C,
    radius: f64,
    sigma: f64,
}

pub fn make_circle_domain(spec: DomainSpec) -> Result<CircleDomain> {
    let m = spec.disks.len();
    let ids = spec.ids.unwrap_or_else(|| (0..=m as BoundaryId).collect());
    let directions = spec.directions.unwrap_or_else(|| vec![1; m + 1]);
    if ids.len() != m + 1 || directions.len() != m + 1 {
        return Err(Error::Domain(format!(
            "expected {} ids and directions (outer circle first)",
            m + 1
        )));
    }
    if let Some(d) = directions.iter().find(|&&d| d != 1 && d != -1) {
        return Err(Error::Domain(format!("direction {d} is not ±1")));
    }
    for (k, d) in spec.disks.iter().enumerate() {
        if !(d.radius > 0.0) || !d.center.iter().all(|x| x.is_finite()) {
            return Err(Error::Domain(format!("disk {k} has invalid center or radius")));
        }
        if d.center().norm() + d.radius >= 1.0 {
            return Err(Error::Domain(format!("disk {k} is not inside the unit disk")));
        }
        for (l, e) in spec.disks.iter().enumerate().skip(k + 1) {
            if (d.center() - e.center()).norm() <= d.radius + e.radius {
                return Err(Error::Domain(format!("disks {k} and {l} overlap")));
            }
        }
    }
    // validates id uniqueness
    let dom = CircleDomain { disks: spec.disks, ids, directions };
    dom.signature()?;
    Ok(dom)
}

impl CircleDomain {
    pub fn new(disks: Vec<(C, f64)>) -> Result<Self> {
        make_circle_domain(DomainSpec {
            disks: disks.into_iter().map(|(p, r)| Disk::new(p, r)).collect(),
            ..Default::default()
        })
    }

    pub fn disk() -> Self {
        Self::new(Vec::new()).expect("unit disk")
    }

    pub fn annulus(q: f64) -> Result<Self> {
        Self::new(vec![(re(0.0), q)])
    }

    pub fn with_ids(self, ids: Vec<BoundaryId>) -> Result<Self> {
        make_circle_domain(DomainSpec { ids: Some(ids), ..self.spec() })
    }

    pub fn with_directions(self, directions: Vec<i8>) -> Result<Self> {
        make_circle_domain(DomainSpec { directions: Some(directions), ..self.spec() })
    }

    pub fn spec(&self) -> DomainSpec {
        DomainSpec {
            disks: self.disks.clone(),
            ids: Some(self.ids.clone()),
            directions: Some(self.directions.clone()),
        }
    }

    pub fn disks(&self) -> &[Disk] {
        &self.disks
    }

    pub fn ids(&self) -> &[BoundaryId] {
        &self.ids
    }

    pub fn directions(&self) -> &[i8] {
        &self.directions
    }

    /// Orientation of circle `k` (0 = outer).
    pub fn orientation(&self, k: usize) -> Orientation {
        let sigma = self.directions[k];
        let outbound = if k == 0 { sigma == 1 } else { sigma == -1 };
        if outbound {
            Orientation::Outbound
        } else {
            Orientation::Inbound
        }
    }

    pub fn signature(&self) -> Result<Signature> {
        let bounds = (0..self.ids.len())
            .map(|k| Boundary { id: self.ids[k], orientation: self.orientation(k) })
            .collect();
        Signature::new(vec![ComponentSignature::new(0, bounds)?])
    }

    /// Reference ordering: the listing order read cyclically from the first
    /// inner circle, so the outer circle comes last.
    pub fn ordering(&self) -> Ordering {
        let mut ids = self.ids.clone();
        ids.rotate_left(1);
        Ordering::new(ids).expect("ids validated")
    }

    fn circles(&self) -> Vec<Circle> {
        let mut out = vec![Circle { center: re(0.0), radius: 1.0, sigma: self.directions[0] as f64 }];
        for (k, d) in self.disks.iter().enumerate() {
            out.push(Circle { center: d.center(), radius: d.radius, sigma: self.directions[k + 1] as f64 });
        }
        out
    }

    /// Largest ratio governing the decay of the truncated expansions.
    pub fn geometry_ratio(&self) -> f64 {
        let mut rho: f64 = 0.0;
        for (k, d) in self.disks.iter().enumerate() {
            rho = rho.max(d.center().norm());
            for (l, e) in self.disks.iter().enumerate() {
                if k != l {
                    rho = rho.max(e.radius / (e.center() - d.center()).norm());
                }
            }
        }
        rho
    }
}

/// A holomorphic function on a circle domain whose boundary restrictions
/// have exact truncated expansions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HolomorphicBasisElement {
    /// `z^n`, `n ≥ 1`.
    Power { n: usize },
    /// `((z − p_k)/r_k)^{−n}`, `n ≥ 1`.
    Pole { disk: usize, n: usize },
    /// `log(z − p_k)/(2πi)`.
    Log { disk: usize },
}

fn binomial(n: i64, k: usize) -> f64 {
    // generalized binomial coefficient, n possibly negative
    let mut acc = 1.0;
    for i in 0..k {
        acc *= (n - i as i64) as f64 / (i + 1) as f64;
    }
    acc
}

/// Laurent coefficients in `w = (z − center)/radius` mapped to Fourier
/// modes through `w = e^{iσθ}`.
fn put(f: &mut BranchedFunction, sigma: f64, power: i64, value: C) {
    let n = power * sigma as i64;
    if n.unsigned_abs() as usize <= f.truncation() {
        let old = f.coeff(n);
        f.set_coeff(n, old + value);
    }
}

impl HolomorphicBasisElement {
    fn restrict(&self, dom: &CircleDomain, circle: usize, big_n: usize) -> BranchedFunction {
        let circles = dom.circles();
        let Circle { center, radius, sigma } = circles[circle];
        let mut f = BranchedFunction::zero(big_n);
        match *self {
            HolomorphicBasisElement::Power { n } => {
                for j in 0..=n {
                    let v = binomial(n as i64, j) * center.powu((n - j) as u32) * radius.powi(j as i32);
                    put(&mut f, sigma, j as i64, v);
                }
            }
            HolomorphicBasisElement::Pole { disk, n } => {
                let own = circles[disk + 1];
                let scale = own.radius.powi(n as i32);
                let d = center - own.center;
                if circle == disk + 1 {
                    put(&mut f, sigma, -(n as i64), re(1.0));
                } else if circle == 0 {
                    // z − p = w(1 − p/w)
                    for j in 0..=big_n {
                        let v = scale * binomial(-(n as i64), j) * (-own.center).powu(j as u32);
                        put(&mut f, sigma, -((n + j) as i64), v);
                    }
                } else {
                    // z − p = d(1 + r w / d)
                    for j in 0..=big_n {
                        let v = scale * binomial(-(n as i64), j) * d.powi(-(n as i32))
                            * (radius / d).powu(j as u32);
                        put(&mut f, sigma, j as i64, v);
                    }
                }
            }
            HolomorphicBasisElement::Log { disk } => {
                let own = circles[disk + 1];
                let k = 1.0 / (2.0 * PI * I);
                if circle == disk + 1 {
                    f.set_degree(re(sigma));
                    f.set_coeff(0, own.radius.ln() * k);
                } else if circle == 0 {
                    // log w + log(1 − p/w)
                    f.set_degree(re(sigma));
                    for j in 1..=big_n {
                        put(&mut f, sigma, -(j as i64), -own.center.powu(j as u32) / (j as f64) * k);
                    }
                } else {
                    let d = center - own.center;
                    f.set_coeff(0, d.ln() * k);
                    for j in 1..=big_n {
                        let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
                        put(&mut f, sigma, j as i64, sign * (radius / d).powu(j as u32) / (j as f64) * k);
                    }
                }
            }
        }
        f
    }
}

pub fn holomorphic_basis_elements(dom: &CircleDomain, big_n: usize) -> Vec<HolomorphicBasisElement> {
    let m = dom.disks.len();
    let mut out: Vec<_> = (1..=big_n).map(|n| HolomorphicBasisElement::Power { n }).collect();
    for disk in 0..m {
        out.extend((1..=big_n).map(|n| HolomorphicBasisElement::Pole { disk, n }));
    }
    out.extend((0..m).map(|disk| HolomorphicBasisElement::Log { disk }));
    out
}

/// The holomorphic basis with its boundary restrictions.
pub fn holomorphic_basis(dom: &CircleDomain, big_n: usize) -> Result<Vec<(HolomorphicBasisElement, BlockVector)>> {
    let sig = dom.signature()?;
    let order: Vec<usize> = sig
        .boundaries()
        .map(|b| dom.ids.iter().position(|&id| id == b.id).expect("same ids"))
        .collect();
    let mut basis = holomorphic_basis_elements(dom, big_n)
        .into_iter()
        .map(|e| {
            let funcs = order.iter().map(|&k| e.restrict(dom, k, big_n)).collect();
            Ok((e, BlockVector::new(sig.clone(), funcs)?))
        })
        .collect::<Result<Vec<_>>>()?;
    fix_log_branches(dom, &mut basis)?;
    Ok(basis)
}

/// The constant of `log(z − p_k)/(2πi)` on another inner circle depends on
/// the branch of `log(p_l − p_k)`, i.e. on how the cuts run. Shifting it by
/// an integer leaves every expansion valid; the shift that makes the logs
/// pairwise isotropic under the listing order is the one compatible with
/// the cut system, and is applied here.
fn fix_log_branches(dom: &CircleDomain, basis: &mut [(HolomorphicBasisElement, BlockVector)]) -> Result<()> {
    let m = dom.disks.len();
    let first_log = basis.len() - m;
    let order = dom.ordering();
    for l in 1..m {
        for k in 0..l {
            let s = crate::boundary::block_pairing(&basis[first_log + k].1, &basis[first_log + l].1, &order)?;
            let shift = s.re.round();
            if (s - re(shift)).norm() > 1e-8 {
                return Err(Error::Domain(format!("log pairing {s} is not integral")));
            }
            if shift != 0.0 {
                let id = dom.ids[k + 1];
                let f = basis[first_log + l].1.get_mut(id).expect("circle present");
                f.add_constant(re(-shift));
            }
        }
    }
    Ok(())
}

fn w_matrix(dom: &CircleDomain, big_n: usize) -> Result<(VLayout, CMat)> {
    let layout = VLayout::new(dom.signature()?, big_n);
    let cols = holomorphic_basis(dom, big_n)?
        .iter()
        .map(|(_, x)| layout.coords_from_block(x))
        .collect::<Result<Vec<CVec>>>()?;
    let mut w = CMat::zeros(layout.dim(), cols.len());
    for (j, v) in cols.iter().enumerate() {
        w.set_column(j, v);
    }
    Ok((layout, w))
}

/// The genus-0 open abelian variety of a circle domain.
pub fn torelli(dom: &CircleDomain, big_n: usize) -> Result<OpenAbelianVariety> {
    let (layout, w) = w_matrix(dom, big_n)?;
    let ordering = dom.ordering();
    let omega = layout.gram(&ordering);
    let mut wn = w.clone();
    for mut col in wn.column_iter_mut() {
        let n = col.norm();
        col /= re(n);
    }
    let gram_norm = max_abs(&(wn.transpose() * &omega * crate::linalg::conj(&wn)));
    let budget = gram_norm * dom.geometry_ratio().powi(big_n as i32);
    let x = OpenAbelianVariety::from_boundary(layout, ordering, w, budget)?;
    let rep = x.validate()?;
    if !rep.pass {
        return Err(Error::Validation(format!(
            "Torelli datum fails {:?} at truncation {big_n}",
            rep.failures()
        )));
    }
    Ok(x)
}

#[derive(Clone, Debug)]
pub struct HarmonicSplit {
    pub w: BlockVector,
    pub v: BlockVector,
    /// Coefficients of `w` in the holomorphic basis.
    pub coefficients: Vec<C>,
    pub residual: f64,
}

/// Splits real boundary data into boundary values of a holomorphic and an
/// antiholomorphic function, modulo constants.
pub fn harmonic_split(dom: &CircleDomain, f: &BlockVector, big_n: usize) -> Result<HarmonicSplit> {
    f.check_degree_sum(1e-10 * f.scale().max(1.0))?;
    let (layout, w) = w_matrix(dom, big_n)?;
    let x = OpenAbelianVariety::from_boundary(layout.clone(), dom.ordering(), w.clone(), 0.0)?;
    let cw = x.conj_u(&w);
    let rhs = layout.coords_from_block(f)?;
    let rhs = CMat::from_column_slice(rhs.len(), 1, rhs.as_slice());
    let a = hstack(&[&w, &cw]);
    let sol = lstsq(&a, &rhs);
    let h = w.ncols();
    let wpart = &w * sol.rows(0, h);
    let vpart = &cw * sol.rows(h, h);
    let residual = max_abs(&(&a * &sol - &rhs));
    Ok(HarmonicSplit {
        w: layout.block_from_coords(&wpart.column(0).into_owned()),
        v: layout.block_from_coords(&vpart.column(0).into_owned()),
        coefficients: sol.rows(0, h).iter().copied().collect(),
        residual,
    })
}

/// Basis of `V⊥_ℤ` for a circle domain: empty, since the genus is 0.
pub fn integral_perp_lattice(dom: &CircleDomain, big_n: usize) -> Result<CMat> {
    let layout = VLayout::new(dom.signature()?, big_n);
    Ok(CMat::zeros(layout.dim(), 0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlapping_pants_rejected() {
        let e = CircleDomain::new(vec![(re(0.5), 0.6), (re(-0.5), 0.6)]);
        assert!(matches!(e, Err(Error::Domain(_))));
    }

    #[test]
    fn disk_basis_is_single_modes() {
        let b = holomorphic_basis(&CircleDomain::disk(), 4).unwrap();
        assert_eq!(b.len(), 4);
        for (n, (_, x)) in b.iter().enumerate() {
            let f = &x.funcs()[0];
            assert_eq!(f.coeff(n as i64 + 1), re(1.0));
            assert!((f.scale() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn annulus_log_offset() {
        let q = 0.5;
        let dom = CircleDomain::annulus(q).unwrap();
        let b = holomorphic_basis(&dom, 3).unwrap();
        assert_eq!(b.len(), 7);
        let (_, log) = b.last().unwrap();
        let inner = log.get(1).unwrap();
        assert_eq!(inner.degree(), re(1.0));
        assert!((inner.coeff(0) - q.ln() / (2.0 * PI * I)).norm() < 1e-15);
        assert_eq!(log.get(0).unwrap().degree(), re(1.0));
    }

    #[test]
    fn corpus_domains_validate() {
        let doms = [
            CircleDomain::disk(),
            CircleDomain::annulus(0.3).unwrap(),
            CircleDomain::new(vec![(re(0.5), 0.2), (re(-0.5), 0.2)]).unwrap(),
            CircleDomain::new(vec![
                (C::new(0.4, 0.2), 0.15),
                (re(-0.45), 0.2),
                (C::new(0.1, -0.5), 0.18),
            ])
            .unwrap(),
        ];
        for d in &doms {
            let x = torelli(d, 16).unwrap();
            let rep = x.validate().unwrap();
            assert!(rep.pass);
        }
    }
}
