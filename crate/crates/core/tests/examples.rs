mod common;

use common::*;
use openjac::boundary::{block_pairing, BlockVector, BranchedFunction};
use openjac::error::Error;
use openjac::gluing::{
    check_dimension_identity, disjoint_union, glue_many, glue_pair, relative_dimension, GluePair,
};
use openjac::lattice_cft::{
    attach_b, cft_dimension, make_even_lattice, wl_lattice, EvenLattice, Label,
};
use openjac::linalg::{c, re, CMat};
use openjac::oav::{equivalent, sp_open_member, BlockMatrix2x2, OpenAbelianVariety};
use openjac::torelli::{harmonic_split, holomorphic_basis, integral_perp_lattice, torelli, CircleDomain};
use std::f64::consts::PI;

fn self_glued_torus(q: f64) -> OpenAbelianVariety {
    glue_pair(&annulus(q, 0, 1), GluePair::new(1, 0)).unwrap()
}

/// Genus-1 variety with two remaining boundaries 0 and 3.
fn open_genus_one() -> OpenAbelianVariety {
    let dom = three_holed_domain().with_directions(vec![1, 1, -1, 1]).unwrap();
    glue_pair(&torelli(&dom, N).unwrap(), GluePair::new(1, 2)).unwrap()
}

/// `ι` plus the map sending the first degree generator to `k` times the
/// first constant generator.
fn shift_iota(x: &OpenAbelianVariety, k: f64) -> OpenAbelianVariety {
    let l = x.layout();
    let cst = &l.const_generators()[0];
    let deg = &l.degree_generators()[0];
    let shift = CMat::from_fn(x.dim_v(), x.dim_v(), |i, j| cst[i] * deg[j] * k);
    x.with_iota(x.iota() + x.iota() * shift).unwrap()
}

#[test]
fn genus_examples() {
    assert_eq!(torelli(&CircleDomain::disk(), N).unwrap().genus(), 0);
    assert_eq!(self_glued_torus(0.5).genus(), 1);
    let two = disjoint_union(&OpenAbelianVariety::torus(c(0.1, 1.0)), &OpenAbelianVariety::torus(c(0.0, 2.0))).unwrap();
    assert_eq!(two.genus(), 2);
}

#[test]
fn period_of_union_is_block_diagonal() {
    let (t1, t2) = (c(0.2, 0.8), c(-0.3, 1.5));
    let x = disjoint_union(&OpenAbelianVariety::torus(t1), &OpenAbelianVariety::torus(t2)).unwrap();
    let p = x.period_matrix().unwrap();
    assert!((p[(0, 0)] - t1).norm() < 1e-12);
    assert!((p[(1, 1)] - t2).norm() < 1e-12);
    assert!(p[(0, 1)].norm() < 1e-12 && p[(1, 0)].norm() < 1e-12);
}

#[test]
fn self_glued_annulus_period() {
    let p = self_glued_torus(0.5).period_matrix().unwrap();
    let tau = c(0.5f64.ln(), 0.0) / c(0.0, 2.0 * PI);
    assert!((p[(0, 0)] - tau).norm() < 1e-10);
    assert!((p[(0, 0)].im - 0.110318).abs() < 1e-6);
}

#[test]
fn integral_constant_shift_is_equivalent() {
    let x = annulus(0.5, 0, 1);
    assert!(equivalent(&x, &x, 1e-8).unwrap());
    assert!(equivalent(&x, &shift_iota(&x, 1.0), 1e-8).unwrap());
    assert!(!equivalent(&x, &shift_iota(&x, 0.5), 1e-8).unwrap());
}

#[test]
fn reorder_examples() {
    let x = annulus(0.5, 0, 1);
    let same = x.reorder(x.ordering()).unwrap();
    assert!(same.iota() == x.iota());
    let swapped = x.ordering().swapped(0, 1).unwrap();
    let twice = x.reorder(&swapped).unwrap().reorder(x.ordering()).unwrap();
    assert!(equivalent(&x, &twice, 1e-8).unwrap());
    let p = pants(vec![1, 1, -1], vec![0, 1, 2]);
    let rot = p.reorder(&p.ordering().rotated()).unwrap();
    assert!(equivalent(&p, &rot, 1e-8).unwrap());
}

#[test]
fn sp_open_examples() {
    let x = open_genus_one();
    assert!(x.validate().unwrap().pass);
    let id = BlockMatrix2x2::identity(&x);
    assert!(sp_open_member(&id, &x, 1e-6).unwrap());
    let mut phi = id.clone();
    let cst = &x.layout().const_generators()[0];
    phi.v_perp.column_mut(0).copy_from(cst);
    assert!(sp_open_member(&phi, &x, 1e-6).unwrap());
    phi.v_perp.column_mut(0).copy_from(&(cst * re(0.5)));
    assert!(!sp_open_member(&phi, &x, 1e-6).unwrap());
}

#[test]
fn smoothness_examples() {
    let disk = torelli(&CircleDomain::disk(), N).unwrap().smoothness_diagnostic();
    assert!(disk.minus_singular_values.iter().all(|&s| s < 1e-12));
    let ann = annulus(0.5, 0, 1).smoothness_diagnostic();
    let sv: Vec<f64> = ann.minus_singular_values.iter().copied().filter(|&s| s > 1e-13).collect();
    // pairs per mode level; compare one level to the next
    let ratio = sv[2] / sv[0];
    assert!(ratio > 0.25 && ratio < 1.0, "ratio {ratio}");
    let torus = OpenAbelianVariety::torus(c(0.3, 0.9)).smoothness_diagnostic();
    assert!(torus.minus_singular_values.len() <= 1);
}

#[test]
fn block_pairing_annulus_example() {
    let x = annulus(0.5, 0, 1);
    let sig = x.signature().clone();
    let f = BlockVector::new(sig.clone(), vec![BranchedFunction::winding(re(1.0), 4), BranchedFunction::winding(re(1.0), 4)]).unwrap();
    let g = BlockVector::new(sig, vec![BranchedFunction::constant(re(1.0), 4), BranchedFunction::zero(4)]).unwrap();
    let s = block_pairing(&f, &g, x.ordering()).unwrap();
    assert!((s.norm() - 1.0).abs() < 1e-12);
}

#[test]
fn disk_torelli_positivity_gram() {
    let dom = CircleDomain::disk();
    for (k, (_, w)) in holomorphic_basis(&dom, 6).unwrap().iter().enumerate() {
        let s = block_pairing(w, &w.conj(), &dom.ordering()).unwrap() * c(0.0, 2.0);
        let n = (k + 1) as f64;
        assert!((s - re(4.0 * PI * n)).norm() < 1e-10, "{k}: {s}");
    }
}

#[test]
fn holomorphic_basis_counts() {
    assert_eq!(holomorphic_basis(&CircleDomain::disk(), 4).unwrap().len(), 4);
    assert_eq!(holomorphic_basis(&CircleDomain::annulus(0.5).unwrap(), 8).unwrap().len(), 17);
    assert_eq!(holomorphic_basis(&pants_domain(), 8).unwrap().len(), 26);
}

#[test]
fn torelli_isotropy_bounds() {
    let ann = annulus(0.5, 0, 1).validate().unwrap();
    assert!(ann.value("isotropy") < 1e-12);
    let p = torelli(&pants_domain(), N).unwrap().validate().unwrap();
    assert!(p.pass);
    assert!(p.value("isotropy") < 1e-6);
}

#[test]
fn harmonic_split_examples() {
    let dom = CircleDomain::disk();
    let sig = dom.signature().unwrap();
    let mut f = BranchedFunction::zero(8);
    f.set_coeff(1, re(0.5));
    f.set_coeff(-1, re(0.5));
    let cos = BlockVector::new(sig.clone(), vec![f]).unwrap();
    let h = harmonic_split(&dom, &cos, 8).unwrap();
    assert!(h.residual < 1e-12);
    assert!((h.w.funcs()[0].coeff(1) - re(0.5)).norm() < 1e-12);
    assert!((h.v.funcs()[0].coeff(-1) - re(0.5)).norm() < 1e-12);

    let cst = BlockVector::new(sig, vec![BranchedFunction::constant(re(2.0), 8)]).unwrap();
    let h = harmonic_split(&dom, &cst, 8).unwrap();
    assert!(h.residual < 1e-12);
    assert!(h.w.funcs()[0].coeffs().iter().skip(9).all(|z| z.norm() < 1e-12));

    let ann = CircleDomain::annulus(0.5).unwrap();
    let theta = BlockVector::new(ann.signature().unwrap(), vec![BranchedFunction::winding(re(1.0), 8); 2]).unwrap();
    let h = harmonic_split(&ann, &theta, 8).unwrap();
    assert!(h.residual < 1e-10, "{}", h.residual);
}

#[test]
fn genus_zero_domains_have_empty_lattice() {
    for (_, dom) in corpus_domains() {
        assert_eq!(integral_perp_lattice(&dom, 8).unwrap().ncols(), 0);
    }
}

#[test]
fn union_unit_law_and_genus() {
    let x = pants(vec![1, 1, -1], vec![0, 1, 2]);
    let empty = OpenAbelianVariety::closed(N, CMat::zeros(0, 0), CMat::zeros(0, 0), CMat::zeros(0, 0)).unwrap();
    let u = disjoint_union(&x, &empty).unwrap();
    assert!(equivalent(&x, &u, 1e-8).unwrap());
    assert!(matches!(disjoint_union(&x, &x), Err(Error::IdCollision(_))));
}

#[test]
fn pants_self_glue_adds_a_handle() {
    let x = pants(vec![1, 1, -1], vec![0, 1, 2]);
    let y = glue_pair(&x, GluePair::new(1, 2)).unwrap();
    assert_eq!(y.genus(), 1);
    assert_eq!(y.signature().boundary_count(), 1);
    assert!(y.validate().unwrap().pass);
    assert!(glue_pair(&x, GluePair::new(2, 1)).is_err());
    let same = glue_many(&x, &[]).unwrap();
    assert!(equivalent(&x, &same, 1e-8).unwrap());
}

#[test]
fn relative_dimension_examples() {
    let x = torelli(&CircleDomain::disk(), 4).unwrap();
    let layout = x.layout();
    let plus = layout.plus_indices();
    let span_plus = CMat::from_fn(layout.dim(), plus.len(), |i, j| re(f64::from(u8::from(i == plus[j]))));
    assert_eq!(relative_dimension(layout, &span_plus), 0);
    let e = BlockVector::new(x.signature().clone(), vec![BranchedFunction::mode(-1, re(1.0), 4)]).unwrap();
    let v = layout.coords_from_block(&e).unwrap();
    let q = CMat::from_column_slice(v.len(), 1, v.as_slice());
    // brute force: the vector has no V⁺ component, so kernel 1 and cokernel |V⁺|
    let hits = plus.iter().filter(|&&i| q[(i, 0)].norm() > 0.0).count();
    assert_eq!(hits, 0);
    assert_eq!(relative_dimension(layout, &q), 1 - plus.len() as i64);
    assert_eq!(relative_dimension(layout, x.w()), 0);
}

#[test]
fn dimension_identity_examples() {
    let disk = check_dimension_identity(&torelli(&CircleDomain::disk(), N).unwrap());
    assert!(disk.pass && disk.sum == 0);
    let t = check_dimension_identity(&self_glued_torus(0.5));
    assert!(t.pass && t.sum == 2);
    let two = disjoint_union(&OpenAbelianVariety::torus(c(0.1, 1.0)), &OpenAbelianVariety::torus(c(0.0, 2.0))).unwrap();
    let r = check_dimension_identity(&two);
    assert!(r.pass && r.sum == 4);
}

#[test]
fn lattice_examples() {
    let a1 = make_even_lattice(vec![vec![2]]).unwrap();
    assert_eq!(attach_b(&a1).unwrap().eval(&[1], &[1]), 1);
    assert!(make_even_lattice(vec![vec![1]]).is_err());
    assert!(make_even_lattice(vec![vec![2, -1], vec![-1, 2]]).is_ok());
    assert!(make_even_lattice(vec![vec![2, 1], vec![0, 2]]).is_err());

    assert_eq!(cft_dimension(&a1, 1, &[]).unwrap(), 2);
    let half = Label { lambda: vec![0.5], epsilon: 1 };
    assert_eq!(cft_dimension(&a1, 0, &[half.clone()]).unwrap(), 0);
    assert_eq!(cft_dimension(&a1, 0, &[half.clone(), Label { lambda: vec![0.5], epsilon: -1 }]).unwrap(), 1);
    assert!(cft_dimension(&a1, 0, &[Label { lambda: vec![0.25], epsilon: 1 }]).is_err());
    assert_eq!(cft_dimension(&EvenLattice::e8(), 3, &[]).unwrap(), 1);
}

#[test]
fn wl_lattice_examples() {
    let t = OpenAbelianVariety::torus(c(0.3, 0.9));
    assert_eq!(wl_lattice(&t, &EvenLattice::a1()).unwrap().rank, 2);
    assert_eq!(wl_lattice(&t, &EvenLattice::e8()).unwrap().rank, 16);
    assert!(wl_lattice(&annulus(0.5, 0, 1), &EvenLattice::a1()).is_err());
}
