#![allow(dead_code)]

use openjac::boundary::{
    Boundary, BlockVector, BranchedFunction, ComponentSignature, Ordering, Signature,
};
use openjac::linalg::{re, C};
use openjac::oav::OpenAbelianVariety;
use openjac::torelli::{torelli, CircleDomain};
use rand::seq::SliceRandom;
use rand::Rng;

pub const N: usize = 16;

/// Random function with integral degree in `-2..=2` (or zero) and modes up
/// to `modes`; real when `real` is set.
pub fn random_function(rng: &mut impl Rng, truncation: usize, modes: usize, real: bool) -> BranchedFunction {
    let mut f = BranchedFunction::winding(re(rng.gen_range(-2..=2) as f64), truncation);
    f.set_coeff(0, re(rng.gen_range(-1.0..1.0)));
    for n in 1..=modes.min(truncation) as i64 {
        let a = C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        f.set_coeff(n, a);
        if real {
            f.set_coeff(-n, a.conj());
        } else {
            f.set_coeff(-n, C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        }
    }
    f
}

/// Three components: {0 out, 1 in}, {2 out, 3 in, 4 out}, {5 in, 6 in, 7 out}.
pub fn three_component_signature() -> Signature {
    Signature::new(vec![
        ComponentSignature::new(0, vec![Boundary::outbound(0), Boundary::inbound(1)]).unwrap(),
        ComponentSignature::new(1, vec![Boundary::outbound(2), Boundary::inbound(3), Boundary::outbound(4)]).unwrap(),
        ComponentSignature::new(2, vec![Boundary::inbound(5), Boundary::inbound(6), Boundary::outbound(7)]).unwrap(),
    ])
    .unwrap()
}

/// Random block vector satisfying the degree-sum condition.
pub fn random_block(rng: &mut impl Rng, sig: &Signature, truncation: usize, real: bool) -> BlockVector {
    let mut funcs = Vec::new();
    for comp in sig.components() {
        let mut sum = C::new(0.0, 0.0);
        let m = comp.boundaries.len();
        for (k, b) in comp.boundaries.iter().enumerate() {
            let mut f = random_function(rng, truncation, truncation, real);
            if k + 1 == m {
                f.set_degree(-sum * b.epsilon());
            } else {
                sum += f.degree() * b.epsilon();
            }
            funcs.push(f);
        }
    }
    BlockVector::new(sig.clone(), funcs).unwrap()
}

pub fn random_ordering(rng: &mut impl Rng, sig: &Signature) -> Ordering {
    let mut ids: Vec<u32> = sig.ids().into_iter().collect();
    ids.shuffle(rng);
    Ordering::new(ids).unwrap()
}

pub fn annulus(q: f64, outer: u32, inner: u32) -> OpenAbelianVariety {
    torelli(&CircleDomain::annulus(q).unwrap().with_ids(vec![outer, inner]).unwrap(), N).unwrap()
}

pub fn pants_domain() -> CircleDomain {
    CircleDomain::new(vec![(re(0.5), 0.2), (re(-0.5), 0.2)]).unwrap()
}

/// Pants with the given parametrization directions and ids (outer first).
pub fn pants(directions: Vec<i8>, ids: Vec<u32>) -> OpenAbelianVariety {
    torelli(&pants_domain().with_directions(directions).unwrap().with_ids(ids).unwrap(), N).unwrap()
}

pub fn three_holed_domain() -> CircleDomain {
    CircleDomain::new(vec![(C::new(0.4, 0.2), 0.15), (re(-0.45), 0.2), (C::new(0.1, -0.5), 0.18)]).unwrap()
}

/// The corpus of circle domains used throughout the tests.
pub fn corpus_domains() -> Vec<(&'static str, CircleDomain)> {
    vec![
        ("disk", CircleDomain::disk()),
        ("annulus 0.3", CircleDomain::annulus(0.3).unwrap()),
        ("annulus 0.5", CircleDomain::annulus(0.5).unwrap()),
        ("annulus 0.9", CircleDomain::annulus(0.9).unwrap()),
        ("pants", pants_domain()),
        ("three-holed", three_holed_domain()),
    ]
}
