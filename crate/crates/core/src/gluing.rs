//! Disjoint union and gluing of open abelian varieties.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::boundary::{BoundaryId, ComponentSignature, Orientation, Ordering, Signature, VLayout};
use crate::error::{Error, Result};
use crate::intlin::{alternating_normal_form, round_matrix};
use crate::linalg::{block_diag, hstack, lstsq, max_abs, null_space_dim, orth, rank, re, subspace_distance, CMat, CVec};
use crate::oav::OpenAbelianVariety;

/// Identifies inbound boundary `inbound` with outbound boundary `outbound`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GluePair {
    pub inbound: BoundaryId,
    pub outbound: BoundaryId,
}

impl GluePair {
    pub fn new(inbound: BoundaryId, outbound: BoundaryId) -> Self {
        Self { inbound, outbound }
    }
}

/// Diagnostics collected while gluing.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GlueReport {
    /// Subspace distance between the computed radical and the diagonal
    /// copy of periodic boundary functions.
    pub radical_distance: f64,
    /// Largest singular value of the Gram matrix on the computed radical.
    pub radical_residual: f64,
    /// Smallest singular value discarded when intersecting `W` with the
    /// constrained subspace.
    pub w_residual: f64,
    /// Per pair: `true` when both ends lie on one component.
    pub same_component: Vec<bool>,
    pub genus_before: usize,
    pub genus_after: usize,
}

/// Start offset and size of each component's block of V coordinates, keyed
/// by the component's smallest boundary id.
fn component_blocks(layout: &VLayout) -> BTreeMap<BoundaryId, (usize, usize)> {
    let n = layout.truncation();
    let mut out = BTreeMap::new();
    let mut at = 0;
    for comp in layout.signature().components() {
        let m = comp.boundaries.len();
        let len = 2 * n * m + 2 * (m - 1);
        out.insert(comp.min_id(), (at, len));
        at += len;
    }
    out
}

/// Renames boundary ids. Changes the V coordinates when the canonical order
/// of boundaries changes, so `U` is transported accordingly.
pub fn relabel(x: &OpenAbelianVariety, map: &BTreeMap<BoundaryId, BoundaryId>) -> Result<OpenAbelianVariety> {
    let old = x.layout();
    let sig = old.signature().relabel(map)?;
    let new = VLayout::new(sig, old.truncation());
    let ordering = x.ordering().relabel(map)?;
    // full-coordinate permutation old → new
    let block = 2 * old.truncation() + 2;
    let mut perm = CMat::zeros(new.full_dim(), old.full_dim());
    for (pos, b) in old.signature().boundaries().enumerate() {
        let id = *map.get(&b.id).unwrap_or(&b.id);
        let npos = new.signature().position(id).expect("relabelled id present");
        for k in 0..block {
            perm[(npos * block + k, pos * block + k)] = re(1.0);
        }
    }
    let a = new.project_matrix() * &perm * old.lift_matrix();
    let a_inv = old.project_matrix() * perm.transpose() * new.lift_matrix();
    transport(x, new, ordering, &a, &a_inv)
}

/// Moves `x` to new V coordinates through `a: V_old → V_new` (with inverse
/// `a_inv`), acting as the identity on the `V⊥` coordinates.
fn transport(
    x: &OpenAbelianVariety,
    layout: VLayout,
    ordering: Ordering,
    a: &CMat,
    a_inv: &CMat,
) -> Result<OpenAbelianVariety> {
    let dp = x.dim_u() - x.dim_v();
    let phi = block_diag(a, &CMat::identity(dp, dp));
    let phi_inv = block_diag(a_inv, &CMat::identity(dp, dp));
    OpenAbelianVariety::from_parts(
        layout,
        ordering,
        phi_inv.transpose() * x.omega() * &phi_inv,
        &phi * x.iota() * a_inv,
        &phi * x.w(),
        &phi * x.lattice(),
        x.truncation_budget(),
    )
}

/// Direct sum. The reference ordering juxtaposes the two orderings.
pub fn disjoint_union(x1: &OpenAbelianVariety, x2: &OpenAbelianVariety) -> Result<OpenAbelianVariety> {
    if x1.truncation() != x2.truncation() && !(x1.is_closed() || x2.is_closed()) {
        return Err(Error::TruncationMismatch(x1.truncation(), x2.truncation()));
    }
    let n = if x1.is_closed() { x2.truncation() } else { x1.truncation() };
    let mut comps: Vec<ComponentSignature> = x1.signature().components().to_vec();
    comps.extend(x2.signature().components().iter().cloned());
    for (k, c) in comps.iter_mut().enumerate() {
        c.id = k as u32;
    }
    let sig = Signature::new(comps)?;
    let layout = VLayout::new(sig, n);
    let ordering = x1.ordering().concat(x2.ordering())?;
    let (dv1, dv2) = (x1.dim_v(), x2.dim_v());
    let (dp1, dp2) = (x1.dim_u() - dv1, x2.dim_u() - dv2);
    let du = x1.dim_u() + x2.dim_u();
    let new_blocks = component_blocks(&layout);
    // old U1 ⊕ U2 index → new U index
    let mut target = vec![0usize; du];
    for (x, base_u) in [(x1, 0usize), (x2, x1.dim_u())] {
        for (id, (start, len)) in component_blocks(x.layout()) {
            let (nstart, _) = new_blocks[&id];
            for k in 0..len {
                target[base_u + start + k] = nstart + k;
            }
        }
    }
    for k in 0..dp1 {
        target[dv1 + k] = dv1 + dv2 + k;
    }
    for k in 0..dp2 {
        target[x1.dim_u() + dv2 + k] = dv1 + dv2 + dp1 + k;
    }
    let mut phi = CMat::zeros(du, du);
    for (src, &dst) in target.iter().enumerate() {
        phi[(dst, src)] = re(1.0);
    }
    let iota_old = block_diag(x1.iota(), x2.iota());
    let omega_old = block_diag(x1.omega(), x2.omega());
    // V coordinates permute like the U coordinates restricted to V
    let vperm = {
        let mut p = CMat::zeros(dv1 + dv2, dv1 + dv2);
        for k in 0..dv1 {
            p[(target[k], k)] = re(1.0);
        }
        for k in 0..dv2 {
            p[(target[x1.dim_u() + k], dv1 + k)] = re(1.0);
        }
        p
    };
    OpenAbelianVariety::from_parts(
        layout,
        ordering,
        &phi * omega_old * phi.transpose(),
        &phi * iota_old * vperm.transpose(),
        &phi * block_diag(x1.w(), x2.w()),
        &phi * block_diag(x1.lattice(), x2.lattice()),
        x1.truncation_budget().max(x2.truncation_budget()),
    )
}

fn check_pairs(x: &OpenAbelianVariety, pairs: &[GluePair]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for p in pairs {
        for (id, want) in [(p.inbound, Orientation::Inbound), (p.outbound, Orientation::Outbound)] {
            let b = x.signature().boundary(id).ok_or(Error::UnknownBoundary(id))?;
            if b.orientation != want {
                return Err(Error::Orientation(format!(
                    "boundary {id} is {:?}, expected {want:?}",
                    b.orientation
                )));
            }
            if !seen.insert(id) {
                return Err(Error::OverlappingPairs(format!("boundary {id} appears twice")));
            }
        }
    }
    Ok(())
}

/// Glues one inbound boundary to one outbound boundary.
pub fn glue_pair(x: &OpenAbelianVariety, pair: GluePair) -> Result<OpenAbelianVariety> {
    glue_many(x, &[pair])
}

/// Glues several pairs simultaneously.
pub fn glue_many(x: &OpenAbelianVariety, pairs: &[GluePair]) -> Result<OpenAbelianVariety> {
    glue_with_report(x, pairs).map(|(y, _)| y)
}

struct Forest {
    /// Old component index of every boundary, by id.
    comp_of: BTreeMap<BoundaryId, usize>,
    ncomp: usize,
    tree: Vec<usize>,
    cycle: Vec<usize>,
}

impl Forest {
    fn new(sig: &Signature, pairs: &[GluePair]) -> Self {
        let mut comp_of = BTreeMap::new();
        for (k, c) in sig.components().iter().enumerate() {
            for b in &c.boundaries {
                comp_of.insert(b.id, k);
            }
        }
        let ncomp = sig.components().len();
        let mut parent: Vec<usize> = (0..ncomp).collect();
        fn find(p: &mut [usize], mut a: usize) -> usize {
            while p[a] != a {
                p[a] = p[p[a]];
                a = p[a];
            }
            a
        }
        let (mut tree, mut cycle) = (Vec::new(), Vec::new());
        for (e, p) in pairs.iter().enumerate() {
            let a = find(&mut parent, comp_of[&p.inbound]);
            let b = find(&mut parent, comp_of[&p.outbound]);
            if a == b {
                cycle.push(e);
            } else {
                parent[a] = b;
                tree.push(e);
            }
        }
        Self { comp_of, ncomp, tree, cycle }
    }

    /// Degrees on the tree edges balancing the given per-component demand
    /// (`Σ ε Δ` of everything else on each old component).
    fn balance(&self, pairs: &[GluePair], demand: &[f64]) -> Vec<f64> {
        if self.tree.is_empty() {
            return Vec::new();
        }
        let mut e = CMat::zeros(self.ncomp, self.tree.len());
        for (col, &t) in self.tree.iter().enumerate() {
            e[(self.comp_of[&pairs[t].inbound], col)] -= re(1.0);
            e[(self.comp_of[&pairs[t].outbound], col)] += re(1.0);
        }
        let b = CMat::from_fn(self.ncomp, 1, |i, _| re(-demand[i]));
        lstsq(&e, &b).iter().map(|z| z.re).collect()
    }
}

/// Merges the components joined by `pairs` and drops glued boundaries.
fn glued_signature(sig: &Signature, pairs: &[GluePair]) -> Result<Signature> {
    let glued: BTreeSet<BoundaryId> = pairs.iter().flat_map(|p| [p.inbound, p.outbound]).collect();
    let forest = Forest::new(sig, pairs);
    let mut group: Vec<usize> = (0..forest.ncomp).collect();
    let mut changed = true;
    while changed {
        changed = false;
        for p in pairs {
            let (a, b) = (forest.comp_of[&p.inbound], forest.comp_of[&p.outbound]);
            let m = group[a].min(group[b]);
            if group[a] != m || group[b] != m {
                group[a] = m;
                group[b] = m;
                changed = true;
            }
        }
    }
    let mut merged: BTreeMap<usize, (u32, Vec<crate::boundary::Boundary>)> = BTreeMap::new();
    for (k, c) in sig.components().iter().enumerate() {
        let entry = merged.entry(group[k]).or_insert((c.id, Vec::new()));
        entry.0 = entry.0.min(c.id);
        entry.1.extend(c.boundaries.iter().filter(|b| !glued.contains(&b.id)).copied());
    }
    let comps = merged
        .into_values()
        .filter(|(_, b)| !b.is_empty())
        .map(|(id, b)| ComponentSignature::new(id, b))
        .collect::<Result<Vec<_>>>()?;
    Signature::new(comps)
}

/// [`glue_many`] together with its diagnostics.
pub fn glue_with_report(x: &OpenAbelianVariety, pairs: &[GluePair]) -> Result<(OpenAbelianVariety, GlueReport)> {
    check_pairs(x, pairs)?;
    if pairs.is_empty() {
        let rep = GlueReport {
            radical_distance: 0.0,
            radical_residual: 0.0,
            w_residual: 0.0,
            same_component: Vec::new(),
            genus_before: x.genus(),
            genus_after: x.genus(),
        };
        return Ok((x.clone(), rep));
    }
    let mut ord = x.ordering().clone();
    for p in pairs {
        ord = ord.with_following(p.inbound, p.outbound)?;
    }
    let x = x.reorder(&ord)?;
    let old = x.layout().clone();
    let big_n = old.truncation() as i64;
    let sig = old.signature().clone();
    let pos = |id: BoundaryId| sig.position(id).expect("checked id");
    let eps = |id: BoundaryId| sig.boundary(id).expect("checked id").epsilon();

    // constraint p_i = p_j in V₁/ℝ
    let fp = old.lift_matrix() * x.projection();
    let du = x.dim_u();
    let mut rows = Vec::new();
    for p in pairs {
        let (i, j) = (pos(p.inbound), pos(p.outbound));
        rows.push(fp.row(old.full_degree_index(i)) - fp.row(old.full_degree_index(j)));
        for n in (-big_n..=big_n).filter(|&n| n != 0) {
            rows.push(fp.row(old.full_coeff_index(i, n)) - fp.row(old.full_coeff_index(j, n)));
        }
    }
    let mut m = CMat::zeros(rows.len(), du);
    for (r, row) in rows.iter().enumerate() {
        m.set_row(r, row);
    }

    let forest = Forest::new(&sig, pairs);
    let new_sig = glued_signature(&sig, pairs)?;
    let new_layout = VLayout::new(new_sig, old.truncation());
    let glued: BTreeSet<BoundaryId> = pairs.iter().flat_map(|p| [p.inbound, p.outbound]).collect();
    let new_ord = ord.without(&glued);
    let genus_after = x.genus() + forest.cycle.len();
    let du_new = new_layout.dim() + 2 * genus_after;

    // the degree condition is automatic when a component is exactly {i, j}
    let dim_k = du - rank(&m, 1e-10);
    let (k, _) = null_space_dim(&m, dim_k);
    let dim_rad = dim_k
        .checked_sub(du_new)
        .ok_or_else(|| Error::Dimension("constrained subspace smaller than expected".into()))?;
    let gram_k = k.transpose() * x.omega() * &k;
    let (rad_k, _) = null_space_dim(&gram_k, dim_rad);
    let radical_residual = max_abs(&(&gram_k * &rad_k));
    let rad = &k * rad_k;

    // diagonal copy of periodic functions
    let embed = x.iota() * old.project_matrix();
    let mut diag = Vec::new();
    for p in pairs {
        let (i, j) = (pos(p.inbound), pos(p.outbound));
        for n in -big_n..=big_n {
            let mut v = CVec::zeros(old.full_dim());
            v[old.full_coeff_index(i, n)] = re(1.0);
            v[old.full_coeff_index(j, n)] = re(1.0);
            diag.push(&embed * v);
        }
    }
    let mut diag_m = CMat::zeros(du, diag.len());
    for (c, v) in diag.iter().enumerate() {
        diag_m.set_column(c, v);
    }
    let diag = orth(&diag_m, 1e-10);
    let radical_distance = if rad.ncols() == 0 && diag.ncols() == 0 { 0.0 } else { subspace_distance(&rad, &diag) };
    if radical_distance > 1e-8 {
        return Err(Error::Radical(radical_distance));
    }

    // lift of new boundary data: unchanged off the glued circles, a pure
    // winding on each glued pair, balanced on every old component
    let new_lift = new_layout.lift_matrix();
    let mut lam = CMat::zeros(du, new_layout.dim());
    for col in 0..new_layout.dim() {
        let xf = new_lift.column(col);
        let mut y = CVec::zeros(old.full_dim());
        let block = 2 * old.truncation() + 2;
        let mut demand = vec![0.0; forest.ncomp];
        for (npos, b) in new_layout.signature().boundaries().enumerate() {
            let opos = pos(b.id);
            for t in 0..block {
                y[opos * block + t] = xf[npos * block + t];
            }
            demand[forest.comp_of[&b.id]] += b.epsilon() * xf[npos * block].re;
        }
        for (t, d) in forest.tree.iter().zip(forest.balance(pairs, &demand)) {
            let p = pairs[*t];
            y[old.full_degree_index(pos(p.inbound))] = re(d);
            y[old.full_degree_index(pos(p.outbound))] = re(d);
        }
        lam.set_column(col, &(&embed * y));
    }

    // lattice: survivors plus, per cycle pair, a degree and a constant
    let mut gens: Vec<CVec> = (0..x.lattice().ncols()).map(|c| x.lattice().column(c).into_owned()).collect();
    for &e in &forest.cycle {
        let p = pairs[e];
        let mut y = CVec::zeros(old.full_dim());
        y[old.full_degree_index(pos(p.inbound))] = re(1.0);
        y[old.full_degree_index(pos(p.outbound))] = re(1.0);
        let mut demand = vec![0.0; forest.ncomp];
        demand[forest.comp_of[&p.inbound]] += eps(p.inbound);
        demand[forest.comp_of[&p.outbound]] += eps(p.outbound);
        for (t, d) in forest.tree.iter().zip(forest.balance(pairs, &demand)) {
            let q = pairs[*t];
            y[old.full_degree_index(pos(q.inbound))] = re(d);
            y[old.full_degree_index(pos(q.outbound))] = re(d);
        }
        gens.push(&embed * y);
        let mut c = CVec::zeros(old.full_dim());
        c[old.full_coeff_index(pos(p.inbound), 0)] = re(1.0);
        gens.push(&embed * c);
    }
    let mut lraw = CMat::zeros(du, gens.len());
    for (c, g) in gens.iter().enumerate() {
        lraw.set_column(c, g);
    }
    let gram = lraw.transpose() * x.omega() * &lraw;
    let gram_re: Vec<Vec<f64>> = (0..gram.nrows()).map(|i| (0..gram.ncols()).map(|j| gram[(i, j)].re).collect()).collect();
    let g_int = round_matrix(&gram_re, 1e-6).map_err(|e| Error::Validation(format!("glued lattice: {e}")))?;
    let nf = alternating_normal_form(&g_int)?;
    if !nf.is_unimodular() {
        return Err(Error::Validation(format!("glued lattice has divisors {:?}", nf.divisors)));
    }
    let t = CMat::from_fn(gens.len(), gens.len(), |i, j| re(nf.basis[j][i] as f64));
    let lnf = &lraw * t;

    let basis = hstack(&[&lam, &lnf]);
    let full = hstack(&[&basis, &rad]);
    if rank(&full, 1e-10) != dim_k {
        return Err(Error::Validation("glued coordinates do not span the constrained subspace".into()));
    }
    let h_new = du_new / 2;
    let mw = &m * x.w();
    let (coef, w_resid) = null_space_dim(&mw, h_new);
    let wk = x.w() * coef;
    let z = lstsq(&full, &wk);
    let w_new = z.rows(0, du_new).into_owned();
    let w_fit = max_abs(&(&full * &z - &wk));

    let omega_new = basis.transpose() * x.omega() * &basis;
    let dv_new = new_layout.dim();
    let iota_new = CMat::identity(du_new, dv_new);
    let mut lat_new = CMat::zeros(du_new, du_new - dv_new);
    for c in 0..du_new - dv_new {
        lat_new[(dv_new + c, c)] = re(1.0);
    }
    let scale = max_abs(&mw).max(1.0);
    let budget = x.truncation_budget().max(w_resid / scale).max(w_fit);
    let y = OpenAbelianVariety::from_parts(new_layout, new_ord, omega_new, iota_new, w_new, lat_new, budget)?;
    let rep = GlueReport {
        radical_distance,
        radical_residual,
        w_residual: w_resid,
        same_component: pairs
            .iter()
            .map(|p| forest.comp_of[&p.inbound] == forest.comp_of[&p.outbound])
            .collect(),
        genus_before: x.genus(),
        genus_after,
    };
    let val = y.validate()?;
    if !val.pass {
        return Err(Error::Validation(format!("glued variety fails {:?}", val.failures())));
    }
    Ok((y, rep))
}

/// Index of the projection of `span(q)` onto the coordinates `target`:
/// `dim ker − dim coker`.
pub fn relative_dimension_to(q: &CMat, target: &[usize]) -> i64 {
    let proj = CMat::from_fn(target.len(), q.ncols(), |i, j| q[(target[i], j)]);
    let scale = max_abs(q).max(1.0);
    let r = crate::linalg::singular_values(&proj).iter().filter(|&&s| s > 1e-9 * scale).count();
    (q.ncols() - r) as i64 - (target.len() - r) as i64
}

/// Relative dimension of `span(q) ⊂ V` with respect to `V⁺`.
pub fn relative_dimension(layout: &VLayout, q: &CMat) -> i64 {
    relative_dimension_to(q, &layout.plus_indices())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelDimReport {
    pub kernel_w: usize,
    pub relative_w0: i64,
    pub kernel_conj_w: usize,
    pub relative_conj_w0: i64,
    pub sum: i64,
    pub two_g: i64,
    pub pass: bool,
}

/// The four relative-dimension terms of `W` and `conj W` against the
/// polarization of `V`, and whether they sum to `2g`.
pub fn check_dimension_identity(x: &OpenAbelianVariety) -> RelDimReport {
    let p = x.projection();
    let layout = x.layout();
    let terms = |w: &CMat, target: &[usize]| {
        let pw = &p * w;
        let scale = max_abs(w).max(1.0);
        let sv = crate::linalg::singular_values(&pw);
        let r = sv.iter().filter(|&&s| s > 1e-9 * scale).count();
        let w0 = if pw.nrows() == 0 { CMat::zeros(0, 0) } else { crate::linalg::orth_dim(&pw, r) };
        (w.ncols() - r, relative_dimension_to(&w0, target))
    };
    let (kw, rw) = terms(x.w(), &layout.plus_indices());
    let (kc, rc) = terms(&x.conj_u(x.w()), &layout.minus_indices());
    let sum = kw as i64 + rw + kc as i64 + rc;
    let two_g = 2 * x.genus() as i64;
    RelDimReport {
        kernel_w: kw,
        relative_w0: rw,
        kernel_conj_w: kc,
        relative_conj_w0: rc,
        sum,
        two_g,
        pass: sum == two_g,
    }
}
