//! Open abelian varieties in truncated normal form.
//!
//! `U` is stored in coordinates: a complex vector space with a fixed real
//! structure. The first `dim V` coordinates are [`VLayout`] coordinates
//! (conjugation swaps `c_n` and `c_{-n}`), the remaining `2g` coordinates
//! are real. The form `S` is the matrix `omega`, `ι` for the reference
//! ordering is `iota`, `W` is spanned by the columns of `w` and the
//! columns of `lattice` are a ℤ-basis of `V⊥_ℤ`.

use serde::Serialize;

use crate::boundary::{Coord, Ordering, Signature, VLayout};
use crate::error::{Error, Result};
use crate::intlin::{alternating_normal_form, round_matrix};
use crate::linalg::{
    c, conj, hermitian_eigenvalues, hstack, lstsq, max_abs, orth, rank, re, singular_values,
    subspace_distance, svd, CMat, C,
};

#[derive(Clone, Debug)]
pub struct OpenAbelianVariety {
    layout: VLayout,
    ordering: Ordering,
    omega: CMat,
    iota: CMat,
    w: CMat,
    lattice: CMat,
    truncation_budget: f64,
}

impl OpenAbelianVariety {
    pub fn from_parts(
        layout: VLayout,
        ordering: Ordering,
        omega: CMat,
        iota: CMat,
        w: CMat,
        lattice: CMat,
        truncation_budget: f64,
    ) -> Result<Self> {
        ordering.check_covers(&layout.signature().ids())?;
        let du = omega.nrows();
        let dv = layout.dim();
        let bad = |what: &str| Err(Error::Dimension(what.to_string()));
        if omega.ncols() != du {
            return bad("form matrix is not square");
        }
        if iota.shape() != (du, dv) {
            return bad("embedding has the wrong shape");
        }
        if du < dv || (du - dv) % 2 != 0 {
            return bad("dim U − dim V must be even and nonnegative");
        }
        if lattice.shape() != (du, du - dv) {
            return bad("lattice must have 2g columns in U");
        }
        if w.nrows() != du || 2 * w.ncols() != du {
            return bad("W must have dim U / 2 columns");
        }
        Ok(Self { layout, ordering, omega, iota, w, lattice, truncation_budget })
    }

    /// Genus-0 datum `U = V`, `ι = id`, with `W` spanned by `w`.
    pub fn from_boundary(layout: VLayout, ordering: Ordering, w: CMat, truncation_budget: f64) -> Result<Self> {
        let dv = layout.dim();
        let omega = layout.gram(&ordering);
        Self::from_parts(
            layout,
            ordering,
            omega,
            CMat::identity(dv, dv),
            w,
            CMat::zeros(dv, 0),
            truncation_budget,
        )
    }

    /// Closed datum with `V = 0`.
    pub fn closed(truncation: usize, omega: CMat, w: CMat, lattice: CMat) -> Result<Self> {
        let du = omega.nrows();
        Self::from_parts(
            VLayout::new(Signature::empty(), truncation),
            Ordering::new(Vec::new())?,
            omega,
            CMat::zeros(du, 0),
            w,
            lattice,
            0.0,
        )
    }

    /// The elliptic curve with modulus `τ`: `U = ℝ²`, `S(e₁, e₂) = 1`,
    /// `W = span(e₁ + τ e₂)`, lattice `{e₁, e₂}`.
    pub fn torus(tau: C) -> Self {
        let omega = CMat::from_row_slice(2, 2, &[re(0.0), re(1.0), re(-1.0), re(0.0)]);
        let w = CMat::from_column_slice(2, 1, &[re(1.0), tau]);
        Self::closed(0, omega, w, CMat::identity(2, 2)).expect("consistent torus datum")
    }

    pub fn layout(&self) -> &VLayout {
        &self.layout
    }

    pub fn signature(&self) -> &Signature {
        self.layout.signature()
    }

    pub fn truncation(&self) -> usize {
        self.layout.truncation()
    }

    pub fn ordering(&self) -> &Ordering {
        &self.ordering
    }

    pub fn omega(&self) -> &CMat {
        &self.omega
    }

    pub fn iota(&self) -> &CMat {
        &self.iota
    }

    pub fn w(&self) -> &CMat {
        &self.w
    }

    pub fn lattice(&self) -> &CMat {
        &self.lattice
    }

    pub fn truncation_budget(&self) -> f64 {
        self.truncation_budget
    }

    pub fn dim_u(&self) -> usize {
        self.omega.nrows()
    }

    pub fn dim_v(&self) -> usize {
        self.layout.dim()
    }

    pub fn genus(&self) -> usize {
        (self.dim_u() - self.dim_v()) / 2
    }

    pub fn is_closed(&self) -> bool {
        self.signature().is_empty()
    }

    pub fn with_iota(&self, iota: CMat) -> Result<Self> {
        let mut out = self.clone();
        if iota.shape() != self.iota.shape() {
            return Err(Error::Dimension("replacement embedding has the wrong shape".into()));
        }
        out.iota = iota;
        Ok(out)
    }

    pub fn with_w(&self, w: CMat) -> Result<Self> {
        if w.shape() != self.w.shape() {
            return Err(Error::Dimension("replacement W has the wrong shape".into()));
        }
        let mut out = self.clone();
        out.w = w;
        Ok(out)
    }

    pub fn with_lattice(&self, lattice: CMat) -> Result<Self> {
        if lattice.shape() != self.lattice.shape() {
            return Err(Error::Dimension("replacement lattice has the wrong shape".into()));
        }
        let mut out = self.clone();
        out.lattice = lattice;
        Ok(out)
    }

    /// Complex conjugation of `U`, applied to each column of `m`.
    pub fn conj_u(&self, m: &CMat) -> CMat {
        let perm = self.layout.conj_permutation();
        let dv = self.dim_v();
        let mut out = conj(m);
        for (i, &src) in perm.iter().enumerate() {
            for col in 0..m.ncols() {
                out[(i, col)] = m[(src, col)].conj();
            }
        }
        for i in dv..m.nrows() {
            for col in 0..m.ncols() {
                out[(i, col)] = m[(i, col)].conj();
            }
        }
        out
    }

    /// The basis `[ι | lattice]` of `U`.
    pub fn adapted_basis(&self) -> CMat {
        hstack(&[&self.iota, &self.lattice])
    }

    /// Coordinates with respect to [`adapted_basis`](Self::adapted_basis).
    pub fn adapted_coords(&self, m: &CMat) -> CMat {
        lstsq(&self.adapted_basis(), m)
    }

    /// The projection `p: U → V` along `V⊥`.
    pub fn projection(&self) -> CMat {
        let dv = self.dim_v();
        let inv = self.adapted_coords(&CMat::identity(self.dim_u(), self.dim_u()));
        inv.rows(0, dv).into_owned()
    }

    /// Applies the standard transformation so that `new` becomes the
    /// reference ordering.
    pub fn reorder(&self, new: &Ordering) -> Result<Self> {
        let t = self.layout.standard_transform_matrix(new, &self.ordering)?;
        let mut out = self.clone();
        out.iota = &self.iota * t;
        out.ordering = new.clone();
        Ok(out)
    }

    pub fn validate(&self) -> Result<ValidationReport> {
        self.validate_with(1e-10)
    }

    /// Evaluates every defining condition. Numerical failures are reported in
    /// the returned value; only malformed dimensions are errors.
    pub fn validate_with(&self, tol: f64) -> Result<ValidationReport> {
        let du = self.dim_u();
        if self.omega.shape() != (du, du) || self.iota.nrows() != du || self.w.nrows() != du {
            return Err(Error::Dimension("inconsistent stored matrices".into()));
        }
        let scale = max_abs(&self.omega).max(1.0);
        let budget = 10.0 * self.truncation_budget;
        let structural = (tol * scale).max(budget);
        let mut checks = Vec::new();

        let antisym = max_abs(&(&self.omega + self.omega.transpose()));
        checks.push(Check::new("antisymmetry", antisym, tol * scale));

        let pullback = self.iota.transpose() * &self.omega * &self.iota - self.layout.gram(&self.ordering);
        checks.push(Check::new("pullback", max_abs(&pullback), tol * scale));

        let wn = normalize_columns(&self.w);
        let isotropy = max_abs(&(wn.transpose() * &self.omega * &wn));
        checks.push(Check::new("isotropy", isotropy, structural));

        let q = orth(&self.w, 1e-13);
        let stacked = hstack(&[&q, &self.conj_u(&q)]);
        let span_sigma = if du == 0 {
            1.0
        } else if q.ncols() != self.w.ncols() {
            0.0
        } else {
            singular_values(&stacked).get(du - 1).copied().unwrap_or(0.0)
        };
        checks.push(Check::lower("span", span_sigma, 1e-8));

        let h = |b: &CMat| (b.transpose() * &self.omega * self.conj_u(b)) * c(0.0, 2.0);
        let positivity = hermitian_eigenvalues(&h(&self.w)).first().copied().unwrap_or(f64::INFINITY);
        let positivity_normalized = hermitian_eigenvalues(&h(&q)).first().copied().unwrap_or(f64::INFINITY);
        checks.push(Check::lower("positivity", positivity_normalized, structural));

        let lat = &self.lattice;
        let lat_scale = max_abs(lat).max(1.0);
        let real_resid = max_abs(&(self.conj_u(lat) - lat));
        checks.push(Check::new("lattice_real", real_resid, tol * lat_scale));
        let orth_resid = max_abs(&(self.iota.transpose() * &self.omega * lat));
        checks.push(Check::new("lattice_orthogonal", orth_resid, structural * lat_scale));
        let full_rank = rank(&self.adapted_basis(), 1e-10) == du;
        checks.push(Check::lower("complement_rank", if full_rank { 1.0 } else { 0.0 }, 0.5));
        let gram = lat.transpose() * &self.omega * lat;
        let gram_re: Vec<Vec<f64>> = (0..gram.nrows())
            .map(|i| (0..gram.ncols()).map(|j| gram[(i, j)].re).collect())
            .collect();
        let int_resid = gram
            .iter()
            .map(|z| (z.re - z.re.round()).abs().max(z.im.abs()))
            .fold(0.0, f64::max);
        checks.push(Check::new("lattice_integral", int_resid, 1e-6));
        let divisors = round_matrix(&gram_re, 0.5)
            .ok()
            .and_then(|g| alternating_normal_form(&g).ok())
            .map(|s| {
                let mut d = s.divisors.clone();
                d.resize(s.basis.len() / 2, 0);
                d
            })
            .unwrap_or_default();
        let hyperbolic = divisors.iter().all(|&d| d == 1) && 2 * divisors.len() == lat.ncols();
        checks.push(Check::lower("lattice_hyperbolic", if hyperbolic { 1.0 } else { 0.0 }, 0.5));

        let degree = self.degree_residual();
        checks.push(Check::new("degree", degree, tol * scale));

        let pass = checks.iter().all(|c| c.pass);
        Ok(ValidationReport {
            checks,
            positivity_min_eig: positivity,
            lattice_divisors: divisors,
            truncation_budget: self.truncation_budget,
            pass,
        })
    }

    fn degree_residual(&self) -> f64 {
        if self.dim_v() == 0 {
            return 0.0;
        }
        let pw = self.projection() * &self.w;
        let mut worst: f64 = 0.0;
        for col in 0..pw.ncols() {
            let x = self.layout.block_from_coords(&pw.column(col).into_owned());
            for s in x.degree_sums() {
                worst = worst.max(s.norm());
            }
        }
        worst
    }

    /// Period matrix of a closed variety. The lattice is first brought to
    /// symplectic normal form `a_1, b_1, …`.
    pub fn period_matrix(&self) -> Result<CMat> {
        if !self.is_closed() {
            return Err(Error::NotClosed("period matrix needs an empty signature".into()));
        }
        let g = self.genus();
        if g == 0 {
            return Ok(CMat::zeros(0, 0));
        }
        let basis = self.symplectic_lattice()?;
        let a = CMat::from_fn(self.dim_u(), g, |i, k| basis[(i, 2 * k)]);
        let b = CMat::from_fn(self.dim_u(), g, |i, k| basis[(i, 2 * k + 1)]);
        let am = self.w.transpose() * &self.omega * &b;
        let bm = self.w.transpose() * self.omega.transpose() * &a;
        let am_inv = am
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::DegenerateLattice("a-periods of W are singular".into()))?;
        Ok(am_inv * bm)
    }

    /// Lattice basis in symplectic normal form.
    pub fn symplectic_lattice(&self) -> Result<CMat> {
        let gram = self.lattice.transpose() * &self.omega * &self.lattice;
        let rows: Vec<Vec<f64>> = (0..gram.nrows())
            .map(|i| (0..gram.ncols()).map(|j| gram[(i, j)].re).collect())
            .collect();
        let g = round_matrix(&rows, 1e-6).map_err(|e| Error::DegenerateLattice(e.to_string()))?;
        let s = alternating_normal_form(&g)?;
        if !s.is_unimodular() {
            return Err(Error::DegenerateLattice(format!("elementary divisors {:?}", s.divisors)));
        }
        let t = CMat::from_fn(g.len(), g.len(), |i, j| re(s.basis[j][i] as f64));
        Ok(&self.lattice * t)
    }

    /// Singular values of the projection of an orthonormal `W`-basis onto
    /// the negative mode coordinates of `V`, and the index of the
    /// projection to the positive part.
    pub fn smoothness_diagnostic(&self) -> SmoothnessReport {
        let q = orth(&self.w, 1e-13);
        if self.dim_v() == 0 {
            return SmoothnessReport {
                minus_singular_values: singular_values(&q),
                kernel_dim: q.ncols(),
                cokernel_dim: 0,
                index: q.ncols() as i64,
            };
        }
        let pq = self.projection() * &q;
        let minus = self.layout.minus_mode_indices();
        let plus = self.layout.plus_indices();
        let pm = CMat::from_fn(minus.len(), q.ncols(), |i, j| pq[(minus[i], j)]);
        let pp = CMat::from_fn(plus.len(), q.ncols(), |i, j| pq[(plus[i], j)]);
        let r = rank(&pp, 1e-9);
        SmoothnessReport {
            minus_singular_values: singular_values(&pm),
            kernel_dim: q.ncols() - r,
            cokernel_dim: plus.len() - r,
            index: (q.ncols() - r) as i64 - (plus.len() - r) as i64,
        }
    }
}

fn normalize_columns(m: &CMat) -> CMat {
    let mut out = m.clone();
    for mut col in out.column_iter_mut() {
        let n = col.norm();
        if n > 0.0 {
            col /= re(n);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
    /// `true` when the value must exceed the tolerance rather than stay
    /// below it.
    pub lower_bound: bool,
    pub pass: bool,
}

impl Check {
    fn new(name: &'static str, value: f64, tolerance: f64) -> Self {
        Self { name, value, tolerance, lower_bound: false, pass: value <= tolerance }
    }

    fn lower(name: &'static str, value: f64, tolerance: f64) -> Self {
        Self { name, value, tolerance, lower_bound: true, pass: value > tolerance }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    /// Smallest eigenvalue of `2i·S(w_i, conj w_j)` on the stored basis.
    pub positivity_min_eig: f64,
    pub lattice_divisors: Vec<i64>,
    pub truncation_budget: f64,
    pub pass: bool,
}

impl ValidationReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn value(&self, name: &str) -> f64 {
        self.check(name).map_or(f64::NAN, |c| c.value)
    }

    pub fn failures(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| !c.pass).map(|c| c.name).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmoothnessReport {
    pub minus_singular_values: Vec<f64>,
    pub kernel_dim: usize,
    pub cokernel_dim: usize,
    pub index: i64,
}

/// Integer coordinates of `v` in the ℤ-span of the columns of `basis`, or
/// `None` when the rounded combination misses `v` by more than `tol`
/// (relative to the size of `v`).
pub fn lattice_coords(basis: &CMat, v: &CMat, tol: f64) -> Option<Vec<i64>> {
    let scale = max_abs(v).max(1.0);
    if basis.ncols() == 0 {
        return (max_abs(v) <= tol * scale).then(Vec::new);
    }
    let x = lstsq(basis, v);
    let rounded = x.map(|z| re(z.re.round()));
    let resid = max_abs(&(basis * &rounded - v));
    (resid <= tol * scale).then(|| rounded.iter().map(|z| z.re as i64).collect())
}

fn columns_in(basis: &CMat, vs: &CMat, tol: f64) -> bool {
    (0..vs.ncols()).all(|j| lattice_coords(basis, &vs.columns(j, 1).into_owned(), tol).is_some())
}

fn stack_columns(vs: &[nalgebra::DVector<C>], rows: usize) -> CMat {
    let mut m = CMat::zeros(rows, vs.len());
    for (j, v) in vs.iter().enumerate() {
        m.set_column(j, v);
    }
    m
}

/// Checks that two presentations share signature, truncation, form and
/// `W`, returning the second one reordered to the first one's ordering.
fn comparable(x1: &OpenAbelianVariety, x2: &OpenAbelianVariety, tol: f64) -> Result<OpenAbelianVariety> {
    if x1.layout != x2.layout {
        return Err(Error::NotComparable("signatures or truncations differ".into()));
    }
    if x1.dim_u() != x2.dim_u() {
        return Err(Error::NotComparable("ambient dimensions differ".into()));
    }
    let x2 = x2.reorder(&x1.ordering)?;
    let scale = max_abs(&x1.omega).max(1.0);
    if max_abs(&(&x1.omega - &x2.omega)) > tol * scale {
        return Err(Error::NotComparable("forms differ".into()));
    }
    let wtol = tol.max(10.0 * x1.truncation_budget.max(x2.truncation_budget));
    let dist = subspace_distance(&x1.w, &x2.w);
    if dist > wtol {
        return Err(Error::NotComparable(format!("W subspaces differ (distance {dist:e})")));
    }
    Ok(x2)
}

/// The equivalence of presentations: `x1`, `x2` share all ambient data and
/// their embeddings and lattices differ by integral constants. The lattice
/// containment is checked in both directions.
pub fn equivalent(x1: &OpenAbelianVariety, x2: &OpenAbelianVariety, tol: f64) -> Result<bool> {
    let x2 = comparable(x1, x2, tol)?;
    let du = x1.dim_u();
    let consts = stack_columns(&x1.layout.const_generators(), x1.dim_v());
    let target = |x: &OpenAbelianVariety| hstack(&[&x.lattice, &(&x.iota * &consts)]);
    let t1 = target(x1);
    let t2 = target(&x2);
    if !columns_in(&t2, &x1.lattice, tol) || !columns_in(&t1, &x2.lattice, tol) {
        return Ok(false);
    }
    let degs = stack_columns(&x1.layout.degree_generators(), x1.dim_v());
    let diff = (&x1.iota - &x2.iota) * degs;
    debug_assert_eq!(diff.nrows(), du);
    Ok(columns_in(&t2, &diff, tol))
}

/// Transports `x2` into the `U`-coordinates of `x1` through the unique real
/// linear map `φ` with `φ∘ι₂ = ι₁` and `φ(W₂) = W₁`, then checks that `φ`
/// preserves the form. Requires the `V⊥`-components of `W₂` to span, which
/// holds for varieties with nonempty boundary.
pub fn align(x2: &OpenAbelianVariety, x1: &OpenAbelianVariety, tol: f64) -> Result<OpenAbelianVariety> {
    if x1.layout != x2.layout || x1.dim_u() != x2.dim_u() {
        return Err(Error::NotComparable("signatures or genera differ".into()));
    }
    let x2 = x2.reorder(&x1.ordering)?;
    let du = x1.dim_u();
    let dv = x1.dim_v();
    let h = du / 2;
    let g2 = du - dv;
    if g2 == 0 {
        let phi = &x1.iota * x2.iota.clone().try_inverse().ok_or_else(|| Error::Dimension("singular ι".into()))?;
        let mut out = x2.clone();
        out.iota = x1.iota.clone();
        out.w = &phi * &x2.w;
        return Ok(out);
    }
    let coords = x2.adapted_coords(&x2.w);
    let p = coords.rows(0, dv).into_owned();
    let q = coords.rows(dv, g2).into_owned();
    if rank(&q, 1e-8) < g2 {
        return Err(Error::NotComparable(
            "W does not determine the identification of the lattice complements".into(),
        ));
    }
    let basis1 = hstack(&[&x1.w, &x1.conj_u(&x1.w)]);
    let inv1 = basis1
        .try_inverse()
        .ok_or_else(|| Error::NotComparable("W₁ ⊕ conj W₁ is degenerate".into()))?;
    let c1 = inv1.rows(h, h).into_owned();
    let r = -(&c1 * &x1.iota * &p);
    let z = &r * pseudo_right_inverse(&q);
    let match_resid = max_abs(&(&z * &q - &r));
    let y = &x1.w * conj(&z) + x1.conj_u(&x1.w) * &z;
    let phi = hstack(&[&x1.iota, &y]) * x2.adapted_coords(&CMat::identity(du, du));
    let scale = max_abs(&x1.omega).max(1.0);
    let wtol = tol.max(10.0 * x1.truncation_budget.max(x2.truncation_budget));
    let sym_resid = max_abs(&(phi.transpose() * &x1.omega * &phi - &x2.omega));
    if match_resid > wtol * scale.max(max_abs(&r)) || sym_resid > wtol * scale {
        return Err(Error::NotComparable(format!(
            "no symplectic identification (W residual {match_resid:e}, form residual {sym_resid:e})"
        )));
    }
    let mut out = x2.clone();
    out.omega = x1.omega.clone();
    out.iota = &phi * &x2.iota;
    out.w = &phi * &x2.w;
    out.lattice = &phi * &x2.lattice;
    Ok(out)
}

fn pseudo_right_inverse(q: &CMat) -> CMat {
    let s = svd(q);
    let top = s.singular_values.first().copied().unwrap_or(0.0);
    let mut out = CMat::zeros(q.ncols(), q.nrows());
    for (k, &sigma) in s.singular_values.iter().enumerate() {
        if sigma <= 1e-13 * top {
            continue;
        }
        for i in 0..q.ncols() {
            for j in 0..q.nrows() {
                out[(i, j)] += s.v_t[(k, i)].conj() * s.u[(j, k)].conj() / sigma;
            }
        }
    }
    out
}

/// The map `C: V → V` shifting constants by integer combinations of degrees
/// with `(I + C)·p₂(W₂) ⊆ p₁(W₁)`, if one exists. Both presentations must
/// share the reference ordering.
pub fn constant_correction(x1: &OpenAbelianVariety, x2: &OpenAbelianVariety, tol: f64) -> Option<CMat> {
    let dv = x1.dim_v();
    let coords = x1.layout.coords();
    let consts: Vec<usize> = (0..dv).filter(|&i| matches!(coords[i], Coord::Constant { .. })).collect();
    let degs: Vec<usize> = (0..dv).filter(|&i| matches!(coords[i], Coord::Degree { .. })).collect();
    let a = x2.adapted_coords(&x2.w).rows(0, dv).into_owned();
    let b = orth(&x1.adapted_coords(&x1.w).rows(0, dv).into_owned(), 1e-10);
    let p = CMat::identity(dv, dv) - &b * b.adjoint();
    let pa = &p * &a;
    let h = a.ncols();
    let unknowns: Vec<(usize, usize)> = consts.iter().flat_map(|&c| degs.iter().map(move |&d| (c, d))).collect();
    let rows = 2 * dv * h;
    let mut sys = CMat::zeros(rows, unknowns.len());
    let mut rhs = CMat::zeros(rows, 1);
    for i in 0..dv {
        for j in 0..h {
            let r = 2 * (i * h + j);
            rhs[(r, 0)] = re(-pa[(i, j)].re);
            rhs[(r + 1, 0)] = re(-pa[(i, j)].im);
            for (u, &(c, d)) in unknowns.iter().enumerate() {
                let v = p[(i, c)] * a[(d, j)];
                sys[(r, u)] = re(v.re);
                sys[(r + 1, u)] = re(v.im);
            }
        }
    }
    let k = if unknowns.is_empty() { CMat::zeros(0, 1) } else { lstsq(&sys, &rhs) };
    let mut corr = CMat::zeros(dv, dv);
    for (u, &(c, d)) in unknowns.iter().enumerate() {
        corr[(c, d)] = re(k[(u, 0)].re.round());
    }
    let resid = max_abs(&(&p * (CMat::identity(dv, dv) + &corr) * &a));
    (resid <= tol * max_abs(&a).max(1.0)).then_some(corr)
}

/// [`equivalent`] after [`align`], first absorbing an integral constant
/// correction of `ι₂` found by [`constant_correction`] when one is needed.
pub fn equivalent_aligned(x1: &OpenAbelianVariety, x2: &OpenAbelianVariety, tol: f64) -> Result<bool> {
    if x1.layout != x2.layout || x1.dim_u() != x2.dim_u() {
        return Err(Error::NotComparable("signatures or genera differ".into()));
    }
    let x2 = x2.reorder(&x1.ordering)?;
    if let Ok(a) = align(&x2, x1, tol) {
        if matches!(equivalent(x1, &a, tol), Ok(true)) {
            return Ok(true);
        }
    }
    let wtol = tol.max(10.0 * x1.truncation_budget.max(x2.truncation_budget));
    let corr = constant_correction(x1, &x2, wtol)
        .ok_or_else(|| Error::NotComparable("no integral constant correction matches W".into()))?;
    let dv = x1.dim_v();
    let shifted = x2.with_iota(&x2.iota * (CMat::identity(dv, dv) - corr))?;
    let a = align(&shifted, x1, tol)?;
    equivalent(x1, &a, tol)
}

/// An endomorphism of `U = V ⊕ V⊥` in block form, with respect to the
/// adapted basis `[ι | lattice]`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockMatrix2x2 {
    pub vv: CMat,
    /// `V⊥ → V`.
    pub v_perp: CMat,
    /// `V → V⊥`.
    pub perp_v: CMat,
    pub perp_perp: CMat,
}

impl BlockMatrix2x2 {
    pub fn identity(x: &OpenAbelianVariety) -> Self {
        let (dv, dp) = (x.dim_v(), x.dim_u() - x.dim_v());
        Self {
            vv: CMat::identity(dv, dv),
            v_perp: CMat::zeros(dv, dp),
            perp_v: CMat::zeros(dp, dv),
            perp_perp: CMat::identity(dp, dp),
        }
    }

    pub fn from_matrix(x: &OpenAbelianVariety, m: &CMat) -> Result<Self> {
        let (dv, du) = (x.dim_v(), x.dim_u());
        if m.shape() != (du, du) {
            return Err(Error::Dimension("block matrix must be dim U square".into()));
        }
        let dp = du - dv;
        Ok(Self {
            vv: m.view((0, 0), (dv, dv)).into_owned(),
            v_perp: m.view((0, dv), (dv, dp)).into_owned(),
            perp_v: m.view((dv, 0), (dp, dv)).into_owned(),
            perp_perp: m.view((dv, dv), (dp, dp)).into_owned(),
        })
    }

    fn check_shape(&self, x: &OpenAbelianVariety) -> Result<()> {
        let (dv, dp) = (x.dim_v(), x.dim_u() - x.dim_v());
        let ok = self.vv.shape() == (dv, dv)
            && self.v_perp.shape() == (dv, dp)
            && self.perp_v.shape() == (dp, dv)
            && self.perp_perp.shape() == (dp, dp);
        if ok {
            Ok(())
        } else {
            Err(Error::Dimension("block sizes do not match the variety".into()))
        }
    }
}

/// Membership in `Sp_open(V, ℤ)`, checked on generators.
pub fn sp_open_member(phi: &BlockMatrix2x2, x: &OpenAbelianVariety, tol: f64) -> Result<bool> {
    phi.check_shape(x)?;
    let dp = x.dim_u() - x.dim_v();
    let lat = &x.lattice;
    let j = lat.transpose() * &x.omega * lat;
    let pp = &phi.perp_perp;
    let integral = pp.iter().all(|z| (z.re - z.re.round()).abs() <= tol && z.im.abs() <= tol);
    let symplectic = max_abs(&(pp.transpose() * &j * pp - &j)) <= tol * max_abs(&j).max(1.0);
    if !(integral && symplectic) {
        return Ok(false);
    }
    let consts = stack_columns(&x.layout.const_generators(), x.dim_v());
    let degs = stack_columns(&x.layout.degree_generators(), x.dim_v());
    if !columns_in(&consts, &phi.v_perp, tol) {
        return Ok(false);
    }
    let unit = CMat::identity(dp, dp);
    if !columns_in(&unit, &(&phi.perp_v * &degs), tol) {
        return Ok(false);
    }
    let shifted = (&phi.vv - CMat::identity(x.dim_v(), x.dim_v())) * &degs;
    Ok(columns_in(&consts, &shifted, tol))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_datum_validates() {
        let x = OpenAbelianVariety::torus(c(0.3, 0.9));
        let rep = x.validate().unwrap();
        assert!(rep.pass, "{:?}", rep.failures());
        assert!((rep.positivity_min_eig - 3.6).abs() < 1e-12);
        assert_eq!(x.genus(), 1);
    }

    #[test]
    fn lower_half_plane_fails_positivity() {
        let rep = OpenAbelianVariety::torus(c(0.0, -1.0)).validate().unwrap();
        assert!(!rep.pass);
        assert_eq!(rep.failures(), vec!["positivity"]);
    }

    #[test]
    fn torus_period_unwinds() {
        let tau = c(0.3, 0.9);
        let p = OpenAbelianVariety::torus(tau).period_matrix().unwrap();
        assert!((p[(0, 0)] - tau).norm() < 1e-14);
    }

    #[test]
    fn sp_open_rejects_half_integers() {
        let x = OpenAbelianVariety::torus(c(0.3, 0.9));
        assert!(sp_open_member(&BlockMatrix2x2::identity(&x), &x, 1e-6).unwrap());
        let mut phi = BlockMatrix2x2::identity(&x);
        phi.perp_perp[(0, 1)] = re(0.5);
        assert!(!sp_open_member(&phi, &x, 1e-6).unwrap());
    }
}
