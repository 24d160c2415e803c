//! The generalized backward shift `R_β f = f(z)/(z - β)`, the
//! multiplication operator `𝔗f = z f(z)` and the checks built on them.
//!
//! All quotients are stored with the `(z - β)` orientation.

use nalgebra::DMatrix;
use rand::Rng;

use crate::grid;
use crate::hilbert::{self, inner_unchecked, HilbertVector, RANK_TOL};
use crate::rkhs::{grid_residual, membership_solve, RkhsElement, MEMBERSHIP_TOL};
use crate::sampling::SamplingSystem;
use crate::{Error, Result, C64};

/// Relative tolerance of the de Branges norm identity.
pub const ISOMETRY_TOL: f64 = 1e-9;
/// Relative tolerance of the `f(β) = 0` precondition.
pub const VANISH_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct ShiftResult {
    pub beta: C64,
    pub input: RkhsElement,
    /// Coefficients `v` with `F(z)v = f(z)/(z - β)`.
    pub output_coeff: HilbertVector,
    pub in_space: bool,
    /// Grid residual of `F(z)v` against `f(z)/(z - β)`, relative to
    /// `1 + max ‖f(z)/(z - β)‖`.
    pub residual: f64,
}

fn guard(beta: C64) -> f64 {
    1e-6 * (1.0 + beta.norm())
}

/// Candidate coefficients of `R_β f` from the samples of `f`:
/// `⟨v,u_n⟩ = ⟨f(z_n),u_n⟩ / (c_n (z_n - β))`, and at `β = z_m` the
/// `m`-th coefficient is `⟨f'(z_m),u_m⟩ / c_m`.
pub fn shift_coefficients(system: &SamplingSystem, f: &RkhsElement, beta: C64) -> HilbertVector {
    let at_node = system.node_index(beta);
    let mut v = HilbertVector::zeros(system.dim());
    for (n, (&zn, un)) in system.nodes().iter().zip(system.basis()).enumerate() {
        let coeff = if at_node == Some(n) {
            inner_unchecked(&f.derivative(zn), un) / system.c()[n]
        } else {
            inner_unchecked(&f.value(zn), un) / (system.c()[n] * (zn - beta))
        };
        v = v.axpy(coeff, un);
    }
    v
}

/// `R_β f` via [`shift_coefficients`], validated on the membership grid
/// with `f'(β)` used inside the pole guard of `β`.
pub fn backward_shift(system: &SamplingSystem, f: &RkhsElement, beta: C64) -> Result<ShiftResult> {
    let at_beta = f.value(beta).norm();
    let allowed = VANISH_TOL * system.kernel().evaluate(beta).op_norm() * f.norm();
    if at_beta > allowed {
        return Err(Error::PreconditionViolation(format!(
            "f(β) = {at_beta:.3e} does not vanish at β = {beta}"
        )));
    }
    let v = shift_coefficients(system, f, beta);
    let residual = shift_residual(system, f, &v, beta);
    Ok(ShiftResult {
        beta,
        input: f.clone(),
        output_coeff: v,
        in_space: residual <= MEMBERSHIP_TOL,
        residual,
    })
}

/// Target values of `f(z)/(z - β)` on the membership grid.
pub fn shift_targets(system: &SamplingSystem, f: &RkhsElement, beta: C64) -> (Vec<C64>, Vec<HilbertVector>) {
    let pts = grid::membership_grid(system.nodes(), system.dim());
    let values = pts
        .iter()
        .map(|&z| {
            if (z - beta).norm() <= guard(beta) {
                f.derivative(beta)
            } else {
                f.value(z).scale(1.0 / (z - beta))
            }
        })
        .collect();
    (pts, values)
}

fn shift_residual(system: &SamplingSystem, f: &RkhsElement, v: &HilbertVector, beta: C64) -> f64 {
    let (pts, values) = shift_targets(system, f, beta);
    let ops: Vec<_> = pts.iter().map(|&z| system.kernel().evaluate(z)).collect();
    grid_residual(&ops, v, &values)
}

/// Orthonormal coefficient basis of `H_β = { f ∈ H : f(β) = 0 }`, taken
/// inside the complement of `H = ∩ ker F(z)`.
pub fn h_beta_basis(system: &SamplingSystem, beta: C64) -> Vec<HilbertVector> {
    let comp = system.space().complement().matrix();
    if comp.ncols() == 0 {
        return Vec::new();
    }
    let m = &system.kernel().evaluate(beta).0 * &comp;
    hilbert::null_space(&m, RANK_TOL)
        .into_iter()
        .map(|a| HilbertVector(&comp * &a.0))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvarianceRow {
    pub beta: C64,
    pub dim_h_beta: usize,
    pub all_shifts_in_space: bool,
    /// Worst shift residual over the `H_β` basis; zero when `H_β = {0}`.
    pub max_residual: f64,
}

/// Tests `R_β H_β ⊆ H` for each `β` by shifting an orthonormal basis of
/// `H_β`.
pub fn invariance_check(system: &SamplingSystem, betas: &[C64]) -> Result<Vec<InvarianceRow>> {
    betas
        .iter()
        .map(|&beta| {
            let basis = h_beta_basis(system, beta);
            let mut worst = 0.0f64;
            for u in &basis {
                let shifted = backward_shift(system, &system.lift(u)?, beta)?;
                worst = worst.max(shifted.residual);
            }
            Ok(InvarianceRow {
                beta,
                dim_h_beta: basis.len(),
                all_shifts_in_space: worst <= MEMBERSHIP_TOL,
                max_residual: worst,
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct MultResult {
    pub in_domain: bool,
    /// Least-squares coefficients of `z f(z)`.
    pub coeff: HilbertVector,
    pub residual: f64,
}

/// Decides whether `z f(z)` lies in `H`.
pub fn mult_apply(system: &SamplingSystem, f: &RkhsElement) -> Result<MultResult> {
    let pts = grid::membership_grid(system.nodes(), system.dim());
    let values: Vec<_> = pts.iter().map(|&z| f.value(z).scale(z)).collect();
    let m = membership_solve(system.kernel(), &values, &pts)?;
    Ok(MultResult {
        in_domain: m.residual <= MEMBERSHIP_TOL,
        coeff: m.u,
        residual: m.residual,
    })
}

/// Domain of `𝔗` with an orthonormal coefficient basis and the
/// coefficients of `z f(z)` for each basis element.
#[derive(Debug, Clone)]
pub struct MultDomain {
    pub basis: Vec<HilbertVector>,
    pub images: Vec<HilbertVector>,
}

/// Solves `z F(z)u = F(z)w` jointly on the membership grid, with `u`, `w`
/// restricted to the complement of `H`.
pub fn mult_domain(system: &SamplingSystem) -> Result<MultDomain> {
    let comp = system.space().complement().matrix();
    let k = comp.ncols();
    let d = system.dim();
    if k == 0 {
        return Ok(MultDomain {
            basis: Vec::new(),
            images: Vec::new(),
        });
    }
    let pts = grid::membership_grid(system.nodes(), d);
    let mut m = DMatrix::zeros(d * pts.len(), 2 * k);
    for (j, &z) in pts.iter().enumerate() {
        let fc = &system.kernel().evaluate(z).0 * &comp;
        let norm = fc.norm() * (1.0 + z.norm());
        let s = C64::new(if norm > 0.0 { 1.0 / norm } else { 1.0 }, 0.0);
        m.view_mut((j * d, 0), (d, k)).copy_from(&(&fc * (z * s)));
        m.view_mut((j * d, k), (d, k)).copy_from(&(&fc * (-s)));
    }
    let null = hilbert::null_space(&m, RANK_TOL);
    if null.is_empty() {
        return Ok(MultDomain {
            basis: Vec::new(),
            images: Vec::new(),
        });
    }
    let mut a = DMatrix::zeros(k, null.len());
    let mut b = DMatrix::zeros(k, null.len());
    for (i, x) in null.iter().enumerate() {
        a.set_column(i, &x.0.rows(0, k));
        b.set_column(i, &x.0.rows(k, k));
    }
    // Orthonormalize the u-parts and carry the w-parts along.
    let qr = a.qr();
    let r = qr.r();
    let q = qr.q();
    let r_inv = r
        .try_inverse()
        .ok_or_else(|| Error::InvalidInput("degenerate multiplication domain".into()))?;
    let w = &b * r_inv;
    let basis = (0..null.len()).map(|i| HilbertVector(&comp * q.column(i))).collect();
    let images = (0..null.len()).map(|i| HilbertVector(&comp * w.column(i))).collect();
    Ok(MultDomain { basis, images })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BijectionReport {
    pub dim_z1: usize,
    pub dim_z2: usize,
    pub images_in_space: bool,
    /// Worst `‖g(z_2)‖` relative to `‖F(z_2)‖ ‖g‖`.
    pub vanish_residual: f64,
    pub round_trip_residual: f64,
    pub image_rank: usize,
    pub bijective: bool,
}

/// `(𝔗 - z_2) R_{z_1}: H_{z_1} → H_{z_2}`, i.e. `u ↦ u + (z_1 - z_2) v`,
/// followed by the reverse map, on a basis of `H_{z_1}`.
pub fn bijection_check(system: &SamplingSystem, z1: C64, z2: C64) -> Result<BijectionReport> {
    if (z1 - z2).norm() <= guard(z1) {
        return Err(Error::InvalidInput("bijection_check needs z1 != z2".into()));
    }
    let b1 = h_beta_basis(system, z1);
    let b2 = h_beta_basis(system, z2);
    let f2 = system.kernel().evaluate(z2);
    let mut in_space = true;
    let mut vanish = 0.0f64;
    let mut round_trip = 0.0f64;
    let mut images = Vec::with_capacity(b1.len());
    for u in &b1 {
        let s1 = backward_shift(system, &system.lift(u)?, z1)?;
        in_space &= s1.in_space;
        let g = u.axpy(z1 - z2, &s1.output_coeff);
        let g_el = system.lift(&g)?;
        let scale = f2.op_norm() * g_el.norm();
        vanish = vanish.max(if scale > 0.0 { f2.apply(&g).norm() / scale } else { 0.0 });
        let s2 = backward_shift(system, &g_el, z2)?;
        in_space &= s2.in_space;
        let back = g.axpy(z2 - z1, &s2.output_coeff);
        round_trip = round_trip.max(system.lift(&back.sub(u))?.norm() / system.lift(u)?.norm());
        images.push(g);
    }
    let image_rank = if images.is_empty() {
        0
    } else {
        let cols: Vec<_> = images.iter().map(|g| g.0.clone()).collect();
        hilbert::numerical_rank(&DMatrix::from_columns(&cols), RANK_TOL)
    };
    let bijective = b1.len() == b2.len()
        && image_rank == b1.len()
        && in_space
        && vanish <= VANISH_TOL
        && round_trip <= MEMBERSHIP_TOL;
    Ok(BijectionReport {
        dim_z1: b1.len(),
        dim_z2: b2.len(),
        images_in_space: in_space,
        vanish_residual: vanish,
        round_trip_residual: round_trip,
        image_rank,
        bijective,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsometryDefect {
    pub beta: C64,
    pub dim_h_beta: usize,
    pub max_norm_defect: f64,
    pub isometric: bool,
}

fn require_real_nodes(system: &SamplingSystem) -> Result<()> {
    match system.nodes().iter().find(|z| z.im.abs() > 1e-12 * (1.0 + z.re.abs())) {
        Some(z) => Err(Error::PreconditionViolation(format!("node {z} is not real"))),
        None => Ok(()),
    }
}

/// `‖(𝔗 - β̄) R_β f‖ = ‖f‖` over a basis of `H_β`, through the coefficients
/// `u + (β - β̄) v`.
pub fn debranges_isometry_check(system: &SamplingSystem, beta: C64) -> Result<IsometryDefect> {
    require_real_nodes(system)?;
    if beta.im <= 0.0 {
        return Err(Error::PreconditionViolation(format!(
            "β = {beta} is not in the upper half-plane"
        )));
    }
    let basis = h_beta_basis(system, beta);
    let mut worst = 0.0f64;
    for u in &basis {
        let f = system.lift(u)?;
        let v = shift_coefficients(system, &f, beta);
        let image = system.lift(&u.axpy(beta - beta.conj(), &v))?;
        worst = worst.max((image.norm() - f.norm()).abs() / f.norm());
    }
    Ok(IsometryDefect {
        beta,
        dim_h_beta: basis.len(),
        max_norm_defect: worst,
        isometric: worst <= ISOMETRY_TOL,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularTypeReport {
    pub beta: C64,
    /// `‖R_β|H_β‖`, the largest singular value of the shift on an
    /// orthonormal basis of `H_β`.
    pub shift_norm: f64,
    /// `C_β = 1/‖R_β|H_β‖`.
    pub c_beta: f64,
    pub domain_dim: usize,
    /// Smallest `‖(𝔗 - β)f‖ / ‖f‖` over the sampled domain elements.
    pub min_ratio: f64,
    /// The inequality applies when `R_β H_β ⊆ H` and the domain is
    /// nontrivial.
    pub applicable: bool,
    pub consistent: bool,
}

/// Compares `‖(𝔗 - β)f‖ ≥ C_β ‖f‖` on the domain basis and `samples`
/// random combinations with `C_β` from the shift norm.
pub fn regular_type_check(
    system: &SamplingSystem,
    beta: C64,
    samples: usize,
    rng: &mut impl Rng,
) -> Result<RegularTypeReport> {
    let hb = h_beta_basis(system, beta);
    let mut in_space = true;
    let mut cols = Vec::with_capacity(hb.len());
    for u in &hb {
        let s = backward_shift(system, &system.lift(u)?, beta)?;
        in_space &= s.in_space;
        cols.push(system.lift(&s.output_coeff)?.reduced().0.clone());
    }
    let shift_norm = if cols.is_empty() {
        0.0
    } else {
        hilbert::singular_values(&DMatrix::from_columns(&cols))
            .into_iter()
            .fold(0.0, f64::max)
    };
    let c_beta = if shift_norm > 0.0 { 1.0 / shift_norm } else { f64::INFINITY };

    let domain = mult_domain(system)?;
    let k = domain.basis.len();
    let mut min_ratio = f64::INFINITY;
    let mut probe = |u: &HilbertVector, w: &HilbertVector| -> Result<()> {
        let f = system.lift(u)?;
        let g = system.lift(&w.axpy(-beta, u))?;
        if f.norm() > 0.0 {
            min_ratio = min_ratio.min(g.norm() / f.norm());
        }
        Ok(())
    };
    for (u, w) in domain.basis.iter().zip(&domain.images) {
        probe(u, w)?;
    }
    for _ in 0..if k > 0 { samples } else { 0 } {
        let coeffs = HilbertVector::random(k, rng);
        let mut u = HilbertVector::zeros(system.dim());
        let mut w = HilbertVector::zeros(system.dim());
        for (i, &c) in coeffs.coords().iter().enumerate() {
            u = u.axpy(c, &domain.basis[i]);
            w = w.axpy(c, &domain.images[i]);
        }
        probe(&u, &w)?;
    }
    let applicable = in_space && k > 0 && !hb.is_empty();
    let consistent = !applicable || min_ratio >= c_beta * (1.0 - 1e-8);
    Ok(RegularTypeReport {
        beta,
        shift_norm,
        c_beta,
        domain_dim: k,
        min_ratio,
        applicable,
        consistent,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplicityReport {
    pub points: Vec<C64>,
    /// Dimension of `{ f ∈ H : f(p) = 0 for every point }`.
    pub vanishing_dim: usize,
    pub simple: bool,
}

/// Elements of `H` vanishing at `count` random non-real points near the
/// nodes; `𝔗` simple forces this space to be `{0}`.
pub fn simplicity_check(system: &SamplingSystem, count: usize, rng: &mut impl Rng) -> Result<SimplicityReport> {
    let nodes = system.nodes();
    let lo = nodes.iter().map(|z| z.re).fold(f64::INFINITY, f64::min) - 2.0;
    let hi = nodes.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max) + 2.0;
    let points: Vec<C64> = (0..count)
        .map(|_| {
            let re = rng.random_range(lo..hi);
            let im = rng.random_range(0.25..2.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            C64::new(re, im)
        })
        .collect();
    let comp = system.space().complement().matrix();
    let k = comp.ncols();
    let d = system.dim();
    let vanishing_dim = if k == 0 || points.is_empty() {
        k
    } else {
        let mut m = DMatrix::zeros(d * points.len(), k);
        for (j, &p) in points.iter().enumerate() {
            let fc = &system.kernel().evaluate(p).0 * &comp;
            let norm = fc.norm();
            let s = C64::new(if norm > 0.0 { 1.0 / norm } else { 1.0 }, 0.0);
            m.view_mut((j * d, 0), (d, k)).copy_from(&(fc * s));
        }
        k - hilbert::numerical_rank(&m, RANK_TOL)
    };
    Ok(SimplicityReport {
        points,
        vanishing_dim,
        simple: vanishing_dim == 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entire::ScalarEntire;
    use crate::kernels::{build_rank_one_quasi, build_resolvent, build_zayed, standard_basis, Eigenspace};
    use crate::sampling::certify;
    use std::sync::Arc;

    fn r(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn rank_one(d: usize) -> SamplingSystem {
        let nodes: Vec<C64> = (1..=d).map(|k| r(k as f64)).collect();
        let q = ScalarEntire::poly_from_roots(nodes.clone()).unwrap();
        let c = nodes.iter().map(|&z| q.deriv(z)).collect();
        certify(Arc::new(build_rank_one_quasi(q, nodes, standard_basis(d), c).unwrap())).unwrap()
    }

    fn zayed(d: usize) -> SamplingSystem {
        let nodes: Vec<C64> = (0..d).map(|k| r(k as f64 - (d / 2) as f64)).collect();
        let q = ScalarEntire::sin_pi(nodes.clone()).unwrap();
        certify(Arc::new(build_zayed(q, nodes, standard_basis(d)).unwrap())).unwrap()
    }

    fn resolvent(d: usize) -> SamplingSystem {
        let nodes: Vec<C64> = (1..=d).map(|k| r(k as f64)).collect();
        let q = ScalarEntire::poly_from_roots(nodes.clone()).unwrap();
        let spectrum = nodes
            .iter()
            .enumerate()
            .map(|(i, &node)| Eigenspace {
                node,
                vectors: vec![HilbertVector::basis(d, i)],
            })
            .collect();
        certify(Arc::new(build_resolvent(q, spectrum).unwrap())).unwrap()
    }

    /// Random element of `H_β`.
    fn in_h_beta(s: &SamplingSystem, beta: C64, rng: &mut impl Rng) -> RkhsElement {
        let basis = h_beta_basis(s, beta);
        let mut u = HilbertVector::zeros(s.dim());
        for b in &basis {
            u = u.axpy(HilbertVector::random(1, rng).coords()[0], b);
        }
        s.lift(&u).unwrap()
    }

    #[test]
    fn shift_rank_one_generic_beta() {
        let s = rank_one(4);
        let beta = C64::new(0.7, 0.4);
        let mut rng = crate::seeded_rng(21);
        for _ in 0..20 {
            let f = in_h_beta(&s, beta, &mut rng);
            let res = backward_shift(&s, &f, beta).unwrap();
            assert!(res.in_space, "residual {}", res.residual);
            let (pts, values) = shift_targets(&s, &f, beta);
            let m = membership_solve(s.kernel(), &values, &pts).unwrap();
            assert!(m.u.sub(&res.output_coeff).norm() <= 1e-8 * (1.0 + m.u.norm()));
        }
    }

    #[test]
    fn shift_at_node() {
        let mut rng = crate::seeded_rng(22);
        for s in [rank_one(4), resolvent(3)] {
            let beta = s.nodes()[1];
            let f = in_h_beta(&s, beta, &mut rng);
            let v = shift_coefficients(&s, &f, beta);
            let expected = inner_unchecked(&f.derivative(beta), &s.basis()[1]) / s.c()[1];
            assert!((inner_unchecked(&v, &s.basis()[1]) - expected).norm() < 1e-12);
        }
        let s = rank_one(4);
        let beta = s.nodes()[2];
        let f = in_h_beta(&s, beta, &mut rng);
        assert!(backward_shift(&s, &f, beta).unwrap().in_space);
    }

    #[test]
    fn shift_of_zero_and_precondition() {
        let s = rank_one(3);
        let res = backward_shift(&s, &s.space().zero(), r(0.5)).unwrap();
        assert!(res.in_space);
        assert_eq!(res.output_coeff.norm(), 0.0);
        let f = s.sampling_element(0).unwrap();
        assert!(matches!(
            backward_shift(&s, &f, C64::new(0.5, 0.5)),
            Err(Error::PreconditionViolation(_))
        ));
    }

    #[test]
    fn invariance_examples() {
        let rows = invariance_check(&rank_one(4), &[C64::new(0.3, 0.8), C64::new(-2.0, 1.0), r(2.0)]).unwrap();
        for row in rows {
            assert_eq!(row.dim_h_beta, 3);
            assert!(row.all_shifts_in_space);
        }
        let z = zayed(4);
        let rows = invariance_check(&z, &[C64::new(0.3, 0.8), z.nodes()[0]]).unwrap();
        assert_eq!(rows[0].dim_h_beta, 0);
        assert!(rows[0].all_shifts_in_space);
        assert_eq!(rows[1].dim_h_beta, 3);
        assert!(!rows[1].all_shifts_in_space && rows[1].max_residual > 1e-4);
        let rows = invariance_check(&resolvent(3), &[C64::new(0.5, 1.0)]).unwrap();
        assert_eq!(rows[0].dim_h_beta, 0);
    }

    #[test]
    fn multiplication_domain_and_inverse() {
        let s = rank_one(4);
        let dom = mult_domain(&s).unwrap();
        assert_eq!(dom.basis.len(), 3);
        let beta = C64::new(0.2, 1.5);
        for (u, w) in dom.basis.iter().zip(&dom.images) {
            let f = s.lift(u).unwrap();
            let m = mult_apply(&s, &f).unwrap();
            assert!(m.in_domain);
            assert!(m.coeff.sub(w).norm() <= 1e-8);
            let g = s.lift(&w.axpy(-beta, u)).unwrap();
            assert!(g.value(beta).norm() <= 1e-10 * (1.0 + g.norm()));
            let back = backward_shift(&s, &g, beta).unwrap();
            assert!(back.in_space);
            assert!(back.output_coeff.sub(u).norm() <= 1e-8);
        }
        let m = mult_apply(&s, &s.space().zero()).unwrap();
        assert!(m.in_domain && m.coeff.norm() == 0.0);
        assert!(!mult_apply(&s, &s.sampling_element(0).unwrap()).unwrap().in_domain);
        assert!(mult_domain(&zayed(3)).unwrap().basis.is_empty());
    }

    #[test]
    fn resolvent_multiplication_identity() {
        let s = resolvent(3);
        for n in 0..3 {
            let f = s.sampling_element(n).unwrap();
            assert!(!mult_apply(&s, &f).unwrap().in_domain);
            let z = C64::new(0.4, 0.9);
            let lhs = f.value(z).scale(z);
            let rhs = f.value(z).scale(s.nodes()[n]).add(&s.basis()[n].scale(s.kernel().q().unwrap().eval(z)));
            assert!(lhs.sub(&rhs).norm() <= 1e-12 * lhs.norm());
        }
    }

    #[test]
    fn bijection_examples() {
        let s = rank_one(4);
        let rep = bijection_check(&s, C64::new(0.5, 1.0), C64::new(-1.0, 0.3)).unwrap();
        assert!(rep.bijective, "{rep:?}");
        assert_eq!((rep.dim_z1, rep.dim_z2, rep.image_rank), (3, 3, 3));
        assert!(rep.round_trip_residual <= 1e-8);
        let rep = bijection_check(&resolvent(3), C64::new(0.5, 1.0), C64::new(-1.0, 0.3)).unwrap();
        assert!(rep.bijective && rep.dim_z1 == 0);
    }

    #[test]
    fn isometry_examples() {
        for beta in [C64::new(0.0, 1.0), C64::new(1.0, 2.0), C64::new(-3.0, 0.5)] {
            let rep = debranges_isometry_check(&rank_one(5), beta).unwrap();
            assert_eq!(rep.dim_h_beta, 4);
            assert!(rep.isometric && rep.max_norm_defect <= 1e-9);
        }
        let ratio = (r(2.0) - C64::new(0.0, -1.0)) / (r(2.0) - C64::new(0.0, 1.0));
        assert!((ratio.norm() - 1.0).abs() < 1e-15);

        let nodes = vec![r(1.0), C64::new(2.0, 0.5)];
        let q = ScalarEntire::poly_from_roots(nodes.clone()).unwrap();
        let c = nodes.iter().map(|&z| q.deriv(z)).collect();
        let s = certify(Arc::new(build_rank_one_quasi(q, nodes, standard_basis(2), c).unwrap())).unwrap();
        assert!(matches!(
            debranges_isometry_check(&s, C64::new(0.0, 1.0)),
            Err(Error::PreconditionViolation(_))
        ));
    }

    #[test]
    fn regular_type_and_simplicity() {
        let mut rng = crate::seeded_rng(23);
        let s = rank_one(4);
        for beta in [C64::new(0.0, 1.0), C64::new(2.5, -0.7)] {
            let rep = regular_type_check(&s, beta, 20, &mut rng).unwrap();
            assert!(rep.applicable && rep.consistent, "{rep:?}");
        }
        for s in [rank_one(4), zayed(5), resolvent(3)] {
            let rep = simplicity_check(&s, 20, &mut rng).unwrap();
            assert!(rep.simple);
        }
    }
}
