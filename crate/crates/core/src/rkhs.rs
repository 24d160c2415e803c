//! The space `H_F = { f_u = F(.)u : u ∈ C^d }` with the quotient norm
//! `‖f_u‖ = ‖u - P_H u‖`, where `H = ∩_z ker F(z)`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::grid;
use crate::hilbert::{self, inner_unchecked, joint_kernel, project, HilbertVector, Subspace, RANK_TOL};
use crate::kernels::KernelFunction;
use crate::{Error, Result, C64};

/// Residual below which a grid function counts as a member of `H_F`.
pub const MEMBERSHIP_TOL: f64 = 1e-8;

/// `H_F` for one kernel: the kernel function together with the joint
/// kernel `H` it induces.
#[derive(Debug)]
pub struct Rkhs {
    kernel: Arc<KernelFunction>,
    null_space: Subspace,
    complement: Subspace,
}

impl Rkhs {
    /// `H` is taken over the distinct nodes plus five generic probes.
    pub fn new(kernel: Arc<KernelFunction>) -> Result<Arc<Self>> {
        let mut points = kernel.distinct_nodes();
        points.extend(grid::generic_probes());
        let ops: Vec<_> = points.iter().map(|&z| kernel.evaluate(z)).collect();
        let null_space = joint_kernel(&ops, RANK_TOL)?;
        let complement = null_space.complement();
        Ok(Arc::new(Self {
            kernel,
            null_space,
            complement,
        }))
    }

    pub fn kernel(&self) -> &Arc<KernelFunction> {
        &self.kernel
    }

    pub fn dim(&self) -> usize {
        self.kernel.dim()
    }

    /// `H = ∩ ker F(z)`.
    pub fn null_space(&self) -> &Subspace {
        &self.null_space
    }

    /// `H^⊥`, on which `L: u ↦ F(.)u` is isometric.
    pub fn complement(&self) -> &Subspace {
        &self.complement
    }

    /// `L(u) = F(.)u`.
    pub fn lift(self: &Arc<Self>, u: &HilbertVector) -> Result<RkhsElement> {
        let reduced = u.sub(&project(u, &self.null_space)?);
        Ok(RkhsElement {
            space: Arc::clone(self),
            coeff: u.clone(),
            reduced,
        })
    }

    pub fn zero(self: &Arc<Self>) -> RkhsElement {
        let z = HilbertVector::zeros(self.dim());
        RkhsElement {
            space: Arc::clone(self),
            coeff: z.clone(),
            reduced: z,
        }
    }
}

/// Convenience wrapper building the space on the fly.
pub fn lift(kernel: &Arc<KernelFunction>, u: &HilbertVector) -> Result<RkhsElement> {
    Rkhs::new(Arc::clone(kernel))?.lift(u)
}

/// `f_u ∈ H_F`, stored through a representative `u` and its reduction
/// onto `H^⊥`.
#[derive(Debug, Clone)]
pub struct RkhsElement {
    space: Arc<Rkhs>,
    coeff: HilbertVector,
    reduced: HilbertVector,
}

impl RkhsElement {
    pub fn space(&self) -> &Arc<Rkhs> {
        &self.space
    }

    pub fn kernel(&self) -> &Arc<KernelFunction> {
        &self.space.kernel
    }

    pub fn coeff(&self) -> &HilbertVector {
        &self.coeff
    }

    pub fn reduced(&self) -> &HilbertVector {
        &self.reduced
    }

    pub fn value(&self, z: C64) -> HilbertVector {
        self.space.kernel.apply(z, &self.coeff)
    }

    /// `f'(z)` by complex step.
    pub fn derivative(&self, z: C64) -> HilbertVector {
        self.space.kernel.apply_deriv(z, &self.coeff)
    }

    pub fn norm(&self) -> f64 {
        self.reduced.norm()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(C64::new(1.0, 0.0), other)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(C64::new(-1.0, 0.0), other)
    }

    /// `self + c·other`
    pub fn combine(&self, c: C64, other: &Self) -> Result<Self> {
        same_space(self, other)?;
        Ok(Self {
            space: Arc::clone(&self.space),
            coeff: self.coeff.axpy(c, &other.coeff),
            reduced: self.reduced.axpy(c, &other.reduced),
        })
    }
}

fn same_space(f: &RkhsElement, g: &RkhsElement) -> Result<()> {
    if Arc::ptr_eq(&f.space, &g.space) || Arc::ptr_eq(&f.space.kernel, &g.space.kernel) {
        Ok(())
    } else {
        Err(Error::KernelMismatch)
    }
}

/// `⟨f_u, f_v⟩_H = ⟨ũ, ṽ⟩`.
pub fn inner_h(f: &RkhsElement, g: &RkhsElement) -> Result<C64> {
    same_space(f, g)?;
    Ok(inner_unchecked(&f.reduced, &g.reduced))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IsometryReport {
    pub is_isometry: bool,
    pub joint_kernel_dim: usize,
    pub adjoint_range_rank: usize,
    /// `dim H = 0` and `rank = d` must agree.
    pub consistent: bool,
}

/// Decides whether `L` is an isometry from two sides: the joint kernel of
/// `F` over `probes`, and completeness of `∪ rng F(z)*`.
pub fn isometry_check(kernel: &KernelFunction, probes: &[C64]) -> Result<IsometryReport> {
    if probes.is_empty() {
        return Err(Error::InvalidInput("isometry_check needs at least one probe".into()));
    }
    let d = kernel.dim();
    let ops: Vec<_> = probes.iter().map(|&z| kernel.evaluate(z)).collect();
    let jk = joint_kernel(&ops, RANK_TOL)?;
    let mut wide = DMatrix::zeros(d, d * ops.len());
    for (k, op) in ops.iter().enumerate() {
        wide.view_mut((0, k * d), (d, d)).copy_from(&op.0.adjoint());
    }
    let rank = hilbert::numerical_rank(&wide, RANK_TOL);
    let is_isometry = jk.is_trivial();
    Ok(IsometryReport {
        is_isometry,
        joint_kernel_dim: jk.dim(),
        adjoint_range_rank: rank,
        consistent: is_isometry == (rank == d),
    })
}

/// `|⟨f, K_γ v⟩_H - ⟨f(γ), v⟩|`.
pub fn reproducing_check(f: &RkhsElement, gamma: C64, v: &HilbertVector) -> Result<f64> {
    let kernel = f.kernel();
    let k_gamma_v = f.space.lift(&kernel.evaluate_adjoint(gamma).apply(v))?;
    let lhs = inner_h(f, &k_gamma_v)?;
    let rhs = hilbert::inner(&f.value(gamma), v)?;
    Ok((lhs - rhs).norm())
}

/// Outcome of a least-squares membership solve.
#[derive(Debug, Clone)]
pub struct Membership {
    pub u: HilbertVector,
    /// `max_j ‖F(z_j)u - g_j‖ / (1 + max_j ‖g_j‖)`.
    pub residual: f64,
    /// Numerical rank of the stacked system.
    pub rank: usize,
}

impl Membership {
    pub fn is_member(&self) -> bool {
        self.residual <= MEMBERSHIP_TOL
    }
}

/// Finds `u` with `F(z_j)u ≈ g_j` on the grid (minimum-norm least squares).
///
/// Each grid block is scaled by `1/‖F(z_j)‖` before solving so far-field
/// points do not swamp the near field; the residual is reported unscaled.
pub fn membership_solve(
    kernel: &KernelFunction,
    values: &[HilbertVector],
    grid: &[C64],
) -> Result<Membership> {
    let d = kernel.dim();
    if values.len() != grid.len() {
        return Err(Error::InvalidInput(format!(
            "{} values for {} grid points",
            values.len(),
            grid.len()
        )));
    }
    if grid.len() < d {
        return Err(Error::InvalidInput(format!(
            "membership needs at least {d} grid points, got {}",
            grid.len()
        )));
    }
    let ops: Vec<_> = grid.iter().map(|&z| kernel.evaluate(z)).collect();
    let mut m = DMatrix::zeros(d * grid.len(), d);
    let mut b = DVector::zeros(d * grid.len());
    for (j, (op, g)) in ops.iter().zip(values).enumerate() {
        if g.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: g.dim(),
            });
        }
        let norm = op.frobenius();
        let s = C64::new(if norm > 0.0 { 1.0 / norm } else { 1.0 }, 0.0);
        m.view_mut((j * d, 0), (d, d)).copy_from(&(&op.0 * s));
        b.rows_mut(j * d, d).copy_from(&(&g.0 * s));
    }
    let (x, rank) = hilbert::lstsq(&m, &b, RANK_TOL);
    let u = HilbertVector(x);
    let residual = grid_residual(&ops, &u, values);
    Ok(Membership { u, residual, rank })
}

/// `max_j ‖F(z_j)u - g_j‖ / (1 + max_j ‖g_j‖)` for pre-evaluated operators.
pub(crate) fn grid_residual(
    ops: &[crate::LinearOperator],
    u: &HilbertVector,
    values: &[HilbertVector],
) -> f64 {
    let gmax = values.iter().map(|g| g.norm()).fold(0.0, f64::max);
    let rmax = ops
        .iter()
        .zip(values)
        .map(|(op, g)| op.apply(u).sub(g).norm())
        .fold(0.0, f64::max);
    rmax / (1.0 + gmax)
}
