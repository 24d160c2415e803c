//! de Branges kernels `(E_+(z)E_+(γ)* - E_-(z)E_-(γ)*) / ρ_γ(z)` and the
//! condition battery characterizing `H` as a de Branges space.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::cstep::{self, Bicomplex, Scalar};
use crate::hilbert::{inner_unchecked, HilbertVector, LinearOperator};
use crate::sampling::SamplingSystem;
use crate::shift::{self, InvarianceRow};
use crate::{Error, Result, C64};

/// Condition number above which the battery abstains.
pub const ABSTAIN_COND: f64 = 1e12;
/// Relative tolerance for self-adjointness and positivity.
pub const PSD_TOL: f64 = 1e-10;

/// Operator-valued entire function with a closed form.
#[derive(Debug, Clone, PartialEq)]
pub enum OperatorEntire {
    /// `Σ_k C_k z^k`.
    MatrixPoly(Vec<LinearOperator>),
    /// `scale · e^{rate z} · I`.
    ScalarExp { dim: usize, scale: C64, rate: C64 },
}

impl OperatorEntire {
    pub fn dim(&self) -> usize {
        match self {
            Self::MatrixPoly(c) => c.first().map_or(0, |m| m.dim()),
            Self::ScalarExp { dim, .. } => *dim,
        }
    }

    pub fn constant(op: LinearOperator) -> Self {
        Self::MatrixPoly(vec![op])
    }

    /// Column-major entries over any [`Scalar`].
    pub fn eval_g<S: Scalar>(&self, z: S) -> Vec<S> {
        let d = self.dim();
        let mut out = vec![S::zero(); d * d];
        match self {
            Self::MatrixPoly(coeffs) => {
                for ck in coeffs.iter().rev() {
                    for (o, &x) in out.iter_mut().zip(ck.0.iter()) {
                        *o = *o * z + S::from_c(x);
                    }
                }
            }
            Self::ScalarExp { scale, rate, .. } => {
                let v = z.scale(*rate).exp().scale(*scale);
                for i in 0..d {
                    out[i * d + i] = v;
                }
            }
        }
        out
    }

    pub fn eval(&self, z: C64) -> LinearOperator {
        let d = self.dim();
        LinearOperator(DMatrix::from_vec(d, d, self.eval_g(z)))
    }

    /// Derivative by complex step.
    pub fn deriv(&self, z: C64) -> LinearOperator {
        let d = self.dim();
        let m = cstep::derivative_vec(|w: Bicomplex| self.eval_g(w), z);
        LinearOperator(DMatrix::from_vec(d, d, m))
    }
}

/// `ρ_γ(z) = -2πi (z - γ̄)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoFactor {
    pub gamma: C64,
}

impl RhoFactor {
    pub fn value(&self, z: C64) -> C64 {
        C64::new(0.0, -2.0 * PI) * (z - self.gamma.conj())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeBrangesOperator {
    pub e_plus: OperatorEntire,
    pub e_minus: OperatorEntire,
    pub beta_star: Option<C64>,
}

impl DeBrangesOperator {
    /// Validates dimensions, invertibility of both functions at one of
    /// `probes`, and self-adjointness of `E_+(β)`, `E_-(β̄)` when `beta_star`
    /// is given.
    pub fn new(
        e_plus: OperatorEntire,
        e_minus: OperatorEntire,
        beta_star: Option<C64>,
        probes: &[C64],
    ) -> Result<Self> {
        let op = Self::unchecked(e_plus, e_minus, beta_star)?;
        let invertible = |m: &LinearOperator| m.condition_number() < ABSTAIN_COND;
        if !probes
            .iter()
            .any(|&z| invertible(&op.e_plus.eval(z)) && invertible(&op.e_minus.eval(z)))
        {
            return Err(Error::PreconditionViolation(
                "E_+ and E_- are not both invertible at any probe point".into(),
            ));
        }
        if let Some(beta) = beta_star {
            if beta.im <= 0.0 {
                return Err(Error::PreconditionViolation(format!(
                    "β = {beta} is not in the upper half-plane"
                )));
            }
            for (name, m) in [("E_+(β)", op.e_plus.eval(beta)), ("E_-(β̄)", op.e_minus.eval(beta.conj()))] {
                let defect = (&m.0 - m.0.adjoint()).norm();
                if defect > PSD_TOL * m.0.norm().max(1.0) {
                    return Err(Error::PreconditionViolation(format!(
                        "{name} is not self-adjoint (defect {defect:.3e})"
                    )));
                }
            }
        }
        Ok(op)
    }

    /// Only checks that both functions act on the same space. Used for
    /// controls that deliberately break the invariants.
    pub fn unchecked(e_plus: OperatorEntire, e_minus: OperatorEntire, beta_star: Option<C64>) -> Result<Self> {
        if e_plus.dim() != e_minus.dim() || e_plus.dim() == 0 {
            return Err(Error::DimensionMismatch {
                expected: e_plus.dim(),
                found: e_minus.dim(),
            });
        }
        Ok(Self {
            e_plus,
            e_minus,
            beta_star,
        })
    }

    /// `E_+(z) = e^{-iπz}`, `E_-(z) = e^{iπz}`: the Paley–Wiener pair.
    pub fn sinc_pair() -> Self {
        let exp = |rate: f64| OperatorEntire::ScalarExp {
            dim: 1,
            scale: C64::new(1.0, 0.0),
            rate: C64::new(0.0, rate * PI),
        };
        Self {
            e_plus: exp(-1.0),
            e_minus: exp(1.0),
            beta_star: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.e_plus.dim()
    }
}

/// `K_γ(z)`; within `1e-6(1 + |γ̄|)` of `γ̄` the numerator derivative at
/// the midpoint `(z + γ̄)/2` is used, which is the derivative form at
/// `z = γ̄` exactly.
pub fn db_kernel(op: &DeBrangesOperator, gamma: C64, z: C64) -> LinearOperator {
    let gb = gamma.conj();
    let p_star = op.e_plus.eval(gamma).adjoint();
    let m_star = op.e_minus.eval(gamma).adjoint();
    let delta = z - gb;
    if delta.norm() <= 1e-6 * (1.0 + gb.norm()) {
        let w = gb + delta * 0.5;
        let num = &op.e_plus.deriv(w).0 * &p_star.0 - &op.e_minus.deriv(w).0 * &m_star.0;
        LinearOperator(num / C64::new(0.0, -2.0 * PI))
    } else {
        let num = &op.e_plus.eval(z).0 * &p_star.0 - &op.e_minus.eval(z).0 * &m_star.0;
        LinearOperator(num / RhoFactor { gamma }.value(z))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PositivityReport {
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    /// `min ≥ -1e-10 · max(λ_max, 0)`.
    pub positive: bool,
}

/// Smallest eigenvalue of the block Gram matrix
/// `G[(i,a),(j,b)] = ⟨K_{γ_j}(γ_i) v_b, v_a⟩`.
pub fn positivity_check(
    op: &DeBrangesOperator,
    points: &[C64],
    directions: &[HilbertVector],
) -> Result<PositivityReport> {
    if points.len() < 2 {
        return Err(Error::InvalidInput("positivity_check needs at least two points".into()));
    }
    if let Some(v) = directions.iter().find(|v| v.dim() != op.dim()) {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            found: v.dim(),
        });
    }
    let k = directions.len();
    let n = points.len() * k;
    let mut g = DMatrix::zeros(n, n);
    for (i, &gi) in points.iter().enumerate() {
        for (j, &gj) in points.iter().enumerate() {
            let kern = db_kernel(op, gj, gi);
            for (a, va) in directions.iter().enumerate() {
                for (b, vb) in directions.iter().enumerate() {
                    g[(i * k + a, j * k + b)] = inner_unchecked(&kern.apply(vb), va);
                }
            }
        }
    }
    let herm = (&g + g.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(herm).eigenvalues;
    let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(PositivityReport {
        min_eigenvalue: min,
        max_eigenvalue: max,
        positive: min >= -PSD_TOL * max.max(0.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    Inconsistent,
    Abstain,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Condition {
    pub name: &'static str,
    pub passed: bool,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatteryReport {
    pub beta: C64,
    pub cond_f_beta: f64,
    pub cond_f_beta_bar: f64,
    pub invariance: Vec<InvarianceRow>,
    pub conditions: Vec<Condition>,
    pub verdict: Verdict,
}

pub const COND_INVARIANCE: &str = "invariance";
pub const COND_ISOMETRY: &str = "isometry";
pub const COND_KERNEL_INVERTIBLE: &str = "kernel_invertible";

/// Runs (i) backward-shift invariance at `β`, `β̄` and `probes`, (ii) the
/// norm identity of `(𝔗 - β̄)R_β` on `H_β`, (iii) invertibility of
/// `K_β(β)` and `K_β̄(β̄)`.
///
/// The verdict abstains when `F(β)` or `F(β̄)` has condition number above
/// `1e12`; otherwise it is consistent iff every condition passes.
pub fn space_equality_battery(system: &SamplingSystem, beta: C64, probes: &[C64]) -> Result<BatteryReport> {
    let kernel = system.kernel();
    let cond = |z: C64| kernel.evaluate(z).condition_number();
    let cond_f_beta = cond(beta);
    let cond_f_beta_bar = cond(beta.conj());

    let mut points = vec![beta, beta.conj()];
    points.extend_from_slice(probes);
    let invariance = shift::invariance_check(system, &points)?;
    let worst = invariance.iter().map(|r| r.max_residual).fold(0.0, f64::max);
    let iso = shift::debranges_isometry_check(system, beta)?;
    let k_cond = |z: C64| {
        let f = kernel.evaluate(z);
        f.compose(&f.adjoint()).condition_number()
    };
    let k_worst = k_cond(beta).max(k_cond(beta.conj()));

    let conditions = vec![
        Condition {
            name: COND_INVARIANCE,
            passed: invariance.iter().all(|r| r.all_shifts_in_space),
            value: worst,
        },
        Condition {
            name: COND_ISOMETRY,
            passed: iso.isometric,
            value: iso.max_norm_defect,
        },
        Condition {
            name: COND_KERNEL_INVERTIBLE,
            passed: k_worst.is_finite() && k_worst <= ABSTAIN_COND,
            value: k_worst,
        },
    ];
    let verdict = if !(cond_f_beta <= ABSTAIN_COND && cond_f_beta_bar <= ABSTAIN_COND) {
        Verdict::Abstain
    } else if conditions.iter().all(|c| c.passed) {
        Verdict::Consistent
    } else {
        Verdict::Inconsistent
    };
    Ok(BatteryReport {
        beta,
        cond_f_beta,
        cond_f_beta_bar,
        invariance,
        conditions,
        verdict,
    })
}
