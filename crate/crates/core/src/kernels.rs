//! Operator-valued entire functions `F` and their reproducing kernels
//! `K_γ(z) = F(z) F(γ)*`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::cstep::{self, Bicomplex, Scalar};
use crate::entire::ScalarEntire;
use crate::hilbert::{inner_unchecked, HilbertVector, LinearOperator};
use crate::{Error, Result, C64};

const ORTHO_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Zayed,
    Resolvent,
    RankOneQuasi,
    MatrixPoly,
}

/// Eigenvalue `node` of a symmetric operator with its orthonormal
/// eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenspace {
    pub node: C64,
    pub vectors: Vec<HilbertVector>,
}

impl Eigenspace {
    pub fn multiplicity(&self) -> usize {
        self.vectors.len()
    }
}

/// Vector-valued entire function, used for the amplitude `A` of the
/// rank-one quasi family.
#[derive(Debug, Clone, PartialEq)]
pub enum VectorEntire {
    /// `Σ ℓ_n(z) values_n` with `ℓ_n` the Lagrange basis polynomials on
    /// `nodes`.
    Lagrange {
        nodes: Vec<C64>,
        values: Vec<HilbertVector>,
    },
    /// `Σ_k coeffs_k z^k`.
    Polynomial { coeffs: Vec<HilbertVector> },
}

impl VectorEntire {
    pub fn dim(&self) -> usize {
        match self {
            Self::Lagrange { values, .. } => values[0].dim(),
            Self::Polynomial { coeffs } => coeffs[0].dim(),
        }
    }

    pub fn eval(&self, z: C64) -> HilbertVector {
        HilbertVector::from_vec(self.eval_g(z))
    }

    pub fn eval_g<S: Scalar>(&self, z: S) -> Vec<S> {
        let d = self.dim();
        let mut out = vec![S::zero(); d];
        match self {
            Self::Lagrange { nodes, values } => {
                for (n, (&zn, val)) in nodes.iter().zip(values).enumerate() {
                    let l = nodes
                        .iter()
                        .enumerate()
                        .filter(|&(m, _)| m != n)
                        .fold(S::one(), |acc, (_, &zm)| {
                            acc * (z - S::from_c(zm)).scale(1.0 / (zn - zm))
                        });
                    for (o, &x) in out.iter_mut().zip(val.coords()) {
                        *o = *o + l.scale(x);
                    }
                }
            }
            Self::Polynomial { coeffs } => {
                for c in coeffs.iter().rev() {
                    for (o, &x) in out.iter_mut().zip(c.coords()) {
                        *o = *o * z + S::from_c(x);
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
enum Body {
    /// `F(z) = Σ_n Q(z)/(z - z_n) P_n`, with `P_n` the projector onto the
    /// n-th eigenspace. Zayed is the all-rank-one case.
    Spectral {
        q: ScalarEntire,
        spaces: Vec<Eigenspace>,
        /// Index of each space's node inside `q.nodes()`.
        q_index: Vec<usize>,
        projectors: Vec<DMatrix<C64>>,
    },
    /// `F(z)u = Q(z) (Σ_n a_n ⟨u,u_n⟩/(z - z_n)) A(z)`.
    RankOneQuasi {
        q: ScalarEntire,
        q_index: Vec<usize>,
        basis: Vec<HilbertVector>,
        a: Vec<C64>,
        amplitude: VectorEntire,
    },
    /// `F(z) = Σ_k C_k z^k`.
    MatrixPoly { coeffs: Vec<LinearOperator> },
}

/// Operator-valued entire function `z ↦ F(z)` on `C^d`.
#[derive(Debug, Clone)]
pub struct KernelFunction {
    family: Family,
    dim: usize,
    body: Body,
    /// Sampling nodes and directions, paired by index.
    nodes: Vec<C64>,
    basis: Vec<HilbertVector>,
}

impl KernelFunction {
    pub fn family(&self) -> Family {
        self.family
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Sampling nodes `z_n`, paired with [`Self::basis`]. Repeated for
    /// eigenvalues of higher multiplicity.
    pub fn nodes(&self) -> &[C64] {
        &self.nodes
    }

    pub fn basis(&self) -> &[HilbertVector] {
        &self.basis
    }

    /// Distinct nodes: the zeros of `Q` in node order.
    pub fn distinct_nodes(&self) -> Vec<C64> {
        match &self.body {
            Body::Spectral { spaces, .. } => spaces.iter().map(|s| s.node).collect(),
            _ => {
                let mut out: Vec<C64> = Vec::new();
                for &z in &self.nodes {
                    if !out.contains(&z) {
                        out.push(z);
                    }
                }
                out
            }
        }
    }

    pub fn q(&self) -> Option<&ScalarEntire> {
        match &self.body {
            Body::Spectral { q, .. } | Body::RankOneQuasi { q, .. } => Some(q),
            Body::MatrixPoly { .. } => None,
        }
    }

    pub fn spectrum(&self) -> Option<&[Eigenspace]> {
        match &self.body {
            Body::Spectral { spaces, .. } => Some(spaces),
            _ => None,
        }
    }

    /// `(a_n, A)` of the rank-one quasi family.
    pub fn rank_one_parts(&self) -> Option<(&[C64], &VectorEntire)> {
        match &self.body {
            Body::RankOneQuasi { a, amplitude, .. } => Some((a, amplitude)),
            _ => None,
        }
    }

    /// Dense matrix of `F(z)`.
    pub fn evaluate(&self, z: C64) -> LinearOperator {
        let m = self.matrix_g(z);
        LinearOperator(DMatrix::from_vec(self.dim, self.dim, m))
    }

    pub fn evaluate_adjoint(&self, z: C64) -> LinearOperator {
        self.evaluate(z).adjoint()
    }

    /// `F'(z)` by complex step.
    pub fn evaluate_deriv(&self, z: C64) -> LinearOperator {
        let m = cstep::derivative_vec(|w: Bicomplex| self.matrix_g(w), z);
        LinearOperator(DMatrix::from_vec(self.dim, self.dim, m))
    }

    /// `F(z)u`.
    pub fn apply(&self, z: C64, u: &HilbertVector) -> HilbertVector {
        self.evaluate(z).apply(u)
    }

    /// `d/dz F(z)u` by complex step.
    pub fn apply_deriv(&self, z: C64, u: &HilbertVector) -> HilbertVector {
        self.evaluate_deriv(z).apply(u)
    }

    /// Sampling function `F_n(z) = F(z)u_n`.
    pub fn sampling_function(&self, n: usize, z: C64) -> HilbertVector {
        self.apply(z, &self.basis[n])
    }

    /// Column-major entries of `F(z)` over any [`Scalar`].
    pub fn matrix_g<S: Scalar>(&self, z: S) -> Vec<S> {
        let d = self.dim;
        let mut out = vec![S::zero(); d * d];
        match &self.body {
            Body::Spectral {
                q,
                spaces,
                q_index,
                projectors,
            } => {
                let zp = z.primal();
                let near = spaces
                    .iter()
                    .zip(q_index)
                    .any(|(s, &qi)| (zp - s.node).norm() <= q.pole_radius(qi));
                let weights: Vec<S> = if near || self.family == Family::Zayed {
                    q_index.iter().map(|&qi| q.reg_quotient_g(z, qi)).collect()
                } else {
                    // Q(z) R_z with R_z = Σ P_n / (z - z_n)
                    let qz = q.eval_g(z);
                    spaces
                        .iter()
                        .map(|s| qz / (z - S::from_c(s.node)))
                        .collect()
                };
                for (w, p) in weights.iter().zip(projectors) {
                    for (o, &x) in out.iter_mut().zip(p.iter()) {
                        if x != C64::new(0.0, 0.0) {
                            *o = *o + w.scale(x);
                        }
                    }
                }
            }
            Body::RankOneQuasi {
                q,
                q_index,
                basis,
                a,
                amplitude,
            } => {
                let amp = amplitude.eval_g(z);
                // Row functional: w_c(z) = Σ_n a_n Q(z)/(z - z_n) conj(u_n[c])
                let mut row = vec![S::zero(); d];
                for ((u, &an), &qi) in basis.iter().zip(a).zip(q_index) {
                    let t = q.reg_quotient_g(z, qi).scale(an);
                    for (r, x) in row.iter_mut().zip(u.coords()) {
                        *r = *r + t.scale(x.conj());
                    }
                }
                for c in 0..d {
                    for r in 0..d {
                        out[c * d + r] = amp[r] * row[c];
                    }
                }
            }
            Body::MatrixPoly { coeffs } => {
                for ck in coeffs.iter().rev() {
                    for (o, &x) in out.iter_mut().zip(ck.0.iter()) {
                        *o = *o * z + S::from_c(x);
                    }
                }
            }
        }
        out
    }

    /// Entrywise Cauchy–Riemann residual at `z`, relative to `‖F(z)‖`.
    ///
    /// Central differences along `x` and `y` with step `h` are compared
    /// with `F'(z)` and `iF'(z)` from the complex step.
    pub fn cauchy_riemann_residual(&self, z: C64, h: f64) -> f64 {
        let d = self.evaluate_deriv(z).0;
        let dx = (self.evaluate(z + h).0 - self.evaluate(z - h).0) / C64::new(2.0 * h, 0.0);
        let ih = C64::new(0.0, h);
        let dy = (self.evaluate(z + ih).0 - self.evaluate(z - ih).0) / C64::new(2.0 * h, 0.0);
        let scale = d.norm().max(self.evaluate(z).0.norm()).max(f64::MIN_POSITIVE);
        let rx = (&dx - &d).norm();
        let ry = (&dy - &d * C64::i()).norm();
        rx.max(ry) / scale
    }
}

/// `F(z)u = Σ_n Q(z)/(z - z_n) ⟨u,u_n⟩ u_n`, with `Q'(z_n)` at the nodes.
pub fn build_zayed(
    q: ScalarEntire,
    nodes: Vec<C64>,
    basis: Vec<HilbertVector>,
) -> Result<KernelFunction> {
    let d = check_basis(&basis)?;
    if nodes.len() != d {
        return Err(Error::InvalidInput(format!(
            "{} nodes for a basis of {d} vectors",
            nodes.len()
        )));
    }
    let q_index = match_zeros(&q, &nodes)?;
    let spaces: Vec<Eigenspace> = nodes
        .iter()
        .zip(&basis)
        .map(|(&node, u)| Eigenspace {
            node,
            vectors: vec![u.clone()],
        })
        .collect();
    let projectors = spaces.iter().map(projector).collect();
    Ok(KernelFunction {
        family: Family::Zayed,
        dim: d,
        body: Body::Spectral {
            q,
            spaces,
            q_index,
            projectors,
        },
        nodes,
        basis,
    })
}

/// `F(z) = Q(z) R_z` for the symmetric operator with the given real
/// spectrum, `R_z = (zI - T)^{-1}`.
pub fn build_resolvent(q: ScalarEntire, spectrum: Vec<Eigenspace>) -> Result<KernelFunction> {
    if spectrum.iter().any(|s| s.vectors.is_empty()) {
        return Err(Error::InvalidInput("eigenspace with no vectors".into()));
    }
    let all: Vec<HilbertVector> = spectrum.iter().flat_map(|s| s.vectors.clone()).collect();
    let d = check_basis(&all)?;
    if let Some(s) = spectrum.iter().find(|s| s.node.im != 0.0) {
        return Err(Error::InvalidInput(format!(
            "resolvent node {} is not real",
            s.node
        )));
    }
    let distinct: Vec<C64> = spectrum.iter().map(|s| s.node).collect();
    let q_index = match_zeros(&q, &distinct)?;
    let projectors = spectrum.iter().map(projector).collect();
    let nodes = spectrum
        .iter()
        .flat_map(|s| std::iter::repeat_n(s.node, s.multiplicity()))
        .collect();
    Ok(KernelFunction {
        family: Family::Resolvent,
        dim: d,
        body: Body::Spectral {
            q,
            spaces: spectrum,
            q_index,
            projectors,
        },
        nodes,
        basis: all,
    })
}

/// Rank-one quasi family with prescribed sampling constants `c_n`.
///
/// `A` is the vector of Lagrange basis polynomials on the nodes written in
/// `basis`, so `A(z_n) = u_n` and `A` never vanishes. Then
/// `a_n = c_n / Q'(z_n)`.
pub fn build_rank_one_quasi(
    q: ScalarEntire,
    nodes: Vec<C64>,
    basis: Vec<HilbertVector>,
    c: Vec<C64>,
) -> Result<KernelFunction> {
    let d = check_basis(&basis)?;
    if nodes.len() != d || c.len() != d {
        return Err(Error::InvalidInput(format!(
            "{} nodes and {} constants for a basis of {d} vectors",
            nodes.len(),
            c.len()
        )));
    }
    if let Some(n) = c.iter().position(|x| x.norm() == 0.0) {
        return Err(Error::InvalidInput(format!("c_{n} is zero")));
    }
    let q_index = match_zeros(&q, &nodes)?;
    let a = c
        .iter()
        .zip(&q_index)
        .map(|(&cn, &qi)| cn / q.node_deriv(qi))
        .collect();
    let amplitude = VectorEntire::Lagrange {
        nodes: nodes.clone(),
        values: basis.clone(),
    };
    Ok(KernelFunction {
        family: Family::RankOneQuasi,
        dim: d,
        body: Body::RankOneQuasi {
            q,
            q_index,
            basis: basis.clone(),
            a,
            amplitude,
        },
        nodes,
        basis,
    })
}

/// `F(z) = Σ_k coeffs_k z^k`; `sampling` optionally declares nodes and
/// directions for certification.
pub fn build_matrix_poly(
    coeffs: Vec<LinearOperator>,
    sampling: Option<(Vec<C64>, Vec<HilbertVector>)>,
) -> Result<KernelFunction> {
    let d = coeffs
        .first()
        .map(|c| c.dim())
        .ok_or_else(|| Error::InvalidInput("matrix polynomial with no coefficients".into()))?;
    if let Some(bad) = coeffs.iter().find(|c| c.dim() != d || c.0.nrows() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: bad.dim(),
        });
    }
    let (nodes, basis) = match sampling {
        Some((nodes, basis)) => {
            let bd = check_basis(&basis)?;
            if bd != d || nodes.len() != basis.len() {
                return Err(Error::InvalidInput(
                    "sampling nodes/basis do not match the coefficient size".into(),
                ));
            }
            (nodes, basis)
        }
        None => (Vec::new(), Vec::new()),
    };
    Ok(KernelFunction {
        family: Family::MatrixPoly,
        dim: d,
        body: Body::MatrixPoly { coeffs },
        nodes,
        basis,
    })
}

/// `K_γ(z) = F(z) F(γ)*`.
pub fn reproducing_kernel(f: &KernelFunction, gamma: C64, z: C64) -> LinearOperator {
    f.evaluate(z).compose(&f.evaluate_adjoint(gamma))
}

/// Standard basis of `C^d`.
pub fn standard_basis(d: usize) -> Vec<HilbertVector> {
    (0..d).map(|i| HilbertVector::basis(d, i)).collect()
}

fn projector(space: &Eigenspace) -> DMatrix<C64> {
    let d = space.vectors[0].dim();
    let mut p = DMatrix::zeros(d, d);
    for v in &space.vectors {
        p += &v.0 * v.0.adjoint();
    }
    p
}

/// Checks the family is orthonormal and complete; returns `d`.
fn check_basis(basis: &[HilbertVector]) -> Result<usize> {
    let d = basis
        .first()
        .map(|b| b.dim())
        .ok_or_else(|| Error::InvalidInput("empty basis".into()))?;
    if let Some(bad) = basis.iter().find(|b| b.dim() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: bad.dim(),
        });
    }
    if basis.len() != d {
        return Err(Error::InvalidInput(format!(
            "{} basis vectors in dimension {d}",
            basis.len()
        )));
    }
    for (i, u) in basis.iter().enumerate() {
        for (j, v) in basis.iter().enumerate().take(i + 1) {
            let expected = if i == j { 1.0 } else { 0.0 };
            if (inner_unchecked(u, v) - expected).norm() > ORTHO_TOL {
                return Err(Error::InvalidInput(format!(
                    "basis vectors {j} and {i} are not orthonormal"
                )));
            }
        }
    }
    Ok(d)
}

/// Maps each kernel node to its index among the zeros carried by `q`.
fn match_zeros(q: &ScalarEntire, nodes: &[C64]) -> Result<Vec<usize>> {
    if nodes.len() != q.nodes().len() {
        return Err(Error::InvalidInput(format!(
            "Q zero-set mismatch: Q carries {} nodes, kernel has {}",
            q.nodes().len(),
            nodes.len()
        )));
    }
    nodes
        .iter()
        .map(|z| {
            q.nodes()
                .iter()
                .position(|w| (w - z).norm() <= 1e-12 * (1.0 + z.norm()))
                .ok_or_else(|| {
                    Error::InvalidInput(format!("Q zero-set mismatch: node {z} is not a zero of Q"))
                })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid;
    use rand::Rng;

    fn r(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn reals(v: &[f64]) -> Vec<C64> {
        v.iter().map(|&x| r(x)).collect()
    }

    fn poly(nodes: &[f64]) -> ScalarEntire {
        ScalarEntire::poly_from_roots(reals(nodes)).unwrap()
    }

    fn max_abs(m: &LinearOperator) -> f64 {
        m.0.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn zayed_single_node() {
        let f = build_zayed(poly(&[0.0]), reals(&[0.0]), standard_basis(1)).unwrap();
        for z in [r(0.0), r(5.0), C64::new(-2.0, 3.0)] {
            assert!((f.evaluate(z).0[(0, 0)] - r(1.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn zayed_two_nodes_at_origin() {
        let f = build_zayed(poly(&[1.0, 2.0]), reals(&[1.0, 2.0]), standard_basis(2)).unwrap();
        let expected = LinearOperator::from_diagonal(&reals(&[-2.0, -1.0]));
        assert!(max_abs(&LinearOperator(f.evaluate(r(0.0)).0 - expected.0)) < 1e-15);
        // F(z_m) u_n = 0 for n ≠ m
        assert!(f.sampling_function(1, r(1.0)).norm() < 1e-15);
        assert!(f.sampling_function(0, r(2.0)).norm() < 1e-15);
    }

    #[test]
    fn zayed_rejects_mismatches() {
        assert!(build_zayed(poly(&[1.0, 2.0]), reals(&[1.0]), standard_basis(2)).is_err());
        assert!(build_zayed(poly(&[1.0, 3.0]), reals(&[1.0, 2.0]), standard_basis(2)).is_err());
        let skew = vec![
            HilbertVector::from_vec(reals(&[1.0, 0.0])),
            HilbertVector::from_vec(reals(&[1.0, 1.0])),
        ];
        assert!(build_zayed(poly(&[1.0, 2.0]), reals(&[1.0, 2.0]), skew).is_err());
    }

    #[test]
    fn resolvent_examples() {
        let f = build_resolvent(
            poly(&[1.0, 2.0]),
            vec![
                Eigenspace {
                    node: r(1.0),
                    vectors: vec![HilbertVector::basis(2, 0)],
                },
                Eigenspace {
                    node: r(2.0),
                    vectors: vec![HilbertVector::basis(2, 1)],
                },
            ],
        )
        .unwrap();
        let expected = LinearOperator::from_diagonal(&reals(&[-2.0, -1.0]));
        assert!(max_abs(&LinearOperator(f.evaluate(r(0.0)).0 - expected.0)) < 1e-15);

        // multiplicity two at z = 1
        let q = poly(&[1.0, 2.0]);
        let qp = q.deriv(r(1.0));
        let f = build_resolvent(
            q,
            vec![
                Eigenspace {
                    node: r(1.0),
                    vectors: vec![HilbertVector::basis(3, 0), HilbertVector::basis(3, 1)],
                },
                Eigenspace {
                    node: r(2.0),
                    vectors: vec![HilbertVector::basis(3, 2)],
                },
            ],
        )
        .unwrap();
        let at1 = f.evaluate(r(1.0));
        let expected = LinearOperator::from_diagonal(&[qp, qp, r(0.0)]);
        assert!(max_abs(&LinearOperator(&at1.0 - expected.0)) < 1e-15);
        assert_eq!(at1.rank(1e-10), 2);
        assert_eq!(f.nodes().len(), 3);
        assert_eq!(f.distinct_nodes().len(), 2);
    }

    #[test]
    fn resolvent_rejects_complex_nodes() {
        let q = ScalarEntire::poly_from_roots(vec![C64::new(1.0, 1.0)]).unwrap();
        let err = build_resolvent(
            q,
            vec![Eigenspace {
                node: C64::new(1.0, 1.0),
                vectors: vec![HilbertVector::basis(1, 0)],
            }],
        );
        assert!(err.is_err());
    }

    #[test]
    fn rank_one_quasi_worked_example() {
        let q = poly(&[1.0, 2.0]);
        let f = build_rank_one_quasi(q, reals(&[1.0, 2.0]), standard_basis(2), reals(&[-1.0, 1.0]))
            .unwrap();
        let (a, amp) = f.rank_one_parts().unwrap();
        assert_eq!(a, &reals(&[1.0, 1.0])[..]);
        assert_eq!(amp.eval(r(3.0)), HilbertVector::from_vec(reals(&[-1.0, 2.0])));
        let u = HilbertVector::from_vec(vec![C64::new(0.3, -0.2), C64::new(1.1, 0.4)]);
        let coeff = r(2.0) * (u.0[0] / 2.0 + u.0[1] / 1.0);
        let expected = HilbertVector::from_vec(vec![-coeff, coeff * 2.0]);
        assert!(f.apply(r(3.0), &u).sub(&expected).norm() < 1e-14);
        // F(z_1) e_1 = c_1 e_1, F(z_1) e_2 = 0
        let e1 = HilbertVector::basis(2, 0);
        let e2 = HilbertVector::basis(2, 1);
        assert!(f.apply(r(1.0), &e1).sub(&e1.scale(r(-1.0))).norm() < 1e-15);
        assert!(f.apply(r(1.0), &e2).norm() < 1e-15);
    }

    #[test]
    fn rank_one_quasi_rejects_zero_constant() {
        let err = build_rank_one_quasi(
            poly(&[1.0, 2.0]),
            reals(&[1.0, 2.0]),
            standard_basis(2),
            reals(&[0.0, 1.0]),
        );
        assert!(err.is_err());
    }

    #[test]
    fn adjoint_and_kernel_examples() {
        let f = build_zayed(poly(&[0.0]), reals(&[0.0]), standard_basis(1)).unwrap();
        let k = reproducing_kernel(&f, r(5.0), r(5.0));
        assert!((k.0[(0, 0)] - r(1.0)).norm() < 1e-15);

        let q = ScalarEntire::sin_pi(reals(&[-1.0, 0.0, 1.0, 2.0])).unwrap();
        let f = build_zayed(q.clone(), reals(&[-1.0, 0.0, 1.0, 2.0]), standard_basis(4)).unwrap();
        for (n, &zn) in f.nodes().iter().enumerate() {
            let cn = q.deriv(zn);
            let un = &f.basis()[n];
            let lhs = f.evaluate_adjoint(zn).apply(un);
            assert!(lhs.sub(&un.scale(cn.conj())).norm() < 1e-14);
            // K_{z_n}(z) u_n = conj(c_n) F_n(z)
            let z = C64::new(0.3, 0.7);
            let kz = reproducing_kernel(&f, zn, z).apply(un);
            assert!(kz.sub(&f.sampling_function(n, z).scale(cn.conj())).norm() < 1e-13);
        }
        let z = C64::new(0.4, -0.2);
        assert_eq!(f.evaluate(z).adjoint(), f.evaluate_adjoint(z));
    }

    fn families(d: usize) -> Vec<KernelFunction> {
        let nodes: Vec<f64> = (0..d).map(|k| k as f64 - (d / 2) as f64).collect();
        let sin = ScalarEntire::sin_pi(reals(&nodes)).unwrap();
        let shifted: Vec<f64> = (1..=d).map(|k| k as f64).collect();
        let p = poly(&shifted);
        let c: Vec<C64> = (0..d).map(|k| C64::new(1.0 + k as f64, 0.5)).collect();
        vec![
            build_zayed(sin, reals(&nodes), standard_basis(d)).unwrap(),
            build_rank_one_quasi(p.clone(), reals(&shifted), standard_basis(d), c).unwrap(),
            build_resolvent(
                p,
                shifted
                    .iter()
                    .enumerate()
                    .map(|(i, &z)| Eigenspace {
                        node: r(z),
                        vectors: vec![HilbertVector::basis(d, i)],
                    })
                    .collect(),
            )
            .unwrap(),
        ]
    }

    #[test]
    fn sampling_condition_certificate() {
        let mut rng = crate::seeded_rng(5);
        for f in families(6) {
            let cs: Vec<C64> = (0..6)
                .map(|n| inner_unchecked(&f.sampling_function(n, f.nodes()[n]), &f.basis()[n]))
                .collect();
            let cmax = cs.iter().map(|c| c.norm()).fold(0.0, f64::max);
            for _ in 0..50 {
                let u = HilbertVector::random(6, &mut rng);
                for n in 0..6 {
                    let un = &f.basis()[n];
                    let expected = un.scale(cs[n] * inner_unchecked(&u, un));
                    let res = f.apply(f.nodes()[n], &u).sub(&expected).norm();
                    assert!(res <= 1e-10 * u.norm() * cmax, "{:?}", f.family());
                }
            }
        }
    }

    #[test]
    fn hermitian_kernel() {
        let mut rng = crate::seeded_rng(6);
        for f in families(5) {
            for _ in 0..20 {
                let g = C64::new(rng.random_range(-3.0..3.0), rng.random_range(-2.0..2.0));
                let z = C64::new(rng.random_range(-3.0..3.0), rng.random_range(-2.0..2.0));
                let kgz = reproducing_kernel(&f, g, z);
                let kzg = reproducing_kernel(&f, z, g);
                let diff = (kgz.adjoint().0 - &kzg.0).norm();
                assert!(diff <= 1e-12 * kgz.frobenius().max(f64::MIN_POSITIVE));
            }
        }
    }

    #[test]
    fn analyticity_proxy() {
        let mut rng = crate::seeded_rng(7);
        for f in families(4) {
            for _ in 0..20 {
                let z = C64::new(rng.random_range(-4.0..4.0), rng.random_range(-2.0..2.0));
                let res = f.cauchy_riemann_residual(z, 1e-5);
                assert!(res <= 1e-8, "{:?} at {z}: {res}", f.family());
            }
        }
    }

    #[test]
    fn zayed_matches_resolvent_off_nodes() {
        let d = 6;
        let nodes: Vec<f64> = (1..=d).map(|k| k as f64).collect();
        let q = poly(&nodes);
        let z = build_zayed(q.clone(), reals(&nodes), standard_basis(d)).unwrap();
        let spectrum = (0..d)
            .map(|i| Eigenspace {
                node: r(nodes[i]),
                vectors: vec![HilbertVector::basis(d, i)],
            })
            .collect();
        let res = build_resolvent(q, spectrum).unwrap();
        for p in grid::test_grid(z.nodes()) {
            let a = z.evaluate(p);
            let b = res.evaluate(p);
            let scale = a.0.iter().map(|x| x.norm()).fold(0.0, f64::max);
            let diff = (a.0 - b.0).iter().map(|x| x.norm()).fold(0.0, f64::max);
            assert!(diff <= 1e-12 * scale, "at {p}: {diff} vs {scale}");
        }
    }

    #[test]
    fn amplitude_never_vanishes_and_aligns_at_nodes() {
        let f = &families(5)[1];
        let (_, amp) = f.rank_one_parts().unwrap();
        for p in grid::test_grid(f.nodes()) {
            assert!(amp.eval(p).norm() > 0.0);
        }
        for (n, &zn) in f.nodes().iter().enumerate() {
            assert!(amp.eval(zn).sub(&f.basis()[n]).norm() < 1e-14);
        }
    }

    #[test]
    fn matrix_poly_evaluates_by_horner() {
        let c0 = LinearOperator::from_diagonal(&reals(&[1.0, 0.0]));
        let c1 = LinearOperator::from_diagonal(&reals(&[0.0, 2.0]));
        let f = build_matrix_poly(vec![c0, c1], None).unwrap();
        let m = f.evaluate(r(3.0));
        assert_eq!(m, LinearOperator::from_diagonal(&reals(&[1.0, 6.0])));
        let dm = f.evaluate_deriv(r(3.0));
        assert!(max_abs(&LinearOperator(dm.0 - LinearOperator::from_diagonal(&reals(&[0.0, 2.0])).0)) < 1e-15);
    }

    #[test]
    fn polynomial_vector_entire() {
        let a = VectorEntire::Polynomial {
            coeffs: vec![
                HilbertVector::from_vec(reals(&[1.0, 0.0])),
                HilbertVector::from_vec(reals(&[0.0, 1.0])),
            ],
        };
        assert_eq!(a.eval(r(2.0)), HilbertVector::from_vec(reals(&[1.0, 2.0])));
    }
}
