//! Sampling systems and the reconstruction series built on them: Kramer,
//! its kernel form, quasi Lagrange-type and the resolvent Lagrange series.

use std::sync::Arc;
use std::time::Instant;

use rand::Rng;

use crate::entire::ScalarEntire;
use crate::grid;
use crate::hilbert::{inner_unchecked, HilbertVector};
use crate::kernels::{Family, KernelFunction};
use crate::rkhs::{inner_h, Rkhs, RkhsElement};
use crate::shift;
use crate::{Error, Result, C64};

/// Relative tolerance of the three sampling identities.
pub const CERTIFY_TOL: f64 = 1e-10;
/// Random vectors used by [`certify`].
pub const CERTIFY_TRIALS: usize = 50;
const CERTIFY_SEED: u64 = 0x5eed_0001;

pub const ID_SAMPLING: &str = "F(z_n)u = c_n<u,u_n>u_n";
pub const ID_ADJOINT: &str = "F(z_n)*u_n = conj(c_n)u_n";
pub const ID_INTERPOLATION: &str = "F_n(z_m) = c_n delta_nm u_n";
pub const ID_NONZERO: &str = "c_n != 0";

/// Worst relative residual of each identity at one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeResiduals {
    pub sampling: f64,
    pub adjoint: f64,
    pub interpolation: f64,
}

/// A kernel function whose nodes and directions satisfy
/// `F(z_n)u = c_n ⟨u,u_n⟩ u_n`.
#[derive(Debug, Clone)]
pub struct SamplingSystem {
    space: Arc<Rkhs>,
    c: Vec<C64>,
    residuals: Vec<NodeResiduals>,
    grid: Vec<C64>,
}

impl SamplingSystem {
    pub fn space(&self) -> &Arc<Rkhs> {
        &self.space
    }

    pub fn kernel(&self) -> &Arc<KernelFunction> {
        self.space.kernel()
    }

    pub fn dim(&self) -> usize {
        self.kernel().dim()
    }

    pub fn nodes(&self) -> &[C64] {
        self.kernel().nodes()
    }

    pub fn basis(&self) -> &[HilbertVector] {
        self.kernel().basis()
    }

    pub fn c(&self) -> &[C64] {
        &self.c
    }

    /// Always true: construction goes through [`certify`].
    pub fn certified(&self) -> bool {
        true
    }

    pub fn residuals(&self) -> &[NodeResiduals] {
        &self.residuals
    }

    /// Test grid used by sweeps and factorization checks.
    pub fn grid(&self) -> &[C64] {
        &self.grid
    }

    pub fn with_grid(mut self, grid: Vec<C64>) -> Self {
        self.grid = grid;
        self
    }

    pub fn lift(&self, u: &HilbertVector) -> Result<RkhsElement> {
        self.space.lift(u)
    }

    /// Sampling function `F_n` as an element of `H`.
    pub fn sampling_element(&self, n: usize) -> Result<RkhsElement> {
        self.space.lift(&self.basis()[n])
    }

    /// Index of the node equal to `z` (within its pole guard).
    pub fn node_index(&self, z: C64) -> Option<usize> {
        self.nodes()
            .iter()
            .position(|&zn| (z - zn).norm() <= 1e-6 * (1.0 + zn.norm()))
    }
}

/// Certifies the sampling condition with a fixed internal seed.
pub fn certify(kernel: Arc<KernelFunction>) -> Result<SamplingSystem> {
    certify_with_rng(kernel, &mut crate::seeded_rng(CERTIFY_SEED))
}

/// Extracts `c_n = ⟨F(z_n)u_n, u_n⟩` and checks the sampling condition,
/// the adjoint identity and the interpolation deltas, all relative to
/// `max |c_n|`.
pub fn certify_with_rng(kernel: Arc<KernelFunction>, rng: &mut impl Rng) -> Result<SamplingSystem> {
    let d = kernel.dim();
    let nodes = kernel.nodes().to_vec();
    let basis = kernel.basis().to_vec();
    if nodes.is_empty() || nodes.len() != d {
        return Err(Error::InvalidInput(format!(
            "kernel declares {} sampling nodes in dimension {d}",
            nodes.len()
        )));
    }
    let at_nodes: Vec<_> = nodes.iter().map(|&z| kernel.evaluate(z)).collect();
    let c: Vec<C64> = at_nodes
        .iter()
        .zip(&basis)
        .map(|(op, u)| inner_unchecked(&op.apply(u), u))
        .collect();
    let cmax = c.iter().map(|x| x.norm()).fold(0.0, f64::max);
    if let Some(n) = c.iter().position(|x| x.norm() <= CERTIFY_TOL * cmax || cmax == 0.0) {
        return Err(Error::CertificationFailure {
            identity: ID_NONZERO,
            node: n,
            residual: c[n].norm(),
        });
    }

    let mut residuals = vec![
        NodeResiduals {
            sampling: 0.0,
            adjoint: 0.0,
            interpolation: 0.0,
        };
        d
    ];
    for _ in 0..CERTIFY_TRIALS {
        let u = HilbertVector::random(d, rng);
        for n in 0..d {
            let expected = basis[n].scale(c[n] * inner_unchecked(&u, &basis[n]));
            let r = at_nodes[n].apply(&u).sub(&expected).norm() / (u.norm() * cmax);
            residuals[n].sampling = residuals[n].sampling.max(r);
        }
    }
    for n in 0..d {
        let adj = at_nodes[n].adjoint().apply(&basis[n]);
        residuals[n].adjoint = adj.sub(&basis[n].scale(c[n].conj())).norm() / cmax;
        for m in 0..d {
            let value = at_nodes[m].apply(&basis[n]);
            let expected = if n == m {
                basis[n].scale(c[n])
            } else {
                HilbertVector::zeros(d)
            };
            let r = value.sub(&expected).norm() / cmax;
            residuals[n].interpolation = residuals[n].interpolation.max(r);
        }
    }
    for (identity, pick) in [
        (ID_SAMPLING, (|r: &NodeResiduals| r.sampling) as fn(&NodeResiduals) -> f64),
        (ID_ADJOINT, |r: &NodeResiduals| r.adjoint),
        (ID_INTERPOLATION, |r: &NodeResiduals| r.interpolation),
    ] {
        let (node, worst) = residuals
            .iter()
            .map(pick)
            .enumerate()
            .fold((0, 0.0), |acc, (i, r)| if r > acc.1 { (i, r) } else { acc });
        if worst > CERTIFY_TOL {
            return Err(Error::CertificationFailure {
                identity,
                node,
                residual: worst,
            });
        }
    }

    let grid = grid::test_grid(&nodes);
    Ok(SamplingSystem {
        space: Rkhs::new(kernel)?,
        c,
        residuals,
        grid,
    })
}

/// Values `f(z_n)` keyed by node index.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SampleSet {
    values: Vec<(usize, HilbertVector)>,
}

impl SampleSet {
    pub fn new(values: Vec<(usize, HilbertVector)>) -> Self {
        Self { values }
    }

    /// `f` sampled at the given points, indexed by position.
    pub fn at_points(f: &RkhsElement, points: &[C64]) -> Self {
        Self {
            values: points.iter().enumerate().map(|(n, &z)| (n, f.value(z))).collect(),
        }
    }

    /// `f` sampled at the nodes of a sampling system.
    pub fn from_element(system: &SamplingSystem, f: &RkhsElement) -> Self {
        Self::at_points(f, system.nodes())
    }

    pub fn values(&self) -> &[(usize, HilbertVector)] {
        &self.values
    }

    pub fn get(&self, n: usize) -> Result<&HilbertVector> {
        self.values
            .iter()
            .find(|(i, _)| *i == n)
            .map(|(_, v)| v)
            .ok_or(Error::MissingSample(n))
    }

    /// Adds complex normal noise of the given amplitude to every sample.
    pub fn with_noise(&self, amplitude: f64, rng: &mut impl Rng) -> Self {
        Self {
            values: self
                .values
                .iter()
                .map(|(n, v)| {
                    let noise = HilbertVector::random(v.dim(), rng).scale(C64::new(amplitude, 0.0));
                    (*n, v.add(&noise))
                })
                .collect(),
        }
    }
}

/// Kramer series `Σ_n ⟨f(z_n),u_n⟩ F_n(z)/c_n`.
pub fn kramer_reconstruct(system: &SamplingSystem, samples: &SampleSet, z: C64) -> Result<HilbertVector> {
    kramer_truncated(system, samples, z, system.dim())
}

/// First `terms` terms of the Kramer series, in node order.
pub fn kramer_truncated(
    system: &SamplingSystem,
    samples: &SampleSet,
    z: C64,
    terms: usize,
) -> Result<HilbertVector> {
    let fz = system.kernel().evaluate(z);
    let mut acc = HilbertVector::zeros(system.dim());
    for n in 0..terms.min(system.dim()) {
        let un = &system.basis()[n];
        let coeff = inner_unchecked(samples.get(n)?, un) / system.c[n];
        acc = acc.axpy(coeff, &fz.apply(un));
    }
    Ok(acc)
}

/// Kernel form `Σ_n ⟨f, K_{z_n}u_n⟩ K_{z_n}(z)u_n / ‖K_{z_n}u_n‖²`, with the
/// inner products taken from the samples through the reproducing property.
///
/// Uses only `K` itself; the constants `c_n` do not enter.
pub fn kramer_kernel_form(system: &SamplingSystem, samples: &SampleSet, z: C64) -> Result<HilbertVector> {
    let kernel = system.kernel();
    let fz = kernel.evaluate(z);
    let mut acc = HilbertVector::zeros(system.dim());
    for (n, (&zn, un)) in system.nodes().iter().zip(system.basis()).enumerate() {
        let fzn = kernel.evaluate(zn);
        let k_un = fzn.adjoint().apply(un);
        // ‖K_{z_n}u_n‖² = ⟨K_{z_n}(z_n)u_n, u_n⟩ = ‖F(z_n)* u_n‖²
        let norm2 = inner_unchecked(&fzn.apply(&k_un), un);
        let coeff = inner_unchecked(samples.get(n)?, un) / norm2;
        acc = acc.axpy(coeff, &fz.apply(&k_un));
    }
    Ok(acc)
}

/// Kernel form computed entirely inside `H`: `⟨f, K_{z_n}u_n⟩_H` and
/// `‖K_{z_n}u_n‖_H` come from the quotient inner product.
pub fn kramer_kernel_form_element(system: &SamplingSystem, f: &RkhsElement, z: C64) -> Result<HilbertVector> {
    let kernel = system.kernel();
    let mut acc = HilbertVector::zeros(system.dim());
    for (&zn, un) in system.nodes().iter().zip(system.basis()) {
        let k = system.lift(&kernel.evaluate_adjoint(zn).apply(un))?;
        let norm2 = k.norm().powi(2);
        acc = acc.axpy(inner_h(f, &k)? / norm2, &k.value(z));
    }
    Ok(acc)
}

/// `A(z) = (z - z_1) F_1(z) / Q(z)` recovered from the kernel itself.
#[derive(Debug, Clone)]
pub struct ExtractedAmplitude {
    kernel: Arc<KernelFunction>,
    q: ScalarEntire,
    anchor_node: C64,
    anchor_q: usize,
}

impl ExtractedAmplitude {
    /// Near a zero `w ≠ z_1` of `Q` both `F_1` and `Q/(z - z_1)` vanish and
    /// the value is `F_1'(w) (w - z_1) / Q'(w)`; it is used throughout the
    /// pole guard of `w`.
    pub fn eval(&self, z: C64) -> HilbertVector {
        let u1 = &self.kernel.basis()[0];
        match self.q.nearby_zero(z) {
            Some(w) if (w - self.anchor_node).norm() > 1e-6 * (1.0 + w.norm()) => {
                let slope = self.q.deriv(w) / (w - self.anchor_node);
                self.kernel.apply_deriv(w, u1).scale(1.0 / slope)
            }
            _ => {
                let q1 = self.q.reg_quotient(z, self.anchor_q);
                self.kernel.apply(z, u1).scale(1.0 / q1)
            }
        }
    }
}

/// `(z - z_n) F_n(z) = a_n Q(z) A(z)` with `a_1 = 1`.
#[derive(Debug, Clone)]
pub struct Factorization {
    pub q: ScalarEntire,
    pub amplitude: ExtractedAmplitude,
    pub a: Vec<C64>,
    /// `⟨A(z_n), u_n⟩`
    pub alignment: Vec<C64>,
    /// Index of each sampling node among `q.nodes()`.
    q_index: Vec<usize>,
    /// Worst relative residual of the factorization identity on the grid.
    pub max_residual: f64,
}

/// Recovers `(Q, A, a_n)` from a sampling system whose Kramer series is a
/// quasi Lagrange-type series.
///
/// Fails unless backward-shift invariance holds at the probe points (two
/// generic points and the first two nodes) and the recovered factors
/// reproduce every `F_n` on the system grid to `1e-8`.
pub fn extract_factorization(system: &SamplingSystem) -> Result<Factorization> {
    let kernel = system.kernel();
    let nodes = system.nodes();
    let d = system.dim();
    let q = match kernel.q() {
        Some(q) => q.clone(),
        None => ScalarEntire::poly_from_roots(nodes.to_vec())?,
    };
    let q_index: Vec<usize> = nodes
        .iter()
        .map(|z| {
            q.nodes()
                .iter()
                .position(|w| (w - z).norm() <= 1e-12 * (1.0 + z.norm()))
                .ok_or_else(|| failure(format!("node {z} is not a zero of Q"), *z, f64::INFINITY))
        })
        .collect::<Result<_>>()?;
    for i in 0..d {
        for j in 0..i {
            if q_index[i] == q_index[j] {
                return Err(failure("repeated node".into(), nodes[i], f64::INFINITY));
            }
        }
    }

    let probes = factorization_probes(nodes);
    for rep in shift::invariance_check(system, &probes)? {
        if !rep.all_shifts_in_space {
            return Err(failure(
                "backward shift leaves H".into(),
                rep.beta,
                rep.max_residual,
            ));
        }
    }

    let z1 = nodes[0];
    let u1 = &system.basis()[0];
    let c1 = system.c[0];
    let mut a = vec![C64::new(1.0, 0.0)];
    for n in 1..d {
        let dfn = kernel.apply_deriv(z1, &system.basis()[n]);
        let an = (z1 - nodes[n]) / c1 * inner_unchecked(&dfn, u1);
        if an.norm() <= 1e-12 {
            return Err(failure(format!("a_{n} vanishes"), z1, an.norm()));
        }
        a.push(an);
    }

    let amplitude = ExtractedAmplitude {
        kernel: Arc::clone(kernel),
        q: q.clone(),
        anchor_node: z1,
        anchor_q: q_index[0],
    };
    let mut alignment = Vec::with_capacity(d);
    for (n, (&zn, un)) in nodes.iter().zip(system.basis()).enumerate() {
        let an_z = amplitude.eval(zn);
        let al = inner_unchecked(&an_z, un);
        if al.norm() <= 1e-12 * an_z.norm() {
            return Err(failure(format!("<A(z_{n}), u_{n}> vanishes"), zn, al.norm()));
        }
        let cn = a[n] * q.node_deriv(q_index[n]) * al;
        let r = (cn - system.c[n]).norm() / system.c[n].norm();
        if r > 1e-9 {
            return Err(failure(format!("c_{n} not reproduced"), zn, r));
        }
        alignment.push(al);
    }

    let fact = Factorization {
        q,
        amplitude,
        a,
        alignment,
        q_index,
        max_residual: 0.0,
    };
    let (point, residual) = fact.worst_residual(system);
    if residual > 1e-8 {
        return Err(failure("F_n differs from a_n Q A/(z - z_n)".into(), point, residual));
    }
    Ok(Factorization {
        max_residual: residual,
        ..fact
    })
}

impl Factorization {
    /// `Q(z)/(z - z_n)` for sampling node `n`.
    pub fn quotient(&self, z: C64, n: usize) -> C64 {
        self.q.reg_quotient(z, self.q_index[n])
    }

    /// Grid point and value of the worst relative mismatch between `F_n`
    /// and `a_n Q(z)A(z)/(z - z_n)`, normalized per `n` by `max ‖F_n‖`.
    pub fn worst_residual(&self, system: &SamplingSystem) -> (C64, f64) {
        let kernel = system.kernel();
        let grid = system.grid();
        let amps: Vec<_> = grid.iter().map(|&z| self.amplitude.eval(z)).collect();
        let mut worst = (C64::new(0.0, 0.0), 0.0);
        for (n, un) in system.basis().iter().enumerate() {
            let values: Vec<_> = grid.iter().map(|&z| kernel.apply(z, un)).collect();
            let scale = values.iter().map(|v| v.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
            for ((&z, v), amp) in grid.iter().zip(&values).zip(&amps) {
                let model = amp.scale(self.a[n] * self.quotient(z, n));
                let r = v.sub(&model).norm() / scale;
                if r > worst.1 {
                    worst = (z, r);
                }
            }
        }
        worst
    }
}

fn factorization_probes(nodes: &[C64]) -> Vec<C64> {
    let g = grid::generic_probes();
    let mut probes = vec![g[0], g[1]];
    probes.extend(nodes.iter().take(2));
    probes
}

fn failure(reason: String, point: C64, residual: f64) -> Error {
    Error::FactorizationFailure {
        reason,
        point,
        residual,
    }
}

/// `Σ_n ⟨f(z_n),u_n⟩ Q(z)/((z - z_n)Q'(z_n)) A(z)/⟨A(z_n),u_n⟩`.
pub fn quasi_lagrange_reconstruct(
    fact: &Factorization,
    system: &SamplingSystem,
    samples: &SampleSet,
    z: C64,
) -> Result<HilbertVector> {
    let az = fact.amplitude.eval(z);
    let mut scalar = C64::new(0.0, 0.0);
    for (n, un) in system.basis().iter().enumerate() {
        let qn = fact.quotient(z, n) / fact.q.node_deriv(fact.q_index[n]);
        scalar += inner_unchecked(samples.get(n)?, un) * qn / fact.alignment[n];
    }
    Ok(az.scale(scalar))
}

/// Lagrange series `Σ_n Q(z)/((z - z_n)Q'(z_n)) f(z_n)` of the resolvent
/// family; samples are indexed by distinct eigenvalue.
pub fn lagrange_reconstruct(kernel: &KernelFunction, samples: &SampleSet, z: C64) -> Result<HilbertVector> {
    if !matches!(kernel.family(), Family::Resolvent | Family::Zayed) {
        return Err(Error::PreconditionViolation(format!(
            "Lagrange series needs a resolvent kernel, got {:?}",
            kernel.family()
        )));
    }
    let q = kernel.q().expect("spectral kernels carry Q");
    let mut acc = HilbertVector::zeros(kernel.dim());
    for (n, zn) in kernel.distinct_nodes().into_iter().enumerate() {
        let qi = q
            .nodes()
            .iter()
            .position(|&w| w == zn)
            .expect("kernel nodes are zeros of Q");
        let weight = q.reg_quotient(z, qi) / q.node_deriv(qi);
        acc = acc.axpy(weight, samples.get(n)?);
    }
    Ok(acc)
}

/// One row of a convergence sweep. Grid errors are relative to `max ‖f‖`
/// on the grid, so the empty sum has error 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub terms: usize,
    pub max_error: f64,
    pub mean_error: f64,
    /// `‖f - S_N f‖_H / ‖f‖_H`.
    pub h_error: f64,
    pub runtime_ms: f64,
}

/// Truncated Kramer series against direct evaluation on the system grid.
pub fn convergence_sweep(
    system: &SamplingSystem,
    f: &RkhsElement,
    truncations: &[usize],
) -> Result<Vec<SweepRow>> {
    let samples = SampleSet::from_element(system, f);
    let exact: Vec<_> = system.grid().iter().map(|&z| f.value(z)).collect();
    let scale = exact.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let f_norm = if f.norm() > 0.0 { f.norm() } else { 1.0 };
    truncations
        .iter()
        .map(|&terms| {
            let start = Instant::now();
            let mut max = 0.0f64;
            let mut sum = 0.0;
            for (&z, e) in system.grid().iter().zip(&exact) {
                let err = kramer_truncated(system, &samples, z, terms)?.sub(e).norm() / scale;
                max = max.max(err);
                sum += err;
            }
            let mut partial = HilbertVector::zeros(system.dim());
            for (n, un) in system.basis().iter().enumerate().take(terms) {
                partial = partial.axpy(inner_unchecked(samples.get(n)?, un) / system.c[n], un);
            }
            let h_error = f.sub(&system.lift(&partial)?)?.norm() / f_norm;
            Ok(SweepRow {
                terms,
                max_error: max,
                mean_error: sum / exact.len().max(1) as f64,
                h_error,
                runtime_ms: start.elapsed().as_secs_f64() * 1e3,
            })
        })
        .collect()
}

/// True when `max_error` never increases by more than `noise` as the
/// number of terms grows.
///
/// Guaranteed only when each `F_n` points along its own `u_n`, as in the
/// Zayed and resolvent families; see [`is_h_monotone`] for the general case.
pub fn is_monotone(rows: &[SweepRow], noise: f64) -> bool {
    monotone_by(rows, noise, |r| r.max_error)
}

/// `‖f - S_N f‖_H` is nonincreasing for every certified system, since the
/// sampling functions are orthonormal.
pub fn is_h_monotone(rows: &[SweepRow], noise: f64) -> bool {
    monotone_by(rows, noise, |r| r.h_error)
}

fn monotone_by(rows: &[SweepRow], noise: f64, key: impl Fn(&SweepRow) -> f64) -> bool {
    let mut sorted: Vec<_> = rows.to_vec();
    sorted.sort_by_key(|r| r.terms);
    sorted.windows(2).all(|w| key(&w[1]) <= key(&w[0]) + noise)
}

/// Families whose sampling functions are diagonal in the `u_n` basis, so
/// the pointwise partial-sum error decreases with every term.
pub fn grid_monotone_family(family: Family) -> bool {
    matches!(family, Family::Zayed | Family::Resolvent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{build_rank_one_quasi, build_resolvent, build_zayed, standard_basis, Eigenspace};

    fn r(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn zayed(d: usize) -> Arc<KernelFunction> {
        let nodes: Vec<C64> = (0..d).map(|k| r(k as f64 - (d / 2) as f64)).collect();
        let q = ScalarEntire::sin_pi(nodes.clone()).unwrap();
        Arc::new(build_zayed(q, nodes, standard_basis(d)).unwrap())
    }

    fn rank_one(d: usize) -> Arc<KernelFunction> {
        let nodes: Vec<C64> = (1..=d).map(|k| r(k as f64)).collect();
        let q = ScalarEntire::poly_from_roots(nodes.clone()).unwrap();
        let c = nodes.iter().map(|&z| q.deriv(z)).collect();
        Arc::new(build_rank_one_quasi(q, nodes, standard_basis(d), c).unwrap())
    }

    fn resolvent(mults: &[usize]) -> Arc<KernelFunction> {
        let d: usize = mults.iter().sum();
        let nodes: Vec<C64> = (1..=mults.len()).map(|k| r(k as f64)).collect();
        let q = ScalarEntire::poly_from_roots(nodes.clone()).unwrap();
        let mut next = 0;
        let spectrum = nodes
            .iter()
            .zip(mults)
            .map(|(&node, &k)| {
                let vectors = (next..next + k).map(|i| HilbertVector::basis(d, i)).collect();
                next += k;
                Eigenspace { node, vectors }
            })
            .collect();
        Arc::new(build_resolvent(q, spectrum).unwrap())
    }

    fn rel(a: &HilbertVector, b: &HilbertVector) -> f64 {
        a.sub(b).norm() / b.norm().max(1.0)
    }

    #[test]
    fn certify_examples() {
        let k = zayed(4);
        let s = certify(k.clone()).unwrap();
        let q = k.q().unwrap();
        for (n, &zn) in s.nodes().iter().enumerate() {
            assert!((s.c()[n] - q.deriv(zn)).norm() < 1e-14);
        }

        let err = certify(resolvent(&[2, 1])).unwrap_err();
        match err {
            Error::CertificationFailure { identity, node, .. } => {
                assert_eq!(identity, ID_SAMPLING);
                assert!(node < 2);
            }
            other => panic!("unexpected {other:?}"),
        }

        let q = ScalarEntire::poly_from_roots(vec![r(1.0), r(2.0), r(3.0)]).unwrap();
        let c = vec![C64::new(0.5, 1.0), r(-2.0), C64::new(0.0, 3.0)];
        let k = build_rank_one_quasi(q, vec![r(1.0), r(2.0), r(3.0)], standard_basis(3), c.clone()).unwrap();
        let s = certify(Arc::new(k)).unwrap();
        for (a, b) in s.c().iter().zip(&c) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn kramer_examples() {
        let s = certify(zayed(8)).unwrap();
        let f1 = s.sampling_element(0).unwrap();
        let samples = SampleSet::from_element(&s, &f1);
        for &z in s.grid() {
            assert!(rel(&kramer_reconstruct(&s, &samples, z).unwrap(), &f1.value(z)) < 1e-12);
        }
        let mut rng = crate::seeded_rng(9);
        let f = s.lift(&HilbertVector::random(8, &mut rng)).unwrap();
        let samples = SampleSet::from_element(&s, &f);
        for (m, &zm) in s.nodes().iter().enumerate() {
            let rec = kramer_reconstruct(&s, &samples, zm).unwrap();
            assert!(rec.sub(samples.get(m).unwrap()).norm() <= 1e-10 * samples.get(m).unwrap().norm());
        }
        assert!(matches!(
            kramer_reconstruct(&s, &SampleSet::default(), r(0.5)),
            Err(Error::MissingSample(0))
        ));
    }

    #[test]
    fn kernel_form_agrees_with_kramer() {
        let mut rng = crate::seeded_rng(10);
        for k in [zayed(6), rank_one(6)] {
            let s = certify(k).unwrap();
            for (n, un) in s.basis().iter().enumerate() {
                let k_un = s.kernel().evaluate_adjoint(s.nodes()[n]).apply(un);
                let norm2 = s.lift(&k_un).unwrap().norm().powi(2);
                assert!((norm2 - s.c()[n].norm_sqr()).abs() <= 1e-12 * norm2);
            }
            let zero = SampleSet::from_element(&s, &s.space().zero());
            assert_eq!(kramer_kernel_form(&s, &zero, r(0.3)).unwrap().norm(), 0.0);
            for _ in 0..20 {
                let f = s.lift(&HilbertVector::random(6, &mut rng)).unwrap();
                let samples = SampleSet::from_element(&s, &f);
                let z = s.grid()[rng.random_range(0..s.grid().len())];
                let a = kramer_reconstruct(&s, &samples, z).unwrap();
                let b = kramer_kernel_form(&s, &samples, z).unwrap();
                let c = kramer_kernel_form_element(&s, &f, z).unwrap();
                let scale = f.value(z).norm().max(1.0);
                assert!(a.sub(&b).norm() <= 1e-9 * scale);
                assert!(a.sub(&c).norm() <= 1e-9 * scale);
            }
        }
    }

    #[test]
    fn orthonormal_sampling_functions_and_coefficients() {
        let mut rng = crate::seeded_rng(12);
        for k in [zayed(5), rank_one(5), resolvent(&[1, 1, 1])] {
            let s = certify(k).unwrap();
            let d = s.dim();
            let fs: Vec<_> = (0..d).map(|n| s.sampling_element(n).unwrap()).collect();
            for i in 0..d {
                for j in 0..d {
                    let g = inner_h(&fs[i], &fs[j]).unwrap();
                    let e = if i == j { 1.0 } else { 0.0 };
                    assert!((g - e).norm() <= 1e-10);
                }
            }
            for _ in 0..50 {
                let f = s.lift(&HilbertVector::random(d, &mut rng)).unwrap();
                for n in 0..d {
                    let lhs = inner_h(&f, &fs[n]).unwrap();
                    let rhs = inner_unchecked(&f.value(s.nodes()[n]), &s.basis()[n]) / s.c()[n];
                    assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + lhs.norm()));
                }
            }
        }
    }

    #[test]
    fn factorization_of_rank_one_family() {
        let s = certify(rank_one(6)).unwrap();
        let fact = extract_factorization(&s).unwrap();
        for an in &fact.a {
            assert!((an - r(1.0)).norm() <= 1e-9);
        }
        let (_, amp) = s.kernel().rank_one_parts().unwrap();
        for &z in s.grid() {
            let truth = amp.eval(z);
            assert!(fact.amplitude.eval(z).sub(&truth).norm() <= 1e-9 * truth.norm());
        }
        for (n, &zn) in s.nodes().iter().enumerate() {
            let cn = fact.a[n] * fact.q.deriv(zn) * inner_unchecked(&fact.amplitude.eval(zn), &s.basis()[n]);
            assert!((cn - s.c()[n]).norm() <= 1e-9 * s.c()[n].norm());
        }
    }

    #[test]
    fn factorization_fails_without_universal_amplitude() {
        for k in [resolvent(&[1, 1, 1]), zayed(3)] {
            assert!(matches!(
                extract_factorization(&certify(k).unwrap()),
                Err(Error::FactorizationFailure { .. })
            ));
        }
    }

    #[test]
    fn quasi_lagrange_matches_kramer() {
        let s = certify(rank_one(6)).unwrap();
        let fact = extract_factorization(&s).unwrap();
        let mut rng = crate::seeded_rng(13);
        for _ in 0..20 {
            let f = s.lift(&HilbertVector::random(6, &mut rng)).unwrap();
            let samples = SampleSet::from_element(&s, &f);
            for &z in s.grid().iter().chain(s.nodes()) {
                let a = kramer_reconstruct(&s, &samples, z).unwrap();
                let b = quasi_lagrange_reconstruct(&fact, &s, &samples, z).unwrap();
                assert!(a.sub(&b).norm() <= 1e-8 * a.norm().max(1.0));
            }
        }
        let f1 = s.sampling_element(0).unwrap();
        let samples = SampleSet::from_element(&s, &f1);
        let z = C64::new(2.5, 1.0);
        let b = quasi_lagrange_reconstruct(&fact, &s, &samples, z).unwrap();
        assert!(rel(&b, &s.kernel().sampling_function(0, z)) <= 1e-12);
    }

    #[test]
    fn lagrange_worked_example() {
        let k = resolvent(&[1, 1]);
        let f = crate::rkhs::lift(&k, &HilbertVector::from_vec(vec![r(1.0), r(1.0)])).unwrap();
        let samples = SampleSet::at_points(&f, &k.distinct_nodes());
        assert!(samples.get(0).unwrap().sub(&HilbertVector::from_vec(vec![r(-1.0), r(0.0)])).norm() < 1e-15);
        assert!(samples.get(1).unwrap().sub(&HilbertVector::from_vec(vec![r(0.0), r(1.0)])).norm() < 1e-15);
        let rec = lagrange_reconstruct(&k, &samples, r(3.0)).unwrap();
        let expected = HilbertVector::from_vec(vec![r(1.0), r(2.0)]);
        assert!(rec.sub(&expected).norm() <= 1e-12);
        assert!(rec.sub(&f.value(r(3.0))).norm() <= 1e-12);
    }

    #[test]
    fn lagrange_with_multiplicity() {
        let k = resolvent(&[2, 1, 1]);
        let mut rng = crate::seeded_rng(14);
        let f = crate::rkhs::lift(&k, &HilbertVector::random(4, &mut rng)).unwrap();
        let samples = SampleSet::at_points(&f, &k.distinct_nodes());
        for z in grid::test_grid(&k.distinct_nodes()).into_iter().chain(k.distinct_nodes()) {
            let rec = lagrange_reconstruct(&k, &samples, z).unwrap();
            assert!(rel(&rec, &f.value(z)) <= 1e-9);
        }
        assert!(lagrange_reconstruct(&rank_one(2), &samples, r(0.0)).is_err());
    }

    #[test]
    fn sweep_examples() {
        let s = certify(zayed(8)).unwrap();
        let mut u = HilbertVector::zeros(8);
        for i in 0..3 {
            u.0[i] = C64::new(1.0 + i as f64, -0.5);
        }
        let f = s.lift(&u).unwrap();
        let rows = convergence_sweep(&s, &f, &[0, 1, 2, 3, 4, 8]).unwrap();
        assert!((rows[0].max_error - 1.0).abs() < 1e-15);
        for row in rows.iter().filter(|r| r.terms >= 3) {
            assert!(row.max_error <= 1e-10);
        }
        assert!(is_monotone(&rows, 1e-12));

        let mut rng = crate::seeded_rng(15);
        let f = s.lift(&HilbertVector::random(8, &mut rng)).unwrap();
        let rows = convergence_sweep(&s, &f, &[1, 2, 4, 8]).unwrap();
        assert!(rows[3].max_error <= 1e-9);
        assert!(is_monotone(&rows, 1e-12));
        assert!(is_h_monotone(&rows, 1e-12));
        assert!(rows[3].h_error <= 1e-12);

        // rank-one: H error decreases; the grid error need not
        let s = certify(rank_one(6)).unwrap();
        let f = s.lift(&HilbertVector::random(6, &mut rng)).unwrap();
        let rows = convergence_sweep(&s, &f, &[0, 1, 2, 3, 4, 5, 6]).unwrap();
        assert!(is_h_monotone(&rows, 1e-12));
        assert!((rows[0].h_error - 1.0).abs() < 1e-12);
        assert!(rows[6].max_error <= 1e-9);
    }

    #[test]
    fn zero_set_of_sampling_functions() {
        let s = certify(rank_one(5)).unwrap();
        let mut probe = grid::linspace(0.0, 6.0, 121);
        probe.extend(grid::linspace(0.0, 6.0, 61).into_iter().map(|z| z + C64::new(0.0, 1.0)));
        for n in 0..5 {
            let values: Vec<f64> = probe.iter().map(|&z| s.kernel().sampling_function(n, z).norm()).collect();
            let scale = values.iter().cloned().fold(0.0, f64::max);
            let others: Vec<C64> = s.nodes().iter().enumerate().filter(|&(p, _)| p != n).map(|(_, &z)| z).collect();
            let far_min = probe
                .iter()
                .zip(&values)
                .filter(|(z, _)| others.iter().all(|w| (*z - w).norm() > 0.1))
                .map(|(_, &v)| v)
                .fold(f64::INFINITY, f64::min);
            assert!(far_min > 1e-6 * scale, "n={n} far_min={far_min:e} scale={scale:e}");
            for &w in &others {
                assert!(s.kernel().sampling_function(n, w).norm() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn noisy_samples_change_reconstruction() {
        let s = certify(zayed(4)).unwrap();
        let f = s.sampling_element(1).unwrap();
        let clean = SampleSet::from_element(&s, &f);
        let noisy = clean.with_noise(1e-3, &mut crate::seeded_rng(1));
        let z = r(0.25);
        let d = kramer_reconstruct(&s, &noisy, z).unwrap().sub(&kramer_reconstruct(&s, &clean, z).unwrap());
        assert!(d.norm() > 0.0 && d.norm() < 1e-1);
    }
}
