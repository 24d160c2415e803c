//! The scalar entire function `Q` whose simple zeros are the sample nodes.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::cstep::{self, Scalar};
use crate::{Error, Result, C64};

/// Which closed form backs `Q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// `sin(πz)/π`, zeros at every integer.
    SinPi,
    /// `∏ (z - z_n)` over the nodes.
    PolyRoots,
    /// Genus-one canonical product `∏ (1 - z/z_k) e^{z/z_k}`, truncated.
    TruncProduct,
}

/// Scalar entire function with simple zeros at `nodes`.
///
/// `Q'` and `Q''` at every node are computed once at construction; the
/// regularized quotient uses them inside the pole guard.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarEntire {
    variant: Variant,
    nodes: Vec<C64>,
    /// Zeros entering the product (nodes first, then any tail zeros).
    zeros: Vec<C64>,
    d1: Vec<C64>,
    d2: Vec<C64>,
}

impl ScalarEntire {
    pub fn sin_pi(nodes: Vec<C64>) -> Result<Self> {
        for (i, z) in nodes.iter().enumerate() {
            if z.im != 0.0 || z.re.fract() != 0.0 {
                return Err(Error::InvalidInput(format!(
                    "sin_pi node {i} = {z} is not an integer"
                )));
            }
        }
        Self::build(Variant::SinPi, nodes, Vec::new())
    }

    pub fn poly_from_roots(nodes: Vec<C64>) -> Result<Self> {
        let zeros = nodes.clone();
        Self::build(Variant::PolyRoots, nodes, zeros)
    }

    /// Truncated genus-one product over `nodes` followed by `tail`.
    ///
    /// Only the first `truncation` zeros are kept (default: four times the
    /// number of nodes, capped at what is available); dropped factors are
    /// not estimated.
    pub fn truncated_product(
        nodes: Vec<C64>,
        tail: Vec<C64>,
        truncation: Option<usize>,
    ) -> Result<Self> {
        let available = nodes.len() + tail.len();
        let keep = truncation.unwrap_or(4 * nodes.len()).min(available);
        if keep < nodes.len() {
            return Err(Error::InvalidInput(format!(
                "truncation {keep} drops some of the {} nodes",
                nodes.len()
            )));
        }
        let zeros: Vec<C64> = nodes.iter().chain(tail.iter()).cloned().take(keep).collect();
        if let Some(i) = zeros.iter().position(|z| z.norm() == 0.0) {
            return Err(Error::InvalidInput(format!(
                "canonical product zero {i} sits at the origin"
            )));
        }
        Self::build(Variant::TruncProduct, nodes, zeros)
    }

    fn build(variant: Variant, nodes: Vec<C64>, zeros: Vec<C64>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidInput("Q needs at least one node".into()));
        }
        check_distinct(&nodes)?;
        if variant != Variant::SinPi {
            check_distinct(&zeros)?;
        }
        let mut q = Self {
            variant,
            nodes,
            zeros,
            d1: Vec::new(),
            d2: Vec::new(),
        };
        q.d1 = q.nodes.iter().map(|&z| q.deriv(z)).collect();
        q.d2 = q.nodes.iter().map(|&z| q.second_deriv(z)).collect();
        for (i, (&z, d)) in q.nodes.iter().zip(&q.d1).enumerate() {
            if d.norm() == 0.0 || !d.norm().is_finite() {
                return Err(Error::NotSimpleZero {
                    index: i,
                    node: z,
                    value: q.eval(z).norm(),
                    deriv: d.norm(),
                });
            }
        }
        Ok(q)
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn nodes(&self) -> &[C64] {
        &self.nodes
    }

    /// Zeros used by the product representation (empty for `SinPi`).
    pub fn product_zeros(&self) -> &[C64] {
        &self.zeros
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.eval_g(z)
    }

    pub fn eval_g<S: Scalar>(&self, z: S) -> S {
        match self.variant {
            Variant::SinPi => (z.scale(C64::new(PI, 0.0))).sin().scale(C64::new(1.0 / PI, 0.0)),
            Variant::PolyRoots => self
                .zeros
                .iter()
                .fold(S::one(), |acc, &r| acc * (z - S::from_c(r))),
            Variant::TruncProduct => self
                .zeros
                .iter()
                .fold(S::one(), |acc, &r| acc * genus_one_factor(z, r)),
        }
    }

    /// `Q'(z)`: analytic for `SinPi` and `PolyRoots`, complex step for the
    /// canonical product.
    pub fn deriv(&self, z: C64) -> C64 {
        match self.variant {
            Variant::TruncProduct => cstep::derivative(|w| self.eval_g(w), z),
            _ => self.deriv_g(z),
        }
    }

    /// Product-rule form of `Q'`, usable with any [`Scalar`].
    pub fn deriv_g<S: Scalar>(&self, z: S) -> S {
        match self.variant {
            Variant::SinPi => (z.scale(C64::new(PI, 0.0))).cos(),
            Variant::PolyRoots => product_rule(z, &self.zeros, |z, r| (z - S::from_c(r), S::one())),
            Variant::TruncProduct => product_rule(z, &self.zeros, |z, r| {
                let e = (z.scale(1.0 / r)).exp();
                let f = (S::one() - z.scale(1.0 / r)) * e;
                let df = -(z.scale(1.0 / (r * r)) * e);
                (f, df)
            }),
        }
    }

    /// `Q''(z)`: analytic for `SinPi`, complex step on `Q'` otherwise.
    pub fn second_deriv(&self, z: C64) -> C64 {
        match self.variant {
            Variant::SinPi => -(z * PI).sin() * PI,
            _ => cstep::derivative(|w| self.deriv_g(w), z),
        }
    }

    /// `Q'(z_n)`, cached.
    pub fn node_deriv(&self, n: usize) -> C64 {
        self.d1[n]
    }

    pub fn node_second_deriv(&self, n: usize) -> C64 {
        self.d2[n]
    }

    /// Radius of the pole guard around node `n`: `1e-6 (1 + |z_n|)`.
    pub fn pole_radius(&self, n: usize) -> f64 {
        1e-6 * (1.0 + self.nodes[n].norm())
    }

    /// `Q(z)/(z - z_n)`, continued analytically across `z_n`.
    pub fn reg_quotient(&self, z: C64, n: usize) -> C64 {
        self.reg_quotient_g(z, n)
    }

    pub fn reg_quotient_g<S: Scalar>(&self, z: S, n: usize) -> S {
        let zn = self.nodes[n];
        let delta = z - S::from_c(zn);
        if (z.primal() - zn).norm() > self.pole_radius(n) {
            self.eval_g(z) / delta
        } else {
            // Q(z)/(z - z_n) = Q'(z_n) + Q''(z_n)(z - z_n)/2 + O(δ²)
            S::from_c(self.d1[n]) + delta.scale(self.d2[n] * 0.5)
        }
    }

    /// A zero of `Q` within the pole guard of `z`, if any. Covers every
    /// integer for `SinPi` and every product zero otherwise.
    pub fn nearby_zero(&self, z: C64) -> Option<C64> {
        let guard = |w: C64| 1e-6 * (1.0 + w.norm());
        match self.variant {
            Variant::SinPi => {
                let w = C64::new(z.re.round(), 0.0);
                ((z - w).norm() <= guard(w)).then_some(w)
            }
            _ => self
                .zeros
                .iter()
                .cloned()
                .find(|&w| (z - w).norm() <= guard(w)),
        }
    }

    pub fn quotient(&self, n: usize) -> RegularizedQuotient<'_> {
        RegularizedQuotient { parent: self, node: n }
    }

    /// Checks `|Q(z_n)| ≤ 1e-12·scale` and `|Q'(z_n)| ≥ 1e-6·scale` where
    /// `scale = max |Q|` over `grid`.
    pub fn certify_simple_zeros(&self, grid: &[C64]) -> Result<()> {
        let scale = grid
            .iter()
            .map(|&z| self.eval(z).norm())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        for (i, &z) in self.nodes.iter().enumerate() {
            let value = self.eval(z).norm();
            let deriv = self.d1[i].norm();
            if value > 1e-12 * scale || deriv < 1e-6 * scale {
                return Err(Error::NotSimpleZero {
                    index: i,
                    node: z,
                    value,
                    deriv,
                });
            }
        }
        Ok(())
    }
}

/// `Q(z)/(z - z_n)` for one fixed node.
#[derive(Debug, Clone, Copy)]
pub struct RegularizedQuotient<'a> {
    parent: &'a ScalarEntire,
    node: usize,
}

impl RegularizedQuotient<'_> {
    pub fn node_index(&self) -> usize {
        self.node
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.parent.reg_quotient(z, self.node)
    }
}

fn genus_one_factor<S: Scalar>(z: S, r: C64) -> S {
    let t = z.scale(1.0 / r);
    (S::one() - t) * t.exp()
}

/// `d/dz ∏ f_k(z)` from per-factor `(f_k, f_k')` via prefix/suffix products.
fn product_rule<S: Scalar>(z: S, zeros: &[C64], factor: impl Fn(S, C64) -> (S, S)) -> S {
    let parts: Vec<(S, S)> = zeros.iter().map(|&r| factor(z, r)).collect();
    let n = parts.len();
    let mut prefix = vec![S::one(); n + 1];
    for k in 0..n {
        prefix[k + 1] = prefix[k] * parts[k].0;
    }
    let mut suffix = S::one();
    let mut total = S::zero();
    for k in (0..n).rev() {
        total = total + prefix[k] * parts[k].1 * suffix;
        suffix = suffix * parts[k].0;
    }
    total
}

fn check_distinct(points: &[C64]) -> Result<()> {
    for i in 0..points.len() {
        for j in 0..i {
            if (points[i] - points[j]).norm() == 0.0 {
                return Err(Error::InvalidInput(format!(
                    "nodes {j} and {i} coincide at {}",
                    points[i]
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn r(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn ints(v: &[i32]) -> Vec<C64> {
        v.iter().map(|&x| r(x as f64)).collect()
    }

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn eval_examples() {
        let s = ScalarEntire::sin_pi(ints(&[0, 1, -1])).unwrap();
        assert!(s.eval(r(0.0)).norm() < 1e-300);
        assert!(close(s.eval(r(0.5)), r(1.0 / PI), 1e-15));
        let p = ScalarEntire::poly_from_roots(ints(&[1, 2])).unwrap();
        assert_eq!(p.eval(r(3.0)), r(2.0));
    }

    #[test]
    fn deriv_examples() {
        let s = ScalarEntire::sin_pi(ints(&[0, 1, 2, 3])).unwrap();
        for n in 0..4 {
            let expected = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert!(close(s.deriv(r(n as f64)), r(expected), 1e-15));
        }
        let p = ScalarEntire::poly_from_roots(ints(&[1, 2])).unwrap();
        assert_eq!(p.deriv(r(1.0)), r(-1.0));
        let z = ScalarEntire::poly_from_roots(ints(&[0])).unwrap();
        assert_eq!(z.deriv(r(5.0)), r(1.0));
    }

    #[test]
    fn reg_quotient_examples() {
        let s = ScalarEntire::sin_pi(ints(&[0])).unwrap();
        assert!(close(s.reg_quotient(r(0.0), 0), r(1.0), 1e-15));
        assert!(close(s.reg_quotient(r(0.5), 0), r(2.0 / PI), 1e-15));
        let p = ScalarEntire::poly_from_roots(ints(&[1, 2])).unwrap();
        assert!(close(p.reg_quotient(r(3.0), 0), r(1.0), 1e-15));
        assert!(close(p.quotient(0).eval(r(3.0)), r(1.0), 1e-15));
    }

    #[test]
    fn truncated_product_matches_closed_form() {
        // (1 - z)e^z (1 + z)e^{-z} = 1 - z²
        let q = ScalarEntire::truncated_product(vec![r(1.0), r(-1.0)], vec![], None).unwrap();
        let z = C64::new(0.3, 0.8);
        assert!(close(q.eval(z), r(1.0) - z * z, 1e-14));
        assert!(close(q.deriv(z), -z * 2.0, 1e-14));
        assert!(close(q.second_deriv(z), r(-2.0), 1e-13));
        assert!(close(q.node_deriv(0), r(-2.0), 1e-14));
    }

    #[test]
    fn truncated_product_keeps_tail_up_to_truncation() {
        let q = ScalarEntire::truncated_product(ints(&[1, 2]), ints(&[3, 4, 5, 6, 7, 8, 9]), None)
            .unwrap();
        assert_eq!(q.product_zeros().len(), 8);
        let q = ScalarEntire::truncated_product(ints(&[1, 2]), ints(&[3]), Some(3)).unwrap();
        assert_eq!(q.product_zeros().len(), 3);
        assert!(ScalarEntire::truncated_product(ints(&[1, 2]), vec![], Some(1)).is_err());
        assert!(ScalarEntire::truncated_product(ints(&[0, 2]), vec![], None).is_err());
    }

    #[test]
    fn rejects_bad_nodes() {
        assert!(ScalarEntire::poly_from_roots(ints(&[1, 1])).is_err());
        assert!(ScalarEntire::sin_pi(vec![r(0.5)]).is_err());
        assert!(ScalarEntire::poly_from_roots(vec![]).is_err());
    }

    fn sample_functions() -> Vec<ScalarEntire> {
        vec![
            ScalarEntire::sin_pi(ints(&[-2, -1, 0, 1, 2])).unwrap(),
            ScalarEntire::poly_from_roots(ints(&[1, 2, 3, 4, 5])).unwrap(),
            ScalarEntire::truncated_product(ints(&[1, -2, 3]), ints(&[-4, 5]), None).unwrap(),
        ]
    }

    #[test]
    fn simple_zero_certificate() {
        for q in sample_functions() {
            let lo = q.nodes().iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
            let hi = q.nodes().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
            let grid = crate::grid::linspace(lo - 2.0, hi + 2.0, 20);
            q.certify_simple_zeros(&grid).unwrap();
        }
        // A double zero is not certified.
        let q = ScalarEntire::truncated_product(ints(&[1]), ints(&[2]), None).unwrap();
        assert!(q.certify_simple_zeros(&crate::grid::linspace(0.0, 3.0, 20)).is_ok());
    }

    #[test]
    fn continuity_across_pole_guard() {
        for q in sample_functions() {
            for n in 0..q.nodes().len() {
                let delta = q.pole_radius(n) / 2.0;
                for dir in [r(1.0), r(-1.0), C64::i(), -C64::i()] {
                    let zn = q.nodes()[n];
                    let a = q.reg_quotient(zn + dir * delta, n);
                    let b = q.reg_quotient(zn - dir * delta, n);
                    // Remove the genuine first-order change Q''(z_n)/2 · 2δ.
                    let slope = q.node_second_deriv(n) * 0.5;
                    let jump = a - b - slope * dir * 2.0 * delta;
                    assert!(jump.norm() <= 1e-8, "{:?} node {n}", q.variant());
                    // Inside the guard the Taylor value matches the direct quotient.
                    let z = zn + dir * 0.999 * q.pole_radius(n);
                    let direct = q.eval(z) / (z - zn);
                    let inside = q.reg_quotient(z, n);
                    assert!((direct - inside).norm() <= 1e-8 * (1.0 + inside.norm()));
                }
            }
        }
    }

    #[test]
    fn deriv_matches_central_difference() {
        let mut rng = crate::seeded_rng(11);
        for q in sample_functions() {
            for _ in 0..20 {
                let z = C64::new(rng.random_range(-3.0..3.0), rng.random_range(-1.0..1.0));
                let h = 1e-6;
                let fd = (q.eval(z + h) - q.eval(z - h)) / (2.0 * h);
                let d = q.deriv(z);
                assert!((d - fd).norm() <= 1e-7 * d.norm().max(1.0), "{:?}", q.variant());
            }
        }
    }
}
