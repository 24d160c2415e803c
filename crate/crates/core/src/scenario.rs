//! JSON scenario files. Complex numbers are `[re, im]` pairs, vectors are
//! lists of pairs and matrices are lists of rows.

use std::collections::HashSet;
use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;

use crate::debranges::{DeBrangesOperator, OperatorEntire};
use crate::entire::{ScalarEntire, Variant};
use crate::grid::GridSpec;
use crate::hilbert::{HilbertVector, LinearOperator};
use crate::kernels::{self, Eigenspace, Family, KernelFunction};
use crate::sampling::SampleSet;
use crate::{Error, Result, C64};

pub type Complex = [f64; 2];

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub dimension: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(rename = "Q", default)]
    pub q: Option<QSpec>,
    pub kernel: KernelSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub betas: Option<Vec<Complex>>,
    #[serde(default)]
    pub truncations: Option<Vec<usize>>,
    #[serde(default)]
    pub noise: f64,
    /// Coefficients of the function reconstructed by `reconstruct`/`sweep`;
    /// a seeded random vector when absent.
    #[serde(default)]
    pub f: Option<Vec<Complex>>,
    #[serde(default)]
    pub samples: Option<Vec<SampleSpec>>,
    #[serde(default)]
    pub debranges: Option<DeBrangesSpec>,
    #[serde(default)]
    pub expect: Expect,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QSpec {
    pub variant: Variant,
    pub nodes: Vec<Complex>,
    #[serde(default)]
    pub tail: Vec<Complex>,
    #[serde(default)]
    pub truncation: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    pub family: Family,
    /// Sampling nodes; distinct eigenvalues for `resolvent`. Defaults to
    /// the nodes of `Q`.
    #[serde(default)]
    pub nodes: Option<Vec<Complex>>,
    #[serde(default)]
    pub multiplicities: Option<Vec<usize>>,
    #[serde(default)]
    pub c: Option<Vec<Complex>>,
    /// Orthonormal basis, one vector per entry; the standard basis when
    /// absent.
    #[serde(default)]
    pub basis: Option<Vec<Vec<Complex>>>,
    /// `matrix_poly` coefficients `C_0, C_1, ...`, each a list of rows.
    #[serde(default)]
    pub coefficients: Option<Vec<Vec<Vec<Complex>>>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSpec {
    pub n: usize,
    pub value: Vec<Complex>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "snake_case")]
pub enum EntireSpec {
    ScalarExp {
        #[serde(default = "one")]
        scale: Complex,
        rate: Complex,
    },
    MatrixPoly {
        coefficients: Vec<Vec<Vec<Complex>>>,
    },
}

fn one() -> Complex {
    [1.0, 0.0]
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeBrangesSpec {
    #[serde(rename = "E_plus")]
    pub e_plus: EntireSpec,
    #[serde(rename = "E_minus")]
    pub e_minus: EntireSpec,
    /// Upper half-plane point for the space battery and `beta_star`.
    #[serde(default)]
    pub beta: Option<Complex>,
    /// Gram points for the positivity check.
    #[serde(default)]
    pub points: Option<Vec<Complex>>,
    /// Skip the invertibility and self-adjointness checks (controls).
    #[serde(default)]
    pub unchecked: bool,
}

/// Expected outcomes; an absent entry means "must pass".
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expect {
    #[serde(default)]
    pub certify: Option<bool>,
    #[serde(default)]
    pub factorizable: Option<bool>,
    #[serde(default)]
    pub invariant: Option<bool>,
    #[serde(default)]
    pub positive: Option<bool>,
    #[serde(default)]
    pub verdict: Option<crate::debranges::Verdict>,
}

pub fn c(p: Complex) -> C64 {
    C64::new(p[0], p[1])
}

fn cs(ps: &[Complex]) -> Vec<C64> {
    ps.iter().map(|&p| c(p)).collect()
}

fn schema(msg: impl Into<String>) -> Error {
    Error::Scenario(msg.into())
}

fn vector(d: usize, coords: &[Complex], what: &str) -> Result<HilbertVector> {
    if coords.len() != d {
        return Err(schema(format!("{what} has {} entries, expected {d}", coords.len())));
    }
    Ok(HilbertVector::from_vec(cs(coords)))
}

fn matrix(d: usize, rows: &[Vec<Complex>], what: &str) -> Result<LinearOperator> {
    if rows.len() != d || rows.iter().any(|r| r.len() != d) {
        return Err(schema(format!("{what} must be {d}x{d}")));
    }
    let flat: Vec<C64> = rows.iter().flat_map(|r| cs(r)).collect();
    LinearOperator::from_rows(d, &flat)
}

fn entire(d: usize, spec: &EntireSpec, what: &str) -> Result<OperatorEntire> {
    Ok(match spec {
        EntireSpec::ScalarExp { scale, rate } => OperatorEntire::ScalarExp {
            dim: d,
            scale: c(*scale),
            rate: c(*rate),
        },
        EntireSpec::MatrixPoly { coefficients } => {
            if coefficients.is_empty() {
                return Err(schema(format!("{what} has no coefficients")));
            }
            OperatorEntire::MatrixPoly(
                coefficients
                    .iter()
                    .map(|m| matrix(d, m, what))
                    .collect::<Result<_>>()?,
            )
        }
    })
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Parses and checks dimensions; the kernel itself is built lazily.
    pub fn parse(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        let d = self.dimension;
        if d == 0 {
            return Err(schema("dimension must be positive"));
        }
        let k = &self.kernel;
        if let Some(basis) = &k.basis {
            if basis.len() != d {
                return Err(schema(format!("basis has {} vectors, expected {d}", basis.len())));
            }
        }
        let nodes = self.kernel_nodes()?;
        match k.family {
            Family::Resolvent => {
                let mult = self.multiplicities(nodes.len());
                if mult.iter().sum::<usize>() != d {
                    return Err(schema(format!("multiplicities sum to {}, expected {d}", mult.iter().sum::<usize>())));
                }
            }
            Family::MatrixPoly => {
                if k.coefficients.as_ref().is_none_or(|c| c.is_empty()) {
                    return Err(schema("matrix_poly kernel needs coefficients"));
                }
                if !nodes.is_empty() && nodes.len() != d {
                    return Err(schema(format!("{} nodes for dimension {d}", nodes.len())));
                }
            }
            _ => {
                if nodes.len() != d {
                    return Err(schema(format!("{} nodes for dimension {d}", nodes.len())));
                }
            }
        }
        if let Some(c) = &k.c {
            if c.len() != nodes.len() {
                return Err(schema(format!("{} values of c for {} nodes", c.len(), nodes.len())));
            }
        }
        if let Some(f) = &self.f {
            vector(d, f, "f")?;
        }
        if let Some(samples) = &self.samples {
            let mut seen = HashSet::new();
            for s in samples {
                vector(d, &s.value, "sample")?;
                if s.n >= d || !seen.insert(s.n) {
                    return Err(schema(format!("sample index {} is out of range or repeated", s.n)));
                }
            }
        }
        if self.noise < 0.0 || !self.noise.is_finite() {
            return Err(schema("noise must be a nonnegative number"));
        }
        if let Some(db) = &self.debranges {
            if let Some(b) = db.beta {
                if b[1] <= 0.0 {
                    return Err(schema("debranges.beta must lie in the upper half-plane"));
                }
            }
        }
        Ok(())
    }

    fn kernel_nodes(&self) -> Result<Vec<C64>> {
        match (&self.kernel.nodes, &self.q) {
            (Some(n), _) => Ok(cs(n)),
            (None, Some(q)) => Ok(cs(&q.nodes)),
            (None, None) if self.kernel.family == Family::MatrixPoly => Ok(Vec::new()),
            (None, None) => Err(schema("kernel needs nodes or a Q specification")),
        }
    }

    fn multiplicities(&self, count: usize) -> Vec<usize> {
        self.kernel.multiplicities.clone().unwrap_or_else(|| vec![1; count])
    }

    pub fn basis(&self) -> Result<Vec<HilbertVector>> {
        match &self.kernel.basis {
            Some(b) => b
                .iter()
                .map(|v| vector(self.dimension, v, "basis vector"))
                .collect(),
            None => Ok(kernels::standard_basis(self.dimension)),
        }
    }

    pub fn build_q(&self) -> Result<Option<ScalarEntire>> {
        let Some(q) = &self.q else { return Ok(None) };
        let nodes = cs(&q.nodes);
        Ok(Some(match q.variant {
            Variant::SinPi => ScalarEntire::sin_pi(nodes)?,
            Variant::PolyRoots => ScalarEntire::poly_from_roots(nodes)?,
            Variant::TruncProduct => ScalarEntire::truncated_product(nodes, cs(&q.tail), q.truncation)?,
        }))
    }

    pub fn build_kernel(&self) -> Result<Arc<KernelFunction>> {
        let nodes = self.kernel_nodes()?;
        let basis = self.basis()?;
        let need_q = || {
            self.build_q()?
                .ok_or_else(|| schema(format!("{:?} kernel needs Q", self.kernel.family)))
        };
        let kernel = match self.kernel.family {
            Family::Zayed => kernels::build_zayed(need_q()?, nodes, basis)?,
            Family::Resolvent => {
                let mut vectors = basis.into_iter();
                let spectrum = nodes
                    .iter()
                    .zip(self.multiplicities(nodes.len()))
                    .map(|(&node, k)| Eigenspace {
                        node,
                        vectors: vectors.by_ref().take(k).collect(),
                    })
                    .collect();
                kernels::build_resolvent(need_q()?, spectrum)?
            }
            Family::RankOneQuasi => {
                let q = need_q()?;
                let c = match &self.kernel.c {
                    Some(c) => cs(c),
                    None => nodes.iter().map(|&z| q.deriv(z)).collect(),
                };
                kernels::build_rank_one_quasi(q, nodes, basis, c)?
            }
            Family::MatrixPoly => {
                let coeffs = self
                    .kernel
                    .coefficients
                    .as_deref()
                    .unwrap_or_default()
                    .iter()
                    .map(|m| matrix(self.dimension, m, "kernel coefficient"))
                    .collect::<Result<_>>()?;
                let sampling = (!nodes.is_empty()).then_some((nodes, basis));
                kernels::build_matrix_poly(coeffs, sampling)?
            }
        };
        Ok(Arc::new(kernel))
    }

    pub fn grid_points(&self, kernel: &KernelFunction) -> Vec<C64> {
        self.grid.build(&kernel.distinct_nodes())
    }

    pub fn f_coeff(&self) -> Option<HilbertVector> {
        self.f.as_ref().map(|f| HilbertVector::from_vec(cs(f)))
    }

    pub fn sample_set(&self) -> Option<SampleSet> {
        self.samples.as_ref().map(|s| {
            SampleSet::new(
                s.iter()
                    .map(|x| (x.n, HilbertVector::from_vec(cs(&x.value))))
                    .collect(),
            )
        })
    }

    pub fn betas(&self) -> Option<Vec<C64>> {
        self.betas.as_ref().map(|b| cs(b))
    }

    pub fn debranges_operator(&self, probes: &[C64]) -> Result<Option<DeBrangesOperator>> {
        let Some(db) = &self.debranges else { return Ok(None) };
        let d = match (&db.e_plus, &db.e_minus) {
            (EntireSpec::ScalarExp { .. }, EntireSpec::ScalarExp { .. }) => 1,
            _ => self.dimension,
        };
        let plus = entire(d, &db.e_plus, "E_plus")?;
        let minus = entire(d, &db.e_minus, "E_minus")?;
        let beta = db.beta.map(c);
        let op = if db.unchecked {
            DeBrangesOperator::unchecked(plus, minus, beta)?
        } else {
            DeBrangesOperator::new(plus, minus, beta, probes)?
        };
        Ok(Some(op))
    }

    pub fn debranges_points(&self) -> Option<Vec<C64>> {
        self.debranges.as_ref().and_then(|d| d.points.as_ref()).map(|p| cs(p))
    }
}

/// Reads a list of `[re, im]` pairs.
pub fn load_betas(path: &Path) -> Result<Vec<C64>> {
    let text = std::fs::read_to_string(path)?;
    let raw: Vec<Complex> = serde_json::from_str(&text)?;
    Ok(cs(&raw))
}
