//! Real multipolynomials on finite-dimensional lp spaces.
//!
//! A multipolynomial with block degrees (n_1,...,n_m) takes m vector
//! arguments and is n_i-homogeneous in the i-th argument. Coefficients are
//! stored sparsely, keyed by the canonical sorted multi-index; zero
//! coefficients are never stored.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the number of stored terms.
pub const DEFAULT_TERM_LIMIT: usize = 10_000_000;

/// Block degrees (n_1,...,n_m) of a multipolynomial.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BlockDegrees(Vec<usize>);

impl BlockDegrees {
    pub fn new(degrees: Vec<usize>) -> Result<Self> {
        if degrees.is_empty() {
            return Err(Error::InvalidParameter("degrees must be nonempty".into()));
        }
        if degrees.contains(&0) {
            return Err(Error::InvalidParameter("every block degree must be >= 1".into()));
        }
        Ok(BlockDegrees(degrees))
    }

    /// Number of blocks m.
    pub fn num_blocks(&self) -> usize {
        self.0.len()
    }

    /// Total degree M = n_1 + ... + n_m.
    pub fn total_degree(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn degree(&self, block: usize) -> usize {
        self.0[block]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

impl fmt::Display for BlockDegrees {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|d| d.to_string()).collect();
        write!(f, "{}", parts.join("+"))
    }
}

/// One monomial identifier: per-block exponent vectors.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(pub Vec<Vec<u32>>);

impl MultiIndex {
    pub fn blocks(&self) -> &[Vec<u32>] {
        &self.0
    }

    /// |alpha^(i)| for one block.
    pub fn block_degree(&self, block: usize) -> u32 {
        self.0[block].iter().sum()
    }

    /// True if every exponent is 0 or 1.
    pub fn is_multi_affine(&self) -> bool {
        self.0.iter().flatten().all(|&a| a <= 1)
    }

    fn conforms(&self, degrees: &BlockDegrees, dims: &[usize]) -> bool {
        self.0.len() == degrees.num_blocks()
            && self
                .0
                .iter()
                .enumerate()
                .all(|(i, b)| b.len() == dims[i] && self.block_degree(i) as usize == degrees.degree(i))
    }
}

/// Evaluation argument: one real vector per block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(pub Vec<Vec<f64>>);

impl Point {
    pub fn zeros(dims: &[usize]) -> Self {
        Point(dims.iter().map(|&d| vec![0.0; d]).collect())
    }

    pub fn ones(dims: &[usize]) -> Self {
        Point(dims.iter().map(|&d| vec![1.0; d]).collect())
    }

    /// Basis point: unit entry `index[i]` in block i, zeros elsewhere.
    pub fn basis(dims: &[usize], index: &[usize]) -> Self {
        let mut p = Point::zeros(dims);
        for (i, &j) in index.iter().enumerate() {
            p.0[i][j] = 1.0;
        }
        p
    }

    pub fn blocks(&self) -> &[Vec<f64>] {
        &self.0
    }

    pub fn dims(&self) -> Vec<usize> {
        self.0.iter().map(|b| b.len()).collect()
    }
}

/// Sparse multipolynomial with real coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Multipolynomial {
    degrees: BlockDegrees,
    dims: Vec<usize>,
    terms: BTreeMap<MultiIndex, f64>,
    term_limit: usize,
}

impl Multipolynomial {
    /// Zero polynomial with the given shape.
    pub fn new(degrees: BlockDegrees, dims: Vec<usize>) -> Result<Self> {
        if dims.len() != degrees.num_blocks() {
            return Err(Error::DimensionMismatch(format!(
                "{} blocks but {} dims",
                degrees.num_blocks(),
                dims.len()
            )));
        }
        if dims.contains(&0) {
            return Err(Error::InvalidParameter("every block dimension must be >= 1".into()));
        }
        Ok(Multipolynomial {
            degrees,
            dims,
            terms: BTreeMap::new(),
            term_limit: DEFAULT_TERM_LIMIT,
        })
    }

    pub fn with_term_limit(mut self, limit: usize) -> Self {
        self.term_limit = limit;
        self
    }

    /// Set the coefficient of one monomial. A zero coefficient removes the
    /// term; the stored map never holds exact zeros.
    pub fn set_term(&mut self, alpha: MultiIndex, coeff: f64) -> Result<()> {
        if !alpha.conforms(&self.degrees, &self.dims) {
            return Err(Error::DimensionMismatch(format!(
                "multi-index {:?} does not conform to degrees {} / dims {:?}",
                alpha, self.degrees, self.dims
            )));
        }
        if coeff == 0.0 {
            self.terms.remove(&alpha);
            return Ok(());
        }
        if !self.terms.contains_key(&alpha) && self.terms.len() >= self.term_limit {
            return Err(Error::BudgetExceeded(format!(
                "term limit {} reached",
                self.term_limit
            )));
        }
        self.terms.insert(alpha, coeff);
        Ok(())
    }

    pub fn degrees(&self) -> &BlockDegrees {
        &self.degrees
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in canonical sorted multi-index order.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, f64)> {
        self.terms.iter().map(|(a, &c)| (a, c))
    }

    pub fn coefficient(&self, alpha: &MultiIndex) -> f64 {
        self.terms.get(alpha).copied().unwrap_or(0.0)
    }

    /// True if every exponent of every stored term is 0 or 1.
    pub fn is_multi_affine(&self) -> bool {
        self.terms.keys().all(|a| a.is_multi_affine())
    }

    /// Scale every coefficient in place. Scaling by zero empties the map.
    pub fn scale(&mut self, t: f64) {
        if t == 0.0 {
            self.terms.clear();
        } else {
            for c in self.terms.values_mut() {
                *c *= t;
            }
        }
    }

    fn check_point(&self, x: &Point) -> Result<()> {
        if x.dims() != self.dims {
            return Err(Error::DimensionMismatch(format!(
                "point dims {:?} vs polynomial dims {:?}",
                x.dims(),
                self.dims
            )));
        }
        Ok(())
    }

    /// Evaluate at a point. Terms are summed in sorted multi-index order so
    /// the result is bit-reproducible.
    pub fn evaluate(&self, x: &Point) -> Result<f64> {
        self.check_point(x)?;
        let mut total = 0.0;
        for (alpha, coeff) in self.terms() {
            total += coeff * monomial_value(alpha, x);
        }
        Ok(total)
    }

    /// Analytic gradient at a point, one vector per block.
    pub fn gradient(&self, x: &Point) -> Result<Point> {
        self.check_point(x)?;
        let mut grad = Point::zeros(&self.dims);
        for (alpha, coeff) in self.terms() {
            // Active factors of this monomial: (block, coord, exponent).
            let active: Vec<(usize, usize, u32)> = alpha
                .blocks()
                .iter()
                .enumerate()
                .flat_map(|(i, b)| {
                    b.iter()
                        .enumerate()
                        .filter(|(_, &a)| a > 0)
                        .map(move |(j, &a)| (i, j, a))
                })
                .collect();
            for &(bi, bj, a) in &active {
                let mut d = coeff * a as f64 * x.0[bi][bj].powi(a as i32 - 1);
                for &(oi, oj, oa) in &active {
                    if (oi, oj) != (bi, bj) {
                        d *= x.0[oi][oj].powi(oa as i32);
                    }
                }
                grad.0[bi][bj] += d;
            }
        }
        Ok(grad)
    }

    /// Check the per-slot homogeneity identity P(..., t*x_i, ...) = t^{n_i} P(x)
    /// at relative tolerance 1e-12.
    pub fn scale_homogeneity_check(&self, x: &Point, block: usize, t: f64) -> Result<bool> {
        self.check_point(x)?;
        let base = self.evaluate(x)?;
        let mut scaled = x.clone();
        for v in &mut scaled.0[block] {
            *v *= t;
        }
        let lhs = self.evaluate(&scaled)?;
        let rhs = t.powi(self.degrees.degree(block) as i32) * base;
        Ok(rel_close(lhs, rhs, 1e-12))
    }

    /// Coefficient l_s value (sum |c|^s)^(1/s); a quasi-norm for s < 1.
    pub fn coeff_ls_value(&self, s: f64) -> Result<f64> {
        if !(s > 0.0) {
            return Err(Error::InvalidParameter(format!("s must be positive, got {s}")));
        }
        let sum: f64 = self.terms.values().map(|c| c.abs().powf(s)).sum();
        Ok(sum.powf(1.0 / s))
    }

    /// Sorted list of |c| values (the coefficient multiset).
    pub fn abs_coeff_multiset(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.terms.values().map(|c| c.abs()).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }
}

fn monomial_value(alpha: &MultiIndex, x: &Point) -> f64 {
    let mut prod = 1.0;
    for (bi, block) in alpha.blocks().iter().enumerate() {
        for (bj, &a) in block.iter().enumerate() {
            if a > 0 {
                prod *= x.0[bi][bj].powi(a as i32);
            }
        }
    }
    prod
}

pub(crate) fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    let scale = a.abs().max(b.abs()).max(1.0);
    (a - b).abs() <= tol * scale
}

/// One invariant violation found by `validate`.
#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub alpha: MultiIndex,
    pub message: String,
}

/// Report-style validation result.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check every stored monomial against the block-degree and length invariants.
pub fn validate(p: &Multipolynomial) -> ValidationReport {
    let mut violations = Vec::new();
    for (alpha, coeff) in p.terms() {
        if alpha.blocks().len() != p.degrees().num_blocks() {
            violations.push(Violation {
                alpha: alpha.clone(),
                message: format!(
                    "has {} blocks, expected {}",
                    alpha.blocks().len(),
                    p.degrees().num_blocks()
                ),
            });
            continue;
        }
        for i in 0..p.degrees().num_blocks() {
            if alpha.blocks()[i].len() != p.dims()[i] {
                violations.push(Violation {
                    alpha: alpha.clone(),
                    message: format!(
                        "block {} has length {}, expected {}",
                        i,
                        alpha.blocks()[i].len(),
                        p.dims()[i]
                    ),
                });
            } else if alpha.block_degree(i) as usize != p.degrees().degree(i) {
                violations.push(Violation {
                    alpha: alpha.clone(),
                    message: format!(
                        "|alpha^({})| = {}, expected {}",
                        i,
                        alpha.block_degree(i),
                        p.degrees().degree(i)
                    ),
                });
            }
        }
        if coeff == 0.0 {
            violations.push(Violation {
                alpha: alpha.clone(),
                message: "stored coefficient is exactly zero".into(),
            });
        }
    }
    ValidationReport { violations }
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    alpha: Vec<Vec<u32>>,
    coeff: f64,
}

#[derive(Serialize, Deserialize)]
struct PolyJson {
    degrees: Vec<usize>,
    dims: Vec<usize>,
    terms: Vec<TermJson>,
}

impl Serialize for Multipolynomial {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let json = PolyJson {
            degrees: self.degrees.as_slice().to_vec(),
            dims: self.dims.clone(),
            terms: self
                .terms()
                .map(|(a, c)| TermJson {
                    alpha: a.0.clone(),
                    coeff: c,
                })
                .collect(),
        };
        json.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Multipolynomial {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let json = PolyJson::deserialize(de)?;
        let degrees = BlockDegrees::new(json.degrees).map_err(D::Error::custom)?;
        let mut p = Multipolynomial::new(degrees, json.dims).map_err(D::Error::custom)?;
        for t in json.terms {
            p.set_term(MultiIndex(t.alpha), t.coeff).map_err(D::Error::custom)?;
        }
        Ok(p)
    }
}
