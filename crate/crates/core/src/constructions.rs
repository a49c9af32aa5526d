//! Random-sign multilinear forms, diagonal forms, and the folding maps that
//! relocate their arguments into disjoint coordinate blocks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::poly::{BlockDegrees, MultiIndex, Multipolynomial};

/// Default dense-storage budget: n^M entries.
pub const DEFAULT_TENSOR_BUDGET: u64 = 1 << 24;

/// An order-M coefficient tensor with entries in {-1, 0, 1}, stored dense.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignTensor {
    order: usize,
    dim: usize,
    entries: Vec<i8>,
    seed: Option<u64>,
    nonzeros: usize,
}

impl SignTensor {
    fn check_budget(dim: usize, order: usize) -> Result<u64> {
        if dim == 0 || order == 0 {
            return Err(Error::InvalidParameter("n and M must be >= 1".into()));
        }
        let mut total: u64 = 1;
        for _ in 0..order {
            total = total
                .checked_mul(dim as u64)
                .filter(|&t| t <= DEFAULT_TENSOR_BUDGET)
                .ok_or_else(|| {
                    Error::BudgetExceeded(format!(
                        "{dim}^{order} entries exceed the dense budget {DEFAULT_TENSOR_BUDGET}"
                    ))
                })?;
        }
        Ok(total)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn nonzero_count(&self) -> usize {
        self.nonzeros
    }

    pub fn entry(&self, index: &[usize]) -> i8 {
        self.entries[self.flat(index)]
    }

    fn flat(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.order);
        index.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    /// Nonzero entries as (index vector, sign), in row-major order.
    pub fn nonzero_entries(&self) -> impl Iterator<Item = (Vec<usize>, i8)> + '_ {
        self.entries.iter().enumerate().filter(|(_, &v)| v != 0).map(move |(flat, &v)| {
            let mut idx = vec![0usize; self.order];
            let mut rem = flat;
            for k in (0..self.order).rev() {
                idx[k] = rem % self.dim;
                rem /= self.dim;
            }
            (idx, v)
        })
    }

    /// View as an M-block (1,...,1)-multipolynomial on dimension n per block.
    pub fn to_multipolynomial(&self) -> Result<Multipolynomial> {
        let degrees = BlockDegrees::new(vec![1; self.order])?;
        let mut p = Multipolynomial::new(degrees, vec![self.dim; self.order])?;
        for (idx, sign) in self.nonzero_entries() {
            let mut alpha = vec![vec![0u32; self.dim]; self.order];
            for (k, &i) in idx.iter().enumerate() {
                alpha[k][i] = 1;
            }
            p.set_term(MultiIndex(alpha), sign as f64)?;
        }
        Ok(p)
    }

    /// Exact sup-norm over products of l1 unit balls: the extreme points are
    /// signed basis vectors, so the norm is max |T(e_{j_1},...,e_{j_M})|.
    pub fn l1_ball_norm(&self) -> f64 {
        self.entries.iter().map(|v| v.abs() as f64).fold(0.0, f64::max)
    }
}

/// Sample i.i.d. uniform +-1 entries for all n^M positions.
pub fn ksz_sample(n: usize, order: usize, seed: u64) -> Result<SignTensor> {
    let total = SignTensor::check_budget(n, order)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries: Vec<i8> = (0..total).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
    Ok(SignTensor {
        order,
        dim: n,
        nonzeros: entries.len(),
        entries,
        seed: Some(seed),
    })
}

/// Diagonal form T_n: entry 1 at (i,...,i) for i < n, zero elsewhere.
pub fn diagonal_form(n: usize, order: usize) -> Result<SignTensor> {
    let total = SignTensor::check_budget(n, order)?;
    let mut entries = vec![0i8; total as usize];
    let mut stride = 0u64;
    let mut pow = 1u64;
    for _ in 0..order {
        stride += pow;
        pow *= n as u64;
    }
    for i in 0..n as u64 {
        entries[(i * stride) as usize] = 1;
    }
    Ok(SignTensor {
        order,
        dim: n,
        entries,
        seed: None,
        nonzeros: n,
    })
}

/// KSZ sup-norm scale n^max{M(1/2 - 1/p) + 1/2, 1 - 1/p}; the multiplying
/// constant C_M is not included.
pub fn ksz_bound(n: usize, order: usize, p: f64) -> Result<f64> {
    if n == 0 || order == 0 {
        return Err(Error::InvalidParameter("n and M must be >= 1".into()));
    }
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidParameter(format!("p must be >= 1, got {p}")));
    }
    Ok((n as f64).powf(crate::exponents::ksz_exponent(order, p)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FoldDirection {
    MultilinearToPoly,
    MultilinearToMultipoly,
    MultipolyToPoly,
}

/// Finitely truncated partition of the index set: each source slot is mapped
/// onto a contiguous coordinate range of its target block.
#[derive(Debug, Clone)]
pub struct PartitionScheme {
    pub direction: FoldDirection,
    /// Dimension of each source slot.
    pub slot_dims: Vec<usize>,
    /// Target block -> ordered list of source slot ids it absorbs.
    pub groups: Vec<Vec<usize>>,
}

impl PartitionScheme {
    /// All M slots of a multilinear form into one block.
    pub fn contiguous_to_poly(order: usize, slot_dim: usize) -> Self {
        PartitionScheme {
            direction: FoldDirection::MultilinearToPoly,
            slot_dims: vec![slot_dim; order],
            groups: vec![(0..order).collect()],
        }
    }

    /// M slots grouped into m blocks of sizes n_1,...,n_m, in order.
    pub fn contiguous_to_multipoly(degrees: &BlockDegrees, slot_dim: usize) -> Self {
        let mut groups = Vec::new();
        let mut next = 0;
        for i in 0..degrees.num_blocks() {
            let size = degrees.degree(i);
            groups.push((next..next + size).collect());
            next += size;
        }
        PartitionScheme {
            direction: FoldDirection::MultilinearToMultipoly,
            slot_dims: vec![slot_dim; degrees.total_degree()],
            groups,
        }
    }

    /// The m blocks of a multipolynomial into one block.
    pub fn contiguous_multipoly_to_poly(dims: &[usize]) -> Self {
        PartitionScheme {
            direction: FoldDirection::MultipolyToPoly,
            slot_dims: dims.to_vec(),
            groups: vec![(0..dims.len()).collect()],
        }
    }

    fn validate(&self) -> Result<()> {
        let mut seen = vec![false; self.slot_dims.len()];
        for g in &self.groups {
            for &s in g {
                if s >= seen.len() || seen[s] {
                    return Err(Error::SchemeMismatch(format!(
                        "slot {s} missing or assigned twice"
                    )));
                }
                seen[s] = true;
            }
        }
        if seen.iter().any(|&v| !v) {
            return Err(Error::SchemeMismatch("not all slots covered".into()));
        }
        Ok(())
    }

    /// (target block, coordinate offset within it) for one source slot.
    fn placement(&self, slot: usize) -> (usize, usize) {
        for (b, g) in self.groups.iter().enumerate() {
            let mut off = 0;
            for &s in g {
                if s == slot {
                    return (b, off);
                }
                off += self.slot_dims[s];
            }
        }
        unreachable!("validated scheme covers every slot")
    }

    /// Dimension of each target block.
    pub fn target_dims(&self) -> Vec<usize> {
        self.groups
            .iter()
            .map(|g| g.iter().map(|&s| self.slot_dims[s]).sum())
            .collect()
    }

    /// Split a target point back into per-slot source vectors, inverting the
    /// coordinate relocation.
    pub fn split_point(&self, target: &crate::poly::Point) -> Vec<Vec<f64>> {
        let mut slots = vec![Vec::new(); self.slot_dims.len()];
        for (b, g) in self.groups.iter().enumerate() {
            let mut off = 0;
            for &s in g {
                slots[s] = target.0[b][off..off + self.slot_dims[s]].to_vec();
                off += self.slot_dims[s];
            }
        }
        slots
    }
}

fn check_tensor_scheme(t: &SignTensor, scheme: &PartitionScheme) -> Result<()> {
    scheme.validate()?;
    if scheme.slot_dims.len() != t.order() {
        return Err(Error::SchemeMismatch(format!(
            "{} slots for an order-{} tensor",
            scheme.slot_dims.len(),
            t.order()
        )));
    }
    if scheme.slot_dims.iter().any(|&d| d != t.dim()) {
        return Err(Error::SchemeMismatch("slot dims must equal the tensor dimension".into()));
    }
    Ok(())
}

/// Fold an M-linear sign tensor into a single-block degree-M polynomial on
/// dimension M*d. Term count equals the nonzero count; every exponent is 1.
pub fn fold_multilinear_to_polynomial(
    t: &SignTensor,
    scheme: &PartitionScheme,
) -> Result<Multipolynomial> {
    if scheme.direction != FoldDirection::MultilinearToPoly || scheme.groups.len() != 1 {
        return Err(Error::SchemeMismatch("expected a multilinear->poly scheme".into()));
    }
    check_tensor_scheme(t, scheme)?;
    let dims = scheme.target_dims();
    let mut p = Multipolynomial::new(BlockDegrees::new(vec![t.order()])?, dims)?;
    for (idx, sign) in t.nonzero_entries() {
        let mut alpha = vec![vec![0u32; p.dims()[0]]];
        for (slot, &i) in idx.iter().enumerate() {
            let (_, off) = scheme.placement(slot);
            alpha[0][off + i] = 1;
        }
        p.set_term(MultiIndex(alpha), sign as f64)?;
    }
    Ok(p)
}

/// Fold an M-linear sign tensor into an (n_1,...,n_m)-multipolynomial whose
/// block i absorbs n_i of the M argument slots.
pub fn fold_multilinear_to_multipolynomial(
    t: &SignTensor,
    degrees: &BlockDegrees,
    scheme: &PartitionScheme,
) -> Result<Multipolynomial> {
    if scheme.direction != FoldDirection::MultilinearToMultipoly {
        return Err(Error::SchemeMismatch("expected a multilinear->multipoly scheme".into()));
    }
    check_tensor_scheme(t, scheme)?;
    if scheme.groups.len() != degrees.num_blocks()
        || (0..degrees.num_blocks()).any(|i| scheme.groups[i].len() != degrees.degree(i))
        || degrees.total_degree() != t.order()
    {
        return Err(Error::SchemeMismatch(format!(
            "slot grouping does not match degrees {degrees}"
        )));
    }
    let dims = scheme.target_dims();
    let mut p = Multipolynomial::new(degrees.clone(), dims)?;
    for (idx, sign) in t.nonzero_entries() {
        let mut alpha: Vec<Vec<u32>> = p.dims().iter().map(|&d| vec![0u32; d]).collect();
        for (slot, &i) in idx.iter().enumerate() {
            let (block, off) = scheme.placement(slot);
            alpha[block][off + i] = 1;
        }
        p.set_term(MultiIndex(alpha), sign as f64)?;
    }
    Ok(p)
}

/// Fold an m-block multipolynomial into a one-block degree-M homogeneous
/// polynomial; the coefficient multiset is preserved exactly.
pub fn fold_multipolynomial_to_homogeneous(
    p: &Multipolynomial,
    scheme: &PartitionScheme,
) -> Result<Multipolynomial> {
    if scheme.direction != FoldDirection::MultipolyToPoly || scheme.groups.len() != 1 {
        return Err(Error::SchemeMismatch("expected a multipoly->poly scheme".into()));
    }
    scheme.validate()?;
    if scheme.slot_dims != p.dims() {
        return Err(Error::SchemeMismatch("slot dims must equal the source block dims".into()));
    }
    let total = p.degrees().total_degree();
    let dims = scheme.target_dims();
    let mut q = Multipolynomial::new(BlockDegrees::new(vec![total])?, dims)?;
    for (alpha, coeff) in p.terms() {
        let mut beta = vec![vec![0u32; q.dims()[0]]];
        for (block, exps) in alpha.blocks().iter().enumerate() {
            let (_, off) = scheme.placement(block);
            for (j, &a) in exps.iter().enumerate() {
                beta[0][off + j] = a;
            }
        }
        q.set_term(MultiIndex(beta), coeff)?;
    }
    Ok(q)
}

/// KSZ lower-bound witness: sample an order-M sign tensor and fold it into an
/// (n_1,...,n_m)-multipolynomial with the contiguous scheme. Exactly n^M
/// terms, all +-1.
pub fn ksz_witness(n: usize, degrees: &BlockDegrees, seed: u64) -> Result<Multipolynomial> {
    let t = ksz_sample(n, degrees.total_degree(), seed)?;
    let scheme = PartitionScheme::contiguous_to_multipoly(degrees, n);
    fold_multilinear_to_multipolynomial(&t, degrees, &scheme)
}
