//! Index arithmetic for tensor-product spaces.
//!
//! Basis ordering: party 0 is the most significant factor, so the basis ket
//! `|i₀ i₁ … i_{n-1}⟩` sits at row `Σ_j i_j · Π_{k>j} d_k`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qmatrix::{CMatrix, CVector};

pub fn total_dim(local_dims: &[usize]) -> Result<usize> {
    if local_dims.is_empty() || local_dims.contains(&0) {
        return Err(Error::InvalidParameter(format!(
            "local dimensions must be a nonempty list of positive integers, got {local_dims:?}"
        )));
    }
    local_dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::InvalidParameter("total dimension overflows".into()))
}

/// Per-party digits of a global basis index.
pub fn digits(mut index: usize, local_dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; local_dims.len()];
    for (slot, &d) in out.iter_mut().zip(local_dims).rev() {
        *slot = index % d;
        index /= d;
    }
    out
}

pub fn index_of(digits: &[usize], local_dims: &[usize]) -> usize {
    digits
        .iter()
        .zip(local_dims)
        .fold(0, |acc, (&i, &d)| acc * d + i)
}

/// `a ⊗ b`.
pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    let mut out = CVector::zeros(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i * b.len() + j] = x * y;
        }
    }
    out
}

/// Partial transpose of `m` on the listed zero-based parties.
pub fn partial_transpose(m: &CMatrix, local_dims: &[usize], parties: &[usize]) -> Result<CMatrix> {
    let dim = total_dim(local_dims)?;
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::DimensionMismatch {
            left: m.nrows(),
            right: dim,
        });
    }
    if let Some(&bad) = parties.iter().find(|&&p| p >= local_dims.len()) {
        return Err(Error::InvalidParameter(format!(
            "party {bad} out of range for {} parties",
            local_dims.len()
        )));
    }
    let mut out = CMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    for row in 0..dim {
        let rd = digits(row, local_dims);
        for col in 0..dim {
            let cd = digits(col, local_dims);
            let (mut r2, mut c2) = (rd.clone(), cd.clone());
            for &p in parties {
                r2[p] = cd[p];
                c2[p] = rd[p];
            }
            out[(index_of(&r2, local_dims), index_of(&c2, local_dims))] = m[(row, col)];
        }
    }
    Ok(out)
}

/// Layout of one block of a partition inside the global basis: for every
/// global index, its index within the block.
#[derive(Debug, Clone)]
pub(crate) struct BlockLayout {
    pub block_dim: usize,
    pub block_index: Vec<usize>,
}

impl BlockLayout {
    /// `block` holds zero-based party indices, ascending.
    pub fn new(local_dims: &[usize], block: &[usize]) -> Self {
        let dim: usize = local_dims.iter().product();
        let block_dims: Vec<usize> = block.iter().map(|&p| local_dims[p]).collect();
        let block_index = (0..dim)
            .map(|g| {
                let dg = digits(g, local_dims);
                let bd: Vec<usize> = block.iter().map(|&p| dg[p]).collect();
                index_of(&bd, &block_dims)
            })
            .collect();
        Self {
            block_dim: block_dims.iter().product(),
            block_index,
        }
    }
}

/// Global vector `⊗_j φ_j` for local vectors over the blocks of a partition.
pub(crate) fn assemble_product(layouts: &[BlockLayout], vectors: &[CVector]) -> CVector {
    let dim = layouts.first().map_or(1, |l| l.block_index.len());
    CVector::from_fn(dim, |g, _| {
        layouts
            .iter()
            .zip(vectors)
            .fold(Complex64::new(1.0, 0.0), |acc, (l, v)| {
                acc * v[l.block_index[g]]
            })
    })
}
