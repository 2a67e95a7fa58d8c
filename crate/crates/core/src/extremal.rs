//! Extreme-point oracle: maximize `tr(X σ)` over pure product states of a
//! separability class.
//!
//! Each search is an alternating ascent over the blocks of a partition. With
//! all other blocks fixed, `tr(X σ)` restricted to block `j` is the quadratic
//! form of an effective Hermitian operator `M_j`, maximized exactly by its
//! leading eigenvector. Sweeps therefore never decrease the objective. The
//! result is a lower bound on the true maximum; global optimality is not
//! guaranteed, which is what the random restarts are for.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qmatrix::{hermitian_eig, hermitize, projector, CMatrix, CVector, DensityMatrix};
use crate::rng::StateRng;
use crate::states::random_product_state;
use crate::tensor::{assemble_product, total_dim, BlockLayout};

/// Zero-based party indices of each block, each block ascending.
pub type Blocks = Vec<Vec<usize>>;

/// The convex set a Gilbert run projects onto.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PartitionClass {
    /// Mixtures of product states over every party.
    FullySeparable,
    /// Mixtures of states that are product across some bipartition.
    BiSeparable,
    /// Mixtures of product states over a fixed partition of the parties.
    FixedPartition(Blocks),
}

impl PartitionClass {
    /// Normalizes block order (each block ascending, blocks by smallest member)
    /// and checks the blocks are disjoint, nonempty and contiguous from zero.
    pub fn fixed(blocks: Blocks) -> Result<Self> {
        let blocks = normalize_blocks(blocks);
        let n: usize = blocks.iter().map(Vec::len).sum();
        validate_blocks(&blocks, n)?;
        Ok(PartitionClass::FixedPartition(blocks))
    }

    pub fn validate(&self, n_parties: usize) -> Result<()> {
        match self {
            PartitionClass::FullySeparable => {
                if n_parties == 0 {
                    return Err(Error::InvalidPartition("no parties".into()));
                }
            }
            PartitionClass::BiSeparable => {
                if n_parties < 2 {
                    return Err(Error::InvalidPartition(format!(
                        "bi-separable class needs at least 2 parties, got {n_parties}"
                    )));
                }
            }
            PartitionClass::FixedPartition(blocks) => validate_blocks(blocks, n_parties)?,
        }
        Ok(())
    }

    /// The concrete partitions whose product states generate the class.
    pub fn partitions(&self, n_parties: usize) -> Result<Vec<Blocks>> {
        self.validate(n_parties)?;
        Ok(match self {
            PartitionClass::FullySeparable => vec![(0..n_parties).map(|p| vec![p]).collect()],
            PartitionClass::BiSeparable => enumerate_bipartitions(n_parties)?
                .into_iter()
                .map(|(a, b)| vec![a, b])
                .collect(),
            PartitionClass::FixedPartition(blocks) => vec![blocks.clone()],
        })
    }
}

impl fmt::Display for PartitionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PartitionClass::FullySeparable => f.write_str("full"),
            PartitionClass::BiSeparable => f.write_str("bisep"),
            PartitionClass::FixedPartition(blocks) => {
                f.write_str("partition:")?;
                for (k, block) in blocks.iter().enumerate() {
                    if k > 0 {
                        f.write_str("|")?;
                    }
                    for p in block {
                        write!(f, "{}", p + 1)?;
                    }
                }
                Ok(())
            }
        }
    }
}

fn normalize_blocks(mut blocks: Blocks) -> Blocks {
    for b in blocks.iter_mut() {
        b.sort_unstable();
    }
    blocks.sort_by_key(|b| b.first().copied());
    blocks
}

fn validate_blocks(blocks: &Blocks, n_parties: usize) -> Result<()> {
    if blocks.is_empty() {
        return Err(Error::InvalidPartition("empty partition".into()));
    }
    let mut seen = vec![false; n_parties];
    for block in blocks {
        if block.is_empty() {
            return Err(Error::InvalidPartition("empty block".into()));
        }
        for &p in block {
            if p >= n_parties {
                return Err(Error::InvalidPartition(format!(
                    "party {} out of range for {n_parties} parties",
                    p + 1
                )));
            }
            if seen[p] {
                return Err(Error::InvalidPartition(format!(
                    "party {} appears in more than one block",
                    p + 1
                )));
            }
            seen[p] = true;
        }
    }
    if let Some(missing) = seen.iter().position(|&s| !s) {
        return Err(Error::InvalidPartition(format!(
            "party {} is not covered",
            missing + 1
        )));
    }
    Ok(())
}

/// All unordered bipartitions `(S, S̄)` of `n_parties`, each once.
///
/// `S` is the smaller side (the side holding party 0 when both have equal
/// size); entries are ordered by `|S|`, then lexicographically.
pub fn enumerate_bipartitions(n_parties: usize) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    if n_parties < 2 {
        return Err(Error::InvalidPartition(format!(
            "bipartitions need at least 2 parties, got {n_parties}"
        )));
    }
    if n_parties > 24 {
        return Err(Error::InvalidPartition(format!(
            "{n_parties} parties is too many"
        )));
    }
    let mut subsets: Vec<Vec<usize>> = Vec::new();
    for mask in 1u32..(1u32 << n_parties) - 1 {
        let size = mask.count_ones() as usize;
        let keep = 2 * size < n_parties || (2 * size == n_parties && mask & 1 == 1);
        if keep {
            subsets.push((0..n_parties).filter(|&p| mask >> p & 1 == 1).collect());
        }
    }
    subsets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(subsets
        .into_iter()
        .map(|s| {
            let rest = (0..n_parties).filter(|p| !s.contains(p)).collect();
            (s, rest)
        })
        .collect())
}

/// Knobs for the extreme-point search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    /// Total starting points per partition, the warm start included.
    pub restarts: usize,
    pub max_sweeps: usize,
    /// A start stops once a full sweep gains less than this.
    pub sweep_tol: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            restarts: 5,
            max_sweeps: 50,
            sweep_tol: 1e-10,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.max_sweeps == 0 {
            return Err(Error::InvalidParameter(
                "oracle restarts and max_sweeps must be positive".into(),
            ));
        }
        if self.sweep_tol.is_nan() || self.sweep_tol < 0.0 {
            return Err(Error::InvalidParameter(
                "oracle sweep_tol must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// A pure product state `⊗_j |φ_j⟩` over the blocks of a partition.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductState {
    pub local_dims: Vec<usize>,
    pub blocks: Blocks,
    pub local_vectors: Vec<CVector>,
    /// `tr(X σ)` for the operator `X` this state was optimized against.
    pub value: f64,
}

impl ProductState {
    pub fn global_vector(&self) -> CVector {
        let layouts = layouts(&self.local_dims, &self.blocks);
        assemble_product(&layouts, &self.local_vectors)
    }

    pub fn projector(&self) -> CMatrix {
        projector(&self.global_vector())
    }

    pub fn density_matrix(&self) -> Result<DensityMatrix> {
        DensityMatrix::from_pure(&self.global_vector(), self.local_dims.clone())
    }
}

fn layouts(local_dims: &[usize], blocks: &Blocks) -> Vec<BlockLayout> {
    blocks
        .iter()
        .map(|b| BlockLayout::new(local_dims, b))
        .collect()
}

/// Effective operator on block `j`: `X` contracted with every other block's vector.
fn effective_operator(
    x: &CMatrix,
    layouts: &[BlockLayout],
    vectors: &[CVector],
    j: usize,
) -> CMatrix {
    let dim = x.nrows();
    let own = &layouts[j];
    let coeff: Vec<Complex64> = (0..dim)
        .map(|g| {
            layouts
                .iter()
                .zip(vectors)
                .enumerate()
                .filter(|&(l, _)| l != j)
                .fold(Complex64::new(1.0, 0.0), |acc, (_, (lay, v))| {
                    acc * v[lay.block_index[g]]
                })
        })
        .collect();
    let mut m = CMatrix::zeros(own.block_dim, own.block_dim);
    for col in 0..dim {
        let cj = coeff[col];
        if cj == Complex64::new(0.0, 0.0) {
            continue;
        }
        let b = own.block_index[col];
        for row in 0..dim {
            let ci = coeff[row];
            if ci == Complex64::new(0.0, 0.0) {
                continue;
            }
            m[(own.block_index[row], b)] += ci.conj() * x[(row, col)] * cj;
        }
    }
    hermitize(&m)
}

fn objective(x: &CMatrix, psi: &CVector) -> f64 {
    psi.dotc(&(x * psi)).re
}

/// Alternating ascent from `start`. Returns the final state and the
/// objective before any update followed by its value after every block update.
pub fn ascend_from(
    x: &CMatrix,
    local_dims: &[usize],
    blocks: &Blocks,
    start: Vec<CVector>,
    cfg: &OracleConfig,
) -> Result<(ProductState, Vec<f64>)> {
    let lays = layouts(local_dims, blocks);
    let mut vectors = start;
    let mut value = objective(x, &assemble_product(&lays, &vectors));
    let mut trace = vec![value];
    for _ in 0..cfg.max_sweeps {
        let before = value;
        for j in 0..blocks.len() {
            let m = effective_operator(x, &lays, &vectors, j);
            let eig = hermitian_eig(&m)?;
            let top = eig.eigenvalues.len() - 1;
            vectors[j] = eig.eigenvectors.column(top).into_owned();
            value = eig.eigenvalues[top];
            trace.push(value);
        }
        if value - before < cfg.sweep_tol {
            break;
        }
    }
    Ok((
        ProductState {
            local_dims: local_dims.to_vec(),
            blocks: blocks.clone(),
            local_vectors: vectors,
            value,
        },
        trace,
    ))
}

fn check_operator(x: &CMatrix, local_dims: &[usize]) -> Result<()> {
    let dim = total_dim(local_dims)?;
    if x.nrows() != dim || x.ncols() != dim {
        return Err(Error::DimensionMismatch {
            left: x.nrows(),
            right: dim,
        });
    }
    Ok(())
}

/// Best pure product state over one fixed partition.
///
/// Starts from `warm_start` when it matches `blocks`, plus random product
/// states up to `cfg.restarts` starts in total, and keeps the best result
/// (earliest start on ties).
pub fn best_product_state(
    x: &CMatrix,
    local_dims: &[usize],
    blocks: &Blocks,
    cfg: &OracleConfig,
    warm_start: Option<&ProductState>,
    rng: &mut StateRng,
) -> Result<ProductState> {
    if blocks.is_empty() {
        return Err(Error::InvalidPartition("empty partition".into()));
    }
    cfg.validate()?;
    check_operator(x, local_dims)?;
    validate_blocks(blocks, local_dims.len())?;
    let block_dims: Vec<usize> = blocks
        .iter()
        .map(|b| b.iter().map(|&p| local_dims[p]).product())
        .collect();

    let warm = warm_start.filter(|w| &w.blocks == blocks && w.local_dims == local_dims);
    let mut best: Option<ProductState> = None;
    for k in 0..cfg.restarts {
        let start = match (k, warm) {
            (0, Some(w)) => w.local_vectors.clone(),
            _ => random_product_state(&block_dims, rng),
        };
        let (candidate, _) = ascend_from(x, local_dims, blocks, start, cfg)?;
        if best.as_ref().is_none_or(|b| candidate.value > b.value) {
            best = Some(candidate);
        }
    }
    Ok(best.expect("restarts is positive"))
}

/// Per-partition warm starts carried across the iterations of one run.
#[derive(Debug, Clone, Default)]
pub struct WarmStarts {
    entries: Vec<ProductState>,
}

impl WarmStarts {
    pub fn get(&self, blocks: &Blocks) -> Option<&ProductState> {
        self.entries.iter().find(|p| &p.blocks == blocks)
    }

    pub fn insert(&mut self, state: ProductState) {
        match self.entries.iter_mut().find(|p| p.blocks == state.blocks) {
            Some(slot) => *slot = state,
            None => self.entries.push(state),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Best extreme point of `class` for the functional `σ ↦ tr(X σ)`.
///
/// Bi-separable classes search every bipartition and keep the overall best.
/// `warm` supplies one warm start per partition; it is refreshed with this
/// call's per-partition results after all searches finish.
pub fn best_extreme_point(
    x: &CMatrix,
    local_dims: &[usize],
    class: &PartitionClass,
    cfg: &OracleConfig,
    warm: &mut WarmStarts,
    rng: &mut StateRng,
) -> Result<ProductState> {
    check_operator(x, local_dims)?;
    let partitions = class.partitions(local_dims.len())?;
    let mut results = Vec::with_capacity(partitions.len());
    for blocks in &partitions {
        results.push(best_product_state(
            x,
            local_dims,
            blocks,
            cfg,
            warm.get(blocks),
            rng,
        )?);
    }
    let mut best_index = 0;
    for (k, r) in results.iter().enumerate() {
        if r.value > results[best_index].value {
            best_index = k;
        }
    }
    let best = results[best_index].clone();
    for r in results {
        warm.insert(r);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use crate::states::{ghz, w_state};
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn bipartition_counts_and_order() {
        assert_eq!(enumerate_bipartitions(2).unwrap(), vec![(vec![0], vec![1])]);
        assert_eq!(
            enumerate_bipartitions(3).unwrap(),
            vec![
                (vec![0], vec![1, 2]),
                (vec![1], vec![0, 2]),
                (vec![2], vec![0, 1]),
            ]
        );
        assert_eq!(enumerate_bipartitions(4).unwrap().len(), 7);
        assert_eq!(enumerate_bipartitions(5).unwrap().len(), 15);
        assert!(enumerate_bipartitions(1).is_err());
    }

    #[test]
    fn partition_validation() {
        assert!(PartitionClass::fixed(vec![vec![0, 1], vec![2]]).is_ok());
        assert!(PartitionClass::fixed(vec![vec![0, 1], vec![1]]).is_err());
        assert!(PartitionClass::fixed(vec![vec![0], vec![2]]).is_err());
        assert!(PartitionClass::fixed(vec![]).is_err());
        assert!(PartitionClass::BiSeparable.validate(1).is_err());
        let p = PartitionClass::fixed(vec![vec![2], vec![1, 0]]).unwrap();
        assert_eq!(p.to_string(), "partition:12|3");
    }

    #[test]
    fn product_projector_target() {
        let mut x = CMatrix::zeros(4, 4);
        x[(0, 0)] = c(1.0);
        let mut rng = rng_from_seed(1);
        let mut warm = WarmStarts::default();
        let best = best_extreme_point(
            &x,
            &[2, 2],
            &PartitionClass::FullySeparable,
            &OracleConfig::default(),
            &mut warm,
            &mut rng,
        )
        .unwrap();
        assert_abs_diff_eq!(best.value, 1.0, epsilon = 1e-10);
        for v in &best.local_vectors {
            assert_abs_diff_eq!(v[0].norm(), 1.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn bell_projector_fully_separable() {
        let x = ghz(2).unwrap().into_matrix();
        let mut rng = rng_from_seed(2);
        let best = best_product_state(
            &x,
            &[2, 2],
            &vec![vec![0], vec![1]],
            &OracleConfig::default(),
            None,
            &mut rng,
        )
        .unwrap();
        assert_abs_diff_eq!(best.value, 0.5, epsilon = 1e-10);
    }

    #[test]
    fn single_block_gives_top_eigenvalue() {
        let x = CMatrix::from_row_slice(
            4,
            4,
            &[
                c(0.3),
                Complex64::new(0.1, 0.2),
                c(0.0),
                c(-0.4),
                Complex64::new(0.1, -0.2),
                c(-0.5),
                c(0.2),
                c(0.0),
                c(0.0),
                c(0.2),
                c(0.1),
                Complex64::new(0.0, 0.3),
                c(-0.4),
                c(0.0),
                Complex64::new(0.0, -0.3),
                c(0.6),
            ],
        );
        let top = *crate::qmatrix::hermitian_eigenvalues(&x)
            .unwrap()
            .last()
            .unwrap();
        let mut rng = rng_from_seed(3);
        let best = best_product_state(
            &x,
            &[2, 2],
            &vec![vec![0, 1]],
            &OracleConfig::default(),
            None,
            &mut rng,
        )
        .unwrap();
        assert_abs_diff_eq!(best.value, top, epsilon = 1e-12);
    }

    #[test]
    fn ghz3_bipartite_overlap_is_half() {
        let x = ghz(3).unwrap().into_matrix();
        let mut rng = rng_from_seed(4);
        for (s, rest) in enumerate_bipartitions(3).unwrap() {
            let best = best_product_state(
                &x,
                &[2, 2, 2],
                &vec![s, rest],
                &OracleConfig::default(),
                None,
                &mut rng,
            )
            .unwrap();
            assert_abs_diff_eq!(best.value, 0.5, epsilon = 1e-9);
        }
    }

    #[test]
    fn w3_product_overlap() {
        let x = w_state(3).unwrap().into_matrix();
        let mut rng = rng_from_seed(5);
        let mut warm = WarmStarts::default();
        let best = best_extreme_point(
            &x,
            &[2, 2, 2],
            &PartitionClass::FullySeparable,
            &OracleConfig::default(),
            &mut warm,
            &mut rng,
        )
        .unwrap();
        assert_abs_diff_eq!(best.value, 4.0 / 9.0, epsilon = 1e-8);
    }

    #[test]
    fn two_party_bisep_equals_full() {
        let x = ghz(2).unwrap().into_matrix() - CMatrix::identity(4, 4) * c(0.25);
        let cfg = OracleConfig::default();
        let run = |class: PartitionClass| {
            let mut rng = rng_from_seed(9);
            let mut warm = WarmStarts::default();
            best_extreme_point(&x, &[2, 2], &class, &cfg, &mut warm, &mut rng).unwrap()
        };
        assert_eq!(
            run(PartitionClass::FullySeparable),
            run(PartitionClass::BiSeparable)
        );
    }

    #[test]
    fn warm_starts_are_refreshed_per_partition() {
        let x = ghz(3).unwrap().into_matrix();
        let mut rng = rng_from_seed(6);
        let mut warm = WarmStarts::default();
        best_extreme_point(
            &x,
            &[2, 2, 2],
            &PartitionClass::BiSeparable,
            &OracleConfig::default(),
            &mut warm,
            &mut rng,
        )
        .unwrap();
        assert_eq!(warm.len(), 3);
    }

    #[test]
    fn product_state_invariants() {
        let x = ghz(3).unwrap().into_matrix();
        let mut rng = rng_from_seed(8);
        let best = best_product_state(
            &x,
            &[2, 2, 2],
            &vec![vec![0], vec![1], vec![2]],
            &OracleConfig::default(),
            None,
            &mut rng,
        )
        .unwrap();
        for v in &best.local_vectors {
            assert_abs_diff_eq!(v.norm(), 1.0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(best.global_vector().norm(), 1.0, epsilon = 1e-10);
        let sigma = best.density_matrix().unwrap();
        assert_abs_diff_eq!(
            crate::qmatrix::hs_inner(&x, sigma.matrix()).unwrap(),
            best.value,
            epsilon = 1e-10
        );
    }

    #[test]
    fn dimension_and_partition_errors() {
        let x = CMatrix::identity(4, 4);
        let mut rng = rng_from_seed(0);
        let cfg = OracleConfig::default();
        assert!(best_product_state(&x, &[2, 2], &vec![], &cfg, None, &mut rng).is_err());
        assert!(
            best_product_state(&x, &[2, 3], &vec![vec![0], vec![1]], &cfg, None, &mut rng).is_err()
        );
        let bad = OracleConfig { restarts: 0, ..cfg };
        assert!(
            best_product_state(&x, &[2, 2], &vec![vec![0], vec![1]], &bad, None, &mut rng).is_err()
        );
    }
}
