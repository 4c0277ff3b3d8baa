//! Discretized measure spaces, Hilbert-space vectors and graph inner products.

use nalgebra::DVector;

use crate::error::{check_dim, Error, Result};
use crate::{CMatrix, CVector, C64};

/// Covering of the sample set by disjoint blocks `X_n`, each with positive measure.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
    block_measures: Vec<f64>,
}

impl Partition {
    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_measures(&self) -> &[f64] {
        &self.block_measures
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Block index of every sample point.
    pub fn block_of_points(&self, m: usize) -> Vec<usize> {
        let mut owner = vec![0; m];
        for (b, block) in self.blocks.iter().enumerate() {
            for &i in block {
                owner[i] = b;
            }
        }
        owner
    }
}

/// A finite quadrature realization of a sigma-finite measure space.
///
/// Sample points are the indices `0..m`; `weights[i]` approximates the
/// measure carried by point `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSpace {
    weights: Vec<f64>,
    partition: Option<Partition>,
}

impl MeasureSpace {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidMeasure("at least one sample point required".into()));
        }
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w > 0.0))
        {
            return Err(Error::InvalidMeasure(format!(
                "weight {i} must be finite and strictly positive, got {w}"
            )));
        }
        Ok(Self {
            weights,
            partition: None,
        })
    }

    /// Counting measure on `m` points.
    pub fn counting(m: usize) -> Result<Self> {
        Self::new(vec![1.0; m])
    }

    /// Composite trapezoidal rule on `[a, b]` with `n` equispaced nodes.
    /// Returns the space together with its nodes.
    pub fn trapezoid(a: f64, b: f64, n: usize) -> Result<(Self, Vec<f64>)> {
        if n < 2 || !(b > a) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidMeasure(format!(
                "trapezoid rule needs a < b finite and n >= 2 (a={a}, b={b}, n={n})"
            )));
        }
        let h = (b - a) / (n - 1) as f64;
        let nodes = (0..n).map(|i| a + h * i as f64).collect();
        let mut weights = vec![h; n];
        weights[0] = h / 2.0;
        weights[n - 1] = h / 2.0;
        Ok((Self::new(weights)?, nodes))
    }

    /// Space made of blocks of the given measures, each split into
    /// `points_per_block` points of equal weight; the partition is attached.
    pub fn blocks_of(block_measures: &[f64], points_per_block: usize) -> Result<Self> {
        if points_per_block == 0 || block_measures.is_empty() {
            return Err(Error::InvalidMeasure("empty block layout".into()));
        }
        let mut weights = Vec::with_capacity(block_measures.len() * points_per_block);
        let mut blocks = Vec::with_capacity(block_measures.len());
        for &mu in block_measures {
            let start = weights.len();
            weights.extend(std::iter::repeat(mu / points_per_block as f64).take(points_per_block));
            blocks.push((start..weights.len()).collect());
        }
        Self::new(weights)?.with_partition_measures(blocks, block_measures.to_vec())
    }

    /// Attach a partition; block measures are the sums of the member weights.
    pub fn with_partition(self, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let measures = blocks
            .iter()
            .map(|b| b.iter().map(|&i| self.weights.get(i).copied().unwrap_or(0.0)).sum())
            .collect();
        self.with_partition_measures(blocks, measures)
    }

    /// Attach a partition with declared block measures, which must match the
    /// weight sums to `1e-12` relative.
    pub fn with_partition_measures(
        mut self,
        blocks: Vec<Vec<usize>>,
        block_measures: Vec<f64>,
    ) -> Result<Self> {
        let m = self.weights.len();
        if blocks.len() != block_measures.len() {
            return Err(Error::InvalidMeasure(format!(
                "{} blocks but {} block measures",
                blocks.len(),
                block_measures.len()
            )));
        }
        let mut seen = vec![false; m];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::InvalidMeasure(format!("block {b} is empty")));
            }
            for &i in block {
                if i >= m {
                    return Err(Error::InvalidMeasure(format!("block {b} has point {i} >= m = {m}")));
                }
                if std::mem::replace(&mut seen[i], true) {
                    return Err(Error::InvalidMeasure(format!("point {i} appears in two blocks")));
                }
            }
            let sum: f64 = block.iter().map(|&i| self.weights[i]).sum();
            let mu = block_measures[b];
            if !(mu > 0.0) || (sum - mu).abs() > 1e-12 * mu.abs().max(sum.abs()) {
                return Err(Error::InvalidMeasure(format!(
                    "block {b} has measure {mu} but its weights sum to {sum}"
                )));
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidMeasure(format!("point {i} is not covered by any block")));
        }
        self.partition = Some(Partition {
            blocks,
            block_measures,
        });
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn sqrt_weights(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w.sqrt()).collect()
    }

    pub fn partition(&self) -> Option<&Partition> {
        self.partition.as_ref()
    }

    pub fn total_measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Same points with every weight multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        let out = Self::new(self.weights.iter().map(|w| w * c).collect())?;
        match &self.partition {
            Some(p) => out.with_partition_measures(
                p.blocks.clone(),
                p.block_measures.iter().map(|mu| mu * c).collect(),
            ),
            None => Ok(out),
        }
    }

    /// Disjoint union: the points of `other` follow those of `self`.
    /// Partitions are dropped.
    pub fn concat(&self, other: &MeasureSpace) -> Result<Self> {
        let mut weights = self.weights.clone();
        weights.extend_from_slice(&other.weights);
        Self::new(weights)
    }
}

/// `sum_i w_i a_i conj(b_i)`: the weighted `L^2(X, mu)` inner product of two
/// sampled functions.
pub fn weighted_l2_inner(a: &[C64], b: &[C64], sp: &MeasureSpace) -> Result<C64> {
    check_dim("weighted_l2_inner (first argument)", sp.len(), a.len())?;
    check_dim("weighted_l2_inner (second argument)", sp.len(), b.len())?;
    Ok(a.iter()
        .zip(b)
        .zip(sp.weights())
        .map(|((x, y), w)| x * y.conj() * *w)
        .sum())
}

/// A vector of `H = C^d`, in coordinates of a fixed orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct HVector(CVector);

impl HVector {
    pub fn new(coords: Vec<C64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidParameter("vector dimension must be positive".into()));
        }
        Ok(Self(DVector::from_vec(coords)))
    }

    pub fn from_vector(coords: CVector) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidParameter("vector dimension must be positive".into()));
        }
        Ok(Self(coords))
    }

    pub fn from_real(coords: &[f64]) -> Result<Self> {
        Self::new(coords.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn coords(&self) -> &CVector {
        &self.0
    }

    pub fn into_inner(self) -> CVector {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn inner(&self, other: &HVector) -> Result<C64> {
        check_dim("inner product", self.dim(), other.dim())?;
        Ok(other.0.dotc(&self.0))
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }
}

/// Gram matrix of the graph inner product `<f, g>_A = <f, g> + <Af, Ag>`
/// of a square operator truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphMetric {
    operator: CMatrix,
    gram: CMatrix,
}

impl GraphMetric {
    pub fn new(operator: CMatrix) -> Result<Self> {
        check_dim("graph metric (square operator)", operator.nrows(), operator.ncols())?;
        let d = operator.nrows();
        let gram = CMatrix::identity(d, d) + operator.adjoint() * &operator;
        // Exact Hermitian symmetry of the stored Gram matrix.
        let gram = (&gram + gram.adjoint()).scale(0.5);
        Ok(Self { operator, gram })
    }

    pub fn operator(&self) -> &CMatrix {
        &self.operator
    }

    pub fn gram(&self) -> &CMatrix {
        &self.gram
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    /// Graph norm `||f||_A`.
    pub fn norm(&self, f: &HVector) -> Result<f64> {
        Ok(graph_inner(f, f, self)?.re.max(0.0).sqrt())
    }
}

/// Graph inner product `<f, g>_A = g^H (I + A^* A) f`.
pub fn graph_inner(f: &HVector, g: &HVector, gm: &GraphMetric) -> Result<C64> {
    check_dim("graph_inner (first argument)", gm.dim(), f.dim())?;
    check_dim("graph_inner (second argument)", gm.dim(), g.dim())?;
    Ok(g.coords().dotc(&(gm.gram() * f.coords())))
}

/// The standard orthonormal basis `e_1, ..., e_d`.
pub fn standard_onb(d: usize) -> Result<Vec<HVector>> {
    if d == 0 {
        return Err(Error::InvalidParameter("basis dimension must be positive".into()));
    }
    Ok((0..d)
        .map(|j| {
            let mut v = CVector::zeros(d);
            v[j] = C64::new(1.0, 0.0);
            HVector(v)
        })
        .collect())
}
