//! Transition kernels and weighted number operators.
//!
//! A kernel `w(j, k) ≥ 0` drives the weighted number operator
//!
//! ```text
//! S_w = Σ_{j,k} w(j,k) ∂_k* ∂_j ∂_j* ∂_k ,
//! ```
//!
//! which is diagonal in the canonical basis: `S_w Z_σ = ϑ(σ) Z_σ` with
//!
//! ```text
//! ϑ(σ) = Σ_j 1_σ(j) w(j,j) + Σ_{j,k} (1 − 1_σ(j)) 1_σ(k) w(j,k) ,
//! ```
//!
//! i.e. the retained diagonal weights plus the inflow weights from occupied
//! to empty sites. This module builds the operator both by explicit
//! composition of ladder operators and from the eigenvalue formula; the two
//! constructions are each other's oracle.

use rand_chacha::rand_core::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{unit_f64, ModeCount, SubsetIndex};
use crate::operator::{annihilator, creator, LinearOperator};

/// A nonnegative `n×n` rate table; `w[j][k]` weighs the jump `k → j`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionKernel {
    n: ModeCount,
    w: Vec<Vec<f64>>,
    alpha: f64,
    beta: f64,
    diag_sup: f64,
}

impl TransitionKernel {
    /// Builds a kernel from an explicit `n×n` table (`w[j][k]`, row `j`).
    pub fn from_table(n: ModeCount, w: Vec<Vec<f64>>) -> Result<Self> {
        let modes = n.get();
        if w.len() != modes || w.iter().any(|row| row.len() != modes) {
            return Err(Error::Shape(format!("kernel table must be {modes}x{modes}")));
        }
        for (j, row) in w.iter().enumerate() {
            for (k, &v) in row.iter().enumerate() {
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(Error::Domain(format!("kernel entry w[{j}][{k}] = {v} invalid")));
                }
            }
        }
        let alpha = (0..modes)
            .map(|k| (0..modes).map(|j| w[j][k]).sum::<f64>())
            .fold(0.0, f64::max);
        let beta = (0..modes).map(|j| w[j][j]).fold(f64::INFINITY, f64::min);
        let diag_sup = (0..modes).map(|j| w[j][j]).fold(0.0, f64::max);
        Ok(TransitionKernel { n, w, alpha, beta, diag_sup })
    }

    /// The canonical kernel: identity table (pure on-site dephasing).
    pub fn canonical(n: ModeCount) -> Self {
        let modes = n.get();
        let mut w = vec![vec![0.0; modes]; modes];
        for j in 0..modes {
            w[j][j] = 1.0;
        }
        Self::from_table(n, w).expect("identity table is a valid kernel")
    }

    /// Nearest-neighbour kernel: `w[k+1][k] = a`, `w[k−1][k] = b`,
    /// `w[k][k] = d`.
    pub fn nearest_neighbor(n: ModeCount, a: f64, b: f64, d: f64) -> Result<Self> {
        let modes = n.get();
        let mut w = vec![vec![0.0; modes]; modes];
        for k in 0..modes {
            w[k][k] = d;
            if k + 1 < modes {
                w[k + 1][k] = a;
            }
            if k > 0 {
                w[k - 1][k] = b;
            }
        }
        Self::from_table(n, w)
    }

    /// Kernel with entries uniform in `[0, 1)`.
    pub fn random_uniform<R: RngCore>(n: ModeCount, rng: &mut R) -> Self {
        let modes = n.get();
        let w = (0..modes)
            .map(|_| (0..modes).map(|_| unit_f64(rng)).collect())
            .collect();
        Self::from_table(n, w).expect("uniform entries are valid")
    }

    /// Random kernel with diagonal bounded away from zero (regular).
    pub fn random_regular<R: RngCore>(n: ModeCount, rng: &mut R) -> Self {
        let modes = n.get();
        let mut w: Vec<Vec<f64>> = (0..modes)
            .map(|_| (0..modes).map(|_| unit_f64(rng)).collect())
            .collect();
        for (j, row) in w.iter_mut().enumerate() {
            row[j] = 0.2 + unit_f64(rng);
        }
        Self::from_table(n, w).expect("entries are valid")
    }

    pub fn mode_count(&self) -> ModeCount {
        self.n
    }

    pub fn rate(&self, j: usize, k: usize) -> f64 {
        self.w[j][k]
    }

    pub fn table(&self) -> &[Vec<f64>] {
        &self.w
    }

    /// Max over `k` of the column sum `Σ_j w[j][k]`.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Min over `j` of the diagonal `w[j][j]`; the regularity constant.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Max over `j` of the diagonal `w[j][j]`.
    pub fn diag_sup(&self) -> f64 {
        self.diag_sup
    }

    /// Regular iff the diagonal is bounded away from zero.
    pub fn regular(&self) -> bool {
        self.beta > 0.0
    }

    pub fn column_sum(&self, k: usize) -> f64 {
        (0..self.n.get()).map(|j| self.w[j][k]).sum()
    }

    /// Column `k` of the table as a weight function, `u[j] = w[j][k]`.
    pub fn column_weights(&self, k: usize) -> WeightFunction {
        let u = (0..self.n.get()).map(|j| self.w[j][k]).collect();
        WeightFunction::new(self.n, u).expect("kernel entries are valid weights")
    }

    /// Row `j` of the table as a weight function, `u[k] = w[j][k]`.
    pub fn row_weights(&self, j: usize) -> WeightFunction {
        WeightFunction::new(self.n, self.w[j].clone()).expect("kernel entries are valid weights")
    }

    /// Eigenvalue of the weighted number operator on the basis vector `Z_σ`:
    /// retained diagonal weight plus total inflow weight into empty sites.
    pub fn weighted_count(&self, sigma: SubsetIndex) -> f64 {
        self.weighted_count_truncated(sigma, self.n.get())
    }

    /// Partial sums of the eigenvalue formula restricted to `j, k < m`.
    /// Nondecreasing in `m` and equal to `weighted_count` at `m = n`.
    pub fn weighted_count_truncated(&self, sigma: SubsetIndex, m: usize) -> f64 {
        let m = m.min(self.n.get());
        let mut total = 0.0;
        for j in 0..m {
            if sigma.contains(j) {
                total += self.w[j][j];
            }
        }
        for k in 0..m {
            if !sigma.contains(k) {
                continue;
            }
            for j in 0..m {
                if !sigma.contains(j) {
                    total += self.w[j][k];
                }
            }
        }
        total
    }

    /// Eigenvalues for all subsets in bitmask order.
    pub fn weighted_counts(&self) -> WeightedCountTable {
        let values = self.n.subsets().map(|s| self.weighted_count(s)).collect();
        WeightedCountTable { n: self.n, values }
    }

    /// Short stable digest of the table, for report parameters.
    pub fn digest(&self) -> String {
        let mut h: u64 = 0xcbf29ce484222325;
        for row in &self.w {
            for &v in row {
                for b in v.to_bits().to_le_bytes() {
                    h ^= b as u64;
                    h = h.wrapping_mul(0x100000001b3);
                }
            }
        }
        format!("{h:016x}")
    }
}

/// Cached eigenvalue table of a weighted number operator.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedCountTable {
    n: ModeCount,
    values: Vec<f64>,
}

impl WeightedCountTable {
    pub fn value(&self, sigma: SubsetIndex) -> f64 {
        self.values[sigma.index()]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

/// A bounded nonnegative weight per mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WeightFunctionRepr", into = "WeightFunctionRepr")]
pub struct WeightFunction {
    n: ModeCount,
    u: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct WeightFunctionRepr {
    n: usize,
    u: Vec<f64>,
}

impl TryFrom<WeightFunctionRepr> for WeightFunction {
    type Error = Error;
    fn try_from(r: WeightFunctionRepr) -> Result<Self> {
        WeightFunction::new(ModeCount::new(r.n)?, r.u)
    }
}

impl From<WeightFunction> for WeightFunctionRepr {
    fn from(w: WeightFunction) -> Self {
        WeightFunctionRepr { n: w.n.get(), u: w.u }
    }
}

impl WeightFunction {
    pub fn new(n: ModeCount, u: Vec<f64>) -> Result<Self> {
        if u.len() != n.get() {
            return Err(Error::Shape(format!(
                "weight function has {} entries, expected {}",
                u.len(),
                n.get()
            )));
        }
        for (k, &v) in u.iter().enumerate() {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Domain(format!("weight u[{k}] = {v} invalid")));
            }
        }
        Ok(WeightFunction { n, u })
    }

    pub fn constant(n: ModeCount, value: f64) -> Result<Self> {
        Self::new(n, vec![value; n.get()])
    }

    pub fn random_uniform<R: RngCore>(n: ModeCount, rng: &mut R) -> Self {
        let u = (0..n.get()).map(|_| unit_f64(rng)).collect();
        Self::new(n, u).expect("uniform entries are valid")
    }

    pub fn mode_count(&self) -> ModeCount {
        self.n
    }

    pub fn value(&self, k: usize) -> f64 {
        self.u[k]
    }

    pub fn values(&self) -> &[f64] {
        &self.u
    }
}

/// Weighted occupancy `Σ_{k∈σ} u(k)`.
pub fn occupancy_weight(u: &WeightFunction, sigma: SubsetIndex) -> f64 {
    (0..u.n.get())
        .filter(|&k| sigma.contains(k))
        .map(|k| u.u[k])
        .sum()
}

/// The weighted number operator built by explicit composition of ladder
/// operators: `Σ_{j,k} w(j,k) ∂_k* ∂_j ∂_j* ∂_k`.
pub fn weighted_number_direct(kernel: &TransitionKernel) -> Result<LinearOperator> {
    let n = kernel.mode_count();
    let modes = n.get();
    let anns: Vec<LinearOperator> = (0..modes).map(|k| annihilator(n, k)).collect::<Result<_>>()?;
    let cres: Vec<LinearOperator> = (0..modes).map(|k| creator(n, k)).collect::<Result<_>>()?;
    let mut sum = LinearOperator::zeros(n);
    for j in 0..modes {
        for k in 0..modes {
            let w = kernel.rate(j, k);
            if w == 0.0 {
                continue;
            }
            let term = cres[k]
                .compose(&anns[j])?
                .compose(&cres[j])?
                .compose(&anns[k])?;
            sum = sum.add(&term.scale_re(w))?;
        }
    }
    Ok(sum)
}

/// The same operator from its eigenvalue decomposition: diagonal with entry
/// `ϑ(σ)` at `(σ, σ)`.
pub fn weighted_number_spectral(kernel: &TransitionKernel) -> LinearOperator {
    let table = kernel.weighted_counts();
    LinearOperator::from_real_diagonal(kernel.mode_count(), table.values())
        .expect("table length matches dimension")
}

/// The weighted occupancy operator `Σ_k u(k) ∂_k*∂_k`: diagonal with entry
/// `Σ_{k∈σ} u(k)`.
pub fn one_d_number_operator(u: &WeightFunction) -> LinearOperator {
    let diag: Vec<f64> = u.n.subsets().map(|s| occupancy_weight(u, s)).collect();
    LinearOperator::from_real_diagonal(u.n, &diag).expect("diagonal length matches dimension")
}

/// Embeds a weight function as the diagonal kernel `w[j][j] = u(j)`, under
/// which the weighted number operator reduces to `one_d_number_operator`.
pub fn embed_1d_kernel(u: &WeightFunction) -> TransitionKernel {
    let modes = u.n.get();
    let mut w = vec![vec![0.0; modes]; modes];
    for j in 0..modes {
        w[j][j] = u.u[j];
    }
    TransitionKernel::from_table(u.n, w).expect("diagonal embedding is valid")
}

/// The number operator: diagonal with entry `#(σ)`.
pub fn number_operator(n: ModeCount) -> LinearOperator {
    let diag: Vec<f64> = n.subsets().map(|s| s.cardinality() as f64).collect();
    LinearOperator::from_real_diagonal(n, &diag).expect("diagonal length matches dimension")
}

/// Operator norm of the weighted number operator, `max_σ ϑ(σ)`.
pub fn norm_of_weighted_number(kernel: &TransitionKernel) -> f64 {
    kernel.weighted_counts().max()
}

/// Serializable kernel description.
///
/// ```json
/// {"n": 3, "type": "nearest_neighbor", "params": {"a": 1.0, "b": 1.0, "d": 1.0}}
/// {"n": 2, "type": "explicit", "params": {}, "table": [[1.0, 2.0], [3.0, 4.0]]}
/// {"n": 4, "type": "canonical", "params": {}}
/// ```
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KernelConfig {
    pub n: usize,
    #[serde(rename = "type")]
    pub kind: KernelKind,
    #[serde(default = "empty_object")]
    pub params: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<Vec<f64>>>,
}

fn empty_object() -> serde_json::Value {
    serde_json::json!({})
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Canonical,
    NearestNeighbor,
    Explicit,
}

impl KernelConfig {
    pub fn build(&self) -> Result<TransitionKernel> {
        let n = ModeCount::new(self.n)?;
        match self.kind {
            KernelKind::Canonical => Ok(TransitionKernel::canonical(n)),
            KernelKind::NearestNeighbor => {
                let get = |name: &str| -> Result<f64> {
                    self.params
                        .get(name)
                        .and_then(serde_json::Value::as_f64)
                        .ok_or_else(|| {
                            Error::Domain(format!("nearest_neighbor kernel needs numeric param `{name}`"))
                        })
                };
                TransitionKernel::nearest_neighbor(n, get("a")?, get("b")?, get("d")?)
            }
            KernelKind::Explicit => {
                let table = self
                    .table
                    .clone()
                    .ok_or_else(|| Error::Domain("explicit kernel needs a table".into()))?;
                TransitionKernel::from_table(n, table)
            }
        }
    }

    pub fn from_kernel(kernel: &TransitionKernel) -> Self {
        KernelConfig {
            n: kernel.mode_count().get(),
            kind: KernelKind::Explicit,
            params: empty_object(),
            table: Some(kernel.table().to_vec()),
        }
    }
}
