//! The iterated wreath product `[C_q]^n` acting on the `q`-ary rooted tree,
//! group orders, and index bookkeeping across levels.
//!
//! Nodes are addressed by digit strings over `0..q`, the root being the empty
//! string; leaves are ordered lexicographically. An element is its portrait:
//! one residue mod `q` per internal node. It sends the leaf `a_1 a_2 ... a_n`
//! to `b_1 ... b_n` with `b_k = a_k + label(a_1 ... a_{k-1})`.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest exponent `log_q |[C_q]^n|` for which orders are materialized.
const MAX_ORDER_EXPONENT: u128 = 1 << 24;

/// Euler's totient of a prime power.
pub fn euler_phi_prime_power(q: u64) -> u64 {
    let p = (2..=q).find(|d| q.is_multiple_of(*d)).expect("q >= 2");
    q / p * (p - 1)
}

/// `(q^n - 1) / (q - 1)`, the number of internal nodes of depth `< n`.
pub fn internal_node_count(q: u64, n: u32) -> u128 {
    (0..n).fold(0u128, |acc, _| acc.saturating_mul(q as u128).saturating_add(1))
}

fn power(q: u64, exponent: u128) -> Result<BigUint> {
    if exponent > MAX_ORDER_EXPONENT {
        return Err(Error::InvalidArgument(format!(
            "order {q}^{exponent} is too large to materialize"
        )));
    }
    Ok(BigUint::from(q).pow(exponent as u32))
}

/// `|[C_q]^n| = q^((q^n - 1)/(q - 1))`.
pub fn group_order(q: u64, n: u32) -> Result<BigUint> {
    power(q, internal_node_count(q, n))
}

/// `|C_q^(q^(n-1))|`, the largest possible layer at level `n >= 1`.
pub fn layer_order(q: u64, n: u32) -> Result<BigUint> {
    if n == 0 {
        return Ok(BigUint::one());
    }
    let nodes = (q as u128)
        .checked_pow(n - 1)
        .unwrap_or(u128::MAX);
    power(q, nodes)
}

/// `[C_q]^n` together with the ambient group of index `phi(q)` over it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WreathGroupSpec {
    pub q: u64,
    pub n: u32,
    /// `[Q(zeta_q) : Q]`.
    pub cyclotomic_index: u64,
}

impl WreathGroupSpec {
    pub fn new(q: u64, n: u32) -> Self {
        WreathGroupSpec {
            q,
            n,
            cyclotomic_index: euler_phi_prime_power(q),
        }
    }

    pub fn order(&self) -> Result<BigUint> {
        group_order(self.q, self.n)
    }

    pub fn ambient_order(&self) -> Result<BigUint> {
        Ok(self.order()? * self.cyclotomic_index)
    }
}

/// An element of `[C_q]^n`, stored as labels in breadth-first node order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WreathElement {
    q: u64,
    n: u32,
    labels: Vec<u64>,
}

fn node_index(q: u64, address: &[u64]) -> usize {
    let offset = internal_node_count(q, address.len() as u32) as usize;
    offset + address.iter().fold(0usize, |acc, &d| acc * q as usize + d as usize)
}

fn leaf_digits(q: u64, n: u32, mut leaf: usize) -> Vec<u64> {
    let mut digits = vec![0; n as usize];
    for slot in digits.iter_mut().rev() {
        *slot = leaf as u64 % q;
        leaf /= q as usize;
    }
    digits
}

fn digits_to_leaf(q: u64, digits: &[u64]) -> usize {
    digits.iter().fold(0usize, |acc, &d| acc * q as usize + d as usize)
}

impl WreathElement {
    fn check_size(q: u64, n: u32) -> Result<usize> {
        let nodes = internal_node_count(q, n);
        if q < 2 || nodes > 1 << 24 {
            return Err(Error::InvalidArgument(format!("[C_{q}]^{n} is too large to represent")));
        }
        Ok(nodes as usize)
    }

    pub fn identity(q: u64, n: u32) -> Result<Self> {
        let nodes = Self::check_size(q, n)?;
        Ok(WreathElement {
            q,
            n,
            labels: vec![0; nodes],
        })
    }

    /// Labels in breadth-first order (root first, then depth 1 in
    /// lexicographic order, and so on).
    pub fn from_labels(q: u64, n: u32, labels: Vec<u64>) -> Result<Self> {
        let nodes = Self::check_size(q, n)?;
        if labels.len() != nodes || labels.iter().any(|&l| l >= q) {
            return Err(Error::InvalidArgument(format!(
                "expected {nodes} labels in 0..{q}"
            )));
        }
        Ok(WreathElement { q, n, labels })
    }

    pub fn random<R: Rng>(q: u64, n: u32, rng: &mut R) -> Result<Self> {
        let nodes = Self::check_size(q, n)?;
        Ok(WreathElement {
            q,
            n,
            labels: (0..nodes).map(|_| rng.gen_range(0..q)).collect(),
        })
    }

    /// Every element, for brute-force checks on small trees.
    pub fn enumerate(q: u64, n: u32) -> Result<Vec<Self>> {
        let nodes = Self::check_size(q, n)?;
        let total = (q as u128).checked_pow(nodes as u32).filter(|&t| t <= 1 << 20).ok_or_else(|| {
            Error::InvalidArgument(format!("[C_{q}]^{n} has too many elements to enumerate"))
        })?;
        Ok((0..total)
            .map(|mut k| {
                let labels = (0..nodes)
                    .map(|_| {
                        let d = (k % q as u128) as u64;
                        k /= q as u128;
                        d
                    })
                    .collect();
                WreathElement { q, n, labels }
            })
            .collect())
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn level(&self) -> u32 {
        self.n
    }

    pub fn label(&self, address: &[u64]) -> u64 {
        self.labels[node_index(self.q, address)]
    }

    /// Image of a node at any depth `<= n`.
    pub fn apply_node(&self, address: &[u64]) -> Vec<u64> {
        let mut image = Vec::with_capacity(address.len());
        for k in 0..address.len() {
            let shift = self.label(&address[..k]);
            image.push((address[k] + shift) % self.q);
        }
        image
    }

    pub fn apply_leaf(&self, leaf: usize) -> usize {
        let digits = leaf_digits(self.q, self.n, leaf);
        digits_to_leaf(self.q, &self.apply_node(&digits))
    }

    /// `perm[i]` is the image of leaf `i`.
    pub fn leaf_permutation(&self) -> Vec<usize> {
        let leaves = (self.q as usize).pow(self.n);
        (0..leaves).map(|i| self.apply_leaf(i)).collect()
    }

    /// Recovers the portrait of a tree automorphism given on leaves.
    /// Fails if the permutation does not come from `[C_q]^n`.
    pub fn from_leaf_permutation(q: u64, n: u32, perm: &[usize]) -> Result<Self> {
        let nodes = Self::check_size(q, n)?;
        let mut labels = vec![0; nodes];
        for depth in 0..n {
            let width = (q as usize).pow(depth);
            for node in 0..width {
                let mut digits = leaf_digits(q, depth, node);
                digits.resize(n as usize, 0);
                let leaf = digits_to_leaf(q, &digits);
                let image = leaf_digits(q, n, perm[leaf]);
                labels[node_index(q, &digits[..depth as usize])] = image[depth as usize];
            }
        }
        let element = WreathElement { q, n, labels };
        if element.leaf_permutation() != perm {
            return Err(Error::InvalidArgument(
                "permutation is not in the iterated wreath product".into(),
            ));
        }
        Ok(element)
    }

    fn same_group(&self, other: &Self) -> Result<()> {
        if self.q != other.q || self.n != other.n {
            return Err(Error::LevelMismatch {
                q1: self.q,
                n1: self.n,
                q2: other.q,
                n2: other.n,
            });
        }
        Ok(())
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.same_group(other)?;
        let mut labels = vec![0; self.labels.len()];
        for depth in 0..self.n {
            for node in 0..(self.q as usize).pow(depth) {
                let address = leaf_digits(self.q, depth, node);
                let moved = other.apply_node(&address);
                labels[node_index(self.q, &address)] =
                    (other.label(&address) + self.label(&moved)) % self.q;
            }
        }
        Ok(WreathElement {
            q: self.q,
            n: self.n,
            labels,
        })
    }

    pub fn inverse(&self) -> Self {
        let perm = self.leaf_permutation();
        let mut inv = vec![0; perm.len()];
        for (i, &j) in perm.iter().enumerate() {
            inv[j] = i;
        }
        Self::from_leaf_permutation(self.q, self.n, &inv).expect("inverse stays in the group")
    }

    fn address_string(&self, address: &[u64]) -> String {
        let parts: Vec<String> = address.iter().map(|d| d.to_string()).collect();
        if self.q <= 10 {
            parts.concat()
        } else {
            parts.join(".")
        }
    }

    /// Portrait as address -> residue.
    pub fn portrait(&self) -> BTreeMap<String, u64> {
        let mut out = BTreeMap::new();
        for depth in 0..self.n {
            for node in 0..(self.q as usize).pow(depth) {
                let address = leaf_digits(self.q, depth, node);
                out.insert(self.address_string(&address), self.label(&address));
            }
        }
        out
    }
}

impl Serialize for WreathElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            q: u64,
            n: u32,
            portrait: BTreeMap<String, u64>,
        }
        Repr {
            q: self.q,
            n: self.n,
            portrait: self.portrait(),
        }
        .serialize(s)
    }
}

/// Three-valued verdict on one layer `Gal(K_n / K_(n-1))`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum LayerVerdict {
    Maximal,
    Unknown,
    /// The layer was shown to have this order, below the maximum.
    SubMaximal {
        #[serde(with = "biguint_string")]
        order: BigUint,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelEntry {
    pub level: u32,
    #[serde(flatten)]
    pub verdict: LayerVerdict,
    /// `q^(s q^(n-1))` when the verdict is Maximal.
    #[serde(with = "option_biguint_string")]
    pub layer_order_claimed: Option<BigUint>,
}

/// Per-level layer verdicts for `s` trees of degree `q`, levels `1..`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerReport {
    pub q: u64,
    pub trees: u32,
    pub levels: Vec<LevelEntry>,
}

impl LayerReport {
    pub fn new(q: u64, trees: u32) -> Self {
        LayerReport {
            q,
            trees,
            levels: Vec::new(),
        }
    }

    /// Largest layer at level `n` for `s` trees.
    pub fn max_layer_order(&self, n: u32) -> Result<BigUint> {
        Ok(layer_order(self.q, n)?.pow(self.trees))
    }

    pub fn push(&mut self, verdict: LayerVerdict) -> Result<()> {
        let level = self.levels.len() as u32 + 1;
        let layer_order_claimed = match verdict {
            LayerVerdict::Maximal => Some(self.max_layer_order(level)?),
            _ => None,
        };
        self.levels.push(LevelEntry {
            level,
            verdict,
            layer_order_claimed,
        });
        Ok(())
    }

    pub fn from_verdicts(q: u64, trees: u32, verdicts: Vec<LayerVerdict>) -> Result<Self> {
        let mut report = LayerReport::new(q, trees);
        for v in verdicts {
            report.push(v)?;
        }
        Ok(report)
    }
}

/// What the witnessed layers say about `[G_∞ : G_∞(beta)]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum IndexVerdict {
    /// Every layer after `stable_from` up to `horizon` is maximal; if that
    /// persists, the index in `[C_q]^∞` is `kummer_index` and in the
    /// ambient group `ambient_index`.
    Finite {
        #[serde(with = "biguint_string")]
        kummer_index: BigUint,
        #[serde(with = "biguint_string")]
        ambient_index: BigUint,
        stable_from: u32,
        horizon: u32,
    },
    /// The most recent layer is witnessed sub-maximal: the running index is
    /// still growing and no finite bound is claimed.
    Diverging {
        #[serde(with = "biguint_string")]
        running_index: BigUint,
        submaximal_levels: Vec<u32>,
        horizon: u32,
    },
    /// Some layer is Unknown; the index is only bounded by evidence up to
    /// `bounded_up_to`.
    Inconclusive {
        #[serde(with = "biguint_string")]
        running_index: BigUint,
        bounded_up_to: u32,
        horizon: u32,
    },
}

/// Running index `[[C_q]^n : G_n]` after each level, while defined.
pub fn running_indices(report: &LayerReport) -> Result<Vec<Option<BigUint>>> {
    let mut index = BigUint::one();
    let mut defined = true;
    let mut out = Vec::with_capacity(report.levels.len());
    for entry in &report.levels {
        match &entry.verdict {
            LayerVerdict::Maximal => {}
            LayerVerdict::SubMaximal { order } => {
                let max = report.max_layer_order(entry.level)?;
                if order.is_zero() || (&max % order) != BigUint::zero() || *order >= max {
                    return Err(Error::InvalidArgument(format!(
                        "level {} sub-maximal order {order} must properly divide {max}",
                        entry.level
                    )));
                }
                index *= max / order;
            }
            LayerVerdict::Unknown => defined = false,
        }
        out.push(defined.then(|| index.clone()));
    }
    Ok(out)
}

/// The finite-index criterion: the index is finite iff all sufficiently
/// deep layers are maximal.
pub fn evaluate_index_criterion(spec: &WreathGroupSpec, layers: &LayerReport) -> Result<IndexVerdict> {
    if spec.q != layers.q {
        return Err(Error::LevelMismatch {
            q1: spec.q,
            n1: spec.n,
            q2: layers.q,
            n2: layers.levels.len() as u32,
        });
    }
    for (k, entry) in layers.levels.iter().enumerate() {
        if entry.level != k as u32 + 1 {
            return Err(Error::NonContiguousLevels {
                expected: k as u32 + 1,
                found: entry.level,
            });
        }
    }
    let horizon = layers.levels.len() as u32;
    let running = running_indices(layers)?;
    if let Some(first_unknown) = layers
        .levels
        .iter()
        .position(|e| e.verdict == LayerVerdict::Unknown)
    {
        let running_index = if first_unknown == 0 {
            BigUint::one()
        } else {
            running[first_unknown - 1].clone().expect("defined before the first Unknown")
        };
        return Ok(IndexVerdict::Inconclusive {
            running_index,
            bounded_up_to: first_unknown as u32,
            horizon,
        });
    }
    let submaximal: Vec<u32> = layers
        .levels
        .iter()
        .filter(|e| matches!(e.verdict, LayerVerdict::SubMaximal { .. }))
        .map(|e| e.level)
        .collect();
    let index = running.last().cloned().flatten().unwrap_or_else(BigUint::one);
    if submaximal.last().is_some_and(|&l| l == horizon) {
        return Ok(IndexVerdict::Diverging {
            running_index: index,
            submaximal_levels: submaximal,
            horizon,
        });
    }
    let ambient_index = &index * BigUint::from(spec.cyclotomic_index).pow(layers.trees);
    Ok(IndexVerdict::Finite {
        kummer_index: index,
        ambient_index,
        stable_from: submaximal.last().copied().unwrap_or(0),
        horizon,
    })
}

mod biguint_string {
    use num_bigint::BigUint;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(|_| D::Error::custom(format!("invalid integer {text:?}")))
    }
}

mod option_biguint_string {
    use num_bigint::BigUint;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Option<BigUint>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(v) => s.serialize_str(&v.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigUint>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|t| t.parse().map_err(|_| D::Error::custom(format!("invalid integer {t:?}"))))
            .transpose()
    }
}
