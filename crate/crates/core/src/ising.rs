//! Ising models over spins in {-1, +1}: the graph-partitioning formulation,
//! energy evaluation, coupler normalization and assembly of the corrected
//! model from a debiased constraint.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::spins::{check_assignment, Spin};

/// Ordered variable pair `(i, j)` with `i < j`.
pub type Pair = (usize, usize);

/// `E(s) = offset + Σ h_i s_i + Σ_{i<j} J_ij s_i s_j`. Absent keys are zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModel", into = "RawModel")]
pub struct IsingModel {
    n: usize,
    linear: BTreeMap<usize, f64>,
    quadratic: BTreeMap<Pair, f64>,
    offset: f64,
}

/// A purely quadratic coefficient set, e.g. the couplers of the balance
/// constraint while they are being debiased.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCouplers", into = "RawCouplers")]
pub struct CouplerSet {
    n: usize,
    values: BTreeMap<Pair, f64>,
}

fn canonical_pair(i: usize, j: usize, n: usize) -> Result<Pair> {
    for v in [i, j] {
        if v >= n {
            return Err(Error::IndexOutOfRange { index: v, n });
        }
    }
    if i == j {
        return Err(Error::InvalidParameter(format!("quadratic term on a single variable {i}")));
    }
    Ok((i.min(j), i.max(j)))
}

fn check_finite(v: f64, what: &str) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{what} coefficient {v} is not finite")))
    }
}

fn check_weights(a: f64, b: f64) -> Result<()> {
    if !(a > 0.0 && a.is_finite() && b > 0.0 && b.is_finite()) {
        return Err(Error::InvalidParameter(format!("penalty weights must be positive, got A = {a}, B = {b}")));
    }
    Ok(())
}

/// Penalty weights `(A, B)` used when none are given: `B = 1` and
/// `A = max(1, ceil(n/8))`, which keeps `A/B >= n/8` (A = 9 at n = 65).
pub fn default_weights(n: usize) -> (f64, f64) {
    (n.div_ceil(8).max(1) as f64, 1.0)
}

impl IsingModel {
    /// The all-zero model on `n` variables.
    pub fn new(n: usize) -> Self {
        IsingModel { n, linear: BTreeMap::new(), quadratic: BTreeMap::new(), offset: 0.0 }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn linear(&self) -> &BTreeMap<usize, f64> {
        &self.linear
    }

    pub fn quadratic(&self) -> &BTreeMap<Pair, f64> {
        &self.quadratic
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn linear_at(&self, i: usize) -> f64 {
        self.linear.get(&i).copied().unwrap_or(0.0)
    }

    pub fn quadratic_at(&self, i: usize, j: usize) -> f64 {
        self.quadratic.get(&(i.min(j), i.max(j))).copied().unwrap_or(0.0)
    }

    pub fn add_linear(&mut self, i: usize, v: f64) -> Result<()> {
        check_finite(v, "linear")?;
        if i >= self.n {
            return Err(Error::IndexOutOfRange { index: i, n: self.n });
        }
        *self.linear.entry(i).or_insert(0.0) += v;
        Ok(())
    }

    pub fn add_quadratic(&mut self, i: usize, j: usize, v: f64) -> Result<()> {
        check_finite(v, "quadratic")?;
        let key = canonical_pair(i, j, self.n)?;
        *self.quadratic.entry(key).or_insert(0.0) += v;
        Ok(())
    }

    pub fn add_offset(&mut self, v: f64) -> Result<()> {
        check_finite(v, "offset")?;
        self.offset += v;
        Ok(())
    }

    /// Balance penalty `A (Σ s_i)^2`, expanded as `2A` on every pair plus the
    /// constant `nA`.
    pub fn constraint(n: usize, a: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!("constraint needs at least 2 variables, got {n}")));
        }
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidParameter(format!("penalty weight A must be positive, got {a}")));
        }
        let mut m = IsingModel::new(n);
        m.quadratic = CouplerSet::uniform(n, 2.0 * a)?.values;
        m.offset = n as f64 * a;
        Ok(m)
    }

    /// `A (Σ s_i)^2 + B · cut(s)`. Each edge contributes `-B/2` to its coupler
    /// and `+B/2` to the offset.
    pub fn graph_partitioning(g: &Graph, a: f64, b: f64) -> Result<Self> {
        check_weights(a, b)?;
        let n = g.n();
        if a / b < n as f64 / 8.0 {
            log::warn!("A/B = {} is below n/8 = {}; minimizers may be unbalanced", a / b, n as f64 / 8.0);
        }
        let mut m = IsingModel::constraint(n, a)?;
        m.add_cut_objective(g, b)?;
        Ok(m)
    }

    fn add_cut_objective(&mut self, g: &Graph, b: f64) -> Result<()> {
        for &(i, j) in g.edges() {
            self.add_quadratic(i, j, -b / 2.0)?;
        }
        self.add_offset(b * g.edge_count() as f64 / 2.0)
    }

    pub fn energy(&self, spins: &[Spin]) -> Result<f64> {
        check_assignment(spins, self.n)?;
        Ok(self.energy_unchecked(spins))
    }

    pub(crate) fn energy_unchecked(&self, spins: &[Spin]) -> f64 {
        let lin: f64 = self.linear.iter().map(|(&i, &h)| h * spins[i] as f64).sum();
        let quad: f64 = self.quadratic.iter().map(|(&(i, j), &v)| v * (spins[i] * spins[j]) as f64).sum();
        self.offset + lin + quad
    }

    /// Largest absolute linear and quadratic coefficients.
    pub fn max_abs_coefficients(&self) -> (f64, f64) {
        let max_abs = |it: &mut dyn Iterator<Item = &f64>| it.fold(0.0f64, |m, v| m.max(v.abs()));
        (max_abs(&mut self.linear.values()), max_abs(&mut self.quadratic.values()))
    }

    /// Couplers of this model, ignoring linear terms and offset.
    pub fn couplers(&self) -> CouplerSet {
        CouplerSet { n: self.n, values: self.quadratic.clone() }
    }

    /// Dense form used by the samplers.
    pub fn to_dense(&self) -> DenseIsing {
        let n = self.n;
        let mut h = vec![0.0; n];
        for (&i, &v) in &self.linear {
            h[i] = v;
        }
        let mut j = vec![0.0; n * n];
        for (&(a, b), &v) in &self.quadratic {
            j[a * n + b] = v;
            j[b * n + a] = v;
        }
        DenseIsing { n, h, j, offset: self.offset }
    }

    pub(crate) fn map_coefficients(&self, mut lin: impl FnMut(f64) -> f64, mut quad: impl FnMut(f64) -> f64) -> Self {
        IsingModel {
            n: self.n,
            linear: self.linear.iter().map(|(&k, &v)| (k, lin(v))).collect(),
            quadratic: self.quadratic.iter().map(|(&k, &v)| (k, quad(v))).collect(),
            offset: self.offset,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Corrected model `2A · C(s) + B · cut(s)` from a normalized coupler set.
/// Carries no constant from the constraint.
pub fn assemble_corrected(c: &CouplerSet, g: &Graph, a: f64, b: f64) -> Result<IsingModel> {
    check_weights(a, b)?;
    if c.n != g.n() {
        return Err(Error::DimensionMismatch(format!("constraint has {} variables, graph has {}", c.n, g.n())));
    }
    let mut m = IsingModel::new(c.n);
    m.quadratic = c.values.iter().map(|(&k, &v)| (k, 2.0 * a * v)).collect();
    m.add_cut_objective(g, b)?;
    Ok(m)
}

impl CouplerSet {
    pub fn new(n: usize) -> Self {
        CouplerSet { n, values: BTreeMap::new() }
    }

    /// Same value on every pair of `n` variables.
    pub fn uniform(n: usize, value: f64) -> Result<Self> {
        check_finite(value, "coupler")?;
        let values = (0..n).flat_map(|i| (i + 1..n).map(move |j| ((i, j), value))).collect();
        Ok(CouplerSet { n, values })
    }

    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (Pair, f64)>) -> Result<Self> {
        let mut c = CouplerSet::new(n);
        for ((i, j), v) in pairs {
            c.set(i, j, v)?;
        }
        Ok(c)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &BTreeMap<Pair, f64> {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values.get(&(i.min(j), i.max(j))).copied().unwrap_or(0.0)
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) -> Result<()> {
        check_finite(v, "coupler")?;
        let key = canonical_pair(i, j, self.n)?;
        self.values.insert(key, v);
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.values().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Divides every coefficient by the largest absolute coefficient, so the
    /// result lies in [-1, 1] with signs preserved.
    pub fn normalized(&self) -> Result<Self> {
        let scale = self.max_abs();
        if scale == 0.0 {
            return Err(Error::AllZeroCouplers);
        }
        Ok(CouplerSet { n: self.n, values: self.values.iter().map(|(&k, &v)| (k, v / scale)).collect() })
    }

    /// The purely quadratic model with these couplers.
    pub fn to_model(&self) -> IsingModel {
        IsingModel { n: self.n, linear: BTreeMap::new(), quadratic: self.values.clone(), offset: 0.0 }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        CouplerSet::from_json(&s)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }
}

/// Dense symmetric matrix form of an [`IsingModel`]; `j` is row-major `n x n`
/// with a zero diagonal.
#[derive(Clone, Debug)]
pub struct DenseIsing {
    pub n: usize,
    pub h: Vec<f64>,
    pub j: Vec<f64>,
    pub offset: f64,
}

impl DenseIsing {
    /// `h_i + Σ_j J_ij s_j` for every `i`.
    pub fn local_fields(&self, spins: &[Spin]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let row = &self.j[i * self.n..(i + 1) * self.n];
                self.h[i] + row.iter().zip(spins).map(|(&v, &s)| v * s as f64).sum::<f64>()
            })
            .collect()
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.h.iter().chain(&self.j).fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

// JSON wire format: keys are decimal indices ("3") and "i,j" pairs, emitted
// in numeric order.

#[derive(Serialize, Deserialize)]
struct RawModel {
    n: usize,
    linear: KeyedMap<usize>,
    quadratic: KeyedMap<Pair>,
    offset: f64,
}

#[derive(Serialize, Deserialize)]
struct RawCouplers {
    n: usize,
    quadratic: KeyedMap<Pair>,
}

pub(crate) trait MapKey: Sized + Ord {
    fn render(&self) -> String;
    fn parse(s: &str) -> Option<Self>;
}

impl MapKey for usize {
    fn render(&self) -> String {
        self.to_string()
    }
    fn parse(s: &str) -> Option<Self> {
        s.trim().parse().ok()
    }
}

impl MapKey for Pair {
    fn render(&self) -> String {
        format!("{},{}", self.0, self.1)
    }
    fn parse(s: &str) -> Option<Self> {
        let (a, b) = s.split_once(',')?;
        Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
    }
}

pub(crate) struct KeyedMap<K>(pub(crate) BTreeMap<K, f64>);

impl<K: MapKey> Serialize for KeyedMap<K> {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(&k.render(), v)?;
        }
        map.end()
    }
}

impl<'de, K: MapKey> Deserialize<'de> for KeyedMap<K> {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = BTreeMap::<String, f64>::deserialize(deserializer)?;
        raw.into_iter()
            .map(|(k, v)| {
                K::parse(&k).map(|key| (key, v)).ok_or_else(|| serde::de::Error::custom(format!("bad key {k:?}")))
            })
            .collect::<std::result::Result<_, _>>()
            .map(KeyedMap)
    }
}

impl TryFrom<RawModel> for IsingModel {
    type Error = Error;

    fn try_from(raw: RawModel) -> Result<Self> {
        let mut m = IsingModel::new(raw.n);
        for (i, v) in raw.linear.0 {
            m.add_linear(i, v)?;
        }
        for ((i, j), v) in raw.quadratic.0 {
            if i >= j {
                return Err(Error::Malformed(format!("quadratic key {i},{j} must satisfy i < j")));
            }
            m.add_quadratic(i, j, v)?;
        }
        m.add_offset(raw.offset)?;
        Ok(m)
    }
}

impl From<IsingModel> for RawModel {
    fn from(m: IsingModel) -> Self {
        RawModel { n: m.n, linear: KeyedMap(m.linear), quadratic: KeyedMap(m.quadratic), offset: m.offset }
    }
}

impl TryFrom<RawCouplers> for CouplerSet {
    type Error = Error;

    fn try_from(raw: RawCouplers) -> Result<Self> {
        if let Some(&(i, j)) = raw.quadratic.0.keys().find(|(i, j)| i >= j) {
            return Err(Error::Malformed(format!("coupler key {i},{j} must satisfy i < j")));
        }
        CouplerSet::from_pairs(raw.n, raw.quadratic.0)
    }
}

impl From<CouplerSet> for RawCouplers {
    fn from(c: CouplerSet) -> Self {
        RawCouplers { n: c.n, quadratic: KeyedMap(c.values) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::rng_from_seed;
    use crate::graph::imbalance;
    use proptest::prelude::*;
    use rand::Rng;

    fn all_assignments(n: usize) -> impl Iterator<Item = Vec<Spin>> {
        (0..1u64 << n).map(move |b| crate::spins::spins_from_bits(b, n))
    }

    #[test]
    fn constraint_coefficients() {
        let m = IsingModel::constraint(4, 1.0).unwrap();
        assert_eq!(m.quadratic().len(), 6);
        assert!(m.quadratic().values().all(|&v| v == 2.0));
        assert!(m.linear().is_empty());
        assert_eq!(m.offset(), 4.0);
        assert_eq!(m.energy(&[1, 1, -1, -1]).unwrap(), 0.0);
        assert_eq!(m.energy(&[1, 1, 1, 1]).unwrap(), 16.0);
    }

    #[test]
    fn constraint_energy_is_penalty() {
        let m = IsingModel::constraint(7, 1.5).unwrap();
        for s in all_assignments(7) {
            let imb = imbalance(&s).unwrap() as f64;
            assert_eq!(m.energy(&s).unwrap(), 1.5 * imb * imb);
        }
    }

    #[test]
    fn constraint_rejects_bad_input() {
        assert!(IsingModel::constraint(1, 1.0).is_err());
        assert!(IsingModel::constraint(4, 0.0).is_err());
        let g = Graph::empty(4).unwrap();
        assert!(IsingModel::graph_partitioning(&g, -1.0, 1.0).is_err());
        assert!(IsingModel::graph_partitioning(&g, 1.0, 0.0).is_err());
    }

    #[test]
    fn gp_examples() {
        let empty = Graph::empty(4).unwrap();
        assert_eq!(IsingModel::graph_partitioning(&empty, 1.0, 1.0).unwrap(), IsingModel::constraint(4, 1.0).unwrap());
        let k4 = Graph::complete(4).unwrap();
        let m = IsingModel::graph_partitioning(&k4, 9.0, 1.0).unwrap();
        assert_eq!(m.energy(&[1, 1, -1, -1]).unwrap(), 4.0);
    }

    #[test]
    fn gp_minimum_is_balanced_minimum_cut() {
        let g = Graph::erdos_renyi(10, 0.5, 7).unwrap();
        let m = IsingModel::graph_partitioning(&g, 2.0, 1.0).unwrap();
        let (best_s, _) = all_assignments(10)
            .map(|s| {
                let e = m.energy(&s).unwrap();
                (s, e)
            })
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        let brute =
            all_assignments(10).filter(|s| imbalance(s).unwrap() == 0).map(|s| g.cut_size(&s).unwrap()).min().unwrap();
        assert_eq!(imbalance(&best_s).unwrap(), 0);
        assert_eq!(g.cut_size(&best_s).unwrap(), brute);
    }

    #[test]
    fn energy_examples() {
        let zero = IsingModel::new(3);
        assert!(all_assignments(3).all(|s| zero.energy(&s).unwrap() == 0.0));
        let mut m = IsingModel::new(2);
        m.add_linear(0, 1.0).unwrap();
        m.add_quadratic(0, 1, -2.0).unwrap();
        assert_eq!(m.energy(&[1, 1]).unwrap(), -1.0);
        assert!(matches!(m.energy(&[1]), Err(Error::LengthMismatch { .. })));
        assert!(m.energy(&[1, 3]).is_err());
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn energy_matches_naive_double_loop() {
        let mut rng = rng_from_seed(11);
        let n = 8;
        let mut m = IsingModel::new(n);
        let mut h = vec![0.0; n];
        let mut jm = vec![vec![0.0; n]; n];
        for (i, hi) in h.iter_mut().enumerate() {
            *hi = rng.random_range(-2.0..2.0);
            m.add_linear(i, *hi).unwrap();
            for j in i + 1..n {
                jm[i][j] = rng.random_range(-1.0..1.0);
                m.add_quadratic(i, j, jm[i][j]).unwrap();
            }
        }
        m.add_offset(0.75).unwrap();
        for _ in 0..100 {
            let s: Vec<Spin> = (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
            let mut naive = 0.75;
            for i in 0..n {
                naive += h[i] * s[i] as f64;
                for j in 0..n {
                    if i < j {
                        naive += jm[i][j] * s[i] as f64 * s[j] as f64;
                    }
                }
            }
            assert!((m.energy(&s).unwrap() - naive).abs() < 1e-12);
        }
    }

    #[test]
    fn normalize_examples() {
        let c = CouplerSet::from_pairs(3, [((0, 1), 2.0), ((0, 2), 4.0), ((1, 2), 8.0)]).unwrap();
        let v: Vec<f64> = c.normalized().unwrap().values().values().copied().collect();
        assert_eq!(v, vec![0.25, 0.5, 1.0]);
        let u = CouplerSet::uniform(5, 18.0).unwrap().normalized().unwrap();
        assert!(u.values().values().all(|&x| x == 1.0));
        let s = CouplerSet::from_pairs(3, [((0, 1), -3.0), ((1, 2), 6.0)]).unwrap().normalized().unwrap();
        assert_eq!(s.get(0, 1), -0.5);
        assert_eq!(s.get(1, 2), 1.0);
        assert!(matches!(CouplerSet::uniform(3, 0.0).unwrap().normalized(), Err(Error::AllZeroCouplers)));
    }

    #[test]
    fn identity_correction_drops_only_the_constant() {
        let g = Graph::erdos_renyi(8, 0.4, 3).unwrap();
        let c = CouplerSet::uniform(8, 1.0).unwrap();
        let corrected = assemble_corrected(&c, &g, 3.0, 1.0).unwrap();
        let original = IsingModel::graph_partitioning(&g, 3.0, 1.0).unwrap();
        for s in all_assignments(8) {
            let d = original.energy(&s).unwrap() - corrected.energy(&s).unwrap();
            assert!((d - 24.0).abs() < 1e-9);
        }
        let empty = Graph::empty(8).unwrap();
        let bare = assemble_corrected(&c, &empty, 3.0, 1.0).unwrap();
        assert_eq!(bare.offset(), 0.0);
        assert!(bare.quadratic().values().all(|&v| v == 6.0));
        assert!(assemble_corrected(&CouplerSet::uniform(7, 1.0).unwrap(), &g, 3.0, 1.0).is_err());
    }

    #[test]
    fn json_format() {
        let mut m = IsingModel::new(12);
        m.add_linear(10, 0.5).unwrap();
        m.add_quadratic(11, 2, -1.25).unwrap();
        m.add_quadratic(0, 1, 3.0).unwrap();
        m.add_offset(2.0).unwrap();
        let text = m.to_json().unwrap();
        assert_eq!(text, r#"{"n":12,"linear":{"10":0.5},"quadratic":{"0,1":3.0,"2,11":-1.25},"offset":2.0}"#);
        assert_eq!(IsingModel::from_json(&text).unwrap(), m);
        assert!(IsingModel::from_json(r#"{"n":2,"linear":{},"quadratic":{"1,0":1.0},"offset":0}"#).is_err());
        assert!(IsingModel::from_json(r#"{"n":2,"linear":{"5":1.0},"quadratic":{},"offset":0}"#).is_err());
        let c = CouplerSet::from_pairs(3, [((0, 2), 0.5)]).unwrap();
        assert_eq!(c.to_json().unwrap(), r#"{"n":3,"quadratic":{"0,2":0.5}}"#);
    }

    fn random_couplers() -> impl Strategy<Value = CouplerSet> {
        (2usize..9).prop_flat_map(|n| {
            proptest::collection::vec(-50.0f64..50.0, n * (n - 1) / 2).prop_map(move |vals| {
                let pairs = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)));
                CouplerSet::from_pairs(n, pairs.zip(vals)).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn normalization_is_idempotent(c in random_couplers()) {
            prop_assume!(c.max_abs() > 0.0);
            let once = c.normalized().unwrap();
            prop_assert_eq!(once.max_abs(), 1.0);
            prop_assert_eq!(once.normalized().unwrap(), once.clone());
            for (k, v) in c.values() {
                prop_assert_eq!(v.signum(), once.values()[k].signum());
            }
        }

        #[test]
        fn json_round_trip_is_bit_exact(c in random_couplers(), h in proptest::collection::vec(-3.0f64..3.0, 8), off in -1e6f64..1e6) {
            let mut m = c.to_model();
            for (i, v) in h.iter().take(m.n()).enumerate() {
                m.add_linear(i, *v).unwrap();
            }
            m.add_offset(off).unwrap();
            prop_assert_eq!(IsingModel::from_json(&m.to_json().unwrap()).unwrap(), m);
            prop_assert_eq!(CouplerSet::from_json(&c.to_json().unwrap()).unwrap(), c);
        }

        #[test]
        fn quadratic_only_models_are_flip_symmetric(c in random_couplers(), bits in any::<u64>()) {
            let m = c.to_model();
            let s = crate::spins::spins_from_bits(bits, m.n());
            let f: Vec<Spin> = s.iter().map(|&x| -x).collect();
            prop_assert_eq!(m.energy(&s).unwrap(), m.energy(&f).unwrap());
        }
    }
}
