use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{SampleSet, Sampler, SamplerConfig};
use crate::error::{Error, Result};
use crate::exec::rng_from_seed;
use crate::ising::{IsingModel, KeyedMap, Pair};

/// Hardware programming ranges for linear and quadratic coefficients.
const H_RANGE: f64 = 2.0;
const J_RANGE: f64 = 1.0;

/// Annealing schedule of the default emulated device, in hardware units.
/// Warm enough that coupler corrections move pair statistics smoothly; at
/// much colder settings the sampler responds almost discontinuously and the
/// correction loop with `k = 10` overshoots.
pub const DEFAULT_HARDWARE_BETA: (f64, f64) = (0.05, 1.6);

/// Static imperfections applied to every model before it reaches the inner
/// sampler.
///
/// With `range_clamp` set, offsets are in hardware units: the model is first
/// scaled so that `h ∈ [-2, 2]` and `J ∈ [-1, 1]`. Without it they are added
/// in the model's own units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBias", into = "RawBias")]
pub struct HardwareBiasModel {
    pub linear_offsets: BTreeMap<usize, f64>,
    pub coupler_offsets: BTreeMap<Pair, f64>,
    /// Fraction of each coupler's value leaked onto both incident linear terms.
    pub leakage: f64,
    pub quantization_bits: Option<u32>,
    pub range_clamp: bool,
    /// Effective inverse-temperature schedule of the emulated device, in the
    /// units of the realized model. Overrides the caller's `beta_range`.
    pub anneal_beta: Option<(f64, f64)>,
}

impl Default for HardwareBiasModel {
    fn default() -> Self {
        HardwareBiasModel::zero()
    }
}

impl HardwareBiasModel {
    /// No perturbation at all.
    pub fn zero() -> Self {
        HardwareBiasModel {
            linear_offsets: BTreeMap::new(),
            coupler_offsets: BTreeMap::new(),
            leakage: 0.0,
            quantization_bits: None,
            range_clamp: false,
            anneal_beta: None,
        }
    }

    /// Coupler offsets drawn uniformly from `coupler_range` for every pair of
    /// `n` variables, linear offsets from `linear_range` (pass `(0.0, 0.0)` to
    /// disable either), range clamping on.
    pub fn random(
        n: usize,
        coupler_range: (f64, f64),
        linear_range: (f64, f64),
        leakage: f64,
        quantization_bits: Option<u32>,
        seed: u64,
    ) -> Result<Self> {
        let mut rng = rng_from_seed(seed);
        let mut draw = |(lo, hi): (f64, f64)| if lo < hi { rng.random_range(lo..hi) } else { lo };
        let coupler_offsets =
            (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|p| (p, draw(coupler_range))).collect();
        let linear_offsets = (0..n).map(|i| (i, draw(linear_range))).filter(|&(_, v)| v != 0.0).collect();
        let model = HardwareBiasModel {
            linear_offsets,
            coupler_offsets,
            leakage,
            quantization_bits,
            range_clamp: true,
            anneal_beta: None,
        };
        model.validate()?;
        Ok(model)
    }

    /// The default synthetic hardware: coupler offsets uniform in
    /// [-0.3, 0.3] (hardware units, where the constraint's `2A` coupler maps to
    /// 1), leakage 0.05, 8-bit coefficients, annealing down to an effective
    /// inverse temperature of [`DEFAULT_HARDWARE_BETA`].
    pub fn default_experiment(n: usize, seed: u64) -> Self {
        let mut m = HardwareBiasModel::random(n, (-0.3, 0.3), (0.0, 0.0), 0.05, Some(8), seed)
            .expect("valid default bias model");
        m.anneal_beta = Some(DEFAULT_HARDWARE_BETA);
        m
    }

    pub fn is_zero(&self) -> bool {
        self.linear_offsets.values().all(|&v| v == 0.0)
            && self.coupler_offsets.values().all(|&v| v == 0.0)
            && self.leakage == 0.0
            && self.quantization_bits.is_none()
            && !self.range_clamp
            && self.anneal_beta.is_none()
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.linear_offsets.values().chain(self.coupler_offsets.values()).all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("bias offsets must be finite".into()));
        }
        if let Some(&(i, j)) = self.coupler_offsets.keys().find(|(i, j)| i >= j) {
            return Err(Error::InvalidParameter(format!("coupler offset key {i},{j} must satisfy i < j")));
        }
        if !(0.0..1.0).contains(&self.leakage) {
            return Err(Error::InvalidParameter(format!("leakage {} outside [0, 1)", self.leakage)));
        }
        if let Some(bits) = self.quantization_bits {
            if !(2..=16).contains(&bits) {
                return Err(Error::InvalidParameter(format!("quantization bits {bits} outside [2, 16]")));
            }
        }
        if let Some((b0, b1)) = self.anneal_beta {
            if !(b0 > 0.0 && b0 <= b1 && b1.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "anneal_beta ({b0}, {b1}) must satisfy 0 < initial <= final"
                )));
            }
        }
        Ok(())
    }

    /// The model the hardware actually realizes when asked for `model`.
    /// Offsets indexed beyond `model.n()` are ignored.
    pub fn perturb(&self, model: &IsingModel) -> Result<IsingModel> {
        let n = model.n();
        let (max_h, max_j) = model.max_abs_coefficients();
        let mut m = model.clone();

        let (h_range, j_range) = if self.range_clamp {
            let scale = (max_h / H_RANGE).max(max_j / J_RANGE);
            if scale > 0.0 {
                m = m.map_coefficients(|h| h / scale, |j| j / scale);
            }
            (H_RANGE, J_RANGE)
        } else {
            (max_h, max_j)
        };

        if let Some(bits) = self.quantization_bits {
            m = m.map_coefficients(|h| quantize(h, h_range, bits), |j| quantize(j, j_range, bits));
        }

        for (&i, &dh) in self.linear_offsets.range(..n) {
            m.add_linear(i, dh)?;
        }
        for (&(i, j), &dj) in &self.coupler_offsets {
            if j < n {
                m.add_quadratic(i, j, dj)?;
            }
        }

        if self.leakage > 0.0 {
            let leaked: Vec<(Pair, f64)> = m.quadratic().iter().map(|(&p, &v)| (p, self.leakage * v)).collect();
            for ((i, j), v) in leaked {
                m.add_linear(i, v)?;
                m.add_linear(j, v)?;
            }
        }
        Ok(m)
    }

    /// First 8 bytes of the SHA-256 of the JSON encoding, hex encoded.
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("bias model serializes");
        hex::encode(&Sha256::digest(json.as_bytes())[..8])
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Rounds `x` to the nearest of `2^bits` evenly spaced levels spanning
/// `[-range, range]` (both endpoints are levels). Zero stays zero.
fn quantize(x: f64, range: f64, bits: u32) -> f64 {
    if range <= 0.0 || x == 0.0 {
        return x;
    }
    let step = 2.0 * range / ((1u64 << bits) - 1) as f64;
    let level = ((x.clamp(-range, range) + range) / step).round();
    -range + level * step
}

/// Emulates annealing hardware: perturbs the model with a
/// [`HardwareBiasModel`], samples the perturbed model with `inner`, and
/// reports energies against the model the caller asked for.
#[derive(Clone, Debug)]
pub struct BiasedSampler<S> {
    pub inner: S,
    pub bias: HardwareBiasModel,
}

impl<S: Sampler> BiasedSampler<S> {
    pub fn new(inner: S, bias: HardwareBiasModel) -> Result<Self> {
        bias.validate()?;
        Ok(BiasedSampler { inner, bias })
    }
}

impl<S: Sampler> Sampler for BiasedSampler<S> {
    fn sample(&self, model: &IsingModel, cfg: &SamplerConfig) -> Result<SampleSet> {
        let realized = self.bias.perturb(model)?;
        let samples = match self.bias.anneal_beta {
            Some(beta) => self.inner.sample(&realized, &SamplerConfig { beta_range: Some(beta), ..cfg.clone() })?,
            None => self.inner.sample(&realized, cfg)?,
        };
        samples.rescored(model)
    }

    fn fingerprint(&self) -> String {
        format!("biased-{}-{}", self.inner.fingerprint(), self.bias.digest())
    }
}

#[derive(Serialize, Deserialize)]
struct RawBias {
    linear_offsets: KeyedMap<usize>,
    coupler_offsets: KeyedMap<Pair>,
    leakage: f64,
    quantization_bits: Option<u32>,
    range_clamp: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    anneal_beta: Option<(f64, f64)>,
}

impl TryFrom<RawBias> for HardwareBiasModel {
    type Error = Error;

    fn try_from(raw: RawBias) -> Result<Self> {
        let m = HardwareBiasModel {
            linear_offsets: raw.linear_offsets.0,
            coupler_offsets: raw.coupler_offsets.0,
            leakage: raw.leakage,
            quantization_bits: raw.quantization_bits,
            range_clamp: raw.range_clamp,
            anneal_beta: raw.anneal_beta,
        };
        m.validate()?;
        Ok(m)
    }
}

impl From<HardwareBiasModel> for RawBias {
    fn from(m: HardwareBiasModel) -> Self {
        RawBias {
            linear_offsets: KeyedMap(m.linear_offsets),
            coupler_offsets: KeyedMap(m.coupler_offsets),
            leakage: m.leakage,
            quantization_bits: m.quantization_bits,
            range_clamp: m.range_clamp,
            anneal_beta: m.anneal_beta,
        }
    }
}
