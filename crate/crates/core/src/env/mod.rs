//! Random conductance fields on the bonds of Z^d.
//!
//! A field assigns to every nearest-neighbor bond e and every time t a rate
//! omega_t(e) >= c2 > 0, symmetric in the bond orientation. Four families are
//! implemented:
//!
//! * `Constant(c)`: deterministic homogeneous rates,
//! * `StaticIID(law)`: time-independent iid draws per bond,
//! * `Renewal(law, lambda)`: per-bond Poisson(lambda) refresh times with iid
//!   redraws, piecewise constant and right-continuous in time (time-space
//!   stationary and ergodic by construction),
//! * `Layered(a)`: bonds along the first axis carry Z(x_2) v c2 with Z a
//!   scale-1 Pareto of tail exponent a keyed by the layer coordinate x_2; all
//!   transversal bonds are exactly 1.
//!
//! Fields are immutable values. Shifting and time reversal are represented by
//! composing the query map with offsets, so both are exact: a shifted or
//! reversed field answers queries with bit-identical rates to the manually
//! offset base field.

pub mod stream;

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::error::CoreError;
use crate::lattice::LatticeBox;
use crate::point::{Edge, Vertex, MAX_DIM};
use stream::{
    stream, TAG_LAYER, TAG_RENEWAL_BLOCK, TAG_RENEWAL_FALLBACK, TAG_STATIC_EDGE,
};

/// Blocks scanned backwards for the last refresh before giving up; a block of
/// unit mean holds no refresh with probability 1/e, so the scan runs past k
/// blocks with probability e^{-k}.
const RENEWAL_BACKSCAN: i64 = 4096;

/// Marginal single-rate laws, all with support in [c2, infinity) and finite mean.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MarginalLaw {
    Point { value: f64 },
    /// c2 * U^{-1/shape}; finite mean requires shape > 1.
    Pareto { shape: f64 },
    /// c2 + exp(location + scale * Z).
    LogNormal { location: f64, scale: f64 },
    TwoPoint { lo: f64, hi: f64, p_hi: f64 },
}

impl MarginalLaw {
    fn validate(&self, c2: f64) -> Result<(), CoreError> {
        let bad = |m: String| Err(CoreError::InvalidField(m));
        match *self {
            MarginalLaw::Point { value } => {
                if !(value >= c2) {
                    return bad(format!("point mass {value} below lower bound {c2}"));
                }
            }
            MarginalLaw::Pareto { shape } => {
                if !(shape > 1.0) {
                    return bad(format!("pareto shape {shape} <= 1 has infinite mean"));
                }
            }
            MarginalLaw::LogNormal { location, scale } => {
                if !location.is_finite() || !(scale >= 0.0) || !scale.is_finite() {
                    return bad(format!("lognormal parameters ({location}, {scale}) invalid"));
                }
            }
            MarginalLaw::TwoPoint { lo, hi, p_hi } => {
                if !(c2 <= lo && lo <= hi) || !(0.0..=1.0).contains(&p_hi) {
                    return bad(format!("two-point law ({lo}, {hi}, {p_hi}) invalid for c2={c2}"));
                }
            }
        }
        Ok(())
    }

    pub fn sample<R: Rng>(&self, c2: f64, rng: &mut R) -> f64 {
        match *self {
            MarginalLaw::Point { value } => value,
            MarginalLaw::Pareto { shape } => {
                // 1 - U lies in (0, 1], so the draw is finite
                let u: f64 = rng.random();
                c2 * (1.0 - u).powf(-1.0 / shape)
            }
            MarginalLaw::LogNormal { location, scale } => {
                let z: f64 = StandardNormal.sample(rng);
                c2 + (location + scale * z).exp()
            }
            MarginalLaw::TwoPoint { lo, hi, p_hi } => {
                let u: f64 = rng.random();
                if u < p_hi {
                    hi
                } else {
                    lo
                }
            }
        }
    }

    pub fn mean(&self, c2: f64) -> f64 {
        match *self {
            MarginalLaw::Point { value } => value,
            MarginalLaw::Pareto { shape } => c2 * shape / (shape - 1.0),
            MarginalLaw::LogNormal { location, scale } => {
                c2 + (location + 0.5 * scale * scale).exp()
            }
            MarginalLaw::TwoPoint { lo, hi, p_hi } => lo * (1.0 - p_hi) + hi * p_hi,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FieldModel {
    Constant { rate: f64 },
    StaticIID { law: MarginalLaw },
    Renewal { law: MarginalLaw, rate: f64 },
    /// Tail exponent of the layer law; requires dimension >= 2 and c2 <= 1.
    Layered { shape: f64 },
}

#[derive(Clone, Debug)]
pub struct EnvironmentField {
    dim: usize,
    model: FieldModel,
    c2: f64,
    seed: u64,
    /// Query time t maps to base time s0 + t (s0 - t when reversed).
    s0: f64,
    z0: Vertex,
    reversed: bool,
}

impl EnvironmentField {
    pub fn new(model: FieldModel, dim: usize, c2: f64, seed: u64) -> Result<Self, CoreError> {
        if dim < 1 || dim > MAX_DIM {
            return Err(CoreError::BadDimension(dim, MAX_DIM));
        }
        if !(c2 > 0.0) || !c2.is_finite() {
            return Err(CoreError::InvalidField(format!("lower bound c2={c2} must be positive")));
        }
        match model {
            FieldModel::Constant { rate } => {
                if !(rate >= c2) || !rate.is_finite() {
                    return Err(CoreError::InvalidField(format!(
                        "constant rate {rate} below lower bound {c2}"
                    )));
                }
            }
            FieldModel::StaticIID { law } => law.validate(c2)?,
            FieldModel::Renewal { law, rate } => {
                law.validate(c2)?;
                if !(rate > 0.0) || !rate.is_finite() {
                    return Err(CoreError::InvalidField(format!("refresh rate {rate} invalid")));
                }
            }
            FieldModel::Layered { shape } => {
                if !(shape > 1.0) {
                    return Err(CoreError::InvalidField(format!(
                        "layer tail exponent {shape} <= 1 has infinite mean"
                    )));
                }
                if dim < 2 {
                    return Err(CoreError::InvalidField(
                        "layered fields need a transversal coordinate (dimension >= 2)".into(),
                    ));
                }
                if c2 > 1.0 {
                    return Err(CoreError::InvalidField(format!(
                        "layered transversal rates are 1, incompatible with c2={c2} > 1"
                    )));
                }
            }
        }
        Ok(EnvironmentField {
            dim,
            model,
            c2,
            seed,
            s0: 0.0,
            z0: Vertex::origin(dim),
            reversed: false,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn model(&self) -> &FieldModel {
        &self.model
    }

    pub fn is_time_dependent(&self) -> bool {
        matches!(self.model, FieldModel::Renewal { .. })
    }

    /// Mean rate of a single bond, used to size pilot boxes.
    pub fn mean_rate(&self) -> f64 {
        match self.model {
            FieldModel::Constant { rate } => rate,
            FieldModel::StaticIID { law } | FieldModel::Renewal { law, .. } => law.mean(self.c2),
            FieldModel::Layered { shape } => {
                let horiz = (shape / (shape - 1.0)).max(self.c2);
                (horiz + (self.dim as f64 - 1.0)) / self.dim as f64
            }
        }
    }

    /// Field translated by (s, z): queries at (t, e) read the base field at
    /// (t + s, e + z).
    pub fn shift(&self, s: f64, z: &Vertex) -> EnvironmentField {
        let sigma = if self.reversed { -1.0 } else { 1.0 };
        let mut out = self.clone();
        out.s0 += sigma * s;
        out.z0 = self.z0.add(z);
        out
    }

    /// Field running backwards in time: queries at t read the base field at -t.
    pub fn reverse(&self) -> EnvironmentField {
        let mut out = self.clone();
        out.reversed = !self.reversed;
        out
    }

    fn base_time(&self, t: f64) -> f64 {
        if self.reversed {
            self.s0 - t
        } else {
            self.s0 + t
        }
    }

    fn edge_payload(&self, edge: &Edge) -> ([i64; MAX_DIM + 1], usize) {
        let base = edge.translate(&self.z0);
        let (lower, axis) = base.canonical();
        let mut payload = [0i64; MAX_DIM + 1];
        payload[0] = axis as i64;
        payload[1..=self.dim].copy_from_slice(lower.coords());
        (payload, axis)
    }

    pub fn conductance(&self, t: f64, edge: &Edge) -> Result<f64, CoreError> {
        if edge.from.dim() != self.dim || edge.from.sub(&edge.to).l1_norm() != 1 {
            return Err(CoreError::NotNeighbors(edge.from, edge.to));
        }
        Ok(self.rate_unchecked(t, edge))
    }

    /// Same as `conductance` without the contract check; hot path for the
    /// kernel engine, which enumerates edges it already validated.
    pub(crate) fn rate_unchecked(&self, t: f64, edge: &Edge) -> f64 {
        let (payload, axis) = self.edge_payload(edge);
        match self.model {
            FieldModel::Constant { rate } => rate,
            FieldModel::StaticIID { law } => {
                let mut rng = stream(self.seed, TAG_STATIC_EDGE, &payload[..=self.dim]);
                law.sample(self.c2, &mut rng)
            }
            FieldModel::Layered { shape } => {
                if axis == 0 {
                    // payload[2] is the layer coordinate x_2 of the lower endpoint
                    let mut rng = stream(self.seed, TAG_LAYER, &payload[2..3]);
                    let u: f64 = rng.random();
                    let z = (1.0 - u).powf(-1.0 / shape);
                    z.max(self.c2)
                } else {
                    1.0
                }
            }
            FieldModel::Renewal { law, rate } => {
                self.renewal_value(&law, rate, &payload[..=self.dim], self.base_time(t))
            }
        }
    }

    /// Refresh events of one bond inside base-time block m = [m/lambda, (m+1)/lambda),
    /// sorted by time. Pure function of (seed, bond, m).
    fn block_events(
        &self,
        law: &MarginalLaw,
        lambda: f64,
        payload: &[i64],
        block: i64,
    ) -> Vec<(f64, f64)> {
        let mut key = [0i64; MAX_DIM + 2];
        key[..payload.len()].copy_from_slice(payload);
        key[payload.len()] = block;
        let mut rng = stream(self.seed, TAG_RENEWAL_BLOCK, &key[..payload.len() + 1]);
        let count = Poisson::new(1.0).unwrap().sample(&mut rng) as usize;
        let start = block as f64 / lambda;
        let end = (block + 1) as f64 / lambda;
        let positions: Vec<f64> = (0..count).map(|_| rng.random_range(start..end)).collect();
        let mut events: Vec<(f64, f64)> =
            positions.into_iter().map(|p| (p, law.sample(self.c2, &mut rng))).collect();
        events.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        events
    }

    fn renewal_value(&self, law: &MarginalLaw, lambda: f64, payload: &[i64], tb: f64) -> f64 {
        let m0 = (tb * lambda).floor() as i64;
        for back in 0..=RENEWAL_BACKSCAN {
            let m = m0 - back;
            let events = self.block_events(law, lambda, payload, m);
            // right-continuous: a refresh at exactly tb already applies
            let last = if back == 0 {
                events.iter().rev().find(|(p, _)| *p <= tb)
            } else {
                events.last()
            };
            if let Some((_, v)) = last {
                return *v;
            }
        }
        let mut rng = stream(self.seed, TAG_RENEWAL_FALLBACK, payload);
        law.sample(self.c2, &mut rng)
    }

    /// Piecewise-constant profile of one bond over the query window (s, t):
    /// the value at s, then each interior change as (query time, value from
    /// that time on), sorted by query time.
    pub(crate) fn edge_profile(
        &self,
        edge: &Edge,
        s: f64,
        t: f64,
    ) -> (f64, Vec<(f64, f64)>) {
        let init = self.rate_unchecked(s, edge);
        let (law, lambda) = match self.model {
            FieldModel::Renewal { law, rate } => (law, rate),
            _ => return (init, Vec::new()),
        };
        let (payload, _) = self.edge_payload(edge);
        let payload = &payload[..=self.dim];
        // base-time window endpoints (a, b) with a < b
        let (a, b) = if self.reversed {
            (self.s0 - t, self.s0 - s)
        } else {
            (self.s0 + s, self.s0 + t)
        };
        let ma = (a * lambda).floor() as i64;
        let mb = (b * lambda).floor() as i64;
        let mut base: Vec<(f64, f64)> = Vec::new();
        for m in ma..=mb {
            for (p, v) in self.block_events(&law, lambda, payload, m) {
                if p > a && p < b {
                    base.push((p, v));
                }
            }
        }
        if base.is_empty() {
            return (init, Vec::new());
        }
        let events = if self.reversed {
            // reversed time runs through the base window backwards: after the
            // query image of a base event the bond holds its pre-event value
            let value_at_a = self.renewal_value(&law, lambda, payload, a);
            let mut out = Vec::with_capacity(base.len());
            for i in (0..base.len()).rev() {
                let pre = if i == 0 { value_at_a } else { base[i - 1].1 };
                out.push((self.s0 - base[i].0, pre));
            }
            out
        } else {
            base.iter().map(|(p, v)| (p - self.s0, *v)).collect()
        };
        (init, events)
    }

    /// All interior rate-change times of bonds incident to the box, inside the
    /// open query window (s, t), sorted and deduplicated. Between consecutive
    /// entries every incident conductance is constant.
    pub fn breakpoints(&self, s: f64, t: f64, boxx: &LatticeBox) -> Result<Vec<f64>, CoreError> {
        if s > t {
            return Err(CoreError::BackwardInterval(s, t));
        }
        if !self.is_time_dependent() || s == t {
            return Ok(Vec::new());
        }
        let mut times = Vec::new();
        for edge in boxx.incident_edges() {
            let (_, events) = self.edge_profile(&edge, s, t);
            times.extend(events.into_iter().map(|(q, _)| q));
        }
        times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        times.dedup();
        Ok(times)
    }
}
