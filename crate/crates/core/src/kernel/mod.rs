//! Killed heat kernels on finite boxes by exact piecewise-in-time integration.
//!
//! Between field breakpoints the generator is constant, so each interval is a
//! true matrix exponential, applied by uniformization: with Lambda the largest
//! total jump rate and P = I + L/Lambda (sub-stochastic, entrywise >= 0),
//!
//!   exp(dt L) = e^{-Lambda dt} sum_k (Lambda dt)^k / k! P^k.
//!
//! The Poisson weights are accumulated until their mass reaches 1 - tol, which
//! bounds the l1 truncation error by tol per step; positivity is preserved
//! because no subtraction ever occurs. Time integrals of the kernel (for Green
//! functions) use the exact tail weights int_0^h e^{uL} du
//! = sum_j (P[N > j] / Lambda) P^j of the same expansion.

mod evolve;

use std::sync::Arc;

use crate::env::EnvironmentField;
use crate::error::CoreError;
use crate::lattice::{LatticeBox, OUTSIDE};
use crate::point::Vertex;

pub use evolve::GreenReadout;

/// Per-step l1 truncation budget for uniformization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolveTolerance(f64);

impl EvolveTolerance {
    pub fn new(eps: f64) -> Result<Self, CoreError> {
        if !(eps > 0.0 && eps <= 1e-6) {
            return Err(CoreError::BadTolerance(eps));
        }
        Ok(EvolveTolerance(eps))
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

impl Default for EvolveTolerance {
    fn default() -> Self {
        EvolveTolerance(1e-12)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SliceDirection {
    /// values[i] = p_{s,t}(anchor, vertex i)
    Row,
    /// values[i] = p_{s,t}(vertex i, anchor)
    Col,
}

/// One row or column of the killed kernel on a box, with mass bookkeeping.
#[derive(Clone, Debug)]
pub struct KernelSlice {
    pub domain: Arc<LatticeBox>,
    pub s: f64,
    pub t: f64,
    pub anchor: Vertex,
    pub direction: SliceDirection,
    pub values: Vec<f64>,
    /// 1 - total mass; the probability of having been killed at the boundary.
    pub mass_deficit: f64,
}

impl KernelSlice {
    fn from_values(
        domain: &Arc<LatticeBox>,
        s: f64,
        t: f64,
        anchor: Vertex,
        direction: SliceDirection,
        values: Vec<f64>,
    ) -> Self {
        let mass: f64 = values.iter().sum();
        debug_assert!(mass <= 1.0 + 1e-12);
        debug_assert!(values.iter().all(|v| *v >= 0.0));
        KernelSlice {
            domain: Arc::clone(domain),
            s,
            t,
            anchor,
            direction,
            values,
            mass_deficit: 1.0 - mass,
        }
    }

    pub fn value_at(&self, v: &Vertex) -> f64 {
        self.domain.index_of(v).map_or(0.0, |i| self.values[i])
    }

    pub fn max_entry(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    pub fn total_mass(&self) -> f64 {
        1.0 - self.mass_deficit
    }
}

/// Generator of the killed walk at one time: off-diagonal omega_t(x,y) on
/// adjacent in-box pairs, diagonal minus the total rate over all 2d incident
/// bonds (bonds leaving the box kill).
pub struct GeneratorMatrix {
    pub domain: Arc<LatticeBox>,
    pub time: f64,
    /// n * 2d bond rates in neighbor-slot order.
    pub rates: Vec<f64>,
    /// Diagonal entries, all <= -2d c2.
    pub diag: Vec<f64>,
}

impl GeneratorMatrix {
    pub fn n(&self) -> usize {
        self.domain.len()
    }

    /// Largest total jump rate, the uniformization constant.
    pub fn lambda(&self) -> f64 {
        self.diag.iter().fold(0.0, |m, d| m.max(-d))
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.diag[i];
        }
        let twod = 2 * self.domain.dim();
        for k in 0..twod {
            if self.domain.neighbor(i, k) == j {
                return self.rates[i * twod + k];
            }
        }
        0.0
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        let twod = 2 * self.domain.dim();
        let mut s = self.diag[i];
        for k in 0..twod {
            if self.domain.neighbor(i, k) != OUTSIDE {
                s += self.rates[i * twod + k];
            }
        }
        s
    }

    /// y = L x.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let twod = 2 * self.domain.dim();
        let nbr = self.domain.neighbor_slots();
        for i in 0..self.n() {
            let mut acc = self.diag[i] * x[i];
            for k in 0..twod {
                let j = nbr[i * twod + k];
                if j != OUTSIDE {
                    acc += self.rates[i * twod + k] * x[j];
                }
            }
            y[i] = acc;
        }
    }
}

pub fn generator(
    field: &EnvironmentField,
    t: f64,
    domain: &Arc<LatticeBox>,
) -> Result<GeneratorMatrix, CoreError> {
    if domain.is_empty() {
        return Err(CoreError::Invalid("empty box".into()));
    }
    let (rates, diag) = evolve::rates_at(field, domain, t);
    Ok(GeneratorMatrix { domain: Arc::clone(domain), time: t, rates, diag })
}

fn check_initial(domain: &LatticeBox, init: &[f64]) -> Result<(), CoreError> {
    if init.len() != domain.len() {
        return Err(CoreError::BadInitial(format!(
            "length {} does not match box size {}",
            init.len(),
            domain.len()
        )));
    }
    let mut sum = 0.0;
    for v in init {
        if !(*v >= 0.0) {
            return Err(CoreError::BadInitial(format!("negative entry {v}")));
        }
        sum += v;
    }
    if sum > 1.0 + 1e-12 {
        return Err(CoreError::BadInitial(format!("total mass {sum} exceeds 1")));
    }
    Ok(())
}

/// Integrate the forward equation from the given initial sub-probability over
/// [s, t]; the result's mass deficit is the killed mass.
pub fn evolve(
    field: &EnvironmentField,
    domain: &Arc<LatticeBox>,
    s: f64,
    t: f64,
    init: &[f64],
    tol: EvolveTolerance,
) -> Result<KernelSlice, CoreError> {
    let mut slices = evolve_checkpoints(field, domain, s, &[t], init, tol)?;
    Ok(slices.pop().unwrap())
}

/// Same evolution captured at several increasing times (one pass).
pub fn evolve_checkpoints(
    field: &EnvironmentField,
    domain: &Arc<LatticeBox>,
    s: f64,
    times: &[f64],
    init: &[f64],
    tol: EvolveTolerance,
) -> Result<Vec<KernelSlice>, CoreError> {
    check_initial(domain, init)?;
    let anchor = domain.center();
    let captured = evolve::run(field, domain, s, times, init, tol.value(), false)?;
    Ok(captured
        .slices
        .into_iter()
        .zip(times)
        .map(|(values, t)| {
            KernelSlice::from_values(domain, s, *t, anchor, SliceDirection::Row, values)
        })
        .collect())
}

pub fn heat_kernel_row(
    field: &EnvironmentField,
    domain: &Arc<LatticeBox>,
    s: f64,
    t: f64,
    x: &Vertex,
    tol: EvolveTolerance,
) -> Result<KernelSlice, CoreError> {
    let mut slices = heat_kernel_row_checkpoints(field, domain, s, &[t], x, tol)?;
    Ok(slices.pop().unwrap())
}

pub fn heat_kernel_row_checkpoints(
    field: &EnvironmentField,
    domain: &Arc<LatticeBox>,
    s: f64,
    times: &[f64],
    x: &Vertex,
    tol: EvolveTolerance,
) -> Result<Vec<KernelSlice>, CoreError> {
    let i = domain.index_of(x).ok_or(CoreError::OutsideBox(*x))?;
    let mut init = vec![0.0; domain.len()];
    init[i] = 1.0;
    let captured = evolve::run(field, domain, s, times, &init, tol.value(), false)?;
    Ok(captured
        .slices
        .into_iter()
        .zip(times)
        .map(|(values, t)| {
            KernelSlice::from_values(domain, s, *t, *x, SliceDirection::Row, values)
        })
        .collect())
}

/// Column p_{s,t}(., y), computed through time reversal: the reversed field is
/// evolved from y over [-t, -s]. On killed boxes this adjoint identity is
/// exact, so columns agree with brute-force row assembly to solver precision.
pub fn heat_kernel_col(
    field: &EnvironmentField,
    domain: &Arc<LatticeBox>,
    s: f64,
    t: f64,
    y: &Vertex,
    tol: EvolveTolerance,
) -> Result<KernelSlice, CoreError> {
    let i = domain.index_of(y).ok_or(CoreError::OutsideBox(*y))?;
    let reversed = field.reverse();
    let mut init = vec![0.0; domain.len()];
    init[i] = 1.0;
    let captured = evolve::run(&reversed, domain, -t, &[-s], &init, tol.value(), false)?;
    let values = captured.slices.into_iter().next().unwrap();
    Ok(KernelSlice::from_values(domain, s, t, *y, SliceDirection::Col, values))
}

/// Kernel time integrals from one anchor: per-vertex int_0^{t_max} p_{0,u} du,
/// per-bond exit fluxes, and the surviving mass at t_max.
pub fn green_readout(
    field: &EnvironmentField,
    domain: &Arc<LatticeBox>,
    x0: &Vertex,
    t_max: f64,
    tol: EvolveTolerance,
) -> Result<GreenReadout, CoreError> {
    let i = domain.index_of(x0).ok_or(CoreError::OutsideBox(*x0))?;
    let mut init = vec![0.0; domain.len()];
    init[i] = 1.0;
    let captured = evolve::run(field, domain, 0.0, &[t_max], &init, tol.value(), true)?;
    Ok(captured.green.unwrap())
}

/// Energy of f against the killed generator:
/// 1/2 sum_{x~y in box} omega(x,y)(f(y)-f(x))^2 + sum_{boundary bonds} omega f(x)^2.
pub fn dirichlet_form(
    field: &EnvironmentField,
    t: f64,
    domain: &LatticeBox,
    f: &[f64],
) -> Result<f64, CoreError> {
    if f.len() != domain.len() {
        return Err(CoreError::Invalid(format!(
            "function length {} does not match box size {}",
            f.len(),
            domain.len()
        )));
    }
    let twod = 2 * domain.dim();
    let mut acc = 0.0;
    for i in 0..domain.len() {
        for k in 0..twod {
            let edge = domain.slot_edge(i, k);
            let w = field.rate_unchecked(t, &edge);
            let j = domain.neighbor(i, k);
            if j != OUTSIDE {
                let d = f[j] - f[i];
                acc += 0.5 * w * d * d;
            } else {
                acc += w * f[i] * f[i];
            }
        }
    }
    Ok(acc)
}

/// Smallest tested radius whose killed mass at the horizon stays below the
/// target: a pilot evolution doubles the radius until the computed deficit
/// (the certificate itself) is small enough.
pub fn auto_radius(
    field: &EnvironmentField,
    s: f64,
    t: f64,
    anchor: &Vertex,
    deficit_target: f64,
    tol: EvolveTolerance,
) -> Result<i64, CoreError> {
    if !(deficit_target > 0.0) {
        return Err(CoreError::Invalid(format!("deficit target {deficit_target}")));
    }
    let d = field.dim() as f64;
    let spread = (2.0 * d * field.mean_rate() * (t - s).max(0.0)).sqrt();
    let mut r = (4.0 + 3.0 * spread).ceil() as i64;
    loop {
        let domain = Arc::new(LatticeBox::new(*anchor, r, field.dim())?);
        let slice = heat_kernel_row(field, &domain, s, t, anchor, tol)?;
        if slice.mass_deficit <= deficit_target {
            return Ok(r);
        }
        r = r + r / 2 + 4;
        if r > 4096 {
            return Err(CoreError::Invalid(format!(
                "auto radius exceeded 4096 before reaching deficit {deficit_target}"
            )));
        }
    }
}
