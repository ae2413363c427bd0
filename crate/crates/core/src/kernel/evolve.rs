//! Evolution engine: piecewise-constant timelines plus uniformization steps.

use std::sync::Arc;

use rayon::prelude::*;

use crate::env::EnvironmentField;
use crate::error::CoreError;
use crate::lattice::{LatticeBox, OUTSIDE};

/// Largest Lambda*dt handled by a single uniformization expansion; longer
/// intervals are split so e^{-Lambda dt} stays far from underflow.
const MAX_STEP_MASS: f64 = 32.0;
/// Below this box size the rayon dispatch overhead outweighs the matvec.
const PAR_MIN: usize = 16384;

pub(crate) struct Captured {
    pub slices: Vec<Vec<f64>>,
    pub green: Option<GreenReadout>,
}

/// Time integrals of one killed evolution, the raw material for Green values:
/// per-vertex int_0^{t_max} p_u(x0, .) du, the integrated probability flux
/// through every killed bond, and the mass still alive at the horizon.
pub struct GreenReadout {
    pub domain: Arc<LatticeBox>,
    pub integral: Vec<f64>,
    /// n * 2d in neighbor-slot order; nonzero only where the slot is killed.
    pub exit_flux: Vec<f64>,
    pub alive: Vec<f64>,
    pub t_max: f64,
}

impl GreenReadout {
    pub fn alive_mass(&self) -> f64 {
        self.alive.iter().sum()
    }

    pub fn total_exit_mass(&self) -> f64 {
        self.exit_flux.iter().sum()
    }
}

/// Bond rates and diagonal at a fixed time, in neighbor-slot layout.
pub(crate) fn rates_at(
    field: &EnvironmentField,
    domain: &LatticeBox,
    t: f64,
) -> (Vec<f64>, Vec<f64>) {
    let twod = 2 * domain.dim();
    let n = domain.len();
    let mut rates = vec![0.0; n * twod];
    for edge in domain.incident_edges() {
        let w = field.rate_unchecked(t, &edge);
        for (i, k) in domain.edge_slots(&edge) {
            rates[i * twod + k] = w;
        }
    }
    let diag = full_diag(&rates, n, twod);
    (rates, diag)
}

fn full_diag(rates: &[f64], n: usize, twod: usize) -> Vec<f64> {
    (0..n).map(|i| -rates[i * twod..(i + 1) * twod].iter().sum::<f64>()).collect()
}

struct Update {
    time: f64,
    /// Global rate-slot indices touched by this bond (1 for boundary bonds).
    slots: [usize; 2],
    nslots: usize,
    value: f64,
}

struct Engine {
    n: usize,
    twod: usize,
    rates: Vec<f64>,
    diag: Vec<f64>,
    pdiag: Vec<f64>,
    prate: Vec<f64>,
    x: Vec<f64>,
    term: Vec<f64>,
    tmp: Vec<f64>,
    acc: Vec<f64>,
    tol: f64,
    // green accumulators (empty when not requested)
    piece: Vec<f64>,
    integral: Vec<f64>,
    exit_flux: Vec<f64>,
}

pub(crate) fn run(
    field: &EnvironmentField,
    domain: &Arc<LatticeBox>,
    s: f64,
    times: &[f64],
    init: &[f64],
    tol: f64,
    want_green: bool,
) -> Result<Captured, CoreError> {
    if times.is_empty() {
        return Err(CoreError::Invalid("no capture times".into()));
    }
    for (i, t) in times.iter().enumerate() {
        let prev = if i == 0 { s } else { times[i - 1] };
        if *t < prev {
            return Err(CoreError::BackwardInterval(prev, *t));
        }
    }
    let t_end = *times.last().unwrap();
    let n = domain.len();
    let twod = 2 * domain.dim();

    // materialize the rate timeline: values at s plus every interior change
    let mut rates = vec![0.0; n * twod];
    let mut updates: Vec<Update> = Vec::new();
    for edge in domain.incident_edges() {
        let (init_rate, events) = field.edge_profile(&edge, s, t_end);
        let slot_list = domain.edge_slots(&edge);
        let mut slots = [0usize; 2];
        for (j, (i, k)) in slot_list.iter().enumerate() {
            slots[j] = i * twod + k;
            rates[i * twod + k] = init_rate;
        }
        for (time, value) in events {
            updates.push(Update { time, slots, nslots: slot_list.len(), value });
        }
    }
    updates.sort_by(|a, b| a.time.total_cmp(&b.time));
    let diag = full_diag(&rates, n, twod);

    let mut eng = Engine {
        n,
        twod,
        rates,
        diag,
        pdiag: vec![0.0; n],
        prate: vec![0.0; n * twod],
        x: init.to_vec(),
        term: vec![0.0; n],
        tmp: vec![0.0; n],
        acc: vec![0.0; n],
        tol,
        piece: vec![0.0; if want_green { n } else { 0 }],
        integral: vec![0.0; if want_green { n } else { 0 }],
        exit_flux: vec![0.0; if want_green { n * twod } else { 0 }],
    };

    let nbr = domain.neighbor_slots();
    let mut slices = Vec::with_capacity(times.len());
    let mut cur = s;
    let mut ui = 0;
    let mut ci = 0;
    while ci < times.len() {
        let next_update = updates.get(ui).map_or(f64::INFINITY, |u| u.time);
        let target = times[ci].min(next_update);
        if target > cur {
            eng.advance(target - cur, nbr, want_green);
            cur = target;
        }
        // capture before applying rate changes: the kernel at an update time
        // is still governed by the pre-update rates (right continuity)
        while ci < times.len() && times[ci] <= target {
            slices.push(eng.x.clone());
            ci += 1;
        }
        while ui < updates.len() && updates[ui].time <= target {
            eng.apply_update(&updates[ui]);
            ui += 1;
        }
    }

    let green = want_green.then(|| GreenReadout {
        domain: Arc::clone(domain),
        integral: std::mem::take(&mut eng.integral),
        exit_flux: std::mem::take(&mut eng.exit_flux),
        alive: eng.x.clone(),
        t_max: t_end,
    });
    Ok(Captured { slices, green })
}

impl Engine {
    fn apply_update(&mut self, u: &Update) {
        for slot in &u.slots[..u.nslots] {
            self.rates[*slot] = u.value;
            // recompute the touched diagonal exactly; no incremental drift
            let i = slot / self.twod;
            self.diag[i] = -self.rates[i * self.twod..(i + 1) * self.twod].iter().sum::<f64>();
        }
    }

    /// One constant-rate interval of length dt.
    fn advance(&mut self, dt: f64, nbr: &[usize], green: bool) {
        let lambda = self.diag.iter().fold(0.0, |m: f64, d| m.max(-d));
        if lambda * dt == 0.0 {
            return;
        }
        let nsub = (lambda * dt / MAX_STEP_MASS).ceil().max(1.0);
        let h = dt / nsub;
        let m = lambda * h;
        let tol_sub = (self.tol / nsub).max(1e-15);
        for i in 0..self.n {
            // clamp guards the fp case |diag| / lambda rounding above 1
            self.pdiag[i] = (1.0 + self.diag[i] / lambda).max(0.0);
        }
        for (pr, r) in self.prate.iter_mut().zip(&self.rates) {
            *pr = r / lambda;
        }
        for _ in 0..nsub as usize {
            self.substep(m, lambda, tol_sub, nbr, green);
        }
        if green {
            // flux through a killed bond over the interval: rate times the
            // accumulated occupation integral of its inside endpoint
            for i in 0..self.n {
                let p = self.piece[i];
                if p == 0.0 {
                    continue;
                }
                for k in 0..self.twod {
                    let slot = i * self.twod + k;
                    if nbr[slot] == OUTSIDE {
                        self.exit_flux[slot] += self.rates[slot] * p;
                    }
                }
            }
            for (acc, p) in self.integral.iter_mut().zip(&mut self.piece) {
                *acc += *p;
                *p = 0.0;
            }
        }
    }

    /// Uniformized exp(h L): acc = sum_k pois_k(m) P^k x, and for Green runs
    /// piece += sum_k (P[N_m > k] / lambda) P^k x, the exact value of
    /// int_0^h e^{uL} x du. The loop runs to Poisson mass 1 - tol_sub and past
    /// 2m, so the dropped integral tail sum_{j>K} Q_j / lambda is under
    /// 4 tol_sub / lambda (tail terms then decay faster than 2^-j).
    fn substep(&mut self, m: f64, lambda: f64, tol_sub: f64, nbr: &[usize], green: bool) {
        let mut p = (-m).exp();
        let mut cum = p;
        let mut q = 1.0 - p;
        self.term.copy_from_slice(&self.x);
        scale_into(&mut self.acc, &self.term, p);
        if green {
            axpy(&mut self.piece, &self.term, q / lambda);
        }
        let mut k = 0u32;
        loop {
            let done = cum >= 1.0 - tol_sub
                && (k as f64) >= m
                && (!green || (k as f64) >= 2.0 * m)
                || k >= 4000
                || p < 1e-290;
            if done {
                break;
            }
            k += 1;
            apply_p(
                self.n,
                self.twod,
                &self.pdiag,
                &self.prate,
                nbr,
                &self.term,
                &mut self.tmp,
            );
            std::mem::swap(&mut self.term, &mut self.tmp);
            p *= m / k as f64;
            cum += p;
            axpy(&mut self.acc, &self.term, p);
            if green {
                q = (q - p).max(0.0);
                axpy(&mut self.piece, &self.term, q / lambda);
            }
        }
        std::mem::swap(&mut self.x, &mut self.acc);
    }
}

/// out = P v with P = I + L/Lambda; per-row sums are sequential, so results
/// are identical for any worker count.
fn apply_p(
    n: usize,
    twod: usize,
    pdiag: &[f64],
    prate: &[f64],
    nbr: &[usize],
    v: &[f64],
    out: &mut [f64],
) {
    let row = |i: usize, o: &mut f64| {
        let mut acc = pdiag[i] * v[i];
        let base = i * twod;
        for k in 0..twod {
            let j = nbr[base + k];
            if j != OUTSIDE {
                acc += prate[base + k] * v[j];
            }
        }
        *o = acc;
    };
    if n >= PAR_MIN {
        out.par_iter_mut().enumerate().for_each(|(i, o)| row(i, o));
    } else {
        for (i, o) in out.iter_mut().enumerate() {
            row(i, o);
        }
    }
}

fn scale_into(out: &mut [f64], v: &[f64], a: f64) {
    for (o, x) in out.iter_mut().zip(v) {
        *o = a * x;
    }
}

fn axpy(out: &mut [f64], v: &[f64], a: f64) {
    for (o, x) in out.iter_mut().zip(v) {
        *o += a * x;
    }
}
