//! Exact time evolution under piecewise-constant search Hamiltonians.
//!
//! Each stage's Hamiltonian is diagonalized once; a state is propagated as
//! `V·exp(−iΛt)·Vᵀ·ψ`, so there is no step size anywhere.

use nalgebra::{Complex, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{GraphSpec, VertexClass, WeightedMatrix};
use crate::spectral::{self, Spectrum};
use crate::subspace::{self, StateVector};
use crate::theory;

/// Grid intervals used before golden-section refinement of a maximum.
pub const PEAK_GRID: usize = 10_000;
/// Golden-section stopping tolerance, relative to the search window.
pub const PEAK_TOLERANCE: f64 = 1e-6;

/// Cached eigendecomposition of a constant Hamiltonian.
#[derive(Debug, Clone)]
pub struct Propagator {
    spectrum: Spectrum,
}

impl Propagator {
    pub fn new(h: &WeightedMatrix) -> Self {
        Self { spectrum: spectral::eigh(h) }
    }

    pub fn dim(&self) -> usize {
        self.spectrum.dim()
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    /// `exp(−iHt)·ψ`.
    pub fn evolve(&self, psi: &StateVector, t: f64) -> Result<StateVector> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: psi.dim() });
        }
        let v = self.spectrum.eigenvectors();
        let re = v.tr_mul(&psi.amplitudes().map(|a| a.re));
        let im = v.tr_mul(&psi.amplitudes().map(|a| a.im));
        let phased: DVector<Complex<f64>> = DVector::from_iterator(
            self.dim(),
            self.spectrum
                .eigenvalues()
                .iter()
                .enumerate()
                .map(|(k, e)| Complex::new(re[k], im[k]) * Complex::from_polar(1.0, -e * t)),
        );
        let out_re = v * phased.map(|c| c.re);
        let out_im = v * phased.map(|c| c.im);
        Ok(StateVector::new(out_re.zip_map(&out_im, Complex::new)))
    }
}

/// `exp(−iHt)·ψ₀` via the exact spectral decomposition of `H`.
pub fn evolve(h: &WeightedMatrix, psi0: &StateVector, t: f64) -> Result<StateVector> {
    Propagator::new(h).evolve(psi0, t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stage {
    pub gamma: f64,
    pub duration: f64,
}

/// Ordered stages of constant jumping rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    stages: Vec<Stage>,
}

impl Schedule {
    pub fn new(stages: Vec<Stage>) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::InvalidSchedule("at least one stage is required".into()));
        }
        for (i, s) in stages.iter().enumerate() {
            if !(s.gamma > 0.0) || !s.gamma.is_finite() {
                return Err(Error::InvalidSchedule(format!("stage {}: gamma must be > 0", i + 1)));
            }
            if !(s.duration >= 0.0) || !s.duration.is_finite() {
                return Err(Error::InvalidSchedule(format!(
                    "stage {}: duration must be ≥ 0 (got {})",
                    i + 1,
                    s.duration
                )));
            }
        }
        Ok(Self { stages })
    }

    /// `(γ_c1, t₁)` followed by `(γ_c2, t₂)`, from the closed forms.
    pub fn two_stage(spec: &GraphSpec) -> Self {
        let p = theory::predict(spec);
        Self {
            stages: vec![
                Stage { gamma: p.gamma_c1, duration: p.t1 },
                Stage { gamma: p.gamma_c2, duration: p.t2 },
            ],
        }
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn total_duration(&self) -> f64 {
        self.stages.iter().map(|s| s.duration).sum()
    }

    /// End time of each stage.
    pub fn boundaries(&self) -> Vec<f64> {
        self.stages
            .iter()
            .scan(0.0, |t, s| {
                *t += s.duration;
                Some(*t)
            })
            .collect()
    }
}

/// A schedule prepared for evaluation at arbitrary times.
struct Trajectory {
    starts: Vec<f64>,
    durations: Vec<f64>,
    propagators: Vec<Propagator>,
    initial: Vec<StateVector>,
    final_state: StateVector,
}

impl Trajectory {
    fn new(spec: &GraphSpec, schedule: &Schedule) -> Result<Self> {
        let mut state = subspace::reduced_initial_state(spec);
        let mut t = 0.0;
        let mut traj = Trajectory {
            starts: Vec::new(),
            durations: Vec::new(),
            propagators: Vec::new(),
            initial: Vec::new(),
            final_state: state.clone(),
        };
        for stage in schedule.stages() {
            let prop = Propagator::new(&subspace::reduced_hamiltonian(spec, stage.gamma)?);
            let next = prop.evolve(&state, stage.duration)?;
            traj.starts.push(t);
            traj.durations.push(stage.duration);
            traj.propagators.push(prop);
            traj.initial.push(std::mem::replace(&mut state, next));
            t += stage.duration;
        }
        traj.final_state = state;
        Ok(traj)
    }

    fn total(&self) -> f64 {
        self.starts.last().unwrap() + self.durations.last().unwrap()
    }

    fn state_at(&self, t: f64) -> StateVector {
        let k = self
            .starts
            .iter()
            .rposition(|&s| s <= t)
            .unwrap_or(0);
        // A zero-length trailing stage still owns t == total.
        let local = (t - self.starts[k]).clamp(0.0, self.durations[k]);
        self.propagators[k].evolve(&self.initial[k], local).expect("dimensions fixed at construction")
    }

    fn prob_a(&self, t: f64) -> f64 {
        self.state_at(t).probability(VertexClass::A.index())
    }
}

/// Sampled probabilities along a schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub prob_a: Vec<f64>,
    pub prob_b: Vec<f64>,
    pub norm: Vec<f64>,
    /// End time of each stage.
    pub boundaries: Vec<f64>,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Index of the last sample at or before `t`.
    pub fn index_at(&self, t: f64) -> Option<usize> {
        self.times.iter().rposition(|&x| x <= t)
    }
}

/// Evolves `|s⟩` through `schedule`, sampling `samples_per_stage` uniformly
/// spaced times in each stage after `t = 0`.
pub fn run_schedule(spec: &GraphSpec, schedule: &Schedule, samples_per_stage: usize) -> Result<TimeSeries> {
    if samples_per_stage == 0 {
        return Err(Error::Invalid("samples_per_stage must be ≥ 1".into()));
    }
    let traj = Trajectory::new(spec, schedule)?;
    let mut series = TimeSeries {
        times: Vec::new(),
        prob_a: Vec::new(),
        prob_b: Vec::new(),
        norm: Vec::new(),
        boundaries: schedule.boundaries(),
    };
    let mut record = |t: f64, psi: &StateVector| {
        series.times.push(t);
        series.prob_a.push(psi.probability(VertexClass::A.index()));
        series.prob_b.push(psi.probability(VertexClass::B.index()));
        series.norm.push(psi.norm());
    };
    record(0.0, &traj.initial[0]);
    for k in 0..traj.starts.len() {
        let duration = traj.durations[k];
        if duration == 0.0 {
            continue;
        }
        for j in 1..=samples_per_stage {
            let local = duration * j as f64 / samples_per_stage as f64;
            let psi = traj.propagators[k].evolve(&traj.initial[k], local)?;
            record(traj.starts[k] + local, &psi);
        }
    }
    Ok(series)
}

/// Maximizes a function on `[lo, hi]` by golden-section search.
pub fn golden_max(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Grid scan of `f` on `[lo, hi]` followed by golden-section refinement
/// around the best grid point. Returns `(argmax, max)`.
pub fn refine_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    if hi <= lo {
        return (lo, f(lo));
    }
    let step = (hi - lo) / PEAK_GRID as f64;
    let (best, best_val) = (0..=PEAK_GRID)
        .map(|i| {
            let t = if i == PEAK_GRID { hi } else { lo + step * i as f64 };
            (t, f(t))
        })
        .fold((lo, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    let a = (best - step).max(lo);
    let b = (best + step).min(hi);
    let (t, v) = golden_max(&f, a, b, PEAK_TOLERANCE * (hi - lo));
    if v >= best_val {
        (t, v)
    } else {
        (best, best_val)
    }
}

/// Maximum success probability `|⟨a|ψ(t)⟩|²` over a schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub time: f64,
    pub probability: f64,
}

pub fn peak_success(spec: &GraphSpec, schedule: &Schedule) -> Result<Peak> {
    let traj = Trajectory::new(spec, schedule)?;
    let total = traj.total();
    if total == 0.0 {
        return Ok(Peak { time: 0.0, probability: traj.final_state.probability(0) });
    }
    let (time, probability) = refine_max(|t| traj.prob_a(t), 0.0, total);
    Ok(Peak { time, probability })
}

/// Time in `[0, horizon]` that maximizes the population of `target` when
/// `start` evolves under the reduced Hamiltonian at `gamma`.
pub fn optimal_duration(
    spec: &GraphSpec,
    gamma: f64,
    start: &StateVector,
    target: VertexClass,
    horizon: f64,
) -> Result<Peak> {
    let prop = Propagator::new(&subspace::reduced_hamiltonian(spec, gamma)?);
    start.check_dim(7)?;
    let (time, probability) = refine_max(
        |t| prop.evolve(start, t).expect("checked").probability(target.index()),
        0.0,
        horizon,
    );
    Ok(Peak { time, probability })
}

/// Stage durations found by maximizing `|b⟩` (stage 1) and then `|a⟩` (stage 2)
/// at the closed-form critical γ's.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasuredRuntime {
    pub t1: f64,
    pub prob_b: f64,
    pub t2: f64,
    pub prob_a: f64,
}

impl MeasuredRuntime {
    pub fn total(&self) -> f64 {
        self.t1 + self.t2
    }
}

pub fn measured_runtime(spec: &GraphSpec) -> Result<MeasuredRuntime> {
    let p = theory::predict(spec);
    let s = subspace::reduced_initial_state(spec);
    let first = optimal_duration(spec, p.gamma_c1, &s, VertexClass::B, 1.5 * p.t1)?;
    let prop1 = Propagator::new(&subspace::reduced_hamiltonian(spec, p.gamma_c1)?);
    let mid = prop1.evolve(&s, first.time)?;
    let second = optimal_duration(spec, p.gamma_c2, &mid, VertexClass::A, 1.5 * p.t2)?;
    Ok(MeasuredRuntime {
        t1: first.time,
        prob_b: first.probability,
        t2: second.time,
        prob_a: second.probability,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WidthStage {
    One,
    Two,
}

impl WidthStage {
    pub fn from_number(n: u8) -> Result<Self> {
        match n {
            1 => Ok(WidthStage::One),
            2 => Ok(WidthStage::Two),
            _ => Err(Error::Invalid(format!("stage must be 1 or 2 (got {n})"))),
        }
    }

    pub fn number(self) -> u8 {
        match self {
            WidthStage::One => 1,
            WidthStage::Two => 2,
        }
    }
}

/// Theory two-stage schedule with `epsilon` added to one stage's γ.
pub fn perturbed_schedule(spec: &GraphSpec, stage: WidthStage, epsilon: f64) -> Result<Schedule> {
    let mut stages = Schedule::two_stage(spec).stages;
    let k = match stage {
        WidthStage::One => 0,
        WidthStage::Two => 1,
    };
    stages[k].gamma += epsilon;
    Schedule::new(stages)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WidthPoint {
    pub epsilon: f64,
    pub p_peak: f64,
}

/// Peak success probability of the two-stage schedule with one critical γ offset by each ε.
pub fn width_scan(spec: &GraphSpec, stage: WidthStage, offsets: &[f64]) -> Result<Vec<WidthPoint>> {
    offsets
        .par_iter()
        .map(|&epsilon| {
            let schedule = perturbed_schedule(spec, stage, epsilon)?;
            Ok(WidthPoint { epsilon, p_peak: peak_success(spec, &schedule)?.probability })
        })
        .collect()
}

/// 41 offsets: ±20 log-spaced magnitudes from `0.1/M^{3/2}` to `100/M^{3/2}`, and 0.
/// The largest magnitude is capped at 0.9 of the stage's critical γ so every
/// perturbed rate stays positive on small graphs.
pub fn default_offsets(spec: &GraphSpec, stage: WidthStage) -> Vec<f64> {
    let scale = spec.m_f64().powf(-1.5);
    let gamma = match stage {
        WidthStage::One => theory::gamma_c1(spec),
        WidthStage::Two => theory::gamma_c2(spec),
    };
    let (lo, hi) = (0.1 * scale, (100.0 * scale).min(0.9 * gamma));
    let magnitudes: Vec<f64> = (0..20)
        .map(|i| lo * (hi / lo).powf(i as f64 / 19.0))
        .collect();
    let mut out: Vec<f64> = magnitudes.iter().rev().map(|x| -x).collect();
    out.push(0.0);
    out.extend(magnitudes);
    out
}

/// Offsets on each side at which the peak success falls to half its ε = 0 value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfWidth {
    pub baseline: f64,
    /// Negative offset (ε < 0).
    pub minus: f64,
    /// Positive offset (ε > 0).
    pub plus: f64,
}

impl HalfWidth {
    /// Half the full width at half maximum, `(plus − minus)/2`.
    pub fn half_width(&self) -> f64 {
        0.5 * (self.plus - self.minus)
    }
}

/// Locates the half-maximum offsets by geometric bracketing then bisection.
pub fn half_width(spec: &GraphSpec, stage: WidthStage) -> Result<HalfWidth> {
    let baseline = peak_success(spec, &Schedule::two_stage(spec))?.probability;
    let excess = |epsilon: f64| -> Result<f64> {
        let schedule = perturbed_schedule(spec, stage, epsilon)?;
        Ok(peak_success(spec, &schedule)?.probability - 0.5 * baseline)
    };
    let gamma = match stage {
        WidthStage::One => theory::gamma_c1(spec),
        WidthStage::Two => theory::gamma_c2(spec),
    };
    let start = 0.01 * spec.m_f64().powf(-1.5);
    let side = |sign: f64| -> Result<f64> {
        let mut lo = 0.0;
        let mut hi = start;
        while excess(sign * hi)? > 0.0 {
            lo = hi;
            hi *= 1.5;
            if hi >= 0.5 * gamma {
                return Err(Error::Invalid(format!(
                    "peak success never halves within |ε| < {:e}",
                    0.5 * gamma
                )));
            }
        }
        while hi - lo > 1e-7 * hi {
            let mid = 0.5 * (lo + hi);
            if excess(sign * mid)? > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(sign * 0.5 * (lo + hi))
    };
    let plus = side(1.0)?;
    let minus = side(-1.0)?;
    Ok(HalfWidth { baseline, minus, plus })
}
