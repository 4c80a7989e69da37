//! Event-driven simulation of binary branching Brownian motion in the
//! plane, started from `(0, y)`, with optional exact killing on `{y = 0}`.
//!
//! Particles move as independent planar Brownian motions and split at unit
//! rate into two children. Branch times are event-driven (per-particle
//! exponential clocks), which removes the `O(dt)` bias of per-step
//! Bernoulli branching. Killing combines endpoint sign checks with a
//! Brownian-bridge crossing probability between sub-steps of length at
//! most [`SimConfig::dt_max`], which removes the dominant discretization
//! bias of naive endpoint killing.
//!
//! Path functionals needed by the martingale sums — the running maximum of
//! `X_s - sqrt(2) s` and the running minimum of `Y_s` — are inherited at
//! branch points and updated at every sub-step, so the shaving predicate
//! is resolved on the `dt_max` mesh.
//!
//! Every particle owns RNG streams keyed by its genealogical id (heap
//! labels: the children of `k` are `2k` and `2k+1`). A particle's
//! trajectory is therefore a function of the replica seed and its id
//! alone. Two consequences are load-bearing for the tests: output is
//! bit-identical regardless of processing order, and a replica run with
//! killing enabled produces a subset (by id) of the same-seed replica with
//! killing disabled.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::error::invalid;
use crate::seed::{particle_rng, StreamKind};
use crate::{Error, Result};

const SQRT_2: f64 = core::f64::consts::SQRT_2;

/// Below this exponent `exp(-q)` underflows to zero at f64 precision, so
/// the bridge kill check can skip its uniform draw.
const BRIDGE_EXPONENT_CUTOFF: f64 = 745.0;

/// One particle of the population, with the inherited path trackers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParticleRecord {
    /// Genealogical id; the root is 1 and the children of `k` are `2k`, `2k+1`.
    pub id: u64,
    pub parent_id: Option<u64>,
    pub x: f64,
    pub y: f64,
    pub birth_time: f64,
    pub alive: bool,
    pub killed: bool,
    /// Running max of `X_s - sqrt(2) s` over the ancestral path (sub-step mesh).
    pub max_drift_excess: f64,
    /// Running min of `Y_s` over the ancestral path (sub-step mesh).
    pub min_y: f64,
}

/// Immutable set of alive particles at a checkpoint time.
#[derive(Clone, Debug)]
pub struct PopulationSnapshot {
    pub t: f64,
    /// Alive particles only, sorted by id.
    pub particles: Vec<ParticleRecord>,
    pub replica_seed: u64,
    pub killing_enabled: bool,
    pub origin_y: f64,
}

/// Parameters of one replica.
#[derive(Clone, Debug)]
pub struct SimConfig {
    pub origin_y: f64,
    pub horizon_t: f64,
    /// Sorted checkpoint times within `[0, horizon_t]`.
    pub checkpoint_times: Vec<f64>,
    /// Sub-step cap for kill checks and tracker updates.
    pub dt_max: f64,
    /// Binary branching rate; the model is rate-1 and this is validated.
    pub branch_rate: f64,
    pub killing_enabled: bool,
    /// Abort threshold on the number of particles created in the replica.
    pub population_cap: usize,
    pub seed: u64,
}

impl SimConfig {
    /// Config with the crate defaults (`dt_max = 0.01`, cap `5e6`).
    pub fn new(origin_y: f64, horizon_t: f64, killing_enabled: bool, seed: u64) -> Self {
        Self {
            origin_y,
            horizon_t,
            checkpoint_times: vec![horizon_t],
            dt_max: 0.01,
            branch_rate: 1.0,
            killing_enabled,
            population_cap: 5_000_000,
            seed,
        }
    }

    pub fn with_checkpoints(mut self, checkpoints: &[f64]) -> Self {
        self.checkpoint_times = checkpoints.to_vec();
        self
    }

    pub fn with_dt_max(mut self, dt_max: f64) -> Self {
        self.dt_max = dt_max;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.origin_y >= 0.0) {
            return Err(invalid!("origin_y must be >= 0, got {}", self.origin_y));
        }
        if !(self.horizon_t >= 0.0) {
            return Err(invalid!("horizon_T must be >= 0, got {}", self.horizon_t));
        }
        if !(self.dt_max > 0.0) {
            return Err(invalid!("dt_max must be > 0, got {}", self.dt_max));
        }
        if self.branch_rate != 1.0 {
            return Err(invalid!("branch_rate is fixed at 1, got {}", self.branch_rate));
        }
        if self.population_cap == 0 {
            return Err(invalid!("population_cap must be > 0"));
        }
        let mut prev = 0.0;
        for &tc in &self.checkpoint_times {
            if !(tc >= prev && tc <= self.horizon_t) {
                return Err(invalid!(
                    "checkpoint_times must be sorted within [0, {}]",
                    self.horizon_t
                ));
            }
            prev = tc;
        }
        Ok(())
    }
}

/// Brownian-bridge boundary-crossing decision.
///
/// For a Brownian segment of length `dt` with both endpoints positive, the
/// path crossed zero with probability `exp(-2 y0 y1 / dt)`; returns whether
/// the uniform draw `u` falls below it.
pub fn bridge_kill(y0: f64, y1: f64, dt: f64, u: f64) -> Result<bool> {
    if !(dt > 0.0) {
        return Err(invalid!("bridge_kill: dt must be > 0, got {dt}"));
    }
    if !(y0 > 0.0 && y1 > 0.0) {
        return Err(invalid!("bridge_kill: endpoints must be positive"));
    }
    let q = 2.0 * y0 * y1 / dt;
    if q > BRIDGE_EXPONENT_CUTOFF {
        return Ok(false);
    }
    Ok(u < (-q).exp())
}

/// Spine variants: which tilted law drives the distinguished particle.
#[derive(Clone, Copy, Debug)]
pub enum SpineKind {
    /// Spine of the critical additive martingale: horizontal Brownian
    /// motion with drift `sqrt(2)`, vertical Bessel(3).
    CriticalAdditive,
    /// Spine of the shaved derivative martingale: `X = sqrt(2) t + alpha - S`,
    /// `Y = S'` with `S, S'` independent Bessel(3) from `(alpha, y)`.
    ShavedDerivative { alpha: f64 },
    /// Spine of the supercritical additive martingale: drift `lambda`
    /// horizontally, drift `mu` conditioned to stay positive vertically.
    Supercritical { lambda: f64, mu: f64 },
}

/// A spine simulation: distinguished path plus the usual snapshot series.
#[derive(Clone, Debug)]
pub struct SpineRun {
    /// Spine position at every sub-step: `(t, x, y)`.
    pub path: Vec<(f64, f64, f64)>,
    pub snapshots: Vec<PopulationSnapshot>,
}

enum Vertical {
    /// Plain Brownian motion (standard particles).
    Brownian,
    /// Norm of a 3-dimensional Brownian motion; exact at sub-step times.
    Bessel3([f64; 3]),
    /// Euler–Maruyama for `dY = mu coth(mu Y) dt + dB`, one-step rejection
    /// at the boundary.
    ConditionedDrift { mu: f64 },
}

enum Horizontal {
    Drift(f64),
    /// `X = sqrt(2) t + alpha - S` for a Bessel(3) process `S`.
    ShavedFrame { alpha: f64, s: [f64; 3] },
}

struct Walker {
    id: u64,
    parent_id: Option<u64>,
    birth: f64,
    x: f64,
    y: f64,
    max_drift_excess: f64,
    min_y: f64,
    spine: bool,
}

struct Engine<'a> {
    cfg: &'a SimConfig,
    /// Records per checkpoint index.
    records: Vec<Vec<ParticleRecord>>,
    stack: Vec<Walker>,
    created: usize,
    spine_kind: Option<SpineKind>,
    spine_path: Vec<(f64, f64, f64)>,
}

impl<'a> Engine<'a> {
    fn new(cfg: &'a SimConfig, spine_kind: Option<SpineKind>) -> Self {
        Engine {
            cfg,
            records: vec![Vec::new(); cfg.checkpoint_times.len()],
            stack: Vec::new(),
            created: 0,
            spine_kind,
            spine_path: Vec::new(),
        }
    }

    fn spawn_root(&mut self) {
        self.created = 1;
        self.stack.push(Walker {
            id: 1,
            parent_id: None,
            birth: 0.0,
            x: 0.0,
            y: self.cfg.origin_y,
            max_drift_excess: 0.0,
            min_y: self.cfg.origin_y,
            spine: self.spine_kind.is_some(),
        });
    }

    fn run(&mut self) -> Result<()> {
        while let Some(w) = self.stack.pop() {
            self.run_walker(w)?;
        }
        for recs in &mut self.records {
            recs.sort_by_key(|r| r.id);
        }
        Ok(())
    }

    fn snapshots(self) -> Vec<PopulationSnapshot> {
        let cfg = self.cfg;
        self.records
            .into_iter()
            .zip(&cfg.checkpoint_times)
            .map(|(particles, &t)| PopulationSnapshot {
                t,
                particles,
                replica_seed: cfg.seed,
                killing_enabled: cfg.killing_enabled,
                origin_y: cfg.origin_y,
            })
            .collect()
    }

    fn run_walker(&mut self, w: Walker) -> Result<()> {
        let cfg = self.cfg;
        let mut motion = particle_rng(cfg.seed, w.id, StreamKind::Motion);
        let mut kill_rng: Option<ChaCha8Rng> = None;

        // The subtree-root law: spine walkers branch at rate 2 and carry
        // their own vertical/horizontal processes; everything else is a
        // standard BBM particle. Non-spine subtrees below a spine are
        // killed on the boundary regardless of `killing_enabled`.
        let is_spine = w.spine;
        let rate = if is_spine { 2.0 } else { cfg.branch_rate };
        let killing = cfg.killing_enabled || (self.spine_kind.is_some() && !is_spine);

        let lifetime: f64 = {
            let e: f64 = motion.sample(Exp1);
            e / rate
        };
        let branch_t = w.birth + lifetime;
        let end = branch_t.min(cfg.horizon_t);

        let (mut horizontal, mut vertical) = match (is_spine, self.spine_kind) {
            (true, Some(SpineKind::CriticalAdditive)) => {
                (Horizontal::Drift(SQRT_2), Vertical::Bessel3([w.y, 0.0, 0.0]))
            }
            (true, Some(SpineKind::ShavedDerivative { alpha })) => {
                // Invert the shaved frame to recover S from the current x.
                let s0 = SQRT_2 * w.birth + alpha - w.x;
                (
                    Horizontal::ShavedFrame { alpha, s: [s0, 0.0, 0.0] },
                    Vertical::Bessel3([w.y, 0.0, 0.0]),
                )
            }
            (true, Some(SpineKind::Supercritical { lambda, mu })) => {
                (Horizontal::Drift(lambda), Vertical::ConditionedDrift { mu })
            }
            _ => (Horizontal::Drift(0.0), Vertical::Brownian),
        };
        // Bessel states are re-rooted at birth, which preserves the
        // marginal law of the radial part (rotation invariance).

        let mut t = w.birth;
        let mut x = w.x;
        let mut y = w.y;
        let mut m = w.max_drift_excess;
        let mut min_y = w.min_y;

        // Next checkpoint strictly after birth (the root also records at 0).
        let mut ck = cfg.checkpoint_times.partition_point(|&tc| tc <= w.birth);
        if w.id == 1 {
            if let Some(0) = cfg.checkpoint_times.iter().position(|&tc| tc == 0.0) {
                self.records[0].push(record(&w, 0.0, x, y, m, min_y));
            }
        }
        if is_spine && w.id == 1 {
            self.spine_path.push((t, x, y));
        }

        let mut alive = true;
        while t < end && alive {
            let next_stop = if ck < cfg.checkpoint_times.len() && cfg.checkpoint_times[ck] <= end {
                cfg.checkpoint_times[ck]
            } else {
                end
            };
            // Land exactly on checkpoints and on the branch time.
            let t_new = if next_stop - t <= cfg.dt_max { next_stop } else { t + cfg.dt_max };
            let h = t_new - t;
            if h <= 0.0 {
                // Degenerate sub-step (checkpoint equal to current time).
                if ck < cfg.checkpoint_times.len() && cfg.checkpoint_times[ck] == t {
                    self.records[ck].push(record(&w, t, x, y, m, min_y));
                    ck += 1;
                }
                continue;
            }
            let sh = h.sqrt();

            let y_old = y;
            match &mut vertical {
                Vertical::Brownian => {
                    let dy: f64 = motion.sample(StandardNormal);
                    y += sh * dy;
                }
                Vertical::Bessel3(v) => {
                    for vi in v.iter_mut() {
                        let g: f64 = motion.sample(StandardNormal);
                        *vi += sh * g;
                    }
                    y = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                }
                Vertical::ConditionedDrift { mu } => {
                    let drift = *mu * coth(*mu * y);
                    loop {
                        let g: f64 = motion.sample(StandardNormal);
                        let cand = y + drift * h + sh * g;
                        if cand > 0.0 {
                            y = cand;
                            break;
                        }
                    }
                }
            }
            match &mut horizontal {
                Horizontal::Drift(c) => {
                    let dx: f64 = motion.sample(StandardNormal);
                    x += *c * h + sh * dx;
                }
                Horizontal::ShavedFrame { alpha, s } => {
                    for si in s.iter_mut() {
                        let g: f64 = motion.sample(StandardNormal);
                        *si += sh * g;
                    }
                    let r = (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt();
                    x = SQRT_2 * t_new + *alpha - r;
                }
            }
            t = t_new;

            if killing && !is_spine {
                if y <= 0.0 {
                    alive = false;
                } else {
                    let q = 2.0 * y_old * y / h;
                    if q <= BRIDGE_EXPONENT_CUTOFF {
                        let u: f64 = kill_rng
                            .get_or_insert_with(|| particle_rng(cfg.seed, w.id, StreamKind::Kill))
                            .gen();
                        if u < (-q).exp() {
                            alive = false;
                        }
                    }
                }
            }

            if alive {
                m = m.max(x - SQRT_2 * t);
                min_y = min_y.min(y);
                if is_spine {
                    self.spine_path.push((t, x, y));
                }
                if ck < cfg.checkpoint_times.len() && cfg.checkpoint_times[ck] == t {
                    self.records[ck].push(record(&w, t, x, y, m, min_y));
                    ck += 1;
                }
            }
        }

        if alive && branch_t < cfg.horizon_t {
            if w.id > (u64::MAX - 1) / 2 {
                return Err(invalid!("genealogy depth exhausted id space (id {})", w.id));
            }
            self.created += 2;
            if self.created > cfg.population_cap {
                return Err(Error::PopulationCap {
                    created: self.created,
                    cap: cfg.population_cap,
                });
            }
            // Child 2k continues the spine; 2k+1 roots an ordinary subtree.
            for (k, spine) in [(2 * w.id, is_spine), (2 * w.id + 1, false)] {
                self.stack.push(Walker {
                    id: k,
                    parent_id: Some(w.id),
                    birth: branch_t,
                    x,
                    y,
                    max_drift_excess: m,
                    min_y,
                    spine,
                });
            }
        }
        Ok(())
    }
}

fn record(w: &Walker, _t: f64, x: f64, y: f64, m: f64, min_y: f64) -> ParticleRecord {
    ParticleRecord {
        id: w.id,
        parent_id: w.parent_id,
        x,
        y,
        birth_time: w.birth,
        alive: true,
        killed: false,
        max_drift_excess: m,
        min_y,
    }
}

fn coth(z: f64) -> f64 {
    // Near zero the drift is 1/z to leading order; the series form avoids
    // overflow of cosh/sinh for large arguments.
    if z.abs() < 1e-4 {
        1.0 / z + z / 3.0
    } else if z.abs() > 20.0 {
        z.signum()
    } else {
        let e = (-2.0 * z.abs()).exp();
        z.signum() * (1.0 + e) / (1.0 - e)
    }
}

/// Run one replica; one snapshot per checkpoint time.
///
/// Deterministic for a fixed `(config, seed)`. Errors with an explicit
/// cap status if the particle budget is exceeded.
pub fn simulate_replica(config: &SimConfig) -> Result<Vec<PopulationSnapshot>> {
    config.validate()?;
    let mut engine = Engine::new(config, None);
    engine.spawn_root();
    engine.run()?;
    Ok(engine.snapshots())
}

/// Run one replica of the spine-decomposed (tilted) law.
///
/// The spine branches at rate 2 and moves according to `kind`; non-spine
/// subtrees are standard BBMs with killing on the boundary.
pub fn simulate_spine(kind: SpineKind, config: &SimConfig) -> Result<SpineRun> {
    config.validate()?;
    match kind {
        SpineKind::ShavedDerivative { alpha } if !(alpha > 0.0) => {
            return Err(invalid!("spine: alpha must be > 0"));
        }
        SpineKind::Supercritical { lambda, mu } if !(lambda > 0.0 && mu > 0.0) => {
            return Err(invalid!("spine: lambda, mu must be > 0"));
        }
        _ => {}
    }
    if !(config.origin_y > 0.0) {
        return Err(invalid!("spine: origin_y must be > 0"));
    }
    let mut engine = Engine::new(config, Some(kind));
    engine.spawn_root();
    engine.run()?;
    let path = core::mem::take(&mut engine.spine_path);
    let mut run = SpineRun { path, snapshots: engine.snapshots() };
    run.path.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("NaN time"));
    Ok(run)
}

/// Path of a Bessel(3) process at `n_steps + 1` uniform grid points on
/// `[0, t]`, exact in distribution (norm of a 3D Brownian motion started
/// at `(start, 0, 0)`).
pub fn sample_bessel3(start: f64, t: f64, n_steps: usize, seed: u64) -> Result<Vec<f64>> {
    if !(start > 0.0) {
        return Err(invalid!("sample_bessel3: start must be > 0, got {start}"));
    }
    if !(t >= 0.0) || n_steps == 0 {
        return Err(invalid!("sample_bessel3: need t >= 0 and n_steps > 0"));
    }
    let mut rng = particle_rng(seed, 1, StreamKind::Motion);
    let h = t / n_steps as f64;
    let sh = h.sqrt();
    let mut v = [start, 0.0, 0.0];
    let mut path = Vec::with_capacity(n_steps + 1);
    path.push(start);
    for _ in 0..n_steps {
        for vi in v.iter_mut() {
            let g: f64 = rng.sample(StandardNormal);
            *vi += sh * g;
        }
        path.push((v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt());
    }
    Ok(path)
}
