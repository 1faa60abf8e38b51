//! The alternating best-response game on the unobservable-subspace
//! dimension Φ(C, F) = dim Ker Ω(C, A+BF).
//!
//! Epochs are numbered from 1. At odd epochs the attacker updates `C` to
//! minimize Φ; at even epochs the defender updates `F` to maximize it.
//! Both one-step and two-step response operators keep the incumbent
//! strategy whenever it already belongs to the relevant best-response
//! set, so traces are bit-reproducible and lock detection is meaningful.
//!
//! Best-response sets are infinite; the operators here search finite,
//! documented families instead:
//!
//! * the attacker's family is every tie-equivalent block selection of the
//!   canonical dual-Jordan construction, each reduced to the primitive
//!   echelon representative of its row space (row reduction changes
//!   neither Φ nor any invariant subspace of the sensor);
//! * the defender's family is the pseudoinverse friend, the zero matrix
//!   when it is a friend, and a seeded budget of random members of the
//!   affine friend family `F + G·P` with `P` annihilating V*.

use crate::attack::{min_unobservable_dim, minimize_unobservable_candidates};
use crate::jordan::max_geometric_multiplicity;
use crate::ratmat::{rat, Matrix, Rat, Subspace};
use crate::subspace::{friend, is_friend, unobservable_dim, vstar};
use crate::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

/// Which player acts at an epoch.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Actor {
    Attacker,
    Defender,
}

impl Actor {
    pub fn for_epoch(epoch: usize) -> Actor {
        if epoch % 2 == 1 {
            Actor::Attacker
        } else {
            Actor::Defender
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Actor::Attacker => "attacker",
            Actor::Defender => "defender",
        }
    }
}

/// Lookahead depth of the response operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Depth {
    #[default]
    OneStep,
    TwoStep,
}

/// Full configuration of a game run.
#[derive(Clone, Debug)]
pub struct GameConfig {
    pub a: Matrix,
    pub b: Matrix,
    /// Number of sensor rows available to the attacker.
    pub m: usize,
    /// Defender's strategy in force before epoch 1.
    pub f0: Matrix,
    pub horizon: usize,
    pub depth: Depth,
    /// Forced strategies: the acting player at these epochs plays the
    /// given matrix instead of computing a response.
    pub overrides: BTreeMap<usize, Matrix>,
    /// Random candidates drawn by the two-step defender search.
    pub search_budget: usize,
    pub seed: u64,
}

impl GameConfig {
    pub fn new(a: Matrix, b: Matrix, m: usize, horizon: usize) -> Self {
        let k = b.cols();
        let n = a.rows();
        GameConfig {
            a,
            b,
            m,
            f0: Matrix::zeros(k, n),
            horizon,
            depth: Depth::OneStep,
            overrides: BTreeMap::new(),
            search_budget: 16,
            seed: 0,
        }
    }
}

/// One epoch of a trace: the strategy the acting player ended up with,
/// the resulting value Φ, and per-epoch diagnostics.
#[derive(Clone, Debug)]
pub struct GameStep {
    pub epoch: usize,
    pub actor: Actor,
    pub strategy: Matrix,
    pub phi: usize,
    /// dim V*(C) for the sensor in force after this epoch.
    pub dim_vstar: usize,
    /// Largest geometric multiplicity of A+BF after this epoch.
    pub max_geo_mult: usize,
    /// Closed-form attacker optimum against the feedback in force.
    pub min_unobs: usize,
}

#[derive(Clone, Debug)]
pub struct GameTrace {
    pub steps: Vec<GameStep>,
}

impl GameTrace {
    pub fn phis(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.phi).collect()
    }
}

/// Game outcome classification.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Lock,
    Oscillation,
    Inconclusive,
}

/// Mode report with the structural certificates evaluated on the trace.
#[derive(Clone, Debug)]
pub struct ModeReport {
    pub mode: Mode,
    /// First epoch of the constant (lock) or alternating (oscillation)
    /// tail; the horizon when inconclusive.
    pub onset_epoch: usize,
    /// Largest |Φ_{i+1} − Φ_i| over the tail (0 for lock).
    pub amplitude: usize,
    /// Minimal exact period of the eventually-repeating strategy pairs.
    pub loop_period: Option<usize>,
    /// Φ equals dim V* at the first odd epoch (lock criterion).
    pub lock_certificate: bool,
    /// Structural zero-V* certificate evaluated at the opening sensor.
    pub zero_vstar_certificate: bool,
    /// Same predicate as the lock certificate: when it holds, the
    /// one- and two-step attacker response sets coincide.
    pub response_sets_collapse: bool,
}

/// Error carrying the epoch at which the run failed.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("epoch {epoch}: {source}")]
pub struct GameError {
    pub epoch: usize,
    pub source: Error,
}

fn game_err(epoch: usize) -> impl FnOnce(Error) -> GameError {
    move |source| GameError { epoch, source }
}

/// Scales each row to the primitive integer representative and sorts
/// nothing: the input is already an echelon basis of the row space, so
/// this is a pure denominator cleanup.
fn primitive_rows(m: &Matrix) -> Matrix {
    Matrix::from_rows(
        (0..m.rows())
            .map(|r| {
                let row = m.row(r);
                let mut l = BigInt::one();
                for x in &row {
                    l = l.lcm(x.denom());
                }
                let ints: Vec<BigInt> = row
                    .iter()
                    .map(|x| (x * Rat::from_integer(l.clone())).to_integer())
                    .collect();
                let mut g = BigInt::zero();
                for v in &ints {
                    g = g.gcd(v);
                }
                if g.is_zero() {
                    g = BigInt::one();
                }
                ints.into_iter()
                    .map(|v| Rat::from_integer(v / &g))
                    .collect()
            })
            .collect(),
    )
}

/// Canonical representative of a sensor's row space: nonzero echelon rows
/// scaled to primitive integers, padded with zero rows to the original
/// row count. Φ(C, ·), Ker C and V*(C) depend on the row space only, so
/// this changes no game quantity.
pub fn canonical_sensor(c: &Matrix) -> Matrix {
    let (r, pivots) = c.rref();
    let kept = Matrix::from_fn(pivots.len(), c.cols(), |i, j| r[(i, j)].clone());
    let canon = primitive_rows(&kept);
    if canon.rows() < c.rows() {
        canon.vstack(&Matrix::zeros(c.rows() - canon.rows(), c.cols()))
    } else {
        canon
    }
}

/// One-step attacker response. Returns the incumbent when it is already
/// optimal against the current feedback, otherwise the first member of
/// the canonical candidate family; the family is returned alongside.
pub fn br1_attacker(
    a: &Matrix,
    b: &Matrix,
    f: &Matrix,
    m: usize,
    current_c: Option<&Matrix>,
) -> Result<(Matrix, Vec<Matrix>)> {
    let closed = a + &(b * f);
    let target = min_unobservable_dim(&closed, m)?;
    let candidates: Vec<Matrix> = minimize_unobservable_candidates(a, b, f, m)?
        .iter()
        .map(canonical_sensor)
        .collect();
    if let Some(c) = current_c {
        if unobservable_dim(c, &closed) == target {
            return Ok((c.clone(), candidates));
        }
    }
    Ok((candidates[0].clone(), candidates))
}

/// One-step defender response. Returns the incumbent when it already
/// attains dim V*(C), otherwise the pseudoinverse friend of V*(C)
/// (the zero matrix for a zero V*).
pub fn br1_defender(a: &Matrix, b: &Matrix, c: &Matrix, current_f: Option<&Matrix>) -> Matrix {
    let vs = vstar(a, b, c).vstar;
    if let Some(f) = current_f {
        let closed = a + &(b * f);
        if unobservable_dim(c, &closed) == vs.dim() {
            return f.clone();
        }
    }
    friend(a, b, &vs).expect("V* is (A,B)-invariant by construction")
}

/// Two-step attacker: among the one-step family, minimize dim V*(C).
/// The incumbent is kept when it is one-step optimal and its V* is no
/// larger than the family minimum.
pub fn br2_attacker(
    a: &Matrix,
    b: &Matrix,
    f: &Matrix,
    m: usize,
    current_c: Option<&Matrix>,
) -> Result<Matrix> {
    let closed = a + &(b * f);
    let target = min_unobservable_dim(&closed, m)?;
    let candidates: Vec<Matrix> = minimize_unobservable_candidates(a, b, f, m)?
        .iter()
        .map(canonical_sensor)
        .collect();
    let scored: Vec<(usize, &Matrix)> = candidates
        .iter()
        .map(|c| (vstar(a, b, c).vstar.dim(), c))
        .collect();
    let family_min = scored
        .iter()
        .map(|(d, _)| *d)
        .min()
        .expect("nonempty family");
    if let Some(c) = current_c {
        if unobservable_dim(c, &closed) == target && vstar(a, b, c).vstar.dim() <= family_min {
            return Ok(c.clone());
        }
    }
    Ok(scored
        .into_iter()
        .find(|(d, _)| *d == family_min)
        .unwrap()
        .1
        .clone())
}

/// Two-step defender: over a budgeted friend family, maximize the largest
/// geometric multiplicity of A+BF (candidates with non-rational spectra
/// are skipped). The incumbent is kept when it is a friend and ties the
/// best score.
pub fn br2_defender(
    a: &Matrix,
    b: &Matrix,
    c: &Matrix,
    current_f: Option<&Matrix>,
    budget: usize,
    rng: &mut ChaCha8Rng,
) -> Matrix {
    let vs = vstar(a, b, c).vstar;
    let k = b.cols();
    let n = a.rows();
    if vs.is_zero() {
        return Matrix::zeros(k, n);
    }
    let base = friend(a, b, &vs).expect("V* is (A,B)-invariant");
    let mut candidates = vec![base.clone()];
    if budget > 0 {
        let zero = Matrix::zeros(k, n);
        if is_friend(a, b, &zero, &vs) {
            candidates.push(zero);
        }
        let p = vs.left_annihilator_rows();
        for _ in 0..budget {
            let g = Matrix::from_fn(k, p.rows(), |_, _| rat(rng.gen_range(-2i64..=2)));
            candidates.push(&base + &(&g * &p));
        }
    }
    let score = |f: &Matrix| max_geometric_multiplicity(&(a + &(b * f))).ok();
    let mut best: Option<(usize, Matrix)> = None;
    for cand in candidates {
        if let Some(s) = score(&cand) {
            if best.as_ref().map_or(true, |(bs, _)| s > *bs) {
                best = Some((s, cand));
            }
        }
    }
    let (best_score, best_f) = best.expect("pseudoinverse friend always scores");
    if let Some(f) = current_f {
        if is_friend(a, b, f, &vs) {
            if let Some(s) = score(f) {
                if s >= best_score {
                    return f.clone();
                }
            }
        }
    }
    best_f
}

/// Runs the alternating game for `cfg.horizon` epochs.
pub fn run_game(cfg: &GameConfig) -> std::result::Result<GameTrace, GameError> {
    let n = cfg.a.rows();
    assert!(cfg.horizon >= 1, "horizon must be at least 1");
    assert_eq!(cfg.a.cols(), n, "state matrix must be square");
    assert_eq!(cfg.b.rows(), n, "input matrix row mismatch");
    assert_eq!(cfg.f0.rows(), cfg.b.cols(), "feedback row mismatch");
    assert_eq!(cfg.f0.cols(), n, "feedback column mismatch");

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut c: Option<Matrix> = None;
    let mut f = cfg.f0.clone();
    let mut steps = Vec::with_capacity(cfg.horizon);
    for epoch in 1..=cfg.horizon {
        let actor = Actor::for_epoch(epoch);
        match actor {
            Actor::Attacker => {
                let next = if let Some(forced) = cfg.overrides.get(&epoch) {
                    forced.clone()
                } else {
                    match cfg.depth {
                        Depth::OneStep => {
                            br1_attacker(&cfg.a, &cfg.b, &f, cfg.m, c.as_ref())
                                .map_err(game_err(epoch))?
                                .0
                        }
                        Depth::TwoStep => br2_attacker(&cfg.a, &cfg.b, &f, cfg.m, c.as_ref())
                            .map_err(game_err(epoch))?,
                    }
                };
                c = Some(next);
            }
            Actor::Defender => {
                let cur = c.as_ref().expect("attacker always acts first");
                f = if let Some(forced) = cfg.overrides.get(&epoch) {
                    forced.clone()
                } else {
                    match cfg.depth {
                        Depth::OneStep => br1_defender(&cfg.a, &cfg.b, cur, Some(&f)),
                        Depth::TwoStep => {
                            br2_defender(&cfg.a, &cfg.b, cur, Some(&f), cfg.search_budget, &mut rng)
                        }
                    }
                };
            }
        }
        let sensor = c.as_ref().unwrap();
        let closed = &cfg.a + &(&cfg.b * &f);
        let phi = unobservable_dim(sensor, &closed);
        let dim_vstar = vstar(&cfg.a, &cfg.b, sensor).vstar.dim();
        let max_geo = max_geometric_multiplicity(&closed).map_err(game_err(epoch))?;
        let min_unobs = min_unobservable_dim(&closed, cfg.m).map_err(game_err(epoch))?;
        steps.push(GameStep {
            epoch,
            actor,
            strategy: match actor {
                Actor::Attacker => sensor.clone(),
                Actor::Defender => f.clone(),
            },
            phi,
            dim_vstar,
            max_geo_mult: max_geo,
            min_unobs,
        });
    }
    Ok(GameTrace { steps })
}

/// Minimal tail length before a constant or alternating pattern counts
/// as established.
const TAIL: usize = 4;

/// Classifies a finished trace and evaluates the structural certificates.
pub fn classify_mode(trace: &GameTrace, a: &Matrix, b: &Matrix, _m: usize) -> ModeReport {
    let phis = trace.phis();
    let len = phis.len();

    // longest constant suffix
    let mut lock_start = len.saturating_sub(1);
    while lock_start > 0 && phis[lock_start - 1] == phis[lock_start] {
        lock_start -= 1;
    }
    // longest alternating suffix (consecutive values differ)
    let mut osc_start = len.saturating_sub(1);
    while osc_start > 0 && phis[osc_start - 1] != phis[osc_start] {
        osc_start -= 1;
    }

    let (mode, onset_epoch, amplitude) = if len - lock_start >= TAIL {
        (Mode::Lock, trace.steps[lock_start].epoch, 0)
    } else if len - osc_start >= TAIL {
        let amp = (osc_start..len - 1)
            .map(|i| phis[i + 1].abs_diff(phis[i]))
            .max()
            .unwrap_or(0);
        (Mode::Oscillation, trace.steps[osc_start].epoch, amp)
    } else {
        (
            Mode::Inconclusive,
            trace.steps.last().map_or(1, |s| s.epoch),
            0,
        )
    };

    let first = &trace.steps[0];
    let lock_certificate = first.phi == first.dim_vstar;
    let zero_vstar_certificate = zero_vstar_certificate_check(a, b, &first.strategy);

    ModeReport {
        mode,
        onset_epoch,
        amplitude,
        loop_period: strategy_loop_period(trace),
        lock_certificate,
        zero_vstar_certificate,
        response_sets_collapse: lock_certificate,
    }
}

/// Minimal period p such that the per-epoch (C, F) states eventually
/// repeat exactly, with at least two full periods observed.
pub fn strategy_loop_period(trace: &GameTrace) -> Option<usize> {
    let states = epoch_states(trace);
    let n = states.len();
    for p in 1..=n / 2 {
        for start in 0..n - 2 * p + 1 {
            if (start..n - p).all(|i| states[i] == states[i + p]) {
                return Some(p);
            }
        }
    }
    None
}

fn epoch_states(trace: &GameTrace) -> Vec<(Matrix, Matrix)> {
    let mut out = Vec::with_capacity(trace.steps.len());
    let mut c: Option<Matrix> = None;
    let mut f: Option<Matrix> = None;
    for s in &trace.steps {
        match s.actor {
            Actor::Attacker => c = Some(s.strategy.clone()),
            Actor::Defender => f = Some(s.strategy.clone()),
        }
        out.push((
            c.clone().unwrap_or_else(|| Matrix::zeros(0, 0)),
            f.clone().unwrap_or_else(|| Matrix::zeros(0, 0)),
        ));
    }
    out
}

/// Structural certificate that dim V* = 0 regardless of feedback:
/// with few sensors (n−m ≥ k), `Im B ⊆ Ker C` together with
/// `Ker C ∩ Ker(CA) = 0`; with many inputs (n−m < k), `Ker C ⊆ Im B`
/// together with `Ker C ∩ Ker(ZA) = 0` where the rows of Z annihilate B.
pub fn zero_vstar_certificate_check(a: &Matrix, b: &Matrix, c: &Matrix) -> bool {
    let n = a.rows();
    let m = c.rows();
    let k = b.cols();
    let ker_c = c.kernel_basis();
    if n - m >= k {
        let imb_inside = ker_c.contains_columns(b);
        let blocked = c.vstack(&(c * a)).kernel_basis().is_zero();
        imb_inside && blocked
    } else {
        let imb = Subspace::span_of_columns(b);
        let kerc_inside = imb.contains_columns(ker_c.basis());
        let z = imb.left_annihilator_rows();
        let blocked = if z.rows() == 0 {
            ker_c.is_zero()
        } else {
            c.vstack(&(&z * a)).kernel_basis().is_zero()
        };
        kerc_inside && blocked
    }
}

/// Side-by-side comparison of the two-step responses with the
/// leader-follower equilibrium actions they approximate.
#[derive(Clone, Debug)]
pub struct StackelbergReport {
    /// min dim V*(C) over canonical constructions plus random sensors
    /// (the unrestricted leader-attacker value).
    pub br2x_value: usize,
    /// min dim V*(C) over the one-step attacker family.
    pub br2_value: usize,
    /// Value the one-step attacker achieves against F₀.
    pub br1_value: usize,
    /// dim V* of every sampled sensor stayed at or above the one-step
    /// attacker value.
    pub value_ordering_ok: bool,
    /// Follower-defender equivalence: Φ(C, A+BF) = dim V*(C) exactly for
    /// friends of V*(C), on every sampled feedback.
    pub follower_defender_equiv: bool,
    /// Follower-attacker equivalence: no sampled sensor beats the
    /// canonical construction's value.
    pub follower_attacker_equiv: bool,
    /// Number of random samples drawn per check.
    pub samples: usize,
}

/// Compares the two-step best responses with the Stackelberg roles.
pub fn stackelberg_compare(
    a: &Matrix,
    b: &Matrix,
    m: usize,
    f0: &Matrix,
    budget: usize,
    seed: u64,
) -> Result<StackelbergReport> {
    let n = a.rows();
    let k = b.cols();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let closed = a + &(b * f0);
    let br1_value = min_unobservable_dim(&closed, m)?;
    let candidates: Vec<Matrix> = minimize_unobservable_candidates(a, b, f0, m)?
        .iter()
        .map(canonical_sensor)
        .collect();
    let br2_value = candidates
        .iter()
        .map(|c| vstar(a, b, c).vstar.dim())
        .min()
        .expect("nonempty family");

    let mut br2x_value = br2_value;
    for _ in 0..budget {
        let c = Matrix::from_fn(m, n, |_, _| rat(rng.gen_range(-2i64..=2)));
        br2x_value = br2x_value.min(vstar(a, b, &c).vstar.dim());
    }

    let mut value_ordering_ok = br2x_value >= br1_value;
    let mut follower_defender_equiv = true;
    let mut follower_attacker_equiv = true;
    let samples = budget.max(8);
    let probe_c = &candidates[0];
    let vs = vstar(a, b, probe_c).vstar;
    for _ in 0..samples {
        // defender side: friendship must coincide with attaining dim V*
        let f = Matrix::from_fn(k, n, |_, _| rat(rng.gen_range(-2i64..=2)));
        let attains = unobservable_dim(probe_c, &(a + &(b * &f))) == vs.dim();
        if attains != is_friend(a, b, &f, &vs) {
            follower_defender_equiv = false;
        }
        // attacker side: the canonical value is a true lower bound
        let c = Matrix::from_fn(m, n, |_, _| rat(rng.gen_range(-2i64..=2)));
        let phi = unobservable_dim(&c, &closed);
        if phi < br1_value {
            follower_attacker_equiv = false;
        }
        if vstar(a, b, &c).vstar.dim() < br1_value {
            value_ordering_ok = false;
        }
    }
    Ok(StackelbergReport {
        br2x_value,
        br2_value,
        br1_value,
        value_ordering_ok,
        follower_defender_equiv,
        follower_attacker_equiv,
        samples,
    })
}
