//! Loss streams, the best fixed comparator, and bandit gradient estimators.
//!
//! Every stream in this crate produces per-learner losses of the form
//! `(μ/2)‖x‖² + ⟨a, x⟩ + c`, i.e. linear or isotropic quadratic. Sums of such
//! losses stay in the family ([`QuadForm`]), which gives the comparator a
//! closed form on balls and boxes. Streams are stateless: round `t` is
//! regenerated from `(seed, t)` on demand.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::rng::{sub_stream, Purpose};
use crate::vector::{self, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum LossClass {
    Convex,
    StronglyConvex { mu: f64 },
}

/// A single learner's loss in a single round.
#[derive(Debug, Clone, PartialEq)]
pub enum LocalLoss {
    Zero,
    /// `⟨g, x⟩`
    Linear { g: Vector },
    /// `(μ/2)‖x − target‖²`
    Quadratic { mu: f64, target: Vector },
}

impl LocalLoss {
    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            LocalLoss::Zero => 0.0,
            LocalLoss::Linear { g } => vector::dot(g, x),
            LocalLoss::Quadratic { mu, target } => 0.5 * mu * vector::dist_sq(x, target),
        }
    }

    pub fn grad(&self, x: &[f64]) -> Vector {
        match self {
            LocalLoss::Zero => vector::zeros(x.len()),
            LocalLoss::Linear { g } => g.clone(),
            LocalLoss::Quadratic { mu, target } => x.iter().zip(target).map(|(a, b)| mu * (a - b)).collect(),
        }
    }

    fn accumulate_into(&self, form: &mut QuadForm) {
        match self {
            LocalLoss::Zero => {}
            LocalLoss::Linear { g } => vector::add_assign(&mut form.linear, g),
            LocalLoss::Quadratic { mu, target } => {
                form.curvature += mu;
                vector::axpy(&mut form.linear, -mu, target);
                form.constant += 0.5 * mu * vector::norm_sq(target);
            }
        }
    }
}

/// `(curvature/2)‖x‖² + ⟨linear, x⟩ + constant`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadForm {
    pub curvature: f64,
    pub linear: Vector,
    pub constant: f64,
}

impl QuadForm {
    pub fn zero(d: usize) -> Self {
        Self {
            curvature: 0.0,
            linear: vector::zeros(d),
            constant: 0.0,
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        0.5 * self.curvature * vector::norm_sq(x) + vector::dot(&self.linear, x) + self.constant
    }

    pub fn grad(&self, x: &[f64]) -> Vector {
        x.iter().zip(&self.linear).map(|(a, b)| self.curvature * a + b).collect()
    }

    pub fn add(&mut self, other: &QuadForm) {
        self.curvature += other.curvature;
        vector::add_assign(&mut self.linear, &other.linear);
        self.constant += other.constant;
    }

    /// Exact minimizer over `dom`.
    pub fn argmin(&self, dom: &Domain) -> Vector {
        if self.curvature > 0.0 {
            // isotropic quadratic: Euclidean projection of the free minimizer
            return dom.project(&vector::scaled(&self.linear, -1.0 / self.curvature));
        }
        let a = &self.linear;
        match *dom {
            Domain::Ball { radius } => {
                let nrm = vector::norm(a);
                if nrm == 0.0 {
                    vector::zeros(a.len())
                } else {
                    vector::scaled(a, -radius / nrm)
                }
            }
            Domain::Box { half_width } => a
                .iter()
                .map(|&c| if c > 0.0 { -half_width } else if c < 0.0 { half_width } else { 0.0 })
                .collect(),
            Domain::ShiftedBox { lo, hi } => a
                .iter()
                .map(|&c| if c > 0.0 { lo } else if c < 0.0 { hi } else { 0.0f64.clamp(lo, hi) })
                .collect(),
        }
    }
}

/// All learners' losses for one round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundLoss {
    pub losses: Vec<LocalLoss>,
    pub d: usize,
}

impl RoundLoss {
    pub fn value(&self, i: usize, x: &[f64]) -> f64 {
        self.losses[i].value(x)
    }

    pub fn grad(&self, i: usize, x: &[f64]) -> Vector {
        self.losses[i].grad(x)
    }

    /// `f_t(x) = Σ_j f_{t,j}(x)`.
    pub fn global_value(&self, x: &[f64]) -> f64 {
        self.losses.iter().map(|l| l.value(x)).sum()
    }

    pub fn aggregate(&self) -> QuadForm {
        let mut form = QuadForm::zero(self.d);
        for l in &self.losses {
            l.accumulate_into(&mut form);
        }
        form
    }
}

/// A deterministic adversary supplying losses for rounds `0..horizon()`.
pub trait LossStream: Send + Sync {
    fn name(&self) -> &'static str;
    fn n(&self) -> usize;
    fn d(&self) -> usize;
    fn horizon(&self) -> usize;
    fn class(&self) -> LossClass;
    /// Bound `G` on ‖∇f_{t,i}‖ over the domain the stream is designed for.
    fn gradient_bound(&self) -> f64;
    fn round(&self, t: usize) -> RoundLoss;

    fn value(&self, t: usize, i: usize, x: &[f64]) -> f64 {
        self.round(t).value(i, x)
    }

    fn grad(&self, t: usize, i: usize, x: &[f64]) -> Vector {
        self.round(t).grad(i, x)
    }
}

/// Every loss identically zero.
#[derive(Debug, Clone)]
pub struct ZeroStream {
    pub n: usize,
    pub d: usize,
    pub horizon: usize,
}

impl LossStream for ZeroStream {
    fn name(&self) -> &'static str {
        "zero"
    }
    fn n(&self) -> usize {
        self.n
    }
    fn d(&self) -> usize {
        self.d
    }
    fn horizon(&self) -> usize {
        self.horizon
    }
    fn class(&self) -> LossClass {
        LossClass::Convex
    }
    fn gradient_bound(&self) -> f64 {
        0.0
    }
    fn round(&self, _t: usize) -> RoundLoss {
        RoundLoss {
            losses: vec![LocalLoss::Zero; self.n],
            d: self.d,
        }
    }
}

/// An explicit, finite list of rounds (test fixtures, hand traces).
#[derive(Debug, Clone)]
pub struct ScriptedStream {
    rounds: Vec<RoundLoss>,
    n: usize,
    d: usize,
    class: LossClass,
    gradient_bound: f64,
}

impl ScriptedStream {
    pub fn new(rounds: Vec<RoundLoss>, class: LossClass, gradient_bound: f64) -> Result<Self> {
        let first = rounds
            .first()
            .ok_or_else(|| Error::InvalidConstruction("scripted stream needs at least one round".into()))?;
        let (n, d) = (first.losses.len(), first.d);
        if rounds.iter().any(|r| r.losses.len() != n || r.d != d) {
            return Err(Error::InvalidConstruction("inconsistent round shapes".into()));
        }
        Ok(Self {
            rounds,
            n,
            d,
            class,
            gradient_bound,
        })
    }
}

impl LossStream for ScriptedStream {
    fn name(&self) -> &'static str {
        "scripted"
    }
    fn n(&self) -> usize {
        self.n
    }
    fn d(&self) -> usize {
        self.d
    }
    fn horizon(&self) -> usize {
        self.rounds.len()
    }
    fn class(&self) -> LossClass {
        self.class
    }
    fn gradient_bound(&self) -> f64 {
        self.gradient_bound
    }
    fn round(&self, t: usize) -> RoundLoss {
        self.rounds[t].clone()
    }
}

fn random_signs<R: Rng>(rng: &mut R, d: usize, magnitude: f64) -> Vector {
    (0..d)
        .map(|_| if rng.random::<bool>() { magnitude } else { -magnitude })
        .collect()
}

/// `f_{t,i}(x) = ⟨g_{t,i}, x⟩` with independent `±G/√d` coordinates, so that
/// `‖g_{t,i}‖ = G` exactly.
#[derive(Debug, Clone)]
pub struct LinearAdversarialStream {
    n: usize,
    d: usize,
    horizon: usize,
    g: f64,
    seed: u64,
}

pub fn linear_adversarial_stream(n: usize, d: usize, horizon: usize, g: f64, seed: u64) -> LinearAdversarialStream {
    LinearAdversarialStream { n, d, horizon, g, seed }
}

impl LossStream for LinearAdversarialStream {
    fn name(&self) -> &'static str {
        "linear"
    }
    fn n(&self) -> usize {
        self.n
    }
    fn d(&self) -> usize {
        self.d
    }
    fn horizon(&self) -> usize {
        self.horizon
    }
    fn class(&self) -> LossClass {
        LossClass::Convex
    }
    fn gradient_bound(&self) -> f64 {
        self.g
    }
    fn round(&self, t: usize) -> RoundLoss {
        let mut rng = sub_stream(self.seed, Purpose::Loss, t as u64, 0);
        let mag = self.g / (self.d as f64).sqrt();
        let losses = (0..self.n)
            .map(|_| LocalLoss::Linear {
                g: random_signs(&mut rng, self.d, mag),
            })
            .collect();
        RoundLoss { losses, d: self.d }
    }
}

/// `f_{t,i}(x) = (μ/2)‖x − θ_{t,i}‖²` with `θ_{t,i} = (D/(2√d))·s`, `s` a
/// uniformly random sign vector. Targets lie on the sphere of radius `D/2`,
/// inside both the ball of radius `D/2` and the box of half-width `D/(2√d)`,
/// so `‖∇f‖ ≤ μD` on either domain.
#[derive(Debug, Clone)]
pub struct QuadraticStream {
    n: usize,
    d: usize,
    horizon: usize,
    mu: f64,
    diameter: f64,
    seed: u64,
}

pub fn quadratic_stream(n: usize, d: usize, horizon: usize, mu: f64, diameter: f64, seed: u64) -> Result<QuadraticStream> {
    if !(mu > 0.0) {
        return Err(Error::InvalidConstruction(format!("mu={mu} must be positive")));
    }
    Ok(QuadraticStream {
        n,
        d,
        horizon,
        mu,
        diameter,
        seed,
    })
}

impl QuadraticStream {
    pub fn target(&self, t: usize, i: usize) -> Vector {
        match &self.round(t).losses[i] {
            LocalLoss::Quadratic { target, .. } => target.clone(),
            _ => unreachable!(),
        }
    }
}

impl LossStream for QuadraticStream {
    fn name(&self) -> &'static str {
        "quadratic"
    }
    fn n(&self) -> usize {
        self.n
    }
    fn d(&self) -> usize {
        self.d
    }
    fn horizon(&self) -> usize {
        self.horizon
    }
    fn class(&self) -> LossClass {
        LossClass::StronglyConvex { mu: self.mu }
    }
    fn gradient_bound(&self) -> f64 {
        self.mu * self.diameter
    }
    fn round(&self, t: usize) -> RoundLoss {
        let mut rng = sub_stream(self.seed, Purpose::Loss, t as u64, 0);
        let mag = self.diameter / (2.0 * (self.d as f64).sqrt());
        let losses = (0..self.n)
            .map(|_| LocalLoss::Quadratic {
                mu: self.mu,
                target: random_signs(&mut rng, self.d, mag),
            })
            .collect();
        RoundLoss { losses, d: self.d }
    }
}

/// Learner groups of the cycle lower-bound construction with `n = 2m + 2`.
///
/// With `K = ⌈m/2⌉`, the `2K − 1` learners at hop distance `< K` from
/// learner 0 form the near group; the other `n − 2K + 1` learners carry the
/// informative losses, which are redrawn every `K₁ = ⌈m/(2ω)⌉` rounds.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerBoundLayout {
    pub n: usize,
    pub m: usize,
    pub hops: usize,
    pub interval: usize,
    pub far: Vec<bool>,
}

impl LowerBoundLayout {
    pub fn new(n: usize, omega: f64) -> Result<Self> {
        if n < 4 || !n.is_multiple_of(2) {
            return Err(Error::InvalidConstruction(format!("lower-bound construction needs even n >= 4, got {n}")));
        }
        if !(omega > 0.0 && omega <= 1.0) {
            return Err(Error::InvalidConstruction(format!("omega={omega} outside (0, 1]")));
        }
        let m = (n - 2) / 2;
        let hops = m.div_ceil(2);
        let interval = ((m as f64) / (2.0 * omega)).ceil().max(1.0) as usize;
        let far = (0..n).map(|i| i.min(n - i) >= hops).collect();
        Ok(Self { n, m, hops, interval, far })
    }

    pub fn far_count(&self) -> usize {
        self.far.iter().filter(|f| **f).count()
    }

    pub fn interval_of(&self, t: usize) -> usize {
        t / self.interval
    }
}

/// Near group gets the zero loss; far group gets `⟨w, x⟩` with `w ∈ {±G/√d}^d`
/// redrawn per interval.
#[derive(Debug, Clone)]
pub struct LowerBoundConvexStream {
    layout: LowerBoundLayout,
    d: usize,
    horizon: usize,
    g: f64,
    seed: u64,
}

pub fn lower_bound_convex_stream(
    n: usize,
    d: usize,
    horizon: usize,
    g: f64,
    omega: f64,
    seed: u64,
) -> Result<LowerBoundConvexStream> {
    Ok(LowerBoundConvexStream {
        layout: LowerBoundLayout::new(n, omega)?,
        d,
        horizon,
        g,
        seed,
    })
}

impl LowerBoundConvexStream {
    pub fn layout(&self) -> &LowerBoundLayout {
        &self.layout
    }
}

impl LossStream for LowerBoundConvexStream {
    fn name(&self) -> &'static str {
        "lower_bound_convex"
    }
    fn n(&self) -> usize {
        self.layout.n
    }
    fn d(&self) -> usize {
        self.d
    }
    fn horizon(&self) -> usize {
        self.horizon
    }
    fn class(&self) -> LossClass {
        LossClass::Convex
    }
    fn gradient_bound(&self) -> f64 {
        self.g
    }
    fn round(&self, t: usize) -> RoundLoss {
        let interval = self.layout.interval_of(t);
        let mut rng = sub_stream(self.seed, Purpose::Loss, interval as u64, 1);
        let w = random_signs(&mut rng, self.d, self.g / (self.d as f64).sqrt());
        let losses = self
            .layout
            .far
            .iter()
            .map(|&far| if far { LocalLoss::Linear { g: w.clone() } } else { LocalLoss::Zero })
            .collect();
        RoundLoss { losses, d: self.d }
    }
}

/// Near group gets `(μ/2)‖x‖²`; far group gets `(μ/2)‖x − (D/√d)w‖²` with
/// `w ∈ {0_d, 1_d}`, `P(w = 1_d) = p`, redrawn per interval.
#[derive(Debug, Clone)]
pub struct LowerBoundScStream {
    layout: LowerBoundLayout,
    d: usize,
    horizon: usize,
    mu: f64,
    diameter: f64,
    p: f64,
    seed: u64,
}

#[allow(clippy::too_many_arguments)]
pub fn lower_bound_sc_stream(
    n: usize,
    d: usize,
    horizon: usize,
    mu: f64,
    diameter: f64,
    omega: f64,
    p: f64,
    seed: u64,
) -> Result<LowerBoundScStream> {
    if !(0.25..=0.75).contains(&p) {
        return Err(Error::InvalidConstruction(format!("p={p} outside [1/4, 3/4]")));
    }
    if !(mu > 0.0) {
        return Err(Error::InvalidConstruction(format!("mu={mu} must be positive")));
    }
    Ok(LowerBoundScStream {
        layout: LowerBoundLayout::new(n, omega)?,
        d,
        horizon,
        mu,
        diameter,
        p,
        seed,
    })
}

impl LowerBoundScStream {
    pub fn layout(&self) -> &LowerBoundLayout {
        &self.layout
    }

    /// Minimizer of the expected global loss, `(n − 2K + 1)·D·p/(n√d)·1_d`.
    pub fn expected_minimizer(&self) -> Vector {
        let n = self.layout.n as f64;
        let far = self.layout.far_count() as f64;
        vec![far * self.diameter * self.p / (n * (self.d as f64).sqrt()); self.d]
    }
}

impl LossStream for LowerBoundScStream {
    fn name(&self) -> &'static str {
        "lower_bound_sc"
    }
    fn n(&self) -> usize {
        self.layout.n
    }
    fn d(&self) -> usize {
        self.d
    }
    fn horizon(&self) -> usize {
        self.horizon
    }
    fn class(&self) -> LossClass {
        LossClass::StronglyConvex { mu: self.mu }
    }
    fn gradient_bound(&self) -> f64 {
        self.mu * self.diameter
    }
    fn round(&self, t: usize) -> RoundLoss {
        let interval = self.layout.interval_of(t);
        let mut rng = sub_stream(self.seed, Purpose::Loss, interval as u64, 2);
        let hit = rng.random::<f64>() < self.p;
        let level = if hit { self.diameter / (self.d as f64).sqrt() } else { 0.0 };
        let far_target = vec![level; self.d];
        let losses = self
            .layout
            .far
            .iter()
            .map(|&far| LocalLoss::Quadratic {
                mu: self.mu,
                target: if far { far_target.clone() } else { vector::zeros(self.d) },
            })
            .collect();
        RoundLoss { losses, d: self.d }
    }
}

/// Loss stream selection as written in the experiment config.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LossSpec {
    Zero,
    Linear {
        #[serde(rename = "G", default = "default_g")]
        g: f64,
    },
    /// `D` defaults to the domain diameter.
    Quadratic {
        #[serde(default = "default_mu")]
        mu: f64,
        #[serde(rename = "D", default)]
        diameter: Option<f64>,
    },
    LowerBoundConvex {
        #[serde(rename = "G", default = "default_g")]
        g: f64,
    },
    LowerBoundSc {
        #[serde(default = "default_mu")]
        mu: f64,
        #[serde(rename = "D", default)]
        diameter: Option<f64>,
        #[serde(default = "default_p")]
        p: f64,
    },
}

fn default_g() -> f64 {
    1.0
}
fn default_mu() -> f64 {
    1.0
}
fn default_p() -> f64 {
    0.5
}

impl Default for LossSpec {
    fn default() -> Self {
        LossSpec::Linear { g: 1.0 }
    }
}

impl LossSpec {
    pub fn is_lower_bound(&self) -> bool {
        matches!(self, LossSpec::LowerBoundConvex { .. } | LossSpec::LowerBoundSc { .. })
    }

    pub fn is_strongly_convex(&self) -> bool {
        matches!(self, LossSpec::Quadratic { .. } | LossSpec::LowerBoundSc { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            LossSpec::Zero => "zero",
            LossSpec::Linear { .. } => "linear",
            LossSpec::Quadratic { .. } => "quadratic",
            LossSpec::LowerBoundConvex { .. } => "lower_bound_convex",
            LossSpec::LowerBoundSc { .. } => "lower_bound_sc",
        }
    }

    /// `omega` is only consulted by the lower-bound constructions.
    pub fn build(
        &self,
        n: usize,
        d: usize,
        horizon: usize,
        domain_diameter: f64,
        omega: f64,
        seed: u64,
    ) -> Result<Box<dyn LossStream>> {
        Ok(match *self {
            LossSpec::Zero => Box::new(ZeroStream { n, d, horizon }),
            LossSpec::Linear { g } => Box::new(linear_adversarial_stream(n, d, horizon, g, seed)),
            LossSpec::Quadratic { mu, diameter } => Box::new(quadratic_stream(
                n,
                d,
                horizon,
                mu,
                diameter.unwrap_or(domain_diameter),
                seed,
            )?),
            LossSpec::LowerBoundConvex { g } => Box::new(lower_bound_convex_stream(n, d, horizon, g, omega, seed)?),
            LossSpec::LowerBoundSc { mu, diameter, p } => Box::new(lower_bound_sc_stream(
                n,
                d,
                horizon,
                mu,
                diameter.unwrap_or(domain_diameter),
                omega,
                p,
                seed,
            )?),
        })
    }
}

/// Σ_t Σ_j f_{t,j} as a single quadratic form.
pub fn total_loss_form(stream: &dyn LossStream) -> QuadForm {
    let mut form = QuadForm::zero(stream.d());
    for t in 0..stream.horizon() {
        form.add(&stream.round(t).aggregate());
    }
    form
}

/// `argmin_{x ∈ dom} Σ_t Σ_j f_{t,j}(x)` over the realized stream.
pub fn best_fixed_comparator(stream: &dyn LossStream, dom: &Domain) -> Result<Vector> {
    dom.validate()?;
    Ok(total_loss_form(stream).argmin(dom))
}

pub const COMPARATOR_TOL: f64 = 1e-8;
pub const COMPARATOR_MAX_ITER: usize = 1_000_000;

/// Projected gradient descent on `grad`, stopping once the projected-gradient
/// mapping `‖x − Π(x − s∇f(x))‖/s` drops below `tol`.
pub fn minimize_projected<F>(
    grad: F,
    dom: &Domain,
    x0: Vector,
    step: f64,
    tol: f64,
    max_iter: usize,
) -> Result<Vector>
where
    F: Fn(&[f64]) -> Vector,
{
    let mut x = dom.project(&x0);
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        let g = grad(&x);
        let mut moved = x.clone();
        vector::axpy(&mut moved, -step, &g);
        let next = dom.project(&moved);
        residual = vector::norm(&vector::sub(&x, &next)) / step;
        x = next;
        if residual <= tol {
            return Ok(x);
        }
    }
    Err(Error::ComparatorFailure {
        iterations: max_iter,
        residual,
    })
}

/// Comparator computed by projected gradient descent on the summed per-round
/// gradients, without the aggregated closed form.
pub fn best_fixed_comparator_iterative(stream: &dyn LossStream, dom: &Domain) -> Result<Vector> {
    dom.validate()?;
    let rounds: Vec<RoundLoss> = (0..stream.horizon()).map(|t| stream.round(t)).collect();
    let grad = |x: &[f64]| {
        let mut g = vector::zeros(x.len());
        for r in &rounds {
            for l in &r.losses {
                vector::add_assign(&mut g, &l.grad(x));
            }
        }
        g
    };
    let smoothness: f64 = rounds
        .iter()
        .flat_map(|r| r.losses.iter())
        .map(|l| match l {
            LocalLoss::Quadratic { mu, .. } => *mu,
            _ => 0.0,
        })
        .sum();
    let d = stream.d();
    let step = if smoothness > 0.0 {
        1.0 / smoothness
    } else {
        let g0 = vector::norm(&grad(&vector::zeros(d)));
        if g0 == 0.0 {
            return Ok(dom.project(&vector::zeros(d)));
        }
        dom.diameter(d) / g0
    };
    minimize_projected(grad, dom, vector::zeros(d), step, COMPARATOR_TOL, COMPARATOR_MAX_ITER)
}

/// Uniform direction on the unit sphere.
pub fn sample_unit_sphere<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vector {
    loop {
        let v: Vector = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let nrm = vector::norm(&v);
        if nrm > 1e-300 {
            return vector::scaled(&v, 1.0 / nrm);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientEstimate {
    pub ghat: Vector,
    /// Points at which the loss was queried (the bandit plays).
    pub queries: Vec<Vector>,
    /// Loss values observed at `queries`.
    pub values: Vec<f64>,
    pub direction: Vector,
}

fn check_exploration(eps: f64, dom: &Domain) -> Result<()> {
    let r = dom.inner_radius();
    if eps > 0.0 && eps <= r {
        Ok(())
    } else {
        Err(Error::InvalidExploration { eps, inner_radius: r })
    }
}

/// One-point estimator `ĝ = (d/ε)·f(center + εu)·u`.
pub fn one_point_estimate<R: Rng + ?Sized>(
    round: &RoundLoss,
    learner: usize,
    center: &[f64],
    eps: f64,
    dom: &Domain,
    rng: &mut R,
) -> Result<GradientEstimate> {
    check_exploration(eps, dom)?;
    let d = center.len();
    let u = sample_unit_sphere(d, rng);
    let mut play = center.to_vec();
    vector::axpy(&mut play, eps, &u);
    let value = round.value(learner, &play);
    Ok(GradientEstimate {
        ghat: vector::scaled(&u, d as f64 / eps * value),
        queries: vec![play],
        values: vec![value],
        direction: u,
    })
}

/// Two-point estimator `ĝ = (d/2ε)(f(center + εu) − f(center − εu))·u`.
pub fn two_point_estimate<R: Rng + ?Sized>(
    round: &RoundLoss,
    learner: usize,
    center: &[f64],
    eps: f64,
    dom: &Domain,
    rng: &mut R,
) -> Result<GradientEstimate> {
    check_exploration(eps, dom)?;
    let d = center.len();
    let u = sample_unit_sphere(d, rng);
    let mut plus = center.to_vec();
    vector::axpy(&mut plus, eps, &u);
    let mut minus = center.to_vec();
    vector::axpy(&mut minus, -eps, &u);
    let fp = round.value(learner, &plus);
    let fm = round.value(learner, &minus);
    Ok(GradientEstimate {
        ghat: vector::scaled(&u, d as f64 / (2.0 * eps) * (fp - fm)),
        queries: vec![plus, minus],
        values: vec![fp, fm],
        direction: u,
    })
}
