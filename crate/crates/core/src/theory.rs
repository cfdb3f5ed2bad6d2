//! Numerical checks of the policy-gradient identities behind verifier rewards.
//!
//! Two settings:
//!
//! * [`BernoulliRegime`]: `T` independent steps, each correct with
//!   probability `p = sigmoid(θ)` under one shared logit. The score of a step
//!   is `φ_t = a_t − p`. The per-step estimator `Σ_t (a_t − p)·φ_t` has mean
//!   `T·p(1−p)`; the trajectory-level estimator `(Π_t a_t − p^T)·Σ_t φ_t` has
//!   mean `T·p^T(1−p)`.
//! * [`FiniteBandit`]: a distribution `d` over a few states, a softmax policy
//!   per state and a binary verifier table, where every expectation is an
//!   exact finite sum.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BernoulliRegime {
    pub p: f64,
    pub horizon: u32,
}

impl BernoulliRegime {
    pub fn new(p: f64, horizon: u32) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidArgument(format!("p = {p} outside (0, 1)")));
        }
        if horizon == 0 {
            return Err(Error::InvalidArgument("horizon must be at least 1".into()));
        }
        Ok(BernoulliRegime { p, horizon })
    }

    pub fn from_logit(theta: f64, horizon: u32) -> Result<Self> {
        Self::new(1.0 / (1.0 + (-theta).exp()), horizon)
    }
}

/// `(T·p(1−p), T·p^T(1−p))`.
pub fn bernoulli_closed_forms(reg: &BernoulliRegime) -> (f64, f64) {
    let t = f64::from(reg.horizon);
    let p = reg.p;
    (t * p * (1.0 - p), t * p.powi(reg.horizon as i32) * (1.0 - p))
}

/// Both expectations by summing over the number of correct steps `k`, which
/// determines `Σφ`, `Σφ²` and success.
pub fn bernoulli_exact_expectations(reg: &BernoulliRegime) -> (f64, f64) {
    let (p, n) = (reg.p, reg.horizon);
    let tf = f64::from(n);
    let pt = p.powi(n as i32);
    let (mut vpr, mut or) = (0.0, 0.0);
    for k in 0..=n {
        let kf = f64::from(k);
        let prob = binom_f64(n, k) * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32);
        // k steps with φ = 1−p, the rest with φ = −p.
        let sum_phi = kf - tf * p;
        let sum_phi_sq = kf * (1.0 - p).powi(2) + (tf - kf) * p * p;
        let success = if k == n { 1.0 } else { 0.0 };
        vpr += prob * sum_phi_sq;
        or += prob * (success - pt) * sum_phi;
    }
    (vpr, or)
}

fn binom_f64(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    Vpr,
    Or,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// Steps drawn from the policy itself.
    Direct,
    /// Steps drawn from an even mixture of the policy and a policy with a
    /// higher step probability, reweighted by the likelihood ratio. Ratios are
    /// bounded by 2, and all-correct trajectories become common.
    DefensiveMixture,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientReport {
    pub estimator: Estimator,
    pub sampling: Sampling,
    pub p: f64,
    pub horizon: u32,
    /// Sample mean of the scalar gradient estimate.
    pub mean: f64,
    /// Standard error of `mean`; `None` with fewer than two samples.
    pub se: Option<f64>,
    pub n_samples: u64,
    pub closed_form: f64,
}

impl GradientReport {
    /// Distance from the closed form in standard errors.
    pub fn z_score(&self) -> Option<f64> {
        self.se.map(|se| {
            let d = (self.mean - self.closed_form).abs();
            if se == 0.0 {
                if d == 0.0 { 0.0 } else { f64::INFINITY }
            } else {
                d / se
            }
        })
    }

    pub fn within(&self, n_se: f64) -> bool {
        self.z_score().is_some_and(|z| z <= n_se)
    }
}

/// Running mean and variance (Welford).
#[derive(Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn se(&self) -> Option<f64> {
        (self.n >= 2).then(|| (self.m2 / (self.n - 1) as f64 / self.n as f64).sqrt())
    }
}

fn estimate(est: Estimator, p: f64, t: u32, ones: u32, sum_phi_sq: f64) -> f64 {
    match est {
        Estimator::Vpr => sum_phi_sq,
        Estimator::Or => {
            let success = if ones == t { 1.0 } else { 0.0 };
            (success - p.powi(t as i32)) * (f64::from(ones) - f64::from(t) * p)
        }
    }
}

/// Monte Carlo estimate of the expected gradient with `n_samples` trajectories.
pub fn mc_gradient(
    reg: &BernoulliRegime,
    est: Estimator,
    sampling: Sampling,
    n_samples: u64,
    seed: u64,
) -> Result<GradientReport> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be at least 1".into()));
    }
    let (p, t) = (reg.p, reg.horizon);
    // Mixture component: all-correct has probability about 1/e under it.
    let q = match sampling {
        Sampling::Direct => p,
        Sampling::DefensiveMixture => p.max(1.0 - 1.0 / f64::from(t)),
    };
    let mut r = rng(seed);
    let mut acc = Moments::default();
    for _ in 0..n_samples {
        let step_p = if q != p && r.random::<bool>() { q } else { p };
        let mut ones = 0;
        let mut sum_phi_sq = 0.0;
        for _ in 0..t {
            let a = r.random_bool(step_p);
            ones += u32::from(a);
            let phi = f64::from(u8::from(a)) - p;
            sum_phi_sq += phi * phi;
        }
        let mut x = estimate(est, p, t, ones, sum_phi_sq);
        if q != p {
            let zeros = (t - ones) as i32;
            let lik_p = p.powi(ones as i32) * (1.0 - p).powi(zeros);
            let lik_q = q.powi(ones as i32) * (1.0 - q).powi(zeros);
            x *= lik_p / (0.5 * lik_p + 0.5 * lik_q);
        }
        acc.push(x);
    }
    let (vpr, or) = bernoulli_closed_forms(reg);
    Ok(GradientReport {
        estimator: est,
        sampling,
        p,
        horizon: t,
        mean: acc.mean,
        se: acc.se(),
        n_samples,
        closed_form: match est {
            Estimator::Vpr => vpr,
            Estimator::Or => or,
        },
    })
}

/// Softmax policies over a finite state set with a binary verifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteBandit {
    /// State weights `d(s)`, summing to one.
    pub d: Vec<f64>,
    /// `logits[s][a]`.
    pub logits: Vec<Vec<f64>>,
    /// `verifier[s][a] ∈ {0, 1}`.
    pub verifier: Vec<Vec<u8>>,
}

fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|x| (x - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

impl FiniteBandit {
    pub fn new(d: Vec<f64>, logits: Vec<Vec<f64>>, verifier: Vec<Vec<u8>>) -> Result<Self> {
        if d.is_empty() || d.len() != logits.len() || d.len() != verifier.len() {
            return Err(Error::Shape("states disagree across d, logits, verifier".into()));
        }
        for (z, v) in logits.iter().zip(&verifier) {
            if z.is_empty() || z.len() != v.len() {
                return Err(Error::Shape("action counts disagree".into()));
            }
            if v.iter().any(|&x| x > 1) {
                return Err(Error::InvalidArgument("verifier entries must be 0 or 1".into()));
            }
        }
        let total: f64 = d.iter().sum();
        if d.iter().any(|&w| w < 0.0) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument("d must be a probability vector".into()));
        }
        Ok(FiniteBandit { d, logits, verifier })
    }

    /// Random instance: Dirichlet-like state weights, logits in `[-2, 2]`,
    /// verifier bits with probability one half (at least one valid action per state).
    pub fn random(n_states: usize, n_actions: usize, seed: u64) -> Self {
        let mut r = rng(seed);
        let raw: Vec<f64> = (0..n_states).map(|_| r.random_range(0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let d = raw.iter().map(|w| w / total).collect();
        let logits = (0..n_states)
            .map(|_| (0..n_actions).map(|_| r.random_range(-2.0..2.0)).collect())
            .collect();
        let verifier = (0..n_states)
            .map(|_| {
                let mut v: Vec<u8> = (0..n_actions).map(|_| u8::from(r.random::<bool>())).collect();
                if v.iter().all(|&x| x == 0) {
                    v[r.random_range(0..n_actions)] = 1;
                }
                v
            })
            .collect();
        FiniteBandit { d, logits, verifier }
    }

    pub fn n_params(&self) -> usize {
        self.logits.iter().map(Vec::len).sum()
    }

    fn offsets(&self) -> Vec<usize> {
        let mut off = Vec::with_capacity(self.logits.len());
        let mut o = 0;
        for z in &self.logits {
            off.push(o);
            o += z.len();
        }
        off
    }

    pub fn theta(&self) -> Vec<f64> {
        self.logits.iter().flatten().copied().collect()
    }

    pub fn with_theta(&self, theta: &[f64]) -> Self {
        let mut out = self.clone();
        let mut it = theta.iter();
        for z in &mut out.logits {
            for x in z {
                *x = *it.next().expect("theta has n_params entries");
            }
        }
        out
    }

    pub fn policy(&self, s: usize) -> Vec<f64> {
        softmax(&self.logits[s])
    }

    /// `J_V(θ) = Σ_s d(s) Σ_a π(a|s) V(s,a)`.
    pub fn objective(&self, verifier: &[Vec<u8>]) -> f64 {
        (0..self.d.len())
            .map(|s| {
                let pi = self.policy(s);
                self.d[s] * pi.iter().zip(&verifier[s]).map(|(p, &v)| p * f64::from(v)).sum::<f64>()
            })
            .sum()
    }

    /// `∇J` through the score function: `Σ d(s) π(a|s) (V(s,a) − b(s)) ∇log π(a|s)`,
    /// with `∂ log π(a|s)/∂θ[s][c] = I(a = c) − π(c|s)`.
    pub fn score_gradient(&self, verifier: &[Vec<u8>], baseline: Option<&[f64]>) -> Vec<f64> {
        let off = self.offsets();
        let mut g = vec![0.0; self.n_params()];
        for s in 0..self.d.len() {
            let pi = self.policy(s);
            let b = baseline.map_or(0.0, |b| b[s]);
            for (a, &pa) in pi.iter().enumerate() {
                let w = self.d[s] * pa * (f64::from(verifier[s][a]) - b);
                for (c, &pc) in pi.iter().enumerate() {
                    let score = if a == c { 1.0 - pc } else { -pc };
                    g[off[s] + c] += w * score;
                }
            }
        }
        g
    }

    /// `∇J` by differentiating the objective directly:
    /// `∂J/∂θ[s][c] = d(s) π(c|s) (V(s,c) − Σ_a π(a|s) V(s,a))`.
    pub fn exact_gradient(&self, verifier: &[Vec<u8>]) -> Vec<f64> {
        let off = self.offsets();
        let mut g = vec![0.0; self.n_params()];
        for s in 0..self.d.len() {
            let pi = self.policy(s);
            let vbar: f64 = pi.iter().zip(&verifier[s]).map(|(p, &v)| p * f64::from(v)).sum();
            for (c, &pc) in pi.iter().enumerate() {
                g[off[s] + c] = self.d[s] * pc * (f64::from(verifier[s][c]) - vbar);
            }
        }
        g
    }

    /// Central differences of `J` with step `h`.
    pub fn finite_difference_gradient(&self, verifier: &[Vec<u8>], h: f64) -> Vec<f64> {
        let theta = self.theta();
        (0..theta.len())
            .map(|i| {
                let mut up = theta.clone();
                let mut down = theta.clone();
                up[i] += h;
                down[i] -= h;
                (self.with_theta(&up).objective(verifier) - self.with_theta(&down).objective(verifier))
                    / (2.0 * h)
            })
            .collect()
    }

    /// Gradient of the imitation objective
    /// `L(θ) = Σ_s d(s) Σ_a π_old(a|s) V(s,a) log π_θ(a|s)` at the current logits,
    /// with `π_old` taken from `old`.
    pub fn imitation_gradient(&self, old: &FiniteBandit, verifier: &[Vec<u8>]) -> Vec<f64> {
        let off = self.offsets();
        let mut g = vec![0.0; self.n_params()];
        for s in 0..self.d.len() {
            let pi = self.policy(s);
            let pi_old = old.policy(s);
            // Σ_a π_old(a) V(a) (I(a = c) − π(c)) = π_old(c) V(c) − π(c) Σ_a π_old(a) V(a)
            let mass: f64 = pi_old.iter().zip(&verifier[s]).map(|(p, &v)| p * f64::from(v)).sum();
            for c in 0..pi.len() {
                g[off[s] + c] =
                    self.d[s] * (pi_old[c] * f64::from(verifier[s][c]) - pi[c] * mass);
            }
        }
        g
    }

    /// Largest `‖∇_θ log π(a|s)‖₂` over state-action pairs with positive mass.
    pub fn score_norm_bound(&self) -> f64 {
        let mut g: f64 = 0.0;
        for s in 0..self.d.len() {
            if self.d[s] <= 0.0 {
                continue;
            }
            let pi = self.policy(s);
            let sq: f64 = pi.iter().map(|p| p * p).sum();
            for &pa in pi.iter().filter(|&&p| p > 0.0) {
                // (1 − π_a)² + Σ_{c≠a} π_c² = 1 − 2π_a + Σ_c π_c²
                g = g.max((1.0 - 2.0 * pa + sq).max(0.0).sqrt());
            }
        }
        g
    }

    /// `E_{d,π}[I(V̂ ≠ V*)]`.
    pub fn disagreement(&self, a: &[Vec<u8>], b: &[Vec<u8>]) -> f64 {
        (0..self.d.len())
            .map(|s| {
                let pi = self.policy(s);
                self.d[s]
                    * pi.iter()
                        .enumerate()
                        .filter(|&(k, _)| a[s][k] != b[s][k])
                        .map(|(_, p)| p)
                        .sum::<f64>()
            })
            .sum()
    }
}

/// Score-function and direct gradients, and the same with a state baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientAgreement {
    /// `max |score − direct|`.
    pub score_vs_direct: f64,
    /// `max |with baseline − without|`.
    pub baseline_shift: f64,
    /// `‖direct − central differences‖ / max(‖direct‖, 1e-9)`.
    pub finite_difference_rel: f64,
}

pub fn gradient_agreement(fb: &FiniteBandit, baseline: &[f64], h: f64) -> GradientAgreement {
    let direct = fb.exact_gradient(&fb.verifier);
    let score = fb.score_gradient(&fb.verifier, None);
    let shifted = fb.score_gradient(&fb.verifier, Some(baseline));
    let fd = fb.finite_difference_gradient(&fb.verifier, h);
    let diff: Vec<f64> = direct.iter().zip(&fd).map(|(a, b)| a - b).collect();
    GradientAgreement {
        score_vs_direct: max_abs_diff(&score, &direct),
        baseline_shift: max_abs_diff(&shifted, &score),
        finite_difference_rel: norm(&diff) / norm(&direct).max(1e-9),
    }
}

/// `max |∇L_IL − ∇J_V|` at `θ = θ_old`.
pub fn imitation_equivalence_check(fb: &FiniteBandit) -> f64 {
    max_abs_diff(&fb.imitation_gradient(fb, &fb.verifier), &fb.exact_gradient(&fb.verifier))
}

/// The same comparison at `θ_old + shift`, where the identity does not hold.
pub fn imitation_off_policy_gap(fb: &FiniteBandit, shift: &[f64]) -> f64 {
    let theta: Vec<f64> = fb.theta().iter().zip(shift).map(|(a, b)| a + b).collect();
    let moved = fb.with_theta(&theta);
    max_abs_diff(&moved.imitation_gradient(fb, &fb.verifier), &moved.exact_gradient(&fb.verifier))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasReport {
    pub flip_rate: f64,
    pub flipped: usize,
    pub bias_norm: f64,
    pub score_bound: f64,
    pub disagreement: f64,
    pub bound: f64,
}

impl BiasReport {
    /// `bias_norm ≤ G·ε̄`, allowing for rounding in both sides.
    pub fn holds(&self) -> bool {
        self.bias_norm <= self.bound * (1.0 + 1e-12) + 1e-15
    }
}

/// Flips each entry of `oracle` independently with probability `flip_rate`
/// and compares exact gradients under the corrupted and true verifiers.
pub fn bias_bound_check(fb: &FiniteBandit, oracle: &[Vec<u8>], flip_rate: f64, seed: u64) -> Result<BiasReport> {
    if !(0.0..=1.0).contains(&flip_rate) {
        return Err(Error::InvalidArgument(format!("flip rate {flip_rate} outside [0, 1]")));
    }
    let mut r = rng(seed);
    let mut flipped = 0;
    let noisy: Vec<Vec<u8>> = oracle
        .iter()
        .map(|row| {
            row.iter()
                .map(|&v| {
                    if r.random_bool(flip_rate) {
                        flipped += 1;
                        1 - v
                    } else {
                        v
                    }
                })
                .collect()
        })
        .collect();
    Ok(bias_between(fb, oracle, &noisy, flip_rate, flipped))
}

/// Bias of the gradient under `noisy` relative to `oracle`.
pub fn bias_between(
    fb: &FiniteBandit,
    oracle: &[Vec<u8>],
    noisy: &[Vec<u8>],
    flip_rate: f64,
    flipped: usize,
) -> BiasReport {
    let g_true = fb.exact_gradient(oracle);
    let g_noisy = fb.exact_gradient(noisy);
    let diff: Vec<f64> = g_noisy.iter().zip(&g_true).map(|(a, b)| a - b).collect();
    let score_bound = fb.score_norm_bound();
    let disagreement = fb.disagreement(oracle, noisy);
    BiasReport {
        flip_rate,
        flipped,
        bias_norm: norm(&diff),
        score_bound,
        disagreement,
        bound: score_bound * disagreement,
    }
}

/// One cell of the signal-scaling table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub p: f64,
    pub horizon: u32,
    pub vpr_closed: f64,
    pub or_closed: f64,
    /// `|or_closed·p^{−(T−1)} − vpr_closed| / vpr_closed`.
    pub identity_rel_error: f64,
    pub vpr: GradientReport,
    /// Importance-sampled; stays informative when all-correct runs are rare.
    pub or: GradientReport,
    /// Plain sampling, for comparison.
    pub or_direct: GradientReport,
}

impl ScalingRow {
    pub fn within(&self, n_se: f64) -> bool {
        self.vpr.within(n_se) && self.or.within(n_se)
    }
}

/// Monte Carlo means and closed forms over a `(p, T)` grid.
pub fn scaling_table(ps: &[f64], horizons: &[u32], n_samples: u64, seed: u64) -> Result<Vec<ScalingRow>> {
    let mut rows = Vec::with_capacity(ps.len() * horizons.len());
    for (i, &p) in ps.iter().enumerate() {
        for (j, &t) in horizons.iter().enumerate() {
            let reg = BernoulliRegime::new(p, t)?;
            let (vpr_closed, or_closed) = bernoulli_closed_forms(&reg);
            let cell = crate::seed::derive_path(seed, &[i as u64, j as u64]);
            let stream = |k| crate::seed::derive(cell, k);
            rows.push(ScalingRow {
                p,
                horizon: t,
                vpr_closed,
                or_closed,
                identity_rel_error: (or_closed * p.powi(-(t as i32 - 1)) - vpr_closed).abs() / vpr_closed,
                vpr: mc_gradient(&reg, Estimator::Vpr, Sampling::Direct, n_samples, stream(1))?,
                or: mc_gradient(&reg, Estimator::Or, Sampling::DefensiveMixture, n_samples, stream(2))?,
                or_direct: mc_gradient(&reg, Estimator::Or, Sampling::Direct, n_samples, stream(3))?,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_values() {
        let (v, o) = bernoulli_closed_forms(&BernoulliRegime::new(0.5, 10).unwrap());
        assert_eq!(v, 2.5);
        assert_eq!(o, 0.0048828125);
        let (v, o) = bernoulli_closed_forms(&BernoulliRegime::new(0.5, 1).unwrap());
        assert_eq!((v, o), (0.25, 0.25));
    }

    #[test]
    fn binomial_sums_match_closed_forms() {
        for &p in &[0.3, 0.5, 0.7] {
            for &t in &[1, 5, 10, 20] {
                let reg = BernoulliRegime::new(p, t).unwrap();
                let (v, o) = bernoulli_closed_forms(&reg);
                let (ve, oe) = bernoulli_exact_expectations(&reg);
                assert!((v - ve).abs() <= 1e-12 * v, "{p} {t}");
                assert!((o - oe).abs() <= 1e-9 * o + 1e-15, "{p} {t}: {o} vs {oe}");
            }
        }
    }

    #[test]
    fn single_sample_has_no_error_bar() {
        let reg = BernoulliRegime::new(0.5, 3).unwrap();
        let r = mc_gradient(&reg, Estimator::Vpr, Sampling::Direct, 1, 0).unwrap();
        assert_eq!(r.se, None);
        assert!(!r.within(3.0));
    }

    #[test]
    fn constant_verifier_has_zero_gradient() {
        let mut fb = FiniteBandit::random(3, 4, 9);
        fb.verifier = vec![vec![1; 4]; 3];
        assert!(fb.exact_gradient(&fb.verifier).iter().all(|g| g.abs() < 1e-15));
        assert!(fb.score_gradient(&fb.verifier, None).iter().all(|g| g.abs() < 1e-15));
    }

    #[test]
    fn two_arm_gradient_raises_valid_logit() {
        let fb = FiniteBandit::new(vec![1.0], vec![vec![0.3, -0.1]], vec![vec![1, 0]]).unwrap();
        let g = fb.exact_gradient(&fb.verifier);
        assert!(g[0] > 0.0 && g[1] < 0.0);
        let fd = fb.finite_difference_gradient(&fb.verifier, 1e-5);
        for (a, b) in g.iter().zip(&fd) {
            assert!((a - b).abs() <= 1e-6 * a.abs());
        }
    }

    #[test]
    fn flip_free_verifier_has_no_bias() {
        let fb = FiniteBandit::random(4, 3, 2);
        let rep = bias_bound_check(&fb, &fb.verifier, 0.0, 1).unwrap();
        assert_eq!(rep.flipped, 0);
        assert_eq!(rep.bias_norm, 0.0);
        assert!(rep.holds());
    }

    #[test]
    fn single_flip_bounded_by_its_mass() {
        let fb = FiniteBandit::random(3, 3, 4);
        let mut noisy = fb.verifier.clone();
        noisy[1][2] ^= 1;
        let rep = bias_between(&fb, &fb.verifier, &noisy, 0.0, 1);
        let w = fb.d[1] * fb.policy(1)[2];
        assert!((rep.disagreement - w).abs() < 1e-15);
        assert!(rep.holds());
    }

    #[test]
    fn total_flip_still_bounded() {
        let fb = FiniteBandit::random(5, 4, 8);
        let rep = bias_bound_check(&fb, &fb.verifier, 1.0, 3).unwrap();
        assert_eq!(rep.flipped, 20);
        assert!((rep.disagreement - 1.0).abs() < 1e-12);
        assert!(rep.holds());
    }
}
