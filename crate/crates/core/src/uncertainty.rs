//! Posterior-predictive distributions of future confusion matrices.
//!
//! True positives and true negatives are modelled independently: given `p`
//! future positives, `a` follows a binomial (with the empirical TPR) or a
//! beta-binomial (with a beta posterior over the TPR) distribution, and
//! likewise `d` given `n` negatives. The joint pmf over the ROC lattice is
//! the product of the two.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::ConfusionMatrix;
use crate::surd::{int, to_f64, uint, Rational};

/// Largest `p·n` for which a joint pmf is materialised.
pub const MAX_GRID: u128 = 1_000_000;

/// Largest number of future trials on either side. Exact masses grow by a
/// few digits per trial, so very lopsided grids are refused even when `p·n`
/// is small.
pub const MAX_TRIALS: u64 = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Model {
    Binomial,
    BetaBinomial,
}

impl Model {
    pub fn key(self) -> &'static str {
        match self {
            Model::Binomial => "binomial",
            Model::BetaBinomial => "beta-binomial",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "binomial" | "bin" => Ok(Model::Binomial),
            "beta-binomial" | "betabinomial" | "bb" => Ok(Model::BetaBinomial),
            other => Err(Error::InvalidArgument(format!("unknown model `{other}`"))),
        }
    }
}

/// Beta distribution shape parameters.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BetaPrior {
    pub u: Rational,
    pub v: Rational,
}

impl BetaPrior {
    pub fn new(u: Rational, v: Rational) -> Result<Self> {
        if !u.is_positive() || !v.is_positive() {
            return Err(Error::NonPositiveShape { alpha: u.to_string(), beta: v.to_string() });
        }
        Ok(BetaPrior { u, v })
    }

    pub fn uniform() -> Self {
        BetaPrior { u: int(1), v: int(1) }
    }
}

impl Default for BetaPrior {
    fn default() -> Self {
        BetaPrior::uniform()
    }
}

/// Priors over the true positive and true negative rates.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Priors {
    pub tp: BetaPrior,
    pub tn: BetaPrior,
}

impl Priors {
    pub fn same(prior: BetaPrior) -> Self {
        Priors { tp: prior.clone(), tn: prior }
    }
}

/// An observed confusion matrix used to condition the predictive models.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Observation {
    pub a1: u64,
    pub b1: u64,
    pub c1: u64,
    pub d1: u64,
}

impl Observation {
    pub fn new(a1: u64, b1: u64, c1: u64, d1: u64) -> Self {
        Observation { a1, b1, c1, d1 }
    }

    pub fn p1(&self) -> u64 {
        self.a1 + self.c1
    }

    pub fn n1(&self) -> u64 {
        self.b1 + self.d1
    }

    pub fn matrix(&self) -> ConfusionMatrix {
        ConfusionMatrix::new(self.a1, self.b1, self.c1, self.d1)
    }
}

impl From<ConfusionMatrix> for Observation {
    fn from(m: ConfusionMatrix) -> Self {
        Observation::new(m.a, m.b, m.c, m.d)
    }
}

/// Beta posteriors for the TPR, `(u + a₁, v + c₁)`, and the TNR, `(u + d₁, v + b₁)`.
pub fn posterior_params(priors: &Priors, obs: &Observation) -> (BetaPrior, BetaPrior) {
    (
        BetaPrior { u: &priors.tp.u + uint(obs.a1), v: &priors.tp.v + uint(obs.c1) },
        BetaPrior { u: &priors.tn.u + uint(obs.d1), v: &priors.tn.v + uint(obs.b1) },
    )
}

/// Exact pmf of a count in `0..=trials`, stored as integer numerators over a
/// common denominator so that products and sums avoid repeated gcds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountPmf {
    numerators: Vec<BigInt>,
    denominator: BigInt,
}

impl CountPmf {
    fn new(numerators: Vec<BigInt>, denominator: BigInt) -> Self {
        let g = numerators.iter().fold(denominator.clone(), |g, x| g.gcd(x));
        if g.is_one() || g.is_zero() {
            return CountPmf { numerators, denominator };
        }
        CountPmf { numerators: numerators.into_iter().map(|x| x / &g).collect(), denominator: denominator / g }
    }

    pub fn trials(&self) -> u64 {
        self.numerators.len() as u64 - 1
    }

    pub fn mass(&self, k: u64) -> Rational {
        match self.numerators.get(k as usize) {
            Some(x) => Rational::new(x.clone(), self.denominator.clone()),
            None => Rational::zero(),
        }
    }

    pub fn masses(&self) -> Vec<Rational> {
        (0..=self.trials()).map(|k| self.mass(k)).collect()
    }

    pub fn numerators(&self) -> &[BigInt] {
        &self.numerators
    }

    pub fn denominator(&self) -> &BigInt {
        &self.denominator
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.masses().iter().map(to_f64).collect()
    }

    pub fn mean(&self) -> Rational {
        let s: BigInt = self.numerators.iter().enumerate().map(|(k, x)| x * BigInt::from(k)).sum();
        Rational::new(s, self.denominator.clone())
    }

    pub fn variance(&self) -> Rational {
        let s2: BigInt = self
            .numerators
            .iter()
            .enumerate()
            .map(|(k, x)| x * BigInt::from(k) * BigInt::from(k))
            .sum();
        let mean = self.mean();
        Rational::new(s2, self.denominator.clone()) - &mean * &mean
    }
}

fn binomial_coefficients(n: u64) -> Vec<BigInt> {
    let mut row = Vec::with_capacity(n as usize + 1);
    let mut c = BigInt::one();
    row.push(c.clone());
    for k in 0..n {
        c = c * BigInt::from(n - k) / BigInt::from(k + 1);
        row.push(c.clone());
    }
    row
}

fn check_theta(theta: &Rational) -> Result<()> {
    if theta.is_negative() || *theta > Rational::one() {
        return Err(Error::RateOutOfRange { name: "theta", value: theta.to_string() });
    }
    Ok(())
}

/// Binomial pmf over `0..=trials` with success probability `theta`.
pub fn binomial_pmfs(trials: u64, theta: &Rational) -> Result<CountPmf> {
    check_theta(theta)?;
    // θ = x/q, 1 − θ = y/q: P(k) = C(n,k)·xᵏ·yⁿ⁻ᵏ / qⁿ
    let q = theta.denom().clone();
    let x = theta.numer().clone();
    let y = &q - &x;
    let binom = binomial_coefficients(trials);
    let x_pow = powers(&x, trials);
    let y_pow = powers(&y, trials);
    let numerators = (0..=trials as usize)
        .map(|k| &binom[k] * &x_pow[k] * &y_pow[trials as usize - k])
        .collect();
    Ok(CountPmf::new(numerators, num_traits::pow(q, trials as usize)))
}

fn powers(base: &BigInt, up_to: u64) -> Vec<BigInt> {
    let mut out = Vec::with_capacity(up_to as usize + 1);
    let mut acc = BigInt::one();
    for _ in 0..=up_to {
        out.push(acc.clone());
        acc *= base;
    }
    out
}

/// Products `Π_{i<m} (u + i·v)` for `m = 0..=up_to`: rising factorials of
/// `u/v` scaled by `vᵐ`.
fn rising_numerators(u: &BigInt, v: &BigInt, up_to: u64) -> Vec<BigInt> {
    let mut out = Vec::with_capacity(up_to as usize + 1);
    let mut acc = BigInt::one();
    for i in 0..=up_to {
        out.push(acc.clone());
        acc *= u + v * BigInt::from(i);
    }
    out
}

/// Beta-binomial pmf over `0..=trials`:
/// `C(n,k)·(α)ₖ·(β)ₙ₋ₖ / (α+β)ₙ` with rising factorials, exact for any
/// positive rational shapes.
pub fn beta_binomial_pmfs(trials: u64, alpha: &Rational, beta: &Rational) -> Result<CountPmf> {
    if !alpha.is_positive() || !beta.is_positive() {
        return Err(Error::NonPositiveShape { alpha: alpha.to_string(), beta: beta.to_string() });
    }
    let t = trials as usize;
    let (u1, v1) = (alpha.numer(), alpha.denom());
    let (u2, v2) = (beta.numer(), beta.denom());
    let sum = alpha + beta;
    let (w, z) = (sum.numer(), sum.denom());
    let rise_a = rising_numerators(u1, v1, trials);
    let rise_b = rising_numerators(u2, v2, trials);
    let v1_pow = powers(v1, trials);
    let v2_pow = powers(v2, trials);
    let binom = binomial_coefficients(trials);
    // (α)ₖ(β)ₙ₋ₖ = A_k·B_{n−k} / (v1ᵏ·v2ⁿ⁻ᵏ); bring every term over (v1·v2)ⁿ.
    let numerators = (0..=t)
        .map(|k| &binom[k] * &rise_a[k] * &rise_b[t - k] * &v1_pow[t - k] * &v2_pow[k])
        .collect::<Vec<_>>();
    // (α+β)ₙ = W_n / zⁿ
    let rise_sum = &rising_numerators(w, z, trials)[t];
    let z_pow = num_traits::pow(z.clone(), t);
    let numerators = numerators.into_iter().map(|x| x * &z_pow).collect();
    let denominator = rise_sum * num_traits::pow(v1 * v2, t);
    Ok(CountPmf::new(numerators, denominator))
}

pub fn binomial_pmf(count: u64, trials: u64, theta: &Rational) -> Result<Rational> {
    if count > trials {
        return Err(Error::CountExceedsTrials { count, trials });
    }
    Ok(binomial_pmfs(trials, theta)?.mass(count))
}

pub fn beta_binomial_pmf(count: u64, trials: u64, alpha: &Rational, beta: &Rational) -> Result<Rational> {
    if count > trials {
        return Err(Error::CountExceedsTrials { count, trials });
    }
    Ok(beta_binomial_pmfs(trials, alpha, beta)?.mass(count))
}

/// The independent joint pmf over future `(a, d)` outcomes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JointPmf {
    pub p: u64,
    pub n: u64,
    pub model: Model,
    /// Pmf of future true positives `a`.
    pub tp: CountPmf,
    /// Pmf of future true negatives `d`.
    pub tn: CountPmf,
}

impl JointPmf {
    pub fn from_parts(model: Model, tp: CountPmf, tn: CountPmf) -> Self {
        JointPmf { p: tp.trials(), n: tn.trials(), model, tp, tn }
    }

    pub fn mass(&self, a: u64, d: u64) -> Rational {
        self.tp.mass(a) * self.tn.mass(d)
    }

    /// Integer numerator of `mass(a, d)` over [`JointPmf::denominator`].
    pub fn numerator(&self, a: u64, d: u64) -> BigInt {
        &self.tp.numerators[a as usize] * &self.tn.numerators[d as usize]
    }

    pub fn denominator(&self) -> BigInt {
        &self.tp.denominator * &self.tn.denominator
    }

    /// All lattice points with their masses, `a` ascending then `d` ascending.
    pub fn cells(&self) -> impl Iterator<Item = (u64, u64, Rational)> + '_ {
        (0..=self.p).flat_map(move |a| (0..=self.n).map(move |d| (a, d, self.mass(a, d))))
    }
}

/// Guard against materialising oversized grids.
pub fn check_grid(p: u64, n: u64) -> Result<()> {
    if p.max(n) > MAX_TRIALS {
        return Err(Error::TooManyTrials { trials: p.max(n), limit: MAX_TRIALS });
    }
    let points = p as u128 * n as u128;
    if points > MAX_GRID {
        return Err(Error::GridTooLarge { points, limit: MAX_GRID });
    }
    Ok(())
}

/// Predictive pmf of the number of hits in `trials` future examples after
/// observing `hits` and `misses`.
fn predictive(model: Model, trials: u64, hits: u64, misses: u64, prior: &BetaPrior) -> Result<CountPmf> {
    match model {
        Model::Binomial => {
            let total = hits + misses;
            binomial_pmfs(trials, &(uint(hits) / uint(total)))
        }
        Model::BetaBinomial => beta_binomial_pmfs(trials, &(&prior.u + uint(hits)), &(&prior.v + uint(misses))),
    }
}

/// Joint posterior-predictive pmf of `p` future positives and `n` future
/// negatives. The binomial model plugs in the empirical rates and needs both
/// observed classes to be non-empty.
pub fn joint_predictive(model: Model, obs: &Observation, priors: &Priors, p: u64, n: u64) -> Result<JointPmf> {
    check_grid(p, n)?;
    if model == Model::Binomial && (obs.p1() == 0 || obs.n1() == 0) {
        return Err(Error::EmpiricalRateUndefined { p1: obs.p1(), n1: obs.n1() });
    }
    let tp = predictive(model, p, obs.a1, obs.c1, &priors.tp)?;
    let tn = predictive(model, n, obs.d1, obs.b1, &priors.tn)?;
    Ok(JointPmf { p, n, model, tp, tn })
}

/// Pmf of a rate, as `(rate, mass)` pairs in increasing rate order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatePmf {
    pub entries: Vec<(Rational, Rational)>,
}

impl RatePmf {
    pub fn mean(&self) -> Rational {
        self.entries.iter().map(|(r, m)| r * m).sum()
    }

    pub fn variance(&self) -> Rational {
        let mean = self.mean();
        self.entries.iter().map(|(r, m)| (r - &mean) * (r - &mean) * m).sum()
    }

    pub fn sd(&self) -> f64 {
        to_f64(&self.variance()).sqrt()
    }

    pub fn total(&self) -> Rational {
        self.entries.iter().map(|(_, m)| m).sum()
    }
}

/// TPR marginal over `a/p` and FPR marginal over `(n − d)/n`.
pub fn marginals(j: &JointPmf) -> (RatePmf, RatePmf) {
    let tpr = (0..=j.p)
        .map(|a| (rate(a, j.p), j.tp.mass(a)))
        .collect();
    let fpr = (0..=j.n)
        .rev()
        .map(|d| (rate(j.n - d, j.n), j.tn.mass(d)))
        .collect();
    (RatePmf { entries: tpr }, RatePmf { entries: fpr })
}

fn rate(k: u64, total: u64) -> Rational {
    if total == 0 {
        Rational::zero()
    } else {
        uint(k) / uint(total)
    }
}

/// Standard deviation of the TPR marginal, `sd(a)/p`.
pub fn tpr_sd(j: &JointPmf) -> f64 {
    if j.p == 0 {
        return 0.0;
    }
    to_f64(&j.tp.variance()).sqrt() / j.p as f64
}

/// Empirical frequencies of Monte Carlo draws over the `(a, d)` lattice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frequencies {
    pub p: u64,
    pub n: u64,
    pub draws: u64,
    /// Row-major counts, `a` then `d`.
    pub counts: Vec<u64>,
}

impl Frequencies {
    pub fn count(&self, a: u64, d: u64) -> u64 {
        self.counts[(a * (self.n + 1) + d) as usize]
    }

    /// Total variation distance to an exact joint pmf over the same grid.
    pub fn tv_distance(&self, j: &JointPmf) -> f64 {
        let tp = j.tp.to_f64();
        let tn = j.tn.to_f64();
        let mut sum = 0.0;
        for a in 0..=self.p {
            for d in 0..=self.n {
                let empirical = self.count(a, d) as f64 / self.draws as f64;
                sum += (empirical - tp[a as usize] * tn[d as usize]).abs();
            }
        }
        sum / 2.0
    }
}

/// Simulates the predictive model by sampling rates and then counts, with a
/// generator seeded from `seed` alone.
#[cfg(feature = "oracle")]
pub fn mc_oracle(
    model: Model,
    obs: &Observation,
    priors: &Priors,
    p: u64,
    n: u64,
    draws: u64,
    seed: u64,
) -> Result<Frequencies> {
    use rand::SeedableRng;
    use rand_distr::{Beta, Binomial, Distribution};

    check_grid(p, n)?;
    if draws == 0 {
        return Err(Error::InvalidArgument("draws must be at least 1".into()));
    }
    if model == Model::Binomial && (obs.p1() == 0 || obs.n1() == 0) {
        return Err(Error::EmpiricalRateUndefined { p1: obs.p1(), n1: obs.n1() });
    }
    let (tp_post, tn_post) = posterior_params(priors, obs);
    let shape = |b: &BetaPrior| -> Result<Beta<f64>> {
        Beta::new(to_f64(&b.u), to_f64(&b.v)).map_err(|e| Error::InvalidArgument(e.to_string()))
    };
    let (tp_beta, tn_beta) = (shape(&tp_post)?, shape(&tn_post)?);
    let tpr_hat = obs.a1 as f64 / obs.p1().max(1) as f64;
    let tnr_hat = obs.d1 as f64 / obs.n1().max(1) as f64;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; ((p + 1) * (n + 1)) as usize];
    let binomial = |trials: u64, theta: f64| {
        Binomial::new(trials, theta.clamp(0.0, 1.0)).map_err(|e| Error::InvalidArgument(e.to_string()))
    };
    for _ in 0..draws {
        let (theta_a, theta_d) = match model {
            Model::Binomial => (tpr_hat, tnr_hat),
            Model::BetaBinomial => (tp_beta.sample(&mut rng), tn_beta.sample(&mut rng)),
        };
        let a = binomial(p, theta_a)?.sample(&mut rng);
        let d = binomial(n, theta_d)?.sample(&mut rng);
        counts[(a * (n + 1) + d) as usize] += 1;
    }
    Ok(Frequencies { p, n, draws, counts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surd::ratio;

    #[test]
    fn binomial_values() {
        assert_eq!(binomial_pmf(1, 2, &ratio(1, 2)).unwrap(), ratio(1, 2));
        assert_eq!(binomial_pmf(26, 26, &int(1)).unwrap(), int(1));
        let expected = uint(4845) * num_traits::pow(ratio(4, 5), 16) * num_traits::pow(ratio(1, 5), 4);
        assert_eq!(binomial_pmf(16, 20, &ratio(4, 5)).unwrap(), expected);
        assert!((to_f64(&expected) - 0.2182).abs() < 1e-4);
        assert_eq!(binomial_pmf(3, 2, &ratio(1, 2)), Err(Error::CountExceedsTrials { count: 3, trials: 2 }));
    }

    #[test]
    fn beta_binomial_values() {
        for a in 0..=7 {
            assert_eq!(beta_binomial_pmf(a, 7, &int(1), &int(1)).unwrap(), ratio(1, 8));
        }
        assert_eq!(beta_binomial_pmf(26, 26, &int(27), &int(1)).unwrap(), ratio(27, 53));
        // (17)_20 / (22)_20 = (17·18·19·20·21)/(37·38·39·40·41)
        let expected = ratio(17 * 18 * 19 * 20 * 21, 37 * 38 * 39 * 40 * 41);
        assert_eq!(beta_binomial_pmf(20, 20, &int(17), &int(5)).unwrap(), expected);
        assert!(beta_binomial_pmf(1, 2, &int(0), &int(1)).is_err());
    }

    #[test]
    fn non_integer_shapes_normalise() {
        let pmf = beta_binomial_pmfs(9, &ratio(1, 2), &ratio(7, 3)).unwrap();
        assert_eq!(pmf.masses().into_iter().sum::<Rational>(), int(1));
    }

    #[test]
    fn posterior_shapes() {
        let obs = Observation::new(16, 8, 4, 32);
        let (tp, tn) = posterior_params(&Priors::default(), &obs);
        assert_eq!((tp.u, tp.v), (int(17), int(5)));
        assert_eq!((tn.u, tn.v), (int(33), int(9)));
        let prior = BetaPrior::new(int(2), int(3)).unwrap();
        let (tp, _) = posterior_params(&Priors::same(prior.clone()), &Observation::new(0, 0, 0, 0));
        assert_eq!(tp, prior);
    }

    #[test]
    fn joint_guards() {
        let obs = Observation::new(1, 0, 0, 0);
        assert_eq!(
            joint_predictive(Model::Binomial, &obs, &Priors::default(), 1, 0),
            Err(Error::EmpiricalRateUndefined { p1: 1, n1: 0 })
        );
        assert!(matches!(
            joint_predictive(Model::BetaBinomial, &obs, &Priors::default(), 2000, 1000),
            Err(Error::GridTooLarge { .. })
        ));
    }

    #[test]
    fn uniform_joint_from_no_data() {
        let j = joint_predictive(Model::BetaBinomial, &Observation::new(0, 0, 0, 0), &Priors::default(), 3, 4).unwrap();
        for (_, _, m) in j.cells() {
            assert_eq!(m, ratio(1, 20));
        }
        let (tpr, fpr) = marginals(&j);
        assert!(tpr.entries.iter().all(|(_, m)| *m == ratio(1, 4)));
        assert!(fpr.entries.iter().all(|(_, m)| *m == ratio(1, 5)));
    }

    #[cfg(feature = "oracle")]
    #[test]
    fn oracle_is_deterministic() {
        let obs = Observation::new(16, 8, 4, 32);
        let run = || mc_oracle(Model::BetaBinomial, &obs, &Priors::default(), 5, 5, 500, 7).unwrap();
        assert_eq!(run(), run());
        let certain = mc_oracle(Model::Binomial, &Observation::new(4, 1, 0, 3), &Priors::default(), 6, 2, 300, 1).unwrap();
        let at_p: u64 = (0..=2).map(|d| certain.count(6, d)).sum();
        assert_eq!(at_p, 300);
    }
}
