//! Derived constants for one estimator run.
//!
//! Every size and threshold the estimator uses is computed here from
//! `(n, k, m̄, C̄_k, ε, δ)` so that a report can echo the full set.
//!
//! Derivations, with `ε̄ = ε/5`, `δ̄ = δ/4` and `m̄`, `C̄_k` satisfying
//! `m̄ ∈ [(1-ε)m, m]`, `C̄_k ∈ [C_k/4, C_k]`:
//!
//! * `θ = 2√m̄` is the high-degree threshold. With `m(T) ≤ (t/n)·4m̄` and
//!   `d(y) > θ` the high-degree acceptance probability
//!   `m(T) / (d(y)·(t/n)·θ)` is at most `4m̄ / θ² = 1`.
//! * `τ_c = 32·k·C̄^{1-1/k} / ε̄^{1/k}` and `τ_d = 4·m̄ / (ε̄·C̄)^{1/k}` make
//!   both counting bounds `k·C_k / (τ_c/4) ≤ (ε̄C_k)^{1/k}/2` and
//!   `m / τ_d ≤ (ε̄C_k)^{1/k}/2` hold: the first reduces to
//!   `(C_k/C̄)^{1-1/k} ≤ 4`, the second to `(m/m̄)·(C̄/C_k)^{1/k} ≤ 2`.
//!   So at most `(ε̄C_k)^{1/k}` vertices are not unpopular and they span at
//!   most `ε̄·C_k` cliques.
//! * `r(u) = ⌈12·d(u)·θ^{k-2}·ln(2n/δ̄) / ((k-2)!·τ_c·ε̄²)⌉`. For
//!   `c_k(u) ≥ τ_c` the lower-tail exponent `ε̄²·E[χ]·r/3` is at least
//!   `4(1-ε̄)·ln(2n/δ̄)`; for `c_k(u) ≤ τ_c/4` the upper-tail exponent
//!   `E'·r/12` is at least `(1+ε̄)·ln(2n/δ̄)/(4ε̄²)`. Both exceed `ln(n/δ̄)`.
//! * `s = min(n, ⌈128·k·n·ln(2/δ̄) / (ε̄^{2+1/k}·C̄^{1/k})⌉)`. Since
//!   `α(u) ≤ τ_c` the Chernoff exponent `ε̄²·(α(V)/n)·s / (3τ_c)` is at least
//!   `(1-ε̄)·(128/96)·ln(2/δ̄) > ln(2/δ̄)`.
//! * `q = ⌈10·ln(2/δ̄)·m(S)·θ^{k-2} / (ε̄²·(1-ε̄)³·(k-2)!·C̄·(s/n))⌉`, so the
//!   exponent `ε̄²·E[χ]·q/3` is at least `(10/3)·(C_k/C̄)·ln(2/δ̄)`.
//! * `γ = min(m̄^{-k/2}, δ̄)` and
//!   `t = min(n, ⌈3·(k/ε̄)²·(n/√m̄)·ln(4n/γ²)⌉)`. For a high-degree `w`,
//!   `E[d_T(w)] = (t/n)·d(w) ≥ (t/n)·2√m̄`, so the two-sided exponent
//!   `(ε̄/k)²·E[d_T(w)]/3` is at least `2·ln(4n/γ²)` and each vertex fails
//!   with probability below `γ²/(2n)`. `⌈log₂(2/γ)⌉` independent draws
//!   bring the Markov failure of the `m(T)` test under `γ/2`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ParamError {
    #[error("k must be at least 3 (got {0})")]
    CliqueSize(usize),
    #[error("epsilon must be in (0,1)")]
    Epsilon,
    #[error("delta must be in (0,1)")]
    Delta,
    #[error("edge estimate must be at least 1 (got {0})")]
    EdgeEstimate(f64),
    #[error("clique-count guess must be at least 1 (got {0})")]
    CliqueGuess(f64),
    #[error("clique-count guess {guess} exceeds m̄^(k/2) = {limit}")]
    GuessTooLarge { guess: f64, limit: f64 },
    #[error("graph has no vertices")]
    NoVertices,
    #[error("constant {0} must be positive and finite")]
    Constant(&'static str),
}

/// Multiplicative constants in the sample sizes. The defaults carry the
/// inequalities listed in the module docs with slack.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub s_const: f64,
    pub q_const: f64,
    pub t_const: f64,
    pub tau_c_const: f64,
    pub tau_d_const: f64,
    pub r_const: f64,
    /// Use the exact-distribution batch simulator for fully cached runs.
    pub accelerate: bool,
}

impl Default for Constants {
    fn default() -> Self {
        Self {
            s_const: 128.0,
            q_const: 10.0,
            t_const: 3.0,
            tau_c_const: 32.0,
            tau_d_const: 4.0,
            r_const: 12.0,
            accelerate: true,
        }
    }
}

impl Constants {
    fn validate(&self) -> Result<(), ParamError> {
        let named = [
            ("s_const", self.s_const),
            ("q_const", self.q_const),
            ("t_const", self.t_const),
            ("tau_c_const", self.tau_c_const),
            ("tau_d_const", self.tau_d_const),
            ("r_const", self.r_const),
        ];
        for (name, value) in named {
            if !(value.is_finite() && value > 0.0) {
                return Err(ParamError::Constant(name));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub n: usize,
    pub k: usize,
    pub m_bar: f64,
    pub ck_bar: f64,
    pub eps: f64,
    pub eps_bar: f64,
    pub delta: f64,
    pub delta_bar: f64,
    /// High-degree threshold `2√m̄`.
    pub theta: f64,
    /// Clique-count popularity threshold.
    pub tau_c: f64,
    /// Degree popularity threshold.
    pub tau_d: f64,
    pub s: usize,
    pub t: usize,
    pub gamma: f64,
    pub typical_attempts: usize,
    pub seed: u64,
    pub constants: Constants,
}

impl Params {
    pub fn derive(
        n: usize,
        k: usize,
        m_bar: f64,
        ck_bar: f64,
        eps: f64,
        delta: f64,
        seed: u64,
    ) -> Result<Self, ParamError> {
        Self::derive_with(n, k, m_bar, ck_bar, eps, delta, seed, Constants::default())
    }

    #[allow(clippy::too_many_arguments)]
    pub fn derive_with(
        n: usize,
        k: usize,
        m_bar: f64,
        ck_bar: f64,
        eps: f64,
        delta: f64,
        seed: u64,
        constants: Constants,
    ) -> Result<Self, ParamError> {
        if k < 3 {
            return Err(ParamError::CliqueSize(k));
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(ParamError::Epsilon);
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(ParamError::Delta);
        }
        if !(m_bar >= 1.0 && m_bar.is_finite()) {
            return Err(ParamError::EdgeEstimate(m_bar));
        }
        if !(ck_bar >= 1.0 && ck_bar.is_finite()) {
            return Err(ParamError::CliqueGuess(ck_bar));
        }
        let kf = k as f64;
        let limit = m_bar.powf(kf / 2.0);
        if ck_bar > limit {
            return Err(ParamError::GuessTooLarge {
                guess: ck_bar,
                limit,
            });
        }
        if n == 0 {
            return Err(ParamError::NoVertices);
        }
        constants.validate()?;

        let nf = n as f64;
        let eps_bar = eps / 5.0;
        let delta_bar = delta / 4.0;
        let theta = 2.0 * m_bar.sqrt();
        let tau_c =
            constants.tau_c_const * kf * ck_bar.powf(1.0 - 1.0 / kf) / eps_bar.powf(1.0 / kf);
        let tau_d = constants.tau_d_const * m_bar / (eps_bar * ck_bar).powf(1.0 / kf);

        let s_raw = constants.s_const * kf * nf * (2.0 / delta_bar).ln()
            / (eps_bar.powf(2.0 + 1.0 / kf) * ck_bar.powf(1.0 / kf));
        let s = clamp_size(s_raw, n);

        let gamma = m_bar.powf(-kf / 2.0).min(delta_bar);
        let t_raw = constants.t_const * (kf / eps_bar).powi(2) * (nf / m_bar.sqrt())
            * (4.0 * nf / (gamma * gamma)).ln();
        let t = clamp_size(t_raw, n);
        let typical_attempts = ((2.0 / gamma).log2().ceil() as usize).max(1);

        Ok(Self {
            n,
            k,
            m_bar,
            ck_bar,
            eps,
            eps_bar,
            delta,
            delta_bar,
            theta,
            tau_c,
            tau_d,
            s,
            t,
            gamma,
            typical_attempts,
            seed,
            constants,
        })
    }

    /// `(k-2)!`
    pub fn tuple_multiplicity(&self) -> f64 {
        factorial(self.k - 2)
    }

    /// `θ^{k-2}`
    pub fn theta_power(&self) -> f64 {
        self.theta.powi(self.k as i32 - 2)
    }

    /// Number of clique-sampling calls for a sample `S` with `m(S) = m_s`
    /// and `|S| = s`.
    pub fn q_for(&self, m_s: u64, s: usize) -> u64 {
        if m_s == 0 {
            return 0;
        }
        let e = self.eps_bar;
        let raw = self.constants.q_const * (2.0 / self.delta_bar).ln() * m_s as f64
            * self.theta_power()
            / (e * e * (1.0 - e).powi(3)
                * self.tuple_multiplicity()
                * self.ck_bar
                * (s as f64 / self.n as f64));
        ceil_count(raw)
    }

    /// Number of clique-sampling calls when testing popularity of a vertex
    /// of degree `d`.
    pub fn r_for(&self, d: usize) -> u64 {
        if d == 0 {
            return 0;
        }
        let e = self.eps_bar;
        let raw = self.constants.r_const
            * d as f64
            * self.theta_power()
            * (2.0 * self.n as f64 / self.delta_bar).ln()
            / (self.tuple_multiplicity() * self.tau_c * e * e);
        ceil_count(raw)
    }

    /// `m(T)` acceptance bound `(t/n)·4m̄` for a multiset of size `t`.
    pub fn typical_edge_bound(&self, t: usize) -> f64 {
        t as f64 / self.n as f64 * 4.0 * self.m_bar
    }

    /// Below this ε the estimator falls back to exact enumeration.
    pub fn eps_floor(&self) -> f64 {
        self.m_bar.powf(-(self.k as f64) / 2.0)
    }
}

pub fn factorial(x: usize) -> f64 {
    (1..=x).map(|i| i as f64).product()
}

fn clamp_size(raw: f64, n: usize) -> usize {
    if !raw.is_finite() || raw >= n as f64 {
        n
    } else {
        (raw.ceil() as usize).max(1)
    }
}

fn ceil_count(raw: f64) -> u64 {
    if !raw.is_finite() || raw >= u64::MAX as f64 {
        u64::MAX
    } else {
        raw.ceil().max(1.0) as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eps_bar_and_delta_bar() {
        let p = Params::derive(100, 3, 100.0, 2.0, 0.5, 0.2, 0).unwrap();
        assert_eq!(p.eps_bar, 0.1);
        assert_eq!(p.delta_bar, 0.05);
        assert_eq!(p.theta, 20.0);
    }

    #[test]
    fn sample_sizes_clamp_to_n() {
        let p = Params::derive(50, 3, 100.0, 10.0, 0.5, 0.1, 0).unwrap();
        assert_eq!(p.s, 50);
        assert_eq!(p.t, 50);
    }

    #[test]
    fn s_shrinks_below_n_for_large_graphs() {
        // Big n, generous guess: s = 128·3·n·ln(80)/(0.1^{7/3}·C̄^{1/3}).
        let n = 1_000_000_000usize;
        let ck = 1e18;
        let p = Params::derive(n, 3, 1e12, ck, 0.5, 0.1, 0).unwrap();
        let expected = (128.0 * 3.0 * n as f64 * 80f64.ln()
            / (0.1f64.powf(7.0 / 3.0) * ck.powf(1.0 / 3.0)))
        .ceil() as usize;
        assert_eq!(p.s, expected);
        assert!(p.s < n);
    }

    #[test]
    fn guess_above_m_bar_power_is_rejected() {
        let err = Params::derive(10, 3, 4.0, 9.0, 0.5, 0.1, 0).unwrap_err();
        assert!(matches!(err, ParamError::GuessTooLarge { .. }));
        assert!(Params::derive(10, 3, 4.0, 8.0, 0.5, 0.1, 0).is_ok());
    }

    #[test]
    fn validation_messages() {
        assert_eq!(
            Params::derive(10, 3, 4.0, 1.0, 1.5, 0.1, 0).unwrap_err().to_string(),
            "epsilon must be in (0,1)"
        );
        assert_eq!(
            Params::derive(10, 2, 4.0, 1.0, 0.5, 0.1, 0).unwrap_err(),
            ParamError::CliqueSize(2)
        );
        assert!(Params::derive(10, 3, 4.0, 1.0, 0.5, 0.0, 0).is_err());
        assert!(Params::derive(10, 3, 0.5, 1.0, 0.5, 0.1, 0).is_err());
        assert!(Params::derive(10, 3, 4.0, 0.5, 0.5, 0.1, 0).is_err());
        let bad = Constants {
            q_const: 0.0,
            ..Constants::default()
        };
        assert_eq!(
            Params::derive_with(10, 3, 4.0, 1.0, 0.5, 0.1, 0, bad).unwrap_err(),
            ParamError::Constant("q_const")
        );
    }

    #[test]
    fn thresholds_match_closed_forms() {
        let p = Params::derive(2000, 4, 3600.0, 35.0, 0.5, 0.1, 0).unwrap();
        let e: f64 = 0.1;
        assert!((p.tau_c - 32.0 * 4.0 * 35f64.powf(0.75) / e.powf(0.25)).abs() < 1e-9);
        assert!((p.tau_d - 4.0 * 3600.0 / (e * 35.0).powf(0.25)).abs() < 1e-9);
        assert!((p.gamma - 3600f64.powi(-2)).abs() < 1e-18);
        assert_eq!(p.typical_attempts, (2.0 / p.gamma).log2().ceil() as usize);
        assert_eq!(p.tuple_multiplicity(), 2.0);
        assert!((p.theta_power() - 4.0 * 3600.0).abs() < 1e-9);
    }

    #[test]
    fn counting_bounds_hold_at_the_extremes() {
        // C_k = 4·C̄ and m = m̄/(1-ε) are the worst cases allowed.
        for k in 3..=6 {
            for &ck_bar in &[1.0, 37.0, 1e6] {
                let eps = 0.5;
                let p = Params::derive(10_000, k, 5e4, ck_bar, eps, 0.1, 0).unwrap();
                let ck = 4.0 * ck_bar;
                let m = p.m_bar / (1.0 - eps);
                let kf = k as f64;
                let budget = (p.eps_bar * ck).powf(1.0 / kf) / 2.0;
                assert!(kf * ck / (p.tau_c / 4.0) <= budget * (1.0 + 1e-12));
                // the degree bound needs C̄ ≤ C_k
                let budget_low = (p.eps_bar * ck_bar).powf(1.0 / kf) / 2.0;
                assert!(m / p.tau_d <= budget_low * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn q_and_r_formulas() {
        let p = Params::derive(100, 3, 400.0, 5.0, 0.5, 0.1, 0).unwrap();
        assert_eq!(p.q_for(0, 100), 0);
        let e: f64 = 0.1;
        let q = 10.0 * (2.0 / 0.025f64).ln() * 400.0 * 40.0
            / (e * e * 0.9f64.powi(3) * 1.0 * 5.0 * 1.0);
        assert_eq!(p.q_for(400, 100), q.ceil() as u64);
        let r = 12.0 * 7.0 * 40.0 * (200.0 / 0.025f64).ln() / (p.tau_c * e * e);
        assert_eq!(p.r_for(7), r.ceil() as u64);
        assert_eq!(p.r_for(0), 0);
    }
}
