//! Ground truth for the closed forms: exact convolutions of the ternary step
//! variable, exhaustive enumeration of small-`n` error probabilities and
//! trees, and numeric Sanov minimizations on the 8-letter 3-chain alphabet.
//!
//! Letters of `{0,1}³` are indexed as `4·x₁ + 2·x₂ + x₃`, so `(0,0,1)` is
//! index 1 and `(0,1,0)` is index 2.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::learner::TiePolicy;
use crate::par;
use crate::tree::{check_q, check_theta, prufer_decode, zeta, TreeStructure};

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Law of `U ∈ {−1, 0, +1}`, the per-sample increment of `Â₁₃ − Â₁₂`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TrinomialSpec {
    pub q_minus: f64,
    pub q_zero: f64,
    pub q_plus: f64,
}

impl TrinomialSpec {
    pub fn new(q_minus: f64, q_zero: f64, q_plus: f64) -> Result<Self> {
        let all = [q_minus, q_zero, q_plus];
        if all.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return invalid(format!("trinomial masses must lie in [0,1]: {all:?}"));
        }
        if ((q_minus + q_zero + q_plus) - 1.0).abs() > 1e-12 {
            return invalid(format!("trinomial masses must sum to 1: {all:?}"));
        }
        if q_minus <= q_plus {
            return invalid("trinomial needs q_minus > q_plus (negative drift)");
        }
        Ok(TrinomialSpec { q_minus, q_zero, q_plus })
    }

    /// Clean samples: `Q(−1) = θ(1−θ)`, `Q(+1) = θ²`.
    pub fn noiseless(theta: f64) -> Result<Self> {
        check_theta(theta)?;
        let (m, p) = (theta * (1.0 - theta), theta * theta);
        Self::new(m, 1.0 - m - p, p)
    }

    /// BSC(q) samples: `Q(−1) = 2β₁`, `Q(+1) = 2β₂`, read off the exact
    /// letter probabilities rather than the closed forms.
    pub fn noisy(theta: f64, q: f64) -> Result<Self> {
        let l = noisy_letter_probs(theta, q)?;
        let m = l[0b001] + l[0b110];
        let p = l[0b010] + l[0b101];
        Self::new(m, 1.0 - m - p, p)
    }

    /// `E[e^{tU}]`.
    pub fn mgf(&self, t: f64) -> f64 {
        self.q_minus * (-t).exp() + self.q_zero + self.q_plus * t.exp()
    }
}

/// `P(ΣU ≥ 0)` and `P(ΣU = 0)` with their logs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TrinomialExact {
    pub p_tail: f64,
    pub p_point: f64,
    pub log_p_tail: f64,
    pub log_p_point: f64,
}

/// Largest `n` accepted by [`trinomial_exact`].
pub const TRINOMIAL_MAX_N: u64 = 100_000;

/// Exact law of `Σ₁ⁿ Uᵢ` by repeated three-tap convolution.
///
/// The convolution runs on the exponentially tilted step law
/// `Q(u)e^{τu}/φ(τ)`, which is centred on zero, and is undone exactly through
/// `P(S = s) = φ(τ)ⁿ e^{−τs} P̃(S = s)`. Tail masses far below the f64 range
/// therefore come out accurately in log space.
pub fn trinomial_exact(spec: &TrinomialSpec, n: u64) -> Result<TrinomialExact> {
    if n == 0 {
        return invalid("trinomial_exact needs n >= 1");
    }
    if n > TRINOMIAL_MAX_N {
        return Err(Error::Refused(format!("trinomial_exact supports n <= {TRINOMIAL_MAX_N}, got {n}")));
    }
    let tau = if spec.q_plus > 0.0 { 0.5 * (spec.q_minus / spec.q_plus).ln() } else { 0.0 };
    let phi = spec.mgf(tau);
    let (a, b, c) = (spec.q_minus * (-tau).exp() / phi, spec.q_zero / phi, spec.q_plus * tau.exp() / phi);
    let n = n as usize;
    // index k ↔ sum k − n
    let mut cur = vec![0.0f64; 2 * n + 1];
    let mut next = vec![0.0f64; 2 * n + 1];
    cur[n] = 1.0;
    for step in 0..n {
        let (lo, hi) = (n - step, n + step);
        next[lo - 1..=hi + 1].iter_mut().for_each(|v| *v = 0.0);
        for k in lo..=hi {
            let v = cur[k];
            next[k - 1] += a * v;
            next[k] += b * v;
            next[k + 1] += c * v;
        }
        std::mem::swap(&mut cur, &mut next);
    }
    let mut tail = KahanSum::default();
    for (s, v) in cur[n..].iter().enumerate() {
        tail.add(v * (-tau * s as f64).exp());
    }
    let (tail, point) = (tail.value(), cur[n]);
    if !(tail > 0.0 && point > 0.0) {
        return Err(Error::Precision("tilted tail or point mass underflowed".into()));
    }
    let log_phi_n = n as f64 * phi.ln();
    let (log_p_tail, log_p_point) = (log_phi_n + tail.ln(), log_phi_n + point.ln());
    Ok(TrinomialExact { p_tail: log_p_tail.exp(), p_point: log_p_point.exp(), log_p_tail, log_p_point })
}

/// Exponentially tilted law at the minimizer `τ` of the MGF.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TiltedSummary {
    pub tau: f64,
    pub phi_tau: f64,
    pub mu2: f64,
    pub mu3: f64,
    pub mu4: f64,
    /// `exp(−τ)`.
    pub z: f64,
}

/// Tilt point `e^τ = √(Q(−1)/Q(+1))` and the central moments of the tilted
/// variable, computed from its probability masses.
pub fn tilt_summary(spec: &TrinomialSpec) -> Result<TiltedSummary> {
    if spec.q_plus <= 0.0 {
        return invalid("tilt needs q_plus > 0");
    }
    let tau = 0.5 * (spec.q_minus / spec.q_plus).ln();
    let phi_tau = spec.mgf(tau);
    let masses = [
        (-1.0, spec.q_minus * (-tau).exp() / phi_tau),
        (0.0, spec.q_zero / phi_tau),
        (1.0, spec.q_plus * tau.exp() / phi_tau),
    ];
    let mean: f64 = masses.iter().map(|(u, w)| u * w).sum();
    let central = |k: i32| masses.iter().map(|(u, w)| w * (u - mean).powi(k)).sum::<f64>();
    Ok(TiltedSummary { tau, phi_tau, mu2: central(2), mu3: central(3), mu4: central(4), z: (-tau).exp() })
}

/// Clean 3-chain `1–2–3` with edge flip probabilities `theta1` (1–2) and
/// `theta3` (2–3).
pub fn chain_letter_probs(theta1: f64, theta3: f64) -> [f64; 8] {
    let mut out = [0.0; 8];
    for (l, slot) in out.iter_mut().enumerate() {
        let (x1, x2, x3) = (l >> 2 & 1, l >> 1 & 1, l & 1);
        let e12 = if x1 != x2 { theta1 } else { 1.0 - theta1 };
        let e23 = if x2 != x3 { theta3 } else { 1.0 - theta3 };
        *slot = 0.5 * e12 * e23;
    }
    out
}

/// Letter probabilities of the homogeneous 3-chain observed through BSC(q):
/// the full 8×8 channel mixture.
pub fn noisy_letter_probs(theta: f64, q: f64) -> Result<[f64; 8]> {
    check_theta(theta)?;
    check_q(q)?;
    let clean = chain_letter_probs(theta, theta);
    let mut out = [0.0; 8];
    for (y, slot) in out.iter_mut().enumerate() {
        let mut acc = KahanSum::default();
        for (x, px) in clean.iter().enumerate() {
            let flips = (x ^ y).count_ones() as i32;
            acc.add(px * q.powi(flips) * (1.0 - q).powi(3 - flips));
        }
        *slot = acc.value();
    }
    Ok(out)
}

/// `1[x₁=x₃] − 1[x₁=x₂]`: per-letter increment of `Â₁₃ − Â₁₂`.
fn g13_vs_12(l: usize) -> f64 {
    let (x1, x2, x3) = (l >> 2 & 1, l >> 1 & 1, l & 1);
    (x1 == x3) as i32 as f64 - (x1 == x2) as i32 as f64
}

/// `1[x₁=x₃] − 1[x₂=x₃]`.
fn g13_vs_23(l: usize) -> f64 {
    let (x1, x2, x3) = (l >> 2 & 1, l >> 1 & 1, l & 1);
    (x1 == x3) as i32 as f64 - (x2 == x3) as i32 as f64
}

/// `D(Q‖P)` in nats; letters with `Q = 0` contribute nothing.
pub fn kl_divergence(q: &[f64; 8], p: &[f64; 8]) -> f64 {
    let mut acc = KahanSum::default();
    for (qi, pi) in q.iter().zip(p) {
        if *qi > 0.0 {
            acc.add(qi * (qi / pi).ln());
        }
    }
    acc.value()
}

/// Result of a Sanov minimization: the optimizer and its divergence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SanovSolution {
    pub lambda: f64,
    pub q_star: [f64; 8],
    pub exponent: f64,
    /// `E_{Q*}[g]`, which is zero at the optimum.
    pub constraint_slack: f64,
}

/// Minimizes `D(Q‖P)` over `{E_Q[1[x₁=x₃] − 1[x₁=x₂]] ≥ 0}` for an arbitrary
/// letter law `P`, via the tilt `Q* ∝ P·e^{λg}` whose `λ` balances the
/// `g = ±1` letters.
pub fn sanov_solve(p: &[f64; 8]) -> Result<SanovSolution> {
    if p.iter().any(|v| v.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater)) {
        return invalid("Sanov oracle needs a strictly positive letter law");
    }
    let neg: f64 = (0..8).filter(|&l| g13_vs_12(l) < 0.0).map(|l| p[l]).sum();
    let pos: f64 = (0..8).filter(|&l| g13_vs_12(l) > 0.0).map(|l| p[l]).sum();
    if pos >= neg {
        return invalid("event is typical under P; exponent is zero");
    }
    let lambda = 0.5 * (neg / pos).ln();
    let mut q_star = [0.0; 8];
    for l in 0..8 {
        q_star[l] = p[l] * (lambda * g13_vs_12(l)).exp();
    }
    let z: f64 = q_star.iter().sum();
    q_star.iter_mut().for_each(|v| *v /= z);
    let constraint_slack = (q_star[0b010] + q_star[0b101]) - (q_star[0b001] + q_star[0b110]);
    Ok(SanovSolution { lambda, q_star, exponent: kl_divergence(&q_star, p), constraint_slack })
}

/// Numeric exponent of `P(Â₁₃ ≥ Â₁₂)` on the inhomogeneous clean 3-chain.
pub fn sanov_exponent_numeric(theta1: f64, theta3: f64) -> Result<f64> {
    check_theta(theta1)?;
    check_theta(theta3)?;
    Ok(sanov_solve(&chain_letter_probs(theta1, theta3))?.exponent)
}

/// Numeric exponent of `P(Â₁₃ ≥ Â₁₂)` under BSC(q) noise.
pub fn sanov_exponent_noisy(theta: f64, q: f64) -> Result<f64> {
    Ok(sanov_solve(&noisy_letter_probs(theta, q)?)?.exponent)
}

/// Exponent of `P({Â₁₃ ≥ Â₁₂} ∩ {Â₁₃ ≥ Â₂₃})` by minimizing the convex dual
/// `log E_P[e^{λ₁g₁ + λ₂g₂}]` over `λ ∈ [0, 4]²`: a 0.01 grid followed by
/// two ten-fold refinements to resolution 1e-4.
pub fn joint_exponent_numeric(theta: f64) -> Result<f64> {
    check_theta(theta)?;
    let p = chain_letter_probs(theta, theta);
    let g: Vec<(f64, f64, f64)> = (0..8).map(|l| (p[l], g13_vs_12(l), g13_vs_23(l))).collect();
    let log_mgf = |a: f64, b: f64| g.iter().map(|(w, g1, g2)| w * (a * g1 + b * g2).exp()).sum::<f64>().ln();

    let (mut best, mut best_val) = ((0.0, 0.0), log_mgf(0.0, 0.0));
    let (mut center, mut half, mut step): ((f64, f64), f64, f64) = ((2.0, 2.0), 2.0, 0.01);
    for _ in 0..3 {
        let k = (2.0 * half / step).round() as i64;
        for i in 0..=k {
            for j in 0..=k {
                let a = (center.0 - half + i as f64 * step).max(0.0);
                let b = (center.1 - half + j as f64 * step).max(0.0);
                let v = log_mgf(a, b);
                if v < best_val {
                    best_val = v;
                    best = (a, b);
                }
            }
        }
        center = best;
        half = step;
        step /= 10.0;
    }
    Ok(-best_val)
}

/// Largest `n` accepted by [`exact_error_p3`].
pub const EXACT_P3_MAX_N: u64 = 20;

/// Error probability of the learner given one sample's agreement counts
/// on the 3-chain `1–2–3`, whose only non-edge is `{1,3}`.
fn conditional_error(a12: u32, a13: u32, a23: u32, policy: TiePolicy) -> f64 {
    let m = a12.min(a13).min(a23);
    let in_min = [a12 == m, a13 == m, a23 == m];
    let ties = in_min.iter().filter(|&&b| b).count();
    match policy {
        TiePolicy::Conservative => (a13 >= a12.min(a23)) as u8 as f64,
        TiePolicy::Lexicographic => {
            // the last edge in (1,2) < (1,3) < (2,3) order among the minimum is dropped
            let dropped = (0..3).rev().find(|&k| in_min[k]).unwrap();
            (dropped != 1) as u8 as f64
        }
        TiePolicy::RandomTieBreak => {
            if !in_min[1] {
                1.0
            } else {
                match ties {
                    1 => 0.0,
                    2 => 0.5,
                    _ => 2.0 / 3.0,
                }
            }
        }
    }
}

/// Exact error probability of the agreement-weight learner on the
/// homogeneous 3-chain, by summing the multinomial law over all
/// compositions of `n` into the eight letter counts.
pub fn exact_error_p3(theta: f64, q: f64, n: u64, policy: TiePolicy) -> Result<f64> {
    if n > EXACT_P3_MAX_N {
        return Err(Error::Refused(format!("exact_error_p3 enumerates n <= {EXACT_P3_MAX_N}, got {n}")));
    }
    if n == 0 {
        return invalid("exact_error_p3 needs n >= 1");
    }
    let probs = noisy_letter_probs(theta, q)?;
    let log_p: Vec<f64> = probs.iter().map(|v| v.ln()).collect();
    let n = n as u32;
    let log_fact: Vec<f64> = (0..=n).scan(0.0, |acc, k| {
        if k > 0 {
            *acc += (k as f64).ln();
        }
        Some(*acc)
    }).collect();
    let agree: Vec<[u32; 3]> = (0..8)
        .map(|l: usize| {
            let (x1, x2, x3) = (l >> 2 & 1, l >> 1 & 1, l & 1);
            [(x1 == x2) as u32, (x1 == x3) as u32, (x2 == x3) as u32]
        })
        .collect();

    struct Walk<'a> {
        log_p: &'a [f64],
        log_fact: &'a [f64],
        agree: &'a [[u32; 3]],
        policy: TiePolicy,
        acc: KahanSum,
    }
    impl Walk<'_> {
        fn go(&mut self, letter: usize, left: u32, log_w: f64, a: [u32; 3]) {
            if letter == 7 {
                let k = left;
                let lw = log_w + k as f64 * self.log_p[7] - self.log_fact[k as usize];
                let ag = self.agree[7];
                let a = [a[0] + k * ag[0], a[1] + k * ag[1], a[2] + k * ag[2]];
                let e = conditional_error(a[0], a[1], a[2], self.policy);
                if e > 0.0 {
                    self.acc.add(e * lw.exp());
                }
                return;
            }
            let ag = self.agree[letter];
            for k in 0..=left {
                let lw = log_w + k as f64 * self.log_p[letter] - self.log_fact[k as usize];
                self.go(letter + 1, left - k, lw, [a[0] + k * ag[0], a[1] + k * ag[1], a[2] + k * ag[2]]);
            }
        }
    }

    // split on the count of letter 000; each slice is summed serially and the
    // slices are combined in index order
    let firsts: Vec<u32> = (0..=n).collect();
    let parts = par::map_ordered(&firsts, |&k0| {
        let mut w = Walk { log_p: &log_p, log_fact: &log_fact, agree: &agree, policy, acc: KahanSum::default() };
        let lw = log_fact[n as usize] + k0 as f64 * log_p[0] - log_fact[k0 as usize];
        let ag = agree[0];
        w.go(1, n - k0, lw, [k0 * ag[0], k0 * ag[1], k0 * ag[2]]);
        w.acc
    });
    let mut total = KahanSum::default();
    for part in parts {
        total.add(part.value());
    }
    Ok(total.value())
}

/// Counts vertex triples `{i,j,k}` in which two of the three pairs are tree
/// edges, by scanning every triple.
pub fn zeta_subtree_count(t: &TreeStructure) -> u64 {
    let p = t.p();
    let mut count = 0;
    for i in 0..p {
        for j in i + 1..p {
            for k in j + 1..p {
                let e = t.has_edge(i, j) as u8 + t.has_edge(i, k) as u8 + t.has_edge(j, k) as u8;
                count += (e == 2) as u64;
            }
        }
    }
    count
}

/// Census of ζ over every labelled tree on `p` vertices.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtremalCensus {
    pub p: usize,
    pub trees: u64,
    pub zeta_max: u64,
    pub zeta_min: u64,
    /// Trees attaining the maximum / minimum.
    pub argmax: u64,
    pub argmin: u64,
    /// Whether every maximizer is a star and every minimizer a chain.
    pub maximizers_are_stars: bool,
    pub minimizers_are_chains: bool,
}

/// Enumerates all `p^(p−2)` labelled trees through their Prüfer sequences.
pub fn extremal_census(p: usize) -> Result<ExtremalCensus> {
    if !(4..=8).contains(&p) {
        return Err(Error::Refused(format!("extremal enumeration supports 4 <= p <= 8, got {p}")));
    }
    let tail_len = p - 3;
    let tail_count = (p as u64).pow(tail_len as u32);
    let heads: Vec<usize> = (0..p).collect();
    // per head digit: (zeta, max degree) of each tree, in sequence order
    let parts = par::map_ordered(&heads, |&h| {
        let mut seq = vec![0usize; p - 2];
        seq[0] = h;
        (0..tail_count)
            .map(|mut code| {
                for slot in seq[1..].iter_mut() {
                    *slot = (code % p as u64) as usize;
                    code /= p as u64;
                }
                let t = prufer_decode(p, &seq).expect("Prüfer sequence in range");
                (zeta(&t), t.max_degree())
            })
            .collect::<Vec<_>>()
    });
    let all: Vec<(u64, usize)> = parts.into_iter().flatten().collect();
    let zeta_max = all.iter().map(|r| r.0).max().unwrap();
    let zeta_min = all.iter().map(|r| r.0).min().unwrap();
    let maxers: Vec<_> = all.iter().filter(|r| r.0 == zeta_max).collect();
    let miners: Vec<_> = all.iter().filter(|r| r.0 == zeta_min).collect();
    Ok(ExtremalCensus {
        p,
        trees: all.len() as u64,
        zeta_max,
        zeta_min,
        argmax: maxers.len() as u64,
        argmin: miners.len() as u64,
        maximizers_are_stars: maxers.iter().all(|r| r.1 == p - 1),
        minimizers_are_chains: miners.iter().all(|r| r.1 <= 2),
    })
}

/// True iff ζ is maximized exactly by the `p` labelled stars and minimized
/// exactly by the `p!/2` labelled chains.
pub fn extremal_check(p: usize) -> Result<bool> {
    let c = extremal_census(p)?;
    let chains = (1..=p as u64).product::<u64>() / 2;
    Ok(c.maximizers_are_stars
        && c.minimizers_are_chains
        && c.argmax == p as u64
        && c.argmin == chains
        && c.zeta_max == ((p - 1) * (p - 2) / 2) as u64
        && c.zeta_min == (p - 2) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::{beta1, beta2, joint_exponent, k_p, k_q, lemma2_exponent, prefactors, theta_grid};
    use crate::tree::{make_chain, make_star, random_tree};

    #[test]
    fn trinomial_small_n() {
        let s = TrinomialSpec::noiseless(0.1).unwrap();
        let r1 = trinomial_exact(&s, 1).unwrap();
        assert!((r1.p_tail - 0.91).abs() < 1e-15);
        assert!((r1.p_point - 0.90).abs() < 1e-15);
        let r2 = trinomial_exact(&s, 2).unwrap();
        assert!((r2.p_tail - 0.8299).abs() < 1e-15);
        // 0.9² + 2·0.09·0.01
        assert!((r2.p_point - 0.8118).abs() < 1e-15);
    }

    #[test]
    fn trinomial_monotone_and_converges() {
        let s = TrinomialSpec::noiseless(0.4).unwrap();
        let mut last = trinomial_exact(&s, 1).unwrap();
        for n in 2..60 {
            let r = trinomial_exact(&s, n).unwrap();
            assert!(r.p_point <= r.p_tail);
            assert!(r.p_tail < last.p_tail && r.p_point < last.p_point);
            last = r;
        }
        // −(1/n)·log P(ΣU ≥ 0) approaches K from above
        let k = k_p(0.4).unwrap();
        let gap = |n: u64| -trinomial_exact(&s, n).unwrap().log_p_tail / n as f64 - k;
        let (g1, g2, g3) = (gap(1000), gap(4000), gap(16_000));
        assert!(g1 > g2 && g2 > g3 && g3 > 0.0 && g3 < 0.05 * k);
    }

    #[test]
    fn trinomial_refusals() {
        let s = TrinomialSpec::noiseless(0.2).unwrap();
        assert!(matches!(trinomial_exact(&s, TRINOMIAL_MAX_N + 1), Err(Error::Refused(_))));
        assert!(trinomial_exact(&s, 0).is_err());
        assert!(TrinomialSpec::new(0.1, 0.8, 0.1).is_err());
        assert!(TrinomialSpec::new(0.2, 0.7, 0.2).is_err());
        // far-tail values below f64 range survive in log space
        let steep = TrinomialSpec::new(0.9, 0.09, 0.01).unwrap();
        let r = trinomial_exact(&steep, 1000).unwrap();
        let k = -tilt_summary(&steep).unwrap().phi_tau.ln();
        assert!(r.p_tail == 0.0 && r.log_p_tail.is_finite());
        assert!((r.log_p_tail / 1000.0 + k).abs() < 0.01 * k);
    }

    #[test]
    fn prefactors_track_exact() {
        let s = TrinomialSpec::noiseless(0.4).unwrap();
        let r = trinomial_exact(&s, 2000).unwrap();
        let pf = prefactors(0.4, 2000).unwrap();
        assert!((pf.f / r.p_tail - 1.0).abs() < 0.02);
        assert!((pf.f_tilde / r.p_point - 1.0).abs() < 0.02);
    }

    #[test]
    fn tilt_identities() {
        for t in theta_grid() {
            let s = tilt_summary(&TrinomialSpec::noiseless(t).unwrap()).unwrap();
            assert!((s.phi_tau - (-k_p(t).unwrap()).exp()).abs() < 1e-12);
            assert!(s.mu3.abs() < 1e-15);
            assert!((s.mu4 - s.mu2).abs() < 1e-15);
            assert!((s.z - (t / (1.0 - t)).sqrt()).abs() < 1e-14);
            let spec = TrinomialSpec::noiseless(t).unwrap();
            for k in -20..=20 {
                assert!(s.phi_tau <= spec.mgf(s.tau + 0.05 * k as f64) + 1e-16);
            }
        }
        let s = tilt_summary(&TrinomialSpec::noisy(0.3, 0.05).unwrap()).unwrap();
        assert!((s.phi_tau - (-k_q(0.3, 0.05).unwrap()).exp()).abs() < 1e-12);
        let z = (beta2(0.3, 0.05).unwrap() / beta1(0.3, 0.05).unwrap()).sqrt();
        assert!((s.z - z).abs() < 1e-14);
    }

    #[test]
    fn sanov_matches_closed_forms() {
        assert!((sanov_exponent_numeric(0.1, 0.1).unwrap() - lemma2_exponent(0.1, 0.1).unwrap()).abs() < 1e-9);
        assert!((sanov_exponent_numeric(0.3, 0.18).unwrap() - lemma2_exponent(0.3, 0.18).unwrap()).abs() < 1e-9);
        let sol = sanov_solve(&chain_letter_probs(0.1, 0.1)).unwrap();
        assert!(sol.constraint_slack.abs() < 1e-12);
        assert!((sanov_exponent_noisy(0.1, 0.1).unwrap() - k_q(0.1, 0.1).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn joint_exponent_oracle() {
        for t in [0.05, 0.1, 0.2, 0.3, 0.4] {
            let numeric = joint_exponent_numeric(t).unwrap();
            assert!((numeric - joint_exponent(t).unwrap()).abs() < 1e-6, "θ={t}");
        }
    }

    #[test]
    fn noisy_letters() {
        let clean = chain_letter_probs(0.2, 0.2);
        let same = noisy_letter_probs(0.2, 0.0).unwrap();
        assert_eq!(clean, same);
        let l = noisy_letter_probs(0.1, 0.1).unwrap();
        assert!((l.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!((l[0b001] - beta1(0.1, 0.1).unwrap()).abs() < 1e-15);
        assert!((l[0b010] - beta2(0.1, 0.1).unwrap()).abs() < 1e-15);
        assert!((l[0b001] - 0.0738).abs() < 1e-15);
    }

    #[test]
    fn exact_error_single_sample() {
        // patterns 000/111 tie three ways, 001/110 and 100/011 tie two ways
        // with {1,3} included, 010/101 drop a true edge
        for t in [0.05, 0.1, 0.3, 0.45] {
            let expect = 2.0 / 3.0 * (1.0 - t) * (1.0 - t) + t * (1.0 - t) + t * t;
            let got = exact_error_p3(t, 0.0, 1, TiePolicy::RandomTieBreak).unwrap();
            assert!((got - expect).abs() < 1e-15, "θ={t}");
            assert!((exact_error_p3(t, 0.0, 1, TiePolicy::Conservative).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn exact_error_policies_ordered() {
        for t in [0.1, 0.3] {
            for n in 1..=8 {
                let r = exact_error_p3(t, 0.0, n, TiePolicy::RandomTieBreak).unwrap();
                let c = exact_error_p3(t, 0.0, n, TiePolicy::Conservative).unwrap();
                assert!(c >= r && (0.0..=1.0).contains(&r));
            }
        }
        assert!(matches!(exact_error_p3(0.1, 0.0, 21, TiePolicy::RandomTieBreak), Err(Error::Refused(_))));
    }

    #[test]
    fn exact_error_is_a_probability_sum() {
        // with a policy that always errs the enumeration must return total mass 1
        let probs = noisy_letter_probs(0.3, 0.05).unwrap();
        let total: f64 = probs.iter().sum();
        assert!((total - 1.0).abs() < 1e-15);
        let c = exact_error_p3(0.3, 0.05, 12, TiePolicy::Conservative).unwrap();
        let r = exact_error_p3(0.3, 0.05, 12, TiePolicy::RandomTieBreak).unwrap();
        assert!(c <= 1.0 + 1e-12 && r > 0.0);
    }

    #[test]
    fn subtree_count() {
        assert_eq!(zeta_subtree_count(&make_star(10).unwrap()), 36);
        assert_eq!(zeta_subtree_count(&make_chain(10).unwrap()), 8);
        assert_eq!(zeta_subtree_count(&make_chain(2).unwrap()), 0);
        for seed in 0..50 {
            let t = random_tree(3 + (seed as usize % 28), seed).unwrap();
            assert_eq!(zeta_subtree_count(&t), zeta(&t));
        }
    }

    #[test]
    fn extremal() {
        let c = extremal_census(4).unwrap();
        assert_eq!(c.trees, 16);
        assert!(extremal_check(4).unwrap());
        assert!(extremal_check(5).unwrap());
        assert!(matches!(extremal_check(3), Err(Error::Refused(_))));
        assert!(extremal_check(9).is_err());
        // at p = 3 the only shape is the path, which is also the star
        assert_eq!(make_star(3).unwrap().max_degree(), make_chain(3).unwrap().max_degree());
    }
}
