//! Seeded simulators used by tests, the acceptance suite and demo fixtures.

use std::collections::BTreeMap;

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::records::{ExpertRecord, PriceSeries, ProbTriple, SentimentLabel};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normals(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(r)).collect()
}

pub fn white_noise(n: usize, seed: u64) -> Vec<f64> {
    normals(&mut rng(seed), n)
}

/// Cumulative sum of standard normal steps, starting at the first step.
pub fn random_walk(n: usize, seed: u64) -> Vec<f64> {
    drifting_walk(n, 0.0, seed)
}

/// Cumulative sum of `drift + ε` steps.
pub fn drifting_walk(n: usize, drift: f64, seed: u64) -> Vec<f64> {
    let mut level = 0.0;
    white_noise(n, seed)
        .into_iter()
        .map(|e| {
            level += drift + e;
            level
        })
        .collect()
}

const BURN_IN: usize = 500;

/// GARCH(1,1) returns with zero mean; the first 500 draws are discarded.
pub fn simulate_garch11(n: usize, omega: f64, alpha: f64, beta: f64, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    let mut s2 = omega / (1.0 - alpha - beta);
    let mut prev = 0.0;
    let mut out = Vec::with_capacity(n);
    for t in 0..n + BURN_IN {
        if t > 0 {
            s2 = omega + alpha * prev * prev + beta * s2;
        }
        let z: f64 = StandardNormal.sample(&mut r);
        prev = s2.sqrt() * z;
        if t >= BURN_IN {
            out.push(prev);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DccSimSpec {
    /// `(ω, α, β)` for each marginal.
    pub garch: [(f64, f64, f64); 2],
    pub alpha: f64,
    pub beta: f64,
    /// Unconditional correlation of the standardized innovations.
    pub rho_bar: f64,
}

impl Default for DccSimSpec {
    fn default() -> Self {
        DccSimSpec {
            garch: [(0.05, 0.05, 0.90), (0.05, 0.08, 0.85)],
            alpha: 0.03,
            beta: 0.95,
            rho_bar: 0.4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DccSim {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// The correlation actually used to draw each pair.
    pub rho: Vec<f64>,
}

/// Exact DCC(1,1) recursion with GARCH(1,1) marginals and Gaussian innovations.
pub fn simulate_dcc(n: usize, spec: &DccSimSpec, seed: u64) -> DccSim {
    let mut r = rng(seed);
    let s_bar = [1.0, spec.rho_bar, 1.0];
    let w = 1.0 - spec.alpha - spec.beta;
    let mut q = s_bar;
    let mut z_prev = [0.0, 0.0];
    let mut h = spec.garch.map(|(o, a, b)| o / (1.0 - a - b));
    let mut e_prev = [0.0, 0.0];
    let mut sim = DccSim {
        x: Vec::with_capacity(n),
        y: Vec::with_capacity(n),
        rho: Vec::with_capacity(n),
    };
    for t in 0..n + BURN_IN {
        if t > 0 {
            let (a, b) = (z_prev[0], z_prev[1]);
            q = [
                w * s_bar[0] + spec.alpha * a * a + spec.beta * q[0],
                w * s_bar[1] + spec.alpha * a * b + spec.beta * q[1],
                w * s_bar[2] + spec.alpha * b * b + spec.beta * q[2],
            ];
            for i in 0..2 {
                let (o, a, b) = spec.garch[i];
                h[i] = o + a * e_prev[i] * e_prev[i] + b * h[i];
            }
        }
        let rho = q[1] / (q[0] * q[2]).sqrt();
        let u1: f64 = StandardNormal.sample(&mut r);
        let u2: f64 = StandardNormal.sample(&mut r);
        let z = [u1, rho * u1 + (1.0 - rho * rho).sqrt() * u2];
        let e = [h[0].sqrt() * z[0], h[1].sqrt() * z[1]];
        if t >= BURN_IN {
            sim.x.push(e[0]);
            sim.y.push(e[1]);
            sim.rho.push(rho);
        }
        z_prev = z;
        e_prev = e;
    }
    sim
}

/// `x` a walk with the given drift, `y = slope · x + noise_sd · ε`:
/// cointegrated with rank 1.
pub fn cointegrated_pair(n: usize, slope: f64, drift: f64, noise_sd: f64, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let x = drifting_walk(n, drift, seed);
    let mut r = rng(seed ^ 0x9e37_79b9_7f4a_7c15);
    let y = x
        .iter()
        .map(|v| {
            let e: f64 = StandardNormal.sample(&mut r);
            slope * v + noise_sd * e
        })
        .collect();
    (x, y)
}

/// A posterior with `peak` on class `c` and the rest split at random.
fn peaked(r: &mut ChaCha8Rng, c: usize, peak: f64) -> ProbTriple {
    let rest = 1.0 - peak;
    let share = r.gen_range(0.4..0.6);
    let mut p = [0.0; 3];
    p[c] = peak;
    p[(c + 1) % 3] = rest * share;
    p[(c + 2) % 3] = rest * (1.0 - share);
    ProbTriple::from_array(p).expect("valid by construction")
}

/// Near-uniform noise carrying no information about the label.
fn diffuse(r: &mut ChaCha8Rng) -> ProbTriple {
    let raw: [f64; 3] = std::array::from_fn(|_| 1.0 + r.gen_range(-0.15..0.15));
    let s: f64 = raw.iter().sum();
    ProbTriple::from_array(raw.map(|v| v / s)).expect("valid by construction")
}

/// Two experts with disjoint competence. On even rows `expert_a` puts a
/// confident peak on the true class and `expert_b` is diffuse noise; on odd
/// rows the roles swap. Labels are balanced and the Bayes rate is 1.
pub fn complementary_experts(n: usize, expert_a: &str, expert_b: &str, seed: u64) -> Vec<ExpertRecord> {
    let mut r = rng(seed);
    let agreement = ["50", "66", "75", "100"];
    (0..n)
        .map(|i| {
            let label = SentimentLabel::from_index(r.gen_range(0..3));
            let peak = r.gen_range(0.6..0.95);
            let informative = peaked(&mut r, label.index(), peak);
            let noise = diffuse(&mut r);
            let (a, b) = if i % 2 == 0 {
                (informative, noise)
            } else {
                (noise, informative)
            };
            ExpertRecord {
                id: format!("syn-{i:05}"),
                text: format!("synthetic headline {i}"),
                experts: BTreeMap::from([(expert_a.to_string(), a), (expert_b.to_string(), b)]),
                label: Some(label),
                date: None,
                agreement: Some(agreement[(i / 2) % agreement.len()].to_string()),
            }
        })
        .collect()
}

/// Monday-to-Friday dates starting at `start` (rolled to a weekday).
pub fn business_days(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(n);
    let mut d = start;
    while out.len() < n {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d += Duration::days(1);
    }
    out
}

/// Dated news records and a price series linked through a latent daily mood.
///
/// The mood is an AR(1) (φ = 0.5) squashed into `[-1, 1]`; each trading day
/// gets 1 to 3 articles whose `expert` posterior leans with the mood. The log
/// price is a scaled running sum of the centered daily mean score plus
/// stationary GARCH noise, so it is cointegrated with cumulative sentiment.
pub fn linkage_fixture(n_days: usize, expert: &str, ticker: &str, seed: u64) -> (Vec<ExpertRecord>, PriceSeries) {
    let mut r = rng(seed);
    let days = business_days(NaiveDate::from_ymd_opt(2020, 1, 2).expect("valid date"), n_days);
    let shocks = simulate_garch11(n_days, 0.02, 0.06, 0.9, seed.wrapping_add(1));
    let mut mood = 0.0;
    let mut day_means = Vec::with_capacity(n_days);
    let mut records = Vec::new();
    let mut points = Vec::with_capacity(n_days);
    for (t, day) in days.iter().enumerate() {
        let e: f64 = StandardNormal.sample(&mut r);
        mood = 0.5 * mood + e;
        let lean = mood.tanh();
        let mut day_sum = 0.0;
        let n_articles = r.gen_range(1..=3);
        for k in 0..n_articles {
            let pos = 0.2 + 0.3 * (lean + 1.0) + r.gen_range(-0.05..0.05);
            let neg = 0.2 + 0.3 * (1.0 - lean) + r.gen_range(-0.05..0.05);
            let neu = r.gen_range(0.05..0.3);
            let s = pos + neu + neg;
            let p = ProbTriple::from_array([pos / s, neu / s, neg / s]).expect("valid by construction");
            day_sum += crate::index::score_article(&p);
            let ts = day.and_hms_opt(8 + 3 * k, 30, 0).expect("valid time");
            records.push(ExpertRecord {
                id: format!("news-{t:05}-{k}"),
                text: format!("market update {t} item {k}"),
                experts: BTreeMap::from([(expert.to_string(), p)]),
                label: None,
                date: Some(ts),
                agreement: None,
            });
        }
        day_means.push(day_sum / n_articles as f64);
    }
    // Centering keeps a deterministic trend out of the cointegrating relation.
    let center = day_means.iter().sum::<f64>() / n_days as f64;
    let mut level = 0.0;
    for (t, day) in days.iter().enumerate() {
        level += 0.01 * (day_means[t] - center);
        points.push((*day, (4.0 + level + 0.01 * shocks[t]).exp()));
    }
    let prices = PriceSeries::new(ticker, points).expect("strictly increasing dates, positive closes");
    (records, prices)
}
