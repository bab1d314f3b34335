//! Shot-level statistical oracle. Initial-mode quadratures are sampled as
//! independent Gaussians and every observable of the network is evaluated
//! numerically per shot. For a linear network this semiclassical sampling
//! reproduces all first and second moments exactly, so it cross-checks the
//! exact algebra without sharing any code path with it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::algebra::{variance, NoiseModel, QuadExpr};
use crate::protocol::{
    build_switch, fidelity_from_variances, Bob, ProtocolError, SwitchParams, SwitchNetwork,
};

/// Shots are generated in fixed-size chunks, each with its own sub-seeded
/// RNG stream, so chunks can be evaluated independently and merged.
pub const CHUNK_SIZE: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotConfig {
    pub n_shots: u64,
    pub seed: u64,
}

impl ShotConfig {
    pub fn new(n_shots: u64, seed: u64) -> Self {
        assert!(n_shots >= 1, "need at least one shot");
        Self { n_shots, seed }
    }
}

/// SplitMix64 finalizer; the sub-seed for chunk `k` of master seed `s` is
/// `splitmix64(s + (k+1)·0x9E3779B97F4A7C15)`. Documented so the stream is
/// a reproducible function of the seed.
pub fn chunk_seed(seed: u64, chunk: u64) -> u64 {
    let mut z = seed.wrapping_add((chunk + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mergeable moment accumulator: count, sum, sum of squares.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Accumulator {
    pub n: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Accumulator {
    pub fn push(&mut self, v: f64) {
        self.n += 1;
        self.sum += v;
        self.sum_sq += v * v;
    }

    pub fn merge(&mut self, other: &Accumulator) {
        self.n += other.n;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.n as f64
    }

    /// Unbiased sample variance; 0 for fewer than two samples.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0)
    }

    pub fn se_mean(&self) -> f64 {
        (self.variance() / self.n as f64).sqrt()
    }

    /// Standard error of the variance estimate (Gaussian samples);
    /// NaN when undefined (fewer than two samples).
    pub fn se_variance(&self) -> f64 {
        if self.n < 2 {
            return f64::NAN;
        }
        self.variance() * (2.0 / (self.n as f64 - 1.0)).sqrt()
    }
}

/// Estimated first and second moments of one mode's quadrature pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub mean_x: f64,
    pub mean_y: f64,
    pub var_x: f64,
    pub var_y: f64,
    pub se_var_x: f64,
    pub se_var_y: f64,
    pub n: u64,
}

impl MomentEstimate {
    fn from_accs(x: &Accumulator, y: &Accumulator) -> Self {
        Self {
            mean_x: x.mean(),
            mean_y: y.mean(),
            var_x: x.variance(),
            var_y: y.variance(),
            se_var_x: x.se_variance(),
            se_var_y: y.se_variance(),
            n: x.n,
        }
    }
}

/// Coefficient table flattened for fast per-shot evaluation.
struct Compiled {
    mean: f64,
    terms: Vec<(usize, f64, f64)>,
}

impl Compiled {
    fn new(e: &QuadExpr) -> Self {
        Self {
            mean: e.mean(),
            terms: e.terms().map(|(id, c)| (id.index(), c.x, c.y)).collect(),
        }
    }

    fn eval(&self, fluct: &[(f64, f64)]) -> f64 {
        let mut v = self.mean;
        for &(k, cx, cy) in &self.terms {
            let (fx, fy) = fluct[k];
            v += cx * fx + cy * fy;
        }
        v
    }
}

/// Samples the given observables over `c.n_shots` shots. Basis quadrature
/// fluctuations are drawn independently per shot with the noise-model
/// variances; draws go basis-index order, X before Y. Chunks are merged
/// in index order, so the result is bit-reproducible for a given config.
pub fn sample_expressions(
    exprs: &[&QuadExpr],
    n_basis: usize,
    noise: &NoiseModel,
    basis_ids: &[crate::algebra::BasisId],
    c: &ShotConfig,
) -> Vec<Accumulator> {
    let chunks = sample_expression_chunks(exprs, n_basis, noise, basis_ids, c);
    let mut totals = vec![Accumulator::default(); exprs.len()];
    for local in &chunks {
        for (t, l) in totals.iter_mut().zip(local) {
            t.merge(l);
        }
    }
    totals
}

/// Per-chunk accumulators, one inner vector per chunk in index order.
/// Merging them in any order gives the same counts and (up to float
/// rounding) the same sums; [`sample_expressions`] folds in index order.
pub fn sample_expression_chunks(
    exprs: &[&QuadExpr],
    n_basis: usize,
    noise: &NoiseModel,
    basis_ids: &[crate::algebra::BasisId],
    c: &ShotConfig,
) -> Vec<Vec<Accumulator>> {
    let compiled: Vec<Compiled> = exprs.iter().map(|e| Compiled::new(e)).collect();
    let sds: Vec<(f64, f64)> = basis_ids
        .iter()
        .map(|&id| {
            let (vx, vy) = noise.get(id);
            (vx.sqrt(), vy.sqrt())
        })
        .collect();
    assert_eq!(sds.len(), n_basis);

    let n_chunks = c.n_shots.div_ceil(CHUNK_SIZE);
    let mut out = Vec::with_capacity(n_chunks as usize);
    let mut fluct = vec![(0.0, 0.0); n_basis];
    for chunk in 0..n_chunks {
        let shots = (c.n_shots - chunk * CHUNK_SIZE).min(CHUNK_SIZE);
        let mut rng = ChaCha12Rng::seed_from_u64(chunk_seed(c.seed, chunk));
        let mut local = vec![Accumulator::default(); compiled.len()];
        for _ in 0..shots {
            for (k, &(sx, sy)) in sds.iter().enumerate() {
                let gx: f64 = rng.sample(StandardNormal);
                let gy: f64 = rng.sample(StandardNormal);
                fluct[k] = (sx * gx, sy * gy);
            }
            for (acc, e) in local.iter_mut().zip(&compiled) {
                acc.push(e.eval(&fluct));
            }
        }
        out.push(local);
    }
    out
}

fn sample_network(
    net: &SwitchNetwork,
    exprs: &[&QuadExpr],
    c: &ShotConfig,
) -> Vec<Accumulator> {
    let ids: Vec<_> = net.basis.ids().collect();
    sample_expressions(exprs, net.basis.len(), &net.noise, &ids, c)
}

/// Monte-Carlo moment estimates of both receiver outputs.
pub fn sample_switch(
    p: &SwitchParams,
    c: &ShotConfig,
) -> Result<(MomentEstimate, MomentEstimate), ProtocolError> {
    let net = build_switch(p)?;
    let exprs = [&net.out5.x, &net.out5.y, &net.out6.x, &net.out6.y];
    let accs = sample_network(&net, &exprs, c);
    Ok((
        MomentEstimate::from_accs(&accs[0], &accs[1]),
        MomentEstimate::from_accs(&accs[2], &accs[3]),
    ))
}

/// Fidelity from estimated moments; same formula as the analytic path.
pub fn estimate_fidelity(
    m: &MomentEstimate,
    p: &SwitchParams,
    which: Bob,
) -> Result<f64, ProtocolError> {
    if p.v_in_x != 1.0 || p.v_in_y != 1.0 {
        return Err(ProtocolError::NonCoherentInput(p.v_in_x, p.v_in_y));
    }
    let gain = match which {
        Bob::Bob1 => p.g1,
        Bob::Bob2 => p.g2,
    };
    Ok(fidelity_from_variances(m.var_x, m.var_y, gain, p.alpha_sq()))
}

/// One MC-vs-analytic comparison line.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ZEntry {
    pub name: String,
    pub mc: f64,
    pub analytic: f64,
    pub se: f64,
    pub z: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McReport {
    pub entries: Vec<ZEntry>,
    pub bob1: MomentEstimate,
    pub bob2: MomentEstimate,
    pub f1_mc: f64,
    pub f2_mc: f64,
    pub f1_analytic: f64,
    pub f2_analytic: f64,
    /// True when any |z| > 5 or a standard error is undefined.
    pub any_flagged: bool,
    /// True when the shot count is too small for variance standard errors.
    pub degenerate: bool,
}

fn z_entry(name: &str, mc: f64, analytic: f64, se: f64) -> ZEntry {
    let z = (mc - analytic) / se;
    let flagged = !z.is_finite() || z.abs() > 5.0;
    ZEntry { name: name.to_string(), mc, analytic, se, z, flagged }
}

/// Runs the sampler and scores every estimated mean and variance against
/// the exact algebra: z = (MC − analytic)/SE. Witness combinations are
/// included. Entries with |z| > 5 (or undefined SE) are flagged.
pub fn compare_to_analytic(
    p: &SwitchParams,
    c: &ShotConfig,
) -> Result<McReport, ProtocolError> {
    let net = build_switch(p)?;
    let w35x = net.mode3.x.sub(&net.mode5.x);
    let w35y = net.mode3.y.add(&net.mode5.y);
    let w36x = net.mode3.x.sub(&net.mode6.x);
    let w36y = net.mode3.y.add(&net.mode6.y);
    let exprs = [
        &net.out5.x,
        &net.out5.y,
        &net.out6.x,
        &net.out6.y,
        &w35x,
        &w35y,
        &w36x,
        &w36y,
    ];
    let accs = sample_network(&net, &exprs, c);

    let names = [
        "bob1", "bob1", "bob2", "bob2", "w35_x", "w35_y", "w36_x", "w36_y",
    ];
    let mut entries = Vec::new();
    for (i, (acc, expr)) in accs.iter().zip(&exprs).enumerate() {
        let v_true = variance(expr, &net.noise);
        if i < 4 {
            let quad = if i % 2 == 0 { "x" } else { "y" };
            entries.push(z_entry(
                &format!("{}_mean_{quad}", names[i]),
                acc.mean(),
                expr.mean(),
                acc.se_mean(),
            ));
            entries.push(z_entry(
                &format!("{}_var_{quad}", names[i]),
                acc.variance(),
                v_true,
                acc.se_variance(),
            ));
        } else {
            entries.push(z_entry(
                &format!("{}_var", names[i]),
                acc.variance(),
                v_true,
                acc.se_variance(),
            ));
        }
    }

    let bob1 = MomentEstimate::from_accs(&accs[0], &accs[1]);
    let bob2 = MomentEstimate::from_accs(&accs[2], &accs[3]);
    let coherent = p.v_in_x == 1.0 && p.v_in_y == 1.0;
    let (f1_mc, f2_mc, f1_analytic, f2_analytic) = if coherent {
        (
            estimate_fidelity(&bob1, p, Bob::Bob1)?,
            estimate_fidelity(&bob2, p, Bob::Bob2)?,
            crate::protocol::fidelity(p, Bob::Bob1)?,
            crate::protocol::fidelity(p, Bob::Bob2)?,
        )
    } else {
        (f64::NAN, f64::NAN, f64::NAN, f64::NAN)
    };

    let degenerate = c.n_shots < 2;
    let any_flagged = degenerate || entries.iter().any(|e| e.flagged);
    Ok(McReport {
        entries,
        bob1,
        bob2,
        f1_mc,
        f2_mc,
        f1_analytic,
        f2_analytic,
        any_flagged,
        degenerate,
    })
}
