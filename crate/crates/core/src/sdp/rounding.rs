//! Gaussian roundings of solved relaxations to vectors orthogonal to `D^{1/2} 1`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::{PointSource, SdpInstance, SdpKind, SdpSolution};
use crate::error::{Error, Result};
use crate::linalg;
use crate::oracle::SubmodularTransformation;
use crate::spectral::LaplacianOperator;

pub const DEFAULT_DRAWS: usize = 16;

#[derive(Clone, Debug)]
pub struct RoundingOptions {
    pub seed: u64,
    pub draws: usize,
    /// Overrides the bias weight `delta` of the general rounding.
    pub delta: Option<f64>,
    /// `eps` entering the default `delta` when the instance came from vertex sets.
    pub eps: f64,
}

impl Default for RoundingOptions {
    fn default() -> Self {
        RoundingOptions {
            seed: 0,
            draws: DEFAULT_DRAWS,
            delta: None,
            eps: 0.5,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RoundedVector {
    /// `D^{1/2} z`, orthogonal to `D^{1/2} 1`.
    pub vector: Vec<f64>,
    pub rayleigh: f64,
    /// Index of the winning draw.
    pub draw: usize,
    pub delta: Option<f64>,
}

/// `1 / (10 sqrt(ln(max(m, 2) n^{1/eps^2})))`.
pub fn default_delta(n: usize, m: usize, eps: f64) -> f64 {
    let log = (m.max(2) as f64).ln() + (n.max(1) as f64).ln() / (eps * eps);
    1.0 / (10.0 * log.sqrt())
}

fn gaussian(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| StandardNormal.sample(rng)).collect()
}

/// Candidate `D^{1/2} z`, projected to remove rounding drift; `None` if zero.
fn finish(op: &LaplacianOperator<'_>, sqrt_deg: &[f64], z: &[f64]) -> Option<(Vec<f64>, f64)> {
    let mut out: Vec<f64> = z.iter().zip(sqrt_deg).map(|(a, s)| a * s).collect();
    op.project(&mut out);
    let r = op.rayleigh(&out).ok()?;
    Some((out, r))
}

fn check_solution(t: &SubmodularTransformation, sol: &SdpSolution) -> Result<()> {
    if sol.n != t.n() {
        return Err(Error::input("solution and transformation have different ground sets"));
    }
    Ok(())
}

/// `z(v) = <x_v, g>` for Gaussian `g`; the best of the draws by Rayleigh quotient.
pub fn round_symmetric(
    t: &SubmodularTransformation,
    sol: &SdpSolution,
    opts: &RoundingOptions,
) -> Result<RoundedVector> {
    check_solution(t, sol)?;
    let op = LaplacianOperator::normalized(t)?;
    let sqrt_deg: Vec<f64> = t.degrees().iter().map(|&d| (d as f64).sqrt()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best: Option<RoundedVector> = None;
    for draw in 0..opts.draws.max(1) {
        let g = gaussian(&mut rng, sol.rank);
        let z: Vec<f64> = sol.vectors.iter().map(|x| linalg::dot(x, &g)).collect();
        if let Some((vector, rayleigh)) = finish(&op, &sqrt_deg, &z) {
            if best.as_ref().is_none_or(|b| rayleigh < b.rayleigh) {
                best = Some(RoundedVector {
                    vector,
                    rayleigh,
                    draw,
                    delta: None,
                });
            }
        }
    }
    best.ok_or_else(|| Error::Internal("every rounding draw produced the zero vector".into()))
}

/// `z_{+-}(v) = <x_v, v_1> +- delta <P x_v, g>`, keeping the better sign of the
/// better draw; `P` removes the first coordinate.
pub fn round_general(
    t: &SubmodularTransformation,
    inst: &SdpInstance,
    sol: &SdpSolution,
    opts: &RoundingOptions,
) -> Result<RoundedVector> {
    check_solution(t, sol)?;
    if inst.kind != SdpKind::General {
        return Err(Error::input("biased rounding needs a general relaxation"));
    }
    let eps = match inst.source {
        PointSource::Cover { eps } => eps,
        PointSource::Vertices => opts.eps,
    };
    let delta = match opts.delta {
        Some(d) if d >= 0.0 && d.is_finite() => d,
        Some(_) => return Err(Error::input("delta must be a non-negative number")),
        None => default_delta(t.n(), t.m(), eps),
    };
    let op = LaplacianOperator::normalized(t)?;
    let sqrt_deg: Vec<f64> = t.degrees().iter().map(|&d| (d as f64).sqrt()).collect();
    let bias: Vec<f64> = sol.vectors.iter().map(|x| x[0]).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best: Option<RoundedVector> = None;
    for draw in 0..opts.draws.max(1) {
        let g = gaussian(&mut rng, sol.rank);
        let noise: Vec<f64> = sol
            .vectors
            .iter()
            .map(|x| linalg::dot(&x[1..], &g[1..]))
            .collect();
        for sign in [1.0, -1.0] {
            let z: Vec<f64> = bias
                .iter()
                .zip(&noise)
                .map(|(b, n)| b + sign * delta * n)
                .collect();
            if let Some((vector, rayleigh)) = finish(&op, &sqrt_deg, &z) {
                if best.as_ref().is_none_or(|b| rayleigh < b.rayleigh) {
                    best = Some(RoundedVector {
                        vector,
                        rayleigh,
                        draw,
                        delta: Some(delta),
                    });
                }
            }
        }
    }
    best.ok_or_else(|| Error::Internal("both rounding candidates are zero in every draw".into()))
}
