//! Shifted and rotated single-objective problems.
//!
//! Shift vectors and rotation matrices are generated from a seed instead of
//! being read from data files, so any `(problem, n, seed)` triple is
//! reproducible on its own.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use rand_distr::StandardNormal;

use super::classic::{ackley, griewank, rastrigin, rosenbrock};
use super::{ParsedId, Problem, DEFAULT_SOO_DIM};
use crate::error::{Error, Result};
use crate::seed;

pub(super) const NAMES: [&str; 10] = [
    "shifted_sphere",
    "shifted_ellipsoid",
    "shifted_ackley",
    "shifted_griewank",
    "shifted_rotated_rosenbrock",
    "shifted_rotated_rastrigin",
    "shifted_rotated_weierstrass",
    "shifted_rotated_schwefel",
    "shifted_rotated_katsuura",
    "shifted_rotated_happycat",
];

const BOUND: f64 = 100.0;

/// `z = R (scale * (x - shift)) + offset`, with `R` the identity when absent.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftRotate {
    pub shift: Vec<f64>,
    pub rotation: Option<DMatrix<f64>>,
    pub scale: f64,
    pub offset: f64,
    pub seed: u64,
}

impl ShiftRotate {
    /// Draws a shift uniformly in the inner 80% of `[-100, 100]^n` and, when
    /// `rotate`, a random orthogonal matrix (QR of a Gaussian matrix with the
    /// signs of `diag(R)` folded into `Q`).
    pub fn generate(n: usize, seed: u64, rotate: bool) -> Self {
        let mut rng = seed::rng(seed);
        let shift = (0..n).map(|_| rng.random_range(-0.8 * BOUND..0.8 * BOUND)).collect();
        let rotation = rotate.then(|| {
            let g = DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
            let qr = g.qr();
            let (mut q, r) = (qr.q(), qr.r());
            for j in 0..n {
                if r[(j, j)] < 0.0 {
                    q.column_mut(j).neg_mut();
                }
            }
            q
        });
        Self { shift, rotation, scale: 1.0, offset: 0.0, seed }
    }

    fn with(mut self, scale: f64, offset: f64) -> Self {
        self.scale = scale;
        self.offset = offset;
        self
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let d: Vec<f64> = x.iter().zip(&self.shift).map(|(v, o)| self.scale * (v - o)).collect();
        let mut z = match &self.rotation {
            Some(r) => (r * DVector::from_vec(d)).data.into(),
            None => d,
        };
        if self.offset != 0.0 {
            z.iter_mut().for_each(|v| *v += self.offset);
        }
        z
    }
}

pub(super) fn build(id: &ParsedId) -> Result<Option<Problem>> {
    if !NAMES.contains(&id.base.as_str()) {
        return Ok(None);
    }
    let n = id.n.unwrap_or(DEFAULT_SOO_DIM);
    if n < 2 {
        return Err(Error::Config(format!("`{}` needs n >= 2", id.raw)));
    }
    let user_seed = id.seed.unwrap_or(0);
    let mut name = id.base.clone();
    if n != DEFAULT_SOO_DIM {
        name += &format!("_n{n}");
    }
    if id.seed.is_some() {
        name += &format!("_s{user_seed}");
    }
    let seed = seed::derive(user_seed, &[seed::hash_str(&id.base), n as u64]);
    let rotate = id.base.starts_with("shifted_rotated_");
    let t = ShiftRotate::generate(n, seed, rotate);
    let (t, f): (ShiftRotate, fn(&[f64]) -> f64) = match id.base.as_str() {
        "shifted_sphere" => (t, |z| z.iter().map(|v| v * v).sum()),
        "shifted_ellipsoid" => (t, elliptic),
        "shifted_ackley" => (t.with(0.32, 0.0), ackley),
        "shifted_griewank" => (t.with(6.0, 0.0), griewank),
        "shifted_rotated_rosenbrock" => (t.with(0.020_48, 1.0), rosenbrock),
        "shifted_rotated_rastrigin" => (t.with(0.051_2, 0.0), rastrigin),
        "shifted_rotated_weierstrass" => (t.with(0.005, 0.0), weierstrass),
        "shifted_rotated_schwefel" => (t.with(10.0, 420.968_746_227_503_6), modified_schwefel),
        "shifted_rotated_katsuura" => (t.with(0.05, 0.0), katsuura),
        "shifted_rotated_happycat" => (t.with(0.05, -1.0), happycat),
        _ => unreachable!(),
    };
    let optimum = f(&t.apply(&t.shift));
    let mut p = Problem::single(name, vec![(-BOUND, BOUND); n], Some(optimum), move |x| f(&t.apply(x)));
    p.transform_seed = Some(user_seed);
    Ok(Some(p))
}

fn elliptic(z: &[f64]) -> f64 {
    let n = z.len();
    z.iter().enumerate().map(|(i, v)| 1e6f64.powf(i as f64 / (n - 1) as f64) * v * v).sum()
}

fn weierstrass(z: &[f64]) -> f64 {
    const A: f64 = 0.5;
    const B: f64 = 3.0;
    const KMAX: i32 = 20;
    let term = |v: f64| (0..=KMAX).map(|k| A.powi(k) * (2.0 * PI * B.powi(k) * v).cos()).sum::<f64>();
    let base = term(0.5);
    z.iter().map(|v| term(v + 0.5)).sum::<f64>() - z.len() as f64 * base
}

fn modified_schwefel(z: &[f64]) -> f64 {
    let n = z.len() as f64;
    let g = |v: f64| {
        if v.abs() <= 500.0 {
            v * v.abs().sqrt().sin()
        } else {
            // fold back into [-500, 500] and penalise the excess
            let m = 500.0 - v.abs() % 500.0;
            let inner = v.signum() * m;
            inner * m.sqrt().sin() - (v.abs() - 500.0).powi(2) / (10_000.0 * n)
        }
    };
    418.982_9 * n - z.iter().map(|&v| g(v)).sum::<f64>()
}

fn katsuura(z: &[f64]) -> f64 {
    let n = z.len() as f64;
    let c = 10.0 / (n * n);
    let expo = 10.0 / n.powf(1.2);
    let prod: f64 = z
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let s: f64 = (1..=32)
                .map(|j| {
                    let p = 2f64.powi(j) * v;
                    (p - p.round()).abs() / 2f64.powi(j)
                })
                .sum();
            (1.0 + (i + 1) as f64 * s).powf(expo)
        })
        .product();
    c * prod - c
}

fn happycat(z: &[f64]) -> f64 {
    let n = z.len() as f64;
    let r2: f64 = z.iter().map(|v| v * v).sum();
    let s: f64 = z.iter().sum();
    (r2 - n).abs().powf(0.25) + (0.5 * r2 + s) / n + 0.5
}
