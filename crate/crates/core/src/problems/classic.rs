//! The 23 classic benchmark functions (f1-f13 scalable, f14-f23 fixed dimension).

use std::f64::consts::{E, PI};

use super::{ParsedId, Problem, DEFAULT_SOO_DIM};
use crate::error::{Error, Result};

pub(super) const NAMES: [&str; 23] = [
    "sphere",
    "schwefel_2_22",
    "schwefel_1_2",
    "schwefel_2_21",
    "rosenbrock",
    "step",
    "quartic_noise",
    "schwefel_2_26",
    "rastrigin",
    "ackley",
    "griewank",
    "penalized_1",
    "penalized_2",
    "shekel_foxholes",
    "kowalik",
    "six_hump_camel",
    "branin",
    "goldstein_price",
    "hartman_3",
    "hartman_6",
    "shekel_5",
    "shekel_7",
    "shekel_10",
];

pub(super) fn build(id: &ParsedId) -> Result<Option<Problem>> {
    let Some(index) = NAMES.iter().position(|n| *n == id.base) else {
        return Ok(None);
    };
    let scalable = index < 13;
    if !scalable && id.n.is_some() {
        return Err(Error::Config(format!("`{}` has a fixed dimension", id.base)));
    }
    let n = id.n.unwrap_or(DEFAULT_SOO_DIM);
    if n < 2 {
        return Err(Error::Config(format!("`{}` needs n >= 2", id.raw)));
    }
    let name = if scalable && n != DEFAULT_SOO_DIM { format!("{}_n{n}", id.base) } else { id.base.clone() };
    let cube = |b: f64| vec![(-b, b); n];
    let p = match id.base.as_str() {
        "sphere" => Problem::single(name, cube(100.0), Some(0.0), |x| x.iter().map(|v| v * v).sum()),
        "schwefel_2_22" => Problem::single(name, cube(10.0), Some(0.0), |x| {
            x.iter().map(|v| v.abs()).sum::<f64>() + x.iter().map(|v| v.abs()).product::<f64>()
        }),
        "schwefel_1_2" => Problem::single(name, cube(100.0), Some(0.0), |x| {
            let mut acc = 0.0;
            x.iter()
                .map(|v| {
                    acc += v;
                    acc * acc
                })
                .sum()
        }),
        "schwefel_2_21" => Problem::single(name, cube(100.0), Some(0.0), |x| x.iter().fold(0.0, |m, v| m.max(v.abs()))),
        "rosenbrock" => Problem::single(name, cube(30.0), Some(0.0), rosenbrock),
        "step" => Problem::single(name, cube(100.0), Some(0.0), |x| x.iter().map(|v| (v + 0.5).floor().powi(2)).sum()),
        "quartic_noise" => Problem::single(name, cube(1.28), None, |x| {
            x.iter().enumerate().map(|(i, v)| (i + 1) as f64 * v.powi(4)).sum::<f64>() + hash_noise(x)
        }),
        "schwefel_2_26" => Problem::single(name, cube(500.0), Some(-418.982_887_272_433_8 * n as f64), |x| {
            -x.iter().map(|v| v * v.abs().sqrt().sin()).sum::<f64>()
        }),
        "rastrigin" => Problem::single(name, cube(5.12), Some(0.0), rastrigin),
        "ackley" => Problem::single(name, cube(32.0), Some(0.0), ackley),
        "griewank" => Problem::single(name, cube(600.0), Some(0.0), griewank),
        "penalized_1" => Problem::single(name, cube(50.0), Some(0.0), penalized_1),
        "penalized_2" => Problem::single(name, cube(50.0), Some(0.0), penalized_2),
        "shekel_foxholes" => Problem::single(name, vec![(-65.536, 65.536); 2], Some(0.998_003_837_794_449_3), foxholes),
        "kowalik" => Problem::single(name, vec![(-5.0, 5.0); 4], Some(3.074_859_878_056_042e-4), kowalik),
        "six_hump_camel" => Problem::single(name, vec![(-5.0, 5.0); 2], Some(-1.031_628_453_489_877), |x| {
            let (a, b) = (x[0], x[1]);
            4.0 * a * a - 2.1 * a.powi(4) + a.powi(6) / 3.0 + a * b - 4.0 * b * b + 4.0 * b.powi(4)
        }),
        "branin" => Problem::single(name, vec![(-5.0, 10.0), (0.0, 15.0)], Some(0.397_887_357_729_738), |x| {
            let (a, b) = (x[0], x[1]);
            (b - 5.1 / (4.0 * PI * PI) * a * a + 5.0 / PI * a - 6.0).powi(2) + 10.0 * (1.0 - 1.0 / (8.0 * PI)) * a.cos() + 10.0
        }),
        "goldstein_price" => Problem::single(name, vec![(-2.0, 2.0); 2], Some(3.0), |x| {
            let (a, b) = (x[0], x[1]);
            (1.0 + (a + b + 1.0).powi(2) * (19.0 - 14.0 * a + 3.0 * a * a - 14.0 * b + 6.0 * a * b + 3.0 * b * b))
                * (30.0
                    + (2.0 * a - 3.0 * b).powi(2)
                        * (18.0 - 32.0 * a + 12.0 * a * a + 48.0 * b - 36.0 * a * b + 27.0 * b * b))
        }),
        "hartman_3" => Problem::single(name, vec![(0.0, 1.0); 3], Some(-3.862_782_147_820_755), |x| {
            hartman(x, &H3_A, &H3_P)
        }),
        "hartman_6" => Problem::single(name, vec![(0.0, 1.0); 6], Some(-3.322_368_011_415_515), |x| {
            hartman(x, &H6_A, &H6_P)
        }),
        "shekel_5" => Problem::single(name, vec![(0.0, 10.0); 4], Some(-10.153_199_679_058_23), |x| shekel(x, 5)),
        "shekel_7" => Problem::single(name, vec![(0.0, 10.0); 4], Some(-10.402_940_566_818_66), |x| shekel(x, 7)),
        "shekel_10" => Problem::single(name, vec![(0.0, 10.0); 4], Some(-10.536_409_816_692_05), |x| shekel(x, 10)),
        _ => unreachable!(),
    };
    Ok(Some(p))
}

pub(super) fn rosenbrock(x: &[f64]) -> f64 {
    x.windows(2).map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (w[0] - 1.0).powi(2)).sum()
}

pub(super) fn rastrigin(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v - 10.0 * (2.0 * PI * v).cos() + 10.0).sum()
}

pub(super) fn ackley(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let sq = x.iter().map(|v| v * v).sum::<f64>() / n;
    let cs = x.iter().map(|v| (2.0 * PI * v).cos()).sum::<f64>() / n;
    (-20.0 * (-0.2 * sq.sqrt()).exp() - cs.exp() + 20.0 + E).max(0.0)
}

pub(super) fn griewank(x: &[f64]) -> f64 {
    let s = x.iter().map(|v| v * v).sum::<f64>() / 4000.0;
    let p: f64 = x.iter().enumerate().map(|(i, v)| (v / ((i + 1) as f64).sqrt()).cos()).product();
    s - p + 1.0
}

fn penalty(x: f64, a: f64, k: f64, m: i32) -> f64 {
    if x > a {
        k * (x - a).powi(m)
    } else if x < -a {
        k * (-x - a).powi(m)
    } else {
        0.0
    }
}

fn penalized_1(x: &[f64]) -> f64 {
    let n = x.len();
    let y: Vec<f64> = x.iter().map(|v| 1.0 + (v + 1.0) / 4.0).collect();
    let mut s = 10.0 * (PI * y[0]).sin().powi(2);
    for i in 0..n - 1 {
        s += (y[i] - 1.0).powi(2) * (1.0 + 10.0 * (PI * y[i + 1]).sin().powi(2));
    }
    s += (y[n - 1] - 1.0).powi(2);
    PI / n as f64 * s + x.iter().map(|&v| penalty(v, 10.0, 100.0, 4)).sum::<f64>()
}

fn penalized_2(x: &[f64]) -> f64 {
    let n = x.len();
    let mut s = (3.0 * PI * x[0]).sin().powi(2);
    for i in 0..n - 1 {
        s += (x[i] - 1.0).powi(2) * (1.0 + (3.0 * PI * x[i + 1]).sin().powi(2));
    }
    s += (x[n - 1] - 1.0).powi(2) * (1.0 + (2.0 * PI * x[n - 1]).sin().powi(2));
    0.1 * s + x.iter().map(|&v| penalty(v, 5.0, 100.0, 4)).sum::<f64>()
}

/// Deterministic stand-in for the uniform `[0,1)` noise term, hashed from the
/// bit pattern of `x` so evaluation stays reentrant and reproducible.
fn hash_noise(x: &[f64]) -> f64 {
    let mut h: u64 = 0x243F_6A88_85A3_08D3;
    for v in x {
        h ^= v.to_bits();
        h = h.wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(31);
    }
    h ^= h >> 33;
    h = h.wrapping_mul(0xFF51_AFD7_ED55_8CCD);
    h ^= h >> 33;
    (h >> 11) as f64 / (1u64 << 53) as f64
}

fn foxholes(x: &[f64]) -> f64 {
    const A: [f64; 5] = [-32.0, -16.0, 0.0, 16.0, 32.0];
    let mut s = 1.0 / 500.0;
    for j in 0..25 {
        let (a1, a2) = (A[j % 5], A[j / 5]);
        s += 1.0 / ((j + 1) as f64 + (x[0] - a1).powi(6) + (x[1] - a2).powi(6));
    }
    1.0 / s
}

fn kowalik(x: &[f64]) -> f64 {
    const A: [f64; 11] = [0.1957, 0.1947, 0.1735, 0.1600, 0.0844, 0.0627, 0.0456, 0.0342, 0.0323, 0.0235, 0.0246];
    const B_INV: [f64; 11] = [0.25, 0.5, 1.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0];
    A.iter()
        .zip(B_INV)
        .map(|(a, bi)| {
            let b = 1.0 / bi;
            let den = b * b + b * x[2] + x[3];
            let model = x[0] * (b * b + b * x[1]) / den;
            // the denominator can vanish inside the box; keep the value finite
            let model = if model.is_finite() { model } else { 1e10 };
            (a - model).powi(2).min(1e20)
        })
        .sum()
}

const HC: [f64; 4] = [1.0, 1.2, 3.0, 3.2];
const H3_A: [[f64; 3]; 4] = [[3.0, 10.0, 30.0], [0.1, 10.0, 35.0], [3.0, 10.0, 30.0], [0.1, 10.0, 35.0]];
const H3_P: [[f64; 3]; 4] = [
    [0.3689, 0.1170, 0.2673],
    [0.4699, 0.4387, 0.7470],
    [0.1091, 0.8732, 0.5547],
    [0.038150, 0.5743, 0.8828],
];
const H6_A: [[f64; 6]; 4] = [
    [10.0, 3.0, 17.0, 3.5, 1.7, 8.0],
    [0.05, 10.0, 17.0, 0.1, 8.0, 14.0],
    [3.0, 3.5, 1.7, 10.0, 17.0, 8.0],
    [17.0, 8.0, 0.05, 10.0, 0.1, 14.0],
];
const H6_P: [[f64; 6]; 4] = [
    [0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886],
    [0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991],
    [0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650],
    [0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381],
];

fn hartman<const D: usize>(x: &[f64], a: &[[f64; D]; 4], p: &[[f64; D]; 4]) -> f64 {
    -(0..4)
        .map(|i| HC[i] * (-(0..D).map(|j| a[i][j] * (x[j] - p[i][j]).powi(2)).sum::<f64>()).exp())
        .sum::<f64>()
}

const SHEKEL_A: [[f64; 4]; 10] = [
    [4.0, 4.0, 4.0, 4.0],
    [1.0, 1.0, 1.0, 1.0],
    [8.0, 8.0, 8.0, 8.0],
    [6.0, 6.0, 6.0, 6.0],
    [3.0, 7.0, 3.0, 7.0],
    [2.0, 9.0, 2.0, 9.0],
    [5.0, 5.0, 3.0, 3.0],
    [8.0, 1.0, 8.0, 1.0],
    [6.0, 2.0, 6.0, 2.0],
    [7.0, 3.6, 7.0, 3.6],
];
const SHEKEL_C: [f64; 10] = [0.1, 0.2, 0.2, 0.4, 0.4, 0.6, 0.3, 0.7, 0.5, 0.5];

fn shekel(x: &[f64], m: usize) -> f64 {
    -(0..m)
        .map(|i| 1.0 / (x.iter().zip(&SHEKEL_A[i]).map(|(v, a)| (v - a).powi(2)).sum::<f64>() + SHEKEL_C[i]))
        .sum::<f64>()
}
