//! DTLZ, inverted DTLZ, convex DTLZ2 and WFG3/6/7.

use std::f64::consts::FRAC_PI_2;

use super::{FrontShape, ParsedId, Problem};
use crate::error::{Error, Result};

pub(super) const NAMES: [&str; 10] =
    ["cdtlz2", "dtlz1", "dtlz2", "dtlz3", "dtlz4", "idtlz1", "idtlz2", "wfg3", "wfg6", "wfg7"];

pub(super) fn build(id: &ParsedId) -> Result<Option<Problem>> {
    if !NAMES.contains(&id.base.as_str()) {
        return Ok(None);
    }
    let m = id.m.unwrap_or(3);
    let n = id.n.unwrap_or(10);
    if m < 2 || n < m {
        return Err(Error::Config(format!("`{}` needs m >= 2 and n >= m", id.raw)));
    }
    let name = format!("{}_m{m}_n{n}", id.base);
    let unit = vec![(0.0, 1.0); n];
    let p = match id.base.as_str() {
        "dtlz1" => Problem::multi(name, unit, m, FrontShape::LinearSimplex, move |x, f| dtlz1(x, f, false)),
        "idtlz1" => Problem::multi(name, unit, m, FrontShape::InvertedSimplex, move |x, f| dtlz1(x, f, true)),
        "dtlz2" => Problem::multi(name, unit, m, FrontShape::Sphere, move |x, f| {
            let g = g_sphere(&x[m - 1..]);
            sphere_shape(x, g, 1.0, f)
        }),
        "dtlz3" => Problem::multi(name, unit, m, FrontShape::Sphere, move |x, f| {
            let g = g_rastrigin(&x[m - 1..]);
            sphere_shape(x, g, 1.0, f)
        }),
        "dtlz4" => Problem::multi(name, unit, m, FrontShape::Sphere, move |x, f| {
            let g = g_sphere(&x[m - 1..]);
            sphere_shape(x, g, 100.0, f)
        }),
        "idtlz2" => Problem::multi(name, unit, m, FrontShape::InvertedSphere, move |x, f| {
            let g = g_sphere(&x[m - 1..]);
            sphere_shape(x, g, 1.0, f);
            for v in f.iter_mut() {
                *v = (1.0 + g) - *v;
            }
        }),
        "cdtlz2" => Problem::multi(name, unit, m, FrontShape::ConvexSphere, move |x, f| {
            let g = g_sphere(&x[m - 1..]);
            sphere_shape(x, g, 1.0, f);
            convexify(f);
        }),
        wfg => {
            let k = 2 * (m - 1);
            if n <= k || (wfg == "wfg3" && (n - k) % 2 != 0) {
                return Err(Error::Config(format!(
                    "`{}` needs more than {k} variables (and an even distance count for WFG3)",
                    id.raw
                )));
            }
            let bounds = (0..n).map(|i| (0.0, 2.0 * (i + 1) as f64)).collect();
            let variant = match wfg {
                "wfg3" => Wfg::Three,
                "wfg6" => Wfg::Six,
                _ => Wfg::Seven,
            };
            let shape = if variant == Wfg::Three { FrontShape::WfgDegenerateLine } else { FrontShape::WfgConcave };
            Problem::multi(name, bounds, m, shape, move |x, f| wfg_eval(variant, x, k, f))
        }
    };
    Ok(Some(p))
}

fn g_sphere(xm: &[f64]) -> f64 {
    xm.iter().map(|v| (v - 0.5).powi(2)).sum()
}

fn g_rastrigin(xm: &[f64]) -> f64 {
    100.0
        * (xm.len() as f64
            + xm.iter().map(|v| (v - 0.5).powi(2) - (20.0 * std::f64::consts::PI * (v - 0.5)).cos()).sum::<f64>())
}

fn dtlz1(x: &[f64], f: &mut [f64], inverted: bool) {
    let m = f.len();
    let g = g_rastrigin(&x[m - 1..]);
    for i in 0..m {
        let mut v = 0.5 * (1.0 + g);
        v *= x[..m - 1 - i].iter().product::<f64>();
        if i > 0 {
            v *= 1.0 - x[m - 1 - i];
        }
        f[i] = if inverted { 0.5 * (1.0 + g) - v } else { v };
    }
}

fn sphere_shape(x: &[f64], g: f64, alpha: f64, f: &mut [f64]) {
    let m = f.len();
    let theta = |j: usize| x[j].powf(alpha) * FRAC_PI_2;
    for i in 0..m {
        let mut v = 1.0 + g;
        v *= (0..m - 1 - i).map(|j| theta(j).cos()).product::<f64>();
        if i > 0 {
            v *= theta(m - 1 - i).sin();
        }
        f[i] = v;
    }
}

fn convexify(f: &mut [f64]) {
    let m = f.len();
    for v in &mut f[..m - 1] {
        *v = v.powi(4);
    }
    f[m - 1] = f[m - 1].powi(2);
}

pub(super) fn front_point(shape: &FrontShape, w: &[f64]) -> Vec<f64> {
    let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
    let on_sphere = || w.iter().map(|v| v / norm).collect::<Vec<f64>>();
    match shape {
        FrontShape::LinearSimplex => w.iter().map(|v| 0.5 * v).collect(),
        FrontShape::Sphere => on_sphere(),
        FrontShape::InvertedSimplex => w.iter().map(|v| 0.5 * (1.0 - v)).collect(),
        FrontShape::InvertedSphere => on_sphere().into_iter().map(|v| 1.0 - v).collect(),
        FrontShape::ConvexSphere => {
            let mut s = on_sphere();
            convexify(&mut s);
            s
        }
        FrontShape::WfgConcave => on_sphere().iter().enumerate().map(|(i, v)| 2.0 * (i + 1) as f64 * v).collect(),
        FrontShape::WfgDegenerateLine => wfg_line_point(w[0], w.len()),
    }
}

/// Point of the WFG3 front: first shape variable `t`, the others at 0.5.
pub(super) fn wfg_line_point(t: f64, m: usize) -> Vec<f64> {
    let mut x = vec![0.5; m - 1];
    x[0] = t;
    let mut h = vec![0.0; m];
    linear_shape(&x, &mut h);
    h.iter().enumerate().map(|(i, v)| 2.0 * (i + 1) as f64 * v).collect()
}

pub(super) fn front_nadir(shape: &FrontShape, m: usize) -> Vec<f64> {
    match shape {
        FrontShape::LinearSimplex | FrontShape::InvertedSimplex => vec![0.5; m],
        FrontShape::Sphere | FrontShape::InvertedSphere | FrontShape::ConvexSphere => vec![1.0; m],
        FrontShape::WfgConcave => (1..=m).map(|i| 2.0 * i as f64).collect(),
        FrontShape::WfgDegenerateLine => {
            let (a, b) = (wfg_line_point(0.0, m), wfg_line_point(1.0, m));
            a.iter().zip(&b).map(|(x, y)| x.max(*y)).collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Wfg {
    Three,
    Six,
    Seven,
}

fn correct_to_01(v: f64) -> f64 {
    const EPS: f64 = 1e-10;
    if v < 0.0 && v >= -EPS {
        0.0
    } else if v > 1.0 && v <= 1.0 + EPS {
        1.0
    } else {
        v.clamp(0.0, 1.0)
    }
}

fn s_linear(y: f64, a: f64) -> f64 {
    correct_to_01((y - a).abs() / ((a - y).floor() + a).abs())
}

fn b_param(y: f64, u: f64, a: f64, b: f64, c: f64) -> f64 {
    let v = a - (1.0 - 2.0 * u) * ((0.5 - u).floor() + a).abs();
    correct_to_01(y.powf(b + (c - b) * v))
}

fn r_sum(y: &[f64]) -> f64 {
    correct_to_01(y.iter().sum::<f64>() / y.len() as f64)
}

fn r_nonsep(y: &[f64], a: usize) -> f64 {
    let n = y.len();
    let mut num = 0.0;
    for j in 0..n {
        num += y[j];
        for k in 0..a.saturating_sub(1) {
            num += (y[j] - y[(1 + j + k) % n]).abs();
        }
    }
    let half = a.div_ceil(2) as f64;
    let a = a as f64;
    let den = (n as f64 / a) * half * (1.0 + 2.0 * a - 2.0 * half);
    correct_to_01(num / den)
}

fn linear_shape(x: &[f64], h: &mut [f64]) {
    let m = h.len();
    for i in 0..m {
        let mut v: f64 = x[..m - 1 - i].iter().product();
        if i > 0 {
            v *= 1.0 - x[m - 1 - i];
        }
        h[i] = v;
    }
}

fn concave_shape(x: &[f64], h: &mut [f64]) {
    let m = h.len();
    for i in 0..m {
        let mut v: f64 = x[..m - 1 - i].iter().map(|t| (t * FRAC_PI_2).sin()).product();
        if i > 0 {
            v *= (x[m - 1 - i] * FRAC_PI_2).cos();
        }
        h[i] = v;
    }
}

fn wfg_eval(variant: Wfg, z: &[f64], k: usize, f: &mut [f64]) {
    let m = f.len();
    let n = z.len();
    let l = n - k;
    let gs = k / (m - 1);
    let mut y: Vec<f64> = z.iter().enumerate().map(|(i, v)| v / (2.0 * (i + 1) as f64)).collect();

    let t: Vec<f64> = match variant {
        Wfg::Three => {
            for v in &mut y[k..] {
                *v = s_linear(*v, 0.35);
            }
            let mut y2 = y[..k].to_vec();
            for i in 0..l / 2 {
                y2.push(r_nonsep(&[y[k + 2 * i], y[k + 2 * i + 1]], 2));
            }
            let mut t: Vec<f64> = (0..m - 1).map(|i| r_sum(&y2[i * gs..(i + 1) * gs])).collect();
            t.push(r_sum(&y2[k..]));
            t
        }
        Wfg::Six => {
            for v in &mut y[k..] {
                *v = s_linear(*v, 0.35);
            }
            let mut t: Vec<f64> = (0..m - 1).map(|i| r_nonsep(&y[i * gs..(i + 1) * gs], gs)).collect();
            t.push(r_nonsep(&y[k..], l));
            t
        }
        Wfg::Seven => {
            let orig = y.clone();
            for i in 0..k {
                let u = r_sum(&orig[i + 1..]);
                y[i] = b_param(orig[i], u, 0.98 / 49.98, 0.02, 50.0);
            }
            for v in &mut y[k..] {
                *v = s_linear(*v, 0.35);
            }
            let mut t: Vec<f64> = (0..m - 1).map(|i| r_sum(&y[i * gs..(i + 1) * gs])).collect();
            t.push(r_sum(&y[k..]));
            t
        }
    };

    let last = t[m - 1];
    let x: Vec<f64> = (0..m - 1)
        .map(|i| {
            // WFG3 is degenerate: only the first shape variable keeps A = 1
            let a = if variant == Wfg::Three && i > 0 { 0.0 } else { 1.0 };
            last.max(a) * (t[i] - 0.5) + 0.5
        })
        .collect();
    match variant {
        Wfg::Three => linear_shape(&x, f),
        _ => concave_shape(&x, f),
    }
    for (i, v) in f.iter_mut().enumerate() {
        *v = last + 2.0 * (i + 1) as f64 * *v;
    }
}
