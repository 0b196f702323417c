//! Color spatial distribution: fit a Gaussian mixture to pixel colors and
//! score each pixel by how spatially compact its color components are.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgcore::{normalize_unit, ProbabilityMap, RasterImage};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpatialParams {
    pub components: usize,
    pub max_iterations: usize,
    pub kmeans_iterations: usize,
    /// Lower bound on every per-channel variance, colors scaled to [0, 1].
    pub variance_floor: f64,
    pub seed: u64,
}

impl Default for SpatialParams {
    fn default() -> Self {
        Self {
            components: 5,
            max_iterations: 50,
            kmeans_iterations: 10,
            variance_floor: 1e-4,
            seed: 42,
        }
    }
}

/// Diagonal-covariance mixture over RGB colors in `[0, 1]^3`.
#[derive(Clone, Debug, PartialEq)]
pub struct GmmColorModel {
    pub weights: Vec<f64>,
    pub means: Vec<[f64; 3]>,
    pub variances: Vec<[f64; 3]>,
    /// Row-major `pixels x components` posteriors.
    pub responsibilities: Vec<f64>,
    pub iterations: usize,
}

impl GmmColorModel {
    pub fn components(&self) -> usize {
        self.weights.len()
    }

    pub fn responsibility(&self, pixel: usize, component: usize) -> f64 {
        self.responsibilities[pixel * self.components() + component]
    }
}

fn scaled(c: [u8; 3]) -> [f64; 3] {
    [
        c[0] as f64 / 255.0,
        c[1] as f64 / 255.0,
        c[2] as f64 / 255.0,
    ]
}

fn dist2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (0..3).map(|d| (a[d] - b[d]).powi(2)).sum()
}

/// Writes normalized posteriors of one color into `out` and returns the
/// color's log-likelihood.
fn posterior(
    x: &[f64; 3],
    weights: &[f64],
    means: &[[f64; 3]],
    vars: &[[f64; 3]],
    out: &mut [f64],
) -> f64 {
    const LN_2PI: f64 = 1.837_877_066_409_345_5;
    let mut top = f64::NEG_INFINITY;
    for c in 0..weights.len() {
        let mut lp = weights[c].ln();
        for d in 0..3 {
            lp -= 0.5 * (LN_2PI + vars[c][d].ln() + (x[d] - means[c][d]).powi(2) / vars[c][d]);
        }
        out[c] = lp;
        top = top.max(lp);
    }
    let mut total = 0.0;
    for v in out.iter_mut() {
        *v = (*v - top).exp();
        total += *v;
    }
    for v in out.iter_mut() {
        *v /= total;
    }
    top + total.ln()
}

pub fn fit_color_gmm(img: &RasterImage, params: &SpatialParams) -> Result<GmmColorModel> {
    if params.components == 0 {
        return Err(Error::Config("mixture needs at least one component".into()));
    }

    // Distinct colors with multiplicities; EM runs on these.
    let mut index_of: HashMap<[u8; 3], usize> = HashMap::new();
    let mut colors: Vec<[u8; 3]> = img.pixels().to_vec();
    colors.sort_unstable();
    colors.dedup();
    for (i, c) in colors.iter().enumerate() {
        index_of.insert(*c, i);
    }
    let pixel_color: Vec<usize> = img.pixels().iter().map(|c| index_of[c]).collect();
    let mut counts = vec![0.0f64; colors.len()];
    for &i in &pixel_color {
        counts[i] += 1.0;
    }
    let xs: Vec<[f64; 3]> = colors.iter().map(|&c| scaled(c)).collect();
    let total: f64 = counts.iter().sum();
    let k = params.components.min(xs.len());

    // Farthest-point seeding from a seeded first pick.
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut means = vec![xs[rng.gen_range(0..xs.len())]];
    let mut nearest: Vec<f64> = xs.iter().map(|x| dist2(x, &means[0])).collect();
    while means.len() < k {
        let far = (0..xs.len()).fold(0, |b, i| if nearest[i] > nearest[b] { i } else { b });
        means.push(xs[far]);
        for (n, x) in nearest.iter_mut().zip(&xs) {
            *n = n.min(dist2(x, &xs[far]));
        }
    }

    let assign = |means: &[[f64; 3]]| -> Vec<usize> {
        xs.iter()
            .map(|x| {
                (0..means.len()).fold(0, |b, c| {
                    if dist2(x, &means[c]) < dist2(x, &means[b]) {
                        c
                    } else {
                        b
                    }
                })
            })
            .collect()
    };
    for _ in 0..params.kmeans_iterations {
        let labels = assign(&means);
        let mut sums = vec![[0.0; 3]; k];
        let mut mass = vec![0.0; k];
        for ((x, &l), &n) in xs.iter().zip(&labels).zip(&counts) {
            mass[l] += n;
            for d in 0..3 {
                sums[l][d] += n * x[d];
            }
        }
        for c in 0..k {
            if mass[c] > 0.0 {
                means[c] = sums[c].map(|s| s / mass[c]);
            }
        }
    }

    let floor = params.variance_floor;
    let labels = assign(&means);
    let mut weights = vec![0.0; k];
    let mut vars = vec![[0.0; 3]; k];
    for ((x, &l), &n) in xs.iter().zip(&labels).zip(&counts) {
        weights[l] += n;
        for d in 0..3 {
            vars[l][d] += n * (x[d] - means[l][d]).powi(2);
        }
    }
    for c in 0..k {
        for v in vars[c].iter_mut() {
            *v = if weights[c] > 0.0 {
                *v / weights[c]
            } else {
                0.0
            }
            .max(floor);
        }
        weights[c] = (weights[c] / total).max(f64::MIN_POSITIVE);
    }

    let mut resp = vec![0.0; xs.len() * k];
    let mut last_ll = f64::NEG_INFINITY;
    let mut iterations = 0;
    for _ in 0..params.max_iterations {
        iterations += 1;
        let mut ll = 0.0;
        for (i, x) in xs.iter().enumerate() {
            ll += counts[i] * posterior(x, &weights, &means, &vars, &mut resp[i * k..(i + 1) * k]);
        }

        let mut mass = vec![0.0; k];
        let mut sums = vec![[0.0; 3]; k];
        for (i, x) in xs.iter().enumerate() {
            for c in 0..k {
                let r = counts[i] * resp[i * k + c];
                mass[c] += r;
                for d in 0..3 {
                    sums[c][d] += r * x[d];
                }
            }
        }
        for c in 0..k {
            if mass[c] > 1e-12 {
                means[c] = sums[c].map(|s| s / mass[c]);
            }
        }
        let mut sq = vec![[0.0; 3]; k];
        for (i, x) in xs.iter().enumerate() {
            for c in 0..k {
                let r = counts[i] * resp[i * k + c];
                for d in 0..3 {
                    sq[c][d] += r * (x[d] - means[c][d]).powi(2);
                }
            }
        }
        for c in 0..k {
            if mass[c] > 1e-12 {
                vars[c] = sq[c].map(|s| (s / mass[c]).max(floor));
            }
            weights[c] = (mass[c] / total).max(f64::MIN_POSITIVE);
        }
        let wsum: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= wsum);

        if (ll - last_ll).abs() <= 1e-9 * total {
            break;
        }
        last_ll = ll;
    }

    for (i, x) in xs.iter().enumerate() {
        posterior(x, &weights, &means, &vars, &mut resp[i * k..(i + 1) * k]);
    }
    let mut responsibilities = Vec::with_capacity(pixel_color.len() * k);
    for &ci in &pixel_color {
        responsibilities.extend_from_slice(&resp[ci * k..(ci + 1) * k]);
    }

    Ok(GmmColorModel {
        weights,
        means,
        variances: vars,
        responsibilities,
        iterations,
    })
}

/// Responsibility-weighted horizontal plus vertical variance of pixel
/// coordinates, per component. `None` for components with no mass.
pub fn component_spatial_variance(model: &GmmColorModel, width: usize) -> Vec<Option<f64>> {
    let k = model.components();
    let n = model.responsibilities.len() / k;
    let mut mass = vec![0.0; k];
    let mut mx = vec![0.0; k];
    let mut my = vec![0.0; k];
    for i in 0..n {
        let (x, y) = ((i % width) as f64, (i / width) as f64);
        for c in 0..k {
            let r = model.responsibility(i, c);
            mass[c] += r;
            mx[c] += r * x;
            my[c] += r * y;
        }
    }
    for c in 0..k {
        if mass[c] > 0.0 {
            mx[c] /= mass[c];
            my[c] /= mass[c];
        }
    }
    let mut var = vec![0.0; k];
    for i in 0..n {
        let (x, y) = ((i % width) as f64, (i / width) as f64);
        for c in 0..k {
            let r = model.responsibility(i, c);
            var[c] += r * ((x - mx[c]).powi(2) + (y - my[c]).powi(2));
        }
    }
    (0..k)
        .map(|c| (mass[c] > 1e-12).then(|| var[c] / mass[c]))
        .collect()
}

pub fn color_spatial_distribution(
    img: &RasterImage,
    params: &SpatialParams,
) -> Result<ProbabilityMap> {
    let model = fit_color_gmm(img, params)?;
    let k = model.components();
    let variance = component_spatial_variance(&model, img.width());

    let present: Vec<f64> = variance.iter().flatten().copied().collect();
    let lo = present.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = present.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let normalized: Vec<f64> = variance
        .iter()
        .map(|v| match v {
            Some(v) if hi > lo => (v - lo) / (hi - lo),
            Some(_) => 0.0,
            None => 1.0,
        })
        .collect();

    let n = img.width() * img.height();
    let raw = (0..n)
        .map(|i| {
            (0..k)
                .map(|c| model.responsibility(i, c) * (1.0 - normalized[c]))
                .sum()
        })
        .collect();
    normalize_unit(img.width(), img.height(), raw)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_color() -> RasterImage {
        RasterImage::from_fn(32, 32, |x, y| {
            if (6..10).contains(&x) && (20..24).contains(&y) {
                [230, 200, 20]
            } else {
                [20, 60, 140]
            }
        })
        .unwrap()
    }

    #[test]
    fn single_color_is_all_zero() {
        let img = RasterImage::filled(16, 12, [50, 60, 70]).unwrap();
        let model = fit_color_gmm(&img, &SpatialParams::default()).unwrap();
        assert_eq!(model.components(), 1);
        let map = color_spatial_distribution(&img, &SpatialParams::default()).unwrap();
        assert!(map.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn compact_color_outranks_spread_color() {
        let img = two_color();
        let p = SpatialParams {
            components: 2,
            ..Default::default()
        };
        let model = fit_color_gmm(&img, &p).unwrap();

        // Posteriors are essentially hard: each color owns one component.
        let a = 20 * 32 + 6;
        let b = 0;
        let ca = (0..2).fold(0, |m, c| {
            if model.responsibility(a, c) > model.responsibility(a, m) {
                c
            } else {
                m
            }
        });
        assert!(model.responsibility(a, ca) > 1.0 - 1e-9);
        assert!(model.responsibility(b, 1 - ca) > 1.0 - 1e-9);

        // Direct variance formula: a 4x4 block has 2 * (16 - 1) / 12 = 2.5.
        let v = component_spatial_variance(&model, 32);
        assert!((v[ca].unwrap() - 2.5).abs() < 1e-6);
        assert!(v[1 - ca].unwrap() > 100.0);

        let map = color_spatial_distribution(&img, &p).unwrap();
        let min_a = (0..1024)
            .filter(|&i| img.pixels()[i] == [230, 200, 20])
            .map(|i| map.values()[i])
            .fold(f64::INFINITY, f64::min);
        let max_b = (0..1024)
            .filter(|&i| img.pixels()[i] != [230, 200, 20])
            .map(|i| map.values()[i])
            .fold(0.0, f64::max);
        assert!(min_a > max_b);
    }

    #[test]
    fn posteriors_and_weights_sum_to_one() {
        let img = RasterImage::from_fn(20, 15, |x, y| {
            [(x * 13) as u8, (y * 17) as u8, ((x * y) % 256) as u8]
        })
        .unwrap();
        let model = fit_color_gmm(&img, &SpatialParams::default()).unwrap();
        assert_eq!(model.components(), 5);
        assert!((model.weights.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        for i in 0..300 {
            let s: f64 = (0..5).map(|c| model.responsibility(i, c)).sum();
            assert!((s - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let img = RasterImage::from_fn(20, 15, |x, y| [(x * 29) as u8, (y * 3) as u8, 77]).unwrap();
        let p = SpatialParams::default();
        let a = color_spatial_distribution(&img, &p).unwrap();
        let b = color_spatial_distribution(&img, &p).unwrap();
        assert_eq!(
            a.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            b.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn zero_components_is_a_config_error() {
        let img = two_color();
        let p = SpatialParams {
            components: 0,
            ..Default::default()
        };
        assert!(matches!(fit_color_gmm(&img, &p), Err(Error::Config(_))));
    }
}
