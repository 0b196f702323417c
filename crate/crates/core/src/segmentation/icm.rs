use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::imgcore::{check_same_dims, RasterImage};
use crate::saliency::SaliencyStack;

use super::energy::{color_dist2, total_energy, EnergyModel, Labeling};

pub const DEFAULT_MAX_PASSES: usize = 100;

/// Relative margin a flip must beat. Local deltas that are mathematically
/// zero can come out a few ulps below zero; without a margin such a pixel
/// would flip back and forth forever.
const FLIP_MARGIN: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IcmReport {
    pub initial_energy: f64,
    pub final_energy: f64,
    pub passes: usize,
    pub flips: usize,
    /// False when `max_passes` was reached while flips were still happening.
    pub converged: bool,
    /// Total energy after each pass.
    #[serde(skip)]
    pub pass_energies: Vec<f64>,
}

/// One accepted flip, reported to [`icm_refine_observed`] after the label
/// has been changed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlipEvent {
    pub pass: usize,
    pub x: usize,
    pub y: usize,
    /// Energy change computed locally; always negative.
    pub delta: f64,
}

/// Precomputed unary and pairwise terms.
struct Terms {
    width: usize,
    height: usize,
    /// Data cost of background / salient, per pixel.
    cost: Vec<[f64; 2]>,
    /// Boundary weight between `i` and `i + 1`.
    right: Vec<f64>,
    /// Boundary weight between `i` and `i + width`.
    down: Vec<f64>,
    margin: f64,
}

impl Terms {
    fn new(stack: &SaliencyStack, img: &RasterImage, model: &EnergyModel) -> Self {
        let (w, h) = stack.dims();
        let mut cost = vec![[0.0; 2]; w * h];
        for layer in stack.layers() {
            for (c, &f) in cost.iter_mut().zip(layer.map.values()) {
                c[0] += layer.weight * f;
                c[1] += layer.weight * (1.0 - f);
            }
        }
        let weight = |a: [u8; 3], b: [u8; 3]| {
            model.pairwise_strength * (-model.color_decay * color_dist2(a, b)).exp()
        };
        let px = img.pixels();
        let right = (0..w * h)
            .map(|i| {
                if i % w + 1 < w {
                    weight(px[i], px[i + 1])
                } else {
                    0.0
                }
            })
            .collect();
        let down = (0..w * h)
            .map(|i| {
                if i + w < w * h {
                    weight(px[i], px[i + w])
                } else {
                    0.0
                }
            })
            .collect();
        let scale = stack.total_weight() + 4.0 * model.pairwise_strength;
        Self {
            width: w,
            height: h,
            cost,
            right,
            down,
            margin: FLIP_MARGIN * scale,
        }
    }

    /// Energy change of flipping pixel `i` in `labels`.
    fn flip_delta(&self, labels: &[bool], i: usize) -> f64 {
        let (w, x, y) = (self.width, i % self.width, i / self.width);
        let a = labels[i];
        let mut delta = self.cost[i][usize::from(!a)] - self.cost[i][usize::from(a)];
        // A neighbor with the same label gains a boundary; one with the
        // other label loses it.
        let mut edge = |j: usize, weight: f64| {
            delta += if labels[j] == a { weight } else { -weight };
        };
        if x > 0 {
            edge(i - 1, self.right[i - 1]);
        }
        if x + 1 < w {
            edge(i + 1, self.right[i]);
        }
        if y > 0 {
            edge(i - w, self.down[i - w]);
        }
        if y + 1 < self.height {
            edge(i + w, self.down[i]);
        }
        delta
    }
}

/// Iterated conditional modes: raster-order passes that flip every pixel
/// whose flip strictly lowers the energy, until a pass flips nothing or
/// `max_passes` is reached.
pub fn icm_refine(
    stack: &SaliencyStack,
    init: &Labeling,
    img: &RasterImage,
    model: &EnergyModel,
    max_passes: usize,
) -> Result<(Labeling, IcmReport)> {
    icm_refine_observed(stack, init, img, model, max_passes, |_, _| {})
}

/// [`icm_refine`] with a callback invoked after every accepted flip.
pub fn icm_refine_observed(
    stack: &SaliencyStack,
    init: &Labeling,
    img: &RasterImage,
    model: &EnergyModel,
    max_passes: usize,
    mut observe: impl FnMut(&FlipEvent, &Labeling),
) -> Result<(Labeling, IcmReport)> {
    check_same_dims(stack.dims(), init.dims())?;
    check_same_dims(stack.dims(), img.dims())?;
    let terms = Terms::new(stack, img, model);
    let initial_energy = total_energy(stack, init, img, model)?;

    let mut labeling = init.clone();
    let (mut passes, mut flips, mut converged) = (0, 0, false);
    let mut pass_energies = Vec::new();
    while passes < max_passes {
        passes += 1;
        let mut pass_flips = 0;
        for i in 0..terms.width * terms.height {
            let delta = terms.flip_delta(labeling.labels(), i);
            if delta < -terms.margin {
                let (x, y) = (i % terms.width, i / terms.width);
                labeling.set(x, y, !labeling.get(x, y));
                pass_flips += 1;
                observe(
                    &FlipEvent {
                        pass: passes,
                        x,
                        y,
                        delta,
                    },
                    &labeling,
                );
            }
        }
        flips += pass_flips;
        pass_energies.push(total_energy(stack, &labeling, img, model)?);
        if pass_flips == 0 {
            converged = true;
            break;
        }
    }

    let final_energy = pass_energies.last().copied().unwrap_or(initial_energy);
    log::debug!(
        "icm: {passes} passes, {flips} flips, energy {initial_energy:.6} -> {final_energy:.6}"
    );
    Ok((
        labeling,
        IcmReport {
            initial_energy,
            final_energy,
            passes,
            flips,
            converged,
            pass_energies,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imgcore::ProbabilityMap;
    use crate::saliency::{MapKind, SaliencyLayer};
    use crate::segmentation::energy::first_order_labeling;
    use proptest::prelude::*;

    fn stack_of(w: usize, h: usize, maps: &[(Vec<f64>, f64)]) -> SaliencyStack {
        let layers = maps
            .iter()
            .zip(MapKind::ALL)
            .map(|((values, weight), kind)| SaliencyLayer {
                kind,
                map: ProbabilityMap::new(w, h, values.clone()).unwrap(),
                weight: *weight,
            })
            .collect();
        SaliencyStack::new(layers).unwrap()
    }

    #[test]
    fn two_pixel_local_minimum_survives() {
        let s = stack_of(2, 1, &[(vec![0.9, 0.1], 1.0)]);
        let img = RasterImage::filled(2, 1, [10, 10, 10]).unwrap();
        let m = EnergyModel::new(0.5, 1.0).unwrap();
        let init = Labeling::new(2, 1, vec![true, false]).unwrap();
        let (out, report) = icm_refine(&s, &init, &img, &m, DEFAULT_MAX_PASSES).unwrap();
        assert_eq!(out, init);
        assert_eq!((report.flips, report.passes), (0, 1));
        assert!(report.converged);
        assert!((report.final_energy - 0.7).abs() < 1e-12);
    }

    #[test]
    fn isolated_pixel_is_absorbed() {
        // Weak evidence for one pixel inside a strongly tied background.
        let mut f = vec![0.0; 9];
        f[4] = 0.6;
        let s = stack_of(3, 3, &[(f, 1.0)]);
        let img = RasterImage::filled(3, 3, [50; 3]).unwrap();
        let m = EnergyModel::new(1.0, 1.0).unwrap();
        let init = first_order_labeling(&s);
        assert_eq!(init.count_salient(), 1);
        let (out, report) = icm_refine(&s, &init, &img, &m, DEFAULT_MAX_PASSES).unwrap();
        assert_eq!(out.count_salient(), 0);
        assert_eq!(report.flips, 1);
        assert!(report.final_energy < report.initial_energy);
    }

    #[test]
    fn capped_run_reports_not_converged() {
        let mut f = vec![0.0; 9];
        f[4] = 0.6;
        let s = stack_of(3, 3, &[(f, 1.0)]);
        let img = RasterImage::filled(3, 3, [50; 3]).unwrap();
        let m = EnergyModel::new(1.0, 1.0).unwrap();
        let (_, report) = icm_refine(&s, &first_order_labeling(&s), &img, &m, 1).unwrap();
        assert_eq!(report.passes, 1);
        assert!(!report.converged);
    }

    fn energy_of(s: &SaliencyStack, img: &RasterImage, m: &EnergyModel, bits: u32) -> f64 {
        let labels = (0..9).map(|i| bits >> i & 1 == 1).collect();
        total_energy(s, &Labeling::new(3, 3, labels).unwrap(), img, m).unwrap()
    }

    fn instance() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<[u8; 3]>, f64, f64)> {
        (
            proptest::collection::vec(0.0..=1.0f64, 9),
            proptest::collection::vec(0.0..=1.0f64, 9),
            proptest::collection::vec(any::<[u8; 3]>(), 9),
            0.0..3.0f64,
            0.1..10.0f64,
        )
    }

    proptest! {
        #[test]
        fn ends_in_single_flip_local_minimum((f1, f2, colors, gamma, beta) in instance()) {
            let s = stack_of(3, 3, &[(f1, 1.0), (f2, 2.0)]);
            let img = RasterImage::new(3, 3, colors).unwrap();
            let m = EnergyModel::new(gamma, beta).unwrap();
            let init = first_order_labeling(&s);
            let (out, report) = icm_refine(&s, &init, &img, &m, 10_000).unwrap();
            prop_assert!(report.converged);
            let bits = out.labels().iter().enumerate().fold(0u32, |b, (i, &l)| b | (l as u32) << i);
            let e = energy_of(&s, &img, &m, bits);
            prop_assert!((e - report.final_energy).abs() < 1e-9);
            for i in 0..9 {
                prop_assert!(energy_of(&s, &img, &m, bits ^ 1 << i) >= e - 1e-9);
            }
            prop_assert!(report.final_energy <= report.initial_energy + 1e-12);
        }

        #[test]
        fn local_delta_matches_recomputation((f1, f2, colors, gamma, beta) in instance()) {
            let s = stack_of(3, 3, &[(f1, 1.0), (f2, 0.5)]);
            let img = RasterImage::new(3, 3, colors).unwrap();
            let m = EnergyModel::new(gamma, beta).unwrap();
            let init = Labeling::uniform(3, 3, true).unwrap();
            let mut before = total_energy(&s, &init, &img, &m).unwrap();
            let mut worst: f64 = 0.0;
            icm_refine_observed(&s, &init, &img, &m, 10_000, |ev, l| {
                let after = total_energy(&s, l, &img, &m).unwrap();
                worst = worst.max((after - before - ev.delta).abs());
                before = after;
            }).unwrap();
            prop_assert!(worst < 1e-9);
        }

        #[test]
        fn common_scaling_keeps_the_result(
            (f1, f2, colors, gamma, beta) in instance(),
            scale in 0.01..100.0f64,
        ) {
            let img = RasterImage::new(3, 3, colors).unwrap();
            let a = stack_of(3, 3, &[(f1.clone(), 1.0), (f2.clone(), 2.0)]);
            let b = stack_of(3, 3, &[(f1, scale), (f2, 2.0 * scale)]);
            let ma = EnergyModel::new(gamma, beta).unwrap();
            let mb = EnergyModel::new(gamma * scale, beta).unwrap();
            let la = first_order_labeling(&a);
            prop_assert_eq!(&la, &first_order_labeling(&b));
            let (ra, _) = icm_refine(&a, &la, &img, &ma, 10_000).unwrap();
            let (rb, _) = icm_refine(&b, &la, &img, &mb, 10_000).unwrap();
            prop_assert_eq!(ra, rb);
        }
    }
}
