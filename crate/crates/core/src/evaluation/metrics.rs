use crate::error::{Error, Result};
use crate::imgcore::{BinaryMask, BoundingBox};

/// Smallest inclusive box enclosing every foreground pixel.
pub fn mask_bounding_box(mask: &BinaryMask) -> Result<BoundingBox> {
    let (w, h) = mask.dims();
    let mut bounds: Option<(usize, usize, usize, usize)> = None;
    for y in 0..h {
        for x in 0..w {
            if mask.get(x, y) {
                bounds = Some(match bounds {
                    None => (x, y, x, y),
                    Some((x0, y0, x1, y1)) => (x0.min(x), y0.min(y), x1.max(x), y1.max(y)),
                });
            }
        }
    }
    let (x0, y0, x1, y1) = bounds.ok_or(Error::EmptyMask)?;
    BoundingBox::new(x0, y0, x1, y1)
}

/// Intersection over union of the pixel sets covered by two inclusive
/// boxes.
pub fn jaccard_index(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let inter = a.intersection(b).map_or(0, |i| i.area());
    let union = a.area() + b.area() - inter;
    inter as f64 / union as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bb(x0: usize, y0: usize, x1: usize, y1: usize) -> BoundingBox {
        BoundingBox::new(x0, y0, x1, y1).unwrap()
    }

    fn enumeration_oracle(a: &BoundingBox, b: &BoundingBox) -> f64 {
        let (mut inter, mut union) = (0u32, 0u32);
        for y in 0..100 {
            for x in 0..100 {
                let (ia, ib) = (a.contains(x, y), b.contains(x, y));
                inter += u32::from(ia && ib);
                union += u32::from(ia || ib);
            }
        }
        inter as f64 / union as f64
    }

    #[test]
    fn examples() {
        assert_eq!(jaccard_index(&bb(1, 2, 3, 4), &bb(1, 2, 3, 4)), 1.0);
        assert_eq!(jaccard_index(&bb(0, 0, 2, 2), &bb(3, 3, 5, 5)), 0.0);
        let j = jaccard_index(&bb(0, 0, 9, 9), &bb(5, 5, 14, 14));
        assert!((j - 25.0 / 175.0).abs() < 1e-15);
    }

    #[test]
    fn mask_boxes() {
        let one = BinaryMask::from_fn(8, 8, |x, y| (x, y) == (3, 4)).unwrap();
        assert_eq!(mask_bounding_box(&one).unwrap(), bb(3, 4, 3, 4));
        let two = BinaryMask::from_fn(8, 8, |x, y| (x, y) == (1, 1) || (x, y) == (5, 2)).unwrap();
        assert_eq!(mask_bounding_box(&two).unwrap(), bb(1, 1, 5, 2));
        assert!(matches!(
            mask_bounding_box(&BinaryMask::empty(4, 4).unwrap()),
            Err(Error::EmptyMask)
        ));
    }

    fn arb_box() -> impl Strategy<Value = BoundingBox> {
        (0..100usize, 0..100usize, 0..100usize, 0..100usize)
            .prop_map(|(a, b, c, d)| bb(a.min(c), b.min(d), a.max(c), b.max(d)))
    }

    proptest! {
        #[test]
        fn matches_pixel_enumeration(a in arb_box(), b in arb_box()) {
            let j = jaccard_index(&a, &b);
            prop_assert!((j - enumeration_oracle(&a, &b)).abs() < 1e-12);
            prop_assert_eq!(j, jaccard_index(&b, &a));
            prop_assert!((0.0..=1.0).contains(&j));
            prop_assert_eq!(jaccard_index(&a, &a), 1.0);
            prop_assert_eq!(j == 0.0, a.intersection(&b).is_none());
        }

        #[test]
        fn mask_box_matches_scan(
            points in proptest::collection::vec((0..20usize, 0..15usize), 1..12),
        ) {
            let mask = BinaryMask::from_fn(20, 15, |x, y| points.contains(&(x, y))).unwrap();
            let expected = bb(
                points.iter().map(|p| p.0).min().unwrap(),
                points.iter().map(|p| p.1).min().unwrap(),
                points.iter().map(|p| p.0).max().unwrap(),
                points.iter().map(|p| p.1).max().unwrap(),
            );
            prop_assert_eq!(mask_bounding_box(&mask).unwrap(), expected);
        }
    }
}
