use std::collections::VecDeque;

use super::types::BinaryMask;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Connectivity {
    Four,
    Eight,
}

impl Connectivity {
    fn offsets(self) -> &'static [(isize, isize)] {
        match self {
            Connectivity::Four => &[(0, -1), (-1, 0), (1, 0), (0, 1)],
            Connectivity::Eight => &[
                (-1, -1),
                (0, -1),
                (1, -1),
                (-1, 0),
                (1, 0),
                (-1, 1),
                (0, 1),
                (1, 1),
            ],
        }
    }
}

fn neighbors(
    width: usize,
    height: usize,
    idx: usize,
    conn: Connectivity,
) -> impl Iterator<Item = usize> {
    let x = (idx % width) as isize;
    let y = (idx / width) as isize;
    conn.offsets().iter().filter_map(move |&(dx, dy)| {
        let (nx, ny) = (x + dx, y + dy);
        (nx >= 0 && ny >= 0 && (nx as usize) < width && (ny as usize) < height)
            .then(|| ny as usize * width + nx as usize)
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    /// 1-based; 0 is reserved for background.
    pub id: u32,
    pub area: usize,
    /// Row-major pixel indices in discovery order.
    pub pixels: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct Components {
    pub width: usize,
    pub height: usize,
    pub labels: Vec<u32>,
    pub components: Vec<Component>,
}

/// Labels foreground components. Ids are assigned in raster order of each
/// component's first pixel.
pub fn connected_components(mask: &BinaryMask, conn: Connectivity) -> Components {
    let (width, height) = mask.dims();
    let bits = mask.bits();
    let mut labels = vec![0u32; bits.len()];
    let mut components = Vec::new();
    let mut queue = VecDeque::new();

    for seed in 0..bits.len() {
        if !bits[seed] || labels[seed] != 0 {
            continue;
        }
        let id = components.len() as u32 + 1;
        labels[seed] = id;
        queue.push_back(seed);
        let mut pixels = Vec::new();
        while let Some(p) = queue.pop_front() {
            pixels.push(p);
            for n in neighbors(width, height, p, conn) {
                if bits[n] && labels[n] == 0 {
                    labels[n] = id;
                    queue.push_back(n);
                }
            }
        }
        components.push(Component {
            id,
            area: pixels.len(),
            pixels,
        });
    }

    Components {
        width,
        height,
        labels,
        components,
    }
}

/// Sets every background pixel that cannot reach the image border through
/// 4-connected background to foreground.
pub fn fill_enclosed(mask: &BinaryMask) -> BinaryMask {
    let (width, height) = mask.dims();
    let bits = mask.bits();
    let mut reached = vec![false; bits.len()];
    let mut queue = VecDeque::new();

    let seed = |idx: usize, reached: &mut Vec<bool>, queue: &mut VecDeque<usize>| {
        if !bits[idx] && !reached[idx] {
            reached[idx] = true;
            queue.push_back(idx);
        }
    };
    for x in 0..width {
        seed(x, &mut reached, &mut queue);
        seed((height - 1) * width + x, &mut reached, &mut queue);
    }
    for y in 0..height {
        seed(y * width, &mut reached, &mut queue);
        seed(y * width + width - 1, &mut reached, &mut queue);
    }
    while let Some(p) = queue.pop_front() {
        for n in neighbors(width, height, p, Connectivity::Four) {
            if !bits[n] && !reached[n] {
                reached[n] = true;
                queue.push_back(n);
            }
        }
    }

    let filled = bits
        .iter()
        .zip(&reached)
        .map(|(&fg, &r)| fg || !r)
        .collect();
    BinaryMask::new(width, height, filled).expect("dimensions unchanged")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mask_from(rows: &[&str]) -> BinaryMask {
        let h = rows.len();
        let w = rows[0].len();
        let bits = rows
            .iter()
            .flat_map(|r| r.bytes().map(|b| b == b'#'))
            .collect();
        BinaryMask::new(w, h, bits).unwrap()
    }

    /// Repeated flood fill with an explicit stack, one seed at a time.
    fn flood_oracle(mask: &BinaryMask, eight: bool) -> Vec<u32> {
        let (w, h) = mask.dims();
        let mut labels = vec![0u32; w * h];
        let mut next = 0;
        for sy in 0..h {
            for sx in 0..w {
                if !mask.get(sx, sy) || labels[sy * w + sx] != 0 {
                    continue;
                }
                next += 1;
                let mut stack = vec![(sx as i64, sy as i64)];
                while let Some((x, y)) = stack.pop() {
                    if x < 0 || y < 0 || x >= w as i64 || y >= h as i64 {
                        continue;
                    }
                    let (ux, uy) = (x as usize, y as usize);
                    if !mask.get(ux, uy) || labels[uy * w + ux] != 0 {
                        continue;
                    }
                    labels[uy * w + ux] = next;
                    for dy in -1..=1i64 {
                        for dx in -1..=1i64 {
                            if (dx, dy) == (0, 0) || (!eight && dx != 0 && dy != 0) {
                                continue;
                            }
                            stack.push((x + dx, y + dy));
                        }
                    }
                }
            }
        }
        labels
    }

    #[test]
    fn single_pixel() {
        let m = mask_from(&["...", ".#.", "..."]);
        let cc = connected_components(&m, Connectivity::Four);
        assert_eq!(cc.components.len(), 1);
        assert_eq!(cc.components[0].area, 1);
        assert_eq!(cc.labels[4], 1);
    }

    #[test]
    fn diagonal_pair_depends_on_connectivity() {
        let m = mask_from(&["#.", ".#"]);
        assert_eq!(
            connected_components(&m, Connectivity::Four)
                .components
                .len(),
            2
        );
        assert_eq!(
            connected_components(&m, Connectivity::Eight)
                .components
                .len(),
            1
        );
    }

    #[test]
    fn ring_interior_is_filled() {
        let m = mask_from(&[".....", ".###.", ".#.#.", ".###.", "....."]);
        let f = fill_enclosed(&m);
        assert!(f.get(2, 2));
        assert_eq!(f.count(), 9);
    }

    #[test]
    fn open_curve_keeps_interior() {
        let m = mask_from(&[
            ".......", ".#####.", ".#.....", ".#.....", ".#####.", ".......",
        ]);
        assert_eq!(fill_enclosed(&m), m);
    }

    #[test]
    fn diagonal_gap_does_not_leak_through_four_connected_flood() {
        // Background at (2,2) touches the outside only diagonally.
        let m = mask_from(&["....", ".##.", ".#.#", "..#."]);
        let f = fill_enclosed(&m);
        assert!(f.get(2, 2));
    }

    fn arb_mask(max: usize) -> impl Strategy<Value = BinaryMask> {
        (1..=max, 1..=max).prop_flat_map(|(w, h)| {
            proptest::collection::vec(any::<bool>(), w * h)
                .prop_map(move |bits| BinaryMask::new(w, h, bits).unwrap())
        })
    }

    proptest! {
        #[test]
        fn labels_match_flood_fill(m in arb_mask(8), eight in any::<bool>()) {
            let conn = if eight { Connectivity::Eight } else { Connectivity::Four };
            let cc = connected_components(&m, conn);
            prop_assert_eq!(cc.labels, flood_oracle(&m, eight));
        }

        #[test]
        fn areas_partition_foreground(m in arb_mask(12), eight in any::<bool>()) {
            let conn = if eight { Connectivity::Eight } else { Connectivity::Four };
            let cc = connected_components(&m, conn);
            let total: usize = cc.components.iter().map(|c| c.area).sum();
            prop_assert_eq!(total, m.count());
        }

        #[test]
        fn fill_is_idempotent_and_monotone(m in arb_mask(12)) {
            let once = fill_enclosed(&m);
            prop_assert_eq!(fill_enclosed(&once), once.clone());
            for (a, b) in m.bits().iter().zip(once.bits()) {
                prop_assert!(!a || *b);
            }
        }
    }
}
