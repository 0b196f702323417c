//! Exact 3-D convex hull volume for integer RGB points.

use std::collections::HashSet;

type P = [i64; 3];

fn sub(a: P, b: P) -> P {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: P, b: P) -> P {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: P, b: P) -> i64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Six times the signed volume of tetrahedron `(a, b, c, d)`.
fn orient(a: P, b: P, c: P, d: P) -> i64 {
    dot(cross(sub(b, a), sub(c, a)), sub(d, a))
}

/// Volume of the convex hull of `points`, or `None` when every point lies
/// on one plane. Coordinates must fit in 0..=255 for the integer
/// arithmetic to stay exact.
pub fn hull_volume(points: &[[u8; 3]]) -> Option<f64> {
    let mut pts: Vec<P> = points
        .iter()
        .map(|p| [p[0] as i64, p[1] as i64, p[2] as i64])
        .collect();
    pts.sort_unstable();
    pts.dedup();
    if pts.len() < 4 {
        return None;
    }

    // Initial tetrahedron from the first non-degenerate quadruple.
    let a = pts[0];
    let b = *pts.iter().find(|&&p| p != a)?;
    let c = *pts
        .iter()
        .find(|&&p| cross(sub(b, a), sub(p, a)) != [0, 0, 0])?;
    let d = *pts.iter().find(|&&p| orient(a, b, c, p) != 0)?;

    // Faces are stored so that the hull interior lies on the negative side.
    let mut faces: Vec<[P; 3]> = if orient(a, b, c, d) < 0 {
        vec![[a, b, c], [a, d, b], [b, d, c], [c, d, a]]
    } else {
        vec![[a, c, b], [a, b, d], [b, c, d], [c, a, d]]
    };

    for &p in &pts {
        let visible: Vec<bool> = faces
            .iter()
            .map(|f| orient(f[0], f[1], f[2], p) > 0)
            .collect();
        if !visible.iter().any(|&v| v) {
            continue;
        }
        // Horizon edges: directed edges of visible faces whose twin belongs
        // to a hidden face.
        let visible_edges: HashSet<(P, P)> = faces
            .iter()
            .zip(&visible)
            .filter(|(_, &v)| v)
            .flat_map(|(f, _)| (0..3).map(move |k| (f[k], f[(k + 1) % 3])))
            .collect();
        let mut horizon = Vec::new();
        for (f, _) in faces.iter().zip(&visible).filter(|(_, &v)| v) {
            for k in 0..3 {
                let (u, v) = (f[k], f[(k + 1) % 3]);
                if !visible_edges.contains(&(v, u)) {
                    horizon.push((u, v));
                }
            }
        }
        let mut kept: Vec<[P; 3]> = faces
            .iter()
            .zip(&visible)
            .filter(|(_, &v)| !v)
            .map(|(f, _)| *f)
            .collect();
        kept.extend(horizon.into_iter().map(|(u, v)| [u, v, p]));
        faces = kept;
    }

    // Sum of signed tetrahedra against a fixed reference point.
    let o = pts[0];
    let six_vol: i64 = faces.iter().map(|f| -orient(f[0], f[1], f[2], o)).sum();
    Some(six_vol as f64 / 6.0)
}
