//! Exact squared Euclidean distance transform on a unit grid.
//!
//! Separable lower-envelope algorithm (Felzenszwalb and Huttenlocher); all
//! arithmetic is integral, so the output is the exact squared distance.

pub(crate) const FAR: i64 = i64::MAX / 4;

/// Squared distance from every site to the nearest seed.
///
/// `extents` are in row-major order (last axis fastest). Sites with no seed
/// anywhere get `FAR`.
pub(crate) fn squared_distance_transform(extents: &[usize], seeds: &[bool]) -> Vec<i64> {
    let total: usize = extents.iter().product();
    debug_assert_eq!(seeds.len(), total);
    let mut grid: Vec<i64> = seeds.iter().map(|&s| if s { 0 } else { FAR }).collect();

    let mut stride = 1;
    let mut line_in = Vec::new();
    let mut line_out = Vec::new();
    let mut hull = Vec::new();
    for axis in (0..extents.len()).rev() {
        let len = extents[axis];
        let block = stride * len;
        line_in.resize(len, 0);
        line_out.resize(len, 0);
        for base in (0..total).step_by(block) {
            for offset in 0..stride {
                let start = base + offset;
                for (k, v) in line_in.iter_mut().enumerate() {
                    *v = grid[start + k * stride];
                }
                transform_line(&line_in, &mut line_out, &mut hull);
                for (k, v) in line_out.iter().enumerate() {
                    grid[start + k * stride] = *v;
                }
            }
        }
        stride = block;
    }
    grid
}

fn transform_line(f: &[i64], out: &mut [i64], hull: &mut Vec<i64>) {
    let lift = |p: i64| f[p as usize] + p * p;
    hull.clear();
    for q in 0..f.len() as i64 {
        if f[q as usize] >= FAR {
            continue;
        }
        while hull.len() >= 2 {
            let top = hull[hull.len() - 1];
            let prev = hull[hull.len() - 2];
            // Drop `top` when the parabola at q overtakes it no later than
            // `top` overtakes `prev`.
            let lhs = (lift(q) - lift(top)) as i128 * (top - prev) as i128;
            let rhs = (lift(top) - lift(prev)) as i128 * (q - top) as i128;
            if lhs <= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(q);
    }

    if hull.is_empty() {
        out.fill(FAR);
        return;
    }
    let mut k = 0;
    for q in 0..f.len() as i64 {
        while k + 1 < hull.len() {
            let (a, b) = (hull[k], hull[k + 1]);
            // Breakpoint between a and b lies strictly left of q.
            if ((lift(b) - lift(a)) as i128) < 2 * q as i128 * (b - a) as i128 {
                k += 1;
            } else {
                break;
            }
        }
        let p = hull[k];
        out[q as usize] = f[p as usize] + (q - p) * (q - p);
    }
}
