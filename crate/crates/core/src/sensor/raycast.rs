//! Exact voxel traversal of a line segment (Amanatides & Woo, 1987).

use crate::grid::{CellIndex, SubMap};
use crate::Vec3;

/// Voxels crossed by the segment `origin -> endpoint`, in order, starting at
/// the origin voxel and ending at the endpoint voxel.
///
/// Every step moves to a face neighbor, so the number of steps equals the
/// Manhattan distance between the two end voxels. Restricting the choice to
/// axes that still have steps left keeps rounding from overshooting.
pub fn traverse_ray(grid: &SubMap, origin: &Vec3, endpoint: &Vec3) -> Vec<CellIndex> {
    let mut out = Vec::new();
    traverse_ray_into(grid, origin, endpoint, &mut out);
    out
}

pub(crate) fn traverse_ray_into(grid: &SubMap, origin: &Vec3, endpoint: &Vec3, out: &mut Vec<CellIndex>) {
    out.clear();
    let dir = endpoint - origin;
    if dir.norm_squared() == 0.0 {
        return;
    }
    let v = grid.voxel_size();
    let start = grid.cell_index(origin);
    let end = grid.cell_index(endpoint);
    let local = (origin - grid.origin()) / v;
    let d = dir / v;

    let cur0 = [start.ix, start.iy, start.iz];
    let goal = [end.ix, end.iy, end.iz];
    let mut cur = cur0;
    let mut step = [0i32; 3];
    let mut t_max = [f64::INFINITY; 3];
    let mut t_delta = [f64::INFINITY; 3];
    let mut remaining = [0i32; 3];
    for a in 0..3 {
        remaining[a] = (goal[a] - cur0[a]).abs();
        if remaining[a] == 0 {
            continue;
        }
        step[a] = (goal[a] - cur0[a]).signum();
        let boundary = if step[a] > 0 {
            (cur0[a] + 1) as f64
        } else {
            cur0[a] as f64
        };
        if d[a] != 0.0 {
            t_max[a] = ((boundary - local[a]) / d[a]).max(0.0);
            t_delta[a] = (1.0 / d[a]).abs();
        } else {
            // rounding put the endpoint in another slab; cross it last
            t_max[a] = f64::MAX;
        }
    }

    let steps: i32 = remaining.iter().sum();
    out.reserve(steps as usize + 1);
    out.push(start);
    for _ in 0..steps {
        let mut axis = usize::MAX;
        for a in 0..3 {
            if remaining[a] > 0 && (axis == usize::MAX || t_max[a] < t_max[axis]) {
                axis = a;
            }
        }
        cur[axis] += step[axis];
        remaining[axis] -= 1;
        t_max[axis] += t_delta[axis];
        out.push(CellIndex::new(cur[0], cur[1], cur[2]));
    }
}
