use nalgebra::{Point3, Vector3};
use std::collections::{BTreeMap, HashMap};

use super::PointCloud;

type Key = (i64, i64, i64);

fn key(p: &Point3<f64>, size: f64) -> Key {
    (
        (p.x / size).floor() as i64,
        (p.y / size).floor() as i64,
        (p.z / size).floor() as i64,
    )
}

/// Replaces the points of every occupied voxel by their centroid. Output is
/// ordered by voxel index so it does not depend on input order.
pub fn voxel_filter(cloud: &PointCloud, voxel_size: f64) -> PointCloud {
    assert!(voxel_size > 0.0, "voxel size must be positive");
    let mut voxels: BTreeMap<Key, (Vector3<f64>, usize)> = BTreeMap::new();
    for p in &cloud.points {
        let e = voxels
            .entry(key(p, voxel_size))
            .or_insert((Vector3::zeros(), 0));
        e.0 += p.coords;
        e.1 += 1;
    }
    PointCloud {
        points: voxels
            .into_values()
            .map(|(sum, n)| Point3::from(sum / n as f64))
            .collect(),
        frame: cloud.frame,
    }
}

/// Keeps points with at least `min_neighbors` other points within `radius`.
pub fn radius_outlier_removal(cloud: &PointCloud, radius: f64, min_neighbors: usize) -> PointCloud {
    assert!(radius > 0.0, "outlier radius must be positive");
    let mut grid: HashMap<Key, Vec<usize>> = HashMap::new();
    for (i, p) in cloud.points.iter().enumerate() {
        grid.entry(key(p, radius)).or_default().push(i);
    }
    if min_neighbors == 0 {
        return cloud.clone();
    }
    let r2 = radius * radius;
    let keep = |i: usize, p: &Point3<f64>| {
        let (kx, ky, kz) = key(p, radius);
        let mut count = 0;
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    let Some(cell) = grid.get(&(kx + dx, ky + dy, kz + dz)) else {
                        continue;
                    };
                    for &j in cell {
                        if j != i && (cloud.points[j] - p).norm_squared() <= r2 {
                            count += 1;
                            if count >= min_neighbors {
                                return true;
                            }
                        }
                    }
                }
            }
        }
        false
    };
    PointCloud {
        points: cloud
            .points
            .iter()
            .enumerate()
            .filter(|(i, p)| keep(*i, p))
            .map(|(_, p)| *p)
            .collect(),
        frame: cloud.frame,
    }
}
