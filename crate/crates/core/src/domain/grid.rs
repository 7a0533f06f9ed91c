//! Uniform cell grid for fixed-radius neighbor queries.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::tensor::Vec3;

type Cell = [i64; 3];

pub struct CellGrid<'a> {
    points: &'a [Vec3],
    cell_size: f64,
    cells: HashMap<Cell, Vec<usize>>,
}

impl<'a> CellGrid<'a> {
    pub fn new(points: &'a [Vec3], cell_size: f64) -> Self {
        assert!(cell_size > 0.0);
        let mut cells: HashMap<Cell, Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            cells.entry(cell_of(p, cell_size)).or_default().push(i);
        }
        Self {
            points,
            cell_size,
            cells,
        }
    }

    /// Visit every indexed point in the 27 cells around `p` (candidates, not distance-filtered).
    fn candidates(&self, p: &Vec3, mut visit: impl FnMut(usize)) {
        let c = cell_of(p, self.cell_size);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(list) = self.cells.get(&[c[0] + dx, c[1] + dy, c[2] + dz]) {
                        list.iter().for_each(|&j| visit(j));
                    }
                }
            }
        }
    }

    /// Squared distance from `p` to the nearest indexed point, if any lies within one cell ring.
    pub fn nearest_distance(&self, p: &Vec3) -> Option<f64> {
        let mut best: Option<f64> = None;
        self.candidates(p, |j| {
            let d = (self.points[j] - p).norm();
            if best.is_none_or(|b| d < b) {
                best = Some(d);
            }
        });
        best
    }

    /// All unordered index pairs `(i, j)`, `i < j`, with separation strictly below `radius`.
    ///
    /// `radius` must not exceed the cell size. Output is sorted.
    pub fn pairs_within(&self, radius: f64) -> Vec<(usize, usize)> {
        assert!(radius <= self.cell_size * (1.0 + 1e-12));
        let per_point: Vec<Vec<(usize, usize)>> = (0..self.points.len())
            .into_par_iter()
            .map(|i| {
                let pi = self.points[i];
                let mut found = Vec::new();
                self.candidates(&pi, |j| {
                    if j > i && (self.points[j] - pi).norm() < radius {
                        found.push((i, j));
                    }
                });
                found.sort_unstable();
                found
            })
            .collect();
        per_point.into_iter().flatten().collect()
    }
}

#[inline]
fn cell_of(p: &Vec3, size: f64) -> Cell {
    [
        (p.x / size).floor() as i64,
        (p.y / size).floor() as i64,
        (p.z / size).floor() as i64,
    ]
}

/// Quadratic-time reference used by tests and small inputs.
pub fn brute_force_pairs(points: &[Vec3], radius: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            if (points[j] - points[i]).norm() < radius {
                out.push((i, j));
            }
        }
    }
    out
}
