use std::collections::BTreeMap;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::hyperplane::{dedup, Hyperplane};
use crate::error::{domain, Result};
use crate::rng;

/// Minimum distance from a witness to every hyperplane and box face.
pub const TAU_MARGIN: f64 = 1e-8;
/// Orientation tolerance for planar splitting.
pub const TAU_GEOM: f64 = 1e-10;

/// Hyperplanes restricted to an axis-aligned box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Arrangement {
    pub hyperplanes: Vec<Hyperplane>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

/// A full-dimensional face, identified by its side of every hyperplane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    /// `+1` / `−1` per hyperplane of the arrangement.
    pub sign_vector: Vec<i8>,
    pub witness: Vec<f64>,
    /// Distance from the witness to the nearest hyperplane or box face.
    pub margin: f64,
    /// Vertices in counter-clockwise order (planar enumeration only; endpoints in 1D).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub polygon: Option<Vec<Vec<f64>>>,
}

/// Cells found by exact enumeration; cells narrower than [`TAU_MARGIN`] are set aside.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct CellEnumeration {
    pub cells: Vec<Cell>,
    pub thin: Vec<Cell>,
}

impl Arrangement {
    /// Deduplicates the hyperplanes and validates the box.
    pub fn new(hyperplanes: Vec<Hyperplane>, lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return domain("box: lo and hi must have the same non-zero length");
        }
        for i in 0..lo.len() {
            if !(lo[i].is_finite() && hi[i].is_finite() && lo[i] < hi[i]) {
                return domain(format!("box: coordinate {i} needs finite lo < hi, got [{}, {}]", lo[i], hi[i]));
            }
        }
        if let Some(h) = hyperplanes.iter().find(|h| h.dim() != lo.len()) {
            return domain(format!("hyperplane '{}' has dimension {}, box has {}", h.label, h.dim(), lo.len()));
        }
        Ok(Self { hyperplanes: dedup(hyperplanes), lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn len(&self) -> usize {
        self.hyperplanes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hyperplanes.is_empty()
    }

    pub fn sign_vector(&self, p: &[f64]) -> Vec<i8> {
        self.hyperplanes.iter().map(|h| if h.eval(p) > 0.0 { 1 } else { -1 }).collect()
    }

    /// Distance from `p` to the nearest hyperplane or box face.
    pub fn margin(&self, p: &[f64]) -> f64 {
        let box_margin = (0..self.dim()).map(|i| (p[i] - self.lo[i]).min(self.hi[i] - p[i])).fold(f64::INFINITY, f64::min);
        self.hyperplanes.iter().map(|h| h.signed_distance(p).abs()).fold(box_margin, f64::min)
    }

    /// Distance from `p` to the nearest face of the region described by `signs`, or a
    /// negative number when `p` lies outside that region.
    pub fn cell_margin(&self, signs: &[i8], p: &[f64]) -> f64 {
        let box_margin = (0..self.dim()).map(|i| (p[i] - self.lo[i]).min(self.hi[i] - p[i])).fold(f64::INFINITY, f64::min);
        self.hyperplanes
            .iter()
            .zip(signs)
            .map(|(h, &s)| s as f64 * h.signed_distance(p))
            .fold(box_margin, f64::min)
    }

    fn make_cell(&self, sign_vector: Vec<i8>, witness: Vec<f64>, polygon: Option<Vec<Vec<f64>>>) -> Cell {
        let margin = self.cell_margin(&sign_vector, &witness);
        Cell { sign_vector, witness, margin, polygon }
    }
}

fn split_result(cells: Vec<Cell>) -> CellEnumeration {
    let (cells, thin) = cells.into_iter().partition(|c| c.margin >= TAU_MARGIN);
    CellEnumeration { cells, thin }
}

/// Exact cells of a 1- or 2-dimensional arrangement.
pub fn enumerate_cells(arr: &Arrangement) -> Result<CellEnumeration> {
    match arr.dim() {
        1 => Ok(enumerate_cells_1d(arr)),
        2 => Ok(enumerate_cells_2d(arr)),
        d => domain(format!("exact cell enumeration needs d ≤ 2, got d = {d}")),
    }
}

/// Intervals of the line cut by the points `a·x = b`.
pub fn enumerate_cells_1d(arr: &Arrangement) -> CellEnumeration {
    let (lo, hi) = (arr.lo[0], arr.hi[0]);
    let mut cuts: Vec<f64> = arr
        .hyperplanes
        .iter()
        .map(|h| h.offset / h.normal[0])
        .filter(|&x| x > lo + TAU_GEOM && x < hi - TAU_GEOM)
        .collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() <= TAU_GEOM);
    let mut ends = vec![lo];
    ends.extend(cuts);
    ends.push(hi);
    let cells = ends
        .windows(2)
        .map(|w| {
            let mid = vec![0.5 * (w[0] + w[1])];
            arr.make_cell(arr.sign_vector(&mid), mid, Some(vec![vec![w[0]], vec![w[1]]]))
        })
        .collect();
    split_result(cells)
}

type Poly = Vec<[f64; 2]>;

fn area_centroid(poly: &Poly) -> (f64, [f64; 2]) {
    let mut a = 0.0;
    let (mut cx, mut cy) = (0.0, 0.0);
    for k in 0..poly.len() {
        let p = poly[k];
        let q = poly[(k + 1) % poly.len()];
        let cross = p[0] * q[1] - q[0] * p[1];
        a += cross;
        cx += (p[0] + q[0]) * cross;
        cy += (p[1] + q[1]) * cross;
    }
    a *= 0.5;
    if a.abs() < 1e-300 {
        let n = poly.len() as f64;
        let mean = [poly.iter().map(|p| p[0]).sum::<f64>() / n, poly.iter().map(|p| p[1]).sum::<f64>() / n];
        return (0.0, mean);
    }
    (a, [cx / (6.0 * a), cy / (6.0 * a)])
}

/// Splits a convex polygon by `h`; returns the `(+, −)` pieces (either may be empty).
fn split(poly: &Poly, h: &Hyperplane) -> (Poly, Poly) {
    let norm = h.norm();
    let s: Vec<f64> = poly.iter().map(|p| (h.normal[0] * p[0] + h.normal[1] * p[1] - h.offset) / norm).collect();
    let (mut pos, mut neg) = (Vec::new(), Vec::new());
    for k in 0..poly.len() {
        let (p, sp) = (poly[k], s[k]);
        let next = (k + 1) % poly.len();
        let (q, sq) = (poly[next], s[next]);
        if sp >= -TAU_GEOM {
            pos.push(p);
        }
        if sp <= TAU_GEOM {
            neg.push(p);
        }
        if (sp > TAU_GEOM && sq < -TAU_GEOM) || (sp < -TAU_GEOM && sq > TAU_GEOM) {
            let t = sp / (sp - sq);
            let x = [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])];
            pos.push(x);
            neg.push(x);
        }
    }
    (pos, neg)
}

/// Exact planar enumeration by successive convex splitting of the box.
pub fn enumerate_cells_2d(arr: &Arrangement) -> CellEnumeration {
    let (lo, hi) = (&arr.lo, &arr.hi);
    let square: Poly = vec![[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]];
    let mut pieces: Vec<(Poly, Vec<i8>)> = vec![(square, Vec::with_capacity(arr.len()))];
    for h in &arr.hyperplanes {
        let mut next = Vec::with_capacity(pieces.len() + 8);
        for (poly, signs) in pieces {
            let norm = h.norm();
            let (mut smin, mut smax) = (f64::INFINITY, f64::NEG_INFINITY);
            for p in &poly {
                let s = (h.normal[0] * p[0] + h.normal[1] * p[1] - h.offset) / norm;
                smin = smin.min(s);
                smax = smax.max(s);
            }
            if smin >= -TAU_GEOM || smax <= TAU_GEOM {
                let side = if smin >= -TAU_GEOM && smax > TAU_GEOM {
                    1
                } else if smax <= TAU_GEOM && smin < -TAU_GEOM {
                    -1
                } else {
                    // Degenerate sliver lying on the line: orient by its centroid.
                    if h.eval(&area_centroid(&poly).1) > 0.0 { 1 } else { -1 }
                };
                let mut s = signs;
                s.push(side);
                next.push((poly, s));
                continue;
            }
            let (pos, neg) = split(&poly, h);
            for (piece, side) in [(pos, 1i8), (neg, -1i8)] {
                if piece.len() >= 3 {
                    let mut s = signs.clone();
                    s.push(side);
                    next.push((piece, s));
                }
            }
        }
        pieces = next;
    }
    let cells = pieces
        .into_iter()
        .map(|(poly, signs)| {
            let (_, c) = area_centroid(&poly);
            let polygon = poly.iter().map(|p| p.to_vec()).collect();
            arr.make_cell(signs, c.to_vec(), Some(polygon))
        })
        .collect();
    split_result(cells)
}

/// Distinct sign vectors hit by uniform points in the box, with one witness each.
/// Points closer than [`TAU_MARGIN`] to a hyperplane or face are discarded and redrawn.
pub fn sample_cells(arr: &Arrangement, probes: usize, seed: u64) -> Vec<Cell> {
    const CHUNK: usize = 1024;
    let d = arr.dim();
    let chunks = probes.div_ceil(CHUNK);
    let found: Vec<BTreeMap<Vec<i8>, (Vec<f64>, f64)>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut r = rng::rng(rng::split(seed, c as u64));
            let want = CHUNK.min(probes - c * CHUNK);
            let mut map: BTreeMap<Vec<i8>, (Vec<f64>, f64)> = BTreeMap::new();
            let (mut accepted, mut attempts) = (0, 0);
            while accepted < want && attempts < 20 * want {
                attempts += 1;
                let p: Vec<f64> = (0..d).map(|i| arr.lo[i] + r.random::<f64>() * (arr.hi[i] - arr.lo[i])).collect();
                let margin = arr.margin(&p);
                if margin < TAU_MARGIN {
                    continue;
                }
                accepted += 1;
                let e = map.entry(arr.sign_vector(&p)).or_insert((p.clone(), margin));
                if margin > e.1 {
                    *e = (p, margin);
                }
            }
            map
        })
        .collect();
    let mut merged: BTreeMap<Vec<i8>, (Vec<f64>, f64)> = BTreeMap::new();
    for map in found {
        for (k, v) in map {
            match merged.get(&k) {
                Some(old) if old.1 >= v.1 => {}
                _ => {
                    merged.insert(k, v);
                }
            }
        }
    }
    merged.into_iter().map(|(sign_vector, (witness, margin))| Cell { sign_vector, witness, margin, polygon: None }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(a: f64, b: f64, c: f64) -> Hyperplane {
        Hyperplane::new(vec![a, b], c, "l").unwrap()
    }

    fn unit_box(hs: Vec<Hyperplane>) -> Arrangement {
        Arrangement::new(hs, vec![0.0, 0.0], vec![1.0, 1.0]).unwrap()
    }

    #[test]
    fn empty_arrangement_is_one_cell() {
        let arr = unit_box(vec![]);
        assert_eq!(enumerate_cells_2d(&arr).cells.len(), 1);
        assert_eq!(sample_cells(&arr, 50, 1).len(), 1);
    }

    #[test]
    fn three_generic_lines() {
        let arr = unit_box(vec![line(1.0, 0.0, 0.5), line(0.0, 1.0, 0.5), line(1.0, 1.0, 0.9)]);
        let e = enumerate_cells_2d(&arr);
        assert_eq!(e.cells.len(), 7);
        let exact: Vec<_> = e.cells.iter().map(|c| c.sign_vector.clone()).collect();
        for c in &e.cells {
            assert_eq!(arr.sign_vector(&c.witness), c.sign_vector);
        }
        for c in sample_cells(&arr, 5000, 3) {
            assert!(exact.contains(&c.sign_vector));
        }
    }

    #[test]
    fn quadrants_found_by_sampling() {
        let arr = unit_box(vec![line(1.0, 0.0, 0.5), line(0.0, 1.0, 0.5)]);
        assert_eq!(sample_cells(&arr, 2000, 7).len(), 4);
    }

    #[test]
    fn lines_outside_the_box_do_not_split() {
        let arr = unit_box(vec![line(1.0, 0.0, 2.0), line(1.0, 1.0, 1.0)]);
        assert_eq!(enumerate_cells_2d(&arr).cells.len(), 2);
    }

    #[test]
    fn one_dimensional_intervals() {
        let hs = vec![Hyperplane::new(vec![1.0], 0.3, "a").unwrap(), Hyperplane::new(vec![2.0], 1.2, "b").unwrap()];
        let arr = Arrangement::new(hs, vec![0.0], vec![1.0]).unwrap();
        let e = enumerate_cells(&arr).unwrap();
        assert_eq!(e.cells.len(), 3);
    }
}
