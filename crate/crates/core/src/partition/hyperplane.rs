use serde::{Deserialize, Serialize};

/// The hyperplane `normal · p = offset`, with a note on which comparison produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperplane {
    pub normal: Vec<f64>,
    pub offset: f64,
    pub label: String,
}

const DEDUP_TOL: f64 = 1e-12;

impl Hyperplane {
    /// `None` when the normal vanishes (the comparison does not depend on the parameters).
    pub fn new(normal: Vec<f64>, offset: f64, label: impl Into<String>) -> Option<Self> {
        let scale = normal.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if scale <= 1e-14 * (1.0 + offset.abs()) || !scale.is_finite() || !offset.is_finite() {
            return None;
        }
        Some(Self { normal, offset, label: label.into() })
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    /// `normal · p − offset`; positive on the `+` side.
    pub fn eval(&self, p: &[f64]) -> f64 {
        self.normal.iter().zip(p).map(|(a, x)| a * x).sum::<f64>() - self.offset
    }

    pub fn norm(&self) -> f64 {
        self.normal.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    /// Signed Euclidean distance from `p`.
    pub fn signed_distance(&self, p: &[f64]) -> f64 {
        self.eval(p) / self.norm()
    }

    /// Unit normal with its first non-zero component positive, and the matching offset.
    fn canonical(&self) -> (Vec<f64>, f64) {
        let norm = self.norm();
        let first = self.normal.iter().find(|a| a.abs() > 1e-15 * norm).copied().unwrap_or(1.0);
        let s = if first < 0.0 { -1.0 } else { 1.0 } / norm;
        (self.normal.iter().map(|a| a * s).collect(), self.offset * s)
    }

    /// Same geometric hyperplane up to scaling (either orientation).
    pub fn same_as(&self, other: &Hyperplane) -> bool {
        close(&self.canonical(), &other.canonical())
    }
}

fn close((a, b): &(Vec<f64>, f64), (c, d): &(Vec<f64>, f64)) -> bool {
    a.len() == c.len()
        && a.iter().zip(c).all(|(x, y)| (x - y).abs() <= DEDUP_TOL)
        && (b - d).abs() <= DEDUP_TOL * (1.0 + b.abs().max(d.abs()))
}

/// Drops geometric duplicates, keeping the first occurrence and its orientation.
pub fn dedup(hs: Vec<Hyperplane>) -> Vec<Hyperplane> {
    let canon: Vec<(Vec<f64>, f64)> = hs.iter().map(|h| h.canonical()).collect();
    let mut order: Vec<usize> = (0..hs.len()).collect();
    order.sort_by(|&x, &y| canon[x].0.partial_cmp(&canon[y].0).unwrap());
    let mut keep = vec![true; hs.len()];
    // Near-duplicates share an almost-equal leading component, so only that window is scanned.
    for i in 0..order.len() {
        for j in (0..i).rev() {
            let (a, b) = (order[i], order[j]);
            if (canon[a].0[0] - canon[b].0[0]).abs() > DEDUP_TOL {
                break;
            }
            if close(&canon[a], &canon[b]) {
                keep[a.max(b)] = false;
            }
        }
    }
    hs.into_iter().zip(keep).filter(|(_, k)| *k).map(|(h, _)| h).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_normal_rejected() {
        assert!(Hyperplane::new(vec![0.0, 0.0], 1.0, "x").is_none());
    }

    #[test]
    fn dedup_up_to_scaling_and_orientation() {
        let hs = vec![
            Hyperplane::new(vec![1.0, 2.0], 3.0, "a").unwrap(),
            Hyperplane::new(vec![2.0, 4.0], 6.0, "b").unwrap(),
            Hyperplane::new(vec![-1.0, -2.0], -3.0, "c").unwrap(),
            Hyperplane::new(vec![1.0, 2.0], 3.5, "d").unwrap(),
        ];
        let out = dedup(hs);
        let labels: Vec<_> = out.iter().map(|h| h.label.as_str()).collect();
        assert_eq!(labels, vec!["a", "d"]);
    }
}
