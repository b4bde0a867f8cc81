use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for the in-bounds test, relative to each coordinate's range.
const BOUNDS_SLACK: f64 = 1e-12;

/// An axis-aligned box `[lo₁, hi₁] × … × [lo_d, hi_d]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::domain("bounds need matching, nonempty lower/upper vectors"));
        }
        for (i, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::domain(format!(
                    "bounds dimension {i}: need lo < hi, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// `[lo, hi]^d`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn range(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }

    pub fn ranges(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.range(i)).collect()
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|i| self.range(i)).product()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter().enumerate().all(|(i, &v)| {
                let slack = BOUNDS_SLACK * self.range(i);
                v >= self.lower[i] - slack && v <= self.upper[i] + slack
            })
    }

    pub fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::domain(format!(
                "point has dimension {}, expected {}",
                x.len(),
                self.dim()
            )));
        }
        if !self.contains(x) {
            return Err(Error::domain(format!("point {x:?} outside bounds")));
        }
        Ok(())
    }

    /// Maps a point of `[0, 1]^d` into the box.
    pub fn from_unit(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .enumerate()
            .map(|(i, &v)| self.lower[i] + v * self.range(i))
            .collect()
    }

    pub fn to_unit(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(i, &v)| (v - self.lower[i]) / self.range(i))
            .collect()
    }

    /// Clamps a point into the box.
    pub fn project(&self, x: &mut [f64]) {
        for (i, v) in x.iter_mut().enumerate() {
            *v = v.clamp(self.lower[i], self.upper[i]);
        }
    }

    pub fn center(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| 0.5 * (self.lower[i] + self.upper[i])).collect()
    }
}

/// Observed `(point, binary outcome)` pairs inside a box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    bounds: Bounds,
    points: Vec<Vec<f64>>,
    outcomes: Vec<bool>,
}

impl Dataset {
    pub fn new(bounds: Bounds) -> Self {
        Self {
            bounds,
            points: Vec::new(),
            outcomes: Vec::new(),
        }
    }

    pub fn from_parts(bounds: Bounds, points: Vec<Vec<f64>>, outcomes: Vec<bool>) -> Result<Self> {
        if points.len() != outcomes.len() {
            return Err(Error::domain(format!(
                "{} points but {} outcomes",
                points.len(),
                outcomes.len()
            )));
        }
        let mut data = Self::new(bounds);
        for (x, y) in points.into_iter().zip(outcomes) {
            data.push(x, y)?;
        }
        Ok(data)
    }

    pub fn push(&mut self, x: Vec<f64>, y: bool) -> Result<()> {
        self.bounds.check(&x)?;
        self.points.push(x);
        self.outcomes.push(y);
        Ok(())
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn outcomes(&self) -> &[bool] {
        &self.outcomes
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.bounds.dim()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], bool)> {
        self.points.iter().map(Vec::as_slice).zip(self.outcomes.iter().copied())
    }

    /// Number of distinct points.
    pub fn unique_points(&self) -> Vec<Vec<f64>> {
        let mut unique: Vec<Vec<f64>> = Vec::new();
        for p in &self.points {
            if !unique.iter().any(|u| u == p) {
                unique.push(p.clone());
            }
        }
        unique
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_validation() {
        assert!(Bounds::new(vec![0.0], vec![0.0]).is_err());
        assert!(Bounds::new(vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(Bounds::new(vec![], vec![]).is_err());
        let b = Bounds::cube(2, -1.0, 1.0).unwrap();
        assert_eq!(b.volume(), 4.0);
        assert!(b.contains(&[1.0, -1.0]));
        assert!(!b.contains(&[1.01, 0.0]));
        assert_eq!(b.from_unit(&[0.5, 0.25]), vec![0.0, -0.5]);
        assert_eq!(b.to_unit(&[0.0, -0.5]), vec![0.5, 0.25]);
    }

    #[test]
    fn dataset_rejects_out_of_bounds() {
        let mut d = Dataset::new(Bounds::cube(1, 0.0, 1.0).unwrap());
        assert!(d.push(vec![0.5], true).is_ok());
        assert!(d.push(vec![1.5], true).is_err());
        assert!(d.push(vec![0.5, 0.5], true).is_err());
        assert_eq!(d.len(), 1);
        let bad = Dataset::from_parts(Bounds::cube(1, 0.0, 1.0).unwrap(), vec![vec![0.1]], vec![]);
        assert!(bad.is_err());
    }

    #[test]
    fn unique_points_dedups() {
        let b = Bounds::cube(1, 0.0, 1.0).unwrap();
        let d = Dataset::from_parts(b, vec![vec![0.1], vec![0.2], vec![0.1]], vec![true, false, true]).unwrap();
        assert_eq!(d.unique_points(), vec![vec![0.1], vec![0.2]]);
    }
}
