//! Sobol' low-discrepancy sequence (Joe–Kuo direction numbers, 32-bit),
//! optionally scrambled by a random linear matrix scramble plus digital shift.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 21;
const BITS: usize = 32;
const SCALE: f64 = 1.0 / 4_294_967_296.0;

/// `(degree s, coefficient a, initial m_1..m_s)` for dimensions 2 and up.
const JOE_KUO: [(u32, u32, &[u32]); MAX_DIM - 1] = [
    (1, 0, &[1]),
    (2, 1, &[1, 3]),
    (3, 1, &[1, 3, 1]),
    (3, 2, &[1, 1, 1]),
    (4, 1, &[1, 1, 3, 3]),
    (4, 4, &[1, 3, 5, 13]),
    (5, 2, &[1, 1, 5, 5, 17]),
    (5, 4, &[1, 1, 5, 5, 5]),
    (5, 7, &[1, 1, 7, 11, 19]),
    (5, 11, &[1, 1, 5, 1, 1]),
    (5, 13, &[1, 1, 1, 3, 11]),
    (5, 14, &[1, 3, 5, 5, 31]),
    (6, 1, &[1, 3, 3, 9, 7, 49]),
    (6, 13, &[1, 1, 1, 15, 21, 21]),
    (6, 16, &[1, 3, 1, 13, 27, 49]),
    (6, 19, &[1, 1, 1, 15, 7, 5]),
    (6, 22, &[1, 3, 1, 15, 13, 25]),
    (6, 25, &[1, 1, 5, 5, 19, 61]),
    (7, 1, &[1, 3, 7, 11, 23, 15, 103]),
    (7, 4, &[1, 3, 7, 13, 13, 15, 69]),
];

fn direction_numbers(dim: usize) -> Vec<[u32; BITS]> {
    let mut out = Vec::with_capacity(dim);
    // First coordinate: van der Corput.
    let mut v = [0u32; BITS];
    for (k, slot) in v.iter_mut().enumerate() {
        *slot = 1 << (BITS - 1 - k);
    }
    out.push(v);
    for &(s, a, m) in JOE_KUO.iter().take(dim.saturating_sub(1)) {
        let s = s as usize;
        let mut v = [0u32; BITS];
        for k in 0..s.min(BITS) {
            v[k] = m[k] << (BITS - 1 - k);
        }
        for k in s..BITS {
            let mut x = v[k - s] ^ (v[k - s] >> s);
            for j in 1..s {
                if (a >> (s - 1 - j)) & 1 == 1 {
                    x ^= v[k - j];
                }
            }
            v[k] = x;
        }
        out.push(v);
    }
    out
}

/// A Sobol' stream over `[0, 1)^d`.
///
/// Unscrambled streams skip the origin, so the first 1-d points are
/// 0.5, 0.75, 0.25. Scrambled streams start at index 0.
#[derive(Debug, Clone)]
pub struct SobolStream {
    directions: Vec<[u32; BITS]>,
    state: Vec<u32>,
    shift: Vec<u32>,
    index: u64,
    scrambled: bool,
}

impl SobolStream {
    pub fn new(dim: usize) -> Result<Self> {
        Self::check_dim(dim)?;
        let mut s = Self {
            directions: direction_numbers(dim),
            state: vec![0; dim],
            shift: vec![0; dim],
            index: 0,
            scrambled: false,
        };
        s.advance();
        Ok(s)
    }

    /// A scrambled stream, deterministic per `seed`.
    pub fn scrambled(dim: usize, seed: u64) -> Result<Self> {
        Self::check_dim(dim)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut directions = direction_numbers(dim);
        for dirs in directions.iter_mut() {
            // Lower-triangular (in digit order) with unit diagonal: digit k of the
            // output mixes in digits 0..k of the input.
            let rows: Vec<u32> = (0..BITS)
                .map(|k| {
                    let own = 1u32 << (BITS - 1 - k);
                    let above = if k == 0 { 0 } else { !((1u32 << (BITS - k)) - 1) };
                    own | (rng.random::<u32>() & above)
                })
                .collect();
            for v in dirs.iter_mut() {
                let mut out = 0u32;
                for (k, row) in rows.iter().enumerate() {
                    if (row & *v).count_ones() & 1 == 1 {
                        out |= 1 << (BITS - 1 - k);
                    }
                }
                *v = out;
            }
        }
        let shift: Vec<u32> = (0..dim).map(|_| rng.random()).collect();
        Ok(Self {
            directions,
            state: shift.clone(),
            shift,
            index: 0,
            scrambled: true,
        })
    }

    fn check_dim(dim: usize) -> Result<()> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::config(format!(
                "Sobol dimension {dim} outside supported range 1..={MAX_DIM}"
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.directions.len()
    }

    pub fn is_scrambled(&self) -> bool {
        self.scrambled
    }

    /// Index of the next point in the underlying sequence.
    pub fn counter(&self) -> u64 {
        self.index
    }

    fn advance(&mut self) {
        let c = self.index.trailing_ones() as usize;
        assert!(c < BITS, "Sobol stream exhausted");
        for (x, dirs) in self.state.iter_mut().zip(&self.directions) {
            *x ^= dirs[c];
        }
        self.index += 1;
    }

    pub fn next_point(&mut self) -> Vec<f64> {
        let p = self.state.iter().map(|&x| x as f64 * SCALE).collect();
        self.advance();
        p
    }

    /// The next `n` points.
    pub fn draw(&mut self, n: usize) -> Vec<Vec<f64>> {
        (0..n).map(|_| self.next_point()).collect()
    }

    /// The next point as raw 32-bit integers.
    pub fn next_raw(&mut self) -> Vec<u32> {
        let p = self.state.clone();
        self.advance();
        p
    }

    #[doc(hidden)]
    pub fn shift(&self) -> &[u32] {
        &self.shift
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_points_one_dim() {
        let mut s = SobolStream::new(1).unwrap();
        assert_eq!(s.draw(3), vec![vec![0.5], vec![0.75], vec![0.25]]);
    }

    #[test]
    fn rejects_unsupported_dimensions() {
        assert!(SobolStream::new(0).is_err());
        assert!(SobolStream::new(22).is_err());
        assert!(SobolStream::scrambled(22, 1).is_err());
    }

    #[test]
    fn scrambled_is_deterministic() {
        let a = SobolStream::scrambled(5, 42).unwrap().draw(64);
        let b = SobolStream::scrambled(5, 42).unwrap().draw(64);
        let c = SobolStream::scrambled(5, 43).unwrap().draw(64);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.iter().flatten().all(|&v| (0.0..1.0).contains(&v)));
    }

    #[test]
    fn scrambling_keeps_stratification() {
        // Every elementary interval of width 1/64 holds exactly one of 64 points.
        let pts = SobolStream::scrambled(3, 7).unwrap().draw(64);
        for k in 0..3 {
            let mut seen = [false; 64];
            for p in &pts {
                let cell = (p[k] * 64.0) as usize;
                assert!(!seen[cell]);
                seen[cell] = true;
            }
        }
    }

    #[test]
    fn coordinate_means_are_balanced() {
        let pts = SobolStream::scrambled(2, 11).unwrap().draw(512);
        for k in 0..2 {
            let mean = pts.iter().map(|p| p[k]).sum::<f64>() / 512.0;
            assert!((mean - 0.5).abs() < 0.01, "mean {mean}");
        }
    }
}
