use std::sync::OnceLock;

use super::SamplingError;

/// Direction numbers of Joe and Kuo (`new-joe-kuo-6.21201`, first 1024
/// dimensions). Columns: dimension, degree `s`, polynomial `a`, initial
/// `m_1..m_s`.
pub const DIRECTION_TABLE: &str = include_str!("../../data/new-joe-kuo-6.1024.txt");

/// Highest supported dimension.
pub const MAX_DIMENSION: usize = 1024;

const BITS: usize = 32;

struct Row {
    s: usize,
    a: u32,
    m: Vec<u32>,
}

fn table() -> &'static [Row] {
    static TABLE: OnceLock<Vec<Row>> = OnceLock::new();
    TABLE.get_or_init(|| {
        DIRECTION_TABLE
            .lines()
            .skip(1)
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                let nums: Vec<u32> = l
                    .split_whitespace()
                    .map(|t| t.parse().expect("shipped direction table is well formed"))
                    .collect();
                Row {
                    s: nums[1] as usize,
                    a: nums[2],
                    m: nums[3..].to_vec(),
                }
            })
            .collect()
    })
}

fn directions(dim_index: usize) -> [u32; BITS] {
    let mut v = [0u32; BITS];
    if dim_index == 0 {
        for (i, vi) in v.iter_mut().enumerate() {
            *vi = 1 << (BITS - 1 - i);
        }
        return v;
    }
    let row = &table()[dim_index - 1];
    let s = row.s;
    for (i, (vi, &m)) in v.iter_mut().zip(&row.m).take(s.min(BITS)).enumerate() {
        *vi = m << (BITS - 1 - i);
    }
    for i in s..BITS {
        let mut x = v[i - s] ^ (v[i - s] >> s);
        for k in 1..s {
            if (row.a >> (s - 1 - k)) & 1 == 1 {
                x ^= v[i - k];
            }
        }
        v[i] = x;
    }
    v
}

/// Unscrambled Sobol sequence in Gray-code order, starting at index 1 so
/// the origin is skipped and the first point is `(0.5, ..., 0.5)`.
#[derive(Debug, Clone)]
pub struct Sobol {
    v: Vec<[u32; BITS]>,
    x: Vec<u32>,
    index: u64,
}

impl Sobol {
    pub fn new(dim: usize) -> Result<Self, SamplingError> {
        if dim > MAX_DIMENSION {
            return Err(SamplingError::DimensionTooLarge {
                requested: dim,
                max: MAX_DIMENSION,
            });
        }
        Ok(Sobol {
            v: (0..dim).map(directions).collect(),
            x: vec![0; dim],
            index: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// Writes the next point into `out`.
    ///
    /// # Panics
    /// After `2^32 - 1` points.
    pub fn next_into(&mut self, out: &mut [f64]) {
        // lowest zero bit of the previous index selects the direction
        let c = (!self.index).trailing_zeros() as usize;
        assert!(c < BITS, "Sobol sequence exhausted");
        self.index += 1;
        for (j, x) in self.x.iter_mut().enumerate() {
            *x ^= self.v[j][c];
            out[j] = *x as f64 / 4294967296.0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn take(dim: usize, n: usize) -> Vec<Vec<f64>> {
        let mut s = Sobol::new(dim).unwrap();
        (0..n)
            .map(|_| {
                let mut p = vec![0.0; dim];
                s.next_into(&mut p);
                p
            })
            .collect()
    }

    #[test]
    fn first_points_in_one_dimension() {
        let pts: Vec<f64> = take(1, 3).into_iter().map(|p| p[0]).collect();
        assert_eq!(pts, vec![0.5, 0.75, 0.25]);
    }

    #[test]
    fn reference_points_in_six_dimensions() {
        let expected = [
            [0.5, 0.5, 0.5, 0.5, 0.5, 0.5],
            [0.75, 0.25, 0.25, 0.25, 0.75, 0.75],
            [0.25, 0.75, 0.75, 0.75, 0.25, 0.25],
            [0.375, 0.375, 0.625, 0.875, 0.375, 0.125],
            [0.875, 0.875, 0.125, 0.375, 0.875, 0.625],
            [0.625, 0.125, 0.875, 0.625, 0.625, 0.875],
            [0.125, 0.625, 0.375, 0.125, 0.125, 0.375],
            [0.1875, 0.3125, 0.9375, 0.4375, 0.5625, 0.3125],
        ];
        for (got, want) in take(6, 8).iter().zip(expected.iter()) {
            assert_eq!(got.as_slice(), want.as_slice());
        }
    }

    #[test]
    fn reference_points_in_high_dimension() {
        let pts = take(300, 1024);
        let p = &pts[1023];
        let want = [
            (0, 0.00146484375),
            (1, 0.37646484375),
            (2, 0.44775390625),
            (99, 0.35791015625),
            (250, 0.26123046875),
            (299, 0.30712890625),
        ];
        for (k, v) in want {
            assert_eq!(p[k], v, "coordinate {k}");
        }
        let p = &pts[36];
        for (k, v) in [
            (0, 0.921875),
            (50, 0.421875),
            (120, 0.484375),
            (288, 0.640625),
            (299, 0.671875),
        ] {
            assert_eq!(p[k], v, "coordinate {k}");
        }
    }

    #[test]
    fn dimension_limit() {
        assert!(Sobol::new(MAX_DIMENSION).is_ok());
        assert!(matches!(
            Sobol::new(MAX_DIMENSION + 1),
            Err(SamplingError::DimensionTooLarge { .. })
        ));
    }
}
