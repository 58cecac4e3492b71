//! Nondecreasing eigenvalue sequences, either stored or generated exactly.

/// A finite truncation of a nondecreasing eigenvalue sequence with
/// multiplicity. Indices are zero-based.
pub trait Spectrum {
    fn len(&self) -> usize;

    fn value(&self, k: usize) -> f64;

    /// `#{k : λ_k ≤ x}`, i.e. the index of the first eigenvalue above `x`.
    fn count_le(&self, x: f64) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn max_value(&self) -> f64 {
        self.value(self.len() - 1)
    }
}

impl Spectrum for [f64] {
    fn len(&self) -> usize {
        <[f64]>::len(self)
    }

    fn value(&self, k: usize) -> f64 {
        self[k]
    }

    fn count_le(&self, x: f64) -> usize {
        self.partition_point(|&v| v <= x)
    }
}

impl Spectrum for Vec<f64> {
    fn len(&self) -> usize {
        self.as_slice().len()
    }

    fn value(&self, k: usize) -> f64 {
        self[k]
    }

    fn count_le(&self, x: f64) -> usize {
        self.as_slice().count_le(x)
    }
}

/// Lattice points `m ∈ ℤ²` with `|m|² ≤ r2` (Gauss circle count).
pub fn lattice_count(r2: f64) -> u64 {
    if r2 < 0.0 {
        return 0;
    }
    let r2 = r2.floor() as i64;
    let r = isqrt(r2);
    (-r..=r)
        .map(|m1| {
            let rest = r2 - m1 * m1;
            2 * isqrt(rest) as u64 + 1
        })
        .sum()
}

fn isqrt(v: i64) -> i64 {
    if v <= 0 {
        return 0;
    }
    let mut s = (v as f64).sqrt() as i64;
    while s * s > v {
        s -= 1;
    }
    while (s + 1) * (s + 1) <= v {
        s += 1;
    }
    s
}

/// Exact spectrum of `-Δ` on the flat torus `(ℝ/Lℤ)²`:
/// `(2π/L)² |m|²`, `m ∈ ℤ²`, truncated at `|m|² ≤ max_norm2`.
#[derive(Debug, Clone, Copy)]
pub struct FlatTorusSpectrum {
    scale: f64,
    max_norm2: u64,
    len: usize,
}

impl FlatTorusSpectrum {
    pub fn new(side_length: f64, max_norm2: u64) -> Self {
        let two_pi = 2.0 * std::f64::consts::PI;
        Self {
            scale: (two_pi / side_length).powi(2),
            max_norm2,
            len: lattice_count(max_norm2 as f64) as usize,
        }
    }

    /// Truncation of the `2π`-periodic torus at eigenvalue `max_value`.
    pub fn standard(max_value: u64) -> Self {
        Self::new(2.0 * std::f64::consts::PI, max_value)
    }

    fn norm2_at(&self, k: usize) -> u64 {
        // Smallest s with lattice_count(s) > k.
        let (mut lo, mut hi) = (0u64, self.max_norm2);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if lattice_count(mid as f64) as usize > k {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        lo
    }
}

impl Spectrum for FlatTorusSpectrum {
    fn len(&self) -> usize {
        self.len
    }

    fn value(&self, k: usize) -> f64 {
        assert!(k < self.len, "index {k} beyond truncation");
        self.norm2_at(k) as f64 * self.scale
    }

    fn count_le(&self, x: f64) -> usize {
        let r2 = (x / self.scale).min(self.max_norm2 as f64);
        // Guard the floor against roundoff just below an integer.
        let r2 = if (r2 - r2.round()).abs() < 1e-9 * r2.max(1.0) { r2.round() } else { r2 };
        lattice_count(r2) as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_counts() {
        assert_eq!(lattice_count(0.0), 1);
        assert_eq!(lattice_count(1.0), 5);
        assert_eq!(lattice_count(2.0), 9);
        assert_eq!(lattice_count(4.0), 13);
        // Brute force.
        for r2 in [7.0, 25.0, 50.0, 99.5] {
            let mut c = 0;
            for a in -12i64..=12 {
                for b in -12i64..=12 {
                    if ((a * a + b * b) as f64) <= r2 {
                        c += 1;
                    }
                }
            }
            assert_eq!(lattice_count(r2), c);
        }
    }

    #[test]
    fn torus_spectrum_values() {
        let s = FlatTorusSpectrum::standard(100);
        assert_eq!(s.value(0), 0.0);
        assert_eq!(s.value(1), 1.0);
        assert_eq!(s.value(4), 1.0);
        assert_eq!(s.value(5), 2.0);
        assert_eq!(s.value(9), 4.0);
        assert_eq!(s.count_le(1.5), 5);
        assert_eq!(s.max_value(), 100.0);
        let unit = FlatTorusSpectrum::new(1.0, 10);
        assert!((unit.value(1) - 4.0 * std::f64::consts::PI.powi(2)).abs() < 1e-12);
    }
}
