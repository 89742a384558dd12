use serde::{Deserialize, Serialize};

use super::CouplingError;

/// Warping-window constraint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DtwBand {
    Unbounded,
    /// Sakoe-Chiba half-width in samples.
    Fixed(usize),
    /// Half-width as a fraction of the longer sequence, rounded up.
    Fraction(f64),
}

impl DtwBand {
    pub fn resolve(self, len_a: usize, len_b: usize) -> Option<usize> {
        match self {
            DtwBand::Unbounded => None,
            DtwBand::Fixed(w) => Some(w),
            DtwBand::Fraction(f) => Some((f * len_a.max(len_b) as f64).ceil() as usize),
        }
    }
}

impl Default for DtwBand {
    fn default() -> Self {
        DtwBand::Fraction(0.1)
    }
}

/// DTW distance with absolute-difference local cost and the symmetric
/// three-way step pattern, anchored at both ends. `band` restricts cells to
/// `|i - j| <= band`.
pub fn dtw_distance(a: &[f64], b: &[f64], band: Option<usize>) -> Result<f64, CouplingError> {
    if a.is_empty() || b.is_empty() {
        return Err(CouplingError::EmptySequence);
    }
    let (n, m) = (a.len(), b.len());
    let w = match band {
        Some(w) => {
            if w < n.abs_diff(m) {
                return Err(CouplingError::BandTooNarrow {
                    band: w,
                    needed: n.abs_diff(m),
                });
            }
            w
        }
        None => n.max(m),
    };

    let mut prev = vec![f64::INFINITY; m];
    let mut curr = vec![f64::INFINITY; m];
    for i in 0..n {
        let lo = i.saturating_sub(w);
        let hi = (i + w).min(m - 1);
        curr.fill(f64::INFINITY);
        for j in lo..=hi {
            let cost = (a[i] - b[j]).abs();
            let best = if i == 0 && j == 0 {
                0.0
            } else {
                let up = if i > 0 { prev[j] } else { f64::INFINITY };
                let left = if j > 0 { curr[j - 1] } else { f64::INFINITY };
                let diag = if i > 0 && j > 0 { prev[j - 1] } else { f64::INFINITY };
                up.min(left).min(diag)
            };
            curr[j] = best + cost;
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    Ok(prev[m - 1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_zero() {
        let x = [0.3, -1.2, 2.5, 0.0, 4.4];
        assert_eq!(dtw_distance(&x, &x, None).unwrap(), 0.0);
        assert_eq!(dtw_distance(&x, &x, Some(0)).unwrap(), 0.0);
    }

    #[test]
    fn single_cell() {
        assert_eq!(dtw_distance(&[0.0], &[1.0], None).unwrap(), 1.0);
    }

    #[test]
    fn duplicate_absorbed() {
        assert_eq!(dtw_distance(&[1.0, 2.0, 3.0], &[1.0, 2.0, 2.0, 3.0], None).unwrap(), 0.0);
    }

    #[test]
    fn band_zero_is_pointwise_distance() {
        let a = [1.0, 2.0, 3.0];
        let b = [2.0, 2.0, 5.0];
        assert_eq!(dtw_distance(&a, &b, Some(0)).unwrap(), 1.0 + 0.0 + 2.0);
    }

    #[test]
    fn errors() {
        assert_eq!(dtw_distance(&[], &[1.0], None), Err(CouplingError::EmptySequence));
        assert!(matches!(
            dtw_distance(&[1.0, 2.0, 3.0], &[1.0], Some(1)),
            Err(CouplingError::BandTooNarrow { band: 1, needed: 2 })
        ));
    }

    #[test]
    fn band_resolution() {
        assert_eq!(DtwBand::Fraction(0.1).resolve(95, 95), Some(10));
        assert_eq!(DtwBand::Fixed(4).resolve(10, 12), Some(4));
        assert_eq!(DtwBand::Unbounded.resolve(3, 3), None);
    }
}
