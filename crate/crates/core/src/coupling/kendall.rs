//! Kendall tau-b in O(n log n) (Knight's algorithm).

use std::cmp::Ordering;

use super::CouplingError;

/// Integer pair counts behind tau-b.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TauCounts {
    /// concordant minus discordant pairs
    pub net: i64,
    /// pairs not tied in x
    pub untied_x: u64,
    /// pairs not tied in y
    pub untied_y: u64,
}

impl TauCounts {
    pub fn tau_b(&self) -> f64 {
        self.net as f64 / ((self.untied_x as f64) * (self.untied_y as f64)).sqrt()
    }
}

fn cmp(a: f64, b: f64) -> Ordering {
    a.partial_cmp(&b).expect("finite inputs")
}

fn tied_pairs(run: u64) -> u64 {
    run * (run - 1) / 2
}

/// Sum of `C(k, 2)` over runs of equal adjacent values.
fn count_ties<T: PartialEq>(sorted: impl Iterator<Item = T>) -> u64 {
    let mut total = 0;
    let mut run = 0u64;
    let mut prev: Option<T> = None;
    for v in sorted {
        if prev.as_ref() == Some(&v) {
            run += 1;
        } else {
            total += tied_pairs(run.max(1));
            run = 1;
        }
        prev = Some(v);
    }
    total + tied_pairs(run.max(1))
}

/// Bottom-up merge sort of `v`, returning the number of inversions
/// (strictly greater element placed before a smaller one).
fn merge_count(v: &mut [f64]) -> u64 {
    let n = v.len();
    let mut buf = v.to_vec();
    let mut swaps = 0u64;
    let mut width = 1;
    let mut src_is_v = true;
    while width < n {
        {
            let (src, dst): (&[f64], &mut [f64]) = if src_is_v {
                (&*v, &mut buf)
            } else {
                (&buf, &mut *v)
            };
            let mut start = 0;
            while start < n {
                let mid = (start + width).min(n);
                let end = (start + 2 * width).min(n);
                let (mut i, mut j, mut k) = (start, mid, start);
                while i < mid && j < end {
                    if cmp(src[i], src[j]) != Ordering::Greater {
                        dst[k] = src[i];
                        i += 1;
                    } else {
                        dst[k] = src[j];
                        swaps += (mid - i) as u64;
                        j += 1;
                    }
                    k += 1;
                }
                dst[k..k + (mid - i)].copy_from_slice(&src[i..mid]);
                k += mid - i;
                dst[k..k + (end - j)].copy_from_slice(&src[j..end]);
                start = end;
            }
        }
        src_is_v = !src_is_v;
        width *= 2;
    }
    if !src_is_v {
        v.copy_from_slice(&buf);
    }
    swaps
}

pub fn tau_counts(x: &[f64], y: &[f64]) -> TauCounts {
    let n = x.len() as u64;
    let total = n * n.saturating_sub(1) / 2;
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&i, &j| cmp(x[i], x[j]).then(cmp(y[i], y[j])));

    let ties_x = count_ties(idx.iter().map(|&i| x[i]));
    let ties_xy = count_ties(idx.iter().map(|&i| (x[i], y[i])));
    let mut ys: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
    let swaps = merge_count(&mut ys);
    let ties_y = count_ties(ys.iter().copied());

    let net = total as i64 - ties_x as i64 - ties_y as i64 + ties_xy as i64 - 2 * swaps as i64;
    TauCounts {
        net,
        untied_x: total - ties_x,
        untied_y: total - ties_y,
    }
}

/// Tie-corrected Kendall rank correlation.
pub fn kendall_tau_b(x: &[f64], y: &[f64]) -> Result<f64, CouplingError> {
    if x.len() != y.len() {
        return Err(CouplingError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 3 {
        return Err(CouplingError::TooShort { needed: 3, got: x.len() });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(CouplingError::NonFinite);
    }
    let c = tau_counts(x, y);
    if c.untied_x == 0 || c.untied_y == 0 {
        return Err(CouplingError::AllTied);
    }
    Ok(c.tau_b().clamp(-1.0, 1.0))
}
