/// Smallest denominator used when the intercept system is degenerate.
pub const INTERCEPT_FLOOR: f64 = 1e-12;

/// Weight given to the off-axis objectives in the achievement scalarizing
/// function used to locate extreme points.
const ASF_EPSILON: f64 = 1e-6;

/// Objectives translated by the ideal point and scaled by the hyperplane
/// intercepts.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalized {
    pub values: Vec<Vec<f64>>,
    pub ideal: Vec<f64>,
    pub intercepts: Vec<f64>,
    /// Set when the extreme-point system was singular or produced an unusable
    /// intercept and per-objective spans were used instead.
    pub degenerate: bool,
}

/// Normalizes `objectives` against a running ideal point.
///
/// `ideal` holds the per-objective minimum seen so far (an empty slice starts
/// a fresh one); the returned ideal also includes `objectives`. Extreme points
/// are found with an achievement scalarizing function per axis, and the
/// hyperplane through them gives the intercepts. If that system is singular or
/// an intercept is non-positive, each objective is scaled by its span
/// `max - ideal`, floored at [`INTERCEPT_FLOOR`].
pub fn normalize_objectives<V: AsRef<[f64]>>(objectives: &[V], ideal: &[f64]) -> Normalized {
    let m = objectives
        .first()
        .map(|o| o.as_ref().len())
        .unwrap_or(ideal.len());

    let mut ideal: Vec<f64> = if ideal.is_empty() {
        vec![f64::INFINITY; m]
    } else {
        ideal.to_vec()
    };
    for obj in objectives {
        for (lo, &v) in ideal.iter_mut().zip(obj.as_ref()) {
            if v < *lo {
                *lo = v;
            }
        }
    }

    let translated: Vec<Vec<f64>> = objectives
        .iter()
        .map(|o| o.as_ref().iter().zip(&ideal).map(|(v, z)| v - z).collect())
        .collect();

    if translated.is_empty() {
        return Normalized {
            values: Vec::new(),
            ideal,
            intercepts: vec![1.0; m],
            degenerate: false,
        };
    }

    let extremes: Vec<Vec<f64>> = (0..m)
        .map(|axis| {
            let best = translated
                .iter()
                .enumerate()
                .map(|(i, t)| (i, asf(t, axis)))
                .fold((0, f64::INFINITY), |acc, (i, s)| if s < acc.1 { (i, s) } else { acc })
                .0;
            translated[best].clone()
        })
        .collect();

    let (intercepts, degenerate) = match hyperplane_intercepts(&extremes) {
        Some(intercepts) => (intercepts, false),
        None => {
            let spans = (0..m)
                .map(|k| {
                    translated
                        .iter()
                        .map(|t| t[k])
                        .fold(0.0f64, f64::max)
                        .max(INTERCEPT_FLOOR)
                })
                .collect();
            (spans, true)
        }
    };

    let values = translated
        .into_iter()
        .map(|t| t.iter().zip(&intercepts).map(|(v, a)| v / a).collect())
        .collect();

    Normalized {
        values,
        ideal,
        intercepts,
        degenerate,
    }
}

fn asf(translated: &[f64], axis: usize) -> f64 {
    translated
        .iter()
        .enumerate()
        .map(|(k, &v)| if k == axis { v } else { v / ASF_EPSILON })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Intercepts of the hyperplane through the rows of `extremes`, or `None`
/// when the system is singular or an intercept is not a usable positive
/// number.
fn hyperplane_intercepts(extremes: &[Vec<f64>]) -> Option<Vec<f64>> {
    let m = extremes.len();
    let mut a: Vec<Vec<f64>> = extremes.to_vec();
    let mut b = vec![1.0; m];
    let scale = extremes
        .iter()
        .flatten()
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    if scale <= 0.0 || !scale.is_finite() {
        return None;
    }

    // Gaussian elimination with partial pivoting.
    for col in 0..m {
        let pivot = (col..m).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() <= 1e-12 * scale {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..m {
            let factor = a[row][col] / a[col][col];
            if factor != 0.0 {
                for k in col..m {
                    a[row][k] -= factor * a[col][k];
                }
                b[row] -= factor * b[col];
            }
        }
    }
    let mut x = vec![0.0; m];
    for row in (0..m).rev() {
        let tail: f64 = ((row + 1)..m).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }

    let intercepts: Vec<f64> = x.iter().map(|&v| 1.0 / v).collect();
    if intercepts.iter().all(|&v| v.is_finite() && v > 1e-6) {
        Some(intercepts)
    } else {
        None
    }
}
