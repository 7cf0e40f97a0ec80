use crate::error::MooError;

/// Pareto dominance under minimization: `a` is no worse than `b` everywhere
/// and strictly better somewhere.
///
/// Panics if the vectors differ in length; use [`try_dominates`] for a
/// checked variant.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    try_dominates(a, b).expect("objective vectors must have equal length")
}

pub fn try_dominates(a: &[f64], b: &[f64]) -> Result<bool, MooError> {
    if a.len() != b.len() {
        return Err(MooError::LengthMismatch(a.len(), b.len()));
    }
    let mut strictly_better = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return Ok(false);
        }
        if x < y {
            strictly_better = true;
        }
    }
    Ok(strictly_better)
}

/// Partitions `objectives` into successive non-dominated fronts.
///
/// Front 0 holds the indices of all non-dominated vectors; front `k` those
/// that become non-dominated once fronts `< k` are removed. Indices inside a
/// front are ascending, i.e. they keep input order.
pub fn nondominated_sort<V: AsRef<[f64]>>(objectives: &[V]) -> Vec<Vec<usize>> {
    let n = objectives.len();
    let mut dominated_by_count = vec![0usize; n];
    let mut dominates_list: Vec<Vec<usize>> = vec![Vec::new(); n];

    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (objectives[i].as_ref(), objectives[j].as_ref());
            if dominates(a, b) {
                dominates_list[i].push(j);
                dominated_by_count[j] += 1;
            } else if dominates(b, a) {
                dominates_list[j].push(i);
                dominated_by_count[i] += 1;
            }
        }
    }

    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by_count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominates_list[i] {
                dominated_by_count[j] -= 1;
                if dominated_by_count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dominance_examples() {
        assert!(dominates(&[1.0, 2.0], &[2.0, 3.0]));
        assert!(!dominates(&[1.0, 2.0], &[1.0, 2.0]));
        assert!(!dominates(&[1.0, 3.0], &[2.0, 2.0]));
        assert!(!dominates(&[2.0, 2.0], &[1.0, 3.0]));
        assert!(dominates(&[1.0, 2.0], &[1.0, 3.0]));
    }

    #[test]
    fn length_mismatch_is_an_error() {
        assert_eq!(
            try_dominates(&[1.0], &[1.0, 2.0]),
            Err(MooError::LengthMismatch(1, 2))
        );
    }

    #[test]
    fn identical_objectives_form_one_front() {
        let objs = vec![vec![1.0, 1.0]; 5];
        assert_eq!(nondominated_sort(&objs), vec![vec![0, 1, 2, 3, 4]]);
    }

    #[test]
    fn incomparable_chain_is_one_front() {
        let objs = vec![
            vec![1.0, 4.0],
            vec![2.0, 3.0],
            vec![3.0, 2.0],
            vec![4.0, 1.0],
        ];
        assert_eq!(nondominated_sort(&objs), vec![vec![0, 1, 2, 3]]);
    }

    #[test]
    fn layered_fronts() {
        let objs = vec![
            vec![3.0, 3.0],
            vec![1.0, 1.0],
            vec![2.0, 2.0],
            vec![0.5, 4.0],
        ];
        assert_eq!(nondominated_sort(&objs), vec![vec![1, 3], vec![2], vec![0]]);
    }

    #[test]
    fn empty_population_has_no_fronts() {
        let objs: Vec<Vec<f64>> = Vec::new();
        assert!(nondominated_sort(&objs).is_empty());
    }
}
