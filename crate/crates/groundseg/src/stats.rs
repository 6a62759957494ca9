// SPDX-License-Identifier: Apache-2.0

//! Small numeric helpers shared across modules.

/// Mean and standard deviation of a slice. `sample` selects the n-1
/// denominator; the default everywhere in this crate is the population
/// form (divide by n). Empty input yields (0, 0); a single value has
/// population deviation 0.
pub(crate) fn mean_stdev(values: &[f64], sample: bool) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let denom = if sample {
        if n < 2 {
            return (mean, 0.0);
        }
        (n - 1) as f64
    } else {
        n as f64
    };
    let ss = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
    (mean, (ss / denom).sqrt())
}

/// Median of a slice, averaging the two middle elements for even lengths.
pub(crate) fn median(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty(), "median of empty slice");
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn population_and_sample_forms_differ() {
        let xs = [1.0, 2.0, 3.0];
        let (m, sp) = mean_stdev(&xs, false);
        let (_, ss) = mean_stdev(&xs, true);
        assert_eq!(m, 2.0);
        assert!((sp - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((ss - 1.0).abs() < 1e-15);
    }

    #[test]
    fn single_value_has_zero_deviation() {
        assert_eq!(mean_stdev(&[5.0], false), (5.0, 0.0));
        assert_eq!(mean_stdev(&[5.0], true), (5.0, 0.0));
    }

    #[test]
    fn median_of_even_length_averages_middle() {
        assert_eq!(median(&mut [4.0, 1.0, 3.0, 2.0]), 2.5);
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
    }
}
