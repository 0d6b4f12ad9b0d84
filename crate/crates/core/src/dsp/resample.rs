use crate::error::{Error, Result};

/// Linear interpolation of an `N x C` row-major signal onto `T` points evenly
/// spanning `[0, N-1]`. Endpoints are reproduced exactly.
pub fn resample_to_length(signal: &[f64], channels: usize, target: usize) -> Result<Vec<f64>> {
    if channels == 0 || signal.len() % channels != 0 {
        return Err(Error::Shape(format!(
            "{} values do not form rows of width {channels}",
            signal.len()
        )));
    }
    let n = signal.len() / channels;
    if n < 2 {
        return Err(Error::InvalidArgument(format!("cannot resample {n} rows")));
    }
    if target < 2 {
        return Err(Error::InvalidArgument(format!("target length {target} < 2")));
    }
    let row = |i: usize| &signal[i * channels..(i + 1) * channels];
    let mut out = Vec::with_capacity(target * channels);
    let span = (n - 1) as f64;
    let denom = (target - 1) as f64;
    for j in 0..target {
        // Integer numerator first so that grid points landing on samples are exact.
        let pos = (j as u128 * (n - 1) as u128) as f64 / denom;
        let pos = pos.min(span);
        let i = pos.floor() as usize;
        if i >= n - 1 {
            out.extend_from_slice(row(n - 1));
            continue;
        }
        let frac = pos - i as f64;
        let (a, b) = (row(i), row(i + 1));
        out.extend(a.iter().zip(b).map(|(x, y)| x + frac * (y - x)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    #[test]
    fn same_length_is_identity() {
        let mut rng = Rng::new(0);
        let x: Vec<f64> = (0..30).map(|_| rng.normal()).collect();
        assert_eq!(resample_to_length(&x, 3, 10).unwrap(), x);
    }

    #[test]
    fn ramp_upsampling() {
        let y = resample_to_length(&[0.0, 1.0, 2.0, 3.0], 1, 7).unwrap();
        assert_eq!(y, vec![0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0]);
    }

    #[test]
    fn endpoints_preserved() {
        let mut rng = Rng::new(3);
        for (n, t) in [(3600usize, 512usize), (7, 3), (100, 999), (2, 2)] {
            let x: Vec<f64> = (0..n * 2).map(|_| rng.normal()).collect();
            let y = resample_to_length(&x, 2, t).unwrap();
            assert_eq!(y.len(), t * 2);
            assert_eq!(&y[..2], &x[..2]);
            assert_eq!(&y[(t - 1) * 2..], &x[(n - 1) * 2..]);
        }
    }

    #[test]
    fn errors() {
        assert!(resample_to_length(&[1.0, 2.0], 1, 1).is_err());
        assert!(resample_to_length(&[1.0], 1, 4).is_err());
        assert!(resample_to_length(&[1.0, 2.0, 3.0], 2, 4).is_err());
    }
}
