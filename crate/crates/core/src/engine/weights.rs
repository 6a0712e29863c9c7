use crate::engine::WindowError;
use crate::params::FseParams;
use crate::signal::Label;

/// Isotropic weighting over one extrapolation window.
///
/// The window is laid out with the sample being reconstructed at local index
/// `support`; indices past `2 * support` are zero padding up to the transform
/// size. Weights decay as `rho^|m - support|`, are scaled by `delta` on
/// reconstructed samples and vanish on lost samples and padding.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    w: Vec<f64>,
    sum_w: f64,
}

impl WeightVector {
    pub fn values(&self) -> &[f64] {
        &self.w
    }

    pub fn sum(&self) -> f64 {
        self.sum_w
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }
}

/// Weight of a sample at `distance` from the window center.
pub fn decay(rho: f64, distance: usize) -> f64 {
    rho.powi(distance as i32)
}

pub fn build_weights(labels: &[Label], p: &FseParams) -> Result<WeightVector, WindowError> {
    if labels.len() != p.fft_size {
        return Err(WindowError::LengthMismatch {
            expected: p.fft_size,
            got: labels.len(),
        });
    }
    let center = p.support;
    let w: Vec<f64> = labels
        .iter()
        .enumerate()
        .map(|(m, label)| {
            if m > 2 * center {
                return 0.0;
            }
            let base = decay(p.rho, m.abs_diff(center));
            match label {
                Label::Support => base,
                Label::Reconstructed => p.delta * base,
                Label::Lost => 0.0,
            }
        })
        .collect();
    let sum_w: f64 = w.iter().sum();
    if sum_w <= 0.0 {
        return Err(WindowError::NoSupport);
    }
    Ok(WeightVector { w, sum_w })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(n: usize) -> Vec<Label> {
        let mut l = vec![Label::Support; n];
        l[1000] = Label::Lost;
        l
    }

    #[test]
    fn center_and_offset_weights() {
        let p = FseParams::default();
        let mut l = labels(2048);
        l[1000] = Label::Support;
        let w = build_weights(&l, &p).unwrap();
        assert_eq!(w.values()[1000], 1.0);
        assert!((w.values()[900] - 0.366_032_341_273_229_2).abs() < 1e-15);
        assert_eq!(w.values()[900], w.values()[1100]);
        // padding past the extrapolation area
        assert!(w.values()[2001..].iter().all(|&v| v == 0.0));
        assert!(w.values()[2000] > 0.0);
    }

    #[test]
    fn lost_and_reconstructed_samples() {
        let p = FseParams {
            delta: 0.5,
            ..Default::default()
        };
        let mut l = labels(2048);
        l[990] = Label::Reconstructed;
        let w = build_weights(&l, &p).unwrap();
        assert_eq!(w.values()[1000], 0.0);
        assert!((w.values()[990] - 0.5 * 0.99f64.powi(10)).abs() < 1e-15);
        let direct: f64 = w.values().iter().sum();
        assert_eq!(w.sum(), direct);
    }

    #[test]
    fn window_without_support() {
        let p = FseParams::default();
        let l = vec![Label::Lost; 2048];
        assert_eq!(build_weights(&l, &p), Err(WindowError::NoSupport));
        let p0 = FseParams {
            delta: 0.0,
            ..Default::default()
        };
        let mut l = vec![Label::Reconstructed; 2048];
        l[1000] = Label::Lost;
        assert_eq!(build_weights(&l, &p0), Err(WindowError::NoSupport));
        assert!(matches!(
            build_weights(&l[..100], &p),
            Err(WindowError::LengthMismatch { .. })
        ));
    }
}
