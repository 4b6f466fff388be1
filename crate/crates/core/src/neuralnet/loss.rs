use crate::error::{Error, Result};

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Mean binary cross-entropy of logits against 0/1 labels, in the
/// `max(z, 0) - z*y + log(1 + exp(-|z|))` form that cannot overflow.
pub fn bce_loss(logits: &[f64], labels: &[f64]) -> Result<f64> {
    if logits.len() != labels.len() {
        return Err(Error::Shape {
            expected: logits.len(),
            actual: labels.len(),
        });
    }
    if logits.is_empty() {
        return Err(Error::Domain("cross-entropy of an empty batch".into()));
    }
    let mut total = 0.0;
    for (&z, &y) in logits.iter().zip(labels) {
        if y != 0.0 && y != 1.0 {
            return Err(Error::Domain(format!("label must be 0 or 1, got {y}")));
        }
        total += pointwise(z, y);
    }
    Ok(total / logits.len() as f64)
}

#[inline]
pub(crate) fn pointwise(z: f64, y: f64) -> f64 {
    z.max(0.0) - z * y + (-z.abs()).exp().ln_1p()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        let ln2 = std::f64::consts::LN_2;
        assert!((bce_loss(&[0.0], &[1.0]).unwrap() - ln2).abs() < 1e-15);
        assert!((bce_loss(&[0.0, 0.0], &[0.0, 1.0]).unwrap() - ln2).abs() < 1e-15);
        let big = bce_loss(&[50.0], &[1.0]).unwrap();
        assert!(big.is_finite() && big > 0.0);
        assert!((big - 1.928_749_847_963_918e-22).abs() < 1e-30);
        assert!(bce_loss(&[-800.0], &[1.0]).unwrap().is_finite());
    }

    #[test]
    fn matches_naive_form_where_stable() {
        for &(z, y) in &[(0.3, 1.0), (-2.0, 0.0), (4.5, 0.0), (-1.2, 1.0)] {
            let p = sigmoid(z);
            let naive = -(y * p.ln() + (1.0 - y) * (1.0 - p).ln());
            assert!((bce_loss(&[z], &[y]).unwrap() - naive).abs() < 1e-12);
        }
    }

    #[test]
    fn errors() {
        assert!(matches!(bce_loss(&[], &[]), Err(Error::Domain(_))));
        assert!(bce_loss(&[0.0], &[0.5]).is_err());
        assert!(bce_loss(&[0.0, 1.0], &[1.0]).is_err());
    }

    #[test]
    fn sigmoid_is_symmetric() {
        for z in [-700.0, -3.0, 0.0, 2.5, 700.0] {
            assert!((sigmoid(z) + sigmoid(-z) - 1.0).abs() < 1e-15);
        }
    }
}
