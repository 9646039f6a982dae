pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `u.v / (|u| |v|)`, or 0 when either vector has zero norm.
///
/// Panics if the lengths differ.
pub fn cosine_similarity(u: &[f64], v: &[f64]) -> f64 {
    assert_eq!(u.len(), v.len(), "cosine of vectors with different dimensions");
    let (nu, nv) = (norm(u), norm(v));
    if nu == 0.0 || nv == 0.0 {
        return 0.0;
    }
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    (dot / (nu * nv)).clamp(-1.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reference_values() {
        let v = [0.3, -1.2, 2.0];
        assert!((cosine_similarity(&v, &v) - 1.0).abs() < 1e-12);
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[0.0, 1.0]), 0.0);
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();
        assert!((cosine_similarity(&v, &neg) + 1.0).abs() < 1e-12);
        assert_eq!(cosine_similarity(&[0.0, 0.0], &[1.0, 2.0]), 0.0);
    }

    fn vec3() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-10.0f64..10.0, 3)
    }

    proptest! {
        #[test]
        fn symmetric_bounded_scale_invariant(u in vec3(), v in vec3(), alpha in 1e-3f64..1e3) {
            let c = cosine_similarity(&u, &v);
            prop_assert!((-1.0..=1.0).contains(&c));
            prop_assert!((c - cosine_similarity(&v, &u)).abs() <= 1e-12);
            let scaled: Vec<f64> = u.iter().map(|x| alpha * x).collect();
            prop_assert!((cosine_similarity(&scaled, &v) - c).abs() <= 1e-9);
        }
    }
}
