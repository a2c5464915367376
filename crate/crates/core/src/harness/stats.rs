use statrs::distribution::{ContinuousCDF, StudentsT};

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (`n - 1` denominator).
pub fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Quantile `p` of Student's t with `df` degrees of freedom.
pub fn t_quantile(p: f64, df: usize) -> f64 {
    match StudentsT::new(0.0, 1.0, df as f64) {
        Ok(t) => t.inverse_cdf(p),
        Err(_) => f64::NAN,
    }
}

/// Half-width of the two-sided 95% t interval of the mean; NaN below two samples.
pub fn ci95_half_width(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return f64::NAN;
    }
    t_quantile(0.975, xs.len() - 1) * std_dev(xs) / (xs.len() as f64).sqrt()
}

/// One-sided one-sample t statistic for `mean(diffs) > 0` and whether it
/// clears the `1 - alpha` critical value.
pub fn one_sided_t(diffs: &[f64], alpha: f64) -> (f64, f64, bool) {
    if diffs.len() < 2 {
        return (f64::NAN, f64::NAN, false);
    }
    let se = std_dev(diffs) / (diffs.len() as f64).sqrt();
    let t = if se == 0.0 {
        if mean(diffs) > 0.0 {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        }
    } else {
        mean(diffs) / se
    };
    let crit = t_quantile(1.0 - alpha, diffs.len() - 1);
    (t, crit, t > crit)
}

/// Whether two 95% mean intervals intersect.
pub fn intervals_overlap(a: &[f64], b: &[f64]) -> bool {
    let (ma, ha) = (mean(a), ci95_half_width(a));
    let (mb, hb) = (mean(b), ci95_half_width(b));
    (ma - ha) <= (mb + hb) && (mb - hb) <= (ma + ha)
}
