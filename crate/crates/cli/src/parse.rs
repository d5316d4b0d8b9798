//! Parsers for complex vectors and scan grids given on the command line.

use egg_metrics::{CVector, Complex};

/// Parses `"re,im;re,im;..."` into a complex vector.
pub fn complex_vector(s: &str) -> Result<CVector, String> {
    let entries: Result<Vec<Complex>, String> = s
        .split(';')
        .map(|pair| {
            let mut parts = pair.split(',');
            let (Some(re), Some(im), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(format!("expected \"re,im\", got {pair:?}"));
            };
            let num = |t: &str| {
                t.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| format!("not a finite number: {t:?}"))
            };
            Ok(Complex::new(num(re)?, num(im)?))
        })
        .collect();
    let entries = entries?;
    if entries.is_empty() {
        return Err("empty vector".into());
    }
    Ok(CVector::from_vec(entries))
}

/// Parses a grid of reals: an explicit list `"a,b,c"`, an inclusive range
/// `"start:stop:count"`, or the empty string.
pub fn grid(s: &str) -> Result<Vec<f64>, String> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| format!("not a finite number: {t:?}"))
    };
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, c] = parts.as_slice() else {
            return Err(format!("range must be start:stop:count, got {s:?}"));
        };
        let (start, stop) = (num(a)?, num(b)?);
        let count: usize = c.trim().parse().map_err(|_| format!("bad count {c:?}"))?;
        return Ok(match count {
            0 => Vec::new(),
            1 => vec![start],
            _ => (0..count)
                .map(|k| start + (stop - start) * k as f64 / (count - 1) as f64)
                .collect(),
        });
    }
    s.split(',').map(num).collect()
}
