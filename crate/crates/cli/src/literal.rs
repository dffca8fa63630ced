//! Command-line literals: complex numbers as `a+bi`, fractions as `p/q`.

use markoff_core::markoff::Matrix2;
use markoff_core::FareyFraction;
use num_complex::Complex64;

/// Parses `3`, `-2.5`, `2i`, `-i`, `1-3i` or `1.5e-3+2e1i` (no spaces).
pub fn complex(s: &str) -> Result<Complex64, String> {
    let bad = || format!("malformed complex literal '{s}' (expected a+bi)");
    if s.is_empty() || s.contains(char::is_whitespace) {
        return Err(bad());
    }
    let real = |t: &str| -> Result<f64, String> {
        let v: f64 = t.parse().map_err(|_| bad())?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("non-finite component in '{s}'"))
        }
    };
    let Some(body) = s.strip_suffix('i') else {
        return Ok(Complex64::new(real(s)?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (real(&body[..k])?, &body[k..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        t => real(t)?,
    };
    Ok(Complex64::new(re, im))
}

fn list(s: &str, n: usize) -> Result<Vec<Complex64>, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != n {
        return Err(format!("expected {n} comma-separated complex values, got '{s}'"));
    }
    parts.into_iter().map(complex).collect()
}

pub fn triple(s: &str) -> Result<[Complex64; 3], String> {
    let v = list(s, 3)?;
    Ok([v[0], v[1], v[2]])
}

/// A 2×2 matrix written row by row: `a,b,c,d`.
pub fn matrix(s: &str) -> Result<Matrix2, String> {
    let v = list(s, 4)?;
    Ok([[v[0], v[1]], [v[2], v[3]]])
}

pub fn fraction(s: &str) -> Result<FareyFraction, String> {
    s.parse().map_err(|e: markoff_core::Error| e.to_string())
}

/// Two fractions `a,b` bounding an arc of the real line.
pub fn window(s: &str) -> Result<(FareyFraction, FareyFraction), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected a,b, got '{s}'"))?;
    let (a, b) = (fraction(a)?, fraction(b)?);
    if a.is_infinite() || b.is_infinite() || a >= b {
        return Err(format!("window needs finite a < b, got '{s}'"));
    }
    Ok((a, b))
}

pub fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("expected a positive number, got '{s}'")),
    }
}

/// Renders `a+bi` in the form [`complex`] reads back.
pub fn show(z: Complex64) -> String {
    if z.im < 0.0 || (z.im == 0.0 && z.im.is_sign_negative()) {
        format!("{}{}i", z.re, z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_forms() {
        let c = Complex64::new;
        assert_eq!(complex("3").unwrap(), c(3.0, 0.0));
        assert_eq!(complex("-2").unwrap(), c(-2.0, 0.0));
        assert_eq!(complex("2i").unwrap(), c(0.0, 2.0));
        assert_eq!(complex("-i").unwrap(), c(0.0, -1.0));
        assert_eq!(complex("i").unwrap(), c(0.0, 1.0));
        assert_eq!(complex("2-3i").unwrap(), c(2.0, -3.0));
        assert_eq!(complex("-1.5e-3+2e1i").unwrap(), c(-1.5e-3, 20.0));
        assert_eq!(complex("1e+2-1e-2i").unwrap(), c(100.0, -0.01));
        for bad in ["", "1 + 2i", "2x", "1+2", "inf", "nan+i", "1+i+i"] {
            assert!(complex(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn show_round_trips() {
        for z in [
            Complex64::new(0.1, -0.3),
            Complex64::new(-2.0, 0.0),
            Complex64::new(1e-17, 3e20),
        ] {
            assert_eq!(complex(&show(z)).unwrap(), z);
        }
    }

    #[test]
    fn windows() {
        assert!(window("0,2").is_ok());
        assert!(window("2,0").is_err());
        assert!(window("0,1/0").is_err());
    }
}
