//! Parameter grids on the command line: `a:b:step` ranges or comma lists.

/// Parse `start:stop:step` (inclusive, tolerant of rounding) or `v1,v2,...`.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, String> {
    let num = |s: &str| -> Result<f64, String> {
        let v: f64 = s
            .trim()
            .parse()
            .map_err(|_| format!("bad number {s:?} in grid {text:?}"))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("non-finite value in grid {text:?}"))
        }
    };
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let [a, b, step] = parts[..] else {
            return Err(format!("range {text:?} must look like start:stop:step"));
        };
        let (a, b, step) = (num(a)?, num(b)?, num(step)?);
        if step <= 0.0 || b < a {
            return Err(format!("range {text:?} needs step > 0 and stop >= start"));
        }
        let count = ((b - a) / step + 1e-9).floor() as usize;
        if count > 1_000_000 {
            return Err(format!("range {text:?} has too many points"));
        }
        // index-based values avoid accumulated drift
        Ok((0..=count).map(|i| a + i as f64 * step).collect())
    } else {
        let v: Vec<f64> = text.split(',').map(num).collect::<Result<_, _>>()?;
        if v.is_empty() {
            return Err("empty grid".into());
        }
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_and_lists() {
        let g = parse_grid("0.01:0.3:0.01").unwrap();
        assert_eq!(g.len(), 30);
        assert!((g[29] - 0.3).abs() < 1e-12);
        assert_eq!(parse_grid("1,2.5, 3").unwrap(), vec![1.0, 2.5, 3.0]);
        assert_eq!(parse_grid("0.5").unwrap(), vec![0.5]);
        assert!(parse_grid("1:0:0.1").is_err());
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("a,b").is_err());
        assert!(parse_grid("0:1:0").is_err());
    }
}
