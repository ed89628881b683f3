//! Grid specifications on the command line.
//!
//! A grid is a comma-separated list (`0.1,0.2,0.5`), a linear range
//! `lin:LO:HI:N` or a logarithmic range `geom:LO:HI:N`.

use xychain::fit::geomspace;

#[derive(Debug, Clone)]
pub struct Grid(pub Vec<f64>);

pub fn parse_grid(s: &str) -> Result<Grid, String> {
    values(s).map(Grid)
}

fn values(s: &str) -> Result<Vec<f64>, String> {
    let s = s.trim();
    if let Some(rest) = s.strip_prefix("lin:").or_else(|| s.strip_prefix("geom:")) {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("'{s}': expected KIND:LO:HI:N"));
        }
        let lo = number(parts[0])?;
        let hi = number(parts[1])?;
        let n: usize = parts[2].parse().map_err(|_| format!("'{}' is not a point count", parts[2]))?;
        if n == 0 {
            return Err(format!("'{s}': empty grid"));
        }
        if s.starts_with("geom:") {
            if !(lo > 0.0 && hi > 0.0) {
                return Err(format!("'{s}': geometric grid needs positive ends"));
            }
            return Ok(geomspace(lo, hi, n));
        }
        if n == 1 {
            return Ok(vec![lo]);
        }
        return Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect());
    }
    let v = s.split(',').map(number).collect::<Result<Vec<_>, _>>()?;
    if v.is_empty() {
        return Err("empty grid".into());
    }
    Ok(v)
}

fn number(s: &str) -> Result<f64, String> {
    let x: f64 = s.trim().parse().map_err(|_| format!("'{s}' is not a number"))?;
    if !x.is_finite() {
        return Err(format!("'{s}' is not finite"));
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_and_ranges() {
        assert_eq!(values("0.1, 0.2").unwrap(), vec![0.1, 0.2]);
        assert_eq!(values("lin:0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        let g = values("geom:1e-4:1e-2:3").unwrap();
        assert!((g[1] - 1e-3).abs() < 1e-15);
        assert!(values("geom:0:1:3").is_err());
        assert!(values("lin:0:1").is_err());
        assert!(values("x").is_err());
        assert!(values("lin:0:1:0").is_err());
    }
}
