//! Parameter grids: `start:stop:step`, a comma list, or a single value.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct GridError(pub String);

impl fmt::Display for GridError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for GridError {}

fn number(s: &str) -> Result<f64, GridError> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| GridError(format!("'{s}' is not a number")))?;
    if !v.is_finite() {
        return Err(GridError(format!("'{s}' is not finite")));
    }
    Ok(v)
}

/// Parses a grid. A range keeps every point less than half a step beyond
/// `stop`, so `stop` itself survives rounding in the step.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, GridError> {
    let text = text.trim();
    if text.is_empty() {
        return Err(GridError("empty grid".into()));
    }
    let parts: Vec<&str> = text.split(':').collect();
    match parts.len() {
        1 => text.split(',').map(number).collect(),
        3 => {
            let (start, stop, step) = (number(parts[0])?, number(parts[1])?, number(parts[2])?);
            if step <= 0.0 {
                return Err(GridError(format!("step must be positive in '{text}'")));
            }
            if stop < start {
                return Err(GridError(format!("stop is below start in '{text}'")));
            }
            let count = (((stop - start) / step + 0.5).ceil() as usize).saturating_sub(1);
            if count > 10_000_000 {
                return Err(GridError(format!("'{text}' has too many points")));
            }
            Ok((0..=count)
                .map(|i| {
                    let v = start + i as f64 * step;
                    if (v - stop).abs() <= 1e-9 * step {
                        stop
                    } else {
                        v
                    }
                })
                .collect())
        }
        _ => Err(GridError(format!("'{text}' is neither start:stop:step nor a list"))),
    }
}

/// Comma-separated list of positive integers.
pub fn parse_counts(text: &str) -> Result<Vec<usize>, GridError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| GridError(format!("'{s}' is not a nonnegative integer")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        let g = parse_grid("0:1:0.05").unwrap();
        assert_eq!(g.len(), 21);
        assert_eq!(g[20], 1.0);
        let g = parse_grid("-0.95:0.95:0.05").unwrap();
        assert_eq!(g.len(), 39);
        assert_eq!(*g.last().unwrap(), 0.95);
        assert_eq!(parse_grid("0:1:0.3").unwrap().len(), 4);
        assert_eq!(parse_grid("0:1:0.4").unwrap().len(), 3);
        assert_eq!(parse_grid("2:2:1").unwrap(), vec![2.0]);
    }

    #[test]
    fn lists_and_errors() {
        assert_eq!(parse_grid("0.1").unwrap(), vec![0.1]);
        assert_eq!(parse_grid("0, -0.4,0.4").unwrap(), vec![0.0, -0.4, 0.4]);
        for bad in ["", "a", "0:1", "0:1:0", "1:0:0.1", "1,,2", "inf"] {
            assert!(parse_grid(bad).is_err(), "{bad}");
        }
        assert_eq!(parse_counts("10,20").unwrap(), vec![10, 20]);
        assert!(parse_counts("1,-2").is_err());
    }
}
