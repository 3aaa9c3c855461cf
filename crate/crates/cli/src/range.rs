//! `start:stop:step` sweep ranges. The stop value is included when the grid lands on it.

use std::fmt;
use std::str::FromStr;

const MAX_POINTS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct FloatRange {
    text: String,
    values: Vec<f64>,
}

impl FloatRange {
    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl fmt::Display for FloatRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    if !v.is_finite() {
        return Err(format!("`{s}` is not finite"));
    }
    Ok(v)
}

impl FromStr for FloatRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let values = match parts.as_slice() {
            [one] => vec![parse_f64(one)?],
            [start, stop, step] => {
                let (start, stop, step) = (parse_f64(start)?, parse_f64(stop)?, parse_f64(step)?);
                if step <= 0.0 {
                    return Err(format!("step must be positive in `{s}`"));
                }
                if stop < start {
                    return Err(format!("stop below start in `{s}`"));
                }
                let span = (stop - start) / step;
                if span >= MAX_POINTS as f64 {
                    return Err(format!("`{s}` has more than {MAX_POINTS} points"));
                }
                // tolerate rounding in the division so that 0.5:3.0:0.05 ends at 3.0
                let n = (span + 1e-9).floor() as usize;
                (0..=n).map(|i| start + i as f64 * step).collect()
            }
            _ => return Err(format!("expected `value` or `start:stop:step`, got `{s}`")),
        };
        Ok(Self { text: s.to_string(), values })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntRange {
    text: String,
    values: Vec<usize>,
}

impl IntRange {
    pub fn values(&self) -> &[usize] {
        &self.values
    }
}

impl fmt::Display for IntRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

fn parse_usize(s: &str) -> Result<usize, String> {
    s.trim().parse().map_err(|_| format!("`{s}` is not a non-negative integer"))
}

impl FromStr for IntRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let (start, stop, step) = match parts.as_slice() {
            [one] => {
                let v = parse_usize(one)?;
                (v, v, 1)
            }
            [start, stop] => (parse_usize(start)?, parse_usize(stop)?, 1),
            [start, stop, step] => (parse_usize(start)?, parse_usize(stop)?, parse_usize(step)?),
            _ => return Err(format!("expected `n`, `start:stop` or `start:stop:step`, got `{s}`")),
        };
        if step == 0 {
            return Err(format!("step must be positive in `{s}`"));
        }
        if stop < start {
            return Err(format!("stop below start in `{s}`"));
        }
        if (stop - start) / step >= MAX_POINTS {
            return Err(format!("`{s}` has more than {MAX_POINTS} points"));
        }
        Ok(Self { text: s.to_string(), values: (start..=stop).step_by(step).collect() })
    }
}
