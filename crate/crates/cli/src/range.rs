//! Value lists written as comma-separated items, each either a single value or an
//! inclusive range `start..end[:step]`.

use crate::error::{CliError, Result};

pub fn parse_reals(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for item in items(text)? {
        match item.split_once("..") {
            None => out.push(real(item, text)?),
            Some((start, rest)) => {
                let (end, step) = match rest.split_once(':') {
                    Some((e, s)) => (real(e, text)?, Some(real(s, text)?)),
                    None => (real(rest, text)?, None),
                };
                let start = real(start, text)?;
                let step = match step {
                    Some(s) if s > 0.0 => s,
                    Some(s) => return Err(CliError::usage(format!("step must be positive in `{text}`, got {s}"))),
                    None if start == end => 1.0,
                    None => return Err(CliError::usage(format!("real range `{item}` needs a `:step`"))),
                };
                if end < start {
                    return Err(CliError::usage(format!("range `{item}` is empty")));
                }
                // Tolerate accumulated rounding at the inclusive end.
                let count = ((end - start) / step + 1e-9).floor() as usize;
                out.extend((0..=count).map(|i| start + step * i as f64));
            }
        }
    }
    Ok(out)
}

pub fn parse_counts(text: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for item in items(text)? {
        match item.split_once("..") {
            None => out.push(count(item, text)?),
            Some((start, rest)) => {
                let (end, step) = match rest.split_once(':') {
                    Some((e, s)) => (count(e, text)?, count(s, text)?),
                    None => (count(rest, text)?, 1),
                };
                let start = count(start, text)?;
                if step == 0 {
                    return Err(CliError::usage(format!("step must be positive in `{text}`")));
                }
                if end < start {
                    return Err(CliError::usage(format!("range `{item}` is empty")));
                }
                out.extend((start..=end).step_by(step));
            }
        }
    }
    Ok(out)
}

fn items(text: &str) -> Result<impl Iterator<Item = &str>> {
    if text.trim().is_empty() {
        return Err(CliError::usage("empty value list"));
    }
    Ok(text.split(',').map(str::trim))
}

fn real(s: &str, text: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| CliError::usage(format!("`{s}` in `{text}` is not a finite number")))
}

fn count(s: &str, text: &str) -> Result<usize> {
    s.trim().parse().map_err(|_| CliError::usage(format!("`{s}` in `{text}` is not a non-negative integer")))
}
