//! `N` lists: `start:step:stop` ranges (inclusive), comma lists, or a mix.

use crate::error::{CliError, Result};

pub fn parse_sweep(s: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim) {
        if part.is_empty() {
            return Err(CliError::Param(format!("empty entry in N list `{s}`")));
        }
        let fields: Vec<&str> = part.split(':').collect();
        match fields.as_slice() {
            [n] => out.push(number(n)?),
            [start, step, stop] => {
                let (start, step, stop) = (number(start)?, number(step)?, number(stop)?);
                if step == 0 || stop < start {
                    return Err(CliError::Param(format!("range `{part}` needs step > 0 and stop >= start")));
                }
                out.extend((start..=stop).step_by(step));
            }
            _ => return Err(CliError::Param(format!("cannot read `{part}`; use N, a,b,c or start:step:stop"))),
        }
    }
    Ok(out)
}

fn number(s: &str) -> Result<usize> {
    let n: usize = s.trim().parse().map_err(|_| CliError::Param(format!("`{s}` is not a non-negative integer")))?;
    if n == 0 {
        return Err(CliError::Param("N must be at least 1".into()));
    }
    Ok(n)
}
