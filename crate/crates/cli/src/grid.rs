//! Angle lists at the command line, in degrees: `start:stop:step`
//! (stop inclusive), a comma list, or a single value.

use crate::error::CliError;

const MAX_POINTS: usize = 100_000;

pub fn parse_angles(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = |why: &str| CliError::Config(format!("angle list `{text}`: {why}"));
    let num = |s: &str| -> Result<f64, CliError> {
        let v: f64 = s.trim().parse().map_err(|_| bad("not a number"))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(bad("not finite"))
        }
    };
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err(bad("empty"));
    }
    if trimmed.contains(':') {
        let parts: Vec<&str> = trimmed.split(':').collect();
        let [start, stop, step] = parts[..] else {
            return Err(bad("expected start:stop:step"));
        };
        let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
        if step == 0.0 || (stop - start) * step < 0.0 {
            return Err(bad("step must be nonzero and point from start to stop"));
        }
        let span = (stop - start) / step;
        let count = (span + 1e-9).floor() as usize + 1;
        if count > MAX_POINTS {
            return Err(bad("too many points"));
        }
        return Ok((0..count).map(|i| start + i as f64 * step).collect());
    }
    trimmed.split(',').map(num).collect()
}
