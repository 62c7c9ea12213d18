use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};

/// Reads a one-column sample file.
///
/// Blank lines and lines starting with `#` are skipped. Every other line
/// must hold one finite number. Order is preserved.
pub fn parse_sample_file(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_samples(&text).with_context(|| format!("in {}", path.display()))
}

pub fn parse_samples(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: f64 = line
            .parse()
            .with_context(|| format!("line {}: cannot parse {line:?} as a number", i + 1))?;
        if !v.is_finite() {
            bail!("line {}: value {line:?} is not finite", i + 1);
        }
        out.push(v);
    }
    if out.is_empty() {
        bail!("sample is empty");
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_values() {
        assert_eq!(parse_samples("1.0\n2.5\n-3\n").unwrap(), vec![1.0, 2.5, -3.0]);
    }

    #[test]
    fn comments_and_blanks() {
        assert_eq!(parse_samples("# header\n\n 4 \n# mid\n5e-1\n").unwrap(), vec![4.0, 0.5]);
    }

    #[test]
    fn bad_line_is_named() {
        let e = format!("{:#}", parse_samples("abc\n").unwrap_err());
        assert!(e.contains("line 1"), "{e}");
        let e = format!("{:#}", parse_samples("1\n2\nx2\n").unwrap_err());
        assert!(e.contains("line 3"), "{e}");
    }

    #[test]
    fn rejects_non_finite_and_empty() {
        assert!(parse_samples("1\nNaN\n").is_err());
        assert!(parse_samples("inf\n").is_err());
        assert!(parse_samples("# only a comment\n\n").is_err());
    }
}
