//! Deterministic text output.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::CliError;

/// Twelve significant digits in scientific notation.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        // drop the sign of negative zero so reruns cannot differ in it
        return format!("{:.11e}", 0.0);
    }
    format!("{x:.11e}")
}

pub fn csv_line(fields: &[f64]) -> String {
    fields.iter().map(|&x| num(x)).collect::<Vec<_>>().join(",")
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::Output(format!("{}: {e}", parent.display())))?;
    }
    let mut f = fs::File::create(path).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
    f.write_all(contents.as_bytes())
        .map_err(|e| CliError::Output(format!("{}: {e}", path.display())))
}

/// Writes to `path` if given, stdout otherwise.
pub fn emit(path: Option<&Path>, contents: &str) -> Result<(), CliError> {
    match path {
        Some(p) => write_file(p, contents),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(contents.as_bytes())
                .map_err(|e| CliError::Output(format!("stdout: {e}")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(num(1.0), "1.00000000000e0");
        assert_eq!(num(-0.0), "0.00000000000e0");
        assert_eq!(num(0.123456789012345), "1.23456789012e-1");
        assert_eq!(csv_line(&[1.0, 2.5]), "1.00000000000e0,2.50000000000e0");
    }
}
