use std::path::Path as StdPath;

use anyhow::{bail, Context, Result};
use privpath_core::{Path, Point};

/// Load a route file: one `x,y` point per line, decimal integers. A file
/// with `k` points describes `k - 1` segments.
pub fn load_path(file: &StdPath) -> Result<Path> {
    let text = std::fs::read_to_string(file)
        .with_context(|| format!("reading route file {}", file.display()))?;
    parse_path(&text).with_context(|| format!("parsing route file {}", file.display()))
}

pub fn parse_path(text: &str) -> Result<Path> {
    let mut points = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let Some((xs, ys)) = line.split_once(',') else {
            bail!("line {}: expected `x,y`, got {line:?}", lineno + 1);
        };
        let x: i64 = xs
            .trim()
            .parse()
            .with_context(|| format!("line {}: bad x coordinate {xs:?}", lineno + 1))?;
        let y: i64 = ys
            .trim()
            .parse()
            .with_context(|| format!("line {}: bad y coordinate {ys:?}", lineno + 1))?;
        points.push(Point::new(x, y).with_context(|| format!("line {}", lineno + 1))?);
    }
    if points.is_empty() {
        bail!("route file has no points");
    }
    Ok(Path::new(points)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_points_and_blank_lines() {
        let p = parse_path("0,0\n  10 , 5 \n\n-3,-99\n").unwrap();
        assert_eq!(p.points().len(), 3);
        assert_eq!(p.segments().len(), 2);
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_path("").is_err());
        assert!(parse_path("1;2").is_err());
        assert!(parse_path("a,2").is_err());
        assert!(parse_path("1.5,2").is_err());
        // out of the signed-coordinate bound
        assert!(parse_path("4294967296,0").is_err());
    }
}
