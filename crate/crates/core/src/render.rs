//! Text and PPM dumps of configurations.

use std::fmt::Write;

use crate::cell::Cell;
use crate::config::Configuration;
use crate::error::{Error, Result};

fn span(lo: &Cell, hi: &Cell, i: usize) -> std::ops::RangeInclusive<i64> {
    lo[i]..=hi[i]
}

fn rows_2d(c: &Configuration, lo: &Cell, hi: &Cell, fixed: &[i64], width: usize, out: &mut String) {
    let d = c.dim();
    let ys: Vec<i64> = if d == 1 { vec![0] } else { span(lo, hi, 1).rev().collect() };
    for y in ys {
        let line: Vec<String> = span(lo, hi, 0)
            .map(|x| {
                let mut p = vec![x];
                if d > 1 {
                    p.push(y);
                }
                p.extend_from_slice(fixed);
                format!("{:>width$}", c.get(&Cell::from(p)))
            })
            .collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
}

/// Aligned grid of grain counts; rows run from the largest y down. Three dimensions print one
/// grid per z slice; higher dimensions fall back to a cell list.
pub fn render_text(c: &Configuration, bounds: Option<(Cell, Cell)>) -> String {
    let d = c.dim();
    let mut out = String::new();
    let Some((lo, hi)) = bounds.or_else(|| c.bounding_box()) else {
        let _ = writeln!(out, "grid d={d} empty");
        return out;
    };
    if d > 3 {
        let _ = writeln!(out, "dump d={d}");
        for (x, k) in c.iter() {
            let coords: Vec<String> = x.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{} {k}", coords.join(" "));
        }
        return out;
    }
    let names = ["x", "y", "z"];
    let header: Vec<String> = (0..d).map(|i| format!("{}={}..{}", names[i], lo[i], hi[i])).collect();
    let _ = writeln!(out, "grid d={d} {}", header.join(" "));
    let width = c.max_count().max(1).to_string().len();
    if d == 3 {
        for z in span(&lo, &hi, 2) {
            let _ = writeln!(out, "z={z}");
            rows_2d(c, &lo, &hi, &[z], width, &mut out);
        }
    } else {
        rows_2d(c, &lo, &hi, &[], width, &mut out);
    }
    out
}

/// Binary PPM with one `scale`-sized square per cell: white for empty, darker grey for fuller
/// cells, red for unstable ones. Slices of a 3D configuration are stacked with a black rule.
pub fn render_ppm(c: &Configuration, theta: u64, scale: usize) -> Result<Vec<u8>> {
    let d = c.dim();
    if d > 3 {
        return Err(Error::Unsupported("pixmaps need d <= 3; use the text dump".into()));
    }
    let scale = scale.max(1);
    let Some((lo, hi)) = c.bounding_box() else {
        return Ok(b"P6\n0 0\n255\n".to_vec());
    };
    let w = (hi[0] - lo[0] + 1) as usize;
    let h = if d >= 2 { (hi[1] - lo[1] + 1) as usize } else { 1 };
    let slices: Vec<i64> = if d == 3 { span(&lo, &hi, 2).collect() } else { vec![0] };
    let total_h = slices.len() * h + slices.len() - 1;
    let mut px = vec![[0u8; 3]; w * total_h];
    for (s, &z) in slices.iter().enumerate() {
        for row in 0..h {
            let y = if d >= 2 { hi[1] - row as i64 } else { 0 };
            for col in 0..w {
                let mut p = vec![lo[0] + col as i64];
                if d >= 2 {
                    p.push(y);
                }
                if d == 3 {
                    p.push(z);
                }
                let k = c.get(&Cell::from(p));
                let rgb = if k >= theta {
                    [200, 0, 0]
                } else {
                    let g = 255 - (255 * k / theta.max(1)) as u8;
                    [g, g, g]
                };
                px[(s * (h + 1) + row) * w + col] = rgb;
            }
        }
    }
    let mut out = format!("P6\n{} {}\n255\n", w * scale, total_h * scale).into_bytes();
    for row in 0..total_h {
        for _ in 0..scale {
            for col in 0..w {
                for _ in 0..scale {
                    out.extend_from_slice(&px[row * w + col]);
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_grids() {
        assert_eq!(render_text(&Configuration::new(2), None), "grid d=2 empty\n");
        let c = Configuration::from_pairs(2, [([0, 0], 3), ([1, 1], 12)]).unwrap();
        assert_eq!(render_text(&c, None), "grid d=2 x=0..1 y=0..1\n 0 12\n 3  0\n");
        let line = Configuration::from_pairs(1, [([-1], 1), ([1], 2)]).unwrap();
        assert_eq!(render_text(&line, None), "grid d=1 x=-1..1\n1 0 2\n");
        let cube = Configuration::from_pairs(3, [([0, 0, 0], 1), ([0, 0, 1], 2)]).unwrap();
        assert_eq!(render_text(&cube, None), "grid d=3 x=0..0 y=0..0 z=0..1\nz=0\n1\nz=1\n2\n");
        let far = Configuration::from_pairs(4, [([0, 1, 2, 3], 5)]).unwrap();
        assert_eq!(render_text(&far, None), "dump d=4\n0 1 2 3 5\n");
    }

    #[test]
    fn pixmaps() {
        let c = Configuration::from_pairs(2, [([0, 0], 3), ([1, 1], 4)]).unwrap();
        let p = render_ppm(&c, 4, 2).unwrap();
        assert!(p.starts_with(b"P6\n4 4\n255\n"));
        assert_eq!(p.len(), 11 + 4 * 4 * 3);
        assert_eq!(p, render_ppm(&c, 4, 2).unwrap());
        assert!(render_ppm(&Configuration::new(5), 4, 1).is_err());
    }
}
