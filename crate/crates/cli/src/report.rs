//! Text report written by `solve` and read back by `oracle-check`.
//!
//! ```text
//! trw-report 1
//! vertices <n>
//! bound <lower bound>
//! passes <count>
//! terminated stall|max_passes
//! wta reached|not-reached
//! source local-sets|threshold
//! fixed <count>
//! x <vertex> <label>            (one per fixed vertex)
//! labeling <bits> energy <E>    (optional)
//! ```

use std::fmt::Write as _;

pub const MAGIC: &str = "trw-report";
pub const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub vertices: usize,
    pub bound: f64,
    pub passes: usize,
    pub terminated: String,
    pub wta: bool,
    pub source: String,
    pub fixed: Vec<(usize, u8)>,
    pub labeling: Option<(Vec<u8>, f64)>,
}

impl SolveReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{MAGIC} {VERSION}");
        let _ = writeln!(out, "vertices {}", self.vertices);
        let _ = writeln!(out, "bound {}", self.bound);
        let _ = writeln!(out, "passes {}", self.passes);
        let _ = writeln!(out, "terminated {}", self.terminated);
        let _ = writeln!(
            out,
            "wta {}",
            if self.wta { "reached" } else { "not-reached" }
        );
        let _ = writeln!(out, "source {}", self.source);
        let _ = writeln!(out, "fixed {}", self.fixed.len());
        for &(s, l) in &self.fixed {
            let _ = writeln!(out, "x {s} {l}");
        }
        if let Some((bits, energy)) = &self.labeling {
            let bits: String = bits.iter().map(|&l| char::from(b'0' + l)).collect();
            let _ = writeln!(out, "labeling {bits} energy {energy}");
        }
        out
    }

    /// Parses a report; errors carry the 1-based line number.
    pub fn parse(text: &str) -> Result<Self, (usize, String)> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split_whitespace().collect::<Vec<_>>()))
            .filter(|(_, f)| !f.is_empty());
        let mut next = |key: &str| -> Result<(usize, Vec<&str>), (usize, String)> {
            let (ln, f) = lines.next().ok_or((0, format!("missing `{key}` line")))?;
            if f[0] != key {
                return Err((ln, format!("expected `{key}`, found `{}`", f[0])));
            }
            Ok((ln, f))
        };
        fn value<V: std::str::FromStr>(
            ln: usize,
            f: &[&str],
            i: usize,
        ) -> Result<V, (usize, String)> {
            f.get(i)
                .ok_or((ln, "missing field".to_string()))?
                .parse()
                .map_err(|_| (ln, format!("cannot parse `{}`", f[i])))
        }

        let (ln, f) = next(MAGIC)?;
        if value::<u32>(ln, &f, 1)? != VERSION {
            return Err((ln, "unsupported report version".into()));
        }
        let (ln, f) = next("vertices")?;
        let vertices: usize = value(ln, &f, 1)?;
        let (ln, f) = next("bound")?;
        let bound: f64 = value(ln, &f, 1)?;
        let (ln, f) = next("passes")?;
        let passes: usize = value(ln, &f, 1)?;
        let (ln, f) = next("terminated")?;
        let terminated: String = value(ln, &f, 1)?;
        let (ln, f) = next("wta")?;
        let wta = match f.get(1).copied() {
            Some("reached") => true,
            Some("not-reached") => false,
            _ => return Err((ln, "expected `reached` or `not-reached`".into())),
        };
        let (ln, f) = next("source")?;
        let source: String = value(ln, &f, 1)?;
        let (ln, f) = next("fixed")?;
        let count: usize = value(ln, &f, 1)?;
        let mut fixed = Vec::with_capacity(count);
        for _ in 0..count {
            let (ln, f) = next("x")?;
            let s: usize = value(ln, &f, 1)?;
            let l: u8 = value(ln, &f, 2)?;
            if s >= vertices || l > 1 {
                return Err((ln, format!("invalid fixed entry `{s} {l}`")));
            }
            fixed.push((s, l));
        }
        let labeling = match lines.next() {
            None => None,
            Some((ln, f)) if f[0] == "labeling" && f.len() == 4 && f[2] == "energy" => {
                let bits: Vec<u8> = f[1]
                    .bytes()
                    .map(|b| match b {
                        b'0' => Ok(0),
                        b'1' => Ok(1),
                        _ => Err((ln, "labeling must be a 0/1 string".to_string())),
                    })
                    .collect::<Result<_, _>>()?;
                if bits.len() != vertices {
                    return Err((ln, "labeling length differs from vertex count".into()));
                }
                Some((bits, value(ln, &f, 3)?))
            }
            Some((ln, f)) => return Err((ln, format!("unexpected `{}` record", f[0]))),
        };
        Ok(Self {
            vertices,
            bound,
            passes,
            terminated,
            wta,
            source,
            fixed,
            labeling,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SolveReport {
        SolveReport {
            vertices: 3,
            bound: -1.25,
            passes: 12,
            terminated: "stall".into(),
            wta: true,
            source: "local-sets".into(),
            fixed: vec![(0, 1), (2, 0)],
            labeling: Some((vec![1, 0, 0], -1.25)),
        }
    }

    #[test]
    fn round_trip() {
        let r = sample();
        assert_eq!(SolveReport::parse(&r.to_text()).unwrap(), r);
        let mut r = sample();
        r.labeling = None;
        assert_eq!(SolveReport::parse(&r.to_text()).unwrap(), r);
    }

    #[test]
    fn malformed_lines_are_located() {
        let text = sample().to_text().replace("x 2 0", "x 2 7");
        assert_eq!(SolveReport::parse(&text).unwrap_err().0, 10);
        let text = sample().to_text().replace("bound -1.25", "bound low");
        assert_eq!(SolveReport::parse(&text).unwrap_err().0, 3);
    }
}
