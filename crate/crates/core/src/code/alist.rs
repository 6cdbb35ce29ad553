//! MacKay alist format: 1-based neighbor lists, optionally zero padded.

use std::fmt::Write;

use super::ParityCheckCode;
use crate::error::{Error, Result};

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    /// Next non-blank line as (1-based line number, parsed integers).
    fn next_numbers(&mut self, what: &str) -> Result<(usize, Vec<usize>)> {
        for (idx, line) in self.inner.by_ref() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let nums = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<usize>().map_err(|_| Error::Alist {
                        line: idx + 1,
                        msg: format!("expected a non-negative integer, found {t:?}"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            return Ok((idx + 1, nums));
        }
        Err(Error::Alist {
            line: 0,
            msg: format!("unexpected end of input while reading {what}"),
        })
    }
}

fn expect_len(line: usize, nums: &[usize], n: usize, what: &str) -> Result<()> {
    if nums.len() != n {
        return Err(Error::Alist {
            line,
            msg: format!("{what}: expected {n} values, found {}", nums.len()),
        });
    }
    Ok(())
}

/// Reads neighbor lists: the first `degree` entries are 1-based indices in
/// `1..=limit`, anything after must be zero padding.
fn read_lists(
    lines: &mut Lines<'_>,
    degrees: &[usize],
    limit: usize,
    what: &str,
) -> Result<Vec<Vec<usize>>> {
    degrees
        .iter()
        .enumerate()
        .map(|(k, &deg)| {
            let (line, nums) = lines.next_numbers(what)?;
            if nums.len() < deg {
                return Err(Error::Alist {
                    line,
                    msg: format!("{what} {}: degree {deg} but {} entries", k + 1, nums.len()),
                });
            }
            let mut out = Vec::with_capacity(deg);
            for (pos, &v) in nums.iter().enumerate() {
                if pos < deg {
                    if v == 0 || v > limit {
                        return Err(Error::Alist {
                            line,
                            msg: format!(
                                "{what} {}: index {v} at position {} is outside 1..={limit}",
                                k + 1,
                                pos + 1
                            ),
                        });
                    }
                    out.push(v - 1);
                } else if v != 0 {
                    return Err(Error::Alist {
                        line,
                        msg: format!(
                            "{what} {}: non-zero entry {v} beyond declared degree {deg}",
                            k + 1
                        ),
                    });
                }
            }
            Ok(out)
        })
        .collect()
}

pub fn parse_alist(text: &str) -> Result<ParityCheckCode> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
    };
    let (l, hdr) = lines.next_numbers("header")?;
    expect_len(l, &hdr, 2, "header")?;
    let (n, m) = (hdr[0], hdr[1]);
    let (l, maxes) = lines.next_numbers("maximum degrees")?;
    expect_len(l, &maxes, 2, "maximum degrees")?;
    let (l, col_deg) = lines.next_numbers("column degrees")?;
    expect_len(l, &col_deg, n, "column degrees")?;
    let (l, row_deg) = lines.next_numbers("row degrees")?;
    expect_len(l, &row_deg, m, "row degrees")?;
    if col_deg.iter().copied().max().unwrap_or(0) > maxes[0]
        || row_deg.iter().copied().max().unwrap_or(0) > maxes[1]
    {
        return Err(Error::Alist {
            line: 2,
            msg: "a degree exceeds the declared maximum".into(),
        });
    }
    if col_deg.iter().sum::<usize>() != row_deg.iter().sum::<usize>() {
        return Err(Error::Alist {
            line: l,
            msg: "column and row degree totals differ".into(),
        });
    }
    let cols = read_lists(&mut lines, &col_deg, m, "bit")?;
    let rows = read_lists(&mut lines, &row_deg, n, "check")?;
    let code = ParityCheckCode::from_checks(n, rows).map_err(|e| Error::Alist {
        line: 0,
        msg: e.to_string(),
    })?;
    for (i, list) in cols.iter().enumerate() {
        let mut a = list.clone();
        let mut b = code.bit_neighbors(i).to_vec();
        a.sort_unstable();
        b.sort_unstable();
        if a != b {
            return Err(Error::Alist {
                line: 0,
                msg: format!("bit {} lists checks {:?} but the check lists give {:?}", i + 1, a, b),
            });
        }
    }
    Ok(code)
}

pub fn emit_alist(code: &ParityCheckCode) -> String {
    let n = code.n_bits();
    let m = code.n_checks();
    let col_deg: Vec<usize> = (0..n).map(|i| code.bit_degree(i)).collect();
    let row_deg: Vec<usize> = (0..m).map(|a| code.check_degree(a)).collect();
    let max_col = col_deg.iter().copied().max().unwrap_or(0);
    let max_row = row_deg.iter().copied().max().unwrap_or(0);
    let join = |v: &[usize]| {
        v.iter()
            .map(usize::to_string)
            .collect::<Vec<_>>()
            .join(" ")
    };
    let padded = |list: &[usize], width: usize| {
        let mut v: Vec<usize> = list.iter().map(|x| x + 1).collect();
        v.resize(width, 0);
        join(&v)
    };
    let mut s = String::new();
    let _ = writeln!(s, "{n} {m}");
    let _ = writeln!(s, "{max_col} {max_row}");
    let _ = writeln!(s, "{}", join(&col_deg));
    let _ = writeln!(s, "{}", join(&row_deg));
    for i in 0..n {
        let _ = writeln!(s, "{}", padded(code.bit_neighbors(i), max_col));
    }
    for a in 0..m {
        let _ = writeln!(s, "{}", padded(code.check_neighbors(a), max_row));
    }
    s
}
