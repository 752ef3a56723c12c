//! alist reader and writer.
//!
//! Layout (all indices 1-based):
//!
//! ```text
//! N M                 columns (bits) and rows (checks)
//! max_col max_row     largest column and row weight
//! w_1 ... w_N         column weights
//! r_1 ... r_M         row weights
//! N lines             row indices of each column, optionally padded with 0
//! M lines             column indices of each row, optionally padded with 0
//! ```

use std::fmt::Write;

use super::ParityCheckMatrix;
use crate::error::{Error, Result};

fn err<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Alist(format!("line {line}: {}", msg.into())))
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    /// Next non-blank line as numbers.
    fn next_numbers(&mut self, what: &str) -> Result<(usize, Vec<usize>)> {
        for (no, line) in self.inner.by_ref() {
            self.last = no + 1;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut out = Vec::new();
            for tok in line.split_whitespace() {
                match tok.parse::<usize>() {
                    Ok(v) => out.push(v),
                    Err(_) => return err(no + 1, format!("'{tok}' is not a non-negative integer")),
                }
            }
            return Ok((no + 1, out));
        }
        err(self.last + 1, format!("unexpected end of file, expected {what}"))
    }

    fn exactly(&mut self, n: usize, what: &str) -> Result<(usize, Vec<usize>)> {
        let (no, v) = self.next_numbers(what)?;
        if v.len() != n {
            return err(no, format!("expected {n} values for {what}, found {}", v.len()));
        }
        Ok((no, v))
    }
}

/// Guards against absurd headers before allocating.
const MAX_DIM: usize = 1 << 24;

pub(super) fn parse(content: &str) -> Result<ParityCheckMatrix> {
    let mut lines = Lines {
        inner: content.lines().enumerate(),
        last: 0,
    };
    let (no, dims) = lines.exactly(2, "dimensions")?;
    let (n, m) = (dims[0], dims[1]);
    if n == 0 || m == 0 || n > MAX_DIM || m > MAX_DIM {
        return err(no, format!("unsupported dimensions {n} x {m}"));
    }
    let (no, maxes) = lines.exactly(2, "maximum weights")?;
    let (max_col, max_row) = (maxes[0], maxes[1]);
    if max_col > m || max_row > n {
        return err(no, "maximum weight exceeds matrix dimension");
    }
    let (no_c, col_w) = lines.exactly(n, "column weights")?;
    let (no_r, row_w) = lines.exactly(m, "row weights")?;
    if col_w.iter().copied().max() != Some(max_col) {
        return err(no_c, "column weights disagree with the declared maximum");
    }
    if row_w.iter().copied().max() != Some(max_row) {
        return err(no_r, "row weights disagree with the declared maximum");
    }
    if col_w.iter().sum::<usize>() != row_w.iter().sum::<usize>() {
        return err(no_r, "column and row weights count different numbers of edges");
    }

    let read_lists =
        |lines: &mut Lines, count: usize, weights: &[usize], bound: usize, what: &str| -> Result<Vec<Vec<usize>>> {
            let mut lists = Vec::with_capacity(count);
            for (idx, &w) in weights.iter().enumerate() {
                let (no, raw) = lines.next_numbers(what)?;
                let entries: Vec<usize> = raw.iter().copied().filter(|&v| v != 0).collect();
                if raw[entries.len()..].iter().any(|&v| v != 0) {
                    return err(no, format!("{what} {}: zero padding must come last", idx + 1));
                }
                if entries.len() != w {
                    return err(
                        no,
                        format!("{what} {} lists {} entries, weight is {w}", idx + 1, entries.len()),
                    );
                }
                if let Some(&bad) = entries.iter().find(|&&v| v > bound) {
                    return err(no, format!("{what} {}: index {bad} out of range 1..={bound}", idx + 1));
                }
                lists.push(entries.iter().map(|v| v - 1).collect());
            }
            Ok(lists)
        };

    let cols = read_lists(&mut lines, n, &col_w, m, "column")?;
    let rows = read_lists(&mut lines, m, &row_w, n, "row")?;
    for (no, line) in lines.inner.by_ref() {
        if !line.trim().is_empty() {
            return err(no + 1, "trailing content after the row lists");
        }
    }

    let pcm = ParityCheckMatrix::from_checks(n, rows)?;
    for (i, col) in cols.iter().enumerate() {
        let mut col = col.clone();
        col.sort_unstable();
        if col != pcm.var_neighbors(i) {
            return Err(Error::Alist(format!("column {} disagrees with the row lists", i + 1)));
        }
    }
    Ok(pcm)
}

pub(super) fn write(pcm: &ParityCheckMatrix) -> String {
    let mut s = String::new();
    let n = pcm.n_bits();
    let m = pcm.n_checks();
    let max_col = pcm.max_column_weight();
    let max_row = pcm.max_row_weight();
    let join = |v: &mut dyn Iterator<Item = usize>| v.map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    writeln!(s, "{n} {m}").unwrap();
    writeln!(s, "{max_col} {max_row}").unwrap();
    writeln!(s, "{}", join(&mut (0..n).map(|i| pcm.var_neighbors(i).len()))).unwrap();
    writeln!(s, "{}", join(&mut (0..m).map(|c| pcm.check_neighbors(c).len()))).unwrap();
    for i in 0..n {
        let v = pcm.var_neighbors(i);
        writeln!(
            s,
            "{}",
            join(&mut v.iter().map(|c| c + 1).chain(std::iter::repeat_n(0, max_col - v.len())))
        )
        .unwrap();
    }
    for c in 0..m {
        let v = pcm.check_neighbors(c);
        writeln!(
            s,
            "{}",
            join(&mut v.iter().map(|i| i + 1).chain(std::iter::repeat_n(0, max_row - v.len())))
        )
        .unwrap();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::super::hamming_7_4;
    use super::*;

    const HAMMING: &str = "7 3
3 4
3 2 2 2 1 1 1
4 4 4
1 2 3
1 2 0
1 3 0
2 3 0
1 0 0
2 0 0
3 0 0
1 2 3 5
1 2 4 6
1 3 4 7
";

    #[test]
    fn parses_fixture() {
        let h = parse(HAMMING).unwrap();
        assert_eq!(h, hamming_7_4());
        assert_eq!(write(&h), HAMMING);
    }

    #[test]
    fn unpadded_lists_are_accepted() {
        let unpadded = HAMMING.replace(" 0", "");
        assert_eq!(parse(&unpadded).unwrap(), hamming_7_4());
    }

    #[test]
    fn truncated_file_is_rejected() {
        let cut: String = HAMMING.lines().take(9).collect::<Vec<_>>().join("\n");
        let e = parse(&cut).unwrap_err().to_string();
        assert!(e.contains("end of file"), "{e}");
    }

    #[test]
    fn inconsistent_lists_are_rejected() {
        // column 5 claims check 2 while row lists put bit 5 in check 1
        let bad = HAMMING.replacen("1 0 0\n2 0 0", "2 0 0\n2 0 0", 1);
        assert!(parse(&bad).is_err());
        assert!(parse(&HAMMING.replacen("7 3", "7 4", 1)).is_err());
        assert!(parse(&HAMMING.replacen("3 4\n", "3 5\n", 1)).is_err());
        assert!(parse("7 x\n").is_err());
        assert!(parse(&format!("{HAMMING}1 2 3\n")).is_err());
    }
}
