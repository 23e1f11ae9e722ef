//! Tab-separated trajectory tables.
//!
//! One row per node. Control columns hold the value on the interval that
//! starts at the row; the last row repeats the previous control.

use std::fmt::Write as _;

use super::integrate::{ExtendedProcess, StrictProcess};
use crate::error::{Error, Result};

fn join(values: impl IntoIterator<Item = f64>) -> String {
    let mut s = String::new();
    for (i, v) in values.into_iter().enumerate() {
        if i > 0 {
            s.push('\t');
        }
        write!(s, "{v}").expect("writing to a String");
    }
    s
}

pub fn extended_to_tsv(z: &ExtendedProcess) -> String {
    let m = z.w.first().map_or(0, |w| w.len());
    let n = z.y.first().map_or(0, |y| y.len());
    let mut header = vec!["s".to_string(), "w0".to_string()];
    header.extend((1..=m).map(|i| format!("w{i}")));
    header.push("y0".into());
    header.extend((1..=n).map(|i| format!("y{i}")));
    header.push("beta".into());
    let mut out = header.join("\t");
    out.push('\n');
    for k in 0..z.nodes.len() {
        let c = k.min(z.w0.len().saturating_sub(1));
        let mut row = vec![z.nodes[k], z.w0[c]];
        row.extend_from_slice(&z.w[c]);
        row.push(z.y0[k]);
        row.extend_from_slice(&z.y[k]);
        row.push(z.beta[k]);
        out.push_str(&join(row));
        out.push('\n');
    }
    out
}

pub fn strict_to_tsv(p: &StrictProcess) -> String {
    let m = p.u.first().map_or(0, |u| u.len());
    let n = p.x.first().map_or(0, |x| x.len());
    let mut header = vec!["t".to_string()];
    header.extend((1..=m).map(|i| format!("u{i}")));
    header.extend((1..=n).map(|i| format!("x{i}")));
    header.push("v".into());
    let mut out = header.join("\t");
    out.push('\n');
    for k in 0..p.nodes.len() {
        let c = k.min(p.u.len().saturating_sub(1));
        let mut row = vec![p.nodes[k]];
        row.extend_from_slice(&p.u[c]);
        row.extend_from_slice(&p.x[k]);
        row.push(p.v[k]);
        out.push_str(&join(row));
        out.push('\n');
    }
    out
}

fn count_prefixed(header: &[&str], prefix: char, skip_zero: bool) -> usize {
    header
        .iter()
        .filter(|h| {
            h.strip_prefix(prefix)
                .and_then(|r| r.parse::<usize>().ok())
                .is_some_and(|k| !(skip_zero && k == 0))
        })
        .count()
}

pub fn extended_from_tsv(text: &str) -> Result<ExtendedProcess> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| Error::Format("empty trajectory table".into()))?
        .split('\t')
        .map(str::trim)
        .collect();
    let m = count_prefixed(&header, 'w', true);
    let n = count_prefixed(&header, 'y', true);
    let width = 2 + m + 1 + n + 1;
    let mut expected = vec!["s".to_string(), "w0".to_string()];
    expected.extend((1..=m).map(|i| format!("w{i}")));
    expected.push("y0".into());
    expected.extend((1..=n).map(|i| format!("y{i}")));
    expected.push("beta".into());
    if header != expected.iter().map(String::as_str).collect::<Vec<_>>() {
        return Err(Error::Format(format!(
            "header must read `{}`",
            expected.join(" ")
        )));
    }
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (ln, line) in lines.enumerate() {
        let row = line
            .split('\t')
            .map(|c| c.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Format(format!("row {}: {e}", ln + 2)))?;
        if row.len() != width {
            return Err(Error::Format(format!(
                "row {} has {} columns, expected {width}",
                ln + 2,
                row.len()
            )));
        }
        rows.push(row);
    }
    if rows.len() < 2 {
        return Err(Error::Format("a trajectory needs at least two nodes".into()));
    }
    if rows[0][0] != 0.0 || rows.windows(2).any(|w| !(w[1][0] > w[0][0])) {
        return Err(Error::Format("s column must start at 0 and increase strictly".into()));
    }
    let intervals = rows.len() - 1;
    Ok(ExtendedProcess {
        s_final: rows[intervals][0],
        nodes: rows.iter().map(|r| r[0]).collect(),
        w0: rows[..intervals].iter().map(|r| r[1]).collect(),
        w: rows[..intervals].iter().map(|r| r[2..2 + m].to_vec()).collect(),
        y0: rows.iter().map(|r| r[2 + m]).collect(),
        y: rows.iter().map(|r| r[3 + m..3 + m + n].to_vec()).collect(),
        beta: rows.iter().map(|r| r[3 + m + n]).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let z = ExtendedProcess {
            s_final: 1.5,
            nodes: vec![0.0, 1.0, 1.5],
            w0: vec![1.0, 0.0],
            w: vec![vec![0.0], vec![1.0]],
            y0: vec![0.0, 1.0, 1.0],
            y: vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![0.5, 1.0]],
            beta: vec![0.0, 0.0, 0.1 + 0.2],
        };
        let text = extended_to_tsv(&z);
        assert!(text.starts_with("s\tw0\tw1\ty0\ty1\ty2\tbeta\n"));
        assert_eq!(extended_from_tsv(&text).unwrap(), z);
    }

    #[test]
    fn malformed_tables() {
        assert!(extended_from_tsv("").is_err());
        assert!(extended_from_tsv("s\tw0\ty0\tbeta\n0\t1\t0\n").is_err());
        assert!(extended_from_tsv("s\tw0\ty0\tbeta\n0\t1\t0\t0\n").is_err());
        assert!(extended_from_tsv("s\tw0\ty0\tbeta\n0\t1\t0\t0\n0\t1\t0\t0\n").is_err());
        assert!(extended_from_tsv("s\tw0\ty0\tbeta\n0\t1\t0\t0\n1\t1\t1\t0\n").is_ok());
    }
}
