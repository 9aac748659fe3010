//! Lattice functions as CSV: header `x1,...,xN,value`, one row per nonzero
//! site in lexicographic order.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use zn_elliptic::{LatticeBox, LatticeFunction, Site};

use crate::error::CliError;

pub fn write_function<W: Write>(u: &LatticeFunction, out: W) -> csv::Result<()> {
    let dim = u.domain().dim();
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (1..=dim).map(|k| format!("x{k}")).collect();
    header.push("value".into());
    w.write_record(&header)?;
    let mut row = Vec::with_capacity(dim + 1);
    for (x, &v) in u.domain().sites().iter().zip(u.values()) {
        if v == 0.0 {
            continue;
        }
        row.clear();
        row.extend(x.coords().iter().map(i64::to_string));
        row.push(v.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `u` to `path`, replacing any existing file and creating missing
/// parent directories.
pub fn emit_solution_csv(u: &LatticeFunction, path: &Path) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    write_function(u, file).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::format(path, format!("{other:?}")),
    })
}

/// Reads a function on `domain`; listed sites must lie in the box and appear
/// at most once.
pub fn read_function(path: &Path, domain: &LatticeBox) -> Result<LatticeFunction, CliError> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut r = csv::Reader::from_reader(file);
    let dim = domain.dim();
    let header = r.headers().map_err(|e| CliError::format(path, e))?.clone();
    let expected: Vec<String> = (1..=dim).map(|k| format!("x{k}")).chain(["value".into()]).collect();
    if header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(CliError::format(
            path,
            format!(
                "header {:?} does not match {:?}",
                header.iter().collect::<Vec<_>>(),
                expected
            ),
        ));
    }
    let mut values = vec![0.0; domain.len()];
    let mut seen = vec![false; domain.len()];
    for (line, record) in r.records().enumerate() {
        let record = record.map_err(|e| CliError::format(path, e))?;
        let bad = |what: String| CliError::format(path, format!("row {}: {what}", line + 1));
        let coords = record
            .iter()
            .take(dim)
            .map(|c| {
                c.trim()
                    .parse::<i64>()
                    .map_err(|e| bad(format!("coordinate {c:?}: {e}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let value: f64 = record[dim]
            .trim()
            .parse()
            .map_err(|e| bad(format!("value {:?}: {e}", &record[dim])))?;
        if !value.is_finite() {
            return Err(bad(format!("value {value} is not finite")));
        }
        let site = Site::new(coords);
        let i = domain
            .index_of(&site)
            .ok_or_else(|| bad(format!("site {site} lies outside the radius-{} box", domain.radius())))?;
        if std::mem::replace(&mut seen[i], true) {
            return Err(bad(format!("site {site} listed twice")));
        }
        values[i] = value;
    }
    LatticeFunction::from_values(domain, values).map_err(|e| CliError::format(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn to_string(u: &LatticeFunction) -> String {
        let mut buf = Vec::new();
        write_function(u, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn spike_is_one_row() {
        let bx = LatticeBox::new(2, 3).unwrap();
        let u = LatticeFunction::spike(&bx, &Site::origin(2), 1.0).unwrap();
        assert_eq!(to_string(&u), "x1,x2,value\n0,0,1\n");
    }

    #[test]
    fn zero_function_is_header_only() {
        let bx = LatticeBox::new(3, 2).unwrap();
        assert_eq!(to_string(&LatticeFunction::zeros(&bx)), "x1,x2,x3,value\n");
    }

    #[test]
    fn rows_are_lexicographic_and_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.csv");
        let bx = LatticeBox::new(2, 2).unwrap();
        let u = LatticeFunction::from_fn(&bx, |x| {
            if x.coords()[1] == 0 {
                0.1 * x.coords()[0] as f64
            } else {
                0.0
            }
        })
        .unwrap();
        emit_solution_csv(&u, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "x1,x2,value\n-2,0,-0.2\n-1,0,-0.1\n1,0,0.1\n2,0,0.2\n");
        assert_eq!(read_function(&path, &bx).unwrap(), u);
    }

    #[test]
    fn rejects_sites_outside_the_box_and_duplicates() {
        let dir = tempfile::tempdir().unwrap();
        let bx = LatticeBox::new(2, 1).unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "x1,x2,value\n2,0,1\n").unwrap();
        assert!(read_function(&path, &bx).is_err());
        std::fs::write(&path, "x1,x2,value\n0,0,1\n0,0,2\n").unwrap();
        assert!(read_function(&path, &bx).is_err());
        std::fs::write(&path, "y1,x2,value\n").unwrap();
        assert!(read_function(&path, &bx).is_err());
    }
}
