//! Text dump format for grid fields.
//!
//! ```text
//! # galmax-field kind=vector dims=8,8,8 h=7.853981633974483e-1 origin=0e0,0e0,0e0
//! ix,iy,iz,vx,vy,vz
//! 0,0,0,1e0,0e0,-2.5e-1
//! ...
//! ```
//!
//! Scalar dumps use `kind=scalar` and the column header `ix,iy,iz,v`. Rows are
//! written in storage order (x-major). Floats use Rust's shortest round-trip
//! scientific notation, so a dump read back reproduces the field bit for bit.
//!
//! A full [`EMState`] snapshot is a directory holding `E.csv`, `B.csv`,
//! `rho.csv`, `J.csv` and `state.toml` (time, ū and dū/dt).

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::GridSpec;
use crate::state::EMState;
use crate::vec3::Vec3;

pub const SCALAR_COLUMNS: &str = "ix,iy,iz,v";
pub const VECTOR_COLUMNS: &str = "ix,iy,iz,vx,vy,vz";

fn header(kind: &str, g: &GridSpec) -> String {
    let [nx, ny, nz] = g.dims();
    let o = g.origin();
    format!(
        "# galmax-field kind={kind} dims={nx},{ny},{nz} h={:e} origin={:e},{:e},{:e}",
        g.h(),
        o[0],
        o[1],
        o[2]
    )
}

pub fn write_scalar(w: &mut impl Write, f: &ScalarField) -> Result<()> {
    let g = f.grid();
    writeln!(w, "{}", header("scalar", g))?;
    writeln!(w, "{SCALAR_COLUMNS}")?;
    let mut line = String::new();
    for (idx, v) in f.values().iter().enumerate() {
        let [i, j, k] = g.coords(idx);
        line.clear();
        let _ = writeln!(line, "{i},{j},{k},{v:e}");
        w.write_all(line.as_bytes())?;
    }
    Ok(())
}

pub fn write_vector(w: &mut impl Write, f: &VectorField) -> Result<()> {
    let g = f.grid();
    writeln!(w, "{}", header("vector", g))?;
    writeln!(w, "{VECTOR_COLUMNS}")?;
    let mut line = String::new();
    for (idx, v) in f.values().iter().enumerate() {
        let [i, j, k] = g.coords(idx);
        line.clear();
        let _ = writeln!(line, "{i},{j},{k},{:e},{:e},{:e}", v[0], v[1], v[2]);
        w.write_all(line.as_bytes())?;
    }
    Ok(())
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Dump(format!("bad number `{s}`")))
}

fn parse_triple<T: std::str::FromStr>(s: &str) -> Result<[T; 3]> {
    let parts: Vec<T> = s
        .split(',')
        .map(|p| p.trim().parse().map_err(|_| Error::Dump(format!("bad triple `{s}`"))))
        .collect::<Result<_>>()?;
    parts
        .try_into()
        .map_err(|_| Error::Dump(format!("expected three entries in `{s}`")))
}

fn read_header(line: &str) -> Result<(String, GridSpec)> {
    let rest = line
        .strip_prefix("# galmax-field")
        .ok_or_else(|| Error::Dump("missing `# galmax-field` header".into()))?;
    let (mut kind, mut dims, mut h, mut origin) = (None, None, None, None);
    for tok in rest.split_whitespace() {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| Error::Dump(format!("bad header token `{tok}`")))?;
        match k {
            "kind" => kind = Some(v.to_string()),
            "dims" => dims = Some(parse_triple::<usize>(v)?),
            "h" => h = Some(parse_f64(v)?),
            "origin" => origin = Some(Vec3(parse_triple::<f64>(v)?)),
            _ => return Err(Error::Dump(format!("unknown header key `{k}`"))),
        }
    }
    let missing = |n: &str| Error::Dump(format!("header lacks `{n}`"));
    let grid = GridSpec::with_origin(
        dims.ok_or_else(|| missing("dims"))?,
        h.ok_or_else(|| missing("h"))?,
        origin.ok_or_else(|| missing("origin"))?,
    )
    .map_err(|e| Error::Dump(e.to_string()))?;
    Ok((kind.ok_or_else(|| missing("kind"))?, grid))
}

/// Rows may appear in any order; every node must be present exactly once.
fn read_rows<const W: usize>(
    r: impl BufRead,
    expect_kind: &str,
    columns: &str,
) -> Result<(GridSpec, Vec<[f64; W]>)> {
    let mut lines = r.lines();
    let first = lines.next().ok_or_else(|| Error::Dump("empty dump".into()))??;
    let (kind, grid) = read_header(&first)?;
    if kind != expect_kind {
        return Err(Error::Dump(format!("expected a {expect_kind} dump, found {kind}")));
    }
    let cols = lines.next().ok_or_else(|| Error::Dump("missing column header".into()))??;
    if cols.trim() != columns {
        return Err(Error::Dump(format!("unexpected columns `{cols}`")));
    }
    let mut values = vec![None; grid.len()];
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let mut idx = [0usize; 3];
        for slot in &mut idx {
            let p = parts.next().ok_or_else(|| Error::Dump(format!("short row `{line}`")))?;
            *slot = p
                .trim()
                .parse()
                .map_err(|_| Error::Dump(format!("bad index in `{line}`")))?;
        }
        if (0..3).any(|a| idx[a] >= grid.dims()[a]) {
            return Err(Error::Dump(format!("index out of range in `{line}`")));
        }
        let mut v = [0.0; W];
        for slot in &mut v {
            let p = parts.next().ok_or_else(|| Error::Dump(format!("short row `{line}`")))?;
            *slot = parse_f64(p)?;
        }
        if parts.next().is_some() {
            return Err(Error::Dump(format!("long row `{line}`")));
        }
        let flat = grid.index(idx);
        if values[flat].replace(v).is_some() {
            return Err(Error::Dump(format!("duplicate node {idx:?}")));
        }
    }
    let values = values
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| Error::Dump(format!("node {:?} missing", grid.coords(i)))))
        .collect::<Result<_>>()?;
    Ok((grid, values))
}

pub fn read_scalar(r: impl BufRead) -> Result<ScalarField> {
    let (grid, rows) = read_rows::<1>(r, "scalar", SCALAR_COLUMNS)?;
    Ok(ScalarField::from_values(grid, rows.into_iter().map(|[v]| v).collect())
        .expect("one row per node"))
}

pub fn read_vector(r: impl BufRead) -> Result<VectorField> {
    let (grid, rows) = read_rows::<3>(r, "vector", VECTOR_COLUMNS)?;
    Ok(VectorField::from_values(grid, rows.into_iter().map(Vec3).collect())
        .expect("one row per node"))
}

/// Scalar part of a snapshot, stored as `state.toml`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateMeta {
    pub step: usize,
    pub t: f64,
    pub ubar: Vec3,
    pub ubar_dot: Vec3,
}

pub const SNAPSHOT_FILES: [&str; 5] = ["E.csv", "B.csv", "rho.csv", "J.csv", "state.toml"];

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn open(dir: &Path, name: &str) -> Result<BufReader<File>> {
    File::open(dir.join(name))
        .map(BufReader::new)
        .map_err(|e| Error::Dump(format!("{}: {e}", dir.join(name).display())))
}

/// Writes `s` into `dir`, creating it if needed.
pub fn write_state(dir: &Path, step: usize, s: &EMState) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_vector(&mut create(dir, "E.csv")?, &s.e)?;
    write_vector(&mut create(dir, "B.csv")?, &s.b)?;
    write_scalar(&mut create(dir, "rho.csv")?, &s.rho)?;
    write_vector(&mut create(dir, "J.csv")?, &s.j)?;
    let meta = StateMeta {
        step,
        t: s.t,
        ubar: s.ubar,
        ubar_dot: s.ubar_dot,
    };
    let text = toml::to_string(&meta).expect("metadata serializes");
    std::fs::write(dir.join("state.toml"), text)?;
    Ok(())
}

pub fn read_state(dir: &Path) -> Result<(StateMeta, EMState)> {
    let text = std::fs::read_to_string(dir.join("state.toml"))
        .map_err(|e| Error::Dump(format!("{}: {e}", dir.join("state.toml").display())))?;
    let meta: StateMeta = toml::from_str(&text).map_err(|e| Error::Dump(format!("state.toml: {e}")))?;
    let s = EMState {
        t: meta.t,
        e: read_vector(open(dir, "E.csv")?)?,
        b: read_vector(open(dir, "B.csv")?)?,
        rho: read_scalar(open(dir, "rho.csv")?)?,
        j: read_vector(open(dir, "J.csv")?)?,
        ubar: meta.ubar,
        ubar_dot: meta.ubar_dot,
    };
    s.check_grids()?;
    Ok((meta, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn vector_dump_round_trips(seed in any::<u64>(), h in 1e-6f64..10.0) {
            let g = GridSpec::with_origin([4, 5, 4], h, Vec3::new(-1.0, 0.5, 3.0)).unwrap();
            let f = VectorField::from_fn(g, |p| {
                let s = (seed as f64).sin();
                Vec3::new(p.x() * s, (p.y() * 1e7).sin(), 1e-300 * p.z())
            });
            let mut buf = Vec::new();
            write_vector(&mut buf, &f).unwrap();
            let back = read_vector(buf.as_slice()).unwrap();
            prop_assert_eq!(back, f);
        }

        #[test]
        fn scalar_dump_round_trips(vals in proptest::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 64)) {
            let g = GridSpec::new([4, 4, 4], 0.25).unwrap();
            let f = ScalarField::from_values(g, vals).unwrap();
            let mut buf = Vec::new();
            write_scalar(&mut buf, &f).unwrap();
            prop_assert_eq!(read_scalar(buf.as_slice()).unwrap(), f);
        }
    }

    #[test]
    fn rejects_wrong_kind_and_missing_nodes() {
        let g = GridSpec::new([4, 4, 4], 1.0).unwrap();
        let mut buf = Vec::new();
        write_scalar(&mut buf, &ScalarField::zeros(g)).unwrap();
        assert!(read_vector(buf.as_slice()).is_err());
        let text = String::from_utf8(buf).unwrap();
        let truncated: String = text.lines().take(10).map(|l| format!("{l}\n")).collect();
        assert!(matches!(read_scalar(truncated.as_bytes()), Err(Error::Dump(_))));
    }

    #[test]
    fn header_layout() {
        let g = GridSpec::new([4, 4, 5], 0.5).unwrap();
        let mut buf = Vec::new();
        write_scalar(&mut buf, &ScalarField::constant(g, 2.0)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "# galmax-field kind=scalar dims=4,4,5 h=5e-1 origin=0e0,0e0,0e0"
        );
        assert_eq!(lines.next().unwrap(), "ix,iy,iz,v");
        assert_eq!(lines.next().unwrap(), "0,0,0,2e0");
    }

    #[test]
    fn state_snapshot_round_trips() {
        let g = GridSpec::new([4, 4, 5], 0.3).unwrap();
        let mut s = EMState::zeros(g);
        s.t = 1.25;
        s.e = VectorField::from_fn(g, |p| Vec3::new(p.x().sin(), 0.0, -p.z()));
        s.rho = ScalarField::from_fn(g, |p| p.y() * 1e-7);
        s.ubar = Vec3::new(0.1, -0.2, 0.0);
        let dir = tempfile::tempdir().unwrap();
        write_state(dir.path(), 7, &s).unwrap();
        let (meta, back) = read_state(dir.path()).unwrap();
        assert_eq!(meta.step, 7);
        assert_eq!(back, s);
    }

}
