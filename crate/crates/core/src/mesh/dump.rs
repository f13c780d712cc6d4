use std::io::Write;

use super::{EdgeKind, StaggeredMesh};
use crate::{Real, Result, SdgError};

/// Parsed form of the line-oriented mesh dump:
///
/// ```text
/// v x y
/// t i j k macro
/// e i j kind
/// ```
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MeshDump {
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<([usize; 3], usize)>,
    pub edges: Vec<([usize; 2], EdgeKind)>,
}

impl<T: Real> StaggeredMesh<T> {
    pub fn write_dump<W: Write>(&self, mut out: W) -> Result<()> {
        for v in self.vertices() {
            writeln!(out, "v {} {}", v[0], v[1])?;
        }
        for s in self.subtriangles() {
            let [i, j, k] = s.vertices;
            writeln!(out, "t {i} {j} {k} {}", s.macro_index)?;
        }
        for e in self.edges() {
            let [i, j] = e.endpoints;
            writeln!(out, "e {i} {j} {}", e.kind.as_str())?;
        }
        Ok(())
    }

    pub fn dump_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_dump(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("dump is ASCII")
    }
}

impl MeshDump {
    pub fn parse(text: &str) -> Result<Self> {
        let mut dump = MeshDump::default();
        for (n, line) in text.lines().enumerate() {
            let err = |message: String| SdgError::Parse {
                line: n + 1,
                message,
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            let Some((&tag, rest)) = fields.split_first() else {
                continue;
            };
            let idx = |s: &str| s.parse::<usize>().map_err(|e| err(e.to_string()));
            match (tag, rest.len()) {
                ("v", 2) => {
                    let x = rest[0].parse().map_err(|e| err(format!("{e}")))?;
                    let y = rest[1].parse().map_err(|e| err(format!("{e}")))?;
                    dump.vertices.push([x, y]);
                }
                ("t", 4) => dump
                    .triangles
                    .push(([idx(rest[0])?, idx(rest[1])?, idx(rest[2])?], idx(rest[3])?)),
                ("e", 3) => dump.edges.push((
                    [idx(rest[0])?, idx(rest[1])?],
                    rest[2].parse().map_err(err)?,
                )),
                _ => return Err(err(format!("unexpected record `{line}`"))),
            }
        }
        Ok(dump)
    }
}
