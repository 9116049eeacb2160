//! Heightfield triangulation and STL export.
//!
//! Mesh coordinates are in μm with the intact surface at `z = 0` and material
//! below it, so a pit of depth `d` sits at `z = -d`.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::pitgen::HeightField;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TriangleMesh {
    pub vertices: Vec<[f64; 3]>,
    /// Counter-clockwise seen from outside the material.
    pub triangles: Vec<[usize; 3]>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeshMode {
    SurfaceOnly,
    /// Closed slab with its bottom face `thickness` μm below the intact surface.
    ClosedSlab {
        thickness: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StlFormat {
    Ascii,
    Binary,
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

impl TriangleMesh {
    /// Unnormalized normal; its length is twice the triangle area.
    pub fn area_normal(&self, t: usize) -> [f64; 3] {
        let [a, b, c] = self.triangles[t].map(|i| self.vertices[i]);
        cross(sub(b, a), sub(c, a))
    }

    pub fn unit_normal(&self, t: usize) -> [f64; 3] {
        let n = self.area_normal(t);
        let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        if len > 0.0 {
            n.map(|v| v / len)
        } else {
            [0.0; 3]
        }
    }

    pub fn area(&self, t: usize) -> f64 {
        let n = self.area_normal(t);
        0.5 * (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        for (t, tri) in self.triangles.iter().enumerate() {
            if tri.iter().any(|&i| i >= self.vertices.len()) {
                return Err(Error::Geometry(format!("triangle {t} has an out-of-range index")));
            }
            if self.area(t) <= 1e-6 {
                return Err(Error::Geometry(format!("triangle {t} is degenerate")));
            }
        }
        Ok(())
    }
}

/// Triangulates a heightfield. Each grid cell is split along its
/// `(i, j) -> (i+1, j+1)` diagonal.
pub fn field_to_mesh(field: &HeightField, mode: MeshMode) -> Result<TriangleMesh> {
    let (nx, ny) = (field.nx(), field.ny());
    let top = |i: usize, j: usize| j * nx + i;
    let mut vertices = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (x, y) = field.coords(i, j);
            vertices.push([x, y, -field.at(i, j)]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * (nx - 1) * (ny - 1));
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let (a, b, c, d) = (top(i, j), top(i + 1, j), top(i + 1, j + 1), top(i, j + 1));
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }

    if let MeshMode::ClosedSlab { thickness } = mode {
        let max_depth = field.max_depth();
        if !(thickness > max_depth && thickness.is_finite()) {
            return Err(Error::Dimension(format!(
                "slab thickness {thickness} must exceed the maximum pit depth {max_depth}"
            )));
        }
        let off = nx * ny;
        for j in 0..ny {
            for i in 0..nx {
                let (x, y) = field.coords(i, j);
                vertices.push([x, y, -thickness]);
            }
        }
        let bot = |i: usize, j: usize| off + j * nx + i;
        for j in 0..ny - 1 {
            for i in 0..nx - 1 {
                let (a, b, c, d) = (bot(i, j), bot(i + 1, j), bot(i + 1, j + 1), bot(i, j + 1));
                triangles.push([a, c, b]);
                triangles.push([a, d, c]);
            }
        }
        // Side walls; each quad is (top p, top q, bottom q, bottom p) wound
        // so that the normal faces out of the patch.
        let mut wall = |p_top: usize, q_top: usize, p_bot: usize, q_bot: usize| {
            triangles.push([p_top, p_bot, q_bot]);
            triangles.push([p_top, q_bot, q_top]);
        };
        for i in 0..nx - 1 {
            // y = 0 face, outward -y
            wall(top(i, 0), top(i + 1, 0), bot(i, 0), bot(i + 1, 0));
            // y = max face, outward +y
            wall(top(i + 1, ny - 1), top(i, ny - 1), bot(i + 1, ny - 1), bot(i, ny - 1));
        }
        for j in 0..ny - 1 {
            // x = max face, outward +x
            wall(top(nx - 1, j), top(nx - 1, j + 1), bot(nx - 1, j), bot(nx - 1, j + 1));
            // x = 0 face, outward -x
            wall(top(0, j + 1), top(0, j), bot(0, j + 1), bot(0, j));
        }
    }
    let mesh = TriangleMesh { vertices, triangles };
    mesh.validate()?;
    Ok(mesh)
}

pub fn write_stl(mesh: &TriangleMesh, format: StlFormat) -> Vec<u8> {
    match format {
        StlFormat::Binary => write_binary(mesh),
        StlFormat::Ascii => write_ascii(mesh).into_bytes(),
    }
}

fn write_binary(mesh: &TriangleMesh) -> Vec<u8> {
    let mut out = Vec::with_capacity(84 + 50 * mesh.triangles.len());
    let mut header = [0u8; 80];
    let tag = b"pit2crack heightfield mesh (um)";
    header[..tag.len()].copy_from_slice(tag);
    out.extend_from_slice(&header);
    out.extend_from_slice(&(mesh.triangles.len() as u32).to_le_bytes());
    for t in 0..mesh.triangles.len() {
        for v in mesh.unit_normal(t) {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
        for idx in mesh.triangles[t] {
            for v in mesh.vertices[idx] {
                out.extend_from_slice(&(v as f32).to_le_bytes());
            }
        }
        out.extend_from_slice(&0u16.to_le_bytes());
    }
    out
}

fn write_ascii(mesh: &TriangleMesh) -> String {
    let mut s = String::from("solid pit2crack\n");
    for t in 0..mesh.triangles.len() {
        let n = mesh.unit_normal(t).map(|v| v as f32);
        writeln!(s, "  facet normal {:e} {:e} {:e}", n[0], n[1], n[2]).unwrap();
        s.push_str("    outer loop\n");
        for idx in mesh.triangles[t] {
            let v = mesh.vertices[idx].map(|c| c as f32);
            writeln!(s, "      vertex {:e} {:e} {:e}", v[0], v[1], v[2]).unwrap();
        }
        s.push_str("    endloop\n  endfacet\n");
    }
    s.push_str("endsolid pit2crack\n");
    s
}

/// One facet as stored in an STL file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StlFacet {
    pub normal: [f32; 3],
    pub vertices: [[f32; 3]; 3],
}

/// Parses binary or ASCII STL. Binary is detected by the size formula.
pub fn read_stl(bytes: &[u8]) -> Result<Vec<StlFacet>> {
    if bytes.len() >= 84 {
        let count = u32::from_le_bytes(bytes[80..84].try_into().unwrap()) as usize;
        if bytes.len() == 84 + 50 * count {
            return Ok(read_binary(&bytes[84..], count));
        }
    }
    let text = std::str::from_utf8(bytes).map_err(|_| Error::Format("STL is neither binary nor UTF-8".into()))?;
    if !text.trim_start().starts_with("solid") {
        return Err(Error::Format("unrecognized STL data".into()));
    }
    read_ascii(text)
}

fn read_binary(body: &[u8], count: usize) -> Vec<StlFacet> {
    let f = |o: usize| f32::from_le_bytes(body[o..o + 4].try_into().unwrap());
    (0..count)
        .map(|t| {
            let o = 50 * t;
            let v = |k: usize| [f(o + 12 * k), f(o + 12 * k + 4), f(o + 12 * k + 8)];
            StlFacet {
                normal: v(0),
                vertices: [v(1), v(2), v(3)],
            }
        })
        .collect()
}

fn read_ascii(text: &str) -> Result<Vec<StlFacet>> {
    let mut facets = Vec::new();
    let mut normal = [0f32; 3];
    let mut verts: Vec<[f32; 3]> = Vec::new();
    let triple = |parts: &[&str], line: usize| -> Result<[f32; 3]> {
        if parts.len() != 3 {
            return Err(Error::Parse {
                row: line,
                message: "expected three coordinates".into(),
            });
        }
        let mut out = [0f32; 3];
        for (o, p) in out.iter_mut().zip(parts) {
            *o = p.parse().map_err(|_| Error::Parse {
                row: line,
                message: format!("bad number {p:?}"),
            })?;
        }
        Ok(out)
    };
    for (k, line) in text.lines().enumerate() {
        let parts: Vec<&str> = line.split_whitespace().collect();
        match parts.as_slice() {
            ["facet", "normal", rest @ ..] => {
                normal = triple(rest, k + 1)?;
                verts.clear();
            }
            ["vertex", rest @ ..] => verts.push(triple(rest, k + 1)?),
            ["endfacet"] => {
                if verts.len() != 3 {
                    return Err(Error::Parse {
                        row: k + 1,
                        message: "facet without three vertices".into(),
                    });
                }
                facets.push(StlFacet {
                    normal,
                    vertices: [verts[0], verts[1], verts[2]],
                });
            }
            _ => {}
        }
    }
    Ok(facets)
}
