//! Triangle mesh container, file I/O (OBJ / PLY / STL) and mass properties.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use nalgebra::{Point3, Vector3};

use crate::error::{Error, Result};
use crate::transform::RigidTransform;

/// Area below which a face counts as degenerate and is dropped at load time.
const DEGENERATE_AREA: f64 = 1e-12;

/// Indexed triangle mesh in meters. Face normals are derived from winding.
#[derive(Debug, Clone)]
pub struct TriangleMesh {
    pub vertices: Vec<Point3<f64>>,
    pub faces: Vec<[usize; 3]>,
    pub face_normals: Vec<Vector3<f64>>,
}

/// Mass properties of a mesh.
#[derive(Debug, Clone, Copy)]
pub struct MeshStats {
    pub com: Point3<f64>,
    pub bbox_min: Point3<f64>,
    pub bbox_max: Point3<f64>,
    pub watertight: bool,
}

impl TriangleMesh {
    /// Builds a mesh from raw vertices and faces: validates indices, drops
    /// degenerate faces, computes normals and fixes global orientation so
    /// that watertight meshes have outward-facing normals.
    pub fn new(vertices: Vec<Point3<f64>>, faces: Vec<[usize; 3]>) -> Result<Self> {
        for v in &vertices {
            if !v.coords.iter().all(|c| c.is_finite()) {
                return Err(Error::Other("non-finite vertex coordinate".into()));
            }
        }
        let n = vertices.len();
        let mut kept = Vec::with_capacity(faces.len());
        for f in faces {
            for &i in &f {
                if i >= n {
                    return Err(Error::FaceIndexOutOfRange {
                        index: i,
                        vertex_count: n,
                    });
                }
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                continue;
            }
            let a = vertices[f[0]];
            let e1 = vertices[f[1]] - a;
            let e2 = vertices[f[2]] - a;
            if e1.cross(&e2).norm() * 0.5 <= DEGENERATE_AREA {
                continue;
            }
            kept.push(f);
        }
        if kept.is_empty() {
            return Err(Error::EmptyMesh);
        }
        let mut mesh = Self {
            vertices,
            faces: kept,
            face_normals: Vec::new(),
        };
        mesh.recompute_normals();
        // Watertight meshes with inward winding get flipped globally so the
        // derived normals face outward; hangability clustering depends on it.
        if mesh.is_watertight() && mesh.signed_volume() < 0.0 {
            for f in &mut mesh.faces {
                f.swap(1, 2);
            }
            mesh.recompute_normals();
        }
        Ok(mesh)
    }

    fn recompute_normals(&mut self) {
        self.face_normals = self
            .faces
            .iter()
            .map(|f| {
                let a = self.vertices[f[0]];
                let n = (self.vertices[f[1]] - a).cross(&(self.vertices[f[2]] - a));
                n / n.norm()
            })
            .collect();
    }

    pub fn face_area(&self, i: usize) -> f64 {
        let f = self.faces[i];
        let a = self.vertices[f[0]];
        (self.vertices[f[1]] - a)
            .cross(&(self.vertices[f[2]] - a))
            .norm()
            * 0.5
    }

    pub fn total_area(&self) -> f64 {
        (0..self.faces.len()).map(|i| self.face_area(i)).sum()
    }

    pub fn face_centroid(&self, i: usize) -> Point3<f64> {
        let f = self.faces[i];
        Point3::from(
            (self.vertices[f[0]].coords + self.vertices[f[1]].coords + self.vertices[f[2]].coords)
                / 3.0,
        )
    }

    /// Signed volume via the divergence theorem (tetrahedra against origin).
    pub fn signed_volume(&self) -> f64 {
        self.faces
            .iter()
            .map(|f| {
                let a = self.vertices[f[0]].coords;
                let b = self.vertices[f[1]].coords;
                let c = self.vertices[f[2]].coords;
                a.dot(&b.cross(&c)) / 6.0
            })
            .sum()
    }

    /// A mesh is watertight when every directed edge is used exactly once and
    /// its reverse exists; that also guarantees consistent winding.
    pub fn is_watertight(&self) -> bool {
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for f in &self.faces {
            for k in 0..3 {
                let e = (f[k], f[(k + 1) % 3]);
                *directed.entry(e).or_insert(0) += 1;
            }
        }
        directed
            .iter()
            .all(|(&(i, j), &c)| c == 1 && directed.get(&(j, i)) == Some(&1))
    }

    /// Center of mass and bounds. Watertight meshes use the uniform-density
    /// volume centroid; open meshes fall back to the area-weighted surface
    /// centroid.
    pub fn stats(&self) -> MeshStats {
        let mut bbox_min = Point3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
        let mut bbox_max = Point3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for v in &self.vertices {
            for k in 0..3 {
                bbox_min[k] = bbox_min[k].min(v[k]);
                bbox_max[k] = bbox_max[k].max(v[k]);
            }
        }
        let watertight = self.is_watertight();
        let com = if watertight {
            let mut volume = 0.0;
            let mut weighted = Vector3::zeros();
            for f in &self.faces {
                let a = self.vertices[f[0]].coords;
                let b = self.vertices[f[1]].coords;
                let c = self.vertices[f[2]].coords;
                let v = a.dot(&b.cross(&c)) / 6.0;
                volume += v;
                weighted += v * (a + b + c) / 4.0;
            }
            if volume.abs() > 1e-15 {
                Point3::from(weighted / volume)
            } else {
                self.surface_centroid()
            }
        } else {
            self.surface_centroid()
        };
        MeshStats {
            com,
            bbox_min,
            bbox_max,
            watertight,
        }
    }

    fn surface_centroid(&self) -> Point3<f64> {
        let mut area = 0.0;
        let mut weighted = Vector3::zeros();
        for i in 0..self.faces.len() {
            let a = self.face_area(i);
            area += a;
            weighted += a * self.face_centroid(i).coords;
        }
        Point3::from(weighted / area)
    }

    pub fn transformed(&self, t: &RigidTransform) -> TriangleMesh {
        let vertices = self.vertices.iter().map(|v| t.apply_point(v)).collect();
        TriangleMesh::new(vertices, self.faces.clone()).expect("rigid motion preserves validity")
    }

    /// Unsigned distance from a point to the mesh surface (brute force).
    pub fn distance_to_surface(&self, p: &Point3<f64>) -> f64 {
        let mut best = f64::INFINITY;
        for f in &self.faces {
            let d = point_triangle_distance(
                p,
                &self.vertices[f[0]],
                &self.vertices[f[1]],
                &self.vertices[f[2]],
            );
            best = best.min(d);
        }
        best
    }
}

/// Distance from a point to a triangle.
pub fn point_triangle_distance(
    p: &Point3<f64>,
    a: &Point3<f64>,
    b: &Point3<f64>,
    c: &Point3<f64>,
) -> f64 {
    // Ericson, Real-Time Collision Detection, closest-point-on-triangle.
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return (p - a).norm();
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return (p - b).norm();
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return (p - (a + ab * v)).norm();
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return (p - c).norm();
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return (p - (a + ac * w)).norm();
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return (p - (b + (c - b) * w)).norm();
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    (p - (a + ab * v + ac * w)).norm()
}

/// Loads a mesh from OBJ, PLY (ASCII or binary little-endian) or STL, keyed
/// off the file extension.
pub fn load_mesh(path: &Path) -> Result<TriangleMesh> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .unwrap_or_default();
    let bytes = std::fs::read(path).map_err(|source| Error::UnreadableFile {
        path: path.to_path_buf(),
        source,
    })?;
    match ext.as_str() {
        "obj" => parse_obj(&bytes, path),
        "ply" => parse_ply(&bytes, path),
        "stl" => parse_stl(&bytes, path),
        other => Err(Error::UnsupportedFormat(other.to_string())),
    }
}

fn malformed(path: &Path, detail: impl Into<String>) -> Error {
    Error::MalformedMesh {
        path: path.to_path_buf(),
        detail: detail.into(),
    }
}

fn parse_obj(bytes: &[u8], path: &Path) -> Result<TriangleMesh> {
    let text = String::from_utf8_lossy(bytes);
    let mut vertices = Vec::new();
    let mut faces: Vec<[usize; 3]> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => {
                let mut c = [0.0f64; 3];
                for v in c.iter_mut() {
                    *v = it
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| malformed(path, format!("bad vertex at line {}", lineno + 1)))?;
                }
                vertices.push(Point3::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let idx: Vec<usize> = it
                    .map(|tok| {
                        let first = tok.split('/').next().unwrap_or("");
                        let i: i64 = first.parse().map_err(|_| {
                            malformed(path, format!("bad face index at line {}", lineno + 1))
                        })?;
                        let resolved = if i < 0 {
                            vertices.len() as i64 + i
                        } else {
                            i - 1
                        };
                        if resolved < 0 {
                            return Err(malformed(path, "negative face index out of range"));
                        }
                        Ok(resolved as usize)
                    })
                    .collect::<Result<_>>()?;
                if idx.len() < 3 {
                    return Err(malformed(path, format!("face with <3 vertices at line {}", lineno + 1)));
                }
                for k in 1..idx.len() - 1 {
                    faces.push([idx[0], idx[k], idx[k + 1]]);
                }
            }
            _ => {}
        }
    }
    TriangleMesh::new(vertices, faces)
}

#[derive(Clone, Copy)]
enum PlyType {
    F32,
    F64,
    I8,
    I16,
    I32,
    U8,
    U16,
    U32,
}

impl PlyType {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "float" | "float32" => PlyType::F32,
            "double" | "float64" => PlyType::F64,
            "char" | "int8" => PlyType::I8,
            "short" | "int16" => PlyType::I16,
            "int" | "int32" => PlyType::I32,
            "uchar" | "uint8" => PlyType::U8,
            "ushort" | "uint16" => PlyType::U16,
            "uint" | "uint32" => PlyType::U32,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            PlyType::I8 | PlyType::U8 => 1,
            PlyType::I16 | PlyType::U16 => 2,
            PlyType::F32 | PlyType::I32 | PlyType::U32 => 4,
            PlyType::F64 => 8,
        }
    }

    fn read_le(self, buf: &[u8]) -> f64 {
        match self {
            PlyType::F32 => f32::from_le_bytes(buf[..4].try_into().unwrap()) as f64,
            PlyType::F64 => f64::from_le_bytes(buf[..8].try_into().unwrap()),
            PlyType::I8 => buf[0] as i8 as f64,
            PlyType::I16 => i16::from_le_bytes(buf[..2].try_into().unwrap()) as f64,
            PlyType::I32 => i32::from_le_bytes(buf[..4].try_into().unwrap()) as f64,
            PlyType::U8 => buf[0] as f64,
            PlyType::U16 => u16::from_le_bytes(buf[..2].try_into().unwrap()) as f64,
            PlyType::U32 => u32::from_le_bytes(buf[..4].try_into().unwrap()) as f64,
        }
    }
}

enum PlyProp {
    Scalar(String, PlyType),
    List(String, PlyType, PlyType),
}

struct PlyElement {
    name: String,
    count: usize,
    props: Vec<PlyProp>,
}

fn parse_ply(bytes: &[u8], path: &Path) -> Result<TriangleMesh> {
    let mut reader = BufReader::new(bytes);
    let mut header = String::new();
    let mut line = String::new();
    reader.read_line(&mut line)?;
    if line.trim() != "ply" {
        return Err(malformed(path, "missing ply magic"));
    }
    let mut format = None;
    let mut elements: Vec<PlyElement> = Vec::new();
    loop {
        line.clear();
        if reader.read_line(&mut line)? == 0 {
            return Err(malformed(path, "truncated header"));
        }
        header.push_str(&line);
        let trimmed = line.trim();
        let toks: Vec<&str> = trimmed.split_whitespace().collect();
        match toks.first().copied() {
            Some("comment") | Some("obj_info") | None => {}
            Some("format") => {
                format = toks.get(1).map(|s| s.to_string());
            }
            Some("element") => {
                let name = toks.get(1).ok_or_else(|| malformed(path, "bad element"))?;
                let count: usize = toks
                    .get(2)
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| malformed(path, "bad element count"))?;
                elements.push(PlyElement {
                    name: name.to_string(),
                    count,
                    props: Vec::new(),
                });
            }
            Some("property") => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| malformed(path, "property before element"))?;
                if toks.get(1) == Some(&"list") {
                    let count_ty = PlyType::parse(toks[2])
                        .ok_or_else(|| malformed(path, "unknown list count type"))?;
                    let item_ty = PlyType::parse(toks[3])
                        .ok_or_else(|| malformed(path, "unknown list item type"))?;
                    el.props
                        .push(PlyProp::List(toks[4].to_string(), count_ty, item_ty));
                } else {
                    let ty = PlyType::parse(toks[1])
                        .ok_or_else(|| malformed(path, "unknown property type"))?;
                    el.props.push(PlyProp::Scalar(toks[2].to_string(), ty));
                }
            }
            Some("end_header") => break,
            Some(other) => return Err(malformed(path, format!("unknown header token {other}"))),
        }
    }
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    match format.as_deref() {
        Some("ascii") => {
            let mut tokens: Vec<String> = Vec::new();
            for l in reader.lines() {
                tokens.extend(l?.split_whitespace().map(|s| s.to_string()));
            }
            let mut cursor = 0usize;
            let mut next = |path: &Path| -> Result<f64> {
                let v = tokens
                    .get(cursor)
                    .and_then(|s| s.parse::<f64>().ok())
                    .ok_or_else(|| malformed(path, "truncated body"))?;
                cursor += 1;
                Ok(v)
            };
            for el in &elements {
                for _ in 0..el.count {
                    let mut xyz = [f64::NAN; 3];
                    let mut list: Vec<usize> = Vec::new();
                    for prop in &el.props {
                        match prop {
                            PlyProp::Scalar(name, _) => {
                                let v = next(path)?;
                                match name.as_str() {
                                    "x" => xyz[0] = v,
                                    "y" => xyz[1] = v,
                                    "z" => xyz[2] = v,
                                    _ => {}
                                }
                            }
                            PlyProp::List(name, _, _) => {
                                let n = next(path)? as usize;
                                let mut items = Vec::with_capacity(n);
                                for _ in 0..n {
                                    items.push(next(path)? as usize);
                                }
                                if name == "vertex_indices" || name == "vertex_index" {
                                    list = items;
                                }
                            }
                        }
                    }
                    if el.name == "vertex" {
                        vertices.push(Point3::new(xyz[0], xyz[1], xyz[2]));
                    } else if el.name == "face" {
                        for k in 1..list.len().saturating_sub(1) {
                            faces.push([list[0], list[k], list[k + 1]]);
                        }
                    }
                }
            }
        }
        Some("binary_little_endian") => {
            let mut body = Vec::new();
            reader.read_to_end(&mut body)?;
            let mut off = 0usize;
            let take = |off: &mut usize, n: usize| -> Result<&[u8]> {
                if *off + n > body.len() {
                    return Err(malformed(path, "truncated binary body"));
                }
                let s = &body[*off..*off + n];
                *off += n;
                Ok(s)
            };
            for el in &elements {
                for _ in 0..el.count {
                    let mut xyz = [f64::NAN; 3];
                    let mut list: Vec<usize> = Vec::new();
                    for prop in &el.props {
                        match prop {
                            PlyProp::Scalar(name, ty) => {
                                let v = ty.read_le(take(&mut off, ty.size())?);
                                match name.as_str() {
                                    "x" => xyz[0] = v,
                                    "y" => xyz[1] = v,
                                    "z" => xyz[2] = v,
                                    _ => {}
                                }
                            }
                            PlyProp::List(name, cty, ity) => {
                                let n = cty.read_le(take(&mut off, cty.size())?) as usize;
                                let mut items = Vec::with_capacity(n);
                                for _ in 0..n {
                                    items.push(ity.read_le(take(&mut off, ity.size())?) as usize);
                                }
                                if name == "vertex_indices" || name == "vertex_index" {
                                    list = items;
                                }
                            }
                        }
                    }
                    if el.name == "vertex" {
                        vertices.push(Point3::new(xyz[0], xyz[1], xyz[2]));
                    } else if el.name == "face" {
                        for k in 1..list.len().saturating_sub(1) {
                            faces.push([list[0], list[k], list[k + 1]]);
                        }
                    }
                }
            }
        }
        other => {
            return Err(malformed(
                path,
                format!("unsupported ply format {:?}", other),
            ))
        }
    }
    TriangleMesh::new(vertices, faces)
}

fn parse_stl(bytes: &[u8], path: &Path) -> Result<TriangleMesh> {
    let is_binary = bytes.len() >= 84 && {
        let n = u32::from_le_bytes(bytes[80..84].try_into().unwrap()) as usize;
        bytes.len() == 84 + n * 50
    };
    let mut soup: Vec<Point3<f64>> = Vec::new();
    if is_binary {
        let n = u32::from_le_bytes(bytes[80..84].try_into().unwrap()) as usize;
        for i in 0..n {
            let base = 84 + i * 50 + 12; // skip normal
            for k in 0..3 {
                let o = base + k * 12;
                let x = f32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as f64;
                let y = f32::from_le_bytes(bytes[o + 4..o + 8].try_into().unwrap()) as f64;
                let z = f32::from_le_bytes(bytes[o + 8..o + 12].try_into().unwrap()) as f64;
                soup.push(Point3::new(x, y, z));
            }
        }
    } else {
        let text = String::from_utf8_lossy(bytes);
        for line in text.lines() {
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.first() == Some(&"vertex") {
                if toks.len() != 4 {
                    return Err(malformed(path, "bad vertex line in ascii stl"));
                }
                let mut c = [0.0; 3];
                for (k, v) in c.iter_mut().enumerate() {
                    *v = toks[k + 1]
                        .parse()
                        .map_err(|_| malformed(path, "bad vertex number in ascii stl"))?;
                }
                soup.push(Point3::new(c[0], c[1], c[2]));
            }
        }
        if soup.len() % 3 != 0 {
            return Err(malformed(path, "vertex count not a multiple of 3"));
        }
    }
    // Weld exactly-equal vertices so watertightness is recoverable.
    let mut index: HashMap<[u64; 3], usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for tri in soup.chunks(3) {
        let mut f = [0usize; 3];
        for (k, p) in tri.iter().enumerate() {
            let key = [p.x.to_bits(), p.y.to_bits(), p.z.to_bits()];
            f[k] = *index.entry(key).or_insert_with(|| {
                vertices.push(*p);
                vertices.len() - 1
            });
        }
        faces.push(f);
    }
    TriangleMesh::new(vertices, faces)
}

/// Writes a mesh as ASCII OBJ.
pub fn save_obj(mesh: &TriangleMesh, path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for v in &mesh.vertices {
        writeln!(out, "v {} {} {}", v.x, v.y, v.z)?;
    }
    for f in &mesh.faces {
        writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
    }
    Ok(())
}

/// Writes a mesh as ASCII PLY.
pub fn save_ply(mesh: &TriangleMesh, path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "ply\nformat ascii 1.0")?;
    writeln!(out, "element vertex {}", mesh.vertices.len())?;
    writeln!(out, "property double x\nproperty double y\nproperty double z")?;
    writeln!(out, "element face {}", mesh.faces.len())?;
    writeln!(out, "property list uchar int vertex_indices\nend_header")?;
    for v in &mesh.vertices {
        writeln!(out, "{} {} {}", v.x, v.y, v.z)?;
    }
    for f in &mesh.faces {
        writeln!(out, "3 {} {} {}", f[0], f[1], f[2])?;
    }
    Ok(())
}
