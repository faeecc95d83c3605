use std::fmt::Write as _;
use std::path::Path;

use nalgebra::Vector3;

use crate::error::{Error, Result};

/// Points sampled from an object's visible surface, plus the sensor
/// viewpoint used to orient normals.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Vector3<f64>>,
    pub viewpoint: Vector3<f64>,
}

impl PointCloud {
    pub fn new(points: Vec<Vector3<f64>>, viewpoint: Vector3<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyCloud);
        }
        if let Some(i) = points.iter().position(|p| p.iter().any(|c| !c.is_finite())) {
            return Err(Error::invalid("point cloud", format!("point {i} has a non-finite coordinate")));
        }
        if viewpoint.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("point cloud", "non-finite viewpoint"));
        }
        Ok(Self { points, viewpoint })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_ply(&text, path)
    }

    /// Parses an ASCII PLY document. `path` only labels error messages.
    ///
    /// Reads the `vertex` element's `x y z` properties; every other property
    /// and element is skipped. A `comment viewpoint vx vy vz` header line sets
    /// the viewpoint, which otherwise defaults to the origin.
    pub fn parse_ply(text: &str, path: &Path) -> Result<Self> {
        let err = |line: usize, msg: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            msg,
        };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));

        match lines.next() {
            Some((_, "ply")) => {}
            _ => return Err(err(1, "missing 'ply' magic".into())),
        }

        let mut viewpoint = Vector3::zeros();
        // (name, count, property names, header line) per element, in order.
        let mut elements: Vec<(String, usize, Vec<String>, usize)> = Vec::new();
        let mut header_done = false;
        for (n, line) in lines.by_ref() {
            let mut tok = line.split_whitespace();
            match tok.next() {
                Some("format") => {
                    if tok.next() != Some("ascii") {
                        return Err(err(n, "only 'format ascii 1.0' is supported".into()));
                    }
                }
                Some("comment") => {
                    if tok.next() == Some("viewpoint") {
                        let vals: Vec<&str> = tok.collect();
                        if vals.len() != 3 {
                            return Err(err(n, "viewpoint comment needs three coordinates".into()));
                        }
                        for (k, v) in vals.iter().enumerate() {
                            viewpoint[k] = parse_f64(v).ok_or_else(|| err(n, format!("bad viewpoint coordinate '{v}'")))?;
                        }
                    }
                }
                Some("obj_info") | None => {}
                Some("element") => {
                    let name = tok.next().ok_or_else(|| err(n, "element without a name".into()))?;
                    let count = tok
                        .next()
                        .and_then(|c| c.parse::<usize>().ok())
                        .ok_or_else(|| err(n, "element count is not a non-negative integer".into()))?;
                    elements.push((name.to_string(), count, Vec::new(), n));
                }
                Some("property") => {
                    let Some(last) = elements.last_mut() else {
                        return Err(err(n, "property before any element".into()));
                    };
                    let rest: Vec<&str> = tok.collect();
                    let name = match rest.as_slice() {
                        ["list", _, _, name] => format!("list:{name}"),
                        [ty, name] => {
                            if !SCALAR_TYPES.contains(ty) {
                                return Err(err(n, format!("unknown property type '{ty}'")));
                            }
                            name.to_string()
                        }
                        _ => return Err(err(n, "malformed property line".into())),
                    };
                    last.2.push(name);
                }
                Some("end_header") => {
                    header_done = true;
                    break;
                }
                Some(other) => return Err(err(n, format!("unexpected header keyword '{other}'"))),
            }
        }
        if !header_done {
            return Err(err(text.lines().count().max(1), "missing end_header".into()));
        }

        let mut points = Vec::new();
        for (name, count, props, decl) in &elements {
            if name != "vertex" {
                // Non-vertex elements are skipped line by line.
                for _ in 0..*count {
                    if lines.next().is_none() {
                        return Err(err(text.lines().count(), format!("truncated '{name}' element")));
                    }
                }
                continue;
            }
            let col = |axis: &str| {
                props.iter().position(|p| p == axis).ok_or_else(|| {
                    err(*decl, format!("vertex element has no '{axis}' property"))
                })
            };
            let (ix, iy, iz) = (col("x")?, col("y")?, col("z")?);
            if props.iter().any(|p| p.starts_with("list:")) {
                return Err(err(*decl, "list properties on vertices are not supported".into()));
            }
            points.reserve(*count);
            for _ in 0..*count {
                let Some((n, line)) = lines.next() else {
                    return Err(err(text.lines().count(), format!("expected {count} vertices, file ended early")));
                };
                let fields: Vec<&str> = line.split_whitespace().collect();
                if fields.len() != props.len() {
                    return Err(err(n, format!("expected {} values, found {}", props.len(), fields.len())));
                }
                let get = |i: usize| {
                    parse_f64(fields[i]).ok_or_else(|| err(n, format!("'{}' is not a number", fields[i])))
                };
                points.push(Vector3::new(get(ix)?, get(iy)?, get(iz)?));
            }
        }
        if points.is_empty() {
            return Err(Error::EmptyCloud);
        }
        Self::new(points, viewpoint)
    }

    /// ASCII PLY with double-precision coordinates and a viewpoint comment.
    pub fn to_ply_string(&self) -> String {
        let mut s = String::with_capacity(64 + self.points.len() * 48);
        s.push_str("ply\nformat ascii 1.0\n");
        let v = &self.viewpoint;
        let _ = writeln!(s, "comment viewpoint {} {} {}", v.x, v.y, v.z);
        let _ = writeln!(s, "element vertex {}", self.points.len());
        s.push_str("property double x\nproperty double y\nproperty double z\nend_header\n");
        for p in &self.points {
            let _ = writeln!(s, "{} {} {}", p.x, p.y, p.z);
        }
        s
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_ply_string()).map_err(|e| Error::io(path, e))
    }
}

const SCALAR_TYPES: [&str; 16] = [
    "char", "uchar", "short", "ushort", "int", "uint", "float", "double", "int8", "uint8", "int16", "uint16",
    "int32", "uint32", "float32", "float64",
];

fn parse_f64(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}
