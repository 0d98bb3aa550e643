//! Second-order triangular surface meshes.
//!
//! Meshes are ingested from GMSH ASCII v2.2 files (element type 9, the
//! six-node triangle, whose node ordering matches ours: corners then edge
//! nodes 1-2, 2-3, 3-1), generated programmatically for spheres, or derived
//! by splitting curved elements into flat facets for convergence comparisons.

use nalgebra::Vector3;
use std::collections::HashMap;
use std::io::{self, BufRead, Write};
use thiserror::Error;

use crate::element::{
    edge_to_area, interpolate, surface_jacobian, CurvedTriangle, EdgeParam, ReferenceCoords,
};

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("node index {index} out of range for {nodes} nodes")]
    IndexOutOfRange { index: usize, nodes: usize },
    #[error("element {element} has collinear corners")]
    DegenerateElement { element: usize },
    #[error("non-conforming mesh: edge with corners {corners:?} has mismatched midnodes")]
    NonConforming { corners: [usize; 2] },
    #[error("malformed mesh file: {0}")]
    Parse(String),
    #[error("no second-order triangles (type 9) in mesh file")]
    NoTriangles,
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// A conforming surface mesh of six-node triangles.
#[derive(Debug, Clone)]
pub struct SurfaceMesh {
    nodes: Vec<Vector3<f64>>,
    elements: Vec<[usize; 6]>,
    /// For each node, the (element, local index) pairs referencing it.
    node_elements: Vec<Vec<(usize, usize)>>,
}

impl SurfaceMesh {
    pub fn new(nodes: Vec<Vector3<f64>>, elements: Vec<[usize; 6]>) -> Result<Self, MeshError> {
        let n = nodes.len();
        for (e, conn) in elements.iter().enumerate() {
            for &i in conn {
                if i >= n {
                    return Err(MeshError::IndexOutOfRange { index: i, nodes: n });
                }
            }
            let cross = (nodes[conn[1]] - nodes[conn[0]]).cross(&(nodes[conn[2]] - nodes[conn[0]]));
            let scale = (nodes[conn[1]] - nodes[conn[0]])
                .norm()
                .max((nodes[conn[2]] - nodes[conn[0]]).norm());
            if cross.norm() <= 1e-14 * scale * scale {
                return Err(MeshError::DegenerateElement { element: e });
            }
        }
        let mut node_elements = vec![Vec::new(); n];
        for (e, conn) in elements.iter().enumerate() {
            for (local, &i) in conn.iter().enumerate() {
                node_elements[i].push((e, local));
            }
        }
        Ok(Self {
            nodes,
            elements,
            node_elements,
        })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn element_count(&self) -> usize {
        self.elements.len()
    }

    pub fn node(&self, i: usize) -> Vector3<f64> {
        self.nodes[i]
    }

    pub fn nodes(&self) -> &[Vector3<f64>] {
        &self.nodes
    }

    pub fn connectivity(&self, e: usize) -> [usize; 6] {
        self.elements[e]
    }

    pub fn elements(&self) -> &[[usize; 6]] {
        &self.elements
    }

    pub fn node_elements(&self, i: usize) -> &[(usize, usize)] {
        &self.node_elements[i]
    }

    pub fn element(&self, e: usize) -> CurvedTriangle {
        let c = self.elements[e];
        CurvedTriangle::from_vectors([
            self.nodes[c[0]],
            self.nodes[c[1]],
            self.nodes[c[2]],
            self.nodes[c[3]],
            self.nodes[c[4]],
            self.nodes[c[5]],
        ])
        .expect("validated on construction")
    }

    /// Check that every shared edge references the identical corner pair and
    /// midnode, and report boundary edge count.
    pub fn validate_conforming(&self) -> Result<ConformityReport, MeshError> {
        let mut edges: HashMap<[usize; 2], (usize, usize)> = HashMap::new();
        for conn in &self.elements {
            for edge in 0..3 {
                let a = conn[edge];
                let b = conn[(edge + 1) % 3];
                let mid = conn[edge + 3];
                let key = if a < b { [a, b] } else { [b, a] };
                match edges.get_mut(&key) {
                    None => {
                        edges.insert(key, (mid, 1));
                    }
                    Some((m, count)) => {
                        if *m != mid {
                            return Err(MeshError::NonConforming { corners: key });
                        }
                        *count += 1;
                    }
                }
            }
        }
        let mut boundary = 0usize;
        for (_, (_, count)) in &edges {
            match count {
                1 => boundary += 1,
                2 => {}
                _ => {
                    // An edge shared by three or more elements is not a
                    // manifold surface.
                    return Err(MeshError::Parse(
                        "edge shared by more than two elements".into(),
                    ));
                }
            }
        }
        Ok(ConformityReport {
            interior_edges: edges.len() - boundary,
            boundary_edges: boundary,
        })
    }

    /// Fraction of elements whose centroid normal points away from the mesh
    /// centroid; 1.0 for a consistently outward-oriented star-shaped mesh.
    pub fn outward_fraction(&self) -> f64 {
        let centroid: Vector3<f64> =
            self.nodes.iter().sum::<Vector3<f64>>() / self.nodes.len() as f64;
        let mut outward = 0usize;
        for e in 0..self.elements.len() {
            let tri = self.element(e);
            let at = ReferenceCoords::CENTROID;
            if let Ok((_, n)) = surface_jacobian(&tri, at) {
                if n.dot(&(interpolate(&tri, at) - centroid)) > 0.0 {
                    outward += 1;
                }
            }
        }
        outward as f64 / self.elements.len().max(1) as f64
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ConformityReport {
    pub interior_edges: usize,
    pub boundary_edges: usize,
}

/// A mesh read from file along with any skipped-content warnings.
#[derive(Debug)]
pub struct MshFile {
    pub mesh: SurfaceMesh,
    pub warnings: Vec<String>,
}

/// Read a GMSH ASCII v2.2 mesh, keeping the six-node triangles.
///
/// Unsupported element types are skipped with a warning; nodes not referenced
/// by any kept triangle are dropped and indices compacted.
pub fn read_msh<R: BufRead>(input: R) -> Result<MshFile, MeshError> {
    let lines: Vec<String> = input.lines().collect::<Result<_, _>>()?;
    let mut i = 0usize;
    let mut raw_nodes: HashMap<usize, Vector3<f64>> = HashMap::new();
    let mut raw_elements: Vec<[usize; 6]> = Vec::new();
    let mut warnings = Vec::new();
    let mut skipped: HashMap<usize, usize> = HashMap::new();

    while i < lines.len() {
        let line = lines[i].trim();
        match line {
            "$MeshFormat" => {
                let fmt = lines
                    .get(i + 1)
                    .ok_or_else(|| MeshError::Parse("truncated $MeshFormat".into()))?;
                let mut parts = fmt.split_whitespace();
                let version = parts.next().unwrap_or("");
                let file_type = parts.next().unwrap_or("");
                if !version.starts_with("2.") {
                    return Err(MeshError::Parse(format!(
                        "unsupported msh version {version}; expected 2.2 ASCII"
                    )));
                }
                if file_type != "0" {
                    return Err(MeshError::Parse("binary msh files are unsupported".into()));
                }
                i += 2;
            }
            "$Nodes" => {
                let count: usize = parse_tok(lines.get(i + 1), "node count")?;
                for k in 0..count {
                    let row = lines
                        .get(i + 2 + k)
                        .ok_or_else(|| MeshError::Parse("truncated $Nodes".into()))?;
                    let mut parts = row.split_whitespace();
                    let id: usize = parse_tok(parts.next(), "node id")?;
                    let x: f64 = parse_tok(parts.next(), "node x")?;
                    let y: f64 = parse_tok(parts.next(), "node y")?;
                    let z: f64 = parse_tok(parts.next(), "node z")?;
                    raw_nodes.insert(id, Vector3::new(x, y, z));
                }
                i += 2 + count;
            }
            "$Elements" => {
                let count: usize = parse_tok(lines.get(i + 1), "element count")?;
                for k in 0..count {
                    let row = lines
                        .get(i + 2 + k)
                        .ok_or_else(|| MeshError::Parse("truncated $Elements".into()))?;
                    let mut parts = row.split_whitespace();
                    let _id: usize = parse_tok(parts.next(), "element id")?;
                    let etype: usize = parse_tok(parts.next(), "element type")?;
                    let ntags: usize = parse_tok(parts.next(), "tag count")?;
                    for _ in 0..ntags {
                        parts.next();
                    }
                    if etype != 9 {
                        *skipped.entry(etype).or_insert(0) += 1;
                        continue;
                    }
                    let mut conn = [0usize; 6];
                    for slot in &mut conn {
                        *slot = parse_tok(parts.next(), "element node id")?;
                    }
                    raw_elements.push(conn);
                }
                i += 2 + count;
            }
            _ => i += 1,
        }
    }

    for (etype, n) in skipped {
        warnings.push(format!("skipped {n} elements of unsupported type {etype}"));
    }
    if raw_elements.is_empty() {
        return Err(MeshError::NoTriangles);
    }

    // Compact referenced nodes into dense indices, preserving first-use order.
    let mut remap: HashMap<usize, usize> = HashMap::new();
    let mut nodes = Vec::new();
    let mut elements = Vec::with_capacity(raw_elements.len());
    for conn in &raw_elements {
        let mut mapped = [0usize; 6];
        for (slot, &id) in mapped.iter_mut().zip(conn) {
            let next = remap.len();
            let idx = *remap.entry(id).or_insert_with(|| {
                let v = raw_nodes.get(&id).copied();
                nodes.push(v);
                next
            });
            *slot = idx;
        }
        elements.push(mapped);
    }
    let nodes: Vec<Vector3<f64>> = nodes
        .into_iter()
        .enumerate()
        .map(|(idx, v)| v.ok_or_else(|| MeshError::Parse(format!("node for index {idx} missing"))))
        .collect::<Result<_, _>>()?;

    let mesh = SurfaceMesh::new(nodes, elements)?;
    // Orientation is only meaningful for closed surfaces.
    if let Ok(report) = mesh.validate_conforming() {
        if report.boundary_edges == 0 && mesh.outward_fraction() < 1.0 {
            warnings.push(format!(
                "orientation check: {:.1}% of element normals point away from the mesh centroid",
                100.0 * mesh.outward_fraction()
            ));
        }
    }
    Ok(MshFile { mesh, warnings })
}

fn parse_tok<T: std::str::FromStr>(tok: Option<impl AsRef<str>>, what: &str) -> Result<T, MeshError> {
    let tok = tok.ok_or_else(|| MeshError::Parse(format!("missing {what}")))?;
    tok.as_ref()
        .trim()
        .parse()
        .map_err(|_| MeshError::Parse(format!("bad {what}: {:?}", tok.as_ref())))
}

/// Write the mesh in the same GMSH 2.2 ASCII dialect `read_msh` accepts.
pub fn write_msh<W: Write>(out: &mut W, mesh: &SurfaceMesh) -> io::Result<()> {
    writeln!(out, "$MeshFormat")?;
    writeln!(out, "2.2 0 8")?;
    writeln!(out, "$EndMeshFormat")?;
    writeln!(out, "$Nodes")?;
    writeln!(out, "{}", mesh.node_count())?;
    for (i, n) in mesh.nodes().iter().enumerate() {
        writeln!(out, "{} {:.16e} {:.16e} {:.16e}", i + 1, n.x, n.y, n.z)?;
    }
    writeln!(out, "$EndNodes")?;
    writeln!(out, "$Elements")?;
    writeln!(out, "{}", mesh.element_count())?;
    for (e, conn) in mesh.elements().iter().enumerate() {
        write!(out, "{} 9 2 0 0", e + 1)?;
        for &i in conn {
            write!(out, " {}", i + 1)?;
        }
        writeln!(out)?;
    }
    writeln!(out, "$EndElements")?;
    Ok(())
}

const ICO_VERTS: [[f64; 3]; 12] = {
    // Icosahedron on the unit sphere; PHI is the golden ratio and the raw
    // coordinates are scaled by 1/sqrt(1 + PHI^2).
    const PHI: f64 = 1.618033988749894848;
    const S: f64 = 0.5257311121191336;
    const L: f64 = PHI * S;
    [
        [-S, L, 0.0],
        [S, L, 0.0],
        [-S, -L, 0.0],
        [S, -L, 0.0],
        [0.0, -S, L],
        [0.0, S, L],
        [0.0, -S, -L],
        [0.0, S, -L],
        [L, 0.0, -S],
        [L, 0.0, S],
        [-L, 0.0, -S],
        [-L, 0.0, S],
    ]
};

const ICO_FACES: [[usize; 3]; 20] = [
    [0, 11, 5],
    [0, 5, 1],
    [0, 1, 7],
    [0, 7, 10],
    [0, 10, 11],
    [1, 5, 9],
    [5, 11, 4],
    [11, 10, 2],
    [10, 7, 6],
    [7, 1, 8],
    [3, 9, 4],
    [3, 4, 2],
    [3, 2, 6],
    [3, 6, 8],
    [3, 8, 9],
    [4, 9, 5],
    [2, 4, 11],
    [6, 2, 10],
    [8, 6, 7],
    [9, 8, 1],
];

/// Second-order mesh of the unit sphere: an icosahedron subdivided
/// `refinement` times, with corner and edge-midpoint nodes projected
/// radially onto the sphere. P = 20·4^refinement elements, all oriented
/// outward.
pub fn sphere_mesh(refinement: u32) -> SurfaceMesh {
    let mut verts: Vec<Vector3<f64>> = ICO_VERTS.iter().map(|v| Vector3::from(*v)).collect();
    let mut faces: Vec<[usize; 3]> = ICO_FACES.to_vec();

    for _ in 0..refinement {
        let mut midpoints: HashMap<[usize; 2], usize> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        for f in &faces {
            let m01 = linear_midpoint(&mut verts, &mut midpoints, f[0], f[1], true);
            let m12 = linear_midpoint(&mut verts, &mut midpoints, f[1], f[2], true);
            let m20 = linear_midpoint(&mut verts, &mut midpoints, f[2], f[0], true);
            next.push([f[0], m01, m20]);
            next.push([f[1], m12, m01]);
            next.push([f[2], m20, m12]);
            next.push([m01, m12, m20]);
        }
        faces = next;
    }

    // Promote to six-node elements with projected edge midnodes.
    let mut midpoints: HashMap<[usize; 2], usize> = HashMap::new();
    let mut elements = Vec::with_capacity(faces.len());
    for f in &faces {
        let m01 = linear_midpoint(&mut verts, &mut midpoints, f[0], f[1], true);
        let m12 = linear_midpoint(&mut verts, &mut midpoints, f[1], f[2], true);
        let m20 = linear_midpoint(&mut verts, &mut midpoints, f[2], f[0], true);
        elements.push([f[0], f[1], f[2], m01, m12, m20]);
    }

    let mesh = SurfaceMesh::new(verts, elements).expect("sphere mesh is valid");
    orient_outward(mesh)
}

/// Midpoint node of (a, b), deduplicated; optionally projected to the unit
/// sphere.
fn linear_midpoint(
    verts: &mut Vec<Vector3<f64>>,
    cache: &mut HashMap<[usize; 2], usize>,
    a: usize,
    b: usize,
    project: bool,
) -> usize {
    let key = if a < b { [a, b] } else { [b, a] };
    if let Some(&idx) = cache.get(&key) {
        return idx;
    }
    let mut mid = 0.5 * (verts[a] + verts[b]);
    if project {
        mid = mid.normalize();
    }
    let idx = verts.len();
    verts.push(mid);
    cache.insert(key, idx);
    idx
}

/// Flip any element whose centroid normal points towards the mesh centroid.
fn orient_outward(mesh: SurfaceMesh) -> SurfaceMesh {
    let centroid: Vector3<f64> =
        mesh.nodes().iter().sum::<Vector3<f64>>() / mesh.node_count() as f64;
    let mut elements = mesh.elements().to_vec();
    for (e, conn) in elements.iter_mut().enumerate() {
        let tri = mesh.element(e);
        let at = ReferenceCoords::CENTROID;
        let (_, n) = surface_jacobian(&tri, at).expect("non-degenerate");
        if n.dot(&(interpolate(&tri, at) - centroid)) < 0.0 {
            // Swap corners 2 and 3; midnodes follow: 4↔6 stays on the same
            // corner pairs after renumbering.
            *conn = [conn[0], conn[2], conn[1], conn[5], conn[4], conn[3]];
        }
    }
    SurfaceMesh::new(mesh.nodes().to_vec(), elements).expect("orientation flip keeps validity")
}

/// Split every curved element into six flat triangles fanned about its
/// centroid node (the image of ξ = η = 1/3), encoded as degenerate six-node
/// elements with exact chord midpoints.
pub fn split_to_linear(mesh: &SurfaceMesh) -> SurfaceMesh {
    let mut nodes = mesh.nodes().to_vec();
    let mut midpoints: HashMap<[usize; 2], usize> = HashMap::new();
    let mut elements = Vec::with_capacity(mesh.element_count() * 6);

    for e in 0..mesh.element_count() {
        let tri = mesh.element(e);
        let conn = mesh.connectivity(e);
        let centroid_idx = nodes.len();
        nodes.push(interpolate(&tri, ReferenceCoords::CENTROID));

        // Boundary loop in anti-clockwise order: corner, midnode, corner, ...
        let loop_nodes = [conn[0], conn[3], conn[1], conn[4], conn[2], conn[5]];
        for k in 0..6 {
            let a = loop_nodes[k];
            let b = loop_nodes[(k + 1) % 6];
            let c = centroid_idx;
            let mab = linear_midpoint(&mut nodes, &mut midpoints, a, b, false);
            let mbc = linear_midpoint(&mut nodes, &mut midpoints, b, c, false);
            let mca = linear_midpoint(&mut nodes, &mut midpoints, c, a, false);
            elements.push([a, b, c, mab, mbc, mca]);
        }
    }

    SurfaceMesh::new(nodes, elements).expect("split mesh is valid")
}

/// Total surface area by the far-field rule on every element.
pub fn mesh_area(mesh: &SurfaceMesh) -> f64 {
    let rule = crate::quadrature::fallback_rule();
    (0..mesh.element_count())
        .map(|e| crate::quadrature::apply_rule(&rule, &mesh.element(e), |_| 1.0))
        .sum()
}

/// Area-weighted outward unit normal at a mesh node, averaged over the
/// adjacent elements' normals evaluated at the node.
pub fn node_normal(mesh: &SurfaceMesh, node: usize) -> Vector3<f64> {
    let rule = crate::quadrature::fallback_rule();
    let mut acc = Vector3::zeros();
    for &(e, local) in mesh.node_elements(node) {
        let tri = mesh.element(e);
        let coords = crate::element::NODE_COORDS[local];
        let (_, n) = surface_jacobian(&tri, coords).expect("non-degenerate element");
        let area = crate::quadrature::apply_rule(&rule, &tri, |_| 1.0);
        acc += area * n;
    }
    acc.normalize()
}

/// Reference coordinates of local node `local` — re-exported convenience for
/// collocation at mesh nodes.
pub fn local_node_coords(local: usize) -> ReferenceCoords {
    crate::element::NODE_COORDS[local]
}

/// Edge midpoint parameter positions, used when mapping edge data; kept for
/// parity with `edge_to_area`.
pub fn edge_midpoint_coords(edge: usize) -> ReferenceCoords {
    edge_to_area(EdgeParam::new(edge, 0.5))
}
