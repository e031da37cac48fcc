use super::{FractureNetwork, PolyMesh};

/// Partition of the cells around each vertex and edge into the groups lying
/// on the same side of the fracture network.
///
/// Two cells around an entity are in the same class iff they can be joined
/// by a chain of non-fracture faces that all contain the entity. Entities
/// away from the fractures therefore carry a single class.
#[derive(Debug, Clone)]
pub struct SideClasses {
    vertex: Vec<Vec<Vec<usize>>>,
    edge: Vec<Vec<Vec<usize>>>,
    on_fracture_vertex: Vec<bool>,
    on_fracture_edge: Vec<bool>,
}

impl SideClasses {
    pub fn vertex_classes(&self, s: usize) -> &[Vec<usize>] {
        &self.vertex[s]
    }

    pub fn edge_classes(&self, e: usize) -> &[Vec<usize>] {
        &self.edge[e]
    }

    /// Class index of `cell` around vertex `s`.
    pub fn vertex_class_of(&self, s: usize, cell: usize) -> Option<usize> {
        self.vertex[s].iter().position(|c| c.binary_search(&cell).is_ok())
    }

    pub fn edge_class_of(&self, e: usize, cell: usize) -> Option<usize> {
        self.edge[e].iter().position(|c| c.binary_search(&cell).is_ok())
    }

    pub fn vertex_on_fracture(&self, s: usize) -> bool {
        self.on_fracture_vertex[s]
    }

    pub fn edge_on_fracture(&self, e: usize) -> bool {
        self.on_fracture_edge[e]
    }

    pub fn num_vertex_classes(&self) -> usize {
        self.vertex.iter().map(Vec::len).sum()
    }

    pub fn num_edge_classes(&self) -> usize {
        self.edge.iter().map(Vec::len).sum()
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.0[i] != i {
            self.0[i] = self.0[self.0[i]];
            i = self.0[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

fn components(cells: &[usize], faces: &[usize], mesh: &PolyMesh, fracture: &FractureNetwork) -> Vec<Vec<usize>> {
    let mut sorted = cells.to_vec();
    sorted.sort_unstable();
    let mut uf = UnionFind::new(sorted.len());
    for &f in faces {
        let face = &mesh.faces[f];
        if face.cells.len() != 2 || fracture.contains(f) {
            continue;
        }
        let a = sorted.binary_search(&face.cells[0]);
        let b = sorted.binary_search(&face.cells[1]);
        if let (Ok(a), Ok(b)) = (a, b) {
            uf.union(a, b);
        }
    }
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for (i, &c) in sorted.iter().enumerate() {
        let r = uf.find(i);
        match groups.iter_mut().find(|(root, _)| *root == r) {
            Some((_, g)) => g.push(c),
            None => groups.push((r, vec![c])),
        }
    }
    groups.into_iter().map(|(_, g)| g).collect()
}

pub fn classify_fracture_sides(mesh: &PolyMesh, fracture: &FractureNetwork) -> SideClasses {
    let mut on_v = vec![false; mesh.num_vertices()];
    let mut on_e = vec![false; mesh.num_edges()];
    for ff in &fracture.faces {
        let face = &mesh.faces[ff.face];
        for &v in &face.vertices {
            on_v[v] = true;
        }
        for &e in &face.edges {
            on_e[e] = true;
        }
    }
    let single = |cells: &[usize]| {
        let mut c = cells.to_vec();
        c.sort_unstable();
        vec![c]
    };
    let vertex = (0..mesh.num_vertices())
        .map(|s| {
            if on_v[s] {
                components(&mesh.vertex_cells[s], &mesh.vertex_faces[s], mesh, fracture)
            } else {
                single(&mesh.vertex_cells[s])
            }
        })
        .collect();
    let edge = (0..mesh.num_edges())
        .map(|e| {
            if on_e[e] {
                components(&mesh.edge_cells[e], &mesh.edge_faces[e], mesh, fracture)
            } else {
                single(&mesh.edge_cells[e])
            }
        })
        .collect();
    SideClasses {
        vertex,
        edge,
        on_fracture_vertex: on_v,
        on_fracture_edge: on_e,
    }
}
