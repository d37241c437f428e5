use super::embed::{EmbeddingSet, RasterOptions};
use super::topology::{pegasus_index, HardwareGraph};
use crate::error::Result;
use crate::ising::SquareCylinder;

/// Pegasus coordinates `(u, w, k, z)` of a six-row, four-column block of a square
/// cylinder: `MOTIF[row][col]`. Column `c + 4` is column `c` translated by one cell in
/// both directions, so the block tiles any number of columns.
const MOTIF: [[(usize, usize, usize, usize); 4]; 6] = [
    [(0, 6, 0, 5), (1, 5, 8, 5), (0, 6, 8, 5), (1, 6, 2, 6)],
    [(0, 6, 1, 5), (1, 5, 9, 5), (0, 6, 9, 5), (1, 6, 3, 6)],
    [(1, 5, 6, 5), (0, 5, 10, 5), (1, 5, 10, 5), (0, 6, 6, 5)],
    [(0, 5, 8, 5), (1, 6, 0, 5), (0, 6, 4, 5), (1, 6, 8, 5)],
    [(0, 5, 9, 5), (1, 6, 1, 5), (0, 6, 5, 5), (1, 6, 9, 5)],
    [(1, 5, 7, 5), (0, 5, 11, 5), (1, 5, 11, 5), (0, 6, 7, 5)],
];

/// Rows covered by [`MOTIF`].
pub const MOTIF_ROWS: usize = 6;

/// Pegasus translation by `(dx, dy)` cells: vertical qubits move `(w + dx, z + dy)`,
/// horizontal ones `(w + dy, z + dx)`. Returns `None` when the image leaves the graph.
fn translate(
    m: usize,
    (u, w, k, z): (usize, usize, usize, usize),
    dx: i64,
    dy: i64,
) -> Option<usize> {
    let (sw, sz) = if u == 0 { (dx, dy) } else { (dy, dx) };
    let w = w as i64 + sw;
    let z = z as i64 + sz;
    if w < 0 || z < 0 || w >= m as i64 || z >= m as i64 - 1 {
        return None;
    }
    Some(pegasus_index(m, u, w as usize, k, z as usize))
}

/// The motif layout of a `6 x cols` cylinder shifted by `(dx, dy)`, as a map from
/// cylinder site `r cols + c` to qubit.
fn motif_map(m: usize, cols: usize, dx: i64, dy: i64) -> Option<Vec<usize>> {
    let mut map = vec![0; MOTIF_ROWS * cols];
    for (r, row) in MOTIF.iter().enumerate() {
        for c in 0..cols {
            let period = (c / 4) as i64;
            map[r * cols + c] = translate(m, row[c % 4], dx + period, dy + period)?;
        }
    }
    Some(map)
}

fn pegasus_size(hw: &HardwareGraph) -> Option<usize> {
    hw.name().strip_prefix("pegasus:")?.parse().ok()
}

/// Disjoint embeddings of a square cylinder.
///
/// Six-row cylinders on Pegasus hardware are laid out constructively: the periodic
/// motif is tried at every translation (row-major over shifts) and each placement that
/// uses only operable, free qubits and working couplers is kept. Other cylinders fall
/// back to [`super::raster_embed`]. At most `copies` embeddings are returned.
pub fn square_cylinder_embeddings(
    cylinder: &SquareCylinder,
    hw: &HardwareGraph,
    copies: usize,
    options: RasterOptions,
) -> Result<EmbeddingSet> {
    if let (MOTIF_ROWS, Some(m)) = (cylinder.rows, pegasus_size(hw)) {
        let mut used = vec![false; hw.num_qubits()];
        let mut maps = Vec::new();
        let span = m as i64;
        'shifts: for dy in -span..span {
            for dx in -span..span {
                if maps.len() >= copies {
                    break 'shifts;
                }
                let Some(map) = motif_map(m, cylinder.cols, dx, dy) else {
                    continue;
                };
                let free = map.iter().all(|&q| !used[q] && hw.is_operable(q));
                let wired = cylinder
                    .model
                    .edges()
                    .iter()
                    .all(|&(i, j)| hw.usable_edge(map[i], map[j]));
                if free && wired {
                    for &q in &map {
                        used[q] = true;
                    }
                    maps.push(map);
                }
            }
        }
        return EmbeddingSet::new(cylinder.model.clone(), maps, hw);
    }
    super::raster_embed(
        &cylinder.model,
        hw,
        RasterOptions {
            max_copies: copies,
            ..options
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hardware::{make_pegasus, mask_qubits};
    use crate::ising::make_square_cylinder;

    #[test]
    fn motif_embeds_desk_cylinders() {
        let hw = make_pegasus(8).unwrap();
        for cols in [4, 6, 8] {
            let cyl = make_square_cylinder(6, cols, 0.9).unwrap();
            let es = square_cylinder_embeddings(&cyl, &hw, 2, RasterOptions::default()).unwrap();
            assert_eq!(es.len(), 2, "cols {cols}");
        }
    }

    #[test]
    fn motif_packs_many_copies() {
        let hw = make_pegasus(16).unwrap();
        let cyl = make_square_cylinder(6, 6, 0.9).unwrap();
        let es =
            square_cylinder_embeddings(&cyl, &hw, usize::MAX, RasterOptions::default()).unwrap();
        assert!(es.len() >= 10, "{}", es.len());
    }

    #[test]
    fn motif_avoids_broken_qubits() {
        let hw = make_pegasus(8).unwrap();
        let cyl = make_square_cylinder(6, 6, 0.9).unwrap();
        let first = square_cylinder_embeddings(&cyl, &hw, 1, RasterOptions::default()).unwrap();
        let broken = [first.maps()[0][0]].into_iter().collect();
        let masked = mask_qubits(&hw, &broken).unwrap();
        let es = square_cylinder_embeddings(&cyl, &masked, 1, RasterOptions::default()).unwrap();
        assert_eq!(es.len(), 1);
        assert!(!es.maps()[0].contains(&first.maps()[0][0]));
    }
}
