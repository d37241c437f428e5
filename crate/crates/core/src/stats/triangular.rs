use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ising::IsingModel;
use crate::sampler::SampleSet;

/// Assignment of every logical spin to one of three sublattices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SublatticeColoring {
    pub color: Vec<u8>,
}

impl SublatticeColoring {
    /// Checks colors are in `0..3` and no coupled pair shares a color.
    pub fn verify(&self, model: &IsingModel) -> Result<()> {
        if self.color.len() != model.num_spins() {
            return Err(Error::LengthMismatch {
                expected: model.num_spins(),
                got: self.color.len(),
            });
        }
        if let Some(i) = self.color.iter().position(|&c| c > 2) {
            return Err(Error::BadColoring(format!(
                "spin {i} has color {}",
                self.color[i]
            )));
        }
        if let Some(&(i, j)) = model
            .edges()
            .iter()
            .find(|&&(i, j)| self.color[i] == self.color[j])
        {
            return Err(Error::BadColoring(format!(
                "coupled spins {i} and {j} share a color"
            )));
        }
        Ok(())
    }

    /// Number of spins of each color.
    pub fn counts(&self) -> [usize; 3] {
        let mut out = [0; 3];
        for &c in &self.color {
            out[c as usize] += 1;
        }
        out
    }
}

/// Three-colors a triangulated lattice: the first triangle (in index order) is seeded
/// with colors 0, 1, 2, and every spin adjacent to a coupled, differently colored pair
/// takes the remaining color. Fails when the propagation stalls or conflicts.
pub fn three_coloring(model: &IsingModel) -> Result<SublatticeColoring> {
    let n = model.num_spins();
    let adj: Vec<Vec<usize>> = model
        .adjacency()
        .into_iter()
        .map(|row| {
            let mut v: Vec<usize> = row.into_iter().map(|(w, _)| w).collect();
            v.sort_unstable();
            v
        })
        .collect();
    let linked = |a: usize, b: usize| adj[a].binary_search(&b).is_ok();
    let seed = (0..n).find_map(|a| {
        adj[a].iter().filter(|&&b| b > a).find_map(|&b| {
            adj[b]
                .iter()
                .find(|&&c| c > b && linked(a, c))
                .map(|&c| (a, b, c))
        })
    });
    let Some((a, b, c)) = seed else {
        return Err(Error::BadColoring("model has no triangle".into()));
    };
    let mut color: Vec<Option<u8>> = vec![None; n];
    color[a] = Some(0);
    color[b] = Some(1);
    color[c] = Some(2);
    let mut stack = vec![a, b, c];
    while let Some(u) = stack.pop() {
        let cu = color[u].expect("stacked spins are colored");
        for &v in &adj[u] {
            let Some(cv) = color[v] else { continue };
            if cv == cu {
                return Err(Error::BadColoring(format!(
                    "coupled spins {u} and {v} share a color"
                )));
            }
            let third = 3 - cu - cv;
            for &w in &adj[u] {
                if !linked(v, w) {
                    continue;
                }
                match color[w] {
                    None => {
                        color[w] = Some(third);
                        stack.push(w);
                    }
                    Some(cw) if cw != third => {
                        return Err(Error::BadColoring(format!(
                            "triangle ({u}, {v}, {w}) cannot be three-colored"
                        )));
                    }
                    Some(_) => {}
                }
            }
        }
    }
    if let Some(i) = color.iter().position(Option::is_none) {
        return Err(Error::BadColoring(format!(
            "spin {i} is not reached through triangles"
        )));
    }
    let coloring = SublatticeColoring {
        color: color.into_iter().map(|c| c.expect("all colored")).collect(),
    };
    coloring.verify(model)?;
    Ok(coloring)
}

/// Majority vote of each group of physical spins, ties resolved by the group's first
/// member. Returns one logical state per read.
pub fn decode_chains(samples: &SampleSet, groups: &[Vec<usize>]) -> Result<Vec<Vec<i8>>> {
    for &q in groups.iter().flatten() {
        if q >= samples.num_spins() {
            return Err(Error::SpinOutOfRange {
                index: q,
                num_spins: samples.num_spins(),
            });
        }
    }
    if let Some(k) = groups.iter().position(Vec::is_empty) {
        return Err(Error::InvalidParameter(format!("chain group {k} is empty")));
    }
    Ok(samples
        .reads()
        .map(|read| {
            groups
                .iter()
                .map(|g| {
                    let sum: i32 = g.iter().map(|&q| i32::from(read[q])).sum();
                    match sum.signum() {
                        0 => read[g[0]],
                        s => s as i8,
                    }
                })
                .collect()
        })
        .collect())
}

/// Per-read order parameter `ψ = (√3 / N) Σ_j s_j exp(2πi c_j / 3)` and the mean of
/// `|ψ|` over reads. The pure sublattice state `(+, -, -)` has `|ψ| = 2/√3`.
///
/// Spins are summed per sublattice in integers first, so a uniform state gives exactly
/// zero on a balanced coloring and a global flip negates `ψ` exactly.
pub fn order_parameter(
    states: &[Vec<i8>],
    coloring: &SublatticeColoring,
) -> Result<(Vec<Complex64>, f64)> {
    let n = coloring.color.len();
    if n == 0 {
        return Err(Error::InvalidParameter("empty coloring".into()));
    }
    let scale = 3f64.sqrt() / n as f64;
    let half_root3 = 3f64.sqrt() / 2.0;
    let mut psi = Vec::with_capacity(states.len());
    for s in states {
        if s.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: s.len(),
            });
        }
        let mut sums = [0i64; 3];
        for (&x, &c) in s.iter().zip(&coloring.color) {
            sums[c as usize] += i64::from(x);
        }
        let [a, b, c] = sums.map(|v| v as f64);
        let re = a - (b + c) / 2.0;
        let im = half_root3 * (b - c);
        psi.push(Complex64::new(re * scale, im * scale));
    }
    let mean = if psi.is_empty() {
        0.0
    } else {
        psi.iter().map(|z| z.norm()).sum::<f64>() / psi.len() as f64
    };
    Ok((psi, mean))
}
