use serde::{Deserialize, Serialize};

use super::mean_std;
use crate::error::{Error, Result};
use crate::orbits::Orbits;

/// Observables and shimmed terms of one iteration. `fbo`, `couplings` and `fields`
/// are the values programmed for that iteration's samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: u64,
    pub m: Vec<f64>,
    pub f: Vec<f64>,
    pub fbo: Vec<f64>,
    pub couplings: Vec<f64>,
    pub fields: Vec<f64>,
}

/// Per-iteration history with contiguous iteration indices and aligned lengths.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ObservableSeries {
    records: Vec<IterationRecord>,
}

impl ObservableSeries {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, record: IterationRecord) -> Result<()> {
        if let Some(last) = self.records.last() {
            if record.iter != last.iter + 1 {
                return Err(Error::InvalidParameter(format!(
                    "iteration {} does not follow {}",
                    record.iter, last.iter
                )));
            }
            let shape = |r: &IterationRecord| {
                (
                    r.m.len(),
                    r.f.len(),
                    r.fbo.len(),
                    r.couplings.len(),
                    r.fields.len(),
                )
            };
            if shape(last) != shape(&record) {
                return Err(Error::InvalidParameter("record lengths changed".into()));
            }
        }
        self.records.push(record);
        Ok(())
    }

    pub fn records(&self) -> &[IterationRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }

    /// The last `depth` values of one term class, oldest first.
    pub fn recent<F>(&self, depth: usize, term: F) -> Vec<&[f64]>
    where
        F: Fn(&IterationRecord) -> &[f64],
    {
        let start = self.records.len().saturating_sub(depth);
        self.records[start..].iter().map(term).collect()
    }

    /// `(σ_m, σ_f)` at record position `t` (see [`dispersion`]).
    pub fn dispersion_at(&self, t: usize, window: usize, orbits: &Orbits) -> Result<(f64, f64)> {
        if window == 0 || window > t + 1 || t >= self.records.len() {
            return Err(Error::InsufficientHistory {
                have: self.records.len().min(t + 1),
                need: window.max(1),
            });
        }
        let span = &self.records[t + 1 - window..=t];
        let moving = |get: &dyn Fn(&IterationRecord) -> &[f64]| -> Vec<f64> {
            let len = get(&span[0]).len();
            (0..len)
                .map(|i| span.iter().map(|r| get(r)[i]).sum::<f64>() / window as f64)
                .collect()
        };
        let m = moving(&|r| &r.m);
        let f = moving(&|r| &r.f);
        let sigma_m = mean_std(&m).1;
        let groups = orbits.coupler_members();
        let sigma_f = if groups.is_empty() {
            0.0
        } else {
            groups
                .values()
                .map(|members| {
                    let vals: Vec<f64> = members.iter().map(|&k| f[k]).collect();
                    mean_std(&vals).1
                })
                .sum::<f64>()
                / groups.len() as f64
        };
        Ok((sigma_m, sigma_f))
    }
}

/// Moving-mean dispersion: for every iteration with a full window, the population
/// std across qubits of the windowed mean magnetization (`σ_m`) and the std of the
/// windowed mean frustration within each coupler orbit, averaged over orbits (`σ_f`).
/// Returns `(iter, σ_m, σ_f)`.
pub fn dispersion(
    series: &ObservableSeries,
    window: usize,
    orbits: &Orbits,
) -> Result<Vec<(u64, f64, f64)>> {
    if window == 0 || window > series.len() {
        return Err(Error::InsufficientHistory {
            have: series.len(),
            need: window.max(1),
        });
    }
    (window - 1..series.len())
        .map(|t| {
            let (sm, sf) = series.dispersion_at(t, window, orbits)?;
            Ok((series.records()[t].iter, sm, sf))
        })
        .collect()
}

/// Exponent `b` of `var(X_d) ∝ d^b`, where `X_d = {x(T) - x(T - d)}` over all tracked
/// terms `x` at the newest time `T`, for `d = 1..=lookback`. `history` holds at least
/// `lookback + 1` snapshots, oldest first. Returns `None` when some `var(X_d)` is zero.
pub fn fit_walk_exponent(history: &[&[f64]], lookback: usize) -> Result<Option<f64>> {
    if lookback == 0 || history.len() < lookback + 1 {
        return Err(Error::InsufficientHistory {
            have: history.len(),
            need: lookback + 1,
        });
    }
    let now = history[history.len() - 1];
    if now.len() < 2 {
        return Err(Error::InvalidParameter(
            "need at least two tracked terms".into(),
        ));
    }
    let mut points = Vec::with_capacity(lookback);
    for d in 1..=lookback {
        let past = history[history.len() - 1 - d];
        let diffs: Vec<f64> = now.iter().zip(past).map(|(a, b)| a - b).collect();
        let sd = mean_std(&diffs).1;
        let var = sd * sd;
        if var.is_nan() || var <= 0.0 {
            return Ok(None);
        }
        points.push(((d as f64).ln(), var.ln()));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        return Ok(None);
    }
    Ok(Some(sxy / sxx))
}

#[cfg(test)]
mod tests {
    use rand::Rng;
    use rand_distr::{Distribution, Normal};

    use super::*;
    use crate::ising::make_frustrated_loop;
    use crate::rng::rng_for;

    fn record(iter: u64, m: Vec<f64>, f: Vec<f64>) -> IterationRecord {
        IterationRecord {
            iter,
            m,
            f,
            fbo: vec![],
            couplings: vec![],
            fields: vec![],
        }
    }

    fn walks(seed: u64, steps: usize, walkers: usize, drift: f64, period2: f64) -> Vec<Vec<f64>> {
        let mut rng = rng_for(seed, 99, 0);
        let noise = Normal::new(0.0, 1.0).unwrap();
        let rates: Vec<f64> = (0..walkers)
            .map(|_| drift * noise.sample(&mut rng))
            .collect();
        let amps: Vec<f64> = (0..walkers)
            .map(|_| period2 * (1.0 + rng.random::<f64>()))
            .collect();
        let mut pos = vec![0.0; walkers];
        let mut out = Vec::new();
        for t in 0..steps {
            let sign = if t % 2 == 0 { 1.0 } else { -1.0 };
            if period2 > 0.0 {
                out.push(
                    (0..walkers)
                        .map(|w| sign * amps[w] + 0.05 * noise.sample(&mut rng))
                        .collect(),
                );
            } else {
                for w in 0..walkers {
                    pos[w] += rates[w] + noise.sample(&mut rng);
                }
                out.push(pos.clone());
            }
        }
        out
    }

    fn exponent(h: &[Vec<f64>]) -> f64 {
        let refs: Vec<&[f64]> = h.iter().map(Vec::as_slice).collect();
        fit_walk_exponent(&refs, 20).unwrap().unwrap()
    }

    #[test]
    fn walk_exponent_regimes() {
        for seed in 0..3 {
            let b = exponent(&walks(seed, 60, 1000, 0.0, 0.0));
            assert!((0.9..=1.1).contains(&b), "unbiased {b}");
            let b = exponent(&walks(seed, 60, 1000, 2.0, 0.0));
            assert!(b > 1.1, "drift {b}");
            let b = exponent(&walks(seed, 60, 1000, 0.0, 1.0));
            assert!(b < 0.9, "period-2 {b}");
        }
    }

    #[test]
    fn walk_exponent_is_scale_invariant() {
        let h = walks(5, 30, 200, 0.3, 0.0);
        let scaled: Vec<Vec<f64>> = h
            .iter()
            .map(|v| v.iter().map(|x| x * 7.5).collect())
            .collect();
        assert!((exponent(&h) - exponent(&scaled)).abs() < 1e-9);
    }

    #[test]
    fn walk_exponent_edge_cases() {
        let flat = vec![vec![1.0, 2.0]; 25];
        let refs: Vec<&[f64]> = flat.iter().map(Vec::as_slice).collect();
        assert_eq!(fit_walk_exponent(&refs, 20).unwrap(), None);
        assert!(fit_walk_exponent(&refs[..20], 20).is_err());
        let one = vec![vec![1.0]; 25];
        let refs: Vec<&[f64]> = one.iter().map(Vec::as_slice).collect();
        assert!(fit_walk_exponent(&refs, 20).is_err());
    }

    #[test]
    fn dispersion_examples() {
        let lp = make_frustrated_loop(4, -1.0).unwrap();
        let orbits = Orbits::singletons(&lp);
        let mut s = ObservableSeries::new();
        for t in 0..3 {
            s.push(record(t, vec![0.2; 4], vec![0.5; 4])).unwrap();
        }
        let d = dispersion(&s, 2, &orbits).unwrap();
        assert_eq!(d, vec![(1, 0.0, 0.0), (2, 0.0, 0.0)]);
        assert!(dispersion(&s, 4, &orbits).is_err());
        assert!(s.push(record(7, vec![0.2; 4], vec![0.5; 4])).is_err());

        let pair =
            crate::ising::IsingModel::new(3, vec![], [((0, 1), 1.0), ((1, 2), 1.0)]).unwrap();
        let one_orbit = crate::orbits::override_orbits(
            &pair,
            &crate::orbits::OrbitClasses {
                qubit_classes: vec![vec![0, 1, 2]],
                coupler_classes: vec![vec![(0, 1), (1, 2)]],
                ..Default::default()
            },
        )
        .unwrap();
        let mut s = ObservableSeries::new();
        s.push(record(0, vec![0.0; 3], vec![0.4, 0.6])).unwrap();
        let (_, sf) = s.dispersion_at(0, 1, &one_orbit).unwrap();
        assert!((sf - 0.1).abs() < 1e-15);
        let two_orbits = Orbits::singletons(&pair);
        let (_, sf) = s.dispersion_at(0, 1, &two_orbits).unwrap();
        assert_eq!(sf, 0.0);
    }

    #[test]
    fn orbit_average_of_sigma_f() {
        // orbits with std 0.0 and 0.2 average to 0.1
        let m = crate::ising::IsingModel::new(
            4,
            vec![],
            [((0, 1), 1.0), ((1, 2), 1.0), ((2, 3), -1.0), ((0, 3), -1.0)],
        )
        .unwrap();
        let orbits = crate::orbits::override_orbits(
            &m,
            &crate::orbits::OrbitClasses {
                qubit_classes: vec![vec![0, 1, 2, 3]],
                coupler_classes: vec![vec![(0, 1), (1, 2)], vec![(2, 3), (0, 3)]],
                ..Default::default()
            },
        )
        .unwrap();
        let mut s = ObservableSeries::new();
        s.push(record(0, vec![0.0; 4], vec![0.3, 0.3, 0.1, 0.5]))
            .unwrap();
        let (_, sf) = s.dispersion_at(0, 1, &orbits).unwrap();
        assert!((sf - 0.1).abs() < 1e-15);
    }
}
