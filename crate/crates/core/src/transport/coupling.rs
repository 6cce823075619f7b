use serde::Serialize;

use super::path::{w2_distance, W2Options};
use crate::generator::DetailedBalanceGenerator;
use crate::operator::{CMat, DensityMatrix, C64};
use crate::{QmsError, Result};

/// Eigenvalues closer than this are treated as one spectral projector.
const PROJECTOR_MERGE: f64 = 1e-10;

/// An optimal coupling of the spectral measures of two states.
#[derive(Clone, Debug, Serialize)]
pub struct Coupling {
    /// Row marginal `lambda_i Tr P_i`.
    pub rows: Vec<f64>,
    /// Column marginal `mu_j Tr Q_j`.
    pub cols: Vec<f64>,
    pub cost: Vec<Vec<f64>>,
    pub plan: Vec<Vec<f64>>,
}

impl Coupling {
    pub fn marginal_residual(&self) -> f64 {
        let mut r = 0.0_f64;
        for (i, a) in self.rows.iter().enumerate() {
            r = r.max((self.plan[i].iter().sum::<f64>() - a).abs());
        }
        for (j, b) in self.cols.iter().enumerate() {
            r = r.max((self.plan.iter().map(|row| row[j]).sum::<f64>() - b).abs());
        }
        r
    }
}

#[derive(Clone, Debug)]
pub struct CouplingResult {
    pub value: f64,
    pub coupling: Coupling,
}

/// Spectral projectors with their eigenvalue.
fn projectors(rho: &DensityMatrix) -> Vec<(f64, CMat)> {
    let s = rho.spectrum();
    let d = rho.dim();
    let mut groups: Vec<(f64, Vec<usize>)> = Vec::new();
    for (k, &v) in s.values.iter().enumerate() {
        match groups.last_mut() {
            Some((val, idx)) if (v - *val).abs() < PROJECTOR_MERGE => idx.push(k),
            _ => groups.push((v, vec![k])),
        }
    }
    groups
        .into_iter()
        .map(|(_, idx)| {
            let mut p = CMat::zeros(d, d);
            for &k in &idx {
                let col = s.vectors.column(k);
                p += col * col.adjoint();
            }
            let mean = idx.iter().map(|&k| s.values[k]).sum::<f64>() / idx.len() as f64;
            (mean, p)
        })
        .collect()
}

/// Exact solution of the transportation problem with supplies `a`,
/// demands `b` (equal totals) and costs `c`, by successive shortest paths.
pub fn transport_plan(a: &[f64], b: &[f64], c: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let (m, n) = (a.len(), b.len());
    if c.len() != m || c.iter().any(|r| r.len() != n) {
        return Err(QmsError::InvalidInput(
            "cost matrix shape does not match marginals".into(),
        ));
    }
    let total_a: f64 = a.iter().sum();
    let total_b: f64 = b.iter().sum();
    if a.iter().chain(b).any(|&x| x < 0.0 || !x.is_finite()) || (total_a - total_b).abs() > 1e-9 * total_a.max(1.0) {
        return Err(QmsError::InternalError("transportation problem is infeasible".into()));
    }
    let mut supply = a.to_vec();
    let mut demand: Vec<f64> = if total_b > 0.0 {
        b.iter().map(|x| x * (total_a / total_b)).collect()
    } else {
        b.to_vec()
    };
    let mut plan = vec![vec![0.0; n]; m];
    let eps = 1e-13 * total_a.max(1.0);
    // Nodes: rows 0..m, columns m..m+n. Forward arcs row->col have infinite
    // capacity; backward arcs col->row carry the current flow.
    for _ in 0..(4 * (m + n) * (m + n) + 16) {
        if supply.iter().all(|&s| s <= eps) {
            break;
        }
        let nodes = m + n;
        let mut dist = vec![f64::INFINITY; nodes];
        let mut prev = vec![usize::MAX; nodes];
        for i in 0..m {
            if supply[i] > eps {
                dist[i] = 0.0;
            }
        }
        for _ in 0..nodes {
            let mut changed = false;
            for i in 0..m {
                for j in 0..n {
                    if dist[i] + c[i][j] < dist[m + j] - 1e-15 {
                        dist[m + j] = dist[i] + c[i][j];
                        prev[m + j] = i;
                        changed = true;
                    }
                    if plan[i][j] > eps && dist[m + j] - c[i][j] < dist[i] - 1e-15 {
                        dist[i] = dist[m + j] - c[i][j];
                        prev[i] = m + j;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let target = (0..n)
            .filter(|&j| demand[j] > eps && dist[m + j].is_finite())
            .min_by(|&x, &y| dist[m + x].total_cmp(&dist[m + y]))
            .ok_or_else(|| QmsError::InternalError("no augmenting path in transportation problem".into()))?;
        // Walk back to the source row collecting the bottleneck.
        let mut bottleneck = demand[target];
        let mut node = m + target;
        let mut steps = Vec::new();
        while prev[node] != usize::MAX {
            let p = prev[node];
            if node >= m {
                steps.push((p, node - m, 1.0));
            } else {
                bottleneck = bottleneck.min(plan[node][p - m]);
                steps.push((node, p - m, -1.0));
            }
            node = p;
        }
        bottleneck = bottleneck.min(supply[node]);
        for (i, j, sign) in steps {
            plan[i][j] += sign * bottleneck;
            if plan[i][j] < 0.0 {
                plan[i][j] = 0.0;
            }
        }
        supply[node] -= bottleneck;
        demand[target] -= bottleneck;
    }
    if supply.iter().any(|&s| s > 1e-12 * total_a.max(1.0)) {
        return Err(QmsError::InternalError(
            "transportation solver did not terminate".into(),
        ));
    }
    Ok(plan)
}

/// Coupling distance `W_{2,c}`: the optimal transport cost between the
/// spectral measures of `rho` and `omega` with pairwise costs given by the
/// squared distance between normalised spectral projectors.
pub fn coupling_w2(
    gen: &DetailedBalanceGenerator,
    rho: &DensityMatrix,
    omega: &DensityMatrix,
    opts: &W2Options,
) -> Result<CouplingResult> {
    let p = projectors(rho);
    let q = projectors(omega);
    let normalised = |(_, m): &(f64, CMat)| {
        let tr = m.trace().re;
        DensityMatrix::from_numerical(&(m * C64::new(1.0 / tr, 0.0)))
    };
    let ps = p.iter().map(normalised).collect::<Result<Vec<_>>>()?;
    let qs = q.iter().map(normalised).collect::<Result<Vec<_>>>()?;
    let mut cost = vec![vec![0.0; qs.len()]; ps.len()];
    for (i, a) in ps.iter().enumerate() {
        for (j, b) in qs.iter().enumerate() {
            let same = (a.matrix() - b.matrix()).norm() < 1e-12;
            cost[i][j] = if same {
                0.0
            } else {
                w2_distance(gen, a, b, opts)?.value.powi(2)
            };
        }
    }
    let rows: Vec<f64> = p.iter().map(|(v, m)| v * m.trace().re).collect();
    let cols: Vec<f64> = q.iter().map(|(v, m)| v * m.trace().re).collect();
    let plan = transport_plan(&rows, &cols, &cost)?;
    let value = plan
        .iter()
        .zip(&cost)
        .map(|(pr, cr)| pr.iter().zip(cr).map(|(x, y)| x * y).sum::<f64>())
        .sum::<f64>()
        .max(0.0)
        .sqrt();
    Ok(CouplingResult {
        value,
        coupling: Coupling { rows, cols, cost, plan },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn assignment_picks_cheaper_diagonal() {
        let plan = transport_plan(&[0.5, 0.5], &[0.5, 0.5], &[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!((plan[0][0] - 0.5).abs() < 1e-15 && plan[0][1].abs() < 1e-15);
        let plan = transport_plan(&[0.5, 0.5], &[0.5, 0.5], &[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        assert!((plan[0][1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn needs_reverse_arcs() {
        // Greedy row-by-row filling is suboptimal here.
        let c = vec![vec![1.0, 2.0, 3.0], vec![1.0, 5.0, 9.0], vec![2.0, 4.0, 8.0]];
        let a = [0.3, 0.3, 0.4];
        let b = [0.5, 0.2, 0.3];
        let plan = transport_plan(&a, &b, &c).unwrap();
        let cost: f64 = (0..3)
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .map(|(i, j)| plan[i][j] * c[i][j])
            .sum();
        // Optimum found by enumerating the free parameters on a fine grid.
        let mut best = f64::INFINITY;
        let steps = 300;
        for x in 0..=steps {
            for y in 0..=steps {
                let q00 = 0.3 * x as f64 / steps as f64;
                let q10 = 0.3 * y as f64 / steps as f64;
                let q20 = 0.5 - q00 - q10;
                if !(0.0..=0.4).contains(&q20) {
                    continue;
                }
                for z in 0..=60 {
                    let q01 = (0.3 - q00).min(0.2) * z as f64 / 60.0;
                    let q02 = 0.3 - q00 - q01;
                    let rest1 = 0.3 - q10;
                    let q11_max = (0.2 - q01).min(rest1);
                    for w in 0..=20 {
                        let q11 = q11_max * w as f64 / 20.0;
                        let q12 = rest1 - q11;
                        let q21 = 0.2 - q01 - q11;
                        let q22 = 0.3 - q02 - q12;
                        if q02 < -1e-12 || q12 < -1e-12 || q21 < -1e-12 || q22 < -1e-12 {
                            continue;
                        }
                        let v = q00
                            + 2.0 * q01
                            + 3.0 * q02
                            + q10
                            + 5.0 * q11
                            + 9.0 * q12
                            + 2.0 * q20
                            + 4.0 * q21
                            + 8.0 * q22;
                        best = best.min(v);
                    }
                }
            }
        }
        assert!(cost <= best + 1e-12, "cost={cost} best={best}");
    }

    #[test]
    fn unequal_totals_rejected() {
        assert!(transport_plan(&[0.5], &[0.7], &[vec![1.0]]).is_err());
    }

    #[test]
    fn tolerates_rounding_in_marginal_totals() {
        let a = [0.1, 0.2, 0.7];
        let b = [0.5, 0.5 - 2e-16];
        let c = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.5, 0.5]];
        let plan = transport_plan(&a, &b, &c).unwrap();
        let total: f64 = plan.iter().flatten().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
