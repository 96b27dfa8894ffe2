//! Explainability views of a trained network over the square `[-1, 1]^2`.

use rayon::prelude::*;

use crate::activation::{curve, Nonlinearity};
use crate::error::{EnnError, Result};
use crate::network::{predict_class, Network};
use crate::tasks::Sample;

pub const DEFAULT_RESOLUTION: usize = 201;
pub const DEFAULT_CURVE_RANGE: (f64, f64) = (-4.0, 4.0);
pub const DEFAULT_CURVE_POINTS: usize = 801;

/// Values on a uniform `R x R` grid over `[-1, 1]^2`, row-major with `x2`
/// varying fastest: entry `i * R + j` sits at `(coord(i), coord(j))`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMap {
    resolution: usize,
    values: Vec<f64>,
}

impl GridMap {
    /// Evaluates `f(x1, x2)` on the grid, rows in parallel.
    pub fn from_fn<F>(resolution: usize, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> Result<f64> + Sync,
    {
        if resolution < 2 {
            return Err(EnnError::InvalidConfig(format!(
                "grid resolution must be >= 2, got {resolution}"
            )));
        }
        let rows: Vec<Vec<f64>> = (0..resolution)
            .into_par_iter()
            .map(|i| {
                let x1 = grid_coord(i, resolution);
                (0..resolution)
                    .map(|j| f(x1, grid_coord(j, resolution)))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            resolution,
            values: rows.concat(),
        })
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.resolution + j]
    }

    pub fn coord(&self, i: usize) -> f64 {
        grid_coord(i, self.resolution)
    }

    /// `(x1, x2, value)` triples in storage order.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let r = self.resolution;
        self.values
            .iter()
            .enumerate()
            .map(move |(idx, &v)| (grid_coord(idx / r, r), grid_coord(idx % r, r), v))
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }
}

/// `-1 + 2i/(R-1)`, exact at both ends.
pub fn grid_coord(i: usize, resolution: usize) -> f64 {
    if i + 1 == resolution {
        1.0
    } else {
        -1.0 + 2.0 * i as f64 / (resolution - 1) as f64
    }
}

/// Output of hidden neuron `k` (0-based) over the input square.
pub fn bump<A: Nonlinearity + Sync>(
    model: &Network<A>,
    k: usize,
    resolution: usize,
) -> Result<GridMap> {
    if k >= model.m1() {
        return Err(EnnError::IndexOutOfRange {
            index: k,
            limit: model.m1(),
        });
    }
    let act = &model.hidden_activations()[k];
    GridMap::from_fn(resolution, |x1, x2| {
        Ok(act.eval(model.hidden_pre_activation(k, &[x1, x2])))
    })
}

/// Hard decisions `+-1` over the input square.
pub fn decision_map<A: Nonlinearity + Sync>(
    model: &Network<A>,
    resolution: usize,
) -> Result<GridMap> {
    GridMap::from_fn(resolution, |x1, x2| {
        model.predict(&[x1, x2]).map(predict_class)
    })
}

/// Soft output `y_hat` over the input square.
pub fn response_surface<A: Nonlinearity + Sync>(
    model: &Network<A>,
    resolution: usize,
) -> Result<GridMap> {
    GridMap::from_fn(resolution, |x1, x2| model.predict(&[x1, x2]))
}

/// Pearson correlation of two equally sized grids; `None` if either is constant.
pub fn correlation(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    let denom = (saa * sbb).sqrt();
    if denom > 0.0 && denom.is_finite() {
        Some(sab / denom)
    } else {
        None
    }
}

/// Two hidden neurons with near-identical bumps.
#[derive(Debug, Clone, PartialEq)]
pub struct RedundantPair {
    /// 0-based neuron indices, `first < second`.
    pub first: usize,
    pub second: usize,
    pub correlation: f64,
    /// `sign(a_2[first] * a_2[second])`, 0 if either weight is 0.
    pub weight_sign: f64,
    /// The two contributions cancel: correlated bumps, opposite weights.
    pub cancelling: bool,
}

/// Pairs of hidden neurons whose bumps correlate at `1 - tol` or more.
pub fn redundancy_report<A: Nonlinearity + Sync>(
    model: &Network<A>,
    resolution: usize,
    tol: f64,
) -> Result<Vec<RedundantPair>> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(EnnError::InvalidConfig(format!(
            "tolerance must lie in (0, 1), got {tol}"
        )));
    }
    let bumps = (0..model.m1())
        .map(|k| bump(model, k, resolution))
        .collect::<Result<Vec<_>>>()?;
    let weights = model.output_weights();
    let mut out = Vec::new();
    for j in 0..bumps.len() {
        for k in j + 1..bumps.len() {
            let Some(corr) = correlation(bumps[j].values(), bumps[k].values()) else {
                continue;
            };
            if corr >= 1.0 - tol {
                let product = weights[j + 1] * weights[k + 1];
                let weight_sign = if product > 0.0 {
                    1.0
                } else if product < 0.0 {
                    -1.0
                } else {
                    0.0
                };
                out.push(RedundantPair {
                    first: j,
                    second: k,
                    correlation: corr,
                    weight_sign,
                    cancelling: weight_sign < 0.0,
                });
            }
        }
    }
    Ok(out)
}

/// One activation curve plus the pre-activation range a dataset drove it over.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationCurve {
    /// `hidden_<k>` (0-based) or `output`.
    pub name: String,
    pub points: Vec<(f64, f64)>,
    pub operating_range: Option<(f64, f64)>,
}

/// Curves for every hidden neuron and the output neuron.
pub fn activation_report<A: Nonlinearity>(
    model: &Network<A>,
    range: (f64, f64),
    points: usize,
    data: Option<&[Sample]>,
) -> Result<Vec<ActivationCurve>> {
    let m1 = model.m1();
    let mut ranges: Vec<Option<(f64, f64)>> = vec![None; m1 + 1];
    if let Some(data) = data {
        for s in data {
            let t = model.forward(&s.x)?;
            for (slot, z) in ranges
                .iter_mut()
                .zip(t.z1.iter().chain(std::iter::once(&t.z2)))
            {
                *slot = Some(match *slot {
                    None => (*z, *z),
                    Some((lo, hi)) => (lo.min(*z), hi.max(*z)),
                });
            }
        }
    }
    let mut out: Vec<ActivationCurve> = model
        .hidden_activations()
        .iter()
        .enumerate()
        .map(|(k, act)| ActivationCurve {
            name: format!("hidden_{k}"),
            points: curve(act, range.0, range.1, points),
            operating_range: ranges[k],
        })
        .collect();
    out.push(ActivationCurve {
        name: "output".into(),
        points: curve(model.output_activation(), range.0, range.1, points),
        operating_range: ranges[m1],
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activation::AdaptiveActivation;
    use crate::dct::{BasisConfig, DctCoefficients};
    use crate::network::init_model;

    #[test]
    fn grid_is_row_major_with_x2_fastest() {
        let g = GridMap::from_fn(3, |x1, x2| Ok(10.0 * x1 + x2)).unwrap();
        assert_eq!(
            g.values(),
            &[-11.0, -10.0, -9.0, -1.0, 0.0, 1.0, 9.0, 10.0, 11.0]
        );
        let pts: Vec<_> = g.points().collect();
        assert_eq!(pts[1], (-1.0, 0.0, -10.0));
        assert!(GridMap::from_fn(1, |_, _| Ok(0.0)).is_err());
    }

    #[test]
    fn default_grid_hits_zero_and_edges() {
        assert_eq!(grid_coord(0, 201), -1.0);
        assert_eq!(grid_coord(100, 201), 0.0);
        assert_eq!(grid_coord(200, 201), 1.0);
    }

    #[test]
    fn zero_hidden_coefficients_give_flat_bumps() {
        let mut m = init_model(2, 3, BasisConfig::default(), 1).unwrap();
        for a in m.hidden_activations_mut() {
            *a = AdaptiveActivation::zeros(BasisConfig::default());
        }
        let b = bump(&m, 1, 11).unwrap();
        assert!(b.values().iter().all(|&v| v == 0.0));
        assert!(bump(&m, 3, 11).is_err());
    }

    #[test]
    fn diagonal_bump_is_constant_along_level_lines() {
        let basis = BasisConfig::default();
        let mut f = vec![0.0; 6];
        f[0] = -1.0;
        let act = AdaptiveActivation::new(DctCoefficients::new(f, basis).unwrap());
        let m = Network::from_parts(
            2,
            1,
            basis,
            vec![0.0, 1.0, -1.0],
            vec![act],
            vec![0.0, 1.0],
            AdaptiveActivation::identity(basis),
        )
        .unwrap();
        let b = bump(&m, 0, 21).unwrap();
        for i in 0..20 {
            assert!((b.get(i, i) - b.get(i + 1, i + 1)).abs() < 1e-12);
            let (x1, x2) = (b.coord(i + 1), b.coord(i));
            let expected = (std::f64::consts::FRAC_PI_2 * (x1 - x2)).sin();
            assert!((b.get(i + 1, i) - expected).abs() < 5e-3);
        }
    }

    #[test]
    fn correlation_edge_cases() {
        assert_eq!(correlation(&[1.0, 1.0], &[0.0, 2.0]), None);
        assert!((correlation(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((correlation(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn redundancy_rejects_bad_tolerance() {
        let m = init_model(2, 3, BasisConfig::default(), 1).unwrap();
        assert!(redundancy_report(&m, 11, 0.0).is_err());
        assert!(redundancy_report(&m, 11, 1.0).is_err());
    }

    #[test]
    fn activation_report_shape() {
        let m = init_model(2, 6, BasisConfig::default(), 1).unwrap();
        let data = vec![
            Sample {
                x: vec![0.5, -0.5],
                y: 1.0,
            },
            Sample {
                x: vec![-0.2, 0.1],
                y: -1.0,
            },
        ];
        let r =
            activation_report(&m, DEFAULT_CURVE_RANGE, DEFAULT_CURVE_POINTS, Some(&data)).unwrap();
        assert_eq!(r.len(), 7);
        assert_eq!(r[6].name, "output");
        assert_eq!(r[0].points.len(), 801);
        // hidden 0 has direction [0, 0, 1]: z = x2.
        assert_eq!(r[0].operating_range, Some((-0.5, 0.1)));
    }
}
